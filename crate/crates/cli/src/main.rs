//! Command-line front end.
//!
//! Exit codes: 0 success, 2 parse/validation failure, 3 size guard
//! exceeded, 4 precondition failure (not a member of the class, not an
//! equivalence class, player inside the class). Verification failures
//! inside the constructions surface as exit 1.

mod golden;

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tugames::classification::classify;
use tugames::coalition::Coalition;
use tugames::constructions::{
    choose_m, closure_construct, extend_equivalence_class, well_definedness_check, ClosureTarget,
    ConstructionError, FillStrategy,
};
use tugames::equivalence::{finest_partition, is_equivalence_class};
use tugames::game::Game;
use tugames::io::{read_game, write_game_json, ValueOrder};
use tugames::rational::{parse_rational, rat};
use tugames::shapley::{shapley, shapley_permutation_oracle_with_limit, ShapleyError};
use tugames::young::{
    axiomatic_shapley, check_chain_hypotheses_finite, check_emp_closed_finite, replay_trace,
    solve_axiom_system, AxiomSystemSolution, ClassSpec, DeriveOptions, YoungError,
    DEFAULT_DERIVE_LIMIT,
};

const EXIT_PARSE: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;

const DEFAULT_SHAPLEY_LIMIT: usize = 12;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn guard(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_GUARD,
            message: message.into(),
        }
    }

    fn precondition(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<YoungError> for Failure {
    fn from(e: YoungError) -> Failure {
        match &e {
            YoungError::GuardExceeded { .. } | YoungError::TooManyGames { .. } => {
                Failure::guard(e.to_string())
            }
            YoungError::NotAnEquivalenceClass(_)
            | YoungError::EmptyClass
            | YoungError::NotInClass(_)
            | YoungError::MixedPlayerCounts => Failure::precondition(e.to_string()),
            YoungError::Construction(inner) => construction_failure(inner),
        }
    }
}

fn construction_failure(e: &ConstructionError) -> Failure {
    match e {
        ConstructionError::NotAnEquivalenceClass(_)
        | ConstructionError::PlayerInClass(_)
        | ConstructionError::InputNotInClass(_)
        | ConstructionError::UnsupportedClass(_)
        | ConstructionError::BadFill => Failure::precondition(e.to_string()),
        ConstructionError::PostconditionFailed(_) => Failure::internal(e.to_string()),
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Failure {
        construction_failure(&e)
    }
}

impl From<ShapleyError> for Failure {
    fn from(e: ShapleyError) -> Failure {
        match e {
            ShapleyError::GuardExceeded { .. } => Failure::guard(e.to_string()),
            _ => Failure::precondition(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tugames",
    about = "Exact cooperative-game computations: Shapley values, game classes, equivalence classes, constructive extensions, and axiom-only derivations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Game file: JSON ({"players", "order", "values"}) or a plain
    /// whitespace-separated value vector. `-` reads standard input.
    #[arg(long, short = 'i')]
    input: String,
    /// Order of plain value vectors.
    #[arg(long, value_parser = parse_order, default_value = "paper")]
    format: ValueOrder,
}

fn parse_order(s: &str) -> Result<ValueOrder, String> {
    match s {
        "paper" => Ok(ValueOrder::Paper),
        "bitmask" => Ok(ValueOrder::Bitmask),
        other => Err(format!("unknown order `{other}` (paper|bitmask)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the Shapley value of a game.
    Shapley {
        #[command(flatten)]
        input: InputArgs,
        /// Cross-check with the permutation-average oracle.
        #[arg(long)]
        oracle: bool,
        /// Player-count guard.
        #[arg(long, default_value_t = DEFAULT_SHAPLEY_LIMIT)]
        max_players: usize,
    },
    /// Print every game class the game belongs to.
    Classify {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Print the equivalence partition, or test one coalition.
    Equiv {
        #[command(flatten)]
        input: InputArgs,
        /// Coalition to test, e.g. "1,2".
        #[arg(long)]
        set: Option<String>,
    },
    /// Print the dual game.
    Dual {
        #[command(flatten)]
        input: InputArgs,
        /// Emit a JSON game file instead of a plain vector.
        #[arg(long)]
        json: bool,
    },
    /// Grow an equivalence class by one player, preserving that player's
    /// marginal contribution function.
    Extend {
        #[command(flatten)]
        input: InputArgs,
        /// The equivalence class to grow, e.g. "1,2".
        #[arg(long)]
        set: String,
        /// The player to absorb into the class.
        #[arg(long)]
        player: usize,
        /// Fill rule for coalitions untouched by the class: zero|copy|expM.
        #[arg(long, default_value = "zero")]
        fill: String,
        /// Stay inside a class: unrestricted|additive|strictly-convex|
        /// strictly-concave. Overrides --fill.
        #[arg(long)]
        target: Option<String>,
        /// Override the canonical exponential-fill bound.
        #[arg(long)]
        big_m: Option<String>,
        /// Confirm order independence of the extension sums first.
        #[arg(long, default_value_t = 5)]
        check_orderings: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a JSON game file instead of a plain vector.
        #[arg(long)]
        json: bool,
    },
    /// Derive the Shapley value using only the PO, ETP, and EMP axioms.
    Derive {
        #[command(flatten)]
        input: InputArgs,
        /// Class to stay inside: all-games or a class name.
        #[arg(long, default_value = "all-games")]
        class: String,
        /// Print the derivation trace.
        #[arg(long)]
        trace: bool,
        /// Print the derivation trace as JSON.
        #[arg(long)]
        trace_json: bool,
        /// Shuffle companion order with this seed (result must not change).
        #[arg(long)]
        seed: Option<u64>,
        /// Player-count guard.
        #[arg(long, default_value_t = DEFAULT_DERIVE_LIMIT)]
        max_players: usize,
    },
    /// Check EMP-closedness and the chain-existence hypotheses on a finite
    /// set of games.
    ClosureCheck {
        /// Game files (each JSON or plain vector).
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long, value_parser = parse_order, default_value = "paper")]
        format: ValueOrder,
    },
    /// Solve the exact PO/ETP/EMP linear system on a finite set of games.
    SolveAxioms {
        /// Game files (each JSON or plain vector).
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long, value_parser = parse_order, default_value = "paper")]
        format: ValueOrder,
    },
    /// Run the embedded reproduction suite; exit 0 only if every scenario
    /// passes.
    Examples,
}

fn read_input(path: &str, order: ValueOrder) -> Result<Game, Failure> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::parse(format!("reading standard input: {e}")))?;
        buf
    } else {
        fs::read_to_string(path).map_err(|e| Failure::parse(format!("reading {path}: {e}")))?
    };
    read_game(&text, order).map_err(|e| Failure::parse(format!("{path}: {e}")))
}

fn parse_set(s: &str, n: usize) -> Result<Coalition, Failure> {
    let mut players = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let p: usize = part
            .parse()
            .map_err(|_| Failure::parse(format!("bad player index `{part}` in set `{s}`")))?;
        if p < 1 || p > n {
            return Err(Failure::parse(format!(
                "player {p} out of range 1..={n} in set `{s}`"
            )));
        }
        players.push(p);
    }
    Ok(Coalition::from_players(n, &players))
}

fn check_player(p: usize, n: usize) -> Result<(), Failure> {
    if p < 1 || p > n {
        return Err(Failure::parse(format!("player {p} out of range 1..={n}")));
    }
    Ok(())
}

fn game_vector(game: &Game, order: ValueOrder) -> String {
    let values = match order {
        ValueOrder::Paper => game.to_paper_order(),
        ValueOrder::Bitmask => game.to_bitmask_order(),
    };
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Shapley {
            input,
            oracle,
            max_players,
        } => {
            let game = read_input(&input.input, input.format)?;
            if game.n() > max_players {
                return Err(Failure::guard(format!(
                    "game has {} players, exceeding the guard of {max_players}",
                    game.n()
                )));
            }
            let phi = shapley(&game);
            if oracle {
                let check = shapley_permutation_oracle_with_limit(&game, max_players.min(10))?;
                if check != phi {
                    return Err(Failure::internal(
                        "permutation oracle disagrees with the subset formula",
                    ));
                }
            }
            println!("{phi}");
            Ok(())
        }
        Command::Classify { input } => {
            let game = read_input(&input.input, input.format)?;
            let mut names: Vec<&str> = classify(&game).iter().map(|c| c.name()).collect();
            names.sort_unstable();
            for name in names {
                println!("{name}");
            }
            Ok(())
        }
        Command::Equiv { input, set } => {
            let game = read_input(&input.input, input.format)?;
            match set {
                Some(s) => {
                    let coalition = parse_set(&s, game.n())?;
                    let verdict = if is_equivalence_class(&game, coalition) {
                        "yes"
                    } else {
                        "no"
                    };
                    println!("equivalence class: {verdict}");
                }
                None => println!("{}", finest_partition(&game)),
            }
            Ok(())
        }
        Command::Dual { input, json } => {
            let game = read_input(&input.input, input.format)?;
            let dual = game.dual();
            if json {
                println!("{}", write_game_json(&dual, input.format));
            } else {
                println!("{}", game_vector(&dual, input.format));
            }
            Ok(())
        }
        Command::Extend {
            input,
            set,
            player,
            fill,
            target,
            big_m,
            check_orderings,
            seed,
            json,
        } => {
            let game = read_input(&input.input, input.format)?;
            let n = game.n();
            let class = parse_set(&set, n)?;
            check_player(player, n)?;

            if check_orderings > 0 {
                let ok = well_definedness_check(&game, class, player, check_orderings, seed)?;
                if !ok {
                    return Err(Failure::internal(
                        "extension sums depended on the member ordering",
                    ));
                }
            }

            let result = match target {
                Some(name) => {
                    let target = match name.as_str() {
                        "unrestricted" => ClosureTarget::Unrestricted,
                        "additive" => ClosureTarget::Additive,
                        "strictly-convex" => ClosureTarget::StrictlyConvex,
                        "strictly-concave" => ClosureTarget::StrictlyConcave,
                        other => return Err(Failure::parse(format!("unknown target `{other}`"))),
                    };
                    closure_construct(&game, class, player, target)?
                }
                None => {
                    let strategy = match fill.as_str() {
                        "zero" => FillStrategy::ZeroFill,
                        "copy" => FillStrategy::CopyFromSource,
                        "expM" => {
                            let bound = match &big_m {
                                Some(text) => parse_rational(text)
                                    .map_err(|e| Failure::parse(format!("--big-m: {e}")))?,
                                None => choose_m(&game, player),
                            };
                            let scale = &bound * rat(n as i64);
                            FillStrategy::ExponentialFill {
                                big_m: bound,
                                scale,
                            }
                        }
                        other => return Err(Failure::parse(format!("unknown fill `{other}`"))),
                    };
                    extend_equivalence_class(&game, class, player, &strategy)?
                }
            };

            for lost in classify(&game) {
                if !tugames::is_member(&result, lost) {
                    eprintln!("warning: result not {}", lost.name());
                }
            }
            if json {
                println!("{}", write_game_json(&result, input.format));
            } else {
                println!("{}", game_vector(&result, input.format));
            }
            Ok(())
        }
        Command::Derive {
            input,
            class,
            trace,
            trace_json,
            seed,
            max_players,
        } => {
            let game = read_input(&input.input, input.format)?;
            let spec: ClassSpec = class.parse().map_err(|e: String| Failure::parse(e))?;
            let opts = DeriveOptions {
                max_players,
                order_seed: seed,
            };
            let (allocation, derivation) = axiomatic_shapley(&game, spec, &opts)?;
            replay_trace(&derivation)
                .map_err(|e| Failure::internal(format!("trace replay failed: {e}")))?;
            println!("{allocation}");
            if trace {
                println!("{derivation}");
            }
            if trace_json {
                println!("{}", derivation.to_json());
            }
            Ok(())
        }
        Command::ClosureCheck { inputs, format } => {
            let games = inputs
                .iter()
                .map(|p| read_input(p, format))
                .collect::<Result<Vec<_>, _>>()?;
            let report = check_emp_closed_finite(&games)?;
            if report.closed {
                println!("emp-closed: yes");
            } else {
                println!("emp-closed: no");
                let ce = report
                    .counterexample
                    .expect("counterexample accompanies no");
                println!(
                    "counterexample: game {} (file {}), class {}, player {}",
                    ce.game_index + 1,
                    inputs[ce.game_index],
                    ce.class,
                    ce.player
                );
            }
            let hypotheses = check_chain_hypotheses_finite(&games)?;
            if hypotheses.holds {
                println!("chain hypotheses: yes");
            } else {
                println!("chain hypotheses: no");
                if let Some((gi, k)) = hypotheses.first_failure {
                    println!(
                        "first failure: game {} (file {}), player {}",
                        gi + 1,
                        inputs[gi],
                        k
                    );
                }
            }
            Ok(())
        }
        Command::SolveAxioms { inputs, format } => {
            let games = inputs
                .iter()
                .map(|p| read_input(p, format))
                .collect::<Result<Vec<_>, _>>()?;
            match solve_axiom_system(&games)? {
                AxiomSystemSolution::Unique(table) => {
                    println!("unique");
                    for (gi, path) in inputs.iter().enumerate() {
                        let row = table.row(gi).expect("unique table is total");
                        println!("game {} ({path}): {row}", gi + 1);
                    }
                }
                AxiomSystemSolution::Underdetermined { nullity } => {
                    println!("underdetermined, nullity = {nullity}");
                }
                AxiomSystemSolution::Infeasible => {
                    println!("infeasible");
                }
            }
            Ok(())
        }
        Command::Examples => {
            let results = golden::run_all();
            let mut failures = 0usize;
            for r in &results {
                match &r.detail {
                    Ok(()) => println!("PASS {}", r.name),
                    Err(msg) => {
                        failures += 1;
                        println!("FAIL {}: {msg}", r.name);
                    }
                }
            }
            println!("{} scenarios, {} failed", results.len(), failures);
            if failures > 0 {
                return Err(Failure::internal(format!("{failures} scenarios failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // die quietly when the consumer of a pipe goes away (e.g. `| head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
