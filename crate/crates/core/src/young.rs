//! Deriving the Shapley value from the axioms alone.
//!
//! Given a game and a class of games to work inside, the engine resolves
//! every payoff using only three inference moves:
//!
//! - **Construct**: build a companion game that keeps one player's marginal
//!   contribution function and enlarges an equivalence class by that player
//!   (the [`crate::constructions`] machinery);
//! - **EmpTransfer**: copy a resolved payoff across two games whose
//!   marginal functions for that player coincide;
//! - **EtpPoResolve**: once every payoff outside an equivalence class is
//!   resolved, split the remainder of v(N) equally among the class.
//!
//! The engine never consults the Shapley formula; agreement with it is an
//! external test, not an internal shortcut. Every run yields a
//! [`DerivationTrace`] that [`replay_trace`] can re-validate step by step.
//!
//! The module also hosts the finite-set analyses: EMP-closedness, the
//! chain-existence hypotheses behind the derivation, and an exact linear
//! solver for the full PO/ETP/EMP system on a finite set of games.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::classification::{is_member, GameClass};
use crate::coalition::Coalition;
use crate::constructions::{
    big_m_rebuild, closure_construct, dual_big_m_rebuild, strictly_convex_companion, ClosureTarget,
    ConstructionError, BIG_M_CLASSES, DUAL_ROUTE_CLASSES,
};
use crate::equivalence::{is_equivalence_class, players_equivalent};
use crate::game::{Allocation, Game};
use crate::rational::{rat, Rational};
use crate::shapley::SolutionTable;

pub const DEFAULT_DERIVE_LIMIT: usize = 6;
pub const FINITE_SET_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum YoungError {
    #[error("game has {n} players, exceeding the derivation guard of {limit}")]
    GuardExceeded { n: usize, limit: usize },
    #[error("coalition {0} is not an equivalence class in the game")]
    NotAnEquivalenceClass(String),
    #[error("the class to resolve by equal treatment must be nonempty")]
    EmptyClass,
    #[error("game is not a member of {0}")]
    NotInClass(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("games have mixed player counts")]
    MixedPlayerCounts,
    #[error("finite-set check limited to {limit} games, got {got}")]
    TooManyGames { got: usize, limit: usize },
}

/// The class a derivation is allowed to move inside.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum ClassSpec {
    AllGames,
    Class(GameClass),
}

/// How a [`ClassSpec`] reaches a fully symmetric game.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DerivationRoute {
    /// Chain of in-class closures growing one equivalence class.
    Direct(ClosureTarget),
    /// Big-M rebuild first, then strictly convex chains per player.
    BigM(GameClass),
    /// Dual big-M rebuild, then strictly concave chains per player.
    DualBigM(GameClass),
}

impl ClassSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassSpec::AllGames => "all-games",
            ClassSpec::Class(c) => c.name(),
        }
    }

    pub fn contains(&self, v: &Game) -> bool {
        match self {
            ClassSpec::AllGames => true,
            ClassSpec::Class(c) => is_member(v, *c),
        }
    }

    /// Every spec maps to exactly one route.
    pub fn route(&self) -> DerivationRoute {
        match self {
            ClassSpec::AllGames => DerivationRoute::Direct(ClosureTarget::Unrestricted),
            ClassSpec::Class(GameClass::Additive) => {
                DerivationRoute::Direct(ClosureTarget::Additive)
            }
            ClassSpec::Class(GameClass::StrictlyConvex) => {
                DerivationRoute::Direct(ClosureTarget::StrictlyConvex)
            }
            ClassSpec::Class(GameClass::StrictlyConcave) => {
                DerivationRoute::Direct(ClosureTarget::StrictlyConcave)
            }
            ClassSpec::Class(c) if BIG_M_CLASSES.contains(c) => DerivationRoute::BigM(*c),
            ClassSpec::Class(c) => {
                debug_assert!(DUAL_ROUTE_CLASSES.contains(c));
                DerivationRoute::DualBigM(*c)
            }
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<ClassSpec, String> {
        if s == "all-games" {
            return Ok(ClassSpec::AllGames);
        }
        s.parse::<GameClass>()
            .map(ClassSpec::Class)
            .map_err(|_| format!("unknown class spec `{s}` (try `all-games` or a class name)"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DeriveOptions {
    /// Recursion guard on the player count.
    pub max_players: usize,
    /// `None` processes players in ascending order; a seed shuffles the
    /// order deterministically (the result must not change either way).
    pub order_seed: Option<u64>,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            max_players: DEFAULT_DERIVE_LIMIT,
            order_seed: None,
        }
    }
}

/// One inference step. Game references index into the trace's game list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepKind {
    Construct {
        source: usize,
        result: usize,
        /// The player whose marginal contribution function is preserved.
        player: usize,
        /// The class that was grown by `player`, when a closure was used.
        class: Option<Coalition>,
        method: &'static str,
    },
    EmpTransfer {
        from: usize,
        to: usize,
        player: usize,
        payoff: Rational,
    },
    EtpPoResolve {
        game: usize,
        members: Coalition,
        payoff_each: Rational,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DerivationStep {
    pub kind: StepKind,
}

impl DerivationStep {
    pub fn justification(&self) -> &'static str {
        match self.kind {
            StepKind::Construct { .. } => "construction",
            StepKind::EmpTransfer { .. } => "emp",
            StepKind::EtpPoResolve { .. } => "etp+po",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct TraceStats {
    pub games_constructed: usize,
    pub max_depth: usize,
    pub memo_hits: usize,
}

/// A complete, replayable record of one derivation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DerivationTrace {
    /// Which spec drove the derivation.
    pub spec: String,
    /// Conventions the engine committed to for this run.
    pub note: String,
    /// Index of the input game in `games`.
    pub root: usize,
    pub games: Vec<Game>,
    pub steps: Vec<DerivationStep>,
    pub allocation: Allocation,
    pub stats: TraceStats,
}

impl DerivationTrace {
    pub fn to_json(&self) -> serde_json::Value {
        let games: Vec<serde_json::Value> = self
            .games
            .iter()
            .map(|g| {
                json!({
                    "players": g.n(),
                    "order": "paper",
                    "values": g.to_paper_order().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| match &s.kind {
                StepKind::Construct {
                    source,
                    result,
                    player,
                    class,
                    method,
                } => json!({
                    "kind": "construct",
                    "justification": s.justification(),
                    "source": source,
                    "result": result,
                    "player": player,
                    "class": class.map(|c| c.players().collect::<Vec<_>>()),
                    "method": method,
                }),
                StepKind::EmpTransfer {
                    from,
                    to,
                    player,
                    payoff,
                } => json!({
                    "kind": "emp-transfer",
                    "justification": s.justification(),
                    "from": from,
                    "to": to,
                    "player": player,
                    "payoff": payoff.to_string(),
                }),
                StepKind::EtpPoResolve {
                    game,
                    members,
                    payoff_each,
                } => json!({
                    "kind": "etp-po-resolve",
                    "justification": s.justification(),
                    "game": game,
                    "members": members.players().collect::<Vec<_>>(),
                    "payoff_each": payoff_each.to_string(),
                }),
            })
            .collect();
        json!({
            "spec": self.spec,
            "note": self.note,
            "root": self.root,
            "games": games,
            "steps": steps,
            "allocation": self.allocation.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "stats": {
                "games_constructed": self.stats.games_constructed,
                "max_depth": self.stats.max_depth,
                "memo_hits": self.stats.memo_hits,
            },
        })
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# derivation on {}: {}", self.spec, self.note)?;
        for (idx, g) in self.games.iter().enumerate() {
            let marker = if idx == self.root { " [input]" } else { "" };
            writeln!(f, "g{idx} = ({g}){marker}")?;
        }
        for step in &self.steps {
            match &step.kind {
                StepKind::Construct {
                    source,
                    result,
                    player,
                    class,
                    method,
                } => match class {
                    Some(c) => writeln!(
                        f,
                        "construct g{result} from g{source}: grow class {c} by player {player} ({method})"
                    )?,
                    None => writeln!(
                        f,
                        "construct g{result} from g{source}: rebuild around player {player} ({method})"
                    )?,
                },
                StepKind::EmpTransfer {
                    from,
                    to,
                    player,
                    payoff,
                } => writeln!(
                    f,
                    "transfer g{from} -> g{to}: player {player} gets {payoff} [emp]"
                )?,
                StepKind::EtpPoResolve {
                    game,
                    members,
                    payoff_each,
                } => writeln!(
                    f,
                    "resolve g{game}: members of {members} get {payoff_each} each [etp+po]"
                )?,
            }
        }
        writeln!(f, "allocation: {}", self.allocation)?;
        write!(
            f,
            "stats: {} games constructed, depth {}, {} memo hits",
            self.stats.games_constructed, self.stats.max_depth, self.stats.memo_hits
        )
    }
}

struct Deriver {
    order_seed: Option<u64>,
    rng: ChaCha8Rng,
    games: Vec<Game>,
    index: HashMap<Game, usize>,
    /// Derived allocations keyed by the game's full value table (its id).
    memo: HashMap<usize, Allocation>,
    steps: Vec<DerivationStep>,
    stats: TraceStats,
}

impl Deriver {
    fn new(opts: &DeriveOptions) -> Deriver {
        Deriver {
            order_seed: opts.order_seed,
            rng: ChaCha8Rng::seed_from_u64(opts.order_seed.unwrap_or(0)),
            games: Vec::new(),
            index: HashMap::new(),
            memo: HashMap::new(),
            steps: Vec::new(),
            stats: TraceStats::default(),
        }
    }

    fn intern(&mut self, g: Game) -> usize {
        if let Some(&id) = self.index.get(&g) {
            return id;
        }
        let id = self.games.len();
        self.index.insert(g.clone(), id);
        self.games.push(g);
        id
    }

    fn arrange(&mut self, mut players: Vec<usize>) -> Vec<usize> {
        if self.order_seed.is_some() {
            players.shuffle(&mut self.rng);
        }
        players
    }

    fn push(&mut self, kind: StepKind) {
        self.steps.push(DerivationStep { kind });
    }

    /// Resolves the full allocation of `gid`, whose coalition `class` is an
    /// equivalence class: payoffs outside the class come from companion
    /// games via EMP, the class itself from ETP + PO.
    fn derive(
        &mut self,
        gid: usize,
        class: Coalition,
        target: ClosureTarget,
        depth: usize,
    ) -> Result<Allocation, YoungError> {
        if let Some(done) = self.memo.get(&gid) {
            self.stats.memo_hits += 1;
            return Ok(done.clone());
        }
        self.stats.max_depth = self.stats.max_depth.max(depth);

        let game = self.games[gid].clone();
        let n = game.n();

        if class.is_grand() {
            let payoff_each = game.grand_value() / rat(n as i64);
            self.push(StepKind::EtpPoResolve {
                game: gid,
                members: class,
                payoff_each: payoff_each.clone(),
            });
            let done = Allocation::new(vec![payoff_each; n]);
            self.memo.insert(gid, done.clone());
            return Ok(done);
        }

        let mut payoffs: Vec<Option<Rational>> = vec![None; n];
        let outsiders = self.arrange(class.complement().players().collect());
        for p in outsiders {
            let w = closure_construct(&game, class, p, target)?;
            let wid = self.intern(w);
            self.stats.games_constructed += 1;
            self.push(StepKind::Construct {
                source: gid,
                result: wid,
                player: p,
                class: Some(class),
                method: target.name(),
            });
            let sub = self.derive(wid, class.with(p), target, depth + 1)?;
            let payoff = sub.payoff(p).clone();
            debug_assert!(self.games[wid].same_marginals(&game, p));
            self.push(StepKind::EmpTransfer {
                from: wid,
                to: gid,
                player: p,
                payoff: payoff.clone(),
            });
            payoffs[p - 1] = Some(payoff);
        }

        let outsider_sum: Rational = payoffs.iter().flatten().cloned().sum();
        let payoff_each = (game.grand_value() - outsider_sum) / rat(class.size() as i64);
        self.push(StepKind::EtpPoResolve {
            game: gid,
            members: class,
            payoff_each: payoff_each.clone(),
        });
        for p in class.players() {
            payoffs[p - 1] = Some(payoff_each.clone());
        }

        let done = Allocation::new(payoffs.into_iter().map(Option::unwrap).collect());
        self.memo.insert(gid, done.clone());
        Ok(done)
    }

    fn into_trace(
        self,
        spec: String,
        note: String,
        root: usize,
        allocation: Allocation,
    ) -> DerivationTrace {
        DerivationTrace {
            spec,
            note,
            root,
            games: self.games,
            steps: self.steps,
            allocation,
            stats: self.stats,
        }
    }
}

fn check_guard(n: usize, opts: &DeriveOptions) -> Result<(), YoungError> {
    if n > opts.max_players {
        return Err(YoungError::GuardExceeded {
            n,
            limit: opts.max_players,
        });
    }
    Ok(())
}

/// Resolves the allocation of `z` by growing `class_members` one player at
/// a time inside the target class. The class must be a nonempty
/// equivalence class in `z`.
pub fn derive_on_class(
    z: &Game,
    class_members: Coalition,
    target: ClosureTarget,
    opts: &DeriveOptions,
) -> Result<(Allocation, DerivationTrace), YoungError> {
    check_guard(z.n(), opts)?;
    if class_members.is_empty() {
        return Err(YoungError::EmptyClass);
    }
    if !is_equivalence_class(z, class_members) {
        return Err(YoungError::NotAnEquivalenceClass(class_members.to_string()));
    }
    let mut deriver = Deriver::new(opts);
    let root = deriver.intern(z.clone());
    let allocation = deriver.derive(root, class_members, target, 0)?;
    let note = format!(
        "grow {class_members} inside the {} family, companions in {} order",
        target.name(),
        order_name(opts)
    );
    let trace = deriver.into_trace(
        format!("class {class_members}"),
        note,
        root,
        allocation.clone(),
    );
    Ok((allocation, trace))
}

fn order_name(opts: &DeriveOptions) -> String {
    match opts.order_seed {
        None => "ascending".to_string(),
        Some(seed) => format!("seeded({seed})"),
    }
}

/// Derives the full allocation of `v` using only PO, ETP, and EMP, staying
/// inside the class named by `spec`. Each player's payoff comes from that
/// player's own chain; the chains share one memo keyed by game tables.
pub fn axiomatic_shapley(
    v: &Game,
    spec: ClassSpec,
    opts: &DeriveOptions,
) -> Result<(Allocation, DerivationTrace), YoungError> {
    check_guard(v.n(), opts)?;
    if !spec.contains(v) {
        return Err(YoungError::NotInClass(spec.name().to_string()));
    }
    let n = v.n();
    match spec.route() {
        DerivationRoute::Direct(target) => {
            let mut deriver = Deriver::new(opts);
            let root = deriver.intern(v.clone());
            let mut payoffs: Vec<Option<Rational>> = vec![None; n];
            for k in 1..=n {
                let chain = deriver.derive(root, Coalition::singleton(n, k), target, 0)?;
                payoffs[k - 1] = Some(chain.payoff(k).clone());
            }
            let allocation = Allocation::new(payoffs.into_iter().map(Option::unwrap).collect());
            let note = format!(
                "one chain per player from the singleton class, companions in {} order",
                order_name(opts)
            );
            let trace = deriver.into_trace(spec.name().to_string(), note, root, allocation.clone());
            Ok((allocation, trace))
        }
        DerivationRoute::BigM(class) => derive_via_rebuild(v, spec, opts, RebuildKind::BigM(class)),
        DerivationRoute::DualBigM(class) => {
            derive_via_rebuild(v, spec, opts, RebuildKind::DualBigM(class))
        }
    }
}

enum RebuildKind {
    BigM(GameClass),
    DualBigM(GameClass),
}

/// The two-stage routes: rebuild the game around each player k in turn
/// (inside its own class, preserving k's marginals), resolve every other
/// player of the rebuilt game by a chain through the strictly convex or
/// strictly concave family, close the rebuilt game with PO, and transfer
/// k's payoff back by EMP. One rebuild family is chosen per (game, player)
/// and shared by all of that player's companions.
///
/// The strictly convex/concave companion z(i) exists only when the rebuilt
/// game's i-marginals are strictly monotone, and the rebuild cannot force
/// that: for any w with w′_k = v′_k the identity
/// w′ᵢ(Z∪{k}) − w′ᵢ(Z) = v′_k(Z∪{i}) − v′_k(Z) pins those increments to
/// the input. When v′_k carries a tie or a reversal the companion
/// construction reports a verification failure, and the engine falls back
/// to resolving that player of w by a plain unrestricted chain — every
/// axiom application stays valid and the result stays exact; only the
/// auxiliary games of that one chain leave the class.
fn derive_via_rebuild(
    v: &Game,
    spec: ClassSpec,
    opts: &DeriveOptions,
    kind: RebuildKind,
) -> Result<(Allocation, DerivationTrace), YoungError> {
    let n = v.n();
    let (target, method, chain_method) = match kind {
        RebuildKind::BigM(_) => (ClosureTarget::StrictlyConvex, "big-m", "big-m-convex"),
        RebuildKind::DualBigM(_) => (
            ClosureTarget::StrictlyConcave,
            "dual-big-m",
            "dual-big-m-concave",
        ),
    };
    let mut deriver = Deriver::new(opts);
    let root = deriver.intern(v.clone());
    let mut payoffs: Vec<Option<Rational>> = vec![None; n];

    for k in 1..=n {
        // stage 1: rebuild around k inside the class
        type CompanionBuilder = Box<dyn Fn(usize) -> Result<Game, ConstructionError>>;
        let (w, companion_of): (Game, CompanionBuilder) = match kind {
            RebuildKind::BigM(class) => {
                let w = big_m_rebuild(v, k, class)?;
                let rebuilt = w.clone();
                (w, Box::new(move |i| strictly_convex_companion(&rebuilt, i)))
            }
            RebuildKind::DualBigM(class) => {
                let pipe = dual_big_m_rebuild(v, k, class)?;
                let w = pipe.w.clone();
                (w, Box::new(move |i| pipe.companion(i)))
            }
        };
        let wid = deriver.intern(w.clone());
        deriver.stats.games_constructed += 1;
        deriver.push(StepKind::Construct {
            source: root,
            result: wid,
            player: k,
            class: None,
            method,
        });

        // stage 2: every companion i gets its payoff in w from a chain
        // through z(i), or directly when no companion can exist
        let mut w_payoffs: Vec<Option<Rational>> = vec![None; n];
        let companions: Vec<usize> = (1..=n).filter(|&i| i != k).collect();
        for i in deriver.arrange(companions) {
            let payoff = match companion_of(i) {
                Ok(z) => {
                    let zid = deriver.intern(z);
                    deriver.stats.games_constructed += 1;
                    deriver.push(StepKind::Construct {
                        source: wid,
                        result: zid,
                        player: i,
                        class: None,
                        method: chain_method,
                    });
                    let sub = deriver.derive(zid, Coalition::singleton(n, i), target, 0)?;
                    let payoff = sub.payoff(i).clone();
                    debug_assert!(deriver.games[zid].same_marginals(&w, i));
                    deriver.push(StepKind::EmpTransfer {
                        from: zid,
                        to: wid,
                        player: i,
                        payoff: payoff.clone(),
                    });
                    payoff
                }
                Err(ConstructionError::PostconditionFailed(_)) => {
                    let sub = deriver.derive(
                        wid,
                        Coalition::singleton(n, i),
                        ClosureTarget::Unrestricted,
                        0,
                    )?;
                    sub.payoff(i).clone()
                }
                Err(other) => return Err(other.into()),
            };
            w_payoffs[i - 1] = Some(payoff);
        }

        // stage 3: PO closes w at player k, then EMP carries it back
        let others: Rational = w_payoffs.iter().flatten().cloned().sum();
        let k_payoff = w.grand_value() - others;
        deriver.push(StepKind::EtpPoResolve {
            game: wid,
            members: Coalition::singleton(n, k),
            payoff_each: k_payoff.clone(),
        });
        // make the full row of w available for replay and reuse
        deriver.memo.entry(wid).or_insert_with(|| {
            let mut row = w_payoffs.clone();
            row[k - 1] = Some(k_payoff.clone());
            Allocation::new(row.into_iter().map(Option::unwrap).collect())
        });
        deriver.push(StepKind::EmpTransfer {
            from: wid,
            to: root,
            player: k,
            payoff: k_payoff.clone(),
        });
        payoffs[k - 1] = Some(k_payoff);
    }

    let allocation = Allocation::new(payoffs.into_iter().map(Option::unwrap).collect());
    let note = format!(
        "one rebuild per player, chain family fixed per (game, player) and shared by its companions, companions in {} order",
        order_name(opts)
    );
    let trace = deriver.into_trace(spec.name().to_string(), note, root, allocation.clone());
    Ok((allocation, trace))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {0}: {1}")]
    Step(usize, String),
    #[error("derivation left the input game unresolved for player {0}")]
    Unresolved(usize),
    #[error("replayed allocation differs from the recorded one")]
    AllocationMismatch,
}

/// Re-validates a trace from scratch: every construct must preserve the
/// named player's marginals (and produce the grown class when one is
/// recorded), every transfer's marginal-equality side condition must hold
/// with the source payoff already resolved, and every resolve must split
/// exactly what PO leaves for its members. Returns the reconstructed
/// allocation of the root game.
pub fn replay_trace(trace: &DerivationTrace) -> Result<Allocation, ReplayError> {
    let games = &trace.games;
    let mut state: Vec<Vec<Option<Rational>>> = games.iter().map(|g| vec![None; g.n()]).collect();

    for (idx, step) in trace.steps.iter().enumerate() {
        let fail = |msg: String| ReplayError::Step(idx, msg);
        match &step.kind {
            StepKind::Construct {
                source,
                result,
                player,
                class,
                ..
            } => {
                if !games[*result].same_marginals(&games[*source], *player) {
                    return Err(fail(format!(
                        "construct does not preserve player {player}'s marginals"
                    )));
                }
                if let Some(c) = class {
                    let grown = c.with(*player);
                    if !is_equivalence_class(&games[*result], grown) {
                        return Err(fail(format!("{grown} is not an equivalence class")));
                    }
                    if !is_equivalence_class(&games[*source], *c) {
                        return Err(fail(format!("{c} was not an equivalence class")));
                    }
                }
            }
            StepKind::EmpTransfer {
                from,
                to,
                player,
                payoff,
            } => {
                if !games[*from].same_marginals(&games[*to], *player) {
                    return Err(fail(format!(
                        "emp transfer: marginals of player {player} differ"
                    )));
                }
                match &state[*from][*player - 1] {
                    Some(resolved) if resolved == payoff => {}
                    Some(_) => {
                        return Err(fail(
                            "emp transfer: recorded payoff disagrees with the source".to_string(),
                        ))
                    }
                    None => {
                        return Err(fail(format!(
                            "emp transfer: source payoff of player {player} not yet resolved"
                        )))
                    }
                }
                let slot = &mut state[*to][*player - 1];
                if let Some(existing) = slot {
                    if existing != payoff {
                        return Err(fail("emp transfer: conflicting payoff".to_string()));
                    }
                }
                *slot = Some(payoff.clone());
            }
            StepKind::EtpPoResolve {
                game,
                members,
                payoff_each,
            } => {
                let g = &games[*game];
                if members.is_empty() {
                    return Err(fail("resolve on an empty class".to_string()));
                }
                if !is_equivalence_class(g, *members) {
                    return Err(fail(format!("{members} is not an equivalence class")));
                }
                let mut outsider_sum = Rational::zero();
                for p in members.complement().players() {
                    match &state[*game][p - 1] {
                        Some(x) => outsider_sum += x,
                        None => {
                            return Err(fail(format!(
                                "resolve fired before player {p} was resolved"
                            )))
                        }
                    }
                }
                let expected = (g.grand_value() - outsider_sum) / rat(members.size() as i64);
                if expected != *payoff_each {
                    return Err(fail(format!(
                        "resolve arithmetic mismatch: expected {expected}, recorded {payoff_each}"
                    )));
                }
                for p in members.players() {
                    let slot = &mut state[*game][p - 1];
                    if let Some(existing) = slot {
                        if existing != payoff_each {
                            return Err(fail("resolve: conflicting payoff".to_string()));
                        }
                    }
                    *slot = Some(payoff_each.clone());
                }
            }
        }
    }

    let root_row = &state[trace.root];
    let mut payoffs = Vec::with_capacity(root_row.len());
    for (idx, slot) in root_row.iter().enumerate() {
        match slot {
            Some(x) => payoffs.push(x.clone()),
            None => return Err(ReplayError::Unresolved(idx + 1)),
        }
    }
    let replayed = Allocation::new(payoffs);
    if replayed != trace.allocation {
        return Err(ReplayError::AllocationMismatch);
    }
    Ok(replayed)
}

/// Counterexample to EMP-closedness: no member extends `class` by `player`
/// while keeping that player's marginals from game `game_index`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EmpClosedCounterexample {
    pub game_index: usize,
    pub class: Coalition,
    pub player: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmpClosedReport {
    pub closed: bool,
    pub counterexample: Option<EmpClosedCounterexample>,
}

fn check_shared_player_count(games: &[Game]) -> Result<Option<usize>, YoungError> {
    let mut n = None;
    for g in games {
        match n {
            None => n = Some(g.n()),
            Some(m) if m != g.n() => return Err(YoungError::MixedPlayerCounts),
            _ => {}
        }
    }
    Ok(n)
}

/// Exhaustive EMP-closedness check on a finite set: for every member v,
/// every equivalence class S in v, and every player k outside S, some
/// member must have S ∪ {k} as an equivalence class and k's marginals
/// equal to v's.
pub fn check_emp_closed_finite(games: &[Game]) -> Result<EmpClosedReport, YoungError> {
    if games.len() > FINITE_SET_LIMIT {
        return Err(YoungError::TooManyGames {
            got: games.len(),
            limit: FINITE_SET_LIMIT,
        });
    }
    let n = match check_shared_player_count(games)? {
        Some(n) => n,
        None => {
            return Ok(EmpClosedReport {
                closed: true,
                counterexample: None,
            })
        }
    };
    for (vi, v) in games.iter().enumerate() {
        for s in Coalition::all(n) {
            if !is_equivalence_class(v, s) {
                continue;
            }
            for k in s.complement().players() {
                let grown = s.with(k);
                let witness = games
                    .iter()
                    .any(|w| is_equivalence_class(w, grown) && w.same_marginals(v, k));
                if !witness {
                    return Ok(EmpClosedReport {
                        closed: false,
                        counterexample: Some(EmpClosedCounterexample {
                            game_index: vi,
                            class: s,
                            player: k,
                        }),
                    });
                }
            }
        }
    }
    Ok(EmpClosedReport {
        closed: true,
        counterexample: None,
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HypothesesReport {
    pub holds: bool,
    /// First (game index, player) admitting no witnesses.
    pub first_failure: Option<(usize, usize)>,
}

/// Searches a finite set for the chain-existence hypotheses: for every
/// member v and player k there must be an EMP-closed subset B, a member w
/// with w′_k = v′_k, and for every other player i some z ∈ B with
/// z′ᵢ = w′ᵢ.
pub fn check_chain_hypotheses_finite(games: &[Game]) -> Result<HypothesesReport, YoungError> {
    if games.len() > FINITE_SET_LIMIT {
        return Err(YoungError::TooManyGames {
            got: games.len(),
            limit: FINITE_SET_LIMIT,
        });
    }
    let n = match check_shared_player_count(games)? {
        Some(n) => n,
        None => {
            return Ok(HypothesesReport {
                holds: true,
                first_failure: None,
            })
        }
    };

    // all EMP-closed subsets, as index sets
    let mut closed_subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 0..(1usize << games.len()) {
        let subset: Vec<usize> = (0..games.len()).filter(|i| mask & (1 << i) != 0).collect();
        let members: Vec<Game> = subset.iter().map(|&i| games[i].clone()).collect();
        if check_emp_closed_finite(&members)?.closed {
            closed_subsets.push(subset);
        }
    }

    for (vi, v) in games.iter().enumerate() {
        for k in 1..=n {
            let mut found = false;
            'search: for w in games.iter().filter(|w| w.same_marginals(v, k)) {
                for b in &closed_subsets {
                    let covers = (1..=n)
                        .filter(|&i| i != k)
                        .all(|i| b.iter().any(|&zi| games[zi].same_marginals(w, i)));
                    if covers {
                        found = true;
                        break 'search;
                    }
                }
            }
            if !found {
                return Ok(HypothesesReport {
                    holds: false,
                    first_failure: Some((vi, k)),
                });
            }
        }
    }
    Ok(HypothesesReport {
        holds: true,
        first_failure: None,
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AxiomSystemSolution {
    /// The system pins every payoff; the table is the only solution.
    Unique(SolutionTable),
    /// The solution space has this dimension (> 0).
    Underdetermined { nullity: usize },
    /// Cannot happen for the plain PO/ETP/EMP system, which the Shapley
    /// value always satisfies; reported defensively.
    Infeasible,
}

/// Builds the exact linear system of all PO, ETP, and EMP constraints over
/// the unknowns ψᵢ(v) for the given games, and solves it by exact
/// Gauss-Jordan elimination over rationals.
pub fn solve_axiom_system(games: &[Game]) -> Result<AxiomSystemSolution, YoungError> {
    if games.len() > FINITE_SET_LIMIT {
        return Err(YoungError::TooManyGames {
            got: games.len(),
            limit: FINITE_SET_LIMIT,
        });
    }
    let n = match check_shared_player_count(games)? {
        Some(n) => n,
        None => return Ok(AxiomSystemSolution::Unique(SolutionTable::new(0))),
    };
    let vars = games.len() * n;
    let var = |g: usize, i: usize| g * n + (i - 1);

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let new_row = || vec![Rational::zero(); vars + 1];

    // PO: one equation per game
    for (gi, g) in games.iter().enumerate() {
        let mut row = new_row();
        for i in 1..=n {
            row[var(gi, i)] = rat(1);
        }
        row[vars] = g.grand_value();
        rows.push(row);
    }
    // ETP: one equation per equivalent pair per game
    for (gi, g) in games.iter().enumerate() {
        for i in 1..=n {
            for j in (i + 1)..=n {
                if players_equivalent(g, i, j) {
                    let mut row = new_row();
                    row[var(gi, i)] = rat(1);
                    row[var(gi, j)] = rat(-1);
                    rows.push(row);
                }
            }
        }
    }
    // EMP: one equation per cross-game pair with matching marginals
    for a in 0..games.len() {
        for b in (a + 1)..games.len() {
            for i in 1..=n {
                if games[a].same_marginals(&games[b], i) {
                    let mut row = new_row();
                    row[var(a, i)] = rat(1);
                    row[var(b, i)] = rat(-1);
                    rows.push(row);
                }
            }
        }
    }

    match solve_exact(&mut rows, vars) {
        ExactSolve::Unique(solution) => {
            let mut table = SolutionTable::new(n);
            for gi in 0..games.len() {
                let row = (1..=n).map(|i| solution[var(gi, i)].clone()).collect();
                table.insert(gi, Allocation::new(row));
            }
            Ok(AxiomSystemSolution::Unique(table))
        }
        ExactSolve::Underdetermined { nullity } => {
            Ok(AxiomSystemSolution::Underdetermined { nullity })
        }
        ExactSolve::Infeasible => Ok(AxiomSystemSolution::Infeasible),
    }
}

enum ExactSolve {
    Unique(Vec<Rational>),
    Underdetermined { nullity: usize },
    Infeasible,
}

/// Gauss-Jordan over rationals on the augmented matrix. Rank decisions are
/// exact zero tests, never tolerances.
fn solve_exact(rows: &mut [Vec<Rational>], vars: usize) -> ExactSolve {
    let mut pivot_row = 0usize;
    let mut pivot_cols: Vec<usize> = Vec::new();
    for col in 0..vars {
        let found = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(r) = found else { continue };
        rows.swap(pivot_row, r);
        let inv = rows[pivot_row][col].recip();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (other, row) in rows.iter_mut().enumerate() {
            if other != pivot_row && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(pivot.iter()) {
                    *x -= &factor * p;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    // consistency: a zero row with nonzero rhs is a contradiction
    for r in rows.iter() {
        if r[..vars].iter().all(Rational::is_zero) && !r[vars].is_zero() {
            return ExactSolve::Infeasible;
        }
    }
    let rank = pivot_cols.len();
    if rank < vars {
        return ExactSolve::Underdetermined {
            nullity: vars - rank,
        };
    }
    let mut solution = vec![Rational::zero(); vars];
    for (row, &col) in pivot_cols.iter().enumerate() {
        solution[col] = rows[row][vars].clone();
    }
    ExactSolve::Unique(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::shapley::shapley;

    fn g(n: usize, paper: &[i64]) -> Game {
        Game::from_paper_order(n, paper.iter().map(|&k| rat(k)).collect()).unwrap()
    }

    fn opts() -> DeriveOptions {
        DeriveOptions::default()
    }

    #[test]
    fn symmetric_game_resolves_in_one_step() {
        let z = g(3, &[0, 0, 0, 2, 2, 2, 3]);
        let (alloc, trace) = derive_on_class(
            &z,
            Coalition::grand(3),
            ClosureTarget::Unrestricted,
            &opts(),
        )
        .unwrap();
        assert_eq!(alloc.to_string(), "1 1 1");
        assert_eq!(trace.steps.len(), 1);
        assert!(matches!(trace.steps[0].kind, StepKind::EtpPoResolve { .. }));
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }

    #[test]
    fn two_member_class_derivation() {
        let w = g(3, &[0, 0, 0, 3, 2, 2, 4]);
        let class = Coalition::from_players(3, &[1, 2]);
        let (alloc, trace) =
            derive_on_class(&w, class, ClosureTarget::Unrestricted, &opts()).unwrap();
        assert_eq!(alloc.to_string(), "3/2 3/2 1");
        // exactly one companion game: z = (0,0,0,2,2,2,3), feeding one
        // emp transfer for player 3
        let z = g(3, &[0, 0, 0, 2, 2, 2, 3]);
        assert!(trace.games.contains(&z));
        let transfers: Vec<_> = trace
            .steps
            .iter()
            .filter(|s| matches!(s.kind, StepKind::EmpTransfer { .. }))
            .collect();
        assert_eq!(transfers.len(), 1);
        match &transfers[0].kind {
            StepKind::EmpTransfer { player, payoff, .. } => {
                assert_eq!(*player, 3);
                assert_eq!(payoff, &rat(1));
            }
            _ => unreachable!(),
        }
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }

    #[test]
    fn showcase_game_full_axiomatic_derivation() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        assert_eq!(alloc.to_string(), "1 3/2 1/2");
        assert_eq!(alloc, shapley(&v));
        // the chain visits the printed companion games
        assert!(trace.games.contains(&g(3, &[0, 0, 0, 3, 2, 2, 4])));
        assert!(trace.games.contains(&g(3, &[0, 0, 0, 2, 2, 2, 3])));
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }

    #[test]
    fn rebuild_route_matches_direct_route() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let (direct, _) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        let (rebuilt, trace) =
            axiomatic_shapley(&v, ClassSpec::Class(GameClass::Superadditive), &opts()).unwrap();
        assert_eq!(direct, rebuilt);
        assert_eq!(replay_trace(&trace).unwrap(), rebuilt);

        let sub = g(3, &[4, 4, 4, 4, 4, 4, 7]);
        let (alloc, trace) = axiomatic_shapley(
            &sub,
            ClassSpec::Class(GameClass::StrictlySubadditive),
            &opts(),
        )
        .unwrap();
        assert_eq!(alloc, shapley(&sub));
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }

    #[test]
    fn additive_route_on_the_zero_game() {
        let (alloc, trace) = axiomatic_shapley(
            &Game::zero(3),
            ClassSpec::Class(GameClass::Additive),
            &opts(),
        )
        .unwrap();
        assert_eq!(alloc.to_string(), "0 0 0");
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }

    #[test]
    fn seeded_orders_change_nothing() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let baseline = axiomatic_shapley(&v, ClassSpec::AllGames, &opts())
            .unwrap()
            .0;
        for seed in [1, 2, 99] {
            let opts = DeriveOptions {
                order_seed: Some(seed),
                ..Default::default()
            };
            let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts).unwrap();
            assert_eq!(alloc, baseline, "seed {seed} changed the allocation");
            assert_eq!(replay_trace(&trace).unwrap(), alloc);
        }
    }

    #[test]
    fn guards_and_preconditions() {
        let v = Game::zero(7);
        assert_eq!(
            axiomatic_shapley(&v, ClassSpec::AllGames, &opts()),
            Err(YoungError::GuardExceeded { n: 7, limit: 6 })
        );
        let tightened = DeriveOptions {
            max_players: 3,
            ..Default::default()
        };
        let four = Game::zero(4);
        assert_eq!(
            axiomatic_shapley(&four, ClassSpec::AllGames, &tightened),
            Err(YoungError::GuardExceeded { n: 4, limit: 3 })
        );
        let raised = DeriveOptions {
            max_players: 4,
            ..Default::default()
        };
        assert!(axiomatic_shapley(&four, ClassSpec::AllGames, &raised).is_ok());

        let e1 = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        assert_eq!(
            axiomatic_shapley(&e1, ClassSpec::Class(GameClass::Additive), &opts()),
            Err(YoungError::NotInClass("additive".to_string()))
        );
        assert_eq!(
            derive_on_class(
                &e1,
                Coalition::from_players(3, &[1, 2]),
                ClosureTarget::Unrestricted,
                &opts()
            ),
            Err(YoungError::NotAnEquivalenceClass("{1,2}".to_string()))
        );
        assert_eq!(
            derive_on_class(
                &e1,
                Coalition::empty(3),
                ClosureTarget::Unrestricted,
                &opts()
            ),
            Err(YoungError::EmptyClass)
        );
    }

    #[test]
    fn one_player_game() {
        let v = g(1, &[5]);
        let (alloc, _) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        assert_eq!(alloc.to_string(), "5");
    }

    #[test]
    fn emp_closed_zero_game_alone() {
        let report = check_emp_closed_finite(&[Game::zero(3)]).unwrap();
        assert!(report.closed);
        assert!(check_emp_closed_finite(&[]).unwrap().closed);
    }

    #[test]
    fn emp_closed_counterexample_matches_hand_analysis() {
        let zero = Game::zero(3);
        let u12 = Game::unanimity(3, Coalition::from_players(3, &[1, 2])).unwrap();
        let report = check_emp_closed_finite(&[zero, u12]).unwrap();
        assert!(!report.closed);
        let ce = report.counterexample.unwrap();
        assert_eq!(ce.game_index, 1);
        assert_eq!(ce.class, Coalition::singleton(3, 3));
        assert_eq!(ce.player, 1);
    }

    #[test]
    fn mixed_player_counts_are_rejected() {
        assert_eq!(
            check_emp_closed_finite(&[Game::zero(2), Game::zero(3)]),
            Err(YoungError::MixedPlayerCounts)
        );
    }

    fn non_tight_triple() -> Vec<Game> {
        vec![
            Game::zero(3),
            Game::unanimity(3, Coalition::from_players(3, &[1, 2])).unwrap(),
            g(3, &[0, 0, 1, 1, 1, 1, 2]),
        ]
    }

    #[test]
    fn hypotheses_fail_on_the_non_tight_triple() {
        let report = check_chain_hypotheses_finite(&non_tight_triple()).unwrap();
        assert!(!report.holds);
        assert!(report.first_failure.is_some());

        let ok = check_chain_hypotheses_finite(&[Game::zero(3)]).unwrap();
        assert!(ok.holds);
        assert!(check_chain_hypotheses_finite(&[]).unwrap().holds);
    }

    #[test]
    fn axiom_system_is_unique_on_the_non_tight_triple() {
        let games = non_tight_triple();
        let solution = solve_axiom_system(&games).unwrap();
        let AxiomSystemSolution::Unique(table) = solution else {
            panic!("expected a unique solution, got {solution:?}");
        };
        assert_eq!(table.row(0).unwrap().to_string(), "0 0 0");
        assert_eq!(table.row(1).unwrap().to_string(), "1/2 1/2 0");
        assert_eq!(table.row(2).unwrap().to_string(), "1/2 1/2 1");
        for (gi, game) in games.iter().enumerate() {
            assert_eq!(table.row(gi).unwrap(), &shapley(game));
        }
    }

    #[test]
    fn axiom_system_corner_cases() {
        let zero_only = solve_axiom_system(&[Game::zero(3)]).unwrap();
        let AxiomSystemSolution::Unique(table) = zero_only else {
            panic!("zero game should be pinned");
        };
        assert_eq!(table.row(0).unwrap().to_string(), "0 0 0");

        // a generic game alone: one PO equation, three unknowns
        let generic = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        assert_eq!(
            solve_axiom_system(&[generic]).unwrap(),
            AxiomSystemSolution::Underdetermined { nullity: 2 }
        );
    }

    #[test]
    fn replay_rejects_tampered_traces() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let (_, mut trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        // corrupt one transfer payoff
        for step in trace.steps.iter_mut() {
            if let StepKind::EmpTransfer { payoff, .. } = &mut step.kind {
                *payoff += rat(1);
                break;
            }
        }
        assert!(matches!(replay_trace(&trace), Err(ReplayError::Step(..))));
    }

    #[test]
    fn trace_json_shape() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let (_, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        let json = trace.to_json();
        assert_eq!(json["spec"], "all-games");
        assert_eq!(json["allocation"][1], "3/2");
        assert!(json["steps"].as_array().unwrap().len() >= 3);
        assert_eq!(json["games"][0]["values"][3], "3");
    }

    #[test]
    fn class_spec_parsing_and_routes() {
        assert_eq!(
            "all-games".parse::<ClassSpec>().unwrap(),
            ClassSpec::AllGames
        );
        assert_eq!(
            "concave".parse::<ClassSpec>().unwrap(),
            ClassSpec::Class(GameClass::Concave)
        );
        assert!("nope".parse::<ClassSpec>().is_err());
        assert_eq!(
            ClassSpec::Class(GameClass::Additive).route(),
            DerivationRoute::Direct(ClosureTarget::Additive)
        );
        assert_eq!(
            ClassSpec::Class(GameClass::Monotonic).route(),
            DerivationRoute::BigM(GameClass::Monotonic)
        );
        assert_eq!(
            ClassSpec::Class(GameClass::Concave).route(),
            DerivationRoute::DualBigM(GameClass::Concave)
        );
    }

    #[test]
    fn payoff_fractions_appear_in_traces() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        let (_, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts()).unwrap();
        let shown = trace.to_string();
        assert!(shown.contains("3/2"));
        assert!(shown.contains("[emp]"));
        assert!(shown.contains("[etp+po]"));
    }

    #[test]
    fn underdetermined_with_planted_symmetry() {
        // two-player game with both players equivalent: ETP + PO pin it
        let sym = Game::from_paper_order(2, vec![ratio(1, 2), ratio(1, 2), rat(3)]).unwrap();
        let AxiomSystemSolution::Unique(table) = solve_axiom_system(&[sym]).unwrap() else {
            panic!("symmetric two-player game should be pinned");
        };
        assert_eq!(table.row(0).unwrap().to_string(), "3/2 3/2");
    }
}
