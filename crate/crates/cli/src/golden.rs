//! The compiled-in reproduction suite behind `tugames examples`.
//!
//! Every scenario pins exact expected values; a single wrong constant
//! anywhere in the extension sums, the exponential fills, or the Shapley
//! coefficients flips at least one line to FAIL and the command to a
//! nonzero exit.

use tugames::coalition::Coalition;
use tugames::constructions::{
    big_m_rebuild, closure_construct, dual_big_m_rebuild, extend_equivalence_class, ClosureTarget,
    FillStrategy,
};
use tugames::game::Game;
use tugames::rational::{rat, ratio, Rational};
use tugames::young::{
    axiomatic_shapley, check_chain_hypotheses_finite, derive_on_class, replay_trace,
    solve_axiom_system, AxiomSystemSolution, ClassSpec, DeriveOptions,
};
use tugames::{
    check_po, finest_partition, is_equivalence_class, is_member, players_equivalent, shapley,
    shapley_permutation_oracle, GameClass,
};

pub struct ScenarioResult {
    pub name: &'static str,
    pub detail: Result<(), String>,
}

fn game(n: usize, paper: &[i64]) -> Game {
    Game::from_paper_order(n, paper.iter().map(|&k| rat(k)).collect())
        .expect("embedded game vector is well formed")
}

fn expect(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(format!("expected {what}"))
    }
}

fn expect_eq<T: PartialEq + std::fmt::Display>(got: T, want: T, what: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want}"))
    }
}

fn chain_demo_game() -> Game {
    game(3, &[0, 0, 0, 3, 1, 2, 3])
}

fn scenario_chain_demo_game() -> Result<(), String> {
    let v = chain_demo_game();
    expect_eq(
        v.value(Coalition::from_players(3, &[1, 3])),
        rat(1),
        "v({1,3})",
    )?;
    expect_eq(v.to_string(), "0 0 0 3 1 2 3".to_string(), "serialization")
}

fn scenario_chain_demo_classes() -> Result<(), String> {
    let v = chain_demo_game();
    expect(is_member(&v, GameClass::Superadditive), "superadditive")?;
    expect(!is_member(&v, GameClass::Convex), "not convex")
}

fn scenario_chain_demo_relation() -> Result<(), String> {
    let v = chain_demo_game();
    expect(!players_equivalent(&v, 1, 2), "1 and 2 not equivalent")?;
    expect(!players_equivalent(&v, 1, 3), "1 and 3 not equivalent")?;
    expect(!players_equivalent(&v, 2, 3), "2 and 3 not equivalent")?;
    expect_eq(
        finest_partition(&v).to_string(),
        "{1} {2} {3}".to_string(),
        "partition",
    )
}

fn scenario_chain_demo_marginal() -> Result<(), String> {
    let v = chain_demo_game();
    expect_eq(
        v.marginal(2, Coalition::from_players(3, &[1])),
        rat(3),
        "marginal of 2 at {1}",
    )
}

fn chain_demo_extension() -> Result<Game, String> {
    extend_equivalence_class(
        &chain_demo_game(),
        Coalition::singleton(3, 1),
        2,
        &FillStrategy::ZeroFill,
    )
    .map_err(|e| e.to_string())
}

fn scenario_chain_demo_first_extension() -> Result<(), String> {
    let v = chain_demo_game();
    let w = chain_demo_extension()?;
    expect_eq(w.to_string(), "0 0 0 3 2 2 4".to_string(), "extended game")?;
    expect(w.same_marginals(&v, 2), "marginals of player 2 preserved")?;
    expect(
        players_equivalent(&w, 1, 2),
        "1 and 2 equivalent afterwards",
    )
}

fn scenario_chain_demo_second_extension() -> Result<(), String> {
    let w = chain_demo_extension()?;
    let z = extend_equivalence_class(
        &w,
        Coalition::from_players(3, &[1, 2]),
        3,
        &FillStrategy::ZeroFill,
    )
    .map_err(|e| e.to_string())?;
    expect_eq(z.to_string(), "0 0 0 2 2 2 3".to_string(), "extended game")?;
    expect(z.same_marginals(&w, 3), "marginals of player 3 preserved")?;
    expect(
        is_equivalence_class(&z, Coalition::grand(3)),
        "all players equivalent",
    )
}

fn scenario_chain_demo_derivation() -> Result<(), String> {
    let v = chain_demo_game();
    let phi = shapley(&v);
    expect_eq(phi.to_string(), "1 3/2 1/2".to_string(), "shapley value")?;
    let oracle = shapley_permutation_oracle(&v).map_err(|e| e.to_string())?;
    expect(oracle == phi, "permutation oracle agreement")?;
    expect(check_po(&v, &phi) == Ok(true), "efficiency")?;

    let opts = DeriveOptions::default();
    let (derived, trace) =
        axiomatic_shapley(&v, ClassSpec::AllGames, &opts).map_err(|e| e.to_string())?;
    expect(derived == phi, "axiomatic derivation agreement")?;
    replay_trace(&trace).map_err(|e| format!("trace replay: {e}"))?;

    let z = game(3, &[0, 0, 0, 2, 2, 2, 3]);
    let (alloc_z, _) = derive_on_class(&z, Coalition::grand(3), ClosureTarget::Unrestricted, &opts)
        .map_err(|e| e.to_string())?;
    expect_eq(
        alloc_z.to_string(),
        "1 1 1".to_string(),
        "symmetric resolve",
    )?;

    let w = chain_demo_extension()?;
    let (alloc_w, _) = derive_on_class(
        &w,
        Coalition::from_players(3, &[1, 2]),
        ClosureTarget::Unrestricted,
        &opts,
    )
    .map_err(|e| e.to_string())?;
    expect_eq(
        alloc_w.to_string(),
        "3/2 3/2 1".to_string(),
        "two-class resolve",
    )
}

fn scenario_forced_extension_three_players() -> Result<(), String> {
    let v = game(3, &[0, 0, 10, 50, 0, 0, 20]);
    let s = Coalition::from_players(3, &[1, 2]);
    expect(is_equivalence_class(&v, s), "{1,2} an equivalence class")?;
    expect(is_member(&v, GameClass::Essential), "input essential")?;
    let w =
        extend_equivalence_class(&v, s, 3, &FillStrategy::ZeroFill).map_err(|e| e.to_string())?;
    expect_eq(
        w.to_string(),
        "10 10 10 10 10 10 -20".to_string(),
        "forced extension",
    )?;
    expect(!is_member(&w, GameClass::Essential), "result not essential")
}

fn scenario_forced_extension_four_players() -> Result<(), String> {
    let v = game(
        4,
        &[0, 0, 0, 10, 51, 51, 51, 51, 51, 51, 62, 62, 62, 62, 103],
    );
    let s = Coalition::from_players(4, &[1, 2, 3]);
    expect(is_equivalence_class(&v, s), "{1,2,3} an equivalence class")?;
    expect(
        is_member(&v, GameClass::StrictlySuperadditive),
        "input strictly superadditive",
    )?;
    let w =
        extend_equivalence_class(&v, s, 4, &FillStrategy::ZeroFill).map_err(|e| e.to_string())?;
    expect_eq(
        w.to_string(),
        "10 10 10 10 61 61 61 61 61 61 72 72 72 72 113".to_string(),
        "forced extension",
    )?;
    expect(
        !is_member(&w, GameClass::Superadditive),
        "result not superadditive",
    )?;
    expect(
        is_member(&w, GameClass::WeaklySuperadditive),
        "result weakly superadditive",
    )
}

fn scenario_dual_caveats() -> Result<(), String> {
    let sub = game(3, &[4, 4, 4, 4, 4, 4, 7]);
    expect(
        is_member(&sub, GameClass::StrictlySubadditive),
        "strictly subadditive input",
    )?;
    expect(
        !is_member(&sub.dual(), GameClass::WeaklySuperadditive),
        "dual not weakly superadditive",
    )?;

    let sup = game(3, &[0, 0, 0, 3, 1, 2, 4]);
    expect(
        is_member(&sup, GameClass::StrictlySuperadditive),
        "strictly superadditive input",
    )?;
    expect_eq(sup.dual().to_string(), "2 3 1 4 4 4 4".to_string(), "dual")?;
    expect(
        !is_member(&sup.dual(), GameClass::WeaklySubadditive),
        "dual not weakly subadditive",
    )
}

fn scenario_big_m_rebuild() -> Result<(), String> {
    // around player 1 the strict bound is |v'_1({2})| + 1 = 4, so free
    // coalitions get 2*4*3*3^|T|
    let v = chain_demo_game();
    let w = big_m_rebuild(&v, 1, GameClass::Superadditive).map_err(|e| e.to_string())?;
    expect_eq(
        w.to_string(),
        "0 72 72 75 73 216 217".to_string(),
        "rebuilt game",
    )?;
    expect(w.same_marginals(&v, 1), "marginals of player 1 preserved")?;
    expect(
        is_member(&w, GameClass::Superadditive),
        "rebuild stays in class",
    )
}

fn scenario_strictly_convex_closure() -> Result<(), String> {
    // symmetric strictly convex seed: worth 0 / 2 / 6 / 14 by size; the
    // bound around player 2 is 8 + 1 = 9, so free coalitions get
    // 9*4*3^|T|
    let v = Game::from_fn(4, |s| match s.size() {
        1 => rat(0),
        2 => rat(2),
        3 => rat(6),
        _ => rat(14),
    });
    let w = closure_construct(
        &v,
        Coalition::singleton(4, 1),
        2,
        ClosureTarget::StrictlyConvex,
    )
    .map_err(|e| e.to_string())?;
    expect_eq(
        w.to_string(),
        "0 0 108 108 2 110 110 110 110 324 114 114 328 328 336".to_string(),
        "closure values",
    )?;
    expect(
        is_member(&w, GameClass::StrictlyConvex),
        "closure stays strictly convex",
    )?;
    expect(
        is_equivalence_class(&w, Coalition::from_players(4, &[1, 2])),
        "{1,2} an equivalence class afterwards",
    )?;
    expect(w.same_marginals(&v, 2), "marginals of player 2 preserved")
}

fn scenario_subadditive_rebuild() -> Result<(), String> {
    let v = game(3, &[4, 4, 4, 4, 4, 4, 7]);
    let pipe =
        dual_big_m_rebuild(&v, 1, GameClass::StrictlySubadditive).map_err(|e| e.to_string())?;
    expect(
        is_member(&pipe.w, GameClass::StrictlySubadditive),
        "rebuild stays strictly subadditive",
    )?;
    expect(
        pipe.w.same_marginals(&v, 1),
        "marginals of player 1 preserved",
    )?;

    let opts = DeriveOptions::default();
    let (alloc, trace) =
        axiomatic_shapley(&v, ClassSpec::Class(GameClass::StrictlySubadditive), &opts)
            .map_err(|e| e.to_string())?;
    expect(
        alloc == shapley(&v),
        "subadditive-route derivation agreement",
    )?;
    replay_trace(&trace).map_err(|e| format!("trace replay: {e}"))?;
    Ok(())
}

fn non_tight_triple() -> Vec<Game> {
    vec![
        Game::zero(3),
        Game::unanimity(3, Coalition::from_players(3, &[1, 2])).expect("nonempty"),
        game(3, &[0, 0, 1, 1, 1, 1, 2]),
    ]
}

fn scenario_non_tight_class() -> Result<(), String> {
    let games = non_tight_triple();
    let hypotheses = check_chain_hypotheses_finite(&games).map_err(|e| e.to_string())?;
    expect(!hypotheses.holds, "chain hypotheses fail on the class")?;

    let solution = solve_axiom_system(&games).map_err(|e| e.to_string())?;
    let AxiomSystemSolution::Unique(table) = solution else {
        return Err("expected a unique solution table".to_string());
    };
    let want: [Vec<Rational>; 3] = [
        vec![rat(0), rat(0), rat(0)],
        vec![ratio(1, 2), ratio(1, 2), rat(0)],
        vec![ratio(1, 2), ratio(1, 2), rat(1)],
    ];
    for (gi, game) in games.iter().enumerate() {
        let row = table.row(gi).ok_or_else(|| format!("missing row {gi}"))?;
        let want_row = want[gi].clone();
        if row.iter().cloned().collect::<Vec<_>>() != want_row {
            return Err(format!("solution row {gi}: got {row}"));
        }
        expect(
            row == &shapley(game),
            "characterization agrees with the formula",
        )?;
    }
    Ok(())
}

type Scenario = (&'static str, fn() -> Result<(), String>);

pub fn run_all() -> Vec<ScenarioResult> {
    let scenarios: Vec<Scenario> = vec![
        ("chain-demo-game", scenario_chain_demo_game),
        ("chain-demo-classes", scenario_chain_demo_classes),
        ("chain-demo-relation", scenario_chain_demo_relation),
        ("chain-demo-marginal", scenario_chain_demo_marginal),
        (
            "chain-demo-first-extension",
            scenario_chain_demo_first_extension,
        ),
        (
            "chain-demo-second-extension",
            scenario_chain_demo_second_extension,
        ),
        ("chain-demo-derivation", scenario_chain_demo_derivation),
        (
            "forced-extension-three-players",
            scenario_forced_extension_three_players,
        ),
        (
            "forced-extension-four-players",
            scenario_forced_extension_four_players,
        ),
        ("dual-caveats", scenario_dual_caveats),
        ("big-m-rebuild", scenario_big_m_rebuild),
        ("strictly-convex-closure", scenario_strictly_convex_closure),
        ("subadditive-rebuild", scenario_subadditive_rebuild),
        ("non-tight-class", scenario_non_tight_class),
    ];
    scenarios
        .into_iter()
        .map(|(name, run)| ScenarioResult {
            name,
            detail: run(),
        })
        .collect()
}
