//! Cross-module invariants on randomized games.
//!
//! The heavyweight exhaustive sweeps live in the acceptance suite; these
//! runs keep every algebraic law under continuous test at friendlier
//! sample counts.

use proptest::prelude::*;

use tugames::classification::{classify, ALL_CLASSES};
use tugames::coalition::Coalition;
use tugames::constructions::{
    big_m_rebuild, closure_construct, dual_big_m_rebuild, extend_equivalence_class,
    strictly_convex_companion, well_definedness_check, ClosureTarget, FillStrategy, BIG_M_CLASSES,
    DUAL_ROUTE_CLASSES,
};
use tugames::game::Game;
use tugames::rational::{ratio, Rational};
use tugames::sampling::{
    self, additive_game, game_with_planted_class, random_class_and_outsider, random_game,
    rng_from_seed, strictly_concave_game_with_class, strictly_convex_game_with_class,
};
use tugames::shapley::{check_emp_pair, check_etp, check_po, shapley, shapley_permutation_oracle};
use tugames::young::{
    axiomatic_shapley, check_emp_closed_finite, replay_trace, solve_axiom_system,
    AxiomSystemSolution, ClassSpec, DeriveOptions,
};
use tugames::{
    convexity_via_marginals, is_equivalence_class, is_member, marginals_respect_class,
    players_equivalent, value_characterization, GameClass,
};

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn arb_game(max_n: usize) -> impl Strategy<Value = Game> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(arb_rational(), (1 << n) - 1)
            .prop_map(move |values| Game::from_paper_order(n, values).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_telescope_to_the_grand_value(v in arb_game(4), seed in any::<u64>()) {
        let n = v.n();
        let mut order: Vec<usize> = (1..=n).collect();
        // cheap deterministic shuffle
        for i in (1..order.len()).rev() {
            order.swap(i, (seed as usize).wrapping_mul(i + 7) % (i + 1));
        }
        let mut s = Coalition::empty(n);
        let mut sum = Rational::from_integer(0.into());
        for p in order {
            sum += v.marginal(p, s);
            s = s.with(p);
        }
        prop_assert_eq!(sum, v.grand_value());
    }

    #[test]
    fn dual_is_an_involution(v in arb_game(4)) {
        prop_assert_eq!(v.dual().dual(), v);
    }

    #[test]
    fn dual_marginal_identity(v in arb_game(4)) {
        let d = v.dual();
        for i in 1..=v.n() {
            for s in Coalition::singleton(v.n(), i).complement().subsets() {
                prop_assert_eq!(d.marginal(i, s), v.marginal(i, s.with(i).complement()));
            }
        }
    }

    #[test]
    fn paper_order_round_trips(v in arb_game(4)) {
        let back = Game::from_paper_order(v.n(), v.to_paper_order()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn shapley_agrees_with_permutation_oracle(v in arb_game(5)) {
        let phi = shapley(&v);
        prop_assert_eq!(&shapley_permutation_oracle(&v).unwrap(), &phi);
        prop_assert_eq!(check_po(&v, &phi), Ok(true));
        prop_assert_eq!(check_etp(&v, &phi), Ok(true));
    }

    #[test]
    fn shapley_is_linear(v in arb_game(4), w_values in prop::collection::vec(arb_rational(), 15)) {
        let w = Game::from_paper_order(v.n(), w_values[..(1 << v.n()) - 1].to_vec()).unwrap();
        let sum = &v + &w;
        let (pv, pw, ps) = (shapley(&v), shapley(&w), shapley(&sum));
        for i in 1..=v.n() {
            prop_assert_eq!(ps.payoff(i), &(pv.payoff(i) + pw.payoff(i)));
        }
    }

    #[test]
    fn marginal_characterization_matches_pair_predicates(v in arb_game(4)) {
        prop_assert_eq!(convexity_via_marginals(&v, false, false), is_member(&v, GameClass::Convex));
        prop_assert_eq!(convexity_via_marginals(&v, true, false), is_member(&v, GameClass::StrictlyConvex));
        prop_assert_eq!(convexity_via_marginals(&v, false, true), is_member(&v, GameClass::Concave));
        prop_assert_eq!(convexity_via_marginals(&v, true, true), is_member(&v, GameClass::StrictlyConcave));
    }

    #[test]
    fn value_characterization_matches_the_pairwise_definition(v in arb_game(4)) {
        for s in Coalition::all(v.n()) {
            prop_assert_eq!(
                value_characterization(&v, s),
                is_equivalence_class(&v, s)
            );
        }
    }
}

#[test]
fn oracle_agreement_is_exhaustive_on_small_grids() {
    // every integer game with values in {-2..2} for n <= 2, and in
    // {-1,0,1} for n = 3
    fn grid(n: usize, lo: i64, hi: i64) -> impl Iterator<Item = Game> {
        let size = (1usize << n) - 1;
        let width = (hi - lo + 1) as u64;
        (0..width.pow(size as u32)).map(move |code| {
            let mut rest = code;
            let values = (0..size)
                .map(|_| {
                    let digit = (rest % width) as i64 + lo;
                    rest /= width;
                    tugames::rat(digit)
                })
                .collect();
            Game::from_paper_order(n, values).unwrap()
        })
    }
    for v in grid(1, -2, 2).chain(grid(2, -2, 2)).chain(grid(3, -1, 1)) {
        let phi = shapley(&v);
        assert_eq!(
            shapley_permutation_oracle(&v).unwrap(),
            phi,
            "oracle split on {v}"
        );
    }
}

#[test]
fn oracle_agreement_up_to_six_players() {
    let mut rng = rng_from_seed(66);
    for _ in 0..3 {
        let v = random_game(6, &mut rng);
        assert_eq!(shapley_permutation_oracle(&v).unwrap(), shapley(&v));
    }
}

#[test]
fn class_implication_lattice() {
    let mut rng = rng_from_seed(2024);
    for _ in 0..200 {
        let n = 2 + (rand::Rng::gen_range(&mut rng, 0..3));
        let v = random_game(n, &mut rng);
        let tags = classify(&v);
        for c in ALL_CLASSES {
            if let Some(relaxed) = c.relaxation() {
                if tags.contains(&c) {
                    assert!(tags.contains(&relaxed), "{c} without {relaxed} on {v}");
                }
            }
        }
        let has = |c: GameClass| tags.contains(&c);
        if has(GameClass::Convex) {
            assert!(
                has(GameClass::Superadditive),
                "convex not superadditive: {v}"
            );
        }
        if has(GameClass::Superadditive) {
            assert!(
                has(GameClass::WeaklySuperadditive),
                "superadditive not weak: {v}"
            );
        }
        if has(GameClass::Concave) {
            assert!(has(GameClass::Subadditive), "concave not subadditive: {v}");
        }
        if has(GameClass::Subadditive) {
            assert!(
                has(GameClass::WeaklySubadditive),
                "subadditive not weak: {v}"
            );
        }
    }
}

#[test]
fn duality_swaps_convex_and_concave() {
    let mut rng = rng_from_seed(7);
    for _ in 0..50 {
        for n in 2..=4 {
            for (class, mirror) in [
                (GameClass::Convex, GameClass::Concave),
                (GameClass::StrictlyConvex, GameClass::StrictlyConcave),
                (GameClass::Concave, GameClass::Convex),
                (GameClass::StrictlyConcave, GameClass::StrictlyConvex),
            ] {
                let v = sampling::random_member(class, n, &mut rng);
                assert!(
                    is_member(&v.dual(), mirror),
                    "dual of {class} not {mirror}: {v}"
                );
            }
        }
    }
}

#[test]
fn equivalence_relation_laws_on_planted_games() {
    let mut rng = rng_from_seed(99);
    for _ in 0..100 {
        let n = 3 + (rand::Rng::gen_range(&mut rng, 0..2));
        let (s, _) = random_class_and_outsider(n, &mut rng);
        let v = game_with_planted_class(n, s, &mut rng);
        assert!(is_equivalence_class(&v, s));

        // transitivity across the whole game
        for i in 1..=n {
            assert!(players_equivalent(&v, i, i));
            for j in 1..=n {
                assert_eq!(players_equivalent(&v, i, j), players_equivalent(&v, j, i));
                for k in 1..=n {
                    if players_equivalent(&v, i, j) && players_equivalent(&v, j, k) {
                        assert!(players_equivalent(&v, i, k), "transitivity failed on {v}");
                    }
                }
            }
        }

        // equivalence survives dualization
        let d = v.dual();
        for i in s.players() {
            for j in s.players() {
                assert!(players_equivalent(&d, i, j), "dual lost {i}~{j} on {v}");
            }
        }

        // subsets of classes are classes, and the marginal corollary holds
        for t in s.subsets() {
            assert!(is_equivalence_class(&v, t));
        }
        for k in s.complement().players() {
            assert_eq!(
                marginals_respect_class(&v, s, k),
                Ok(true),
                "corollary failed on {v}"
            );
        }
    }
}

#[test]
fn extensions_preserve_marginals_and_grow_classes() {
    let mut rng = rng_from_seed(4242);
    for round in 0..60 {
        let n = 3 + (round % 2);
        let (s, k) = random_class_and_outsider(n, &mut rng);
        let v = game_with_planted_class(n, s, &mut rng);
        let fill = match round % 3 {
            0 => FillStrategy::ZeroFill,
            1 => FillStrategy::CopyFromSource,
            _ => FillStrategy::AdditiveFill(ratio(3, 2)),
        };
        let w = extend_equivalence_class(&v, s, k, &fill).unwrap();
        assert!(w.same_marginals(&v, k));
        let grown = s.with(k);
        assert!(is_equivalence_class(&w, grown));
        assert!(value_characterization(&w, grown));
        assert_eq!(well_definedness_check(&v, s, k, 5, round as u64), Ok(true));
    }
}

#[test]
fn closure_targets_stay_in_their_classes() {
    let mut rng = rng_from_seed(555);
    for round in 0..40 {
        let n = 3 + (round % 2);
        let (s, k) = random_class_and_outsider(n, &mut rng);

        let convex = strictly_convex_game_with_class(n, s, &mut rng);
        let w = closure_construct(&convex, s, k, ClosureTarget::StrictlyConvex).unwrap();
        assert!(is_member(&w, GameClass::StrictlyConvex));
        assert!(w.same_marginals(&convex, k));

        let concave = strictly_concave_game_with_class(n, s, &mut rng);
        let w = closure_construct(&concave, s, k, ClosureTarget::StrictlyConcave).unwrap();
        assert!(is_member(&w, GameClass::StrictlyConcave));
        assert!(w.same_marginals(&concave, k));
        // the dual route is literally the dual of the convex route
        let direct = closure_construct(&concave.dual(), s, k, ClosureTarget::StrictlyConvex)
            .unwrap()
            .dual();
        assert_eq!(w, direct);

        let additive = additive_game(n, Some(s), &mut rng);
        let w = closure_construct(&additive, s, k, ClosureTarget::Additive).unwrap();
        assert!(is_member(&w, GameClass::Additive));
        assert!(w.same_marginals(&additive, k));
    }
}

#[test]
fn big_m_rebuild_preserves_every_supported_class() {
    let mut rng = rng_from_seed(31);
    for round in 0..25 {
        let n = 2 + (round % 3);
        for class in BIG_M_CLASSES {
            if class == GameClass::Essential && n < 2 {
                continue;
            }
            let v = sampling::random_member(class, n, &mut rng);
            let k = 1 + (round % n);
            let w = big_m_rebuild(&v, k, class).unwrap();
            assert!(is_member(&w, class), "{class} lost by rebuild on {v}");
            assert!(w.same_marginals(&v, k));
        }
        for class in DUAL_ROUTE_CLASSES {
            let v = sampling::random_member(class, n, &mut rng);
            let k = 1 + (round % n);
            let pipe = dual_big_m_rebuild(&v, k, class).unwrap();
            assert!(
                is_member(&pipe.w, class),
                "{class} lost by dual rebuild on {v}"
            );
            assert!(pipe.w.same_marginals(&v, k));
        }
    }
}

#[test]
fn strictly_monotone_seeds_admit_companions() {
    let mut rng = rng_from_seed(77);
    for round in 0..15 {
        let n = 3 + (round % 2);
        let v = sampling::strictly_convex_game(n, &mut rng);
        let k = 1 + (round % n);
        let w = big_m_rebuild(&v, k, GameClass::Convex).unwrap();
        for i in (1..=n).filter(|&i| i != k) {
            let z = strictly_convex_companion(&w, i).unwrap();
            assert!(is_member(&z, GameClass::StrictlyConvex));
            assert!(z.same_marginals(&w, i));
        }

        let vc = -&sampling::strictly_convex_game(n, &mut rng);
        let pipe = dual_big_m_rebuild(&vc, k, GameClass::Concave).unwrap();
        for i in (1..=n).filter(|&i| i != k) {
            let z = pipe.companion(i).unwrap();
            assert!(is_member(&z, GameClass::StrictlyConcave));
            assert!(z.same_marginals(&pipe.w, i));
        }
    }
}

#[test]
fn axiomatic_derivation_matches_both_formulas_per_class() {
    let opts = DeriveOptions::default();
    let mut rng = rng_from_seed(1618);
    for round in 0..6 {
        let n = 2 + (round % 3);
        for class in ALL_CLASSES {
            if class == GameClass::Essential && n < 2 {
                continue;
            }
            let v = sampling::random_member(class, n, &mut rng);
            let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::Class(class), &opts).unwrap();
            let phi = shapley(&v);
            assert_eq!(alloc, phi, "derivation in {class} missed on {v}");
            assert_eq!(shapley_permutation_oracle(&v).unwrap(), phi);
            assert_eq!(replay_trace(&trace).unwrap(), alloc);
        }
        let v = random_game(n, &mut rng);
        let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts).unwrap();
        assert_eq!(alloc, shapley(&v));
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }
}

#[test]
fn singleton_class_chain_matches_the_formula() {
    let opts = DeriveOptions::default();
    let mut rng = rng_from_seed(512);
    for _ in 0..20 {
        let v = random_game(3, &mut rng);
        let (alloc, trace) = tugames::young::derive_on_class(
            &v,
            Coalition::singleton(3, 2),
            ClosureTarget::Unrestricted,
            &opts,
        )
        .unwrap();
        assert_eq!(alloc, shapley(&v));
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
    }
}

#[test]
fn route_independence_across_applicable_specs() {
    let opts = DeriveOptions::default();
    let mut rng = rng_from_seed(271828);
    for _ in 0..10 {
        let n = 3;
        let v = sampling::strictly_convex_game(n, &mut rng);
        let expected = shapley(&v);
        let mut specs = vec![ClassSpec::AllGames];
        specs.extend(classify(&v).into_iter().map(ClassSpec::Class));
        for spec in specs {
            let (alloc, _) = axiomatic_shapley(&v, spec, &opts)
                .unwrap_or_else(|e| panic!("spec {spec} failed on {v}: {e}"));
            assert_eq!(alloc, expected, "spec {spec} disagreed on {v}");
        }
    }
}

#[test]
fn emp_propagation_across_extension_pairs() {
    // pairs built by the extension share one player's marginals, so that
    // player's payoff must transfer exactly
    let mut rng = rng_from_seed(36);
    for _ in 0..40 {
        let n = 3;
        let (s, k) = random_class_and_outsider(n, &mut rng);
        let v = game_with_planted_class(n, s, &mut rng);
        let w = extend_equivalence_class(&v, s, k, &FillStrategy::ZeroFill).unwrap();
        let (pv, pw) = (shapley(&v), shapley(&w));
        let check = check_emp_pair(&v, &w, k, &pv, &pw).unwrap();
        assert!(check.applicable);
        assert!(check.holds);
    }
}

#[test]
fn axiom_system_uniqueness_forces_the_shapley_rows() {
    let mut rng = rng_from_seed(13);
    for _ in 0..20 {
        let games: Vec<Game> = (0..3).map(|_| random_game(3, &mut rng)).collect();
        if let AxiomSystemSolution::Unique(table) = solve_axiom_system(&games).unwrap() {
            for (gi, g) in games.iter().enumerate() {
                assert_eq!(table.row(gi).unwrap(), &shapley(g));
            }
        }
    }
}

#[test]
#[ignore = "deep sweep, minutes of work; run with -- --ignored"]
fn deep_sweep_grid_and_five_players() {
    let opts = DeriveOptions::default();

    // the full {-1,0,1} grid at three players, through the whole stack
    let mut code = 0u64;
    loop {
        let mut rest = code;
        let values: Vec<Rational> = (0..7)
            .map(|_| {
                let digit = (rest % 3) as i64 - 1;
                rest /= 3;
                tugames::rat(digit)
            })
            .collect();
        let v = Game::from_paper_order(3, values).unwrap();
        let phi = shapley(&v);
        assert_eq!(shapley_permutation_oracle(&v).unwrap(), phi);
        let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::AllGames, &opts).unwrap();
        assert_eq!(alloc, phi, "grid derivation missed on {v}");
        assert_eq!(replay_trace(&trace).unwrap(), alloc);
        code += 1;
        if code == 3u64.pow(7) {
            break;
        }
    }

    // five-player derivations in every class
    let mut rng = rng_from_seed(0xdeef);
    let opts5 = DeriveOptions {
        max_players: 5,
        ..Default::default()
    };
    for round in 0..10 {
        for class in ALL_CLASSES {
            let v = sampling::random_member(class, 5, &mut rng);
            let (alloc, trace) = axiomatic_shapley(&v, ClassSpec::Class(class), &opts5)
                .unwrap_or_else(|e| panic!("round {round}: {class} failed on {v}: {e}"));
            assert_eq!(alloc, shapley(&v), "five-player {class} missed on {v}");
            assert_eq!(replay_trace(&trace).unwrap(), alloc);
        }
    }
}

#[test]
fn scalar_multiples_of_the_zero_game() {
    // the zero game alone is EMP-closed; adding a nonzero multiple of a
    // unanimity-like game breaks closedness exactly as hand analysis says
    let zero = Game::zero(3);
    assert!(
        check_emp_closed_finite(std::slice::from_ref(&zero))
            .unwrap()
            .closed
    );

    let mut scaled: Vec<Game> = Vec::new();
    for k in 0..4 {
        scaled.push(Game::from_fn(3, |s| {
            Rational::from_integer(k.into()) * Rational::from_integer((s.size() as i64).into())
        }));
    }
    // every member is additive and fully symmetric: closed
    assert!(check_emp_closed_finite(&scaled).unwrap().closed);
}
