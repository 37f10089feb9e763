//! Deterministic random-game generators, one per game class.
//!
//! The property suites need streams of games that actually lie in each of
//! the sixteen classes (membership is far too rare to reach by rejection).
//! Each generator builds class membership in by construction and then
//! asserts it with the classification predicates, so a generator bug
//! cannot silently weaken a test.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use crate::classification::{is_member, GameClass};
use crate::coalition::Coalition;
use crate::game::Game;
use crate::rational::{rat, ratio, Rational};

pub fn rng_from_seed(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A small rational: integers most of the time, occasional halves/thirds/
/// quarters, so exactness is exercised without blowing up denominators.
pub fn small_rational(rng: &mut StdRng) -> Rational {
    let p = rng.gen_range(-9..=9);
    match rng.gen_range(0..4) {
        0 => ratio(p, rng.gen_range(2..=4)),
        _ => rat(p),
    }
}

fn small_nonneg(rng: &mut StdRng) -> Rational {
    let p = rng.gen_range(0..=9);
    match rng.gen_range(0..4) {
        0 => ratio(p, rng.gen_range(2..=4)),
        _ => rat(p),
    }
}

fn small_positive(rng: &mut StdRng) -> Rational {
    let p = rng.gen_range(1..=9);
    match rng.gen_range(0..4) {
        0 => ratio(p, rng.gen_range(2..=4)),
        _ => rat(p),
    }
}

/// Unconstrained random game.
pub fn random_game(n: usize, rng: &mut StdRng) -> Game {
    Game::from_fn(n, |_| small_rational(rng))
}

/// Random integer-valued game with every value drawn from `lo..=hi`.
pub fn random_integer_game(n: usize, lo: i64, hi: i64, rng: &mut StdRng) -> Game {
    Game::from_fn(n, |_| rat(rng.gen_range(lo..=hi)))
}

/// Random game in which `s` is an equivalence class, planted by making
/// v(T) depend only on (T ∖ s, |T ∩ s|).
pub fn game_with_planted_class(n: usize, s: Coalition, rng: &mut StdRng) -> Game {
    let mut by_shape: HashMap<(u32, usize), Rational> = HashMap::new();
    Game::from_fn(n, |t| {
        let key = (t.difference(&s).mask(), t.intersection(&s).size());
        by_shape
            .entry(key)
            .or_insert_with(|| small_rational(rng))
            .clone()
    })
}

/// Random additive game; `symmetric_on` forces equal per-player worth on
/// that coalition so it forms an equivalence class.
pub fn additive_game(n: usize, symmetric_on: Option<Coalition>, rng: &mut StdRng) -> Game {
    let shared = small_rational(rng);
    let worth: Vec<Rational> = (1..=n)
        .map(|i| match symmetric_on {
            Some(s) if s.contains(i) => shared.clone(),
            _ => small_rational(rng),
        })
        .collect();
    Game::from_fn(n, |t| t.players().map(|p| worth[p - 1].clone()).sum())
}

/// Random (strictly) convex game as a positive combination of unanimity
/// games on coalitions of size ≥ 2 plus an additive part. With
/// `class_on = Some(s)`, coefficients depend only on the shape of their
/// coalition relative to s, planting s as an equivalence class.
fn convex_like(n: usize, strict: bool, class_on: Option<Coalition>, rng: &mut StdRng) -> Game {
    let mut coeff: HashMap<u32, Rational> = HashMap::new();
    let mut by_shape: HashMap<(u32, usize), Rational> = HashMap::new();
    for r in Coalition::all(n).filter(|r| r.size() >= 2) {
        let value = match class_on {
            Some(s) => {
                let key = (r.difference(&s).mask(), r.intersection(&s).size());
                by_shape
                    .entry(key)
                    .or_insert_with(|| {
                        if strict {
                            small_positive(rng)
                        } else {
                            small_nonneg(rng)
                        }
                    })
                    .clone()
            }
            None => {
                if strict {
                    small_positive(rng)
                } else {
                    small_nonneg(rng)
                }
            }
        };
        coeff.insert(r.mask(), value);
    }
    let shared = small_rational(rng);
    let singles: Vec<Rational> = (1..=n)
        .map(|i| match class_on {
            Some(s) if s.contains(i) => shared.clone(),
            _ => small_rational(rng),
        })
        .collect();
    Game::from_fn(n, |t| {
        let mut acc: Rational = t.players().map(|p| singles[p - 1].clone()).sum();
        for r in t.subsets().filter(|r| r.size() >= 2) {
            acc += coeff[&r.mask()].clone();
        }
        acc
    })
}

pub fn convex_game(n: usize, rng: &mut StdRng) -> Game {
    convex_like(n, false, None, rng)
}

pub fn strictly_convex_game(n: usize, rng: &mut StdRng) -> Game {
    convex_like(n, true, None, rng)
}

pub fn strictly_convex_game_with_class(n: usize, s: Coalition, rng: &mut StdRng) -> Game {
    convex_like(n, true, Some(s), rng)
}

pub fn strictly_concave_game_with_class(n: usize, s: Coalition, rng: &mut StdRng) -> Game {
    -&convex_like(n, true, Some(s), rng)
}

/// Superadditive cover: the least superadditive game dominating `raw` is
/// obtained by maximizing over partitions; two-part splits suffice when
/// applied bottom-up.
fn superadditive_cover(raw: &Game) -> Game {
    let n = raw.n();
    let size = 1usize << n;
    let mut best: Vec<Option<Rational>> = vec![None; size];
    let mut order: Vec<Coalition> = Coalition::all_nonempty(n).collect();
    order.sort_by_key(|c| c.size());
    for t in order {
        let mut value = raw.value(t);
        for a in t.subsets() {
            if a.is_empty() || a == t {
                continue;
            }
            let b = t.difference(&a);
            let split =
                best[a.mask() as usize].clone().unwrap() + best[b.mask() as usize].clone().unwrap();
            if split > value {
                value = split;
            }
        }
        best[t.mask() as usize] = Some(value);
    }
    Game::from_fn(n, |t| best[t.mask() as usize].clone().unwrap())
}

pub fn superadditive_game(n: usize, rng: &mut StdRng) -> Game {
    superadditive_cover(&random_game(n, rng))
}

/// Cover plus the strictly superadditive game |T|², which keeps every
/// disjoint-pair inequality strict.
pub fn strictly_superadditive_game(n: usize, rng: &mut StdRng) -> Game {
    let base = superadditive_game(n, rng);
    Game::from_fn(n, |t| base.value(t) + rat((t.size() * t.size()) as i64))
}

/// Bottom-up repair of the weak superadditivity inequalities.
fn weakly_superadditive_repair(raw: &Game, strict: bool) -> Game {
    let n = raw.n();
    let size = 1usize << n;
    let mut best: Vec<Option<Rational>> = vec![None; size];
    let mut order: Vec<Coalition> = Coalition::all_nonempty(n).collect();
    order.sort_by_key(|c| c.size());
    for t in order {
        let mut value = raw.value(t);
        if t.size() >= 2 {
            for i in t.players() {
                let rest = t.without(i);
                let single = Coalition::singleton(n, i);
                let mut bound = best[rest.mask() as usize].clone().unwrap()
                    + best[single.mask() as usize].clone().unwrap();
                if strict {
                    bound += rat(1);
                }
                if bound > value {
                    value = bound;
                }
            }
        }
        best[t.mask() as usize] = Some(value);
    }
    Game::from_fn(n, |t| best[t.mask() as usize].clone().unwrap())
}

pub fn weakly_superadditive_game(n: usize, rng: &mut StdRng) -> Game {
    weakly_superadditive_repair(&random_game(n, rng), false)
}

pub fn strictly_weakly_superadditive_game(n: usize, rng: &mut StdRng) -> Game {
    weakly_superadditive_repair(&random_game(n, rng), true)
}

/// Monotonic cover (max over subsets) of a random game; strict variant
/// adds |T| on top.
fn monotonic_cover(raw: &Game, strict: bool) -> Game {
    let n = raw.n();
    Game::from_fn(n, |t| {
        let mut best = Rational::from_integer(0.into());
        for s in t.subsets() {
            let v = raw.value(s);
            if v > best {
                best = v;
            }
        }
        if strict {
            best += rat(t.size() as i64);
        }
        best
    })
}

pub fn monotonic_game(n: usize, rng: &mut StdRng) -> Game {
    monotonic_cover(&random_game(n, rng), false)
}

pub fn strictly_monotonic_game(n: usize, rng: &mut StdRng) -> Game {
    monotonic_cover(&random_game(n, rng), true)
}

/// Random game with the grand-coalition value bumped above the singleton
/// sum. Requires n ≥ 2 (no one-player game is essential).
pub fn essential_game(n: usize, rng: &mut StdRng) -> Game {
    assert!(n >= 2, "essential games need at least two players");
    let raw = random_game(n, rng);
    let singles: Rational = (1..=n).map(|i| raw.value(Coalition::singleton(n, i))).sum();
    let bump = small_positive(rng);
    let grand = Coalition::grand(n);
    Game::from_fn(n, |t| {
        if t == grand {
            singles.clone() + &bump
        } else {
            raw.value(t)
        }
    })
}

/// A random member of the named class; also picks sensible defaults for
/// the subadditive side by negating the superadditive-side generators.
pub fn random_member(class: GameClass, n: usize, rng: &mut StdRng) -> Game {
    let game = match class {
        GameClass::Essential => essential_game(n, rng),
        GameClass::Convex => convex_game(n, rng),
        GameClass::StrictlyConvex => strictly_convex_game(n, rng),
        GameClass::Superadditive => superadditive_game(n, rng),
        GameClass::StrictlySuperadditive => strictly_superadditive_game(n, rng),
        GameClass::WeaklySuperadditive => weakly_superadditive_game(n, rng),
        GameClass::StrictlyWeaklySuperadditive => strictly_weakly_superadditive_game(n, rng),
        GameClass::Monotonic => monotonic_game(n, rng),
        GameClass::StrictlyMonotonic => strictly_monotonic_game(n, rng),
        GameClass::Additive => additive_game(n, None, rng),
        GameClass::WeaklySubadditive => -&weakly_superadditive_game(n, rng),
        GameClass::StrictlyWeaklySubadditive => -&strictly_weakly_superadditive_game(n, rng),
        GameClass::Subadditive => -&superadditive_game(n, rng),
        GameClass::StrictlySubadditive => -&strictly_superadditive_game(n, rng),
        GameClass::Concave => -&convex_game(n, rng),
        GameClass::StrictlyConcave => -&strictly_convex_game(n, rng),
    };
    assert!(
        is_member(&game, class),
        "generator produced a game outside {class}: {game}"
    );
    game
}

/// A random nonempty proper subset of N together with a player outside it,
/// for exercising the extension constructions.
pub fn random_class_and_outsider(n: usize, rng: &mut StdRng) -> (Coalition, usize) {
    assert!(n >= 2, "need at least two players");
    loop {
        let mask = rng.gen_range(1..(1u32 << n) - 1);
        let s = Coalition::from_mask(n, mask);
        if s.size() < n {
            let outside: Vec<usize> = s.complement().players().collect();
            let k = outside[rng.gen_range(0..outside.len())];
            return (s, k);
        }
    }
}
