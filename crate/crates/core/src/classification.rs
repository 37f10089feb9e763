//! Membership predicates for sixteen game classes.
//!
//! Every predicate evaluates its defining quantifier exhaustively over
//! coalition pairs (or coalition-player pairs for the weak variants).
//! These loops double as the test oracles for the construction module, so
//! they stay as close to the definitions as possible; no algebraic
//! shortcuts beyond skipping symmetric pairs.

use std::fmt;
use std::str::FromStr;

use crate::coalition::Coalition;
use crate::game::Game;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum GameClass {
    Essential,
    Convex,
    StrictlyConvex,
    Superadditive,
    StrictlySuperadditive,
    WeaklySuperadditive,
    StrictlyWeaklySuperadditive,
    Monotonic,
    StrictlyMonotonic,
    Additive,
    WeaklySubadditive,
    StrictlyWeaklySubadditive,
    Subadditive,
    StrictlySubadditive,
    Concave,
    StrictlyConcave,
}

pub const ALL_CLASSES: [GameClass; 16] = [
    GameClass::Essential,
    GameClass::Convex,
    GameClass::StrictlyConvex,
    GameClass::Superadditive,
    GameClass::StrictlySuperadditive,
    GameClass::WeaklySuperadditive,
    GameClass::StrictlyWeaklySuperadditive,
    GameClass::Monotonic,
    GameClass::StrictlyMonotonic,
    GameClass::Additive,
    GameClass::WeaklySubadditive,
    GameClass::StrictlyWeaklySubadditive,
    GameClass::Subadditive,
    GameClass::StrictlySubadditive,
    GameClass::Concave,
    GameClass::StrictlyConcave,
];

impl GameClass {
    pub fn name(&self) -> &'static str {
        match self {
            GameClass::Essential => "essential",
            GameClass::Convex => "convex",
            GameClass::StrictlyConvex => "strictly-convex",
            GameClass::Superadditive => "superadditive",
            GameClass::StrictlySuperadditive => "strictly-superadditive",
            GameClass::WeaklySuperadditive => "weakly-superadditive",
            GameClass::StrictlyWeaklySuperadditive => "strictly-weakly-superadditive",
            GameClass::Monotonic => "monotonic",
            GameClass::StrictlyMonotonic => "strictly-monotonic",
            GameClass::Additive => "additive",
            GameClass::WeaklySubadditive => "weakly-subadditive",
            GameClass::StrictlyWeaklySubadditive => "strictly-weakly-subadditive",
            GameClass::Subadditive => "subadditive",
            GameClass::StrictlySubadditive => "strictly-subadditive",
            GameClass::Concave => "concave",
            GameClass::StrictlyConcave => "strictly-concave",
        }
    }

    /// The non-strict class implied by a strict one, where it exists.
    pub fn relaxation(&self) -> Option<GameClass> {
        match self {
            GameClass::StrictlyConvex => Some(GameClass::Convex),
            GameClass::StrictlySuperadditive => Some(GameClass::Superadditive),
            GameClass::StrictlyWeaklySuperadditive => Some(GameClass::WeaklySuperadditive),
            GameClass::StrictlyMonotonic => Some(GameClass::Monotonic),
            GameClass::StrictlyWeaklySubadditive => Some(GameClass::WeaklySubadditive),
            GameClass::StrictlySubadditive => Some(GameClass::Subadditive),
            GameClass::StrictlyConcave => Some(GameClass::Concave),
            _ => None,
        }
    }
}

impl fmt::Display for GameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameClass {
    type Err = String;

    fn from_str(s: &str) -> Result<GameClass, String> {
        ALL_CLASSES
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown game class `{s}`"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Cmp {
    fn holds(&self, lhs: &crate::rational::Rational, rhs: &crate::rational::Rational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Eq => lhs == rhs,
        }
    }
}

/// ∀S,T (incomparable pairs only when `incomparable_only`):
/// v(S) + v(T) cmp v(S∪T) + v(S∩T)
fn modular_pairs(v: &Game, cmp: Cmp, incomparable_only: bool) -> bool {
    let n = v.n();
    for s in Coalition::all(n) {
        for t in Coalition::all(n).filter(|t| t.mask() >= s.mask()) {
            if incomparable_only && (s.is_subset_of(&t) || t.is_subset_of(&s)) {
                continue;
            }
            let lhs = v.value(s) + v.value(t);
            let rhs = v.value(s.union(&t)) + v.value(s.intersection(&t));
            if !cmp.holds(&lhs, &rhs) {
                return false;
            }
        }
    }
    true
}

/// ∀ disjoint S,T (nonempty when `nonempty_only`):
/// v(S) + v(T) cmp v(S∪T)
fn disjoint_pairs(v: &Game, cmp: Cmp, nonempty_only: bool) -> bool {
    let n = v.n();
    for s in Coalition::all(n) {
        if nonempty_only && s.is_empty() {
            continue;
        }
        for t in s.complement().subsets() {
            if t.mask() < s.mask() {
                continue;
            }
            if nonempty_only && t.is_empty() {
                continue;
            }
            let lhs = v.value(s) + v.value(t);
            if !cmp.holds(&lhs, &v.value(s.union(&t))) {
                return false;
            }
        }
    }
    true
}

/// ∀S (nonempty when `nonempty_only`), ∀i ∉ S:
/// v(S) + v({i}) cmp v(S∪{i})
fn single_player_pairs(v: &Game, cmp: Cmp, nonempty_only: bool) -> bool {
    let n = v.n();
    for s in Coalition::all(n) {
        if nonempty_only && s.is_empty() {
            continue;
        }
        for i in 1..=n {
            if s.contains(i) {
                continue;
            }
            let lhs = v.value(s) + v.value(Coalition::singleton(n, i));
            if !cmp.holds(&lhs, &v.value(s.with(i))) {
                return false;
            }
        }
    }
    true
}

/// ∀S ⊆ T (proper when `proper_only`): v(S) cmp v(T)
fn inclusion_pairs(v: &Game, cmp: Cmp, proper_only: bool) -> bool {
    let n = v.n();
    for t in Coalition::all(n) {
        for s in t.subsets() {
            if proper_only && s == t {
                continue;
            }
            if !cmp.holds(&v.value(s), &v.value(t)) {
                return false;
            }
        }
    }
    true
}

fn essential(v: &Game) -> bool {
    let singles: crate::rational::Rational = (1..=v.n())
        .map(|i| v.value(Coalition::singleton(v.n(), i)))
        .sum();
    v.grand_value() > singles
}

/// Does `v` belong to the class?
pub fn is_member(v: &Game, class: GameClass) -> bool {
    match class {
        GameClass::Essential => essential(v),
        GameClass::Convex => modular_pairs(v, Cmp::Le, false),
        GameClass::StrictlyConvex => modular_pairs(v, Cmp::Lt, true),
        GameClass::Superadditive => disjoint_pairs(v, Cmp::Le, false),
        GameClass::StrictlySuperadditive => disjoint_pairs(v, Cmp::Lt, true),
        GameClass::WeaklySuperadditive => single_player_pairs(v, Cmp::Le, false),
        GameClass::StrictlyWeaklySuperadditive => single_player_pairs(v, Cmp::Lt, true),
        GameClass::Monotonic => inclusion_pairs(v, Cmp::Le, false),
        GameClass::StrictlyMonotonic => inclusion_pairs(v, Cmp::Lt, true),
        GameClass::Additive => disjoint_pairs(v, Cmp::Eq, false),
        GameClass::WeaklySubadditive => single_player_pairs(v, Cmp::Ge, false),
        GameClass::StrictlyWeaklySubadditive => single_player_pairs(v, Cmp::Gt, true),
        GameClass::Subadditive => disjoint_pairs(v, Cmp::Ge, false),
        GameClass::StrictlySubadditive => disjoint_pairs(v, Cmp::Gt, true),
        GameClass::Concave => modular_pairs(v, Cmp::Ge, false),
        GameClass::StrictlyConcave => modular_pairs(v, Cmp::Gt, true),
    }
}

/// The exact subset of the sixteen tags that hold for `v`. Every tag is
/// evaluated independently; the implication lattice is itself under test
/// elsewhere.
pub fn classify(v: &Game) -> Vec<GameClass> {
    ALL_CLASSES
        .into_iter()
        .filter(|&c| is_member(v, c))
        .collect()
}

/// The marginal-contribution characterization of (strict)
/// convexity/concavity: ∀i ∈ N, ∀Z ⊂ T ⊆ N∖{i}, compare v′ᵢ(Z) against
/// v′ᵢ(T) with ≤ (convex), < (strictly convex), ≥ (concave), or
/// > (strictly concave).
pub fn convexity_via_marginals(v: &Game, strict: bool, concave: bool) -> bool {
    let cmp = match (strict, concave) {
        (false, false) => Cmp::Le,
        (true, false) => Cmp::Lt,
        (false, true) => Cmp::Ge,
        (true, true) => Cmp::Gt,
    };
    let n = v.n();
    for i in 1..=n {
        let rest = Coalition::singleton(n, i).complement();
        for t in rest.subsets() {
            let vt = v.marginal(i, t);
            for z in t.subsets() {
                if z == t {
                    continue;
                }
                if !cmp.holds(&v.marginal(i, z), &vt) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn g(n: usize, paper: &[i64]) -> Game {
        Game::from_paper_order(n, paper.iter().map(|&k| rat(k)).collect()).unwrap()
    }

    #[test]
    fn showcase_game_is_superadditive_but_not_convex() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        assert!(is_member(&v, GameClass::Superadditive));
        assert!(!is_member(&v, GameClass::Convex));
    }

    #[test]
    fn subadditive_fixture_and_its_dual() {
        let v = g(3, &[4, 4, 4, 4, 4, 4, 7]);
        assert!(is_member(&v, GameClass::StrictlySubadditive));
        // its dual fails weak superadditivity
        assert!(!is_member(&v.dual(), GameClass::WeaklySuperadditive));
    }

    #[test]
    fn strictly_superadditive_dual_caveat() {
        let v = g(3, &[0, 0, 0, 3, 1, 2, 4]);
        assert!(is_member(&v, GameClass::StrictlySuperadditive));
        assert!(!is_member(&v.dual(), GameClass::WeaklySubadditive));
    }

    #[test]
    fn zero_game_classification() {
        let tags = classify(&Game::zero(3));
        let expect = [
            GameClass::Convex,
            GameClass::Superadditive,
            GameClass::WeaklySuperadditive,
            GameClass::Monotonic,
            GameClass::Additive,
            GameClass::WeaklySubadditive,
            GameClass::Subadditive,
            GameClass::Concave,
        ];
        assert_eq!(tags, expect.to_vec());
    }

    #[test]
    fn forced_extension_games() {
        let w1 = g(3, &[10, 10, 10, 10, 10, 10, -20]);
        assert!(!is_member(&w1, GameClass::Essential));

        let w2 = g(
            4,
            &[10, 10, 10, 10, 61, 61, 61, 61, 61, 61, 72, 72, 72, 72, 113],
        );
        let tags = classify(&w2);
        assert!(!tags.contains(&GameClass::Superadditive));
        assert!(tags.contains(&GameClass::WeaklySuperadditive));
    }

    #[test]
    fn essential_is_impossible_for_one_player() {
        assert!(!is_member(&g(1, &[5]), GameClass::Essential));
    }

    #[test]
    fn marginal_characterization_on_fixed_games() {
        let zero = Game::zero(3);
        assert!(convexity_via_marginals(&zero, false, false));
        assert!(convexity_via_marginals(&zero, false, true));
        assert!(!convexity_via_marginals(&zero, true, false));
        assert!(!convexity_via_marginals(&zero, true, true));

        let v = g(3, &[0, 0, 0, 3, 1, 2, 3]);
        assert!(!convexity_via_marginals(&v, false, false));
    }

    #[test]
    fn class_names_round_trip() {
        for c in ALL_CLASSES {
            assert_eq!(c.name().parse::<GameClass>().unwrap(), c);
        }
        assert!("bogus".parse::<GameClass>().is_err());
    }

    #[test]
    fn strict_membership_implies_relaxed_membership_on_samples() {
        let games = [
            g(3, &[4, 4, 4, 4, 4, 4, 7]),
            g(3, &[0, 0, 0, 3, 1, 2, 4]),
            g(3, &[1, 1, 1, 3, 3, 3, 6]),
            g(3, &[-1, 0, 2, 1, -2, 3, 0]),
        ];
        for v in &games {
            for c in ALL_CLASSES {
                if let Some(relaxed) = c.relaxation() {
                    if is_member(v, c) {
                        assert!(
                            is_member(v, relaxed),
                            "{c} held but {relaxed} failed on {v}"
                        );
                    }
                }
            }
        }
    }
}
