//! The Shapley value and the three axioms.
//!
//! Two independent algorithms compute the value: the subset-sum formula
//! with exact factorial coefficients, and an oracle that averages marginal
//! vectors over all n! arrival orders. They must agree exactly on every
//! game; the rest of the crate treats the pair as its ground truth.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coalition::Coalition;
use crate::equivalence::players_equivalent;
use crate::game::{Allocation, Game};
use crate::rational::Rational;

/// Guard for the n! enumeration in the permutation oracle.
pub const ORACLE_PLAYER_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapleyError {
    #[error("permutation oracle limited to {limit} players, game has {n}")]
    GuardExceeded { n: usize, limit: usize },
    #[error("allocation has {got} payoffs but the game has {expected} players")]
    LengthMismatch { expected: usize, got: usize },
    #[error("games have different player counts: {0} vs {1}")]
    PlayerCountMismatch(usize, usize),
}

fn factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    acc
}

/// φᵢ(v) = Σ_{S ⊆ N∖{i}} v′ᵢ(S) · |S|! (n−|S|−1)! / n!
pub fn shapley(v: &Game) -> Allocation {
    let n = v.n();
    let n_fact = factorial(n);
    // weight by |S|, shared across players
    let weights: Vec<Rational> = (0..n)
        .map(|s| Rational::new(factorial(s) * factorial(n - s - 1), n_fact.clone()))
        .collect();
    let payoffs = (1..=n)
        .map(|i| {
            Coalition::singleton(n, i)
                .complement()
                .subsets()
                .map(|s| v.marginal(i, s) * &weights[s.size()])
                .sum()
        })
        .collect();
    Allocation::new(payoffs)
}

/// Averages the marginal-contribution vector over all n! player orders.
/// Independent of [`shapley`]; must agree with it exactly.
pub fn shapley_permutation_oracle(v: &Game) -> Result<Allocation, ShapleyError> {
    shapley_permutation_oracle_with_limit(v, ORACLE_PLAYER_LIMIT)
}

pub fn shapley_permutation_oracle_with_limit(
    v: &Game,
    limit: usize,
) -> Result<Allocation, ShapleyError> {
    let n = v.n();
    if n > limit {
        return Err(ShapleyError::GuardExceeded { n, limit });
    }
    let mut sums = vec![Rational::zero(); n];
    let mut orders: usize = 0;
    for perm in (1..=n).permutations(n) {
        let mut s = Coalition::empty(n);
        for &p in &perm {
            sums[p - 1] += v.marginal(p, s);
            s = s.with(p);
        }
        orders += 1;
    }
    let count = Rational::from_integer(BigInt::from(orders));
    Ok(Allocation::new(
        sums.into_iter().map(|x| x / &count).collect(),
    ))
}

/// PO: Σᵢ aᵢ = v(N), exactly.
pub fn check_po(v: &Game, a: &Allocation) -> Result<bool, ShapleyError> {
    if a.len() != v.n() {
        return Err(ShapleyError::LengthMismatch {
            expected: v.n(),
            got: a.len(),
        });
    }
    Ok(a.total() == v.grand_value())
}

/// ETP: every ∼ᵛ-equivalent pair receives equal payoffs.
pub fn check_etp(v: &Game, a: &Allocation) -> Result<bool, ShapleyError> {
    if a.len() != v.n() {
        return Err(ShapleyError::LengthMismatch {
            expected: v.n(),
            got: a.len(),
        });
    }
    let n = v.n();
    for i in 1..=n {
        for j in (i + 1)..=n {
            if players_equivalent(v, i, j) && a.payoff(i) != a.payoff(j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Outcome of an EMP check on one (v, w, i) triple. When the marginal
/// functions differ the implication holds vacuously; the flag keeps that
/// case distinguishable in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpPairCheck {
    /// v′ᵢ = w′ᵢ held, so the payoff comparison was meaningful.
    pub applicable: bool,
    pub holds: bool,
}

/// EMP on a pair of games: (v′ᵢ = w′ᵢ) ⇒ (aᵥ,ᵢ = a_w,ᵢ).
pub fn check_emp_pair(
    v: &Game,
    w: &Game,
    i: usize,
    av: &Allocation,
    aw: &Allocation,
) -> Result<EmpPairCheck, ShapleyError> {
    if v.n() != w.n() {
        return Err(ShapleyError::PlayerCountMismatch(v.n(), w.n()));
    }
    if av.len() != v.n() || aw.len() != w.n() {
        return Err(ShapleyError::LengthMismatch {
            expected: v.n(),
            got: if av.len() != v.n() {
                av.len()
            } else {
                aw.len()
            },
        });
    }
    if !v.same_marginals(w, i) {
        return Ok(EmpPairCheck {
            applicable: false,
            holds: true,
        });
    }
    Ok(EmpPairCheck {
        applicable: true,
        holds: av.payoff(i) == aw.payoff(i),
    })
}

/// Payoff rows for a finite set of games: ψᵢ(v) keyed by (game index,
/// player). A game either has a full row of n entries or none.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SolutionTable {
    n: usize,
    rows: BTreeMap<usize, Allocation>,
}

impl SolutionTable {
    pub fn new(n: usize) -> SolutionTable {
        SolutionTable {
            n,
            rows: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, game_index: usize, row: Allocation) {
        assert_eq!(row.len(), self.n, "row length does not match player count");
        self.rows.insert(game_index, row);
    }

    pub fn row(&self, game_index: usize) -> Option<&Allocation> {
        self.rows.get(&game_index)
    }

    pub fn payoff(&self, game_index: usize, player: usize) -> Option<&Rational> {
        self.rows.get(&game_index).map(|r| r.payoff(player))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Allocation)> {
        self.rows.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
