//! The marginal-equivalence relation between players.
//!
//! Players i and j are equivalent in v when their marginal contribution
//! functions agree on every coalition avoiding both. A coalition whose
//! members are pairwise equivalent is an equivalence class in v. The value
//! characterization (`value_characterization`) and the marginal
//! corollary (`marginals_respect_class`) are implemented as independent exhaustive
//! checks so the two routes can be tested against each other.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::coalition::Coalition;
use crate::game::Game;
use crate::rational::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("coalition {0} is not an equivalence class in the game")]
    NotAnEquivalenceClass(String),
    #[error("player {0} belongs to the coalition")]
    PlayerInClass(usize),
}

/// i ∼ᵛ j: ∀S ⊆ N with i,j ∉ S, v′ᵢ(S) = v′ⱼ(S).
pub fn players_equivalent(v: &Game, i: usize, j: usize) -> bool {
    let n = v.n();
    assert!(i >= 1 && i <= n, "player {i} out of 1..={n}");
    assert!(j >= 1 && j <= n, "player {j} out of 1..={n}");
    if i == j {
        return true;
    }
    let avoid = Coalition::from_players(n, &[i, j]).complement();
    avoid
        .subsets()
        .all(|s| v.marginal(i, s) == v.marginal(j, s))
}

/// Is S an equivalence class in v? Vacuously true for |S| ≤ 1.
pub fn is_equivalence_class(v: &Game, s: Coalition) -> bool {
    assert_eq!(s.n(), v.n(), "coalition context does not match game");
    let members: Vec<usize> = s.players().collect();
    for (idx, &i) in members.iter().enumerate() {
        for &j in &members[idx + 1..] {
            if !players_equivalent(v, i, j) {
                return false;
            }
        }
    }
    true
}

/// Disjoint coalitions covering N.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Partition {
    blocks: Vec<Coalition>,
}

impl Partition {
    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    /// The block containing `player`.
    pub fn block_of(&self, player: usize) -> Coalition {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(player))
            .expect("partition covers every player")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, b) in self.blocks.iter().enumerate() {
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The quotient of N by ∼ᵛ. Union-find over the pairwise relation; the
/// transitivity the relation is supposed to have is then asserted by
/// re-checking every block, rather than assumed.
pub fn finest_partition(v: &Game) -> Partition {
    let n = v.n();
    let mut parent: Vec<usize> = (0..n).collect();

    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for i in 1..=n {
        for j in (i + 1)..=n {
            if players_equivalent(v, i, j) {
                let (ri, rj) = (root(&mut parent, i - 1), root(&mut parent, j - 1));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }

    let mut by_root: HashMap<usize, Coalition> = HashMap::new();
    for p in 1..=n {
        let r = root(&mut parent, p - 1);
        by_root
            .entry(r)
            .and_modify(|c| *c = c.with(p))
            .or_insert_with(|| Coalition::singleton(n, p));
    }
    let mut blocks: Vec<Coalition> = by_root.into_values().collect();
    blocks.sort_by_key(|b| b.players().next().unwrap());

    for b in &blocks {
        assert!(
            is_equivalence_class(v, *b),
            "transitivity of the equivalence relation failed on block {b}"
        );
    }
    Partition { blocks }
}

/// The value characterization of equivalence classes: S is one iff
/// ∀T,Z ⊆ N with T∖S = Z∖S and |T| = |Z|: v(T) = v(Z). Evaluated directly
/// by grouping all coalitions on (T∖S, |T|).
pub fn value_characterization(v: &Game, s: Coalition) -> bool {
    assert_eq!(s.n(), v.n(), "coalition context does not match game");
    let n = v.n();
    let mut groups: HashMap<(u32, usize), Rational> = HashMap::new();
    for t in Coalition::all(n) {
        let key = (t.difference(&s).mask(), t.size());
        let value = v.value(t);
        match groups.get(&key) {
            Some(existing) => {
                if *existing != value {
                    return false;
                }
            }
            None => {
                groups.insert(key, value);
            }
        }
    }
    true
}

/// The marginal corollary of the value characterization: with S an
/// equivalence class and k ∉ S, v′_k is constant on every group of
/// coalitions T,Z ⊆ N∖{k} with T∖S = Z∖S and |T| = |Z|. Precondition
/// failures are reported distinctly from a false result.
pub fn marginals_respect_class(v: &Game, s: Coalition, k: usize) -> Result<bool, EquivalenceError> {
    assert_eq!(s.n(), v.n(), "coalition context does not match game");
    let n = v.n();
    assert!(k >= 1 && k <= n, "player {k} out of 1..={n}");
    if s.contains(k) {
        return Err(EquivalenceError::PlayerInClass(k));
    }
    if !is_equivalence_class(v, s) {
        return Err(EquivalenceError::NotAnEquivalenceClass(s.to_string()));
    }
    let mut groups: HashMap<(u32, usize), Rational> = HashMap::new();
    for t in Coalition::singleton(n, k).complement().subsets() {
        let key = (t.difference(&s).mask(), t.size());
        let value = v.marginal(k, t);
        match groups.get(&key) {
            Some(existing) => {
                if *existing != value {
                    return Ok(false);
                }
            }
            None => {
                groups.insert(key, value);
            }
        }
    }
    Ok(true)
}
