//! TU games over exact rationals.
//!
//! A game stores one rational per nonempty coalition, indexed by bitmask;
//! the empty coalition is never stored and always reads as 0. Games are
//! immutable after construction and all operations here are pure.

use std::fmt;
use std::ops::{Add, Neg};

use num_traits::Zero;
use thiserror::Error;

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::rational::{rat, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("player count must be between 1 and {MAX_PLAYERS}, got {0}")]
    BadPlayerCount(usize),
    #[error("value table must have {expected} entries for {n} players, got {got}")]
    WrongTableSize {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("missing value for coalition {0}")]
    MissingCoalition(String),
    #[error("duplicate value for coalition {0}")]
    DuplicateCoalition(String),
    #[error("the empty coalition must not be listed; v(∅) = 0 is implicit")]
    EmptyCoalitionEntry,
    #[error("unanimity game requires a nonempty coalition")]
    EmptyUnanimityCoalition,
}

/// A transferable-utility cooperative game: `n` players and a total table
/// of values on the 2ⁿ−1 nonempty coalitions, with v(∅) = 0 implicit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Game {
    n: usize,
    /// values[mask - 1] = v(coalition with that mask)
    values: Vec<Rational>,
}

impl Game {
    /// Builds a game from an explicit (coalition, value) table. The table
    /// must cover every nonempty coalition exactly once.
    pub fn from_table(n: usize, entries: &[(Coalition, Rational)]) -> Result<Game, GameError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(GameError::BadPlayerCount(n));
        }
        let size = (1usize << n) - 1;
        if entries.len() != size {
            return Err(GameError::WrongTableSize {
                n,
                expected: size,
                got: entries.len(),
            });
        }
        let mut values: Vec<Option<Rational>> = vec![None; size];
        for (c, v) in entries {
            assert_eq!(c.n(), n, "coalition context does not match player count");
            if c.is_empty() {
                return Err(GameError::EmptyCoalitionEntry);
            }
            let slot = &mut values[c.mask() as usize - 1];
            if slot.is_some() {
                return Err(GameError::DuplicateCoalition(c.to_string()));
            }
            *slot = Some(v.clone());
        }
        let mut table = Vec::with_capacity(size);
        for (idx, v) in values.into_iter().enumerate() {
            match v {
                Some(v) => table.push(v),
                None => {
                    let c = Coalition::from_mask(n, idx as u32 + 1);
                    return Err(GameError::MissingCoalition(c.to_string()));
                }
            }
        }
        Ok(Game { n, values: table })
    }

    /// Builds a game by evaluating `f` on every nonempty coalition.
    pub fn from_fn(n: usize, f: impl FnMut(Coalition) -> Rational) -> Game {
        assert!((1..=MAX_PLAYERS).contains(&n), "player count out of range");
        let values = Coalition::all_nonempty(n).map(f).collect();
        Game { n, values }
    }

    /// The zero game.
    pub fn zero(n: usize) -> Game {
        Game::from_fn(n, |_| Rational::zero())
    }

    /// The unanimity game u_T: worth 1 on every S ⊇ T, 0 otherwise.
    pub fn unanimity(n: usize, t: Coalition) -> Result<Game, GameError> {
        assert_eq!(t.n(), n, "coalition context does not match player count");
        if t.is_empty() {
            return Err(GameError::EmptyUnanimityCoalition);
        }
        Ok(Game::from_fn(n, |s| {
            if t.is_subset_of(&s) {
                rat(1)
            } else {
                Rational::zero()
            }
        }))
    }

    /// Parses the paper's serialization: coalitions sorted by cardinality
    /// ascending, ties broken lexicographically on the sorted player list.
    pub fn from_paper_order(n: usize, values: Vec<Rational>) -> Result<Game, GameError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(GameError::BadPlayerCount(n));
        }
        let size = (1usize << n) - 1;
        if values.len() != size {
            return Err(GameError::WrongTableSize {
                n,
                expected: size,
                got: values.len(),
            });
        }
        let order = paper_order_coalitions(n);
        let mut table = vec![Rational::zero(); size];
        for (c, v) in order.into_iter().zip(values) {
            table[c.mask() as usize - 1] = v;
        }
        Ok(Game { n, values: table })
    }

    pub fn to_paper_order(&self) -> Vec<Rational> {
        paper_order_coalitions(self.n)
            .into_iter()
            .map(|c| self.values[c.mask() as usize - 1].clone())
            .collect()
    }

    /// Parses a vector listing masks 1..2ⁿ−1 ascending.
    pub fn from_bitmask_order(n: usize, values: Vec<Rational>) -> Result<Game, GameError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(GameError::BadPlayerCount(n));
        }
        let size = (1usize << n) - 1;
        if values.len() != size {
            return Err(GameError::WrongTableSize {
                n,
                expected: size,
                got: values.len(),
            });
        }
        Ok(Game { n, values })
    }

    pub fn to_bitmask_order(&self) -> Vec<Rational> {
        self.values.clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    /// v(S); the empty coalition reads as 0.
    pub fn value(&self, s: Coalition) -> Rational {
        self.value_ref(s).cloned().unwrap_or_else(Rational::zero)
    }

    fn value_ref(&self, s: Coalition) -> Option<&Rational> {
        assert_eq!(s.n(), self.n, "coalition context does not match game");
        if s.is_empty() {
            None
        } else {
            Some(&self.values[s.mask() as usize - 1])
        }
    }

    /// v(N)
    pub fn grand_value(&self) -> Rational {
        self.value(self.grand_coalition())
    }

    /// Player i's marginal contribution to S: v(S ∪ {i}) − v(S).
    /// Defined for every S ⊆ N; zero whenever i ∈ S.
    pub fn marginal(&self, player: usize, s: Coalition) -> Rational {
        assert!(
            player >= 1 && player <= self.n,
            "player {player} out of 1..={}",
            self.n
        );
        if s.contains(player) {
            return Rational::zero();
        }
        self.value(s.with(player)) - self.value(s)
    }

    /// True iff v′ᵢ = w′ᵢ, i.e. the marginal contribution functions agree on
    /// every S ⊆ N ∖ {i}.
    pub fn same_marginals(&self, other: &Game, player: usize) -> bool {
        assert_eq!(self.n, other.n, "games have different player sets");
        Coalition::singleton(self.n, player)
            .complement()
            .subsets()
            .all(|s| self.marginal(player, s) == other.marginal(player, s))
    }

    /// The dual game v̄(S) = v(N) − v(N∖S).
    pub fn dual(&self) -> Game {
        let total = self.grand_value();
        Game::from_fn(self.n, |s| total.clone() - self.value(s.complement()))
    }
}

impl Add<&Game> for &Game {
    type Output = Game;

    fn add(self, rhs: &Game) -> Game {
        assert_eq!(self.n, rhs.n, "games have different player sets");
        Game::from_fn(self.n, |s| self.value(s) + rhs.value(s))
    }
}

impl Neg for &Game {
    type Output = Game;

    fn neg(self) -> Game {
        Game::from_fn(self.n, |s| -self.value(s))
    }
}

impl fmt::Display for Game {
    /// Paper-order values separated by spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.to_paper_order().iter().enumerate() {
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Game[n={}]({})", self.n, self)
    }
}

/// Nonempty coalitions in the paper's vector order: cardinality ascending,
/// ties lexicographic on the sorted player-index sequence.
pub fn paper_order_coalitions(n: usize) -> Vec<Coalition> {
    let mut cs: Vec<Coalition> = Coalition::all_nonempty(n).collect();
    cs.sort_by_key(|c| (c.size(), c.players().collect::<Vec<_>>()));
    cs
}

/// One payoff per player, indexed 1..=n externally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    payoffs: Vec<Rational>,
}

impl Allocation {
    pub fn new(payoffs: Vec<Rational>) -> Allocation {
        Allocation { payoffs }
    }

    pub fn len(&self) -> usize {
        self.payoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payoffs.is_empty()
    }

    /// Player i's payoff, 1-based.
    pub fn payoff(&self, player: usize) -> &Rational {
        assert!(
            player >= 1 && player <= self.payoffs.len(),
            "player {player} out of 1..={}",
            self.payoffs.len()
        );
        &self.payoffs[player - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> {
        self.payoffs.iter()
    }

    pub fn total(&self) -> Rational {
        self.payoffs.iter().cloned().sum()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.payoffs.iter().enumerate() {
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Allocation({})", self)
    }
}
