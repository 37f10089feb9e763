//! Coalitions of players encoded as bitmasks.
//!
//! Players are numbered `1..=n` externally; player `i` occupies bit `i-1`.
//! A coalition carries its player-count context `n` so that complements are
//! well defined; set operations require both operands to share `n`.

use std::fmt;

pub const MAX_PLAYERS: usize = 20;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    n: u8,
    mask: u32,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        assert!((1..=MAX_PLAYERS).contains(&n), "player count out of range");
        Coalition {
            n: n as u8,
            mask: 0,
        }
    }

    /// The grand coalition N.
    pub fn grand(n: usize) -> Self {
        Coalition::from_mask(n, ((1u64 << n) - 1) as u32)
    }

    pub fn singleton(n: usize, player: usize) -> Self {
        assert!(player >= 1 && player <= n, "player {player} out of 1..={n}");
        Coalition::from_mask(n, 1 << (player - 1))
    }

    pub fn from_mask(n: usize, mask: u32) -> Self {
        assert!((1..=MAX_PLAYERS).contains(&n), "player count out of range");
        assert!(
            (mask as u64) < (1u64 << n),
            "mask {mask:#b} has bits above player {n}"
        );
        Coalition { n: n as u8, mask }
    }

    pub fn from_players(n: usize, players: &[usize]) -> Self {
        let mut c = Coalition::empty(n);
        for &p in players {
            c = c.with(p);
        }
        c
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// |S|
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_grand(&self) -> bool {
        *self == Coalition::grand(self.n())
    }

    pub fn contains(&self, player: usize) -> bool {
        assert!(
            player >= 1 && player <= self.n(),
            "player {player} out of 1..={}",
            self.n
        );
        self.mask & (1 << (player - 1)) != 0
    }

    /// S ∪ {i}
    pub fn with(&self, player: usize) -> Self {
        assert!(
            player >= 1 && player <= self.n(),
            "player {player} out of 1..={}",
            self.n
        );
        Coalition {
            n: self.n,
            mask: self.mask | 1 << (player - 1),
        }
    }

    /// S ∖ {i}
    pub fn without(&self, player: usize) -> Self {
        assert!(
            player >= 1 && player <= self.n(),
            "player {player} out of 1..={}",
            self.n
        );
        Coalition {
            n: self.n,
            mask: self.mask & !(1 << (player - 1)),
        }
    }

    fn check_same_context(&self, other: &Coalition) {
        assert_eq!(self.n, other.n, "coalitions from different player sets");
    }

    pub fn union(&self, other: &Coalition) -> Self {
        self.check_same_context(other);
        Coalition {
            n: self.n,
            mask: self.mask | other.mask,
        }
    }

    pub fn intersection(&self, other: &Coalition) -> Self {
        self.check_same_context(other);
        Coalition {
            n: self.n,
            mask: self.mask & other.mask,
        }
    }

    /// S ∖ T
    pub fn difference(&self, other: &Coalition) -> Self {
        self.check_same_context(other);
        Coalition {
            n: self.n,
            mask: self.mask & !other.mask,
        }
    }

    /// N ∖ S
    pub fn complement(&self) -> Self {
        Coalition {
            n: self.n,
            mask: Coalition::grand(self.n()).mask & !self.mask,
        }
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.check_same_context(other);
        self.mask & !other.mask == 0
    }

    pub fn is_proper_subset_of(&self, other: &Coalition) -> bool {
        self.is_subset_of(other) && self.mask != other.mask
    }

    pub fn is_disjoint_from(&self, other: &Coalition) -> bool {
        self.check_same_context(other);
        self.mask & other.mask == 0
    }

    /// Members in ascending order, 1-based.
    pub fn players(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n();
        (1..=n).filter(move |&p| self.mask & (1 << (p - 1)) != 0)
    }

    /// All subsets of this coalition, including ∅ and the coalition itself
    /// (carry-rippler enumeration).
    pub fn subsets(&self) -> Subsets {
        Subsets {
            n: self.n,
            set: self.mask,
            subset: 0,
            done: false,
        }
    }

    /// All 2ⁿ coalitions over `n` players, masks ascending from ∅.
    pub fn all(n: usize) -> impl Iterator<Item = Coalition> {
        assert!((1..=MAX_PLAYERS).contains(&n), "player count out of range");
        (0..(1u64 << n)).map(move |m| Coalition::from_mask(n, m as u32))
    }

    /// All 2ⁿ−1 nonempty coalitions, masks ascending.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
        Coalition::all(n).skip(1)
    }
}

pub struct Subsets {
    n: u8,
    set: u32,
    subset: u32,
    done: bool,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        if self.done {
            return None;
        }
        let current = Coalition {
            n: self.n,
            mask: self.subset,
        };
        self.subset = self.subset.wrapping_sub(self.set) & self.set;
        self.done = self.subset == 0;
        Some(current)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, p) in self.players().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
