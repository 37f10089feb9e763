//! Exact-arithmetic transferable-utility (TU) cooperative games.
//!
//! Everything in this crate is computed over arbitrary-precision rationals;
//! there is no floating point and no tolerance anywhere. The crate provides
//!
//! - games over coalitions encoded as bitmasks ([`Game`], [`Coalition`]),
//!   marginal contributions, duals, and the "paper order" serialization of
//!   value vectors,
//! - membership predicates for sixteen game classes ([`classification`]),
//! - the marginal-equivalence relation between players and its machinery
//!   ([`equivalence`]),
//! - the Shapley value by two independent algorithms plus executable
//!   checkers for the PO, ETP, and EMP axioms ([`shapley`]),
//! - constructions that grow an equivalence class by one player while
//!   preserving that player's marginal contribution function, inside
//!   several game classes ([`constructions`]),
//! - an engine that derives the Shapley value of a game using only the
//!   axioms PO, ETP, and EMP, with a replayable derivation trace, an
//!   EMP-closedness checker for finite game sets, and an exact solver for
//!   the axiom system on a finite set of games ([`young`]).

pub mod classification;
pub mod coalition;
pub mod constructions;
pub mod equivalence;
pub mod game;
pub mod io;
pub mod rational;
pub mod sampling;
pub mod shapley;
pub mod young;

pub use classification::{classify, convexity_via_marginals, is_member, GameClass};
pub use coalition::Coalition;
pub use constructions::{
    big_m_rebuild, choose_m, closure_construct, dual_big_m_rebuild, extend_equivalence_class,
    strictly_convex_companion, well_definedness_check, ClosureTarget, ConstructionError,
    DualRebuild, FillStrategy,
};
pub use equivalence::{
    finest_partition, is_equivalence_class, marginals_respect_class, players_equivalent,
    value_characterization, Partition,
};
pub use game::{Allocation, Game, GameError};
pub use rational::{parse_rational, rat, ratio, Rational};
pub use shapley::{
    check_emp_pair, check_etp, check_po, shapley, shapley_permutation_oracle, EmpPairCheck,
    ShapleyError, SolutionTable,
};
pub use young::{
    axiomatic_shapley, check_chain_hypotheses_finite, check_emp_closed_finite, derive_on_class,
    replay_trace, solve_axiom_system, AxiomSystemSolution, ClassSpec, DerivationStep,
    DerivationTrace, DeriveOptions, EmpClosedReport, HypothesesReport, StepKind, YoungError,
};
