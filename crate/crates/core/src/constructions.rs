//! Game constructions that grow an equivalence class by one player while
//! preserving that player's marginal contribution function.
//!
//! The central builder takes a game v, an equivalence class S in v, and a
//! player k ∉ S, and produces w with
//!
//! - w′_k = v′_k (k's marginals are untouched), and
//! - S ∪ {k} an equivalence class in w.
//!
//! Coalitions disjoint from S ∪ {k} are free; a [`FillStrategy`] supplies
//! their values, and picking the fill carefully keeps w inside a chosen
//! game class ([`closure_construct`]). For classes that cannot be handled
//! that way directly, [`big_m_rebuild`]/[`strictly_convex_companion`] rebuild the whole game
//! around an exponential big-M skeleton, and [`dual_big_m_rebuild`] runs that
//! machinery through the dual for the subadditive-side classes.
//!
//! Every constructor re-verifies its postconditions with the
//! classification and equivalence predicates before returning; an invalid
//! game is never handed back silently.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classification::{is_member, GameClass};
use crate::coalition::Coalition;
use crate::equivalence::is_equivalence_class;
use crate::game::Game;
use crate::rational::{rat, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("coalition {0} is not an equivalence class in the input game")]
    NotAnEquivalenceClass(String),
    #[error("player {0} belongs to the coalition being extended")]
    PlayerInClass(usize),
    #[error("input game is not {0}")]
    InputNotInClass(GameClass),
    #[error("class {0} is outside the scope of this construction")]
    UnsupportedClass(GameClass),
    #[error("constructed game failed verification: {0}")]
    PostconditionFailed(String),
    #[error("exponential fill requires a positive scale")]
    BadFill,
}

/// Rule supplying values for the free coalitions (those disjoint from
/// S ∪ {k}) of an extension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FillStrategy {
    /// Free coalitions get 0.
    ZeroFill,
    /// Free coalitions keep their value from the source game.
    CopyFromSource,
    /// Free coalitions get c*·|T|.
    AdditiveFill(Rational),
    /// Free coalitions get scale·3^|T|. `big_m` records the bound the
    /// scale was derived from (scale = M·n in the strictly convex closure).
    ExponentialFill { big_m: Rational, scale: Rational },
}

impl FillStrategy {
    fn value(&self, source: &Game, t: Coalition) -> Rational {
        match self {
            FillStrategy::ZeroFill => Rational::zero(),
            FillStrategy::CopyFromSource => source.value(t),
            FillStrategy::AdditiveFill(c) => c * rat(t.size() as i64),
            FillStrategy::ExponentialFill { scale, .. } => scale * pow3(t.size()),
        }
    }

    fn validate(&self) -> Result<(), ConstructionError> {
        if let FillStrategy::ExponentialFill { scale, .. } = self {
            if *scale <= Rational::zero() {
                return Err(ConstructionError::BadFill);
            }
        }
        Ok(())
    }
}

/// The classes with a dedicated closure construction.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum ClosureTarget {
    Unrestricted,
    Additive,
    StrictlyConvex,
    StrictlyConcave,
}

impl ClosureTarget {
    pub fn name(&self) -> &'static str {
        match self {
            ClosureTarget::Unrestricted => "unrestricted",
            ClosureTarget::Additive => "additive",
            ClosureTarget::StrictlyConvex => "strictly-convex",
            ClosureTarget::StrictlyConcave => "strictly-concave",
        }
    }
}

fn pow3(e: usize) -> Rational {
    let mut acc = num_bigint::BigInt::from(1);
    for _ in 0..e {
        acc *= 3;
    }
    Rational::from_integer(acc)
}

/// The canonical strict upper bound max_{T ⊂ N} |v′_k(T)| + 1. Marginals
/// over coalitions containing k vanish, so only T ⊆ N∖{k} contribute.
pub fn choose_m(v: &Game, k: usize) -> Rational {
    let mut best = Rational::zero();
    for t in Coalition::singleton(v.n(), k).complement().subsets() {
        let m = v.marginal(k, t);
        let m = if m < Rational::zero() { -m } else { m };
        if m > best {
            best = m;
        }
    }
    best + rat(1)
}

fn check_extension_preconditions(
    v: &Game,
    s: Coalition,
    k: usize,
) -> Result<(), ConstructionError> {
    assert_eq!(s.n(), v.n(), "coalition context does not match game");
    assert!(k >= 1 && k <= v.n(), "player {k} out of 1..={}", v.n());
    if s.contains(k) {
        return Err(ConstructionError::PlayerInClass(k));
    }
    if !is_equivalence_class(v, s) {
        return Err(ConstructionError::NotAnEquivalenceClass(s.to_string()));
    }
    Ok(())
}

/// Evaluates the extension table for one ordering rule of S ∩ T. The value
/// on a coalition T meeting S ∪ {k} is
///
///   w(T) = fill(T ∖ (S∪{k})) + Σ_{i=1}^{m} v′_k((T∖(S∪{k})) ∪ {l₁,…,l_{i−1}})
///
/// with m = |(S∪{k}) ∩ T| and the lᵢ drawn from S ∩ T in the order given
/// by `arrange` (only the first m−1 are ever used).
fn extension_table(
    v: &Game,
    s: Coalition,
    k: usize,
    fill: &FillStrategy,
    arrange: &mut dyn FnMut(Coalition) -> Vec<usize>,
) -> Game {
    let n = v.n();
    let sk = s.with(k);
    Game::from_fn(n, |t| {
        let inside = t.intersection(&sk);
        if inside.is_empty() {
            return fill.value(v, t);
        }
        let free = t.difference(&sk);
        let m = inside.size();
        let order = arrange(t.intersection(&s));
        let mut acc = if free.is_empty() {
            Rational::zero()
        } else {
            fill.value(v, free)
        };
        let mut prefix = free;
        for &next in order.iter().take(m - 1) {
            acc += v.marginal(k, prefix);
            prefix = prefix.with(next);
        }
        acc + v.marginal(k, prefix)
    })
}

fn ascending(c: Coalition) -> Vec<usize> {
    c.players().collect()
}

fn verify_extension(v: &Game, s: Coalition, k: usize, w: &Game) -> Result<(), ConstructionError> {
    if !w.same_marginals(v, k) {
        return Err(ConstructionError::PostconditionFailed(format!(
            "marginal contribution function of player {k} was not preserved"
        )));
    }
    let sk = s.with(k);
    if !is_equivalence_class(w, sk) {
        return Err(ConstructionError::PostconditionFailed(format!(
            "{sk} is not an equivalence class in the result"
        )));
    }
    Ok(())
}

/// Grows the equivalence class S of v by player k, preserving v′_k. Free
/// coalitions are filled by `fill`; members of S ∩ T are consumed in
/// ascending player order (the result provably does not depend on that
/// order; see [`well_definedness_check`]).
pub fn extend_equivalence_class(
    v: &Game,
    s: Coalition,
    k: usize,
    fill: &FillStrategy,
) -> Result<Game, ConstructionError> {
    check_extension_preconditions(v, s, k)?;
    fill.validate()?;
    let w = extension_table(v, s, k, fill, &mut ascending);
    verify_extension(v, s, k, &w)?;
    Ok(w)
}

/// Recomputes the extension sums under `tries` random permutations of
/// S ∩ T per coalition and confirms the table never changes. This is the
/// marginal corollary of the value characterization exercised
/// computationally.
pub fn well_definedness_check(
    v: &Game,
    s: Coalition,
    k: usize,
    tries: usize,
    seed: u64,
) -> Result<bool, ConstructionError> {
    check_extension_preconditions(v, s, k)?;
    let fill = FillStrategy::ZeroFill;
    let reference = extension_table(v, s, k, &fill, &mut ascending);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..tries {
        let shuffled = extension_table(v, s, k, &fill, &mut |c| {
            let mut order: Vec<usize> = c.players().collect();
            order.shuffle(&mut rng);
            order
        });
        if shuffled != reference {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extends the class while staying inside the target class of games.
///
/// - `Unrestricted` is the plain extension with zero fill;
/// - `Additive` rebuilds w(T) = c*·|T| outright with c* = v′_k(∅);
/// - `StrictlyConvex` fills free coalitions with M·n·3^|T| for
///   M = [`choose_m`]`(v, k)`;
/// - `StrictlyConcave` dualizes, runs the strictly convex route, and
///   dualizes back.
pub fn closure_construct(
    v: &Game,
    s: Coalition,
    k: usize,
    target: ClosureTarget,
) -> Result<Game, ConstructionError> {
    check_extension_preconditions(v, s, k)?;
    let w = match target {
        ClosureTarget::Unrestricted => {
            extension_table(v, s, k, &FillStrategy::ZeroFill, &mut ascending)
        }
        ClosureTarget::Additive => {
            if !is_member(v, GameClass::Additive) {
                return Err(ConstructionError::InputNotInClass(GameClass::Additive));
            }
            let c = v.marginal(k, Coalition::empty(v.n()));
            Game::from_fn(v.n(), |t| &c * rat(t.size() as i64))
        }
        ClosureTarget::StrictlyConvex => {
            if !is_member(v, GameClass::StrictlyConvex) {
                return Err(ConstructionError::InputNotInClass(
                    GameClass::StrictlyConvex,
                ));
            }
            let big_m = choose_m(v, k);
            let scale = &big_m * rat(v.n() as i64);
            let fill = FillStrategy::ExponentialFill { big_m, scale };
            extension_table(v, s, k, &fill, &mut ascending)
        }
        ClosureTarget::StrictlyConcave => {
            if !is_member(v, GameClass::StrictlyConcave) {
                return Err(ConstructionError::InputNotInClass(
                    GameClass::StrictlyConcave,
                ));
            }
            // the dual is strictly convex and S stays an equivalence class
            let convex = closure_construct(&v.dual(), s, k, ClosureTarget::StrictlyConvex)?;
            convex.dual()
        }
    };
    verify_extension(v, s, k, &w)?;
    if let Some(class) = target_class(target) {
        if !is_member(&w, class) {
            return Err(ConstructionError::PostconditionFailed(format!(
                "result left the {class} class"
            )));
        }
    }
    Ok(w)
}

fn target_class(target: ClosureTarget) -> Option<GameClass> {
    match target {
        ClosureTarget::Unrestricted => None,
        ClosureTarget::Additive => Some(GameClass::Additive),
        ClosureTarget::StrictlyConvex => Some(GameClass::StrictlyConvex),
        ClosureTarget::StrictlyConcave => Some(GameClass::StrictlyConcave),
    }
}

/// The classes preserved by [`big_m_rebuild`].
pub const BIG_M_CLASSES: [GameClass; 8] = [
    GameClass::Essential,
    GameClass::Convex,
    GameClass::Superadditive,
    GameClass::StrictlySuperadditive,
    GameClass::WeaklySuperadditive,
    GameClass::StrictlyWeaklySuperadditive,
    GameClass::Monotonic,
    GameClass::StrictlyMonotonic,
];

/// The classes routed through the dual by [`dual_big_m_rebuild`].
pub const DUAL_ROUTE_CLASSES: [GameClass; 5] = [
    GameClass::WeaklySubadditive,
    GameClass::StrictlyWeaklySubadditive,
    GameClass::Subadditive,
    GameClass::StrictlySubadditive,
    GameClass::Concave,
];

/// The raw big-M rebuild around player k:
///
///   w(T) = 2·M·n·3^|T|            for k ∉ T, T ≠ ∅,
///   w(T) = w(T∖{k}) + v′_k(T∖{k}) for k ∈ T,
///
/// with M = [`choose_m`]`(v, k)`. Preserves v′_k and makes every other
/// player's marginal function strictly increasing, whatever v is.
fn big_m_extension(v: &Game, k: usize) -> Game {
    let n = v.n();
    let scale = choose_m(v, k) * rat(2 * n as i64);
    Game::from_fn(n, |t| {
        if t.contains(k) {
            let rest = t.without(k);
            let base = if rest.is_empty() {
                Rational::zero()
            } else {
                &scale * pow3(rest.size())
            };
            base + v.marginal(k, rest)
        } else {
            &scale * pow3(t.size())
        }
    })
}

fn verify_marginals(v: &Game, w: &Game, k: usize, what: &str) -> Result<(), ConstructionError> {
    if !w.same_marginals(v, k) {
        return Err(ConstructionError::PostconditionFailed(format!(
            "{what} did not preserve the marginal contribution function of player {k}"
        )));
    }
    Ok(())
}

fn verify_class(w: &Game, class: GameClass, what: &str) -> Result<(), ConstructionError> {
    if !is_member(w, class) {
        return Err(ConstructionError::PostconditionFailed(format!(
            "{what} left the {class} class"
        )));
    }
    Ok(())
}

/// Rebuilds a member v of one of the [`BIG_M_CLASSES`] around player k:
/// the result stays in the class and keeps v′_k. Every other player's
/// marginal function strictly increases except across the k-direction,
/// where the increments are pinned to v′_k's own increments; only when
/// those are strict as well does [`strictly_convex_companion`] apply to
/// the result.
pub fn big_m_rebuild(v: &Game, k: usize, class: GameClass) -> Result<Game, ConstructionError> {
    assert!(k >= 1 && k <= v.n(), "player {k} out of 1..={}", v.n());
    if !BIG_M_CLASSES.contains(&class) {
        return Err(ConstructionError::UnsupportedClass(class));
    }
    if !is_member(v, class) {
        return Err(ConstructionError::InputNotInClass(class));
    }
    let w = big_m_extension(v, k);
    verify_marginals(v, &w, k, "big-M rebuild")?;
    verify_class(&w, class, "big-M rebuild")?;
    Ok(w)
}

/// Applies the big-M rebuild to (w, i) and verifies the result is strictly
/// convex with w′ᵢ preserved. Valid whenever w′ᵢ is strictly increasing,
/// in particular for any w produced by [`big_m_rebuild`] with k ≠ i.
pub fn strictly_convex_companion(w: &Game, i: usize) -> Result<Game, ConstructionError> {
    assert!(i >= 1 && i <= w.n(), "player {i} out of 1..={}", w.n());
    let z = big_m_extension(w, i);
    verify_marginals(w, &z, i, "strictly convex rebuild")?;
    verify_class(&z, GameClass::StrictlyConvex, "strictly convex rebuild")?;
    Ok(z)
}

/// The dual route for the subadditive-side classes: dualize v, run the
/// big-M rebuild there, and dualize the results back. The intermediate
/// dual games are deliberately not class-checked — the dual of a
/// subadditive game need not be superadditive — only the final outputs
/// are verified.
pub struct DualRebuild {
    /// The rebuilt game: same class as the input, w′_k = v′_k.
    pub w: Game,
    /// dual(w): the big-M rebuild living on the dual side; companion
    /// games are derived from it.
    dual_core: Game,
}

impl DualRebuild {
    /// The strictly concave companion for player i, with its i-marginals
    /// equal to w's.
    pub fn companion(&self, i: usize) -> Result<Game, ConstructionError> {
        assert!(i >= 1 && i <= self.w.n(), "player {i} out of range");
        let z = big_m_extension(&self.dual_core, i).dual();
        verify_marginals(&self.w, &z, i, "strictly concave rebuild")?;
        verify_class(&z, GameClass::StrictlyConcave, "strictly concave rebuild")?;
        Ok(z)
    }
}

pub fn dual_big_m_rebuild(
    v: &Game,
    k: usize,
    class: GameClass,
) -> Result<DualRebuild, ConstructionError> {
    assert!(k >= 1 && k <= v.n(), "player {k} out of 1..={}", v.n());
    if !DUAL_ROUTE_CLASSES.contains(&class) {
        return Err(ConstructionError::UnsupportedClass(class));
    }
    if !is_member(v, class) {
        return Err(ConstructionError::InputNotInClass(class));
    }
    let dual_core = big_m_extension(&v.dual(), k);
    let w = dual_core.dual();
    verify_marginals(v, &w, k, "dual big-M rebuild")?;
    verify_class(&w, class, "dual big-M rebuild")?;
    Ok(DualRebuild { w, dual_core })
}

/// The superadditive-side mirror of a subadditive-side class.
pub fn mirrored_class(class: GameClass) -> Option<GameClass> {
    match class {
        GameClass::WeaklySubadditive => Some(GameClass::WeaklySuperadditive),
        GameClass::StrictlyWeaklySubadditive => Some(GameClass::StrictlyWeaklySuperadditive),
        GameClass::Subadditive => Some(GameClass::Superadditive),
        GameClass::StrictlySubadditive => Some(GameClass::StrictlySuperadditive),
        GameClass::Concave => Some(GameClass::Convex),
        _ => None,
    }
}
