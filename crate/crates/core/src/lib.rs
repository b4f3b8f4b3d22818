//! Deterministic lattice-gas toolkit for the discrete-time facilitated TASEP
//! (a particle jumps right iff its left neighbor is occupied and its right
//! neighbor empty, all jumps in parallel) and the companion totally
//! asymmetric stack model.
//!
//! The crate provides:
//! * bit-packed configurations and integer height profiles ([`lattice`]),
//! * the parallel update rules and fixation drivers ([`dynamics`]),
//! * the stack/particle substitution maps ([`correspondence`]),
//! * landmark sets and closed-form final states for the three density
//!   regimes ([`fixation`]),
//! * renewal/pair-correlation/variance/displacement statistics and an exact
//!   formal-power-series toolkit ([`stats`]),
//! * the hidden-Markov kernels of the intermediate regime ([`markov`]),
//! * the semi-infinite system with a wall ([`semiinf`]).
//!
//! Numeric code is generic over [`scalar::Scalar`], instantiated as `f64`
//! for Monte Carlo work and as exact big rationals for identities; see the
//! [`Real`] and [`Exact`] aliases.
//!
//! All randomness flows through seeded ChaCha8 generators, so every result
//! is reproducible bit-for-bit from its seed.

pub mod correspondence;
pub mod dynamics;
pub mod fixation;
pub mod lattice;
pub mod markov;
pub mod scalar;
pub mod semiinf;
pub mod stats;

/// Floating-point scalar used by Monte Carlo estimators.
pub type Real = f64;

/// Exact rational scalar used when identities are checked exactly.
pub type Exact = num_rational::BigRational;

/// Formal power series with exact rational coefficients.
pub type ExactSeries = stats::series::PowerSeries<Exact>;

/// Formal power series with floating-point coefficients.
pub type RealSeries = stats::series::PowerSeries<Real>;

use rand_chacha::ChaCha8Rng;

/// The one seedable generator used everywhere in this crate.
///
/// ChaCha8 is portable: the same seed yields the same stream on every
/// platform, which keeps every sampled artifact reproducible.
pub type Rng = ChaCha8Rng;

/// Build the crate RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
