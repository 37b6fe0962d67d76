//! Holmes–Thompson volumes of balls in the Funk geometry of convex polytopes.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds polytopes, their face lattices and flags, flip maps,
//!   polars at arbitrary interior points and projective images.
//! * [`funk`] evaluates the Funk distance, forward balls, the Holmes–Thompson
//!   density `|P^y|` and ball volumes through the flag-pair decomposition.
//! * [`asymptotics`] gives the exact coefficients `c0`, `c1` of the large
//!   radius expansion and a least-squares extraction from computed volumes.
//! * [`santalo`] locates Funk–Santaló points for finite and infinite radius.
//! * [`families`] holds closed-form references: Hanner polytopes, the simplex
//!   recursion and the planar toolkit.
//! * [`cli`] is the command-line front end used by the `funkvol` binary.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod families;
pub mod funk;
pub mod geometry;
pub mod ode;
pub mod quadrature;
pub mod santalo;

mod bitset;
mod linalg;

pub use error::{Error, Result};
pub use geometry::{Face, FaceId, Facet, Flag, FlagDecomposition, Polytope};
pub use funk::VolumeEstimate;
pub use asymptotics::AsymptoticCoeffs;
pub use santalo::SantaloResult;

/// Volume of the Euclidean unit ball in dimension `n`, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn omega(n: usize) -> f64 {
    // Gamma at half-integers via the two-step recursion avoids a special-function dependency.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => omega(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Converts an `omega_n`-scaled volume (the quantity the asymptotic
/// expansions and the simplex recursion are written in) to a Holmes–Thompson
/// volume. Every such conversion goes through this pair of functions.
pub fn scaled_to_ht(scaled: f64, n: usize) -> f64 {
    scaled / omega(n)
}

/// Inverse of [`scaled_to_ht`].
pub fn ht_to_scaled(ht: f64, n: usize) -> f64 {
    ht * omega(n)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
