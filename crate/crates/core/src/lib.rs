//! Solver library for the RDC document-ranking problem: rank documents
//! so the total user satisfying time is small.
//!
//! The pipeline: build the time-indexed LP relaxation strengthened with
//! knapsack-cover rows ([`relaxation`]), round the fractional optimum
//! with doubling rounds backed by a certified set-cover oracle
//! ([`rounding`] and [`setcover`]), and compare against brute-force and
//! heuristic baselines ([`baselines`]). The RGC (groups of intent sets)
//! and RXOS (max-of-additive valuations) generalizations live in
//! [`extensions`].
//!
//! Numeric code is generic over the [`scalar::Scalar`] type; the
//! crate-level aliases fix it to `f64`.

pub mod baselines;
pub mod extensions;
pub mod fixtures;
pub mod lp;
pub mod model;
pub mod relaxation;
pub mod rounding;
pub mod scalar;
pub mod setcover;

pub use model::{DocIdx, Instance, Ranking, TopicIdx, TopicSet, UserIdx};
pub use scalar::{DefaultScalar, Scalar};

/// Fractional relaxation solution at the default scalar.
pub type FractionalSolution = relaxation::FractionalSolution<DefaultScalar>;
/// Set-cover result at the default scalar.
pub type CoverResult = setcover::CoverResult<DefaultScalar>;
/// LP solution at the default scalar.
pub type LpSolution = lp::LpSolution<DefaultScalar>;
