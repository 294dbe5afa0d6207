//! # cylot
//!
//! Discrete optimal transport on a truncated sequence model of a separable
//! Hilbert space: exact and entropic solvers with dual potentials, the
//! c-transform algebra, mollified smooth feasible pairs, and finite-rank
//! projection experiments with monotone-convergence checks.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`measures`] | finitely supported measures, Gaussian sampling, moments |
//! | [`costs`] | extended-value cost families, coercivity, growth envelopes |
//! | [`projections`] | coordinate truncations and measure pushforwards |
//! | [`solver`] | network simplex, log-domain Sinkhorn, duality gap, feasibility |
//! | [`potentials`] | c-transform, dual-pair normalization, mollification, smoothing |
//! | [`experiments`] | config ingestion, convergence/oracle/Wiener runs, report emission |
//!
//! Core math is generic over the scalar type through [`scalar::Scalar`]
//! (`f32` or `f64`); the [`Real`] alias fixes `f64` for the CLI and the
//! experiment harness.

pub mod costs;
pub mod experiments;
pub mod measures;
pub mod potentials;
pub mod projections;
pub mod scalar;
pub mod solver;
pub mod tol;

/// Default scalar for the experiment harness and CLI.
pub type Real = f64;

/// Sequence-space point at the default scalar.
pub type Point = measures::SeqPoint<Real>;
/// Finitely supported measure at the default scalar.
pub type Measure = measures::DiscreteMeasure<Real>;
/// Cost specification at the default scalar.
pub type Cost = costs::CostSpec<Real>;
/// Coordinate projection at the default scalar.
pub type Proj = projections::Projection<Real>;
