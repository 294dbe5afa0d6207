//! Tolerances used across the crate, pinned in one place.

/// Weight normalization: measure weights must sum to 1 within this bound.
pub const WEIGHT_SUM: f64 = 1e-12;

/// Transport plan marginals must reproduce the input weights within this bound.
pub const MARGINAL: f64 = 1e-9;

/// Dual feasibility slack accepted on `phi_i + psi_j <= c_ij`.
pub const DUAL_FEASIBILITY: f64 = 1e-9;

/// Relative duality gap at a reported optimum: `|gap| <= GAP_REL * (1 + primal)`.
pub const GAP_REL: f64 = 1e-9;

/// Membership bounds of the normalized dual classes are checked at this
/// absolute tolerance.
pub const MEMBERSHIP: f64 = 1e-12;

/// Atom collision tolerance when merging pushforward images.
pub const ATOM_MERGE: f64 = 1e-12;

/// Quadrature mass of a mollifier kernel must equal 1 within this bound.
pub const MOLLIFIER_MASS: f64 = 1e-6;

/// Feasibility of a smoothed grid pair on the verification grid.
pub const SMOOTH_FEASIBILITY: f64 = 1e-9;

/// Cost symmetry `c(x, y) = c(y, x)` for the shipped variants.
pub const COST_SYMMETRY: f64 = 1e-12;

/// Projections must be idempotent within this bound.
pub const PROJECTION_IDEMPOTENT: f64 = 1e-12;

/// Reduced-cost threshold for simplex pivoting; anything closer to zero is
/// treated as already optimal.
pub const PIVOT: f64 = 1e-13;

/// Residual capacity below this value is treated as exhausted in max-flow.
pub const FLOW_RESIDUAL: f64 = 1e-15;
