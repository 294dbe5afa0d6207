//! Extended-value cost functions with the coercivity, growth and
//! contraction metadata the transport machinery needs.
//!
//! Three variants ship:
//!
//! * translation invariant, `c(x, y) = h(|x - y|)`;
//! * coordinate separable, `c(x, y) = h(sum_j h_j(|<x - y, e_j>|))`;
//! * Cameron-Martin, the weighted norm `(sum_j a_j^{-2}(x_j - y_j)^2)^{1/2}`
//!   when the declared tail classes of `x` and `y` agree and `+inf`
//!   otherwise.
//!
//! Infinite cost is a dedicated value ([`ExtCost::Infinite`]), never a large
//! sentinel float; solver code matches on it explicitly.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::measures::{DiscreteMeasure, SeqPoint};
use crate::projections::Projection;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("profile exponent must be positive, got {0}")]
    BadExponent(f64),
    #[error("profile cap must be positive, got {0}")]
    BadCap(f64),
    #[error("profile table must be nonempty, sorted by z >= 0, with finite values >= 0")]
    BadTable,
    #[error("Cameron-Martin weights must all be positive")]
    BadWeights,
    #[error("delta out of range")]
    DeltaOutOfRange,
    #[error("coercivity radius unavailable for this cost variant")]
    CoercivityUnavailable,
    #[error("growth envelope missing")]
    MissingEnvelope,
    #[error("scale factor must be positive, got {0}")]
    BadScale(f64),
}

/// Extended nonnegative real: a finite cost or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtCost<S: Scalar> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> ExtCost<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtCost::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtCost::Infinite)
    }

    /// Finite value, if any.
    pub fn finite(&self) -> Option<S> {
        match self {
            ExtCost::Finite(v) => Some(*v),
            ExtCost::Infinite => None,
        }
    }

    /// Collapse to the scalar type, mapping `Infinite` to IEEE infinity.
    pub fn to_scalar(&self) -> S {
        match self {
            ExtCost::Finite(v) => *v,
            ExtCost::Infinite => S::infinity(),
        }
    }
}

impl<S: Scalar> PartialOrd for ExtCost<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtCost::Infinite, ExtCost::Infinite) => Some(Ordering::Equal),
            (ExtCost::Infinite, ExtCost::Finite(_)) => Some(Ordering::Greater),
            (ExtCost::Finite(_), ExtCost::Infinite) => Some(Ordering::Less),
            (ExtCost::Finite(a), ExtCost::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<S: Scalar> fmt::Display for ExtCost<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(v) => write!(f, "{v}"),
            ExtCost::Infinite => write!(f, "inf"),
        }
    }
}

/// Scalar profile `h: [0, inf) -> [0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProfile<S: Scalar> {
    /// `h(z) = z^p`, strictly increasing, `sup h = +inf`.
    Power { exponent: S },
    /// `h(z) = cap * (1 - exp(-z))`, nondecreasing, `h(z) -> cap`.
    BoundedSaturating { cap: S },
    /// Piecewise-linear interpolation of `(z, h(z))` nodes, constant beyond
    /// the ends. Duplicate `z` encode jumps; evaluation at the jump takes
    /// the left value, which keeps the profile lower semicontinuous.
    Table { nodes: Vec<(S, S)> },
}

impl<S: Scalar> ScalarProfile<S> {
    pub fn power(exponent: S) -> Result<Self, CostError> {
        if !(exponent > S::zero()) || !exponent.is_finite() {
            return Err(CostError::BadExponent(
                exponent.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(ScalarProfile::Power { exponent })
    }

    pub fn bounded_saturating(cap: S) -> Result<Self, CostError> {
        if !(cap > S::zero()) || !cap.is_finite() {
            return Err(CostError::BadCap(cap.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(ScalarProfile::BoundedSaturating { cap })
    }

    pub fn table(nodes: Vec<(S, S)>) -> Result<Self, CostError> {
        if nodes.is_empty() {
            return Err(CostError::BadTable);
        }
        let mut prev_z = S::zero();
        for (i, &(z, h)) in nodes.iter().enumerate() {
            if !z.is_finite() || !h.is_finite() || z < S::zero() || h < S::zero() {
                return Err(CostError::BadTable);
            }
            if i > 0 && z < prev_z {
                return Err(CostError::BadTable);
            }
            prev_z = z;
        }
        Ok(ScalarProfile::Table { nodes })
    }

    /// Evaluate `h(z)` for `z >= 0`.
    pub fn value(&self, z: S) -> S {
        match self {
            ScalarProfile::Power { exponent } => z.powf(*exponent),
            ScalarProfile::BoundedSaturating { cap } => *cap * (S::one() - (-z).exp()),
            ScalarProfile::Table { nodes } => {
                let first = nodes[0];
                let last = nodes[nodes.len() - 1];
                if z <= first.0 {
                    return first.1;
                }
                if z >= last.0 {
                    return last.1;
                }
                // Left value at jumps: scan for the segment whose left node
                // is the last one with z_node <= z, breaking ties leftward.
                for w in nodes.windows(2) {
                    let (z0, h0) = w[0];
                    let (z1, h1) = w[1];
                    if z == z0 {
                        return h0;
                    }
                    if z > z0 && z < z1 {
                        let t = (z - z0) / (z1 - z0);
                        return h0 + t * (h1 - h0);
                    }
                }
                last.1
            }
        }
    }

    /// Supremum of `h` over `[0, inf)`.
    pub fn sup_value(&self) -> ExtCost<S> {
        match self {
            ScalarProfile::Power { .. } => ExtCost::Infinite,
            ScalarProfile::BoundedSaturating { cap } => ExtCost::Finite(*cap),
            ScalarProfile::Table { nodes } => {
                let mut m = S::zero();
                for &(_, h) in nodes {
                    if h > m {
                        m = h;
                    }
                }
                ExtCost::Finite(m)
            }
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            ScalarProfile::Power { .. } | ScalarProfile::BoundedSaturating { .. } => true,
            ScalarProfile::Table { nodes } => nodes.windows(2).all(|w| w[0].1 <= w[1].1),
        }
    }

    /// Smallest `z*` with `h(z) >= w` for every `z >= z*`, so that
    /// `h(z) < w` implies `z < z*`. Requires a monotone profile and
    /// `w < sup h`; returns `None` when no finite `z*` exists.
    pub fn threshold_radius(&self, w: S) -> Option<S> {
        if w <= S::zero() {
            return Some(S::zero());
        }
        match self {
            ScalarProfile::Power { exponent } => Some(w.powf(S::one() / *exponent)),
            ScalarProfile::BoundedSaturating { cap } => {
                if w >= *cap {
                    None
                } else {
                    Some(-(S::one() - w / *cap).ln())
                }
            }
            ScalarProfile::Table { nodes } => {
                if !self.is_monotone() {
                    return None;
                }
                let last = nodes[nodes.len() - 1];
                if w > last.1 {
                    return None;
                }
                if w <= nodes[0].1 {
                    return Some(nodes[0].0);
                }
                for win in nodes.windows(2) {
                    let (z0, h0) = win[0];
                    let (z1, h1) = win[1];
                    if w > h0 && w <= h1 {
                        if h1 == h0 {
                            return Some(z1);
                        }
                        let t = (w - h0) / (h1 - h0);
                        return Some(z0 + t * (z1 - z0));
                    }
                }
                Some(last.0)
            }
        }
    }
}

/// Nondecreasing envelope function on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthFn<S: Scalar> {
    Constant { value: S },
    /// `lambda -> max(1, coeff * lambda^exponent)`.
    PowerMax { coeff: S, exponent: S },
}

impl<S: Scalar> GrowthFn<S> {
    pub fn eval(&self, lambda: S) -> S {
        match self {
            GrowthFn::Constant { value } => *value,
            GrowthFn::PowerMax { coeff, exponent } => {
                let v = *coeff * lambda.powf(*exponent);
                if v > S::one() {
                    v
                } else {
                    S::one()
                }
            }
        }
    }
}

/// Pair `(f, g)` controlling `c(lambda x, y) <= f(lambda) c(x, y)` and
/// `c(x, lambda y) <= g(lambda) c(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEnvelope<S: Scalar> {
    pub f: GrowthFn<S>,
    pub g: GrowthFn<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind<S: Scalar> {
    TranslationInvariant { profile: ScalarProfile<S> },
    CoordinateSeparable {
        outer: ScalarProfile<S>,
        inner: Vec<ScalarProfile<S>>,
    },
    CameronMartin { weights: Vec<S> },
}

/// Cost function family over the sequence model.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec<S: Scalar> {
    kind: CostKind<S>,
    growth_envelope: Option<GrowthEnvelope<S>>,
}

impl<S: Scalar> CostSpec<S> {
    pub fn translation_invariant(profile: ScalarProfile<S>) -> Self {
        Self {
            kind: CostKind::TranslationInvariant { profile },
            growth_envelope: None,
        }
    }

    /// Squared-distance cost `|x - y|^2`.
    pub fn quadratic() -> Self {
        Self::translation_invariant(
            ScalarProfile::power(S::from_f64_lossy(2.0)).expect("2 > 0"),
        )
    }

    pub fn coordinate_separable(
        outer: ScalarProfile<S>,
        inner: Vec<ScalarProfile<S>>,
    ) -> Self {
        Self {
            kind: CostKind::CoordinateSeparable { outer, inner },
            growth_envelope: None,
        }
    }

    pub fn cameron_martin(weights: Vec<S>) -> Result<Self, CostError> {
        if weights.is_empty() || weights.iter().any(|&a| !(a > S::zero()) || !a.is_finite()) {
            return Err(CostError::BadWeights);
        }
        Ok(Self {
            kind: CostKind::CameronMartin { weights },
            growth_envelope: None,
        })
    }

    pub fn with_growth_envelope(mut self, envelope: GrowthEnvelope<S>) -> Self {
        self.growth_envelope = Some(envelope);
        self
    }

    pub fn kind(&self) -> &CostKind<S> {
        &self.kind
    }

    pub fn growth_envelope(&self) -> Option<&GrowthEnvelope<S>> {
        self.growth_envelope.as_ref()
    }

    /// Ambient dimension the spec pins, if any.
    pub fn expected_dim(&self) -> Option<usize> {
        match &self.kind {
            CostKind::TranslationInvariant { .. } => None,
            CostKind::CoordinateSeparable { inner, .. } => Some(inner.len()),
            CostKind::CameronMartin { weights } => Some(weights.len()),
        }
    }

    fn check_dims(&self, x: &SeqPoint<S>, y: &SeqPoint<S>) -> Result<(), CostError> {
        if x.dim() != y.dim() {
            return Err(CostError::DimensionMismatch(x.dim(), y.dim()));
        }
        if let Some(d) = self.expected_dim() {
            if x.dim() != d {
                return Err(CostError::DimensionMismatch(d, x.dim()));
            }
        }
        Ok(())
    }

    /// Evaluate the cost at a pair of points.
    pub fn evaluate(&self, x: &SeqPoint<S>, y: &SeqPoint<S>) -> Result<ExtCost<S>, CostError> {
        self.check_dims(x, y)?;
        Ok(match &self.kind {
            CostKind::TranslationInvariant { profile } => {
                let diff = x.sub_coords(y);
                let norm = diff
                    .iter()
                    .map(|&d| d * d)
                    .fold(S::zero(), |a, b| a + b)
                    .sqrt();
                ExtCost::Finite(profile.value(norm))
            }
            CostKind::CoordinateSeparable { outer, inner } => {
                let diff = x.sub_coords(y);
                let total = diff
                    .iter()
                    .zip(inner)
                    .map(|(&d, h)| h.value(d.abs()))
                    .fold(S::zero(), |a, b| a + b);
                ExtCost::Finite(outer.value(total))
            }
            CostKind::CameronMartin { weights } => {
                if x.tail_class() != y.tail_class() {
                    ExtCost::Infinite
                } else {
                    let sq = x
                        .sub_coords(y)
                        .iter()
                        .zip(weights)
                        .map(|(&d, &a)| (d / a) * (d / a))
                        .fold(S::zero(), |a, b| a + b);
                    ExtCost::Finite(sq.sqrt())
                }
            }
        })
    }

    /// Supremum of `c` over all point pairs (translation invariant and
    /// separable variants attain the profile supremum; Cameron-Martin is
    /// unbounded through the `+inf` branch).
    pub fn global_sup(&self) -> ExtCost<S> {
        match &self.kind {
            CostKind::TranslationInvariant { profile } => profile.sup_value(),
            CostKind::CoordinateSeparable { outer, .. } => outer.sup_value(),
            CostKind::CameronMartin { .. } => ExtCost::Infinite,
        }
    }
}

/// Dense cost matrix over the supports of two measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<S: Scalar> {
    entries: Vec<ExtCost<S>>,
    rows: usize,
    cols: usize,
}

impl<S: Scalar> CostMatrix<S> {
    pub fn from_entries(entries: Vec<ExtCost<S>>, rows: usize, cols: usize) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        Self {
            entries,
            rows,
            cols,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> ExtCost<S> {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[ExtCost<S>] {
        &self.entries
    }

    /// Largest finite entry, `None` when every entry is infinite.
    pub fn max_finite(&self) -> Option<S> {
        self.entries
            .iter()
            .filter_map(|e| e.finite())
            .fold(None, |acc, v| match acc {
                None => Some(v),
                Some(a) => Some(if v > a { v } else { a }),
            })
    }

    /// Supremum over all entries, infinite entries included.
    pub fn sup(&self) -> ExtCost<S> {
        if self.entries.iter().any(|e| e.is_infinite()) {
            ExtCost::Infinite
        } else {
            ExtCost::Finite(self.max_finite().unwrap_or_else(S::zero))
        }
    }

    pub fn has_infinite(&self) -> bool {
        self.entries.iter().any(|e| e.is_infinite())
    }
}

/// Assemble the cost matrix `C_ij = c(x_i, y_j)` on the supports.
pub fn cost_matrix<S: Scalar>(
    c: &CostSpec<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
) -> Result<CostMatrix<S>, CostError> {
    let rows = mu.len();
    let cols = nu.len();
    let mut entries = Vec::with_capacity(rows * cols);
    for x in mu.points() {
        for y in nu.points() {
            entries.push(c.evaluate(x, y)?);
        }
    }
    Ok(CostMatrix::from_entries(entries, rows, cols))
}

/// Result of a coercivity-radius query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoercivityOutcome<S: Scalar> {
    /// `|x| < R` and `c(x, y) < min(sup_eta c(x, eta) - delta, M)` imply
    /// `|y| < R'`.
    Radius(S),
    /// The `+inf` structure of the variant admits no finite radius.
    Unbounded,
}

/// Local coercivity radius: bounded `x` and sub-maximal cost force `y` into
/// a bounded set. For translation-invariant monotone profiles the radius is
/// analytic: `R' = R + z*` where `z*` is the profile threshold radius at
/// `min(sup h - delta, M)`.
pub fn coercivity_radius<S: Scalar>(
    c: &CostSpec<S>,
    r: S,
    delta: S,
    m: S,
) -> Result<CoercivityOutcome<S>, CostError> {
    if !(delta > S::zero()) || !(m > S::zero()) {
        return Err(CostError::DeltaOutOfRange);
    }
    match c.kind() {
        CostKind::TranslationInvariant { profile } => {
            if !profile.is_monotone() {
                return Err(CostError::CoercivityUnavailable);
            }
            // sup_y c(x, y) = sup h for every x, so the precondition
            // delta < inf_{|x|<R} sup_y c(x, y) reads delta < sup h.
            let w = match profile.sup_value() {
                ExtCost::Infinite => m,
                ExtCost::Finite(s) => {
                    if delta >= s {
                        return Err(CostError::DeltaOutOfRange);
                    }
                    let capped = s - delta;
                    if m < capped {
                        m
                    } else {
                        capped
                    }
                }
            };
            match profile.threshold_radius(w) {
                Some(z) => Ok(CoercivityOutcome::Radius(r + z)),
                None => Ok(CoercivityOutcome::Unbounded),
            }
        }
        CostKind::CoordinateSeparable { .. } => Err(CostError::CoercivityUnavailable),
        CostKind::CameronMartin { .. } => Ok(CoercivityOutcome::Unbounded),
    }
}

fn scale_point<S: Scalar>(p: &SeqPoint<S>, lambda: S) -> SeqPoint<S> {
    SeqPoint::with_tail_class(
        p.coords().iter().map(|&c| lambda * c).collect(),
        p.tail_class(),
    )
}

/// Largest violation of the growth envelope over the samples: the positive
/// part of `c(lambda x, y) - f(lambda) c(x, y)` and of the symmetric term.
/// Zero means no violation was found.
pub fn check_growth_envelope<S: Scalar>(
    c: &CostSpec<S>,
    samples: &[(SeqPoint<S>, SeqPoint<S>, S)],
) -> Result<S, CostError> {
    let envelope = c.growth_envelope().ok_or(CostError::MissingEnvelope)?;
    let mut worst = S::zero();
    for (x, y, lambda) in samples {
        if !(*lambda > S::zero()) {
            return Err(CostError::BadScale(lambda.to_f64().unwrap_or(f64::NAN)));
        }
        let base = c.evaluate(x, y)?;
        let scaled_x = c.evaluate(&scale_point(x, *lambda), y)?;
        let scaled_y = c.evaluate(x, &scale_point(y, *lambda))?;
        for (lhs, bound_fn) in [(scaled_x, &envelope.f), (scaled_y, &envelope.g)] {
            let viol = match (lhs, base) {
                // An infinite base makes the envelope bound trivially hold.
                (_, ExtCost::Infinite) => S::zero(),
                (ExtCost::Infinite, ExtCost::Finite(_)) => S::infinity(),
                (ExtCost::Finite(l), ExtCost::Finite(b)) => {
                    let excess = l - bound_fn.eval(*lambda) * b;
                    if excess > S::zero() {
                        excess
                    } else {
                        S::zero()
                    }
                }
            };
            if viol > worst {
                worst = viol;
            }
        }
    }
    Ok(worst)
}

/// Largest value of `c(P x, Q y) - c(x, y)` over the samples; a result
/// `<= 0` certifies the sampled contraction hypothesis. Pairs with
/// `c(x, y) = +inf` are satisfied by definition and skipped.
pub fn check_projection_contraction<S: Scalar>(
    c: &CostSpec<S>,
    p: &Projection<S>,
    q: &Projection<S>,
    samples: &[(SeqPoint<S>, SeqPoint<S>)],
) -> Result<S, CostError> {
    let mut worst = S::zero();
    for (x, y) in samples {
        let base = match c.evaluate(x, y)? {
            ExtCost::Infinite => continue,
            ExtCost::Finite(b) => b,
        };
        let px = p
            .apply(x)
            .map_err(|_| CostError::DimensionMismatch(p.ambient_dim(), x.dim()))?;
        let qy = q
            .apply(y)
            .map_err(|_| CostError::DimensionMismatch(q.ambient_dim(), y.dim()))?;
        let diff = match c.evaluate(&px, &qy)? {
            ExtCost::Infinite => S::infinity(),
            ExtCost::Finite(v) => v - base,
        };
        if diff > worst {
            worst = diff;
        }
    }
    Ok(worst)
}
