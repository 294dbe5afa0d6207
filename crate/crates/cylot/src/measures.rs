//! Finitely supported probability measures over a truncated sequence model.
//!
//! Points are coordinate vectors with respect to a fixed orthonormal basis,
//! truncated at an ambient dimension `D` chosen per experiment. Every point
//! carries a symbolic tail class so that extended-value costs can
//! distinguish points whose difference leaves the Cameron-Martin space;
//! class 0 is the default for ordinary Hilbert-space work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("empty support")]
    EmptySupport,
    #[error("negative weight at atom {0}")]
    NegativeWeight(usize),
    #[error("weights have zero total mass")]
    ZeroMass,
    #[error("points and weights have different lengths: {points} vs {weights}")]
    LengthMismatch { points: usize, weights: usize },
    #[error("mismatched ambient dimensions: expected {expected}, got {got} at atom {atom}")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        atom: usize,
    },
    #[error("non-finite coordinate at atom {0}")]
    NonFiniteCoordinate(usize),
    #[error("non-finite weight at atom {0}")]
    NonFiniteWeight(usize),
    #[error("eigenvalue list length {got} does not match ambient dimension {expected}")]
    EigenvalueLength { expected: usize, got: usize },
    #[error("negative or non-finite eigenvalue at index {0}")]
    BadEigenvalue(usize),
    #[error("sample count must be at least 1")]
    EmptySample,
}

/// Point in the truncated sequence model: coordinate `j` is `<x, e_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqPoint<S: Scalar> {
    coords: Vec<S>,
    tail_class: u32,
}

impl<S: Scalar> SeqPoint<S> {
    /// Point with the default tail class 0.
    pub fn new(coords: Vec<S>) -> Self {
        Self {
            coords,
            tail_class: 0,
        }
    }

    /// Point with an explicit tail class (Cameron-Martin bookkeeping).
    pub fn with_tail_class(coords: Vec<S>, tail_class: u32) -> Self {
        Self { coords, tail_class }
    }

    /// Origin of the ambient space, tail class 0.
    pub fn origin(dim: usize) -> Self {
        Self::new(vec![S::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn tail_class(&self) -> u32 {
        self.tail_class
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> S {
        self.coords
            .iter()
            .map(|&c| c * c)
            .fold(S::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Coordinatewise difference; callers must have checked dimensions.
    pub(crate) fn sub_coords(&self, other: &Self) -> Vec<S> {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a - b)
            .collect()
    }
}

/// Finitely supported probability measure.
///
/// Weights are renormalized to sum to 1 at construction; atoms all share
/// one ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<S: Scalar> {
    points: Vec<SeqPoint<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    pub fn points(&self) -> &[SeqPoint<S>] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Construction bypass for module-internal callers that guarantee the
    /// invariants (e.g. pushforwards, which only merge existing atoms).
    pub(crate) fn from_parts_unchecked(points: Vec<SeqPoint<S>>, weights: Vec<S>) -> Self {
        Self { points, weights }
    }
}

/// Diagonal Gaussian on the sequence model: mean plus per-coordinate
/// variances in the basis `{e_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec<S: Scalar> {
    mean: SeqPoint<S>,
    eigenvalues: Vec<S>,
}

impl<S: Scalar> GaussianSpec<S> {
    pub fn new(mean: SeqPoint<S>, eigenvalues: Vec<S>) -> Result<Self, MeasureError> {
        if eigenvalues.len() != mean.dim() {
            return Err(MeasureError::EigenvalueLength {
                expected: mean.dim(),
                got: eigenvalues.len(),
            });
        }
        if !mean.is_finite() {
            return Err(MeasureError::NonFiniteCoordinate(0));
        }
        for (j, &ev) in eigenvalues.iter().enumerate() {
            if !ev.is_finite() || ev < S::zero() {
                return Err(MeasureError::BadEigenvalue(j));
            }
        }
        Ok(Self { mean, eigenvalues })
    }

    pub fn mean(&self) -> &SeqPoint<S> {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[S] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Build a measure from raw atoms and weights, renormalizing the weights to
/// sum exactly 1.
pub fn make_discrete<S: Scalar>(
    points: Vec<SeqPoint<S>>,
    weights: Vec<S>,
) -> Result<DiscreteMeasure<S>, MeasureError> {
    if points.is_empty() {
        return Err(MeasureError::EmptySupport);
    }
    if points.len() != weights.len() {
        return Err(MeasureError::LengthMismatch {
            points: points.len(),
            weights: weights.len(),
        });
    }
    let dim = points[0].dim();
    for (i, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(MeasureError::DimensionMismatch {
                expected: dim,
                got: p.dim(),
                atom: i,
            });
        }
        if !p.is_finite() {
            return Err(MeasureError::NonFiniteCoordinate(i));
        }
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(MeasureError::NonFiniteWeight(i));
        }
        if w < S::zero() {
            return Err(MeasureError::NegativeWeight(i));
        }
    }
    let total: S = weights.iter().copied().sum();
    if total <= S::zero() {
        return Err(MeasureError::ZeroMass);
    }
    let weights = weights.into_iter().map(|w| w / total).collect::<Vec<_>>();
    debug_assert!({
        let s: S = weights.iter().copied().sum();
        (s - S::one()).abs() <= S::from_f64_lossy(tol::WEIGHT_SUM)
    });
    Ok(DiscreteMeasure { points, weights })
}

/// Karhunen-Loeve sampling: coordinate `j` of each atom is
/// `mean_j + sqrt(lambda_j) * z` with `z` standard normal. Atoms get weight
/// `1/n`; the draw is a pure function of `(spec, n, seed)`.
pub fn sample_gaussian<S: Scalar>(
    spec: &GaussianSpec<S>,
    n: usize,
    seed: u64,
) -> Result<DiscreteMeasure<S>, MeasureError> {
    if n == 0 {
        return Err(MeasureError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let coords = spec
            .mean
            .coords()
            .iter()
            .zip(&spec.eigenvalues)
            .map(|(&m, &ev)| {
                let z: f64 = rng.sample(StandardNormal);
                m + ev.sqrt() * S::from_f64_lossy(z)
            })
            .collect();
        points.push(SeqPoint::with_tail_class(coords, spec.mean.tail_class()));
    }
    let w = S::one() / S::from_usize(n).expect("sample count fits scalar");
    Ok(DiscreteMeasure {
        points,
        weights: vec![w; n],
    })
}

/// Weighted mean and weighted per-coordinate variance.
pub fn empirical_moments<S: Scalar>(m: &DiscreteMeasure<S>) -> (SeqPoint<S>, Vec<S>) {
    let dim = m.ambient_dim();
    let mut mean = vec![S::zero(); dim];
    for (p, &w) in m.points.iter().zip(&m.weights) {
        for (acc, &c) in mean.iter_mut().zip(p.coords()) {
            *acc = *acc + w * c;
        }
    }
    let mut var = vec![S::zero(); dim];
    for (p, &w) in m.points.iter().zip(&m.weights) {
        for ((acc, &c), &mu) in var.iter_mut().zip(p.coords()).zip(&mean) {
            let d = c - mu;
            *acc = *acc + w * d * d;
        }
    }
    (SeqPoint::new(mean), var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64]) -> SeqPoint<f64> {
        SeqPoint::new(coords.to_vec())
    }

    #[test]
    fn point_mass_renormalizes() {
        let m = make_discrete(vec![pt(&[1.0, 2.0])], vec![5.0]).unwrap();
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn equal_weights_split_evenly() {
        let m = make_discrete(vec![pt(&[0.0]), pt(&[1.0])], vec![1.0, 1.0]).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn negative_weight_rejected() {
        let err = make_discrete(vec![pt(&[0.0])], vec![-1.0]).unwrap_err();
        assert_eq!(err, MeasureError::NegativeWeight(0));
    }

    #[test]
    fn empty_support_rejected() {
        let err = make_discrete::<f64>(vec![], vec![]).unwrap_err();
        assert_eq!(err, MeasureError::EmptySupport);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let err = make_discrete(vec![pt(&[0.0]), pt(&[0.0, 1.0])], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, MeasureError::DimensionMismatch { .. }));
    }

    #[test]
    fn degenerate_gaussian_collapses_to_mean() {
        let spec = GaussianSpec::new(pt(&[3.0, -1.0]), vec![0.0, 0.0]).unwrap();
        let m = sample_gaussian(&spec, 7, 123).unwrap();
        for p in m.points() {
            assert_eq!(p.coords(), &[3.0, -1.0]);
        }
    }

    #[test]
    fn single_sample_has_unit_weight() {
        let spec = GaussianSpec::new(pt(&[0.0]), vec![1.0]).unwrap();
        let m = sample_gaussian(&spec, 1, 9).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn zero_samples_rejected() {
        let spec = GaussianSpec::new(pt(&[0.0]), vec![1.0]).unwrap();
        assert_eq!(
            sample_gaussian(&spec, 0, 9).unwrap_err(),
            MeasureError::EmptySample
        );
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = GaussianSpec::new(pt(&[1.0, 0.0, 2.0]), vec![0.3, 1.7, 0.0]).unwrap();
        let a = sample_gaussian(&spec, 40, 777).unwrap();
        let b = sample_gaussian(&spec, 40, 777).unwrap();
        assert_eq!(a, b);
        let c = sample_gaussian(&spec, 40, 778).unwrap();
        assert_ne!(a, c);
    }

    // Law-of-large-numbers check against the generator itself: D=1,
    // lambda=4, n=10000 puts the empirical variance within 10% of 4.
    #[test]
    fn sampled_variance_matches_spec() {
        let spec = GaussianSpec::new(pt(&[0.0]), vec![4.0]).unwrap();
        let m = sample_gaussian(&spec, 10_000, 2024).unwrap();
        let (_, var) = empirical_moments(&m);
        assert!(
            (var[0] - 4.0).abs() < 0.4,
            "empirical variance {} too far from 4",
            var[0]
        );
    }

    #[test]
    fn moments_of_point_mass_are_exact() {
        let m = make_discrete(vec![pt(&[2.5, -3.0])], vec![1.0]).unwrap();
        let (mean, var) = empirical_moments(&m);
        assert_eq!(mean.coords(), &[2.5, -3.0]);
        assert_eq!(var, vec![0.0, 0.0]);
    }

    #[test]
    fn symmetric_two_atom_moments() {
        let m = make_discrete(vec![pt(&[1.0]), pt(&[-1.0])], vec![0.5, 0.5]).unwrap();
        let (mean, var) = empirical_moments(&m);
        assert_eq!(mean.coords(), &[0.0]);
        assert_eq!(var, vec![1.0]);
    }

    #[test]
    fn sampled_moments_near_spec() {
        let spec = GaussianSpec::new(pt(&[1.0, -2.0]), vec![2.0, 0.5]).unwrap();
        let m = sample_gaussian(&spec, 20_000, 5).unwrap();
        let (mean, var) = empirical_moments(&m);
        assert!((mean.coords()[0] - 1.0).abs() < 0.05);
        assert!((mean.coords()[1] + 2.0).abs() < 0.05);
        assert!((var[0] - 2.0).abs() < 0.2);
        assert!((var[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn works_at_f32() {
        let spec =
            GaussianSpec::new(SeqPoint::<f32>::new(vec![0.5, 0.5]), vec![1.0, 1.0]).unwrap();
        let m = sample_gaussian(&spec, 16, 3).unwrap();
        let (mean, _) = empirical_moments(&m);
        assert_eq!(mean.dim(), 2);
    }
}
