//! Finite-rank coordinate projections and pushforwards of discrete measures.
//!
//! The canonical family is the basis truncation `P_k x = sum_{j<=k} x_j e_j`;
//! a general variant applies an explicit `k x D` coefficient array `A` as
//! `x -> A^T A x`, mapping the rank-`k` image back into the ambient space.
//! Projections act on coordinates only and leave the symbolic tail class of
//! a point untouched, so `P_D` is the identity on the truncated model.

use thiserror::Error;

use crate::measures::{DiscreteMeasure, SeqPoint};
use crate::scalar::Scalar;
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("dimension mismatch: projection expects {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rank {rank} exceeds ambient dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },
    #[error("coefficient array must be rank x dim = {rank} x {dim}, got {got} entries")]
    BadCoefficients { rank: usize, dim: usize, got: usize },
    #[error("coefficient rows are not orthonormal: projection would not be idempotent")]
    NotIdempotent,
}

#[derive(Debug, Clone, PartialEq)]
enum Action<S: Scalar> {
    /// Keep coordinates `1..=rank`, zero the rest.
    Truncation,
    /// Row-major `rank x dim` array `A`; the map is `x -> A^T A x`.
    Matrix { coeffs: Vec<S> },
}

/// Finite-rank projection on the ambient coordinate model.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<S: Scalar> {
    rank: usize,
    dim: usize,
    action: Action<S>,
}

impl<S: Scalar> Projection<S> {
    /// Basis truncation of the given rank.
    pub fn truncation(rank: usize, dim: usize) -> Result<Self, ProjectionError> {
        if rank > dim {
            return Err(ProjectionError::RankTooLarge { rank, dim });
        }
        Ok(Self {
            rank,
            dim,
            action: Action::Truncation,
        })
    }

    /// Projection from an explicit `rank x dim` coefficient array with
    /// orthonormal rows. Idempotence (`A A^T = I`) is verified to the
    /// crate-wide tolerance at construction.
    pub fn from_coefficients(
        rank: usize,
        dim: usize,
        coeffs: Vec<S>,
    ) -> Result<Self, ProjectionError> {
        if rank > dim {
            return Err(ProjectionError::RankTooLarge { rank, dim });
        }
        if coeffs.len() != rank * dim {
            return Err(ProjectionError::BadCoefficients {
                rank,
                dim,
                got: coeffs.len(),
            });
        }
        let tol = S::from_f64_lossy(tol::PROJECTION_IDEMPOTENT);
        for r in 0..rank {
            for s in 0..rank {
                let mut dot = S::zero();
                for j in 0..dim {
                    dot = dot + coeffs[r * dim + j] * coeffs[s * dim + j];
                }
                let target = if r == s { S::one() } else { S::zero() };
                if (dot - target).abs() > tol {
                    return Err(ProjectionError::NotIdempotent);
                }
            }
        }
        Ok(Self {
            rank,
            dim,
            action: Action::Matrix { coeffs },
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.action, Action::Truncation) && self.rank == self.dim
    }

    /// Image of a point in the ambient representation; tail class preserved.
    pub fn apply(&self, x: &SeqPoint<S>) -> Result<SeqPoint<S>, ProjectionError> {
        if x.dim() != self.dim {
            return Err(ProjectionError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let coords = match &self.action {
            Action::Truncation => x
                .coords()
                .iter()
                .enumerate()
                .map(|(j, &c)| if j < self.rank { c } else { S::zero() })
                .collect(),
            Action::Matrix { coeffs } => {
                // y = A x in R^rank, then back into the ambient space: A^T y.
                let mut low = vec![S::zero(); self.rank];
                for (r, l) in low.iter_mut().enumerate() {
                    for (j, &c) in x.coords().iter().enumerate() {
                        *l = *l + coeffs[r * self.dim + j] * c;
                    }
                }
                let mut out = vec![S::zero(); self.dim];
                for (r, &l) in low.iter().enumerate() {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = *o + coeffs[r * self.dim + j] * l;
                    }
                }
                out
            }
        };
        Ok(SeqPoint::with_tail_class(coords, x.tail_class()))
    }
}

/// The truncation family `P_0, ..., P_D`: `P_0` maps everything to the
/// origin, `P_D` is the identity.
pub fn truncation_family<S: Scalar>(dim: usize) -> Vec<Projection<S>> {
    (0..=dim)
        .map(|k| Projection::truncation(k, dim).expect("k <= dim by construction"))
        .collect()
}

/// Pushforward of a measure: atoms map to their images, weights follow;
/// images that collide (coordinates within the merge tolerance at equal
/// tail class) merge with summed weights, keeping first-occurrence order.
pub fn pushforward<S: Scalar>(
    p: &Projection<S>,
    m: &DiscreteMeasure<S>,
) -> Result<DiscreteMeasure<S>, ProjectionError> {
    let merge_tol = S::from_f64_lossy(tol::ATOM_MERGE);
    let mut points: Vec<SeqPoint<S>> = Vec::with_capacity(m.len());
    let mut weights: Vec<S> = Vec::with_capacity(m.len());
    for (x, &w) in m.points().iter().zip(m.weights()) {
        let image = p.apply(x)?;
        let hit = points.iter().position(|q| {
            q.tail_class() == image.tail_class()
                && q.coords()
                    .iter()
                    .zip(image.coords())
                    .all(|(&a, &b)| (a - b).abs() <= merge_tol)
        });
        match hit {
            Some(i) => weights[i] = weights[i] + w,
            None => {
                points.push(image);
                weights.push(w);
            }
        }
    }
    Ok(DiscreteMeasure::from_parts_unchecked(points, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{empirical_moments, make_discrete};
    use proptest::prelude::*;

    fn pt(coords: &[f64]) -> SeqPoint<f64> {
        SeqPoint::new(coords.to_vec())
    }

    #[test]
    fn family_endpoints() {
        let fam = truncation_family::<f64>(3);
        assert_eq!(fam.len(), 4);
        let x = pt(&[1.0, 2.0, 3.0]);
        assert_eq!(fam[3].apply(&x).unwrap(), x);
        assert_eq!(fam[0].apply(&x).unwrap(), SeqPoint::origin(3));
        assert_eq!(fam[2].apply(&x).unwrap(), pt(&[1.0, 2.0, 0.0]));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let p = Projection::<f64>::truncation(1, 3).unwrap();
        assert!(matches!(
            p.apply(&pt(&[1.0])),
            Err(ProjectionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank_above_dim_rejected() {
        assert!(matches!(
            Projection::<f64>::truncation(4, 3),
            Err(ProjectionError::RankTooLarge { .. })
        ));
    }

    // Naive triple-loop oracle: build B = A^T A densely, then B x.
    #[test]
    fn matrix_action_matches_product_oracle() {
        let dim = 4;
        let rank = 2;
        // Orthonormal rows: e_2 and (e_1 + e_4)/sqrt(2).
        let s = 1.0 / 2.0f64.sqrt();
        let coeffs = vec![0.0, 1.0, 0.0, 0.0, s, 0.0, 0.0, s];
        let p = Projection::from_coefficients(rank, dim, coeffs.clone()).unwrap();

        let mut b = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for r in 0..rank {
                    b[i * dim + j] += coeffs[r * dim + i] * coeffs[r * dim + j];
                }
            }
        }
        let x = pt(&[1.0, -2.0, 0.5, 3.0]);
        let expected: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| b[i * dim + j] * x.coords()[j]).sum())
            .collect();
        let got = p.apply(&x).unwrap();
        for (g, e) in got.coords().iter().zip(&expected) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn non_orthonormal_coefficients_rejected() {
        let err = Projection::from_coefficients(1, 2, vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, ProjectionError::NotIdempotent);
    }

    #[test]
    fn pushforward_identity_is_identity() {
        let m = make_discrete(vec![pt(&[1.0, 2.0]), pt(&[0.0, 1.0])], vec![0.3, 0.7]).unwrap();
        let id = Projection::truncation(2, 2).unwrap();
        assert_eq!(pushforward(&id, &m).unwrap(), m);
    }

    #[test]
    fn pushforward_rank_zero_merges_all_mass() {
        let m = make_discrete(
            vec![pt(&[1.0, 2.0]), pt(&[-1.0, 0.5]), pt(&[3.0, 3.0])],
            vec![1.0, 1.0, 2.0],
        )
        .unwrap();
        let p0 = Projection::truncation(0, 2).unwrap();
        let pushed = pushforward(&p0, &m).unwrap();
        assert_eq!(pushed.len(), 1);
        assert_eq!(pushed.points()[0], SeqPoint::origin(2));
        assert!((pushed.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_merges_colliding_atoms() {
        let m = make_discrete(
            vec![pt(&[1.0, 2.0, 5.0]), pt(&[1.0, 2.0, -5.0])],
            vec![0.25, 0.75],
        )
        .unwrap();
        let p2 = Projection::truncation(2, 3).unwrap();
        let pushed = pushforward(&p2, &m).unwrap();
        assert_eq!(pushed.len(), 1);
        assert_eq!(pushed.points()[0], pt(&[1.0, 2.0, 0.0]));
        assert!((pushed.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_keeps_distinct_tail_classes_apart() {
        let m = make_discrete(
            vec![
                SeqPoint::with_tail_class(vec![1.0, 5.0], 0),
                SeqPoint::with_tail_class(vec![1.0, -5.0], 1),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let p1 = Projection::truncation(1, 2).unwrap();
        let pushed = pushforward(&p1, &m).unwrap();
        assert_eq!(pushed.len(), 2);
    }

    #[test]
    fn pushforward_moments_match_projected_moments() {
        let m = make_discrete(
            vec![pt(&[1.0, 2.0, 3.0]), pt(&[-1.0, 0.0, 1.0]), pt(&[0.5, 1.5, -2.0])],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let p = Projection::truncation(2, 3).unwrap();
        let pushed = pushforward(&p, &m).unwrap();
        let (mean_pushed, var_pushed) = empirical_moments(&pushed);
        let (mean, var) = empirical_moments(&m);
        let mean_proj = p.apply(&mean).unwrap();
        for j in 0..3 {
            assert!((mean_pushed.coords()[j] - mean_proj.coords()[j]).abs() <= 1e-12);
            let expected_var = if j < 2 { var[j] } else { 0.0 };
            assert!((var_pushed[j] - expected_var).abs() <= 1e-12);
        }
    }

    proptest! {
        // |P_k x - x|^2 = sum_{j>k} x_j^2, hence nonincreasing in k, and
        // |P_k x| <= |x|.
        #[test]
        fn truncation_defect_is_exact_tail_energy(
            coords in proptest::collection::vec(-10.0f64..10.0, 5),
        ) {
            let x = SeqPoint::new(coords.clone());
            for (k, p) in truncation_family::<f64>(5).iter().enumerate() {
                let px = p.apply(&x).unwrap();
                let defect: f64 = px
                    .coords()
                    .iter()
                    .zip(&coords)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let tail: f64 = coords[k..].iter().map(|c| c * c).sum();
                prop_assert!((defect - tail).abs() <= 1e-12 * (1.0 + tail));
                prop_assert!(px.norm() <= x.norm() + 1e-12);
            }
        }

        // Idempotence at the measure level: pushing forward twice equals
        // pushing forward once.
        #[test]
        fn pushforward_idempotent(
            coords in proptest::collection::vec(-3.0f64..3.0, 8),
            k in 0usize..=4,
        ) {
            let pts: Vec<_> = coords.chunks(2).map(|c| SeqPoint::new(c.to_vec())).collect();
            let n = pts.len();
            let m = make_discrete(pts, vec![1.0; n]).unwrap();
            let p = Projection::truncation(k.min(2), 2).unwrap();
            let once = pushforward(&p, &m).unwrap();
            let twice = pushforward(&p, &once).unwrap();
            prop_assert_eq!(once, twice);
        }

        // Pushforward preserves total mass exactly.
        #[test]
        fn pushforward_preserves_mass(
            coords in proptest::collection::vec(-3.0f64..3.0, 6),
            k in 0usize..=3,
        ) {
            let pts: Vec<_> = coords.chunks(3).map(|c| SeqPoint::new(c.to_vec())).collect();
            let n = pts.len();
            let m = make_discrete(pts, vec![1.0; n]).unwrap();
            let p = Projection::truncation(k, 3).unwrap();
            let pushed = pushforward(&p, &m).unwrap();
            let mass: f64 = pushed.weights().iter().sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
        }
    }
}
