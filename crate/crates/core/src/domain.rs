//! The chiral domain of an arrangement: the closure of the finite points that
//! have positive depth in every camera.
//!
//! When the domain is nonempty it is the projectivization of the cone
//! `Q = { q : q4 >= 0, n_i^T q >= 0 }`, equivalently the set of points where
//! `n_inf^T q` and all `n_i^T q` share a sign. Nonemptiness is decided by
//! asking whether the row space of `N = [n_1 .. n_m n_inf]` meets the open
//! positive orthant.

use nalgebra::{DMatrix, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::lp::{rowspace_meets_positive_orthant, LpError};
use crate::projective::{chirality_sign, epipole, infinity_normal, FiniteCamera, ImagePoint, ProjectivePoint, Sign};
use crate::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("an arrangement needs at least one camera")]
    NoCameras,
    #[error("cameras {0} and {1} share a center")]
    CoincidentCenters(usize, usize),
    #[error("witness {0:?} failed depth re-verification")]
    WitnessRejected([f64; 4]),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Outcome of the nonemptiness test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainWitness {
    pub nonempty: bool,
    /// A finite point with positive depth in every camera, scaled to `q4 = 1`.
    #[serde(serialize_with = "serialize_opt_point")]
    pub witness: Option<ProjectivePoint>,
    /// Optimal LP margin.
    pub eps: f64,
}

fn serialize_opt_point<S: serde::Serializer>(p: &Option<ProjectivePoint>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => {
            let c = p.coords();
            s.serialize_some(&[c[0], c[1], c[2], c[3]])
        }
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DomainClassification {
    Interior,
    Boundary,
    Outside,
    DomainEmpty,
}

/// Halfspace description `{ q : a^T q >= 0 }` of a polyhedral cone.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceCone {
    normals: Vec<Vector4<f64>>,
}

impl HalfspaceCone {
    pub fn normals(&self) -> &[Vector4<f64>] {
        &self.normals
    }

    /// Every inequality holds up to the band `tol * ||a|| * ||q||`.
    pub fn contains(&self, q: &Vector4<f64>, tol: f64) -> bool {
        let nq = q.norm();
        self.normals.iter().all(|a| a.dot(q) >= -tol * a.norm() * nq)
    }

    /// `q` or `-q` lies in the cone.
    pub fn contains_projectively(&self, q: &ProjectivePoint, tol: f64) -> bool {
        self.contains(q.coords(), tol) || self.contains(&-q.coords(), tol)
    }
}

/// An ordered list of finite cameras with pairwise distinct centers.
#[derive(Debug, Clone)]
pub struct CameraArrangement {
    cameras: Vec<FiniteCamera>,
    rays: Vec<Vector4<f64>>,
    centers: Vec<ProjectivePoint>,
    n_matrix: DMatrix<f64>,
    /// `epipoles[i][j] = A_i c_j`, `None` on the diagonal.
    epipoles: Vec<Vec<Option<ImagePoint>>>,
    collinear: bool,
    witness: DomainWitness,
    tol: Tolerances,
}

impl PartialEq for CameraArrangement {
    fn eq(&self, other: &Self) -> bool {
        self.cameras == other.cameras
    }
}

impl CameraArrangement {
    pub fn new(cameras: Vec<FiniteCamera>, tol: Tolerances) -> Result<Self, DomainError> {
        let m = cameras.len();
        if m == 0 {
            return Err(DomainError::NoCameras);
        }
        let centers: Vec<ProjectivePoint> = cameras.iter().map(|c| c.center()).collect();
        for i in 0..m {
            for j in (i + 1)..m {
                if centers[i].equivalent(&centers[j], tol.lin) {
                    return Err(DomainError::CoincidentCenters(i, j));
                }
            }
        }
        let rays: Vec<Vector4<f64>> = cameras.iter().map(|c| c.principal_ray()).collect();
        let n_matrix = DMatrix::from_fn(4, m + 1, |r, c| if c < m { rays[c][r] } else { infinity_normal()[r] });
        let epipoles = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { None } else { epipole(&cameras[i], &cameras[j]).ok() })
                    .collect()
            })
            .collect();
        let collinear = rank_at_most_two(&centers, tol.rank);
        let witness = nonempty_witness(&cameras, &n_matrix, tol)?;
        Ok(Self {
            cameras,
            rays,
            centers,
            n_matrix,
            epipoles,
            collinear,
            witness,
            tol,
        })
    }

    pub fn with_default_tolerances(cameras: Vec<FiniteCamera>) -> Result<Self, DomainError> {
        Self::new(cameras, Tolerances::default())
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[FiniteCamera] {
        &self.cameras
    }

    pub fn rays(&self) -> &[Vector4<f64>] {
        &self.rays
    }

    pub fn centers(&self) -> &[ProjectivePoint] {
        &self.centers
    }

    /// `[n_1 .. n_m n_inf]`, 4 x (m + 1).
    pub fn n_matrix(&self) -> &DMatrix<f64> {
        &self.n_matrix
    }

    /// `A_i c_j` for `i != j`.
    pub fn epipole(&self, i: usize, j: usize) -> Option<&ImagePoint> {
        self.epipoles[i][j].as_ref()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// The centers span at most a line of P^3.
    pub fn centers_collinear(&self) -> bool {
        self.collinear
    }

    pub fn nonempty_witness(&self) -> &DomainWitness {
        &self.witness
    }

    pub fn is_nonempty(&self) -> bool {
        self.witness.nonempty
    }

    /// Banded signs of `n_inf^T q` followed by each `n_i^T q`.
    pub fn sign_pattern(&self, q: &ProjectivePoint) -> Vec<Sign> {
        let c = q.coords();
        let nq = c.norm();
        std::iter::once(Sign::banded(c[3], nq, self.tol.sign))
            .chain(self.rays.iter().map(|n| Sign::banded(n.dot(c), n.norm() * nq, self.tol.sign)))
            .collect()
    }

    /// Classifies `q` by the pairwise sign products; refuses to answer for an
    /// empty domain because the sign description is not valid there.
    pub fn contains(&self, q: &ProjectivePoint) -> DomainClassification {
        if !self.is_nonempty() {
            return DomainClassification::DomainEmpty;
        }
        classify_signs(&self.sign_pattern(q))
    }

    /// `{ q4 >= 0, n_i^T q >= 0 }`, with `n_inf` first.
    pub fn same_side_cone(&self) -> HalfspaceCone {
        HalfspaceCone {
            normals: std::iter::once(infinity_normal()).chain(self.rays.iter().copied()).collect(),
        }
    }

    /// Finite `q` with strictly positive depth in every camera.
    pub fn depths_positive(&self, q: &ProjectivePoint) -> bool {
        let w = q.w();
        let c = q.coords();
        if w.abs() <= self.tol.sign * c.norm() {
            return false;
        }
        self.rays
            .iter()
            .all(|n| n.dot(c) * w.signum() > self.tol.sign * n.norm() * c.norm())
    }
}

/// Interior when all signs agree and are nonzero, Boundary when the nonzero
/// ones agree, Outside otherwise.
pub(crate) fn classify_signs(signs: &[Sign]) -> DomainClassification {
    let pos = signs.contains(&Sign::Positive);
    let neg = signs.contains(&Sign::Negative);
    let zero = signs.contains(&Sign::Zero);
    match (pos && neg, zero) {
        (true, _) => DomainClassification::Outside,
        (false, true) => DomainClassification::Boundary,
        (false, false) => DomainClassification::Interior,
    }
}

/// `(n_A^T q)(n_inf^T q) >= 0` within the sign band.
pub fn single_camera_domain_check(camera: &FiniteCamera, q: &ProjectivePoint, tol: f64) -> bool {
    chirality_sign(q, camera, tol) != Sign::Negative
}

fn rank_at_most_two(points: &[ProjectivePoint], tol: f64) -> bool {
    if points.len() <= 2 {
        return true;
    }
    let m = DMatrix::from_fn(4, points.len(), |r, c| {
        let p = points[c].coords();
        p[r] / p.norm()
    });
    let sv = m.singular_values();
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s[2] <= tol * s[0]
}

fn nonempty_witness(
    cameras: &[FiniteCamera],
    n_matrix: &DMatrix<f64>,
    tol: Tolerances,
) -> Result<DomainWitness, DomainError> {
    let res = rowspace_meets_positive_orthant(n_matrix)?;
    let eps = res.eps.unwrap_or(0.0);
    if !res.is_strict() {
        return Ok(DomainWitness {
            nonempty: false,
            witness: None,
            eps,
        });
    }
    let y = res.witness.expect("strict result carries a witness");
    // y^T n_inf = y4 > 0, so the witness is finite.
    let q = ProjectivePoint::new(y / y[3]).map_err(|_| DomainError::WitnessRejected(y.into()))?;
    let all_positive = cameras.iter().all(|cam| {
        let n = cam.principal_ray();
        n.dot(q.coords()) > tol.sign * n.norm() * q.coords().norm()
    });
    if !all_positive {
        return Err(DomainError::WitnessRejected(y.into()));
    }
    Ok(DomainWitness {
        nonempty: true,
        witness: Some(q),
        eps,
    })
}
