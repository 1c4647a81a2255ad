//! Chiral upgrades that keep cameras Euclidean.
//!
//! After moving the first camera to `[I | 0]`, the only homographies that
//! keep a second camera `[R | t]` quasi-Euclidean (`U U^T = I`) have inverses
//! `[I 0; v^T delta]` with `v` in `{0, -(2/|t|^2) R^T t}` and `|delta| = 1`.
//! That leaves four candidates for two views (the twisted pair and its
//! reflections) and two for three or more views.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use thiserror::Error;

use crate::domain::CameraArrangement;
use crate::projective::{apply_homography, FiniteCamera, GeometryError, Homography, ProjectivePoint};
use crate::reconstruction::{verify_chiral, ProjectiveReconstruction, ReconstructionError, SignedReconstruction};

/// Orthonormality tolerance for rotation blocks.
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EuclideanError {
    #[error("translation is zero")]
    ZeroTranslation,
    #[error("left block is not a rotation (residual {residual:e}, det {det})")]
    NotRotation { residual: f64, det: f64 },
    #[error("camera {0} is not Euclidean")]
    NotEuclidean(usize),
    #[error("expected {expected}, got {got} cameras")]
    ViewCount { expected: &'static str, got: usize },
    #[error("upgrade failed verification: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Reconstruction(#[from] ReconstructionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn orthonormality_residual(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).amax()
}

/// A camera `[R | t]` with `R` in SO(3).
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanCamera {
    r: Matrix3<f64>,
    t: Vector3<f64>,
}

impl EuclideanCamera {
    pub fn new(r: Matrix3<f64>, t: Vector3<f64>) -> Result<Self, EuclideanError> {
        let residual = orthonormality_residual(&r);
        let det = r.determinant();
        if !(residual <= ROTATION_TOL) || !(det > 0.0) {
            return Err(EuclideanError::NotRotation { residual, det });
        }
        Ok(Self { r, t })
    }

    pub fn from_camera(camera: &FiniteCamera) -> Result<Self, EuclideanError> {
        Self::new(camera.g(), camera.t())
    }

    pub fn r(&self) -> &Matrix3<f64> {
        &self.r
    }

    pub fn t(&self) -> &Vector3<f64> {
        &self.t
    }

    pub fn to_camera(&self) -> FiniteCamera {
        FiniteCamera::from_parts(self.r, self.t).expect("rotations are invertible")
    }
}

/// The two `v` for which `[R + t v^T | t]` is quasi-Euclidean: `0` and
/// `-(2/|t|^2) R^T t`.
pub fn quasi_euclidean_v_solutions(a: &EuclideanCamera) -> Result<[Vector3<f64>; 2], EuclideanError> {
    let nt = a.t.norm_squared();
    if nt.sqrt() <= 1e-9 {
        return Err(EuclideanError::ZeroTranslation);
    }
    Ok([Vector3::zeros(), -(2.0 / nt) * a.r.transpose() * a.t])
}

/// `U = R + t v^T`.
pub fn twisted_block(a: &EuclideanCamera, v: &Vector3<f64>) -> Matrix3<f64> {
    a.r + a.t * v.transpose()
}

/// `H_1 .. H_4` for a second camera, with the nonzero `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedPairSet {
    pub v: Vector3<f64>,
    pub homographies: [Homography; 4],
}

impl TwistedPairSet {
    /// Last row of `H_3`, `(-v, 1)`.
    pub fn r(&self) -> Vector4<f64> {
        self.homographies[2].last_row()
    }
}

fn lower_block(v: &Vector3<f64>, delta: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(3, 0)] = v.x;
    m[(3, 1)] = v.y;
    m[(3, 2)] = v.z;
    m[(3, 3)] = delta;
    m
}

/// `H_1 = I`, `H_2 = diag(I, -1)`, `H_3 = [I 0; -v^T 1]`, `H_4 = [I 0; v^T -1]`.
pub fn twisted_pair_homographies(a2: &EuclideanCamera) -> Result<TwistedPairSet, EuclideanError> {
    let [_, v] = quasi_euclidean_v_solutions(a2)?;
    let zero = Vector3::zeros();
    let homographies = [
        Homography::new(lower_block(&zero, 1.0))?,
        Homography::new(lower_block(&zero, -1.0))?,
        Homography::new(lower_block(&-v, 1.0))?,
        Homography::new(lower_block(&v, -1.0))?,
    ];
    Ok(TwistedPairSet { v, homographies })
}

/// A successful Euclidean upgrade.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanUpgrade {
    /// Which candidate was used, 1 to 4.
    pub index: usize,
    /// The candidate in the normalized frame where the first camera is `[I | 0]`.
    pub candidate: Homography,
    /// Total homography, candidate composed with the normalizing similarity.
    pub homography: Homography,
    /// Upgraded cameras, each multiplied by `sign(det U)`.
    pub cameras: Vec<EuclideanCamera>,
    /// Upgraded world points.
    pub points: Vec<ProjectivePoint>,
}

/// Similarity `T = [R_1 t_1; 0 1]`, which sends the first camera to `[I | 0]`.
fn normalizing_similarity(first: &EuclideanCamera) -> Result<Homography, EuclideanError> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&first.r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&first.t);
    Ok(Homography::new(m)?)
}

fn euclidean_cameras(s: &SignedReconstruction) -> Result<Vec<EuclideanCamera>, EuclideanError> {
    s.arrangement()
        .cameras()
        .iter()
        .enumerate()
        .map(|(i, c)| EuclideanCamera::from_camera(c).map_err(|_| EuclideanError::NotEuclidean(i)))
        .collect()
}

fn in_dual(h: &Vector4<f64>, points: &[ProjectivePoint], tol: f64) -> bool {
    points
        .iter()
        .all(|q| h.dot(q.coords()) >= -tol * h.norm() * q.coords().norm())
}

/// Applies `total`, checks chirality, and normalizes each camera by
/// `sign(det U)` to land back in SO(3).
fn finish(
    s: &SignedReconstruction,
    index: usize,
    candidate: Homography,
    total: Homography,
) -> Result<EuclideanUpgrade, EuclideanError> {
    let tol = *s.arrangement().tolerances();
    let mut cameras = Vec::with_capacity(s.arrangement().len());
    let mut finite = Vec::with_capacity(s.arrangement().len());
    for c in s.arrangement().cameras() {
        let moved = apply_homography(c, &total)?;
        let u = moved.g();
        let fixed = if u.determinant() < 0.0 { moved.scaled(-1.0)? } else { moved };
        let e = EuclideanCamera::from_camera(&fixed)
            .map_err(|e| EuclideanError::VerificationFailed(format!("camera not Euclidean after upgrade: {e}")))?;
        cameras.push(e);
        finite.push(fixed);
    }
    let points: Vec<ProjectivePoint> = s.points().iter().map(|q| total.apply_point(q)).collect();
    let arrangement = CameraArrangement::new(finite, tol).map_err(ReconstructionError::from)?;
    let upgraded = ProjectiveReconstruction::from_points(arrangement, points.clone())?;
    if !verify_chiral(&upgraded) {
        return Err(EuclideanError::VerificationFailed("upgraded points are not chiral".into()));
    }
    Ok(EuclideanUpgrade {
        index,
        candidate,
        homography: total,
        cameras,
        points,
    })
}

/// Two Euclidean views: same camera signs admit `H_1`/`H_2`, differing signs
/// admit `H_3`/`H_4`; the lowest-index candidate whose last row is in the
/// dual of the point cone is returned.
pub fn euclidean_two_view_upgrade(s: &SignedReconstruction) -> Result<Option<EuclideanUpgrade>, EuclideanError> {
    let m = s.arrangement().len();
    if m != 2 {
        return Err(EuclideanError::ViewCount { expected: "2", got: m });
    }
    let cams = euclidean_cameras(s)?;
    let t = normalizing_similarity(&cams[0])?;
    let second = EuclideanCamera::from_camera(&apply_homography(&cams[1].to_camera(), &t)?)?;
    let set = twisted_pair_homographies(&second)?;
    let tol = s.arrangement().tolerances().sign;
    let points: Vec<ProjectivePoint> = s.points().iter().map(|q| t.apply_point(q)).collect();
    let sigma = s.camera_signs();
    let candidates: [usize; 2] = if sigma[0] == sigma[1] { [0, 1] } else { [2, 3] };
    for idx in candidates {
        let h = &set.homographies[idx];
        if in_dual(&h.last_row(), &points, tol) {
            let total = h.compose(&t)?;
            return finish(s, idx + 1, h.clone(), total).map(Some);
        }
    }
    Ok(None)
}

/// Three or more Euclidean views: only `H_1` and `H_2` remain, and they work
/// iff all camera signs agree and the points have one-signed last coordinate.
pub fn euclidean_multiview_upgrade(s: &SignedReconstruction) -> Result<Option<EuclideanUpgrade>, EuclideanError> {
    let m = s.arrangement().len();
    if m <= 2 {
        return Err(EuclideanError::ViewCount { expected: "more than 2", got: m });
    }
    let cams = euclidean_cameras(s)?;
    let sigma = s.camera_signs();
    if sigma.iter().any(|&x| x != sigma[0]) {
        return Ok(None);
    }
    let t = normalizing_similarity(&cams[0])?;
    let tol = s.arrangement().tolerances().sign;
    let points: Vec<ProjectivePoint> = s.points().iter().map(|q| t.apply_point(q)).collect();
    let zero = Vector3::zeros();
    for (idx, delta) in [(0usize, 1.0), (1, -1.0)] {
        let h = Homography::new(lower_block(&zero, delta))?;
        if in_dual(&h.last_row(), &points, tol) {
            let total = h.compose(&t)?;
            return finish(s, idx + 1, h, total).map(Some);
        }
    }
    Ok(None)
}

/// Dispatches on the number of views.
pub fn euclidean_upgrade(s: &SignedReconstruction) -> Result<Option<EuclideanUpgrade>, EuclideanError> {
    if s.arrangement().len() == 2 {
        euclidean_two_view_upgrade(s)
    } else {
        euclidean_multiview_upgrade(s)
    }
}
