//! Projective reconstructions, their sign matrices, and the decision whether
//! a homography can make them chiral.
//!
//! For a signed reconstruction with camera signs `sigma_i`, a homography with
//! last row `h` yields a chiral reconstruction exactly when either
//!
//! * `h^T q_k >= 0` for all points and `sigma_i h^T c_i > 0` for all centers
//!   (same-side system), or
//! * `h^T q_k >= 0` for all points and `-sigma_i h^T c_i > 0` for all centers
//!   (opposite-side system).
//!
//! Both are posed to the max-epsilon LP.

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::domain::{CameraArrangement, DomainClassification, DomainError};
use crate::lp::{solve_feasibility, FeasibilityProblem, FeasibilityResult, LpError};
use crate::projective::{apply_homography, rank_one, FiniteCamera, GeometryError, Homography, ProjectivePoint, Sign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructionError {
    #[error("point {point} lies on the principal plane of camera {camera}")]
    PointOnPrincipalPlane { camera: usize, point: usize },
    #[error("point {point} does not project to its correspondence in camera {camera}")]
    Inconsistent { camera: usize, point: usize },
    #[error("expected {expected} {what}, got {got}")]
    CountMismatch { what: &'static str, expected: usize, got: usize },
    #[error("operation needs exactly two cameras, got {0}")]
    NotTwoView(usize),
    #[error("upgraded reconstruction failed verification: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Affine image points `(x, y)`, indexed `[camera][point]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondences {
    entries: Vec<Vec<[f64; 2]>>,
}

impl Correspondences {
    pub fn new(entries: Vec<Vec<[f64; 2]>>) -> Result<Self, ReconstructionError> {
        let n = entries.first().map_or(0, |r| r.len());
        for row in &entries {
            if row.len() != n {
                return Err(ReconstructionError::CountMismatch {
                    what: "points per camera",
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(GeometryError::NotFinite.into());
            }
        }
        Ok(Self { entries })
    }

    pub fn cameras(&self) -> usize {
        self.entries.len()
    }

    pub fn points(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn get(&self, camera: usize, point: usize) -> [f64; 2] {
        self.entries[camera][point]
    }

    pub fn entries(&self) -> &[Vec<[f64; 2]>] {
        &self.entries
    }
}

/// Cameras plus world-point representatives whose images are known.
#[derive(Debug, Clone)]
pub struct ProjectiveReconstruction {
    arrangement: CameraArrangement,
    points: Vec<ProjectivePoint>,
    /// `w_ik` with `A_i q_k = w_ik (x_ik, y_ik, 1)`; zero for points on a principal plane.
    scales: Vec<Vec<f64>>,
}

impl ProjectiveReconstruction {
    /// Checks `A_i q_k ~ (x_ik, y_ik, 1)` and derives the scales from the
    /// cameras rather than trusting the caller.
    pub fn new(
        arrangement: CameraArrangement,
        points: Vec<ProjectivePoint>,
        correspondences: &Correspondences,
    ) -> Result<Self, ReconstructionError> {
        let m = arrangement.len();
        if correspondences.cameras() != m {
            return Err(ReconstructionError::CountMismatch {
                what: "camera rows of correspondences",
                expected: m,
                got: correspondences.cameras(),
            });
        }
        if m > 0 && correspondences.points() != points.len() {
            return Err(ReconstructionError::CountMismatch {
                what: "correspondences per camera",
                expected: points.len(),
                got: correspondences.points(),
            });
        }
        let tol = arrangement.tolerances().lin;
        for (i, cam) in arrangement.cameras().iter().enumerate() {
            for (k, q) in points.iter().enumerate() {
                let [x, y] = correspondences.get(i, k);
                let image = cam.apply(q.coords());
                if !rank_one(&image, &Vector3::new(x, y, 1.0), tol) {
                    return Err(ReconstructionError::Inconsistent { camera: i, point: k });
                }
            }
        }
        Self::from_points(arrangement, points)
    }

    /// Builds the reconstruction whose correspondences are the projections of
    /// `points`. Points may lie on principal planes; centers are rejected.
    pub fn from_points(arrangement: CameraArrangement, points: Vec<ProjectivePoint>) -> Result<Self, ReconstructionError> {
        let tol = arrangement.tolerances().lin;
        let mut scales = Vec::with_capacity(arrangement.len());
        for cam in arrangement.cameras() {
            let mut row = Vec::with_capacity(points.len());
            for q in &points {
                let image = cam.apply(q.coords());
                if image.norm() <= tol * cam.matrix().norm() * q.coords().norm() {
                    return Err(GeometryError::CenterPoint.into());
                }
                row.push(image[2]);
            }
            scales.push(row);
        }
        Ok(Self {
            arrangement,
            points,
            scales,
        })
    }

    pub fn arrangement(&self) -> &CameraArrangement {
        &self.arrangement
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn scale(&self, camera: usize, point: usize) -> f64 {
        self.scales[camera][point]
    }

    /// Affine image coordinates, `None` for points imaged at infinity.
    pub fn correspondences(&self) -> Option<Correspondences> {
        let entries = self
            .arrangement
            .cameras()
            .iter()
            .map(|cam| {
                self.points
                    .iter()
                    .map(|q| {
                        let p = cam.apply(q.coords());
                        (p[2] != 0.0).then(|| [p[0] / p[2], p[1] / p[2]])
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Correspondences::new(entries).ok()
    }

    /// `(A H^-1, H Q)`.
    pub fn transformed(&self, h: &Homography) -> Result<Self, ReconstructionError> {
        let cameras = self
            .arrangement
            .cameras()
            .iter()
            .map(|c| apply_homography(c, h))
            .collect::<Result<Vec<_>, _>>()?;
        let arrangement = CameraArrangement::new(cameras, *self.arrangement.tolerances())?;
        let points = self.points.iter().map(|q| h.apply_point(q)).collect();
        Self::from_points(arrangement, points)
    }

    /// Same reconstruction with the listed points replaced by their negatives.
    pub fn with_points(&self, points: Vec<ProjectivePoint>) -> Result<Self, ReconstructionError> {
        Self::from_points(self.arrangement.clone(), points)
    }
}

/// `sigma_ik = sign(n_i^T q_k)`, stored `[camera][point]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignMatrix {
    entries: Vec<Vec<i8>>,
}

impl SignMatrix {
    pub fn get(&self, camera: usize, point: usize) -> i8 {
        self.entries[camera][point]
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.entries
    }
}

/// Entrywise signs; a point on a principal plane has no sign.
pub fn sign_matrix(r: &ProjectiveReconstruction) -> Result<SignMatrix, ReconstructionError> {
    let tol = r.arrangement.tolerances().sign;
    let entries = r
        .arrangement
        .rays()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            r.points
                .iter()
                .enumerate()
                .map(|(k, q)| match Sign::banded(n.dot(q.coords()), n.norm() * q.coords().norm(), tol) {
                    Sign::Zero => Err(ReconstructionError::PointOnPrincipalPlane { camera: i, point: k }),
                    s => Ok(s.as_i8()),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SignMatrix { entries })
}

/// A reconstruction in which every camera sees every point with one sign.
#[derive(Debug, Clone)]
pub struct SignedReconstruction {
    reconstruction: ProjectiveReconstruction,
    camera_signs: Vec<i8>,
}

impl SignedReconstruction {
    pub fn reconstruction(&self) -> &ProjectiveReconstruction {
        &self.reconstruction
    }

    /// `sigma_i`.
    pub fn camera_signs(&self) -> &[i8] {
        &self.camera_signs
    }

    pub fn arrangement(&self) -> &CameraArrangement {
        self.reconstruction.arrangement()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        self.reconstruction.points()
    }

    /// `sigma_i c_i`.
    pub fn signed_centers(&self) -> Vec<Vector4<f64>> {
        self.arrangement()
            .centers()
            .iter()
            .zip(&self.camera_signs)
            .map(|(c, &s)| c.coords() * f64::from(s))
            .collect()
    }
}

/// Flips representatives so that the first camera sees every point with a
/// positive sign; succeeds iff every `sigma_ik sigma_jk` is constant in `k`.
pub fn try_sign(r: &ProjectiveReconstruction) -> Option<SignedReconstruction> {
    let s = sign_matrix(r).ok()?;
    let m = r.arrangement.len();
    let n = r.points.len();
    for i in 1..m {
        if (1..n).any(|k| s.get(0, k) * s.get(i, k) != s.get(0, 0) * s.get(i, 0)) {
            return None;
        }
    }
    let points: Vec<ProjectivePoint> = r
        .points
        .iter()
        .enumerate()
        .map(|(k, q)| if s.get(0, k) < 0 { q.negated() } else { *q })
        .collect();
    let camera_signs = (0..m)
        .map(|i| if n == 0 { 1 } else { s.get(0, 0) * s.get(i, 0) })
        .collect();
    Some(SignedReconstruction {
        reconstruction: r.with_points(points).ok()?,
        camera_signs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UpgradeSystem {
    /// Centers and points on the same side of the plane sent to infinity.
    SameSide,
    /// Centers and points on opposite sides.
    OppositeSide,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpgradeStatus {
    Upgradable {
        homography: Homography,
        system: UpgradeSystem,
        /// Optimal margin with every row strict; 0 when only a boundary
        /// witness exists.
        margin: f64,
        /// The witness annihilates some world point, which is then sent to
        /// infinity.
        on_boundary: bool,
    },
    NotSignable,
    ConesDisjoint,
}

/// Both LP outcomes, kept as the certificate of the decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpgradeCertificate {
    pub same_side: FeasibilityResult,
    pub opposite_side: FeasibilityResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpgradeResult {
    pub status: UpgradeStatus,
    pub certificate: Option<UpgradeCertificate>,
}

impl UpgradeResult {
    pub fn is_upgradable(&self) -> bool {
        matches!(self.status, UpgradeStatus::Upgradable { .. })
    }

    pub fn homography(&self) -> Option<&Homography> {
        match &self.status {
            UpgradeStatus::Upgradable { homography, .. } => Some(homography),
            _ => None,
        }
    }
}

/// A homography with last row `h`, its other rows an orthonormal basis of
/// `h`-perp, and `sign(det H) = det_sign`.
pub fn complete_homography(h: &Vector4<f64>, det_sign: f64) -> Result<Homography, GeometryError> {
    let u = h.normalize();
    let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let w = u - e4;
    // Householder reflection sending e4 to u; identity when they coincide.
    let p = if w.norm() < 1e-12 {
        Matrix4::identity()
    } else {
        let w = w.normalize();
        Matrix4::identity() - 2.0 * w * w.transpose()
    };
    let mut m = Matrix4::zeros();
    for r in 0..3 {
        m.set_row(r, &p.column(r).transpose());
    }
    m.set_row(3, &h.transpose());
    if m.determinant() * det_sign < 0.0 {
        let r0 = -m.row(0);
        m.set_row(0, &r0);
    }
    Homography::new(m)
}

fn system_problem(
    s: &SignedReconstruction,
    negate_centers: bool,
    all_strict: bool,
    tol: f64,
) -> Result<FeasibilityProblem, LpError> {
    let sign = if negate_centers { -1.0 } else { 1.0 };
    let centers: Vec<Vector4<f64>> = s.signed_centers().into_iter().map(|c| c * sign).collect();
    let points: Vec<Vector4<f64>> = s.points().iter().map(|q| *q.coords()).collect();
    let p = if all_strict {
        FeasibilityProblem::new(Vec::new(), centers.into_iter().chain(points).collect(), Vec::new())?
    } else {
        FeasibilityProblem::new(Vec::new(), centers, points)?
    };
    Ok(p.with_tolerance(tol))
}

/// Decides whether a signed reconstruction is projectively equivalent to a
/// chiral one and, if so, returns a homography that makes it chiral.
pub fn chiral_upgrade(s: &SignedReconstruction) -> Result<UpgradeResult, ReconstructionError> {
    let tol = s.arrangement().tolerances().sign;
    let same = solve_feasibility(&system_problem(s, false, false, tol)?)?;
    let opposite = solve_feasibility(&system_problem(s, true, false, tol)?)?;
    let certificate = UpgradeCertificate {
        same_side: same.clone(),
        opposite_side: opposite.clone(),
    };
    let pick = match (same.is_strict(), opposite.is_strict()) {
        (false, false) => {
            return Ok(UpgradeResult {
                status: UpgradeStatus::ConesDisjoint,
                certificate: Some(certificate),
            })
        }
        (true, false) => (UpgradeSystem::SameSide, &same),
        (false, true) => (UpgradeSystem::OppositeSide, &opposite),
        (true, true) => {
            if same.eps >= opposite.eps {
                (UpgradeSystem::SameSide, &same)
            } else {
                (UpgradeSystem::OppositeSide, &opposite)
            }
        }
    };
    let (system, chosen) = pick;
    let negate = system == UpgradeSystem::OppositeSide;
    // Prefer a witness strictly inside the point cone; fall back to the
    // boundary one when no such witness exists.
    let interior = solve_feasibility(&system_problem(s, negate, true, tol)?)?;
    let (h, margin, on_boundary) = if interior.is_strict() {
        (interior.witness.expect("strict witness"), interior.eps.unwrap_or(0.0), false)
    } else {
        (chosen.witness.expect("strict witness"), 0.0, true)
    };
    let det_sign = if negate { -1.0 } else { 1.0 };
    let homography = complete_homography(&h, det_sign)?;
    let upgraded = s.reconstruction().transformed(&homography).map_err(|e| {
        ReconstructionError::VerificationFailed(format!("transformed cameras are not valid: {e}"))
    })?;
    if !verify_chiral(&upgraded) {
        return Err(ReconstructionError::VerificationFailed(
            "transformed points are not all in the chiral domain".into(),
        ));
    }
    Ok(UpgradeResult {
        status: UpgradeStatus::Upgradable {
            homography,
            system,
            margin,
            on_boundary,
        },
        certificate: Some(certificate),
    })
}

/// Signs, then decides the upgrade.
pub fn upgrade(r: &ProjectiveReconstruction) -> Result<UpgradeResult, ReconstructionError> {
    match try_sign(r) {
        Some(s) => chiral_upgrade(&s),
        None => Ok(UpgradeResult {
            status: UpgradeStatus::NotSignable,
            certificate: None,
        }),
    }
}

/// `h` in the dual of `cone(X)` or of `cone(-X)`; interiors when `strict`.
pub fn is_quasi_affine(h: &Homography, x: &[Vector4<f64>], strict: bool, tol: f64) -> bool {
    let row = h.last_row();
    let nh = row.norm();
    let side = |s: f64| {
        x.iter().all(|v| {
            let d = s * row.dot(v);
            let band = tol * nh * v.norm();
            if strict {
                d > band
            } else {
                d >= -band
            }
        })
    };
    side(1.0) || side(-1.0)
}

/// `(n_1^T q_k)(n_2^T q_k)` has one sign over all points.
pub fn two_view_upgradable(r: &ProjectiveReconstruction) -> Result<bool, ReconstructionError> {
    let m = r.arrangement().len();
    if m != 2 {
        return Err(ReconstructionError::NotTwoView(m));
    }
    let s = sign_matrix(r)?;
    let products: Vec<i8> = (0..r.points().len()).map(|k| s.get(0, k) * s.get(1, k)).collect();
    Ok(products.windows(2).all(|w| w[0] == w[1]))
}

/// The domain is nonempty and no point is outside it.
pub fn verify_chiral(r: &ProjectiveReconstruction) -> bool {
    let a = r.arrangement();
    a.is_nonempty() && r.points().iter().all(|q| a.contains(q) != DomainClassification::Outside)
}

/// The finite transformed cameras of an upgrade, normalized so that
/// `det G > 0`.
pub fn upgraded_cameras(r: &ProjectiveReconstruction, h: &Homography) -> Result<Vec<FiniteCamera>, ReconstructionError> {
    r.arrangement()
        .cameras()
        .iter()
        .map(|c| {
            let out = apply_homography(c, h)?;
            Ok(if out.det_g() < 0.0 { out.scaled(-1.0)? } else { out })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Tolerances;
    use nalgebra::Matrix3;

    fn pt(c: [f64; 4]) -> ProjectivePoint {
        ProjectivePoint::from_array(c).unwrap()
    }

    fn three_view() -> ProjectiveReconstruction {
        let cams = vec![
            FiniteCamera::from_rows([[0.0, 0.0, -1.0, -1.0], [0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0]]).unwrap(),
            FiniteCamera::from_rows([[1.0, 0.0, 0.0, -1.0], [0.0, 0.0, -1.0, 1.0], [0.0, 1.0, 0.0, 0.0]]).unwrap(),
            FiniteCamera::from_rows([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]]).unwrap(),
        ];
        let a = CameraArrangement::new(cams, Tolerances::default()).unwrap();
        ProjectiveReconstruction::from_points(a, vec![pt([1.0, 1.0, 2.0, -6.0]), pt([1.0, 1.0, 2.0, 6.0])]).unwrap()
    }

    fn two_view(points: Vec<ProjectivePoint>) -> ProjectiveReconstruction {
        let a2 = FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(1.0, 1.0, 1.0)).unwrap();
        let a = CameraArrangement::new(vec![FiniteCamera::identity(), a2], Tolerances::default()).unwrap();
        ProjectiveReconstruction::from_points(a, points).unwrap()
    }

    #[test]
    fn three_view_counterexample() {
        let r = three_view();
        let centers: Vec<_> = r.arrangement().centers().iter().map(|c| *c.coords()).collect();
        assert_eq!(centers[1], Vector4::new(1.0, 0.0, 1.0, 1.0));
        assert_eq!(sign_matrix(&r).unwrap().rows(), &[vec![1, 1], vec![1, 1], vec![1, 1]]);
        let s = try_sign(&r).unwrap();
        assert_eq!(s.camera_signs(), &[1, 1, 1]);
        assert!(!verify_chiral(&r));
        let res = chiral_upgrade(&s).unwrap();
        assert_eq!(res.status, UpgradeStatus::ConesDisjoint);
        assert!(!r.arrangement().centers_collinear());
    }

    #[test]
    fn already_chiral_reconstruction_upgrades_to_itself() {
        let r = two_view(vec![pt([0.0, 0.0, 1.0, 1.0]), pt([0.5, -0.5, 3.0, 1.0])]);
        assert!(verify_chiral(&r));
        let res = upgrade(&r).unwrap();
        let UpgradeStatus::Upgradable { homography, system, .. } = &res.status else {
            panic!("{res:?}")
        };
        assert_eq!(*system, UpgradeSystem::SameSide);
        assert!(is_quasi_affine(homography, &[Vector4::new(0.0, 0.0, 1.0, 1.0)], true, 1e-9));
        assert!(verify_chiral(&r.transformed(homography).unwrap()));
    }

    #[test]
    fn sign_matrix_rejects_principal_plane() {
        let a = CameraArrangement::new(vec![FiniteCamera::identity()], Tolerances::default()).unwrap();
        let r = ProjectiveReconstruction::from_points(a.clone(), vec![pt([0.0, 0.0, 1.0, 1.0])]).unwrap();
        assert_eq!(sign_matrix(&r).unwrap().rows(), &[vec![1]]);
        let r = ProjectiveReconstruction::from_points(a.clone(), vec![pt([1.0, 0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(
            sign_matrix(&r),
            Err(ReconstructionError::PointOnPrincipalPlane { camera: 0, point: 0 })
        );
        assert!(ProjectiveReconstruction::from_points(a, vec![pt([0.0, 0.0, 0.0, 1.0])]).is_err());
    }

    #[test]
    fn signing_flips_points() {
        // Camera rays n1 = (0,0,1,0), n2 = (0,0,1,1): choose points with signs (+,-,+) in both.
        let r = two_view(vec![pt([0.0, 0.0, 1.0, 1.0]), pt([0.0, 0.0, -2.0, 1.0]), pt([1.0, 0.0, 3.0, 1.0])]);
        let sm = sign_matrix(&r).unwrap();
        assert_eq!(sm.rows(), &[vec![1, -1, 1], vec![1, -1, 1]]);
        let s = try_sign(&r).unwrap();
        assert_eq!(s.points()[1].coords(), &Vector4::new(0.0, 0.0, 2.0, -1.0));
        assert_eq!(s.camera_signs(), &[1, 1]);
        assert!(two_view_upgradable(&r).unwrap());
        assert!(upgrade(&r).unwrap().is_upgradable());
    }

    #[test]
    fn unsignable_two_view() {
        // Products (+, -): second point in front of camera 1 only.
        let r = two_view(vec![pt([0.0, 0.0, 1.0, 1.0]), pt([0.0, 0.0, -0.5, 1.0])]);
        assert_eq!(sign_matrix(&r).unwrap().rows(), &[vec![1, -1], vec![1, 1]]);
        assert!(try_sign(&r).is_none());
        assert!(!two_view_upgradable(&r).unwrap());
        assert_eq!(upgrade(&r).unwrap().status, UpgradeStatus::NotSignable);
    }

    #[test]
    fn single_point_two_view() {
        let r = two_view(vec![pt([3.0, 1.0, -7.0, 1.0])]);
        assert!(two_view_upgradable(&r).unwrap());
        assert!(upgrade(&r).unwrap().is_upgradable());
    }

    #[test]
    fn quasi_affine_examples() {
        let id = Homography::identity();
        let finite = [Vector4::new(1.0, 2.0, 3.0, 1.0), Vector4::new(-1.0, 0.0, 5.0, 1.0)];
        assert!(is_quasi_affine(&id, &finite, true, 1e-9));
        let mixed = [Vector4::new(0.0, 0.0, 0.0, 1.0), Vector4::new(0.0, 0.0, 0.0, -1.0)];
        assert!(!is_quasi_affine(&id, &mixed, false, 1e-9));
        let q = [Vector4::new(1.0, 1.0, 2.0, -6.0), Vector4::new(1.0, 1.0, 2.0, 6.0)];
        assert!(!is_quasi_affine(&id, &q, false, 1e-9));
    }

    #[test]
    fn verify_chiral_examples() {
        assert!(verify_chiral(&two_view(vec![pt([0.0, 0.0, 1.0, 1.0])])));
        assert!(verify_chiral(&two_view(vec![])));
    }

    #[test]
    fn correspondences_are_checked() {
        let r = two_view(vec![pt([0.0, 0.0, 1.0, 1.0])]);
        let c = r.correspondences().unwrap();
        assert_eq!(c.entries(), &[vec![[0.0, 0.0]], vec![[0.5, 0.5]]]);
        let ok = ProjectiveReconstruction::new(r.arrangement().clone(), r.points().to_vec(), &c).unwrap();
        assert_eq!(ok.scale(1, 0), 2.0);
        let bad = Correspondences::new(vec![vec![[0.0, 0.0]], vec![[0.5, 0.6]]]).unwrap();
        assert_eq!(
            ProjectiveReconstruction::new(r.arrangement().clone(), r.points().to_vec(), &bad).unwrap_err(),
            ReconstructionError::Inconsistent { camera: 1, point: 0 }
        );
    }

    #[test]
    fn completion_has_requested_orientation() {
        for h in [Vector4::new(0.0, 0.0, 0.0, 1.0), Vector4::new(0.0, 0.0, 0.0, -2.0), Vector4::new(1.0, -2.0, 0.5, 0.3)] {
            for s in [1.0, -1.0] {
                let hm = complete_homography(&h, s).unwrap();
                assert_eq!(hm.last_row(), h);
                assert!(hm.matrix().determinant() * s > 0.0);
                let top = hm.matrix().fixed_view::<3, 4>(0, 0).into_owned();
                assert!((top * top.transpose() - Matrix3::identity()).amax() < 1e-12);
                assert!((top * h).amax() < 1e-12);
            }
        }
        let id = complete_homography(&Vector4::new(0.0, 0.0, 0.0, 1.0), 1.0).unwrap();
        assert_eq!(id.matrix(), &Matrix4::identity());
    }
}
