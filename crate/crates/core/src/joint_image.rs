//! Image tuples, the biquadratic inequalities `C_A`, and membership in the
//! chiral joint image.
//!
//! For a pair `(i, j)` write `a_i = G_i^-1 p_i` and
//! `b_ij = G_i^-1 t_i - G_j^-1 t_j`. The tuple `p` satisfies `C_A` when for
//! every ordered pair
//!
//! ```text
//! det(G_i) p_i3 (a_i x a_j)^T (b_ij x a_j)                      >= 0
//! det(G_i) det(G_j) p_i3 p_j3 (b_ij x a_i)^T (b_ij x a_j)       >= 0
//! ```
//!
//! Joint-image membership is decided by triangulation: the stacked
//! equations `[p_i]_x A_i q = 0` must have a one-dimensional solution space.
//! Tuples in the closure that are not images of points (epipoles in all but
//! one slot) are detected explicitly.

use nalgebra::{DMatrix, Vector3, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::domain::{CameraArrangement, DomainClassification};
use crate::projective::{project, skew, FiniteCamera, GeometryError, ImagePoint, ProjectivePoint, Sign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JointImageError {
    #[error("the chiral domain of the arrangement is empty")]
    DomainEmpty,
    #[error("tuple has {got} points, arrangement has {expected} cameras")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation needs at least two cameras")]
    TooFewCameras,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One image point per camera, in arrangement order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTuple {
    points: Vec<ImagePoint>,
}

impl ImageTuple {
    pub fn new(points: Vec<ImagePoint>) -> Self {
        Self { points }
    }

    pub fn from_arrays(points: &[[f64; 3]]) -> Result<Self, GeometryError> {
        points
            .iter()
            .map(|p| ImagePoint::from_array(*p))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    /// `phi_A(q)`; fails when `q` is one of the centers.
    pub fn project(arrangement: &CameraArrangement, q: &ProjectivePoint) -> Result<Self, GeometryError> {
        arrangement
            .cameras()
            .iter()
            .map(|cam| project(cam, q).map(|(p, _)| p))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    pub fn points(&self) -> &[ImagePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A copy with the points reordered: slot `k` of the result is slot
    /// `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self::new(order.iter().map(|&k| self.points[k]).collect())
    }
}

/// Label of the epipole set attached to a center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EpipoleLabel {
    /// The center has positive depth in every other camera.
    EppPlusPlus,
    /// The center is in the chiral domain with zero depth in some camera.
    EZero,
    /// The center is outside the chiral domain.
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CjiStatus {
    ChiralMember,
    /// Epipoles in every slot but one, attached to a center of the chiral domain.
    EpipolePositive(EpipoleLabel),
    /// The image of the common baseline, for collinear centers.
    BaselinePoint,
    NonMember,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CjiClassification {
    pub status: CjiStatus,
    /// Triangulated preimage.
    #[serde(serialize_with = "serialize_opt_point")]
    pub witness: Option<ProjectivePoint>,
    /// Index of the epipole set the tuple was matched to.
    pub epipole_set: Option<usize>,
    /// Normalized triangulation residual.
    pub residual: Option<f64>,
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

/// Result of the stacked cross-product solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub point: ProjectivePoint,
    /// Smallest over largest singular value.
    pub residual: f64,
    /// Second smallest singular value is also in the zero band, so the
    /// solution set is at least a line.
    pub rank_deficient: bool,
}

/// The three inequality values of an unordered pair `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairValues {
    pub i: usize,
    pub j: usize,
    /// `det(G_i) p_i3 (a_i x a_j)^T (b_ij x a_j)`.
    pub forward: f64,
    /// Same with `i` and `j` exchanged.
    pub backward: f64,
    /// `det(G_i) det(G_j) p_i3 p_j3 (b_ij x a_i)^T (b_ij x a_j)`.
    pub joint: f64,
    /// Magnitude scales used for the zero band, in the same order.
    pub scales: [f64; 3],
}

impl PairValues {
    pub fn values(&self) -> [f64; 3] {
        [self.forward, self.backward, self.joint]
    }

    pub fn signs(&self, tol: f64) -> [Sign; 3] {
        let v = self.values();
        std::array::from_fn(|k| Sign::banded(v[k], self.scales[k], tol))
    }
}

fn baseline(ci: &FiniteCamera, cj: &FiniteCamera) -> Vector3<f64> {
    ci.g_inv_t() - cj.g_inv_t()
}

fn back_project(cam: &FiniteCamera, p: &ImagePoint) -> Vector3<f64> {
    cam.g_inv() * p.coords()
}

fn check_len(arrangement: &CameraArrangement, p: &ImageTuple) -> Result<(), JointImageError> {
    if arrangement.len() != p.len() {
        return Err(JointImageError::LengthMismatch {
            expected: arrangement.len(),
            got: p.len(),
        });
    }
    Ok(())
}

/// `b_ij^T (a_i x a_j)`; vanishes on true correspondences.
pub fn epipolar_residual(arrangement: &CameraArrangement, i: usize, j: usize, pi: &ImagePoint, pj: &ImagePoint) -> f64 {
    let cams = arrangement.cameras();
    let ai = back_project(&cams[i], pi);
    let aj = back_project(&cams[j], pj);
    baseline(&cams[i], &cams[j]).dot(&ai.cross(&aj))
}

/// Inequality values for every unordered pair.
pub fn ca_values(arrangement: &CameraArrangement, p: &ImageTuple) -> Result<Vec<PairValues>, JointImageError> {
    check_len(arrangement, p)?;
    let cams = arrangement.cameras();
    let m = cams.len();
    let a: Vec<Vector3<f64>> = cams.iter().zip(p.points()).map(|(c, x)| back_project(c, x)).collect();
    let mut out = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            let b = baseline(&cams[i], &cams[j]);
            let (di, dj) = (cams[i].det_g(), cams[j].det_g());
            let (pi, pj) = (p.points()[i].coords(), p.points()[j].coords());
            let (ai, aj) = (&a[i], &a[j]);
            let bxi = b.cross(ai);
            let bxj = b.cross(aj);
            let axa = ai.cross(aj);
            // b_ji = -b_ij and a_j x a_i = -(a_i x a_j), so the signs cancel.
            let forward = di * pi[2] * axa.dot(&bxj);
            let backward = dj * pj[2] * axa.dot(&bxi);
            let joint = di * dj * pi[2] * pj[2] * bxi.dot(&bxj);
            let (na, nb) = (ai.norm() * aj.norm(), b.norm());
            out.push(PairValues {
                i,
                j,
                forward,
                backward,
                joint,
                scales: [
                    di.abs() * pi.norm() * na * aj.norm() * nb,
                    dj.abs() * pj.norm() * na * ai.norm() * nb,
                    (di * dj).abs() * pi.norm() * pj.norm() * na * nb * nb,
                ],
            });
        }
    }
    Ok(out)
}

/// All inequalities of `C_A` hold up to the sign band.
pub fn ca_satisfied(arrangement: &CameraArrangement, p: &ImageTuple) -> Result<bool, JointImageError> {
    let tol = arrangement.tolerances().sign;
    Ok(ca_values(arrangement, p)?
        .iter()
        .all(|v| v.signs(tol).iter().all(|s| *s != Sign::Negative)))
}

/// Least-squares preimage of `p` from the stacked cross-product equations.
pub fn triangulate(arrangement: &CameraArrangement, p: &ImageTuple) -> Result<Triangulation, JointImageError> {
    check_len(arrangement, p)?;
    let m = arrangement.len();
    if m < 2 {
        return Err(JointImageError::TooFewCameras);
    }
    let mut stack = DMatrix::zeros(3 * m, 4);
    for (k, (cam, x)) in arrangement.cameras().iter().zip(p.points()).enumerate() {
        let px = x.coords() / x.coords().norm();
        let a = cam.matrix() / cam.matrix().norm();
        let block = skew(&px) * a;
        stack.view_mut((3 * k, 0), (3, 4)).copy_from(&block);
    }
    let svd = stack.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let s = |k: usize| svd.singular_values[order[k]];
    let largest = s(0);
    let q = v_t.row(order[3]).transpose();
    let q = Vector4::new(q[0], q[1], q[2], q[3]);
    let tol = arrangement.tolerances().tri;
    Ok(Triangulation {
        point: ProjectivePoint::new(q)?,
        residual: s(3) / largest,
        rank_deficient: s(2) <= tol * largest,
    })
}

/// Labels the epipole set of every center; empty for a single camera.
pub fn classify_epipole_sets(arrangement: &CameraArrangement) -> Result<Vec<EpipoleLabel>, JointImageError> {
    if !arrangement.is_nonempty() {
        return Err(JointImageError::DomainEmpty);
    }
    let m = arrangement.len();
    if m < 2 {
        return Ok(Vec::new());
    }
    let tol = arrangement.tolerances().sign;
    Ok((0..m)
        .map(|j| {
            let c = arrangement.centers()[j].coords();
            let positive = (0..m).filter(|&i| i != j).all(|i| {
                let n = arrangement.rays()[i];
                Sign::banded(n.dot(c), n.norm() * c.norm(), tol) == Sign::Positive
            });
            if positive {
                EpipoleLabel::EppPlusPlus
            } else if arrangement.contains(&arrangement.centers()[j]) != DomainClassification::Outside {
                EpipoleLabel::EZero
            } else {
                EpipoleLabel::Excluded
            }
        })
        .collect())
}

/// The indices `j` for which every slot other than `j` holds the epipole `e_ij`.
pub fn epipole_forms(arrangement: &CameraArrangement, p: &ImageTuple) -> Result<Vec<usize>, JointImageError> {
    check_len(arrangement, p)?;
    let m = arrangement.len();
    let tol = arrangement.tolerances().sign;
    if m < 2 {
        return Ok(Vec::new());
    }
    Ok((0..m)
        .filter(|&j| {
            (0..m).filter(|&i| i != j).all(|i| {
                arrangement
                    .epipole(i, j)
                    .is_some_and(|e| e.equivalent(&p.points()[i], tol))
            })
        })
        .collect())
}

/// The centers span at most a line.
pub fn centers_collinear(arrangement: &CameraArrangement) -> bool {
    arrangement.centers_collinear()
}

/// Decides membership of `p` in the closure of the joint image intersected
/// with `C_A`, and says which part of the decomposition it falls in.
pub fn chiral_joint_image_member(
    arrangement: &CameraArrangement,
    p: &ImageTuple,
) -> Result<CjiClassification, JointImageError> {
    if !arrangement.is_nonempty() {
        return Err(JointImageError::DomainEmpty);
    }
    check_len(arrangement, p)?;
    if arrangement.len() < 2 {
        return Err(JointImageError::TooFewCameras);
    }
    let forms = epipole_forms(arrangement, p)?;
    if forms.len() >= 2 {
        // Matching two epipole sets forces every slot to be a baseline image.
        return Ok(CjiClassification {
            status: CjiStatus::BaselinePoint,
            witness: None,
            epipole_set: None,
            residual: None,
        });
    }
    if let Some(&j) = forms.first() {
        let label = classify_epipole_sets(arrangement)?[j];
        let status = match label {
            EpipoleLabel::Excluded => CjiStatus::NonMember,
            l => CjiStatus::EpipolePositive(l),
        };
        return Ok(CjiClassification {
            status,
            witness: None,
            epipole_set: Some(j),
            residual: None,
        });
    }
    let tri = triangulate(arrangement, p)?;
    let in_joint_image = tri.residual <= arrangement.tolerances().tri;
    let status = if in_joint_image && ca_satisfied(arrangement, p)? {
        CjiStatus::ChiralMember
    } else {
        CjiStatus::NonMember
    };
    Ok(CjiClassification {
        status,
        witness: Some(tri.point),
        epipole_set: None,
        residual: Some(tri.residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    fn pair() -> CameraArrangement {
        let a2 = FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(1.0, 1.0, 1.0)).unwrap();
        CameraArrangement::with_default_tolerances(vec![FiniteCamera::identity(), a2]).unwrap()
    }

    fn img(c: [f64; 3]) -> ImagePoint {
        ImagePoint::from_array(c).unwrap()
    }

    fn tuple(ps: &[[f64; 3]]) -> ImageTuple {
        ImageTuple::from_arrays(ps).unwrap()
    }

    #[test]
    fn epipolar_residual_examples() {
        let a = pair();
        assert_eq!(epipolar_residual(&a, 0, 1, &img([-4.0, 0.0, 1.0]), &img([-3.0, 1.0, 2.0])), 0.0);
        assert_eq!(epipolar_residual(&a, 0, 1, &img([-1.0, -1.0, -1.0]), &img([1.0, 1.0, 1.0])), 0.0);
        assert!(epipolar_residual(&a, 0, 1, &img([-4.0, 0.0, 1.0]), &img([0.0, 0.0, 1.0])).abs() > 1.0);
    }

    #[test]
    fn inequality_values_by_hand() {
        let a = pair();
        let v = ca_values(&a, &tuple(&[[-4.0, 0.0, 1.0], [-3.0, 1.0, 2.0]])).unwrap();
        assert_eq!(v[0].values(), [42.0, 84.0, 84.0]);
        assert!(ca_satisfied(&a, &tuple(&[[-4.0, 0.0, 1.0], [-3.0, 1.0, 2.0]])).unwrap());

        let v = ca_values(&a, &tuple(&[[-4.0, 0.0, 1.0], [9.0, 1.0, -1.0]])).unwrap();
        assert_eq!(v[0].forward, -84.0);
        assert!(!ca_satisfied(&a, &tuple(&[[-4.0, 0.0, 1.0], [9.0, 1.0, -1.0]])).unwrap());

        let e = tuple(&[[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]]);
        assert_eq!(ca_values(&a, &e).unwrap()[0].values(), [0.0, 0.0, 0.0]);
        assert!(ca_satisfied(&a, &e).unwrap());
    }

    #[test]
    fn triangulation_round_trip() {
        let a = pair();
        let q = ProjectivePoint::from_array([-4.0, 0.0, 1.0, 1.0]).unwrap();
        let t = triangulate(&a, &ImageTuple::project(&a, &q).unwrap()).unwrap();
        assert!(t.residual < 1e-12);
        assert!(!t.rank_deficient);
        assert!(t.point.equivalent(&q, 1e-9));

        let t = triangulate(&a, &tuple(&[[-4.0, 0.0, 1.0], [0.0, 0.0, 1.0]])).unwrap();
        assert!(t.residual > 1e-7);
        let t = triangulate(&a, &tuple(&[[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]])).unwrap();
        assert!(t.rank_deficient);
    }

    #[test]
    fn epipole_labels() {
        let a = pair();
        assert_eq!(
            classify_epipole_sets(&a).unwrap(),
            vec![EpipoleLabel::EppPlusPlus, EpipoleLabel::Excluded]
        );
        let single = CameraArrangement::with_default_tolerances(vec![FiniteCamera::identity()]).unwrap();
        assert!(classify_epipole_sets(&single).unwrap().is_empty());

        // Same orientation, second center on the first principal plane.
        let b = FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(-1.0, 0.0, 0.0)).unwrap();
        let side = CameraArrangement::with_default_tolerances(vec![FiniteCamera::identity(), b]).unwrap();
        assert_eq!(classify_epipole_sets(&side).unwrap()[1], EpipoleLabel::EZero);
    }

    #[test]
    fn membership_examples() {
        let a = pair();
        let r = chiral_joint_image_member(&a, &tuple(&[[-4.0, 0.0, 1.0], [-3.0, 1.0, 2.0]])).unwrap();
        assert_eq!(r.status, CjiStatus::ChiralMember);
        assert!(r.witness.unwrap().equivalent(&ProjectivePoint::from_array([-4.0, 0.0, 1.0, 1.0]).unwrap(), 1e-9));

        let r = chiral_joint_image_member(&a, &tuple(&[[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])).unwrap();
        assert_eq!(r.status, CjiStatus::EpipolePositive(EpipoleLabel::EppPlusPlus));
        assert_eq!(r.epipole_set, Some(0));

        let r = chiral_joint_image_member(&a, &tuple(&[[-1.0, -1.0, -1.0], [0.0, 0.0, 1.0]])).unwrap();
        assert_eq!(r.status, CjiStatus::NonMember);
        assert_eq!(r.epipole_set, Some(1));

        let r = chiral_joint_image_member(&a, &tuple(&[[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]])).unwrap();
        assert_eq!(r.status, CjiStatus::BaselinePoint);

        let r = chiral_joint_image_member(&a, &tuple(&[[-4.0, 0.0, 1.0], [9.0, 1.0, -1.0]])).unwrap();
        assert_eq!(r.status, CjiStatus::NonMember);
    }

    #[test]
    fn empty_domain_is_an_error() {
        let a2 = FiniteCamera::from_rows([[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]).unwrap();
        let train = CameraArrangement::with_default_tolerances(vec![FiniteCamera::identity(), a2]).unwrap();
        let p = tuple(&[[0.0, 0.0, 1.0], [0.0, 1.0, 1.0]]);
        assert_eq!(chiral_joint_image_member(&train, &p), Err(JointImageError::DomainEmpty));
    }

    #[test]
    fn collinear_centers() {
        assert!(centers_collinear(&pair()));
    }
}
