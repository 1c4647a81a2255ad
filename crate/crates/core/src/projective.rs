//! Projective points, finite cameras, homographies and the depth/chirality
//! primitives the rest of the crate is built on.
//!
//! The affine chart is fixed: the plane at infinity has normal
//! `n_inf = (0, 0, 0, 1)`. Camera centers are always stored with the
//! representative `(-G^-1 t, 1)`; every other point keeps the representative
//! the caller supplied, since all chirality quantities are invariant under
//! rescaling.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector3, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point has no nonzero finite coordinate")]
    ZeroPoint,
    #[error("non-finite coordinate in input")]
    NotFinite,
    #[error("camera is not finite (|det G| = {det:e})")]
    SingularCamera { det: f64 },
    #[error("homography is singular (|det H| = {det:e})")]
    SingularHomography { det: f64 },
    #[error("point lies on the plane at infinity")]
    InfinitePoint,
    #[error("point coincides with the camera center")]
    CenterPoint,
    #[error("camera centers coincide")]
    CoincidentCenters,
    #[error("homography sends the camera center to infinity")]
    InfiniteResultCamera,
}

/// Sign with a tolerance band around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Sign of `value`, reporting `Zero` when `|value| <= tol * scale`.
    pub fn banded(value: f64, scale: f64, tol: f64) -> Sign {
        if value.abs() <= tol * scale {
            Sign::Zero
        } else if value > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match self.as_i8() * other.as_i8() {
            1 => Sign::Positive,
            -1 => Sign::Negative,
            _ => Sign::Zero,
        }
    }
}

/// Normal of the plane at infinity.
pub fn infinity_normal() -> Vector4<f64> {
    Vector4::new(0.0, 0.0, 0.0, 1.0)
}

/// True when `u` and `v` span the same line, tested through the 2x2 minors
/// `u_i v_j - u_j v_i` rather than coordinate division.
pub(crate) fn rank_one<const D: usize>(
    u: &nalgebra::SVector<f64, D>,
    v: &nalgebra::SVector<f64, D>,
    tol: f64,
) -> bool {
    let scale = u.norm() * v.norm();
    if scale == 0.0 {
        return false;
    }
    for i in 0..D {
        for j in (i + 1)..D {
            if (u[i] * v[j] - u[j] * v[i]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

fn check_finite(values: &[f64]) -> Result<(), GeometryError> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NotFinite)
    }
}

/// A point of P^3, held as one of its R^4 representatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint(Vector4<f64>);

impl ProjectivePoint {
    pub fn new(coords: Vector4<f64>) -> Result<Self, GeometryError> {
        check_finite(coords.as_slice())?;
        if coords.amax() == 0.0 {
            return Err(GeometryError::ZeroPoint);
        }
        Ok(Self(coords))
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(Vector4::from(c))
    }

    /// The affine point `(x, 1)`.
    pub fn from_affine(x: Vector3<f64>) -> Self {
        Self(x.push(1.0))
    }

    pub fn coords(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn w(&self) -> f64 {
        self.0[3]
    }

    /// `|q4| > tol * ||q||`.
    pub fn is_finite_point(&self, tol: f64) -> bool {
        self.0[3].abs() > tol * self.0.norm()
    }

    /// Representative with last coordinate 1, if the point is finite.
    pub fn normalized(&self, tol: f64) -> Option<Self> {
        self.is_finite_point(tol).then(|| Self(self.0 / self.0[3]))
    }

    /// Dehomogenized world point.
    pub fn euclidean(&self, tol: f64) -> Option<Vector3<f64>> {
        self.normalized(tol).map(|p| p.0.xyz())
    }

    pub fn negated(&self) -> Self {
        Self(-self.0)
    }

    /// Scale-invariant equality in P^3.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        rank_one(&self.0, &other.0, tol)
    }
}

/// A point of P^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint(Vector3<f64>);

impl ImagePoint {
    pub fn new(coords: Vector3<f64>) -> Result<Self, GeometryError> {
        check_finite(coords.as_slice())?;
        if coords.amax() == 0.0 {
            return Err(GeometryError::ZeroPoint);
        }
        Ok(Self(coords))
    }

    pub fn from_array(c: [f64; 3]) -> Result<Self, GeometryError> {
        Self::new(Vector3::from(c))
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        rank_one(&self.0, &other.0, tol)
    }
}

/// A finite projective camera `A = [G | t]` with `det G != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCamera {
    matrix: Matrix3x4<f64>,
    g_inv: Matrix3<f64>,
    det_g: f64,
}

impl FiniteCamera {
    pub fn new(matrix: Matrix3x4<f64>) -> Result<Self, GeometryError> {
        Self::with_tolerance(matrix, Tolerances::default().det)
    }

    /// Finiteness test is `|det G| > tol_det * ||G||_F^3`.
    pub fn with_tolerance(matrix: Matrix3x4<f64>, tol_det: f64) -> Result<Self, GeometryError> {
        check_finite(matrix.as_slice())?;
        let g: Matrix3<f64> = matrix.fixed_view::<3, 3>(0, 0).into_owned();
        let det_g = g.determinant();
        let scale = g.norm().powi(3);
        if !(det_g.abs() > tol_det * scale) || scale == 0.0 {
            return Err(GeometryError::SingularCamera { det: det_g.abs() });
        }
        let g_inv = g
            .try_inverse()
            .ok_or(GeometryError::SingularCamera { det: det_g.abs() })?;
        Ok(Self {
            matrix,
            g_inv,
            det_g,
        })
    }

    /// Row-major constructor.
    pub fn from_rows(rows: [[f64; 4]; 3]) -> Result<Self, GeometryError> {
        let m = Matrix3x4::from_fn(|r, c| rows[r][c]);
        Self::new(m)
    }

    /// `[G | t]` from its blocks.
    pub fn from_parts(g: Matrix3<f64>, t: Vector3<f64>) -> Result<Self, GeometryError> {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&g);
        m.set_column(3, &t);
        Self::new(m)
    }

    pub fn identity() -> Self {
        Self::from_parts(Matrix3::identity(), Vector3::zeros()).expect("identity camera")
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> [[f64; 4]; 3] {
        let m = &self.matrix;
        std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
    }

    pub fn g(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn g_inv(&self) -> &Matrix3<f64> {
        &self.g_inv
    }

    pub fn t(&self) -> Vector3<f64> {
        self.matrix.column(3).into_owned()
    }

    pub fn det_g(&self) -> f64 {
        self.det_g
    }

    /// `-G^-1 t`, the center in world coordinates.
    pub fn center_euclidean(&self) -> Vector3<f64> {
        -(self.g_inv * self.t())
    }

    /// The center with representative `(-G^-1 t, 1)`.
    pub fn center(&self) -> ProjectivePoint {
        ProjectivePoint(self.center_euclidean().push(1.0))
    }

    /// `det(G) * A_3^T`, the oriented normal of the principal plane.
    pub fn principal_ray(&self) -> Vector4<f64> {
        self.det_g * self.matrix.row(2).transpose()
    }

    /// `G^-1 t`; differences of these give baseline directions.
    pub fn g_inv_t(&self) -> Vector3<f64> {
        self.g_inv * self.t()
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self, GeometryError> {
        Self::new(self.matrix * lambda)
    }

    pub fn apply(&self, q: &Vector4<f64>) -> Vector3<f64> {
        self.matrix * q
    }
}

/// An invertible 4x4 transformation of P^3.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography {
    matrix: Matrix4<f64>,
    inverse: Matrix4<f64>,
    inv_det: f64,
}

impl Homography {
    pub fn new(matrix: Matrix4<f64>) -> Result<Self, GeometryError> {
        check_finite(matrix.as_slice())?;
        let det = matrix.determinant();
        let scale = matrix.amax().powi(4);
        if !(det.abs() > Tolerances::default().det * scale) {
            return Err(GeometryError::SingularHomography { det: det.abs() });
        }
        let inverse = matrix
            .try_inverse()
            .ok_or(GeometryError::SingularHomography { det: det.abs() })?;
        Ok(Self {
            matrix,
            inverse,
            inv_det: 1.0 / det,
        })
    }

    pub fn identity() -> Self {
        Self::new(Matrix4::identity()).expect("identity")
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix4<f64> {
        &self.inverse
    }

    /// Last row `h`; the plane `h^T q = 0` is sent to infinity.
    pub fn last_row(&self) -> Vector4<f64> {
        self.matrix.row(3).transpose()
    }

    /// `det(H^-1)`.
    pub fn inv_det(&self) -> f64 {
        self.inv_det
    }

    pub fn apply_point(&self, q: &ProjectivePoint) -> ProjectivePoint {
        ProjectivePoint(self.matrix * q.0)
    }

    pub fn compose(&self, other: &Homography) -> Result<Homography, GeometryError> {
        Homography::new(self.matrix * other.matrix)
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let m = &self.matrix;
        std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
    }
}

/// Signed distance of `q` in front of `camera` along its principal ray.
pub fn depth(q: &ProjectivePoint, camera: &FiniteCamera) -> Result<f64, GeometryError> {
    let tol = Tolerances::default().sign;
    if !q.is_finite_point(tol) {
        return Err(GeometryError::InfinitePoint);
    }
    if q.equivalent(&camera.center(), tol) {
        return Err(GeometryError::CenterPoint);
    }
    let g3 = camera.matrix.fixed_view::<1, 3>(2, 0).norm();
    let n = camera.principal_ray();
    Ok(n.dot(q.coords()) / (camera.det_g.abs() * g3 * q.w()))
}

/// `sign((n_A^T q)(n_inf^T q))`, each factor banded relative to its scale.
pub fn chirality_sign(q: &ProjectivePoint, camera: &FiniteCamera, tol: f64) -> Sign {
    let n = camera.principal_ray();
    let qn = q.coords().norm();
    let s_ray = Sign::banded(n.dot(q.coords()), n.norm() * qn, tol);
    let s_inf = Sign::banded(q.w(), qn, tol);
    s_ray.times(s_inf)
}

/// Image of the center of `other` in `camera`.
pub fn epipole(camera: &FiniteCamera, other: &FiniteCamera) -> Result<ImagePoint, GeometryError> {
    let tol = Tolerances::default().lin;
    if camera.center().equivalent(&other.center(), tol) {
        return Err(GeometryError::CoincidentCenters);
    }
    ImagePoint::new(camera.apply(other.center().coords())).map_err(|_| GeometryError::CoincidentCenters)
}

/// Image of `q` together with the raw third coordinate `A_3 q`.
pub fn project(camera: &FiniteCamera, q: &ProjectivePoint) -> Result<(ImagePoint, f64), GeometryError> {
    let tol = Tolerances::default().lin;
    let image = camera.apply(q.coords());
    if image.norm() <= tol * camera.matrix.norm() * q.coords().norm() {
        return Err(GeometryError::CenterPoint);
    }
    Ok((ImagePoint(image), image[2]))
}

/// The transformed camera `A H^-1`.
pub fn apply_homography(camera: &FiniteCamera, h: &Homography) -> Result<FiniteCamera, GeometryError> {
    let tol = Tolerances::default().sign;
    let c = camera.center();
    let hrow = h.last_row();
    if hrow.dot(c.coords()).abs() <= tol * hrow.norm() * c.coords().norm() {
        return Err(GeometryError::InfiniteResultCamera);
    }
    let out = FiniteCamera::new(camera.matrix * h.inverse)
        .map_err(|_| GeometryError::InfiniteResultCamera)?;
    debug_assert!({
        // n_{AH^-1}^T (H q) = delta (h^T c_A)(n_A^T q), checked on a basis.
        let k = h.inv_det * hrow.dot(c.coords());
        let lhs = h.matrix.transpose() * out.principal_ray();
        let rhs = camera.principal_ray() * k;
        (lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm())
    });
    Ok(out)
}

/// Cross-product matrix `[v]_x`.
pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::RowVector4;

    fn train_camera() -> FiniteCamera {
        FiniteCamera::from_rows([[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]])
            .unwrap()
    }

    fn shifted() -> FiniteCamera {
        FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(1.0, 1.0, 1.0)).unwrap()
    }

    fn pt(c: [f64; 4]) -> ProjectivePoint {
        ProjectivePoint::from_array(c).unwrap()
    }

    #[test]
    fn depth_examples() {
        let a = FiniteCamera::identity();
        assert_relative_eq!(depth(&pt([0.0, 0.0, 5.0, 1.0]), &a).unwrap(), 5.0);
        assert_relative_eq!(depth(&pt([0.0, 0.0, -5.0, 1.0]), &a).unwrap(), -5.0);
        assert_relative_eq!(depth(&pt([0.0, 0.0, 1.0, 1.0]), &train_camera()).unwrap(), -1.0);
    }

    #[test]
    fn depth_matches_projection_onto_principal_axis() {
        // Oracle: (q~ - c~) . (unit principal direction in R^3).
        let cams = [FiniteCamera::identity(), train_camera(), shifted()];
        let q = pt([0.3, -2.0, 4.0, 2.0]);
        for a in &cams {
            let n = a.principal_ray();
            let dir = n.xyz() / n.xyz().norm();
            let expect = (q.euclidean(1e-12).unwrap() - a.center_euclidean()).dot(&dir);
            assert_relative_eq!(depth(&q, a).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn depth_errors() {
        let a = FiniteCamera::identity();
        assert_eq!(depth(&pt([1.0, 0.0, 0.0, 0.0]), &a), Err(GeometryError::InfinitePoint));
        assert_eq!(depth(&pt([0.0, 0.0, 0.0, 3.0]), &a), Err(GeometryError::CenterPoint));
    }

    #[test]
    fn chirality_examples() {
        let tol = 1e-9;
        let a = FiniteCamera::identity();
        assert_eq!(chirality_sign(&pt([0.0, 0.0, 5.0, 1.0]), &a, tol), Sign::Positive);
        assert_eq!(chirality_sign(&pt([1.0, 0.0, 0.0, 0.0]), &a, tol), Sign::Zero);
        assert_eq!(chirality_sign(&pt([0.0, 0.0, 1.0, 1.0]), &train_camera(), tol), Sign::Negative);
    }

    #[test]
    fn center_examples() {
        assert_eq!(FiniteCamera::identity().center().coords(), &Vector4::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(train_camera().center().coords(), &Vector4::new(0.0, 1.0, 0.0, 1.0));
        let c = shifted().center();
        assert_eq!(c.coords(), &Vector4::new(-1.0, -1.0, -1.0, 1.0));
        assert!(shifted().apply(c.coords()).norm() < 1e-12);
    }

    #[test]
    fn epipole_examples() {
        let a1 = FiniteCamera::identity();
        let a2 = shifted();
        assert_eq!(epipole(&a1, &a2).unwrap().coords(), &Vector3::new(-1.0, -1.0, -1.0));
        assert_eq!(epipole(&a2, &a1).unwrap().coords(), &Vector3::new(1.0, 1.0, 1.0));
        assert_eq!(epipole(&a1, &a1), Err(GeometryError::CoincidentCenters));
    }

    #[test]
    fn project_examples() {
        let (p, s) = project(&FiniteCamera::identity(), &pt([1.0, 2.0, 3.0, 1.0])).unwrap();
        assert_eq!(p.coords(), &Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(s, 3.0);
        let (p, s) = project(&shifted(), &pt([0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(p.coords(), &Vector3::new(1.0, 1.0, 2.0));
        assert_eq!(s, 2.0);
        assert_eq!(
            project(&FiniteCamera::identity(), &pt([0.0, 0.0, 0.0, 1.0])),
            Err(GeometryError::CenterPoint)
        );
    }

    #[test]
    fn homography_examples() {
        let a = FiniteCamera::identity();
        let id = Homography::identity();
        assert_eq!(apply_homography(&a, &id).unwrap(), a);
        assert_eq!(id.inv_det(), 1.0);
        assert_eq!(id.last_row(), infinity_normal());

        let flip = Homography::new(Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0))).unwrap();
        let out = apply_homography(&a, &flip).unwrap();
        // delta (h^T c_A) = (-1)(-1) = 1, H^-T n_A = (0, 0, 1, 0).
        assert_eq!(out.principal_ray(), Vector4::new(0.0, 0.0, 1.0, 0.0));

        let mut m = Matrix4::identity();
        m.set_row(3, &RowVector4::new(0.0, 0.0, 1.0, 0.0));
        m.set_row(2, &RowVector4::new(0.0, 0.0, 0.0, 1.0));
        let to_inf = Homography::new(m).unwrap();
        assert_eq!(apply_homography(&a, &to_inf), Err(GeometryError::InfiniteResultCamera));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert_eq!(ProjectivePoint::from_array([0.0; 4]), Err(GeometryError::ZeroPoint));
        assert!(FiniteCamera::from_rows([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 1.0]]).is_err());
        assert!(Homography::new(Matrix4::zeros()).is_err());
    }

    #[test]
    fn projective_equality_is_scale_free() {
        let p = pt([1.0, 2.0, 3.0, 4.0]);
        let q = pt([-2.0, -4.0, -6.0, -8.0]);
        assert!(p.equivalent(&q, 1e-12));
        assert!(!p.equivalent(&pt([1.0, 2.0, 3.0, 4.1]), 1e-9));
    }
}
