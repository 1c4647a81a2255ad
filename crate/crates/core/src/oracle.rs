//! Brute-force verifiers for the closed-form tests, plus the random fixture
//! generators they run on.
//!
//! Every trial draws its randomness from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream `index`, so reports do not depend on the thread count.

use nalgebra::{Matrix3, Matrix4, UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{CameraArrangement, DomainClassification};
use crate::joint_image::{ca_satisfied, ImageTuple, JointImageError};
use crate::projective::{FiniteCamera, Homography, ProjectivePoint};
use crate::reconstruction::{ProjectiveReconstruction, SignedReconstruction, UpgradeSystem};
use crate::Tolerances;

/// Samples closer than this angle to a baseline are redrawn.
pub const BASELINE_BAND: f64 = 1e-3;
/// Grid spacing used when none is given.
pub const DEFAULT_RESOLUTION: f64 = 0.05;
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("the chiral domain of the arrangement is empty")]
    DomainEmpty,
    #[error("no sample off the baselines after {0} draws")]
    SamplingExhausted(usize),
    #[error(transparent)]
    JointImage(#[from] JointImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleReport {
    pub trials: usize,
    pub agreements: usize,
    /// Largest boundary distance among disagreeing samples; 0 when all agree.
    pub max_violation: f64,
    pub seed: u64,
}

impl SampleReport {
    pub fn disagreements(&self) -> usize {
        self.trials - self.agreements
    }
}

/// Per-trial generator.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_unit_vector4<R: Rng>(rng: &mut R) -> Vector4<f64> {
    loop {
        let v: Vector4<f64> = Vector4::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// `(x, y, z, 1)` with coordinates uniform in `[-10, 10]`.
pub fn random_finite_point<R: Rng>(rng: &mut R) -> ProjectivePoint {
    ProjectivePoint::from_affine(Vector3::from_fn(|_, _| rng.gen_range(-10.0..=10.0)))
}

/// Even indices sample the unit sphere, odd ones finite points.
pub fn sample_point<R: Rng>(rng: &mut R, index: u64) -> ProjectivePoint {
    if index.is_multiple_of(2) {
        ProjectivePoint::new(random_unit_vector4(rng)).expect("unit vector")
    } else {
        random_finite_point(rng)
    }
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let q = random_unit_vector4(rng);
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]))
        .to_rotation_matrix()
        .into_inner()
}

/// Entries of `G` uniform in `[-1, 1]` with `|det G| >= 0.05`, `t` in `[-2, 2]^3`.
pub fn random_camera<R: Rng>(rng: &mut R) -> FiniteCamera {
    loop {
        let g: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
        if g.determinant().abs() < 0.05 {
            continue;
        }
        let t = Vector3::from_fn(|_, _| rng.gen_range(-2.0..=2.0));
        if let Ok(c) = FiniteCamera::from_parts(g, t) {
            return c;
        }
    }
}

/// Random well-conditioned homography.
pub fn random_homography<R: Rng>(rng: &mut R) -> Homography {
    loop {
        let m: Matrix4<f64> = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
        let sv = m.singular_values();
        if sv.min() < 0.1 * sv.max() {
            continue;
        }
        if let Ok(h) = Homography::new(m) {
            return h;
        }
    }
}

/// Random cameras with pairwise well-separated centers and a nonempty domain.
pub fn random_nonempty_arrangement<R: Rng>(rng: &mut R, m: usize) -> CameraArrangement {
    loop {
        let cams: Vec<FiniteCamera> = (0..m).map(|_| random_camera(rng)).collect();
        let centers: Vec<Vector3<f64>> = cams.iter().map(|c| c.center_euclidean()).collect();
        let separated = (0..m).all(|i| ((i + 1)..m).all(|j| (centers[i] - centers[j]).norm() > 0.1));
        if !separated {
            continue;
        }
        if let Ok(a) = CameraArrangement::new(cams, Tolerances::default()) {
            if a.is_nonempty() {
                return a;
            }
        }
    }
}

/// A point of the open chiral domain: a few plain draws first, then a
/// shrinking perturbation of the interior witness.
pub fn random_interior_point<R: Rng>(rng: &mut R, a: &CameraArrangement) -> Option<ProjectivePoint> {
    for k in 0..64 {
        let q = sample_point(rng, k);
        if a.contains(&q) == DomainClassification::Interior {
            return Some(q);
        }
    }
    let w = *a.nonempty_witness().witness?.coords();
    let u = random_unit_vector4(rng) * w.norm();
    let mut s = 1.0;
    for _ in 0..60 {
        let q = ProjectivePoint::new(w + u * s).ok()?;
        if a.contains(&q) == DomainClassification::Interior {
            return Some(q);
        }
        s *= 0.5;
    }
    None
}

/// Two random cameras and `n` points, all in the chiral domain when
/// `chiral`, then moved by a random homography.
pub fn random_two_view_reconstruction<R: Rng>(rng: &mut R, n: usize, chiral: bool) -> ProjectiveReconstruction {
    loop {
        let a = random_nonempty_arrangement(rng, 2);
        let mut points = Vec::with_capacity(n);
        let mut draws = 0;
        while points.len() < n && draws < MAX_REDRAWS {
            draws += 1;
            let q = if chiral {
                match random_interior_point(rng, &a) {
                    Some(q) => q,
                    None => continue,
                }
            } else {
                sample_point(rng, draws as u64)
            };
            if domain_margin(&a, &q) < 1e-6 {
                continue;
            }
            points.push(if rng.gen_bool(0.5) { q.negated() } else { q });
        }
        if points.len() < n {
            continue;
        }
        let h = random_homography(rng);
        let Ok(r) = ProjectiveReconstruction::from_points(a, points) else {
            continue;
        };
        if let Ok(moved) = r.transformed(&h) {
            return moved;
        }
    }
}

/// Smallest normalized `|q4|`, `|n_i^T q|`.
pub fn domain_margin(a: &CameraArrangement, q: &ProjectivePoint) -> f64 {
    let c = q.coords();
    let nq = c.norm();
    a.rays()
        .iter()
        .map(|n| (n.dot(c) / (n.norm() * nq)).abs())
        .fold((c[3] / nq).abs(), f64::min)
}

/// Signed depth by the textbook route: project the offset from the center
/// onto the unit principal direction `sign(det G) g3 / |g3|`.
pub fn reference_depth(camera: &FiniteCamera, x: &Vector3<f64>) -> f64 {
    let g = camera.g();
    let g3 = g.row(2).transpose();
    let dir = g3 * camera.det_g().signum() / g3.norm();
    dir.dot(&(x - camera.center_euclidean()))
}

fn summarize(seed: u64, outcomes: Vec<Option<f64>>) -> SampleReport {
    let trials = outcomes.len();
    let mut agreements = 0;
    let mut max_violation: f64 = 0.0;
    for o in outcomes {
        match o {
            None => agreements += 1,
            Some(v) => max_violation = max_violation.max(v),
        }
    }
    SampleReport {
        trials,
        agreements,
        max_violation,
        seed,
    }
}

/// Compares "positive depth in every camera" against Interior membership
/// on sampled points. Points at infinity have no depth and are expected to
/// be classified off the interior.
pub fn domain_agreement(a: &CameraArrangement, trials: usize, seed: u64) -> Result<SampleReport, OracleError> {
    if !a.is_nonempty() {
        return Err(OracleError::DomainEmpty);
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let q = sample_point(&mut rng, i);
            let w = q.w();
            let positive = w != 0.0 && {
                let x = q.coords().xyz() / w;
                a.cameras().iter().all(|c| reference_depth(c, &x) > 0.0)
            };
            let interior = a.contains(&q) == DomainClassification::Interior;
            (positive != interior).then(|| domain_margin(a, &q))
        })
        .collect();
    Ok(summarize(seed, outcomes))
}

/// Sine of the angle between `q` and the plane spanned by `c1`, `c2`.
fn angle_to_line(q: &Vector4<f64>, c1: &Vector4<f64>, c2: &Vector4<f64>) -> f64 {
    let u = c1.normalize();
    let v = c2 - u * u.dot(c2);
    let v = v.normalize();
    let p = u * u.dot(q) + v * v.dot(q);
    (q - p).norm() / q.norm()
}

fn near_baseline(a: &CameraArrangement, q: &ProjectivePoint) -> bool {
    let cs = a.centers();
    let qc = q.coords();
    if cs.len() == 1 {
        let c = cs[0].coords();
        let cos = qc.dot(c).abs() / (qc.norm() * c.norm());
        return (1.0 - cos * cos).max(0.0).sqrt() < BASELINE_BAND;
    }
    (0..cs.len()).any(|i| ((i + 1)..cs.len()).any(|j| angle_to_line(qc, cs[i].coords(), cs[j].coords()) < BASELINE_BAND))
}

/// Projects sampled world points and compares `C_A` on the image tuple with
/// closed-domain membership of the source point. With one camera `C_A` is
/// vacuous and every ray meets the domain, so the reference is always true.
pub fn ca_vs_projection(a: &CameraArrangement, trials: usize, seed: u64) -> Result<SampleReport, OracleError> {
    if !a.is_nonempty() {
        return Err(OracleError::DomainEmpty);
    }
    let outcomes: Result<Vec<Option<f64>>, OracleError> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            for _ in 0..MAX_REDRAWS {
                let q = sample_point(&mut rng, i);
                if near_baseline(a, &q) {
                    continue;
                }
                let Ok(p) = ImageTuple::project(a, &q) else {
                    continue;
                };
                let reference = a.len() < 2 || a.contains(&q) != DomainClassification::Outside;
                let ca = ca_satisfied(a, &p)?;
                return Ok((ca != reference).then(|| domain_margin(a, &q)));
            }
            Err(OracleError::SamplingExhausted(MAX_REDRAWS))
        })
        .collect();
    Ok(summarize(seed, outcomes?))
}

/// Best point found by a grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHit {
    pub h: Vector4<f64>,
    /// Minimum of `row^T h` over unit rows; `h` has max-norm 1.
    pub margin: f64,
}

/// Points of the boundary of `[-1, 1]^4` whose free coordinates lie on a
/// lattice of the given spacing.
pub fn cube_surface_grid(resolution: f64) -> Vec<Vector4<f64>> {
    let k = (2.0 / resolution).round() as usize;
    let ticks: Vec<f64> = (0..=k).map(|i| -1.0 + 2.0 * i as f64 / k as f64).collect();
    let mut out = Vec::with_capacity(8 * ticks.len().pow(3));
    for axis in 0..4 {
        for side in [-1.0, 1.0] {
            for &a in &ticks {
                for &b in &ticks {
                    for &c in &ticks {
                        let mut free = [a, b, c].into_iter();
                        out.push(Vector4::from_fn(|r, _| if r == axis { side } else { free.next().unwrap() }));
                    }
                }
            }
        }
    }
    out
}

/// Maximizes `min_r row_r^T h` over the grid, rows normalized to unit norm.
/// Returns the best point if its margin is positive.
pub fn grid_best(rows: &[Vector4<f64>], resolution: f64) -> Option<GridHit> {
    let rows: Vec<Vector4<f64>> = rows.iter().map(|r| r.normalize()).collect();
    let grid = cube_surface_grid(resolution);
    grid.par_iter()
        .map(|h| GridHit {
            h: *h,
            margin: rows.iter().map(|r| r.dot(h)).fold(f64::INFINITY, f64::min),
        })
        .reduce_with(|a, b| if b.margin > a.margin { b } else { a })
        .filter(|g| g.margin > 0.0)
}

/// Grid scan for `h` strictly positive on the signed centers (or their
/// negatives) and on every point.
pub fn upgrade_grid_search(s: &SignedReconstruction, resolution: f64) -> Option<(UpgradeSystem, GridHit)> {
    let centers = s.signed_centers();
    let points: Vec<Vector4<f64>> = s.points().iter().map(|q| *q.coords()).collect();
    let rows = |sign: f64| -> Vec<Vector4<f64>> { centers.iter().map(|c| c * sign).chain(points.iter().copied()).collect() };
    let same = grid_best(&rows(1.0), resolution).map(|g| (UpgradeSystem::SameSide, g));
    let opposite = grid_best(&rows(-1.0), resolution).map(|g| (UpgradeSystem::OppositeSide, g));
    match (same, opposite) {
        (Some(a), Some(b)) => Some(if b.1.margin > a.1.margin { b } else { a }),
        (a, b) => a.or(b),
    }
}
