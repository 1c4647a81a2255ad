#![allow(dead_code)]

use chiralkit::oracle::trial_rng;
use chiralkit::{CameraArrangement, FiniteCamera, ProjectivePoint, ProjectiveReconstruction, Tolerances};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn pt(c: [f64; 4]) -> ProjectivePoint {
    ProjectivePoint::from_array(c).unwrap()
}

pub fn cam(rows: [[f64; 4]; 3]) -> FiniteCamera {
    FiniteCamera::from_rows(rows).unwrap()
}

pub fn arrangement(cams: Vec<FiniteCamera>) -> CameraArrangement {
    CameraArrangement::new(cams, Tolerances::default()).unwrap()
}

/// `[I | 0]` and `[I | (1,1,1)]`.
pub fn ex_cji() -> CameraArrangement {
    let a2 = FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(1.0, 1.0, 1.0)).unwrap();
    arrangement(vec![FiniteCamera::identity(), a2])
}

/// Two cameras facing each other along a common axis.
pub fn train() -> CameraArrangement {
    arrangement(vec![
        FiniteCamera::identity(),
        cam([[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]),
    ])
}

/// Principal rays `-e1`, `e1 - e2`, `e2 - e3`, `e3 - e4`.
pub fn four_ray() -> CameraArrangement {
    arrangement(vec![
        cam([[0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]),
        cam([[1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [1.0, -1.0, 0.0, 0.0]]),
        cam([[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 2.0], [0.0, 1.0, -1.0, 0.0]]),
        FiniteCamera::from_parts(Matrix3::identity(), Vector3::new(0.0, 0.0, -1.0)).unwrap(),
    ])
}

/// Signed but not upgradable: three cameras, two points.
pub fn three_view_gap() -> ProjectiveReconstruction {
    let a = arrangement(vec![
        cam([[0.0, 0.0, -1.0, -1.0], [0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0]]),
        cam([[1.0, 0.0, 0.0, -1.0], [0.0, 0.0, -1.0, 1.0], [0.0, 1.0, 0.0, 0.0]]),
        cam([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]]),
    ]);
    ProjectiveReconstruction::from_points(a, vec![pt([1.0, 1.0, 2.0, -6.0]), pt([1.0, 1.0, 2.0, 6.0])]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, 0)
}

pub fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}
