mod common;

use chiralkit::oracle::{random_camera, random_finite_point, random_nonempty_arrangement, sample_point};
use chiralkit::projective::depth;
use chiralkit::{CameraArrangement, DomainClassification, ProjectivePoint, Tolerances};
use common::{rng, seeds};
use nalgebra::{DMatrix, Vector4};
use proptest::prelude::*;
use rand::Rng;

fn boundary_point(a: &CameraArrangement, witness: &Vector4<f64>, outside: &Vector4<f64>) -> Option<Vector4<f64>> {
    // First zero of the linear forms along witness -> outside.
    let d = outside - witness;
    let forms: Vec<Vector4<f64>> = std::iter::once(Vector4::new(0.0, 0.0, 0.0, 1.0)).chain(a.rays().iter().copied()).collect();
    let s = forms
        .iter()
        .filter_map(|n| {
            let (f0, f1) = (n.dot(witness), n.dot(&d));
            (f1 < 0.0).then(|| -f0 / f1)
        })
        .filter(|s| *s > 0.0 && *s < 1.0)
        .fold(f64::INFINITY, f64::min);
    s.is_finite().then(|| witness + d * s)
}

#[test]
fn boundary_points_are_limits_of_interior_points() {
    let mut r = rng(201);
    let mut perturbations = 0;
    while perturbations < 10_000 {
        let m = r.gen_range(1..=3);
        let a = random_nonempty_arrangement(&mut r, m);
        let w = *a.nonempty_witness().witness.unwrap().coords();
        let p = *random_finite_point(&mut r).coords();
        let Some(q) = boundary_point(&a, &w, &p) else { continue };
        let q = ProjectivePoint::new(q).unwrap();
        assert_eq!(a.contains(&q), DomainClassification::Boundary);
        for t in [10.0, 100.0, 1000.0] {
            let moved = ProjectivePoint::new(q.coords() + w / t).unwrap();
            assert_eq!(a.contains(&moved), DomainClassification::Interior);
            perturbations += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn membership_ignores_scale(seed in seeds(), lambda in -4.0f64..4.0, mu in -4.0f64..4.0) {
        prop_assume!(lambda.abs() > 1e-2 && mu.abs() > 1e-2);
        let mut r = rng(seed);
        let m = r.gen_range(1..=3);
        let a = random_nonempty_arrangement(&mut r, m);
        let i = r.gen_range(0..m);
        let mut cams = a.cameras().to_vec();
        cams[i] = cams[i].scaled(lambda).unwrap();
        let b = CameraArrangement::new(cams, Tolerances::default()).unwrap();
        for k in 0..20 {
            let q = sample_point(&mut r, k);
            let qs = ProjectivePoint::new(q.coords() * mu).unwrap();
            prop_assert_eq!(a.contains(&q), b.contains(&qs));
        }
    }
}

#[test]
fn independent_rays_give_nonempty_domains() {
    let mut r = rng(203);
    let mut checked = 0;
    while checked < 500 {
        let m = r.gen_range(1..=3);
        let cams = (0..m).map(|_| random_camera(&mut r)).collect();
        let Ok(a) = CameraArrangement::new(cams, Tolerances::default()) else { continue };
        let n = DMatrix::from_fn(4, m + 1, |row, c| if c < m { a.rays()[c][row] } else { f64::from(row == 3) });
        let sv = n.singular_values();
        if sv.min() < 1e-6 * sv.max() {
            continue;
        }
        assert!(a.is_nonempty());
        checked += 1;
    }
}

#[test]
fn interior_is_positive_depth_everywhere() {
    let mut r = rng(205);
    let mut interior = 0;
    for k in 0..10_000 {
        let m = 1 + k % 3;
        let a = random_nonempty_arrangement(&mut r, m);
        let q = random_finite_point(&mut r);
        let positive = a.cameras().iter().all(|c| depth(&q, c).unwrap() > 0.0);
        let inside = a.contains(&q) == DomainClassification::Interior;
        assert_eq!(positive, inside);
        interior += usize::from(inside);
    }
    assert!(interior > 500);
}
