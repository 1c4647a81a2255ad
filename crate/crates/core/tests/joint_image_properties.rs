mod common;

use chiralkit::joint_image::{ca_satisfied, ca_values, chiral_joint_image_member, classify_epipole_sets};
use chiralkit::oracle::{random_finite_point, random_nonempty_arrangement, random_unit_vector4, sample_point};
use chiralkit::projective::depth;
use chiralkit::{
    CameraArrangement, CjiStatus, DomainClassification, EpipoleLabel, ImagePoint, ImageTuple, ProjectivePoint,
    Tolerances,
};
use common::{rng, seeds};
use nalgebra::{Vector3, Vector4};
use proptest::prelude::*;
use rand::Rng;

/// Sine of the angle between `q` and the span of two centers.
fn off_baselines(a: &CameraArrangement, q: &ProjectivePoint, band: f64) -> bool {
    let cs = a.centers();
    (0..cs.len()).all(|i| {
        ((i + 1)..cs.len()).all(|j| {
            let m = nalgebra::Matrix4x2::from_columns(&[*cs[i].coords(), *cs[j].coords()]);
            let qr = m.qr();
            let qm = qr.q();
            let x = q.coords();
            let residual = x - qm * (qm.transpose() * x);
            residual.norm() > band * x.norm()
        })
    })
}

#[test]
fn images_of_interior_points_satisfy_the_inequalities() {
    let mut r = rng(301);
    let mut checked = 0;
    while checked < 10_000 {
        let m = r.gen_range(2..=3);
        let a = random_nonempty_arrangement(&mut r, m);
        for k in 0..50 {
            let q = sample_point(&mut r, k);
            if a.contains(&q) != DomainClassification::Interior {
                continue;
            }
            let p = ImageTuple::project(&a, &q).unwrap();
            assert!(ca_satisfied(&a, &p).unwrap());
            checked += 1;
        }
    }
}

#[test]
fn images_of_points_behind_a_camera_fail_off_the_baselines() {
    let mut r = rng(303);
    let mut checked = 0;
    while checked < 10_000 {
        let m = r.gen_range(2..=3);
        let a = random_nonempty_arrangement(&mut r, m);
        for _ in 0..50 {
            let q = random_finite_point(&mut r);
            let behind = a.cameras().iter().any(|c| depth(&q, c).unwrap() < -1e-6);
            if !behind || !off_baselines(&a, &q, 1e-3) {
                continue;
            }
            let p = ImageTuple::project(&a, &q).unwrap();
            assert!(!ca_satisfied(&a, &p).unwrap());
            checked += 1;
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn triple_products_recover_projective_scales(seed in seeds(), l1 in -3.0f64..3.0, l2 in -3.0f64..3.0) {
        prop_assume!(l1.abs() > 1e-2 && l2.abs() > 1e-2);
        let mut r = rng(seed);
        let a = random_nonempty_arrangement(&mut r, 2);
        let q = sample_point(&mut r, seed);
        prop_assume!(off_baselines(&a, &q, 1e-3) && q.w().abs() > 1e-6);
        let cams = a.cameras();
        // A_i q = lambda_i p_i.
        let p1 = cams[0].apply(q.coords()) / l1;
        let p2 = cams[1].apply(q.coords()) / l2;
        let a1 = cams[0].g_inv() * p1;
        let a2 = cams[1].g_inv() * p2;
        let b: Vector3<f64> = cams[0].g_inv_t() - cams[1].g_inv_t();
        let w = q.w();
        prop_assert_eq!(sign(a1.cross(&a2).dot(&b.cross(&a2))), sign(l1 * w));
        prop_assert_eq!(sign(a1.cross(&a2).dot(&b.cross(&a1))), sign(l2 * w));
        prop_assert_eq!(sign(b.cross(&a1).dot(&b.cross(&a2))), sign(l1 * l2));
        // The library inequality values are these products weighted by
        // det(G_i) p_i3, i.e. the depth signs times q4^2.
        let tuple = ImageTuple::new(vec![ImagePoint::new(p1).unwrap(), ImagePoint::new(p2).unwrap()]);
        let v = &ca_values(&a, &tuple).unwrap()[0];
        let d1 = depth(&q, &cams[0]).unwrap();
        let d2 = depth(&q, &cams[1]).unwrap();
        prop_assume!(d1.abs() > 1e-6 && d2.abs() > 1e-6);
        prop_assert_eq!(sign(v.forward), sign(d1));
        prop_assert_eq!(sign(v.backward), sign(d2));
        prop_assert_eq!(sign(v.joint), sign(d1 * d2));
    }

    #[test]
    fn relabeling_cameras_keeps_the_verdict(seed in seeds()) {
        let mut r = rng(seed);
        let a = random_nonempty_arrangement(&mut r, 3);
        let order = [2usize, 0, 1];
        let b = CameraArrangement::new(order.iter().map(|&i| a.cameras()[i].clone()).collect(), Tolerances::default()).unwrap();
        for k in 0..10 {
            let q = sample_point(&mut r, k);
            prop_assume!(off_baselines(&a, &q, 1e-6));
            let p = ImageTuple::project(&a, &q).unwrap();
            prop_assert_eq!(ca_satisfied(&a, &p).unwrap(), ca_satisfied(&b, &p.permuted(&order)).unwrap());
        }
    }
}

#[test]
fn positive_epipole_sets_are_limits_of_chiral_images() {
    let mut r = rng(307);
    let mut seen = 0;
    while seen < 200 {
        let m = r.gen_range(2..=3);
        let a = random_nonempty_arrangement(&mut r, m);
        let labels = classify_epipole_sets(&a).unwrap();
        for (j, label) in labels.iter().enumerate() {
            if *label != EpipoleLabel::EppPlusPlus {
                continue;
            }
            let pj = random_unit_vector4(&mut r).xyz();
            let target: Vec<ImagePoint> = (0..m)
                .map(|i| if i == j { ImagePoint::new(pj).unwrap() } else { *a.epipole(i, j).unwrap() })
                .collect();
            let tuple = ImageTuple::new(target.clone());
            assert_eq!(
                chiral_joint_image_member(&a, &tuple).unwrap().status,
                CjiStatus::EpipolePositive(EpipoleLabel::EppPlusPlus)
            );
            assert!(ca_satisfied(&a, &tuple).unwrap());
            let cj = a.centers()[j].coords();
            // Rescale s by the depth margin of c_j so that |s| < 1 is "small".
            let margin = (0..m)
                .filter(|&i| i != j)
                .map(|i| a.rays()[i].dot(cj) / (a.rays()[i].norm() * cj.norm()))
                .fold(f64::INFINITY, f64::min);
            let raw = a.cameras()[j].g_inv() * pj;
            let dir = raw * (margin * cj.norm() / raw.norm());
            let curve = |s: f64| ProjectivePoint::new(Vector4::new(s * dir.x, s * dir.y, s * dir.z, 0.0) + cj).unwrap();
            let side = [1.0, -1.0].into_iter().find(|sg| {
                [1e-1, 1e-2, 1e-3]
                    .iter()
                    .all(|s| a.contains(&curve(sg * s)) != DomainClassification::Outside)
            });
            let side = side.expect("one side of the curve stays in the domain");
            let mut prev = f64::INFINITY;
            for s in [1e-1, 1e-2, 1e-3] {
                let img = ImageTuple::project(&a, &curve(side * s)).unwrap();
                let gap = (0..m)
                    .filter(|&i| i != j)
                    .map(|i| {
                        let (x, y) = (img.points()[i].coords().normalize(), target[i].coords().normalize());
                        x.cross(&y).norm()
                    })
                    .fold(0.0, f64::max);
                // Linear convergence in s.
                assert!(gap <= 0.2 * prev, "{gap} vs {prev}");
                prev = gap;
                assert!(img.points()[j].equivalent(&target[j], 1e-9));
            }
            seen += 1;
        }
    }
}
