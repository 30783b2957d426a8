mod common;

use num_complex::Complex64;
use omega_dh::dh::{self, DhParam};
use omega_dh::fgm;
use omega_dh::linalg::{self, Mat};
use omega_dh::region;
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| Mat::from_row_slice(n, n, &v))
}

fn param(n: usize) -> impl Strategy<Value = DhParam> {
    (matrix(n), matrix(n), matrix(n), matrix(n)).prop_map(|(t, j, r, q)| DhParam::new(t, j, r, q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psd_projection_is_idempotent_and_psd(m in matrix(4)) {
        let p = linalg::project_psd(&m);
        prop_assert!(common::lambda_min(&p) >= -1e-12 * (1.0 + m.norm()));
        prop_assert!((linalg::project_psd(&p) - &p).norm() <= 1e-12 * (1.0 + m.norm()));
        // Nearest-point property: no PSD matrix on the segment to I is closer.
        let sym = common::sym(&m);
        let d0 = (&sym - &p).norm();
        for s in [0.1, 0.5, 0.9] {
            let other = &p * (1.0 - s) + Mat::identity(4, 4) * s;
            prop_assert!((&sym - other).norm() >= d0 - 1e-12);
        }
    }

    #[test]
    fn projection_lands_in_the_feasible_set(d in param(3)) {
        let p = fgm::project(&d);
        prop_assert!(common::lambda_min(&p.t) >= -1e-12 * (1.0 + d.t.norm()));
        prop_assert!(common::lambda_min(&p.r) >= -1e-12 * (1.0 + d.r.norm()));
        prop_assert!((&p.j + p.j.transpose()).norm() == 0.0);
        prop_assert_eq!(&p.q, &d.q);
        let again = fgm::project(&p);
        prop_assert!((&again.t - &p.t).norm() + (&again.r - &p.r).norm() <= 1e-10 * (1.0 + p.t.norm() + p.r.norm()));
    }

    #[test]
    fn objective_vanishes_on_the_realized_pair(d in param(3), mu in 0.1f64..10.0) {
        let p = d.realize_unchecked();
        prop_assert!(dh::objective(&p.e, &p.a, &d, mu) <= 1e-20 * (1.0 + p.scale()).powi(2));
        let shifted = Mat::identity(3, 3) + &p.e;
        let f = dh::objective(&shifted, &p.a, &d, mu);
        prop_assert!((f - mu * 3.0).abs() <= 1e-9 * (1.0 + f));
    }

    #[test]
    fn membership_is_conjugation_symmetric(re in -10.0f64..10.0, im in -10.0f64..10.0, k in 0usize..12) {
        let p = common::all_primitives()[k];
        let reg = region::from_primitive(p).unwrap();
        let z = Complex64::new(re, im);
        prop_assert_eq!(reg.contains(z), reg.contains(z.conj()));
    }

    #[test]
    fn intersection_is_commutative(re in -6.0f64..6.0, im in -6.0f64..6.0, a in 0usize..12, b in 0usize..12) {
        let prims = common::all_primitives();
        let ra = region::from_primitive(prims[a]).unwrap();
        let rb = region::from_primitive(prims[b]).unwrap();
        let z = Complex64::new(re, im);
        let ab = region::intersect(&ra, &rb).lambda_max_at(z);
        let ba = region::intersect(&rb, &ra).lambda_max_at(z);
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        prop_assert!((ab - ra.lambda_max_at(z).max(rb.lambda_max_at(z))).abs() <= 1e-12 * (1.0 + ab.abs()));
    }

    #[test]
    fn m_hat_is_linear(d1 in param(2), d2 in param(2), s in -3.0f64..3.0, k in 0usize..12) {
        let reg = region::from_primitive(common::all_primitives()[k]).unwrap();
        let m1 = dh::assemble_m_hat(&reg, &d1.t, &d1.j, &d1.r).unwrap();
        let m2 = dh::assemble_m_hat(&reg, &d2.t, &d2.j, &d2.r).unwrap();
        let mix = dh::assemble_m_hat(&reg, &(&d1.t + &d2.t * s), &(&d1.j + &d2.j * s), &(&d1.r + &d2.r * s)).unwrap();
        prop_assert!((mix - (m1 + m2 * s)).norm() <= 1e-10 * (1.0 + mix_scale(&d1, &d2, s)));
    }
}

fn mix_scale(d1: &DhParam, d2: &DhParam, s: f64) -> f64 {
    d1.t.norm() + d1.j.norm() + d1.r.norm() + s.abs() * (d2.t.norm() + d2.j.norm() + d2.r.norm())
}

#[test]
fn projection_examples() {
    let d = DhParam::new(
        Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]),
        Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
        Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        Mat::identity(2, 2),
    )
    .unwrap();
    let p = fgm::project(&d);
    assert_eq!(p.r, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    assert_eq!(p.t, Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    assert_eq!(p.j, Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
}
