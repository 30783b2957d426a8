mod common;

use omega_dh::dh::{self, DhParam};
use omega_dh::linalg::Mat;
use omega_dh::region::{self, stability_lmi_blocks, LmiRegion, RegionPrimitive};
use omega_dh::sdp::{solve_subproblem, ConvexSubproblem, SdpOptions};
use rand::Rng;

/// Kronecker product written out entry by entry.
fn kron_loops(a: &Mat, b: &Mat) -> Mat {
    let (p, q) = (b.nrows(), b.ncols());
    let mut out = Mat::zeros(a.nrows() * p, a.ncols() * q);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn inertia(m: &Mat, tol: f64) -> (usize, usize) {
    let ev = common::sym(m).symmetric_eigenvalues();
    (ev.iter().filter(|&&v| v > tol).count(), ev.iter().filter(|&&v| v < -tol).count())
}

#[test]
fn m_hat_matches_definition() {
    let mut r = common::rng(21);
    let prims = common::all_primitives();
    for _ in 0..20 {
        let a = prims[r.random_range(0..prims.len())];
        let b = prims[r.random_range(0..prims.len())];
        let reg = region::intersect(&region::from_primitive(a).unwrap(), &region::from_primitive(b).unwrap());
        let n = 3;
        let t = common::sym(&common::randn(&mut r, n, n));
        let j = common::skew(&common::randn(&mut r, n, n));
        let rr = common::sym(&common::randn(&mut r, n, n));
        let (bm, cm) = (reg.b(), reg.c());
        let want = kron_loops(bm, &t) + kron_loops(&(cm - cm.transpose()), &j)
            - kron_loops(&(cm + cm.transpose()), &rr);
        let got = dh::assemble_m_hat(&reg, &t, &j, &rr).unwrap();
        assert!((got - want).norm() < 1e-12);
    }
}

#[test]
fn m_is_a_congruence_of_m_hat() {
    let mut r = common::rng(22);
    for p in common::all_primitives() {
        let reg = region::from_primitive(p).unwrap();
        let n = 3;
        let t = common::sym(&common::randn(&mut r, n, n));
        let j = common::skew(&common::randn(&mut r, n, n));
        let rr = common::sym(&common::randn(&mut r, n, n));
        let q = common::well_conditioned(&mut r, n);
        let e = &t * &q;
        let m = dh::assemble_m(&reg, &e, &j, &rr, &q).unwrap();
        let iq = kron_loops(&Mat::identity(reg.size(), reg.size()), &q);
        let want = iq.transpose() * dh::assemble_m_hat(&reg, &t, &j, &rr).unwrap() * &iq;
        assert!((&m - &want).norm() <= 1e-10 * (1.0 + want.norm()), "{p:?}");
    }
}

#[test]
fn table_blocks_have_the_inertia_of_minus_m_hat() {
    let mut r = common::rng(23);
    for p in common::all_primitives() {
        let reg = region::from_primitive(p).unwrap();
        for _ in 0..20 {
            let n = 2;
            let t = common::sym(&common::randn(&mut r, n, n));
            let j = common::skew(&common::randn(&mut r, n, n));
            let rr = common::sym(&common::randn(&mut r, n, n));
            let blocks = stability_lmi_blocks(&p, &t, &j, &rr).unwrap();
            let m_hat = dh::assemble_m_hat(&reg, &t, &j, &rr).unwrap();
            let (pos, neg) = inertia(&blocks, 1e-9);
            let (pos_m, neg_m) = inertia(&m_hat, 1e-9);
            assert_eq!((pos, neg), (neg_m, pos_m), "{p:?}");
        }
    }
}

#[test]
fn realize_and_json_round_trip() {
    let mut r = common::rng(24);
    let n = 4;
    let d = DhParam::new(
        common::sym(&common::randn(&mut r, n, n)),
        common::randn(&mut r, n, n),
        common::randn(&mut r, n, n),
        common::well_conditioned(&mut r, n),
    )
    .unwrap();
    assert!((&d.j + d.j.transpose()).norm() < 1e-15);
    assert!((&d.r - d.r.transpose()).norm() < 1e-15);
    let p = d.realize().unwrap();
    assert!((&p.e - &d.t * &d.q).norm() < 1e-14);
    assert!((&p.a - (&d.j - &d.r) * &d.q).norm() < 1e-14);
    assert_eq!(dh::objective(&p.e, &p.a, &d, 1.0), 0.0);
    let back = DhParam::from_json_str(&d.to_json_string()).unwrap();
    assert_eq!(back, d);
    let mut bad = d.clone();
    bad.q = Mat::zeros(n, n);
    assert!(bad.realize().is_err());
}

#[test]
fn msd_with_psd_damping_is_certified_after_a_shift() {
    let (_, d) = omega_dh::bench::msd(4, 0.0).unwrap();
    let hurwitz = LmiRegion::hurwitz();
    let e = &d.t * &d.q;
    let plain = dh::verify_sufficiency(&hurwitz, &e, &d.j, &d.r, &d.q, 1e-9).unwrap();
    assert!(!plain.certified, "R is singular so the strict test must fail");
    let shifted = &d.r + Mat::identity(8, 8) * 1e-6;
    let v = dh::verify_sufficiency(&hurwitz, &e, &d.j, &shifted, &d.q, 1e-9).unwrap();
    assert!(v.certified && !v.contradiction, "{:?}", v.conditions);
    assert!(v.cross_check.admissible);
}

/// Scalar subproblem on the unit disk: the region LMI reduces to
/// `t − |r| ≥ δ`, so the optimum can be found by brute-force search.
fn disk_grid_oracle(e: f64, a: f64, q: f64, mu: f64, delta: f64) -> f64 {
    let f = |t: f64, r: f64| (a + r * q).powi(2) + mu * (e - t * q).powi(2);
    let (mut tc, mut sc, mut half_t, mut half_s) = (5.0, 0.0, 5.0, 1.0);
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let steps = 200;
        let mut arg = (tc, sc);
        for i in 0..=steps {
            let t = (tc - half_t + 2.0 * half_t * i as f64 / steps as f64).max(delta);
            for k in 0..=steps {
                let s = (sc - half_s + 2.0 * half_s * k as f64 / steps as f64).clamp(-1.0, 1.0);
                let v = f(t, s * (t - delta));
                if v < best {
                    best = v;
                    arg = (t, s);
                }
            }
        }
        (tc, sc) = arg;
        half_t *= 0.1;
        half_s *= 0.1;
    }
    best
}

#[test]
fn scalar_disk_subproblem_matches_grid_search() {
    let mut r = common::rng(25);
    let disk = LmiRegion::unit_disk();
    for _ in 0..25 {
        let (e, a, q) = (r.random_range(-2.0..2.0), r.random_range(-3.0..3.0), r.random_range(0.3..2.0));
        let mu = 1.0;
        let sp = ConvexSubproblem::new(
            Mat::from_element(1, 1, e),
            Mat::from_element(1, 1, a),
            Mat::from_element(1, 1, q),
            mu,
            Some(disk.clone()),
        )
        .unwrap();
        let sol = solve_subproblem(&sp, None, SdpOptions { accuracy: Some(1e-10), ..Default::default() }).unwrap();
        let oracle = disk_grid_oracle(e, a, q, mu, sp.delta_lmi);
        assert!(sol.min_margin() >= 0.0);
        assert!((sol.objective - oracle).abs() <= 1e-6 * (1.0 + oracle), "e={e} a={a} q={q}: {} vs {oracle}", sol.objective);
    }
}

#[test]
fn warm_start_reaches_the_same_optimum() {
    let mut r = common::rng(26);
    let n = 3;
    let reg = region::from_primitive(RegionPrimitive::Disk { q: -1.0, r: 0.8 }).unwrap();
    let sp = ConvexSubproblem::new(
        common::randn(&mut r, n, n),
        common::randn(&mut r, n, n),
        common::well_conditioned(&mut r, n),
        1.0,
        Some(reg),
    )
    .unwrap();
    let opts = SdpOptions { accuracy: Some(1e-9), ..Default::default() };
    let cold = solve_subproblem(&sp, None, opts).unwrap();
    let (t, j, rr) = (&cold.t * 0.9, &cold.j * 1.1, &cold.r * 0.95);
    let warm = solve_subproblem(&sp, Some((&t, &j, &rr)), opts).unwrap();
    assert!(cold.converged && warm.converged);
    assert!((cold.objective - warm.objective).abs() <= 1e-6 * (1.0 + cold.objective));
    assert!(sp.min_margin(&warm.t, &warm.j, &warm.r) > 0.0);
}
