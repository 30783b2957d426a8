//! Helpers shared by the integration tests: random matrices, a sampler of
//! points in the Table-1 feasible set, and an admissibility re-check that does
//! not go through the crate's own QZ path.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use omega_dh::linalg::Mat;
use omega_dh::pencil::MatrixPair;
use omega_dh::region::{stability_lmi_blocks, LmiRegion, RegionPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn skew(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn lambda_min(m: &Mat) -> f64 {
    sym(m).symmetric_eigenvalues().min()
}

/// `U·diag(d)·V` with random orthogonal factors and `d ∈ [0.5, 2]`.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let u = randn(rng, n, n).qr().q();
    let v = randn(rng, n, n).qr().q();
    let d = Mat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0)));
    u * d * v
}

/// One representative of every primitive.
pub fn all_primitives() -> Vec<RegionPrimitive> {
    use RegionPrimitive::*;
    vec![
        LeftConicSector { a: -0.2, theta: 0.9 },
        RightConicSector { a: -3.0, theta: 0.6 },
        Disk { q: -1.5, r: 1.0 },
        VerticalStrip { h: -4.0, k: -0.5 },
        LeftHalfPlane { k: -0.3 },
        RightHalfPlane { h: -2.0 },
        Ellipsoid { q_e: -2.0, a_e: 1.5, b_e: 0.8 },
        LeftParabola { q_p: -0.5, c_p: 1.0 },
        RightParabola { q_p: -3.0, c_p: 0.5 },
        LeftHyperbola { a_h: 0.5, b_h: 0.5 },
        RightHyperbola { a_h: 0.5, b_h: 1.0 },
        HorizontalStrip { w: 1.5 },
    ]
}

/// Smallest eigenvalue of the Table-1 blocks over all parts of `region`.
pub fn table_margin(region: &LmiRegion, t: &Mat, j: &Mat, r: &Mat) -> f64 {
    region
        .primitives()
        .iter()
        .map(|p| lambda_min(&stability_lmi_blocks(p, t, j, r).unwrap()))
        .fold(f64::INFINITY, f64::min)
}

pub struct FeasibleSampler {
    pub region: LmiRegion,
    pub require_r_pd: bool,
}

impl FeasibleSampler {
    fn feasible(&self, t: &Mat, j: &Mat, r: &Mat) -> bool {
        lambda_min(t) >= 0.0
            && (!self.require_r_pd || lambda_min(r) > 0.0)
            && table_margin(&self.region, t, j, r) > 0.0
    }

    /// Random walk inside the (open, convex) feasible set of `(T, J, R)`,
    /// started at `(I, 0, −x·I)` for an interior real point `x`. Each move
    /// picks a random direction and a uniform fraction of the largest
    /// feasible step along it.
    pub fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> (Mat, Mat, Mat) {
        let x = self.region.interior_real_point().expect("nonempty region");
        let mut t = Mat::identity(n, n);
        let mut j = Mat::zeros(n, n);
        let mut r = Mat::identity(n, n) * -x;
        assert!(self.feasible(&t, &j, &r), "start point must be feasible");
        for _ in 0..4 {
            let dt = sym(&randn(rng, n, n));
            let dj = skew(&randn(rng, n, n)) * 2.0;
            let dr = sym(&randn(rng, n, n));
            let at = |s: f64| (&t + &dt * s, &j + &dj * s, &r + &dr * s);
            let mut hi = 1.0;
            while hi < 64.0 && {
                let (a, b, c) = at(hi);
                self.feasible(&a, &b, &c)
            } {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                let (a, b, c) = at(mid);
                if self.feasible(&a, &b, &c) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (a, b, c) = at(lo * rng.random_range(0.05..0.95));
            if self.feasible(&a, &b, &c) {
                (t, j, r) = (a, b, c);
            }
        }
        // Occasionally try to drop the smallest eigenvalue of T, giving a singular E.
        if rng.random_bool(0.25) {
            let eig = sym(&t).symmetric_eigen();
            let (k, _) = eig.eigenvalues.argmin();
            let v = eig.eigenvectors.column(k).clone_owned();
            let ts = &t - &v * v.transpose() * eig.eigenvalues[k];
            if self.feasible(&ts, &j, &r) {
                t = sym(&ts);
            }
        }
        (t, j, r)
    }
}

/// Outcome of the independent admissibility re-check.
#[derive(Debug)]
pub struct Recheck {
    pub regular: bool,
    pub rank_e: usize,
    pub num_finite: usize,
    pub eigenvalues: Vec<Complex64>,
    /// Largest `λ_max(f_Ω(λ))` over finite eigenvalues (negative is inside).
    pub worst_lambda_max: f64,
}

impl Recheck {
    pub fn admissible(&self, slack: f64) -> bool {
        self.regular && self.rank_e == self.num_finite && self.worst_lambda_max <= slack
    }
}

fn hermitian_lambda_max(m: &DMatrix<Complex<f64>>) -> f64 {
    // Real embedding [[Re, −Im], [Im, Re]] has the same eigenvalues, doubled.
    let s = m.nrows();
    let mut big = Mat::zeros(2 * s, 2 * s);
    for i in 0..s {
        for k in 0..s {
            let z = m[(i, k)];
            big[(i, k)] = z.re;
            big[(i + s, k + s)] = z.re;
            big[(i, k + s)] = -z.im;
            big[(i + s, k)] = z.im;
        }
    }
    sym(&big).symmetric_eigenvalues().max()
}

/// `f_Ω(z) = B + Cz + Cᵀz̄` evaluated from the raw region matrices.
pub fn f_omega(region: &LmiRegion, z: Complex64) -> DMatrix<Complex<f64>> {
    let b = region.b().map(|v| Complex::new(v, 0.0));
    let c = region.c().map(|v| Complex::new(v, 0.0));
    let ct = region.c().transpose().map(|v| Complex::new(v, 0.0));
    b + c * z + ct * z.conj()
}

/// Regularity from the conditioning of `A − σE` at shifts `σ`, finite
/// eigenvalues from the spectrum of `(A − σE)⁻¹E` (`μ ↦ σ + 1/μ`, `μ = 0` is
/// infinite), `rank(E)` from its singular values, margins from `f_Ω`.
pub fn recheck(p: &MatrixPair, region: &LmiRegion) -> Recheck {
    let (e, a) = (&p.e, &p.a);
    let scale = e.norm() + a.norm();
    let sv = e.clone().svd(false, false).singular_values;
    // Numerical rank with the standard `n·ε·σ_max` cutoff.
    let rank_tol = e.nrows() as f64 * f64::EPSILON * sv.max();
    let rank_e = sv.iter().filter(|&&s| s > rank_tol).count();
    let shifts = [0.6180339887, -1.3247179572, 2.2360679775, -0.4142135624];
    let mut best: Option<(f64, f64)> = None;
    for &sigma in &shifts {
        let m = a - e * sigma;
        let s = m.clone().svd(false, false).singular_values;
        let rel = s.min() / scale.max(1e-300);
        if best.is_none_or(|(r, _)| rel > r) {
            best = Some((rel, sigma));
        }
    }
    let (rel, sigma) = best.unwrap();
    if rel < 1e-12 {
        return Recheck { regular: false, rank_e, num_finite: 0, eigenvalues: vec![], worst_lambda_max: f64::INFINITY };
    }
    let k = (a - e * sigma).lu().solve(e).expect("A − σE invertible");
    let mus = k.complex_eigenvalues();
    let mu_scale = mus.iter().map(|m| m.norm()).fold(0.0, f64::max).max(1e-300);
    let mut eigenvalues = Vec::new();
    for m in mus.iter() {
        if m.norm() > 1e-8 * mu_scale {
            let mu = Complex64::new(m.re, m.im);
            eigenvalues.push(Complex64::new(sigma, 0.0) + Complex64::new(1.0, 0.0) / mu);
        }
    }
    let worst = eigenvalues
        .iter()
        .map(|&z| hermitian_lambda_max(&f_omega(region, z)))
        .fold(f64::NEG_INFINITY, f64::max);
    Recheck { regular: true, rank_e, num_finite: eigenvalues.len(), eigenvalues, worst_lambda_max: worst }
}
