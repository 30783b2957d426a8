//! Projected fast gradient method for the nearest Hurwitz-admissible pair:
//! minimize `‖A − (J−R)Q‖²_F + μ‖E − TQ‖²_F` over `T, R ⪰ 0`, `J` skew.

use std::time::Instant;

use crate::dh::{self, DhParam};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::region::LmiRegion;
use crate::solve::{self, SolveResult, TraceRecorder};

pub use crate::dh::objective;

#[derive(Clone, Copy, Debug)]
pub struct FgmOptions {
    pub mu: f64,
    pub max_time_s: f64,
    pub max_iters: usize,
    /// Initial step; `None` uses `1/L̂` from a power iteration at the start point.
    pub initial_step: Option<f64>,
    pub backtrack: f64,
    pub growth: f64,
    /// Stop when the best objective improves by less than
    /// `stall_tol·(1 + best)` over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    /// Stop when the gradient mapping `‖x − P(x − η∇f(x))‖/η` (with `η = 1/L̂`
    /// at the start) is below `grad_tol·(1 + ‖E‖² + ‖A‖²)`; checked every 1000 iterations.
    pub grad_tol: f64,
}

impl Default for FgmOptions {
    fn default() -> Self {
        Self {
            mu: 1.0,
            max_time_s: 30.0,
            max_iters: 10_000_000,
            initial_step: None,
            backtrack: 0.5,
            growth: 1.2,
            stall_window: 20_000,
            stall_tol: 1e-12,
            grad_tol: 1e-12,
        }
    }
}

/// Structured Euclidean gradient `(∇T, ∇J, ∇R, ∇Q)`.
pub fn gradient(e: &Mat, a: &Mat, d: &DhParam, mu: f64) -> DhParam {
    let k = &d.j - &d.r;
    let res_a = a - &k * &d.q;
    let res_e = e - &d.t * &d.q;
    let ga = &res_a * d.q.transpose();
    let ge = &res_e * d.q.transpose();
    DhParam {
        t: linalg::sym(&ge) * (-2.0 * mu),
        j: linalg::skew(&ga) * -2.0,
        r: linalg::sym(&ga) * 2.0,
        q: k.transpose() * &res_a * -2.0 - d.t.transpose() * &res_e * (2.0 * mu),
    }
}

/// Feasible-set projection: PSD clipping of `T`, `R`, skew part of `J`.
pub fn project(d: &DhParam) -> DhParam {
    DhParam {
        t: linalg::project_psd(&d.t),
        j: linalg::skew(&d.j),
        r: linalg::project_psd(&d.r),
        q: d.q.clone(),
    }
}

/// `Q = I`, `T = clipPSD(E)`, `J = skew(A)`, `R = clipPSD(−sym(A))`.
pub fn initial_point(e: &Mat, a: &Mat) -> DhParam {
    let n = e.nrows();
    DhParam {
        t: linalg::project_psd(e),
        j: linalg::skew(a),
        r: linalg::project_psd(&-linalg::sym(a)),
        q: Mat::identity(n, n),
    }
}

fn axpy(x: &DhParam, s: f64, y: &DhParam) -> DhParam {
    DhParam { t: &x.t + &y.t * s, j: &x.j + &y.j * s, r: &x.r + &y.r * s, q: &x.q + &y.q * s }
}

fn sub(x: &DhParam, y: &DhParam) -> DhParam {
    axpy(x, -1.0, y)
}

fn inner(x: &DhParam, y: &DhParam) -> f64 {
    x.t.dot(&y.t) + x.j.dot(&y.j) + x.r.dot(&y.r) + x.q.dot(&y.q)
}

fn norm2(x: &DhParam) -> f64 {
    inner(x, x)
}

fn is_finite(x: &DhParam) -> bool {
    [&x.t, &x.j, &x.r, &x.q].iter().all(|m| m.iter().all(|v| v.is_finite()))
}

/// Largest eigenvalue of `2·JacᵀJac` of the residual map at `x`, by power
/// iteration started from `x` itself so that the estimate is basis-invariant.
fn lipschitz_estimate(x: &DhParam, mu: f64) -> f64 {
    let sq = mu.sqrt();
    let k = &x.j - &x.r;
    let apply = |v: &DhParam| -> DhParam {
        // Jac·v = [(v_J − v_R)Q + K v_Q ; √μ(v_T Q + T v_Q)]
        let ra = (&v.j - &v.r) * &x.q + &k * &v.q;
        let re = (&v.t * &x.q + &x.t * &v.q) * sq;
        // Jacᵀ·(ra, re) projected onto the structured spaces.
        let gq = x.q.transpose();
        DhParam {
            t: linalg::sym(&(&re * &gq)) * sq,
            j: linalg::skew(&(&ra * &gq)),
            r: -linalg::sym(&(&ra * &gq)),
            q: k.transpose() * &ra + x.t.transpose() * &re * sq,
        }
    };
    let mut v = x.clone();
    let mut nv = norm2(&v).sqrt();
    if nv == 0.0 {
        let n = x.n();
        v = DhParam {
            t: Mat::identity(n, n),
            j: Mat::zeros(n, n),
            r: Mat::identity(n, n),
            q: Mat::identity(n, n),
        };
        nv = norm2(&v).sqrt();
    }
    v = axpy(&v, 1.0 / nv - 1.0, &v);
    let mut lam = 0.0;
    for _ in 0..50 {
        let w = apply(&v);
        lam = inner(&v, &w);
        let nw = norm2(&w).sqrt();
        if nw == 0.0 {
            break;
        }
        v = axpy(&w, 1.0 / nw - 1.0, &w);
    }
    2.0 * lam.max(1e-12)
}

pub fn solve_hurwitz(e: &Mat, a: &Mat, opts: FgmOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let n = linalg::require_square(e, "E")?;
    linalg::require_dim(a, n, "A")?;
    if !(opts.mu > 0.0 && opts.mu.is_finite()) {
        return Err(Error::Numerical(format!("penalty mu must be positive, got {}", opts.mu)));
    }
    let mu = opts.mu;
    let f = |d: &DhParam| dh::objective(e, a, d, mu);
    let rel = |d: &DhParam| {
        let p = d.realize_unchecked();
        solve::relative_error(e, a, &p.e, &p.a).unwrap_or(f64::NAN)
    };

    let mut x = initial_point(e, a);
    let mut fx = f(&x);
    let mut best = x.clone();
    let mut fbest = fx;
    let mut rec = TraceRecorder::new(start);
    rec.offer(fbest, || rel(&best), true);

    let mut step = opts.initial_step.unwrap_or_else(|| 1.0 / lipschitz_estimate(&x, mu));
    let eta0 = step;
    let mut alpha = 1.0f64;
    let mut y = x.clone();
    let mut iters = 0;
    let mut stall_ref = fbest;
    let mut stall_iter = 0;
    let scale = 1.0 + e.norm_squared() + a.norm_squared();

    while iters < opts.max_iters && rec.elapsed() < opts.max_time_s {
        iters += 1;
        if iters - stall_iter >= opts.stall_window || step < 1e-12 * eta0 {
            break;
        }
        let fy = f(&y);
        let gy = gradient(e, a, &y, mu);
        // Backtracking on the quadratic upper model at y.
        let mut x_new;
        let mut f_new;
        loop {
            x_new = project(&axpy(&y, -step, &gy));
            f_new = f(&x_new);
            let dlt = sub(&x_new, &y);
            let model = fy + inner(&gy, &dlt) + norm2(&dlt) / (2.0 * step);
            if f_new <= model + 1e-15 * scale || step < 1e-30 {
                break;
            }
            step *= opts.backtrack;
        }
        if !f_new.is_finite() || !is_finite(&x_new) {
            return Err(Error::Numerical(format!("non-finite iterate at iteration {iters}")));
        }
        if f_new > fx {
            // Drop momentum and restart from the current iterate.
            y = x.clone();
            alpha = 1.0;
            step *= opts.backtrack;
            continue;
        }
        let x_prev = std::mem::replace(&mut x, x_new);
        fx = f_new;
        let alpha_next = 0.5 * (1.0 + (1.0 + 4.0 * alpha * alpha).sqrt());
        let beta = (alpha - 1.0) / alpha_next;
        alpha = alpha_next;
        y = axpy(&x, beta, &sub(&x, &x_prev));
        step *= opts.growth;

        if fx < fbest {
            fbest = fx;
            best = x.clone();
        }
        rec.offer(fbest, || rel(&best), false);

        if fbest < stall_ref - opts.stall_tol * (1.0 + stall_ref) {
            stall_ref = fbest;
            stall_iter = iters;
        }
        if fbest <= 1e-30 * scale {
            break;
        }
        if iters % 1000 == 0 {
            let gx = gradient(e, a, &x, mu);
            let mapped = project(&axpy(&x, -eta0, &gx));
            if norm2(&sub(&x, &mapped)).sqrt() / eta0 <= opts.grad_tol * scale {
                break;
            }
        }
    }
    solve::assemble_result("fgm", e, a, &best, &LmiRegion::hurwitz(), mu, iters, rec, Vec::new())
}
