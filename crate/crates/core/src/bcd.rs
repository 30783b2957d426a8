//! Extrapolated block coordinate descent for general LMI regions: a
//! least-squares update of `Q` alternates with the convex `(T, J, R)`
//! subproblem solved by [`crate::sdp`].

use std::time::Instant;

use nalgebra::SVD;

use crate::dh::{self, DhParam};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::region::LmiRegion;
use crate::sdp::{self, ConvexSubproblem, SdpOptions};
use crate::solve::{self, BcdStep, SolveResult, TraceRecorder};

#[derive(Clone, Copy, Debug)]
pub struct BcdOptions {
    pub mu: f64,
    pub max_time_s: f64,
    pub max_outer_iters: usize,
    /// Use the extrapolation weights `β_k = (k−1)/(k+2)`.
    pub extrapolate: bool,
    /// Stop when the relative objective change stays below this over 5 iterations.
    pub stall_tol: f64,
}

impl Default for BcdOptions {
    fn default() -> Self {
        Self { mu: 1.0, max_time_s: 100.0, max_outer_iters: 100_000, extrapolate: true, stall_tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct QUpdate {
    pub q: Mat,
    /// The stacked operator was rank deficient and Tikhonov regularization was used.
    pub regularized: bool,
}

/// `argmin_Q ‖A − (J−R)Q‖²_F + μ‖E − TQ‖²_F`.
pub fn update_q(e: &Mat, a: &Mat, t: &Mat, j: &Mat, r: &Mat, mu: f64) -> Result<QUpdate> {
    let n = linalg::require_square(e, "E")?;
    for (m, name) in [(a, "A"), (t, "T"), (j, "J"), (r, "R")] {
        linalg::require_dim(m, n, name)?;
    }
    let sq = mu.sqrt();
    let mut g = Mat::zeros(2 * n, n);
    g.view_mut((0, 0), (n, n)).copy_from(&(j - r));
    g.view_mut((n, 0), (n, n)).copy_from(&(t * sq));
    let mut rhs = Mat::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(a);
    rhs.view_mut((n, 0), (n, n)).copy_from(&(e * sq));

    let svd = SVD::new(g.clone(), false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax > 0.0 && smin > 1e-10 * smax {
        let svd = SVD::new(g, true, true);
        let q = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Numerical(format!("least-squares solve for Q failed: {e}")))?;
        return Ok(QUpdate { q, regularized: false });
    }
    let scale = (smax * smax).max(1.0);
    let tau = 1e-12 * scale;
    let gtg = g.transpose() * &g + Mat::identity(n, n) * tau;
    let q = gtg
        .cholesky()
        .ok_or_else(|| Error::Numerical("regularized normal equations are not positive definite".into()))?
        .solve(&(g.transpose() * rhs));
    Ok(QUpdate { q, regularized: true })
}

fn extrapolate(x: &DhParam, x_prev: &DhParam, beta: f64) -> DhParam {
    DhParam {
        t: &x.t + (&x.t - &x_prev.t) * beta,
        j: &x.j + (&x.j - &x_prev.j) * beta,
        r: &x.r + (&x.r - &x_prev.r) * beta,
        q: &x.q + (&x.q - &x_prev.q) * beta,
    }
}

fn subproblem(e: &Mat, a: &Mat, q: &Mat, mu: f64, region: &LmiRegion) -> Result<ConvexSubproblem> {
    ConvexSubproblem::new(e.clone(), a.clone(), q.clone(), mu, Some(region.clone()))
}

pub fn solve_general(e: &Mat, a: &Mat, region: &LmiRegion, opts: BcdOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let n = linalg::require_square(e, "E")?;
    linalg::require_dim(a, n, "A")?;
    let mu = opts.mu;
    if region.is_empty() {
        return Err(Error::InfeasibleRegion(
            "the region contains no point; check the primitives of the intersection".into(),
        ));
    }
    let f = |d: &DhParam| dh::objective(e, a, d, mu);
    let rel = |d: &DhParam| {
        let p = d.realize_unchecked();
        solve::relative_error(e, a, &p.e, &p.a).unwrap_or(f64::NAN)
    };
    let scale = a.norm_squared() + mu * e.norm_squared();
    let accuracy = |k: usize| (1e-2 * 0.25f64.powi(k.min(60) as i32)).max(1e-8) * scale.max(1e-300);

    let q0 = Mat::identity(n, n);
    let sp0 = subproblem(e, a, &q0, mu, region)?;
    let s0 = sdp::solve_subproblem(&sp0, None, SdpOptions { accuracy: Some(accuracy(0)), ..Default::default() })?;
    let mut x = DhParam { t: s0.t, j: s0.j, r: s0.r, q: q0 };
    let mut x_prev = x.clone();
    let mut fx = f(&x);
    let mut best = x.clone();
    let mut fbest = fx;
    let mut rec = TraceRecorder::new(start);
    rec.offer(fbest, || rel(&best), true);

    let mut steps = Vec::new();
    let mut history = vec![fx];
    let mut k = 0;
    let mut last_duration = 0.0;
    // Skip an outer step that would not finish inside the budget.
    while k < opts.max_outer_iters && rec.elapsed() + last_duration < opts.max_time_s {
        let step_start = rec.elapsed();
        k += 1;
        let eps = accuracy(k);
        let mut beta = if opts.extrapolate { (k as f64 - 1.0) / (k as f64 + 2.0) } else { 0.0 };
        let mut restarted = false;
        let (x_new, step) = loop {
            // Extrapolated point, shrunk until (T, J, R) is strictly feasible.
            let mut y = x.clone();
            if beta > 0.0 {
                let sp = subproblem(e, a, &x.q, mu, region)?;
                let mut b = beta;
                loop {
                    let cand = extrapolate(&x, &x_prev, b);
                    if sp.min_margin(&cand.t, &cand.j, &cand.r) > 0.0 {
                        y = cand;
                        break;
                    }
                    b *= 0.5;
                    if b < 1e-3 * beta {
                        b = 0.0;
                        break;
                    }
                }
                beta = b;
            }
            let f_start = f(&y);
            let qu = update_q(e, a, &y.t, &y.j, &y.r, mu)?;
            let mut q_regularized = qu.regularized;
            let mut q_new = qu.q;
            if linalg::condition_number(&q_new) > 1e12 {
                // Keep the previous Q rather than step onto a singular one.
                q_new = y.q.clone();
                q_regularized = true;
            }
            let after_q = DhParam { q: q_new.clone(), ..y.clone() };
            let f_after_q = f(&after_q);
            let sp = subproblem(e, a, &q_new, mu, region)?;
            let sol = sdp::solve_subproblem(
                &sp,
                Some((&y.t, &y.j, &y.r)),
                SdpOptions { accuracy: Some(eps), ..Default::default() },
            )?;
            let cand = DhParam { t: sol.t, j: sol.j, r: sol.r, q: q_new };
            let f_cand = f(&cand);
            let step = BcdStep {
                iteration: k,
                objective_start: f_start,
                objective_after_q: f_after_q,
                objective_after_sdp: f_cand,
                sdp_accuracy: eps,
                beta,
                restarted,
                q_regularized,
                sdp_converged: sol.converged,
            };
            if f_cand > fx && beta > 0.0 {
                // Objective went up: drop the momentum and redo the step from x.
                beta = 0.0;
                restarted = true;
                continue;
            }
            break (cand, step);
        };
        steps.push(step);
        last_duration = rec.elapsed() - step_start;
        x_prev = std::mem::replace(&mut x, x_new);
        fx = f(&x);
        if !fx.is_finite() {
            return Err(Error::Numerical(format!("non-finite objective at outer iteration {k}")));
        }
        if fx < fbest {
            fbest = fx;
            best = x.clone();
        }
        rec.offer(fbest, || rel(&best), true);
        history.push(fx);
        if history.len() > 5 {
            let old = history[history.len() - 6];
            if (old - fx).abs() <= opts.stall_tol * old.abs().max(1e-300) {
                break;
            }
        }
    }
    solve::assemble_result("bcd", e, a, &best, region, mu, k, rec, steps)
}

/// Baseline with `Ẽ = E` frozen: `Q = I`, `T = E` fixed, only `(J, R)`
/// optimized. Requires `E` symmetric positive definite.
pub fn solve_e_frozen_baseline(e: &Mat, a: &Mat, region: &LmiRegion, mu: f64) -> Result<SolveResult> {
    let start = Instant::now();
    let n = linalg::require_square(e, "E")?;
    if (e - e.transpose()).norm() > 1e-12 * (1.0 + e.norm()) || !linalg::is_positive_definite(e) {
        return Err(Error::Numerical("the E-frozen baseline needs a symmetric positive definite E".into()));
    }
    let q = Mat::identity(n, n);
    let sp = subproblem(e, a, &q, mu, region)?.with_fixed_t(e.clone());
    let sol = sdp::solve_subproblem(&sp, None, SdpOptions::default())?;
    let d = DhParam { t: sol.t, j: sol.j, r: sol.r, q };
    let mut rec = TraceRecorder::new(start);
    let p = d.realize_unchecked();
    let relerr = solve::relative_error(e, a, &p.e, &p.a)?;
    rec.offer(dh::objective(e, a, &d, mu), || relerr, true);
    solve::assemble_result("e_frozen", e, a, &d, region, mu, 1, rec, Vec::new())
}
