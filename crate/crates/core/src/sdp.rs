//! Log-det barrier path-following solver for the convex `(T, J, R)` subproblem
//! with `Q` fixed:
//!
//! minimize `‖A − (J−R)Q‖²_F + μ‖E − TQ‖²_F`
//! subject to `T ⪰ 0`, optionally `R ⪰ 0`, and `M̂_Ω(T, J, R) ⪯ −δ·I`.
//!
//! Variables live in orthonormal coordinates of the symmetric and
//! skew-symmetric matrix spaces, so the Newton system has dimension
//! `n(n+1) + n(n−1)/2`.

use std::io::Write;

use nalgebra::{Cholesky, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::region::LmiRegion;

type Triplets = Vec<(usize, usize, f64)>;

/// The `(T, J, R)` subproblem for a fixed `Q`.
#[derive(Clone, Debug)]
pub struct ConvexSubproblem {
    pub e: Mat,
    pub a: Mat,
    pub q: Mat,
    pub mu: f64,
    pub region: Option<LmiRegion>,
    /// Enforce `R ⪰ 0`; set when the region lies in the closed left half-plane.
    pub require_r_psd: bool,
    /// The region LMI is imposed as `M̂ ⪯ −delta_lmi·I`.
    pub delta_lmi: f64,
    /// Keep `T` at this value instead of optimizing it.
    pub fixed_t: Option<Mat>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// Target duality gap; default `1e−8·(1 + objective at the start)`.
    pub accuracy: Option<f64>,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { accuracy: None, max_newton: 3000, max_outer: 60 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpTraceRow {
    pub outer: usize,
    pub barrier_t: f64,
    pub objective: f64,
    pub gap: f64,
    pub min_margin: f64,
}

#[derive(Clone, Debug)]
pub struct SubproblemSolution {
    pub t: Mat,
    pub j: Mat,
    pub r: Mat,
    pub objective: f64,
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    /// Duality-gap bound `(Σ block sizes)/t` at the final barrier parameter.
    pub gap: f64,
    /// `‖∇f + ∇φ/t‖` at return, the stationarity residual of the centered point.
    pub kkt_residual: f64,
    /// `(label, λ_min)` of every constraint block at return.
    pub margins: Vec<(String, f64)>,
    pub converged: bool,
    pub trace: Vec<SdpTraceRow>,
}

impl SubproblemSolution {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min)
    }

    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.trace {
            wr.serialize(row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarKind {
    T,
    J,
    R,
}

fn sym_basis(n: usize) -> Vec<Triplets> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        out.push(vec![(i, i, 1.0)]);
        for j in (i + 1)..n {
            out.push(vec![(i, j, s), (j, i, s)]);
        }
    }
    out
}

fn skew_basis(n: usize) -> Vec<Triplets> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(vec![(i, j, s), (j, i, -s)]);
        }
    }
    out
}

fn coord(basis: &Triplets, m: &Mat) -> f64 {
    basis.iter().map(|&(i, j, v)| v * m[(i, j)]).sum()
}

fn dense(basis: &Triplets, n: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    for &(i, j, v) in basis {
        m[(i, j)] += v;
    }
    m
}

/// Nonzeros of `X ⊗ S` for dense `X` and sparse `S` of size `n`.
fn kron_triplets(x: &Mat, s: &Triplets, n: usize) -> Triplets {
    let mut out = Vec::new();
    for bi in 0..x.nrows() {
        for bj in 0..x.ncols() {
            let xv = x[(bi, bj)];
            if xv == 0.0 {
                continue;
            }
            for &(i, j, v) in s {
                out.push((bi * n + i, bj * n + j, xv * v));
            }
        }
    }
    out
}

struct Block {
    label: String,
    f0: Mat,
    /// `(free variable index, coefficient nonzeros)`.
    coeffs: Vec<(usize, Triplets)>,
}

impl Block {
    fn eval(&self, v: &DVector<f64>) -> Mat {
        let mut f = self.f0.clone();
        for (a, tr) in &self.coeffs {
            let va = v[*a];
            if va == 0.0 {
                continue;
            }
            for &(p, q, c) in tr {
                f[(p, q)] += va * c;
            }
        }
        linalg::symmetrize_in_place(&mut f);
        f
    }
}

/// The subproblem compiled to `min ‖b − Lv‖²` s.t. `F_k(v) ⪰ 0`.
struct Compiled {
    n: usize,
    kinds: Vec<VarKind>,
    bases: Vec<Triplets>,
    /// Indices (into `kinds`/`bases`) of the optimized variables.
    free: Vec<usize>,
    fixed_values: Vec<f64>,
    l: Mat,
    b: DVector<f64>,
    h: Mat,
    ltb2: DVector<f64>,
    blocks: Vec<Block>,
    total_dim: usize,
}

impl ConvexSubproblem {
    pub fn new(e: Mat, a: Mat, q: Mat, mu: f64, region: Option<LmiRegion>) -> Result<Self> {
        let n = linalg::require_square(&e, "E")?;
        linalg::require_dim(&a, n, "A")?;
        linalg::require_dim(&q, n, "Q")?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Numerical(format!("penalty mu must be positive, got {mu}")));
        }
        let require_r_psd = region.as_ref().is_none_or(|r| r.in_closed_left_half_plane(1e-9));
        let delta_lmi = 1e-6 * (1.0 + a.norm());
        Ok(Self { e, a, q, mu, region, require_r_psd, delta_lmi, fixed_t: None })
    }

    pub fn with_fixed_t(mut self, t: Mat) -> Self {
        self.fixed_t = Some(linalg::sym(&t));
        self
    }

    /// Smallest eigenvalue over all constraint blocks at `(T, J, R)`; positive
    /// means strictly feasible. With a fixed `T`, the supplied `t` is ignored.
    pub fn min_margin(&self, t: &Mat, j: &Mat, r: &Mat) -> f64 {
        let c = self.compile();
        c.min_margin(&c.to_free(t, j, r))
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn objective(&self, t: &Mat, j: &Mat, r: &Mat) -> f64 {
        let ra = &self.a - (j - r) * &self.q;
        let re = &self.e - t * &self.q;
        ra.norm_squared() + self.mu * re.norm_squared()
    }

    /// A strictly feasible `(T, J, R)`: `T = c·T₀`, `J = 0`, `R = −c·x·T₀` where
    /// `x` is an interior real point of the region and `T₀` is `I` (or the
    /// fixed `T`), so that `M̂ = c·f_Ω(x) ⊗ T₀ ≺ 0`.
    pub fn initial_point(&self) -> Result<(Mat, Mat, Mat)> {
        let n = self.n();
        let t0 = self.fixed_t.clone().unwrap_or_else(|| Mat::identity(n, n));
        let tmin = linalg::lambda_min(&t0);
        let x = match &self.region {
            None => -1.0,
            Some(reg) => reg.interior_real_point().ok_or_else(|| {
                Error::InfeasibleRegion(
                    "the region contains no point; check the primitives of the intersection".into(),
                )
            })?,
        };
        let mut scale = 1.0;
        if let Some(reg) = &self.region {
            let g = reg.lambda_max_at(num_complex::Complex64::new(x, 0.0));
            let depth = -g * tmin;
            if !(depth > 0.0) {
                return Err(Error::InfeasibleStart(format!(
                    "f_Ω({x}) ⊗ T is not negative definite (λ_max(f_Ω) = {g:e}, λ_min(T) = {tmin:e}); \
                     review the region parameters"
                )));
            }
            if self.fixed_t.is_none() {
                scale = (4.0 * self.delta_lmi / depth).max(1.0);
            }
        }
        if self.require_r_psd && x >= 0.0 {
            return Err(Error::InfeasibleStart(format!(
                "R ⪰ 0 is required but the interior point {x} is not in the left half-plane"
            )));
        }
        let t = if self.fixed_t.is_some() { t0.clone() } else { &t0 * scale };
        let r = &t0 * (-x * scale);
        let init = (t, Mat::zeros(n, n), r);
        let c = self.compile();
        let v = c.to_free(&init.0, &init.1, &init.2);
        let margin = c.min_margin(&v);
        if !(margin > 0.0) {
            return Err(Error::InfeasibleStart(format!(
                "default start has constraint margin {margin:e}; review the region parameters"
            )));
        }
        Ok(init)
    }

    fn compile(&self) -> Compiled {
        let n = self.n();
        let sb = sym_basis(n);
        let kb = skew_basis(n);
        let mut kinds = Vec::new();
        let mut bases = Vec::new();
        for (kind, basis) in [(VarKind::T, &sb), (VarKind::J, &kb), (VarKind::R, &sb)] {
            for tr in basis {
                kinds.push(kind);
                bases.push(tr.clone());
            }
        }
        let mtot = kinds.len();
        let fixed_values: Vec<f64> = match &self.fixed_t {
            Some(t) => (0..mtot)
                .map(|a| if kinds[a] == VarKind::T { coord(&bases[a], t) } else { 0.0 })
                .collect(),
            None => vec![0.0; mtot],
        };
        let free: Vec<usize> = (0..mtot)
            .filter(|&a| !(self.fixed_t.is_some() && kinds[a] == VarKind::T))
            .collect();
        let mut index_of = vec![usize::MAX; mtot];
        for (k, &a) in free.iter().enumerate() {
            index_of[a] = k;
        }

        // Objective: b − L_full·v_full with b = [vec A; √μ vec E].
        let sq = self.mu.sqrt();
        let nn = n * n;
        let mut b = DVector::zeros(2 * nn);
        for i in 0..n {
            for j in 0..n {
                b[i + j * n] = self.a[(i, j)];
                b[nn + i + j * n] = sq * self.e[(i, j)];
            }
        }
        let column = |a: usize| -> DVector<f64> {
            let prod = dense(&bases[a], n) * &self.q;
            let mut col = DVector::zeros(2 * nn);
            let (off, s) = match kinds[a] {
                VarKind::T => (nn, sq),
                VarKind::J => (0, 1.0),
                VarKind::R => (0, -1.0),
            };
            for i in 0..n {
                for j in 0..n {
                    col[off + i + j * n] = s * prod[(i, j)];
                }
            }
            col
        };
        let mut l = Mat::zeros(2 * nn, free.len());
        for a in 0..mtot {
            let col = column(a);
            if index_of[a] == usize::MAX {
                b -= col * fixed_values[a];
            } else {
                l.set_column(index_of[a], &col);
            }
        }
        let h = l.transpose() * &l * 2.0;
        let ltb2 = l.transpose() * &b * 2.0;

        let mut blocks = Vec::new();
        let mut add_block = |label: String, f0: Mat, all: Vec<(usize, Triplets)>| {
            let mut f0 = f0;
            let mut coeffs = Vec::new();
            for (a, tr) in all {
                if tr.is_empty() {
                    continue;
                }
                if index_of[a] == usize::MAX {
                    for &(p, q, c) in &tr {
                        f0[(p, q)] += fixed_values[a] * c;
                    }
                } else {
                    coeffs.push((index_of[a], tr));
                }
            }
            if !coeffs.is_empty() {
                blocks.push(Block { label, f0, coeffs });
            }
        };
        let kinds_ref = &kinds;
        let of_kind = |k: VarKind| (0..mtot).filter(move |&a| kinds_ref[a] == k);
        add_block(
            "T ⪰ 0".into(),
            Mat::zeros(n, n),
            of_kind(VarKind::T).map(|a| (a, bases[a].clone())).collect(),
        );
        if self.require_r_psd {
            add_block(
                "R ⪰ 0".into(),
                Mat::zeros(n, n),
                of_kind(VarKind::R).map(|a| (a, bases[a].clone())).collect(),
            );
        }
        if let Some(region) = &self.region {
            for (pi, part) in region.parts().iter().enumerate() {
                let s = part.b.nrows();
                let ct = part.c.transpose();
                let xt = -&part.b;
                let xj = -(&part.c - &ct);
                let xr = &part.c + &ct;
                let all = (0..mtot)
                    .map(|a| {
                        let x = match kinds[a] {
                            VarKind::T => &xt,
                            VarKind::J => &xj,
                            VarKind::R => &xr,
                        };
                        (a, kron_triplets(x, &bases[a], n))
                    })
                    .collect();
                let name = part
                    .primitive
                    .as_ref()
                    .map_or_else(|| format!("region part {pi}"), |p| p.kind_name().to_string());
                add_block(format!("{name}: −M̂ ⪰ δI"), Mat::identity(s * n, s * n) * -self.delta_lmi, all);
            }
        }
        let total_dim = blocks.iter().map(|b| b.f0.nrows()).sum();
        Compiled { n, kinds, bases, free, fixed_values, l, b, h, ltb2, blocks, total_dim }
    }
}

impl Compiled {
    fn to_free(&self, t: &Mat, j: &Mat, r: &Mat) -> DVector<f64> {
        DVector::from_iterator(
            self.free.len(),
            self.free.iter().map(|&a| {
                let m = match self.kinds[a] {
                    VarKind::T => t,
                    VarKind::J => j,
                    VarKind::R => r,
                };
                coord(&self.bases[a], m)
            }),
        )
    }

    fn to_mats(&self, v: &DVector<f64>) -> (Mat, Mat, Mat) {
        let n = self.n;
        let mut out = [Mat::zeros(n, n), Mat::zeros(n, n), Mat::zeros(n, n)];
        let mut full = self.fixed_values.clone();
        for (k, &a) in self.free.iter().enumerate() {
            full[a] = v[k];
        }
        for (a, &val) in full.iter().enumerate() {
            let idx = match self.kinds[a] {
                VarKind::T => 0,
                VarKind::J => 1,
                VarKind::R => 2,
            };
            for &(i, j, c) in &self.bases[a] {
                out[idx][(i, j)] += val * c;
            }
        }
        let [t, j, r] = out;
        (t, j, r)
    }

    fn objective(&self, v: &DVector<f64>) -> f64 {
        (&self.b - &self.l * v).norm_squared()
    }

    fn objective_grad(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.h * v - &self.ltb2
    }

    fn min_margin(&self, v: &DVector<f64>) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::lambda_min(&b.eval(v)))
            .fold(f64::INFINITY, f64::min)
    }

    /// `−Σ log det F_k(v)`, or `None` outside the interior.
    fn barrier(&self, v: &DVector<f64>) -> Option<f64> {
        let mut phi = 0.0;
        for b in &self.blocks {
            let ch = Cholesky::new(b.eval(v))?;
            let l = ch.l_dirty();
            for i in 0..l.nrows() {
                let d = l[(i, i)];
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                phi -= 2.0 * d.ln();
            }
        }
        Some(phi)
    }

    /// Barrier gradient and Hessian at an interior point.
    fn barrier_derivatives(&self, v: &DVector<f64>) -> Option<(DVector<f64>, Mat)> {
        let m = self.free.len();
        let mut g = DVector::zeros(m);
        let mut h = Mat::zeros(m, m);
        for b in &self.blocks {
            let finv = Cholesky::new(b.eval(v))?.inverse();
            let d = finv.nrows();
            for (a, tr) in &b.coeffs {
                g[*a] -= tr.iter().map(|&(p, q, c)| c * finv[(q, p)]).sum::<f64>();
            }
            let mut w = Mat::zeros(d, d);
            for (ia, (a, tra)) in b.coeffs.iter().enumerate() {
                // W = F⁻¹ F_a F⁻¹
                w.fill(0.0);
                for &(p, q, c) in tra {
                    let col = finv.column(p);
                    let row = finv.row(q);
                    for jj in 0..d {
                        let rv = c * row[jj];
                        if rv != 0.0 {
                            w.column_mut(jj).axpy(rv, &col, 1.0);
                        }
                    }
                }
                for (bidx, trb) in &b.coeffs[ia..] {
                    let val: f64 = trb.iter().map(|&(p, q, c)| c * w[(q, p)]).sum();
                    h[(*a, *bidx)] += val;
                    if a != bidx {
                        h[(*bidx, *a)] += val;
                    }
                }
            }
        }
        Some((g, h))
    }
}

fn solve_spd(mut h: Mat, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut jitter = 0.0;
    for _ in 0..12 {
        if let Some(ch) = Cholesky::new(h.clone()) {
            let x = ch.solve(rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
        for i in 0..h.nrows() {
            h[(i, i)] += jitter;
        }
    }
    None
}

/// Solve the subproblem from `init` (or the default start when `init` is
/// absent or not strictly feasible).
pub fn solve_subproblem(
    sp: &ConvexSubproblem,
    init: Option<(&Mat, &Mat, &Mat)>,
    opts: SdpOptions,
) -> Result<SubproblemSolution> {
    let c = sp.compile();
    let start = |c: &Compiled| -> Result<DVector<f64>> {
        let (t, j, r) = sp.initial_point()?;
        Ok(c.to_free(&t, &j, &r))
    };
    let mut v = match init {
        None => start(&c)?,
        Some((t, j, r)) => {
            let warm = c.to_free(t, j, r);
            if c.min_margin(&warm) > 0.0 {
                warm
            } else {
                // Pull the warm start towards the default interior point.
                let v0 = start(&c)?;
                [0.01, 0.1, 0.3, 1.0]
                    .iter()
                    .map(|&th| &warm * (1.0 - th) + &v0 * th)
                    .find(|cand| c.min_margin(cand) > 0.0)
                    .unwrap_or(v0)
            }
        }
    };
    let f_start = c.objective(&v);
    let eps = opts.accuracy.unwrap_or(1e-8 * (1.0 + f_start)).max(1e-300);
    let mdim = c.total_dim as f64;

    if c.blocks.is_empty() || c.free.is_empty() {
        // Unconstrained least squares.
        if !c.free.is_empty() {
            let g = c.objective_grad(&v);
            if let Some(d) = solve_spd(c.h.clone(), &(-g)) {
                v += d;
            }
        }
        return Ok(finish(&c, v, 0, 0, 0.0, 0.0, true, Vec::new()));
    }

    let (gb0, _) = c
        .barrier_derivatives(&v)
        .ok_or_else(|| Error::InfeasibleStart("start is not strictly feasible".into()))?;
    let gf0 = c.objective_grad(&v);
    let mut tb = if gf0.norm_squared() > 0.0 {
        (-gf0.dot(&gb0) / gf0.norm_squared()).clamp(1e-3, mdim / eps)
    } else {
        1.0
    };
    if !(tb.is_finite() && tb > 0.0) {
        tb = 1.0;
    }

    let mut newton = 0;
    let mut outer = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    while outer < opts.max_outer && newton < opts.max_newton {
        outer += 1;
        // Centering by damped Newton.
        loop {
            if newton >= opts.max_newton {
                break;
            }
            let Some((gb, hb)) = c.barrier_derivatives(&v) else { break };
            let grad = c.objective_grad(&v) * tb + &gb;
            kkt = grad.norm() / tb;
            let hess = &c.h * tb + hb;
            let Some(d) = solve_spd(hess, &(-&grad)) else { break };
            newton += 1;
            let dec2 = -grad.dot(&d);
            if !(dec2 > 0.0) || dec2 / 2.0 <= 1e-12 {
                break;
            }
            let psi0 = tb * c.objective(&v) + c.barrier(&v).unwrap_or(f64::INFINITY);
            let mut step = 1.0;
            let mut progress = None;
            for _ in 0..60 {
                let cand = &v + &d * step;
                if let Some(phi) = c.barrier(&cand) {
                    let psi = tb * c.objective(&cand) + phi;
                    if psi <= psi0 - 0.01 * step * dec2 {
                        v = cand;
                        progress = Some(psi < psi0);
                        break;
                    }
                }
                step *= 0.5;
            }
            // Stop when no step is accepted or the decrease is below the
            // resolution of ψ; the point is then centered to working precision.
            if progress != Some(true) {
                break;
            }
        }
        let gap = mdim / tb;
        trace.push(SdpTraceRow {
            outer,
            barrier_t: tb,
            objective: c.objective(&v),
            gap,
            min_margin: c.min_margin(&v),
        });
        if gap <= eps {
            converged = true;
            break;
        }
        tb *= 10.0;
    }
    let gap = mdim / tb;
    Ok(finish(&c, v, newton, outer, gap, kkt, converged, trace))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    c: &Compiled,
    v: DVector<f64>,
    newton: usize,
    outer: usize,
    gap: f64,
    kkt: f64,
    converged: bool,
    trace: Vec<SdpTraceRow>,
) -> SubproblemSolution {
    let (t, j, r) = c.to_mats(&v);
    let margins = c.blocks.iter().map(|b| (b.label.clone(), linalg::lambda_min(&b.eval(&v)))).collect();
    let kkt = if c.blocks.is_empty() { c.objective_grad(&v).norm() } else { kkt };
    SubproblemSolution {
        objective: c.objective(&v),
        t,
        j,
        r,
        newton_iterations: newton,
        outer_iterations: outer,
        gap,
        kkt_residual: kkt,
        margins,
        converged,
        trace,
    }
}
