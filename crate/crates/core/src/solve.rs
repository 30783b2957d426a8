//! Shared solver output: result type, traces, relative error and the final
//! certification step that turns a closure-feasible iterate into a verified pair.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::dh::{self, DhParam};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::pencil::{self, AdmissibilityVerdict, MatrixPair};
use crate::region::{LmiRegion, DEFAULT_MARGIN_TOL};

/// `√((‖A−Ã‖² + ‖E−Ẽ‖²) / (‖A‖² + ‖E‖²))`.
pub fn relative_error(e: &Mat, a: &Mat, e_new: &Mat, a_new: &Mat) -> Result<f64> {
    let den = a.norm_squared() + e.norm_squared();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(((a - a_new).norm_squared() + (e - e_new).norm_squared()).sqrt() / den.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub time_s: f64,
    /// Best objective found so far.
    pub objective: f64,
    pub relative_error: f64,
}

/// Per-iteration diagnostics of the block coordinate descent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcdStep {
    pub iteration: usize,
    pub objective_start: f64,
    pub objective_after_q: f64,
    pub objective_after_sdp: f64,
    pub sdp_accuracy: f64,
    pub beta: f64,
    pub restarted: bool,
    pub q_regularized: bool,
    pub sdp_converged: bool,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub algorithm: &'static str,
    pub param: DhParam,
    pub pair: MatrixPair,
    pub objective: f64,
    pub relative_error: f64,
    pub iterations: usize,
    pub elapsed_s: f64,
    pub trace: Vec<TracePoint>,
    pub verdict: AdmissibilityVerdict,
    pub admissible: bool,
    /// Final adjustments applied during certification.
    pub adjustments: Vec<String>,
    pub bcd_steps: Vec<BcdStep>,
    pub mu: f64,
}

impl SolveResult {
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        write_trace_csv(&self.trace, w)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "algorithm": self.algorithm,
            "mu": self.mu,
            "objective": self.objective,
            "relative_error": self.relative_error,
            "iterations": self.iterations,
            "elapsed_s": self.elapsed_s,
            "admissible": self.admissible,
            "verdict": self.verdict,
            "adjustments": self.adjustments,
            "E": linalg::to_rows(&self.pair.e),
            "A": linalg::to_rows(&self.pair.a),
            "dh": serde_json::from_str::<serde_json::Value>(&self.param.to_json_string())
                .expect("valid json"),
        })
    }
}

pub fn write_trace_csv<W: Write>(trace: &[TracePoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in trace {
        wr.serialize(p)?;
    }
    wr.flush()?;
    Ok(())
}

/// Records the best-so-far objective against wall-clock time, thinning rows
/// once the run gets long.
pub(crate) struct TraceRecorder {
    start: Instant,
    last: f64,
    count: usize,
    pub points: Vec<TracePoint>,
}

impl TraceRecorder {
    pub fn new(start: Instant) -> Self {
        Self { start, last: f64::NEG_INFINITY, count: 0, points: Vec::new() }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn offer(&mut self, best: f64, rel: impl FnOnce() -> f64, force: bool) {
        let now = self.elapsed();
        self.count += 1;
        if force || self.count <= 64 || now - self.last >= 0.005 {
            self.last = now;
            self.points.push(TracePoint { time_s: now, objective: best, relative_error: rel() });
        }
    }
}

/// Whether the verdict `v` survives scaling the rank and `β` tolerances by
/// 100 in either direction. A pair whose admissibility flips under such a
/// change depends on roundoff and is not reported as admissible.
fn verdict_is_stable(pair: &MatrixPair, region: &LmiRegion, v: &AdmissibilityVerdict) -> bool {
    let r = &v.report;
    [0.01, 100.0].iter().all(|&f| {
        let opts = pencil::SpectrumOptions { beta_tol: r.beta_tol * f, rank_tol: Some(r.rank_tol * f) };
        pencil::admissibility_check_with(pair, region, DEFAULT_MARGIN_TOL, opts).admissible == v.admissible
    })
}

/// Certify a final iterate: try it as is, then with tiny eigenvalues of `T`
/// removed (so numerical rank and finite-eigenvalue count agree), then with
/// escalating shifts `R + δI`. The first candidate that passes the
/// admissibility check is returned; otherwise the raw iterate is returned
/// flagged as not admissible.
pub fn certify(
    e: &Mat,
    a: &Mat,
    d: &DhParam,
    region: &LmiRegion,
    mu: f64,
) -> (DhParam, AdmissibilityVerdict, Vec<String>) {
    let check = |p: &DhParam| -> Option<AdmissibilityVerdict> {
        let pair = p.realize().ok()?;
        let mut v = pencil::admissibility_check(&pair, region, DEFAULT_MARGIN_TOL);
        v.admissible &= verdict_is_stable(&pair, region, &v);
        Some(v)
    };
    let raw_verdict = check(d);
    if let Some(v) = &raw_verdict {
        if v.admissible {
            return (d.clone(), v.clone(), Vec::new());
        }
    }
    let tmax = linalg::lambda_max(&d.t).max(0.0);
    // Eigenvalues of T at roundoff level are removed before anything else:
    // they make rank(E) depend on the last bits of the iterate.
    let t_eigs = linalg::sym_eigenvalues(&d.t);
    let mut t_variants = Vec::new();
    for floor in [1e-12, 1e-10, 1e-8, 1e-6] {
        if t_eigs.iter().any(|&l| l != 0.0 && l <= floor * tmax) {
            t_variants.push((linalg::truncate_psd(&d.t, floor * tmax), Some(floor)));
        }
        if floor == 1e-12 {
            t_variants.push((d.t.clone(), None));
        }
    }
    let rnorm = linalg::spectral_norm(&d.r);
    let mut shifts = Vec::new();
    let mut delta = if rnorm > 0.0 { 1e-10 * rnorm } else { 1e-10 };
    let cap = 1e-6 * (1.0 + rnorm);
    while delta < cap {
        shifts.push(delta);
        delta *= 10.0;
    }
    shifts.push(cap);
    let n = d.n();
    let mut candidates: Vec<(DhParam, Vec<String>)> = Vec::new();
    for (t, floor) in &t_variants {
        let note_t = floor.map(|f| format!("T eigenvalues below {f:e}·λ_max(T) set to zero"));
        if floor.is_some() {
            candidates.push((
                DhParam { t: t.clone(), ..d.clone() },
                note_t.clone().into_iter().collect(),
            ));
        }
        for &s in &shifts {
            let mut notes: Vec<String> = note_t.clone().into_iter().collect();
            notes.push(format!("R shifted by {s:e}·I"));
            candidates.push((
                DhParam { t: t.clone(), r: &d.r + Mat::identity(n, n) * s, ..d.clone() },
                notes,
            ));
        }
    }
    let base_obj = dh::objective(e, a, d, mu);
    for (cand, notes) in candidates {
        if let Some(v) = check(&cand) {
            // Adjustments must not visibly change the solution.
            let obj = dh::objective(e, a, &cand, mu);
            if v.admissible && obj <= base_obj + 1e-6 * (1.0 + base_obj) {
                return (cand, v, notes);
            }
        }
    }
    let verdict = raw_verdict.unwrap_or_else(|| {
        pencil::admissibility_check(&d.realize_unchecked(), region, DEFAULT_MARGIN_TOL)
    });
    let mut notes = vec!["no adjustment produced a verified admissible pair".to_string()];
    if verdict.failures.is_empty() {
        notes.push("the verdict changes when the rank and β tolerances are scaled by 100".into());
    }
    (d.clone(), verdict, notes)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_result(
    algorithm: &'static str,
    e: &Mat,
    a: &Mat,
    best: &DhParam,
    region: &LmiRegion,
    mu: f64,
    iterations: usize,
    mut rec: TraceRecorder,
    bcd_steps: Vec<BcdStep>,
) -> Result<SolveResult> {
    let (param, verdict, adjustments) = certify(e, a, best, region, mu);
    let pair = param.realize_unchecked();
    let objective = dh::objective(e, a, &param, mu);
    let relative_error = relative_error(e, a, &pair.e, &pair.a)?;
    let best_traced = rec.points.last().map_or(f64::INFINITY, |p| p.objective);
    rec.offer(objective.min(best_traced), || relative_error, true);
    let elapsed_s = rec.elapsed();
    Ok(SolveResult {
        algorithm,
        admissible: verdict.admissible,
        param,
        pair,
        objective,
        relative_error,
        iterations,
        elapsed_s,
        trace: rec.points,
        verdict,
        adjustments,
        bcd_steps,
        mu,
    })
}

/// Solver selection; `Auto` picks the fast gradient method exactly when the
/// region is the open left half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fgm,
    Bcd,
    Auto,
}

impl Algorithm {
    pub fn resolve(self, region: &LmiRegion) -> Algorithm {
        match self {
            Algorithm::Auto if region.is_hurwitz() => Algorithm::Fgm,
            Algorithm::Auto => Algorithm::Bcd,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fgm => "fgm",
            Algorithm::Bcd => "bcd",
            Algorithm::Auto => "auto",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fgm" => Ok(Algorithm::Fgm),
            "bcd" => Ok(Algorithm::Bcd),
            "auto" => Ok(Algorithm::Auto),
            _ => Err(Error::InvalidParameter {
                name: "algorithm",
                reason: format!("expected fgm, bcd or auto, got {s:?}"),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    pub mu: f64,
    pub max_time_s: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { algorithm: Algorithm::Auto, mu: 1.0, max_time_s: 30.0 }
    }
}

/// Nearest Ω-admissible pair to `(E, A)` with the selected algorithm.
pub fn solve(e: &Mat, a: &Mat, region: &LmiRegion, opts: SolveOptions) -> Result<SolveResult> {
    match opts.algorithm.resolve(region) {
        Algorithm::Fgm => {
            if !region.is_hurwitz() {
                return Err(Error::InvalidParameter {
                    name: "algorithm",
                    reason: "fgm handles only the left half-plane; use bcd for other regions".into(),
                });
            }
            crate::fgm::solve_hurwitz(
                e,
                a,
                crate::fgm::FgmOptions { mu: opts.mu, max_time_s: opts.max_time_s, ..Default::default() },
            )
        }
        _ => crate::bcd::solve_general(
            e,
            a,
            region,
            crate::bcd::BcdOptions { mu: opts.mu, max_time_s: opts.max_time_s, ..Default::default() },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_examples() {
        let e = Mat::identity(3, 3);
        let a = Mat::from_element(3, 3, 0.5);
        assert_eq!(relative_error(&e, &a, &e, &a).unwrap(), 0.0);
        let z = Mat::zeros(3, 3);
        assert!((relative_error(&e, &a, &z, &z).unwrap() - 1.0).abs() < 1e-15);
        let one = Mat::identity(1, 1);
        let v = relative_error(&one, &(&one * 2.0), &one, &one).unwrap();
        assert!((v - (0.2f64).sqrt()).abs() < 1e-15);
        assert!(matches!(relative_error(&z, &z, &z, &z), Err(Error::ZeroReference)));
    }

    #[test]
    fn certify_shifts_singular_r() {
        // R = 0 puts the eigenvalue on the imaginary axis; a tiny shift fixes it.
        let j = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let d = DhParam::new(Mat::identity(2, 2), j.clone(), Mat::zeros(2, 2), Mat::identity(2, 2)).unwrap();
        let (out, v, notes) = certify(&d.t, &j, &d, &LmiRegion::hurwitz(), 1.0);
        assert!(v.admissible, "{notes:?}");
        assert!(notes.iter().any(|n| n.contains("R shifted")));
        assert!(linalg::lambda_min(&out.r) > 0.0);
    }
}
