//! Generalized eigenstructure and admissibility diagnostics for real pairs `(E, A)`.

use std::fmt;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::region::{LmiRegion, Membership};

/// The pencil `sE − A`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPair {
    pub e: Mat,
    pub a: Mat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    #[serde(rename = "E")]
    e: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

impl MatrixPair {
    pub fn new(e: Mat, a: Mat) -> Result<Self> {
        let n = linalg::require_square(&e, "E")?;
        linalg::require_dim(&a, n, "A")?;
        Ok(Self { e, a })
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn scale(&self) -> f64 {
        self.e.norm() + self.a.norm()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: PairFile = serde_json::from_str(s)?;
        Self::new(linalg::from_rows(&f.e, "E")?, linalg::from_rows(&f.a, "A")?)
    }

    pub fn to_json_string(&self) -> String {
        let f = PairFile { e: linalg::to_rows(&self.e), a: linalg::to_rows(&self.a) };
        serde_json::to_string_pretty(&f).expect("pair serializes")
    }

    /// CSV interop: `2n` rows of `n` values, the `E` block followed by the `A` block.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(s.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if let Some(first) = rows.first() {
                if rec.len() != first.len() {
                    return Err(Error::Format(format!(
                        "line {}: expected {} values, got {}",
                        line + 1,
                        first.len(),
                        rec.len()
                    )));
                }
            }
            let row = rec
                .iter()
                .enumerate()
                .map(|(col, v)| {
                    v.parse::<f64>().map_err(|e| {
                        Error::Format(format!("line {}, column {}: `{v}`: {e}", line + 1, col + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let n = rows.first().map_or(0, Vec::len);
        if rows.len() != 2 * n || n == 0 {
            return Err(Error::Format(format!(
                "CSV pair needs 2n rows of n values; got {} rows of {n}",
                rows.len()
            )));
        }
        let e = linalg::from_rows(&rows[..n], "E")?;
        let a = linalg::from_rows(&rows[n..], "A")?;
        Self::new(e, a)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for m in [&self.e, &self.a] {
            for r in m.row_iter() {
                let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
            || !text.trim_start().starts_with('{');
        if is_csv {
            Self::from_csv_str(&text)
        } else {
            Self::from_json_str(&text)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// `β` is treated as zero when `|β| ≤ beta_tol·(‖E‖ + ‖A‖)`.
    pub beta_tol: f64,
    /// Absolute singular-value threshold for `rank(E)`; default `n·ε·σ_max(E)`.
    pub rank_tol: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { beta_tol: 1e-8, rank_tol: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteEigenvalue {
    pub re: f64,
    pub im: f64,
    /// `σ_min(λE − A)`, i.e. the residual of the best unit right eigenvector.
    pub right_residual: f64,
    /// Residual of the best unit left eigenvector `x*(λE − A)`.
    pub left_residual: f64,
}

impl FiniteEigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub finite_eigenvalues: Vec<FiniteEigenvalue>,
    pub num_infinite: usize,
    pub rank_e: usize,
    pub is_regular: bool,
    pub is_impulse_free: bool,
    pub rank_tol: f64,
    pub beta_tol: f64,
}

impl SpectrumReport {
    pub fn num_finite(&self) -> usize {
        self.finite_eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.finite_eigenvalues.iter().map(FiniteEigenvalue::value).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityResult {
    pub is_regular: bool,
    /// Sample point with the best-conditioned `sE − A`.
    pub witness: Complex64,
    /// `σ_min(sE − A) / (|s|‖E‖ + ‖A‖)` at the witness.
    pub relative_sigma_min: f64,
}

const REGULARITY_THRESHOLD: f64 = 1e-12;
const REGULARITY_SEED: u64 = 0x5eed_0f_7e6a;

fn shifted(p: &MatrixPair, s: Complex64) -> CMat {
    linalg::to_complex(&p.e) * s - linalg::to_complex(&p.a)
}

fn min_singular_triplet(m: &CMat) -> (f64, DVector<Complex64>, DVector<Complex64>) {
    let svd = m.clone().svd(true, true);
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    let u = svd.u.as_ref().expect("u requested").column(k).into_owned();
    let v = svd.v_t.as_ref().expect("v_t requested").row(k).adjoint();
    (sigma, u, v)
}

pub fn regularity_check(p: &MatrixPair) -> RegularityResult {
    let mut samples = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(REGULARITY_SEED);
    for _ in 0..8 {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        samples.push(Complex64::new(re, im));
    }
    let (ne, na) = (p.e.norm(), p.a.norm());
    let mut best = RegularityResult { is_regular: false, witness: samples[0], relative_sigma_min: 0.0 };
    if p.n() == 0 {
        best.is_regular = true;
        return best;
    }
    for s in samples {
        let scale = s.norm() * ne + na;
        if scale == 0.0 {
            continue;
        }
        let (sigma, _, _) = min_singular_triplet(&shifted(p, s));
        let rel = sigma / scale;
        if rel > best.relative_sigma_min {
            best = RegularityResult { is_regular: false, witness: s, relative_sigma_min: rel };
        }
    }
    best.is_regular = best.relative_sigma_min >= REGULARITY_THRESHOLD;
    best
}

/// Numerical rank of `E` with the given absolute threshold (default `n·ε·σ_max`).
pub fn rank(m: &Mat, rank_tol: Option<f64>) -> (usize, f64) {
    let sv = linalg::singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let tol = rank_tol.unwrap_or(m.nrows().max(1) as f64 * f64::EPSILON * smax);
    (sv.iter().filter(|&&s| s > tol).count(), tol)
}

/// Raw generalized eigenvalues `(α_i, β_i)` of `sE − A` from a QZ reduction.
pub fn generalized_eigenvalues(p: &MatrixPair) -> Result<Vec<(Complex64, f64)>> {
    let n = p.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = faer::Mat::<f64>::from_fn(n, n, |i, j| p.a[(i, j)]);
    let mut e = faer::Mat::<f64>::from_fn(n, n, |i, j| p.e[(i, j)]);
    let mut re = faer::diag::Diag::<f64>::zeros(n);
    let mut im = faer::diag::Diag::<f64>::zeros(n);
    let mut beta = faer::diag::Diag::<f64>::zeros(n);
    let par = faer::Par::Seq;
    let no = faer::linalg::evd::ComputeEigenvectors::No;
    let req = faer::linalg::gevd::gevd_scratch::<f64>(n, no, no, par, Default::default());
    let mut buf = dyn_stack::MemBuffer::new(req);
    // Eigenvectors are obtained separately; only the QZ eigenvalues are needed here.
    faer::linalg::gevd::gevd_real(
        a.as_mut(),
        e.as_mut(),
        re.as_mut(),
        im.as_mut(),
        beta.as_mut(),
        None,
        None,
        par,
        dyn_stack::MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("QZ iteration failed: {e:?}")))?;
    // The two members of a complex pair do not always carry consistent
    // (α, β) scalings, so keep the more accurate member and mirror it.
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let first = (Complex64::new(re[i], im[i]), beta[i]);
        if im[i] == 0.0 || i + 1 == n {
            out.push(first);
            i += 1;
            continue;
        }
        let second = (Complex64::new(re[i + 1], -im[i + 1]), beta[i + 1]);
        let residual = |(alpha, b): (Complex64, f64)| {
            if b == 0.0 {
                return f64::INFINITY;
            }
            let lam = alpha / b;
            min_singular_triplet(&shifted(p, lam)).0 / (lam.norm() * p.e.norm() + p.a.norm()).max(f64::MIN_POSITIVE)
        };
        let (alpha, b) = if residual(second) < residual(first) { second } else { first };
        out.push((alpha, b));
        out.push((alpha.conj(), b));
        i += 2;
    }
    Ok(out)
}

pub fn spectrum(p: &MatrixPair) -> SpectrumReport {
    spectrum_with(p, SpectrumOptions::default())
}

pub fn spectrum_with(p: &MatrixPair, opts: SpectrumOptions) -> SpectrumReport {
    let n = p.n();
    let (rank_e, rank_tol) = rank(&p.e, opts.rank_tol);
    let regular = regularity_check(p).is_regular;
    let threshold = opts.beta_tol * p.scale();
    let mut finite = Vec::new();
    let mut num_infinite = 0;
    match generalized_eigenvalues(p) {
        Ok(pairs) => {
            for (alpha, beta) in pairs {
                if beta.abs() > threshold {
                    let lam = alpha / beta;
                    finite.push(eigen_residuals(p, lam));
                } else {
                    num_infinite += 1;
                }
            }
        }
        Err(_) => num_infinite = n,
    }
    finite.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let is_impulse_free = regular && finite.len() == rank_e;
    SpectrumReport {
        n,
        finite_eigenvalues: finite,
        num_infinite,
        rank_e,
        is_regular: regular,
        is_impulse_free,
        rank_tol,
        beta_tol: opts.beta_tol,
    }
}

fn eigen_residuals(p: &MatrixPair, lam: Complex64) -> FiniteEigenvalue {
    let m = shifted(p, lam);
    let (sigma, u, _) = min_singular_triplet(&m);
    // u is a left singular vector for σ_min: ‖u*(λE − A)‖ = σ_min as well.
    let left = (u.adjoint() * &m).norm();
    FiniteEigenvalue { re: lam.re, im: lam.im, right_residual: sigma, left_residual: left }
}

/// Unit right eigenvector `v` with `(λE − A)v ≈ 0`.
pub fn right_eigenvector(p: &MatrixPair, lam: Complex64) -> DVector<Complex64> {
    min_singular_triplet(&shifted(p, lam)).2
}

/// Unit left eigenvector `x` with `x*(λE − A) ≈ 0`, i.e. `x*A = λx*E`.
pub fn left_eigenvector(p: &MatrixPair, lam: Complex64) -> DVector<Complex64> {
    min_singular_triplet(&shifted(p, lam)).1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum AdmissibilityFailure {
    NotRegular,
    NotImpulseFree { num_finite: usize, rank_e: usize },
    EigenvalueNotInside { re: f64, im: f64, margin: f64, class: Membership },
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotRegular => write!(f, "not regular"),
            Self::NotImpulseFree { num_finite, rank_e } => write!(
                f,
                "not impulse-free: {num_finite} finite eigenvalues but rank(E) = {rank_e}"
            ),
            Self::EigenvalueNotInside { re, im, margin, class } => write!(
                f,
                "eigenvalue {re:.11e}{im:+.11e}i {} (margin {margin:.11e})",
                match class {
                    Membership::Outside => "outside",
                    Membership::Boundary => "on the boundary",
                    Membership::Inside => "inside",
                }
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub failures: Vec<AdmissibilityFailure>,
    /// Smallest membership margin over finite eigenvalues (`None` if there are none).
    pub worst_margin: Option<f64>,
    pub margins: Vec<f64>,
    pub report: SpectrumReport,
}

pub fn admissibility_check(p: &MatrixPair, region: &LmiRegion, margin_tol: f64) -> AdmissibilityVerdict {
    admissibility_check_with(p, region, margin_tol, SpectrumOptions::default())
}

pub fn admissibility_check_with(
    p: &MatrixPair,
    region: &LmiRegion,
    margin_tol: f64,
    opts: SpectrumOptions,
) -> AdmissibilityVerdict {
    let report = spectrum_with(p, opts);
    let mut failures = Vec::new();
    if !report.is_regular {
        failures.push(AdmissibilityFailure::NotRegular);
    }
    if report.is_regular && !report.is_impulse_free {
        failures.push(AdmissibilityFailure::NotImpulseFree {
            num_finite: report.num_finite(),
            rank_e: report.rank_e,
        });
    }
    let mut margins = Vec::with_capacity(report.num_finite());
    for ev in &report.finite_eigenvalues {
        let m = region.membership(ev.value(), margin_tol);
        margins.push(m.margin);
        if m.class != Membership::Inside {
            failures.push(AdmissibilityFailure::EigenvalueNotInside {
                re: ev.re,
                im: ev.im,
                margin: m.margin,
                class: m.class,
            });
        }
    }
    let worst_margin = margins.iter().copied().reduce(f64::min);
    AdmissibilityVerdict { admissible: failures.is_empty(), failures, worst_margin, margins, report }
}

/// Real and imaginary part of an eigenvalue of `(E, (J−R)Q)` recovered from a
/// left eigenvector `x`: `Re λ = −x*Rx / x*EQ⁻¹x`, `Im λ = −i·x*Jx / x*EQ⁻¹x`.
pub fn lemma2_ratios(e: &Mat, j: &Mat, r: &Mat, q: &Mat, x: &DVector<Complex64>) -> Result<(f64, f64)> {
    let n = linalg::require_square(e, "E")?;
    for (m, name) in [(j, "J"), (r, "R"), (q, "Q")] {
        linalg::require_dim(m, n, name)?;
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("x has length {}, expected {n}", x.len())));
    }
    let qinv = linalg::inverse(q, "Q is singular")?;
    let t = linalg::to_complex(&(e * qinv));
    let quad = |m: &CMat| (x.adjoint() * m * x)[(0, 0)];
    let denom = quad(&t);
    let xnorm2 = x.norm_squared();
    if xnorm2 == 0.0 || denom.norm() <= 1e-14 * xnorm2 * t.norm().max(1.0) {
        return Err(Error::VanishingDenominator(denom.norm()));
    }
    let re = -quad(&linalg::to_complex(r)) / denom;
    let im = -Complex64::i() * quad(&linalg::to_complex(j)) / denom;
    Ok((re.re, im.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{from_primitive, RegionPrimitive};

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn identity_pair_spectrum() {
        let p = MatrixPair::new(Mat::identity(2, 2), diag(&[-1.0, -2.0])).unwrap();
        let rep = spectrum(&p);
        assert_eq!(rep.num_finite(), 2);
        assert_eq!(rep.num_infinite, 0);
        assert!(rep.is_regular && rep.is_impulse_free);
        assert!((rep.finite_eigenvalues[0].re + 2.0).abs() < 1e-12);
        assert!((rep.finite_eigenvalues[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_e_has_infinite_eigenvalue() {
        let p = MatrixPair::new(diag(&[1.0, 0.0]), Mat::identity(2, 2)).unwrap();
        let rep = spectrum(&p);
        assert_eq!(rep.num_finite(), 1);
        assert!((rep.finite_eigenvalues[0].re - 1.0).abs() < 1e-12);
        assert_eq!(rep.num_infinite, 1);
        assert_eq!(rep.rank_e, 1);
        assert!(rep.is_impulse_free);
    }

    #[test]
    fn singular_pencil_detected() {
        let p = MatrixPair::new(diag(&[1.0, 0.0]), diag(&[1.0, 0.0])).unwrap();
        assert!(!regularity_check(&p).is_regular);
        assert!(!spectrum(&p).is_regular);
    }

    #[test]
    fn zero_e_identity_a_is_regular() {
        let p = MatrixPair::new(Mat::zeros(2, 2), Mat::identity(2, 2)).unwrap();
        let r = regularity_check(&p);
        assert!(r.is_regular);
        let rep = spectrum(&p);
        assert_eq!(rep.num_finite(), 0);
        assert_eq!(rep.rank_e, 0);
        assert!(rep.is_impulse_free);
    }

    #[test]
    fn identity_e_is_regular_for_any_a() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.0, 0.0, 7.0]);
        let r = regularity_check(&MatrixPair::new(Mat::identity(3, 3), a).unwrap());
        assert!(r.is_regular);
    }

    #[test]
    fn admissibility_examples() {
        let hur = from_primitive(RegionPrimitive::LeftHalfPlane { k: 0.0 }).unwrap();
        let i2 = Mat::identity(2, 2);
        let ok = admissibility_check(&MatrixPair::new(i2.clone(), -&i2).unwrap(), &hur, 1e-9);
        assert!(ok.admissible, "{:?}", ok.failures);

        let bad = admissibility_check(&MatrixPair::new(i2.clone(), i2.clone()).unwrap(), &hur, 1e-9);
        assert!(!bad.admissible);
        assert!(matches!(bad.failures[0], AdmissibilityFailure::EigenvalueNotInside { .. }));

        let sing = admissibility_check(&MatrixPair::new(diag(&[1.0, 0.0]), i2).unwrap(), &hur, 1e-9);
        assert!(!sing.admissible);
        assert!(sing.report.is_impulse_free);
        assert_eq!(sing.failures.len(), 1);
        assert!(sing.failures[0].to_string().contains("outside"));
    }

    #[test]
    fn lemma2_ratios_on_rotation_dissipation() {
        let e = Mat::identity(2, 2);
        let j = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = Mat::identity(2, 2);
        let a = &j - &r;
        let p = MatrixPair::new(e.clone(), a).unwrap();
        for ev in spectrum(&p).finite_eigenvalues {
            let x = left_eigenvector(&p, ev.value());
            let (re, im) = lemma2_ratios(&e, &j, &r, &e, &x).unwrap();
            assert!((re + 1.0).abs() < 1e-12);
            assert!((im - ev.im).abs() < 1e-12);
            assert!((im.abs() - 1.0).abs() < 1e-12);
            let (re5, im5) = lemma2_ratios(&e, &j, &r, &e, &(x * Complex64::new(5.0, 0.0))).unwrap();
            assert!((re5 - re).abs() < 1e-12 && (im5 - im).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma2_ratios_scalar_dissipation() {
        let e = Mat::identity(3, 3);
        let r = Mat::identity(3, 3) * 0.7;
        let x = DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)]);
        let (re, im) = lemma2_ratios(&e, &Mat::zeros(3, 3), &r, &e, &x).unwrap();
        assert!((re + 0.7).abs() < 1e-14 && im.abs() < 1e-14);
    }

    #[test]
    fn lemma2_ratios_errors() {
        let e = Mat::identity(2, 2);
        let x = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let err = lemma2_ratios(&e, &Mat::zeros(2, 2), &e, &Mat::zeros(2, 2), &x).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
        let e0 = diag(&[0.0, 1.0]);
        let err = lemma2_ratios(&e0, &Mat::zeros(2, 2), &e, &Mat::identity(2, 2), &x).unwrap_err();
        assert!(err.to_string().contains("regular"));
    }

    #[test]
    fn csv_and_json_formats() {
        let p = MatrixPair::new(diag(&[1.0, 2.0]), Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.5])).unwrap();
        assert_eq!(MatrixPair::from_csv_str(&p.to_csv_string()).unwrap(), p);
        assert_eq!(MatrixPair::from_json_str(&p.to_json_string()).unwrap(), p);
        let err = MatrixPair::from_csv_str("1,0\n0,x\n1,1\n1,1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(MatrixPair::from_csv_str("1,0\n0,1\n1,1\n").is_err());
        assert!(MatrixPair::from_json_str(r#"{"E": [[1.0]], "A": [[1.0, 2.0]]}"#).is_err());
    }
}
