//! Instance generators, table runner and plot-data emission.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dh::DhParam;
use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, Mat};
use crate::pencil::{self, MatrixPair};
use crate::region::{LmiRegion, Membership, RegionPrimitive};
use crate::solve::{self, Algorithm, SolveOptions, SolveResult};

pub use crate::solve::relative_error;

/// Banded Toeplitz matrix with −1 on the subdiagonal and 1 on the main and
/// `k` superdiagonals, paired with `E = I`.
pub fn grcar(n: usize, k: usize) -> Result<MatrixPair> {
    if k < 1 || k >= n {
        return Err(Error::OutOfRange(format!("grcar needs 1 <= k < n, got k = {k}, n = {n}")));
    }
    let a = Mat::from_fn(n, n, |i, j| {
        if j + 1 == i {
            -1.0
        } else if j >= i && j <= i + k {
            1.0
        } else {
            0.0
        }
    });
    MatrixPair::new(Mat::identity(n, n), a)
}

/// Mass-spring-damper pair of size `2n` with `M = I`, `K = tridiag(−1, 2, −1)`,
/// `D = 0.1·I + 0.5·K`, destabilized by `R = diag(D, −εI)`. Also returns the
/// generating quadruple.
pub fn msd(n: usize, eps: f64) -> Result<(MatrixPair, DhParam)> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("msd needs eps >= 0, got {eps}")));
    }
    let i = Mat::identity(n, n);
    let k = Mat::from_fn(n, n, |r, c| match r.abs_diff(c) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    let d = &i * 0.1 + &k * 0.5;
    let mut j = Mat::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&-&i);
    j.view_mut((n, 0), (n, n)).copy_from(&i);
    let r = block_diag(&[&d, &(-&i * eps)]);
    let q = block_diag(&[&i, &k]);
    let e = block_diag(&[&i, &i]);
    let a = (&j - &r) * &q;
    let kinv = linalg::inverse(&k, "K")?;
    let param = DhParam::new(block_diag(&[&i, &kinv]), j, r, q)?;
    Ok((MatrixPair::new(e, a)?, param))
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    gaussian(rng, n).qr().q()
}

/// `A = U + ε·N·√n/‖N‖_F` with `U` the orthogonal QR factor of a Gaussian
/// matrix and `N` Gaussian; `E = I`.
pub fn near_schur(n: usize, eps: f64, seed: u64) -> Result<MatrixPair> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthogonal(&mut rng, n);
    let noise = gaussian(&mut rng, n);
    let a = &u + &noise * (eps * (n as f64).sqrt() / noise.norm());
    MatrixPair::new(Mat::identity(n, n), a)
}

/// Intersection of the strips `|Re z| < 5`, `|Im z| < 3` and the parabolas
/// `Re z < 6 − (Im z)²/2`, `Re z > −6 + (Im z)²/2`.
pub fn composite_example_region() -> LmiRegion {
    let parts = [
        RegionPrimitive::VerticalStrip { h: -5.0, k: 5.0 },
        RegionPrimitive::HorizontalStrip { w: 3.0 },
        RegionPrimitive::LeftParabola { q_p: 6.0, c_p: 1.0 },
        RegionPrimitive::RightParabola { q_p: -6.0, c_p: 1.0 },
    ]
    .map(|p| crate::region::from_primitive(p).expect("valid primitive"));
    LmiRegion::intersect_all(&parts).expect("nonempty list")
}

/// `A = U·Λ·Uᵀ + ε·N` where `Λ` is a real block-diagonal matrix whose
/// eigenvalues are drawn uniformly from `region ∩ [lo.0, hi.0] × [lo.1, hi.1]`,
/// `U` is random orthogonal and `N` is standard Gaussian; `E = I`.
pub fn noisy_in_region(
    n: usize,
    eps: f64,
    region: &LmiRegion,
    lo: (f64, f64),
    hi: (f64, f64),
    seed: u64,
) -> Result<MatrixPair> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lambda = Mat::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.5) {
            let z = draw_inside(&mut rng, region, false, lo, hi)?;
            lambda[(i, i)] = z.re;
            lambda[(i + 1, i + 1)] = z.re;
            lambda[(i, i + 1)] = z.im;
            lambda[(i + 1, i)] = -z.im;
            i += 2;
        } else {
            lambda[(i, i)] = draw_inside(&mut rng, region, true, lo, hi)?.re;
            i += 1;
        }
    }
    let u = random_orthogonal(&mut rng, n);
    let noise = gaussian(&mut rng, n);
    let a = &u * lambda * u.transpose() + noise * eps;
    MatrixPair::new(Mat::identity(n, n), a)
}

fn draw_inside(
    rng: &mut ChaCha8Rng,
    region: &LmiRegion,
    real: bool,
    lo: (f64, f64),
    hi: (f64, f64),
) -> Result<Complex64> {
    for _ in 0..100_000 {
        let x = rng.random_range(lo.0..hi.0);
        let y = if real { 0.0 } else { rng.random_range(0.0..hi.1.max(-lo.1)) };
        let z = Complex64::new(x, y);
        if region.membership(z, 1e-6).class == Membership::Inside {
            return Ok(z);
        }
    }
    Err(Error::InfeasibleRegion("no sampled point of the box lies inside the region".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Grcar { n: usize, k: usize },
    Msd { n: usize, eps: f64 },
    NearSchur { n: usize, eps: f64, seed: u64 },
    /// Noisy matrix with eigenvalues in [`composite_example_region`].
    Composite { n: usize, eps: f64, seed: u64 },
}

impl Generator {
    pub fn pair(&self) -> Result<MatrixPair> {
        match *self {
            Generator::Grcar { n, k } => grcar(n, k),
            Generator::Msd { n, eps } => Ok(msd(n, eps)?.0),
            Generator::NearSchur { n, eps, seed } => near_schur(n, eps, seed),
            Generator::Composite { n, eps, seed } => {
                noisy_in_region(n, eps, &composite_example_region(), (-5.0, -3.0), (5.0, 3.0), seed)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            Generator::NearSchur { seed, .. } | Generator::Composite { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Generator::Grcar { n, k } => format!("grcar_n{n}_k{k}"),
            Generator::Msd { n, eps } => format!("msd_n{n}_eps{eps}"),
            Generator::NearSchur { n, eps, seed } => format!("near_schur_n{n}_eps{eps}_s{seed}"),
            Generator::Composite { n, eps, seed } => format!("composite_n{n}_eps{eps}_s{seed}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub name: String,
    pub generator: Generator,
    pub pair: MatrixPair,
    pub region: LmiRegion,
    pub algorithm: Algorithm,
    pub max_time_s: f64,
    pub mu: f64,
    /// Run the `Ẽ = E` baseline instead of `algorithm`.
    pub e_frozen: bool,
}

impl BenchInstance {
    pub fn new(generator: Generator, region: LmiRegion, algorithm: Algorithm, max_time_s: f64) -> Result<Self> {
        let pair = generator.pair()?;
        let name = format!("{}_{}", generator.label(), algorithm.resolve(&region).name());
        Ok(Self { name, generator, pair, region, algorithm, max_time_s, mu: 1.0, e_frozen: false })
    }

    pub fn e_frozen_baseline(generator: Generator, region: LmiRegion) -> Result<Self> {
        let mut inst = Self::new(generator, region, Algorithm::Bcd, f64::INFINITY)?;
        inst.name = format!("{}_e_frozen", inst.generator.label());
        inst.e_frozen = true;
        Ok(inst)
    }

    pub fn method_name(&self) -> &'static str {
        if self.e_frozen {
            "e_frozen"
        } else {
            self.algorithm.resolve(&self.region).name()
        }
    }
}

/// Hurwitz rows: Grcar(n, 1..=3) and MSD(n/2, ε) for ε ∈ {0.01, 0.05}.
pub fn hurwitz_suite(n: usize, max_time_s: f64) -> Result<Vec<BenchInstance>> {
    let mut gens: Vec<Generator> = (1..=3).map(|k| Generator::Grcar { n, k }).collect();
    gens.extend([0.01, 0.05].map(|eps| Generator::Msd { n, eps }));
    gens.into_iter()
        .map(|g| BenchInstance::new(g, LmiRegion::hurwitz(), Algorithm::Fgm, max_time_s))
        .collect()
}

/// Schur rows: Grcar(n, 1..=3) and near-Schur(n, ε) for ε ∈ {0.01, 0.1, 1}.
pub fn schur_suite(n: usize, max_time_s: f64, seed: u64) -> Result<Vec<BenchInstance>> {
    let mut gens: Vec<Generator> = (1..=3).map(|k| Generator::Grcar { n, k }).collect();
    gens.extend([0.01, 0.1, 1.0].map(|eps| Generator::NearSchur { n, eps, seed }));
    gens.into_iter()
        .map(|g| BenchInstance::new(g, LmiRegion::unit_disk(), Algorithm::Bcd, max_time_s))
        .collect()
}

/// Noisy instance in [`composite_example_region`], solved by the full method
/// and by the `Ẽ = E` baseline.
pub fn composite_suite(n: usize, eps: f64, seed: u64, max_time_s: f64) -> Result<Vec<BenchInstance>> {
    let g = Generator::Composite { n, eps, seed };
    Ok(vec![
        BenchInstance::new(g.clone(), composite_example_region(), Algorithm::Bcd, max_time_s)?,
        BenchInstance::e_frozen_baseline(g, composite_example_region())?,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub relative_error_pct: Option<f64>,
    pub objective: Option<f64>,
    pub time_s: Option<f64>,
    pub iterations: Option<usize>,
    pub admissible: Option<bool>,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub row: BenchRow,
    pub result: Option<SolveResult>,
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Where `results.csv`, `results.json` and `traces/` are written.
    pub out_dir: Option<PathBuf>,
}

fn run_one(inst: &BenchInstance, trace_dir: Option<&Path>) -> BenchRun {
    let algorithm = inst.method_name().to_string();
    let mut row = BenchRow {
        instance: inst.name.clone(),
        algorithm,
        n: inst.pair.n(),
        seed: inst.generator.seed(),
        relative_error_pct: None,
        objective: None,
        time_s: None,
        iterations: None,
        admissible: None,
        trace_file: None,
        error: None,
    };
    let opts = SolveOptions { algorithm: inst.algorithm, mu: inst.mu, max_time_s: inst.max_time_s };
    let (e, a) = (&inst.pair.e, &inst.pair.a);
    let outcome = if inst.e_frozen {
        crate::bcd::solve_e_frozen_baseline(e, a, &inst.region, inst.mu)
    } else {
        solve::solve(e, a, &inst.region, opts)
    };
    match outcome {
        Ok(res) => {
            row.relative_error_pct = Some(100.0 * res.relative_error);
            row.objective = Some(res.objective);
            row.time_s = Some(res.elapsed_s);
            row.iterations = Some(res.iterations);
            row.admissible = Some(res.admissible);
            if let Some(dir) = trace_dir {
                let file = format!("{}.csv", inst.name);
                let written = fs::File::create(dir.join(&file))
                    .map_err(Error::from)
                    .and_then(|f| res.write_trace_csv(f));
                match written {
                    Ok(()) => row.trace_file = Some(format!("traces/{file}")),
                    Err(e) => row.error = Some(format!("trace not written: {e}")),
                }
            }
            BenchRun { row, result: Some(res) }
        }
        Err(e) => {
            row.error = Some(e.to_string());
            BenchRun { row, result: None }
        }
    }
}

/// Run every instance under its own budget on a worker pool. Failures are
/// recorded per row; results keep the input order.
pub fn run_table(instances: &[BenchInstance], cfg: &RunConfig) -> Result<Vec<BenchRun>> {
    let trace_dir = match &cfg.out_dir {
        Some(dir) => {
            let t = dir.join("traces");
            fs::create_dir_all(&t)?;
            Some(t)
        }
        None => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let runs: Vec<BenchRun> =
        pool.install(|| instances.par_iter().map(|i| run_one(i, trace_dir.as_deref())).collect());
    if let Some(dir) = &cfg.out_dir {
        let rows: Vec<&BenchRow> = runs.iter().map(|r| &r.row).collect();
        write_results(dir, &rows)?;
    }
    Ok(runs)
}

fn write_results(dir: &Path, rows: &[&BenchRow]) -> Result<()> {
    let mut wr = csv::Writer::from_path(dir.join("results.csv"))?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    fs::write(dir.join("results.json"), serde_json::to_string_pretty(rows)?)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotGrid {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl PlotGrid {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Self {
        Self { re, im, n_re: n_re.max(2), n_im: n_im.max(2) }
    }

    /// Square box around the given points, padded by 25% and at least ±1.5.
    pub fn around(points: &[Complex64], resolution: usize) -> Self {
        let r = points.iter().fold(1.5f64, |m, z| m.max(1.25 * z.re.abs()).max(1.25 * z.im.abs()));
        Self::new((-r, r), (-r, r), resolution, resolution)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PlotBundle {
    pub boundary: Vec<BoundaryPoint>,
    pub eigenvalues: Vec<ScatterPoint>,
}

impl PlotBundle {
    /// Writes `boundary.csv` (re, im) and `eigenvalues.csv` (label, re, im).
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut wr = csv::Writer::from_path(dir.join("boundary.csv"))?;
        for p in &self.boundary {
            wr.serialize(p)?;
        }
        wr.flush()?;
        let mut wr = csv::Writer::from_path(dir.join("eigenvalues.csv"))?;
        for p in &self.eigenvalues {
            wr.serialize(p)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, inside_lo: bool) -> f64 {
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == inside_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points where `λ_max(f_Ω(z))` changes sign along grid rows and columns,
/// each refined by bisection to an interval of width 1e-6.
pub fn region_boundary(region: &LmiRegion, grid: &PlotGrid) -> Vec<BoundaryPoint> {
    let xs: Vec<f64> = (0..grid.n_re)
        .map(|i| grid.re.0 + (grid.re.1 - grid.re.0) * i as f64 / (grid.n_re - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..grid.n_im)
        .map(|i| grid.im.0 + (grid.im.1 - grid.im.0) * i as f64 / (grid.n_im - 1) as f64)
        .collect();
    let lam = |x: f64, y: f64| region.lambda_max_at(Complex64::new(x, y));
    let inside: Vec<Vec<bool>> = ys.iter().map(|&y| xs.iter().map(|&x| lam(x, y) < 0.0).collect()).collect();
    let mut out = Vec::new();
    for (r, &y) in ys.iter().enumerate() {
        for c in 0..xs.len() - 1 {
            if inside[r][c] != inside[r][c + 1] {
                let x = bisect(|x| lam(x, y), xs[c], xs[c + 1], inside[r][c]);
                out.push(BoundaryPoint { re: x, im: y });
            }
        }
    }
    for (c, &x) in xs.iter().enumerate() {
        for r in 0..ys.len() - 1 {
            if inside[r][c] != inside[r + 1][c] {
                let y = bisect(|y| lam(x, y), ys[r], ys[r + 1], inside[r][c]);
                out.push(BoundaryPoint { re: x, im: y });
            }
        }
    }
    out
}

/// Boundary point cloud of `region` plus the finite eigenvalues of each labeled pair.
pub fn region_plot_data(region: &LmiRegion, pairs: &[(String, MatrixPair)], grid: &PlotGrid) -> Result<PlotBundle> {
    let mut eigenvalues = Vec::new();
    for (label, p) in pairs {
        for z in pencil::spectrum(p).eigenvalues() {
            eigenvalues.push(ScatterPoint { label: label.clone(), re: z.re, im: z.im });
        }
    }
    Ok(PlotBundle { boundary: region_boundary(region, grid), eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grcar_definition() {
        let p = grcar(3, 1).unwrap();
        let expected = Mat::from_row_slice(3, 3, &[1.0, 1.0, 0.0, -1.0, 1.0, 1.0, 0.0, -1.0, 1.0]);
        assert_eq!(p.a, expected);
        for (n, k) in [(5, 1), (10, 3), (7, 6)] {
            assert_eq!(grcar(n, k).unwrap().e, Mat::identity(n, n));
        }
        assert!(grcar(4, 0).is_err());
        assert!(grcar(4, 4).is_err());
    }

    #[test]
    fn grcar_is_antistable() {
        let s = pencil::spectrum(&grcar(10, 1).unwrap());
        assert_eq!(s.num_finite(), 10);
        assert!(s.eigenvalues().iter().all(|z| z.re > 0.0));
    }

    #[test]
    fn msd_blocks_and_stability() {
        let (p, d) = msd(4, 0.0).unwrap();
        assert_eq!(p.n(), 8);
        let back = d.realize().unwrap();
        assert!((back.e - &p.e).norm() < 1e-12 && (back.a - &p.a).norm() < 1e-12);
        assert_eq!(d.j[(0, 4)], -1.0);
        assert_eq!(d.j[(4, 0)], 1.0);
        assert_eq!(d.q[(4, 4)], 2.0);
        assert!(pencil::spectrum(&p).eigenvalues().iter().all(|z| z.re <= 1e-10));
        // The damping D = 0.1·I + 0.5·K absorbs small destabilizations.
        let max_re = |eps| {
            let (p, _) = msd(10, eps).unwrap();
            pencil::spectrum(&p).eigenvalues().iter().map(|z| z.re).fold(f64::MIN, f64::max)
        };
        assert!(max_re(0.1) < 0.0);
        assert!(max_re(1.0) > 0.0);
    }

    #[test]
    fn near_schur_construction() {
        let p = near_schur(6, 0.0, 7).unwrap();
        for z in pencil::spectrum(&p).eigenvalues() {
            assert!((z.norm() - 1.0).abs() < 1e-10);
        }
        let u = p.a.clone();
        let q = near_schur(6, 0.3, 7).unwrap();
        assert!(((&q.a - &u).norm() - 0.3 * 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(near_schur(6, 0.3, 7).unwrap().a, q.a);
        let big = near_schur(10, 1.0, 2017).unwrap();
        let rho = pencil::spectrum(&big).eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(rho > 1.0);
    }

    #[test]
    fn composite_instance_is_seeded() {
        let g = Generator::Composite { n: 10, eps: 0.0, seed: 2017 };
        let p = g.pair().unwrap();
        assert_eq!(p.a, g.pair().unwrap().a);
        let region = composite_example_region();
        assert!(pencil::admissibility_check(&p, &region, 1e-9).admissible);
    }

    #[test]
    fn disk_boundary_is_unit_circle() {
        let pts = region_boundary(&LmiRegion::unit_disk(), &PlotGrid::new((-1.5, 1.5), (-1.5, 1.5), 41, 41));
        assert!(pts.len() > 40);
        for p in pts {
            assert!(((p.re * p.re + p.im * p.im).sqrt() - 1.0).abs() <= 1e-5, "{p:?}");
        }
    }

    #[test]
    fn scatter_of_negative_identity() {
        let pair = MatrixPair::new(Mat::identity(3, 3), -Mat::identity(3, 3)).unwrap();
        let grid = PlotGrid::new((-2.0, 2.0), (-2.0, 2.0), 5, 5);
        let b = region_plot_data(&LmiRegion::hurwitz(), &[("A".into(), pair)], &grid).unwrap();
        assert_eq!(b.eigenvalues.len(), 3);
        assert!(b.eigenvalues.iter().all(|p| (p.re + 1.0).abs() < 1e-12 && p.im.abs() < 1e-12));
    }

    #[test]
    fn empty_table() {
        assert!(run_table(&[], &RunConfig::default()).unwrap().is_empty());
    }
}
