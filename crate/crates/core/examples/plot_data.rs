//! Boundary and eigenvalue scatter for the composite region, before and after solving.
//!
//! cargo run --release --example plot_data -- [out_dir] [budget_s]

use std::path::PathBuf;

use omega_dh::bcd::{self, BcdOptions};
use omega_dh::bench::{self, Generator, PlotGrid};

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "plot_out".into()));
    let budget: f64 = args.next().map_or(20.0, |s| s.parse().expect("budget"));
    let p = Generator::Composite { n: 10, eps: 1.0, seed: 2017 }.pair()?;
    let region = bench::composite_example_region();
    let base = bcd::solve_e_frozen_baseline(&p.e, &p.a, &region, 1.0)?;
    let full = bcd::solve_general(&p.e, &p.a, &region, BcdOptions { max_time_s: budget, ..Default::default() })?;
    let pairs = vec![("input".to_string(), p), ("e_frozen".into(), base.pair), ("full".into(), full.pair.clone())];
    let grid = PlotGrid::new((-7.0, 7.0), (-4.0, 4.0), 281, 161);
    let bundle = bench::region_plot_data(&region, &pairs, &grid)?;
    bundle.write_to(&out)?;
    std::fs::create_dir_all(out.join("traces"))?;
    full.write_trace_csv(std::fs::File::create(out.join("traces/full.csv"))?)?;
    println!("{} boundary points, {} eigenvalues -> {}", bundle.boundary.len(), bundle.eigenvalues.len(), out.display());
    Ok(())
}
