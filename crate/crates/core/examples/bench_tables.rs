//! Run the Hurwitz table at reduced budget and write results plus traces.
//!
//! cargo run --release --example bench_tables -- [out_dir] [budget_s]

use std::path::PathBuf;

use omega_dh::bench::{self, RunConfig};

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "bench_out".into()));
    let budget: f64 = args.next().map_or(5.0, |s| s.parse().expect("budget"));
    let instances = bench::hurwitz_suite(10, budget)?;
    let runs = bench::run_table(&instances, &RunConfig { workers: None, out_dir: Some(out.clone()) })?;
    println!("{:<28} {:>6} {:>12} {:>8}", "instance", "algo", "rel. err %", "time s");
    for r in &runs {
        let row = &r.row;
        println!(
            "{:<28} {:>6} {:>12.4} {:>8.2}",
            row.instance,
            row.algorithm,
            row.relative_error_pct.unwrap_or(f64::NAN),
            row.time_s.unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", out.join("results.csv").display());
    Ok(())
}
