//! Strip ∩ strip ∩ two parabolas: full solver against the E-frozen baseline.
//!
//! cargo run --release --example composite_region -- [seed] [budget_s]

use omega_dh::bcd::{self, BcdOptions};
use omega_dh::bench::{self, Generator};

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(2017, |s| s.parse().expect("seed"));
    let budget: f64 = args.next().map_or(60.0, |s| s.parse().expect("budget"));
    let p = Generator::Composite { n: 10, eps: 1.0, seed }.pair()?;
    let region = bench::composite_example_region();
    let base = bcd::solve_e_frozen_baseline(&p.e, &p.a, &region, 1.0)?;
    let full = bcd::solve_general(&p.e, &p.a, &region, BcdOptions { max_time_s: budget, ..Default::default() })?;
    for (name, r) in [("E frozen", &base), ("full", &full)] {
        println!(
            "{name:>8}: relative error {:.2}%  squared distance {:.4}  admissible {}",
            100.0 * r.relative_error,
            r.objective,
            r.admissible
        );
    }
    Ok(())
}
