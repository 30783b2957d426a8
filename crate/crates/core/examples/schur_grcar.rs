//! Nearest Schur-admissible pair (unit disk) by block coordinate descent.
//!
//! cargo run --release --example schur_grcar -- [k] [budget_s]

use omega_dh::bcd::{self, BcdOptions};
use omega_dh::bench;
use omega_dh::region::LmiRegion;

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(1, |s| s.parse().expect("k"));
    let budget: f64 = args.next().map_or(100.0, |s| s.parse().expect("budget"));
    let p = bench::grcar(10, k)?;
    let res = bcd::solve_general(&p.e, &p.a, &LmiRegion::unit_disk(), BcdOptions { max_time_s: budget, ..Default::default() })?;
    for s in res.bcd_steps.iter().filter(|s| s.iteration % 10 == 1) {
        println!(
            "  it {:>4}  f {:.8} -> {:.8} (Q) -> {:.8} (SDP)  beta {:.3}",
            s.iteration, s.objective_start, s.objective_after_q, s.objective_after_sdp, s.beta
        );
    }
    println!(
        "Grcar(10,{k}) in the unit disk: relative error {:.2}%  outer iterations {}  {:.1}s  admissible {}",
        100.0 * res.relative_error,
        res.iterations,
        res.elapsed_s,
        res.admissible
    );
    Ok(())
}
