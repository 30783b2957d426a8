//! Nearest Hurwitz-admissible pair to Grcar(n, k) with the fast gradient method.
//!
//! cargo run --release --example hurwitz_grcar -- [n] [budget_s]

use omega_dh::{bench, fgm};

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10, |s| s.parse().expect("n"));
    let budget: f64 = args.next().map_or(30.0, |s| s.parse().expect("budget"));
    for k in 1..=3 {
        let p = bench::grcar(n, k)?;
        let res = fgm::solve_hurwitz(&p.e, &p.a, fgm::FgmOptions { max_time_s: budget, ..Default::default() })?;
        println!(
            "Grcar({n},{k}): relative error {:.2}%  iterations {}  {:.1}s  admissible {}",
            100.0 * res.relative_error,
            res.iterations,
            res.elapsed_s,
            res.admissible
        );
    }
    Ok(())
}
