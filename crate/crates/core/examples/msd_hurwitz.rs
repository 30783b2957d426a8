//! Mass-spring-damper pairs destabilized by −εI in the dissipation.
//!
//! cargo run --release --example msd_hurwitz -- [n] [budget_s]

use omega_dh::{bench, fgm, pencil};

fn main() -> omega_dh::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10, |s| s.parse().expect("n"));
    let budget: f64 = args.next().map_or(30.0, |s| s.parse().expect("budget"));
    for eps in [0.01, 0.05, 1.0] {
        let (p, _) = bench::msd(n, eps)?;
        let max_re = pencil::spectrum(&p).eigenvalues().iter().map(|z| z.re).fold(f64::MIN, f64::max);
        let res = fgm::solve_hurwitz(&p.e, &p.a, fgm::FgmOptions { max_time_s: budget, ..Default::default() })?;
        println!(
            "MSD({n}, {eps}): max Re λ = {max_re:+.4}  relative error {:.3e}  {:.1}s  admissible {}",
            res.relative_error, res.elapsed_s, res.admissible
        );
    }
    Ok(())
}
