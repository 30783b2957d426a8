//! Solve the convex (T, J, R) subproblem with Q fixed for a disk region.
//!
//! cargo run --release --example sdp_subproblem

use omega_dh::bench;
use omega_dh::linalg::Mat;
use omega_dh::region::LmiRegion;
use omega_dh::sdp::{self, ConvexSubproblem, SdpOptions};

fn main() -> omega_dh::error::Result<()> {
    let p = bench::grcar(6, 1)?;
    let sp = ConvexSubproblem::new(p.e.clone(), p.a.clone(), Mat::identity(6, 6), 1.0, Some(LmiRegion::unit_disk()))?;
    let sol = sdp::solve_subproblem(&sp, None, SdpOptions::default())?;
    println!(
        "objective {:.8}  newton {}  outer {}  gap {:.2e}  kkt {:.2e}  converged {}",
        sol.objective, sol.newton_iterations, sol.outer_iterations, sol.gap, sol.kkt_residual, sol.converged
    );
    for (name, m) in &sol.margins {
        println!("  margin {name}: {m:.3e}");
    }
    for row in &sol.trace {
        println!("  outer {:>2}  t = {:.3e}  obj {:.8}  gap {:.2e}", row.outer, row.barrier_t, row.objective, row.gap);
    }
    Ok(())
}
