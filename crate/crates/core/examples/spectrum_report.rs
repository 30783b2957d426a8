//! Spectrum, regularity and admissibility of a descriptor pair.
//!
//! cargo run --example spectrum_report [pair.json|pair.csv]

use omega_dh::linalg::Mat;
use omega_dh::pencil::{self, MatrixPair};
use omega_dh::region::LmiRegion;

fn main() -> omega_dh::error::Result<()> {
    let pair = match std::env::args().nth(1) {
        Some(path) => MatrixPair::load(path.as_ref())?,
        // Index-1 pair: one infinite eigenvalue, finite ones at −1 ± i.
        None => MatrixPair::new(
            Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            Mat::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.0, 1.0]),
        )?,
    };
    let reg = pencil::regularity_check(&pair);
    println!("regular: {} (sigma ratio {:.3e} at s = {})", reg.is_regular, reg.relative_sigma_min, reg.witness);
    let report = pencil::spectrum(&pair);
    println!("rank(E) = {}, finite = {}, infinite = {}", report.rank_e, report.num_finite(), report.num_infinite);
    for ev in &report.finite_eigenvalues {
        println!("  {:+.10} {:+.10}i  residuals {:.1e} / {:.1e}", ev.re, ev.im, ev.right_residual, ev.left_residual);
    }
    for (name, region) in [("hurwitz", LmiRegion::hurwitz()), ("unit disk", LmiRegion::unit_disk())] {
        let v = pencil::admissibility_check(&pair, &region, 1e-9);
        println!("{name}: admissible = {}", v.admissible);
        for f in &v.failures {
            println!("  {f}");
        }
    }
    Ok(())
}
