//! Realize a DH quadruple, evaluate the objective and check the region LMI.
//!
//! cargo run --example dh_realize

use omega_dh::dh::{self, DhParam};
use omega_dh::linalg::Mat;
use omega_dh::region::{self, RegionPrimitive};

fn main() -> omega_dh::error::Result<()> {
    let t = Mat::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let j = Mat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let r = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 1.0]));
    let q = Mat::identity(3, 3);
    let d = DhParam::new(t, j, r, q)?;
    let pair = d.realize()?;
    println!("E =\n{}A =\n{}", pair.e, pair.a);
    println!("{}", d.to_json_string());

    let sector = region::from_primitive(RegionPrimitive::LeftConicSector { a: 0.0, theta: 1.2 })?;
    let v = dh::verify_param(&sector, &d)?;
    for c in &v.conditions {
        println!("[{}] {} ({:+.3e})", if c.passed { "ok" } else { "--" }, c.name, c.value);
    }
    println!("certified {} / spectral check admissible {}", v.certified, v.cross_check.admissible);

    let perturbed = &pair.a + Mat::from_element(3, 3, 0.1);
    println!("objective against a perturbed A: {:.6}", dh::objective(&pair.e, &perturbed, &d, 1.0));
    Ok(())
}
