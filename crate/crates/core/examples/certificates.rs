//! Verify LMI certificates and turn an `X` certificate into DH factors.
//!
//! cargo run --example certificates

use omega_dh::dh::{self, Certificate};
use omega_dh::linalg::Mat;
use omega_dh::pencil::MatrixPair;
use omega_dh::region::{self, LmiRegion, RegionPrimitive};

fn report(label: &str, v: &dh::CertificateVerdict) {
    println!("{label}: {} -> {}", v.kind, if v.passed { "passed" } else { "failed" });
    for c in &v.conditions {
        println!("    [{}] {} ({:+.3e})", if c.passed { "ok" } else { "--" }, c.name, c.value);
    }
}

fn main() -> omega_dh::error::Result<()> {
    let eye = Mat::identity(2, 2);
    let a = Mat::from_row_slice(2, 2, &[-1.0, 2.0, -0.5, -1.5]);
    let pair = MatrixPair::new(eye.clone(), a.clone())?;
    let hurwitz = LmiRegion::hurwitz();

    // For a uniform region a certificate is X = Q with X ≻ 0 solving the Lyapunov LMI.
    let x = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
    report("X certificate", &dh::verify_certificate(&Certificate::X { x: x.clone() }, &pair, &hurwitz, 1e-9)?);
    let (j, r, q) = dh::dh_from_x_certificate(&a, &x)?;
    println!("J =\n{j}R =\n{r}Q =\n{q}");
    let suff = dh::verify_sufficiency(&hurwitz, &eye, &j, &r, &q, 1e-9)?;
    println!("sufficiency certified: {}, contradiction: {}", suff.certified, suff.contradiction);

    // Strip −3 < Re z < −0.5: B ≠ 0, so the PS and S variants apply.
    let strip = region::from_primitive(RegionPrimitive::VerticalStrip { h: -3.0, k: -0.5 })?;
    let stable = MatrixPair::new(eye.clone(), -&eye)?;
    report("PS certificate", &dh::verify_certificate(&Certificate::PS { p: eye.clone(), s: eye.clone() }, &stable, &strip, 1e-9)?);
    let s_cert = Certificate::S { j: Mat::zeros(2, 2), r: eye.clone(), q: eye.clone(), s: eye.clone() };
    report("S certificate", &dh::verify_certificate(&s_cert, &stable, &strip, 1e-9)?);
    let far = MatrixPair::new(eye.clone(), -&eye * 5.0)?;
    let s_far = Certificate::S { j: Mat::zeros(2, 2), r: &eye * 5.0, q: eye.clone(), s: eye.clone() };
    report("S certificate at −5", &dh::verify_certificate(&s_far, &far, &strip, 1e-9)?);
    Ok(())
}
