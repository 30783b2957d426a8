//! Build LMI regions from primitives and classify a few points.
//!
//! cargo run --example region_membership

use num_complex::Complex64;
use omega_dh::region::{self, LmiRegion, RegionPrimitive, DEFAULT_MARGIN_TOL};

fn main() -> omega_dh::error::Result<()> {
    let disk = region::from_primitive(RegionPrimitive::Disk { q: 0.0, r: 1.0 })?;
    let sector = region::from_primitive(RegionPrimitive::LeftConicSector { a: 0.0, theta: std::f64::consts::FRAC_PI_4 })?;
    let both = region::intersect(&disk, &sector);

    let json = r#"{"intersect": [{"kind": "disk", "q": 0.0, "r": 1.0},
                                 {"kind": "left_half_plane", "k": 0.0}]}"#;
    let parsed = LmiRegion::from_json_str(json)?;

    let points = [
        Complex64::new(-0.5, 0.0),
        Complex64::new(-0.5, 0.7),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.3, 0.0),
        Complex64::new(1.0, 0.0),
    ];
    for (name, reg) in [("disk", &disk), ("disk ∩ sector", &both), ("disk ∩ lhp (json)", &parsed)] {
        println!("{name}: size {}, real interval {:?}", reg.size(), reg.real_interval());
        for z in points {
            let m = reg.membership(z, DEFAULT_MARGIN_TOL);
            println!("  {z:>12}  {:?}  margin {:+.6}", m.class, m.margin);
        }
    }
    println!("round trip: {}", serde_json::to_string(&both.to_json_value()).unwrap());
    Ok(())
}
