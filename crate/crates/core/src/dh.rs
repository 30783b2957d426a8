//! Dissipative-Hamiltonian parametrization `(E, A) = (TQ, (J−R)Q)` and the
//! LMI certificates that tie it to Ω-admissibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::pencil::{self, AdmissibilityVerdict, MatrixPair};
use crate::region::LmiRegion;

pub const DH_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

/// Solver variables `(T, J, R, Q)` realizing `(TQ, (J−R)Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DhParam {
    pub t: Mat,
    pub j: Mat,
    pub r: Mat,
    pub q: Mat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DhFile {
    schema_version: u32,
    #[serde(rename = "T")]
    t: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
}

impl DhParam {
    /// Stores `T`, `R` symmetrized and `J` skew-symmetrized.
    pub fn new(t: Mat, j: Mat, r: Mat, q: Mat) -> Result<Self> {
        let n = linalg::require_square(&t, "T")?;
        linalg::require_dim(&j, n, "J")?;
        linalg::require_dim(&r, n, "R")?;
        linalg::require_dim(&q, n, "Q")?;
        Ok(Self { t: linalg::sym(&t), j: linalg::skew(&j), r: linalg::sym(&r), q })
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// `(TQ, (J−R)Q)`; fails when `Q` is numerically singular.
    pub fn realize(&self) -> Result<MatrixPair> {
        let n = self.n().max(1) as f64;
        let cond = linalg::condition_number(&self.q);
        if cond > 1.0 / (n * 1e-12) {
            return Err(Error::Singular(format!("Q has condition number {cond:e}")));
        }
        Ok(self.realize_unchecked())
    }

    pub fn realize_unchecked(&self) -> MatrixPair {
        MatrixPair { e: &self.t * &self.q, a: (&self.j - &self.r) * &self.q }
    }

    pub fn to_json_string(&self) -> String {
        let f = DhFile {
            schema_version: DH_SCHEMA_VERSION,
            t: linalg::to_rows(&self.t),
            j: linalg::to_rows(&self.j),
            r: linalg::to_rows(&self.r),
            q: linalg::to_rows(&self.q),
        };
        serde_json::to_string_pretty(&f).expect("parameters serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: DhFile = serde_json::from_str(s)?;
        if f.schema_version != DH_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported DH schema_version {} (expected {DH_SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        Self::new(
            linalg::from_rows(&f.t, "T")?,
            linalg::from_rows(&f.j, "J")?,
            linalg::from_rows(&f.r, "R")?,
            linalg::from_rows(&f.q, "Q")?,
        )
    }
}

/// `‖A − (J−R)Q‖²_F + μ‖E − TQ‖²_F`.
pub fn objective(e: &Mat, a: &Mat, d: &DhParam, mu: f64) -> f64 {
    let ra = a - (&d.j - &d.r) * &d.q;
    let re = e - &d.t * &d.q;
    ra.norm_squared() + mu * re.norm_squared()
}

/// `B⊗T + (C−Cᵀ)⊗J − (C+Cᵀ)⊗R`.
pub fn assemble_m_hat(region: &LmiRegion, t: &Mat, j: &Mat, r: &Mat) -> Result<Mat> {
    let n = linalg::require_square(t, "T")?;
    linalg::require_dim(j, n, "J")?;
    linalg::require_dim(r, n, "R")?;
    let (b, c) = (region.b(), region.c());
    let ct = c.transpose();
    let mut m = linalg::kron(b, t) + linalg::kron(&(c - &ct), j) - linalg::kron(&(c + &ct), r);
    linalg::symmetrize_in_place(&mut m);
    Ok(m)
}

/// `B⊗QᵀE + (C−Cᵀ)⊗QᵀJQ − (C+Cᵀ)⊗QᵀRQ`.
pub fn assemble_m(region: &LmiRegion, e: &Mat, j: &Mat, r: &Mat, q: &Mat) -> Result<Mat> {
    let n = linalg::require_square(e, "E")?;
    linalg::require_dim(q, n, "Q")?;
    let qt = q.transpose();
    assemble_m_hat(region, &(&qt * e), &(&qt * j * q), &(&qt * r * q))
}

/// One named LMI or structural condition with its measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    /// The quantity compared against the threshold (an eigenvalue, a norm, ...).
    pub value: f64,
}

fn cond(name: &str, passed: bool, value: f64) -> Condition {
    Condition { name: name.to_string(), passed, value }
}

fn scale_of(m: &Mat) -> f64 {
    1.0 + m.norm()
}

fn neg_def(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = linalg::lambda_max(m);
    cond(name, v <= -tol * scale_of(m), v)
}

fn neg_semidef(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = linalg::lambda_max(m);
    cond(name, v <= tol * scale_of(m), v)
}

fn pos_semidef(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = linalg::lambda_min(m);
    cond(name, v >= -tol * scale_of(m), v)
}

fn pos_def(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = linalg::lambda_min(m);
    cond(name, v >= tol * scale_of(m), v)
}

fn symmetric(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = (m - m.transpose()).norm();
    cond(name, v <= tol * scale_of(m), v)
}

fn skew_symmetric(name: &str, m: &Mat, tol: f64) -> Condition {
    let v = (m + m.transpose()).norm();
    cond(name, v <= tol * scale_of(m), v)
}

fn invertible(name: &str, m: &Mat) -> Condition {
    let c = linalg::condition_number(m);
    let n = m.nrows().max(1) as f64;
    cond(name, c.is_finite() && c <= 1.0 / (n * 1e-12), c)
}

fn open_left_half_plane(region: &LmiRegion, tol: f64) -> Condition {
    let hi = region.real_interval().map_or(f64::NEG_INFINITY, |iv| iv.hi);
    cond("region lies in the open left half-plane", hi < -tol, hi)
}

fn closed_left_half_plane(region: &LmiRegion, tol: f64) -> Condition {
    let hi = region.real_interval().map_or(f64::NEG_INFINITY, |iv| iv.hi);
    cond("region lies in the left half-plane", hi <= tol, hi)
}

fn all_pass(c: &[Condition]) -> bool {
    c.iter().all(|c| c.passed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyVerdict {
    pub certified: bool,
    pub conditions: Vec<Condition>,
    /// Independent spectral check of `(E, (J−R)Q)`.
    pub cross_check: AdmissibilityVerdict,
    /// Certified but the spectral check disagrees; must never happen.
    pub contradiction: bool,
}

/// Sufficient condition for Ω-admissibility of `(E, (J−R)Q)` when Ω lies in
/// the left half-plane.
pub fn verify_sufficiency(
    region: &LmiRegion,
    e: &Mat,
    j: &Mat,
    r: &Mat,
    q: &Mat,
    tol: f64,
) -> Result<SufficiencyVerdict> {
    let n = linalg::require_square(e, "E")?;
    for (m, name) in [(j, "J"), (r, "R"), (q, "Q")] {
        linalg::require_dim(m, n, name)?;
    }
    let qte = q.transpose() * e;
    let mut conditions = vec![
        closed_left_half_plane(region, tol),
        skew_symmetric("J is skew-symmetric", j, tol),
        symmetric("R is symmetric", r, tol),
        pos_def("R is positive definite", &linalg::sym(r), tol),
        invertible("Q is invertible", q),
        symmetric("QᵀE is symmetric", &qte, tol),
        pos_semidef("QᵀE is positive semidefinite", &linalg::sym(&qte), tol),
    ];
    let m = assemble_m(region, e, j, r, q)?;
    conditions.push(neg_def("M(E,J,R,Q) is negative definite", &m, tol));
    let certified = all_pass(&conditions);
    let pair = MatrixPair::new(e.clone(), (j - r) * q)?;
    let cross_check = pencil::admissibility_check(&pair, region, 0.0);
    let violated = !cross_check.report.is_regular
        || !cross_check.report.is_impulse_free
        || cross_check.worst_margin.is_some_and(|m| m < -1e-8);
    Ok(SufficiencyVerdict { certified, conditions, contradiction: certified && violated, cross_check })
}

/// DH factors from an LMI certificate `X`: `Q = X`, `R = −sym(AX⁻¹)`, `J = skew(AX⁻¹)`.
pub fn dh_from_x_certificate(a: &Mat, x: &Mat) -> Result<(Mat, Mat, Mat)> {
    let n = linalg::require_square(a, "A")?;
    linalg::require_dim(x, n, "X")?;
    let xinv = linalg::inverse(x, "certificate X is singular")?;
    let ax = a * xinv;
    Ok((linalg::skew(&ax), -linalg::sym(&ax), x.clone()))
}

/// Candidate certificates whose LMIs can be checked against a pair.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `EᵀX = XᵀE ⪰ 0`, `B⊗EᵀX + C⊗XᵀA + Cᵀ⊗AᵀX ≺ 0`; needs a nonempty uniform part.
    X { x: Mat },
    /// `EP, ES` symmetric PSD, `AS + (AS)ᵀ ≺ 0`, `B⊗EP + C⊗AP + Cᵀ⊗(AP)ᵀ + I_s⊗ES ⪯ 0`;
    /// Ω in the open left half-plane.
    PS { p: Mat, s: Mat },
    /// DH factors of `A` plus `S` with `SᵀE = EᵀS ⪰ 0` and
    /// `M(E,J,R,Q) + I_s⊗EᵀS ⪯ 0`; requires `E` invertible.
    S { j: Mat, r: Mat, q: Mat, s: Mat },
    /// DH factors of `A` with `B⊗EQ⁻¹ + (C−Cᵀ)⊗J − (C+Cᵀ)⊗R + I_s⊗EQ⁻¹ ⪯ 0`;
    /// sufficient only, valid for singular `E`.
    SingularE { j: Mat, r: Mat, q: Mat },
}

impl Certificate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::X { .. } => "x_certificate",
            Self::PS { .. } => "ps_certificate",
            Self::S { .. } => "s_certificate",
            Self::SingularE { .. } => "singular_e_certificate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerdict {
    pub kind: String,
    pub passed: bool,
    pub conditions: Vec<Condition>,
}

fn dh_factor_conditions(e: &Mat, a: &Mat, j: &Mat, r: &Mat, q: &Mat, tol: f64) -> Vec<Condition> {
    let qte = q.transpose() * e;
    let recon = (a - (j - r) * q).norm();
    vec![
        cond("A = (J−R)Q", recon <= tol * scale_of(a), recon),
        skew_symmetric("J is skew-symmetric", j, tol),
        symmetric("R is symmetric", r, tol),
        pos_def("R is positive definite", &linalg::sym(r), tol),
        invertible("Q is invertible", q),
        symmetric("QᵀE is symmetric", &qte, tol),
        pos_semidef("QᵀE is positive semidefinite", &linalg::sym(&qte), tol),
    ]
}

pub fn verify_certificate(
    c: &Certificate,
    p: &MatrixPair,
    region: &LmiRegion,
    tol: f64,
) -> Result<CertificateVerdict> {
    let n = p.n();
    let (e, a) = (&p.e, &p.a);
    let (b, cm) = (region.b(), region.c());
    let cmt = cm.transpose();
    let is = Mat::identity(region.size(), region.size());
    let conditions = match c {
        Certificate::X { x } => {
            linalg::require_dim(x, n, "X")?;
            let etx = e.transpose() * x;
            let xta = x.transpose() * a;
            let m = linalg::kron(b, &etx) + linalg::kron(cm, &xta) + linalg::kron(&cmt, &xta.transpose());
            vec![
                cond("uniform part of the region is nonempty", region.uniform_part_nonempty(), f64::NAN),
                symmetric("EᵀX is symmetric", &etx, tol),
                pos_semidef("EᵀX is positive semidefinite", &linalg::sym(&etx), tol),
                neg_def("M(E,A,X) is negative definite", &linalg::sym(&m), tol),
            ]
        }
        Certificate::PS { p: pm, s } => {
            linalg::require_dim(pm, n, "P")?;
            linalg::require_dim(s, n, "S")?;
            let ep = e * pm;
            let es = e * s;
            let as_ = a * s;
            let ap = a * pm;
            let m = linalg::kron(b, &ep)
                + linalg::kron(cm, &ap)
                + linalg::kron(&cmt, &ap.transpose())
                + linalg::kron(&is, &es);
            vec![
                open_left_half_plane(region, tol),
                symmetric("EP is symmetric", &ep, tol),
                pos_semidef("EP is positive semidefinite", &linalg::sym(&ep), tol),
                symmetric("ES is symmetric", &es, tol),
                pos_semidef("ES is positive semidefinite", &linalg::sym(&es), tol),
                neg_def("AS + (AS)ᵀ is negative definite", &(&as_ + as_.transpose()), tol),
                neg_semidef("M(E,A,P,S) is negative semidefinite", &linalg::sym(&m), tol),
            ]
        }
        Certificate::S { j, r, q, s } => {
            for (m, name) in [(j, "J"), (r, "R"), (q, "Q"), (s, "S")] {
                linalg::require_dim(m, n, name)?;
            }
            let ste = s.transpose() * e;
            let mut out = vec![
                open_left_half_plane(region, tol),
                invertible("E is invertible", e),
            ];
            out.extend(dh_factor_conditions(e, a, j, r, q, tol));
            out.push(invertible("S is invertible", s));
            out.push(symmetric("SᵀE is symmetric", &ste, tol));
            out.push(pos_semidef("SᵀE is positive semidefinite", &linalg::sym(&ste), tol));
            let m = assemble_m(region, e, j, r, q)? + linalg::kron(&is, &(e.transpose() * s));
            out.push(neg_semidef("M(E,J,R,Q,S) is negative semidefinite", &linalg::sym(&m), tol));
            out
        }
        Certificate::SingularE { j, r, q } => {
            for (m, name) in [(j, "J"), (r, "R"), (q, "Q")] {
                linalg::require_dim(m, n, name)?;
            }
            let mut out = vec![open_left_half_plane(region, tol)];
            out.extend(dh_factor_conditions(e, a, j, r, q, tol));
            let t = e * linalg::inverse(q, "Q is singular")?;
            let m = assemble_m_hat(region, &t, j, r)? + linalg::kron(&is, &t);
            out.push(neg_semidef("B⊗EQ⁻¹ + ... + I⊗EQ⁻¹ is negative semidefinite", &linalg::sym(&m), tol));
            out
        }
    };
    Ok(CertificateVerdict { kind: c.kind_name().to_string(), passed: all_pass(&conditions), conditions })
}

/// Convenience: certify a DH parameter via [`verify_sufficiency`] on its realized pair.
pub fn verify_param(region: &LmiRegion, d: &DhParam) -> Result<SufficiencyVerdict> {
    verify_sufficiency(region, &(&d.t * &d.q), &d.j, &d.r, &d.q, DEFAULT_CERT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{from_primitive, RegionPrimitive};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn randn(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn eye(n: usize) -> Mat {
        Mat::identity(n, n)
    }

    #[test]
    fn realize_examples() {
        let d = DhParam::new(eye(2), Mat::zeros(2, 2), eye(2), eye(2)).unwrap();
        let p = d.realize().unwrap();
        assert_eq!(p.e, eye(2));
        assert_eq!(p.a, -eye(2));

        let d0 = DhParam::new(Mat::zeros(2, 2), Mat::zeros(2, 2), eye(2), eye(2)).unwrap();
        let rep = pencil::spectrum(&d0.realize().unwrap());
        assert!(rep.is_regular && rep.is_impulse_free);
        assert_eq!((rep.num_finite(), rep.rank_e), (0, 0));

        let sing = DhParam::new(eye(2), Mat::zeros(2, 2), eye(2), Mat::zeros(2, 2)).unwrap();
        assert!(matches!(sing.realize(), Err(Error::Singular(_))));
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = DhParam::new(randn(&mut rng, 3), randn(&mut rng, 3), randn(&mut rng, 3), randn(&mut rng, 3))
            .unwrap();
        let back = DhParam::from_json_str(&d.to_json_string()).unwrap();
        assert!((back.t - &d.t).norm() < 1e-15 && (back.q - &d.q).norm() < 1e-15);
        let bad = d.to_json_string().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(DhParam::from_json_str(&bad).is_err());
    }

    #[test]
    fn m_hat_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = linalg::sym(&randn(&mut rng, 3));
        let hur = LmiRegion::hurwitz();
        let m = assemble_m_hat(&hur, &eye(3), &Mat::zeros(3, 3), &r).unwrap();
        assert!((m + &r * 2.0).norm() < 1e-15);

        let disk = LmiRegion::unit_disk();
        let m = assemble_m_hat(&disk, &eye(2), &Mat::zeros(2, 2), &Mat::zeros(2, 2)).unwrap();
        assert!((m + eye(4)).norm() < 1e-15);
    }

    #[test]
    fn lambda_max_of_m_hat_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let region = from_primitive(RegionPrimitive::Ellipsoid { q_e: -1.0, a_e: 2.0, b_e: 1.0 }).unwrap();
        for _ in 0..20 {
            let tri = |rng: &mut ChaCha8Rng| {
                (linalg::sym(&randn(rng, 3)), linalg::skew(&randn(rng, 3)), linalg::sym(&randn(rng, 3)))
            };
            let (t1, j1, r1) = tri(&mut rng);
            let (t2, j2, r2) = tri(&mut rng);
            let f = |t: &Mat, j: &Mat, r: &Mat| linalg::lambda_max(&assemble_m_hat(&region, t, j, r).unwrap());
            let mid = f(&((&t1 + &t2) * 0.5), &((&j1 + &j2) * 0.5), &((&r1 + &r2) * 0.5));
            assert!(mid <= 0.5 * (f(&t1, &j1, &r1) + f(&t2, &j2, &r2)) + 1e-12);
        }
    }

    #[test]
    fn m_congruence_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let region = from_primitive(RegionPrimitive::Disk { q: -0.5, r: 2.0 }).unwrap();
        for _ in 0..10 {
            let q = randn(&mut rng, 4) + eye(4) * 3.0;
            let t0 = randn(&mut rng, 4);
            let t = &t0 * t0.transpose();
            let e = &t * &q;
            let j = linalg::skew(&randn(&mut rng, 4));
            let r = linalg::sym(&randn(&mut rng, 4));
            let m = assemble_m(&region, &e, &j, &r, &q).unwrap();
            let iq = linalg::kron(&eye(2), &q);
            let tq = &e * linalg::inverse(&q, "Q").unwrap();
            let other = iq.transpose() * assemble_m_hat(&region, &tq, &j, &r).unwrap() * &iq;
            assert!((m - other).norm() <= 1e-10 * (1.0 + e.norm()));
        }
        // With Q = I the two assemblies coincide; for Hurwitz M = −2QᵀRQ.
        let e = linalg::sym(&randn(&mut rng, 3));
        let j = linalg::skew(&randn(&mut rng, 3));
        let r = linalg::sym(&randn(&mut rng, 3));
        let q = randn(&mut rng, 3);
        let m1 = assemble_m(&region, &e, &j, &r, &eye(3)).unwrap();
        assert!((m1 - assemble_m_hat(&region, &e, &j, &r).unwrap()).norm() < 1e-14);
        let mh = assemble_m(&LmiRegion::hurwitz(), &e, &j, &r, &q).unwrap();
        assert!((mh + q.transpose() * &r * &q * 2.0).norm() < 1e-12);
    }

    #[test]
    fn sufficiency_examples() {
        let hur = LmiRegion::hurwitz();
        let z = Mat::zeros(2, 2);
        let v = verify_sufficiency(&hur, &eye(2), &z, &eye(2), &eye(2), 1e-9).unwrap();
        assert!(v.certified && v.cross_check.admissible && !v.contradiction);

        let r = Mat::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        let j = Mat::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let v = verify_sufficiency(&hur, &eye(2), &j, &r, &eye(2), 1e-9).unwrap();
        assert!(!v.certified);
        assert!(v.conditions.iter().any(|c| c.name.contains("R is positive definite") && !c.passed));
        // The spectrum of J − R is −0.25 ± i·(…), still stable.
        assert!(v.cross_check.admissible);
    }

    #[test]
    fn scaled_random_quadruple_is_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let region = from_primitive(RegionPrimitive::LeftConicSector { a: -0.2, theta: 1.0 }).unwrap();
        let q = randn(&mut rng, 4) + eye(4) * 2.0;
        let t0 = randn(&mut rng, 4);
        let e = (&t0 * t0.transpose() + eye(4)) * &q;
        let j = linalg::skew(&randn(&mut rng, 4)) * 0.1;
        let r0 = randn(&mut rng, 4);
        let mut r = &r0 * r0.transpose() + eye(4);
        let mut scale = 1.0;
        while linalg::lambda_max(&assemble_m(&region, &e, &j, &r, &q).unwrap()) > -0.1 {
            r *= 2.0;
            scale *= 2.0;
            assert!(scale < 1e6);
        }
        let v = verify_sufficiency(&region, &e, &j, &r, &q, 1e-9).unwrap();
        assert!(v.certified, "{:?}", v.conditions);
        assert!(v.cross_check.admissible);
    }

    #[test]
    fn x_certificate_reconstruction() {
        let (j, r, q) = dh_from_x_certificate(&-eye(2), &eye(2)).unwrap();
        assert_eq!(j, Mat::zeros(2, 2));
        assert_eq!(r, eye(2));
        assert_eq!(q, eye(2));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = randn(&mut rng, 5);
        let (j, r, _) = dh_from_x_certificate(&a, &eye(5)).unwrap();
        assert!((j - linalg::skew(&a)).norm() < 1e-15);
        assert!((r + linalg::sym(&a)).norm() < 1e-15);
        for _ in 0..10 {
            let x = randn(&mut rng, 5) + eye(5) * 2.0;
            let (j, r, q) = dh_from_x_certificate(&a, &x).unwrap();
            assert!(((&j - &r) * &q - &a).norm() <= 1e-12 * a.norm());
        }
        assert!(dh_from_x_certificate(&a, &Mat::zeros(5, 5)).is_err());
    }

    #[test]
    fn certificate_examples() {
        let hur = LmiRegion::hurwitz();
        let stable = MatrixPair::new(eye(2), -eye(2)).unwrap();
        let unstable = MatrixPair::new(eye(2), eye(2)).unwrap();
        let x = Certificate::X { x: eye(2) };
        assert!(verify_certificate(&x, &stable, &hur, 1e-9).unwrap().passed);
        assert!(!verify_certificate(&x, &unstable, &hur, 1e-9).unwrap().passed);

        // P = S = I on (I, −I) with the strip −3 < Re z < −0.5: M = diag(0, −3) ⊗ I.
        let strip = from_primitive(RegionPrimitive::VerticalStrip { h: -3.0, k: -0.5 }).unwrap();
        let ps = Certificate::PS { p: eye(2), s: eye(2) };
        let v = verify_certificate(&ps, &stable, &strip, 1e-9).unwrap();
        assert_eq!(v.conditions.len(), 7);
        assert!(v.passed, "{:?}", v.conditions);
        let m_cond = v.conditions.last().unwrap();
        assert!(m_cond.value.abs() < 1e-14);

        let s = Certificate::S { j: Mat::zeros(2, 2), r: eye(2), q: eye(2), s: eye(2) };
        assert!(verify_certificate(&s, &stable, &strip, 1e-9).unwrap().passed);
        let sing = Certificate::SingularE { j: Mat::zeros(2, 2), r: eye(2), q: eye(2) };
        assert!(verify_certificate(&sing, &stable, &strip, 1e-9).unwrap().passed);
        // Outside the strip: (I, −5I) fails every strip certificate.
        let far = MatrixPair::new(eye(2), -eye(2) * 5.0).unwrap();
        let s5 = Certificate::S { j: Mat::zeros(2, 2), r: eye(2) * 5.0, q: eye(2), s: eye(2) };
        assert!(!verify_certificate(&s5, &far, &strip, 1e-9).unwrap().passed);
    }

    #[test]
    fn uniform_converse_with_x_equal_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let hur = LmiRegion::hurwitz();
        for _ in 0..50 {
            let n = 4;
            let t0 = randn(&mut rng, n);
            let t = &t0 * t0.transpose() + eye(n) * 0.1;
            let r0 = randn(&mut rng, n);
            let r = &r0 * r0.transpose() + eye(n) * 0.1;
            let q = randn(&mut rng, n) + eye(n) * 3.0;
            let d = DhParam::new(t, randn(&mut rng, n), r, q.clone()).unwrap();
            let p = d.realize().unwrap();
            assert!(pencil::admissibility_check(&p, &hur, 0.0).admissible);
            let v = verify_certificate(&Certificate::X { x: q }, &p, &hur, 1e-9).unwrap();
            assert!(v.passed, "{:?}", v.conditions);
        }
    }

    #[test]
    fn objective_examples() {
        let d = DhParam::new(eye(2), Mat::zeros(2, 2), eye(2), eye(2)).unwrap();
        assert_eq!(objective(&eye(2), &-eye(2), &d, 1.0), 0.0);
        let d0 = DhParam::new(eye(2), Mat::zeros(2, 2), Mat::zeros(2, 2), eye(2)).unwrap();
        assert_eq!(objective(&eye(2), &Mat::zeros(2, 2), &d0, 1.0), 0.0);
    }
}
