//! LMI regions `{ z : B + Cz + Cᵀz̄ ≺ 0 }` built from standard primitives.
//!
//! Every primitive carries a characteristic pair `(B, C)` chosen so that the
//! Kronecker assembly `B⊗T + (C−Cᵀ)⊗J − (C+Cᵀ)⊗R` is congruent to the negated
//! per-primitive stability block returned by [`stability_lmi_blocks`]:
//!
//! ```text
//! stability_lmi_blocks(p, T, J, R) = (S⊗I)ᵀ · (−M̂) · (S⊗I),   S = p.table_congruence()
//! ```
//!
//! so the solvers only ever deal with the general assembly while the block
//! builders stay available for inspection and testing.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, CMat, Mat};

/// Default tolerance on `λ_max(f_Ω(z))` separating inside / boundary / outside.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionPrimitive {
    /// `x < a`, `|y| < (a − x)·tan θ`.
    LeftConicSector { a: f64, theta: f64 },
    /// `x > a`, `|y| < (x − a)·tan θ`.
    RightConicSector { a: f64, theta: f64 },
    /// `|z − q| < r`.
    Disk { q: f64, r: f64 },
    /// `h < x < k`.
    VerticalStrip { h: f64, k: f64 },
    /// `x < k`.
    LeftHalfPlane { k: f64 },
    /// `x > h`.
    RightHalfPlane { h: f64 },
    /// `(x − q_e)²/a_e² + y²/b_e² < 1`.
    Ellipsoid { q_e: f64, a_e: f64, b_e: f64 },
    /// `x < q_p − (c_p/2)·y²`.
    LeftParabola { q_p: f64, c_p: f64 },
    /// `x > q_p + (c_p/2)·y²`.
    RightParabola { q_p: f64, c_p: f64 },
    /// `x < 0`, `x²/a_h² − y²/b_h² > 1`.
    LeftHyperbola { a_h: f64, b_h: f64 },
    /// `x > 0`, `x²/a_h² − y²/b_h² > 1`.
    RightHyperbola { a_h: f64, b_h: f64 },
    /// `|y| < w`.
    HorizontalStrip { w: f64 },
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {v}") })
    }
}

impl RegionPrimitive {
    pub const ALL_KINDS: [&'static str; 12] = [
        "left_conic_sector",
        "right_conic_sector",
        "disk",
        "vertical_strip",
        "left_half_plane",
        "right_half_plane",
        "ellipsoid",
        "left_parabola",
        "right_parabola",
        "left_hyperbola",
        "right_hyperbola",
        "horizontal_strip",
    ];

    pub fn validate(&self) -> Result<()> {
        use RegionPrimitive::*;
        match *self {
            LeftConicSector { a, theta } | RightConicSector { a, theta } => {
                finite("a", a)?;
                if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
                    return Err(Error::InvalidParameter {
                        name: "theta",
                        reason: format!("must lie in (0, pi/2), got {theta}"),
                    });
                }
                Ok(())
            }
            Disk { q, r } => {
                finite("q", q)?;
                positive("r", r)
            }
            VerticalStrip { h, k } => {
                finite("h", h)?;
                finite("k", k)?;
                if h < k {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "h", reason: format!("need h < k, got h={h}, k={k}") })
                }
            }
            LeftHalfPlane { k } => finite("k", k),
            RightHalfPlane { h } => finite("h", h),
            Ellipsoid { q_e, a_e, b_e } => {
                finite("q_e", q_e)?;
                positive("a_e", a_e)?;
                positive("b_e", b_e)
            }
            LeftParabola { q_p, c_p } | RightParabola { q_p, c_p } => {
                finite("q_p", q_p)?;
                positive("c_p", c_p)
            }
            LeftHyperbola { a_h, b_h } | RightHyperbola { a_h, b_h } => {
                positive("a_h", a_h)?;
                positive("b_h", b_h)
            }
            HorizontalStrip { w } => positive("w", w),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        use RegionPrimitive::*;
        match self {
            LeftConicSector { .. } => "left_conic_sector",
            RightConicSector { .. } => "right_conic_sector",
            Disk { .. } => "disk",
            VerticalStrip { .. } => "vertical_strip",
            LeftHalfPlane { .. } => "left_half_plane",
            RightHalfPlane { .. } => "right_half_plane",
            Ellipsoid { .. } => "ellipsoid",
            LeftParabola { .. } => "left_parabola",
            RightParabola { .. } => "right_parabola",
            LeftHyperbola { .. } => "left_hyperbola",
            RightHyperbola { .. } => "right_hyperbola",
            HorizontalStrip { .. } => "horizontal_strip",
        }
    }

    /// Size `s` of the characteristic matrices.
    pub fn size(&self) -> usize {
        match self {
            RegionPrimitive::LeftHalfPlane { .. } | RegionPrimitive::RightHalfPlane { .. } => 1,
            _ => 2,
        }
    }

    /// Characteristic pair `(B, C)`.
    pub fn characteristic_pair(&self) -> (Mat, Mat) {
        use RegionPrimitive::*;
        let m2 = |v: [f64; 4]| Mat::from_row_slice(2, 2, &v);
        match *self {
            LeftConicSector { a, theta } => {
                let (s, c) = theta.sin_cos();
                (Mat::identity(2, 2) * (-2.0 * a * s), m2([s, c, -c, s]))
            }
            RightConicSector { a, theta } => {
                let (s, c) = theta.sin_cos();
                (Mat::identity(2, 2) * (2.0 * a * s), m2([-s, c, -c, -s]))
            }
            Disk { q, r } => (m2([-r, q, q, -r]), m2([0.0, 0.0, -1.0, 0.0])),
            VerticalStrip { h, k } => (m2([-2.0 * k, 0.0, 0.0, 2.0 * h]), m2([1.0, 0.0, 0.0, -1.0])),
            LeftHalfPlane { k } => (Mat::from_element(1, 1, -2.0 * k), Mat::from_element(1, 1, 1.0)),
            RightHalfPlane { h } => (Mat::from_element(1, 1, 2.0 * h), Mat::from_element(1, 1, -1.0)),
            Ellipsoid { q_e, a_e, b_e } => {
                let ratio = a_e / b_e;
                (
                    m2([-a_e, q_e, q_e, -a_e]),
                    m2([0.0, -(1.0 - ratio) / 2.0, -(1.0 + ratio) / 2.0, 0.0]),
                )
            }
            LeftParabola { q_p, c_p } => {
                let g = (c_p / 2.0).sqrt();
                (m2([-1.0, 0.0, 0.0, -q_p]), m2([0.0, g / 2.0, -g / 2.0, 0.5]))
            }
            RightParabola { q_p, c_p } => {
                let g = (c_p / 2.0).sqrt();
                (m2([-1.0, 0.0, 0.0, q_p]), m2([0.0, g / 2.0, -g / 2.0, -0.5]))
            }
            LeftHyperbola { a_h, b_h } => (
                m2([0.0, 1.0, 1.0, 0.0]),
                m2([0.5 / a_h, 0.5 / b_h, -0.5 / b_h, 0.5 / a_h]),
            ),
            RightHyperbola { a_h, b_h } => (
                m2([0.0, 1.0, 1.0, 0.0]),
                m2([-0.5 / a_h, 0.5 / b_h, -0.5 / b_h, -0.5 / a_h]),
            ),
            HorizontalStrip { w } => (Mat::identity(2, 2) * -w, m2([0.0, 0.5, -0.5, 0.0])),
        }
    }

    /// Fixed `s×s` matrix `S` with `stability_lmi_blocks = (S⊗I)ᵀ(−M̂)(S⊗I)`.
    pub fn table_congruence(&self) -> Mat {
        use RegionPrimitive::*;
        match self {
            LeftHalfPlane { .. } | RightHalfPlane { .. } => Mat::from_element(1, 1, FRAC_1_SQRT_2),
            VerticalStrip { .. } | LeftConicSector { .. } | RightConicSector { .. } => {
                Mat::identity(2, 2) * FRAC_1_SQRT_2
            }
            Disk { .. } | Ellipsoid { .. } => Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            _ => Mat::identity(2, 2),
        }
    }
}

impl fmt::Display for RegionPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// One diagonal block of an LMI region: a primitive or a raw `(B, C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPart {
    pub b: Mat,
    pub c: Mat,
    pub primitive: Option<RegionPrimitive>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmiRegion {
    b: Mat,
    c: Mat,
    parts: Vec<RegionPart>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub class: Membership,
    /// `−λ_max(f_Ω(z))`; positive inside.
    pub margin: f64,
}

/// Real points `(lo, hi)` of the region; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
}

const REAL_SEARCH_BOUND: f64 = 1e8;

pub fn from_primitive(p: RegionPrimitive) -> Result<LmiRegion> {
    p.validate()?;
    let (b, c) = p.characteristic_pair();
    Ok(LmiRegion {
        b: b.clone(),
        c: c.clone(),
        parts: vec![RegionPart { b, c, primitive: Some(p) }],
    })
}

pub fn intersect(r1: &LmiRegion, r2: &LmiRegion) -> LmiRegion {
    let mut parts = r1.parts.clone();
    parts.extend(r2.parts.iter().cloned());
    LmiRegion {
        b: block_diag(&[&r1.b, &r2.b]),
        c: block_diag(&[&r1.c, &r2.c]),
        parts,
    }
}

pub fn characteristic_matrix(region: &LmiRegion, z: Complex64) -> CMat {
    region.characteristic_matrix(z)
}

pub fn membership(region: &LmiRegion, z: Complex64, margin_tol: f64) -> MembershipResult {
    region.membership(z, margin_tol)
}

pub fn uniform_part_nonempty(region: &LmiRegion) -> bool {
    region.uniform_part_nonempty()
}

impl LmiRegion {
    pub fn from_raw(b: Mat, c: Mat) -> Result<Self> {
        let s = linalg::require_square(&b, "B")?;
        linalg::require_dim(&c, s, "C")?;
        if s == 0 {
            return Err(Error::InvalidParameter { name: "B", reason: "region of size 0".into() });
        }
        let mut b = b;
        linalg::symmetrize_in_place(&mut b);
        Ok(Self {
            b: b.clone(),
            c: c.clone(),
            parts: vec![RegionPart { b, c, primitive: None }],
        })
    }

    pub fn intersect_all(regions: &[LmiRegion]) -> Result<Self> {
        let (first, rest) = regions
            .split_first()
            .ok_or_else(|| Error::InvalidParameter { name: "intersect", reason: "empty list".into() })?;
        Ok(rest.iter().fold(first.clone(), |acc, r| intersect(&acc, r)))
    }

    pub fn hurwitz() -> Self {
        from_primitive(RegionPrimitive::LeftHalfPlane { k: 0.0 }).expect("valid primitive")
    }

    pub fn unit_disk() -> Self {
        from_primitive(RegionPrimitive::Disk { q: 0.0, r: 1.0 }).expect("valid primitive")
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    pub fn size(&self) -> usize {
        self.b.nrows()
    }

    pub fn parts(&self) -> &[RegionPart] {
        &self.parts
    }

    pub fn primitives(&self) -> Vec<RegionPrimitive> {
        self.parts.iter().filter_map(|p| p.primitive).collect()
    }

    pub fn characteristic_matrix(&self, z: Complex64) -> CMat {
        let s = self.size();
        CMat::from_fn(s, s, |i, j| {
            Complex64::new(self.b[(i, j)], 0.0) + z * self.c[(i, j)] + z.conj() * self.c[(j, i)]
        })
    }

    pub fn lambda_max_at(&self, z: Complex64) -> f64 {
        if z.im == 0.0 {
            // real argument: f is real symmetric
            let s = &self.c + self.c.transpose();
            return linalg::lambda_max(&(&self.b + s * z.re));
        }
        linalg::hermitian_eigenvalues(&self.characteristic_matrix(z))
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn membership(&self, z: Complex64, margin_tol: f64) -> MembershipResult {
        let lmax = self.lambda_max_at(z);
        let class = if lmax < -margin_tol {
            Membership::Inside
        } else if lmax > margin_tol {
            Membership::Outside
        } else {
            Membership::Boundary
        };
        MembershipResult { class, margin: -lmax }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.membership(z, DEFAULT_MARGIN_TOL).class == Membership::Inside
    }

    /// `Ω_u = { z : Cz + Cᵀz̄ ≺ 0 }` is nonempty iff `C + Cᵀ` is definite.
    pub fn uniform_part_nonempty(&self) -> bool {
        let s = &self.c + self.c.transpose();
        let ev = linalg::sym_eigenvalues(&s);
        let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        ev.iter().all(|&v| v > tol) || ev.iter().all(|&v| v < -tol)
    }

    /// The set of real points of the region. A convex region symmetric about
    /// the real axis is nonempty iff it contains a real point, and its
    /// supremum of `Re z` is attained along the real axis.
    pub fn real_interval(&self) -> Option<RealInterval> {
        let g = |x: f64| self.lambda_max_at(Complex64::new(x, 0.0));
        let (mut a, mut b) = (-REAL_SEARCH_BOUND, REAL_SEARCH_BOUND);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let (mut g1, mut g2) = (g(x1), g(x2));
        for _ in 0..200 {
            if g1 <= g2 {
                b = x2;
                x2 = x1;
                g2 = g1;
                x1 = b - ratio * (b - a);
                g1 = g(x1);
            } else {
                a = x1;
                x1 = x2;
                g1 = g2;
                x2 = a + ratio * (b - a);
                g2 = g(x2);
            }
        }
        let (xmin, gmin) = if g1 <= g2 { (x1, g1) } else { (x2, g2) };
        if gmin >= 0.0 {
            return None;
        }
        let bisect = |inside: f64, outside: f64| {
            let (mut i, mut o) = (inside, outside);
            for _ in 0..200 {
                let m = 0.5 * (i + o);
                if g(m) < 0.0 {
                    i = m;
                } else {
                    o = m;
                }
            }
            0.5 * (i + o)
        };
        let lo = if g(-REAL_SEARCH_BOUND) < 0.0 {
            f64::NEG_INFINITY
        } else {
            bisect(xmin, -REAL_SEARCH_BOUND)
        };
        let hi = if g(REAL_SEARCH_BOUND) < 0.0 {
            f64::INFINITY
        } else {
            bisect(xmin, REAL_SEARCH_BOUND)
        };
        Some(RealInterval { lo, hi })
    }

    pub fn is_empty(&self) -> bool {
        self.real_interval().is_none()
    }

    /// Whether every point satisfies `Re z ≤ tol`.
    pub fn in_closed_left_half_plane(&self, tol: f64) -> bool {
        match self.real_interval() {
            None => true,
            Some(iv) => iv.hi <= tol,
        }
    }

    /// A real point well inside the region: the midpoint of the real interval,
    /// with infinite ends replaced by a finite window around the other end.
    pub fn interior_real_point(&self) -> Option<f64> {
        let iv = self.real_interval()?;
        let (lo, hi) = match (iv.lo.is_finite(), iv.hi.is_finite()) {
            (true, true) => (iv.lo, iv.hi),
            (true, false) => (iv.lo, iv.lo + 2.0 * iv.lo.abs().max(1.0)),
            (false, true) => (iv.hi - 2.0 * iv.hi.abs().max(1.0), iv.hi),
            (false, false) => (-1.0, 1.0),
        };
        Some(0.5 * (lo + hi))
    }

    /// True for the open left half-plane `Re z < 0` (any positive scaling).
    pub fn is_hurwitz(&self) -> bool {
        self.size() == 1 && self.b[(0, 0)] == 0.0 && self.c[(0, 0)] > 0.0
    }

    /// Parse a region spec: `{"intersect": [...]}`, `{"raw": {"B": .., "C": ..}}`
    /// or a single primitive `{"kind": "disk", "q": 0, "r": 1}`.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Format("region spec must be a JSON object".into()))?;
        if let Some(list) = obj.get("intersect") {
            let items = list
                .as_array()
                .ok_or_else(|| Error::Format("`intersect` must be an array".into()))?;
            let regions = items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    Self::from_json_value(item)
                        .map_err(|e| Error::Format(format!("intersect[{i}]: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::intersect_all(&regions);
        }
        if let Some(raw) = obj.get("raw") {
            let raw: RawRegion = serde_json::from_value(raw.clone())
                .map_err(|e| Error::Format(format!("raw region: {e}")))?;
            return Self::from_raw(linalg::from_rows(&raw.b, "B")?, linalg::from_rows(&raw.c, "C")?);
        }
        if obj.contains_key("kind") {
            let p: RegionPrimitive = serde_json::from_value(v.clone())
                .map_err(|e| Error::Format(format!("region primitive: {e}")))?;
            return from_primitive(p);
        }
        Err(Error::Format("region spec needs one of `intersect`, `raw` or `kind`".into()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }

    pub fn to_json_value(&self) -> Value {
        if self.parts.iter().all(|p| p.primitive.is_some()) {
            let prims: Vec<Value> = self
                .primitives()
                .iter()
                .map(|p| serde_json::to_value(p).expect("primitive serializes"))
                .collect();
            if prims.len() == 1 {
                return prims.into_iter().next().unwrap();
            }
            return serde_json::json!({ "intersect": prims });
        }
        serde_json::json!({ "raw": { "B": linalg::to_rows(&self.b), "C": linalg::to_rows(&self.c) } })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

/// Per-primitive stability block for pairs `(TQ, (J−R)Q)`; the pair's finite
/// spectrum lies in the primitive's region when the block is positive
/// definite, `T ⪰ 0` and the pair is regular.
pub fn stability_lmi_blocks(p: &RegionPrimitive, t: &Mat, j: &Mat, r: &Mat) -> Result<Mat> {
    let n = linalg::require_square(t, "T")?;
    linalg::require_dim(j, n, "J")?;
    linalg::require_dim(r, n, "R")?;
    use RegionPrimitive::*;
    let blk = |a: Mat, b: Mat, c: Mat, d: Mat| {
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, n)).copy_from(&b);
        m.view_mut((n, 0), (n, n)).copy_from(&c);
        m.view_mut((n, n), (n, n)).copy_from(&d);
        m
    };
    let out = match *p {
        LeftConicSector { a, theta } => {
            let (s, c) = theta.sin_cos();
            let d = (t * a + r) * s;
            blk(d.clone(), j * -c, j * c, d)
        }
        RightConicSector { a, theta } => {
            let (s, c) = theta.sin_cos();
            let d = (t * a + r) * -s;
            blk(d.clone(), j * -c, j * c, d)
        }
        Disk { q, r: rad } => blk(t * rad, t * q - j + r, t * q + j + r, t * rad),
        VerticalStrip { h, k } => blk(t * k + r, Mat::zeros(n, n), Mat::zeros(n, n), -(t * h) - r),
        LeftHalfPlane { k } => t * k + r,
        RightHalfPlane { h } => -(t * h) - r,
        Ellipsoid { q_e, a_e, b_e } => {
            let ratio = a_e / b_e;
            blk(t * a_e, t * q_e - j * ratio + r, t * q_e + j * ratio + r, t * a_e)
        }
        LeftParabola { q_p, c_p } => {
            let g = (c_p / 2.0).sqrt();
            blk(t.clone(), j * -g, j * g, t * q_p + r)
        }
        RightParabola { q_p, c_p } => {
            let g = (c_p / 2.0).sqrt();
            blk(t.clone(), j * -g, j * g, -(t * q_p) - r)
        }
        LeftHyperbola { a_h, b_h } => blk(r / a_h, -t - j / b_h, -t + j / b_h, r / a_h),
        RightHyperbola { a_h, b_h } => blk(-r / a_h, -t - j / b_h, -t + j / b_h, -r / a_h),
        HorizontalStrip { w } => blk(t * w, -j, j.clone(), t * w),
    };
    Ok(out)
}
