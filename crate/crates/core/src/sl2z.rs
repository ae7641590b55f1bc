//! SL(2,Z): classification into elliptic, parabolic and hyperbolic
//! elements, the parabolic normal form, and the action of `M^op` on the
//! upper half plane.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::rational::{rat, Rational};
use crate::{Error, Result};

/// Row-major `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SL2ZMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2ZMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::Determinant(det));
        }
        Ok(SL2ZMatrix { a, b, c, d })
    }

    pub const IDENTITY: SL2ZMatrix = SL2ZMatrix { a: 1, b: 0, c: 0, d: 1 };

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    /// `(tr M)^2 - 4`.
    pub fn discriminant(&self) -> i128 {
        let t = self.trace() as i128;
        t * t - 4
    }

    pub fn mul(&self, o: &SL2ZMatrix) -> SL2ZMatrix {
        SL2ZMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> SL2ZMatrix {
        SL2ZMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn transpose(&self) -> SL2ZMatrix {
        SL2ZMatrix { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn neg(&self) -> SL2ZMatrix {
        SL2ZMatrix { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn pow(&self, n: u32) -> SL2ZMatrix {
        (0..n).fold(Self::IDENTITY, |acc, _| acc.mul(self))
    }

    pub fn is_plus_minus_identity(&self) -> bool {
        self.b == 0 && self.c == 0 && self.a == self.d
    }

    /// `M^t` applied to an integer vector.
    pub fn transpose_apply(&self, v: (i64, i64)) -> (i64, i64) {
        (self.a * v.0 + self.c * v.1, self.b * v.0 + self.d * v.1)
    }

    /// `M^t` applied to a rational vector.
    pub fn transpose_apply_rat(&self, v: &(Rational, Rational)) -> (Rational, Rational) {
        let (a, b, c, d) = (rat(self.a, 1), rat(self.b, 1), rat(self.c, 1), rat(self.d, 1));
        (&a * &v.0 + &c * &v.1, &b * &v.0 + &d * &v.1)
    }
}

impl fmt::Display for SL2ZMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum MonodromyClass {
    /// Finite order; `theta` is read off the trace.
    Elliptic {
        #[serde(serialize_with = "crate::rational::serialize")]
        theta: Rational,
    },
    /// `conjugator^-1 M conjugator = epsilon [[1, l], [0, 1]]`.
    Parabolic { epsilon: i64, l: i64, conjugator: SL2ZMatrix },
    Hyperbolic { kappa: f64, alpha: f64, beta: f64 },
    Identity { epsilon: i64 },
}

impl MonodromyClass {
    pub fn name(&self) -> &'static str {
        match self {
            MonodromyClass::Elliptic { .. } => "elliptic",
            MonodromyClass::Parabolic { .. } => "parabolic",
            MonodromyClass::Hyperbolic { .. } => "hyperbolic",
            MonodromyClass::Identity { .. } => "identity",
        }
    }
}

pub fn classify(m: &SL2ZMatrix) -> Result<MonodromyClass> {
    SL2ZMatrix::new(m.a, m.b, m.c, m.d)?;
    if m.is_plus_minus_identity() {
        return Ok(MonodromyClass::Identity { epsilon: m.a });
    }
    let disc = m.discriminant();
    if disc < 0 {
        let theta = match m.trace() {
            1 => rat(1, 6),
            0 => rat(1, 4),
            _ => rat(1, 3),
        };
        return Ok(MonodromyClass::Elliptic { theta });
    }
    if disc == 0 {
        let (epsilon, l, conjugator) = parabolic_normal_form(m)?;
        return Ok(MonodromyClass::Parabolic { epsilon, l, conjugator });
    }
    let (kappa, alpha, beta) = hyperbolic_data(m);
    Ok(MonodromyClass::Hyperbolic { kappa, alpha, beta })
}

fn hyperbolic_data(m: &SL2ZMatrix) -> (f64, f64, f64) {
    let t = m.trace() as f64;
    let root = (m.discriminant() as f64).sqrt();
    // pick the eigenvalue of larger modulus without cancellation
    let kappa = if t > 0.0 { (t + root) / 2.0 } else { (t - root) / 2.0 };
    let c = m.c as f64;
    let a = m.a as f64;
    (kappa, (kappa - a) / c, (1.0 / kappa - a) / c)
}

/// `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a >= 0 {
            (a, 1, 0)
        } else {
            (-a, -1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = q b + r with r = a.rem_euclid(b)
        let q = (a - a.rem_euclid(b)) / b;
        (g, y, x - q * y)
    }
}

/// Returns `(epsilon, l, g)` with `g^-1 M g = epsilon [[1, l], [0, 1]]`.
pub fn parabolic_normal_form(m: &SL2ZMatrix) -> Result<(i64, i64, SL2ZMatrix)> {
    if m.discriminant() != 0 || m.is_plus_minus_identity() {
        return Err(Error::Class(format!("{m} is not parabolic")));
    }
    let epsilon = m.trace().signum();
    let n = if epsilon < 0 { m.neg() } else { *m };
    let g = if n.c == 0 {
        SL2ZMatrix::IDENTITY
    } else {
        let (gg, _, _) = ext_gcd(n.a - n.d, 2 * n.c);
        let p = (n.a - n.d) / gg;
        let q = 2 * n.c / gg;
        // p r - q s = 1
        let (_, x, y) = ext_gcd(p, q);
        SL2ZMatrix::new(p, -y, q, x)?
    };
    let normal = g.inverse().mul(&n).mul(&g);
    debug_assert!(normal.a == 1 && normal.c == 0 && normal.d == 1);
    if !(normal.a == 1 && normal.c == 0 && normal.d == 1) {
        return Err(Error::Class(format!("normal form of {m} failed")));
    }
    Ok((epsilon, normal.b, g))
}

/// Point of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperHalfPoint {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl UpperHalfPoint {
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma1.is_finite() || !sigma2.is_finite() {
            return Err(Error::Domain(format!("imaginary part {sigma2} must be positive")));
        }
        Ok(UpperHalfPoint { sigma1, sigma2 })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma1, self.sigma2)
    }
}

/// `M^op sigma = (d sigma + b) / (c sigma + a)`.
pub fn moebius_op_action(m: &SL2ZMatrix, sigma: UpperHalfPoint) -> UpperHalfPoint {
    let s = sigma.to_complex();
    let w = (s * m.d as f64 + m.b as f64) / (s * m.c as f64 + m.a as f64);
    // Im w = sigma2 / |c sigma + a|^2, computed directly to keep it positive
    let den = (s * m.c as f64 + m.a as f64).norm_sqr();
    UpperHalfPoint { sigma1: w.re, sigma2: sigma.sigma2 / den }
}

/// `M^op` on a real point, `None` at the pole.
pub fn moebius_op_real(m: &SL2ZMatrix, x: f64) -> Option<f64> {
    let den = m.c as f64 * x + m.a as f64;
    if den == 0.0 {
        None
    } else {
        Some((m.d as f64 * x + m.b as f64) / den)
    }
}

/// Hyperbolic path data shared by the path and its derivative.
#[derive(Debug, Clone, Copy)]
pub struct InvariantPath {
    pub alpha: f64,
    pub beta: f64,
    /// `ln |kappa|`
    pub log_kappa: f64,
}

impl InvariantPath {
    pub fn new(m: &SL2ZMatrix) -> Result<Self> {
        match classify(m)? {
            MonodromyClass::Hyperbolic { alpha, beta, .. } => {
                let t = m.trace().unsigned_abs() as f64;
                let abs_kappa = (t + (m.discriminant() as f64).sqrt()) / 2.0;
                Ok(InvariantPath { alpha, beta, log_kappa: abs_kappa.ln() })
            }
            other => Err(Error::Class(format!("{m} is {}, not hyperbolic", other.name()))),
        }
    }

    pub fn at(&self, t: f64) -> UpperHalfPoint {
        let up = (2.0 * t * self.log_kappa).exp();
        let down = 1.0 / up;
        let den = up + down;
        UpperHalfPoint {
            sigma1: (self.alpha * up + self.beta * down) / den,
            sigma2: (self.alpha - self.beta).abs() / den,
        }
    }

    /// `sigma1'(t) / sigma2(t)`.
    pub fn arc_integrand(&self, t: f64) -> f64 {
        let s = (2.0 * t * self.log_kappa).exp();
        (self.alpha - self.beta).signum() * 4.0 * self.log_kappa * s / (s * s + 1.0)
    }
}

pub fn invariant_path_sigma(m: &SL2ZMatrix, t: f64) -> Result<UpperHalfPoint> {
    Ok(InvariantPath::new(m)?.at(t))
}
