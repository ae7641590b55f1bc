//! Classical and generalized Dedekind sums, computed exactly, plus the
//! finite Fourier transform used as a floating point oracle for them.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::bernoulli::{p1, p2};
use crate::rational::{delta, floor, int, is_integer, Rational};
use crate::sl2z::{ext_gcd, SL2ZMatrix};
use crate::{Error, Result};

/// Default tolerance for the floating point Fourier checks.
pub const FOURIER_TOLERANCE: f64 = 1e-10;

/// `(a, c)` coprime with `d` the inverse of `a` modulo `|c|`, in `[0, |c|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoprimePair {
    pub a: i64,
    pub c: i64,
    pub d: i64,
}

impl CoprimePair {
    pub fn new(a: i64, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::ZeroModulus);
        }
        let (g, x, _) = ext_gcd(a, c);
        if g != 1 {
            return Err(Error::NotCoprime { a, c });
        }
        Ok(CoprimePair { a, c, d: x.rem_euclid(c.abs()) })
    }

    pub fn modulus(&self) -> i64 {
        self.c.abs()
    }
}

/// Numerator of `P_1(n / den)` over `2 den`, for `den > 0`.
fn p1_num(n: i128, den: i128) -> i128 {
    let u = n.rem_euclid(den);
    if u == 0 {
        0
    } else {
        2 * u - den
    }
}

/// `s(a, c)`.
pub fn classical_sum(a: i64, c: i64) -> Result<Rational> {
    CoprimePair::new(a, c)?;
    let n = c.unsigned_abs() as i128;
    let sg = c.signum() as i128;
    let mut acc: i128 = 0;
    for k in 1..n {
        acc += p1_num(sg * a as i128 * k, n) * p1_num(sg * k, n);
    }
    Ok(Rational::new(BigInt::from(acc), BigInt::from(4 * n * n)))
}

/// `s_{x,y}(a, c)`; depends on `(x, y)` only modulo `Z^2`.
pub fn generalized_sum(x: &Rational, y: &Rational, a: i64, c: i64) -> Result<Rational> {
    CoprimePair::new(a, c)?;
    Ok(generalized_sum_fast(x, y, a, c).unwrap_or_else(|| generalized_sum_slow(x, y, a, c)))
}

/// Integer accumulation over the common denominator `|c| lcm(den x, den y)`.
/// `None` when an intermediate would overflow.
fn generalized_sum_fast(x: &Rational, y: &Rational, a: i64, c: i64) -> Option<Rational> {
    let l = x.denom().lcm(y.denom());
    let xl = (x * Rational::from_integer(l.clone())).to_integer().to_i128()?;
    let yl = (y * Rational::from_integer(l.clone())).to_integer().to_i128()?;
    let l = l.to_i128()?;
    let cabs = c.unsigned_abs() as i128;
    let sg = c.signum() as i128;
    let den = cabs.checked_mul(l)?;
    let (a, c) = (a as i128, c as i128);
    let cy = c.checked_mul(yl)?;
    let mut acc: i128 = 0;
    for k in 0..cabs {
        let shifted = k.checked_mul(l)?.checked_add(xl)?;
        let first = a.checked_mul(shifted)?.checked_add(cy)?;
        let term = p1_num(sg * first, den).checked_mul(p1_num(sg * shifted, den))?;
        acc = acc.checked_add(term)?;
    }
    let total_den = den.checked_mul(den)?.checked_mul(4)?;
    Some(Rational::new(BigInt::from(acc), BigInt::from(total_den)))
}

fn generalized_sum_slow(x: &Rational, y: &Rational, a: i64, c: i64) -> Rational {
    let (ar, cr) = (int(a), int(c));
    (0..c.abs())
        .map(|k| {
            let t = (int(k) + x) / &cr;
            p1(&(&ar * &t + y)) * p1(&t)
        })
        .sum()
}

/// Floating point evaluation of `(1/4|c|) sum_p cot(pi d p / c) cot(pi p / c)`.
pub fn cotangent_sum(a: i64, c: i64) -> Result<Complex64> {
    let pair = CoprimePair::new(a, c)?;
    let n = pair.modulus();
    let sg = c.signum() as f64;
    let cot = |k: i64| {
        let t = PI * sg * k.rem_euclid(n) as f64 / n as f64;
        t.cos() / t.sin()
    };
    let total: f64 = (1..n).map(|p| cot(pair.d * p) * cot(p)).sum();
    Ok(Complex64::new(total / (4.0 * n as f64), 0.0))
}

/// Values `f(0), ..., f(|c| - 1)` of a `c`-periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunctionTable {
    pub c: i64,
    pub values: Vec<Complex64>,
}

impl PeriodicFunctionTable {
    pub fn new(c: i64, values: Vec<Complex64>) -> Result<Self> {
        if c == 0 {
            return Err(Error::ZeroModulus);
        }
        if values.len() != c.unsigned_abs() as usize {
            return Err(Error::Domain(format!("table for c = {c} needs {} values", c.abs())));
        }
        Ok(PeriodicFunctionTable { c, values })
    }

    pub fn from_fn(c: i64, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        Self::new(c, (0..c.abs()).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f(k)` for any integer `k`.
    pub fn at(&self, k: i64) -> Complex64 {
        self.values[k.rem_euclid(self.c.abs()) as usize]
    }

    /// `(f * g)(k) = sum_l f(l) g(k - l)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.c != other.c {
            return Err(Error::Domain("convolution of tables with different moduli".into()));
        }
        Self::from_fn(self.c, |k| (0..self.c.abs()).map(|l| self.at(l) * other.at(k - l)).sum())
    }

    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        if self.c != other.c {
            return Err(Error::Domain("product of tables with different moduli".into()));
        }
        Self::from_fn(self.c, |k| self.at(k) * other.at(k))
    }
}

/// `xi^e` with `xi = exp(2 pi i / c)`; the exponent is reduced first.
pub fn root_of_unity(c: i64, e: i64) -> Complex64 {
    let n = c.abs();
    let angle = 2.0 * PI * c.signum() as f64 * e.rem_euclid(n) as f64 / n as f64;
    Complex64::from_polar(1.0, angle)
}

/// `f^(p) = sum_k f(k) xi^{-kp}`.
pub fn finite_fourier_transform(f: &PeriodicFunctionTable) -> PeriodicFunctionTable {
    let c = f.c;
    PeriodicFunctionTable::from_fn(c, |p| (0..c.abs()).map(|k| f.at(k) * root_of_unity(c, -k * p)).sum())
        .expect("same modulus")
}

/// `f(k) = (1/|c|) sum_p f^(p) xi^{pk}`.
pub fn inverse_fourier_transform(fhat: &PeriodicFunctionTable) -> PeriodicFunctionTable {
    let c = fhat.c;
    let n = c.abs() as f64;
    PeriodicFunctionTable::from_fn(c, |k| {
        (0..c.abs()).map(|p| fhat.at(p) * root_of_unity(c, p * k)).sum::<Complex64>() / n
    })
    .expect("same modulus")
}

/// Closed form of the Fourier transform of `k -> P_1(a (k + x)/c + y)` at `p`.
pub fn p1_closed_fourier(x: &Rational, y: &Rational, a: i64, c: i64, p: i64) -> Result<Complex64> {
    let pair = CoprimePair::new(a, c)?;
    let n = pair.modulus();
    let sg = c.signum() as f64;
    let shifted = int(a) * x + int(c) * y;
    if p.rem_euclid(n) == 0 {
        return Ok(Complex64::new(sg * crate::rational::to_f64(&p1(&shifted)), 0.0));
    }
    let fl = floor(&shifted).mod_floor(&BigInt::from(n)).to_i64().expect("reduced");
    let dp = (pair.d as i128 * p as i128).rem_euclid(n as i128) as i64;
    let angle = PI * sg * dp as f64 / n as f64;
    let cot = angle.cos() / angle.sin();
    let phase = root_of_unity(c, ((pair.d as i128 * fl as i128 * p as i128).rem_euclid(n as i128)) as i64);
    let bracket = Complex64::new(-(delta(&shifted) as f64), cot);
    Ok(bracket * phase * (0.5 * sg))
}

/// Right hand side of the closed formula for `s_{x,y}(a,c) - s(a,c)`, valid
/// when `x` is in `[0, 1)` and `(Id - M^t)(x, y)` is integral.
pub fn sum_difference_closed(x: &Rational, y: &Rational, m: &SL2ZMatrix) -> Result<Rational> {
    let mat = SL2ZMatrix::new(m.a, m.b, m.c, m.d)?;
    CoprimePair::new(mat.a, mat.c)?;
    if *x < int(0) || *x >= int(1) {
        return Err(Error::Admissibility(format!("x = {x} not in [0, 1)")));
    }
    let (xp, yp) = mat.transpose_apply_rat(&(x.clone(), y.clone()));
    let (mr, nr) = (x - &xp, y - &yp);
    if !is_integer(&mr) || !is_integer(&nr) {
        return Err(Error::Admissibility(format!("(Id - M^t)({x}, {y}) is not integral")));
    }
    let mv = mr.to_integer();
    let n = mat.c.abs();
    let nb = BigInt::from(n);
    let r = mv.mod_floor(&nb).to_i64().expect("reduced");
    let d = int(mat.d);
    let nr_ = int(n);
    let mq = Rational::from_integer(mv.clone());
    let half = Rational::new(1.into(), 2.into());
    let quarter = Rational::new(1.into(), 4.into());
    let dx = int(delta(x));
    let mut acc = (p2(x) - Rational::new(1.into(), 6.into())) / &nr_;
    for k in 1..=(n - r) {
        acc += p1(&(&d * int(k) / &nr_));
    }
    let p1_dm = p1(&(&d * &mq / &nr_));
    acc += &half * &p1_dm;
    acc += &half * &dx * (p1(&(&mq / &nr_)) - &p1_dm);
    acc += &quarter * &dx * int(1 - delta(&(&mq / int(mat.c))));
    Ok(acc)
}
