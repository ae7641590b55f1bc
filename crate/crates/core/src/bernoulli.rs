//! Bernoulli polynomials, periodic Bernoulli functions and the zeta/eta
//! special values they produce.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{frac, int, is_integer, Rational};
use crate::{Error, Result};

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    // sum_{k<m+1} C(m+1,k) B_k = 0 for m >= 1
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        let mut acc = Rational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli_poly(n: usize, x: &Rational) -> Rational {
    let b = bernoulli_numbers(n);
    let mut acc = Rational::zero();
    let mut binom = BigInt::one();
    for (k, bk) in b.iter().enumerate() {
        acc += Rational::from_integer(binom.clone()) * bk * pow(x, n - k);
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    acc
}

fn pow(x: &Rational, e: usize) -> Rational {
    num_traits::pow(x.clone(), e)
}

/// `P_n(x)`; zero at integers for odd `n`.
pub fn periodic_bernoulli(n: usize, x: &Rational) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("periodic Bernoulli index must be >= 1".into()));
    }
    if n % 2 == 1 && is_integer(x) {
        return Ok(Rational::zero());
    }
    Ok(bernoulli_poly(n, &frac(x)))
}

/// Sawtooth `P_1`.
pub fn p1(x: &Rational) -> Rational {
    if is_integer(x) {
        Rational::zero()
    } else {
        frac(x) - Rational::new(1.into(), 2.into())
    }
}

/// `P_2(x) = f^2 - f + 1/6` with `f` the fractional part.
pub fn p2(x: &Rational) -> Rational {
    let f = frac(x);
    &f * &f - &f + Rational::new(1.into(), 6.into())
}

/// Hurwitz zeta at a non-positive integer, `zeta_q(-n) = -B_{n+1}(q)/(n+1)`.
pub fn hurwitz_zeta_nonpos(n: usize, q: &Rational) -> Result<Rational> {
    if !q.is_positive() || *q > int(1) {
        return Err(Error::Domain(format!("Hurwitz parameter {q} outside (0, 1]")));
    }
    Ok(-bernoulli_poly(n + 1, q) / int(n as i64 + 1))
}

/// `eta_q(0) = 2 P_1(q)`.
pub fn periodic_eta_zero(q: &Rational) -> Rational {
    p1(q) * int(2)
}

/// Periodic zeta function at `s0` in `{0, -1}`.
pub fn periodic_zeta_at(s0: i64, q: &Rational) -> Result<Rational> {
    match s0 {
        0 if is_integer(q) => Ok(int(-1)),
        0 => Ok(Rational::zero()),
        -1 => Ok(-p2(q)),
        _ => Err(Error::Unsupported(format!("periodic zeta only tabulated at 0 and -1, not {s0}"))),
    }
}
