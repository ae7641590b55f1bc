//! Floating point side: the series `E_nu` and `F_nu`, the Kronecker limit
//! identity, logarithms of (generalized) Dedekind eta functions and their
//! transformation laws, the flat torus spectrum, and numerical evaluation
//! of the hyperbolic eta form integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::bernoulli::{p1, p2};
use crate::dedekind::{classical_sum, generalized_sum};
use crate::moduli::TorusFlatConnection;
use crate::rational::{frac, int, is_integer, sign, to_f64, Rational};
use crate::sl2z::{moebius_op_action, InvariantPath, SL2ZMatrix, UpperHalfPoint};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Truncation and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesParams {
    pub tail_tolerance: f64,
    pub max_terms: usize,
    pub quad_tolerance: f64,
    pub poisson_switch_u: f64,
}

impl Default for SeriesParams {
    fn default() -> Self {
        SeriesParams { tail_tolerance: 1e-14, max_terms: 1_000_000, quad_tolerance: 1e-9, poisson_switch_u: 1.0 }
    }
}

/// A numerical value with the number of terms (or integrand evaluations)
/// spent and a bound or estimate for the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub terms_used: usize,
    pub error_bound: f64,
}

impl<T> Estimate<T> {
    fn map<U>(self, f: impl FnOnce(T) -> U) -> Estimate<U> {
        Estimate { value: f(self.value), terms_used: self.terms_used, error_bound: self.error_bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesMethod {
    DoubleSum,
    Cotangent,
}

fn expi(x: Complex64) -> Complex64 {
    (I * x).exp()
}

/// `exp(2 pi i w)`.
fn e2pi(w: Complex64) -> Complex64 {
    expi(w * (2.0 * PI))
}

struct Twist {
    nu1: f64,
    nu2: f64,
    nu1_zero: bool,
    integral: bool,
}

impl Twist {
    fn new(nu: &(Rational, Rational)) -> Self {
        let (a, b) = (frac(&nu.0), frac(&nu.1));
        Twist { nu1: to_f64(&a), nu2: to_f64(&b), nu1_zero: a.is_zero(), integral: a.is_zero() && b.is_zero() }
    }
}

fn non_convergence(terms: usize, tail: f64) -> Error {
    Error::NonConvergence { terms, tail }
}

/// `E_nu(sigma)` and its `sigma`-derivative from the double series, summed
/// term by term.
fn e_double_sum(sigma: UpperHalfPoint, tw: &Twist, params: &SeriesParams) -> Result<(Estimate<Complex64>, Complex64)> {
    let s = sigma.to_complex();
    let tol = params.tail_tolerance;
    let q = e2pi(s);
    let aq = q.norm();
    let z = s * tw.nu1 - tw.nu2;
    let qz = e2pi(z);
    let qz_inv = e2pi(-z);
    let two_pi_i = I * (2.0 * PI);
    let mut value = Complex64::zero();
    let mut deriv = Complex64::zero();
    let mut terms = 0usize;

    if !tw.nu1_zero {
        let r = qz.norm();
        let mut pw = Complex64::new(1.0, 0.0);
        let mut n = 1usize;
        loop {
            pw *= qz;
            value += pw / n as f64;
            deriv += two_pi_i * tw.nu1 * pw;
            terms += 1;
            let tail = r.powi(n as i32 + 1) * (n as f64 + 1.0) / (1.0 - r);
            if tail < tol {
                break;
            }
            if terms > params.max_terms {
                return Err(non_convergence(terms, tail));
            }
            n += 1;
        }
    }

    let big = qz_inv.norm();
    let mut qn1 = Complex64::new(1.0, 0.0);
    let mut n1 = 1usize;
    let outer_tail;
    loop {
        qn1 *= q;
        let x = qz * qn1;
        let y = qz_inv * qn1;
        let rmax = x.norm().max(y.norm());
        let (mut px, mut py) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut n2 = 1usize;
        loop {
            px *= x;
            py *= y;
            value += (px + py) / n2 as f64;
            deriv += two_pi_i * ((n1 as f64 + tw.nu1) * px + (n1 as f64 - tw.nu1) * py);
            terms += 1;
            let tail = rmax.powi(n2 as i32 + 1) * (n2 as f64 + 1.0) * (n1 as f64 + 1.0) * 2.0 / (1.0 - rmax);
            if tail < tol {
                break;
            }
            if terms > params.max_terms {
                return Err(non_convergence(terms, tail));
            }
            n2 += 1;
        }
        // remaining rows: sum_{n1' > n1} of |y'| (n1' + 1) / (1 - |y'|)^2
        let ynext = big * aq.powi(n1 as i32 + 1);
        let tail = 4.0 * ynext * (n1 as f64 + 2.0) / ((1.0 - aq).powi(2) * (1.0 - ynext).powi(2));
        if tail < tol {
            outer_tail = tail;
            break;
        }
        if terms > params.max_terms {
            return Err(non_convergence(terms, tail));
        }
        n1 += 1;
    }
    Ok((Estimate { value, terms_used: terms, error_bound: outer_tail + tol * n1 as f64 }, deriv))
}

/// Single series over `n2` after summing the geometric series in `n1`:
/// `cos(2 pi n z) cot(pi n sigma) + sin(2 pi n z) = cos(2 pi n z - pi n sigma) / sin(pi n sigma)`,
/// evaluated through exponentials so nothing overflows.
fn e_cotangent(sigma: UpperHalfPoint, tw: &Twist, params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let s = sigma.to_complex();
    let tol = params.tail_tolerance;
    let aq = (-2.0 * PI * sigma.sigma2).exp();
    let z = s * tw.nu1 - tw.nu2;
    let ratio = if tw.nu1_zero {
        aq
    } else {
        let r = (-2.0 * PI * tw.nu1 * sigma.sigma2).exp();
        r.max(aq / r)
    };
    let mut value = Complex64::zero();
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let qn = e2pi(s * nf);
        let plus = e2pi(z * nf);
        let minus = e2pi(-z * nf);
        let term = if tw.nu1_zero {
            // i cos(2 pi n z) (cot(pi n sigma) + i)
            (plus + minus) * qn / (Complex64::new(1.0, 0.0) - qn)
        } else {
            (plus + qn * minus) / (Complex64::new(1.0, 0.0) - qn)
        };
        value += term / nf;
        let tail = 2.0 * ratio.powi(n as i32 + 1) / ((nf + 1.0) * (1.0 - ratio) * (1.0 - aq));
        if tail < tol {
            return Ok(Estimate { value, terms_used: n, error_bound: tail });
        }
        if n > params.max_terms {
            return Err(non_convergence(n, tail));
        }
        n += 1;
    }
}

/// `E_nu(sigma)`, with `nu1` reduced mod 1 first.
pub fn e_series(
    sigma: UpperHalfPoint,
    nu: &(Rational, Rational),
    params: &SeriesParams,
    method: SeriesMethod,
) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    match method {
        SeriesMethod::DoubleSum => Ok(e_double_sum(sigma, &tw, params)?.0),
        SeriesMethod::Cotangent => e_cotangent(sigma, &tw, params),
    }
}

/// Term-wise `sigma`-derivative of `E_nu`.
pub fn e_series_derivative(sigma: UpperHalfPoint, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    let (est, deriv) = e_double_sum(sigma, &tw, params)?;
    Ok(Estimate { value: deriv, terms_used: est.terms_used, error_bound: est.error_bound })
}

/// Smallest eigenvalue of the form `|v2 - sigma v1|^2`.
fn form_min_eigen(sigma: UpperHalfPoint) -> f64 {
    let a = sigma.sigma1 * sigma.sigma1 + sigma.sigma2 * sigma.sigma2;
    let b = -sigma.sigma1;
    let tr = a + 1.0;
    let det = a - b * b;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    det / (tr / 2.0 + disc)
}

/// Direct lattice sum for `F_nu(sigma, u)`.
pub fn f_series_direct(sigma: UpperHalfPoint, u: f64, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    let s = sigma.to_complex();
    let s2 = sigma.sigma2;
    let mu = form_min_eigen(sigma);
    let budget = (1.0 / params.tail_tolerance).ln() + 12.0;
    let radius = (budget * s2 / (u * PI * PI * mu)).sqrt() + 1.0;
    let span = radius.ceil() as i64 + 1;
    let count = ((2 * span + 1) * (2 * span + 1)) as usize;
    if count > params.max_terms {
        return Err(non_convergence(count, f64::INFINITY));
    }
    let mut acc = Complex64::zero();
    for n1 in -span..=span {
        let v1 = n1 as f64 - tw.nu1;
        for n2 in -span..=span {
            let v2 = n2 as f64 - tw.nu2;
            let w = v2 - s * v1;
            let wbar = v2 - s.conj() * v1;
            acc += wbar * wbar * (-u * PI * PI * w.norm_sqr() / s2).exp();
        }
    }
    Ok(Estimate { value: acc * (PI * PI / (s2 * s2)), terms_used: count, error_bound: params.tail_tolerance })
}

/// Poisson-resummed form of `F_nu(sigma, u)`, accurate for small `u`.
pub fn f_series_poisson(sigma: UpperHalfPoint, u: f64, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    let s = sigma.to_complex();
    let s2 = sigma.sigma2;
    let mu = form_min_eigen(sigma);
    let budget = (1.0 / params.tail_tolerance).ln() + 12.0 + 3.0 * u.ln().abs();
    let radius = (budget * u * s2 / mu).sqrt() + 1.0;
    let span = radius.ceil() as i64;
    let count = ((2 * span + 1) * (2 * span + 1)) as usize;
    if count > params.max_terms {
        return Err(non_convergence(count, f64::INFINITY));
    }
    let mut acc = Complex64::zero();
    for n1 in -span..=span {
        for n2 in -span..=span {
            if n1 == 0 && n2 == 0 {
                continue;
            }
            let w = s * n2 as f64 + n1 as f64;
            let phase = e2pi(Complex64::new(-(tw.nu1 * n1 as f64 + tw.nu2 * n2 as f64), 0.0));
            let wc = w.conj();
            acc += phase * wc * wc * (-w.norm_sqr() / (u * s2)).exp();
        }
    }
    Ok(Estimate { value: acc / (PI * s2 * s2 * u * u * u), terms_used: count, error_bound: params.tail_tolerance })
}

/// `F_nu(sigma, u)`, switching to the Poisson form below `poisson_switch_u`.
pub fn f_series(sigma: UpperHalfPoint, u: f64, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("u = {u} must be positive")));
    }
    if u >= params.poisson_switch_u {
        f_series_direct(sigma, u, nu, params)
    } else {
        f_series_poisson(sigma, u, nu, params)
    }
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Quad {
    evals: usize,
    error: f64,
    failed: bool,
}

fn gk15<F: FnMut(f64) -> Result<Complex64>>(f: &mut F, a: f64, b: f64, q: &mut Quad) -> Result<(Complex64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * GK_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let pair = f(c - x)? + f(c + x)?;
        kron += pair * GK_WEIGHTS[j];
        if j % 2 == 1 {
            gauss += pair * GAUSS_WEIGHTS[j / 2];
        }
    }
    q.evals += 15;
    Ok((kron * h, ((kron - gauss) * h).norm()))
}

fn adapt<F: FnMut(f64) -> Result<Complex64>>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32, q: &mut Quad) -> Result<Complex64> {
    let (val, err) = gk15(f, a, b, q)?;
    if err <= tol || depth >= 40 {
        if err > tol {
            q.failed = true;
        }
        q.error += err;
        return Ok(val);
    }
    let m = 0.5 * (a + b);
    Ok(adapt(f, a, m, tol / 2.0, depth + 1, q)? + adapt(f, m, b, tol / 2.0, depth + 1, q)?)
}

/// Adaptive Gauss-Kronrod integration over `[a, b]`, pre-split into `pieces`.
pub fn integrate<F: FnMut(f64) -> Result<Complex64>>(mut f: F, a: f64, b: f64, pieces: usize, tol: f64) -> Result<Estimate<Complex64>> {
    let mut q = Quad { evals: 0, error: 0.0, failed: false };
    let mut total = Complex64::zero();
    let step = (b - a) / pieces as f64;
    for k in 0..pieces {
        let lo = a + step * k as f64;
        total += adapt(&mut f, lo, lo + step, tol / pieces as f64, 0, &mut q)?;
    }
    if q.failed {
        return Err(Error::Quadrature { achieved: q.error });
    }
    Ok(Estimate { value: total, terms_used: q.evals, error_bound: q.error })
}

/// Smallest `|v2 - sigma v1|^2` over `v = n - nu` with `v != 0`.
fn min_shifted_norm(sigma: UpperHalfPoint, tw: &Twist) -> f64 {
    let s = sigma.to_complex();
    let mu = form_min_eigen(sigma);
    // any vector with |v| >= 2 has norm >= 4 mu; scan enough of the lattice to beat it
    let span = ((1.0 + s.norm_sqr()) / mu).sqrt().ceil() as i64 + 2;
    let mut best = f64::INFINITY;
    for n1 in -span..=span {
        for n2 in -span..=span {
            let (v1, v2) = (n1 as f64 - tw.nu1, n2 as f64 - tw.nu2);
            if v1 == 0.0 && v2 == 0.0 {
                continue;
            }
            best = best.min((v2 - s * v1).norm_sqr());
        }
    }
    best
}

/// `(1/2 pi) int_0^oo F_nu(sigma, u) du` by quadrature.
pub fn kronecker_integral(sigma: UpperHalfPoint, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    let switch = params.poisson_switch_u;
    let decay = PI * PI * min_shifted_norm(sigma, &tw) / sigma.sigma2;
    // prefactor of the slowest term is at most pi^2 |v|^2 / sigma2^2 times the term count
    let scale = (PI * PI / sigma.sigma2.powi(2)).max(1.0) * 100.0;
    let upper = switch + ((scale / params.quad_tolerance).ln() / decay).max(1.0);
    let tol = params.quad_tolerance * 2.0 * PI / 4.0;
    let near = integrate(|u| Ok(f_series_poisson(sigma, u, nu, params)?.value), 0.0, switch, 4, tol)?;
    let far = integrate(|u| Ok(f_series_direct(sigma, u, nu, params)?.value), switch, upper, 16, tol)?;
    let truncation = scale * (-decay * upper).exp() / decay;
    Ok(Estimate {
        value: (near.value + far.value) / (2.0 * PI),
        terms_used: near.terms_used + far.terms_used,
        error_bound: (near.error_bound + far.error_bound + truncation) / (2.0 * PI),
    })
}

/// `P_2(nu1) + (i/pi) dE_nu/dsigma`, minus `1/(2 pi sigma2)` when `nu` is integral.
pub fn kronecker_closed(sigma: UpperHalfPoint, nu: &(Rational, Rational), params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let tw = Twist::new(nu);
    let d = e_series_derivative(sigma, nu, params)?;
    let mut value = Complex64::new(to_f64(&p2(&nu.0)), 0.0) + I / PI * d.value;
    if tw.integral {
        value -= 1.0 / (2.0 * PI * sigma.sigma2);
    }
    Ok(Estimate { value, terms_used: d.terms_used, error_bound: d.error_bound / PI })
}

/// `sum_m Log(1 - x q^m)` for `m >= 1`, principal branch.
fn log_product(x: Complex64, q: Complex64, params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let aq = q.norm();
    let ax = x.norm();
    let one = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::zero();
    let mut pw = x;
    let mut m = 1usize;
    loop {
        pw *= q;
        acc += (one - pw).ln();
        let next = ax * aq.powi(m as i32 + 1);
        let tail = next / ((1.0 - aq) * (1.0 - next).max(1e-300));
        if next < 1.0 && tail < params.tail_tolerance {
            return Ok(Estimate { value: acc, terms_used: m, error_bound: tail });
        }
        if m > params.max_terms {
            return Err(non_convergence(m, tail));
        }
        m += 1;
    }
}

/// `log eta(sigma) = pi i sigma / 12 - sum_{n,m > 0} q^{mn} / n`.
pub fn log_eta(sigma: UpperHalfPoint, params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let s = sigma.to_complex();
    let prod = log_product(Complex64::new(1.0, 0.0), e2pi(s), params)?;
    Ok(prod.map(|v| I * PI * s / 12.0 + v))
}

/// Logarithm of the generalized eta function with characteristics `(g, h)`.
pub fn log_eta_gen(g: &Rational, h: &Rational, sigma: UpperHalfPoint, params: &SeriesParams) -> Result<Estimate<Complex64>> {
    if is_integer(g) && is_integer(h) {
        return Err(Error::LatticePoint);
    }
    let g = frac(g);
    let phi = if g.is_zero() { -p1(h) } else { int(0) };
    let s = sigma.to_complex();
    let z = s * to_f64(&g) + to_f64(&frac(h));
    let qz = e2pi(z);
    let q = e2pi(s);
    let lead = I * PI * (to_f64(&phi) + s * to_f64(&p2(&g)));
    let first = (Complex64::new(1.0, 0.0) - qz).ln();
    let up = log_product(qz, q, params)?;
    let down = log_product(e2pi(-z), q, params)?;
    Ok(Estimate {
        value: lead + first + up.value + down.value,
        terms_used: up.terms_used + down.terms_used + 1,
        error_bound: up.error_bound + down.error_bound,
    })
}

fn require_c(m: &SL2ZMatrix) -> Result<SL2ZMatrix> {
    let m = SL2ZMatrix::new(m.a, m.b, m.c, m.d)?;
    if m.c == 0 {
        return Err(Error::ZeroModulus);
    }
    Ok(m)
}

/// Left side minus right side of the eta transformation law under `M^op`.
pub fn transform_defect(m: &SL2ZMatrix, sigma: UpperHalfPoint, params: &SeriesParams) -> Result<Estimate<Complex64>> {
    let m = require_c(m)?;
    let s = sigma.to_complex();
    let image = moebius_op_action(&m, sigma);
    let lhs_a = log_eta(image, params)?;
    let lhs_b = log_eta(sigma, params)?;
    let arg = (s * m.c as f64 + m.a as f64) / (I * sign(m.c) as f64);
    assert!(!(arg.im == 0.0 && arg.re <= 0.0), "branch cut hit");
    let ded = to_f64(&classical_sum(m.a, m.c)?);
    let rhs = 0.5 * arg.ln() + I * PI * ((m.a + m.d) as f64 / (12.0 * m.c as f64) - sign(m.c) as f64 * ded);
    Ok(Estimate {
        value: lhs_a.value - lhs_b.value - rhs,
        terms_used: lhs_a.terms_used + lhs_b.terms_used,
        error_bound: lhs_a.error_bound + lhs_b.error_bound,
    })
}

/// Same for the generalized eta function, `(g', h') = (a g - c h, -b g + d h)`.
pub fn transform_defect_gen(
    m: &SL2ZMatrix,
    g: &Rational,
    h: &Rational,
    sigma: UpperHalfPoint,
    params: &SeriesParams,
) -> Result<Estimate<Complex64>> {
    let m = require_c(m)?;
    if is_integer(g) && is_integer(h) {
        return Err(Error::LatticePoint);
    }
    let gp = int(m.a) * g - int(m.c) * h;
    let hp = -int(m.b) * g + int(m.d) * h;
    let image = moebius_op_action(&m, sigma);
    let lhs_a = log_eta_gen(&gp, &hp, image, params)?;
    let lhs_b = log_eta_gen(g, h, sigma, params)?;
    let exact = Rational::new(m.a.into(), m.c.into()) * p2(g) + Rational::new(m.d.into(), m.c.into()) * p2(&gp)
        - int(2 * sign(m.c)) * generalized_sum(&gp, &hp, m.d, m.c)?;
    let rhs = I * PI * to_f64(&exact);
    Ok(Estimate {
        value: lhs_a.value - lhs_b.value - rhs,
        terms_used: lhs_a.terms_used + lhs_b.terms_used,
        error_bound: lhs_a.error_bound + lhs_b.error_bound,
    })
}

/// Laplace spectrum of the flat torus twisted by `nu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusSpectrum {
    /// `(eigenvalue, multiplicity)` on functions, ascending.
    pub functions: Vec<(f64, usize)>,
    /// On 1-forms every multiplicity doubles.
    pub one_forms: Vec<(f64, usize)>,
}

pub fn torus_spectrum(sigma: UpperHalfPoint, nu: &(Rational, Rational), max_lattice_norm: i64) -> TorusSpectrum {
    let (nu1, nu2) = (to_f64(&frac(&nu.0)), to_f64(&frac(&nu.1)));
    let s = sigma.to_complex();
    let s2 = sigma.sigma2;
    let mut values = Vec::new();
    for n1 in -max_lattice_norm..=max_lattice_norm {
        for n2 in -max_lattice_norm..=max_lattice_norm {
            let (m1, m2) = (n1 as f64 - nu1, n2 as f64 - nu2);
            let w = (m2 - s * m1) * (PI / s2);
            values.push(4.0 * s2 * w.norm_sqr());
        }
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mut functions: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match functions.last_mut() {
            Some((last, count)) if (v - *last).abs() <= 1e-9 * v.abs().max(1.0) => *count += 1,
            _ => functions.push((v, 1)),
        }
    }
    let one_forms = functions.iter().map(|&(v, k)| (v, 2 * k)).collect();
    TorusSpectrum { functions, one_forms }
}

fn hyperbolic_path(m: &SL2ZMatrix) -> Result<InvariantPath> {
    InvariantPath::new(m)
}

/// Integral of the twisted eta form along the invariant path, from `E_nu`
/// evaluated at the two endpoints.
pub fn rho_form_hyp_numeric(m: &SL2ZMatrix, conn: &TorusFlatConnection, params: &SeriesParams) -> Result<Estimate<f64>> {
    let path = hyperbolic_path(m)?;
    let conn = crate::moduli::connection_from_nu(m, &conn.nu, None)?;
    if conn.restriction_trivial {
        return Err(Error::Admissibility("nu must not be integral".into()));
    }
    let p2v = to_f64(&p2(&conn.nu.0));
    let eval = |sigma: UpperHalfPoint| -> Result<Estimate<f64>> {
        let e = e_series(sigma, &conn.nu, params, SeriesMethod::DoubleSum)?;
        Ok(e.map(|v| sigma.sigma1 * p2v - v.im / PI))
    };
    let start = eval(path.at(0.0))?;
    let end = eval(path.at(1.0))?;
    Ok(Estimate {
        value: end.value - start.value,
        terms_used: start.terms_used + end.terms_used,
        error_bound: (start.error_bound + end.error_bound) / PI,
    })
}

/// Untwisted Eta invariant assembled from `log eta` at the path endpoints
/// and the arc integral of `sigma1' / sigma2`.
pub fn eta_untwisted_numeric(m: &SL2ZMatrix, params: &SeriesParams) -> Result<Estimate<f64>> {
    let path = hyperbolic_path(m)?;
    let s0 = path.at(0.0);
    let s1 = moebius_op_action(m, s0);
    let a = log_eta(s1, params)?;
    let b = log_eta(s0, params)?;
    let arc = integrate(|t| Ok(Complex64::new(path.arc_integrand(t), 0.0)), 0.0, 1.0, 4, params.quad_tolerance)?;
    let value = 2.0 * ((2.0 / PI) * (a.value - b.value).im - arc.value.re / (2.0 * PI));
    Ok(Estimate {
        value,
        terms_used: a.terms_used + b.terms_used + arc.terms_used,
        error_bound: 4.0 / PI * (a.error_bound + b.error_bound) + arc.error_bound / PI,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::connection_from_nu;
    use crate::rational::rat;
    use crate::rho::{eta_untwisted_torus, rho_form_hyp_exact};

    fn pt(a: f64, b: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(a, b).unwrap()
    }

    fn p() -> SeriesParams {
        SeriesParams::default()
    }

    fn mat(a: i64, b: i64, c: i64, d: i64) -> SL2ZMatrix {
        SL2ZMatrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn e_series_examples() {
        let e = e_series(pt(0.0, 10.0), &(int(0), int(0)), &p(), SeriesMethod::DoubleSum).unwrap();
        assert!(e.value.norm() < 1e-12);
        for (s, nu) in [(pt(0.0, 1.0), (rat(1, 2), rat(1, 2))), (pt(0.3, 0.7), (rat(1, 3), rat(2, 5))), (pt(-0.2, 1.5), (int(0), rat(1, 4)))] {
            let a = e_series(s, &nu, &p(), SeriesMethod::DoubleSum).unwrap().value;
            let b = e_series(s, &nu, &p(), SeriesMethod::Cotangent).unwrap().value;
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
        let a = e_series(pt(0.0, 1.0), &(rat(3, 2), rat(1, 2)), &p(), SeriesMethod::DoubleSum).unwrap().value;
        let b = e_series(pt(0.0, 1.0), &(rat(1, 2), rat(1, 2)), &p(), SeriesMethod::DoubleSum).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for (s, nu) in [(pt(0.1, 1.0), (rat(1, 2), rat(1, 2))), (pt(0.4, 0.8), (rat(2, 7), int(0))), (pt(0.0, 1.2), (int(0), rat(1, 3)))] {
            let d = e_series_derivative(s, &nu, &p()).unwrap().value;
            let f = |x: f64| e_series(pt(s.sigma1 + x, s.sigma2), &nu, &p(), SeriesMethod::DoubleSum).unwrap().value;
            let fd = (f(h) - f(-h)) / (2.0 * h);
            assert!((d - fd).norm() < 1e-7, "{d} {fd}");
        }
    }

    #[test]
    fn f_series_forms_agree() {
        for nu in [(int(0), int(0)), (rat(1, 2), int(0)), (rat(1, 3), rat(2, 3))] {
            for u in [0.5, 1.0, 2.0] {
                let s = pt(0.3, 1.1);
                let a = f_series_direct(s, u, &nu, &p()).unwrap().value;
                let b = f_series_poisson(s, u, &nu, &p()).unwrap().value;
                assert!((a - b).norm() < 1e-9, "{nu:?} {u} {a} {b}");
            }
        }
        let big = f_series(pt(0.0, 1.0), 50.0, &(rat(1, 2), int(0)), &p()).unwrap().value;
        assert!(big.norm() < 1e-20);
        let small = f_series(pt(0.0, 1.0), 1e-3, &(rat(1, 2), int(0)), &p()).unwrap().value;
        assert!(small.norm() < 1e-20);
        assert!(f_series(pt(0.0, 1.0), 0.0, &(rat(1, 2), int(0)), &p()).is_err());
    }

    #[test]
    fn kronecker_examples() {
        for (s, nu) in [(pt(0.0, 1.0), (rat(1, 2), rat(1, 2))), (pt(0.5, 2.0), (rat(1, 3), int(0))), (pt(0.0, 1.0), (int(0), int(0)))] {
            let a = kronecker_integral(s, &nu, &p()).unwrap().value;
            let b = kronecker_closed(s, &nu, &p()).unwrap().value;
            assert!((a - b).norm() < 1e-6, "{nu:?} {a} {b}");
        }
        let c = kronecker_closed(pt(0.0, 10.0), &(rat(1, 2), int(0)), &p()).unwrap().value;
        assert!((c - Complex64::new(-1.0 / 12.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn log_eta_examples() {
        let s = pt(0.2, 0.9);
        let a = log_eta(s, &p()).unwrap().value;
        let b = log_eta(pt(1.2, 0.9), &p()).unwrap().value;
        assert!(((b - a).im - PI / 12.0).abs() < 1e-12);
        let far = log_eta(pt(0.0, 20.0), &p()).unwrap().value;
        assert!((far - I * PI * Complex64::new(0.0, 20.0) / 12.0).norm() < 1e-25 + 1e-15 * 20.0);
        let d = transform_defect(&mat(0, -1, 1, 0), pt(0.0, 1.0), &p()).unwrap().value;
        assert!(d.norm() < 1e-10);
        let d = transform_defect(&mat(2, 1, 3, 2), pt(1.0 / 3.0, 1.0), &p()).unwrap().value;
        assert!(d.norm() < 1e-9);
    }

    #[test]
    fn log_eta_gen_examples() {
        let s = pt(0.0, 1.0);
        let nu = (rat(1, 2), rat(1, 4));
        let g = log_eta_gen(&nu.0, &(-&nu.1), s, &p()).unwrap().value;
        let e = e_series(s, &nu, &p(), SeriesMethod::DoubleSum).unwrap().value;
        let rhs = I * PI * s.to_complex() * to_f64(&p2(&nu.0)) - e;
        assert!((g.im - rhs.im).abs() < 1e-10);
        let a = log_eta_gen(&rat(4, 3), &rat(1, 5), pt(0.1, 0.8), &p()).unwrap().value;
        let b = log_eta_gen(&rat(1, 3), &rat(1, 5), pt(0.1, 0.8), &p()).unwrap().value;
        assert_eq!(a, b);
        // g = 0, h = 1/2: pi i (0 + 20 i / 6) + Log 2 + exponentially small
        let v = log_eta_gen(&int(0), &rat(1, 2), pt(0.0, 20.0), &p()).unwrap().value;
        assert!((v - Complex64::new(-20.0 * PI / 6.0 + 2f64.ln(), 0.0)).norm() < 1e-12);
        assert_eq!(log_eta_gen(&int(1), &int(0), s, &p()), Err(Error::LatticePoint));
        let d = transform_defect_gen(&mat(-2, 1, 1, -1), &rat(1, 5), &rat(-3, 5), s, &p()).unwrap().value;
        assert!(d.norm() < 1e-8, "{d}");
    }

    #[test]
    fn spectrum_examples() {
        let sp = torus_spectrum(pt(0.0, 1.0), &(int(0), int(0)), 3);
        assert_eq!(sp.functions[0], (0.0, 1));
        assert!((sp.functions[1].0 - 4.0 * PI * PI).abs() < 1e-9);
        assert_eq!(sp.functions[1].1, 4);
        assert_eq!(sp.one_forms[1].1, 8);
        let tw = torus_spectrum(pt(0.3, 1.4), &(rat(1, 3), rat(1, 2)), 4);
        assert!(tw.functions[0].0 > 0.0);
        let shifted = torus_spectrum(pt(0.3, 1.4), &(rat(4, 3), rat(1, 2)), 4);
        for (a, b) in tw.functions.iter().zip(&shifted.functions).take(10) {
            assert!((a.0 - b.0).abs() < 1e-9 && a.1 == b.1);
        }
    }

    #[test]
    fn hyperbolic_numerics() {
        for (m, nu) in [(mat(3, 2, 4, 3), (rat(1, 2), rat(1, 2))), (mat(-2, 1, 1, -1), (rat(1, 5), rat(3, 5)))] {
            let c = connection_from_nu(&m, &nu, None).unwrap();
            let num = rho_form_hyp_numeric(&m, &c, &p()).unwrap().value;
            let exact = to_f64(&rho_form_hyp_exact(&m, &c).unwrap());
            assert!((num - exact).abs() < 1e-6, "{m} {num} {exact}");
        }
        let m = mat(2, 1, 1, 1);
        let c = connection_from_nu(&m, &(int(0), int(0)), None).unwrap();
        assert!(rho_form_hyp_numeric(&m, &c, &p()).is_err());
        for m in [mat(3, 2, 4, 3), mat(-2, 1, 1, -1), mat(2, 1, 1, 1)] {
            let num = eta_untwisted_numeric(&m, &p()).unwrap().value;
            let exact = to_f64(&eta_untwisted_torus(&m).unwrap());
            assert!((num - exact).abs() < 1e-6, "{m} {num} {exact}");
        }
    }
}
