//! Closed-form Rho, Eta and Chern-Simons invariants.

use std::f64::consts::PI;

use num_traits::Zero;
use serde::Serialize;

use crate::bernoulli::{p1, p2};
use crate::dedekind::{classical_sum, generalized_sum, sum_difference_closed};
use crate::moduli::{connection_from_nu, transport, CircleFlatConnection, TorusFlatConnection};
use crate::rational::{delta, frac, int, is_integer, rat, sign, to_f64, Rational};
use crate::sl2z::{classify, MonodromyClass, SL2ZMatrix};
use crate::{Error, Result};

/// Which formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoBranch {
    CircleTrivialBundle,
    CircleTrivialConnection,
    CircleNontrivial,
    EllipticTwisted,
    EllipticTrivialRestriction,
    Parabolic,
    Hyperbolic,
    HyperbolicPrep,
}

impl RhoBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            RhoBranch::CircleTrivialBundle => "circle-trivial-bundle",
            RhoBranch::CircleTrivialConnection => "circle-trivial-connection",
            RhoBranch::CircleNontrivial => "circle-nontrivial",
            RhoBranch::EllipticTwisted => "elliptic-twisted",
            RhoBranch::EllipticTrivialRestriction => "elliptic-trivial-restriction",
            RhoBranch::Parabolic => "parabolic",
            RhoBranch::Hyperbolic => "hyperbolic",
            RhoBranch::HyperbolicPrep => "hyperbolic-prep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoValue {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub value: Rational,
    pub branch: RhoBranch,
}

fn sixth() -> Rational {
    rat(1, 6)
}

pub fn rho_circle(conn: &CircleFlatConnection) -> RhoValue {
    let l = conn.degree_l;
    if l == 0 {
        return RhoValue { value: int(0), branch: RhoBranch::CircleTrivialBundle };
    }
    if conn.is_trivial {
        return RhoValue { value: int(0), branch: RhoBranch::CircleTrivialConnection };
    }
    let q = rat(conn.chern_k, l);
    RhoValue { value: int(2 * l) * (p2(&q) - sixth()) + int(sign(l)), branch: RhoBranch::CircleNontrivial }
}

/// Eta invariant of the truncated signature operator, `2 l P_2(k/l)`.
pub fn eta_truncated_circle(conn: &CircleFlatConnection) -> Result<Rational> {
    if conn.degree_l == 0 {
        return Err(Error::ZeroDegree);
    }
    Ok(int(2 * conn.degree_l) * p2(&rat(conn.chern_k, conn.degree_l)))
}

/// Topological correction term in the adiabatic limit.
pub fn dai_correction_circle(degree_l: i64, connection_trivial: bool) -> Result<i64> {
    if degree_l == 0 {
        return Err(Error::ZeroDegree);
    }
    Ok(if connection_trivial { -sign(degree_l) } else { 0 })
}

fn checked(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<TorusFlatConnection> {
    connection_from_nu(m, &conn.nu, conn.lambda.clone())
}

pub fn rho_torus(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<RhoValue> {
    let conn = checked(m, conn)?;
    match classify(m)? {
        MonodromyClass::Identity { .. } => Err(Error::IdentityClass),
        MonodromyClass::Elliptic { theta } => {
            let sc = int(sign(m.c));
            if !conn.restriction_trivial {
                let value = (int(2) - int(4) * theta) * sc;
                return Ok(RhoValue { value, branch: RhoBranch::EllipticTwisted });
            }
            let lambda = conn.lambda.ok_or_else(|| {
                Error::OutOfScope("elliptic monodromy with nu in Z^2 needs the gauge phase lambda".into())
            })?;
            let dist = std::cmp::min(lambda.clone(), int(1) - &lambda);
            let factor = match dist.cmp(&theta) {
                std::cmp::Ordering::Greater => 0,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 2,
            };
            Ok(RhoValue { value: int(factor) * sc, branch: RhoBranch::EllipticTrivialRestriction })
        }
        MonodromyClass::Parabolic { epsilon, l, conjugator } => {
            if conn.restriction_trivial {
                return Err(Error::OutOfScope("parabolic monodromy with nu in Z^2".into()));
            }
            let nu = transport(&conjugator, &conn.nu);
            Ok(RhoValue { value: parabolic_value(epsilon, l, &nu.0), branch: RhoBranch::Parabolic })
        }
        MonodromyClass::Hyperbolic { .. } => {
            if conn.restriction_trivial {
                return Err(Error::OutOfScope("hyperbolic monodromy with nu in Z^2".into()));
            }
            Ok(RhoValue { value: hyperbolic_value(m, &conn), branch: RhoBranch::Hyperbolic })
        }
    }
}

fn parabolic_value(epsilon: i64, l: i64, nu1: &Rational) -> Rational {
    if l == 0 {
        return int(0);
    }
    let twist = if epsilon == 1 { sign(l) } else { 0 };
    int(2 * l) * (p2(nu1) - sixth()) + int(twist)
}

fn hyperbolic_value(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Rational {
    let (a, c, d) = (m.a, m.c, m.d);
    let cr = int(c);
    let nu1 = &conn.nu.0;
    let m1 = conn.m.0;
    let r = m1.rem_euclid(c.abs());
    let dn = int(delta(nu1));
    let m1_over_c = rat(m1, c);
    let p1_dm = p1(&rat(d * m1, c));
    let tail: Rational = (1..=(c.abs() - r)).map(|k| p1(&rat(d * k, c))).sum();
    int(2 * (a + d) - 4) / &cr * (p2(nu1) - sixth()) - int(4) * tail + int(sign(c * (a + d)))
        - int(sign(c)) * &dn * int(1 - delta(&m1_over_c))
        - int(2) * &p1_dm
        - int(2) * &dn * (p1(&m1_over_c) - &p1_dm)
}

/// The same hyperbolic Rho invariant computed from the two Dedekind sums directly.
pub fn rho_hyperbolic_prep(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<RhoValue> {
    let conn = checked(m, conn)?;
    match classify(m)? {
        MonodromyClass::Hyperbolic { .. } => {}
        other => return Err(Error::Class(format!("{m} is {}, not hyperbolic", other.name()))),
    }
    if conn.restriction_trivial {
        return Err(Error::OutOfScope("hyperbolic monodromy with nu in Z^2".into()));
    }
    let (a, c, d) = (m.a, m.c, m.d);
    let (nu1, nu2) = &conn.nu;
    let diff = generalized_sum(nu1, nu2, a, c)? - classical_sum(a, c)?;
    let value = int(2 * (a + d)) / int(c) * (p2(nu1) - sixth()) - int(4 * sign(c)) * diff + int(sign(c * (a + d)));
    Ok(RhoValue { value, branch: RhoBranch::HyperbolicPrep })
}

/// Like [`rho_hyperbolic_prep`] but with the Dedekind sum difference taken
/// from its closed form.
pub fn rho_hyperbolic_via_closed_difference(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<Rational> {
    let conn = checked(m, conn)?;
    let (a, c, d) = (m.a, m.c, m.d);
    let (nu1, nu2) = &conn.nu;
    let diff = sum_difference_closed(nu1, nu2, m)?;
    Ok(int(2 * (a + d)) / int(c) * (p2(nu1) - sixth()) - int(4 * sign(c)) * diff + int(sign(c * (a + d))))
}

/// Eta invariant of the untwisted odd signature operator.
pub fn eta_untwisted_torus(m: &SL2ZMatrix) -> Result<Rational> {
    match classify(m)? {
        MonodromyClass::Elliptic { theta } => {
            assert!(m.c != 0, "elliptic elements have c != 0");
            Ok((int(4) * theta - int(2)) * int(sign(m.c)))
        }
        MonodromyClass::Hyperbolic { .. } => {
            let (a, c, d) = (m.a, m.c, m.d);
            Ok(rat(a + d, 3 * c) - int(4 * sign(c)) * classical_sum(a, c)? - int(sign(c * (a + d))))
        }
        other => Err(Error::Unsupported(format!("untwisted Eta for {} monodromy", other.name()))),
    }
}

/// Eigenphases (in `[0, 1)`) of the monodromy action on harmonic forms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EigenphaseData {
    pub plus_phases: Vec<Rational>,
    pub minus_phases: Vec<Rational>,
    pub untwisted_plus_phases: Vec<Rational>,
    pub rank_k: i64,
}

/// `sum_j (2 theta_j - 1)` over nonzero phases.
fn tr_log(phases: &[Rational]) -> Rational {
    phases
        .iter()
        .map(|t| frac(t))
        .filter(|t| !t.is_zero())
        .map(|t| int(2) * t - int(1))
        .sum()
}

pub fn rho_finite_order_generic(data: &EigenphaseData) -> Result<Rational> {
    if data.plus_phases.len() != data.minus_phases.len() {
        return Err(Error::DimensionMismatch { plus: data.plus_phases.len(), minus: data.minus_phases.len() });
    }
    if data.rank_k <= 0 {
        return Err(Error::Domain(format!("rank {} must be positive", data.rank_k)));
    }
    Ok(tr_log(&data.plus_phases) - tr_log(&data.minus_phases)
        - int(2 * data.rank_k) * tr_log(&data.untwisted_plus_phases))
}

/// `2 (nu2 m1 - nu1 m2)` reduced into `[0, 1)`.
pub fn chern_simons_mod1(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<Rational> {
    let conn = checked(m, conn)?;
    let (nu1, nu2) = &conn.nu;
    Ok(frac(&(int(2) * (nu2 * int(conn.m.0) - nu1 * int(conn.m.1)))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParabolicIntermediates {
    pub form_integral: f64,
    pub cohom_rho: f64,
    pub assembled: f64,
}

/// The transcendental pieces whose sum is the parabolic Rho invariant.
pub fn parabolic_intermediates(epsilon: i64, l: i64, nu1: &Rational) -> Result<ParabolicIntermediates> {
    if epsilon.abs() != 1 {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be +-1")));
    }
    let ok = if epsilon == 1 { is_integer(&(int(l) * nu1)) } else { is_integer(&(int(2) * nu1)) };
    if !ok {
        return Err(Error::Admissibility(format!("nu1 = {nu1} not admissible for epsilon = {epsilon}, l = {l}")));
    }
    let lf = l as f64;
    let form_integral = lf * to_f64(&(p2(nu1) - sixth())) + lf / (2.0 * PI);
    let cohom_rho = match (l, epsilon) {
        (0, _) => 0.0,
        (_, 1) => -lf / PI + sign(l) as f64,
        _ => -lf / PI,
    };
    Ok(ParabolicIntermediates { form_integral, cohom_rho, assembled: 2.0 * form_integral + cohom_rho })
}

/// Exact value the parabolic intermediates assemble to.
pub fn rho_parabolic_normal(epsilon: i64, l: i64, nu1: &Rational) -> Rational {
    parabolic_value(epsilon, l, nu1)
}

/// Integral of the twisted eta form along the hyperbolic path:
/// `(a+d)/c P_2(nu1) - 2 sgn(c) s_{nu1,nu2}(a,c)`.
pub fn rho_form_hyp_exact(m: &SL2ZMatrix, conn: &TorusFlatConnection) -> Result<Rational> {
    let conn = checked(m, conn)?;
    let (nu1, nu2) = &conn.nu;
    Ok(rat(m.a + m.d, m.c) * p2(nu1) - int(2 * sign(m.c)) * generalized_sum(nu1, nu2, m.a, m.c)?)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::enumerate_torus_connections;

    fn m(a: i64, b: i64, c: i64, d: i64) -> SL2ZMatrix {
        SL2ZMatrix::new(a, b, c, d).unwrap()
    }

    fn conn(mat: &SL2ZMatrix, n1: Rational, n2: Rational) -> TorusFlatConnection {
        connection_from_nu(mat, &(n1, n2), None).unwrap()
    }

    #[test]
    fn circle_examples() {
        let c = CircleFlatConnection::new(0, 7, false).unwrap();
        assert_eq!(rho_circle(&c).value, int(0));
        let c = CircleFlatConnection::new(3, 1, false).unwrap();
        assert_eq!(rho_circle(&c), RhoValue { value: rat(-1, 3), branch: RhoBranch::CircleNontrivial });
        let c = CircleFlatConnection::new(5, 5, false).unwrap();
        assert_eq!(rho_circle(&c).value, int(1));
        let c = CircleFlatConnection::new(5, 5, true).unwrap();
        assert_eq!(rho_circle(&c).branch, RhoBranch::CircleTrivialConnection);
    }

    #[test]
    fn truncated_and_correction() {
        let e = |l, k| eta_truncated_circle(&CircleFlatConnection::new(l, k, false).unwrap());
        assert_eq!(e(1, 0).unwrap(), rat(1, 3));
        assert_eq!(e(-2, 1).unwrap(), rat(1, 3));
        assert_eq!(e(5, 1).unwrap(), rat(1, 15));
        assert_eq!(e(0, 1), Err(Error::ZeroDegree));
        assert_eq!(dai_correction_circle(7, true).unwrap(), -1);
        assert_eq!(dai_correction_circle(-7, true).unwrap(), 1);
        assert_eq!(dai_correction_circle(7, false).unwrap(), 0);
        assert_eq!(dai_correction_circle(0, false), Err(Error::ZeroDegree));
    }

    #[test]
    fn hyperbolic_tables() {
        let mat = m(-2, 1, 1, -1);
        // -10 (nu1^2 - nu1) + sgn(c(a+d)) - sgn(c)
        let want = [rat(-2, 5), rat(2, 5), rat(2, 5), rat(-2, 5)];
        let nus = [(1, 3), (2, 1), (3, 4), (4, 2)];
        for ((n1, n2), w) in nus.iter().zip(want) {
            let c = conn(&mat, rat(*n1, 5), rat(*n2, 5));
            assert_eq!(rho_torus(&mat, &c).unwrap().value, w);
            assert_eq!(rho_hyperbolic_prep(&mat, &c).unwrap().value, w);
        }
        let mat = m(3, 2, 4, 3);
        for ((n1, n2), w) in [((int(0), rat(1, 2)), 0), ((rat(1, 2), int(0)), -1), ((rat(1, 2), rat(1, 2)), 1)] {
            let c = conn(&mat, n1, n2);
            assert_eq!(rho_torus(&mat, &c).unwrap().value, int(w));
            assert_eq!(rho_hyperbolic_prep(&mat, &c).unwrap().value, int(w));
        }
        let trivial = conn(&mat, int(0), int(0));
        assert!(matches!(rho_torus(&mat, &trivial), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn untwisted_eta_examples() {
        assert_eq!(eta_untwisted_torus(&m(0, -1, 1, 1)).unwrap(), rat(-4, 3));
        assert_eq!(eta_untwisted_torus(&m(-1, -1, 1, 0)).unwrap(), rat(-2, 3));
        assert_eq!(eta_untwisted_torus(&m(0, -1, 1, 0)).unwrap(), int(-1));
        assert_eq!(eta_untwisted_torus(&m(3, 2, 4, 3)).unwrap(), int(0));
        assert!(matches!(eta_untwisted_torus(&m(1, 1, 0, 1)), Err(Error::Unsupported(_))));
        assert!(matches!(eta_untwisted_torus(&m(-1, 0, 0, -1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn elliptic_branches() {
        let mat = m(0, -1, 1, 0);
        let set = enumerate_torus_connections(&mat).unwrap();
        assert_eq!(set.isolated.len(), 2);
        let twisted = &set.isolated[1];
        assert_eq!(rho_torus(&mat, twisted).unwrap(), RhoValue { value: int(1), branch: RhoBranch::EllipticTwisted });
        let with = |l: Rational| connection_from_nu(&mat, &(int(0), int(0)), Some(l)).unwrap();
        assert_eq!(rho_torus(&mat, &with(rat(1, 2))).unwrap().value, int(0));
        assert_eq!(rho_torus(&mat, &with(rat(1, 4))).unwrap().value, int(1));
        assert_eq!(rho_torus(&mat, &with(rat(3, 4))).unwrap().value, int(1));
        assert_eq!(rho_torus(&mat, &with(rat(1, 8))).unwrap().value, int(2));
        assert_eq!(rho_torus(&mat.inverse(), &with(rat(1, 8))).unwrap().value, int(-2));
        assert!(matches!(rho_torus(&mat, &set.isolated[0]), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn parabolic_values() {
        let mat = m(1, 3, 0, 1);
        let c = conn(&mat, rat(1, 3), rat(2, 7));
        assert_eq!(rho_torus(&mat, &c).unwrap().value, int(6) * (p2(&rat(1, 3)) - sixth()) + int(1));
        // -[[1, 4], [0, 1]]
        let mat = m(-1, -4, 0, -1);
        let c = conn(&mat, rat(1, 2), int(0));
        assert_eq!(rho_torus(&mat, &c).unwrap().value, int(-2));
        let flipped = m(-1, 4, 0, -1);
        assert_eq!(rho_torus(&flipped, &conn(&flipped, rat(1, 2), int(0))).unwrap().value, int(2));
        assert_eq!(rho_torus(&m(1, 0, 0, 1), &c), Err(Error::IdentityClass));
    }

    #[test]
    fn intermediates() {
        let r = parabolic_intermediates(1, 0, &int(0)).unwrap();
        assert_eq!((r.form_integral, r.cohom_rho, r.assembled), (0.0, 0.0, 0.0));
        let r = parabolic_intermediates(1, 3, &rat(1, 3)).unwrap();
        assert!((r.assembled - to_f64(&rho_parabolic_normal(1, 3, &rat(1, 3)))).abs() < 1e-12);
        let r = parabolic_intermediates(-1, 4, &rat(1, 2)).unwrap();
        assert!((r.assembled + 2.0).abs() < 1e-12);
        assert!(parabolic_intermediates(1, 3, &rat(1, 2)).is_err());
        assert!(parabolic_intermediates(2, 3, &rat(1, 3)).is_err());
    }

    #[test]
    fn eigenphase_examples() {
        let empty = EigenphaseData { rank_k: 1, ..Default::default() };
        assert_eq!(rho_finite_order_generic(&empty).unwrap(), int(0));
        let sym = EigenphaseData { plus_phases: vec![rat(1, 3)], minus_phases: vec![rat(1, 3)], untwisted_plus_phases: vec![], rank_k: 1 };
        assert_eq!(rho_finite_order_generic(&sym).unwrap(), int(0));
        let bad = EigenphaseData { plus_phases: vec![rat(1, 3)], rank_k: 1, ..Default::default() };
        assert_eq!(rho_finite_order_generic(&bad), Err(Error::DimensionMismatch { plus: 1, minus: 0 }));
    }

    #[test]
    fn chern_simons_examples() {
        let mat = m(3, 2, 4, 3);
        assert_eq!(chern_simons_mod1(&mat, &conn(&mat, int(0), int(0))).unwrap(), int(0));
        assert_eq!(chern_simons_mod1(&mat, &conn(&mat, rat(1, 2), rat(1, 2))).unwrap(), int(0));
        let mat = m(-2, 1, 1, -1);
        assert_eq!(chern_simons_mod1(&mat, &conn(&mat, rat(1, 5), rat(3, 5))).unwrap(), rat(3, 5));
    }

    #[test]
    fn form_integral_exact() {
        let mat = m(3, 2, 4, 3);
        let c = conn(&mat, rat(1, 2), rat(1, 2));
        // 6/4 * (-1/12) - 2 * (-5/16)
        assert_eq!(rho_form_hyp_exact(&mat, &c).unwrap(), rat(1, 2));
    }
}
