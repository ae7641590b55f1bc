//! Gauge classes of flat U(1)-connections on torus mapping tori, found by
//! solving `(Id - M^t) nu in Z^2`, and the circle bundle counterpart.

use num_traits::Zero;
use serde::Serialize;

use crate::rational::{frac, int, is_integer, rat, to_i64, Rational};
use crate::sl2z::{classify, MonodromyClass, SL2ZMatrix};
use crate::{Error, Result};

type Mat2 = [[i128; 2]; 2];

fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Smith normal form `u * a * v = diag(d1, d2)` with `d1 | d2`, both `>= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Smith {
    pub diag: (i128, i128),
    pub u: Mat2,
    pub v: Mat2,
}

pub fn smith_normal_form(a: Mat2) -> Smith {
    let mut m = a;
    let mut u: Mat2 = [[1, 0], [0, 1]];
    let mut v: Mat2 = [[1, 0], [0, 1]];
    loop {
        // pivot: smallest nonzero entry moved to (0, 0)
        let mut best: Option<(usize, usize)> = None;
        for i in 0..2 {
            for j in 0..2 {
                if m[i][j] != 0 && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        if pi == 1 {
            m.swap(0, 1);
            u.swap(0, 1);
        }
        if pj == 1 {
            for row in m.iter_mut().chain(v.iter_mut()) {
                row.swap(0, 1);
            }
        }
        let p = m[0][0];
        let q = m[1][0].div_euclid(p);
        for j in 0..2 {
            m[1][j] -= q * m[0][j];
            u[1][j] -= q * u[0][j];
        }
        let q = m[0][1].div_euclid(p);
        for i in 0..2 {
            m[i][1] -= q * m[i][0];
            v[i][1] -= q * v[i][0];
        }
        if m[1][0] != 0 || m[0][1] != 0 {
            continue;
        }
        if m[1][1] % p != 0 {
            for j in 0..2 {
                m[0][j] += m[1][j];
                u[0][j] += u[1][j];
            }
            continue;
        }
        break;
    }
    for i in 0..2 {
        if m[i][i] < 0 {
            for j in 0..2 {
                m[i][j] = -m[i][j];
                u[i][j] = -u[i][j];
            }
        }
    }
    debug_assert_eq!(mat_mul(&mat_mul(&u, &a), &v), [[m[0][0], 0], [0, m[1][1]]]);
    Smith { diag: (m[0][0], m[1][1]), u, v }
}

/// `Id - M^t` as an integer matrix.
pub fn defect_matrix(m: &SL2ZMatrix) -> Mat2 {
    [[1 - m.a as i128, -(m.c as i128)], [-(m.b as i128), 1 - m.d as i128]]
}

/// `(Id - M^t) nu`.
pub fn defect(m: &SL2ZMatrix, nu: &(Rational, Rational)) -> (Rational, Rational) {
    let (x, y) = m.transpose_apply_rat(nu);
    (&nu.0 - x, &nu.1 - y)
}

/// Whether `m` lies in the image of `Id - M^t` on `Z^2`.
pub fn is_bundle_trivial(m: &SL2ZMatrix, defect_vec: (i64, i64)) -> bool {
    let s = smith_normal_form(defect_matrix(m));
    let w = [
        s.u[0][0] * defect_vec.0 as i128 + s.u[0][1] * defect_vec.1 as i128,
        s.u[1][0] * defect_vec.0 as i128 + s.u[1][1] * defect_vec.1 as i128,
    ];
    [s.diag.0, s.diag.1].iter().zip(w).all(|(&d, wi)| if d == 0 { wi == 0 } else { wi % d == 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusFlatConnection {
    /// Both components in `[0, 1)`.
    #[serde(serialize_with = "ser_pair")]
    pub nu: (Rational, Rational),
    pub m: (i64, i64),
    #[serde(serialize_with = "ser_opt")]
    pub lambda: Option<Rational>,
    pub restriction_trivial: bool,
    pub bundle_trivial: bool,
}

fn ser_pair<S: serde::Serializer>(v: &(Rational, Rational), s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [crate::rational::canonical(&v.0), crate::rational::canonical(&v.1)].serialize(s)
}

fn ser_opt<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    v.as_ref().map(crate::rational::canonical).serialize(s)
}

pub fn normalize(nu: &(Rational, Rational)) -> (Rational, Rational) {
    (frac(&nu.0), frac(&nu.1))
}

pub fn connection_from_nu(
    m: &SL2ZMatrix,
    nu: &(Rational, Rational),
    lambda: Option<Rational>,
) -> Result<TorusFlatConnection> {
    let nu = normalize(nu);
    let (m1, m2) = defect(m, &nu);
    let (Some(m1), Some(m2)) = (to_i64(&m1), to_i64(&m2)) else {
        return Err(Error::Admissibility(format!(
            "(Id - M^t)({}, {}) = ({m1}, {m2}) is not integral for M = {m}",
            nu.0, nu.1
        )));
    };
    let restriction_trivial = nu.0.is_zero() && nu.1.is_zero();
    if lambda.is_some() && !restriction_trivial {
        return Err(Error::Gauge);
    }
    Ok(TorusFlatConnection {
        nu,
        m: (m1, m2),
        lambda: lambda.map(|l| frac(&l)),
        restriction_trivial,
        bundle_trivial: is_bundle_trivial(m, (m1, m2)),
    })
}

/// One-parameter family of classes for parabolic monodromy with `epsilon = +1`.
/// In the normal-form frame it is `nu1 = j/|l|` with `nu2` free.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionFamily {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub nu1: Rational,
    pub nu2_free: bool,
    /// Conjugator into the normal form; `nu = (g^t)^-1 nu'` recovers the original frame.
    pub conjugator: SL2ZMatrix,
}

impl ConnectionFamily {
    /// The member with normal-frame coordinate `nu2`, in the original frame.
    pub fn member(&self, nu2: &Rational) -> (Rational, Rational) {
        normalize(&self.conjugator.inverse().transpose_apply_rat(&(self.nu1.clone(), nu2.clone())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusModuliSet {
    pub isolated: Vec<TorusFlatConnection>,
    pub families: Vec<ConnectionFamily>,
}

pub fn enumerate_torus_connections(m: &SL2ZMatrix) -> Result<TorusModuliSet> {
    let class = classify(m)?;
    if let MonodromyClass::Identity { .. } = class {
        return Err(Error::IdentityClass);
    }
    if let MonodromyClass::Parabolic { epsilon: 1, l, conjugator } = class {
        let families = (0..l.abs())
            .map(|j| ConnectionFamily { nu1: rat(j, l.abs()), nu2_free: true, conjugator })
            .collect();
        return Ok(TorusModuliSet { isolated: Vec::new(), families });
    }
    let s = smith_normal_form(defect_matrix(m));
    let (d1, d2) = (s.diag.0 as i64, s.diag.1 as i64);
    let mut isolated = Vec::with_capacity((d1 * d2) as usize);
    for j1 in 0..d1 {
        for j2 in 0..d2 {
            let w = (rat(j1, d1), rat(j2, d2));
            let nu = (
                int(s.v[0][0] as i64) * &w.0 + int(s.v[0][1] as i64) * &w.1,
                int(s.v[1][0] as i64) * &w.0 + int(s.v[1][1] as i64) * &w.1,
            );
            isolated.push(connection_from_nu(m, &nu, None)?);
        }
    }
    isolated.sort_by(|x, y| x.nu.cmp(&y.nu));
    Ok(TorusModuliSet { isolated, families: Vec::new() })
}

/// Connection on a circle bundle of degree `l`, pulled back from a line
/// bundle of degree `k` over the base surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleFlatConnection {
    pub degree_l: i64,
    pub chern_k: i64,
    #[serde(serialize_with = "ser_opt")]
    pub q: Option<Rational>,
    pub is_trivial: bool,
}

impl CircleFlatConnection {
    /// A trivial connection needs integral holonomy exponent, so `is_trivial`
    /// is rejected unless `l = 0` or `l` divides `k`.
    pub fn new(degree_l: i64, chern_k: i64, is_trivial: bool) -> Result<Self> {
        let q = (degree_l != 0).then(|| rat(chern_k, degree_l));
        if is_trivial && q.as_ref().is_some_and(|q| !is_integer(q)) {
            return Err(Error::Admissibility(format!(
                "connection with q = {chern_k}/{degree_l} cannot be trivial"
            )));
        }
        Ok(CircleFlatConnection { degree_l, chern_k, q, is_trivial })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircleModuliSummary {
    pub torus_rank: i64,
    /// `|l|`; zero stands for the extra free U(1) factor when `l = 0`.
    pub torsion_order: i64,
}

pub fn circle_moduli_summary(genus: i64, degree_l: i64) -> Result<CircleModuliSummary> {
    if genus < 0 {
        return Err(Error::Domain(format!("genus {genus} is negative")));
    }
    Ok(CircleModuliSummary { torus_rank: 2 * genus, torsion_order: degree_l.abs() })
}

/// `|det(Id - M^t)| = |2 - tr M|`.
pub fn class_count(m: &SL2ZMatrix) -> i64 {
    (2 - m.trace()).abs()
}

/// Coordinates of `nu` in the frame where the monodromy becomes
/// `g^-1 M g`: `g^t nu` reduced mod `Z^2`.
pub fn transport(conjugator: &SL2ZMatrix, nu: &(Rational, Rational)) -> (Rational, Rational) {
    normalize(&conjugator.transpose_apply_rat(nu))
}
