#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use rho_calc::moduli::enumerate_torus_connections;
use rho_calc::rational::rat;
use rho_calc::sl2z::{classify, ext_gcd, MonodromyClass, SL2ZMatrix};
use rho_calc::Rational;

/// Random element of SL(2,Z) with all entries bounded by `bound` in absolute value.
pub fn random_sl2z(rng: &mut StdRng, bound: i64) -> SL2ZMatrix {
    loop {
        let a = rng.gen_range(-bound..=bound);
        let c = rng.gen_range(-bound..=bound);
        let (g, x, y) = ext_gcd(a, c);
        if g != 1 {
            continue;
        }
        // a x + c y = 1; shift (b, d) along (a, c) to land inside the box
        let k = rng.gen_range(-bound..=bound);
        let (b, d) = (-y + k * a, x + k * c);
        if b.abs() > bound || d.abs() > bound {
            continue;
        }
        if let Ok(m) = SL2ZMatrix::new(a, b, c, d) {
            return m;
        }
    }
}

pub fn random_hyperbolic(rng: &mut StdRng, bound: i64) -> SL2ZMatrix {
    loop {
        let m = random_sl2z(rng, bound);
        if m.trace().abs() > 2 {
            return m;
        }
    }
}

/// Random parabolic matrix `g (eps [[1,l],[0,1]]) g^-1` with `l != 0`.
pub fn random_parabolic(rng: &mut StdRng, bound: i64) -> SL2ZMatrix {
    loop {
        let g = random_sl2z(rng, 3);
        let l = rng.gen_range(-bound..=bound);
        let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
        if l == 0 {
            continue;
        }
        let n = SL2ZMatrix::new(eps, eps * l, 0, eps).unwrap();
        let m = g.mul(&n).mul(&g.inverse());
        if matches!(classify(&m), Ok(MonodromyClass::Parabolic { .. })) {
            return m;
        }
    }
}

pub fn random_rational(rng: &mut StdRng, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    rat(rng.gen_range(-3 * q..=3 * q), q)
}

/// Random hyperbolic `M` (so `c != 0`) with a random class `nu` solving `(Id - M^t) nu` integral.
pub fn random_admissible(rng: &mut StdRng, bound: i64) -> ((Rational, Rational), SL2ZMatrix) {
    let m = random_hyperbolic(rng, bound);
    let set = enumerate_torus_connections(&m).unwrap();
    let i = rng.gen_range(0..set.isolated.len());
    (set.isolated[i].nu.clone(), m)
}
