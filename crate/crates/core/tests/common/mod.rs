//! Oracles and fixtures shared by the integration tests.
//!
//! The oracles are written independently of the library algorithms: the
//! determinant is a cofactor expansion and the one-soliton field is the
//! closed-form product of four linear factors.

#![allow(dead_code)]

use soliton_lab::soliton::OneSolitonConstants;
use soliton_lab::{Rat, Soliton, SolitonSpec, SystemParams};

pub fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d).unwrap()
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Rat::zero();
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rat>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][col] * cofactor_det(&minor);
        if col % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Tau function built entry by entry and expanded by cofactors.
pub fn oracle_tau(params: &SystemParams, spec: &SolitonSpec, t: i64, n: i64, with_d: bool) -> Rat {
    let delta = Rat::one() - params.alpha() - params.beta();
    let k: Vec<OneSolitonConstants> = spec
        .solitons
        .iter()
        .map(|s| OneSolitonConstants::compute(params, s).unwrap())
        .collect();
    let size = spec.len();
    let m: Vec<Vec<Rat>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let si = &spec.solitons[i];
                    let sj = &spec.solitons[j];
                    let mut e = si.gamma.checked_div(&(&si.p + &sj.p + &delta)).unwrap()
                        * k[i].a.pow(t).unwrap()
                        * k[i].b.pow(n).unwrap();
                    if with_d {
                        e *= &k[i].d;
                    }
                    if i == j {
                        e += Rat::one();
                    }
                    e
                })
                .collect()
        })
        .collect();
    cofactor_det(&m)
}

/// `x = (1 + X)(1 + D B X) / ((1 + D X)(1 + B X))` with `X = C A^t B^n`.
pub fn one_soliton_x(params: &SystemParams, s: &Soliton, t: i64, n: i64) -> Rat {
    let k = OneSolitonConstants::compute(params, s).unwrap();
    let x = &k.c * k.a.pow(t).unwrap() * k.b.pow(n).unwrap();
    let one = Rat::one();
    let num = (&one + &x) * (&one + &k.d * &k.b * &x);
    let den = (&one + &k.d * &x) * (&one + &k.b * &x);
    num.checked_div(&den).unwrap()
}

pub fn overtaking_params() -> SystemParams {
    SystemParams::new(r(5, 6), r(14, 15)).unwrap()
}

pub fn overtaking_pair() -> SolitonSpec {
    SolitonSpec::new(vec![Soliton::new(r(2, 15), r(-1, 6)), Soliton::new(r(1, 30), r(-1, 30))])
}

pub fn equal_params() -> SystemParams {
    SystemParams::new(r(5, 6), r(5, 6)).unwrap()
}

pub fn equal_pair() -> SolitonSpec {
    SolitonSpec::new(vec![Soliton::new(r(1, 15), r(-20, 1)), Soliton::new(r(1, 30), r(-1, 60))])
}
