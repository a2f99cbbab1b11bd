//! Four-component discrete KP tau function and its bilinear identities.

use rand::Rng;

use crate::error::SolitonError;
use crate::matrix::RatMatrix;
use crate::rational::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KpSoliton {
    pub p: Rat,
    pub q: Rat,
    pub gamma: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KpParams {
    pub a1: Rat,
    pub a2: Rat,
    pub b: Rat,
    pub c: Rat,
    pub solitons: Vec<KpSoliton>,
}

/// Lattice point `(l1, l2, t, n)`.
pub type LatticePoint = (i64, i64, i64, i64);

impl KpParams {
    /// All of `p_i`, `q_i`, `a1`, `a2`, `b`, `c` must be pairwise distinct
    /// (`a1 = a2` is allowed).
    pub fn validate(&self) -> Result<(), SolitonError> {
        for (i, si) in self.solitons.iter().enumerate() {
            for (j, sj) in self.solitons.iter().enumerate() {
                if si.p == sj.q {
                    return Err(SolitonError::DenominatorClash(i, j));
                }
                if i != j && (si.p == sj.p || si.q == sj.q) {
                    return Err(SolitonError::KpDegenerate);
                }
            }
        }
        let params = [&self.a1, &self.a2, &self.b, &self.c];
        if self.b == self.c || self.b == self.a1 || self.b == self.a2 || self.c == self.a1 || self.c == self.a2 {
            return Err(SolitonError::KpDegenerate);
        }
        let clash = self
            .solitons
            .iter()
            .any(|s| params.iter().any(|&v| *v == s.p || *v == s.q));
        if clash {
            return Err(SolitonError::KpDegenerate);
        }
        Ok(())
    }

    /// True when `p_i + q_i = a1 + a2` for every soliton.
    pub fn first_unreduced(&self) -> Option<usize> {
        let sum = &self.a1 + &self.a2;
        self.solitons.iter().position(|s| &s.p + &s.q != sum)
    }

    /// Random admissible parameters with small numerators and
    /// denominators. With `reduced`, `q_i = a1 + a2 - p_i`.
    pub fn random<R: Rng>(rng: &mut R, order: usize, reduced: bool) -> Self {
        fn small<R: Rng>(rng: &mut R) -> Rat {
            let n = rng.gen_range(-24i64..=24);
            let d = rng.gen_range(1i64..=9);
            Rat::new(n, d).expect("positive denominator")
        }
        loop {
            let a1 = small(rng);
            let a2 = small(rng);
            let solitons = (0..order)
                .map(|_| {
                    let p = small(rng);
                    let q = if reduced { &a1 + &a2 - &p } else { small(rng) };
                    let mut gamma = small(rng);
                    if gamma.is_zero() {
                        gamma = Rat::one();
                    }
                    KpSoliton { p, q, gamma }
                })
                .collect();
            let kp = KpParams { a1, a2, b: small(rng), c: small(rng), solitons };
            if kp.validate().is_ok() {
                return kp;
            }
        }
    }
}

/// `det[d_ij + g_i/(p_i - q_j) * r_1^l1 r_2^l2 r_b^t r_c^n]` with
/// `r_k = (q_i - k)/(p_i - k)`.
pub fn kp_tau(kp: &KpParams, (l1, l2, t, n): LatticePoint) -> Result<Rat, SolitonError> {
    kp.validate()?;
    let waves = kp
        .solitons
        .iter()
        .map(|s| {
            let ratio = |k: &Rat| (&s.q - k).checked_div(&(&s.p - k));
            Ok(ratio(&kp.a1)?.pow(l1)?
                * ratio(&kp.a2)?.pow(l2)?
                * ratio(&kp.b)?.pow(t)?
                * ratio(&kp.c)?.pow(n)?)
        })
        .collect::<Result<Vec<Rat>, SolitonError>>()?;
    let mut entries = Vec::with_capacity(waves.len());
    for (i, si) in kp.solitons.iter().enumerate() {
        let mut row = Vec::with_capacity(waves.len());
        for (j, sj) in kp.solitons.iter().enumerate() {
            let mut e = si.gamma.checked_div(&(&si.p - &sj.q))? * &waves[i];
            if i == j {
                e += Rat::one();
            }
            row.push(e);
        }
        entries.push(row);
    }
    Ok(RatMatrix::from_rows(entries)?.det())
}

/// Residuals of the two bilinear equations
/// `(a_k - b) tau_{l_k t} tau_n + (b - c) tau_{l_k} tau_{tn} + (c - a_k) tau_{l_k n} tau_t`
/// for `k = 1, 2`. Both vanish for every tau from [`kp_tau`].
pub fn check_kp_bilinear(kp: &KpParams, point: LatticePoint) -> Result<(Rat, Rat), SolitonError> {
    let (l1, l2, t, n) = point;
    let tau = |dl1: i64, dl2: i64, dt: i64, dn: i64| kp_tau(kp, (l1 + dl1, l2 + dl2, t + dt, n + dn));
    let tau_t = tau(0, 0, 1, 0)?;
    let tau_n = tau(0, 0, 0, 1)?;
    let tau_tn = tau(0, 0, 1, 1)?;
    let residual = |a: &Rat, shifted: [Rat; 3]| {
        let [s, s_t, s_n] = shifted;
        (a - &kp.b) * s_t * &tau_n + (&kp.b - &kp.c) * s * &tau_tn + (&kp.c - a) * s_n * &tau_t
    };
    let r1 = residual(&kp.a1, [tau(1, 0, 0, 0)?, tau(1, 0, 1, 0)?, tau(1, 0, 0, 1)?]);
    let r2 = residual(&kp.a2, [tau(0, 1, 0, 0)?, tau(0, 1, 1, 0)?, tau(0, 1, 0, 1)?]);
    Ok((r1, r2))
}

/// `tau(l1+1, l2+1, t, n) - tau(l1, l2, t, n)` under the reduction
/// `p_i + q_i = a1 + a2`.
pub fn check_reduction(kp: &KpParams, (l1, l2, t, n): LatticePoint) -> Result<Rat, SolitonError> {
    if let Some(i) = kp.first_unreduced() {
        return Err(SolitonError::ConstraintViolated(i));
    }
    Ok(kp_tau(kp, (l1 + 1, l2 + 1, t, n))? - kp_tau(kp, (l1, l2, t, n))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    fn sample() -> KpParams {
        KpParams {
            a1: r(1, 2),
            a2: r(-1, 3),
            b: r(2, 1),
            c: r(-5, 4),
            solitons: vec![
                KpSoliton { p: r(3, 2), q: r(-7, 3), gamma: r(1, 5) },
                KpSoliton { p: r(-2, 3), q: r(5, 7), gamma: r(-3, 2) },
            ],
        }
    }

    #[test]
    fn vacuum_tau_is_one() {
        let mut kp = sample();
        for s in &mut kp.solitons {
            s.gamma = Rat::zero();
        }
        assert!(kp_tau(&kp, (1, -2, 3, 0)).unwrap().is_one());
        let (r1, r2) = check_kp_bilinear(&kp, (0, 0, 0, 0)).unwrap();
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn one_by_one_is_the_entry() {
        let mut kp = sample();
        kp.solitons.truncate(1);
        let s = &kp.solitons[0];
        let ratio = |k: &Rat| (&s.q - k).checked_div(&(&s.p - k)).unwrap();
        let expected = Rat::one()
            + s.gamma.checked_div(&(&s.p - &s.q)).unwrap()
                * ratio(&kp.a1).pow(2).unwrap()
                * ratio(&kp.b).pow(-1).unwrap()
                * ratio(&kp.c).pow(3).unwrap();
        assert_eq!(kp_tau(&kp, (2, 0, -1, 3)).unwrap(), expected);
    }

    #[test]
    fn bilinear_holds_on_sample() {
        let kp = sample();
        for point in [(0, 0, 0, 0), (1, -1, 2, -3), (-2, 3, -1, 1)] {
            let (r1, r2) = check_kp_bilinear(&kp, point).unwrap();
            assert!(r1.is_zero() && r2.is_zero(), "{point:?}");
        }
    }

    #[test]
    fn reduction_guard_and_identity() {
        assert_eq!(check_reduction(&sample(), (0, 0, 0, 0)), Err(SolitonError::ConstraintViolated(0)));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kp = KpParams::random(&mut rng, 1, true);
        assert!(check_reduction(&kp, (0, 1, -2, 2)).unwrap().is_zero());
    }

    #[test]
    fn degenerate_parameters_rejected() {
        let mut kp = sample();
        kp.solitons[1].q = kp.solitons[0].p.clone();
        assert_eq!(kp_tau(&kp, (0, 0, 0, 0)), Err(SolitonError::DenominatorClash(0, 1)));
        let mut kp = sample();
        kp.b = kp.solitons[0].q.clone();
        assert_eq!(kp_tau(&kp, (0, 0, 0, 0)), Err(SolitonError::KpDegenerate));
    }
}
