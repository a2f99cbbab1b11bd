//! Exact N-soliton solutions of the generalized discrete KdV equation.
//!
//! The solution is built from two determinant tau functions
//!
//! ```text
//! f(t, n) = det[ d_ij + g_i / (p_i + p_j + Delta) * A_i^t * B_i^n ]
//! g(t, n) = det[ d_ij + g_i / (p_i + p_j + Delta) * D_i * A_i^t * B_i^n ]
//! ```
//!
//! with `A = (beta - p)/(p + 1 - alpha)`, `B = (p + 1 - beta)/(alpha - p)`,
//! `D = (-Delta - p)/p`, and the field is
//! `x = f g(n+1) / (g f(n+1))`, `y = g f(t+1) / (f g(t+1))`.

mod kp;
mod scan;

pub use kp::{check_kp_bilinear, check_reduction, kp_tau, KpParams, KpSoliton, LatticePoint};
pub use scan::{check_sign_relation, scan_monotonicity, SignRelationReport, MonotonicityReport, Violation};

use rayon::prelude::*;

use crate::error::SolitonError;
use crate::lattice::{FieldRow, LatticeField, SystemParams};
use crate::matrix::RatMatrix;
use crate::rational::Rat;

/// One soliton's `(p, gamma)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Soliton {
    pub p: Rat,
    pub gamma: Rat,
}

impl Soliton {
    pub fn new(p: Rat, gamma: Rat) -> Self {
        Soliton { p, gamma }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolitonSpec {
    pub solitons: Vec<Soliton>,
}

impl SolitonSpec {
    pub fn new(solitons: Vec<Soliton>) -> Self {
        SolitonSpec { solitons }
    }

    pub fn len(&self) -> usize {
        self.solitons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solitons.is_empty()
    }
}

/// Constants of the one-soliton form
/// `x = (1 + C A^t B^n)(1 + C D A^t B^{n+1}) / ((1 + C D A^t B^n)(1 + C A^t B^{n+1}))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneSolitonConstants {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

impl OneSolitonConstants {
    /// Evaluates the defining formulas without checking admissibility.
    pub fn compute(params: &SystemParams, soliton: &Soliton) -> Result<Self, SolitonError> {
        let one = Rat::one();
        let p = &soliton.p;
        let (alpha, beta, delta) = (params.alpha(), params.beta(), params.delta_cap());
        let a = (beta - p).checked_div(&(p + &one - alpha))?;
        let b = (p + &one - beta).checked_div(&(alpha - p))?;
        let c = soliton.gamma.checked_div(&(p + p + delta))?;
        let d = (-delta - p).checked_div(p)?;
        Ok(OneSolitonConstants { a, b, c, d })
    }

    /// Continuous `n` of the profile extremum at time `t`, where
    /// `C A^t B^n = 1/sqrt(BD)`.
    pub fn extremum_position(&self, t: f64) -> f64 {
        let (a, b, c, d) = (self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64());
        (-0.5 * (b * d).ln() - c.ln() - t * a.ln()) / b.ln()
    }
}

fn midpoint(params: &SystemParams) -> Rat {
    params.p_max() * Rat::new(1, 2).expect("nonzero")
}

/// Checks every admissibility condition and returns per-soliton constants.
pub fn validate(
    params: &SystemParams,
    spec: &SolitonSpec,
) -> Result<Vec<OneSolitonConstants>, SolitonError> {
    let p_max = params.p_max();
    if !p_max.is_positive() {
        return Err(SolitonError::InvalidInterval);
    }
    let mid = midpoint(params);
    for (i, s) in spec.solitons.iter().enumerate() {
        if !s.p.is_positive() || s.p >= p_max {
            return Err(SolitonError::POutOfRange(i));
        }
        if s.p == mid {
            return Err(SolitonError::DegenerateP(i));
        }
        if !(&s.gamma * (&s.p - &mid)).is_positive() {
            return Err(SolitonError::GammaSignCondition(i));
        }
    }
    for (i, si) in spec.solitons.iter().enumerate() {
        for (j, sj) in spec.solitons.iter().enumerate().skip(i + 1) {
            if si.p == sj.p {
                return Err(SolitonError::DuplicateP(i, j));
            }
            if (&si.p + &sj.p + params.delta_cap()).is_zero() {
                return Err(SolitonError::DenominatorClash(i, j));
            }
        }
    }
    spec.solitons
        .iter()
        .map(|s| OneSolitonConstants::compute(params, s))
        .collect()
}

fn check_p_range(params: &SystemParams, p: &Rat) -> Result<(), SolitonError> {
    if !params.p_max().is_positive() {
        return Err(SolitonError::InvalidInterval);
    }
    if !p.is_positive() || *p >= params.p_max() {
        return Err(SolitonError::POutOfRange(0));
    }
    Ok(())
}

/// Closed-form soliton velocity `-log A / log B`, equal to 1 at the
/// midpoint of the admissible interval.
pub fn velocity(params: &SystemParams, p: &Rat) -> Result<f64, SolitonError> {
    check_p_range(params, p)?;
    if *p == midpoint(params) {
        return Ok(1.0);
    }
    let k = OneSolitonConstants::compute(params, &Soliton::new(p.clone(), Rat::one()))?;
    Ok(-k.a.to_f64().ln() / k.b.to_f64().ln())
}

/// Depth `|x_trough - 1|` of the one-soliton profile, where the trough sits
/// at `B^n C A^t = 1/sqrt(BD)`. Zero at the midpoint.
pub fn amplitude(params: &SystemParams, p: &Rat) -> Result<f64, SolitonError> {
    check_p_range(params, p)?;
    if *p == midpoint(params) {
        return Ok(0.0);
    }
    let k = OneSolitonConstants::compute(params, &Soliton::new(p.clone(), Rat::one()))?;
    let (b, d) = (k.b.to_f64(), k.d.to_f64());
    let s = (b * d).sqrt();
    let trough = (1.0 + 1.0 / s) * (1.0 + s) / ((1.0 + (d / b).sqrt()) * (1.0 + (b / d).sqrt()));
    Ok((trough - 1.0).abs())
}

/// Precomputed per-soliton data for repeated tau evaluation.
struct TauKernel {
    /// `gamma_i / (p_i + p_j + Delta)`.
    coupling: Vec<Vec<Rat>>,
    consts: Vec<OneSolitonConstants>,
}

impl TauKernel {
    fn new(params: &SystemParams, spec: &SolitonSpec) -> Result<Self, SolitonError> {
        let consts = validate(params, spec)?;
        let coupling = spec
            .solitons
            .iter()
            .map(|si| {
                spec.solitons
                    .iter()
                    .map(|sj| si.gamma.checked_div(&(&si.p + &sj.p + params.delta_cap())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TauKernel { coupling, consts })
    }

    /// `plane_i = A_i^t B_i^n`.
    fn plane_waves(&self, t: i64, n: i64) -> Result<Vec<Rat>, SolitonError> {
        self.consts
            .iter()
            .map(|k| Ok(k.a.pow(t)? * k.b.pow(n)?))
            .collect()
    }

    fn det(&self, plane: &[Rat], with_d: bool) -> Rat {
        RatMatrix::from_fn(plane.len(), |i, j| {
            let mut e = &self.coupling[i][j] * &plane[i];
            if with_d {
                e *= &self.consts[i].d;
            }
            if i == j {
                e += Rat::one();
            }
            e
        })
        .det()
    }

    fn fg(&self, t: i64, n: i64) -> Result<(Rat, Rat), SolitonError> {
        let plane = self.plane_waves(t, n)?;
        Ok((self.det(&plane, false), self.det(&plane, true)))
    }
}

/// Tau function `f(t, n)`.
pub fn tau_f(params: &SystemParams, spec: &SolitonSpec, t: i64, n: i64) -> Result<Rat, SolitonError> {
    Ok(TauKernel::new(params, spec)?.fg(t, n)?.0)
}

/// Tau function `g(t, n)`.
pub fn tau_g(params: &SystemParams, spec: &SolitonSpec, t: i64, n: i64) -> Result<Rat, SolitonError> {
    Ok(TauKernel::new(params, spec)?.fg(t, n)?.1)
}

fn xy_from_taus(
    (f, g): (&Rat, &Rat),
    (f_n, g_n): (&Rat, &Rat),
    (f_t, g_t): (&Rat, &Rat),
    t: i64,
    n: i64,
) -> Result<(Rat, Rat), SolitonError> {
    if [f, g, f_n, g_n, f_t, g_t].iter().any(|v| v.is_zero()) {
        return Err(SolitonError::ZeroTau(t, n));
    }
    let x = (f * g_n).checked_div(&(g * f_n))?;
    let y = (g * f_t).checked_div(&(f * g_t))?;
    Ok((x, y))
}

/// Exact field values `(x_n^t, y_n^t)` from the tau functions.
pub fn sample_xy(
    params: &SystemParams,
    spec: &SolitonSpec,
    t: i64,
    n: i64,
) -> Result<(Rat, Rat), SolitonError> {
    let kernel = TauKernel::new(params, spec)?;
    let (f, g) = kernel.fg(t, n)?;
    let (f_n, g_n) = kernel.fg(t, n + 1)?;
    let (f_t, g_t) = kernel.fg(t + 1, n)?;
    xy_from_taus((&f, &g), (&f_n, &g_n), (&f_t, &g_t), t, n)
}

/// Samples the exact field on `n in [n_lo, n_hi]`, `t in [t0, t1]`.
///
/// Each tau value is computed once; rows are evaluated in parallel.
pub fn sample_field(
    params: &SystemParams,
    spec: &SolitonSpec,
    (n_lo, n_hi): (i64, i64),
    (t0, t1): (i64, i64),
) -> Result<LatticeField, SolitonError> {
    if n_hi < n_lo || t1 < t0 {
        return Err(crate::error::LatticeError::WindowTooSmall.into());
    }
    let kernel = TauKernel::new(params, spec)?;
    let width = (n_hi - n_lo + 2) as usize;
    // tau rows for t0 ..= t1 + 1, each covering n_lo ..= n_hi + 1
    let taus: Vec<Vec<(Rat, Rat)>> = (t0..=t1 + 1)
        .into_par_iter()
        .map(|t| {
            (0..width)
                .map(|k| kernel.fg(t, n_lo + k as i64))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let rows = (0..=(t1 - t0) as usize)
        .into_par_iter()
        .map(|r| {
            let t = t0 + r as i64;
            let mut x = Vec::with_capacity(width - 1);
            let mut y = Vec::with_capacity(width - 1);
            for k in 0..width - 1 {
                let n = n_lo + k as i64;
                let (f, g) = &taus[r][k];
                let (f_n, g_n) = &taus[r][k + 1];
                let (f_t, g_t) = &taus[r + 1][k];
                let (xv, yv) = xy_from_taus((f, g), (f_n, g_n), (f_t, g_t), t, n)?;
                x.push(xv);
                y.push(yv);
            }
            Ok(FieldRow { x, y })
        })
        .collect::<Result<Vec<_>, SolitonError>>()?;
    Ok(LatticeField { n_lo, n_hi, t0, rows })
}

/// Outcome of checking the lattice equation on a sampled field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub points: usize,
    pub zero_residual_points: usize,
    /// First point `(t, n)` with a nonzero residual.
    pub first_failure: Option<(i64, i64)>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.points == self.zero_residual_points
    }
}

/// Residuals of both equations of the generalized system at `(t, n)`,
/// given the four field values involved.
pub fn gkdv_residual(
    params: &SystemParams,
    (x, y): (&Rat, &Rat),
    x_next_t: &Rat,
    y_next_n: &Rat,
) -> Result<(Rat, Rat), SolitonError> {
    let xy = x * y;
    let num = Rat::one() - params.beta() + params.beta() * &xy;
    let den = Rat::one() - params.alpha() + params.alpha() * &xy;
    let ratio = num.checked_div(&den)?;
    let r1 = x_next_t - &ratio * y;
    let r2 = y_next_n - x.checked_div(&ratio)?;
    Ok((r1, r2))
}

/// Checks the generalized equation at every interior point of a sampled
/// field (all but the last row and column).
pub fn check_field_exactness(
    params: &SystemParams,
    field: &LatticeField,
) -> Result<ExactnessReport, SolitonError> {
    let rows = field.rows.len();
    let width = field.width();
    type RowTally = (usize, usize, Option<(i64, i64)>);
    let per_row: Vec<RowTally> = (0..rows.saturating_sub(1))
        .into_par_iter()
        .map(|r| {
            let (cur, next) = (&field.rows[r], &field.rows[r + 1]);
            let mut ok = 0;
            let mut first = None;
            for k in 0..width - 1 {
                let (r1, r2) =
                    gkdv_residual(params, (&cur.x[k], &cur.y[k]), &next.x[k], &cur.y[k + 1])?;
                if r1.is_zero() && r2.is_zero() {
                    ok += 1;
                } else if first.is_none() {
                    first = Some((field.t0 + r as i64, field.n_lo + k as i64));
                }
            }
            Ok((width - 1, ok, first))
        })
        .collect::<Result<_, SolitonError>>()?;
    Ok(ExactnessReport {
        points: per_row.iter().map(|p| p.0).sum(),
        zero_residual_points: per_row.iter().map(|p| p.1).sum(),
        first_failure: per_row.iter().find_map(|p| p.2),
    })
}

/// Samples a `grid x grid` block around the origin and checks the lattice
/// equation exactly at each point.
pub fn verify_exactness(
    params: &SystemParams,
    spec: &SolitonSpec,
    grid: usize,
) -> Result<ExactnessReport, SolitonError> {
    let half = (grid / 2) as i64;
    let lo = -half;
    let hi = lo + grid as i64;
    let field = sample_field(params, spec, (lo, hi), (lo, hi))?;
    check_field_exactness(params, &field)
}
