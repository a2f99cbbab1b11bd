//! Grid scans of the closed-form velocity and amplitude laws.

use std::cmp::Ordering;

use serde::Serialize;

use super::{amplitude, midpoint, velocity};
use crate::error::SolitonError;
use crate::lattice::SystemParams;
use crate::rational::Rat;

/// Float tolerance for equality of velocities/amplitudes.
pub const SIGN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// `"v"` or `"w"`.
    pub quantity: &'static str,
    pub expected: &'static str,
    pub p_left: f64,
    pub p_right: f64,
    pub value_left: f64,
    pub value_right: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub alpha: String,
    pub beta: String,
    pub grid: usize,
    pub violations: Vec<Violation>,
    /// Location of the velocity extremum (max for alpha < beta, min for
    /// alpha > beta); absent when the velocity is constant.
    pub v_extremum_p: Option<f64>,
    pub w_extremum_p: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<(f64, f64, f64)>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Trend {
    Up,
    Down,
}

fn check_trend(
    quantity: &'static str,
    trend: Trend,
    (pl, vl): (f64, f64),
    (pr, vr): (f64, f64),
    out: &mut Vec<Violation>,
) {
    let ok = match trend {
        Trend::Up => vr > vl,
        Trend::Down => vr < vl,
    };
    if !ok {
        out.push(Violation {
            quantity,
            expected: if trend == Trend::Up { "increasing" } else { "decreasing" },
            p_left: pl,
            p_right: pr,
            value_left: vl,
            value_right: vr,
        });
    }
}

/// Samples `v(p)` and `W(p)` at `p_k = (alpha+beta-1)(k+1)/(grid+1)` and
/// checks the unimodal shapes about the midpoint:
///
/// * `W` decreases up to the midpoint and increases after it;
/// * `v` increases then decreases if `alpha < beta`, decreases then
///   increases if `alpha > beta`, and is identically 1 if `alpha = beta`.
pub fn scan_monotonicity(
    params: &SystemParams,
    grid_size: usize,
) -> Result<MonotonicityReport, SolitonError> {
    if !params.p_max().is_positive() {
        return Err(SolitonError::InvalidInterval);
    }
    if grid_size < 3 {
        return Err(SolitonError::GridTooSmall(grid_size));
    }
    let mid = midpoint(params);
    let p_max = params.p_max();
    let points: Vec<Rat> = (1..=grid_size as i64)
        .map(|k| &p_max * Rat::new(k, grid_size as i64 + 1).expect("nonzero"))
        .collect();
    let samples = points
        .iter()
        .map(|p| Ok((p.to_f64(), velocity(params, p)?, amplitude(params, p)?)))
        .collect::<Result<Vec<_>, SolitonError>>()?;

    let v_trend = match params.alpha().cmp(params.beta()) {
        Ordering::Less => Some((Trend::Up, Trend::Down)),
        Ordering::Greater => Some((Trend::Down, Trend::Up)),
        Ordering::Equal => None,
    };

    let mut violations = Vec::new();
    for k in 0..grid_size - 1 {
        let (pl, pr) = (&points[k], &points[k + 1]);
        let (l, r) = (samples[k], samples[k + 1]);
        let side = if *pr <= mid {
            Some(0)
        } else if *pl >= mid {
            Some(1)
        } else {
            None
        };
        let Some(side) = side else { continue };
        let w_trend = if side == 0 { Trend::Down } else { Trend::Up };
        check_trend("w", w_trend, (l.0, l.2), (r.0, r.2), &mut violations);
        if let Some((left, right)) = v_trend {
            let trend = if side == 0 { left } else { right };
            check_trend("v", trend, (l.0, l.1), (r.0, r.1), &mut violations);
        }
    }
    if v_trend.is_none() {
        for &(p, v, _) in &samples {
            if (v - 1.0).abs() > SIGN_TOLERANCE {
                violations.push(Violation {
                    quantity: "v",
                    expected: "constant 1",
                    p_left: p,
                    p_right: p,
                    value_left: v,
                    value_right: 1.0,
                });
            }
        }
    }

    let arg = |key: fn(&(f64, f64, f64)) -> f64, max: bool| {
        samples
            .iter()
            .max_by(|a, b| {
                let o = key(a).total_cmp(&key(b));
                if max { o } else { o.reverse() }
            })
            .map(|s| s.0)
    };
    let v_extremum_p = match v_trend {
        Some((Trend::Up, _)) => arg(|s| s.1, true),
        Some((Trend::Down, _)) => arg(|s| s.1, false),
        None => None,
    };
    let w_extremum_p = arg(|s| s.2, false);

    Ok(MonotonicityReport {
        alpha: params.alpha().to_string(),
        beta: params.beta().to_string(),
        grid: grid_size,
        violations,
        v_extremum_p,
        w_extremum_p,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignRelationReport {
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<(f64, f64)>,
}

fn sign(d: f64) -> i8 {
    if d.abs() <= SIGN_TOLERANCE {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Checks `sign(v(p) - v(q)) = +-sign(W(p) - W(q))` on the given pairs,
/// `+` when `alpha > beta` and `-` when `alpha < beta`. Pairs involving the
/// midpoint, where the velocity is defined by convention, are skipped; for
/// `alpha = beta` every pair is skipped.
pub fn check_sign_relation(
    params: &SystemParams,
    pairs: &[(Rat, Rat)],
) -> Result<SignRelationReport, SolitonError> {
    let orientation: i8 = match params.alpha().cmp(params.beta()) {
        Ordering::Greater => 1,
        Ordering::Less => -1,
        Ordering::Equal => 0,
    };
    let mid = midpoint(params);
    let mut report = SignRelationReport { checked: 0, skipped: 0, violations: Vec::new() };
    for (p, q) in pairs {
        if orientation == 0 || *p == mid || *q == mid {
            report.skipped += 1;
            continue;
        }
        let dv = velocity(params, p)? - velocity(params, q)?;
        let dw = amplitude(params, p)? - amplitude(params, q)?;
        report.checked += 1;
        if sign(dv) != orientation * sign(dw) {
            report.violations.push((p.to_f64(), q.to_f64()));
        }
    }
    Ok(report)
}
