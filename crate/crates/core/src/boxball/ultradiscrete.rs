//! Ultradiscrete limit of the generalized discrete KdV equation.
//!
//! With `x = exp(-X/eps)`, `y = exp(-Y/eps)`, `alpha = exp(-A/eps)` and
//! `beta = exp(-B/eps)`, the limit `eps -> 0` of the lattice map is
//!
//! ```text
//! X_n^{t+1} = min(-X, B + Y) + max(X + Y + A, 0) - A
//! Y_{n+1}^t = X + Y - X_n^{t+1}
//! ```
//!
//! and `U = X + A`, `V = Y + B` turns it into the box-ball system with
//! carrier, `C_B = A` and `C_C = B`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::BoxBallError;
use crate::lattice::SystemParams;

/// Real-valued ultradiscrete slice: `X` on the window, the incoming `Y`
/// at the left edge, and the parameters `A`, `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct UdField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl UdField {
    fn check(&self) -> Result<(), BoxBallError> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(BoxBallError::NonPositiveParameter);
        }
        if self.y.len() != self.x.len() {
            return Err(BoxBallError::LengthMismatch(self.x.len(), self.y.len()));
        }
        Ok(())
    }
}

/// Tropical sweep. Returns `X^{t+1}` on the window and the swept `Y^t`
/// (one entry longer than `x`, starting with `y_in`).
pub fn tropical_step(x: &[f64], y_in: f64, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x_next = Vec::with_capacity(x.len());
    let mut y = Vec::with_capacity(x.len() + 1);
    let mut carry = y_in;
    for &xn in x {
        let xn1 = (-xn).min(b + carry) + (xn + carry + a).max(0.0) - a;
        y.push(carry);
        carry = xn + carry - xn1;
        x_next.push(xn1);
    }
    y.push(carry);
    (x_next, y)
}

/// `ln(exp(p) + exp(q))` without overflow.
fn log_add_exp(p: f64, q: f64) -> f64 {
    if p == f64::NEG_INFINITY {
        return q;
    }
    let (hi, lo) = if p > q { (p, q) } else { (q, p) };
    hi + (lo - hi).exp().ln_1p()
}

/// Generalized discrete KdV sweep evaluated in the logarithmic variables
/// `X = -eps ln x`, so that `exp(-X/eps)` never has to be formed.
fn gkdv_log_step(x: &[f64], y_in: f64, a: f64, b: f64, eps: f64) -> (Vec<f64>, Vec<f64>) {
    // ln(1 - alpha), ln(1 - beta)
    let ln_1ma = (-(-a / eps).exp()).ln_1p();
    let ln_1mb = (-(-b / eps).exp()).ln_1p();
    let mut x_next = Vec::with_capacity(x.len());
    let mut y = Vec::with_capacity(x.len() + 1);
    let mut carry = y_in;
    for &xn in x {
        let s = xn + carry;
        let ln_num = log_add_exp(ln_1mb, -(b + s) / eps);
        let ln_den = log_add_exp(ln_1ma, -(a + s) / eps);
        let xn1 = carry - eps * ln_num + eps * ln_den;
        y.push(carry);
        carry = xn - eps * ln_den + eps * ln_num;
        x_next.push(xn1);
    }
    y.push(carry);
    (x_next, y)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UdLimitEntry {
    pub epsilon: f64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UdLimitReport {
    pub entries: Vec<UdLimitEntry>,
    pub strictly_decreasing: bool,
}

/// Compares one step of the lattice map at finite `eps` with the tropical
/// step, for each `eps` in `epsilons` (positive, decreasing). The deviation
/// is the max over sites of `|X'_eps - X'_trop|` and of the swept `Y`.
pub fn ud_limit_check(field: &UdField, epsilons: &[f64]) -> Result<UdLimitReport, BoxBallError> {
    field.check()?;
    if let Some(&bad) = epsilons.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(BoxBallError::NonPositiveEpsilon(bad));
    }
    let y_in = field.y.first().copied().unwrap_or(-field.b);
    let (trop_x, trop_y) = tropical_step(&field.x, y_in, field.a, field.b);
    let entries: Vec<UdLimitEntry> = epsilons
        .iter()
        .map(|&eps| {
            let (gx, gy) = gkdv_log_step(&field.x, y_in, field.a, field.b, eps);
            let dev = gx
                .iter()
                .zip(&trop_x)
                .chain(gy.iter().zip(&trop_y))
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            UdLimitEntry { epsilon: eps, max_deviation: dev }
        })
        .collect();
    let strictly_decreasing = entries.windows(2).all(|w| w[1].max_deviation < w[0].max_deviation);
    Ok(UdLimitReport { entries, strictly_decreasing })
}

/// `U = X + A`, `V = Y + B`.
pub fn shift_to_uv(field: &UdField) -> (Vec<f64>, Vec<f64>) {
    (
        field.x.iter().map(|x| x + field.a).collect(),
        field.y.iter().map(|y| y + field.b).collect(),
    )
}

/// `A = -eps ln alpha`, `B = -eps ln beta`.
pub fn ud_parameters(params: &SystemParams, eps: f64) -> (f64, f64) {
    (-eps * params.alpha().to_f64().ln(), -eps * params.beta().to_f64().ln())
}

/// Ordering of box capacity against carrier capacity implied by
/// `(alpha, beta)`: `beta > alpha` iff `C_B > C_C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CapacityOrdering {
    #[serde(rename = "B_gt_C")]
    BoxGreater,
    #[serde(rename = "B_eq_C")]
    Equal,
    #[serde(rename = "B_lt_C")]
    CarrierGreater,
}

pub fn param_correspondence(alpha: f64, beta: f64) -> Result<CapacityOrdering, BoxBallError> {
    for v in [alpha, beta] {
        if !(v > 0.0 && v < 1.0) {
            return Err(BoxBallError::ParamOutOfRange(v.to_string()));
        }
    }
    Ok(match beta.partial_cmp(&alpha).expect("finite") {
        Ordering::Greater => CapacityOrdering::BoxGreater,
        Ordering::Equal => CapacityOrdering::Equal,
        Ordering::Less => CapacityOrdering::CarrierGreater,
    })
}
