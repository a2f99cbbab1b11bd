//! Time stepping for the generalized discrete KdV system and its relatives.
//!
//! All lattice maps are left-to-right sweeps: the auxiliary variable `y`
//! enters at the left window edge `n_lo` and each site produces
//! `(x_n^{t+1}, y_{n+1}^t)` from `(x_n^t, y_n^t)`. Every map here conserves
//! the product `x_n^{t+1} * y_{n+1}^t = x_n^t * y_n^t` exactly.

use std::io::{self, Write};

use crate::error::LatticeError;
use crate::rational::Rat;

/// Deviation of `x` at the right edge above which a soliton is considered
/// to have left the window.
pub const ESCAPE_THRESHOLD: f64 = 1e-6;

/// Parameters `(alpha, beta)` of the generalized equation with the cached
/// `Delta = 1 - alpha - beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    alpha: Rat,
    beta: Rat,
    delta_cap: Rat,
}

impl SystemParams {
    pub fn new(alpha: Rat, beta: Rat) -> Result<Self, LatticeError> {
        for (name, value) in [("alpha", &alpha), ("beta", &beta)] {
            if !value.is_positive() || *value >= Rat::one() {
                return Err(LatticeError::ParamOutOfRange { name, value: value.to_string() });
            }
        }
        let delta_cap = Rat::one() - &alpha - &beta;
        Ok(SystemParams { alpha, beta, delta_cap })
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    /// `Delta = 1 - alpha - beta`.
    pub fn delta_cap(&self) -> &Rat {
        &self.delta_cap
    }

    /// Right end `alpha + beta - 1` of the admissible soliton interval.
    pub fn p_max(&self) -> Rat {
        -&self.delta_cap
    }
}

/// The state entering a sweep: `x^t` on the window plus the incoming
/// `y_{n_lo}^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub n_lo: i64,
    pub x: Vec<Rat>,
    pub y_in: Rat,
}

impl Slice {
    pub fn vacuum(n_lo: i64, n_hi: i64) -> Result<Self, LatticeError> {
        if n_hi < n_lo {
            return Err(LatticeError::WindowTooSmall);
        }
        Ok(Slice { n_lo, x: vec![Rat::one(); (n_hi - n_lo + 1) as usize], y_in: Rat::one() })
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.x.len() as i64 - 1
    }
}

/// Result of one sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutput {
    /// `y_n^t` for `n = n_lo ..= n_hi + 1`; the last entry lies outside the
    /// window and is dropped by [`StepOutput::into_next`].
    pub y: Vec<Rat>,
    /// `x_n^{t+1}` for `n = n_lo ..= n_hi`.
    pub x_next: Vec<Rat>,
}

impl StepOutput {
    /// Next slice with the boundary convention `y_{n_lo}^{t+1} = 1`.
    pub fn into_next(self, n_lo: i64) -> Slice {
        Slice { n_lo, x: self.x_next, y_in: Rat::one() }
    }
}

fn sweep(
    slice: &Slice,
    mut site: impl FnMut(i64, &Rat, &Rat) -> Result<(Rat, Rat), LatticeError>,
) -> Result<StepOutput, LatticeError> {
    if slice.x.is_empty() {
        return Err(LatticeError::WindowTooSmall);
    }
    let mut y = Vec::with_capacity(slice.x.len() + 1);
    let mut x_next = Vec::with_capacity(slice.x.len());
    let mut carry = slice.y_in.clone();
    for (k, x) in slice.x.iter().enumerate() {
        let n = slice.n_lo + k as i64;
        let (xn, yn) = site(n, x, &carry)?;
        x_next.push(xn);
        y.push(std::mem::replace(&mut carry, yn));
    }
    y.push(carry);
    Ok(StepOutput { y, x_next })
}

/// One time step of the generalized discrete KdV equation
///
/// ```text
/// x_n^{t+1}  = ((1-b) + b x y) / ((1-a) + a x y) * y
/// y_{n+1}^t  = ((1-a) + a x y) / ((1-b) + b x y) * x
/// ```
/// with `a = alpha`, `b = beta`, `x = x_n^t`, `y = y_n^t`.
pub fn step_gkdv(slice: &Slice, params: &SystemParams) -> Result<StepOutput, LatticeError> {
    let one_minus_a = Rat::one() - &params.alpha;
    let one_minus_b = Rat::one() - &params.beta;
    sweep(slice, |n, x, y| {
        let xy = x * y;
        let num = &one_minus_b + &params.beta * &xy;
        let den = &one_minus_a + &params.alpha * &xy;
        if num.is_zero() || den.is_zero() {
            return Err(LatticeError::ZeroDenominator(n));
        }
        let ratio = num.checked_div(&den)?;
        let y_next = x * ratio.recip()?;
        Ok((ratio * y, y_next))
    })
}

/// One time step of the coupled discrete KdV equation
///
/// ```text
/// x_n^{t+1} = (1 + d) y / (1 + d x y)
/// y_{n+1}^t = (1 + d x y) x / (1 + d)
/// ```
pub fn step_dkdv(slice: &Slice, delta: &Rat) -> Result<StepOutput, LatticeError> {
    let one_plus_d = Rat::one() + delta;
    if one_plus_d.is_zero() {
        return Err(LatticeError::ZeroDenominator(slice.n_lo));
    }
    sweep(slice, |n, x, y| {
        let den = Rat::one() + delta * x * y;
        if den.is_zero() {
            return Err(LatticeError::ZeroDenominator(n));
        }
        let x_next = (&one_plus_d * y).checked_div(&den)?;
        let y_next = (den * x).checked_div(&one_plus_d)?;
        Ok((x_next, y_next))
    })
}

/// Single-site Yang–Baxter map `R(b, a)`:
/// `u' = (1 + b u v) v / (1 + a u v)`, `v' = (1 + a u v) u / (1 + b u v)`.
pub fn yb_map(u: &Rat, v: &Rat, a: &Rat, b: &Rat) -> Result<(Rat, Rat), LatticeError> {
    let uv = u * v;
    let pa = Rat::one() + a * &uv;
    let pb = Rat::one() + b * &uv;
    if pa.is_zero() || pb.is_zero() {
        return Err(LatticeError::ZeroDenominator(0));
    }
    let u_next = (&pb * v).checked_div(&pa)?;
    let v_next = (pa * u).checked_div(&pb)?;
    Ok((u_next, v_next))
}

/// Variables and parameters of the Yang–Baxter form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YbVariables {
    pub u: Rat,
    pub v: Rat,
    pub a: Rat,
    pub b: Rat,
}

/// `u = x/(1-beta)`, `v = y/(1-alpha)`, `a = alpha(1-beta)`, `b = beta(1-alpha)`.
pub fn scale_to_yb(x: &Rat, y: &Rat, params: &SystemParams) -> YbVariables {
    let one_minus_a = Rat::one() - &params.alpha;
    let one_minus_b = Rat::one() - &params.beta;
    // SystemParams guarantees alpha, beta < 1.
    YbVariables {
        u: x.checked_div(&one_minus_b).expect("beta < 1"),
        v: y.checked_div(&one_minus_a).expect("alpha < 1"),
        a: &params.alpha * &one_minus_b,
        b: &params.beta * &one_minus_a,
    }
}

/// Per-`a` discrepancy between the Yang–Baxter step and the discrete KdV
/// step, measured in the `(zeta, xi)` frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainEntry {
    pub a: f64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub entries: Vec<ChainEntry>,
    /// True when the discrepancies decrease strictly with growing `a`
    /// (or are all zero).
    pub monotone: bool,
}

/// Checks that the Yang–Baxter map approaches the discrete KdV map as
/// `a -> infinity`.
///
/// `(zeta, xi)` is held fixed in the discrete KdV frame; for each `a` the
/// Yang–Baxter inputs are `u = zeta / sqrt(a(b+1))`, `v = xi / sqrt(a b^2/(b+1))`.
/// One Yang–Baxter step is mapped back to the `(zeta, xi)` frame and compared
/// to one discrete KdV step with `delta = 1/b`.
pub fn limit_chain_check(
    zeta: f64,
    xi: f64,
    a_values: &[f64],
    b: f64,
) -> Result<ChainReport, LatticeError> {
    if b.is_nan() || b <= 0.0 {
        return Err(LatticeError::NonPositiveParameter("b"));
    }
    if a_values.iter().any(|&a| a.is_nan() || a <= 0.0) {
        return Err(LatticeError::NonPositiveParameter("a"));
    }
    let delta = 1.0 / b;
    let zk = 1.0 + delta * zeta * xi;
    let z_ref = (1.0 + delta) * xi / zk;
    let x_ref = zk * zeta / (1.0 + delta);

    let mut entries = Vec::with_capacity(a_values.len());
    for &a in a_values {
        let su = (a * (b + 1.0)).sqrt();
        let sv = (a * b * b / (b + 1.0)).sqrt();
        let (u, v) = (zeta / su, xi / sv);
        let uv = u * v;
        let (pa, pb) = (1.0 + a * uv, 1.0 + b * uv);
        let u_next = pb * v / pa;
        let v_next = pa * u / pb;
        let discrepancy = (su * u_next - z_ref).abs().max((sv * v_next - x_ref).abs());
        entries.push(ChainEntry { a, discrepancy });
    }
    let all_zero = entries.iter().all(|e| e.discrepancy == 0.0);
    let monotone = all_zero
        || entries.windows(2).all(|w| w[1].a > w[0].a && w[1].discrepancy < w[0].discrepancy);
    Ok(ChainReport { entries, monotone })
}

/// One stored time row: `x_n^t` and the swept `y_n^t` on the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldRow {
    pub x: Vec<Rat>,
    pub y: Vec<Rat>,
}

/// Exact lattice history on `[n_lo, n_hi] x [t0, t0 + rows.len())`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeField {
    pub n_lo: i64,
    pub n_hi: i64,
    pub t0: i64,
    pub rows: Vec<FieldRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldWarning {
    SolitonEscapedWindow { t: i64, deviation: f64 },
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub field: LatticeField,
    pub warnings: Vec<FieldWarning>,
}

/// Float snapshot of the `x` component, row per time.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatField {
    pub n_lo: i64,
    pub t0: i64,
    pub rows: Vec<Vec<f64>>,
}

impl FloatField {
    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.rows.first().map_or(0, |r| r.len() as i64) - 1
    }
}

impl LatticeField {
    pub fn width(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn to_float_x(&self) -> FloatField {
        FloatField {
            n_lo: self.n_lo,
            t0: self.t0,
            rows: self.rows.iter().map(|r| r.x.iter().map(Rat::to_f64).collect()).collect(),
        }
    }

    /// CSV with header `n,t,x,y`. `precision = None` writes exact `p/q`
    /// values, otherwise decimals with that many significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W, precision: Option<usize>) -> io::Result<()> {
        writeln!(out, "n,t,x,y")?;
        for (k, row) in self.rows.iter().enumerate() {
            let t = self.t0 + k as i64;
            for (j, (x, y)) in row.x.iter().zip(&row.y).enumerate() {
                let n = self.n_lo + j as i64;
                match precision {
                    None => writeln!(out, "{n},{t},{x},{y}")?,
                    Some(p) => writeln!(
                        out,
                        "{n},{t},{},{}",
                        format_significant(x.to_f64(), p),
                        format_significant(y.to_f64(), p)
                    )?,
                }
            }
        }
        Ok(())
    }
}

/// Evolves `x0` (with `x0[0] = 1`) for `steps` time steps under the
/// boundary convention `x = y = 1` at `n_lo`. The returned field holds
/// `steps` fully swept rows.
pub fn evolve_gkdv(
    x0: Vec<Rat>,
    n_lo: i64,
    t0: i64,
    steps: usize,
    params: &SystemParams,
) -> Result<Evolution, LatticeError> {
    let first = x0.first().ok_or(LatticeError::WindowTooSmall)?;
    if !first.is_one() {
        return Err(LatticeError::BoundaryNotOne(first.to_string()));
    }
    let n_hi = n_lo + x0.len() as i64 - 1;
    let mut slice = Slice { n_lo, x: x0, y_in: Rat::one() };
    let mut rows = Vec::with_capacity(steps);
    let mut warnings = Vec::new();
    for k in 0..steps {
        let t = t0 + k as i64;
        let deviation = (slice.x.last().expect("non-empty").to_f64() - 1.0).abs();
        if deviation > ESCAPE_THRESHOLD {
            warnings.push(FieldWarning::SolitonEscapedWindow { t, deviation });
        }
        let mut out = step_gkdv(&slice, params)?;
        out.y.pop();
        if let Some(j) = slice.x.iter().zip(&out.y).position(|(x, y)| x.is_zero() || y.is_zero()) {
            return Err(LatticeError::ZeroField(n_lo + j as i64));
        }
        let x = std::mem::take(&mut slice.x);
        slice = Slice { n_lo, x: std::mem::take(&mut out.x_next), y_in: Rat::one() };
        rows.push(FieldRow { x, y: out.y });
    }
    Ok(Evolution { field: LatticeField { n_lo, n_hi, t0, rows }, warnings })
}

/// Formats `v` with `sig` significant digits, fixed notation for moderate
/// exponents and scientific otherwise.
pub fn format_significant(v: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if exp < -5 || exp >= sig as i32 {
        return format!("{:.*e}", sig - 1, v);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
