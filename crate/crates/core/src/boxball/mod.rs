//! Box-ball system with a carrier.
//!
//! A carrier of capacity `C_C` sweeps from the far left to the right once
//! per time step. At box `n` it simultaneously picks up and drops off
//! balls:
//!
//! ```text
//! U_n^{t+1} = min(C_B - U_n^t, V_n) + max(0, U_n^t + V_n - C_C)
//! V_{n+1}   = U_n^t + V_n - U_n^{t+1}
//! ```
//!
//! An infinite carrier gives the plain box-ball system.

mod ultradiscrete;

pub use ultradiscrete::{
    param_correspondence, shift_to_uv, tropical_step, ud_limit_check, ud_parameters,
    CapacityOrdering, UdField, UdLimitEntry, UdLimitReport,
};

use std::fmt;
use std::io::{self, Write};

use crate::error::BoxBallError;

/// Carrier capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Carrier {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Finite(c) => write!(f, "{c}"),
            Carrier::Infinite => write!(f, "inf"),
        }
    }
}

/// Box occupancies `u_0, u_1, ...` (empty beyond the stored range).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbscState {
    pub u: Vec<u32>,
    pub c_box: u32,
    pub c_carrier: Carrier,
}

impl BbscState {
    pub fn new(u: Vec<u32>, c_box: u32, c_carrier: Carrier) -> Result<Self, BoxBallError> {
        let state = BbscState { u, c_box, c_carrier };
        state.check()?;
        Ok(state)
    }

    /// Parses a digit string such as `"300010"`; `.` counts as 0.
    pub fn from_digits(text: &str, c_box: u32, c_carrier: Carrier) -> Result<Self, BoxBallError> {
        let u = text
            .chars()
            .enumerate()
            .map(|(site, ch)| match ch {
                '.' => Ok(0),
                _ => ch.to_digit(10).ok_or(BoxBallError::CapacityViolation {
                    site,
                    value: -1,
                    capacity: c_box,
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(u, c_box, c_carrier)
    }

    fn check(&self) -> Result<(), BoxBallError> {
        if self.c_box == 0 || self.c_carrier == Carrier::Finite(0) {
            return Err(BoxBallError::ZeroCapacity);
        }
        if let Some(site) = self.u.iter().position(|&v| v > self.c_box) {
            return Err(BoxBallError::CapacityViolation {
                site,
                value: self.u[site] as i64,
                capacity: self.c_box,
            });
        }
        Ok(())
    }

    pub fn ball_count(&self) -> u64 {
        self.u.iter().map(|&v| v as u64).sum()
    }

    /// Digit rendering: `.` for an empty box, otherwise the occupancy.
    /// `None` when a capacity above 9 makes digits ambiguous.
    pub fn render(&self, width: usize) -> Option<String> {
        if self.c_box > 9 {
            return None;
        }
        let mut line: String = self
            .u
            .iter()
            .map(|&v| if v == 0 { '.' } else { char::from_digit(v, 10).expect("v <= 9") })
            .collect();
        while line.len() < width {
            line.push('.');
        }
        Some(line)
    }
}

/// Outcome of one carrier sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep {
    pub state: BbscState,
    /// Carrier load on arrival at each box, `V_n` for every swept box.
    pub carrier_loads: Vec<u32>,
}

/// One step of the box-ball system with carrier. The returned state grows
/// to the right until the carrier is empty again.
pub fn bbsc_sweep(state: &BbscState) -> Result<Sweep, BoxBallError> {
    state.check()?;
    let c_box = state.c_box;
    let mut next = Vec::with_capacity(state.u.len() + 1);
    let mut loads = Vec::with_capacity(state.u.len() + 1);
    let mut carrier: u32 = 0;
    let mut site = 0;
    while site < state.u.len() || carrier > 0 {
        let u = state.u.get(site).copied().unwrap_or(0);
        let overflow = match state.c_carrier {
            Carrier::Finite(cc) => (u + carrier).saturating_sub(cc),
            Carrier::Infinite => 0,
        };
        let u_next = (c_box - u).min(carrier) + overflow;
        loads.push(carrier);
        carrier = u + carrier - u_next;
        next.push(u_next);
        site += 1;
    }
    Ok(Sweep {
        state: BbscState { u: next, c_box, c_carrier: state.c_carrier },
        carrier_loads: loads,
    })
}

pub fn bbsc_step(state: &BbscState) -> Result<BbscState, BoxBallError> {
    Ok(bbsc_sweep(state)?.state)
}

/// Plain box-ball step; the carrier capacity of `state` is ignored.
pub fn bbs_step(state: &BbscState) -> Result<BbscState, BoxBallError> {
    let unbounded = BbscState { c_carrier: Carrier::Infinite, ..state.clone() };
    let mut next = bbsc_step(&unbounded)?;
    next.c_carrier = state.c_carrier;
    Ok(next)
}

/// `steps + 1` states starting with `initial`.
pub fn simulate(initial: &BbscState, steps: usize) -> Result<Vec<BbscState>, BoxBallError> {
    let mut history = Vec::with_capacity(steps + 1);
    history.push(initial.clone());
    for _ in 0..steps {
        let next = bbsc_step(history.last().expect("non-empty"))?;
        history.push(next);
    }
    Ok(history)
}

/// One line per time step, all padded to the widest state.
pub fn render_history(history: &[BbscState]) -> Option<String> {
    let width = history.iter().map(|s| s.u.len()).max().unwrap_or(0);
    let mut out = String::new();
    for s in history {
        out.push_str(&s.render(width)?);
        out.push('\n');
    }
    Some(out)
}

/// CSV with header `t,n,u`, one row per box up to the widest state.
pub fn write_history_csv<W: Write>(history: &[BbscState], mut out: W) -> io::Result<()> {
    let width = history.iter().map(|s| s.u.len()).max().unwrap_or(0);
    writeln!(out, "t,n,u")?;
    for (t, s) in history.iter().enumerate() {
        for n in 0..width {
            writeln!(out, "{t},{n},{}", s.u.get(n).copied().unwrap_or(0))?;
        }
    }
    Ok(())
}
