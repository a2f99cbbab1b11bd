//! Exact-arithmetic toolkit for the generalized discrete KdV equation.
//!
//! * [`rational`] and [`matrix`]: exact rationals and fraction-free
//!   determinants.
//! * [`lattice`]: the lattice map, its coupled and Yang–Baxter forms.
//! * [`soliton`]: determinant N-soliton solutions, closed-form velocity and
//!   amplitude laws, and the four-component KP tau function.
//! * [`boxball`]: the box-ball system with carrier and its tropical origin.
//! * [`measure`]: trough and cluster tracking on simulated histories.
//! * [`cli`]: the `soliton-lab` command line.

pub mod boxball;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod measure;
pub mod rational;
pub mod soliton;

pub use error::{BoxBallError, LatticeError, MeasureError, NumericsError, SolitonError};
pub use lattice::SystemParams;
pub use matrix::RatMatrix;
pub use rational::Rat;
pub use soliton::{Soliton, SolitonSpec};
