//! Square rational matrices and exact determinants.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::NumericsError;
use crate::rational::{common_denominator, Rat};

/// Dense square matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    order: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, NumericsError> {
        let order = rows.len();
        let mut entries = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(NumericsError::NotSquare { rows: order, len: row.len() });
            }
            entries.extend(row);
        }
        Ok(RatMatrix { order, entries })
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(f(i, j));
            }
        }
        RatMatrix { order, entries }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == j { Rat::one() } else { Rat::zero() })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    ///
    /// Each row is first scaled by the lcm of its denominators so the
    /// elimination runs over integers; every Bareiss division is exact.
    /// The empty matrix has determinant 1.
    pub fn det(&self) -> Rat {
        let n = self.order;
        if n == 0 {
            return Rat::one();
        }
        let mut scale = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.row(i);
            let lcm = common_denominator(row);
            a.push(
                row.iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect(),
            );
            scale *= lcm;
        }

        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        negate = !negate;
                    }
                    None => return Rat::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }

        let mut det = a[n - 1][n - 1].clone();
        if negate {
            det = -det;
        }
        Rat::from_bigints(det, scale).expect("row scale is a product of nonzero denominators")
    }
}
