//! Real symmetric tridiagonal eigenproblems via implicit-shift QL.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, Scalar};

use crate::error::{Result, SpreadError};

const MAX_SWEEPS: usize = 60;

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymmetricTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(SpreadError::invalid("diag", "tridiagonal matrix must be non-empty"));
        }
        if off.len() + 1 != diag.len() {
            return Err(SpreadError::DimensionMismatch {
                expected: diag.len() - 1,
                found: off.len(),
            });
        }
        if diag.iter().chain(off.iter()).any(|x| !x.is_finite()) {
            return Err(SpreadError::invalid("tridiagonal", "entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (mut d, mut e) = self.work_arrays();
        ql_implicit::<f64>(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvalues (ascending) with orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.dim();
        let (mut d, mut e) = self.work_arrays();
        let mut z = DMatrix::<f64>::identity(n, n);
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        Ok(sort_pairs(d, z))
    }

    fn work_arrays(&self) -> (Vec<f64>, Vec<f64>) {
        let mut e = self.off.clone();
        e.push(0.0);
        (self.diag.clone(), e)
    }
}

/// Sorts eigenvalues ascending and permutes the eigenvector columns to match.
pub(crate) fn sort_pairs<T: Scalar + Copy>(d: Vec<f64>, z: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(z.nrows(), z.ncols(), |r, c| z[(r, order[c])]);
    (values, vectors)
}

/// Implicit-shift QL iteration on `(d, e)`, with `e[i]` coupling `i` and
/// `i + 1` and `e[n - 1]` unused. On return `d` holds the (unsorted)
/// eigenvalues. Rotations are accumulated into the columns of `z`, which
/// should hold the transformation that produced the tridiagonal form.
pub(crate) fn ql_implicit<T>(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<T>>) -> Result<()>
where
    T: Scalar + Copy + Mul<f64, Output = T> + Add<Output = T> + Sub<Output = T>,
{
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(SpreadError::NoConvergence { iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    rotate_columns(z, i, c, s);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn rotate_columns<T>(z: &mut DMatrix<T>, i: usize, c: f64, s: f64)
where
    T: Scalar + Copy + Mul<f64, Output = T> + Add<Output = T> + Sub<Output = T>,
{
    let rows = z.nrows();
    let data = z.as_mut_slice();
    let (left, right) = data.split_at_mut((i + 1) * rows);
    let col_i = &mut left[i * rows..];
    let col_next = &mut right[..rows];
    for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
        let f = *zn;
        *zn = *zi * s + f * c;
        *zi = *zi * c - f * s;
    }
}
