//! Unitary reduction of a Hermitian matrix to real symmetric tridiagonal form.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Result of `Q† A Q = T`, with `T` real symmetric tridiagonal.
pub(crate) struct Tridiagonalization {
    pub diag: Vec<f64>,
    /// `off[k]` couples `k` and `k + 1`; padded with a trailing zero.
    pub off: Vec<f64>,
    pub q: Option<DMatrix<Complex64>>,
}

/// Householder reflections `H = I - tau v v†` chosen so that `H† x = beta e1`
/// with `beta` real, which leaves a real off-diagonal without a separate
/// phase pass.
pub(crate) fn tridiagonalize(a: &DMatrix<Complex64>, want_q: bool) -> Tridiagonalization {
    let n = a.nrows();
    let mut work = a.clone();
    let mut q = want_q.then(|| DMatrix::<Complex64>::identity(n, n));
    let mut off = vec![0.0; n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let data = work.as_mut_slice();
        let col = k * n;
        let alpha = data[col + k + 1];
        let tail_sq: f64 = data[col + k + 2..col + n].iter().map(|z| z.norm_sqr()).sum();
        if tail_sq == 0.0 && alpha.im == 0.0 {
            off[k] = alpha.re;
            continue;
        }
        let norm = (alpha.norm_sqr() + tail_sq).sqrt();
        let beta = if alpha.re >= 0.0 { -norm } else { norm };
        let tau = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
        let scale = (alpha - beta).inv();
        v[0] = Complex64::new(1.0, 0.0);
        for i in 1..m {
            v[i] = data[col + k + 1 + i] * scale;
        }
        off[k] = beta;

        // Trailing block B <- H† B H as a Hermitian rank-2 update.
        let base = k + 1;
        w[..m].iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for j in 0..m {
            let vj = v[j];
            let column = &data[(base + j) * n + base..(base + j) * n + n];
            for (wi, bij) in w[..m].iter_mut().zip(column) {
                *wi += bij * vj;
            }
        }
        let s: f64 = v[..m].iter().zip(&w[..m]).map(|(vi, wi)| (vi.conj() * wi).re).sum();
        let half = 0.5 * tau.norm_sqr() * s;
        for i in 0..m {
            w[i] = tau * w[i] - v[i] * half;
        }
        for j in 0..m {
            let vj = v[j].conj();
            let uj = w[j].conj();
            let column = &mut data[(base + j) * n + base..(base + j) * n + n];
            for (i, bij) in column.iter_mut().enumerate() {
                *bij -= w[i] * vj + v[i] * uj;
            }
        }

        if let Some(q) = q.as_mut() {
            let qd = q.as_mut_slice();
            let mut r = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..m {
                let vj = v[j];
                let column = &qd[(base + j) * n..(base + j + 1) * n];
                for (ri, qij) in r.iter_mut().zip(column) {
                    *ri += qij * vj;
                }
            }
            for j in 0..m {
                let f = tau * v[j].conj();
                let column = &mut qd[(base + j) * n..(base + j + 1) * n];
                for (qij, ri) in column.iter_mut().zip(&r) {
                    *qij -= ri * f;
                }
            }
        }
    }

    let diag = (0..n).map(|i| work[(i, i)].re).collect();
    if n > 0 {
        off[n - 1] = 0.0;
    }
    Tridiagonalization { diag, off, q }
}
