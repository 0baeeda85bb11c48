//! Dense complex linear algebra used by the Schmidt analysis.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thin singular value decomposition `A = U·diag(s)·V†` of a row-major
/// `m × n` matrix. `u` is `m × r` and `v` is `n × r` (both row-major,
/// `r = min(m, n)`); singular values are descending.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub s: Vec<f64>,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl ThinSvd {
    pub fn u(&self, i: usize, j: usize) -> Complex64 {
        self.u[i * self.rank + j]
    }

    pub fn v(&self, i: usize, j: usize) -> Complex64 {
        self.v[i * self.rank + j]
    }
}

pub fn thin_svd(a: &[Complex64], rows: usize, cols: usize) -> Result<ThinSvd> {
    assert_eq!(
        a.len(),
        rows * cols,
        "matrix storage does not match its shape"
    );
    let m = Mat::<Complex64>::from_fn(rows, cols, |i, j| a[i * cols + j]);
    // faer runs sequentially unless its rayon feature is enabled, so the
    // result does not depend on the thread count.
    let svd = m.thin_svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let rank = rows.min(cols);
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    Ok(ThinSvd {
        rows,
        cols,
        rank,
        s: (0..rank).map(|j| s[j].re).collect(),
        u: (0..rows)
            .flat_map(|i| (0..rank).map(move |j| u[(i, j)]))
            .collect(),
        v: (0..cols)
            .flat_map(|i| (0..rank).map(move |j| v[(i, j)]))
            .collect(),
    })
}

/// Eigenvalues (descending) of a row-major Hermitian matrix by cyclic
/// complex Jacobi rotations. Intended for modest sizes.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(h.len(), n * n, "matrix storage does not match its shape");
    let mut a = h.to_vec();
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for i in 0..n {
        for j in 0..n {
            if (a[i * n + j] - a[j * n + i].conj()).norm() > 1e-12 * scale {
                return Err(Error::Linalg("matrix is not Hermitian".into()));
            }
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Remove the phase of a_pq, then a real symmetric rotation.
                let phase = apq / mag;
                let (app, aqq) = (a[p * n + p].re, a[q * n + q].re);
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                // Columns: new_p = c·col_p − s·conj(phase)·col_q ... applied as G† A G.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * phase.conj() * akq;
                    a[k * n + q] = s * phase * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * phase * aqk;
                    a[q * n + k] = s * phase.conj() * apk + c * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Err(Error::Linalg("Jacobi iteration did not converge".into()))
}
