//! Dense `f64` kernels behind the factorizer: Gram matrices and the
//! symmetric eigenproblem (Householder tridiagonalization followed by the
//! implicit QL method).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::par;

const GRAM_BLOCK_ROWS: usize = 256;
const GRAM_WAVE: usize = 16;
const MAX_QL_ITERATIONS: usize = 64;

/// `XᵀX` for `X = m - 1·centerᵀ`, row-major `cols × cols`.
///
/// Rows are split into fixed-size blocks; block partials are summed in block
/// order, so the result is the same for any number of threads.
pub fn gram(m: &DenseMatrix, center: Option<&[f64]>) -> Vec<f64> {
    let n = m.cols();
    let rows = m.rows();
    let n_blocks = rows.div_ceil(GRAM_BLOCK_ROWS);
    let mut total = vec![0.0f64; n * n];

    let mut first = 0;
    while first < n_blocks {
        let wave = GRAM_WAVE.min(n_blocks - first);
        let partials = par::map_range(wave, |b| {
            let start = (first + b) * GRAM_BLOCK_ROWS;
            let end = (start + GRAM_BLOCK_ROWS).min(rows);
            let mut g = vec![0.0f64; n * n];
            let mut x = vec![0.0f64; n];
            for r in start..end {
                for (j, (dst, &v)) in x.iter_mut().zip(m.row(r)).enumerate() {
                    *dst = v as f64 - center.map_or(0.0, |c| c[j]);
                }
                for a in 0..n {
                    let xa = x[a];
                    let out = &mut g[a * n + a..a * n + n];
                    for (o, &xb) in out.iter_mut().zip(&x[a..]) {
                        *o += xa * xb;
                    }
                }
            }
            g
        });
        for g in partials {
            for (t, v) in total.iter_mut().zip(g) {
                *t += v;
            }
        }
        first += wave;
    }

    for a in 0..n {
        for b in 0..a {
            total[a * n + b] = total[b * n + a];
        }
    }
    total
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the unit eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.vectors[k * self.n + j]).collect()
    }
}

/// Decomposes the symmetric `n × n` row-major matrix `a`. Only symmetry of
/// the input is assumed; the lower triangle is read.
pub fn symmetric_eigen(a: Vec<f64>, n: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), n * n, "symmetric_eigen: buffer is not n×n");
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: Vec::new(),
            n,
        });
    }
    let max_abs = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut v = a;
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tridiagonalize(&mut v, &mut d, &mut e, n);
    if !implicit_ql(&mut v, &mut d, &mut e, n) {
        return Err(Error::NoConvergence {
            rows: n,
            cols: n,
            max_abs,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep the solver's order.
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0f64; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + dst] = v[k * n + src];
        }
    }
    Ok(SymmetricEigen { values, vectors, n })
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal and `v` the accumulated transform.
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal matrix. Returns `false` when an
/// eigenvalue fails to converge.
fn implicit_ql(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> bool {
    let at = |r: usize, c: usize| r * n + c;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] is zero, so m < n always holds here.
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return false;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk = &mut v[at(k, i)..at(k, i) + 2];
                        let h = vk[1];
                        vk[1] = s * vk[0] + c * h;
                        vk[0] = c * vk[0] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    true
}
