//! Random inputs with known structure.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::Matrix;

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    (0..rows).map(|_| (0..cols).map(|_| normal(rng)).collect()).collect()
}

/// Applies the reflection `I - 2 v vᵀ / vᵀv` to `x` in place.
fn reflect(v: &[f64], x: &mut [f64]) {
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let vx: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * vx / vv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// `n × k` matrix with orthonormal columns, built as the leading columns of
/// a product of random Householder reflections. With `centered`, every
/// column is also orthogonal to the all-ones vector.
pub fn orthonormal_columns<R: Rng>(rng: &mut R, n: usize, k: usize, centered: bool) -> Matrix {
    let offset = usize::from(centered);
    assert!(k + offset <= n, "not enough room for {k} columns in dimension {n}");
    let mut reflections: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
            if centered {
                // Fix e0 so it can be mapped onto the ones direction last.
                v[0] = 0.0;
            }
            v
        })
        .collect();
    if centered {
        let mut v = vec![-1.0 / (n as f64).sqrt(); n];
        v[0] += 1.0;
        if v.iter().any(|x| *x != 0.0) {
            reflections.insert(0, v);
        }
    }

    let mut out = vec![vec![0.0; k]; n];
    for j in 0..k {
        let mut col = vec![0.0; n];
        col[j + offset] = 1.0;
        for v in reflections.iter().rev() {
            reflect(v, &mut col);
        }
        for (row, x) in out.iter_mut().zip(col) {
            row[j] = x;
        }
    }
    out
}

/// `U diag(sigma) Vᵀ` with random orthonormal `U` (`rows × r`) and `V`
/// (`cols × r`), `r = sigma.len()`. With `centered`, the columns of the
/// result have zero mean.
pub fn planted<R: Rng>(rng: &mut R, rows: usize, cols: usize, sigma: &[f64], centered: bool) -> Matrix {
    let r = sigma.len();
    let u = orthonormal_columns(rng, rows, r, centered);
    let v = orthonormal_columns(rng, cols, r, false);
    let vs: Vec<Vec<f64>> = v.iter().map(|row| row.iter().zip(sigma).map(|(a, s)| a * s).collect()).collect();
    u.iter()
        .map(|urow| {
            vs.iter()
                .map(|vrow| urow.iter().zip(vrow).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

/// A random transplant problem in plain `f64` form. Vectors and coordinates
/// are exactly representable as `f32`.
#[derive(Debug, Clone)]
pub struct TransplantInstance {
    pub src: Vec<String>,
    pub tgt: Vec<String>,
    pub source_coords: Matrix,
    pub source_vectors: Matrix,
    pub source_covered: Vec<bool>,
    pub target_vectors: Matrix,
    pub target_covered: Vec<bool>,
}

fn f32_row<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| (normal(rng) * scale) as f32 as f64).collect()
}

/// Up to `max_vocab` tokens per side, word-vector dimension in
/// `min_word_dim..=max_dim`, latent dimension in `1..=max_dim`. Roughly a third of target tokens are shared with the source
/// and a quarter of rows on each side are uncovered; a few covered rows are
/// zero vectors.
pub fn transplant_instance<R: Rng>(
    rng: &mut R,
    max_vocab: usize,
    min_word_dim: usize,
    max_dim: usize,
) -> TransplantInstance {
    let n_src = rng.random_range(2..=max_vocab);
    let n_tgt = rng.random_range(1..=max_vocab);
    let d_w = rng.random_range(min_word_dim..=max_dim);
    let d_prime = rng.random_range(1..=max_dim);

    let src: Vec<String> = (0..n_src).map(|i| format!("s{i}")).collect();
    let mut tgt = Vec::with_capacity(n_tgt);
    let mut used = std::collections::HashSet::new();
    for i in 0..n_tgt {
        let token = if rng.random_bool(0.35) {
            format!("s{}", rng.random_range(0..n_src))
        } else {
            format!("t{i}")
        };
        if used.insert(token.clone()) {
            tgt.push(token);
        }
    }

    let mut side = |n: usize| {
        let mut vectors = Vec::with_capacity(n);
        let mut covered = Vec::with_capacity(n);
        for _ in 0..n {
            let c = rng.random_bool(0.75);
            covered.push(c);
            if c && !rng.random_bool(0.05) {
                vectors.push(f32_row(rng, d_w, 1.0));
            } else {
                vectors.push(vec![0.0; d_w]);
            }
        }
        (vectors, covered)
    };
    let (source_vectors, source_covered) = side(n_src);
    let (target_vectors, target_covered) = side(tgt.len());
    let source_coords = (0..n_src).map(|_| f32_row(rng, d_prime, 1.0)).collect();

    TransplantInstance {
        src,
        tgt,
        source_coords,
        source_vectors,
        source_covered,
        target_vectors,
        target_covered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn gram_of_columns(m: &Matrix) -> Matrix {
        let k = m[0].len();
        (0..k)
            .map(|a| (0..k).map(|b| m.iter().map(|r| r[a] * r[b]).sum()).collect())
            .collect()
    }

    #[test]
    fn columns_are_orthonormal_and_centered() {
        let mut rng = StdRng::seed_from_u64(1);
        for centered in [false, true] {
            let q = orthonormal_columns(&mut rng, 9, 5, centered);
            let g = gram_of_columns(&q);
            for (a, row) in g.iter().enumerate() {
                for (b, x) in row.iter().enumerate() {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((x - want).abs() < 1e-12);
                }
            }
            if centered {
                for j in 0..5 {
                    let s: f64 = q.iter().map(|r| r[j]).sum();
                    assert!(s.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn planted_matrix_has_the_planted_spectrum() {
        let mut rng = StdRng::seed_from_u64(2);
        let a = planted(&mut rng, 12, 6, &[5.0, 2.0, 0.5], true);
        let sv = crate::jacobi_singular_values(&a);
        for (got, want) in sv.iter().zip([5.0, 2.0, 0.5, 0.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }
}
