//! Low-rank factorization of an embedding matrix `E ≈ F · P`.
//!
//! `P` (`d′ × D`) holds the top right singular vectors of `E` as orthonormal
//! rows ("primitive embeddings"); `F = E · Pᵀ` (`|V| × d′`) holds the
//! per-token coordinates, which absorbs the singular values. The singular
//! vectors come from the eigen-decomposition of the `f64` Gram matrix `EᵀE`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::par;

/// Sign convention applied to every singular vector: its largest-magnitude
/// entry is positive, ties resolved in favour of the earliest index.
pub const SIGN_CONVENTION: &str = "max-abs-positive";

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedEmbedding {
    primitives: DenseMatrix,
    coordinates: DenseMatrix,
    singular_values: Vec<f64>,
    identity: bool,
}

impl FactorizedEmbedding {
    /// No factorization: `F = E`, `P = I`.
    pub fn identity(embeddings: DenseMatrix) -> Self {
        let d = embeddings.cols();
        Self {
            primitives: DenseMatrix::identity(d),
            coordinates: embeddings,
            singular_values: Vec::new(),
            identity: true,
        }
    }

    /// Reassembles a factorization from stored matrices.
    pub fn from_parts(primitives: DenseMatrix, coordinates: DenseMatrix, identity: bool) -> Result<Self> {
        if coordinates.cols() != primitives.rows() {
            return Err(Error::ShapeMismatch {
                what: "coordinate columns vs primitive rows",
                expected: primitives.rows(),
                found: coordinates.cols(),
            });
        }
        if primitives.rows() > primitives.cols() {
            return Err(Error::LatentDimOutOfRange {
                d_prime: primitives.rows(),
                max: primitives.cols(),
            });
        }
        if identity && primitives != DenseMatrix::identity(primitives.cols()) {
            return Err(Error::InvalidConfig("identity factorization with non-identity primitives"));
        }
        Ok(Self {
            primitives,
            coordinates,
            singular_values: Vec::new(),
            identity,
        })
    }

    /// `P`, `d′ × D`.
    pub fn primitives(&self) -> &DenseMatrix {
        &self.primitives
    }

    /// `F`, `|V| × d′`.
    pub fn coordinates(&self) -> &DenseMatrix {
        &self.coordinates
    }

    pub fn d_prime(&self) -> usize {
        self.primitives.rows()
    }

    pub fn d_model(&self) -> usize {
        self.primitives.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.coordinates.rows()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// Leading singular values of the factorized matrix (empty in identity
    /// mode or when loaded from storage).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.primitives, self.coordinates)
    }
}

pub fn factorize(embeddings: &DenseMatrix, d_prime: usize) -> Result<FactorizedEmbedding> {
    let rows = embeddings.rows();
    let cols = embeddings.cols();
    let max = rows.min(cols);
    if d_prime == 0 || d_prime > max {
        return Err(Error::LatentDimOutOfRange { d_prime, max });
    }

    let gram = linalg::gram(embeddings, None);
    let eig = linalg::symmetric_eigen(gram, cols).map_err(|e| match e {
        Error::NoConvergence { max_abs, .. } => Error::NoConvergence { rows, cols, max_abs },
        other => other,
    })?;

    let basis: Vec<Vec<f64>> = (0..d_prime)
        .map(|j| {
            let mut v = eig.vector(j);
            apply_sign_convention(&mut v);
            v
        })
        .collect();

    let primitives = DenseMatrix::from_parts(
        d_prime,
        cols,
        basis.iter().flat_map(|v| v.iter().map(|&x| x as f32)).collect(),
    );

    let coords = par::map_range(rows, |r| {
        let row = embeddings.row(r);
        basis
            .iter()
            .map(|v| {
                let mut acc = 0.0f64;
                for (&e, &b) in row.iter().zip(v) {
                    acc += e as f64 * b;
                }
                acc as f32
            })
            .collect::<Vec<f32>>()
    });
    let coordinates = DenseMatrix::from_parts(rows, d_prime, coords.into_iter().flatten().collect());

    let singular_values = eig.values[..d_prime]
        .iter()
        .map(|&l| libm::sqrt(l.max(0.0)))
        .collect();

    Ok(FactorizedEmbedding {
        primitives,
        coordinates,
        singular_values,
        identity: false,
    })
}

fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// `F[rows] · P` (all rows when `rows` is `None`). Identity factorizations
/// return the selected coordinates unchanged.
pub fn reconstruct(fe: &FactorizedEmbedding, rows: Option<&[usize]>) -> Result<DenseMatrix> {
    let selected = match rows {
        Some(rows) => fe.coordinates.select_rows(rows)?,
        None => fe.coordinates.clone(),
    };
    if fe.identity {
        return Ok(selected);
    }
    selected.matmul(&fe.primitives)
}

/// PCA spectrum of an embedding matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumReport {
    /// Singular values of the column-centered matrix, descending;
    /// `min(rows, cols)` entries.
    pub singular_values: Vec<f64>,
    /// Entry `k - 1` is the fraction of total variance captured by the first
    /// `k` components.
    pub explained_variance: Vec<f64>,
    /// Frobenius norm of the centered matrix.
    pub frobenius_norm: f64,
}

pub fn explained_variance(embeddings: &DenseMatrix, max_components: usize) -> Result<SpectrumReport> {
    let rows = embeddings.rows();
    let cols = embeddings.cols();
    if rows < 2 {
        return Err(Error::TooFewRows { required: 2, found: rows });
    }
    let max = (rows - 1).min(cols);
    if max_components > max {
        return Err(Error::TooManyComponents {
            requested: max_components,
            max,
        });
    }

    let mut mean = alloc::vec![0.0f64; cols];
    for row in embeddings.iter_rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v as f64;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }

    let gram = linalg::gram(embeddings, Some(&mean));
    let eig = linalg::symmetric_eigen(gram, cols)?;
    let variances: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = variances.iter().sum();

    let mut explained = Vec::with_capacity(max_components);
    let mut running = 0.0;
    for &v in variances.iter().take(max_components) {
        running += v;
        explained.push(if total > 0.0 { (running / total).min(1.0) } else { 1.0 });
    }

    Ok(SpectrumReport {
        singular_values: variances.iter().take(rows.min(cols)).map(|&v| libm::sqrt(v)).collect(),
        explained_variance: explained,
        frobenius_norm: libm::sqrt(total),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamCount {
    pub embedding_params: u64,
    pub note: String,
}

/// Embedding parameter count: `|V|·D` unfactorized, `|V|·D′ + D′·D` factorized.
/// `D′ = D` counts as unfactorized.
pub fn count_params(vocab_size: u64, d_model: u64, d_prime: Option<u64>) -> ParamCount {
    match d_prime.filter(|&dp| dp != d_model) {
        None => ParamCount {
            embedding_params: vocab_size * d_model,
            note: format!("full: {vocab_size} x {d_model}"),
        },
        Some(dp) => ParamCount {
            embedding_params: vocab_size * dp + dp * d_model,
            note: format!("factorized: {vocab_size} x {dp} + {dp} x {d_model}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn outer_rank2() -> DenseMatrix {
        let a = [1.0f32, -2.0, 0.5, 3.0, 1.5];
        let b = [0.3f32, 1.0, -0.7, 2.0];
        let c = [-1.0f32, 0.5, 2.0, 0.25, 1.0];
        let d = [1.0f32, 0.0, 1.0, -1.0];
        DenseMatrix::from_fn(5, 4, |r, k| a[r] * b[k] + c[r] * d[k]).unwrap()
    }

    #[test]
    fn rank_two_matrix_is_recovered() {
        let e = outer_rank2();
        let fe = factorize(&e, 2).unwrap();
        let err = reconstruct(&fe, None).unwrap().squared_distance(&e).unwrap();
        assert!(err.sqrt() <= 1e-4, "{err}");
    }

    #[test]
    fn latent_dim_bounds() {
        let e = outer_rank2();
        assert_eq!(factorize(&e, 0), Err(Error::LatentDimOutOfRange { d_prime: 0, max: 4 }));
        assert_eq!(factorize(&e, 5), Err(Error::LatentDimOutOfRange { d_prime: 5, max: 4 }));
        assert!(factorize(&e, 4).is_ok());
    }

    #[test]
    fn primitives_are_orthonormal_with_fixed_signs() {
        let e = DenseMatrix::from_fn(12, 6, |r, c| ((r * 7 + c * 3) % 11) as f32 - 5.0 + 0.1 * c as f32)
            .unwrap();
        let fe = factorize(&e, 5).unwrap();
        let p = fe.primitives();
        let ppt = p.matmul(&p.transpose()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ppt.get(i, j) - want).abs() < 1e-4);
            }
            let row = p.row(i);
            let best = row
                .iter()
                .enumerate()
                .fold(0, |b, (k, x)| if x.abs() > row[b].abs() { k } else { b });
            assert!(row[best] > 0.0);
        }
        assert_eq!(factorize(&e, 5).unwrap(), fe);
    }

    #[test]
    fn sign_convention_ties_prefer_earliest() {
        let mut v = vec![0.5, -0.5, 0.1];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![0.5, -0.5, 0.1]);
        let mut v = vec![-0.5, 0.5, 0.1];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![0.5, -0.5, -0.1]);
    }

    #[test]
    fn identity_mode_is_bitwise() {
        let e = DenseMatrix::new(2, 3, vec![-0.0, 1.5, -2.25, 3.0, 0.0, 1e-30]).unwrap();
        let fe = FactorizedEmbedding::identity(e.clone());
        assert_eq!(fe.d_prime(), 3);
        let r = reconstruct(&fe, None).unwrap();
        let bits = |m: &DenseMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&r), bits(&e));
    }

    #[test]
    fn reconstruct_subsets() {
        let e = outer_rank2();
        let fe = factorize(&e, 3).unwrap();
        let empty = reconstruct(&fe, Some(&[])).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 4));
        assert!(matches!(
            reconstruct(&fe, Some(&[9])),
            Err(Error::RowOutOfRange { index: 9, .. })
        ));
        // Single row against a naive dot-product loop.
        let one = reconstruct(&fe, Some(&[3])).unwrap();
        for c in 0..4 {
            let mut want = 0.0f64;
            for k in 0..3 {
                want += fe.coordinates().get(3, k) as f64 * fe.primitives().get(k, c) as f64;
            }
            assert!((one.get(0, c) as f64 - want).abs() < 1e-6);
        }
    }

    #[test]
    fn explained_variance_on_a_line() {
        // Rows on a 1-D line through the mean.
        let e = DenseMatrix::from_fn(6, 3, |r, c| 1.0 + (r as f32 - 2.5) * [1.0, -2.0, 0.5][c]).unwrap();
        let s = explained_variance(&e, 3).unwrap();
        assert!((s.explained_variance[0] - 1.0).abs() < 1e-6);
        assert!(s.explained_variance.iter().all(|&v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn explained_variance_errors() {
        let one = DenseMatrix::zeros(1, 3);
        assert_eq!(explained_variance(&one, 1), Err(Error::TooFewRows { required: 2, found: 1 }));
        let e = DenseMatrix::zeros(3, 5);
        assert_eq!(explained_variance(&e, 3), Err(Error::TooManyComponents { requested: 3, max: 2 }));
        // Constant rows carry no variance.
        let s = explained_variance(&e, 2).unwrap();
        assert_eq!(s.explained_variance, vec![1.0, 1.0]);
    }

    #[test]
    fn param_counts() {
        assert_eq!(count_params(10, 4, Some(2)).embedding_params, 28);
        assert_eq!(count_params(401_000, 768, Some(100)).embedding_params, 40_176_800);
        assert_eq!(count_params(401_000, 768, None).embedding_params, 307_968_000);
        assert_eq!(count_params(401_000, 768, Some(768)).embedding_params, 307_968_000);
    }
}
