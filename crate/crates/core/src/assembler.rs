//! Final target embeddings: either the factorized pair `(F_t, P)` or the
//! full matrix `E_t = F_t · P`.

use crate::error::{Error, Result};
use crate::factorizer::FactorizedEmbedding;
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AssemblyMode {
    #[default]
    Factorized,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssembledMatrices {
    Factorized {
        coordinates: DenseMatrix,
        primitives: DenseMatrix,
    },
    Full {
        embeddings: DenseMatrix,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledEmbedding {
    pub mode: AssemblyMode,
    pub matrices: AssembledMatrices,
    pub vocab_size: usize,
    pub d_model: usize,
    pub d_prime: usize,
}

pub fn assemble(
    target_coords: &DenseMatrix,
    fe: &FactorizedEmbedding,
    mode: AssemblyMode,
) -> Result<AssembledEmbedding> {
    if target_coords.cols() != fe.d_prime() {
        return Err(Error::ShapeMismatch {
            what: "target coordinate columns",
            expected: fe.d_prime(),
            found: target_coords.cols(),
        });
    }
    let matrices = match mode {
        AssemblyMode::Factorized => AssembledMatrices::Factorized {
            coordinates: target_coords.clone(),
            primitives: fe.primitives().clone(),
        },
        AssemblyMode::Full if fe.is_identity() => AssembledMatrices::Full {
            embeddings: target_coords.clone(),
        },
        AssemblyMode::Full => AssembledMatrices::Full {
            embeddings: target_coords.matmul(fe.primitives())?,
        },
    };
    Ok(AssembledEmbedding {
        mode,
        matrices,
        vocab_size: target_coords.rows(),
        d_model: fe.d_model(),
        d_prime: fe.d_prime(),
    })
}
