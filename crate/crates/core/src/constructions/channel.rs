use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{CovarianceMatrix, JointProcessModel};

/// Linear-Gaussian block channel `y = C x + v` on a block of `n` samples.
///
/// `C` is lower triangular (row `i` only reads columns `<= i`), so the pair
/// built from it is causal within the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockChannelFile", into = "BlockChannelFile")]
pub struct BlockChannel {
    n: usize,
    gain: DMatrix<f64>,
    noise_cov: CovarianceMatrix,
}

#[derive(Serialize, Deserialize)]
struct BlockChannelFile {
    n: usize,
    gain: Vec<Vec<f64>>,
    noise_cov: Vec<Vec<f64>>,
}

fn rows_to_matrix(n: usize, rows: Vec<Vec<f64>>, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("{what} must be {n}x{n}")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl TryFrom<BlockChannelFile> for BlockChannel {
    type Error = Error;
    fn try_from(f: BlockChannelFile) -> Result<Self> {
        let gain = rows_to_matrix(f.n, f.gain, "gain")?;
        let noise = rows_to_matrix(f.n, f.noise_cov, "noise_cov")?;
        BlockChannel::new(gain, CovarianceMatrix::new(noise)?)
    }
}

impl From<BlockChannel> for BlockChannelFile {
    fn from(c: BlockChannel) -> Self {
        BlockChannelFile {
            n: c.n,
            gain: matrix_to_rows(&c.gain),
            noise_cov: matrix_to_rows(c.noise_cov.matrix()),
        }
    }
}

impl BlockChannel {
    pub fn new(gain: DMatrix<f64>, noise_cov: CovarianceMatrix) -> Result<Self> {
        let n = gain.nrows();
        if n == 0 || gain.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "gain must be square and non-empty, got {}x{}",
                n,
                gain.ncols()
            )));
        }
        if noise_cov.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "noise covariance is {0}x{0}, gain is {n}x{n}",
                noise_cov.dim()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if gain[(i, j)] != 0.0 {
                    return Err(Error::NonCausal(format!(
                        "gain[{i}][{j}] = {} reads a future sample",
                        gain[(i, j)]
                    )));
                }
            }
        }
        Ok(BlockChannel { n, gain, noise_cov })
    }

    /// `y = x + v` with white noise of variance `noise_var`.
    pub fn additive(n: usize, noise_var: f64) -> Result<Self> {
        Self::new(
            DMatrix::identity(n, n),
            CovarianceMatrix::new(DMatrix::identity(n, n) * noise_var)?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn noise_cov(&self) -> &CovarianceMatrix {
        &self.noise_cov
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionCheck {
    pub average_mse: f64,
    pub target: f64,
    pub feasible: bool,
}

/// Average per-letter squared-error feasibility `(1/n) Σ E[(x(i) - y(i))²] <= D`.
pub fn distortion_check(m: &JointProcessModel, target: f64) -> DistortionCheck {
    let average_mse = m.average_mse();
    DistortionCheck {
        average_mse,
        target,
        feasible: average_mse <= target * (1.0 + 1e-12) + 1e-15,
    }
}
