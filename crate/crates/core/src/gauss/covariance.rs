use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::source::ArSourceModel;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, submatrix};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Symmetric positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovarianceFile", into = "CovarianceFile")]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct CovarianceFile {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<CovarianceFile> for CovarianceMatrix {
    type Error = Error;
    fn try_from(f: CovarianceFile) -> Result<Self> {
        if f.entries.len() != f.dim || f.entries.iter().any(|r| r.len() != f.dim) {
            return Err(Error::InvalidCovariance(format!("entries are not {0}x{0}", f.dim)));
        }
        let flat: Vec<f64> = f.entries.into_iter().flatten().collect();
        CovarianceMatrix::new(DMatrix::from_row_slice(f.dim, f.dim, &flat))
    }
}

impl From<CovarianceMatrix> for CovarianceFile {
    fn from(c: CovarianceMatrix) -> Self {
        let m = c.entries;
        CovarianceFile {
            dim: m.nrows(),
            entries: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl CovarianceMatrix {
    /// Validates symmetry (relative 1e-12) and semidefiniteness
    /// (smallest eigenvalue >= -1e-10 x largest), then stores the exact
    /// symmetric part.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || n != entries.ncols() {
            return Err(Error::InvalidCovariance(format!(
                "expected a non-empty square matrix, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        let scale = max_abs(&entries).max(f64::MIN_POSITIVE);
        let asym = max_abs(&(&entries - entries.transpose()));
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidCovariance(format!("asymmetry {asym:.3e} exceeds tolerance")));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigenvalues();
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if lo < -PSD_TOL * hi.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidCovariance(format!(
                "not positive semidefinite (eigenvalues in [{lo:.3e}, {hi:.3e}])"
            )));
        }
        Ok(CovarianceMatrix { entries: sym })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Principal submatrix on 0-based positions.
    pub fn restrict(&self, positions: &[usize]) -> DMatrix<f64> {
        submatrix(&self.entries, positions, positions)
    }

    pub fn cross(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        submatrix(&self.entries, rows, cols)
    }
}

impl AsRef<CovarianceMatrix> for CovarianceMatrix {
    fn as_ref(&self) -> &CovarianceMatrix {
        self
    }
}

/// Strictly increasing list of 1-based positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidIndexSet("indices are 1-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(format!("not strictly increasing: {indices:?}")));
        }
        Ok(IndexSet(indices))
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Positions `lo..=hi`; empty when `hi < lo`.
    pub fn range(lo: usize, hi: usize) -> Self {
        assert!(lo >= 1, "index sets are 1-based");
        IndexSet((lo..=hi).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|i| other.0.binary_search(i).is_err())
    }

    pub(crate) fn zero_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i - 1).collect()
    }

    pub(crate) fn check_bounds(&self, dim: usize, name: &str) -> Result<()> {
        match self.0.last() {
            Some(&last) if last > dim => Err(Error::InvalidIndexSet(format!(
                "{name}: index {last} out of bounds for dimension {dim}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Finite-horizon jointly Gaussian source/reconstruction pair.
///
/// Layout of `sigma` (1-based positions): the `past` pre-samples
/// `x(-past+1) .. x(0)`, then `x(1) .. x(n)`, then `y(1) .. y(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProcessModel {
    horizon: usize,
    past: usize,
    sigma: CovarianceMatrix,
    label: String,
    source: Option<ArSourceModel>,
}

impl JointProcessModel {
    pub fn new(horizon: usize, sigma: CovarianceMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_past(horizon, 0, sigma, label)
    }

    pub fn with_past(
        horizon: usize,
        past: usize,
        sigma: CovarianceMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidModel("horizon must be >= 1".into()));
        }
        if sigma.dim() != past + 2 * horizon {
            return Err(Error::DimensionMismatch(format!(
                "covariance dimension {} != past {} + 2 x horizon {}",
                sigma.dim(),
                past,
                horizon
            )));
        }
        Ok(JointProcessModel {
            horizon,
            past,
            sigma,
            label: label.into(),
            source: None,
        })
    }

    /// Attaches the declared source and checks that the x-marginal is its
    /// Toeplitz autocovariance (admissibility).
    pub fn with_source(mut self, source: ArSourceModel, tol: f64) -> Result<Self> {
        let m = self.past + self.horizon;
        let kx = source.toeplitz(m);
        let pos: Vec<usize> = (0..m).collect();
        let dev = max_abs(&(self.sigma.restrict(&pos) - kx));
        if dev > tol {
            return Err(Error::InvalidModel(format!(
                "x-marginal deviates from the declared source by {dev:.3e}"
            )));
        }
        self.source = Some(source);
        Ok(self)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn past(&self) -> usize {
        self.past
    }

    pub fn sigma(&self) -> &CovarianceMatrix {
        &self.sigma
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> Option<&ArSourceModel> {
        self.source.as_ref()
    }

    /// Positions of `x(lo..=hi)` for `1 <= lo`, `hi <= n`.
    pub fn xs(&self, lo: usize, hi: usize) -> IndexSet {
        assert!(lo >= 1 && hi <= self.horizon, "x range out of horizon");
        IndexSet::range(self.past + lo, self.past + hi)
    }

    pub fn ys(&self, lo: usize, hi: usize) -> IndexSet {
        assert!(lo >= 1 && hi <= self.horizon, "y range out of horizon");
        let off = self.past + self.horizon;
        IndexSet::range(off + lo, off + hi)
    }

    /// Positions of the pre-samples `x(-past+1) .. x(0)`.
    pub fn past_set(&self) -> IndexSet {
        IndexSet::range(1, self.past)
    }

    /// Covariance of `(x(k..k+len-1), y(k..k+len-1))`.
    pub fn window(&self, k: usize, len: usize) -> Result<CovarianceMatrix> {
        if k == 0 || len == 0 || k + len - 1 > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "window ({k}, {len}) outside horizon {}",
                self.horizon
            )));
        }
        let pos = self.xs(k, k + len - 1).union(&self.ys(k, k + len - 1));
        CovarianceMatrix::new(self.sigma.restrict(&pos.zero_based()))
    }

    /// Drops the pre-samples and keeps `x(1..m)`, `y(1..m)`.
    pub fn truncate(&self, m: usize) -> Result<JointProcessModel> {
        if m == 0 || m > self.horizon {
            return Err(Error::InvalidArgument(format!("cannot truncate horizon {} to {m}", self.horizon)));
        }
        let pos = self.xs(1, m).union(&self.ys(1, m));
        JointProcessModel::new(m, CovarianceMatrix::new(self.sigma.restrict(&pos.zero_based()))?, self.label.clone())
    }

    /// Average per-letter squared error `(1/n) Σ E[(x(i) - y(i))²]`.
    pub fn average_mse(&self) -> f64 {
        let s = self.sigma.matrix();
        let n = self.horizon;
        let total: f64 = (1..=n)
            .map(|i| {
                let xi = self.past + i - 1;
                let yi = self.past + n + i - 1;
                s[(xi, xi)] + s[(yi, yi)] - 2.0 * s[(xi, yi)]
            })
            .sum();
        total / n as f64
    }
}

impl AsRef<CovarianceMatrix> for JointProcessModel {
    fn as_ref(&self) -> &CovarianceMatrix {
        &self.sigma
    }
}

/// Linear-Gaussian reconstruction `y = G x_ext + v` of a stationary AR source.
///
/// `x_ext` spans `x(-ext_past+1) .. x(n+ext_future)`; columns of `gain` follow
/// that order. Samples outside `x(-keep_past+1) .. x(n)` are marginalized out.
#[derive(Debug, Clone)]
pub struct LinearChannelSpec {
    pub horizon: usize,
    pub ext_past: usize,
    pub ext_future: usize,
    pub keep_past: usize,
    pub gain: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
}

impl LinearChannelSpec {
    /// Time-invariant filter `y(k) = Σ h_j x(k - j) + v(k)` with white noise;
    /// negative lags look ahead.
    pub fn filter(horizon: usize, taps: &[(isize, f64)], noise_var: f64, keep_past: usize) -> Self {
        let max_lag = taps.iter().map(|(l, _)| *l).max().unwrap_or(0).max(0) as usize;
        let max_lead = taps.iter().map(|(l, _)| -*l).max().unwrap_or(0).max(0) as usize;
        let ext_past = max_lag.max(keep_past);
        let cols = ext_past + horizon + max_lead;
        let mut gain = DMatrix::zeros(horizon, cols);
        for k in 0..horizon {
            for &(lag, h) in taps {
                let col = (ext_past + k) as isize - lag;
                gain[(k, col as usize)] += h;
            }
        }
        LinearChannelSpec {
            horizon,
            ext_past,
            ext_future: max_lead,
            keep_past,
            gain,
            noise_cov: DMatrix::identity(horizon, horizon) * noise_var,
        }
    }

    pub fn build(&self, source: &ArSourceModel, label: impl Into<String>) -> Result<JointProcessModel> {
        let n = self.horizon;
        let m = self.ext_past + n + self.ext_future;
        if self.gain.nrows() != n || self.gain.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "gain is {}x{}, expected {n}x{m}",
                self.gain.nrows(),
                self.gain.ncols()
            )));
        }
        if self.noise_cov.nrows() != n || self.noise_cov.ncols() != n {
            return Err(Error::DimensionMismatch("noise covariance must be n x n".into()));
        }
        if self.keep_past > self.ext_past {
            return Err(Error::InvalidArgument("keep_past exceeds ext_past".into()));
        }
        let kx = source.toeplitz(m);
        let kyx = &self.gain * &kx;
        let ky = &kyx * self.gain.transpose() + &self.noise_cov;
        let mut full = DMatrix::zeros(m + n, m + n);
        full.view_mut((0, 0), (m, m)).copy_from(&kx);
        full.view_mut((m, 0), (n, m)).copy_from(&kyx);
        full.view_mut((0, m), (m, n)).copy_from(&kyx.transpose());
        full.view_mut((m, m), (n, n)).copy_from(&ky);
        let first_x = self.ext_past - self.keep_past;
        let mut keep: Vec<usize> = (first_x..self.ext_past + n).collect();
        keep.extend(m..m + n);
        let sigma = CovarianceMatrix::new(submatrix(&full, &keep, &keep))?;
        JointProcessModel::with_past(n, self.keep_past, sigma, label)?.with_source(source.clone(), 1e-12)
    }
}
