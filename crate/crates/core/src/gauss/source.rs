use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::covariance::CovarianceMatrix;
use crate::error::{Error, Result};

/// Scalar autoregressive source `x(k) = Σ a_i x(k-i) + w(k)` with white
/// Gaussian innovations of variance `innovation_variance`.
///
/// Construction validates strict stability, so every accessor below refers to
/// the unique zero-mean stationary solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArSourceFile", into = "ArSourceFile")]
pub struct ArSourceModel {
    coeffs: Vec<f64>,
    innovation_variance: f64,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct ArSourceFile {
    #[serde(rename = "type")]
    kind: String,
    coeffs: Vec<f64>,
    innovation_variance: f64,
}

impl TryFrom<ArSourceFile> for ArSourceModel {
    type Error = Error;
    fn try_from(f: ArSourceFile) -> Result<Self> {
        if f.kind != "ar" {
            return Err(Error::InvalidModel(format!("expected type \"ar\", found {:?}", f.kind)));
        }
        ArSourceModel::new(f.coeffs, f.innovation_variance)
    }
}

impl From<ArSourceModel> for ArSourceFile {
    fn from(m: ArSourceModel) -> Self {
        ArSourceFile {
            kind: "ar".to_string(),
            coeffs: m.coeffs,
            innovation_variance: m.innovation_variance,
        }
    }
}

impl ArSourceModel {
    pub fn new(coeffs: Vec<f64>, innovation_variance: f64) -> Result<Self> {
        if !(innovation_variance > 0.0 && innovation_variance.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "innovation variance must be positive and finite, got {innovation_variance}"
            )));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidModel("non-finite AR coefficient".into()));
        }
        let order = coeffs.iter().rposition(|a| *a != 0.0).map_or(0, |i| i + 1);
        check_stability(&coeffs[..order])?;
        Ok(ArSourceModel {
            coeffs,
            innovation_variance,
            order,
        })
    }

    /// First-order model.
    pub fn ar1(a: f64, innovation_variance: f64) -> Result<Self> {
        Self::new(vec![a], innovation_variance)
    }

    /// Same recursion, innovation variance chosen so the stationary variance is one.
    pub fn normalized(coeffs: Vec<f64>) -> Result<Self> {
        let unit = Self::new(coeffs.clone(), 1.0)?;
        let r0 = unit.stationary_variance();
        Self::new(coeffs, 1.0 / r0)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients up to the declared order (trailing zeros dropped).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.order]
    }

    /// Coefficient `a_i` (1-based), zero beyond the order.
    pub fn coeff(&self, i: usize) -> f64 {
        if i == 0 || i > self.order {
            0.0
        } else {
            self.coeffs[i - 1]
        }
    }

    pub fn innovation_variance(&self) -> f64 {
        self.innovation_variance
    }

    pub fn stationary_variance(&self) -> f64 {
        self.yule_walker()[0]
    }

    /// Stationary autocovariance `ϱ_lag`.
    pub fn autocovariance(&self, lag: usize) -> f64 {
        self.autocovariances(lag + 1)[lag]
    }

    /// `ϱ_0 .. ϱ_{count-1}`.
    pub fn autocovariances(&self, count: usize) -> Vec<f64> {
        let head = self.yule_walker();
        let mut r = Vec::with_capacity(count.max(head.len()));
        r.extend_from_slice(&head);
        let a = self.coeffs();
        while r.len() < count {
            let tau = r.len();
            let next = a.iter().enumerate().map(|(i, ai)| ai * r[tau - i - 1]).sum();
            r.push(next);
        }
        r.truncate(count);
        r
    }

    /// `n x n` Toeplitz covariance of `x(1..n)`.
    pub fn toeplitz_covariance(&self, n: usize) -> Result<CovarianceMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("toeplitz covariance needs n >= 1".into()));
        }
        CovarianceMatrix::new(self.toeplitz(n))
    }

    pub(crate) fn toeplitz(&self, n: usize) -> DMatrix<f64> {
        let r = self.autocovariances(n);
        DMatrix::from_fn(n, n, |i, j| r[i.abs_diff(j)])
    }

    /// Solves the Yule–Walker system for `ϱ_0 .. ϱ_κ`.
    fn yule_walker(&self) -> Vec<f64> {
        let k = self.order;
        let a = self.coeffs();
        let mut m = DMatrix::<f64>::identity(k + 1, k + 1);
        for tau in 0..=k {
            for (i, ai) in a.iter().enumerate() {
                let lag = tau.abs_diff(i + 1);
                m[(tau, lag)] -= ai;
            }
        }
        let mut rhs = DVector::<f64>::zeros(k + 1);
        rhs[0] = self.innovation_variance;
        let sol = m
            .lu()
            .solve(&rhs)
            .expect("Yule-Walker system of a stable model is nonsingular");
        sol.iter().copied().collect()
    }
}

/// Step-down (Schur–Cohn) test: every reflection coefficient must lie strictly
/// inside the unit interval.
fn check_stability(a: &[f64]) -> Result<()> {
    let mut c: Vec<f64> = a.iter().map(|v| -v).collect();
    for p in (1..=c.len()).rev() {
        let k = c[p - 1];
        if k.abs() >= 1.0 {
            return Err(Error::Unstable(format!(
                "reflection coefficient {k:.6} at stage {p} has magnitude >= 1 (coefficients {a:?})"
            )));
        }
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (1..p).map(|i| (c[i - 1] - k * c[p - i - 1]) / denom).collect();
        c = prev;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_autocovariance_examples() {
        let m = ArSourceModel::ar1(0.5, 0.75).unwrap();
        assert!((m.autocovariance(0) - 1.0).abs() < 1e-14);
        assert!((m.autocovariance(1) - 0.5).abs() < 1e-14);

        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        assert!((m.autocovariance(2) - 0.81).abs() < 1e-12);
    }

    #[test]
    fn iid_source_is_white() {
        let m = ArSourceModel::new(vec![0.0], 1.0).unwrap();
        assert_eq!(m.order(), 0);
        assert_eq!(m.autocovariance(3), 0.0);
        assert_eq!(m.autocovariance(0), 1.0);
    }

    #[test]
    fn ar2_stationary_variance_closed_form() {
        // ϱ0 = σ²(1-a2) / ((1+a2)((1-a2)² - a1²))
        let (a1, a2, s2) = (0.5_f64, -0.3_f64, 1.0_f64);
        let m = ArSourceModel::new(vec![a1, a2], s2).unwrap();
        let expect = s2 * (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2).powi(2) - a1 * a1));
        assert!((m.stationary_variance() - expect).abs() < 1e-12);
        // Recursion beyond the order.
        let r = m.autocovariances(6);
        for t in 2..6 {
            assert!((r[t] - a1 * r[t - 1] - a2 * r[t - 2]).abs() < 1e-12);
        }
    }

    #[test]
    fn order_ignores_trailing_zeros() {
        let m = ArSourceModel::new(vec![0.4, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(m.order(), 1);
        assert_eq!(m.coeffs(), &[0.4]);
    }

    #[test]
    fn unstable_models_rejected() {
        assert!(matches!(ArSourceModel::ar1(1.0, 1.0), Err(Error::Unstable(_))));
        assert!(matches!(ArSourceModel::ar1(-1.2, 1.0), Err(Error::Unstable(_))));
        // Roots 1.25 and 0.5 (x² - 1.75x + 0.625).
        assert!(matches!(ArSourceModel::new(vec![1.75, -0.625], 1.0), Err(Error::Unstable(_))));
        assert!(ArSourceModel::new(vec![1.5, -0.56], 1.0).is_ok()); // roots 0.8, 0.7
        assert!(ArSourceModel::new(vec![0.5], 0.0).is_err());
    }

    #[test]
    fn toeplitz_examples() {
        let m = ArSourceModel::new(vec![0.0], 1.0).unwrap();
        let t = m.toeplitz_covariance(2).unwrap();
        assert_eq!(t.matrix(), &DMatrix::<f64>::identity(2, 2));
        let m = ArSourceModel::ar1(0.5, 0.75).unwrap();
        let t = m.toeplitz_covariance(2).unwrap();
        assert!((t.matrix()[(0, 1)] - 0.5).abs() < 1e-14);
        assert!(m.toeplitz_covariance(0).is_err());
    }

    #[test]
    fn normalized_has_unit_variance() {
        let m = ArSourceModel::normalized(vec![0.5, -0.3]).unwrap();
        assert!((m.stationary_variance() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let m = ArSourceModel::new(vec![0.5, -0.3], 0.8).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"type\":\"ar\""));
        let back: ArSourceModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"type":"ar","coeffs":[1.1],"innovation_variance":1.0}"#;
        assert!(serde_json::from_str::<ArSourceModel>(bad).is_err());
    }
}
