use std::f64::consts::LN_2;

use serde::Serialize;

use super::covariance::{CovarianceMatrix, IndexSet};
use crate::error::{Error, Result};
use crate::linalg::{logdet, max_abs, spd_solve};

/// Negative results down to this value are treated as round-off and clamped.
const NEGATIVE_SLACK: f64 = 1e-10;

fn clamp(bits: f64) -> f64 {
    if (-NEGATIVE_SLACK..0.0).contains(&bits) {
        0.0
    } else {
        bits
    }
}

fn require_nonempty(s: &IndexSet, name: &str) -> Result<()> {
    if s.is_empty() {
        Err(Error::InvalidIndexSet(format!("{name} must be non-empty")))
    } else {
        Ok(())
    }
}

fn require_disjoint(sets: &[(&IndexSet, &str)]) -> Result<()> {
    for (i, (a, na)) in sets.iter().enumerate() {
        for (b, nb) in &sets[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::InvalidIndexSet(format!("{na} and {nb} overlap")));
            }
        }
    }
    Ok(())
}

/// `I(A; B)` in bits for the Gaussian vector with covariance `m`:
/// `½ log₂(det Σ_A det Σ_B / det Σ_{A∪B})`.
pub fn mutual_information<M: AsRef<CovarianceMatrix>>(m: M, a: &IndexSet, b: &IndexSet) -> Result<f64> {
    let cov = m.as_ref();
    require_nonempty(a, "A")?;
    require_nonempty(b, "B")?;
    a.check_bounds(cov.dim(), "A")?;
    b.check_bounds(cov.dim(), "B")?;
    require_disjoint(&[(a, "A"), (b, "B")])?;
    let la = logdet(&cov.restrict(&a.zero_based()), "A")?;
    let lb = logdet(&cov.restrict(&b.zero_based()), "B")?;
    let lab = logdet(&cov.restrict(&a.union(b).zero_based()), "A∪B")?;
    Ok(clamp(0.5 * (la + lb - lab) / LN_2))
}

/// `I(A; B | C) = I(A; B, C) - I(A; C)`; an empty `C` gives `I(A; B)`.
pub fn conditional_mutual_information<M: AsRef<CovarianceMatrix>>(
    m: M,
    a: &IndexSet,
    b: &IndexSet,
    c: &IndexSet,
) -> Result<f64> {
    let cov = m.as_ref();
    require_disjoint(&[(a, "A"), (b, "B"), (c, "C")])?;
    if c.is_empty() {
        return mutual_information(cov, a, b);
    }
    let joint = mutual_information(cov, a, &b.union(c))?;
    let marginal = mutual_information(cov, a, c)?;
    Ok(clamp(joint - marginal))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovCertificate {
    pub residual: f64,
    pub holds: bool,
    pub tolerance: f64,
}

/// Certifies `A ↔ C ↔ B` for Gaussian variables through the conditional
/// cross-covariance `Σ_AB − Σ_AC Σ_C⁻¹ Σ_CB`. An empty `C` tests independence.
pub fn markov_chain_check<M: AsRef<CovarianceMatrix>>(
    m: M,
    a: &IndexSet,
    c: &IndexSet,
    b: &IndexSet,
    tol: f64,
) -> Result<MarkovCertificate> {
    let cov = m.as_ref();
    require_nonempty(a, "A")?;
    require_nonempty(b, "B")?;
    for (s, n) in [(a, "A"), (b, "B"), (c, "C")] {
        s.check_bounds(cov.dim(), n)?;
    }
    require_disjoint(&[(a, "A"), (b, "B"), (c, "C")])?;
    let (ia, ib, ic) = (a.zero_based(), b.zero_based(), c.zero_based());
    let mut cond = cov.cross(&ia, &ib);
    if !ic.is_empty() {
        let scb = cov.cross(&ic, &ib);
        let proj = spd_solve(&cov.restrict(&ic), &scb, "C (conditioning set)")?;
        cond -= cov.cross(&ia, &ic) * proj;
    }
    let residual = max_abs(&cond);
    Ok(MarkovCertificate {
        residual,
        holds: residual <= tol,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::gauss::{ArSourceModel, LinearChannelSpec};

    fn cov(n: usize, v: &[f64]) -> CovarianceMatrix {
        CovarianceMatrix::new(DMatrix::from_row_slice(n, n, v)).unwrap()
    }

    #[test]
    fn correlated_pair_oracle() {
        let rho: f64 = 0.8;
        let c = cov(2, &[1.0, rho, rho, 1.0]);
        let mi = mutual_information(&c, &IndexSet::range(1, 1), &IndexSet::range(2, 2)).unwrap();
        let oracle = -0.5 * (1.0 - rho * rho).log2();
        assert!((mi - oracle).abs() < 1e-12);
        assert!((mi - 0.7370).abs() < 5e-5);
    }

    #[test]
    fn independence_gives_zero() {
        let c = cov(3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 4.0]);
        let mi = mutual_information(&c, &IndexSet::range(1, 2), &IndexSet::range(3, 3)).unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn deterministic_dependence_is_an_error() {
        let c = cov(2, &[1.0, 1.0, 1.0, 1.0]);
        let err = mutual_information(&c, &IndexSet::range(1, 1), &IndexSet::range(2, 2)).unwrap_err();
        assert!(err.to_string().contains("mutual information infinite"));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let c = cov(2, &[1.0, 0.1, 0.1, 1.0]);
        assert!(mutual_information(&c, &IndexSet::range(1, 2), &IndexSet::range(2, 2)).is_err());
        assert!(mutual_information(&c, &IndexSet::empty(), &IndexSet::range(2, 2)).is_err());
        assert!(mutual_information(&c, &IndexSet::range(1, 1), &IndexSet::range(3, 3)).is_err());
    }

    #[test]
    fn cmi_examples() {
        let ar1 = ArSourceModel::ar1(0.9, 0.19).unwrap().toeplitz_covariance(3).unwrap();
        let (x1, x2, x3) = (IndexSet::range(1, 1), IndexSet::range(2, 2), IndexSet::range(3, 3));
        let v = conditional_mutual_information(&ar1, &x3, &x1, &x2).unwrap();
        assert!(v.abs() < 1e-12);
        let plain = mutual_information(&ar1, &x3, &x1).unwrap();
        let degenerate = conditional_mutual_information(&ar1, &x3, &x1, &IndexSet::empty()).unwrap();
        assert_eq!(plain, degenerate);

        // AR(2): Schur-complement oracle for I(x3; x1 | x2).
        let ar2 = ArSourceModel::new(vec![0.5, -0.3], 1.0).unwrap();
        let k = ar2.toeplitz_covariance(3).unwrap();
        let v = conditional_mutual_information(&k, &x3, &x1, &x2).unwrap();
        let s = k.matrix();
        let c33 = s[(2, 2)] - s[(2, 1)] * s[(1, 2)] / s[(1, 1)];
        let c11 = s[(0, 0)] - s[(0, 1)] * s[(1, 0)] / s[(1, 1)];
        let c31 = s[(2, 0)] - s[(2, 1)] * s[(1, 0)] / s[(1, 1)];
        let oracle = -0.5 * (1.0 - c31 * c31 / (c33 * c11)).log2();
        assert!(v > 1e-3);
        assert!((v - oracle).abs() < 1e-12);
    }

    #[test]
    fn markov_examples() {
        let ar2 = ArSourceModel::normalized(vec![0.5, -0.3]).unwrap();
        let m = LinearChannelSpec::filter(3, &[(0, 1.0)], 0.5, 0).build(&ar2, "awgn").unwrap();
        let cert = markov_chain_check(&m, &m.xs(2, 3), &m.xs(1, 1), &m.ys(1, 1), 1e-8).unwrap();
        assert!(cert.holds, "residual {}", cert.residual);

        // Look-ahead channel y(k) = x(k) + x(k+1) over AR(1).
        let ar1 = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let m = LinearChannelSpec::filter(3, &[(0, 1.0), (-1, 1.0)], 0.1, 0).build(&ar1, "lookahead").unwrap();
        let cert = markov_chain_check(&m, &m.xs(2, 2), &m.xs(1, 1), &m.ys(1, 1), 1e-8).unwrap();
        // cov(x2,y1) - ϱ1 cov(x1,y1) = (ϱ1+ϱ0) - ϱ1(ϱ0+ϱ1) = 1 - a²
        assert!(!cert.holds);
        assert!((cert.residual - (1.0 - 0.81)).abs() < 1e-12);

        // Empty B is a precondition failure.
        assert!(markov_chain_check(&m, &m.xs(2, 3), &m.xs(1, 1), &IndexSet::empty(), 1e-8).is_err());
    }

    #[test]
    fn singular_conditioning_block_is_named() {
        let c = cov(3, &[1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let err = markov_chain_check(&c, &IndexSet::range(1, 1), &IndexSet::range(3, 3), &IndexSet::range(2, 2), 1e-8)
            .unwrap_err();
        assert!(err.to_string().contains("conditioning"));
    }
}
