use crate::error::{Error, Result};
use crate::gauss::{CovarianceMatrix, IndexSet, JointProcessModel};
use crate::linalg::spd_solve;

/// Replaces `A` by a copy `Ā` with `(Ā, B) ~ (A, B)` and `Ā ↔ B ↔ C`.
///
/// Every position outside `A ∪ B` is treated as part of the conditioned-away
/// side, so `Σ_ĀZ = Σ_AB Σ_B⁻¹ Σ_BZ` for all such `Z`; this keeps the result a
/// valid covariance. `Σ_AA`, `Σ_AB` and everything not involving `A` are unchanged.
pub fn conditionally_independent_copy(
    m: &JointProcessModel,
    a: &IndexSet,
    b: &IndexSet,
    c: &IndexSet,
) -> Result<JointProcessModel> {
    let dim = m.sigma().dim();
    for (s, name) in [(a, "A"), (b, "B"), (c, "C")] {
        if s.is_empty() {
            return Err(Error::InvalidIndexSet(format!("{name} must be non-empty")));
        }
        if s.indices().last().is_some_and(|&i| i > dim) {
            return Err(Error::InvalidIndexSet(format!("{name} out of bounds")));
        }
    }
    if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
        return Err(Error::InvalidIndexSet("A, B, C must be pairwise disjoint".into()));
    }
    let ia: Vec<usize> = a.indices().iter().map(|i| i - 1).collect();
    let ib: Vec<usize> = b.indices().iter().map(|i| i - 1).collect();
    let ab = a.union(b);
    let iz: Vec<usize> = (0..dim).filter(|i| ab.indices().binary_search(&(i + 1)).is_err()).collect();
    let sigma = m.sigma();
    let mut out = sigma.matrix().clone();
    if !iz.is_empty() {
        let proj = spd_solve(&sigma.restrict(&ib), &sigma.cross(&ib, &iz), "B (conditioning set)")?;
        let new_az = sigma.cross(&ia, &ib) * proj;
        for (r, &i) in ia.iter().enumerate() {
            for (col, &z) in iz.iter().enumerate() {
                out[(i, z)] = new_az[(r, col)];
                out[(z, i)] = new_az[(r, col)];
            }
        }
    }
    let mut model = JointProcessModel::with_past(
        m.horizon(),
        m.past(),
        CovarianceMatrix::new(out)?,
        format!("{} (conditionally independent copy)", m.label()),
    )?;
    if let Some(src) = m.source() {
        model = model.with_source(src.clone(), 1e-10)?;
    }
    Ok(model)
}
