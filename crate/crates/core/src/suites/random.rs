use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gauss::IndexSet;

/// `B Bᵀ / dim + 0.05 I` with standard normal `B`.
pub fn random_spd<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let b = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    &b * b.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.05
}

/// Three non-empty disjoint subsets of `1..=dim` (`dim >= 3`); some indices
/// may be left out.
pub fn random_partition<R: Rng>(rng: &mut R, dim: usize) -> (IndexSet, IndexSet, IndexSet) {
    let mut idx: Vec<usize> = (1..=dim).collect();
    idx.shuffle(rng);
    let a = rng.random_range(1..=dim - 2);
    let b = rng.random_range(1..=dim - a - 1);
    let c = rng.random_range(1..=dim - a - b);
    let set = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        IndexSet::new(v).expect("distinct indices")
    };
    (set(&idx[..a]), set(&idx[a..a + b]), set(&idx[a + b..a + b + c]))
}

/// `I(A;B|C)` from the conditional covariance given `C` and LU determinants.
pub fn schur_cmi(sigma: &DMatrix<f64>, a: &IndexSet, b: &IndexSet, c: &IndexSet) -> f64 {
    let zb = |s: &IndexSet| s.indices().iter().map(|i| i - 1).collect::<Vec<_>>();
    let (ia, ib, ic) = (zb(a), zb(b), zb(c));
    let sub = |r: &[usize], col: &[usize]| DMatrix::from_fn(r.len(), col.len(), |i, j| sigma[(r[i], col[j])]);
    let cond = |s: &[usize]| {
        if ic.is_empty() {
            return sub(s, s);
        }
        let kc_inv = sub(&ic, &ic).try_inverse().expect("nonsingular conditioning block");
        sub(s, s) - sub(s, &ic) * kc_inv * sub(&ic, s)
    };
    let ab: Vec<usize> = ia.iter().chain(&ib).copied().collect();
    let det = |m: DMatrix<f64>| m.determinant();
    0.5 * (det(cond(&ia)) * det(cond(&ib)) / det(cond(&ab))).log2()
}
