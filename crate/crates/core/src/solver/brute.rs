use super::{ar1_params, check_distortion, stage_rate, RdMethod, RdPoint, StageAllocation};
use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;

/// Exhaustive search over `d_k ∈ {step, 2 step, ..} ∪ {p_k}` for `n <= 4`.
///
/// The rate is decreasing in the last stage's distortion, so `d_n` is taken as
/// the largest candidate the remaining budget allows.
pub fn brute_force_irdf(model: &ArSourceModel, distortion: f64, n: usize, step: f64) -> Result<RdPoint> {
    let (a2, s2, rho0) = ar1_params(model)?;
    check_distortion(distortion)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("brute force supports 1 <= n <= 4, got {n}")));
    }
    let mut search = Search {
        a2,
        s2,
        step,
        n,
        budget: n as f64 * distortion * (1.0 + 1e-12),
        current: Vec::with_capacity(n),
        best_rate: f64::INFINITY,
        best: None,
    };
    search.descend(rho0, 0.0, 0.0);
    let d = search
        .best
        .ok_or_else(|| Error::InvalidArgument(format!("no grid allocation meets D = {distortion}")))?;
    let alloc = StageAllocation::from_distortions(model, d)?;
    Ok(RdPoint {
        distortion,
        rate_bits: alloc.rate_bits(),
        horizon: Some(n),
        allocation: Some(alloc),
        method: RdMethod::BruteForce,
    })
}

struct Search {
    a2: f64,
    s2: f64,
    step: f64,
    n: usize,
    budget: f64,
    current: Vec<f64>,
    best_rate: f64,
    best: Option<Vec<f64>>,
}

impl Search {
    fn candidates(&self, p: f64, cap: f64) -> impl Iterator<Item = f64> + '_ {
        let top = p.min(cap);
        let count = (top / self.step * (1.0 + 1e-12)).floor() as usize;
        let on_grid = (1..=count).map(move |m| m as f64 * self.step);
        let endpoint = (p <= cap && (count as f64 * self.step - p).abs() > 1e-12 * p).then_some(p);
        on_grid.chain(endpoint)
    }

    fn descend(&mut self, p: f64, used: f64, rate: f64) {
        let left = self.budget - used;
        if self.current.len() + 1 == self.n {
            let last = if p <= left {
                p
            } else {
                (left / self.step * (1.0 + 1e-12)).floor() * self.step
            };
            if last <= 0.0 {
                return;
            }
            let total = rate + stage_rate(p, last);
            if total < self.best_rate {
                self.best_rate = total;
                let mut d = self.current.clone();
                d.push(last);
                self.best = Some(d);
            }
            return;
        }
        let cands: Vec<f64> = self.candidates(p, left).collect();
        for d in cands {
            self.current.push(d);
            self.descend(self.a2 * d + self.s2, used + d, rate + stage_rate(p, d));
            self.current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_stage_matches_closed_form() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = brute_force_irdf(&m, 0.25, 1, 1e-3).unwrap();
        assert!((r.rate_bits - 1.0).abs() < 1e-9);
    }

    #[test]
    fn refining_the_grid_never_hurts() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let coarse = brute_force_irdf(&m, 0.1, 2, 2e-2).unwrap().rate_bits;
        let fine = brute_force_irdf(&m, 0.1, 2, 1e-2).unwrap().rate_bits;
        let finer = brute_force_irdf(&m, 0.1, 2, 5e-3).unwrap().rate_bits;
        assert!(fine <= coarse && finer <= fine);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        assert!(brute_force_irdf(&m, 0.1, 2, 0.0).is_err());
        assert!(brute_force_irdf(&m, 0.1, 5, 1e-2).is_err());
    }
}
