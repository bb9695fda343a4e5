use std::f64::consts::LN_2;

use super::{ar1_params, at_or_above_variance, check_distortion, RdMethod, RdPoint, StageAllocation};
use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;

/// `d/dd ½ log₂ d = C / d`.
const C: f64 = 0.5 / LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Points of the log-spaced distortion grid used by the dynamic program.
    pub grid_points: usize,
    /// Lower end of the grid relative to `ϱ₀`.
    pub grid_floor: f64,
    pub max_iterations: usize,
    /// Relative tolerance on the average-distortion constraint.
    pub rel_tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grid_points: 2048,
            grid_floor: 1e-6,
            max_iterations: 200,
            rel_tol: 1e-8,
            max_sweeps: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Problem {
    a2: f64,
    s2: f64,
    rho0: f64,
    n: usize,
}

impl Problem {
    fn p_next(&self, d: f64) -> f64 {
        self.a2 * d + self.s2
    }
}

/// Stage-variable grid plus everything about it that does not depend on λ.
struct Grid {
    g: Vec<f64>,
    half_log: Vec<f64>,
    /// For a state `d_{k-1} = g[j]`: `p = a² g[j] + σ²`, the last grid index
    /// not above `p`, and the log-space interpolation weight towards the next one.
    p: Vec<f64>,
    pos: Vec<Option<usize>>,
    frac: Vec<f64>,
}

impl Grid {
    fn new(pr: &Problem, opts: &SolverOptions) -> Self {
        let m = opts.grid_points.max(2);
        let span = opts.grid_floor.ln();
        let g: Vec<f64> = (0..m)
            .map(|i| {
                if i + 1 == m {
                    pr.rho0
                } else {
                    pr.rho0 * (span * (1.0 - (i + 1) as f64 / m as f64)).exp()
                }
            })
            .collect();
        let half_log = g.iter().map(|x| 0.5 * x.log2()).collect();
        let mut grid = Grid {
            g,
            half_log,
            p: Vec::with_capacity(m),
            pos: Vec::with_capacity(m),
            frac: Vec::with_capacity(m),
        };
        for j in 0..m {
            let p = pr.p_next(grid.g[j]).min(pr.rho0);
            let (pos, frac) = grid.locate(p);
            grid.p.push(p);
            grid.pos.push(pos);
            grid.frac.push(frac);
        }
        grid
    }

    fn locate(&self, x: f64) -> (Option<usize>, f64) {
        let upto = self.g.partition_point(|g| *g <= x * (1.0 + 1e-12));
        if upto == 0 {
            return (None, 0.0);
        }
        let i = upto - 1;
        if i + 1 == self.g.len() {
            return (Some(i), 0.0);
        }
        let f = (x.ln() - self.g[i].ln()) / (self.g[i + 1].ln() - self.g[i].ln());
        (Some(i), f.clamp(0.0, 1.0))
    }

    fn interp(&self, v: &[f64], pos: Option<usize>, frac: f64) -> f64 {
        match pos {
            None => v[0],
            Some(i) if frac == 0.0 => v[i],
            Some(i) => v[i] * (1.0 - frac) + v[i + 1] * frac,
        }
    }
}

/// Backward value iteration over the grid for a fixed multiplier, then a
/// forward pass that also admits the off-grid zero-rate choice `d_k = p_k`.
fn dp_allocation(pr: &Problem, grid: &Grid, lambda: f64) -> Vec<f64> {
    let n = pr.n;
    let m = grid.g.len();
    // For stage k: prefix minimum of h_k over the grid, its argmin, and V_{k+1}.
    let mut pm_val = vec![0.0; n * m];
    let mut pm_arg = vec![0u32; n * m];
    let mut v_next_all = vec![0.0; n * m];
    let mut v_next = vec![0.0; m];
    let mut v_cur = vec![0.0; m];
    for k in (0..n).rev() {
        let row = k * m;
        v_next_all[row..row + m].copy_from_slice(&v_next);
        let mut best = f64::INFINITY;
        let mut arg = 0u32;
        for i in 0..m {
            let h = -grid.half_log[i] + lambda * grid.g[i] + v_next[i];
            if h < best {
                best = h;
                arg = i as u32;
            }
            pm_val[row + i] = best;
            pm_arg[row + i] = arg;
        }
        if k == 0 {
            break;
        }
        for j in 0..m {
            let p = grid.p[j];
            let zero = lambda * p + grid.interp(&v_next, grid.pos[j], grid.frac[j]);
            let coded = match grid.pos[j] {
                Some(i) => 0.5 * p.log2() + pm_val[row + i],
                None => f64::INFINITY,
            };
            v_cur[j] = zero.min(coded);
        }
        std::mem::swap(&mut v_next, &mut v_cur);
    }
    let mut d = Vec::with_capacity(n);
    let mut p = pr.rho0;
    for k in 0..n {
        let row = k * m;
        let (pos, frac) = grid.locate(p);
        let v = &v_next_all[row..row + m];
        let zero = -0.5 * p.log2() + lambda * p + grid.interp(v, pos, frac);
        let dk = match pos {
            Some(i) if pm_val[row + i] < zero => grid.g[pm_arg[row + i] as usize],
            _ => p,
        };
        d.push(dk);
        p = pr.p_next(dk);
    }
    d
}

fn rate_term(p: f64, d: f64) -> f64 {
    0.5 * (p / d).log2()
}

/// Lagrangian restricted to stages `k..k+d.len()` given `p_k`. Stages after
/// the window are unaffected as long as its last entry is unchanged.
fn local_objective(pr: &Problem, lambda: f64, p_first: f64, d: &[f64]) -> f64 {
    let mut p = p_first;
    let mut total = 0.0;
    for &x in d {
        total += rate_term(p, x) + lambda * x;
        p = pr.p_next(x);
    }
    total
}

/// Coordinate refinement. Each update moves `d_k` either alone or together
/// with the run of following stages pinned at `d_i = p_i`, taking the
/// closed-form minimizer along that direction clipped to feasibility.
fn refine(pr: &Problem, lambda: f64, d: &mut [f64], max_sweeps: usize) {
    let n = pr.n;
    let tied = |d: &[f64], i: usize| d[i] >= pr.p_next(d[i - 1]) * (1.0 - 1e-12);
    let mut trial = Vec::with_capacity(n);
    for _ in 0..max_sweeps {
        let mut change = 0.0_f64;
        for k in 0..n {
            let hi = if k == 0 { pr.rho0 } else { pr.p_next(d[k - 1]) };
            let mut chain_end = k;
            while chain_end + 1 < n && tied(d, chain_end + 1) {
                chain_end += 1;
            }
            let window_end = (chain_end + 1).min(n - 1);
            let mut best_val = f64::INFINITY;
            let mut best: Option<Vec<f64>> = None;
            let ends: &[usize] = if chain_end == k { &[k][..] } else { &[k, chain_end][..] };
            for &end in ends {
                let Some(x) = chain_minimizer(pr, lambda, d, k, end, hi) else {
                    continue;
                };
                trial.clear();
                trial.extend_from_slice(&d[k..=window_end]);
                trial[0] = x;
                for i in 1..=(end - k) {
                    trial[i] = pr.p_next(trial[i - 1]);
                }
                let val = local_objective(pr, lambda, hi, &trial);
                if val < best_val {
                    best_val = val;
                    best = Some(trial.clone());
                }
            }
            let current = local_objective(pr, lambda, hi, &d[k..=window_end]);
            if let Some(b) = best {
                if best_val < current {
                    for (i, x) in b.iter().enumerate() {
                        change = change.max((d[k + i] - x).abs() / x);
                        d[k + i] = *x;
                    }
                }
            }
        }
        if change < 1e-13 {
            break;
        }
    }
}

/// Minimizer of the Lagrangian along `d_i = α_i d_k + β_i` for `i = k..=end`.
fn chain_minimizer(pr: &Problem, lambda: f64, d: &[f64], k: usize, end: usize, hi: f64) -> Option<f64> {
    let n = pr.n;
    let (mut alpha, mut beta) = (1.0, 0.0);
    let mut s = 1.0;
    for _ in k..end {
        alpha *= pr.a2;
        beta = pr.a2 * beta + pr.s2;
        s += alpha;
    }
    let mut lower = f64::MIN_POSITIVE;
    let x = if end + 1 < n {
        let a_next = pr.a2 * alpha;
        let b_next = pr.a2 * beta + pr.s2;
        if a_next > 0.0 {
            let need = (d[end + 1] - pr.s2) / pr.a2;
            lower = lower.max((need - beta) / alpha);
            let qa = lambda * s * a_next;
            let qb = lambda * s * b_next;
            let qc = -C * b_next;
            let disc = (qb * qb - 4.0 * qa * qc).sqrt();
            // Stable root of qa x² + qb x + qc = 0 with qc < 0.
            -2.0 * qc / (qb + disc)
        } else {
            C / (lambda * s)
        }
    } else {
        C / (lambda * s)
    };
    if lower > hi * (1.0 + 1e-12) {
        return None;
    }
    Some(x.clamp(lower.min(hi), hi))
}

fn lagrangian_allocation(pr: &Problem, grid: &Grid, lambda: f64, opts: &SolverOptions) -> Vec<f64> {
    let mut d = dp_allocation(pr, grid, lambda);
    refine(pr, lambda, &mut d, opts.max_sweeps);
    d
}

fn average(d: &[f64]) -> f64 {
    d.iter().sum::<f64>() / d.len() as f64
}

/// `R̂ₙ(D)` by bisection on the distortion multiplier.
pub fn finite_horizon_irdf(model: &ArSourceModel, distortion: f64, n: usize, opts: &SolverOptions) -> Result<RdPoint> {
    let (a2, s2, rho0) = ar1_params(model)?;
    check_distortion(distortion)?;
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let pr = Problem { a2, s2, rho0, n };
    let finish = |d: Vec<f64>| -> Result<RdPoint> {
        let alloc = StageAllocation::from_distortions(model, d)?;
        Ok(RdPoint {
            distortion,
            rate_bits: alloc.rate_bits(),
            horizon: Some(n),
            allocation: Some(alloc),
            method: RdMethod::FiniteHorizon,
        })
    };
    if at_or_above_variance(distortion, rho0) {
        return finish(vec![rho0; n]);
    }
    let grid = Grid::new(&pr, opts);
    let solve = |lambda: f64| lagrangian_allocation(&pr, &grid, lambda, opts);

    let mut lo = 1e-3 * C / rho0;
    let mut hi = 4.0 * C / distortion;
    let mut best = solve(hi);
    let mut guard = 0;
    while average(&best) > distortion {
        lo = hi;
        hi *= 4.0;
        best = solve(hi);
        guard += 1;
        if guard > 60 {
            return Err(Error::InvalidArgument("distortion budget unreachable".into()));
        }
    }
    for _ in 0..opts.max_iterations {
        if (distortion - average(&best)) <= opts.rel_tol * distortion || hi / lo - 1.0 < 1e-15 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let d = solve(mid);
        if average(&d) <= distortion {
            hi = mid;
            best = d;
        } else {
            lo = mid;
        }
    }
    finish(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn single_stage_closed_form() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = finite_horizon_irdf(&m, 0.25, 1, &opts()).unwrap();
        assert!((r.rate_bits - 1.0).abs() < 1e-8);
        let a = r.allocation.unwrap();
        assert!((a.d[0] - 0.25).abs() < 1e-8);
    }

    #[test]
    fn zero_rate_at_the_boundary() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = finite_horizon_irdf(&m, 1.5, 1, &opts()).unwrap();
        assert_eq!(r.rate_bits, 0.0);
        assert!((r.allocation.unwrap().d[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iid_has_no_transient() {
        let m = ArSourceModel::new(vec![0.0], 1.0).unwrap();
        for n in [1, 5, 64] {
            let r = finite_horizon_irdf(&m, 0.25, n, &opts()).unwrap();
            assert!((r.rate_bits - 1.0).abs() < 1e-7, "n={n}: {}", r.rate_bits);
        }
    }

    #[test]
    fn allocation_is_feasible_and_tight() {
        let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
        for (d, n) in [(0.1, 16), (0.05, 64), (0.6, 8), (0.95, 8)] {
            let r = finite_horizon_irdf(&m, d, n, &opts()).unwrap();
            let a = r.allocation.unwrap();
            assert!(a.is_feasible(d));
            assert!(a.average_distortion() >= d * (1.0 - 1e-7), "{d} {n}: {}", a.average_distortion());
        }
    }

    #[test]
    fn interior_allocation_matches_stationarity_conditions() {
        // Interior KKT point: d_k = d* for k < n, d_n = C/λ, with
        // a² d*² + σ² d* = σ² C / λ.
        let m = ArSourceModel::ar1(0.5, 0.75).unwrap();
        let r = finite_horizon_irdf(&m, 0.1, 12, &opts()).unwrap();
        let d = r.allocation.unwrap().d;
        let dstar = d[0];
        assert!(d[..11].iter().all(|x| (x - dstar).abs() < 1e-9));
        let lambda_c = d[11];
        assert!((0.25 * dstar * dstar + 0.75 * dstar - 0.75 * lambda_c).abs() < 1e-9);
    }
}
