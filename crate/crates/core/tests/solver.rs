use crdlab_core::solver::{
    audit_allocation, brute_force_irdf, finite_horizon_irdf, rd_sweep, stationary_irdf, SolverOptions,
};
use crdlab_core::ArSourceModel;

/// (a, σ², D, n, brute-force rate at grid 1e-3), values from an independent
/// vectorized enumeration.
const FIXTURES: [(f64, f64, f64, usize, f64); 10] = [
    (0.9, 0.19, 0.1, 1, 1.6609640474436813),
    (0.9, 0.19, 0.1, 2, 1.181718951388394),
    (0.9, 0.19, 0.1, 3, 1.0252361804290013),
    (0.9, 0.19, 0.05, 2, 1.6288836985423096),
    (0.9, 0.19, 0.3, 3, 0.4374526830938239),
    (0.5, 0.75, 0.1, 2, 1.5689426318412378),
    (0.5, 0.75, 0.25, 3, 0.8996644778123661),
    (0.0, 1.0, 0.25, 3, 1.0),
    (0.7, 0.51, 0.5, 2, 0.3887438849571405),
    (0.9, 0.19, 0.9, 3, 0.03127487707834677),
];

#[test]
fn brute_force_reproduces_pinned_values() {
    for (a, s2, d, n, want) in FIXTURES {
        let m = ArSourceModel::ar1(a, s2).unwrap();
        let got = brute_force_irdf(&m, d, n, 1e-3).unwrap().rate_bits;
        assert!((got - want).abs() < 1e-9, "({a}, {s2}, {d}, {n}): {got} vs {want}");
    }
}

#[test]
fn finite_solver_agrees_with_brute_force() {
    for (a, s2, d, n, want) in FIXTURES {
        let m = ArSourceModel::ar1(a, s2).unwrap();
        let got = finite_horizon_irdf(&m, d, n, &SolverOptions::default()).unwrap().rate_bits;
        assert!((got - want).abs() <= 5e-3, "({a}, {s2}, {d}, {n}): {got} vs {want}");
        // The grid is a subset of the continuous search space; the solver stops
        // within 1e-8 relative of the budget.
        assert!(got <= want + 1e-7, "({a}, {s2}, {d}, {n}): {got} above grid optimum {want}");
    }
}

#[test]
fn interior_optimum_matches_stationarity_equations() {
    // n = 3, interior: 2 d* + d₃ = 3D and a² d*² + σ² d* = σ² d₃.
    let (a, s2, dd) = (0.9_f64, 0.19, 0.1);
    let a2 = a * a;
    // a² x² + σ² x = σ² (3D − 2x)  →  a² x² + 3σ² x − 3σ² D = 0
    let x = (-3.0 * s2 + (9.0 * s2 * s2 + 12.0 * a2 * s2 * dd).sqrt()) / (2.0 * a2);
    let d3 = 3.0 * dd - 2.0 * x;
    let p = a2 * x + s2;
    let rho0 = s2 / (1.0 - a2);
    let want = ((rho0 / x).log2() + (p / x).log2() + (p / d3).log2()) / 6.0;
    let m = ArSourceModel::ar1(a, s2).unwrap();
    let got = finite_horizon_irdf(&m, dd, 3, &SolverOptions::default()).unwrap();
    assert!((got.rate_bits - want).abs() < 1e-8, "{} vs {want}", got.rate_bits);
    let alloc = got.allocation.unwrap();
    assert!((alloc.d[0] - x).abs() < 1e-7 && (alloc.d[2] - d3).abs() < 1e-7);
}

#[test]
fn stationary_value_is_the_long_horizon_limit() {
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let r = stationary_irdf(&m, 0.1).unwrap().rate_bits;
    assert!((r - 0.5 * 2.71_f64.log2()).abs() < 1e-12);
    let f = finite_horizon_irdf(&m, 0.1, 2048, &SolverOptions::default()).unwrap().rate_bits;
    assert!(f > r && f - r < 5e-4, "{f} vs {r}");
}

#[test]
fn optima_are_realizable_causal_pairs() {
    for (a, s2, d, n, _) in FIXTURES {
        let m = ArSourceModel::ar1(a, s2).unwrap();
        let p = finite_horizon_irdf(&m, d, n, &SolverOptions::default()).unwrap();
        let audit = audit_allocation(&m, &p, 1e-8).unwrap();
        assert!(audit.report.passed(), "{:?}", audit.report);
    }
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let p = finite_horizon_irdf(&m, 0.1, 32, &SolverOptions::default()).unwrap();
    assert!(audit_allocation(&m, &p, 1e-8).unwrap().report.passed());
}

#[test]
fn sweep_is_monotone_for_correlated_source() {
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let s = rd_sweep(&m, &[0.05, 0.1, 0.2], 32, &SolverOptions::default()).unwrap();
    assert!(s.report.passed());
    assert!(s.rows.windows(2).all(|w| w[1].finite_bits < w[0].finite_bits));
}
