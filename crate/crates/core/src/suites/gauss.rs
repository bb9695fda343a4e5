use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::random::{random_partition, random_spd, schur_cmi};
use crate::error::Result;
use crate::gauss::{
    causality_audit, conditional_mutual_information, joint_stationarity_audit, markov_chain_check, markov_order,
    mutual_information, present_sample_audit, stationary_causal_certificate, window_blocks, ArSourceModel,
    CausalityVariant, CovarianceMatrix, GeometricStatus, IndexSet, LinearChannelSpec, DEFAULT_TOL,
};
use crate::report::{AuditReport, Check};

const MODELS: usize = 100;

pub fn gauss_suite(seed: u64) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::new("gauss");
    information_identities(&mut rng, &mut report)?;
    proposition_two(&mut rng, &mut report)?;
    proposition_three(&mut rng, &mut report)?;
    stationarity_causality_implication(&mut rng, &mut report)?;
    certificates(&mut rng, &mut report)?;
    for (coeffs, want) in [(vec![0.0], 0usize), (vec![0.9], 1), (vec![0.5, -0.3], 2)] {
        let m = ArSourceModel::new(coeffs.clone(), 1.0)?;
        let got = markov_order(&m, 1e-9)?;
        report.push(Check::eq(
            &format!("markov order of AR{coeffs:?}"),
            "Markovian_source_def",
            got as f64,
            want as f64,
            0.0,
        ));
    }
    Ok(report)
}

/// Chain rule against a Schur-complement oracle, nonnegativity and P1
/// monotonicity on random nonsingular models.
fn information_identities(rng: &mut ChaCha8Rng, report: &mut AuditReport) -> Result<()> {
    let mut chain_err = 0.0_f64;
    let mut cmi_err = 0.0_f64;
    let mut worst_monotone = f64::INFINITY;
    let mut worst_sign = f64::INFINITY;
    for _ in 0..MODELS {
        let dim = rng.random_range(3..=8);
        let s = random_spd(rng, dim);
        let cov = CovarianceMatrix::new(s.clone())?;
        let (a, b, c) = random_partition(rng, dim);
        let bc = b.union(&c);
        let i_a_bc = mutual_information(&cov, &a, &bc)?;
        let i_a_b = mutual_information(&cov, &a, &b)?;
        let i_a_c = mutual_information(&cov, &a, &c)?;
        let oracle = schur_cmi(&s, &a, &b, &c);
        let cmi = conditional_mutual_information(&cov, &a, &b, &c)?;
        chain_err = chain_err.max((i_a_bc - (i_a_c + oracle)).abs());
        cmi_err = cmi_err.max((cmi - oracle).abs());
        worst_monotone = worst_monotone.min(i_a_bc - i_a_b);
        worst_sign = worst_sign.min(i_a_b.min(cmi));
    }
    report.push(Check::le("chain rule I(A;B,C) = I(A;C) + I(A;B|C)", "cr", chain_err, 0.0, 1e-8));
    report.push(Check::le("conditional MI matches Schur oracle", "cr", cmi_err, 0.0, 1e-8));
    report.push(Check::le("P1 monotonicity I(A;B) <= I(A;B,C)", "P1", -worst_monotone, 0.0, 1e-9));
    report.push(Check::le("nonnegativity", "P1", -worst_sign, 0.0, 1e-9));
    Ok(())
}

fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Covariance of `(u, G u + n)` for `u ~ N(0, K)` and independent `n ~ N(0, V)`.
fn linear_joint(k: &DMatrix<f64>, g: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let (du, dy) = (k.nrows(), g.nrows());
    let kyu = g * k;
    let ky = &kyu * g.transpose() + v;
    let mut s = DMatrix::zeros(du + dy, du + dy);
    s.view_mut((0, 0), (du, du)).copy_from(k);
    s.view_mut((du, 0), (dy, du)).copy_from(&kyu);
    s.view_mut((0, du), (du, dy)).copy_from(&kyu.transpose());
    s.view_mut((du, du), (dy, dy)).copy_from(&ky);
    s
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

/// `(a₁, a₂)` correlated, `b_i = G_i a_i + n_i` with independent noises.
fn proposition_two(rng: &mut ChaCha8Rng, report: &mut AuditReport) -> Result<()> {
    let mut err = 0.0_f64;
    let mut markov = 0.0_f64;
    for _ in 0..MODELS {
        let d: Vec<usize> = (0..4).map(|_| rng.random_range(1..=2)).collect();
        let (da1, da2, db1, db2) = (d[0], d[1], d[2], d[3]);
        let ka = random_spd(rng, da1 + da2);
        let g = block_diag(&normal_matrix(rng, db1, da1), &normal_matrix(rng, db2, da2));
        let v = block_diag(&random_spd(rng, db1), &random_spd(rng, db2));
        let cov = CovarianceMatrix::new(linear_joint(&ka, &g, &v))?;
        let a1 = IndexSet::range(1, da1);
        let a2 = IndexSet::range(da1 + 1, da1 + da2);
        let b1 = IndexSet::range(da1 + da2 + 1, da1 + da2 + db1);
        let b2 = IndexSet::range(da1 + da2 + db1 + 1, da1 + da2 + db1 + db2);
        markov = markov
            .max(markov_chain_check(&cov, &a2.union(&b2), &a1, &b1, 1e-9)?.residual)
            .max(markov_chain_check(&cov, &a1.union(&b1), &a2, &b2, 1e-9)?.residual);
        let lhs = mutual_information(&cov, &a1.union(&a2), &b1.union(&b2))?;
        let rhs = mutual_information(&cov, &a1, &b1)? + mutual_information(&cov, &a2, &b2)?
            - mutual_information(&cov, &b1, &b2)?;
        err = err.max((lhs - rhs).abs());
    }
    report.push(Check::le("constructed quadruples satisfy both chains", "a1_and_b1", markov, 0.0, 1e-9));
    report.push(Check::le(
        "I(a1,a2;b1,b2) = I(a1;b1) + I(a2;b2) - I(b1;b2)",
        "a2_and_b2",
        err,
        0.0,
        1e-8,
    ));
    Ok(())
}

/// `I(a;b,d|c) = 0` iff `I(a;d|c) = 0` and `I(a;b|c,d) = 0`, on models where
/// `a` leaks into neither, only `b`, only `d`, or both.
fn proposition_three(rng: &mut ChaCha8Rng, report: &mut AuditReport) -> Result<()> {
    let mut mismatches = 0usize;
    let mut chain_err = 0.0_f64;
    for case in 0..MODELS {
        let leak_b = case % 4 == 1 || case % 4 == 3;
        let leak_d = case % 4 == 2 || case % 4 == 3;
        let (dc, da, db, dd) = (rng.random_range(1..=2), rng.random_range(1..=2), 1usize, 1usize);
        // Latent order: c, n_a, n_bd; observed a = F c + n_a, (b, d) = H c + K n_a + n_bd.
        let kc = random_spd(rng, dc);
        let kna = random_spd(rng, da);
        let knbd = random_spd(rng, db + dd);
        let latent = block_diag(&block_diag(&kc, &kna), &knbd);
        let f = normal_matrix(rng, da, dc);
        let h = normal_matrix(rng, db + dd, dc);
        let mut k = DMatrix::zeros(db + dd, da);
        if leak_b {
            k.row_mut(0).copy_from(&normal_matrix(rng, 1, da));
        }
        if leak_d {
            k.row_mut(1).copy_from(&normal_matrix(rng, 1, da));
        }
        let dl = dc + da + db + dd;
        // Observed (c, a, b, d) = T · latent.
        let mut t = DMatrix::zeros(dl, dl);
        t.view_mut((0, 0), (dc, dc)).fill_with_identity();
        t.view_mut((dc, 0), (da, dc)).copy_from(&f);
        t.view_mut((dc, dc), (da, da)).fill_with_identity();
        t.view_mut((dc + da, 0), (db + dd, dc)).copy_from(&h);
        t.view_mut((dc + da, dc), (db + dd, da)).copy_from(&k);
        t.view_mut((dc + da, dc + da), (db + dd, db + dd)).fill_with_identity();
        let cov = CovarianceMatrix::new(&t * latent * t.transpose())?;
        let c = IndexSet::range(1, dc);
        let a = IndexSet::range(dc + 1, dc + da);
        let b = IndexSet::range(dc + da + 1, dc + da + db);
        let d = IndexSet::range(dc + da + db + 1, dl);
        let whole = conditional_mutual_information(&cov, &a, &b.union(&d), &c)?;
        let first = conditional_mutual_information(&cov, &a, &d, &c)?;
        let second = conditional_mutual_information(&cov, &a, &b, &c.union(&d))?;
        chain_err = chain_err.max((whole - first - second).abs());
        let zero = |x: f64| x <= 1e-9;
        if zero(whole) != (zero(first) && zero(second)) || zero(whole) != (!leak_b && !leak_d) {
            mismatches += 1;
        }
    }
    report.push(Check::le(
        "I(a;b,d|c) = I(a;d|c) + I(a;b|c,d)",
        "prop_abcd_claim2",
        chain_err,
        0.0,
        1e-9,
    ));
    report.push(Check::le(
        "zero-MI equivalence mismatches",
        "prop_abcd_claim2",
        mismatches as f64,
        0.0,
        0.0,
    ));
    Ok(())
}

fn random_source(rng: &mut ChaCha8Rng) -> Result<ArSourceModel> {
    if rng.random_bool(0.5) {
        ArSourceModel::normalized(vec![rng.random_range(-0.9..0.9)])
    } else {
        // Stable AR(2) from two real poles.
        let (p1, p2): (f64, f64) = (rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
        ArSourceModel::normalized(vec![p1 + p2, -p1 * p2])
    }
}

/// Jointly stationary plus short-causal implies the present-sample chain.
fn stationarity_causality_implication(rng: &mut ChaCha8Rng, report: &mut AuditReport) -> Result<()> {
    let n = 6;
    let mut premise = 0usize;
    let mut violations = 0usize;
    for case in 0..MODELS {
        let src = random_source(rng)?;
        let lags: &[isize] = match case % 4 {
            0 => &[0],
            1 => &[0, 1],
            2 => &[-1, 0],
            _ => &[0, 1, 2],
        };
        let taps: Vec<(isize, f64)> = lags.iter().map(|&l| (l, rng.random_range(-1.0..1.0))).collect();
        let mut spec = LinearChannelSpec::filter(n, &taps, rng.random_range(0.05..0.5), 0);
        if case % 5 == 4 {
            for k in 0..n {
                let col = spec.ext_past + k;
                spec.gain[(k, col)] += 0.1 * k as f64;
            }
        }
        let m = spec.build(&src, "family")?;
        let stationary = joint_stationarity_audit(&window_blocks(&m, n - 1)?, DEFAULT_TOL)?.holds;
        let causal = causality_audit(&m, CausalityVariant::Short, DEFAULT_TOL)?.iter().all(|c| c.holds);
        if stationary && causal {
            premise += 1;
            if !present_sample_audit(&m, DEFAULT_TOL)?.iter().all(|c| c.holds) {
                violations += 1;
            }
        }
    }
    report.push(Check::flag(
        "family contains stationary causal models",
        "MC_for_stat_and_causality0",
        premise as f64,
        1.0,
        premise >= 1,
    ));
    report.push(Check::le(
        "stationary + causal => x(k+1..n) <-> x(k) <-> y(k)",
        "MC_for_stat_and_causality0",
        violations as f64,
        0.0,
        0.0,
    ));
    Ok(())
}

fn certificates(rng: &mut ChaCha8Rng, report: &mut AuditReport) -> Result<()> {
    let ar1 = ArSourceModel::ar1(0.9, 0.19)?;
    let m = LinearChannelSpec::filter(6, &[(0, 1.0), (1, 0.6)], 0.1, 0).build(&ar1, "fir")?;
    let cert = stationary_causal_certificate(&m, DEFAULT_TOL)?;
    report.push(Check::flag(
        "AR(1) delayed channel is geometric",
        "Kyx_A_and_Kx",
        cert.zeta.map_or(f64::NAN, |z| (z - 0.9).abs()),
        1e-6,
        cert.status == GeometricStatus::Geometric && cert.zeta.is_some_and(|z| (z - 0.9).abs() < 1e-6),
    ));
    let mut worst = 0.0_f64;
    let mut all_geometric = true;
    for _ in 0..20 {
        let a: f64 = rng.random_range(0.1..0.95) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let src = ArSourceModel::normalized(vec![a])?;
        let taps = [(0, 1.0), (1, rng.random_range(0.2..1.0))];
        let m = LinearChannelSpec::filter(6, &taps, rng.random_range(0.05..0.5), 0).build(&src, "fir")?;
        let c = stationary_causal_certificate(&m, DEFAULT_TOL)?;
        all_geometric &= c.status == GeometricStatus::Geometric;
        worst = worst.max(c.zeta.map_or(f64::INFINITY, |z| (z - a).abs()));
    }
    report.push(Check::flag(
        "random AR(1) causal models are geometric with zeta = a",
        "Kyx_A_and_Kx",
        worst,
        1e-6,
        all_geometric && worst < 1e-6,
    ));
    let ar2 = ArSourceModel::normalized(vec![0.5, -0.3])?;
    let m = LinearChannelSpec::filter(5, &[(0, 1.0)], 0.1, 0).build(&ar2, "awgn")?;
    let cert = stationary_causal_certificate(&m, DEFAULT_TOL)?;
    report.push(Check::flag(
        "AR(2) memoryless channel is inconclusive",
        "Kyx_A_and_Kx",
        cert.a21.abs(),
        DEFAULT_TOL,
        cert.status == GeometricStatus::MemorylessInconclusive,
    ));
    let m = LinearChannelSpec::filter(5, &[(0, 1.0), (1, 0.8)], 0.1, 0).build(&ar2, "fir")?;
    let cert = stationary_causal_certificate(&m, DEFAULT_TOL)?;
    let residual = cert.geometric_residual.unwrap_or(0.0);
    report.push(Check::flag(
        "AR(2) mixing channel is violated",
        "Kyx_A_and_Kx",
        residual,
        0.01,
        cert.status == GeometricStatus::Violated && residual > 0.01,
    ));
    Ok(())
}
