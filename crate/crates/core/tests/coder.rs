use crdlab_core::coder::{design_coder, dither_noise_audit, encode, evaluate, synthesize_ar1, CoderConfig};
use crdlab_core::ArSourceModel;

#[test]
fn correlated_design_point_meets_both_gaps() {
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let e = evaluate(&m, 0.1, 200_000, 7).unwrap();
    assert!(e.report.passed(), "{:#?}", e.report.failures().collect::<Vec<_>>());
    assert!(e.entropy_gap_bits <= 0.304);
    assert!(e.prefix_gap_bits <= 1.254);
    assert!((e.stats.mse / 0.1 - 1.0).abs() < 0.03);
}

#[test]
fn iid_design_point_distortion() {
    let m = ArSourceModel::new(vec![0.0], 1.0).unwrap();
    let e = evaluate(&m, 0.5, 200_000, 11).unwrap();
    assert!((e.stats.mse / 0.5 - 1.0).abs() < 0.03, "{}", e.stats.mse);
}

#[test]
fn zero_input_error_is_scaled_noise() {
    // var(u) = 0 leaves only β²θ.
    let cfg = CoderConfig {
        step: 2.0,
        scaling: 0.5,
        predictor: 0.0,
        dither_seed: 5,
        target_distortion: 0.5,
    };
    let e = encode(&vec![0.0; 100_000], &cfg).unwrap();
    assert!(e.indices.iter().all(|i| i.abs() <= 1));
    let want = 0.25 * 4.0 / 12.0;
    assert!((e.stats.mse / want - 1.0).abs() < 0.02, "{}", e.stats.mse);
}

#[test]
fn encoding_is_deterministic() {
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let cfg = design_coder(&m, 0.1, 9).unwrap();
    let x = synthesize_ar1(&m, 20_000, 9).unwrap();
    let a = encode(&x, &cfg).unwrap();
    let b = encode(&x, &cfg).unwrap();
    assert_eq!(a.bitstream, b.bitstream);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn noise_variance_scales_with_step_squared() {
    let m = ArSourceModel::new(vec![0.0], 1.0).unwrap();
    let x = synthesize_ar1(&m, 200_000, 2).unwrap();
    let run = |step: f64| {
        let cfg = CoderConfig {
            step,
            scaling: 1.0,
            predictor: 0.0,
            dither_seed: 1,
            target_distortion: step * step / 12.0,
        };
        let e = encode(&x, &cfg).unwrap();
        assert!(dither_noise_audit(&e.noise, &e.inputs, step).unwrap().passed());
        e.stats.error_variance
    };
    let (v1, v2) = (run(1.0), run(2.0));
    assert!((v1 / (1.0 / 12.0) - 1.0).abs() < 0.02);
    assert!((v2 / v1 / 4.0 - 1.0).abs() < 0.02);
}

#[test]
fn decoder_output_depends_only_on_received_prefix() {
    let m = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let cfg = design_coder(&m, 0.1, 4).unwrap();
    let x = synthesize_ar1(&m, 2_000, 4).unwrap();
    let full = encode(&x, &cfg).unwrap();
    let short = encode(&x[..700], &cfg).unwrap();
    assert_eq!(short.reconstruction[..], full.reconstruction[..700]);
    assert_eq!(short.indices[..], full.indices[..700]);
}
