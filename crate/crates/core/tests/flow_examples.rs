mod common;

use common::fixture;
use heatflow::bell::faa_di_bruno_exp;
use heatflow::cli::load_mixture_spec;
use heatflow::conjectures::{
    evaluate_conjectures, spectral_flow_derivatives, ChainVerdict, Method,
};
use heatflow::functionals::{entropy_time_derivatives, flow_functionals, QuadratureConfig};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn bimodal_second_entropy_derivative_matches_spectral() {
    let spec = load_mixture_spec(&fixture("symmetric_bimodal")).unwrap();
    let cfg = QuadratureConfig::default();
    let analytic = entropy_time_derivatives(&spec.flow(0.5).unwrap(), 2, &cfg).unwrap();
    let spectral = spectral_flow_derivatives(&spec, 0.5, 2, &cfg).unwrap();
    assert!(spectral.resolved);
    let (a, s) = (analytic[1].value, spectral.entropy_derivatives[1].value);
    assert!(close(a, s, 1e-6), "{a} vs {s}");
}

#[test]
fn bimodal_flow_table_at_one_agrees_across_methods() {
    let spec = load_mixture_spec(&fixture("symmetric_bimodal")).unwrap();
    let cfg = QuadratureConfig::default();
    let ff = flow_functionals(&spec.flow(1.0).unwrap(), 4, &cfg).unwrap();
    let spectral = spectral_flow_derivatives(&spec, 1.0, 4, &cfg).unwrap();
    assert!(ff.y_dot > 0.0);
    assert!(close(ff.entropy.value, spectral.entropy, 1e-10));
    let derivs = ff.y_dot_derivatives();
    for m in 1..=4 {
        let h = spectral.entropy_derivatives[m - 1].value;
        assert!(
            close(ff.entropy_derivatives[m - 1].value, h, 1e-6),
            "H m = {m}"
        );
        let n = spectral.entropy_power_derivatives[m - 1].value;
        let fdb = faa_di_bruno_exp(ff.y, &derivs, m).unwrap();
        assert!(
            (fdb - n).abs() <= 1e-6 * ff.entropy_power(),
            "N m = {m}: {fdb} vs {n}"
        );
    }
}

#[test]
fn bimodal_evidence_run_passes_every_flag() {
    let spec = load_mixture_spec(&fixture("symmetric_bimodal")).unwrap();
    let grid = [0.1, 0.3, 1.0, 3.0];
    let report =
        evaluate_conjectures(&spec, &grid, 4, &QuadratureConfig::default(), Method::Both).unwrap();
    assert_eq!(report.cells.len(), 16);
    assert!(report.all_flags_pass());
    assert!(report.cells.iter().all(|c| c.ep_ok && c.gcm_ok && c.mck_ok));
    for point in &report.points {
        let chain = point.chain.as_ref().expect("chain evaluated");
        assert_ne!(chain.verdict, ChainVerdict::Violated);
        if chain.ep_premise.iter().all(|&ok| ok) {
            assert!(
                chain.intermediate_holds.iter().all(|&ok| ok),
                "t = {}",
                point.t
            );
        }
        assert!(chain.cramer_rao_holds);
    }
}
