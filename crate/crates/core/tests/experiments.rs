use fracgrad_core::report::Status;
use fracgrad_core::verify::{self, counterexample_profile, ExperimentConfig, EXPERIMENTS};
use fracgrad_core::Error;

#[test]
fn cheap_experiments_pass_on_defaults() {
    let cfg = ExperimentConfig::default();
    for name in ["lorentz", "sobolev", "classical", "counterexample"] {
        let o = verify::run(name, &cfg).unwrap();
        assert_ne!(o.report.overall(), Status::Fail, "{}", o.report.summary());
        assert_eq!(o.report.experiment, name);
    }
}

#[test]
fn reports_are_deterministic() {
    let s = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let a = counterexample_profile(2, &s, 11).unwrap();
    let b = counterexample_profile(2, &s, 11).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    let c = counterexample_profile(2, &s, 12).unwrap();
    assert_ne!(a.report.to_json(), c.report.to_json(), "seed must reach the random points");
}

#[test]
fn three_dimensional_slope_is_two_pi() {
    let s = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let o = counterexample_profile(3, &s, 1).unwrap();
    let fit = o.report.fit("center").unwrap();
    assert!((fit.slope - 2.0 * std::f64::consts::PI).abs() < 0.02 * 2.0 * std::f64::consts::PI, "{}", fit.slope);
}

#[test]
fn bad_inputs_are_rejected() {
    let cfg = ExperimentConfig::default();
    assert!(matches!(verify::run("nope", &cfg), Err(Error::Config(_))));
    let mut bad = cfg.clone();
    bad.counterexample.d = 4;
    assert!(matches!(verify::run("counterexample", &bad), Err(Error::Config(_))));
    // Too few offsets, or too short a span, in the fit range.
    assert!(counterexample_profile(2, &[1e-2, 1e-3], 0).is_err());
    assert!(counterexample_profile(2, &[1e-2, 5e-3, 2e-3], 0).is_err());
    assert!(counterexample_profile(2, &[1e-2, 0.0], 0).is_err());
    assert_eq!(EXPERIMENTS.len(), 11);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = ExperimentConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    let err = serde_json::from_str::<ExperimentConfig>(r#"{"lemma1": {"alphaz": [0.5]}}"#).unwrap_err();
    assert!(err.to_string().contains("alphaz"));
}
