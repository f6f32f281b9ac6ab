use msar_harness::config::{ExperimentConfig, Profile};
use msar_harness::study::{run_study, Method};
use msar_mc::linearity::TestMethod;

fn null_config(t: usize, phi: f64, reps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_profile(Profile::Desk);
    cfg.replications = reps;
    cfg.sample_sizes = vec![t];
    cfg.phis = vec![phi];
    cfg.separations = vec![];
    cfg.transitions = vec![];
    cfg.methods = TestMethod::ALL.iter().map(|&m| Method::Linearity(m)).collect();
    cfg.seed = 7_000 + t as u64 + (phi * 10.0) as u64;
    cfg
}

#[test]
fn lmc_level_and_mmc_conservativeness() {
    let reps = 1000;
    let se = (0.05f64 * 0.95 / reps as f64).sqrt();
    let mut failures = Vec::new();
    for t in [100, 200] {
        for phi in [0.1, 0.9] {
            for row in run_study(&null_config(t, phi, reps)).unwrap() {
                let rate = row.rejection_rate().unwrap();
                let ok = match row.method {
                    Method::Linearity(m) if m.is_maximized() => rate <= 0.05 + 3.0 * se,
                    _ => (rate - 0.05).abs() <= 0.02,
                };
                println!("T={t} phi={phi} {}: {:.1}%", row.method, 100.0 * rate);
                if !ok {
                    failures.push(format!("T={t} phi={phi} {}: {rate}", row.method));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}
