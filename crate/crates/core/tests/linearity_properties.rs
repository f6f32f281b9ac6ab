use msar_mc::ar::ols_ar_fit;
use msar_mc::coeffs::LogisticCoeffTable;
use msar_mc::grid::build_grid;
use msar_mc::linearity::{linearity_battery, lmc_test, mmc_surface, mmc_test, ReplicateSet, TestMethod};
use msar_mc::mc::{mc_pvalue_sorted, Combination};
use msar_mc::msar::{simulate_msar, MsarSpec};
use msar_mc::rng::{derive_seed, rng_from_seed};

fn ar1(t: usize, phi: f64, seed: u64) -> Vec<f64> {
    simulate_msar(&MsarSpec::linear(0.0, 1.0, vec![phi]).unwrap(), t, &mut rng_from_seed(seed)).unwrap()
}

#[test]
fn lmc_invariant_to_location_and_scale() {
    let table = LogisticCoeffTable::default();
    for seed in 0..10 {
        let y = ar1(100, 0.6, seed);
        let z: Vec<f64> = y.iter().map(|v| 0.25 * v - 40.0).collect();
        for c in [Combination::Min, Combination::Product] {
            let a = lmc_test(&y, 1, 100, c, &table, seed).unwrap();
            let b = lmc_test(&z, 1, 100, c, &table, seed).unwrap();
            assert_eq!(a.p_value, b.p_value, "seed {seed}");
        }
    }
}

#[test]
fn grid_points_ranked_against_one_replicate_set() {
    let table = LogisticCoeffTable::default();
    let y = ar1(120, 0.5, 4);
    let fit = ols_ar_fit(&y, 1).unwrap();
    let grid = build_grid(&fit, 9, true).unwrap();
    let reps = ReplicateSet::simulate(119, 100, &table, 17).unwrap();
    let surface = mmc_surface(&y, &grid, Combination::Min, &table, &reps).unwrap();
    let mut sorted = reps.combined(Combination::Min);
    sorted.sort_by(f64::total_cmp);
    let tie_seed = derive_seed(17, &[0x5449_4553]);
    for point in &surface {
        assert_eq!(mc_pvalue_sorted(point.statistic, &sorted, tie_seed).p_value, point.p_value);
    }
    let mmc = mmc_test(&y, 1, 100, Combination::Min, &table, &grid, 17).unwrap();
    let max = surface.iter().map(|p| p.p_value).fold(0.0, f64::max);
    assert_eq!(mmc.p_value, max);
    let first = surface.iter().find(|p| p.p_value == max).unwrap();
    assert_eq!(mmc.phi_at_report, first.phi);
}

#[test]
fn reports_identical_across_thread_counts() {
    let table = LogisticCoeffTable::default();
    let y = ar1(100, 0.3, 9);
    let fit = ols_ar_fit(&y, 2).unwrap();
    let grid = build_grid(&fit, 7, true).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| linearity_battery(&y, 2, 100, &TestMethod::ALL, &table, Some(&grid), 5).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
}

#[test]
fn lmc_level_near_nominal_on_small_run() {
    let table = LogisticCoeffTable::default();
    let reps = 400;
    let rejections = (0..reps)
        .filter(|&i| lmc_test(&ar1(100, 0.1, 1000 + i), 1, 100, Combination::Min, &table, i).unwrap().p_value <= 0.05)
        .count();
    let rate = rejections as f64 / reps as f64;
    let se = (0.05f64 * 0.95 / reps as f64).sqrt();
    assert!((rate - 0.05).abs() <= 3.0 * se, "rate {rate}");
}
