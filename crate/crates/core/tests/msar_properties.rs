use msar_mc::msar::{
    distinct_component_count, ergodic_probabilities, filtered_mixture_components, four_state_transition,
    mixture_moments, simulate_chain, simulate_msar, MsarSpec, Regime, RegimeParams, TransitionMatrix,
};
use msar_mc::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

proptest! {
    #[test]
    fn ergodic_probabilities_form_a_distribution(p11 in 0.0..0.999f64, p22 in 0.0..0.999f64) {
        prop_assume!(p11 + p22 > 1e-6);
        let (pi1, pi2) = ergodic_probabilities(&TransitionMatrix::new(p11, p22).unwrap()).unwrap();
        prop_assert!((pi1 + pi2 - 1.0).abs() < 1e-15);
        prop_assert!(pi1 > 0.0 && pi1 < 1.0 && pi2 > 0.0 && pi2 < 1.0);
    }

    #[test]
    fn four_state_chain_is_stochastic_with_product_stationary_law(p11 in 0.05..0.95f64, p22 in 0.05..0.95f64) {
        let p = TransitionMatrix::new(p11, p22).unwrap();
        let m = four_state_transition(&p);
        for row in &m {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // power iteration oracle for the stationary vector
        let mut v = [0.25; 4];
        for _ in 0..5000 {
            let mut next = [0.0; 4];
            for i in 0..4 {
                for j in 0..4 {
                    next[j] += v[i] * m[i][j];
                }
            }
            v = next;
        }
        let (pi1, pi2) = ergodic_probabilities(&p).unwrap();
        let pm = p.matrix();
        // state order: (1,1), (2,1), (1,2), (2,2) as (current, previous)
        let expected = [pi1 * pm[0][0], pi1 * pm[0][1], pi2 * pm[1][0], pi2 * pm[1][1]];
        for k in 0..4 {
            prop_assert!((v[k] - expected[k]).abs() < 1e-9, "{v:?} vs {expected:?}");
        }
    }

    #[test]
    fn filtered_component_counts(mu1 in -3.0..3.0f64, gap in 0.1..3.0f64, phi in -0.95..0.95f64) {
        prop_assume!(phi.abs() > 1e-6);
        // mu1 != mu2: the four means coincide only at phi in {0, 1, -1}
        let c = filtered_mixture_components(mu1, mu1 + gap, phi);
        prop_assert_eq!(distinct_component_count(&c), 4);
        prop_assert_eq!(distinct_component_count(&filtered_mixture_components(mu1, mu1 + gap, 0.0)), 2);
    }
}

#[test]
fn filtered_components_hand_cases() {
    assert_eq!(distinct_component_count(&filtered_mixture_components(0.0, 1.0, 0.0)), 2);
    assert_eq!(distinct_component_count(&filtered_mixture_components(0.0, 1.0, 0.5)), 4);
    assert_eq!(distinct_component_count(&filtered_mixture_components(1.0, 2.0, 1.0)), 3);
    assert_eq!(distinct_component_count(&filtered_mixture_components(1.0, 2.0, -1.0)), 3);
}

#[test]
fn chain_frequencies_match_ergodic_law() {
    let p = TransitionMatrix::new(0.9, 0.5).unwrap();
    let states = simulate_chain(&p, 400_000, &mut rng_from_seed(12)).unwrap();
    let freq = states.iter().filter(|s| **s == Regime::One).count() as f64 / states.len() as f64;
    let (pi1, _) = ergodic_probabilities(&p).unwrap();
    // effective sample size shrinks by (1 + lambda) / (1 - lambda), lambda = p11 + p22 - 1
    let lambda = 0.4;
    let se = (pi1 * (1.0 - pi1) / states.len() as f64 * (1.0 + lambda) / (1.0 - lambda)).sqrt();
    assert!((freq - pi1).abs() < 4.0 * se, "{freq} vs {pi1}");
}

#[test]
fn path_invariant_to_transition_without_switching() {
    let regimes = RegimeParams::new(0.7, 0.7, 1.3, 1.3).unwrap();
    let a = MsarSpec::new(regimes, TransitionMatrix::new(0.9, 0.9).unwrap(), vec![0.5, -0.2]).unwrap();
    let b = MsarSpec::new(regimes, TransitionMatrix::new(0.2, 0.6).unwrap(), vec![0.5, -0.2]).unwrap();
    let ya = simulate_msar(&a, 5000, &mut rng_from_seed(99)).unwrap();
    let yb = simulate_msar(&b, 5000, &mut rng_from_seed(99)).unwrap();
    assert_eq!(ya, yb);
}

/// Sample moments and influence-function standard errors.
fn moments_with_se(x: &[f64]) -> ([f64; 4], [f64; 4]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    let sd = m2.sqrt();
    let skew = m3 / sd.powi(3);
    let kurt = m4 / (m2 * m2);
    let mut acc = [0.0; 4];
    for v in x {
        let d = v - mean;
        let z = d / sd;
        let inf = [
            d,
            d * d - m2,
            z.powi(3) - 3.0 * z - 1.5 * skew * (z * z - 1.0),
            z.powi(4) - kurt - 4.0 * skew * z - 2.0 * kurt * (z * z - 1.0),
        ];
        for k in 0..4 {
            acc[k] += inf[k] * inf[k];
        }
    }
    let se = acc.map(|s| (s / n).sqrt() / n.sqrt());
    ([mean, m2, skew, kurt - 3.0], se)
}

#[test]
fn mixture_moments_match_simulation() {
    let mut rng = rng_from_seed(2024);
    for (pi1, dmu, dsig) in [(0.5, 2.0, 0.0), (0.8333, 2.0, 1.0), (0.2, -1.5, 0.7), (0.65, 0.0, 1.0)] {
        let reg = RegimeParams::from_separations(0.3, 1.0, dmu, dsig).unwrap();
        let x: Vec<f64> = (0..400_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if rng.random::<f64>() < pi1 {
                    reg.mu1 + reg.sigma1 * z
                } else {
                    reg.mu2 + reg.sigma2 * z
                }
            })
            .collect();
        let (est, se) = moments_with_se(&x);
        let m = mixture_moments(&reg, pi1).unwrap();
        let closed = [m.mean, m.variance, m.skewness, m.excess_kurtosis];
        for k in 0..4 {
            assert!(
                (est[k] - closed[k]).abs() <= 3.0 * se[k],
                "pi1={pi1} dmu={dmu} dsig={dsig} moment {k}: {} vs {} (se {})",
                est[k],
                closed[k],
                se[k]
            );
        }
    }
}
