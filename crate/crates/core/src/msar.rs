//! Two-regime Markov-switching autoregression: parameter types, chain and
//! path simulation, and the closed-form moments of the implied marginal
//! normal mixture.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::ar::min_root_modulus;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Latent regime of the two-state chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Regime {
    One = 1,
    Two = 2,
}

impl Regime {
    pub fn label(self) -> u8 {
        self as u8
    }
}

/// One-step transition matrix of a two-state chain, stored as its diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    p11: f64,
    p22: f64,
}

impl TransitionMatrix {
    pub fn new(p11: f64, p22: f64) -> Result<Self> {
        for (name, p) in [("p11", p11), ("p22", p22)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p11, p22 })
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p22(&self) -> f64 {
        self.p22
    }

    pub fn p12(&self) -> f64 {
        1.0 - self.p11
    }

    pub fn p21(&self) -> f64 {
        1.0 - self.p22
    }

    /// Row-stochastic matrix `[[p11, p12], [p21, p22]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.p11, self.p12()], [self.p21(), self.p22]]
    }

    fn ergodicity_violation(&self) -> Option<&'static str> {
        if self.p11 >= 1.0 {
            Some("p11 must be < 1")
        } else if self.p22 >= 1.0 {
            Some("p22 must be < 1")
        } else if self.p11 + self.p22 <= 0.0 {
            Some("p11 + p22 must be > 0")
        } else {
            None
        }
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodicity_violation().is_none()
    }

    fn require_ergodic(&self) -> Result<()> {
        match self.ergodicity_violation() {
            None => Ok(()),
            Some(reason) => Err(Error::NonErgodic { p11: self.p11, p22: self.p22, reason }),
        }
    }
}

/// Regime-specific means and standard deviations.
///
/// Zero standard deviations are accepted so that noise-free paths can be
/// simulated; the moment calculator rejects a mixture with zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl RegimeParams {
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::InvalidInput("regime means must be finite".into()));
        }
        if !(sigma1 >= 0.0 && sigma2 >= 0.0 && sigma1.is_finite() && sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "regime standard deviations must be finite and non-negative (got {sigma1}, {sigma2})"
            )));
        }
        Ok(Self { mu1, mu2, sigma1, sigma2 })
    }

    /// Regimes `(mu1, sigma1)` and `(mu1 + delta_mu, sigma1 + delta_sigma)`.
    pub fn from_separations(mu1: f64, sigma1: f64, delta_mu: f64, delta_sigma: f64) -> Result<Self> {
        Self::new(mu1, mu1 + delta_mu, sigma1, sigma1 + delta_sigma)
    }

    pub fn delta_mu(&self) -> f64 {
        self.mu2 - self.mu1
    }

    pub fn delta_sigma(&self) -> f64 {
        self.sigma2 - self.sigma1
    }

    fn mean(&self, s: Regime) -> f64 {
        match s {
            Regime::One => self.mu1,
            Regime::Two => self.mu2,
        }
    }

    fn sd(&self, s: Regime) -> f64 {
        match s {
            Regime::One => self.sigma1,
            Regime::Two => self.sigma2,
        }
    }
}

/// Full parameter vector of the switching autoregression.
#[derive(Debug, Clone, PartialEq)]
pub struct MsarSpec {
    pub regimes: RegimeParams,
    pub transition: TransitionMatrix,
    pub phi: Vec<f64>,
}

impl MsarSpec {
    pub fn new(regimes: RegimeParams, transition: TransitionMatrix, phi: Vec<f64>) -> Result<Self> {
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("AR coefficients must be finite".into()));
        }
        Ok(Self { regimes, transition, phi })
    }

    /// Linear AR(r) model with N(0, sigma^2) innovations around `mean`.
    pub fn linear(mean: f64, sigma: f64, phi: Vec<f64>) -> Result<Self> {
        Self::new(RegimeParams::new(mean, mean, sigma, sigma)?, TransitionMatrix::new(0.5, 0.5)?, phi)
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// Default number of discarded start-up observations.
    pub fn default_burn_in(&self) -> usize {
        100 + 10 * self.order()
    }
}

/// Mean, variance, signed skewness and excess kurtosis of a two-component
/// normal mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Long-run regime frequencies `(pi1, pi2)`.
pub fn ergodic_probabilities(p: &TransitionMatrix) -> Result<(f64, f64)> {
    p.require_ergodic()?;
    let pi1 = (1.0 - p.p22) / (2.0 - p.p11 - p.p22);
    Ok((pi1, 1.0 - pi1))
}

fn draw_initial<R: RngCore + ?Sized>(pi1: f64, rng: &mut R) -> Regime {
    if rng.random::<f64>() < pi1 {
        Regime::One
    } else {
        Regime::Two
    }
}

fn step<R: RngCore + ?Sized>(p: &TransitionMatrix, from: Regime, rng: &mut R) -> Regime {
    let u: f64 = rng.random();
    match from {
        Regime::One if u < p.p11 => Regime::One,
        Regime::One => Regime::Two,
        Regime::Two if u < p.p22 => Regime::Two,
        Regime::Two => Regime::One,
    }
}

/// Simulate `t` states, starting from the ergodic distribution.
pub fn simulate_chain<R: RngCore + ?Sized>(p: &TransitionMatrix, t: usize, rng: &mut R) -> Result<Vec<Regime>> {
    if t == 0 {
        return Err(Error::InvalidInput("chain length must be at least 1".into()));
    }
    let (pi1, _) = ergodic_probabilities(p)?;
    let mut states = Vec::with_capacity(t);
    let mut s = draw_initial(pi1, rng);
    states.push(s);
    for _ in 1..t {
        s = step(p, s, rng);
        states.push(s);
    }
    Ok(states)
}

/// A simulated switching path with its latent regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct MsarPath {
    pub y: Vec<f64>,
    pub states: Vec<Regime>,
}

/// Simulate `t` observations of the switching AR, discarding the default
/// burn-in.
pub fn simulate_msar<R: RngCore + ?Sized>(spec: &MsarSpec, t: usize, rng: &mut R) -> Result<Vec<f64>> {
    simulate_msar_path(spec, t, spec.default_burn_in(), rng).map(|p| p.y)
}

/// Simulate with an explicit burn-in.
///
/// Two seeds are drawn from `rng`: one drives the chain, the other the
/// innovations. The innovation sequence therefore does not depend on the
/// transition probabilities.
pub fn simulate_msar_path<R: RngCore + ?Sized>(
    spec: &MsarSpec,
    t: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<MsarPath> {
    if t == 0 {
        return Err(Error::InvalidInput("path length must be at least 1".into()));
    }
    let modulus = min_root_modulus(&spec.phi);
    if modulus <= 1.0 {
        return Err(Error::NonStationary { min_modulus: modulus });
    }
    let chain_seed = rng.next_u64();
    let noise_seed = rng.next_u64();
    let total = burn_in + t;
    let states = simulate_chain(&spec.transition, total, &mut rng_from_seed(chain_seed))?;
    let mut noise = rng_from_seed(noise_seed);

    let r = spec.order();
    // Deviations y_t - mu_{s_t}; pre-sample deviations are zero.
    let mut dev = vec![0.0; r + total];
    let mut y = Vec::with_capacity(t);
    for (i, &s) in states.iter().enumerate() {
        let eps: f64 = noise.sample(StandardNormal);
        let pos = r + i;
        let ar: f64 = spec.phi.iter().enumerate().map(|(k, phi)| phi * dev[pos - 1 - k]).sum();
        dev[pos] = ar + spec.regimes.sd(s) * eps;
        if i >= burn_in {
            y.push(spec.regimes.mean(s) + dev[pos]);
        }
    }
    Ok(MsarPath { y, states: states[burn_in..].to_vec() })
}

/// Closed-form moments of `pi1 N(mu1, sigma1^2) + pi2 N(mu2, sigma2^2)`.
pub fn mixture_moments(regimes: &RegimeParams, pi1: f64) -> Result<MixtureMoments> {
    if !(pi1 > 0.0 && pi1 < 1.0) {
        return Err(Error::InvalidInput(format!("pi1 = {pi1} must lie in (0, 1)")));
    }
    let pi2 = 1.0 - pi1;
    let RegimeParams { mu1, mu2, sigma1, sigma2 } = *regimes;
    let (v1, v2) = (sigma1 * sigma1, sigma2 * sigma2);
    let dmu = mu2 - mu1;
    let dmu2 = dmu * dmu;
    let w = pi1 * pi2;

    let mean = pi1 * mu1 + pi2 * mu2;
    let variance = pi1 * v1 + pi2 * v2 + w * dmu2;
    if variance <= 0.0 {
        return Err(Error::InvalidInput("mixture has zero variance".into()));
    }
    let skewness = w * (mu1 - mu2) * (3.0 * (v1 - v2) + (1.0 - 2.0 * pi1) * dmu2) / variance.powf(1.5);
    let a = 3.0 * w * (v2 - v1).powi(2)
        + 6.0 * dmu2 * w * (2.0 * pi1 - 1.0) * (v2 - v1)
        + w * dmu2 * dmu2 * (1.0 - 6.0 * w);
    let excess_kurtosis = a / (variance * variance);
    Ok(MixtureMoments { mean, variance, skewness, excess_kurtosis })
}

/// Means of the four-state mixture followed by `z_t = y_t - phi y_{t-1}`.
pub fn filtered_mixture_components(mu1: f64, mu2: f64, phi: f64) -> [f64; 4] {
    [mu1 * (1.0 - phi), mu2 - phi * mu1, mu1 - phi * mu2, mu2 * (1.0 - phi)]
}

/// Number of distinct values among the filtered means.
pub fn distinct_component_count(components: &[f64; 4]) -> usize {
    let mut sorted = components.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// Transition matrix of the four-state chain `S*_t` indexing
/// `(S_t, S_{t-1})` pairs.
pub fn four_state_transition(p: &TransitionMatrix) -> [[f64; 4]; 4] {
    let top = [p.p11, p.p12(), 0.0, 0.0];
    let bottom = [0.0, 0.0, p.p21(), p.p22];
    [top, bottom, top, bottom]
}
