//! Seeded random channel ensembles for property checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{DmcIcChannel, GaussianIcChannel, RatePrimitives};

/// Seed used when none is given on the command line or in `IC_RATES_SEED`.
pub const DEFAULT_SEED: u64 = 0x1c_2a7e5;

/// Gaussian channel with gain components uniform in `[-gain_bound, gain_bound]`
/// and power uniform in `power`.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, gain_bound: f64, power: (f64, f64)) -> GaussianIcChannel {
    let mut gain = || Complex64::new(rng.gen_range(-gain_bound..=gain_bound), rng.gen_range(-gain_bound..=gain_bound));
    let h = [[gain(), gain()], [gain(), gain()]];
    GaussianIcChannel::new(h, rng.gen_range(power.0..=power.1))
}

/// Binary-input, binary-output channel with random transition pmfs and random
/// input pmfs bounded away from zero.
pub fn random_binary_dmc<R: Rng + ?Sized>(rng: &mut R) -> DmcIcChannel {
    let mut input = || {
        let q = rng.gen_range(0.05..0.95);
        vec![q, 1.0 - q]
    };
    let px1 = input();
    let px2 = input();
    let mut p = Vec::with_capacity(16);
    for _ in 0..4 {
        let weights: Vec<f64> = (0..4).map(|_| rng.gen_range(1e-3..1.0)).collect();
        let total: f64 = weights.iter().sum();
        p.extend(weights.iter().map(|w| w / total));
    }
    DmcIcChannel {
        nx: [2, 2],
        ny: [2, 2],
        p,
        px1,
        px2,
    }
}

/// Smallest gap between the two sides of any comparison either closed-form
/// classifier can consult.
pub fn boundary_distance(p: &RatePrimitives) -> f64 {
    [
        p.r_ian[0][1] - p.r_if[1][1],
        p.r_ian[1][0] - p.r_if[0][0],
        p.r_ian[1][1] - p.r_if[0][1],
        p.r_ian[0][0] - p.r_if[1][0],
        p.mac_sum[0] - p.mac_sum[1],
        p.r_if[0][0] - p.r_if[1][0],
        p.r_if[1][1] - p.r_if[0][1],
    ]
    .into_iter()
    .map(f64::abs)
    .fold(f64::INFINITY, f64::min)
}

/// Deterministic stream of Gaussian channels that stay at least `margin` away
/// from every classifier boundary.
pub struct GaussianEnsemble {
    rng: ChaCha8Rng,
    gain_bound: f64,
    power: (f64, f64),
    margin: f64,
    /// Draws discarded for lying too close to a boundary.
    pub resampled: usize,
}

impl GaussianEnsemble {
    pub fn new(seed: u64, gain_bound: f64, power: (f64, f64), margin: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            gain_bound,
            power,
            margin,
            resampled: 0,
        }
    }
}

impl Iterator for GaussianEnsemble {
    type Item = (GaussianIcChannel, RatePrimitives);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let ch = random_gaussian(&mut self.rng, self.gain_bound, self.power);
            let p = ch.primitives().expect("generated channel is valid");
            if boundary_distance(&p) > self.margin {
                return Some((ch, p));
            }
            self.resampled += 1;
        }
    }
}
