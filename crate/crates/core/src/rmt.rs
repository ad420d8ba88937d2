//! Metropolis sampling of eigenangles for U(N), SO(2N), SO(2N+1) and
//! USp(2N) from their Weyl densities, and the one-level statistic
//! `Σ_j φ(θ_j M / 2π)` compared against the density kernels.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::registry::{Named, Registry};
use crate::testfn::Fejer;

/// `(cos θ, sin θ)`.
type Trig = (f64, f64);

/// An eigenangle ensemble given by its unnormalized Weyl density
/// `∏_{j<k} pair(θ_j, θ_k) · ∏_j single(θ_j)`.
pub trait Ensemble: Named + Send + Sync {
    fn pair(&self, a: Trig, b: Trig) -> f64;

    fn single(&self, theta: f64) -> f64;

    /// Angles live in `[0, upper]` (or on the circle of that length when periodic).
    fn upper(&self) -> f64;

    fn periodic(&self) -> bool;

    /// Total number of eigenvalues `M` of the underlying matrix.
    fn eigen_count(&self, n: usize) -> usize;

    /// Contribution of one sample to the one-level statistic.
    fn statistic(&self, angles: &[f64], phi: &Fejer) -> f64;

    fn in_domain(&self, theta: f64) -> bool {
        (0.0..=self.upper()).contains(&theta) && (!self.periodic() || theta < self.upper())
    }

    fn log_density(&self, angles: &[f64]) -> Result<f64> {
        if let Some(bad) = angles.iter().find(|&&t| !self.in_domain(t)) {
            return invalid(format!("angle {bad} outside [0, {}]", self.upper()));
        }
        let trig: Vec<Trig> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
        let mut acc = 0.0;
        for (j, &t) in angles.iter().enumerate() {
            acc += self.single(t).ln();
            for k in (j + 1)..angles.len() {
                acc += self.pair(trig[j], trig[k]).ln();
            }
        }
        Ok(acc)
    }

    /// Move a proposal back into the domain.
    fn fold(&self, theta: f64) -> f64 {
        if self.periodic() {
            return theta.rem_euclid(self.upper());
        }
        let mut t = theta;
        loop {
            if t < 0.0 {
                t = -t;
            } else if t > self.upper() {
                t = 2.0 * self.upper() - t;
            } else {
                return t;
            }
        }
    }
}

/// Statistic for the paired ensembles: each sampled `θ` stands for the
/// conjugate pair `±θ`.
fn paired_statistic(angles: &[f64], phi: &Fejer, m: usize) -> f64 {
    let scale = m as f64 / TAU;
    2.0 * angles.iter().map(|t| phi.eval(t * scale)).sum::<f64>()
}

fn cos_pair(a: Trig, b: Trig) -> f64 {
    let d = a.0 - b.0;
    d * d
}

pub struct UnitaryEnsemble;
pub struct SoEvenEnsemble;
pub struct SoOddEnsemble;
pub struct SymplecticEnsemble;

impl Named for UnitaryEnsemble {
    fn name(&self) -> &'static str {
        "U"
    }
}

impl Ensemble for UnitaryEnsemble {
    fn pair(&self, a: Trig, b: Trig) -> f64 {
        // |e^{ia} − e^{ib}|² = 2 − 2cos(a − b)
        2.0 - 2.0 * (a.0 * b.0 + a.1 * b.1)
    }
    fn single(&self, _theta: f64) -> f64 {
        1.0
    }
    fn upper(&self) -> f64 {
        TAU
    }
    fn periodic(&self) -> bool {
        true
    }
    fn eigen_count(&self, n: usize) -> usize {
        n
    }
    fn statistic(&self, angles: &[f64], phi: &Fejer) -> f64 {
        let scale = angles.len() as f64 / TAU;
        angles
            .iter()
            .map(|&t| {
                let c = if t > PI { t - TAU } else { t };
                phi.eval(c * scale)
            })
            .sum()
    }
}

impl Named for SoEvenEnsemble {
    fn name(&self) -> &'static str {
        "SOeven"
    }
}

impl Ensemble for SoEvenEnsemble {
    fn pair(&self, a: Trig, b: Trig) -> f64 {
        cos_pair(a, b)
    }
    fn single(&self, _theta: f64) -> f64 {
        1.0
    }
    fn upper(&self) -> f64 {
        PI
    }
    fn periodic(&self) -> bool {
        false
    }
    fn eigen_count(&self, n: usize) -> usize {
        2 * n
    }
    fn statistic(&self, angles: &[f64], phi: &Fejer) -> f64 {
        paired_statistic(angles, phi, 2 * angles.len())
    }
}

impl Named for SoOddEnsemble {
    fn name(&self) -> &'static str {
        "SOodd"
    }
}

impl Ensemble for SoOddEnsemble {
    fn pair(&self, a: Trig, b: Trig) -> f64 {
        cos_pair(a, b)
    }
    fn single(&self, theta: f64) -> f64 {
        (theta / 2.0).sin().powi(2)
    }
    fn upper(&self) -> f64 {
        PI
    }
    fn periodic(&self) -> bool {
        false
    }
    fn eigen_count(&self, n: usize) -> usize {
        2 * n + 1
    }
    fn statistic(&self, angles: &[f64], phi: &Fejer) -> f64 {
        // The forced eigenvalue at 1 contributes φ(0).
        paired_statistic(angles, phi, 2 * angles.len() + 1) + phi.eval(0.0)
    }
}

impl Named for SymplecticEnsemble {
    fn name(&self) -> &'static str {
        "Sp"
    }
}

impl Ensemble for SymplecticEnsemble {
    fn pair(&self, a: Trig, b: Trig) -> f64 {
        cos_pair(a, b)
    }
    fn single(&self, theta: f64) -> f64 {
        theta.sin().powi(2)
    }
    fn upper(&self) -> f64 {
        PI
    }
    fn periodic(&self) -> bool {
        false
    }
    fn eigen_count(&self, n: usize) -> usize {
        2 * n
    }
    fn statistic(&self, angles: &[f64], phi: &Fejer) -> f64 {
        paired_statistic(angles, phi, 2 * angles.len())
    }
}

pub fn ensembles() -> Registry<dyn Ensemble> {
    let mut reg: Registry<dyn Ensemble> = Registry::new("ensemble");
    reg.register(Arc::new(UnitaryEnsemble))
        .register(Arc::new(SoEvenEnsemble))
        .register(Arc::new(SoOddEnsemble))
        .register(Arc::new(SymplecticEnsemble));
    reg
}

pub fn ensemble(name: &str) -> Result<Arc<dyn Ensemble>> {
    ensembles().get(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Single-coordinate updates discarded per chain.
    pub burn_in: usize,
    /// Single-coordinate updates between recorded samples.
    pub stride: usize,
    pub sigma: f64,
    /// Samples per chain.
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
}

impl ChainConfig {
    /// Burn-in `10⁴ N`, stride `10 N`, `σ = π/(2N)`.
    pub fn standard(n: usize, total_samples: usize, chains: usize, seed: u64) -> Self {
        let chains = chains.max(1);
        Self {
            burn_in: 10_000 * n,
            stride: 10 * n,
            sigma: PI / (2.0 * n as f64),
            samples: total_samples.div_ceil(chains),
            chains,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.samples == 0 || self.chains == 0 || !(self.sigma > 0.0) {
            return invalid("stride, samples, chains and sigma must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub samples: Vec<Vec<f64>>,
    pub acceptance: f64,
}

/// Initial configuration: evenly spaced, away from the density zeros.
fn initial_angles(ens: &dyn Ensemble, n: usize) -> Vec<f64> {
    let step = ens.upper() / n as f64;
    (0..n).map(|j| (j as f64 + 0.5) * step).collect()
}

fn run_chain(ens: &dyn Ensemble, n: usize, cfg: &ChainConfig, index: usize) -> ChainOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut angles = initial_angles(ens, n);
    let mut trig: Vec<Trig> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut samples = Vec::with_capacity(cfg.samples);
    let total = cfg.burn_in + cfg.stride * cfg.samples;
    for step in 1..=total {
        let j = (step - 1) % n;
        let z: f64 = rng.sample(StandardNormal);
        let new = ens.fold(angles[j] + cfg.sigma * z);
        let nt = (new.cos(), new.sin());
        let mut ratio = ens.single(new) / ens.single(angles[j]);
        for k in 0..n {
            if k != j {
                ratio *= ens.pair(nt, trig[k]) / ens.pair(trig[j], trig[k]);
            }
        }
        proposed += 1;
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            angles[j] = new;
            trig[j] = nt;
            accepted += 1;
        }
        if step > cfg.burn_in && (step - cfg.burn_in).is_multiple_of(cfg.stride) {
            samples.push(angles.clone());
        }
    }
    ChainOutput {
        samples,
        acceptance: accepted as f64 / proposed as f64,
    }
}

/// Runs `cfg.chains` independent chains, chain `i` on ChaCha stream `i` of
/// `cfg.seed`. Output order follows the chain index.
pub fn sample_eigenangles(ens: &dyn Ensemble, n: usize, cfg: &ChainConfig) -> Result<Vec<ChainOutput>> {
    if n < 2 {
        return invalid("ensemble size N must be at least 2");
    }
    cfg.validate()?;
    Ok((0..cfg.chains)
        .into_par_iter()
        .map(|i| run_chain(ens, n, cfg, i))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Batches per chain used for the batch-means standard error.
const BATCHES_PER_CHAIN: usize = 10;

pub fn one_level_statistic(chains: &[ChainOutput], phi: &Fejer, ens: &dyn Ensemble) -> Result<Statistic> {
    let mut total = 0.0;
    let mut count = 0usize;
    let mut batch_means = Vec::new();
    for chain in chains {
        let values: Vec<f64> = chain.samples.iter().map(|a| ens.statistic(a, phi)).collect();
        total += values.iter().sum::<f64>();
        count += values.len();
        let size = values.len() / BATCHES_PER_CHAIN;
        if size == 0 {
            batch_means.extend(values.iter().copied());
            continue;
        }
        for b in values.chunks_exact(size) {
            batch_means.push(b.iter().sum::<f64>() / size as f64);
        }
    }
    if count == 0 {
        return invalid("no samples");
    }
    let mean = total / count as f64;
    let nb = batch_means.len() as f64;
    let stderr = if batch_means.len() > 1 {
        let bm = batch_means.iter().sum::<f64>() / nb;
        let var = batch_means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (nb - 1.0);
        (var / nb).sqrt()
    } else {
        f64::NAN
    };
    Ok(Statistic { mean, stderr, samples: count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densities() {
        let u = ensemble("U").unwrap();
        assert!((u.log_density(&[0.0, PI]).unwrap() - 4f64.ln()).abs() < 1e-14);
        assert_eq!(u.log_density(&[1.0, 1.0]).unwrap(), f64::NEG_INFINITY);
        let sp = ensemble("Sp").unwrap();
        assert_eq!(sp.log_density(&[0.0, 1.0]).unwrap(), f64::NEG_INFINITY);
        assert!(sp.log_density(&[0.5, 4.0]).is_err());
        assert!(u.log_density(&[0.5, TAU]).is_err());
        assert_eq!(ensembles().names().collect::<Vec<_>>(), vec!["SOeven", "SOodd", "Sp", "U"]);
    }

    #[test]
    fn fold_stays_in_domain() {
        let sp = SymplecticEnsemble;
        assert!((sp.fold(-0.1) - 0.1).abs() < 1e-15);
        assert!((sp.fold(PI + 0.2) - (PI - 0.2)).abs() < 1e-15);
        let u = UnitaryEnsemble;
        assert!((u.fold(-0.1) - (TAU - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_counting() {
        let u = UnitaryEnsemble;
        let cfg = ChainConfig { burn_in: 2000, stride: 50, sigma: 0.1, samples: 50, chains: 2, seed: 9 };
        let a = sample_eigenangles(&u, 10, &cfg).unwrap();
        let b = sample_eigenangles(&u, 10, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.samples.iter().all(|s| s.len() == 10)));
        assert_ne!(a[0].samples, a[1].samples);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = ChainConfig { burn_in: 0, stride: 0, sigma: 0.1, samples: 1, chains: 1, seed: 0 };
        assert!(sample_eigenangles(&UnitaryEnsemble, 4, &cfg).is_err());
        let cfg = ChainConfig { stride: 1, ..cfg };
        assert!(sample_eigenangles(&UnitaryEnsemble, 1, &cfg).is_err());
        let phi = Fejer::new(1.0).unwrap();
        assert!(one_level_statistic(&[], &phi, &UnitaryEnsemble).is_err());
    }

    #[test]
    fn symplectic_acceptance_in_range() {
        let cfg = ChainConfig { samples: 20, ..ChainConfig::standard(40, 20, 1, 3) };
        let out = sample_eigenangles(&SymplecticEnsemble, 40, &cfg).unwrap();
        assert!((0.1..=0.7).contains(&out[0].acceptance), "{}", out[0].acceptance);
    }
}
