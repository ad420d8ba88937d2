//! The explicit formula for the one-level density, its specializations to
//! Hilbert modular forms and Rankin-Selberg convolutions, synthetic family
//! averages, and the support and non-vanishing arithmetic built on them.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nf::{Ideal, PrimeIdeal, QuadField};
use crate::sato_tate::sample_trace;
use crate::testfn::{integral_against_kernel, Fejer};

pub mod sources;

pub use sources::{source_factories, CoefficientSource, FileBacked, RsProduct, SatoTate, SourceFactory, SourceSpec, Zero};

/// Gamma shifts below this are raised to it inside the conductor logarithm.
const KAPPA_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// `log(π^{−dn} A ∏ κ_j)`.
    Generic,
    /// `log A` with no gamma contribution.
    Normalized,
    Hmf { k: Vec<u32>, level_norm: u64 },
    RankinSelberg { k: Vec<u32>, k2: Vec<u32>, level_norm: u64, level2_norm: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LDescriptor {
    pub degree: usize,
    pub field_degree: usize,
    pub conductor: f64,
    pub kappa: Vec<Complex64>,
    /// Pole order datum: the mean of `Λ(𝔭²)` is `δ·log N(𝔭)`.
    pub delta: i32,
    pub mode: Mode,
    /// Primes dividing this ideal are left out of the prime sum.
    pub level: Option<Ideal>,
}

fn check_kappa(kappa: &[Complex64]) -> Result<()> {
    for z in kappa {
        if !(z.re > -1.0) {
            return invalid(format!("gamma shift {z} must have real part > -1"));
        }
        if z.im != 0.0 {
            let n = kappa.iter().filter(|w| **w == *z).count();
            let m = kappa.iter().filter(|w| **w == z.conj()).count();
            if n != m {
                return invalid("complex gamma shifts must come in conjugate pairs");
            }
        }
    }
    Ok(())
}

fn check_even(k: &[u32]) -> Result<()> {
    if k.is_empty() || k.iter().any(|&v| v < 2 || v % 2 != 0) {
        return invalid("weights must be even and at least 2");
    }
    Ok(())
}

fn hmf_kappa(k: &[u32]) -> Vec<Complex64> {
    k.iter()
        .flat_map(|&v| {
            let v = v as f64;
            [Complex64::new((v - 1.0) / 2.0, 0.0), Complex64::new((v + 1.0) / 2.0, 0.0)]
        })
        .collect()
}

impl LDescriptor {
    pub fn generic(degree: usize, field_degree: usize, conductor: f64, kappa: Vec<Complex64>, delta: i32) -> Result<Self> {
        if !(conductor > 0.0) {
            return invalid("conductor must be positive");
        }
        if kappa.len() != degree * field_degree {
            return invalid(format!("expected {} gamma shifts, got {}", degree * field_degree, kappa.len()));
        }
        check_kappa(&kappa)?;
        Ok(Self { degree, field_degree, conductor, kappa, delta, mode: Mode::Generic, level: None })
    }

    /// Conductor term `φ̂(0) log A / log R`, no gamma factor.
    pub fn normalized(degree: usize, conductor: f64, delta: i32) -> Result<Self> {
        if !(conductor > 0.0) {
            return invalid("conductor must be positive");
        }
        Ok(Self { degree, field_degree: 1, conductor, kappa: Vec::new(), delta, mode: Mode::Normalized, level: None })
    }

    /// A form of weight `k` and level `𝔫`: conductor `N(𝔫𝔡_F)`, shifts
    /// `(k_j ∓ 1)/2`, `δ = −1`.
    pub fn hmf(field: &QuadField, k: &[u32], level: Ideal) -> Result<Self> {
        check_even(k)?;
        if k.len() != field.degree() {
            return invalid("one weight per real embedding");
        }
        Ok(Self {
            degree: 2,
            field_degree: field.degree(),
            conductor: level.norm() as f64 * field.disc() as f64,
            kappa: hmf_kappa(k),
            delta: -1,
            mode: Mode::Hmf { k: k.to_vec(), level_norm: level.norm() },
            level: Some(level),
        })
    }

    /// `f × g` with `δ = δ_{f×g}` supplied by the caller.
    pub fn rankin_selberg(field: &QuadField, k: &[u32], k2: &[u32], level: Ideal, level2: Ideal, delta: i32) -> Result<Self> {
        check_even(k)?;
        check_even(k2)?;
        if k.len() != field.degree() || k2.len() != field.degree() {
            return invalid("one weight per real embedding");
        }
        let kappa = k
            .iter()
            .zip(k2)
            .flat_map(|(&a, &b)| {
                let s = (a + b) as f64 / 2.0;
                let d = a.abs_diff(b) as f64 / 2.0;
                [s - 1.0, s, d, d + 1.0].map(|v| Complex64::new(v, 0.0))
            })
            .collect();
        let d = field.disc() as f64;
        let nn = level.norm() as f64 * level2.norm() as f64;
        Ok(Self {
            degree: 4,
            field_degree: field.degree(),
            conductor: (d * d * nn).powi(2),
            kappa,
            delta,
            mode: Mode::RankinSelberg { k: k.to_vec(), k2: k2.to_vec(), level_norm: level.norm(), level2_norm: level2.norm() },
            level: Some(field.ideal_mul(&level, &level2)?),
        })
    }

    /// `log` of the analytic conductor used by the conductor term.
    pub fn log_conductor(&self) -> Result<f64> {
        Ok(match &self.mode {
            Mode::Generic => {
                let dn = (self.degree * self.field_degree) as f64;
                let kappa: f64 = self.kappa.iter().map(|z| z.norm().max(KAPPA_FLOOR).ln()).sum();
                -dn * PI.ln() + self.conductor.ln() + kappa
            }
            Mode::Normalized => self.conductor.ln(),
            Mode::Hmf { k, level_norm } => {
                let nk: f64 = k.iter().map(|&v| (v as f64).ln()).sum();
                (*level_norm as f64).ln() + 2.0 * nk
            }
            Mode::RankinSelberg { k, k2, level_norm, level2_norm } => {
                let mut acc = 2.0 * ((*level_norm as f64).ln() + (*level2_norm as f64).ln());
                for (&a, &b) in k.iter().zip(k2) {
                    acc += 2.0 * ((a.abs_diff(b) + 1) as f64).ln() + 2.0 * ((a + b) as f64).ln();
                }
                acc
            }
        })
    }

    fn skips(&self, field: &QuadField, p: &PrimeIdeal) -> bool {
        self.level.as_ref().is_some_and(|n| field.ideal_divides(&p.ideal, n))
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0 && r.is_finite()) {
        return invalid(format!("scaling parameter R must exceed 1, got {r}"));
    }
    Ok(())
}

pub fn conductor_term(desc: &LDescriptor, phi: &Fejer, r: f64) -> Result<f64> {
    check_r(r)?;
    if !(desc.conductor > 0.0) {
        return invalid("conductor must be positive");
    }
    Ok(phi.hat(0.0) * desc.log_conductor()? / r.ln())
}

/// `(2/log R) log N(𝔭) φ̂(log N(𝔭)/log R) / N(𝔭)^{1/2}`.
fn prime_weight(phi: &Fejer, lr: f64, norm: u64) -> f64 {
    let ln = (norm as f64).ln();
    2.0 / lr * ln * phi.hat(ln / lr) / (norm as f64).sqrt()
}

/// Weighted prime ideals of norm at most `q`, minus skipped ones and those
/// outside the support.
fn prime_weights(desc: &LDescriptor, phi: &Fejer, r: f64, field: &QuadField, q: u64) -> Vec<(PrimeIdeal, f64)> {
    let lr = r.ln();
    field
        .enumerate_prime_ideals(q)
        .into_iter()
        .filter(|p| !desc.skips(field, p))
        .map(|p| (p, prime_weight(phi, lr, p.norm)))
        .filter(|(_, w)| *w != 0.0)
        .collect()
}

/// `(2/log R) Σ_{N(𝔭) ≤ Q} Λ(𝔭) φ̂(log N(𝔭)/log R) / N(𝔭)^{1/2}`.
pub fn prime_sum(desc: &LDescriptor, phi: &Fejer, r: f64, source: &dyn CoefficientSource, field: &QuadField, q: u64) -> Result<f64> {
    check_r(r)?;
    let mut acc = 0.0;
    for (p, w) in prime_weights(desc, phi, r, field, q) {
        acc += w * source.coefficient(&p)?;
    }
    Ok(acc)
}

/// `conductor term − (δ/2) φ(0) − prime sum`.
pub fn one_level_d(desc: &LDescriptor, phi: &Fejer, r: f64, source: &dyn CoefficientSource, field: &QuadField, q: u64) -> Result<f64> {
    let cond = conductor_term(desc, phi, r)?;
    let ps = prime_sum(desc, phi, r, source, field, q)?;
    Ok(cond - desc.delta as f64 / 2.0 * phi.eval(0.0) - ps)
}

/// `Σ φ(γ log R / 2π)` over the given ordinates.
pub fn zeros_side(zeros: &[f64], phi: &Fejer, r: f64) -> Result<f64> {
    check_r(r)?;
    let s = r.ln() / TAU;
    Ok(zeros.iter().map(|g| phi.eval(g * s)).sum())
}

/// One positive ordinate per line, ascending; `#` starts a comment.
pub fn parse_zeros(text: &str) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let g: f64 = line.parse().map_err(|_| Error::Parse(format!("line {}: `{raw}` is not a number", i + 1)))?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Parse(format!("line {}: ordinate must be positive", i + 1)));
        }
        if out.last().is_some_and(|&prev| g < prev) {
            return Err(Error::Parse(format!("line {}: ordinates must be ascending", i + 1)));
        }
        out.push(g);
    }
    Ok(out)
}

pub fn read_zeros(path: &Path) -> Result<Vec<f64>> {
    parse_zeros(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    Orthogonal,
    RsSymplectic,
}

impl FamilyKind {
    pub fn kernel(self) -> &'static str {
        match self {
            FamilyKind::Orthogonal => "O",
            FamilyKind::RsSymplectic => "Sp",
        }
    }

    fn delta(self) -> i32 {
        match self {
            FamilyKind::Orthogonal => -1,
            FamilyKind::RsSymplectic => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub kind: FamilyKind,
    pub family_size: usize,
    pub average: f64,
    /// `None` when the family has a single member.
    pub stderr: Option<f64>,
    pub prediction: f64,
    pub kernel: String,
    pub prime_cutoff: u64,
    pub u: f64,
    pub r: f64,
}

/// Stream reserved for the fixed partner `g` of the Rankin-Selberg family.
const PARTNER_STREAM: u64 = u64::MAX;

/// Averages the one-level density over `m` synthetic forms with
/// independent Sato-Tate coefficients. `R = Q^{1/u}` and the conductor is
/// taken equal to `R`, so the prime sum is complete and the expected value
/// is exactly `∫ φ_u W`.
pub fn family_average(kind: FamilyKind, m: usize, u: f64, field: &QuadField, seed: u64, q: u64) -> Result<DensityReport> {
    if m == 0 {
        return invalid("family size must be at least 1");
    }
    if q < 2 {
        return invalid("prime cutoff must be at least 2");
    }
    let phi = Fejer::new(u)?;
    let r = (q as f64).powf(1.0 / u);
    let degree = match kind {
        FamilyKind::Orthogonal => 2,
        FamilyKind::RsSymplectic => 4,
    };
    let desc = LDescriptor::normalized(degree, r, kind.delta())?;
    let fixed = conductor_term(&desc, &phi, r)? - desc.delta as f64 / 2.0 * phi.eval(0.0);
    let primes = field.enumerate_prime_ideals(q);
    let weights: Vec<f64> = primes.iter().map(|p| prime_weight(&phi, r.ln(), p.norm)).collect();
    // Form i draws one coefficient per prime ideal, in enumeration order,
    // from stream i.
    let draw = |stream: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        primes.iter().map(|_| sample_trace(&mut rng)).collect()
    };
    let partner = match kind {
        FamilyKind::RsSymplectic => draw(PARTNER_STREAM),
        FamilyKind::Orthogonal => vec![1.0; primes.len()],
    };
    let values: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let c = draw(i);
            let ps: f64 = (0..c.len()).map(|j| weights[j] * c[j] * partner[j]).sum();
            fixed - ps
        })
        .collect();
    let n = m as f64;
    let average = values.iter().sum::<f64>() / n;
    let stderr = (m > 1).then(|| {
        let var = values.iter().map(|v| (v - average).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    Ok(DensityReport {
        kind,
        family_size: m,
        average,
        stderr,
        prediction: integral_against_kernel(u, kind.kernel())?,
        kernel: kind.kernel().to_string(),
        prime_cutoff: q,
        u,
        r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportTheorem {
    /// Forms of weight `k` and level `𝔫`: coefficients 3/2 and 4/3.
    Hmf,
    /// Rankin-Selberg family: coefficients 3/4 and 2/3.
    RankinSelberg,
}

/// `a log N(𝔫)/log(N(𝔫)N(k)²) + b log N(k)/log(N(𝔫)N(k)²)`.
pub fn admissible_u(theorem: SupportTheorem, k: &[u32], level_norm: u64) -> Result<f64> {
    check_even(k)?;
    if level_norm == 0 {
        return invalid("level norm must be at least 1");
    }
    let ln_k: f64 = k.iter().map(|&v| (v as f64).ln()).sum();
    let ln_n = (level_norm as f64).ln();
    let denom = ln_n + 2.0 * ln_k;
    if denom <= 0.0 {
        return invalid("N(n) = N(k) = 1 leaves the support undefined");
    }
    let (a, b) = match theorem {
        SupportTheorem::Hmf => (1.5, 4.0 / 3.0),
        SupportTheorem::RankinSelberg => (0.75, 2.0 / 3.0),
    };
    Ok(a * ln_n / denom + b * ln_k / denom)
}

/// `(a, b)`: the limits of `admissible_u` when the level dominates and when
/// the weight dominates.
pub fn admissible_u_limits(theorem: SupportTheorem) -> (f64, f64) {
    match theorem {
        SupportTheorem::Hmf => (1.5, 2.0 / 3.0),
        SupportTheorem::RankinSelberg => (0.75, 1.0 / 3.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonvanishingBounds {
    #[serde(rename = "mP_bound")]
    pub mp_bound: f64,
    #[serde(rename = "mQ_bound")]
    pub mq_bound: f64,
    #[serde(rename = "Q0_lower")]
    pub q0_lower: f64,
}

pub fn nonvanishing_bounds(u: f64) -> Result<NonvanishingBounds> {
    Fejer::new(u)?;
    Ok(NonvanishingBounds {
        mp_bound: (2.0 + u) / (2.0 * u),
        mq_bound: 1.0 / (2.0 * u) - 0.25,
        q0_lower: 1.25 - 1.0 / (2.0 * u),
    })
}
