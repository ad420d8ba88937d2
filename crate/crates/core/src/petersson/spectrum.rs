//! Synthetic spectra for checking the Möbius-inversion identities that
//! relate Petersson sums over all forms to sums over primitive forms.
//!
//! A synthetic world consists of a finite set `P` of prime ideals. Ideals are
//! exponent vectors over `P` with entries at most `J` in every sum over
//! ideals, and the local factors `Z_𝔭(1, f)` are truncated at the same `J`,
//! so every identity below holds exactly in this world.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::kf_constant;
use crate::error::{invalid, Error, Result};
use crate::nf::{PrimeIdeal, QuadField};
use crate::sato_tate::sample_trace;

/// Largest exponent allowed in the fixed arguments `𝔞, 𝔟`.
const ARG_EXP: u32 = 4;

#[derive(Debug, Clone)]
pub struct PseudoForm {
    /// `level_mask[i]` is true when `P[i]` divides the level of the form.
    pub level_mask: Vec<bool>,
    /// `coeffs[i][e] = C(𝔭_i^e)`.
    pub coeffs: Vec<Vec<f64>>,
    /// Truncated local factors `Z_𝔭(1, f)`.
    pub z_local: Vec<f64>,
    /// `Z(1, f) = ∏_{𝔭 ∈ P} Z_𝔭(1, f)`, always positive.
    pub z: f64,
}

impl PseudoForm {
    fn coeff(&self, exps: &[u32]) -> Result<f64> {
        let mut c = 1.0;
        for (table, &e) in self.coeffs.iter().zip(exps) {
            c *= table
                .get(e as usize)
                .ok_or_else(|| Error::Precondition(format!("coefficient support too small for exponent {e}")))?;
        }
        Ok(c)
    }

    fn z_part(&self, mask: &[bool]) -> f64 {
        self.z_local
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z)
            .product()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSpectrum {
    pub primes: Vec<PrimeIdeal>,
    pub max_exp: u32,
    /// `𝒦_F / N(k − 1)`.
    pub kappa: f64,
    pub forms: Vec<PseudoForm>,
}

fn local_factor(coeffs: &[f64], norm: f64, j: u32) -> f64 {
    (0..=j).map(|i| coeffs[2 * i as usize] / norm.powi(i as i32)).sum()
}

impl SyntheticSpectrum {
    /// A random spectrum over the first `prime_count` prime ideals of `field`.
    /// Forms are generated at every level dividing the product of the primes
    /// flagged in `level_mask`, `forms_per_level` at each.
    pub fn random(
        field: &QuadField,
        k: &[u32],
        prime_count: usize,
        level_mask: &[bool],
        forms_per_level: usize,
        max_exp: u32,
        seed: u64,
    ) -> Result<Self> {
        if level_mask.len() != prime_count {
            return invalid("level mask length must equal the prime count");
        }
        let mut primes = Vec::new();
        let mut bound = 16;
        while primes.len() < prime_count {
            primes = field.enumerate_prime_ideals(bound);
            bound *= 2;
        }
        primes.truncate(prime_count);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = (2 * max_exp + ARG_EXP) as usize;
        let level_idx: Vec<usize> = (0..prime_count).filter(|&i| level_mask[i]).collect();
        let mut forms = Vec::new();
        for sub in 0..(1usize << level_idx.len()) {
            let mut mask = vec![false; prime_count];
            for (bit, &i) in level_idx.iter().enumerate() {
                mask[i] = sub >> bit & 1 == 1;
            }
            for _ in 0..forms_per_level {
                let mut coeffs = Vec::with_capacity(prime_count);
                for (i, q) in primes.iter().enumerate() {
                    let mut t = vec![1.0; top + 1];
                    if mask[i] {
                        let sign = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
                        let c1 = sign / (q.norm as f64).sqrt();
                        for e in 1..=top {
                            t[e] = t[e - 1] * c1;
                        }
                    } else {
                        let c1 = sample_trace(&mut rng);
                        t[1] = c1;
                        for e in 2..=top {
                            t[e] = c1 * t[e - 1] - t[e - 2];
                        }
                    }
                    coeffs.push(t);
                }
                let z_local: Vec<f64> = coeffs
                    .iter()
                    .zip(&primes)
                    .map(|(t, q)| local_factor(t, q.norm as f64, max_exp))
                    .collect();
                let z = z_local.iter().product();
                forms.push(PseudoForm { level_mask: mask.clone(), coeffs, z_local, z });
            }
        }
        let nk1: f64 = k.iter().map(|&v| (v - 1) as f64).product();
        Ok(Self {
            primes,
            max_exp,
            kappa: kf_constant(field) / nk1,
            forms,
        })
    }

    fn norm_of(&self, exps: &[u32]) -> f64 {
        self.primes
            .iter()
            .zip(exps)
            .map(|(q, &e)| (q.norm as f64).powi(e as i32))
            .product()
    }

    fn mask_norm(&self, mask: &[bool]) -> f64 {
        self.primes
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(q, _)| q.norm as f64)
            .product()
    }

    /// Largest deviation from the Hecke relations on the stored support.
    pub fn hecke_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for f in &self.forms {
            for (i, t) in f.coeffs.iter().enumerate() {
                let top = t.len() - 1;
                for a in 0..=top {
                    for b in 0..=(top - a) {
                        let rhs = if f.level_mask[i] {
                            t[a + b]
                        } else {
                            (0..=a.min(b)).map(|j| t[a + b - 2 * j]).sum()
                        };
                        worst = worst.max((t[a] * t[b] - rhs).abs());
                    }
                }
            }
        }
        worst
    }

    /// `Δ*_𝔫(𝔞, 𝔟) = Σ_{f ∈ Π(𝔫)} Z_𝔫(1,f)/Z(1,f) · C(𝔞) C(𝔟)`.
    pub fn delta_star(&self, n: &[bool], a: &[u32], b: &[u32]) -> Result<f64> {
        let mut s = 0.0;
        for f in self.forms.iter().filter(|f| f.level_mask == n) {
            s += f.z_part(n) / f.z * f.coeff(a)? * f.coeff(b)?;
        }
        Ok(s)
    }

    /// `Δ⋆_𝔫(𝔞) = Σ_{f ∈ Π(𝔫)} C(𝔞)`.
    pub fn delta_primitive(&self, n: &[bool], a: &[u32]) -> Result<f64> {
        let mut s = 0.0;
        for f in self.forms.iter().filter(|f| f.level_mask == n) {
            s += f.coeff(a)?;
        }
        Ok(s)
    }

    /// Spectral `Δ_{k,𝔫}(𝔞, 𝔟) = 𝒦_F/(N(𝔫)N(k−1)) Σ_{𝔪|𝔫} Σ_{f ∈ Π(𝔪)} Z_𝔫/Z · C(𝔞)C(𝔟)`.
    pub fn delta(&self, n: &[bool], a: &[u32], b: &[u32]) -> Result<f64> {
        let mut s = 0.0;
        for f in &self.forms {
            let divides = f.level_mask.iter().zip(n).all(|(&fm, &nm)| !fm || nm);
            if divides {
                s += f.z_part(n) / f.z * f.coeff(a)? * f.coeff(b)?;
            }
        }
        Ok(self.kappa / self.mask_norm(n) * s)
    }

    /// All exponent vectors supported on `support` with entries `≤ J`.
    fn exponent_vectors(&self, support: &[bool]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0u32; self.primes.len()]];
        for (i, &on) in support.iter().enumerate() {
            if !on {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (self.max_exp as usize + 1));
            for v in &out {
                for e in 0..=self.max_exp {
                    let mut w = v.clone();
                    w[i] = e;
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }
}

fn submasks(n: &[bool]) -> Vec<Vec<bool>> {
    let idx: Vec<usize> = (0..n.len()).filter(|&i| n[i]).collect();
    (0..(1usize << idx.len()))
        .map(|sub| {
            let mut m = vec![false; n.len()];
            for (bit, &i) in idx.iter().enumerate() {
                m[i] = sub >> bit & 1 == 1;
            }
            m
        })
        .collect()
}

fn add_twice(a: &[u32], ell: &[u32]) -> Vec<u32> {
    a.iter().zip(ell).map(|(x, y)| x + 2 * y).collect()
}

/// Checks, on a synthetic spectrum, the three identities
///
/// 1. `Δ*_𝔫(𝔞,𝔟) = 𝒦^{-1}N(k−1) Σ_{𝔩𝔪=𝔫} μ(𝔩) N(𝔪) Σ_{ℓ|𝔩^∞} N(ℓ)^{-1} Δ_𝔪(𝔞ℓ², 𝔟)`,
/// 2. `Δ⋆_𝔫(𝔞) = Σ_{(𝔪,𝔫)=1} N(𝔪)^{-1} Δ*_𝔫(𝔪², 𝔞)`,
/// 3. `Δ⋆_𝔫(𝔞) = 𝒦^{-1}N(k−1) Σ_{𝔩𝔪=𝔫} μ(𝔩) N(𝔪) Σ_{(ℓ,𝔪)=1} N(ℓ)^{-1} Δ_𝔪(ℓ², 𝔞)`,
///
/// and returns the largest absolute residual.
pub fn moebius_identity_check(spectrum: &SyntheticSpectrum, n: &[bool], a: &[u32], b: &[u32]) -> Result<f64> {
    let np = spectrum.primes.len();
    if n.len() != np || a.len() != np || b.len() != np {
        return invalid("ideal vectors must match the spectrum's prime set");
    }
    if (0..np).any(|i| n[i] && (a[i] > 0 || b[i] > 0)) {
        return Err(Error::Precondition("a and b must be coprime to the level".into()));
    }
    if a.iter().chain(b).any(|&e| e > ARG_EXP) {
        return Err(Error::Precondition(format!("exponents of a and b must be at most {ARG_EXP}")));
    }
    if spectrum.forms.iter().any(|f| f.level_mask.iter().zip(n).any(|(&fm, &nm)| fm && !nm)) {
        return Err(Error::Precondition("spectrum contains forms whose level does not divide n".into()));
    }
    let inv_kappa = 1.0 / spectrum.kappa;
    let zero = vec![0u32; np];

    // Identity 1.
    let lhs1 = spectrum.delta_star(n, a, b)?;
    let mut rhs1 = 0.0;
    for l in submasks(n) {
        let m: Vec<bool> = n.iter().zip(&l).map(|(&x, &y)| x && !y).collect();
        let mu = if l.iter().filter(|&&v| v).count() % 2 == 0 { 1.0 } else { -1.0 };
        let mut inner = 0.0;
        for ell in spectrum.exponent_vectors(&l) {
            inner += spectrum.delta(&m, &add_twice(a, &ell), b)? / spectrum.norm_of(&ell);
        }
        rhs1 += mu * spectrum.mask_norm(&m) * inner;
    }
    rhs1 *= inv_kappa;

    // Identity 2.
    let lhs2 = spectrum.delta_primitive(n, a)?;
    let outside: Vec<bool> = n.iter().map(|&x| !x).collect();
    let mut rhs2 = 0.0;
    for mm in spectrum.exponent_vectors(&outside) {
        rhs2 += spectrum.delta_star(n, &add_twice(&zero, &mm), a)? / spectrum.norm_of(&mm);
    }

    // Identity 3.
    let mut rhs3 = 0.0;
    for l in submasks(n) {
        let m: Vec<bool> = n.iter().zip(&l).map(|(&x, &y)| x && !y).collect();
        let mu = if l.iter().filter(|&&v| v).count() % 2 == 0 { 1.0 } else { -1.0 };
        let coprime: Vec<bool> = m.iter().map(|&x| !x).collect();
        let mut inner = 0.0;
        for ell in spectrum.exponent_vectors(&coprime) {
            inner += spectrum.delta(&m, &add_twice(&zero, &ell), a)? / spectrum.norm_of(&ell);
        }
        rhs3 += mu * spectrum.mask_norm(&m) * inner;
    }
    rhs3 *= inv_kappa;

    Ok((lhs1 - rhs1).abs().max((lhs2 - rhs2).abs()).max((lhs2 - rhs3).abs()))
}
