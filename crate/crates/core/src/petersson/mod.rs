//! Geometric side of the Petersson trace formula over ℚ and real quadratic
//! fields with narrow class number one.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_extended, bessel_size_bound};
use crate::error::{invalid, Error, Result};
use crate::kloosterman::{kloosterman_classical, kloosterman_nf, KloostermanInput};
use crate::nf::{Ideal, Integral, QuadField};

pub mod spectrum;

pub use spectrum::{moebius_identity_check, PseudoForm, SyntheticSpectrum};

/// Label recorded with every geometric sum: terms are accumulated by
/// increasing `N(c)`, then orbit representative, then unit power.
pub const SUMMATION_ORDER: &str = "increasing N(c), then orbit representative, then unit power 0, 1, -1, 2, -2, ...";

/// Bessel products below this bound are treated as zero when expanding a
/// unit orbit.
const ORBIT_CUTOFF: f64 = 1e-17;

#[derive(Debug, Clone)]
pub struct PeterssonParams {
    pub field: QuadField,
    pub k: Vec<u32>,
    pub level: Ideal,
    /// Largest `|N(c)|` included in the geometric sum.
    pub b: u64,
    pub x: f64,
    pub y: f64,
}

impl PeterssonParams {
    pub fn new(field: QuadField, k: Vec<u32>, level: Ideal, b: u64) -> Result<Self> {
        check_weights(&field, &k)?;
        if !field.is_squarefree_ideal(&level)? {
            return invalid("level must be squarefree");
        }
        Ok(Self { field, k, level, b, x: 1.0, y: 1.0 })
    }

    pub fn with_xy(mut self, x: f64, y: f64) -> Result<Self> {
        if !(x >= 1.0 && y >= 1.0) {
            return invalid("X and Y must be at least 1");
        }
        self.x = x;
        self.y = y;
        Ok(self)
    }

    /// The preset `Y = X²`, `X = N(k)^{(4/3−δ)/(7/2−δ)} N(𝔫)^{(3/2−δ)/(7/2−δ)}`.
    pub fn with_preset_xy(self, delta: f64) -> Result<Self> {
        let (x, y) = preset_xy(&self.k, self.level.norm(), delta)?;
        self.with_xy(x, y)
    }
}

pub fn preset_xy(k: &[u32], level_norm: u64, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 0.5) {
        return invalid("delta must lie in (0, 1/2)");
    }
    let nk: f64 = k.iter().map(|&v| v as f64).product();
    let denom = 3.5 - delta;
    let x = nk.powf((4.0 / 3.0 - delta) / denom) * (level_norm as f64).powf((1.5 - delta) / denom);
    let x = x.max(1.0);
    Ok((x, x * x))
}

fn check_weights(field: &QuadField, k: &[u32]) -> Result<()> {
    if k.len() != field.degree() {
        return invalid(format!("weight vector needs {} entries, got {}", field.degree(), k.len()));
    }
    if let Some(bad) = k.iter().find(|&&v| v < 2 || v % 2 != 0) {
        return invalid(format!("weights must be even and at least 2, got {bad}"));
    }
    Ok(())
}

/// `𝒦_F = 2^{n−2} (2π)^{2n} R_F / (ζ_F(2) d_F²)`.
pub fn kf_constant(field: &QuadField) -> f64 {
    kf_from_parts(field.degree(), field.regulator(), field.zeta2(), field.disc())
}

pub fn kf_from_parts(n: usize, regulator: f64, zeta2: f64, disc: i64) -> f64 {
    let n = n as i32;
    2f64.powi(n - 2) * (2.0 * PI).powi(2 * n) * regulator / (zeta2 * (disc as f64).powi(2))
}

/// `𝒞 = (−1)^{Tr(k/2)} (2π)^n / (2 |d_F|^{1/2})`.
pub fn leading_constant(field: &QuadField, k: &[u32]) -> Result<f64> {
    check_weights(field, k)?;
    let half: u32 = k.iter().map(|v| v / 2).sum();
    let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (2.0 * PI).powi(field.degree() as i32) / (2.0 * (field.disc() as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub c_norm: u64,
    pub c: Integral,
    pub epsilon: Integral,
    pub kloosterman: f64,
    pub bessel: f64,
    /// Contribution of `±c` together, including `𝒞`.
    pub term: f64,
    /// Weil times Bessel-size bound for `|term|`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricDelta {
    pub diagonal: u8,
    pub correction: f64,
    pub terms: Vec<TermRow>,
    pub envelope: f64,
    pub order: String,
}

impl GeometricDelta {
    pub fn value(&self) -> f64 {
        self.diagonal as f64 + self.correction
    }
}

fn weil_bound(field: &QuadField, alpha: Integral, beta: Integral, c: Integral) -> Result<f64> {
    let c_ideal = field.principal_ideal(c)?;
    let gens: Vec<Integral> = [alpha, beta, c].into_iter().filter(|g| !g.is_zero()).collect();
    let g = field.ideal_from_generators(&gens)?;
    // Empirical constant for the quadratic case; exact over ℚ.
    let constant = if field.is_rational() { 1.0 } else { 4.0 };
    Ok(constant * field.tau(&c_ideal)? as f64 * (g.norm() as f64 * c_ideal.norm() as f64).sqrt())
}

struct TermContext<'a> {
    field: &'a QuadField,
    k: &'a [u32],
    cc: f64,
    alpha: Integral,
    beta: Integral,
}

impl TermContext<'_> {
    fn bessel_args(&self, eab: &[f64], c: Integral) -> Vec<f64> {
        self.field
            .embeddings(c)
            .iter()
            .zip(eab)
            .map(|(cj, v)| 4.0 * PI * v.sqrt() / cj.abs())
            .collect()
    }

    fn row(&self, eps: Integral, eab: &[f64], c: Integral) -> Result<TermRow> {
        let f = self.field;
        let ea = f.mul(eps, self.alpha)?;
        let kl = if f.is_rational() {
            kloosterman_classical(ea.x, self.beta.x, c.x.unsigned_abs())
        } else {
            kloosterman_nf(&KloostermanInput { field: f, alpha: ea, beta: self.beta, c })?
        };
        let args = self.bessel_args(eab, c);
        let mut jb = 1.0;
        for (&k, &x) in self.k.iter().zip(&args) {
            jb *= bessel_j_extended(k - 1, x)?;
        }
        let n = f.norm(c).unsigned_abs() as u64;
        let size: f64 = self.k.iter().zip(&args).map(|(&k, &x)| bessel_size_bound(k - 1, x)).product();
        let envelope = 2.0 * self.cc.abs() * weil_bound(f, ea, self.beta, c)? / n as f64 * size;
        Ok(TermRow {
            c_norm: n,
            c,
            epsilon: eps,
            kloosterman: kl,
            bessel: jb,
            term: 2.0 * self.cc * kl / n as f64 * jb,
            envelope,
        })
    }

    /// All rows for the orbit `ε₊^m · rep`, `m = 0, 1, −1, 2, −2, …`, until
    /// the Bessel factor is negligible in both directions.
    fn orbit_rows(&self, eps: Integral, eab: &[f64], rep: Integral) -> Result<Vec<TermRow>> {
        let f = self.field;
        let mut rows = vec![self.row(eps, eab, rep)?];
        if f.is_rational() {
            return Ok(rows);
        }
        let up = f.totally_positive_fund_unit();
        let down = f.conj(up);
        let (mut cu, mut cd) = (rep, rep);
        let (mut live_u, mut live_d) = (true, true);
        let size = |c: Integral| -> f64 {
            self.k
                .iter()
                .zip(self.bessel_args(eab, c))
                .map(|(&k, x)| bessel_size_bound(k - 1, x))
                .product()
        };
        let mut guard = 0;
        while live_u || live_d {
            guard += 1;
            if guard > 200 {
                return Err(Error::Precondition("unit orbit expansion did not terminate".into()));
            }
            if live_u {
                cu = f.mul(cu, up)?;
                let prev = size(f.mul(cu, down)?);
                let s = size(cu);
                if s < ORBIT_CUTOFF && s <= prev {
                    live_u = false;
                } else {
                    rows.push(self.row(eps, eab, cu)?);
                }
            }
            if live_d {
                cd = f.mul(cd, down)?;
                let prev = size(f.mul(cd, up)?);
                let s = size(cd);
                if s < ORBIT_CUTOFF && s <= prev {
                    live_d = false;
                } else {
                    rows.push(self.row(eps, eab, cd)?);
                }
            }
        }
        Ok(rows)
    }
}

/// Diagonal indicator plus `𝒞 · Σ_{ε, c} Kl(εα, β; c) J_{k−1}(4π√(εαβ)/|c|) / N(c)`
/// over `c ∈ 𝔫 \ {0}`, `|N(c)| ≤ B`.
pub fn geometric_delta(params: &PeterssonParams, alpha: Integral, beta: Integral) -> Result<GeometricDelta> {
    let f = &params.field;
    f.require_narrow_class_one()?;
    check_weights(f, &params.k)?;
    if alpha.is_zero() || beta.is_zero() {
        return invalid("alpha and beta must be nonzero");
    }
    let diagonal = u8::from(f.principal_ideal(alpha)? == f.principal_ideal(beta)?);
    let mut out = GeometricDelta {
        diagonal,
        correction: 0.0,
        terms: Vec::new(),
        envelope: 0.0,
        order: SUMMATION_ORDER.to_string(),
    };
    if params.b == 0 {
        return Ok(out);
    }
    let ctx = TermContext {
        field: f,
        k: &params.k,
        cc: leading_constant(f, &params.k)?,
        alpha,
        beta,
    };
    let ab = f.mul(alpha, beta)?;
    let mut units = Vec::new();
    for eps in f.totally_positive_unit_reps() {
        let eab = f.mul(eps, ab)?;
        if !f.is_totally_positive(eab) {
            return Err(Error::Precondition(format!("epsilon*alpha*beta = {eab} is not totally positive")));
        }
        units.push((eps, f.embeddings(eab)));
    }
    let reps = f.enumerate_ideal_elements(&params.level, params.b)?;
    let blocks: Vec<Result<Vec<TermRow>>> = reps
        .par_iter()
        .map(|&rep| {
            let mut rows = Vec::new();
            for (eps, eab) in &units {
                rows.extend(ctx.orbit_rows(*eps, eab, rep)?);
            }
            Ok(rows)
        })
        .collect();
    for block in blocks {
        for row in block? {
            out.correction += row.term;
            out.envelope += row.envelope;
            out.terms.push(row);
        }
    }
    Ok(out)
}

/// `𝒦_F^{-1} N(k−1) N(𝔫) ∏_{𝔭|𝔫} (1 − N(𝔭)^{-1})`.
pub fn size_of_newspace_main(field: &QuadField, k: &[u32], level: &Ideal) -> Result<f64> {
    check_weights(field, k)?;
    if !field.is_squarefree_ideal(level)? {
        return invalid("level must be squarefree");
    }
    let nk1: f64 = k.iter().map(|&v| (v - 1) as f64).product();
    let euler = field.euler_level_product(level)?;
    let euler = *euler.numer() as f64 / *euler.denom() as f64;
    Ok(nk1 * level.norm() as f64 * euler / kf_constant(field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPrime {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    /// Number of `(𝔩, ℓ)` pairs evaluated.
    pub pairs: usize,
    /// The complementary piece is not computed.
    pub unevaluated_remainder: String,
}

/// `𝒦_F^{-1} N(k−1) Σ_{𝔩𝔪=𝔫, N𝔩≤X} μ(𝔩) N(𝔪) Σ_{(ℓ,𝔪)=1, Nℓ≤Y} N(ℓ)^{-1} Δ_{k,𝔪}(ℓ², 𝔞)`.
pub fn delta_prime_truncated(params: &PeterssonParams, a: &Ideal) -> Result<DeltaPrime> {
    let f = &params.field;
    f.require_narrow_class_one()?;
    check_weights(f, &params.k)?;
    if !f.coprime(a, &params.level)? {
        return Err(Error::Precondition("the ideal a must be coprime to the level".into()));
    }
    let beta = f.totally_positive_generator(a)?;
    let nk1: f64 = params.k.iter().map(|&v| (v - 1) as f64).product();
    let scale = nk1 / kf_constant(f);
    let ls = f.enumerate_ideals(params.y.floor() as u64)?;
    let mut value = 0.0;
    let mut pairs = 0;
    for l in f.divisors(&params.level)? {
        if l.norm() as f64 > params.x {
            continue;
        }
        let mu = f.moebius(&l)?;
        if mu == 0 {
            continue;
        }
        let m_norm = params.level.norm() / l.norm();
        let m = params
            .field
            .divisors(&params.level)?
            .into_iter()
            .find(|m| m.norm() == m_norm && f.ideal_mul(m, &l).ok() == Some(params.level))
            .ok_or_else(|| Error::Precondition("complementary divisor not found".into()))?;
        let sub = PeterssonParams { level: m, ..params.clone() };
        let mut inner = 0.0;
        for ell in &ls {
            if !f.coprime(ell, &m)? {
                continue;
            }
            let alpha = f.totally_positive_generator(&f.ideal_pow(ell, 2)?)?;
            inner += geometric_delta(&sub, alpha, beta)?.value() / ell.norm() as f64;
            pairs += 1;
        }
        value += mu as f64 * m_norm as f64 * inner;
    }
    Ok(DeltaPrime {
        value: scale * value,
        x: params.x,
        y: params.y,
        pairs,
        unevaluated_remainder: "Delta-infinity (needs spectral data)".into(),
    })
}
