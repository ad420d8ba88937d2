//! Kloosterman sums over ℚ and over real quadratic fields of narrow class
//! number one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{invalid, Result};
use crate::nf::arith::{divisor_count, mod_inverse};
use crate::nf::{Ideal, Integral, QuadField};

/// Adds `e(num/den)` for each reduced phase. Both the classical and the
/// number-field paths go through here so that the ℚ reduction is exact.
fn accumulate(phases: impl Iterator<Item = (i128, i128)>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (num, den) in phases {
        let num = num.rem_euclid(den);
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        let theta = TAU * (num as f64 / den as f64);
        acc += Complex64::new(theta.cos(), theta.sin());
    }
    acc
}

/// `S(a, b; c)` as a complex number.
pub fn kloosterman_classical_complex(a: i64, b: i64, c: u64) -> Complex64 {
    let ci = c as i64;
    let phases = (0..ci).filter_map(move |x| {
        let xbar = mod_inverse(x, ci)?;
        let num = a as i128 * x as i128 + b as i128 * xbar as i128;
        Some((num, c as i128))
    });
    accumulate(phases)
}

/// `S(a, b; c) = Σ_{x mod c, (x,c)=1} e((a x + b x̄)/c)`.
pub fn kloosterman_classical(a: i64, b: i64, c: u64) -> f64 {
    assert!(c >= 1, "modulus must be positive");
    kloosterman_classical_complex(a, b, c).re
}

/// `|S(a,b;c)| / (τ(c) · gcd(a,b,c)^{1/2} · c^{1/2})`.
pub fn weil_ratio_classical(a: i64, b: i64, c: u64) -> f64 {
    let g = (a.unsigned_abs()).gcd(&b.unsigned_abs()).gcd(&c);
    kloosterman_classical(a, b, c).abs() / (divisor_count(c) as f64 * (g as f64 * c as f64).sqrt())
}

/// Arguments of a number-field Kloosterman sum with all ideal slots trivial.
#[derive(Debug, Clone)]
pub struct KloostermanInput<'a> {
    pub field: &'a QuadField,
    pub alpha: Integral,
    pub beta: Integral,
    pub c: Integral,
}

/// `O_F / I` with representatives `x + yω`, `0 ≤ x < a`, `0 ≤ y < c`.
pub struct ResidueRing<'a> {
    field: &'a QuadField,
    a: i128,
    b: i128,
    c: i128,
    /// Order of the unit group.
    phi: u64,
}

impl<'a> ResidueRing<'a> {
    pub fn new(field: &'a QuadField, ideal: &Ideal) -> Result<Self> {
        let (a, b, c) = ideal.hnf();
        let phi = field
            .factor_ideal(ideal)?
            .iter()
            .fold(ideal.norm(), |acc, (q, _)| acc / q.norm * (q.norm - 1));
        Ok(Self {
            field,
            a: a as i128,
            b: b as i128,
            c: c as i128,
            phi,
        })
    }

    pub fn size(&self) -> u64 {
        (self.a * self.c) as u64
    }

    pub fn unit_count(&self) -> u64 {
        self.phi
    }

    pub fn reduce(&self, (x, y): (i128, i128)) -> (i128, i128) {
        let q = y.div_euclid(self.c);
        ((x - q * self.b).rem_euclid(self.a), y - q * self.c)
    }

    pub fn mul(&self, u: (i128, i128), v: (i128, i128)) -> (i128, i128) {
        self.reduce(self.field.mul_wide(u, v))
    }

    pub fn pow(&self, mut base: (i128, i128), mut e: u64) -> (i128, i128) {
        let mut acc = self.reduce((1, 0));
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of `x` if it is a unit: `x^φ = 1` exactly for units.
    pub fn inverse(&self, x: (i128, i128)) -> Option<(i128, i128)> {
        if self.phi == 0 {
            return None;
        }
        let inv = self.pow(x, self.phi - 1);
        (self.mul(inv, x) == self.reduce((1, 0))).then_some(inv)
    }

    /// Residue representatives in lexicographic `(y, x)` order.
    pub fn residues(&self) -> impl Iterator<Item = (i128, i128)> + '_ {
        (0..self.c).flat_map(move |y| (0..self.a).map(move |x| (x, y)))
    }
}

fn check_input(input: &KloostermanInput) -> Result<()> {
    input.field.require_narrow_class_one()?;
    if input.c.is_zero() {
        return invalid("Kloosterman modulus c must be nonzero");
    }
    if input.field.is_rational() && (input.alpha.y != 0 || input.beta.y != 0 || input.c.y != 0) {
        return invalid("elements of Q must have zero omega coordinate");
    }
    Ok(())
}

/// `Σ_{x ∈ (O/(c))^×} e(Tr((αx + βx̄)/(c√D)))` as a complex number.
pub fn kloosterman_nf_complex(input: &KloostermanInput) -> Result<Complex64> {
    check_input(input)?;
    let f = input.field;
    let ideal = f.principal_ideal(input.c)?;
    let ring = ResidueRing::new(f, &ideal)?;
    let alpha = (input.alpha.x as i128, input.alpha.y as i128);
    let beta = (input.beta.x as i128, input.beta.y as i128);
    if f.is_rational() {
        let c = input.c.x.abs() as i128;
        let phases = ring.residues().filter_map(|x| {
            let xbar = ring.inverse(x)?;
            Some((alpha.0 * x.0 + beta.0 * xbar.0, c))
        });
        return Ok(accumulate(phases));
    }
    // w/(c√D) = w·γ̄/N(γ) with γ = c√D.
    let gamma = f.mul(input.c, f.sqrt_disc())?;
    let gamma_bar = f.conj(gamma);
    let gamma_bar = (gamma_bar.x as i128, gamma_bar.y as i128);
    let den = f.norm(gamma);
    let (t, _) = f.omega_poly();
    let mut phases = Vec::with_capacity(ring.unit_count() as usize);
    for x in ring.residues() {
        let Some(xbar) = ring.inverse(x) else { continue };
        let ax = f.mul_wide(alpha, x);
        let bx = f.mul_wide(beta, xbar);
        let w = (ax.0 + bx.0, ax.1 + bx.1);
        let p = f.mul_wide(w, gamma_bar);
        let tr = 2 * p.0 + t as i128 * p.1;
        // Keep the denominator positive.
        phases.push(if den < 0 { (-tr, -den) } else { (tr, den) });
    }
    Ok(accumulate(phases.into_iter()))
}

pub fn kloosterman_nf(input: &KloostermanInput) -> Result<f64> {
    Ok(kloosterman_nf_complex(input)?.re)
}

/// `|Kl| / (N(gcd((α),(β),(c)))^{1/2} · τ((c)) · N(c)^{1/2})`.
pub fn weil_ratio(input: &KloostermanInput) -> Result<f64> {
    let kl = kloosterman_nf(input)?;
    let f = input.field;
    let c_ideal = f.principal_ideal(input.c)?;
    let gens: Vec<Integral> = [input.alpha, input.beta, input.c]
        .into_iter()
        .filter(|g| !g.is_zero())
        .collect();
    let g = f.ideal_from_generators(&gens)?;
    let tau = f.tau(&c_ideal)? as f64;
    Ok(kl.abs() / ((g.norm() as f64).sqrt() * tau * (c_ideal.norm() as f64).sqrt()))
}

/// Largest Weil ratio over orbit representatives `c` with `|N(c)| ≤ bound`.
pub fn weil_sweep(field: &QuadField, alpha: Integral, beta: Integral, bound: u64) -> Result<Vec<(u64, f64, f64)>> {
    let cs = field.enumerate_ideal_elements(&field.unit_ideal(), bound)?;
    cs.into_iter()
        .map(|c| {
            let input = KloostermanInput { field, alpha, beta, c };
            let n = field.norm(c).unsigned_abs() as u64;
            Ok((n, kloosterman_nf(&input)?, weil_ratio(&input)?))
        })
        .collect()
}
