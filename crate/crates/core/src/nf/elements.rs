//! Enumeration of ideal elements modulo totally positive units.

use std::collections::BTreeSet;

use super::field::{Integral, QuadField};
use super::ideal::Ideal;
use crate::error::{Error, Result};

const BOUNDARY_TOL: f64 = 1e-9;

impl QuadField {
    /// `|σ₁(c)/σ₂(c)| = 1` decided exactly.
    fn ratio_is_one(&self, c: Integral) -> bool {
        c.y == 0 || self.trace(c) == 0
    }

    /// Whether `c` lies in `1 ≤ |c₁/c₂| < E`, `E = ε₊²`, with the two
    /// boundary cases decided in exact arithmetic.
    fn in_fundamental_domain(&self, c: Integral, log_e: f64) -> Result<bool> {
        let (c1, c2) = self.embed(c);
        let lr = (c1 / c2).abs().ln();
        if lr.abs() < BOUNDARY_TOL {
            return Ok(self.ratio_is_one(c) || lr > 0.0);
        }
        if (lr - log_e).abs() < BOUNDARY_TOL {
            // |c₁/c₂| = E exactly iff ε₊^{-1}c has ratio one.
            let inv = self.conj(self.totally_positive_fund_unit());
            let shifted = self.mul(c, inv)?;
            return Ok(!self.ratio_is_one(shifted) && lr < log_e);
        }
        Ok(lr > 0.0 && lr < log_e)
    }

    /// The representative of the orbit `±ε₊^ℤ·c` inside the fundamental
    /// domain, normalised to `σ₁(c) > 0`.
    pub fn canonical_orbit_rep(&self, c: Integral) -> Result<Integral> {
        if self.is_rational() {
            return Ok(if c.x < 0 { c.neg() } else { c });
        }
        let eps = self.totally_positive_fund_unit();
        let eps_inv = self.conj(eps);
        let log_e = 2.0 * self.embed(eps).0.ln();
        let (c1, c2) = self.embed(c);
        let lr = (c1 / c2).abs().ln();
        let j0 = -(lr / log_e).floor() as i64;
        for j in [j0, j0 - 1, j0 + 1] {
            let unit = if j >= 0 {
                self.pow(eps, j as u32)?
            } else {
                self.pow(eps_inv, (-j) as u32)?
            };
            let cand = self.mul(c, unit)?;
            if self.in_fundamental_domain(cand, log_e)? {
                return Ok(if self.embed(cand).0 < 0.0 { cand.neg() } else { cand });
            }
        }
        Err(Error::Precondition(format!("no fundamental-domain representative for {c}")))
    }

    /// Nonzero `c ∈ 𝔞` with `|N(c)| ≤ B`, one per orbit under `±ε₊^ℤ`,
    /// ordered by `|N(c)|` then `σ₁(c)`.
    pub fn enumerate_ideal_elements(&self, ideal: &Ideal, bound: u64) -> Result<Vec<Integral>> {
        self.require_narrow_class_one()?;
        let (a, b, c) = ideal.hnf();
        if self.is_rational() {
            return Ok((1..=bound as i64 / a).map(|m| Integral::rational(a * m)).collect());
        }
        if bound == 0 {
            return Ok(Vec::new());
        }
        let e = self.embed(self.totally_positive_fund_unit()).0;
        let bf = bound as f64;
        // In the domain, |c₂|² ≤ |N(c)| and |c₁|² < E·|N(c)|.
        let lim1 = e * bf.sqrt() * (1.0 + 1e-12) + 1.0;
        let lim2 = bf.sqrt() * (1.0 + 1e-12) + 1.0;
        let (w1, w2) = self.omega_embeddings();
        let ymax = ((lim1 + lim2) / (w1 - w2)).ceil() as i64;
        let mut reps = BTreeSet::new();
        // y must be a multiple of c.
        let ystart = -ymax - (-ymax).rem_euclid(c);
        let mut y = ystart;
        while y <= ymax {
            let yf = y as f64;
            let lo = (-lim1 - yf * w1).max(-lim2 - yf * w2).floor() as i64;
            let hi = (lim1 - yf * w1).min(lim2 - yf * w2).ceil() as i64;
            // x ≡ b·(y/c) mod a
            let target = (b as i128 * (y / c) as i128).rem_euclid(a as i128) as i64;
            let mut x = lo + (target - lo).rem_euclid(a);
            while x <= hi {
                let el = Integral::new(x, y);
                let n = self.norm(el);
                if n != 0 && n.unsigned_abs() <= bound as u128 {
                    let rep = self.canonical_orbit_rep(el)?;
                    reps.insert((n.unsigned_abs(), rep));
                }
                x += a;
            }
            y += c;
        }
        let mut out: Vec<(u128, Integral)> = reps.into_iter().collect();
        out.sort_by(|(na, ea), (nb, eb)| {
            na.cmp(nb)
                .then(self.embed(*ea).0.total_cmp(&self.embed(*eb).0))
                .then(ea.cmp(eb))
        });
        Ok(out.into_iter().map(|(_, e)| e).collect())
    }

    /// A totally positive generator of `ideal`; requires `h⁺ = 1`.
    pub fn totally_positive_generator(&self, ideal: &Ideal) -> Result<Integral> {
        self.require_narrow_class_one()?;
        let n = ideal.norm();
        let cands = self.enumerate_ideal_elements(ideal, n)?;
        let g = cands
            .into_iter()
            .find(|g| self.norm(*g).unsigned_abs() == n as u128)
            .ok_or_else(|| Error::Precondition(format!("no generator found for {ideal}")))?;
        let g = if self.norm(g) < 0 {
            // h⁺ = 1 forces N(ε) = −1.
            self.mul(g, self.fund_unit())?
        } else {
            g
        };
        Ok(if self.embed(g).0 < 0.0 { g.neg() } else { g })
    }
}
