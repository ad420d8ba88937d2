use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::arith::{factor, is_prime, primes_up_to, sqrt_mod_prime};
use super::field::{Integral, QuadField};
use crate::error::{invalid, Error, Result};

/// An integral ideal in Hermite normal form: the lattice with Z-basis
/// `{a, b + c·ω}`, where `c | a`, `c | b` and `0 ≤ b < a`.
///
/// Over ℚ the ideal `(m)` is stored as `a = m, b = 0, c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ideal {
    a: i64,
    b: i64,
    c: i64,
    norm: u64,
}

impl Ideal {
    pub fn hnf(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    pub fn norm(&self) -> u64 {
        self.norm
    }

    pub fn is_unit(&self) -> bool {
        self.norm == 1
    }

    /// Smallest positive rational integer in the ideal.
    pub fn min_integer(&self) -> i64 {
        self.a
    }

    fn basis(&self) -> [(i128, i128); 2] {
        [(self.a as i128, 0), (self.b as i128, self.c as i128)]
    }
}

impl Ord for Ideal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.norm, self.a, self.b, self.c).cmp(&(other.norm, other.a, other.b, other.c))
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}+{}w]", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
    /// A rational prime viewed in ℚ itself.
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub p: u64,
    pub split_type: SplitType,
    pub residue_degree: u8,
    pub ideal: Ideal,
    pub norm: u64,
}

/// Reduces a generating set of a rank-≤2 lattice in `Z ⊕ Zω` to HNF.
fn lattice_hnf(gens: &[(i128, i128)]) -> Result<(i128, i128, i128)> {
    let mut pivot = (0i128, 0i128);
    let mut a = 0i128;
    for &v in gens {
        if v.1 == 0 {
            a = a.gcd(&v.0);
            continue;
        }
        if pivot.1 == 0 {
            a = a.gcd(&pivot.0);
            pivot = v;
            continue;
        }
        let e = pivot.1.extended_gcd(&v.1);
        let g = e.gcd;
        let new_pivot = (e.x * pivot.0 + e.y * v.0, g);
        let (sp, sv) = (v.1 / g, pivot.1 / g);
        let reduced = sp
            .checked_mul(pivot.0)
            .and_then(|l| sv.checked_mul(v.0).and_then(|r| l.checked_sub(r)))
            .ok_or(Error::Overflow("ideal HNF"))?;
        a = a.gcd(&reduced);
        pivot = new_pivot;
        if a != 0 {
            pivot.0 = pivot.0.rem_euclid(a);
        }
    }
    if pivot.1 < 0 {
        pivot = (-pivot.0, -pivot.1);
    }
    if a == 0 || pivot.1 == 0 {
        return invalid("ideal must have full rank");
    }
    Ok((a, pivot.0.rem_euclid(a), pivot.1))
}

impl QuadField {
    fn ideal_from_hnf(&self, (a, b, c): (i128, i128, i128)) -> Result<Ideal> {
        let cast = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("ideal HNF"));
        let norm = u64::try_from(a * c).map_err(|_| Error::Overflow("ideal norm"))?;
        Ok(Ideal {
            a: cast(a)?,
            b: cast(b)?,
            c: cast(c)?,
            norm,
        })
    }

    fn ideal_from_lattice(&self, gens: &[(i128, i128)]) -> Result<Ideal> {
        if self.is_rational() {
            let g = gens.iter().fold(0i128, |g, v| g.gcd(&v.0));
            if g == 0 {
                return invalid("zero ideal");
            }
            return self.ideal_from_hnf((g, 0, 1));
        }
        self.ideal_from_hnf(lattice_hnf(gens)?)
    }

    pub fn unit_ideal(&self) -> Ideal {
        Ideal {
            a: 1,
            b: 0,
            c: 1,
            norm: 1,
        }
    }

    /// The ideal generated by the given elements.
    pub fn ideal_from_generators(&self, gens: &[Integral]) -> Result<Ideal> {
        let omega = (0i128, 1i128);
        let mut lattice = Vec::with_capacity(2 * gens.len());
        for g in gens.iter().filter(|g| !g.is_zero()) {
            let v = (g.x as i128, g.y as i128);
            lattice.push(v);
            if !self.is_rational() {
                lattice.push(self.mul_wide(v, omega));
            }
        }
        if lattice.is_empty() {
            return invalid("zero ideal");
        }
        self.ideal_from_lattice(&lattice)
    }

    pub fn principal_ideal(&self, g: Integral) -> Result<Ideal> {
        self.ideal_from_generators(&[g])
    }

    /// The ideal `(n)` for a rational integer `n ≥ 1`.
    pub fn rational_ideal(&self, n: u64) -> Result<Ideal> {
        self.principal_ideal(Integral::rational(n as i64))
    }

    pub fn ideal_norm(&self, i: &Ideal) -> u64 {
        i.norm
    }

    pub fn ideal_mul(&self, i: &Ideal, j: &Ideal) -> Result<Ideal> {
        if self.is_rational() {
            let a = (i.a as i128) * (j.a as i128);
            return self.ideal_from_hnf((a, 0, 1));
        }
        let mut gens = Vec::with_capacity(4);
        for u in i.basis() {
            for v in j.basis() {
                gens.push(self.mul_wide(u, v));
            }
        }
        self.ideal_from_lattice(&gens)
    }

    pub fn ideal_pow(&self, i: &Ideal, e: u32) -> Result<Ideal> {
        let mut acc = self.unit_ideal();
        for _ in 0..e {
            acc = self.ideal_mul(&acc, i)?;
        }
        Ok(acc)
    }

    /// `i + j`, the greatest common divisor.
    pub fn ideal_sum(&self, i: &Ideal, j: &Ideal) -> Result<Ideal> {
        let gens = [i.basis(), j.basis()].concat();
        self.ideal_from_lattice(&gens)
    }

    pub fn ideal_contains(&self, i: &Ideal, e: Integral) -> bool {
        self.contains_wide(i, (e.x as i128, e.y as i128))
    }

    fn contains_wide(&self, i: &Ideal, (x, y): (i128, i128)) -> bool {
        if self.is_rational() {
            return y == 0 && x % i.a as i128 == 0;
        }
        let c = i.c as i128;
        if y % c != 0 {
            return false;
        }
        (x - (i.b as i128) * (y / c)) % (i.a as i128) == 0
    }

    /// `i ⊆ j`, equivalently `j | i`.
    pub fn ideal_divides(&self, j: &Ideal, i: &Ideal) -> bool {
        if self.is_rational() {
            return i.a % j.a == 0;
        }
        i.basis().iter().all(|&v| self.contains_wide(j, v))
    }

    pub fn coprime(&self, i: &Ideal, j: &Ideal) -> Result<bool> {
        Ok(self.ideal_sum(i, j)?.is_unit())
    }

    /// Prime ideals lying above the rational prime `p`, in conjugate order.
    pub fn primes_above(&self, p: u64) -> Result<Vec<PrimeIdeal>> {
        if !is_prime(p) {
            return invalid(format!("{p} is not prime"));
        }
        let p_ideal = self.rational_ideal(p)?;
        if self.is_rational() {
            return Ok(vec![PrimeIdeal {
                p,
                split_type: SplitType::Rational,
                residue_degree: 1,
                ideal: p_ideal,
                norm: p,
            }]);
        }
        let split = self.splitting_type(p);
        if split == SplitType::Inert {
            return Ok(vec![PrimeIdeal {
                p,
                split_type: split,
                residue_degree: 2,
                ideal: p_ideal,
                norm: p * p,
            }]);
        }
        let mut out = Vec::with_capacity(2);
        for r in self.omega_roots_mod(p) {
            // (p, ω − r) has HNF basis {p, −r + ω}.
            let b = ((p - r) % p) as i128;
            let ideal = self.ideal_from_hnf((p as i128, b, 1))?;
            out.push(PrimeIdeal {
                p,
                split_type: split,
                residue_degree: 1,
                ideal,
                norm: p,
            });
        }
        Ok(out)
    }

    /// Roots of the minimal polynomial `x² − t·x + n` of `ω` modulo `p`,
    /// ascending and without repetition.
    fn omega_roots_mod(&self, p: u64) -> Vec<u64> {
        let (t, n) = self.omega_poly();
        let pi = p as i128;
        let eval = |x: i128| (x * x - t as i128 * x + n as i128).rem_euclid(pi);
        let mut roots = if p == 2 {
            (0..2).filter(|&x| eval(x) == 0).map(|x| x as u64).collect::<Vec<_>>()
        } else {
            let disc = (self.disc() as i128).rem_euclid(pi) as u64;
            let s = sqrt_mod_prime(disc, p).expect("split or ramified prime has a root") as i128;
            let inv2 = (pi + 1) / 2;
            [t as i128 + s, t as i128 - s]
                .iter()
                .map(|v| (v.rem_euclid(pi) * inv2 % pi) as u64)
                .collect()
        };
        roots.sort_unstable();
        roots.dedup();
        debug_assert!(roots.iter().all(|&r| eval(r as i128) == 0));
        roots
    }

    /// Decomposition type of `p` from the Kronecker symbol `(D/p)`.
    pub fn splitting_type(&self, p: u64) -> SplitType {
        if self.is_rational() {
            return SplitType::Rational;
        }
        match super::arith::kronecker(self.disc(), p) {
            1 => SplitType::Split,
            -1 => SplitType::Inert,
            _ => SplitType::Ramified,
        }
    }

    /// All prime ideals of norm at most `x`, sorted by norm, then `p`, then
    /// conjugate order.
    pub fn enumerate_prime_ideals(&self, x: u64) -> Vec<PrimeIdeal> {
        let mut out = Vec::new();
        for p in primes_up_to(x) {
            if !self.is_rational() && self.splitting_type(p) == SplitType::Inert && p.saturating_mul(p) > x {
                continue;
            }
            out.extend(self.primes_above(p).expect("sieved primes are prime"));
        }
        out.sort_by_key(|q| q.norm);
        out
    }

    /// Prime factorization of an integral ideal as `(prime, exponent)` pairs
    /// in prime-enumeration order.
    pub fn factor_ideal(&self, i: &Ideal) -> Result<Vec<(PrimeIdeal, u32)>> {
        let mut out = Vec::new();
        for (p, _) in factor(i.norm) {
            for q in self.primes_above(p)? {
                let mut e = 0;
                let mut power = q.ideal;
                while self.ideal_divides(&power, i) {
                    e += 1;
                    power = self.ideal_mul(&power, &q.ideal)?;
                }
                if e > 0 {
                    out.push((q, e));
                }
            }
        }
        out.sort_by_key(|(q, _)| q.norm);
        Ok(out)
    }

    fn ideal_from_factorization(&self, fac: &[(PrimeIdeal, u32)]) -> Result<Ideal> {
        fac.iter().try_fold(self.unit_ideal(), |acc, (q, e)| {
            self.ideal_mul(&acc, &self.ideal_pow(&q.ideal, *e)?)
        })
    }

    /// All integral divisors of `n`, sorted by norm then HNF.
    pub fn divisors(&self, n: &Ideal) -> Result<Vec<Ideal>> {
        let fac = self.factor_ideal(n)?;
        let mut divs = vec![self.unit_ideal()];
        for (q, e) in fac {
            let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
            for d in &divs {
                let mut cur = *d;
                next.push(cur);
                for _ in 0..e {
                    cur = self.ideal_mul(&cur, &q.ideal)?;
                    next.push(cur);
                }
            }
            divs = next;
        }
        divs.sort();
        Ok(divs)
    }

    /// Möbius function; `0` on non-squarefree ideals.
    pub fn moebius(&self, l: &Ideal) -> Result<i32> {
        let fac = self.factor_ideal(l)?;
        if fac.iter().any(|&(_, e)| e > 1) {
            return Ok(0);
        }
        Ok(if fac.len() % 2 == 0 { 1 } else { -1 })
    }

    /// Number of integral divisors.
    pub fn tau(&self, n: &Ideal) -> Result<u64> {
        Ok(self.factor_ideal(n)?.iter().map(|&(_, e)| e as u64 + 1).product())
    }

    /// `∏_{𝔭 | n} (1 − N(𝔭)^{-1})`.
    pub fn euler_level_product(&self, n: &Ideal) -> Result<Rational64> {
        Ok(self
            .factor_ideal(n)?
            .iter()
            .map(|(q, _)| Rational64::new(q.norm as i64 - 1, q.norm as i64))
            .product())
    }

    pub fn is_squarefree_ideal(&self, n: &Ideal) -> Result<bool> {
        Ok(self.factor_ideal(n)?.iter().all(|&(_, e)| e == 1))
    }

    /// All integral ideals of norm at most `x`, sorted by norm then HNF.
    pub fn enumerate_ideals(&self, x: u64) -> Result<Vec<Ideal>> {
        let primes = self.enumerate_prime_ideals(x);
        let mut out = vec![self.unit_ideal()];
        // Extend by primes in order so each ideal is built exactly once.
        for q in &primes {
            let len = out.len();
            for idx in 0..len {
                let mut cur = out[idx];
                loop {
                    if cur.norm.saturating_mul(q.norm) > x {
                        break;
                    }
                    cur = self.ideal_mul(&cur, &q.ideal)?;
                    out.push(cur);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// A squarefree ideal of the given norm, built from the first prime of
    /// each prime-power norm dividing it.
    pub fn level_ideal_of_norm(&self, n: u64) -> Result<Ideal> {
        if n == 0 {
            return invalid("level norm must be positive");
        }
        let mut fac = Vec::new();
        for (p, e) in factor(n) {
            let above = self.primes_above(p)?;
            let q = match (e, above[0].residue_degree) {
                (1, 1) => above[0],
                (2, 2) => above[0],
                _ => {
                    return invalid(format!(
                        "no squarefree ideal of norm {n}: prime {p} appears to power {e}"
                    ))
                }
            };
            fac.push((q, 1));
        }
        self.ideal_from_factorization(&fac)
    }

    /// The different `(√D)`.
    pub fn different(&self) -> Ideal {
        self.principal_ideal(self.sqrt_disc())
            .expect("different is a nonzero principal ideal")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(v: &[PrimeIdeal]) -> Vec<u64> {
        v.iter().map(|q| q.norm).collect()
    }

    #[test]
    fn splitting_in_sqrt5() {
        let f = QuadField::new(5).unwrap();
        assert_eq!(f.splitting_type(11), SplitType::Split);
        assert_eq!(f.splitting_type(5), SplitType::Ramified);
        assert_eq!(f.splitting_type(3), SplitType::Inert);
        assert_eq!(f.splitting_type(2), SplitType::Inert);
    }

    #[test]
    fn prime_ideals_sqrt5() {
        let f = QuadField::new(5).unwrap();
        assert_eq!(norms(&f.enumerate_prime_ideals(30)), vec![4, 5, 9, 11, 11, 19, 19, 29, 29]);
        assert!(f.enumerate_prime_ideals(3).is_empty());
        let q = QuadField::rationals();
        assert_eq!(norms(&q.enumerate_prime_ideals(10)), vec![2, 3, 5, 7]);
        let twelve = q.rational_ideal(12).unwrap();
        let fac: Vec<(u64, u32)> = q.factor_ideal(&twelve).unwrap().iter().map(|(p, e)| (p.norm, *e)).collect();
        assert_eq!(fac, vec![(2, 2), (3, 1)]);
        assert_eq!(q.divisors(&twelve).unwrap().len(), 6);
    }

    #[test]
    fn prime_ideals_have_expected_norms() {
        for d in [2, 3, 5, 7, 13, 15] {
            let f = QuadField::new(d).unwrap();
            for q in f.enumerate_prime_ideals(300) {
                assert_eq!(q.ideal.norm(), q.norm);
                let fac = f.factor_ideal(&q.ideal).unwrap();
                assert_eq!(fac.len(), 1);
                assert_eq!(fac[0].1, 1);
            }
            // (p) factors as the product of the primes above p.
            for p in [2, 3, 5, 7, 11, 13] {
                let above = f.primes_above(p).unwrap();
                let prod = match above[0].split_type {
                    SplitType::Split => f.ideal_mul(&above[0].ideal, &above[1].ideal).unwrap(),
                    SplitType::Ramified => f.ideal_pow(&above[0].ideal, 2).unwrap(),
                    _ => above[0].ideal,
                };
                assert_eq!(prod, f.rational_ideal(p).unwrap(), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn different_has_norm_disc() {
        for d in [2, 3, 5, 13] {
            let f = QuadField::new(d).unwrap();
            assert_eq!(f.different().norm() as i64, f.disc());
        }
    }

    #[test]
    fn utilities() {
        let f = QuadField::new(5).unwrap();
        let one = f.unit_ideal();
        assert_eq!(f.moebius(&one).unwrap(), 1);
        let three = f.rational_ideal(3).unwrap();
        assert_eq!(f.tau(&three).unwrap(), 2);
        let p11 = f.primes_above(11).unwrap()[0].ideal;
        assert_eq!(f.euler_level_product(&p11).unwrap(), Rational64::new(10, 11));
        let nine = f.rational_ideal(9).unwrap();
        assert_eq!(f.moebius(&nine).unwrap(), 0);
        let eleven = f.rational_ideal(11).unwrap();
        assert_eq!(f.moebius(&eleven).unwrap(), 1);
        assert_eq!(f.divisors(&eleven).unwrap().len(), 4);
        assert_eq!(f.level_ideal_of_norm(11).unwrap(), p11);
        assert!(f.level_ideal_of_norm(3).is_err());
        assert_eq!(f.level_ideal_of_norm(99).unwrap().norm(), 99);
    }

    #[test]
    fn ideal_counts_match_dedekind_coefficients() {
        // Number of ideals of norm m is Σ_{k | m} χ_D(k).
        let f = QuadField::new(5).unwrap();
        let ideals = f.enumerate_ideals(200).unwrap();
        for m in 1..=200u64 {
            let expected: i64 = (1..=m)
                .filter(|k| m % k == 0)
                .map(|k| super::super::arith::kronecker(5, k) as i64)
                .sum();
            let got = ideals.iter().filter(|i| i.norm() == m).count() as i64;
            assert_eq!(got, expected, "m = {m}");
        }
    }
}
