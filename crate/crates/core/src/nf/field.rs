use std::f64::consts::PI;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::arith::{is_squarefree, isqrt, kronecker};
use crate::error::{invalid, Error, Result};

/// Sentinel value of `d` selecting the rational field.
pub const RATIONALS: i64 = 1;

const MAX_CF_STEPS: usize = 1_000_000;

/// An algebraic integer `x + y·ω` in the integral basis `{1, ω}` of `O_F`.
///
/// `ω = (1 + √d)/2` when `d ≡ 1 mod 4`, `ω = √d` otherwise. Over ℚ the
/// `y` coordinate is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Integral {
    pub x: i64,
    pub y: i64,
}

impl Integral {
    pub const ZERO: Integral = Integral { x: 0, y: 0 };
    pub const ONE: Integral = Integral { x: 1, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub const fn rational(x: i64) -> Self {
        Self { x, y: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for Integral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.y {
            0 => write!(f, "{}", self.x),
            y => write!(f, "{}{:+}w", self.x, y),
        }
    }
}

/// A field element `a + b·√d` with exact rational coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldElement {
    pub a: Rational64,
    pub b: Rational64,
}

/// A real quadratic field `ℚ(√d)`, or ℚ itself, with the constants needed
/// by the trace-formula and explicit-formula code.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadField {
    d: i64,
    disc: i64,
    degree: u8,
    // ω² = t·ω − n
    omega_trace: i64,
    omega_norm: i64,
    fund_unit: Integral,
    unit_norm: i8,
    regulator: f64,
    zeta2: f64,
    zeta2_tail: f64,
    class_number: u64,
    narrow_class_number: u64,
    sqrt_d: f64,
}

impl QuadField {
    pub fn rationals() -> Self {
        Self {
            d: RATIONALS,
            disc: 1,
            degree: 1,
            omega_trace: 0,
            omega_norm: 0,
            fund_unit: Integral::ONE,
            unit_norm: 1,
            regulator: 1.0,
            zeta2: PI * PI / 6.0,
            zeta2_tail: 0.0,
            class_number: 1,
            narrow_class_number: 1,
            sqrt_d: 1.0,
        }
    }

    /// Builds `ℚ(√d)` for squarefree `d > 1`; `d = 1` selects ℚ.
    pub fn new(d: i64) -> Result<Self> {
        if d == RATIONALS {
            return Ok(Self::rationals());
        }
        if d <= 1 {
            return invalid(format!("d must be a squarefree integer > 1 (or 1 for Q), got {d}"));
        }
        if !is_squarefree(d as u64) {
            return invalid(format!("d = {d} is not squarefree"));
        }
        let (disc, omega_trace, omega_norm) = if d % 4 == 1 {
            (d, 1, (1 - d) / 4)
        } else {
            (4 * d, 0, -d)
        };
        let mut field = Self {
            d,
            disc,
            degree: 2,
            omega_trace,
            omega_norm,
            fund_unit: Integral::ONE,
            unit_norm: 1,
            regulator: 0.0,
            zeta2: 0.0,
            zeta2_tail: 0.0,
            class_number: 0,
            narrow_class_number: 0,
            sqrt_d: (d as f64).sqrt(),
        };
        field.fund_unit = field.continued_fraction_unit()?;
        field.unit_norm = field.norm(field.fund_unit) as i8;
        field.regulator = field.embed(field.fund_unit).0.ln();
        let (l2, tail) = dirichlet_l2(disc);
        field.zeta2 = PI * PI / 6.0 * l2;
        field.zeta2_tail = PI * PI / 6.0 * tail;
        field.class_number = field.analytic_class_number()?;
        field.narrow_class_number = if field.unit_norm == -1 {
            field.class_number
        } else {
            2 * field.class_number
        };
        Ok(field)
    }

    /// Fundamental unit from the first convergent `p/q` of the continued
    /// fraction of `ω` with `|N(p − qω)| = 1`.
    fn continued_fraction_unit(&self) -> Result<Integral> {
        let d = self.d as i128;
        let s = isqrt(self.d as u64) as i128;
        let (mut p_cf, mut q_cf): (i128, i128) = if self.d % 4 == 1 { (1, 2) } else { (0, 1) };
        let (mut p_prev, mut p_cur): (i128, i128) = (0, 1);
        let (mut q_prev, mut q_cur): (i128, i128) = (1, 0);
        let t = self.omega_trace as i128;
        let n = self.omega_norm as i128;
        for _ in 0..MAX_CF_STEPS {
            let a = (p_cf + s).div_euclid(q_cf);
            let p_next = a
                .checked_mul(p_cur)
                .and_then(|v| v.checked_add(p_prev))
                .ok_or(Error::Overflow("continued fraction"))?;
            let q_next = a
                .checked_mul(q_cur)
                .and_then(|v| v.checked_add(q_prev))
                .ok_or(Error::Overflow("continued fraction"))?;
            (p_prev, p_cur, q_prev, q_cur) = (p_cur, p_next, q_cur, q_next);
            let norm = p_cur
                .checked_mul(p_cur)
                .and_then(|pp| pp.checked_sub(t * p_cur * q_cur))
                .and_then(|v| q_cur.checked_mul(q_cur).and_then(|qq| v.checked_add(n * qq)))
                .ok_or(Error::Overflow("continued fraction"))?;
            if norm.abs() == 1 {
                let x = i64::try_from(p_cur - q_cur * t).map_err(|_| Error::Overflow("fundamental unit"))?;
                let y = i64::try_from(q_cur).map_err(|_| Error::Overflow("fundamental unit"))?;
                return Ok(Integral::new(x, y));
            }
            let p_new = a * q_cf - p_cf;
            q_cf = (d - p_new * p_new) / q_cf;
            p_cf = p_new;
        }
        Err(Error::InvalidInput(format!(
            "no unit found within {MAX_CF_STEPS} continued-fraction steps for d = {}",
            self.d
        )))
    }

    /// `h = −Σ χ(r) log sin(πr/D) / (2 R_F)`, rounded.
    fn analytic_class_number(&self) -> Result<u64> {
        let disc = self.disc;
        let s: f64 = (1..disc)
            .map(|r| kronecker(disc, r as u64) as f64 * (PI * r as f64 / disc as f64).sin().ln())
            .sum();
        let h = -s / (2.0 * self.regulator);
        let rounded = h.round();
        if rounded < 1.0 || (h - rounded).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "class number computation did not converge for d = {} (got {h})",
                self.d
            )));
        }
        Ok(rounded as u64)
    }

    pub fn d(&self) -> i64 {
        self.d
    }
    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }
    /// Field discriminant `d_F`.
    pub fn disc(&self) -> i64 {
        self.disc
    }
    pub fn degree(&self) -> usize {
        self.degree as usize
    }
    pub fn fund_unit(&self) -> Integral {
        self.fund_unit
    }
    pub fn unit_norm(&self) -> i8 {
        self.unit_norm
    }
    pub fn regulator(&self) -> f64 {
        self.regulator
    }
    /// `ζ_F(2)`.
    pub fn zeta2(&self) -> f64 {
        self.zeta2
    }
    /// Bound on the neglected tail in [`zeta2`](Self::zeta2).
    pub fn zeta2_tail_bound(&self) -> f64 {
        self.zeta2_tail
    }
    pub fn class_number(&self) -> u64 {
        self.class_number
    }
    pub fn narrow_class_number(&self) -> u64 {
        self.narrow_class_number
    }
    pub fn omega_poly(&self) -> (i64, i64) {
        (self.omega_trace, self.omega_norm)
    }

    pub fn require_narrow_class_one(&self) -> Result<()> {
        if self.narrow_class_number == 1 {
            Ok(())
        } else {
            Err(Error::UnsupportedField(format!(
                "Q(sqrt({})) has narrow class number {}; only h+ = 1 is supported",
                self.d, self.narrow_class_number
            )))
        }
    }

    /// Real embeddings `(σ₁(ω), σ₂(ω))`.
    pub fn omega_embeddings(&self) -> (f64, f64) {
        if self.is_rational() {
            (0.0, 0.0)
        } else if self.omega_trace == 1 {
            ((1.0 + self.sqrt_d) / 2.0, (1.0 - self.sqrt_d) / 2.0)
        } else {
            (self.sqrt_d, -self.sqrt_d)
        }
    }

    pub fn embed(&self, e: Integral) -> (f64, f64) {
        let (w1, w2) = self.omega_embeddings();
        (e.x as f64 + e.y as f64 * w1, e.x as f64 + e.y as f64 * w2)
    }

    /// Embedding values as a vector of length `degree`.
    pub fn embeddings(&self, e: Integral) -> Vec<f64> {
        let (a, b) = self.embed(e);
        if self.is_rational() {
            vec![a]
        } else {
            vec![a, b]
        }
    }

    pub fn norm(&self, e: Integral) -> i128 {
        let (x, y) = (e.x as i128, e.y as i128);
        if self.is_rational() {
            x
        } else {
            x * x + self.omega_trace as i128 * x * y + self.omega_norm as i128 * y * y
        }
    }

    pub fn trace(&self, e: Integral) -> i128 {
        if self.is_rational() {
            e.x as i128
        } else {
            2 * e.x as i128 + self.omega_trace as i128 * e.y as i128
        }
    }

    pub fn conj(&self, e: Integral) -> Integral {
        if self.is_rational() {
            e
        } else {
            Integral::new(e.x + self.omega_trace * e.y, -e.y)
        }
    }

    /// Product with the coordinates kept in `i128`; callers reduce as needed.
    pub fn mul_wide(&self, a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
        let t = self.omega_trace as i128;
        let n = self.omega_norm as i128;
        (
            a.0 * b.0 - n * a.1 * b.1,
            a.0 * b.1 + a.1 * b.0 + t * a.1 * b.1,
        )
    }

    pub fn mul(&self, a: Integral, b: Integral) -> Result<Integral> {
        let (x, y) = self.mul_wide((a.x as i128, a.y as i128), (b.x as i128, b.y as i128));
        Ok(Integral::new(
            i64::try_from(x).map_err(|_| Error::Overflow("element product"))?,
            i64::try_from(y).map_err(|_| Error::Overflow("element product"))?,
        ))
    }

    pub fn pow(&self, a: Integral, e: u32) -> Result<Integral> {
        let mut acc = Integral::ONE;
        for _ in 0..e {
            acc = self.mul(acc, a)?;
        }
        Ok(acc)
    }

    pub fn is_totally_positive(&self, e: Integral) -> bool {
        self.embeddings(e).iter().all(|&v| v > 0.0)
    }

    /// `√D` as an algebraic integer (`1` over ℚ).
    pub fn sqrt_disc(&self) -> Integral {
        if self.is_rational() {
            Integral::ONE
        } else if self.omega_trace == 1 {
            Integral::new(-1, 2)
        } else {
            Integral::new(0, 2)
        }
    }

    /// The totally positive fundamental unit `ε₊` generating `O^{×+}`.
    pub fn totally_positive_fund_unit(&self) -> Integral {
        if self.is_rational() {
            Integral::ONE
        } else if self.unit_norm == 1 {
            self.fund_unit
        } else {
            self.mul(self.fund_unit, self.fund_unit)
                .expect("square of the fundamental unit fits in i64")
        }
    }

    /// Representatives of `O^{×+}/O^{×2}`.
    pub fn totally_positive_unit_reps(&self) -> Vec<Integral> {
        if self.is_rational() || self.unit_norm == -1 {
            vec![Integral::ONE]
        } else {
            // N(ε) = +1 and ε > 1 force ε' = 1/ε > 0.
            vec![Integral::ONE, self.fund_unit]
        }
    }

    pub fn to_field_element(&self, e: Integral) -> FieldElement {
        if self.omega_trace == 1 && !self.is_rational() {
            FieldElement {
                a: Rational64::new(2 * e.x + e.y, 2),
                b: Rational64::new(e.y, 2),
            }
        } else {
            FieldElement {
                a: Rational64::from_integer(e.x),
                b: Rational64::from_integer(e.y),
            }
        }
    }

    /// Converts `a + b√d` to integral coordinates; fails for non-integers.
    pub fn to_integral(&self, fe: FieldElement) -> Result<Integral> {
        let not_integral = || Error::InvalidInput("element is not an algebraic integer".into());
        if self.is_rational() {
            if *fe.b.numer() != 0 || !fe.a.is_integer() {
                return Err(not_integral());
            }
            return Ok(Integral::rational(fe.a.to_integer()));
        }
        if self.omega_trace == 1 {
            // a + b√d = (a − b) + 2b·ω
            let y = fe.b * 2;
            let x = fe.a - fe.b;
            if !y.is_integer() || !x.is_integer() {
                return Err(not_integral());
            }
            Ok(Integral::new(x.to_integer(), y.to_integer()))
        } else {
            if !fe.a.is_integer() || !fe.b.is_integer() {
                return Err(not_integral());
            }
            Ok(Integral::new(fe.a.to_integer(), fe.b.to_integer()))
        }
    }

    pub fn field_element_embeddings(&self, fe: FieldElement) -> (f64, f64) {
        let a = *fe.a.numer() as f64 / *fe.a.denom() as f64;
        let b = *fe.b.numer() as f64 / *fe.b.denom() as f64;
        (a + b * self.sqrt_d, a - b * self.sqrt_d)
    }

    pub fn field_element_norm(&self, fe: FieldElement) -> Rational64 {
        if self.is_rational() {
            fe.a
        } else {
            fe.a * fe.a - fe.b * fe.b * self.d
        }
    }
}

/// `L(2, χ_D)` summed over complete periods with an Euler-Maclaurin tail.
/// Returns the value and the magnitude of the first neglected tail term.
fn dirichlet_l2(disc: i64) -> (f64, f64) {
    let dd = disc as f64;
    let periods = (100_000 / disc).max(64) as usize;
    let mut total = 0.0;
    let mut bound = 0.0f64;
    for r in 1..=disc {
        let chi = kronecker(disc, r as u64);
        if chi == 0 {
            continue;
        }
        let r = r as f64;
        let mut partial = 0.0;
        for m in (0..periods).rev() {
            let v = r + m as f64 * dd;
            partial += 1.0 / (v * v);
        }
        // Σ_{m ≥ M} f(m) for f(m) = (r + mD)^{-2}
        let v = r + periods as f64 * dd;
        let tail = 1.0 / (dd * v) + 0.5 / (v * v) + dd / (6.0 * v.powi(3)) - dd.powi(3) / (30.0 * v.powi(5));
        bound = bound.max(dd.powi(5) / (42.0 * v.powi(7)));
        total += chi as f64 * (partial + tail);
    }
    (total, bound * disc as f64)
}
