//! Integer-order Bessel functions of the first kind.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::registry::{Named, Registry};

pub const MAX_ORDER: u32 = 500;
pub const MAX_ARG: f64 = 1e5;

/// A strategy for evaluating `J_ν(x)`.
pub trait BesselMethod: Named + Send + Sync {
    fn eval(&self, nu: u32, x: f64) -> f64;
}

fn check_box(nu: u32, x: f64) -> Result<()> {
    if nu > MAX_ORDER {
        return invalid(format!("Bessel order {nu} exceeds {MAX_ORDER}"));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return invalid(format!("Bessel argument {x} outside [0, {MAX_ARG}]"));
    }
    Ok(())
}

/// Double-double accumulator for the alternating ascending series.
#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

impl Dd {
    fn quick(s: f64, e: f64) -> Self {
        let hi = s + e;
        Dd(hi, e - (hi - s))
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        Dd::quick(s, err + self.1 + o.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        Dd::quick(p, e)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.0 / b;
        let p = q1 * b;
        let pe = q1.mul_add(b, -p);
        let r = (self.0 - p) - pe + self.1;
        Dd::quick(q1, r / b)
    }
}

/// `Σ_m (−1)^m (x/2)^{2m+ν} / (m! (m+ν)!)` in double-double arithmetic.
pub fn series(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let h = Dd(x / 2.0, 0.0);
    let mut t = Dd(1.0, 0.0);
    for j in 1..=nu {
        t = t.mul(h).div_f64(j as f64);
    }
    let neg_h2 = h.mul(h);
    let neg_h2 = Dd(-neg_h2.0, -neg_h2.1);
    let mut sum = t;
    let mut m = 0u32;
    loop {
        m += 1;
        t = t.mul(neg_h2).div_f64(m as f64 * (m + nu) as f64);
        sum = sum.add(t);
        if t.0 == 0.0 || (m as f64 > x / 2.0 && t.0.abs() < 1e-34 * sum.0.abs().max(f64::MIN_POSITIVE)) {
            break;
        }
    }
    sum.0 + sum.1
}

/// Start index for the backward recurrence.
pub fn miller_start(nu: u32, x: f64) -> u32 {
    let m = nu as f64 + x.ceil() + 40.0 + (12.0 * x.cbrt()).ceil();
    let m = m as u32;
    m + (m & 1)
}

/// Miller's backward recurrence normalised by `J₀ + 2Σ_k J_{2k} = 1`.
pub fn miller(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let start = miller_start(nu, x);
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0f64;
    let mut target = 0.0f64;
    for m in (1..=start).rev() {
        // cur = j_m, compute j_{m−1}
        let prev = (2.0 * m as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        let idx = m - 1;
        if idx == nu {
            target = cur;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { cur } else { 2.0 * cur };
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    target / norm
}

pub struct SeriesMethod;
pub struct MillerMethod;
/// Series for `x ≤ max(20, ν/2)`, backward recurrence beyond.
pub struct AutoMethod;

impl Named for SeriesMethod {
    fn name(&self) -> &'static str {
        "series"
    }
}
impl Named for MillerMethod {
    fn name(&self) -> &'static str {
        "miller"
    }
}
impl Named for AutoMethod {
    fn name(&self) -> &'static str {
        "auto"
    }
}

impl BesselMethod for SeriesMethod {
    fn eval(&self, nu: u32, x: f64) -> f64 {
        series(nu, x)
    }
}
impl BesselMethod for MillerMethod {
    fn eval(&self, nu: u32, x: f64) -> f64 {
        miller(nu, x)
    }
}
impl BesselMethod for AutoMethod {
    fn eval(&self, nu: u32, x: f64) -> f64 {
        if x <= (nu as f64 / 2.0).max(20.0) {
            series(nu, x)
        } else {
            miller(nu, x)
        }
    }
}

pub fn methods() -> Registry<dyn BesselMethod> {
    let mut reg: Registry<dyn BesselMethod> = Registry::new("Bessel method");
    reg.register(Arc::new(SeriesMethod))
        .register(Arc::new(MillerMethod))
        .register(Arc::new(AutoMethod));
    reg
}

/// `J_ν(x)` for `ν ≤ 500`, `0 ≤ x ≤ 10⁵`.
pub fn bessel_j(nu: u32, x: f64) -> Result<f64> {
    check_box(nu, x)?;
    Ok(AutoMethod.eval(nu, x))
}

pub fn bessel_j_with(method: &dyn BesselMethod, nu: u32, x: f64) -> Result<f64> {
    check_box(nu, x)?;
    Ok(method.eval(nu, x))
}

/// Hankel's large-argument expansion; accurate when `ν² ≪ x`.
pub fn hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let (mut p, mut q) = (0.0, 0.0);
    let mut term = 1.0f64;
    let mut k = 0u32;
    loop {
        // term = Π_{i<k} (μ − (2i+1)²) / (k! (8x)^k)
        if k.is_multiple_of(2) {
            p += if k.is_multiple_of(4) { term } else { -term };
        } else {
            q += if k % 4 == 1 { term } else { -term };
        }
        let next = term * (mu - ((2 * k + 1) as f64).powi(2)) / ((k + 1) as f64 * 8.0 * x);
        if next.abs() < 1e-17 || next.abs() > term.abs() || k > 60 {
            break;
        }
        term = next;
        k += 1;
    }
    let chi = x - (nu as f64 / 2.0 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_ν(x)` inside the box, Hankel's expansion beyond it.
pub fn bessel_j_extended(nu: u32, x: f64) -> Result<f64> {
    if x > MAX_ARG && nu <= MAX_ORDER && (nu as f64).powi(2) < x / 100.0 {
        return Ok(hankel(nu, x));
    }
    bessel_j(nu, x)
}

/// Upper bound for `|J_ν(x)|`: `min(1, (x/2)^ν/ν!, 0.7858·x^{−1/3})`.
pub fn bessel_size_bound(nu: u32, x: f64) -> f64 {
    let mut b = 1.0f64;
    for j in 1..=nu {
        b *= x / 2.0 / j as f64;
    }
    let landau = if x > 0.0 { 0.7858 * x.powf(-1.0 / 3.0) } else { 1.0 };
    b.min(1.0).min(landau)
}

/// `∏_j J_{k_j − 1}(x_j)`.
pub fn bessel_product(k: &[u32], x: &[f64]) -> Result<f64> {
    if k.is_empty() {
        return invalid("empty weight vector");
    }
    if k.len() != x.len() {
        return invalid(format!("weight vector has {} entries but {} arguments given", k.len(), x.len()));
    }
    let mut p = 1.0;
    for (&kj, &xj) in k.iter().zip(x) {
        if kj < 2 || kj % 2 != 0 {
            return invalid(format!("weights must be even and at least 2, got {kj}"));
        }
        p *= bessel_j(kj - 1, xj)?;
    }
    Ok(p)
}

/// `|J_{k−1}(x)| / (min(1, x/k) · k^{−1/3})`.
pub fn bessel_bound_ratio(k: u32, x: f64) -> Result<f64> {
    if k < 2 {
        return invalid("k must be at least 2");
    }
    if x <= 0.0 {
        return invalid("x must be positive");
    }
    let kf = k as f64;
    Ok(bessel_j(k - 1, x)?.abs() / ((x / kf).min(1.0) * kf.powf(-1.0 / 3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMax {
    pub ratio: f64,
    pub k: u32,
    pub x: f64,
}

/// Maximum of [`bessel_bound_ratio`] over even `k ∈ [2, k_max]` and a
/// logarithmic grid of `x ∈ [x_min, x_max]`.
pub fn bound_ratio_sweep(k_max: u32, x_min: f64, x_max: f64, points_per_decade: usize) -> Result<RatioMax> {
    let decades = (x_max / x_min).log10();
    let n = (decades * points_per_decade as f64).ceil() as usize;
    let mut best = RatioMax { ratio: 0.0, k: 2, x: x_min };
    for k in (2..=k_max).step_by(2) {
        for i in 0..=n {
            let x = x_min * 10f64.powf(decades * i as f64 / n as f64);
            let r = bessel_bound_ratio(k, x)?;
            if r > best.ratio {
                best = RatioMax { ratio: r, k, x };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(0, 100.0).unwrap() - 0.019_985_850_304_223_122).abs() < 1e-14);
        assert!((bessel_j(5, 30.0).unwrap() - (-0.143_240_295_512_077_06)).abs() < 1e-13);
    }

    #[test]
    fn paths_agree_at_4pi() {
        let x = 4.0 * std::f64::consts::PI;
        let a = series(11, x);
        let b = miller(11, x);
        assert!((a - b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn product_and_errors() {
        let j = bessel_j(1, 1.0).unwrap();
        assert!((bessel_product(&[2, 2], &[1.0, 1.0]).unwrap() - j * j).abs() < 1e-16);
        assert!((bessel_product(&[2, 2], &[1.0, 1.0]).unwrap() - 0.193_644).abs() < 1e-6);
        assert_eq!(bessel_product(&[2], &[0.0]).unwrap(), 0.0);
        assert!(bessel_product(&[], &[]).is_err());
        assert!(bessel_product(&[2], &[1.0, 2.0]).is_err());
        assert!(bessel_product(&[3], &[1.0]).is_err());
        assert!(bessel_j(501, 1.0).is_err());
        assert!(bessel_j(1, 2e5).is_err());
    }

    #[test]
    fn bound_ratio_examples() {
        let r = bessel_bound_ratio(2, 1.0).unwrap();
        assert!((r - 0.440_050_585_744_933_5 / (0.5 * 2f64.powf(-1.0 / 3.0))).abs() < 1e-12);
        assert!((r - 1.109).abs() < 1e-3);
        assert!(bessel_bound_ratio(12, 1e-6).unwrap() < 1e-40);
    }

    #[test]
    fn hankel_matches_miller_at_large_argument() {
        for nu in [1, 11, 25] {
            for x in [2e4, 5e4, 9e4] {
                assert!((hankel(nu, x) - miller(nu, x)).abs() < 1e-13, "nu={nu} x={x}");
            }
        }
        assert!(bessel_j_extended(11, 1e7).unwrap().abs() < 3e-4);
    }

    #[test]
    fn size_bound_holds() {
        for nu in [0, 1, 5, 11, 40] {
            for i in 0..400 {
                let x = 0.01 * 1.03f64.powi(i);
                let j = bessel_j(nu, x.min(MAX_ARG)).unwrap();
                assert!(j.abs() <= bessel_size_bound(nu, x.min(MAX_ARG)) + 1e-15);
            }
        }
    }

    #[test]
    fn registry_lookup() {
        let reg = methods();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["auto", "miller", "series"]);
        let m = reg.get("miller").unwrap();
        assert!((m.eval(3, 50.0) - reg.get("auto").unwrap().eval(3, 50.0)).abs() < 1e-15);
    }
}
