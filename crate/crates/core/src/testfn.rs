//! Fejér test functions and the Katz-Sarnak one-level density kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::registry::{Named, Registry};

/// `φ_u(x) = (sin(πux)/(πux))²`, whose transform is the triangle
/// `φ̂_u(t) = (u − |t|)/u²` on `[−u, u]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fejer {
    u: f64,
}

impl Fejer {
    pub fn new(u: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return invalid(format!("support u must be positive, got {u}"));
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn eval(&self, x: f64) -> f64 {
        let z = PI * self.u * x;
        if z.abs() < 1e-4 {
            // Taylor: 1 − z²/3 + 2z⁴/45
            let z2 = z * z;
            return 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 45.0;
        }
        let s = z.sin() / z;
        s * s
    }

    pub fn hat(&self, t: f64) -> f64 {
        let a = t.abs();
        if a >= self.u {
            0.0
        } else {
            (self.u - a) / (self.u * self.u)
        }
    }
}

pub fn fejer_eval(u: f64, x: f64) -> Result<f64> {
    Ok(Fejer::new(u)?.eval(x))
}

pub fn fejer_hat(u: f64, t: f64) -> Result<f64> {
    Ok(Fejer::new(u)?.hat(t))
}

/// `sin(2πx)/(2πx)`.
pub fn sinc2pi(x: f64) -> f64 {
    let z = 2.0 * PI * x;
    if z.abs() < 1e-6 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// A one-level density kernel `W = W₀ + m·δ₀`.
pub trait DensityKernel: Named + Send + Sync {
    fn smooth(&self, x: f64) -> f64;

    /// Mass of the point mass at the origin.
    fn delta_mass(&self) -> f64;

    /// `∫ φ_u W` in closed form.
    fn integral(&self, u: f64) -> f64;
}

/// `½ ∫_{−1}^{1} φ̂_u`, i.e. `∫ φ_u(x) sin(2πx)/(2πx) dx`.
fn sine_part(u: f64) -> f64 {
    if u <= 1.0 {
        0.5
    } else {
        (2.0 * u - 1.0) / (2.0 * u * u)
    }
}

pub struct Orthogonal;
pub struct SoEven;
pub struct SoOdd;
pub struct Symplectic;
pub struct Unitary;

impl Named for Orthogonal {
    fn name(&self) -> &'static str {
        "O"
    }
}

impl DensityKernel for Orthogonal {
    fn smooth(&self, _x: f64) -> f64 {
        1.0
    }
    fn delta_mass(&self) -> f64 {
        0.5
    }
    fn integral(&self, u: f64) -> f64 {
        // 1/u + 1/2, rounded once.
        (2.0 + u) / (2.0 * u)
    }
}

impl Named for SoEven {
    fn name(&self) -> &'static str {
        "SOeven"
    }
}

impl DensityKernel for SoEven {
    fn smooth(&self, x: f64) -> f64 {
        1.0 + sinc2pi(x)
    }
    fn delta_mass(&self) -> f64 {
        0.0
    }
    fn integral(&self, u: f64) -> f64 {
        1.0 / u + sine_part(u)
    }
}

impl Named for SoOdd {
    fn name(&self) -> &'static str {
        "SOodd"
    }
}

impl DensityKernel for SoOdd {
    fn smooth(&self, x: f64) -> f64 {
        1.0 - sinc2pi(x)
    }
    fn delta_mass(&self) -> f64 {
        1.0
    }
    fn integral(&self, u: f64) -> f64 {
        1.0 / u - sine_part(u) + 1.0
    }
}

impl Named for Symplectic {
    fn name(&self) -> &'static str {
        "Sp"
    }
}

impl DensityKernel for Symplectic {
    fn smooth(&self, x: f64) -> f64 {
        1.0 - sinc2pi(x)
    }
    fn delta_mass(&self) -> f64 {
        0.0
    }
    fn integral(&self, u: f64) -> f64 {
        1.0 / u - sine_part(u)
    }
}

impl Named for Unitary {
    fn name(&self) -> &'static str {
        "U"
    }
}

impl DensityKernel for Unitary {
    fn smooth(&self, _x: f64) -> f64 {
        1.0
    }
    fn delta_mass(&self) -> f64 {
        0.0
    }
    fn integral(&self, u: f64) -> f64 {
        1.0 / u
    }
}

pub fn kernels() -> Registry<dyn DensityKernel> {
    let mut reg: Registry<dyn DensityKernel> = Registry::new("density kernel");
    reg.register(Arc::new(Orthogonal))
        .register(Arc::new(SoEven))
        .register(Arc::new(SoOdd))
        .register(Arc::new(Symplectic))
        .register(Arc::new(Unitary));
    reg
}

pub fn kernel(name: &str) -> Result<Arc<dyn DensityKernel>> {
    kernels().get(name)
}

pub fn integral_against_kernel(u: f64, kind: &str) -> Result<f64> {
    Fejer::new(u)?;
    Ok(kernel(kind)?.integral(u))
}

/// Trapezoid rule for `∫_{−L}^{L} f W₀ + m f(0)`, optionally with a tail
/// correction added by the caller.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, kernel: &dyn DensityKernel, h: f64, half_width: f64) -> f64 {
    let n = (half_width / h).ceil() as i64;
    let h = half_width / n as f64;
    let mut sum = 0.5 * (f(-half_width) * kernel.smooth(-half_width) + f(half_width) * kernel.smooth(half_width));
    for i in (1 - n)..n {
        let x = i as f64 * h;
        sum += f(x) * kernel.smooth(x);
    }
    sum * h + kernel.delta_mass() * f(0.0)
}

/// `|closed form − numeric|` for `∫ φ_u W`. The numeric side integrates on
/// `[−L, L]` and adds the mean tail `2∫_L^∞ dx/(2π²u²x²) = 1/(π²u²L)`.
pub fn quadrature_cross_check(u: f64, kind: &str, h: f64, half_width: f64) -> Result<f64> {
    if h > 1e-3 || half_width < 50.0 {
        return invalid("quadrature needs h <= 1e-3 and range at least [-50, 50]");
    }
    let phi = Fejer::new(u)?;
    let k = kernel(kind)?;
    let numeric = quadrature(|x| phi.eval(x), k.as_ref(), h, half_width) + 1.0 / (PI * PI * u * u * half_width);
    Ok((k.integral(u) - numeric).abs())
}

/// A test function known only through samples on a uniform grid, linearly
/// interpolated and zero outside the grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 {
            return invalid("sampled function needs a positive step and at least two samples");
        }
        Ok(Self { start, step, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.start) / self.step;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fejer_values() {
        assert_eq!(fejer_eval(1.3, 0.0).unwrap(), 1.0);
        assert_eq!(fejer_hat(1.0, 0.0).unwrap(), 1.0);
        assert!((fejer_hat(1.5, 1.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(fejer_hat(1.5, 1.5).unwrap(), 0.0);
        assert_eq!(fejer_hat(1.5, -2.0).unwrap(), 0.0);
        assert!(fejer_eval(0.0, 1.0).is_err());
        assert!(fejer_eval(-1.0, 1.0).is_err());
        // Continuity across the Taylor switch.
        let f = Fejer::new(1.0).unwrap();
        let x = 0.999e-4 / PI;
        let z = PI * x;
        assert!((f.eval(x) - (z.sin() / z).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let close = |u: f64, k: &str, v: f64| assert!((integral_against_kernel(u, k).unwrap() - v).abs() < 1e-15, "{k} {u}");
        close(1.5, "O", 7.0 / 6.0);
        close(0.5, "Sp", 1.5);
        close(2.0, "Sp", 0.125);
        close(1.0, "SOeven", 1.5);
        close(1.0, "SOodd", 1.5);
        close(1.0, "U", 1.0);
        assert!(integral_against_kernel(1.0, "GUE").is_err());
    }

    #[test]
    fn quadrature_agrees() {
        for u in [1.0, 1.5, 2.0] {
            for k in ["O", "U", "Sp"] {
                let d = quadrature_cross_check(u, k, 1e-3, 50.0).unwrap();
                assert!(d < 1e-6, "{k} {u}: {d}");
            }
        }
        assert!(quadrature_cross_check(1.0, "U", 1e-2, 50.0).is_err());
    }

    /// `∫_L^∞ cos(ax)/x² dx`, two terms of integration by parts.
    fn cos_tail(a: f64, l: f64) -> f64 {
        if a == 0.0 {
            return 1.0 / l;
        }
        -(a * l).sin() / (a * l * l) + 2.0 * (a * l).cos() / (a * a * l * l * l)
    }

    #[test]
    fn fourier_pair() {
        // φ̂(t) = ∫ φ(x) cos(2πxt) dx on [−L, L] plus the tail of
        // sin²(πux) cos(2πxt) = ½cos(2πxt) − ¼cos(2πx(u−t)) − ¼cos(2πx(u+t)).
        let u = 1.5;
        let phi = Fejer::new(u).unwrap();
        let (h, l) = (2e-3, 200.0);
        let n = (l / h) as i64;
        let mut worst = 0.0f64;
        for j in 0..=30 {
            let t = -u + 0.1 * j as f64;
            let mut s = 0.5 * h * 2.0 * phi.eval(l) * (2.0 * PI * l * t).cos();
            for i in (1 - n)..n {
                let x = i as f64 * h;
                s += h * phi.eval(x) * (2.0 * PI * x * t).cos();
            }
            let w = |v: f64| 2.0 * PI * v.abs();
            let tail = 0.5 * cos_tail(w(t), l) - 0.25 * cos_tail(w(u - t), l) - 0.25 * cos_tail(w(u + t), l);
            s += 2.0 * tail / (PI * u).powi(2);
            worst = worst.max((s - phi.hat(t)).abs());
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn sampled_adapter() {
        let phi = Fejer::new(1.0).unwrap();
        let h = 1e-3;
        let vals: Vec<f64> = (0..=100_000).map(|i| phi.eval(-50.0 + i as f64 * h)).collect();
        let s = SampledFunction::new(-50.0, h, vals).unwrap();
        assert!((s.eval(0.25) - phi.eval(0.25)).abs() < 1e-6);
        assert_eq!(s.eval(60.0), 0.0);
        let k = kernel("U").unwrap();
        let q = quadrature(|x| s.eval(x), k.as_ref(), h, 50.0) + 1.0 / (PI * PI * 50.0);
        assert!((q - 1.0).abs() < 1e-6);
    }
}
