//! Sampling from the Sato-Tate measure `(2/π) sin²θ dθ` on `[0, π]`.

use std::f64::consts::PI;

use rand::Rng;

/// One angle by rejection from the uniform distribution.
pub fn sample_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let theta = rng.random::<f64>() * PI;
        let s = theta.sin();
        if rng.random::<f64>() < s * s {
            return theta;
        }
    }
}

/// `2 cos θ` with `θ` Sato-Tate distributed.
pub fn sample_trace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * sample_angle(rng).cos()
}
