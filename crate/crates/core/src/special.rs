//! Special functions used across the crate.

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::ln_gamma;

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Logarithm of the Selberg integral
/// `∫_{[0,1]^k} ∏ u_i^{a-1} (1-u_i)^{b-1} ∏_{i<j} |u_i - u_j|^{2g} du`.
pub fn ln_selberg(k: usize, a: f64, b: f64, g: f64) -> f64 {
    (0..k)
        .map(|j| {
            let j = j as f64;
            ln_gamma(a + j * g) + ln_gamma(b + j * g) + ln_gamma(1.0 + (j + 1.0) * g) - ln_gamma(a + b + (k as f64 + j - 1.0) * g) - ln_gamma(1.0 + g)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selberg_small_cases() {
        // k = 1 is a beta integral; k = 2 with a = b = 1, g = 1/2 is ∫∫|u-v| = 1/3
        assert!((ln_selberg(1, 2.0, 3.0, 0.5) - (1.0f64 / 12.0).ln()).abs() < 1e-12);
        assert!((ln_selberg(2, 1.0, 1.0, 0.5) - (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn factorials_agree() {
        assert!((ln_factorial(10) - factorial(10).ln()).abs() < 1e-10);
    }
}
