use serde::{Deserialize, Serialize};

/// Smooth cut-off of the nonlinearity, evaluated on `r = |Au|²`.
///
/// The profile equals 1 on `[0, R²]`, 0 on `[R² + 2, ∞)`, and in between is
/// the cubic smoothstep `2q³ − 3q² + 1` with `q = (r − R²)/2`. It is C¹,
/// non-increasing and `|χ′| ≤ 3/4`. Placing the flat level at `R²` makes the
/// cut-off dynamics coincide with the uncut ones up to the first time
/// `|Au| ≥ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub radius: f64,
}

impl CutoffSpec {
    pub const WIDTH: f64 = 2.0;

    pub fn new(radius: f64) -> Self {
        Self { radius }
    }

    /// Flat level `R²` of the profile.
    pub fn level(&self) -> f64 {
        self.radius * self.radius
    }

    pub fn chi(&self, r: f64) -> f64 {
        let q = (r - self.level()) / Self::WIDTH;
        if q <= 0.0 {
            1.0
        } else if q >= 1.0 {
            0.0
        } else {
            2.0 * q * q * q - 3.0 * q * q + 1.0
        }
    }

    /// `dχ/dr`.
    pub fn chi_prime(&self, r: f64) -> f64 {
        let q = (r - self.level()) / Self::WIDTH;
        if q <= 0.0 || q >= 1.0 {
            0.0
        } else {
            (6.0 * q * q - 6.0 * q) / Self::WIDTH
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "cubic smoothstep in |Au|^2 on [{}, {}]",
            self.level(),
            self.level() + Self::WIDTH
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_properties_on_dense_grid() {
        let c = CutoffSpec::new(3.0);
        let mut prev = c.chi(0.0);
        for j in 0..=20_000 {
            let r = j as f64 * 0.001;
            let x = c.chi(r);
            assert!((0.0..=1.0).contains(&x));
            assert!(x <= prev);
            assert!(c.chi_prime(r).abs() <= 0.75);
            if r <= 9.0 {
                assert_eq!(x, 1.0);
            }
            if r >= 11.0 {
                assert_eq!(x, 0.0);
            }
            prev = x;
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let c = CutoffSpec::new(1.0);
        for r in [1.2, 1.5, 2.0, 2.7] {
            let h = 1e-6;
            let fd = (c.chi(r + h) - c.chi(r - h)) / (2.0 * h);
            assert!((fd - c.chi_prime(r)).abs() < 1e-8);
        }
    }
}
