//! Truncated expansion of the profile near the origin.

use crate::error::{Error, Result};
use crate::profile::ProfileEquation;

/// Power series `F(ξ) = Σ B_j ξ^j + s ξ^{σ+2}` of `F = f^m` about `ξ = 0`,
/// for a solution with `f(0) = a`, `f'(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub a: f64,
    pub coeffs_b: Vec<f64>,
    /// Coefficients of `f = F^{1/m}` (same indexing).
    pub coeffs_f: Vec<f64>,
    pub sigma_coeff: f64,
    pub k0: u32,
    pub sigma: f64,
}

/// Largest integer strictly below `sigma`.
pub fn k0_of(sigma: f64) -> u32 {
    let c = sigma.ceil();
    (c - 1.0).max(0.0) as u32
}

/// Coefficients of `u^s` from those of `u` (J.C.P. Miller's recurrence), `u[0] != 0`.
pub fn power_series(u: &[f64], s: f64) -> Vec<f64> {
    let mut w = vec![0.0; u.len()];
    if u.is_empty() {
        return w;
    }
    w[0] = u[0].powf(s);
    for n in 1..u.len() {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += ((s + 1.0) * k as f64 - n as f64) * u[k] * w[n - k];
        }
        w[n] = acc / (n as f64 * u[0]);
    }
    w
}

impl SeriesExpansion {
    pub fn new(eq: &ProfileEquation, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
        }
        let k0 = k0_of(eq.sigma);
        let top = (if eq.sigma.fract() == 0.0 { k0 + 3 } else { k0 + 2 }) as usize;
        let mut b = vec![0.0; top + 1];
        b[0] = a.powf(eq.m);
        let mut j = 0;
        while j + 2 <= top {
            // f's coefficients through index j only depend on B_0..B_j
            let fj = power_series(&b[..=j], 1.0 / eq.m)[j];
            let jf = j as f64;
            b[j + 2] = eq.c1 * (jf * eq.beta - eq.alpha) * fj / ((jf + 2.0) * (eq.n + jf));
            j += 2;
        }
        let coeffs_f = power_series(&b, 1.0 / eq.m);
        let sigma_coeff = eq.c2 * a.powf(eq.q) / ((eq.sigma + 2.0) * (eq.sigma + eq.n));
        Ok(SeriesExpansion { a, coeffs_b: b, coeffs_f, sigma_coeff, k0, sigma: eq.sigma })
    }

    /// Index of the last polynomial coefficient kept.
    pub fn order(&self) -> usize {
        self.coeffs_b.len() - 1
    }

    /// Exponent of the leading neglected term.
    pub fn truncation_order(&self) -> f64 {
        let next_even = ((self.order() / 2 + 1) * 2) as f64;
        next_even.min(self.sigma + 4.0)
    }

    /// Returns `(F, F')` at `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        let mut big_f = 0.0;
        let mut d_f = 0.0;
        for (j, &c) in self.coeffs_b.iter().enumerate().rev() {
            big_f = big_f * xi + c;
            if j > 0 {
                d_f = d_f * xi + j as f64 * c;
            }
        }
        // d_f accumulated Σ j B_j ξ^{j-1}
        let s = self.sigma + 2.0;
        big_f += self.sigma_coeff * xi.powf(s);
        d_f += self.sigma_coeff * s * xi.powf(s - 1.0);
        (big_f, d_f)
    }

    /// Like [`eval`](Self::eval) but refuses points where the series is not trustworthy.
    pub fn init(&self, xi: f64) -> Result<(f64, f64)> {
        if !(xi >= 0.0) {
            return Err(Error::InvalidArgument(format!("xi_init must be non-negative, got {xi}")));
        }
        let top = self.order();
        let last_poly = self.coeffs_b[top].abs() * xi.powi(top as i32);
        let last_sigma = self.sigma_coeff.abs() * xi.powf(self.sigma + 2.0);
        let last = last_poly.max(last_sigma);
        if last > 1e-3 * self.coeffs_b[0].abs() {
            return Err(Error::SeriesDiverged { xi, last_term: last });
        }
        Ok(self.eval(xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn eq_default() -> ProfileEquation {
        ProfileEquation::self_similar(&Params::new(2.0, 0.5, 2.0, 1).unwrap().exponents())
    }

    #[test]
    fn origin_values() {
        let s = SeriesExpansion::new(&eq_default(), 1.7).unwrap();
        let (f, df) = s.eval(0.0);
        assert_eq!(f, 1.7f64.powi(2));
        assert_eq!(df, 0.0);
    }

    #[test]
    fn second_coefficient() {
        let eq = eq_default();
        let s = SeriesExpansion::new(&eq, 1.0).unwrap();
        assert!((s.coeffs_b[2] + 2.0).abs() < 1e-15);
        for a in [0.3, 2.0, 11.0] {
            let s = SeriesExpansion::new(&eq, a).unwrap();
            assert!((2.0 * s.coeffs_b[2] + eq.alpha * a / eq.n).abs() < 1e-13 * a);
        }
    }

    #[test]
    fn odd_coefficients_vanish() {
        let p = Params::new(1.5, 0.5, 6.5, 3).unwrap();
        let s = SeriesExpansion::new(&ProfileEquation::self_similar(&p.exponents()), 0.8).unwrap();
        assert_eq!(s.order(), 8);
        for j in (1..=s.order()).step_by(2) {
            assert_eq!(s.coeffs_b[j], 0.0);
        }
    }

    #[test]
    fn coefficients_scale_with_a() {
        let eq = eq_default();
        let s1 = SeriesExpansion::new(&eq, 1.0).unwrap();
        let a = 3.0;
        let sa = SeriesExpansion::new(&eq, a).unwrap();
        for j in 0..=s1.order() {
            let expect = a.powf(eq.m - j as f64 * (eq.m - 1.0) / 2.0) * s1.coeffs_b[j];
            assert!((sa.coeffs_b[j] - expect).abs() <= 1e-12 * expect.abs().max(1e-300));
        }
    }

    #[test]
    fn power_series_inverts() {
        let u = [2.0, 0.0, -0.3, 0.0, 0.05, 0.0];
        let w = power_series(&u, 0.5);
        let back = power_series(&w, 2.0);
        for (x, y) in u.iter().zip(&back) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn k0_values() {
        assert_eq!(k0_of(2.0), 1);
        assert_eq!(k0_of(2.5), 2);
        assert_eq!(k0_of(0.5), 0);
    }

    #[test]
    fn diverges_far_from_origin() {
        let s = SeriesExpansion::new(&eq_default(), 1.0).unwrap();
        assert!(s.init(1e-3).is_ok());
        assert!(matches!(s.init(5.0), Err(Error::SeriesDiverged { .. })));
    }
}
