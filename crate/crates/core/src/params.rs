//! Parameters of the equation `u_t = Δ(u^m) − |x|^σ u^q` and the closed-form
//! constants derived from them.
//!
//! Every other module reads its exponents from [`Exponents`], so the numbers
//! below are computed exactly once per parameter set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The quadruple `(m, q, σ, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Diffusion exponent, `m > 1`.
    pub m: f64,
    /// Absorption exponent, `0 < q < 1`.
    pub q: f64,
    /// Weight exponent, `σ > 2(1−q)/(m−1)`.
    pub sigma: f64,
    /// Space dimension.
    #[serde(rename = "N", alias = "dim")]
    pub dim: u32,
}

impl Params {
    pub fn new(m: f64, q: f64, sigma: f64, dim: u32) -> Result<Self> {
        Params { m, q, sigma, dim }.validate()
    }

    /// Lower end of the admissible σ range, `2(1−q)/(m−1)`.
    pub fn sigma_threshold(&self) -> f64 {
        2.0 * (1.0 - self.q) / (self.m - 1.0)
    }

    /// Returns the parameters unchanged when they lie in the admissible region.
    ///
    /// The σ inequality is strict with no tolerance band.
    pub fn validate(self) -> Result<Self> {
        let Params { m, q, sigma, dim } = self;
        if !(m.is_finite() && q.is_finite() && sigma.is_finite()) {
            return Err(Error::OutOfRange("parameters must be finite".into()));
        }
        if m <= 1.0 {
            return Err(Error::OutOfRange(format!("m <= 1 (m = {m})")));
        }
        if q <= 0.0 || q >= 1.0 {
            return Err(Error::OutOfRange(format!("q not in (0, 1) (q = {q})")));
        }
        if dim < 1 {
            return Err(Error::OutOfRange("N < 1".into()));
        }
        let threshold = self.sigma_threshold();
        if sigma <= threshold {
            return Err(Error::OutOfRange(format!(
                "sigma <= 2(1-q)/(m-1) (sigma = {sigma}, threshold = {threshold})"
            )));
        }
        Ok(self)
    }

    /// `σ(m−1) + 2(q−1)`, positive on the admissible region.
    pub fn denominator(&self) -> f64 {
        self.sigma * (self.m - 1.0) + 2.0 * (self.q - 1.0)
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    /// Interface regime, chosen by the sign of `m + q − 2`.
    pub fn regime(&self) -> Regime {
        Regime::of(self.m, self.q)
    }

    pub fn exponents(&self) -> Exponents {
        Exponents::new(*self)
    }
}

/// The sign of `m + q − 2`, which selects the vanishing law at the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LowSum,
    Critical,
    HighSum,
}

impl Regime {
    /// `|m + q − 2| < 1e-12` counts as critical.
    pub const CRITICAL_TOL: f64 = 1e-12;

    pub fn of(m: f64, q: f64) -> Self {
        let s = m + q - 2.0;
        if s.abs() < Self::CRITICAL_TOL {
            Regime::Critical
        } else if s < 0.0 {
            Regime::LowSum
        } else {
            Regime::HighSum
        }
    }
}

/// Closed-form exponents and constants shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub params: Params,
    /// Time-decay exponent of the self-similar solution.
    pub alpha: f64,
    /// Space-scaling exponent of the self-similar solution.
    pub beta: f64,
    /// Interface amplitude constant for `m + q ≤ 2`.
    pub k1: f64,
    /// Interface amplitude constant for `m + q ≥ 2`.
    pub k3: f64,
    /// Amplitude of the stationary solution `A r^{(σ+2)/(m−q)}`.
    pub a_stat: f64,
    /// Rescaling exponent used for the small-`a` limit.
    pub gamma_small: f64,
    /// Rescaling exponent used for the large-`a` limit.
    pub gamma_large: f64,
}

impl Exponents {
    pub fn new(params: Params) -> Self {
        let Params { m, q, sigma, .. } = params;
        let n = params.n();
        let d = params.denominator();
        let alpha = (sigma + 2.0) / d;
        let beta = (m - q) / d;
        let k1 = ((m - q) / (2.0 * m * (m + q)).sqrt()).powf(2.0 / (m - q));
        let k3 = ((1.0 - q) / beta).powf(1.0 / (1.0 - q));
        let a_stat = ((m - q).powi(2) / (m * (sigma + 2.0) * (m * (sigma + n) - q * (n - 2.0))))
            .powf(1.0 / (m - q));
        Exponents {
            params,
            alpha,
            beta,
            k1,
            k3,
            a_stat,
            gamma_small: -(m - 1.0) / 2.0,
            gamma_large: (q - m) / (sigma + 2.0),
        }
    }

    /// Critical-case amplitude correction
    /// `K2(z) = (√(1 + β²z²/(2m(m+q))) − βz/√(2m(m+q)))^{2/(m−q)}`.
    pub fn k2(&self, z: f64) -> f64 {
        let Params { m, q, .. } = self.params;
        let s = (2.0 * m * (m + q)).sqrt();
        let bz = self.beta * z / s;
        // √(1+x²) − x = 1/(√(1+x²) + x), stable for large x
        let base = 1.0 / ((1.0 + bz * bz).sqrt() + bz);
        base.powf(2.0 / (m - q))
    }

    /// Exponent of `(ξ0 − ξ)` in the interface law.
    pub fn interface_exponent(&self) -> f64 {
        let Params { m, q, .. } = self.params;
        match self.params.regime() {
            Regime::HighSum => 1.0 / (1.0 - q),
            Regime::LowSum | Regime::Critical => 2.0 / (m - q),
        }
    }

    /// Amplitude of the interface law for a profile with edge `xi0`.
    pub fn interface_amplitude(&self, xi0: f64) -> f64 {
        let Params { m, q, sigma, .. } = self.params;
        match self.params.regime() {
            Regime::LowSum => self.k1 * xi0.powf(sigma / (m - q)),
            Regime::Critical => {
                self.k1 * xi0.powf(sigma / (m - q)) * self.k2(xi0.powf((2.0 - sigma) / 2.0))
            }
            Regime::HighSum => self.k3 * xi0.powf((sigma - 1.0) / (1.0 - q)),
        }
    }

    /// Largest integer strictly below σ.
    pub fn k0(&self) -> i32 {
        let s = self.params.sigma;
        let f = s.floor();
        if f == s {
            f as i32 - 1
        } else {
            f as i32
        }
    }

    pub fn sigma_is_integer(&self) -> bool {
        self.params.sigma.fract() == 0.0
    }
}

/// Radius `R(T)` such that the solution vanishes outside `B(0, 2R(T))` at time `T`,
/// for initial data bounded by `sup_u0`.
pub fn shrinking_radius(params: &Params, sup_u0: f64, t: f64) -> Result<f64> {
    if !(sup_u0 > 0.0 && sup_u0.is_finite()) {
        return Err(Error::InvalidArgument(format!("sup_u0 must be positive (got {sup_u0})")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("T must be positive (got {t})")));
    }
    let Params { m, q, sigma, .. } = *params;
    let time_branch = (2.0 * sup_u0.powf(1.0 - q) / ((1.0 - q) * t)).powf(1.0 / sigma);
    let space_branch =
        (4.0 * m * (m + q) * sup_u0.powf(m - q) / (m - q).powi(2)).powf(1.0 / (sigma + 2.0));
    Ok(time_branch.max(space_branch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_default_preset() {
        let p = Params::new(2.0, 0.5, 2.0, 1).unwrap();
        assert_eq!(p, Params { m: 2.0, q: 0.5, sigma: 2.0, dim: 1 });
    }

    #[test]
    fn validate_rejects_small_sigma() {
        let err = Params::new(2.0, 0.5, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(ref s) if s.contains("sigma <= 2(1-q)/(m-1)")));
    }

    #[test]
    fn validate_rejects_linear_diffusion() {
        let err = Params::new(1.0, 0.5, 3.0, 2).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(ref s) if s.contains("m <= 1")));
    }

    #[test]
    fn borderline_sigma_is_rejected() {
        // threshold is exactly 1 here
        assert!(Params::new(2.0, 0.5, 1.0, 1).is_err());
        assert!(Params::new(2.0, 0.5, 1.0 + 1e-12, 1).is_ok());
    }

    #[test]
    fn q_and_dim_bounds() {
        assert!(Params::new(2.0, 0.0, 5.0, 1).is_err());
        assert!(Params::new(2.0, 1.0, 5.0, 1).is_err());
        assert!(Params::new(2.0, 0.5, 5.0, 0).is_err());
    }

    #[test]
    fn exponents_default_preset() {
        let e = Params::new(2.0, 0.5, 2.0, 1).unwrap().exponents();
        assert_relative_eq!(e.alpha, 4.0, max_relative = 1e-15);
        assert_relative_eq!(e.beta, 1.5, max_relative = 1e-15);
        assert_relative_eq!(e.k3, 1.0 / 9.0, max_relative = 1e-14);
        assert_eq!(e.gamma_small, -0.5);
        assert_relative_eq!(e.gamma_large, -1.5 / 4.0);
    }

    #[test]
    fn k2_at_zero_is_one() {
        for &(m, q, s) in &[(2.0, 0.5, 2.0), (1.3, 0.7, 8.0), (1.2, 0.5, 6.0)] {
            let e = Params::new(m, q, s, 2).unwrap().exponents();
            assert_eq!(e.k2(0.0), 1.0);
        }
    }

    #[test]
    fn k0_is_largest_integer_below_sigma() {
        let k0 = |s| Params::new(2.0, 0.5, s, 1).unwrap().exponents().k0();
        assert_eq!(k0(2.0), 1);
        assert_eq!(k0(2.5), 2);
        assert_eq!(k0(6.0), 5);
        assert_eq!(k0(1.01), 1);
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::of(2.0, 0.5), Regime::HighSum);
        assert_eq!(Regime::of(1.2, 0.5), Regime::LowSum);
        assert_eq!(Regime::of(1.3, 0.7), Regime::Critical);
        assert_eq!(Regime::of(1.5, 0.5), Regime::Critical);
    }

    #[test]
    fn stationary_amplitude_matches_closed_form() {
        let p = Params::new(2.0, 0.5, 2.0, 1).unwrap();
        let e = p.exponents();
        // (m-q)^2 / (m (σ+2) [m(σ+N) − q(N−2)]) = 2.25 / (2·4·6.5)
        let expected = (2.25f64 / 52.0).powf(1.0 / 1.5);
        assert_relative_eq!(e.a_stat, expected, max_relative = 1e-14);
    }

    #[test]
    fn shrinking_radius_default_preset() {
        let p = Params::new(2.0, 0.5, 2.0, 1).unwrap();
        let r = shrinking_radius(&p, 1.0, 1.0).unwrap();
        let expected = 2.0f64.max((80.0f64 / 9.0).powf(0.25));
        assert_relative_eq!(r, expected, max_relative = 1e-14);
        assert_eq!(r, 2.0);
    }

    #[test]
    fn shrinking_radius_rejects_bad_input() {
        let p = Params::new(2.0, 0.5, 2.0, 1).unwrap();
        assert!(matches!(shrinking_radius(&p, 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(shrinking_radius(&p, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(shrinking_radius(&p, -1.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    fn admissible() -> impl Strategy<Value = Params> {
        (1.05f64..4.0, 0.05f64..0.95, 0.1f64..6.0, 1u32..5).prop_map(|(m, q, extra, dim)| {
            let sigma = 2.0 * (1.0 - q) / (m - 1.0) + extra;
            Params { m, q, sigma, dim }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn exponents_positive_and_ratio_identity(p in admissible()) {
            let e = p.exponents();
            prop_assert!(e.alpha > 0.0 && e.beta > 0.0);
            let ratio = e.beta * (p.sigma + 2.0) / (p.m - p.q);
            prop_assert!((e.alpha - ratio).abs() <= 1e-12 * e.alpha);
        }

        #[test]
        fn stationary_exponent_identity(p in admissible()) {
            let Params { m, q, sigma, .. } = p;
            let lhs = m * (sigma + 2.0) - 2.0 * (m - q);
            let rhs = q * (sigma + 2.0) + sigma * (m - q);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            prop_assert!((lhs - (sigma * m + 2.0 * q)).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn k2_strictly_decreasing(p in admissible(), z in 0.0f64..10.0) {
            let e = p.exponents();
            let h = 1e-6 * (1.0 + z);
            let slope = (e.k2(z + h) - e.k2(z)) / h;
            prop_assert!(slope < 0.0);
            prop_assert!(e.k2(z) <= 1.0);
        }

        #[test]
        fn shrinking_radius_non_increasing(p in admissible(), sup in 0.01f64..10.0, t1 in 0.01f64..10.0, dt in 0.0f64..10.0) {
            let r1 = shrinking_radius(&p, sup, t1).unwrap();
            let r2 = shrinking_radius(&p, sup, t1 + dt).unwrap();
            prop_assert!(r1 >= r2);
        }
    }
}
