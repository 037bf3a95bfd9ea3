//! Dormand–Prince 5(4) stepper with a fourth-order continuous extension.
//!
//! Kept deliberately small: the profile equations are two-dimensional, and the
//! callers need direct access to each accepted step (for event location on the
//! dense output) rather than a solve-to-the-end driver.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rtol: f64,
    /// Absolute tolerance per component.
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    /// Steps smaller than this (relative to |x|) count as a failure.
    pub h_min_rel: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-4, h_max: f64::INFINITY, h_min_rel: 1e-14 }
    }
}

/// One accepted step, with enough data to evaluate the continuous extension.
#[derive(Debug, Clone)]
pub struct Step<const D: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    pub dy1: [f64; D],
    cont: [[f64; D]; 5],
}

impl<const D: usize> Step<D> {
    /// Dense output at `x` in `[x0, x1]`.
    pub fn eval(&self, x: f64) -> [f64; D] {
        let h = self.x1 - self.x0;
        let theta = if h == 0.0 { 1.0 } else { (x - self.x0) / h };
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])))
        })
    }

    pub fn h(&self) -> f64 {
        self.x1 - self.x0
    }
}

/// Adaptive stepper over `y' = f(x, y)`.
pub struct Dopri5<F, const D: usize> {
    rhs: F,
    x: f64,
    y: [f64; D],
    k1: [f64; D],
    h: f64,
    opts: StepperOptions,
    pub rejected: usize,
    pub accepted: usize,
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn all_finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl<F, const D: usize> Dopri5<F, D>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    pub fn new(mut rhs: F, x0: f64, y0: [f64; D], opts: StepperOptions) -> Self {
        let k1 = rhs(x0, &y0);
        Dopri5 { rhs, x: x0, y: y0, k1, h: opts.h_init.min(opts.h_max), opts, rejected: 0, accepted: 0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> [f64; D] {
        self.y
    }

    pub fn set_h_max(&mut self, h_max: f64) {
        self.opts.h_max = h_max;
        self.h = self.h.min(h_max);
    }

    /// Takes one accepted step, never going past `x_end`.
    pub fn step(&mut self, x_end: f64) -> Result<Step<D>> {
        loop {
            let mut h = self.h.min(self.opts.h_max).min(x_end - self.x);
            let h_min = self.opts.h_min_rel * self.x.abs().max(1e-300);
            if h <= h_min {
                if x_end - self.x <= h_min {
                    h = x_end - self.x;
                } else {
                    return Err(Error::StepFailure { xi: self.x, h });
                }
            }
            let x = self.x;
            let y = &self.y;
            let k1 = self.k1;
            let rhs = &mut self.rhs;
            let k2 = rhs(x + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = rhs(x + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(x + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(x + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let y6 = axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let k6 = rhs(x + h, &y6);
            let y1 = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(x + h, &y1);

            let finite = all_finite(&y1) && all_finite(&k7);
            let mut err = 0.0;
            if finite {
                for i in 0..D {
                    let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y1[i].abs());
                    err += (e / sc).powi(2);
                }
                err = (err / D as f64).sqrt();
            }
            if !finite || !err.is_finite() {
                self.rejected += 1;
                self.h = 0.25 * h;
                continue;
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            if err <= 1.0 {
                let cont2: [f64; D] = std::array::from_fn(|i| y1[i] - y[i]);
                let cont3: [f64; D] = std::array::from_fn(|i| h * k1[i] - cont2[i]);
                let cont4: [f64; D] = std::array::from_fn(|i| cont2[i] - h * k7[i] - cont3[i]);
                let cont5: [f64; D] = std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                });
                let step = Step { x0: x, x1: x + h, y0: *y, y1, dy1: k7, cont: [*y, cont2, cont3, cont4, cont5] };
                self.x = x + h;
                self.y = y1;
                self.k1 = k7;
                self.h = h * fac;
                self.accepted += 1;
                return Ok(step);
            }
            self.rejected += 1;
            self.h = h * fac.min(1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums_match_nodes() {
        assert!((A21 - C2).abs() < 1e-15);
        assert!((A31 + A32 - C3).abs() < 1e-15);
        assert!((A41 + A42 + A43 - C4).abs() < 1e-14);
        assert!((A51 + A52 + A53 + A54 - C5).abs() < 1e-13);
        assert!((A61 + A62 + A63 + A64 + A65 - 1.0).abs() < 1e-13);
        assert!((A71 + A73 + A74 + A75 + A76 - 1.0).abs() < 1e-14);
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-15);
    }

    fn integrate_exp(opts: StepperOptions) -> (f64, usize) {
        let mut s = Dopri5::new(|_x, y: &[f64; 1]| [-y[0]], 0.0, [1.0], opts);
        while s.x() < 2.0 {
            s.step(2.0).unwrap();
        }
        ((s.y()[0] - (-2.0f64).exp()).abs(), s.accepted)
    }

    #[test]
    fn global_error_tracks_tolerance() {
        for &tol in &[1e-6, 1e-9, 1e-12] {
            let opts = StepperOptions { rtol: tol, atol: tol, ..Default::default() };
            let (err, _) = integrate_exp(opts);
            assert!(err < 100.0 * tol, "tol {tol}: err {err}");
        }
    }

    #[test]
    fn fixed_step_order_is_five() {
        // huge tolerance so every step is accepted at h_max
        let run = |h: f64| {
            let opts = StepperOptions { rtol: 1.0, atol: 1.0, h_init: h, h_max: h, h_min_rel: 0.0 };
            let mut s = Dopri5::new(|x: f64, y: &[f64; 1]| [y[0] * x.cos()], 0.0, [1.0], opts);
            while s.x() < 1.0 - 1e-12 {
                s.step(1.0).unwrap();
            }
            (s.y()[0] - 1f64.sin().exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!((order - 5.0).abs() < 0.4, "observed order {order}");
    }

    #[test]
    fn dense_output_matches_endpoints_and_is_accurate() {
        let opts = StepperOptions { rtol: 1.0, atol: 1.0, h_init: 0.2, h_max: 0.2, h_min_rel: 0.0 };
        let mut s = Dopri5::new(|_x, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], opts);
        let step = s.step(10.0).unwrap();
        assert_eq!(step.eval(step.x0), step.y0);
        let end = step.eval(step.x1);
        for i in 0..2 {
            assert!((end[i] - step.y1[i]).abs() < 1e-15);
        }
        let mid = step.eval(0.1);
        assert!((mid[0] - 0.1f64.sin()).abs() < 1e-6);
        assert!((mid[1] - 0.1f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn dense_output_order_four() {
        let err_at = |h: f64| {
            let opts = StepperOptions { rtol: 1.0, atol: 1.0, h_init: h, h_max: h, h_min_rel: 0.0 };
            let mut s = Dopri5::new(|_x, y: &[f64; 1]| [y[0]], 0.0, [1.0], opts);
            let step = s.step(1.0).unwrap();
            // local error of the interpolant at the midpoint, relative to the step's own endpoints
            (step.eval(0.5 * h)[0] - (0.5 * h).exp()).abs()
        };
        let order = (err_at(0.2) / err_at(0.1)).log2();
        assert!(order > 4.5, "dense local order {order}");
    }

    #[test]
    fn nan_rhs_triggers_rejection_and_failure() {
        let opts = StepperOptions { h_init: 0.5, ..Default::default() };
        let mut s = Dopri5::new(|x: f64, _y: &[f64; 1]| [if x > 0.3 { f64::NAN } else { 1.0 }], 0.0, [0.0], opts);
        let mut last = Ok(());
        for _ in 0..10_000 {
            match s.step(1.0) {
                Ok(_) => continue,
                Err(e) => {
                    last = Err(e);
                    break;
                }
            }
        }
        assert!(matches!(last, Err(Error::StepFailure { .. })));
        assert!(s.x() <= 0.3 + 1e-9);
    }
}
