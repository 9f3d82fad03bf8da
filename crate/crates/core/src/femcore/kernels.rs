//! Pointwise nonlinearities `B(u) = u^δ Σ ∂_i u` and `C(u) = u (1 - u^δ)(u^δ - γ)`.
//!
//! Powers of negative arguments are sign-preserving: `u^δ := sign(u) |u|^δ`.

use crate::error::{Error, Result};

/// Coefficients ν, α, β, γ, δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ModelParams {
    /// Example 1 values: α = 0.2, β = 0.1, ν = 2, γ = 0.5, δ = 1.
    pub fn example1() -> Self {
        Self {
            nu: 2.0,
            alpha: 0.2,
            beta: 0.1,
            gamma: 0.5,
            delta: 1.0,
        }
    }

    /// Example 2 values: α = 0.2, β = 1, ν = 16, γ = 0.5, δ = 1.
    pub fn example2() -> Self {
        Self {
            nu: 16.0,
            alpha: 0.2,
            beta: 1.0,
            gamma: 0.5,
            delta: 1.0,
        }
    }

    /// Hard validation. Returns soft warnings (γ outside (0,1)).
    pub fn validate(&self) -> Result<Vec<String>> {
        let all = [self.nu, self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("model parameters must be finite".into()));
        }
        if self.nu <= 0.0 {
            return Err(Error::Parameter(format!("nu must be positive, got {}", self.nu)));
        }
        if self.alpha < 0.0 {
            return Err(Error::Parameter(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::Parameter(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        if self.delta < 1.0 {
            return Err(Error::Parameter(format!("delta must be >= 1, got {}", self.delta)));
        }
        let mut warnings = Vec::new();
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            warnings.push(format!("gamma = {} lies outside (0, 1)", self.gamma));
        }
        Ok(warnings)
    }
}

/// `sign(u) |u|^δ`.
#[inline]
pub fn signed_pow(u: f64, delta: f64) -> f64 {
    if delta == 1.0 {
        u
    } else if delta == 2.0 {
        u * u.abs()
    } else {
        u.signum() * u.abs().powf(delta)
    }
}

/// `δ |u|^{δ-1}`, the derivative of [`signed_pow`].
#[inline]
pub fn d_signed_pow(u: f64, delta: f64) -> f64 {
    if delta == 1.0 {
        1.0
    } else if delta == 2.0 {
        2.0 * u.abs()
    } else {
        delta * u.abs().powf(delta - 1.0)
    }
}

/// `B`, `C` and their partial derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub b: f64,
    pub c: f64,
    pub db_du: f64,
    /// `∂B/∂(∂_i u)`, identical in every component.
    pub db_dgrad: f64,
    pub dc_du: f64,
}

#[inline]
pub fn nonlinear_kernels(u: f64, grad_u: &[f64], p: &ModelParams) -> KernelValues {
    let s = signed_pow(u, p.delta);
    let ds = d_signed_pow(u, p.delta);
    let div: f64 = grad_u.iter().sum();
    let one_minus = 1.0 - s;
    let minus_gamma = s - p.gamma;
    KernelValues {
        b: s * div,
        c: u * one_minus * minus_gamma,
        db_du: ds * div,
        db_dgrad: s,
        dc_du: one_minus * minus_gamma + u * ds * (1.0 + p.gamma - 2.0 * s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn named_values() {
        assert_eq!(signed_pow(-2.0, 1.0), -2.0);
        assert_eq!(d_signed_pow(-2.0, 1.0), 1.0);
        assert_eq!(signed_pow(0.25, 1.0), 0.25);
        // sign(-0.5) 0.5^1.5 and 1.5 * 0.5^0.5
        assert_relative_eq!(signed_pow(-0.5, 1.5), -0.353_553_390_593_273_8, max_relative = 1e-14);
        assert_relative_eq!(d_signed_pow(-0.5, 1.5), 1.060_660_171_779_821_2, max_relative = 1e-14);
        assert_eq!(signed_pow(0.0, 1.5), 0.0);
        assert_eq!(signed_pow(-3.0, 3.0), -27.0);
    }

    #[test]
    fn kernel_roots() {
        let mut p = ModelParams::example1();
        let k = nonlinear_kernels(0.0, &[0.3, -0.2], &p);
        assert_eq!((k.b, k.c), (0.0, 0.0));
        for delta in [1.0, 1.5, 3.0] {
            p.delta = delta;
            assert_eq!(nonlinear_kernels(1.0, &[0.0, 0.0], &p).c, 0.0);
        }
        p.delta = 1.0;
        assert!(nonlinear_kernels(p.gamma, &[0.0, 0.0], &p).c.abs() < 1e-16);
    }

    #[test]
    fn validation() {
        let mut p = ModelParams::example1();
        assert!(p.validate().unwrap().is_empty());
        p.delta = 0.5;
        assert!(p.validate().is_err());
        p.delta = 1.0;
        p.gamma = 2.0;
        assert_eq!(p.validate().unwrap().len(), 1);
        p.nu = 0.0;
        assert!(p.validate().is_err());
    }

    fn fd_check(u: f64, g: [f64; 3], delta: f64) {
        let p = ModelParams {
            delta,
            ..ModelParams::example1()
        };
        let k = nonlinear_kernels(u, &g, &p);
        let h = 1e-6 * (1.0 + u.abs());
        let kp = nonlinear_kernels(u + h, &g, &p);
        let km = nonlinear_kernels(u - h, &g, &p);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-3);
        assert!(close(k.db_du, (kp.b - km.b) / (2.0 * h)), "dB/du u={u} delta={delta}");
        assert!(close(k.dc_du, (kp.c - km.c) / (2.0 * h)), "dC/du u={u} delta={delta}");
        for i in 0..3 {
            let mut gp = g;
            let mut gm = g;
            gp[i] += 1e-6;
            gm[i] -= 1e-6;
            let fd = (nonlinear_kernels(u, &gp, &p).b - nonlinear_kernels(u, &gm, &p).b) / 2e-6;
            assert!(close(k.db_dgrad, fd));
        }
    }

    #[test]
    fn derivatives_match_finite_differences_on_grid() {
        for delta in [1.0, 1.5, 2.0, 3.0, 5.0] {
            for u in [-1.3, -0.7, -0.2, 0.05, 0.3, 0.5, 0.9, 1.4] {
                for g in [[0.0, 0.0, 0.0], [1.0, -0.5, 0.25], [-2.0, 3.0, 0.1]] {
                    fd_check(u, g, delta);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(
            u in prop_oneof![-2.0f64..-0.01, 0.01f64..2.0],
            g0 in -3.0f64..3.0, g1 in -3.0f64..3.0, g2 in -3.0f64..3.0,
            di in 0usize..5,
        ) {
            let delta = [1.0, 1.5, 2.0, 3.0, 5.0][di];
            fd_check(u, [g0, g1, g2], delta);
        }

        #[test]
        fn signed_pow_is_odd(u in -5.0f64..5.0, delta in 1.0f64..6.0) {
            prop_assert_eq!(signed_pow(-u, delta), -signed_pow(u, delta));
            prop_assert!(d_signed_pow(u, delta) >= 0.0);
        }
    }
}
