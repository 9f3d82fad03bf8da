//! Closed-form solutions used for manufactured-solution studies.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::femcore::{nonlinear_kernels, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// `u = Π (x_i - x_i²)`
    Ex1Poly,
    /// `u = (1/16) Π sin(π x_i)`
    Ex1Sine,
    /// `u = 0.5 - 0.5 tanh(z / (r - ᾱ))`, `z = Σx_i`
    Ex2Wave,
    Custom,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Ex1Poly => "ex1-poly",
            Case::Ex1Sine => "ex1-sine",
            Case::Ex2Wave => "ex2-wave",
            Case::Custom => "custom",
        })
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ex1-poly" | "poly" => Ok(Case::Ex1Poly),
            "ex1-sine" | "sine" => Ok(Case::Ex1Sine),
            "ex2-wave" | "wave" => Ok(Case::Ex2Wave),
            "custom" => Ok(Case::Custom),
            other => Err(Error::Parameter(format!("unknown case '{other}'"))),
        }
    }
}

impl Case {
    /// Default coefficients for the case.
    pub fn default_params(&self) -> ModelParams {
        match self {
            Case::Ex2Wave => ModelParams::example2(),
            _ => ModelParams::example1(),
        }
    }
}

/// Value, gradient and Laplacian of an exact solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactEval {
    pub u: f64,
    pub grad: [f64; 3],
    pub laplacian: f64,
}

/// Anything that can report pointwise value and gradient.
pub trait ExactSolution: Send + Sync {
    fn eval(&self, x: &[f64; 3]) -> ExactEval;

    fn value(&self, x: &[f64; 3]) -> f64 {
        self.eval(x).u
    }
}

/// One of the closed-form solutions on the unit box.
#[derive(Debug, Clone, Copy)]
pub struct Manufactured {
    pub case: Case,
    pub dim: usize,
    /// Only enters the wave width.
    pub alpha: f64,
}

impl Manufactured {
    pub fn new(case: Case, dim: usize, alpha: f64) -> Self {
        Self { case, dim, alpha }
    }

    /// `1 / (r - ᾱ)` with `ᾱ = α √2`, `r = √(ᾱ² + 8)`.
    fn wave_rate(&self) -> f64 {
        let abar = self.alpha * 2f64.sqrt();
        let r = (abar * abar + 8.0).sqrt();
        1.0 / (r - abar)
    }
}

impl ExactSolution for Manufactured {
    fn eval(&self, x: &[f64; 3]) -> ExactEval {
        exact_solution(self, x)
    }
}

/// Hand-differentiated closed forms.
pub fn exact_solution(m: &Manufactured, x: &[f64; 3]) -> ExactEval {
    let d = m.dim;
    let mut grad = [0.0; 3];
    match m.case {
        Case::Ex1Poly | Case::Ex1Sine => {
            // u = s Π g(x_i); ∂_i u = s g'(x_i) Π_{j≠i} g(x_j); Δu = s Σ_i g''(x_i) Π_{j≠i} g(x_j)
            let (scale, g, dg, ddg): (f64, fn(f64) -> f64, fn(f64) -> f64, fn(f64) -> f64) = match m.case {
                Case::Ex1Poly => (1.0, |t| t - t * t, |t| 1.0 - 2.0 * t, |_| -2.0),
                _ => (
                    1.0 / 16.0,
                    |t| (PI * t).sin(),
                    |t| PI * (PI * t).cos(),
                    |t| -PI * PI * (PI * t).sin(),
                ),
            };
            let gv: Vec<f64> = (0..d).map(|i| g(x[i])).collect();
            let others = |i: usize| -> f64 { (0..d).filter(|&j| j != i).map(|j| gv[j]).product() };
            let u = scale * gv.iter().product::<f64>();
            let mut lap = 0.0;
            for i in 0..d {
                let rest = others(i);
                grad[i] = scale * dg(x[i]) * rest;
                lap += scale * ddg(x[i]) * rest;
            }
            ExactEval {
                u,
                grad,
                laplacian: lap,
            }
        }
        Case::Ex2Wave => {
            let k = m.wave_rate();
            // front u = 1/2 sits on the plane Σx = 0, through the origin corner
            let z: f64 = x[..d].iter().sum();
            let t = (k * z).tanh();
            let sech2 = 1.0 - t * t;
            let du = -0.5 * k * sech2;
            let ddu = k * k * sech2 * t;
            for g in grad.iter_mut().take(d) {
                *g = du;
            }
            ExactEval {
                u: 0.5 - 0.5 * t,
                grad,
                laplacian: d as f64 * ddu,
            }
        }
        Case::Custom => ExactEval {
            u: 0.0,
            grad,
            laplacian: 0.0,
        },
    }
}

/// `f = -ν Δu + α B(u, ∇u) - β C(u)` for the exact `u`.
pub fn manufactured_forcing(m: &Manufactured, p: &ModelParams, x: &[f64; 3]) -> f64 {
    let e = exact_solution(m, x);
    let k = nonlinear_kernels(e.u, &e.grad[..m.dim], p);
    -p.nu * e.laplacian + p.alpha * k.b - p.beta * k.c
}
