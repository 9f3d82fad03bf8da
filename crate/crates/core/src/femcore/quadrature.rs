//! Quadrature on the reference simplex `{ξ ≥ 0, Σξ ≤ 1}` in 1, 2 and 3 dimensions.

use crate::error::{Error, Result};
use crate::mesh::factorial;

pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone)]
pub struct QuadRule {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    /// Sum to the reference simplex volume `1/d!`.
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Rule exact for all polynomials of total degree `≤ order` on the
/// `dim`-dimensional reference simplex.
pub fn quadrature_rule(dim: usize, order: usize) -> Result<QuadRule> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Parameter(format!("quadrature dimension {dim} unsupported")));
    }
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Parameter(format!(
            "quadrature order {order} unsupported (1..={MAX_ORDER})"
        )));
    }
    let vol = 1.0 / factorial(dim);
    let (points, weights) = match (dim, order) {
        (1, _) => {
            let (x, w) = gauss_legendre01((order + 2) / 2);
            (x.iter().map(|&s| [s, 0.0, 0.0]).collect(), w)
        }
        (_, 1) => {
            let c = 1.0 / (dim + 1) as f64;
            (vec![[c, c, if dim == 3 { c } else { 0.0 }]], vec![vol])
        }
        (2, 2) => {
            let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
            (vec![[a, a, 0.0], [b, a, 0.0], [a, b, 0.0]], vec![vol / 3.0; 3])
        }
        (3, 2) => {
            let a = 0.138_196_601_125_010_5;
            let b = 0.585_410_196_624_968_5;
            (vec![[a, a, a], [b, a, a], [a, b, a], [a, a, b]], vec![vol / 4.0; 4])
        }
        (2, 3 | 4) => dunavant4(),
        _ => collapsed(dim, order),
    };
    Ok(QuadRule {
        dim,
        points,
        weights,
        order,
    })
}

/// Six-point degree-4 rule on the reference triangle.
fn dunavant4() -> (Vec<[f64; 3]>, Vec<f64>) {
    let a1 = 0.445_948_490_915_965;
    let w1 = 0.223_381_589_678_011 * 0.5;
    let a2 = 0.091_576_213_509_771;
    let w2 = 0.109_951_743_655_322 * 0.5;
    let mut pts = Vec::with_capacity(6);
    let mut wts = Vec::with_capacity(6);
    for (a, w) in [(a1, w1), (a2, w2)] {
        let b = 1.0 - 2.0 * a;
        pts.extend_from_slice(&[[a, a, 0.0], [b, a, 0.0], [a, b, 0.0]]);
        wts.extend_from_slice(&[w, w, w]);
    }
    (pts, wts)
}

/// Collapsed-coordinate tensor Gauss rule (Duffy transform).
fn collapsed(dim: usize, order: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    // The Jacobian adds up to dim-1 polynomial degrees in the outer variable.
    let m = (order + dim).div_ceil(2);
    let (x, w) = gauss_legendre01(m);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    if dim == 2 {
        for i in 0..m {
            for j in 0..m {
                let s = x[i];
                let t = x[j];
                pts.push([s, t * (1.0 - s), 0.0]);
                wts.push(w[i] * w[j] * (1.0 - s));
            }
        }
    } else {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (s, t, r) = (x[i], x[j], x[k]);
                    pts.push([s, t * (1.0 - s), r * (1.0 - s) * (1.0 - t)]);
                    wts.push(w[i] * w[j] * w[k] * (1.0 - s) * (1.0 - s) * (1.0 - t));
                }
            }
        }
    }
    (pts, wts)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-type initial guess, then Newton on P_m
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if m == 0 {
                break;
            }
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = 0.5 * (1.0 - z);
        ws[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (xs, ws)
}
