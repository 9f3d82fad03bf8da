//! Sufficient conditions for uniqueness of the weak solution and the a priori
//! energy bound `ν‖∇u‖₀² + β‖u‖_{L^{2δ+2}}^{2δ+2} ≤ K̃`.

use std::f64::consts::PI;
use std::fmt;

use crate::assembly::DiscreteField;
use crate::error::{Error, Result};
use crate::femcore::{quadrature_rule, ModelParams, SpaceKind};
use crate::mesh::BoxDomain;

/// First Dirichlet eigenvalue of the Laplacian on a box: `π² Σ 1/L_i²`.
pub fn lambda1_box(domain: &BoxDomain) -> f64 {
    (0..domain.dim).map(|k| PI * PI / domain.side(k).powi(2)).sum()
}

/// `K̃ = βδ(1+γ)^{2(δ+1)/δ}/(δ+1) · ((δ+2)/(δ+1))^{(δ+2)/δ} |Ω| + ‖f‖²_{H⁻¹}/ν`.
pub fn energy_bound(p: &ModelParams, f_neg_norm: f64, volume: f64) -> f64 {
    let d = p.delta;
    let reaction = p.beta * d * (1.0 + p.gamma).powf(2.0 * (d + 1.0) / d) / (d + 1.0)
        * ((d + 2.0) / (d + 1.0)).powf((d + 2.0) / d)
        * volume;
    reaction + f_neg_norm * f_neg_norm / p.nu
}

/// Extra inputs that the closed-form conditions need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionInputs {
    /// Overrides the analytic box eigenvalue.
    pub lambda1: Option<f64>,
    /// Bound on `‖f‖_{H⁻¹}`, enters `K̃`.
    pub f_neg_norm: f64,
    /// Gagliardo-Nirenberg constant. Its sharp value is unknown, so the
    /// conditions that use it are indicative only.
    pub gn_constant: f64,
}

impl Default for ConditionInputs {
    fn default() -> Self {
        Self {
            lambda1: None,
            f_neg_norm: 0.0,
            gn_constant: 1.0,
        }
    }
}

/// One sufficient condition of the form `ν > threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: &'static str,
    pub description: &'static str,
    /// `None` when the condition does not apply to these parameters.
    pub threshold: Option<f64>,
    pub satisfied: Option<bool>,
    /// Depends on the user-supplied Gagliardo-Nirenberg constant.
    pub uses_gn_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub nu: f64,
    pub lambda1: f64,
    pub k_tilde: f64,
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    pub fn get(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }

    /// The general condition valid for every δ ≥ 1.
    pub fn general(&self) -> &Condition {
        self.get("general").expect("general condition always present")
    }

    /// True if any applicable condition that does not depend on the
    /// Gagliardo-Nirenberg constant is satisfied.
    pub fn unique(&self) -> bool {
        self.conditions
            .iter()
            .any(|c| !c.uses_gn_constant && c.satisfied == Some(true))
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nu       = {}", self.nu)?;
        writeln!(f, "lambda1  = {:.10}", self.lambda1)?;
        writeln!(f, "K_tilde  = {:.10}", self.k_tilde)?;
        for c in &self.conditions {
            let gn = if c.uses_gn_constant {
                " [GN constant supplied, not rigorous]"
            } else {
                ""
            };
            match (c.threshold, c.satisfied) {
                (Some(t), Some(s)) => writeln!(
                    f,
                    "{:<22} nu > {:<14.10} {}{}  ({})",
                    c.label,
                    t,
                    if s { "satisfied" } else { "NOT satisfied" },
                    gn,
                    c.description
                )?,
                _ => writeln!(f, "{:<22} not applicable  ({})", c.label, c.description)?,
            }
        }
        write!(
            f,
            "uniqueness: {}",
            if self.unique() { "guaranteed" } else { "not guaranteed" }
        )
    }
}

/// Evaluates every closed-form uniqueness condition for `p` on `domain`.
pub fn uniqueness_thresholds(p: &ModelParams, domain: &BoxDomain, inputs: &ConditionInputs) -> Result<ConditionReport> {
    p.validate()?;
    let lambda1 = inputs.lambda1.unwrap_or_else(|| lambda1_box(domain));
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::Parameter(format!("lambda1 must be positive, got {lambda1}")));
    }
    if !(inputs.f_neg_norm >= 0.0) {
        return Err(Error::Parameter("f_neg_norm must be non-negative".into()));
    }
    let ModelParams {
        nu,
        alpha,
        beta,
        gamma,
        delta,
    } = *p;
    let dim = domain.dim;
    let k_tilde = energy_bound(p, inputs.f_neg_norm, domain.volume());
    let has_beta = beta > 0.0;
    let cubic = delta == 1.0;
    let c = inputs.gn_constant;
    let build = |label, description, threshold: Option<f64>, uses_gn_constant| Condition {
        label,
        description,
        satisfied: threshold.map(|t| nu > t),
        threshold,
        uses_gn_constant,
    };

    let general = has_beta.then(|| {
        let a = 4f64.powf(delta) * alpha * alpha / beta;
        let b = beta / lambda1 * (4f64.powf(delta) * (1.0 + gamma).powi(2) * (1.0 + delta).powi(2) - 2.0 * gamma);
        a.max(b)
    });
    let delta1 = (cubic && has_beta)
        .then(|| (2.0 * beta * (1.0 + gamma + gamma * gamma) / lambda1).max(alpha * alpha / (2.0 * beta)));
    // ν appears on both sides; report the right-hand side at the given ν
    let ladyzhenskaya = (cubic && dim == 2)
        .then(|| (2.0 * k_tilde / (lambda1 * nu)).sqrt() * alpha + beta / lambda1 * (1.0 + gamma + gamma * gamma));
    let reaction = beta / lambda1 * 2f64.powf(2.0 * delta - 1.0) * (1.0 + gamma).powi(2) * (delta + 1.0).powi(2)
        - beta * gamma / lambda1;
    let gn2 = (dim == 2 && has_beta)
        .then(|| reaction + 2.0 * c * alpha / lambda1.powf(1.0 / (2.0 * (delta + 1.0))) * (k_tilde / beta).sqrt());
    let gn3 = (dim == 3 && has_beta && delta <= 2.0).then(|| {
        reaction + 2.0 * c * alpha / lambda1.powf((2.0 - delta) / (4.0 * (delta + 1.0))) * (k_tilde / beta).sqrt()
    });

    Ok(ConditionReport {
        nu,
        lambda1,
        k_tilde,
        conditions: vec![
            build("general", "any delta >= 1, beta > 0", general, false),
            build("cubic", "delta = 1, beta > 0", delta1, false),
            build(
                "cubic-ladyzhenskaya",
                "delta = 1, 2D, uses K_tilde",
                ladyzhenskaya,
                false,
            ),
            build("interpolation-2d", "2D, uses K_tilde", gn2, true),
            build("interpolation-3d", "3D, 1 <= delta <= 2, uses K_tilde", gn3, true),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    /// `ν‖∇u_h‖₀² + β‖u_h‖_{L^{2δ+2}}^{2δ+2}`.
    pub lhs: f64,
    pub k_tilde: f64,
    pub holds: bool,
}

/// Checks the a priori energy bound on a conforming discrete solution.
/// `‖f‖_{H⁻¹}` is replaced by the upper bound `‖f‖₀/√λ₁`.
pub fn verify_energy_bound(
    field: &DiscreteField,
    p: &ModelParams,
    f: &dyn Fn(&[f64; 3]) -> f64,
    quad_order: usize,
) -> Result<EnergyCheck> {
    let space = &field.space;
    if space.kind() != SpaceKind::CfemP1 {
        return Err(Error::Contract(format!(
            "energy bound needs a conforming field, got {}",
            space.kind()
        )));
    }
    let mesh = &space.mesh;
    let q = quadrature_rule(mesh.dim(), quad_order)?;
    let mut grad2 = 0.0;
    let mut power = 0.0;
    let mut f2 = 0.0;
    let exponent = 2.0 * p.delta + 2.0;
    for c in 0..mesh.n_cells() {
        let map = space.map(c);
        let g = space.grad_in_cell(&field.coeffs, c);
        grad2 += map.volume() * g.iter().map(|v| v * v).sum::<f64>();
        for (pt, w) in q.points.iter().zip(&q.weights) {
            let x = map.map(pt);
            let u = space.eval_in_cell(&field.coeffs, c, &x);
            power += w * map.det * u.abs().powf(exponent);
            f2 += w * map.det * f(&x).powi(2);
        }
    }
    let lambda1 = lambda1_box(mesh.extent());
    let k_tilde = energy_bound(p, (f2 / lambda1).sqrt(), mesh.extent().volume());
    let lhs = p.nu * grad2 + p.beta * power;
    Ok(EnergyCheck {
        lhs,
        k_tilde,
        holds: lhs <= k_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn general_threshold_example_one() {
        let r = uniqueness_thresholds(
            &ModelParams::example1(),
            &BoxDomain::unit(2),
            &ConditionInputs::default(),
        )
        .unwrap();
        assert_relative_eq!(r.lambda1, 2.0 * PI * PI);
        let g = r.general();
        assert!((g.threshold.unwrap() - 1.6).abs() < 1e-12);
        assert_eq!(g.satisfied, Some(true));
        assert!(r.unique());
    }

    #[test]
    fn reaction_branch_alone() {
        let p = ModelParams {
            alpha: 0.0,
            ..ModelParams::example1()
        };
        let r = uniqueness_thresholds(&p, &BoxDomain::unit(2), &ConditionInputs::default()).unwrap();
        // 0.1 (4 · 2.25 · 4 - 1) / 2π² = 3.5 / 2π²
        assert_relative_eq!(
            r.general().threshold.unwrap(),
            3.5 / (2.0 * PI * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(r.general().threshold.unwrap(), 0.177_31, epsilon = 1e-5);
    }

    #[test]
    fn unit_cube_eigenvalue() {
        assert_relative_eq!(lambda1_box(&BoxDomain::unit(3)), 3.0 * PI * PI);
        assert_relative_eq!(lambda1_box(&BoxDomain::unit(3)), 29.608_8, epsilon = 1e-4);
    }

    #[test]
    fn zero_beta_is_not_applicable() {
        let p = ModelParams {
            beta: 0.0,
            ..ModelParams::example1()
        };
        let r = uniqueness_thresholds(&p, &BoxDomain::unit(2), &ConditionInputs::default()).unwrap();
        assert_eq!(r.general().threshold, None);
        assert_eq!(r.general().satisfied, None);
        assert!(r.to_string().contains("not applicable"));
    }

    #[test]
    fn k_tilde_values() {
        let p = ModelParams::example1();
        assert!((energy_bound(&p, 0.0, 1.0) - 0.854_296_875).abs() < 1e-12);
        assert_relative_eq!(energy_bound(&p, 0.0, 2.0), 2.0 * 0.854_296_875, max_relative = 1e-15);
        let p0 = ModelParams { beta: 0.0, ..p };
        assert_eq!(energy_bound(&p0, 0.0, 1.0), 0.0);
        assert_relative_eq!(energy_bound(&p0, 2.0, 1.0), 2.0);
    }

    proptest! {
        #[test]
        fn general_threshold_monotone_in_alpha(a in 0.0f64..2.0, da in 0.0f64..2.0, beta in 0.01f64..3.0) {
            let dom = BoxDomain::unit(2);
            let p = ModelParams { alpha: a, beta, ..ModelParams::example1() };
            let q = ModelParams { alpha: a + da, ..p };
            let t = |p: &ModelParams| uniqueness_thresholds(p, &dom, &ConditionInputs::default()).unwrap().general().threshold.unwrap();
            prop_assert!(t(&q) >= t(&p));
        }

        #[test]
        fn reaction_branch_decreasing_in_lambda1(l in 1.0f64..100.0, dl in 0.0f64..100.0) {
            let dom = BoxDomain::unit(2);
            let p = ModelParams { alpha: 0.0, ..ModelParams::example1() };
            let t = |l: f64| {
                let inputs = ConditionInputs { lambda1: Some(l), ..Default::default() };
                uniqueness_thresholds(&p, &dom, &inputs).unwrap().general().threshold.unwrap()
            };
            prop_assert!(t(l + dl) <= t(l));
        }
    }
}
