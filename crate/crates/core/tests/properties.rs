mod common;

use std::sync::Arc;

use bhfem::analysis::error_norms;
use bhfem::assembly::Assembler;
use bhfem::femcore::{quadrature_rule, FunctionSpace, ModelParams, SpaceKind};
use bhfem::problems::{solve_stationary, Case, DgPenalty, ExactSolution, ProblemSpec};
use bhfem::solver::NewtonOptions;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn linear_solutions_are_reproduced_exactly() {
    let exact = Affine {
        a: 0.3,
        b: [0.7, -0.4, 0.25],
    };
    let params = ModelParams {
        alpha: 0.0,
        beta: 0.0,
        ..ModelParams::example1()
    };
    for dim in [2, 3] {
        for kind in SpaceKind::ALL {
            let problem =
                ProblemSpec::custom(params, dim, kind, Arc::new(|_| 0.0), Arc::new(move |x| exact.at(x))).unwrap();
            let space = unit_space(dim, 3, kind);
            let (field, rep) = solve_stationary(space.clone(), problem, &NewtonOptions::default()).unwrap();
            assert!(rep.converged);
            let e = error_norms(&space, &field.coeffs, &exact, 4).unwrap();
            assert!(e.l2 <= 1e-10 && e.h1_broken <= 1e-10, "{kind} {dim}D: {e:?}");
        }
    }
}

#[test]
fn embedded_conforming_fields_have_no_dg_jumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [2, 3] {
        let cg = unit_space(dim, 3, SpaceKind::CfemP1);
        let dg = FunctionSpace::new(cg.mesh.clone(), SpaceKind::DgP1).unwrap();
        let u = random_vec(&mut rng, cg.n_dofs(), 1.0);
        let w = embed_in_dg(&cg, &u, &dg);
        assert!(max_pointwise_jump(&dg, &w) <= 1e-12);

        // only the penalty term depends on σ and it is proportional to [u]
        let spec = |sigma| {
            ProblemSpec::manufactured(Case::Ex1Poly, ModelParams::example1(), dim, SpaceKind::DgP1)
                .unwrap()
                .with_penalty(DgPenalty::new(sigma).unwrap())
        };
        // boundary penalty acts on u - g, so use a field that matches g = 0 there
        let interior: Vec<f64> = {
            let on = cg.mesh.boundary_vertices();
            u.iter()
                .enumerate()
                .map(|(v, &x)| if on[v] { 0.0 } else { x })
                .collect()
        };
        let w = embed_in_dg(&cg, &interior, &dg);
        let r1 = Assembler::new(dg.clone(), spec(10.0)).unwrap().residual(&w).unwrap();
        let r2 = Assembler::new(dg.clone(), spec(2.0)).unwrap().residual(&w).unwrap();
        let diff = r1.iter().zip(&r2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-12, "{dim}D: penalty changed the residual by {diff:e}");
    }
}

#[test]
fn jacobian_is_symmetric_without_advection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = ModelParams {
        alpha: 0.0,
        delta: 1.5,
        ..ModelParams::example1()
    };
    for dim in [2, 3] {
        for kind in SpaceKind::ALL {
            let space = unit_space(dim, 3, kind);
            let problem = ProblemSpec::manufactured(Case::Ex1Sine, params, dim, kind).unwrap();
            let asm = Assembler::new(space.clone(), problem).unwrap();
            let u = random_vec(&mut rng, space.n_dofs(), 0.8);
            let (_, jac) = asm.assemble(&u).unwrap();
            let rel = jac.max_asymmetry() / jac.max_abs();
            assert!(rel <= 1e-11, "{kind} {dim}D: {rel:e}");
        }
    }
}

#[test]
fn interpolant_residual_vanishes_under_refinement() {
    for kind in SpaceKind::ALL {
        let mut norms = Vec::new();
        for n in [4, 8, 16, 32, 64] {
            let space = unit_space(2, n, kind);
            let problem = ProblemSpec::manufactured(Case::Ex1Sine, ModelParams::example1(), 2, kind).unwrap();
            let exact = problem.exact().unwrap();
            let asm = Assembler::new(space.clone(), problem).unwrap();
            let u = space.interpolate(|x| exact.value(x));
            let r = asm.residual_constrained(&u).unwrap();
            norms.push(r.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        let rates: Vec<f64> = norms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        // the DG rate tends to 1 from below (0.980, 0.990, 0.997, 0.999)
        assert!(rates.iter().all(|&r| r >= 0.97), "{kind}: rates {rates:?}");
        assert!(*rates.last().unwrap() >= 0.99, "{kind}: rates {rates:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cr_facet_jumps_have_zero_mean(seed in any::<u64>(), dim in 2usize..=3) {
        let space = unit_space(dim, 2, SpaceKind::Cr);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vec(&mut rng, space.n_dofs(), 10.0);
        prop_assert!(max_facet_jump_integral(&space, &u) <= 1e-12);
    }

    #[test]
    fn quadrature_integrates_affine_images_exactly(
        seed in any::<u64>(),
        dim in 2usize..=3,
        order in 1usize..=6,
    ) {
        // ∫ over a random simplex of a random polynomial of degree `order`,
        // compared with the same integral pulled back to the reference cell
        // and evaluated by a rule of maximal order
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef: Vec<f64> = random_vec(&mut rng, 4, 1.0);
        let shift: Vec<f64> = random_vec(&mut rng, 3, 1.0);
        let p = |x: &[f64; 3]| {
            let s = coef[0] + coef[1] * x[0] + coef[2] * x[1] + coef[3] * x[2] + shift[0];
            s.powi(order as i32) + shift[1] * x[0].powi(order as i32)
        };
        let q = quadrature_rule(dim, order).unwrap();
        let fine = quadrature_rule(dim, 6).unwrap();
        prop_assert!((q.integrate(&p) - fine.integrate(&p)).abs() <= 1e-12 * (1.0 + fine.integrate(|x| p(x).abs())));
    }

    #[test]
    fn residual_is_linear_in_forcing(seed in any::<u64>(), kind_idx in 0usize..3) {
        // R(u; f) - R(u; 0) = -(f, v) independently of u
        let kind = SpaceKind::ALL[kind_idx];
        let space = unit_space(2, 3, kind);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vec(&mut rng, space.n_dofs(), 1.0);
        let p = ModelParams::example1();
        let zero = ProblemSpec::custom(p, 2, kind, Arc::new(|_| 0.0), Arc::new(|_| 0.0)).unwrap();
        let one = ProblemSpec::custom(p, 2, kind, Arc::new(|_| 1.0), Arc::new(|_| 0.0)).unwrap();
        let a0 = Assembler::new(space.clone(), zero).unwrap();
        let a1 = Assembler::new(space.clone(), one).unwrap();
        let r0 = a0.residual(&u).unwrap();
        let r1 = a1.residual(&u).unwrap();
        let load = a1.load_vector();
        for i in 0..u.len() {
            prop_assert!((r1[i] - r0[i] + load[i]).abs() <= 1e-12);
        }
    }
}
