//! Browser front end for bhfem: a stationary solve drawn as a heat map, a
//! convergence table, and a steppable excitable-media run.
//!
//! The plain Rust layer (`solve_grid`, `convergence_table`, `heat_map`,
//! `Pulse`) is what the native tests exercise; the `#[wasm_bindgen]` items
//! below it only convert errors and types for JavaScript.

use bhfem::analysis::{error_norms, ERROR_QUAD_ORDER};
use bhfem::assembly::DiscreteField;
use bhfem::femcore::SpaceKind;
use bhfem::io::convergence_csv;
use bhfem::problems::{
    run_convergence_study, solve_on_unit_box, Case, ExactSolution, ProblemSpec, StudyOptions, TransientSolver,
    TransientSpec,
};
use bhfem::solver::NewtonOptions;
use bhfem::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest mesh the page may request; keeps a single solve interactive.
pub const MAX_N: usize = 64;

/// Nodal values of a 2D field on the `(n+1) × (n+1)` vertex grid, row-major
/// from the lower-left corner.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Grid {
    /// Vertex averages of `field`, reordered onto the structured grid.
    pub fn from_field(field: &DiscreteField) -> Self {
        let mesh = &field.space.mesh;
        let ext = mesh.extent();
        let n = ((mesh.n_vertices() as f64).sqrt().round() as usize).saturating_sub(1);
        let avg = field.vertex_average();
        let mut values = vec![0.0; (n + 1) * (n + 1)];
        for (x, v) in mesh.vertices().iter().zip(avg) {
            let ix = ((x[0] - ext.lower[0]) / (ext.upper[0] - ext.lower[0]) * n as f64).round() as usize;
            let iy = ((x[1] - ext.lower[1]) / (ext.upper[1] - ext.lower[1]) * n as f64).round() as usize;
            values[iy * (n + 1) + ix] = v;
        }
        Self { n, values }
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Bilinear sample at `(s, t) ∈ [0, 1]²`.
    pub fn sample(&self, s: f64, t: f64) -> f64 {
        let n = self.n as f64;
        let (fx, fy) = (s.clamp(0.0, 1.0) * n, t.clamp(0.0, 1.0) * n);
        let (ix, iy) = ((fx as usize).min(self.n - 1), (fy as usize).min(self.n - 1));
        let (a, b) = (fx - ix as f64, fy - iy as f64);
        let at = |i: usize, j: usize| self.values[j * (self.n + 1) + i];
        (1.0 - a) * (1.0 - b) * at(ix, iy)
            + a * (1.0 - b) * at(ix + 1, iy)
            + (1.0 - a) * b * at(ix, iy + 1)
            + a * b * at(ix + 1, iy + 1)
    }
}

const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn colour(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x as usize).min(STOPS.len() - 2);
    let w = x - i as f64;
    let mut c = [0u8; 3];
    for k in 0..3 {
        c[k] = ((1.0 - w) * STOPS[i][k] + w * STOPS[i + 1][k]).round() as u8;
    }
    c
}

/// `size × size` RGBA pixels, top row first, values mapped linearly from
/// `[lo, hi]` onto the colour ramp.
pub fn heat_map(grid: &Grid, size: usize, lo: f64, hi: f64) -> Vec<u8> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(size * size * 4);
    for row in 0..size {
        let t = 1.0 - (row as f64 + 0.5) / size as f64;
        for col in 0..size {
            let s = (col as f64 + 0.5) / size as f64;
            let [r, g, b] = colour((grid.sample(s, t) - lo) / span);
            out.extend_from_slice(&[r, g, b, 255]);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: Grid,
    pub exact: Grid,
    pub n_dofs: usize,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub l2_error: f64,
    pub h1_error: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Parameter(format!("n must be between 1 and {MAX_N}, got {n}")));
    }
    Ok(())
}

/// Solves a manufactured 2D case on the unit square with `n` cells per side.
pub fn solve_grid(case: &str, method: &str, n: usize) -> Result<Solution> {
    check_n(n)?;
    let (case, kind): (Case, SpaceKind) = (case.parse()?, method.parse()?);
    let problem = ProblemSpec::manufactured(case, case.default_params(), 2, kind)?;
    let exact = problem.exact().expect("manufactured problem has a closed form");
    let (field, rep) = solve_on_unit_box(&problem, n, &NewtonOptions::default())?;
    let err = error_norms(&field.space, &field.coeffs, &exact, ERROR_QUAD_ORDER)?;
    let u_exact = DiscreteField::interpolate(field.space.clone(), |x| exact.value(x));
    Ok(Solution {
        grid: Grid::from_field(&field),
        exact: Grid::from_field(&u_exact),
        n_dofs: field.space.n_dofs(),
        newton_iters: rep.iterations,
        final_residual: rep.final_residual,
        l2_error: err.l2,
        h1_error: err.h1_broken,
    })
}

/// Convergence CSV for levels 4, 8, ... up to `max_n` on the unit square.
pub fn convergence_table(case: &str, method: &str, max_n: usize) -> Result<String> {
    check_n(max_n)?;
    let (case, kind): (Case, SpaceKind) = (case.parse()?, method.parse()?);
    let levels: Vec<usize> = std::iter::successors(Some(4), |n| Some(n * 2))
        .take_while(|&n| n <= max_n)
        .collect();
    if levels.is_empty() {
        return Err(Error::Parameter("the finest level must be at least 4".into()));
    }
    let report = run_convergence_study(case, kind, 2, &levels, case.default_params(), &StudyOptions::default())?;
    convergence_csv(&report)
}

/// A nerve-pulse or FitzHugh-Nagumo run advanced a few steps per frame.
pub struct Pulse {
    solver: TransientSolver,
    pub newton_total: usize,
}

impl Pulse {
    pub fn new(preset: &str, mesh_n: usize) -> Result<Self> {
        check_n(mesh_n)?;
        let mut spec = match preset {
            "nerve-pulse" => TransientSpec::nerve_pulse(),
            "fitzhugh-nagumo" => TransientSpec::fitzhugh_nagumo(),
            other => return Err(Error::Parameter(format!("unknown preset '{other}'"))),
        };
        spec.mesh_n = mesh_n;
        spec.t_end = f64::MAX;
        spec.snapshot_times.clear();
        Ok(Self {
            solver: TransientSolver::new(spec)?,
            newton_total: 0,
        })
    }

    pub fn step(&mut self, steps: usize) -> Result<f64> {
        for _ in 0..steps {
            self.newton_total += self.solver.advance()?.iterations;
        }
        Ok(self.solver.time())
    }

    pub fn time(&self) -> f64 {
        self.solver.time()
    }

    pub fn grid(&self) -> Grid {
        Grid::from_field(&self.solver.u_field())
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct StationaryView {
    inner: Solution,
}

#[wasm_bindgen]
impl StationaryView {
    #[wasm_bindgen(getter)]
    pub fn n_dofs(&self) -> usize {
        self.inner.n_dofs
    }

    #[wasm_bindgen(getter)]
    pub fn newton_iters(&self) -> usize {
        self.inner.newton_iters
    }

    #[wasm_bindgen(getter)]
    pub fn final_residual(&self) -> f64 {
        self.inner.final_residual
    }

    #[wasm_bindgen(getter)]
    pub fn l2_error(&self) -> f64 {
        self.inner.l2_error
    }

    #[wasm_bindgen(getter)]
    pub fn h1_error(&self) -> f64 {
        self.inner.h1_error
    }

    #[wasm_bindgen(getter)]
    pub fn max_value(&self) -> f64 {
        self.inner.grid.range().1
    }

    /// Heat map of the discrete solution, or of `|u - u_h|` when `error` is set.
    pub fn rgba(&self, size: usize, error: bool) -> Vec<u8> {
        if error {
            let diff = Grid {
                n: self.inner.grid.n,
                values: self
                    .inner
                    .grid
                    .values
                    .iter()
                    .zip(&self.inner.exact.values)
                    .map(|(a, b)| (a - b).abs())
                    .collect(),
            };
            let (_, hi) = diff.range();
            heat_map(&diff, size, 0.0, hi)
        } else {
            let (lo, hi) = self.inner.grid.range();
            heat_map(&self.inner.grid, size, lo.min(0.0), hi)
        }
    }
}

#[wasm_bindgen]
pub fn solve(case: &str, method: &str, n: usize) -> std::result::Result<StationaryView, JsError> {
    solve_grid(case, method, n)
        .map(|inner| StationaryView { inner })
        .map_err(js)
}

#[wasm_bindgen]
pub fn convergence(case: &str, method: &str, max_n: usize) -> std::result::Result<String, JsError> {
    convergence_table(case, method, max_n).map_err(js)
}

#[wasm_bindgen]
pub struct PulseView {
    inner: Pulse,
}

#[wasm_bindgen]
impl PulseView {
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, mesh_n: usize) -> std::result::Result<PulseView, JsError> {
        Pulse::new(preset, mesh_n).map(|inner| PulseView { inner }).map_err(js)
    }

    /// Advances `steps` time steps and returns the new time.
    pub fn step(&mut self, steps: usize) -> std::result::Result<f64, JsError> {
        self.inner.step(steps).map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn time(&self) -> f64 {
        self.inner.time()
    }

    #[wasm_bindgen(getter)]
    pub fn newton_total(&self) -> usize {
        self.inner.newton_total
    }

    /// Heat map of `u` on a fixed scale so frames are comparable.
    pub fn rgba(&self, size: usize) -> Vec<u8> {
        heat_map(&self.inner.grid(), size, -0.3, 1.0)
    }
}
