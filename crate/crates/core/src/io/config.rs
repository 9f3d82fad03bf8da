//! Run configuration: a flat TOML document plus `key=value` overrides.
//!
//! Every key is optional; unset keys take the defaults of the selected case
//! or transient preset. Keys:
//!
//! | key | type | default |
//! |---|---|---|
//! | `command` | `converge`, `solve`, `transient`, `check-conditions` | from the CLI |
//! | `case` | `ex1-poly`, `ex1-sine`, `ex2-wave` | `ex1-poly` |
//! | `method` | `cfem`, `ncfem`, `dgfem`, `all`, or a list | `cfem` |
//! | `dim` | 2 or 3 | 2 |
//! | `levels` | increasing integers | `[4, 8, 16, 32]` in 2D, `[4, 8, 16]` in 3D |
//! | `n` | cells per side for `solve` | 16 |
//! | `nu`, `alpha`, `beta`, `gamma`, `delta` | floats | case or preset values |
//! | `sigma` | DG penalty scale | 10 |
//! | `quad_order` | nonlinear quadrature order | from δ |
//! | `error_quad_order` | quadrature order for errors | 6 |
//! | `newton_tol`, `newton_max_iter` | float, integer | 1e-6, 25 |
//! | `newton_criterion` | `residual` or `increment` | `residual` |
//! | `line_search` | bool | false (true for transient presets) |
//! | `check_energy` | bool | true |
//! | `output_dir` | path | `bhfem-out` |
//! | `preset` | `nerve-pulse` or `fitzhugh-nagumo` | `nerve-pulse` |
//! | `epsilon`, `rho`, `dt`, `t_end` | floats | preset values |
//! | `mesh_n` | integer | 100 |
//! | `domain_length` | side of the square transient domain | 300 |
//! | `snapshot_times` | floats | `[80, 200, 650]` |
//! | `lambda1`, `f_neg_norm`, `gn_constant` | floats | box eigenvalue, 0, 1 |

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use toml::Value;

use crate::analysis::{ConditionInputs, ERROR_QUAD_ORDER};
use crate::error::{Error, Result};
use crate::femcore::quadrature::MAX_ORDER;
use crate::femcore::{ModelParams, SpaceKind};
use crate::mesh::BoxDomain;
use crate::problems::{Case, DgPenalty, StudyOptions, TransientSpec};
use crate::solver::{NewtonOptions, StopCriterion};

pub const KNOWN_KEYS: &[&str] = &[
    "command",
    "case",
    "method",
    "dim",
    "levels",
    "n",
    "nu",
    "alpha",
    "beta",
    "gamma",
    "delta",
    "sigma",
    "quad_order",
    "error_quad_order",
    "newton_tol",
    "newton_max_iter",
    "newton_criterion",
    "line_search",
    "check_energy",
    "output_dir",
    "preset",
    "epsilon",
    "rho",
    "dt",
    "t_end",
    "mesh_n",
    "domain_length",
    "snapshot_times",
    "lambda1",
    "f_neg_norm",
    "gn_constant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Solve,
    Transient,
    CheckConditions,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Converge => "converge",
            Command::Solve => "solve",
            Command::Transient => "transient",
            Command::CheckConditions => "check-conditions",
        })
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(Command::Converge),
            "solve" => Ok(Command::Solve),
            "transient" => Ok(Command::Transient),
            "check-conditions" => Ok(Command::CheckConditions),
            _ => Err(Error::Config(format!("key 'command': unknown command '{s}'"))),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub case: Case,
    pub methods: Vec<SpaceKind>,
    pub dim: usize,
    pub levels: Vec<usize>,
    pub n: usize,
    pub params: ModelParams,
    pub study: StudyOptions,
    pub output_dir: PathBuf,
    pub transient: TransientSpec,
    pub conditions: ConditionInputs,
    /// Non-fatal findings, such as γ outside (0, 1).
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn method(&self) -> SpaceKind {
        self.methods[0]
    }
}

/// Raw key-value document, checked against [`KNOWN_KEYS`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    entries: BTreeMap<String, Value>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut doc = Self::default();
        for (k, v) in table {
            doc.insert(k, v)?;
        }
        Ok(doc)
    }

    fn insert(&mut self, key: String, value: Value) -> Result<()> {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        if matches!(value, Value::Table(_)) {
            return Err(Error::Config(format!("key '{key}': nested tables are not allowed")));
        }
        self.entries.insert(key, value);
        Ok(())
    }

    /// Applies one `key=value` override. Values are read as TOML and fall
    /// back to a bare string, so `case=ex1-sine` needs no quotes.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form key=value")))?;
        let key = key.trim().to_string();
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.insert(key, value)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(type_error(key, "a number", v)),
        }
    }

    fn uint(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(type_error(key, "a non-negative integer", v)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(type_error(key, "true or false", v)),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(type_error(key, "a string", v)),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.string(key)?
            .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("key '{key}': {e}"))))
            .transpose()
    }

    fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(type_error(key, "a list of numbers", v)),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(type_error(key, "a list of numbers", v)),
        }
    }

    /// Resolves defaults and validates. `command` wins over the `command` key.
    pub fn resolve(&self, command: Option<Command>) -> Result<RunConfig> {
        let command = match command {
            Some(c) => c,
            None => self
                .parsed::<Command>("command")?
                .ok_or_else(|| Error::Config("missing required key 'command'".into()))?,
        };
        let case = self.parsed::<Case>("case")?.unwrap_or(Case::Ex1Poly);
        if case == Case::Custom {
            return Err(Error::Config(
                "key 'case': custom problems cannot be configured from a file".into(),
            ));
        }
        let methods = self.methods()?;
        let dim = self.uint("dim")?.unwrap_or(2);
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!("key 'dim': must be 2 or 3, got {dim}")));
        }
        let levels = match self.get("levels") {
            None => {
                if dim == 2 {
                    vec![4, 8, 16, 32]
                } else {
                    vec![4, 8, 16]
                }
            }
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i > 0 => Ok(*i as usize),
                    _ => Err(type_error("levels", "a list of positive integers", v)),
                })
                .collect::<Result<Vec<_>>>()?,
            Some(v) => return Err(type_error("levels", "a list of positive integers", v)),
        };
        if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "key 'levels': must be strictly increasing, got {levels:?}"
            )));
        }
        let n = self.uint("n")?.unwrap_or(16);
        if n == 0 {
            return Err(Error::Config("key 'n': must be positive".into()));
        }

        let preset = self.string("preset")?.unwrap_or("nerve-pulse");
        let mut transient = match preset {
            "nerve-pulse" => TransientSpec::nerve_pulse(),
            "fitzhugh-nagumo" | "fhn" => TransientSpec::fitzhugh_nagumo(),
            other => return Err(Error::Config(format!("key 'preset': unknown preset '{other}'"))),
        };
        let base = if command == Command::Transient {
            transient.params
        } else {
            case.default_params()
        };
        let params = self.params(base)?;
        let warnings = params
            .validate()
            .map_err(|e| Error::Config(format!("model parameters: {e}")))?;

        let penalty = match self.float("sigma")? {
            Some(s) => DgPenalty::new(s).map_err(|e| Error::Config(format!("key 'sigma': {e}")))?,
            None => DgPenalty::default(),
        };
        let quad_order = self.uint("quad_order")?;
        let error_quad_order = self.uint("error_quad_order")?.unwrap_or(ERROR_QUAD_ORDER);
        for (key, q) in [("quad_order", quad_order), ("error_quad_order", Some(error_quad_order))] {
            if let Some(q) = q {
                if !(1..=MAX_ORDER).contains(&q) {
                    return Err(Error::Config(format!(
                        "key '{key}': must lie in 1..={}, got {q}",
                        MAX_ORDER
                    )));
                }
            }
        }
        let default_newton = if command == Command::Transient {
            transient.newton
        } else {
            NewtonOptions::default()
        };
        let newton = self.newton(default_newton)?;
        let study = StudyOptions {
            newton,
            penalty,
            quad_order,
            error_quad_order,
            check_energy: self.boolean("check_energy")?.unwrap_or(true),
        };

        transient.params = params;
        transient.penalty = penalty;
        transient.newton = newton;
        transient.discretization = methods[0];
        for (key, slot) in [
            ("epsilon", &mut transient.epsilon),
            ("rho", &mut transient.rho),
            ("dt", &mut transient.dt),
            ("t_end", &mut transient.t_end),
        ] {
            if let Some(x) = self.float(key)? {
                *slot = x;
            }
        }
        if let Some(m) = self.uint("mesh_n")? {
            transient.mesh_n = m;
        }
        if let Some(l) = self.float("domain_length")? {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("key 'domain_length': must be positive, got {l}")));
            }
            transient.domain = BoxDomain::cube(2, 0.0, l);
        }
        if let Some(ts) = self.float_list("snapshot_times")? {
            transient.snapshot_times = ts;
        }
        if command == Command::Transient {
            transient
                .validate()
                .map_err(|e| Error::Config(format!("transient setup: {e}")))?;
        }

        let conditions = ConditionInputs {
            lambda1: self.float("lambda1")?,
            f_neg_norm: self.float("f_neg_norm")?.unwrap_or(0.0),
            gn_constant: self.float("gn_constant")?.unwrap_or(1.0),
        };
        let output_dir = PathBuf::from(self.string("output_dir")?.unwrap_or("bhfem-out"));

        Ok(RunConfig {
            command,
            case,
            methods,
            dim,
            levels,
            n,
            params,
            study,
            output_dir,
            transient,
            conditions,
            warnings,
        })
    }

    fn methods(&self) -> Result<Vec<SpaceKind>> {
        let one = |s: &str| -> Result<Vec<SpaceKind>> {
            if s == "all" {
                return Ok(SpaceKind::ALL.to_vec());
            }
            s.parse::<SpaceKind>()
                .map(|m| vec![m])
                .map_err(|e| Error::Config(format!("key 'method': {e}")))
        };
        match self.get("method") {
            None => Ok(vec![SpaceKind::CfemP1]),
            Some(Value::String(s)) => one(s),
            Some(Value::Array(items)) if !items.is_empty() => {
                let mut out = Vec::new();
                for v in items {
                    match v {
                        Value::String(s) => out.extend(one(s)?),
                        _ => return Err(type_error("method", "a method name", v)),
                    }
                }
                Ok(out)
            }
            Some(v) => Err(type_error("method", "a method name or a list of them", v)),
        }
    }

    fn params(&self, mut p: ModelParams) -> Result<ModelParams> {
        for (key, slot) in [
            ("nu", &mut p.nu),
            ("alpha", &mut p.alpha),
            ("beta", &mut p.beta),
            ("gamma", &mut p.gamma),
            ("delta", &mut p.delta),
        ] {
            if let Some(x) = self.float(key)? {
                *slot = x;
            }
        }
        if let Some(d) = self.float("delta")? {
            if d < 1.0 {
                return Err(Error::Config(format!("key 'delta': must be >= 1, got {d}")));
            }
        }
        Ok(p)
    }

    fn newton(&self, mut opts: NewtonOptions) -> Result<NewtonOptions> {
        if let Some(t) = self.float("newton_tol")? {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("key 'newton_tol': must be positive, got {t}")));
            }
            opts.tol = t;
        }
        if let Some(m) = self.uint("newton_max_iter")? {
            if m == 0 {
                return Err(Error::Config("key 'newton_max_iter': must be positive".into()));
            }
            opts.max_iter = m;
        }
        if let Some(c) = self.string("newton_criterion")? {
            opts.criterion = match c {
                "residual" => StopCriterion::Residual,
                "increment" => StopCriterion::Increment,
                other => {
                    return Err(Error::Config(format!(
                        "key 'newton_criterion': expected 'residual' or 'increment', got '{other}'"
                    )))
                }
            };
        }
        if let Some(b) = self.boolean("line_search")? {
            opts.line_search = b;
        }
        Ok(opts)
    }
}

fn type_error(key: &str, expected: &str, got: &Value) -> Error {
    Error::Config(format!("key '{key}': expected {expected}, got {got}"))
}

/// Parses a complete document; the `command` key is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigDoc::parse(text)?.resolve(None)
}
