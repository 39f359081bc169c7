//! Scenario schema (v1): parsing and validation.
//!
//! A scenario is one self-describing JSON document:
//!
//! ```json
//! {
//!   "schema": "qrf-scenario/v1",
//!   "system": {"labels": ["A", "B"], "masses": {"A": 1.0, "B": 1.0}},
//!   "initial": {"frame": "A", "ordering": "blocked",
//!               "mean": [0.0, 0.0], "cov": [[0.5, 0.0], [0.0, 0.5]]},
//!   "actions": [{"check": "all"}],
//!   "output": "optional/output/dir"
//! }
//! ```
//!
//! `initial` alternatives: `{"frame": ..., "random": {"seed": N,
//! "nu_range": [lo, hi]}}` or `{"wavefunction": {"frame": ...,
//! "momentum_mean": [...], "momentum_covariance": [[...]],
//! "phase_quadratic": [[...]], "phase_linear": [...]}}`.
//!
//! Actions: `{"switch": "B"}`, `{"evolve": {"hamiltonian": "free" |
//! {"matrix": [[...]]}, "times": [...]}}`, `{"check": <set>}`,
//! `{"oracle": {"frames": [...], "tol": 1e-4}}`, `{"report": [targets]}`.
//!
//! `validate` walks the whole document and reports every violation with
//! its JSON path; `parse` returns a typed scenario only when clean.

use qrf_core::nalgebra::{DMatrix, DVector};
use qrf_core::oracle::GaussianWavefunctionSpec;
use qrf_core::{Label, Ordering, ParticleSystem};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};

pub const SCHEMA_ID: &str = "qrf-scenario/v1";

/// One schema violation, with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Moments {
        frame: Label,
        ordering: Ordering,
        mean: DVector<f64>,
        cov: DMatrix<f64>,
    },
    Random {
        frame: Label,
        seed: u64,
        nu_range: (f64, f64),
    },
    Wavefunction(Box<GaussianWavefunctionSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    Free,
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSet {
    Uncertainty,
    Triangle,
    Momentum,
    Criteria,
    Invariance,
    Purity,
    All,
}

impl CheckSet {
    pub fn from_name(name: &str) -> Option<CheckSet> {
        Some(match name {
            "uncertainty" => CheckSet::Uncertainty,
            "triangle" => CheckSet::Triangle,
            "momentum" => CheckSet::Momentum,
            "criteria" => CheckSet::Criteria,
            "invariance" => CheckSet::Invariance,
            "purity" => CheckSet::Purity,
            "all" => CheckSet::All,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckSet::Uncertainty => "uncertainty",
            CheckSet::Triangle => "triangle",
            CheckSet::Momentum => "momentum",
            CheckSet::Criteria => "criteria",
            CheckSet::Invariance => "invariance",
            CheckSet::Purity => "purity",
            CheckSet::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportTarget {
    Moments,
    Determinants,
    Purities,
    Spectrum,
}

impl ReportTarget {
    pub fn from_name(name: &str) -> Option<ReportTarget> {
        Some(match name {
            "moments" => ReportTarget::Moments,
            "determinants" => ReportTarget::Determinants,
            "purities" => ReportTarget::Purities,
            "spectrum" => ReportTarget::Spectrum,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Switch(Label),
    Evolve {
        hamiltonian: HamiltonianSpec,
        times: Vec<f64>,
    },
    Check(CheckSet),
    Oracle {
        frames: Vec<Label>,
        tol: f64,
    },
    Report(Vec<ReportTarget>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: ParticleSystem,
    pub initial: InitialSpec,
    pub actions: Vec<Action>,
    pub output: Option<PathBuf>,
}

struct Walker {
    diagnostics: Vec<Diagnostic>,
}

impl Walker {
    fn flag(&mut self, path: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn str_field<'v>(&mut self, v: &'v Value, path: &str, key: &str) -> Option<&'v str> {
        match v.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.flag(&format!("{path}.{key}"), "expected a string");
                None
            }
            None => {
                self.flag(path, format!("missing field `{key}`"));
                None
            }
        }
    }

    fn f64_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.flag(path, "expected a finite number");
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<DVector<f64>> {
        let arr = match v.as_array() {
            Some(a) => a,
            None => {
                self.flag(path, "expected an array of numbers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, item) in arr.iter().enumerate() {
            out.push(self.f64_value(item, &format!("{path}[{i}]"))?);
        }
        Some(DVector::from_vec(out))
    }

    /// Row-major list of lists, required square.
    fn matrix(&mut self, v: &Value, path: &str) -> Option<DMatrix<f64>> {
        let rows = match v.as_array() {
            Some(a) if !a.is_empty() => a,
            _ => {
                self.flag(path, "expected a non-empty array of rows");
                return None;
            }
        };
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let cells = match row.as_array() {
                Some(c) => c,
                None => {
                    self.flag(&format!("{path}[{i}]"), "expected an array of numbers");
                    return None;
                }
            };
            if cells.len() != n {
                self.flag(
                    &format!("{path}[{i}]"),
                    format!("expected {n} columns, got {}", cells.len()),
                );
                return None;
            }
            for (j, cell) in cells.iter().enumerate() {
                data.push(self.f64_value(cell, &format!("{path}[{i}][{j}]"))?);
            }
        }
        Some(DMatrix::from_row_slice(n, n, &data))
    }

    fn system(&mut self, v: &Value) -> Option<ParticleSystem> {
        let sys = match v.get("system") {
            Some(s) if s.is_object() => s,
            Some(_) => {
                self.flag("system", "expected an object");
                return None;
            }
            None => {
                self.flag("", "missing field `system`");
                return None;
            }
        };
        let labels: Vec<Label> = match sys.get("labels").and_then(|l| l.as_array()) {
            Some(arr) => {
                let mut out = Vec::new();
                for (i, item) in arr.iter().enumerate() {
                    match item.as_str() {
                        Some(s) if !s.is_empty() => out.push(Label::from(s)),
                        _ => {
                            self.flag(
                                &format!("system.labels[{i}]"),
                                "expected a non-empty string",
                            );
                            return None;
                        }
                    }
                }
                out
            }
            None => {
                self.flag("system.labels", "expected an array of label strings");
                return None;
            }
        };
        let masses = match sys.get("masses") {
            Some(Value::Object(map)) => map,
            _ => {
                self.flag("system.masses", "expected an object mapping label to mass");
                return None;
            }
        };
        let mut pairs = Vec::new();
        let mut clean = true;
        for label in &labels {
            match masses.get(label.as_str()) {
                Some(m) => {
                    let path = format!("system.masses.{label}");
                    match self.f64_value(m, &path) {
                        Some(mass) if mass > 0.0 => pairs.push((label.clone(), mass)),
                        Some(mass) => {
                            self.flag(&path, format!("mass must be strictly positive, got {mass}"));
                            clean = false;
                        }
                        None => clean = false,
                    }
                }
                None => {
                    self.flag(
                        &format!("system.masses.{label}"),
                        "missing mass for this label",
                    );
                    clean = false;
                }
            }
        }
        for key in masses.keys() {
            if !labels.iter().any(|l| l.as_str() == key) {
                self.flag(
                    &format!("system.masses.{key}"),
                    "mass given for a label that is not in `labels`",
                );
            }
        }
        if !clean {
            return None;
        }
        match ParticleSystem::new(pairs) {
            Ok(s) => Some(s),
            Err(e) => {
                self.flag("system", e.to_string());
                None
            }
        }
    }

    fn frame(&mut self, v: &Value, path: &str, system: &ParticleSystem) -> Option<Label> {
        let name = self.str_field(v, path, "frame")?;
        let label = Label::from(name);
        if !system.contains(&label) {
            self.flag(
                &format!("{path}.frame"),
                format!("`{name}` is not a system label"),
            );
            return None;
        }
        Some(label)
    }

    fn initial(&mut self, v: &Value, system: &ParticleSystem) -> Option<InitialSpec> {
        let init = match v.get("initial") {
            Some(i) if i.is_object() => i,
            Some(_) => {
                self.flag("initial", "expected an object");
                return None;
            }
            None => {
                self.flag("", "missing field `initial`");
                return None;
            }
        };
        if let Some(wf) = init.get("wavefunction") {
            return self.wavefunction(wf, system);
        }
        let frame = self.frame(init, "initial", system)?;
        let n = system.len() - 1;
        if let Some(rand) = init.get("random") {
            let seed = match rand.get("seed").and_then(|s| s.as_u64()) {
                Some(s) => s,
                None => {
                    self.flag("initial.random.seed", "expected a non-negative integer");
                    return None;
                }
            };
            let nu = match rand.get("nu_range") {
                Some(v) => {
                    let vec = self.vector(v, "initial.random.nu_range")?;
                    if vec.len() != 2 {
                        self.flag("initial.random.nu_range", "expected [lo, hi]");
                        return None;
                    }
                    (vec[0], vec[1])
                }
                None => (0.5, 2.0),
            };
            if !(nu.0 >= 0.5 && nu.1 >= nu.0) {
                self.flag(
                    "initial.random.nu_range",
                    "requires 1/2 <= lo <= hi (vacuum floor)",
                );
                return None;
            }
            return Some(InitialSpec::Random {
                frame,
                seed,
                nu_range: nu,
            });
        }
        let ordering = match init.get("ordering") {
            Some(Value::String(s)) if s == "blocked" => Ordering::Blocked,
            Some(Value::String(s)) if s == "interleaved" => Ordering::Interleaved,
            None => Ordering::Blocked,
            _ => {
                self.flag("initial.ordering", "expected \"blocked\" or \"interleaved\"");
                return None;
            }
        };
        let mean = match init.get("mean") {
            Some(m) => self.vector(m, "initial.mean")?,
            None => DVector::zeros(2 * n),
        };
        let cov = match init.get("cov") {
            Some(c) => self.matrix(c, "initial.cov")?,
            None => {
                self.flag("initial", "missing field `cov` (or `random`/`wavefunction`)");
                return None;
            }
        };
        let mut ok = true;
        if mean.len() != 2 * n {
            self.flag(
                "initial.mean",
                format!("expected length {} for {} described particles", 2 * n, n),
            );
            ok = false;
        }
        if cov.nrows() != 2 * n {
            self.flag(
                "initial.cov",
                format!("expected a {0}x{0} matrix, got {1}x{1}", 2 * n, cov.nrows()),
            );
            ok = false;
        }
        if !ok {
            return None;
        }
        Some(InitialSpec::Moments {
            frame,
            ordering,
            mean,
            cov,
        })
    }

    fn wavefunction(&mut self, wf: &Value, system: &ParticleSystem) -> Option<InitialSpec> {
        let frame = self.frame(wf, "initial.wavefunction", system)?;
        let n = system.len() - 1;
        let mean = match wf.get("momentum_mean") {
            Some(m) => self.vector(m, "initial.wavefunction.momentum_mean")?,
            None => DVector::zeros(n),
        };
        let cov = match wf.get("momentum_covariance") {
            Some(c) => self.matrix(c, "initial.wavefunction.momentum_covariance")?,
            None => {
                self.flag(
                    "initial.wavefunction",
                    "missing field `momentum_covariance`",
                );
                return None;
            }
        };
        let phase_quadratic = match wf.get("phase_quadratic") {
            Some(p) => self.matrix(p, "initial.wavefunction.phase_quadratic")?,
            None => DMatrix::zeros(n, n),
        };
        let phase_linear = match wf.get("phase_linear") {
            Some(p) => self.vector(p, "initial.wavefunction.phase_linear")?,
            None => DVector::zeros(n),
        };
        match GaussianWavefunctionSpec::new(
            system.clone(),
            frame,
            mean,
            cov,
            phase_quadratic,
            phase_linear,
        ) {
            Ok(spec) => Some(InitialSpec::Wavefunction(Box::new(spec))),
            Err(e) => {
                self.flag("initial.wavefunction", e.to_string());
                None
            }
        }
    }

    fn action(&mut self, v: &Value, idx: usize, system: &ParticleSystem) -> Option<Action> {
        let path = format!("actions[{idx}]");
        let obj = match v.as_object() {
            Some(o) => o,
            None => {
                self.flag(&path, "expected an action object");
                return None;
            }
        };
        if obj.len() != 1 {
            self.flag(
                &path,
                "expected exactly one of `switch`, `evolve`, `check`, `oracle`, `report`",
            );
            return None;
        }
        let (key, body) = obj.iter().next().unwrap();
        match key.as_str() {
            "switch" => {
                let name = match body.as_str() {
                    Some(s) => s,
                    None => {
                        self.flag(&format!("{path}.switch"), "expected a frame label string");
                        return None;
                    }
                };
                let label = Label::from(name);
                if !system.contains(&label) {
                    self.flag(
                        &format!("{path}.switch"),
                        format!("`{name}` is not a system label"),
                    );
                    return None;
                }
                Some(Action::Switch(label))
            }
            "evolve" => {
                let h = match body.get("hamiltonian") {
                    Some(Value::String(s)) if s == "free" => HamiltonianSpec::Free,
                    Some(Value::Object(o)) if o.contains_key("matrix") => {
                        let m = self.matrix(
                            &o["matrix"],
                            &format!("{path}.evolve.hamiltonian.matrix"),
                        )?;
                        if m.nrows() != 2 * (system.len() - 1) {
                            self.flag(
                                &format!("{path}.evolve.hamiltonian.matrix"),
                                format!(
                                    "expected a {0}x{0} coefficient matrix",
                                    2 * (system.len() - 1)
                                ),
                            );
                            return None;
                        }
                        HamiltonianSpec::Matrix(m)
                    }
                    None => HamiltonianSpec::Free,
                    _ => {
                        self.flag(
                            &format!("{path}.evolve.hamiltonian"),
                            "expected \"free\" or {\"matrix\": [[...]]}",
                        );
                        return None;
                    }
                };
                let times = match body.get("times") {
                    Some(t) => {
                        let v = self.vector(t, &format!("{path}.evolve.times"))?;
                        v.iter().cloned().collect::<Vec<f64>>()
                    }
                    None => {
                        self.flag(&format!("{path}.evolve"), "missing field `times`");
                        return None;
                    }
                };
                if times.is_empty() {
                    self.flag(&format!("{path}.evolve.times"), "expected at least one time");
                    return None;
                }
                if times.windows(2).any(|w| w[0] > w[1]) {
                    self.flag(&format!("{path}.evolve.times"), "times must be sorted ascending");
                    return None;
                }
                Some(Action::Evolve {
                    hamiltonian: h,
                    times,
                })
            }
            "check" => {
                let name = match body.as_str() {
                    Some(s) => s,
                    None => {
                        self.flag(&format!("{path}.check"), "expected a check-set name");
                        return None;
                    }
                };
                match CheckSet::from_name(name) {
                    Some(set) => Some(Action::Check(set)),
                    None => {
                        self.flag(
                            &format!("{path}.check"),
                            format!(
                                "unknown check set `{name}` (uncertainty, triangle, momentum, \
                                 criteria, invariance, purity, all)"
                            ),
                        );
                        None
                    }
                }
            }
            "oracle" => {
                let frames = match body.get("frames").and_then(|f| f.as_array()) {
                    Some(arr) => {
                        let mut out = Vec::new();
                        for (i, item) in arr.iter().enumerate() {
                            match item.as_str() {
                                Some(s) if system.contains(&Label::from(s)) => {
                                    out.push(Label::from(s))
                                }
                                _ => {
                                    self.flag(
                                        &format!("{path}.oracle.frames[{i}]"),
                                        "expected a system label",
                                    );
                                    return None;
                                }
                            }
                        }
                        out
                    }
                    None => {
                        self.flag(&format!("{path}.oracle.frames"), "expected an array of labels");
                        return None;
                    }
                };
                let tol = match body.get("tol") {
                    Some(t) => {
                        let x = self.f64_value(t, &format!("{path}.oracle.tol"))?;
                        if x <= 0.0 {
                            self.flag(&format!("{path}.oracle.tol"), "must be positive");
                            return None;
                        }
                        x
                    }
                    None => 1e-4,
                };
                Some(Action::Oracle { frames, tol })
            }
            "report" => {
                let arr = match body.as_array() {
                    Some(a) => a,
                    None => {
                        self.flag(&format!("{path}.report"), "expected an array of targets");
                        return None;
                    }
                };
                let mut targets = Vec::new();
                for (i, item) in arr.iter().enumerate() {
                    match item.as_str().and_then(ReportTarget::from_name) {
                        Some(t) => targets.push(t),
                        None => {
                            self.flag(
                                &format!("{path}.report[{i}]"),
                                "unknown target (moments, determinants, purities, spectrum)",
                            );
                            return None;
                        }
                    }
                }
                Some(Action::Report(targets))
            }
            other => {
                self.flag(&path, format!("unknown action `{other}`"));
                None
            }
        }
    }
}

/// Validates and builds in one pass; `Err` carries every diagnostic found.
pub fn parse_scenario(v: &Value, name: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let mut w = Walker {
        diagnostics: Vec::new(),
    };
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA_ID) => {}
        Some(other) => w.flag("schema", format!("expected \"{SCHEMA_ID}\", got \"{other}\"")),
        None => w.flag("schema", format!("missing; expected \"{SCHEMA_ID}\"")),
    }
    let system = w.system(v);
    let initial = system
        .as_ref()
        .and_then(|sys| w.initial(v, sys));
    let mut actions = Vec::new();
    if let Some(sys) = &system {
        match v.get("actions") {
            Some(Value::Array(arr)) => {
                for (i, item) in arr.iter().enumerate() {
                    if let Some(action) = w.action(item, i, sys) {
                        actions.push(action);
                    }
                }
            }
            Some(_) => w.flag("actions", "expected an array"),
            None => w.flag("", "missing field `actions`"),
        }
    }
    let output = match v.get("output") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(Value::Null) | None => None,
        Some(_) => {
            w.flag("output", "expected a path string");
            None
        }
    };
    if !w.diagnostics.is_empty() {
        return Err(w.diagnostics);
    }
    Ok(Scenario {
        name: name.to_string(),
        system: system.expect("validated"),
        initial: initial.expect("validated"),
        actions,
        output,
    })
}

/// Full schema validation of a file without execution; every violation is
/// returned, including JSON syntax errors (with line and column).
pub fn validate_file(path: &Path) -> Vec<Diagnostic> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return vec![Diagnostic {
                path: path.display().to_string(),
                message: format!("cannot read file: {e}"),
            }]
        }
    };
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            return vec![Diagnostic {
                path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
                message: format!("JSON syntax error: {e}"),
            }]
        }
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    match parse_scenario(&value, &name) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Value {
        serde_json::json!({
            "schema": "qrf-scenario/v1",
            "system": {"labels": ["A", "B"], "masses": {"A": 1.0, "B": 1.0}},
            "initial": {"frame": "A", "cov": [[0.5, 0.0], [0.0, 0.5]]},
            "actions": [{"check": "uncertainty"}]
        })
    }

    #[test]
    fn minimal_scenario_parses() {
        let s = parse_scenario(&minimal(), "t").unwrap();
        assert_eq!(s.system.len(), 2);
        assert_eq!(s.actions.len(), 1);
    }

    #[test]
    fn negative_mass_is_flagged_by_field() {
        let mut v = minimal();
        v["system"]["masses"]["B"] = serde_json::json!(-1.0);
        let err = parse_scenario(&v, "t").unwrap_err();
        assert!(err.iter().any(|d| d.path == "system.masses.B"), "{err:?}");
    }

    #[test]
    fn missing_masses_is_one_diagnostic_per_label() {
        let mut v = minimal();
        v["system"]["masses"] = serde_json::json!({"A": 1.0});
        let err = parse_scenario(&v, "t").unwrap_err();
        assert_eq!(
            err.iter().filter(|d| d.path.starts_with("system.masses")).count(),
            1
        );
    }

    #[test]
    fn wrong_cov_dimension_is_flagged() {
        let mut v = minimal();
        v["system"]["labels"] = serde_json::json!(["A", "B", "C"]);
        v["system"]["masses"] = serde_json::json!({"A": 1.0, "B": 1.0, "C": 1.0});
        // 3x3 where a three-particle system needs 4x4.
        v["initial"]["cov"] =
            serde_json::json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let err = parse_scenario(&v, "t").unwrap_err();
        assert!(err.iter().any(|d| d.path == "initial.cov"), "{err:?}");
    }

    #[test]
    fn unknown_check_set_is_flagged() {
        let mut v = minimal();
        v["actions"] = serde_json::json!([{"check": "everything"}]);
        let err = parse_scenario(&v, "t").unwrap_err();
        assert!(err[0].path.starts_with("actions[0]"));
    }

    #[test]
    fn unsorted_times_are_flagged() {
        let mut v = minimal();
        v["actions"] = serde_json::json!([{"evolve": {"times": [2.0, 1.0]}}]);
        let err = parse_scenario(&v, "t").unwrap_err();
        assert!(err[0].path.contains("times"));
    }
}
