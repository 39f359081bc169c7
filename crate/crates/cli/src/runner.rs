//! Executes a scenario's action pipeline and writes the report artifacts.

use crate::report::{csv_num, CsvTable, Json};
use crate::scenario::{Action, CheckSet, HamiltonianSpec, InitialSpec, ReportTarget, Scenario};
use qrf_core::diagnostics::{
    criteria_invariance, entanglement_criteria, gaussian_purity, momentum_relation_report,
    rs_uncertainty_check, symplectic_spectrum, triangle_report,
};
use qrf_core::dynamics::{evolve, free_hamiltonian, quadratic_hamiltonian};
use qrf_core::frame::switch_frame;
use qrf_core::oracle::{gaussian_wavefunction, grid_moments, oracle_compare, GaussianWavefunctionSpec, GridPolicy};
use qrf_core::nalgebra::{DMatrix, DVector};
use qrf_core::tol::PSD_TOL;
use qrf_core::{random_state, Label, MomentState, Ordering};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Outcome of one named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable (degenerate inputs); counts as passing.
    Na,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Na => "NA",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub margin: Option<f64>,
}

impl CheckResult {
    fn ok(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub checks: Vec<CheckResult>,
    /// 0 when every check passed; otherwise 1 + index of the first
    /// failing check (capped at 99).
    pub exit_code: i32,
    pub first_failure: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario `{path}` is invalid; first problem at {first}{rest}")]
    Parse {
        path: PathBuf,
        first: String,
        rest: String,
    },
    #[error("action {index} failed: {message}")]
    Action { index: usize, message: String },
}

/// Tolerances used by the named checks, mirroring the verification suite.
mod check_tol {
    pub const PARTICLE_DET: f64 = 1e-9;
    pub const TRIANGLE_RESIDUAL: f64 = 1e-8;
    pub const MOMENTUM_SLACK: f64 = 1e-10;
    pub const RECIPROCAL_CORR: f64 = 1e-9;
    pub const DET_INVARIANCE: f64 = 1e-9;
    pub const CRITERIA_INVARIANCE: f64 = 1e-9;
    pub const SPECTATOR_MOMENTUM: f64 = 1e-12;
    pub const PURITY_BAND: f64 = 1e-9;
}

struct Pipeline {
    state: MomentState,
    wavefunction: Option<GaussianWavefunctionSpec>,
    seed: Option<u64>,
    checks: Vec<CheckResult>,
    steps: Vec<Json>,
    series: CsvTable,
    volume_rows: CsvTable,
    triangle_rows: CsvTable,
    criteria_rows: CsvTable,
    evolve_count: usize,
}

fn label_list(labels: &[Label]) -> Json {
    Json::Array(labels.iter().map(|l| Json::Str(l.to_string())).collect())
}

fn matrix_json(m: &DMatrix<f64>) -> Json {
    Json::Array(
        (0..m.nrows())
            .map(|i| Json::Array((0..m.ncols()).map(|j| Json::Float(m[(i, j)])).collect()))
            .collect(),
    )
}

fn vector_json(v: &DVector<f64>) -> Json {
    Json::Array(v.iter().map(|x| Json::Float(*x)).collect())
}

impl Pipeline {
    fn new(scenario: &Scenario, seed_override: Option<u64>) -> Result<Self, RunError> {
        let mut seed = None;
        let mut wavefunction = None;
        let state = match &scenario.initial {
            InitialSpec::Moments {
                frame,
                ordering,
                mean,
                cov,
            } => MomentState::new(
                scenario.system.clone(),
                frame.clone(),
                mean.clone(),
                cov.clone(),
                *ordering,
            )
            .map_err(|e| RunError::Action {
                index: 0,
                message: format!("initial state: {e}"),
            })?,
            InitialSpec::Random {
                frame,
                seed: s,
                nu_range,
            } => {
                let effective = seed_override.unwrap_or(*s);
                seed = Some(effective);
                random_state(&scenario.system, frame, effective, *nu_range).map_err(|e| {
                    RunError::Action {
                        index: 0,
                        message: format!("initial random state: {e}"),
                    }
                })?
            }
            InitialSpec::Wavefunction(spec) => {
                wavefunction = Some((**spec).clone());
                let dim = scenario.system.len() - 1;
                let psi = gaussian_wavefunction(spec, &GridPolicy::default_for(dim)).map_err(
                    |e| RunError::Action {
                        index: 0,
                        message: format!("initial wavefunction: {e}"),
                    },
                )?;
                grid_moments(&psi).map_err(|e| RunError::Action {
                    index: 0,
                    message: format!("initial wavefunction moments: {e}"),
                })?
            }
        };
        let mut series_header = vec!["action".to_string(), "t".to_string(), "frame".to_string(),
            "det_full".to_string()];
        for l in scenario.system.labels() {
            for kind in ["var_x", "var_p", "cov_xp", "det2x2"] {
                series_header.push(format!("{kind}_{l}"));
            }
        }
        Ok(Pipeline {
            state,
            wavefunction,
            seed,
            checks: Vec::new(),
            steps: Vec::new(),
            series: CsvTable {
                header: series_header,
                rows: Vec::new(),
            },
            volume_rows: CsvTable::new(&["action", "t", "det_full"]),
            triangle_rows: CsvTable::new(&[
                "frames", "side_ij", "side_jk", "side_ki", "cos_1", "cos_2", "cos_3", "angle_1",
                "angle_2", "angle_3", "residual",
            ]),
            criteria_rows: CsvTable::new(&["pair", "frame", "c_prod", "c_sum"]),
            evolve_count: 0,
        })
    }

    fn push_check(&mut self, name: impl Into<String>, status: CheckStatus, margin: Option<f64>) {
        self.checks.push(CheckResult {
            name: name.into(),
            status,
            margin,
        });
    }

    fn pass_if(&mut self, name: impl Into<String>, pass: bool, margin: f64) {
        self.push_check(
            name,
            if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            Some(margin),
        );
    }

    fn check_uncertainty(&mut self) {
        let report = rs_uncertainty_check(&self.state);
        self.pass_if(
            "uncertainty.psd_margin",
            report.psd_margin >= -PSD_TOL,
            report.psd_margin + PSD_TOL,
        );
        for (label, det) in report.per_particle_dets {
            self.pass_if(
                format!("uncertainty.particle_det.{label}"),
                det >= 0.25 - check_tol::PARTICLE_DET,
                det - (0.25 - check_tol::PARTICLE_DET),
            );
        }
    }

    fn check_triangle(&mut self) -> Result<(), String> {
        let labels = self.state.system().labels().to_vec();
        if labels.len() < 3 {
            self.push_check("triangle", CheckStatus::Na, None);
            return Ok(());
        }
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                for k in (j + 1)..labels.len() {
                    let (a, b, c) = (&labels[i], &labels[j], &labels[k]);
                    let report = triangle_report(&self.state, a, b, c).map_err(|e| e.to_string())?;
                    let name = format!("triangle.{a}{b}{c}");
                    match (report.constraint_residual, report.flags) {
                        (Some(residual), Some(flags)) => {
                            self.pass_if(
                                name,
                                residual <= check_tol::TRIANGLE_RESIDUAL && flags.all_pass(),
                                check_tol::TRIANGLE_RESIDUAL - residual,
                            );
                            let cos = report.cosines.unwrap();
                            let ang = report.angles.unwrap();
                            self.triangle_rows.push_row(vec![
                                format!("{a}{b}{c}"),
                                csv_num(report.sides[0]),
                                csv_num(report.sides[1]),
                                csv_num(report.sides[2]),
                                csv_num(cos[0]),
                                csv_num(cos[1]),
                                csv_num(cos[2]),
                                csv_num(ang[0]),
                                csv_num(ang[1]),
                                csv_num(ang[2]),
                                csv_num(residual),
                            ]);
                        }
                        _ => self.push_check(name, CheckStatus::Na, None),
                    }
                }
            }
        }
        Ok(())
    }

    fn check_momentum(&mut self) -> Result<(), String> {
        let labels = self.state.system().labels().to_vec();
        if labels.len() < 3 {
            self.push_check("momentum", CheckStatus::Na, None);
            return Ok(());
        }
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                let (a, b) = (&labels[i], &labels[j]);
                let report =
                    momentum_relation_report(&self.state, a, b).map_err(|e| e.to_string())?;
                let mut pass = report.variance_triangle_margin >= -check_tol::MOMENTUM_SLACK;
                if let Some(sum) = report.corr_sum {
                    pass &= sum <= check_tol::MOMENTUM_SLACK;
                }
                if let Some(res) = report.reciprocal_corr_residual {
                    pass &= res <= check_tol::RECIPROCAL_CORR;
                }
                self.pass_if(
                    format!("momentum.{a}{b}"),
                    pass,
                    report.variance_triangle_margin,
                );
            }
        }
        Ok(())
    }

    fn check_criteria(&mut self) -> Result<(), String> {
        let described = self.state.described().to_vec();
        for i in 0..described.len() {
            for j in (i + 1)..described.len() {
                let (k, l) = (&described[i], &described[j]);
                let report =
                    entanglement_criteria(&self.state, k, l).map_err(|e| e.to_string())?;
                // A witness is informative, never a failure.
                self.push_check(
                    format!("criteria.{k}{l}"),
                    CheckStatus::Pass,
                    Some(report.margin_sum()),
                );
                self.criteria_rows.push_row(vec![
                    format!("{k}{l}"),
                    report.frame.to_string(),
                    csv_num(report.c_prod),
                    csv_num(report.c_sum),
                ]);
            }
        }
        Ok(())
    }

    fn check_invariance(&mut self) -> Result<(), String> {
        let labels = self.state.system().labels().to_vec();
        let d0 = [
            self.state.det_full(),
            self.state.det_position(),
            self.state.det_momentum(),
        ];
        let mut det_dev: f64 = 0.0;
        let mut spectator_dev: f64 = 0.0;
        for to in &labels {
            if to == self.state.frame() {
                continue;
            }
            let switched = switch_frame(&self.state, to).map_err(|e| e.to_string())?;
            let d = [
                switched.det_full(),
                switched.det_position(),
                switched.det_momentum(),
            ];
            for (a, b) in d.iter().zip(d0.iter()) {
                det_dev = det_dev.max((a - b).abs() / b.abs().max(1.0));
            }
            for k in &labels {
                for l in &labels {
                    if [k, l].iter().any(|x| *x == self.state.frame() || *x == to) {
                        continue;
                    }
                    spectator_dev = spectator_dev.max(
                        (self.state.pp(k, l).map_err(|e| e.to_string())?
                            - switched.pp(k, l).map_err(|e| e.to_string())?)
                        .abs(),
                    );
                }
            }
        }
        self.pass_if(
            "invariance.determinants",
            det_dev <= check_tol::DET_INVARIANCE,
            check_tol::DET_INVARIANCE - det_dev,
        );
        if labels.len() >= 3 {
            self.pass_if(
                "invariance.spectator_momentum",
                spectator_dev <= check_tol::SPECTATOR_MOMENTUM,
                check_tol::SPECTATOR_MOMENTUM - spectator_dev,
            );
        }
        let described = self.state.described().to_vec();
        for i in 0..described.len() {
            for j in (i + 1)..described.len() {
                let (k, l) = (&described[i], &described[j]);
                let frames: Vec<Label> = labels
                    .iter()
                    .filter(|f| *f != k && *f != l)
                    .cloned()
                    .collect();
                if frames.is_empty() {
                    continue;
                }
                let report =
                    criteria_invariance(&self.state, &frames, k, l).map_err(|e| e.to_string())?;
                let dev = report.max_rel_dev_prod.max(report.max_rel_dev_sum);
                self.pass_if(
                    format!("invariance.criteria.{k}{l}"),
                    dev <= check_tol::CRITERIA_INVARIANCE,
                    check_tol::CRITERIA_INVARIANCE - dev,
                );
                for per_frame in &report.per_frame {
                    self.criteria_rows.push_row(vec![
                        format!("{k}{l}"),
                        per_frame.frame.to_string(),
                        csv_num(per_frame.c_prod),
                        csv_num(per_frame.c_sum),
                    ]);
                }
            }
        }
        Ok(())
    }

    fn check_purity(&mut self) {
        for label in self.state.described().to_vec() {
            let name = format!("purity.{label}");
            match self
                .state
                .particle_block(&label)
                .and_then(|b| gaussian_purity(&b))
            {
                Ok(mu) => self.pass_if(
                    name,
                    mu > 0.0 && mu <= 1.0 + check_tol::PURITY_BAND,
                    1.0 + check_tol::PURITY_BAND - mu,
                ),
                Err(_) => self.push_check(name, CheckStatus::Fail, None),
            }
        }
    }

    fn run_checks(&mut self, set: CheckSet) -> Result<(), String> {
        match set {
            CheckSet::Uncertainty => self.check_uncertainty(),
            CheckSet::Triangle => self.check_triangle()?,
            CheckSet::Momentum => self.check_momentum()?,
            CheckSet::Criteria => self.check_criteria()?,
            CheckSet::Invariance => self.check_invariance()?,
            CheckSet::Purity => self.check_purity(),
            CheckSet::All => {
                self.check_uncertainty();
                self.check_triangle()?;
                self.check_momentum()?;
                self.check_criteria()?;
                self.check_invariance()?;
                self.check_purity();
            }
        }
        Ok(())
    }

    fn series_row(&mut self, action_idx: usize, t: f64, state: &MomentState) {
        let mut row = vec![
            format!("{action_idx}"),
            csv_num(t),
            state.frame().to_string(),
            csv_num(state.det_full()),
        ];
        for l in state.system().labels() {
            if state.slot(l).is_ok() {
                let block = state.particle_block(l).expect("described");
                row.push(csv_num(block[(0, 0)]));
                row.push(csv_num(block[(1, 1)]));
                row.push(csv_num(block[(0, 1)]));
                row.push(csv_num(
                    block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)],
                ));
            } else {
                row.extend(std::iter::repeat_n(String::new(), 4));
            }
        }
        self.series.rows.push(row);
        self.volume_rows.push_row(vec![
            format!("{action_idx}"),
            csv_num(t),
            csv_num(state.det_full()),
        ]);
    }

    fn execute(&mut self, index: usize, action: &Action) -> Result<(), RunError> {
        let fail = |message: String| RunError::Action { index, message };
        match action {
            Action::Switch(to) => {
                self.state = switch_frame(&self.state, to).map_err(|e| fail(e.to_string()))?;
                let mut step = Json::object();
                step.set("action", Json::Str("switch".into()));
                step.set("to", Json::Str(to.to_string()));
                step.set("det_full", Json::Float(self.state.det_full()));
                self.steps.push(step);
            }
            Action::Evolve { hamiltonian, times } => {
                let h = match hamiltonian {
                    HamiltonianSpec::Free => {
                        free_hamiltonian(self.state.system(), self.state.frame())
                            .map_err(|e| fail(e.to_string()))?
                    }
                    HamiltonianSpec::Matrix(g) => {
                        quadratic_hamiltonian(self.state.frame(), g.clone())
                            .map_err(|e| fail(e.to_string()))?
                    }
                };
                self.evolve_count += 1;
                let mut last = None;
                for &t in times {
                    let evolved = evolve(&self.state, &h, t).map_err(|e| fail(e.to_string()))?;
                    self.series_row(index, t, &evolved);
                    last = Some(evolved);
                }
                if let Some(state) = last {
                    self.state = state;
                }
                let mut step = Json::object();
                step.set("action", Json::Str("evolve".into()));
                step.set(
                    "hamiltonian",
                    Json::Str(
                        match hamiltonian {
                            HamiltonianSpec::Free => "free",
                            HamiltonianSpec::Matrix(_) => "matrix",
                        }
                        .into(),
                    ),
                );
                step.set(
                    "times",
                    Json::Array(times.iter().map(|t| Json::Float(*t)).collect()),
                );
                step.set("det_full", Json::Float(self.state.det_full()));
                self.steps.push(step);
            }
            Action::Check(set) => {
                let before = self.checks.len();
                self.run_checks(*set).map_err(fail)?;
                let mut step = Json::object();
                step.set("action", Json::Str("check".into()));
                step.set("set", Json::Str(set.name().into()));
                step.set(
                    "checks_added",
                    Json::Int((self.checks.len() - before) as i64),
                );
                self.steps.push(step);
            }
            Action::Oracle { frames, tol } => {
                let spec = self.wavefunction.as_ref().ok_or_else(|| {
                    fail("oracle comparison needs a wavefunction initial state".to_string())
                })?;
                let report =
                    oracle_compare(spec, frames, *tol).map_err(|e| fail(e.to_string()))?;
                let mut frames_json = Vec::new();
                for r in &report.frames {
                    self.pass_if(
                        format!("oracle.{}", r.frame),
                        r.pass,
                        tol - r.max_deviation,
                    );
                    let mut f = Json::object();
                    f.set("frame", Json::Str(r.frame.to_string()));
                    f.set("max_deviation", Json::Float(r.max_deviation));
                    f.set("pass", Json::Bool(r.pass));
                    frames_json.push(f);
                }
                let mut step = Json::object();
                step.set("action", Json::Str("oracle".into()));
                step.set("tol", Json::Float(*tol));
                step.set("frames", Json::Array(frames_json));
                self.steps.push(step);
            }
            Action::Report(targets) => {
                let mut step = Json::object();
                step.set("action", Json::Str("report".into()));
                for target in targets {
                    match target {
                        ReportTarget::Moments => {
                            step.set("mean", vector_json(self.state.mean()));
                            step.set("cov", matrix_json(self.state.cov()));
                            step.set(
                                "ordering",
                                Json::Str(
                                    match self.state.ordering() {
                                        Ordering::Blocked => "blocked",
                                        Ordering::Interleaved => "interleaved",
                                    }
                                    .into(),
                                ),
                            );
                        }
                        ReportTarget::Determinants => {
                            let mut d = Json::object();
                            d.set("full", Json::Float(self.state.det_full()));
                            d.set("position", Json::Float(self.state.det_position()));
                            d.set("momentum", Json::Float(self.state.det_momentum()));
                            step.set("determinants", d);
                        }
                        ReportTarget::Purities => {
                            let mut map = BTreeMap::new();
                            for l in self.state.described().to_vec() {
                                let mu = self
                                    .state
                                    .particle_block(&l)
                                    .and_then(|b| gaussian_purity(&b))
                                    .ok();
                                map.insert(l.to_string(), Json::from_float_opt(mu));
                            }
                            step.set("purities", Json::Object(map));
                        }
                        ReportTarget::Spectrum => {
                            let nus =
                                symplectic_spectrum(self.state.cov(), self.state.ordering())
                                    .map_err(|e| fail(e.to_string()))?;
                            step.set(
                                "symplectic_spectrum",
                                Json::Array(nus.into_iter().map(Json::Float).collect()),
                            );
                        }
                    }
                }
                step.set("frame", Json::Str(self.state.frame().to_string()));
                self.steps.push(step);
            }
        }
        Ok(())
    }

    fn report_json(&self, scenario: &Scenario) -> Json {
        let mut root = Json::object();
        root.set("schema", Json::Str("qrf-report/v1".into()));
        root.set("scenario", Json::Str(scenario.name.clone()));
        root.set(
            "seed",
            match self.seed {
                Some(s) => Json::Int(s as i64),
                None => Json::Null,
            },
        );
        let mut system = Json::object();
        system.set("labels", label_list(scenario.system.labels()));
        let mut masses = BTreeMap::new();
        for l in scenario.system.labels() {
            masses.insert(
                l.to_string(),
                Json::Float(scenario.system.mass(l).expect("label exists")),
            );
        }
        system.set("masses", Json::Object(masses));
        root.set("system", system);

        let mut checks = Vec::new();
        for c in &self.checks {
            let mut entry = Json::object();
            entry.set("name", Json::Str(c.name.clone()));
            entry.set("status", Json::Str(c.status.to_string()));
            entry.set("margin", Json::from_float_opt(c.margin));
            checks.push(entry);
        }
        root.set("checks", Json::Array(checks));
        root.set("steps", Json::Array(self.steps.clone()));

        let mut fin = Json::object();
        fin.set("frame", Json::Str(self.state.frame().to_string()));
        fin.set("described", label_list(self.state.described()));
        fin.set("mean", vector_json(self.state.mean()));
        fin.set("cov", matrix_json(self.state.cov()));
        fin.set("det_full", Json::Float(self.state.det_full()));
        fin.set("physical", Json::Bool(self.state.is_physical()));
        root.set("final_state", fin);
        root.set(
            "all_pass",
            Json::Bool(self.checks.iter().all(|c| c.ok())),
        );
        root
    }
}

/// Runs a parsed scenario, writing `report.json`, `series.csv` and
/// `plotdata/*.csv` under `out_dir`.
pub fn run_parsed(
    scenario: &Scenario,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunOutcome, RunError> {
    let mut pipeline = Pipeline::new(scenario, seed_override)?;
    for (i, action) in scenario.actions.iter().enumerate() {
        pipeline.execute(i, action)?;
    }

    fs::create_dir_all(out_dir).map_err(|e| RunError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |e: std::io::Error| RunError::Io { path, source: e }
    };
    let report_path = out_dir.join("report.json");
    crate::report::write_json_file(&report_path, &pipeline.report_json(scenario))
        .map_err(io_err(&report_path))?;
    if pipeline.evolve_count > 0 {
        let series_path = out_dir.join("series.csv");
        pipeline.series.write(&series_path).map_err(io_err(&series_path))?;
    }
    let plot_dir = out_dir.join("plotdata");
    if !pipeline.volume_rows.rows.is_empty()
        || !pipeline.triangle_rows.rows.is_empty()
        || !pipeline.criteria_rows.rows.is_empty()
    {
        fs::create_dir_all(&plot_dir).map_err(|e| RunError::Io {
            path: plot_dir.clone(),
            source: e,
        })?;
    }
    for (name, table) in [
        ("uncertainty_volume.csv", &pipeline.volume_rows),
        ("triangle.csv", &pipeline.triangle_rows),
        ("criteria_by_frame.csv", &pipeline.criteria_rows),
    ] {
        if !table.rows.is_empty() {
            let path = plot_dir.join(name);
            table.write(&path).map_err(io_err(&path))?;
        }
    }

    let first_fail = pipeline
        .checks
        .iter()
        .position(|c| !c.ok());
    let exit_code = match first_fail {
        None => 0,
        Some(idx) => (idx as i32 + 1).min(99),
    };
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        first_failure: first_fail.map(|i| pipeline.checks[i].name.clone()),
        checks: pipeline.checks,
        exit_code,
    })
}

/// Loads, validates and runs a scenario file.
pub fn run_scenario(
    path: &Path,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<RunOutcome, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| RunError::Parse {
        path: path.to_path_buf(),
        first: format!("line {}, column {}: {e}", e.line(), e.column()),
        rest: String::new(),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    let scenario = crate::scenario::parse_scenario(&value, &name).map_err(|diags| {
        RunError::Parse {
            path: path.to_path_buf(),
            first: diags[0].to_string(),
            rest: if diags.len() > 1 {
                format!(" (+{} more; run `qrf validate`)", diags.len() - 1)
            } else {
                String::new()
            },
        }
    })?;
    let out_dir = resolve_out_dir(&scenario, out_override);
    run_parsed(&scenario, &out_dir, seed_override)
}

/// Output directory precedence: explicit flag, scenario `output` field,
/// `QRF_OUT_DIR/<name>`, `./qrf-out/<name>`.
pub fn resolve_out_dir(scenario: &Scenario, out_override: Option<&Path>) -> PathBuf {
    if let Some(dir) = out_override {
        return dir.to_path_buf();
    }
    if let Some(dir) = &scenario.output {
        return dir.clone();
    }
    let root = std::env::var_os("QRF_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qrf-out"));
    root.join(&scenario.name)
}
