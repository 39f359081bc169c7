//! Built-in demo scenarios, rendered through the deterministic JSON
//! writer so repeated materializations are byte-identical.

use crate::report::{to_string, Json};
use qrf_core::diagnostics::two_mode_squeezed_cov;
use std::collections::BTreeMap;

pub const DEMO_NAMES: [&str; 4] = ["e1", "pure-half", "n2-vacuum", "n4-criteria"];

fn system_json(labels: &[&str]) -> Json {
    let mut sys = Json::object();
    sys.set(
        "labels",
        Json::Array(labels.iter().map(|l| Json::Str(l.to_string())).collect()),
    );
    let mut masses = BTreeMap::new();
    for l in labels {
        masses.insert(l.to_string(), Json::Float(1.0));
    }
    sys.set("masses", Json::Object(masses));
    sys
}

fn diag_cov(dim: usize, value: f64) -> Json {
    Json::Array(
        (0..dim)
            .map(|i| {
                Json::Array(
                    (0..dim)
                        .map(|j| Json::Float(if i == j { value } else { 0.0 }))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn scenario_shell(labels: &[&str], initial: Json, actions: Vec<Json>) -> String {
    let mut root = Json::object();
    root.set("schema", Json::Str("qrf-scenario/v1".into()));
    root.set("system", system_json(labels));
    root.set("initial", initial);
    root.set("actions", Json::Array(actions));
    to_string(&root)
}

fn action(key: &str, value: Json) -> Json {
    let mut a = Json::object();
    a.set(key, value);
    a
}

/// Three unit-mass particles, identity covariance in frame A: switch to B
/// and run everything. The hand-derived switched blocks are
/// X = [[1,1],[1,2]], P = [[2,-1],[-1,1]] with determinant 1.
fn e1() -> String {
    let mut initial = Json::object();
    initial.set("frame", Json::Str("A".into()));
    initial.set("ordering", Json::Str("blocked".into()));
    initial.set("cov", diag_cov(4, 1.0));
    scenario_shell(
        &["A", "B", "C"],
        initial,
        vec![
            action("report", Json::Array(vec![Json::Str("determinants".into())])),
            action("switch", Json::Str("B".into())),
            action("report", Json::Array(vec![
                Json::Str("determinants".into()),
                Json::Str("moments".into()),
                Json::Str("spectrum".into()),
            ])),
            action("check", Json::Str("all".into())),
        ],
    )
}

/// Pure product state at the vacuum floor: purity is frame-dependent while
/// everything else stays consistent.
fn pure_half() -> String {
    let mut initial = Json::object();
    initial.set("frame", Json::Str("A".into()));
    initial.set("cov", diag_cov(4, 0.5));
    scenario_shell(
        &["A", "B", "C"],
        initial,
        vec![
            action("report", Json::Array(vec![Json::Str("purities".into())])),
            action("check", Json::Str("all".into())),
            action("switch", Json::Str("B".into())),
            action("report", Json::Array(vec![Json::Str("purities".into())])),
            action("check", Json::Str("purity".into())),
        ],
    )
}

/// Two particles in vacuum, evolved freely: the uncertainty product grows
/// while the 2x2 determinant stays at 1/4.
fn n2_vacuum() -> String {
    let mut initial = Json::object();
    initial.set("frame", Json::Str("A".into()));
    initial.set("cov", diag_cov(2, 0.5));
    let mut evolve = Json::object();
    evolve.set("hamiltonian", Json::Str("free".into()));
    evolve.set(
        "times",
        Json::Array([0.0, 0.5, 1.0, 2.0].iter().map(|t| Json::Float(*t)).collect()),
    );
    scenario_shell(
        &["A", "B"],
        initial,
        vec![
            action("check", Json::Str("uncertainty".into())),
            action("evolve", evolve),
            action("check", Json::Str("uncertainty".into())),
            action("report", Json::Array(vec![Json::Str("determinants".into())])),
        ],
    )
}

/// Four particles: B and C in a two-mode squeezed state (r = 1), D in
/// vacuum. The criteria flag entanglement identically from every
/// admissible frame.
fn n4_criteria() -> String {
    let tms = two_mode_squeezed_cov(1.0);
    // Blocked 6x6 over (B, C, D): squeezed pair plus a vacuum mode.
    let mut cov = vec![vec![0.0f64; 6]; 6];
    for i in 0..2 {
        for j in 0..2 {
            cov[i][j] = tms[(i, j)];
            cov[i][3 + j] = tms[(i, 2 + j)];
            cov[3 + i][j] = tms[(2 + i, j)];
            cov[3 + i][3 + j] = tms[(2 + i, 2 + j)];
        }
    }
    cov[2][2] = 0.5;
    cov[5][5] = 0.5;
    let cov_json = Json::Array(
        cov.into_iter()
            .map(|row| Json::Array(row.into_iter().map(Json::Float).collect()))
            .collect(),
    );
    let mut initial = Json::object();
    initial.set("frame", Json::Str("A".into()));
    initial.set("cov", cov_json);
    scenario_shell(
        &["A", "B", "C", "D"],
        initial,
        vec![
            action("check", Json::Str("criteria".into())),
            action("check", Json::Str("invariance".into())),
            action("switch", Json::Str("D".into())),
            action("check", Json::Str("criteria".into())),
            action("check", Json::Str("uncertainty".into())),
        ],
    )
}

/// JSON text of a built-in scenario.
pub fn demo_source(name: &str) -> Option<String> {
    match name {
        "e1" => Some(e1()),
        "pure-half" => Some(pure_half()),
        "n2-vacuum" => Some(n2_vacuum()),
        "n4-criteria" => Some(n4_criteria()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_demos_parse_cleanly() {
        for name in DEMO_NAMES {
            let text = demo_source(name).unwrap();
            let value: serde_json::Value = serde_json::from_str(&text).unwrap();
            let parsed = crate::scenario::parse_scenario(&value, name);
            assert!(parsed.is_ok(), "{name}: {:?}", parsed.err());
        }
    }

    #[test]
    fn demo_rendering_is_stable() {
        for name in DEMO_NAMES {
            assert_eq!(demo_source(name), demo_source(name));
        }
    }
}
