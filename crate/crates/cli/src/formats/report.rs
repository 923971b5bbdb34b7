//! Run reports: one record per command invocation, emitted as JSON or CSV
//! with identical values. Distances carry full precision plus a one-decimal
//! display string.

use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ConfigEcho {
    pub multiblock: bool,
    pub parity: bool,
    pub symmetry: String,
    pub valid_inequalities: bool,
    pub prune_dominated: bool,
    pub tau: Option<usize>,
    pub solver: String,
    pub time_limit_secs: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TrolleyRoute {
    pub trolley: usize,
    pub distance: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct RunReport {
    pub method: String,
    pub mode: String,
    pub config: ConfigEcho,
    pub build_time_secs: f64,
    pub solve_time_secs: f64,
    /// Optimal value of the distance approximation (exact method only).
    pub objective: Option<f64>,
    /// LP relaxation value of the built model (exact method only).
    pub root_relaxation_bound: Option<f64>,
    pub node_count: Option<u64>,
    pub route_time_secs: f64,
    pub routes: Vec<TrolleyRoute>,
    pub total_routed: f64,
    /// One-decimal rendering of `total_routed`.
    pub total_routed_display: String,
    pub reference: Option<f64>,
    /// `100 * (total_routed - reference) / reference` when a reference is given.
    pub deviation_pct: Option<f64>,
}

pub fn one_decimal(x: f64) -> String {
    format!("{x:.1}")
}

pub fn deviation_pct(value: f64, reference: Option<f64>) -> Option<f64> {
    reference.map(|r| 100.0 * (value - r) / r)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn to_csv(&self) -> String {
        let header = [
            "method",
            "mode",
            "multiblock",
            "parity",
            "symmetry",
            "valid_inequalities",
            "prune_dominated",
            "tau",
            "solver",
            "time_limit_secs",
            "build_time_secs",
            "solve_time_secs",
            "objective",
            "root_relaxation_bound",
            "node_count",
            "route_time_secs",
            "route_distances",
            "total_routed",
            "total_routed_display",
            "reference",
            "deviation_pct",
        ]
        .join(",");
        let opt = |v: Option<String>| v.unwrap_or_default();
        let routes = self
            .routes
            .iter()
            .map(|r| format!("{}:{}", r.trolley, r.distance))
            .collect::<Vec<_>>()
            .join(";");
        let row = [
            self.method.clone(),
            self.mode.clone(),
            self.config.multiblock.to_string(),
            self.config.parity.to_string(),
            self.config.symmetry.clone(),
            self.config.valid_inequalities.to_string(),
            self.config.prune_dominated.to_string(),
            opt(self.config.tau.map(|t| t.to_string())),
            self.config.solver.clone(),
            opt(self.config.time_limit_secs.map(|t| t.to_string())),
            self.build_time_secs.to_string(),
            self.solve_time_secs.to_string(),
            opt(self.objective.map(|v| v.to_string())),
            opt(self.root_relaxation_bound.map(|v| v.to_string())),
            opt(self.node_count.map(|v| v.to_string())),
            self.route_time_secs.to_string(),
            routes,
            self.total_routed.to_string(),
            self.total_routed_display.clone(),
            opt(self.reference.map(|v| v.to_string())),
            opt(self.deviation_pct.map(|v| v.to_string())),
        ]
        .join(",");
        format!("{header}\n{row}\n")
    }
}
