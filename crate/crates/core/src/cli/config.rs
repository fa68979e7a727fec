//! Run configuration: one JSON object with a `params` section and one
//! optional section per command.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::barrier::BarrierSearch;
use crate::error::{Error, Result};
use crate::fracsublap::{OperatorParams, QuadratureSpec};
use crate::hgroup::{GaugeBall, GroupPoint};
use crate::solver::Scheme;

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    /// Flat `[x₁..x_N, y₁..y_N, t]`.
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallConfig {
    pub fn to_ball(&self, field: &str) -> Result<GaugeBall> {
        let c = GroupPoint::from_flat(&self.center).map_err(|e| Error::config(format!("{field}.center"), e.to_string()))?;
        GaugeBall::new(c, self.radius).map_err(|e| Error::config(format!("{field}.radius"), e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_xy: usize,
    pub n_t: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_xy: 33, n_t: 65 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Registry expression of the field.
    pub field: String,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Extra points drawn uniformly from `[−1, 1]^{2N+1}` with `--seed`.
    #[serde(default)]
    pub random_points: usize,
}

fn default_tol() -> f64 {
    1e-3
}

fn default_max_iter() -> usize {
    50
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub omega: BallConfig,
    pub f: String,
    pub g: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Nonlocal quadrature of the solver; defaults to one tied to the grid.
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default = "yes")]
    pub write_residual: bool,
}

fn default_scheme() -> Scheme {
    Scheme::PolicyIteration
}

fn default_target() -> f64 {
    -1.0
}

fn default_c_max() -> f64 {
    1024.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    pub omega: BallConfig,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_c_max")]
    pub c_max: f64,
    /// Where the term-by-term decomposition is reported; defaults to Ω's centre.
    #[serde(default)]
    pub point: Option<Vec<f64>>,
}

impl BarrierSection {
    pub fn search(&self, quadrature: &QuadratureSpec) -> BarrierSearch {
        BarrierSearch {
            target: self.target,
            c_max: self.c_max,
            quadrature: quadrature.clone(),
            ..BarrierSearch::default()
        }
    }
}

fn default_k_max() -> usize {
    4
}

/// Either a registry field sampled on a grid over `omega`, or the solution
/// of the `solve` section (`field: "solve"`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySection {
    pub field: String,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub omega: Option<BallConfig>,
}

fn default_repeats() -> usize {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub grid: GridConfig,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection { repeats: default_repeats(), grid: GridConfig { n_xy: 17, n_t: 33 } }
    }
}

/// A fully resolved configuration; serialising it gives the provenance header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub params: OperatorParams,
    pub quadrature: QuadratureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

/// Maps a serde message such as "missing field `tol`" to a dotted field path.
fn serde_error(section: &str, e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .map(|f| format!("{section}.{f}"))
        .unwrap_or_else(|| section.to_string());
    Error::config(field, msg)
}

fn section<T: DeserializeOwned>(obj: &serde_json::Map<String, Value>, name: &str) -> Result<Option<T>> {
    obj.get(name)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| serde_error(name, e)))
        .transpose()
}

fn number(obj: &serde_json::Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match obj.get(key) {
        None => default.ok_or_else(|| Error::config(key, "missing field")),
        Some(v) => v.as_f64().ok_or_else(|| Error::config(key, format!("expected a number, got {v}"))),
    }
}

fn parse_params(v: &Value) -> Result<OperatorParams> {
    let obj = v.as_object().ok_or_else(|| Error::config("params", "expected an object"))?;
    const KNOWN: [&str; 7] = ["alpha", "beta", "lambda", "Lambda", "s", "c_norm", "n"];
    if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::config(k.clone(), "unknown parameter"));
    }
    let n = number(obj, "n", Some(1.0))?;
    if n < 1.0 || n.fract() != 0.0 {
        return Err(Error::config("n", "must be a positive integer"));
    }
    OperatorParams::new(
        number(obj, "alpha", None)?,
        number(obj, "beta", None)?,
        number(obj, "lambda", None)?,
        number(obj, "Lambda", None)?,
        number(obj, "s", None)?,
        number(obj, "c_norm", Some(1.0))?,
        n as usize,
    )
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| Error::config("config", "top level must be an object"))?;
        const SECTIONS: [&str; 7] = ["params", "quadrature", "eval", "solve", "barrier", "regularity", "bench"];
        if let Some(k) = obj.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown section"));
        }
        let params = parse_params(obj.get("params").ok_or_else(|| Error::config("params", "missing section"))?)?;
        let quadrature: QuadratureSpec = section(obj, "quadrature")?.unwrap_or_default();
        quadrature.validate()?;
        let cfg = RunConfig {
            params,
            quadrature,
            eval: section(obj, "eval")?,
            solve: section(obj, "solve")?,
            barrier: section(obj, "barrier")?,
            regularity: section(obj, "regularity")?,
            bench: section(obj, "bench")?,
        };
        if let Some(s) = &cfg.solve {
            if !(s.tol > 0.0) {
                return Err(Error::config("solve.tol", "must be positive"));
            }
            if let Some(q) = &s.quadrature {
                q.validate()?;
            }
        }
        Ok(cfg)
    }

    pub fn default_config() -> Self {
        RunConfig::from_json(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    /// Compact JSON of the resolved configuration.
    pub fn provenance(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_parses() {
        let c = RunConfig::default_config();
        assert!(c.solve.is_some() && c.barrier.is_some() && c.regularity.is_some() && c.eval.is_some());
        let again = RunConfig::from_json(&c.provenance()).unwrap();
        assert_eq!(again.provenance(), c.provenance());
    }

    #[test]
    fn field_level_errors() {
        let bad = DEFAULT_CONFIG.replace("\"s\": 0.5", "\"s\": 1.5");
        match RunConfig::from_json(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "s"),
            other => panic!("{other:?}"),
        }
        let missing = r#"{"params": {"alpha": 1, "beta": 1, "lambda": 1, "s": 0.5}}"#;
        match RunConfig::from_json(missing) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "Lambda"),
            other => panic!("{other:?}"),
        }
        let no_tol = r#"{"params": {"alpha": 1, "beta": 1, "lambda": 1, "Lambda": 2, "s": 0.5},
            "solve": {"omega": {"center": [0,0,0], "radius": 1}, "g": "const:1"}}"#;
        match RunConfig::from_json(no_tol) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "solve.f"),
            other => panic!("{other:?}"),
        }
    }
}
