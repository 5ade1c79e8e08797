use std::path::{Path, PathBuf};

use laurent_core::coefficients::{default_grid, max_grid};
use laurent_core::geometry::{DomainSpec, Polyannulus};
use laurent_core::multiindex::box_size;
use laurent_core::testfns::{builtin, Expr, TestFunction};
use serde::{Deserialize, Serialize};

/// A built-in function by name, or a custom expression with its validity
/// polyannulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Builtin(String),
    Custom {
        name: String,
        expr: Expr,
        validity: Polyannulus,
    },
}

impl FunctionSpec {
    pub fn resolve(&self) -> laurent_core::Result<TestFunction> {
        match self {
            FunctionSpec::Builtin(name) => builtin(name),
            FunctionSpec::Custom { name, expr, validity } => TestFunction::new(name.clone(), expr.clone(), validity.clone()),
        }
    }
}

fn default_depth() -> u32 {
    3
}
fn default_orders() -> Vec<u32> {
    vec![0]
}
fn default_epsilons() -> Vec<f64> {
    vec![1e-6]
}
fn default_trials() -> usize {
    20
}
fn default_radial() -> usize {
    32
}
fn default_angular() -> usize {
    16
}

/// One experiment. Fields left out of the JSON take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: FunctionSpec,
    /// Region `P` for seminorms and bounds; defaults to the validity region.
    #[serde(default)]
    pub region: Option<Polyannulus>,
    /// Domain whose rational cover supplies the constant `B`.
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "default_depth")]
    pub cover_depth: u32,
    #[serde(rename = "box")]
    pub box_n: u64,
    /// Grid points per axis; defaults to a power of two `≥ max(2N+1, 32)`.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Torus radii; defaults to the centre torus of the validity region.
    #[serde(default)]
    pub torus: Option<Vec<f64>>,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_radial")]
    pub radial: usize,
    #[serde(default = "default_angular")]
    pub angular: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// A config that failed to parse or lies outside the supported ranges.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for InvalidConfig {}

/// Largest box size `|Q_N|` accepted.
pub const MAX_TERMS: usize = 200_000;

impl ExperimentConfig {
    pub fn new(function: FunctionSpec, box_n: u64) -> Self {
        ExperimentConfig {
            function,
            region: None,
            domain: None,
            cover_depth: default_depth(),
            box_n,
            grid: None,
            torus: None,
            orders: default_orders(),
            epsilons: default_epsilons(),
            trials: default_trials(),
            seed: 0,
            radial: default_radial(),
            angular: default_angular(),
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, InvalidConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, InvalidConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The resolved function, region, torus and grid.
    pub fn resolved(&self) -> Result<Resolved, InvalidConfig> {
        let bad = |e: laurent_core::Error| InvalidConfig(e.to_string());
        let f = self.function.resolve().map_err(bad)?;
        let region = self.region.clone().unwrap_or_else(|| f.validity.clone());
        f.check_region(&region).map_err(bad)?;
        let torus = self.torus.clone().unwrap_or_else(|| f.validity.default_torus());
        let grid = self.grid.unwrap_or_else(|| default_grid(self.box_n));
        Ok(Resolved { f, region, torus, grid })
    }

    pub fn validate(&self) -> Result<(), InvalidConfig> {
        let fail = |msg: String| Err(InvalidConfig(msg));
        let r = self.resolved()?;
        let n = r.f.dim();
        if box_size(self.box_n, n) > MAX_TERMS {
            return fail(format!("box N={} has more than {MAX_TERMS} terms in dimension {n}", self.box_n));
        }
        if r.torus.len() != n || r.torus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return fail(format!("torus {:?} must have {n} positive radii", r.torus));
        }
        let on_validity = r.f.validity.axes.iter().zip(&r.torus).all(|(a, &t)| a.closure_contains_modulus(t, 1e-12));
        if !on_validity {
            return fail(format!("torus {:?} is outside the validity region of {}", r.torus, r.f.name));
        }
        Polyannulus::new(r.region.axes.clone()).map_err(|e| InvalidConfig(e.to_string()))?;
        if r.grid < 2 * self.box_n as usize + 1 || r.grid > max_grid(n) {
            return fail(format!(
                "grid {} must lie in [2N+1, {}] = [{}, {}]",
                r.grid,
                max_grid(n),
                2 * self.box_n + 1,
                max_grid(n)
            ));
        }
        if let Some(d) = &self.domain {
            if d.dim() != n {
                return fail(format!("domain {} has dimension {}, function has {n}", d.label(), d.dim()));
            }
        }
        if !(1..=20).contains(&self.cover_depth) {
            return fail(format!("cover_depth {} must be in 1..=20", self.cover_depth));
        }
        if self.orders.is_empty() || self.orders.iter().any(|&k| k > 6) {
            return fail(format!("orders {:?} must be nonempty with entries in 0..=6", self.orders));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return fail(format!("epsilons {:?} must be nonempty with entries in (0, 1)", self.epsilons));
        }
        if self.trials == 0 || self.trials > 10_000 {
            return fail(format!("trials {} must be in 1..=10000", self.trials));
        }
        if !(2..=512).contains(&self.radial) || !(1..=512).contains(&self.angular) {
            return fail(format!(
                "sampling {}x{} must have radial in 2..=512 and angular in 1..=512",
                self.radial, self.angular
            ));
        }
        Ok(())
    }
}

/// Config fields with defaults applied and the function built.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub f: TestFunction,
    pub region: Polyannulus,
    pub torus: Vec<f64>,
    pub grid: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"function": "geometric", "box": 10}"#).unwrap();
        assert_eq!(cfg.orders, vec![0]);
        assert_eq!(cfg.radial, 32);
        let r = cfg.resolved().unwrap();
        assert_eq!(r.torus, vec![1.0]);
        assert_eq!(r.grid, 32);
    }

    #[test]
    fn custom_function_round_trips() {
        let text = r#"{
            "function": {"name": "m", "expr": {"kind": "monomial", "exponent": [2]},
                         "validity": {"axes": [{"kind": "disc", "outer": 1.0}]}},
            "box": 3, "grid": 8, "orders": [0, 1], "seed": 9
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.resolved().unwrap().f.name, "m");
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for text in [
            r#"{"function": "geometric", "box": 20, "grid": 16}"#,
            r#"{"function": "nope", "box": 2}"#,
            r#"{"function": "geometric", "box": 2, "epsilons": [2.0]}"#,
            r#"{"function": "geometric", "box": 2, "orders": []}"#,
            r#"{"function": "geometric", "box": 2, "trials": 0}"#,
            r#"{"function": "geometric", "box": 2, "torus": [5.0]}"#,
            r#"{"function": "geometric", "box": 2, "unknown": 1}"#,
            r#"{"function": "geometric", "box": 2, "region": {"axes": [{"kind": "disc", "outer": 3.0}]}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
