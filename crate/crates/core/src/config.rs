//! JSON problem configurations.
//!
//! A config is a single JSON object; unknown keys are rejected so typos in
//! numerical setups fail loudly. The `phi` field is an expression in `t`,
//! `g` and `exact` are expressions in `x` (see [`crate::expr`] for the
//! grammar). Defaults: `z = a`, `lambda = -1` for second-kind problems,
//! `grid_points = 101`.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expr::{parse_single_var, ExprError};
use crate::solver::{Forcing, Kind, Problem, SolveError};

/// Default reporting grid size.
pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug)]
pub enum ConfigError {
    Io { path: String, source: io::Error },
    Json(serde_json::Error),
    Validation { field: String, message: String },
    Expr { field: String, source: ExprError },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read `{path}`: {source}"),
            ConfigError::Json(e) => write!(f, "invalid JSON: {e}"),
            ConfigError::Validation { field, message } => write!(f, "{field}: {message}"),
            ConfigError::Expr { field, source } => write!(f, "{field}: {source}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Degrees to run: a single integer or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NValues {
    Single(usize),
    List(Vec<usize>),
}

impl NValues {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            NValues::Single(n) => vec![*n],
            NValues::List(list) => list.clone(),
        }
    }
}

/// The JSON configuration schema, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// `"first"` or `"second"`.
    pub kind: String,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub n: NValues,
    pub phi: String,
    pub g: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_quadrature: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

/// A validated configuration: the problem plus its run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: Problem,
    pub n_values: Vec<usize>,
    pub grid_points: usize,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        serde_json::from_str(text).map_err(ConfigError::Json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Parses the expressions and validates the problem invariants.
    pub fn into_run_spec(self) -> Result<RunSpec, ConfigError> {
        let kind = match self.kind.as_str() {
            "first" => Kind::First,
            "second" => Kind::Second,
            other => {
                return Err(ConfigError::Validation {
                    field: "kind".to_string(),
                    message: format!("expected \"first\" or \"second\", got \"{other}\""),
                })
            }
        };

        let phi = parse_single_var(&self.phi, "t")
            .map_err(|source| ConfigError::Expr { field: "phi".to_string(), source })?;
        let g = parse_single_var(&self.g, "x")
            .map_err(|source| ConfigError::Expr { field: "g".to_string(), source })?;
        let exact = match &self.exact {
            Some(text) => Some(
                parse_single_var(text, "x")
                    .map_err(|source| ConfigError::Expr { field: "exact".to_string(), source })?,
            ),
            None => None,
        };

        let mut builder = Problem::builder(kind, self.alpha, self.a, self.b)
            .phi(phi)
            .forcing(Forcing::Expression(g))
            .lambda(self.lambda.unwrap_or(-1.0))
            .force_quadrature(self.force_quadrature.unwrap_or(false))
            .quad_nodes(self.quad_nodes)
            .rank_tol(self.rank_tol);
        if let Some(z) = self.z {
            builder = builder.z(z);
        }
        if let Some(exact) = exact {
            builder = builder.exact(exact);
        }
        let problem = builder.build().map_err(|e| match e {
            SolveError::InvalidProblem { field, message } => {
                ConfigError::Validation { field, message }
            }
            other => ConfigError::Validation {
                field: "problem".to_string(),
                message: other.to_string(),
            },
        })?;

        let n_values = self.n.to_vec();
        if n_values.is_empty() {
            return Err(ConfigError::Validation {
                field: "n".to_string(),
                message: "at least one degree is required".to_string(),
            });
        }

        let grid_points = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 2 {
            return Err(ConfigError::Validation {
                field: "grid_points".to_string(),
                message: "at least two grid points are required".to_string(),
            });
        }

        Ok(RunSpec { problem, n_values, grid_points })
    }
}

impl RunSpec {
    /// Serializes back to the config schema. Only problems whose forcing is
    /// an expression round-trip; manufactured forcings are in-process only.
    pub fn to_config(&self) -> Result<Config, ConfigError> {
        let g = match &self.problem.g {
            Forcing::Expression(ast) => ast.to_string(),
            Forcing::Manufactured { .. } => {
                return Err(ConfigError::Validation {
                    field: "g".to_string(),
                    message: "manufactured forcing terms have no textual form".to_string(),
                })
            }
        };
        Ok(Config {
            kind: match self.problem.kind {
                Kind::First => "first".to_string(),
                Kind::Second => "second".to_string(),
            },
            alpha: self.problem.alpha,
            a: self.problem.a,
            b: self.problem.b,
            z: Some(self.problem.z),
            lambda: Some(self.problem.lambda),
            n: NValues::List(self.n_values.clone()),
            phi: self.problem.phi.to_string(),
            g,
            exact: self.problem.exact.as_ref().map(|e| e.to_string()),
            force_quadrature: Some(self.problem.force_quadrature),
            quad_nodes: self.problem.quad_nodes,
            grid_points: Some(self.grid_points),
            rank_tol: self.problem.rank_tol,
        })
    }
}

/// Loads and validates a JSON config file.
pub fn load_config(path: &Path) -> Result<RunSpec, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Config::from_json(&text)?.into_run_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kind": "first",
        "alpha": 0.5,
        "a": 0.0,
        "b": 1.0,
        "n": 5,
        "phi": "t^2",
        "g": "(2/3)*pi*x^3"
    }"#;

    #[test]
    fn minimal_config_applies_defaults() {
        let spec = Config::from_json(MINIMAL).unwrap().into_run_spec().unwrap();
        assert_eq!(spec.problem.z, 0.0);
        assert_eq!(spec.grid_points, DEFAULT_GRID_POINTS);
        assert_eq!(spec.n_values, vec![5]);
        assert_eq!(spec.problem.kind, Kind::First);
        assert!(!spec.problem.force_quadrature);
    }

    #[test]
    fn alpha_out_of_range_names_the_field() {
        let text = MINIMAL.replace("0.5", "1.5");
        let err = Config::from_json(&text).unwrap().into_run_spec().unwrap_err();
        match err {
            ConfigError::Validation { field, message } => {
                assert_eq!(field, "alpha");
                assert!(message.contains("alpha must be in (0,1)"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_monotone_phi_is_rejected_at_load() {
        let text = MINIMAL.replace("t^2", "t^3 - t");
        let err = Config::from_json(&text).unwrap().into_run_spec().unwrap_err();
        assert!(matches!(err, ConfigError::Validation { field, .. } if field == "phi"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"n\": 5,", "\"n\": 5, \"nn\": 7,");
        assert!(matches!(Config::from_json(&text), Err(ConfigError::Json(_))));
    }

    #[test]
    fn n_accepts_single_or_list() {
        let single = Config::from_json(MINIMAL).unwrap();
        assert_eq!(single.n.to_vec(), vec![5]);
        let text = MINIMAL.replace("\"n\": 5", "\"n\": [5, 7, 9]");
        let list = Config::from_json(&text).unwrap();
        assert_eq!(list.n.to_vec(), vec![5, 7, 9]);
    }

    #[test]
    fn wrong_variable_in_phi_is_an_expression_error() {
        let text = MINIMAL.replace("t^2", "x^2");
        let err = Config::from_json(&text).unwrap().into_run_spec().unwrap_err();
        assert!(matches!(err, ConfigError::Expr { field, .. } if field == "phi"));
    }

    #[test]
    fn round_trip_preserves_the_problem() {
        const MAXIMAL: &str = r#"{
            "kind": "second",
            "alpha": 0.25,
            "a": 0.0,
            "b": 1.0,
            "z": 0.5,
            "lambda": 0.75,
            "n": [3, 5],
            "phi": "sin(t)",
            "g": "1 - 2*x + (4/3)*x^(3/4)",
            "exact": "1 - 2*x",
            "force_quadrature": true,
            "quad_nodes": 48,
            "grid_points": 21,
            "rank_tol": 1e-10
        }"#;
        for text in [MINIMAL, MAXIMAL] {
            let spec = Config::from_json(text).unwrap().into_run_spec().unwrap();
            let config = spec.to_config().unwrap();
            let reloaded = Config::from_json(&config.to_json())
                .unwrap()
                .into_run_spec()
                .unwrap();
            assert_eq!(spec.problem, reloaded.problem);
            assert_eq!(spec.n_values, reloaded.n_values);
            assert_eq!(spec.grid_points, reloaded.grid_points);
        }
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_config(Path::new("/nonexistent/config.json")).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }
}
