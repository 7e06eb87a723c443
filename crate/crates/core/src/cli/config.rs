use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every experiment parameter, flat. The same struct is filled from a JSON
/// file and from command-line flags; flags win.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Weight source: zipf, csv or list.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Zipf exponent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Number of Zipf nodes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Raw weights, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// CSV file with a `weight` column.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights_path: Option<PathBuf>,
    /// Sampling weight function: id, one or pow:<alpha>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Opinion weight function for fpc: id, one or pow:<alpha>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Number of distinct nodes per greedy sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Target node, 1-based; defaults to the heaviest.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    /// Split fractions, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<f64>>,
    /// Equal split into r parts (tau: the r of tau_r).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Use two independent samplers instead of the coupling.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independent: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_runs: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sweep axis: network_size, sample_k, split_r or zipf_s.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis_values: Option<Vec<f64>>,
    /// Truncation tolerance for the exact voting power.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_max: Option<usize>,
    /// Exact table: v, joint or u.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    /// CSV of samples for kde and qq instead of running an experiment.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_path: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Node probability for tau.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finality_l: Option<usize>,
    /// Initial share of nodes with opinion 1 for fpc.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ones_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn from_json_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config file {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        overlay!(self, top;
            generator, s, n, weights, weights_path, f, g, k, node, fractions, r,
            independent, n_runs, seed, axis, axis_values, epsilon, v_max, table,
            input_path, bandwidth, grid_points, p, theta, beta, max_rounds,
            finality_l, ones_fraction, output_path);
        self
    }

    /// Names of the keys that are set.
    pub fn keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Rejects keys that the subcommand would ignore.
    pub fn check_keys(&self, subcommand: &str, allowed: &[&str]) -> Result<()> {
        let stray: Vec<String> = self
            .keys()
            .into_iter()
            .filter(|k| !allowed.contains(&k.as_str()))
            .collect();
        if stray.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "`{subcommand}` does not use: {}",
                stray.join(", ")
            )))
        }
    }
}

pub(crate) fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::invalid(format!("missing required field `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"k": 2, "bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn overlay_prefers_top() {
        let base: ExperimentConfig = serde_json::from_str(r#"{"k": 2, "seed": 5}"#).unwrap();
        let top = ExperimentConfig {
            k: Some(3),
            ..Default::default()
        };
        let merged = base.overlay(top);
        assert_eq!(merged.k, Some(3));
        assert_eq!(merged.seed, Some(5));
    }

    #[test]
    fn key_check() {
        let c = ExperimentConfig {
            k: Some(2),
            beta: Some(0.3),
            ..Default::default()
        };
        let mut keys = c.keys();
        keys.sort();
        assert_eq!(keys, ["beta", "k"]);
        assert!(c.check_keys("exact", &["k"]).is_err());
        assert!(c.check_keys("fpc", &["k", "beta"]).is_ok());
    }
}
