use rand::seq::index;

use super::config::{required, ExperimentConfig};
use super::output::{Cell, Table};
use crate::error::{Error, Result};
use crate::exact::{
    exact_joint_distribution, exact_u_distribution, exact_v_distribution, tau_argmax, tau_limit,
    tau_r_value, voting_power_truncated,
};
use crate::fairness::{
    default_grid, estimate_split_gain, estimate_voting_power, estimate_voting_powers, kde_density,
    qq_points, silverman_bandwidth, sweep_gain, GainEstimate, RunConfig, SplitShape, SweepAxis,
    SweepBase, WeightSource,
};
use crate::fpc::{run_fpc, FpcConfig};
use crate::sampler::{stream_id, RngStream, Sampler};
use crate::weights::{
    sampling_distribution, zipf_weights, SplitSpec, WeightDistribution, WeightFunction, ZipfParams,
};

pub(super) struct CommandOutput {
    pub table: String,
    pub summary: Option<serde_json::Value>,
    pub notes: Vec<String>,
}

impl CommandOutput {
    fn table(table: Table) -> Self {
        Self {
            table: table.into_string(),
            summary: None,
            notes: Vec::new(),
        }
    }
}

const WEIGHT_KEYS: &[&str] = &["generator", "s", "n", "weights", "weights_path", "f"];
const SPLIT_KEYS: &[&str] = &["k", "node", "fractions", "r", "n_runs", "seed", "independent"];
const DEFAULT_RUNS: u64 = 100_000;

fn allowed(groups: &[&[&'static str]]) -> Vec<&'static str> {
    let mut keys: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    keys.push("output_path");
    keys
}

pub(super) fn dispatch(name: &str, config: &mut ExperimentConfig) -> Result<CommandOutput> {
    match name {
        "exact" => exact(config),
        "sample" => sample(config),
        "power" => power(config),
        "gain" => gain(config),
        "sweep" => sweep(config),
        "kde" => kde(config),
        "qq" => qq(config),
        "fpc" => fpc(config),
        "tau" => tau(config),
        other => Err(Error::invalid(format!("unknown subcommand {other}"))),
    }
}

fn weight_function(value: &mut Option<String>, default: WeightFunction, name: &str) -> Result<WeightFunction> {
    let f = match value.as_deref() {
        None => default,
        Some(text) => text
            .parse()
            .map_err(|e: Error| Error::invalid(format!("field `{name}`: {e}")))?,
    };
    *value = Some(f.to_string());
    Ok(f)
}

/// Which generator the config asks for, filling it in when implied.
fn generator(config: &mut ExperimentConfig) -> Result<String> {
    let implied = if config.weights.is_some() {
        "list"
    } else if config.weights_path.is_some() {
        "csv"
    } else {
        "zipf"
    };
    let gen = config.generator.clone().unwrap_or_else(|| implied.to_string());
    let conflict = match gen.as_str() {
        "zipf" => config.weights.is_some() || config.weights_path.is_some(),
        "csv" => config.weights.is_some() || config.s.is_some() || config.n.is_some(),
        "list" => config.weights_path.is_some() || config.s.is_some() || config.n.is_some(),
        other => {
            return Err(Error::invalid(format!(
                "field `generator`: expected zipf, csv or list, got {other:?}"
            )))
        }
    };
    if conflict {
        return Err(Error::invalid(format!(
            "field `generator`: {gen} conflicts with the other weight keys given"
        )));
    }
    config.generator = Some(gen.clone());
    Ok(gen)
}

fn weights(config: &mut ExperimentConfig) -> Result<WeightDistribution> {
    match generator(config)?.as_str() {
        "list" => WeightDistribution::from_raw(required(&config.weights, "weights")?),
        "csv" => WeightDistribution::from_csv_path(required(&config.weights_path, "weights_path")?),
        _ => zipf_weights(ZipfParams {
            s: required(&config.s, "s")?,
            n: required(&config.n, "n")?,
        }),
    }
}

fn node_index(node: usize, len: usize) -> Result<usize> {
    if node == 0 || node > len {
        return Err(Error::invalid(format!("field `node`: {node} is not in 1..={len}")));
    }
    Ok(node - 1)
}

/// 0-based target node, defaulting to the heaviest.
fn target(config: &mut ExperimentConfig, w: &WeightDistribution) -> Result<usize> {
    let node = *config.node.get_or_insert(w.heaviest() + 1);
    node_index(node, w.len())
}

fn split_shape(config: &mut ExperimentConfig) -> Result<SplitShape> {
    match (&config.fractions, config.r) {
        (Some(_), Some(_)) => Err(Error::invalid("give either `fractions` or `r`, not both")),
        (Some(x), None) => Ok(SplitShape::Fractions(x.clone())),
        (None, r) => Ok(SplitShape::Equal(*config.r.get_or_insert(r.unwrap_or(2)))),
    }
}

fn split_spec(shape: SplitShape, node: usize) -> Result<SplitSpec> {
    match shape {
        SplitShape::Equal(r) => SplitSpec::equal(node, r),
        SplitShape::Fractions(x) => SplitSpec::new(node, x),
    }
}

fn run_config(config: &mut ExperimentConfig, default_runs: u64) -> RunConfig {
    let n_runs = *config.n_runs.get_or_insert(default_runs);
    let seed = *config.seed.get_or_insert(0);
    RunConfig::new(n_runs, seed)
}

fn estimate_row(axis_value: Cell, e: &GainEstimate) -> Vec<Cell> {
    vec![
        axis_value,
        e.mean.into(),
        e.std_error.into(),
        e.ci_low.into(),
        e.ci_high.into(),
        e.n_runs.into(),
    ]
}

const GAIN_HEADER: &[&str] = &["axis_value", "mean", "std_error", "ci_low", "ci_high", "n_runs"];

fn exact(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    let table_kind = config.table.get_or_insert_with(|| "v".to_string()).clone();
    let extra: &[&str] = match table_kind.as_str() {
        "v" => &["k", "v_max", "table"],
        "joint" => &["k", "v_max", "node", "table"],
        "u" => &["k", "table"],
        other => {
            return Err(Error::invalid(format!(
                "field `table`: expected v, joint or u, got {other:?}"
            )))
        }
    };
    config.check_keys("exact", &allowed(&[WEIGHT_KEYS, extra]))?;
    let w = weights(config)?;
    let f = weight_function(&mut config.f, WeightFunction::Identity, "f")?;
    let p = sampling_distribution(&w, f)?;
    let k = required(&config.k, "k")?;
    let mut notes = Vec::new();
    let table = match table_kind.as_str() {
        "v" => {
            let v_max = *config.v_max.get_or_insert(24.max(k));
            let d = exact_v_distribution(&p, k, v_max)?;
            notes.push(format!("residual mass beyond v_max: {:e}", d.residual()));
            let mut t = Table::new(&["v", "prob"]);
            for (v, prob) in d.iter() {
                t.row(vec![v.into(), prob.into()]);
            }
            t
        }
        "joint" => {
            let node = target(config, &w)?;
            let v_max = *config.v_max.get_or_insert(24.max(k));
            let d = exact_joint_distribution(&p, k, node, v_max)?;
            notes.push(format!("residual mass beyond v_max: {:e}", d.residual()));
            let mut t = Table::new(&["ell", "v", "prob"]);
            for (ell, v, prob) in d.iter() {
                t.row(vec![ell.into(), v.into(), prob.into()]);
            }
            t
        }
        _ => {
            let d = exact_u_distribution(&p, k)?;
            let mut t = Table::new(&["u", "prob"]);
            for (u, prob) in d.iter() {
                t.row(vec![u.into(), prob.into()]);
            }
            t
        }
    };
    Ok(CommandOutput {
        table: table.into_string(),
        summary: None,
        notes,
    })
}

fn sample(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys("sample", &allowed(&[WEIGHT_KEYS, &["k", "n_runs", "seed"]]))?;
    let w = weights(config)?;
    let f = weight_function(&mut config.f, WeightFunction::Identity, "f")?;
    let p = sampling_distribution(&w, f)?;
    let k = required(&config.k, "k")?;
    let runs = run_config(config, 1);
    let sampler = Sampler::new(&p)?;
    let mut t = Table::new(&["run", "v_k", "node", "count"]);
    for run in 0..runs.n_runs {
        let chunk = u32::try_from(run).map_err(|_| Error::invalid("field `n_runs`: too many runs"))?;
        let mut rng = RngStream::new(runs.seed, stream_id(0, chunk, 0)).rng();
        let s = sampler.greedy(k, &mut rng)?;
        for (&node, &count) in s.counts() {
            t.row(vec![(run + 1).into(), s.total_draws().into(), (node + 1).into(), count.into()]);
        }
    }
    Ok(CommandOutput::table(t))
}

fn power(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys(
        "power",
        &allowed(&[WEIGHT_KEYS, &["k", "node", "n_runs", "seed", "epsilon"]]),
    )?;
    let w = weights(config)?;
    let f = weight_function(&mut config.f, WeightFunction::Identity, "f")?;
    let p = sampling_distribution(&w, f)?;
    let k = required(&config.k, "k")?;
    let nodes: Vec<usize> = match config.node {
        Some(node) => vec![node_index(node, w.len())?],
        None => (0..w.len()).collect(),
    };
    if let Some(epsilon) = config.epsilon {
        if config.n_runs.is_some() || config.seed.is_some() {
            return Err(Error::invalid(
                "exact voting power (`epsilon`) takes no `n_runs` or `seed`",
            ));
        }
        let mut t = Table::new(&["node", "value", "error_bound", "v_max"]);
        for node in nodes {
            let v = voting_power_truncated(&p, k, node, epsilon)?;
            t.row(vec![(node + 1).into(), v.value.into(), v.error_bound.into(), v.v_max.into()]);
        }
        return Ok(CommandOutput::table(t));
    }
    let runs = run_config(config, DEFAULT_RUNS);
    let estimates = if nodes.len() == 1 {
        vec![estimate_voting_power(&p, k, nodes[0], &runs)?]
    } else {
        estimate_voting_powers(&p, k, &runs)?
    };
    let mut t = Table::new(&["node", "mean", "std_error", "ci_low", "ci_high", "n_runs"]);
    for (node, e) in nodes.into_iter().zip(&estimates) {
        t.row(estimate_row((node + 1).into(), e));
    }
    Ok(CommandOutput::table(t))
}

/// Weights, k, split and mode shared by gain, kde and qq.
fn gain_estimate(config: &mut ExperimentConfig, retain: bool) -> Result<(usize, GainEstimate)> {
    let w = weights(config)?;
    let f = weight_function(&mut config.f, WeightFunction::Identity, "f")?;
    let k = required(&config.k, "k")?;
    let node = target(config, &w)?;
    let split = split_spec(split_shape(config)?, node)?;
    let coupled = !*config.independent.get_or_insert(f != WeightFunction::Identity);
    let runs = run_config(config, DEFAULT_RUNS).retain_samples(retain);
    Ok((w.len(), estimate_split_gain(&w, f, k, &split, coupled, &runs)?))
}

fn gain(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys("gain", &allowed(&[WEIGHT_KEYS, SPLIT_KEYS]))?;
    let (n, e) = gain_estimate(config, false)?;
    let mut t = Table::new(GAIN_HEADER);
    t.row(estimate_row(n.into(), &e));
    Ok(CommandOutput::table(t))
}

fn sweep(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys(
        "sweep",
        &allowed(&[WEIGHT_KEYS, SPLIT_KEYS, &["axis", "axis_values"]]),
    )?;
    let axis: SweepAxis = required(&config.axis, "axis")?
        .parse()
        .map_err(|e: Error| Error::invalid(format!("field `axis`: {e}")))?;
    config.axis = Some(axis.to_string());
    let values = required(&config.axis_values, "axis_values")?;
    let source = match axis {
        SweepAxis::NetworkSize | SweepAxis::ZipfS => {
            if generator(config)? != "zipf" {
                return Err(Error::invalid(format!("axis {axis} needs the zipf generator")));
            }
            let s = if axis == SweepAxis::ZipfS { config.s.unwrap_or(0.0) } else { required(&config.s, "s")? };
            let n = if axis == SweepAxis::NetworkSize { config.n.unwrap_or(1) } else { required(&config.n, "n")? };
            WeightSource::Zipf(ZipfParams { s, n })
        }
        _ => match generator(config)?.as_str() {
            "zipf" => WeightSource::Zipf(ZipfParams {
                s: required(&config.s, "s")?,
                n: required(&config.n, "n")?,
            }),
            _ => WeightSource::Explicit(weights(config)?),
        },
    };
    let f = weight_function(&mut config.f, WeightFunction::Identity, "f")?;
    let k = if axis == SweepAxis::SampleK { config.k.unwrap_or(1) } else { required(&config.k, "k")? };
    let split = if axis == SweepAxis::SplitR {
        if config.fractions.is_some() || config.r.is_some() {
            return Err(Error::invalid("axis split_r sets the split; drop `fractions` and `r`"));
        }
        SplitShape::Equal(1)
    } else {
        split_shape(config)?
    };
    let coupled = !*config.independent.get_or_insert(f != WeightFunction::Identity);
    let base = SweepBase {
        weights: source,
        f,
        k,
        node: config.node.map(|n| n.checked_sub(1).ok_or_else(|| Error::invalid("field `node` is 1-based"))).transpose()?,
        split,
        coupled,
    };
    let runs = run_config(config, DEFAULT_RUNS);
    let result = sweep_gain(&base, axis, &values, &runs)?;
    let mut t = Table::new(GAIN_HEADER);
    for point in &result.points {
        let value = if axis.is_integer() {
            Cell::Int(point.axis_value as u64)
        } else {
            Cell::Float(point.axis_value)
        };
        t.row(estimate_row(value, &point.estimate));
    }
    Ok(CommandOutput::table(t))
}

fn read_samples(path: &std::path::Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let column = headers
        .iter()
        .position(|h| matches!(h, "gain" | "sample" | "value"))
        .or((headers.len() == 1).then_some(0))
        .ok_or_else(|| {
            Error::invalid(format!(
                "field `input_path`: {} needs a `gain`, `sample` or `value` column",
                path.display()
            ))
        })?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let text = record.get(column).unwrap_or("");
        out.push(text.parse::<f64>().map_err(|e| {
            Error::invalid(format!("field `input_path`: bad number {text:?}: {e}"))
        })?);
    }
    Ok(out)
}

fn samples_for(config: &mut ExperimentConfig, name: &str, own: &[&'static str]) -> Result<Vec<f64>> {
    if let Some(path) = config.input_path.clone() {
        config.check_keys(name, &allowed(&[own, &["input_path"]]))?;
        return read_samples(&path);
    }
    config.check_keys(name, &allowed(&[WEIGHT_KEYS, SPLIT_KEYS, own]))?;
    let (_, e) = gain_estimate(config, true)?;
    Ok(e.retained_samples.unwrap_or_default())
}

fn kde(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    let samples = samples_for(config, "kde", &["bandwidth", "grid_points"])?;
    let h = match config.bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(&samples)?,
    };
    let grid = default_grid(&samples, h, config.grid_points);
    let mut t = Table::new(&["x", "density"]);
    for (x, d) in kde_density(&samples, Some(h), &grid)? {
        t.row(vec![x.into(), d.into()]);
    }
    Ok(CommandOutput {
        table: t.into_string(),
        summary: None,
        notes: vec![format!("bandwidth: {h:e}")],
    })
}

fn qq(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    let samples = samples_for(config, "qq", &[])?;
    let mut t = Table::new(&["theoretical", "sample"]);
    for (x, y) in qq_points(&samples)? {
        t.row(vec![x.into(), y.into()]);
    }
    Ok(CommandOutput::table(t))
}

fn fpc(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys(
        "fpc",
        &allowed(&[
            WEIGHT_KEYS,
            &["g", "k", "theta", "beta", "max_rounds", "finality_l", "ones_fraction", "seed"],
        ]),
    )?;
    let w = weights(config)?;
    let d = FpcConfig::default();
    let fpc_config = FpcConfig {
        k: *config.k.get_or_insert(d.k),
        theta: *config.theta.get_or_insert(d.theta),
        beta: *config.beta.get_or_insert(d.beta),
        max_rounds: *config.max_rounds.get_or_insert(d.max_rounds),
        finality_l: *config.finality_l.get_or_insert(d.finality_l),
        scheme_f: weight_function(&mut config.f, d.scheme_f, "f")?,
        scheme_g: weight_function(&mut config.g, d.scheme_g, "g")?,
    };
    let ones = *config.ones_fraction.get_or_insert(0.9);
    if !(0.0..=1.0).contains(&ones) {
        return Err(Error::invalid(format!("field `ones_fraction`: {ones} is not in [0, 1]")));
    }
    let seed = *config.seed.get_or_insert(0);
    let n = w.len();
    let count = (ones * n as f64).round() as usize;
    let mut initial = vec![0u8; n];
    let mut rng = RngStream::new(seed, u64::MAX).rng();
    for j in index::sample(&mut rng, n, count) {
        initial[j] = 1;
    }
    let trace = run_fpc(&fpc_config, &w, &initial, seed)?;
    let mut t = Table::new(&["round", "u_t", "ones_fraction"]);
    for round in 0..=trace.rounds() {
        t.row(vec![round.into(), trace.threshold(round).into(), trace.ones_fraction(round).into()]);
    }
    let final_ones = trace.ones_fraction(trace.rounds());
    let summary = serde_json::json!({
        "consensus_round": trace.consensus_round,
        "final_agreement": trace.final_agreement,
        "rounds": trace.rounds(),
        "final_ones_fraction": final_ones,
    });
    Ok(CommandOutput {
        table: t.into_string(),
        summary: Some(summary),
        notes: Vec::new(),
    })
}

fn tau(config: &mut ExperimentConfig) -> Result<CommandOutput> {
    config.check_keys("tau", &allowed(&[&["p", "r"]]))?;
    match (config.p, config.r) {
        (None, None) => {
            let m = tau_argmax();
            let mut t = Table::new(&["m_star", "tau_star"]);
            t.row(vec![m.m_star.into(), m.tau_star.into()]);
            Ok(CommandOutput::table(t))
        }
        (None, Some(_)) => Err(Error::invalid("field `r` needs `p`")),
        (Some(p), r) => {
            let limit = tau_limit(p)?;
            let mut t = Table::new(&["p", "r", "tau_r", "tau"]);
            match r {
                Some(r) => t.row(vec![p.into(), r.into(), tau_r_value(p, r)?.into(), limit.into()]),
                None => t.row(vec![p.into(), Cell::Empty, Cell::Empty, limit.into()]),
            }
            Ok(CommandOutput::table(t))
        }
    }
}
