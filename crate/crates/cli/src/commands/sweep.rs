//! Grid sweeps over any other command's parameters.
//!
//! Points run in grid order, the last axis varying fastest. Each output row
//! starts with the axis values the command does not already report.

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::evaluate::EvaluateConfig;
use super::markov::MarkovConfig;
use super::mc::McConfig;
use super::plan::PlanConfig;
use super::repeater::RepeaterConfig;
use super::Command;
use crate::config::{self, Params};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Row, Table};

pub const NAME: &str = "sweep";

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// transition (passive rounds over n and m), overhead (plans over targets) or plateau (finite depth under gate noise)
    #[arg(long)]
    pub preset: Option<String>,
    /// Command run at each grid point
    #[arg(long)]
    pub of: Option<String>,
    /// Fixed parameter, key=value (repeatable)
    #[arg(long = "set")]
    pub set: Vec<String>,
    /// Axis as name=v1,v2,... or name=from:to:count[:log] (repeatable)
    #[arg(long = "axis")]
    pub axis: Vec<String>,
    /// Largest accepted number of grid points and rows
    #[arg(long)]
    pub row_cap: Option<u64>,
    /// Drop points whose parameters are invalid or infeasible
    #[arg(long)]
    pub skip_invalid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Transition,
    Overhead,
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Evaluate,
    Plan,
    Markov,
    Mc,
    Repeater,
}

/// An explicit value list or a `from`/`to` range by `step` or `count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub log: bool,
}

fn number(x: f64, integral: bool) -> Value {
    if integral && x >= 0.0 {
        json!(x.round() as u64)
    } else if integral {
        json!(x.round() as i64)
    } else {
        json!(x)
    }
}

fn is_int(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() < 2f64.powi(53)
}

impl Axis {
    fn listed(name: &str, values: Vec<Value>) -> Self {
        Self {
            name: name.into(),
            values: Some(values),
            from: None,
            to: None,
            step: None,
            count: None,
            log: false,
        }
    }

    fn range(name: &str, from: f64, to: f64, step: Option<f64>, count: Option<u64>, log: bool) -> Self {
        Self {
            name: name.into(),
            values: None,
            from: Some(from),
            to: Some(to),
            step,
            count,
            log,
        }
    }

    /// Parses `name=v1,v2,...` or `name=from:to:count[:log]`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let Some((name, body)) = spec.split_once('=') else {
            return config_error(format!("axis {spec:?}: expected name=values"));
        };
        let name = name.trim();
        if body.contains(':') {
            let parts: Vec<&str> = body.split(':').map(str::trim).collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("axis {name}: bad number {s:?}")))
            };
            let log = match parts.get(3) {
                None => false,
                Some(&"log") => true,
                Some(other) => return config_error(format!("axis {name}: unknown modifier {other:?}")),
            };
            if parts.len() < 3 || parts.len() > 4 {
                return config_error(format!("axis {name}: expected from:to:count[:log]"));
            }
            let count = parts[2]
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("axis {name}: bad count {:?}", parts[2])))?;
            return Ok(Self::range(name, num(parts[0])?, num(parts[1])?, None, Some(count), log));
        }
        let values = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',').map(|v| config::parse_scalar(v.trim())).collect()
        };
        Ok(Self::listed(name, values))
    }

    pub fn values(&self) -> Result<Vec<Value>, CliError> {
        let name = &self.name;
        match (&self.values, self.from, self.to) {
            (Some(v), None, None) if self.step.is_none() && self.count.is_none() && !self.log => Ok(v.clone()),
            (None, Some(from), Some(to)) => match (self.step, self.count) {
                (Some(step), None) if !self.log => {
                    if !(step != 0.0 && step.is_finite()) || (to - from) * step < 0.0 {
                        return config_error(format!("axis {name}: step {step} does not lead from {from} to {to}"));
                    }
                    let integral = is_int(from) && is_int(to) && is_int(step);
                    let n = ((to - from) / step + 1e-9).floor() as u64 + 1;
                    Ok((0..n).map(|i| number(from + i as f64 * step, integral)).collect())
                }
                (None, Some(count)) => {
                    if count <= 1 {
                        return Ok(if count == 1 { vec![number(from, is_int(from) && !self.log)] } else { vec![] });
                    }
                    let span = (count - 1) as f64;
                    if self.log {
                        if !(from > 0.0 && to > 0.0) {
                            return config_error(format!("axis {name}: log axes need positive ends"));
                        }
                        let (a, b) = (from.log10(), to.log10());
                        Ok((0..count)
                            .map(|i| {
                                let x = 10f64.powf(a + (b - a) * i as f64 / span);
                                // keep decade points exact
                                json!(format!("{x:.12e}").parse::<f64>().unwrap_or(x))
                            })
                            .collect())
                    } else {
                        let step = (to - from) / span;
                        let integral = is_int(from) && is_int(to) && is_int(step);
                        Ok((0..count).map(|i| number(from + i as f64 * step, integral)).collect())
                    }
                }
                _ => config_error(format!("axis {name}: give exactly one of step and count (log needs count)")),
            },
            _ => config_error(format!("axis {name}: give values, or from and to")),
        }
    }
}

fn default_row_cap() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub of: Option<Target>,
    #[serde(default)]
    pub base: Params,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default = "default_row_cap")]
    pub row_cap: u64,
    #[serde(default)]
    pub skip_invalid: Option<bool>,
}

/// Gate counts 0 and 10^(i/8) for i = 0..=40, rounded and deduplicated.
fn plateau_gates() -> Vec<u64> {
    let mut g: Vec<u64> = std::iter::once(0)
        .chain((0..=40).map(|i| 10f64.powf(i as f64 / 8.0).round() as u64))
        .collect();
    g.dedup();
    g
}

struct PresetDefaults {
    of: Target,
    base: Value,
    axes: Vec<Axis>,
}

fn preset_defaults(p: Preset) -> PresetDefaults {
    match p {
        Preset::Transition => PresetDefaults {
            of: Target::Evaluate,
            base: json!({ "fidelity": 0.8 }),
            axes: vec![
                Axis::range("n", 4.0, 64.0, Some(4.0), None, false),
                Axis::range("m", 1.0, 63.0, Some(1.0), None, false),
            ],
        },
        Preset::Overhead => PresetDefaults {
            of: Target::Plan,
            base: json!({ "n_max": 300 }),
            axes: vec![
                Axis::listed("epsilon0", vec![json!(0.1), json!(0.01), json!(0.001)]),
                Axis::listed("active_e_max", vec![Value::Null, json!(3_000_000)]),
                Axis::range("target", 1e-2, 1e-15, None, Some(14), true),
            ],
        },
        Preset::Plateau => PresetDefaults {
            of: Target::Markov,
            base: json!({
                "n": 30,
                "epsilon": 0.02,
                "noise": "depolarizing",
                "gates": plateau_gates(),
            }),
            axes: vec![Axis::listed("strength", vec![json!(0.0), json!(1e-4), json!(1e-3)])],
        },
    }
}

fn columns(of: Target) -> &'static [&'static str] {
    match of {
        Target::Evaluate => EvaluateConfig::COLUMNS,
        Target::Plan => PlanConfig::COLUMNS,
        Target::Markov => MarkovConfig::COLUMNS,
        Target::Mc => McConfig::COLUMNS,
        Target::Repeater => RepeaterConfig::COLUMNS,
    }
}

fn run_as<C: Command>(params: Params) -> Result<Vec<Row>, CliError> {
    let mut c: C = config::parse(C::NAME, params)?;
    c.prepare();
    c.run()
}

fn run_point(of: Target, params: Params) -> Result<Vec<Row>, CliError> {
    match of {
        Target::Evaluate => run_as::<EvaluateConfig>(params),
        Target::Plan => run_as::<PlanConfig>(params),
        Target::Markov => run_as::<MarkovConfig>(params),
        Target::Mc => run_as::<McConfig>(params),
        Target::Repeater => run_as::<RepeaterConfig>(params),
    }
}

impl SweepConfig {
    /// Applies the preset, pins a seed for Monte Carlo sweeps and turns every
    /// axis into an explicit value list.
    fn resolve(mut self) -> Result<Self, CliError> {
        let mut skip = false;
        if let Some(p) = self.preset {
            let d = preset_defaults(p);
            if self.of.is_some_and(|of| of != d.of) {
                return config_error(format!("preset {p:?} sweeps {:?}", d.of));
            }
            self.of = Some(d.of);
            let Value::Object(mut base) = d.base else { unreachable!() };
            base.extend(std::mem::take(&mut self.base));
            self.base = base;
            let mut axes = d.axes;
            for a in std::mem::take(&mut self.axes) {
                match axes.iter_mut().find(|b| b.name == a.name) {
                    Some(slot) => *slot = a,
                    None => axes.push(a),
                }
            }
            self.axes = axes;
            skip = true;
        }
        let Some(of) = self.of else {
            return config_error("sweep needs a preset or the command to run (of)");
        };
        let mut seen = std::collections::HashSet::new();
        for a in &mut self.axes {
            if !seen.insert(a.name.clone()) {
                return config_error(format!("axis {} given twice", a.name));
            }
            if self.base.contains_key(&a.name) {
                return config_error(format!("{} is both fixed and an axis", a.name));
            }
            *a = Axis::listed(&a.name, a.values()?);
        }
        if of == Target::Mc && !self.base.contains_key("seed") && !seen.contains("seed") {
            let seed = rand::random::<u64>();
            eprintln!("seed: {seed}");
            self.base.insert("seed".into(), json!(seed));
        }
        self.skip_invalid = Some(self.skip_invalid.unwrap_or(skip));
        Ok(self)
    }
}

/// Merges sweep flags into a config document: `--set` entries extend
/// `base`, `--axis` entries replace same-named axes.
pub fn merge_flags(mut params: Params, args: &SweepArgs) -> Result<Params, CliError> {
    if let Some(p) = &args.preset {
        params.insert("preset".into(), Value::String(p.clone()));
    }
    if let Some(of) = &args.of {
        params.insert("of".into(), Value::String(of.clone()));
    }
    if let Some(cap) = args.row_cap {
        params.insert("row_cap".into(), json!(cap));
    }
    if args.skip_invalid {
        params.insert("skip_invalid".into(), json!(true));
    }
    if !args.set.is_empty() {
        let base = params.entry("base").or_insert_with(|| json!({}));
        let Some(base) = base.as_object_mut() else {
            return config_error("base must be a table");
        };
        for s in &args.set {
            let (k, v) = config::parse_assignment(s)?;
            base.insert(k, v);
        }
    }
    if !args.axis.is_empty() {
        let mut axes: Vec<Axis> = match params.remove("axes") {
            Some(v) => serde_json::from_value(v).map_err(|e| CliError::Config(format!("axes: {e}")))?,
            None => Vec::new(),
        };
        for spec in &args.axis {
            let a = Axis::parse(spec)?;
            match axes.iter_mut().find(|b| b.name == a.name) {
                Some(slot) => *slot = a,
                None => axes.push(a),
            }
        }
        params.insert("axes".into(), serde_json::to_value(axes).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    Ok(params)
}

pub fn execute(params: Params) -> Result<(Value, Table), CliError> {
    let mut params = params;
    config::take_command(&mut params, NAME)?;
    let cfg: SweepConfig = config::parse(NAME, params)?;
    let cfg = cfg.resolve()?;
    let of = cfg.of.expect("resolved");
    let skip = cfg.skip_invalid.expect("resolved");
    let axes: Vec<(String, Vec<Value>)> = cfg
        .axes
        .iter()
        .map(|a| (a.name.clone(), a.values.clone().unwrap_or_default()))
        .collect();

    let points = axes.iter().fold(1u128, |acc, (_, v)| acc * v.len() as u128);
    if points > cfg.row_cap as u128 {
        return config_error(format!("grid has {points} points, above the row cap {}", cfg.row_cap));
    }
    let inner = columns(of);
    let extra: Vec<usize> = (0..axes.len()).filter(|&i| !inner.contains(&axes[i].0.as_str())).collect();
    let mut header: Vec<String> = extra.iter().map(|&i| axes[i].0.clone()).collect();
    header.extend(inner.iter().map(|c| c.to_string()));

    let mut rows = Vec::new();
    let mut index = vec![0usize; axes.len()];
    for _ in 0..points {
        let mut point = cfg.base.clone();
        for (i, (name, values)) in axes.iter().enumerate() {
            point.insert(name.clone(), values[index[i]].clone());
        }
        match run_point(of, point) {
            Ok(out) => {
                for r in out {
                    let mut row: Row = extra.iter().map(|&i| Cell::from_value(&axes[i].1[index[i]])).collect();
                    row.extend(r);
                    rows.push(row);
                }
                if rows.len() as u64 > cfg.row_cap {
                    return config_error(format!("sweep produced more than {} rows", cfg.row_cap));
                }
            }
            Err(CliError::Config(_) | CliError::Infeasible(_)) if skip => {}
            Err(e) => return Err(e),
        }
        // odometer, last axis fastest
        for i in (0..axes.len()).rev() {
            index[i] += 1;
            if index[i] < axes[i].1.len() {
                break;
            }
            index[i] = 0;
        }
    }
    let echo = config::echo(NAME, &cfg)?;
    Ok((echo, Table { columns: header, rows }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_specs() {
        let a = Axis::parse("m=1,2,3").unwrap();
        assert_eq!(a.values().unwrap(), vec![json!(1), json!(2), json!(3)]);
        let a = Axis::parse("target=1e-2:1e-4:3:log").unwrap();
        assert_eq!(a.values().unwrap(), vec![json!(1e-2), json!(1e-3), json!(1e-4)]);
        let a = Axis::parse("f=0.5:0.9:5").unwrap();
        assert_eq!(a.values().unwrap().len(), 5);
        assert!(Axis::parse("m=").unwrap().values().unwrap().is_empty());
        let a = Axis::range("n", 4.0, 64.0, Some(4.0), None, false);
        let v = a.values().unwrap();
        assert_eq!((v.len(), &v[0], &v[15]), (16, &json!(4), &json!(64)));
        assert!(Axis::parse("n").is_err());
    }

    #[test]
    fn gate_grid_is_sorted_and_unique() {
        let g = plateau_gates();
        assert_eq!((g[0], g[1], *g.last().unwrap()), (0, 1, 100_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
