//! YAML experiment documents.
//!
//! Every key is optional; omitted scenario keys take the reference
//! deployment values from [`SystemConfig::default`]. Powers accept a bare
//! number (watts) or a string with a unit (`W`, `mW`, `dBm`, `dBW`);
//! lengths accept a bare number (meters) or `m`, `cm`, `mm`.

use std::path::PathBuf;

use serde_yaml::{Mapping, Value};

use super::Strategy;
use crate::config::{dbm_to_watts, free_space_ref_gain, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    ElementBudget,
    PowerBudget,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::ElementBudget => "element_budget",
            SweepVariable::PowerBudget => "power_budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    /// Strictly increasing, in SI units; whole numbers for element budgets.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: SystemConfig,
    pub sweep: Sweep,
    pub strategies: Vec<Strategy>,
    /// Surface counts compared by the multi-surface strategies.
    pub surfaces: Vec<usize>,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    /// Fill the `wall_ms` column. Off by default so reruns are
    /// byte-identical.
    pub record_timing: bool,
}

#[derive(Clone, Copy)]
pub(crate) enum Unit {
    Count,
    Power,
    Length,
    Gain,
}

/// Parses a bare number or a `"<number> <unit>"` string into SI units.
pub(crate) fn parse_quantity(field: &str, value: &Value, unit: Unit) -> Result<f64> {
    let (number, suffix) = match value {
        Value::Number(n) => (
            n.as_f64()
                .ok_or_else(|| Error::parse(field, "not a number"))?,
            String::new(),
        ),
        Value::String(s) => {
            let s = s.trim();
            let split = s
                .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
                .unwrap_or(s.len());
            let (num, unit) = s.split_at(split);
            let number = num
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(field, format!("cannot read a number from `{s}`")))?;
            (number, unit.trim().to_string())
        }
        _ => {
            return Err(Error::parse(
                field,
                "expected a number or a string with a unit",
            ))
        }
    };
    if !number.is_finite() {
        return Err(Error::parse(field, "value must be finite"));
    }
    let si = match (unit, suffix.as_str()) {
        (Unit::Power, "" | "W") => number,
        (Unit::Power, "mW") => number * 1e-3,
        (Unit::Power, "dBm") => dbm_to_watts(number),
        (Unit::Power, "dBW") => dbm_to_watts(number + 30.0),
        (Unit::Length, "" | "m") => number,
        (Unit::Length, "cm") => number * 1e-2,
        (Unit::Length, "mm") => number * 1e-3,
        (Unit::Gain | Unit::Count, "") => number,
        (Unit::Gain, "dB") => 10f64.powf(number / 10.0),
        (_, other) => {
            let expected = match unit {
                Unit::Power => "W, mW, dBm or dBW",
                Unit::Length => "m, cm or mm",
                Unit::Gain => "dB or a plain ratio",
                Unit::Count => "a plain number",
            };
            return Err(Error::parse(
                field,
                format!("unit `{other}` not allowed here (expected {expected})"),
            ));
        }
    };
    Ok(si)
}

fn parse_count(field: &str, value: &Value) -> Result<usize> {
    value
        .as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::parse(field, "expected a non-negative integer"))
}

fn parse_point(field: &str, value: &Value) -> Result<[f64; 2]> {
    let seq = value
        .as_sequence()
        .filter(|s| s.len() == 2)
        .ok_or_else(|| Error::parse(field, "expected a pair [x, y]"))?;
    Ok([
        parse_quantity(field, &seq[0], Unit::Length)?,
        parse_quantity(field, &seq[1], Unit::Length)?,
    ])
}

fn key_name(key: &Value) -> Result<&str> {
    key.as_str()
        .ok_or_else(|| Error::parse("document", "keys must be strings"))
}

fn parse_sweep(value: &Value) -> Result<(SweepVariable, SweepSource)> {
    let map = value
        .as_mapping()
        .ok_or_else(|| Error::parse("sweep", "expected a mapping"))?;
    let mut variable = None;
    let mut source = None;
    for (key, v) in map {
        let name = key_name(key)?;
        match name {
            "variable" => {
                variable = Some(match v.as_str() {
                    Some("element_budget" | "M") => SweepVariable::ElementBudget,
                    Some("power_budget" | "P") => SweepVariable::PowerBudget,
                    _ => {
                        return Err(Error::parse(
                            "sweep.variable",
                            "expected element_budget or power_budget",
                        ))
                    }
                })
            }
            "values" => {
                let seq = v
                    .as_sequence()
                    .ok_or_else(|| Error::parse("sweep.values", "expected a list"))?;
                source = Some(SweepSource::Values(seq.clone()));
            }
            "range" => source = Some(SweepSource::Range(parse_range(v)?)),
            other => return Err(Error::parse(format!("sweep.{other}"), "unknown key")),
        }
    }
    let variable = variable.ok_or_else(|| Error::parse("sweep.variable", "missing"))?;
    let source = source.ok_or_else(|| Error::parse("sweep", "needs either `values` or `range`"))?;
    Ok((variable, source))
}

enum SweepSource {
    Values(Vec<Value>),
    Range(Range),
}

struct Range {
    start: Value,
    stop: Value,
    points: usize,
    log: bool,
}

fn parse_range(value: &Value) -> Result<Range> {
    let map = value
        .as_mapping()
        .ok_or_else(|| Error::parse("sweep.range", "expected a mapping"))?;
    let mut start = None;
    let mut stop = None;
    let mut points = None;
    let mut log = true;
    for (key, v) in map {
        match key_name(key)? {
            "start" => start = Some(v.clone()),
            "stop" => stop = Some(v.clone()),
            "points" => points = Some(parse_count("sweep.range.points", v)?),
            "scale" => {
                log = match v.as_str() {
                    Some("log") => true,
                    Some("linear") => false,
                    _ => return Err(Error::parse("sweep.range.scale", "expected log or linear")),
                }
            }
            other => return Err(Error::parse(format!("sweep.range.{other}"), "unknown key")),
        }
    }
    Ok(Range {
        start: start.ok_or_else(|| Error::parse("sweep.range.start", "missing"))?,
        stop: stop.ok_or_else(|| Error::parse("sweep.range.stop", "missing"))?,
        points: points.ok_or_else(|| Error::parse("sweep.range.points", "missing"))?,
        log,
    })
}

fn sweep_values(variable: SweepVariable, source: SweepSource) -> Result<Vec<f64>> {
    let unit = match variable {
        SweepVariable::ElementBudget => Unit::Count,
        SweepVariable::PowerBudget => Unit::Power,
    };
    let values: Vec<f64> = match source {
        SweepSource::Values(seq) => {
            let mut out = Vec::with_capacity(seq.len());
            for v in &seq {
                let x = parse_quantity("sweep.values", v, unit)?;
                if variable == SweepVariable::ElementBudget && x.fract() != 0.0 {
                    return Err(Error::parse(
                        "sweep.values",
                        "element budgets must be whole numbers",
                    ));
                }
                out.push(x);
            }
            out
        }
        SweepSource::Range(r) => {
            let start = parse_quantity("sweep.range.start", &r.start, unit)?;
            let stop = parse_quantity("sweep.range.stop", &r.stop, unit)?;
            if r.points == 0 {
                return Err(Error::parse("sweep.range.points", "must be at least 1"));
            }
            if r.log && !(start > 0.0 && stop > 0.0) {
                return Err(Error::parse(
                    "sweep.range",
                    "log spacing needs positive endpoints",
                ));
            }
            let grid: Vec<f64> = if r.points == 1 {
                vec![start]
            } else if r.log {
                crate::analysis::log_grid(start, stop, r.points)
            } else {
                (0..r.points)
                    .map(|i| start + (stop - start) * i as f64 / (r.points - 1) as f64)
                    .collect()
            };
            match variable {
                SweepVariable::ElementBudget => grid.into_iter().map(f64::round).collect(),
                SweepVariable::PowerBudget => grid,
            }
        }
    };
    if values.is_empty() {
        return Err(Error::parse("sweep", "no sample values"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parse(
            "sweep",
            "sample values must be strictly increasing",
        ));
    }
    let in_range = match variable {
        SweepVariable::ElementBudget => values[0] >= 0.0,
        SweepVariable::PowerBudget => values[0] > 0.0,
    };
    if !in_range {
        return Err(Error::parse("sweep", "sample values out of range"));
    }
    Ok(values)
}

/// Parses and validates an experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let doc: Value =
        serde_yaml::from_str(text).map_err(|e| Error::parse("document", e.to_string()))?;
    let empty = Mapping::new();
    let map = match &doc {
        Value::Null => &empty,
        Value::Mapping(m) => m,
        _ => {
            return Err(Error::parse(
                "document",
                "expected a mapping at the top level",
            ))
        }
    };

    let mut cfg = SystemConfig::default();
    let mut tx_spacing = None;
    let mut rx_spacing = None;
    let mut irs_spacing = None;
    let mut ref_gain = None;
    let mut sweep = None;
    let mut strategies = None;
    let mut surfaces = None;
    let mut output_path = None;
    let mut seed = 0;
    let mut record_timing = false;

    for (key, value) in map {
        let name = key_name(key)?;
        match name {
            "K" => cfg.num_surfaces = parse_count(name, value)?,
            "N_t" => cfg.n_tx = parse_count(name, value)?,
            "N_r" => cfg.n_rx = parse_count(name, value)?,
            "M" => cfg.element_budget = parse_count(name, value)?,
            "P" => cfg.power_budget = parse_quantity(name, value, Unit::Power)?,
            "noise" => cfg.noise_power = parse_quantity(name, value, Unit::Power)?,
            "wavelength" => cfg.wavelength = parse_quantity(name, value, Unit::Length)?,
            "tx_spacing" => tx_spacing = Some(parse_quantity(name, value, Unit::Length)?),
            "rx_spacing" => rx_spacing = Some(parse_quantity(name, value, Unit::Length)?),
            "irs_spacing" => irs_spacing = Some(parse_quantity(name, value, Unit::Length)?),
            "tx_pos" => cfg.tx_pos = parse_point(name, value)?,
            "rx_pos" => cfg.rx_pos = parse_point(name, value)?,
            "irs_height" => cfg.irs_height = parse_quantity(name, value, Unit::Length)?,
            "ref_gain" => ref_gain = Some(parse_quantity(name, value, Unit::Gain)?),
            "sweep" => sweep = Some(parse_sweep(value)?),
            "strategies" => {
                let seq = value
                    .as_sequence()
                    .ok_or_else(|| Error::parse(name, "expected a list"))?;
                let mut list = Vec::with_capacity(seq.len());
                for s in seq {
                    let s = s
                        .as_str()
                        .ok_or_else(|| Error::parse(name, "strategy names must be strings"))?;
                    list.push(s.parse::<Strategy>()?);
                }
                strategies = Some(list);
            }
            "surfaces" => {
                let seq = value
                    .as_sequence()
                    .ok_or_else(|| Error::parse(name, "expected a list"))?;
                surfaces = Some(
                    seq.iter()
                        .map(|v| parse_count(name, v))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            "output" => {
                let path = value
                    .as_str()
                    .ok_or_else(|| Error::parse(name, "expected a path"))?;
                output_path = Some(PathBuf::from(path));
            }
            "seed" => {
                seed = value
                    .as_u64()
                    .ok_or_else(|| Error::parse(name, "expected a non-negative integer"))?
            }
            "record_timing" => {
                record_timing = value
                    .as_bool()
                    .ok_or_else(|| Error::parse(name, "expected true or false"))?
            }
            other => return Err(Error::parse(other, "unknown key")),
        }
    }

    let half = cfg.wavelength / 2.0;
    cfg.tx_spacing = tx_spacing.unwrap_or(half);
    cfg.rx_spacing = rx_spacing.unwrap_or(half);
    cfg.irs_spacing = irs_spacing.unwrap_or(half);
    cfg.pathloss_ref_gain = ref_gain.unwrap_or_else(|| free_space_ref_gain(cfg.wavelength));

    let limit = cfg.n_tx.min(cfg.n_rx);
    if cfg.num_surfaces > limit {
        return Err(Error::parse(
            "K",
            format!(
                "{} surfaces exceed min(N_t, N_r) = {limit}",
                cfg.num_surfaces
            ),
        ));
    }
    let surfaces = surfaces.unwrap_or_else(|| vec![cfg.num_surfaces]);
    if surfaces.is_empty() {
        return Err(Error::parse("surfaces", "list is empty"));
    }
    if let Some(&k) = surfaces.iter().find(|&&k| k == 0 || k > limit) {
        return Err(Error::parse(
            "surfaces",
            format!("surface count {k} outside 1..=min(N_t, N_r) = {limit}"),
        ));
    }
    let strategies = strategies.unwrap_or_else(|| vec![Strategy::MultiSca]);
    if strategies.is_empty() {
        return Err(Error::parse("strategies", "list is empty"));
    }
    cfg.validate()
        .map_err(|e| Error::parse("scenario", e.to_string()))?;

    let sweep = match sweep {
        Some((variable, source)) => Sweep {
            variable,
            values: sweep_values(variable, source)?,
        },
        None => Sweep {
            variable: SweepVariable::ElementBudget,
            values: vec![cfg.element_budget as f64],
        },
    };

    Ok(ExperimentSpec {
        scenario: cfg,
        sweep,
        strategies,
        surfaces,
        output_path,
        seed,
        record_timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_reference_values() {
        let spec = parse_config("K: 4").unwrap();
        assert_eq!(spec.scenario, SystemConfig::default());
        assert_eq!(spec.scenario.n_tx, 8);
        assert_eq!(spec.scenario.n_rx, 4);
        assert!((spec.scenario.noise_power - 1e-11).abs() < 1e-24);
        assert_eq!(spec.sweep.values, vec![2400.0]);
        assert_eq!(spec.strategies, vec![Strategy::MultiSca]);
        assert_eq!(spec.surfaces, vec![4]);
    }

    #[test]
    fn power_units() {
        let p = |s: &str| {
            parse_config(&format!("P: {s}"))
                .unwrap()
                .scenario
                .power_budget
        };
        assert!((p("30 dBm") - 1.0).abs() < 1e-15);
        assert!((p("0 dBW") - 1.0).abs() < 1e-15);
        assert!((p("500 mW") - 0.5).abs() < 1e-15);
        assert_eq!(p("2"), 2.0);
        assert_eq!(p("1.5e0 W"), 1.5);
    }

    #[test]
    fn rejects_bad_documents() {
        let field = |text: &str| match parse_config(text) {
            Err(Error::Parse { field, .. }) => field,
            other => panic!("expected a parse error, got {other:?}"),
        };
        assert_eq!(field("K: 6"), "K");
        assert_eq!(field("K: 2\nsurfaces: [1, 5]"), "surfaces");
        assert_eq!(field("bogus: 1"), "bogus");
        assert_eq!(field("P: 30 dBi"), "P");
        assert_eq!(field("wavelength: 3 dBm"), "wavelength");
        assert_eq!(field("sweep: {variable: M, values: [10, 5]}"), "sweep");
        assert_eq!(
            field("sweep: {variable: M, values: [10.5]}"),
            "sweep.values"
        );
        assert_eq!(
            field("sweep: {variable: M, values: [1], extra: 2}"),
            "sweep.extra"
        );
        assert_eq!(field("strategies: [greedy]"), "strategies");
        assert_eq!(field("- 1"), "document");
    }

    #[test]
    fn wavelength_drives_derived_defaults() {
        let spec = parse_config("wavelength: 10 cm").unwrap();
        assert!((spec.scenario.tx_spacing - 0.05).abs() < 1e-15);
        assert!((spec.scenario.pathloss_ref_gain - free_space_ref_gain(0.1)).abs() < 1e-18);
    }

    #[test]
    fn sweep_ranges() {
        let spec = parse_config(
            "sweep:\n  variable: power_budget\n  range: {start: -20 dBm, stop: 50 dBm, points: 8}",
        )
        .unwrap();
        assert_eq!(spec.sweep.values.len(), 8);
        assert!((spec.sweep.values[0] - 1e-5).abs() < 1e-18);
        assert!((spec.sweep.values[7] - 100.0).abs() < 1e-9);

        let spec = parse_config(
            "sweep:\n  variable: element_budget\n  range: {start: 100, stop: 200, points: 3, scale: linear}",
        )
        .unwrap();
        assert_eq!(spec.sweep.values, vec![100.0, 150.0, 200.0]);
    }
}
