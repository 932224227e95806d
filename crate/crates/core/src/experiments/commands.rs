//! Text reports behind the command-line subcommands. Each returns the full
//! output so that callers decide where it goes.

use std::fmt::Write;

use super::{evaluate, format_real, ExperimentSpec, Strategy};
use crate::allocation::{
    brute_force_oracle, sca_optimize_multistart, AllocationSolution, ChannelQuality, ScaOptions,
};
use crate::analysis::check_propositions;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::placement::{enumerate_candidates, greedy_select, place};

fn reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_real(v))
        .collect::<Vec<_>>()
        .join(";")
}

fn counts(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Every candidate placement as CSV, with the greedy pick order (from 1)
/// in the `selected` column.
pub fn place_report(config: &SystemConfig) -> Result<String> {
    config.validate()?;
    let candidates = enumerate_candidates(config)?;
    let placement = greedy_select(&candidates, config.num_surfaces)?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer
        .write_record([
            "index",
            "aod_index",
            "aoa_index",
            "aod_phase",
            "aoa_phase",
            "x",
            "y",
            "dist_tx",
            "dist_rx",
            "gain",
            "selected",
        ])
        .map_err(io)?;
    for (i, c) in candidates.iter().enumerate() {
        let rank = placement
            .selection_order
            .iter()
            .position(|&s| s == i)
            .map(|r| (r + 1).to_string())
            .unwrap_or_default();
        writer
            .write_record([
                i.to_string(),
                c.aod_index.to_string(),
                c.aoa_index.to_string(),
                format_real(c.aod_phase),
                format_real(c.aoa_phase),
                format_real(c.position[0]),
                format_real(c.position[1]),
                format_real(c.dist_tx),
                format_real(c.dist_rx),
                format_real(c.gain),
                rank,
            ])
            .map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 strings"))
}

fn solution_block(out: &mut String, label: &str, chi: &ChannelQuality, sol: &AllocationSolution) {
    let _ = writeln!(out, "[{label}]");
    let _ = writeln!(out, "chi: {}", reals(&chi.chi));
    let _ = writeln!(out, "elements: {}", counts(&sol.elements));
    let _ = writeln!(out, "powers: {}", reals(&sol.powers));
    let _ = writeln!(out, "se_bits: {}", format_real(sol.se));
    let _ = writeln!(out, "relaxed_elements: {}", reals(&sol.relaxed_elements));
    let _ = writeln!(out, "relaxed_powers: {}", reals(&sol.relaxed_powers));
    let _ = writeln!(out, "relaxed_se_bits: {}", format_real(sol.relaxed_se));
    let _ = writeln!(out, "sca_iters: {}", sol.iterations);
    let _ = writeln!(out, "trace: {}", reals(&sol.trace));
}

/// Allocation of every listed strategy on the spec's scenario.
pub fn optimize_report(spec: &ExperimentSpec) -> Result<String> {
    let mut out = String::new();
    for &strategy in &spec.strategies {
        let outcome = evaluate(&spec.scenario, strategy)?;
        let k = outcome.placement.len();
        solution_block(
            &mut out,
            &format!("{strategy} K={k}"),
            &outcome.chi,
            &outcome.allocation,
        );
        let _ = writeln!(out, "erank: {}", format_real(outcome.erank));
        let _ = writeln!(out, "singular_values: {}", reals(&outcome.singular_values));
        out.push('\n');
    }
    Ok(out)
}

/// Exhaustive split on the placed surfaces, next to the SCA result.
pub fn oracle_report(config: &SystemConfig) -> Result<String> {
    config.validate()?;
    let placement = place(config)?;
    let chi = ChannelQuality::from_placement(&placement, config.noise_power);
    let oracle = brute_force_oracle(&chi, config)?;
    let sca = sca_optimize_multistart(&chi, config, &ScaOptions::default())?;
    let mut out = String::new();
    solution_block(&mut out, "oracle", &chi, &oracle);
    out.push('\n');
    solution_block(&mut out, &Strategy::MultiSca.to_string(), &chi, &sca);
    out.push('\n');
    let _ = writeln!(out, "sca_over_oracle: {}", format_real(sca.se / oracle.se));
    Ok(out)
}

/// One `PASS`/`FAIL` line per check, and whether all passed.
pub fn check_props_report(config: &SystemConfig) -> Result<(String, bool)> {
    let checks = check_propositions(config)?;
    let mut out = String::new();
    for c in &checks {
        let _ = writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok((out, checks.iter().all(|c| c.passed)))
}
