//! Subcommand implementations. Each returns data; rendering is separate so
//! tests can inspect results without parsing text.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shellstat_core::{
    analyze_shell, energy_sweep, ergodicity_check, level_scaling_study, summarize_scaling,
    time_average_with, EnergyShell, ScalingStudyRow, ScalingSummary, SweepRow,
};

use crate::config::{OutputFormat, RunConfig};
use crate::format::fmt_num;
use crate::report::{
    csv_writer, finish_csv, join, sweep_fields, sweep_header, CanonicalBlock,
    InputEcho, Provenance, ReportDocument, WalkBlock, TOOL_NAME, TOOL_VERSION,
};
use crate::CliError;

fn base_document(config: &RunConfig, shell: &EnergyShell, command: &str) -> (String, InputEcho) {
    (
        command.to_string(),
        InputEcho {
            levels: shell.levels().to_vec(),
            total_energy: shell.total_energy(),
            measure: config.measure,
        },
    )
}

/// Ensemble mean, canonical fit and their discrepancy for one shell.
pub fn cmd_analyze(config: &RunConfig) -> Result<ReportDocument, CliError> {
    config.validate()?;
    let shell = config.shell()?;
    let (ensemble, fit, discrepancy) =
        analyze_shell(&shell, config.measure, &config.sampler, config.tolerances.fit_tol)?;
    let (command, input) = base_document(config, &shell, "analyze");
    Ok(ReportDocument {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command,
        input,
        provenance: Provenance {
            seed: config.sampler.seed,
            measure: config.measure,
            sampler: config.sampler.clone(),
            samples_used: ensemble.samples_used,
            exact: ensemble.exact,
            walk_seed: None,
            walk_steps: None,
        },
        ensemble,
        canonical: Some(CanonicalBlock {
            negative_beta: fit.beta < 0.0,
            fit,
        }),
        discrepancy: Some(discrepancy),
        walk: None,
    })
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    config.validate()?;
    let spectrum = config.spectrum()?;
    Ok(energy_sweep(
        &spectrum,
        &config.energies,
        config.measure,
        &config.sampler,
        config.tolerances.fit_tol,
    ))
}

pub fn render_sweep(n_levels: usize, rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialise");
            s.push('\n');
            s
        }
        OutputFormat::Csv => sweep_csv(n_levels, rows),
        OutputFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "{:>14} {:>14} {:>14} {:>14}  status", "energy", "beta", "max_rel_diff", "total_var");
            for r in rows {
                match r {
                    SweepRow::Ok {
                        energy,
                        fit,
                        discrepancy,
                        ..
                    } => {
                        let _ = writeln!(
                            s,
                            "{:>14} {:>14} {:>14} {:>14}  ok",
                            fmt_num(*energy),
                            fmt_num(fit.beta),
                            fmt_num(discrepancy.max_rel_diff),
                            fmt_num(discrepancy.total_variation)
                        );
                    }
                    SweepRow::Infeasible { energy, reason } => {
                        let _ = writeln!(s, "{:>14} {:>14} {:>14} {:>14}  infeasible: {reason}", fmt_num(*energy), "-", "-", "-");
                    }
                }
            }
            s
        }
    }
}

/// Header row plus one row per energy; infeasible rows keep the energy and
/// status and leave the numeric fields empty.
pub fn sweep_csv(n_levels: usize, rows: &[SweepRow]) -> String {
    let header = sweep_header(n_levels);
    let width = header.len();
    let mut w = csv_writer();
    w.write_record(&header).unwrap();
    for r in rows {
        match r {
            SweepRow::Ok {
                energy,
                ensemble,
                fit,
                discrepancy,
            } => w.write_record(sweep_fields(*energy, ensemble, fit, discrepancy)).unwrap(),
            SweepRow::Infeasible { energy, .. } => {
                let mut rec = vec![String::new(); width];
                rec[0] = fmt_num(*energy);
                rec[width - 1] = "infeasible".into();
                w.write_record(&rec).unwrap();
            }
        }
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingOutput {
    pub rows: Vec<ScalingStudyRow>,
    pub summary: ScalingSummary,
}

pub fn cmd_scaling(config: &RunConfig) -> Result<ScalingOutput, CliError> {
    config.validate()?;
    let params = config.scaling_params();
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let rows = level_scaling_study(&params)?;
    let summary = summarize_scaling(&rows);
    Ok(ScalingOutput { rows, summary })
}

pub fn render_scaling(out: &ScalingOutput, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(out).expect("scaling output serialises");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(["n_levels", "trial", "spectrum_seed", "energy_quantile", "max_rel_diff", "total_variation"])
                .unwrap();
            for r in &out.rows {
                w.write_record([
                    r.n_levels.to_string(),
                    r.trial.to_string(),
                    r.spectrum_seed.to_string(),
                    fmt_num(r.energy_quantile),
                    fmt_num(r.max_rel_diff),
                    fmt_num(r.total_variation),
                ])
                .unwrap();
            }
            let mut s = finish_csv(w);
            s.push_str(&scaling_footer(&out.summary));
            s
        }
        OutputFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "{:>8} {:>20} {:>20}", "n_levels", "median max_rel_diff", "median total_var");
            for (n, rel, tv) in &out.summary.medians {
                let _ = writeln!(s, "{:>8} {:>20} {:>20}", n, fmt_num(*rel), fmt_num(*tv));
            }
            s.push_str(&scaling_footer(&out.summary));
            s
        }
    }
}

/// Summary lines appended after the CSV rows, each starting with `#`.
pub fn scaling_footer(summary: &ScalingSummary) -> String {
    let mut s = String::new();
    for (n, rel, tv) in &summary.medians {
        let _ = writeln!(
            s,
            "# median n_levels={n} max_rel_diff={} total_variation={}",
            fmt_num(*rel),
            fmt_num(*tv)
        );
    }
    let _ = writeln!(
        s,
        "# trend monotone_non_increasing={} endpoint_non_increasing={}",
        summary.monotone_non_increasing, summary.endpoint_non_increasing
    );
    s
}

/// Time average along a walk compared with the ensemble mean.
///
/// When `trace` is given, every recorded state is written there as CSV
/// `step, p_1..p_N`.
pub fn cmd_walk(config: &RunConfig, trace: Option<&Path>) -> Result<ReportDocument, CliError> {
    config.validate()?;
    config.walk.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let shell = config.shell()?;
    if shell.is_degenerate() {
        return Err(shellstat_core::ShellError::DegenerateShell(shell.total_energy()).into());
    }
    let check = ergodicity_check(&shell, config.measure, &config.walk, &config.sampler)?;
    if let Some(path) = trace {
        write_trace(&shell, config, path)?;
    }
    let (command, input) = base_document(config, &shell, "walk");
    Ok(ReportDocument {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command,
        input,
        provenance: Provenance {
            seed: config.sampler.seed,
            measure: config.measure,
            sampler: config.sampler.clone(),
            samples_used: check.ensemble.samples_used,
            exact: check.ensemble.exact,
            walk_seed: Some(config.walk.seed),
            walk_steps: Some(config.walk.steps),
        },
        ensemble: check.ensemble,
        canonical: None,
        discrepancy: None,
        walk: Some(WalkBlock {
            config: config.walk.clone(),
            trajectory: check.trajectory,
            combined_std_error: check.combined_std_error,
            max_z: check.max_z,
            consistent: check.consistent,
            discrepancy: check.discrepancy,
        }),
    })
}

fn write_trace(shell: &EnergyShell, config: &RunConfig, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut out = std::io::BufWriter::new(file);
    let n = shell.n_levels();
    let header: Vec<String> = std::iter::once("step".to_string())
        .chain((1..=n).map(|i| format!("p_{i}")))
        .collect();
    let mut io_err = None;
    let _ = writeln!(out, "{}", header.join(","));
    time_average_with(shell, config.measure, &config.walk, |step, p| {
        if io_err.is_none() {
            if let Err(e) = writeln!(out, "{step},{}", join(p.as_slice()).replace(", ", ",")) {
                io_err = Some(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(CliError::Io(e.to_string()));
    }
    out.flush().map_err(|e| CliError::Io(e.to_string()))
}
