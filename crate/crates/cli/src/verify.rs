//! Reproduction check for the two worked three-level cases
//! (levels 0, 5, 8 at total energy 2 and 3).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use shellstat_core::{MeasureSpec, SamplerConfig};

use crate::commands::cmd_analyze;
use crate::config::{OutputFormat, RunConfig};
use crate::format::fmt_num;
use crate::report::{csv_writer, finish_csv};
use crate::CliError;

pub const REFERENCE_LEVELS: [f64; 3] = [0.0, 5.0, 8.0];

/// Tolerances applied by `verify-paper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    pub mean: f64,
    pub beta: f64,
    pub probability: f64,
    pub residual: f64,
    pub max_rel_diff: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            mean: 1e-3,
            beta: 2e-3,
            probability: 3e-3,
            residual: 1e-10,
            max_rel_diff: 0.10,
        }
    }
}

/// Published values for one energy.
struct Case {
    energy: f64,
    mean: [f64; 3],
    beta: f64,
    probabilities: [f64; 3],
}

const CASES: [Case; 2] = [
    Case {
        energy: 2.0,
        mean: [0.674, 0.204, 0.123],
        beta: 0.223,
        probabilities: [0.669, 0.2192, 0.1122],
    },
    Case {
        energy: 3.0,
        mean: [0.508, 0.3111, 0.1805],
        beta: 0.1199,
        probabilities: [0.5175, 0.2842, 0.1983],
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|computed - reference| <= tolerance`.
    Within,
    /// `computed < tolerance`; the reference column repeats the bound.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub energy: f64,
    pub quantity: String,
    pub reference: f64,
    pub computed: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tolerances: VerifyTolerances,
    pub rows: Vec<VerifyRow>,
    pub all_pass: bool,
}

fn within(energy: f64, quantity: String, reference: f64, computed: f64, tol: f64) -> VerifyRow {
    let abs_diff = (computed - reference).abs();
    VerifyRow {
        energy,
        quantity,
        reference,
        computed,
        abs_diff,
        tolerance: tol,
        kind: CheckKind::Within,
        pass: abs_diff <= tol,
    }
}

fn below(energy: f64, quantity: &str, computed: f64, bound: f64) -> VerifyRow {
    VerifyRow {
        energy,
        quantity: quantity.into(),
        reference: bound,
        computed,
        abs_diff: computed.abs(),
        tolerance: bound,
        kind: CheckKind::Below,
        pass: computed.abs() < bound,
    }
}

pub fn cmd_verify_paper(tol: &VerifyTolerances) -> Result<VerifyReport, CliError> {
    let mut rows = Vec::new();
    for case in &CASES {
        let config = RunConfig {
            levels: REFERENCE_LEVELS.to_vec(),
            total_energy: Some(case.energy),
            measure: MeasureSpec::AmplitudeCoordinate,
            sampler: SamplerConfig::default(),
            ..RunConfig::default()
        };
        let doc = cmd_analyze(&config)?;
        let e = case.energy;
        for i in 0..3 {
            rows.push(within(e, format!("micro mean p_{}", i + 1), case.mean[i], doc.ensemble.mean[i], tol.mean));
        }
        let canon = doc.canonical.as_ref().expect("analyze fills canonical block");
        rows.push(within(e, "beta".into(), case.beta, canon.fit.beta, tol.beta));
        rows.push(below(e, "fit residual", canon.fit.residual, tol.residual));
        for i in 0..3 {
            rows.push(within(
                e,
                format!("canonical P_{}", i + 1),
                case.probabilities[i],
                canon.fit.probabilities[i],
                tol.probability,
            ));
        }
        let d = doc.discrepancy.as_ref().expect("analyze fills discrepancy block");
        rows.push(below(e, "max rel diff", d.max_rel_diff, tol.max_rel_diff));
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(VerifyReport {
        tolerances: tol.clone(),
        rows,
        all_pass,
    })
}

pub fn render_verify(report: &VerifyReport, format: OutputFormat) -> String {
    let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("verify report serialises");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(["energy", "quantity", "reference", "computed", "abs_diff", "tolerance", "verdict"])
                .unwrap();
            for r in &report.rows {
                w.write_record([
                    fmt_num(r.energy),
                    r.quantity.clone(),
                    fmt_num(r.reference),
                    fmt_num(r.computed),
                    fmt_num(r.abs_diff),
                    fmt_num(r.tolerance),
                    verdict(r.pass).into(),
                ])
                .unwrap();
            }
            finish_csv(w)
        }
        OutputFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:>6}  {:<18} {:>14} {:>14} {:>14} {:>14}  verdict",
                "E", "quantity", "reference", "computed", "|diff|", "tolerance"
            );
            for r in &report.rows {
                let reference = match r.kind {
                    CheckKind::Within => fmt_num(r.reference),
                    CheckKind::Below => format!("< {}", fmt_num(r.reference)),
                };
                let _ = writeln!(
                    s,
                    "{:>6}  {:<18} {:>14} {:>14} {:>14} {:>14}  {}",
                    fmt_num(r.energy),
                    r.quantity,
                    reference,
                    fmt_num(r.computed),
                    fmt_num(r.abs_diff),
                    fmt_num(r.tolerance),
                    verdict(r.pass)
                );
            }
            let _ = writeln!(s, "overall: {}", verdict(report.all_pass));
            s
        }
    }
}
