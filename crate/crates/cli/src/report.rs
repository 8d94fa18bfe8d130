//! Report document emitted by `analyze` and `walk`, and its renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use shellstat_core::{
    CanonicalFit, DiscrepancyReport, EnsembleMean, MeasureSpec, SamplerConfig, TrajectoryStats,
    WalkConfig,
};

use crate::config::OutputFormat;
use crate::format::fmt_num;
use crate::CliError;

pub const TOOL_NAME: &str = "shellstat";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEcho {
    pub levels: Vec<f64>,
    pub total_energy: f64,
    pub measure: MeasureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalBlock {
    pub fit: CanonicalFit,
    /// Set when the energy lies above the mean level (population inversion).
    pub negative_beta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkBlock {
    pub config: WalkConfig,
    pub trajectory: TrajectoryStats,
    pub combined_std_error: Vec<f64>,
    pub max_z: f64,
    pub consistent: bool,
    /// Time mean measured against the ensemble mean.
    pub discrepancy: DiscrepancyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub measure: MeasureSpec,
    pub sampler: SamplerConfig,
    pub samples_used: usize,
    pub exact: bool,
    pub walk_seed: Option<u64>,
    pub walk_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: InputEcho,
    pub ensemble: EnsembleMean,
    pub canonical: Option<CanonicalBlock>,
    pub discrepancy: Option<DiscrepancyReport>,
    pub walk: Option<WalkBlock>,
    pub provenance: Provenance,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("report: {e}")))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = self.to_json();
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Table => self.to_table(),
        }
    }

    fn to_csv(&self) -> String {
        let n = self.input.levels.len();
        if let Some(walk) = &self.walk {
            let mut w = csv_writer();
            w.write_record(["level", "energy", "time_mean", "time_std_error", "ensemble_mean", "ensemble_std_error", "abs_diff"])
                .unwrap();
            for i in 0..n {
                w.write_record([
                    (i + 1).to_string(),
                    fmt_num(self.input.levels[i]),
                    fmt_num(walk.trajectory.time_mean[i]),
                    fmt_num(walk.trajectory.std_error[i]),
                    fmt_num(self.ensemble.mean[i]),
                    fmt_num(self.ensemble.std_error[i]),
                    fmt_num(walk.discrepancy.abs_diff[i]),
                ])
                .unwrap();
            }
            return finish_csv(w);
        }
        let mut w = csv_writer();
        w.write_record(sweep_header(n)).unwrap();
        let (Some(c), Some(d)) = (&self.canonical, &self.discrepancy) else {
            return finish_csv(w);
        };
        w.write_record(sweep_fields(self.input.total_energy, &self.ensemble, &c.fit, d))
            .unwrap();
        finish_csv(w)
    }

    fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        let _ = writeln!(s, "levels        {}", join(&self.input.levels));
        let _ = writeln!(s, "total energy  {}", fmt_num(self.input.total_energy));
        let _ = writeln!(
            s,
            "measure       {} ({})",
            self.input.measure,
            if self.ensemble.exact {
                "closed form".to_string()
            } else {
                format!("{} samples, seed {}", self.ensemble.samples_used, self.provenance.seed)
            }
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>5} {:>14} {:>17} {:>17} {:>17}", "level", "energy", "micro mean", "micro std err", "canonical P");
        for i in 0..self.input.levels.len() {
            let canon = self
                .canonical
                .as_ref()
                .map(|c| fmt_num(c.fit.probabilities[i]))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:>5} {:>14} {:>17} {:>17} {:>17}",
                i + 1,
                fmt_num(self.input.levels[i]),
                fmt_num(self.ensemble.mean[i]),
                fmt_num(self.ensemble.std_error[i]),
                canon
            );
        }
        if let Some(c) = &self.canonical {
            let _ = writeln!(s);
            let _ = writeln!(s, "beta          {}{}", fmt_num(c.fit.beta), if c.negative_beta { "  (negative: energy above mean level)" } else { "" });
            let _ = writeln!(s, "ln Z          {}", fmt_num(c.fit.log_partition));
            let _ = writeln!(s, "fit residual  {}", fmt_num(c.fit.residual));
        }
        if let Some(d) = &self.discrepancy {
            let _ = writeln!(s);
            write_discrepancy(&mut s, d);
        }
        if let Some(w) = &self.walk {
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "walk          {} steps, step scale {}, seed {}, acceptance {}",
                w.config.steps,
                fmt_num(w.config.step_scale),
                w.config.seed,
                fmt_num(w.trajectory.acceptance_ratio)
            );
            let _ = writeln!(s, "{:>5} {:>17} {:>17} {:>17}", "level", "time mean", "time std err", "ensemble mean");
            for i in 0..self.input.levels.len() {
                let _ = writeln!(
                    s,
                    "{:>5} {:>17} {:>17} {:>17}",
                    i + 1,
                    fmt_num(w.trajectory.time_mean[i]),
                    fmt_num(w.trajectory.std_error[i]),
                    fmt_num(self.ensemble.mean[i])
                );
            }
            let _ = writeln!(s, "max z         {}", fmt_num(w.max_z));
            let _ = writeln!(s, "ergodicity    {}", if w.consistent { "PASS" } else { "FAIL" });
        }
        s
    }
}

pub(crate) fn write_discrepancy(s: &mut String, d: &DiscrepancyReport) {
    let _ = writeln!(s, "max rel diff  {}", fmt_num(d.max_rel_diff));
    let _ = writeln!(s, "total var     {}", fmt_num(d.total_variation));
    let _ = writeln!(s, "KL (nats)     {}", fmt_num(d.kl_divergence));
}

pub(crate) fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

/// `energy, p_mean_1..N, beta, P_1..N, max_rel_diff, total_variation, kl, status`.
pub fn sweep_header(n: usize) -> Vec<String> {
    let mut h = vec!["energy".to_string()];
    h.extend((1..=n).map(|i| format!("p_mean_{i}")));
    h.push("beta".into());
    h.extend((1..=n).map(|i| format!("P_{i}")));
    h.extend(["max_rel_diff", "total_variation", "kl", "status"].map(String::from));
    h
}

pub fn sweep_fields(
    energy: f64,
    ensemble: &EnsembleMean,
    fit: &CanonicalFit,
    d: &DiscrepancyReport,
) -> Vec<String> {
    let mut r = vec![fmt_num(energy)];
    r.extend(ensemble.mean.as_slice().iter().map(|x| fmt_num(*x)));
    r.push(fmt_num(fit.beta));
    r.extend(fit.probabilities.iter().map(|x| fmt_num(*x)));
    r.push(fmt_num(d.max_rel_diff));
    r.push(fmt_num(d.total_variation));
    r.push(fmt_num(d.kl_divergence));
    r.push("ok".into());
    r
}
