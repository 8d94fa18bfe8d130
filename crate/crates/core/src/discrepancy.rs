//! Microcanonical-versus-canonical comparison, energy sweeps and the
//! level-count scaling study.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{fit_beta, CanonicalFit, DEFAULT_FIT_TOL};
use crate::ensemble::{ensemble_mean, EnsembleMean, MeasureSpec, SamplerConfig};
use crate::error::{Result, ShellError};
use crate::rng::{derive_seed, stream_rng};
use crate::spectrum::{EnergyShell, EnergySpectrum};
use crate::stats::median;

/// Distances of a microcanonical mean from a reference distribution.
///
/// `rel_diff` and `kl_divergence` are directional: the microcanonical side is
/// measured against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub abs_diff: Vec<f64>,
    pub rel_diff: Vec<f64>,
    pub max_rel_diff: f64,
    pub total_variation: f64,
    /// Nats, with `0 ln 0 = 0`.
    pub kl_divergence: f64,
}

pub fn compare_distributions(micro: &[f64], reference: &[f64]) -> Result<DiscrepancyReport> {
    if micro.len() != reference.len() {
        return Err(ShellError::LengthMismatch {
            expected: reference.len(),
            got: micro.len(),
        });
    }
    if let Some(r) = reference.iter().find(|r| !(**r > 0.0)) {
        return Err(ShellError::Unsupported(format!(
            "a strictly positive reference distribution (found {r})"
        )));
    }
    let abs_diff: Vec<f64> = micro.iter().zip(reference).map(|(m, r)| (m - r).abs()).collect();
    let rel_diff: Vec<f64> = abs_diff.iter().zip(reference).map(|(d, r)| d / r).collect();
    let max_rel_diff = rel_diff.iter().copied().fold(0.0, f64::max);
    let total_variation = (0.5 * abs_diff.iter().sum::<f64>()).min(1.0);
    let kl_divergence = micro
        .iter()
        .zip(reference)
        .filter(|(m, _)| **m > 0.0)
        .map(|(m, r)| m * (m / r).ln())
        .sum::<f64>()
        .max(0.0);
    Ok(DiscrepancyReport {
        abs_diff,
        rel_diff,
        max_rel_diff,
        total_variation,
        kl_divergence,
    })
}

pub fn compare(micro: &EnsembleMean, fit: &CanonicalFit) -> Result<DiscrepancyReport> {
    compare_distributions(micro.mean.as_slice(), &fit.probabilities)
}

/// One energy of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SweepRow {
    Ok {
        energy: f64,
        ensemble: EnsembleMean,
        fit: CanonicalFit,
        discrepancy: DiscrepancyReport,
    },
    Infeasible {
        energy: f64,
        reason: String,
    },
}

impl SweepRow {
    pub fn energy(&self) -> f64 {
        match self {
            SweepRow::Ok { energy, .. } | SweepRow::Infeasible { energy, .. } => *energy,
        }
    }
}

/// Mean, canonical fit and discrepancy for one shell.
pub fn analyze_shell(
    shell: &EnergyShell,
    measure: MeasureSpec,
    sampler: &SamplerConfig,
    fit_tol: f64,
) -> Result<(EnsembleMean, CanonicalFit, DiscrepancyReport)> {
    let ensemble = ensemble_mean(shell, measure, sampler)?;
    let fit = fit_beta(shell, fit_tol)?;
    let discrepancy = compare(&ensemble, &fit)?;
    Ok((ensemble, fit, discrepancy))
}

/// Runs [`analyze_shell`] for each energy, in input order.
///
/// Every row uses `sampler` unchanged, so a row is identical to a single-shell
/// analysis at that energy. Energies outside the open spectrum range, and rows
/// whose pipeline fails, are reported as infeasible without stopping the sweep.
pub fn energy_sweep(
    spectrum: &EnergySpectrum,
    energies: &[f64],
    measure: MeasureSpec,
    sampler: &SamplerConfig,
    fit_tol: f64,
) -> Vec<SweepRow> {
    let (lo, hi) = spectrum.bounds();
    energies
        .par_iter()
        .map(|&energy| {
            if !(energy > lo && energy < hi) {
                return SweepRow::Infeasible {
                    energy,
                    reason: format!("energy outside open range ({lo}, {hi})"),
                };
            }
            let run = EnergyShell::new(spectrum.clone(), energy)
                .and_then(|shell| analyze_shell(&shell, measure, sampler, fit_tol));
            match run {
                Ok((ensemble, fit, discrepancy)) => SweepRow::Ok {
                    energy,
                    ensemble,
                    fit,
                    discrepancy,
                },
                Err(e) => SweepRow::Infeasible {
                    energy,
                    reason: e.to_string(),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudyRow {
    pub n_levels: usize,
    pub trial: usize,
    pub spectrum_seed: u64,
    pub energy_quantile: f64,
    pub max_rel_diff: f64,
    pub total_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub energy_quantile: f64,
    pub measure: MeasureSpec,
    pub sampler: SamplerConfig,
    pub seed: u64,
}

impl ScalingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 3 || self.n_min > self.n_max {
            return Err(ShellError::InvalidConfig(format!(
                "need 3 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.trials == 0 {
            return Err(ShellError::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.energy_quantile > 0.0 && self.energy_quantile < 1.0) {
            return Err(ShellError::InvalidConfig(format!(
                "energy quantile must lie in (0, 1), got {}",
                self.energy_quantile
            )));
        }
        self.sampler.validate()
    }
}

/// Span of generated spectra.
pub const SCALING_SPAN: f64 = 10.0;

/// `n` uniform draws, sorted and rescaled so the lowest is 0 and the highest
/// is [`SCALING_SPAN`].
pub fn random_spectrum(n: usize, seed: u64) -> Result<EnergySpectrum> {
    let mut rng = stream_rng(seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    let (lo, hi) = (u[0], u[n - 1]);
    let levels = u
        .iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => 0.0,
            i if i == n - 1 => SCALING_SPAN,
            _ => (x - lo) / (hi - lo) * SCALING_SPAN,
        })
        .collect();
    EnergySpectrum::new(levels)
}

pub fn level_scaling_study(params: &ScalingParams) -> Result<Vec<ScalingStudyRow>> {
    level_scaling_study_with(params, random_spectrum)
}

/// Scaling study with a caller-supplied spectrum generator `(n, seed) -> spectrum`.
pub fn level_scaling_study_with<F>(params: &ScalingParams, spectra: F) -> Result<Vec<ScalingStudyRow>>
where
    F: Fn(usize, u64) -> Result<EnergySpectrum> + Sync,
{
    params.validate()?;
    let cells: Vec<(usize, usize)> = (params.n_min..=params.n_max)
        .flat_map(|n| (0..params.trials).map(move |t| (n, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(n, trial)| {
            let spectrum_seed = derive_seed(derive_seed(params.seed, n as u64), trial as u64);
            let spectrum = spectra(n, spectrum_seed)?;
            let (lo, hi) = spectrum.bounds();
            let energy = lo + params.energy_quantile * (hi - lo);
            let shell = EnergyShell::new(spectrum, energy)?;
            let sampler = SamplerConfig {
                seed: derive_seed(spectrum_seed, 1),
                ..params.sampler.clone()
            };
            let (_, _, d) = analyze_shell(&shell, params.measure, &sampler, DEFAULT_FIT_TOL)?;
            Ok(ScalingStudyRow {
                n_levels: n,
                trial,
                spectrum_seed,
                energy_quantile: params.energy_quantile,
                max_rel_diff: d.max_rel_diff,
                total_variation: d.total_variation,
            })
        })
        .collect()
}

/// Median discrepancy per level count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    /// `(n_levels, median max_rel_diff, median total_variation)`, ascending in `n_levels`.
    pub medians: Vec<(usize, f64, f64)>,
    /// Median `max_rel_diff` never increases from one level count to the next.
    pub monotone_non_increasing: bool,
    /// Median `max_rel_diff` at the largest level count is at most that at the smallest.
    pub endpoint_non_increasing: bool,
}

pub fn summarize_scaling(rows: &[ScalingStudyRow]) -> ScalingSummary {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n_levels).collect();
    ns.sort_unstable();
    ns.dedup();
    let medians: Vec<(usize, f64, f64)> = ns
        .iter()
        .map(|&n| {
            let sel: Vec<&ScalingStudyRow> = rows.iter().filter(|r| r.n_levels == n).collect();
            let rel: Vec<f64> = sel.iter().map(|r| r.max_rel_diff).collect();
            let tv: Vec<f64> = sel.iter().map(|r| r.total_variation).collect();
            (n, median(&rel), median(&tv))
        })
        .collect();
    let monotone_non_increasing = medians.windows(2).all(|w| w[1].1 <= w[0].1);
    let endpoint_non_increasing = match (medians.first(), medians.last()) {
        (Some(a), Some(b)) => b.1 <= a.1,
        _ => true,
    };
    ScalingSummary {
        medians,
        monotone_non_increasing,
        endpoint_non_increasing,
    }
}
