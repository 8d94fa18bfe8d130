//! Stochastic equal-energy jumps on the shell and time averages along them.
//!
//! The walk moves in the free-block chart: each step adds a displacement drawn
//! uniformly from the cube `[-step_scale, step_scale]^{N-2}` and re-solves the
//! dependent pair, so every visited state satisfies both shell constraints to
//! rounding. Moves leaving the polytope are rejected; feasible moves are
//! accepted by the Metropolis rule for the chosen measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{compare_distributions, DiscrepancyReport};
use crate::ensemble::{ensemble_mean, interior_start, renormalise, EnsembleMean, MeasureSpec, SamplerConfig};
use crate::error::{Result, ShellError};
use crate::rng::{stream_rng, StreamRng};
use crate::spectrum::{is_member, EnergyShell, OccupationVector};
use crate::stats::BatchMeans;

/// Tolerance for the membership check on a state handed to [`walk_step`].
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    pub steps: usize,
    pub step_scale: f64,
    pub burn_in: usize,
    pub seed: u64,
    pub record_every: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            steps: 1_000_000,
            step_scale: 0.05,
            burn_in: 10_000,
            seed: 42,
            record_every: 10,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(ShellError::InvalidConfig("steps must be at least 1".into()));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(ShellError::InvalidConfig(format!(
                "step_scale must be positive, got {}",
                self.step_scale
            )));
        }
        if self.record_every == 0 {
            return Err(ShellError::InvalidConfig("record_every must be at least 1".into()));
        }
        if self.steps < self.record_every {
            return Err(ShellError::InvalidConfig(format!(
                "steps ({}) must be at least record_every ({})",
                self.steps, self.record_every
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub time_mean: OccupationVector,
    pub std_error: Vec<f64>,
    pub acceptance_ratio: f64,
    pub recorded_points: usize,
}

/// Metropolis walker on the free block of a shell.
pub struct Walker<'a> {
    shell: &'a EnergyShell,
    measure: MeasureSpec,
    step_scale: f64,
    current: Vec<f64>,
    proposal: Vec<f64>,
    log_density: f64,
}

impl<'a> Walker<'a> {
    /// Starts at the free block of `start`, which must be a shell member.
    pub fn new(
        shell: &'a EnergyShell,
        measure: MeasureSpec,
        step_scale: f64,
        start: &OccupationVector,
    ) -> Result<Self> {
        if shell.n_levels() < 3 {
            return Err(ShellError::Unsupported("at least 3 levels for a walk".into()));
        }
        if shell.is_degenerate() {
            return Err(ShellError::DegenerateShell(shell.total_energy()));
        }
        if !is_member(shell, start, STATE_TOL) {
            return Err(ShellError::InfeasiblePoint(format!(
                "walk state {:?} is not on the shell",
                start.as_slice()
            )));
        }
        let current = start.as_slice()[..shell.free_dim()].to_vec();
        let log_density = measure.log_density(&current);
        Ok(Self {
            shell,
            measure,
            step_scale,
            proposal: current.clone(),
            current,
            log_density,
        })
    }

    /// Symmetric displacement uniform on `[-step_scale, step_scale]^{N-2}`.
    pub fn displacement(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.current.len())
            .map(|_| self.step_scale * (2.0 * rng.random::<f64>() - 1.0))
            .collect()
    }

    /// Proposes a move and applies it if feasible and accepted.
    pub fn step(&mut self, rng: &mut StreamRng) -> bool {
        for (p, c) in self.proposal.iter_mut().zip(&self.current) {
            *p = c + self.step_scale * (2.0 * rng.random::<f64>() - 1.0);
        }
        if !self.shell.is_feasible_free(&self.proposal) {
            return false;
        }
        let accept = match self.measure {
            MeasureSpec::FlatOccupation => true,
            MeasureSpec::AmplitudeCoordinate => {
                if self.proposal.iter().any(|f| *f <= 0.0) {
                    return false;
                }
                let proposed = self.measure.log_density(&self.proposal);
                let log_ratio = proposed - self.log_density;
                let ok = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
                if ok {
                    self.log_density = proposed;
                }
                ok
            }
        };
        if accept {
            std::mem::swap(&mut self.current, &mut self.proposal);
        }
        accept
    }

    pub fn free(&self) -> &[f64] {
        &self.current
    }

    pub fn state(&self) -> OccupationVector {
        self.shell
            .complete(&self.current)
            .expect("walker state stays feasible")
    }
}

/// One walk step from `current`; returns the new state and whether the move
/// was accepted (the state is unchanged on rejection).
pub fn walk_step(
    shell: &EnergyShell,
    current: &OccupationVector,
    measure: MeasureSpec,
    config: &WalkConfig,
    rng: &mut StreamRng,
) -> Result<(OccupationVector, bool)> {
    let mut walker = Walker::new(shell, measure, config.step_scale, current)?;
    let accepted = walker.step(rng);
    if accepted {
        Ok((walker.state(), true))
    } else {
        Ok((current.clone(), false))
    }
}

/// Time average along a walk; `on_record(step, state)` sees every recorded point.
pub fn time_average_with<F>(
    shell: &EnergyShell,
    measure: MeasureSpec,
    config: &WalkConfig,
    mut on_record: F,
) -> Result<TrajectoryStats>
where
    F: FnMut(usize, &OccupationVector),
{
    config.validate()?;
    if shell.is_degenerate() {
        return Err(ShellError::DegenerateShell(shell.total_energy()));
    }
    if shell.n_levels() < 3 {
        return Err(ShellError::Unsupported("at least 3 levels for a walk".into()));
    }
    let start = shell.complete(&interior_start(shell)?)?;
    let mut walker = Walker::new(shell, measure, config.step_scale, &start)?;
    let mut rng = stream_rng(config.seed);
    for _ in 0..config.burn_in {
        walker.step(&mut rng);
    }
    let recorded = config.steps / config.record_every;
    let mut acc = BatchMeans::for_total(recorded, shell.n_levels());
    let mut accepted = 0usize;
    for step in 1..=config.steps {
        if walker.step(&mut rng) {
            accepted += 1;
        }
        if step % config.record_every == 0 {
            let state = walker.state();
            acc.push(state.as_slice());
            on_record(step, &state);
        }
    }
    let summary = acc.finish();
    Ok(TrajectoryStats {
        time_mean: renormalise(summary.mean),
        std_error: summary.std_error,
        acceptance_ratio: accepted as f64 / config.steps as f64,
        recorded_points: summary.count,
    })
}

pub fn time_average(
    shell: &EnergyShell,
    measure: MeasureSpec,
    config: &WalkConfig,
) -> Result<TrajectoryStats> {
    time_average_with(shell, measure, config, |_, _| {})
}

/// Time average and ensemble average of the same shell, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityCheck {
    pub trajectory: TrajectoryStats,
    pub ensemble: EnsembleMean,
    /// Time mean measured against the ensemble mean.
    pub discrepancy: DiscrepancyReport,
    /// `sqrt(se_time^2 + se_ensemble^2)` per component.
    pub combined_std_error: Vec<f64>,
    /// Largest `|time - ensemble| / combined_std_error`.
    pub max_z: f64,
    /// Every component agrees within [`ERGODICITY_SIGMAS`] combined standard errors.
    pub consistent: bool,
}

pub const ERGODICITY_SIGMAS: f64 = 3.0;

pub fn ergodicity_check(
    shell: &EnergyShell,
    measure: MeasureSpec,
    walk: &WalkConfig,
    sampler: &SamplerConfig,
) -> Result<ErgodicityCheck> {
    if shell.is_degenerate() {
        return Err(ShellError::DegenerateShell(shell.total_energy()));
    }
    let trajectory = time_average(shell, measure, walk)?;
    let ensemble = ensemble_mean(shell, measure, sampler)?;
    let t = trajectory.time_mean.as_slice();
    let e = ensemble.mean.as_slice();
    let discrepancy = compare_distributions(t, e)?;
    let combined_std_error: Vec<f64> = trajectory
        .std_error
        .iter()
        .zip(&ensemble.std_error)
        .map(|(a, b)| a.hypot(*b))
        .collect();
    let max_z = t
        .iter()
        .zip(e)
        .zip(&combined_std_error)
        .map(|((a, b), s)| {
            let d = (a - b).abs();
            if d == 0.0 {
                0.0
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max);
    Ok(ErgodicityCheck {
        consistent: max_z < ERGODICITY_SIGMAS,
        trajectory,
        ensemble,
        discrepancy,
        combined_std_error,
        max_z,
    })
}
