//! Measures on the energy shell and microcanonical averages.
//!
//! Two measures are supported, both expressed on the free block
//! `f = (p_1..p_{N-2})`:
//!
//! * [`MeasureSpec::AmplitudeCoordinate`]: uniform in the amplitudes
//!   `x_i = sqrt(f_i)`, i.e. density proportional to `prod f_i^{-1/2}`.
//!   For three levels this is the measure uniform in `|a_1|`.
//! * [`MeasureSpec::FlatOccupation`]: Lebesgue measure on the polytope.
//!
//! Three-level amplitude averages have a closed form ([`exact_mean_3`]);
//! everything else goes through a seeded Monte Carlo stream.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};
use crate::rng::{stream_rng, StreamRng};
use crate::spectrum::{feasible_interval_3, EnergyShell, HalfSpace, OccupationVector};
use crate::stats::BatchMeans;

/// Above this many levels the automatic method switches to hit-and-run.
pub const REJECTION_MAX_LEVELS: usize = 6;

/// Proposals tried for a single rejection sample before giving up.
pub const MAX_REJECTION_ATTEMPTS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureSpec {
    #[serde(rename = "amplitude")]
    AmplitudeCoordinate,
    #[serde(rename = "flat")]
    FlatOccupation,
}

impl MeasureSpec {
    pub fn token(&self) -> &'static str {
        match self {
            MeasureSpec::AmplitudeCoordinate => "amplitude",
            MeasureSpec::FlatOccupation => "flat",
        }
    }

    /// Log-density on the free block, up to a constant.
    pub fn log_density(&self, free: &[f64]) -> f64 {
        match self {
            MeasureSpec::FlatOccupation => 0.0,
            MeasureSpec::AmplitudeCoordinate => -0.5 * free.iter().map(|f| f.ln()).sum::<f64>(),
        }
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MeasureSpec {
    type Err = ShellError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(MeasureSpec::AmplitudeCoordinate),
            "flat" => Ok(MeasureSpec::FlatOccupation),
            other => Err(ShellError::InvalidConfig(format!(
                "unknown measure `{other}` (expected amplitude|flat)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMethod {
    /// Rejection up to [`REJECTION_MAX_LEVELS`] levels, hit-and-run above.
    #[default]
    Auto,
    Rejection,
    HitAndRun,
}

impl SamplerMethod {
    pub fn resolve(self, n_levels: usize) -> SamplerMethod {
        match self {
            SamplerMethod::Auto if n_levels <= REJECTION_MAX_LEVELS => SamplerMethod::Rejection,
            SamplerMethod::Auto => SamplerMethod::HitAndRun,
            m => m,
        }
    }
}

impl FromStr for SamplerMethod {
    type Err = ShellError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SamplerMethod::Auto),
            "rejection" => Ok(SamplerMethod::Rejection),
            "hit-and-run" => Ok(SamplerMethod::HitAndRun),
            other => Err(ShellError::InvalidConfig(format!(
                "unknown sampler method `{other}` (expected auto|rejection|hit-and-run)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub method: SamplerMethod,
    pub samples: usize,
    /// Hit-and-run steps discarded before recording; `None` means `10 * N * thinning`.
    pub burn_in: Option<usize>,
    pub seed: u64,
    pub thinning: usize,
    /// Sample even when a closed form exists (three-level amplitude measure).
    pub force_monte_carlo: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            method: SamplerMethod::Auto,
            samples: 100_000,
            burn_in: None,
            seed: 42,
            thinning: 1,
            force_monte_carlo: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(ShellError::InvalidConfig("samples must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(ShellError::InvalidConfig("thinning must be at least 1".into()));
        }
        Ok(())
    }

    pub fn burn_in_for(&self, n_levels: usize) -> usize {
        self.burn_in.unwrap_or(10 * n_levels * self.thinning)
    }
}

/// Microcanonical mean with its Monte Carlo uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMean {
    pub mean: OccupationVector,
    pub std_error: Vec<f64>,
    /// Zero for closed-form and single-point results.
    pub samples_used: usize,
    pub measure: MeasureSpec,
    pub exact: bool,
}

/// Closed-form amplitude-measure mean on a three-level shell.
///
/// With `x = sqrt(p_1)` uniform on `[sqrt(lo), sqrt(hi)]`,
/// `E[p_1] = (hi^{3/2} - lo^{3/2}) / (3 (sqrt(hi) - sqrt(lo)))`.
/// The dependent pair is affine in `p_1`, so its mean is the completion of
/// the mean `p_1`.
pub fn exact_mean_3(shell: &EnergyShell) -> Result<OccupationVector> {
    if shell.n_levels() != 3 {
        return Err(ShellError::Unsupported(format!(
            "exactly 3 levels, got {}",
            shell.n_levels()
        )));
    }
    if shell.is_degenerate() {
        return Err(ShellError::DegenerateShell(shell.total_energy()));
    }
    let iv = feasible_interval_3(shell)?;
    let (slo, shi) = (iv.lo.sqrt(), iv.hi.sqrt());
    let p1 = if shi > slo {
        (iv.hi * shi - iv.lo * slo) / (3.0 * (shi - slo))
    } else {
        iv.lo
    };
    shell.complete(&[p1.clamp(iv.lo, iv.hi)])
}

enum Engine {
    Rejection {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    HitAndRun {
        current: Vec<f64>,
        constraints: Vec<HalfSpace>,
        pending_burn_in: usize,
    },
}

/// Seeded stream of shell points distributed according to a measure.
pub struct SampleStream<'a> {
    shell: &'a EnergyShell,
    measure: MeasureSpec,
    rng: StreamRng,
    remaining: usize,
    thinning: usize,
    engine: Engine,
    free: Vec<f64>,
    direction: Vec<f64>,
    proposals: u64,
    accepted: u64,
}

impl SampleStream<'_> {
    /// Method actually used after resolving `Auto`.
    pub fn method(&self) -> SamplerMethod {
        match self.engine {
            Engine::Rejection { .. } => SamplerMethod::Rejection,
            Engine::HitAndRun { .. } => SamplerMethod::HitAndRun,
        }
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_ratio(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn next_rejection(&mut self) -> Result<Vec<f64>> {
        let Engine::Rejection { lo, hi } = &self.engine else {
            unreachable!()
        };
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            self.proposals += 1;
            for ((f, l), h) in self.free.iter_mut().zip(lo).zip(hi) {
                let u: f64 = self.rng.random();
                let x = l + (h - l) * u;
                *f = match self.measure {
                    MeasureSpec::AmplitudeCoordinate => x * x,
                    MeasureSpec::FlatOccupation => x,
                };
            }
            if self.shell.is_feasible_free(&self.free) {
                self.accepted += 1;
                return Ok(self.free.clone());
            }
        }
        Err(ShellError::Sampler(format!(
            "no feasible proposal in {MAX_REJECTION_ATTEMPTS} rejection attempts"
        )))
    }

    fn hit_and_run_step(&mut self) {
        let Engine::HitAndRun {
            current,
            constraints,
            ..
        } = &mut self.engine
        else {
            unreachable!()
        };
        loop {
            let mut norm = 0.0;
            for d in self.direction.iter_mut() {
                *d = self.rng.sample(StandardNormal);
                norm += *d * *d;
            }
            if norm > 0.0 {
                break;
            }
        }
        let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for h in constraints.iter() {
            let c0 = h.eval(current).max(0.0);
            let c1: f64 = h.normal.iter().zip(&self.direction).map(|(a, b)| a * b).sum();
            if c1 > 0.0 {
                t_lo = t_lo.max(-c0 / c1);
            } else if c1 < 0.0 {
                t_hi = t_hi.min(c0 / -c1);
            }
        }
        self.proposals += 1;
        if !(t_lo.is_finite() && t_hi.is_finite() && t_hi > t_lo) {
            return;
        }
        let t = t_lo + (t_hi - t_lo) * self.rng.random::<f64>();
        for ((f, c), d) in self.free.iter_mut().zip(current.iter()).zip(&self.direction) {
            *f = c + t * d;
        }
        if !self.shell.is_feasible_free(&self.free) {
            return;
        }
        let accept = match self.measure {
            MeasureSpec::FlatOccupation => true,
            m => {
                let log_ratio = m.log_density(&self.free) - m.log_density(current);
                log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio
            }
        };
        if accept {
            self.accepted += 1;
            current.copy_from_slice(&self.free);
        }
    }

    fn next_hit_and_run(&mut self) -> Vec<f64> {
        let burn = match &mut self.engine {
            Engine::HitAndRun {
                pending_burn_in, ..
            } => std::mem::take(pending_burn_in),
            _ => unreachable!(),
        };
        for _ in 0..burn + self.thinning {
            self.hit_and_run_step();
        }
        match &self.engine {
            Engine::HitAndRun { current, .. } => current.clone(),
            _ => unreachable!(),
        }
    }
}

impl Iterator for SampleStream<'_> {
    type Item = Result<OccupationVector>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let free = match self.engine {
            Engine::Rejection { .. } => match self.next_rejection() {
                Ok(f) => f,
                Err(e) => {
                    self.remaining = 0;
                    return Some(Err(e));
                }
            },
            Engine::HitAndRun { .. } => self.next_hit_and_run(),
        };
        Some(self.shell.complete(&free))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, Some(self.remaining))
    }
}

/// Opens a seeded sample stream of exactly `config.samples` shell points.
pub fn draw_samples<'a>(
    shell: &'a EnergyShell,
    measure: MeasureSpec,
    config: &SamplerConfig,
) -> Result<SampleStream<'a>> {
    config.validate()?;
    let n = shell.n_levels();
    if n < 3 {
        return Err(ShellError::Unsupported("at least 3 levels for sampling".into()));
    }
    if shell.is_degenerate() {
        return Err(ShellError::DegenerateShell(shell.total_energy()));
    }
    let k = shell.free_dim();
    let engine = match config.method.resolve(n) {
        SamplerMethod::HitAndRun => {
            let start = interior_start(shell)?;
            Engine::HitAndRun {
                current: start,
                constraints: shell.half_spaces(),
                pending_burn_in: config.burn_in_for(n),
            }
        }
        _ => {
            let bbox = shell.free_bounding_box();
            let map = |v: f64| match measure {
                MeasureSpec::AmplitudeCoordinate => v.max(0.0).sqrt(),
                MeasureSpec::FlatOccupation => v,
            };
            let lo = bbox.iter().map(|b| map(b.0)).collect();
            let hi = bbox.iter().map(|b| map(b.1)).collect();
            Engine::Rejection { lo, hi }
        }
    };
    Ok(SampleStream {
        shell,
        measure,
        rng: stream_rng(config.seed),
        remaining: config.samples,
        thinning: config.thinning,
        engine,
        free: vec![0.0; k],
        direction: vec![0.0; k],
        proposals: 0,
        accepted: 0,
    })
}

/// Free block of the vertex average, required to be strictly interior.
pub(crate) fn interior_start(shell: &EnergyShell) -> Result<Vec<f64>> {
    let c = shell.centroid_of_vertices();
    let free = c.as_slice()[..shell.free_dim()].to_vec();
    let min_slack = shell
        .half_spaces()
        .iter()
        .map(|h| h.eval(&free))
        .fold(f64::INFINITY, f64::min);
    if !(min_slack > 0.0) {
        return Err(ShellError::Sampler(format!(
            "no interior starting point (minimum slack {min_slack:e})"
        )));
    }
    Ok(free)
}

/// Microcanonical mean occupation under `measure`.
///
/// Single-point shells (two levels or a boundary energy) return that point
/// with zero error. Three-level amplitude shells use [`exact_mean_3`] unless
/// `config.force_monte_carlo` is set.
pub fn ensemble_mean(
    shell: &EnergyShell,
    measure: MeasureSpec,
    config: &SamplerConfig,
) -> Result<EnsembleMean> {
    config.validate()?;
    let n = shell.n_levels();
    if n == 2 || shell.is_degenerate() {
        let point = shell
            .vertices()
            .into_iter()
            .next()
            .ok_or_else(|| ShellError::Sampler("shell has no vertices".into()))?;
        return Ok(EnsembleMean {
            mean: point,
            std_error: vec![0.0; n],
            samples_used: 0,
            measure,
            exact: true,
        });
    }
    if n == 3 && measure == MeasureSpec::AmplitudeCoordinate && !config.force_monte_carlo {
        return Ok(EnsembleMean {
            mean: exact_mean_3(shell)?,
            std_error: vec![0.0; 3],
            samples_used: 0,
            measure,
            exact: true,
        });
    }
    let mut acc = BatchMeans::for_total(config.samples, n);
    for sample in draw_samples(shell, measure, config)? {
        acc.push(sample?.as_slice());
    }
    let summary = acc.finish();
    Ok(EnsembleMean {
        mean: renormalise(summary.mean),
        std_error: summary.std_error,
        samples_used: summary.count,
        measure,
        exact: false,
    })
}

/// Removes summation round-off from an averaged occupation vector.
pub(crate) fn renormalise(mut p: Vec<f64>) -> OccupationVector {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
    OccupationVector::from_raw(p)
}
