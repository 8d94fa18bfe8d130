//! Microcanonical energy shells over discrete spectra.
//!
//! For a spectrum `E_1 < ... < E_N` and a total energy `E`, the set of
//! occupation vectors `p` with `sum(p) = 1` and `sum(p * E) = E` is a convex
//! polytope. This crate builds that shell, averages occupations over it
//! (closed form for three levels, Monte Carlo otherwise), fits the canonical
//! distribution with the same mean energy and measures how far apart the two
//! are. A Metropolis walk on the shell provides time averages for comparison
//! with the ensemble averages.
//!
//! ```
//! use shellstat_core::{exact_mean_3, fit_beta, EnergyShell, EnergySpectrum};
//!
//! let spectrum = EnergySpectrum::new(vec![0.0, 5.0, 8.0])?;
//! let shell = EnergyShell::new(spectrum, 2.0)?;
//! let mean = exact_mean_3(&shell)?;
//! let fit = fit_beta(&shell, 1e-10)?;
//! assert!((mean[0] - 0.674).abs() < 1e-3);
//! assert!((fit.beta - 0.2224).abs() < 1e-3);
//! # Ok::<(), shellstat_core::ShellError>(())
//! ```

pub mod canonical;
pub mod discrepancy;
pub mod ensemble;
pub mod error;
pub mod rng;
pub mod spectrum;
pub mod stats;
pub mod walk;

pub use canonical::{
    canonical_mean_energy, canonical_probabilities, fit_beta, log_partition, CanonicalFit,
    DEFAULT_FIT_TOL,
};
pub use discrepancy::{
    analyze_shell, compare, compare_distributions, energy_sweep, level_scaling_study,
    level_scaling_study_with, random_spectrum, summarize_scaling, DiscrepancyReport,
    ScalingParams, ScalingStudyRow, ScalingSummary, SweepRow,
};
pub use ensemble::{
    draw_samples, ensemble_mean, exact_mean_3, EnsembleMean, MeasureSpec, SampleStream,
    SamplerConfig, SamplerMethod,
};
pub use error::{Result, ShellError};
pub use spectrum::{
    energy_bounds, feasible_interval_3, is_member, make_shell, make_spectrum,
    occupation_from_free, shell_vertices, EnergyShell, EnergySpectrum, FeasibleInterval,
    OccupationVector,
};
pub use walk::{
    ergodicity_check, time_average, time_average_with, walk_step, ErgodicityCheck,
    TrajectoryStats, WalkConfig, Walker,
};
