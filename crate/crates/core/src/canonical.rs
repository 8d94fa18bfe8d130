//! Canonical (Gibbs) distribution and inverse-temperature fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};
use crate::spectrum::{EnergyShell, EnergySpectrum};

pub const DEFAULT_FIT_TOL: f64 = 1e-10;

/// Fitted canonical distribution for a shell energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFit {
    pub beta: f64,
    pub log_partition: f64,
    pub probabilities: Vec<f64>,
    /// `mean_energy(beta) - E`.
    pub residual: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(ShellError::NonFiniteBeta(beta))
    }
}

/// Max-shifted Boltzmann weights and `ln Z`.
fn weights(levels: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let shift = levels
        .iter()
        .map(|e| -beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = levels.iter().map(|e| (-beta * e - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    (w.into_iter().map(|x| x / total).collect(), shift + total.ln())
}

/// `P_n = exp(-beta E_n) / Z`, stable for any finite `beta`.
pub fn canonical_probabilities(spectrum: &EnergySpectrum, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    Ok(weights(spectrum.levels(), beta).0)
}

/// `ln Z = ln sum_k exp(-beta E_k)`.
pub fn log_partition(spectrum: &EnergySpectrum, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(weights(spectrum.levels(), beta).1)
}

pub fn canonical_mean_energy(spectrum: &EnergySpectrum, beta: f64) -> Result<f64> {
    let p = canonical_probabilities(spectrum, beta)?;
    Ok(p.iter().zip(spectrum.levels()).map(|(p, e)| p * e).sum())
}

fn mean_energy_unchecked(levels: &[f64], beta: f64) -> f64 {
    let (p, _) = weights(levels, beta);
    p.iter().zip(levels).map(|(p, e)| p * e).sum()
}

/// Solves `<E>_beta = E` for `beta`.
///
/// The mean energy is strictly decreasing in `beta`, so the root is bracketed
/// by doubling outward from `[-1, 1]` and then bisected until the bracket
/// cannot shrink further in floating point. Fails if the final residual is not
/// below `tol`.
pub fn fit_beta(shell: &EnergyShell, tol: f64) -> Result<CanonicalFit> {
    let target = shell.total_energy();
    let (lo_e, hi_e) = shell.spectrum().bounds();
    if !(target > lo_e && target < hi_e) {
        return Err(ShellError::NoFiniteBeta { energy: target });
    }
    if !(tol > 0.0) {
        return Err(ShellError::InvalidConfig(format!("fit tolerance must be positive, got {tol}")));
    }
    let levels = shell.levels();
    let g = |b: f64| mean_energy_unchecked(levels, b) - target;

    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    // g(lo) > 0 > g(hi) is required; g is decreasing.
    while g(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ShellError::NoFiniteBeta { energy: target });
        }
    }
    while g(lo) < 0.0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(ShellError::NoFiniteBeta { energy: target });
        }
    }

    let mut best = (f64::INFINITY, 0.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() < best.0 {
            best = (gm.abs(), mid);
        }
        if gm == 0.0 {
            break;
        } else if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for b in [lo, hi] {
        let r = g(b).abs();
        if r < best.0 {
            best = (r, b);
        }
    }

    let beta = best.1;
    let (probabilities, log_partition) = weights(levels, beta);
    let residual = g(beta);
    if residual.abs() >= tol {
        return Err(ShellError::FitNotConverged {
            residual: residual.abs(),
            tol,
        });
    }
    Ok(CanonicalFit {
        beta,
        log_partition,
        probabilities,
        residual,
    })
}
