//! Discrete spectra and the geometry of the fixed-energy shell.
//!
//! The shell for a spectrum `E_1 < ... < E_N` and total energy `E` is the
//! convex polytope `{p >= 0, sum(p) = 1, sum(p * E) = E}` of dimension
//! `N - 2`. Points are parametrised by the *free block* `p_1..p_{N-2}`; the
//! *dependent pair* `(p_{N-1}, p_N)` is recovered by solving the two linear
//! constraints exactly, so no sampled or visited point can drift off the shell.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

/// Normalisation tolerance for occupation vectors.
pub const NORM_TOL: f64 = 1e-12;

/// Slack allowed when deciding whether a solved component lies in `[0, 1]`.
/// Components inside the slack are clamped onto the boundary.
pub const FEAS_TOL: f64 = 1e-12;

/// Strictly increasing list of energy levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        Self::check_common(&levels)?;
        for i in 1..levels.len() {
            if levels[i] <= levels[i - 1] {
                return Err(ShellError::NonIncreasing {
                    index: i,
                    value: levels[i],
                    previous: levels[i - 1],
                });
            }
        }
        Ok(Self { levels })
    }

    /// Distinct levels kept in caller order.
    ///
    /// Shell geometry only needs the levels to be pairwise distinct; this
    /// constructor exists so tests can relabel levels and check that results
    /// permute accordingly.
    #[doc(hidden)]
    pub fn unordered(levels: Vec<f64>) -> Result<Self> {
        Self::check_common(&levels)?;
        for i in 1..levels.len() {
            if levels[..i].contains(&levels[i]) {
                return Err(ShellError::RepeatedLevel {
                    index: i,
                    value: levels[i],
                });
            }
        }
        Ok(Self { levels })
    }

    fn check_common(levels: &[f64]) -> Result<()> {
        if levels.len() < 2 {
            return Err(ShellError::TooFewLevels(levels.len()));
        }
        if let Some((index, &value)) = levels.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ShellError::NonFiniteLevel { index, value });
        }
        Ok(())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Lowest and highest level.
    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn mean_level(&self) -> f64 {
        self.levels.iter().sum::<f64>() / self.levels.len() as f64
    }

    /// `levels * scale + shift`. Panics if the result is not a valid spectrum.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        Self {
            levels: self.levels.iter().map(|e| e * scale + shift).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for EnergySpectrum {
    type Error = ShellError;

    fn try_from(levels: Vec<f64>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<EnergySpectrum> for Vec<f64> {
    fn from(s: EnergySpectrum) -> Self {
        s.levels
    }
}

pub fn make_spectrum(levels: &[f64]) -> Result<EnergySpectrum> {
    EnergySpectrum::new(levels.to_vec())
}

pub fn energy_bounds(spectrum: &EnergySpectrum) -> (f64, f64) {
    spectrum.bounds()
}

/// Occupation probabilities `p_m = |a_m|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector {
    p: Vec<f64>,
}

impl OccupationVector {
    /// Validates non-negativity and normalisation.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(ShellError::InfeasiblePoint(format!("component {i} = {v}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(ShellError::InfeasiblePoint(format!("components sum to {sum}")));
        }
        Ok(Self { p })
    }

    pub(crate) fn from_raw(p: Vec<f64>) -> Self {
        Self { p }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    pub fn mean_energy(&self, spectrum: &EnergySpectrum) -> f64 {
        self.p.iter().zip(spectrum.levels()).map(|(p, e)| p * e).sum()
    }
}

impl std::ops::Index<usize> for OccupationVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Closed interval of admissible `p_1` on a three-level shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FeasibleInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Linear inequality `offset + normal . free >= 0` over the free block.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub offset: f64,
    pub normal: Vec<f64>,
}

impl HalfSpace {
    pub fn eval(&self, free: &[f64]) -> f64 {
        self.offset + self.normal.iter().zip(free).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// A spectrum together with a total energy inside its range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyShell {
    spectrum: EnergySpectrum,
    total_energy: f64,
    degenerate: bool,
}

impl EnergyShell {
    pub fn new(spectrum: EnergySpectrum, total_energy: f64) -> Result<Self> {
        let (lo, hi) = spectrum.bounds();
        if !(total_energy >= lo && total_energy <= hi) {
            return Err(ShellError::InfeasibleEnergy {
                energy: total_energy,
                lo,
                hi,
            });
        }
        let degenerate = total_energy == lo || total_energy == hi;
        Ok(Self {
            spectrum,
            total_energy,
            degenerate,
        })
    }

    pub fn spectrum(&self) -> &EnergySpectrum {
        &self.spectrum
    }

    pub fn levels(&self) -> &[f64] {
        self.spectrum.levels()
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn n_levels(&self) -> usize {
        self.spectrum.len()
    }

    /// Dimension of the free block, `N - 2`.
    pub fn free_dim(&self) -> usize {
        self.spectrum.len() - 2
    }

    /// Energy tolerance used by membership tests.
    pub fn energy_tol(&self) -> f64 {
        let (lo, hi) = self.spectrum.bounds();
        1e-9 * 1f64.max(lo.abs().max(hi.abs()))
    }

    /// Same shell after `E -> scale * E + shift` on levels and total energy.
    pub fn affine(&self, shift: f64, scale: f64) -> Result<Self> {
        Self::new(
            self.spectrum.affine(shift, scale),
            self.total_energy * scale + shift,
        )
    }

    /// Dependent pair `(p_{N-1}, p_N)` for a given free block, unchecked.
    ///
    /// Solves `p_{N-1} + p_N = 1 - sum(free)` and
    /// `p_{N-1} E_{N-1} + p_N E_N = E - sum(free * E)`.
    pub fn solve_dependent(&self, free: &[f64]) -> (f64, f64) {
        let e = self.levels();
        let n = e.len();
        let (e_a, e_b) = (e[n - 2], e[n - 1]);
        let gap = e_b - e_a;
        let mut num_a = e_b - self.total_energy;
        let mut num_b = self.total_energy - e_a;
        for (f, ei) in free.iter().zip(e) {
            num_a -= f * (e_b - ei);
            num_b -= f * (ei - e_a);
        }
        (num_a / gap, num_b / gap)
    }

    /// Full occupation vector for a free block, if it lies on the shell.
    pub fn complete(&self, free: &[f64]) -> Result<OccupationVector> {
        let n = self.n_levels();
        if n < 3 {
            return Err(ShellError::Unsupported(
                "at least 3 levels for a free-block parametrisation".into(),
            ));
        }
        if free.len() != n - 2 {
            return Err(ShellError::LengthMismatch {
                expected: n - 2,
                got: free.len(),
            });
        }
        let (a, b) = self.solve_dependent(free);
        let mut p = Vec::with_capacity(n);
        p.extend_from_slice(free);
        p.push(a);
        p.push(b);
        for (i, v) in p.iter_mut().enumerate() {
            if !v.is_finite() || *v < -FEAS_TOL || *v > 1.0 + FEAS_TOL {
                return Err(ShellError::InfeasiblePoint(format!(
                    "component {} = {v} outside [0, 1]",
                    i + 1
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(OccupationVector::from_raw(p))
    }

    /// Cheap feasibility test for a free block without allocating.
    pub fn is_feasible_free(&self, free: &[f64]) -> bool {
        if free.iter().any(|f| !(*f >= -FEAS_TOL && *f <= 1.0 + FEAS_TOL)) {
            return false;
        }
        let (a, b) = self.solve_dependent(free);
        [a, b]
            .iter()
            .all(|v| *v >= -FEAS_TOL && *v <= 1.0 + FEAS_TOL)
    }

    /// Inequalities that cut the shell out of free-block space.
    ///
    /// Contains `f_i >= 0` for each free coordinate and both bounds of each
    /// dependent component. Upper bounds `f_i <= 1` are implied and omitted.
    pub fn half_spaces(&self) -> Vec<HalfSpace> {
        let e = self.levels();
        let n = e.len();
        let k = n - 2;
        let (e_a, e_b) = (e[n - 2], e[n - 1]);
        let gap = e_b - e_a;
        let sign = gap.signum();
        let mut out = Vec::with_capacity(k + 4);
        for i in 0..k {
            let mut normal = vec![0.0; k];
            normal[i] = 1.0;
            out.push(HalfSpace {
                offset: 0.0,
                normal,
            });
        }
        // gap * p_a = (E_b - E) - sum f_i (E_b - E_i)
        // gap * p_b = (E - E_a) - sum f_i (E_i - E_a)
        let dependents = [
            (e_b - self.total_energy, e[..k].iter().map(|ei| e_b - ei).collect::<Vec<_>>()),
            (self.total_energy - e_a, e[..k].iter().map(|ei| ei - e_a).collect::<Vec<_>>()),
        ];
        for (alpha, beta) in dependents {
            // sign * (alpha - beta . f) >= 0
            out.push(HalfSpace {
                offset: sign * alpha,
                normal: beta.iter().map(|b| -sign * b).collect(),
            });
            // sign * (gap - alpha + beta . f) >= 0
            out.push(HalfSpace {
                offset: sign * (gap - alpha),
                normal: beta.iter().map(|b| sign * b).collect(),
            });
        }
        out
    }

    /// Polytope vertices: every feasible two-level mixture, deduplicated.
    pub fn vertices(&self) -> Vec<OccupationVector> {
        let e = self.levels();
        let n = e.len();
        let target = self.total_energy;
        let mut out: Vec<OccupationVector> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = e[j] - e[i];
                let pi = (e[j] - target) / gap;
                let pj = (target - e[i]) / gap;
                let ok = |v: f64| (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v);
                if !(ok(pi) && ok(pj)) {
                    continue;
                }
                let mut p = vec![0.0; n];
                p[i] = pi.clamp(0.0, 1.0);
                p[j] = pj.clamp(0.0, 1.0);
                let dup = out.iter().any(|q| {
                    q.as_slice()
                        .iter()
                        .zip(&p)
                        .all(|(a, b)| (a - b).abs() <= FEAS_TOL)
                });
                if !dup {
                    out.push(OccupationVector::from_raw(p));
                }
            }
        }
        out
    }

    /// Average of the vertices; lies in the relative interior.
    pub fn centroid_of_vertices(&self) -> OccupationVector {
        let verts = self.vertices();
        let n = self.n_levels();
        let mut c = vec![0.0; n];
        for v in &verts {
            for (ci, vi) in c.iter_mut().zip(v.as_slice()) {
                *ci += vi;
            }
        }
        let m = verts.len() as f64;
        c.iter_mut().for_each(|x| *x /= m);
        OccupationVector::from_raw(c)
    }

    /// Per-coordinate `[min, max]` of the free block over the shell.
    pub fn free_bounding_box(&self) -> Vec<(f64, f64)> {
        let verts = self.vertices();
        (0..self.free_dim())
            .map(|i| {
                verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v[i]), hi.max(v[i]))
                })
            })
            .collect()
    }

    pub fn is_member(&self, p: &OccupationVector, tol: f64) -> bool {
        is_member(self, p, tol)
    }
}

pub fn make_shell(spectrum: EnergySpectrum, total_energy: f64) -> Result<EnergyShell> {
    EnergyShell::new(spectrum, total_energy)
}

/// Completes the free block `p_1..p_{N-2}` to a full shell point.
pub fn occupation_from_free(shell: &EnergyShell, free: &[f64]) -> Result<OccupationVector> {
    shell.complete(free)
}

/// Exact range of `p_1` on a three-level shell.
///
/// Each dependent component is affine in `p_1`; the interval is the
/// intersection of the half-lines `0 <= p_k <= 1` with `0 <= p_1 <= 1`, with
/// the direction of each half-line taken from the sign of its slope.
pub fn feasible_interval_3(shell: &EnergyShell) -> Result<FeasibleInterval> {
    if shell.n_levels() != 3 {
        return Err(ShellError::Unsupported(format!(
            "exactly 3 levels, got {}",
            shell.n_levels()
        )));
    }
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for h in shell.half_spaces() {
        let (c0, c1) = (h.offset, h.normal[0]);
        if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else if c1 < 0.0 {
            hi = hi.min(c0 / -c1);
        } else if c0 < 0.0 {
            lo = f64::INFINITY;
        }
    }
    if lo > hi {
        if lo - hi <= FEAS_TOL {
            let mid = 0.5 * (lo + hi);
            return Ok(FeasibleInterval { lo: mid, hi: mid });
        }
        return Err(ShellError::InfeasibleEnergy {
            energy: shell.total_energy(),
            lo: shell.spectrum().bounds().0,
            hi: shell.spectrum().bounds().1,
        });
    }
    Ok(FeasibleInterval { lo, hi })
}

pub fn shell_vertices(shell: &EnergyShell) -> Vec<OccupationVector> {
    shell.vertices()
}

/// Checks normalisation, non-negativity and the energy constraint within `tol`.
/// The energy residual is compared against `tol * max(1, max|E_m|)`.
pub fn is_member(shell: &EnergyShell, p: &OccupationVector, tol: f64) -> bool {
    let p = p.as_slice();
    if p.len() != shell.n_levels() {
        return false;
    }
    if p.iter().any(|v| !v.is_finite() || *v < -tol || *v > 1.0 + tol) {
        return false;
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return false;
    }
    let scale = {
        let (lo, hi) = shell.spectrum().bounds();
        1f64.max(lo.abs().max(hi.abs()))
    };
    let energy: f64 = p.iter().zip(shell.levels()).map(|(a, b)| a * b).sum();
    (energy - shell.total_energy()).abs() <= tol * scale
}
