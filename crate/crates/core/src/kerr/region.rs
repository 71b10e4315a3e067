//! Outcome grids, acceptance regions and the figures of merit averaged over
//! them.
//!
//! The conditional output mixed state is never formed: every figure of merit
//! is linear in it, so it is the `Q(β)`-weighted average of the pure-state
//! values. Grid points are evaluated in parallel; reductions always run
//! sequentially in grid order so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conditional_state, fidelity_to_phi_n, input_state, q_function, KerrParams};
use crate::teleport::teleport_fidelity;
use crate::{Error, Result, C64};

/// Square window of outcomes `β = α + x + iy` with `|x|, |y| ≤ half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: 5.0, step: 0.1 }
    }
}

impl GridSpec {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width >= 4.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("grid half width must be at least 4, got {half_width}")));
        }
        if !(step > 0.0 && step <= 0.2) {
            return Err(Error::Domain(format!("grid step must lie in (0, 0.2], got {step}")));
        }
        Ok(Self { half_width, step })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Area element of each point.
    pub fn weight(&self) -> f64 {
        self.step * self.step
    }

    pub fn points_per_axis(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    /// `−half_width + i·step` for `i = 0..points_per_axis()`.
    pub fn offsets(&self) -> Vec<f64> {
        (0..self.points_per_axis()).map(|i| -self.half_width + i as f64 * self.step).collect()
    }

    /// `(x, y, β)` in row-major order: `y` outer, `x` inner, both ascending.
    pub fn points(&self, alpha: f64) -> impl Iterator<Item = (f64, f64, C64)> {
        let xs = self.offsets();
        let ys = xs.clone();
        ys.into_iter()
            .flat_map(move |y| xs.clone().into_iter().map(move |x| (x, y, C64::new(alpha + x, y))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionPoint {
    pub beta: C64,
    pub weight: f64,
}

/// Accepted outcomes: every point satisfies `F(β) ≥ f0 + delta_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRegion {
    pub points: Vec<RegionPoint>,
    pub delta_f: f64,
    /// Fidelity of the unconditioned input with the target state.
    pub f0: f64,
}

impl PhaseRegion {
    /// Every grid point, regardless of fidelity.
    pub fn full_window(params: &KerrParams, grid: &GridSpec) -> Result<Self> {
        let points = grid.points(params.alpha()).map(|(_, _, beta)| RegionPoint { beta, weight: grid.weight() }).collect();
        Ok(Self { points, delta_f: f64::NEG_INFINITY, f0: input_fidelity(params)? })
    }

    pub fn threshold(&self) -> f64 {
        self.f0 + self.delta_f
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn input_fidelity(params: &KerrParams) -> Result<f64> {
    fidelity_to_phi_n(&input_state(params), params.fock_cut())
}

fn check_delta_f(delta_f: f64) -> Result<()> {
    if delta_f >= 0.0 && delta_f.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("fidelity threshold offset must be non-negative, got {delta_f}")))
    }
}

/// Grid points whose conditional state reaches `F₀ + delta_f` (inclusive).
pub fn build_region(params: &KerrParams, grid: &GridSpec, delta_f: f64) -> Result<PhaseRegion> {
    check_delta_f(delta_f)?;
    let f0 = input_fidelity(params)?;
    let betas: Vec<C64> = grid.points(params.alpha()).map(|(_, _, beta)| beta).collect();
    let fidelities = betas
        .par_iter()
        .map(|&beta| fidelity_to_phi_n(&conditional_state(beta, params)?, params.fock_cut()))
        .collect::<Result<Vec<f64>>>()?;
    let threshold = f0 + delta_f;
    let points: Vec<RegionPoint> = betas
        .iter()
        .zip(&fidelities)
        .filter(|(_, &f)| f >= threshold)
        .map(|(&beta, _)| RegionPoint { beta, weight: grid.weight() })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyRegion { max_fidelity: fidelities.iter().copied().fold(f64::NEG_INFINITY, f64::max) });
    }
    Ok(PhaseRegion { points, delta_f, f0 })
}

fn require_points(region: &PhaseRegion) -> Result<()> {
    if region.is_empty() {
        Err(Error::Domain("acceptance region has no points".into()))
    } else {
        Ok(())
    }
}

/// Probability mass `Σ Q(β) w` and the `Q`-weighted mean of `values`,
/// accumulated in the given order.
fn weighted_mean(masses: &[f64], values: &[f64]) -> (f64, f64) {
    let mut total = 0.0;
    let mut acc = 0.0;
    for (&m, &v) in masses.iter().zip(values) {
        total += m;
        acc += m * v;
    }
    (total, acc / total)
}

fn masses(region: &PhaseRegion, params: &KerrParams) -> Vec<f64> {
    region.points.par_iter().map(|p| q_function(p.beta, params) * p.weight).collect()
}

fn state_values(region: &PhaseRegion, params: &KerrParams, f: impl Fn(&crate::fock::SchmidtState) -> f64 + Sync) -> Result<Vec<f64>> {
    region
        .points
        .par_iter()
        .map(|p| conditional_state(p.beta, params).map(|s| f(&s)))
        .collect()
}

/// `P_Ω = Σ Q(β) w` over the region.
pub fn success_probability(region: &PhaseRegion, params: &KerrParams) -> Result<f64> {
    require_points(region)?;
    Ok(masses(region, params).iter().sum())
}

/// `⟨F⟩ = Σ Q(β) F(β) w / P_Ω` with `F` the fidelity to the target state.
pub fn average_fidelity(region: &PhaseRegion, params: &KerrParams) -> Result<f64> {
    require_points(region)?;
    let n = params.fock_cut();
    let values = state_values(region, params, |s| fidelity_to_phi_n(s, n).expect("N checked against n_max"))?;
    Ok(weighted_mean(&masses(region, params), &values).1)
}

/// Coherent-state teleportation fidelity through the heralded mixed state.
pub fn average_teleport_fidelity(region: &PhaseRegion, params: &KerrParams) -> Result<f64> {
    require_points(region)?;
    let values = state_values(region, params, |s| teleport_fidelity(s).fidelity)?;
    Ok(weighted_mean(&masses(region, params), &values).1)
}

/// Per-outcome values cached for a whole grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    pub y: f64,
    pub q: f64,
    pub fidelity: f64,
    pub teleport: f64,
}

/// Figures of merit for one acceptance threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    #[serde(rename = "delta_F")]
    pub delta_f: f64,
    #[serde(rename = "P_omega")]
    pub p_omega: f64,
    #[serde(rename = "avg_F")]
    pub avg_f: f64,
    #[serde(rename = "avg_F_teleport")]
    pub avg_f_teleport: f64,
    pub n_points: usize,
}

/// Every grid outcome evaluated once; thresholds are then applied without
/// recomputing states. Summaries agree bitwise with the free functions.
#[derive(Clone, Debug, PartialEq)]
pub struct GridScan {
    pub grid: GridSpec,
    pub f0: f64,
    pub weight: f64,
    pub points: Vec<ScanPoint>,
}

pub fn scan_grid(params: &KerrParams, grid: &GridSpec) -> Result<GridScan> {
    let f0 = input_fidelity(params)?;
    let coords: Vec<(f64, f64, C64)> = grid.points(params.alpha()).collect();
    let points = coords
        .par_iter()
        .map(|&(x, y, beta)| {
            let state = conditional_state(beta, params)?;
            Ok(ScanPoint {
                x,
                y,
                q: q_function(beta, params),
                fidelity: fidelity_to_phi_n(&state, params.fock_cut())?,
                teleport: teleport_fidelity(&state).fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridScan { grid: *grid, f0, weight: grid.weight(), points })
}

impl GridScan {
    pub fn max_fidelity(&self) -> f64 {
        self.points.iter().map(|p| p.fidelity).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ Q w` over the whole window.
    pub fn total_probability(&self) -> f64 {
        self.points.iter().map(|p| p.q * self.weight).sum()
    }

    pub fn summarize(&self, delta_f: f64) -> Result<RegionSummary> {
        check_delta_f(delta_f)?;
        let threshold = self.f0 + delta_f;
        let accepted: Vec<&ScanPoint> = self.points.iter().filter(|p| p.fidelity >= threshold).collect();
        if accepted.is_empty() {
            return Err(Error::EmptyRegion { max_fidelity: self.max_fidelity() });
        }
        let masses: Vec<f64> = accepted.iter().map(|p| p.q * self.weight).collect();
        let fid: Vec<f64> = accepted.iter().map(|p| p.fidelity).collect();
        let tele: Vec<f64> = accepted.iter().map(|p| p.teleport).collect();
        let (p_omega, avg_f) = weighted_mean(&masses, &fid);
        let (_, avg_f_teleport) = weighted_mean(&masses, &tele);
        Ok(RegionSummary { delta_f, p_omega, avg_f, avg_f_teleport, n_points: accepted.len() })
    }
}
