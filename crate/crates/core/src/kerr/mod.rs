//! Concentration with a cross-Kerr coupling to a strong coherent beam.
//!
//! The auxiliary mode starts in `|α⟩` (α real and positive). With `n` photons
//! in Alice's mode the Kerr medium rotates it to `|α e^{inφ}⟩`; the auxiliary
//! mode is then projected onto a coherent state `|β⟩` by eight-port homodyne
//! detection. The outcome density is the Husimi function [`q_function`] and
//! the conditional Schmidt coefficients are
//!
//! ```text
//! d_n(β) ∝ λⁿ exp(α β* e^{inφ} − inφ α Re β)
//! ```
//!
//! where the last term is the outcome-dependent feedforward phase shift that
//! removes the part of the conditional phase linear in `n`.
//!
//! All exponents are handled in log space relative to the `n = 0` term: with
//! `α = 10` the raw exponents reach ±100.

mod region;

pub use region::{
    average_fidelity, average_teleport_fidelity, build_region, scan_grid, success_probability, GridScan, GridSpec,
    PhaseRegion, RegionPoint, RegionSummary, ScanPoint,
};

use serde::{Deserialize, Serialize};

use crate::fock::{default_n_max, tmsv_log_magnitudes, wrap_angle, SchmidtState, Tolerance};
use crate::{Error, Result, C64};

/// Parameters of the Kerr scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    lambda: f64,
    alpha: f64,
    phi: f64,
    n_max: usize,
    fock_cut: usize,
}

impl KerrParams {
    /// `fock_cut` is the `N` of the target state `|Φ_N⟩`; `n_max` truncates
    /// the Fock ladder.
    pub fn new(lambda: f64, alpha: f64, phi: f64, fock_cut: usize, n_max: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain("phi must be finite".into()));
        }
        if fock_cut > n_max {
            return Err(Error::Domain(format!("N = {fock_cut} exceeds n_max = {n_max}")));
        }
        Ok(Self { lambda, alpha, phi, n_max, fock_cut })
    }

    /// Picks the smallest ladder whose truncated tail stays below
    /// `tol.tail_mass` for every outcome on `grid`.
    pub fn for_grid(lambda: f64, alpha: f64, phi: f64, fock_cut: usize, grid: &GridSpec, tol: &Tolerance) -> Result<Self> {
        let probe = Self::new(lambda, alpha, phi, 0, 0)?;
        let worst = grid
            .points(alpha)
            .map(|(_, _, beta)| tail_exponent(alpha, beta))
            .fold(0.0, f64::max);
        let n_max = required_n_max(probe.lambda, worst, tol.tail_mass)?;
        Self::new(lambda, alpha, phi, fock_cut, n_max.max(fock_cut))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_cut(&self) -> usize {
        self.fock_cut
    }

    pub fn with_phi(self, phi: f64) -> Result<Self> {
        Self::new(self.lambda, self.alpha, phi, self.fock_cut, self.n_max)
    }
}

/// `α(|β| − Re β)`: bounds how much the measurement can amplify high Fock
/// levels relative to the vacuum term.
fn tail_exponent(alpha: f64, beta: C64) -> f64 {
    alpha * (beta.norm() - beta.re)
}

fn required_n_max(lambda: f64, amplification: f64, tail_mass: f64) -> Result<usize> {
    if lambda == 0.0 {
        return Ok(0);
    }
    let base = default_n_max(lambda, tail_mass)?;
    let extra = (2.0 * amplification - (1.0 - lambda * lambda).ln()) / (-2.0 * lambda.ln());
    Ok(base + extra.ceil() as usize)
}

/// Upper bound on the probability mass the conditional state loses by
/// truncating the ladder at `params.n_max`.
pub fn truncation_bound(params: &KerrParams, beta: C64) -> f64 {
    if params.lambda == 0.0 {
        return 0.0;
    }
    let l2 = params.lambda * params.lambda;
    let ln = (params.n_max + 1) as f64 * l2.ln() - (1.0 - l2).ln() + 2.0 * tail_exponent(params.alpha, beta);
    ln.exp()
}

/// A homodyne outcome `β = |β| e^{iφ₀}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub beta: C64,
}

impl Outcome {
    pub fn new(beta: C64) -> Self {
        Self { beta }
    }

    /// `arg β` in `(−π, π]`.
    pub fn phi0(&self) -> f64 {
        wrap_angle(self.beta.arg())
    }

    pub fn modulus(&self) -> f64 {
        self.beta.norm()
    }
}

/// `ln ⟨β|α⟩` as `(log-magnitude, phase)`.
pub fn ln_coherent_overlap(beta: C64, alpha: C64) -> (f64, f64) {
    let z = beta.conj() * alpha;
    (z.re - 0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr(), z.im)
}

/// `⟨β|α⟩ = exp(−|α|²/2 − |β|²/2 + β*α)`.
pub fn coherent_overlap(beta: C64, alpha: C64) -> C64 {
    let (ln_mag, phase) = ln_coherent_overlap(beta, alpha);
    C64::from_polar(ln_mag.exp(), phase)
}

/// Husimi function of the auxiliary mode after the interaction,
/// `((1−λ²)/π) Σ_n λ^{2n} exp(−|α e^{inφ} − β|²)` over the truncated ladder.
pub fn q_function(beta: C64, params: &KerrParams) -> f64 {
    let l2 = params.lambda * params.lambda;
    let sum: f64 = (0..=params.n_max)
        .map(|n| {
            let rotated = C64::from_polar(params.alpha, n as f64 * params.phi);
            l2.powi(n as i32) * (-(rotated - beta).norm_sqr()).exp()
        })
        .sum();
    (1.0 - l2) / std::f64::consts::PI * sum
}

/// Log-magnitudes (up to a constant) and phases of the conditional
/// coefficients, both measured relative to the vacuum term.
fn conditional_log_polar(beta: C64, params: &KerrParams) -> (Vec<f64>, Vec<f64>) {
    let outcome = Outcome::new(beta);
    let (r, phi0) = (outcome.modulus(), outcome.phi0());
    let (alpha, phi) = (params.alpha, params.phi);
    let ar = alpha * r;
    let feedforward = phi * alpha * beta.re;
    let mut ln_mag = tmsv_log_magnitudes(params.lambda, params.n_max);
    let mut phase = vec![0.0; params.n_max + 1];
    for n in 1..=params.n_max {
        let half = 0.5 * n as f64 * phi;
        let mid = half - phi0;
        // q_n − q_0 and ϕ_n − ϕ_0 in product form, exact zero at φ = 0
        ln_mag[n] += -2.0 * ar * mid.sin() * half.sin();
        phase[n] = 2.0 * ar * mid.cos() * half.sin() - n as f64 * feedforward;
    }
    (ln_mag, phase)
}

/// Normalized Schmidt coefficients heralded by outcome `β`, after the
/// feedforward phase correction. The global phase is fixed so that `d_0` is
/// real and positive.
pub fn conditional_state(beta: C64, params: &KerrParams) -> Result<SchmidtState> {
    let q = q_function(beta, params);
    if !(q >= f64::MIN_POSITIVE) {
        return Err(Error::ZeroProbability(q));
    }
    let (ln_mag, phase) = conditional_log_polar(beta, params);
    Ok(SchmidtState::from_log_polar(&ln_mag, &phase)?.with_tail_mass(truncation_bound(params, beta)))
}

/// The unconditioned input state on the same ladder as `params`.
pub fn input_state(params: &KerrParams) -> SchmidtState {
    let ln_mag = tmsv_log_magnitudes(params.lambda, params.n_max);
    SchmidtState::from_log_polar(&ln_mag, &vec![0.0; params.n_max + 1])
        .expect("vacuum amplitude is non-zero")
        .with_lambda_meta(Some(params.lambda))
}

/// `|Σ_{n≤N} d_n|² / (N+1)`, the overlap with the maximally entangled state
/// on the first `N + 1` levels.
pub fn fidelity_to_phi_n(state: &SchmidtState, n: usize) -> Result<f64> {
    if n > state.n_max() {
        return Err(Error::Domain(format!("N = {n} exceeds n_max = {}", state.n_max())));
    }
    let sum: C64 = state.coeffs()[..=n].iter().sum();
    Ok(sum.norm_sqr() / (n + 1) as f64)
}

/// Effective squeezing `λ exp(φ|αβ| sin φ₀)` of the conditional state in the
/// linear regime.
pub fn effective_lambda(beta: C64, params: &KerrParams) -> f64 {
    params.lambda * (params.phi * params.alpha * beta.im).exp()
}

/// Occupied-ladder scale `−1/(2 ln λ)` of the squeezed vacuum.
pub fn occupation_scale(lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        -0.5 / lambda.ln()
    }
}

/// `|α| n φ`, which must be small for the linearized exponents to hold.
pub fn linearization_figure(params: &KerrParams, n: f64) -> f64 {
    params.alpha * n * params.phi.abs()
}

/// Exact and first-order exponents of the conditional coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearizationReport {
    /// `|αβ| cos(nφ − φ₀)`.
    pub q_exact: Vec<f64>,
    /// `|αβ| sin(nφ − φ₀)`.
    pub phase_exact: Vec<f64>,
    pub q_linear: Vec<f64>,
    pub phase_linear: Vec<f64>,
    pub n_eff: f64,
    /// `|α| n_eff φ`.
    pub validity: f64,
    /// Errors are maximized over `n ≤ n_checked = ⌊5 n_eff⌋`.
    pub n_checked: usize,
    pub max_q_error: f64,
    pub max_phase_error: f64,
}

pub fn linearization_diagnostics(beta: C64, params: &KerrParams) -> LinearizationReport {
    let outcome = Outcome::new(beta);
    let (ar, phi0, phi) = (params.alpha * outcome.modulus(), outcome.phi0(), params.phi);
    let (s0, c0) = phi0.sin_cos();
    let mut report = LinearizationReport {
        q_exact: Vec::with_capacity(params.n_max + 1),
        phase_exact: Vec::with_capacity(params.n_max + 1),
        q_linear: Vec::with_capacity(params.n_max + 1),
        phase_linear: Vec::with_capacity(params.n_max + 1),
        n_eff: occupation_scale(params.lambda),
        validity: 0.0,
        n_checked: 0,
        max_q_error: 0.0,
        max_phase_error: 0.0,
    };
    report.validity = linearization_figure(params, report.n_eff);
    report.n_checked = ((5.0 * report.n_eff).floor() as usize).min(params.n_max);
    for n in 0..=params.n_max {
        let x = n as f64 * phi;
        let (s, c) = (x - phi0).sin_cos();
        report.q_exact.push(ar * c);
        report.phase_exact.push(ar * s);
        report.q_linear.push(ar * c0 + x * ar * s0);
        report.phase_linear.push(-ar * s0 + x * ar * c0);
    }
    for n in 0..=report.n_checked {
        report.max_q_error = report.max_q_error.max((report.q_exact[n] - report.q_linear[n]).abs());
        report.max_phase_error = report.max_phase_error.max((report.phase_exact[n] - report.phase_linear[n]).abs());
    }
    report
}

/// `exp` of the least-squares slope of `ln|d_n|` over `n = 0..=n_upto`.
pub fn fitted_geometric_ratio(state: &SchmidtState, n_upto: usize) -> f64 {
    let pts: Vec<(f64, f64)> = state.coeffs()[..=n_upto.min(state.n_max())]
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(n, z)| (n as f64, z.norm().ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}
