//! Schmidt-diagonal two-mode states `Σ d_n |n,n⟩` on a truncated Fock ladder.
//!
//! Every state handled by this crate is pure and diagonal in the joint Fock
//! basis, so it is fully described by the vector of Schmidt coefficients
//! `d_0..=d_{n_max}`. Local conditional operations that act diagonally in the
//! Fock basis of one mode ([`DiagonalFilter`]) keep that structure and only
//! reweight the coefficients.
//!
//! Truncated states are always renormalized over the kept ladder; the discarded
//! probability mass is carried along in [`SchmidtState::tail_mass`] so the
//! truncation error stays auditable.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{format_float, Error, Result, C64};

/// Probabilities below this are treated as zero.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// Truncation and normalization tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Largest probability mass allowed beyond the truncated ladder.
    pub tail_mass: f64,
    /// Allowed deviation of `Σ|d_n|²` from one.
    pub norm_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { tail_mass: 1e-20, norm_tol: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(tail_mass: f64, norm_tol: f64) -> Result<Self> {
        for (name, v) in [("tail_mass", tail_mass), ("norm_tol", norm_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(Self { tail_mass, norm_tol })
    }
}

/// Normalized Schmidt coefficients of a two-mode state `Σ d_n |n,n⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRepr", try_from = "StateRepr")]
pub struct SchmidtState {
    coeffs: Vec<C64>,
    lambda_meta: Option<f64>,
    tail_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_meta: Option<f64>,
    coeffs: Vec<[f64; 2]>,
}

impl From<SchmidtState> for StateRepr {
    fn from(s: SchmidtState) -> Self {
        Self {
            lambda_meta: s.lambda_meta,
            coeffs: s.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<StateRepr> for SchmidtState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let coeffs = r.coeffs.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        let mut state = SchmidtState::new(coeffs)?;
        state.lambda_meta = r.lambda_meta;
        Ok(state)
    }
}

impl SchmidtState {
    /// Wraps coefficients that are already normalized (within the default
    /// `norm_tol`).
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        check_coeffs(&coeffs)?;
        let norm = norm_sqr(&coeffs);
        if (norm - 1.0).abs() > Tolerance::default().norm_tol {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { coeffs, lambda_meta: None, tail_mass: 0.0 })
    }

    /// Normalizes arbitrary coefficients, returning the state and the squared
    /// norm of the input.
    pub fn normalize(coeffs: Vec<C64>) -> Result<(Self, f64)> {
        check_coeffs(&coeffs)?;
        let norm = norm_sqr(&coeffs);
        if !(norm >= MIN_PROBABILITY) {
            return Err(Error::ZeroProbability(norm));
        }
        let scale = norm.sqrt();
        let coeffs = coeffs.into_iter().map(|z| z / scale).collect();
        Ok((Self { coeffs, lambda_meta: None, tail_mass: 0.0 }, norm))
    }

    /// Builds a state from log-magnitudes and phases. The largest finite
    /// log-magnitude is subtracted before exponentiation; `-inf` entries give
    /// exact zeros.
    pub fn from_log_polar(ln_mag: &[f64], phase: &[f64]) -> Result<Self> {
        if ln_mag.len() != phase.len() {
            return Err(Error::LengthMismatch { state: ln_mag.len(), filter: phase.len() });
        }
        let peak = ln_mag.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::ZeroProbability(0.0));
        }
        let coeffs = ln_mag
            .iter()
            .zip(phase)
            .map(|(&l, &p)| {
                if l == f64::NEG_INFINITY {
                    C64::new(0.0, 0.0)
                } else if p == 0.0 {
                    C64::new((l - peak).exp(), 0.0)
                } else {
                    C64::from_polar((l - peak).exp(), p)
                }
            })
            .collect();
        Ok(Self::normalize(coeffs)?.0)
    }

    /// The product state `|0,0⟩` on a ladder of `n_max + 1` levels.
    pub fn vacuum(n_max: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n_max + 1];
        coeffs[0] = C64::new(1.0, 0.0);
        Self { coeffs, lambda_meta: Some(0.0), tail_mass: 0.0 }
    }

    /// `|Φ_N⟩ = Σ_{n≤N} |n,n⟩ / √(N+1)`, padded with zeros up to `n_max`.
    pub fn maximally_entangled(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::Domain(format!("N = {n} exceeds n_max = {n_max}")));
        }
        let amp = ((n + 1) as f64).sqrt().recip();
        let coeffs = (0..=n_max)
            .map(|k| if k <= n { C64::new(amp, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        Ok(Self { coeffs, lambda_meta: None, tail_mass: 0.0 })
    }

    pub fn with_tail_mass(mut self, tail_mass: f64) -> Self {
        self.tail_mass = tail_mass;
        self
    }

    pub fn with_lambda_meta(mut self, lambda: Option<f64>) -> Self {
        self.lambda_meta = lambda;
        self
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Squeezing parameter this state was generated from, if any.
    pub fn lambda_meta(&self) -> Option<f64> {
        self.lambda_meta
    }

    /// Probability mass discarded by truncating the ladder (an upper bound
    /// for filtered states).
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Photon-number distribution `|d_n|²` of either reduced mode.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.coeffs)
    }

    /// Largest coefficient-wise distance to another state of equal length.
    pub fn max_abs_diff(&self, other: &SchmidtState) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or_default();
                let b = other.coeffs.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// CSV table with columns `n, re, im, abs2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im,abs2\n");
        for (n, z) in self.coeffs.iter().enumerate() {
            let _ = writeln!(
                out,
                "{n},{},{},{}",
                format_float(z.re),
                format_float(z.im),
                format_float(z.norm_sqr())
            );
        }
        out
    }
}

fn check_coeffs(coeffs: &[C64]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::Domain("a state needs at least one Fock level".into()));
    }
    if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("non-finite Schmidt coefficient".into()));
    }
    Ok(())
}

fn norm_sqr(coeffs: &[C64]) -> f64 {
    coeffs.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues `A_n` of a conditional operation `Σ A_n |n⟩⟨n|` on Alice's mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalFilter {
    values: Vec<C64>,
}

impl DiagonalFilter {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        check_coeffs(&values)?;
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn identity(n_max: usize) -> Self {
        Self { values: vec![C64::new(1.0, 0.0); n_max + 1] }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `max_n |A_n|`.
    pub fn scale(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The filter divided by its largest eigenvalue magnitude when that
    /// exceeds one, so that it describes a physical (trace non-increasing)
    /// conditional map. Physical filters are returned unchanged.
    pub fn canonical(&self) -> DiagonalFilter {
        let scale = self.scale();
        if scale > 1.0 {
            Self { values: self.values.iter().map(|z| z / scale).collect() }
        } else {
            self.clone()
        }
    }
}

/// Smallest `N` with `λ^{2(N+1)} ≤ tail_mass`.
pub fn default_n_max(lambda: f64, tail_mass: f64) -> Result<usize> {
    if lambda == 0.0 {
        return Ok(0);
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    if !(tail_mass > 0.0 && tail_mass < 1.0) {
        return Err(Error::Domain(format!("tail mass must lie in (0, 1), got {tail_mass}")));
    }
    let guess = (tail_mass.ln() / (2.0 * lambda.ln())).ceil() - 1.0;
    let mut n = guess.max(0.0) as usize;
    while truncation_tail(lambda, n) > tail_mass {
        n += 1;
    }
    while n > 0 && truncation_tail(lambda, n - 1) <= tail_mass {
        n -= 1;
    }
    Ok(n)
}

/// Mass `λ^{2(n_max+1)}` of a two-mode squeezed vacuum beyond `n_max`.
pub fn truncation_tail(lambda: f64, n_max: usize) -> f64 {
    let exponent = n_max + 1;
    if exponent <= i32::MAX as usize {
        (lambda * lambda).powi(exponent as i32)
    } else {
        (lambda * lambda).powf(exponent as f64)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    Ok(())
}

/// Two-mode squeezed vacuum `c_n = √(1−λ²) λⁿ`, renormalized over
/// `0..=n_max`.
pub fn tmsv_state(lambda: f64, n_max: usize, tol: &Tolerance) -> Result<SchmidtState> {
    check_lambda(lambda)?;
    let tail = truncation_tail(lambda, n_max);
    if tail > tol.tail_mass {
        return Err(Error::Truncation {
            tail_mass: tail,
            tolerance: tol.tail_mass,
            suggested_n_max: default_n_max(lambda, tol.tail_mass)?,
        });
    }
    let ln_mag = tmsv_log_magnitudes(lambda, n_max);
    let phase = vec![0.0; n_max + 1];
    Ok(SchmidtState::from_log_polar(&ln_mag, &phase)?
        .with_tail_mass(tail)
        .with_lambda_meta(Some(lambda)))
}

/// Two-mode squeezed vacuum on the default ladder for `tol.tail_mass`.
pub fn tmsv_state_default(lambda: f64, tol: &Tolerance) -> Result<SchmidtState> {
    check_lambda(lambda)?;
    tmsv_state(lambda, default_n_max(lambda, tol.tail_mass)?, tol)
}

/// `n ln λ`, the unnormalized log-magnitudes shared by every state derived
/// from the squeezed vacuum.
pub(crate) fn tmsv_log_magnitudes(lambda: f64, n_max: usize) -> Vec<f64> {
    let ln_lambda = lambda.ln();
    (0..=n_max)
        .map(|n| if n == 0 { 0.0 } else if lambda == 0.0 { f64::NEG_INFINITY } else { n as f64 * ln_lambda })
        .collect()
}

/// Applies `A ⊗ 1` to the state. Returns the normalized output and the
/// success probability `Σ|A_n d_n|²` of the canonical (rescaled) filter.
pub fn apply_filter(state: &SchmidtState, filter: &DiagonalFilter) -> Result<(SchmidtState, f64)> {
    if state.len() != filter.values.len() {
        return Err(Error::LengthMismatch { state: state.len(), filter: filter.values.len() });
    }
    let filter = filter.canonical();
    let out: Vec<C64> = state.coeffs.iter().zip(&filter.values).map(|(d, a)| d * a).collect();
    let (out, prob) = SchmidtState::normalize(out)?;
    let tail = state.tail_mass / prob;
    Ok((out.with_tail_mass(tail), prob))
}

/// Entanglement entropy `−Σ|d_n|² ln|d_n|²` in nats.
pub fn von_neumann_entropy(state: &SchmidtState) -> f64 {
    let s: f64 = state
        .coeffs
        .iter()
        .map(|z| z.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// Closed-form entropy of the untruncated squeezed vacuum.
pub fn tmsv_entropy_analytic(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let l2 = lambda * lambda;
    Ok(-(-l2).ln_1p() - l2 / (1.0 - l2) * l2.ln())
}

/// Linear phase ramp `offset + slope·n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRamp {
    pub offset: f64,
    pub slope: f64,
}

impl PhaseRamp {
    pub fn at(&self, n: usize) -> f64 {
        self.offset + self.slope * n as f64
    }
}

/// Fits the linear phase ramp that best rotates the coefficients onto the
/// positive real axis.
///
/// The fit is circular and runs on the doubled phases `arg d_n²`, so sign
/// changes of otherwise real coefficients do not disturb it: the slope comes
/// from `arg Σ d_{n+1}² conj(d_n²)` and the offset from the residual mean
/// phase, both weighted by the coefficient magnitudes. Of the four ramps that
/// fit the doubled phases equally well (slope and offset are only fixed
/// modulo π) the one maximizing `Σ Re(d_n e^{-iθ_n})` is returned. For phases
/// that are exactly linear this is the ramp making every coefficient real
/// and non-negative.
pub fn fit_phase_ramp(state: &SchmidtState) -> PhaseRamp {
    let sq: Vec<C64> = state.coeffs.iter().map(|z| z * z).collect();
    let s: C64 = sq.windows(2).map(|w| w[1] * w[0].conj()).sum();
    let slope2 = if s.norm() > 0.0 { s.arg() } else { 0.0 };
    let g: C64 = sq
        .iter()
        .enumerate()
        .map(|(n, u)| u * C64::from_polar(1.0, -slope2 * n as f64))
        .sum();
    let offset2 = if g.norm() > 0.0 { g.arg() } else { 0.0 };
    let mut ramp = PhaseRamp { offset: offset2 / 2.0, slope: slope2 / 2.0 };

    let rotated = remove_ramp(&state.coeffs, &ramp);
    let plain: f64 = rotated.iter().map(|z| z.re).sum();
    let alternating: f64 = rotated
        .iter()
        .enumerate()
        .map(|(n, z)| if n % 2 == 0 { z.re } else { -z.re })
        .sum();
    let sign = if alternating.abs() > plain.abs() {
        ramp.slope += PI;
        alternating
    } else {
        plain
    };
    if sign < 0.0 {
        ramp.offset += PI;
    }
    PhaseRamp { offset: wrap_angle(ramp.offset), slope: wrap_angle(ramp.slope) }
}

fn remove_ramp(coeffs: &[C64], ramp: &PhaseRamp) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let theta = ramp.at(n);
            if theta == 0.0 {
                *z
            } else {
                z * C64::from_polar(1.0, -theta)
            }
        })
        .collect()
}

/// Removes the global phase and the fitted linear phase ramp (see
/// [`fit_phase_ramp`]). Exactly linear phases yield real non-negative
/// coefficients; any non-linear residual phase is kept.
pub fn canonicalize_phase(state: &SchmidtState) -> SchmidtState {
    let ramp = fit_phase_ramp(state);
    SchmidtState { coeffs: remove_ramp(&state.coeffs, &ramp), ..state.clone() }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}
