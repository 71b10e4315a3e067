//! Fidelity of coherent-state teleportation through a Schmidt-diagonal channel.
//!
//! With the shared state `Σ d_n |n,n⟩` used as the resource of a unit-gain
//! continuous-variable teleportation, the fidelity for coherent inputs is
//!
//! ```text
//! F = ½ Σ_{m,n} C(m+n, n) d_m d_n* / 2^{m+n}
//! ```
//!
//! Each term is assembled in log space, so the binomials never overflow even
//! for ladders of several thousand levels.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::cavity::{cavity_success_prob_analytic, CavityParams};
use crate::fock::{SchmidtState, MIN_PROBABILITY};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    pub fidelity: f64,
    /// Magnitude of the imaginary part of the double sum (zero up to rounding).
    pub imag_residual: f64,
    /// Number of `(m, n)` pairs with both coefficients non-zero.
    pub terms_used: usize,
}

/// Teleportation fidelity of coherent states through `state`.
///
/// Terms are summed along anti-diagonals `s = m + n` in ascending order, `n`
/// ascending within a diagonal, which fixes the rounding independently of how
/// callers parallelize around it.
pub fn teleport_fidelity(state: &SchmidtState) -> FidelityResult {
    let coeffs = state.coeffs();
    let n_max = state.n_max();
    let ln_fact: Vec<f64> = (0..=2 * n_max as u64).map(ln_factorial).collect();
    let ln2 = std::f64::consts::LN_2;

    let ln_mag: Vec<f64> = coeffs.iter().map(|z| z.norm().ln()).collect();
    let unit: Vec<C64> = coeffs
        .iter()
        .map(|z| {
            let r = z.norm();
            if r > 0.0 {
                z / r
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();

    let mut sum = C64::new(0.0, 0.0);
    let mut terms_used = 0;
    for s in 0..=2 * n_max {
        let lo = s.saturating_sub(n_max);
        let hi = s.min(n_max);
        let diag = ln_fact[s] - s as f64 * ln2;
        for n in lo..=hi {
            let m = s - n;
            if ln_mag[m] == f64::NEG_INFINITY || ln_mag[n] == f64::NEG_INFINITY {
                continue;
            }
            let ln_term = diag - ln_fact[n] - ln_fact[m] + ln_mag[m] + ln_mag[n];
            sum += unit[m] * unit[n].conj() * ln_term.exp();
            terms_used += 1;
        }
    }
    FidelityResult { fidelity: 0.5 * sum.re, imag_residual: 0.5 * sum.im.abs(), terms_used }
}

/// Closed-form teleportation fidelity through the cavity-filtered squeezed
/// vacuum (untruncated ladder, reduced angles).
pub fn cavity_teleport_fidelity_analytic(lambda: f64, phi: f64, phi0: f64) -> Result<f64> {
    let params = CavityParams::new(lambda, phi, phi0)?;
    let p = cavity_success_prob_analytic(&params);
    if !(p >= MIN_PROBABILITY) {
        return Err(Error::ZeroProbability(p));
    }
    let (lambda, phi, phi0) = (params.lambda(), params.phi(), params.phi0());
    let ch = (phi / 2.0).cos();
    let first = 1.0 / (1.0 - lambda * ch);
    let second = (phi0.cos() - lambda * (phi / 2.0 + phi0).cos()) / (1.0 - 2.0 * lambda * ch + lambda * lambda);
    Ok((1.0 - lambda * lambda) / (4.0 * p) * (first - second))
}
