//! Concentration with a Rydberg atom crossing a Ramsey interferometer.
//!
//! The atom is prepared in `(|g⟩ + e^{iφ₀}|e⟩)/√2`, picks up the phase
//! `e^{-inφ}` in `|e⟩` while Alice's cavity mode holds `n` photons, and is
//! rotated by a second π/2 pulse. Detecting `|g⟩` heralds success and acts on
//! the field as the diagonal filter `A_n = sin((nφ − φ₀)/2)` (up to a global
//! phase and a linear phase ramp that a local phase shift removes).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::fock::{tmsv_log_magnitudes, truncation_tail, wrap_angle, DiagonalFilter, SchmidtState};
use crate::{Error, Result, C64};

/// Squeezing of the input state, single-photon phase shift `φ = κt` and
/// Ramsey preparation phase `φ₀`. Angles are stored reduced to `(−π, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityParams {
    lambda: f64,
    phi: f64,
    phi0: f64,
}

impl CavityParams {
    pub fn new(lambda: f64, phi: f64, phi0: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
        }
        if !phi.is_finite() || !phi0.is_finite() {
            return Err(Error::Domain("phases must be finite".into()));
        }
        Ok(Self { lambda, phi: wrap_angle(phi), phi0: wrap_angle(phi0) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    fn amplitude(&self, n: usize) -> f64 {
        ((n as f64 * self.phi - self.phi0) / 2.0).sin()
    }
}

/// Field amplitudes correlated with each atomic level after the second Ramsey
/// zone.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomFieldState {
    pub g_branch: Vec<C64>,
    pub e_branch: Vec<C64>,
}

impl AtomFieldState {
    /// Probability of finding the atom in `|g⟩`.
    pub fn ground_probability(&self) -> f64 {
        self.g_branch.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn total_norm_sqr(&self) -> f64 {
        self.ground_probability() + self.e_branch.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Conditional two-mode state after detecting `|g⟩`.
    pub fn project_ground(&self) -> Result<SchmidtState> {
        Ok(SchmidtState::normalize(self.g_branch.clone())?.0)
    }

    /// Conditional two-mode state after detecting `|e⟩` (the failure branch).
    pub fn project_excited(&self) -> Result<SchmidtState> {
        Ok(SchmidtState::normalize(self.e_branch.clone())?.0)
    }
}

/// `A_n = sin((nφ − φ₀)/2)` for `n = 0..=n_max`.
pub fn cavity_filter(params: &CavityParams, n_max: usize) -> DiagonalFilter {
    let values: Vec<f64> = (0..=n_max).map(|n| params.amplitude(n)).collect();
    DiagonalFilter::from_real(&values).expect("sine amplitudes are finite")
}

/// Photon number `(π + φ₀)/φ` at which the filter amplitude peaks.
pub fn peak_index(params: &CavityParams) -> f64 {
    (PI + params.phi0) / params.phi
}

/// Real output coefficients `d_n ∝ λⁿ sin((nφ − φ₀)/2)` and the success
/// probability summed over the truncated ladder.
///
/// The signs of the sine are kept: the teleportation fidelity depends on them.
pub fn cavity_schmidt(params: &CavityParams, n_max: usize) -> Result<(SchmidtState, f64)> {
    let norm = (1.0 - params.lambda * params.lambda).sqrt();
    let coeffs: Vec<C64> = tmsv_log_magnitudes(params.lambda, n_max)
        .into_iter()
        .enumerate()
        .map(|(n, ln_c)| C64::new(norm * ln_c.exp() * params.amplitude(n), 0.0))
        .collect();
    let (state, prob) = SchmidtState::normalize(coeffs)?;
    let tail = truncation_tail(params.lambda, n_max) / prob;
    Ok((state.with_tail_mass(tail), prob))
}

/// Closed-form success probability over the untruncated ladder.
pub fn cavity_success_prob_analytic(params: &CavityParams) -> f64 {
    let l2 = params.lambda * params.lambda;
    let (phi, phi0) = (params.phi, params.phi0);
    let ratio = (phi0.cos() - l2 * (phi + phi0).cos()) / (1.0 - 2.0 * l2 * phi.cos() + l2 * l2);
    0.5 - (1.0 - l2) / 2.0 * ratio
}

/// Runs the atom through preparation, dispersive coupling and the final π/2
/// rotation, one photon-number sector at a time.
pub fn evolve_atom_field(params: &CavityParams, n_max: usize) -> AtomFieldState {
    let ln_c = tmsv_log_magnitudes(params.lambda, n_max);
    let zeros = vec![0.0; n_max + 1];
    let field = SchmidtState::from_log_polar(&ln_c, &zeros).expect("vacuum amplitude is non-zero");

    let prepared = [C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, params.phi0)];
    // |g⟩ → (|g⟩ + |e⟩)/√2, |e⟩ → (|e⟩ − |g⟩)/√2
    let rotation = [[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]];

    let mut g_branch = Vec::with_capacity(n_max + 1);
    let mut e_branch = Vec::with_capacity(n_max + 1);
    for (n, c) in field.coeffs().iter().enumerate() {
        let shifted = [prepared[0], prepared[1] * C64::from_polar(1.0, -(n as f64) * params.phi)];
        let g = shifted[0] * rotation[0][0] + shifted[1] * rotation[0][1];
        let e = shifted[0] * rotation[1][0] + shifted[1] * rotation[1][1];
        g_branch.push(c * g);
        e_branch.push(c * e);
    }
    AtomFieldState { g_branch, e_branch }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_filter, canonicalize_phase, default_n_max, tmsv_state, von_neumann_entropy, Tolerance};

    fn n_max(lambda: f64) -> usize {
        default_n_max(lambda, 1e-20).unwrap()
    }

    #[test]
    fn angles_are_reduced() {
        let p = CavityParams::new(0.5, 3.0 * PI, -PI).unwrap();
        assert!((p.phi() - PI).abs() < 1e-15);
        assert!((p.phi0() - PI).abs() < 1e-15);
        assert!(CavityParams::new(1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn filter_examples() {
        let f = cavity_filter(&CavityParams::new(0.5, 0.0, PI).unwrap(), 8);
        assert!(f.values().iter().all(|a| (a.re + 1.0).abs() < 1e-15));
        let f = cavity_filter(&CavityParams::new(0.5, PI / 10.0, 0.0).unwrap(), 12);
        assert!((f.values()[10].re - 1.0).abs() < 1e-15);
        assert!(f.scale() <= 1.0);

        let p = CavityParams::new(0.5, PI / 10.0, -PI / 10.0).unwrap();
        assert!((peak_index(&p) - 9.0).abs() < 1e-12);
        let f = cavity_filter(&p, 20);
        assert!((f.values()[9].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_filter_keeps_everything() {
        let p = CavityParams::new(0.5, 0.0, PI).unwrap();
        let state = tmsv_state(0.5, n_max(0.5), &Tolerance::default()).unwrap();
        let (_, prob) = apply_filter(&state, &cavity_filter(&p, n_max(0.5))).unwrap();
        assert!((prob - 1.0).abs() < 1e-15);
        assert!((cavity_success_prob_analytic(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn headline_success_probability() {
        let p = CavityParams::new(0.5, PI / 10.0, -PI / 10.0).unwrap();
        let (state, prob) = cavity_schmidt(&p, n_max(0.5)).unwrap();
        assert!((prob - 0.05).abs() < 5e-3);
        assert!((cavity_success_prob_analytic(&p) - 0.05).abs() < 5e-3);
        assert!(von_neumann_entropy(&state) > 0.75);
    }

    #[test]
    fn vacuum_input() {
        for phi0 in [0.4, -1.3, 2.9] {
            let p = CavityParams::new(0.0, 0.7, phi0).unwrap();
            let (state, prob) = cavity_schmidt(&p, 5).unwrap();
            assert!((state.coeffs()[0].norm() - 1.0).abs() < 1e-15);
            assert!((prob - (phi0 / 2.0).sin().powi(2)).abs() < 1e-15);
            assert!((cavity_success_prob_analytic(&p) - (phi0 / 2.0).sin().powi(2)).abs() < 1e-15);
        }
        let dead = CavityParams::new(0.0, 0.7, 0.0).unwrap();
        assert!(matches!(cavity_schmidt(&dead, 5), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn zero_coupling_probability() {
        // φ = 0 leaves the uniform factor sin²(φ₀/2) for every n
        for lambda in [0.2, 0.5, 0.9] {
            for phi0 in [-2.0, 0.3, 1.7] {
                let p = CavityParams::new(lambda, 0.0, phi0).unwrap();
                let oracle: f64 = (0..=n_max(lambda))
                    .map(|n| (1.0 - lambda * lambda) * lambda.powi(2 * n as i32) * (phi0 / 2.0).sin().powi(2))
                    .sum();
                assert!((cavity_success_prob_analytic(&p) - (1.0 - phi0.cos()) / 2.0).abs() < 1e-14);
                assert!((cavity_success_prob_analytic(&p) - oracle).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn analytic_probability_matches_sum() {
        for lambda in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for i in 0..20 {
                for j in 0..20 {
                    let phi = -PI + (i as f64 + 0.5) * PI / 10.0;
                    let phi0 = -PI + (j as f64 + 0.5) * PI / 10.0;
                    let p = CavityParams::new(lambda, phi, phi0).unwrap();
                    let (_, numeric) = cavity_schmidt(&p, n_max(lambda)).unwrap();
                    assert!((numeric - cavity_success_prob_analytic(&p)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ramsey_evolution_matches_closed_form_branches() {
        let p = CavityParams::new(0.5, 0.37, -1.1).unwrap();
        let n = n_max(0.5);
        let atom = evolve_atom_field(&p, n);
        let c = tmsv_state(0.5, n, &Tolerance::default()).unwrap();
        for k in 0..=n {
            let rel = C64::from_polar(1.0, p.phi0() - k as f64 * p.phi());
            let g = 0.5 * c.coeffs()[k] * (1.0 - rel);
            let e = 0.5 * c.coeffs()[k] * (1.0 + rel);
            assert!((atom.g_branch[k] - g).norm() < 1e-15);
            assert!((atom.e_branch[k] - e).norm() < 1e-15);
        }
        assert!((atom.total_norm_sqr() - 1.0).abs() < 1e-12);
        assert!((atom.ground_probability() - cavity_success_prob_analytic(&p)).abs() < 1e-12);
    }

    #[test]
    fn no_phases_means_atom_always_excited() {
        let atom = evolve_atom_field(&CavityParams::new(0.5, 0.0, 0.0).unwrap(), 10);
        assert!(atom.g_branch.iter().all(|z| z.norm() == 0.0));
        assert!(atom.project_ground().is_err());
        assert!(atom.project_excited().is_ok());
    }

    #[test]
    fn three_routes_agree() {
        let p = CavityParams::new(0.5, PI / 10.0, -PI / 10.0).unwrap();
        let n = n_max(0.5);
        let evolved = canonicalize_phase(&evolve_atom_field(&p, n).project_ground().unwrap());
        let input = tmsv_state(0.5, n, &Tolerance::default()).unwrap();
        let filtered = canonicalize_phase(&apply_filter(&input, &cavity_filter(&p, n)).unwrap().0);
        let closed = canonicalize_phase(&cavity_schmidt(&p, n).unwrap().0);
        assert!(evolved.max_abs_diff(&filtered) < 1e-12);
        assert!(filtered.max_abs_diff(&closed) < 1e-12);
        assert!(closed.max_abs_diff(&evolved) < 1e-12);
    }

    #[test]
    fn phase_periodicity() {
        let base = CavityParams::new(0.5, 0.4, -0.6).unwrap();
        let shifted = CavityParams::new(0.5, 0.4, -0.6 + 2.0 * PI).unwrap();
        let far = CavityParams::new(0.5, 0.4, -0.6 + 4.0 * PI).unwrap();
        assert!((cavity_success_prob_analytic(&base) - cavity_success_prob_analytic(&shifted)).abs() < 1e-14);
        let (a, _) = cavity_schmidt(&base, 33).unwrap();
        let (b, _) = cavity_schmidt(&shifted, 33).unwrap();
        let (c, _) = cavity_schmidt(&far, 33).unwrap();
        for ((x, y), z) in a.coeffs().iter().zip(b.coeffs()).zip(c.coeffs()) {
            assert!((x.norm() - y.norm()).abs() < 1e-14);
            assert!((x - z).norm() < 1e-14);
        }
    }
}
