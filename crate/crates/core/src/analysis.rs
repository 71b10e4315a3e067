//! Parameter scans and the phase optimization for both schemes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::cavity::{cavity_schmidt, cavity_success_prob_analytic, CavityParams};
use crate::fock::{default_n_max, von_neumann_entropy, wrap_angle, Tolerance};
use crate::kerr::{scan_grid, GridScan, GridSpec, KerrParams, RegionSummary};
use crate::teleport::cavity_teleport_fidelity_analytic;
use crate::{format_float, Error, Result};

/// Named series sampled on a common axis. Undefined points (zero success
/// probability) are stored as NaN and written as `NaN` in CSV, `null` in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
    /// Axis value at which the sweep stopped early, if it did.
    pub truncated_at: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    fn new(axis_name: &str, axis_values: Vec<f64>, series: Vec<(&str, Vec<f64>)>) -> Self {
        debug_assert!(series.iter().all(|(_, v)| v.len() == axis_values.len()));
        Self {
            axis_name: axis_name.to_string(),
            axis_values,
            series: series.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            truncated_at: None,
            warnings: Vec::new(),
        }
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_slice())
    }

    /// CSV with the axis first and the given series (all when `columns` is
    /// empty) in order.
    pub fn to_csv(&self, columns: &[&str]) -> Result<String> {
        let cols: Vec<(&str, &[f64])> = if columns.is_empty() {
            self.series.iter().map(|(k, v)| (k.as_str(), v.as_slice())).collect()
        } else {
            columns
                .iter()
                .map(|&c| self.series(c).map(|v| (c, v)).ok_or_else(|| Error::Format(format!("no series named {c}"))))
                .collect::<Result<_>>()?
        };
        let mut out = self.axis_name.clone();
        for (name, _) in &cols {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, x) in self.axis_values.iter().enumerate() {
            out.push_str(&format_float(*x));
            for (_, v) in &cols {
                out.push(',');
                out.push_str(&format_float(v[i]));
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let series: BTreeMap<&str, &Vec<f64>> = self.series.iter().map(|(k, v)| (k.as_str(), v)).collect();
        json!({
            "axis": self.axis_name,
            "values": self.axis_values,
            "series": series,
            "truncated_at": self.truncated_at,
            "warnings": self.warnings,
        })
    }
}

/// `steps` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { hi } else { lo + i as f64 * h }).collect()
}

/// Success probability, output entropy and teleportation fidelity of the
/// cavity scheme as functions of the preparation phase.
pub fn sweep_cavity_phi0(lambda: f64, phi: f64, phi0_range: (f64, f64), steps: usize) -> Result<SweepResult> {
    sweep_cavity_phi0_with(lambda, phi, phi0_range, steps, None)
}

/// As [`sweep_cavity_phi0`] with an explicit ladder for the entropy.
pub fn sweep_cavity_phi0_with(
    lambda: f64,
    phi: f64,
    phi0_range: (f64, f64),
    steps: usize,
    n_max: Option<usize>,
) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::Domain(format!("a sweep needs at least 2 points, got {steps}")));
    }
    CavityParams::new(lambda, phi, 0.0)?;
    let n_max = match n_max {
        Some(n) => n,
        None => default_n_max(lambda, Tolerance::default().tail_mass)?,
    };
    let axis = linspace(phi0_range.0, phi0_range.1, steps);
    let rows = axis
        .par_iter()
        .map(|&phi0| {
            let params = CavityParams::new(lambda, phi, phi0)?;
            let p = cavity_success_prob_analytic(&params);
            let entropy = match cavity_schmidt(&params, n_max) {
                Ok((state, _)) => von_neumann_entropy(&state),
                Err(Error::ZeroProbability(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            let fidelity = match cavity_teleport_fidelity_analytic(lambda, phi, phi0) {
                Ok(f) => f,
                Err(Error::ZeroProbability(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok((p, entropy, fidelity))
        })
        .collect::<Result<Vec<_>>>()?;
    let p = rows.iter().map(|r| r.0).collect();
    let s = rows.iter().map(|r| r.1).collect();
    let f = rows.iter().map(|r| r.2).collect();
    Ok(SweepResult::new("phi0", axis, vec![("P", p), ("S", s), ("F", f)]))
}

/// Best preparation phase for the cavity scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimumReport {
    pub phi0_star: f64,
    pub fidelity_star: f64,
    pub probability_at_star: f64,
    pub evaluations: usize,
}

/// Maximizes the closed-form teleportation fidelity over `φ₀`: a scan at
/// spacing π/200 followed by golden-section refinement to 1e-6.
pub fn optimize_phi0(lambda: f64, phi: f64) -> Result<OptimumReport> {
    optimize_phi0_with(lambda, phi, PI / 200.0)
}

pub fn optimize_phi0_with(lambda: f64, phi: f64, scan_step: f64) -> Result<OptimumReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(scan_step > 0.0 && scan_step < PI) {
        return Err(Error::Domain(format!("scan step must lie in (0, π), got {scan_step}")));
    }
    CavityParams::new(lambda, phi, 0.0)?;
    let objective = |phi0: f64| cavity_teleport_fidelity_analytic(lambda, phi, phi0).unwrap_or(f64::NEG_INFINITY);

    let count = (2.0 * PI / scan_step).round() as usize;
    let h = 2.0 * PI / count as f64;
    let mut evaluations = 0;
    let (mut best_x, mut best_f) = (PI, f64::NEG_INFINITY);
    for k in 1..=count {
        let x = -PI + k as f64 * h;
        let f = objective(x);
        evaluations += 1;
        if f > best_f {
            best_x = x;
            best_f = f;
        }
    }
    if best_f == f64::NEG_INFINITY {
        return Err(Error::ZeroProbability(0.0));
    }

    let (x, f, used) = golden_section_max(objective, best_x - h, best_x + h, 1e-6);
    evaluations += used;
    let (phi0_star, fidelity_star) = if f >= best_f { (wrap_angle(x), f) } else { (best_x, best_f) };
    let params = CavityParams::new(lambda, phi, phi0_star)?;
    Ok(OptimumReport {
        phi0_star,
        fidelity_star,
        probability_at_star: cavity_success_prob_analytic(&params),
        evaluations,
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`; returns the
/// point, its value and the number of evaluations.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, usize) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evaluations = 2;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    (x, fx, evaluations + 1)
}

/// Success probability and averaged figures of merit of the Kerr scheme as
/// functions of the acceptance threshold `ΔF`.
pub fn sweep_kerr_threshold(params: &KerrParams, grid: &GridSpec, delta_f_values: &[f64]) -> Result<SweepResult> {
    check_thresholds(delta_f_values)?;
    Ok(sweep_scan(&scan_grid(params, grid)?, delta_f_values)?.0)
}

fn check_thresholds(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Domain("threshold list is empty".into()));
    }
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain("thresholds must be sorted ascending".into()));
    }
    Ok(())
}

/// Threshold sweep over an existing scan. Stops at the first empty region
/// and records it as a warning.
pub fn sweep_scan(scan: &GridScan, delta_f_values: &[f64]) -> Result<(SweepResult, Vec<RegionSummary>)> {
    check_thresholds(delta_f_values)?;
    let mut summaries = Vec::new();
    let mut truncated_at = None;
    let mut warnings = Vec::new();
    for &df in delta_f_values {
        match scan.summarize(df) {
            Ok(s) => summaries.push(s),
            Err(Error::EmptyRegion { max_fidelity }) => {
                truncated_at = Some(df);
                warnings.push(format!(
                    "no outcome reaches F0 + {df} (max F = {max_fidelity}); sweep stopped at delta_F = {df}"
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let axis = summaries.iter().map(|s| s.delta_f).collect();
    let mut sweep = SweepResult::new(
        "delta_F",
        axis,
        vec![
            ("avg_F", summaries.iter().map(|s| s.avg_f).collect()),
            ("P_omega", summaries.iter().map(|s| s.p_omega).collect()),
            ("F_teleport", summaries.iter().map(|s| s.avg_f_teleport).collect()),
        ],
    );
    sweep.truncated_at = truncated_at;
    sweep.warnings = warnings;
    Ok((sweep, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::cavity_schmidt;
    use crate::teleport::teleport_fidelity;

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx, n) = golden_section_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx <= 0.0 && fx > -1e-16);
        assert!(n > 10 && n < 100);
    }

    #[test]
    fn cavity_optimum_headline() {
        let r = optimize_phi0(0.5, PI / 10.0).unwrap();
        assert!((r.phi0_star + PI / 10.0).abs() < 0.05, "{r:?}");
        assert!((r.fidelity_star - 0.837).abs() < 5e-3);
        assert!((r.probability_at_star - 0.05).abs() < 5e-3);
        for eps in [1e-4, -1e-4] {
            assert!(cavity_teleport_fidelity_analytic(0.5, PI / 10.0, r.phi0_star + eps).unwrap() <= r.fidelity_star);
        }
        let h = PI / 200.0;
        for x in [r.phi0_star - h, r.phi0_star + h] {
            assert!(cavity_teleport_fidelity_analytic(0.5, PI / 10.0, x).unwrap() <= r.fidelity_star);
        }
    }

    #[test]
    fn optimum_is_scan_robust() {
        let a = optimize_phi0_with(0.5, PI / 10.0, PI / 200.0).unwrap();
        let b = optimize_phi0_with(0.5, PI / 10.0, PI / 400.0).unwrap();
        assert!((a.phi0_star - b.phi0_star).abs() < 1e-4);
    }

    #[test]
    fn optimum_agrees_with_numeric_channel() {
        let r = optimize_phi0(0.5, PI / 10.0).unwrap();
        let params = CavityParams::new(0.5, PI / 10.0, r.phi0_star).unwrap();
        let (state, _) = cavity_schmidt(&params, 40).unwrap();
        assert!((teleport_fidelity(&state).fidelity - r.fidelity_star).abs() < 1e-8);
    }

    #[test]
    fn cavity_sweep_shape() {
        let sweep = sweep_cavity_phi0(0.5, PI / 10.0, (-PI, PI), 401).unwrap();
        assert_eq!(sweep.axis_values.len(), 401);
        assert!(sweep.series("S").unwrap().iter().any(|&s| s > 0.75));
        let f = sweep.series("F").unwrap();
        let (i, fmax) = f.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        assert!((fmax - 0.837).abs() < 5e-3);
        assert!((sweep.axis_values[i] + PI / 10.0).abs() < 0.05);
        assert!(optimize_phi0(0.0, 0.3).is_err());
    }

    #[test]
    fn product_input_has_no_entropy() {
        let sweep = sweep_cavity_phi0(0.0, PI / 10.0, (-PI, PI), 41).unwrap();
        for (s, p) in sweep.series("S").unwrap().iter().zip(sweep.series("P").unwrap()) {
            if *p > 0.0 {
                assert_eq!(*s, 0.0);
            } else {
                assert!(s.is_nan());
            }
        }
    }

    #[test]
    fn csv_and_json_layout() {
        let mut sweep = SweepResult::new("x", vec![0.0, 1.0], vec![("a", vec![1.5, f64::NAN]), ("b", vec![2.0, 3.0])]);
        let csv = sweep.to_csv(&["b"]).unwrap();
        assert_eq!(csv, "x,b\n0.0000000000000000e0,2.0000000000000000e0\n1.0000000000000000e0,3.0000000000000000e0\n");
        assert!(sweep.to_csv(&[]).unwrap().contains(",NaN,"));
        assert!(sweep.to_csv(&["c"]).is_err());
        sweep.truncated_at = Some(1.0);
        let text = serde_json::to_string(&sweep.to_json()).unwrap();
        assert!(text.contains("\"a\":[1.5,null]"));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn kerr_threshold_validation() {
        let p = KerrParams::new(0.5, 10.0, PI / 100.0, 10, 70).unwrap();
        let g = GridSpec::new(4.0, 0.2).unwrap();
        assert!(sweep_kerr_threshold(&p, &g, &[]).is_err());
        assert!(sweep_kerr_threshold(&p, &g, &[0.1, 0.0]).is_err());
        let s = sweep_kerr_threshold(&p, &g, &[0.0, 0.2, 0.9, 1.0]).unwrap();
        assert_eq!(s.axis_values, vec![0.0, 0.2]);
        assert_eq!(s.truncated_at, Some(0.9));
        assert_eq!(s.warnings.len(), 1);
    }
}
