//! Independent Fock-space oracles shared by the integration tests.

#![allow(dead_code)]

use cvconc::kerr::coherent_overlap;
use cvconc::C64;
use nalgebra::DMatrix;

/// Coherent state on `dim` Fock levels from the recursion
/// `c_k = c_{k-1} α / √k`.
pub fn coherent_fock(alpha: C64, dim: usize) -> Vec<C64> {
    let mut c = vec![C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0)];
    for k in 1..dim {
        let prev = c[k - 1];
        c.push(prev * alpha / (k as f64).sqrt());
    }
    c
}

fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(−i κt a†a ⊗ c†c)` built from ladder matrices and a dense matrix
/// exponential.
pub fn kerr_propagator(kappa_t: f64, dim_a: usize, dim_c: usize) -> DMatrix<C64> {
    let a = annihilation(dim_a);
    let c = annihilation(dim_c);
    let na = a.adjoint() * &a;
    let nc = c.adjoint() * &c;
    let h = na.kronecker(&nc);
    (h * C64::new(0.0, -kappa_t)).exp()
}

/// Largest deviation between `⟨β|ψ_n⟩`, with `ψ_n` the auxiliary-mode block
/// of `U|n⟩|α⟩`, and the coherent overlap `⟨β|α e^{−inκt}⟩`. Also covers the
/// weight leaking into other photon-number blocks of Alice's mode.
/// `u` must come from [`kerr_propagator`] with the same `kappa_t`, `n_cut + 1`
/// and `c_dim`.
pub fn kerr_overlap_error(u: &DMatrix<C64>, alpha: f64, kappa_t: f64, n_cut: usize, c_dim: usize, betas: &[C64]) -> f64 {
    let dim_a = n_cut + 1;
    let aux = coherent_fock(C64::new(alpha, 0.0), c_dim);
    let mut worst: f64 = 0.0;
    for n in 0..=n_cut {
        let mut input = nalgebra::DVector::zeros(dim_a * c_dim);
        for (k, &z) in aux.iter().enumerate() {
            input[n * c_dim + k] = z;
        }
        let out = u * input;
        for m in (0..dim_a).filter(|&m| m != n) {
            for k in 0..c_dim {
                worst = worst.max(out[m * c_dim + k].norm());
            }
        }
        let rotated = C64::from_polar(alpha, -(n as f64) * kappa_t);
        for &beta in betas {
            let probe = coherent_fock(beta, c_dim);
            let numeric: C64 = (0..c_dim).map(|k| probe[k].conj() * out[n * c_dim + k]).sum();
            worst = worst.max((numeric - coherent_overlap(beta, rotated)).norm());
        }
    }
    worst
}

pub fn probe_outcomes() -> Vec<C64> {
    vec![
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(2.0, 0.5),
        C64::new(-0.7, 1.2),
        C64::new(1.5, -1.5),
        C64::new(0.3, 2.4),
    ]
}
