//! Probabilistic (Procrustean) entanglement concentration for a single copy of
//! a two-mode squeezed vacuum.
//!
//! Two schemes are simulated on a truncated Fock ladder of Schmidt-diagonal
//! states `Σ d_n |n,n⟩`:
//!
//! * [`cavity`]: a Rydberg atom in a Ramsey interferometer interacts
//!   dispersively with Alice's cavity mode. Detecting the atom in `|g⟩`
//!   applies the diagonal filter `A_n = sin((nφ − φ₀)/2)`.
//! * [`kerr`]: Alice's mode is coupled to a strong coherent auxiliary beam by
//!   a cross-Kerr medium, the auxiliary mode is measured by eight-port homodyne
//!   detection and the outcome is accepted when a figure of merit exceeds a
//!   threshold.
//!
//! Both are scored by the entanglement entropy ([`fock::von_neumann_entropy`])
//! and by the fidelity of coherent-state teleportation through the shared
//! state ([`teleport::teleport_fidelity`]). [`analysis`] drives the
//! parameter scans and [`cli`] is the command-line front end.

pub mod analysis;
pub mod cavity;
pub mod cli;
pub mod error;
pub mod fock;
pub mod kerr;
pub mod teleport;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Formats a float with 17 significant digits, the format used by every data
/// file this crate writes.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}
