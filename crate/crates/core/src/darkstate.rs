//! Dark state of two TLSs degenerate with each other, exchanging a single
//! excitation with the qubit.
//!
//! In the one-excitation basis (qubit excited, first TLS excited, second
//! TLS excited) the block is a 3x3 real symmetric matrix. One TLS
//! superposition couples to the qubit, the orthogonal one does not: its
//! eigenvalue stays pinned at zero for every detuning, it holds no qubit
//! amplitude, and it is therefore invisible to qubit relaxation. Note the
//! dark branch is that superposition of both TLS excitations, not a single
//! bare TLS state, even though at a glance the flat branch looks like one.

use ndarray::{array, Array2};

use crate::error::{Error, Result};
use crate::model::check_axis;

/// Qubit detuning and the two TLS couplings, all angular frequencies.
///
/// Both TLS diagonal energies are taken as exactly equal (the rotating
/// frame puts them at zero); the closed forms below are exact only then.
/// Zero couplings are allowed at construction so the decoupled limits can
/// be inspected, but the dark state needs at least one coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkSystem {
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl DarkSystem {
    pub fn new(omega: f64, omega1: f64, omega2: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("detuning {omega} must be finite")));
        }
        for (name, v) in [("first", omega1), ("second", omega2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} coupling {v} must be finite and non-negative"
                )));
            }
        }
        Ok(Self { omega, omega1, omega2 })
    }

    /// The 3x3 block, [[w, W1/2, W2/2], [W1/2, 0, 0], [W2/2, 0, 0]].
    pub fn hamiltonian(&self) -> Array2<f64> {
        let (h1, h2) = (0.5 * self.omega1, 0.5 * self.omega2);
        array![[self.omega, h1, h2], [h1, 0.0, 0.0], [h2, 0.0, 0.0]]
    }

    /// Unit vector (0, W2, -W1)/|W|. The qubit component is a structural
    /// zero, not a small number. Overall sign is fixed by a non-negative
    /// second component so equal inputs give bit-identical output.
    pub fn dark_state(&self) -> Result<[f64; 3]> {
        let n = self.omega1.hypot(self.omega2);
        if n == 0.0 {
            return Err(Error::DarkStateUndefined);
        }
        Ok([0.0, self.omega2 / n, -self.omega1 / n])
    }
}

/// Eigenvalue curves over a detuning sweep, one inner vector per branch,
/// sorted ascending at each sample.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega_axis: Vec<f64>,
    pub branches: [Vec<f64>; 3],
    /// Index of the branch that is identically zero. The extremal branches
    /// straddle zero at every detuning, so the dark one is always in the
    /// middle.
    pub dark_branch: usize,
}

/// Spectrum of the block with `template`'s couplings as the detuning runs
/// over `omega_axis`. The characteristic polynomial factors as
/// lambda (lambda^2 - w lambda - (W1^2 + W2^2)/4), so the roots are exact.
pub fn spectrum_vs_detuning(template: &DarkSystem, omega_axis: &[f64]) -> Result<Spectrum> {
    check_axis("detuning axis", omega_axis, false)?;
    let mut branches = [Vec::new(), Vec::new(), Vec::new()];
    for &w in omega_axis {
        if !w.is_finite() {
            return Err(Error::InvalidParameter(format!("detuning {w} must be finite")));
        }
        let split = (w * w + template.omega1 * template.omega1
            + template.omega2 * template.omega2)
            .sqrt();
        branches[0].push(0.5 * (w - split));
        branches[1].push(0.0);
        branches[2].push(0.5 * (w + split));
    }
    Ok(Spectrum { omega_axis: omega_axis.to_vec(), branches, dark_branch: 1 })
}
