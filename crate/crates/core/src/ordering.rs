//! Slot layouts for phase-space vectors and the symplectic form.
//!
//! Two layouts are supported for a system of `n` described particles:
//!
//! * `Blocked`: `(x_1, ..., x_n, p_1, ..., p_n)` — the canonical internal
//!   layout; frame-change maps are block-diagonal here.
//! * `Interleaved`: `(x_1, p_1, x_2, p_2, ...)` — the per-mode layout in
//!   which single-particle 2x2 blocks are contiguous.

use nalgebra::DMatrix;

/// Arrangement of position/momentum slots in means and covariance matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Blocked,
    Interleaved,
}

impl Ordering {
    /// Index of the position slot of described particle `slot` among `n`.
    pub fn x_index(self, slot: usize, n: usize) -> usize {
        debug_assert!(slot < n);
        match self {
            Ordering::Blocked => slot,
            Ordering::Interleaved => 2 * slot,
        }
    }

    /// Index of the momentum slot of described particle `slot` among `n`.
    pub fn p_index(self, slot: usize, n: usize) -> usize {
        debug_assert!(slot < n);
        match self {
            Ordering::Blocked => n + slot,
            Ordering::Interleaved => 2 * slot + 1,
        }
    }

    /// `perm[i]` is the index in `self` layout of the slot that sits at
    /// index `i` in the `target` layout. Applying it as
    /// `v_target[i] = v_self[perm[i]]` re-orders vectors exactly.
    pub fn permutation_to(self, target: Ordering, n: usize) -> Vec<usize> {
        let mut perm = vec![0; 2 * n];
        for slot in 0..n {
            perm[target.x_index(slot, n)] = self.x_index(slot, n);
            perm[target.p_index(slot, n)] = self.p_index(slot, n);
        }
        perm
    }
}

/// The matrix of canonical commutators `[R_i, R_j] = i Omega_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    ordering: Ordering,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Builds Omega for `n_modes` modes in the given layout. Entries are exact
/// integers (0, +1, -1); Omega is antisymmetric and squares to -identity.
pub fn symplectic_form(n_modes: usize, ordering: Ordering) -> SymplecticForm {
    assert!(n_modes >= 1, "a symplectic form needs at least one mode");
    let d = 2 * n_modes;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for slot in 0..n_modes {
        let xi = ordering.x_index(slot, n_modes);
        let pi = ordering.p_index(slot, n_modes);
        m[(xi, pi)] = 1.0;
        m[(pi, xi)] = -1.0;
    }
    SymplecticForm {
        n_modes,
        ordering,
        matrix: m,
    }
}

/// Bare Omega matrix, for callers that only need the entries.
pub fn omega(n_modes: usize, ordering: Ordering) -> DMatrix<f64> {
    symplectic_form(n_modes, ordering).matrix.clone()
}
