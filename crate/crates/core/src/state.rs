//! Perspective states: first and second moments of the described particles.

use crate::error::{Error, Result};
use crate::ordering::{omega, Ordering};
use crate::system::{Label, ParticleSystem};
use crate::tol::{PSD_TOL, SYM_TOL};
use nalgebra::{Complex, DMatrix, DVector};

/// Result of the Schroedinger-Robertson physicality test at construction.
///
/// Unphysical covariance matrices are kept: the frame maps are linear and
/// remain exact on any symmetric matrix, which is useful for limit states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physicality {
    /// `min eig(S + (i/2) Omega) >= -PSD_TOL`.
    Pass { margin: f64 },
    Unphysical { margin: f64 },
}

impl Physicality {
    pub fn margin(self) -> f64 {
        match self {
            Physicality::Pass { margin } | Physicality::Unphysical { margin } => margin,
        }
    }

    pub fn is_physical(self) -> bool {
        matches!(self, Physicality::Pass { .. })
    }
}

/// Minimum eigenvalue of the Hermitian matrix `cov + (i/2) Omega`.
pub fn uncertainty_min_eigenvalue(cov: &DMatrix<f64>, ordering: Ordering) -> f64 {
    let n = cov.nrows() / 2;
    let omega = omega(n, ordering);
    let herm = cov.map(|v| Complex::new(v, 0.0)) + omega.map(|v| Complex::new(0.0, 0.5 * v));
    let eigen = herm.symmetric_eigen();
    eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// A Gaussian perspective: frame particle, described particles in canonical
/// label order, mean vector and covariance matrix in the chosen layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    system: ParticleSystem,
    frame: Label,
    described: Vec<Label>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    ordering: Ordering,
    physicality: Physicality,
}

impl MomentState {
    /// Validates dimensions and symmetry, computes the physicality flag.
    pub fn new(
        system: ParticleSystem,
        frame: Label,
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        ordering: Ordering,
    ) -> Result<Self> {
        let described = system.described(&frame)?;
        let d = 2 * described.len();
        if mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mean.len(),
            });
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.nrows().max(cov.ncols()),
            });
        }
        let mut max_asym: f64 = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                max_asym = max_asym.max((cov[(i, j)] - cov[(j, i)]).abs());
            }
        }
        if max_asym > SYM_TOL {
            return Err(Error::NonSymmetric {
                max_asym,
                tol: SYM_TOL,
            });
        }
        if !mean.iter().all(|v| v.is_finite()) || !cov.iter().all(|v| v.is_finite()) {
            return Err(Error::NonPositiveParameter {
                name: "moments must be finite",
                value: f64::NAN,
            });
        }
        let margin = uncertainty_min_eigenvalue(&cov, ordering);
        let physicality = if margin >= -PSD_TOL {
            Physicality::Pass { margin }
        } else {
            Physicality::Unphysical { margin }
        };
        Ok(MomentState {
            system,
            frame,
            described,
            mean,
            cov,
            ordering,
            physicality,
        })
    }

    /// Zero-mean state with the given covariance.
    pub fn centered(
        system: ParticleSystem,
        frame: Label,
        cov: DMatrix<f64>,
        ordering: Ordering,
    ) -> Result<Self> {
        let d = cov.nrows();
        Self::new(system, frame, DVector::zeros(d), cov, ordering)
    }

    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    pub fn frame(&self) -> &Label {
        &self.frame
    }

    pub fn described(&self) -> &[Label] {
        &self.described
    }

    /// Number of described particles (modes).
    pub fn n_modes(&self) -> usize {
        self.described.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn physicality(&self) -> Physicality {
        self.physicality
    }

    pub fn is_physical(&self) -> bool {
        self.physicality.is_physical()
    }

    /// Slot of a described particle, or `UnknownParticle` (the frame
    /// particle is not described in its own perspective).
    pub fn slot(&self, label: &Label) -> Result<usize> {
        self.described
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownParticle(label.clone()))
    }

    pub fn x_index(&self, slot: usize) -> usize {
        self.ordering.x_index(slot, self.n_modes())
    }

    pub fn p_index(&self, slot: usize) -> usize {
        self.ordering.p_index(slot, self.n_modes())
    }

    pub fn mean_x(&self, label: &Label) -> Result<f64> {
        Ok(self.mean[self.x_index(self.slot(label)?)])
    }

    pub fn mean_p(&self, label: &Label) -> Result<f64> {
        Ok(self.mean[self.p_index(self.slot(label)?)])
    }

    /// cov(x_a, x_b)
    pub fn xx(&self, a: &Label, b: &Label) -> Result<f64> {
        Ok(self.cov[(self.x_index(self.slot(a)?), self.x_index(self.slot(b)?))])
    }

    /// cov(p_a, p_b)
    pub fn pp(&self, a: &Label, b: &Label) -> Result<f64> {
        Ok(self.cov[(self.p_index(self.slot(a)?), self.p_index(self.slot(b)?))])
    }

    /// cov(x_a, p_b), symmetrized ordering
    pub fn xp(&self, a: &Label, b: &Label) -> Result<f64> {
        Ok(self.cov[(self.x_index(self.slot(a)?), self.p_index(self.slot(b)?))])
    }

    pub fn var_x(&self, label: &Label) -> Result<f64> {
        self.xx(label, label)
    }

    pub fn var_p(&self, label: &Label) -> Result<f64> {
        self.pp(label, label)
    }

    /// Position-position block in described order, regardless of layout.
    pub fn position_block(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        DMatrix::from_fn(n, n, |i, j| self.cov[(self.x_index(i), self.x_index(j))])
    }

    /// Momentum-momentum block in described order.
    pub fn momentum_block(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        DMatrix::from_fn(n, n, |i, j| self.cov[(self.p_index(i), self.p_index(j))])
    }

    /// Mixed block `cov(x_i, p_j)` in described order.
    pub fn mixed_block(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        DMatrix::from_fn(n, n, |i, j| self.cov[(self.x_index(i), self.p_index(j))])
    }

    /// 2x2 per-particle covariance `[[var x, cov xp], [cov xp, var p]]`.
    pub fn particle_block(&self, label: &Label) -> Result<DMatrix<f64>> {
        let s = self.slot(label)?;
        let (xi, pi) = (self.x_index(s), self.p_index(s));
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[
                self.cov[(xi, xi)],
                self.cov[(xi, pi)],
                self.cov[(pi, xi)],
                self.cov[(pi, pi)],
            ],
        ))
    }

    /// Covariance of a subsystem in blocked ordering over the given labels.
    pub fn subsystem_cov(&self, labels: &[Label]) -> Result<DMatrix<f64>> {
        let m = labels.len();
        let mut slots = Vec::with_capacity(m);
        for l in labels {
            slots.push(self.slot(l)?);
        }
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for (i, &si) in slots.iter().enumerate() {
            for (j, &sj) in slots.iter().enumerate() {
                out[(i, j)] = self.cov[(self.x_index(si), self.x_index(sj))];
                out[(i, m + j)] = self.cov[(self.x_index(si), self.p_index(sj))];
                out[(m + i, j)] = self.cov[(self.p_index(si), self.x_index(sj))];
                out[(m + i, m + j)] = self.cov[(self.p_index(si), self.p_index(sj))];
            }
        }
        Ok(out)
    }

    /// Exact (bit-preserving) re-ordering of the stored layout.
    pub fn reorder(&self, target: Ordering) -> MomentState {
        if target == self.ordering {
            return self.clone();
        }
        let n = self.n_modes();
        let perm = self.ordering.permutation_to(target, n);
        let d = 2 * n;
        let mean = DVector::from_fn(d, |i, _| self.mean[perm[i]]);
        let cov = DMatrix::from_fn(d, d, |i, j| self.cov[(perm[i], perm[j])]);
        MomentState {
            system: self.system.clone(),
            frame: self.frame.clone(),
            described: self.described.clone(),
            mean,
            cov,
            ordering: target,
            physicality: self.physicality,
        }
    }

    pub fn det_full(&self) -> f64 {
        self.cov.clone().lu().determinant()
    }

    pub fn det_position(&self) -> f64 {
        self.position_block().lu().determinant()
    }

    pub fn det_momentum(&self) -> f64 {
        self.momentum_block().lu().determinant()
    }
}
