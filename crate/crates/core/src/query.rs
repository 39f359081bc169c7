//! Scalar moment queries on perspective states.
//!
//! Queries are linear combinations of single-particle position and momentum
//! observables, so aggregates like the total described momentum or a relative
//! coordinate are first-class operands.

use crate::error::{Error, Result};
use crate::state::MomentState;
use crate::system::Label;
use crate::tol::ZERO_TOL;
use nalgebra::DVector;

/// A single canonical observable of one particle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observable {
    Position(Label),
    Momentum(Label),
}

/// `sum_k c_k O_k` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCombination {
    terms: Vec<(f64, Observable)>,
}

impl LinearCombination {
    pub fn new(terms: Vec<(f64, Observable)>) -> Self {
        LinearCombination { terms }
    }

    pub fn position(label: impl Into<Label>) -> Self {
        Self::new(vec![(1.0, Observable::Position(label.into()))])
    }

    pub fn momentum(label: impl Into<Label>) -> Self {
        Self::new(vec![(1.0, Observable::Momentum(label.into()))])
    }

    /// `x_a - x_b`
    pub fn position_difference(a: impl Into<Label>, b: impl Into<Label>) -> Self {
        Self::new(vec![
            (1.0, Observable::Position(a.into())),
            (-1.0, Observable::Position(b.into())),
        ])
    }

    /// `p_a + p_b`
    pub fn momentum_sum(a: impl Into<Label>, b: impl Into<Label>) -> Self {
        Self::new(vec![
            (1.0, Observable::Momentum(a.into())),
            (1.0, Observable::Momentum(b.into())),
        ])
    }

    /// Sum of the momenta of every described particle: the total described
    /// momentum seen from `state.frame()` (minus the frame's own momentum).
    pub fn described_momentum_total(state: &MomentState) -> Self {
        Self::new(
            state
                .described()
                .iter()
                .map(|l| (1.0, Observable::Momentum(l.clone())))
                .collect(),
        )
    }

    /// Sum of described momenta excluding the listed particles.
    pub fn momentum_complement(state: &MomentState, excluded: &[&Label]) -> Self {
        Self::new(
            state
                .described()
                .iter()
                .filter(|l| !excluded.contains(l))
                .map(|l| (1.0, Observable::Momentum(l.clone())))
                .collect(),
        )
    }

    pub fn plus(mut self, coefficient: f64, observable: Observable) -> Self {
        self.terms.push((coefficient, observable));
        self
    }

    pub fn terms(&self) -> &[(f64, Observable)] {
        &self.terms
    }

    /// Coefficient vector in the state's slot layout.
    fn coefficients(&self, state: &MomentState) -> Result<DVector<f64>> {
        let mut c = DVector::zeros(2 * state.n_modes());
        for (coeff, obs) in &self.terms {
            let idx = match obs {
                Observable::Position(l) => state.x_index(state.slot(l)?),
                Observable::Momentum(l) => state.p_index(state.slot(l)?),
            };
            c[idx] += coeff;
        }
        Ok(c)
    }
}

/// What to evaluate for one or two linear combinations.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentQuery {
    Var(LinearCombination),
    Cov(LinearCombination, LinearCombination),
    Corr(LinearCombination, LinearCombination),
    Mean(LinearCombination),
}

impl MomentState {
    /// Evaluates `query` against the stored moments.
    ///
    /// Var is the quadratic form `c^T S c`; Cov is symmetrized; Corr fails
    /// with `ZeroVarianceCorrelation` when an operand variance is zero.
    pub fn moment(&self, query: &MomentQuery) -> Result<f64> {
        match query {
            MomentQuery::Var(lc) => {
                let c = lc.coefficients(self)?;
                Ok((c.transpose() * self.cov() * &c)[(0, 0)])
            }
            MomentQuery::Cov(a, b) => {
                let ca = a.coefficients(self)?;
                let cb = b.coefficients(self)?;
                let fwd = (ca.transpose() * self.cov() * &cb)[(0, 0)];
                let bwd = (cb.transpose() * self.cov() * &ca)[(0, 0)];
                Ok(0.5 * (fwd + bwd))
            }
            MomentQuery::Corr(a, b) => {
                let va = self.moment(&MomentQuery::Var(a.clone()))?;
                let vb = self.moment(&MomentQuery::Var(b.clone()))?;
                if va.abs() <= ZERO_TOL || vb.abs() <= ZERO_TOL {
                    return Err(Error::ZeroVarianceCorrelation);
                }
                let cov = self.moment(&MomentQuery::Cov(a.clone(), b.clone()))?;
                Ok(cov / (va.sqrt() * vb.sqrt()))
            }
            MomentQuery::Mean(lc) => {
                let c = lc.coefficients(self)?;
                Ok(c.dot(self.mean()))
            }
        }
    }

    /// Shorthand for `moment(Var(lc))`.
    pub fn variance(&self, lc: &LinearCombination) -> Result<f64> {
        self.moment(&MomentQuery::Var(lc.clone()))
    }

    /// Shorthand for `moment(Cov(a, b))`.
    pub fn covariance(&self, a: &LinearCombination, b: &LinearCombination) -> Result<f64> {
        self.moment(&MomentQuery::Cov(a.clone(), b.clone()))
    }

    /// Shorthand for `moment(Corr(a, b))`.
    pub fn correlation(&self, a: &LinearCombination, b: &LinearCombination) -> Result<f64> {
        self.moment(&MomentQuery::Corr(a.clone(), b.clone()))
    }
}
