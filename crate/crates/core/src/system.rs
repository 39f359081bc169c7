//! Frame-neutral particle bookkeeping: labels, masses, described sets.

use crate::error::{Error, Result};
use std::fmt;

/// Identifier of a single particle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<char> for Label {
    fn from(c: char) -> Self {
        Label::new(c.to_string())
    }
}

/// A labeled set of particles with strictly positive masses.
///
/// The construction order of the labels is canonical: every slot layout in
/// the crate (described lists, covariance blocks, grid axes) follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    labels: Vec<Label>,
    masses: Vec<f64>,
}

impl ParticleSystem {
    /// Builds a validated system from `(label, mass)` pairs.
    pub fn new(particles: impl IntoIterator<Item = (Label, f64)>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut masses = Vec::new();
        for (label, mass) in particles {
            if labels.contains(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            if mass <= 0.0 || !mass.is_finite() {
                return Err(Error::NonPositiveMass { label, mass });
            }
            labels.push(label);
            masses.push(mass);
        }
        if labels.len() < 2 {
            return Err(Error::TooFewParticles(labels.len()));
        }
        Ok(ParticleSystem { labels, masses })
    }

    /// All particles share one mass.
    pub fn uniform(labels: impl IntoIterator<Item = Label>, mass: f64) -> Result<Self> {
        Self::new(labels.into_iter().map(|l| (l, mass)))
    }

    /// Convenience: labels "A", "B", ... with unit masses.
    pub fn unit_masses(n: usize) -> Result<Self> {
        let alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
        Self::uniform(alphabet.chars().take(n).map(Label::from), 1.0)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }

    pub fn index(&self, label: &Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))
    }

    pub fn mass(&self, label: &Label) -> Result<f64> {
        Ok(self.masses[self.index(label)?])
    }

    /// Labels seen from `frame`: everything except the frame particle, in
    /// canonical label order.
    pub fn described(&self, frame: &Label) -> Result<Vec<Label>> {
        self.index(frame)?;
        Ok(self
            .labels
            .iter()
            .filter(|l| *l != frame)
            .cloned()
            .collect())
    }
}
