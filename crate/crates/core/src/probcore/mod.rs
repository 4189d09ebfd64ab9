//! Finite-alphabet probability containers and information measures.
//!
//! All information quantities are in bits. `0 log 0` is taken as `0`
//! inside every kernel, so point masses and sparse tables never produce NaN.

mod channel;
mod info;
pub(crate) mod joint;

pub use channel::{BroadcastChannel, Output, TransitionMatrix};
pub use info::{
    binary_entropy, conditional_output_entropy, entropy, entropy_of_weights, h2, plog2p,
};
pub use joint::{JointPmf, Var};

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used when validating that weights form a distribution.
pub const PROB_TOL: f64 = 1e-12;

/// A probability mass function over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    /// Validates without renormalizing: a sum off by more than [`PROB_TOL`]
    /// is an error.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform pmf needs a nonempty alphabet");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, at: usize) -> Self {
        assert!(at < n, "point mass index out of range");
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        Self(w)
    }

    /// Binary pmf `[p, 1 - p]`, i.e. `P(0) = p`.
    pub fn binary(p: f64) -> Result<Self> {
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
            return Err(Error::Domain {
                what: "p",
                value: p,
                domain: "[0, 1]",
            });
        }
        let p = p.clamp(0.0, 1.0);
        Ok(Self(vec![p, 1.0 - p]))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Pmf {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Shape("empty probability vector".into()));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::BadWeight { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        assert_eq!(
            Pmf::new(vec![0.5, 0.4]).unwrap_err(),
            Error::NotNormalized { sum: 0.9 }
        );
        assert!(matches!(
            Pmf::new(vec![1.5, -0.5]),
            Err(Error::BadWeight { index: 1, .. })
        ));
        assert!(Pmf::new(vec![]).is_err());
    }

    #[test]
    fn accepts_rounding_slack() {
        let p = Pmf::new(vec![0.1, 0.2, 0.7 + 5e-13]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.support_size(), 3);
        assert_eq!(Pmf::point(3, 1).support_size(), 1);
    }
}
