//! Evaluators for Marton's inner bound, the computable outer bound with
//! `|U|, |V| <= |X| + 1`, the skew-symmetric-channel sum-rate expressions,
//! and the sum-rate gap search.
//!
//! Regions are represented by their support function: for each weight
//! `lambda` the maximum of `lambda R1 + (1 - lambda) R2` over the union of
//! per-distribution polytopes. Nonconvex searches return best-found values,
//! i.e. lower bounds on the true maxima.

mod bssc;
mod capacity;
mod conjecture;
mod eval;
mod marton;
mod outer;
pub mod search;
mod tsplit;

pub use bssc::bssc;
pub use capacity::{single_user_capacity, time_division_sum_rate, Capacity};
pub use conjecture::{
    conjecture_gap_search, lemma_chain_check, ChainValues, EtaRange, GapResult, GapTerms,
    LEMMA3_RANGES,
};
pub use marton::{marton_region, marton_weighted_max, MartonResult, MartonTerms};
pub use outer::{
    outer_region, outer_sum_rate, outer_sum_rate_search, OuterMethod, OuterSumRate, OuterTerms,
};
pub use search::SearchConfig;
pub use tsplit::{marton_sum_rate_tsplit, tsplit_symmetric, tsplit_value, TSplit};

use serde::Serialize;

use crate::probcore::JointPmf;

/// Rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn weighted(&self, lambda: f64) -> f64 {
        lambda * self.r1 + (1.0 - lambda) * self.r2
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// `{R1, R2 >= 0 : R1 <= r1_max, R2 <= r2_max, R1 + R2 <= sum_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Polytope {
    pub r1_max: f64,
    pub r2_max: f64,
    pub sum_max: f64,
}

impl Polytope {
    /// Maximizer of `lambda R1 + (1 - lambda) R2` by vertex enumeration;
    /// `None` when the polytope is empty. Ties go to the vertex with the
    /// larger sum rate, then to the earliest in the order origin, R1-axis,
    /// R2-axis, R1-corner, R2-corner.
    pub fn support(&self, lambda: f64) -> Option<(f64, RatePair)> {
        // information terms may be a few ulps negative
        let a = self.r1_max.max(0.0);
        let b = self.r2_max.max(0.0);
        let c = self.sum_max;
        if c < 0.0 {
            return None;
        }
        let mut cands = [None; 5];
        cands[0] = Some(RatePair { r1: 0.0, r2: 0.0 });
        cands[1] = Some(RatePair {
            r1: a.min(c),
            r2: 0.0,
        });
        cands[2] = Some(RatePair {
            r1: 0.0,
            r2: b.min(c),
        });
        if a <= c {
            cands[3] = Some(RatePair {
                r1: a,
                r2: b.min(c - a),
            });
        }
        if b <= c {
            cands[4] = Some(RatePair {
                r1: a.min(c - b),
                r2: b,
            });
        }
        let mut best: Option<(f64, RatePair)> = None;
        for rp in cands.into_iter().flatten() {
            let v = rp.weighted(lambda);
            if best.is_none_or(|(bv, brp)| v > bv || (v == bv && rp.sum() > brp.sum())) {
                best = Some((v, rp));
            }
        }
        best
    }

    /// Support value, or `sum_max` (negative) when empty; a continuous
    /// objective for searches.
    pub fn support_or_penalty(&self, lambda: f64) -> f64 {
        self.support(lambda).map_or(self.sum_max, |(v, _)| v)
    }

    /// Whether `rp` satisfies every inequality within `tol`.
    pub fn contains(&self, rp: &RatePair, tol: f64) -> bool {
        rp.r1 >= -tol
            && rp.r2 >= -tol
            && rp.r1 <= self.r1_max + tol
            && rp.r2 <= self.r2_max + tol
            && rp.r1 + rp.r2 <= self.sum_max + tol
    }
}

/// One weighted maximum of a region's support function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEntry {
    pub lambda: f64,
    /// Best value of `lambda R1 + (1 - lambda) R2`, attained by `witness`.
    pub value: f64,
    pub rates: RatePair,
    /// Dual bound on the same quantity when the method yields one; it bounds
    /// the method's discretized problem (grid over `P(X=0)`), not the exact one.
    pub upper: Option<f64>,
    pub witness: JointPmf,
}

/// Support-function samples of a rate region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSample {
    pub entries: Vec<RegionEntry>,
    pub sum_rate: f64,
}

/// `n` evenly spaced weights from 0 to 1 (`n >= 2`), or `[0.5]` for `n = 1`.
pub fn lambda_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polytope_vertices() {
        let p = Polytope {
            r1_max: 0.6,
            r2_max: 0.5,
            sum_max: 0.8,
        };
        // tie at lambda = 1 goes to the corner with the larger sum
        let (v, rp) = p.support(1.0).unwrap();
        assert_eq!((v, rp.r1), (0.6, 0.6));
        assert!((rp.r2 - 0.2).abs() < 1e-15);
        let (v, rp) = p.support(0.0).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(rp.r2, 0.5);
        let (v, _) = p.support(0.5).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
        assert!(p.contains(&rp, 0.0));
    }

    #[test]
    fn slack_sum_constraint() {
        let p = Polytope {
            r1_max: 0.1,
            r2_max: 0.2,
            sum_max: 1.0,
        };
        let (v, rp) = p.support(0.5).unwrap();
        assert_eq!(rp, RatePair { r1: 0.1, r2: 0.2 });
        assert!((v - 0.15).abs() < 1e-15);
    }

    #[test]
    fn empty_polytope() {
        let p = Polytope {
            r1_max: 0.1,
            r2_max: 0.2,
            sum_max: -0.05,
        };
        assert!(p.support(0.5).is_none());
        assert_eq!(p.support_or_penalty(0.5), -0.05);
    }

    #[test]
    fn lambdas() {
        assert_eq!(lambda_grid(3), vec![0.0, 0.5, 1.0]);
        assert_eq!(lambda_grid(1), vec![0.5]);
        assert_eq!(lambda_grid(21)[10], 0.5);
    }
}
