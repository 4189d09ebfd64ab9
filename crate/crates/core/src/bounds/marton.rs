//! Marton's inner bound: `R1 <= I(U,W;Y1)`, `R2 <= I(V,W;Y2)`,
//! `R1 + R2 <= min{I(W;Y1), I(W;Y2)} + I(U;Y1|W) + I(V;Y2|W) - I(U;V|W)`.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::MartonIncremental;
use super::search::{multi_start, simplex_logits, softmax_into, SearchConfig};
use super::{Polytope, RatePair, RegionEntry, RegionSample};
use crate::error::{Error, Result};
use crate::probcore::{BroadcastChannel, JointPmf, Output, Var};

/// Information terms of Marton's bound for one joint `p(u, v, w, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartonTerms {
    pub i_uw_y1: f64,
    pub i_vw_y2: f64,
    pub i_w_y1: f64,
    pub i_w_y2: f64,
    pub i_u_y1_given_w: f64,
    pub i_v_y2_given_w: f64,
    pub i_u_v_given_w: f64,
}

impl MartonTerms {
    /// Evaluates every term from a joint over `(U, V, W, X)` through the
    /// general-purpose information routines.
    pub fn from_joint(joint: &JointPmf, ch: &BroadcastChannel) -> Result<Self> {
        let e = joint
            .extend_through_channel(ch, Output::Y1)?
            .extend_through_channel(ch, Output::Y2)?;
        let mi = |a: &[Var], b: &[Var], c: &[Var]| e.mutual_information(a, b, c);
        use Var::*;
        Ok(Self {
            i_uw_y1: mi(&[U, W], &[Y1], &[])?,
            i_vw_y2: mi(&[V, W], &[Y2], &[])?,
            i_w_y1: mi(&[W], &[Y1], &[])?,
            i_w_y2: mi(&[W], &[Y2], &[])?,
            i_u_y1_given_w: mi(&[U], &[Y1], &[W])?,
            i_v_y2_given_w: mi(&[V], &[Y2], &[W])?,
            i_u_v_given_w: mi(&[U], &[V], &[W])?,
        })
    }

    pub fn polytope(&self) -> Polytope {
        Polytope {
            r1_max: self.i_uw_y1,
            r2_max: self.i_vw_y2,
            sum_max: self.i_w_y1.min(self.i_w_y2) + self.i_u_y1_given_w + self.i_v_y2_given_w
                - self.i_u_v_given_w,
        }
    }
}

fn raw_polytope(r: &super::eval::MartonRaw) -> Polytope {
    Polytope {
        r1_max: r.i_uw_y1,
        r2_max: r.i_vw_y2,
        sum_max: r.i_w_y1.min(r.i_w_y2) + r.i_u_y1_w + r.i_v_y2_w - r.i_u_v_w,
    }
}

/// Best-found weighted maximum of Marton's region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartonResult {
    pub lambda: f64,
    /// Best found `lambda R1 + (1 - lambda) R2`; a lower bound on the true maximum.
    pub value: f64,
    pub rates: RatePair,
    pub terms: MartonTerms,
    /// Joint over `(U, V, W, X)` attaining `value`.
    pub witness: JointPmf,
    pub card_w: usize,
    pub restart: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[0, 1]",
        })
    }
}

fn search_one(
    ch: &BroadcastChannel,
    lambda: f64,
    cfg: &SearchConfig,
    nw: usize,
) -> Result<MartonResult> {
    let nx = ch.input_size();
    let nu = cfg.card_u.unwrap_or(nx);
    let nv = cfg.card_v.unwrap_or(nx);
    let n = nu * nv * nw * nx;
    let init = |rng: &mut ChaCha8Rng| simplex_logits(rng, n);
    let make = || {
        let mut kernel = MartonIncremental::new(ch, nu, nv, nw);
        move |theta: &[f64]| raw_polytope(&kernel.eval(theta)).support_or_penalty(lambda)
    };
    // each W cardinality searches its own block of streams
    let best = multi_start(cfg, (nw as u64) << 32, init, make);
    let mut table = vec![0.0; n];
    softmax_into(&best.params, &mut table);
    let witness = JointPmf::new(
        vec![Var::U, Var::V, Var::W, Var::X],
        vec![nu, nv, nw, nx],
        table,
    )?;
    let terms = MartonTerms::from_joint(&witness, ch)?;
    let (value, rates) = terms
        .polytope()
        .support(lambda)
        .unwrap_or((0.0, RatePair { r1: 0.0, r2: 0.0 }));
    Ok(MartonResult {
        lambda,
        value,
        rates,
        terms,
        witness,
        card_w: nw,
        restart: best.restart,
    })
}

/// Best found maximum of `lambda R1 + (1 - lambda) R2` over Marton's region.
///
/// Searches a softmax parametrization of `p(u, v, w, x)` by multi-start
/// pattern search. `|U|` and `|V|` default to `|X|`; when `card_w` is unset
/// every `|W|` in `1..=4` is tried and the best kept (ties to the smaller
/// `|W|`).
pub fn marton_weighted_max(
    ch: &BroadcastChannel,
    lambda: f64,
    cfg: &SearchConfig,
) -> Result<MartonResult> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let cards: Vec<usize> = match cfg.card_w {
        Some(w) => vec![w],
        None => (1..=4).collect(),
    };
    let mut best: Option<MartonResult> = None;
    for nw in cards {
        let r = search_one(ch, lambda, cfg, nw)?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one W cardinality"))
}

fn entry(r: MartonResult) -> RegionEntry {
    RegionEntry {
        lambda: r.lambda,
        value: r.value,
        rates: r.rates,
        upper: None,
        witness: r.witness,
    }
}

/// Support-function samples of Marton's region at `lambdas`; `sum_rate` is
/// twice the best value at `lambda = 1/2`.
pub fn marton_region(
    ch: &BroadcastChannel,
    lambdas: &[f64],
    cfg: &SearchConfig,
) -> Result<RegionSample> {
    let mut entries = Vec::with_capacity(lambdas.len());
    let mut half = None;
    for &l in lambdas {
        let r = marton_weighted_max(ch, l, cfg)?;
        if l == 0.5 {
            half = Some(r.value);
        }
        entries.push(entry(r));
    }
    let half = match half {
        Some(v) => v,
        None => marton_weighted_max(ch, 0.5, cfg)?.value,
    };
    Ok(RegionSample {
        entries,
        sum_rate: 2.0 * half,
    })
}
