//! Search for joints `p(u, v, x)` with
//! `I(U;Y1) + I(V;Y2) - I(U;V) > max{I(X;Y1), I(X;Y2)}`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{UvxIncremental, UvxKernel, UvxRaw};
use super::search::{multi_start, simplex_logits, softmax_into, SearchConfig};
use crate::error::{Error, Result};
use crate::probcore::{BroadcastChannel, JointPmf, Output, Var};

/// Chain tolerance of [`lemma_chain_check`].
pub const CHAIN_TOL: f64 = 1e-10;

/// The terms of the gap for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapTerms {
    pub i_u_y1: f64,
    pub i_v_y2: f64,
    pub i_u_v: f64,
    pub i_x_y1: f64,
    pub i_x_y2: f64,
}

impl GapTerms {
    pub fn from_joint(joint: &JointPmf, ch: &BroadcastChannel) -> Result<Self> {
        let e = joint
            .extend_through_channel(ch, Output::Y1)?
            .extend_through_channel(ch, Output::Y2)?;
        use Var::*;
        Ok(Self {
            i_u_y1: e.mutual_information(&[U], &[Y1], &[])?,
            i_v_y2: e.mutual_information(&[V], &[Y2], &[])?,
            i_u_v: e.mutual_information(&[U], &[V], &[])?,
            i_x_y1: e.mutual_information(&[X], &[Y1], &[])?,
            i_x_y2: e.mutual_information(&[X], &[Y2], &[])?,
        })
    }

    /// `I(U;Y1) + I(V;Y2) - I(U;V) - max{I(X;Y1), I(X;Y2)}`.
    pub fn gap(&self) -> f64 {
        self.i_u_y1 + self.i_v_y2 - self.i_u_v - self.i_x_y1.max(self.i_x_y2)
    }
}

/// Closed interval for `P(X = 0)` of a binary input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaRange {
    pub lo: f64,
    pub hi: f64,
}

impl EtaRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!("invalid P(X=0) range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    fn map(&self, theta: f64) -> f64 {
        self.lo + (self.hi - self.lo) / (1.0 + (-theta).exp())
    }
}

/// Input laws whose larger mass is at least `4/5`, where the gap is provably
/// nonpositive on the skew-symmetric channel with crossover 1/2.
pub const LEMMA3_RANGES: [EtaRange; 2] =
    [EtaRange { lo: 0.0, hi: 0.2 }, EtaRange { lo: 0.8, hi: 1.0 }];

/// Largest gap found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapResult {
    pub gap: f64,
    pub terms: GapTerms,
    /// Joint over `(U, V, X)` attaining `gap`.
    pub witness: JointPmf,
    pub card_u: usize,
    pub card_v: usize,
    pub range: Option<EtaRange>,
}

impl GapResult {
    /// Whether the witness beats the conjectured inequality by more than `tol`.
    pub fn is_counterexample(&self, tol: f64) -> bool {
        self.gap > tol
    }
}

/// `p(x) p(u, v | x)` laid out `[u][v][x]` for a binary input with
/// `P(X = 0)` confined to `range`: one sigmoid coordinate for `P(X = 0)`,
/// then one block of `nu * nv` logits per input symbol.
struct RangeParam {
    nu: usize,
    nv: usize,
    range: EtaRange,
    cond: Vec<f64>,
}

impl RangeParam {
    fn new(nu: usize, nv: usize, range: EtaRange) -> Self {
        Self {
            nu,
            nv,
            range,
            cond: vec![0.0; nu * nv],
        }
    }

    fn init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let u: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
        let mut theta = vec![(u / (1.0 - u)).ln()];
        for _ in 0..2 {
            theta.extend(simplex_logits(rng, self.nu * self.nv));
        }
        theta
    }

    fn fill(&mut self, theta: &[f64], table: &mut [f64]) {
        let e = self.range.map(theta[0]);
        let p_x = [e, 1.0 - e];
        let block = self.nu * self.nv;
        for (x, px) in p_x.into_iter().enumerate() {
            softmax_into(&theta[1 + x * block..1 + (x + 1) * block], &mut self.cond);
            for (uv, &c) in self.cond.iter().enumerate() {
                table[uv * 2 + x] = px * c;
            }
        }
    }
}

fn gap_of(r: &UvxRaw) -> f64 {
    r.i_u_y1 + r.i_v_y2 - r.i_u_v - r.i_x_y1.max(r.i_x_y2)
}

fn search_cards(
    ch: &BroadcastChannel,
    cfg: &SearchConfig,
    nu: usize,
    nv: usize,
    range: Option<EtaRange>,
) -> Result<GapResult> {
    let nx = ch.input_size();
    let n = nu * nv * nx;
    let stream_base = ((nu * 8 + nv) as u64) << 32;
    let mut table = vec![0.0; n];
    match range {
        None => {
            let init = |rng: &mut ChaCha8Rng| simplex_logits(rng, n);
            let make = || {
                let mut kernel = UvxIncremental::new(ch, nu, nv);
                move |theta: &[f64]| gap_of(&kernel.eval(theta))
            };
            let best = multi_start(cfg, stream_base, init, make);
            softmax_into(&best.params, &mut table);
        }
        Some(r) => {
            let proto = RangeParam::new(nu, nv, r);
            let init = |rng: &mut ChaCha8Rng| proto.init(rng);
            let make = || {
                let mut kernel = UvxKernel::new(ch, nu, nv);
                let mut param = RangeParam::new(nu, nv, r);
                let mut table = vec![0.0; n];
                move |theta: &[f64]| {
                    param.fill(theta, &mut table);
                    gap_of(&kernel.eval(&table))
                }
            };
            let best = multi_start(cfg, stream_base, init, make);
            RangeParam::new(nu, nv, r).fill(&best.params, &mut table);
        }
    }
    let witness = JointPmf::new(vec![Var::U, Var::V, Var::X], vec![nu, nv, nx], table)?;
    let terms = GapTerms::from_joint(&witness, ch)?;
    Ok(GapResult {
        gap: terms.gap(),
        terms,
        witness,
        card_u: nu,
        card_v: nv,
        range,
    })
}

/// Multi-start maximization of the gap over `p(u, v, x)`.
///
/// With `card_u` unset, `|U| = |V| = n` is searched for every `n` in
/// `2..=4` (each with `cfg.restarts` restarts); otherwise `|V|` defaults to
/// `|U|`. `range` restricts `P(X = 0)` and requires a binary input.
pub fn conjecture_gap_search(
    ch: &BroadcastChannel,
    cfg: &SearchConfig,
    range: Option<EtaRange>,
) -> Result<GapResult> {
    cfg.validate()?;
    if range.is_some() && ch.input_size() != 2 {
        return Err(Error::Unsupported(format!(
            "a P(X=0) range needs a binary input, got |X| = {}",
            ch.input_size()
        )));
    }
    let cards: Vec<(usize, usize)> = match cfg.card_u {
        Some(u) => vec![(u, cfg.card_v.unwrap_or(u))],
        None => (2..=4).map(|n| (n, cfg.card_v.unwrap_or(n))).collect(),
    };
    let mut best: Option<GapResult> = None;
    for (nu, nv) in cards {
        let r = search_cards(ch, cfg, nu, nv, range)?;
        if best.as_ref().is_none_or(|b| r.gap > b.gap) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one cardinality"))
}

/// The four quantities of the chain
/// `I(U;Y1) + I(V;Y2) - I(U;V) <= I(V;Y2) + I(U;Y1|V) <= I(V;Y2) + I(X;Y1|V)
/// = I(X;Y1) + I(V;Y2) - I(V;Y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainValues {
    pub terms: [f64; 4],
}

/// Evaluates the chain on a joint over `(U, V, X)` and checks that each term
/// is at most the next within `1e-10`.
pub fn lemma_chain_check(joint: &JointPmf, ch: &BroadcastChannel) -> Result<ChainValues> {
    let e = joint
        .extend_through_channel(ch, Output::Y1)?
        .extend_through_channel(ch, Output::Y2)?;
    use Var::*;
    let mi = |a: &[Var], b: &[Var], c: &[Var]| e.mutual_information(a, b, c);
    let i_v_y2 = mi(&[V], &[Y2], &[])?;
    let terms = [
        mi(&[U], &[Y1], &[])? + i_v_y2 - mi(&[U], &[V], &[])?,
        i_v_y2 + mi(&[U], &[Y1], &[V])?,
        i_v_y2 + mi(&[X], &[Y1], &[V])?,
        mi(&[X], &[Y1], &[])? + i_v_y2 - mi(&[V], &[Y1], &[])?,
    ];
    for step in 0..3 {
        if terms[step] > terms[step + 1] + CHAIN_TOL {
            return Err(Error::ChainViolation {
                step,
                lhs: terms[step],
                rhs: terms[step + 1],
            });
        }
    }
    Ok(ChainValues { terms })
}
