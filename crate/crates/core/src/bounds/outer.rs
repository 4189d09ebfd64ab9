//! The computable outer bound over `p(u, v, x)`:
//! `R1 <= I(U;Y1)`, `R2 <= I(V;Y2)`,
//! `R1 + R2 <= min{I(U;Y1) + I(X;Y2|U), I(V;Y2) + I(X;Y1|V)}`.
//!
//! The `U` terms depend only on `p(u, x)` and the `V` terms only on
//! `p(v, x)`. For a binary input, every weighted combination of the `U`
//! terms maximized over `U` with `P(X=0) = eta` fixed is a concave envelope
//! in `eta`, so the bound reduces to one-dimensional hulls.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::capacity::golden_max;
use super::eval::{BinaryProfile, UvxIncremental};
use super::search::{multi_start, simplex_logits, softmax_into, SearchConfig};
use super::{Polytope, RatePair, RegionEntry, RegionSample};
use crate::constructions::Side;
use crate::envelope::{grid_eta, upper_concave_envelope, Envelope, GridFunction};
use crate::error::{Error, Result};
use crate::probcore::{BroadcastChannel, JointPmf, Output, Var};

/// Information terms of the outer bound for one joint `p(u, v, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterTerms {
    pub i_u_y1: f64,
    pub i_x_y2_given_u: f64,
    pub i_v_y2: f64,
    pub i_x_y1_given_v: f64,
}

impl OuterTerms {
    /// Evaluates every term from a joint over `(U, V, X)` through the
    /// general-purpose information routines.
    pub fn from_joint(joint: &JointPmf, ch: &BroadcastChannel) -> Result<Self> {
        let e = joint
            .extend_through_channel(ch, Output::Y1)?
            .extend_through_channel(ch, Output::Y2)?;
        use Var::*;
        Ok(Self {
            i_u_y1: e.mutual_information(&[U], &[Y1], &[])?,
            i_x_y2_given_u: e.mutual_information(&[X], &[Y2], &[U])?,
            i_v_y2: e.mutual_information(&[V], &[Y2], &[])?,
            i_x_y1_given_v: e.mutual_information(&[X], &[Y1], &[V])?,
        })
    }

    /// `I(U;Y1) + I(X;Y2|U)`.
    pub fn a(&self) -> f64 {
        self.i_u_y1 + self.i_x_y2_given_u
    }

    /// `I(V;Y2) + I(X;Y1|V)`.
    pub fn b(&self) -> f64 {
        self.i_v_y2 + self.i_x_y1_given_v
    }

    pub fn sum_bound(&self) -> f64 {
        self.a().min(self.b())
    }

    /// Which term of the sum-rate minimum binds; ties go to the `U` term.
    pub fn binding(&self) -> Side {
        if self.a() <= self.b() {
            Side::U
        } else {
            Side::V
        }
    }

    pub fn polytope(&self) -> Polytope {
        Polytope {
            r1_max: self.i_u_y1,
            r2_max: self.i_v_y2,
            sum_max: self.sum_bound(),
        }
    }
}

/// How an outer-bound value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterMethod {
    /// One-dimensional hulls on a uniform grid over `P(X=0)`, with the hull
    /// atoms and `P(X=0)` refined between grid points.
    Envelope { grid: usize },
    /// Multi-start search over `p(u, v, x)`; a lower bound on the maximum.
    Search { restarts: usize, card: usize },
}

/// Maximum sum rate of the outer bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterSumRate {
    pub value: f64,
    pub method: OuterMethod,
    pub terms: OuterTerms,
    /// Joint over `(U, V, X)` attaining `value`.
    pub witness: JointPmf,
}

impl OuterSumRate {
    pub fn input(&self) -> Vec<f64> {
        self.witness
            .marginalize(&[Var::X])
            .expect("witness has an X axis")
            .table()
            .to_vec()
    }
}

/// Atoms `(P(aux = i), P(X = 0 | aux = i))` of a binary-input auxiliary.
type Atoms = Vec<(f64, f64)>;

/// Joint `p(u, v, x) = p(u, x) p(v, x) / p(x)` from two binary-input
/// decompositions with the same mean.
fn couple_binary(u: &Atoms, v: &Atoms) -> Result<JointPmf> {
    let u: Atoms = u.iter().copied().filter(|a| a.0 > 0.0).collect();
    let v: Atoms = v.iter().copied().filter(|a| a.0 > 0.0).collect();
    let p0: f64 = u.iter().map(|(w, a)| w * a).sum();
    let px = [p0, 1.0 - p0];
    let mut table = Vec::with_capacity(u.len() * v.len() * 2);
    for &(wu, au) in &u {
        for &(wv, av) in &v {
            let pu = [wu * au, wu * (1.0 - au)];
            let pv = [wv * av, wv * (1.0 - av)];
            for x in 0..2 {
                table.push(if px[x] > 0.0 {
                    pu[x] * pv[x] / px[x]
                } else {
                    0.0
                });
            }
        }
    }
    JointPmf::new(
        vec![Var::U, Var::V, Var::X],
        vec![u.len(), v.len(), 2],
        table,
    )
}

/// Decomposition of `eta` read off the hull segment of `env` containing it.
fn segment_atoms(env: &Envelope, n: usize, eta: f64) -> Atoms {
    let (l, r, w) = env.segment(eta);
    if l == r {
        return vec![(1.0, eta)];
    }
    vec![(w, grid_eta(l, n)), (1.0 - w, grid_eta(r, n))]
}

/// Moves the two atoms of a decomposition of `eta` continuously to maximize
/// `sum_i w_i phi(alpha_i)`, starting from grid atoms `atoms`.
fn polish_atoms(phi: &impl Fn(f64) -> f64, eta: f64, atoms: &Atoms, step: f64) -> (Atoms, f64) {
    let value = |atoms: &Atoms| atoms.iter().map(|(w, a)| w * phi(*a)).sum::<f64>();
    let start = value(atoms);
    if atoms.len() != 2 {
        let single = vec![(1.0, eta)];
        let v = value(&single);
        return if v >= start {
            (single, v)
        } else {
            (atoms.clone(), start)
        };
    }
    let (mut l, mut r) = (atoms[0].1, atoms[1].1);
    let pair = |l: f64, r: f64| -> f64 {
        if r - l <= 0.0 {
            return phi(eta);
        }
        let w = (r - eta) / (r - l);
        w * phi(l) + (1.0 - w) * phi(r)
    };
    let mut best = pair(l, r);
    for _ in 0..30 {
        let before = best;
        let (nl, vl) = golden_max(
            |x| pair(x, r),
            (l - 2.0 * step).max(0.0),
            (l + 2.0 * step).min(eta),
            1e-14,
        );
        if vl > best {
            l = nl;
            best = vl;
        }
        let (nr, vr) = golden_max(
            |x| pair(l, x),
            (r - 2.0 * step).max(eta),
            (r + 2.0 * step).min(1.0),
            1e-14,
        );
        if vr > best {
            r = nr;
            best = vr;
        }
        if best - before <= 1e-16 {
            break;
        }
    }
    if best < start {
        return (atoms.clone(), start);
    }
    let w = if r > l { (r - eta) / (r - l) } else { 1.0 };
    (vec![(w, l), (1.0 - w, r)], best)
}

/// Output and noise entropies sampled on the grid.
struct Profiles {
    n: usize,
    h1: Vec<f64>,
    h2: Vec<f64>,
    h1x: Vec<f64>,
    h2x: Vec<f64>,
    p: BinaryProfile,
}

impl Profiles {
    fn new(p: BinaryProfile, n: usize) -> Self {
        let etas: Vec<f64> = (0..n).map(|i| grid_eta(i, n)).collect();
        Self {
            n,
            h1: etas.iter().map(|&e| p.h_y1(e)).collect(),
            h2: etas.iter().map(|&e| p.h_y2(e)).collect(),
            h1x: etas.iter().map(|&e| p.h_y1_x(e)).collect(),
            h2x: etas.iter().map(|&e| p.h_y2_x(e)).collect(),
            p,
        }
    }

    /// Hull of `c2 H(Y2) - c1 H(Y1)` (the `U` side) sampled on the grid.
    fn hull_u(&self, c1: f64, c2: f64) -> Envelope {
        let v = self
            .h2
            .iter()
            .zip(&self.h1)
            .map(|(h2, h1)| c2 * h2 - c1 * h1)
            .collect();
        upper_concave_envelope(&GridFunction::new(v).expect("finite samples"))
    }

    /// Hull of `c4 H(Y1) - c3 H(Y2)` (the `V` side).
    fn hull_v(&self, c3: f64, c4: f64) -> Envelope {
        let v = self
            .h1
            .iter()
            .zip(&self.h2)
            .map(|(h1, h2)| c4 * h1 - c3 * h2)
            .collect();
        upper_concave_envelope(&GridFunction::new(v).expect("finite samples"))
    }
}

fn binary_profile(ch: &BroadcastChannel) -> Option<BinaryProfile> {
    BinaryProfile::of(ch)
}

fn envelope_sum_rate(ch: &BroadcastChannel, prof: &Profiles) -> Result<OuterSumRate> {
    let n = prof.n;
    let p = &prof.p;
    let env_a = prof.hull_u(1.0, 1.0);
    let env_b = prof.hull_v(1.0, 1.0);
    // A^(eta) = H(Y1) - H(Y2|X) + env[H(Y2) - H(Y1)], symmetrically for B^
    let a_hat = |i: usize| prof.h1[i] - prof.h2x[i] + env_a.values().values()[i];
    let b_hat = |i: usize| prof.h2[i] - prof.h1x[i] + env_b.values().values()[i];
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = a_hat(i).min(b_hat(i));
        if v > best.1 {
            best = (i, v);
        }
    }
    let phi_a = |a: f64| p.h_y2(a) - p.h_y1(a);
    let phi_b = |a: f64| p.h_y1(a) - p.h_y2(a);
    let a_cont = |e: f64| p.h_y1(e) - p.h_y2_x(e) + env_a.eval(e).max(phi_a(e));
    let b_cont = |e: f64| p.h_y2(e) - p.h_y1_x(e) + env_b.eval(e).max(phi_b(e));
    let step = 1.0 / (n - 1) as f64;
    let lo = grid_eta(best.0.saturating_sub(1), n);
    let hi = grid_eta((best.0 + 1).min(n - 1), n);
    let (eta, v) = golden_max(|e| a_cont(e).min(b_cont(e)), lo, hi, 1e-13);
    let eta = if v >= best.1 {
        eta
    } else {
        grid_eta(best.0, n)
    };
    let (u, _) = polish_atoms(&phi_a, eta, &segment_atoms(&env_a, n, eta), step);
    let (v, _) = polish_atoms(&phi_b, eta, &segment_atoms(&env_b, n, eta), step);
    let witness = couple_binary(&u, &v)?;
    let terms = OuterTerms::from_joint(&witness, ch)?;
    Ok(OuterSumRate {
        value: terms.sum_bound(),
        method: OuterMethod::Envelope { grid: n },
        terms,
        witness,
    })
}

/// Maximum over `p(u, v, x)` of `min{I(U;Y1) + I(X;Y2|U), I(V;Y2) + I(X;Y1|V)}`.
///
/// Binary inputs use the envelope reduction on a `cfg.grid`-point grid;
/// larger inputs fall back to [`outer_sum_rate_search`].
pub fn outer_sum_rate(ch: &BroadcastChannel, cfg: &SearchConfig) -> Result<OuterSumRate> {
    cfg.validate()?;
    match binary_profile(ch) {
        Some(p) => envelope_sum_rate(ch, &Profiles::new(p, cfg.grid)),
        None => outer_sum_rate_search(ch, cfg),
    }
}

fn uvx_search(
    ch: &BroadcastChannel,
    cfg: &SearchConfig,
    stream_base: u64,
    objective: impl Fn(&Polytope) -> f64 + Sync,
) -> Result<(JointPmf, OuterTerms, usize)> {
    let nx = ch.input_size();
    let nu = cfg.card_u.unwrap_or(nx + 1);
    let nv = cfg.card_v.unwrap_or(nx + 1);
    let n = nu * nv * nx;
    let init = |rng: &mut ChaCha8Rng| simplex_logits(rng, n);
    let make = || {
        let mut kernel = UvxIncremental::new(ch, nu, nv);
        let objective = &objective;
        move |theta: &[f64]| {
            let r = kernel.eval(theta);
            objective(&Polytope {
                r1_max: r.i_u_y1,
                r2_max: r.i_v_y2,
                sum_max: (r.i_u_y1 + r.i_x_y2_u).min(r.i_v_y2 + r.i_x_y1_v),
            })
        }
    };
    let best = multi_start(cfg, stream_base, init, make);
    let mut table = vec![0.0; n];
    softmax_into(&best.params, &mut table);
    let witness = JointPmf::new(vec![Var::U, Var::V, Var::X], vec![nu, nv, nx], table)?;
    let terms = OuterTerms::from_joint(&witness, ch)?;
    Ok((witness, terms, nu.max(nv)))
}

/// Direct multi-start search for the outer sum rate over `p(u, v, x)`
/// with `|U| = |V| = |X| + 1` unless configured otherwise.
pub fn outer_sum_rate_search(ch: &BroadcastChannel, cfg: &SearchConfig) -> Result<OuterSumRate> {
    cfg.validate()?;
    let (witness, terms, card) = uvx_search(ch, cfg, 1 << 40, |p| p.sum_max)?;
    Ok(OuterSumRate {
        value: terms.sum_bound(),
        method: OuterMethod::Search {
            restarts: cfg.restarts,
            card,
        },
        terms,
        witness,
    })
}

/// `(s, t)`-dual of the weighted maximum for a binary input.
struct Dual<'a> {
    prof: &'a Profiles,
    lambda: f64,
}

/// The `U` and `V` hulls and the best grid index for one dual point.
struct DualEval {
    value: f64,
    index: usize,
    env_u: Envelope,
    env_v: Envelope,
}

impl Dual<'_> {
    fn smax(&self) -> f64 {
        self.lambda.max(1.0 - self.lambda)
    }

    /// Multipliers `(mu1, mu2, mu3, mu4)` on `I(U;Y1)`, `I(X;Y2|U)`,
    /// `I(V;Y2)`, `I(X;Y1|V)`.
    fn multipliers(&self, s: f64, t: f64) -> [f64; 4] {
        let y1 = (self.lambda - s - t).max(0.0);
        let y2 = (1.0 - self.lambda - s - t).max(0.0);
        [y1 + s, s, y2 + t, t]
    }

    fn eval(&self, s: f64, t: f64) -> DualEval {
        let [m1, m2, m3, m4] = self.multipliers(s, t);
        let p = self.prof;
        let env_u = p.hull_u(m1, m2);
        let env_v = p.hull_v(m3, m4);
        let (eu, ev) = (env_u.values().values(), env_v.values().values());
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..p.n {
            let g = m1 * p.h1[i] - m2 * p.h2x[i] + eu[i] + m3 * p.h2[i] - m4 * p.h1x[i] + ev[i];
            if g > best.1 {
                best = (i, g);
            }
        }
        DualEval {
            value: best.1,
            index: best.0,
            env_u,
            env_v,
        }
    }

    /// Minimizes the convex dual over the triangle `s, t >= 0`, `s + t <= smax`.
    fn minimize(&self) -> (f64, f64) {
        let smax = self.smax();
        let inner = |s: f64| {
            let (t, v) = golden_max(|t| -self.eval(s, t).value, 0.0, smax - s, 1e-7);
            (t, -v)
        };
        let (s, _) = golden_max(|s| -inner(s).1, 0.0, smax, 1e-7);
        (s, inner(s).0)
    }
}

type Entropy = fn(&BinaryProfile, f64) -> f64;

/// Functionals of a `U` decomposition at fixed mean: `(I(U;Y1), I(X;Y2|U))`,
/// or of a `V` decomposition: `(I(V;Y2), I(X;Y1|V))`.
fn functionals(p: &BinaryProfile, atoms: &Atoms, eta: f64, side: Side) -> (f64, f64) {
    let (h_own, h_other, noise_other): (Entropy, Entropy, f64) = match side {
        Side::U => (BinaryProfile::h_y1, BinaryProfile::h_y2, p.h_y2_x(eta)),
        Side::V => (BinaryProfile::h_y2, BinaryProfile::h_y1, p.h_y1_x(eta)),
    };
    let own: f64 = atoms.iter().map(|(w, a)| w * h_own(p, *a)).sum();
    let other: f64 = atoms.iter().map(|(w, a)| w * h_other(p, *a)).sum();
    (h_own(p, eta) - own, other - noise_other)
}

fn mix(a: &Atoms, b: &Atoms, theta: f64) -> Atoms {
    let mut out: Atoms = Vec::with_capacity(a.len() + b.len());
    for (w, x) in a
        .iter()
        .map(|&(w, x)| (w * theta, x))
        .chain(b.iter().map(|&(w, x)| (w * (1.0 - theta), x)))
    {
        if w <= 0.0 {
            continue;
        }
        match out.iter_mut().find(|(_, y)| *y == x) {
            Some(e) => e.0 += w,
            None => out.push((w, x)),
        }
    }
    out
}

/// Primal point for one weight on a binary input: decompositions at the
/// dual's maximizing `eta`, mixed pairwise to close the duality gap.
fn binary_region_entry(ch: &BroadcastChannel, prof: &Profiles, lambda: f64) -> Result<RegionEntry> {
    let dual = Dual { prof, lambda };
    let (s, t) = dual.minimize();
    let center = dual.eval(s, t);
    let smax = dual.smax();
    let mut points = vec![(s, t)];
    for d in [1e-2, 1e-3, 1e-4] {
        let d = d * smax;
        for (ds, dt) in [(d, 0.0), (-d, 0.0), (0.0, d), (0.0, -d)] {
            let (ps, pt) = (s + ds, t + dt);
            if ps >= 0.0 && pt >= 0.0 && ps + pt <= smax {
                points.push((ps, pt));
            }
        }
    }
    let evals: Vec<DualEval> = points.iter().map(|&(a, b)| dual.eval(a, b)).collect();
    let mut etas: Vec<usize> = vec![center.index];
    for e in &evals {
        if !etas.contains(&e.index) {
            etas.push(e.index);
        }
    }
    let p = &prof.p;
    let mut best: Option<(f64, Atoms, Atoms)> = None;
    for &i in &etas {
        let eta = grid_eta(i, prof.n);
        let mut cu: Vec<Atoms> = Vec::new();
        let mut cv: Vec<Atoms> = Vec::new();
        for e in &evals {
            let u = segment_atoms(&e.env_u, prof.n, eta);
            if !cu.contains(&u) {
                cu.push(u);
            }
            let v = segment_atoms(&e.env_v, prof.n, eta);
            if !cv.contains(&v) {
                cv.push(v);
            }
        }
        let fu: Vec<(f64, f64)> = cu.iter().map(|a| functionals(p, a, eta, Side::U)).collect();
        let fv: Vec<(f64, f64)> = cv.iter().map(|a| functionals(p, a, eta, Side::V)).collect();
        for i1 in 0..cu.len() {
            for i2 in i1..cu.len() {
                for j1 in 0..cv.len() {
                    for j2 in j1..cv.len() {
                        let psi = |tu: f64, tv: f64| {
                            let (a, c) = lerp(fu[i1], fu[i2], tu);
                            let (b, d) = lerp(fv[j1], fv[j2], tv);
                            Polytope {
                                r1_max: a,
                                r2_max: b,
                                sum_max: (a + c).min(b + d),
                            }
                            .support_or_penalty(lambda)
                        };
                        let inner = |tu: f64| golden_max(|tv| psi(tu, tv), 0.0, 1.0, 1e-10);
                        let (tu, v) = golden_max(|tu| inner(tu).1, 0.0, 1.0, 1e-10);
                        let tv = inner(tu).0;
                        if best.as_ref().is_none_or(|b| v > b.0) {
                            best = Some((v, mix(&cu[i1], &cu[i2], tu), mix(&cv[j1], &cv[j2], tv)));
                        }
                    }
                }
            }
        }
    }
    let (_, u, v) = best.expect("at least one candidate pair");
    let witness = couple_binary(&u, &v)?;
    let terms = OuterTerms::from_joint(&witness, ch)?;
    let (value, rates) = terms
        .polytope()
        .support(lambda)
        .unwrap_or((0.0, RatePair { r1: 0.0, r2: 0.0 }));
    Ok(RegionEntry {
        lambda,
        value,
        rates,
        upper: Some(center.value),
        witness,
    })
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (t * a.0 + (1.0 - t) * b.0, t * a.1 + (1.0 - t) * b.1)
}

fn search_region_entry(
    ch: &BroadcastChannel,
    cfg: &SearchConfig,
    lambda: f64,
) -> Result<RegionEntry> {
    let (witness, terms, _) = uvx_search(ch, cfg, 2 << 40, |p| p.support_or_penalty(lambda))?;
    let (value, rates) = terms
        .polytope()
        .support(lambda)
        .unwrap_or((0.0, RatePair { r1: 0.0, r2: 0.0 }));
    Ok(RegionEntry {
        lambda,
        value,
        rates,
        upper: None,
        witness,
    })
}

/// Support-function samples of the outer region at `lambdas`.
///
/// Binary inputs: the Lagrange dual in the two sum-rate multipliers is
/// minimized over grid hulls (reported as `upper`), and a primal witness is
/// assembled from the hull decompositions at the dual's optimum (reported
/// as `value`). Larger inputs use multi-start search. `sum_rate` is twice
/// the value at `lambda = 1/2`.
pub fn outer_region(
    ch: &BroadcastChannel,
    lambdas: &[f64],
    cfg: &SearchConfig,
) -> Result<RegionSample> {
    cfg.validate()?;
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::Domain {
            what: "lambda",
            value: bad,
            domain: "[0, 1]",
        });
    }
    let prof = binary_profile(ch).map(|p| Profiles::new(p, cfg.grid));
    let one = |l: f64| match &prof {
        Some(prof) => binary_region_entry(ch, prof, l),
        None => search_region_entry(ch, cfg, l),
    };
    let entries = lambdas
        .iter()
        .map(|&l| one(l))
        .collect::<Result<Vec<_>>>()?;
    let half = match entries.iter().find(|e| e.lambda == 0.5) {
        Some(e) => e.value,
        None => one(0.5)?.value,
    };
    Ok(RegionSample {
        entries,
        sum_rate: 2.0 * half,
    })
}
