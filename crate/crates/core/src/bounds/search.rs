//! Seeded multi-start pattern search.
//!
//! Each restart draws its starting point from its own ChaCha stream
//! `(seed, stream_base + restart)`, so restarts can run in any order or in
//! parallel. Results are merged by value, ties going to the lowest restart
//! index; the outcome never depends on scheduling.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::rng_for;

/// Knobs shared by every nonconvex search and grid evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Maximum exploratory sweeps per restart.
    pub iterations: usize,
    pub seed: u64,
    /// Auxiliary alphabet sizes; `None` picks the per-bound default.
    pub card_u: Option<usize>,
    pub card_v: Option<usize>,
    pub card_w: Option<usize>,
    /// Pattern-search step size at which a restart stops.
    pub tol: f64,
    /// Points on `[0, 1]` for one-dimensional envelope evaluations.
    pub grid: usize,
    /// Best restarts that get a long refinement after the screening pass.
    pub polish: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 400,
            seed: 0,
            card_u: None,
            card_v: None,
            card_w: None,
            tol: 1e-7,
            grid: 4097,
            polish: 4,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        for (name, c) in [("U", self.card_u), ("V", self.card_v), ("W", self.card_w)] {
            if c == Some(0) {
                return Err(Error::Config(format!("|{name}| must be at least 1")));
            }
        }
        if self.grid < 2 {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Best point found by [`multi_start`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub value: f64,
    pub params: Vec<f64>,
    pub restart: usize,
}

fn total(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Coordinate exploration around `x` with step `step`; returns the improved value.
fn explore(f: &mut impl FnMut(&[f64]) -> f64, x: &mut [f64], mut fx: f64, step: f64) -> f64 {
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + step;
        let up = total(f(x));
        if up > fx {
            fx = up;
            continue;
        }
        x[i] = orig - step;
        let down = total(f(x));
        if down > fx {
            fx = down;
            continue;
        }
        x[i] = orig;
    }
    fx
}

/// Hooke–Jeeves pattern search (maximization) from `x`.
///
/// Stops when the step falls below `tol` or after `max_sweeps` exploratory
/// sweeps. Returns the best point and value.
pub fn hooke_jeeves(
    f: &mut impl FnMut(&[f64]) -> f64,
    mut base: Vec<f64>,
    init_step: f64,
    tol: f64,
    max_sweeps: usize,
) -> (Vec<f64>, f64) {
    let mut fb = total(f(&base));
    let mut step = init_step;
    let mut sweeps = 0;
    let mut trial = base.clone();
    while step >= tol && sweeps < max_sweeps {
        trial.copy_from_slice(&base);
        let mut ft = explore(f, &mut trial, fb, step);
        sweeps += 1;
        if ft > fb {
            // pattern moves while they keep paying off
            loop {
                let mut pattern: Vec<f64> =
                    trial.iter().zip(&base).map(|(t, b)| 2.0 * t - b).collect();
                std::mem::swap(&mut base, &mut trial);
                fb = ft;
                if sweeps >= max_sweeps {
                    break;
                }
                let fp = total(f(&pattern));
                let fp = explore(f, &mut pattern, fp, step);
                sweeps += 1;
                if fp > fb {
                    trial = pattern;
                    ft = fp;
                } else {
                    trial.copy_from_slice(&base);
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
    (base, fb)
}

/// Runs `cfg.restarts` seeded pattern searches and keeps the best.
///
/// `init` draws a starting point; `make_objective` builds a fresh objective
/// (with its own scratch buffers) for each restart. When `cfg.polish > 0`
/// the best screened restarts continue with a twenty-fold sweep budget.
pub fn multi_start<I, M, F>(
    cfg: &SearchConfig,
    stream_base: u64,
    init: I,
    make_objective: M,
) -> SearchOutcome
where
    I: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
    M: Fn() -> F + Sync,
    F: FnMut(&[f64]) -> f64,
{
    let run = |r: usize, sweeps: usize| {
        let mut rng = rng_for(cfg.seed, stream_base.wrapping_add(r as u64));
        let x0 = init(&mut rng);
        let mut f = make_objective();
        let (x, v) = hooke_jeeves(&mut f, x0, 1.0, cfg.tol, sweeps);
        (v, x)
    };
    let better = |a: (f64, usize), b: (f64, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let mut screened: Vec<(f64, usize)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| (run(r, cfg.iterations).0, r))
        .collect();
    let (mut value, mut restart) = screened
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, usize::MAX), better);
    let mut params = run(restart, cfg.iterations).1;
    if cfg.polish > 0 {
        screened.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let top: Vec<usize> = screened.iter().take(cfg.polish).map(|s| s.1).collect();
        let polished: Vec<(f64, usize, Vec<f64>)> = top
            .par_iter()
            .map(|&r| {
                let (_, x) = run(r, cfg.iterations);
                let mut f = make_objective();
                let (x, v) = hooke_jeeves(&mut f, x, 0.25, cfg.tol * 1e-2, cfg.iterations * 20);
                (v, r, x)
            })
            .collect();
        for (v, r, x) in polished {
            if better((value, restart), (v, r)) == (v, r) {
                value = v;
                restart = r;
                params = x;
            }
        }
    }
    SearchOutcome {
        value,
        params,
        restart,
    }
}

/// Draws softmax logits whose image is uniform on the simplex.
pub fn simplex_logits(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::Exp1;
    (0..n)
        .map(|_| {
            let e: f64 = rng.sample(Exp1);
            e.max(1e-300).ln()
        })
        .collect()
}

/// Numerically stable softmax into `out`.
pub fn softmax_into(theta: &[f64], out: &mut [f64]) {
    let m = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, &t) in out.iter_mut().zip(theta) {
        *o = (t - m).exp();
        s += *o;
    }
    let inv = 1.0 / s;
    out.iter_mut().for_each(|o| *o *= inv);
}
