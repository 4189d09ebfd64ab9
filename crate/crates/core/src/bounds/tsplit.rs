//! Sum rate of Marton's bound when a binary `W = T` selects which receiver
//! gets the private message: `T = 0` sends `X` to `Y1`, `T = 1` to `Y2`.

use serde::Serialize;

use super::capacity::golden_max;
use super::eval::BinaryProfile;
use crate::error::{Error, Result};
use crate::probcore::BroadcastChannel;

/// Maximizer of the split expression: `tau = P(T=0)`, `a = P(X=0|T=0)`,
/// `b = P(X=0|T=1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TSplit {
    pub value: f64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
}

fn profile(ch: &BroadcastChannel) -> Result<BinaryProfile> {
    BinaryProfile::of(ch).ok_or_else(|| {
        Error::Unsupported(format!(
            "the split evaluator needs a binary input, got |X| = {}",
            ch.input_size()
        ))
    })
}

fn value_with(p: &BinaryProfile, tau: f64, a: f64, b: f64) -> f64 {
    let eta = tau * a + (1.0 - tau) * b;
    let i_t_y1 = p.h_y1(eta) - tau * p.h_y1(a) - (1.0 - tau) * p.h_y1(b);
    let i_t_y2 = p.h_y2(eta) - tau * p.h_y2(a) - (1.0 - tau) * p.h_y2(b);
    i_t_y1.min(i_t_y2) + tau * p.i_x_y1(a) + (1.0 - tau) * p.i_x_y2(b)
}

/// `min{I(T;Y1), I(T;Y2)} + tau I(X;Y1|T=0) + (1 - tau) I(X;Y2|T=1)`.
pub fn tsplit_value(ch: &BroadcastChannel, tau: f64, a: f64, b: f64) -> Result<f64> {
    for (what, v) in [("tau", tau), ("a", a), ("b", b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                what,
                value: v,
                domain: "[0, 1]",
            });
        }
    }
    Ok(value_with(&profile(ch)?, tau, a, b))
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::Config("grid needs at least 2 points".into()));
    }
    Ok(())
}

/// Local refinement around `x`: a shrinking 11^3 lattice (which follows the
/// ridge where the two `I(T; Y)` terms cross), then coordinate-wise golden
/// sections.
fn refine(p: &BinaryProfile, mut x: [f64; 3], mut best: f64, step: f64) -> ([f64; 3], f64) {
    const K: i32 = 5;
    let mut half = 2.0 * step;
    while half > 1e-13 {
        let h = half / K as f64;
        let centre = x;
        for i in -K..=K {
            for j in -K..=K {
                for k in -K..=K {
                    let y = [
                        (centre[0] + i as f64 * h).clamp(0.0, 1.0),
                        (centre[1] + j as f64 * h).clamp(0.0, 1.0),
                        (centre[2] + k as f64 * h).clamp(0.0, 1.0),
                    ];
                    let v = value_with(p, y[0], y[1], y[2]);
                    if v > best {
                        best = v;
                        x = y;
                    }
                }
            }
        }
        half *= 0.5;
    }
    for _ in 0..60 {
        let before = best;
        for k in 0..3 {
            let lo = (x[k] - step).max(0.0);
            let hi = (x[k] + step).min(1.0);
            let (xk, v) = golden_max(
                |t| {
                    let mut y = x;
                    y[k] = t;
                    value_with(p, y[0], y[1], y[2])
                },
                lo,
                hi,
                1e-13,
            );
            if v > best {
                best = v;
                x[k] = xk;
            }
        }
        if best - before <= 1e-15 {
            break;
        }
    }
    (x, best)
}

/// Maximizes the split expression on a `grid^3` lattice over
/// `(tau, a, b)`, then refines locally around the best lattice point.
pub fn marton_sum_rate_tsplit(ch: &BroadcastChannel, grid: usize) -> Result<TSplit> {
    let p = profile(ch)?;
    check_grid(grid)?;
    let step = 1.0 / (grid - 1) as f64;
    let pts: Vec<f64> = (0..grid).map(|i| i as f64 * step).collect();
    let h1: Vec<f64> = pts.iter().map(|&e| p.h_y1(e)).collect();
    let h2: Vec<f64> = pts.iter().map(|&e| p.h_y2(e)).collect();
    let i1: Vec<f64> = pts.iter().map(|&e| p.i_x_y1(e)).collect();
    let i2: Vec<f64> = pts.iter().map(|&e| p.i_x_y2(e)).collect();
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for &tau in &pts {
        let s = 1.0 - tau;
        for ia in 0..grid {
            for ib in 0..grid {
                let eta = tau * pts[ia] + s * pts[ib];
                let t1 = p.h_y1(eta) - tau * h1[ia] - s * h1[ib];
                let t2 = p.h_y2(eta) - tau * h2[ia] - s * h2[ib];
                let v = t1.min(t2) + tau * i1[ia] + s * i2[ib];
                if v > best.0 {
                    best = (v, [tau, pts[ia], pts[ib]]);
                }
            }
        }
    }
    let (x, value) = refine(&p, best.1, best.0, step);
    Ok(TSplit {
        value,
        tau: x[0],
        a: x[1],
        b: x[2],
    })
}

/// The split expression restricted to `tau = 1/2`, `b = 1 - a`.
pub fn tsplit_symmetric(ch: &BroadcastChannel, grid: usize) -> Result<TSplit> {
    let p = profile(ch)?;
    check_grid(grid)?;
    let step = 1.0 / (grid - 1) as f64;
    let f = |a: f64| value_with(&p, 0.5, a, 1.0 - a);
    let (a0, v0) = (0..grid)
        .map(|i| i as f64 * step)
        .fold((0.0, f64::NEG_INFINITY), |b, a| {
            let v = f(a);
            if v > b.1 {
                (a, v)
            } else {
                b
            }
        });
    let (a, v) = golden_max(f, (a0 - step).max(0.0), (a0 + step).min(1.0), 1e-13);
    let (a, value) = if v >= v0 { (a, v) } else { (a0, v0) };
    Ok(TSplit {
        value,
        tau: 0.5,
        a,
        b: 1.0 - a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bssc, single_user_capacity};
    use crate::probcore::{Output, TransitionMatrix};

    #[test]
    fn skew_channel_split_value() {
        let ch = bssc(0.5).unwrap();
        let t = marton_sum_rate_tsplit(&ch, 101).unwrap();
        assert!((t.value - 0.3616).abs() < 5e-4, "{t:?}");
        let reeval = tsplit_value(&ch, t.tau, t.a, t.b).unwrap();
        assert_eq!(reeval, t.value);
    }

    #[test]
    fn symmetric_slice_reaches_the_maximum() {
        let ch = bssc(0.5).unwrap();
        let full = marton_sum_rate_tsplit(&ch, 101).unwrap();
        let sym = tsplit_symmetric(&ch, 2001).unwrap();
        assert!((full.value - sym.value).abs() < 1e-8, "{full:?} {sym:?}");
        assert!((sym.a + sym.b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_t_is_single_user() {
        let ch = bssc(0.5).unwrap();
        let c1 = single_user_capacity(&ch, Output::Y1);
        let a = c1.input.weights()[0];
        // tau = 1: T constant, everything goes to Y1
        let v = tsplit_value(&ch, 1.0, a, 0.3).unwrap();
        assert!((v - c1.value).abs() < 1e-12);
        let v0 = tsplit_value(&ch, 0.0, 0.3, 1.0 - a).unwrap();
        assert!((v0 - c1.value).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_binary() {
        let id = TransitionMatrix::identity(3);
        let ch = BroadcastChannel::new(id.clone(), id).unwrap();
        assert!(matches!(
            marton_sum_rate_tsplit(&ch, 11),
            Err(Error::Unsupported(_))
        ));
        assert!(tsplit_value(&bssc(0.5).unwrap(), 1.2, 0.0, 0.0).is_err());
    }
}
