use serde::Serialize;

use super::eval::{cond_out_entropy, RowEntropies};
use crate::probcore::{BroadcastChannel, Output, Pmf, TransitionMatrix};

/// Single-user capacity and a maximizing input law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    pub value: f64,
    pub input: Pmf,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let candidates = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))];
    candidates.into_iter().fold(
        (lo, f64::NEG_INFINITY),
        |best, c| if c.1 > best.1 { c } else { best },
    )
}

/// `I(X; Y)` for input law `p_x`.
pub(crate) fn mutual_info(p_x: &[f64], tm: &TransitionMatrix, row_h: &[f64]) -> f64 {
    let mut q = vec![0.0; tm.output_size()];
    cond_out_entropy(p_x, tm, &mut q) - p_x.iter().zip(row_h).map(|(p, h)| p * h).sum::<f64>()
}

const BINARY_GRID: usize = 1025;

fn binary_capacity(tm: &TransitionMatrix, row_h: &[f64]) -> Capacity {
    let f = |eta: f64| mutual_info(&[eta, 1.0 - eta], tm, row_h);
    let step = 1.0 / (BINARY_GRID - 1) as f64;
    let best = (0..BINARY_GRID)
        .map(|i| i as f64 * step)
        .fold((0.0, f64::NEG_INFINITY), |b, e| {
            let v = f(e);
            if v > b.1 {
                (e, v)
            } else {
                b
            }
        });
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(1.0);
    let (eta, value) = golden_max(f, lo, hi, 1e-12);
    let (eta, value) = if value >= best.1 { (eta, value) } else { best };
    Capacity {
        value,
        input: Pmf::new(vec![eta, 1.0 - eta]).expect("binary law"),
    }
}

/// Blahut–Arimoto iteration, stopped when the upper and lower capacity
/// estimates agree within `1e-12` bits.
fn blahut_arimoto(tm: &TransitionMatrix) -> Capacity {
    let nx = tm.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut lower = 0.0;
    for _ in 0..200_000 {
        let q = tm.push(&p);
        for (x, dx) in d.iter_mut().enumerate() {
            // relative entropy D(W(.|x) || q) in bits
            *dx = tm
                .row(x)
                .iter()
                .zip(&q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, qy)| w * (w / qy).log2())
                .sum();
        }
        lower = p.iter().zip(&d).map(|(p, d)| p * d).sum::<f64>();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < 1e-12 {
            break;
        }
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp2();
            z += *px;
        }
        p.iter_mut().for_each(|v| *v /= z);
    }
    Capacity {
        value: lower,
        input: Pmf::new(p).expect("iterates stay normalized"),
    }
}

/// `max_{p(x)} I(X; Y)` toward the chosen receiver.
///
/// Binary inputs use a 1025-point scan followed by golden-section refinement;
/// larger inputs use Blahut–Arimoto.
pub fn single_user_capacity(ch: &BroadcastChannel, output: Output) -> Capacity {
    let tm = ch.output(output);
    let rows = RowEntropies::of(ch);
    let row_h = match output {
        Output::Y1 => &rows.y1,
        Output::Y2 => &rows.y2,
    };
    if tm.input_size() == 1 {
        return Capacity {
            value: 0.0,
            input: Pmf::uniform(1),
        };
    }
    if tm.input_size() == 2 {
        binary_capacity(tm, row_h)
    } else {
        blahut_arimoto(tm)
    }
}

/// Sum rate of time division: `max{C1, C2}`.
pub fn time_division_sum_rate(ch: &BroadcastChannel) -> f64 {
    single_user_capacity(ch, Output::Y1)
        .value
        .max(single_user_capacity(ch, Output::Y2).value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bssc;
    use crate::sampling::{random_transition, rng_for};

    fn identity(n: usize) -> BroadcastChannel {
        BroadcastChannel::new(TransitionMatrix::identity(n), TransitionMatrix::identity(n)).unwrap()
    }

    #[test]
    fn noiseless_binary() {
        let c = single_user_capacity(&identity(2), Output::Y1);
        assert!((c.value - 1.0).abs() < 1e-12);
        assert!((c.input.weights()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn noiseless_ternary() {
        let c = single_user_capacity(&identity(3), Output::Y2);
        assert!((c.value - 3f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn skew_channel_capacity() {
        let ch = bssc(0.5).unwrap();
        let c1 = single_user_capacity(&ch, Output::Y1);
        let c2 = single_user_capacity(&ch, Output::Y2);
        assert!((c1.value - 0.321928).abs() < 1e-6);
        assert!((c1.input.weights()[0] - 0.4).abs() < 1e-6);
        assert!((c1.value - c2.value).abs() < 1e-12);
        assert!((time_division_sum_rate(&ch) - 0.321928).abs() < 1e-6);
    }

    #[test]
    fn one_sided_channel() {
        let useless = TransitionMatrix::constant(2, Pmf::uniform(2));
        let ch = BroadcastChannel::new(TransitionMatrix::identity(2), useless).unwrap();
        assert!((time_division_sum_rate(&ch) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blahut_arimoto_agrees_with_scan_on_binary() {
        let mut rng = rng_for(9, 0);
        for _ in 0..10 {
            let tm = random_transition(&mut rng, 2, 3);
            let ch = BroadcastChannel::new(tm.clone(), tm.clone()).unwrap();
            let scan = single_user_capacity(&ch, Output::Y1).value;
            let ba = blahut_arimoto(&tm).value;
            assert!((scan - ba).abs() < 1e-9, "{scan} vs {ba}");
        }
    }

    #[test]
    fn golden_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && v <= 0.0);
    }
}
