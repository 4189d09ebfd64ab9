use super::{Pmf, TransitionMatrix, PROB_TOL};
use crate::error::{Error, Result};

/// `-p log2 p`, with the continuous extension `0` at `p = 0`.
#[inline]
pub fn plog2p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy without domain checks; the argument is clamped to `[0, 1]`.
#[inline]
pub fn h2(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    plog2p(p) + plog2p(1.0 - p)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) || p.is_nan() {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    Ok(h2(p))
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_of_weights(p.weights())
}

/// Sum of `-w log2 w` over a slice; no normalization check.
#[inline]
pub fn entropy_of_weights(w: &[f64]) -> f64 {
    w.iter().map(|&p| plog2p(p)).sum()
}

/// `H(Y | S)` for a table `p(s, x)` stored row-major with `n_x` columns,
/// pushed through `channel`.
///
/// Rows may be unnormalized; the table as a whole should carry unit mass.
pub fn conditional_output_entropy(p_sx: &[f64], n_x: usize, channel: &TransitionMatrix) -> f64 {
    debug_assert_eq!(n_x, channel.input_size());
    debug_assert_eq!(p_sx.len() % n_x, 0);
    let n_y = channel.output_size();
    let mut q = vec![0.0; n_y];
    let mut total = 0.0;
    for row in p_sx.chunks_exact(n_x) {
        let ps: f64 = row.iter().sum();
        if ps <= 0.0 {
            continue;
        }
        q.iter_mut().for_each(|v| *v = 0.0);
        for (x, &pxs) in row.iter().enumerate() {
            if pxs > 0.0 {
                for (qy, &w) in q.iter_mut().zip(channel.row(x)) {
                    *qy += pxs * w;
                }
            }
        }
        // H(S=s, Y) - H(S=s) contribution
        total += entropy_of_weights(&q) - plog2p(ps);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.1 log2 0.1 - 0.9 log2 0.9
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.468996, epsilon = 1e-6);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
        assert!(binary_entropy(1.0 + 1e-13).is_ok());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&Pmf::uniform(4)), 2.0);
        assert_eq!(entropy(&Pmf::point(3, 0)), 0.0);
        assert_abs_diff_eq!(
            entropy(&Pmf::new(vec![0.5, 0.25, 0.25]).unwrap()),
            1.5,
            epsilon = 1e-15
        );
        for n in 1..40 {
            assert_abs_diff_eq!(
                entropy(&Pmf::uniform(n)),
                (n as f64).log2(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn conditional_output_entropy_of_noiseless_channel() {
        let id = TransitionMatrix::identity(2);
        // S independent of X uniform: H(Y|S) = 1
        let p = [0.25, 0.25, 0.25, 0.25];
        assert_abs_diff_eq!(conditional_output_entropy(&p, 2, &id), 1.0, epsilon = 1e-15);
        // S = X: H(Y|S) = 0
        let p = [0.5, 0.0, 0.0, 0.5];
        assert_eq!(conditional_output_entropy(&p, 2, &id), 0.0);
    }
}
