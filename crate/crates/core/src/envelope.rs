//! Upper concave envelopes of functions sampled on `[0, 1]`, and the
//! output-entropy difference of the binary skew-symmetric channel.
//!
//! For a binary input with `P(X = 0) = eta`, the supremum of
//! `sum_i v_i phi(alpha_i)` over decompositions `sum_i v_i alpha_i = eta`
//! is the least concave majorant of `phi` evaluated at `eta`. Every
//! "optimize over an auxiliary variable" step for binary inputs reduces to
//! that envelope, which is why this module is one-dimensional.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::probcore::h2;

/// Tolerance under which a grid point counts as touching its envelope.
pub const CONTACT_TOL: f64 = 1e-9;

const HULL_SLACK: f64 = 1e-15;

/// A real function sampled at `eta_i = i / (n - 1)`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Shape(format!(
                "grid needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::BadWeight { index, value });
        }
        Ok(Self { values })
    }

    /// Samples `f` on an `n`-point grid. Panics if `n < 2` or `f` is not finite.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n >= 2, "grid needs at least 2 points");
        let values = (0..n).map(|i| f(grid_eta(i, n))).collect();
        Self::new(values).expect("sampled function must be finite")
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eta(&self, i: usize) -> f64 {
        grid_eta(i, self.values.len())
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    /// Piecewise-linear interpolation of the samples.
    pub fn interpolate(&self, eta: f64) -> f64 {
        let n = self.values.len();
        let pos = eta.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

#[inline]
pub fn grid_eta(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

/// Least concave majorant of a [`GridFunction`], with the hull vertices that define it.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    values: GridFunction,
    contact: Vec<bool>,
    vertices: Vec<usize>,
}

impl Envelope {
    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    /// `true` where the envelope equals the sampled function within [`CONTACT_TOL`].
    pub fn contact(&self) -> &[bool] {
        &self.contact
    }

    /// Grid indices of the upper-hull vertices, increasing.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Envelope value at an arbitrary `eta`, by linear interpolation between hull vertices.
    pub fn eval(&self, eta: f64) -> f64 {
        let (l, r, w) = self.segment(eta);
        let y = self.values.values();
        w * y[l] + (1.0 - w) * y[r]
    }

    /// Hull segment containing `eta`: `(left vertex, right vertex, weight on left)`.
    ///
    /// The weight is the mixing probability that makes `eta` the mean of the
    /// two vertex abscissae; when `eta` sits on a vertex both ends coincide.
    pub fn segment(&self, eta: f64) -> (usize, usize, f64) {
        let n = self.values.n_points();
        let pos = eta.clamp(0.0, 1.0) * (n - 1) as f64;
        let k = self.vertices.partition_point(|&v| (v as f64) < pos);
        if k < self.vertices.len() && self.vertices[k] as f64 == pos {
            let v = self.vertices[k];
            return (v, v, 1.0);
        }
        let r = self.vertices[k.min(self.vertices.len() - 1)];
        let l = self.vertices[k.saturating_sub(1)];
        if l == r {
            return (l, r, 1.0);
        }
        let w = (r as f64 - pos) / (r - l) as f64;
        (l, r, w)
    }
}

/// Upper concave envelope by a monotone upper-hull scan; O(n).
pub fn upper_concave_envelope(f: &GridFunction) -> Envelope {
    let y = f.values();
    let n = y.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or below the chord a..i; the slack absorbs
            // rounding so that re-enveloping an envelope keeps the same vertices
            let lhs = (y[b] - y[a]) * (i - a) as f64;
            let rhs = (y[i] - y[a]) * (b - a) as f64;
            let slack =
                HULL_SLACK * (i - a) as f64 * (1.0 + y[a].abs().max(y[b].abs()).max(y[i].abs()));
            if lhs <= rhs + slack {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut env = vec![0.0; n];
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        env[a] = y[a];
        let span = (b - a) as f64;
        for (k, e) in env.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (k - a) as f64 / span;
            *e = (y[a] + t * (y[b] - y[a])).max(y[k]);
        }
    }
    env[n - 1] = y[n - 1];
    let contact = env
        .iter()
        .zip(y)
        .map(|(e, v)| (e - v).abs() <= CONTACT_TOL)
        .collect();
    Envelope {
        values: GridFunction { values: env },
        contact,
        vertices: hull,
    }
}

/// Supremum over auxiliaries `V -> X` (binary `X`, `P(X=0) = eta` fixed) of
/// `sum_i P(V=i) phi(P(X=0 | V=i))`, i.e. the concave envelope of `phi` at `eta`.
pub fn aux_sup_binary(phi: &GridFunction, eta: f64) -> Result<f64> {
    check_unit(eta, "eta")?;
    Ok(upper_concave_envelope(phi).eval(eta))
}

fn check_unit(x: f64, what: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: x,
            domain: "[0, 1]",
        })
    }
}

/// `H(eta / 2) - H((1 - eta) / 2)`: the difference `H(Y1) - H(Y2)` of the
/// skew-symmetric channel with crossover 1/2 and `P(X = 0) = eta`.
pub fn f_skew(eta: f64) -> Result<f64> {
    check_unit(eta, "eta")?;
    Ok(f_skew_raw(eta))
}

#[inline]
pub(crate) fn f_skew_raw(eta: f64) -> f64 {
    h2(eta / 2.0) - h2((1.0 - eta) / 2.0)
}

/// Analytic derivative of [`f_skew`] on the open interval `(0, 1)`.
pub fn f_skew_derivative(eta: f64) -> f64 {
    0.5 * ((2.0 - eta) / eta).log2() + 0.5 * ((1.0 + eta) / (1.0 - eta)).log2()
}

/// Residual of the tangency condition for the line through `(1, 1)`.
pub fn tangency_residual(eta: f64) -> f64 {
    f_skew_derivative(eta) * (1.0 - eta) - (1.0 - f_skew_raw(eta))
}

/// Root in `(0, 1/2)` of `f'(eta) (1 - eta) = 1 - f(eta)`: the abscissa where
/// the line from `(1, 1)` touches the graph of [`f_skew`].
pub fn solve_eta0() -> Result<f64> {
    let (mut lo, mut hi) = (1e-9, 0.5);
    let (r_lo, r_hi) = (tangency_residual(lo), tangency_residual(hi));
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::NotBracketed { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tangency_residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cached [`solve_eta0`].
pub fn eta0() -> f64 {
    static ETA0: OnceLock<f64> = OnceLock::new();
    *ETA0.get_or_init(|| solve_eta0().expect("tangency root is bracketed"))
}

/// `f` up to `eta0`, then the chord from `(eta0, f(eta0))` to `(1, f(1)) = (1, 1)`.
pub fn g_function(eta: f64) -> Result<f64> {
    check_unit(eta, "eta")?;
    let e0 = eta0();
    if eta <= e0 {
        return Ok(f_skew_raw(eta));
    }
    let t = (eta - e0) / (1.0 - e0);
    Ok((1.0 - t) * f_skew_raw(e0) + t * f_skew_raw(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn f_skew_values() {
        assert_eq!(f_skew(0.5).unwrap(), 0.0);
        assert_eq!(f_skew(1.0).unwrap(), 1.0);
        // H(0.1) - H(0.4)
        assert_abs_diff_eq!(f_skew(0.2).unwrap(), -0.501955, epsilon = 1e-6);
        assert!(f_skew(-0.1).is_err());
        assert!(f_skew(1.5).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for &e in &[0.05, 0.2, 0.37, 0.5, 0.8, 0.95] {
            let h = 1e-6;
            let fd = (f_skew_raw(e + h) - f_skew_raw(e - h)) / (2.0 * h);
            assert_abs_diff_eq!(f_skew_derivative(e), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn eta0_is_one_fifth() {
        let e0 = solve_eta0().unwrap();
        assert!((e0 - 0.2).abs() <= 1e-9, "{e0}");
        assert!(tangency_residual(e0).abs() <= 1e-9);
        // both sides of the tangency equation, evaluated separately
        let lhs = f_skew_derivative(0.2);
        let rhs = (1.0 - f_skew_raw(0.2)) / 0.8;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        assert_abs_diff_eq!(lhs, 1.877444, epsilon = 1e-6);
    }

    #[test]
    fn g_branches() {
        assert_eq!(g_function(0.1).unwrap(), f_skew(0.1).unwrap());
        assert_abs_diff_eq!(g_function(1.0).unwrap(), 1.0, epsilon = 1e-15);
        // midpoint of the chord through (0.2, -0.501955) and (1, 1)
        assert_abs_diff_eq!(
            g_function(0.6).unwrap(),
            (1.0 - 0.501955) / 2.0,
            epsilon = 1e-6
        );
        let e0 = eta0();
        assert_abs_diff_eq!(
            g_function(e0 + 1e-12).unwrap(),
            f_skew(e0).unwrap(),
            epsilon = 1e-9
        );
        assert!(g_function(2.0).is_err());
    }

    #[test]
    fn f_is_concave_then_convex() {
        let f = GridFunction::sample(2001, f_skew_raw);
        let y = f.values();
        for i in 1..2000 {
            let d2 = y[i - 1] - 2.0 * y[i] + y[i + 1];
            if i < 1000 {
                assert!(d2 <= 1e-12, "not concave at {i}: {d2}");
            } else if i > 1000 {
                assert!(d2 >= -1e-12, "not convex at {i}: {d2}");
            }
        }
    }

    #[test]
    fn concave_input_is_its_own_envelope() {
        let f = GridFunction::sample(513, h2);
        let env = upper_concave_envelope(&f);
        for (a, b) in env.values().values().iter().zip(f.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert!(env.contact().iter().all(|&c| c));
    }

    #[test]
    fn v_shape_envelope_is_flat() {
        let f = GridFunction::sample(101, |e| (2.0 * e - 1.0).abs());
        let env = upper_concave_envelope(&f);
        assert_eq!(env.vertices(), &[0, 100]);
        for &v in env.values().values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
        let contact: Vec<usize> = (0..101).filter(|&i| env.contact()[i]).collect();
        assert_eq!(contact, vec![0, 100]);
    }

    #[test]
    fn envelope_of_f_matches_g() {
        let f = GridFunction::sample(4097, f_skew_raw);
        let env = upper_concave_envelope(&f);
        let sup = (0..4097)
            .map(|i| (env.values().values()[i] - g_function(f.eta(i)).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 2e-4, "{sup}");
        // no gap up to eta0: the zero-gap statement for all V
        for i in 0..4097 {
            if f.eta(i) <= eta0() {
                assert!(env.values().values()[i] - f.values()[i] <= 1e-6);
            }
        }
        // left end of the non-contact region sits at eta0
        let first_gap = (0..4097).find(|&i| !env.contact()[i]).unwrap();
        assert!((f.eta(first_gap) - eta0()).abs() <= f.step() + 1e-12);
    }

    #[test]
    fn aux_sup_examples() {
        let f = GridFunction::sample(4097, f_skew_raw);
        // 0.1 is between grid nodes; interpolation error is O(step^2)
        assert_abs_diff_eq!(
            aux_sup_binary(&f, 0.1).unwrap(),
            f_skew_raw(0.1),
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(aux_sup_binary(&f, 0.6).unwrap(), 0.249022, epsilon = 2e-4);
        let h = GridFunction::sample(4097, h2);
        assert_abs_diff_eq!(aux_sup_binary(&h, 0.3).unwrap(), h2(0.3), epsilon = 1e-7);
        assert!(aux_sup_binary(&h, 1.2).is_err());
    }

    #[test]
    fn segment_weights_reproduce_mean() {
        let f = GridFunction::sample(257, |e| (2.0 * e - 1.0).abs());
        let env = upper_concave_envelope(&f);
        let (l, r, w) = env.segment(0.3);
        assert_eq!((l, r), (0, 256));
        assert_abs_diff_eq!(w * f.eta(l) + (1.0 - w) * f.eta(r), 0.3, epsilon = 1e-15);
        assert_eq!(env.segment(1.0), (256, 256, 1.0));
    }

    proptest! {
        #[test]
        fn antisymmetry(eta in 0.0f64..=1.0) {
            prop_assert!((f_skew_raw(eta) + f_skew_raw(1.0 - eta)).abs() <= 1e-12);
        }

        #[test]
        fn envelope_dominates_is_concave_and_idempotent(
            ys in proptest::collection::vec(-5.0f64..5.0, 2..80)
        ) {
            let f = GridFunction::new(ys).unwrap();
            let env = upper_concave_envelope(&f);
            let e = env.values().values();
            for (a, b) in e.iter().zip(f.values()) {
                prop_assert!(a >= b);
            }
            for w in e.windows(3) {
                prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12);
            }
            let again = upper_concave_envelope(env.values());
            prop_assert_eq!(again.values(), env.values());
        }
    }
}
