//! Liftings of an auxiliary triple `(U, V, X)` that preserve the outer-bound
//! information quantities, and constructive support reduction.
//!
//! * [`lift_to_independent`] produces `(U*, V*, W*, X)` with `U*` independent
//!   of `V*`, showing the independent-auxiliary outer bound is no smaller.
//! * [`deterministic_lift`] produces `(U*, V*, X*)` with `X*` a function of
//!   `(U*, V*)`, which turns `I(X; Y | V)` terms into `I(U*; Y | V*)` terms.
//! * [`reduce_support`] shrinks an auxiliary's support while keeping `p(x)`
//!   and two linear functionals fixed (a Carathéodory pivot loop).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probcore::joint::fmt_vars;
use crate::probcore::{entropy_of_weights, BroadcastChannel, JointPmf, Output, Pmf, Var};
use crate::sampling::{random_channel, random_joint, rng_for, uniform_simplex};

/// Identity checks are exact up to rounding; anything above this is a logic error.
pub const IDENTITY_TOL: f64 = 1e-10;

/// `(U*, V*, W*, X)` with `U*` independent of `V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedTriple {
    /// Axes `U, V, W, X` hold `U*, V*, W*, X`.
    pub joint: JointPmf,
    /// Modulus: the alphabet size of the source `V`.
    pub m: usize,
}

impl LiftedTriple {
    /// Total-variation distance of `p(u*, v*)` from the product of its marginals.
    pub fn dependence(&self) -> f64 {
        let uv = self
            .joint
            .marginalize(&[Var::U, Var::V])
            .expect("axes exist");
        let (nu, nv) = (uv.shape()[0], uv.shape()[1]);
        let t = uv.table();
        let pu: Vec<f64> = (0..nu)
            .map(|u| t[u * nv..(u + 1) * nv].iter().sum())
            .collect();
        let pv: Vec<f64> = (0..nv)
            .map(|v| (0..nu).map(|u| t[u * nv + v]).sum())
            .collect();
        let mut tv = 0.0;
        for u in 0..nu {
            for v in 0..nv {
                tv += (t[u * nv + v] - pu[u] * pv[v]).abs();
            }
        }
        0.5 * tv
    }
}

/// `(U*, V*, X*)` with `X*` a deterministic function of `(U*, V*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicTriple {
    /// Axes `U, V, X` hold `U*, V*, X*`; `U* = (u, i)` is flattened as `u * l + i`.
    pub joint: JointPmf,
    /// Input alphabet size.
    pub l: usize,
}

impl DeterministicTriple {
    /// Every `(u*, v*)` cell with positive mass puts it all on one `x*`.
    pub fn is_deterministic(&self) -> bool {
        self.joint
            .table()
            .chunks_exact(self.l)
            .all(|row| row.iter().filter(|&&p| p > 0.0).count() <= 1)
    }
}

/// One side-by-side identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub source: f64,
    pub lifted: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.source - self.lifted).abs()
    }
}

pub fn max_residual(checks: &[IdentityCheck]) -> f64 {
    checks
        .iter()
        .map(IdentityCheck::residual)
        .fold(0.0, f64::max)
}

fn as_uvx(src: &JointPmf) -> Result<JointPmf> {
    let mut labels = src.labels().to_vec();
    labels.sort();
    if labels != [Var::U, Var::V, Var::X] {
        return Err(Error::WrongAxes {
            expected: "(U,V,X)".into(),
            found: fmt_vars(src.labels()),
        });
    }
    src.permuted(&[Var::U, Var::V, Var::X])
}

/// `P(U*=u, V*=i, W*=j, X=x) = P(U=u, V=(i+j) mod m, X=x) / m` with `m = |V|`.
pub fn lift_to_independent(src: &JointPmf) -> Result<LiftedTriple> {
    let src = as_uvx(src)?;
    let (nu, m, nx) = (src.shape()[0], src.shape()[1], src.shape()[2]);
    let inv_m = 1.0 / m as f64;
    let joint = JointPmf::from_fn(
        vec![Var::U, Var::V, Var::W, Var::X],
        vec![nu, m, m, nx],
        |idx| src.get(&[idx[0], (idx[1] + idx[2]) % m, idx[3]]) * inv_m,
    )?;
    Ok(LiftedTriple { joint, m })
}

/// `P(U*=(u,i), V*=(v,j), X*=k) = P(U=u, V=v, X=k) / l` when `k = (i - j) mod l`, else 0.
pub fn deterministic_lift(src: &JointPmf) -> Result<DeterministicTriple> {
    let src = as_uvx(src)?;
    let (nu, nv, l) = (src.shape()[0], src.shape()[1], src.shape()[2]);
    let inv_l = 1.0 / l as f64;
    let joint = JointPmf::from_fn(
        vec![Var::U, Var::V, Var::X],
        vec![l * nu, l * nv, l],
        |idx| {
            let (u, i) = (idx[0] / l, idx[0] % l);
            let (v, j) = (idx[1] / l, idx[1] % l);
            let k = (i + l - j) % l;
            if idx[2] == k {
                src.get(&[u, v, k]) * inv_l
            } else {
                0.0
            }
        },
    )?;
    Ok(DeterministicTriple { joint, l })
}

fn both_outputs(j: &JointPmf, ch: &BroadcastChannel) -> Result<(JointPmf, JointPmf)> {
    Ok((
        j.extend_through_channel(ch, Output::Y1)?,
        j.extend_through_channel(ch, Output::Y2)?,
    ))
}

/// The four equalities behind the independence lifting, each side computed
/// on its own joint after channel extension.
pub fn independence_identities(
    src: &JointPmf,
    lifted: &LiftedTriple,
    ch: &BroadcastChannel,
) -> Result<Vec<IdentityCheck>> {
    use Var::*;
    let (s1, s2) = both_outputs(src, ch)?;
    let (l1, l2) = both_outputs(&lifted.joint, ch)?;
    Ok(vec![
        IdentityCheck {
            name: "I(U;Y1) = I(U*,W*;Y1)",
            source: s1.mutual_information(&[U], &[Y1], &[])?,
            lifted: l1.mutual_information(&[U, W], &[Y1], &[])?,
        },
        IdentityCheck {
            name: "I(V;Y2) = I(V*,W*;Y2)",
            source: s2.mutual_information(&[V], &[Y2], &[])?,
            lifted: l2.mutual_information(&[V, W], &[Y2], &[])?,
        },
        IdentityCheck {
            name: "I(U;Y1|V) = I(U*;Y1|V*,W*)",
            source: s1.mutual_information(&[U], &[Y1], &[V])?,
            lifted: l1.mutual_information(&[U], &[Y1], &[V, W])?,
        },
        IdentityCheck {
            name: "I(V;Y2|U) = I(V*;Y2|U*,W*)",
            source: s2.mutual_information(&[V], &[Y2], &[U])?,
            lifted: l2.mutual_information(&[V], &[Y2], &[U, W])?,
        },
    ])
}

/// The four equalities behind the deterministic-input lifting.
pub fn deterministic_identities(
    src: &JointPmf,
    lifted: &DeterministicTriple,
    ch: &BroadcastChannel,
) -> Result<Vec<IdentityCheck>> {
    use Var::*;
    let (s1, s2) = both_outputs(src, ch)?;
    let (l1, l2) = both_outputs(&lifted.joint, ch)?;
    Ok(vec![
        IdentityCheck {
            name: "I(U;Y1) = I(U*;Y1)",
            source: s1.mutual_information(&[U], &[Y1], &[])?,
            lifted: l1.mutual_information(&[U], &[Y1], &[])?,
        },
        IdentityCheck {
            name: "I(V;Y2) = I(V*;Y2)",
            source: s2.mutual_information(&[V], &[Y2], &[])?,
            lifted: l2.mutual_information(&[V], &[Y2], &[])?,
        },
        IdentityCheck {
            name: "I(X;Y1|V) = I(U*;Y1|V*)",
            source: s1.mutual_information(&[X], &[Y1], &[V])?,
            lifted: l1.mutual_information(&[U], &[Y1], &[V])?,
        },
        IdentityCheck {
            name: "I(X;Y2|U) = I(V*;Y2|U*)",
            source: s2.mutual_information(&[X], &[Y2], &[U])?,
            lifted: l2.mutual_information(&[V], &[Y2], &[U])?,
        },
    ])
}

/// Which auxiliary's pair of outer-bound terms a reduction keeps fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// Keep `H(Y1|U)` and `I(X;Y2|U)`, hence `I(U;Y1)` and `I(X;Y2|U)`.
    U,
    /// Keep `H(Y2|V)` and `I(X;Y1|V)`, hence `I(V;Y2)` and `I(X;Y1|V)`.
    V,
}

impl Side {
    /// `(entropy output a, information output b)`.
    pub fn outputs(self) -> (Output, Output) {
        match self {
            Side::U => (Output::Y1, Output::Y2),
            Side::V => (Output::Y2, Output::Y1),
        }
    }
}

/// Result of [`reduce_support`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// New weights of the kept atoms, aligned with `kept`.
    pub weights: Vec<f64>,
    /// Original indices of the atoms that remain in the support.
    pub kept: Vec<usize>,
    pub iterations: usize,
}

/// Per-atom values of the preserved functionals: `(H(Y_a | atom), I(X; Y_b | atom))`.
pub fn atom_functionals(cond: &Pmf, ch: &BroadcastChannel, side: Side) -> (f64, f64) {
    let (a, b) = side.outputs();
    let h_a = entropy_of_weights(&ch.output(a).push(cond.weights()));
    let tb = ch.output(b);
    let h_b = entropy_of_weights(&tb.push(cond.weights()));
    let h_b_given_x: f64 = cond
        .weights()
        .iter()
        .enumerate()
        .map(|(x, &p)| p * entropy_of_weights(tb.row(x)))
        .sum();
    (h_a, h_b - h_b_given_x)
}

/// Moves weight along kernel directions of the constraint system until at
/// most `|X| + 2` atoms carry mass.
///
/// Constraint rows: `p(x)` for all but the last input symbol, the two
/// functionals from [`atom_functionals`], and total mass. Each pivot drops at
/// least one atom; among atoms reaching zero at the same step the smallest
/// index leaves.
pub fn reduce_support(
    weights: &Pmf,
    atom_conditionals: &[Pmf],
    ch: &BroadcastChannel,
    side: Side,
) -> Result<Reduction> {
    let nx = ch.input_size();
    if atom_conditionals.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} weights but {} atom conditionals",
            weights.len(),
            atom_conditionals.len()
        )));
    }
    if let Some(bad) = atom_conditionals.iter().position(|c| c.len() != nx) {
        return Err(Error::Shape(format!(
            "atom {bad} is not a pmf over the channel input"
        )));
    }
    let mut kept: Vec<usize> = (0..weights.len())
        .filter(|&i| weights.weights()[i] > 0.0)
        .collect();
    let mut w: Vec<f64> = kept.iter().map(|&i| weights.weights()[i]).collect();
    let columns: Vec<Vec<f64>> = atom_conditionals
        .iter()
        .map(|c| {
            let (fa, fb) = atom_functionals(c, ch, side);
            let mut col: Vec<f64> = c.weights()[..nx - 1].to_vec();
            col.extend([fa, fb, 1.0]);
            col
        })
        .collect();
    let target = nx + 2;
    let mut iterations = 0;
    while kept.len() > target {
        let mat: Vec<Vec<f64>> = kept.iter().map(|&i| columns[i].clone()).collect();
        let d =
            kernel_vector(&mat, target).ok_or(Error::NoKernelDirection { atoms: kept.len() })?;
        // largest step keeping every weight nonnegative
        let mut exit: Option<(usize, f64)> = None;
        for (k, (&wk, &dk)) in w.iter().zip(&d).enumerate() {
            if dk < 0.0 {
                let t = wk / -dk;
                match exit {
                    Some((_, best)) if t >= best * (1.0 - 1e-12) => {}
                    _ => exit = Some((k, t)),
                }
            }
        }
        let (leaving, t) = exit.ok_or(Error::NoKernelDirection { atoms: kept.len() })?;
        for (wk, dk) in w.iter_mut().zip(&d) {
            *wk += t * dk;
        }
        w[leaving] = 0.0;
        let mut k = 0;
        kept.retain(|_| {
            let keep = w[k] > 0.0;
            k += 1;
            keep
        });
        w.retain(|&x| x > 0.0);
        iterations += 1;
    }
    Ok(Reduction {
        weights: w,
        kept,
        iterations,
    })
}

/// Summary of [`verify_random`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub seed: u64,
    pub max_card: usize,
    /// Largest residual over the four independence-lifting identities.
    pub independence_residual: f64,
    /// Largest residual over the four deterministic-lifting identities.
    pub deterministic_residual: f64,
    /// Largest total-variation dependence between `U*` and `V*`.
    pub lifted_dependence: f64,
    /// Largest change of `p(x)` or a preserved functional under reduction.
    pub reduction_residual: f64,
    /// Largest surviving support after reduction, and its cap `|X| + 2`.
    pub reduced_atoms: usize,
    pub atom_cap: usize,
    /// Every deterministic lift put each `(u*, v*)` cell on one input.
    pub all_deterministic: bool,
}

impl VerifyReport {
    /// The worst of all residuals.
    pub fn max_residual(&self) -> f64 {
        self.independence_residual
            .max(self.deterministic_residual)
            .max(self.lifted_dependence)
            .max(self.reduction_residual)
    }

    /// Residuals within `tol`, reductions within their cap, lifts deterministic.
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.reduced_atoms <= self.atom_cap && self.all_deterministic
    }
}

/// Channels shared by the trials of [`verify_random`].
pub const VERIFY_CHANNELS: usize = 10;

fn mixture(weights: &[f64], conds: &[Pmf], ch: &BroadcastChannel, side: Side) -> Vec<f64> {
    let nx = ch.input_size();
    let mut out = vec![0.0; nx + 2];
    for (&w, c) in weights.iter().zip(conds) {
        let (fa, fb) = atom_functionals(c, ch, side);
        for (o, &p) in out.iter_mut().zip(c.weights()) {
            *o += w * p;
        }
        out[nx] += w * fa;
        out[nx + 1] += w * fb;
    }
    out
}

/// Random-instance check of both liftings and of support reduction.
///
/// Draws [`VERIFY_CHANNELS`] channels with `|X|` alternating between 2 and 3,
/// then for each trial a sparse joint `p(u, v, x)` with `|U|, |V|` in
/// `1..=max_card` through one of them, plus a reduction instance of
/// `2 (|X| + 2)` atoms. Trial `t` uses its own stream, so the report depends
/// only on `(trials, seed, max_card)`.
pub fn verify_random(trials: usize, seed: u64, max_card: usize) -> Result<VerifyReport> {
    use rand::Rng;
    if trials == 0 {
        return Err(Error::Config("at least one trial is needed".into()));
    }
    if max_card == 0 {
        return Err(Error::Config("max_card must be at least 1".into()));
    }
    let channels: Vec<BroadcastChannel> = (0..VERIFY_CHANNELS)
        .map(|c| {
            let mut rng = rng_for(seed, (1 << 48) + c as u64);
            let nx = 2 + c % 2;
            let (n1, n2) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
            random_channel(&mut rng, nx, n1, n2)
        })
        .collect();
    let mut report = VerifyReport {
        trials,
        seed,
        max_card,
        independence_residual: 0.0,
        deterministic_residual: 0.0,
        lifted_dependence: 0.0,
        reduction_residual: 0.0,
        reduced_atoms: 0,
        atom_cap: 0,
        all_deterministic: true,
    };
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        let ch = &channels[t % VERIFY_CHANNELS];
        let nx = ch.input_size();
        let (nu, nv) = (rng.gen_range(1..=max_card), rng.gen_range(1..=max_card));
        let src = random_joint(
            &mut rng,
            vec![Var::U, Var::V, Var::X],
            vec![nu, nv, nx],
            0.2,
        );

        let lifted = lift_to_independent(&src)?;
        let checks = independence_identities(&src, &lifted, ch)?;
        report.independence_residual = report.independence_residual.max(max_residual(&checks));
        report.lifted_dependence = report.lifted_dependence.max(lifted.dependence());

        let det = deterministic_lift(&src)?;
        let checks = deterministic_identities(&src, &det, ch)?;
        report.deterministic_residual = report.deterministic_residual.max(max_residual(&checks));
        report.all_deterministic &= det.is_deterministic();

        let atoms = 2 * (nx + 2);
        let side = if t % 2 == 0 { Side::U } else { Side::V };
        let w = Pmf::new(uniform_simplex(&mut rng, atoms))?;
        let conds = (0..atoms)
            .map(|_| Pmf::new(uniform_simplex(&mut rng, nx)))
            .collect::<Result<Vec<_>>>()?;
        let red = reduce_support(&w, &conds, ch, side)?;
        let kept: Vec<Pmf> = red.kept.iter().map(|&i| conds[i].clone()).collect();
        let before = mixture(w.weights(), &conds, ch, side);
        let after = mixture(&red.weights, &kept, ch, side);
        let r = before
            .iter()
            .zip(&after)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.reduction_residual = report.reduction_residual.max(r);
        report.reduced_atoms = report.reduced_atoms.max(red.kept.len());
        report.atom_cap = report.atom_cap.max(nx + 2);
    }
    Ok(report)
}

/// Nonzero `d` with `sum_k d_k columns[k] = 0`, from a row-reduced copy of
/// the `rows x columns.len()` system. Requires more columns than rows.
fn kernel_vector(columns: &[Vec<f64>], rows: usize) -> Option<Vec<f64>> {
    let n = columns.len();
    let mut a: Vec<Vec<f64>> = (0..rows)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    let mut pivot_cols = Vec::with_capacity(rows);
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let (p, mag) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= 1e-13 {
            continue;
        }
        a.swap(r, p);
        let piv = a[r][c];
        a[r].iter_mut().for_each(|v| *v /= piv);
        for i in 0..rows {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                let (src, dst) = if i < r {
                    let (lo, hi) = a.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free = (0..n).find(|c| !pivot_cols.contains(c))?;
    let mut d = vec![0.0; n];
    d[free] = 1.0;
    for (row, &pc) in pivot_cols.iter().enumerate() {
        d[pc] = -a[row][free];
    }
    Some(d)
}
