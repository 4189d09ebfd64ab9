use std::fmt;

use serde::Serialize;

use super::{entropy_of_weights, BroadcastChannel, Output, PROB_TOL};
use crate::error::{Error, Result};

/// Axis label of a [`JointPmf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    U,
    V,
    W,
    T,
    X,
    Y1,
    Y2,
}

impl Var {
    pub fn of_output(o: Output) -> Self {
        match o {
            Output::Y1 => Var::Y1,
            Output::Y2 => Var::Y2,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Var::U => "U",
            Var::V => "V",
            Var::W => "W",
            Var::T => "T",
            Var::X => "X",
            Var::Y1 => "Y1",
            Var::Y2 => "Y2",
        };
        f.write_str(s)
    }
}

/// Labeled multi-dimensional probability table, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPmf {
    labels: Vec<Var>,
    shape: Vec<usize>,
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(labels: Vec<Var>, shape: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} axes",
                labels.len(),
                shape.len()
            )));
        }
        for (i, v) in labels.iter().enumerate() {
            if labels[..i].contains(v) {
                return Err(Error::DuplicateVariable(*v));
            }
        }
        if shape.contains(&0) {
            return Err(Error::Shape("axis of size 0".into()));
        }
        let n: usize = shape.iter().product();
        if n != table.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} entries, got {}",
                table.len()
            )));
        }
        for (index, &value) in table.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::BadWeight { index, value });
            }
        }
        let sum: f64 = table.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            labels,
            shape,
            table,
        })
    }

    /// Builds a table by evaluating `f` at every multi-index.
    pub fn from_fn(
        labels: Vec<Var>,
        shape: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            table.push(f(&idx));
            advance(&mut idx, &shape);
        }
        Self::new(labels, shape, table)
    }

    pub fn labels(&self) -> &[Var] {
        &self.labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn axis(&self, v: Var) -> Option<usize> {
        self.labels.iter().position(|&l| l == v)
    }

    pub fn size_of(&self, v: Var) -> Result<usize> {
        self.axis(v)
            .map(|a| self.shape[a])
            .ok_or(Error::UnknownVariable(v))
    }

    /// Entry at a full multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.table[flat_index(idx, &self.shape)]
    }

    fn axes_of(&self, vars: &[Var]) -> Result<Vec<usize>> {
        let mut axes = Vec::with_capacity(vars.len());
        for &v in vars {
            let a = self.axis(v).ok_or(Error::UnknownVariable(v))?;
            if !axes.contains(&a) {
                axes.push(a);
            }
        }
        axes.sort_unstable();
        Ok(axes)
    }

    /// Sums out every axis not in `keep`. Kept axes retain their original order.
    pub fn marginalize(&self, keep: &[Var]) -> Result<JointPmf> {
        let axes = self.axes_of(keep)?;
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let table = self.marginal_table(&axes);
        Ok(JointPmf {
            labels: axes.iter().map(|&a| self.labels[a]).collect(),
            shape,
            table,
        })
    }

    fn marginal_table(&self, axes: &[usize]) -> Vec<f64> {
        if axes.len() == self.shape.len() {
            return self.table.clone();
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        // stride of each source axis inside the output table (0 if summed out)
        let mut out_stride = vec![0usize; self.shape.len()];
        let mut s = 1;
        for (k, &a) in axes.iter().enumerate().rev() {
            out_stride[a] = s;
            s *= out_shape[k];
        }
        let mut idx = vec![0; self.shape.len()];
        let mut pos = 0usize;
        for &p in &self.table {
            out[pos] += p;
            // odometer step that keeps `pos` in sync
            for ax in (0..idx.len()).rev() {
                idx[ax] += 1;
                pos += out_stride[ax];
                if idx[ax] < self.shape[ax] {
                    break;
                }
                pos -= out_stride[ax] * idx[ax];
                idx[ax] = 0;
            }
        }
        out
    }

    /// Joint entropy of a subset of the variables (`0` for the empty set).
    pub fn entropy_of(&self, vars: &[Var]) -> Result<f64> {
        let axes = self.axes_of(vars)?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of_weights(&self.marginal_table(&axes)))
    }

    /// `I(A; B | C)` in bits, computed as `H(AC) + H(BC) - H(ABC) - H(C)`.
    pub fn mutual_information(&self, a: &[Var], b: &[Var], given: &[Var]) -> Result<f64> {
        for &x in a {
            if b.contains(&x) || given.contains(&x) {
                return Err(Error::OverlappingSets(x));
            }
        }
        for &x in b {
            if given.contains(&x) {
                return Err(Error::OverlappingSets(x));
            }
        }
        let cat = |s: &[&[Var]]| s.concat();
        let h_ac = self.entropy_of(&cat(&[a, given]))?;
        let h_bc = self.entropy_of(&cat(&[b, given]))?;
        let h_abc = self.entropy_of(&cat(&[a, b, given]))?;
        let h_c = self.entropy_of(given)?;
        Ok(h_ac + h_bc - h_abc - h_c)
    }

    /// Appends an output axis with `p(y | everything) = p(y | x)`.
    pub fn extend_through_channel(
        &self,
        ch: &BroadcastChannel,
        output: Output,
    ) -> Result<JointPmf> {
        let label = Var::of_output(output);
        if self.axis(label).is_some() {
            return Err(Error::DuplicateVariable(label));
        }
        let x_axis = self.axis(Var::X).ok_or(Error::UnknownVariable(Var::X))?;
        let nx = self.shape[x_axis];
        if nx != ch.input_size() {
            return Err(Error::Shape(format!(
                "X has {nx} symbols but the channel has {} inputs",
                ch.input_size()
            )));
        }
        let tm = ch.output(output);
        let ny = tm.output_size();
        let x_stride: usize = self.shape[x_axis + 1..].iter().product();
        let mut table = Vec::with_capacity(self.table.len() * ny);
        for (i, &p) in self.table.iter().enumerate() {
            let x = (i / x_stride) % nx;
            table.extend(tm.row(x).iter().map(|&w| p * w));
        }
        let mut labels = self.labels.clone();
        labels.push(label);
        let mut shape = self.shape.clone();
        shape.push(ny);
        Ok(JointPmf {
            labels,
            shape,
            table,
        })
    }

    /// Moves axes into the given order. `order` must be a permutation of the labels.
    pub fn permuted(&self, order: &[Var]) -> Result<JointPmf> {
        if order.len() != self.labels.len() {
            return Err(Error::WrongAxes {
                expected: fmt_vars(&self.labels),
                found: fmt_vars(order),
            });
        }
        let axes: Vec<usize> = order
            .iter()
            .map(|&v| self.axis(v).ok_or(Error::UnknownVariable(v)))
            .collect::<Result<_>>()?;
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut src = vec![0; self.shape.len()];
        JointPmf::from_fn(order.to_vec(), shape, |idx| {
            for (k, &a) in axes.iter().enumerate() {
                src[a] = idx[k];
            }
            self.get(&src)
        })
    }
}

pub(crate) fn fmt_vars(vars: &[Var]) -> String {
    let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    format!("({})", names.join(","))
}

fn flat_index(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &s)| acc * s + i)
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for ax in (0..idx.len()).rev() {
        idx[ax] += 1;
        if idx[ax] < shape[ax] {
            return;
        }
        idx[ax] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::TransitionMatrix;
    use approx::assert_abs_diff_eq;

    fn uvx() -> JointPmf {
        let t: Vec<f64> = (1..=12).map(|i| i as f64 / 78.0).collect();
        JointPmf::new(vec![Var::U, Var::V, Var::X], vec![2, 3, 2], t).unwrap()
    }

    #[test]
    fn marginalize_keeps_x_marginal() {
        let j = uvx();
        let px = j.marginalize(&[Var::X]).unwrap();
        assert_eq!(px.labels(), &[Var::X]);
        let mut expect = [0.0; 2];
        for (i, p) in j.table().iter().enumerate() {
            expect[i % 2] += p;
        }
        assert_abs_diff_eq!(px.table()[0], expect[0], epsilon = 1e-15);
        assert_abs_diff_eq!(px.table()[1], expect[1], epsilon = 1e-15);
        assert_eq!(j.marginalize(&[Var::X, Var::U, Var::V]).unwrap(), j);
        assert_eq!(
            j.marginalize(&[Var::W]).unwrap_err(),
            Error::UnknownVariable(Var::W)
        );
    }

    #[test]
    fn marginalize_product() {
        let pu = [0.2, 0.8];
        let px = [0.1, 0.6, 0.3];
        let j =
            JointPmf::from_fn(vec![Var::U, Var::X], vec![2, 3], |i| pu[i[0]] * px[i[1]]).unwrap();
        let m = j.marginalize(&[Var::U]).unwrap();
        assert_abs_diff_eq!(m.table()[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.table()[1], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(
            j.mutual_information(&[Var::U], &[Var::X], &[]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn copied_axis_information_is_entropy() {
        let pu = [0.1, 0.2, 0.7];
        let j = JointPmf::from_fn(vec![Var::U, Var::V], vec![3, 3], |i| {
            if i[0] == i[1] {
                pu[i[0]]
            } else {
                0.0
            }
        })
        .unwrap();
        let h = j.entropy_of(&[Var::U]).unwrap();
        assert_abs_diff_eq!(
            j.mutual_information(&[Var::U], &[Var::V], &[]).unwrap(),
            h,
            epsilon = 1e-15
        );
    }

    #[test]
    fn overlapping_sets_rejected() {
        let j = uvx();
        assert_eq!(
            j.mutual_information(&[Var::U], &[Var::U], &[]).unwrap_err(),
            Error::OverlappingSets(Var::U)
        );
        assert_eq!(
            j.mutual_information(&[Var::U], &[Var::V], &[Var::V])
                .unwrap_err(),
            Error::OverlappingSets(Var::V)
        );
    }

    #[test]
    fn constructor_rejects_bad_tables() {
        assert!(matches!(
            JointPmf::new(vec![Var::U, Var::U], vec![1, 1], vec![1.0]),
            Err(Error::DuplicateVariable(Var::U))
        ));
        assert!(JointPmf::new(vec![Var::U], vec![2], vec![0.5, 0.4]).is_err());
        assert!(JointPmf::new(vec![Var::U], vec![3], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn extension_through_identity_copies_x() {
        let j = uvx();
        let ch =
            BroadcastChannel::new(TransitionMatrix::identity(2), TransitionMatrix::identity(2))
                .unwrap();
        let e = j.extend_through_channel(&ch, Output::Y1).unwrap();
        assert_eq!(e.labels(), &[Var::U, Var::V, Var::X, Var::Y1]);
        let hx = j.entropy_of(&[Var::X]).unwrap();
        assert_abs_diff_eq!(
            e.mutual_information(&[Var::X], &[Var::Y1], &[]).unwrap(),
            hx,
            epsilon = 1e-14
        );
        assert_eq!(e.marginalize(&[Var::U, Var::V, Var::X]).unwrap(), j);
        assert!(e.extend_through_channel(&ch, Output::Y1).is_err());
        let bad =
            BroadcastChannel::new(TransitionMatrix::identity(3), TransitionMatrix::identity(3))
                .unwrap();
        assert!(matches!(
            j.extend_through_channel(&bad, Output::Y2),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn permute_round_trips() {
        let j = uvx();
        let p = j.permuted(&[Var::X, Var::U, Var::V]).unwrap();
        assert_eq!(p.shape(), &[2, 2, 3]);
        assert_eq!(p.get(&[1, 0, 2]), j.get(&[0, 2, 1]));
        assert_eq!(p.permuted(&[Var::U, Var::V, Var::X]).unwrap(), j);
    }
}
