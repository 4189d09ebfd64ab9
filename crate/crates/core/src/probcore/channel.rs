use serde::Serialize;

use super::{check_weights, Pmf};
use crate::error::{Error, Result};

/// Row-stochastic conditional law `p(y | x)`, one row per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    input_size: usize,
    output_size: usize,
    #[serde(skip)]
    flat: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Shape(
                "transition matrix needs at least one row".into(),
            ));
        };
        let output_size = first.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != output_size {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("has {} entries, expected {output_size}", r.len()),
                });
            }
            check_weights(r).map_err(|e| Error::InvalidRow {
                row,
                reason: e.to_string(),
            })?;
        }
        Ok(Self {
            input_size: rows.len(),
            output_size,
            flat: rows.concat(),
            rows,
        })
    }

    pub fn from_pmfs(rows: Vec<Pmf>) -> Result<Self> {
        Self::new(rows.into_iter().map(Pmf::into_inner).collect())
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| Pmf::point(n, i).into_inner()).collect();
        Self::new(rows).expect("identity rows are valid")
    }

    /// Every input mapped to the same output law.
    pub fn constant(input_size: usize, row: Pmf) -> Self {
        Self::new(vec![row.into_inner(); input_size]).expect("rows already validated")
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.flat[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.flat[x * self.output_size + y]
    }

    /// Output law induced by an input law.
    pub fn push(&self, p_x: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.output_size];
        for (x, &px) in p_x.iter().enumerate() {
            for (qy, &w) in q.iter_mut().zip(self.row(x)) {
                *qy += px * w;
            }
        }
        q
    }
}

/// Which receiver an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Output {
    Y1,
    Y2,
}

impl Output {
    pub fn other(self) -> Self {
        match self {
            Output::Y1 => Output::Y2,
            Output::Y2 => Output::Y1,
        }
    }
}

/// Two-receiver broadcast channel described by its two conditional marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastChannel {
    to_y1: TransitionMatrix,
    to_y2: TransitionMatrix,
}

impl BroadcastChannel {
    pub fn new(to_y1: TransitionMatrix, to_y2: TransitionMatrix) -> Result<Self> {
        if to_y1.input_size() != to_y2.input_size() {
            return Err(Error::Shape(format!(
                "y1 has {} input rows but y2 has {}",
                to_y1.input_size(),
                to_y2.input_size()
            )));
        }
        Ok(Self { to_y1, to_y2 })
    }

    pub fn input_size(&self) -> usize {
        self.to_y1.input_size()
    }

    pub fn to_y1(&self) -> &TransitionMatrix {
        &self.to_y1
    }

    pub fn to_y2(&self) -> &TransitionMatrix {
        &self.to_y2
    }

    pub fn output(&self, which: Output) -> &TransitionMatrix {
        match which {
            Output::Y1 => &self.to_y1,
            Output::Y2 => &self.to_y2,
        }
    }

    /// Same channel with the receivers exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            to_y1: self.to_y2.clone(),
            to_y2: self.to_y1.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_errors_name_the_row() {
        let err = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.4]]).unwrap_err();
        assert!(matches!(err, Error::InvalidRow { row: 1, .. }), "{err}");
        let err = TransitionMatrix::new(vec![vec![1.0], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::InvalidRow { row: 1, .. }));
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = TransitionMatrix::identity(2);
        let b = TransitionMatrix::identity(3);
        assert!(BroadcastChannel::new(a, b).is_err());
    }

    #[test]
    fn push_matches_rows() {
        let t = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(t.push(&[0.5, 0.5]), vec![0.25, 0.75]);
        assert_eq!(t.prob(1, 1), 1.0);
    }
}
