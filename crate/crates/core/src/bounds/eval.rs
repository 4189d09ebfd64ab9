//! Allocation-free objective kernels for the searches, plus one-dimensional
//! profiles of binary-input channels.
//!
//! Tables are flat and row-major with `X` as the last (fastest) axis.

use crate::probcore::{entropy_of_weights, plog2p, BroadcastChannel, TransitionMatrix};

/// `H(Y | S)` for rows `p(s, .)` of length `n_x`, using `q` (length `|Y|`) as scratch.
pub(crate) fn cond_out_entropy(p_sx: &[f64], tm: &TransitionMatrix, q: &mut [f64]) -> f64 {
    let n_x = tm.input_size();
    let mut total = 0.0;
    for row in p_sx.chunks_exact(n_x) {
        let ps: f64 = row.iter().sum();
        if ps <= 0.0 {
            continue;
        }
        q.iter_mut().for_each(|v| *v = 0.0);
        for (x, &p) in row.iter().enumerate() {
            if p > 0.0 {
                for (qy, &w) in q.iter_mut().zip(tm.row(x)) {
                    *qy += p * w;
                }
            }
        }
        total += entropy_of_weights(q) - plog2p(ps);
    }
    total
}

/// `H(Y | X)` given `p(x)`.
pub(crate) fn noise_entropy(p_x: &[f64], row_entropy: &[f64]) -> f64 {
    p_x.iter().zip(row_entropy).map(|(p, h)| p * h).sum()
}

/// Entropies of the rows of both transition matrices.
#[derive(Debug, Clone)]
pub(crate) struct RowEntropies {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl RowEntropies {
    pub fn of(ch: &BroadcastChannel) -> Self {
        let rows =
            |tm: &TransitionMatrix| tm.rows().iter().map(|r| entropy_of_weights(r)).collect();
        Self {
            y1: rows(ch.to_y1()),
            y2: rows(ch.to_y2()),
        }
    }
}

/// Information terms of Marton's bound for one `p(u, v, w, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MartonRaw {
    pub i_uw_y1: f64,
    pub i_vw_y2: f64,
    pub i_w_y1: f64,
    pub i_w_y2: f64,
    pub i_u_y1_w: f64,
    pub i_v_y2_w: f64,
    pub i_u_v_w: f64,
}

/// Evaluates [`MartonRaw`] on normalized tables laid out `[u][v][w][x]`;
/// the reference for [`MartonIncremental`].
#[cfg(test)]
pub(crate) struct MartonKernel<'a> {
    ch: &'a BroadcastChannel,
    shape: [usize; 4],
    p_x: Vec<f64>,
    p_wx: Vec<f64>,
    p_uwx: Vec<f64>,
    p_vwx: Vec<f64>,
    p_uvw: Vec<f64>,
    p_uw: Vec<f64>,
    p_vw: Vec<f64>,
    p_w: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

#[cfg(test)]
impl<'a> MartonKernel<'a> {
    pub fn new(ch: &'a BroadcastChannel, nu: usize, nv: usize, nw: usize) -> Self {
        let nx = ch.input_size();
        Self {
            ch,
            shape: [nu, nv, nw, nx],
            p_x: vec![0.0; nx],
            p_wx: vec![0.0; nw * nx],
            p_uwx: vec![0.0; nu * nw * nx],
            p_vwx: vec![0.0; nv * nw * nx],
            p_uvw: vec![0.0; nu * nv * nw],
            p_uw: vec![0.0; nu * nw],
            p_vw: vec![0.0; nv * nw],
            p_w: vec![0.0; nw],
            q1: vec![0.0; ch.to_y1().output_size()],
            q2: vec![0.0; ch.to_y2().output_size()],
        }
    }

    pub fn eval(&mut self, t: &[f64]) -> MartonRaw {
        let [nu, nv, nw, nx] = self.shape;
        for b in [
            &mut self.p_x,
            &mut self.p_wx,
            &mut self.p_uwx,
            &mut self.p_vwx,
            &mut self.p_uvw,
        ] {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut k = 0;
        for u in 0..nu {
            for v in 0..nv {
                for w in 0..nw {
                    let mut s = 0.0;
                    for x in 0..nx {
                        let p = t[k];
                        k += 1;
                        s += p;
                        self.p_x[x] += p;
                        self.p_wx[w * nx + x] += p;
                        self.p_uwx[(u * nw + w) * nx + x] += p;
                        self.p_vwx[(v * nw + w) * nx + x] += p;
                    }
                    self.p_uvw[(u * nv + v) * nw + w] = s;
                }
            }
        }
        for (o, row) in self.p_uw.iter_mut().zip(self.p_uwx.chunks_exact(nx)) {
            *o = row.iter().sum();
        }
        for (o, row) in self.p_vw.iter_mut().zip(self.p_vwx.chunks_exact(nx)) {
            *o = row.iter().sum();
        }
        for (o, row) in self.p_w.iter_mut().zip(self.p_wx.chunks_exact(nx)) {
            *o = row.iter().sum();
        }
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        let h_y1 = cond_out_entropy(&self.p_x, y1, &mut self.q1);
        let h_y1_w = cond_out_entropy(&self.p_wx, y1, &mut self.q1);
        let h_y1_uw = cond_out_entropy(&self.p_uwx, y1, &mut self.q1);
        let h_y2 = cond_out_entropy(&self.p_x, y2, &mut self.q2);
        let h_y2_w = cond_out_entropy(&self.p_wx, y2, &mut self.q2);
        let h_y2_vw = cond_out_entropy(&self.p_vwx, y2, &mut self.q2);
        let h_w = entropy_of_weights(&self.p_w);
        let i_u_v_w = entropy_of_weights(&self.p_uw) + entropy_of_weights(&self.p_vw)
            - entropy_of_weights(&self.p_uvw)
            - h_w;
        MartonRaw {
            i_uw_y1: h_y1 - h_y1_uw,
            i_vw_y2: h_y2 - h_y2_vw,
            i_w_y1: h_y1 - h_y1_w,
            i_w_y2: h_y2 - h_y2_w,
            i_u_y1_w: h_y1_w - h_y1_uw,
            i_v_y2_w: h_y2_w - h_y2_vw,
            i_u_v_w,
        }
    }
}

/// `-t log2 t` for unnormalized mass.
#[inline]
fn phi(t: f64) -> f64 {
    plog2p(t)
}

/// Unnormalized `sum_y phi(q_y) - phi(sum_x a_x)` for one row `a` of
/// input masses pushed through `tm`.
#[inline]
fn row_term(a: &[f64], tm: &TransitionMatrix) -> f64 {
    let mut t = 0.0;
    let mut total = 0.0;
    for y in 0..tm.output_size() {
        let mut q = 0.0;
        for (x, &ax) in a.iter().enumerate() {
            q += ax * tm.prob(x, y);
        }
        t += phi(q);
    }
    for &ax in a {
        total += ax;
    }
    t - phi(total)
}

/// Marton terms of `softmax(theta)` laid out `[u][v][w][x]`, updated
/// incrementally when only a few logits change between calls.
///
/// Works on unnormalized weights `exp(theta - shift)`: every conditional
/// entropy is a sum of degree-one homogeneous row terms divided by the total
/// mass, so changing one cell only touches the rows containing it.
pub(crate) struct MartonIncremental<'a> {
    ch: &'a BroadcastChannel,
    shape: [usize; 4],
    theta: Vec<f64>,
    shift: f64,
    cell: Vec<f64>,
    total: f64,
    a_x: Vec<f64>,
    a_wx: Vec<f64>,
    a_uwx: Vec<f64>,
    a_vwx: Vec<f64>,
    m_uw: Vec<f64>,
    m_vw: Vec<f64>,
    m_uvw: Vec<f64>,
    m_w: Vec<f64>,
    r1_x: f64,
    r1_w: Vec<f64>,
    r1_uw: Vec<f64>,
    r2_x: f64,
    r2_w: Vec<f64>,
    r2_vw: Vec<f64>,
    e_uw: Vec<f64>,
    e_vw: Vec<f64>,
    e_uvw: Vec<f64>,
    e_w: Vec<f64>,
    changed: Vec<usize>,
}

/// Largest exponent kept before a full rebuild re-centres the weights.
const MAX_EXPONENT: f64 = 600.0;

/// Collects the coordinates where `new` differs from `old`; true when there
/// are few enough of them, all in exponent range, for incremental updates.
fn track_changes(old: &[f64], new: &[f64], shift: f64, changed: &mut Vec<usize>) -> bool {
    changed.clear();
    if old.len() != new.len() {
        return false;
    }
    for (k, (a, b)) in old.iter().zip(new).enumerate() {
        if a.to_bits() != b.to_bits() {
            changed.push(k);
            if changed.len() > 3 {
                return false;
            }
        }
    }
    changed.iter().all(|&k| new[k] - shift <= MAX_EXPONENT)
}

impl<'a> MartonIncremental<'a> {
    pub fn new(ch: &'a BroadcastChannel, nu: usize, nv: usize, nw: usize) -> Self {
        let nx = ch.input_size();
        let n = nu * nv * nw * nx;
        Self {
            ch,
            shape: [nu, nv, nw, nx],
            theta: Vec::new(),
            shift: 0.0,
            cell: vec![0.0; n],
            total: 0.0,
            a_x: vec![0.0; nx],
            a_wx: vec![0.0; nw * nx],
            a_uwx: vec![0.0; nu * nw * nx],
            a_vwx: vec![0.0; nv * nw * nx],
            m_uw: vec![0.0; nu * nw],
            m_vw: vec![0.0; nv * nw],
            m_uvw: vec![0.0; nu * nv * nw],
            m_w: vec![0.0; nw],
            r1_x: 0.0,
            r1_w: vec![0.0; nw],
            r1_uw: vec![0.0; nu * nw],
            r2_x: 0.0,
            r2_w: vec![0.0; nw],
            r2_vw: vec![0.0; nv * nw],
            e_uw: vec![0.0; nu * nw],
            e_vw: vec![0.0; nv * nw],
            e_uvw: vec![0.0; nu * nv * nw],
            e_w: vec![0.0; nw],
            changed: Vec::new(),
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.cell.len()
    }

    fn rebuild(&mut self, theta: &[f64]) {
        let [nu, nv, nw, nx] = self.shape;
        self.theta.clear();
        self.theta.extend_from_slice(theta);
        self.shift = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for b in [
            &mut self.a_x,
            &mut self.a_wx,
            &mut self.a_uwx,
            &mut self.a_vwx,
            &mut self.m_uw,
            &mut self.m_vw,
            &mut self.m_uvw,
            &mut self.m_w,
        ] {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        self.total = 0.0;
        let mut k = 0;
        for u in 0..nu {
            for v in 0..nv {
                for w in 0..nw {
                    for x in 0..nx {
                        let c = (theta[k] - self.shift).exp();
                        self.cell[k] = c;
                        k += 1;
                        self.total += c;
                        self.a_x[x] += c;
                        self.a_wx[w * nx + x] += c;
                        self.a_uwx[(u * nw + w) * nx + x] += c;
                        self.a_vwx[(v * nw + w) * nx + x] += c;
                        self.m_uw[u * nw + w] += c;
                        self.m_vw[v * nw + w] += c;
                        self.m_uvw[(u * nv + v) * nw + w] += c;
                        self.m_w[w] += c;
                    }
                }
            }
        }
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        self.r1_x = row_term(&self.a_x, y1);
        self.r2_x = row_term(&self.a_x, y2);
        for w in 0..nw {
            let row = &self.a_wx[w * nx..(w + 1) * nx];
            self.r1_w[w] = row_term(row, y1);
            self.r2_w[w] = row_term(row, y2);
            self.e_w[w] = phi(self.m_w[w]);
        }
        for (i, row) in self.a_uwx.chunks_exact(nx).enumerate() {
            self.r1_uw[i] = row_term(row, y1);
            self.e_uw[i] = phi(self.m_uw[i]);
        }
        for (i, row) in self.a_vwx.chunks_exact(nx).enumerate() {
            self.r2_vw[i] = row_term(row, y2);
            self.e_vw[i] = phi(self.m_vw[i]);
        }
        for (e, &m) in self.e_uvw.iter_mut().zip(&self.m_uvw) {
            *e = phi(m);
        }
    }

    fn update(&mut self, k: usize, new_theta: f64) {
        let [_, nv, nw, nx] = self.shape;
        let x = k % nx;
        let w = (k / nx) % nw;
        let v = (k / (nx * nw)) % nv;
        let u = k / (nx * nw * nv);
        let c = (new_theta - self.shift).exp();
        let d = c - self.cell[k];
        self.cell[k] = c;
        self.theta[k] = new_theta;
        self.total += d;
        self.a_x[x] += d;
        self.a_wx[w * nx + x] += d;
        let uw = u * nw + w;
        let vw = v * nw + w;
        self.a_uwx[uw * nx + x] += d;
        self.a_vwx[vw * nx + x] += d;
        self.m_uw[uw] += d;
        self.m_vw[vw] += d;
        let uvw = (u * nv + v) * nw + w;
        self.m_uvw[uvw] += d;
        self.m_w[w] += d;
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        self.r1_x = row_term(&self.a_x, y1);
        self.r2_x = row_term(&self.a_x, y2);
        let row = &self.a_wx[w * nx..(w + 1) * nx];
        self.r1_w[w] = row_term(row, y1);
        self.r2_w[w] = row_term(row, y2);
        self.r1_uw[uw] = row_term(&self.a_uwx[uw * nx..(uw + 1) * nx], y1);
        self.r2_vw[vw] = row_term(&self.a_vwx[vw * nx..(vw + 1) * nx], y2);
        self.e_uw[uw] = phi(self.m_uw[uw]);
        self.e_vw[vw] = phi(self.m_vw[vw]);
        self.e_uvw[uvw] = phi(self.m_uvw[uvw]);
        self.e_w[w] = phi(self.m_w[w]);
    }

    pub fn eval(&mut self, theta: &[f64]) -> MartonRaw {
        if track_changes(&self.theta, theta, self.shift, &mut self.changed) {
            for i in 0..self.changed.len() {
                let k = self.changed[i];
                self.update(k, theta[k]);
            }
        } else {
            self.rebuild(theta);
        }
        let z = self.total;
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let h_y1 = self.r1_x / z;
        let h_y1_w = sum(&self.r1_w) / z;
        let h_y1_uw = sum(&self.r1_uw) / z;
        let h_y2 = self.r2_x / z;
        let h_y2_w = sum(&self.r2_w) / z;
        let h_y2_vw = sum(&self.r2_vw) / z;
        let i_u_v_w = (sum(&self.e_uw) + sum(&self.e_vw) - sum(&self.e_uvw) - sum(&self.e_w)) / z;
        MartonRaw {
            i_uw_y1: h_y1 - h_y1_uw,
            i_vw_y2: h_y2 - h_y2_vw,
            i_w_y1: h_y1 - h_y1_w,
            i_w_y2: h_y2 - h_y2_w,
            i_u_y1_w: h_y1_w - h_y1_uw,
            i_v_y2_w: h_y2_w - h_y2_vw,
            i_u_v_w,
        }
    }
}

/// Terms needed by the outer bound and the conjecture gap for one
/// `p(u, v, x)` laid out `[u][v][x]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UvxRaw {
    pub i_u_y1: f64,
    pub i_v_y2: f64,
    pub i_x_y2_u: f64,
    pub i_x_y1_v: f64,
    pub i_u_v: f64,
    pub i_x_y1: f64,
    pub i_x_y2: f64,
}

pub(crate) struct UvxKernel<'a> {
    ch: &'a BroadcastChannel,
    rows: RowEntropies,
    shape: [usize; 3],
    p_x: Vec<f64>,
    p_ux: Vec<f64>,
    p_vx: Vec<f64>,
    p_uv: Vec<f64>,
    p_u: Vec<f64>,
    p_v: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl<'a> UvxKernel<'a> {
    pub fn new(ch: &'a BroadcastChannel, nu: usize, nv: usize) -> Self {
        let nx = ch.input_size();
        Self {
            ch,
            rows: RowEntropies::of(ch),
            shape: [nu, nv, nx],
            p_x: vec![0.0; nx],
            p_ux: vec![0.0; nu * nx],
            p_vx: vec![0.0; nv * nx],
            p_uv: vec![0.0; nu * nv],
            p_u: vec![0.0; nu],
            p_v: vec![0.0; nv],
            q1: vec![0.0; ch.to_y1().output_size()],
            q2: vec![0.0; ch.to_y2().output_size()],
        }
    }

    pub fn eval(&mut self, t: &[f64]) -> UvxRaw {
        let [nu, nv, nx] = self.shape;
        for b in [
            &mut self.p_x,
            &mut self.p_ux,
            &mut self.p_vx,
            &mut self.p_u,
            &mut self.p_v,
        ] {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut k = 0;
        for u in 0..nu {
            for v in 0..nv {
                let mut s = 0.0;
                for x in 0..nx {
                    let p = t[k];
                    k += 1;
                    s += p;
                    self.p_x[x] += p;
                    self.p_ux[u * nx + x] += p;
                    self.p_vx[v * nx + x] += p;
                }
                self.p_uv[u * nv + v] = s;
                self.p_u[u] += s;
                self.p_v[v] += s;
            }
        }
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        let h_y1 = cond_out_entropy(&self.p_x, y1, &mut self.q1);
        let h_y2 = cond_out_entropy(&self.p_x, y2, &mut self.q2);
        let h_y1_x = noise_entropy(&self.p_x, &self.rows.y1);
        let h_y2_x = noise_entropy(&self.p_x, &self.rows.y2);
        let h_y1_u = cond_out_entropy(&self.p_ux, y1, &mut self.q1);
        let h_y2_u = cond_out_entropy(&self.p_ux, y2, &mut self.q2);
        let h_y1_v = cond_out_entropy(&self.p_vx, y1, &mut self.q1);
        let h_y2_v = cond_out_entropy(&self.p_vx, y2, &mut self.q2);
        UvxRaw {
            i_u_y1: h_y1 - h_y1_u,
            i_v_y2: h_y2 - h_y2_v,
            i_x_y2_u: h_y2_u - h_y2_x,
            i_x_y1_v: h_y1_v - h_y1_x,
            i_u_v: entropy_of_weights(&self.p_u) + entropy_of_weights(&self.p_v)
                - entropy_of_weights(&self.p_uv),
            i_x_y1: h_y1 - h_y1_x,
            i_x_y2: h_y2 - h_y2_x,
        }
    }
}

/// [`UvxRaw`] of `softmax(theta)` laid out `[u][v][x]`, updated incrementally
/// like [`MartonIncremental`].
pub(crate) struct UvxIncremental<'a> {
    ch: &'a BroadcastChannel,
    rows: RowEntropies,
    shape: [usize; 3],
    theta: Vec<f64>,
    shift: f64,
    cell: Vec<f64>,
    total: f64,
    a_x: Vec<f64>,
    a_ux: Vec<f64>,
    a_vx: Vec<f64>,
    m_u: Vec<f64>,
    m_v: Vec<f64>,
    m_uv: Vec<f64>,
    r1_x: f64,
    r2_x: f64,
    r1_u: Vec<f64>,
    r2_u: Vec<f64>,
    r1_v: Vec<f64>,
    r2_v: Vec<f64>,
    e_u: Vec<f64>,
    e_v: Vec<f64>,
    e_uv: Vec<f64>,
    changed: Vec<usize>,
}

impl<'a> UvxIncremental<'a> {
    pub fn new(ch: &'a BroadcastChannel, nu: usize, nv: usize) -> Self {
        let nx = ch.input_size();
        Self {
            ch,
            rows: RowEntropies::of(ch),
            shape: [nu, nv, nx],
            theta: Vec::new(),
            shift: 0.0,
            cell: vec![0.0; nu * nv * nx],
            total: 0.0,
            a_x: vec![0.0; nx],
            a_ux: vec![0.0; nu * nx],
            a_vx: vec![0.0; nv * nx],
            m_u: vec![0.0; nu],
            m_v: vec![0.0; nv],
            m_uv: vec![0.0; nu * nv],
            r1_x: 0.0,
            r2_x: 0.0,
            r1_u: vec![0.0; nu],
            r2_u: vec![0.0; nu],
            r1_v: vec![0.0; nv],
            r2_v: vec![0.0; nv],
            e_u: vec![0.0; nu],
            e_v: vec![0.0; nv],
            e_uv: vec![0.0; nu * nv],
            changed: Vec::new(),
        }
    }

    fn rebuild(&mut self, theta: &[f64]) {
        let [nu, nv, nx] = self.shape;
        self.theta.clear();
        self.theta.extend_from_slice(theta);
        self.shift = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for b in [
            &mut self.a_x,
            &mut self.a_ux,
            &mut self.a_vx,
            &mut self.m_u,
            &mut self.m_v,
            &mut self.m_uv,
        ] {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        self.total = 0.0;
        let mut k = 0;
        for u in 0..nu {
            for v in 0..nv {
                for x in 0..nx {
                    let c = (theta[k] - self.shift).exp();
                    self.cell[k] = c;
                    k += 1;
                    self.total += c;
                    self.a_x[x] += c;
                    self.a_ux[u * nx + x] += c;
                    self.a_vx[v * nx + x] += c;
                    self.m_u[u] += c;
                    self.m_v[v] += c;
                    self.m_uv[u * nv + v] += c;
                }
            }
        }
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        self.r1_x = row_term(&self.a_x, y1);
        self.r2_x = row_term(&self.a_x, y2);
        for u in 0..nu {
            let row = &self.a_ux[u * nx..(u + 1) * nx];
            self.r1_u[u] = row_term(row, y1);
            self.r2_u[u] = row_term(row, y2);
            self.e_u[u] = phi(self.m_u[u]);
        }
        for v in 0..nv {
            let row = &self.a_vx[v * nx..(v + 1) * nx];
            self.r1_v[v] = row_term(row, y1);
            self.r2_v[v] = row_term(row, y2);
            self.e_v[v] = phi(self.m_v[v]);
        }
        for (e, &m) in self.e_uv.iter_mut().zip(&self.m_uv) {
            *e = phi(m);
        }
    }

    fn update(&mut self, k: usize, new_theta: f64) {
        let [_, nv, nx] = self.shape;
        let x = k % nx;
        let v = (k / nx) % nv;
        let u = k / (nx * nv);
        let c = (new_theta - self.shift).exp();
        let d = c - self.cell[k];
        self.cell[k] = c;
        self.theta[k] = new_theta;
        self.total += d;
        self.a_x[x] += d;
        self.a_ux[u * nx + x] += d;
        self.a_vx[v * nx + x] += d;
        self.m_u[u] += d;
        self.m_v[v] += d;
        self.m_uv[u * nv + v] += d;
        let (y1, y2) = (self.ch.to_y1(), self.ch.to_y2());
        self.r1_x = row_term(&self.a_x, y1);
        self.r2_x = row_term(&self.a_x, y2);
        let row = &self.a_ux[u * nx..(u + 1) * nx];
        self.r1_u[u] = row_term(row, y1);
        self.r2_u[u] = row_term(row, y2);
        let row = &self.a_vx[v * nx..(v + 1) * nx];
        self.r1_v[v] = row_term(row, y1);
        self.r2_v[v] = row_term(row, y2);
        self.e_u[u] = phi(self.m_u[u]);
        self.e_v[v] = phi(self.m_v[v]);
        self.e_uv[u * nv + v] = phi(self.m_uv[u * nv + v]);
    }

    pub fn eval(&mut self, theta: &[f64]) -> UvxRaw {
        if track_changes(&self.theta, theta, self.shift, &mut self.changed) {
            for i in 0..self.changed.len() {
                let k = self.changed[i];
                self.update(k, theta[k]);
            }
        } else {
            self.rebuild(theta);
        }
        let z = self.total;
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let n1: f64 = self.a_x.iter().zip(&self.rows.y1).map(|(a, h)| a * h).sum();
        let n2: f64 = self.a_x.iter().zip(&self.rows.y2).map(|(a, h)| a * h).sum();
        let (r1u, r2u, r1v, r2v) = (
            sum(&self.r1_u),
            sum(&self.r2_u),
            sum(&self.r1_v),
            sum(&self.r2_v),
        );
        UvxRaw {
            i_u_y1: (self.r1_x - r1u) / z,
            i_v_y2: (self.r2_x - r2v) / z,
            i_x_y2_u: (r2u - n2) / z,
            i_x_y1_v: (r1v - n1) / z,
            i_u_v: (sum(&self.e_u) + sum(&self.e_v) - sum(&self.e_uv) - phi(z)) / z,
            i_x_y1: (self.r1_x - n1) / z,
            i_x_y2: (self.r2_x - n2) / z,
        }
    }
}

/// Output and noise entropies of a binary-input channel as functions of
/// `eta = P(X = 0)`.
#[derive(Debug, Clone)]
pub(crate) struct BinaryProfile {
    y1: [Vec<f64>; 2],
    y2: [Vec<f64>; 2],
    rows: RowEntropies,
}

impl BinaryProfile {
    /// `None` unless the input is binary.
    pub fn of(ch: &BroadcastChannel) -> Option<Self> {
        if ch.input_size() != 2 {
            return None;
        }
        let two = |tm: &TransitionMatrix| [tm.row(0).to_vec(), tm.row(1).to_vec()];
        Some(Self {
            y1: two(ch.to_y1()),
            y2: two(ch.to_y2()),
            rows: RowEntropies::of(ch),
        })
    }

    fn out(rows: &[Vec<f64>; 2], eta: f64) -> f64 {
        rows[0]
            .iter()
            .zip(&rows[1])
            .map(|(a, b)| plog2p(eta * a + (1.0 - eta) * b))
            .sum()
    }

    pub fn h_y1(&self, eta: f64) -> f64 {
        Self::out(&self.y1, eta)
    }

    pub fn h_y2(&self, eta: f64) -> f64 {
        Self::out(&self.y2, eta)
    }

    pub fn h_y1_x(&self, eta: f64) -> f64 {
        eta * self.rows.y1[0] + (1.0 - eta) * self.rows.y1[1]
    }

    pub fn h_y2_x(&self, eta: f64) -> f64 {
        eta * self.rows.y2[0] + (1.0 - eta) * self.rows.y2[1]
    }

    pub fn i_x_y1(&self, eta: f64) -> f64 {
        self.h_y1(eta) - self.h_y1_x(eta)
    }

    pub fn i_x_y2(&self, eta: f64) -> f64 {
        self.h_y2(eta) - self.h_y2_x(eta)
    }
}
