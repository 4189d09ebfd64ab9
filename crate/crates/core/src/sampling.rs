//! Seeded random instances: pmfs, joint tables, channels.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::probcore::{BroadcastChannel, JointPmf, TransitionMatrix, Var};

/// Deterministic generator for a `(seed, stream)` pair.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on the probability simplex with `n` vertices.
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Like [`uniform_simplex`], but each entry is zeroed with probability
/// `sparsity` (at least one entry always survives).
pub fn sparse_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, sparsity: f64) -> Vec<f64> {
    let mut w = uniform_simplex(rng, n);
    let keep = rng.gen_range(0..n);
    for (i, v) in w.iter_mut().enumerate() {
        if i != keep && rng.gen_bool(sparsity) {
            *v = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

pub fn random_joint<R: Rng + ?Sized>(
    rng: &mut R,
    labels: Vec<Var>,
    shape: Vec<usize>,
    sparsity: f64,
) -> JointPmf {
    let n = shape.iter().product();
    let table = sparse_simplex(rng, n, sparsity);
    JointPmf::new(labels, shape, table).expect("normalized by construction")
}

pub fn random_transition<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize) -> TransitionMatrix {
    let rows = (0..nx).map(|_| uniform_simplex(rng, ny)).collect();
    TransitionMatrix::new(rows).expect("normalized by construction")
}

pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    nx: usize,
    ny1: usize,
    ny2: usize,
) -> BroadcastChannel {
    BroadcastChannel::new(
        random_transition(rng, nx, ny1),
        random_transition(rng, nx, ny2),
    )
    .expect("input sizes agree")
}
