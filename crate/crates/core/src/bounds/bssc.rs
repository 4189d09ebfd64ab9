use crate::error::{Error, Result};
use crate::probcore::{BroadcastChannel, TransitionMatrix};

/// Binary skew-symmetric channel with crossover `p`.
///
/// Toward `Y1`, input 1 is received as 1 and input 0 flips to 1 with
/// probability `p`. Toward `Y2` the roles of the symbols are mirrored: input 0
/// is received as 0 and input 1 flips to 0 with probability `p`. With
/// `p = 1/2` and `P(X=0) = eta`, `H(Y1) = H(eta/2)` and `H(Y2) = H((1-eta)/2)`.
pub fn bssc(p: f64) -> Result<BroadcastChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    let y1 = TransitionMatrix::new(vec![vec![1.0 - p, p], vec![0.0, 1.0]])?;
    let y2 = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]])?;
    BroadcastChannel::new(y1, y2)
}
