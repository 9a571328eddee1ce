//! Distance properties of binary linear codes by exhaustive enumeration.

use super::matrix::Gf2Matrix;
use super::word::BitWord;
use crate::error::{NmcError, Result};

/// Largest code dimension enumerated exhaustively (2^24 codewords).
pub const MAX_ENUM_DIM: usize = 24;

/// Minimum weight over all nonzero codewords of the code generated by `g`.
///
/// Walks the codewords in Gray-code order so each step is a single row XOR.
/// A zero-dimensional code has no nonzero word; `ncols + 1` is returned.
pub fn min_distance(g: &Gf2Matrix) -> Result<usize> {
    let k = g.nrows();
    let rank = g.rank();
    if rank != k {
        return Err(NmcError::RankDeficient { rank, rows: k });
    }
    if k > MAX_ENUM_DIM {
        return Err(NmcError::TooLarge {
            what: "code dimension",
            log2_size: k,
            log2_limit: MAX_ENUM_DIM,
        });
    }
    let n = g.ncols();
    if k == 0 {
        return Ok(n + 1);
    }
    let mut word = BitWord::zeros(n);
    let mut best = n + 1;
    for i in 1u64..(1u64 << k) {
        word.xor_in_place(g.row(i.trailing_zeros() as usize));
        best = best.min(word.weight());
        if best == 1 {
            break;
        }
    }
    Ok(best)
}

/// Minimum distance of the dual code: the smallest nonzero weight among
/// words orthogonal to every row of `g`.
///
/// Every `dual_distance - 1` columns of `g` are linearly independent, so the
/// bits of `r · g` for uniform `r` are `(dual_distance - 1)`-wise independent
/// and uniform. When the dual code is `{0}` the sentinel `ncols + 1` is
/// returned.
pub fn dual_distance(g: &Gf2Matrix) -> Result<usize> {
    let rank = g.rank();
    if rank != g.nrows() {
        return Err(NmcError::RankDeficient {
            rank,
            rows: g.nrows(),
        });
    }
    if (0..g.ncols()).any(|c| g.rows().iter().all(|r| !r.get(c))) {
        return Ok(1);
    }
    min_distance(&g.null_space())
}
