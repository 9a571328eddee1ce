//! GF(2) vectors and matrices, small binary extension fields, and
//! exhaustive distance computations for binary linear codes.

mod code;
mod field;
mod matrix;
mod word;

pub use code::{dual_distance, min_distance, MAX_ENUM_DIM};
pub use field::{BinaryField, FieldElem, MAX_DEGREE};
pub use matrix::{Gf2Matrix, RowSpaceSolver};
pub use word::{hamming_distance, hamming_weight, BitWord};
