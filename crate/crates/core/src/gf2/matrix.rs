use std::fmt;

use serde::{Deserialize, Serialize};

use super::word::BitWord;
use crate::error::{NmcError, Result};

/// Dense matrix over GF(2), stored as rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixText", into = "MatrixText")]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<BitWord>,
}

#[derive(Serialize, Deserialize)]
struct MatrixText {
    rows: usize,
    cols: usize,
    data: Vec<BitWord>,
}

impl TryFrom<MatrixText> for Gf2Matrix {
    type Error = NmcError;

    fn try_from(t: MatrixText) -> Result<Self> {
        if t.data.len() != t.rows {
            return Err(NmcError::Parse(format!(
                "matrix declares {} rows but lists {}",
                t.rows,
                t.data.len()
            )));
        }
        Gf2Matrix::new(t.cols, t.data)
    }
}

impl From<Gf2Matrix> for MatrixText {
    fn from(m: Gf2Matrix) -> Self {
        MatrixText {
            rows: m.rows.len(),
            cols: m.cols,
            data: m.rows,
        }
    }
}

impl Gf2Matrix {
    pub fn new(cols: usize, rows: Vec<BitWord>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(NmcError::LengthMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitWord::unit(n, i)).collect(),
        }
    }

    /// Builds a matrix from `0`/`1` row strings of equal length.
    pub fn from_bit_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| BitWord::parse_bits(r))
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, BitWord::len);
        Self::new(cols, rows)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitWord] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitWord {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn column(&self, c: usize) -> BitWord {
        BitWord::from_bits(self.rows.iter().map(|r| r.get(c)))
    }

    pub fn transpose(&self) -> Self {
        Self {
            cols: self.rows.len(),
            rows: (0..self.cols).map(|c| self.column(c)).collect(),
        }
    }

    pub fn push_row(&mut self, row: BitWord) -> Result<()> {
        if row.len() != self.cols {
            return Err(NmcError::LengthMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Vertical concatenation `[self; other]`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(NmcError::LengthMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self {
            cols: self.cols,
            rows,
        })
    }

    /// Row-vector product `v · M`: the XOR of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.rows.len() {
            return Err(NmcError::LengthMismatch {
                expected: self.rows.len(),
                found: v.len(),
            });
        }
        let mut out = BitWord::zeros(self.cols);
        for i in v.ones_positions() {
            out.xor_in_place(&self.rows[i]);
        }
        Ok(out)
    }

    /// Matrix-vector product `M · v^T`, one parity per row.
    pub fn mul_vec(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.cols {
            return Err(NmcError::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(BitWord::from_bits(self.rows.iter().map(|r| r.dot(v))))
    }

    pub fn rank(&self) -> usize {
        Echelon::reduce(self).pivots.len()
    }

    pub fn has_full_row_rank(&self) -> bool {
        self.rank() == self.rows.len()
    }

    /// Basis of `{x : M x^T = 0}`, returned as the rows of a matrix with
    /// `ncols` columns. Rows come from the free columns of the reduced
    /// echelon form, so the basis is always linearly independent.
    pub fn null_space(&self) -> Self {
        let ech = Echelon::reduce(self);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|p| p.col).collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_cols.contains(c)) {
            let mut x = BitWord::unit(self.cols, free);
            for p in &ech.pivots {
                if p.row.get(free) {
                    x.set(p.col, true);
                }
            }
            basis.push(x);
        }
        Self {
            cols: self.cols,
            rows: basis,
        }
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug)]
struct Pivot {
    col: usize,
    /// Fully reduced row: zero in every other pivot column.
    row: BitWord,
    /// Which original rows XOR to `row`.
    combo: BitWord,
}

/// Reduced row echelon form with the row operations tracked.
#[derive(Clone, Debug)]
struct Echelon {
    pivots: Vec<Pivot>,
}

impl Echelon {
    fn reduce(m: &Gf2Matrix) -> Self {
        let k = m.nrows();
        let mut pivots: Vec<Pivot> = Vec::new();
        for (i, r) in m.rows.iter().enumerate() {
            let mut row = r.clone();
            let mut combo = BitWord::unit(k, i);
            for p in &pivots {
                if row.get(p.col) {
                    row.xor_in_place(&p.row);
                    combo.xor_in_place(&p.combo);
                }
            }
            let Some(col) = row.first_one() else {
                continue;
            };
            for p in pivots.iter_mut() {
                if p.row.get(col) {
                    p.row.xor_in_place(&row);
                    p.combo.xor_in_place(&combo);
                }
            }
            pivots.push(Pivot { col, row, combo });
        }
        Self { pivots }
    }
}

/// Solves `v · G = c` for a full-row-rank generator `G`.
///
/// Used as the decoder of linear codes: `solve` returns the unique
/// coordinate vector when `c` lies in the row space and `None` otherwise.
#[derive(Clone, Debug)]
pub struct RowSpaceSolver {
    cols: usize,
    dim: usize,
    pivots: Vec<Pivot>,
}

impl RowSpaceSolver {
    pub fn new(g: &Gf2Matrix) -> Result<Self> {
        let ech = Echelon::reduce(g);
        if ech.pivots.len() != g.nrows() {
            return Err(NmcError::RankDeficient {
                rank: ech.pivots.len(),
                rows: g.nrows(),
            });
        }
        Ok(Self {
            cols: g.ncols(),
            dim: g.nrows(),
            pivots: ech.pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, c: &BitWord) -> Result<Option<BitWord>> {
        if c.len() != self.cols {
            return Err(NmcError::LengthMismatch {
                expected: self.cols,
                found: c.len(),
            });
        }
        let mut residual = c.clone();
        let mut coords = BitWord::zeros(self.dim);
        for p in &self.pivots {
            if residual.get(p.col) {
                residual.xor_in_place(&p.row);
                coords.xor_in_place(&p.combo);
            }
        }
        Ok(residual.is_zero().then_some(coords))
    }

    pub fn contains(&self, c: &BitWord) -> Result<bool> {
        Ok(self.solve(c)?.is_some())
    }
}
