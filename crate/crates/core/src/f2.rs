//! Sparse linear algebra over the two-element field.
//!
//! Vectors and matrices store supports only; addition is symmetric
//! difference. Elimination runs on packed bit rows internally.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum F2Error {
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("composite of the two maps is nonzero")]
    NotAComplex,
}

/// The linear system has no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("linear system is inconsistent")]
pub struct NoSolution;

/// A vector over GF(2), stored as its sorted support.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct F2Vector {
    support: Vec<usize>,
}

impl F2Vector {
    pub const fn zero() -> Self {
        F2Vector { support: Vec::new() }
    }

    /// Builds a vector from indices, cancelling repeated indices in pairs.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut support: Vec<usize> = indices.into_iter().collect();
        support.sort_unstable();
        let mut out = Vec::with_capacity(support.len());
        let mut i = 0;
        while i < support.len() {
            let mut j = i;
            while j < support.len() && support[j] == support[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(support[i]);
            }
            i = j;
        }
        F2Vector { support: out }
    }

    pub fn unit(index: usize) -> Self {
        F2Vector {
            support: vec![index],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.support.binary_search(&index).is_ok()
    }

    pub fn toggle(&mut self, index: usize) {
        match self.support.binary_search(&index) {
            Ok(pos) => {
                self.support.remove(pos);
            }
            Err(pos) => self.support.insert(pos, index),
        }
    }

    pub fn add_assign(&mut self, other: &F2Vector) {
        if other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.support.len() + other.support.len());
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.support = out;
    }

    pub fn sum(&self, other: &F2Vector) -> F2Vector {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &F2Vector) -> bool {
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j, mut parity) = (0, 0, false);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    parity = !parity;
                    i += 1;
                    j += 1;
                }
            }
        }
        parity
    }

    pub fn max_index(&self) -> Option<usize> {
        self.support.last().copied()
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.support.iter()).finish()
    }
}

impl FromIterator<usize> for F2Vector {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        F2Vector::from_indices(iter)
    }
}

/// Packed row used by the elimination routines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub(crate) fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub(crate) fn from_support(len: usize, support: &[usize]) -> Self {
        let mut row = Self::zeros(len);
        for &i in support {
            row.flip(i);
        }
        row
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn xor_from(&mut self, other: &BitRow, from_word: usize) {
        for (a, b) in self.words[from_word..].iter_mut().zip(&other.words[from_word..]) {
            *a ^= *b;
        }
    }

    pub(crate) fn first_one(&self, from: usize) -> Option<usize> {
        let mut w = from / 64;
        if w >= self.words.len() {
            return None;
        }
        let mut word = self.words[w] & (!0u64 << (from % 64));
        loop {
            if word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }
}

/// Reduced row echelon form of a matrix, optionally with an augmented column.
struct Rref {
    rows: Vec<BitRow>,
    /// Pivot column of each row of `rows`, strictly increasing.
    pivots: Vec<usize>,
}

impl Rref {
    /// Full Gauss-Jordan elimination over the first `ncols` columns.
    fn compute(mut rows: Vec<BitRow>, ncols: usize) -> Rref {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..ncols {
            let Some(found) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank].clone();
            let word = col / 64;
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_from(&pivot_row, word);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        Rref { rows, pivots }
    }
}

/// A matrix over GF(2) with sparse rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    row_support: Vec<Vec<usize>>,
}

impl F2Matrix {
    /// Builds a matrix from `(row, col)` entries; each entry may appear once.
    pub fn new<I>(rows: usize, cols: usize, entries: I) -> Result<Self, F2Error>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut row_support = vec![Vec::new(); rows];
        for (r, c) in entries {
            if r >= rows || c >= cols {
                return Err(F2Error::OutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            row_support[r].push(c);
        }
        for (r, row) in row_support.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(F2Error::DuplicateEntry { row: r, col: w[0] });
            }
        }
        Ok(F2Matrix {
            rows,
            cols,
            row_support,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows,
            cols,
            row_support: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix {
            rows: n,
            cols: n,
            row_support: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[F2Vector]) -> Result<Self, F2Error> {
        let mut entries = Vec::new();
        for (c, col) in columns.iter().enumerate() {
            for r in col.iter() {
                entries.push((r, c));
            }
        }
        F2Matrix::new(rows, columns.len(), entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.row_support[row].binary_search(&col).is_ok()
    }

    pub fn row(&self, row: usize) -> F2Vector {
        F2Vector {
            support: self.row_support[row].clone(),
        }
    }

    pub fn column(&self, col: usize) -> F2Vector {
        (0..self.rows).filter(|&r| self.get(r, col)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_support
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r, c)))
    }

    pub fn nnz(&self) -> usize {
        self.row_support.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.row_support.iter().all(Vec::is_empty)
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut row_support = vec![Vec::new(); self.cols];
        for (r, c) in self.entries() {
            row_support[c].push(r);
        }
        F2Matrix {
            rows: self.cols,
            cols: self.rows,
            row_support,
        }
    }

    pub fn mul_vec(&self, v: &F2Vector) -> F2Vector {
        let mut out = Vec::new();
        for (r, row) in self.row_support.iter().enumerate() {
            let row = F2Vector {
                support: row.clone(),
            };
            if row.dot(v) {
                out.push(r);
            }
        }
        F2Vector { support: out }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &F2Matrix) -> Result<F2Matrix, F2Error> {
        if self.cols != other.rows {
            return Err(F2Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut row_support = Vec::with_capacity(self.rows);
        for row in &self.row_support {
            let mut acc = F2Vector::zero();
            for &k in row {
                acc.add_assign(&F2Vector {
                    support: other.row_support[k].clone(),
                });
            }
            row_support.push(acc.support);
        }
        Ok(F2Matrix {
            rows: self.rows,
            cols: other.cols,
            row_support,
        })
    }

    fn bit_rows(&self, width: usize) -> Vec<BitRow> {
        self.row_support
            .iter()
            .map(|row| BitRow::from_support(width, row))
            .collect()
    }

    fn rref(&self) -> Rref {
        Rref::compute(self.bit_rows(self.cols), self.cols)
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the null space, one vector per pivot-free column, in
    /// increasing order of that column.
    pub fn kernel_basis(&self) -> Vec<F2Vector> {
        let rref = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &rref.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut support = vec![free];
                for (row, &p) in rref.rows.iter().zip(&rref.pivots) {
                    if row.get(free) {
                        support.push(p);
                    }
                }
                F2Vector::from_indices(support)
            })
            .collect()
    }

    /// Finds some `x` with `self * x = target`. Free variables are set to zero.
    pub fn solve(&self, target: &F2Vector) -> Result<F2Vector, NoSolution> {
        assert!(
            target.max_index().is_none_or(|m| m < self.rows),
            "target index out of range for a {}-row system",
            self.rows
        );
        let width = self.cols + 1;
        let mut rows = self.bit_rows(width);
        for r in target.iter() {
            rows[r].flip(self.cols);
        }
        let rref = Rref::compute(rows, width);
        if rref.pivots.last() == Some(&self.cols) {
            return Err(NoSolution);
        }
        Ok(rref
            .rows
            .iter()
            .zip(&rref.pivots)
            .filter(|(row, _)| row.get(self.cols))
            .map(|(_, &p)| p)
            .collect())
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows, self.cols)?;
        for row in &self.row_support {
            let line: String = (0..self.cols)
                .map(|c| if row.binary_search(&c).is_ok() { '1' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Dimension of `ker(d_out) / im(d_in)`.
pub fn homology_dim(d_in: &F2Matrix, d_out: &F2Matrix) -> Result<usize, F2Error> {
    check_complex(d_in, d_out)?;
    Ok(d_out.cols() - d_out.rank() - d_in.rank())
}

fn check_complex(d_in: &F2Matrix, d_out: &F2Matrix) -> Result<(), F2Error> {
    if d_in.rows() != d_out.cols() {
        return Err(F2Error::DimensionMismatch(format!(
            "incoming map has {} rows, outgoing map has {} columns",
            d_in.rows(),
            d_out.cols()
        )));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(F2Error::NotAComplex);
    }
    Ok(())
}

/// Incrementally maintained row-reduced basis of a subspace.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<BitRow>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        EchelonBasis {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut row: BitRow) -> BitRow {
        for (basis_row, &p) in self.rows.iter().zip(&self.pivots) {
            if row.get(p) {
                row.xor_from(basis_row, 0);
            }
        }
        row
    }

    pub fn contains(&self, v: &F2Vector) -> bool {
        self.reduce(BitRow::from_support(self.len, v.support()))
            .first_one(0)
            .is_none()
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &F2Vector) -> bool {
        let row = self.reduce(BitRow::from_support(self.len, v.support()));
        let Some(p) = row.first_one(0) else {
            return false;
        };
        // Keep earlier rows reduced against the new pivot so `reduce` works in one pass.
        for existing in &mut self.rows {
            if existing.get(p) {
                existing.xor_from(&row, 0);
            }
        }
        self.rows.push(row);
        self.pivots.push(p);
        true
    }
}

/// A chosen basis of homology for `ker(d_out) / im(d_in)`.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    dim_chain: usize,
    representatives: Vec<F2Vector>,
    boundaries: Vec<F2Vector>,
}

impl HomologyBasis {
    pub fn new(d_in: &F2Matrix, d_out: &F2Matrix) -> Result<Self, F2Error> {
        check_complex(d_in, d_out)?;
        let dim_chain = d_out.cols();
        let mut span = EchelonBasis::new(dim_chain);
        let boundaries: Vec<F2Vector> = (0..d_in.cols())
            .map(|c| d_in.column(c))
            .filter(|col| !col.is_zero())
            .collect();
        for b in &boundaries {
            span.insert(b);
        }
        let mut representatives = Vec::new();
        for z in d_out.kernel_basis() {
            if span.insert(&z) {
                representatives.push(z);
            }
        }
        Ok(HomologyBasis {
            dim_chain,
            representatives,
            boundaries,
        })
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[F2Vector] {
        &self.representatives
    }

    /// Coordinates of the class of cycle `z` in the representative basis.
    pub fn class_of(&self, z: &F2Vector) -> Result<F2Vector, NoSolution> {
        let mut columns = self.representatives.clone();
        columns.extend(self.boundaries.iter().cloned());
        let m = F2Matrix::from_columns(self.dim_chain, &columns)
            .expect("homology columns lie in the chain space");
        let x = m.solve(z)?;
        Ok(x.iter().filter(|&i| i < self.representatives.len()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, e: &[(usize, usize)]) -> F2Matrix {
        F2Matrix::new(rows, cols, e.iter().copied()).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(F2Matrix::identity(2).rank(), 2);
        assert_eq!(F2Matrix::zeros(3, 5).rank(), 0);
        assert_eq!(m(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(F2Matrix::identity(2).kernel_basis().is_empty());
        let k = F2Matrix::zeros(2, 3).kernel_basis();
        assert_eq!(
            k,
            vec![F2Vector::unit(0), F2Vector::unit(1), F2Vector::unit(2)]
        );
        let k = m(1, 2, &[(0, 0), (0, 1)]).kernel_basis();
        assert_eq!(k, vec![F2Vector::from_indices([0, 1])]);
    }

    #[test]
    fn solve_examples() {
        let id = F2Matrix::identity(2);
        assert_eq!(id.solve(&F2Vector::unit(0)), Ok(F2Vector::unit(0)));
        assert_eq!(F2Matrix::zeros(2, 2).solve(&F2Vector::unit(1)), Err(NoSolution));
        let a = m(1, 2, &[(0, 0), (0, 1)]);
        let x = a.solve(&F2Vector::unit(0)).unwrap();
        assert_eq!(a.mul_vec(&x), F2Vector::unit(0));
    }

    #[test]
    fn homology_examples() {
        let z = F2Matrix::zeros(4, 4);
        assert_eq!(homology_dim(&z, &z), Ok(4));
        assert_eq!(
            homology_dim(&F2Matrix::identity(3), &F2Matrix::zeros(3, 3)),
            Ok(0)
        );
        let id = F2Matrix::identity(2);
        assert_eq!(homology_dim(&id, &id), Err(F2Error::NotAComplex));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            F2Matrix::new(2, 2, [(2, 0)]),
            Err(F2Error::OutOfBounds { .. })
        ));
        assert_eq!(
            F2Matrix::new(2, 2, [(0, 1), (0, 1)]),
            Err(F2Error::DuplicateEntry { row: 0, col: 1 })
        );
    }

    #[test]
    fn vector_arithmetic() {
        let mut v = F2Vector::from_indices([3, 1, 3, 2]);
        assert_eq!(v.support(), &[1, 2]);
        v.add_assign(&F2Vector::from_indices([2, 5]));
        assert_eq!(v.support(), &[1, 5]);
        v.toggle(1);
        assert_eq!(v.support(), &[5]);
        assert!(v.dot(&F2Vector::from_indices([5, 7])));
    }

    #[test]
    fn homology_basis_classes() {
        // C: 0 -> F^2 --d--> F^2 with d = [[1,1],[0,0]] composed into a single chain space.
        let d = m(3, 3, &[(0, 1)]);
        let hb = HomologyBasis::new(&d, &d).unwrap();
        assert_eq!(hb.dim(), 1);
        let rep = hb.representatives()[0].clone();
        assert_eq!(hb.class_of(&rep).unwrap(), F2Vector::unit(0));
        assert!(hb.class_of(&F2Vector::unit(0)).unwrap().is_zero());
    }
}
