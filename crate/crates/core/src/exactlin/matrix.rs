use std::fmt;

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;

/// Dense rectangular matrix of exact scalars, row-major.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col_vec(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// Side-by-side concatenation `[self | other]`.
    pub fn augment(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "row count mismatch in augment");
        let mut m = Matrix::zero(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                m.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c) + &(a * b);
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                let mut acc = Scalar::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc += &(a * &v[c]);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Reduced row echelon form together with the rank.
    ///
    /// Exact Gauss-Jordan elimination: the pivot row is scaled to a unit
    /// pivot and subtracted from every other row with a nonzero entry in the
    /// pivot column, skipping zero entries of the pivot row. Pivot choice is
    /// the first nonzero entry in column order, so the result is
    /// deterministic for a fixed input.
    pub fn rank_and_rref(&self) -> (usize, Matrix) {
        let (rank, rref, _) = self.rref_with_pivots();
        (rank, rref)
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().0
    }

    pub(crate) fn rref_with_pivots(&self) -> (usize, Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in c..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv();
            if !inv.is_one() {
                for j in c..m.cols {
                    if !m.get(r, j).is_zero() {
                        let v = m.get(r, j) * &inv;
                        m.set(r, j, v);
                    }
                }
            }
            let pivot_row: Vec<(usize, Scalar)> = (c..m.cols)
                .filter(|&j| !m.get(r, j).is_zero())
                .map(|j| (j, m.get(r, j).clone()))
                .collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for (j, pv) in &pivot_row {
                    let v = m.get(i, *j) - &(&factor * pv);
                    m.set(i, *j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (pivots.len(), m, pivots)
    }

    /// Basis of `{v : self * v = 0}` as a canonical subspace of `R^cols`.
    pub fn kernel_basis(&self) -> super::Subspace {
        let (_, rref, pivots) = self.rref_with_pivots();
        let is_pivot = {
            let mut v = vec![false; self.cols];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let mut gens = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -rref.get(row, free);
            }
            gens.push(v);
        }
        super::Subspace::from_spanning(self.cols, gens)
    }

    /// Column span as a canonical subspace of `R^rows`.
    pub fn column_space(&self) -> super::Subspace {
        super::Subspace::from_spanning(self.rows, (0..self.cols).map(|c| self.col_vec(c)).collect())
    }

    /// Solves `self * x = rhs_col` for every column of `rhs`. Returns `None`
    /// if any system is inconsistent; non-pivot variables are set to zero, so
    /// for injective `self` the solution is the unique preimage.
    pub fn solve_columns(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows, "row mismatch in solve_columns");
        let aug = self.augment(rhs);
        let (_, rref, pivots) = aug.rref_with_pivots();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None; // a pivot in the rhs block means inconsistency
        }
        let mut out = Matrix::zero(self.cols, rhs.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                out.set(pc, c, rref.get(row, self.cols + c).clone());
            }
        }
        Some(out)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn rref_identity() {
        let (rank, rref) = Matrix::identity(2).rank_and_rref();
        assert_eq!(rank, 2);
        assert_eq!(rref, Matrix::identity(2));
    }

    #[test]
    fn rref_already_reduced() {
        let (rank, rref) = m(&[&[1, 1]]).rank_and_rref();
        assert_eq!(rank, 1);
        assert_eq!(rref, m(&[&[1, 1]]));
    }

    #[test]
    fn rref_proportional_rows() {
        let (rank, rref) = m(&[&[1, 2], &[2, 4]]).rank_and_rref();
        assert_eq!(rank, 1);
        assert_eq!(rref, m(&[&[1, 2], &[0, 0]]));
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        assert_eq!(Matrix::identity(2).kernel_basis().dim(), 0);
    }

    #[test]
    fn kernel_one_relation() {
        let k = m(&[&[1, 1]]).kernel_basis();
        assert_eq!(k.dim(), 1);
        assert!(k.contains_vec(&[Scalar::from_int(1), Scalar::from_int(-1)]));
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        assert_eq!(Matrix::zero(1, 3).kernel_basis().dim(), 3);
    }

    #[test]
    fn solve_columns_unique() {
        let a = m(&[&[1, 0], &[0, 2], &[1, 1]]);
        let rhs = m(&[&[1], &[4], &[3]]);
        let x = a.solve_columns(&rhs).unwrap();
        assert_eq!(a.mul(&x), rhs);
        let bad = m(&[&[1], &[4], &[100]]);
        assert!(a.solve_columns(&bad).is_none());
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-4i64..5, r * c).prop_map(move |vals| Matrix {
                rows: r,
                cols: c,
                data: vals.into_iter().map(Scalar::from_int).collect(),
            })
        })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(a in arb_matrix()) {
            prop_assert_eq!(a.rank(), a.transpose().rank());
        }

        #[test]
        fn rank_nullity(a in arb_matrix()) {
            prop_assert_eq!(a.kernel_basis().dim() + a.rank(), a.cols());
        }

        #[test]
        fn kernel_vectors_annihilate(a in arb_matrix()) {
            for v in a.kernel_basis().basis() {
                prop_assert!(a.mul_vec(v).iter().all(Scalar::is_zero));
            }
        }

        #[test]
        fn rref_is_idempotent(a in arb_matrix()) {
            let (_, r1) = a.rank_and_rref();
            let (_, r2) = r1.rank_and_rref();
            prop_assert_eq!(r1, r2);
        }
    }
}
