use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::scalar::Scalar;
use crate::error::InputError;

/// A linear subspace of `R^ambient` (or the Gaussian-rational analogue),
/// stored as the reduced row echelon basis of its span. The representation
/// is canonical: two equal subspaces have bit-identical stored bases.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Scalar>>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient).row_vecs(),
        }
    }

    /// Canonicalizes an arbitrary spanning set.
    pub fn from_spanning(ambient: usize, gens: Vec<Vec<Scalar>>) -> Self {
        assert!(
            gens.iter().all(|g| g.len() == ambient),
            "generator length mismatch"
        );
        if gens.is_empty() {
            return Subspace::zero(ambient);
        }
        let (rank, rref) = Matrix::from_rows(gens).rank_and_rref();
        let basis = rref.row_vecs().into_iter().take(rank).collect();
        Subspace { ambient, basis }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> Matrix {
        if self.basis.is_empty() {
            Matrix::zero(0, self.ambient)
        } else {
            Matrix::from_rows(self.basis.clone())
        }
    }

    fn pivot_of(row: &[Scalar]) -> usize {
        row.iter().position(|s| !s.is_zero()).expect("zero basis row")
    }

    /// Membership test by reduction against the echelon basis.
    pub fn contains_vec(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient, "ambient mismatch in contains_vec");
        let mut rem = v.to_vec();
        for row in &self.basis {
            let p = Self::pivot_of(row);
            if rem[p].is_zero() {
                continue;
            }
            let factor = rem[p].clone();
            for (r, b) in rem.iter_mut().zip(row.iter()) {
                *r -= &(&factor * b);
            }
        }
        rem.iter().all(Scalar::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains_vec(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch in sum");
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().cloned());
        Subspace::from_spanning(self.ambient, gens)
    }

    /// Canonical basis of the intersection. Solves `A^T u = B^T w` through a
    /// single kernel computation.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, InputError> {
        if self.ambient != other.ambient {
            return Err(InputError::Malformed(format!(
                "ambient dimension mismatch in intersect: {} vs {}",
                self.ambient, other.ambient
            )));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient));
        }
        let da = self.dim();
        let db = other.dim();
        let mut m = Matrix::zero(self.ambient, da + db);
        for (k, row) in self.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, k, row[i].clone());
            }
        }
        for (k, row) in other.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, da + k, -&row[i]);
            }
        }
        let gens: Vec<Vec<Scalar>> = m
            .kernel_basis()
            .basis()
            .iter()
            .map(|uv| {
                let mut v = vec![Scalar::zero(); self.ambient];
                for (k, row) in self.basis.iter().enumerate() {
                    if uv[k].is_zero() {
                        continue;
                    }
                    for i in 0..self.ambient {
                        v[i] += &(&uv[k] * &row[i]);
                    }
                }
                v
            })
            .collect();
        let meet = Subspace::from_spanning(self.ambient, gens);
        debug_assert_eq!(
            meet.dim() + self.sum(other).dim(),
            self.dim() + other.dim(),
            "intersection dimension formula violated"
        );
        Ok(meet)
    }

    /// Image of this subspace under the linear map `map` (columns = ambient).
    pub fn map_through(&self, map: &Matrix) -> Subspace {
        assert_eq!(map.cols(), self.ambient, "map domain mismatch");
        Subspace::from_spanning(
            map.rows(),
            self.basis.iter().map(|v| map.mul_vec(v)).collect(),
        )
    }
}

/// Column span of `m` inside the target's ambient space, and the codimension
/// of `image ∩ target` inside `target`.
pub fn image_and_quotient(m: &Matrix, target: &Subspace) -> Result<(Subspace, usize), InputError> {
    if m.rows() != target.ambient() {
        return Err(InputError::Malformed(format!(
            "image_and_quotient: map has {} rows but target ambient is {}",
            m.rows(),
            target.ambient()
        )));
    }
    let image = m.column_space();
    let met = image.intersect(target)?;
    Ok((image, target.dim() - met.dim()))
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Subspace dim {} of R^{} [", self.dim(), self.ambient)?;
        for row in &self.basis {
            write!(f, "  ")?;
            for s in row {
                write!(f, "{s} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
