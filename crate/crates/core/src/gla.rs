//! Graded nilpotent Lie algebras given by structure constants: the symbol
//! algebras of the flat filtered-manifold model. Weights are stored positive
//! (a basis vector of weight `w` sits in degree `-w`); reports print both.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::InputError;
use crate::exactlin::{Scalar, Subspace};

/// A finite-dimensional nilpotent Lie algebra with a positive weight grading.
/// Structure constants are stored for `i < j` only; the other half is derived
/// by antisymmetry, so antisymmetry can never be violated by construction.
#[derive(Clone)]
pub struct GradedLieAlgebra {
    dim: usize,
    weights: Vec<u32>,
    names: Vec<String>,
    brackets: BTreeMap<(usize, usize), Vec<(usize, Scalar)>>,
}

/// Element in the basis coordinates of a [`GradedLieAlgebra`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement(pub Vec<Scalar>);

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    /// First violation, if any, as a human-readable index tuple.
    pub violation: Option<String>,
}

impl Check {
    fn ok() -> Self {
        Check {
            pass: true,
            violation: None,
        }
    }

    fn fail(msg: String) -> Self {
        Check {
            pass: false,
            violation: Some(msg),
        }
    }
}

/// Outcome of [`GradedLieAlgebra::validate`]; failures are data, not errors.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub antisymmetry: Check,
    pub jacobi: Check,
    pub grading: Check,
    pub generation: Check,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry.pass && self.jacobi.pass && self.grading.pass && self.generation.pass
    }

    pub fn first_failure(&self) -> Option<String> {
        for (name, check) in [
            ("antisymmetry", &self.antisymmetry),
            ("jacobi", &self.jacobi),
            ("grading", &self.grading),
            ("generation", &self.generation),
        ] {
            if !check.pass {
                return Some(format!(
                    "{name}: {}",
                    check.violation.as_deref().unwrap_or("failed")
                ));
            }
        }
        None
    }
}

impl GradedLieAlgebra {
    /// Builds an algebra from raw data. Index ranges and the `i < j` rule are
    /// enforced here; the Lie-algebra axioms are checked by [`validate`].
    ///
    /// [`validate`]: GradedLieAlgebra::validate
    pub fn new(
        weights: Vec<u32>,
        names: Vec<String>,
        brackets: Vec<(usize, usize, Vec<(usize, Scalar)>)>,
    ) -> Result<Self, InputError> {
        let dim = weights.len();
        if weights.iter().any(|&w| w == 0) {
            return Err(InputError::Malformed(
                "weights must be positive integers".into(),
            ));
        }
        if names.len() != dim {
            return Err(InputError::Malformed(format!(
                "expected {dim} basis names, got {}",
                names.len()
            )));
        }
        let mut table = BTreeMap::new();
        for (i, j, terms) in brackets {
            if i >= j {
                return Err(InputError::BracketIndexOrder { i, j });
            }
            if j >= dim {
                return Err(InputError::IndexOutOfRange { index: j, dim });
            }
            for &(m, _) in &terms {
                if m >= dim {
                    return Err(InputError::IndexOutOfRange { index: m, dim });
                }
            }
            let filtered: Vec<(usize, Scalar)> =
                terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if !filtered.is_empty() && table.insert((i, j), filtered).is_some() {
                return Err(InputError::Malformed(format!(
                    "duplicate bracket entry for ({i}, {j})"
                )));
            }
        }
        Ok(GradedLieAlgebra {
            dim,
            weights,
            names,
            brackets: table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn depth(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Indices of the weight-1 slice (the generating degree).
    pub fn degree_one_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.weights[i] == 1).collect()
    }

    /// `[e_i, e_j]` as a sparse coefficient list. Works for any index order.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, Scalar)> {
        if i == j {
            return Vec::new();
        }
        if i < j {
            self.brackets.get(&(i, j)).cloned().unwrap_or_default()
        } else {
            self.brackets
                .get(&(j, i))
                .map(|terms| terms.iter().map(|(m, c)| (*m, -c)).collect())
                .unwrap_or_default()
        }
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        assert_eq!(a.0.len(), self.dim, "element length mismatch");
        assert_eq!(b.0.len(), self.dim, "element length mismatch");
        let mut out = vec![Scalar::zero(); self.dim];
        for i in 0..self.dim {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if b.0[j].is_zero() {
                    continue;
                }
                let prod = &a.0[i] * &b.0[j];
                for (m, c) in self.bracket_basis(i, j) {
                    out[m] += &(&prod * &c);
                }
            }
        }
        AlgebraElement(out)
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        let mut v = vec![Scalar::zero(); self.dim];
        v[i] = Scalar::one();
        AlgebraElement(v)
    }

    /// Checks antisymmetry, the Jacobi identity, additivity of the grading
    /// and generation by the weight-1 slice. All four are reported; the first
    /// violating index tuple is attached on failure.
    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            antisymmetry: self.check_antisymmetry(),
            jacobi: self.check_jacobi(),
            grading: self.check_grading(),
            generation: self.check_generation(),
        }
    }

    fn check_antisymmetry(&self) -> Check {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let ij = self.bracket(&self.basis_element(i), &self.basis_element(j));
                let ji = self.bracket(&self.basis_element(j), &self.basis_element(i));
                let ok = ij
                    .0
                    .iter()
                    .zip(ji.0.iter())
                    .all(|(x, y)| (x + y).is_zero());
                if !ok || (i == j && ij.0.iter().any(|c| !c.is_zero())) {
                    return Check::fail(format!("(i={}, j={})", self.names[i], self.names[j]));
                }
            }
        }
        Check::ok()
    }

    fn check_jacobi(&self) -> Check {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for k in (j + 1)..self.dim {
                    let (ei, ej, ek) = (
                        self.basis_element(i),
                        self.basis_element(j),
                        self.basis_element(k),
                    );
                    let mut acc = self.bracket(&ei, &self.bracket(&ej, &ek)).0;
                    for (idx, v) in self.bracket(&ej, &self.bracket(&ek, &ei)).0.iter().enumerate() {
                        acc[idx] += v;
                    }
                    for (idx, v) in self.bracket(&ek, &self.bracket(&ei, &ej)).0.iter().enumerate() {
                        acc[idx] += v;
                    }
                    if acc.iter().any(|c| !c.is_zero()) {
                        return Check::fail(format!(
                            "(i={}, j={}, k={})",
                            self.names[i], self.names[j], self.names[k]
                        ));
                    }
                }
            }
        }
        Check::ok()
    }

    fn check_grading(&self) -> Check {
        for (&(i, j), terms) in &self.brackets {
            for &(m, ref c) in terms {
                if !c.is_zero() && self.weights[m] != self.weights[i] + self.weights[j] {
                    return Check::fail(format!("(i={}, j={})", self.names[i], self.names[j]));
                }
            }
        }
        Check::ok()
    }

    /// Iterated bracket closure starting from the weight-1 slice, compared
    /// dimension-by-dimension against each weight slice.
    fn check_generation(&self) -> Check {
        let depth = self.depth();
        let slice_dim = |w: u32| (0..self.dim).filter(|&i| self.weights[i] == w).count();
        let mut generated: Vec<Subspace> = Vec::with_capacity(depth as usize + 1);
        // generated[w-1] = subspace of R^dim spanned by generated weight-w part
        let deg1: Vec<Vec<Scalar>> = self
            .degree_one_indices()
            .iter()
            .map(|&i| self.basis_element(i).0)
            .collect();
        generated.push(Subspace::from_spanning(self.dim, deg1));
        for w in 2..=depth {
            let mut gens: Vec<Vec<Scalar>> = Vec::new();
            for a in 1..w {
                let b = w - a;
                if a > b {
                    continue;
                }
                let (sa, sb) = (&generated[a as usize - 1], &generated[b as usize - 1]);
                for va in sa.basis() {
                    for vb in sb.basis() {
                        gens.push(
                            self.bracket(
                                &AlgebraElement(va.clone()),
                                &AlgebraElement(vb.clone()),
                            )
                            .0,
                        );
                    }
                }
            }
            generated.push(Subspace::from_spanning(self.dim, gens));
        }
        for w in 1..=depth {
            if generated[w as usize - 1].dim() != slice_dim(w) {
                return Check::fail(format!(
                    "weight {w}: generated dim {} < slice dim {}",
                    generated[w as usize - 1].dim(),
                    slice_dim(w)
                ));
            }
        }
        Check::ok()
    }

    /// Stable identifier of the mathematical content (used as a cache key).
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("dim={};weights={:?};", self.dim, self.weights));
        for (&(i, j), terms) in &self.brackets {
            hasher.update(format!("[{i},{j}]="));
            for (m, c) in terms {
                hasher.update(format!("{m}:{c};"));
            }
        }
        hex_lower(&hasher.finalize())
    }
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl fmt::Debug for GradedLieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GradedLieAlgebra(dim={}, weights={:?}, names={:?})",
            self.dim, self.weights, self.names
        )
    }
}

/// Built-in algebras: `abelian(n)`, `heisenberg(n)`, `engel`.
pub fn builtin(name: &str, n: Option<i64>) -> Result<GradedLieAlgebra, InputError> {
    match name {
        "abelian" => {
            let n = require_positive(n)?;
            let names = if n == 1 {
                vec!["Y".to_string()]
            } else {
                (1..=n).map(|i| format!("Y{i}")).collect()
            };
            GradedLieAlgebra::new(vec![1; n], names, Vec::new())
        }
        "heisenberg" => {
            let n = require_positive(n)?;
            let mut names = Vec::with_capacity(2 * n + 1);
            if n == 1 {
                names.extend(["X".to_string(), "Y".to_string()]);
            } else {
                names.extend((1..=n).map(|i| format!("X{i}")));
                names.extend((1..=n).map(|i| format!("Y{i}")));
            }
            names.push("Z".to_string());
            let mut weights = vec![1; 2 * n];
            weights.push(2);
            let brackets = (0..n)
                .map(|i| (i, n + i, vec![(2 * n, Scalar::one())]))
                .collect();
            GradedLieAlgebra::new(weights, names, brackets)
        }
        "engel" => GradedLieAlgebra::new(
            vec![1, 1, 2, 3],
            (1..=4).map(|i| format!("e{i}")).collect(),
            vec![
                (0, 1, vec![(2, Scalar::one())]),
                (0, 2, vec![(3, Scalar::one())]),
            ],
        ),
        other => Err(InputError::UnknownBuiltin(other.to_string())),
    }
}

fn require_positive(n: Option<i64>) -> Result<usize, InputError> {
    match n {
        Some(v) if v > 0 => Ok(v as usize),
        Some(v) => Err(InputError::NonPositiveParameter(v)),
        None => Err(InputError::NonPositiveParameter(0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn abelian_is_trivial() {
        let g = builtin("abelian", Some(1)).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.depth(), 1);
        assert!(g.validate().passed());

        let g2 = builtin("abelian", Some(2)).unwrap();
        let a = AlgebraElement(vec![Scalar::from_int(2), Scalar::from_int(3)]);
        let b = AlgebraElement(vec![Scalar::from_int(-1), Scalar::from_int(5)]);
        assert!(g2.bracket(&a, &b).0.iter().all(Scalar::is_zero));
    }

    #[test]
    fn heisenberg_bracket_is_z() {
        let g = builtin("heisenberg", Some(1)).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.depth(), 2);
        assert!(g.validate().passed());
        let xy = g.bracket(&g.basis_element(0), &g.basis_element(1));
        assert_eq!(
            xy.0,
            vec![Scalar::zero(), Scalar::zero(), Scalar::one()]
        );
    }

    #[test]
    fn engel_passes_validation() {
        let g = builtin("engel", None).unwrap();
        assert_eq!(g.dim(), 4);
        assert_eq!(g.depth(), 3);
        let report = g.validate();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn grading_violation_is_located() {
        // heisenberg(1) plus the forbidden bracket [X, Z] = Y (weights 1+2 != 1)
        let g = GradedLieAlgebra::new(
            vec![1, 1, 2],
            vec!["X".into(), "Y".into(), "Z".into()],
            vec![
                (0, 1, vec![(2, Scalar::one())]),
                (0, 2, vec![(1, Scalar::one())]),
            ],
        )
        .unwrap();
        let report = g.validate();
        assert!(!report.grading.pass);
        assert_eq!(report.grading.violation.as_deref(), Some("(i=X, j=Z)"));
    }

    #[test]
    fn builtin_rejects_bad_input() {
        assert!(builtin("susy", Some(2)).is_err());
        assert!(builtin("abelian", Some(0)).is_err());
        assert!(builtin("heisenberg", Some(-3)).is_err());
    }

    #[test]
    fn all_builtins_validate_for_small_parameters() {
        for n in 1..=4 {
            assert!(builtin("abelian", Some(n)).unwrap().validate().passed());
            assert!(builtin("heisenberg", Some(n)).unwrap().validate().passed());
        }
        assert!(builtin("engel", None).unwrap().validate().passed());
    }

    #[test]
    fn non_generated_algebra_fails_generation() {
        // A single weight-2 vector cannot be generated from the empty
        // weight-1 slice.
        let g = GradedLieAlgebra::new(vec![2], vec!["Z".into()], vec![]).unwrap();
        assert!(!g.validate().generation.pass);
    }

    fn arb_element(dim: usize) -> impl Strategy<Value = AlgebraElement> {
        proptest::collection::vec(-4i64..5, dim)
            .prop_map(|v| AlgebraElement(v.into_iter().map(Scalar::from_int).collect()))
    }

    proptest! {
        #[test]
        fn bracket_antisymmetric_on_elements(
            a in arb_element(4), b in arb_element(4)
        ) {
            let g = builtin("engel", None).unwrap();
            let ab = g.bracket(&a, &b);
            let ba = g.bracket(&b, &a);
            for (x, y) in ab.0.iter().zip(ba.0.iter()) {
                prop_assert!((x + y).is_zero());
            }
            prop_assert!(g.bracket(&a, &a).0.iter().all(Scalar::is_zero));
        }

        #[test]
        fn jacobi_on_elements(
            a in arb_element(3), b in arb_element(3), c in arb_element(3)
        ) {
            let g = builtin("heisenberg", Some(1)).unwrap();
            let mut acc = g.bracket(&a, &g.bracket(&b, &c)).0;
            for (idx, v) in g.bracket(&b, &g.bracket(&c, &a)).0.iter().enumerate() {
                acc[idx] += v;
            }
            for (idx, v) in g.bracket(&c, &g.bracket(&a, &b)).0.iter().enumerate() {
                acc[idx] += v;
            }
            prop_assert!(acc.iter().all(Scalar::is_zero));
        }
    }

    #[test]
    fn homogeneous_brackets_add_weights() {
        let g = builtin("engel", None).unwrap();
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                for (m, c) in g.bracket_basis(i, j) {
                    if !c.is_zero() {
                        assert_eq!(g.weight(m), g.weight(i) + g.weight(j));
                    }
                }
            }
        }
    }
}
