//! Graded pieces of the universal enveloping algebra: PBW monomial bases per
//! weight, normal-form rewriting of words, and multiplication matrices.
//! Components and matrices are memoized per algebra; the caches behave as if
//! each value were computed exactly once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{ConsistencyError, InputError};
use crate::exactlin::{Matrix, Scalar};
use crate::gla::GradedLieAlgebra;

/// An ordered monomial `e_1^{a_1} ... e_n^{a_n}` in the fixed basis order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PbwMonomial {
    exps: Vec<u32>,
}

impl PbwMonomial {
    pub fn unit(dim: usize) -> Self {
        PbwMonomial {
            exps: vec![0; dim],
        }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn weight(&self, algebra: &GradedLieAlgebra) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .map(|(i, &a)| a * algebra.weight(i))
            .sum()
    }

    /// The monomial as a word of basis indices, lowest index first.
    pub fn word(&self) -> Vec<usize> {
        let mut w = Vec::new();
        for (i, &a) in self.exps.iter().enumerate() {
            w.extend(std::iter::repeat(i).take(a as usize));
        }
        w
    }

    pub fn display(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, &a) in self.exps.iter().enumerate() {
            match a {
                0 => {}
                1 => parts.push(names[i].clone()),
                _ => parts.push(format!("{}^{}", names[i], a)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// The weight-`w` graded piece with its ordered PBW basis. Monomials are
/// listed in lexicographically descending exponent order, so for the
/// Heisenberg algebra at weight 2 the basis reads X^2, X Y, Y^2, Z.
#[derive(Clone, Debug)]
pub struct UeaComponent {
    weight: u32,
    monomials: Vec<PbwMonomial>,
    index: HashMap<Vec<u32>, usize>,
}

impl UeaComponent {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> &[PbwMonomial] {
        &self.monomials
    }

    pub fn monomial(&self, i: usize) -> &PbwMonomial {
        &self.monomials[i]
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

/// Element of one graded piece, as coordinates over its PBW basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UeaElement {
    pub weight: u32,
    pub coeffs: Vec<Scalar>,
}

/// Which adjacent inversion the rewriting engine resolves first. The normal
/// form is independent of the choice; tests drive both to check confluence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    FirstInversion,
    LastInversion,
}

/// The graded enveloping algebra of a fixed graded Lie algebra, with
/// memoized components, normal forms and multiplication matrices.
pub struct Uea {
    algebra: GradedLieAlgebra,
    components: Mutex<HashMap<u32, Arc<UeaComponent>>>,
    mul_mats: Mutex<HashMap<(u32, u32), Arc<Matrix>>>,
    normal_forms: Mutex<HashMap<Vec<usize>, Arc<UeaElement>>>,
}

impl Uea {
    pub fn new(algebra: GradedLieAlgebra) -> Self {
        Uea {
            algebra,
            components: Mutex::new(HashMap::new()),
            mul_mats: Mutex::new(HashMap::new()),
            normal_forms: Mutex::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        &self.algebra
    }

    /// All exponent vectors of weight `w`, lexicographically descending.
    pub fn component(&self, w: u32) -> Arc<UeaComponent> {
        if let Some(c) = self.components.lock().unwrap().get(&w) {
            return c.clone();
        }
        let mut monomials = Vec::new();
        let dim = self.algebra.dim();
        let mut exps = vec![0u32; dim];
        enumerate_exponents(&self.algebra, 0, w, &mut exps, &mut monomials);
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.exps.clone(), i))
            .collect();
        let comp = Arc::new(UeaComponent {
            weight: w,
            monomials,
            index,
        });
        self.components
            .lock()
            .unwrap()
            .entry(w)
            .or_insert(comp)
            .clone()
    }

    pub fn word_weight(&self, word: &[usize]) -> Result<u32, InputError> {
        let dim = self.algebra.dim();
        word.iter().try_fold(0u32, |acc, &i| {
            if i >= dim {
                Err(InputError::IndexOutOfRange { index: i, dim })
            } else {
                Ok(acc + self.algebra.weight(i))
            }
        })
    }

    /// Rewrites a word in the generators into the PBW basis of its weight by
    /// repeatedly replacing an out-of-order adjacent pair `e_j e_i` (j > i)
    /// with `e_i e_j + [e_j, e_i]`. The grading makes every intermediate term
    /// homogeneous of the same weight.
    pub fn normal_form(&self, word: &[usize]) -> Result<UeaElement, InputError> {
        if let Some(nf) = self.normal_forms.lock().unwrap().get(word) {
            return Ok((**nf).clone());
        }
        let nf = self.normal_form_with_strategy(word, RewriteStrategy::FirstInversion)?;
        self.normal_forms
            .lock()
            .unwrap()
            .insert(word.to_vec(), Arc::new(nf.clone()));
        Ok(nf)
    }

    pub fn normal_form_with_strategy(
        &self,
        word: &[usize],
        strategy: RewriteStrategy,
    ) -> Result<UeaElement, InputError> {
        let weight = self.word_weight(word)?;
        let comp = self.component(weight);
        let mut coeffs = vec![Scalar::zero(); comp.dim()];
        let mut work: Vec<(Vec<usize>, Scalar)> = vec![(word.to_vec(), Scalar::one())];
        while let Some((w, c)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            let inversion = match strategy {
                RewriteStrategy::FirstInversion => {
                    (0..w.len().saturating_sub(1)).find(|&k| w[k] > w[k + 1])
                }
                RewriteStrategy::LastInversion => {
                    (0..w.len().saturating_sub(1)).rev().find(|&k| w[k] > w[k + 1])
                }
            };
            match inversion {
                None => {
                    let mut exps = vec![0u32; self.algebra.dim()];
                    for &i in &w {
                        exps[i] += 1;
                    }
                    let idx = comp
                        .index_of(&exps)
                        .expect("sorted word must be a basis monomial of its weight");
                    coeffs[idx] += &c;
                }
                Some(k) => {
                    let mut swapped = w.clone();
                    swapped.swap(k, k + 1);
                    // [e_{w_k}, e_{w_{k+1}}] with w_k > w_{k+1}
                    for (m, sc) in self.algebra.bracket_basis(w[k], w[k + 1]) {
                        let mut contracted = Vec::with_capacity(w.len() - 1);
                        contracted.extend_from_slice(&w[..k]);
                        contracted.push(m);
                        contracted.extend_from_slice(&w[k + 2..]);
                        work.push((contracted, &c * &sc));
                    }
                    work.push((swapped, c));
                }
            }
        }
        Ok(UeaElement { weight, coeffs })
    }

    /// Matrix of `U_{-a} x U_{-b} -> U_{-a-b}`; column `(m_a, m_b)` holds the
    /// normal form of the concatenated words. Surjectivity onto the target
    /// component is asserted, which is the enveloping-level form of the
    /// generation assumption.
    pub fn multiplication_matrix(&self, a: u32, b: u32) -> Result<Arc<Matrix>, ConsistencyError> {
        if let Some(m) = self.mul_mats.lock().unwrap().get(&(a, b)) {
            return Ok(m.clone());
        }
        let ca = self.component(a);
        let cb = self.component(b);
        let target = self.component(a + b);
        let mut m = Matrix::zero(target.dim(), ca.dim() * cb.dim());
        for (ia, ma) in ca.monomials().iter().enumerate() {
            let wa = ma.word();
            for (ib, mb) in cb.monomials().iter().enumerate() {
                let mut word = wa.clone();
                word.extend_from_slice(&mb.word());
                let nf = self
                    .normal_form(&word)
                    .expect("monomial words are always in range");
                let col = ia * cb.dim() + ib;
                for (row, c) in nf.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        m.set(row, col, c.clone());
                    }
                }
            }
        }
        if m.rank() != target.dim() {
            return Err(ConsistencyError::new(
                "pbw_multiplication_surjectivity",
                format!(
                    "multiplication U_-{a} x U_-{b} -> U_-{} is not surjective; \
                     is the algebra generated in weight one?",
                    a + b
                ),
            ));
        }
        let m = Arc::new(m);
        self.mul_mats
            .lock()
            .unwrap()
            .entry((a, b))
            .or_insert(m.clone());
        Ok(m)
    }

    /// Snapshot of the memoized multiplication matrices (for persistence).
    pub fn export_mul_mats(&self) -> Vec<((u32, u32), Matrix)> {
        let mut entries: Vec<((u32, u32), Matrix)> = self
            .mul_mats
            .lock()
            .unwrap()
            .iter()
            .map(|(k, v)| (*k, (**v).clone()))
            .collect();
        entries.sort_by_key(|(k, _)| *k);
        entries
    }

    /// Seeds the memo table, e.g. from a persisted cache. Entries with
    /// implausible shapes are ignored rather than trusted.
    pub fn import_mul_mats(&self, entries: Vec<((u32, u32), Matrix)>) {
        let mut cache = self.mul_mats.lock().unwrap();
        for ((a, b), m) in entries {
            let expected_rows = self.component(a + b).dim();
            let expected_cols = self.component(a).dim() * self.component(b).dim();
            if m.rows() == expected_rows && m.cols() == expected_cols {
                cache.entry((a, b)).or_insert_with(|| Arc::new(m));
            }
        }
    }
}

fn enumerate_exponents(
    algebra: &GradedLieAlgebra,
    i: usize,
    remaining: u32,
    exps: &mut Vec<u32>,
    out: &mut Vec<PbwMonomial>,
) {
    if i == algebra.dim() {
        if remaining == 0 {
            out.push(PbwMonomial { exps: exps.clone() });
        }
        return;
    }
    let w = algebra.weight(i);
    let max = remaining / w;
    for a in (0..=max).rev() {
        exps[i] = a;
        enumerate_exponents(algebra, i + 1, remaining - a * w, exps, out);
    }
    exps[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gla::builtin;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn heis() -> Uea {
        Uea::new(builtin("heisenberg", Some(1)).unwrap())
    }

    #[test]
    fn heisenberg_weight_two_basis() {
        let uea = heis();
        let comp = uea.component(2);
        assert_eq!(comp.dim(), 4);
        let names: Vec<String> = uea.algebra().names().to_vec();
        let printed: Vec<String> = comp.monomials().iter().map(|m| m.display(&names)).collect();
        assert_eq!(printed, vec!["X^2", "X Y", "Y^2", "Z"]);
    }

    #[test]
    fn weight_zero_is_the_unit() {
        let uea = heis();
        assert_eq!(uea.component(0).dim(), 1);
        assert_eq!(Uea::new(builtin("engel", None).unwrap()).component(0).dim(), 1);
    }

    #[test]
    fn heisenberg_weight_four_dim() {
        // brute-force: count (a, b, c) with a + b + 2c = 4
        let mut count = 0;
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                for c in 0..=2u32 {
                    if a + b + 2 * c == 4 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 9);
        assert_eq!(heis().component(4).dim(), count);
    }

    #[test]
    fn dims_match_generating_function() {
        // coefficient of t^w in prod_i (1 - t^{w_i})^{-1}, by series product
        for g in [
            builtin("abelian", Some(2)).unwrap(),
            builtin("heisenberg", Some(1)).unwrap(),
            builtin("heisenberg", Some(2)).unwrap(),
            builtin("engel", None).unwrap(),
        ] {
            let cap = 8usize;
            let mut series = vec![0u64; cap + 1];
            series[0] = 1;
            for i in 0..g.dim() {
                let w = g.weight(i) as usize;
                // multiply by 1/(1 - t^w): prefix sums with stride w
                for k in w..=cap {
                    series[k] += series[k - w];
                }
            }
            let uea = Uea::new(g);
            for w in 0..=cap {
                assert_eq!(uea.component(w as u32).dim() as u64, series[w], "w={w}");
            }
        }
    }

    #[test]
    fn normal_form_defining_relation() {
        // YX = XY - Z
        let uea = heis();
        let nf = uea.normal_form(&[1, 0]).unwrap();
        assert_eq!(nf.weight, 2);
        let expect = vec![
            Scalar::zero(),
            Scalar::one(),
            Scalar::zero(),
            Scalar::from_int(-1),
        ];
        assert_eq!(nf.coeffs, expect);
    }

    #[test]
    fn normal_form_abelian_sorts() {
        let uea = Uea::new(builtin("abelian", Some(3)).unwrap());
        let nf = uea.normal_form(&[2, 0, 1, 0]).unwrap();
        let comp = uea.component(4);
        let idx = comp.index_of(&[2, 1, 1]).unwrap();
        for (k, c) in nf.coeffs.iter().enumerate() {
            assert_eq!(!c.is_zero(), k == idx);
        }
    }

    #[test]
    fn normal_form_length_three() {
        // Y X X = X^2 Y - 2 X Z
        let uea = heis();
        let nf = uea.normal_form(&[1, 0, 0]).unwrap();
        let comp = uea.component(3);
        let i_xxy = comp.index_of(&[2, 1, 0]).unwrap();
        let i_xz = comp.index_of(&[1, 0, 1]).unwrap();
        for (k, c) in nf.coeffs.iter().enumerate() {
            if k == i_xxy {
                assert_eq!(c, &Scalar::one());
            } else if k == i_xz {
                assert_eq!(c, &Scalar::from_int(-2));
            } else {
                assert!(c.is_zero(), "unexpected coefficient at {k}");
            }
        }
    }

    #[test]
    fn normal_form_rejects_out_of_range() {
        assert!(heis().normal_form(&[0, 7]).is_err());
    }

    #[test]
    fn multiplication_by_unit_is_identity() {
        let uea = heis();
        for w in 0..=3 {
            let left = uea.multiplication_matrix(0, w).unwrap();
            let right = uea.multiplication_matrix(w, 0).unwrap();
            let id = Matrix::identity(uea.component(w).dim());
            assert_eq!(&*left, &id);
            assert_eq!(&*right, &id);
        }
    }

    #[test]
    fn multiplication_column_yx() {
        let uea = heis();
        let m = uea.multiplication_matrix(1, 1).unwrap();
        // column (Y, X): B_1 = [X, Y], so ia = 1, ib = 0 -> col 2
        let col = m.col_vec(2);
        assert_eq!(
            col,
            vec![
                Scalar::zero(),
                Scalar::one(),
                Scalar::zero(),
                Scalar::from_int(-1)
            ]
        );
    }

    #[test]
    fn abelian_multiplication_is_symmetric_algebra() {
        let uea = Uea::new(builtin("abelian", Some(2)).unwrap());
        let m = uea.multiplication_matrix(1, 1).unwrap();
        // B_1 = [e1, e2], B_2 = [e1^2, e1 e2, e2^2]
        let expect = Matrix::from_rows(vec![
            vec![
                Scalar::one(),
                Scalar::zero(),
                Scalar::zero(),
                Scalar::zero(),
            ],
            vec![
                Scalar::zero(),
                Scalar::one(),
                Scalar::one(),
                Scalar::zero(),
            ],
            vec![
                Scalar::zero(),
                Scalar::zero(),
                Scalar::zero(),
                Scalar::one(),
            ],
        ]);
        assert_eq!(&*m, &expect);
    }

    #[test]
    fn multiplication_onto_next_weight_is_surjective() {
        for g in [
            builtin("heisenberg", Some(1)).unwrap(),
            builtin("heisenberg", Some(2)).unwrap(),
            builtin("engel", None).unwrap(),
        ] {
            let uea = Uea::new(g);
            for w in 0..=5 {
                assert!(uea.multiplication_matrix(1, w).is_ok());
                assert!(uea.multiplication_matrix(w, 1).is_ok());
            }
        }
    }

    #[test]
    fn multiplication_is_associative_on_builtins() {
        for g in [
            builtin("abelian", Some(2)).unwrap(),
            builtin("heisenberg", Some(1)).unwrap(),
            builtin("engel", None).unwrap(),
        ] {
            let uea = Uea::new(g);
            for a in 0..=6u32 {
                for b in 0..=(6 - a) {
                    for c in 0..=(6 - a - b) {
                        assert_associative(&uea, a, b, c);
                    }
                }
            }
        }
    }

    fn assert_associative(uea: &Uea, a: u32, b: u32, c: u32) {
        let (da, db, dc) = (
            uea.component(a).dim(),
            uea.component(b).dim(),
            uea.component(c).dim(),
        );
        let m_ab = uea.multiplication_matrix(a, b).unwrap();
        let m_ab_c = uea.multiplication_matrix(a + b, c).unwrap();
        let m_bc = uea.multiplication_matrix(b, c).unwrap();
        let m_a_bc = uea.multiplication_matrix(a, b + c).unwrap();
        let target_dim = uea.component(a + b + c).dim();
        for ia in 0..da {
            for ib in 0..db {
                for ic in 0..dc {
                    let mut left = vec![Scalar::zero(); target_dim];
                    for (k, coeff) in m_ab.col_vec(ia * db + ib).iter().enumerate() {
                        if coeff.is_zero() {
                            continue;
                        }
                        for (row, v) in m_ab_c.col_vec(k * dc + ic).iter().enumerate() {
                            left[row] += &(coeff * v);
                        }
                    }
                    let d_bc = uea.component(b + c).dim();
                    let mut right = vec![Scalar::zero(); target_dim];
                    for (k, coeff) in m_bc.col_vec(ib * dc + ic).iter().enumerate() {
                        if coeff.is_zero() {
                            continue;
                        }
                        for (row, v) in m_a_bc.col_vec(ia * d_bc + k).iter().enumerate() {
                            right[row] += &(coeff * v);
                        }
                    }
                    assert_eq!(left, right, "associativity failed at ({a},{b},{c})");
                }
            }
        }
    }

    #[test]
    fn normal_form_is_confluent_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for g in [
            builtin("heisenberg", Some(1)).unwrap(),
            builtin("engel", None).unwrap(),
        ] {
            let dim = g.dim();
            let uea = Uea::new(g);
            for _ in 0..60 {
                let len = rng.gen_range(0..=6);
                let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..dim)).collect();
                let first = uea
                    .normal_form_with_strategy(&word, RewriteStrategy::FirstInversion)
                    .unwrap();
                let last = uea
                    .normal_form_with_strategy(&word, RewriteStrategy::LastInversion)
                    .unwrap();
                assert_eq!(first, last, "word {word:?}");
            }
        }
    }
}
