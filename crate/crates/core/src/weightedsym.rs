//! Operators between trivial bundles over the flat model, their weighted
//! principal symbols, prolonged symbol maps, the symbol spaces `g^{r+l}`,
//! and weighted finite-type detection.
//!
//! Conventions, fixed once and shared with `jetmodel` and `oracle`: jets are
//! functionals on the graded enveloping algebra, a word acts through
//! right-invariant fields with its leftmost letter differentiating first,
//! and consequently every pairing row multiplies the operator word on the
//! left of the jet monomial.

use std::sync::Arc;

use crate::error::{ConsistencyError, Error, InputError};
use crate::exactlin::{Matrix, Subspace};
use crate::gla::GradedLieAlgebra;
use crate::pbw::Uea;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BundleSpec {
    pub rank_e: usize,
    pub rank_f: usize,
}

/// One summand of an operator: `coeff * word`, with `coeff` a
/// `rank_f x rank_e` matrix and `word` a sequence of basis indices.
#[derive(Clone, Debug)]
pub struct OperatorTerm {
    pub word: Vec<usize>,
    pub coeff: Matrix,
    pub weight: u32,
}

/// A constant-coefficient operator of weighted order `r`, as a sum of
/// matrix-weighted words in the Lie algebra basis.
pub struct OperatorSpec {
    uea: Arc<Uea>,
    bundle: BundleSpec,
    terms: Vec<OperatorTerm>,
    order: u32,
}

impl OperatorSpec {
    /// Validates ranks, words and coefficient shapes. An operator whose
    /// top-weight terms all have zero coefficients is rejected rather than
    /// silently reducing the weighted order.
    pub fn new(
        uea: Arc<Uea>,
        bundle: BundleSpec,
        terms: Vec<(Vec<usize>, Matrix)>,
    ) -> Result<Self, InputError> {
        if bundle.rank_e < 1 || bundle.rank_f < 1 {
            return Err(InputError::BadBundleRank);
        }
        let mut parsed = Vec::with_capacity(terms.len());
        for (idx, (word, coeff)) in terms.into_iter().enumerate() {
            if coeff.rows() != bundle.rank_f || coeff.cols() != bundle.rank_e {
                return Err(InputError::BadCoefficientShape {
                    term: idx,
                    rank_f: bundle.rank_f,
                    rank_e: bundle.rank_e,
                });
            }
            let weight = uea.word_weight(&word)?;
            parsed.push(OperatorTerm {
                word,
                coeff,
                weight,
            });
        }
        let declared = parsed.iter().map(|t| t.weight).max().unwrap_or(0);
        let effective = parsed
            .iter()
            .filter(|t| !t.coeff.is_zero())
            .map(|t| t.weight)
            .max()
            .unwrap_or(0);
        if effective == 0 {
            return Err(InputError::ZeroOperator);
        }
        if declared > effective {
            return Err(InputError::ZeroTopCoefficient { weight: declared });
        }
        Ok(OperatorSpec {
            uea,
            bundle,
            terms: parsed,
            order: effective,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bundle(&self) -> BundleSpec {
        self.bundle
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn uea(&self) -> &Arc<Uea> {
        &self.uea
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        self.uea.algebra()
    }
}

/// The weighted principal symbol: the matrix of `U_{-r}^* (x) E -> F`
/// together with its kernel `K`.
#[derive(Clone, Debug)]
pub struct SymbolData {
    pub order: u32,
    pub matrix: Matrix,
    pub kernel: Subspace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteTypeVerdict {
    /// `g^{r+l}` vanishes from `l = ell0 + 1` on.
    Finite { ell0: u32 },
    /// No vanishing up to the cap; the dimension sequence is attached.
    Undetermined { cap: u32 },
}

/// The tower `l -> g^{r+l}` with its verdict.
#[derive(Clone, Debug)]
pub struct SymbolSpaceTower {
    pub order: u32,
    pub dims: Vec<usize>,
    pub spaces: Vec<Subspace>,
    pub verdict: FiniteTypeVerdict,
}

impl SymbolSpaceTower {
    /// `g^{r+l}` if it was computed (`l >= 1`).
    pub fn space(&self, ell: u32) -> Option<&Subspace> {
        if ell == 0 {
            return None;
        }
        self.spaces.get(ell as usize - 1)
    }
}

/// Assembles the symbol from the weight-`r` terms only: each term
/// contributes its coefficient times the normal-form expansion of its word
/// in the PBW basis of `U_{-r}`. Lower-weight terms are discarded.
pub fn principal_symbol(op: &OperatorSpec) -> Result<SymbolData, Error> {
    let r = op.order();
    let uea = op.uea();
    let comp = uea.component(r);
    let BundleSpec { rank_e, rank_f } = op.bundle();
    let mut s = Matrix::zero(rank_f, comp.dim() * rank_e);
    for term in op.terms() {
        if term.weight != r || term.coeff.is_zero() {
            continue;
        }
        let nf = uea.normal_form(&term.word)?;
        for (im, c) in nf.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for beta in 0..rank_f {
                for a in 0..rank_e {
                    let add = term.coeff.get(beta, a) * c;
                    if add.is_zero() {
                        continue;
                    }
                    let col = im * rank_e + a;
                    let cur = s.get(beta, col) + &add;
                    s.set(beta, col, cur);
                }
            }
        }
    }
    let kernel = s.kernel_basis();
    Ok(SymbolData {
        order: r,
        matrix: s,
        kernel,
    })
}

/// The classical (trivial-filtration) symbol of the same term list: every
/// basis direction counts with order one, so only the words of maximal
/// length survive. The kernel lives in `Sym^s(R^n)^* (x) E`.
pub fn classical_symbol(op: &OperatorSpec) -> Result<SymbolData, Error> {
    let algebra = op.algebra();
    let abelian = GradedLieAlgebra::new(
        vec![1; algebra.dim()],
        algebra.names().to_vec(),
        Vec::new(),
    )?;
    let flat = Arc::new(Uea::new(abelian));
    let terms: Vec<(Vec<usize>, Matrix)> = op
        .terms()
        .iter()
        .filter(|t| !t.coeff.is_zero())
        .map(|t| (t.word.clone(), t.coeff.clone()))
        .collect();
    let classical_op = OperatorSpec::new(flat, op.bundle(), terms)?;
    principal_symbol(&classical_op)
}

/// Matrix of the `l`-th symbol mapping
/// `U_{-r-l}^* (x) E -> U_{-l}^* (x) F`, built by composing the
/// multiplication matrix `U_{-r} (x) U_{-l} -> U_{-r-l}` with the principal
/// symbol. Rows are indexed by (U_{-l} monomial, F basis), columns by
/// (U_{-r-l} monomial, E basis).
pub fn prolonged_symbol_matrix(op: &OperatorSpec, ell: u32) -> Result<Matrix, Error> {
    if ell == 0 {
        return Err(InputError::Malformed(
            "prolonged symbol needs l >= 1; use principal_symbol for l = 0".into(),
        )
        .into());
    }
    let symbol = principal_symbol(op)?;
    prolonged_from_symbol(op, &symbol, ell)
}

fn prolonged_from_symbol(
    op: &OperatorSpec,
    symbol: &SymbolData,
    ell: u32,
) -> Result<Matrix, Error> {
    let r = op.order();
    let uea = op.uea();
    let BundleSpec { rank_e, rank_f } = op.bundle();
    let (dr, dl, drl) = (
        uea.component(r).dim(),
        uea.component(ell).dim(),
        uea.component(r + ell).dim(),
    );
    let mul = uea.multiplication_matrix(r, ell)?;
    let mut out = Matrix::zero(dl * rank_f, drl * rank_e);
    for im in 0..dr {
        for iu in 0..dl {
            let mcol = im * dl + iu;
            for iv in 0..drl {
                let mv = mul.get(iv, mcol);
                if mv.is_zero() {
                    continue;
                }
                for beta in 0..rank_f {
                    for a in 0..rank_e {
                        let sv = symbol.matrix.get(beta, im * rank_e + a);
                        if sv.is_zero() {
                            continue;
                        }
                        let row = iu * rank_f + beta;
                        let col = iv * rank_e + a;
                        let cur = out.get(row, col) + &(sv * mv);
                        out.set(row, col, cur);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `g^{r+l}`, computed along two independent routes and cross-checked: as
/// the kernel of the prolonged symbol matrix, and as the intersection
/// `U_{-r-l}^* (x) E  meet  U_{-l}^* (x) K` inside
/// `U_{-l}^* (x) U_{-r}^* (x) E`, where the first factor embeds through the
/// dual of multiplication. A mismatch is an internal-consistency failure,
/// never swallowed.
pub fn symbol_space(op: &OperatorSpec, ell: u32) -> Result<Subspace, Error> {
    if ell == 0 {
        return Err(InputError::Malformed("symbol space needs l >= 1".into()).into());
    }
    let symbol = principal_symbol(op)?;
    let kernel_route = prolonged_from_symbol(op, &symbol, ell)?.kernel_basis();
    let intersection_route = symbol_space_by_intersection(op, &symbol, ell)?;
    if kernel_route != intersection_route {
        return Err(ConsistencyError::new(
            format!("symbol_space_two_route[l={ell}]"),
            format!(
                "kernel route dim {} differs from intersection route dim {}",
                kernel_route.dim(),
                intersection_route.dim()
            ),
        )
        .into());
    }
    Ok(kernel_route)
}

fn symbol_space_by_intersection(
    op: &OperatorSpec,
    symbol: &SymbolData,
    ell: u32,
) -> Result<Subspace, Error> {
    let r = op.order();
    let uea = op.uea();
    let rank_e = op.bundle().rank_e;
    let (dr, dl, drl) = (
        uea.component(r).dim(),
        uea.component(ell).dim(),
        uea.component(r + ell).dim(),
    );
    let mul = uea.multiplication_matrix(r, ell)?;
    let ambient = dl * dr * rank_e;
    // Embedding f |-> ((u, m, a) |-> f(m*u, a)) of the top component into
    // U_{-l}^* (x) U_{-r}^* (x) E.
    let mut emb = Matrix::zero(ambient, drl * rank_e);
    for im in 0..dr {
        for iu in 0..dl {
            for iv in 0..drl {
                let mv = mul.get(iv, im * dl + iu);
                if mv.is_zero() {
                    continue;
                }
                for a in 0..rank_e {
                    emb.set((iu * dr + im) * rank_e + a, iv * rank_e + a, mv.clone());
                }
            }
        }
    }
    let image = emb.column_space();
    // U_{-l}^* (x) K: one block copy of K per U_{-l} monomial.
    let mut k_gens = Vec::with_capacity(dl * symbol.kernel.dim());
    for iu in 0..dl {
        for kappa in symbol.kernel.basis() {
            let mut v = vec![crate::exactlin::Scalar::zero(); ambient];
            for im in 0..dr {
                for a in 0..rank_e {
                    v[(iu * dr + im) * rank_e + a] = kappa[im * rank_e + a].clone();
                }
            }
            k_gens.push(v);
        }
    }
    let k_block = Subspace::from_spanning(ambient, k_gens);
    let meet = image.intersect(&k_block).map_err(Error::Input)?;
    // Pull the intersection back through the (injective) embedding.
    if meet.is_zero() {
        return Ok(Subspace::zero(drl * rank_e));
    }
    let targets = meet.basis_matrix().transpose();
    let preimages = emb.solve_columns(&targets).ok_or_else(|| {
        ConsistencyError::new(
            format!("symbol_space_pullback[l={ell}]"),
            "intersection escaped the embedded image".to_string(),
        )
    })?;
    Ok(Subspace::from_spanning(
        drl * rank_e,
        (0..preimages.cols())
            .map(|c| preimages.col_vec(c))
            .collect(),
    ))
}

/// `g^{r+l}` with the `l = 0` case degenerating to the principal-symbol
/// kernel `K`.
pub fn g_at(op: &OperatorSpec, ell: u32) -> Result<Subspace, Error> {
    if ell == 0 {
        Ok(principal_symbol(op)?.kernel)
    } else {
        symbol_space(op, ell)
    }
}

/// Computes `dim g^{r+l}` for `l = 1..cap`, stopping early at the first
/// zero. The verdict is `ell0 = first vanishing l - 1`, or undetermined if
/// nothing vanishes within the cap.
pub fn finite_type(op: &OperatorSpec, cap: u32) -> Result<SymbolSpaceTower, Error> {
    assert!(cap >= 1, "finite_type needs cap >= 1");
    let mut dims = Vec::new();
    let mut spaces = Vec::new();
    let mut verdict = FiniteTypeVerdict::Undetermined { cap };
    for ell in 1..=cap {
        let g = symbol_space(op, ell)?;
        dims.push(g.dim());
        let vanished = g.is_zero();
        spaces.push(g);
        if vanished {
            verdict = FiniteTypeVerdict::Finite { ell0: ell - 1 };
            break;
        }
    }
    Ok(SymbolSpaceTower {
        order: op.order(),
        dims,
        spaces,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::Scalar;
    use crate::gla::builtin;

    fn uea_of(name: &str, n: Option<i64>) -> Arc<Uea> {
        Arc::new(Uea::new(builtin(name, n).unwrap()))
    }

    fn scalar_coeff(v: i64) -> Matrix {
        Matrix::from_rows(vec![vec![Scalar::from_int(v)]])
    }

    /// D = X on heisenberg(1), scalar bundle.
    fn op_x() -> OperatorSpec {
        OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0], scalar_coeff(1))],
        )
        .unwrap()
    }

    /// D = (X, Y) on heisenberg(1): gradient along the distribution.
    fn op_gradient() -> OperatorSpec {
        OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 2,
            },
            vec![
                (
                    vec![0],
                    Matrix::from_rows(vec![vec![Scalar::one()], vec![Scalar::zero()]]),
                ),
                (
                    vec![1],
                    Matrix::from_rows(vec![vec![Scalar::zero()], vec![Scalar::one()]]),
                ),
            ],
        )
        .unwrap()
    }

    /// D = d^2 on abelian(1): the classical ODE f'' = 0.
    fn op_dsquared() -> OperatorSpec {
        OperatorSpec::new(
            uea_of("abelian", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0, 0], scalar_coeff(1))],
        )
        .unwrap()
    }

    /// D = -X^2 - Y^2 + i a Z with a = 1, Gaussian scalars.
    fn op_sublaplacian() -> OperatorSpec {
        OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![
                (vec![0, 0], scalar_coeff(-1)),
                (vec![1, 1], scalar_coeff(-1)),
                (vec![2], Matrix::from_rows(vec![vec![Scalar::i()]])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn order_and_top_term_rules() {
        assert_eq!(op_x().order(), 1);
        assert_eq!(op_dsquared().order(), 2);
        assert_eq!(op_sublaplacian().order(), 2);

        // all-zero coefficients are rejected
        let err = OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0], scalar_coeff(0))],
        );
        assert!(matches!(err, Err(InputError::ZeroOperator)));

        // a zero top-weight coefficient does not silently reduce the order
        let err = OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0], scalar_coeff(1)), (vec![2], scalar_coeff(0))],
        );
        assert!(matches!(
            err,
            Err(InputError::ZeroTopCoefficient { weight: 2 })
        ));
    }

    #[test]
    fn principal_symbol_of_x() {
        let sym = principal_symbol(&op_x()).unwrap();
        assert_eq!(sym.order, 1);
        assert_eq!(
            sym.matrix,
            Matrix::from_rows(vec![vec![Scalar::one(), Scalar::zero()]])
        );
        // kernel is the Y^* line
        assert_eq!(sym.kernel.dim(), 1);
        assert!(sym.kernel.contains_vec(&[Scalar::zero(), Scalar::one()]));
    }

    #[test]
    fn principal_symbol_of_gradient_is_invertible() {
        let sym = principal_symbol(&op_gradient()).unwrap();
        assert_eq!(sym.matrix, Matrix::identity(2));
        assert!(sym.kernel.is_zero());
    }

    #[test]
    fn weighted_symbol_keeps_the_z_term() {
        let sym = principal_symbol(&op_sublaplacian()).unwrap();
        assert_eq!(sym.order, 2);
        // columns over the basis X^2, X Y, Y^2, Z
        let row: Vec<Scalar> = (0..4).map(|c| sym.matrix.get(0, c).clone()).collect();
        assert_eq!(
            row,
            vec![
                Scalar::from_int(-1),
                Scalar::zero(),
                Scalar::from_int(-1),
                Scalar::i()
            ]
        );
        assert!(!sym.matrix.get(0, 3).is_zero(), "Z-column must be nonzero");
    }

    #[test]
    fn classical_symbol_has_strictly_larger_kernel() {
        let op = op_sublaplacian();
        let weighted = principal_symbol(&op).unwrap();
        let classical = classical_symbol(&op).unwrap();
        // Sym^2 of a 3-dim space is 6-dimensional; the Z term is invisible.
        assert_eq!(classical.matrix.cols(), 6);
        assert!(classical.kernel.dim() > weighted.kernel.dim());
    }

    #[test]
    fn prolonged_symbol_classical_ode() {
        let m = prolonged_symbol_matrix(&op_dsquared(), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!(!m.get(0, 0).is_zero());
    }

    #[test]
    fn prolonged_symbol_of_x_at_level_one() {
        let m = prolonged_symbol_matrix(&op_x(), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert_eq!(m.kernel_basis().dim(), 2);
    }

    #[test]
    fn cancelling_terms_give_zero_prolonged_symbol() {
        let op = OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0], scalar_coeff(1)), (vec![0], scalar_coeff(-1))],
        )
        .unwrap();
        assert!(prolonged_symbol_matrix(&op, 1).unwrap().is_zero());
    }

    #[test]
    fn symbol_space_examples() {
        assert!(symbol_space(&op_gradient(), 1).unwrap().is_zero());
        assert_eq!(symbol_space(&op_x(), 1).unwrap().dim(), 2);
        // weight-4 monomials in the invariants y (weight 1), z - xy/2
        // (weight 2): y^4, y^2 t, t^2
        assert_eq!(symbol_space(&op_x(), 3).unwrap().dim(), 3);
    }

    #[test]
    fn finite_type_verdicts() {
        let tower = finite_type(&op_gradient(), 5).unwrap();
        assert_eq!(tower.verdict, FiniteTypeVerdict::Finite { ell0: 0 });
        assert_eq!(tower.dims, vec![0]);

        let tower = finite_type(&op_dsquared(), 5).unwrap();
        assert_eq!(tower.verdict, FiniteTypeVerdict::Finite { ell0: 0 });

        let tower = finite_type(&op_x(), 10).unwrap();
        assert_eq!(tower.verdict, FiniteTypeVerdict::Undetermined { cap: 10 });
        assert_eq!(tower.dims, vec![2, 2, 3, 3, 4, 4, 5, 5, 6, 6]);
    }

    #[test]
    fn rank_bound_on_symbol_spaces() {
        for op in [op_x(), op_dsquared()] {
            let uea = op.uea().clone();
            let r = op.order();
            let BundleSpec { rank_e, rank_f } = op.bundle();
            for ell in 1..=4 {
                let g = symbol_space(&op, ell).unwrap().dim() as i64;
                let bound = uea.component(r + ell).dim() as i64 * rank_e as i64
                    - uea.component(ell).dim() as i64 * rank_f as i64;
                assert!(g >= bound, "l={ell}: dim g = {g} < bound {bound}");
            }
        }
    }

    /// Independent classical Spencer prolongation for trivially filtered
    /// algebras: pure exponent arithmetic, no rewriting machinery.
    mod classical_spencer {
        use super::*;

        fn exps_sum(a: &[u32], b: &[u32]) -> Vec<u32> {
            a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
        }

        pub fn prolong(op: &OperatorSpec, ell: u32) -> Subspace {
            let uea = op.uea();
            let r = op.order();
            let rank_e = op.bundle().rank_e;
            let sym = principal_symbol(op).unwrap();
            let mon_l = uea.component(ell);
            let mon_r = uea.component(r);
            let mon_rl = uea.component(r + ell);
            let rows = mon_l.dim() * sym.matrix.rows();
            let cols = mon_rl.dim() * rank_e;
            let mut m = Matrix::zero(rows, cols);
            for (iw, w) in mon_l.monomials().iter().enumerate() {
                for beta in 0..sym.matrix.rows() {
                    for (iv, v) in mon_r.monomials().iter().enumerate() {
                        for a in 0..rank_e {
                            let s = sym.matrix.get(beta, iv * rank_e + a);
                            if s.is_zero() {
                                continue;
                            }
                            let u = exps_sum(w.exps(), v.exps());
                            let iu = mon_rl.index_of(&u).unwrap();
                            let row = iw * sym.matrix.rows() + beta;
                            let col = iu * rank_e + a;
                            let cur = m.get(row, col) + s;
                            m.set(row, col, cur);
                        }
                    }
                }
            }
            m.kernel_basis()
        }
    }

    #[test]
    fn abelian_specialization_matches_classical_spencer() {
        for n in 1..=2i64 {
            let uea = uea_of("abelian", Some(n));
            let dim = uea.algebra().dim();
            let cases: Vec<Vec<(Vec<usize>, Matrix)>> = vec![
                vec![(vec![0, 0], scalar_coeff(1))],
                vec![(vec![0], scalar_coeff(1))],
                vec![
                    (vec![dim - 1, dim - 1], scalar_coeff(1)),
                    (vec![0], scalar_coeff(2)),
                ],
            ];
            for terms in cases {
                let op = OperatorSpec::new(
                    uea.clone(),
                    BundleSpec {
                        rank_e: 1,
                        rank_f: 1,
                    },
                    terms,
                )
                .unwrap();
                for ell in 1..=3 {
                    let weighted = symbol_space(&op, ell).unwrap();
                    let classical = classical_spencer::prolong(&op, ell);
                    assert_eq!(weighted, classical, "n={n} l={ell}");
                }
            }
        }
    }
}
