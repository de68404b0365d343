//! Weighted jet fibers of the flat model, full prolongations `p_l`, the
//! equation fibers `Q^{r+l}`, the first-order rewrite data (solution bound,
//! injectivity of the rewritten symbol, obstruction dimensions), and the
//! weighted Spencer kernel check.
//!
//! A jet is a functional on the direct sum of the enveloping components: the
//! coordinate at a monomial `u` is `(u . s)(e)` with `u` acting through the
//! right-invariant fields of the group model, leftmost letter first. The
//! operator therefore acts on jets by multiplying its words on the left.

use crate::error::{ConsistencyError, Error, InputError};
use crate::exactlin::{Matrix, Scalar, Subspace};
use crate::oracle::{GroupModel, WeightedPolynomial};
use crate::pbw::Uea;
use crate::weightedsym::{self, BundleSpec, OperatorSpec};

/// Dimension bookkeeping for a weighted jet fiber `J^m` of a rank-`rank`
/// bundle: one block per weight `0..=m`, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetFiber {
    rank: usize,
    order: u32,
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl JetFiber {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn offset(&self, weight: u32) -> usize {
        self.offsets[weight as usize]
    }

    /// Flat coordinate of (weight block, monomial index, bundle index).
    pub fn coord(&self, weight: u32, monomial: usize, comp: usize) -> usize {
        self.offsets[weight as usize] + monomial * self.rank + comp
    }

    /// Truncation `J^m -> J^{m'}` is plain coordinate dropping.
    pub fn truncate_vec(&self, v: &[Scalar], lower: &JetFiber) -> Vec<Scalar> {
        v[..lower.total].to_vec()
    }
}

/// Blocks `(weight i, dim U_{-i} * rank)` for `i = 0..=m`.
pub fn jet_fiber(uea: &Uea, rank: usize, m: u32) -> JetFiber {
    let mut block_dims = Vec::with_capacity(m as usize + 1);
    let mut offsets = Vec::with_capacity(m as usize + 1);
    let mut total = 0;
    for w in 0..=m {
        offsets.push(total);
        let d = uea.component(w).dim() * rank;
        block_dims.push(d);
        total += d;
    }
    JetFiber {
        rank,
        order: m,
        block_dims,
        offsets,
        total,
    }
}

/// Matrix of `p_l(phi): J^{r+l}(E) -> J^l(F)` in jet coordinates: the row at
/// (monomial `u`, F-index) pairs the jet against the normal form of
/// `word * u`, summed over the operator's terms. `l = 0` is the bundle map
/// itself.
pub fn prolongation_matrix(op: &OperatorSpec, ell: u32) -> Result<Matrix, Error> {
    let uea = op.uea();
    let r = op.order();
    let BundleSpec { rank_e, rank_f } = op.bundle();
    let rows_fiber = jet_fiber(uea, rank_f, ell);
    let cols_fiber = jet_fiber(uea, rank_e, r + ell);
    let mut out = Matrix::zero(rows_fiber.total(), cols_fiber.total());
    for term in op.terms() {
        if term.coeff.is_zero() {
            continue;
        }
        for j in 0..=ell {
            let comp = uea.component(j);
            for (iu, u) in comp.monomials().iter().enumerate() {
                let mut word = term.word.clone();
                word.extend_from_slice(&u.word());
                let nf = uea.normal_form(&word)?;
                let k = term.weight + j;
                for (iv, c) in nf.coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for beta in 0..rank_f {
                        for a in 0..rank_e {
                            let add = term.coeff.get(beta, a) * c;
                            if add.is_zero() {
                                continue;
                            }
                            let row = rows_fiber.coord(j, iu, beta);
                            let col = cols_fiber.coord(k, iv, a);
                            let cur = out.get(row, col) + &add;
                            out.set(row, col, cur);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The tower of equation fibers `Q^{r+l} = ker p_l(phi)` for `l = 0..=L`.
#[derive(Clone, Debug)]
pub struct EquationTower {
    pub order: u32,
    pub dims: Vec<usize>,
    pub spaces: Vec<Subspace>,
}

impl EquationTower {
    pub fn levels(&self) -> u32 {
        self.spaces.len() as u32 - 1
    }

    pub fn space(&self, ell: u32) -> &Subspace {
        &self.spaces[ell as usize]
    }
}

/// Computes the tower and cross-checks it against the symbol machinery: for
/// each `l >= 1` the kernel of the truncation restricted to `Q^{r+l}` must
/// equal `g^{r+l}`, and the truncation image must land in `Q^{r+l-1}`.
pub fn equation_tower(op: &OperatorSpec, levels: u32) -> Result<EquationTower, Error> {
    let uea = op.uea();
    let r = op.order();
    let rank_e = op.bundle().rank_e;
    let mut dims = Vec::new();
    let mut spaces: Vec<Subspace> = Vec::new();
    for ell in 0..=levels {
        let q = prolongation_matrix(op, ell)?.kernel_basis();
        if ell >= 1 {
            let fiber = jet_fiber(uea, rank_e, r + ell);
            let lower = jet_fiber(uea, rank_e, r + ell - 1);
            let g = weightedsym::symbol_space(op, ell)?;
            let top = top_block_kernel(&q, &fiber, lower.total());
            if top != g {
                return Err(ConsistencyError::new(
                    format!("tower_kernel_matches_g[l={ell}]"),
                    format!(
                        "ker(pi | Q^{}) has dim {}, symbol space has dim {}",
                        r + ell,
                        top.dim(),
                        g.dim()
                    ),
                )
                .into());
            }
            let prev = &spaces[ell as usize - 1];
            for v in q.basis() {
                if !prev.contains_vec(&fiber.truncate_vec(v, &lower)) {
                    return Err(ConsistencyError::new(
                        format!("tower_projection_containment[l={ell}]"),
                        "truncated equation jet leaves the lower equation fiber".to_string(),
                    )
                    .into());
                }
            }
        }
        dims.push(q.dim());
        spaces.push(q);
    }
    Ok(EquationTower {
        order: r,
        dims,
        spaces,
    })
}

/// Elements of `q` supported in the coordinates above `lower_total`,
/// re-expressed in top-block coordinates.
fn top_block_kernel(q: &Subspace, fiber: &JetFiber, lower_total: usize) -> Subspace {
    let top_dim = fiber.total() - lower_total;
    let mut unit_gens = Vec::with_capacity(top_dim);
    for k in 0..top_dim {
        let mut v = vec![Scalar::zero(); fiber.total()];
        v[lower_total + k] = Scalar::one();
        unit_gens.push(v);
    }
    let top_band = Subspace::from_spanning(fiber.total(), unit_gens);
    let meet = q
        .intersect(&top_band)
        .expect("ambient dimensions agree by construction");
    Subspace::from_spanning(
        top_dim,
        meet.basis()
            .iter()
            .map(|v| v[lower_total..].to_vec())
            .collect(),
    )
}

/// Where the rewrite level came from: detected by finite-type analysis (the
/// rewritten symbol must then be injective, anything else is an internal
/// error) or forced by the caller (a non-injective outcome is a legitimate
/// result with a witness).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ell0 {
    Detected(u32),
    Forced(u32),
}

impl Ell0 {
    pub fn level(self) -> u32 {
        match self {
            Ell0::Detected(l) | Ell0::Forced(l) => l,
        }
    }
}

/// The canonical first-order rewrite data at level `ell0`.
#[derive(Clone, Debug)]
pub struct RewriteReport {
    pub ell0: u32,
    pub forced: bool,
    /// `dim Q^{r+ell0}`: the solution-space dimension bound.
    pub solution_bound: usize,
    /// `dim W^{r+ell0}`.
    pub w_dim: usize,
    pub sigma_injective: bool,
    pub witness_kernel_dim: usize,
    /// `obs_m = dim Q^{r+ell0} - dim pi_m(Q^{r+ell0+m})` for `m = 1..=depth`.
    pub obstruction_dims: Vec<usize>,
    /// `dim Q^{r+ell0} - obs_depth`.
    pub effective_bound: usize,
}

/// Builds the rewrite report: the dimension of `W^{r+ell0}`, the kernel of
/// the rewritten first-order symbol computed as
/// `U_{-r-ell0-1}^* (x) E  meet  U_{-1}^* (x) g^{r+ell0}` and checked against
/// `g^{r+ell0+1}`, and the obstruction dimensions from the lift-image
/// filtration. The tower must extend to `ell0 + depth`.
pub fn rewrite_first_order(
    op: &OperatorSpec,
    tower: &EquationTower,
    ell0: Ell0,
    depth: u32,
) -> Result<RewriteReport, Error> {
    let l0 = ell0.level();
    if tower.levels() < l0 + depth {
        return Err(InputError::Malformed(format!(
            "equation tower has {} levels but rewrite at ell0 = {l0} with depth {depth} needs {}",
            tower.levels(),
            l0 + depth
        ))
        .into());
    }
    let uea = op.uea();
    let r = op.order();
    let BundleSpec { rank_e, .. } = op.bundle();
    let n1 = uea.algebra().degree_one_indices().len();
    let d_top = uea.component(r + l0).dim();
    let d_next = uea.component(r + l0 + 1).dim();

    // W^{r+l0} as a dimension: gr_{-1}^* (x) J^{r+l0}(E) modulo the embedded
    // top component. The embedding is dual to multiplication by gr_{-1},
    // whose surjectivity (hence injectivity here) is asserted.
    let jet_e = jet_fiber(uea, rank_e, r + l0);
    let mul = uea.multiplication_matrix(r + l0, 1)?;
    let w_dim = n1 * jet_e.total() - d_next * rank_e;

    // sigma(D') kernel inside gr_{-1}^* (x) (U_{-r-l0}^* (x) E).
    let ambient = n1 * d_top * rank_e;
    let mut emb = Matrix::zero(ambient, d_next * rank_e);
    for iu in 0..d_top {
        for i1 in 0..n1 {
            for iv in 0..d_next {
                let mv = mul.get(iv, iu * n1 + i1);
                if mv.is_zero() {
                    continue;
                }
                for a in 0..rank_e {
                    emb.set((i1 * d_top + iu) * rank_e + a, iv * rank_e + a, mv.clone());
                }
            }
        }
    }
    if emb.rank() != d_next * rank_e {
        return Err(ConsistencyError::new(
            "w_embedding_injective",
            "dualized multiplication by gr_{-1} failed to be injective".to_string(),
        )
        .into());
    }
    let g_l0 = weightedsym::g_at(op, l0)?;
    let mut block_gens = Vec::new();
    for i1 in 0..n1 {
        for gamma in g_l0.basis() {
            let mut v = vec![Scalar::zero(); ambient];
            for iu in 0..d_top {
                for a in 0..rank_e {
                    v[(i1 * d_top + iu) * rank_e + a] = gamma[iu * rank_e + a].clone();
                }
            }
            block_gens.push(v);
        }
    }
    let g_block = Subspace::from_spanning(ambient, block_gens);
    let meet = emb.column_space().intersect(&g_block).map_err(Error::Input)?;
    let kernel = if meet.is_zero() {
        Subspace::zero(d_next * rank_e)
    } else {
        let targets = meet.basis_matrix().transpose();
        let pre = emb.solve_columns(&targets).ok_or_else(|| {
            ConsistencyError::new(
                "rewrite_sigma_kernel_pullback",
                "intersection escaped the embedded image".to_string(),
            )
        })?;
        Subspace::from_spanning(
            d_next * rank_e,
            (0..pre.cols()).map(|c| pre.col_vec(c)).collect(),
        )
    };
    let g_next = weightedsym::symbol_space(op, l0 + 1)?;
    if kernel != g_next {
        return Err(ConsistencyError::new(
            "rewrite_sigma_kernel_is_g_next",
            format!(
                "ker sigma(D^(r+{l0})) has dim {} but g at level {} has dim {}",
                kernel.dim(),
                l0 + 1,
                g_next.dim()
            ),
        )
        .into());
    }
    let sigma_injective = kernel.is_zero();
    if let Ell0::Detected(_) = ell0 {
        if !sigma_injective {
            return Err(ConsistencyError::new(
                "rewrite_ell0_consistent",
                format!(
                    "finite-type verdict supplied ell0 = {l0} but g at level {} is nonzero",
                    l0 + 1
                ),
            )
            .into());
        }
    }

    let solution_bound = tower.dims[l0 as usize];
    let base = tower.space(l0);
    let base_fiber = jet_fiber(uea, rank_e, r + l0);
    let mut obstruction_dims = Vec::with_capacity(depth as usize);
    let mut prev_obs = 0usize;
    for m in 1..=depth {
        let high = tower.space(l0 + m);
        let image = Subspace::from_spanning(
            base_fiber.total(),
            high.basis()
                .iter()
                .map(|v| v[..base_fiber.total()].to_vec())
                .collect(),
        );
        if !base.contains_subspace(&image) {
            return Err(ConsistencyError::new(
                format!("obstruction_image_in_q[m={m}]"),
                "projected equation fiber leaves the base equation fiber".to_string(),
            )
            .into());
        }
        let obs = solution_bound - image.dim();
        if obs < prev_obs {
            return Err(ConsistencyError::new(
                format!("obstruction_monotone[m={m}]"),
                format!("obstruction dimension dropped from {prev_obs} to {obs}"),
            )
            .into());
        }
        prev_obs = obs;
        obstruction_dims.push(obs);
    }
    let effective_bound = solution_bound - prev_obs;
    Ok(RewriteReport {
        ell0: l0,
        forced: matches!(ell0, Ell0::Forced(_)),
        solution_bound,
        w_dim,
        sigma_injective,
        witness_kernel_dim: kernel.dim(),
        obstruction_dims,
        effective_bound,
    })
}

/// Evaluates the weighted Spencer operator on the 1-jet of a jet field and
/// reports whether it vanishes at the given point. The jet field is the
/// genuine `j^r` of `section`, except that an optional block is zeroed out
/// to model a corrupted field.
///
/// In jet coordinates the Spencer operator reduces to
/// `S(v, d)(i, u) = d_i(u) - v(u * e_i)` for monomials `u` of weight
/// `< r` and weight-one directions `e_i`; genuine jet fields satisfy
/// `d_i(u) = (u e_i . s)` and so lie in the kernel.
pub fn spencer_kernel_check(
    op: &OperatorSpec,
    model: &GroupModel,
    section: &WeightedPolynomial,
    point: &[Scalar],
    corrupt_block: Option<u32>,
) -> Result<bool, Error> {
    let uea = op.uea();
    let r = op.order();
    let rank = op.bundle().rank_e;
    if section.components().len() != rank {
        return Err(InputError::Malformed(format!(
            "section has {} components but the bundle has rank {rank}",
            section.components().len()
        ))
        .into());
    }
    let degree_one = uea.algebra().degree_one_indices();
    // Coordinate functions of the jet field x -> j^r_x(section).
    let mut coords: Vec<Vec<crate::oracle::Polynomial>> = Vec::new();
    for w in 0..=r {
        let comp = uea.component(w);
        let mut block = Vec::with_capacity(comp.dim() * rank);
        for u in comp.monomials() {
            for a in 0..rank {
                let q = if corrupt_block == Some(w) {
                    crate::oracle::Polynomial::zero(uea.algebra().dim())
                } else {
                    model.apply_word(&u.word(), &section.components()[a])
                };
                block.push(q);
            }
        }
        coords.push(block);
    }
    for w in 0..r {
        let comp = uea.component(w);
        for (iu, u) in comp.monomials().iter().enumerate() {
            for a in 0..rank {
                let q = &coords[w as usize][iu * rank + a];
                for &i in &degree_one {
                    // derivative slot of the 1-jet in direction e_i
                    let lhs = model.field(i).apply(q).eval(point);
                    // pairing of the value slot against u * e_i
                    let mut word = u.word();
                    word.push(i);
                    let nf = uea.normal_form(&word)?;
                    let mut rhs = Scalar::zero();
                    for (iv, c) in nf.coeffs.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let val = coords[w as usize + 1][iv * rank + a].eval(point);
                        rhs += &(c * &val);
                    }
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gla::builtin;
    use crate::oracle;
    use crate::weightedsym::FiniteTypeVerdict;
    use std::sync::Arc;

    fn uea_of(name: &str, n: Option<i64>) -> Arc<Uea> {
        Arc::new(Uea::new(builtin(name, n).unwrap()))
    }

    fn scalar_coeff(v: i64) -> Matrix {
        Matrix::from_rows(vec![vec![Scalar::from_int(v)]])
    }

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

    #[test]
    fn jet_fiber_dimensions() {
        let uea = uea_of("heisenberg", Some(1));
        assert_eq!(jet_fiber(&uea, 1, 1).total(), 3);
        assert_eq!(jet_fiber(&uea, 1, 3).total(), 13);
        let ab = uea_of("abelian", Some(1));
        for m in 0..6 {
            assert_eq!(jet_fiber(&ab, 1, m).total(), m as usize + 1);
        }
    }

    #[test]
    fn prolongation_level_zero_of_gradient() {
        let m = prolongation_matrix(&op_gradient(), 0).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn prolongation_classical_ode() {
        let m = prolongation_matrix(&op_dsquared(), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn cancelling_operator_prolongs_to_zero() {
        let op = OperatorSpec::new(
            uea_of("heisenberg", Some(1)),
            BundleSpec {
                rank_e: 1,
                rank_f: 1,
            },
            vec![(vec![0], scalar_coeff(1)), (vec![0], scalar_coeff(-1))],
        )
        .unwrap();
        for ell in 0..3 {
            assert!(prolongation_matrix(&op, ell).unwrap().is_zero());
        }
    }

    #[test]
    fn gradient_tower_is_constant_one() {
        let tower = equation_tower(&op_gradient(), 4).unwrap();
        assert_eq!(tower.dims, vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn classical_ode_tower_is_constant_two() {
        let tower = equation_tower(&op_dsquared(), 3).unwrap();
        assert_eq!(tower.dims, vec![2, 2, 2, 2]);
    }

    #[test]
    fn x_tower_grows_with_g() {
        let tower = equation_tower(&op_x(), 3).unwrap();
        assert_eq!(tower.dims, vec![2, 4, 6, 9]);
        // rank-nullity on the restricted projection
        for ell in 1..=3u32 {
            let g = weightedsym::symbol_space(&op_x(), ell).unwrap().dim();
            assert_eq!(
                tower.dims[ell as usize],
                tower.dims[ell as usize - 1] + g,
                "l={ell}"
            );
        }
    }

    #[test]
    fn rewrite_gradient() {
        let op = op_gradient();
        let tower = equation_tower(&op, 4).unwrap();
        let report = rewrite_first_order(&op, &tower, Ell0::Detected(0), 4).unwrap();
        assert!(report.sigma_injective);
        assert_eq!(report.solution_bound, 1);
        assert_eq!(report.obstruction_dims, vec![0, 0, 0, 0]);
        assert_eq!(report.effective_bound, 1);
        // W^1 = gr_{-1}^* (x) J^1 modulo U_{-2}^*: 2*3 - 4
        assert_eq!(report.w_dim, 2);
    }

    #[test]
    fn rewrite_classical_ode() {
        let op = op_dsquared();
        let tower = equation_tower(&op, 4).unwrap();
        let report = rewrite_first_order(&op, &tower, Ell0::Detected(0), 4).unwrap();
        assert!(report.sigma_injective);
        assert_eq!(report.solution_bound, 2);
        assert_eq!(report.obstruction_dims, vec![0, 0, 0, 0]);
        assert_eq!(report.effective_bound, 2);
        assert_eq!(report.w_dim, 1 * 3 - 1);
    }

    #[test]
    fn rewrite_forced_on_non_finite_type() {
        let op = op_x();
        let tower = equation_tower(&op, 4).unwrap();
        // forcing ell0 = 1: witness kernel is g at level 2
        let report = rewrite_first_order(&op, &tower, Ell0::Forced(1), 2).unwrap();
        assert!(!report.sigma_injective);
        assert_eq!(
            report.witness_kernel_dim,
            weightedsym::symbol_space(&op, 2).unwrap().dim()
        );
        // forcing ell0 = 2: witness kernel is g at level 3, of dimension 3
        let report = rewrite_first_order(&op, &tower, Ell0::Forced(2), 2).unwrap();
        assert_eq!(report.witness_kernel_dim, 3);

        // claiming finite type at ell0 = 1 is an internal error
        let err = rewrite_first_order(&op, &tower, Ell0::Detected(1), 2);
        assert!(matches!(err, Err(Error::Consistency(_))));
    }

    #[test]
    fn finite_type_verdict_feeds_rewrite() {
        let op = op_gradient();
        let tower = weightedsym::finite_type(&op, 5).unwrap();
        let FiniteTypeVerdict::Finite { ell0 } = tower.verdict else {
            panic!("gradient must be finite type");
        };
        assert_eq!(ell0, 0);
    }

    #[test]
    fn spencer_vanishes_on_genuine_jets_and_flags_corruption() {
        let op = op_x();
        let model = oracle::GroupModel::new(op.uea().clone()).unwrap();
        // p = z - xy/2, a solution of Xp = 0, but any polynomial works here
        let p = WeightedPolynomial::new(vec![oracle::Polynomial::from_terms(
            3,
            vec![
                (vec![0, 0, 1], Scalar::one()),
                (vec![1, 1, 0], Scalar::from_ratio(-1, 2)),
            ],
        )]);
        let origin = vec![Scalar::zero(); 3];
        let elsewhere = vec![
            Scalar::from_int(1),
            Scalar::from_int(-2),
            Scalar::from_ratio(1, 3),
        ];
        for pt in [&origin, &elsewhere] {
            assert!(spencer_kernel_check(&op, &model, &p, pt, None).unwrap());
        }
        // zero out the top block: the field is no longer a genuine jet field
        let q = WeightedPolynomial::new(vec![oracle::Polynomial::from_terms(
            3,
            vec![(vec![2, 0, 0], Scalar::one())],
        )]);
        assert!(spencer_kernel_check(&op, &model, &q, &elsewhere, None).unwrap());
        assert!(!spencer_kernel_check(&op, &model, &q, &elsewhere, Some(op.order())).unwrap());
    }
}
