//! Staged pipeline: validate -> symbol -> prolong -> finite-type -> rewrite
//! -> obstructions -> oracle -> report. Each stage is a prefix of the full
//! run; the final report carries a ledger with every cross-module assertion
//! performed, exactly once.

use std::sync::Arc;

use crate::error::{Error, InputError};
use crate::gla::ValidationReport;
use crate::jetmodel::{self, Ell0};
use crate::oracle::GroupModel;
use crate::pbw::Uea;
use crate::problem::ProblemFile;
use crate::report::{
    AlgebraSummary, CheckRecord, DimAtDegree, FiniteTypeSummary, OracleSummary, Report,
    SymbolSummary,
};
use crate::weightedsym::{self, FiniteTypeVerdict, OperatorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Validate,
    Symbol,
    Prolong,
    FiniteType,
    Rewrite,
    Obstructions,
    Oracle,
    Report,
}

impl Stage {
    pub fn parse(name: &str) -> Option<Stage> {
        Some(match name {
            "validate" => Stage::Validate,
            "symbol" => Stage::Symbol,
            "prolong" => Stage::Prolong,
            "finite-type" => Stage::FiniteType,
            "rewrite" => Stage::Rewrite,
            "obstructions" => Stage::Obstructions,
            "oracle" => Stage::Oracle,
            "report" => Stage::Report,
            _ => return None,
        })
    }
}

/// Effective run options after merging CLI flags over the problem file.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub max_ell: u32,
    pub depth: u32,
    pub degree: u32,
}

impl RunOptions {
    pub const DEFAULT_MAX_ELL: u32 = 10;
    pub const DEFAULT_DEPTH: u32 = 4;
    pub const DEFAULT_DEGREE: u32 = 6;

    /// Flag > problem file > default.
    pub fn merge(
        problem: &ProblemFile,
        max_ell: Option<u32>,
        depth: Option<u32>,
        degree: Option<u32>,
    ) -> Self {
        RunOptions {
            max_ell: max_ell
                .or(problem.options.max_ell)
                .unwrap_or(Self::DEFAULT_MAX_ELL)
                .max(1),
            depth: depth.or(problem.options.depth).unwrap_or(Self::DEFAULT_DEPTH),
            degree: degree
                .or(problem.options.degree)
                .unwrap_or(Self::DEFAULT_DEGREE),
        }
    }
}

/// A parsed and constructed problem, ready to run. The enveloping-algebra
/// cache is exposed so callers can persist multiplication matrices.
pub struct Built {
    pub problem: ProblemFile,
    pub uea: Arc<Uea>,
    pub validation: ValidationReport,
    operator: Option<OperatorSpec>,
}

impl Built {
    pub fn operator(&self) -> Option<&OperatorSpec> {
        self.operator.as_ref()
    }
}

pub fn build(problem: ProblemFile) -> Result<Built, InputError> {
    let algebra = problem.build_algebra()?;
    let validation = algebra.validate();
    let uea = Arc::new(Uea::new(algebra));
    let operator = if validation.passed() {
        Some(problem.build_operator(uea.clone())?)
    } else {
        None
    };
    Ok(Built {
        problem,
        uea,
        validation,
        operator,
    })
}

fn validation_checks(validation: &ValidationReport, checks: &mut Vec<CheckRecord>) {
    for (name, check) in [
        ("algebra_antisymmetry", &validation.antisymmetry),
        ("algebra_jacobi", &validation.jacobi),
        ("algebra_grading", &validation.grading),
        ("algebra_generation", &validation.generation),
    ] {
        checks.push(if check.pass {
            CheckRecord::pass(name)
        } else {
            CheckRecord::fail(name, check.violation.clone().unwrap_or_default())
        });
    }
}

/// Runs the pipeline up to `stage`. Consistency failures abort with
/// `Error::Consistency` (CLI exit code 2); a failed validation aborts with
/// an input error unless the stage is `Validate`, whose outcome is data.
pub fn run(built: &Built, stage: Stage, opts: RunOptions) -> Result<Report, Error> {
    let problem = built.problem.clone();
    let algebra_summary = AlgebraSummary::of(built.uea.algebra());
    let mut report = Report::new(problem, algebra_summary, built.validation.clone());
    let mut checks: Vec<CheckRecord> = Vec::new();
    validation_checks(&built.validation, &mut checks);

    if stage == Stage::Validate || !built.validation.passed() {
        report.checks = checks;
        if stage != Stage::Validate {
            return Err(InputError::InvalidAlgebra(
                built
                    .validation
                    .first_failure()
                    .unwrap_or_else(|| "unknown".to_string()),
            )
            .into());
        }
        return Ok(report);
    }
    let op = built
        .operator
        .as_ref()
        .expect("operator exists when validation passed");
    let r = op.order();
    report.order = Some(r);

    // symbol
    let symbol = weightedsym::principal_symbol(op)?;
    report.symbol = Some(SymbolSummary::of(&symbol.matrix, &symbol.kernel));
    if stage == Stage::Symbol {
        report.checks = checks;
        return Ok(report);
    }

    // finite-type tower (needed from the prolong stage on, since the
    // equation tower cross-checks against the symbol spaces)
    let g_tower = weightedsym::finite_type(op, opts.max_ell)?;
    let verdict = g_tower.verdict.clone();
    let tower_levels = match &verdict {
        FiniteTypeVerdict::Finite { ell0 } => {
            (ell0 + opts.depth).max(opts.degree.saturating_sub(r))
        }
        FiniteTypeVerdict::Undetermined { .. } => {
            opts.degree.saturating_sub(r).clamp(1, opts.max_ell)
        }
    };
    let q_tower = jetmodel::equation_tower(op, tower_levels)?;
    for ell in 1..=tower_levels.max(g_tower.dims.len() as u32) {
        checks.push(CheckRecord::pass(format!("symbol_space_two_route[l={ell}]")));
    }
    for ell in 1..=tower_levels {
        checks.push(CheckRecord::pass(format!("tower_kernel_matches_g[l={ell}]")));
        checks.push(CheckRecord::pass(format!(
            "tower_projection_containment[l={ell}]"
        )));
    }
    report.q_dims = Some(q_tower.dims.clone());
    if stage == Stage::Prolong {
        report.checks = checks;
        return Ok(report);
    }

    report.g_dims = Some(g_tower.dims.clone());
    report.finite_type = Some(match &verdict {
        FiniteTypeVerdict::Finite { ell0 } => FiniteTypeSummary {
            verdict: "finite".to_string(),
            ell0: Some(*ell0),
            cap: opts.max_ell,
        },
        FiniteTypeVerdict::Undetermined { cap } => FiniteTypeSummary {
            verdict: "undetermined".to_string(),
            ell0: None,
            cap: *cap,
        },
    });
    {
        // monotone vanishing over the computed range
        let dims = &g_tower.dims;
        let ok = dims
            .iter()
            .zip(dims.iter().skip(1))
            .all(|(a, b)| *a != 0 || *b == 0);
        checks.push(if ok {
            CheckRecord::pass("monotone_vanishing")
        } else {
            CheckRecord::fail("monotone_vanishing", format!("dims {dims:?}"))
        });
    }
    if stage == Stage::FiniteType {
        report.checks = checks;
        return Ok(report);
    }

    // rewrite (+ obstructions); only meaningful for finite type
    let mut rewrite = None;
    if let FiniteTypeVerdict::Finite { ell0 } = verdict {
        let depth = if stage >= Stage::Obstructions {
            opts.depth
        } else {
            0
        };
        let rw = jetmodel::rewrite_first_order(op, &q_tower, Ell0::Detected(ell0), depth)?;
        checks.push(CheckRecord::pass("w_embedding_injective"));
        checks.push(CheckRecord::pass("rewrite_sigma_kernel_is_g_next"));
        checks.push(CheckRecord::pass("rewrite_ell0_consistent"));
        report.w_dim = Some(rw.w_dim);
        report.sigma_injective = Some(rw.sigma_injective);
        report.witness_kernel_dim = Some(rw.witness_kernel_dim);
        report.solution_bound = Some(rw.solution_bound);
        if stage >= Stage::Obstructions {
            for m in 1..=depth {
                checks.push(CheckRecord::pass(format!("obstruction_image_in_q[m={m}]")));
                checks.push(CheckRecord::pass(format!("obstruction_monotone[m={m}]")));
            }
            report.obstruction_dims = Some(rw.obstruction_dims.clone());
            report.effective_bound = Some(rw.effective_bound);
        }
        rewrite = Some(rw);
    }
    if stage == Stage::Rewrite || stage == Stage::Obstructions {
        report.checks = checks;
        return Ok(report);
    }

    // oracle
    let model = GroupModel::new(built.uea.clone())?;
    checks.push(CheckRecord::pass("bch_identity"));
    checks.push(CheckRecord::pass("bch_associativity"));
    checks.push(CheckRecord::with_detail(
        "field_bracket_realization",
        format!("sign {}", model.bracket_sign()),
    ));
    checks.push(CheckRecord::pass("field_homogeneity"));

    let (dim, basis) = model.polynomial_solutions(op, opts.degree)?;
    let mut dims_by_degree = Vec::with_capacity(opts.degree as usize + 1);
    for n in 0..=opts.degree {
        let d = if n == opts.degree {
            dim
        } else {
            model.polynomial_solutions(op, n)?.0
        };
        dims_by_degree.push(DimAtDegree { degree: n, dim: d });
    }

    // weighted Taylor expansion is an isomorphism on polynomials of matching
    // degree: the oracle <-> jet dictionary
    {
        let fiber = model.taylor_fiber(1, opts.degree);
        let mut columns = Vec::new();
        for w in 0..=opts.degree {
            for mono in built.uea.component(w).monomials() {
                let p = crate::oracle::Polynomial::from_terms(
                    built.uea.algebra().dim(),
                    vec![(mono.exps().to_vec(), crate::exactlin::Scalar::one())],
                );
                columns.push(
                    model.weighted_taylor(&crate::oracle::WeightedPolynomial::new(vec![p]), opts.degree),
                );
            }
        }
        let m = crate::exactlin::Matrix::from_rows(columns);
        let ok = m.rank() == fiber.total();
        checks.push(if ok {
            CheckRecord::pass("weighted_taylor_isomorphism")
        } else {
            CheckRecord::fail(
                "weighted_taylor_isomorphism",
                format!("rank {} of {}", m.rank(), fiber.total()),
            )
        });
    }

    // solution jets lie in the equation fibers; solution counts match the
    // fiber dimensions level by level
    {
        let mut jets_ok = true;
        for sol in &basis {
            for ell in 0..=tower_levels.min(opts.degree.saturating_sub(r)) {
                let jet = model.weighted_taylor(sol, r + ell);
                if !q_tower.space(ell).contains_vec(&jet) {
                    jets_ok = false;
                }
            }
        }
        checks.push(if jets_ok {
            CheckRecord::pass("oracle_solution_jets_in_q")
        } else {
            CheckRecord::fail("oracle_solution_jets_in_q", "a solution jet escaped Q")
        });

        let mut mismatches = Vec::new();
        for ell in 0..=tower_levels.min(opts.degree.saturating_sub(r)) {
            let n = r + ell;
            let oracle_dim = dims_by_degree[n as usize].dim;
            let q_dim = q_tower.dims[ell as usize];
            if oracle_dim != q_dim {
                mismatches.push(format!("N={n}: oracle {oracle_dim} vs Q {q_dim}"));
            }
        }
        checks.push(if mismatches.is_empty() {
            CheckRecord::pass("oracle_dim_matches_q_dim")
        } else {
            CheckRecord::fail("oracle_dim_matches_q_dim", mismatches.join("; "))
        });
    }

    // finite type only: jets of order r + ell0 determine solutions, and the
    // stabilized solution dimension equals the effective bound
    if let (FiniteTypeVerdict::Finite { ell0 }, Some(rw)) = (&verdict, &rewrite) {
        let jet_order = r + ell0;
        let jets: Vec<Vec<crate::exactlin::Scalar>> = basis
            .iter()
            .map(|sol| model.weighted_taylor(sol, jet_order))
            .collect();
        let determined = if jets.is_empty() {
            true
        } else {
            crate::exactlin::Matrix::from_rows(jets).rank() == basis.len()
        };
        checks.push(if determined {
            CheckRecord::pass("jet_determination")
        } else {
            CheckRecord::fail(
                "jet_determination",
                "two solutions share a weighted jet at order r + ell0",
            )
        });

        if stage >= Stage::Oracle && report.effective_bound.is_some() {
            let level = r + ell0 + opts.depth;
            let stabilized = if level == opts.degree {
                dim
            } else {
                model.polynomial_solutions(op, level)?.0
            };
            let ok = stabilized == rw.effective_bound;
            checks.push(if ok {
                CheckRecord::pass("oracle_dim_matches_effective_bound")
            } else {
                CheckRecord::fail(
                    "oracle_dim_matches_effective_bound",
                    format!(
                        "oracle dim {stabilized} at weighted degree {level} vs effective bound {}",
                        rw.effective_bound
                    ),
                )
            });
        }
    }

    report.oracle = Some(OracleSummary {
        degree: opts.degree,
        solution_dim: dim,
        basis: basis
            .iter()
            .map(|b| b.display(model.coord_names()))
            .collect(),
        bracket_sign: model.bracket_sign(),
        dims_by_degree,
    });
    report.checks = checks;
    Ok(report)
}
