//! Machine-readable run reports. JSON field order is fixed by struct
//! declaration order, so identical runs produce byte-identical output.

use serde::Serialize;

use crate::exactlin::{Matrix, Subspace};
use crate::gla::{GradedLieAlgebra, ValidationReport};
use crate::problem::ProblemFile;

/// One cross-module assertion performed during a run.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn pass(name: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            pass: true,
            detail: None,
        }
    }

    pub fn with_detail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            pass: true,
            detail: Some(detail.into()),
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            pass: false,
            detail: Some(detail.into()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraSummary {
    pub dim: usize,
    pub depth: u32,
    pub weights: Vec<u32>,
    /// The same grading in the degree convention (negatives of the weights).
    pub degrees: Vec<i32>,
    pub names: Vec<String>,
}

impl AlgebraSummary {
    pub fn of(algebra: &GradedLieAlgebra) -> Self {
        AlgebraSummary {
            dim: algebra.dim(),
            depth: algebra.depth(),
            weights: algebra.weights().to_vec(),
            degrees: algebra.weights().iter().map(|&w| -(w as i32)).collect(),
            names: algebra.names().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolSummary {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub matrix: Vec<Vec<String>>,
    pub kernel_basis: Vec<Vec<String>>,
}

impl SymbolSummary {
    pub fn of(matrix: &Matrix, kernel: &Subspace) -> Self {
        SymbolSummary {
            rows: matrix.rows(),
            cols: matrix.cols(),
            rank: matrix.rank(),
            kernel_dim: kernel.dim(),
            matrix: matrix_strings(matrix),
            kernel_basis: kernel
                .basis()
                .iter()
                .map(|v| v.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }
}

pub fn matrix_strings(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m.get(r, c).to_string()).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteTypeSummary {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell0: Option<u32>,
    pub cap: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimAtDegree {
    pub degree: u32,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub degree: u32,
    pub solution_dim: usize,
    pub basis: Vec<Vec<String>>,
    pub bracket_sign: i8,
    pub dims_by_degree: Vec<DimAtDegree>,
}

/// The full run report. Sections beyond the requested pipeline stage stay
/// `null`; the `checks` ledger lists every cross-module assertion the run
/// performed, exactly once each.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub problem: ProblemFile,
    pub algebra: AlgebraSummary,
    pub validation: ValidationReport,
    pub order: Option<u32>,
    pub symbol: Option<SymbolSummary>,
    pub g_dims: Option<Vec<usize>>,
    pub finite_type: Option<FiniteTypeSummary>,
    pub q_dims: Option<Vec<usize>>,
    pub w_dim: Option<usize>,
    pub sigma_injective: Option<bool>,
    pub witness_kernel_dim: Option<usize>,
    pub solution_bound: Option<usize>,
    pub obstruction_dims: Option<Vec<usize>>,
    pub effective_bound: Option<usize>,
    pub oracle: Option<OracleSummary>,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(
        problem: ProblemFile,
        algebra: AlgebraSummary,
        validation: ValidationReport,
    ) -> Self {
        Report {
            problem,
            algebra,
            validation,
            order: None,
            symbol: None,
            g_dims: None,
            finite_type: None,
            q_dims: None,
            w_dim: None,
            sigma_injective: None,
            witness_kernel_dim: None,
            solution_bound: None,
            obstruction_dims: None,
            effective_bound: None,
            oracle: None,
            checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-oriented rendering; not stability-guaranteed.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(
            &mut out,
            format!(
                "algebra: dim {} depth {} weights {:?} ({})",
                self.algebra.dim,
                self.algebra.depth,
                self.algebra.weights,
                self.algebra.names.join(", ")
            ),
        );
        push(
            &mut out,
            format!(
                "validation: {}",
                if self.validation.passed() {
                    "all checks pass".to_string()
                } else {
                    self.validation
                        .first_failure()
                        .unwrap_or_else(|| "failed".to_string())
                }
            ),
        );
        if let Some(r) = self.order {
            push(&mut out, format!("weighted order: {r}"));
        }
        if let Some(sym) = &self.symbol {
            push(
                &mut out,
                format!(
                    "symbol: {}x{} matrix, rank {}, kernel dim {}",
                    sym.rows, sym.cols, sym.rank, sym.kernel_dim
                ),
            );
        }
        if let Some(dims) = &self.g_dims {
            push(&mut out, format!("g dims: {dims:?}"));
        }
        if let Some(ft) = &self.finite_type {
            match ft.ell0 {
                Some(l0) => push(
                    &mut out,
                    format!("finite type: yes, ell0 = {l0} (cap {})", ft.cap),
                ),
                None => push(
                    &mut out,
                    format!("finite type: undetermined up to cap {}", ft.cap),
                ),
            }
        }
        if let Some(dims) = &self.q_dims {
            push(&mut out, format!("q dims: {dims:?}"));
        }
        if let (Some(w), Some(inj)) = (self.w_dim, self.sigma_injective) {
            push(
                &mut out,
                format!(
                    "rewrite: dim W = {w}, sigma(D') injective: {inj}{}",
                    match self.witness_kernel_dim {
                        Some(k) if !inj => format!(" (witness kernel dim {k})"),
                        _ => String::new(),
                    }
                ),
            );
        }
        if let Some(bound) = self.solution_bound {
            push(&mut out, format!("solution bound: {bound}"));
        }
        if let Some(obs) = &self.obstruction_dims {
            push(
                &mut out,
                format!(
                    "obstructions: {obs:?}, effective bound {}",
                    self.effective_bound.unwrap_or_default()
                ),
            );
        }
        if let Some(oracle) = &self.oracle {
            push(
                &mut out,
                format!(
                    "oracle: dim {} at weighted degree <= {} (bracket sign {})",
                    oracle.solution_dim, oracle.degree, oracle.bracket_sign
                ),
            );
            for b in &oracle.basis {
                push(&mut out, format!("  solution: ({})", b.join(", ")));
            }
        }
        let failed: Vec<&CheckRecord> = self.checks.iter().filter(|c| !c.pass).collect();
        push(
            &mut out,
            format!(
                "checks: {} performed, {} failed",
                self.checks.len(),
                failed.len()
            ),
        );
        for c in failed {
            push(
                &mut out,
                format!("  FAIL {}: {}", c.name, c.detail.as_deref().unwrap_or("")),
            );
        }
        out
    }
}
