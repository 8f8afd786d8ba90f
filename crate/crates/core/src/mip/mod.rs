//! Generic sparse mixed-integer linear program container plus the solving
//! surfaces built on it: format writers, LP relaxation, a reference simplex
//! for small models, and an external-solver adapter.

mod external;
mod simplex;
mod writer;

pub use external::{parse_solution_file, solve_external};
pub use simplex::solve_reference;
pub use writer::{write_model, ModelFormat};

/// Default integrality tolerance: a value is "integer" when within this
/// distance of the nearest integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Sorted by column index, one entry per column.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A sparse minimization MIP.
#[derive(Debug, Clone, Default)]
pub struct MipModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective, sorted by column index.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        MipModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_variable(&mut self, name: String, lo: f64, hi: f64, integer: bool) -> usize {
        debug_assert!(lo <= hi, "variable `{name}` has lo > hi");
        self.variables.push(Variable {
            name,
            lo,
            hi,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_binary(&mut self, name: String) -> usize {
        self.add_variable(name, 0.0, 1.0, true)
    }

    /// Adds a row; coefficients for the same column are merged.
    pub fn add_constraint(
        &mut self,
        name: String,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let coeffs = merge_coeffs(coeffs);
        debug_assert!(
            coeffs.iter().all(|&(c, _)| c < self.variables.len()),
            "row `{name}` references an unknown column"
        );
        self.constraints.push(Constraint {
            name,
            coeffs,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>, constant: f64) {
        self.objective = merge_coeffs(coeffs);
        self.objective_constant = constant;
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Structural nonzero count over all constraint rows.
    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    /// (columns, rows, structural nonzeros)
    pub fn stats(&self) -> (usize, usize, usize) {
        (
            self.num_variables(),
            self.num_constraints(),
            self.num_nonzeros(),
        )
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integer)
    }

    /// Objective value of a primal point, including the constant term.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(c, a)| a * values[c])
                .sum::<f64>()
    }
}

fn merge_coeffs(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(c, _)| c);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (c, a) in coeffs {
        match merged.last_mut() {
            Some((last, acc)) if *last == c => *acc += a,
            _ => merged.push((c, a)),
        }
    }
    merged.retain(|&(_, a)| a != 0.0);
    merged
}

/// Same model with every integrality flag cleared; bounds unchanged.
pub fn relax(model: &MipModel) -> MipModel {
    let mut out = model.clone();
    for v in &mut out.variables {
        v.integer = false;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// One value per model variable, in column order.
    pub values: Vec<f64>,
    pub solver_id: String,
    pub iterations: u64,
}

/// Largest distance to the nearest integer over the variables that are
/// integrality-flagged in `original` (the unrelaxed model).
pub fn max_fractionality(result: &SolveResult, original: &MipModel) -> f64 {
    original
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer)
        .map(|(i, _)| {
            let x = result.values[i];
            (x - x.round()).abs()
        })
        .fold(0.0, f64::max)
}
