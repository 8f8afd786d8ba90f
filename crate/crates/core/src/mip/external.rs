//! Adapter that runs any MPS-capable solver as a subprocess.
//!
//! The command template is whitespace-split (no shell) and must contain the
//! placeholders `{in}` (MPS input path) and `{out}` (solution output path).
//! The solution file dialect is plain text:
//!
//! ```text
//! # comment (also `*`)
//! =status= optimal | infeasible | unbounded | iteration-limit
//! =obj= <solver-reported objective, informational>
//! <variable-name> <value>
//! ...
//! ```
//!
//! Every model variable must appear; missing values are an error, never a
//! silent zero. The objective is recomputed from the model so that reported
//! numbers always agree with the primal point.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use super::{write_model, MipModel, ModelFormat, SolveResult, SolveStatus};
use crate::error::{Error, Result};

/// Run `command` on `model` inside `workdir`, which must exist. Each call
/// uses a fresh temporary subdirectory so concurrent solves never collide.
pub fn solve_external(model: &MipModel, command: &str, workdir: &Path) -> Result<SolveResult> {
    if !command.contains("{in}") || !command.contains("{out}") {
        return Err(Error::solve(
            "solver command template must contain {in} and {out} placeholders",
        ));
    }
    let dir = tempfile::Builder::new()
        .prefix("solve-")
        .tempdir_in(workdir)
        .map_err(|e| Error::solve(format!("cannot create solver workdir: {e}")))?;
    let in_path = dir.path().join("model.mps");
    let out_path = dir.path().join("model.sol");
    std::fs::write(&in_path, write_model(model, ModelFormat::Mps)?)?;

    let tokens: Vec<String> = command
        .split_whitespace()
        .map(|tok| {
            tok.replace("{in}", &in_path.to_string_lossy())
                .replace("{out}", &out_path.to_string_lossy())
        })
        .collect();
    let (program, args) = tokens
        .split_first()
        .ok_or_else(|| Error::solve("empty solver command"))?;

    let output = Command::new(program).args(args).output().map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::solve(format!("solver not found: `{program}`"))
        } else {
            Error::solve(format!("cannot launch solver `{program}`: {e}"))
        }
    })?;
    if !output.status.success() {
        if output.status.code() == Some(127) {
            return Err(Error::solve(format!("solver not found: `{program}`")));
        }
        return Err(Error::solve(format!(
            "solver exited with {}: {}{}",
            output.status,
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr),
        )));
    }

    let text = std::fs::read_to_string(&out_path).map_err(|e| {
        Error::solve(format!(
            "solver produced no readable solution file at {}: {e}",
            out_path.display()
        ))
    })?;
    parse_solution_file(&text, model, command)
}

/// Parse the documented solution dialect against `model`.
pub fn parse_solution_file(text: &str, model: &MipModel, solver_id: &str) -> Result<SolveResult> {
    let mut status = None;
    let mut by_name: HashMap<&str, f64> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('*') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        match head {
            "=status=" => {
                let token = parts.next().unwrap_or("");
                status = Some(match token {
                    "optimal" => SolveStatus::Optimal,
                    "infeasible" => SolveStatus::Infeasible,
                    "unbounded" => SolveStatus::Unbounded,
                    "iteration-limit" => SolveStatus::IterationLimit,
                    other => {
                        return Err(Error::solve(format!(
                            "solution line {}: unknown status `{other}`",
                            lineno + 1
                        )))
                    }
                });
            }
            "=obj=" => {
                // informational; the objective is recomputed below
                let _ = parts.next();
            }
            name => {
                let value: f64 = parts
                    .next()
                    .ok_or_else(|| {
                        Error::solve(format!(
                            "solution line {}: `{name}` has no value",
                            lineno + 1
                        ))
                    })?
                    .parse()
                    .map_err(|e| {
                        Error::solve(format!("solution line {}: bad value: {e}", lineno + 1))
                    })?;
                by_name.insert(name, value);
            }
        }
    }

    let status = status.unwrap_or(SolveStatus::Optimal);
    if status != SolveStatus::Optimal {
        return Ok(SolveResult {
            status,
            objective: f64::NAN,
            values: vec![0.0; model.num_variables()],
            solver_id: solver_id.to_string(),
            iterations: 0,
        });
    }

    let mut values = Vec::with_capacity(model.num_variables());
    for v in &model.variables {
        let x = *by_name.get(v.name.as_str()).ok_or_else(|| {
            Error::solve(format!(
                "solution file is missing a value for variable `{}`",
                v.name
            ))
        })?;
        if x < v.lo - 1e-6 || x > v.hi + 1e-6 {
            return Err(Error::solve(format!(
                "solution value {x} for `{}` violates bounds [{}, {}]",
                v.name, v.lo, v.hi
            )));
        }
        values.push(x.clamp(v.lo, v.hi));
    }
    let objective = model.objective_value(&values);
    Ok(SolveResult {
        status,
        objective,
        values,
        solver_id: solver_id.to_string(),
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::Sense;

    fn one_var_model() -> MipModel {
        let mut m = MipModel::new("tiny");
        let x = m.add_variable("x".into(), 0.0, 10.0, false);
        m.add_constraint("c0".into(), vec![(x, 1.0)], Sense::Ge, 1.0);
        m.set_objective(vec![(x, 1.0)], 0.0);
        m
    }

    #[test]
    fn missing_variable_is_an_error() {
        let m = one_var_model();
        let err = parse_solution_file("=status= optimal\n", &m, "t").unwrap_err();
        assert!(err.to_string().contains("missing a value"));
    }

    #[test]
    fn parses_values_and_recomputes_objective() {
        let m = one_var_model();
        let r = parse_solution_file("# solved\n=obj= 99\nx 2.5\n", &m, "t").unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 2.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_status_short_circuits() {
        let m = one_var_model();
        let r = parse_solution_file("=status= infeasible\n", &m, "t").unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn out_of_bounds_value_rejected() {
        let m = one_var_model();
        let err = parse_solution_file("x 11.5\n", &m, "t").unwrap_err();
        assert!(err.to_string().contains("violates bounds"));
    }

    #[test]
    fn solver_not_found() {
        let m = one_var_model();
        let dir = tempfile::tempdir().unwrap();
        let err =
            solve_external(&m, "definitely-not-a-solver {in} {out}", dir.path()).unwrap_err();
        assert!(err.to_string().contains("solver not found"), "{err}");
    }

    #[test]
    fn template_without_placeholders_rejected() {
        let m = one_var_model();
        let dir = tempfile::tempdir().unwrap();
        assert!(solve_external(&m, "solver", dir.path()).is_err());
    }
}
