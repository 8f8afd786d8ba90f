//! Deterministic LP-format and free-MPS writers.
//!
//! Output is byte-identical across runs for the same model; numbers carry 12
//! significant digits. Every column appears in the COLUMNS section (with an
//! explicit objective coefficient, zero included) so that readers see the
//! full variable set even when a variable is structurally unused.

use std::fmt::Write as _;

use super::{MipModel, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Lp,
    Mps,
}

impl std::str::FromStr for ModelFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(ModelFormat::Lp),
            "mps" => Ok(ModelFormat::Mps),
            other => Err(Error::Parse(format!("unknown model format `{other}`"))),
        }
    }
}

/// Longest name either writer accepts.
pub const MAX_NAME_LEN: usize = 255;

/// Render `model` in the requested format.
pub fn write_model(model: &MipModel, format: ModelFormat) -> Result<String> {
    check_names(model)?;
    match format {
        ModelFormat::Mps => Ok(write_mps(model)),
        ModelFormat::Lp => Ok(write_lp(model)),
    }
}

fn check_names(model: &MipModel) -> Result<()> {
    for v in &model.variables {
        check_name(&v.name, "variable")?;
    }
    for c in &model.constraints {
        check_name(&c.name, "constraint")?;
    }
    Ok(())
}

fn check_name(name: &str, what: &str) -> Result<()> {
    if name.is_empty() || name.len() > MAX_NAME_LEN {
        return Err(Error::model(format!(
            "{what} name `{name}` exceeds the format limit of {MAX_NAME_LEN} characters"
        )));
    }
    if name
        .chars()
        .any(|c| c.is_whitespace() || c == ':' || !c.is_ascii())
    {
        return Err(Error::model(format!(
            "{what} name `{name}` contains characters the writers cannot represent"
        )));
    }
    Ok(())
}

/// 12-significant-digit decimal rendering, trailing zeros trimmed.
pub(crate) fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    debug_assert!(v.is_finite());
    let s = format!("{:.11e}", v);
    let (mant, exp) = s.split_once('e').expect("exponential form");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if !(-4..12).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        out.push(digits.as_bytes()[0] as char);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    } else if exp >= 0 {
        let e = exp as usize;
        out.push_str(&digits[..=e]);
        let frac = digits[e + 1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    }
    out
}

fn write_mps(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    out.push_str("ROWS\n N  COST\n");
    for c in &model.constraints {
        let tag = match c.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, " {}  {}", tag, c.name);
    }

    // column-major view of the rows
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_variables()];
    for (ri, c) in model.constraints.iter().enumerate() {
        for &(ci, a) in &c.coeffs {
            cols[ci].push((ri, a));
        }
    }
    let mut obj = vec![0.0; model.num_variables()];
    for &(ci, a) in &model.objective {
        obj[ci] = a;
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (ci, v) in model.variables.iter().enumerate() {
        if v.integer != in_int {
            let kind = if v.integer { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER    'MARKER'    {kind}");
            in_int = v.integer;
        }
        let _ = writeln!(out, "    {}  COST  {}", v.name, fmt12(obj[ci]));
        for &(ri, a) in &cols[ci] {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                v.name,
                model.constraints[ri].name,
                fmt12(a)
            );
        }
    }
    if in_int {
        out.push_str("    MARKER    'MARKER'    'INTEND'\n");
    }

    out.push_str("RHS\n");
    for c in &model.constraints {
        let _ = writeln!(out, "    RHS  {}  {}", c.name, fmt12(c.rhs));
    }
    if model.objective_constant != 0.0 {
        // MPS convention: the RHS entry of the objective row is the negated
        // constant term.
        let _ = writeln!(out, "    RHS  COST  {}", fmt12(-model.objective_constant));
    }

    out.push_str("BOUNDS\n");
    for v in &model.variables {
        if v.lo == v.hi {
            let _ = writeln!(out, " FX BND  {}  {}", v.name, fmt12(v.lo));
            continue;
        }
        if v.lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI BND  {}", v.name);
        } else if v.lo != 0.0 {
            let _ = writeln!(out, " LO BND  {}  {}", v.name, fmt12(v.lo));
        }
        if v.hi == f64::INFINITY {
            if v.integer {
                let _ = writeln!(out, " PL BND  {}", v.name);
            }
        } else {
            let _ = writeln!(out, " UP BND  {}  {}", v.name, fmt12(v.hi));
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn lp_term(first: bool, coeff: f64, name: &str, out: &mut String) {
    if first {
        if coeff < 0.0 {
            out.push_str("- ");
        }
    } else if coeff < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let _ = write!(out, "{} {}", fmt12(coeff.abs()), name);
}

fn write_lp(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n obj:");
    if model.objective.is_empty() && model.objective_constant == 0.0 {
        out.push_str(" 0");
    } else {
        let mut first = true;
        out.push(' ');
        for &(ci, a) in &model.objective {
            lp_term(first, a, &model.variables[ci].name, &mut out);
            first = false;
        }
        if model.objective_constant != 0.0 {
            if first {
                let _ = write!(out, "{}", fmt12(model.objective_constant));
            } else {
                let sign = if model.objective_constant < 0.0 { "-" } else { "+" };
                let _ = write!(out, " {sign} {}", fmt12(model.objective_constant.abs()));
            }
        }
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        if c.coeffs.is_empty() {
            out.push_str(" 0");
        } else {
            out.push(' ');
            let mut first = true;
            for &(ci, a) in &c.coeffs {
                lp_term(first, a, &model.variables[ci].name, &mut out);
                first = false;
            }
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", fmt12(c.rhs));
    }

    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.lo == v.hi {
            let _ = writeln!(out, " {} = {}", v.name, fmt12(v.lo));
        } else if v.lo == f64::NEG_INFINITY && v.hi == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else if v.hi == f64::INFINITY {
            let _ = writeln!(out, " {} >= {}", v.name, fmt12(v.lo));
        } else if v.lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " {} <= {}", v.name, fmt12(v.hi));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", fmt12(v.lo), v.name, fmt12(v.hi));
        }
    }

    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.integer && v.lo == 0.0 && v.hi == 1.0)
        .map(|v| v.name.as_str())
        .collect();
    let generals: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.integer && !(v.lo == 0.0 && v.hi == 1.0))
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::Sense;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(25.0), "25");
        assert_eq!(fmt12(-3.0), "-3");
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(1e15), "1e15");
        assert_eq!(fmt12(1.25e-7), "1.25e-7");
    }

    fn one_var_model() -> MipModel {
        let mut m = MipModel::new("tiny");
        let x = m.add_variable("x".into(), 0.0, 10.0, false);
        m.add_constraint("c0".into(), vec![(x, 1.0)], Sense::Ge, 1.0);
        m.set_objective(vec![(x, 1.0)], 0.0);
        m
    }

    #[test]
    fn lp_text_has_constraint_and_bounds() {
        let text = write_model(&one_var_model(), ModelFormat::Lp).unwrap();
        assert!(text.contains("Minimize"));
        assert!(text.contains(" c0: 1 x >= 1"));
        assert!(text.contains(" 0 <= x <= 10"));
    }

    #[test]
    fn mps_text_structure() {
        let text = write_model(&one_var_model(), ModelFormat::Mps).unwrap();
        assert!(text.contains("ROWS\n N  COST\n G  c0\n"));
        assert!(text.contains("    x  COST  1\n"));
        assert!(text.contains("    RHS  c0  1\n"));
        assert!(text.contains(" UP BND  x  10\n"));
        assert!(text.ends_with("ENDATA\n"));
    }

    #[test]
    fn empty_objective_row_still_emitted() {
        let mut m = MipModel::new("noobj");
        let x = m.add_variable("x".into(), 0.0, 1.0, false);
        m.add_constraint("c0".into(), vec![(x, 1.0)], Sense::Le, 1.0);
        let mps = write_model(&m, ModelFormat::Mps).unwrap();
        assert!(mps.contains(" N  COST"));
        assert!(mps.contains("    x  COST  0"));
        let lp = write_model(&m, ModelFormat::Lp).unwrap();
        assert!(lp.contains("obj: 0"));
    }

    #[test]
    fn overlong_name_rejected() {
        let mut m = MipModel::new("long");
        let name = "x".repeat(MAX_NAME_LEN + 1);
        m.add_variable(name.clone(), 0.0, 1.0, false);
        let err = write_model(&m, ModelFormat::Mps).unwrap_err();
        assert!(err.to_string().contains("exceeds the format limit"));
    }

    #[test]
    fn byte_identical_across_runs() {
        let m = one_var_model();
        let a = write_model(&m, ModelFormat::Mps).unwrap();
        let b = write_model(&m, ModelFormat::Mps).unwrap();
        assert_eq!(a, b);
        let c = write_model(&m, ModelFormat::Lp).unwrap();
        let d = write_model(&m, ModelFormat::Lp).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn integer_markers_bracket_integer_columns() {
        let mut m = MipModel::new("mix");
        m.add_variable("a".into(), 0.0, 1.0, false);
        m.add_binary("b".into());
        m.add_binary("c".into());
        m.add_variable("d".into(), 0.0, f64::INFINITY, false);
        let mps = write_model(&m, ModelFormat::Mps).unwrap();
        let org = mps.find("'INTORG'").unwrap();
        let end = mps.find("'INTEND'").unwrap();
        let b = mps.find("    b  COST").unwrap();
        let c = mps.find("    c  COST").unwrap();
        let d = mps.find("    d  COST").unwrap();
        assert!(org < b && b < c && c < end && end < d);
    }
}
