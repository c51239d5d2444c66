use std::fmt::Write;

use super::problem::{LinearProblem, Relation, Sense, VarId};

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_digit() || c == '.' => format!("_{s}"),
        None => "_".into(),
        _ => s,
    }
}

fn write_terms(out: &mut String, names: &[String], terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
        return;
    }
    for &(v, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), names[v.0]);
    }
}

/// Renders the problem in CPLEX LP text format for cross-checking with external solvers.
pub fn write_lp(problem: &LinearProblem) -> String {
    let names: Vec<String> = problem
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{}_{j}", sanitize(&v.name)))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", problem.name);
    out.push_str(match problem.sense() {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    if problem.variables.is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, &names, &problem.objective);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in problem.constraints.iter().enumerate() {
        if problem.variables.is_empty() {
            break;
        }
        let _ = write!(out, " {}_{i}:", sanitize(&row.name));
        write_terms(&mut out, &names, &row.terms);
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in problem.variables.iter().zip(&names) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
        }
    }
    let binaries: Vec<&String> = problem
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
