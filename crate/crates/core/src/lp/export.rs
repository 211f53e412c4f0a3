use std::fmt::Write;

use super::{LinearProgram, Sense};

fn clean(name: &str, fallback: String) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        fallback
    } else {
        s
    }
}

fn linear(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
    }
    for &(j, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {:e} {}", a.abs(), names[j]);
    }
}

/// Renders the LP in CPLEX LP text format, one constraint per line.
pub fn to_lp_format(lp: &LinearProgram) -> String {
    let names: Vec<String> = lp
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| clean(&v.name, format!("x{j}")))
        .collect();
    let mut out = String::from("\\ generated by tricert\nMinimize\n obj:");
    match lp.objective() {
        Some(obj) if !obj.is_empty() => linear(&mut out, obj, &names),
        _ => out.push_str(&format!(" 0 {}", names.first().map(String::as_str).unwrap_or("x0"))),
    }
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let _ = write!(out, " {}:", clean(&c.name, format!("c{i}")));
        linear(&mut out, &c.terms, &names);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {:e}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, n) in lp.variables().iter().zip(&names) {
        if v.upper.is_infinite() {
            let _ = writeln!(out, " {n} >= {:e}", v.lower);
        } else {
            let _ = writeln!(out, " {:e} <= {n} <= {:e}", v.lower, v.upper);
        }
    }
    out.push_str("End\n");
    out
}
