//! Solver-neutral MILP model with free-MPS emission and parsing.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::UcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Constraint family, used to name the culprit of an infeasible model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintClass {
    StartStop,
    StartStopExclusive,
    MinUp,
    MinDown,
    Reserve,
    OutputUpper,
    OutputLower,
    RampUp,
    RampDown,
    DemandSplit,
    Flow,
    Balance,
    Other,
}

impl ConstraintClass {
    pub const ALL: [ConstraintClass; 13] = [
        ConstraintClass::StartStop,
        ConstraintClass::StartStopExclusive,
        ConstraintClass::MinUp,
        ConstraintClass::MinDown,
        ConstraintClass::Reserve,
        ConstraintClass::OutputUpper,
        ConstraintClass::OutputLower,
        ConstraintClass::RampUp,
        ConstraintClass::RampDown,
        ConstraintClass::DemandSplit,
        ConstraintClass::Flow,
        ConstraintClass::Balance,
        ConstraintClass::Other,
    ];

    /// Row-name prefix.
    pub fn prefix(self) -> &'static str {
        match self {
            ConstraintClass::StartStop => "link",
            ConstraintClass::StartStopExclusive => "excl",
            ConstraintClass::MinUp => "minup",
            ConstraintClass::MinDown => "mindn",
            ConstraintClass::Reserve => "resv",
            ConstraintClass::OutputUpper => "pmax",
            ConstraintClass::OutputLower => "pmin",
            ConstraintClass::RampUp => "rampu",
            ConstraintClass::RampDown => "rampd",
            ConstraintClass::DemandSplit => "dsplit",
            ConstraintClass::Flow => "flow",
            ConstraintClass::Balance => "bal",
            ConstraintClass::Other => "c",
        }
    }

    fn from_name(name: &str) -> Self {
        let prefix = name.split('[').next().unwrap_or("");
        Self::ALL
            .into_iter()
            .find(|c| c.prefix() == prefix)
            .unwrap_or(ConstraintClass::Other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub class: ConstraintClass,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub cons: Vec<Constraint>,
    /// Binaries an enumerating backend branches on; the remaining binaries
    /// must be integral whenever these are fixed.
    pub primary: Vec<usize>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: String, lb: f64, ub: f64, obj: f64, kind: VarKind) -> usize {
        self.vars.push(Variable { name, lb, ub, obj, kind });
        self.vars.len() - 1
    }

    pub fn add_con(&mut self, class: ConstraintClass, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.cons.push(Constraint {
            name,
            class,
            coeffs,
            sense,
            rhs,
        });
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].kind == VarKind::Binary).collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, x)| v.obj * x).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lb - xi).max(xi - v.ub);
        }
        for c in &self.cons {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Copy without the rows of one class.
    pub fn without_class(&self, class: ConstraintClass) -> Self {
        Self {
            cons: self.cons.iter().filter(|c| c.class != class).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn classes(&self) -> Vec<ConstraintClass> {
        let mut out: Vec<_> = self.cons.iter().map(|c| c.class).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Free-format MPS text; identical models give identical bytes.
    pub fn to_mps(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "NAME {}", if self.name.is_empty() { "model" } else { &self.name });
        s.push_str("ROWS\n N obj\n");
        for c in &self.cons {
            let tag = match c.sense {
                Sense::Le => 'L',
                Sense::Ge => 'G',
                Sense::Eq => 'E',
            };
            let _ = writeln!(s, " {tag} {}", c.name);
        }
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vars.len()];
        for (r, c) in self.cons.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                by_col[j].push((r, a));
            }
        }
        s.push_str("COLUMNS\n");
        let mut in_int = false;
        let mut marker = 0;
        for (j, v) in self.vars.iter().enumerate() {
            let is_int = v.kind == VarKind::Binary;
            if is_int != in_int {
                let which = if is_int { "INTORG" } else { "INTEND" };
                let _ = writeln!(s, " M{marker} 'MARKER' '{which}'");
                marker += 1;
                in_int = is_int;
            }
            if v.obj != 0.0 {
                let _ = writeln!(s, " {} obj {}", v.name, v.obj);
            }
            for &(r, a) in &by_col[j] {
                let _ = writeln!(s, " {} {} {}", v.name, self.cons[r].name, a);
            }
            if v.obj == 0.0 && by_col[j].is_empty() {
                let _ = writeln!(s, " {} obj 0", v.name);
            }
        }
        if in_int {
            let _ = writeln!(s, " M{marker} 'MARKER' 'INTEND'");
        }
        s.push_str("RHS\n");
        for c in self.cons.iter().filter(|c| c.rhs != 0.0) {
            let _ = writeln!(s, " rhs {} {}", c.name, c.rhs);
        }
        s.push_str("BOUNDS\n");
        for v in &self.vars {
            let n = &v.name;
            if v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0 {
                let _ = writeln!(s, " BV bnd {n}");
            } else if v.lb == v.ub {
                let _ = writeln!(s, " FX bnd {n} {}", v.lb);
            } else if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
                let _ = writeln!(s, " FR bnd {n}");
            } else {
                if v.lb == f64::NEG_INFINITY {
                    let _ = writeln!(s, " MI bnd {n}");
                } else if v.lb != 0.0 {
                    let _ = writeln!(s, " LO bnd {n} {}", v.lb);
                }
                if v.ub != f64::INFINITY {
                    let _ = writeln!(s, " UP bnd {n} {}", v.ub);
                }
            }
        }
        s.push_str("ENDATA\n");
        s
    }

    /// Parse free-format MPS as written by [`MilpModel::to_mps`] (and the
    /// common subset used by other writers).
    pub fn from_mps(text: &str) -> Result<Self, UcError> {
        let bad = |line: usize, msg: &str| UcError::Format(format!("MPS line {}: {msg}", line + 1));
        let num = |line: usize, tok: &str| tok.parse::<f64>().map_err(|_| bad(line, &format!("bad number '{tok}'")));
        let mut model = MilpModel::default();
        let mut section = "";
        let mut obj_row = String::new();
        let mut row_index: HashMap<String, usize> = HashMap::new();
        let mut col_index: HashMap<String, usize> = HashMap::new();
        let mut in_int = false;
        let mut bounded: Vec<bool> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('*') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !raw.starts_with(' ') && !raw.starts_with('\t') {
                section = toks[0];
                if section == "NAME" {
                    model.name = toks.get(1).unwrap_or(&"").to_string();
                }
                if section == "ENDATA" {
                    break;
                }
                continue;
            }
            match section {
                "ROWS" => {
                    let [tag, name] = toks[..] else { return Err(bad(ln, "expected <type> <name>")) };
                    let sense = match tag {
                        "N" => {
                            if obj_row.is_empty() {
                                obj_row = name.to_string();
                            }
                            continue;
                        }
                        "L" => Sense::Le,
                        "G" => Sense::Ge,
                        "E" => Sense::Eq,
                        _ => return Err(bad(ln, "unknown row type")),
                    };
                    row_index.insert(name.to_string(), model.cons.len());
                    model.add_con(ConstraintClass::from_name(name), name.to_string(), Vec::new(), sense, 0.0);
                }
                "COLUMNS" => {
                    if toks.len() >= 3 && toks[1] == "'MARKER'" {
                        in_int = toks[2] == "'INTORG'";
                        continue;
                    }
                    if toks.len() != 3 && toks.len() != 5 {
                        return Err(bad(ln, "expected <col> <row> <value> [<row> <value>]"));
                    }
                    let col = *col_index.entry(toks[0].to_string()).or_insert_with(|| {
                        let kind = if in_int { VarKind::Binary } else { VarKind::Continuous };
                        let ub = if in_int { 1.0 } else { f64::INFINITY };
                        bounded.push(false);
                        model.add_var(toks[0].to_string(), 0.0, ub, 0.0, kind)
                    });
                    for pair in toks[1..].chunks(2) {
                        let v = num(ln, pair[1])?;
                        if pair[0] == obj_row {
                            model.vars[col].obj = v;
                        } else {
                            let &r = row_index.get(pair[0]).ok_or_else(|| bad(ln, "unknown row"))?;
                            if v != 0.0 {
                                model.cons[r].coeffs.push((col, v));
                            }
                        }
                    }
                }
                "RHS" => {
                    let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                    for pair in pairs.chunks(2) {
                        if pair.len() != 2 {
                            return Err(bad(ln, "expected <row> <value>"));
                        }
                        if pair[0] == obj_row {
                            continue;
                        }
                        let &r = row_index.get(pair[0]).ok_or_else(|| bad(ln, "unknown row"))?;
                        model.cons[r].rhs = num(ln, pair[1])?;
                    }
                }
                "BOUNDS" => {
                    if toks.len() < 3 {
                        return Err(bad(ln, "expected <type> <set> <col> [<value>]"));
                    }
                    let &c = col_index.get(toks[2]).ok_or_else(|| bad(ln, "unknown column"))?;
                    let val = || toks.get(3).ok_or_else(|| bad(ln, "missing bound value")).and_then(|t| num(ln, t));
                    let v = &mut model.vars[c];
                    if !bounded[c] && v.kind == VarKind::Binary {
                        v.ub = f64::INFINITY;
                    }
                    bounded[c] = true;
                    match toks[0] {
                        "UP" => v.ub = val()?,
                        "LO" => v.lb = val()?,
                        "FX" => {
                            let x = val()?;
                            v.lb = x;
                            v.ub = x;
                        }
                        "FR" => {
                            v.lb = f64::NEG_INFINITY;
                            v.ub = f64::INFINITY;
                        }
                        "MI" => v.lb = f64::NEG_INFINITY,
                        "PL" => v.ub = f64::INFINITY,
                        "BV" => {
                            v.kind = VarKind::Binary;
                            v.lb = 0.0;
                            v.ub = 1.0;
                        }
                        other => return Err(bad(ln, &format!("unsupported bound type {other}"))),
                    }
                }
                "RANGES" => return Err(bad(ln, "RANGES section not supported")),
                _ => return Err(bad(ln, "data outside a known section")),
            }
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MilpModel {
        let mut m = MilpModel::new("tiny");
        let x = m.add_var("x[0]".into(), 0.0, 4.0, 1.5, VarKind::Continuous);
        let y = m.add_var("u[0,1]".into(), 0.0, 1.0, -2.0, VarKind::Binary);
        let z = m.add_var("th[0]".into(), f64::NEG_INFINITY, f64::INFINITY, 0.0, VarKind::Continuous);
        let w = m.add_var("f".into(), 2.0, 2.0, 0.0, VarKind::Continuous);
        m.add_con(ConstraintClass::Balance, "bal[0]".into(), vec![(x, 1.0), (y, -3.0)], Sense::Ge, 0.5);
        m.add_con(ConstraintClass::Flow, "flow[0]".into(), vec![(z, 1.0), (w, 1.0)], Sense::Eq, 0.0);
        m
    }

    #[test]
    fn mps_round_trip() {
        let m = tiny();
        let text = m.to_mps();
        let back = MilpModel::from_mps(&text).unwrap();
        assert_eq!(back.vars, m.vars);
        assert_eq!(back.cons, m.cons);
        assert_eq!(back.to_mps(), text);
    }

    #[test]
    fn violation_measure() {
        let m = tiny();
        assert_eq!(m.max_violation(&[3.5, 1.0, -2.0, 2.0]), 0.0);
        assert!((m.max_violation(&[2.0, 1.0, -2.0, 2.0]) - 1.5).abs() < 1e-12);
    }
}
