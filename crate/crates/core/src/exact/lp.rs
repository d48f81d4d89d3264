//! CPLEX LP text for [`IlpModel`], and a small reader that recovers its
//! shape so exports can be checked without an external solver.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt::Write;

use super::{IlpModel, Sense};
use crate::Error;

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, vars: &[super::Variable], terms: &[(usize, i64)]) {
    for (n, &(v, c)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let name = &vars[v].name;
        let sign = if c < 0 { "-" } else if n > 0 { "+" } else { "" };
        let mag = c.unsigned_abs();
        if n > 0 || c < 0 {
            out.push(' ');
        }
        out.push_str(sign);
        if !sign.is_empty() {
            out.push(' ');
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(name);
    }
}

/// Renders the model: maximize the sum of admission variables, all
/// variables binary.
pub fn to_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {} admission model: {} flows", model.mode, model.flows.len());
    out.push_str("Maximize\n obj:");
    let chis: alloc::vec::Vec<(usize, i64)> = model.admit_vars().map(|(i, _)| (i, 1)).collect();
    if chis.is_empty() {
        out.push_str(" 0");
    } else {
        out.push(' ');
        write_terms(&mut out, &model.variables, &chis);
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}: ", row.name);
        write_terms(&mut out, &model.variables, &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Binary\n");
    for v in &model.variables {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

/// Shape of an LP file as read back by [`LpSummary::parse`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpSummary {
    pub maximize: bool,
    pub objective_terms: usize,
    pub rows: usize,
    /// Row count per name prefix (text before the first `_`).
    pub rows_by_prefix: BTreeMap<String, usize>,
    pub binaries: usize,
}

impl LpSummary {
    pub fn rows_with_prefix(&self, prefix: &str) -> usize {
        self.rows_by_prefix.get(prefix).copied().unwrap_or(0)
    }

    /// Reads the subset of LP syntax produced by [`to_lp`].
    pub fn parse(text: &str) -> Result<Self, Error> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Objective,
            Constraints,
            Binary,
            Done,
        }
        let mut s = LpSummary::default();
        let mut section = Section::None;
        let mut seen_sense = false;
        for raw in text.lines() {
            let line = raw.split('\\').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.to_ascii_lowercase().as_str() {
                "maximize" | "maximise" | "max" => {
                    s.maximize = true;
                    seen_sense = true;
                    section = Section::Objective;
                    continue;
                }
                "minimize" | "minimise" | "min" => {
                    seen_sense = true;
                    section = Section::Objective;
                    continue;
                }
                "subject to" | "such that" | "st" | "s.t." => {
                    section = Section::Constraints;
                    continue;
                }
                "binary" | "binaries" | "bin" => {
                    section = Section::Binary;
                    continue;
                }
                "end" => {
                    section = Section::Done;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::None => return Err(Error::LpParse(format!("text before objective: {line:?}"))),
                Section::Done => return Err(Error::LpParse("text after End".to_string())),
                Section::Objective => {
                    let body = line.split_once(':').map_or(line, |(_, b)| b);
                    s.objective_terms += body.split_whitespace().filter(|t| is_name(t)).count();
                }
                Section::Constraints => {
                    if let Some((name, _)) = line.split_once(':') {
                        let name = name.trim();
                        if !is_name(name) {
                            return Err(Error::LpParse(format!("bad row name {name:?}")));
                        }
                        s.rows += 1;
                        let prefix = name.split('_').next().unwrap_or(name);
                        *s.rows_by_prefix.entry(prefix.into()).or_default() += 1;
                    }
                }
                Section::Binary => s.binaries += line.split_whitespace().count(),
            }
        }
        if !seen_sense {
            return Err(Error::LpParse("missing objective sense".to_string()));
        }
        if section != Section::Done {
            return Err(Error::LpParse("missing End".to_string()));
        }
        Ok(s)
    }
}

fn is_name(t: &str) -> bool {
    t.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{build_fcs_model, build_hfs_model, RowKind};
    use crate::model::{FlowSpec, Hypercycle, Topology};
    use crate::tecg::Tecg;
    use alloc::sync::Arc;

    fn micro() -> (Tecg, alloc::vec::Vec<FlowSpec>) {
        let t = Arc::new(Topology::from_duplex(&["s", "a", "d"], &[("s", "a"), ("a", "d")]).unwrap());
        let (s, d) = (t.node("s").unwrap(), t.node("d").unwrap());
        let flows = alloc::vec![FlowSpec::new(0, s, d, 1, 2, 2).unwrap(), FlowSpec::new(1, s, d, 2, 3, 3).unwrap()];
        (Tecg::new(t, Hypercycle::new(6)), flows)
    }

    #[test]
    fn round_trip_counts() {
        let (g, flows) = micro();
        for m in [build_hfs_model(&g, &flows).unwrap(), build_fcs_model(&g, &flows).unwrap()] {
            let s = LpSummary::parse(&to_lp(&m)).unwrap();
            assert!(s.maximize);
            assert_eq!(s.objective_terms, 2);
            assert_eq!(s.rows, m.rows.len());
            assert_eq!(s.binaries, m.variables.len());
            for kind in [RowKind::Capacity, RowKind::Conservation, RowKind::NoLoop, RowKind::Indicator, RowKind::Periodicity] {
                assert_eq!(s.rows_with_prefix(kind.prefix()), m.row_count(kind));
            }
        }
    }

    #[test]
    fn empty_model_is_valid_lp() {
        let (g, _) = micro();
        let text = to_lp(&build_hfs_model(&g, &[]).unwrap());
        let s = LpSummary::parse(&text).unwrap();
        assert_eq!((s.rows, s.binaries, s.objective_terms), (0, 0, 0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(LpSummary::parse("hello").is_err());
        assert!(LpSummary::parse("Maximize\n obj: x\n").is_err());
    }
}
