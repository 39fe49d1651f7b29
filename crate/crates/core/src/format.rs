//! Text and JSON encodings.
//!
//! Instance text: the first data line holds `n`, then one line per agent with
//! its 1-based preference list. Lines starting with `#` and blank lines are
//! skipped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive::CycleStats;
use crate::model::{
    AgentId, Instance, InstanceError, Matching, MatchingError, Partition, PartitionError,
};

/// Version of the on-disk formats; bumped when any encoding changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("input is empty")]
    Empty,
    #[error("expected {expected} preference rows, found {found}")]
    MissingRows { expected: usize, found: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("declared n = {declared} but instance has {actual} agents")]
    SizeMismatch { declared: usize, actual: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, first) = lines.next().ok_or(ParseError::Empty)?;
    let n: usize = first
        .parse()
        .map_err(|_| syntax(line, format!("expected agent count, found {first:?}")))?;
    if n < 2 {
        return Err(InstanceError::TooSmall(n).into());
    }

    let mut rows = Vec::with_capacity(n);
    for (line, l) in lines {
        if rows.len() == n {
            return Err(syntax(
                line,
                "unexpected content after the last preference row",
            ));
        }
        let mut row = Vec::with_capacity(n - 1);
        for tok in l.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|_| syntax(line, format!("expected agent label, found {tok:?}")))?;
            if v == 0 || v > n {
                return Err(syntax(
                    line,
                    format!("agent label {v} out of range 1..={n}"),
                ));
            }
            row.push(AgentId::new(v - 1));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(ParseError::MissingRows {
            expected: n,
            found: rows.len(),
        });
    }
    Ok(Instance::new(n, rows)?)
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::with_capacity(inst.n() * inst.n() * 4);
    out.push_str(&inst.n().to_string());
    out.push('\n');
    for i in inst.agents() {
        let row: Vec<String> = inst
            .prefs(i)
            .iter()
            .map(|a| a.label().to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// JSON shape of a matching, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingDoc {
    pub n: usize,
    pub pairs: Vec<[u32; 2]>,
    pub unmatched: Vec<u32>,
}

/// JSON shape of a partition, 1-based canonical cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub n: usize,
    pub cycles: Vec<Vec<u32>>,
}

/// JSON shape of cycle statistics; `alpha` is an exact fraction `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub q: usize,
    pub odd_lengths: Vec<usize>,
    pub n_odd: usize,
    pub alpha: String,
}

impl From<&Matching> for MatchingDoc {
    fn from(m: &Matching) -> Self {
        MatchingDoc {
            n: m.n(),
            pairs: m
                .pairs()
                .iter()
                .map(|(a, b)| [a.label(), b.label()])
                .collect(),
            unmatched: m.unmatched().iter().map(|a| a.label()).collect(),
        }
    }
}

impl From<&Partition> for PartitionDoc {
    fn from(p: &Partition) -> Self {
        PartitionDoc {
            n: p.n(),
            cycles: p
                .cycles()
                .iter()
                .map(|c| c.agents().iter().map(|a| a.label()).collect())
                .collect(),
        }
    }
}

impl From<&CycleStats> for StatsDoc {
    fn from(s: &CycleStats) -> Self {
        StatsDoc {
            q: s.q,
            odd_lengths: s.odd_lengths.clone(),
            n_odd: s.n_odd,
            alpha: format!("{}/{}", s.alpha.numer(), s.alpha.denom()),
        }
    }
}

fn from_label(n: usize, v: u32) -> Result<AgentId, ParseError> {
    if v == 0 || v as usize > n {
        return Err(syntax(0, format!("agent label {v} out of range 1..={n}")));
    }
    Ok(AgentId(v - 1))
}

impl MatchingDoc {
    pub fn to_matching(&self) -> Result<Matching, ParseError> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &[a, b] in &self.pairs {
            pairs.push((from_label(self.n, a)?, from_label(self.n, b)?));
        }
        let m = Matching::from_pairs(self.n, &pairs)?;
        let mut unmatched: Vec<u32> = self.unmatched.clone();
        unmatched.sort_unstable();
        let actual: Vec<u32> = m.unmatched().iter().map(|a| a.label()).collect();
        if unmatched != actual {
            return Err(syntax(0, "unmatched list disagrees with pairs"));
        }
        Ok(m)
    }
}

impl PartitionDoc {
    pub fn to_partition(&self) -> Result<Partition, ParseError> {
        let mut cycles = Vec::with_capacity(self.cycles.len());
        for c in &self.cycles {
            let c: Result<Vec<AgentId>, _> = c.iter().map(|&v| from_label(self.n, v)).collect();
            cycles.push(c?);
        }
        Ok(Partition::from_cycles(self.n, &cycles)?)
    }
}

pub fn matching_to_json(m: &Matching) -> String {
    serde_json::to_string(&MatchingDoc::from(m)).expect("plain data serialises")
}

pub fn partition_to_json(p: &Partition) -> String {
    serde_json::to_string(&PartitionDoc::from(p)).expect("plain data serialises")
}

pub fn stats_to_json(s: &CycleStats) -> String {
    serde_json::to_string(&StatsDoc::from(s)).expect("plain data serialises")
}

pub fn matching_from_json(text: &str) -> Result<Matching, ParseError> {
    serde_json::from_str::<MatchingDoc>(text)?.to_matching()
}

pub fn partition_from_json(text: &str) -> Result<Partition, ParseError> {
    serde_json::from_str::<PartitionDoc>(text)?.to_partition()
}

/// A candidate read from JSON: either a matching or a partition document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidate {
    Matching(Matching),
    Partition(Partition),
}

impl Candidate {
    pub fn n(&self) -> usize {
        match self {
            Candidate::Matching(m) => m.n(),
            Candidate::Partition(p) => p.n(),
        }
    }
}

pub fn candidate_from_json(text: &str) -> Result<Candidate, ParseError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("cycles").is_some() {
        let doc: PartitionDoc = serde_json::from_value(value)?;
        Ok(Candidate::Partition(doc.to_partition()?))
    } else {
        let doc: MatchingDoc = serde_json::from_value(value)?;
        Ok(Candidate::Matching(doc.to_matching()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# three agents\n3\n2 3\n3 1\n\n1 2   \n";

    #[test]
    fn parse_and_write_roundtrip() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.prefs(AgentId(0)), &[AgentId(1), AgentId(2)]);
        let text = write_instance(&inst);
        assert_eq!(text, "3\n2 3\n3 1\n1 2\n");
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn parse_errors_carry_lines() {
        match parse_instance("3\n2 3\n3 x\n1 2\n") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse_instance("3\n2 3\n3 4\n1 2\n") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_instance("3\n2 3\n3 1\n"),
            Err(ParseError::MissingRows { .. })
        ));
        assert!(matches!(
            parse_instance("3\n2 3\n3 3\n1 2\n"),
            Err(ParseError::Instance(
                InstanceError::RowNotPermutation { .. }
            ))
        ));
        assert!(matches!(parse_instance("# only\n"), Err(ParseError::Empty)));
        assert!(matches!(
            parse_instance("2\n2\n1\n1\n"),
            Err(ParseError::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn json_roundtrip() {
        let m = Matching::from_pairs(3, &[(AgentId(2), AgentId(0))]).unwrap();
        let text = matching_to_json(&m);
        assert_eq!(text, r#"{"n":3,"pairs":[[1,3]],"unmatched":[2]}"#);
        assert_eq!(matching_from_json(&text).unwrap(), m);

        let p = Partition::from_succ(vec![AgentId(2), AgentId(0), AgentId(1), AgentId(3)]).unwrap();
        let text = partition_to_json(&p);
        assert_eq!(text, r#"{"n":4,"cycles":[[1,3,2],[4]]}"#);
        assert_eq!(partition_from_json(&text).unwrap(), p);
        assert_eq!(candidate_from_json(&text).unwrap(), Candidate::Partition(p));
    }

    #[test]
    fn json_rejects_inconsistent_documents() {
        assert!(matching_from_json(r#"{"n":3,"pairs":[[1,4]],"unmatched":[2]}"#).is_err());
        assert!(matching_from_json(r#"{"n":3,"pairs":[[1,3]],"unmatched":[]}"#).is_err());
        assert!(partition_from_json(r#"{"n":3,"cycles":[[1,2]]}"#).is_err());
    }
}
