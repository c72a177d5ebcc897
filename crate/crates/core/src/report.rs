//! Run reports and serialized certificates.
//!
//! Reports are plain data with a versioned schema. JSON output is byte-deterministic for
//! fixed inputs: maps are ordered and nothing depends on wall-clock time unless timing
//! is requested explicitly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{fmt_q, parse_q, LinComb};
use crate::operad::{JacobiForm, YElement};
use crate::simplexcat::MonotoneMap;
use crate::transfer::{StructureConstant, TransferCertificate, TransferredStructure};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One verified property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Number of instances examined.
    pub checked: usize,
    /// Concrete counterexamples; nonempty whenever the status is FAIL.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, checked: usize, witnesses: Vec<String>) -> Self {
        Check { name: name.into(), status: Status::from_bool(witnesses.is_empty()), checked, witnesses }
    }

    /// A check whose failure has no finer witness than its own description.
    pub fn flag(name: impl Into<String>, ok: bool, witness: impl Into<String>) -> Self {
        let witnesses = if ok { vec![] } else { vec![witness.into()] };
        Check::new(name, 1, witnesses)
    }
}

/// Term of a serialized operad element: level, tuple of maps `(target, values)`, Lie word
/// and coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTerm {
    pub level: usize,
    pub maps: Vec<(usize, Vec<usize>)>,
    pub word: Vec<u8>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedOp {
    pub arity: usize,
    pub degree: i64,
    pub levels: usize,
    pub terms: Vec<OpTerm>,
}

impl SerializedOp {
    pub fn from_element(x: &YElement) -> Self {
        let terms = x
            .terms
            .iter()
            .map(|((m, t, w), c)| OpTerm { level: *m, maps: t.iter().map(|f| (f.target(), f.values().collect())).collect(), word: w.clone(), coeff: fmt_q(c) })
            .collect();
        SerializedOp { arity: x.arity, degree: x.degree, levels: x.levels, terms }
    }

    pub fn to_element(&self) -> Result<YElement> {
        let mut terms = LinComb::zero();
        for t in &self.terms {
            let maps = t.maps.iter().map(|(target, vals)| MonotoneMap::new(*target, vals.clone())).collect::<Result<Vec<_>>>()?;
            terms.add_term((t.level, maps, t.word.clone()), parse_q(&t.coeff).map_err(Error::Input)?);
        }
        YElement::from_terms(self.arity, self.degree, self.levels, terms)
    }
}

/// The transferred homotopy Lie structure in reloadable form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureCertificate {
    pub form: JacobiForm,
    pub c: SerializedOp,
    pub j: SerializedOp,
    pub j_prime: SerializedOp,
}

impl StructureCertificate {
    pub fn new(ts: &TransferredStructure) -> Self {
        StructureCertificate { form: ts.form, c: SerializedOp::from_element(&ts.c), j: SerializedOp::from_element(&ts.j), j_prime: SerializedOp::from_element(&ts.j_prime) }
    }

    /// Rebuilds the structure, re-verifying `d c = 0`, `d j = 0` and `d j' = j`.
    pub fn load(&self) -> Result<TransferredStructure> {
        let c = self.c.to_element()?;
        if !c.diff().is_zero() {
            return Err(Error::Invariant("stored bracket cocycle is not closed".into()));
        }
        let j = self.j.to_element()?;
        if !j.diff().is_zero() {
            return Err(Error::Invariant("stored jacobiator is not closed".into()));
        }
        TransferredStructure::from_parts(c, j, self.j_prime.to_element()?, self.form)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<TransferCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<StructureConstant>,
}

impl Certificates {
    pub fn is_empty(&self) -> bool {
        self.structure.is_none() && self.summary.is_none() && self.constants.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub arguments: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_window: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Certificates::is_empty")]
    pub certificates: Certificates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            arguments: BTreeMap::new(),
            truncation: None,
            stable_window: None,
            seed: None,
            checks: Vec::new(),
            values: BTreeMap::new(),
            certificates: Certificates::default(),
            timing_ms: None,
        }
    }

    pub fn arg(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.arguments.insert(key.into(), value.to_string());
        self
    }

    pub fn value(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.values.insert(key.into(), serde_json::to_value(value).expect("report values serialize"));
        self
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(s).map_err(|e| Error::Input(format!("report: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!("report schema {} is not supported (expected {SCHEMA_VERSION})", r.schema_version)));
        }
        Ok(r)
    }

    /// Human-readable projection of the same data.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.command);
        for (k, v) in &self.arguments {
            let _ = writeln!(s, "  {k} = {v}");
        }
        if let Some(d) = self.truncation {
            let _ = writeln!(s, "  truncation = {d}");
        }
        if let Some((lo, hi)) = self.stable_window {
            let _ = writeln!(s, "  stable window = [{lo}, {hi}]");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "  seed = {seed}");
        }
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k}: {v}");
        }
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            let _ = writeln!(s, "[{status}] {} ({} checked)", c.name, c.checked);
            for w in c.witnesses.iter().take(10) {
                let _ = writeln!(s, "    witness: {w}");
            }
            if c.witnesses.len() > 10 {
                let _ = writeln!(s, "    ... {} more", c.witnesses.len() - 10);
            }
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(s, "time: {t} ms");
        }
        let _ = writeln!(s, "{}", if self.pass() { "PASS" } else { "FAIL" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fail_status_follows_witnesses() {
        assert_eq!(Check::new("x", 3, vec![]).status, Status::Pass);
        assert_eq!(Check::new("x", 3, vec!["w".into()]).status, Status::Fail);
        let mut r = RunReport::new("t");
        r.push(Check::flag("ok", true, "")).push(Check::flag("bad", false, "here"));
        assert!(!r.pass());
        assert_eq!(r.checks[1].witnesses, vec!["here".to_string()]);
    }

    #[test]
    fn report_json_round_trip() {
        let mut r = RunReport::new("operad lie-dim");
        r.arg("arity", 4).value("dimension", 6);
        r.push(Check::new("rank", 1, vec![]));
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn certificate_round_trip_reverifies() {
        let ts = TransferredStructure::new(2, JacobiForm::Cyclic).unwrap();
        let cert = StructureCertificate::new(&ts);
        let json = serde_json::to_string(&cert).unwrap();
        let back: StructureCertificate = serde_json::from_str(&json).unwrap();
        let ts2 = back.load().unwrap();
        assert_eq!(ts2.c.terms, ts.c.terms);
        assert_eq!(ts2.certificate(), ts.certificate());
        let mut broken = back.clone();
        broken.j_prime.terms[0].coeff = "12345".into();
        assert!(broken.load().is_err());
    }
}
