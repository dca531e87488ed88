use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits of floats in JSON and CSV output.
pub const JSON_DIGITS: usize = 17;
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Calibrated constants with nothing to compare against.
    Informational,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    /// The statement being checked.
    pub anchor: String,
    /// SHA-256 of the canonical JSON of the inputs.
    pub inputs_digest: String,
    pub values: BTreeMap<String, Value>,
    pub tolerance: f64,
    pub checks: usize,
    /// First few failing sub-checks.
    pub failures: Vec<String>,
    pub failure_count: usize,
    pub verdict: Verdict,
}

const MAX_LISTED_FAILURES: usize = 20;

/// Accumulates sub-checks for one claim.
#[derive(Debug, Clone)]
pub struct ClaimBuilder {
    claim: Claim,
    informational: bool,
}

impl ClaimBuilder {
    pub fn new<I: Serialize>(id: impl Into<String>, anchor: &str, inputs: &I, tolerance: f64) -> Self {
        Self {
            claim: Claim {
                id: id.into(),
                anchor: anchor.into(),
                inputs_digest: digest(inputs),
                values: BTreeMap::new(),
                tolerance,
                checks: 0,
                failures: Vec::new(),
                failure_count: 0,
                verdict: Verdict::Pass,
            },
            informational: false,
        }
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.claim.checks += 1;
        if !ok {
            self.claim.failure_count += 1;
            if self.claim.failures.len() < MAX_LISTED_FAILURES {
                self.claim.failures.push(what());
            }
        }
        ok
    }

    /// Records a computation that errored as a failed sub-check.
    pub fn error(&mut self, context: &str, e: &crate::Error) {
        self.check(false, || format!("{context}: {e}"));
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.claim.values.insert(key.into(), v.into());
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn finish(mut self) -> Claim {
        self.claim.verdict = if self.claim.failure_count > 0 {
            Verdict::Fail
        } else if self.informational {
            Verdict::Informational
        } else {
            Verdict::Pass
        };
        self.claim
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub informational: usize,
}

/// Seed-stamped list of claims, kept sorted by id. Claims are only ever added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config_version: String,
    pub seed: u64,
    pub claims: Vec<Claim>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config_version: &str, seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_version: config_version.into(),
            seed,
            claims: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, c: Claim) {
        match c.verdict {
            Verdict::Pass => self.summary.pass += 1,
            Verdict::Fail => self.summary.fail += 1,
            Verdict::Informational => self.summary.informational += 1,
        }
        let at = self.claims.partition_point(|x| x.id <= c.id);
        self.claims.insert(at, c);
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.claims {
            self.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// One row per claim value: `claim_id,verdict,key,value`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["claim_id", "verdict", "key", "value"])?;
        for c in &self.claims {
            w.write_record([c.id.as_str(), c.verdict.name(), "checks", &c.checks.to_string()])?;
            w.write_record([c.id.as_str(), c.verdict.name(), "failures", &c.failure_count.to_string()])?;
            for (k, v) in &c.values {
                w.write_record([c.id.as_str(), c.verdict.name(), k.as_str(), &csv_value(v)])?;
            }
        }
        w.flush()
    }
}

/// `x` with `digits` significant digits in scientific notation.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", digits - 1, x)
    } else {
        x.to_string()
    }
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().expect("f64"), CSV_DIGITS),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => serde_json::to_string(other).expect("serializable"),
    }
}

/// JSON formatter writing every float with 17 significant digits.
#[derive(Debug, Clone, Default)]
pub struct FixedDigits {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value, JSON_DIGITS).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty JSON with fixed-precision floats; non-finite floats become `null`.
pub fn to_json_string<S: Serialize + ?Sized>(v: &S) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits::default());
    v.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("utf-8")
}

pub fn digest<S: Serialize + ?Sized>(v: &S) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits::default());
    v.serialize(&mut ser).expect("in-memory serialization");
    hex::encode(Sha256::digest(&buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_fixed_digits() {
        assert_eq!(format_float(0.1, 17), "1.0000000000000001e-1");
        assert_eq!(format_float(2.0, 12), "2.00000000000e0");
        let s = to_json_string(&serde_json::json!({"x": 0.5, "n": 3}));
        assert!(s.contains("5.0000000000000000e-1"));
        assert!(s.contains("\"n\": 3"));
        // round-trips exactly
        let v: Value = serde_json::from_str(&to_json_string(&[std::f64::consts::PI])).unwrap();
        assert_eq!(v[0].as_f64().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn verdicts_and_ordering() {
        let mut r = Report::new("t", 1);
        let mut b = ClaimBuilder::new("b", "x", &1, 0.0);
        b.check(false, || "bad".into());
        r.push(b.finish());
        r.push(ClaimBuilder::new("a", "y", &2, 0.0).informational().finish());
        let mut c = ClaimBuilder::new("c", "z", &3, 0.0);
        c.check(true, || unreachable!());
        r.push(c.finish());
        let ids: Vec<_> = r.claims.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(r.summary, Summary { pass: 1, fail: 1, informational: 1 });
        assert!(!r.passed());
        assert_eq!(r.claim("b").unwrap().failures, vec!["bad".to_string()]);
    }

    #[test]
    fn digest_depends_on_inputs() {
        assert_eq!(digest(&(1, 0.5)), digest(&(1, 0.5)));
        assert_ne!(digest(&(1, 0.5)), digest(&(2, 0.5)));
        assert_eq!(digest(&1).len(), 64);
    }
}
