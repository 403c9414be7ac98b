//! Command reports and the canonical JSON writer.
//!
//! Keys come out sorted (serde_json maps are ordered) and every float is
//! written as `{:.16e}`, 17 significant digits, so a report is a pure
//! function of its content.

use std::collections::BTreeMap;
use std::io;

use hilbmod_core::Tolerance;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub result: Value,
    pub residuals: BTreeMap<String, f64>,
    pub tolerance: Value,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(command: &str, tol: &Tolerance, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            result: Value::Null,
            residuals: BTreeMap::new(),
            tolerance: json!({ "rank_rel": tol.rank_rel, "eq_abs": tol.eq_abs, "gap_rel": tol.gap_rel }),
            seed,
        }
    }

    pub fn input(&mut self, name: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(name.to_string(), value.into());
        self
    }

    pub fn residual(&mut self, name: &str, value: f64) -> &mut Self {
        self.residuals.insert(name.to_string(), value);
        self
    }

    pub fn render(&self) -> String {
        let mut s = to_canonical_string(&serde_json::to_value(self).expect("reports serialize"));
        s.push('\n');
        s
    }
}

struct Canonical<'a>(PrettyFormatter<'a>);

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_canonical_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits_and_keys_are_sorted() {
        let v = json!({ "b": 0.1, "a": [1, -0.375] });
        let s = to_canonical_string(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("-3.7500000000000000e-1"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }
}
