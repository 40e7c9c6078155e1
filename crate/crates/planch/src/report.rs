//! Command reports rendered as JSON, CSV or a plain table.
//!
//! JSON keys are sorted and floating-point values are written as strings with
//! round-trip precision; CSV rounds floats to 12 significant digits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use planch_core::field_model::LocalFieldSpec;
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Str(String),
    Float(f64),
    Int(i64),
    Bool(bool),
    List(Vec<Field>),
    Map(BTreeMap<String, Field>),
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Str(s.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Str(s)
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x as i64)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<Complex64> for Field {
    fn from(z: Complex64) -> Self {
        let mut m = BTreeMap::new();
        m.insert("re".to_string(), Field::Float(z.re));
        m.insert("im".to_string(), Field::Float(z.im));
        Field::Map(m)
    }
}

impl<T: Into<Field>> From<Vec<T>> for Field {
    fn from(v: Vec<T>) -> Self {
        Field::List(v.into_iter().map(Into::into).collect())
    }
}

/// Shortest string that reads back to the same `f64`.
pub fn float_string(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:?}")
    }
}

/// `x` rounded to 12 significant digits.
pub fn float_12(x: f64) -> String {
    if !x.is_finite() {
        return float_string(x);
    }
    format!("{x:.11e}")
}

impl Field {
    pub fn to_json(&self) -> Value {
        match self {
            Field::Str(s) => Value::String(s.clone()),
            Field::Float(x) => Value::String(float_string(*x)),
            Field::Int(n) => Value::from(*n),
            Field::Bool(b) => Value::Bool(*b),
            Field::List(v) => Value::Array(v.iter().map(Field::to_json).collect()),
            Field::Map(m) => {
                let mut out = Map::new();
                for (k, v) in m {
                    out.insert(k.clone(), v.to_json());
                }
                Value::Object(out)
            }
        }
    }

    fn flatten(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        match self {
            Field::Str(s) => out.push((prefix.to_string(), s.clone())),
            Field::Float(x) => out.push((prefix.to_string(), float_12(*x))),
            Field::Int(n) => out.push((prefix.to_string(), n.to_string())),
            Field::Bool(b) => out.push((prefix.to_string(), b.to_string())),
            Field::List(v) => {
                for (i, f) in v.iter().enumerate() {
                    f.flatten(&format!("{prefix}[{i}]"), out);
                }
            }
            Field::Map(m) => {
                for (k, f) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    f.flatten(&key, out);
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// One command's result: a tag naming the formula, the field and the values.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    fields: BTreeMap<String, Field>,
}

impl Report {
    pub fn new(command: &str, formula: &str) -> Self {
        let mut fields = BTreeMap::new();
        fields.insert("command".to_string(), Field::from(command));
        fields.insert("formula".to_string(), Field::from(formula));
        fields.insert("version".to_string(), Field::from(env!("CARGO_PKG_VERSION")));
        Report { fields }
    }

    pub fn with_field(mut self, spec: &LocalFieldSpec) -> Self {
        let mut m = BTreeMap::new();
        m.insert("p".to_string(), Field::from(spec.p));
        m.insert("f".to_string(), Field::from(spec.f as u64));
        m.insert("q".to_string(), Field::from(spec.q()));
        m.insert("psi_level".to_string(), Field::from(spec.psi_level));
        self.fields.insert("field".to_string(), Field::Map(m));
        self
    }

    pub fn set(&mut self, key: &str, v: impl Into<Field>) {
        self.fields.insert(key.to_string(), v.into());
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.get(key)
    }

    pub fn to_json(&self) -> Value {
        Field::Map(self.fields.clone()).to_json()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut rows = Vec::new();
                Field::Map(self.fields.clone()).flatten("", &mut rows);
                let mut s = String::from("key,value\n");
                for (k, v) in rows {
                    s.push_str(&csv_cell(&k));
                    s.push(',');
                    s.push_str(&csv_cell(&v));
                    s.push('\n');
                }
                s
            }
            Format::Table => {
                let mut rows = Vec::new();
                Field::Map(self.fields.clone()).flatten("", &mut rows);
                let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
                let mut s = String::new();
                for (k, v) in rows {
                    let pad = w - k.chars().count();
                    s.push_str(&k);
                    s.push_str(&" ".repeat(pad + 2));
                    s.push_str(&v);
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_in_json() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17] {
            assert_eq!(float_string(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float_12(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn keys_sorted_and_formats_render() {
        let mut r = Report::new("gamma", "test");
        r.set("zeta", 1.5);
        r.set("alpha", Complex64::new(1.0, -2.0));
        r.set("list", vec![1i64, 2]);
        let j = r.render(Format::Json);
        assert!(j.find("alpha").unwrap() < j.find("zeta").unwrap());
        assert!(j.contains("\"1.5\""));
        let c = r.render(Format::Csv);
        assert!(c.contains("alpha.im,-2.00000000000e0"));
        assert!(c.contains("list[1],2"));
        assert!(r.render(Format::Table).contains("zeta"));
    }
}
