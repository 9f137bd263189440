//! Output formatting: numbers with 9 significant digits, CSV and JSON tables.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::Result;

/// Round to 9 significant digits. Non-finite values pass through and −0
/// becomes 0.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Text form of a number in CSV output.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{}", round_sig9(x))
    }
}

/// Serializes as a JSON number rounded to 9 significant digits.
/// Infinities become the strings `"inf"` / `"-inf"` and NaN becomes null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonNumber(pub f64);

impl Serialize for JsonNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_nan() {
            s.serialize_none()
        } else if x.is_infinite() {
            s.serialize_str(if x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(round_sig9(x))
        }
    }
}

/// `serialize_with` helper for plain `f64` fields.
pub fn sig9<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    JsonNumber(*x).serialize(s)
}

pub fn sig9_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.map(JsonNumber).serialize(s)
}

/// Parse a cell written by [`format_number`].
pub fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// A numeric table with `key=value` header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// `# key=value` lines, then a header row, then the data.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_number(*x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Rows<'a>(&'a [Vec<f64>]);
        impl Serialize for Rows<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_seq(
                    self.0
                        .iter()
                        .map(|r| r.iter().map(|x| JsonNumber(*x)).collect::<Vec<_>>()),
                )
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        let meta: serde_json::Map<String, serde_json::Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        m.serialize_entry("meta", &meta)?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &Rows(&self.rows))?;
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(round_sig9(0.123456789123), 0.123456789);
        assert_eq!(round_sig9(-1234567891234.0), -1234567890000.0);
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(parse_number("-inf"), Some(f64::NEG_INFINITY));
    }

    #[test]
    fn json_numbers() {
        let v = serde_json::to_string(&[
            JsonNumber(1.0 / 3.0),
            JsonNumber(f64::INFINITY),
            JsonNumber(f64::NAN),
        ])
        .unwrap();
        assert_eq!(v, r#"[0.333333333,"inf",null]"#);
        assert_eq!(serde_json::to_string(&JsonNumber(-0.0)).unwrap(), "0.0");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "y"]);
        t.meta("source", "test");
        t.push(vec![1.0, 0.5]);
        assert_eq!(t.to_csv_string(), "# source=test\nx,y\n1,0.5\n");
    }
}
