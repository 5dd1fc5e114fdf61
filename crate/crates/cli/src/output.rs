//! Result records and their JSON / CSV encodings. Every float is written
//! with 17 significant digits; non-finite values are written as the strings
//! `inf`, `-inf` and `nan`.

use std::io::{self, Write};

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as u64)
    }
}

impl From<u32> for Field {
    fn from(x: u32) -> Self {
        Field::Int(x as u64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Null, Into::into)
    }
}

pub type Fields = Vec<(&'static str, Field)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub inputs: Fields,
    pub value: Field,
    /// Residual bound for series, standard error for simulation.
    pub error: Field,
    pub meta: Fields,
}

pub fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Field {
    fn json(&self) -> Value {
        match self {
            Field::Float(x) => match serde_json::Number::from_f64(*x) {
                Some(n) => Value::Number(n),
                None => Value::String(float_text(*x)),
            },
            Field::Int(i) => Value::from(*i),
            Field::Text(s) => Value::String(s.clone()),
            Field::Bool(b) => Value::Bool(*b),
            Field::Null => Value::Null,
        }
    }

    fn csv(&self) -> String {
        match self {
            Field::Float(x) => float_text(*x),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Null => String::new(),
        }
    }
}

fn object(fields: &Fields) -> Value {
    Value::Object(fields.iter().map(|(k, v)| (k.to_string(), v.json())).collect::<Map<_, _>>())
}

impl Record {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("inputs".into(), object(&self.inputs));
        m.insert("value".into(), self.value.json());
        m.insert("error_bound_or_stderr".into(), self.error.json());
        m.insert("convergence_metadata".into(), object(&self.meta));
        Value::Object(m)
    }
}

/// Writes finite floats as `{:.16e}`.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

pub fn write_json<W: Write>(mut w: W, records: &[Record]) -> io::Result<()> {
    w.write_all(b"[")?;
    for (i, r) in records.iter().enumerate() {
        w.write_all(if i == 0 { b"\n  " } else { b",\n  " })?;
        let mut ser = serde_json::Serializer::with_formatter(&mut w, Digits17);
        serde::Serialize::serialize(&r.to_json(), &mut ser).map_err(io::Error::other)?;
    }
    w.write_all(b"\n]\n")?;
    w.flush()
}

pub fn write_csv<W: Write>(w: W, records: &[Record]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if let Some(first) = records.first() {
        let mut header: Vec<&str> = first.inputs.iter().map(|(k, _)| *k).collect();
        header.extend(["value", "error_bound_or_stderr"]);
        header.extend(first.meta.iter().map(|(k, _)| *k));
        out.write_record(&header)?;
    }
    for r in records {
        let mut row: Vec<String> = r.inputs.iter().map(|(_, v)| v.csv()).collect();
        row.push(r.value.csv());
        row.push(r.error.csv());
        row.extend(r.meta.iter().map(|(_, v)| v.csv()));
        out.write_record(&row)?;
    }
    out.flush()
}
