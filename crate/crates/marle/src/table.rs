use std::io::Write;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Int(usize),
    Bool(bool),
    /// Written as an empty field.
    Missing,
}

impl Value {
    fn render(self, precision: usize) -> String {
        match self {
            Value::Real(x) => format!("{:.*e}", precision - 1, x),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Real)
    }
}

/// Rows of one CSV file under a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header field.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Real values of one column, `None` for missing fields.
    pub fn reals(&self, name: &str) -> Vec<Option<f64>> {
        let Some(k) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match r[k] {
                Value::Real(x) => Some(x),
                Value::Int(n) => Some(n as f64),
                _ => None,
            })
            .collect()
    }

    /// `precision` significant digits in scientific notation.
    pub fn write_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.render(precision)))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1f64 + 0.2;
        let s = Value::Real(x).render(17);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(Value::Real(2.0).render(3), "2.00e0");
    }

    #[test]
    fn missing_values_are_empty_fields() {
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![Value::Real(1.0), Value::Missing, Value::Bool(true)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,c\n1.0e0,,true\n");
    }
}
