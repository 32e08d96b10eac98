use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use latstretch::Interval;

use crate::CliError;

/// `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

/// Intervals as a JSON array; an unbounded end is `null`.
pub fn intervals_json(intervals: &[Interval]) -> String {
    let items: Vec<String> = intervals
        .iter()
        .map(|iv| {
            format!(
                r#"{{"lo":{},"hi":{},"lo_open":{},"hi_open":{}}}"#,
                json_num(iv.lo),
                json_num(iv.hi),
                iv.lo_open,
                iv.hi_open
            )
        })
        .collect();
    format!("[{}]", items.join(","))
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV sink with a versioned comment line ahead of the column names.
pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    pub fn create(path: Option<&Path>, tag: &str, columns: &[&str]) -> Result<Table, CliError> {
        let mut sink: Box<dyn Write> = match path {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::Usage(format!("cannot write {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        writeln!(sink, "# latstretch {tag} v1").map_err(CliError::io)?;
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(columns).map_err(CliError::csv)?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(CliError::csv)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(CliError::io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.1 * 3f64.sqrt()), "0.173205080757");
        assert_eq!(num(4.96), "4.96");
        assert_eq!(num(-2.5e-7), "-2.5e-7");
        assert_eq!(num(123456789012345.0), "1.23456789012e14");
        assert_eq!(num(999999999999.9), "1e12");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn interval_encoding() {
        let ivs = [
            Interval::closed(1.0, 1.25),
            Interval::open(0.0, f64::INFINITY),
        ];
        assert_eq!(
            intervals_json(&ivs),
            r#"[{"lo":1,"hi":1.25,"lo_open":false,"hi_open":false},{"lo":0,"hi":null,"lo_open":true,"hi_open":true}]"#
        );
        let parsed: serde_json::Value = serde_json::from_str(&intervals_json(&ivs)).unwrap();
        assert_eq!(parsed[0]["hi"], 1.25);
    }
}
