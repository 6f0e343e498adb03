//! JSON, JSONL and CSV writers that print floats with 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Pretty or compact JSON with floats written as `d.dddddddddddddddde±x`.
struct Precise<F>(F);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", float(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// 17 significant digits; exact round trip for every finite `f64`.
pub fn float(value: f64) -> String {
    format!("{value:.16e}")
}

fn write_with<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(formatter));
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    write_with(value, PrettyFormatter::new())
}

pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    write_with(value, serde_json::ser::CompactFormatter)
}

/// Comment header for CSV output: format version and the resolved config.
pub fn csv_header<T: Serialize>(config: &T) -> Result<String> {
    Ok(format!("# format_version={FORMAT_VERSION}\n# config={}\n", to_json_line(config)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, 0.1, 1e-300, -2.5, 123456789.12345679] {
            let text = float(v);
            assert_eq!(text.parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn json_uses_precise_floats() {
        let line = to_json_line(&serde_json::json!({"c": 0.5, "n": 3})).unwrap();
        assert_eq!(line, r#"{"c":5.0000000000000000e-1,"n":3}"#);
        let parsed: serde_json::Value = serde_json::from_str(&to_json_pretty(&vec![0.25]).unwrap()).unwrap();
        assert_eq!(parsed[0], 0.25);
    }
}
