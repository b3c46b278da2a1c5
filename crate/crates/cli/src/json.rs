use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

/// Compact JSON with every float written to 17 significant digits.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(w, value)
    }
}

pub fn to_writer<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> sigkit::Result<()> {
    let mut ser = Serializer::with_formatter(&mut w, Precise);
    value.serialize(&mut ser)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> sigkit::Result<String> {
    let mut buf = Vec::new();
    to_writer(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("JSON is UTF-8").trim_end().to_string())
}
