//! Deterministic text formats: the point CSV and the sequence dump.

use crate::error::Result;
use crate::geometry::Point;
use crate::sud::DyadicRational;
use std::io::Write;

/// Formats a finite value with 12 significant digits in plain decimal.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.11e}", x);
    // Rebuild a plain decimal from the scientific form.
    let (mantissa, exp) = s.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point_pos = exp + 1; // digits before the decimal point
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point_pos <= 0 {
        out.push_str("0.");
        for _ in 0..(-point_pos) {
            out.push('0');
        }
        out.push_str(&digits);
    } else if (point_pos as usize) >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(point_pos as usize - digits.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits[..point_pos as usize]);
        out.push('.');
        out.push_str(&digits[point_pos as usize..]);
    }
    out
}

/// Writes the point CSV: a `# dim=<d>` header line, then one comma-separated
/// point per line with 12 significant digits, in the order given.
pub fn write_points_csv<W: Write>(
    mut w: W,
    dim: usize,
    points: impl IntoIterator<Item = Point>,
) -> Result<u64> {
    writeln!(w, "# dim={dim}").map_err(io_err)?;
    let mut count = 0u64;
    for p in points {
        let row: Vec<String> = p.coords().iter().map(|c| format_sig12(*c)).collect();
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
        count += 1;
    }
    Ok(count)
}

/// Writes the sequence dump: header then one
/// `index,value_numerator,value_log2_denominator` row per term.
pub fn write_sequence_csv<W: Write>(
    mut w: W,
    terms: impl IntoIterator<Item = (u64, DyadicRational)>,
) -> Result<u64> {
    writeln!(w, "index,value_numerator,value_log2_denominator").map_err(io_err)?;
    let mut count = 0u64;
    for (n, v) in terms {
        writeln!(w, "{n},{},{}", v.numerator(), v.log2_denominator()).map_err(io_err)?;
        count += 1;
    }
    Ok(count)
}

fn io_err(e: std::io::Error) -> crate::Error {
    crate::Error::InvalidParameter {
        what: "output stream",
        why: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig12(0.618033988749895), "0.618033988750");
        assert_eq!(format_sig12(4.0), "4.00000000000");
        assert_eq!(format_sig12(-0.25), "-0.250000000000");
        assert_eq!(format_sig12(1344.0), "1344.00000000");
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1e-4), "0.000100000000000");
    }

    #[test]
    fn points_csv_layout() {
        let mut buf = Vec::new();
        let pts = vec![Point::xy(2.0, 0.25), Point::xy(-1.0, 0.618033988749895)];
        let n = write_points_csv(&mut buf, 2, pts).unwrap();
        assert_eq!(n, 2);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# dim=2"));
        assert_eq!(lines.next(), Some("2.00000000000,0.250000000000"));
        assert_eq!(lines.next(), Some("-1.00000000000,0.618033988750"));
    }

    #[test]
    fn sequence_csv_layout() {
        let mut buf = Vec::new();
        let rows = (1..=5u64).map(|n| (n, crate::sud::term(n).unwrap()));
        write_sequence_csv(&mut buf, rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,value_numerator,value_log2_denominator");
        assert_eq!(lines[1], "1,0,0");
        assert_eq!(lines[5], "5,1,1");
    }
}
