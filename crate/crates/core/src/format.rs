//! CSV output for regions and regime maps. Numbers use `.` as the decimal
//! separator and twelve significant digits, like C's `%.12g`.

use crate::error::Result;
use crate::region::RegionPolygon;
use crate::sum_rate::MapRow;

/// Format `v` with twelve significant digits, trailing zeros removed.
pub fn fmt_g12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows `piece, vertex, R1, R2`.
pub fn region_csv(region: &RegionPolygon) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["piece", "vertex", "R1", "R2"])?;
    for piece in &region.pieces {
        for (k, v) in piece.vertices.iter().enumerate() {
            w.write_record([
                piece.config.region_label(),
                k.to_string(),
                fmt_g12(v[0]),
                fmt_g12(v[1]),
            ])?;
        }
    }
    finish(w)
}

/// Rows `grid_x, grid_y, regime, value, tie_flag, error`.
pub fn map_csv(rows: &[MapRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["grid_x", "grid_y", "regime", "value", "tie_flag", "error"])?;
    for row in rows {
        w.write_record([
            fmt_g12(row.grid_x),
            row.grid_y.map(fmt_g12).unwrap_or_default(),
            row.regime.map(|r| r.label().to_string()).unwrap_or_default(),
            row.value.map(fmt_g12).unwrap_or_default(),
            row.tie_flag.to_string(),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GaussianIcChannel;
    use crate::region::capacity_region;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(2.0), "2");
        assert_eq!(fmt_g12(11f64.log2()), "3.45943161864");
        assert_eq!(fmt_g12(-0.1375), "-0.1375");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g12(0.0001234), "0.0001234");
        assert_eq!(fmt_g12(999999999999.5), "1e+12");
        assert_eq!(fmt_g12(f64::NAN), "nan");
    }

    #[test]
    fn region_rows() {
        let p = GaussianIcChannel::real(1.0, 0.0, 0.0, 1.0, 3.0).primitives().unwrap();
        let text = region_csv(&capacity_region(&p)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("piece,vertex,R1,R2"));
        let rect: Vec<&str> = text.lines().filter(|l| l.starts_with("IAN-IAN,")).collect();
        assert_eq!(rect, ["IAN-IAN,0,0,0", "IAN-IAN,1,2,0", "IAN-IAN,2,2,2", "IAN-IAN,3,0,2"]);
    }
}
