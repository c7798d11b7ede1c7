//! CSV output with a fixed float format (17 significant digits, `'\n'` line endings).

use crate::error::{Error, Result};
use crate::riemannian::RayRow;
use crate::sr::SampledCurve;

pub fn fmt_f64(v: f64) -> String {
    // Print -0 as 0 so sign noise does not show up in diffs.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// `t,x1,y1,...,z[,u1,v1,...][,extra...]`, one row per sample.
pub fn curve_csv(curve: &SampledCurve, extra: &[(&str, &[f64])]) -> Result<String> {
    let Some(n) = curve.n() else {
        return Ok(String::from("t\n"));
    };
    let len = curve.times.len();
    if let Some((name, col)) = extra.iter().find(|(_, c)| c.len() != len) {
        return Err(Error::InvalidInput(format!(
            "column {name} has {} values for {len} samples",
            col.len()
        )));
    }
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    header.push("z".into());
    if curve.controls.is_some() {
        for i in 1..=n {
            header.push(format!("u{i}"));
            header.push(format!("v{i}"));
        }
    }
    header.extend(extra.iter().map(|(name, _)| name.to_string()));

    let mut out = header.join(",");
    out.push('\n');
    for k in 0..len {
        let mut row = vec![fmt_f64(curve.times[k])];
        row.extend(curve.points[k].coords().into_iter().map(fmt_f64));
        if let Some(c) = &curve.controls {
            row.extend(c[k].iter().copied().map(fmt_f64));
        }
        row.extend(extra.iter().map(|(_, col)| fmt_f64(col[k])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn ray_csv(rows: &[RayRow]) -> String {
    let mut out = String::from(RayRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupPoint;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn curve_layout() {
        let curve = SampledCurve::new(
            vec![0.0, 1.0],
            vec![GroupPoint::origin(1), GroupPoint::from_coords(&[1.0, 0.0, 0.5]).unwrap()],
            Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        )
        .unwrap();
        let csv = curve_csv(&curve, &[("deviation", &[0.0, 0.0])]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,y1,z,u1,v1,deviation");
        assert_eq!(lines.len(), 3);
        assert!(csv.ends_with('\n'));
        assert_eq!(lines[2].split(',').count(), 7);
        assert!(curve_csv(&curve, &[("bad", &[0.0])]).is_err());
    }
}
