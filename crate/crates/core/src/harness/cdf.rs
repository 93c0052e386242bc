use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CDF_HEADER: &str = "ratio,cdf";

/// Empirical CDF of `values`: one `(x, F(x))` row per distinct value, in
/// increasing order, with `F(x)` the fraction of values `<= x`.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::config("cdf of NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match rows.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => rows.push((x, f)),
        }
    }
    Ok(rows)
}

pub fn format_cdf(values: &[f64]) -> Result<String> {
    let mut out = String::from(CDF_HEADER);
    out.push('\n');
    for (x, f) in empirical_cdf(values)? {
        writeln!(out, "{x},{f}").expect("writing to a String");
    }
    Ok(out)
}

pub fn export_cdf(values: &[f64], path: &Path) -> Result<()> {
    std::fs::write(path, format_cdf(values)?).map_err(|e| Error::io(path, e))
}

/// Reads back a file written by [`format_cdf`].
pub fn parse_cdf(text: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |detail: String| Error::Format { what: "cdf", detail };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CDF_HEADER => {}
        other => return Err(bad(format!("expected header {CDF_HEADER:?}, got {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (x, f) = l.split_once(',').ok_or_else(|| bad(format!("no comma in {l:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            Ok((parse(x)?, parse(f)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_rows() {
        let rows = empirical_cdf(&[2.0, 1.0, 0.5, 1.0]).unwrap();
        assert_eq!(rows, vec![(0.5, 0.25), (1.0, 0.75), (2.0, 1.0)]);
        let text = format_cdf(&[2.0, 1.0, 0.5, 1.0]).unwrap();
        assert_eq!(text, "ratio,cdf\n0.5,0.25\n1,0.75\n2,1\n");
        assert_eq!(parse_cdf(&text).unwrap(), rows);
    }

    #[test]
    fn empty_and_invalid() {
        assert_eq!(format_cdf(&[]).unwrap(), "ratio,cdf\n");
        assert!(empirical_cdf(&[f64::NAN]).is_err());
        assert!(parse_cdf("x,y\n1,1\n").is_err());
        assert!(parse_cdf("ratio,cdf\n1;1\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_monotone(v in prop::collection::vec(0.0f64..5.0, 1..50)) {
            let rows = parse_cdf(&format_cdf(&v).unwrap()).unwrap();
            prop_assert_eq!(&rows, &empirical_cdf(&v).unwrap());
            for w in rows.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
            }
            prop_assert_eq!(rows.last().unwrap().1, 1.0);
            // F(x) counts values <= x
            for &(x, f) in &rows {
                let count = v.iter().filter(|&&y| y <= x).count();
                prop_assert_eq!(f, count as f64 / v.len() as f64);
            }
        }
    }
}
