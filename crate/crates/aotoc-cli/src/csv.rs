//! ResultRow CSV: header row, comma separated, 17 significant digits so
//! values round-trip through f64 exactly.

use aotoc_core::sweep::ResultRow;
use aotoc_core::Error;

pub const HEADER: &str = "parameter,estimate,stderr,g_finite,g_thermo,ensemble,L,k,seed";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.parameter),
            fmt(r.estimate),
            fmt(r.stderr),
            fmt(r.g_finite),
            fmt(r.g_thermo),
            r.ensemble,
            r.l,
            r.k,
            r.seed
        ));
    }
    out
}

pub fn from_csv(text: &str) -> Result<Vec<ResultRow>, Error> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))?;
    if header.trim() != HEADER {
        return Err(Error::Config(format!("unexpected CSV header '{header}'")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Config(format!("row {}: expected 9 fields, got {}", i + 2, f.len())));
        }
        let num = |s: &str| -> Result<f64, Error> {
            s.parse().map_err(|_| Error::Config(format!("row {}: bad number '{s}'", i + 2)))
        };
        rows.push(ResultRow {
            parameter: num(f[0])?,
            estimate: num(f[1])?,
            stderr: num(f[2])?,
            g_finite: num(f[3])?,
            g_thermo: num(f[4])?,
            ensemble: f[5].to_string(),
            l: num(f[6])? as usize,
            k: num(f[7])? as usize,
            seed: num(f[8])? as u64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let rows = vec![ResultRow {
            parameter: 0.1 + 0.2,
            estimate: 1.0 / 3.0,
            stderr: 1e-17,
            g_finite: std::f64::consts::PI / 4.0,
            g_thermo: 0.9375,
            ensemble: "brickwork-haar".into(),
            l: 8,
            k: 1,
            seed: 42,
        }];
        let text = to_csv(&rows);
        let back = from_csv(&text).unwrap();
        assert_eq!(rows, back);
        assert_eq!(to_csv(&back), text);
    }

    #[test]
    fn rejects_malformed() {
        assert!(from_csv("").is_err());
        assert!(from_csv("wrong,header\n").is_err());
        let bad = format!("{HEADER}\n1,2,3\n");
        assert!(from_csv(&bad).is_err());
    }
}
