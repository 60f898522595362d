//! Plain-text persistence for coefficient and rho tables.
//!
//! Both formats are line oriented: a version header, a few `key value`
//! metadata lines, then the numeric payload with one value per line in
//! decimal scientific notation with 21 significant digits (enough to
//! round-trip an extended-precision float bit-for-bit through text).
//!
//! Coefficient tables (`SMOOTHCOUNT-DN v1`):
//!
//! ```text
//! SMOOTHCOUNT-DN v1
//! ymax 100
//! m 25
//! precision 15
//! prime 2 2
//! 1.00000000000000000000e0
//! 3.46573590279972654709e-1
//! prime 3 3
//! ...
//! ```
//!
//! Rows appear in ascending prime order and readers reject anything else.
//! On load the second coefficient of every row is checked against
//! `(sum of log p)/2` recomputed from the primes in the file itself, so a
//! corrupted coefficient there is caught without any external data.
//!
//! Rho tables (`SMOOTHCOUNT-RHO v1`) carry `umax` and `h` metadata followed
//! by the stored `log rho` grid, one value per line; the value at `u = 2`
//! is checked against the analytic `1 - log 2` on load.

use crate::dickman::RhoTable;
use crate::ennola::{c_seq, zeta_even, DRow, EnnolaTable};
use crate::error::{Error, Result};
use crate::Real;
use std::fmt::Write as _;
use std::path::Path;

const DN_MAGIC: &str = "SMOOTHCOUNT-DN";
const RHO_MAGIC: &str = "SMOOTHCOUNT-RHO";
const VERSION: &str = "v1";

/// Relative tolerance for the load-time integrity spot checks, scaled to
/// the scalar's precision.
fn check_tol<R: Real>() -> f64 {
    10f64.powi(-(R::DIGITS as i32 - 3))
}

fn fmt_value<R: Real>(v: R) -> String {
    format!("{v:.20e}")
}

fn parse_value<R: Real>(s: &str, what: &str) -> Result<R> {
    s.parse::<R>()
        .map_err(|_| Error::CorruptTable(format!("unparseable {what}: `{s}`")))
}

fn check_header<'a>(line: Option<&'a str>, magic: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::CorruptTable("empty file".into()))?;
    match line.strip_prefix(magic).map(str::trim) {
        Some(VERSION) => Ok(line),
        Some(other) => Err(Error::UnsupportedVersion(format!(
            "{magic} version `{other}` (reader supports {VERSION})"
        ))),
        None => Err(Error::CorruptTable(format!(
            "bad header `{line}`, expected `{magic} {VERSION}`"
        ))),
    }
}

fn metadata_line<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::CorruptTable(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| Error::CorruptTable(format!("expected `{key} ...`, found `{line}`")))
}

/// Serialize a coefficient table.
pub fn save_dtable<R: Real>(table: &EnnolaTable<R>, destination: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{DN_MAGIC} {VERSION}");
    let _ = writeln!(out, "ymax {}", table.y_max);
    let _ = writeln!(out, "m {}", table.m);
    let _ = writeln!(out, "precision {}", table.precision);
    for row in &table.rows {
        let _ = writeln!(out, "prime {} {}", row.prime, row.coeffs.len());
        for &c in &row.coeffs {
            let _ = writeln!(out, "{}", fmt_value(c));
        }
    }
    std::fs::write(destination, out)?;
    Ok(())
}

/// Load a coefficient table, verifying version, precision, row order, row
/// lengths, and the `d_1 = (sum log p)/2` integrity value per row.
pub fn load_dtable<R: Real>(source: &Path) -> Result<EnnolaTable<R>> {
    let text = std::fs::read_to_string(source)?;
    parse_dtable(&text)
}

fn parse_dtable<R: Real>(text: &str) -> Result<EnnolaTable<R>> {
    let mut lines = text.lines();
    check_header(lines.next(), DN_MAGIC)?;
    let y_max: u64 = metadata_line(lines.next(), "ymax")?
        .parse()
        .map_err(|_| Error::CorruptTable("bad ymax".into()))?;
    let m: usize = metadata_line(lines.next(), "m")?
        .parse()
        .map_err(|_| Error::CorruptTable("bad m".into()))?;
    let precision: u32 = metadata_line(lines.next(), "precision")?
        .parse()
        .map_err(|_| Error::CorruptTable("bad precision".into()))?;
    if precision < R::DIGITS {
        return Err(Error::InvalidArgument(format!(
            "table stores {precision} significant digits but the reader needs {}",
            R::DIGITS
        )));
    }

    let tol = check_tol::<R>();
    let mut rows: Vec<DRow<R>> = Vec::new();
    let mut log_p_sum = 0.0f64;
    while let Some(line) = lines.next() {
        let rest = line
            .strip_prefix("prime ")
            .ok_or_else(|| Error::CorruptTable(format!("expected `prime ...`, found `{line}`")))?;
        let mut parts = rest.split_whitespace();
        let p: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptTable("bad prime value".into()))?;
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptTable("bad coefficient count".into()))?;
        if let Some(last) = rows.last() {
            if p <= last.prime {
                return Err(Error::CorruptTable(format!(
                    "row for prime {p} out of order after {}",
                    last.prime
                )));
            }
        }
        if p > y_max {
            return Err(Error::CorruptTable(format!(
                "row prime {p} exceeds ymax {y_max}"
            )));
        }
        let j = rows.len() + 1;
        if count != j.min(m) + 1 {
            return Err(Error::CorruptTable(format!(
                "row {j} (prime {p}) has {count} coefficients, expected {}",
                j.min(m) + 1
            )));
        }
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            let vline = lines
                .next()
                .ok_or_else(|| Error::CorruptTable("truncated row".into()))?;
            coeffs.push(parse_value::<R>(vline.trim(), "coefficient")?);
        }
        log_p_sum += (p as f64).ln();
        let d0 = coeffs[0].to_f64().unwrap_or(f64::NAN);
        if !((d0 - 1.0).abs() <= tol) {
            return Err(Error::CorruptTable(format!(
                "row for prime {p}: d_0 = {d0}, expected 1"
            )));
        }
        let d1 = coeffs[1].to_f64().unwrap_or(f64::NAN);
        let expected = log_p_sum / 2.0;
        if !((d1 - expected).abs() <= tol * expected.abs()) {
            return Err(Error::CorruptTable(format!(
                "row for prime {p}: d_1 = {d1} disagrees with (sum log p)/2 = {expected}"
            )));
        }
        rows.push(DRow { prime: p, coeffs });
    }
    if rows.is_empty() {
        return Err(Error::CorruptTable("table holds no rows".into()));
    }

    let zeta = zeta_even::<R>(m.max(2))?;
    let cseq = c_seq(m, &zeta);
    Ok(EnnolaTable {
        y_max,
        m,
        precision,
        cseq: cseq.coeffs().to_vec(),
        rows,
    })
}

/// Serialize a rho table (the stored `log rho` grid).
pub fn save_rho<R: Real>(table: &RhoTable<R>, destination: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{RHO_MAGIC} {VERSION}");
    let _ = writeln!(out, "umax {}", fmt_value(table.u_max()));
    let _ = writeln!(out, "h {}", fmt_value(table.h()));
    for &v in table.log_values() {
        let _ = writeln!(out, "{}", fmt_value(v));
    }
    std::fs::write(destination, out)?;
    Ok(())
}

/// Load a rho table, verifying version, grid shape, and the value at
/// `u = 2` against the analytic `1 - log 2`.
pub fn load_rho<R: Real>(source: &Path) -> Result<RhoTable<R>> {
    let text = std::fs::read_to_string(source)?;
    parse_rho(&text)
}

fn parse_rho<R: Real>(text: &str) -> Result<RhoTable<R>> {
    let mut lines = text.lines();
    check_header(lines.next(), RHO_MAGIC)?;
    let u_max: f64 = metadata_line(lines.next(), "umax")?
        .parse()
        .map_err(|_| Error::CorruptTable("bad umax".into()))?;
    let h: f64 = metadata_line(lines.next(), "h")?
        .parse()
        .map_err(|_| Error::CorruptTable("bad h".into()))?;
    if !(u_max >= 1.0) || !(h > 0.0) {
        return Err(Error::CorruptTable(format!(
            "implausible grid umax = {u_max}, h = {h}"
        )));
    }
    let inv_h_f = 1.0 / h;
    let inv_h = inv_h_f.round();
    if (inv_h_f - inv_h).abs() > 1e-9 * inv_h || inv_h < 1.0 {
        return Err(Error::CorruptTable(format!(
            "grid spacing {h} does not divide 1 evenly"
        )));
    }
    let inv_h = inv_h as u32;
    let n = (u_max * inv_h as f64 - 1e-9).ceil() as usize;
    let mut log_values = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let line = lines
            .next()
            .ok_or_else(|| Error::CorruptTable("truncated value grid".into()))?;
        log_values.push(parse_value::<R>(line.trim(), "grid value")?);
    }
    if lines.next().is_some() {
        return Err(Error::CorruptTable(
            "trailing data after the value grid".into(),
        ));
    }
    if u_max >= 2.0 {
        let at_two = log_values[2 * inv_h as usize]
            .to_f64()
            .unwrap_or(f64::NAN)
            .exp();
        let expected = 1.0 - std::f64::consts::LN_2;
        let tol = check_tol::<R>().max(1e-9);
        if !((at_two - expected).abs() <= tol * expected) {
            return Err(Error::CorruptTable(format!(
                "rho(2) = {at_two} disagrees with 1 - log 2"
            )));
        }
    }
    Ok(RhoTable::from_parts(u_max, inv_h, log_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dickman::build_rho;
    use crate::ennola::precompute_dtable;
    use crate::primes::PrimeTable;
    use proptest::prelude::*;

    fn tmpfile(name: &str) -> tempfile::TempDir {
        let _ = name;
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn dtable_round_trip_is_bit_exact() {
        let primes = PrimeTable::build(200).unwrap();
        let table = precompute_dtable::<f64>(&primes, 100, None, None).unwrap();
        let dir = tmpfile("dn");
        let path = dir.path().join("d.txt");
        save_dtable(&table, &path).unwrap();
        let loaded = load_dtable::<f64>(&path).unwrap();
        assert_eq!(table.y_max, loaded.y_max);
        assert_eq!(table.m, loaded.m);
        assert_eq!(table.rows.len(), loaded.rows.len());
        for (a, b) in table.rows.iter().zip(&loaded.rows) {
            assert_eq!(a.prime, b.prime);
            assert_eq!(a.coeffs.len(), b.coeffs.len());
            for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                assert_eq!(x.to_bits(), y.to_bits(), "prime {}", a.prime);
            }
        }
    }

    #[test]
    fn save_is_deterministic() {
        let primes = PrimeTable::build(64).unwrap();
        let table = precompute_dtable::<f64>(&primes, 50, None, None).unwrap();
        let dir = tmpfile("det");
        let (p1, p2) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        save_dtable(&table, &p1).unwrap();
        save_dtable(&table, &p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn corrupting_d1_is_detected() {
        let primes = PrimeTable::build(64).unwrap();
        let table = precompute_dtable::<f64>(&primes, 50, None, None).unwrap();
        let dir = tmpfile("corrupt");
        let path = dir.path().join("d.txt");
        save_dtable(&table, &path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        // Row for prime 2 starts after 4 header lines; its d_1 is line 6.
        let mut lines: Vec<&str> = text.lines().collect();
        let flipped = format!("-{}", lines[5].trim_start_matches('-'));
        lines[5] = &flipped;
        text = lines.join("\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::CorruptTable(_))
        ));
    }

    #[test]
    fn unknown_version_rejected() {
        let dir = tmpfile("ver");
        let path = dir.path().join("d.txt");
        std::fs::write(&path, "SMOOTHCOUNT-DN v9\nymax 2\nm 1\nprecision 15\n").unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::UnsupportedVersion(_))
        ));
        std::fs::write(&path, "not a table\n").unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::CorruptTable(_))
        ));
    }

    #[test]
    fn truncated_rows_rejected() {
        let primes = PrimeTable::build(64).unwrap();
        let table = precompute_dtable::<f64>(&primes, 50, None, None).unwrap();
        let dir = tmpfile("trunc");
        let path = dir.path().join("d.txt");
        save_dtable(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Cut inside the second row (its `prime` line survives, the
        // coefficients do not).
        let cut: String = text.lines().take(8).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, cut).unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::CorruptTable(_))
        ));
    }

    #[test]
    fn out_of_order_rows_rejected() {
        let dir = tmpfile("order");
        let path = dir.path().join("d.txt");
        let l2 = std::f64::consts::LN_2;
        let l3 = 3f64.ln();
        let body = format!(
            "SMOOTHCOUNT-DN v1\nymax 3\nm 1\nprecision 15\n\
             prime 3 2\n{:.20e}\n{:.20e}\nprime 2 2\n{:.20e}\n{:.20e}\n",
            1.0,
            l3 / 2.0,
            1.0,
            (l3 + l2) / 2.0,
        );
        std::fs::write(&path, body).unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::CorruptTable(_))
        ));
    }

    #[test]
    fn low_precision_table_refused_by_f64_reader() {
        let primes = PrimeTable::build(32).unwrap();
        let table = precompute_dtable::<f32>(&primes, 20, None, None).unwrap();
        let dir = tmpfile("prec");
        let path = dir.path().join("d.txt");
        save_dtable(&table, &path).unwrap();
        assert!(matches!(
            load_dtable::<f64>(&path),
            Err(Error::InvalidArgument(_))
        ));
        // The f32 reader accepts its own table back.
        assert!(load_dtable::<f32>(&path).is_ok());
    }

    #[test]
    fn rho_round_trip_and_spot_check() {
        let table = build_rho::<f64>(8.0, 1.0 / 128.0).unwrap();
        let dir = tmpfile("rho");
        let path = dir.path().join("rho.txt");
        save_rho(&table, &path).unwrap();
        let loaded = load_rho::<f64>(&path).unwrap();
        assert_eq!(table, loaded);

        // Corrupt the stored value at u = 2 and expect rejection.
        let text = std::fs::read_to_string(&path).unwrap();
        let idx = 3 + 2 * 128; // header + metadata + grid offset
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[idx] = fmt_value(-0.9f64);
        std::fs::write(&path, lines.join("\n")).unwrap();
        assert!(matches!(load_rho::<f64>(&path), Err(Error::CorruptTable(_))));
    }

    #[test]
    fn rho_truncation_and_trailing_data_rejected() {
        let table = build_rho::<f64>(4.0, 1.0 / 64.0).unwrap();
        let dir = tmpfile("rho2");
        let path = dir.path().join("rho.txt");
        save_rho(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        let cut: String = text.lines().take(50).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, cut).unwrap();
        assert!(matches!(load_rho::<f64>(&path), Err(Error::CorruptTable(_))));

        let extended = format!("{text}0.0\n");
        std::fs::write(&path, extended).unwrap();
        assert!(matches!(load_rho::<f64>(&path), Err(Error::CorruptTable(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn dtable_round_trip_any_small_bound(y_max in 2u64..120) {
            let primes = PrimeTable::build(128).unwrap();
            let table = precompute_dtable::<f64>(&primes, y_max, None, None).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("d.txt");
            save_dtable(&table, &path).unwrap();
            let loaded = load_dtable::<f64>(&path).unwrap();
            prop_assert_eq!(table, loaded);
        }
    }
}
