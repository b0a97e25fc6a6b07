// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV emission: 9 significant digits, `.` decimal separator, no locale,
//! no timestamps — repeated runs are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::lindblad::Trajectory;
use crate::operators::ATOM_DIM;

/// Format with 9 significant digits (plain notation for moderate exponents,
/// scientific otherwise).
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // strip trailing zeros but keep at least one digit after the point
        if s.contains('.') {
            let t = s.trim_end_matches('0');
            let t = t.strip_suffix('.').unwrap_or(t);
            t.to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

/// Write one CSV file with a header row and numeric body.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|&v| fmt_sig9(v)).collect();
        buf.push_str(&cells.join(","));
        buf.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}

/// Serialize a trajectory with the standard observable columns
/// (`t_ns, P_00..P_33, n_cav, Re_a, Im_a`).
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let header = [
        "t_ns", "P_00", "P_11", "P_22", "P_33", "n_cav", "Re_a", "Im_a",
    ];
    let a = traj.series("a")?;
    let n_cav = traj.series("n_cav")?;
    let mut rows = Vec::with_capacity(traj.times.len());
    for (k, (&t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = Vec::with_capacity(header.len());
        row.push(t * 1e9);
        for lvl in 0..ATOM_DIM {
            row.push(state.atom_population(lvl));
        }
        row.push(n_cav[k].re);
        row.push(a[k].re);
        row.push(a[k].im);
        rows.push(row);
    }
    write_csv(path, &header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(0.5), "0.5");
        assert_eq!(fmt_sig9(123.456789123), "123.456789");
        assert_eq!(fmt_sig9(0.000123456789123), "0.000123456789");
        assert_eq!(fmt_sig9(-2.5e-12), "-2.50000000e-12");
        assert_eq!(fmt_sig9(1.23456789123e10), "1.23456789e10");
    }

    #[test]
    fn csv_bytes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        let rows = vec![vec![1.0, 2.5e-13], vec![0.33333333333, 4.0]];
        write_csv(&p1, &["x", "y"], &rows).unwrap();
        write_csv(&p2, &["x", "y"], &rows).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        let text = fs::read_to_string(&p1).unwrap();
        assert!(text.starts_with("x,y\n"));
        assert!(!text.contains(' '));
    }
}
