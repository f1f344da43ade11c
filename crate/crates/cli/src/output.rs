//! Report and plot-data files.

use crate::error::CliError;
use abplab::suite::Series;
use abplab::CheckReport;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Shortest round-trip form, with an exponent for very small or large values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub const CSV_HEADER: [&str; 6] = ["name", "anchor", "lhs", "rhs", "tol", "pass"];

/// Reports as CSV. `tol` is the effective absolute slack, so
/// `pass == (lhs <= rhs + tol)` can be recomputed from a row.
pub fn emit_csv(reports: &[CheckReport]) -> Result<Vec<u8>, CliError> {
    if reports.is_empty() {
        return Err(CliError::Empty("reports"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.anchor.clone(),
            num(r.lhs),
            num(r.rhs),
            num(r.effective_tol()),
            r.pass.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Whitespace-separated `x y` lines.
pub fn emit_plotdata(series: &Series) -> Result<Vec<u8>, CliError> {
    if series.points.is_empty() {
        return Err(CliError::Empty("plot series"));
    }
    let mut out = Vec::new();
    for [x, y] in &series.points {
        writeln!(out, "{} {}", num(*x), num(*y))?;
    }
    Ok(out)
}

/// Arbitrary rows with a header.
pub fn emit_table(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Writes every file or none: all contents go to temporary siblings first,
/// and are renamed into place only once each write has succeeded.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let stage = |staged: &mut Vec<(PathBuf, PathBuf)>| -> Result<(), CliError> {
        for (name, bytes) in files {
            let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
            let mut f = fs::File::create(&tmp)?;
            staged.push((tmp, dir.join(name)));
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        Ok(())
    };
    if let Err(e) = stage(&mut staged) {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest)?;
        written.push(dest);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_report_is_two_lines() {
        let r = CheckReport::inequality("a.b", "anchor, with comma", 1.0, 2.0).tol(0.5, 1e-20);
        let text = String::from_utf8(emit_csv(&[r]).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["name,anchor,lhs,rhs,tol,pass", "a.b,\"anchor, with comma\",1.0,2.0,1.0,true"]);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(emit_csv(&[]), Err(CliError::Empty(_))));
        assert!(matches!(emit_plotdata(&Series::new("s", "x", "y", vec![])), Err(CliError::Empty(_))));
    }

    #[test]
    fn plot_lines_are_two_columns() {
        let s = Series::new("s", "x", "y", vec![[0.5, 1e-30], [1.0, f64::INFINITY]]);
        assert_eq!(String::from_utf8(emit_plotdata(&s).unwrap()).unwrap(), "0.5 1e-30\n1.0 inf\n");
    }

    #[test]
    fn write_all_replaces_files() {
        let dir = tempfile::tempdir().unwrap();
        let first = write_all(dir.path(), &[("a.txt".into(), b"one".to_vec())]).unwrap();
        write_all(dir.path(), &[("a.txt".into(), b"two".to_vec())]).unwrap();
        assert_eq!(fs::read(&first[0]).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
