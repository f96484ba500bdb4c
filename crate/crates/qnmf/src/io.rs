//! Matrix CSV and QUBO text formats.
//!
//! Matrix files hold one row per line, comma-separated decimals, no header.
//! Lines starting with `#` are comments and blank lines are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use qnmf_core::qubo::QuboProblem;
use qnmf_core::Matrix;

use crate::error::{CliError, CliResult};

pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(file, path)
}

/// Parses matrix CSV from `reader`; `path` only labels diagnostics.
pub fn parse_matrix<R: Read>(reader: R, path: &Path) -> CliResult<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                let message = match e.kind() {
                    csv::ErrorKind::UnequalLengths {
                        expected_len, len, ..
                    } => format!("ragged row: expected {expected_len} values, found {len}"),
                    _ => e.to_string(),
                };
                return Err(parse_err(line, message));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(x) if x.is_finite() => row.push(x),
                _ => {
                    return Err(parse_err(
                        line,
                        format!("column {}: {field:?} is not a finite number", j + 1),
                    ))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    Ok(Matrix::from_rows(&rows)?)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_error(path, e))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|x| fmt_f64(*x)))
            .map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `# offset <value>`, then `e e a(e)` for every variable, then
/// `e f b(e,f)` for every nonzero coupling.
pub fn write_qubo_text<W: Write>(mut out: W, qubo: &QuboProblem) -> std::io::Result<()> {
    writeln!(out, "# offset {}", fmt_f64(qubo.offset()))?;
    for (e, a) in qubo.linear().iter().enumerate() {
        writeln!(out, "{e} {e} {}", fmt_f64(*a))?;
    }
    for (&(e, f), b) in qubo.quadratic() {
        writeln!(out, "{e} {f} {}", fmt_f64(*b))?;
    }
    Ok(())
}

pub fn save_qubo_text(path: &Path, qubo: &QuboProblem) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_qubo_text(&mut out, qubo).map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Reads the format of [`write_qubo_text`]. The variable count is one past
/// the largest index mentioned.
pub fn parse_qubo_text<R: Read>(reader: R, path: &Path) -> CliResult<QuboProblem> {
    let parse_err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut offset = 0.0;
    let mut terms = Vec::new();
    let mut n_vars = 0;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("offset") {
                offset = value
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad offset {:?}", value.trim())))?;
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [e, f, value] = parts[..] else {
            return Err(parse_err(lineno, "expected `e f value`".into()));
        };
        let e: usize = e
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad index {e:?}")))?;
        let f: usize = f
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad index {f:?}")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad coefficient {value:?}")))?;
        n_vars = n_vars.max(e.max(f) + 1);
        terms.push((lineno, e, f, value));
    }
    let mut qubo = QuboProblem::zeros(n_vars);
    qubo.set_offset(offset)?;
    for (lineno, e, f, value) in terms {
        let set = if e == f {
            qubo.set_linear(e, value)
        } else {
            qubo.set_quadratic(e.min(f), e.max(f), value)
        };
        set.map_err(|err| parse_err(lineno, err.to_string()))?;
    }
    Ok(qubo)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn csv_write_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Internal(format!("{}: csv writer: {other:?}", path.display())),
    }
}
