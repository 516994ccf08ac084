//! Trace serialization: CSV with a `#`-prefixed provenance header that
//! echoes the producing config, so every output file is self-describing
//! and reproducible from its own first lines.
//!
//! Floats are written with Rust's shortest-roundtrip formatting, which is
//! deterministic across runs and platforms; rerunning a config with the
//! same seed yields a byte-identical file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// One sampled row. Values are pre-formatted so that writing is a pure
/// concatenation (no late float formatting decisions).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: u64,
    pub oracle_calls: u64,
    pub values: Vec<String>,
    /// Nanoseconds since the run started; only with `timing = true`.
    pub elapsed_ns: Option<u128>,
}

/// A complete in-memory trace: column names, rows, and an optional
/// divergence marker carried into the file as a trailing comment.
#[derive(Debug, Clone)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<TraceRow>,
    pub diverged: Option<String>,
    pub timing: bool,
}

impl Trace {
    /// Index of `column` in the value columns (not counting
    /// iter/oracle_calls).
    pub fn column_index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    /// The numeric values of one column, `None` where a field is empty or
    /// non-numeric.
    pub fn column_values(&self, column: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.column_index(column)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.values.get(idx).and_then(|v| v.parse::<f64>().ok()))
                .collect(),
        )
    }
}

/// Formats a float exactly as trace files store it.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        let mut s = String::new();
        write!(s, "{v}").expect("write to String");
        s
    }
}

/// Renders the trace to its on-disk byte representation. `header_lines`
/// are prefixed with `# ` verbatim (config echo, version, anything the
/// producer wants to pin).
pub fn render(trace: &Trace, header_lines: &[String]) -> String {
    let mut out = String::new();
    for line in header_lines {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("iter,oracle_calls");
    for c in &trace.columns {
        out.push(',');
        out.push_str(c);
    }
    if trace.timing {
        out.push_str(",elapsed_ns");
    }
    out.push('\n');
    for row in &trace.rows {
        let _ = write!(out, "{},{}", row.iter, row.oracle_calls);
        for v in &row.values {
            out.push(',');
            out.push_str(v);
        }
        if trace.timing {
            let _ = write!(out, ",{}", row.elapsed_ns.unwrap_or(0));
        }
        out.push('\n');
    }
    if let Some(detail) = &trace.diverged {
        let _ = writeln!(out, "# diverged: {detail}");
    }
    out
}

/// Writes the rendered trace to `path`, creating parent directories.
pub fn write_trace(path: &Path, trace: &Trace, header_lines: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Io(format!("creating {}: {e}", path.display())))?;
    file.write_all(render(trace, header_lines).as_bytes())
        .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Header lines echoing the library version plus a TOML-serialized config.
pub fn provenance_header<T: serde::Serialize>(kind: &str, config: &T) -> Vec<String> {
    let mut lines = vec![format!(
        "produced-by: saddlebench {} ({kind})",
        env!("CARGO_PKG_VERSION")
    )];
    match toml::to_string(config) {
        Ok(text) => {
            lines.push("config:".into());
            lines.extend(text.lines().map(|l| format!("  {l}")));
        }
        Err(e) => lines.push(format!("config: <unserializable: {e}>")),
    }
    lines
}

/// Reads a trace CSV back, skipping `#` comments. Used by the plotter and
/// by tests; tolerant of files this crate did not produce as long as they
/// have an `iter` column first.
pub fn read_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut diverged = None;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(detail) = comment.trim().strip_prefix("diverged:") {
                diverged = Some(detail.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        match &columns {
            None => {
                if fields.first() != Some(&"iter") || fields.get(1) != Some(&"oracle_calls") {
                    return Err(Error::Config(format!(
                        "{}:{}: expected header starting `iter,oracle_calls`",
                        path.display(),
                        lineno + 1
                    )));
                }
                columns = Some(fields[2..].iter().map(|s| s.to_string()).collect());
            }
            Some(cols) => {
                if fields.len() != cols.len() + 2 {
                    return Err(Error::Config(format!(
                        "{}:{}: expected {} fields, found {}",
                        path.display(),
                        lineno + 1,
                        cols.len() + 2,
                        fields.len()
                    )));
                }
                let iter: u64 = fields[0].parse().map_err(|_| {
                    Error::Config(format!(
                        "{}:{}: bad iteration index `{}`",
                        path.display(),
                        lineno + 1,
                        fields[0]
                    ))
                })?;
                let oracle_calls: u64 = fields[1].parse().map_err(|_| {
                    Error::Config(format!(
                        "{}:{}: bad oracle count `{}`",
                        path.display(),
                        lineno + 1,
                        fields[1]
                    ))
                })?;
                rows.push(TraceRow {
                    iter,
                    oracle_calls,
                    values: fields[2..].iter().map(|s| s.to_string()).collect(),
                    elapsed_ns: None,
                });
            }
        }
    }
    let mut columns = columns
        .ok_or_else(|| Error::Config(format!("{}: no header row found", path.display())))?;
    let timing = columns.last().map(|c| c == "elapsed_ns").unwrap_or(false);
    if timing {
        columns.pop();
        for row in &mut rows {
            row.elapsed_ns = row.values.pop().and_then(|v| v.parse().ok());
        }
    }
    Ok(Trace { columns, rows, diverged, timing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> Trace {
        Trace {
            columns: vec!["grad_f_x".into(), "grad_f_y".into()],
            rows: vec![
                TraceRow {
                    iter: 0,
                    oracle_calls: 0,
                    values: vec![format_value(2.0), format_value(1.0)],
                    elapsed_ns: None,
                },
                TraceRow {
                    iter: 5,
                    oracle_calls: 10,
                    values: vec![format_value(0.125), format_value(1e-9)],
                    elapsed_ns: None,
                },
            ],
            diverged: None,
            timing: false,
        }
    }

    #[test]
    fn renders_header_comments_then_columns_then_rows() {
        let text = render(&sample_trace(), &["produced-by: test".into()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# produced-by: test");
        assert_eq!(lines[1], "iter,oracle_calls,grad_f_x,grad_f_y");
        assert_eq!(lines[2], "0,0,2,1");
        assert_eq!(lines[3], "5,10,0.125,0.000000001");
    }

    #[test]
    fn roundtrips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut trace = sample_trace();
        trace.diverged = Some("iter 5: x blew up".into());
        write_trace(&path, &trace, &["k: v".into()]).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back.columns, trace.columns);
        assert_eq!(back.rows, trace.rows);
        assert_eq!(back.diverged.as_deref(), Some("iter 5: x blew up"));
    }

    #[test]
    fn shortest_roundtrip_formatting_preserves_bits() {
        for &v in &[1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, -0.0, 7.25e17] {
            let s = format_value(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn column_lookup_handles_empty_fields() {
        let mut trace = sample_trace();
        trace.columns = vec!["gap_exact".into(), "gap_surrogate".into()];
        trace.rows[0].values = vec!["".into(), format_value(9.25)];
        trace.rows[1].values = vec![format_value(3.85), format_value(9.25)];
        let vals = trace.column_values("gap_exact").unwrap();
        assert_eq!(vals, vec![None, Some(3.85)]);
        assert!(trace.column_values("missing").is_none());
    }

    #[test]
    fn timing_column_is_separated_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timed.csv");
        let trace = Trace {
            columns: vec!["grad_f_x".into()],
            rows: vec![TraceRow {
                iter: 0,
                oracle_calls: 0,
                values: vec![format_value(1.0)],
                elapsed_ns: Some(1234),
            }],
            diverged: None,
            timing: true,
        };
        write_trace(&path, &trace, &[]).unwrap();
        let back = read_trace(&path).unwrap();
        assert!(back.timing);
        assert_eq!(back.columns, vec!["grad_f_x".to_string()]);
        assert_eq!(back.rows[0].elapsed_ns, Some(1234));
        assert_eq!(back.rows[0].values, vec![format_value(1.0)]);
    }

    #[test]
    fn provenance_header_embeds_the_config() {
        #[derive(serde::Serialize)]
        struct Mini {
            horizon: u64,
        }
        let lines = provenance_header("run", &Mini { horizon: 7 });
        assert!(lines[0].contains("saddlebench"));
        assert!(lines.iter().any(|l| l.contains("horizon = 7")));
    }
}
