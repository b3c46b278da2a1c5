//! CSV ingestion of time series and tidy CSV output.
//!
//! Input files hold one observation per row. A first row containing any
//! non-numeric field is a header; a header whose first column is named `t`
//! (or `time`) marks that column as timestamps. Without timestamps the row
//! index is used. Empty or non-numeric cells are rejected.

use std::io::{Read, Write};

use crate::cde::{ConvergenceReport, Trajectory};
use crate::error::{invalid, Result};
use crate::kernels::{GramMatrix, PdeGrid};
use crate::paths::TimeSeries;

/// Shortest decimal form is not used so that every value carries 17
/// significant digits, which round-trips any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_series(path: impl AsRef<std::path::Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
    parse_series(file).map_err(|e| match e {
        crate::Error::InvalidInput(m) => invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_series<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?);
    }
    let first = rows.first().ok_or_else(|| invalid("no rows"))?;
    let header = first.iter().any(|f| f.parse::<f64>().is_err());
    let has_time = header
        && matches!(
            first.get(0).map(str::to_ascii_lowercase).as_deref(),
            Some("t") | Some("time")
        );
    let body = if header { &rows[1..] } else { &rows[..] };
    let mut timestamps = Vec::with_capacity(body.len());
    let mut values = Vec::with_capacity(body.len());
    for (i, rec) in body.iter().enumerate() {
        let line = i + 1 + header as usize;
        let mut nums = Vec::with_capacity(rec.len());
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                invalid(format!("row {line}, column {}: {field:?} is not a number", j + 1))
            })?;
            if !v.is_finite() {
                return Err(invalid(format!("row {line}, column {}: missing or non-finite value", j + 1)));
            }
            nums.push(v);
        }
        if has_time {
            timestamps.push(nums.remove(0));
        } else {
            timestamps.push(i as f64);
        }
        if nums.is_empty() {
            return Err(invalid(format!("row {line} has no coordinates")));
        }
        values.push(nums);
    }
    TimeSeries::new(timestamps, values)
}

fn write_rows<W: Write>(mut w: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.join(","))?;
    }
    Ok(())
}

/// Columns `t,x1,...,xd`.
pub fn write_series<W: Write>(w: W, ts: &TimeSeries) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=ts.dim()).map(|i| format!("x{i}")));
    write_rows(
        w,
        &header,
        ts.timestamps().iter().zip(ts.values()).map(|(t, v)| {
            std::iter::once(*t).chain(v.iter().copied()).map(format_f64).collect()
        }),
    )
}

/// Columns `t,y1,...,ye`.
pub fn write_trajectory<W: Write>(w: W, tr: &Trajectory) -> Result<()> {
    let e = tr.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=e).map(|i| format!("y{i}")));
    write_rows(
        w,
        &header,
        tr.times.iter().zip(&tr.states).map(|(t, v)| {
            std::iter::once(*t).chain(v.iter().copied()).map(format_f64).collect()
        }),
    )
}

/// Long format `row,col,value` with path identifiers.
pub fn write_gram<W: Write>(w: W, g: &GramMatrix) -> Result<()> {
    let header = ["row", "col", "value"].map(String::from);
    write_rows(
        w,
        &header,
        (0..g.rows()).flat_map(|i| {
            (0..g.cols()).map(move |j| {
                vec![
                    g.row_ids[i].clone(),
                    g.col_ids[j].clone(),
                    format_f64(g.get(i, j)),
                ]
            })
        }),
    )
}

/// Long format `p,q,value` over grid indices.
pub fn write_pde_grid<W: Write>(w: W, grid: &PdeGrid) -> Result<()> {
    let header = ["p", "q", "value"].map(String::from);
    write_rows(
        w,
        &header,
        (0..grid.rows).flat_map(|p| {
            (0..grid.cols).map(move |q| vec![p.to_string(), q.to_string(), format_f64(grid.get(p, q))])
        }),
    )
}

/// Columns `steps,step_size,error`.
pub fn write_convergence<W: Write>(w: W, report: &ConvergenceReport) -> Result<()> {
    let header = ["steps", "step_size", "error"].map(String::from);
    write_rows(
        w,
        &header,
        report
            .rows
            .iter()
            .map(|r| vec![r.steps.to_string(), format_f64(r.step_size), format_f64(r.error)]),
    )
}
