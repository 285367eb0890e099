//! File formats: forward-rate samples and curve grids as CSV, structured
//! results as JSON. Every output carries `format_version` 1 (a `#` comment
//! line in CSV, a field in JSON).

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulation::ShortRatePath;

pub const FORMAT_VERSION: u32 = 1;

/// Header of forward-rate sample files.
pub const SAMPLE_HEADER: [&str; 2] = ["tau_years", "rate"];

/// JSON payload tagged with [`FORMAT_VERSION`].
#[derive(Debug, Serialize)]
pub struct Versioned<T> {
    pub format_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Versioned {
            format_version: FORMAT_VERSION,
            body,
        }
    }
}

pub fn to_json_string<T: Serialize>(body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned::new(body))?;
    s.push('\n');
    Ok(s)
}

/// Reads `tau_years,rate` samples. Lines starting with `#` are ignored.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_parse_error(e, 1))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != SAMPLE_HEADER {
        return Err(Error::Parse {
            row: headers.position().map_or(1, |p| p.line() as usize),
            column: "header".into(),
            message: format!("expected `tau_years,rate`, found `{}`", got.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_parse_error(e, 0))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0.0; 2];
        for (i, name) in SAMPLE_HEADER.iter().enumerate() {
            let field = record.get(i).ok_or_else(|| Error::Parse {
                row,
                column: name.to_string(),
                message: "missing field".into(),
            })?;
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("`{field}` is not finite"),
                });
            }
            values[i] = v;
        }
        out.push((values[0], values[1]));
    }
    Ok(out)
}

fn csv_parse_error(e: csv::Error, fallback_row: u64) -> Error {
    let row = e.position().map_or(fallback_row, |p| p.line()) as usize;
    Error::Parse {
        row,
        column: "*".into(),
        message: e.to_string(),
    }
}

/// Writes a two-column table under a version comment.
pub fn write_pairs<W: Write>(
    mut w: W,
    header: [&str; 2],
    rows: impl IntoIterator<Item = (f64, f64)>,
) -> Result<()> {
    writeln!(w, "# format_version: {FORMAT_VERSION}")?;
    writeln!(w, "{},{}", header[0], header[1])?;
    for (a, b) in rows {
        writeln!(w, "{a},{b}")?;
    }
    Ok(())
}

/// `path_id,t_years,rate`, one row per path point.
pub fn write_ensemble<W: Write>(mut w: W, paths: &[ShortRatePath]) -> Result<()> {
    writeln!(w, "# format_version: {FORMAT_VERSION}")?;
    writeln!(w, "path_id,t_years,rate")?;
    for (id, path) in paths.iter().enumerate() {
        for (t, r) in path.points() {
            writeln!(w, "{id},{t},{r}")?;
        }
    }
    Ok(())
}
