//! Scalar-field files.
//!
//! * csv: a header `# nx ny x_min x_max y_min y_max`, then one row per x index
//!   holding the ny values of that row, comma separated.
//! * bin: magic `GFLD1`, then little-endian `u32 nx, u32 ny, f64 x_min,
//!   f64 x_max, f64 y_min, f64 y_max` and `nx * ny` f64 values, x slow.
//!
//! Both formats round-trip bit for bit (csv values use the shortest decimal
//! representation that parses back to the same f64).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};

pub const MAGIC: &[u8; 5] = b"GFLD1";
const HEADER_LEN: usize = 5 + 4 + 4 + 4 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldFormat {
    #[default]
    Csv,
    Bin,
}

impl FieldFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FieldFormat::Csv => "csv",
            FieldFormat::Bin => "bin",
        }
    }
}

impl FromStr for FieldFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(FieldFormat::Csv),
            "bin" => Ok(FieldFormat::Bin),
            other => Err(format!("unknown format '{other}' (expected csv or bin)")),
        }
    }
}

/// Field samples as stored on disk. Unlike [`Grid2D`] this carries no
/// minimum size, so any `nx x ny` array can be written.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// `values[ix * ny + iy]`.
    pub values: Vec<f64>,
}

impl From<&ScalarField2D> for FieldFile {
    fn from(f: &ScalarField2D) -> Self {
        let g = f.grid;
        Self {
            nx: g.nx,
            ny: g.ny,
            x_min: g.x_min,
            x_max: g.x_max,
            y_min: g.y_min,
            y_max: g.y_max,
            values: f.values.clone(),
        }
    }
}

impl FieldFile {
    pub fn into_field(self) -> Result<ScalarField2D> {
        let g = Grid2D::new(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)?;
        ScalarField2D::from_values(g, self.values)
    }

    fn check(&self, path: &Path) -> Result<()> {
        if self.values.len() != self.nx * self.ny {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("{} values for a {}x{} field", self.values.len(), self.nx, self.ny),
            });
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {} {} {} {} {} {}",
            self.nx, self.ny, self.x_min, self.x_max, self.y_min, self.y_max
        );
        for row in self.values.chunks(self.ny.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_bin(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(self.nx as u32).to_le_bytes());
        b.extend_from_slice(&(self.ny as u32).to_le_bytes());
        for v in [self.x_min, self.x_max, self.y_min, self.y_max] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn from_bin(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            message,
        };
        if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
            return Err(bad("missing GFLD1 header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let (nx, ny) = (u32_at(5), u32_at(9));
        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(8))
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or_else(|| bad(format!("size overflow for {nx}x{ny}")))?;
        if bytes.len() != expected {
            return Err(bad(format!(
                "{} bytes, expected {expected} for a {nx}x{ny} field",
                bytes.len()
            )));
        }
        let values = (0..nx * ny).map(|i| f64_at(HEADER_LEN + 8 * i)).collect();
        Ok(Self {
            nx,
            ny,
            x_min: f64_at(13),
            x_max: f64_at(21),
            y_min: f64_at(29),
            y_max: f64_at(37),
            values,
        })
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
        let fields: Vec<&str> = header
            .strip_prefix('#')
            .ok_or_else(|| parse_err(1, "header must start with '#'".into()))?
            .split_whitespace()
            .collect();
        if fields.len() != 6 {
            return Err(parse_err(
                1,
                format!("header needs 6 fields, found {}", fields.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(1, format!("'{s}': {e}")))
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(1, format!("'{s}': {e}")));
        let (nx, ny) = (int(fields[0])?, int(fields[1])?);
        let mut values = Vec::with_capacity(nx * ny);
        let mut rows = 0;
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(i + 1, format!("'{c}': {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != ny {
                return Err(parse_err(i + 1, format!("{} values, expected {ny}", row.len())));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != nx {
            return Err(parse_err(
                text.lines().count(),
                format!("{rows} rows, expected {nx}"),
            ));
        }
        Ok(Self {
            nx,
            ny,
            x_min: num(fields[2])?,
            x_max: num(fields[3])?,
            y_min: num(fields[4])?,
            y_max: num(fields[5])?,
            values,
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_field_file(file: &FieldFile, path: &Path, format: FieldFormat) -> Result<()> {
    file.check(path)?;
    let bytes = match format {
        FieldFormat::Csv => file.to_csv().into_bytes(),
        FieldFormat::Bin => file.to_bin(),
    };
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

pub fn write_field(field: &ScalarField2D, path: &Path, format: FieldFormat) -> Result<()> {
    write_field_file(&FieldFile::from(field), path, format)
}

/// Reads either format; binary files are recognised by their magic bytes.
pub fn read_field_file(path: &Path) -> Result<FieldFile> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.starts_with(MAGIC) {
        FieldFile::from_bin(&bytes, path)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("not UTF-8 text: {e}"),
        })?;
        FieldFile::from_csv(&text, path)
    }
}

pub fn read_field(path: &Path) -> Result<ScalarField2D> {
    read_field_file(path)?.into_field()
}

/// Column table with a header row, one line per sample.
pub fn table_csv(headers: &[&str], columns: &[&[f64]]) -> String {
    let mut s = headers.join(",");
    s.push('\n');
    let n = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    for i in 0..n {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| c.get(i).map(|v| v.to_string()).unwrap_or_default())
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}
