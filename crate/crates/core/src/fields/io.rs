//! Field files: a short text header followed by one CSV row per cell.
//!
//! ```text
//! # fracgrad field v1
//! dim 2
//! n 32 32
//! origin -1e0 -1e0
//! extent 2e0 2e0
//! kind scalar
//! data
//! 1.5e-1
//! ...
//! ```
//!
//! `kind` is `scalar`, `vector` (one column per component) or `mask`
//! (0/1). Floats use the shortest round-trip representation, so reading a
//! written file reproduces it bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Grid, ScalarField, VectorField, VoxelSet};

const MAGIC: &str = "# fracgrad field v1";

#[derive(Debug, Clone, PartialEq)]
pub enum FieldFile {
    Scalar(ScalarField),
    Vector(VectorField),
    Mask(VoxelSet),
}

impl FieldFile {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldFile::Scalar(f) => f.grid(),
            FieldFile::Vector(f) => f.grid(),
            FieldFile::Mask(f) => f.grid(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            FieldFile::Scalar(_) => "scalar",
            FieldFile::Vector(_) => "vector",
            FieldFile::Mask(_) => "mask",
        }
    }

    pub fn to_text(&self) -> String {
        let g = self.grid();
        let mut s = String::new();
        let join_f = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "dim {}", g.dim());
        let _ = writeln!(
            s,
            "n {}",
            g.shape().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
        );
        let _ = writeln!(s, "origin {}", join_f(g.origin()));
        let _ = writeln!(s, "extent {}", join_f(g.extent()));
        let _ = writeln!(s, "kind {}", self.kind());
        let _ = writeln!(s, "data");
        match self {
            FieldFile::Scalar(f) => {
                for v in f.values() {
                    let _ = writeln!(s, "{v:e}");
                }
            }
            FieldFile::Vector(f) => {
                for i in 0..g.len() {
                    let row: Vec<String> =
                        f.components().iter().map(|c| format!("{:e}", c[i])).collect();
                    let _ = writeln!(s, "{}", row.join(","));
                }
            }
            FieldFile::Mask(m) => {
                for b in m.mask() {
                    let _ = writeln!(s, "{}", u8::from(*b));
                }
            }
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<FieldFile> {
        let bad = |reason: String| Error::FieldFormat {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(bad("missing header line".into()));
        }
        let mut dim = None;
        let mut n: Option<Vec<usize>> = None;
        let mut origin: Option<Vec<f64>> = None;
        let mut extent: Option<Vec<f64>> = None;
        let mut kind = None;
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "data" {
                break;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            match key {
                "dim" => {
                    dim = Some(
                        rest.first()
                            .and_then(|v| v.parse::<usize>().ok())
                            .ok_or_else(|| bad("bad dim".into()))?,
                    )
                }
                "n" => {
                    n = Some(
                        rest.iter()
                            .map(|v| v.parse::<usize>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|e| bad(format!("bad n: {e}")))?,
                    )
                }
                "origin" | "extent" => {
                    let v: Vec<f64> = rest
                        .iter()
                        .map(|v| v.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| bad(format!("bad {key}: {e}")))?;
                    if key == "origin" {
                        origin = Some(v);
                    } else {
                        extent = Some(v);
                    }
                }
                "kind" => kind = rest.first().map(|s| s.to_string()),
                "" => {}
                other => return Err(bad(format!("unknown header key `{other}`"))),
            }
        }
        let dim = dim.ok_or_else(|| bad("missing dim".into()))?;
        let grid = Grid::new(
            &origin.ok_or_else(|| bad("missing origin".into()))?,
            &extent.ok_or_else(|| bad("missing extent".into()))?,
            &n.ok_or_else(|| bad("missing n".into()))?,
        )?;
        if grid.dim() != dim {
            return Err(bad("dim disagrees with header vectors".into()));
        }
        let rows: Vec<&str> = lines.map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.len() != grid.len() {
            return Err(bad(format!(
                "expected {} data rows, found {}",
                grid.len(),
                rows.len()
            )));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad value `{s}`: {e}")));
        match kind.as_deref() {
            Some("scalar") => {
                let vals = rows.iter().map(|r| num(r)).collect::<Result<Vec<_>>>()?;
                Ok(FieldFile::Scalar(ScalarField::new(grid, vals)?))
            }
            Some("vector") => {
                let mut comps = vec![Vec::with_capacity(rows.len()); dim];
                for r in &rows {
                    let cols: Vec<&str> = r.split(',').collect();
                    if cols.len() != dim {
                        return Err(bad(format!("vector row has {} columns", cols.len())));
                    }
                    for (c, v) in comps.iter_mut().zip(cols) {
                        c.push(num(v.trim())?);
                    }
                }
                Ok(FieldFile::Vector(VectorField::new(grid, comps)?))
            }
            Some("mask") => {
                let mask = rows
                    .iter()
                    .map(|r| match *r {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(bad(format!("bad mask value `{other}`"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FieldFile::Mask(VoxelSet::new(grid, mask)?))
            }
            other => Err(bad(format!("unknown kind {other:?}"))),
        }
    }
}

pub fn write_field(path: &Path, field: &FieldFile) -> Result<()> {
    fs::write(path, field.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FieldFile::parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scalar_roundtrip_is_bit_exact(vals in proptest::collection::vec(-1e300f64..1e300, 12)) {
            let g = Grid::new(&[-0.3, 1e-7], &[1.7, 2.5], &[3, 4]).unwrap();
            let f = FieldFile::Scalar(ScalarField::new(g, vals).unwrap());
            let back = FieldFile::parse(&f.to_text(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn vector_and_mask_roundtrip(vals in proptest::collection::vec(-10.0f64..10.0, 16), bits in proptest::collection::vec(any::<bool>(), 8)) {
            let g = Grid::new(&[0.0, 0.0, 0.0], &[1.0, 1.0, 3.0], &[2, 2, 2]).unwrap();
            let comps = vec![vals[..8].to_vec(), vals[8..].to_vec(), vals[..8].iter().map(|v| v * 1e-200).collect()];
            let f = FieldFile::Vector(VectorField::new(g.clone(), comps).unwrap());
            prop_assert_eq!(FieldFile::parse(&f.to_text(), Path::new("mem")).unwrap(), f);
            let m = FieldFile::Mask(VoxelSet::new(g, bits).unwrap());
            prop_assert_eq!(FieldFile::parse(&m.to_text(), Path::new("mem")).unwrap(), m);
        }
    }

    #[test]
    fn file_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.field");
        let g = Grid::uniform(2, 0.0, 1.0, 3).unwrap();
        let f = FieldFile::Scalar(ScalarField::from_fn(g, |x| x[0] * 3.1 - x[1]).unwrap());
        write_field(&p, &f).unwrap();
        assert_eq!(read_field(&p).unwrap(), f);
        assert!(read_field(&dir.path().join("missing")).is_err());
        let truncated: String = f.to_text().lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(FieldFile::parse(&truncated, &p).is_err());
    }
}
