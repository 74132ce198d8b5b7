use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fracgrad_core::fields::{write_field, FieldFile};
use fracgrad_core::verify::Outcome;

/// Writes every artifact of `outcome` under `dir` and the report last, so
/// its `files` list names everything beside it.
pub fn write_outcome(dir: &Path, outcome: &mut Outcome) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut files = Vec::new();
    for t in &outcome.report.tables {
        let name = format!("{}.csv", t.name);
        write(dir, &name, &t.to_csv())?;
        files.push(name);
    }
    for p in &outcome.plots {
        let name = format!("{}.dat", p.name);
        write(dir, &name, &p.to_text())?;
        files.push(name);
    }
    for (fname, f) in &outcome.fields {
        let name = format!("{fname}.field");
        write_field(&dir.join(&name), &FieldFile::Scalar(f.clone()))?;
        files.push(name);
    }
    files.push("report.json".into());
    outcome.report.files = files;
    let path = dir.join("report.json");
    write(dir, "report.json", &outcome.report.to_json())?;
    Ok(path)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
}
