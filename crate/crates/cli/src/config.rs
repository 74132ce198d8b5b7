//! Config loading: TOML file, then `key=value` overrides, then typed
//! deserialization. Keys are checked against the defaults first so an
//! unknown key is reported by its full dotted name.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fracgrad_core::verify::ExperimentConfig;
use toml::{Table, Value};

pub fn defaults() -> Table {
    Table::try_from(ExperimentConfig::default()).expect("default config serializes")
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read config file {}", p.display()))?;
            text.parse::<Table>().with_context(|| format!("cannot parse config file {}", p.display()))?
        }
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    check_keys(&table, &defaults(), "")?;
    let cfg: ExperimentConfig = Value::Table(table).try_into().context("invalid config")?;
    Ok(cfg)
}

/// Parses the right-hand side as a TOML value; a bare comma list becomes
/// an array and anything else unparsable a string.
pub fn parse_value(raw: &str) -> Value {
    let attempt = |s: &str| s.parse::<Table>().ok().and_then(|mut t| t.remove("v"));
    if let Some(v) = attempt(&format!("v = {raw}")) {
        return v;
    }
    if raw.contains(',') {
        if let Some(v) = attempt(&format!("v = [{raw}]")) {
            return v;
        }
    }
    Value::String(raw.to_string())
}

pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override key `{key}`: `{p}` is not a section"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

fn check_keys(table: &Table, reference: &Table, prefix: &str) -> Result<()> {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match reference.get(k) {
            None => bail!("unknown config key `{path}`"),
            Some(Value::Table(r)) => match v {
                Value::Table(t) => check_keys(t, r, &path)?,
                _ => bail!("config key `{path}` must be a section"),
            },
            Some(_) => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("0.5"), Value::Float(0.5));
        assert_eq!(
            parse_value("1e-2,1e-3"),
            Value::Array(vec![Value::Float(1e-2), Value::Float(1e-3)])
        );
        assert_eq!(parse_value("abc"), Value::String("abc".into()));
    }

    #[test]
    fn override_wins() {
        let cfg = load(None, &["counterexample.d=3".into(), "seed=7".into()]).unwrap();
        assert_eq!(cfg.counterexample.d, 3);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_key_named() {
        let e = load(None, &["lemma1.alphaz=0.5".into()]).unwrap_err();
        assert!(e.to_string().contains("`lemma1.alphaz`"), "{e}");
        let e = load(None, &["nosuch.d=2".into()]).unwrap_err();
        assert!(e.to_string().contains("`nosuch`"), "{e}");
    }
}
