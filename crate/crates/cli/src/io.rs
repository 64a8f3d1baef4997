use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use almostdom::Sample;
use anyhow::{bail, Context, Result};

/// Reads the first column of a CSV file as a sample. A first row that does
/// not parse as a number is taken to be a header; any later one is an error.
pub fn read_sample(path: &Path) -> Result<Sample> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record.get(0).unwrap_or("");
        if field.is_empty() && record.len() <= 1 {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => bail!("{}: line {line}: non-finite value '{field}'", path.display()),
            Err(_) if first => {}
            Err(_) => bail!("{}: line {line}: not a number: '{field}'", path.display()),
        }
        first = false;
    }
    if values.is_empty() {
        bail!("{}: no numeric rows in the first column", path.display());
    }
    Ok(Sample::new(values)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = BufWriter::new(file);
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("cannot write {}", path.display()))
}

/// `x` rounded to six significant digits, without exponent for moderate magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
