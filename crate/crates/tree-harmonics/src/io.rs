//! File formats used by the CLI: small CSV tables for functions and
//! quadrature rules, JSON for measures and run statistics.
//!
//! All writers go through a write-then-rename so a crashed run never
//! leaves a truncated file behind; all readers attach one-based line
//! numbers to parse failures.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergroup::{Density, RadialMeasure};
use crate::radial::{RadialFunction, TreeFunction};
use crate::spherical::{GaussRule, ParamKind, SphericalParameter};
use crate::words::Word;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write atomically: stage into a sibling temporary file, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = path.with_extension("tmp~");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    if let Some(dir) = dir {
        // Best effort: persist the rename itself.
        if let Ok(d) = fs::File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {field}: {s:?}")))
}

/// Split a CSV data line, skipping blanks and `#` comments; returns the
/// fields or `None` for a skippable line.
fn csv_fields(raw: &str) -> Option<Vec<&str>> {
    let line = raw.trim();
    if line.is_empty() || line.starts_with('#') {
        return None;
    }
    Some(line.split(',').map(str::trim).collect())
}

fn is_header(fields: &[&str]) -> bool {
    fields
        .first()
        .is_some_and(|f| f.parse::<f64>().is_err() && !f.is_empty())
}

// ---------------------------------------------------------------------------
// Radial functions: `n,re,im` rows.

pub fn radial_to_csv(x: &RadialFunction) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, v) in x.values().iter().enumerate() {
        out.push_str(&format!("{n},{:.17e},{:.17e}\n", v.re, v.im));
    }
    out
}

pub fn write_radial(path: &Path, x: &RadialFunction) -> Result<()> {
    write_atomic(path, &radial_to_csv(x))
}

pub fn radial_from_csv(rank: u32, text: &str) -> Result<RadialFunction> {
    let mut values: Vec<(usize, Complex64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(fields) = csv_fields(raw) else {
            continue;
        };
        if i == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, got {}", fields.len())));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line, format!("invalid level: {:?}", fields[0])))?;
        let re = parse_f64(line, "re", fields[1])?;
        let im = parse_f64(line, "im", fields[2])?;
        values.push((n, Complex64::new(re, im)));
    }
    let len = values.iter().map(|&(n, _)| n + 1).max().unwrap_or(0);
    let mut v = vec![Complex64::ZERO; len];
    for (n, z) in values {
        v[n] = z;
    }
    Ok(RadialFunction::new(rank, v))
}

pub fn read_radial(rank: u32, path: &Path) -> Result<RadialFunction> {
    radial_from_csv(rank, &read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Tree functions: `word,re,im` rows, words in letter syntax (`a+b-`).

pub fn tree_to_csv(x: &TreeFunction) -> String {
    let mut out = String::from("word,re,im\n");
    for (w, v) in x.support() {
        out.push_str(&format!("{w},{:.17e},{:.17e}\n", v.re, v.im));
    }
    out
}

pub fn write_tree(path: &Path, x: &TreeFunction) -> Result<()> {
    write_atomic(path, &tree_to_csv(x))
}

pub fn tree_from_csv(rank: u32, text: &str) -> Result<TreeFunction> {
    let mut x = TreeFunction::new(rank);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(fields) = csv_fields(raw) else {
            continue;
        };
        if i == 0 && is_header(&fields) && fields[0] == "word" {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, got {}", fields.len())));
        }
        let w = Word::parse(rank, fields[0])
            .map_err(|e| parse_err(line, format!("invalid word {:?}: {e}", fields[0])))?;
        let re = parse_f64(line, "re", fields[1])?;
        let im = parse_f64(line, "im", fields[2])?;
        x.add(w, Complex64::new(re, im));
    }
    Ok(x)
}

pub fn read_tree(rank: u32, path: &Path) -> Result<TreeFunction> {
    tree_from_csv(rank, &read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Transforms: `theta,re,im` rows.

pub fn transform_to_csv(thetas: &[f64], values: &[Complex64]) -> String {
    let mut out = String::from("theta,re,im\n");
    for (t, v) in thetas.iter().zip(values) {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", t, v.re, v.im));
    }
    out
}

pub fn write_transform(path: &Path, thetas: &[f64], values: &[Complex64]) -> Result<()> {
    write_atomic(path, &transform_to_csv(thetas, values))
}

pub fn transform_from_csv(text: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut thetas = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(fields) = csv_fields(raw) else {
            continue;
        };
        if i == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, got {}", fields.len())));
        }
        thetas.push(parse_f64(line, "theta", fields[0])?);
        values.push(Complex64::new(
            parse_f64(line, "re", fields[1])?,
            parse_f64(line, "im", fields[2])?,
        ));
    }
    Ok((thetas, values))
}

pub fn read_transform(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>)> {
    transform_from_csv(&read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Quadrature rules: `theta_k,w_k` rows.

pub fn quadrature_to_csv(rule: &GaussRule) -> String {
    let mut out = String::from("theta_k,w_k\n");
    for (t, w) in rule.nodes().iter().zip(rule.weights()) {
        out.push_str(&format!("{:.17e},{:.17e}\n", t, w));
    }
    out
}

pub fn write_quadrature(path: &Path, rule: &GaussRule) -> Result<()> {
    write_atomic(path, &quadrature_to_csv(rule))
}

// ---------------------------------------------------------------------------
// Measures (JSON): atoms plus optional density samples at given angles.

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    kind: String,
    value: f64,
    mass_re: f64,
    mass_im: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureRecord {
    atoms: Vec<AtomRecord>,
    /// `[theta, re, im]` triples.
    density_samples: Vec<[f64; 3]>,
}

fn param_record(p: &SphericalParameter, mass: Complex64) -> AtomRecord {
    let (kind, value) = match p.kind() {
        ParamKind::Real(theta) => ("real", theta),
        ParamKind::LowerSegment(zeta) => ("lower", zeta),
        ParamKind::UpperSegment(zeta) => ("upper", zeta),
    };
    AtomRecord {
        kind: kind.to_string(),
        value,
        mass_re: mass.re,
        mass_im: mass.im,
    }
}

pub fn measure_to_json(measure: &RadialMeasure, sample_thetas: &[f64]) -> Result<String> {
    let atoms = measure
        .atoms
        .iter()
        .map(|(p, m)| param_record(p, *m))
        .collect();
    let density_samples = sample_thetas
        .iter()
        .map(|&t| {
            let v = measure.density.eval(t);
            [t, v.re, v.im]
        })
        .collect();
    let record = MeasureRecord {
        atoms,
        density_samples,
    };
    serde_json::to_string_pretty(&record)
        .map_err(|e| Error::Precondition(format!("measure serialization failed: {e}")))
}

pub fn write_measure(path: &Path, measure: &RadialMeasure, sample_thetas: &[f64]) -> Result<()> {
    write_atomic(path, &measure_to_json(measure, sample_thetas)?)
}

/// Read back a measure. Density samples are interpolated linearly between
/// the stored angles; an empty sample list gives a purely atomic measure.
pub fn measure_from_json(rank: u32, text: &str) -> Result<RadialMeasure> {
    let record: MeasureRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let mut atoms = Vec::new();
    for a in &record.atoms {
        let param = match a.kind.as_str() {
            "real" => SphericalParameter::real(rank, a.value),
            "lower" => SphericalParameter::lower(rank, a.value),
            "upper" => SphericalParameter::upper(rank, a.value),
            other => {
                return Err(parse_err(1, format!("unknown atom kind {other:?}")));
            }
        }?;
        atoms.push((param, Complex64::new(a.mass_re, a.mass_im)));
    }
    let density = if record.density_samples.is_empty() {
        Density::Zero
    } else {
        let mut samples = record.density_samples.clone();
        samples.sort_by(|a, b| a[0].total_cmp(&b[0]));
        Density::interpolated(samples)
    };
    Ok(RadialMeasure { atoms, density })
}

pub fn read_measure(rank: u32, path: &Path) -> Result<RadialMeasure> {
    measure_from_json(rank, &read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Run statistics (JSON), written by `treeharm opnorm`.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpnormStats {
    pub rank: u32,
    pub radius: u32,
    pub ball: usize,
    pub est_norm: f64,
    pub gelfand_norm: f64,
    pub iters: usize,
    pub seed: u64,
}

pub fn write_stats(path: &Path, stats: &OpnormStats) -> Result<()> {
    let text = serde_json::to_string_pretty(stats)
        .map_err(|e| Error::Precondition(format!("stats serialization failed: {e}")))?;
    write_atomic(path, &text)
}

pub fn read_stats(path: &Path) -> Result<OpnormStats> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}
