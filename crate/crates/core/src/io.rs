//! CSV and JSON artifacts. Everything is written as `f64`, in a fixed
//! order, so identical inputs give byte-identical files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{Atom, PosDefSequence, TorusMeasure};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Serialize, Deserialize)]
struct LagRow {
    lag: i64,
    re: f64,
    im: f64,
    stderr: Option<f64>,
}

/// Writes `lag,re,im,stderr` for `n = −K..=K`. The stderr column is empty
/// when the sequence carries none.
pub fn write_sequence_csv<T: Real, W: Write>(c: &PosDefSequence<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = c.max_lag() as i64;
    for n in -k..=k {
        let z = c.at(n);
        let stderr = c.stderr().map(|s| s[n.unsigned_abs() as usize].to_f64_lossy());
        // `+ 0.0` folds negative zero so conjugated real lags print like the rest
        w.serialize(LagRow { lag: n, re: z.re.to_f64_lossy() + 0.0, im: z.im.to_f64_lossy() + 0.0, stderr })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_sequence_csv`]. Rows must cover
/// `−K..=K` in order; negative lags are checked against Hermitian symmetry
/// only through the nonnegative half, which is what is kept.
pub fn read_sequence_csv<R: Read>(input: R) -> Result<PosDefSequence<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let rows: Vec<LagRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() || rows.len() % 2 == 0 {
        return Err(Error::Parse(format!("expected an odd number of lag rows, got {}", rows.len())));
    }
    let k = (rows.len() / 2) as i64;
    for (i, row) in rows.iter().enumerate() {
        if row.lag != i as i64 - k {
            return Err(Error::Parse(format!("row {i} has lag {} but {} was expected", row.lag, i as i64 - k)));
        }
    }
    let half = &rows[k as usize..];
    let lags: Vec<Complex<f64>> = half.iter().map(|r| Complex::new(r.re, r.im)).collect();
    let seq = PosDefSequence::from_nonnegative(&lags)?;
    Ok(match half.iter().map(|r| r.stderr).collect::<Option<Vec<f64>>>() {
        Some(se) => seq.with_stderr(se),
        None => seq,
    })
}

/// Serializable form of a [`TorusMeasure`] plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub metadata: MeasureMetadata,
    pub atoms: Vec<AtomRecord>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureMetadata {
    pub max_lag: usize,
    pub kernel_order: usize,
    pub grid: usize,
    pub total_mass: f64,
    pub atomic_mass: f64,
    pub continuous_mass: f64,
    pub clipped_mass: f64,
    /// What produced the measure, e.g. `orbit` or `monte-carlo`.
    pub provenance: String,
    #[serde(default)]
    pub system: String,
    #[serde(default)]
    pub observable: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub frequency: f64,
    pub mass: f64,
}

impl MeasureFile {
    pub fn from_measure<T: Real>(m: &TorusMeasure<T>, provenance: &str, system: &str, observable: &str) -> Self {
        MeasureFile {
            metadata: MeasureMetadata {
                max_lag: m.max_lag,
                kernel_order: m.kernel_order,
                grid: m.grid(),
                total_mass: m.total_mass.to_f64_lossy(),
                atomic_mass: m.atomic_mass().to_f64_lossy(),
                continuous_mass: m.continuous_mass().to_f64_lossy(),
                clipped_mass: m.clipped_mass.to_f64_lossy(),
                provenance: provenance.into(),
                system: system.into(),
                observable: observable.into(),
            },
            atoms: m
                .atoms
                .iter()
                .map(|a| AtomRecord { frequency: a.frequency.to_f64_lossy(), mass: a.mass.to_f64_lossy() })
                .collect(),
            density: m.density.iter().map(|d| d.to_f64_lossy()).collect(),
        }
    }

    pub fn to_measure(&self) -> Result<TorusMeasure<f64>> {
        if self.density.len() != self.metadata.grid {
            return Err(Error::Parse(format!(
                "density has {} samples but grid is {}",
                self.density.len(),
                self.metadata.grid
            )));
        }
        let m = TorusMeasure {
            atoms: self.atoms.iter().map(|a| Atom { frequency: a.frequency, mass: a.mass }).collect(),
            density: self.density.clone(),
            kernel_order: self.metadata.kernel_order,
            total_mass: self.metadata.total_mass,
            max_lag: self.metadata.max_lag,
            clipped_mass: self.metadata.clipped_mass,
        };
        m.validate(1e-9)?;
        Ok(m)
    }
}

#[derive(Serialize)]
struct DensityRow {
    grid_index: usize,
    xi: f64,
    density: f64,
}

/// `grid_index,xi,density` rows of a measure's continuous part.
pub fn write_density_csv<W: Write>(m: &MeasureFile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let g = m.density.len();
    for (j, d) in m.density.iter().enumerate() {
        w.serialize(DensityRow { grid_index: j, xi: j as f64 / g as f64, density: *d })?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_sequence_file<T: Real>(path: &Path, c: &PosDefSequence<T>) -> Result<()> {
    write_sequence_csv(c, fs::File::create(path)?)
}

pub fn read_sequence_file(path: &Path) -> Result<PosDefSequence<f64>> {
    read_sequence_csv(fs::File::open(path)?)
}
