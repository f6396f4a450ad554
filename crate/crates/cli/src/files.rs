//! On-disk formats used between commands.
//!
//! * sampled functions: the binary container of `dilation_frames::io` with a JSON sidecar;
//! * sampling sets: JSON lines of `{"x": [...], "params": [...]}` with a `<file>.json` header;
//! * coefficient arrays: values in the binary container (a 1-D grid), index data in the sidecar;
//! * frame directories: `atom.bin`, `set.jsonl`, `space.json` and, once computed, `report.json`.

use std::fs::File;
use std::io::{BufReader, Cursor};
use std::path::Path;

use anyhow::{bail, Context, Result};
use dilation_frames::frames::{Band, CoefficientArray, FrameReport, TestSpace};
use dilation_frames::io::{read_sampled, write_container, Sidecar};
use dilation_frames::sampling::{SamplingHeader, SamplingSet};
use dilation_frames::{AffinePoint, DilationGroupSpec, GridSpec, OrbitGeometry, SampledFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::manifest::Output;

pub fn load_function(path: &Path) -> Result<SampledFunction> {
    let (f, _) = read_sampled(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(f)
}

/// Adds `name` and `name.json` to the output.
pub fn add_function(out: &mut Output, name: &str, f: &SampledFunction, kind: &str, meta: serde_json::Value) -> Result<()> {
    let mut bytes = Vec::new();
    write_container(Cursor::new(&mut bytes), f)?;
    out.add(name, bytes);
    let side = Sidecar {
        kind: kind.to_string(),
        tag: f.tag.clone(),
        meta,
    };
    out.add_json(&format!("{name}.json"), &side)
}

pub fn add_set(out: &mut Output, name: &str, set: &SamplingSet) -> Result<()> {
    let mut bytes = Vec::new();
    set.write_jsonl(&mut bytes)?;
    out.add(name, bytes);
    out.add_json(&format!("{name}.json"), &set.header())
}

pub fn load_set(path: &Path) -> Result<SamplingSet> {
    let header_path = dilation_frames::io::sidecar_path(path);
    let header: SamplingHeader =
        serde_json::from_str(&std::fs::read_to_string(&header_path).with_context(|| format!("reading {}", header_path.display()))?)
            .with_context(|| format!("parsing {}", header_path.display()))?;
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let plain = SamplingSet::read_jsonl(header.spec, BufReader::new(file))?;
    let points: Vec<AffinePoint> = plain.points().to_vec();
    Ok(SamplingSet::from_parts(header, points)?)
}

/// Index data stored beside a coefficient container.
#[derive(Serialize, Deserialize)]
struct CoefficientIndex {
    index: Vec<usize>,
    slice: Vec<usize>,
    abs_det: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    truncated: Vec<bool>,
}

pub fn add_coefficients(out: &mut Output, name: &str, c: &CoefficientArray) -> Result<()> {
    let grid = GridSpec::new(vec![0.0], vec![1.0], vec![c.len().max(1)])?;
    let mut values = c.values.clone();
    values.resize(grid.len(), Complex64::new(0.0, 0.0));
    let f = SampledFunction::new(grid, values)?;
    let index = CoefficientIndex {
        index: c.index.clone(),
        slice: c.slice.clone(),
        abs_det: c.abs_det.clone(),
        scale: c.scale.clone(),
        weights: c.weights.clone(),
        truncated: c.truncated.clone(),
    };
    add_function(out, name, &f, "coefficients", serde_json::to_value(index)?)
}

pub fn load_coefficients(path: &Path) -> Result<CoefficientArray> {
    let (f, side) = read_sampled(path).with_context(|| format!("reading {}", path.display()))?;
    let side = side.context("coefficient file has no index sidecar")?;
    if side.kind != "coefficients" {
        bail!("{} holds a {}, not coefficients", path.display(), side.kind);
    }
    let idx: CoefficientIndex = serde_json::from_value(side.meta).context("parsing the coefficient index")?;
    let n = idx.index.len();
    let lens = [
        idx.slice.len(),
        idx.abs_det.len(),
        idx.scale.len(),
        idx.weights.len(),
        idx.truncated.len(),
    ];
    if lens.iter().any(|&l| l != n) || f.samples.len() < n {
        bail!("coefficient index lengths disagree");
    }
    Ok(CoefficientArray {
        values: f.samples[..n].to_vec(),
        index: idx.index,
        slice: idx.slice,
        abs_det: idx.abs_det,
        scale: idx.scale,
        weights: idx.weights,
        truncated: idx.truncated,
    })
}

/// Frequency band selecting the test space on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub min_orbit_distance: f64,
    pub max_frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub group: DilationGroupSpec,
    pub grid: GridSpec,
    pub band: BandConfig,
}

impl SpaceConfig {
    pub fn build(&self) -> Result<TestSpace> {
        let band = Band {
            geometry: OrbitGeometry::new(self.group)?,
            min_orbit_distance: self.band.min_orbit_distance,
            max_frequency: self.band.max_frequency,
        };
        Ok(TestSpace::new(self.grid.clone(), band)?)
    }
}

pub struct FrameDir {
    pub atom: SampledFunction,
    pub set: SamplingSet,
    pub space: SpaceConfig,
    pub report: Option<FrameReport>,
}

impl FrameDir {
    pub fn load(dir: &Path) -> Result<Self> {
        let space: SpaceConfig = serde_json::from_str(&std::fs::read_to_string(dir.join("space.json")).context("reading space.json")?)
            .context("parsing space.json")?;
        let report_path = dir.join("report.json");
        let report = if report_path.exists() {
            Some(serde_json::from_str(&std::fs::read_to_string(report_path)?).context("parsing report.json")?)
        } else {
            None
        };
        Ok(Self {
            atom: load_function(&dir.join("atom.bin"))?,
            set: load_set(&dir.join("set.jsonl"))?,
            space,
            report,
        })
    }
}
