//! Binary container for sampled functions and coefficient arrays, with a JSON sidecar.
//!
//! Layout (all little-endian):
//!
//! | field    | type            |
//! |----------|-----------------|
//! | magic    | `b"DFSF"`       |
//! | version  | `u32` (= 1)     |
//! | dim      | `u32`           |
//! | extents  | `u64 × dim`     |
//! | origin   | `f64 × dim`     |
//! | spacing  | `f64 × dim`     |
//! | samples  | `(f64, f64) × ∏ extents`, row-major, last axis fastest |
//!
//! The sidecar lives next to the container at `<path>.json`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::bump::ClosedForm;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};

const MAGIC: &[u8; 4] = b"DFSF";
const VERSION: u32 = 1;

/// Metadata stored beside a sampled function.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<ClosedForm>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_container<W: Write>(mut w: W, f: &SampledFunction) -> Result<()> {
    let g = &f.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    for n in &g.extents {
        w.write_all(&(*n as u64).to_le_bytes())?;
    }
    for v in g.origin.iter().chain(&g.spacing) {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in &f.samples {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_container<R: Read>(mut r: R) -> Result<SampledFunction> {
    let mut magic = [0; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a sampled-function container".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    if dim == 0 || dim > 3 {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let extents = (0..dim).map(|_| read_u64(&mut r).map(|n| n as usize)).collect::<Result<Vec<_>>>()?;
    let origin = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let spacing = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::new(origin, spacing, extents)?;
    let mut samples = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        samples.push(Complex64::new(re, im));
    }
    SampledFunction::new(grid, samples)
}

/// Writes the container and its sidecar.
pub fn write_sampled(path: &Path, f: &SampledFunction, kind: &str, meta: serde_json::Value) -> Result<()> {
    write_container(BufWriter::new(File::create(path)?), f)?;
    let side = Sidecar {
        kind: kind.to_string(),
        tag: f.tag.clone(),
        meta,
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Reads a container, restoring the closed-form tag from the sidecar when present.
pub fn read_sampled(path: &Path) -> Result<(SampledFunction, Option<Sidecar>)> {
    let mut f = read_container(BufReader::new(File::open(path)?))?;
    let side_path = sidecar_path(path);
    let side = if side_path.exists() {
        let s: Sidecar = serde_json::from_str(&std::fs::read_to_string(side_path)?)?;
        f.tag = s.tag.clone();
        Some(s)
    } else {
        None
    };
    Ok((f, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::{build_bump, BumpKind};

    #[test]
    fn container_roundtrip_is_bit_exact() {
        let grid = GridSpec::centered(2, 40, 0.06).unwrap();
        let f = build_bump(BumpKind::SmoothExponential, 1.0, &grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.bin");
        write_sampled(&path, &f, "bump", serde_json::json!({"radius": 1.0})).unwrap();
        let (g, side) = read_sampled(&path).unwrap();
        assert_eq!(f, g);
        assert_eq!(side.unwrap().kind, "bump");
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(matches!(read_container(&b"NOPE\x01\x00\x00\x00"[..]), Err(Error::Format(_))));
        assert!(read_container(&b"DFSF\x01\x00\x00\x00\x01\x00\x00\x00"[..]).is_err());
    }
}
