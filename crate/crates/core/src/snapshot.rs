//! On-disk field format: one JSON header line, then raw little-endian
//! `f64` samples.
//!
//! Layout is row-major within a transverse slice (`x1` outer, `x2`
//! inner) and slice-major along `x3`. Readers validate the header
//! against the payload and reject shape mismatches.

use crate::error::{Error, Result};
use crate::field::{Field2D, SlicedField3D};
use crate::grid::{Grid2D, Grid3D};
use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const FORMAT_NAME: &str = "field-snapshot";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub l_perp: f64,
    pub n_perp: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_3: Option<usize>,
    pub ordering: String,
}

impl SnapshotHeader {
    fn for_field2d(grid: &Grid2D) -> Self {
        SnapshotHeader {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            kind: "field2d".into(),
            l_perp: grid.half_width(),
            n_perp: grid.n(),
            l_3: None,
            n_3: None,
            ordering: "row-major,slice-major".into(),
        }
    }

    fn for_sliced3d(grid: &Grid3D) -> Self {
        SnapshotHeader {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            kind: "sliced3d".into(),
            l_perp: grid.transverse().half_width(),
            n_perp: grid.transverse().n(),
            l_3: Some(grid.axial().half_width()),
            n_3: Some(grid.n_slices()),
            ordering: "row-major,slice-major".into(),
        }
    }

    fn validate(&self, kind: &str) -> Result<()> {
        if self.format != FORMAT_NAME {
            return Err(Error::Snapshot(format!("unknown format `{}`", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.kind != kind {
            return Err(Error::Snapshot(format!(
                "expected kind `{kind}`, found `{}`",
                self.kind
            )));
        }
        Ok(())
    }
}

fn write_payload(w: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_payload(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Snapshot(format!(
            "payload holds {} bytes, header promises {}",
            bytes.len(),
            count * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk size 8")))
        .collect())
}

fn write_header(w: &mut impl Write, header: &SnapshotHeader) -> Result<()> {
    let line = serde_json::to_string(header)
        .map_err(|e| Error::Snapshot(format!("header encoding failed: {e}")))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<SnapshotHeader> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r.read(&mut byte)?;
        if n == 0 {
            return Err(Error::Snapshot("missing header line".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        line.push(byte[0]);
        if line.len() > 4096 {
            return Err(Error::Snapshot("header line too long".into()));
        }
    }
    serde_json::from_slice(&line).map_err(|e| Error::Snapshot(format!("bad header: {e}")))
}

pub fn write_field2d(path: impl AsRef<Path>, field: &Field2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, &SnapshotHeader::for_field2d(field.grid()))?;
    write_payload(&mut w, field.values().iter().copied())?;
    w.flush()?;
    Ok(())
}

pub fn read_field2d(path: impl AsRef<Path>) -> Result<Field2D> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    header.validate("field2d")?;
    let grid = Grid2D::new(header.l_perp, header.n_perp)?;
    let values = read_payload(&mut r, header.n_perp * header.n_perp)?;
    let values = Array2::from_shape_vec((header.n_perp, header.n_perp), values)
        .map_err(|e| Error::Snapshot(format!("shape error: {e}")))?;
    Field2D::from_values(grid, values)
}

pub fn write_sliced3d(path: impl AsRef<Path>, field: &SlicedField3D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, &SnapshotHeader::for_sliced3d(field.grid()))?;
    write_payload(&mut w, field.data().iter().copied())?;
    w.flush()?;
    Ok(())
}

pub fn read_sliced3d(path: impl AsRef<Path>) -> Result<SlicedField3D> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    header.validate("sliced3d")?;
    let (l3, n3) = match (header.l_3, header.n_3) {
        (Some(l), Some(n)) => (l, n),
        _ => return Err(Error::Snapshot("sliced3d header missing axial shape".into())),
    };
    let grid2 = Grid2D::new(header.l_perp, header.n_perp)?;
    let grid = Grid3D::new(grid2, l3, n3)?;
    let values = read_payload(&mut r, n3 * header.n_perp * header.n_perp)?;
    let values = Array3::from_shape_vec((n3, header.n_perp, header.n_perp), values)
        .map_err(|e| Error::Snapshot(format!("shape error: {e}")))?;
    SlicedField3D::from_data(grid, values)
}

/// Hex SHA-256 of a file, for run manifests.
pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    use sha2::{Digest, Sha256};
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)?;
    Ok(format!("{:x}", hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn field2d_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let grid = Grid2D::new(6.0, 32).unwrap();
        let f = Field2D::from_fn(grid, |x1, x2| (x1 - 0.3) * (-(x1 * x1 + x2 * x2)).exp());
        write_field2d(&path, &f).unwrap();
        let back = read_field2d(&path).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn sliced3d_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.bin");
        let grid = Grid3D::new(Grid2D::new(6.0, 16).unwrap(), 4.0, 8).unwrap();
        let w = SlicedField3D::from_fn(grid, |x1, x2, x3| x3 * (-(x1 * x1 + x2 * x2)).exp());
        write_sliced3d(&path, &w).unwrap();
        let back = read_sliced3d(&path).unwrap();
        assert_eq!(back.grid(), w.grid());
        assert_eq!(back.data(), w.data());
    }

    #[test]
    fn reader_rejects_mismatched_shapes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        let grid = Grid2D::new(6.0, 16).unwrap();
        let f = Field2D::zeros(grid);
        write_field2d(&path, &f).unwrap();
        // truncate the payload
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_field2d(&path), Err(Error::Snapshot(_))));
        // kind mismatch
        let path2 = dir.path().join("kind.bin");
        write_field2d(&path2, &f).unwrap();
        assert!(matches!(read_sliced3d(&path2), Err(Error::Snapshot(_))));
    }

    #[test]
    fn corrupt_header_is_a_clean_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not json\n\x00\x00").unwrap();
        assert!(matches!(read_field2d(&path), Err(Error::Snapshot(_))));
    }
}
