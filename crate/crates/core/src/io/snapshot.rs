//! The `GPF1` binary field format and its JSON sidecar.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `GPF1`                            |
//! | 4      | 4    | version (u32, currently 1)              |
//! | 8      | 4    | endianness flag (u32 `0x01020304`)      |
//! | 12     | 4    | dims (u32, 1..=3)                       |
//! | 16     | 24   | points per axis (3 × u64, unused = 1)   |
//! | 40     | 24   | spacings in μm (3 × f64, unused = 0)    |
//! | 64     | 8    | time in ms (f64)                        |
//! | 72     | …    | ψ₁ then ψ₂, interleaved (re, im) f64    |
//!
//! Axis order is (x, y, z) with the last axis contiguous. Axis `i` covers
//! `[-points[i]·spacing[i]/2, points[i]·spacing[i]/2)`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::field::BinaryField;
use crate::grid::Grid;
use crate::io::hash::git_blob_hash;
use crate::io::write_atomic;

pub const MAGIC: [u8; 4] = *b"GPF1";
pub const VERSION: u32 = 1;
pub const ENDIAN_FLAG: u32 = 0x0102_0304;
pub const HEADER_LEN: usize = 72;

/// Decoded header of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub dims: usize,
    pub points: [u64; 3],
    pub spacings: [f64; 3],
    pub time: f64,
}

impl SnapshotHeader {
    pub fn cells(&self) -> usize {
        self.points[..self.dims].iter().product::<u64>() as usize
    }

    pub fn payload_len(&self) -> usize {
        2 * self.cells() * 16
    }
}

pub fn encode(field: &BinaryField) -> Vec<u8> {
    let grid = &field.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * grid.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&ENDIAN_FLAG.to_le_bytes());
    out.extend_from_slice(&(grid.dims() as u32).to_le_bytes());
    for i in 0..3 {
        let n = grid.points().get(i).map_or(1, |&n| n as u64);
        out.extend_from_slice(&n.to_le_bytes());
    }
    for i in 0..3 {
        let d = if i < grid.dims() { grid.spacing(i) } else { 0.0 };
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(&field.time.to_le_bytes());
    for psi in &field.psi {
        for z in psi {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn bad(path: &Path, reason: impl Into<String>) -> GpfError {
    GpfError::Snapshot {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().expect("4 bytes"))
}

fn u64_at(b: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

/// Parse and check the header; `path` only labels errors.
pub fn decode_header(bytes: &[u8], path: &Path) -> Result<SnapshotHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(bad(path, format!("file is {} bytes, shorter than the {HEADER_LEN}-byte header", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(bad(path, format!("bad magic {:?}, expected \"GPF1\"", &bytes[..4])));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(bad(path, format!("unsupported version {version}, expected {VERSION}")));
    }
    let flag = u32_at(bytes, 8);
    if flag != ENDIAN_FLAG {
        return Err(bad(path, format!("endianness flag {flag:#010x} is not little-endian {ENDIAN_FLAG:#010x}")));
    }
    let dims = u32_at(bytes, 12) as usize;
    if !(1..=3).contains(&dims) {
        return Err(bad(path, format!("dims = {dims} outside 1..=3")));
    }
    let points = [u64_at(bytes, 16), u64_at(bytes, 24), u64_at(bytes, 32)];
    let spacings = [f64_at(bytes, 40), f64_at(bytes, 48), f64_at(bytes, 56)];
    for i in 0..dims {
        if points[i] < 2 || !points[i].is_power_of_two() || points[i] > 1 << 24 {
            return Err(bad(path, format!("axis {i} has {} points", points[i])));
        }
        if !(spacings[i].is_finite() && spacings[i] > 0.0) {
            return Err(bad(path, format!("axis {i} has spacing {}", spacings[i])));
        }
    }
    let cells = points[..dims].iter().try_fold(1u64, |acc, &n| acc.checked_mul(n));
    if cells.is_none_or(|c| c > (usize::MAX / 32) as u64) {
        return Err(bad(path, "grid size overflows"));
    }
    let header = SnapshotHeader {
        version,
        dims,
        points,
        spacings,
        time: f64_at(bytes, 64),
    };
    let expected = HEADER_LEN + header.payload_len();
    if bytes.len() != expected {
        return Err(bad(
            path,
            format!("length {} bytes, expected {expected} for {:?} points", bytes.len(), &points[..dims]),
        ));
    }
    Ok(header)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<BinaryField> {
    let h = decode_header(bytes, path)?;
    let pts: Vec<usize> = h.points[..h.dims].iter().map(|&n| n as usize).collect();
    let half: Vec<f64> = (0..h.dims).map(|i| 0.5 * h.points[i] as f64 * h.spacings[i]).collect();
    let grid = Grid::new(&pts, &half).map_err(|e| bad(path, e.to_string()))?;
    let n = h.cells();
    let mut comps = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut off = HEADER_LEN;
    for psi in comps.iter_mut() {
        for _ in 0..n {
            psi.push(Complex64::new(f64_at(bytes, off), f64_at(bytes, off + 8)));
            off += 16;
        }
    }
    let [psi1, psi2] = comps;
    let mut field = BinaryField::from_components(grid, psi1, psi2)?;
    field.time = h.time;
    Ok(field)
}

/// Write `field` and return the git-style hash of the bytes written.
pub fn write_snapshot(path: &Path, field: &BinaryField) -> Result<String> {
    let bytes = encode(field);
    write_atomic(path, &bytes)?;
    Ok(git_blob_hash(&bytes))
}

pub fn read_snapshot(path: &Path) -> Result<BinaryField> {
    let bytes = fs::read(path).map_err(|e| GpfError::io(path, e))?;
    decode(&bytes, path)
}

/// What a snapshot file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotRole {
    GroundState,
    Initial,
    Sample,
    Checkpoint,
}

/// Metadata written next to each snapshot as `<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u32,
    pub role: SnapshotRole,
    pub config_hash: String,
    pub content_hash: String,
    pub step: u64,
    pub time_ms: f64,
    pub dims: usize,
    pub points: Vec<usize>,
    pub spacings_um: Vec<f64>,
    pub half_widths_um: Vec<f64>,
    pub norms: [f64; 2],
    pub central_density: f64,
}

impl Sidecar {
    pub fn describe(field: &BinaryField, role: SnapshotRole, step: u64, config_hash: &str, content_hash: &str) -> Self {
        Sidecar {
            format: "GPF1".into(),
            version: VERSION,
            role,
            config_hash: config_hash.into(),
            content_hash: content_hash.into(),
            step,
            time_ms: field.time,
            dims: field.grid.dims(),
            points: field.grid.points().to_vec(),
            spacings_um: field.grid.spacings(),
            half_widths_um: field.grid.half_widths().to_vec(),
            norms: field.norms(),
            central_density: field.central_density(),
        }
    }
}

pub fn sidecar_path(snapshot: &Path) -> PathBuf {
    snapshot.with_extension("json")
}

pub fn write_sidecar(snapshot: &Path, sidecar: &Sidecar) -> Result<()> {
    let text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    write_atomic(&sidecar_path(snapshot), text.as_bytes())
}

pub fn read_sidecar(snapshot: &Path) -> Result<Sidecar> {
    let path = sidecar_path(snapshot);
    let text = fs::read_to_string(&path).map_err(|e| GpfError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| bad(&path, e.to_string()))
}

/// Snapshot plus sidecar; returns the content hash.
pub fn write_with_sidecar(
    path: &Path,
    field: &BinaryField,
    role: SnapshotRole,
    step: u64,
    config_hash: &str,
) -> Result<String> {
    let hash = write_snapshot(path, field)?;
    write_sidecar(path, &Sidecar::describe(field, role, step, config_hash, &hash))?;
    Ok(hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> BinaryField {
        let grid = Grid::new(&[8, 4], &[2.0, 1.5]).unwrap();
        let psi1 = (0..32).map(|i| Complex64::new(i as f64 * 0.1, -(i as f64).sqrt())).collect();
        let psi2 = (0..32).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 1e-300 * i as f64)).collect();
        let mut f = BinaryField::from_components(grid, psi1, psi2).unwrap();
        f.time = 12.345;
        f
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = field();
        let bytes = encode(&f);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 32 * 16);
        let g = decode(&bytes, Path::new("mem")).unwrap();
        assert_eq!(g.grid, f.grid);
        assert_eq!(g.time.to_bits(), f.time.to_bits());
        for j in 0..2 {
            for (a, b) in f.psi[j].iter().zip(&g.psi[j]) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn rejects_bad_magic_version_and_length() {
        let bytes = encode(&field());
        let p = Path::new("x.gpf");
        let mut m = bytes.clone();
        m[0] = b'X';
        assert!(decode(&m, p).unwrap_err().to_string().contains("magic"));
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(decode(&v, p).unwrap_err().to_string().contains("version"));
        let short = &bytes[..bytes.len() - 1];
        assert!(decode(short, p).unwrap_err().to_string().contains("length"));
        assert!(decode(&bytes[..10], p).unwrap_err().to_string().contains("header"));
        let mut d = bytes.clone();
        d[12] = 7;
        assert!(decode(&d, p).is_err());
        let mut e = bytes;
        e[8] = 0xFF;
        assert!(decode(&e, p).unwrap_err().to_string().contains("endianness"));
    }

    #[test]
    fn header_reports_payload() {
        let bytes = encode(&field());
        let h = decode_header(&bytes, Path::new("m")).unwrap();
        assert_eq!(h.dims, 2);
        assert_eq!(h.points, [8, 4, 1]);
        assert_eq!(h.spacings[2], 0.0);
        assert_eq!(h.payload_len(), 1024);
    }
}
