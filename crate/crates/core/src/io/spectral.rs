//! The `GPFS` binary block holding one spectral decomposition.
//!
//! Layout (little-endian):
//!
//! | offset | size | field                                         |
//! |--------|------|-----------------------------------------------|
//! | 0      | 4    | magic `GPFS`                                  |
//! | 4      | 4    | version (u32, 1)                              |
//! | 8      | 4    | endianness flag (u32 `0x01020304`)            |
//! | 12     | 4    | mode: 0 = fourier1d, 1 = bessel2d             |
//! | 16     | 8    | snapshot time in ms (f64)                     |
//! | 24     | 64   | config hash, ASCII hex, zero padded           |
//! | 88     | 8    | n_k (u64)                                     |
//! | 96     | 8    | n_l (u64; 1 for fourier1d, l_max + 1 else)    |
//! | 104    | …    | k values (n_k × f64)                          |
//! | …      | …    | amplitudes, l-major, (re, im) f64 pairs       |
//!
//! For `fourier1d` the k axis is in FFT order and covers negative k.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::analysis::{BesselDecomposition, Fourier1D};
use crate::error::{GpfError, Result};
use crate::io::write_atomic;

pub const MAGIC: [u8; 4] = *b"GPFS";
pub const VERSION: u32 = 1;
const ENDIAN_FLAG: u32 = 0x0102_0304;
const HEADER_LEN: usize = 104;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMode {
    Fourier1d,
    Bessel2d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub mode: SpectralMode,
    pub time: f64,
    pub config_hash: String,
    pub k: Vec<f64>,
    /// `amplitudes[l][i]`; a single row for `fourier1d`.
    pub amplitudes: Vec<Vec<Complex64>>,
}

impl SpectralBlock {
    pub fn from_fourier(f: &Fourier1D, time: f64, config_hash: &str) -> Self {
        SpectralBlock {
            mode: SpectralMode::Fourier1d,
            time,
            config_hash: config_hash.into(),
            k: f.k.clone(),
            amplitudes: vec![f.amplitude.clone()],
        }
    }

    pub fn from_bessel(d: &BesselDecomposition, time: f64, config_hash: &str) -> Self {
        SpectralBlock {
            mode: SpectralMode::Bessel2d,
            time,
            config_hash: config_hash.into(),
            k: d.k.clone(),
            amplitudes: d.p.clone(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&ENDIAN_FLAG.to_le_bytes());
        let mode: u32 = match self.mode {
            SpectralMode::Fourier1d => 0,
            SpectralMode::Bessel2d => 1,
        };
        out.extend_from_slice(&mode.to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        let mut h = [0u8; 64];
        let src = self.config_hash.as_bytes();
        let n = src.len().min(64);
        h[..n].copy_from_slice(&src[..n]);
        out.extend_from_slice(&h);
        out.extend_from_slice(&(self.k.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.amplitudes.len() as u64).to_le_bytes());
        for k in &self.k {
            out.extend_from_slice(&k.to_le_bytes());
        }
        for row in &self.amplitudes {
            for z in row {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: String| GpfError::Snapshot {
            path: path.to_path_buf(),
            reason,
        };
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(bad("bad magic, expected \"GPFS\"".into()));
        }
        let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let long = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let real = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        if word(4) != VERSION {
            return Err(bad(format!("unsupported version {}", word(4))));
        }
        if word(8) != ENDIAN_FLAG {
            return Err(bad("endianness flag mismatch".into()));
        }
        let mode = match word(12) {
            0 => SpectralMode::Fourier1d,
            1 => SpectralMode::Bessel2d,
            m => return Err(bad(format!("unknown mode {m}"))),
        };
        let hash_bytes = &bytes[24..88];
        let end = hash_bytes.iter().position(|&b| b == 0).unwrap_or(64);
        let config_hash = String::from_utf8(hash_bytes[..end].to_vec()).map_err(|_| bad("config hash is not UTF-8".into()))?;
        let n_k = long(88);
        let n_l = long(96);
        let expected = n_k
            .checked_mul(n_l)
            .and_then(|c| c.checked_mul(16))
            .and_then(|c| c.checked_add(n_k.checked_mul(8)?))
            .and_then(|c| c.checked_add(HEADER_LEN as u64));
        if expected != Some(bytes.len() as u64) {
            return Err(bad(format!("length {} does not match {n_l} × {n_k} amplitudes", bytes.len())));
        }
        let (n_k, n_l) = (n_k as usize, n_l as usize);
        let k: Vec<f64> = (0..n_k).map(|i| real(HEADER_LEN + 8 * i)).collect();
        let base = HEADER_LEN + 8 * n_k;
        let amplitudes = (0..n_l)
            .map(|l| {
                (0..n_k)
                    .map(|i| {
                        let o = base + 16 * (l * n_k + i);
                        Complex64::new(real(o), real(o + 8))
                    })
                    .collect()
            })
            .collect();
        Ok(SpectralBlock {
            mode,
            time: real(16),
            config_hash,
            k,
            amplitudes,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| GpfError::io(path, e))?;
        Self::decode(&bytes, path)
    }
}
