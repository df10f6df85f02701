//! Binary voxel container.
//!
//! Little-endian layout: magic `ETCVOX01`, `u32` nx, ny, nz, `f64` lx, ly, lz,
//! a `u8` scalar code (0 = f64, 1 = f32), then the kx, ky and kz arrays back
//! to back, each `nx * ny * nz` values in x-fastest order.

use std::fmt;
use std::fs;
use std::path::Path;

use etc_core::{GridSpec, OrthotropicField};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"ETCVOX01";
pub const HEADER_LEN: usize = 8 + 3 * 4 + 3 * 8 + 1;

/// Scalar width of the stored arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    #[default]
    F64,
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F64 => 0,
            Dtype::F32 => 1,
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::F32 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormatErrorKind {
    BadMagic,
    Truncated { needed: usize, available: usize },
    TrailingBytes(usize),
    UnknownDtype(u8),
    BadExtent(String),
    NonPositive(f64),
    TooLarge,
}

/// Parse failure at a byte offset into the container.
#[derive(Debug, Clone, PartialEq)]
pub struct FormatError {
    pub offset: usize,
    pub kind: FormatErrorKind,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "byte {}: ", self.offset)?;
        match &self.kind {
            FormatErrorKind::BadMagic => write!(f, "magic is not ETCVOX01"),
            FormatErrorKind::Truncated { needed, available } => {
                write!(f, "truncated, needs {needed} more bytes but only {available} remain")
            }
            FormatErrorKind::TrailingBytes(n) => write!(f, "{n} unexpected trailing bytes"),
            FormatErrorKind::UnknownDtype(c) => write!(f, "unknown scalar code {c}"),
            FormatErrorKind::BadExtent(m) => f.write_str(m),
            FormatErrorKind::NonPositive(v) => write!(f, "conductivity {v} is not positive and finite"),
            FormatErrorKind::TooLarge => write!(f, "grid is too large to address"),
        }
    }
}

impl std::error::Error for FormatError {}

fn fail<T>(offset: usize, kind: FormatErrorKind) -> std::result::Result<T, FormatError> {
    Err(FormatError { offset, kind })
}

pub fn encode(field: &OrthotropicField, dtype: Dtype) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * g.len() * dtype.width());
    out.extend_from_slice(MAGIC);
    for n in [g.nx, g.ny, g.nz] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for l in [g.lx, g.ly, g.lz] {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.push(dtype.code());
    for a in [field.kx(), field.ky(), field.kz()] {
        for &v in a {
            match dtype {
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
                Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], FormatError> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return fail(self.pos, FormatErrorKind::Truncated { needed: n, available });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(OrthotropicField, Dtype), FormatError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8).map_err(|e| FormatError { kind: FormatErrorKind::BadMagic, ..e })? != MAGIC {
        return fail(0, FormatErrorKind::BadMagic);
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let at = c.pos;
        *d = u32::from_le_bytes(c.array()?) as usize;
        if *d == 0 {
            return fail(at, FormatErrorKind::BadExtent("cell count is zero".into()));
        }
    }
    let mut lens = [0.0; 3];
    for l in &mut lens {
        let at = c.pos;
        *l = f64::from_le_bytes(c.array()?);
        if !(l.is_finite() && *l > 0.0) {
            return fail(at, FormatErrorKind::BadExtent(format!("edge length {l} is not positive and finite")));
        }
    }
    let at = c.pos;
    let dtype = match c.take(1)?[0] {
        0 => Dtype::F64,
        1 => Dtype::F32,
        other => return fail(at, FormatErrorKind::UnknownDtype(other)),
    };
    let [nx, ny, nz] = dims;
    let len = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .filter(|v| v.checked_mul(3 * dtype.width()).is_some())
        .ok_or(FormatError { offset: 8, kind: FormatErrorKind::TooLarge })?;
    let need = 3 * len * dtype.width();
    let available = bytes.len() - c.pos;
    if available < need {
        return fail(c.pos, FormatErrorKind::Truncated { needed: need, available });
    }
    if available > need {
        return fail(c.pos + need, FormatErrorKind::TrailingBytes(available - need));
    }
    let mut arrays: [Vec<f64>; 3] = Default::default();
    for a in &mut arrays {
        a.reserve_exact(len);
        for _ in 0..len {
            let at = c.pos;
            let v = match dtype {
                Dtype::F64 => f64::from_le_bytes(c.array()?),
                Dtype::F32 => f32::from_le_bytes(c.array()?) as f64,
            };
            if !(v.is_finite() && v > 0.0) {
                return fail(at, FormatErrorKind::NonPositive(v));
            }
            a.push(v);
        }
    }
    let grid = GridSpec::new(nx, ny, nz, lens[0], lens[1], lens[2])
        .map_err(|e| FormatError { offset: 8, kind: FormatErrorKind::BadExtent(e.to_string()) })?;
    let [kx, ky, kz] = arrays;
    let field = OrthotropicField::new(grid, kx, ky, kz)
        .map_err(|e| FormatError { offset: HEADER_LEN, kind: FormatErrorKind::BadExtent(e.to_string()) })?;
    Ok((field, dtype))
}

pub fn write_vox(field: &OrthotropicField, dtype: Dtype, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(field, dtype)).map_err(|e| Error::io(path, e))
}

pub fn read_vox(path: impl AsRef<Path>) -> Result<(OrthotropicField, Dtype)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::Format { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> OrthotropicField {
        let g = GridSpec::new(4, 4, 4, 1.0, 2.0, 0.5).unwrap();
        OrthotropicField::from_fn(g, |x, y, z| [1.0 + x, 0.5 + y * z, 3.0]).unwrap()
    }

    #[test]
    fn header_and_size() {
        let b = encode(&field(), Dtype::F64);
        assert_eq!(&b[..8], b"ETCVOX01");
        assert_eq!(b.len(), 1581);
        assert_eq!(encode(&field(), Dtype::F32).len(), HEADER_LEN + 3 * 64 * 4);
    }

    #[test]
    fn round_trip_f64() {
        let f = field();
        let (back, dtype) = decode(&encode(&f, Dtype::F64)).unwrap();
        assert_eq!(dtype, Dtype::F64);
        assert_eq!(back, f);
    }

    #[test]
    fn errors_name_offsets() {
        let b = encode(&field(), Dtype::F64);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad).unwrap_err(), FormatError { offset: 0, kind: FormatErrorKind::BadMagic });
        let mut bad = b.clone();
        bad[44] = 7;
        assert_eq!(decode(&bad).unwrap_err().kind, FormatErrorKind::UnknownDtype(7));
        assert_eq!(decode(&bad).unwrap_err().offset, 44);
        assert_eq!(decode(&b[..100]).unwrap_err().offset, HEADER_LEN);
        let mut bad = b.clone();
        bad[HEADER_LEN + 8..HEADER_LEN + 16].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert_eq!(decode(&bad).unwrap_err().offset, HEADER_LEN + 8);
        let mut bad = b.clone();
        bad.push(0);
        assert_eq!(decode(&bad).unwrap_err().kind, FormatErrorKind::TrailingBytes(1));
        assert_eq!(decode(&b[..5]).unwrap_err().kind, FormatErrorKind::BadMagic);
    }
}
