//! The `AESG` binary grid format and CSV export for 2-D products.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "AESG"                     4 bytes magic
//! version                    u16 (currently 1)
//! rows, cols                 u32, u32
//! row axis, column axis      each: start f64, step f64, unit (u16 byte length + UTF-8)
//! data                       rows*cols f32 (real) or rows*cols (re f32, im f32) pairs
//! ```
//!
//! Real and complex grids are told apart by the size of the data block.

use num_complex::Complex64;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"AESG";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub unit: String,
}

impl GridAxis {
    pub fn new(start: f64, step: f64, unit: impl Into<String>) -> Self {
        Self { start, step, unit: unit.into() }
    }

    /// Axis from a uniformly spaced coordinate list.
    pub fn from_coords(coords: &[f64], unit: impl Into<String>) -> Self {
        let step = if coords.len() > 1 { coords[1] - coords[0] } else { 0.0 };
        Self::new(coords.first().copied().unwrap_or(0.0), step, unit)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Real(Vec<f32>),
    Complex(Vec<[f32; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub row_axis: GridAxis,
    pub col_axis: GridAxis,
    pub data: GridData,
}

impl Grid {
    pub fn real(row_axis: GridAxis, col_axis: GridAxis, map: &ndarray::Array2<f64>) -> Self {
        let (rows, cols) = map.dim();
        Self {
            rows,
            cols,
            row_axis,
            col_axis,
            data: GridData::Real(map.iter().map(|&v| v as f32).collect()),
        }
    }

    pub fn complex(row_axis: GridAxis, col_axis: GridAxis, map: &ndarray::Array2<Complex64>) -> Self {
        let (rows, cols) = map.dim();
        Self {
            rows,
            cols,
            row_axis,
            col_axis,
            data: GridData::Complex(map.iter().map(|z| [z.re as f32, z.im as f32]).collect()),
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.rows as u32).to_le_bytes())?;
        w.write_all(&(self.cols as u32).to_le_bytes())?;
        for axis in [&self.row_axis, &self.col_axis] {
            w.write_all(&axis.start.to_le_bytes())?;
            w.write_all(&axis.step.to_le_bytes())?;
            let unit = axis.unit.as_bytes();
            w.write_all(&(unit.len() as u16).to_le_bytes())?;
            w.write_all(unit)?;
        }
        match &self.data {
            GridData::Real(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes())),
            GridData::Complex(v) => v.iter().try_for_each(|[re, im]| {
                w.write_all(&re.to_le_bytes())?;
                w.write_all(&im.to_le_bytes())
            }),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let bad = |m: &str| Error::Contract(format!("malformed grid: {m}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let rows = u32::from_le_bytes(take(&mut r)?) as usize;
        let cols = u32::from_le_bytes(take(&mut r)?) as usize;
        let mut axes = Vec::with_capacity(2);
        for _ in 0..2 {
            let start = f64::from_le_bytes(take(&mut r)?);
            let step = f64::from_le_bytes(take(&mut r)?);
            let len = u16::from_le_bytes(take(&mut r)?) as usize;
            if r.len() < len {
                return Err(bad("truncated unit string"));
            }
            let unit = std::str::from_utf8(&r[..len]).map_err(|_| bad("unit is not UTF-8"))?;
            axes.push(GridAxis::new(start, step, unit));
            r = &r[len..];
        }
        let n = rows * cols;
        let floats: Vec<f32> = r
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if !r.len().is_multiple_of(4) {
            return Err(bad("trailing bytes"));
        }
        let data = if floats.len() == n {
            GridData::Real(floats)
        } else if floats.len() == 2 * n {
            GridData::Complex(floats.chunks_exact(2).map(|p| [p[0], p[1]]).collect())
        } else {
            return Err(bad(&format!("{} values for a {rows}x{cols} grid", floats.len())));
        };
        let col_axis = axes.pop().unwrap();
        let row_axis = axes.pop().unwrap();
        Ok(Self { rows, cols, row_axis, col_axis, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Real values as an array (magnitudes for complex grids).
    pub fn to_real_array(&self) -> ndarray::Array2<f64> {
        let vals: Vec<f64> = match &self.data {
            GridData::Real(v) => v.iter().map(|&x| x as f64).collect(),
            GridData::Complex(v) => v.iter().map(|[a, b]| (*a as f64).hypot(*b as f64)).collect(),
        };
        ndarray::Array2::from_shape_vec((self.rows, self.cols), vals).expect("shape checked on read")
    }

    /// CSV with the column coordinates in the header row and the row
    /// coordinate leading each line.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\\{}", self.row_axis.unit, self.col_axis.unit);
        for j in 0..self.cols {
            s.push_str(&format!(",{}", self.col_axis.value(j)));
        }
        s.push('\n');
        let values = self.to_real_array();
        for i in 0..self.rows {
            s.push_str(&format!("{}", self.row_axis.value(i)));
            for j in 0..self.cols {
                s.push_str(&format!(",{}", values[[i, j]]));
            }
            s.push('\n');
        }
        s
    }
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Contract("malformed grid: truncated header".into()))?;
    Ok(buf)
}
