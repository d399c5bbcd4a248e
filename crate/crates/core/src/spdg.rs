//! The SPDG binary grid format.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! magic   4 bytes   0x53 0x50 0x44 0x47 ("SPDG")
//! version u32       1
//! n_axes  u8
//! per axis: size u64, spacing f64
//! values  f64 × prod(sizes), row-major, last axis fastest
//! ```
//!
//! Covariance grids and realizations share the format. Masked covariance
//! cells are stored as canonical NaN. For realizations the index along an
//! axis maps to coordinate `origin + i·spacing`; for covariance grids to the
//! centered lag `(i - size/2)·spacing`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = [0x53, 0x50, 0x44, 0x47];
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SpdgGrid {
    pub sizes: Vec<u64>,
    pub spacings: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpdgGrid {
    pub fn new(sizes: Vec<u64>, spacings: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if sizes.len() != spacings.len() {
            return Err(Error::InvalidArgument("sizes and spacings must pair up".into()));
        }
        let total: u64 = sizes.iter().product();
        if total as usize != values.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match the grid ({} cells)",
                values.len(),
                total
            )));
        }
        Ok(SpdgGrid { sizes, spacings, values })
    }
}

pub fn write_to(grid: &SpdgGrid, mut w: impl Write) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let n_axes = u8::try_from(grid.sizes.len())
        .map_err(|_| Error::InvalidArgument("too many axes for the format".into()))?;
    w.write_all(&[n_axes])?;
    for (n, dx) in grid.sizes.iter().zip(&grid.spacings) {
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&dx.to_le_bytes())?;
    }
    // canonicalize NaN so equal grids give byte-identical files
    for v in &grid.values {
        let v = if v.is_nan() { f64::NAN } else { *v };
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_from(mut r: impl Read) -> Result<SpdgGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::MalformedFile("bad magic; not an SPDG grid".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::MalformedFile(format!("unsupported SPDG version {version}")));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let n_axes = b1[0] as usize;
    let mut sizes = Vec::with_capacity(n_axes);
    let mut spacings = Vec::with_capacity(n_axes);
    let mut b8 = [0u8; 8];
    for _ in 0..n_axes {
        r.read_exact(&mut b8)?;
        sizes.push(u64::from_le_bytes(b8));
        r.read_exact(&mut b8)?;
        spacings.push(f64::from_le_bytes(b8));
    }
    let total: u64 = sizes.iter().product();
    let total = usize::try_from(total)
        .map_err(|_| Error::MalformedFile("grid too large for this platform".into()))?;
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        r.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    SpdgGrid::new(sizes, spacings, values)
}

pub fn write_file(grid: &SpdgGrid, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_to(grid, std::io::BufWriter::new(file))
}

pub fn read_file(path: &std::path::Path) -> Result<SpdgGrid> {
    let file = std::fs::File::open(path)?;
    read_from(std::io::BufReader::new(file))
}
