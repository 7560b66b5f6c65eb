//! Bit-exact checkpoint files.
//!
//! Layout (all little-endian): magic bytes "CNSE", format version u32,
//! dims u32, n u32, time f64, then for every wavenumber of the stored
//! half-spectrum (iz in 0..=nz/2, lexicographic (ix, iy, iz) order) the
//! three components as interleaved (re, im) f64 pairs. The other half of
//! the spectrum is reconstructed from Hermitian symmetry on load.

use super::{Grid, SpectralField};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CNSE";
const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, field: &SpectralField, time: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.dims() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    let n = grid.n();
    let nz = grid.nz();
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..=nz / 2 {
                for c in 0..3 {
                    let v = field.coeff(c, ix, iy, iz);
                    w.write_all(&v.re.to_le_bytes())?;
                    w.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(SpectralField, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic bytes {magic:?} in {}",
            path.display()
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let dims = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let grid = Grid::new(n, dims)
        .map_err(|e| Error::Checkpoint(format!("invalid grid in checkpoint: {e}")))?;
    let time = read_f64(&mut r)?;
    let mut field = SpectralField::zeros(grid);
    let nz = grid.nz();
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..=nz / 2 {
                for c in 0..3 {
                    let re = read_f64(&mut r)?;
                    let im = read_f64(&mut r)?;
                    field.set_coeff(c, ix, iy, iz, Complex64::new(re, im));
                }
            }
        }
    }
    // reconstruct the unstored half from Hermitian symmetry; the stored
    // planes are written from symmetric fields, so no re-enforcement pass
    // (which would rewrite signed zeros) is needed
    for ix in 0..n {
        let jx = (n - ix) % n;
        for iy in 0..n {
            let jy = (n - iy) % n;
            for iz in nz / 2 + 1..nz {
                let jz = nz - iz;
                for c in 0..3 {
                    let v = field.coeff(c, jx, jy, jz).conj();
                    field.set_coeff(c, ix, iy, iz, v);
                }
            }
        }
    }
    Ok((field, time))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
