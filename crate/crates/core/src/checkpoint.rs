//! Binary checkpoint files: magic tag, little-endian grid header, then the
//! four fields (rho, zeta, vr, vz) as row-major f64 arrays. Round-trips are
//! bit exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{make_grid, GridSpec, Parity, ScalarFieldRZ, VelocityRZ};

pub const MAGIC: &[u8; 5] = b"AXBQ1";

#[derive(Debug, Clone)]
pub struct CheckpointData {
    pub t: f64,
    pub kappa: f64,
    pub rho: ScalarFieldRZ,
    pub zeta: ScalarFieldRZ,
    pub vel: VelocityRZ,
}

impl CheckpointData {
    pub fn grid(&self) -> GridSpec {
        self.rho.grid
    }
}

fn write_field(w: &mut impl Write, f: &ScalarFieldRZ) -> std::io::Result<()> {
    for v in &f.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_field(
    r: &mut impl Read,
    grid: GridSpec,
    parity: Parity,
) -> Result<ScalarFieldRZ> {
    let mut f = ScalarFieldRZ::zeros(grid, parity);
    let mut buf = [0u8; 8];
    for v in f.values.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(f)
}

pub fn write_checkpoint(path: &Path, data: &CheckpointData) -> Result<()> {
    let g = data.grid();
    for f in [&data.zeta, &data.vel.vr, &data.vel.vz] {
        if f.grid != g {
            return Err(Error::GridMismatch("checkpoint fields".into()));
        }
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&(g.nr as u32).to_le_bytes())?;
    w.write_all(&(g.nz as u32).to_le_bytes())?;
    for v in [g.rmax, g.zmin, g.zmax, data.t, data.kappa] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_field(&mut w, &data.rho)?;
    write_field(&mut w, &data.zeta)?;
    write_field(&mut w, &data.vel.vr)?;
    write_field(&mut w, &data.vel.vz)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<CheckpointData> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic {:?}",
            path.display(),
            magic
        )));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let nr = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let nz = u32::from_le_bytes(u32buf) as usize;
    let mut f64buf = [0u8; 8];
    let mut head = [0.0f64; 5];
    for v in head.iter_mut() {
        r.read_exact(&mut f64buf)?;
        *v = f64::from_le_bytes(f64buf);
    }
    let grid = make_grid(nr, nz, head[0], head[1], head[2])
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    let rho = read_field(&mut r, grid, Parity::Even)?;
    let zeta = read_field(&mut r, grid, Parity::Even)?;
    let vr = read_field(&mut r, grid, Parity::Odd)?;
    let vz = read_field(&mut r, grid, Parity::Even)?;
    let mut tail = Vec::new();
    r.read_to_end(&mut tail)?;
    if !tail.is_empty() {
        return Err(Error::Checkpoint(format!(
            "{}: {} trailing bytes",
            path.display(),
            tail.len()
        )));
    }
    Ok(CheckpointData {
        t: head[3],
        kappa: head[4],
        rho,
        zeta,
        vel: VelocityRZ { vr, vz },
    })
}
