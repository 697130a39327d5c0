use std::io::{BufRead, Read, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::layout::{Comp, Triple, YeeLayout};
use super::medium::SlabMedium;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::spectral::LateralGrid;

pub const SNAPSHOT_FORMAT: &str = "slab-tbc-snapshot/1";

/// First line of a snapshot file. The arrays that follow are little-endian
/// `f64` in the order `Ex, Ey, Ez, Hx, Hy, Hz`, each laid out level-major
/// (`[k][j][i]`) with the lengths listed here. `H` is the average of the two
/// staggered half steps around `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub grid: LateralGrid<f64>,
    pub medium_hash: String,
    pub config_hash: String,
    pub step: usize,
    pub dt: f64,
    pub components: Vec<String>,
    pub lengths: Vec<usize>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// otherwise identical runs.
    pub timestamp: u64,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the sampled coefficients and exterior constants.
pub fn medium_hash<T: Real>(medium: &SlabMedium<T>) -> String {
    let mut h = Sha256::new();
    for arr in medium.eps.iter().chain(&medium.mu) {
        for v in arr {
            h.update(v.to_f64_lossy().to_le_bytes());
        }
    }
    for ext in [&medium.top, &medium.bottom] {
        h.update(ext.eps.to_f64_lossy().to_le_bytes());
        h.update(ext.mu.to_f64_lossy().to_le_bytes());
    }
    hex(&h.finalize())
}

fn grid_f64<T: Real>(g: &LateralGrid<T>) -> LateralGrid<f64> {
    LateralGrid {
        period_x: g.period_x.to_f64_lossy(),
        period_y: g.period_y.to_f64_lossy(),
        modes_x: g.modes_x,
        modes_y: g.modes_y,
        h1: g.h1.to_f64_lossy(),
        h2: g.h2.to_f64_lossy(),
        nz: g.nz,
    }
}

pub fn write_snapshot<T: Real>(
    mut w: impl Write,
    medium: &SlabMedium<T>,
    config_hash: &str,
    step: usize,
    dt: T,
    e: &Triple<T>,
    h: &Triple<T>,
) -> Result<()> {
    let l = &medium.layout;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        grid: grid_f64(&l.grid),
        medium_hash: medium_hash(medium),
        config_hash: config_hash.into(),
        step,
        dt: dt.to_f64_lossy(),
        components: Comp::ALL.iter().map(|c| c.name().to_string()).collect(),
        lengths: Comp::ALL.iter().map(|c| l.len(*c)).collect(),
        timestamp,
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    for (comp, arr) in Comp::ALL.iter().zip(e.iter().chain(h)) {
        if arr.len() != l.len(*comp) {
            return Err(Error::Shape { expected: l.len(*comp).to_string(), got: arr.len().to_string() });
        }
        for v in arr {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a snapshot back as `(header, E, H)`.
pub fn read_snapshot(r: impl Read) -> Result<(SnapshotHeader, Triple<f64>, Triple<f64>)> {
    let mut r = std::io::BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Io(e.to_string()))?;
    if header.format != SNAPSHOT_FORMAT || header.lengths.len() != 6 {
        return Err(Error::Io(format!("unrecognized snapshot format `{}`", header.format)));
    }
    let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(6);
    let mut buf = [0u8; 8];
    for &n in &header.lengths {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            v.push(f64::from_le_bytes(buf));
        }
        arrays.push(v);
    }
    let mut it = arrays.into_iter();
    let mut next = || it.next().unwrap_or_default();
    let e = [next(), next(), next()];
    let h = [next(), next(), next()];
    Ok((header, e, h))
}

/// Layout of the grid recorded in a header.
pub fn header_layout(header: &SnapshotHeader) -> YeeLayout<f64> {
    YeeLayout::new(&header.grid)
}
