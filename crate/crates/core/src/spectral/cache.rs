//! On-disk cache of spectral sweeps.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic  b"FKSW"
//! u32    format version
//! u64    key
//! u64    n_target, k, node count
//! per node: f64 lambda, k × f64 energies, then for each neighbor
//!           (in neighbor_indices order) f64 coupling, f64 gap
//! ```

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{neighbor_indices, NeighborCoupling, SpectralSweep, SweepNode};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FKSW";
pub const VERSION: u32 = 1;
/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "FOCKRAMP_CACHE_DIR";

/// 64-bit FNV-1a over a stream of words; stable across platforms and builds.
#[derive(Debug, Clone)]
pub struct KeyHasher(u64);

impl Default for KeyHasher {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl KeyHasher {
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.u64(v.to_bits())
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

pub fn write_sweep<W: Write>(mut w: W, key: u64, sweep: &SpectralSweep) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&key.to_le_bytes())?;
    for v in [sweep.n_target as u64, sweep.k as u64, sweep.nodes.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for node in &sweep.nodes {
        w.write_all(&node.lambda.to_le_bytes())?;
        for e in &node.energies {
            w.write_all(&e.to_le_bytes())?;
        }
        for (c, g) in node.coupling.couplings.iter().zip(&node.coupling.gaps) {
            w.write_all(&c.to_le_bytes())?;
            w.write_all(&g.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Reads a sweep, returning it with its stored key.
pub fn read_sweep<R: Read>(mut r: R) -> Result<(u64, SpectralSweep)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let mut ver = [0u8; 4];
    r.read_exact(&mut ver)?;
    let ver = u32::from_le_bytes(ver);
    if ver != VERSION {
        return Err(Error::Cache(format!("unsupported version {ver}")));
    }
    let key = read_u64(&mut r)?;
    let n_target = read_u64(&mut r)? as usize;
    let k = read_u64(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    if n_target + 2 >= k || k > 1 << 20 || count > 1 << 28 {
        return Err(Error::Cache("corrupt header".into()));
    }
    let neighbors = neighbor_indices(n_target, k);
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let lambda = read_f64(&mut r)?;
        let energies = (0..k).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut couplings = Vec::with_capacity(neighbors.len());
        let mut gaps = Vec::with_capacity(neighbors.len());
        for _ in &neighbors {
            couplings.push(read_f64(&mut r)?);
            gaps.push(read_f64(&mut r)?);
        }
        nodes.push(SweepNode {
            lambda,
            energies,
            coupling: NeighborCoupling { n: n_target, neighbors: neighbors.clone(), couplings, gaps },
        });
    }
    Ok((key, SpectralSweep { n_target, k, nodes }))
}

/// Directory of cached sweeps, one file per key.
#[derive(Debug, Clone)]
pub struct SweepCache {
    dir: PathBuf,
}

impl SweepCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Uses `$FOCKRAMP_CACHE_DIR` if set, else `fallback`.
    pub fn from_env(fallback: Option<PathBuf>) -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).or(fallback).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file(&self, key: u64) -> PathBuf {
        self.dir.join(format!("sweep-{key:016x}.bin"))
    }

    pub fn load(&self, key: u64) -> Result<Option<SpectralSweep>> {
        let path = self.file(key);
        if !path.exists() {
            return Ok(None);
        }
        let (stored, sweep) = read_sweep(BufReader::new(fs::File::open(path)?))?;
        Ok((stored == key).then_some(sweep))
    }

    pub fn store(&self, key: u64, sweep: &SpectralSweep) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!(".sweep-{key:016x}.tmp"));
        write_sweep(BufWriter::new(fs::File::create(&tmp)?), key, sweep)?;
        fs::rename(tmp, self.file(key))?;
        Ok(())
    }
}
