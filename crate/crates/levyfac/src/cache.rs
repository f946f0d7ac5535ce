//! On-disk cache of sample batches.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "LEVYSMP1"
//! count   u64
//! seed    u64
//! hash   32 bytes  SHA-256 of the canonical config string
//! data    count × f64
//! ```
//!
//! Each `<key>.bin` has a `<key>.bin.json` sidecar with the config string,
//! the flagged-path count and the crate version.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use levyfac_core::rng::{Batch, ChunkedSampler};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::parallel::sample_parallel;

pub const MAGIC: &[u8; 8] = b"LEVYSMP1";
pub const HEADER_LEN: usize = 8 + 8 + 8 + 32;
pub const CACHE_ENV: &str = "LEVYFAC_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] io::Error),
    #[error("not a sample file: {0}")]
    Format(String),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] levyfac_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub config: String,
    pub count: u64,
    pub seed: u64,
    pub flagged: u64,
    pub hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub seed: u64,
    pub hash: [u8; 32],
    pub values: Vec<f64>,
}

pub fn config_hash(config: &str) -> [u8; 32] {
    Sha256::digest(config.as_bytes()).into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_samples<W: Write>(mut w: W, seed: u64, hash: &[u8; 32], values: &[f64]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    w.write_all(hash)?;
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_samples<R: Read>(mut r: R) -> Result<SampleFile, CacheError> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head).map_err(|_| CacheError::Format("short header".into()))?;
    if &head[..8] != MAGIC {
        return Err(CacheError::Format("bad magic".into()));
    }
    let count = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let seed = u64::from_le_bytes(head[16..24].try_into().unwrap());
    let hash: [u8; 32] = head[24..56].try_into().unwrap();
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    if data.len() as u64 != count * 8 {
        return Err(CacheError::Format(format!("expected {count} values, found {} bytes", data.len())));
    }
    let values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(SampleFile { seed, hash, values })
}

/// A cache directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Cache {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub path: PathBuf,
    pub bytes: u64,
    pub sidecar: Option<Sidecar>,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// The directory named by `LEVYFAC_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Cache::new)
    }

    fn key(config: &str, n: usize, seed: u64) -> String {
        hex(&config_hash(&format!("{config}|n={n}|seed={seed}")))
    }

    pub fn path_for(&self, config: &str, n: usize, seed: u64) -> PathBuf {
        self.dir.join(format!("{}.bin", Self::key(config, n, seed)))
    }

    /// Cached batch, or `None` when absent. A file whose header does not
    /// match the request is treated as absent.
    pub fn load(&self, config: &str, n: usize, seed: u64) -> Result<Option<Batch>, CacheError> {
        let path = self.path_for(config, n, seed);
        let Ok(f) = fs::File::open(&path) else { return Ok(None) };
        let file = read_samples(io::BufReader::new(f))?;
        if file.seed != seed || file.hash != config_hash(config) || file.values.len() != n {
            return Ok(None);
        }
        let flagged = match fs::read_to_string(sidecar_path(&path)) {
            Ok(s) => serde_json::from_str::<Sidecar>(&s)?.flagged as usize,
            Err(_) => 0,
        };
        Ok(Some(Batch { values: file.values, flagged }))
    }

    pub fn store(&self, config: &str, seed: u64, batch: &Batch) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(config, batch.values.len(), seed);
        let hash = config_hash(config);
        let tmp = path.with_extension("tmp");
        {
            let mut w = io::BufWriter::new(fs::File::create(&tmp)?);
            write_samples(&mut w, seed, &hash, &batch.values)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        let side = Sidecar {
            config: config.to_string(),
            count: batch.values.len() as u64,
            seed,
            flagged: batch.flagged as u64,
            hash: hex(&hash),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        fs::write(sidecar_path(&path), serde_json::to_string_pretty(&side)? + "\n")?;
        Ok(path)
    }

    pub fn entries(&self) -> Result<Vec<Entry>, CacheError> {
        let mut out = Vec::new();
        let rd = match fs::read_dir(&self.dir) {
            Ok(rd) => rd,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for e in rd {
            let path = e?.path();
            if path.extension().is_some_and(|x| x == "bin") {
                let bytes = fs::metadata(&path)?.len();
                let sidecar = fs::read_to_string(sidecar_path(&path))
                    .ok()
                    .and_then(|s| serde_json::from_str(&s).ok());
                out.push(Entry { path, bytes, sidecar });
            }
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Removes cached batches and sidecars; returns how many batches went.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let entries = self.entries()?;
        for e in &entries {
            fs::remove_file(&e.path)?;
            let _ = fs::remove_file(sidecar_path(&e.path));
        }
        Ok(entries.len())
    }
}

fn sidecar_path(bin: &Path) -> PathBuf {
    let mut s = bin.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Draws a batch, going through the cache when one is given.
pub fn load_or_sample<S: ChunkedSampler + ?Sized>(
    cache: Option<&Cache>,
    config: &str,
    sampler: &S,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<Batch, CacheError> {
    if let Some(c) = cache {
        if let Some(b) = c.load(config, n, seed)? {
            return Ok(b);
        }
    }
    let b = sample_parallel(sampler, n, seed, workers)?;
    if let Some(c) = cache {
        c.store(config, seed, &b)?;
    }
    Ok(b)
}
