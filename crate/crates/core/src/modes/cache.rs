//! On-disk cache of solved (λ, n_eff) samples keyed by a geometry hash.
//!
//! One JSON file per hash, stored column-wise:
//!
//! ```json
//! {"format":"fwmpair-dispersion-cache","version":1,"geometry_hash":"…",
//!  "columns":["wavelength_um","n_eff"],"wavelength_um":[…],"n_eff":[…]}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CACHE_FORMAT: &str = "fwmpair-dispersion-cache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed cache file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    geometry_hash: String,
    columns: Vec<String>,
    wavelength_um: Vec<f64>,
    n_eff: Vec<f64>,
}

/// Summary of one cache file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheEntry {
    pub geometry_hash: String,
    pub samples: usize,
    pub path: PathBuf,
}

/// Directory of per-geometry sample files.
#[derive(Debug, Clone)]
pub struct DispersionCache {
    dir: PathBuf,
}

impl DispersionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    fn read(path: &Path) -> Result<CacheFile, CacheError> {
        let text = fs::read_to_string(path).map_err(|source| CacheError::Io { path: path.into(), source })?;
        let file: CacheFile = serde_json::from_str(&text).map_err(|e| CacheError::Format {
            path: path.into(),
            reason: e.to_string(),
        })?;
        if file.format != CACHE_FORMAT || file.version != CACHE_VERSION {
            return Err(CacheError::Format {
                path: path.into(),
                reason: format!("unsupported format {} v{}", file.format, file.version),
            });
        }
        if file.wavelength_um.len() != file.n_eff.len() {
            return Err(CacheError::Format { path: path.into(), reason: "column lengths differ".into() });
        }
        Ok(file)
    }

    /// Cached samples for `hash`, sorted by wavelength; empty when absent.
    pub fn load(&self, hash: &str) -> Result<Vec<(f64, f64)>, CacheError> {
        let path = self.path_for(hash);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let file = Self::read(&path)?;
        if file.geometry_hash != hash {
            return Err(CacheError::Format { path, reason: "geometry hash mismatch".into() });
        }
        Ok(file.wavelength_um.into_iter().zip(file.n_eff).collect())
    }

    /// Merge `samples` into the file for `hash` (new values win on exact λ match).
    pub fn store(&self, hash: &str, samples: &[(f64, f64)]) -> Result<(), CacheError> {
        let mut all = self.load(hash)?;
        for &(l, n) in samples {
            match all.iter_mut().find(|(x, _)| *x == l) {
                Some(e) => e.1 = n,
                None => all.push((l, n)),
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let file = CacheFile {
            format: CACHE_FORMAT.into(),
            version: CACHE_VERSION,
            geometry_hash: hash.into(),
            columns: vec!["wavelength_um".into(), "n_eff".into()],
            wavelength_um: all.iter().map(|s| s.0).collect(),
            n_eff: all.iter().map(|s| s.1).collect(),
        };
        fs::create_dir_all(&self.dir).map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
        let path = self.path_for(hash);
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string(&file).expect("serializable cache");
        fs::write(&tmp, text).map_err(|source| CacheError::Io { path: tmp.clone(), source })?;
        fs::rename(&tmp, &path).map_err(|source| CacheError::Io { path, source })
    }

    /// All readable cache files, sorted by hash.
    pub fn list(&self) -> Result<Vec<CacheEntry>, CacheError> {
        if !self.dir.exists() {
            return Ok(Vec::new());
        }
        let rd = fs::read_dir(&self.dir).map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
        let mut out = Vec::new();
        for entry in rd.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                let file = Self::read(&path)?;
                out.push(CacheEntry { geometry_hash: file.geometry_hash, samples: file.n_eff.len(), path });
            }
        }
        out.sort_by(|a, b| a.geometry_hash.cmp(&b.geometry_hash));
        Ok(out)
    }

    /// Remove every cache file; returns the number removed.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let entries = self.list()?;
        for e in &entries {
            fs::remove_file(&e.path).map_err(|source| CacheError::Io { path: e.path.clone(), source })?;
        }
        Ok(entries.len())
    }
}
