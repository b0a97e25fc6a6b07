// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Content-addressed result cache: one human-readable JSON record per
//! canonicalized configuration, written atomically so interrupted sweeps
//! can resume cell by cell.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::ENGINE_VERSION;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "READOUT_CACHE_DIR";

/// Canonical, bit-exact key material for the hash.
pub struct KeyBuilder {
    parts: Vec<String>,
}

impl KeyBuilder {
    pub fn new(kind: &str) -> Self {
        Self {
            parts: vec![
                format!("kind={kind}"),
                format!("engine={ENGINE_VERSION}"),
            ],
        }
    }

    pub fn f64(mut self, name: &str, value: f64) -> Self {
        self.parts.push(format!("{name}={:016x}", value.to_bits()));
        self
    }

    pub fn f64_slice(mut self, name: &str, values: &[f64]) -> Self {
        let joined: Vec<String> = values.iter().map(|v| format!("{:016x}", v.to_bits())).collect();
        self.parts.push(format!("{name}=[{}]", joined.join(",")));
        self
    }

    pub fn usize(mut self, name: &str, value: usize) -> Self {
        self.parts.push(format!("{name}={value}"));
        self
    }

    pub fn str(mut self, name: &str, value: &str) -> Self {
        self.parts.push(format!("{name}={value}"));
        self
    }

    pub fn system(self, sys: &crate::model::SystemParams) -> Self {
        self.f64("Q", sys.q)
            .f64("lambda", sys.lambda)
            .f64("gamma0", sys.gamma0)
            .f64("gamma", sys.gamma)
            .f64("r_g", sys.r_g)
            .f64("g_sim", sys.g_sim)
            .f64("eta_QE", sys.eta_qe)
            .f64("eta_cav", sys.eta_cav)
            .f64("eta_det", sys.eta_det)
            .f64("delta_g", sys.delta_g)
            .f64("delta_e", sys.delta_e)
            .f64("phi", sys.phi)
    }

    pub fn finish(self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.parts.join(";").as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

/// On-disk record wrapping a payload with its provenance.
#[derive(Debug, Serialize, Deserialize)]
pub struct ResultRecord<T> {
    pub config_hash: String,
    /// Unix seconds at write time (metadata only; never hashed).
    pub timestamp: u64,
    pub engine_version: String,
    /// Free-form provenance: Fock dimensions, grid sizes, convergence deltas.
    pub provenance: serde_json::Value,
    pub payload: T,
}

/// Cache handle; a `None` directory disables it.
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// `enabled = false` yields a no-op cache. The directory is
    /// `$READOUT_CACHE_DIR` when set, `<out_dir>/cache` otherwise.
    pub fn new(enabled: bool, out_dir: &Path) -> Self {
        if !enabled {
            return Self { dir: None };
        }
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| out_dir.join("cache"));
        Self { dir: Some(dir) }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    fn path_for(&self, hash: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{hash}.json")))
    }

    pub fn get<T: DeserializeOwned>(&self, hash: &str) -> Option<T> {
        let path = self.path_for(hash)?;
        let text = fs::read_to_string(path).ok()?;
        let record: ResultRecord<T> = serde_json::from_str(&text).ok()?;
        (record.config_hash == hash && record.engine_version == ENGINE_VERSION)
            .then_some(record.payload)
    }

    pub fn put<T: Serialize>(
        &self,
        hash: &str,
        payload: &T,
        provenance: serde_json::Value,
    ) -> Result<()> {
        let Some(path) = self.path_for(hash) else {
            return Ok(());
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let record = ResultRecord {
            config_hash: hash.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            engine_version: ENGINE_VERSION.to_string(),
            provenance,
            payload,
        };
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&record)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Fetch-or-compute wrapper.
    pub fn get_or_compute<T, F>(
        &self,
        hash: &str,
        provenance: serde_json::Value,
        compute: F,
    ) -> Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(hit) = self.get::<T>(hash) {
            return Ok(hit);
        }
        let value = compute()?;
        self.put(hash, &value, provenance)?;
        Ok(value)
    }
}
