//! Content-addressed result cache under `REPCOUNT_CACHE_DIR`.
//!
//! Each record lives in `<digest>.json`, where the digest is the SHA-256 of
//! the canonical JSON of the instance. The cache is advisory: unreadable
//! entries are ignored and recomputed.

use std::path::PathBuf;
#[cfg(test)]
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::output::write_atomic;

pub const CACHE_ENV: &str = "REPCOUNT_CACHE_DIR";
pub const RECORD_SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One χ_p in a prediction breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub p: u64,
    pub level: u32,
    pub value: f64,
    pub stderr: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub magnitude_factor: f64,
    pub chi_inf: f64,
    pub chi_inf_stderr: f64,
    pub chi_inf_half: Option<f64>,
    pub chi_inf_half_stderr: Option<f64>,
    pub eps_consistent: bool,
    pub euler: f64,
    pub euler_stderr: f64,
    pub local_obstruction: bool,
    pub factors: Vec<FactorRecord>,
    pub prediction: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: u32,
    pub digest: String,
    pub instance: Value,
    /// Decimal string, since counts can exceed 2^64.
    pub exact_count: Option<String>,
    pub prediction: Option<PredictionRecord>,
    /// `exact/prediction`, present when the prediction is positive.
    pub ratio: Option<f64>,
    pub seconds: f64,
    pub version: String,
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn new(instance: Value) -> ResultRecord {
        ResultRecord {
            schema: RECORD_SCHEMA,
            digest: digest(&instance),
            instance,
            exact_count: None,
            prediction: None,
            ratio: None,
            seconds: 0.0,
            version: VERSION.into(),
            error: None,
        }
    }

    pub fn fill_ratio(&mut self) {
        self.ratio = match (&self.exact_count, &self.prediction) {
            (Some(n), Some(p)) if p.prediction > 0.0 => n.parse::<f64>().ok().map(|n| n / p.prediction),
            _ => None,
        };
    }
}

/// SHA-256 of the compact JSON serialisation. Callers build `instance` with
/// a fixed key order, so equal inputs always serialise identically.
pub fn digest(instance: &Value) -> String {
    let bytes = serde_json::to_vec(instance).expect("JSON values serialise");
    hex::encode(Sha256::digest(&bytes))
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// The cache named by the environment, if any; the directory is created.
    pub fn from_env() -> Result<Option<Cache>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => {
                let dir = PathBuf::from(d);
                std::fs::create_dir_all(&dir)?;
                Ok(Some(Cache { dir }))
            }
            _ => Ok(None),
        }
    }

    #[cfg(test)]
    pub fn at(dir: &Path) -> Cache {
        Cache { dir: dir.to_path_buf() }
    }

    fn path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    pub fn load(&self, digest: &str) -> Option<ResultRecord> {
        let text = std::fs::read(self.path(digest)).ok()?;
        let rec: ResultRecord = serde_json::from_slice(&text).ok()?;
        (rec.digest == digest && rec.schema == RECORD_SCHEMA).then_some(rec)
    }

    pub fn store(&self, rec: &ResultRecord) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(rec)?;
        text.push(b'\n');
        write_atomic(&self.path(&rec.digest), &text)
    }
}

/// Serves `instance` from the cache when possible, otherwise computes and
/// stores it. Records carrying an error are never stored.
pub fn cached(
    cache: Option<&Cache>,
    instance: Value,
    compute: impl FnOnce(&mut ResultRecord) -> Result<()>,
) -> Result<ResultRecord> {
    let mut rec = ResultRecord::new(instance);
    if let Some(hit) = cache.and_then(|c| c.load(&rec.digest)) {
        return Ok(hit);
    }
    let start = std::time::Instant::now();
    compute(&mut rec)?;
    rec.seconds = start.elapsed().as_secs_f64();
    rec.fill_ratio();
    if let (Some(c), None) = (cache, &rec.error) {
        c.store(&rec)?;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_depends_on_content_only() {
        let a = json!({"kind": "count", "form": "x1^2", "m": 1});
        let b = json!({"kind": "count", "form": "x1^2", "m": 1});
        let c = json!({"kind": "count", "form": "x1^2", "m": 2});
        assert_eq!(digest(&a), digest(&b));
        assert_ne!(digest(&a), digest(&c));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn round_trip_and_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path());
        let inst = json!({"kind": "t"});
        let mut calls = 0;
        let first = cached(Some(&cache), inst.clone(), |r| {
            calls += 1;
            r.exact_count = Some("12".into());
            Ok(())
        })
        .unwrap();
        let second = cached(Some(&cache), inst, |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 1);
        assert_eq!(first, second);
    }

    #[test]
    fn errors_are_not_cached_and_junk_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path());
        let inst = json!({"kind": "e"});
        let rec = cached(Some(&cache), inst.clone(), |r| {
            r.error = Some("boom".into());
            Ok(())
        })
        .unwrap();
        assert!(cache.load(&rec.digest).is_none());
        std::fs::write(dir.path().join(format!("{}.json", rec.digest)), "not json").unwrap();
        assert!(cache.load(&rec.digest).is_none());
    }

    #[test]
    fn ratio_only_for_positive_prediction() {
        let mut r = ResultRecord::new(json!({}));
        r.exact_count = Some("10".into());
        r.fill_ratio();
        assert_eq!(r.ratio, None);
    }
}
