use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::geometry::{domain_to_json, Domain, PlanePoint};
use crate::transform::PVQuadratureSpec;

/// `b.re, b.im, db.re, db.im, b_err, db_err, evals`.
pub(crate) type NodeValue = [f64; 7];

type NodeKey = ([u8; 32], u64, u64);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub blobs_read: u64,
    pub blobs_written: u64,
}

/// Transform values per (domain, quadrature spec, node). Lives in memory
/// and, when a directory is set, also as one content-addressed blob per
/// sampled field (little-endian `f64`s) with a JSON sidecar.
#[derive(Debug, Default)]
pub struct FieldCache {
    mem: Mutex<HashMap<NodeKey, NodeValue>>,
    dir: Option<PathBuf>,
    hits: AtomicU64,
    misses: AtomicU64,
    blobs_read: AtomicU64,
    blobs_written: AtomicU64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    key: &'a str,
    domain: &'a str,
    nodes: usize,
    spec: &'a PVQuadratureSpec,
    layout: &'static str,
}

impl FieldCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self {
            dir: Some(dir.as_ref().to_path_buf()),
            ..Self::default()
        })
    }

    /// Process-wide in-memory cache.
    pub fn global() -> &'static FieldCache {
        static CACHE: OnceLock<FieldCache> = OnceLock::new();
        CACHE.get_or_init(FieldCache::in_memory)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            blobs_read: self.blobs_read.load(Ordering::Relaxed),
            blobs_written: self.blobs_written.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.mem.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn context(domain: &Domain, spec: &PVQuadratureSpec) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(domain_to_json(domain).as_bytes());
        for v in [spec.epsilon, spec.outer_radius, spec.budget as f64, spec.target_tol] {
            h.update(v.to_le_bytes());
        }
        h.finalize().into()
    }

    pub(crate) fn get(&self, ctx: &[u8; 32], p: PlanePoint) -> Option<NodeValue> {
        let v = self
            .mem
            .lock()
            .expect("cache lock")
            .get(&(*ctx, p.x.to_bits(), p.y.to_bits()))
            .copied();
        match v {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        v
    }

    pub(crate) fn put(&self, ctx: &[u8; 32], p: PlanePoint, v: NodeValue) {
        self.mem
            .lock()
            .expect("cache lock")
            .insert((*ctx, p.x.to_bits(), p.y.to_bits()), v);
    }

    pub(crate) fn blob_key(ctx: &[u8; 32], points: &[PlanePoint]) -> String {
        let mut h = Sha256::new();
        h.update(ctx);
        for p in points {
            h.update(p.x.to_le_bytes());
            h.update(p.y.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub(crate) fn load_blob(&self, key: &str, n: usize) -> Option<Vec<NodeValue>> {
        let path = self.dir.as_ref()?.join(format!("{key}.bin"));
        let bytes = fs::read(path).ok()?;
        if bytes.len() != n * 7 * 8 {
            return None;
        }
        let vals: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        self.blobs_read.fetch_add(1, Ordering::Relaxed);
        Some(
            vals.chunks_exact(7)
                .map(|c| c.try_into().expect("7 values"))
                .collect(),
        )
    }

    pub(crate) fn store_blob(
        &self,
        key: &str,
        domain: &Domain,
        spec: &PVQuadratureSpec,
        values: &[NodeValue],
    ) -> std::io::Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let bytes: Vec<u8> = values.iter().flatten().flat_map(|v| v.to_le_bytes()).collect();
        // write then rename so readers never see a partial blob
        let tmp = dir.join(format!("{key}.bin.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, dir.join(format!("{key}.bin")))?;
        let side = Sidecar {
            key,
            domain: domain.kind(),
            nodes: values.len(),
            spec,
            layout: "f64 little-endian, 7 per node: b.re b.im db.re db.im b_err db_err evals",
        };
        let json = serde_json::to_string_pretty(&side).map_err(std::io::Error::other)?;
        fs::write(dir.join(format!("{key}.json")), json)?;
        self.blobs_written.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DiskDomain;

    #[test]
    fn blob_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("blobs");
        let c = FieldCache::with_dir(&dir).unwrap();
        let d = Domain::Disk(DiskDomain::unit());
        let s = PVQuadratureSpec::default();
        let ctx = FieldCache::context(&d, &s);
        let pts = [PlanePoint::new(0.1, 0.2), PlanePoint::new(-0.3, 0.0)];
        let key = FieldCache::blob_key(&ctx, &pts);
        let vals = vec![[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], [-1.0, 0.5, 0.0, 1e-300, 0.0, 0.0, 9.0]];
        c.store_blob(&key, &d, &s, &vals).unwrap();
        assert_eq!(c.load_blob(&key, 2).unwrap(), vals);
        assert!(c.load_blob(&key, 3).is_none());
        assert!(dir.join(format!("{key}.json")).exists());
    }
}
