//! Bundle archives.
//!
//! A saved bundle is a zip file of JSON blobs, one per bundle part, plus
//! a manifest listing every entry with its SHA-256. Loading verifies the
//! schema, every checksum, and the reassembled bundle's own internal
//! validation, so a truncated or edited archive fails loudly instead of
//! predicting garbage.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

use super::IoError;
use crate::stack::{ModelBundle, BUNDLE_SCHEMA};

/// Blob entries inside an archive, in write order. The manifest itself
/// is stored separately as `manifest.json`.
pub const ARCHIVE_ENTRIES: [&str; 6] = [
    "config.json",
    "wiring.json",
    "models.json",
    "fractions.json",
    "diagnostics.json",
    "train_diagrams.json",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// `manifest.json`: the only place the creation timestamp lives, so two
/// bundles trained with the same seed still compare equal in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveManifest {
    pub schema: u32,
    pub created_unix: u64,
    /// Checksum of `config.json`, for quick identity checks without
    /// reading the whole archive.
    pub config_sha256: String,
    pub inventory: Vec<ArchiveEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Serializes `bundle` to a checksummed zip archive at `path`.
pub fn save_bundle(bundle: &ModelBundle, path: &Path) -> Result<(), IoError> {
    bundle.validate()?;

    let blobs: [(&str, Vec<u8>); 6] = [
        ("config.json", serde_json::to_vec_pretty(&bundle.config)?),
        ("wiring.json", serde_json::to_vec_pretty(&bundle.manifest)?),
        ("models.json", serde_json::to_vec(&bundle.models)?),
        ("fractions.json", serde_json::to_vec(&bundle.fractions)?),
        ("diagnostics.json", serde_json::to_vec_pretty(&bundle.diagnostics)?),
        ("train_diagrams.json", serde_json::to_vec_pretty(&bundle.train_diagram_ids)?),
    ];
    let manifest = ArchiveManifest {
        schema: bundle.schema,
        created_unix: now_unix(),
        config_sha256: sha256_hex(&blobs[0].1),
        inventory: blobs
            .iter()
            .map(|(name, bytes)| ArchiveEntry {
                name: (*name).into(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
            .collect(),
    };

    let opts = SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
    let mut w = ZipWriter::new(File::create(path)?);
    w.start_file("manifest.json", opts)?;
    w.write_all(&serde_json::to_vec_pretty(&manifest)?)?;
    for (name, bytes) in &blobs {
        w.start_file(*name, opts)?;
        w.write_all(bytes)?;
    }
    w.finish()?;
    Ok(())
}

fn read_entry(zip: &mut ZipArchive<File>, name: &str) -> Result<Vec<u8>, IoError> {
    let mut entry = zip
        .by_name(name)
        .map_err(|_| IoError::CorruptArchive(format!("missing entry `{name}`")))?;
    let mut bytes = Vec::with_capacity(entry.size() as usize);
    entry.read_to_end(&mut bytes)?;
    Ok(bytes)
}

fn read_checked<T: DeserializeOwned>(
    zip: &mut ZipArchive<File>,
    manifest: &ArchiveManifest,
    name: &str,
) -> Result<T, IoError> {
    let listed = manifest
        .inventory
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| IoError::CorruptArchive(format!("manifest does not list `{name}`")))?;
    let bytes = read_entry(zip, name)?;
    if sha256_hex(&bytes) != listed.sha256 {
        return Err(IoError::CorruptArchive(format!("checksum mismatch on `{name}`")));
    }
    serde_json::from_slice(&bytes)
        .map_err(|e| IoError::CorruptArchive(format!("entry `{name}` does not parse: {e}")))
}

/// Loads, checksum-verifies, and validates a bundle archive.
pub fn load_bundle(path: &Path) -> Result<ModelBundle, IoError> {
    let mut zip = ZipArchive::new(File::open(path)?)?;
    let manifest_bytes = read_entry(&mut zip, "manifest.json")?;
    let manifest: ArchiveManifest = serde_json::from_slice(&manifest_bytes)
        .map_err(|e| IoError::CorruptArchive(format!("manifest does not parse: {e}")))?;
    if manifest.schema != BUNDLE_SCHEMA {
        return Err(IoError::SchemaVersionMismatch {
            found: manifest.schema,
            expected: BUNDLE_SCHEMA,
        });
    }

    let bundle = ModelBundle {
        schema: manifest.schema,
        config: read_checked(&mut zip, &manifest, "config.json")?,
        manifest: read_checked(&mut zip, &manifest, "wiring.json")?,
        models: read_checked(&mut zip, &manifest, "models.json")?,
        fractions: read_checked(&mut zip, &manifest, "fractions.json")?,
        diagnostics: read_checked(&mut zip, &manifest, "diagnostics.json")?,
        train_diagram_ids: read_checked(&mut zip, &manifest, "train_diagrams.json")?,
    };
    bundle.validate()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
    use crate::nn::FractionConfig;
    use crate::oracle::{generate_synthetic_dataset, OracleParams};
    use crate::stack::{predict_point, train_stack, StackConfig};

    fn trained_bundle() -> (ModelBundle, Dataset) {
        let params = OracleParams { seed: 21, noise_sigma: 0.0, ..OracleParams::default() };
        let data = generate_synthetic_dataset(&params, 8, 6).unwrap();
        let spec = |task| LearnerSpec {
            family: LearnerFamily::Knn,
            task,
            hyper: HyperParams { k: 5, ..HyperParams::default() },
            seed: 0,
        };
        let config = StackConfig {
            min_rows: 4,
            classify_grid: vec![spec(Task::Classify)],
            regress_grid: vec![spec(Task::Regress)],
            fraction_net: FractionConfig { hidden: 8, max_epochs: 30, ..FractionConfig::default() },
            ..StackConfig::seeded(5)
        };
        let bundle = train_stack(&data, &config).unwrap();
        (bundle, data)
    }

    #[test]
    fn roundtrip_preserves_the_bundle_exactly() {
        let (bundle, data) = trained_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.cct");
        save_bundle(&bundle, &path).unwrap();
        let loaded = load_bundle(&path).unwrap();
        assert_eq!(bundle, loaded);

        // Bit-identical serving after a disk roundtrip.
        for p in data.points().iter().take(12) {
            let a = predict_point(&bundle, &p.composition, &p.aust, p.log_rate).unwrap();
            let b = predict_point(&loaded, &p.composition, &p.aust, p.log_rate).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tampered_entries_are_rejected() {
        let (bundle, _) = trained_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.cct");
        save_bundle(&bundle, &path).unwrap();

        // Rebuild the archive, swapping one blob for different but valid
        // JSON while keeping the original manifest.
        let tampered = dir.path().join("tampered.cct");
        {
            let mut src = ZipArchive::new(File::open(&path).unwrap()).unwrap();
            let opts =
                SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
            let mut w = ZipWriter::new(File::create(&tampered).unwrap());
            for name in std::iter::once("manifest.json").chain(ARCHIVE_ENTRIES) {
                let bytes = if name == "train_diagrams.json" {
                    serde_json::to_vec(&vec!["forged".to_string()]).unwrap()
                } else {
                    read_entry(&mut src, name).unwrap()
                };
                w.start_file(name, opts).unwrap();
                w.write_all(&bytes).unwrap();
            }
            w.finish().unwrap();
        }
        let err = load_bundle(&tampered).unwrap_err();
        assert!(matches!(err, IoError::CorruptArchive(m) if m.contains("checksum")));
    }

    #[test]
    fn missing_entries_and_foreign_schemas_are_rejected() {
        let (bundle, _) = trained_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.cct");
        save_bundle(&bundle, &path).unwrap();

        // Drop one entry.
        let truncated = dir.path().join("truncated.cct");
        {
            let mut src = ZipArchive::new(File::open(&path).unwrap()).unwrap();
            let opts =
                SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
            let mut w = ZipWriter::new(File::create(&truncated).unwrap());
            for name in std::iter::once("manifest.json")
                .chain(ARCHIVE_ENTRIES.into_iter().filter(|n| *n != "models.json"))
            {
                let bytes = read_entry(&mut src, name).unwrap();
                w.start_file(name, opts).unwrap();
                w.write_all(&bytes).unwrap();
            }
            w.finish().unwrap();
        }
        assert!(matches!(load_bundle(&truncated), Err(IoError::CorruptArchive(_))));

        // Bump the manifest schema.
        let foreign = dir.path().join("foreign.cct");
        {
            let mut src = ZipArchive::new(File::open(&path).unwrap()).unwrap();
            let opts =
                SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
            let mut w = ZipWriter::new(File::create(&foreign).unwrap());
            let mut manifest: ArchiveManifest =
                serde_json::from_slice(&read_entry(&mut src, "manifest.json").unwrap()).unwrap();
            manifest.schema = 99;
            w.start_file("manifest.json", opts).unwrap();
            w.write_all(&serde_json::to_vec(&manifest).unwrap()).unwrap();
            for name in ARCHIVE_ENTRIES {
                let bytes = read_entry(&mut src, name).unwrap();
                w.start_file(name, opts).unwrap();
                w.write_all(&bytes).unwrap();
            }
            w.finish().unwrap();
        }
        assert!(matches!(
            load_bundle(&foreign),
            Err(IoError::SchemaVersionMismatch { found: 99, .. })
        ));

        // Not a zip at all.
        let garbage = dir.path().join("garbage.cct");
        std::fs::write(&garbage, b"not an archive").unwrap();
        assert!(matches!(load_bundle(&garbage), Err(IoError::Zip(_))));
    }
}
