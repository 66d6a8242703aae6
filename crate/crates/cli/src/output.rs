//! In-memory artifact set, manifest with content hashes, and the single writer
//! that owns the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "kwg-manifest-1";

/// Relative path to contents; ordering fixes the manifest layout.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, path: impl Into<String>, bytes: Vec<u8>) {
        let path = path.into();
        assert!(path != MANIFEST && !path.starts_with('/') && !path.contains(".."), "artifact path {path}");
        self.files.insert(path, bytes);
    }

    pub fn add_text(&mut self, path: impl Into<String>, text: impl Into<String>) {
        self.add(path, text.into().into_bytes());
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(|v| v.as_slice())
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(|k| k.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub command: String,
    pub status: String,
    pub rng: String,
    pub seed: u64,
    pub config: String,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Manifest {
    pub fn of(artifacts: &Artifacts, command: &str, status: &str, seed: u64, config: &str) -> Self {
        let files = artifacts
            .files
            .iter()
            .map(|(p, b)| ManifestEntry { path: p.clone(), bytes: b.len() as u64, sha256: sha256_hex(b) })
            .collect();
        Self {
            format: MANIFEST_FORMAT.into(),
            command: command.into(),
            status: status.into(),
            rng: kwg_core::random::RNG_ID.into(),
            seed,
            config: config.into(),
            files,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
        }
    }
    Ok(())
}

fn remove_empty_dirs(dir: &Path, keep: &Path) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            remove_empty_dirs(&entry.path(), keep)?;
        }
    }
    if dir != keep && fs::read_dir(dir)?.next().is_none() {
        fs::remove_dir(dir)?;
    }
    Ok(())
}

/// Replaces the outputs of a previous run in `dir` by `artifacts` plus a manifest.
/// Files not listed by a previous manifest are never touched; their presence is an error.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts, manifest: &Manifest) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let previous = dir.join(MANIFEST);
    if previous.exists() {
        let text = fs::read_to_string(&previous)?;
        let old: Manifest = serde_json::from_str(&text)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("unreadable previous manifest: {e}")))?;
        for f in &old.files {
            let p = dir.join(&f.path);
            if p.is_file() && !f.path.contains("..") {
                fs::remove_file(p)?;
            }
        }
        fs::remove_file(&previous)?;
        remove_empty_dirs(dir, dir)?;
    }
    let mut stray = Vec::new();
    collect_files(dir, dir, &mut stray)?;
    if !stray.is_empty() {
        stray.sort();
        let names: Vec<String> = stray.iter().map(|p| p.display().to_string()).collect();
        return Err(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("output directory {} holds files not listed in a manifest: {}", dir.display(), names.join(", ")),
        ));
    }
    for (path, bytes) in &artifacts.files {
        let p = dir.join(path);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(p, bytes)?;
    }
    fs::write(previous, manifest.to_json())
}

/// Checks every manifest entry against the directory contents.
pub fn verify_directory(dir: &Path) -> io::Result<Manifest> {
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let mut listed: Vec<PathBuf> = m.files.iter().map(|f| PathBuf::from(&f.path)).collect();
    listed.push(PathBuf::from(MANIFEST));
    listed.sort();
    let mut present = Vec::new();
    collect_files(dir, dir, &mut present)?;
    present.sort();
    if listed != present {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "manifest and directory contents differ"));
    }
    for f in &m.files {
        if sha256_hex(&fs::read(dir.join(&f.path))?) != f.sha256 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("hash mismatch for {}", f.path)));
        }
    }
    Ok(m)
}
