//! Line manifests: `id<TAB>image_path<TAB>transcript[<TAB>split]`, UTF-8.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub id: String,
    pub image_path: PathBuf,
    pub transcript: String,
    pub split: Option<String>,
}

impl ManifestRecord {
    /// Records without a split tag count as training data.
    pub fn is_train(&self) -> bool {
        self.split.as_deref().is_none_or(|s| s == "train")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Parse a manifest. Relative image paths are resolved against the
    /// manifest's directory, ids must be unique and every image must exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let manifest = Self::parse(&text, base)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        for r in &manifest.records {
            if !r.image_path.is_file() {
                bail!(
                    "manifest {}: image for line {:?} not found at {}",
                    path.display(),
                    r.id,
                    r.image_path.display()
                );
            }
        }
        Ok(manifest)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut records = Vec::new();
        let mut ids = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.splitn(4, '\t').collect();
            if cols.len() < 3 {
                bail!("line {}: expected id, image path and transcript", n + 1);
            }
            if !ids.insert(cols[0].to_string()) {
                bail!("line {}: duplicate id {:?}", n + 1, cols[0]);
            }
            let split = cols.get(3).map(|s| s.to_string()).filter(|s| !s.is_empty());
            records.push(ManifestRecord {
                id: cols[0].to_string(),
                image_path: base.join(cols[1]),
                transcript: cols[2].to_string(),
                split,
            });
        }
        Ok(Self { records })
    }

    /// Write the manifest with image paths relative to its directory, except
    /// absolute paths outside it.
    pub fn save(&self, path: &Path) -> Result<()> {
        let base = std::path::absolute(path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))?;
        let mut out = String::new();
        for r in &self.records {
            if r.id.contains(['\t', '\n']) || r.transcript.contains(['\t', '\n']) {
                bail!("line {:?} cannot be written as TSV", r.id);
            }
            let abs = std::path::absolute(&r.image_path)?;
            let shown = match abs.strip_prefix(&base) {
                Ok(inside) => inside.to_path_buf(),
                Err(_) if r.image_path.is_relative() => pathdiff::diff_paths(&abs, &base).unwrap_or(abs),
                Err(_) => abs,
            };
            out.push_str(&format!("{}\t{}\t{}", r.id, shown.display(), r.transcript));
            if let Some(split) = &r.split {
                out.push('\t');
                out.push_str(split);
            }
            out.push('\n');
        }
        std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
    }
}

/// File-name-safe form of a line id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}
