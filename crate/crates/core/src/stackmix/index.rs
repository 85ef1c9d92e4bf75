use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lexicon::{MweLexicon, TokenizerBank};
use crate::ctc::{Alphabet, BoundarySet, SymbolSpan};
use crate::{Error, RasterImage, Result};

/// One boundary-annotated line as stored in boundary and index files.
///
/// Field order is alphabetical so serialized files have sorted keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub id: String,
    pub image_path: String,
    pub spans: Vec<SymbolSpan>,
    pub width: u32,
}

impl LineRecord {
    pub fn boundaries(&self) -> Result<BoundarySet> {
        BoundarySet::new(self.id.clone(), self.width, self.spans.clone())
    }
}

/// On-disk form shared by boundary files (no expressions) and fragment
/// index files.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexFile {
    pub alphabet: String,
    #[serde(default)]
    pub expressions: BTreeMap<usize, Vec<String>>,
    pub lines: Vec<LineRecord>,
}

impl IndexFile {
    /// Read a boundary or index file. Relative image paths are resolved
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut file: IndexFile =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for line in &mut file.lines {
            let p = Path::new(&line.image_path);
            if p.is_relative() {
                line.image_path = base.join(p).to_string_lossy().into_owned();
            }
        }
        Ok(file)
    }

    /// Write as compact JSON with sorted keys. Image paths are stored
    /// relative to the file's directory, except absolute paths outside it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path
            .parent()
            .map(absolute)
            .transpose()?
            .unwrap_or_default();
        let mut out = self.clone();
        for line in &mut out.lines {
            let given = Path::new(&line.image_path);
            let abs = absolute(given)?;
            let rel = match abs.strip_prefix(&base) {
                Ok(inside) => Some(inside.to_path_buf()),
                Err(_) if given.is_relative() => pathdiff::diff_paths(&abs, &base),
                Err(_) => None,
            };
            if let Some(rel) = rel {
                line.image_path = rel.to_string_lossy().into_owned();
            }
        }
        let mut bytes = serde_json::to_vec(&out)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    let p = if p.as_os_str().is_empty() { Path::new(".") } else { p };
    Ok(std::path::absolute(p)?)
}

/// A source line known to the index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    pub boundaries: BoundarySet,
    pub image_path: PathBuf,
}

/// Image slice covering one token, referenced by source line and column span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub line_id: Arc<str>,
    pub token: Arc<str>,
    pub start_px: u32,
    pub end_px: u32,
}

/// Token text to the fragments that depict it.
#[derive(Debug, Clone)]
pub struct FragmentIndex {
    alphabet: Alphabet,
    lines: Vec<SourceLine>,
    lexicons: Vec<MweLexicon>,
    entries: BTreeMap<String, Vec<Fragment>>,
    atoms: BTreeSet<char>,
}

/// Index every single character and every lexicon expression occurring in
/// `lines`. A fragment spans from its first character's start to its last
/// character's end.
pub fn build_fragment_index(
    lines: Vec<SourceLine>,
    alphabet: &Alphabet,
    bank: &TokenizerBank,
) -> Result<FragmentIndex> {
    FragmentIndex::build(lines, alphabet.clone(), bank.lexicons().to_vec())
}

impl FragmentIndex {
    fn build(lines: Vec<SourceLine>, alphabet: Alphabet, lexicons: Vec<MweLexicon>) -> Result<Self> {
        let mut seen = HashSet::new();
        let max_dim = lexicons.iter().map(MweLexicon::max_dim).max().unwrap_or(1);
        let known: HashSet<&str> = lexicons
            .iter()
            .flat_map(|l| l.expressions().iter().map(String::as_str))
            .collect();

        let mut entries: BTreeMap<String, Vec<Fragment>> = BTreeMap::new();
        let mut atoms = BTreeSet::new();
        for line in &lines {
            let b = &line.boundaries;
            if !seen.insert(b.line_id()) {
                return Err(Error::invalid(format!("duplicate line id {:?}", b.line_id())));
            }
            if let Some(s) = b.spans().iter().find(|s| !alphabet.contains(s.ch)) {
                return Err(Error::CorruptBoundary {
                    line_id: b.line_id().to_string(),
                    reason: format!("character {:?} is not in the alphabet", s.ch),
                });
            }
            let line_id: Arc<str> = b.line_id().into();
            let spans = b.spans();
            let mut key = String::new();
            for i in 0..spans.len() {
                atoms.insert(spans[i].ch);
                key.clear();
                for n in 1..=max_dim.min(spans.len() - i) {
                    key.push(spans[i + n - 1].ch);
                    if n > 1 && !known.contains(key.as_str()) {
                        continue;
                    }
                    let list = entries.entry(key.clone()).or_default();
                    let token = list
                        .first()
                        .map(|f| f.token.clone())
                        .unwrap_or_else(|| key.as_str().into());
                    list.push(Fragment {
                        line_id: line_id.clone(),
                        token,
                        start_px: spans[i].start_px,
                        end_px: spans[i + n - 1].end_px,
                    });
                }
            }
        }
        Ok(Self {
            alphabet,
            lines,
            lexicons,
            entries,
            atoms,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn lines(&self) -> &[SourceLine] {
        &self.lines
    }

    pub fn line(&self, id: &str) -> Option<&SourceLine> {
        self.lines.iter().find(|l| l.boundaries.line_id() == id)
    }

    /// The lexicons the index was built with, in bank order.
    pub fn lexicons(&self) -> &[MweLexicon] {
        &self.lexicons
    }

    /// Tokenizer bank over the stored lexicons with the given probabilities.
    pub fn bank(&self, probs: Vec<f64>) -> Result<TokenizerBank> {
        TokenizerBank::new(self.lexicons.clone(), probs, self.atoms.clone())
    }

    pub fn fragments(&self, token: &str) -> &[Fragment] {
        self.entries.get(token).map_or(&[], Vec::as_slice)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn atoms(&self) -> &BTreeSet<char> {
        &self.atoms
    }

    pub fn fragment_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Number of indexed tokens per length in characters.
    pub fn token_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for key in self.entries.keys() {
            *counts.entry(key.chars().count()).or_default() += 1;
        }
        counts
    }

    pub fn to_file(&self) -> IndexFile {
        IndexFile {
            alphabet: self.alphabet.as_string(),
            expressions: self
                .lexicons
                .iter()
                .map(|l| (l.max_dim(), l.expressions().iter().cloned().collect()))
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    id: l.boundaries.line_id().to_string(),
                    image_path: l.image_path.to_string_lossy().into_owned(),
                    spans: l.boundaries.spans().to_vec(),
                    width: l.boundaries.width(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: IndexFile) -> Result<Self> {
        let alphabet = Alphabet::from_str(&file.alphabet)?;
        let lexicons = file
            .expressions
            .into_iter()
            .map(|(dim, exprs)| MweLexicon::new(dim, exprs))
            .collect::<Result<Vec<_>>>()?;
        let lines = file
            .lines
            .into_iter()
            .map(|r| {
                Ok(SourceLine {
                    boundaries: r.boundaries()?,
                    image_path: PathBuf::from(r.image_path),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(lines, alphabet, lexicons)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(IndexFile::load(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_file().save(path)
    }

    /// SHA-256 of the serialized index.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_file()).expect("index serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Source of line images, looked up by line id. Must tolerate concurrent readers.
pub trait ImageStore: Sync {
    fn image(&self, line_id: &str) -> Result<Arc<RasterImage>>;
}

/// Images held in memory.
#[derive(Debug, Default, Clone)]
pub struct MemoryImageStore {
    images: HashMap<String, Arc<RasterImage>>,
}

impl MemoryImageStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, line_id: impl Into<String>, image: RasterImage) {
        self.images.insert(line_id.into(), Arc::new(image));
    }
}

impl ImageStore for MemoryImageStore {
    fn image(&self, line_id: &str) -> Result<Arc<RasterImage>> {
        self.images
            .get(line_id)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no image for line {line_id:?}")))
    }
}

/// Loads source images from disk on first use and keeps them.
#[derive(Debug, Default)]
pub struct FileImageStore {
    paths: HashMap<String, PathBuf>,
    cache: RwLock<HashMap<String, Arc<RasterImage>>>,
}

impl FileImageStore {
    pub fn for_index(index: &FragmentIndex) -> Self {
        Self {
            paths: index
                .lines()
                .iter()
                .map(|l| (l.boundaries.line_id().to_string(), l.image_path.clone()))
                .collect(),
            cache: RwLock::default(),
        }
    }
}

impl ImageStore for FileImageStore {
    fn image(&self, line_id: &str) -> Result<Arc<RasterImage>> {
        if let Some(im) = self.cache.read().expect("image cache poisoned").get(line_id) {
            return Ok(im.clone());
        }
        let path = self
            .paths
            .get(line_id)
            .ok_or_else(|| Error::invalid(format!("no image for line {line_id:?}")))?;
        let image = Arc::new(RasterImage::load(path)?);
        self.cache
            .write()
            .expect("image cache poisoned")
            .insert(line_id.to_string(), image.clone());
        Ok(image)
    }
}
