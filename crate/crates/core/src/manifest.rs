//! Data manifest: where embeddings and benchmarks live on disk.
//!
//! Relative paths resolve against the manifest's directory. An optional
//! `sha256` per file is checked by [`Manifest::verify`].

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eval::{Separator, WordSimFormat};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingFormat {
    Text,
    Word2vecBin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: EmbeddingFormat,
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSimEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_score_column")]
    pub score_column: usize,
    #[serde(default)]
    pub separator: Option<Separator>,
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default)]
    pub sha256: Option<String>,
}

impl WordSimEntry {
    pub fn format(&self) -> WordSimFormat {
        WordSimFormat {
            separator: self.separator,
            score_column: self.score_column,
            lowercase: self.lowercase,
        }
    }
}

/// An STS year laid out as a SentEval directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StsEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub include_smt: bool,
}

fn default_score_column() -> usize {
    2
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub embeddings: Vec<EmbeddingEntry>,
    #[serde(default)]
    pub wordsim: Vec<WordSimEntry>,
    #[serde(default)]
    pub sts: Vec<StsEntry>,
}

impl Manifest {
    /// Parses TOML and resolves relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        m.embeddings.iter_mut().for_each(|e| resolve(&mut e.path));
        m.wordsim.iter_mut().for_each(|e| resolve(&mut e.path));
        m.sts.iter_mut().for_each(|e| resolve(&mut e.path));
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn embedding(&self, name: &str) -> Option<&EmbeddingEntry> {
        self.embeddings.iter().find(|e| e.name == name)
    }

    pub fn wordsim(&self, name: &str) -> Option<&WordSimEntry> {
        self.wordsim.iter().find(|e| e.name == name)
    }

    pub fn sts(&self, name: &str) -> Option<&StsEntry> {
        self.sts.iter().find(|e| e.name == name)
    }

    /// Paths listed in the manifest that do not exist.
    pub fn missing(&self) -> Vec<&Path> {
        let paths = self
            .embeddings
            .iter()
            .map(|e| e.path.as_path())
            .chain(self.wordsim.iter().map(|e| e.path.as_path()))
            .chain(self.sts.iter().map(|e| e.path.as_path()));
        paths.filter(|p| !p.exists()).collect()
    }

    /// Checks existence and every pinned checksum.
    pub fn verify(&self) -> Result<()> {
        if let Some(p) = self.missing().first() {
            return Err(Error::Manifest(format!("missing {}", p.display())));
        }
        let pinned = self
            .embeddings
            .iter()
            .map(|e| (&e.path, &e.sha256))
            .chain(self.wordsim.iter().map(|e| (&e.path, &e.sha256)));
        for (path, sha) in pinned {
            if let Some(expected) = sha {
                let actual = sha256_file(path)?;
                if !actual.eq_ignore_ascii_case(expected) {
                    return Err(Error::Manifest(format!(
                        "checksum mismatch for {}: expected {expected}, got {actual}",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
