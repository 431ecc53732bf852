use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum samples per subject: one gallery plus two probe items.
pub const MIN_SAMPLES_PER_SUBJECT: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandExclusion {
    pub drop_first: usize,
    pub drop_last: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub subject: String,
    /// Cube header path, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub session: u32,
}

/// JSON dataset description.
///
/// ```json
/// {
///   "subjects": ["s000", "s001"],
///   "samples": [{"subject": "s000", "path": "s000_0.hdr", "session": 0}],
///   "band_exclusion": {"drop_first": 6, "drop_last": 3}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub subjects: Vec<String>,
    pub samples: Vec<Sample>,
    #[serde(default)]
    pub band_exclusion: BandExclusion,
    #[serde(skip)]
    root: PathBuf,
}

impl DatasetManifest {
    pub fn new(subjects: Vec<String>, samples: Vec<Sample>, band_exclusion: BandExclusion) -> Self {
        Self {
            subjects,
            samples,
            band_exclusion,
            root: PathBuf::new(),
        }
    }

    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.root = root.into();
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn validate(&self) -> Result<()> {
        let mut counts: BTreeMap<&str, usize> =
            self.subjects.iter().map(|s| (s.as_str(), 0)).collect();
        if counts.len() != self.subjects.len() {
            return Err(Error::Manifest("duplicate subject id".into()));
        }
        for s in &self.samples {
            match counts.get_mut(s.subject.as_str()) {
                Some(c) => *c += 1,
                None => {
                    return Err(Error::Manifest(format!(
                        "sample {} references unknown subject `{}`",
                        s.path.display(),
                        s.subject
                    )))
                }
            }
        }
        if let Some((subject, n)) = counts
            .iter()
            .find(|(_, &n)| n < MIN_SAMPLES_PER_SUBJECT)
        {
            return Err(Error::Manifest(format!(
                "subject `{subject}` has {n} samples, need at least {MIN_SAMPLES_PER_SUBJECT}"
            )));
        }
        Ok(())
    }

    /// Keeps only the first `n` subjects and their samples.
    pub fn limit_subjects(&self, n: usize) -> Self {
        let keep: Vec<String> = self.subjects.iter().take(n).cloned().collect();
        let samples = self
            .samples
            .iter()
            .filter(|s| keep.contains(&s.subject))
            .cloned()
            .collect();
        Self {
            subjects: keep,
            samples,
            band_exclusion: self.band_exclusion,
            root: self.root.clone(),
        }
    }

    pub fn subject_index(&self, subject: &str) -> Option<usize> {
        self.subjects.iter().position(|s| s == subject)
    }

    /// Sample indices grouped per subject, in subject order.
    pub fn samples_by_subject(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.subjects.len()];
        for (i, s) in self.samples.iter().enumerate() {
            if let Some(k) = self.subject_index(&s.subject) {
                groups[k].push(i);
            }
        }
        groups
    }

    pub fn sample_path(&self, index: usize) -> PathBuf {
        let p = &self.samples[index].path;
        if p.is_absolute() {
            p.clone()
        } else {
            self.root.join(p)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text)?;
        manifest.validate()?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest.with_root(root))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        crate::io::write_file(path.as_ref(), text.as_bytes())
    }
}
