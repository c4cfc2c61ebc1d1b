//! Dataset manifest: a CSV with header `path,label,split` where labels are
//! `covid|normal` and splits are `train|test`. Paths must be unique; any
//! malformed row is rejected with its line number.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use radaug_core::image::Label;

use crate::error::Error;

pub const HEADER: [&str; 3] = ["path", "label", "split"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Label,
    pub split: Split,
}

/// Parsed dataset manifest with unique entry paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, Error> {
        let mut seen = HashSet::new();
        for (i, entry) in entries.iter().enumerate() {
            if !seen.insert(entry.path.as_str()) {
                return Err(Error::Invalid(format!(
                    "manifest entry {} duplicates path `{}`",
                    i + 1,
                    entry.path
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Parses manifest CSV text. Line numbers in errors count the header as
    /// line 1.
    pub fn parse_csv(text: &str) -> Result<Self, Error> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Invalid(format!("manifest header: {e}")))?;
        let found: Vec<&str> = headers.iter().collect();
        if found != HEADER {
            return Err(Error::Invalid(format!(
                "manifest header must be `path,label,split`, got `{}`",
                found.join(",")
            )));
        }

        let mut entries = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Invalid(format!("manifest: {e}")))?;
            let line = record
                .position()
                .map(|p| p.line())
                .unwrap_or(entries.len() as u64 + 2);
            if record.len() != 3 {
                return Err(Error::Invalid(format!(
                    "manifest line {line}: expected 3 fields, got {}",
                    record.len()
                )));
            }
            let path = record[0].to_string();
            if path.is_empty() {
                return Err(Error::Invalid(format!("manifest line {line}: empty path")));
            }
            let label = Label::parse(&record[1]).ok_or_else(|| {
                Error::Invalid(format!(
                    "manifest line {line}: unknown label `{}` (expected covid or normal)",
                    &record[1]
                ))
            })?;
            let split = Split::parse(&record[2]).ok_or_else(|| {
                Error::Invalid(format!(
                    "manifest line {line}: unknown split `{}` (expected train or test)",
                    &record[2]
                ))
            })?;
            if !seen.insert(path.clone()) {
                return Err(Error::Invalid(format!(
                    "manifest line {line}: duplicate path `{path}`"
                )));
            }
            entries.push(ManifestEntry { path, label, split });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text).map_err(|e| match e {
            Error::Invalid(msg) => Error::format(path, msg),
            other => other,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("path,label,split\n");
        for entry in &self.entries {
            out.push_str(&format!(
                "{},{},{}\n",
                entry.path,
                entry.label.as_str(),
                entry.split.as_str()
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn split_entries(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// `(covid, normal)` counts within a split.
    pub fn class_counts(&self, split: Split) -> (usize, usize) {
        let mut covid = 0;
        let mut normal = 0;
        for entry in self.split_entries(split) {
            match entry.label {
                Label::Covid => covid += 1,
                Label::Normal => normal += 1,
            }
        }
        (covid, normal)
    }
}

/// Resolves a manifest entry path relative to the manifest's directory.
/// Absolute entry paths pass through unchanged.
pub fn resolve_entry_path(manifest_path: &Path, entry_path: &str) -> PathBuf {
    let p = Path::new(entry_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        match manifest_path.parent() {
            Some(dir) => dir.join(p),
            None => p.to_path_buf(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_well_formed_manifest() {
        let text = "path,label,split\na.png,covid,train\nb.png,normal,test\n";
        let m = Manifest::parse_csv(text).unwrap();
        assert_eq!(m.entries().len(), 2);
        assert_eq!(m.entries()[0].label, Label::Covid);
        assert_eq!(m.entries()[1].split, Split::Test);
    }

    #[test]
    fn rejects_unknown_labels_with_line_numbers() {
        let text = "path,label,split\na.png,covid,train\nb.png,viral,train\n";
        let err = Manifest::parse_csv(text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("viral"), "{err}");
    }

    #[test]
    fn rejects_unknown_splits_with_line_numbers() {
        let text = "path,label,split\na.png,covid,validation\n";
        let err = Manifest::parse_csv(text).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("validation"), "{err}");
    }

    #[test]
    fn rejects_duplicate_paths() {
        let text = "path,label,split\na.png,covid,train\na.png,normal,train\n";
        let err = Manifest::parse_csv(text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_a_wrong_header() {
        let text = "file,label,split\na.png,covid,train\n";
        let err = Manifest::parse_csv(text).unwrap_err().to_string();
        assert!(err.contains("header"), "{err}");
    }

    #[test]
    fn rejects_case_variant_labels() {
        let text = "path,label,split\na.png,COVID,train\n";
        assert!(Manifest::parse_csv(text).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let text = "path,label,split\nimgs/a.png,covid,train\nimgs/b.pgm,normal,test\n";
        let m = Manifest::parse_csv(text).unwrap();
        assert_eq!(m.to_csv_string(), text);
        assert_eq!(Manifest::parse_csv(&m.to_csv_string()).unwrap(), m);
    }

    #[test]
    fn class_counts_split_correctly() {
        let mut rows = String::from("path,label,split\n");
        for i in 0..31 {
            rows.push_str(&format!("c{i}.png,covid,train\n"));
        }
        for i in 0..2000 {
            rows.push_str(&format!("n{i}.png,normal,train\n"));
        }
        for i in 0..40 {
            rows.push_str(&format!("tc{i}.png,covid,test\n"));
        }
        for i in 0..3000 {
            rows.push_str(&format!("tn{i}.png,normal,test\n"));
        }
        let m = Manifest::parse_csv(&rows).unwrap();
        assert_eq!(m.class_counts(Split::Train), (31, 2000));
        assert_eq!(m.class_counts(Split::Test), (40, 3000));
        assert_eq!(m.split_entries(Split::Train).count(), 2031);
        assert_eq!(m.split_entries(Split::Test).count(), 3040);
    }

    #[test]
    fn relative_paths_resolve_against_the_manifest_directory() {
        let resolved = resolve_entry_path(Path::new("/data/set/manifest.csv"), "imgs/a.png");
        assert_eq!(resolved, PathBuf::from("/data/set/imgs/a.png"));
        let absolute = resolve_entry_path(Path::new("/data/set/manifest.csv"), "/other/b.png");
        assert_eq!(absolute, PathBuf::from("/other/b.png"));
    }
}
