//! Attack name to category mapping.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

use super::schema::RawDataset;

const KDD_LABELS: &str = include_str!("../../data/kdd_labels.txt");

/// The five traffic categories. Discriminants are the class ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Normal = 0,
    Dos = 1,
    R2l = 2,
    U2r = 3,
    Probe = 4,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Normal,
        Category::Dos,
        Category::R2l,
        Category::U2r,
        Category::Probe,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Normal => "Normal",
            Category::Dos => "DOS",
            Category::R2l => "R2L",
            Category::U2r => "U2R",
            Category::Probe => "Probe",
        }
    }

    pub fn parse(token: &str) -> Option<Category> {
        match token.trim().to_ascii_lowercase().as_str() {
            "normal" => Some(Category::Normal),
            "dos" => Some(Category::Dos),
            "r2l" => Some(Category::R2l),
            "u2r" => Some(Category::U2r),
            "probe" | "probing" => Some(Category::Probe),
            _ => None,
        }
    }

    pub fn names() -> Vec<String> {
        Category::ALL.iter().map(|c| c.name().to_string()).collect()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    #[default]
    Error,
    Assign(Category),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    entries: HashMap<String, Category>,
    pub unknown_policy: UnknownPolicy,
}

impl LabelMap {
    /// Standard KDD Cup 1999 assignment of attack names (training and test sets).
    pub fn kdd() -> LabelMap {
        LabelMap::parse(KDD_LABELS).expect("bundled label map is valid")
    }

    /// Parses `attack_name,category` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<LabelMap> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, cat) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `attack_name,category`".into(),
            })?;
            let cat = Category::parse(cat).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("unknown category `{}`", cat.trim()),
            })?;
            entries.insert(normalize(name), cat);
        }
        if entries.get("normal") != Some(&Category::Normal) {
            return Err(Error::InvalidArgument(
                "label map must map `normal` to Normal".into(),
            ));
        }
        Ok(LabelMap {
            entries,
            unknown_policy: UnknownPolicy::Error,
        })
    }

    pub fn from_file(path: &Path) -> Result<LabelMap> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        LabelMap::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn with_policy(mut self, policy: UnknownPolicy) -> LabelMap {
        self.unknown_policy = policy;
        self
    }

    pub fn insert(&mut self, name: &str, category: Category) {
        self.entries.insert(normalize(name), category);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, label: &str) -> Result<Category> {
        match self.entries.get(&normalize(label)) {
            Some(&c) => Ok(c),
            None => match self.unknown_policy {
                UnknownPolicy::Error => Err(Error::UnknownLabel(label.to_string())),
                UnknownPolicy::Assign(c) => Ok(c),
            },
        }
    }
}

fn normalize(label: &str) -> String {
    let label = label.trim();
    label.strip_suffix('.').unwrap_or(label).to_ascii_lowercase()
}

/// Class ids per row plus the per-category histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    pub ids: Vec<usize>,
    pub histogram: [usize; 5],
}

impl LabelAssignment {
    pub fn class_names(&self) -> Vec<String> {
        Category::names()
    }
}

pub fn map_labels(ds: &RawDataset, map: &LabelMap) -> Result<LabelAssignment> {
    let mut cache: HashMap<&str, usize> = HashMap::new();
    let mut ids = Vec::with_capacity(ds.rows());
    let mut histogram = [0usize; 5];
    for label in &ds.labels {
        let id = match cache.get(label.as_str()) {
            Some(&id) => id,
            None => {
                let id = map.lookup(label)?.id();
                cache.insert(label, id);
                id
            }
        };
        histogram[id] += 1;
        ids.push(id);
    }
    Ok(LabelAssignment { ids, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::schema::{parse_kdd_csv, Schema};

    fn raw(labels: &[&str]) -> RawDataset {
        let text: String = labels.iter().map(|l| format!("1,{l}\n")).collect();
        let schema = Schema::parse("x,continuous").unwrap();
        parse_kdd_csv(text.as_bytes(), &schema, Default::default()).unwrap()
    }

    #[test]
    fn default_map_covers_standard_attacks() {
        let m = LabelMap::kdd();
        assert_eq!(m.lookup("normal").unwrap(), Category::Normal);
        assert_eq!(m.lookup("smurf.").unwrap(), Category::Dos);
        assert_eq!(m.lookup("guess_passwd").unwrap(), Category::R2l);
        assert_eq!(m.lookup("buffer_overflow").unwrap(), Category::U2r);
        assert_eq!(m.lookup("satan").unwrap(), Category::Probe);
        assert_eq!(m.lookup("httptunnel").unwrap(), Category::U2r);
    }

    #[test]
    fn histogram_sums_to_rows() {
        let ds = raw(&["normal.", "smurf.", "neptune.", "satan.", "perl.", "imap."]);
        let a = map_labels(&ds, &LabelMap::kdd()).unwrap();
        assert_eq!(a.histogram, [1, 2, 1, 1, 1]);
        assert_eq!(a.ids, vec![0, 1, 1, 4, 3, 2]);
        assert_eq!(a.histogram.iter().sum::<usize>(), ds.rows());
    }

    #[test]
    fn all_normal_file() {
        let ds = raw(&["normal."; 7]);
        let a = map_labels(&ds, &LabelMap::kdd()).unwrap();
        assert_eq!(a.histogram, [7, 0, 0, 0, 0]);
    }

    #[test]
    fn unknown_label_errors_with_token() {
        let ds = raw(&["normal.", "teleport."]);
        match map_labels(&ds, &LabelMap::kdd()) {
            Err(Error::UnknownLabel(t)) => assert_eq!(t, "teleport"),
            other => panic!("unexpected {other:?}"),
        }
        let lenient = LabelMap::kdd().with_policy(UnknownPolicy::Assign(Category::R2l));
        let a = map_labels(&ds, &lenient).unwrap();
        assert_eq!(a.histogram, [1, 0, 1, 0, 0]);
    }

    #[test]
    fn map_must_send_normal_to_normal() {
        assert!(LabelMap::parse("normal,dos\n").is_err());
        assert!(LabelMap::parse("smurf,dos\n").is_err());
        assert!(LabelMap::parse("normal,normal\nx,bogus\n").is_err());
    }
}
