//! Column declarations and the comma-separated connection record parser.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

const KDD_SCHEMA: &str = include_str!("../../data/kdd_schema.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Continuous,
    Discrete,
}

impl ColumnKind {
    pub fn parse(token: &str) -> Option<ColumnKind> {
        match token.trim().to_ascii_lowercase().as_str() {
            "continuous" | "numeric" => Some(ColumnKind::Continuous),
            "discrete" | "symbolic" => Some(ColumnKind::Discrete),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Discrete => "discrete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered feature column declarations. The class label is not part of the schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Schema> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("schema declares no columns".into()));
        }
        let mut seen = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if let Some(prev) = seen.insert(c.name.to_ascii_lowercase(), i) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate column `{}` (positions {} and {})",
                    c.name,
                    prev + 1,
                    i + 1
                )));
            }
        }
        Ok(Schema { columns })
    }

    /// The 41-column KDD Cup 1999 layout (34 continuous, 7 discrete).
    pub fn kdd() -> Schema {
        Schema::parse(KDD_SCHEMA).expect("bundled schema is valid")
    }

    /// Parses `name,kind` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Schema> {
        let mut columns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kind) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `name,kind`".into(),
            })?;
            let kind = ColumnKind::parse(kind).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("unknown column kind `{}`", kind.trim()),
            })?;
            columns.push(Column {
                name: name.trim().to_string(),
                kind,
            });
        }
        Schema::new(columns)
    }

    pub fn from_file(path: &Path) -> Result<Schema> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Schema::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn count(&self, kind: ColumnKind) -> usize {
        self.columns.iter().filter(|c| c.kind == kind).count()
    }
}

/// Values of one column across all records.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Continuous(Vec<f64>),
    /// Interned tokens: `tokens` in first-occurrence order, `codes[row]` indexes into it.
    Discrete { tokens: Vec<String>, codes: Vec<u32> },
}

impl ColumnValues {
    fn empty(kind: ColumnKind) -> ColumnValues {
        match kind {
            ColumnKind::Continuous => ColumnValues::Continuous(Vec::new()),
            ColumnKind::Discrete => ColumnValues::Discrete {
                tokens: Vec::new(),
                codes: Vec::new(),
            },
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Continuous(v) => v.len(),
            ColumnValues::Discrete { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Token of a discrete column at `row`.
    pub fn token(&self, row: usize) -> Option<&str> {
        match self {
            ColumnValues::Discrete { tokens, codes } => Some(tokens[codes[row] as usize].as_str()),
            ColumnValues::Continuous(_) => None,
        }
    }
}

/// Parsed connection records, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub schema: Schema,
    pub columns: Vec<ColumnValues>,
    pub labels: Vec<String>,
    pub source: Option<String>,
    /// Physical lines read, including blank lines and any header.
    pub line_count: usize,
}

impl RawDataset {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Skip the first non-empty line.
    pub header: bool,
}

struct Interner {
    index: HashMap<String, u32>,
}

/// Parses KDD-style records: one record per non-empty line, the schema's
/// features followed by a label with an optional trailing period.
pub fn parse_kdd_csv<R: Read>(
    stream: R,
    schema: &Schema,
    options: ParseOptions,
) -> Result<RawDataset> {
    let reader = BufReader::new(stream);
    let mut columns: Vec<ColumnValues> = schema
        .columns()
        .iter()
        .map(|c| ColumnValues::empty(c.kind))
        .collect();
    let mut interners: Vec<Interner> = schema
        .columns()
        .iter()
        .map(|_| Interner {
            index: HashMap::new(),
        })
        .collect();
    let mut labels = Vec::new();
    let mut line_count = 0;
    let mut header_pending = options.header;
    let expected = schema.len() + 1;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        line_count = line_no;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", expected, fields.len()),
            });
        }
        for (col, ((values, interner), field)) in columns
            .iter_mut()
            .zip(interners.iter_mut())
            .zip(&fields)
            .enumerate()
        {
            match values {
                ColumnValues::Continuous(v) => {
                    let x: f64 = field.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!(
                            "column `{}`: `{}` is not a number",
                            schema.columns()[col].name,
                            field
                        ),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!(
                                "column `{}`: `{}` is not finite",
                                schema.columns()[col].name,
                                field
                            ),
                        });
                    }
                    v.push(x);
                }
                ColumnValues::Discrete { tokens, codes } => {
                    if field.is_empty() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("column `{}` is empty", schema.columns()[col].name),
                        });
                    }
                    let code = match interner.index.get(*field) {
                        Some(&c) => c,
                        None => {
                            let c = tokens.len() as u32;
                            tokens.push(field.to_string());
                            interner.index.insert(field.to_string(), c);
                            c
                        }
                    };
                    codes.push(code);
                }
            }
        }
        let label = fields[expected - 1];
        let label = label.strip_suffix('.').unwrap_or(label);
        if label.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty label".into(),
            });
        }
        labels.push(label.to_string());
    }

    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(RawDataset {
        schema: schema.clone(),
        columns,
        labels,
        source: None,
        line_count,
    })
}

pub fn read_kdd_file(path: &Path, schema: &Schema, options: ParseOptions) -> Result<RawDataset> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut ds = parse_kdd_csv(file, schema, options).map_err(|e| e.in_file(path))?;
    ds.source = Some(path.display().to_string());
    Ok(ds)
}
