//! Single-file binary container for datasets and fitted models.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    b"GDAKIT\0\n"
//! version  u32
//! kind     string
//! count    u32
//! entries  count × { name: string, dtype: u8, ndim: u32, shape: u64 × ndim, data }
//! ```
//!
//! A string is a `u32` byte length followed by UTF-8. `dtype` is 0 for
//! `f64`, 1 for `u64`, 2 for strings. Matrices are stored row-major with
//! shape `[rows, cols]`.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::classifiers::{MlpConfig, MlpModel, Node, TreeConfig, TreeModel};
use crate::dataset::{ColumnKind, FeatureGroup, NumericDataset};
use crate::eigencore::{CenteringStats, KernelSpec, SymmetricMatrix};
use crate::error::{check_dim, Error, Result};
use crate::gda::GdaModel;
use crate::lda::{LdaModel, ScatterPair};

pub const MAGIC: &[u8; 8] = b"GDAKIT\0\n";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    F64 { shape: Vec<usize>, data: Vec<f64> },
    U64 { shape: Vec<usize>, data: Vec<u64> },
    Str { shape: Vec<usize>, data: Vec<String> },
}

impl Array {
    pub fn shape(&self) -> &[usize] {
        match self {
            Array::F64 { shape, .. } | Array::U64 { shape, .. } | Array::Str { shape, .. } => shape,
        }
    }

    fn len(&self) -> usize {
        match self {
            Array::F64 { data, .. } => data.len(),
            Array::U64 { data, .. } => data.len(),
            Array::Str { data, .. } => data.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub kind: String,
    pub entries: Vec<(String, Array)>,
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

impl Container {
    pub fn new(kind: &str) -> Container {
        Container {
            kind: kind.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn put(&mut self, name: &str, array: Array) {
        let expected: usize = array.shape().iter().product();
        assert_eq!(expected, array.len(), "shape of `{name}` does not match its data");
        self.entries.retain(|(n, _)| n != name);
        self.entries.push((name.to_string(), array));
    }

    pub fn put_f64(&mut self, name: &str, data: Vec<f64>) {
        self.put(name, Array::F64 { shape: vec![data.len()], data });
    }

    pub fn put_u64(&mut self, name: &str, data: Vec<u64>) {
        self.put(name, Array::U64 { shape: vec![data.len()], data });
    }

    pub fn put_usize(&mut self, name: &str, data: &[usize]) {
        self.put_u64(name, data.iter().map(|&v| v as u64).collect());
    }

    pub fn put_strings(&mut self, name: &str, data: Vec<String>) {
        self.put(name, Array::Str { shape: vec![data.len()], data });
    }

    pub fn put_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let data = m.transpose().as_slice().to_vec();
        self.put(name, Array::F64 { shape: vec![m.nrows(), m.ncols()], data });
    }

    pub fn get(&self, name: &str) -> Result<&Array> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| fmt_err(format!("{} container has no entry `{name}`", self.kind)))
    }

    pub fn f64s(&self, name: &str) -> Result<&[f64]> {
        match self.get(name)? {
            Array::F64 { data, .. } => Ok(data),
            _ => Err(fmt_err(format!("entry `{name}` is not f64"))),
        }
    }

    pub fn u64s(&self, name: &str) -> Result<&[u64]> {
        match self.get(name)? {
            Array::U64 { data, .. } => Ok(data),
            _ => Err(fmt_err(format!("entry `{name}` is not u64"))),
        }
    }

    pub fn usizes(&self, name: &str) -> Result<Vec<usize>> {
        self.u64s(name)?
            .iter()
            .map(|&v| usize::try_from(v).map_err(|_| fmt_err(format!("entry `{name}` overflows usize"))))
            .collect()
    }

    pub fn strings(&self, name: &str) -> Result<&[String]> {
        match self.get(name)? {
            Array::Str { data, .. } => Ok(data),
            _ => Err(fmt_err(format!("entry `{name}` is not a string array"))),
        }
    }

    pub fn scalar_f64(&self, name: &str) -> Result<f64> {
        match self.f64s(name)? {
            [v] => Ok(*v),
            _ => Err(fmt_err(format!("entry `{name}` is not a scalar"))),
        }
    }

    pub fn scalar_usize(&self, name: &str) -> Result<usize> {
        match self.usizes(name)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(fmt_err(format!("entry `{name}` is not a scalar"))),
        }
    }

    pub fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        match self.get(name)? {
            Array::F64 { shape, data } if shape.len() == 2 => {
                Ok(DMatrix::from_row_slice(shape[0], shape[1], data))
            }
            _ => Err(fmt_err(format!("entry `{name}` is not an f64 matrix"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        write_str(&mut out, &self.kind);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (name, array) in &self.entries {
            write_str(&mut out, name);
            let dtype: u8 = match array {
                Array::F64 { .. } => 0,
                Array::U64 { .. } => 1,
                Array::Str { .. } => 2,
            };
            out.push(dtype);
            out.extend_from_slice(&(array.shape().len() as u32).to_le_bytes());
            for &s in array.shape() {
                out.extend_from_slice(&(s as u64).to_le_bytes());
            }
            match array {
                Array::F64 { data, .. } => data.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
                Array::U64 { data, .. } => data.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
                Array::Str { data, .. } => data.iter().for_each(|s| write_str(&mut out, s)),
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Container> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(fmt_err("not a gdakit container (bad magic)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(fmt_err(format!("unsupported container version {version}")));
        }
        let kind = r.string()?;
        let count = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name = r.string()?;
            let dtype = r.take(1)?[0];
            let ndim = r.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim.min(8));
            for _ in 0..ndim {
                shape.push(usize::try_from(r.u64()?).map_err(|_| fmt_err("shape overflows usize"))?);
            }
            let n = shape
                .iter()
                .try_fold(1usize, |a, &b| a.checked_mul(b))
                .ok_or_else(|| fmt_err("shape overflows usize"))?;
            if dtype < 2 && n > r.remaining() / 8 {
                return Err(fmt_err(format!("entry `{name}` is truncated")));
            }
            let array = match dtype {
                0 => Array::F64 {
                    shape,
                    data: (0..n).map(|_| r.u64().map(f64::from_bits)).collect::<Result<_>>()?,
                },
                1 => Array::U64 {
                    shape,
                    data: (0..n).map(|_| r.u64()).collect::<Result<_>>()?,
                },
                2 => Array::Str {
                    shape,
                    data: (0..n).map(|_| r.string()).collect::<Result<_>>()?,
                },
                t => return Err(fmt_err(format!("entry `{name}` has unknown dtype {t}"))),
            };
            entries.push((name, array));
        }
        if r.remaining() != 0 {
            return Err(fmt_err("trailing bytes after last entry"));
        }
        Ok(Container { kind, entries })
    }

    /// Writes to a sibling temporary file, then renames over `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Container> {
        let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        Container::from_bytes(&bytes).map_err(|e| e.in_file(path))
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(fmt_err(format!("expected a {kind} container, found {}", self.kind)));
        }
        Ok(())
    }
}

/// Write-then-rename so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |e: std::io::Error| Error::from(e).in_file(path);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(wrap)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(wrap)
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(fmt_err("unexpected end of container"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| fmt_err("invalid UTF-8 string"))
    }
}

/// Types stored in a [`Container`].
pub trait Persist: Sized {
    const KIND: &'static str;
    fn to_container(&self) -> Container;
    fn from_container(c: &Container) -> Result<Self>;

    fn save(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    fn load(path: &Path) -> Result<Self> {
        let c = Container::read(path)?;
        c.expect_kind(Self::KIND)
            .and_then(|_| Self::from_container(&c))
            .map_err(|e| e.in_file(path))
    }
}

fn put_groups(c: &mut Container, groups: &[FeatureGroup], column_names: &[String]) {
    c.put_strings("group_names", groups.iter().map(|g| g.name.clone()).collect());
    c.put_strings("group_kinds", groups.iter().map(|g| g.kind.as_str().to_string()).collect());
    c.put_usize("group_starts", &groups.iter().map(|g| g.start).collect::<Vec<_>>());
    c.put_usize("group_lens", &groups.iter().map(|g| g.len).collect::<Vec<_>>());
    c.put_strings("column_names", column_names.to_vec());
}

fn get_groups(c: &Container) -> Result<(Vec<FeatureGroup>, Vec<String>)> {
    let names = c.strings("group_names")?;
    let kinds = c.strings("group_kinds")?;
    let starts = c.usizes("group_starts")?;
    let lens = c.usizes("group_lens")?;
    check_dim(names.len(), kinds.len())?;
    check_dim(names.len(), starts.len())?;
    check_dim(names.len(), lens.len())?;
    let groups = (0..names.len())
        .map(|i| {
            Ok(FeatureGroup {
                name: names[i].clone(),
                kind: ColumnKind::parse(&kinds[i])
                    .ok_or_else(|| fmt_err(format!("unknown column kind `{}`", kinds[i])))?,
                start: starts[i],
                len: lens[i],
            })
        })
        .collect::<Result<_>>()?;
    Ok((groups, c.strings("column_names")?.to_vec()))
}

fn put_kernel(c: &mut Container, k: &KernelSpec) {
    let (name, params) = match *k {
        KernelSpec::Gaussian { denominator } => ("gaussian", vec![denominator]),
        KernelSpec::Linear => ("linear", vec![]),
        KernelSpec::Polynomial { degree, offset } => ("polynomial", vec![degree as f64, offset]),
    };
    c.put_strings("kernel", vec![name.to_string()]);
    c.put_f64("kernel_params", params);
}

fn get_kernel(c: &Container) -> Result<KernelSpec> {
    let p = c.f64s("kernel_params")?;
    let k = match (c.strings("kernel")?.first().map(String::as_str), p) {
        (Some("gaussian"), [d]) => KernelSpec::Gaussian { denominator: *d },
        (Some("linear"), []) => KernelSpec::Linear,
        (Some("polynomial"), [deg, off]) => KernelSpec::Polynomial {
            degree: *deg as u32,
            offset: *off,
        },
        _ => return Err(fmt_err("malformed kernel entry")),
    };
    k.validate()?;
    Ok(k)
}

impl Persist for NumericDataset {
    const KIND: &'static str = "dataset";

    fn to_container(&self) -> Container {
        let mut c = Container::new(Self::KIND);
        c.put_matrix("x", &self.x);
        c.put_usize("labels", &self.labels);
        c.put_strings("class_names", self.class_names.clone());
        put_groups(&mut c, &self.groups, &self.column_names);
        c
    }

    fn from_container(c: &Container) -> Result<Self> {
        let (groups, names) = get_groups(c)?;
        let ds = NumericDataset::new(
            c.matrix("x")?,
            c.usizes("labels")?,
            c.strings("class_names")?.to_vec(),
            groups,
            names,
        )?;
        if ds.labels.iter().any(|&l| l >= ds.class_count()) {
            return Err(fmt_err("label out of range"));
        }
        Ok(ds)
    }
}

impl Persist for LdaModel {
    const KIND: &'static str = "lda";

    fn to_container(&self) -> Container {
        let mut c = Container::new(Self::KIND);
        c.put_matrix("projection", &self.projection);
        c.put_f64("eigenvalues", self.eigenvalues.clone());
        c.put_f64("ridge", vec![self.ridge]);
        c.put_matrix("between", self.scatter.between.matrix());
        c.put_matrix("within", self.scatter.within.matrix());
        c.put_matrix("class_means", &self.scatter.class_means);
        c.put_f64("global_mean", self.scatter.global_mean.as_slice().to_vec());
        c.put_usize("class_sizes", &self.scatter.class_sizes);
        put_groups(&mut c, &self.groups, &self.column_names);
        c
    }

    fn from_container(c: &Container) -> Result<Self> {
        let (groups, column_names) = get_groups(c)?;
        let projection = c.matrix("projection")?;
        let global_mean = DVector::from_column_slice(c.f64s("global_mean")?);
        check_dim(projection.nrows(), global_mean.len())?;
        Ok(LdaModel {
            projection,
            eigenvalues: c.f64s("eigenvalues")?.to_vec(),
            ridge: c.scalar_f64("ridge")?,
            scatter: ScatterPair {
                between: SymmetricMatrix::new(c.matrix("between")?)?,
                within: SymmetricMatrix::new(c.matrix("within")?)?,
                class_means: c.matrix("class_means")?,
                global_mean,
                class_sizes: c.usizes("class_sizes")?,
            },
            groups,
            column_names,
        })
    }
}

impl Persist for GdaModel {
    const KIND: &'static str = "gda";

    fn to_container(&self) -> Container {
        let mut c = Container::new(Self::KIND);
        c.put_matrix("basis", &self.basis);
        c.put_usize("basis_labels", &self.basis_labels);
        c.put_usize("permutation", &self.permutation);
        c.put_usize("class_sizes", &self.class_sizes);
        c.put_strings("class_names", self.class_names.clone());
        put_kernel(&mut c, &self.kernel);
        c.put_matrix("alphas", &self.alphas);
        c.put_f64("eigenvalues", self.eigenvalues.clone());
        if let Some(s) = &self.centering {
            c.put_f64("centering_column_means", s.column_means.clone());
            c.put_f64("centering_grand_mean", vec![s.grand_mean]);
        }
        c.put_f64("ridge", vec![self.ridge]);
        c.put_f64("rank_tol", vec![self.rank_tol]);
        c.put_usize("kernel_rank", &[self.kernel_rank]);
        put_groups(&mut c, &self.groups, &self.column_names);
        c
    }

    fn from_container(c: &Container) -> Result<Self> {
        let (groups, column_names) = get_groups(c)?;
        let basis = c.matrix("basis")?;
        let alphas = c.matrix("alphas")?;
        check_dim(basis.nrows(), alphas.nrows())?;
        let centering = match c.get("centering_column_means") {
            Ok(_) => Some(CenteringStats {
                column_means: c.f64s("centering_column_means")?.to_vec(),
                grand_mean: c.scalar_f64("centering_grand_mean")?,
            }),
            Err(_) => None,
        };
        if let Some(s) = &centering {
            check_dim(basis.nrows(), s.column_means.len())?;
        }
        Ok(GdaModel {
            basis,
            basis_labels: c.usizes("basis_labels")?,
            permutation: c.usizes("permutation")?,
            class_sizes: c.usizes("class_sizes")?,
            class_names: c.strings("class_names")?.to_vec(),
            kernel: get_kernel(c)?,
            alphas,
            eigenvalues: c.f64s("eigenvalues")?.to_vec(),
            centering,
            ridge: c.scalar_f64("ridge")?,
            rank_tol: c.scalar_f64("rank_tol")?,
            kernel_rank: c.scalar_usize("kernel_rank")?,
            groups,
            column_names,
        })
    }
}

const LEAF: u64 = 0;
const THRESHOLD: u64 = 1;
const GROUP: u64 = 2;

impl Persist for TreeModel {
    const KIND: &'static str = "tree";

    fn to_container(&self) -> Container {
        let n = self.nodes.len();
        let k = self.class_count();
        let mut types = Vec::with_capacity(n);
        let mut index = Vec::with_capacity(n);
        let mut thresholds = Vec::with_capacity(n);
        let mut offsets = vec![0u64];
        let mut children = Vec::new();
        let mut dists = Vec::with_capacity(n * k);
        for node in &self.nodes {
            let (t, i, th) = match node {
                Node::Leaf { class, .. } => (LEAF, *class, 0.0),
                Node::Threshold {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    children.extend([*left as u64, *right as u64]);
                    (THRESHOLD, *feature, *threshold)
                }
                Node::Group {
                    start,
                    children: ch,
                    fallback,
                    ..
                } => {
                    children.push(*fallback as u64);
                    children.extend(ch.iter().map(|&c| c as u64));
                    (GROUP, *start, 0.0)
                }
            };
            types.push(t);
            index.push(i as u64);
            thresholds.push(th);
            offsets.push(children.len() as u64);
            dists.extend(node.distribution().iter().map(|&d| d as u64));
        }
        let mut c = Container::new(Self::KIND);
        c.put_u64("node_type", types);
        c.put_u64("node_index", index);
        c.put_f64("node_threshold", thresholds);
        c.put_u64("child_offsets", offsets);
        c.put_u64("children", children);
        c.put("distributions", Array::U64 { shape: vec![n, k], data: dists });
        c.put_usize("dim", &[self.dim]);
        c.put_strings("class_names", self.class_names.clone());
        c.put_usize("config_min_leaf", &[self.config.min_leaf]);
        c.put_usize("config_max_depth", &[self.config.max_depth]);
        c.put_f64("config_min_gain", vec![self.config.min_gain]);
        c
    }

    fn from_container(c: &Container) -> Result<Self> {
        let types = c.u64s("node_type")?;
        let index = c.usizes("node_index")?;
        let thresholds = c.f64s("node_threshold")?;
        let offsets = c.usizes("child_offsets")?;
        let children = c.usizes("children")?;
        let dists = c.usizes("distributions")?;
        let class_names = c.strings("class_names")?.to_vec();
        let n = types.len();
        let k = class_names.len();
        check_dim(n, index.len())?;
        check_dim(n, thresholds.len())?;
        check_dim(n + 1, offsets.len())?;
        check_dim(n * k, dists.len())?;
        if n == 0 || offsets.windows(2).any(|w| w[0] > w[1]) || offsets[n] != children.len() {
            return Err(fmt_err("malformed tree node table"));
        }
        if children.iter().any(|&ch| ch >= n) {
            return Err(fmt_err("tree child index out of range"));
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let ch = &children[offsets[i]..offsets[i + 1]];
            let distribution = dists[i * k..(i + 1) * k].to_vec();
            nodes.push(match (types[i], ch) {
                (LEAF, []) => Node::Leaf {
                    class: index[i],
                    distribution,
                },
                (THRESHOLD, [l, r]) => Node::Threshold {
                    feature: index[i],
                    threshold: thresholds[i],
                    left: *l,
                    right: *r,
                    distribution,
                },
                (GROUP, [fallback, rest @ ..]) if *fallback < rest.len() => Node::Group {
                    start: index[i],
                    children: rest.to_vec(),
                    fallback: *fallback,
                    distribution,
                },
                _ => return Err(fmt_err(format!("malformed tree node {i}"))),
            });
        }
        Ok(TreeModel {
            nodes,
            dim: c.scalar_usize("dim")?,
            class_names,
            config: TreeConfig {
                min_leaf: c.scalar_usize("config_min_leaf")?,
                max_depth: c.scalar_usize("config_max_depth")?,
                min_gain: c.scalar_f64("config_min_gain")?,
            },
        })
    }
}

impl Persist for MlpModel {
    const KIND: &'static str = "mlp";

    fn to_container(&self) -> Container {
        let mut c = Container::new(Self::KIND);
        c.put_matrix("w1", &self.w1);
        c.put_f64("b1", self.b1.as_slice().to_vec());
        c.put_matrix("w2", &self.w2);
        c.put_f64("b2", self.b2.as_slice().to_vec());
        c.put_strings("class_names", self.class_names.clone());
        c.put_strings("activations", vec!["sigmoid".into(), "softmax".into()]);
        let cfg = &self.config;
        c.put_usize(
            "config",
            &[cfg.hidden, cfg.epochs, cfg.batch, usize::from(cfg.zero_init)],
        );
        c.put_u64("config_seed", vec![cfg.seed]);
        c.put_f64("config_rate", vec![cfg.rate]);
        c
    }

    fn from_container(c: &Container) -> Result<Self> {
        let w1 = c.matrix("w1")?;
        let w2 = c.matrix("w2")?;
        let b1 = DVector::from_column_slice(c.f64s("b1")?);
        let b2 = DVector::from_column_slice(c.f64s("b2")?);
        check_dim(w1.nrows(), b1.len())?;
        check_dim(w1.nrows(), w2.ncols())?;
        check_dim(w2.nrows(), b2.len())?;
        let cfg = c.usizes("config")?;
        let [hidden, epochs, batch, zero_init] = cfg[..] else {
            return Err(fmt_err("malformed mlp config"));
        };
        let seed = match c.u64s("config_seed")? {
            [s] => *s,
            _ => return Err(fmt_err("malformed mlp seed")),
        };
        Ok(MlpModel {
            w1,
            b1,
            w2,
            b2,
            class_names: c.strings("class_names")?.to_vec(),
            config: MlpConfig {
                hidden,
                epochs,
                rate: c.scalar_f64("config_rate")?,
                batch,
                seed,
                zero_init: zero_init != 0,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{predict_mlp, predict_tree, train_mlp, train_tree};
    use crate::gda::{fit_gda, project_gda, GdaParams};
    use crate::lda::{fit_lda, project_lda};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(seed: u64) -> NumericDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            rows.push(vec![
                c as f64 + rng.gen_range(-0.6..0.6),
                (c as f64 * 0.7).sin() + rng.gen_range(-0.6..0.6),
                rng.gen_range(-1.0..1.0),
            ]);
            labels.push(c);
        }
        NumericDataset::from_rows(&rows, &labels, 3).unwrap()
    }

    fn round_trip<T: Persist>(v: &T) -> T {
        let bytes = v.to_container().to_bytes();
        let c = Container::from_bytes(&bytes).unwrap();
        assert_eq!(c.kind, T::KIND);
        T::from_container(&c).unwrap()
    }

    #[test]
    fn dataset_round_trip() {
        let ds = blobs(1);
        assert_eq!(round_trip(&ds), ds);
    }

    #[test]
    fn models_round_trip() {
        let ds = blobs(2);
        let lda = fit_lda(&ds, 2, None).unwrap();
        let back = round_trip(&lda);
        assert_eq!(back, lda);
        assert_eq!(project_lda(&back, &ds.x).unwrap(), project_lda(&lda, &ds.x).unwrap());

        let gda = fit_gda(&ds, &GdaParams::default()).unwrap();
        let back = round_trip(&gda);
        assert_eq!(back, gda);
        assert_eq!(project_gda(&back, &ds.x).unwrap(), project_gda(&gda, &ds.x).unwrap());

        let tree = train_tree(&ds, &TreeConfig::default()).unwrap();
        let back = round_trip(&tree);
        assert_eq!(back, tree);
        assert_eq!(predict_tree(&back, &ds.x).unwrap(), predict_tree(&tree, &ds.x).unwrap());

        let mlp = train_mlp(&ds, &MlpConfig { epochs: 3, ..MlpConfig::new(4) }).unwrap();
        let back = round_trip(&mlp);
        assert_eq!(back, mlp);
        assert_eq!(predict_mlp(&back, &ds.x).unwrap(), predict_mlp(&mlp, &ds.x).unwrap());
    }

    #[test]
    fn tree_bytes_are_deterministic() {
        let ds = blobs(3);
        let a = train_tree(&ds, &TreeConfig::default()).unwrap().to_container().to_bytes();
        let b = train_tree(&ds, &TreeConfig::default()).unwrap().to_container().to_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = blobs(4).to_container().to_bytes();
        assert!(Container::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Container::from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Container::from_bytes(&extra).is_err());
    }

    #[test]
    fn atomic_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/ds.bin");
        let ds = blobs(5);
        ds.save(&path).unwrap();
        assert_eq!(NumericDataset::load(&path).unwrap(), ds);
        assert!(LdaModel::load(&path).is_err());
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn arrays_round_trip(
                floats in proptest::collection::vec(any::<f64>(), 0..40),
                ints in proptest::collection::vec(any::<u64>(), 0..40),
                words in proptest::collection::vec(".{0,12}", 0..10),
            ) {
                let mut c = Container::new("misc");
                c.put_f64("f", floats.clone());
                c.put_u64("u", ints.clone());
                c.put_strings("s", words.clone());
                let back = Container::from_bytes(&c.to_bytes()).unwrap();
                let f = back.f64s("f").unwrap();
                prop_assert_eq!(f.len(), floats.len());
                for (a, b) in f.iter().zip(&floats) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
                prop_assert_eq!(back.u64s("u").unwrap(), &ints[..]);
                prop_assert_eq!(back.strings("s").unwrap(), &words[..]);
            }

            #[test]
            fn matrices_round_trip(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = DMatrix::from_fn(rows, cols, |_, _| rand::Rng::gen::<f64>(&mut rng) * 1e6 - 5e5);
                let mut c = Container::new("m");
                c.put_matrix("m", &m);
                prop_assert_eq!(Container::from_bytes(&c.to_bytes()).unwrap().matrix("m").unwrap(), m);
            }
        }
    }
}
