//! On-disk dataset layout and the delimited text formats.
//!
//! ```text
//! <dir>/schema.toml          node_types / link_types
//! <dir>/nodes/<type>.txt     one external id per line
//! <dir>/edges/<link>.csv     src_id,dst_id per line
//! <dir>/labels.csv           transaction_id,label,timestamp
//! <dir>/features.csv         transaction_id,x_0,...,x_{d-1}
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::graph::Hin;
use super::schema::{HinSchema, LinkId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SCHEMA_FILE: &str = "schema.toml";
pub const LABELS_FILE: &str = "labels.csv";
pub const FEATURES_FILE: &str = "features.csv";

/// Paths of every file in a dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub schema: PathBuf,
    pub nodes: BTreeMap<String, PathBuf>,
    pub edges: BTreeMap<String, PathBuf>,
    pub labels: PathBuf,
    pub features: PathBuf,
}

impl DatasetPaths {
    pub fn for_schema(dir: &Path, schema: &HinSchema) -> Self {
        let nodes = schema
            .node_types()
            .iter()
            .map(|nt| (nt.name.clone(), dir.join("nodes").join(format!("{}.txt", nt.name))))
            .collect();
        let edges = schema
            .link_types()
            .iter()
            .map(|lt| (lt.name.clone(), dir.join("edges").join(format!("{}.csv", lt.name))))
            .collect();
        DatasetPaths {
            schema: dir.join(SCHEMA_FILE),
            nodes,
            edges,
            labels: dir.join(LABELS_FILE),
            features: dir.join(FEATURES_FILE),
        }
    }
}

/// Ground-truth labels and timestamps, in transaction index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub truth: Vec<u8>,
    pub timestamps: Vec<i64>,
}

/// A loaded dataset directory.
#[derive(Debug)]
pub struct Dataset<T> {
    pub hin: Hin,
    pub labels: Labels,
    pub features: Array2<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn load(dir: &Path) -> Result<Self> {
        let schema = HinSchema::load(&dir.join(SCHEMA_FILE))?;
        let paths = DatasetPaths::for_schema(dir, &schema);
        let hin = load_hin(&paths.schema, &paths.nodes, &paths.edges)?;
        let labels = read_labels(&paths.labels, &hin)?;
        let features = read_features(&paths.features, &hin)?;
        Ok(Dataset { hin, labels, features })
    }

    /// The dataset restricted to the listed transactions, in that order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        Ok(Dataset {
            hin: self.hin.restrict_targets(keep)?,
            labels: Labels {
                truth: keep.iter().map(|&i| self.labels.truth[i]).collect(),
                timestamps: keep.iter().map(|&i| self.labels.timestamps[i]).collect(),
            },
            features: self.features.select(ndarray::Axis(0), keep),
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Reads one id per line; blank lines are skipped.
pub fn read_node_file(path: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let id = line.trim();
        if !id.is_empty() {
            ids.push(id.to_string());
        }
    }
    Ok(ids)
}

/// Loads and validates a graph. Node indices follow file line order.
pub fn load_hin(
    schema_file: &Path,
    node_files: &BTreeMap<String, PathBuf>,
    edge_files: &BTreeMap<String, PathBuf>,
) -> Result<Hin> {
    let schema = HinSchema::load(schema_file)?;
    let mut node_ids = Vec::with_capacity(schema.node_type_count());
    for nt in schema.node_types() {
        let path = node_files
            .get(&nt.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("no node file for type {}", nt.name)))?;
        node_ids.push(read_node_file(path)?);
    }
    let index: Vec<std::collections::HashMap<&str, usize>> = node_ids
        .iter()
        .map(|ids| ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect())
        .collect();
    let mut edges = Vec::with_capacity(schema.link_types().len());
    for (k, lt) in schema.link_types().iter().enumerate() {
        let path = edge_files
            .get(&lt.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("no edge file for link {}", lt.name)))?;
        let (src, dst) = schema.endpoints(LinkId::forward(k));
        let mut pairs = Vec::new();
        for (line, rec) in csv_reader(path)?.records().enumerate() {
            let rec = rec.map_err(|e| parse_err(path, line + 1, e.to_string()))?;
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            if rec.len() != 2 {
                return Err(parse_err(path, line + 1, "expected src_id,dst_id"));
            }
            if line == 0 && &rec[0] == "src_id" {
                continue;
            }
            let lookup = |t: usize, id: &str| {
                index[t].get(id).copied().ok_or_else(|| Error::UnknownNodeId {
                    link: lt.name.clone(),
                    id: id.to_string(),
                })
            };
            pairs.push((lookup(src.0, &rec[0])?, lookup(dst.0, &rec[1])?));
        }
        edges.push(pairs);
    }
    Hin::from_parts(schema, node_ids, edges)
}

/// Reads `transaction_id,label,timestamp`. Every transaction must appear
/// exactly once.
pub fn read_labels(path: &Path, hin: &Hin) -> Result<Labels> {
    let target = hin.schema().target();
    let n = hin.n_targets();
    let mut truth = vec![u8::MAX; n];
    let mut timestamps = vec![0i64; n];
    for (line, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, line + 1, e.to_string()))?;
        if line == 0 && rec.get(0) == Some("transaction_id") {
            continue;
        }
        if rec.len() != 3 {
            return Err(parse_err(path, line + 1, "expected transaction_id,label,timestamp"));
        }
        let i = hin.node_position(target, &rec[0]).ok_or_else(|| Error::UnknownNodeId {
            link: "labels".into(),
            id: rec[0].to_string(),
        })?;
        let label: u8 = match &rec[1] {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(path, line + 1, format!("label {other:?} is not 0/1"))),
        };
        if truth[i] != u8::MAX {
            return Err(parse_err(path, line + 1, format!("duplicate label for {}", &rec[0])));
        }
        truth[i] = label;
        timestamps[i] = rec[2].parse().map_err(|_| parse_err(path, line + 1, "timestamp is not an integer"))?;
    }
    if let Some(missing) = truth.iter().position(|&v| v == u8::MAX) {
        return Err(Error::SchemaMismatch(format!(
            "transaction {} has no label",
            hin.node_ids(target)[missing]
        )));
    }
    Ok(Labels { truth, timestamps })
}

/// Header cells accepted in the id column of a feature table.
const ID_HEADERS: [&str; 2] = ["transaction_id", "txn_id"];

/// Reads `transaction_id,x_0,...` into a row-per-transaction matrix.
pub fn read_features<T: Scalar>(path: &Path, hin: &Hin) -> Result<Array2<T>> {
    let target = hin.schema().target();
    let n = hin.n_targets();
    let mut rows: Vec<Option<Vec<T>>> = vec![None; n];
    let mut width = None;
    for (line, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, line + 1, e.to_string()))?;
        if line == 0 && rec.get(0).is_some_and(|c| ID_HEADERS.contains(&c)) {
            width = Some(rec.len() - 1);
            continue;
        }
        let d = *width.get_or_insert(rec.len() - 1);
        if rec.len() != d + 1 {
            return Err(parse_err(path, line + 1, format!("expected {} feature values", d)));
        }
        let i = hin.node_position(target, &rec[0]).ok_or_else(|| Error::UnknownNodeId {
            link: "features".into(),
            id: rec[0].to_string(),
        })?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map(T::of).map_err(|_| parse_err(path, line + 1, format!("bad number {s:?}"))))
            .collect::<Result<Vec<T>>>()?;
        rows[i] = Some(vals);
    }
    let d = width.unwrap_or(0);
    let mut out = Array2::zeros((n, d));
    for (i, row) in rows.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            Error::SchemaMismatch(format!("transaction {} has no feature row", hin.node_ids(target)[i]))
        })?;
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

pub fn write_node_file(path: &Path, ids: &[String]) -> Result<()> {
    let mut w = create(path)?;
    for id in ids {
        writeln!(w, "{id}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_edge_file(path: &Path, edges: &[(&str, &str)]) -> Result<()> {
    let mut w = create(path)?;
    for (s, d) in edges {
        writeln!(w, "{s},{d}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_labels(path: &Path, ids: &[String], labels: &Labels) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "transaction_id,label,timestamp").map_err(io)?;
    for ((id, y), ts) in ids.iter().zip(&labels.truth).zip(&labels.timestamps) {
        writeln!(w, "{id},{y},{ts}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `<id_column>,<prefix>_0,...` rows for one or more column blocks
/// laid side by side.
pub fn write_matrix<T: Scalar>(
    path: &Path,
    id_column: &str,
    ids: &[String],
    blocks: &[(&str, &Array2<T>)],
) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let mut header = String::from(id_column);
    for (prefix, m) in blocks {
        for j in 0..m.ncols() {
            header.push_str(&format!(",{prefix}_{j}"));
        }
    }
    writeln!(w, "{header}").map_err(io)?;
    for (i, id) in ids.iter().enumerate() {
        let mut line = id.clone();
        for (_, m) in blocks {
            for v in m.row(i) {
                line.push(',');
                line.push_str(&v.to_string());
            }
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}
