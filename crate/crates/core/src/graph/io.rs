//! File formats for graphs, features, and labels.
//!
//! - Edge-list TSV: one `u<TAB>v` per line, `#` comments ignored. Repeated
//!   lines sum into multiplicities; self-loops are dropped with a count.
//! - JSON graph: `{"n": int, "directed": bool, "edges": [[u, v, weight?]]}`.
//! - Features CSV: header row, one node per row, first column node id.
//! - Labels CSV: `node_id,label` with a header row.
//!
//! Loaders remap arbitrary node ids to dense `[0, n)` in first-seen order and
//! return the mapping so callers can persist it next to their outputs.

use super::{FeatureMatrix, Graph, GraphError, LabelVector};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeListTsv,
    Json,
}

impl std::str::FromStr for GraphFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge-list-tsv" | "tsv" => Ok(GraphFormat::EdgeListTsv),
            "json" => Ok(GraphFormat::Json),
            other => Err(format!("unknown graph format '{other}'")),
        }
    }
}

/// Original node ids in dense-index order.
#[derive(Debug, Clone, Default)]
pub struct IdMap {
    originals: Vec<String>,
    index: HashMap<String, u32>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        let mut map = IdMap::default();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    fn intern(&mut self, id: &str) -> u32 {
        if let Some(&ix) = self.index.get(id) {
            return ix;
        }
        let ix = self.originals.len() as u32;
        self.originals.push(id.to_string());
        self.index.insert(id.to_string(), ix);
        ix
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn index_of(&self, original: &str) -> Option<u32> {
        self.index.get(original).copied()
    }

    pub fn original(&self, dense: u32) -> &str {
        &self.originals[dense as usize]
    }

    /// Persist as `dense_id,original_id` CSV.
    pub fn write_csv(&self, path: &Path) -> Result<(), GraphError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "dense_id,original_id")?;
        for (ix, orig) in self.originals.iter().enumerate() {
            writeln!(w, "{ix},{}", csv_escape(orig))?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub id_map: IdMap,
    pub self_loops_dropped: usize,
}

/// Load a graph from `path` in the given format.
pub fn load_graph(
    path: &Path,
    format: GraphFormat,
    directed: bool,
) -> Result<LoadedGraph, GraphError> {
    match format {
        GraphFormat::EdgeListTsv => load_edge_list_tsv(path, directed),
        GraphFormat::Json => load_graph_json(path),
    }
}

fn load_edge_list_tsv(path: &Path, directed: bool) -> Result<LoadedGraph, GraphError> {
    let text = fs::read_to_string(path)?;
    let mut id_map = IdMap::default();
    let mut edges: Vec<(u32, u32, u32)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (u, v) = match (fields.next(), fields.next()) {
            (Some(u), Some(v)) if !u.is_empty() && !v.is_empty() => (u, v),
            _ => {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    message: format!("expected 'u<TAB>v', got '{raw}'"),
                })
            }
        };
        if fields.next().is_some() {
            return Err(GraphError::Parse {
                line: lineno + 1,
                message: "more than two tab-separated fields".into(),
            });
        }
        let ui = id_map.intern(u.trim());
        let vi = id_map.intern(v.trim());
        edges.push((ui, vi, 1));
    }
    let outcome = Graph::build(id_map.len(), directed, edges)?;
    Ok(LoadedGraph {
        graph: outcome.graph,
        id_map,
        self_loops_dropped: outcome.self_loops_dropped,
    })
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    directed: bool,
    edges: Vec<Vec<u64>>,
}

fn load_graph_json(path: &Path) -> Result<LoadedGraph, GraphError> {
    let text = fs::read_to_string(path)?;
    let parsed: GraphJson = serde_json::from_str(&text).map_err(|e| GraphError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut edges = Vec::with_capacity(parsed.edges.len());
    for (k, e) in parsed.edges.iter().enumerate() {
        if e.len() != 2 && e.len() != 3 {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("edge {k} must be [u, v] or [u, v, weight]"),
            });
        }
        let w = if e.len() == 3 { e[2] } else { 1 };
        if e[0] >= parsed.n as u64 || e[1] >= parsed.n as u64 {
            return Err(GraphError::NodeOutOfRange {
                id: e[0].max(e[1]),
                n: parsed.n,
            });
        }
        let w32 = u32::try_from(w).map_err(|_| GraphError::Parse {
            line: 0,
            message: format!("edge {k} weight {w} out of range"),
        })?;
        edges.push((e[0] as u32, e[1] as u32, w32));
    }
    let outcome = Graph::build(parsed.n, parsed.directed, edges)?;
    Ok(LoadedGraph {
        graph: outcome.graph,
        id_map: IdMap::identity(parsed.n),
        self_loops_dropped: outcome.self_loops_dropped,
    })
}

/// Write the edge-list TSV form (dense ids; multiplicities become repeated
/// lines so a reload reproduces the graph exactly).
pub fn write_edge_list_tsv(g: &Graph, path: &Path) -> Result<(), GraphError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for (u, v, mult) in g.edges() {
        for _ in 0..mult {
            writeln!(w, "{u}\t{v}")?;
        }
    }
    Ok(())
}

pub fn write_graph_json(g: &Graph, path: &Path) -> Result<(), GraphError> {
    let edges: Vec<Vec<u64>> = g
        .edges()
        .map(|(u, v, w)| vec![u as u64, v as u64, w as u64])
        .collect();
    let doc = GraphJson {
        n: g.n(),
        directed: g.directed(),
        edges,
    };
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut w, &doc).map_err(|e| GraphError::Invalid(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Load per-node features. Rows may appear in any order; node ids are
/// resolved through `id_map` when given, otherwise parsed as dense indices.
pub fn load_features_csv(
    path: &Path,
    id_map: Option<&IdMap>,
    n: usize,
) -> Result<FeatureMatrix, GraphError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| GraphError::Invalid(format!("{}: {e}", path.display())))?;
    let dim = reader.headers().map_err(csv_err)?.len().saturating_sub(1);
    if dim == 0 {
        return Err(GraphError::Invalid(
            "features CSV needs a node id column plus at least one feature column".into(),
        ));
    }
    let mut values = Array2::<f64>::zeros((n, dim));
    let mut seen = vec![false; n];
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = k + 2;
        if record.len() != dim + 1 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected {} columns, got {}", dim + 1, record.len()),
            });
        }
        let node = resolve_node(&record[0], id_map, n, line)?;
        if seen[node] {
            return Err(GraphError::Parse {
                line,
                message: format!("duplicate feature row for node '{}'", &record[0]),
            });
        }
        seen[node] = true;
        for j in 0..dim {
            values[[node, j]] = record[j + 1].trim().parse().map_err(|_| GraphError::Parse {
                line,
                message: format!("bad float '{}'", &record[j + 1]),
            })?;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(GraphError::Invalid(format!(
            "features CSV missing a row for node index {missing}"
        )));
    }
    FeatureMatrix::new(values)
}

pub fn write_features_csv(x: &FeatureMatrix, path: &Path) -> Result<(), GraphError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "node_id")?;
    for j in 0..x.dim() {
        write!(w, ",f{j}")?;
    }
    writeln!(w)?;
    for i in 0..x.rows() {
        write!(w, "{i}")?;
        for v in x.row(i) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Load `node_id,label` CSV; header optional.
pub fn load_labels_csv(
    path: &Path,
    id_map: Option<&IdMap>,
    n: usize,
) -> Result<LabelVector, GraphError> {
    let text = fs::read_to_string(path)?;
    let mut labels = vec![0u32; n];
    let mut seen = vec![false; n];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if k == 0 && row.split(',').nth(1).is_some_and(|s| s.parse::<i64>().is_err()) {
            continue; // header row
        }
        let mut fields = row.split(',');
        let (id, lab) = match (fields.next(), fields.next()) {
            (Some(a), Some(b)) => (a.trim(), b.trim()),
            _ => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected 'node_id,label', got '{raw}'"),
                })
            }
        };
        let node = resolve_node(id, id_map, n, line)?;
        if seen[node] {
            return Err(GraphError::Parse {
                line,
                message: format!("duplicate label row for node '{id}'"),
            });
        }
        seen[node] = true;
        labels[node] = lab.parse().map_err(|_| GraphError::Parse {
            line,
            message: format!("bad label '{lab}'"),
        })?;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(GraphError::Invalid(format!(
            "labels CSV missing a row for node index {missing}"
        )));
    }
    Ok(LabelVector::from_labels(labels))
}

pub fn write_labels_csv(y: &LabelVector, path: &Path) -> Result<(), GraphError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "node_id,label")?;
    for (i, l) in y.labels().iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    Ok(())
}

fn resolve_node(
    id: &str,
    id_map: Option<&IdMap>,
    n: usize,
    line: usize,
) -> Result<usize, GraphError> {
    let ix = match id_map {
        Some(map) => map.index_of(id.trim()).ok_or_else(|| GraphError::Parse {
            line,
            message: format!("node id '{id}' does not appear in the graph"),
        })? as usize,
        None => id.trim().parse::<usize>().map_err(|_| GraphError::Parse {
            line,
            message: format!("bad node index '{id}'"),
        })?,
    };
    if ix >= n {
        return Err(GraphError::NodeOutOfRange {
            id: ix as u64,
            n,
        });
    }
    Ok(ix)
}

fn csv_err(e: csv::Error) -> GraphError {
    GraphError::Invalid(e.to_string())
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(content: &str, name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("graphmeta-io-tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-{}", std::process::id(), name));
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn tsv_path_graph() {
        let path = tmp("0\t1\n1\t2\n", "path.tsv");
        let loaded = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap();
        assert_eq!(loaded.graph.n(), 3);
        assert_eq!(loaded.graph.m(), 2);
        assert_eq!(loaded.self_loops_dropped, 0);
    }

    #[test]
    fn tsv_self_loop_warning() {
        let path = tmp("0\t0\n0\t1\n", "loop.tsv");
        let loaded = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap();
        assert_eq!(loaded.self_loops_dropped, 1);
        assert_eq!(loaded.graph.m(), 1);
    }

    #[test]
    fn tsv_duplicates_sum() {
        let path = tmp("0\t1\n0\t1\n", "dup.tsv");
        let loaded = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap();
        assert_eq!(loaded.graph.weight(0, 1), 2);
        assert_eq!(loaded.graph.m(), 2);
    }

    #[test]
    fn tsv_string_ids_remap_densely() {
        let path = tmp("alice\tbob\nbob\tcarol\n# comment\n", "names.tsv");
        let loaded = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap();
        assert_eq!(loaded.graph.n(), 3);
        assert_eq!(loaded.id_map.index_of("alice"), Some(0));
        assert_eq!(loaded.id_map.original(2), "carol");
    }

    #[test]
    fn tsv_parse_error_reports_line() {
        let path = tmp("0\t1\nbroken\n", "bad.tsv");
        let err = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn graph_round_trip_tsv() {
        let g = Graph::build(4, false, vec![(0, 1, 2), (1, 2, 1), (2, 3, 1)])
            .unwrap()
            .graph;
        let dir = std::env::temp_dir().join("graphmeta-io-tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-rt.tsv", std::process::id()));
        write_edge_list_tsv(&g, &path).unwrap();
        let reloaded = load_graph(&path, GraphFormat::EdgeListTsv, false).unwrap();
        assert_eq!(reloaded.graph, g);
    }

    #[test]
    fn graph_round_trip_json() {
        let g = Graph::build(3, true, vec![(0, 1, 3), (2, 0, 1)]).unwrap().graph;
        let dir = std::env::temp_dir().join("graphmeta-io-tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-rt.json", std::process::id()));
        write_graph_json(&g, &path).unwrap();
        let reloaded = load_graph(&path, GraphFormat::Json, true).unwrap();
        assert_eq!(reloaded.graph, g);
    }

    #[test]
    fn features_and_labels_round_trip() {
        let x = FeatureMatrix::new(ndarray::array![[1.0, -2.5], [0.25, 3.0]]).unwrap();
        let y = LabelVector::from_labels(vec![1, 0]);
        let dir = std::env::temp_dir().join("graphmeta-io-tests");
        fs::create_dir_all(&dir).unwrap();
        let fx = dir.join(format!("{}-x.csv", std::process::id()));
        let fy = dir.join(format!("{}-y.csv", std::process::id()));
        write_features_csv(&x, &fx).unwrap();
        write_labels_csv(&y, &fy).unwrap();
        assert_eq!(load_features_csv(&fx, None, 2).unwrap(), x);
        assert_eq!(load_labels_csv(&fy, None, 2).unwrap(), y);
    }
}
