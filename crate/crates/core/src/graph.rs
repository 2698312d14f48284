//! Undirected simple graph in compressed adjacency form, plus the SNAP-style
//! edge-list and community-file readers and writers.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Compact vertex index in `0..V`.
pub type VertexId = usize;

/// Immutable undirected graph without self-loops or parallel edges.
///
/// Neighbor lists are sorted ascending. Each vertex carries the label it had
/// in the input file so results can be written back in the original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    labels: Vec<u64>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices labelled `0..n`.
    ///
    /// Edges are symmetrized and deduplicated; self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let labels = (0..n as u64).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph whose vertex `i` carries `labels[i]`.
    pub fn with_labels(labels: Vec<u64>, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let n = labels.len();
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let edge_count = targets.len() / 2;
        Ok(Graph {
            offsets,
            targets,
            labels,
            edge_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// True when every pair in `vertices` is adjacent.
    pub fn is_clique(&self, vertices: &[VertexId]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.has_edge(u, v))
        })
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v]
    }

    /// Map from original label to compact id.
    pub fn label_index(&self) -> HashMap<u64, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect()
    }

    /// Same vertex set, with `removed` edges taken out.
    pub fn without_edges(&self, removed: &[(VertexId, VertexId)]) -> Result<Self> {
        let drop: std::collections::HashSet<(VertexId, VertexId)> = removed
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        let kept: Vec<_> = self.edges().filter(|e| !drop.contains(e)).collect();
        Self::with_labels(self.labels.clone(), &kept)
    }
}

fn parse_u64(tok: &str, path: &Path, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("expected a non-negative integer vertex id, found {tok:?}"),
    })
}

/// Reads a whitespace-separated edge list. Lines starting with `#` and blank
/// lines are skipped. Vertex ids are compacted to `0..V` in ascending order of
/// their original value.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let (Some(a), Some(b)) = (toks.next(), toks.next()) else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected two vertex ids".into(),
            });
        };
        raw.push((parse_u64(a, path, i + 1)?, parse_u64(b, path, i + 1)?));
    }

    let mut labels: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index: HashMap<u64, VertexId> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges: Vec<_> = raw.iter().map(|(a, b)| (index[a], index[b])).collect();
    let graph = Graph::with_labels(labels, &edges)?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(graph)
}

/// Writes one `u<TAB>v` line per edge using original labels.
pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# vertices: {} edges: {}", graph.vertex_count(), graph.edge_count())
        .map_err(|e| Error::io(path, e))?;
    for (u, v) in graph.edges() {
        writeln!(w, "{}\t{}", graph.label(u), graph.label(v)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a community file (one community per line, whitespace-separated
/// original vertex ids) and maps it onto `graph`'s compact ids.
pub fn load_communities(path: impl AsRef<Path>, graph: &Graph) -> Result<Vec<Vec<VertexId>>> {
    let path = path.as_ref();
    let index = graph.label_index();
    let raw = load_raw_communities(path)?;
    raw.into_iter()
        .map(|(line, ids)| {
            let mut members = ids
                .into_iter()
                .map(|id| {
                    index.get(&id).copied().ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("vertex {id} is not in the graph"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            members.sort_unstable();
            members.dedup();
            Ok(members)
        })
        .collect()
}

/// Reads a community file without a graph, keeping the raw ids. Returns
/// `(line_number, members)` for each non-empty, non-comment line.
pub fn load_raw_communities(path: impl AsRef<Path>) -> Result<Vec<(usize, Vec<u64>)>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ids = trimmed
            .split_whitespace()
            .map(|t| parse_u64(t, path, i + 1))
            .collect::<Result<Vec<_>>>()?;
        out.push((i + 1, ids));
    }
    Ok(out)
}

/// Writes communities (compact ids) as lines of original labels.
pub fn write_communities(
    graph: &Graph,
    communities: &[Vec<VertexId>],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for members in communities {
        let line: Vec<String> = members.iter().map(|&v| graph.label(v).to_string()).collect();
        writeln!(w, "{}", line.join(" ")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
