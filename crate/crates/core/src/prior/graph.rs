use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Undirected simple graph on vertices `0..n`. Each edge is stored once as
/// `(min, max)`, in construction order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl ItemGraph {
    /// Builds a graph, silently dropping duplicate edges. Self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return invalid(format!("self-loop on vertex {a}"));
            }
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) out of range for n = {n}"));
            }
            let e = (a.min(b), a.max(b));
            if seen.insert(e) {
                out.push(e);
            }
        }
        Ok(Self { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.contains(&e)
    }

    fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    /// Number of vertex pairs that are not edges.
    pub fn num_non_edges(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2 - self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

/// `rows x cols` grid; vertex `(r, c)` has index `r * cols + c`.
pub fn build_grid(rows: usize, cols: usize) -> Result<ItemGraph> {
    if rows == 0 || cols == 0 {
        return invalid("grid dimensions must be positive");
    }
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    push_grid_edges(&mut edges, 0, rows, cols);
    Ok(ItemGraph { n: rows * cols, edges })
}

fn push_grid_edges(edges: &mut Vec<(usize, usize)>, offset: usize, rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            let v = offset + r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
}

/// `blocks_r x blocks_c` disjoint grids of size `block_rows x block_cols`.
///
/// Vertices are numbered block-major (blocks in row-major order), then
/// row-major inside the block.
pub fn build_block(
    blocks_r: usize,
    blocks_c: usize,
    block_rows: usize,
    block_cols: usize,
) -> Result<ItemGraph> {
    if blocks_r == 0 || blocks_c == 0 || block_rows == 0 || block_cols == 0 {
        return invalid("block dimensions must be positive");
    }
    let block_size = block_rows * block_cols;
    let num_blocks = blocks_r * blocks_c;
    let mut edges = Vec::new();
    for b in 0..num_blocks {
        push_grid_edges(&mut edges, b * block_size, block_rows, block_cols);
    }
    Ok(ItemGraph { n: num_blocks * block_size, edges })
}

/// Parses a whitespace-separated, 0-indexed edge list. Lines starting with
/// `#` and blank lines are ignored; an optional `n <count>` header fixes the
/// vertex count, otherwise it is one more than the largest index.
pub fn parse_edge_list(reader: impl BufRead) -> Result<ItemGraph> {
    let mut declared_n = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut max_index = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or_default();
        if first == "n" {
            let count = fields
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| parse_err(line_no, "header must be `n <count>`"))?;
            if fields.next().is_some() || declared_n.is_some() || !edges.is_empty() {
                return Err(parse_err(line_no, "misplaced or malformed `n` header"));
            }
            declared_n = Some(count);
            continue;
        }
        let a = parse_index(first, line_no)?;
        let b = parse_index(
            fields.next().ok_or_else(|| parse_err(line_no, "expected two indices"))?,
            line_no,
        )?;
        if fields.next().is_some() {
            return Err(parse_err(line_no, "expected exactly two indices"));
        }
        if a == b {
            return Err(parse_err(line_no, &format!("self-loop on vertex {a}")));
        }
        if let Some(n) = declared_n {
            if a >= n || b >= n {
                return Err(parse_err(line_no, &format!("index out of range for n = {n}")));
            }
        }
        max_index = Some(max_index.unwrap_or(0).max(a).max(b));
        let e = (a.min(b), a.max(b));
        if seen.insert(e) {
            edges.push(e);
        }
    }
    let n = declared_n.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    Ok(ItemGraph { n, edges })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<ItemGraph> {
    let file = std::fs::File::open(path)?;
    parse_edge_list(std::io::BufReader::new(file))
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(line, &format!("invalid vertex index {s:?}")))
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}

/// Writes the graph in the edge-list format, with an `n` header.
pub fn write_edge_list(g: &ItemGraph, mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "n {}", g.n)?;
    for &(a, b) in &g.edges {
        writeln!(w, "{a} {b}")?;
    }
    Ok(())
}

/// Induced subgraph on `m` uniformly chosen vertices, relabelled `0..m` in
/// increasing order of original index.
pub fn subsample_vertices(g: &ItemGraph, m: usize, seed: u64) -> Result<ItemGraph> {
    let kept = subsample_indices(g.n, m, seed)?;
    induced_subgraph(g, &kept)
}

/// The sorted vertex indices `subsample_vertices` keeps.
pub fn subsample_indices(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return invalid(format!("cannot keep {m} of {n} vertices"));
    }
    let mut rng = seed::rng(seed);
    let mut kept = index::sample(&mut rng, n, m).into_vec();
    kept.sort_unstable();
    Ok(kept)
}

/// Induced subgraph on `kept`, relabelled by position in the sorted list.
pub fn induced_subgraph(g: &ItemGraph, kept: &[usize]) -> Result<ItemGraph> {
    let mut sorted = kept.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut relabel = vec![usize::MAX; g.n];
    for (new, &old) in sorted.iter().enumerate() {
        if old >= g.n {
            return invalid(format!("vertex {old} out of range for n = {}", g.n));
        }
        relabel[old] = new;
    }
    let edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .filter(|&&(a, b)| relabel[a] != usize::MAX && relabel[b] != usize::MAX)
        .map(|&(a, b)| (relabel[a], relabel[b]))
        .collect();
    ItemGraph::new(sorted.len(), edges)
}

/// Removes `r = round(fraction * |E|)` uniformly chosen edges and adds `r`
/// uniformly chosen pairs that were non-edges of the input graph.
pub fn perturb_edges(g: &ItemGraph, fraction: f64, seed: u64) -> Result<ItemGraph> {
    if !(0.0..=1.0).contains(&fraction) {
        return invalid(format!("fraction {fraction} outside [0, 1]"));
    }
    let r = (fraction * g.edges.len() as f64).round() as usize;
    if r == 0 {
        return Ok(g.clone());
    }
    let non_edge_count = g.num_non_edges();
    if r > non_edge_count {
        return invalid(format!(
            "cannot add {r} edges: only {non_edge_count} non-edges exist"
        ));
    }
    let mut rng = seed::rng(seed);
    let mut removed = index::sample(&mut rng, g.edges.len(), r).into_vec();
    removed.sort_unstable();

    let existing = g.edge_set();
    let non_edges: Vec<(usize, usize)> = (0..g.n)
        .flat_map(|a| ((a + 1)..g.n).map(move |b| (a, b)))
        .filter(|e| !existing.contains(e))
        .collect();
    let mut added = index::sample(&mut rng, non_edges.len(), r).into_vec();
    added.sort_unstable();

    let mut edges = Vec::with_capacity(g.edges.len());
    let mut removed_iter = removed.iter().peekable();
    for (i, &e) in g.edges.iter().enumerate() {
        if removed_iter.peek() == Some(&&i) {
            removed_iter.next();
        } else {
            edges.push(e);
        }
    }
    edges.extend(added.into_iter().map(|i| non_edges[i]));
    Ok(ItemGraph { n: g.n, edges })
}
