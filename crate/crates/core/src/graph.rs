//! Sparse Erdős–Rényi graphs in compressed-row form.
//!
//! Graphs are sampled by geometric skip-sampling over the linearized index of
//! the `n(n-1)/2` unordered pairs, so a draw at `p = c/n` costs `O(n + m)`.
//! Vertices are `u32`; adjacency runs are sorted and free of duplicates.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::stream::{self, StreamRng};

/// Largest admissible vertex count.
pub const MAX_VERTICES: u64 = (1 << 31) - 2;

const DUMP_MAGIC: &[u8; 4] = b"GPW1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    n: u64,
    c: f64,
    seed: u64,
}

impl GraphParams {
    pub fn new(n: u64, c: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if n > MAX_VERTICES {
            return Err(Error::Capacity(format!(
                "n = {n} exceeds the vertex capacity {MAX_VERTICES}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {c}"
            )));
        }
        if c / n as f64 > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "edge probability c/n = {} exceeds 1",
                c / n as f64
            )));
        }
        Ok(Self { n, c, seed })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn p(&self) -> f64 {
        self.c / self.n as f64
    }
}

/// Immutable undirected simple graph in CSR layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl SparseGraph {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    /// Sorted adjacency run of `v`. Panics if `v` is out of range.
    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Degree of `v` in the graph itself. Panics if `v` is out of range.
    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Builds the CSR arrays from pairs `(hi, lo)` with `lo < hi`, sorted by
    /// `(hi, lo)` and without duplicates. In that order every adjacency run
    /// is filled in increasing order, so no per-run sort is needed.
    fn from_canonical_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(hi, lo) in pairs {
            offsets[hi as usize + 1] += 1;
            offsets[lo as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(hi, lo) in pairs {
            neighbors[cursor[hi as usize]] = lo;
            cursor[hi as usize] += 1;
            neighbors[cursor[lo as usize]] = hi;
            cursor[lo as usize] += 1;
        }
        Self { offsets, neighbors }
    }

    /// Verifies the CSR invariants: offsets framing, symmetry, no loops and
    /// strictly increasing runs.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.n();
        if self.offsets[0] != 0 || self.offsets[n] != self.neighbors.len() {
            return Err("offsets do not frame the neighbor array".into());
        }
        if self.neighbors.len() % 2 != 0 {
            return Err("odd number of adjacency entries".into());
        }
        for v in 0..n as u32 {
            if self.offsets[v as usize] > self.offsets[v as usize + 1] {
                return Err(format!("offsets decrease at {v}"));
            }
            let run = self.neighbors(v);
            for w in run.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of {v} not strictly increasing"));
                }
            }
            for &u in run {
                if u as usize >= n {
                    return Err(format!("neighbor {u} of {v} out of range"));
                }
                if u == v {
                    return Err(format!("self-loop at {v}"));
                }
                if !self.has_edge(u, v) {
                    return Err(format!("edge {v}-{u} not symmetric"));
                }
            }
        }
        Ok(())
    }

    /// Writes the flat binary dump: magic, `n` and `m` as little-endian
    /// `u64`, then `n + 1` offsets as `u64` and `2m` neighbors as `u32`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.edge_count() as u64).to_le_bytes())?;
        for &o in &self.offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &v in &self.neighbors {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |e: std::io::Error| Error::InvalidInput(format!("truncated graph dump: {e}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(bad)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::InvalidInput("bad graph dump magic".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(bad)?;
        let n = u64::from_le_bytes(word);
        r.read_exact(&mut word).map_err(bad)?;
        let m = u64::from_le_bytes(word);
        if n > MAX_VERTICES {
            return Err(Error::Capacity(format!("dump has n = {n}")));
        }
        let mut offsets = Vec::with_capacity(n as usize + 1);
        for _ in 0..=n {
            r.read_exact(&mut word).map_err(bad)?;
            offsets.push(u64::from_le_bytes(word) as usize);
        }
        let mut half = [0u8; 4];
        let mut neighbors = Vec::with_capacity(2 * m as usize);
        for _ in 0..2 * m {
            r.read_exact(&mut half).map_err(bad)?;
            neighbors.push(u32::from_le_bytes(half));
        }
        let g = Self { offsets, neighbors };
        g.check_invariants().map_err(Error::InvalidInput)?;
        Ok(g)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(BufReader::new(f))
    }

    /// One `u v` line per edge, `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()
    }

    /// Reads `u v` lines; blank lines and `#` comments are skipped. Without
    /// an explicit `n` the vertex count is one past the largest endpoint.
    pub fn read_edge_list<R: BufRead>(r: R, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(format!("edge list: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                    Error::InvalidInput(format!("line {}: expected `u v`", lineno + 1))
                })
            };
            let u = next()?;
            let v = next()?;
            edges.push((u, v));
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        build_from_edges(n, &edges)
    }
}

/// Samples `G(n, c/n)` from the stream keyed by the params' seed.
pub fn sample_gnp(params: &GraphParams) -> Result<SparseGraph> {
    let mut rng = stream::single(params.seed());
    sample_gnp_with_rng(params.n() as usize, params.p(), &mut rng)
}

/// Samples `G(n, p)` for an explicit edge probability `p` in `[0, 1]`.
///
/// This bypasses the `p = c/n` parametrization so that the corner cases
/// `p = 0` and `p = 1` can be reached.
pub fn sample_gnp_with_probability(n: u64, p: f64, seed: u64) -> Result<SparseGraph> {
    let mut rng = stream::single(seed);
    check_probability_params(n, p)?;
    sample_gnp_with_rng(n as usize, p, &mut rng)
}

fn check_probability_params(n: u64, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > MAX_VERTICES {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the vertex capacity {MAX_VERTICES}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Core sampler: each unordered pair is an edge independently with
/// probability `p`. Gaps between successive edges in the linear pair order
/// are geometric with parameter `p`.
pub fn sample_gnp_with_rng(n: usize, p: f64, rng: &mut StreamRng) -> Result<SparseGraph> {
    check_probability_params(n as u64, p)?;
    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    if p > 0.0 && total > 0 {
        pairs.reserve((total as f64 * p * 1.05) as usize + 16);
        let log_q = (-p).ln_1p();
        let mut skip = || -> f64 {
            let u: f64 = rng.random();
            ((-u).ln_1p() / log_q).floor()
        };
        // Pair index k encodes (hi, lo) with k = hi(hi-1)/2 + lo, lo < hi.
        let mut hi: u64 = 1;
        let mut row_start: u64 = 0;
        let mut gap = skip();
        let mut k: u64 = 0;
        while gap < (total - k) as f64 {
            k += gap as u64;
            while k >= row_start + hi {
                row_start += hi;
                hi += 1;
            }
            pairs.push((hi as u32, (k - row_start) as u32));
            k += 1;
            if k >= total {
                break;
            }
            gap = skip();
        }
    }
    Ok(SparseGraph::from_canonical_pairs(n, &pairs))
}

/// Builds a graph from unordered pairs, dropping duplicates.
pub fn build_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<SparseGraph> {
    if n as u64 > MAX_VERTICES {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the vertex capacity"
        )));
    }
    let mut pairs = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!(
                "edge ({u}, {v}) has an endpoint outside [0, {n})"
            )));
        }
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop at {u}")));
        }
        pairs.push((u.max(v) as u32, u.min(v) as u32));
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(SparseGraph::from_canonical_pairs(n, &pairs))
}
