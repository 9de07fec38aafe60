//! Degrees in the `r`-th power of a graph.
//!
//! The degree of `v` in `G^r` is the number of vertices at distance
//! `1..=r`, i.e. the sum of the BFS layer sizes `d_1(v), ..., d_r(v)`.
//! The all-roots scan reuses one epoch-stamped visited array per worker.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_from_edges, SparseGraph};

/// Largest graph accepted by [`exact_power_oracle`] by default.
pub const DEFAULT_ORACLE_CAP: usize = 2000;

/// BFS layer sizes `(d_1, ..., d_r)` around `root`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeighborhoodProfile {
    pub root: u32,
    pub layers: Vec<u64>,
}

impl NeighborhoodProfile {
    pub fn radius(&self) -> usize {
        self.layers.len()
    }

    /// Degree of the root in `G^r`.
    pub fn power_degree(&self) -> u64 {
        self.layers.iter().sum()
    }
}

/// Reusable BFS state. `stamp[u] == epoch` marks `u` as visited in the
/// current search.
#[derive(Debug, Clone)]
pub struct BfsScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Writes `d_1..d_r` of `root` into `layers` (whose length is `r`).
    pub fn layers_into(&mut self, g: &SparseGraph, root: u32, layers: &mut [u64]) {
        debug_assert_eq!(self.stamp.len(), g.n());
        self.next_epoch();
        let epoch = self.epoch;
        self.queue.clear();
        self.queue.push(root);
        self.stamp[root as usize] = epoch;
        let mut start = 0;
        let mut end = 1;
        for depth in 0..layers.len() {
            for idx in start..end {
                let u = self.queue[idx];
                for &w in g.neighbors(u) {
                    let s = &mut self.stamp[w as usize];
                    if *s != epoch {
                        *s = epoch;
                        self.queue.push(w);
                    }
                }
            }
            let found = self.queue.len() - end;
            layers[depth] = found as u64;
            if found == 0 {
                layers[depth + 1..].fill(0);
                break;
            }
            start = end;
            end = self.queue.len();
        }
    }

    pub fn power_degree(
        &mut self,
        g: &SparseGraph,
        root: u32,
        r: usize,
        buf: &mut Vec<u64>,
    ) -> u64 {
        buf.clear();
        buf.resize(r, 0);
        self.layers_into(g, root, buf);
        buf.iter().sum()
    }
}

fn check_root(g: &SparseGraph, v: u32, r: usize) -> Result<()> {
    if v as usize >= g.n() {
        return Err(Error::InvalidInput(format!(
            "vertex {v} outside [0, {})",
            g.n()
        )));
    }
    if r == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    Ok(())
}

pub fn layer_profile(g: &SparseGraph, v: u32, r: usize) -> Result<NeighborhoodProfile> {
    check_root(g, v, r)?;
    let mut layers = vec![0; r];
    BfsScratch::new(g.n()).layers_into(g, v, &mut layers);
    Ok(NeighborhoodProfile { root: v, layers })
}

pub fn power_degree(g: &SparseGraph, v: u32, r: usize) -> Result<u64> {
    Ok(layer_profile(g, v, r)?.power_degree())
}

/// Maximum degree of `G^r` together with the full degree histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxDegreeResult {
    pub argmax_vertex: u32,
    pub max_degree: u64,
    /// degree -> number of vertices with that degree in `G^r`
    pub histogram: BTreeMap<u64, u64>,
}

impl MaxDegreeResult {
    /// Number of vertices whose `G^r` degree is strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> u64 {
        self.histogram
            .iter()
            .filter(|(&d, _)| d as f64 > threshold)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "degree,count")?;
        for (d, c) in &self.histogram {
            writeln!(w, "{d},{c}")?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone)]
struct ScanAcc {
    best: u64,
    argmax: u32,
    hist: Vec<u64>,
}

impl ScanAcc {
    fn empty() -> Self {
        Self {
            best: 0,
            argmax: u32::MAX,
            hist: Vec::new(),
        }
    }

    fn push(&mut self, v: u32, deg: u64) {
        if self.argmax == u32::MAX || deg > self.best || (deg == self.best && v < self.argmax) {
            self.best = deg;
            self.argmax = v;
        }
        let d = deg as usize;
        if d >= self.hist.len() {
            self.hist.resize(d + 1, 0);
        }
        self.hist[d] += 1;
    }

    /// Commutative and associative, so the result does not depend on how
    /// the roots were partitioned.
    fn merge(mut self, mut other: Self) -> Self {
        if self.hist.len() < other.hist.len() {
            std::mem::swap(&mut self.hist, &mut other.hist);
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        let take_other = other.argmax != u32::MAX
            && (self.argmax == u32::MAX
                || other.best > self.best
                || (other.best == self.best && other.argmax < self.argmax));
        if take_other {
            self.best = other.best;
            self.argmax = other.argmax;
        }
        self
    }
}

const SCAN_BLOCK: usize = 4096;

/// `Δ(G^r)` by a full BFS from every root, ties broken by smallest vertex.
///
/// Runs on the current rayon pool; wrap the call in `ThreadPool::install`
/// to control the worker count. The result is identical for any pool size.
pub fn max_power_degree(g: &SparseGraph, r: usize) -> Result<MaxDegreeResult> {
    if r == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let n = g.n();
    let blocks = n.div_ceil(SCAN_BLOCK);
    let acc = (0..blocks)
        .into_par_iter()
        .map_init(
            || (BfsScratch::new(n), Vec::with_capacity(r)),
            |(scratch, buf), b| {
                let mut acc = ScanAcc::empty();
                let lo = b * SCAN_BLOCK;
                let hi = (lo + SCAN_BLOCK).min(n);
                for v in lo as u32..hi as u32 {
                    let deg = scratch.power_degree(g, v, r, buf);
                    acc.push(v, deg);
                }
                acc
            },
        )
        .reduce(ScanAcc::empty, ScanAcc::merge);
    let histogram = acc
        .hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d as u64, c))
        .collect();
    Ok(MaxDegreeResult {
        argmax_vertex: if acc.argmax == u32::MAX {
            0
        } else {
            acc.argmax
        },
        max_degree: acc.best,
        histogram,
    })
}

/// Census of layer profiles over every vertex: profile -> vertex count.
pub fn profile_census(g: &SparseGraph, r: usize) -> Result<BTreeMap<Vec<u64>, u64>> {
    if r == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let mut scratch = BfsScratch::new(g.n());
    let mut layers = vec![0; r];
    let mut census = BTreeMap::new();
    for v in 0..g.n() as u32 {
        scratch.layers_into(g, v, &mut layers);
        *census.entry(layers.clone()).or_insert(0) += 1;
    }
    Ok(census)
}

pub fn write_census_csv<W: Write>(
    census: &BTreeMap<Vec<u64>, u64>,
    r: usize,
    mut w: W,
) -> std::io::Result<()> {
    let header: Vec<String> = (1..=r).map(|i| format!("d{i}")).collect();
    writeln!(w, "{},count", header.join(","))?;
    for (profile, count) in census {
        let cols: Vec<String> = profile.iter().map(u64::to_string).collect();
        writeln!(w, "{},{count}", cols.join(","))?;
    }
    w.flush()
}

/// Builds `G^r` directly from truncated reachability closures.
///
/// Row `v` of the closure after `k` rounds is the set of vertices within
/// distance `k` of `v`; each round ORs in the rows of all neighbors. Costs
/// `O(r * m * n / 64)`, hence the size cap.
pub fn exact_power_oracle(g: &SparseGraph, r: usize) -> Result<SparseGraph> {
    exact_power_oracle_with_cap(g, r, DEFAULT_ORACLE_CAP)
}

pub fn exact_power_oracle_with_cap(g: &SparseGraph, r: usize, cap: usize) -> Result<SparseGraph> {
    let n = g.n();
    if n > cap {
        return Err(Error::Capacity(format!(
            "power oracle limited to n <= {cap}, got n = {n}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let words = n.div_ceil(64);
    let mut reach = vec![0u64; n * words];
    for v in 0..n {
        reach[v * words + v / 64] |= 1 << (v % 64);
    }
    let mut next = reach.clone();
    for _ in 0..r {
        next.copy_from_slice(&reach);
        for v in 0..n {
            for &u in g.neighbors(v as u32) {
                let u = u as usize;
                for k in 0..words {
                    next[v * words + k] |= reach[u * words + k];
                }
            }
        }
        std::mem::swap(&mut reach, &mut next);
    }
    let mut edges = Vec::new();
    for v in 0..n {
        for k in 0..words {
            let mut bits = reach[v * words + k];
            while bits != 0 {
                let u = k * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if u > v {
                    edges.push((v, u));
                }
            }
        }
    }
    build_from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_gnp_with_probability;

    fn path5() -> SparseGraph {
        build_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
    }

    fn cycle5() -> SparseGraph {
        build_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap()
    }

    fn star(leaves: usize) -> SparseGraph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        build_from_edges(leaves + 1, &edges).unwrap()
    }

    #[test]
    fn profiles_by_inspection() {
        assert_eq!(layer_profile(&path5(), 2, 2).unwrap().layers, vec![2, 2]);
        for v in 0..5 {
            assert_eq!(layer_profile(&cycle5(), v, 2).unwrap().layers, vec![2, 2]);
        }
        let isolated = build_from_edges(3, &[(1, 2)]).unwrap();
        assert_eq!(
            layer_profile(&isolated, 0, 3).unwrap().layers,
            vec![0, 0, 0]
        );
    }

    #[test]
    fn power_degrees_by_inspection() {
        assert_eq!(power_degree(&path5(), 2, 2).unwrap(), 4);
        let k5 = sample_gnp_with_probability(5, 1.0, 0).unwrap();
        for r in 1..4 {
            assert_eq!(power_degree(&k5, 3, r).unwrap(), 4);
        }
        assert_eq!(power_degree(&star(6), 1, 2).unwrap(), 6);
    }

    #[test]
    fn range_checks() {
        assert!(layer_profile(&path5(), 5, 1).is_err());
        assert!(layer_profile(&path5(), 0, 0).is_err());
        assert!(max_power_degree(&path5(), 0).is_err());
    }

    #[test]
    fn max_degree_examples() {
        let res = max_power_degree(&path5(), 2).unwrap();
        assert_eq!((res.max_degree, res.argmax_vertex), (4, 2));
        assert_eq!(res.histogram.values().sum::<u64>(), 5);

        let empty = sample_gnp_with_probability(7, 0.0, 0).unwrap();
        let res = max_power_degree(&empty, 3).unwrap();
        assert_eq!((res.max_degree, res.argmax_vertex), (0, 0));
        assert_eq!(res.histogram, BTreeMap::from([(0, 7)]));

        // r >= n - 1 on a connected graph reaches everything.
        let res = max_power_degree(&path5(), 4).unwrap();
        assert_eq!(res.max_degree, 4);
        assert_eq!(res.histogram, BTreeMap::from([(4, 5)]));
    }

    #[test]
    fn oracle_examples() {
        let p2 = exact_power_oracle(&path5(), 2).unwrap();
        assert_eq!(
            (0..5).map(|v| p2.degree(v)).collect::<Vec<_>>(),
            vec![2, 3, 4, 3, 2]
        );
        let c2 = exact_power_oracle(&cycle5(), 2).unwrap();
        assert_eq!(c2.edge_count(), 10);

        let big = sample_gnp_with_probability(2001, 0.0, 0).unwrap();
        assert!(matches!(
            exact_power_oracle(&big, 2),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn epoch_wraparound_keeps_results() {
        let g = cycle5();
        let mut scratch = BfsScratch::new(5);
        scratch.epoch = u32::MAX - 1;
        let mut layers = vec![0; 2];
        for _ in 0..4 {
            scratch.layers_into(&g, 0, &mut layers);
            assert_eq!(layers, vec![2, 2]);
        }
    }

    #[test]
    fn census_counts_every_vertex() {
        let census = profile_census(&star(3), 2).unwrap();
        assert_eq!(census, BTreeMap::from([(vec![1, 2], 3), (vec![3, 0], 1)]));
        let mut buf = Vec::new();
        write_census_csv(&census, 2, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "d1,d2,count\n1,2,3\n3,0,1\n"
        );
    }

    #[test]
    fn histogram_csv() {
        let res = max_power_degree(&path5(), 1).unwrap();
        let mut buf = Vec::new();
        res.write_histogram_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "degree,count\n1,2\n2,3\n");
        assert_eq!(res.count_above(1.5), 3);
    }
}
