//! Undirected simple graphs on the dense vertex set `0..n`.
//!
//! A [`Graph`] keeps two views of its adjacency: sorted neighbor lists for
//! deterministic iteration, and one bit row per vertex so that common
//! neighborhoods and set-restricted degrees are word-parallel intersections.
//! Graphs are immutable once built; "mutations" such as edge deletion return
//! a new graph.

mod family;
pub mod io;
mod random;
mod stats;

pub use family::{
    check_family_membership, check_good_set, FamilyParams, GoodSetConfig, GoodSetReport,
    GoodSetWitnesses, MembershipReport, PropertyCheck, PropertyStatus, WitnessRecord,
    DEFAULT_SLACK,
};
pub use random::{gnp_generate, random_partition, random_subset, Partition};
pub use stats::{graph_stat, StatQuery};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// An ordered pair of vertices. Ports of gadgets are ordered: a square-path
/// connecting `a` to `b` is also one connecting `b.rev()` to `a.rev()`, but
/// not in general one connecting `b` to `a`.
pub type Pair = (Vertex, Vertex);

pub fn rev(p: Pair) -> Pair {
    (p.1, p.0)
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<Vec<Vertex>>,
    rows: Vec<u64>,
    edge_count: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let words = words_for(n);
        Graph { n, words, adj: vec![Vec::new(); n], rows: vec![0; n * words], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, edges).expect("complete graph edges are valid")
    }

    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse to one; loops and out-of-range endpoints are errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !g.has_edge(u, v) {
                g.set_bit(u, v);
                g.set_bit(v, u);
                g.adj[u].push(v);
                g.adj[v].push(u);
                g.edge_count += 1;
            }
        }
        for list in &mut g.adj {
            list.sort_unstable();
        }
        Ok(g)
    }

    fn set_bit(&mut self, u: Vertex, v: Vertex) {
        self.rows[u * self.words + v / 64] |= 1u64 << (v % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// `false` for out-of-range endpoints rather than a panic.
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Bit row of `v`: bit `w` is set iff `{v, w}` is an edge.
    pub fn row(&self, v: Vertex) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    pub fn words(&self) -> usize {
        self.words
    }

    /// All edges `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn codegree(&self, u: Vertex, v: Vertex) -> usize {
        self.row(u).iter().zip(self.row(v)).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn common_neighbors(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        for (i, (a, b)) in self.row(u).iter().zip(self.row(v)).enumerate() {
            let mut w = a & b;
            while w != 0 {
                out.push(i * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    /// Number of triangles containing `v`.
    pub fn triangles_at(&self, v: Vertex) -> usize {
        let mut twice = 0;
        for &u in &self.adj[v] {
            twice += self.codegree(u, v);
        }
        twice / 2
    }

    pub fn triangle_count(&self) -> usize {
        let mut total = 0;
        for (u, v) in self.edges() {
            total += self.codegree(u, v);
        }
        total / 3
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// A copy of the graph without the edges for which `remove` returns true.
    pub fn without_edges(&self, mut remove: impl FnMut(Vertex, Vertex) -> bool) -> Graph {
        let kept: Vec<_> = self.edges().into_iter().filter(|&(u, v)| !remove(u, v)).collect();
        Graph::from_edges(self.n, kept).expect("subset of valid edges")
    }

    /// The subgraph induced on `vertices`, relabelled to `0..k` in the given
    /// order, together with the local-to-global map.
    pub fn induced(&self, vertices: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = local[w];
                if j != usize::MAX && j > i {
                    edges.push((i, j));
                }
            }
        }
        (Graph::from_edges(vertices.len(), edges).expect("induced edges"), vertices.to_vec())
    }

    /// First edge of `self` missing from `host`, if any. Vertex counts must agree.
    pub fn check_subgraph_of(&self, host: &Graph) -> Result<()> {
        if self.n != host.n {
            return Err(Error::Input(format!(
                "vertex counts differ: {} versus host {}",
                self.n, host.n
            )));
        }
        for (u, v) in self.edges() {
            if !host.has_edge(u, v) {
                return Err(Error::MissingEdge(u, v));
            }
        }
        Ok(())
    }

    /// Structural audit: symmetric, loop-free, duplicate-free sorted lists that
    /// agree with the bit rows, and the cached edge count.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let mut degree_sum = 0;
        for v in 0..self.n {
            let list = &self.adj[v];
            degree_sum += list.len();
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("neighbor list of {v} is not strictly increasing"));
            }
            let mut bits = 0;
            for &w in list {
                if w == v {
                    return Err(format!("self-loop at {v}"));
                }
                if w >= self.n {
                    return Err(format!("neighbor {w} of {v} out of range"));
                }
                if self.adj[w].binary_search(&v).is_err() {
                    return Err(format!("asymmetric adjacency {v} -> {w}"));
                }
                if !self.has_edge(v, w) {
                    return Err(format!("bit row of {v} lacks {w}"));
                }
            }
            for word in self.row(v) {
                bits += word.count_ones() as usize;
            }
            if bits != list.len() {
                return Err(format!("bit row of {v} disagrees with its list"));
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "edge count {} but degree sum {degree_sum}",
                self.edge_count
            ));
        }
        Ok(())
    }
}

/// Fixed-capacity vertex set backed by bit words, sized for a graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSet {
    bits: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> BitSet {
        BitSet { bits: vec![0; words_for(n)] }
    }

    pub fn from_slice(n: usize, vs: &[Vertex]) -> BitSet {
        let mut s = BitSet::new(n);
        for &v in vs {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: Vertex) {
        self.bits[v / 64] |= 1u64 << (v % 64);
    }

    pub fn remove(&mut self, v: Vertex) {
        self.bits[v / 64] &= !(1u64 << (v % 64));
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.bits.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// `|row ∩ self|` for a graph bit row of the same width.
    pub fn count_in(&self, row: &[u64]) -> usize {
        self.bits.iter().zip(row).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// `|row_a ∩ row_b ∩ self|`.
    pub fn count_in2(&self, row_a: &[u64], row_b: &[u64]) -> usize {
        self.bits
            .iter()
            .zip(row_a)
            .zip(row_b)
            .map(|((s, a), b)| (s & a & b).count_ones() as usize)
            .sum()
    }

    /// Elements of `row_a ∩ row_b ∩ self` in increasing order.
    pub fn members_in2(&self, row_a: &[u64], row_b: &[u64]) -> Vec<Vertex> {
        let mut out = Vec::new();
        for (i, ((s, a), b)) in self.bits.iter().zip(row_a).zip(row_b).enumerate() {
            let mut w = s & a & b;
            while w != 0 {
                out.push(i * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }
}

/// Checks that `vs` lists vertices of a graph on `n` vertices without repeats.
pub(crate) fn check_vertex_list(n: usize, vs: &[Vertex], what: &str) -> Result<()> {
    let mut seen = BitSet::new(n);
    for &v in vs {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        if seen.contains(v) {
            return Err(Error::Input(format!("{what} lists vertex {v} twice")));
        }
        seen.insert(v);
    }
    Ok(())
}
