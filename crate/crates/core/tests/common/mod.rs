//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqcycle::matching::BipartiteInstance;
use sqcycle::{Graph, Vertex};

/// Whether some injection `A → B` uses only instance edges.
pub fn exhaustive_saturating(inst: &BipartiteInstance) -> bool {
    fn go(i: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> bool {
        if i == adj.len() {
            return true;
        }
        for &j in &adj[i] {
            if !used[j] {
                used[j] = true;
                if go(i + 1, adj, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let adj: Vec<Vec<usize>> = inst
        .side_a
        .iter()
        .map(|a| {
            inst.side_b
                .iter()
                .enumerate()
                .filter(|(_, b)| inst.edges.contains(&(*a, **b)))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    go(0, &adj, &mut vec![false; inst.side_b.len()])
}

/// Random bipartite instance with `A = 0..a`, `B = 100..100+b`.
pub fn random_bipartite(rng: &mut ChaCha8Rng, a: usize, b: usize, p: f64) -> BipartiteInstance {
    let side_a: Vec<Vertex> = (0..a).collect();
    let side_b: Vec<Vertex> = (100..100 + b).collect();
    let mut edges = Vec::new();
    for &x in &side_a {
        for &y in &side_b {
            if rng.gen_bool(p) {
                edges.push((x, y));
            }
        }
    }
    BipartiteInstance::new(side_a, side_b, edges).unwrap()
}

/// Square-cycle check written from the definition, separately from the library.
pub fn is_square_cycle(g: &Graph, order: &[Vertex]) -> bool {
    let n = order.len();
    if n < 3 {
        return false;
    }
    let mut seen = vec![false; g.n()];
    for &v in order {
        if v >= g.n() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    if n != g.n() {
        return false;
    }
    let edges: std::collections::HashSet<(Vertex, Vertex)> = g.edges().into_iter().collect();
    let has = |u: Vertex, v: Vertex| edges.contains(&(u.min(v), u.max(v)));
    (0..n).all(|i| has(order[i], order[(i + 1) % n]) && has(order[i], order[(i + 2) % n]))
}

/// Maximum number of vertex-disjoint triangles by plain recursion; small `n` only.
pub fn brute_packing(g: &Graph) -> usize {
    fn go(g: &Graph, alive: &mut Vec<bool>, from: usize) -> usize {
        let n = g.n();
        let Some(v) = (from..n).find(|&v| alive[v]) else { return 0 };
        alive[v] = false;
        let mut best = go(g, alive, v + 1);
        for a in v + 1..n {
            if !alive[a] || !g.has_edge(v, a) {
                continue;
            }
            for b in a + 1..n {
                if alive[b] && g.has_edge(v, b) && g.has_edge(a, b) {
                    alive[a] = false;
                    alive[b] = false;
                    best = best.max(1 + go(g, alive, v + 1));
                    alive[a] = true;
                    alive[b] = true;
                }
            }
        }
        alive[v] = true;
        best
    }
    go(g, &mut vec![true; g.n()], 0)
}

/// Number of triangles containing `v`, by triple enumeration.
pub fn triangles_through(g: &Graph, v: Vertex) -> usize {
    let nb = g.neighbors(v);
    let mut t = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if g.has_edge(a, b) {
                t += 1;
            }
        }
    }
    t
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}
