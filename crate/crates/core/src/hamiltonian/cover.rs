//! Long square-paths by randomized greedy extension with backtracking, and
//! the covering bootstrap built on it.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::{check_vertex_list, random_partition, BitSet, Graph, Vertex};
use crate::matching::{hall_saturating_matching, BipartiteInstance, MatchingResult};
use crate::rng;

/// Result of a square-path search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningPath {
    pub seq: Vec<Vertex>,
    /// Number of vertices the path was allowed to use.
    pub allowed: usize,
    pub target: usize,
    pub target_met: bool,
    pub nodes: u64,
}

impl SpanningPath {
    pub fn coverage(&self) -> f64 {
        if self.allowed == 0 {
            1.0
        } else {
            self.seq.len() as f64 / self.allowed as f64
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Goal {
    Length(usize),
    Cycle,
}

struct Search<'a> {
    g: &'a Graph,
    free: BitSet,
    path: Vec<Vertex>,
    best: Vec<Vertex>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// Candidates extending the current path, fewest onward options last
    /// (they are popped first).
    fn candidates(&self, r: &mut rng::Rng) -> Vec<Vertex> {
        let k = self.path.len();
        let mut c = if k == 1 {
            self.free.members_in2(self.g.row(self.path[0]), self.g.row(self.path[0]))
        } else {
            self.free.members_in2(self.g.row(self.path[k - 1]), self.g.row(self.path[k - 2]))
        };
        c.shuffle(r);
        let last = self.path[k - 1];
        let mut keyed: Vec<(usize, Vertex)> =
            c.into_iter().map(|v| (self.free.count_in2(self.g.row(v), self.g.row(last)), v)).collect();
        keyed.sort_by_key(|&(d, _)| std::cmp::Reverse(d));
        keyed.into_iter().map(|(_, v)| v).collect()
    }

    fn closes(&self) -> bool {
        let p = &self.path;
        let n = p.len();
        n >= 3 && self.g.has_edge(p[n - 2], p[0]) && self.g.has_edge(p[n - 1], p[0]) && self.g.has_edge(p[n - 1], p[1])
    }

    fn done(&self, goal: Goal) -> bool {
        match goal {
            Goal::Length(t) => self.path.len() >= t,
            Goal::Cycle => self.free.is_empty() && self.closes(),
        }
    }

    /// Depth-first extension from the current path; returns whether the goal was reached.
    fn run(&mut self, goal: Goal, limit: u64, r: &mut rng::Rng) -> bool {
        if self.done(goal) {
            return true;
        }
        let stop = self.nodes + limit;
        let base = self.path.len();
        let mut stack: Vec<Vec<Vertex>> = vec![self.candidates(r)];
        while let Some(top) = stack.last_mut() {
            if self.nodes >= stop || self.nodes >= self.budget {
                break;
            }
            match top.pop() {
                Some(v) => {
                    self.nodes += 1;
                    self.path.push(v);
                    self.free.remove(v);
                    if self.path.len() > self.best.len() {
                        self.best.clone_from(&self.path);
                    }
                    if self.done(goal) {
                        return true;
                    }
                    let next = self.candidates(r);
                    stack.push(next);
                }
                None => {
                    stack.pop();
                    if self.path.len() > base {
                        let v = self.path.pop().expect("nonempty");
                        self.free.insert(v);
                    }
                }
            }
        }
        while self.path.len() > base {
            let v = self.path.pop().expect("nonempty");
            self.free.insert(v);
        }
        false
    }
}

fn search(g: &Graph, allowed: &[Vertex], goal: Goal, seed: u64, budget: u64) -> Result<(Vec<Vertex>, bool, u64)> {
    check_vertex_list(g.n(), allowed, "allowed set")?;
    if allowed.is_empty() {
        return Ok((Vec::new(), goal == Goal::Length(0), 0));
    }
    let mut r = rng::stream(seed);
    let mut s = Search {
        g,
        free: BitSet::from_slice(g.n(), allowed),
        path: Vec::new(),
        best: vec![allowed[0]],
        nodes: 0,
        budget,
    };
    let per_restart = (50 * allowed.len() as u64).max(1000);
    loop {
        let start = allowed[r.gen_range(0..allowed.len())];
        s.path.push(start);
        s.free.remove(start);
        if s.run(goal, per_restart, &mut r) {
            return Ok((s.path, true, s.nodes));
        }
        s.path.clear();
        s.free = BitSet::from_slice(g.n(), allowed);
        s.nodes += 1;
        if s.nodes >= budget {
            return Ok((s.best, false, s.nodes));
        }
    }
}

/// A square-path inside `allowed` on at least `⌈(1 − eps)|allowed|⌉`
/// vertices if one is found within `budget` search nodes, otherwise the
/// longest path seen.
pub fn almost_spanning_square_path(
    g: &Graph,
    allowed: &[Vertex],
    eps: f64,
    seed: u64,
    budget: u64,
) -> Result<SpanningPath> {
    if !(0.0..=1.0).contains(&eps) {
        return input(format!("eps must lie in [0, 1], got {eps}"));
    }
    let target = ((1.0 - eps) * allowed.len() as f64 - 1e-9).ceil().max(0.0) as usize;
    let (seq, met, nodes) = search(g, allowed, Goal::Length(target.max(1)), seed, budget)?;
    Ok(SpanningPath { target_met: met || seq.len() >= target, seq, allowed: allowed.len(), target, nodes })
}

/// A cyclic order of all of `allowed` whose square lies in `g`, if found
/// within `budget` search nodes.
pub fn square_cycle_search(g: &Graph, allowed: &[Vertex], seed: u64, budget: u64) -> Result<Option<Vec<Vertex>>> {
    if allowed.len() < 3 {
        return Ok(None);
    }
    let (seq, met, _) = search(g, allowed, Goal::Cycle, seed, budget)?;
    Ok(met.then_some(seq))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub paths: Vec<Vec<Vertex>>,
    pub leftover: Vec<Vertex>,
    /// Sizes of the bootstrap classes `V_1, …, V_q`.
    pub classes: Vec<usize>,
    /// Leftover size after each round.
    pub leftover_trace: Vec<usize>,
}

/// Number of bootstrap rounds: the largest `q ≥ 1` with `⌊u / 2^q⌋ ≥ floor`.
pub fn bootstrap_rounds(u: usize, floor: Option<usize>) -> usize {
    let Some(f) = floor else { return 1 };
    let f = f.max(1);
    let mut q = 1;
    while q < 63 && (u >> (q + 1)) >= f {
        q += 1;
    }
    q
}

/// Covers `allowed` by vertex-disjoint square-paths: `allowed` is cut into
/// classes of sizes `⌊|U|/2^i⌋` (remainder in the last), and round `i`
/// searches a long path in the leftover of round `i − 1` together with `V_i`.
/// Paths with fewer than two vertices are returned to the leftover.
pub fn cover_with_square_paths(
    g: &Graph,
    allowed: &[Vertex],
    eps: f64,
    floor: Option<usize>,
    seed: u64,
    budget: u64,
) -> Result<Cover> {
    check_vertex_list(g.n(), allowed, "cover set")?;
    let u = allowed.len();
    let q = bootstrap_rounds(u, floor);
    let mut sizes: Vec<usize> = (1..q).map(|i| u >> i).collect();
    sizes.push(u - sizes.iter().sum::<usize>());
    let part = random_partition(allowed, &sizes, rng::derive(seed, 0))?;
    let mut leftover: Vec<Vertex> = Vec::new();
    let mut paths = Vec::new();
    let mut trace = Vec::new();
    for (i, class) in part.classes.iter().enumerate() {
        let mut pool = std::mem::take(&mut leftover);
        pool.extend_from_slice(class);
        pool.sort_unstable();
        let p = almost_spanning_square_path(g, &pool, eps, rng::derive(seed, i as u64 + 1), budget)?;
        let used = BitSet::from_slice(g.n(), if p.seq.len() >= 2 { &p.seq } else { &[] });
        leftover = pool.into_iter().filter(|&v| !used.contains(v)).collect();
        if p.seq.len() >= 2 {
            paths.push(p.seq);
        }
        trace.push(leftover.len());
    }
    Ok(Cover { paths, leftover, classes: sizes, leftover_trace: trace })
}

/// Hall matching from the leftover `q_set` into `x1`.
pub fn match_leftover(g: &Graph, q_set: &[Vertex], x1: &[Vertex]) -> Result<MatchingResult<(Vertex, Vertex)>> {
    check_vertex_list(g.n(), q_set, "leftover set")?;
    check_vertex_list(g.n(), x1, "matching reservoir")?;
    let xs = BitSet::from_slice(g.n(), x1);
    if let Some(v) = q_set.iter().find(|&&v| xs.contains(v)) {
        return input(format!("vertex {v} is both leftover and in the matching reservoir"));
    }
    let edges = q_set.iter().flat_map(|&q| x1.iter().filter(move |&&x| g.has_edge(q, x)).map(move |&x| (q, x))).collect();
    hall_saturating_matching(&BipartiteInstance::new(q_set.to_vec(), x1.to_vec(), edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::check_square_path;
    use crate::graph::gnp_generate;

    #[test]
    fn complete_graph_full_path() {
        let g = Graph::complete(20);
        let all: Vec<Vertex> = (0..20).collect();
        let p = almost_spanning_square_path(&g, &all, 0.0, 1, 10_000).unwrap();
        assert_eq!(p.seq.len(), 20);
        assert!(p.target_met);
        assert_eq!(check_square_path(&g, &p.seq), Ok(()));
    }

    #[test]
    fn edgeless_single_vertex() {
        let g = Graph::empty(10);
        let all: Vec<Vertex> = (0..10).collect();
        let p = almost_spanning_square_path(&g, &all, 0.1, 1, 1000).unwrap();
        assert_eq!(p.seq.len(), 1);
        assert!((p.coverage() - 0.1).abs() < 1e-12);
        assert!(!p.target_met);
    }

    #[test]
    fn random_paths_validate() {
        let g = gnp_generate(120, 0.5, 4);
        let all: Vec<Vertex> = (0..120).collect();
        let p = almost_spanning_square_path(&g, &all, 0.1, 2, 100_000).unwrap();
        assert_eq!(check_square_path(&g, &p.seq), Ok(()));
        assert!(p.seq.len() >= 108);
    }

    #[test]
    fn cycle_search_closes() {
        let g = gnp_generate(60, 0.7, 8);
        let all: Vec<Vertex> = (0..60).collect();
        let c = square_cycle_search(&g, &all, 3, 200_000).unwrap().unwrap();
        let n = c.len();
        assert_eq!(n, 60);
        for i in 0..n {
            assert!(g.has_edge(c[i], c[(i + 1) % n]) && g.has_edge(c[i], c[(i + 2) % n]));
        }
    }

    #[test]
    fn rounds() {
        assert_eq!(bootstrap_rounds(400, None), 1);
        assert_eq!(bootstrap_rounds(400, Some(50)), 3);
        assert_eq!(bootstrap_rounds(10, Some(50)), 1);
    }

    #[test]
    fn complete_cover_has_no_leftover() {
        let g = Graph::complete(64);
        let all: Vec<Vertex> = (0..64).collect();
        let c = cover_with_square_paths(&g, &all, 0.0, None, 1, 10_000).unwrap();
        assert_eq!(c.paths.len(), 1);
        assert!(c.leftover.is_empty());
        let c = cover_with_square_paths(&g, &all, 0.0, Some(8), 1, 10_000).unwrap();
        assert_eq!(c.classes, vec![32, 16, 16]);
        assert_eq!(c.paths.len(), 3);
        assert!(c.leftover.is_empty());
    }

    #[test]
    fn leftover_matching() {
        let g = Graph::complete(10);
        assert!(match_leftover(&g, &[], &[1, 2]).unwrap().is_saturating());
        let m = match_leftover(&g, &[0, 1], &[5, 6, 7]).unwrap();
        assert!(m.is_saturating());
        assert_eq!(m.matching.len(), 2);
        assert!(match_leftover(&g, &[0, 1], &[1]).is_err());
        assert!(!match_leftover(&g, &[0, 1], &[5]).unwrap().is_saturating());
    }
}
