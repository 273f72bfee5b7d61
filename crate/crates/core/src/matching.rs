//! Bipartite matchings with Hall witnesses, star matchings by blow-up, and a
//! budgeted search for saturating matchings in `r`-uniform hypergraphs with
//! one vertex in `A` per edge.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::Vertex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteInstance {
    pub side_a: Vec<Vertex>,
    pub side_b: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
}

fn index_side(side: &[Vertex], what: &str) -> Result<HashMap<Vertex, usize>> {
    let mut idx = HashMap::with_capacity(side.len());
    for (i, &v) in side.iter().enumerate() {
        if idx.insert(v, i).is_some() {
            return input(format!("vertex {v} listed twice on side {what}"));
        }
    }
    Ok(idx)
}

impl BipartiteInstance {
    pub fn new(side_a: Vec<Vertex>, side_b: Vec<Vertex>, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        let inst = BipartiteInstance { side_a, side_b, edges };
        inst.indexed()?;
        Ok(inst)
    }

    /// Adjacency from A-indices to sorted, deduplicated B-indices.
    fn indexed(&self) -> Result<Vec<Vec<usize>>> {
        let ia = index_side(&self.side_a, "A")?;
        let ib = index_side(&self.side_b, "B")?;
        if let Some(v) = self.side_a.iter().find(|v| ib.contains_key(v)) {
            return input(format!("vertex {v} is on both sides"));
        }
        let mut adj = vec![Vec::new(); self.side_a.len()];
        for &(a, b) in &self.edges {
            match (ia.get(&a), ib.get(&b)) {
                (Some(&i), Some(&j)) => adj[i].push(j),
                _ => return input(format!("edge ({a}, {b}) does not join a declared A-vertex to a declared B-vertex")),
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Ok(adj)
    }

    /// `N(S)` for `S ⊆ A`, in the order of `side_b`.
    pub fn neighborhood(&self, s: &[Vertex]) -> Vec<Vertex> {
        let mut hit: Vec<Vertex> = self.edges.iter().filter(|(a, _)| s.contains(a)).map(|&(_, b)| b).collect();
        hit.sort_unstable();
        hit.dedup();
        self.side_b.iter().copied().filter(|b| hit.binary_search(b).is_ok()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingStatus {
    Saturating,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// `A' ⊆ A` with `|N(A')| < k|A'|` (`k = 1` for Hall, `k = r` for stars).
    Hall(Vec<Vertex>),
    /// `A' ⊆ A`, `B' ⊆ B` with `|B'| ≤ (2r − 3)|A'|` and every edge meeting `A'` meeting `B'`.
    Haxell { a: Vec<Vertex>, b: Vec<Vertex> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingResult<M> {
    pub status: MatchingStatus,
    pub matching: Vec<M>,
    pub witness: Option<Witness>,
}

impl<M> MatchingResult<M> {
    pub fn is_saturating(&self) -> bool {
        self.status == MatchingStatus::Saturating
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Star {
    pub center: Vertex,
    pub leaves: Vec<Vertex>,
}

const FREE: usize = usize::MAX;

/// Hopcroft–Karp on index adjacency. Returns `mate_a`.
fn hopcroft_karp(adj: &[Vec<usize>], nb: usize) -> Vec<usize> {
    let na = adj.len();
    let mut mate_a = vec![FREE; na];
    let mut mate_b = vec![FREE; nb];
    let mut dist = vec![0usize; na];
    loop {
        let mut q = VecDeque::new();
        for a in 0..na {
            if mate_a[a] == FREE {
                dist[a] = 0;
                q.push_back(a);
            } else {
                dist[a] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(a) = q.pop_front() {
            for &b in &adj[a] {
                match mate_b[b] {
                    FREE => found = true,
                    a2 if dist[a2] == usize::MAX => {
                        dist[a2] = dist[a] + 1;
                        q.push_back(a2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return mate_a;
        }
        fn augment(
            a: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            mate_a: &mut [usize],
            mate_b: &mut [usize],
        ) -> bool {
            for &b in &adj[a] {
                let next = mate_b[b];
                if next == FREE || (dist[next] == dist[a] + 1 && augment(next, adj, dist, mate_a, mate_b)) {
                    mate_a[a] = b;
                    mate_b[b] = a;
                    return true;
                }
            }
            dist[a] = usize::MAX;
            false
        }
        for a in 0..na {
            if mate_a[a] == FREE {
                augment(a, adj, &mut dist, &mut mate_a, &mut mate_b);
            }
        }
    }
}

/// A-indices reachable by alternating paths from unmatched A-vertices.
fn alternating_reach(adj: &[Vec<usize>], mate_a: &[usize], nb: usize) -> Vec<usize> {
    let mut mate_b = vec![FREE; nb];
    for (a, &b) in mate_a.iter().enumerate() {
        if b != FREE {
            mate_b[b] = a;
        }
    }
    let mut seen_a = vec![false; adj.len()];
    let mut seen_b = vec![false; nb];
    let mut q: VecDeque<usize> = (0..adj.len()).filter(|&a| mate_a[a] == FREE).collect();
    for &a in &q {
        seen_a[a] = true;
    }
    while let Some(a) = q.pop_front() {
        for &b in &adj[a] {
            if !seen_b[b] {
                seen_b[b] = true;
                let a2 = mate_b[b];
                if a2 != FREE && !seen_a[a2] {
                    seen_a[a2] = true;
                    q.push_back(a2);
                }
            }
        }
    }
    (0..adj.len()).filter(|&a| seen_a[a]).collect()
}

/// A-saturating matching, or a set `A'` with `|N(A')| < |A'|`.
pub fn hall_saturating_matching(inst: &BipartiteInstance) -> Result<MatchingResult<(Vertex, Vertex)>> {
    let adj = inst.indexed()?;
    let mate = hopcroft_karp(&adj, inst.side_b.len());
    if mate.iter().all(|&b| b != FREE) {
        let matching = mate.iter().enumerate().map(|(a, &b)| (inst.side_a[a], inst.side_b[b])).collect();
        return Ok(MatchingResult { status: MatchingStatus::Saturating, matching, witness: None });
    }
    let matching = mate
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b != FREE)
        .map(|(a, &b)| (inst.side_a[a], inst.side_b[b]))
        .collect();
    let witness = alternating_reach(&adj, &mate, inst.side_b.len()).into_iter().map(|a| inst.side_a[a]).collect();
    Ok(MatchingResult { status: MatchingStatus::Violated, matching, witness: Some(Witness::Hall(witness)) })
}

/// Vertex-disjoint `r`-stars centred at every A-vertex, by matching `r`
/// copies of each A-vertex. On failure the witness `A'` satisfies `|N(A')| < r|A'|`.
pub fn star_matching(inst: &BipartiteInstance, r: usize) -> Result<MatchingResult<Star>> {
    if r == 0 {
        return input("star size r must be at least 1");
    }
    let adj = inst.indexed()?;
    let blown: Vec<Vec<usize>> = adj.iter().flat_map(|l| std::iter::repeat_n(l.clone(), r)).collect();
    let mate = hopcroft_karp(&blown, inst.side_b.len());
    let stars = |mate: &[usize]| -> Vec<Star> {
        (0..adj.len())
            .map(|a| Star {
                center: inst.side_a[a],
                leaves: mate[a * r..(a + 1) * r].iter().filter(|&&b| b != FREE).map(|&b| inst.side_b[b]).collect(),
            })
            .collect()
    };
    if mate.iter().all(|&b| b != FREE) {
        return Ok(MatchingResult { status: MatchingStatus::Saturating, matching: stars(&mate), witness: None });
    }
    let mut originals: Vec<usize> = alternating_reach(&blown, &mate, inst.side_b.len()).into_iter().map(|c| c / r).collect();
    originals.dedup();
    let witness = originals.into_iter().map(|a| inst.side_a[a]).collect();
    Ok(MatchingResult { status: MatchingStatus::Violated, matching: stars(&mate), witness: Some(Witness::Hall(witness)) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperEdge {
    pub a: Vertex,
    pub b: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphInstance {
    pub side_a: Vec<Vertex>,
    pub side_b: Vec<Vertex>,
    pub r: usize,
    pub edges: Vec<HyperEdge>,
}

struct IndexedHyper {
    /// Per A-index, the edges as sorted B-index lists.
    by_a: Vec<Vec<Vec<usize>>>,
    /// Position of each edge in the input, parallel to `by_a`.
    origin: Vec<Vec<usize>>,
    nb: usize,
}

impl HypergraphInstance {
    pub fn new(side_a: Vec<Vertex>, side_b: Vec<Vertex>, r: usize, edges: Vec<HyperEdge>) -> Result<Self> {
        let h = HypergraphInstance { side_a, side_b, r, edges };
        h.indexed()?;
        Ok(h)
    }

    fn indexed(&self) -> Result<IndexedHyper> {
        if self.r < 2 {
            return input(format!("uniformity r = {} must be at least 2", self.r));
        }
        let ia = index_side(&self.side_a, "A")?;
        let ib = index_side(&self.side_b, "B")?;
        if let Some(v) = self.side_a.iter().find(|v| ib.contains_key(v)) {
            return input(format!("vertex {v} is on both sides"));
        }
        let mut by_a = vec![Vec::new(); self.side_a.len()];
        let mut origin = vec![Vec::new(); self.side_a.len()];
        for (k, e) in self.edges.iter().enumerate() {
            let Some(&a) = ia.get(&e.a) else {
                return input(format!("edge {k} has undeclared A-vertex {}", e.a));
            };
            let mut bs = Vec::with_capacity(e.b.len());
            for v in &e.b {
                match ib.get(v) {
                    Some(&j) => bs.push(j),
                    None => return input(format!("edge {k} has undeclared B-vertex {v}")),
                }
            }
            bs.sort_unstable();
            bs.dedup();
            if bs.len() != self.r - 1 {
                return input(format!("edge {k} has {} distinct B-vertices, expected {}", bs.len(), self.r - 1));
            }
            by_a[a].push(bs);
            origin[a].push(k);
        }
        Ok(IndexedHyper { by_a, origin, nb: self.side_b.len() })
    }
}

struct Budget {
    left: u64,
}

impl Budget {
    fn tick(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        true
    }
}

enum Search {
    Found,
    None,
    OutOfBudget,
}

fn match_rec(
    h: &IndexedHyper,
    order: &[usize],
    at: usize,
    used: &mut [bool],
    pick: &mut [usize],
    budget: &mut Budget,
) -> Search {
    if at == order.len() {
        return Search::Found;
    }
    if !budget.tick() {
        return Search::OutOfBudget;
    }
    let a = order[at];
    let mut exhausted = false;
    for (k, e) in h.by_a[a].iter().enumerate() {
        if e.iter().any(|&b| used[b]) {
            continue;
        }
        for &b in e {
            used[b] = true;
        }
        pick[a] = k;
        let r = match_rec(h, order, at + 1, used, pick, budget);
        for &b in e {
            used[b] = false;
        }
        match r {
            Search::Found => return Search::Found,
            Search::OutOfBudget => exhausted = true,
            Search::None => {}
        }
        if exhausted {
            break;
        }
    }
    if exhausted {
        Search::OutOfBudget
    } else {
        Search::None
    }
}

/// Smallest `B'` of size at most `k` hitting every edge in `edges`.
fn hitting_set(edges: &[&Vec<usize>], k: usize, chosen: &mut Vec<usize>, budget: &mut Budget) -> Option<bool> {
    let Some(e) = edges.iter().find(|e| !e.iter().any(|b| chosen.contains(b))) else {
        return Some(true);
    };
    if chosen.len() == k {
        return Some(false);
    }
    if !budget.tick() {
        return None;
    }
    for &b in e.iter() {
        chosen.push(b);
        match hitting_set(edges, k, chosen, budget) {
            Some(true) => return Some(true),
            None => return None,
            Some(false) => {}
        }
        chosen.pop();
    }
    Some(false)
}

/// Budgeted backtracking for an A-saturating matching. If the search space is
/// exhausted, a criterion violation `(A', B')` is searched for, trying larger
/// `A'` first. Running out of budget in either phase yields `Unknown`.
pub fn haxell_matching(inst: &HypergraphInstance, budget: u64) -> Result<MatchingResult<HyperEdge>> {
    let h = inst.indexed()?;
    let na = inst.side_a.len();
    let mut budget = Budget { left: budget };
    let mut order: Vec<usize> = (0..na).collect();
    order.sort_by_key(|&a| (h.by_a[a].len(), a));
    let mut used = vec![false; h.nb];
    let mut pick = vec![0usize; na];
    let unknown = || MatchingResult { status: MatchingStatus::Unknown, matching: Vec::new(), witness: None };
    match match_rec(&h, &order, 0, &mut used, &mut pick, &mut budget) {
        Search::Found => {
            let matching = (0..na).map(|a| inst.edges[h.origin[a][pick[a]]].clone()).collect();
            return Ok(MatchingResult { status: MatchingStatus::Saturating, matching, witness: None });
        }
        Search::OutOfBudget => return Ok(unknown()),
        Search::None => {}
    }
    if na >= 63 {
        return Ok(unknown());
    }
    let mut masks: Vec<u64> = (1..1u64 << na).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    for mask in masks {
        if !budget.tick() {
            return Ok(unknown());
        }
        let a_set: Vec<usize> = (0..na).filter(|&a| mask >> a & 1 == 1).collect();
        let k = (2 * inst.r - 3) * a_set.len();
        let edges: Vec<&Vec<usize>> = a_set.iter().flat_map(|&a| h.by_a[a].iter()).collect();
        let mut nbhd: Vec<usize> = edges.iter().flat_map(|e| e.iter().copied()).collect();
        nbhd.sort_unstable();
        nbhd.dedup();
        let b_set = if nbhd.len() <= k {
            Some(nbhd)
        } else {
            let mut chosen = Vec::new();
            match hitting_set(&edges, k, &mut chosen, &mut budget) {
                None => return Ok(unknown()),
                Some(true) => {
                    chosen.sort_unstable();
                    Some(chosen)
                }
                Some(false) => None,
            }
        };
        if let Some(b_set) = b_set {
            let witness = Witness::Haxell {
                a: a_set.iter().map(|&a| inst.side_a[a]).collect(),
                b: b_set.iter().map(|&b| inst.side_b[b]).collect(),
            };
            return Ok(MatchingResult { status: MatchingStatus::Violated, matching: Vec::new(), witness: Some(witness) });
        }
    }
    // No matching and no violation: impossible by the criterion being sufficient.
    Ok(unknown())
}

/// Re-checks a Hall-type witness by direct neighborhood counting: `|N(A')| < k|A'|`.
pub fn hall_witness_holds(inst: &BipartiteInstance, a: &[Vertex], k: usize) -> bool {
    !a.is_empty() && inst.neighborhood(a).len() < k * a.len()
}

/// Re-checks a Haxell violation certificate.
pub fn haxell_witness_holds(inst: &HypergraphInstance, a: &[Vertex], b: &[Vertex]) -> bool {
    !a.is_empty()
        && b.len() <= (2 * inst.r - 3) * a.len()
        && inst.edges.iter().filter(|e| a.contains(&e.a)).all(|e| e.b.iter().any(|v| b.contains(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_hall() {
        let i = BipartiteInstance::new(vec![0], vec![1], vec![(0, 1)]).unwrap();
        let r = hall_saturating_matching(&i).unwrap();
        assert_eq!(r.matching, vec![(0, 1)]);
        let i = BipartiteInstance::new(vec![0, 1], vec![2], vec![(0, 2), (1, 2)]).unwrap();
        let r = hall_saturating_matching(&i).unwrap();
        assert_eq!(r.status, MatchingStatus::Violated);
        assert_eq!(r.witness, Some(Witness::Hall(vec![0, 1])));
    }

    #[test]
    fn stars() {
        let i = BipartiteInstance::new(vec![0], vec![1, 2], vec![(0, 1), (0, 2)]).unwrap();
        let r = star_matching(&i, 2).unwrap();
        assert_eq!(r.matching, vec![Star { center: 0, leaves: vec![1, 2] }]);
        let edges = (0..2).flat_map(|a| (2..5).map(move |b| (a, b))).collect();
        let i = BipartiteInstance::new(vec![0, 1], vec![2, 3, 4], edges).unwrap();
        let r = star_matching(&i, 2).unwrap();
        assert_eq!(r.status, MatchingStatus::Violated);
        let Some(Witness::Hall(w)) = r.witness else { panic!() };
        assert!(hall_witness_holds(&i, &w, 2));
    }

    #[test]
    fn malformed_instances() {
        assert!(BipartiteInstance::new(vec![0], vec![0], vec![]).is_err());
        assert!(BipartiteInstance::new(vec![0], vec![1], vec![(1, 0)]).is_err());
        let e = HyperEdge { a: 0, b: vec![1] };
        assert!(HypergraphInstance::new(vec![0], vec![1, 2], 3, vec![e]).is_err());
    }

    #[test]
    fn haxell_examples() {
        let one = HypergraphInstance::new(vec![0], vec![1, 2], 3, vec![HyperEdge { a: 0, b: vec![1, 2] }]).unwrap();
        let r = haxell_matching(&one, 1000).unwrap();
        assert_eq!(r.matching, vec![HyperEdge { a: 0, b: vec![1, 2] }]);

        let edges = vec![HyperEdge { a: 0, b: vec![5, 6] }, HyperEdge { a: 1, b: vec![5, 6] }];
        let two = HypergraphInstance::new(vec![0, 1], vec![5, 6, 7], 3, edges).unwrap();
        let r = haxell_matching(&two, 1000).unwrap();
        assert_eq!(r.status, MatchingStatus::Violated);
        assert_eq!(r.witness, Some(Witness::Haxell { a: vec![0, 1], b: vec![5, 6] }));
    }

    #[test]
    fn haxell_budget_exhaustion() {
        let edges = (0..4).flat_map(|a| (10..16).map(move |b| HyperEdge { a, b: vec![b, b + 10] })).collect();
        let h = HypergraphInstance::new(vec![0, 1, 2, 3], (10..26).collect(), 3, edges).unwrap();
        assert_eq!(haxell_matching(&h, 1).unwrap().status, MatchingStatus::Unknown);
        assert!(haxell_matching(&h, 1000).unwrap().is_saturating());
    }
}
