use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::gadgets::{validate_embedding, Embedding};
use crate::graph::{BitSet, Graph, Pair, Vertex};

/// `f(i) = i − 1` for even `i`, `i − b` for odd `i`. Positions `−1` and `0`
/// hold the seed pairs.
pub fn f_index(i: i64, b: usize) -> i64 {
    if i % 2 == 0 {
        i - 1
    } else {
        i - b as i64
    }
}

fn fpos(i: usize, b: usize) -> usize {
    // Offset by one so that position -1 is stored at 0.
    (f_index(i as i64, b) + 1) as usize
}

/// Layered union of all `(b, ·)`-pseudo-paths that start at the seed pairs
/// and take their `j`-th new vertex from `W̃_{π(j)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionGraph {
    pub b: usize,
    pub m: usize,
    /// `pi[j - 1] = π(j)`, 1-based class indices.
    pub pi: Vec<usize>,
    pub seeds: Vec<Pair>,
    /// `classes[i - 1] = W_i`.
    pub classes: Vec<Vec<Vertex>>,
    pub excluded: Vec<Vertex>,
    /// `E_0, …, E_m`; each edge is written (earlier position, position `j`).
    pub layers: Vec<Vec<Pair>>,
    /// `D_j = E_j(W_{π(f(j))}, W_{π(j)})`, the edges the next layer grows from.
    pub steps: Vec<Vec<Pair>>,
}

fn check_classes(g: &Graph, seeds: &[Pair], classes: &[Vec<Vertex>], excluded: &[Vertex]) -> Result<()> {
    let mut seen = BitSet::new(g.n());
    let mut mark = |v: Vertex, what: &str| -> Result<()> {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if seen.contains(v) {
            return input(format!("vertex {v} appears twice among seeds and classes ({what})"));
        }
        seen.insert(v);
        Ok(())
    };
    for &(a, b) in seeds {
        mark(a, "seed")?;
        mark(b, "seed")?;
        if !g.has_edge(a, b) {
            return Err(Error::MissingEdge(a, b));
        }
    }
    for c in classes {
        for &v in c {
            mark(v, "class")?;
        }
    }
    if let Some(&v) = excluded.iter().find(|&&v| v >= g.n()) {
        return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
    }
    Ok(())
}

/// Builds the projection graph layer by layer.
pub fn build_projection_graph(
    g: &Graph,
    seeds: &[Pair],
    pi: &[usize],
    classes: &[Vec<Vertex>],
    excluded: &[Vertex],
    b: usize,
) -> Result<ProjectionGraph> {
    if !(1..=2).contains(&b) {
        return input(format!("b must be 1 or 2, got {b}"));
    }
    let m = pi.len();
    let mut sorted_pi = pi.to_vec();
    sorted_pi.sort_unstable();
    if sorted_pi != (1..=m).collect::<Vec<_>>() || classes.len() != m {
        return input(format!("pi must be a permutation of 1..={} matching {} classes", m, classes.len()));
    }
    check_classes(g, seeds, classes, excluded)?;
    let ex = BitSet::from_slice(g.n(), excluded);
    let masks: Vec<BitSet> = classes
        .iter()
        .map(|c| BitSet::from_slice(g.n(), &c.iter().copied().filter(|&v| !ex.contains(v)).collect::<Vec<_>>()))
        .collect();
    let mut layers = vec![seeds.to_vec()];
    let mut steps = vec![seeds.to_vec()];
    for j in 1..=m {
        let mask = &masks[pi[j - 1] - 1];
        let mut e = BTreeSet::new();
        let mut d = BTreeSet::new();
        // In D_{j-1} the first entry sits at f(j-1), the second at j-1.
        let keep_first = fpos(j, b) == fpos(j - 1, b);
        for &(u, w) in &steps[j - 1] {
            for v in mask.members_in2(g.row(u), g.row(w)) {
                e.insert((u, v));
                e.insert((w, v));
                d.insert(if keep_first { (u, v) } else { (w, v) });
            }
        }
        layers.push(e.into_iter().collect());
        steps.push(d.into_iter().collect());
    }
    Ok(ProjectionGraph {
        b,
        m,
        pi: pi.to_vec(),
        seeds: seeds.to_vec(),
        classes: classes.to_vec(),
        excluded: excluded.to_vec(),
        layers,
        steps,
    })
}

impl ProjectionGraph {
    /// `e_F(W_{π(f(i))}, W_{π(i)})`.
    pub fn step_count(&self, i: usize) -> usize {
        self.steps[i].len()
    }

    /// Rebuilds every layer by brute force over class members and compares.
    pub fn audit(&self, g: &Graph) -> std::result::Result<(), String> {
        let mut prev: Vec<Pair> = self.seeds.clone();
        if self.layers.first() != Some(&prev) {
            return Err("E_0 differs from the seed edges".into());
        }
        for j in 1..=self.m {
            let class = &self.classes[self.pi[j - 1] - 1];
            let mut e = Vec::new();
            let mut d = Vec::new();
            for &(u, w) in &prev {
                for &v in class {
                    if self.excluded.contains(&v) || !g.has_edge(u, v) || !g.has_edge(w, v) {
                        continue;
                    }
                    e.push((u, v));
                    e.push((w, v));
                    d.push(if f_index(j as i64, self.b) == f_index(j as i64 - 1, self.b) { (u, v) } else { (w, v) });
                }
            }
            e.sort_unstable();
            e.dedup();
            d.sort_unstable();
            d.dedup();
            if e != self.layers[j] {
                return Err(format!("layer E_{j} differs from the rebuild"));
            }
            if d != self.steps[j] {
                return Err(format!("step edges D_{j} differ from the rebuild"));
            }
            prev = d;
        }
        Ok(())
    }

    /// Walks the provenance of `edge ∈ D_s` back to a seed. Returns the seed
    /// index and the vertex sequence for positions `−1, 0, 1, …, s`, which is a
    /// `(b, s + 2)`-pseudo-path.
    pub fn extract_at_step(&self, g: &Graph, s: usize, edge: Pair) -> Result<(usize, Vec<Vertex>)> {
        if s > self.m || self.steps[s].binary_search(&edge).is_err() {
            return input(format!("edge {edge:?} is not in step {s} of the projection graph"));
        }
        let mut seq = vec![usize::MAX; s + 2];
        let (p, q) = edge;
        seq[s + 1] = q;
        seq[fpos(s, self.b)] = p;
        let mut cur = edge;
        for t in (1..=s).rev() {
            let (p, q) = cur;
            let p_first = fpos(t, self.b) == fpos(t - 1, self.b);
            let parent = self.steps[t - 1]
                .iter()
                .copied()
                .find(|&(u, w)| {
                    let (mine, other) = if p_first { (u, w) } else { (w, u) };
                    mine == p && g.has_edge(other, q) && g.has_edge(mine, q)
                })
                .ok_or_else(|| Error::Composition(format!("no parent for {cur:?} at step {t}")))?;
            seq[fpos(t - 1, self.b)] = parent.0;
            seq[t] = parent.1;
            cur = parent;
        }
        let idx = self
            .seeds
            .iter()
            .position(|&sd| sd == cur)
            .ok_or_else(|| Error::Composition("provenance walk ended outside the seeds".into()))?;
        Ok((idx, seq))
    }

    /// A `(b, 2j + 2)`-pseudo-path from a seed to `edge ∈ E_F(W_{π(2j−1)}, W_{π(2j)})`,
    /// checked to validate, to take one vertex from each traversed class, and to avoid `X`.
    pub fn extract_pseudo_path(&self, g: &Graph, j: usize, edge: Pair) -> Result<(usize, Embedding)> {
        if j == 0 || 2 * j > self.m {
            return input(format!("block index {j} outside 1..={}", self.m / 2));
        }
        let (idx, seq) = self.extract_at_step(g, 2 * j, edge)?;
        let emb = Embedding::pseudo_path(self.b, seq.clone())?;
        validate_embedding(g, &emb, Some(self.seeds[idx]), Some(edge))
            .map_err(|v| Error::Composition(format!("extracted pseudo-path fails validation: {v}")))?;
        for (pos, &v) in seq.iter().enumerate().skip(2) {
            let class = &self.classes[self.pi[pos - 2] - 1];
            if class.binary_search(&v).is_err() && !class.contains(&v) {
                return Err(Error::Composition(format!("vertex {v} at position {} is outside its class", pos - 1)));
            }
            if self.excluded.contains(&v) {
                return Err(Error::Composition(format!("extracted pseudo-path uses excluded vertex {v}")));
            }
        }
        Ok((idx, emb))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFlag {
    pub step: usize,
    /// `e(i+1) ≥ (1/ε) e(i)`.
    pub inv_eps: bool,
    /// `e(i+1) ≥ (1 + 4√ε) e(i)`.
    pub sqrt_eps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFlag {
    pub block: usize,
    pub inv_eps: bool,
    pub sqrt_eps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub eps: f64,
    /// `counts[i] = e_F(W_{f(i)}, W_i)` for `i = 0..=m`.
    pub counts: Vec<usize>,
    pub steps: Vec<StepFlag>,
    pub blocks: Vec<BlockFlag>,
}

pub fn expansion_stats(f: &ProjectionGraph, eps: f64) -> StepStats {
    let counts: Vec<usize> = f.steps.iter().map(Vec::len).collect();
    let c1 = 1.0 / eps;
    let c2 = 1.0 + 4.0 * eps.sqrt();
    let steps: Vec<StepFlag> = (1..f.m)
        .map(|i| {
            let (a, b) = (counts[i] as f64, counts[i + 1] as f64);
            StepFlag { step: i, inv_eps: b >= c1 * a, sqrt_eps: b >= c2 * a }
        })
        .collect();
    let blocks = (1..)
        .take_while(|&i| 2 * i + 1 < f.m)
        .map(|i| {
            let s = |k: usize| steps.iter().find(|st| st.step == k);
            let (x, y) = (s(2 * i), s(2 * i + 1));
            BlockFlag {
                block: i,
                inv_eps: x.is_some_and(|f| f.inv_eps) || y.is_some_and(|f| f.inv_eps),
                sqrt_eps: x.is_some_and(|f| f.sqrt_eps) || y.is_some_and(|f| f.sqrt_eps),
            }
        })
        .collect();
    StepStats { eps, counts, steps, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        assert_eq!(f_index(4, 2), 3);
        assert_eq!(f_index(3, 2), 1);
        assert_eq!(f_index(3, 1), 2);
        assert_eq!(f_index(0, 1), -1);
    }

    fn hand_instance() -> Graph {
        // a=0, b=1, c=2, d=3, e=4
        Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn hand_trace() {
        let g = hand_instance();
        let f = build_projection_graph(&g, &[(0, 1)], &[1, 2], &[vec![2], vec![3, 4]], &[], 1).unwrap();
        assert_eq!(f.layers[1], vec![(0, 2), (1, 2)]);
        assert_eq!(f.layers[2], vec![(1, 3), (2, 3)]);
        f.audit(&g).unwrap();
        let (i, emb) = f.extract_pseudo_path(&g, 1, (2, 3)).unwrap();
        assert_eq!(i, 0);
        assert_eq!(emb.map, vec![0, 1, 2, 3]);
    }

    #[test]
    fn full_exclusion_empties_layers() {
        let g = hand_instance();
        let f = build_projection_graph(&g, &[(0, 1)], &[1, 2], &[vec![2], vec![3, 4]], &[2], 1).unwrap();
        assert!(f.layers[1].is_empty() && f.layers[2].is_empty());
    }

    #[test]
    fn complete_host_realizes_everything() {
        let g = Graph::complete(20);
        let classes: Vec<Vec<usize>> = (0..4).map(|i| (2 + 4 * i..6 + 4 * i).collect()).collect();
        let f = build_projection_graph(&g, &[(0, 1)], &[1, 2, 3, 4], &classes, &[3], 2).unwrap();
        f.audit(&g).unwrap();
        assert_eq!(f.step_count(2), 4 * 3);
        assert_eq!(f.step_count(3), 3 * 4);
        for j in 1..=2 {
            for &e in &f.steps[2 * j] {
                f.extract_pseudo_path(&g, j, e).unwrap();
            }
        }
    }

    #[test]
    fn seed_must_be_an_edge() {
        let g = hand_instance();
        assert!(build_projection_graph(&g, &[(0, 3)], &[1], &[vec![2]], &[], 1).is_err());
    }
}
