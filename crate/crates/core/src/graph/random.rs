use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Graph, Vertex};
use crate::error::{input, Result};
use crate::rng;

/// Binomial random graph G(n, p). Pairs `(u, v)`, `u < v`, are visited in
/// lexicographic order and each consumes one uniform draw from the seeded
/// stream, so the output is a pure function of `(n, p, seed)`.
///
/// # Panics
/// If `p` is not in `[0, 1]`.
pub fn gnp_generate(n: usize, p: f64, seed: u64) -> Graph {
    assert!((0.0..=1.0).contains(&p), "edge probability {p} outside [0, 1]");
    let mut r = rng::stream(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Disjoint classes of exactly the requested sizes plus the leftover
/// `residue`. Every class is sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub universe: Vec<Vertex>,
    pub classes: Vec<Vec<Vertex>>,
    pub residue: Vec<Vertex>,
}

impl Partition {
    pub fn check(&self, sizes: &[usize]) -> std::result::Result<(), String> {
        if self.classes.len() != sizes.len() {
            return Err("class count differs from requested sizes".into());
        }
        let mut all: Vec<Vertex> = self.residue.clone();
        for (c, &s) in self.classes.iter().zip(sizes) {
            if c.len() != s {
                return Err(format!("class of size {} where {s} was requested", c.len()));
            }
            all.extend(c);
        }
        all.sort_unstable();
        let mut universe = self.universe.clone();
        universe.sort_unstable();
        if all != universe {
            return Err("classes and residue do not partition the universe".into());
        }
        Ok(())
    }
}

/// Uniformly random partition of `universe` into classes of the given sizes.
/// The universe is sorted before shuffling so that the result depends only on
/// the vertex set and the seed.
pub fn random_partition(universe: &[Vertex], sizes: &[usize], seed: u64) -> Result<Partition> {
    let mut pool = universe.to_vec();
    pool.sort_unstable();
    if pool.windows(2).any(|w| w[0] == w[1]) {
        return input("partition universe contains a repeated vertex");
    }
    let total: usize = sizes.iter().sum();
    if total > pool.len() {
        return input(format!(
            "requested class sizes sum to {total} but the universe has {} vertices",
            pool.len()
        ));
    }
    let universe_sorted = pool.clone();
    pool.shuffle(&mut rng::stream(seed));
    let mut classes = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        let mut c = pool[at..at + s].to_vec();
        c.sort_unstable();
        classes.push(c);
        at += s;
    }
    let mut residue = pool[at..].to_vec();
    residue.sort_unstable();
    Ok(Partition { universe: universe_sorted, classes, residue })
}

/// A uniformly random `k`-subset of `from`, sorted.
pub fn random_subset(from: &[Vertex], k: usize, seed: u64) -> Result<Vec<Vertex>> {
    Ok(random_partition(from, &[k], seed)?.classes.remove(0))
}
