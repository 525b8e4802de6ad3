//! Bitset graphs with exact maximum-clique and minimum-cover search.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    bits: Vec<u64>,
}

impl Bitset {
    pub fn new(len: usize) -> Bitset {
        Bitset {
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Bitset {
        let mut b = Bitset::new(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &Bitset) -> Bitset {
        Bitset {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn and_not(&self, other: &Bitset) -> Bitset {
        Bitset {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn first(&self) -> Option<usize> {
        self.bits
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }
}

/// Undirected simple graph stored as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct BitGraph {
    rows: Vec<Bitset>,
}

impl BitGraph {
    pub fn from_rows(rows: Vec<Bitset>) -> BitGraph {
        BitGraph { rows }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    fn greedy_clique(&self) -> Vec<usize> {
        let mut cand = Bitset::full(self.order());
        let mut clique = Vec::new();
        while let Some(v) = cand.first() {
            clique.push(v);
            cand = cand.and(&self.rows[v]);
        }
        clique
    }

    /// Greedy sequential colouring of `p`; returns vertices sorted by colour
    /// together with their colour numbers (1-based, nondecreasing).
    fn colour(&self, p: &Bitset) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = p.clone();
        let mut order = Vec::with_capacity(p.len());
        let mut colours = Vec::with_capacity(p.len());
        let mut k = 0;
        while !uncoloured.is_empty() {
            k += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                uncoloured.remove(v);
                q = q.and_not(&self.rows[v]);
                order.push(v);
                colours.push(k);
            }
        }
        (order, colours)
    }

    /// Exact maximum clique (Tomita–Seki colouring bound) with a node budget.
    pub fn max_clique(&self, node_budget: u64) -> Result<Vec<usize>> {
        let mut best = self.greedy_clique();
        let mut r = Vec::new();
        let mut nodes = 0u64;
        self.expand(
            &mut r,
            Bitset::full(self.order()),
            &mut best,
            &mut nodes,
            node_budget,
        )?;
        best.sort_unstable();
        Ok(best)
    }

    fn expand(
        &self,
        r: &mut Vec<usize>,
        mut p: Bitset,
        best: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::Budget(format!("clique search exceeded {budget} nodes")));
        }
        let (order, colours) = self.colour(&p);
        for i in (0..order.len()).rev() {
            if r.len() + colours[i] <= best.len() {
                return Ok(());
            }
            let v = order[i];
            r.push(v);
            let np = p.and(&self.rows[v]);
            if np.is_empty() {
                if r.len() > best.len() {
                    *best = r.clone();
                }
            } else {
                self.expand(r, np, best, nodes, budget)?;
            }
            r.pop();
            p.remove(v);
        }
        Ok(())
    }
}

/// Minimum number of `sets` whose union is the whole universe of size `n`.
///
/// Branch and bound: branch on the uncovered element with fewest covering
/// sets, prune with a packing lower bound (elements no two of which share a
/// covering set need distinct sets).
pub fn min_cover(n: usize, sets: &[Bitset], node_budget: u64) -> Result<usize> {
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for e in s.iter() {
            covering[e].push(i);
        }
    }
    if covering.iter().any(Vec::is_empty) {
        return Err(Error::Infeasible("an element lies in no set".into()));
    }
    // Elements that share a covering set with e (including e).
    let conflict: Vec<Bitset> = (0..n)
        .map(|e| {
            let mut b = Bitset::new(n);
            for &s in &covering[e] {
                for x in sets[s].iter() {
                    b.insert(x);
                }
            }
            b
        })
        .collect();

    let greedy = {
        let mut u = Bitset::full(n);
        let mut count = 0;
        while !u.is_empty() {
            let s = (0..sets.len())
                .max_by_key(|&s| (sets[s].and(&u).len(), usize::MAX - s))
                .unwrap();
            u = u.and_not(&sets[s]);
            count += 1;
        }
        count
    };

    struct Search<'a> {
        sets: &'a [Bitset],
        covering: &'a [Vec<usize>],
        conflict: &'a [Bitset],
        best: usize,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn packing(&self, u: &Bitset) -> usize {
            let mut rest = u.clone();
            let mut k = 0;
            while let Some(e) = rest.first() {
                rest = rest.and_not(&self.conflict[e]);
                k += 1;
            }
            k
        }
        fn go(&mut self, u: Bitset, chosen: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Budget("cover search exceeded its node budget".into()));
            }
            if u.is_empty() {
                self.best = self.best.min(chosen);
                return Ok(());
            }
            if chosen + self.packing(&u) >= self.best {
                return Ok(());
            }
            let e = u.iter().min_by_key(|&e| self.covering[e].len()).unwrap();
            let covering = self.covering;
            for &s in &covering[e] {
                let next = u.and_not(&self.sets[s]);
                self.go(next, chosen + 1)?;
            }
            Ok(())
        }
    }
    let mut search = Search {
        sets,
        covering: &covering,
        conflict: &conflict,
        best: greedy,
        nodes: 0,
        budget: node_budget,
    };
    search.go(Bitset::full(n), 0)?;
    Ok(search.best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> BitGraph {
        let mut rows = vec![Bitset::new(n); n];
        for &(u, v) in edges {
            rows[u].insert(v);
            rows[v].insert(u);
        }
        BitGraph::from_rows(rows)
    }

    fn brute_clique(g: &BitGraph) -> usize {
        let n = g.order();
        (0u32..1 << n)
            .filter(|&mask| {
                (0..n).all(|u| {
                    (0..n).all(|v| u == v || mask >> u & 1 == 0 || mask >> v & 1 == 0 || g.adjacent(u, v))
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn bitset_iteration() {
        let mut b = Bitset::new(130);
        for i in [0, 63, 64, 129] {
            b.insert(i);
        }
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(b.len(), 4);
        assert_eq!(b.first(), Some(0));
    }

    #[test]
    fn clique_on_small_graphs_matches_brute_force() {
        // 5-cycle plus a chord forming one triangle.
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        assert_eq!(g.max_clique(1000).unwrap().len(), brute_clique(&g));
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(g.max_clique(1000).unwrap().len(), 3);
        assert_eq!(k4.max_clique(1000).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn greedy_colouring_trap_is_solved_exactly() {
        // Vertex 0 is adjacent to everything but sits in no large clique.
        let mut edges = vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)];
        edges.extend([(2, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5)]);
        let g = graph(6, &edges);
        assert_eq!(g.max_clique(1000).unwrap().len(), brute_clique(&g));
    }

    #[test]
    fn cover_of_a_partition_uses_one_set_per_block() {
        let n = 6;
        let blocks = [[0, 1], [2, 3], [4, 5]];
        let sets: Vec<Bitset> = (0..n)
            .map(|e| {
                let mut b = Bitset::new(n);
                for x in blocks[e / 2] {
                    b.insert(x);
                }
                b
            })
            .collect();
        assert_eq!(min_cover(n, &sets, 1000).unwrap(), 3);
    }

    #[test]
    fn cover_beats_greedy_on_the_classic_trap() {
        // Universe 0..6, greedy picks the big middle set first and needs 3.
        let mk = |xs: &[usize]| {
            let mut b = Bitset::new(6);
            for &x in xs {
                b.insert(x);
            }
            b
        };
        let sets = vec![mk(&[0, 1, 2]), mk(&[3, 4, 5]), mk(&[1, 2, 3, 4])];
        assert_eq!(min_cover(6, &sets, 1000).unwrap(), 2);
    }
}
