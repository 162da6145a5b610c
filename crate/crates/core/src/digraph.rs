//! Compressed adjacency storage and the graph passes the dynamics layer is
//! built on: reachability, recurrence (via strongly connected components)
//! and invariant parts.

use alloc::vec;
use alloc::vec::Vec;

/// Time direction of a graph: forward graphs carry exit flags, their
/// transposes carry the same flags reinterpreted as entry flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Directed graph on nodes `0..n` with sorted, duplicate-free successor
/// lists and a boundary flag per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Digraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    flags: Vec<bool>,
    direction: Direction,
}

impl Digraph {
    /// Builds a forward graph. Successor lists are sorted and deduplicated.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>, flags: Vec<bool>) -> Digraph {
        assert_eq!(adjacency.len(), flags.len(), "one flag per node");
        let n = adjacency.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for succ in &mut adjacency {
            succ.sort_unstable();
            succ.dedup();
            assert!(succ.last().is_none_or(|&t| t < n), "edge target out of range");
            targets.extend_from_slice(succ);
            offsets.push(targets.len());
        }
        Digraph {
            offsets,
            targets,
            flags,
            direction: Direction::Forward,
        }
    }

    pub fn node_count(&self) -> usize {
        self.flags.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.successors(a).binary_search(&b).is_ok()
    }

    /// Exit flags for forward graphs, entry flags for transposed ones.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |v| self.successors(v).iter().map(move |&w| (v, w)))
    }

    /// Reverses every edge; applying it twice returns the original graph.
    pub fn transpose(&self) -> Digraph {
        let n = self.node_count();
        let mut counts = vec![0usize; n + 1];
        for &t in &self.targets {
            counts[t + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0usize; self.targets.len()];
        // sources are visited in increasing order, so each list ends up sorted
        for v in 0..n {
            for &w in self.successors(v) {
                targets[fill[w]] = v;
                fill[w] += 1;
            }
        }
        Digraph {
            offsets,
            targets,
            flags: self.flags.clone(),
            direction: self.direction.flip(),
        }
    }

    /// Subgraph keeping only edges with both ends in `mask`; nodes keep
    /// their ids.
    pub fn induced(&self, mask: &[bool]) -> Digraph {
        let n = self.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for v in 0..n {
            if mask[v] {
                targets.extend(self.successors(v).iter().copied().filter(|&w| mask[w]));
            }
            offsets.push(targets.len());
        }
        Digraph {
            offsets,
            targets,
            flags: self.flags.clone(),
            direction: self.direction,
        }
    }

    /// Nodes reachable from `sources` by paths of length >= 0 that stay in
    /// `within`. Sources outside `within` are ignored.
    pub fn reach(&self, sources: impl IntoIterator<Item = usize>, within: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack: Vec<usize> = Vec::new();
        for s in sources {
            if within[s] && !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.successors(v) {
                if within[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// One-step image of `set`: all successors of its nodes.
    pub fn image(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.node_count()];
        for (v, _) in set.iter().enumerate().filter(|(_, &m)| m) {
            for &w in self.successors(v) {
                out[w] = true;
            }
        }
        out
    }

    /// Nodes of `within` lying on a cycle of the subgraph induced by
    /// `within` (self-loops included).
    pub fn recurrent(&self, within: &[bool]) -> Vec<bool> {
        let n = self.node_count();
        let mut rec = vec![false; n];
        for comp in self.sccs(within) {
            if comp.len() > 1 {
                for v in comp {
                    rec[v] = true;
                }
            } else {
                let v = comp[0];
                if self.successors(v).binary_search(&v).is_ok() {
                    rec[v] = true;
                }
            }
        }
        rec
    }

    /// Strongly connected components of the subgraph induced by `within`
    /// (iterative Tarjan).
    pub fn sccs(&self, within: &[bool]) -> Vec<Vec<usize>> {
        const UNSEEN: usize = usize::MAX;
        let n = self.node_count();
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut call: Vec<(usize, usize)> = Vec::new();
        let mut comps = Vec::new();
        let mut next = 0usize;
        for root in 0..n {
            if !within[root] || index[root] != UNSEEN {
                continue;
            }
            call.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(top) = call.last_mut() {
                let v = top.0;
                let succ = self.successors(v);
                if top.1 < succ.len() {
                    let w = succ[top.1];
                    top.1 += 1;
                    if !within[w] {
                        continue;
                    }
                    if index[w] == UNSEEN {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// Nodes of `within` on some bi-infinite path inside `within`: those
    /// reachable from, and reaching, a recurrent node of the induced
    /// subgraph.
    pub fn invariant_part(&self, within: &[bool]) -> Vec<bool> {
        let rec = self.recurrent(within);
        let sources = || rec.iter().enumerate().filter(|(_, &r)| r).map(|(i, _)| i);
        let fwd = self.reach(sources(), within);
        let bwd = self.transpose().reach(sources(), within);
        fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(adj: Vec<Vec<usize>>) -> Digraph {
        let n = adj.len();
        Digraph::from_adjacency(adj, vec![false; n])
    }

    #[test]
    fn transpose_involution() {
        let a = g(vec![vec![1, 2], vec![2], vec![0], vec![]]);
        let t = a.transpose();
        assert_eq!(t.successors(2), &[0, 1]);
        assert_eq!(t.direction(), Direction::Backward);
        assert_eq!(t.transpose(), a);
        assert_eq!(t.edge_count(), a.edge_count());
    }

    #[test]
    fn sccs_and_recurrence() {
        // 0 -> 1 -> 2 -> 0 cycle, 3 self-loop, 4 transient
        let a = g(vec![vec![1], vec![2], vec![0, 4], vec![3], vec![3]]);
        let all = vec![true; 5];
        assert_eq!(a.recurrent(&all), vec![true, true, true, true, false]);
        let mut sizes: Vec<usize> = a.sccs(&all).iter().map(|c| c.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 3]);
        // breaking the cycle by excluding node 1
        let mask = vec![true, false, true, true, true];
        assert_eq!(a.recurrent(&mask), vec![false, false, false, true, false]);
    }

    #[test]
    fn invariant_part_keeps_connecting_orbits() {
        let a = g(vec![vec![0, 1], vec![2], vec![2], vec![1]]);
        let inv = a.invariant_part(&[true; 4]);
        assert_eq!(inv, vec![true, true, true, false]);
    }

    #[test]
    fn reach_respects_mask() {
        let a = g(vec![vec![1], vec![2], vec![]]);
        assert_eq!(a.reach([0], &[true, true, false]), vec![true, true, false]);
        assert_eq!(a.reach([2], &[true, true, false]), vec![false; 3]);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        let a = g(adj);
        assert_eq!(a.sccs(&vec![true; n]).len(), 1);
    }
}
