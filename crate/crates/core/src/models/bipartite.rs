//! Maximum-cardinality bipartite matching (Hopcroft–Karp, `O(E √V)`).

use std::collections::VecDeque;

use crate::error::{Error, Result};

const UNMATCHED: usize = usize::MAX;
const INF: u32 = u32::MAX;

/// Size of a maximum matching between `left_count` left and `right_count`
/// right vertices.
pub fn hopcroft_karp(
    left_count: usize,
    right_count: usize,
    edges: &[(usize, usize)],
) -> Result<usize> {
    if let Some(&(l, r)) = edges
        .iter()
        .find(|&&(l, r)| l >= left_count || r >= right_count)
    {
        return Err(Error::InvalidArgument(format!(
            "edge ({l}, {r}) outside a {left_count}×{right_count} bipartite graph"
        )));
    }
    Ok(HopcroftKarp::default().max_matching(left_count, right_count, edges))
}

/// Reusable buffers, so repeated solves on small graphs do not allocate.
#[derive(Debug, Default, Clone)]
pub struct HopcroftKarp {
    offsets: Vec<usize>,
    adj: Vec<usize>,
    match_left: Vec<usize>,
    match_right: Vec<usize>,
    dist: Vec<u32>,
    cursor: Vec<usize>,
    queue: VecDeque<usize>,
    stack: Vec<usize>,
}

impl HopcroftKarp {
    /// Endpoints must be in range; this is checked only in debug builds.
    pub fn max_matching(&mut self, left: usize, right: usize, edges: &[(usize, usize)]) -> usize {
        if left == 0 || right == 0 || edges.is_empty() {
            return 0;
        }
        self.build_csr(left, edges);
        self.match_left.clear();
        self.match_left.resize(left, UNMATCHED);
        self.match_right.clear();
        self.match_right.resize(right, UNMATCHED);
        self.dist.clear();
        self.dist.resize(left, INF);
        self.cursor.clear();
        self.cursor.resize(left, 0);

        let mut size = 0;
        while self.bfs() {
            for u in 0..left {
                self.cursor[u] = self.offsets[u];
            }
            for u in 0..left {
                if self.match_left[u] == UNMATCHED && self.dfs(u) {
                    size += 1;
                }
            }
        }
        size
    }

    fn build_csr(&mut self, left: usize, edges: &[(usize, usize)]) {
        self.offsets.clear();
        self.offsets.resize(left + 1, 0);
        for &(l, _) in edges {
            debug_assert!(l < left);
            self.offsets[l + 1] += 1;
        }
        for i in 0..left {
            self.offsets[i + 1] += self.offsets[i];
        }
        self.adj.clear();
        self.adj.resize(edges.len(), 0);
        let mut fill = self.offsets[..left].to_vec();
        for &(l, r) in edges {
            self.adj[fill[l]] = r;
            fill[l] += 1;
        }
    }

    /// Layers free left vertices at distance 0; true if some free right
    /// vertex is reachable.
    fn bfs(&mut self) -> bool {
        self.queue.clear();
        for (u, d) in self.dist.iter_mut().enumerate() {
            if self.match_left[u] == UNMATCHED {
                *d = 0;
                self.queue.push_back(u);
            } else {
                *d = INF;
            }
        }
        let mut found = false;
        while let Some(u) = self.queue.pop_front() {
            for &v in &self.adj[self.offsets[u]..self.offsets[u + 1]] {
                let w = self.match_right[v];
                if w == UNMATCHED {
                    found = true;
                } else if self.dist[w] == INF {
                    self.dist[w] = self.dist[u] + 1;
                    self.queue.push_back(w);
                }
            }
        }
        found
    }

    /// Iterative augmenting-path search along the BFS layering.
    fn dfs(&mut self, root: usize) -> bool {
        self.stack.clear();
        self.stack.push(root);
        while let Some(&u) = self.stack.last() {
            if self.cursor[u] == self.offsets[u + 1] {
                self.dist[u] = INF;
                self.stack.pop();
                continue;
            }
            let v = self.adj[self.cursor[u]];
            let w = self.match_right[v];
            if w == UNMATCHED {
                // Flip the path recorded on the stack.
                for &x in self.stack.iter().rev() {
                    let y = self.adj[self.cursor[x]];
                    self.match_left[x] = y;
                    self.match_right[y] = x;
                }
                return true;
            }
            if self.dist[w] == self.dist[u] + 1 {
                self.stack.push(w);
            } else {
                self.cursor[u] += 1;
            }
        }
        false
    }
}
