use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A tree on vertices `0..n`. Edges are stored as sorted pairs in sorted order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeFile", into = "TreeFile")]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    root: usize,
    neighbors: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    height: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    n: usize,
    edges: Vec<[usize; 2]>,
    root: usize,
}

impl TryFrom<TreeFile> for Tree {
    type Error = Error;

    fn try_from(f: TreeFile) -> Result<Self> {
        Tree::new(f.n, f.edges.into_iter().map(|[u, v]| (u, v)).collect(), f.root)
    }
}

impl From<Tree> for TreeFile {
    fn from(t: Tree) -> Self {
        TreeFile {
            n: t.n,
            edges: t.edges.iter().map(|&(u, v)| [u, v]).collect(),
            root: t.root,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Tree {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, root: usize) -> Result<Self> {
        if n == 0 {
            return Err(bad("a tree needs at least one vertex"));
        }
        if root >= n {
            return Err(bad(format!("root {root} is not a vertex of a {n}-vertex tree")));
        }
        if edges.len() != n - 1 {
            return Err(bad(format!("a tree on {n} vertices has {} edges, got {}", n - 1, edges.len())));
        }
        let mut sorted: Vec<(usize, usize)> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        sorted.sort_unstable();
        let mut neighbors = vec![Vec::new(); n];
        for (i, &(u, v)) in sorted.iter().enumerate() {
            if v >= n {
                return Err(bad(format!("edge ({u},{v}) mentions a vertex outside 0..{n}")));
            }
            if u == v {
                return Err(bad(format!("self-loop at vertex {u}")));
            }
            if i > 0 && sorted[i - 1] == (u, v) {
                return Err(bad(format!("edge ({u},{v}) appears twice")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in neighbors.iter_mut() {
            list.sort_unstable();
        }

        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        if order.len() != n {
            return Err(bad("edges do not connect every vertex"));
        }
        let mut height = vec![0; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                height[p] = height[p].max(height[v] + 1);
            }
        }
        Ok(Tree {
            n,
            edges: sorted,
            root,
            neighbors,
            parent,
            height,
        })
    }

    /// `0 – 1 – ⋯ – (n-1)`, rooted at 0.
    pub fn path(n: usize) -> Result<Self> {
        Tree::new(n, (1..n).map(|v| (v - 1, v)).collect(), 0)
    }

    /// Vertex 0 joined to every other vertex, rooted at 0.
    pub fn star(n: usize) -> Result<Self> {
        Tree::new(n, (1..n).map(|v| (0, v)).collect(), 0)
    }

    /// A spine `0 – ⋯ – (s-1)` with `s = ⌈n/2⌉` and the remaining vertices
    /// hung off spine vertices `1, 2, …` in turn.
    pub fn caterpillar(n: usize) -> Result<Self> {
        if n <= 3 {
            return Tree::path(n);
        }
        let spine = n.div_ceil(2).max(1);
        let mut edges: Vec<(usize, usize)> = (1..spine).map(|v| (v - 1, v)).collect();
        for (i, leg) in (spine..n).enumerate() {
            edges.push((1 + i % (spine - 1), leg));
        }
        Tree::new(n, edges, 0)
    }

    /// Random recursive tree: vertex `v` attaches to a uniform earlier vertex.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let edges = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
        Tree::new(n, edges, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Longest distance from `v` down to a leaf of its subtree.
    pub fn height(&self, v: usize) -> usize {
        self.height[v]
    }

    /// `v` and all its descendants, sorted.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            out.extend(self.neighbors[x].iter().copied().filter(|&w| self.parent[x] != Some(w)));
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Normalises `(u, v)` to a stored edge.
    pub fn find_edge(&self, e: (usize, usize)) -> Result<(usize, usize)> {
        let key = (e.0.min(e.1), e.0.max(e.1));
        self.edges
            .binary_search(&key)
            .map(|_| key)
            .map_err(|_| bad(format!("({},{}) is not an edge of the tree", e.0, e.1)))
    }

    /// `(child, parent)` orientation of an edge with respect to the root.
    pub fn orient(&self, e: (usize, usize)) -> Result<(usize, usize)> {
        let (a, b) = self.find_edge(e)?;
        Ok(if self.parent[a] == Some(b) { (a, b) } else { (b, a) })
    }
}

/// Components after deleting `e`, the one holding the smaller endpoint first.
pub fn edge_bipartition(tree: &Tree, e: (usize, usize)) -> Result<(Vec<usize>, Vec<usize>)> {
    let (a, _) = tree.find_edge(e)?;
    let (child, _) = tree.orient(e)?;
    let below = tree.subtree(child);
    let mut inside = vec![false; tree.n()];
    for &v in &below {
        inside[v] = true;
    }
    let rest: Vec<usize> = (0..tree.n()).filter(|&v| !inside[v]).collect();
    Ok(if inside[a] { (below, rest) } else { (rest, below) })
}
