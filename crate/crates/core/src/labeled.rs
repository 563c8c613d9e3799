//! Directed graphs labeled by the free generators `a`, `b`.
//!
//! Only positively labeled edges are stored; traversing an edge against
//! its direction reads the inverse letter.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exact2::{FreeWord, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    /// Always `Letter::A` or `Letter::B`.
    pub letter: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: Vec<u32>,
    edges: Vec<Edge>,
    base: u32,
}

/// One step of a path: an edge index and the direction it is crossed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Traversal {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphPath {
    pub start: u32,
    pub steps: Vec<Traversal>,
}

impl LabeledGraph {
    pub fn new(vertices: Vec<u32>, edges: Vec<Edge>, base: u32) -> Result<Self> {
        let known: BTreeSet<u32> = vertices.iter().copied().collect();
        if known.len() != vertices.len() {
            return Err(Error::Graph("duplicate vertex id".into()));
        }
        if !known.contains(&base) {
            return Err(Error::Graph(format!("base vertex {base} is not a vertex")));
        }
        for e in &edges {
            if e.letter.is_inverse() {
                return Err(Error::Graph(format!(
                    "edge {} -> {} carries inverse letter {}",
                    e.src, e.dst, e.letter
                )));
            }
            for v in [e.src, e.dst] {
                if !known.contains(&v) {
                    return Err(Error::Graph(format!("edge endpoint {v} is not a vertex")));
                }
            }
        }
        Ok(LabeledGraph {
            vertices,
            edges,
            base,
        })
    }

    /// The one-vertex graph with an `a`-loop and a `b`-loop.
    pub fn bouquet() -> Self {
        LabeledGraph {
            vertices: vec![0],
            edges: vec![
                Edge {
                    src: 0,
                    dst: 0,
                    letter: Letter::A,
                },
                Edge {
                    src: 0,
                    dst: 0,
                    letter: Letter::B,
                },
            ],
            base: 0,
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Per vertex and letter: (outgoing, incoming) counts.
    fn letter_degrees(&self) -> BTreeMap<(u32, Letter), (usize, usize)> {
        let mut deg: BTreeMap<(u32, Letter), (usize, usize)> = self
            .vertices
            .iter()
            .flat_map(|&v| [((v, Letter::A), (0, 0)), ((v, Letter::B), (0, 0))])
            .collect();
        for e in &self.edges {
            deg.get_mut(&(e.src, e.letter)).expect("validated").0 += 1;
            deg.get_mut(&(e.dst, e.letter)).expect("validated").1 += 1;
        }
        deg
    }

    /// Locally injective labeling: at most one in- and one out-edge per letter at each vertex.
    pub fn is_stallings(&self) -> bool {
        self.letter_degrees()
            .values()
            .all(|&(o, i)| o <= 1 && i <= 1)
    }

    /// Exactly one in- and one out-edge per letter at each vertex.
    pub fn is_cover(&self) -> bool {
        self.letter_degrees()
            .values()
            .all(|&(o, i)| o == 1 && i == 1)
    }

    /// Incident traversals out of each vertex, sorted by (letter read, neighbour, edge).
    fn adjacency(&self) -> BTreeMap<u32, Vec<(Letter, u32, Traversal)>> {
        let mut adj: BTreeMap<u32, Vec<(Letter, u32, Traversal)>> =
            self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for (i, e) in self.edges.iter().enumerate() {
            adj.get_mut(&e.src).expect("validated").push((
                e.letter,
                e.dst,
                Traversal {
                    edge: i,
                    forward: true,
                },
            ));
            adj.get_mut(&e.dst).expect("validated").push((
                e.letter.inverse(),
                e.src,
                Traversal {
                    edge: i,
                    forward: false,
                },
            ));
        }
        for list in adj.values_mut() {
            list.sort_by_key(|&(l, v, t)| (l, v, t.edge, !t.forward));
        }
        adj
    }

    /// Breadth-first tree from the base; returns, for each reached vertex,
    /// the traversal used to enter it.
    fn bfs_parents(&self) -> Result<BTreeMap<u32, Option<Traversal>>> {
        let adj = self.adjacency();
        let mut parent: BTreeMap<u32, Option<Traversal>> = BTreeMap::new();
        parent.insert(self.base, None);
        let mut queue = VecDeque::from([self.base]);
        while let Some(u) = queue.pop_front() {
            for &(_, v, t) in &adj[&u] {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(v) {
                    e.insert(Some(t));
                    queue.push_back(v);
                }
            }
        }
        if let Some(&v) = self.vertices.iter().find(|v| !parent.contains_key(v)) {
            return Err(Error::Disconnected(v));
        }
        Ok(parent)
    }

    /// Spanning tree as sorted edge indices; breadth-first from the base.
    pub fn spanning_tree(&self) -> Result<Vec<usize>> {
        let parent = self.bfs_parents()?;
        let mut tree: Vec<usize> = parent.values().flatten().map(|t| t.edge).collect();
        tree.sort_unstable();
        Ok(tree)
    }

    fn endpoint_after(&self, t: Traversal) -> u32 {
        let e = self.edges[t.edge];
        if t.forward {
            e.dst
        } else {
            e.src
        }
    }

    fn endpoint_before(&self, t: Traversal) -> u32 {
        let e = self.edges[t.edge];
        if t.forward {
            e.src
        } else {
            e.dst
        }
    }

    /// One cycle per non-tree edge: base to `u` in the tree, across the
    /// edge in its positive direction, then back to the base in the tree.
    pub fn cycle_basis(&self, tree: &[usize]) -> Result<Vec<GraphPath>> {
        let in_tree: BTreeSet<usize> = tree.iter().copied().collect();
        if in_tree.len() + 1 != self.vertices.len()
            || in_tree.iter().any(|&e| e >= self.edges.len())
        {
            return Err(Error::Graph("edge set is not a spanning tree".into()));
        }
        // Tree parent pointers by walking the tree from the base.
        let mut adj: BTreeMap<u32, Vec<Traversal>> = BTreeMap::new();
        for &i in &in_tree {
            let e = self.edges[i];
            adj.entry(e.src).or_default().push(Traversal {
                edge: i,
                forward: true,
            });
            adj.entry(e.dst).or_default().push(Traversal {
                edge: i,
                forward: false,
            });
        }
        let mut parent: BTreeMap<u32, Option<Traversal>> = BTreeMap::new();
        parent.insert(self.base, None);
        let mut queue = VecDeque::from([self.base]);
        while let Some(u) = queue.pop_front() {
            for &t in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                let v = self.endpoint_after(t);
                if parent.contains_key(&v) {
                    if parent[&u].map(|pt| pt.edge) != Some(t.edge) {
                        return Err(Error::Graph("edge set contains a cycle".into()));
                    }
                    continue;
                }
                parent.insert(v, Some(t));
                queue.push_back(v);
            }
        }
        if parent.len() != self.vertices.len() {
            return Err(Error::Graph("edge set does not span the graph".into()));
        }

        let path_from_base = |mut v: u32| {
            let mut steps = Vec::new();
            while let Some(t) = parent[&v] {
                steps.push(t);
                v = self.endpoint_before(t);
            }
            steps.reverse();
            steps
        };

        let mut cycles = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if in_tree.contains(&i) {
                continue;
            }
            let mut steps = path_from_base(e.src);
            steps.push(Traversal {
                edge: i,
                forward: true,
            });
            let back = path_from_base(e.dst);
            steps.extend(back.iter().rev().map(|t| Traversal {
                edge: t.edge,
                forward: !t.forward,
            }));
            cycles.push(GraphPath {
                start: self.base,
                steps,
            });
        }
        Ok(cycles)
    }

    /// Reduced word read along a path.
    pub fn path_label(&self, path: &GraphPath) -> Result<FreeWord> {
        let mut at = path.start;
        let mut letters = Vec::with_capacity(path.steps.len());
        for (step, &t) in path.steps.iter().enumerate() {
            let e = self.edges.get(t.edge).ok_or(Error::BadPath { step })?;
            if self.endpoint_before(t) != at {
                return Err(Error::BadPath { step });
            }
            letters.push(if t.forward {
                e.letter
            } else {
                e.letter.inverse()
            });
            at = self.endpoint_after(t);
        }
        Ok(FreeWord::reduce(letters))
    }

    /// Labels of the cycle basis over the breadth-first spanning tree.
    pub fn pi1_basis(&self) -> Result<Vec<FreeWord>> {
        let tree = self.spanning_tree()?;
        self.cycle_basis(&tree)?
            .iter()
            .map(|c| self.path_label(c))
            .collect()
    }

    /// Text form: `base <id>` then one `src dst letter` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("base {}\n", self.base);
        let touched: BTreeSet<u32> = self.edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        for v in &self.vertices {
            if *v != self.base && !touched.contains(v) {
                writeln!(out, "vertex {v}").unwrap();
            }
        }
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.src, e.dst, e.letter).unwrap();
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are skipped;
    /// `vertex <id>` declares an isolated vertex.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut base = None;
        let mut vertices = BTreeSet::new();
        let mut order = Vec::new();
        let mut edges = Vec::new();
        let mut note = |v: u32, order: &mut Vec<u32>| {
            if vertices.insert(v) {
                order.push(v);
            }
        };
        let bad = |n: usize, msg: &str| Error::Graph(format!("line {}: {msg}", n + 1));
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let id = |s: &str| s.parse::<u32>().map_err(|_| bad(n, "bad vertex id"));
            match parts.as_slice() {
                ["base", v] => {
                    if base.is_some() {
                        return Err(bad(n, "duplicate base line"));
                    }
                    let v = id(v)?;
                    base = Some(v);
                    note(v, &mut order);
                }
                ["vertex", v] => note(id(v)?, &mut order),
                [s, d, l] => {
                    let (s, d) = (id(s)?, id(d)?);
                    let letter = match *l {
                        "a" => Letter::A,
                        "b" => Letter::B,
                        _ => return Err(bad(n, "edge letter must be a or b")),
                    };
                    note(s, &mut order);
                    note(d, &mut order);
                    edges.push(Edge {
                        src: s,
                        dst: d,
                        letter,
                    });
                }
                _ => return Err(bad(n, "unrecognized line")),
            }
        }
        let base = base.ok_or_else(|| Error::Graph("missing base line".into()))?;
        LabeledGraph::new(order, edges, base)
    }
}
