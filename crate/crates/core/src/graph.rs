//! Finite simple connected graphs with a deterministic neighbor order, the
//! directed-edge basis of l2(D), cycle-parity queries, and functional-graph
//! decompositions of successor maps.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqwError};

/// Finite simple connected graph. Vertices are dense 0-based integers; the
/// per-vertex neighbor order is fixed at construction and drives every matrix
/// index downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Build from an edge list with `vertex_count` vertices; neighbor order is
    /// ascending vertex id.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        Graph::new(vertex_count, edges, None, None)
    }

    /// Build from an edge list alone, inferring the vertex count.
    pub fn from_edge_list(edges: &[(usize, usize)]) -> Result<Graph> {
        let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Graph::from_edges(n, edges)
    }

    pub fn new(
        vertex_count: usize,
        edges: &[(usize, usize)],
        neighbor_order: Option<Vec<Vec<usize>>>,
        labels: Option<Vec<String>>,
    ) -> Result<Graph> {
        if vertex_count < 2 {
            return Err(SqwError::TooFewVertices(vertex_count));
        }
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); vertex_count];
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        for &(a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(SqwError::VertexOutOfRange(a.max(b), vertex_count));
            }
            if a == b {
                return Err(SqwError::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, ()).is_some() {
                return Err(SqwError::DuplicateEdge(key.0, key.1));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        if let Some(order) = neighbor_order {
            if order.len() != vertex_count {
                return Err(SqwError::InvalidInput(
                    "neighbor_order must list every vertex".into(),
                ));
            }
            for (x, ord) in order.iter().enumerate() {
                let mut sorted = ord.clone();
                sorted.sort_unstable();
                if sorted != adjacency[x] {
                    return Err(SqwError::InvalidNeighborOrder(x));
                }
                adjacency[x] = ord.clone();
            }
        }
        if let Some(ref l) = labels {
            if l.len() != vertex_count {
                return Err(SqwError::InvalidInput("labels must cover every vertex".into()));
            }
        }
        let g = Graph { adjacency, labels };
        if !g.is_connected() {
            return Err(SqwError::DisconnectedGraph);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn degree_sum(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn is_adjacent(&self, x: usize, y: usize) -> bool {
        self.adjacency[x].contains(&y)
    }

    /// Position of `y` in the neighbor order at `x`.
    pub fn neighbor_slot(&self, x: usize, y: usize) -> Option<usize> {
        self.adjacency[x].iter().position(|&z| z == y)
    }

    pub fn label_of(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// True iff the graph is non-bipartite (contains an odd cycle).
    pub fn has_odd_cycle(&self) -> bool {
        let n = self.vertex_count();
        let mut color = vec![u8::MAX; n];
        color[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return true;
                }
            }
        }
        false
    }

    /// Adjacency lists of the complement graph, ascending order.
    pub fn complement_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        (0..n)
            .map(|x| (0..n).filter(|&y| y != x && !self.is_adjacent(x, y)).collect())
            .collect()
    }

    /// Path graph on n vertices; `path(3)` is the T3 fixture.
    pub fn path(n: usize) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        Graph::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Graph> {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Graph::from_edges(n, &edges)
    }

    /// Star with `branches` leaves; vertex 0 is the center.
    pub fn star(branches: usize) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = (1..=branches).map(|j| (0, j)).collect();
        Graph::from_edges(branches + 1, &edges)
    }

    /// Periodic d-dimensional lattice torus. Every side must be at least 3 so
    /// the graph stays simple; all degrees are 2d. Neighbor order at x is
    /// [x - e_1, ..., x - e_d, x + e_1, ..., x + e_d].
    pub fn torus(dims: &[usize]) -> Result<Graph> {
        if dims.is_empty() {
            return Err(SqwError::NotTorus("no dimensions given".into()));
        }
        if dims.iter().any(|&l| l < 3) {
            return Err(SqwError::NotTorus(format!(
                "every side must be at least 3, got {dims:?}"
            )));
        }
        let n: usize = dims.iter().product();
        let d = dims.len();
        let index = |coords: &[usize]| -> usize {
            let mut idx = 0;
            for (k, &c) in coords.iter().enumerate() {
                idx = idx * dims[k] + c;
            }
            idx
        };
        let coords_of = |mut idx: usize| -> Vec<usize> {
            let mut c = vec![0; d];
            for k in (0..d).rev() {
                c[k] = idx % dims[k];
                idx /= dims[k];
            }
            c
        };
        let mut edges = Vec::new();
        let mut order: Vec<Vec<usize>> = Vec::with_capacity(n);
        for v in 0..n {
            let c = coords_of(v);
            let mut ord = Vec::with_capacity(2 * d);
            for k in 0..d {
                let mut cm = c.clone();
                cm[k] = (cm[k] + dims[k] - 1) % dims[k];
                ord.push(index(&cm));
            }
            for k in 0..d {
                let mut cp = c.clone();
                cp[k] = (cp[k] + 1) % dims[k];
                ord.push(index(&cp));
            }
            for &w in &ord {
                if v < w {
                    edges.push((v, w));
                }
            }
            order.push(ord);
        }
        Graph::new(n, &edges, Some(order), None)
    }

    /// Random connected graph: a random spanning tree plus extra random edges.
    pub fn random_connected(n: usize, extra_edges: usize, rng: &mut impl Rng) -> Result<Graph> {
        assert!(n >= 2);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for v in 1..n {
            let parent = rng.random_range(0..v);
            edges.push((parent, v));
        }
        let mut attempts = 0;
        let mut added = 0;
        while added < extra_edges && attempts < 50 * (extra_edges + 1) {
            attempts += 1;
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == key) {
                continue;
            }
            edges.push(key);
            added += 1;
        }
        Graph::from_edges(n, &edges)
    }

    pub fn to_json(&self) -> String {
        let dto = GraphJson {
            vertices: (0..self.vertex_count()).map(|x| self.label_of(x)).collect(),
            edges: {
                let mut e = Vec::new();
                for x in 0..self.vertex_count() {
                    for &y in self.neighbors(x) {
                        if x < y {
                            e.push((x, y));
                        }
                    }
                }
                e
            },
            neighbor_order: Some(self.adjacency.clone()),
        };
        serde_json::to_string_pretty(&dto).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let dto: GraphJson = serde_json::from_str(text)
            .map_err(|e| SqwError::InvalidInput(format!("graph JSON: {e}")))?;
        Graph::new(
            dto.vertices.len(),
            &dto.edges,
            dto.neighbor_order,
            Some(dto.vertices),
        )
    }
}

/// Wire format for graphs.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor_order: Option<Vec<Vec<usize>>>,
}

/// Bijective index over all directed edges of a graph. A directed edge is a
/// pair (target, source): (y, x) is the edge from x to y, matching |yx>.
/// The in-block of x (pairs (x, y)) is contiguous and ordered by the neighbor
/// order at x, which is the row/column convention for S(x).
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    directed_edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    in_offsets: Vec<usize>,
    out_blocks: Vec<Vec<usize>>,
}

impl EdgeBasis {
    pub fn new(g: &Graph) -> EdgeBasis {
        let n = g.vertex_count();
        let mut directed_edges = Vec::with_capacity(g.degree_sum());
        let mut index = HashMap::with_capacity(g.degree_sum());
        let mut in_offsets = Vec::with_capacity(n + 1);
        for x in 0..n {
            in_offsets.push(directed_edges.len());
            for &y in g.neighbors(x) {
                index.insert((x, y), directed_edges.len());
                directed_edges.push((x, y));
            }
        }
        in_offsets.push(directed_edges.len());
        let out_blocks = (0..n)
            .map(|x| g.neighbors(x).iter().map(|&y| index[&(y, x)]).collect())
            .collect();
        EdgeBasis { directed_edges, index, in_offsets, out_blocks }
    }

    pub fn dim(&self) -> usize {
        self.directed_edges.len()
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        self.directed_edges[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.directed_edges
    }

    pub fn index_of(&self, target: usize, source: usize) -> Option<usize> {
        self.index.get(&(target, source)).copied()
    }

    /// Indices of H_x^I, ordered like the neighbor order at x.
    pub fn in_block(&self, x: usize) -> Vec<usize> {
        (self.in_offsets[x]..self.in_offsets[x + 1]).collect()
    }

    /// Indices of H_x^O, ordered like the neighbor order at x.
    pub fn out_block(&self, x: usize) -> &[usize] {
        &self.out_blocks[x]
    }

    /// Vertex the basis edge points to (the vertex whose in-block holds it).
    pub fn target_of(&self, i: usize) -> usize {
        self.directed_edges[i].0
    }
}

/// Functional graph of a successor map N: V -> V with N(x) adjacent to x.
/// Every component holds exactly one directed cycle.
#[derive(Debug, Clone)]
pub struct FunctionalGraph {
    successor: Vec<usize>,
    components: Vec<Vec<usize>>,
    cycles: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

impl FunctionalGraph {
    pub fn new(g: &Graph, successor: &[usize]) -> Result<FunctionalGraph> {
        let n = g.vertex_count();
        if successor.len() != n {
            return Err(SqwError::InvalidInput("successor map must cover every vertex".into()));
        }
        for (x, &s) in successor.iter().enumerate() {
            if !g.is_adjacent(x, s) {
                return Err(SqwError::InvalidSuccessor { vertex: x, successor: s });
            }
        }
        // components: undirected connectivity of x -- N(x)
        let mut comp = vec![usize::MAX; n];
        let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, &s) in successor.iter().enumerate() {
            undirected[x].push(s);
            undirected[s].push(x);
        }
        let mut components: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = Vec::new();
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &w in &undirected[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        // per-component cycle: iterate the successor map n steps to land on
        // the cycle, then walk it
        let mut cycles = Vec::with_capacity(components.len());
        for members in &components {
            let mut v = members[0];
            for _ in 0..n {
                v = successor[v];
            }
            let start = v;
            let mut cyc = vec![start];
            let mut w = successor[start];
            while w != start {
                cyc.push(w);
                w = successor[w];
            }
            cycles.push(cyc);
        }
        Ok(FunctionalGraph { successor: successor.to_vec(), components, cycles, component_of: comp })
    }

    pub fn successor(&self, x: usize) -> usize {
        self.successor[x]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, x: usize) -> usize {
        self.component_of[x]
    }

    /// Vertices of the unique cycle of component `i`, in successor order.
    pub fn cycle_of(&self, i: usize) -> &[usize] {
        &self.cycles[i]
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}
