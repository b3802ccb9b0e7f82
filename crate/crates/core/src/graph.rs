//! Bounded-degree graphs, labelings and radius-t balls.
//!
//! Vertices are dense `0..n` integers. Balls keep the original vertex ids so
//! that observation and information-set keys stay stable across rounds.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Action;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `n <count>` header")]
    MissingHeader,
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    OutOfRange { line: usize, vertex: usize, n: usize },
    #[error("graph is disconnected (vertex {unreachable} unreachable from 0)")]
    Disconnected { unreachable: usize },
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("family {family}: {message}")]
    Family { family: String, message: String },
}

/// Simple, undirected, connected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    delta: usize,
}

impl Graph {
    /// Validates an edge list. Line numbers in errors are 1-based positions
    /// in `edges` offset by `first_line`.
    fn from_numbered_edges(
        n: usize,
        edges: &[(usize, usize, usize)],
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(line, u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { line, vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let observed = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let graph = Graph {
            adjacency,
            delta: observed.max(2),
        };
        let dist = graph.distances_from(0);
        if let Some(unreachable) = dist.iter().position(Option::is_none) {
            return Err(GraphError::Disconnected { unreachable });
        }
        Ok(graph)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let numbered: Vec<_> = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (i + 1, u, v))
            .collect();
        Self::from_numbered_edges(n, &numbered)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Maximum degree, clamped below at 2.
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// BFS distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The structure of the radius-`radius` ball around `center`.
    pub fn ball_shape(&self, center: usize, radius: usize) -> BallShape {
        assert!(center < self.n(), "center {center} out of range");
        let dist = self.distances_from(center);
        let vertices: Vec<usize> = (0..self.n())
            .filter(|&w| matches!(dist[w], Some(d) if d <= radius))
            .collect();
        let distance = vertices.iter().map(|&w| dist[w].unwrap_or(0)).collect();
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &w) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, w) {
                    edges.push((i, j));
                }
            }
        }
        let center_index = vertices.binary_search(&center).unwrap_or(0);
        BallShape {
            center,
            center_index,
            radius,
            vertices,
            distance,
            edges,
        }
    }

    /// Edge-list text: a `n <count>` header followed by one `u v` line per edge.
    pub fn render(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

/// Canonical JSON form `{n, edges: [[u, v], ...]}` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(value: GraphJson) -> Result<Self, Self::Error> {
        let edges: Vec<_> = value.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(value.n, &edges)
    }
}

/// Parses the edge-list format. Blank lines and `#` comments are ignored.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let number = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Syntax {
                line,
                message: format!("expected a non-negative integer, found `{s}`"),
            })
        };
        match (n, tokens.as_slice()) {
            (None, ["n", count]) => n = Some(number(count)?),
            (None, _) => return Err(GraphError::MissingHeader),
            (Some(_), ["n", _]) => {
                return Err(GraphError::Syntax {
                    line,
                    message: "repeated header".into(),
                })
            }
            (Some(_), [u, v]) => edges.push((line, number(u)?, number(v)?)),
            (Some(_), _) => {
                return Err(GraphError::Syntax {
                    line,
                    message: format!("expected `u v`, found `{content}`"),
                })
            }
        }
    }
    let n = n.ok_or(GraphError::MissingHeader)?;
    Graph::from_numbered_edges(n, &edges)
}

/// Named graph families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    K2,
    Path(usize),
    Cycle(usize),
    Complete(usize),
    RandomBounded { n: usize, delta: usize, seed: u64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::K2 => write!(f, "k2"),
            Family::Path(n) => write!(f, "path:{n}"),
            Family::Cycle(n) => write!(f, "cycle:{n}"),
            Family::Complete(n) => write!(f, "complete:{n}"),
            Family::RandomBounded { n, delta, seed } => write!(f, "random:{n}:{delta}:{seed}"),
        }
    }
}

impl FromStr for Family {
    type Err = GraphError;

    /// `k2`, `path:N`, `cycle:N`, `complete:N`, `random:N:DELTA:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = |message: &str| GraphError::Family {
            family: s.to_string(),
            message: message.to_string(),
        };
        let num = |p: &str| p.parse::<u64>().map_err(|_| bad("expected integer parameter"));
        match parts.as_slice() {
            ["k2"] => Ok(Family::K2),
            ["path", n] => Ok(Family::Path(num(n)? as usize)),
            ["cycle", n] => Ok(Family::Cycle(num(n)? as usize)),
            ["complete", n] => Ok(Family::Complete(num(n)? as usize)),
            ["random", n, d, seed] => Ok(Family::RandomBounded {
                n: num(n)? as usize,
                delta: num(d)? as usize,
                seed: num(seed)?,
            }),
            _ => Err(bad("unknown family")),
        }
    }
}

pub fn make_family(family: &Family) -> Result<Graph, GraphError> {
    let too_small = |min: usize| GraphError::Family {
        family: family.to_string(),
        message: format!("needs n >= {min}"),
    };
    match *family {
        Family::K2 => Graph::from_edges(2, &[(0, 1)]),
        Family::Path(n) => {
            if n < 1 {
                return Err(too_small(1));
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)
        }
        Family::Cycle(n) => {
            if n < 3 {
                return Err(too_small(3));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges)
        }
        Family::Complete(n) => {
            if n < 1 {
                return Err(too_small(1));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, &edges)
        }
        Family::RandomBounded { n, delta, seed } => random_bounded(n, delta, seed),
    }
}

/// Random connected graph with maximum degree at most `delta`: a random
/// degree-respecting spanning tree plus up to `n / 2` extra edges.
fn random_bounded(n: usize, delta: usize, seed: u64) -> Result<Graph, GraphError> {
    let family = Family::RandomBounded { n, delta, seed };
    if n < 1 {
        return Err(GraphError::Family {
            family: family.to_string(),
            message: "needs n >= 1".into(),
        });
    }
    if delta < 2 {
        return Err(GraphError::Family {
            family: family.to_string(),
            message: "needs delta >= 2".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut degree = vec![0usize; n];
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        let v = order[i];
        let open: Vec<usize> = order[..i]
            .iter()
            .copied()
            .filter(|&u| degree[u] < delta)
            .collect();
        // With delta >= 2 a path-like attachment point always remains.
        let u = open[rng.gen_range(0..open.len())];
        edges.insert((u.min(v), u.max(v)));
        degree[u] += 1;
        degree[v] += 1;
    }
    for _ in 0..n / 2 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || degree[u] >= delta || degree[v] >= delta {
            continue;
        }
        if edges.insert((u.min(v), u.max(v))) {
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::from_edges(n, &edges)
}

/// Per-vertex value in `A ∪ {⊥}`; `None` is ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labeling(pub Vec<Option<Action>>);

impl Labeling {
    pub fn undecided(n: usize) -> Self {
        Labeling(vec![None; n])
    }

    pub fn get(&self, v: usize) -> Option<Action> {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }
}

/// Structure of a ball: the induced subgraph on every vertex within
/// `radius` of `center`, in ascending vertex-id order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BallShape {
    pub center: usize,
    pub center_index: usize,
    pub radius: usize,
    /// Original vertex ids, sorted.
    pub vertices: Vec<usize>,
    /// Distance from the center, aligned with `vertices`.
    pub distance: Vec<usize>,
    /// Induced edges as pairs of local indices `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
}

impl BallShape {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn local_index(&self, vertex: usize) -> Option<usize> {
        self.vertices.binary_search(&vertex).ok()
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.local_index(vertex).is_some()
    }

    /// Local indices of the center's neighbors.
    pub fn center_neighbors(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(i, j)| {
            if i == self.center_index {
                Some(j)
            } else if j == self.center_index {
                Some(i)
            } else {
                None
            }
        })
    }

    /// Compact structural signature such as `0,1,2|0-1,1-2`.
    pub fn signature(&self) -> String {
        let vs: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        let es: Vec<String> = self
            .edges
            .iter()
            .map(|&(i, j)| format!("{}-{}", self.vertices[i], self.vertices[j]))
            .collect();
        format!("{}|{}", vs.join(","), es.join(","))
    }

    /// Gathers labels for this ball from a global labeling.
    pub fn gather(&self, labels: &[Option<Action>]) -> Vec<Option<Action>> {
        self.vertices.iter().map(|&v| labels[v]).collect()
    }
}

/// Borrowed view of a labeled ball; `labels` is aligned with `shape.vertices`.
#[derive(Clone, Copy, Debug)]
pub struct BallView<'a> {
    pub shape: &'a BallShape,
    pub labels: &'a [Option<Action>],
}

impl<'a> BallView<'a> {
    pub fn center_label(&self) -> Option<Action> {
        self.labels[self.shape.center_index]
    }

    pub fn neighbor_labels(&self) -> impl Iterator<Item = Option<Action>> + 'a {
        let labels = self.labels;
        self.shape.center_neighbors().map(move |i| labels[i])
    }

    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }
}

/// An owned labeled ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub shape: Arc<BallShape>,
    pub labels: Vec<Option<Action>>,
}

impl Ball {
    pub fn view(&self) -> BallView<'_> {
        BallView {
            shape: &self.shape,
            labels: &self.labels,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.shape.vertices
    }

    pub fn center(&self) -> usize {
        self.shape.center
    }

    pub fn label_of(&self, vertex: usize) -> Option<Option<Action>> {
        self.shape.local_index(vertex).map(|i| self.labels[i])
    }
}

/// The radius-`t` ball centered at `v`, with labels copied from `labeling`.
pub fn ball(graph: &Graph, labeling: &Labeling, v: usize, t: usize) -> Ball {
    assert_eq!(labeling.len(), graph.n(), "labeling length must equal n");
    let shape = graph.ball_shape(v, t);
    let labels = shape.gather(&labeling.0);
    Ball {
        shape: Arc::new(shape),
        labels,
    }
}
