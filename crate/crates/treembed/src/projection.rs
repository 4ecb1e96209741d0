//! Projection systems satisfying the strong axioms, the graphs they induce
//! (the projection complex, its spanning tree, and the two quasi-trees of
//! spaces), and empirical verification of the structure theory on concrete
//! instances.
//!
//! A system carries finitely many indices, a finite connected unit-edge
//! graph per index, and nonempty vertex projections between distinct
//! indices. All verification is exact: distances are breadth-first or
//! uniform-cost integers, and every reported bound is checked in integer
//! arithmetic.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjError {
    #[error("index {0} is out of range")]
    BadIndex(usize),
    #[error("projection of {x} onto {y} is empty")]
    EmptyProjection { y: usize, x: usize },
    #[error("space {0} is disconnected")]
    DisconnectedSpace(usize),
    #[error("space {space} has no vertex {vertex}")]
    BadVertex { space: usize, vertex: usize },
    #[error("K = {k} is below the required threshold {required}")]
    KBelowThreshold { k: u64, required: u64 },
    #[error("the between-order for ({x}, {z}) at K = {k} is inconsistent")]
    OrderInconsistent { x: usize, z: usize, k: u64 },
    #[error("could not place {requested} disjoint segments in a tree on {n_vertices} vertices")]
    CannotPlaceSegments { requested: usize, n_vertices: usize },
    #[error("radius {radius} exceeds the supported cap {cap}")]
    RadiusOverCap { radius: u32, cap: u32 },
    #[error("instance is malformed: {0}")]
    MalformedInstance(String),
}

/// A finite graph with unit-length edges and precomputed exact distances.
#[derive(Debug, Clone)]
pub struct SpaceGraph {
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

fn bfs_dists(adj: &[Vec<usize>], src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

impl SpaceGraph {
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n_vertices];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let dist = (0..n_vertices).map(|s| bfs_dists(&adj, s)).collect();
        SpaceGraph { adj, dist }
    }

    /// A path graph on `n` vertices (`n ≥ 1`).
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.dist[0].iter().all(|&d| d != u32::MAX)
    }

    pub fn distance(&self, u: usize, v: usize) -> u64 {
        self.dist[u][v] as u64
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Indices with one space per index, projections between distinct indices,
/// and a declared projection constant θ.
#[derive(Debug, Clone)]
pub struct ProjectionSystem {
    spaces: Vec<SpaceGraph>,
    proj: Vec<Vec<Vec<usize>>>,
    theta: u64,
    labels: Vec<String>,
    /// `Some(table)` when every projection is a single vertex; the common
    /// case for the generated instances, and the fast path everywhere.
    singleton: Option<Vec<Vec<u32>>>,
}

impl ProjectionSystem {
    /// Validates spaces (connected, nonempty) and projections (nonempty
    /// with in-range vertices for every ordered pair of distinct indices).
    pub fn new(
        spaces: Vec<SpaceGraph>,
        proj: Vec<Vec<Vec<usize>>>,
        theta: u64,
        labels: Option<Vec<String>>,
    ) -> Result<Self, ProjError> {
        let n = spaces.len();
        for (i, space) in spaces.iter().enumerate() {
            if space.n_vertices() == 0 || !space.is_connected() {
                return Err(ProjError::DisconnectedSpace(i));
            }
        }
        if proj.len() != n {
            return Err(ProjError::MalformedInstance(format!(
                "projection table has {} rows for {} indices",
                proj.len(),
                n
            )));
        }
        for (y, row) in proj.iter().enumerate() {
            if row.len() != n {
                return Err(ProjError::MalformedInstance(format!(
                    "projection row {} has {} entries for {} indices",
                    y,
                    row.len(),
                    n
                )));
            }
            for (x, set) in row.iter().enumerate() {
                if x == y {
                    continue;
                }
                if set.is_empty() {
                    return Err(ProjError::EmptyProjection { y, x });
                }
                for &v in set {
                    if v >= spaces[y].n_vertices() {
                        return Err(ProjError::BadVertex { space: y, vertex: v });
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() == n => l,
            Some(l) => {
                return Err(ProjError::MalformedInstance(format!(
                    "{} labels for {} indices",
                    l.len(),
                    n
                )))
            }
            None => (0..n).map(|i| format!("Y{i}")).collect(),
        };
        let mut proj = proj;
        for row in &mut proj {
            for set in row.iter_mut() {
                set.sort_unstable();
                set.dedup();
            }
        }
        let all_singleton = (0..n)
            .all(|y| (0..n).all(|x| x == y || proj[y][x].len() == 1));
        let singleton = all_singleton.then(|| {
            (0..n)
                .map(|y| {
                    (0..n)
                        .map(|x| if x == y { 0 } else { proj[y][x][0] as u32 })
                        .collect()
                })
                .collect()
        });
        Ok(ProjectionSystem { spaces, proj, theta, labels, singleton })
    }

    pub fn n_indices(&self) -> usize {
        self.spaces.len()
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn space(&self, y: usize) -> &SpaceGraph {
        &self.spaces[y]
    }

    pub fn label(&self, y: usize) -> &str {
        &self.labels[y]
    }

    /// π_Y(X), a sorted nonempty vertex set of the space at `y`; `x ≠ y`.
    pub fn projection(&self, y: usize, x: usize) -> &[usize] {
        debug_assert_ne!(y, x);
        &self.proj[y][x]
    }

    fn diam_in(&self, y: usize, a: &[usize], b: &[usize]) -> u64 {
        let space = &self.spaces[y];
        let mut best = 0;
        for &u in a.iter().chain(b.iter()) {
            for &v in a.iter().chain(b.iter()) {
                best = best.max(space.distance(u, v));
            }
        }
        best
    }

    /// diam π_Y(X); `x ≠ y`.
    pub fn projection_diameter(&self, y: usize, x: usize) -> u64 {
        if self.singleton.is_some() {
            return 0;
        }
        self.diam_in(y, &self.proj[y][x], &[])
    }

    /// d_Y(X, Z) = diam(π_Y(X) ∪ π_Y(Z)); `y` distinct from both.
    pub fn d(&self, y: usize, x: usize, z: usize) -> u64 {
        debug_assert!(y != x && y != z);
        if let Some(sp) = &self.singleton {
            let row = &sp[y];
            return self.spaces[y].distance(row[x] as usize, row[z] as usize);
        }
        self.diam_in(y, &self.proj[y][x], &self.proj[y][z])
    }

    fn proj_eq(&self, y: usize, x: usize, z: usize) -> bool {
        if let Some(sp) = &self.singleton {
            return sp[y][x] == sp[y][z];
        }
        self.proj[y][x] == self.proj[y][z]
    }

    /// d_Y(x, z) for points `x` in space `sx` and `z` in space `sz`,
    /// projecting a point to itself within its own space and to its
    /// space's projection elsewhere.
    pub fn point_d(&self, y: usize, (sx, vx): (usize, usize), (sz, vz): (usize, usize)) -> u64 {
        let space = &self.spaces[y];
        let own: [usize; 1];
        let a: &[usize] = if y == sx {
            own = [vx];
            &own
        } else {
            &self.proj[y][sx]
        };
        let own2: [usize; 1];
        let b: &[usize] = if y == sz {
            own2 = [vz];
            &own2
        } else {
            &self.proj[y][sz]
        };
        let mut best = 0;
        for &u in a.iter().chain(b.iter()) {
            for &v in a.iter().chain(b.iter()) {
                best = best.max(space.distance(u, v));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: String,
    pub indices: Vec<usize>,
    pub value: u64,
}

/// Result of checking the strong axioms exhaustively over index triples.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub declared_theta: u64,
    /// The least θ for which (P3), (P4) and (P4′) all hold; (P5) is
    /// automatic on a finite index set.
    pub minimal_theta: u64,
    pub passes: bool,
    pub p3_max: u64,
    pub p4_max: u64,
    pub p4_prime_max: u64,
    pub violation: Option<AxiomViolation>,
}

/// Checks (P3), (P4), (P5), (P4′) over all index triples and reports the
/// minimal θ for which they hold; a violating triple is reported whenever
/// that minimum exceeds the declared θ.
pub fn verify_axioms(sys: &ProjectionSystem) -> AxiomReport {
    let n = sys.n_indices();
    let mut p3: (u64, Vec<usize>) = (0, Vec::new());
    for y in 0..n {
        for x in 0..n {
            if x == y {
                continue;
            }
            let d = sys.projection_diameter(y, x);
            if d > p3.0 {
                p3 = (d, vec![x, y]);
            }
        }
    }

    type Best = (u64, Vec<usize>);
    // Ties prefer the lexicographically least witness so reports do not
    // depend on parallel scheduling.
    fn pick(a: Best, b: Best) -> Best {
        let b_wins =
            b.0 > a.0 || (b.0 == a.0 && !b.1.is_empty() && (a.1.is_empty() || b.1 < a.1));
        if b_wins {
            b
        } else {
            a
        }
    }
    let (p4, p4p) = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut p4: Best = (0, Vec::new());
            let mut p4p: Best = (0, Vec::new());
            for b in a + 1..n {
                for c in b + 1..n {
                    let da = sys.d(a, b, c);
                    let db = sys.d(b, a, c);
                    let dc = sys.d(c, a, b);
                    // (P4) for every ordered triple requires
                    // θ ≥ min of each pair drawn from {da, db, dc}; the
                    // largest such constraint is the middle value.
                    let mid = da.max(db).min(da.min(db).max(dc));
                    if mid > p4.0 {
                        p4 = (mid, vec![a, b, c]);
                    }
                    // (P4′): θ ≥ d_Y(X, Z) whenever π_X(Y) ≠ π_X(Z).
                    for (y, x, z) in
                        [(a, b, c), (b, a, c), (c, a, b)]
                    {
                        let dy = match y {
                            _ if y == a => da,
                            _ if y == b => db,
                            _ => dc,
                        };
                        if dy > p4p.0
                            && (!sys.proj_eq(x, y, z) || !sys.proj_eq(z, y, x))
                        {
                            p4p = (dy, vec![x, y, z]);
                        }
                    }
                }
            }
            (p4, p4p)
        })
        .reduce(
            || ((0, Vec::new()), (0, Vec::new())),
            |(m1, m2), (n1, n2)| (pick(m1, n1), pick(m2, n2)),
        );

    let minimal = p3.0.max(p4.0).max(p4p.0);
    let declared = sys.theta();
    let passes = minimal <= declared;
    let violation = if passes {
        None
    } else if p3.0 == minimal {
        Some(AxiomViolation { axiom: "P3".into(), indices: p3.1.clone(), value: p3.0 })
    } else if p4.0 == minimal {
        Some(AxiomViolation { axiom: "P4".into(), indices: p4.1.clone(), value: p4.0 })
    } else {
        Some(AxiomViolation { axiom: "P4'".into(), indices: p4p.1.clone(), value: p4p.0 })
    };
    AxiomReport {
        declared_theta: declared,
        minimal_theta: minimal,
        passes,
        p3_max: p3.0,
        p4_max: p4.0,
        p4_prime_max: p4p.0,
        violation,
    }
}

/// {Y ≠ X, Z : d_Y(X, Z) > K}, sorted; empty when X = Z.
pub fn between_set(sys: &ProjectionSystem, k: u64, x: usize, z: usize) -> Vec<usize> {
    if x == z {
        return Vec::new();
    }
    (0..sys.n_indices())
        .filter(|&y| y != x && y != z && sys.d(y, x, z) > k)
        .collect()
}

/// An ordered standard path: X first, Z last, interior sorted by the
/// between-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardPath {
    pub vertices: Vec<usize>,
}

impl StandardPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn interior(&self) -> &[usize] {
        if self.vertices.len() <= 2 {
            &[]
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }
}

/// Sorts the vertices between X and Z by the order `Y < Y′ iff
/// d_Y(X, Y′) > θ`, verifying that the relation is a strict total order.
/// Requires `K ≥ 2θ`. X = Z yields the single-vertex path.
pub fn standard_path(
    sys: &ProjectionSystem,
    k: u64,
    x: usize,
    z: usize,
) -> Result<StandardPath, ProjError> {
    let n = sys.n_indices();
    if x >= n {
        return Err(ProjError::BadIndex(x));
    }
    if z >= n {
        return Err(ProjError::BadIndex(z));
    }
    if k < 2 * sys.theta() {
        return Err(ProjError::KBelowThreshold { k, required: 2 * sys.theta() });
    }
    if x == z {
        return Ok(StandardPath { vertices: vec![x] });
    }
    let theta = sys.theta();
    let interior = between_set(sys, k, x, z);
    let m = interior.len();
    // lt[i][j] ⇔ interior[i] < interior[j].
    let lt: Vec<Vec<bool>> = interior
        .iter()
        .map(|&yi| interior.iter().map(|&yj| yi != yj && sys.d(yi, x, yj) > theta).collect())
        .collect();
    for i in 0..m {
        for j in i + 1..m {
            if lt[i][j] == lt[j][i] {
                return Err(ProjError::OrderInconsistent { x, z, k });
            }
        }
    }
    // A tournament is a strict total order exactly when its in-degrees are
    // pairwise distinct; sorting by in-degree then realizes the order.
    let mut keyed: Vec<(usize, usize)> = (0..m)
        .map(|i| ((0..m).filter(|&j| lt[j][i]).count(), i))
        .collect();
    keyed.sort_unstable();
    if keyed.iter().enumerate().any(|(rank, &(key, _))| rank != key) {
        return Err(ProjError::OrderInconsistent { x, z, k });
    }
    let mut vertices = Vec::with_capacity(m + 2);
    vertices.push(x);
    vertices.extend(keyed.iter().map(|&(_, i)| interior[i]));
    vertices.push(z);
    Ok(StandardPath { vertices })
}

/// All standard paths of an instance, stored once per unordered pair with
/// constant-time membership tests.
struct PathTable {
    n: usize,
    paths: Vec<Arc<Vec<usize>>>,
    member: Vec<Arc<Vec<u64>>>,
}

fn bitset_contains(bits: &[u64], v: usize) -> bool {
    bits[v / 64] & (1 << (v % 64)) != 0
}

impl PathTable {
    fn build(sys: &ProjectionSystem, k: u64) -> Result<PathTable, ProjError> {
        let n = sys.n_indices();
        let words = n.div_ceil(64);
        let empty_path = Arc::new(Vec::new());
        let empty_bits = Arc::new(vec![0u64; words]);
        let mut paths = vec![empty_path; n * n];
        let mut member = vec![empty_bits; n * n];
        let computed: Vec<((usize, usize), (Vec<usize>, Vec<u64>))> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut out = Vec::new();
                for z in x + 1..n {
                    let path = standard_path(sys, k, x, z)?;
                    let mut bits = vec![0u64; words];
                    for &v in &path.vertices {
                        bits[v / 64] |= 1 << (v % 64);
                    }
                    out.push(((x, z), (path.vertices, bits)));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, ProjError>>()?
            .into_iter()
            .flatten()
            .collect();
        for ((x, z), (vertices, bits)) in computed {
            paths[x * n + z] = Arc::new(vertices);
            member[x * n + z] = Arc::new(bits);
        }
        Ok(PathTable { n, paths, member })
    }

    /// The path from `x` to `z`, oriented from `x`.
    fn of(&self, x: usize, z: usize) -> Vec<usize> {
        if x == z {
            return vec![x];
        }
        let (i, j) = (x.min(z), x.max(z));
        let stored = &self.paths[i * self.n + j];
        if x < z {
            stored.as_ref().clone()
        } else {
            stored.iter().rev().copied().collect()
        }
    }

    fn path_len(&self, x: usize, z: usize) -> usize {
        if x == z {
            return 1;
        }
        let (i, j) = (x.min(z), x.max(z));
        self.paths[i * self.n + j].len()
    }

    fn contains(&self, x: usize, z: usize, w: usize) -> bool {
        if x == z {
            return w == x;
        }
        let (i, j) = (x.min(z), x.max(z));
        bitset_contains(&self.member[i * self.n + j], w)
    }
}

/// A graph with positive integer edge weights on a flat vertex set.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, u64)>>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph { adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: u64) {
        self.adj[u].push((v, w));
        self.adj[v].push((u, w));
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Exact shortest-path distances from `src` (u64::MAX = unreachable).
    pub fn distances(&self, src: usize) -> Vec<u64> {
        let mut dist = vec![u64::MAX; self.adj.len()];
        let mut heap = BinaryHeap::new();
        dist[src] = 0;
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }
}

/// The derived graphs at one K: the projection complex, the spanning tree
/// from a basepoint, and the quasi-tree of spaces with its tree-restricted
/// subgraph.
#[derive(Debug)]
pub struct ComplexBundle {
    pub k: u64,
    pub basepoint: usize,
    pub pk_adj: Vec<Vec<bool>>,
    pub t_edges: BTreeSet<(usize, usize)>,
    pub ck: WeightedGraph,
    pub ckt: WeightedGraph,
    /// Flat vertex ids: space `s` occupies `offsets[s] .. offsets[s+1]`.
    pub offsets: Vec<usize>,
    /// Chosen representative p(X, Y) ∈ π_X(Y) per ordered adjacent pair,
    /// as a local vertex of the space at X.
    pub p_choice: BTreeMap<(usize, usize), usize>,
}

impl ComplexBundle {
    pub fn global(&self, space: usize, v: usize) -> usize {
        self.offsets[space] + v
    }

    pub fn space_of(&self, gid: usize) -> (usize, usize) {
        let s = self.offsets.partition_point(|&o| o <= gid) - 1;
        (s, gid - self.offsets[s])
    }

    pub fn n_ck_vertices(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn pk_adjacent(&self, x: usize, z: usize) -> bool {
        self.pk_adj[x][z]
    }
}

/// Builds P_K, T (rooted at the basepoint), C_K and C_K^T. Requires
/// `K ≥ 4θ`. Representatives p(X, Y) are the least vertex of π_X(Y) under
/// a seeded per-space vertex numbering.
pub fn build_complexes(
    sys: &ProjectionSystem,
    k: u64,
    basepoint: usize,
    seed: u64,
) -> Result<ComplexBundle, ProjError> {
    let n = sys.n_indices();
    if basepoint >= n {
        return Err(ProjError::BadIndex(basepoint));
    }
    if k < 4 * sys.theta() {
        return Err(ProjError::KBelowThreshold { k, required: 4 * sys.theta() });
    }

    let mut pk_adj = vec![vec![false; n]; n];
    for x in 0..n {
        for z in x + 1..n {
            let adjacent = between_set(sys, k, x, z).is_empty();
            pk_adj[x][z] = adjacent;
            pk_adj[z][x] = adjacent;
        }
    }

    let mut t_edges = BTreeSet::new();
    for x in 0..n {
        let path = standard_path(sys, k, basepoint, x)?;
        for pair in path.vertices.windows(2) {
            t_edges.insert((pair[0].min(pair[1]), pair[0].max(pair[1])));
        }
    }

    let mut offsets = vec![0usize];
    for s in 0..n {
        offsets.push(offsets[s] + sys.space(s).n_vertices());
    }
    let total = *offsets.last().unwrap();

    // Seeded per-space vertex ranks make the "arbitrary element" choice of
    // representatives deterministic and reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rank: Vec<Vec<usize>> = Vec::with_capacity(n);
    for s in 0..n {
        let nv = sys.space(s).n_vertices();
        let mut order: Vec<usize> = (0..nv).collect();
        for i in (1..nv).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut r = vec![0usize; nv];
        for (pos, &v) in order.iter().enumerate() {
            r[v] = pos;
        }
        rank.push(r);
    }
    let mut p_choice = BTreeMap::new();
    for x in 0..n {
        for y in 0..n {
            if x != y && pk_adj[x][y] {
                let v = *sys
                    .projection(x, y)
                    .iter()
                    .min_by_key(|&&v| rank[x][v])
                    .expect("projections are nonempty");
                p_choice.insert((x, y), v);
            }
        }
    }

    let mut ck = WeightedGraph::new(total);
    let mut ckt = WeightedGraph::new(total);
    for s in 0..n {
        for (u, v) in sys.space(s).edges() {
            ck.add_edge(offsets[s] + u, offsets[s] + v, 1);
            ckt.add_edge(offsets[s] + u, offsets[s] + v, 1);
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            if pk_adj[x][y] {
                for &u in sys.projection(x, y) {
                    for &v in sys.projection(y, x) {
                        ck.add_edge(offsets[x] + u, offsets[y] + v, k.max(1));
                    }
                }
            }
        }
    }
    for &(x, y) in &t_edges {
        let u = p_choice[&(x, y)];
        let v = p_choice[&(y, x)];
        ckt.add_edge(offsets[x] + u, offsets[y] + v, k.max(1));
    }

    Ok(ComplexBundle { k, basepoint, pk_adj, t_edges, ck, ckt, offsets, p_choice })
}

/// Sampling knobs for the verification passes.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Exhaustive point-pair checks up to this many total vertices.
    pub pair_cap: usize,
    /// Point pairs drawn when over the cap.
    pub sample_pairs: usize,
    /// Index triples drawn for the tripod decomposition check.
    pub triples: usize,
    /// Draws for the spot-checked order conditions.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { pair_cap: 2000, sample_pairs: 2000, triples: 1000, samples: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub counterexample: Option<String>,
}

impl CheckResult {
    fn pass(name: &str, checked: u64) -> Self {
        CheckResult { name: name.into(), passed: true, checked, counterexample: None }
    }

    fn fail(name: &str, checked: u64, witness: String) -> Self {
        CheckResult { name: name.into(), passed: false, checked, counterexample: Some(witness) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerifyReport {
    fn from_checks(checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerifyReport { checks, passed }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn unit_bfs(adj: &[Vec<usize>], src: usize) -> Vec<u64> {
    bfs_dists(adj, src)
        .into_iter()
        .map(|d| if d == u32::MAX { u64::MAX } else { d as u64 })
        .collect()
}

/// Checks the graph-level structure theory on the bundle:
/// (a) standard paths are quasigeodesics in P_K;
/// (b) T is a spanning tree;
/// (c) the inclusion T → P_K distorts distances by at most (2, 5);
/// (d) the C_K distance formula with extended point projections;
/// (e) C_K^T sits between C_K and 8·C_K + 20K;
/// (f) standard-path triangles have middle segments of at most 2 vertices.
pub fn verify_complexes(
    sys: &ProjectionSystem,
    bundle: &ComplexBundle,
    opts: &VerifyOptions,
) -> Result<VerifyReport, ProjError> {
    let n = sys.n_indices();
    let k = bundle.k;
    let table = PathTable::build(sys, k)?;
    let mut checks = Vec::new();

    // Unit-distance tables for P_K and T.
    let pk_lists: Vec<Vec<usize>> = (0..n)
        .map(|x| (0..n).filter(|&z| bundle.pk_adj[x][z]).collect())
        .collect();
    let mut t_lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &bundle.t_edges {
        t_lists[u].push(v);
        t_lists[v].push(u);
    }
    let d_pk: Vec<Vec<u64>> = (0..n).into_par_iter().map(|x| unit_bfs(&pk_lists, x)).collect();
    let d_t: Vec<Vec<u64>> = (0..n).into_par_iter().map(|x| unit_bfs(&t_lists, x)).collect();

    // (a) (L−1)/2 ≤ d_P ≤ L−1 for every index pair.
    {
        let mut result = CheckResult::pass("quasigeodesic-bounds", (n * n.saturating_sub(1) / 2) as u64);
        'outer_a: for x in 0..n {
            for z in x + 1..n {
                let l = table.path_len(x, z) as u64;
                let dp = d_pk[x][z];
                if dp == u64::MAX || l - 1 > 2 * dp || dp > l - 1 {
                    result = CheckResult::fail(
                        "quasigeodesic-bounds",
                        result.checked,
                        format!(
                            "pair ({}, {}): path has {} vertices but graph distance {}",
                            sys.label(x),
                            sys.label(z),
                            l,
                            dp
                        ),
                    );
                    break 'outer_a;
                }
            }
        }
        checks.push(result);
    }

    // (b) T is acyclic and spans: connected with n − 1 edges.
    {
        let reached = unit_bfs(&t_lists, bundle.basepoint)
            .iter()
            .filter(|&&d| d != u64::MAX)
            .count();
        let ok = reached == n && bundle.t_edges.len() == n.saturating_sub(1);
        checks.push(if ok {
            CheckResult::pass("spanning-tree", n as u64)
        } else {
            CheckResult::fail(
                "spanning-tree",
                n as u64,
                format!(
                    "{} edges reach {} of {} vertices",
                    bundle.t_edges.len(),
                    reached,
                    n
                ),
            )
        });
    }

    // (c) d_P ≤ d_T and d_T ≤ 2·d_P + 5 for every index pair.
    {
        let mut result = CheckResult::pass("tree-inclusion", (n * n.saturating_sub(1) / 2) as u64);
        'outer_c: for x in 0..n {
            for z in x + 1..n {
                let (dp, dt) = (d_pk[x][z], d_t[x][z]);
                if dt == u64::MAX || dp > dt || dt > 2 * dp + 5 {
                    result = CheckResult::fail(
                        "tree-inclusion",
                        result.checked,
                        format!(
                            "pair ({}, {}): complex distance {}, tree distance {}",
                            sys.label(x),
                            sys.label(z),
                            dp,
                            dt
                        ),
                    );
                    break 'outer_c;
                }
            }
        }
        checks.push(result);
    }

    // Point pairs for (d) and (e).
    let total = bundle.n_ck_vertices();
    let pairs: Vec<(usize, usize)> = if total <= opts.pair_cap {
        (0..total)
            .flat_map(|x| (x + 1..total).map(move |z| (x, z)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0xd15));
        let mut out = Vec::with_capacity(opts.sample_pairs);
        while out.len() < opts.sample_pairs {
            let x = rng.gen_range(0..total);
            let z = rng.gen_range(0..total);
            if x != z {
                out.push((x.min(z), x.max(z)));
            }
        }
        out
    };
    let sources: BTreeSet<usize> = pairs.iter().map(|&(x, _)| x).collect();
    let dists: HashMap<usize, (Vec<u64>, Vec<u64>)> = sources
        .par_iter()
        .map(|&s| (s, (bundle.ck.distances(s), bundle.ckt.distances(s))))
        .collect();

    let results: Vec<Result<(), (String, String)>> = pairs
        .par_iter()
        .map(|&(gx, gz)| {
            let (sx, vx) = bundle.space_of(gx);
            let (sz, vz) = bundle.space_of(gz);
            let d_ck = dists[&gx].0[gz];
            let d_ckt = dists[&gx].1[gz];
            if d_ck == u64::MAX || d_ckt == u64::MAX {
                return Err((
                    "distance-formula".into(),
                    format!("points {gx}, {gz} are disconnected"),
                ));
            }
            let sum: u64 = (0..sys.n_indices())
                .map(|y| {
                    let d = sys.point_d(y, (sx, vx), (sz, vz));
                    if d > k {
                        d
                    } else {
                        0
                    }
                })
                .sum();
            if sum > 4 * d_ck || d_ck > 2 * sum + 3 * k {
                return Err((
                    "distance-formula".into(),
                    format!(
                        "points {gx} in {} and {gz} in {}: projection sum {}, distance {}",
                        sys.label(sx),
                        sys.label(sz),
                        sum,
                        d_ck
                    ),
                ));
            }
            if d_ckt < d_ck || d_ckt > 8 * d_ck + 20 * k {
                return Err((
                    "tree-of-spaces".into(),
                    format!(
                        "points {gx}, {gz}: distance {} in the full complex, {} in the tree restriction",
                        d_ck, d_ckt
                    ),
                ));
            }
            Ok(())
        })
        .collect();
    let mut d_fail = None;
    let mut e_fail = None;
    for r in results {
        if let Err((name, msg)) = r {
            if name == "distance-formula" && d_fail.is_none() {
                d_fail = Some(msg);
            } else if name == "tree-of-spaces" && e_fail.is_none() {
                e_fail = Some(msg);
            }
        }
    }
    checks.push(match d_fail {
        None => CheckResult::pass("distance-formula", pairs.len() as u64),
        Some(msg) => CheckResult::fail("distance-formula", pairs.len() as u64, msg),
    });
    checks.push(match e_fail {
        None => CheckResult::pass("tree-of-spaces", pairs.len() as u64),
        Some(msg) => CheckResult::fail("tree-of-spaces", pairs.len() as u64, msg),
    });

    // (f) the standard path of (X, Z) splits against a third vertex Y into
    // an initial run shared with [X, Y], at most two middle vertices lying
    // on neither side path, and a terminal run shared with [Y, Z].
    {
        let mut result = CheckResult::pass("tripod-middle", 0);
        if n >= 3 {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0xf));
            let mut checked = 0;
            for _ in 0..opts.triples {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let z = rng.gen_range(0..n);
                if x == y || y == z || x == z {
                    continue;
                }
                checked += 1;
                let s = table.of(x, z);
                let side_xy = table.of(x, y);
                let side_yz = table.of(y, z);
                let mut prefix = 0;
                while prefix < s.len() && prefix < side_xy.len() && s[prefix] == side_xy[prefix] {
                    prefix += 1;
                }
                let mut suffix = 0;
                while suffix < s.len().saturating_sub(prefix)
                    && suffix < side_yz.len()
                    && s[s.len() - 1 - suffix] == side_yz[side_yz.len() - 1 - suffix]
                {
                    suffix += 1;
                }
                let middle = &s[prefix..s.len() - suffix];
                let stray = middle
                    .iter()
                    .any(|&w| table.contains(x, y, w) || table.contains(y, z, w));
                if middle.len() > 2 || stray {
                    result = CheckResult::fail(
                        "tripod-middle",
                        checked,
                        format!(
                            "triple ({}, {}, {}): middle segment {:?}",
                            sys.label(x),
                            sys.label(y),
                            sys.label(z),
                            middle
                        ),
                    );
                    break;
                }
            }
            if result.passed {
                result.checked = checked;
            }
        }
        checks.push(result);
    }

    Ok(VerifyReport::from_checks(checks))
}

/// Checks the order-theoretic facts behind standard paths:
/// the four equivalent between-order conditions (with spot-checked
/// projection-transfer forms), the total-order laws with the interior
/// distance identity, promotion of far pairs into the between set,
/// contiguity of subpaths, and the off-path distance bounds.
pub fn verify_properties(
    sys: &ProjectionSystem,
    k: u64,
    opts: &VerifyOptions,
) -> Result<VerifyReport, ProjError> {
    let n = sys.n_indices();
    let theta = sys.theta();
    let table = PathTable::build(sys, k)?;
    let mut checks = Vec::new();

    // Conditions (1)–(4) agree for every pair inside every between set.
    {
        let results: Vec<Result<u64, String>> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut checked = 0;
                for z in x + 1..n {
                    let path = table.of(x, z);
                    let interior = &path[1..path.len() - 1];
                    for &y in interior {
                        for &yp in interior {
                            if y == yp {
                                continue;
                            }
                            checked += 1;
                            let c1 = sys.d(y, x, yp) > theta;
                            let c2 = sys.d(yp, y, z) > theta;
                            let c3 = sys.d(y, yp, z) <= theta;
                            let c4 = sys.d(yp, x, y) <= theta;
                            if c1 != c2 || c1 != c3 || c1 != c4 {
                                return Err(format!(
                                    "pair ({}, {}), between vertices {} and {}: conditions ({}, {}, {}, {})",
                                    sys.label(x),
                                    sys.label(z),
                                    sys.label(y),
                                    sys.label(yp),
                                    c1,
                                    c2,
                                    c3,
                                    c4
                                ));
                            }
                        }
                    }
                }
                Ok(checked)
            })
            .collect();
        let mut checked = 0;
        let mut failure = None;
        for r in results {
            match r {
                Ok(c) => checked += c,
                Err(msg) => failure = failure.or(Some(msg)),
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("order-equivalence", checked),
            Some(msg) => CheckResult::fail("order-equivalence", checked, msg),
        });
    }

    // Spot-check the transfer forms: Y < Y′ makes Y′ and Z
    // indistinguishable from Y, and Y and X indistinguishable from Y′.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x56));
        let mut checked = 0;
        let mut failure = None;
        for _ in 0..opts.samples {
            let x = rng.gen_range(0..n);
            let z = rng.gen_range(0..n);
            if x == z {
                continue;
            }
            let path = table.of(x, z);
            if path.len() < 4 {
                continue;
            }
            let i = rng.gen_range(1..path.len() - 2);
            let j = rng.gen_range(i + 1..path.len() - 1);
            let (y, yp) = (path[i], path[j]);
            let w = rng.gen_range(0..n);
            checked += 1;
            if w != y && sys.d(y, yp, w) != sys.d(y, z, w) {
                failure = failure.or(Some(format!(
                    "witness {} distinguishes {} from {} at {}",
                    sys.label(w),
                    sys.label(yp),
                    sys.label(z),
                    sys.label(y)
                )));
            }
            if w != yp && sys.d(yp, y, w) != sys.d(yp, x, w) {
                failure = failure.or(Some(format!(
                    "witness {} distinguishes {} from {} at {}",
                    sys.label(w),
                    sys.label(y),
                    sys.label(x),
                    sys.label(yp)
                )));
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("order-transfer", checked),
            Some(msg) => CheckResult::fail("order-transfer", checked, msg),
        });
    }

    // Total-order laws, plus the interior identity
    // d_{Y′}(Y, Y″) = d_{Y′}(X, Z) on every chain of a computed path.
    {
        let mut checked = 0;
        let mut failure: Option<String> = None;
        'outer_laws: for x in 0..n {
            for z in x + 1..n {
                let path = table.of(x, z);
                let m = path.len();
                for i in 0..m {
                    for j in 0..m {
                        if i == j || path[i] == path[j] {
                            continue;
                        }
                        // Condition (1) against the realized order, for
                        // interior pairs.
                        if i >= 1 && j >= 1 && i < m - 1 && j < m - 1 {
                            checked += 1;
                            let lt = sys.d(path[i], x, path[j]) > theta;
                            if lt != (i < j) {
                                failure = Some(format!(
                                    "pair ({}, {}): positions {} and {} disagree with the order",
                                    sys.label(x),
                                    sys.label(z),
                                    i,
                                    j
                                ));
                                break 'outer_laws;
                            }
                        }
                    }
                }
                for b in 1..m.saturating_sub(1) {
                    for a in 0..b {
                        for c in b + 1..m {
                            checked += 1;
                            if sys.d(path[b], path[a], path[c]) != sys.d(path[b], x, z) {
                                failure = Some(format!(
                                    "pair ({}, {}): interior {} sees {} and {} differently from the endpoints",
                                    sys.label(x),
                                    sys.label(z),
                                    sys.label(path[b]),
                                    sys.label(path[a]),
                                    sys.label(path[c])
                                ));
                                break 'outer_laws;
                            }
                        }
                    }
                }
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("order-laws", checked),
            Some(msg) => CheckResult::fail("order-laws", checked, msg),
        });
    }

    // Far pairs on a path promote their witness into the between set.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x57));
        let mut checked = 0;
        let mut failure = None;
        for _ in 0..opts.samples {
            let x = rng.gen_range(0..n);
            let z = rng.gen_range(0..n);
            if x == z {
                continue;
            }
            let path = table.of(x, z);
            let i = rng.gen_range(0..path.len());
            let j = rng.gen_range(0..path.len());
            let (y, ypp) = (path[i], path[j]);
            let yp = rng.gen_range(0..n);
            if yp == y || yp == ypp || y == ypp {
                continue;
            }
            if sys.d(yp, y, ypp) > k {
                checked += 1;
                let promoted = yp != x && yp != z && sys.d(yp, x, z) > k;
                if !promoted {
                    failure = failure.or(Some(format!(
                        "{} separates {} and {} but not the endpoints ({}, {})",
                        sys.label(yp),
                        sys.label(y),
                        sys.label(ypp),
                        sys.label(x),
                        sys.label(z)
                    )));
                }
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("between-promotion", checked),
            Some(msg) => CheckResult::fail("between-promotion", checked, msg),
        });
    }

    // Contiguous subsequences of standard paths are standard paths.
    {
        let results: Vec<Result<u64, String>> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut checked = 0;
                for z in x + 1..n {
                    let path = table.of(x, z);
                    let m = path.len();
                    for i in 0..m {
                        for j in i + 1..m {
                            checked += 1;
                            let sub = &path[i..=j];
                            let direct = table.of(path[i], path[j]);
                            if sub != direct.as_slice() {
                                return Err(format!(
                                    "pair ({}, {}): span {}..{} is {:?} but the direct path is {:?}",
                                    sys.label(x),
                                    sys.label(z),
                                    i,
                                    j,
                                    sub,
                                    direct
                                ));
                            }
                        }
                    }
                }
                Ok(checked)
            })
            .collect();
        let mut checked = 0;
        let mut failure = None;
        for r in results {
            match r {
                Ok(c) => checked += c,
                Err(msg) => failure = failure.or(Some(msg)),
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("subpath-coherence", checked),
            Some(msg) => CheckResult::fail("subpath-coherence", checked, msg),
        });
    }

    // Off-path bounds: a vertex on [X, Y] and [X, Z] but not [Y, Z] keeps
    // d_W(Y, Z) ≤ K; one on [X, Y] alone keeps d_W(X, Y) ≤ 2K.
    {
        let results: Vec<Result<u64, String>> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut checked = 0;
                for y in 0..n {
                    if y == x {
                        continue;
                    }
                    let path_xy = table.of(x, y);
                    for z in 0..n {
                        if z == x || z == y {
                            continue;
                        }
                        for &w in &path_xy {
                            if table.contains(y, z, w) {
                                continue;
                            }
                            if table.contains(x, z, w) {
                                checked += 1;
                                if sys.d(w, y, z) > k {
                                    return Err(format!(
                                        "vertex {} lies on [{}, {}] and [{}, {}] but d({}, {}) = {}",
                                        sys.label(w),
                                        sys.label(x),
                                        sys.label(y),
                                        sys.label(x),
                                        sys.label(z),
                                        sys.label(y),
                                        sys.label(z),
                                        sys.d(w, y, z)
                                    ));
                                }
                            } else {
                                checked += 1;
                                if sys.d(w, x, y) > 2 * k {
                                    return Err(format!(
                                        "vertex {} lies only on [{}, {}] but d({}, {}) = {}",
                                        sys.label(w),
                                        sys.label(x),
                                        sys.label(y),
                                        sys.label(x),
                                        sys.label(y),
                                        sys.d(w, x, y)
                                    ));
                                }
                            }
                        }
                    }
                }
                Ok(checked)
            })
            .collect();
        let mut checked = 0;
        let mut failure = None;
        for r in results {
            match r {
                Ok(c) => checked += c,
                Err(msg) => failure = failure.or(Some(msg)),
            }
        }
        checks.push(match failure {
            None => CheckResult::pass("offpath-bounds", checked),
            Some(msg) => CheckResult::fail("offpath-bounds", checked, msg),
        });
    }

    Ok(VerifyReport::from_checks(checks))
}

/// A serializable description of a concrete instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    TreeSegments {
        n_vertices: usize,
        edges: Vec<(usize, usize)>,
        segments: Vec<Vec<usize>>,
    },
    FreeProduct { radius: u32 },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<ProjectionSystem, ProjError> {
        match self {
            InstanceSpec::TreeSegments { n_vertices, edges, segments } => {
                build_tree_segments(*n_vertices, edges, segments)
            }
            InstanceSpec::FreeProduct { radius } => free_product_instance(*radius),
        }
    }
}

fn tree_path(parents_from: &[Vec<u32>], a: usize, b: usize) -> Vec<usize> {
    // parents_from[a] holds BFS distances from a; walk b back to a along
    // strictly decreasing distance.
    let dist = &parents_from[a];
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        let d = dist[cur];
        // A tree has exactly one neighbor closer to the root.
        cur = *tree_neighbors(parents_from, cur)
            .iter()
            .find(|&&v| dist[v] + 1 == d)
            .expect("connected tree");
        path.push(cur);
    }
    path.reverse();
    path
}

// Stored alongside the distance tables to avoid re-deriving adjacency:
// distance-1 vertices are exactly the tree neighbors.
fn tree_neighbors(dist_tables: &[Vec<u32>], v: usize) -> Vec<usize> {
    dist_tables[v]
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == 1)
        .map(|(u, _)| u)
        .collect()
}

/// Generates a random tree and pairwise-disjoint vertex segments on it.
pub fn generate_tree_segments(
    seed: u64,
    n_vertices: usize,
    n_segments: usize,
) -> Result<InstanceSpec, ProjError> {
    if n_vertices == 0 || n_segments == 0 {
        return Err(ProjError::MalformedInstance(
            "need at least one vertex and one segment".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n_vertices.saturating_sub(1));
    for v in 1..n_vertices {
        edges.push((rng.gen_range(0..v), v));
    }
    let mut adj = vec![Vec::new(); n_vertices];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let dist_tables: Vec<Vec<u32>> = (0..n_vertices).map(|s| bfs_dists(&adj, s)).collect();

    let mut used = vec![false; n_vertices];
    let mut segments: Vec<Vec<usize>> = Vec::with_capacity(n_segments);
    let mut attempts = 0usize;
    while segments.len() < n_segments {
        attempts += 1;
        if attempts > 400 * n_segments {
            return Err(ProjError::CannotPlaceSegments { requested: n_segments, n_vertices });
        }
        let a = rng.gen_range(0..n_vertices);
        let b = rng.gen_range(0..n_vertices);
        let path = tree_path(&dist_tables, a, b);
        if path.iter().all(|&v| !used[v]) {
            for &v in &path {
                used[v] = true;
            }
            segments.push(path);
        }
    }
    Ok(InstanceSpec::TreeSegments { n_vertices, edges, segments })
}

fn build_tree_segments(
    n_vertices: usize,
    edges: &[(usize, usize)],
    segments: &[Vec<usize>],
) -> Result<ProjectionSystem, ProjError> {
    if n_vertices == 0 {
        return Err(ProjError::MalformedInstance("empty tree".into()));
    }
    if edges.len() != n_vertices - 1 {
        return Err(ProjError::MalformedInstance(format!(
            "{} edges on {} vertices is not a tree",
            edges.len(),
            n_vertices
        )));
    }
    let mut adj = vec![Vec::new(); n_vertices];
    for &(u, v) in edges {
        if u >= n_vertices || v >= n_vertices || u == v {
            return Err(ProjError::MalformedInstance(format!("bad edge ({u}, {v})")));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let dist_tables: Vec<Vec<u32>> = (0..n_vertices).map(|s| bfs_dists(&adj, s)).collect();
    if dist_tables[0].iter().any(|&d| d == u32::MAX) {
        return Err(ProjError::MalformedInstance("tree is disconnected".into()));
    }
    let mut used = vec![false; n_vertices];
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(ProjError::MalformedInstance(format!("segment {i} is empty")));
        }
        for &v in segment {
            if v >= n_vertices {
                return Err(ProjError::MalformedInstance(format!(
                    "segment {i} mentions vertex {v}"
                )));
            }
            if used[v] {
                return Err(ProjError::MalformedInstance(format!(
                    "segments overlap at vertex {v}"
                )));
            }
            used[v] = true;
        }
        for pair in segment.windows(2) {
            if dist_tables[pair[0]][pair[1]] != 1 {
                return Err(ProjError::MalformedInstance(format!(
                    "segment {i} is not a path: {} and {} are not adjacent",
                    pair[0], pair[1]
                )));
            }
        }
    }

    let n = segments.len();
    let spaces: Vec<SpaceGraph> = segments.iter().map(|s| SpaceGraph::path(s.len())).collect();
    let mut proj = vec![vec![Vec::new(); n]; n];
    for y in 0..n {
        for x in 0..n {
            if x == y {
                continue;
            }
            // The nearest-point projection of the whole segment X: the
            // vertex of Y minimizing tree distance to X. Disjoint paths in
            // a tree meet through a single gate, so the minimizer is
            // unique; ties (impossible here) would resolve to the least
            // position.
            let mut best = (u32::MAX, 0usize);
            for (i, &vy) in segments[y].iter().enumerate() {
                let d = segments[x].iter().map(|&vx| dist_tables[vy][vx]).min().unwrap();
                if d < best.0 {
                    best = (d, i);
                }
            }
            proj[y][x] = vec![best.1];
        }
    }
    let labels = (0..n).map(|i| format!("S{i}")).collect();
    ProjectionSystem::new(spaces, proj, 0, Some(labels))
}

/// Generates and builds a random tree-segments instance in one step.
pub fn tree_segments_instance(
    seed: u64,
    n_vertices: usize,
    n_segments: usize,
) -> Result<ProjectionSystem, ProjError> {
    generate_tree_segments(seed, n_vertices, n_segments)?.build()
}

pub const FREE_PRODUCT_RADIUS_CAP: u32 = 4;

/// One factor of the free product of two rank-2 free-abelian groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Factor {
    P,
    Q,
}

impl Factor {
    fn letter(self) -> char {
        match self {
            Factor::P => 'p',
            Factor::Q => 'q',
        }
    }
}

type Syllable = (Factor, (i64, i64));

fn syllable_len(s: &Syllable) -> u32 {
    (s.1 .0.unsigned_abs() + s.1 .1.unsigned_abs()) as u32
}

fn gate_label(factor: Factor, gate: &[Syllable]) -> String {
    let mut out = format!("{}:", factor.letter().to_ascii_uppercase());
    if gate.is_empty() {
        out.push('e');
    }
    for s in gate {
        out.push_str(&format!("{}({},{})", s.0.letter(), s.1 .0, s.1 .1));
    }
    out
}

/// Cosets of the two abelian factors with gates of length ≤ radius; each
/// coset's space is the L1 ball of the leftover radius in the grid, and
/// projections are the single entry vertices along syllable normal forms.
pub fn free_product_instance(radius: u32) -> Result<ProjectionSystem, ProjError> {
    if radius > FREE_PRODUCT_RADIUS_CAP {
        return Err(ProjError::RadiusOverCap { radius, cap: FREE_PRODUCT_RADIUS_CAP });
    }
    let r = radius as i64;

    // Nonzero grid points of each L1 length, sorted for determinism.
    let mut points_by_len: Vec<Vec<(i64, i64)>> = vec![Vec::new(); radius as usize + 1];
    for x in -r..=r {
        for y in -r..=r {
            let l = (x.unsigned_abs() + y.unsigned_abs()) as usize;
            if l >= 1 && l <= radius as usize {
                points_by_len[l].push((x, y));
            }
        }
    }
    for list in &mut points_by_len {
        list.sort_unstable();
    }

    // All alternating syllable strings of total length ≤ radius.
    let mut gates: Vec<Vec<Syllable>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<Syllable>> = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for gate in &frontier {
            let used: u32 = gate.iter().map(syllable_len).sum();
            let forbidden = gate.last().map(|s| s.0);
            for factor in [Factor::P, Factor::Q] {
                if forbidden == Some(factor) {
                    continue;
                }
                for len in 1..=(radius - used) {
                    for &p in &points_by_len[len as usize] {
                        let mut longer = gate.clone();
                        longer.push((factor, p));
                        next.push(longer);
                    }
                }
            }
        }
        gates.extend(next.iter().cloned());
        frontier = next;
    }

    // An index per (factor, gate) with the gate not ending in that factor.
    let mut keys: Vec<(Factor, Vec<Syllable>)> = Vec::new();
    for gate in &gates {
        for factor in [Factor::P, Factor::Q] {
            if gate.last().map(|s| s.0) != Some(factor) {
                keys.push((factor, gate.clone()));
            }
        }
    }
    keys.sort();
    let n = keys.len();

    let mut spaces = Vec::with_capacity(n);
    let mut vertex_ids: Vec<HashMap<(i64, i64), usize>> = Vec::with_capacity(n);
    for (_, gate) in &keys {
        let used: u32 = gate.iter().map(syllable_len).sum();
        let br = (radius - used) as i64;
        let mut pts: Vec<(i64, i64)> = Vec::new();
        for x in -br..=br {
            for y in -br..=br {
                if x.abs() + y.abs() <= br {
                    pts.push((x, y));
                }
            }
        }
        pts.sort_unstable();
        let ids: HashMap<(i64, i64), usize> =
            pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut edges = Vec::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            for nb in [(x + 1, y), (x, y + 1)] {
                if let Some(&j) = ids.get(&nb) {
                    edges.push((i, j));
                }
            }
        }
        spaces.push(SpaceGraph::from_edges(pts.len(), &edges));
        vertex_ids.push(ids);
    }

    let mut proj = vec![vec![Vec::new(); n]; n];
    for y in 0..n {
        let (fy, hy) = &keys[y];
        for x in 0..n {
            if x == y {
                continue;
            }
            let (_, gx) = &keys[x];
            // The entry element of coset Y on geodesics from coset X: if
            // X's gate extends Y's gate by a syllable of Y's own factor,
            // geodesics leave Y at that syllable's grid point; otherwise
            // they enter through Y's gate itself, the grid origin.
            let point = if gx.len() > hy.len()
                && gx[..hy.len()] == hy[..]
                && gx[hy.len()].0 == *fy
            {
                gx[hy.len()].1
            } else {
                (0, 0)
            };
            proj[y][x] = vec![vertex_ids[y][&point]];
        }
    }
    let labels = keys.iter().map(|(f, g)| gate_label(*f, g)).collect();
    ProjectionSystem::new(spaces, proj, 0, Some(labels))
}
