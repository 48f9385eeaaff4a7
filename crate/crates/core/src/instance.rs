//! Problem instances: complete metric graphs, the depot/terminal/assigned/free
//! partition, feasible route sets, validation and seeded generation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

use crate::error::{CoreError, Result};

/// Relative tolerance used for the triangle-inequality check and all cost
/// comparisons in tests.
pub const REL_TOL: f64 = 1e-9;

/// Complete weighted graph with symmetric weights satisfying the triangle
/// inequality. Weights are stored row-major in a flat `n * n` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    n: usize,
    w: Vec<f64>,
}

impl MetricGraph {
    /// Builds a graph from a full weight matrix. No validation is performed
    /// here; call [`validate_metric`] to collect violations.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(CoreError::InvalidInstance(format!(
                    "weight matrix row {i} has length {} (expected {n})",
                    r.len()
                )));
            }
        }
        let w = rows.into_iter().flatten().collect();
        Ok(Self { n, w })
    }

    /// Builds a graph of Euclidean distances over 2-D points.
    pub fn from_points(points: &[[f64; 2]]) -> Self {
        let n = points.len();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = points[i][0] - points[j][0];
                let dy = points[i][1] - points[j][1];
                w[i * n + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        Self { n, w }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Weight of the (undirected) edge between `i` and `j`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// Canonical id of the unordered pair `{i, j}`: row-major over i < j.
    #[inline]
    pub fn edge_id(&self, i: usize, j: usize) -> u64 {
        edge_id(self.n, i, j)
    }

    /// Total number of unordered pairs, `n * (n - 1) / 2`.
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * (n - 1) / 2
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.w[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }
}

/// Canonical id of the unordered pair `{i, j}` in an `n`-vertex complete
/// graph: row-major over pairs with i < j.
#[inline]
pub fn edge_id(n: usize, i: usize, j: usize) -> u64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let (n, a, b) = (n as u64, a as u64, b as u64);
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// A CMP instance: metric graph plus the partition V = D ∪ T ∪ A₁..A_k ∪ F.
#[derive(Debug, Clone, PartialEq)]
pub struct CmpInstance {
    pub graph: MetricGraph,
    /// Original 2-D points when the instance was built from coordinates.
    pub points: Option<Vec<[f64; 2]>>,
    pub depots: Vec<usize>,
    pub terminals: Vec<usize>,
    pub assigned: Vec<Vec<usize>>,
    pub free: Vec<usize>,
}

impl CmpInstance {
    pub fn salesman_count(&self) -> usize {
        self.depots.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// The set S_i = {d_i, t_i} ∪ A_i, sorted ascending.
    pub fn salesman_set(&self, i: usize) -> Vec<usize> {
        let mut s = vec![self.depots[i], self.terminals[i]];
        s.extend_from_slice(&self.assigned[i]);
        s.sort_unstable();
        s
    }
}

/// One depot-to-terminal route per salesman.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSet {
    pub routes: Vec<Vec<usize>>,
    pub total_cost: f64,
}

impl RouteSet {
    pub fn new(inst: &CmpInstance, routes: Vec<Vec<usize>>) -> Result<Self> {
        let total_cost = routes_cost(&inst.graph, &routes)?;
        Ok(Self { routes, total_cost })
    }
}

/// A violated instance or solution invariant. Violations are data, not
/// failures: validators return every violation they find.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Asymmetric { i: usize, j: usize },
    NonZeroDiagonal { i: usize },
    NonFinite { i: usize, j: usize },
    NegativeWeight { i: usize, j: usize },
    TriangleInequality { i: usize, j: usize, via: usize },
    SizeMismatch { what: &'static str },
    OutOfRange { what: &'static str, id: usize },
    Overlap { id: usize, first: String, second: String },
    Uncovered { id: usize },
    DepotEqualsTerminal { salesman: usize },
    BadEndpoint { salesman: usize, expected: usize, found: Option<usize> },
    MissingAssigned { salesman: usize, id: usize },
    ForeignAssigned { salesman: usize, id: usize, owner: usize },
    RepeatedVertex { salesman: usize, id: usize },
    FreeCoverage { id: usize, times: usize },
    VertexNotCovered { id: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Asymmetric { i, j } => write!(f, "w[{i}][{j}] != w[{j}][{i}]"),
            NonZeroDiagonal { i } => write!(f, "w[{i}][{i}] != 0"),
            NonFinite { i, j } => write!(f, "w[{i}][{j}] is not finite"),
            NegativeWeight { i, j } => write!(f, "w[{i}][{j}] < 0"),
            TriangleInequality { i, j, via } => {
                write!(f, "triangle violation: w[{i}][{j}] > w[{i}][{via}] + w[{via}][{j}]")
            }
            SizeMismatch { what } => write!(f, "size mismatch: {what}"),
            OutOfRange { what, id } => write!(f, "{what} contains out-of-range vertex {id}"),
            Overlap { id, first, second } => {
                write!(f, "vertex {id} belongs to both {first} and {second}")
            }
            Uncovered { id } => write!(f, "vertex {id} not covered by the partition"),
            DepotEqualsTerminal { salesman } => {
                write!(f, "salesman {salesman} has d_i = t_i")
            }
            BadEndpoint { salesman, expected, found } => write!(
                f,
                "route {salesman} endpoint mismatch: expected {expected}, found {found:?}"
            ),
            MissingAssigned { salesman, id } => {
                write!(f, "route {salesman} misses assigned vertex {id}")
            }
            ForeignAssigned { salesman, id, owner } => write!(
                f,
                "route {salesman} visits vertex {id} assigned to salesman {owner}"
            ),
            RepeatedVertex { salesman, id } => {
                write!(f, "route {salesman} repeats vertex {id}")
            }
            FreeCoverage { id, times } => {
                write!(f, "free vertex {id} covered {times} times (expected 1)")
            }
            VertexNotCovered { id } => write!(f, "vertex {id} appears in no route"),
        }
    }
}

/// Checks the metric-graph invariants: symmetry, zero diagonal, finite
/// non-negative weights and the triangle inequality within [`REL_TOL`].
pub fn validate_metric(g: &MetricGraph) -> Vec<Violation> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    for i in 0..n {
        if g.weight(i, i) != 0.0 {
            out.push(Violation::NonZeroDiagonal { i });
        }
        for j in (i + 1)..n {
            let w = g.weight(i, j);
            if !w.is_finite() {
                out.push(Violation::NonFinite { i, j });
                continue;
            }
            if w < 0.0 {
                out.push(Violation::NegativeWeight { i, j });
            }
            if w != g.weight(j, i) {
                out.push(Violation::Asymmetric { i, j });
            }
        }
    }
    if !out.is_empty() {
        // Triangle checks on a broken matrix would drown the real problems.
        return out;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.weight(i, j);
            for via in 0..n {
                if via == i || via == j {
                    continue;
                }
                let detour = g.weight(i, via) + g.weight(via, j);
                if w > detour + REL_TOL * w.abs().max(detour.abs()).max(1.0) {
                    out.push(Violation::TriangleInequality { i, j, via });
                }
            }
        }
    }
    out
}

/// Checks every MetricGraph and CmpInstance invariant; empty result iff valid.
pub fn validate_instance(inst: &CmpInstance) -> Vec<Violation> {
    let mut out = validate_metric(&inst.graph);
    let n = inst.vertex_count();
    let k = inst.depots.len();

    if inst.terminals.len() != k {
        out.push(Violation::SizeMismatch { what: "|terminals| != |depots|" });
    }
    if inst.assigned.len() != k {
        out.push(Violation::SizeMismatch { what: "|assigned| != |depots|" });
    }
    if k == 0 {
        out.push(Violation::SizeMismatch { what: "k must be >= 1" });
        return out;
    }

    // membership table: which part claims each vertex
    let mut owner: Vec<Option<String>> = vec![None; n];
    let mut claim = |id: usize, part: String, out: &mut Vec<Violation>| {
        if id >= n {
            out.push(Violation::OutOfRange { what: "partition", id });
            return;
        }
        match &owner[id] {
            Some(first) => out.push(Violation::Overlap {
                id,
                first: first.clone(),
                second: part,
            }),
            None => owner[id] = Some(part),
        }
    };

    for (i, &d) in inst.depots.iter().enumerate() {
        claim(d, format!("depots[{i}]"), &mut out);
    }
    for (i, &t) in inst.terminals.iter().enumerate() {
        claim(t, format!("terminals[{i}]"), &mut out);
    }
    for (i, set) in inst.assigned.iter().enumerate() {
        for &a in set {
            claim(a, format!("assigned[{i}]"), &mut out);
        }
    }
    for &x in &inst.free {
        claim(x, "free".to_string(), &mut out);
    }
    for (id, o) in owner.iter().enumerate() {
        if o.is_none() {
            out.push(Violation::Uncovered { id });
        }
    }
    for i in 0..k.min(inst.terminals.len()) {
        if inst.depots[i] == inst.terminals[i] {
            out.push(Violation::DepotEqualsTerminal { salesman: i });
        }
    }
    out
}

/// Samples `n` points uniformly in the unit square and splits them into
/// depots, terminals, free and round-robin assigned sets. Deterministic in
/// `(n, k, frac_free, seed)`.
pub fn generate_euclidean(n: usize, k: usize, frac_free: f64, seed: u64) -> Result<CmpInstance> {
    if k == 0 {
        return Err(CoreError::ZeroSalesmen);
    }
    if n < 2 * k {
        return Err(CoreError::TooFewVertices { n, k });
    }
    if !(0.0..=1.0).contains(&frac_free) || !frac_free.is_finite() {
        return Err(CoreError::BadFracFree(frac_free));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        points.push([x, y]);
    }
    let graph = MetricGraph::from_points(&points);

    let depots: Vec<usize> = (0..k).collect();
    let terminals: Vec<usize> = (k..2 * k).collect();
    let targets: Vec<usize> = (2 * k..n).collect();
    let n_free = ((frac_free * targets.len() as f64).floor() as usize).min(targets.len());
    let free: Vec<usize> = targets[..n_free].to_vec();
    let mut assigned = vec![Vec::new(); k];
    for (slot, &v) in targets[n_free..].iter().enumerate() {
        assigned[slot % k].push(v);
    }

    Ok(CmpInstance { graph, points: Some(points), depots, terminals, assigned, free })
}

/// Sum of original edge weights over consecutive pairs of every route.
pub fn solution_cost(inst: &CmpInstance, routes: &RouteSet) -> Result<f64> {
    routes_cost(&inst.graph, &routes.routes)
}

pub(crate) fn routes_cost(g: &MetricGraph, routes: &[Vec<usize>]) -> Result<f64> {
    let n = g.vertex_count();
    let mut total = 0.0;
    for route in routes {
        for pair in route.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            if u >= n {
                return Err(CoreError::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(CoreError::VertexOutOfRange { id: v, n });
            }
            total += g.weight(u, v);
        }
    }
    Ok(total)
}

/// Checks all RouteSet invariants against the instance; empty iff feasible.
pub fn verify_solution(inst: &CmpInstance, routes: &RouteSet) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.vertex_count();
    let k = inst.salesman_count();
    if routes.routes.len() != k {
        out.push(Violation::SizeMismatch { what: "route count != k" });
        return out;
    }

    let mut seen = vec![0usize; n];
    let mut owner_of = vec![usize::MAX; n]; // assigned vertex -> salesman
    for (i, set) in inst.assigned.iter().enumerate() {
        for &a in set {
            if a < n {
                owner_of[a] = i;
            }
        }
    }

    for (i, route) in routes.routes.iter().enumerate() {
        if route.first().copied() != Some(inst.depots[i]) {
            out.push(Violation::BadEndpoint {
                salesman: i,
                expected: inst.depots[i],
                found: route.first().copied(),
            });
        }
        if route.last().copied() != Some(inst.terminals[i]) {
            out.push(Violation::BadEndpoint {
                salesman: i,
                expected: inst.terminals[i],
                found: route.last().copied(),
            });
        }
        let mut in_route = vec![false; n];
        for &v in route {
            if v >= n {
                out.push(Violation::OutOfRange { what: "route", id: v });
                continue;
            }
            if in_route[v] {
                out.push(Violation::RepeatedVertex { salesman: i, id: v });
            }
            in_route[v] = true;
            seen[v] += 1;
            let owner = owner_of[v];
            if owner != usize::MAX && owner != i {
                out.push(Violation::ForeignAssigned { salesman: i, id: v, owner });
            }
        }
        for &a in &inst.assigned[i] {
            if a < n && !in_route[a] {
                out.push(Violation::MissingAssigned { salesman: i, id: a });
            }
        }
    }

    for &fv in &inst.free {
        if fv < n && seen[fv] != 1 {
            out.push(Violation::FreeCoverage { id: fv, times: seen[fv] });
        }
    }
    for v in 0..n {
        if seen[v] == 0 {
            out.push(Violation::VertexNotCovered { id: v });
        }
    }
    out
}
