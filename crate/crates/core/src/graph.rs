//! Centralized building blocks for the solver phases: exact MST with
//! deterministic tie-breaking, edge doubling into multigraphs, and Euler
//! path/tour construction.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::instance::MetricGraph;
use crate::labeled::LabeledPath;

/// Total order on edges: effective weight, then overlay rank (forced-zero
/// pairs sort before ordinary zero-weight edges), then canonical edge id.
/// Every MST and every GHS run compares edges with this key, which is what
/// makes centralized and distributed outputs identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeKey {
    pub weight: f64,
    pub rank: u8,
    pub id: u64,
}

impl Eq for EdgeKey {}

impl PartialOrd for EdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.rank.cmp(&other.rank))
            .then(self.id.cmp(&other.id))
    }
}

/// Zero-weight reassignments passed to MST construction. The overlay never
/// mutates the instance: final route costs always use original weights.
#[derive(Debug, Clone, Default)]
pub struct WeightOverlay {
    zero_pairs: Vec<(usize, usize)>,
}

impl WeightOverlay {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_zero_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut zero_pairs: Vec<(usize, usize)> =
            pairs.into_iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
        zero_pairs.sort_unstable();
        zero_pairs.dedup();
        Self { zero_pairs }
    }

    pub fn is_zeroed(&self, u: usize, v: usize) -> bool {
        let p = if u < v { (u, v) } else { (v, u) };
        self.zero_pairs.binary_search(&p).is_ok()
    }

    pub fn effective_weight(&self, g: &MetricGraph, u: usize, v: usize) -> f64 {
        if self.is_zeroed(u, v) {
            0.0
        } else {
            g.weight(u, v)
        }
    }

    pub fn key(&self, g: &MetricGraph, u: usize, v: usize) -> EdgeKey {
        EdgeKey {
            weight: self.effective_weight(g, u, v),
            rank: if self.is_zeroed(u, v) { 0 } else { 1 },
            id: g.edge_id(u, v),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Exact MST over the induced complete subgraph on `vertices`, by Kruskal
/// with union-find. Edges compare by [`EdgeKey`], so the tree is unique.
pub fn mst(
    vertices: &[usize],
    g: &MetricGraph,
    overlay: &WeightOverlay,
) -> Result<Vec<(usize, usize)>> {
    if vertices.is_empty() {
        return Err(CoreError::EmptyVertexSet);
    }
    let mut edges: Vec<(EdgeKey, usize, usize)> = Vec::new();
    for (a, &u) in vertices.iter().enumerate() {
        for &v in vertices.iter().skip(a + 1) {
            edges.push((overlay.key(g, u, v), u, v));
        }
    }
    edges.sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        index.insert(v, i);
    }
    let mut uf = UnionFind::new(vertices.len());
    let mut out = Vec::with_capacity(vertices.len().saturating_sub(1));
    for (_, u, v) in edges {
        if uf.union(index[&u], index[&v]) {
            out.push((u, v));
            if out.len() + 1 == vertices.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Sum of edge weights under an overlay (or original weights with
/// [`WeightOverlay::none`]).
pub fn edges_cost(edges: &[(usize, usize)], g: &MetricGraph, overlay: &WeightOverlay) -> f64 {
    edges.iter().map(|&(u, v)| overlay.effective_weight(g, u, v)).sum()
}

/// A multiset of edges. Duplicate copies carry distinct `copy_id`s: the
/// second copy of an edge is offset by the total pair count of the original
/// graph, so copy ids stay globally unique and deterministic.
#[derive(Debug, Clone)]
pub struct MultiGraph {
    pub edges: Vec<MultiEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub copy_id: u64,
}

impl MultiGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.edges.iter().flat_map(|e| [e.u, e.v]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    fn odd_vertices(&self) -> Vec<usize> {
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.edges {
            *deg.entry(e.u).or_default() += 1;
            *deg.entry(e.v).or_default() += 1;
        }
        deg.into_iter().filter(|&(_, d)| d % 2 == 1).map(|(v, _)| v).collect()
    }
}

/// Doubles every tree edge into two copies with distinct copy ids. When
/// `drop_one_copy_of` is given that pair keeps only its offset copy, leaving
/// exactly its two endpoints with odd degree. The kept copy is the offset
/// one so that a smallest-copy-id walk starting at an endpoint of the drop
/// pair defers it until the rest of that endpoint's subtrees are consumed,
/// which keeps the greedy Euler walk splice-free on doubled trees.
pub fn double_edges(
    tree: &[(usize, usize)],
    drop_one_copy_of: Option<(usize, usize)>,
    g: &MetricGraph,
) -> Result<MultiGraph> {
    let offset = g.pair_count();
    let canon = |p: (usize, usize)| if p.0 < p.1 { p } else { (p.1, p.0) };
    if let Some(drop) = drop_one_copy_of {
        if !tree.iter().any(|&e| canon(e) == canon(drop)) {
            return Err(CoreError::DropPairNotInTree(drop.0, drop.1));
        }
    }
    let drop = drop_one_copy_of.map(canon);
    let mut edges = Vec::with_capacity(tree.len() * 2);
    for &(u, v) in tree {
        let id = g.edge_id(u, v);
        let w = g.weight(u, v);
        if drop != Some(canon((u, v))) {
            edges.push(MultiEdge { u, v, weight: w, copy_id: id });
        }
        edges.push(MultiEdge { u, v, weight: w, copy_id: id + offset });
    }
    edges.sort_unstable_by_key(|e| e.copy_id);
    Ok(MultiGraph { edges })
}

/// Euler path from `start` to `end`, consuming every multigraph edge exactly
/// once. Deterministic: at each step the unconsumed incident copy with the
/// smallest copy id is chosen; when the walk closes early, the first walk
/// vertex with spare edges is expanded in place (Hierholzer splicing).
pub fn euler_path(g: &MultiGraph, start: usize, end: usize) -> Result<LabeledPath> {
    let odd = g.odd_vertices();
    if start == end {
        return Err(CoreError::MalformedPath(
            "euler_path requires distinct endpoints; use euler_tour".into(),
        ));
    }
    if odd != {
        let mut s = vec![start, end];
        s.sort_unstable();
        s
    } {
        return Err(CoreError::EulerParity { kind: "path", odd });
    }
    let seq = euler_walk(g, start)?;
    let p = LabeledPath::from_vertices(&seq)?;
    debug_assert_eq!(p.end, end);
    Ok(p)
}

/// Euler tour starting and ending at `start`.
pub fn euler_tour(g: &MultiGraph, start: usize) -> Result<LabeledPath> {
    let odd = g.odd_vertices();
    if !odd.is_empty() {
        return Err(CoreError::EulerParity { kind: "tour", odd });
    }
    let seq = euler_walk(g, start)?;
    LabeledPath::from_vertices(&seq)
}

fn euler_walk(g: &MultiGraph, start: usize) -> Result<Vec<usize>> {
    // per-vertex sorted map: copy_id -> other endpoint
    let mut incident: BTreeMap<usize, BTreeMap<u64, usize>> = BTreeMap::new();
    for e in &g.edges {
        incident.entry(e.u).or_default().insert(e.copy_id, e.v);
        incident.entry(e.v).or_default().insert(e.copy_id, e.u);
    }
    if !incident.contains_key(&start) {
        if g.edges.is_empty() {
            return Ok(vec![start]);
        }
        return Err(CoreError::Disconnected);
    }

    let mut remaining = g.edges.len();
    let greedy = |incident: &mut BTreeMap<usize, BTreeMap<u64, usize>>,
                  from: usize,
                  remaining: &mut usize| {
        let mut walk = vec![from];
        let mut cur = from;
        loop {
            let Some((&cid, &next)) = incident.get(&cur).and_then(|m| m.iter().next()) else {
                break;
            };
            incident.get_mut(&cur).unwrap().remove(&cid);
            incident.get_mut(&next).unwrap().remove(&cid);
            *remaining -= 1;
            walk.push(next);
            cur = next;
        }
        walk
    };

    let mut walk = greedy(&mut incident, start, &mut remaining);
    while remaining > 0 {
        // splice at the first walk position with spare edges
        let pos = walk
            .iter()
            .position(|v| incident.get(v).map(|m| !m.is_empty()).unwrap_or(false))
            .ok_or(CoreError::Disconnected)?;
        let anchor = walk[pos];
        let sub = greedy(&mut incident, anchor, &mut remaining);
        if *sub.last().unwrap() != anchor {
            return Err(CoreError::EulerParity {
                kind: "splice",
                odd: vec![anchor, *sub.last().unwrap()],
            });
        }
        walk.splice(pos..=pos, sub);
    }
    Ok(walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::MetricGraph;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph_from(mat: Vec<Vec<f64>>) -> MetricGraph {
        MetricGraph::from_matrix(mat).unwrap()
    }

    #[test]
    fn triangle_mst() {
        let g = graph_from(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ]);
        let t = mst(&[0, 1, 2], &g, &WeightOverlay::none()).unwrap();
        assert_eq!(t, vec![(0, 1), (1, 2)]);
        assert_eq!(edges_cost(&t, &g, &WeightOverlay::none()), 3.0);
    }

    #[test]
    fn equal_weight_tie_break_by_edge_id() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let g = graph_from(rows);
        let t = mst(&[0, 1, 2, 3], &g, &WeightOverlay::none()).unwrap();
        // smallest edge ids: (0,1), (0,2), (0,3)
        assert_eq!(t, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn forced_zero_pair_always_included() {
        let g = graph_from(vec![
            vec![0.0, 9.0, 1.0],
            vec![9.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        let ov = WeightOverlay::with_zero_pairs([(0, 1)]);
        let t = mst(&[0, 1, 2], &g, &ov).unwrap();
        assert!(t.contains(&(0, 1)));
    }

    /// Exhaustive minimum over all labeled spanning trees via Prüfer
    /// sequences: the independent oracle for Kruskal.
    fn prufer_min_cost(vertices: &[usize], g: &MetricGraph, ov: &WeightOverlay) -> f64 {
        let n = vertices.len();
        assert!(n >= 2);
        if n == 2 {
            return ov.effective_weight(g, vertices[0], vertices[1]);
        }
        let mut best = f64::INFINITY;
        let seq_len = n - 2;
        let total = (n as u64).pow(seq_len as u32);
        for code in 0..total {
            // decode the Prüfer sequence
            let mut seq = Vec::with_capacity(seq_len);
            let mut c = code;
            for _ in 0..seq_len {
                seq.push((c % n as u64) as usize);
                c /= n as u64;
            }
            let mut deg = vec![1usize; n];
            for &s in &seq {
                deg[s] += 1;
            }
            let mut used = vec![false; n];
            let mut cost = 0.0;
            for &s in &seq {
                let leaf = (0..n).find(|&j| deg[j] == 1 && !used[j]).unwrap();
                cost += ov.effective_weight(g, vertices[leaf], vertices[s]);
                used[leaf] = true;
                deg[s] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&j| !used[j]).collect();
            cost += ov.effective_weight(g, vertices[rest[0]], vertices[rest[1]]);
            if cost < best {
                best = cost;
            }
        }
        best
    }

    #[test]
    fn kruskal_matches_prufer_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let pts: Vec<[f64; 2]> = (0..8).map(|_| [rng.gen(), rng.gen()]).collect();
            let g = MetricGraph::from_points(&pts);
            let ov = WeightOverlay::none();
            let vs: Vec<usize> = (0..8).collect();
            let t = mst(&vs, &g, &ov).unwrap();
            let kruskal_cost = edges_cost(&t, &g, &ov);
            let brute = prufer_min_cost(&vs, &g, &ov);
            assert!((kruskal_cost - brute).abs() <= 1e-9 * brute.max(1.0));
        }
    }

    #[test]
    fn double_edges_parity() {
        let g = graph_from(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        // tree {(d,t),(d,a)} with d=0, t=1, a=2
        let tree = vec![(0, 1), (0, 2)];
        let mg = double_edges(&tree, Some((0, 1)), &g).unwrap();
        assert_eq!(mg.degree(0), 3);
        assert_eq!(mg.degree(1), 1);
        assert_eq!(mg.degree(2), 2);

        let all = double_edges(&tree, None, &g).unwrap();
        for v in 0..3 {
            assert_eq!(all.degree(v) % 2, 0);
        }

        assert!(matches!(
            double_edges(&[(0, 2)], Some((0, 1)), &g),
            Err(CoreError::DropPairNotInTree(0, 1))
        ));
    }

    #[test]
    fn euler_path_on_phase1_multigraph() {
        let g = graph_from(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]);
        let mg = double_edges(&[(0, 1), (0, 2)], Some((0, 1)), &g).unwrap();
        let p = euler_path(&mg, 0, 1).unwrap();
        assert_eq!(p.vertices().unwrap(), vec![0, 2, 0, 1]);
        p.validate().unwrap();
    }

    #[test]
    fn euler_tour_single_doubled_edge() {
        let g = graph_from(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let mg = double_edges(&[(0, 1)], None, &g).unwrap();
        let t = euler_tour(&mg, 0).unwrap();
        assert_eq!(t.vertices().unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn euler_rejects_bad_parity() {
        let g = graph_from(vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ]);
        // star: 3 single edges -> 4 odd-degree vertices
        let mg = MultiGraph {
            edges: vec![
                MultiEdge { u: 0, v: 1, weight: 1.0, copy_id: 0 },
                MultiEdge { u: 0, v: 2, weight: 1.0, copy_id: 1 },
                MultiEdge { u: 0, v: 3, weight: 1.0, copy_id: 2 },
            ],
        };
        assert!(matches!(euler_path(&mg, 0, 1), Err(CoreError::EulerParity { .. })));
        let _ = g;
    }

    #[test]
    fn euler_consumes_every_edge_on_random_doubled_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..10);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            let g = MetricGraph::from_points(&pts);
            let vs: Vec<usize> = (0..n).collect();
            let t = mst(&vs, &g, &WeightOverlay::none()).unwrap();
            let mg = double_edges(&t, None, &g).unwrap();
            let tour = euler_tour(&mg, 0).unwrap();
            let seq = tour.vertices().unwrap();
            assert_eq!(seq.len(), mg.edges.len() + 1);
            // multiset of traversed pairs equals the multigraph's edges
            let mut walked: Vec<(usize, usize)> = seq
                .windows(2)
                .map(|w| if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
                .collect();
            walked.sort_unstable();
            let mut expect: Vec<(usize, usize)> = mg
                .edges
                .iter()
                .map(|e| if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) })
                .collect();
            expect.sort_unstable();
            assert_eq!(walked, expect);
        }
    }
}
