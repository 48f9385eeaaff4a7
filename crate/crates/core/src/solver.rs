//! The centralized three-phase approximation: per-salesman depot-terminal
//! Hamiltonian paths over S_i, per-depot Hamiltonian cycles over the spanning
//! forest of D ∪ F, and their combination into one route per salesman; plus
//! the multi-salesman TSP specialization that runs phase II alone.

use crate::error::{CoreError, Result};
use crate::graph::{double_edges, edges_cost, euler_path, euler_tour, mst, WeightOverlay};
use crate::instance::{routes_cost, CmpInstance, MetricGraph, RouteSet, REL_TOL};
use crate::labeled::{shortcut_path, LabeledPath};

/// Everything phase I produces for one salesman.
#[derive(Debug, Clone)]
pub struct SalesmanPath {
    /// Simple d_i -> t_i path covering S_i.
    pub path: LabeledPath,
    /// MST cost under the w(d_i, t_i) = 0 overlay.
    pub mst_overlay_cost: f64,
    /// Path cost under original weights.
    pub cost: f64,
}

/// The spanning forest over D ∪ F: one tree per salesman, tree i contains
/// depot d_i. Singleton trees have an empty edge list.
#[derive(Debug, Clone)]
pub struct SpanningForest {
    pub trees: Vec<Vec<(usize, usize)>>,
    pub tree_vertices: Vec<Vec<usize>>,
}

/// Everything phase II produces for one salesman.
#[derive(Debug, Clone)]
pub struct DepotCycle {
    /// Hamiltonian cycle over the tree's vertices, or None for singletons.
    pub cycle: Option<LabeledPath>,
    /// Tree cost under original weights (depot-depot edges are never inside
    /// a tree, so no overlay is involved).
    pub tree_cost: f64,
    /// Cycle cost under original weights.
    pub cost: f64,
}

/// Per-phase artifacts exposed for bound checks.
#[derive(Debug, Clone)]
pub struct PhaseArtifacts {
    pub paths: Vec<SalesmanPath>,
    pub forest: SpanningForest,
    pub cycles: Vec<DepotCycle>,
    /// Route costs c(H_i) under original weights.
    pub route_costs: Vec<f64>,
}

fn rel_le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Phase I: for each salesman, MST over S_i with (d_i, t_i) forced to weight
/// zero, doubled minus one copy of (d_i, t_i), Euler path d_i -> t_i, then
/// shortcut with terminal protection.
pub fn phase1(inst: &CmpInstance) -> Result<Vec<SalesmanPath>> {
    let run = |i: usize| -> Result<SalesmanPath> {
        let d = inst.depots[i];
        let t = inst.terminals[i];
        let set = inst.salesman_set(i);
        let overlay = WeightOverlay::with_zero_pairs([(d, t)]);
        let tree = mst(&set, &inst.graph, &overlay)?;
        let mst_overlay_cost = edges_cost(&tree, &inst.graph, &overlay);
        let mg = double_edges(&tree, Some((d, t)), &inst.graph)?;
        let ep = euler_path(&mg, d, t)?;
        let path = shortcut_path(&ep, true)?;
        let cost = path.cost(|a, b| inst.graph.weight(a, b));
        if !rel_le(cost, 2.0 * mst_overlay_cost + inst.graph.weight(d, t)) {
            return Err(CoreError::BoundViolation(format!(
                "c(P_{i}) = {cost} exceeds 2*c(MST_{i}) + w(d,t)"
            )));
        }
        Ok(SalesmanPath { path, mst_overlay_cost, cost })
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..inst.salesman_count()).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..inst.salesman_count()).map(run).collect()
    }
}

/// Builds the spanning forest over the given depot set plus free vertices:
/// MST with all depot-depot pairs overlaid to zero, then removal of the
/// exactly k-1 zero edges it must contain.
fn spanning_forest(
    g: &MetricGraph,
    depots: &[usize],
    free: &[usize],
) -> Result<SpanningForest> {
    let k = depots.len();
    let mut participants: Vec<usize> = depots.to_vec();
    participants.extend_from_slice(free);
    participants.sort_unstable();

    if participants.len() == 1 {
        return Ok(SpanningForest {
            trees: vec![Vec::new(); 1],
            tree_vertices: vec![vec![depots[0]]],
        });
    }

    let mut zero_pairs = Vec::new();
    for (a, &da) in depots.iter().enumerate() {
        for &db in depots.iter().skip(a + 1) {
            zero_pairs.push((da, db));
        }
    }
    let overlay = WeightOverlay::with_zero_pairs(zero_pairs);
    let tree = mst(&participants, g, &overlay)?;

    let (zero_edges, rest): (Vec<_>, Vec<_>) =
        tree.into_iter().partition(|&(u, v)| overlay.is_zeroed(u, v));
    if zero_edges.len() != k - 1 {
        return Err(CoreError::BoundViolation(format!(
            "expected exactly {} zero-overlay edges in the phase-II MST, found {}",
            k - 1,
            zero_edges.len()
        )));
    }

    // split the remaining edges into components, one depot each
    let mut comp: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &v in &participants {
        comp.insert(v, v);
    }
    fn find(comp: &mut std::collections::BTreeMap<usize, usize>, x: usize) -> usize {
        let p = comp[&x];
        if p == x {
            return x;
        }
        let root = find(comp, p);
        comp.insert(x, root);
        root
    }
    for &(u, v) in &rest {
        let (ru, rv) = (find(&mut comp, u), find(&mut comp, v));
        if ru != rv {
            comp.insert(ru, rv);
        }
    }

    let mut trees = vec![Vec::new(); k];
    let mut tree_vertices = vec![Vec::new(); k];
    let mut root_to_tree: std::collections::BTreeMap<usize, usize> =
        std::collections::BTreeMap::new();
    for (i, &d) in depots.iter().enumerate() {
        let r = find(&mut comp, d);
        if root_to_tree.insert(r, i).is_some() {
            return Err(CoreError::BoundViolation(
                "two depots share a tree after zero-edge removal".into(),
            ));
        }
    }
    for &v in &participants {
        let r = find(&mut comp, v);
        let Some(&i) = root_to_tree.get(&r) else {
            return Err(CoreError::BoundViolation(format!(
                "vertex {v} ended up in a depot-less tree"
            )));
        };
        tree_vertices[i].push(v);
    }
    for &(u, v) in &rest {
        let r = find(&mut comp, u);
        trees[root_to_tree[&r]].push((u, v));
    }
    Ok(SpanningForest { trees, tree_vertices })
}

/// Phase II: spanning forest over D ∪ F, then each tree with at least two
/// vertices is doubled, Euler-toured from its depot and shortcut into a
/// Hamiltonian cycle.
pub fn phase2(inst: &CmpInstance) -> Result<(SpanningForest, Vec<DepotCycle>)> {
    phase2_over(&inst.graph, &inst.depots, &inst.free)
}

fn phase2_over(
    g: &MetricGraph,
    depots: &[usize],
    free: &[usize],
) -> Result<(SpanningForest, Vec<DepotCycle>)> {
    let forest = spanning_forest(g, depots, free)?;
    let mut cycles = Vec::with_capacity(depots.len());
    let mut total_cycle = 0.0;
    let mut total_tree = 0.0;
    for (i, tree) in forest.trees.iter().enumerate() {
        let tree_cost = edges_cost(tree, g, &WeightOverlay::none());
        let cycle = if tree.is_empty() {
            None
        } else {
            let mg = double_edges(tree, None, g)?;
            let tour = euler_tour(&mg, depots[i])?;
            Some(shortcut_path(&tour, false)?)
        };
        let cost = cycle.as_ref().map_or(0.0, |c| c.cost(|a, b| g.weight(a, b)));
        total_cycle += cost;
        total_tree += tree_cost;
        cycles.push(DepotCycle { cycle, tree_cost, cost });
    }
    if !rel_le(total_cycle, 2.0 * total_tree) {
        return Err(CoreError::BoundViolation(format!(
            "sum c(C_i) = {total_cycle} exceeds 2 * sum c(T_i) = {}",
            2.0 * total_tree
        )));
    }
    Ok((forest, cycles))
}

/// Phase III: traverse C_i from d_i back to d_i, continue along P_i, and
/// shortcut the duplicate depot. With an empty C_i the route is P_i itself.
pub fn phase3(
    inst: &CmpInstance,
    paths: &[SalesmanPath],
    cycles: &[DepotCycle],
) -> Result<RouteSet> {
    let mut routes = Vec::with_capacity(paths.len());
    for (i, (p, c)) in paths.iter().zip(cycles).enumerate() {
        let path_seq = p.path.vertices()?;
        let route = match &c.cycle {
            None => path_seq,
            Some(cy) => {
                let mut cycle_seq = cy.vertices()?;
                // cycle d .. d  +  path d .. t, with the duplicate depot
                // shortcut: drop the closing d and the opening d
                cycle_seq.pop();
                cycle_seq.extend_from_slice(&path_seq[1..]);
                cycle_seq
            }
        };
        let route_cost = routes_cost(&inst.graph, std::slice::from_ref(&route))?;
        if !rel_le(route_cost, p.cost + c.cost) {
            return Err(CoreError::BoundViolation(format!(
                "c(H_{i}) = {route_cost} exceeds c(P_{i}) + c(C_{i}) = {}",
                p.cost + c.cost
            )));
        }
        routes.push(route);
    }
    RouteSet::new(inst, routes)
}

/// The full algorithm: phase1 -> phase2 -> phase3. Also re-checks the
/// per-phase deterministic bounds and returns the artifacts for audits.
pub fn solve_cmp(inst: &CmpInstance) -> Result<(RouteSet, PhaseArtifacts)> {
    let violations = crate::instance::validate_instance(inst);
    if !violations.is_empty() {
        return Err(CoreError::InvalidInstance(format!(
            "{} violation(s), first: {}",
            violations.len(),
            violations[0]
        )));
    }
    let paths = phase1(inst)?;
    let (forest, cycles) = phase2(inst)?;
    let routes = phase3(inst, &paths, &cycles)?;
    let route_costs = routes
        .routes
        .iter()
        .map(|r| routes_cost(&inst.graph, std::slice::from_ref(r)))
        .collect::<Result<Vec<_>>>()?;
    let artifacts = PhaseArtifacts { paths, forest, cycles, route_costs };
    Ok((routes, artifacts))
}

/// Closed tours produced by the k-TSP specialization, plus the phase-II
/// artifacts backing its bound.
#[derive(Debug, Clone)]
pub struct KtspSolution {
    /// One closed tour per depot: `[d_i, .., d_i]`, or `[d_i]` when the
    /// depot's tree is a singleton.
    pub tours: Vec<Vec<usize>>,
    pub total_cost: f64,
    pub forest: SpanningForest,
    pub cycles: Vec<DepotCycle>,
}

/// The d_i = t_i, A_i = ∅ reduction: phase I is skipped entirely and the
/// phase-II cycles over D ∪ F with F = V - D are the tours.
pub fn solve_ktsp(graph: &MetricGraph, depots: &[usize]) -> Result<KtspSolution> {
    let n = graph.vertex_count();
    if depots.is_empty() {
        return Err(CoreError::ZeroSalesmen);
    }
    let mut seen = vec![false; n];
    for &d in depots {
        if d >= n {
            return Err(CoreError::VertexOutOfRange { id: d, n });
        }
        if seen[d] {
            return Err(CoreError::InvalidInstance(format!("duplicate depot {d}")));
        }
        seen[d] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
    let (forest, cycles) = phase2_over(graph, depots, &free)?;
    let mut tours = Vec::with_capacity(depots.len());
    let mut total_cost = 0.0;
    for (i, c) in cycles.iter().enumerate() {
        let tour = match &c.cycle {
            None => vec![depots[i]],
            Some(cy) => cy.vertices()?,
        };
        total_cost += c.cost;
        tours.push(tour);
    }
    Ok(KtspSolution { tours, total_cost, forest, cycles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_euclidean, verify_solution, MetricGraph};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phase1_no_assigned_is_single_edge() {
        let inst = generate_euclidean(2, 1, 0.0, 3).unwrap();
        let p = phase1(&inst).unwrap();
        assert_eq!(p[0].path.vertices().unwrap(), vec![0, 1]);
    }

    #[test]
    fn phase1_hand_executable_triangle() {
        // S = {d, t, a} with w(d,a) = w(t,a) = 1: the overlay forces (d,t)
        // into the MST, doubling minus one copy gives d-a-d-t, and the
        // shortcut yields d-a-t with cost 2.
        let g = MetricGraph::from_matrix(vec![
            vec![0.0, 1.5, 1.0],
            vec![1.5, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let inst = CmpInstance {
            graph: g,
            points: None,
            depots: vec![0],
            terminals: vec![1],
            assigned: vec![vec![2]],
            free: vec![],
        };
        let p = phase1(&inst).unwrap();
        assert_eq!(p[0].path.vertices().unwrap(), vec![0, 2, 1]);
        assert!((p[0].cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn phase2_no_free_vertices() {
        let inst = generate_euclidean(6, 3, 0.0, 5).unwrap();
        let (forest, cycles) = phase2(&inst).unwrap();
        assert_eq!(forest.trees.len(), 3);
        for (t, c) in forest.trees.iter().zip(&cycles) {
            assert!(t.is_empty());
            assert!(c.cycle.is_none());
        }
    }

    #[test]
    fn phase2_single_free_vertex_cycle() {
        let g = MetricGraph::from_matrix(vec![
            vec![0.0, 3.0, 2.0],
            vec![3.0, 0.0, 2.0],
            vec![2.0, 2.0, 0.0],
        ])
        .unwrap();
        let inst = CmpInstance {
            graph: g,
            points: None,
            depots: vec![0],
            terminals: vec![1],
            assigned: vec![vec![]],
            free: vec![2],
        };
        let (_, cycles) = phase2(&inst).unwrap();
        let c = cycles[0].cycle.as_ref().unwrap();
        assert_eq!(c.vertices().unwrap(), vec![0, 2, 0]);
        assert!((cycles[0].cost - 4.0).abs() < 1e-12);
    }

    #[test]
    fn phase3_hand_executable() {
        // C = d-f-d, P = d-a-t  =>  H = d-f-a-t
        let pts = vec![[0.0, 0.0], [3.0, 0.0], [1.0, 0.5], [0.0, 1.0]];
        let g = MetricGraph::from_points(&pts);
        let inst = CmpInstance {
            graph: g,
            points: Some(pts),
            depots: vec![0],
            terminals: vec![1],
            assigned: vec![vec![2]],
            free: vec![3],
        };
        let (routes, art) = solve_cmp(&inst).unwrap();
        assert_eq!(art.cycles[0].cycle.as_ref().unwrap().vertices().unwrap(), vec![0, 3, 0]);
        assert_eq!(art.paths[0].path.vertices().unwrap(), vec![0, 2, 1]);
        assert_eq!(routes.routes[0], vec![0, 3, 2, 1]);
    }

    #[test]
    fn no_targets_instance_is_depot_terminal_edges() {
        let inst = generate_euclidean(6, 3, 0.5, 9).unwrap();
        let (routes, _) = solve_cmp(&inst).unwrap();
        for (i, r) in routes.routes.iter().enumerate() {
            assert_eq!(r, &vec![inst.depots[i], inst.terminals[i]]);
        }
    }

    #[test]
    fn random_instances_feasible_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..500 {
            let n = rng.gen_range(4..12);
            let k = rng.gen_range(1..=(n / 2).min(3));
            let frac: f64 = rng.gen();
            let inst = generate_euclidean(n, k, frac, rng.gen()).unwrap();
            let (routes, art) = solve_cmp(&inst).unwrap();
            let v = verify_solution(&inst, &routes);
            assert!(v.is_empty(), "case {case}: {v:?}");
            // per-phase bounds re-checked from the artifacts
            for (i, p) in art.paths.iter().enumerate() {
                let w_dt = inst.graph.weight(inst.depots[i], inst.terminals[i]);
                assert!(p.cost <= 2.0 * p.mst_overlay_cost + w_dt + 1e-9);
            }
            let sum_c: f64 = art.cycles.iter().map(|c| c.cost).sum();
            let sum_t: f64 = art.cycles.iter().map(|c| c.tree_cost).sum();
            assert!(sum_c <= 2.0 * sum_t + 1e-9);
            for (i, &hc) in art.route_costs.iter().enumerate() {
                assert!(hc <= art.paths[i].cost + art.cycles[i].cost + 1e-9);
            }
        }
    }

    #[test]
    fn ktsp_trivial_cases() {
        // every city a depot: k trivial tours of cost 0
        let inst = generate_euclidean(4, 2, 0.0, 1).unwrap();
        let sol = solve_ktsp(&inst.graph, &[0, 1, 2, 3]).unwrap();
        assert_eq!(sol.total_cost, 0.0);
        assert!(sol.tours.iter().all(|t| t.len() == 1));

        // k=1 equilateral triangle, side 1: tour cost <= 4 (2 * MST = 4)
        let g = MetricGraph::from_matrix(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let sol = solve_ktsp(&g, &[0]).unwrap();
        assert_eq!(sol.tours[0].first(), Some(&0));
        assert_eq!(sol.tours[0].last(), Some(&0));
        assert!(sol.total_cost <= 4.0 + 1e-12);
        // every city on the tour exactly once
        let mut body = sol.tours[0][..sol.tours[0].len() - 1].to_vec();
        body.sort_unstable();
        assert_eq!(body, vec![0, 1, 2]);
    }

    #[test]
    fn ktsp_rejects_duplicate_depot() {
        let inst = generate_euclidean(4, 1, 0.0, 1).unwrap();
        assert!(solve_ktsp(&inst.graph, &[0, 0]).is_err());
    }
}
