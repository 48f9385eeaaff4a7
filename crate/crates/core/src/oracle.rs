//! Exponential-time exact solvers used as ground truth for approximation
//! ratio checks at desk scale. Two independent routes are kept for every
//! quantity: plain permutation enumeration is the reference, a Held-Karp
//! style subset DP is the fast cross-check. Both accumulate path costs
//! left-to-right, so their minima range over identical floating-point values
//! and must agree bitwise.

use crate::error::{CoreError, Result};
use crate::instance::{CmpInstance, MetricGraph, RouteSet};

/// Enumeration guard, enforced before any enumeration begins.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_vertices: usize,
    pub max_states: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_vertices: 9, max_states: 500_000_000 }
    }
}

/// Which execution strategy batch-style enumerations use. The parallel
/// variant reduces with a total order on (cost, candidate index), so the
/// reported optimum is identical to the sequential one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Minimum-cost simple path visiting all `vertices` from `start` to `end`,
/// by permutation enumeration. Returns (cost, path).
pub fn exact_hamiltonian_path(
    vertices: &[usize],
    g: &MetricGraph,
    start: usize,
    end: usize,
    budget: &OracleBudget,
) -> Result<(f64, Vec<usize>)> {
    if !vertices.contains(&start) || !vertices.contains(&end) || start == end {
        return Err(CoreError::InvalidInstance(
            "start and end must be distinct members of the vertex set".into(),
        ));
    }
    if vertices.len() > budget.max_vertices {
        return Err(CoreError::BudgetExceeded(format!(
            "{} vertices > budget {}",
            vertices.len(),
            budget.max_vertices
        )));
    }
    let middles: Vec<usize> =
        vertices.iter().copied().filter(|&v| v != start && v != end).collect();
    if factorial(middles.len()) > budget.max_states {
        return Err(CoreError::BudgetExceeded("permutation count".into()));
    }
    let mut best = f64::INFINITY;
    let mut best_path = Vec::new();
    for_each_permutation(&middles, &mut |perm| {
        let mut cost = 0.0;
        let mut prev = start;
        for &m in perm {
            cost += g.weight(prev, m);
            prev = m;
        }
        cost += g.weight(prev, end);
        if cost < best {
            best = cost;
            best_path = std::iter::once(start)
                .chain(perm.iter().copied())
                .chain(std::iter::once(end))
                .collect();
        }
    });
    Ok((best, best_path))
}

/// Held-Karp path DP over the same vertex set; the independent cross-check
/// for [`exact_hamiltonian_path`].
pub fn exact_hamiltonian_path_dp(
    vertices: &[usize],
    g: &MetricGraph,
    start: usize,
    end: usize,
) -> Result<f64> {
    if !vertices.contains(&start) || !vertices.contains(&end) || start == end {
        return Err(CoreError::InvalidInstance(
            "start and end must be distinct members of the vertex set".into(),
        ));
    }
    let middles: Vec<usize> =
        vertices.iter().copied().filter(|&v| v != start && v != end).collect();
    Ok(held_karp_path(g, start, end, &middles, usize_mask(middles.len())))
}

fn usize_mask(len: usize) -> usize {
    (1usize << len) - 1
}

/// dp over subsets of `middles`: cheapest start -> (subset, last) path, then
/// close onto `end`. Costs accumulate prefix + edge, matching enumeration.
fn held_karp_path(g: &MetricGraph, start: usize, end: usize, middles: &[usize], full: usize) -> f64 {
    let m = middles.len();
    if m == 0 {
        return g.weight(start, end);
    }
    let mut dp = vec![vec![f64::INFINITY; m]; full + 1];
    for (j, &v) in middles.iter().enumerate() {
        dp[1 << j][j] = g.weight(start, v);
    }
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask][j];
            if !cur.is_finite() {
                continue;
            }
            for nj in 0..m {
                if mask & (1 << nj) != 0 {
                    continue;
                }
                let next = mask | (1 << nj);
                let cand = cur + g.weight(middles[j], middles[nj]);
                if cand < dp[next][nj] {
                    dp[next][nj] = cand;
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    for (j, &v) in middles.iter().enumerate() {
        let cand = dp[full][j] + g.weight(v, end);
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Heap's algorithm; calls `f` on every permutation of `items`.
fn for_each_permutation(items: &[usize], f: &mut impl FnMut(&[usize])) {
    let mut a = items.to_vec();
    let n = a.len();
    if n == 0 {
        f(&a);
        return;
    }
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Per-salesman table: for every subset of F, the best Hamiltonian-path cost
/// (and path) over {d_i, t_i} ∪ A_i ∪ subset. Built by enumeration.
struct PathTable {
    cost: Vec<f64>,
    path: Vec<Vec<usize>>,
}

fn build_path_tables(inst: &CmpInstance, budget: &OracleBudget) -> Result<Vec<PathTable>> {
    let f = &inst.free;
    let nf = f.len();
    let k = inst.salesman_count();
    let mut states: u128 = (k as u128).saturating_pow(nf as u32);
    for i in 0..k {
        for mask in 0..(1usize << nf) {
            states = states
                .saturating_add(factorial(inst.assigned[i].len() + mask.count_ones() as usize));
        }
    }
    if inst.vertex_count() > budget.max_vertices {
        return Err(CoreError::BudgetExceeded(format!(
            "{} vertices > budget {}",
            inst.vertex_count(),
            budget.max_vertices
        )));
    }
    if states > budget.max_states {
        return Err(CoreError::BudgetExceeded(format!("{states} states")));
    }

    let mut tables = Vec::with_capacity(k);
    for i in 0..k {
        let (d, t) = (inst.depots[i], inst.terminals[i]);
        let mut cost = vec![f64::INFINITY; 1 << nf];
        let mut path = vec![Vec::new(); 1 << nf];
        for mask in 0..(1usize << nf) {
            let mut middles = inst.assigned[i].clone();
            for (j, &fv) in f.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    middles.push(fv);
                }
            }
            let mut best = f64::INFINITY;
            let mut best_path = Vec::new();
            for_each_permutation(&middles, &mut |perm| {
                let mut c = 0.0;
                let mut prev = d;
                for &mv in perm {
                    c += inst.graph.weight(prev, mv);
                    prev = mv;
                }
                c += inst.graph.weight(prev, t);
                if c < best {
                    best = c;
                    best_path = std::iter::once(d)
                        .chain(perm.iter().copied())
                        .chain(std::iter::once(t))
                        .collect();
                }
            });
            cost[mask] = best;
            path[mask] = best_path;
        }
        tables.push(PathTable { cost, path });
    }
    Ok(tables)
}

/// Decodes assignment `code` (mixed radix k^|F|) into per-salesman subset
/// masks of F.
fn assignment_masks(code: u64, k: usize, nf: usize) -> Vec<usize> {
    let mut masks = vec![0usize; k];
    let mut c = code;
    for j in 0..nf {
        masks[(c % k as u64) as usize] |= 1 << j;
        c /= k as u64;
    }
    masks
}

/// Exact CMP optimum by exhaustion: every assignment of F vertices to the k
/// salesmen, and per salesman every ordering of A_i plus its share of F.
pub fn exact_cmp(
    inst: &CmpInstance,
    budget: &OracleBudget,
    exec: Execution,
) -> Result<(RouteSet, f64)> {
    let tables = build_path_tables(inst, budget)?;
    let k = inst.salesman_count();
    let nf = inst.free.len();
    let total: u64 = (k as u64).pow(nf as u32);

    let eval = |code: u64| -> (f64, u64) {
        let masks = assignment_masks(code, k, nf);
        let mut cost = 0.0;
        for (i, &m) in masks.iter().enumerate() {
            cost += tables[i].cost[m];
        }
        (cost, code)
    };
    let better = |a: (f64, u64), b: (f64, u64)| -> (f64, u64) {
        if a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1) {
            a
        } else {
            b
        }
    };

    let (best_cost, best_code) = match exec {
        Execution::Sequential => {
            (0..total).map(eval).fold((f64::INFINITY, 0), better)
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..total)
                .into_par_iter()
                .map(eval)
                .reduce(|| (f64::INFINITY, 0), better)
        }
    };

    let masks = assignment_masks(best_code, k, nf);
    let routes: Vec<Vec<usize>> =
        masks.iter().enumerate().map(|(i, &m)| tables[i].path[m].clone()).collect();
    let rs = RouteSet::new(inst, routes)?;
    Ok((rs, best_cost))
}

/// Independent CMP optimum: Held-Karp per-salesman tables combined by a
/// subset DP over assignments of F.
pub fn exact_cmp_dp(inst: &CmpInstance, budget: &OracleBudget) -> Result<f64> {
    if inst.vertex_count() > budget.max_vertices {
        return Err(CoreError::BudgetExceeded(format!(
            "{} vertices > budget {}",
            inst.vertex_count(),
            budget.max_vertices
        )));
    }
    let f = &inst.free;
    let nf = f.len();
    let k = inst.salesman_count();
    let full = usize_mask(nf);

    // cost_i[mask]: best path over {d_i,t_i} ∪ A_i ∪ (F restricted to mask)
    let mut tables = Vec::with_capacity(k);
    for i in 0..k {
        let (d, t) = (inst.depots[i], inst.terminals[i]);
        let mut cost = vec![f64::INFINITY; full + 1];
        for mask in 0..=full {
            let mut middles = inst.assigned[i].clone();
            for (j, &fv) in f.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    middles.push(fv);
                }
            }
            cost[mask] = held_karp_path(&inst.graph, d, t, &middles, usize_mask(middles.len()));
        }
        tables.push(cost);
    }

    // g[S]: best total for salesmen processed so far covering exactly S
    let mut g = tables[0].clone();
    for table in tables.iter().skip(1) {
        let mut next = vec![f64::INFINITY; full + 1];
        for s in 0..=full {
            if !g[s].is_finite() {
                continue;
            }
            // iterate supersets t of s: add subset m of the complement
            let comp = full & !s;
            let mut m = comp;
            loop {
                let t = s | m;
                let cand = g[s] + table[m];
                if cand < next[t] {
                    next[t] = cand;
                }
                if m == 0 {
                    break;
                }
                m = (m - 1) & comp;
            }
        }
        g = next;
    }
    Ok(g[full])
}

/// Per-depot cycle table over subsets of the city set, by enumeration.
struct CycleTable {
    cost: Vec<f64>,
    tour: Vec<Vec<usize>>,
}

fn build_cycle_tables(
    g: &MetricGraph,
    depots: &[usize],
    cities: &[usize],
    budget: &OracleBudget,
) -> Result<Vec<CycleTable>> {
    let nc = cities.len();
    let k = depots.len();
    let mut states: u128 = (k as u128).saturating_pow(nc as u32);
    for mask in 0..(1usize << nc) {
        states = states.saturating_add(
            (k as u128).saturating_mul(factorial(mask.count_ones() as usize)),
        );
    }
    if g.vertex_count() > budget.max_vertices {
        return Err(CoreError::BudgetExceeded(format!(
            "{} vertices > budget {}",
            g.vertex_count(),
            budget.max_vertices
        )));
    }
    if states > budget.max_states {
        return Err(CoreError::BudgetExceeded(format!("{states} states")));
    }

    let mut tables = Vec::with_capacity(k);
    for &d in depots {
        let mut cost = vec![f64::INFINITY; 1 << nc];
        let mut tour = vec![Vec::new(); 1 << nc];
        for mask in 0..(1usize << nc) {
            if mask == 0 {
                cost[0] = 0.0;
                tour[0] = vec![d];
                continue;
            }
            let members: Vec<usize> = cities
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, &v)| v)
                .collect();
            let mut best = f64::INFINITY;
            let mut best_tour = Vec::new();
            for_each_permutation(&members, &mut |perm| {
                let mut c = 0.0;
                let mut prev = d;
                for &v in perm {
                    c += g.weight(prev, v);
                    prev = v;
                }
                c += g.weight(prev, d);
                if c < best {
                    best = c;
                    best_tour = std::iter::once(d)
                        .chain(perm.iter().copied())
                        .chain(std::iter::once(d))
                        .collect();
                }
            });
            cost[mask] = best;
            tour[mask] = best_tour;
        }
        tables.push(CycleTable { cost, tour });
    }
    Ok(tables)
}

/// Exact k-TSP optimum by exhaustion over city partitions and per-tour
/// orders. Returns the tours and the optimum cost.
pub fn exact_ktsp(
    g: &MetricGraph,
    depots: &[usize],
    budget: &OracleBudget,
    exec: Execution,
) -> Result<(Vec<Vec<usize>>, f64)> {
    let n = g.vertex_count();
    let cities: Vec<usize> = (0..n).filter(|v| !depots.contains(v)).collect();
    let tables = build_cycle_tables(g, depots, &cities, budget)?;
    let k = depots.len();
    let nc = cities.len();
    let total: u64 = (k as u64).pow(nc as u32);

    let eval = |code: u64| -> (f64, u64) {
        let masks = assignment_masks(code, k, nc);
        let mut cost = 0.0;
        for (i, &m) in masks.iter().enumerate() {
            cost += tables[i].cost[m];
        }
        (cost, code)
    };
    let better = |a: (f64, u64), b: (f64, u64)| -> (f64, u64) {
        if a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1) {
            a
        } else {
            b
        }
    };

    let (best_cost, best_code) = match exec {
        Execution::Sequential => (0..total).map(eval).fold((f64::INFINITY, 0), better),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..total)
                .into_par_iter()
                .map(eval)
                .reduce(|| (f64::INFINITY, 0), better)
        }
    };

    let masks = assignment_masks(best_code, k, nc);
    let tours: Vec<Vec<usize>> =
        masks.iter().enumerate().map(|(i, &m)| tables[i].tour[m].clone()).collect();
    Ok((tours, best_cost))
}

/// Independent k-TSP optimum: Held-Karp cycle tables plus subset DP.
pub fn exact_ktsp_dp(g: &MetricGraph, depots: &[usize], budget: &OracleBudget) -> Result<f64> {
    let n = g.vertex_count();
    if n > budget.max_vertices {
        return Err(CoreError::BudgetExceeded(format!(
            "{n} vertices > budget {}",
            budget.max_vertices
        )));
    }
    let cities: Vec<usize> = (0..n).filter(|v| !depots.contains(v)).collect();
    let nc = cities.len();
    let full = usize_mask(nc);
    let k = depots.len();

    let mut tables = Vec::with_capacity(k);
    for &d in depots {
        let mut cost = vec![0.0f64; full + 1];
        for mask in 1..=full {
            let members: Vec<usize> = cities
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, &v)| v)
                .collect();
            // cheapest d -> members -> d cycle via the path DP closed at d
            let m = members.len();
            let mfull = usize_mask(m);
            let mut dp = vec![vec![f64::INFINITY; m]; mfull + 1];
            for (j, &v) in members.iter().enumerate() {
                dp[1 << j][j] = g.weight(d, v);
            }
            for s in 1..=mfull {
                for j in 0..m {
                    if s & (1 << j) == 0 || !dp[s][j].is_finite() {
                        continue;
                    }
                    for nj in 0..m {
                        if s & (1 << nj) != 0 {
                            continue;
                        }
                        let ns = s | (1 << nj);
                        let cand = dp[s][j] + g.weight(members[j], members[nj]);
                        if cand < dp[ns][nj] {
                            dp[ns][nj] = cand;
                        }
                    }
                }
            }
            let mut best = f64::INFINITY;
            for (j, &v) in members.iter().enumerate() {
                let cand = dp[mfull][j] + g.weight(v, d);
                if cand < best {
                    best = cand;
                }
            }
            cost[mask] = best;
        }
        tables.push(cost);
    }

    let mut gdp = tables[0].clone();
    for table in tables.iter().skip(1) {
        let mut next = vec![f64::INFINITY; full + 1];
        for s in 0..=full {
            if !gdp[s].is_finite() {
                continue;
            }
            let comp = full & !s;
            let mut m = comp;
            loop {
                let t = s | m;
                let cand = gdp[s] + table[m];
                if cand < next[t] {
                    next[t] = cand;
                }
                if m == 0 {
                    break;
                }
                m = (m - 1) & comp;
            }
        }
        gdp = next;
    }
    Ok(gdp[full])
}
