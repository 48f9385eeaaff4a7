//! Seeded batch harness: generates instances, runs the approximation and the
//! exact oracle side by side, and reports the observed ratios. This is the
//! entry point the ratio command and the acceptance checks share.

use crate::error::Result;
use crate::instance::{generate_euclidean, solution_cost, verify_solution};
use crate::oracle::{exact_cmp, exact_ktsp, Execution, OracleBudget};
use crate::solver::{solve_cmp, solve_ktsp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Cmp,
    Ktsp,
}

impl Problem {
    /// The approximation bound certified for this problem.
    pub fn bound(self) -> f64 {
        match self {
            Problem::Cmp => 4.0,
            Problem::Ktsp => 2.0,
        }
    }
}

/// One instance to generate and evaluate.
#[derive(Debug, Clone, Copy)]
pub struct InstanceSpec {
    pub n: usize,
    pub k: usize,
    pub frac_free: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RatioRow {
    pub spec: InstanceSpec,
    pub cost: f64,
    pub opt: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct RatioTable {
    pub problem: Problem,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
}

impl RatioTable {
    pub fn within_bound(&self) -> bool {
        self.max_ratio <= self.problem.bound() * (1.0 + 1e-9)
    }
}

fn run_one(problem: Problem, spec: InstanceSpec, budget: &OracleBudget) -> Result<RatioRow> {
    let inst = generate_euclidean(spec.n, spec.k, spec.frac_free, spec.seed)?;
    let (cost, opt) = match problem {
        Problem::Cmp => {
            let (routes, _) = solve_cmp(&inst)?;
            let violations = verify_solution(&inst, &routes);
            if !violations.is_empty() {
                return Err(crate::error::CoreError::BoundViolation(format!(
                    "solver produced infeasible routes on seed {}: {}",
                    spec.seed, violations[0]
                )));
            }
            let cost = solution_cost(&inst, &routes)?;
            let (_, opt) = exact_cmp(&inst, budget, Execution::Sequential)?;
            (cost, opt)
        }
        Problem::Ktsp => {
            let depots: Vec<usize> = (0..spec.k).collect();
            let sol = solve_ktsp(&inst.graph, &depots)?;
            let (_, opt) = exact_ktsp(&inst.graph, &depots, budget, Execution::Sequential)?;
            (sol.total_cost, opt)
        }
    };
    let ratio = if opt > 0.0 {
        cost / opt
    } else if cost.abs() <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(RatioRow { spec, cost, opt, ratio })
}

/// Runs every spec and tabulates cost, optimum and ratio. The parallel
/// execution distributes instances across threads; rows come back in spec
/// order either way.
pub fn ratio_batch(
    problem: Problem,
    specs: &[InstanceSpec],
    budget: &OracleBudget,
    exec: Execution,
) -> Result<RatioTable> {
    let rows: Result<Vec<RatioRow>> = match exec {
        Execution::Sequential => specs.iter().map(|&s| run_one(problem, s, budget)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            specs.par_iter().map(|&s| run_one(problem, s, budget)).collect()
        }
    };
    let rows = rows?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(RatioTable { problem, rows, max_ratio })
}

/// The standard mixed frac_free cycle used when no explicit value is given.
pub const FRAC_FREE_MIX: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Builds `count` specs cycling through sizes and the frac_free mix.
pub fn seeded_specs(
    count: usize,
    ns: &[usize],
    ks: &[usize],
    frac_free: Option<f64>,
    base_seed: u64,
) -> Vec<InstanceSpec> {
    (0..count)
        .map(|i| {
            let n = ns[i % ns.len()];
            let mut k = ks[(i / ns.len()) % ks.len()];
            while n < 2 * k {
                k -= 1;
            }
            InstanceSpec {
                n,
                k: k.max(1),
                frac_free: frac_free.unwrap_or(FRAC_FREE_MIX[i % FRAC_FREE_MIX.len()]),
                seed: base_seed.wrapping_add(i as u64),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cmp_batch_within_bound() {
        let specs = seeded_specs(12, &[6, 7], &[1, 2], None, 1000);
        let table =
            ratio_batch(Problem::Cmp, &specs, &OracleBudget::default(), Execution::Sequential)
                .unwrap();
        assert_eq!(table.rows.len(), 12);
        assert!(table.within_bound(), "max ratio {}", table.max_ratio);
        for r in &table.rows {
            assert!(r.cost >= r.opt - 1e-9, "approximation beat the oracle");
        }
    }

    #[test]
    fn small_ktsp_batch_within_bound() {
        let specs = seeded_specs(12, &[6, 7], &[1, 2], Some(1.0), 2000);
        let table =
            ratio_batch(Problem::Ktsp, &specs, &OracleBudget::default(), Execution::Sequential)
                .unwrap();
        assert!(table.within_bound(), "max ratio {}", table.max_ratio);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_batch_matches_sequential() {
        let specs = seeded_specs(8, &[6], &[2], None, 3000);
        let budget = OracleBudget::default();
        let seq = ratio_batch(Problem::Cmp, &specs, &budget, Execution::Sequential).unwrap();
        let par = ratio_batch(Problem::Cmp, &specs, &budget, Execution::Parallel).unwrap();
        assert_eq!(seq.rows.len(), par.rows.len());
        for (a, b) in seq.rows.iter().zip(&par.rows) {
            assert_eq!(a.cost, b.cost);
            assert_eq!(a.opt, b.opt);
        }
    }
}
