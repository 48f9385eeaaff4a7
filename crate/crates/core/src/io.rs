//! On-disk JSON formats for instances and solutions.
//!
//! Instance: `{"kind":"points"|"matrix", "points":[[x,y],..] |
//! "weights":[[..],..], "k":int, "depots":[..], "terminals":[..],
//! "assigned":[[..],..], "free":[..]}` with 0-based vertex ids.
//! Solution: `{"routes":[[..],..], "total_cost":float}`.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::instance::{validate_instance, CmpInstance, MetricGraph, RouteSet};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum InstanceFile {
    Points {
        points: Vec<[f64; 2]>,
        k: usize,
        depots: Vec<usize>,
        terminals: Vec<usize>,
        assigned: Vec<Vec<usize>>,
        free: Vec<usize>,
    },
    Matrix {
        weights: Vec<Vec<f64>>,
        k: usize,
        depots: Vec<usize>,
        terminals: Vec<usize>,
        assigned: Vec<Vec<usize>>,
        free: Vec<usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    routes: Vec<Vec<usize>>,
    total_cost: f64,
}

fn instance_from_file(file: InstanceFile) -> Result<CmpInstance> {
    let (graph, points, k, depots, terminals, assigned, free) = match file {
        InstanceFile::Points { points, k, depots, terminals, assigned, free } => {
            let graph = MetricGraph::from_points(&points);
            (graph, Some(points), k, depots, terminals, assigned, free)
        }
        InstanceFile::Matrix { weights, k, depots, terminals, assigned, free } => {
            let graph = MetricGraph::from_matrix(weights)?;
            (graph, None, k, depots, terminals, assigned, free)
        }
    };
    if depots.len() != k {
        return Err(CoreError::Schema(format!(
            "k = {k} does not match |depots| = {}",
            depots.len()
        )));
    }
    let inst = CmpInstance { graph, points, depots, terminals, assigned, free };
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CoreError::InvalidInstance(list.join("; ")));
    }
    Ok(inst)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<CmpInstance> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    instance_from_file(file)
}

pub fn instance_to_json(inst: &CmpInstance) -> Result<String> {
    let k = inst.salesman_count();
    let file = match &inst.points {
        Some(points) => InstanceFile::Points {
            points: points.clone(),
            k,
            depots: inst.depots.clone(),
            terminals: inst.terminals.clone(),
            assigned: inst.assigned.clone(),
            free: inst.free.clone(),
        },
        None => InstanceFile::Matrix {
            weights: inst.graph.matrix(),
            k,
            depots: inst.depots.clone(),
            terminals: inst.terminals.clone(),
            assigned: inst.assigned.clone(),
            free: inst.free.clone(),
        },
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &CmpInstance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<RouteSet> {
    let text = std::fs::read_to_string(path)?;
    let file: SolutionFile = serde_json::from_str(&text)?;
    Ok(RouteSet { routes: file.routes, total_cost: file.total_cost })
}

pub fn solution_to_json(rs: &RouteSet) -> Result<String> {
    let file = SolutionFile { routes: rs.routes.clone(), total_cost: rs.total_cost };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn save_solution(path: impl AsRef<Path>, rs: &RouteSet) -> Result<()> {
    std::fs::write(path, solution_to_json(rs)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_euclidean;

    #[test]
    fn instance_round_trip() {
        let dir = std::env::temp_dir().join(format!("cmp_io_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("inst.json");
        let inst = generate_euclidean(9, 2, 0.5, 7).unwrap();
        save_instance(&path, &inst).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(inst, back);

        // saving the loaded copy reproduces identical bytes
        let again = dir.join("inst2.json");
        save_instance(&again, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn matrix_round_trip_bit_exact() {
        let dir = std::env::temp_dir().join(format!("cmp_io_m_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        let mut inst = generate_euclidean(6, 1, 0.5, 3).unwrap();
        inst.points = None; // force matrix form
        save_instance(&path, &inst).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(inst.graph, back.graph);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn missing_field_names_it() {
        let text = r#"{"kind":"points","points":[[0,0],[1,0]],"k":1,"depots":[0],"assigned":[[]],"free":[]}"#;
        let err = serde_json::from_str::<InstanceFile>(text).unwrap_err();
        assert!(err.to_string().contains("terminals"), "{err}");
    }

    #[test]
    fn asymmetric_matrix_rejected_at_load() {
        let dir = std::env::temp_dir().join(format!("cmp_io_a_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        let text = r#"{"kind":"matrix","weights":[[0,1],[2,0]],"k":1,"depots":[0],"terminals":[1],"assigned":[[]],"free":[]}"#;
        std::fs::write(&path, text).unwrap();
        let err = load_instance(&path).unwrap_err();
        assert!(matches!(err, CoreError::InvalidInstance(_)));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn solution_round_trip() {
        let dir = std::env::temp_dir().join(format!("cmp_io_s_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sol.json");
        let rs = RouteSet { routes: vec![vec![0, 2, 1]], total_cost: 2.25 };
        save_solution(&path, &rs).unwrap();
        let back = load_solution(&path).unwrap();
        assert_eq!(rs, back);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
