//! Labeled path representation: every vertex orders its path-incident edges
//! by traversal labels 1, 2, ... . Labels are immutable once assigned;
//! shortcutting marks entries dead and rewires the surviving endpoints under
//! their original labels instead of renumbering. Each entry also records the
//! label its edge carries at the far endpoint, which is what lets a rewired
//! edge be identified from either side.

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};

/// One slot of a vertex's labeled edge list. The slot at index `l - 1` holds
/// the edge with label `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEntry {
    pub neighbor: usize,
    /// Label of this edge in the neighbor's list.
    pub remote_label: usize,
    pub alive: bool,
}

/// A path (or closed tour) in labeled-adjacency form.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPath {
    pub start: usize,
    pub end: usize,
    pub adj: BTreeMap<usize, Vec<PathEntry>>,
}

impl LabeledPath {
    /// Builds the labeled form of the walk `seq[0], seq[1], ..`. Consecutive
    /// equal vertices are rejected (paths have no self-loops).
    pub fn from_vertices(seq: &[usize]) -> Result<Self> {
        if seq.is_empty() {
            return Err(CoreError::MalformedPath("empty vertex sequence".into()));
        }
        let mut adj: BTreeMap<usize, Vec<PathEntry>> = BTreeMap::new();
        adj.entry(seq[0]).or_default();
        for win in seq.windows(2) {
            let (u, v) = (win[0], win[1]);
            if u == v {
                return Err(CoreError::MalformedPath(format!("self-loop at {u}")));
            }
            let lu = adj.entry(u).or_default().len() + 1;
            let lv = adj.entry(v).or_default().len() + 1;
            adj.get_mut(&u).unwrap().push(PathEntry { neighbor: v, remote_label: lv, alive: true });
            adj.get_mut(&v).unwrap().push(PathEntry { neighbor: u, remote_label: lu, alive: true });
        }
        Ok(Self { start: seq[0], end: *seq.last().unwrap(), adj })
    }

    pub fn is_cycle(&self) -> bool {
        self.start == self.end && self.live_edge_count() > 0
    }

    pub fn live_edge_count(&self) -> usize {
        let twice: usize =
            self.adj.values().map(|l| l.iter().filter(|e| e.alive).count()).sum();
        twice / 2
    }

    fn entry(&self, v: usize, label: usize) -> Result<&PathEntry> {
        self.adj
            .get(&v)
            .and_then(|l| l.get(label - 1))
            .ok_or_else(|| CoreError::MalformedPath(format!("no label {label} at vertex {v}")))
    }

    /// Walks the live entries from the start vertex and returns the vertex
    /// sequence. At each vertex the arrival consumes its label and the
    /// departure is the smallest live label greater than it.
    pub fn vertices(&self) -> Result<Vec<usize>> {
        let mut seq = vec![self.start];
        if self.live_edge_count() == 0 {
            return Ok(seq);
        }
        let start_list = self
            .adj
            .get(&self.start)
            .ok_or_else(|| CoreError::MalformedPath("start vertex has no edges".into()))?;
        let first = start_list
            .iter()
            .position(|e| e.alive)
            .ok_or_else(|| CoreError::MalformedPath("start vertex has no live edge".into()))?;
        let mut edges_left = self.live_edge_count();
        let mut cur = self.start;
        let mut entry = self.entry(cur, first + 1)?;
        loop {
            let next = entry.neighbor;
            let arrival_label = entry.remote_label;
            seq.push(next);
            edges_left -= 1;
            if edges_left == 0 {
                break;
            }
            let list = self.entry(next, arrival_label)?;
            if !list.alive {
                return Err(CoreError::MalformedPath(format!(
                    "walk arrived at dead entry {next}:{arrival_label}"
                )));
            }
            let nlist = &self.adj[&next];
            let dep = nlist
                .iter()
                .enumerate()
                .skip(arrival_label)
                .find(|(_, e)| e.alive)
                .map(|(i, _)| i + 1)
                .ok_or_else(|| {
                    CoreError::MalformedPath(format!(
                        "no live departure after label {arrival_label} at {next}"
                    ))
                })?;
            cur = next;
            entry = self.entry(cur, dep)?;
        }
        Ok(seq)
    }

    /// Cost of the live edges under the given weight function.
    pub fn cost(&self, weight: impl Fn(usize, usize) -> f64) -> f64 {
        let seq = self.vertices().expect("valid labeled path");
        seq.windows(2).map(|w| weight(w[0], w[1])).sum()
    }

    /// Checks structural validity of a freshly built path: labels consecutive
    /// from 1 at every vertex, remote labels paired, and the walk consumes
    /// every edge exactly once ending at `end`.
    pub fn validate(&self) -> Result<()> {
        for (&v, list) in &self.adj {
            for (i, e) in list.iter().enumerate() {
                let back = self.entry(e.neighbor, e.remote_label)?;
                if back.neighbor != v || back.remote_label != i + 1 {
                    return Err(CoreError::MalformedPath(format!(
                        "label pairing broken on edge {v}:{}", i + 1
                    )));
                }
            }
        }
        let seq = self.vertices()?;
        if seq.len() != self.live_edge_count() + 1 {
            return Err(CoreError::MalformedPath("walk does not consume every edge".into()));
        }
        if *seq.last().unwrap() != self.end {
            return Err(CoreError::MalformedPath(format!(
                "walk ends at {} instead of {}",
                seq.last().unwrap(),
                self.end
            )));
        }
        Ok(())
    }

    /// Debug text dump: one `v:label->u` line per live entry, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&v, list) in &self.adj {
            for (i, e) in list.iter().enumerate() {
                if e.alive {
                    out.push_str(&format!("{v}:{}->{}\n", i + 1, e.neighbor));
                }
            }
        }
        out
    }
}

/// Cost of a labeled path's live edges (free-function form).
pub fn path_cost(p: &LabeledPath, weight: impl Fn(usize, usize) -> f64) -> f64 {
    p.cost(weight)
}

/// Repeated shortcutting of a labeled path, performed as a sequential token
/// walk over the labels. Any arrival at an already-visited vertex replaces the
/// consecutive edges (u,v),(v,w) by (u,w): both of v's entries are marked dead
/// and the entries at u and w are rewired to each other under their surviving
/// labels. With `protect_terminal` the end vertex is pre-marked visited so all
/// of its intermediate occurrences are shortcut and only the final one
/// survives. A closed tour pre-marks nothing: the start marks itself when the
/// walk begins, so the tour closes on itself exactly once.
pub fn shortcut_path(p: &LabeledPath, protect_terminal: bool) -> Result<LabeledPath> {
    let mut out = p.clone();
    if out.live_edge_count() == 0 {
        return Ok(out);
    }
    let is_cycle = out.is_cycle();

    let mut cnt: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vis: BTreeMap<usize, bool> = BTreeMap::new();
    for &v in out.adj.keys() {
        cnt.insert(v, 0);
        vis.insert(v, false);
    }
    if protect_terminal && !is_cycle {
        vis.insert(out.end, true);
    }

    // start: moveForward
    vis.insert(out.start, true);
    *cnt.get_mut(&out.start).unwrap() += 1;
    let start_label = cnt[&out.start];
    let (mut cur, mut arrival_label) = {
        let e = out.entry(out.start, start_label)?;
        (e.neighbor, e.remote_label)
    };

    loop {
        // arrival at `cur` via its entry `arrival_label`
        let c = cnt.get_mut(&cur).unwrap();
        *c += 1;
        if *c != arrival_label {
            return Err(CoreError::MalformedPath(format!(
                "arrival label {arrival_label} at {cur} does not match count {}",
                *c
            )));
        }
        let total = out.adj[&cur].len();
        if *c == total {
            // final arrival: only the path end (or the cycle start) can
            // exhaust its labels on arrival
            let expected = if is_cycle { out.start } else { out.end };
            if cur != expected {
                return Err(CoreError::MalformedPath(format!(
                    "labels exhausted at {cur} before reaching {expected}"
                )));
            }
            break;
        }
        if !vis[&cur] {
            // moveForward
            vis.insert(cur, true);
            let c = cnt.get_mut(&cur).unwrap();
            *c += 1;
            let label = *c;
            let e = out.entry(cur, label)?;
            let (n, r) = (e.neighbor, e.remote_label);
            cur = n;
            arrival_label = r;
        } else {
            // shortcut over `cur`
            let dep_label = cnt[&cur] + 1;
            let arr = out.entry(cur, cnt[&cur])?.clone();
            let dep = out.entry(cur, dep_label)?.clone();
            let (u, u_label) = (arr.neighbor, arr.remote_label);
            let (w, w_label) = (dep.neighbor, dep.remote_label);
            {
                let lu = out.adj.get_mut(&u).unwrap();
                lu[u_label - 1].neighbor = w;
                lu[u_label - 1].remote_label = w_label;
            }
            {
                let lw = out.adj.get_mut(&w).unwrap();
                lw[w_label - 1].neighbor = u;
                lw[w_label - 1].remote_label = u_label;
            }
            {
                let lv = out.adj.get_mut(&cur).unwrap();
                lv[cnt[&cur] - 1].alive = false;
                lv[dep_label - 1].alive = false;
            }
            *cnt.get_mut(&cur).unwrap() += 1;
            // the traversal resumes at w as if it had arrived over (u,w)
            cur = w;
            arrival_label = w_label;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn metric(n: usize, seed: u64) -> Vec<Vec<f64>> {
        // random points -> Euclidean matrix, always metric
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let g = crate::instance::MetricGraph::from_points(&pts);
        g.matrix()
    }

    #[test]
    fn round_trip_vertices() {
        let seq = vec![3, 1, 4, 1, 5];
        let p = LabeledPath::from_vertices(&seq).unwrap();
        assert_eq!(p.vertices().unwrap(), seq);
        p.validate().unwrap();
    }

    #[test]
    fn shortcut_phase1_shape() {
        // d -> a -> d -> t with terminal protection collapses to d -> a -> t
        let p = LabeledPath::from_vertices(&[0, 2, 0, 1]).unwrap();
        let s = shortcut_path(&p, true).unwrap();
        assert_eq!(s.vertices().unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn shortcut_identity_on_simple_path() {
        let p = LabeledPath::from_vertices(&[0, 1, 2, 3]).unwrap();
        let s = shortcut_path(&p, true).unwrap();
        assert_eq!(s.vertices().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn shortcut_middle_repeat() {
        // a b c b d  ->  a b c d
        let p = LabeledPath::from_vertices(&[0, 1, 2, 1, 3]).unwrap();
        let s = shortcut_path(&p, true).unwrap();
        assert_eq!(s.vertices().unwrap(), vec![0, 1, 2, 3]);
        let w = metric(4, 1);
        let cost_in = p.cost(|i, j| w[i][j]);
        let cost_out = s.cost(|i, j| w[i][j]);
        assert!(cost_out <= cost_in + 1e-12);
    }

    #[test]
    fn shortcut_cycle_closes_once() {
        // d x y x d as a tour: middle x repeat shortcut, closing edge kept
        let p = LabeledPath::from_vertices(&[0, 1, 2, 1, 0]).unwrap();
        let s = shortcut_path(&p, false).unwrap();
        assert_eq!(s.vertices().unwrap(), vec![0, 1, 2, 0]);
    }

    #[test]
    fn shortcut_consecutive_double_backtrack() {
        // walk with u,v,u,v pattern exercises the transient self-loop case
        let p = LabeledPath::from_vertices(&[0, 1, 0, 1]).unwrap();
        let s = shortcut_path(&p, true).unwrap();
        assert_eq!(s.vertices().unwrap(), vec![0, 1]);
    }

    fn random_walk(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<usize> {
        let mut seq = vec![rng.gen_range(0..n)];
        while seq.len() < len {
            let prev = *seq.last().unwrap();
            let last = seq.len() + 1 == len;
            let mut next = rng.gen_range(0..n);
            // open walks only: a walk closing on its start is a cycle
            while next == prev || (last && next == seq[0]) {
                next = rng.gen_range(0..n);
            }
            seq.push(next);
        }
        seq
    }

    #[test]
    fn shortcut_properties_over_random_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..1000 {
            let n = rng.gen_range(3..9);
            let len = rng.gen_range(2..20);
            let seq = random_walk(&mut rng, n, len);
            let w = metric(n, case);
            let p = LabeledPath::from_vertices(&seq).unwrap();
            let s = shortcut_path(&p, true).unwrap();
            let out = s.vertices().unwrap();
            // endpoints preserved
            assert_eq!(out[0], seq[0]);
            assert_eq!(*out.last().unwrap(), *seq.last().unwrap());
            // every vertex of the walk exactly once
            let mut expect: Vec<usize> = seq.clone();
            expect.sort_unstable();
            expect.dedup();
            let mut got: Vec<usize> = out.clone();
            got.sort_unstable();
            let deduped = {
                let mut d = got.clone();
                d.dedup();
                d
            };
            assert_eq!(got, deduped, "repeated vertex in shortcut output: {out:?}");
            assert_eq!(deduped, expect);
            // cost never increases
            let ci = p.cost(|i, j| w[i][j]);
            let co = s.cost(|i, j| w[i][j]);
            assert!(co <= ci * (1.0 + 1e-9) + 1e-12, "case {case}: {co} > {ci}");
        }
    }

    #[test]
    fn dump_format() {
        let p = LabeledPath::from_vertices(&[0, 1]).unwrap();
        assert_eq!(p.dump(), "0:1->1\n1:1->0\n");
    }

    #[test]
    fn empty_path_cost_zero() {
        let p = LabeledPath { start: 4, end: 4, adj: BTreeMap::new() };
        assert_eq!(p.cost(|_, _| 1.0), 0.0);
    }
}
