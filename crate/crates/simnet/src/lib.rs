//! Deterministic discrete-event simulator for asynchronous message-passing
//! systems. Nodes are event-driven state machines attached to the vertices
//! of a topology; they exchange messages over edges with per-message delays
//! in (0, 1] simulated time units. The event loop is sequential and fully
//! determined by the (network, schedule seed) pair: events order by
//! (delivery time, send sequence number), so simultaneous deliveries break
//! ties by send order. Handlers may not block; all waiting is encoded in
//! node state.
//!
//! Time is simulated, never wall-clock. A run terminates at quiescence (no
//! in-flight messages) and reports the delivered-message trace, per-tag
//! message counts and the quiescence time.

mod schedule;
mod trace;

pub use schedule::ScheduleModel;
pub use trace::{MetricsJson, SimMetrics, TraceRecord};

use std::collections::BinaryHeap;
use std::collections::BTreeSet;
use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),

    #[error("node count {nodes} does not match topology vertex count {vertices}")]
    NodeCountMismatch { nodes: usize, vertices: usize },

    #[error("edge ({0}, {1}) references an unknown vertex")]
    EdgeOutOfRange(NodeId, NodeId),

    #[error("node {from} sent on non-incident edge ({from}, {to})")]
    NonIncidentSend { from: NodeId, to: NodeId },

    #[error("event ceiling of {0} deliveries exceeded before quiescence")]
    EventCeiling(usize),

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
}

/// Message payloads must expose a protocol tag for per-tag accounting and
/// render deterministically through `Debug` for traces and replay matching.
pub trait Payload: Clone + std::fmt::Debug {
    fn tag(&self) -> &'static str;
}

/// Node behavior: woken once at time zero, then invoked per delivery.
pub trait Protocol {
    type Msg: Payload;
    fn on_wake(&mut self, ctx: &mut Ctx<Self::Msg>);
    fn on_message(&mut self, from: NodeId, msg: Self::Msg, ctx: &mut Ctx<Self::Msg>);
}

/// Handler-side view of the simulator: the node's own id, the current
/// simulated time, and the outbox.
pub struct Ctx<M> {
    pub me: NodeId,
    pub now: f64,
    sends: Vec<(NodeId, M)>,
}

impl<M> Ctx<M> {
    pub fn send(&mut self, to: NodeId, msg: M) {
        self.sends.push((to, msg));
    }
}

/// A topology plus one protocol state machine per vertex.
pub struct Network<P: Protocol> {
    nodes: Vec<P>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

/// Builds a network over an explicit vertex/edge set. Vertices are the ids
/// `0..nodes.len()`; `node_ids` documents intent and must match.
pub fn build_network<P: Protocol>(
    node_ids: &[NodeId],
    edges: &[(NodeId, NodeId)],
    nodes: Vec<P>,
) -> Result<Network<P>, SimError> {
    let mut seen = BTreeSet::new();
    for &id in node_ids {
        if !seen.insert(id) {
            return Err(SimError::DuplicateNode(id));
        }
    }
    if node_ids.len() != nodes.len() || node_ids.iter().any(|&id| id >= nodes.len()) {
        return Err(SimError::NodeCountMismatch {
            nodes: nodes.len(),
            vertices: node_ids.len(),
        });
    }
    let mut set = BTreeSet::new();
    for &(u, v) in edges {
        if u >= nodes.len() || v >= nodes.len() {
            return Err(SimError::EdgeOutOfRange(u, v));
        }
        let p = if u < v { (u, v) } else { (v, u) };
        set.insert(p);
    }
    Ok(Network { nodes, edges: set })
}

impl<P: Protocol> Network<P> {
    /// Convenience constructor for a complete graph over the node set.
    pub fn complete(nodes: Vec<P>) -> Self {
        let n = nodes.len();
        let mut edges = BTreeSet::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.insert((u, v));
            }
        }
        Network { nodes, edges }
    }

    pub fn node(&self, id: NodeId) -> &P {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    fn incident(&self, u: NodeId, v: NodeId) -> bool {
        let p = if u < v { (u, v) } else { (v, u) };
        self.edges.contains(&p)
    }
}

/// Run limits. The event ceiling is a non-termination guard; exceeding it is
/// a reported failure, not a crash.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub max_events: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_events: 10_000_000 }
    }
}

struct PendingEvent<M> {
    time: f64,
    seq: u64,
    src: NodeId,
    dst: NodeId,
    msg: M,
}

// BinaryHeap is a max-heap; order reversed on (time, seq).
impl<M> PartialEq for PendingEvent<M> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<M> Eq for PendingEvent<M> {}
impl<M> PartialOrd for PendingEvent<M> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<M> Ord for PendingEvent<M> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Runs the network to quiescence: every node wakes at time zero (in id
/// order), each delivered message invokes the target handler, and emitted
/// sends are scheduled at `now + delay(schedule)`.
pub fn run_until_quiescent<P: Protocol>(
    net: &mut Network<P>,
    schedule: &ScheduleModel,
    opts: RunOptions,
) -> Result<SimMetrics, SimError> {
    let mut sched = schedule.sampler();
    let mut queue: BinaryHeap<PendingEvent<P::Msg>> = BinaryHeap::new();
    let mut metrics = SimMetrics::default();
    let mut seq: u64 = 0;

    let mut flush = |ctx: Ctx<P::Msg>,
                     queue: &mut BinaryHeap<PendingEvent<P::Msg>>,
                     seq: &mut u64,
                     net_edges: &BTreeSet<(NodeId, NodeId)>,
                     metrics: &mut SimMetrics|
     -> Result<(), SimError> {
        let from = ctx.me;
        let now = ctx.now;
        for (to, msg) in ctx.sends {
            let p = if from < to { (from, to) } else { (to, from) };
            if from == to || !net_edges.contains(&p) {
                return Err(SimError::NonIncidentSend { from, to });
            }
            let time = sched.delay(now, from, to);
            metrics.messages_sent += 1;
            queue.push(PendingEvent { time, seq: *seq, src: from, dst: to, msg });
            *seq += 1;
        }
        Ok(())
    };

    for id in 0..net.nodes.len() {
        let mut ctx = Ctx { me: id, now: 0.0, sends: Vec::new() };
        net.nodes[id].on_wake(&mut ctx);
        flush(ctx, &mut queue, &mut seq, &net.edges, &mut metrics)?;
    }

    let mut delivered = 0usize;
    while let Some(ev) = queue.pop() {
        delivered += 1;
        if delivered > opts.max_events {
            return Err(SimError::EventCeiling(opts.max_events));
        }
        metrics.record_delivery(ev.time, ev.seq, ev.src, ev.dst, &ev.msg);
        let mut ctx = Ctx { me: ev.dst, now: ev.time, sends: Vec::new() };
        net.nodes[ev.dst].on_message(ev.src, ev.msg, &mut ctx);
        flush(ctx, &mut queue, &mut seq, &net.edges, &mut metrics)?;
    }
    Ok(metrics)
}

/// Re-applies a recorded trace against a fresh network: every delivery must
/// match a send the replayed handlers emitted, in sequence order, and no
/// sends may remain pending afterwards.
pub fn replay<P: Protocol>(net: &mut Network<P>, trace: &[TraceRecord]) -> Result<(), SimError> {
    // pending sends keyed by emission sequence number, with the payload
    // stashed so it can be re-delivered
    let mut pending: std::collections::BTreeMap<u64, (NodeId, NodeId, String, String)> =
        std::collections::BTreeMap::new();
    let mut stash: std::collections::BTreeMap<u64, P::Msg> = std::collections::BTreeMap::new();
    let mut seq: u64 = 0;

    let mut emit = |ctx: Ctx<P::Msg>,
                    pending: &mut std::collections::BTreeMap<
            u64,
            (NodeId, NodeId, String, String),
        >,
                    stash: &mut std::collections::BTreeMap<u64, P::Msg>,
                    seq: &mut u64| {
        let from = ctx.me;
        for (to, msg) in ctx.sends {
            pending.insert(*seq, (from, to, msg.tag().to_string(), format!("{msg:?}")));
            stash.insert(*seq, msg);
            *seq += 1;
        }
    };

    for id in 0..net.nodes.len() {
        let mut ctx = Ctx { me: id, now: 0.0, sends: Vec::new() };
        net.nodes[id].on_wake(&mut ctx);
        emit(ctx, &mut pending, &mut stash, &mut seq);
    }

    for rec in trace {
        let Some((from, to, tag, dbg)) = pending.remove(&rec.seq) else {
            return Err(SimError::ReplayMismatch(format!(
                "trace seq {} was never sent during replay",
                rec.seq
            )));
        };
        let msg = stash.remove(&rec.seq).expect("stash tracks pending");
        if from != rec.src || to != rec.dst || tag != rec.tag || dbg != rec.payload {
            return Err(SimError::ReplayMismatch(format!(
                "trace seq {}: recorded {}->{} tag={} payload={}, replayed {}->{} tag={} payload={}",
                rec.seq, rec.src, rec.dst, rec.tag, rec.payload, from, to, tag, dbg
            )));
        }
        let mut ctx = Ctx { me: to, now: rec.time, sends: Vec::new() };
        net.nodes[to].on_message(from, msg, &mut ctx);
        emit(ctx, &mut pending, &mut stash, &mut seq);
    }

    if !pending.is_empty() {
        return Err(SimError::ReplayMismatch(format!(
            "{} send(s) still pending after the trace ended (truncated trace?)",
            pending.len()
        )));
    }
    Ok(())
}
