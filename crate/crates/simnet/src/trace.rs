//! Delivered-message log and run metrics.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::{NodeId, Payload};

/// One delivery. `seq` is the monotone sequence number assigned at send.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub seq: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub tag: String,
    pub payload: String,
}

impl TraceRecord {
    pub fn line(&self) -> String {
        format!(
            "t={} seq={} {}->{} tag={} payload={}",
            self.time, self.seq, self.src, self.dst, self.tag, self.payload
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimMetrics {
    pub messages_sent: u64,
    pub by_tag: BTreeMap<String, u64>,
    pub quiescence_time: f64,
    pub trace: Vec<TraceRecord>,
}

/// JSON shape for metrics reports: `{"messages":..,"by_tag":{..},
/// "quiescence_time":..}`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsJson {
    pub messages: u64,
    pub by_tag: BTreeMap<String, u64>,
    pub quiescence_time: f64,
}

impl SimMetrics {
    pub(crate) fn record_delivery<M: Payload>(
        &mut self,
        time: f64,
        seq: u64,
        src: NodeId,
        dst: NodeId,
        msg: &M,
    ) {
        let tag = msg.tag();
        *self.by_tag.entry(tag.to_string()).or_default() += 1;
        if time > self.quiescence_time {
            self.quiescence_time = time;
        }
        self.trace.push(TraceRecord {
            time,
            seq,
            src,
            dst,
            tag: tag.to_string(),
            payload: format!("{msg:?}"),
        });
    }

    /// Messages delivered; equals `messages_sent` at quiescence (no loss).
    pub fn messages_delivered(&self) -> u64 {
        self.trace.len() as u64
    }

    /// Full trace dump, one line per delivery.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for rec in &self.trace {
            out.push_str(&rec.line());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> MetricsJson {
        MetricsJson {
            messages: self.messages_sent,
            by_tag: self.by_tag.clone(),
            quiescence_time: self.quiescence_time,
        }
    }
}
