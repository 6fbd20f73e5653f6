//! Digital edge timelines and piecewise-constant analog traces.
//!
//! Every signal in a [`SignalTimeline`] starts low at `t = 0`; the edge list
//! records level changes only, sorted by time (ties keep insertion order).

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub time_s: f64,
    pub signal: String,
    pub level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTimeline {
    pub edges: Vec<Edge>,
    pub resolution_s: f64,
}

impl SignalTimeline {
    pub fn new(resolution_s: f64) -> Self {
        Self {
            edges: Vec::new(),
            resolution_s,
        }
    }

    pub fn push(&mut self, time_s: f64, signal: impl Into<String>, level: u8) {
        self.edges.push(Edge {
            time_s,
            signal: signal.into(),
            level,
        });
    }

    /// Stable sort by time.
    pub fn sort(&mut self) {
        self.edges.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    }

    /// Signal names in first-appearance order.
    pub fn signals(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for e in &self.edges {
            if !seen.contains(&e.signal.as_str()) {
                seen.push(e.signal.as_str());
            }
        }
        seen
    }

    pub fn edges_for<'a>(&'a self, signal: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.signal == signal)
    }

    /// Closed-open intervals during which `signal` is high. A trailing
    /// rising edge with no matching fall yields an interval ending at
    /// `f64::INFINITY`.
    pub fn high_intervals(&self, signal: &str) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut rise: Option<f64> = None;
        for e in self.edges_for(signal) {
            match (e.level, rise) {
                (1, None) => rise = Some(e.time_s),
                (0, Some(r)) => {
                    out.push((r, e.time_s));
                    rise = None;
                }
                _ => {}
            }
        }
        if let Some(r) = rise {
            out.push((r, f64::INFINITY));
        }
        out
    }

    pub fn level_at(&self, signal: &str, t: f64) -> u8 {
        let mut level = 0;
        for e in self.edges_for(signal) {
            if e.time_s <= t {
                level = e.level;
            } else {
                break;
            }
        }
        level
    }

    /// Rename every edge of `from` to `to`.
    pub fn renamed(mut self, from: &str, to: &str) -> Self {
        for e in &mut self.edges {
            if e.signal == from {
                e.signal = to.to_string();
            }
        }
        self
    }

    /// Keep only the edges of one signal.
    pub fn select(&self, signal: &str) -> SignalTimeline {
        SignalTimeline {
            edges: self.edges_for(signal).cloned().collect(),
            resolution_s: self.resolution_s,
        }
    }

    /// Writes `time_s,signal,level` rows.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["time_s", "signal", "level"])?;
        for e in &self.edges {
            wtr.write_record([
                format!("{:e}", e.time_s),
                e.signal.clone(),
                e.level.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(r: R, resolution_s: f64) -> csv::Result<SignalTimeline> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut tl = SignalTimeline::new(resolution_s);
        for row in rdr.deserialize() {
            let e: Edge = row?;
            tl.edges.push(e);
        }
        Ok(tl)
    }

    /// Edges grouped per signal, keyed by name.
    pub fn by_signal(&self) -> BTreeMap<&str, Vec<&Edge>> {
        let mut map: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            map.entry(e.signal.as_str()).or_default().push(e);
        }
        map
    }
}

/// Piecewise-constant analog waveform. `points[i] = (t, v)` means the trace
/// holds `v` from `t` until the next breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogTrace {
    pub points: Vec<(f64, f64)>,
}

impl AnalogTrace {
    pub fn constant(start_s: f64, v: f64) -> Self {
        Self {
            points: vec![(start_s, v)],
        }
    }

    pub fn start_s(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.0)
    }

    /// Appends a breakpoint; times must be nondecreasing.
    pub fn step_to(&mut self, t: f64, v: f64) {
        debug_assert!(self.points.last().is_none_or(|p| p.0 <= t));
        self.points.push((t, v));
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut v = self.points.first().map_or(0.0, |p| p.1);
        for &(pt, pv) in &self.points {
            if pt <= t {
                v = pv;
            } else {
                break;
            }
        }
        v
    }

    /// Breakpoints strictly inside `(t0, t1)`.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .filter(move |&(t, _)| t > t0 && t < t1)
    }
}
