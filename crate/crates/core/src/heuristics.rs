//! Baseline schedulers: whole processes, no migration, dispatched whenever a
//! core goes idle.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Machine, ProcessSpec, Workload};
use crate::packing::{Schedule, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeuristicKind {
    /// Big cores take the highest-`sf` waiting process, small cores the lowest.
    IpcDriven,
    /// Any idle core takes the longest waiting process (by small-core time).
    Ltf,
}

/// Waiting processes ordered by a key, ties resolved by ascending id.
struct Queue {
    set: BTreeSet<(OrderedFloat<f64>, usize)>,
}

impl Queue {
    fn new(keys: impl Iterator<Item = (f64, usize)>) -> Self {
        Self {
            set: keys.map(|(k, r)| (OrderedFloat(k), r)).collect(),
        }
    }

    fn take_min(&mut self) -> Option<usize> {
        self.set.pop_first().map(|(_, r)| r)
    }

    fn take_max(&mut self) -> Option<usize> {
        let &(top, _) = self.set.last()?;
        let entry = *self.set.range((top, 0)..).next()?;
        self.set.remove(&entry);
        Some(entry.1)
    }
}

pub fn schedule_heuristic(w: &Workload, m: Machine, kind: HeuristicKind) -> Result<Schedule> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    // Rank processes by id so queue ties break by ascending id.
    let mut procs: Vec<&ProcessSpec> = w.processes().iter().collect();
    procs.sort_by(|a, b| a.id().cmp(b.id()));
    let key = |p: &ProcessSpec| match kind {
        HeuristicKind::IpcDriven => p.sf(),
        HeuristicKind::Ltf => p.small_time(),
    };
    let mut waiting = Queue::new(procs.iter().enumerate().map(|(r, p)| (key(p), r)));

    // Idle cores by (free time, big before small, index).
    let mut idle: BinaryHeap<Reverse<(OrderedFloat<f64>, u8, usize)>> = (0..m.big())
        .map(|i| Reverse((OrderedFloat(0.0), 0, i)))
        .chain((0..m.small()).map(|i| Reverse((OrderedFloat(0.0), 1, i))))
        .collect();

    let mut sched = Schedule::empty(m);
    while let Some(Reverse((OrderedFloat(now), pool, core))) = idle.pop() {
        let is_big = pool == 0;
        let next = match (kind, is_big) {
            (HeuristicKind::IpcDriven, false) => waiting.take_min(),
            _ => waiting.take_max(),
        };
        let Some(r) = next else { break };
        let p = procs[r];
        let run = if is_big { p.big_time() } else { p.small_time() };
        let timeline = if is_big {
            &mut sched.big_cores[core]
        } else {
            &mut sched.small_cores[core]
        };
        timeline.push(Segment::new(p.id(), now, now + run));
        idle.push(Reverse((OrderedFloat(now + run), pool, core)));
    }
    sched.normalize();
    Ok(sched)
}
