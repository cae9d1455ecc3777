//! Turning a fractional assignment into per-core timelines.
//!
//! Each core is a bin of height `t_f`. Big-core portions are stacked bottom
//! up across the big bins, small-core portions top down across the small
//! bins, spilling into the next bin when one fills. Folding all bins of a
//! pool onto one interval `[0, t_f)`, a split process's big portion starts
//! exactly where its small portion ends, so the two never run at the same
//! time as long as they sum to at most `t_f`. Processes running exactly
//! `t_f` keep the two cursors aligned; the single shorter split process goes
//! last among the splits, and whole processes follow.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{approx_ge, tol, FractionalAssignment, Machine, Workload, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreKind {
    Big,
    Small,
}

impl fmt::Display for CoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoreKind::Big => "big",
            CoreKind::Small => "small",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub process: String,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn new(process: impl Into<String>, start: f64, end: f64) -> Self {
        Self {
            process: process.into(),
            start,
            end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub big_cores: Vec<Vec<Segment>>,
    pub small_cores: Vec<Vec<Segment>>,
    pub makespan: f64,
}

impl Schedule {
    /// Empty timelines for every core of `m`.
    pub fn empty(m: Machine) -> Self {
        Self {
            big_cores: vec![Vec::new(); m.big()],
            small_cores: vec![Vec::new(); m.small()],
            makespan: 0.0,
        }
    }

    /// All timelines, big cores first.
    pub fn cores(&self) -> impl Iterator<Item = (CoreKind, usize, &[Segment])> {
        let big = self
            .big_cores
            .iter()
            .enumerate()
            .map(|(i, c)| (CoreKind::Big, i, c.as_slice()));
        let small = self
            .small_cores
            .iter()
            .enumerate()
            .map(|(i, c)| (CoreKind::Small, i, c.as_slice()));
        big.chain(small)
    }

    pub fn busy_time(&self, kind: CoreKind) -> f64 {
        let pool = match kind {
            CoreKind::Big => &self.big_cores,
            CoreKind::Small => &self.small_cores,
        };
        pool.iter().flatten().map(Segment::duration).sum()
    }

    pub fn segment_count(&self) -> usize {
        self.cores().map(|(_, _, s)| s.len()).sum()
    }

    /// Sorts every timeline and sets `makespan` to the latest segment end.
    pub fn normalize(&mut self) {
        for core in self.big_cores.iter_mut().chain(self.small_cores.iter_mut()) {
            core.sort_by(|a, b| a.start.total_cmp(&b.start));
        }
        self.makespan = self
            .cores()
            .flat_map(|(_, _, s)| s.iter().map(|seg| seg.end))
            .fold(0.0, f64::max);
    }
}

/// Fill position within one pool.
struct Cursor {
    kind: CoreKind,
    cores: usize,
    bin: f64,
    core: usize,
    used: f64,
}

impl Cursor {
    fn new(kind: CoreKind, cores: usize, bin: f64) -> Self {
        Self {
            kind,
            cores,
            bin,
            core: 0,
            used: 0.0,
        }
    }

    fn place(&mut self, id: &str, len: f64, out: &mut [Vec<Segment>]) -> Result<()> {
        let tiny = 1e-12 * self.bin.max(1.0);
        let mut remaining = len;
        while remaining > tiny {
            let room = self.bin - self.used;
            if room <= tiny {
                self.core += 1;
                self.used = 0.0;
                continue;
            }
            if self.core >= self.cores {
                return Err(Error::Capacity(format!(
                    "{} pool overflows by {remaining} while placing `{id}`",
                    self.kind
                )));
            }
            // A remainder below `tiny` stays on this core rather than
            // becoming a sliver segment on the next one.
            let piece = if remaining - room <= tiny {
                remaining
            } else {
                room
            };
            let (start, end) = match self.kind {
                CoreKind::Big => (self.used, self.used + piece),
                CoreKind::Small => (self.bin - self.used - piece, self.bin - self.used),
            };
            out[self.core].push(Segment::new(id, start.max(0.0), end));
            self.used += piece;
            remaining -= piece;
        }
        Ok(())
    }
}

/// Realizes `a` as a preemptive schedule with makespan at most `t_f`.
pub fn pack(w: &Workload, m: Machine, a: &FractionalAssignment, t_f: f64) -> Result<Schedule> {
    let canon = w.canonical();
    let procs = canon.processes();
    let xs: Vec<f64> = a
        .fractions_for(&canon)?
        .into_iter()
        .map(|x| {
            if x <= EPS {
                0.0
            } else if x >= 1.0 - EPS {
                1.0
            } else {
                x
            }
        })
        .collect();

    let mut big_load = 0.0;
    let mut small_load = 0.0;
    for (p, &x) in procs.iter().zip(&xs) {
        let t = p.exec_time(x)?;
        if !approx_ge(t_f, t, t_f) {
            return Err(Error::Capacity(format!(
                "process `{}` runs {t}, longer than makespan {t_f}",
                p.id()
            )));
        }
        big_load += x * p.big_time();
        small_load += (1.0 - x) * p.small_time();
    }
    let big_cap = m.big() as f64 * t_f;
    let small_cap = m.small() as f64 * t_f;
    if !approx_ge(big_cap, big_load, big_cap) || !approx_ge(small_cap, small_load, small_cap) {
        return Err(Error::Capacity(format!(
            "loads (big {big_load}, small {small_load}) exceed capacity ({big_cap}, {small_cap})"
        )));
    }

    let mut sched = Schedule::empty(m);
    // Rounding can push a full pool a hair over `cores * t_f`; stretch the
    // bins by that hair instead of spilling.
    let mut big = Cursor::new(CoreKind::Big, m.big(), t_f.max(big_load / m.big() as f64));
    let mut small = Cursor::new(
        CoreKind::Small,
        m.small(),
        t_f.max(small_load / m.small() as f64),
    );

    let split: Vec<usize> = (0..procs.len())
        .filter(|&i| xs[i] > 0.0 && xs[i] < 1.0)
        .collect();
    let (longest, shorter): (Vec<usize>, Vec<usize>) = split.into_iter().partition(|&i| {
        let t = procs[i].exec_time(xs[i]).unwrap_or(0.0);
        approx_ge(t, t_f, t_f)
    });
    for i in longest.into_iter().chain(shorter) {
        let p = &procs[i];
        big.place(p.id(), xs[i] * p.big_time(), &mut sched.big_cores)?;
        small.place(
            p.id(),
            (1.0 - xs[i]) * p.small_time(),
            &mut sched.small_cores,
        )?;
    }
    for (p, _) in procs.iter().zip(&xs).filter(|(_, &x)| x == 1.0) {
        big.place(p.id(), p.big_time(), &mut sched.big_cores)?;
    }
    // Reverse canonical order top-down, so small timelines read in canonical order.
    for (p, _) in procs.iter().zip(&xs).rev().filter(|(_, &x)| x == 0.0) {
        small.place(p.id(), p.small_time(), &mut sched.small_cores)?;
    }

    sched.normalize();
    let violations = validate(&sched, w, m);
    if let Some(v) = violations.first() {
        return Err(Error::Invariant(format!(
            "packed schedule is invalid ({} violations), first: {v}",
            violations.len()
        )));
    }
    Ok(sched)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    CoreCount,
    EmptySegment,
    OutOfRange,
    UnknownProcess,
    CoreOverlap,
    SameProcessOverlap,
    WorkIncomplete,
    MakespanMismatch,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub process: Option<String>,
    pub core: Option<(CoreKind, usize)>,
    pub interval: Option<(f64, f64)>,
    pub detail: String,
}

impl Violation {
    fn new(rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            rule,
            process: None,
            core: None,
            interval: None,
            detail: detail.into(),
        }
    }

    fn process(mut self, id: &str) -> Self {
        self.process = Some(id.to_string());
        self
    }

    fn core(mut self, kind: CoreKind, idx: usize) -> Self {
        self.core = Some((kind, idx));
        self
    }

    fn interval(mut self, start: f64, end: f64) -> Self {
        self.interval = Some((start, end));
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rule)?;
        if let Some(p) = &self.process {
            write!(f, " process `{p}`")?;
        }
        if let Some((k, i)) = self.core {
            write!(f, " on {k}#{i}")?;
        }
        if let Some((s, e)) = self.interval {
            write!(f, " at {s}..{e}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks every schedule rule; an empty result means the schedule is valid.
pub fn validate(s: &Schedule, w: &Workload, m: Machine) -> Vec<Violation> {
    let mut out = Vec::new();
    let slack = tol(s.makespan.max(1.0));

    if s.big_cores.len() != m.big() || s.small_cores.len() != m.small() {
        out.push(Violation::new(
            Rule::CoreCount,
            format!(
                "schedule has {}+{} cores, machine has {}+{}",
                s.big_cores.len(),
                s.small_cores.len(),
                m.big(),
                m.small()
            ),
        ));
    }

    let index: HashMap<&str, usize> = w
        .processes()
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id(), i))
        .collect();
    let mut work = vec![0.0; w.len()];
    let mut spans: Vec<Vec<(f64, f64, CoreKind, usize)>> = vec![Vec::new(); w.len()];
    let mut latest = 0.0_f64;

    for (kind, ci, segs) in s.cores() {
        let mut prev: Option<&Segment> = None;
        for seg in segs {
            latest = latest.max(seg.end);
            if !(seg.start.is_finite() && seg.end.is_finite()) || seg.end <= seg.start {
                out.push(
                    Violation::new(Rule::EmptySegment, "segment must have end > start")
                        .process(&seg.process)
                        .core(kind, ci)
                        .interval(seg.start, seg.end),
                );
            }
            if seg.start < -slack || seg.end > s.makespan + slack {
                out.push(
                    Violation::new(Rule::OutOfRange, format!("outside [0, {}]", s.makespan))
                        .process(&seg.process)
                        .core(kind, ci)
                        .interval(seg.start, seg.end),
                );
            }
            if let Some(p) = prev {
                if seg.start < p.end - slack {
                    out.push(
                        Violation::new(
                            Rule::CoreOverlap,
                            format!("overlaps `{}` or is out of order", p.process),
                        )
                        .process(&seg.process)
                        .core(kind, ci)
                        .interval(seg.start, p.end.min(seg.end)),
                    );
                }
            }
            prev = Some(seg);

            match index.get(seg.process.as_str()) {
                Some(&pi) => {
                    let p = &w.processes()[pi];
                    let per_unit = match kind {
                        CoreKind::Big => p.big_time(),
                        CoreKind::Small => p.small_time(),
                    };
                    work[pi] += seg.duration() / per_unit;
                    spans[pi].push((seg.start, seg.end, kind, ci));
                }
                None => out.push(
                    Violation::new(Rule::UnknownProcess, "not in workload")
                        .process(&seg.process)
                        .core(kind, ci),
                ),
            }
        }
    }

    for (pi, p) in w.processes().iter().enumerate() {
        let mut sp = std::mem::take(&mut spans[pi]);
        sp.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in sp.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.0 < a.1 - slack {
                out.push(
                    Violation::new(
                        Rule::SameProcessOverlap,
                        format!("runs on {}#{} and {}#{} at once", a.2, a.3, b.2, b.3),
                    )
                    .process(p.id())
                    .core(b.2, b.3)
                    .interval(b.0, a.1.min(b.1)),
                );
            }
        }
        if (work[pi] - 1.0).abs() > 1e-9 {
            out.push(
                Violation::new(
                    Rule::WorkIncomplete,
                    format!("completes {:.12} of its work", work[pi]),
                )
                .process(p.id()),
            );
        }
    }

    if (latest - s.makespan).abs() > slack {
        out.push(Violation::new(
            Rule::MakespanMismatch,
            format!("makespan {} but last segment ends at {latest}", s.makespan),
        ));
    }
    out
}
