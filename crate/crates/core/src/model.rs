//! Core domain types shared by every solver.
//!
//! A process runs at one of two speeds: `big_time` on a big core, or
//! `small_time = big_time * sf` on a small core. A process may be split
//! between the pools; `x` is the fraction of its work done on big cores,
//! so its total running time is `x * big_time + (1 - x) * small_time`.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used in all case analysis.
pub const EPS: f64 = 1e-9;
/// Absolute floor under [`EPS`] for quantities near zero.
pub const ABS_FLOOR: f64 = 1e-12;

/// Tolerance for comparing values of magnitude around `scale`.
#[inline]
pub fn tol(scale: f64) -> f64 {
    (EPS * scale.abs()).max(ABS_FLOOR)
}

/// `a >= b` up to [`tol`] of `scale`.
#[inline]
pub fn approx_ge(a: f64, b: f64, scale: f64) -> bool {
    a >= b - tol(scale)
}

/// `a` and `b` agree within [`tol`] of `scale`.
#[inline]
pub fn approx_eq(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= tol(scale)
}

/// The id is shared, so cloning a process never copies its name.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    id: Arc<str>,
    big_time: f64,
    sf: f64,
}

impl ProcessSpec {
    pub fn new(id: impl Into<String>, big_time: f64, sf: f64) -> Result<Self> {
        let id: String = id.into();
        let bad = |reason: &str| Error::InvalidProcess {
            id: id.clone(),
            reason: reason.to_string(),
        };
        if !big_time.is_finite() || big_time <= 0.0 {
            return Err(bad("big_time must be a positive finite number"));
        }
        if !sf.is_finite() || sf < 1.0 {
            return Err(bad("sf must be a finite number >= 1"));
        }
        if !(big_time * sf).is_finite() {
            return Err(bad("small_time overflows"));
        }
        Ok(Self {
            id: id.into(),
            big_time,
            sf,
        })
    }

    /// Builds a process whose input also carried `small_time`; it must agree
    /// with `big_time * sf` to within `1e-9` relative.
    pub fn with_small_time(
        id: impl Into<String>,
        big_time: f64,
        sf: f64,
        small_time: f64,
    ) -> Result<Self> {
        let p = Self::new(id, big_time, sf)?;
        let derived = p.small_time();
        if !small_time.is_finite() || (small_time - derived).abs() > EPS * derived {
            return Err(Error::InvalidProcess {
                id: p.id.to_string(),
                reason: format!("small_time {small_time} disagrees with big_time * sf = {derived}"),
            });
        }
        Ok(p)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn big_time(&self) -> f64 {
        self.big_time
    }

    pub fn sf(&self) -> f64 {
        self.sf
    }

    pub fn small_time(&self) -> f64 {
        self.big_time * self.sf
    }

    /// Total running time when a fraction `x` of the work runs on big cores.
    pub fn exec_time(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::FractionOutOfRange(x));
        }
        if x == 1.0 {
            return Ok(self.big_time);
        }
        let small = self.small_time();
        Ok(small - x * (small - self.big_time))
    }
}

/// Core counts of a big/small machine. Both pools must be non-empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Machine {
    big: usize,
    small: usize,
}

impl Machine {
    pub fn new(big: usize, small: usize) -> Result<Self> {
        if big == 0 || small == 0 {
            return Err(Error::HomogeneousMachine { big, small });
        }
        Ok(Self { big, small })
    }

    pub fn big(&self) -> usize {
        self.big
    }

    pub fn small(&self) -> usize {
        self.small
    }

    pub fn cores(&self) -> usize {
        self.big + self.small
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Workload {
    processes: Vec<ProcessSpec>,
}

impl Workload {
    pub fn new(processes: Vec<ProcessSpec>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(processes.len());
        for p in &processes {
            if !seen.insert(p.id()) {
                return Err(Error::DuplicateId(p.id.to_string()));
            }
        }
        Ok(Self { processes })
    }

    pub fn processes(&self) -> &[ProcessSpec] {
        &self.processes
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ProcessSpec> {
        self.processes.iter().find(|p| p.id() == id)
    }

    /// A copy of this workload in canonical order.
    pub fn canonical(&self) -> Workload {
        let mut processes = self.processes.clone();
        processes.sort_by(canonical_cmp);
        Workload { processes }
    }

    pub fn is_canonical(&self) -> bool {
        self.processes
            .windows(2)
            .all(|w| canonical_cmp(&w[0], &w[1]) != std::cmp::Ordering::Greater)
    }

    pub fn total_small_time(&self) -> f64 {
        self.processes.iter().map(ProcessSpec::small_time).sum()
    }

    pub fn total_big_time(&self) -> f64 {
        self.processes.iter().map(ProcessSpec::big_time).sum()
    }
}

/// Descending `sf`, ties broken by ascending id.
pub fn canonical_cmp(a: &ProcessSpec, b: &ProcessSpec) -> std::cmp::Ordering {
    b.sf.total_cmp(&a.sf).then_with(|| a.id.cmp(&b.id))
}

pub fn canonical_order(w: &Workload) -> Workload {
    w.canonical()
}

/// Fraction of each process's work placed on big cores, keyed by id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FractionalAssignment {
    fractions: BTreeMap<String, f64>,
}

impl FractionalAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: impl Into<String>, x: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::FractionOutOfRange(x));
        }
        self.fractions.insert(id.into(), x);
        Ok(())
    }

    /// Builds an assignment from `(id, x)` pairs, rejecting any `x` outside `[0, 1]`.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let fractions = pairs
            .into_iter()
            .map(|(id, x)| {
                if (0.0..=1.0).contains(&x) {
                    Ok((id.into(), x))
                } else {
                    Err(Error::FractionOutOfRange(x))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { fractions })
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.fractions.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.fractions.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// Number of processes whose fraction lies strictly inside `(0, 1)` beyond [`EPS`].
    pub fn fractional_count(&self) -> usize {
        self.fractions
            .values()
            .filter(|&&x| x > EPS && x < 1.0 - EPS)
            .count()
    }

    /// Fractions in the order of `w`; fails if any process is missing.
    pub fn fractions_for(&self, w: &Workload) -> Result<Vec<f64>> {
        w.processes()
            .iter()
            .map(|p| {
                self.get(p.id())
                    .ok_or_else(|| Error::MissingAssignment(p.id().to_string()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    /// Total big-pool time.
    pub t_b: f64,
    /// Total small-pool time.
    pub t_s: f64,
    /// Longest single-process running time.
    pub t_max: f64,
    pub per_process: BTreeMap<String, f64>,
    /// `max(t_max, t_b / B, t_s / S)`.
    pub t_f: f64,
}

/// Processes of `w` in canonical order, with each one's index in `w`.
pub(crate) fn canonical_with_positions(w: &Workload) -> (Vec<ProcessSpec>, Vec<usize>) {
    let order = canonical_positions(w);
    let procs = order.iter().map(|&i| w.processes[i].clone()).collect();
    (procs, order)
}

/// Input indices of `w` in canonical order. Sorts compact `(sf, index)`
/// keys and only looks at ids to break ties.
fn canonical_positions(w: &Workload) -> Vec<usize> {
    let mut keys: Vec<(f64, usize)> = w.processes.iter().map(|p| p.sf).zip(0..).collect();
    keys.sort_unstable_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| w.processes[a.1].id.cmp(&w.processes[b.1].id))
    });
    keys.into_iter().map(|(_, i)| i).collect()
}

/// Canonical indices listed in input order.
pub(crate) fn input_order(positions: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; positions.len()];
    for (c, &j) in positions.iter().enumerate() {
        inv[j] = c;
    }
    inv
}

/// Sums run in canonical order, so the result does not depend on input order.
pub fn load_report(w: &Workload, m: Machine, a: &FractionalAssignment) -> Result<LoadReport> {
    let order = canonical_positions(w);
    let procs: Vec<&ProcessSpec> = order.iter().map(|&i| &w.processes[i]).collect();
    let xs = procs
        .iter()
        .map(|p| {
            a.get(p.id())
                .ok_or_else(|| Error::MissingAssignment(p.id().to_string()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(loads_in_order(&procs, &xs, &order, m)?.0)
}

/// Loads of `procs` (canonical order) at fractions `xs`, plus each
/// process's running time in the same order. `positions` gives each
/// process's index in the input workload.
pub(crate) fn loads_in_order<P: std::borrow::Borrow<ProcessSpec>>(
    procs: &[P],
    xs: &[f64],
    positions: &[usize],
    m: Machine,
) -> Result<(LoadReport, Vec<f64>)> {
    let mut t_b = 0.0;
    let mut t_s = 0.0;
    let mut t_max = 0.0_f64;
    let mut times = Vec::with_capacity(procs.len());
    for (p, &x) in procs.iter().zip(xs) {
        let p = p.borrow();
        let t = p.exec_time(x)?;
        t_b += x * p.big_time();
        t_s += (1.0 - x) * p.small_time();
        t_max = t_max.max(t);
        times.push(t);
    }
    let t_f = t_max.max(t_b / m.big() as f64).max(t_s / m.small() as f64);
    let per_process = input_order(positions)
        .into_iter()
        .map(|c| (procs[c].borrow().id().to_string(), times[c]))
        .collect();
    let report = LoadReport {
        t_b,
        t_s,
        t_max,
        per_process,
        t_f,
    };
    Ok((report, times))
}
