//! Optimum solver for N processes on B big and S small cores.
//!
//! The solver starts from the balanced split (highest-`sf` work on big cores
//! until `t_b / B = t_s / S`). If some process then runs longer than the
//! balanced pool load, the longest processes are lowered together by moving
//! their small-core work onto big cores, paid for by moving big-core work of
//! a candidate process (the lowest-`sf` process still holding big-core work)
//! back to small cores so the pools stay balanced. Trading stops when:
//!
//! - the longest time meets the pool load,
//! - a longest process becomes fully big (it cannot get shorter), or
//! - candidates run out, after which the longest processes take as much
//!   big-core time as the big pool can hold.
//!
//! Processes that are neither longest nor the candidate keep a fixed running
//! time, so they sit in an ordered set keyed by that time; the next one to
//! tie with the longest set is always its maximum.

use std::collections::BTreeSet;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    approx_ge, canonical_with_positions, input_order, loads_in_order, tol, FractionalAssignment,
    LoadReport, Machine, ProcessSpec, Workload, EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Terminal {
    /// The balanced pool load is at least every process's running time.
    BalancedDominates,
    /// A longest process runs entirely on big cores (or cannot be sped up).
    LongestFullyBig,
    /// The longest running time met the balanced pool load.
    LinesMeet,
    /// No process was left to trade; the big pool absorbed what it could.
    CandidatesExhausted,
    /// Fewer processes than cores, one process per core.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub assignment: FractionalAssignment,
    pub t_f: f64,
    pub terminal: Terminal,
    pub loads: LoadReport,
    /// Ids whose running time equals `t_f`, in canonical order.
    pub longest_set: Vec<String>,
}

/// Outcome of one trading or finalizing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepEvent {
    /// Emitted once for the initial balanced state in traces.
    Initial,
    /// Longest set lowered; `newly_longest` processes joined it.
    Progress {
        newly_longest: usize,
        candidate_exhausted: bool,
    },
    LongestFullyBig,
    LinesMeet,
    /// Big pool filled while finalizing.
    CapacityBound,
    /// Nothing left to trade; switch to [`TradeState::finalize_unbalanced`].
    NoCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub t_max: f64,
    pub t_b: f64,
    pub t_s: f64,
    pub finalizing: bool,
    pub event: StepEvent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Limit {
    Rest,
    FullyBig,
    Exhaust,
    CandidateRises,
    Meet,
}

/// Solver state while the longest processes are being lowered.
#[derive(Debug, Clone)]
pub struct TradeState {
    machine: Machine,
    /// Canonical order.
    procs: Vec<ProcessSpec>,
    /// Index of each process in the input workload.
    positions: Vec<usize>,
    x: Vec<f64>,
    /// Running time shared by every member of the longest set.
    level: f64,
    longest: Vec<usize>,
    in_longest: Vec<bool>,
    candidate: Option<usize>,
    /// Future candidates; the last entry has the lowest `sf`.
    pending: Vec<usize>,
    /// Processes with a fixed running time, keyed by it.
    resting: BTreeSet<(OrderedFloat<f64>, usize)>,
    rest_key: Vec<f64>,
    rest_big: f64,
    rest_small: f64,
    iterations: usize,
}

impl TradeState {
    fn time(&self, i: usize) -> f64 {
        let p = &self.procs[i];
        self.x[i] * p.big_time() + (1.0 - self.x[i]) * p.small_time()
    }

    fn big_part(&self, i: usize) -> f64 {
        self.x[i] * self.procs[i].big_time()
    }

    fn small_part(&self, i: usize) -> f64 {
        (1.0 - self.x[i]) * self.procs[i].small_time()
    }

    /// Big-core fraction that makes process `i` run exactly `level`.
    fn fraction_at(&self, i: usize, level: f64) -> f64 {
        let p = &self.procs[i];
        ((p.small_time() - level) / (p.small_time() - p.big_time())).clamp(0.0, 1.0)
    }

    fn irreducible(&self, i: usize) -> bool {
        self.x[i] >= 1.0 - EPS || self.procs[i].sf() - 1.0 <= EPS
    }

    fn rest_insert(&mut self, i: usize) {
        let t = self.time(i);
        self.rest_key[i] = t;
        self.resting.insert((OrderedFloat(t), i));
        self.rest_big += self.big_part(i);
        self.rest_small += self.small_part(i);
    }

    fn rest_remove(&mut self, i: usize) {
        self.resting.remove(&(OrderedFloat(self.rest_key[i]), i));
        self.rest_big -= self.big_part(i);
        self.rest_small -= self.small_part(i);
    }

    pub fn machine(&self) -> Machine {
        self.machine
    }

    pub fn t_max(&self) -> f64 {
        self.level
    }

    pub fn t_big(&self) -> f64 {
        let cand = self.candidate.map_or(0.0, |c| self.big_part(c));
        let longest: f64 = self.longest.iter().map(|&i| self.big_part(i)).sum();
        self.rest_big + cand + longest
    }

    pub fn t_small(&self) -> f64 {
        let cand = self.candidate.map_or(0.0, |c| self.small_part(c));
        let longest: f64 = self.longest.iter().map(|&i| self.small_part(i)).sum();
        self.rest_small + cand + longest
    }

    pub fn longest_ids(&self) -> Vec<&str> {
        let mut ids: Vec<usize> = self.longest.clone();
        ids.sort_unstable();
        ids.into_iter().map(|i| self.procs[i].id()).collect()
    }

    pub fn candidate_id(&self) -> Option<&str> {
        self.candidate.map(|c| self.procs[c].id())
    }

    pub fn assignment(&self) -> FractionalAssignment {
        FractionalAssignment::from_pairs(
            self.procs
                .iter()
                .zip(&self.x)
                .map(|(p, &x)| (p.id(), x.clamp(0.0, 1.0))),
        )
        .expect("fractions are clamped")
    }

    /// Pool load already covers the longest process.
    pub fn balance_dominates(&self) -> bool {
        approx_ge(
            self.t_big() / self.machine.big() as f64,
            self.level,
            self.level,
        )
    }

    /// Some longest process cannot get any shorter.
    pub fn longest_irreducible(&self) -> bool {
        self.longest.iter().any(|&i| self.irreducible(i))
    }

    fn next_candidate(&mut self) {
        while let Some(c) = self.pending.pop() {
            if self.in_longest[c] || self.x[c] <= 0.0 {
                continue;
            }
            self.rest_remove(c);
            self.candidate = Some(c);
            return;
        }
        self.candidate = None;
    }

    fn bump_iterations(&mut self) -> Result<()> {
        self.iterations += 1;
        let cap = self.procs.len() + self.machine.cores();
        if self.iterations > cap {
            return Err(Error::Invariant(format!(
                "trading did not terminate within {cap} steps"
            )));
        }
        Ok(())
    }

    /// Lowers the longest set by the largest amount that keeps the current
    /// structure, then applies whichever events became binding.
    fn advance(&mut self) -> Result<StepEvent> {
        self.bump_iterations()?;
        let big = self.machine.big() as f64;
        let small = self.machine.small() as f64;
        let level = self.level;

        // Per unit of lowering: big load gained and small load shed by the longest set.
        let mut big_rate = 0.0;
        let mut small_rate = 0.0;
        let mut full_gap = f64::INFINITY;
        for &i in &self.longest {
            let f = self.procs[i].sf();
            big_rate += 1.0 / (f - 1.0);
            small_rate += f / (f - 1.0);
            full_gap = full_gap.min(level - self.procs[i].big_time());
        }
        // Candidate big time returned per unit of lowering is k / (B f_c + S).
        let k = small * big_rate + big * small_rate;
        let t_b = self.t_big();

        let mut limits = vec![(Limit::FullyBig, full_gap)];
        if let Some(&(OrderedFloat(t), _)) = self.resting.last() {
            limits.push((Limit::Rest, level - t));
        }
        let give_rate = match self.candidate {
            Some(c) => {
                let p = &self.procs[c];
                let f = p.sf();
                let give_rate = k / (big * f + small);
                limits.push((Limit::Exhaust, self.big_part(c) / give_rate));
                let drift = big_rate - give_rate;
                limits.push((Limit::Meet, (big * level - t_b) / (big + drift)));
                limits.push((
                    Limit::CandidateRises,
                    (level - self.time(c)) / (1.0 + give_rate * (f - 1.0)),
                ));
                give_rate
            }
            None => {
                limits.push((Limit::Meet, (big * level - t_b) / (big + big_rate)));
                0.0
            }
        };

        let delta = limits
            .iter()
            .map(|&(_, d)| d)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let slack = tol(level);
        let hit = |which: Limit| {
            limits
                .iter()
                .any(|&(l, d)| l == which && d <= delta + slack)
        };

        if let Some(c) = self.candidate {
            let returned = delta * give_rate;
            let bt = self.procs[c].big_time();
            self.x[c] = if hit(Limit::Exhaust) {
                0.0
            } else {
                (self.x[c] - returned / bt).clamp(0.0, 1.0)
            };
        }
        self.level = level - delta;
        for idx in 0..self.longest.len() {
            let i = self.longest[idx];
            self.x[i] = self.fraction_at(i, self.level);
        }

        if hit(Limit::Meet) {
            return Ok(if self.candidate.is_some() {
                StepEvent::LinesMeet
            } else {
                StepEvent::CapacityBound
            });
        }
        if hit(Limit::FullyBig) {
            for idx in 0..self.longest.len() {
                let i = self.longest[idx];
                if self.level - self.procs[i].big_time() <= slack {
                    self.x[i] = 1.0;
                }
            }
            return Ok(StepEvent::LongestFullyBig);
        }

        let mut joined = 0;
        let mut exhausted = false;
        if let Some(c) = self.candidate {
            if hit(Limit::CandidateRises) {
                self.candidate = None;
                self.in_longest[c] = true;
                self.longest.push(c);
                joined += 1;
            } else if hit(Limit::Exhaust) {
                self.candidate = None;
                self.rest_insert(c);
                exhausted = true;
            }
        }
        while let Some(&(OrderedFloat(t), i)) = self.resting.last() {
            if t < self.level - slack {
                break;
            }
            self.rest_remove(i);
            self.in_longest[i] = true;
            self.longest.push(i);
            joined += 1;
        }
        if self.longest_irreducible() {
            for idx in 0..self.longest.len() {
                let i = self.longest[idx];
                if self.procs[i].sf() - 1.0 > EPS && self.x[i] >= 1.0 - EPS {
                    self.x[i] = 1.0;
                }
            }
            return Ok(StepEvent::LongestFullyBig);
        }
        if self.candidate.is_none() {
            self.next_candidate();
        }
        Ok(StepEvent::Progress {
            newly_longest: joined,
            candidate_exhausted: exhausted,
        })
    }

    /// One trade of the candidate's big-core work for small-core work of the
    /// longest set.
    pub fn trade_step(&mut self) -> Result<StepEvent> {
        if self.candidate.is_none() {
            return Ok(StepEvent::NoCandidate);
        }
        self.advance()
    }

    /// With no candidates left, moves small-core work of the longest set to
    /// big cores until the big pool is full or a longest process is fully big.
    pub fn finalize_unbalanced(mut self) -> Result<SolveReport> {
        self.finalize_traced(&mut |_| {})
    }

    fn finalize_traced(&mut self, on_step: &mut dyn FnMut(&TraceRecord)) -> Result<SolveReport> {
        if self.candidate.is_some() {
            return Err(Error::Invariant(
                "finalize_unbalanced called while a trade candidate remains".into(),
            ));
        }
        if self.balance_dominates() {
            return self.report(Terminal::CandidatesExhausted);
        }
        loop {
            let event = self.advance()?;
            on_step(&self.record(true, event));
            if !matches!(event, StepEvent::Progress { .. }) {
                return self.report(Terminal::CandidatesExhausted);
            }
        }
    }

    fn record(&self, finalizing: bool, event: StepEvent) -> TraceRecord {
        TraceRecord {
            iteration: self.iterations,
            t_max: self.level,
            t_b: self.t_big(),
            t_s: self.t_small(),
            finalizing,
            event,
        }
    }

    fn report(&self, terminal: Terminal) -> Result<SolveReport> {
        let xs: Vec<f64> = self.x.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        build_report(&self.procs, &xs, &self.positions, self.machine, terminal)
    }
}

/// `procs` in canonical order with matching fractions `xs`.
fn build_report(
    procs: &[ProcessSpec],
    xs: &[f64],
    positions: &[usize],
    m: Machine,
    terminal: Terminal,
) -> Result<SolveReport> {
    let (loads, times) = loads_in_order(procs, xs, positions, m)?;
    let t_f = loads.t_f;
    // Input order keeps the map construction cache-friendly.
    let assignment = FractionalAssignment::from_pairs(
        input_order(positions)
            .into_iter()
            .map(|c| (procs[c].id(), xs[c])),
    )?;
    let longest_set = procs
        .iter()
        .zip(&times)
        .filter(|&(_, &t)| approx_ge(t, t_f, t_f))
        .map(|(p, _)| p.id().to_string())
        .collect();
    Ok(SolveReport {
        assignment,
        t_f,
        terminal,
        loads,
        longest_set,
    })
}

/// One process per core: the `B` processes with the longest small-core time
/// go to big cores, the rest to small cores.
pub fn solve_trivial(w: &Workload, m: Machine) -> Result<SolveReport> {
    if w.len() >= m.cores() {
        return Err(Error::Capacity(format!(
            "{} processes do not fit one per core on {} cores",
            w.len(),
            m.cores()
        )));
    }
    let (procs, positions) = canonical_with_positions(w);
    let mut by_small: Vec<usize> = (0..procs.len()).collect();
    // Stable, so equal small times keep canonical order.
    by_small.sort_by(|&a, &b| procs[b].small_time().total_cmp(&procs[a].small_time()));
    let mut xs = vec![0.0; procs.len()];
    for &i in by_small.iter().take(m.big()) {
        xs[i] = 1.0;
    }
    build_report(&procs, &xs, &positions, m, Terminal::Trivial)
}

/// Balanced starting point: canonical prefix on big cores, suffix on small
/// cores, one process `k` split so that `t_b / B = t_s / S`.
pub fn initial_balance(w: &Workload, m: Machine) -> Result<(TradeState, usize)> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let (procs, positions) = canonical_with_positions(w);
    let n = procs.len();
    let big = m.big() as f64;
    let small = m.small() as f64;
    let scale = big * w.total_small_time() + small * w.total_big_time();

    let mut big_before = 0.0;
    let mut small_from = w.total_small_time();
    let mut split = None;
    for (k, p) in procs.iter().enumerate() {
        let small_after = small_from - p.small_time();
        if approx_ge(big * small_from, small * big_before, scale)
            && approx_ge(
                small * (big_before + p.big_time()),
                big * small_after,
                scale,
            )
        {
            let xk = (big * small_from - small * big_before)
                / (small * p.big_time() + big * p.small_time());
            split = Some((k, xk.clamp(0.0, 1.0)));
            break;
        }
        big_before += p.big_time();
        small_from = small_after;
    }
    let (k, xk) = split
        .ok_or_else(|| Error::Invariant("no split process satisfies the balance bracket".into()))?;

    let x: Vec<f64> = (0..n)
        .map(|i| match i.cmp(&k) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => xk,
            std::cmp::Ordering::Greater => 0.0,
        })
        .collect();

    let mut state = TradeState {
        machine: m,
        procs,
        positions,
        x,
        level: 0.0,
        longest: Vec::new(),
        in_longest: vec![false; n],
        candidate: None,
        pending: Vec::new(),
        resting: BTreeSet::new(),
        rest_key: vec![0.0; n],
        rest_big: 0.0,
        rest_small: 0.0,
        iterations: 0,
    };
    let times: Vec<f64> = (0..n).map(|i| state.time(i)).collect();
    state.level = times.iter().copied().fold(0.0, f64::max);
    let slack = tol(state.level);
    for (i, &t) in times.iter().enumerate() {
        if t >= state.level - slack {
            state.in_longest[i] = true;
            state.longest.push(i);
        }
    }
    state.pending = (0..n)
        .filter(|&i| !state.in_longest[i] && state.x[i] > 0.0)
        .collect();
    let mut resting = Vec::with_capacity(n);
    for (i, &t) in times.iter().enumerate() {
        if !state.in_longest[i] {
            state.rest_key[i] = t;
            state.rest_big += state.big_part(i);
            state.rest_small += state.small_part(i);
            resting.push((OrderedFloat(t), i));
        }
    }
    // Bulk construction from sorted keys beats one insert per process.
    resting.sort_unstable();
    state.resting = resting.into_iter().collect();
    state.next_candidate();
    Ok((state, k))
}

pub fn solve(w: &Workload, m: Machine) -> Result<SolveReport> {
    solve_traced(w, m, &mut |_| {})
}

/// [`solve`], reporting every trading step to `on_step`.
pub fn solve_traced(
    w: &Workload,
    m: Machine,
    on_step: &mut dyn FnMut(&TraceRecord),
) -> Result<SolveReport> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if w.len() < m.cores() {
        let trivial = solve_trivial(w, m)?;
        let floor = w
            .processes()
            .iter()
            .map(ProcessSpec::big_time)
            .fold(0.0, f64::max);
        // One-per-core is only optimal when it already meets the
        // longest big-core time; otherwise fall through to trading.
        if trivial.t_f <= floor + tol(floor) {
            return Ok(trivial);
        }
    }

    let (mut state, _) = initial_balance(w, m)?;
    on_step(&state.record(false, StepEvent::Initial));
    if state.balance_dominates() {
        return state.report(Terminal::BalancedDominates);
    }
    if state.longest_irreducible() {
        return state.report(Terminal::LongestFullyBig);
    }
    loop {
        let event = state.trade_step()?;
        match event {
            StepEvent::NoCandidate => return state.finalize_traced(on_step),
            StepEvent::LinesMeet => {
                on_step(&state.record(false, event));
                return state.report(Terminal::LinesMeet);
            }
            StepEvent::LongestFullyBig => {
                on_step(&state.record(false, event));
                return state.report(Terminal::LongestFullyBig);
            }
            _ => on_step(&state.record(false, event)),
        }
    }
}
