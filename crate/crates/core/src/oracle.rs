//! Independent checks on the optimum makespan.
//!
//! `feasible` decides whether some split keeps every process, the big pool
//! and the small pool within a makespan `t`. Each process first gets the
//! least big-core share that keeps it under `t`; leftover big capacity then
//! goes to the highest-`sf` processes, since one big-core unit spent on
//! process k removes `sf_k` units of small-core load.

use crate::error::{Error, Result};
use crate::model::{Machine, ProcessSpec, Workload};

const MAX_BISECTIONS: usize = 200;

/// Relative slack on the capacity tests, so an exactly-tight `t` counts as feasible.
const SLACK: f64 = 1e-12;

fn feasible_sorted(procs: &[&ProcessSpec], m: Machine, t: f64) -> bool {
    if t.is_nan() || t <= 0.0 {
        return false;
    }
    let t_slack = t * (1.0 + SLACK);
    let mut floors = Vec::with_capacity(procs.len());
    let mut big = 0.0;
    let mut small = 0.0;
    for p in procs {
        if p.big_time() > t_slack {
            return false;
        }
        let floor = if p.small_time() <= t || p.sf() == 1.0 {
            0.0
        } else {
            ((p.small_time() - t) / (p.small_time() - p.big_time())).clamp(0.0, 1.0)
        };
        big += floor * p.big_time();
        small += (1.0 - floor) * p.small_time();
        floors.push(floor);
    }
    let big_cap = m.big() as f64 * t_slack;
    let small_cap = m.small() as f64 * t_slack;
    if big > big_cap {
        return false;
    }
    let mut spare = big_cap - big;
    for (p, floor) in procs.iter().zip(floors) {
        if small <= small_cap || spare <= 0.0 {
            break;
        }
        let room = (1.0 - floor) * p.big_time();
        let moved = room.min(spare).min((small - small_cap) / p.sf());
        spare -= moved;
        small -= moved * p.sf();
    }
    small <= small_cap
}

fn by_sf_desc(w: &Workload) -> Vec<&ProcessSpec> {
    let mut procs: Vec<&ProcessSpec> = w.processes().iter().collect();
    procs.sort_by(|a, b| b.sf().total_cmp(&a.sf()));
    procs
}

/// Whether makespan `t` is achievable by some fractional assignment.
pub fn feasible(w: &Workload, m: Machine, t: f64) -> bool {
    feasible_sorted(&by_sf_desc(w), m, t)
}

/// Smallest feasible makespan, to within `rel_tol`.
pub fn bisect_optimum(w: &Workload, m: Machine, rel_tol: f64) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let rel_tol = rel_tol.max(1e-12);
    let procs = by_sf_desc(w);
    // No process can finish faster than its big-core time; everything on
    // small cores always fits.
    let mut lo = procs.iter().map(|p| p.big_time()).fold(0.0, f64::max);
    let mut hi = w.total_small_time();
    if feasible_sorted(&procs, m, lo) {
        return Ok(lo);
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible_sorted(&procs, m, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Brute-force minimum of `max(t_max, t_b / B, t_s / S)` over the grid
/// `x_k ∈ {0, 1/G, ..., 1}`. Only for `N <= 5`.
pub fn grid_optimum(w: &Workload, m: Machine, grid: usize) -> Result<f64> {
    let n = w.len();
    if n == 0 {
        return Err(Error::EmptyWorkload);
    }
    if n > 5 {
        return Err(Error::GridRefused(format!(
            "{n} processes; at most 5 supported"
        )));
    }
    if grid < 10 {
        return Err(Error::GridRefused(format!("grid {grid} below 10")));
    }
    let procs = w.processes();
    let g = grid as f64;
    let inv_big = 1.0 / m.big() as f64;
    let inv_small = 1.0 / m.small() as f64;
    let last = &procs[n - 1];

    // Objective in the last coordinate is a max of linear pieces, hence
    // convex over the grid; its minimum is where the forward difference
    // stops being negative.
    let best_last = |t_max: f64, big: f64, small: f64| -> f64 {
        let f = |j: usize| {
            let x = j as f64 / g;
            let t = x * last.big_time() + (1.0 - x) * last.small_time();
            t_max
                .max(t)
                .max((big + x * last.big_time()) * inv_big)
                .max((small + (1.0 - x) * last.small_time()) * inv_small)
        };
        let (mut lo, mut hi) = (0usize, grid);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if f(mid + 1) >= f(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        f(lo)
    };

    struct Walk<'a> {
        procs: &'a [ProcessSpec],
        grid: usize,
        inv_big: f64,
        inv_small: f64,
        leaf: &'a dyn Fn(f64, f64, f64) -> f64,
        best: f64,
    }

    impl Walk<'_> {
        fn visit(&mut self, depth: usize, t_max: f64, big: f64, small: f64) {
            // Loads only grow with more processes, so a partial objective
            // at or above the best complete one cannot improve on it.
            if t_max.max(big * self.inv_big).max(small * self.inv_small) >= self.best {
                return;
            }
            if depth + 1 == self.procs.len() {
                self.best = self.best.min((self.leaf)(t_max, big, small));
                return;
            }
            let p = &self.procs[depth];
            let g = self.grid as f64;
            for j in 0..=self.grid {
                let x = j as f64 / g;
                let b = x * p.big_time();
                let s = (1.0 - x) * p.small_time();
                self.visit(depth + 1, t_max.max(b + s), big + b, small + s);
            }
        }
    }

    let mut walk = Walk {
        procs,
        grid,
        inv_big,
        inv_small,
        leaf: &best_last,
        best: f64::INFINITY,
    };
    walk.visit(0, 0.0, 0.0, 0.0);
    Ok(walk.best)
}
