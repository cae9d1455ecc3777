//! Closed-form optimum for one big and one small core.
//!
//! Processes are taken in canonical (descending `sf`) order. The balanced
//! split moves the highest-`sf` work onto the big core until both cores carry
//! equal load; if the split process then overlaps itself, low-`sf` work on the
//! big core is traded back for the split process's small-core portion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    approx_ge, load_report, tol, FractionalAssignment, Machine, ProcessSpec, Workload, EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Case1B1S {
    /// Two processes; the higher-`sf` one runs alone on the big core.
    TwoP1Big,
    /// Two processes, both split, all four times equal.
    TwoBalanced,
    /// Two processes; the lower-`sf` one runs alone on the big core.
    TwoP2Big,
    /// Balanced split with no self-overlap.
    NNoOverlap,
    /// The split process takes the big core by itself.
    NPkBig,
    /// A second process is split to absorb the trade.
    NJTrade,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solve1B1SResult {
    pub assignment: FractionalAssignment,
    pub t_f: f64,
    pub case: Case1B1S,
    pub split_k: Option<String>,
    pub split_j: Option<String>,
}

fn one_by_one() -> Machine {
    Machine::new(1, 1).expect("1B1S machine is valid")
}

fn finish(
    w: &Workload,
    xs: impl IntoIterator<Item = (String, f64)>,
    case: Case1B1S,
    split_k: Option<String>,
    split_j: Option<String>,
) -> Result<Solve1B1SResult> {
    let assignment = FractionalAssignment::from_pairs(xs)?;
    let t_f = load_report(w, one_by_one(), &assignment)?.t_f;
    Ok(Solve1B1SResult {
        assignment,
        t_f,
        case,
        split_k,
        split_j,
    })
}

pub fn solve_two_1b1s(p1: &ProcessSpec, p2: &ProcessSpec) -> Result<Solve1B1SResult> {
    let w = Workload::new(vec![p1.clone(), p2.clone()])?.canonical();
    let (p1, p2) = (&w.processes()[0], &w.processes()[1]);
    let scale = p1.small_time() + p2.small_time();
    let pair = |x1: f64, x2: f64| [(p1.id().to_string(), x1), (p2.id().to_string(), x2)];

    if approx_ge(p1.big_time(), p2.small_time(), scale) {
        return finish(&w, pair(1.0, 0.0), Case1B1S::TwoP1Big, None, None);
    }
    if approx_ge(p2.big_time(), p1.small_time(), scale) {
        return finish(&w, pair(0.0, 1.0), Case1B1S::TwoP2Big, None, None);
    }

    let denom = 1.0 - 1.0 / (p1.sf() * p2.sf());
    if denom < EPS {
        // Both cores run these two at the same speed; any balanced split is optimal.
        let x1 = ((p1.small_time() + p2.small_time()) / (p1.big_time() + p1.small_time()))
            .clamp(0.0, 1.0);
        return finish(&w, pair(x1, 0.0), Case1B1S::TwoBalanced, None, None);
    }
    let x1 = ((1.0 - p2.big_time() / p1.small_time()) / denom).clamp(0.0, 1.0);
    let x2 = ((1.0 - p1.big_time() / p2.small_time()) / denom).clamp(0.0, 1.0);
    finish(&w, pair(x1, x2), Case1B1S::TwoBalanced, None, None)
}

/// Locates the process that straddles the balance point when the highest-`sf`
/// work fills the big core first. Returns its index in canonical order and
/// its big-core fraction.
pub fn find_split_k(w: &Workload) -> Result<(usize, f64)> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let canon;
    let procs = if w.is_canonical() {
        w.processes()
    } else {
        canon = w.canonical();
        canon.processes()
    };
    let scale = w.total_small_time();

    let mut big_before = 0.0;
    let mut small_from: f64 = procs.iter().map(ProcessSpec::small_time).sum();
    for (k, p) in procs.iter().enumerate() {
        let small_after = small_from - p.small_time();
        if approx_ge(small_from, big_before, scale)
            && approx_ge(big_before + p.big_time(), small_after, scale)
        {
            let x = (small_from - big_before) / (p.big_time() + p.small_time());
            return Ok((k, x.clamp(0.0, 1.0)));
        }
        big_before += p.big_time();
        small_from = small_after;
    }
    Err(Error::Invariant(
        "no split process satisfies the balance bracket".into(),
    ))
}

pub fn solve_n_1b1s(w: &Workload) -> Result<Solve1B1SResult> {
    if w.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let w = w.canonical();
    let procs = w.processes();
    let n = procs.len();
    let scale = w.total_small_time();
    let (k, xk) = find_split_k(&w)?;
    let pk = &procs[k];
    let id = |i: usize| procs[i].id().to_string();

    // Balanced split: prefix on big, suffix on small.
    let big_load: f64 =
        procs[..k].iter().map(ProcessSpec::big_time).sum::<f64>() + xk * pk.big_time();
    let tk = pk.exec_time(xk)?;
    if approx_ge(big_load, tk, scale) {
        let xs = (0..n).map(|i| {
            let x = match i.cmp(&k) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => xk,
                std::cmp::Ordering::Greater => 0.0,
            };
            (id(i), x)
        });
        return finish(&w, xs, Case1B1S::NNoOverlap, Some(id(k)), None);
    }

    let others_small = scale - pk.small_time();
    if approx_ge(pk.big_time(), others_small, scale) {
        let xs = (0..n).map(|i| (id(i), if i == k { 1.0 } else { 0.0 }));
        return finish(&w, xs, Case1B1S::NPkBig, Some(id(k)), None);
    }

    // Trade: find j < k whose partial move back to small balances
    // t_b = t_s = t_k.
    let fk = pk.sf();
    let big_prefix: Vec<f64> = std::iter::once(0.0)
        .chain(procs.iter().scan(0.0, |acc, p| {
            *acc += p.big_time();
            Some(*acc)
        }))
        .collect();
    // small_suffix_excl_k[i] = sum of small_time over i..n, skipping k.
    let mut small_suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let own = if i == k { 0.0 } else { procs[i].small_time() };
        small_suffix[i] = small_suffix[i + 1] + own;
    }
    let target = pk.small_time();
    for j in (0..k).rev() {
        let pj = &procs[j];
        let lower = big_prefix[j] + fk * small_suffix[j];
        let upper = big_prefix[j + 1] + fk * small_suffix[j + 1];
        let denom = fk * pj.small_time() - pj.big_time();
        if denom <= tol(scale) {
            continue;
        }
        if approx_ge(lower, target, scale) && approx_ge(target, upper, scale) {
            let xj = ((lower - target) / denom).clamp(0.0, 1.0);
            let small_load = (1.0 - xj) * pj.small_time() + small_suffix[j + 1];
            let xk = (small_load / pk.big_time()).clamp(0.0, 1.0);
            let xs = (0..n).map(|i| {
                let x = if i == k {
                    xk
                } else if i == j {
                    xj
                } else if i < j {
                    1.0
                } else {
                    0.0
                };
                (id(i), x)
            });
            return finish(&w, xs, Case1B1S::NJTrade, Some(id(k)), Some(id(j)));
        }
    }
    Err(Error::Invariant(format!(
        "no trade partner found for split process `{}`",
        pk.id()
    )))
}
