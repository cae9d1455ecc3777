//! Instance generation and invariant checks shared by the integration tests.
#![allow(dead_code)]

use std::ops::RangeInclusive;

use hemc::analytic::{solve_n_1b1s, solve_two_1b1s, Case1B1S};
use hemc::general::{solve, solve_traced, SolveReport, Terminal};
use hemc::heuristics::{schedule_heuristic, HeuristicKind};
use hemc::model::{canonical_order, load_report};
use hemc::oracle::{bisect_optimum, feasible, grid_optimum};
use hemc::packing::{pack, validate, CoreKind};
use hemc::{Machine, ProcessSpec, Workload};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub const EPS: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub w: Workload,
    pub m: Machine,
}

impl Instance {
    pub fn new(params: &[(f64, f64)], big: usize, small: usize) -> Self {
        let procs = params
            .iter()
            .enumerate()
            .map(|(i, &(t, sf))| ProcessSpec::new(format!("p{i}"), t, sf).unwrap())
            .collect();
        Self {
            w: Workload::new(procs).unwrap(),
            m: Machine::new(big, small).unwrap(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dist {
    pub n: RangeInclusive<usize>,
    pub big: RangeInclusive<usize>,
    pub small: RangeInclusive<usize>,
    pub sf: (f64, f64),
    pub big_time: (f64, f64),
}

impl Dist {
    /// N in 2..=8, B and S in 1..=3, sf in [1, 3], big_time in [1, 1000].
    pub fn standard() -> Self {
        Self {
            n: 2..=8,
            big: 1..=3,
            small: 1..=3,
            sf: (1.0, 3.0),
            big_time: (1.0, 1000.0),
        }
    }
}

/// One instance from `d`. Every fifth instance draws `sf` and times from a
/// handful of values so that ties and `sf = 1` show up often.
pub fn random_instance(r: &mut ChaCha8Rng, d: &Dist) -> Instance {
    let n = r.gen_range(d.n.clone());
    let big = r.gen_range(d.big.clone());
    let small = r.gen_range(d.small.clone());
    let coarse = r.gen_ratio(1, 5);
    let params: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            if coarse {
                let sf: f64 = [1.0, 1.5, 2.0, 3.0][r.gen_range(0..4)];
                let t: f64 = [10.0, 50.0, 100.0][r.gen_range(0..3)];
                (
                    t.clamp(d.big_time.0, d.big_time.1),
                    sf.clamp(d.sf.0, d.sf.1),
                )
            } else {
                (
                    r.gen_range(d.big_time.0..=d.big_time.1),
                    r.gen_range(d.sf.0..=d.sf.1),
                )
            }
        })
        .collect();
    Instance::new(&params, big, small)
}

pub fn instances(seed: u64, count: usize, d: &Dist) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count).map(|_| random_instance(&mut r, d)).collect()
}

fn solved(inst: &Instance) -> Result<SolveReport, String> {
    solve(&inst.w, inst.m).map_err(|e| format!("solve failed: {e}"))
}

/// `solve` agrees with the bisection oracle within 1e-6 relative.
pub fn check_oracle(inst: &Instance) -> Check {
    let r = solved(inst)?;
    let b = bisect_optimum(&inst.w, inst.m, 1e-12).map_err(|e| e.to_string())?;
    ensure(rel_close(r.t_f, b, 1e-6), || {
        format!("solve {} vs bisect {b}", r.t_f)
    })
}

/// `solve` is within the grid oracle's resolution, and never above it.
pub fn check_grid(inst: &Instance, grid: usize) -> Check {
    let r = solved(inst)?;
    let g = grid_optimum(&inst.w, inst.m, grid).map_err(|e| e.to_string())?;
    let res = inst.w.total_small_time() / grid as f64;
    ensure(r.t_f <= g * (1.0 + 1e-9), || {
        format!("solve {} above grid {g}", r.t_f)
    })?;
    ensure(g <= r.t_f + res + 1e-9 * g, || {
        format!("grid {g} above solve {} + {res}", r.t_f)
    })
}

/// The optimum is realizable: pack succeeds, validate is clean, per-pool
/// busy time equals the loads, idle time is non-negative, and the segment
/// count stays within `N + 2(B + S)`.
pub fn check_pack(inst: &Instance) -> Check {
    let r = solved(inst)?;
    let s = pack(&inst.w, inst.m, &r.assignment, r.t_f).map_err(|e| format!("pack: {e}"))?;
    let v = validate(&s, &inst.w, inst.m);
    ensure(v.is_empty(), || format!("violations: {v:?}"))?;
    let scale = r.t_f * inst.m.cores() as f64;
    ensure(
        rel_close(s.busy_time(CoreKind::Big), r.loads.t_b, 1e-9)
            || (s.busy_time(CoreKind::Big) - r.loads.t_b).abs() <= 1e-9 * scale,
        || {
            format!(
                "big busy {} vs t_b {}",
                s.busy_time(CoreKind::Big),
                r.loads.t_b
            )
        },
    )?;
    ensure(
        rel_close(s.busy_time(CoreKind::Small), r.loads.t_s, 1e-9)
            || (s.busy_time(CoreKind::Small) - r.loads.t_s).abs() <= 1e-9 * scale,
        || {
            format!(
                "small busy {} vs t_s {}",
                s.busy_time(CoreKind::Small),
                r.loads.t_s
            )
        },
    )?;
    for (kind, i, segs) in s.cores() {
        let busy: f64 = segs.iter().map(|x| x.duration()).sum();
        ensure(busy <= r.t_f * (1.0 + 1e-9), || {
            format!("{kind} {i} busy {busy} > t_f {}", r.t_f)
        })?;
    }
    let limit = inst.w.len() + 2 * inst.m.cores();
    ensure(s.segment_count() <= limit, || {
        format!("{} segments > {limit}", s.segment_count())
    })?;
    ensure(s.makespan <= r.t_f * (1.0 + 1e-9), || {
        format!("makespan {} > t_f {}", s.makespan, r.t_f)
    })
}

/// Through trading `t_max` never rises, `t_b / B` never falls, and the pools
/// stay balanced until finalizing starts.
pub fn check_trace(inst: &Instance) -> Check {
    let mut trace = Vec::new();
    let r = solve_traced(&inst.w, inst.m, &mut |t| trace.push(*t)).map_err(|e| e.to_string())?;
    let (b, s) = (inst.m.big() as f64, inst.m.small() as f64);
    let scale = inst.w.total_small_time();
    for pair in trace.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        ensure(q.t_max <= p.t_max + EPS * scale, || {
            format!("t_max rose {} -> {}", p.t_max, q.t_max)
        })?;
        ensure(q.t_b / b >= p.t_b / b - EPS * scale, || {
            format!("t_b/B fell {} -> {}", p.t_b / b, q.t_b / b)
        })?;
    }
    for t in trace.iter().filter(|t| !t.finalizing) {
        ensure(
            (s * t.t_b - b * t.t_s).abs() <= EPS * (t.t_b + t.t_s).max(1.0) * (b + s),
            || {
                format!(
                    "unbalanced at iteration {}: t_b {} t_s {}",
                    t.iteration, t.t_b, t.t_s
                )
            },
        )?;
    }
    if let Some(last) = trace.last() {
        ensure(r.t_f >= last.t_max - EPS * scale, || {
            "t_f below final t_max".into()
        })?;
    }
    ensure(trace.len() <= inst.w.len() + inst.m.cores() + 2, || {
        format!("{} trace records", trace.len())
    })
}

/// Report-level invariants: consistency with `load_report`, the
/// terminal-case conditions and the fractional-count bound.
pub fn check_report(inst: &Instance) -> Check {
    let r = solved(inst)?;
    let lr = load_report(&inst.w, inst.m, &r.assignment).map_err(|e| e.to_string())?;
    ensure(lr.t_f == r.t_f, || {
        format!("t_f {} vs load_report {}", r.t_f, lr.t_f)
    })?;
    let (b, s) = (inst.m.big() as f64, inst.m.small() as f64);
    let tol = EPS * r.t_f.max(1.0) * 10.0;
    ensure(
        r.t_f >= lr.t_b / b - tol && r.t_f >= lr.t_s / s - tol && r.t_f >= lr.t_max - tol,
        || "t_f below a component".into(),
    )?;
    match r.terminal {
        Terminal::BalancedDominates => ensure((lr.t_b / b - lr.t_s / s).abs() <= tol, || {
            format!(
                "balanced terminal but t_b/B {} t_s/S {}",
                lr.t_b / b,
                lr.t_s / s
            )
        })?,
        Terminal::CandidatesExhausted => ensure(lr.t_b / b >= lr.t_s / s - tol, || {
            format!(
                "exhausted terminal but t_b/B {} < t_s/S {}",
                lr.t_b / b,
                lr.t_s / s
            )
        })?,
        _ => {}
    }
    let frac = r.assignment.fractional_count();
    ensure(frac <= r.longest_set.len() + 1, || {
        format!("{frac} fractional, longest set {:?}", r.longest_set)
    })
}

/// Scaling every big-core time by `c` scales `t_f` by `c` and keeps `x`.
pub fn check_scale(inst: &Instance, c: f64) -> Check {
    let r = solved(inst)?;
    let procs = inst
        .w
        .processes()
        .iter()
        .map(|p| ProcessSpec::new(p.id(), p.big_time() * c, p.sf()).unwrap())
        .collect();
    let scaled = Instance {
        w: Workload::new(procs).unwrap(),
        m: inst.m,
    };
    let rs = solved(&scaled)?;
    ensure(rel_close(rs.t_f, c * r.t_f, 1e-9), || {
        format!("scaled t_f {} vs {}", rs.t_f, c * r.t_f)
    })?;
    // Only compare fractions when the optimum is unique enough to pin them:
    // re-solving the original and the scaled instance must give the same x.
    for (id, x) in r.assignment.iter() {
        let y = rs.assignment.get(id).unwrap();
        ensure((x - y).abs() <= 1e-6, || {
            format!("x[{id}] {x} vs scaled {y}")
        })?;
    }
    Ok(())
}

/// Extra cores never hurt; an extra process never helps; input order is irrelevant.
pub fn check_monotone(inst: &Instance, extra: (f64, f64)) -> Check {
    let base = solved(inst)?.t_f;
    let tol = 1e-9 * base;
    let more_big = Instance {
        w: inst.w.clone(),
        m: Machine::new(inst.m.big() + 1, inst.m.small()).unwrap(),
    };
    let t = solved(&more_big)?.t_f;
    ensure(t <= base + tol, || format!("extra big core: {t} > {base}"))?;
    let more_small = Instance {
        w: inst.w.clone(),
        m: Machine::new(inst.m.big(), inst.m.small() + 1).unwrap(),
    };
    let t = solved(&more_small)?.t_f;
    ensure(t <= base + tol, || {
        format!("extra small core: {t} > {base}")
    })?;

    let mut procs = inst.w.processes().to_vec();
    procs.push(ProcessSpec::new("extra", extra.0, extra.1).unwrap());
    let more_work = Instance {
        w: Workload::new(procs.clone()).unwrap(),
        m: inst.m,
    };
    let t = solved(&more_work)?.t_f;
    ensure(t >= base - tol, || format!("extra process: {t} < {base}"))?;

    procs.pop();
    procs.reverse();
    let reversed = Instance {
        w: Workload::new(procs).unwrap(),
        m: inst.m,
    };
    let t = solved(&reversed)?.t_f;
    ensure(rel_close(t, base, 1e-12), || {
        format!("reversed input: {t} vs {base}")
    })
}

/// Closed-form 1B1S solver invariants, including agreement with `solve`.
pub fn check_1b1s(w: &Workload) -> Check {
    let one = Machine::new(1, 1).unwrap();
    let r = solve_n_1b1s(w).map_err(|e| format!("solve_n_1b1s: {e}"))?;
    let lr = load_report(w, one, &r.assignment).map_err(|e| e.to_string())?;
    ensure(lr.t_f == r.t_f, || {
        format!("t_f {} vs load_report {}", r.t_f, lr.t_f)
    })?;
    let g = solve(w, one).map_err(|e| e.to_string())?;
    ensure(rel_close(g.t_f, r.t_f, 1e-9), || {
        format!("general {} vs 1b1s {} ({:?})", g.t_f, r.t_f, r.case)
    })?;
    ensure(r.assignment.fractional_count() <= 2, || {
        "more than two fractional".into()
    })?;
    if r.case == Case1B1S::NJTrade {
        let k = r.split_k.as_deref().unwrap();
        let tk = lr.per_process[k];
        ensure(
            rel_close(lr.t_b, lr.t_s, 1e-9) && rel_close(lr.t_b, tk, 1e-9),
            || format!("trade branch: t_b {} t_s {} t_k {tk}", lr.t_b, lr.t_s),
        )?;
    }
    // Apart from the split processes, the x = 1 processes precede the x = 0
    // ones in canonical order.
    let canon = canonical_order(w);
    let splits = [r.split_k.as_deref(), r.split_j.as_deref()];
    let mut seen_zero = false;
    for p in canon.processes() {
        if splits.contains(&Some(p.id())) {
            continue;
        }
        let x = r.assignment.get(p.id()).unwrap();
        ensure(x == 0.0 || x == 1.0, || format!("{} has x = {x}", p.id()))?;
        ensure(!(seen_zero && x == 1.0), || {
            format!("{} on big after a small-only process", p.id())
        })?;
        seen_zero |= x == 0.0;
    }
    let mut procs = w.processes().to_vec();
    procs.reverse();
    let rev = solve_n_1b1s(&Workload::new(procs).unwrap()).map_err(|e| e.to_string())?;
    ensure(rel_close(rev.t_f, r.t_f, 1e-12), || {
        "permutation changed t_f".into()
    })?;
    if w.len() == 2 {
        let p = w.processes();
        let two = solve_two_1b1s(&p[0], &p[1]).map_err(|e| e.to_string())?;
        ensure(rel_close(two.t_f, r.t_f, 1e-9), || {
            format!("two-process {} vs {}", two.t_f, r.t_f)
        })?;
    }
    Ok(())
}

/// Heuristic schedules are valid, deterministic and never beat the optimum.
pub fn check_heuristics(inst: &Instance) -> Check {
    let opt = solved(inst)?.t_f;
    for kind in [HeuristicKind::IpcDriven, HeuristicKind::Ltf] {
        let s = schedule_heuristic(&inst.w, inst.m, kind).map_err(|e| e.to_string())?;
        ensure(s.makespan >= opt * (1.0 - 1e-9), || {
            format!("{kind:?} {} below opt {opt}", s.makespan)
        })?;
        let v = validate(&s, &inst.w, inst.m);
        ensure(v.is_empty(), || format!("{kind:?} violations: {v:?}"))?;
        let again = schedule_heuristic(&inst.w, inst.m, kind).unwrap();
        ensure(again == s, || format!("{kind:?} not deterministic"))?;
    }
    Ok(())
}

/// `feasible` is monotone in `t` and flips at the bisection optimum.
pub fn check_feasible(inst: &Instance, r: &mut ChaCha8Rng) -> Check {
    let opt = bisect_optimum(&inst.w, inst.m, 1e-12).map_err(|e| e.to_string())?;
    for _ in 0..8 {
        let a = opt * r.gen_range(0.5..2.0);
        let b = a * r.gen_range(1.0..2.0);
        ensure(
            !feasible(&inst.w, inst.m, a) || feasible(&inst.w, inst.m, b),
            || format!("feasible at {a} but not at {b}"),
        )?;
    }
    ensure(feasible(&inst.w, inst.m, opt * (1.0 + 1e-9)), || {
        "optimum infeasible".into()
    })?;
    ensure(!feasible(&inst.w, inst.m, opt * (1.0 - 1e-6)), || {
        "below optimum feasible".into()
    })
}

/// Model-level properties of one process set.
pub fn check_model(w: &Workload) -> Check {
    for p in w.processes() {
        ensure(p.exec_time(1.0).unwrap() == p.big_time(), || {
            "exec_time(1)".into()
        })?;
        ensure(p.exec_time(0.0).unwrap() == p.small_time(), || {
            "exec_time(0)".into()
        })?;
        let ts: Vec<f64> = (0..=10)
            .map(|i| p.exec_time(i as f64 / 10.0).unwrap())
            .collect();
        for pair in ts.windows(2) {
            if p.sf() > 1.0 {
                ensure(pair[1] < pair[0], || format!("{} not decreasing", p.id()))?;
            } else {
                ensure(pair[1] == pair[0], || format!("{} not constant", p.id()))?;
            }
        }
    }
    let c = canonical_order(w);
    ensure(canonical_order(&c) == c, || {
        "canonical order not idempotent".into()
    })
}
