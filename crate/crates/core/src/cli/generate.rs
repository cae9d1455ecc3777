//! Deterministic synthetic workloads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ProcessSpec, Workload};

pub const SF_MIN: f64 = 1.09;
pub const SF_MAX: f64 = 2.5;
const MIX1_LEN: usize = 19;
const MIX5_COPIES: usize = 5;
const STRESS_COPIES: usize = 40;
const STRESS_BIG_TIME: f64 = 100.0;

/// Bounds for the `random` preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub count: usize,
    pub sf: (f64, f64),
    pub big_time: (f64, f64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            count: 20,
            sf: (1.0, 3.0),
            big_time: (1.0, 1000.0),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// 19 processes: `sf` spans `[1.09, 2.5]` with both ends present, big-core
/// times are log-uniform over `[100, 1000]`, and one process runs at least
/// three times the median.
pub fn mix1(seed: u64) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params: Vec<(f64, f64)> = (0..MIX1_LEN)
        .map(|i| {
            let sf = match i {
                0 => SF_MIN,
                1 => SF_MAX,
                _ => rng.gen_range(SF_MIN..=SF_MAX),
            };
            let big_time = 10f64.powf(2.0 + rng.gen::<f64>());
            (big_time, sf)
        })
        .collect();
    let long = rng.gen_range(0..MIX1_LEN);
    let mut others: Vec<f64> = params
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != long)
        .map(|(_, p)| p.0)
        .collect();
    others.sort_by(f64::total_cmp);
    // With the long process largest, the overall median is this element.
    let median = others[MIX1_LEN / 2];
    params[long].0 = params[long]
        .0
        .max(3.0 * median)
        .max(others[others.len() - 1]);
    let procs = params
        .into_iter()
        .enumerate()
        .map(|(i, (t, sf))| ProcessSpec::new(format!("p{:02}", i + 1), t, sf).expect("valid"))
        .collect();
    Workload::new(procs).expect("unique ids")
}

/// Five copies of every `mix1` process, ids suffixed `-c1` to `-c5`.
pub fn mix5(seed: u64) -> Workload {
    let base = mix1(seed);
    let procs = base
        .processes()
        .iter()
        .flat_map(|p| {
            (1..=MIX5_COPIES).map(move |c| {
                ProcessSpec::new(format!("{}-c{c}", p.id()), p.big_time(), p.sf()).expect("valid")
            })
        })
        .collect();
    Workload::new(procs).expect("unique ids")
}

/// 40 processes at `sf = 2.5` and 40 at `sf = 1.09`, all with the same big-core time.
pub fn stress() -> Workload {
    let hi = (1..=STRESS_COPIES).map(|i| (format!("hi{i:02}"), SF_MAX));
    let lo = (1..=STRESS_COPIES).map(|i| (format!("lo{i:02}"), SF_MIN));
    let procs = hi
        .chain(lo)
        .map(|(id, sf)| ProcessSpec::new(id, STRESS_BIG_TIME, sf).expect("valid"))
        .collect();
    Workload::new(procs).expect("unique ids")
}

pub fn random(seed: u64, spec: RandomSpec) -> Result<Workload> {
    if spec.count == 0 {
        return Err(Error::EmptyWorkload);
    }
    let (sf_lo, sf_hi) = spec.sf;
    let (t_lo, t_hi) = spec.big_time;
    if !(sf_lo.is_finite() && sf_hi.is_finite() && 1.0 <= sf_lo && sf_lo <= sf_hi) {
        return Err(Error::InvalidProcess {
            id: "random".into(),
            reason: format!("sf range [{sf_lo}, {sf_hi}] must satisfy 1 <= min <= max"),
        });
    }
    if !(t_lo.is_finite() && t_hi.is_finite() && 0.0 < t_lo && t_lo <= t_hi) {
        return Err(Error::InvalidProcess {
            id: "random".into(),
            reason: format!("big_time range [{t_lo}, {t_hi}] must satisfy 0 < min <= max"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = spec.count.to_string().len();
    let procs = (0..spec.count)
        .map(|i| {
            let t = uniform(&mut rng, spec.big_time);
            let sf = uniform(&mut rng, spec.sf);
            ProcessSpec::new(format!("r{:0width$}", i + 1), t, sf)
        })
        .collect::<Result<Vec<_>>>()?;
    Workload::new(procs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix1_shape() {
        for seed in 0..50 {
            let w = mix1(seed);
            assert_eq!(w.len(), 19);
            let sfs: Vec<f64> = w.processes().iter().map(|p| p.sf()).collect();
            assert!(sfs.contains(&SF_MIN) && sfs.contains(&SF_MAX));
            assert!(sfs.iter().all(|&s| (SF_MIN..=SF_MAX).contains(&s)));
            let mut t: Vec<f64> = w.processes().iter().map(|p| p.big_time()).collect();
            t.sort_by(f64::total_cmp);
            assert!(t[18] >= 3.0 * t[9], "seed {seed}");
            assert!(t[0] >= 100.0);
        }
        assert_eq!(mix1(7), mix1(7));
        assert_ne!(mix1(7), mix1(8));
    }

    #[test]
    fn mix5_copies() {
        let w = mix5(1);
        assert_eq!(w.len(), 95);
        let base = mix1(1);
        for p in base.processes() {
            let copies: Vec<_> = w
                .processes()
                .iter()
                .filter(|q| {
                    q.id()
                        .strip_prefix(p.id())
                        .is_some_and(|s| s.starts_with("-c"))
                })
                .collect();
            assert_eq!(copies.len(), 5);
            assert!(copies
                .iter()
                .all(|q| q.big_time() == p.big_time() && q.sf() == p.sf()));
        }
    }

    #[test]
    fn stress_composition() {
        let w = stress();
        assert_eq!(w.len(), 80);
        assert_eq!(w.processes().iter().filter(|p| p.sf() == 2.5).count(), 40);
        assert_eq!(w.processes().iter().filter(|p| p.sf() == 1.09).count(), 40);
    }

    #[test]
    fn random_respects_bounds() {
        let spec = RandomSpec {
            count: 200,
            sf: (1.5, 2.0),
            big_time: (10.0, 20.0),
        };
        let w = random(3, spec).unwrap();
        assert_eq!(w.len(), 200);
        for p in w.processes() {
            assert!((1.5..=2.0).contains(&p.sf()));
            assert!((10.0..=20.0).contains(&p.big_time()));
        }
        assert!(random(3, RandomSpec { count: 0, ..spec }).is_err());
        assert!(random(
            3,
            RandomSpec {
                sf: (0.5, 2.0),
                ..spec
            }
        )
        .is_err());
        assert!(random(
            3,
            RandomSpec {
                big_time: (0.0, 2.0),
                ..spec
            }
        )
        .is_err());
    }
}
