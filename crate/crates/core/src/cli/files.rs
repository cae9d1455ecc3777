//! JSON interchange formats for workloads and schedules.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{Machine, ProcessSpec, Workload};
use crate::packing::{CoreKind, Schedule, Segment};

pub const WORKLOAD_FORMAT: &str = "hemc/1";
pub const SCHEDULE_FORMAT: &str = "hemc-sched/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    pub big: usize,
    pub small: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessEntry {
    pub id: String,
    pub big_time: f64,
    pub sf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadFile {
    pub format: String,
    pub machine: MachineEntry,
    pub processes: Vec<ProcessEntry>,
}

impl WorkloadFile {
    pub fn from_model(w: &Workload, m: Machine) -> Self {
        Self {
            format: WORKLOAD_FORMAT.to_string(),
            machine: MachineEntry {
                big: m.big(),
                small: m.small(),
            },
            processes: w
                .processes()
                .iter()
                .map(|p| ProcessEntry {
                    id: p.id().to_string(),
                    big_time: p.big_time(),
                    sf: p.sf(),
                    small_time: None,
                })
                .collect(),
        }
    }

    /// Checks every field against the model rules; messages name the field.
    pub fn into_model(self) -> Result<(Workload, Machine), String> {
        if self.format != WORKLOAD_FORMAT {
            return Err(format!(
                "format: expected \"{WORKLOAD_FORMAT}\", found \"{}\"",
                self.format
            ));
        }
        let m = Machine::new(self.machine.big, self.machine.small)
            .map_err(|e| format!("machine: {e}"))?;
        if self.processes.is_empty() {
            return Err("processes: list is empty".to_string());
        }
        let mut procs = Vec::with_capacity(self.processes.len());
        for (i, p) in self.processes.into_iter().enumerate() {
            let spec = match p.small_time {
                Some(st) => ProcessSpec::with_small_time(p.id, p.big_time, p.sf, st),
                None => ProcessSpec::new(p.id, p.big_time, p.sf),
            };
            procs.push(spec.map_err(|e| format!("processes[{i}]: {e}"))?);
        }
        let w = Workload::new(procs).map_err(|e| format!("processes: {e}"))?;
        Ok((w, m))
    }
}

pub fn parse_workload(text: &str) -> Result<(Workload, Machine), String> {
    let file: WorkloadFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    file.into_model()
}

pub fn read_workload(path: &Path) -> Result<(Workload, Machine), CliError> {
    let text = fs::read_to_string(path).map_err(|e| input(path, e))?;
    parse_workload(&text).map_err(|e| input(path, e))
}

pub fn workload_json(w: &Workload, m: Machine) -> String {
    let mut s =
        serde_json::to_string_pretty(&WorkloadFile::from_model(w, m)).expect("workload serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreEntry {
    pub kind: CoreKind,
    pub index: usize,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub format: String,
    pub makespan: f64,
    pub cores: Vec<CoreEntry>,
}

impl ScheduleFile {
    pub fn from_schedule(s: &Schedule) -> Self {
        Self {
            format: SCHEDULE_FORMAT.to_string(),
            makespan: s.makespan,
            cores: s
                .cores()
                .map(|(kind, index, segs)| CoreEntry {
                    kind,
                    index,
                    segments: segs.to_vec(),
                })
                .collect(),
        }
    }

    /// Rebuilds the schedule; core indices must be dense per kind.
    pub fn into_schedule(self) -> Result<Schedule, String> {
        if self.format != SCHEDULE_FORMAT {
            return Err(format!(
                "format: expected \"{SCHEDULE_FORMAT}\", found \"{}\"",
                self.format
            ));
        }
        let mut s = Schedule::default();
        for (i, core) in self.cores.into_iter().enumerate() {
            let lanes = match core.kind {
                CoreKind::Big => &mut s.big_cores,
                CoreKind::Small => &mut s.small_cores,
            };
            if lanes.len() <= core.index {
                lanes.resize(core.index + 1, Vec::new());
            }
            if !lanes[core.index].is_empty() {
                return Err(format!(
                    "cores[{i}]: duplicate {} core {}",
                    core.kind, core.index
                ));
            }
            lanes[core.index] = core.segments;
        }
        s.makespan = self.makespan;
        Ok(s)
    }
}

pub fn schedule_json(s: &Schedule) -> String {
    let mut out =
        serde_json::to_string_pretty(&ScheduleFile::from_schedule(s)).expect("schedule serializes");
    out.push('\n');
    out
}

pub fn parse_schedule(text: &str) -> Result<Schedule, String> {
    let file: ScheduleFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    file.into_schedule()
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| input(path, e))
}

fn input(path: &Path, e: impl Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}
