//! CSV and text artifacts of a run.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::action_lang::ActionDescription;
use crate::experiment::{Experiment, SeedSummary};
use crate::planner::state_hash_hex;
use crate::sdrl_loop::{ControllerLogRow, CurveRow, MetaLogRow, RunStatus};
use crate::subtask::{listing_report, subtask_key};

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("episode,cumulative_env_reward,plan_quality,plan_length,terminated_flag\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.6},{:.6},{},{}", r.episode, r.env_reward, r.quality, r.plan_len, u8::from(r.terminated));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn controller_csv(d: &ActionDescription, rows: &[ControllerLogRow]) -> String {
    let mut out = String::from("episode,subtask_key,success,steps,env_reward_sum,success_ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            r.episode,
            csv_field(&subtask_key(d, &r.subtask)),
            u8::from(r.success),
            r.steps,
            r.env_reward_sum,
            r.success_ratio
        );
    }
    out
}

pub fn meta_csv(d: &ActionDescription, rows: &[MetaLogRow]) -> String {
    let mut out = String::from("episode,symbolic_state_hash,subtask_key,extrinsic_reward,R,rho_gain\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6}",
            r.episode,
            state_hash_hex(d, &r.subtask.id.from),
            csv_field(&subtask_key(d, &r.subtask)),
            r.extrinsic_reward,
            r.r,
            r.rho
        );
    }
    out
}

pub fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Converged => "converged",
        RunStatus::BudgetExhausted => "budget_exhausted",
    }
}

/// Incumbent action sequence at every snapshot episode.
pub fn snapshots_text(d: &ActionDescription, s: &SeedSummary) -> String {
    let mut out = String::new();
    for (episode, plan) in &s.snapshots {
        let _ = writeln!(out, "{episode}\t{}", plan.action_names(d).join(" "));
    }
    out
}

pub fn summary_csv(exp: &Experiment) -> String {
    let mut out = String::from("seed,status,final_quality,plan_length,plan\n");
    for s in &exp.seeds {
        let _ = writeln!(
            out,
            "{},{},{:.6},{},{}",
            s.seed,
            status_name(s.status),
            s.final_quality,
            s.final_plan.len(),
            csv_field(&s.final_plan.action_names(&exp.description).join(" "))
        );
    }
    out
}

/// Paths of everything written for a run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub curves: Vec<PathBuf>,
    pub plans: Vec<PathBuf>,
    pub subtask_tables: Vec<PathBuf>,
    pub logs: Vec<PathBuf>,
    pub summary: PathBuf,
    pub statuses: Vec<(u64, RunStatus)>,
}

pub fn write_report(dir: &Path, exp: &Experiment) -> io::Result<RunReport> {
    std::fs::create_dir_all(dir)?;
    let d = &exp.description;
    let mut rep = RunReport::default();
    for s in &exp.seeds {
        let put = |name: String, body: String| -> io::Result<PathBuf> {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            Ok(p)
        };
        rep.curves.push(put(format!("seed_{}_curve.csv", s.seed), curve_csv(&s.curve))?);
        rep.plans.push(put(format!("seed_{}_plan.txt", s.seed), s.plan_text.clone())?);
        rep.subtask_tables.push(put(format!("seed_{}_subtasks.tsv", s.seed), listing_report(d, &s.subtasks))?);
        if !s.snapshots.is_empty() {
            rep.logs.push(put(format!("seed_{}_snapshots.txt", s.seed), snapshots_text(d, s))?);
        }
        if !s.controller_log.is_empty() || !s.meta_log.is_empty() {
            rep.logs.push(put(format!("seed_{}_controller.csv", s.seed), controller_csv(d, &s.controller_log))?);
            rep.logs.push(put(format!("seed_{}_meta.csv", s.seed), meta_csv(d, &s.meta_log))?);
        }
        rep.statuses.push((s.seed, s.status));
    }
    rep.summary = dir.join("summary.csv");
    std::fs::write(&rep.summary, summary_csv(exp))?;
    Ok(rep)
}
