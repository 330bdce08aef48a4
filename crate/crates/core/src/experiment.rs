//! Per-environment drivers that turn a [`RunConfig`] into seed runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action_lang::{ActionDescription, SymbolicState};
use crate::config::{EnvKind, RunConfig};
use crate::envs::synthetic::{make_synthetic, node_state, NodeGrounding};
use crate::envs::taxi::{taxi_description, taxi_env, TaxiEnv, TaxiGrounding};
use crate::envs::Environment;
use crate::planner::{plan_quality, Plan};
use crate::sdrl_loop::{run, Agent, ControllerLogRow, CurveRow, LoopError, MetaLogRow, RunOptions, RunStatus, SeedRun};
use crate::subtask::{subtask_key, GroundingOracle, Subtask, SubtaskRow};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("the montezuma fixture is planning-only; use the `plan` command on its description")]
    PlanningOnly,
    #[error("synthetic env needs a graph")]
    MissingGraph,
    #[error("invalid synthetic graph: {0}")]
    Graph(#[from] crate::envs::synthetic::SpecError),
    #[error("seed {seed}: {source}")]
    Loop { seed: u64, source: LoopError },
}

/// Seed run with the environment state type erased.
#[derive(Debug, Clone)]
pub struct SeedSummary {
    pub seed: u64,
    pub curve: Vec<CurveRow>,
    pub controller_log: Vec<ControllerLogRow>,
    pub meta_log: Vec<MetaLogRow>,
    pub final_plan: Plan,
    pub final_quality: f64,
    /// Serialized final plan.
    pub plan_text: String,
    pub status: RunStatus,
    pub snapshots: Vec<(usize, Plan)>,
    /// Every subtask attempted, sorted by key.
    pub subtasks: Vec<SubtaskRow>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub description: ActionDescription,
    pub seeds: Vec<SeedSummary>,
}

pub fn seed_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symbolic start state of the taxi domain.
pub fn taxi_initial(d: &ActionDescription) -> SymbolicState {
    d.parse_state("at=start,have_passenger=false,coupon_taken=false,delivered=false")
        .expect("taxi description declares the start state")
}

/// One taxi seed over the whole task schedule, snapshotting the incumbent
/// at the last episode of every task.
pub fn run_taxi_seed(cfg: &RunConfig, seed: u64, keep_logs: bool) -> Result<SeedRun<<TaxiEnv as Environment>::State>, LoopError> {
    let d = taxi_description();
    let schedule = cfg.schedule;
    let mut params = cfg.taxi;
    params.reset_cell = schedule.reset_cell;
    params.dropoff_reward = schedule.dropoff_reward(1);
    let mut env = taxi_env(params);
    let grounding = TaxiGrounding::new(&d, params).expect("bundled description matches the grounding");
    let init = taxi_initial(&d);
    let agent = Agent::new(env.num_actions(), cfg.controller, cfg.meta);
    let mut hook = move |episode: usize, env: &mut TaxiEnv| {
        env.model.params.dropoff_reward = schedule.dropoff_reward(schedule.task_of(episode));
    };
    let opts = RunOptions {
        keep_logs,
        snapshot_after: (1..=schedule.num_tasks).map(|k| k * schedule.episodes_per_task - 1).collect(),
        before_episode: Some(&mut hook),
    };
    let mut rng = seed_rng(seed);
    run(&d, &init, &mut env, &grounding, agent, &cfg.looping, seed, &mut rng, opts)
}

fn summarize<S: Clone + Eq + std::hash::Hash>(d: &ActionDescription, r: SeedRun<S>, threshold: f64) -> SeedSummary {
    let mut subtasks: Vec<Subtask> = r.agent.q.subtasks().cloned().collect();
    for t in &r.final_plan.transitions {
        let g = Subtask { id: t.clone() };
        if !subtasks.contains(&g) {
            subtasks.push(g);
        }
    }
    subtasks.sort_by_cached_key(|g| subtask_key(d, g));
    let rows = subtasks
        .into_iter()
        .map(|g| SubtaskRow {
            learned: r.agent.tracker.success_ratio(&g).map_or(false, |x| x >= threshold),
            in_final_plan: r.final_plan.transitions.contains(&g.id),
            subtask: g,
        })
        .collect();
    SeedSummary {
        seed: r.seed,
        final_quality: plan_quality(&r.final_plan, &r.state.facts),
        plan_text: r.final_plan.serialize(d, &r.state.facts),
        curve: r.curve,
        controller_log: r.controller_log,
        meta_log: r.meta_log,
        final_plan: r.final_plan,
        status: r.status,
        snapshots: r.snapshots,
        subtasks: rows,
    }
}

fn run_generic<E, O>(
    d: &ActionDescription,
    init: &SymbolicState,
    env: &E,
    oracle: &O,
    cfg: &RunConfig,
    seed: u64,
) -> Result<SeedSummary, ExperimentError>
where
    E: Environment + Clone,
    O: GroundingOracle<E::State>,
{
    let mut env = env.clone();
    let agent = Agent::new(env.num_actions(), cfg.controller, cfg.meta);
    let mut rng = seed_rng(seed);
    let opts = RunOptions { keep_logs: cfg.detailed_logs, ..RunOptions::default() };
    let r = run(d, init, &mut env, oracle, agent, &cfg.looping, seed, &mut rng, opts)
        .map_err(|source| ExperimentError::Loop { seed, source })?;
    Ok(summarize(d, r, cfg.meta.threshold))
}

/// Runs every configured seed, in seed order.
pub fn run_experiment(cfg: &RunConfig) -> Result<Experiment, ExperimentError> {
    match cfg.env {
        EnvKind::MontezumaFixture => Err(ExperimentError::PlanningOnly),
        EnvKind::Taxi => {
            let d = taxi_description();
            let mut seeds = Vec::new();
            for &seed in &cfg.seeds {
                let r = run_taxi_seed(cfg, seed, cfg.detailed_logs).map_err(|source| ExperimentError::Loop { seed, source })?;
                seeds.push(summarize(&d, r, cfg.meta.threshold));
            }
            Ok(Experiment { description: d, seeds })
        }
        EnvKind::Synthetic => {
            let spec = cfg.synthetic.as_ref().ok_or(ExperimentError::MissingGraph)?;
            let (d, env) = make_synthetic(spec)?;
            let init = node_state(0);
            let seeds = cfg
                .seeds
                .iter()
                .map(|&seed| run_generic(&d, &init, &env, &NodeGrounding, cfg, seed))
                .collect::<Result<_, _>>()?;
            Ok(Experiment { description: d, seeds })
        }
    }
}
