//! The plan / execute / evaluate / replan loop.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::action_lang::{ActionDescription, ActionId, SymbolicState};
use crate::controller::{execute_subtask, ControllerConfig, ControllerError, QTable, SuccessTracker};
use crate::envs::Environment;
use crate::meta_controller::{extrinsic_reward, r_update, Increment, MetaConfig, MetaTable};
use crate::planner::{find_nonempty_plan, plan_quality, IntrinsicGoal, Plan, PlanError, RhoTable, TransitionGraph};
use crate::subtask::{induce_option, GroundingOracle, Subtask};

/// What happens once the planner finds no plan beating the goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationPolicy {
    /// Stop the run and return the incumbent.
    Stop,
    /// Record convergence but keep executing the incumbent until the
    /// episode budget runs out, so later reward changes can be noticed.
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub explore_prob: f64,
    pub episodes: usize,
    pub max_plan_len: usize,
    pub inf_default: f64,
    pub termination: TerminationPolicy,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig { explore_prob: 0.2, episodes: 2000, max_plan_len: 8, inf_default: 10.0, termination: TerminationPolicy::Stop }
    }
}

impl LoopConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.explore_prob) {
            return Err(format!("explore_prob must lie in [0,1], got {}", self.explore_prob));
        }
        if self.max_plan_len == 0 {
            return Err("max_plan_len must be positive".into());
        }
        if !(self.inf_default > 0.0) {
            return Err("inf_default must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoopState {
    /// Last executed plan; `None` before the first iteration.
    pub incumbent: Option<Plan>,
    pub goal: IntrinsicGoal,
    pub facts: RhoTable,
    pub episode_index: usize,
    /// The planner has reported that nothing beats the goal.
    pub converged: bool,
}

impl LoopState {
    pub fn new(inf_default: f64) -> Self {
        LoopState {
            incumbent: None,
            goal: IntrinsicGoal::new(0.0),
            facts: RhoTable::new(inf_default),
            episode_index: 0,
            converged: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoopError {
    #[error("episode {episode}: {source}")]
    Plan { episode: usize, source: PlanError },
    #[error("episode {episode}: {source}")]
    Controller { episode: usize, source: ControllerError },
    #[error("internal invariant: executed transition has no gain entry")]
    MissingGain,
}

/// Controllers, competence tracking and the meta-controller.
#[derive(Debug, Clone)]
pub struct Agent<S> {
    pub q: QTable<S>,
    pub tracker: SuccessTracker,
    pub meta: MetaTable,
    pub controller: ControllerConfig,
    pub meta_cfg: MetaConfig,
    /// Gains stay at their preset values when frozen.
    pub frozen: bool,
    graph: TransitionGraph,
    /// Increments of the most recent update per (state, subtask).
    last_increment: HashMap<(SymbolicState, Subtask), Increment>,
    recent: VecDeque<Increment>,
}

impl<S: Clone + Eq + std::hash::Hash> Agent<S> {
    pub fn new(num_actions: usize, controller: ControllerConfig, meta_cfg: MetaConfig) -> Self {
        Agent {
            q: QTable::new(num_actions),
            tracker: SuccessTracker::default(),
            meta: MetaTable::new(),
            controller,
            meta_cfg,
            frozen: false,
            graph: TransitionGraph::new(),
            last_increment: HashMap::new(),
            recent: VecDeque::new(),
        }
    }

    /// Agent whose gains are fixed at the zero-R fixed point, where each
    /// gain equals its subtask's r_e.
    pub fn frozen(
        num_actions: usize,
        controller: ControllerConfig,
        meta_cfg: MetaConfig,
        d: &ActionDescription,
        init: &SymbolicState,
        r_e: &dyn Fn(&SymbolicState, ActionId) -> f64,
    ) -> Result<Self, PlanError> {
        let mut agent = Self::new(num_actions, controller, meta_cfg);
        agent.frozen = true;
        let start = agent.graph.intern(init);
        for u in agent.graph.reachable(start, d)? {
            let from = agent.graph.state(u).clone();
            for (a, v) in agent.graph.successors(u, d)?.to_vec() {
                let g = Subtask { id: crate::planner::SymbolicTransition { from: from.clone(), action: a, to: agent.graph.state(v).clone() } };
                agent.meta.register(&from, [&g]);
                agent.meta.set_gain(&from, &g, r_e(&from, a));
            }
        }
        Ok(agent)
    }

    fn options_at(&mut self, s: &SymbolicState, d: &ActionDescription) -> Result<Vec<Subtask>, PlanError> {
        let i = self.graph.intern(s);
        let succ = self.graph.successors(i, d)?.to_vec();
        Ok(succ
            .into_iter()
            .map(|(a, j)| Subtask { id: crate::planner::SymbolicTransition { from: s.clone(), action: a, to: self.graph.state(j).clone() } })
            .collect())
    }

    /// The latest increment of every (state, subtask) pair updated so far:
    /// one full sweep over the learned table.
    pub fn sweep(&self) -> Vec<Increment> {
        self.last_increment.values().copied().collect()
    }

    /// Increments of the most recent updates, newest last.
    pub fn recent_increments(&self) -> &VecDeque<Increment> {
        &self.recent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerLogRow {
    pub episode: usize,
    pub subtask: Subtask,
    pub success: bool,
    pub steps: usize,
    pub env_reward_sum: f64,
    pub success_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaLogRow {
    pub episode: usize,
    pub subtask: Subtask,
    pub extrinsic_reward: f64,
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub episode: usize,
    /// A fresh plan was requested this iteration.
    pub planned: bool,
    /// The planner found nothing beating the goal.
    pub terminated: bool,
    pub plan: Plan,
    pub executed: usize,
    pub completed: bool,
    pub env_reward: f64,
    pub quality: f64,
    pub controller_rows: Vec<ControllerLogRow>,
    pub meta_rows: Vec<MetaLogRow>,
}

/// Copies the learned gain of each transition into the planner's facts.
pub fn update_facts(facts: &mut RhoTable, executed: &[crate::planner::SymbolicTransition], meta: &MetaTable) -> Result<(), LoopError> {
    for t in executed {
        let g = Subtask { id: t.clone() };
        let rho = meta.gain(&t.from, &g).ok_or(LoopError::MissingGain)?;
        facts.set(t.from.clone(), t.action, rho);
    }
    Ok(())
}

/// One episode. The environment is reset first.
#[allow(clippy::too_many_arguments)]
pub fn run_iteration<E, O, R>(
    state: &mut LoopState,
    d: &ActionDescription,
    init: &SymbolicState,
    env: &mut E,
    oracle: &O,
    agent: &mut Agent<E::State>,
    cfg: &LoopConfig,
    rng: &mut R,
) -> Result<IterationReport, LoopError>
where
    E: Environment,
    O: GroundingOracle<E::State> + ?Sized,
    R: Rng + ?Sized,
{
    let episode = state.episode_index;
    let plan_err = |source| LoopError::Plan { episode, source };
    let mut report = IterationReport {
        episode,
        planned: false,
        terminated: false,
        plan: Plan::empty(),
        executed: 0,
        completed: false,
        env_reward: 0.0,
        quality: 0.0,
        controller_rows: Vec::new(),
        meta_rows: Vec::new(),
    };

    let replan = state.incumbent.is_none() || rng.gen::<f64>() < cfg.explore_prob;
    let plan = if replan {
        report.planned = true;
        match find_nonempty_plan(init, &state.goal, d, &state.facts, cfg.max_plan_len).map_err(plan_err)? {
            Some(p) => {
                state.converged = false;
                p
            }
            None => {
                report.terminated = true;
                state.converged = true;
                let incumbent = state.incumbent.clone().unwrap_or_default();
                if cfg.termination == TerminationPolicy::Stop {
                    report.plan = incumbent;
                    report.quality = plan_quality(&report.plan, &state.facts);
                    return Ok(report);
                }
                incumbent
            }
        }
    } else {
        state.incumbent.clone().unwrap_or_default()
    };

    env.reset();
    let mut executed = Vec::new();
    let mut completed = true;
    for t in &plan.transitions {
        let option = induce_option(t, oracle);
        let out = execute_subtask(&option, env, &mut agent.q, &agent.controller, rng)
            .map_err(|source| LoopError::Controller { episode, source })?;
        let g = option.subtask;
        report.env_reward += out.env_reward_sum;
        agent.tracker.record(&g, out.success, out.env_reward_sum);
        let ratio = agent.tracker.success_ratio(&g).unwrap_or(0.0);
        report.controller_rows.push(ControllerLogRow {
            episode,
            subtask: g.clone(),
            success: out.success,
            steps: out.trace.len(),
            env_reward_sum: out.env_reward_sum,
            success_ratio: ratio,
        });

        if !agent.frozen {
            let r_e = extrinsic_reward(ratio, agent.tracker.mean_success_return(&g).unwrap_or(0.0), &agent.meta_cfg);
            let here = agent.options_at(&t.from, d).map_err(plan_err)?;
            let there = agent.options_at(&t.to, d).map_err(plan_err)?;
            agent.meta.register(&t.from, &here);
            agent.meta.register(&t.to, &there);
            let inc = r_update(&mut agent.meta, &t.from, &g, r_e, &t.to, &agent.meta_cfg);
            agent.last_increment.insert((t.from.clone(), g.clone()), inc);
            agent.recent.push_back(inc);
            if agent.recent.len() > 1000 {
                agent.recent.pop_front();
            }
            report.meta_rows.push(MetaLogRow {
                episode,
                subtask: g.clone(),
                extrinsic_reward: r_e,
                r: agent.meta.r(&t.from, &g),
                rho: agent.meta.gain(&t.from, &g).unwrap_or(f64::NAN),
            });
        }
        executed.push(t.clone());
        if !out.success || out.episode_done {
            completed = out.success && executed.len() == plan.len();
            break;
        }
    }
    report.completed = completed;
    report.executed = executed.len();

    update_facts(&mut state.facts, &executed, &agent.meta)?;
    let quality = plan_quality(&plan, &state.facts);
    state.goal = IntrinsicGoal::new(quality);
    state.incumbent = Some(plan.clone());
    state.episode_index += 1;
    report.quality = quality;
    report.plan = plan;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub episode: usize,
    pub env_reward: f64,
    pub quality: f64,
    pub plan_len: usize,
    pub terminated: bool,
}

#[derive(Debug, Clone)]
pub struct SeedRun<S> {
    pub seed: u64,
    pub curve: Vec<CurveRow>,
    pub controller_log: Vec<ControllerLogRow>,
    pub meta_log: Vec<MetaLogRow>,
    pub final_plan: Plan,
    pub status: RunStatus,
    /// Incumbent at each requested snapshot episode.
    pub snapshots: Vec<(usize, Plan)>,
    pub state: LoopState,
    pub agent: Agent<S>,
}

pub struct RunOptions<'a, E> {
    pub keep_logs: bool,
    /// Episodes (counted from 0) after which the incumbent is recorded.
    pub snapshot_after: Vec<usize>,
    /// Called before every episode, e.g. to change rewards between tasks.
    pub before_episode: Option<&'a mut dyn FnMut(usize, &mut E)>,
}

impl<E> Default for RunOptions<'_, E> {
    fn default() -> Self {
        RunOptions { keep_logs: false, snapshot_after: Vec::new(), before_episode: None }
    }
}

/// Runs episodes until the budget is spent or, under
/// [`TerminationPolicy::Stop`], until the planner gives up.
#[allow(clippy::too_many_arguments)]
pub fn run<E, O, R>(
    d: &ActionDescription,
    init: &SymbolicState,
    env: &mut E,
    oracle: &O,
    mut agent: Agent<E::State>,
    cfg: &LoopConfig,
    seed: u64,
    rng: &mut R,
    mut opts: RunOptions<'_, E>,
) -> Result<SeedRun<E::State>, LoopError>
where
    E: Environment,
    O: GroundingOracle<E::State> + ?Sized,
    R: Rng + ?Sized,
{
    let mut state = LoopState::new(cfg.inf_default);
    let mut out_curve = Vec::new();
    let mut controller_log = Vec::new();
    let mut meta_log = Vec::new();
    let mut snapshots = Vec::new();
    let mut status = RunStatus::BudgetExhausted;
    for episode in 0..cfg.episodes {
        if let Some(hook) = opts.before_episode.as_mut() {
            hook(episode, env);
        }
        state.episode_index = episode;
        let rep = run_iteration(&mut state, d, init, env, oracle, &mut agent, cfg, rng)?;
        out_curve.push(CurveRow {
            episode,
            env_reward: rep.env_reward,
            quality: rep.quality,
            plan_len: rep.plan.len(),
            terminated: rep.terminated,
        });
        if opts.keep_logs {
            controller_log.extend(rep.controller_rows);
            meta_log.extend(rep.meta_rows);
        }
        if opts.snapshot_after.contains(&episode) {
            snapshots.push((episode, state.incumbent.clone().unwrap_or_default()));
        }
        if rep.terminated && cfg.termination == TerminationPolicy::Stop {
            status = RunStatus::Converged;
            break;
        }
    }
    if state.converged && status == RunStatus::BudgetExhausted && cfg.termination == TerminationPolicy::Continue {
        status = RunStatus::Converged;
    }
    Ok(SeedRun {
        seed,
        curve: out_curve,
        controller_log,
        meta_log,
        final_plan: state.incumbent.clone().unwrap_or_default(),
        status,
        snapshots,
        state,
        agent,
    })
}

/// Whether some plan up to `probe_len` steps beats the incumbent under the
/// current facts: the run stopped only because of the length cap.
pub fn improving_at_cap(
    d: &ActionDescription,
    init: &SymbolicState,
    state: &LoopState,
    probe_len: usize,
) -> Result<bool, PlanError> {
    let incumbent = state.incumbent.clone().unwrap_or_default();
    let q = plan_quality(&incumbent, &state.facts);
    Ok(find_nonempty_plan(init, &IntrinsicGoal::new(q), d, &state.facts, probe_len)?.is_some())
}
