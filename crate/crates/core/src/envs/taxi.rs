//! 5×5 Taxi with a one-shot coupon, plus its symbolic abstraction.
//!
//! Cells are (column, row) with (0,0) top-left.

use std::fmt;

use crate::action_lang::{parse_action_description, ActionDescription, FluentId, SymbolicState, ValueId};
use crate::subtask::GroundingOracle;

use super::{Model, StepOutcome};

pub const GRID: u8 = 5;
pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;
pub const PICKUP: usize = 4;
pub const DROPOFF: usize = 5;
pub const COLLECT: usize = 6;
pub const ACTION_NAMES: [&str; 7] = ["N", "S", "E", "W", "pickup", "dropoff", "collect"];

pub type Cell = (u8, u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Landmark {
    R,
    G,
    Y,
    B,
}

impl Landmark {
    pub const ALL: [Landmark; 4] = [Landmark::R, Landmark::G, Landmark::Y, Landmark::B];

    pub fn cell(self) -> Cell {
        match self {
            Landmark::R => (0, 0),
            Landmark::G => (4, 0),
            Landmark::Y => (0, 4),
            Landmark::B => (3, 4),
        }
    }

    pub fn parse(s: &str) -> Option<Landmark> {
        match s {
            "R" => Some(Landmark::R),
            "G" => Some(Landmark::G),
            "Y" => Some(Landmark::Y),
            "B" => Some(Landmark::B),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PassengerLoc {
    At(Landmark),
    InTaxi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaxiState {
    pub taxi: Cell,
    pub passenger: PassengerLoc,
    pub destination: Landmark,
    pub coupon_available: bool,
}

/// Reward schedule across the task sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSchedule {
    pub base_dropoff_reward: f64,
    pub decrement: f64,
    pub episodes_per_task: usize,
    pub num_tasks: usize,
    pub reset_cell: Cell,
}

impl Default for TaskSchedule {
    fn default() -> Self {
        TaskSchedule { base_dropoff_reward: 50.0, decrement: 5.0, episodes_per_task: 2000, num_tasks: 10, reset_cell: (0, 4) }
    }
}

impl TaskSchedule {
    /// Dropoff reward of task `k`, counting from 1.
    pub fn dropoff_reward(&self, k: usize) -> f64 {
        assert!(k >= 1, "tasks are numbered from 1");
        self.base_dropoff_reward - self.decrement * (k - 1) as f64
    }

    /// Task (from 1) that episode `e` (from 0) belongs to.
    pub fn task_of(&self, episode: usize) -> usize {
        episode / self.episodes_per_task.max(1) + 1
    }

    pub fn total_episodes(&self) -> usize {
        self.episodes_per_task * self.num_tasks
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxiParams {
    pub source: Landmark,
    pub destination: Landmark,
    pub coupon_cell: Cell,
    pub reset_cell: Cell,
    pub dropoff_reward: f64,
    /// Reward for a legal pickup.
    pub pickup_reward: f64,
    pub move_reward: f64,
    pub improper_reward: f64,
    pub coupon_reward: f64,
}

impl Default for TaxiParams {
    fn default() -> Self {
        TaxiParams {
            source: Landmark::R,
            destination: Landmark::G,
            coupon_cell: (4, 4),
            reset_cell: (0, 4),
            dropoff_reward: 50.0,
            pickup_reward: -9.0,
            move_reward: -1.0,
            improper_reward: -10.0,
            coupon_reward: 10.0,
        }
    }
}

impl TaxiParams {
    pub fn initial_state(&self) -> TaxiState {
        TaxiState {
            taxi: self.reset_cell,
            passenger: PassengerLoc::At(self.source),
            destination: self.destination,
            coupon_available: true,
        }
    }
}

/// True when a wall separates `(x, y)` from its east neighbour.
fn wall_east(x: u8, y: u8) -> bool {
    match y {
        0 | 1 => x == 1,
        3 | 4 => x == 0 || x == 2,
        _ => false,
    }
}

/// Cell reached by a move, staying put when blocked.
pub fn move_cell(c: Cell, action: usize) -> Cell {
    let (x, y) = c;
    match action {
        NORTH if y > 0 => (x, y - 1),
        SOUTH if y + 1 < GRID => (x, y + 1),
        EAST if x + 1 < GRID && !wall_east(x, y) => (x + 1, y),
        WEST if x > 0 && !wall_east(x - 1, y) => (x - 1, y),
        _ => c,
    }
}

pub fn taxi_step(s: &TaxiState, action: usize, p: &TaxiParams) -> (TaxiState, f64, bool) {
    assert!(action < ACTION_NAMES.len(), "invalid taxi action {action}");
    let mut next = *s;
    match action {
        NORTH | SOUTH | EAST | WEST => {
            next.taxi = move_cell(s.taxi, action);
            (next, p.move_reward, false)
        }
        PICKUP => match s.passenger {
            PassengerLoc::At(l) if l.cell() == s.taxi => {
                next.passenger = PassengerLoc::InTaxi;
                (next, p.pickup_reward, false)
            }
            _ => (next, p.improper_reward, false),
        },
        DROPOFF => {
            if s.passenger == PassengerLoc::InTaxi && s.taxi == s.destination.cell() {
                next.passenger = PassengerLoc::At(s.destination);
                (next, p.dropoff_reward, true)
            } else {
                (next, p.improper_reward, false)
            }
        }
        _ => {
            if s.coupon_available && s.taxi == p.coupon_cell {
                next.coupon_available = false;
                (next, p.coupon_reward, false)
            } else {
                (next, p.improper_reward, false)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxiModel {
    pub params: TaxiParams,
}

impl Model for TaxiModel {
    type State = TaxiState;

    fn num_actions(&self) -> usize {
        ACTION_NAMES.len()
    }

    fn transition(&self, s: &TaxiState, action: usize) -> (TaxiState, StepOutcome) {
        let (next, reward, done) = taxi_step(s, action, &self.params);
        (next, StepOutcome { reward, done })
    }

    /// All states sharing this task's destination.
    fn states(&self) -> Option<Vec<TaxiState>> {
        let mut out = Vec::new();
        for y in 0..GRID {
            for x in 0..GRID {
                for passenger in Landmark::ALL.map(PassengerLoc::At).into_iter().chain([PassengerLoc::InTaxi]) {
                    for coupon_available in [false, true] {
                        out.push(TaxiState { taxi: (x, y), passenger, destination: self.params.destination, coupon_available });
                    }
                }
            }
        }
        Some(out)
    }
}

pub type TaxiEnv = super::ModelEnv<TaxiModel>;

pub fn taxi_env(params: TaxiParams) -> TaxiEnv {
    super::ModelEnv::new(TaxiModel { params }, params.initial_state())
}

pub const TAXI_DESCRIPTION: &str = include_str!("../../../../fixtures/taxi.bc");

pub fn taxi_description() -> ActionDescription {
    parse_action_description(TAXI_DESCRIPTION).expect("bundled taxi description parses")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingError {
    #[error("unknown symbolic fluent `{0}`")]
    UnknownFluent(String),
    #[error("fluent `{fluent}` has no meaning for value `{value}`")]
    UnknownValue { fluent: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Meaning {
    At,
    HavePassenger,
    CouponTaken,
    Delivered,
}

/// Exact denotation of the taxi vocabulary in concrete states.
#[derive(Debug, Clone)]
pub struct TaxiGrounding {
    params: TaxiParams,
    meanings: Vec<Meaning>,
    /// Cell for each value of the `at` fluent.
    places: Vec<Cell>,
    truth: Vec<Option<ValueId>>,
}

impl TaxiGrounding {
    pub fn new(d: &ActionDescription, params: TaxiParams) -> Result<Self, GroundingError> {
        let mut meanings = Vec::new();
        let mut places = Vec::new();
        let mut truth = Vec::new();
        for f in &d.fluents {
            let m = match f.name.as_str() {
                "at" => Meaning::At,
                "have_passenger" => Meaning::HavePassenger,
                "coupon_taken" => Meaning::CouponTaken,
                "delivered" => Meaning::Delivered,
                other => return Err(GroundingError::UnknownFluent(other.to_string())),
            };
            if m == Meaning::At {
                for v in &f.domain {
                    places.push(match v.as_str() {
                        "start" => params.reset_cell,
                        "pass_src" => params.source.cell(),
                        "dest" => params.destination.cell(),
                        "coupon_site" => params.coupon_cell,
                        other => {
                            return Err(GroundingError::UnknownValue { fluent: f.name.clone(), value: other.to_string() })
                        }
                    });
                }
            }
            meanings.push(m);
            truth.push(f.value_index("true"));
        }
        Ok(TaxiGrounding { params, meanings, places, truth })
    }

    fn atom_holds(&self, f: FluentId, v: ValueId, s: &TaxiState) -> bool {
        let is_true = self.truth[f] == Some(v);
        match self.meanings[f] {
            Meaning::At => self.places[v] == s.taxi,
            Meaning::HavePassenger => (s.passenger == PassengerLoc::InTaxi) == is_true,
            Meaning::CouponTaken => !s.coupon_available == is_true,
            Meaning::Delivered => (s.passenger == PassengerLoc::At(self.params.destination)) == is_true,
        }
    }
}

impl GroundingOracle<TaxiState> for TaxiGrounding {
    fn holds(&self, symbolic: &SymbolicState, s: &TaxiState) -> bool {
        symbolic.values().iter().enumerate().all(|(f, &v)| self.atom_holds(f, v, s))
    }
}

/// One-shot grounding check that also validates the vocabulary.
pub fn taxi_grounding(
    d: &ActionDescription,
    params: &TaxiParams,
    symbolic: &SymbolicState,
    s: &TaxiState,
) -> Result<bool, GroundingError> {
    Ok(TaxiGrounding::new(d, *params)?.holds(symbolic, s))
}

/// ASCII map with the taxi as `T` (lowercase landmark when on one).
pub struct AsciiMap<'a>(pub &'a TaxiState, pub &'a TaxiParams);

impl fmt::Display for AsciiMap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, p) = (self.0, self.1);
        writeln!(f, "+---------+")?;
        for y in 0..GRID {
            write!(f, "|")?;
            for x in 0..GRID {
                let mut c = if (x, y) == p.coupon_cell && s.coupon_available { '$' } else { ' ' };
                for l in Landmark::ALL {
                    if l.cell() == (x, y) {
                        c = format!("{l:?}").chars().next().unwrap_or(' ');
                    }
                }
                if s.taxi == (x, y) {
                    c = if c.is_ascii_uppercase() { c.to_ascii_lowercase() } else { 'T' };
                }
                write!(f, "{c}")?;
                if x + 1 < GRID {
                    write!(f, "{}", if wall_east(x, y) { '|' } else { ':' })?;
                }
            }
            writeln!(f, "|")?;
        }
        write!(f, "+---------+")
    }
}

#[cfg(test)]
mod tests;
