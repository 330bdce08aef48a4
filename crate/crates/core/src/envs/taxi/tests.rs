use proptest::prelude::*;

use super::*;
use crate::oracle::{best_episode_return, best_subtask_return};

fn at(taxi: Cell, passenger: PassengerLoc, coupon_available: bool) -> TaxiState {
    TaxiState { taxi, passenger, destination: Landmark::G, coupon_available }
}

fn all_states() -> Vec<TaxiState> {
    TaxiModel { params: TaxiParams::default() }.states().unwrap()
}

#[test]
fn moves_cost_one_even_when_blocked() {
    let p = TaxiParams::default();
    let s = at((2, 2), PassengerLoc::At(Landmark::R), true);
    for a in [NORTH, SOUTH, EAST, WEST] {
        let (_, r, done) = taxi_step(&s, a, &p);
        assert_eq!((r, done), (-1.0, false));
    }
    // Wall east of (1,0); the grid edge north of row 0.
    let corner = at((1, 0), PassengerLoc::At(Landmark::R), true);
    assert_eq!(taxi_step(&corner, EAST, &p), (corner, -1.0, false));
    assert_eq!(taxi_step(&corner, NORTH, &p), (corner, -1.0, false));
}

#[test]
fn classic_walls() {
    assert_eq!(move_cell((0, 3), EAST), (0, 3));
    assert_eq!(move_cell((1, 4), WEST), (1, 4));
    assert_eq!(move_cell((2, 4), EAST), (2, 4));
    assert_eq!(move_cell((1, 1), EAST), (1, 1));
    assert_eq!(move_cell((1, 2), EAST), (2, 2));
    assert_eq!(move_cell((3, 3), WEST), (3, 3));
    assert_eq!(move_cell((3, 2), WEST), (2, 2));
}

#[test]
fn dropoff_pays_the_task_reward_and_ends() {
    let schedule = TaskSchedule::default();
    let p = TaxiParams { dropoff_reward: schedule.dropoff_reward(2), ..TaxiParams::default() };
    let s = at(Landmark::G.cell(), PassengerLoc::InTaxi, true);
    let (next, r, done) = taxi_step(&s, DROPOFF, &p);
    assert_eq!((r, done), (45.0, true));
    assert_eq!(next.passenger, PassengerLoc::At(Landmark::G));
}

#[test]
fn improper_pickup_and_dropoff() {
    let p = TaxiParams::default();
    let empty = at((2, 2), PassengerLoc::At(Landmark::R), true);
    assert_eq!(taxi_step(&empty, PICKUP, &p), (empty, -10.0, false));
    assert_eq!(taxi_step(&empty, DROPOFF, &p), (empty, -10.0, false));
    let wrong_place = at(Landmark::R.cell(), PassengerLoc::InTaxi, true);
    assert_eq!(taxi_step(&wrong_place, DROPOFF, &p), (wrong_place, -10.0, false));
    let on_source = at(Landmark::R.cell(), PassengerLoc::At(Landmark::R), true);
    let (next, r, _) = taxi_step(&on_source, PICKUP, &p);
    assert_eq!((next.passenger, r), (PassengerLoc::InTaxi, p.pickup_reward));
}

#[test]
fn coupon_collects_once() {
    let p = TaxiParams::default();
    let s = at((4, 4), PassengerLoc::At(Landmark::R), true);
    let (after, r, _) = taxi_step(&s, COLLECT, &p);
    assert_eq!(r, 10.0);
    assert!(!after.coupon_available);
    let (again, r2, _) = taxi_step(&after, COLLECT, &p);
    assert_eq!((again, r2), (after, -10.0));
}

#[test]
fn schedule_arithmetic() {
    let s = TaskSchedule::default();
    let got: Vec<f64> = (1..=10).map(|k| s.dropoff_reward(k)).collect();
    assert_eq!(got, [50.0, 45.0, 40.0, 35.0, 30.0, 25.0, 20.0, 15.0, 10.0, 5.0]);
    assert_eq!(s.task_of(0), 1);
    assert_eq!(s.task_of(1999), 1);
    assert_eq!(s.task_of(2000), 2);
    assert_eq!(s.total_episodes(), 20_000);
}

#[test]
fn grounding_examples() {
    let d = taxi_description();
    let p = TaxiParams::default();
    let sym = d.parse_state("at=coupon_site,have_passenger=false,coupon_taken=false,delivered=false").unwrap();
    assert!(taxi_grounding(&d, &p, &sym, &at((4, 4), PassengerLoc::At(Landmark::R), true)).unwrap());
    assert!(!taxi_grounding(&d, &p, &sym, &at((0, 4), PassengerLoc::At(Landmark::R), true)).unwrap());
    let carrying = d.parse_state("at=pass_src,have_passenger=true,coupon_taken=false,delivered=false").unwrap();
    assert!(taxi_grounding(&d, &p, &carrying, &at((0, 0), PassengerLoc::InTaxi, true)).unwrap());
}

#[test]
fn unknown_vocabulary_is_an_error() {
    let d = parse_action_description("fluent raining : bool\ninertial raining\n").unwrap();
    let s = d.parse_state("raining=true").unwrap();
    let e = taxi_grounding(&d, &TaxiParams::default(), &s, &TaxiParams::default().initial_state()).unwrap_err();
    assert_eq!(e, GroundingError::UnknownFluent("raining".into()));
}

#[test]
fn grounding_is_exclusive_on_every_state() {
    let d = taxi_description();
    let g = TaxiGrounding::new(&d, TaxiParams::default()).unwrap();
    let symbolic = d.enumerate_states();
    for s in all_states() {
        let n = symbolic.iter().filter(|sym| g.holds(sym, &s)).count();
        assert!(n <= 1, "{s:?} grounds {n} symbolic states");
        let on_landmark = [(0, 4), (0, 0), (4, 0), (4, 4)].contains(&s.taxi);
        assert_eq!(n == 1, on_landmark, "{s:?}");
    }
}

#[test]
fn goto_coupon_from_start_is_eight_steps() {
    let m = TaxiModel { params: TaxiParams::default() };
    let start = TaxiParams::default().initial_state();
    let (r, n) = best_subtask_return(&m, &start, &|s: &TaxiState| s.taxi == (4, 4), 30).unwrap();
    assert_eq!((r, n), (-8.0, 8));
}

#[test]
fn task_one_best_episode_is_coupon_then_dropoff() {
    let m = TaxiModel { params: TaxiParams::default() };
    // 4 moves, pickup -9, 8 moves, coupon +10, 4 moves, dropoff +50.
    assert_eq!(best_episode_return(&m, &TaxiParams::default().initial_state(), 30), 35.0);
}

#[test]
fn ascii_map_marks_the_taxi() {
    let p = TaxiParams::default();
    let text = AsciiMap(&p.initial_state(), &p).to_string();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().nth(5).unwrap().starts_with("|y"), "{text}");
    assert!(text.contains('$'));
}

proptest! {
    #[test]
    fn steps_are_deterministic(i in 0usize..250, a in 0usize..7) {
        let p = TaxiParams::default();
        let s = all_states()[i];
        prop_assert_eq!(taxi_step(&s, a, &p), taxi_step(&s, a, &p));
    }

    #[test]
    fn coupon_pays_at_most_once(actions in prop::collection::vec(0usize..7, 0..80)) {
        let p = TaxiParams::default();
        let mut s = p.initial_state();
        let mut collected = 0;
        for a in actions {
            let (next, r, done) = taxi_step(&s, a, &p);
            if a == COLLECT && r == p.coupon_reward {
                collected += 1;
            }
            s = next;
            if done {
                break;
            }
        }
        prop_assert!(collected <= 1);
    }
}
