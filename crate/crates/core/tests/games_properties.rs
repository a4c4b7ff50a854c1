use std::sync::{Arc, Mutex};

use proptest::prelude::*;
use proptest::strategy::Strategy as PropStrategy;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use nlgame_core::games::{
    broadcast_complexity, make_general_game, make_simple_game, run_game, run_game_branches, run_with_source, trial_rng,
    Action, AnswerSet, BitString, Framing, GameError, GameInstance, GameSpec, Grouping, LocalLab, Player, RngSource,
    RunResult, StepInput, Strategy, SweepMode, Transcript, DEFAULT_STEP_LIMIT,
};
use nlgame_core::strategies::{classical_label_strategy, quantum_general_strategy, quantum_simple_strategy, strategy_by_name};
use nlgame_core::Rational;

/// What one player saw in one step: (step, receiver, group senders, broadcast).
type Seen = (usize, usize, Vec<usize>, BitString);

/// Step 1: every player messages its group with its own index. Step 2: the
/// highest-numbered player broadcasts `1`. Step 3: everyone halts. Every
/// input is logged.
struct Sentinel {
    n: usize,
    log: Arc<Mutex<Vec<Seen>>>,
}

struct SentinelPlayer {
    index: usize,
    n: usize,
    log: Arc<Mutex<Vec<Seen>>>,
}

impl Strategy for Sentinel {
    fn name(&self) -> String {
        "sentinel".into()
    }
    fn num_players(&self) -> usize {
        self.n
    }
    fn player(&self, index: usize) -> Box<dyn Player> {
        Box::new(SentinelPlayer { index, n: self.n, log: self.log.clone() })
    }
    fn framing(&self, step: usize) -> Framing {
        if step == 2 {
            Framing::Delimited
        } else {
            Framing::Fixed(0)
        }
    }
}

impl Player for SentinelPlayer {
    fn step(&mut self, input: &StepInput<'_>, _lab: &mut LocalLab<'_>) -> Result<Action, GameError> {
        let senders = input.group_messages.iter().map(|(s, bits)| {
            assert_eq!(bits.to_uint() as usize, *s, "payload names its sender");
            *s
        });
        self.log.lock().unwrap().push((input.step, self.index, senders.collect(), input.broadcast.clone()));
        Ok(match input.step {
            1 => Action::group(BitString::from_uint(self.index as u64, 8)),
            2 if self.index == self.n => Action::broadcast(BitString::bit(1)),
            2 => Action::wait(),
            _ => Action::halt(),
        })
    }
}

fn plain_instance(n: usize, groups: Vec<Vec<usize>>) -> GameInstance {
    let m = groups.len();
    let grouping = Grouping::new(n, groups).unwrap();
    GameInstance::new(grouping, vec![BitString::bit(0); m], AnswerSet::Explicit(vec![]), vec![None; m]).unwrap()
}

fn groupings() -> impl PropStrategy<Value = (usize, Vec<Vec<usize>>)> {
    (2usize..=8)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(0usize..4, n)))
        .prop_map(|(n, labels)| {
            let groups = (0..4).map(|g| (1..=n).filter(|&p| labels[p - 1] == g).collect()).collect();
            (n, groups)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_messages_stay_in_the_group((n, groups) in groupings()) {
        let log = Arc::new(Mutex::new(Vec::new()));
        let strategy = Sentinel { n, log: log.clone() };
        let instance = plain_instance(n, groups.clone());
        let result = run_game(&instance, &strategy, &mut trial_rng(0, 0)).unwrap();
        prop_assert_eq!(result.broadcast_bits, 3);
        let group_of = instance.grouping().group_of_players();
        for (step, receiver, senders, broadcast) in log.lock().unwrap().iter() {
            match step {
                2 => {
                    let peers: Vec<usize> = groups[group_of[receiver - 1]].iter().copied().filter(|p| p != receiver).collect();
                    prop_assert_eq!(senders, &peers, "receiver {}", receiver);
                    prop_assert!(broadcast.is_empty());
                }
                3 => {
                    prop_assert!(senders.is_empty());
                    prop_assert_eq!(broadcast, &BitString::bit(1));
                }
                _ => prop_assert!(senders.is_empty() && broadcast.is_empty()),
            }
        }
    }

    #[test]
    fn same_seed_same_run(seed in any::<u64>(), n in 5usize..=9, which in 0usize..3) {
        let (spec, strategy): (GameSpec, Box<dyn Strategy>) = match which {
            0 => (make_simple_game(n).unwrap(), quantum_simple_strategy(n).unwrap()),
            1 => (make_general_game(n).unwrap(), quantum_general_strategy(n).unwrap()),
            _ => (make_general_game(n).unwrap(), classical_label_strategy(n).unwrap()),
        };
        let play = || -> RunResult {
            let mut rng = trial_rng(seed, 3);
            let instance = spec.sample(&mut rng);
            run_game(&instance, strategy.as_ref(), &mut rng).unwrap()
        };
        prop_assert_eq!(play(), play());
    }

    #[test]
    fn quantum_runs_win_with_one_bit(seed in any::<u64>(), n in 3usize..=10, general in any::<bool>()) {
        let (spec, strategy) = if general {
            (make_general_game(n).unwrap(), quantum_general_strategy(n).unwrap())
        } else {
            (make_simple_game(n).unwrap(), quantum_simple_strategy(n).unwrap())
        };
        let mut rng = trial_rng(seed, 0);
        let instance = spec.sample(&mut rng);
        let result = run_game(&instance, strategy.as_ref(), &mut rng).unwrap();
        prop_assert!(result.won);
        prop_assert_eq!(result.broadcast_bits, 1);
        // remaining players measure, then chosen players
        prop_assert_eq!(result.transcript.measurements.len(), n);
    }

    #[test]
    fn branch_probabilities_sum_to_one(n in 3usize..=8, rank_seed in any::<u64>()) {
        let spec = make_general_game(n).unwrap();
        let rank = (rank_seed as u128) % spec.support_size();
        let instance = spec.instance(rank).unwrap();
        let strategy = quantum_general_strategy(n).unwrap();
        let branches = run_game_branches(&instance, strategy.as_ref()).unwrap();
        let total: Rational = branches.iter().map(|b| b.probability).sum();
        prop_assert_eq!(total, Rational::from_integer(1));
        prop_assert_eq!(branches.len(), 1 << (n - 1));
    }

    #[test]
    fn framing_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..24), tail in proptest::collection::vec(any::<bool>(), 0..6)) {
        let payload = BitString::from_bits(bits.iter().copied());
        for framing in [Framing::Fixed(bits.len()), Framing::Delimited] {
            let mut wire = framing.encode(&payload).unwrap();
            prop_assert_eq!(wire.len(), bits.len() + framing.overhead(bits.len()));
            let used = wire.len();
            tail.iter().for_each(|&b| wire.push(b));
            prop_assert_eq!(framing.decode(wire.bits()).unwrap(), (payload.clone(), used));
        }
    }

    #[test]
    fn instance_win_predicate(n in 3usize..=9, rank_seed in any::<u64>(), general in any::<bool>(), outs in proptest::collection::vec(0u8..4, 10)) {
        let spec = if general { make_general_game(n).unwrap() } else { make_simple_game(n).unwrap() };
        let instance = spec.instance((rank_seed as u128) % spec.support_size()).unwrap();
        let k = instance.chosen().len();
        // 0 and 1 are bits, 2 is ε, 3 is a two-bit answer
        let answers: Vec<BitString> = outs[..k + 1].iter().map(|&o| match o {
            2 => BitString::empty(),
            3 => BitString::from_bits([false, true]),
            b => BitString::bit(b),
        }).collect();
        let bits: Option<Vec<u8>> = answers[..k].iter().map(BitString::as_single_bit).collect();
        let expected = answers[k].is_empty() && match bits {
            Some(b) if general => b.iter().fold(0, |acc, x| acc ^ x) == 1,
            Some(b) => b[0] != b[1],
            None => false,
        };
        prop_assert_eq!(instance.allowed(&answers), expected);
    }

    #[test]
    fn odd_parity_membership(k in 0usize..8, outs in proptest::collection::vec(0u8..3, 0..10), last_empty in any::<bool>()) {
        // 0 and 1 are bits, 2 stands for a two-bit answer
        let mut answers: Vec<BitString> = outs.iter().map(|&o| match o {
            2 => BitString::from_bits([true, false]),
            b => BitString::bit(b),
        }).collect();
        if last_empty {
            answers.push(BitString::empty());
        }
        let expected = answers.len() == k + 1
            && answers[k].is_empty()
            && answers[..k].iter().all(|a| a.len() == 1)
            && answers[..k].iter().filter(|a| a.as_single_bit() == Some(1)).count() % 2 == 1;
        prop_assert_eq!(AnswerSet::OddParity { k }.contains(&answers), expected);
    }
}

#[test]
fn odd_parity_enumeration() {
    for k in 1..8 {
        let set = AnswerSet::OddParity { k };
        let all = set.enumerate();
        assert_eq!(all.len(), 1 << (k - 1));
        assert!(all.iter().all(|w| set.contains(w)));
    }
    assert!(AnswerSet::OddParity { k: 0 }.enumerate().is_empty());
}

fn chi_square_p_value(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn sampled_instances_are_uniform() {
    const SAMPLES: u64 = 100_000;
    for spec in [make_simple_game(6).unwrap(), make_general_game(6).unwrap(), make_general_game(7).unwrap()] {
        let mut counts = vec![0u64; spec.support_size() as usize];
        for t in 0..SAMPLES {
            counts[spec.sample_rank(&mut trial_rng(11, t)) as usize] += 1;
        }
        let p = chi_square_p_value(&counts);
        assert!(p > 0.001, "{:?} n = {}: chi-square p = {p}", spec.kind(), spec.n());
    }
}

#[test]
fn transcripts_round_trip() {
    let n = 7;
    for (spec, strategy) in [
        (make_general_game(n).unwrap(), quantum_general_strategy(n).unwrap()),
        (make_general_game(n).unwrap(), classical_label_strategy(n).unwrap()),
        (make_simple_game(n).unwrap(), strategy_by_name("classical-atoms:balanced", n).unwrap()),
    ] {
        for (t, instance) in spec.instances().enumerate() {
            let result = run_game(&instance, strategy.as_ref(), &mut trial_rng(5, t as u64)).unwrap();
            let transcript = &result.transcript;
            let framings: Vec<Framing> = transcript.steps.iter().map(|s| s.framing).collect();
            let payloads: Vec<BitString> = transcript.steps.iter().map(|s| s.broadcast.clone()).collect();
            assert_eq!(Transcript::decode_history(&framings, &transcript.broadcast_history()).unwrap(), payloads);
            assert_eq!(transcript.broadcast_history().len(), result.broadcast_bits);
            let messages: Vec<_> = transcript.messages().cloned().collect();
            assert_eq!(Transcript::parse_text(&transcript.to_text()).unwrap(), messages);
            let json = serde_json::to_string(&result).unwrap();
            assert_eq!(serde_json::from_str::<RunResult>(&json).unwrap(), result);
        }
    }
}

/// Every player of every group outputs `0` in step 1 and halts.
struct EveryoneAnswers(usize);

struct Answerer;

impl Player for Answerer {
    fn step(&mut self, _: &StepInput<'_>, _: &mut LocalLab<'_>) -> Result<Action, GameError> {
        Ok(Action::output(BitString::bit(0)).and_halt())
    }
}

impl Strategy for EveryoneAnswers {
    fn name(&self) -> String {
        "everyone-answers".into()
    }
    fn num_players(&self) -> usize {
        self.0
    }
    fn player(&self, _: usize) -> Box<dyn Player> {
        Box::new(Answerer)
    }
}

/// Everyone halts at once without answering.
struct Silent(usize);

struct Quitter;

impl Player for Quitter {
    fn step(&mut self, _: &StepInput<'_>, _: &mut LocalLab<'_>) -> Result<Action, GameError> {
        Ok(Action::halt())
    }
}

impl Strategy for Silent {
    fn name(&self) -> String {
        "silent".into()
    }
    fn num_players(&self) -> usize {
        self.0
    }
    fn player(&self, _: usize) -> Box<dyn Player> {
        Box::new(Quitter)
    }
}

/// Nobody ever halts.
struct Stubborn(usize);

struct StubbornPlayer;

impl Player for StubbornPlayer {
    fn step(&mut self, _: &StepInput<'_>, _: &mut LocalLab<'_>) -> Result<Action, GameError> {
        Ok(Action::wait())
    }
}

impl Strategy for Stubborn {
    fn name(&self) -> String {
        "stubborn".into()
    }
    fn num_players(&self) -> usize {
        self.0
    }
    fn player(&self, _: usize) -> Box<dyn Player> {
        Box::new(StubbornPlayer)
    }
}

#[test]
fn two_answers_in_one_group_is_a_protocol_error() {
    let instance = plain_instance(3, vec![vec![1, 2], vec![3]]);
    let err = run_game(&instance, &EveryoneAnswers(3), &mut trial_rng(0, 0)).unwrap_err();
    assert!(matches!(err, GameError::Protocol(_)), "{err}");
    // singleton groups are fine
    let instance = plain_instance(3, vec![vec![1], vec![2], vec![3]]);
    assert!(run_game(&instance, &EveryoneAnswers(3), &mut trial_rng(0, 0)).is_ok());
}

#[test]
fn runs_that_never_halt_are_cut_off() {
    let instance = GameInstance::chosen_set(4, &[1, 2]).unwrap();
    let err = run_game(&instance, &Stubborn(4), &mut trial_rng(0, 0)).unwrap_err();
    assert_eq!(err, GameError::NonTermination { limit: DEFAULT_STEP_LIMIT });
    let mut rng = trial_rng(0, 0);
    let err = run_with_source(&instance, &Stubborn(4), &mut RngSource(&mut rng), 3).unwrap_err();
    assert_eq!(err, GameError::NonTermination { limit: 3 });
}

#[test]
fn strategy_size_must_match() {
    let instance = GameInstance::chosen_set(5, &[1, 2]).unwrap();
    let strategy = quantum_simple_strategy(6).unwrap();
    assert!(matches!(run_game(&instance, strategy.as_ref(), &mut trial_rng(0, 0)), Err(GameError::Argument(_))));
}

#[test]
fn complexity_of_reference_strategies() {
    let spec = make_simple_game(6).unwrap();
    let report = broadcast_complexity(&spec, quantum_simple_strategy(6).unwrap().as_ref(), SweepMode::Exhaustive).unwrap();
    assert_eq!((report.max_bits, report.min_won, report.win_probability), (1, true, Some(Rational::from_integer(1))));

    let spec = make_general_game(8).unwrap();
    let report = broadcast_complexity(&spec, classical_label_strategy(8).unwrap().as_ref(), SweepMode::Exhaustive).unwrap();
    assert_eq!((report.max_bits, report.min_bits, report.min_won), (3, 3, true));

    // a silent strategy never wins the odd-parity game
    let spec = make_simple_game(5).unwrap();
    let report = broadcast_complexity(&spec, &Silent(5), SweepMode::Exhaustive).unwrap();
    assert_eq!((report.max_bits, report.min_won, report.win_probability), (0, false, Some(Rational::from_integer(0))));

    let err = broadcast_complexity(&spec, &Silent(5), SweepMode::Sampled { trials: 0, seed: 1 }).unwrap_err();
    assert!(matches!(err, GameError::Argument(_)));
}

#[test]
fn sampled_complexity_is_reproducible() {
    let spec = make_general_game(9).unwrap();
    let strategy = quantum_general_strategy(9).unwrap();
    let mode = SweepMode::Sampled { trials: 2000, seed: 42 };
    let a = broadcast_complexity(&spec, strategy.as_ref(), mode).unwrap();
    let b = broadcast_complexity(&spec, strategy.as_ref(), mode).unwrap();
    assert_eq!(a, b);
    assert!(a.min_won && a.max_bits == 1);
}

#[test]
fn classical_atoms_lose_at_the_exact_rate() {
    // n = 5 balanced: exact loss 1/10; 3 standard errors on 20000 runs
    let spec = make_simple_game(5).unwrap();
    let strategy = strategy_by_name("classical-atoms:balanced", 5).unwrap();
    let trials = 20_000u64;
    let losses = (0..trials)
        .filter(|&t| {
            let mut rng = trial_rng(9, t);
            let instance = spec.sample(&mut rng);
            !run_game(&instance, strategy.as_ref(), &mut rng).unwrap().won
        })
        .count() as f64;
    let rate = losses / trials as f64;
    let se = (0.1f64 * 0.9 / trials as f64).sqrt();
    assert!((rate - 0.1).abs() < 3.0 * se, "loss rate {rate}");
}
