//! The step-based execution loop.
//!
//! Step 1 hands every player its group's query (and the remaining group its
//! auxiliary input). In each step every active player may send one message,
//! either to its own group or as a broadcast, may name a final output for its
//! group, and may halt. Messages emitted in step `t` are delivered in step
//! `t + 1`. The run ends when every player has halted.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transcript::{Framing, MessageRecord, Scope, StepRecord, Transcript};
use super::{AuxInfo, BitString, GameError, GameInstance, GameSpec};
use crate::qsim::{MeasBasis, MeasurementRecord, StateVector};
use crate::Rational;

/// Default cap on the number of steps before a run is declared non-terminating.
pub const DEFAULT_STEP_LIMIT: usize = 64;

/// Input of one player in one step.
#[derive(Debug)]
pub struct StepInput<'a> {
    pub step: usize,
    /// Own group's query bitstring; step 1 only.
    pub query: Option<&'a BitString>,
    /// Own group's auxiliary input; step 1 only.
    pub aux: Option<&'a AuxInfo>,
    /// Decoded broadcast string of the previous step (empty in step 1).
    pub broadcast: &'a BitString,
    /// Intra-group messages of the previous step, as `(sender, bits)`.
    pub group_messages: &'a [(usize, BitString)],
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Message {
    #[default]
    None,
    Group(BitString),
    Broadcast(BitString),
}

/// What a player does in one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Action {
    pub message: Message,
    pub final_output: Option<BitString>,
    pub halt: bool,
}

impl Action {
    pub fn wait() -> Self {
        Self::default()
    }

    pub fn halt() -> Self {
        Self { halt: true, ..Self::default() }
    }

    pub fn broadcast(bits: BitString) -> Self {
        Self { message: Message::Broadcast(bits), ..Self::default() }
    }

    pub fn group(bits: BitString) -> Self {
        Self { message: Message::Group(bits), ..Self::default() }
    }

    pub fn output(bits: BitString) -> Self {
        Self { final_output: Some(bits), ..Self::default() }
    }

    pub fn and_halt(mut self) -> Self {
        self.halt = true;
        self
    }
}

/// One player's local behavior.
pub trait Player: Send {
    fn step(&mut self, input: &StepInput<'_>, lab: &mut LocalLab<'_>) -> Result<Action, GameError>;
}

/// A blueprint for a team of players.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    fn num_players(&self) -> usize;

    /// Fresh per-run state for player `index` (1-based).
    fn player(&self, index: usize) -> Box<dyn Player>;

    /// Declared framing of the broadcast string emitted in `step`.
    /// Steps are silent unless a strategy says otherwise.
    fn framing(&self, _step: usize) -> Framing {
        Framing::Fixed(0)
    }

    /// Broadcast substituted for an empty group in a fixed-length step that
    /// nobody filled.
    fn empty_group_fallback(&self, _step: usize) -> Option<BitString> {
        None
    }

    /// Entangled resource shared before the game starts.
    fn shared_state(&self) -> Option<QuantumSharedState> {
        None
    }
}

/// An n-qubit state where player `i` owns qubit `owner[i - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumSharedState {
    pub state: StateVector,
    pub qubit_of_player: Vec<usize>,
}

impl QuantumSharedState {
    /// Player `i` owns qubit `i`.
    pub fn one_qubit_each(state: StateVector) -> Self {
        let n = state.num_qubits();
        Self { state, qubit_of_player: (1..=n).collect() }
    }
}

/// Decides measurement outcomes given their exact probabilities.
pub trait OutcomeSource {
    fn choose(&mut self, dist: &[Rational; 2]) -> Result<u8, GameError>;
}

/// Samples outcomes with exact integer comparisons.
pub struct RngSource<'a, R: RngCore + ?Sized>(pub &'a mut R);

impl<R: RngCore + ?Sized> OutcomeSource for RngSource<'_, R> {
    fn choose(&mut self, dist: &[Rational; 2]) -> Result<u8, GameError> {
        let (num, den) = (*dist[0].numer(), *dist[0].denom());
        let draw = self.0.gen_range(0..den as u128);
        Ok(if draw < num as u128 { 0 } else { 1 })
    }
}

/// Replays a forced prefix of outcomes, then takes the first outcome with
/// positive probability, remembering where the other outcome was possible.
struct BranchCursor {
    forced: Vec<u8>,
    taken: Vec<(u8, bool)>,
    probability: Rational,
}

impl OutcomeSource for BranchCursor {
    fn choose(&mut self, dist: &[Rational; 2]) -> Result<u8, GameError> {
        let zero = Rational::from_integer(0);
        let depth = self.taken.len();
        let outcome = match self.forced.get(depth) {
            Some(&b) => b,
            None if dist[0] > zero => 0,
            None => 1,
        };
        if dist[outcome as usize] == zero {
            return Err(GameError::Protocol("branch replay diverged".into()));
        }
        let alternative = outcome == 0 && dist[1] > zero;
        self.taken.push((outcome, alternative));
        self.probability *= dist[outcome as usize];
        Ok(outcome)
    }
}

/// The quantum register during a run. Measured qubits are factored out, so
/// the dense state only spans the qubits nobody has measured yet.
struct Register {
    state: StateVector,
    /// Current 1-based position of each original qubit, if still present.
    position: Vec<Option<usize>>,
    qubit_of_player: Vec<usize>,
}

/// A player's handle on its own part of the shared resources.
pub struct LocalLab<'a> {
    player: usize,
    register: Option<&'a mut Register>,
    source: &'a mut dyn OutcomeSource,
    records: &'a mut Vec<MeasurementRecord>,
}

impl LocalLab<'_> {
    /// Measures this player's qubit. Each qubit can be measured once.
    pub fn measure(&mut self, basis: MeasBasis) -> Result<u8, GameError> {
        let player = self.player;
        let reg = self
            .register
            .as_deref_mut()
            .ok_or_else(|| GameError::Protocol(format!("player {player} has no quantum system")))?;
        let qubit = reg.qubit_of_player[player - 1];
        let pos = reg.position[qubit - 1]
            .ok_or_else(|| GameError::Protocol(format!("qubit {qubit} of player {player} measured twice")))?;
        let dist = reg.state.outcome_distribution(pos, basis)?;
        let outcome = self.source.choose(&dist)?;
        let (reduced, _) = reg
            .state
            .project_discard(pos, basis, outcome)?
            .ok_or_else(|| GameError::Protocol("chose a zero-probability outcome".into()))?;
        reg.state = reduced;
        for p in reg.position.iter_mut() {
            *p = match *p {
                Some(x) if x == pos => None,
                Some(x) if x > pos => Some(x - 1),
                other => other,
            };
        }
        self.records.push(MeasurementRecord { qubit_index: qubit, basis, outcome });
        Ok(outcome)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub won: bool,
    pub broadcast_bits: usize,
    pub transcript: Transcript,
}

/// A run together with the exact probability of its measurement branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub probability: Rational,
    pub result: RunResult,
}

/// Plays one instance, sampling measurement outcomes from `rng`.
pub fn run_game<R: RngCore + ?Sized>(instance: &GameInstance, strategy: &dyn Strategy, rng: &mut R) -> Result<RunResult, GameError> {
    run_with_source(instance, strategy, &mut RngSource(rng), DEFAULT_STEP_LIMIT)
}

/// Plays one instance with an explicit outcome source and step limit.
pub fn run_with_source(
    instance: &GameInstance,
    strategy: &dyn Strategy,
    source: &mut dyn OutcomeSource,
    step_limit: usize,
) -> Result<RunResult, GameError> {
    let n = instance.n();
    if strategy.num_players() != n {
        return Err(GameError::Argument(format!(
            "strategy for {} players used on a {n}-player instance",
            strategy.num_players()
        )));
    }
    let group_of = instance.grouping().group_of_players();
    let m = instance.grouping().num_groups();

    let mut register = strategy.shared_state().map(|shared| {
        let width = shared.state.num_qubits();
        Register { state: shared.state, position: (1..=width).map(Some).collect(), qubit_of_player: shared.qubit_of_player }
    });
    let mut players: Vec<Box<dyn Player>> = (1..=n).map(|i| strategy.player(i)).collect();
    let mut halted = vec![false; n];
    let mut outputs: Vec<Option<(usize, BitString)>> = vec![None; m];
    let mut records = Vec::new();
    let mut steps = Vec::new();

    let mut last_broadcast = BitString::empty();
    let mut inbox: Vec<Vec<(usize, BitString)>> = vec![Vec::new(); n];

    let mut step = 1;
    while halted.iter().any(|h| !h) {
        if step > step_limit {
            return Err(GameError::NonTermination { limit: step_limit });
        }
        let mut messages = Vec::new();
        let mut next_inbox: Vec<Vec<(usize, BitString)>> = vec![Vec::new(); n];
        let mut payload = BitString::empty();

        for i in 1..=n {
            if halted[i - 1] {
                continue;
            }
            let g = group_of[i - 1];
            let input = StepInput {
                step,
                query: (step == 1).then(|| &instance.query()[g]),
                aux: if step == 1 { instance.aux()[g].as_ref() } else { None },
                broadcast: &last_broadcast,
                group_messages: &inbox[i - 1],
            };
            let mut lab = LocalLab { player: i, register: register.as_mut(), source: &mut *source, records: &mut records };
            let action = players[i - 1].step(&input, &mut lab)?;

            match action.message {
                Message::Broadcast(bits) if !bits.is_empty() => {
                    payload.extend_from(&bits);
                    messages.push(MessageRecord { step, player: i, scope: Scope::Broadcast, bits });
                }
                Message::Group(bits) if !bits.is_empty() => {
                    for &peer in &instance.grouping().groups()[g] {
                        if peer != i {
                            next_inbox[peer - 1].push((i, bits.clone()));
                        }
                    }
                    messages.push(MessageRecord { step, player: i, scope: Scope::Group, bits });
                }
                _ => {}
            }
            if let Some(out) = action.final_output {
                if let Some((first, _)) = &outputs[g] {
                    return Err(GameError::Protocol(format!(
                        "players {first} and {i} of group {} both gave a final output",
                        g + 1
                    )));
                }
                outputs[g] = Some((i, out));
            }
            if action.halt {
                halted[i - 1] = true;
            }
        }

        let framing = strategy.framing(step);
        if let Framing::Fixed(len) = framing {
            if len > 0 && payload.is_empty() && instance.has_empty_group() {
                if let Some(fallback) = strategy.empty_group_fallback(step) {
                    payload = fallback.clone();
                    messages.push(MessageRecord { step, player: 0, scope: Scope::Broadcast, bits: fallback });
                }
            }
        }
        let wire = framing.encode(&payload)?;
        steps.push(StepRecord { step, messages, framing, broadcast: payload.clone(), wire });

        last_broadcast = payload;
        inbox = next_inbox;
        step += 1;
    }

    let final_outputs: Vec<BitString> = outputs.into_iter().map(|o| o.map(|(_, b)| b).unwrap_or_default()).collect();
    let won = instance.allowed(&final_outputs);
    let transcript = Transcript { steps, final_outputs, measurements: records };
    Ok(RunResult { won, broadcast_bits: transcript.broadcast_bits(), transcript })
}

/// Plays one instance along every measurement branch of positive
/// probability. The branch probabilities sum to exactly 1.
pub fn run_game_branches(instance: &GameInstance, strategy: &dyn Strategy) -> Result<Vec<Branch>, GameError> {
    let mut branches = Vec::new();
    let mut forced = Vec::new();
    loop {
        let mut cursor = BranchCursor { forced, taken: Vec::new(), probability: Rational::from_integer(1) };
        let result = run_with_source(instance, strategy, &mut cursor, DEFAULT_STEP_LIMIT)?;
        branches.push(Branch { probability: cursor.probability, result });
        // deepest decision with an untried alternative
        match cursor.taken.iter().rposition(|&(_, alt)| alt) {
            Some(d) => {
                forced = cursor.taken[..d].iter().map(|&(b, _)| b).collect();
                forced.push(1);
            }
            None => return Ok(branches),
        }
    }
}

/// How [`broadcast_complexity`] explores the game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Every instance of the support along every measurement branch.
    Exhaustive,
    /// Independent seeded runs on sampled instances.
    Sampled { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Largest `Σ_t |b̄_t|` observed.
    pub max_bits: usize,
    /// Smallest `Σ_t |b̄_t|` observed.
    pub min_bits: usize,
    /// Whether every executed run was won.
    pub min_won: bool,
    pub runs: u64,
    /// Exact winning probability under the uniform instance distribution
    /// (exhaustive mode only).
    pub win_probability: Option<Rational>,
}

/// Worst-case group broadcast complexity of `strategy` on `spec`.
pub fn broadcast_complexity(spec: &GameSpec, strategy: &dyn Strategy, mode: SweepMode) -> Result<ComplexityReport, GameError> {
    match mode {
        SweepMode::Exhaustive => {
            let per_instance = (0..spec.support_size())
                .into_par_iter()
                .map(|rank| {
                    let instance = spec.instance(rank)?;
                    let branches = run_game_branches(&instance, strategy)?;
                    let max_bits = branches.iter().map(|b| b.result.broadcast_bits).max().unwrap_or(0);
                    let min_bits = branches.iter().map(|b| b.result.broadcast_bits).min().unwrap_or(0);
                    let all_won = branches.iter().all(|b| b.result.won);
                    let win: Rational = branches.iter().filter(|b| b.result.won).map(|b| b.probability).sum();
                    Ok((max_bits, all_won, branches.len() as u64, win, min_bits))
                })
                .collect::<Result<Vec<_>, GameError>>()?;
            let count = per_instance.len() as i128;
            let total_win: Rational = per_instance.iter().map(|r| r.3).sum();
            Ok(ComplexityReport {
                max_bits: per_instance.iter().map(|r| r.0).max().unwrap_or(0),
                min_bits: per_instance.iter().map(|r| r.4).min().unwrap_or(0),
                min_won: per_instance.iter().all(|r| r.1),
                runs: per_instance.iter().map(|r| r.2).sum(),
                win_probability: Some(total_win / Rational::from_integer(count)),
            })
        }
        SweepMode::Sampled { trials: 0, .. } => Err(GameError::Argument("sampled mode needs at least one trial".into())),
        SweepMode::Sampled { trials, seed } => {
            let results = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, t);
                    let instance = spec.sample(&mut rng);
                    run_game(&instance, strategy, &mut rng).map(|r| (r.broadcast_bits, r.won))
                })
                .collect::<Result<Vec<_>, GameError>>()?;
            Ok(ComplexityReport {
                max_bits: results.iter().map(|r| r.0).max().unwrap_or(0),
                min_bits: results.iter().map(|r| r.0).min().unwrap_or(0),
                min_won: results.iter().all(|r| r.1),
                runs: trials,
                win_probability: None,
            })
        }
    }
}

/// Per-trial generator: ChaCha8 keyed by the seed, one stream per trial, so
/// results do not depend on how trials are spread over workers.
pub fn trial_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Drives a single chosen player (alone in its group, query `0`) through the
/// given per-step broadcast payloads and returns its final output, if any.
///
/// This reads off the player's response to a broadcast history, the only
/// thing a chosen player ever sees. Steps past the end of `payloads` deliver
/// an empty broadcast.
pub fn replay_chosen_player(strategy: &dyn Strategy, index: usize, payloads: &[BitString]) -> Result<Option<BitString>, GameError> {
    let mut player = strategy.player(index);
    let mut register = strategy.shared_state().map(|shared| {
        let width = shared.state.num_qubits();
        Register { state: shared.state, position: (1..=width).map(Some).collect(), qubit_of_player: shared.qubit_of_player }
    });
    let mut cursor = BranchCursor { forced: Vec::new(), taken: Vec::new(), probability: Rational::from_integer(1) };
    let mut records = Vec::new();
    let query = BitString::bit(0);
    let empty = BitString::empty();
    for step in 1..=DEFAULT_STEP_LIMIT {
        let input = StepInput {
            step,
            query: (step == 1).then_some(&query),
            aux: None,
            broadcast: if step >= 2 { payloads.get(step - 2).unwrap_or(&empty) } else { &empty },
            group_messages: &[],
        };
        let mut lab = LocalLab { player: index, register: register.as_mut(), source: &mut cursor, records: &mut records };
        let action = player.step(&input, &mut lab)?;
        if action.final_output.is_some() {
            return Ok(action.final_output);
        }
        if action.halt {
            return Ok(None);
        }
    }
    Err(GameError::NonTermination { limit: DEFAULT_STEP_LIMIT })
}
