//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs under `cargo test` as a harness-less test target.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlgame_core::bounds::{
    check_gf2_condition, exhaustive_min_loss, meets_appendix_bound, meets_pair_bound, min_dimension_general,
    min_transcripts_simple, transcripts_search_simple, GF2Family,
};
use nlgame_core::games::{
    broadcast_complexity, ceil_log2, make_general_game, make_simple_game, GameSpec, SweepMode,
};
use nlgame_core::harness::{self, Command, ExperimentConfig, OutputFormat};
use nlgame_core::strategies::{
    classical_label_strategy, ghz_hint_branches, ghz_output_distribution, losing_probability_formula,
    quantum_general_strategy, quantum_simple_strategy,
};
use nlgame_core::Rational;

type Outcome = Result<String, String>;

const SEED: u64 = 42;
const RANDOM_FAMILIES: usize = 1000;

fn zero() -> Rational {
    Rational::from_integer(0)
}

fn one() -> Rational {
    Rational::from_integer(1)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Exact min loss is 1/10 at n = 5 and 1/7 at n = 8; n ≤ 9 in under 10 s.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut values = Vec::new();
    for n in 5..=9 {
        values.push((n, exhaustive_min_loss(n).map_err(err)?.min_loss));
    }
    let elapsed = start.elapsed();
    let p5 = values[0].1;
    let p8 = values[3].1;
    check(p5 == Rational::new(1, 10), || format!("p(5) = {p5}, expected 1/10"))?;
    check(p8 == Rational::new(1, 7), || format!("p(8) = {p8}, expected 1/7"))?;
    check(elapsed < Duration::from_secs(10), || format!("n = 5..9 took {}", secs(elapsed)))?;
    Ok(format!("p(5) = {p5}, p(8) = {p8}, n = 5..9 in {}", secs(elapsed)))
}

/// The closed form equals the exhaustive minimum for n = 5..9.
fn criterion_2() -> Outcome {
    for n in 5..=9 {
        let formula = losing_probability_formula(n).map_err(err)?;
        let search = exhaustive_min_loss(n).map_err(err)?.min_loss;
        check(formula == search, || format!("n = {n}: formula {formula}, search {search}"))?;
    }
    Ok("formula = search for n = 5..9".into())
}

/// The formula stays below 1/4 on 5..200 and exceeds 6/25 at 200.
fn criterion_3() -> Outcome {
    let quarter = Rational::new(1, 4);
    for n in 5..=200 {
        let p = losing_probability_formula(n).map_err(err)?;
        check(p < quarter, || format!("p({n}) = {p} is not below 1/4"))?;
    }
    let p200 = losing_probability_formula(200).map_err(err)?;
    check(p200 > Rational::new(6, 25), || format!("p(200) = {p200} does not exceed 6/25"))?;
    let mut config = ExperimentConfig::new(Command::Table).with_n(200);
    config.output_format = OutputFormat::Json;
    let report = harness::run(&config).map_err(err)?;
    check(report.all_passed(), || format!("table report failed {:?}", report.failed_checks()))?;
    Ok(format!("p(n) < 1/4 for n = 5..200, p(200) = {p200} > 6/25"))
}

fn odd_parity_loss(joint: &[Rational]) -> Rational {
    joint.iter().enumerate().filter(|(t, _)| t.count_ones() % 2 == 0).map(|(_, p)| *p).sum()
}

/// Sweeps every instance along every branch and checks one broadcast bit.
fn sweep_one_bit(spec: &GameSpec, strategy: &dyn nlgame_core::games::Strategy, exact_bits: bool) -> Result<u64, String> {
    let report = broadcast_complexity(spec, strategy, SweepMode::Exhaustive).map_err(err)?;
    let n = spec.n();
    check(report.min_won && report.win_probability == Some(one()), || format!("n = {n}: some run lost ({report:?})"))?;
    check(report.max_bits <= 1, || format!("n = {n}: a run broadcast {} bits", report.max_bits))?;
    if exact_bits {
        check(report.min_bits == 1, || format!("n = {n}: a run broadcast {} bits", report.min_bits))?;
    }
    Ok(report.runs)
}

/// Quantum simple strategy: zero loss and exactly one bit, n = 3..12, < 60 s.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut instances = 0;
    let mut runs = 0;
    for n in 3..=12 {
        let spec = make_simple_game(n).map_err(err)?;
        for instance in spec.instances() {
            let chosen = instance.chosen();
            let loss: Rational = ghz_hint_branches(n, &chosen).map_err(err)?.iter().map(|b| odd_parity_loss(&b.joint)).sum();
            check(loss == zero(), || format!("n = {n}, pair {chosen:?}: losing probability {loss}"))?;
            instances += 1;
        }
        let strategy = quantum_simple_strategy(n).map_err(err)?;
        runs += sweep_one_bit(&spec, strategy.as_ref(), true)?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("sweep took {}", secs(elapsed)))?;
    Ok(format!("{instances} instances, {runs} branch runs, loss 0, 1 bit each, {}", secs(elapsed)))
}

/// Quantum general strategy: no mass on even parity, at most one bit,
/// n = 2..12, the n = 12 sweep under 5 min.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut instances = 0;
    let mut n12 = Duration::ZERO;
    for n in 2..=12 {
        let t = Instant::now();
        let spec = make_general_game(n).map_err(err)?;
        for instance in spec.instances() {
            let chosen = instance.chosen();
            let dist = ghz_output_distribution(n, &chosen).map_err(err)?;
            let even = odd_parity_loss(&dist);
            check(even == zero(), || format!("n = {n}, C = {chosen:?}: even-parity mass {even}"))?;
            instances += 1;
        }
        let strategy = quantum_general_strategy(n).map_err(err)?;
        sweep_one_bit(&spec, strategy.as_ref(), false)?;
        if n == 12 {
            n12 = t.elapsed();
        }
    }
    check(n12 < Duration::from_secs(300), || format!("n = 12 took {}", secs(n12)))?;
    Ok(format!("{instances} instances, even mass 0, at most 1 bit, n = 12 in {}, total {}", secs(n12), secs(start.elapsed())))
}

/// Label strategy wins every instance with exactly ⌈log2 n⌉ bits, n = 2..10.
fn criterion_6() -> Outcome {
    let mut runs = 0;
    for n in 2..=10 {
        let spec = make_general_game(n).map_err(err)?;
        let strategy = classical_label_strategy(n).map_err(err)?;
        let report = broadcast_complexity(&spec, strategy.as_ref(), SweepMode::Exhaustive).map_err(err)?;
        let w = ceil_log2(n);
        check(report.min_won && report.win_probability == Some(one()), || format!("n = {n}: label strategy lost"))?;
        check(report.min_bits == w && report.max_bits == w, || {
            format!("n = {n}: bits in [{}, {}], expected {w}", report.min_bits, report.max_bits)
        })?;
        runs += report.runs;
    }
    Ok(format!("{runs} runs won with ⌈log2 n⌉ bits for n = 2..10"))
}

/// Pair-game transcript minimum is ⌈log2 n⌉ for n = 2..16; two histories
/// do not suffice at n = 5.
fn criterion_7() -> Outcome {
    for n in 2..=16 {
        let l = min_transcripts_simple(n).map_err(err)?;
        check(l == ceil_log2(n), || format!("n = {n}: l_min = {l}, expected {}", ceil_log2(n)))?;
        check(meets_pair_bound(l, n), || format!("n = {n}: log2 l_min < log2 log2 n"))?;
    }
    let outcome = transcripts_search_simple(5).map_err(err)?;
    let two = outcome.attempts.iter().find(|a| a.l == 2).ok_or("no attempt at l = 2")?;
    check(!two.feasible, || "n = 5 is winnable with 2 histories".into())?;
    Ok(format!("l_min = ⌈log2 n⌉ for n = 2..16; n = 5, l = 2 infeasible after {} nodes", two.nodes))
}

/// Set-game dimension meets √n − 2 for n = 2..10, and the subset check
/// agrees with the Gray-code oracle on random families.
fn criterion_8() -> Outcome {
    let mut dims = Vec::new();
    for n in 2..=10 {
        let l = min_dimension_general(n).map_err(err)?;
        check(meets_appendix_bound(l, n), || format!("n = {n}: l_min = {l} below √n − 2"))?;
        dims.push(l);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut accepted = 0;
    for trial in 0..RANDOM_FAMILIES {
        let n = rng.gen_range(1..=10);
        let l = rng.gen_range(1..=8);
        let vectors: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << l)).collect();
        let family = GF2Family::new(l, vectors.clone()).map_err(err)?;
        let ours = check_gf2_condition(&family).map_err(err)?;
        let oracle = common::gray_code_condition(&vectors);
        check(ours == oracle, || format!("family {trial} ({vectors:?} in dimension {l}): {ours} vs oracle {oracle}"))?;
        accepted += ours as usize;
    }
    Ok(format!("l_min = {dims:?} for n = 2..10; {RANDOM_FAMILIES} families agree ({accepted} satisfy the condition)"))
}

/// Two `verify` runs with seed 42 render byte-identical reports.
fn criterion_9() -> Outcome {
    for format in [OutputFormat::Json, OutputFormat::Csv, OutputFormat::Text] {
        let mut config = ExperimentConfig::new(Command::Verify);
        config.seed = SEED;
        config.output_format = format;
        let first = harness::run(&config).map_err(err)?.render(format).map_err(err)?;
        let second = harness::run(&config).map_err(err)?.render(format).map_err(err)?;
        check(first == second, || format!("{format} reports differ"))?;
    }
    Ok("json, csv and text reports identical across runs".into())
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {id}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} of 9 passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
