use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Cell, Check, Command, ExperimentConfig, GameChoice, HarnessError, Report, Table};
use crate::bounds::{
    appendix_bound, check_gf2_condition, exhaustive_min_loss, first_zero_subset, is_balanced, meets_appendix_bound,
    meets_pair_bound, search_min_dimension, transcripts_search_simple, verify_lemma_chain, Constraint, GF2Family,
    SearchOutcome,
};
use crate::games::{
    broadcast_complexity, ceil_log2, make_general_game, make_simple_game, run_game, trial_rng, SweepMode,
};
use crate::strategies::{
    classical_label_strategy, ghz_hint_branches, ghz_output_distribution, losing_probability_formula, quantum_general_strategy,
    quantum_simple_strategy, strategy_by_name, StrategyAssignment,
};
use crate::Rational;

/// Dispatches on the configured command.
pub fn run(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    match config.command {
        Command::Play => cmd_play(config),
        Command::Verify => cmd_verify(config),
        Command::Table => cmd_table(config),
        Command::Lemma => cmd_lemma(config),
    }
}

fn zero() -> Rational {
    Rational::from_integer(0)
}

fn one() -> Rational {
    Rational::from_integer(1)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The exact loss of an atom strategy named on the command line.
fn atom_assignment(name: &str, n: usize) -> Result<Option<StrategyAssignment>, HarnessError> {
    let Some(atoms) = name.strip_prefix("classical-atoms:") else {
        return Ok(None);
    };
    let assignment = if atoms == "balanced" {
        StrategyAssignment::balanced(n)?
    } else {
        StrategyAssignment::best_response(StrategyAssignment::parse_atoms(atoms)?)?
    };
    Ok(Some(assignment))
}

/// Plays seeded games, or every instance and branch with `exhaustive`.
pub fn cmd_play(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let n = config.n_or_default();
    let spec = config.game.spec(n)?;
    let name = config.strategy_name();
    let strategy = strategy_by_name(&name, n).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let mut report = Report::new(config);

    if config.exhaustive {
        let c = broadcast_complexity(&spec, strategy.as_ref(), SweepMode::Exhaustive)?;
        let win = c.win_probability.expect("exhaustive sweeps are exact");
        let mut summary = Table::new(
            "summary",
            &["instances", "runs", "win_probability", "loss_probability", "min_broadcast_bits", "max_broadcast_bits"],
        );
        summary.push(vec![
            Cell::int(spec.support_size() as i128),
            Cell::int(c.runs),
            Cell::Exact(win),
            Cell::Exact(one() - win),
            Cell::int(c.min_bits as u64),
            Cell::int(c.max_bits as u64),
        ]);
        report.results.push(summary);
        if name.starts_with("quantum") {
            report.checks.push(Check::new("wins_with_certainty", win == one(), format!("win probability {win}")));
        }
        return Ok(report);
    }

    if config.trials == 0 {
        return Err(HarnessError::Usage("play needs at least one trial".into()));
    }
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, t);
            let instance = spec.sample(&mut rng);
            run_game(&instance, strategy.as_ref(), &mut rng).map(|r| (r.won, r.broadcast_bits))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let trials = config.trials;
    let wins = outcomes.iter().filter(|o| o.0).count() as u64;
    let losses = trials - wins;
    let loss_rate = losses as f64 / trials as f64;
    let std_error = (loss_rate * (1.0 - loss_rate) / trials as f64).sqrt();
    let max_bits = outcomes.iter().map(|o| o.1).max().unwrap_or(0);
    let mut summary = Table::new(
        "summary",
        &["trials", "wins", "losses", "win_rate", "loss_rate", "loss_std_error", "max_broadcast_bits"],
    );
    summary.push(vec![
        Cell::int(trials),
        Cell::int(wins),
        Cell::int(losses),
        Cell::Real(wins as f64 / trials as f64),
        Cell::Real(loss_rate),
        Cell::Real(std_error),
        Cell::int(max_bits as u64),
    ]);
    report.results.push(summary);

    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    for o in &outcomes {
        *histogram.entry(o.1).or_default() += 1;
    }
    let mut hist = Table::new("broadcast_histogram", &["bits", "runs"]);
    for (bits, count) in histogram {
        hist.push(vec![Cell::int(bits as u64), Cell::int(count)]);
    }
    report.results.push(hist);

    if name.starts_with("quantum") {
        report.checks.push(Check::new("wins_every_run", losses == 0, format!("{wins} of {trials} runs won")));
    }
    if let (Some(assignment), GameChoice::Simple) = (atom_assignment(&name, n)?, config.game) {
        let exact = assignment.losing_probability();
        let p = to_f64(exact);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let ok = (loss_rate - p).abs() <= 3.0 * se;
        report.checks.push(Check::new(
            "loss_rate_within_3se",
            ok,
            format!("observed {loss_rate:.6}, exact {exact}, 3 standard errors {:.6}", 3.0 * se),
        ));
    }
    Ok(report)
}

struct Verifier {
    values: Table,
    checks: Vec<Check>,
}

impl Verifier {
    fn value(&mut self, item: &str, quantity: &str, value: Cell) {
        self.values.push(vec![Cell::text(item), Cell::text(quantity), value]);
    }

    fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    fn in_range(&mut self, name: &str, n: usize, lo: usize, hi: usize) -> bool {
        if (lo..=hi).contains(&n) {
            true
        } else {
            self.checks.push(Check::skipped(name, format!("n = {n} outside {lo}..={hi}")));
            false
        }
    }
}

/// Runs every exact check available for `n`.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let n = config.n_or_default();
    let mut v = Verifier { values: Table::new("values", &["item", "quantity", "value"]), checks: Vec::new() };

    if v.in_range("pseudo_telepathy_simple", n, 3, 12) {
        verify_simple_quantum(&mut v, n)?;
    }
    if v.in_range("pseudo_telepathy_general", n, 2, 12) {
        verify_general_quantum(&mut v, n)?;
    }
    if v.in_range("formula_oracle", n, 5, 12) {
        let formula = losing_probability_formula(n)?;
        let search = exhaustive_min_loss(n)?;
        v.value("formula_oracle", "p(n) formula", Cell::Exact(formula));
        v.value("formula_oracle", "min loss by search", Cell::Exact(search.min_loss));
        v.check(Check::new("formula_oracle", formula == search.min_loss, format!("p({n}) = {formula}, search {}", search.min_loss)));
        let profiles: Vec<String> = search.argmin.iter().map(|p| format!("{p:?}")).collect();
        v.value("balanced_argmin", "argmin profiles", Cell::text(profiles.join(" ")));
        v.check(Check::new(
            "balanced_argmin",
            search.argmin.iter().all(is_balanced),
            format!("{} minimizing profiles, class sizes differ by at most 1", search.argmin.len()),
        ));
    }
    if v.in_range("min_transcripts_simple", n, 2, 16) {
        let outcome = transcripts_search_simple(n)?;
        let l = outcome.l_min.expect("search succeeded");
        v.value("min_transcripts_simple", "l_min", Cell::int(l as u64));
        v.value("min_transcripts_simple", "log2 l_min", Cell::Real((l as f64).log2()));
        v.value("min_transcripts_simple", "log2 log2 n", Cell::Real((n as f64).log2().log2()));
        let infeasible_below = outcome.attempts.iter().filter(|a| a.l < l).all(|a| !a.feasible);
        v.check(Check::new(
            "min_transcripts_simple",
            l == ceil_log2(n) && infeasible_below && meets_pair_bound(l, n),
            format!("l_min = {l}, ceil(log2 n) = {}, {}", ceil_log2(n), attempt_summary(&outcome)),
        ));
    }
    if v.in_range("lemma_chain", n, 2, 10) {
        let r = verify_lemma_chain(n)?;
        v.value("lemma_chain", "l_min", Cell::int(r.l_min as u64));
        v.value("lemma_chain", "sqrt(n) - 2", Cell::Real(r.sqrt_n_minus_2));
        v.value("lemma_chain", "log2 l_min", Cell::Real(r.log2_l_min));
        v.value("lemma_chain", "log2(n)/2 - 2", Cell::Real(r.half_log2_n_minus_2));
        v.value("lemma_chain", "label histories", Cell::int(r.label_histories as u64));
        v.value("lemma_chain", "2^ceil(log2 n)", Cell::int(r.label_upper_bound as u64));
        v.check(Check::new(
            "lemma_chain",
            r.all_hold(),
            format!(
                "l_min = {} >= sqrt({n}) - 2 = {}: {}; label table valid: {}; {} <= {} <= {}",
                r.l_min,
                super::format_sig12(r.sqrt_n_minus_2),
                r.l_min_meets_sqrt_bound,
                r.label_table_valid,
                r.l_min,
                r.label_histories,
                r.label_upper_bound
            ),
        ));
    }
    if v.in_range("label_strategy", n, 2, 10) {
        let spec = make_general_game(n)?;
        let c = broadcast_complexity(&spec, classical_label_strategy(n)?.as_ref(), SweepMode::Exhaustive)?;
        let l = ceil_log2(n);
        v.value("label_strategy", "broadcast bits", Cell::int(c.max_bits as u64));
        v.check(Check::new(
            "label_strategy",
            c.min_won && c.min_bits == l && c.max_bits == l,
            format!("{} instances won: {}; broadcast bits {}..={} (ceil(log2 n) = {l})", c.runs, c.min_won, c.min_bits, c.max_bits),
        ));
    }

    let mut report = Report::new(config);
    report.results.push(v.values);
    report.checks = v.checks;
    Ok(report)
}

fn attempt_summary(outcome: &SearchOutcome) -> String {
    let parts: Vec<String> = outcome
        .attempts
        .iter()
        .map(|a| format!("l={} {} ({} nodes)", a.l, if a.feasible { "feasible" } else { "infeasible" }, a.nodes))
        .collect();
    parts.join(", ")
}

fn verify_simple_quantum(v: &mut Verifier, n: usize) -> Result<(), HarnessError> {
    let spec = make_simple_game(n)?;
    if spec.below_minimum() {
        v.value("pseudo_telepathy_simple", "below the 5-player minimum", Cell::Bool(true));
    }
    let mut branches = 0u64;
    let mut equal_mass = zero();
    let mut consistent = true;
    for instance in spec.instances() {
        for b in ghz_hint_branches(n, &instance.chosen())? {
            branches += 1;
            // tuples 00 and 11
            equal_mass += b.joint[0] + b.joint[3];
            consistent &= b.joint.iter().copied().sum::<Rational>() == b.probability;
        }
    }
    v.value("pseudo_telepathy_simple", "equal-output probability", Cell::Exact(equal_mass));
    v.value("pseudo_telepathy_simple", "hint branches", Cell::int(branches));
    let c = broadcast_complexity(&spec, quantum_simple_strategy(n)?.as_ref(), SweepMode::Exhaustive)?;
    let win = c.win_probability.expect("exact");
    v.value("pseudo_telepathy_simple", "win probability", Cell::Exact(win));
    v.value("pseudo_telepathy_simple", "broadcast bits", Cell::int(c.max_bits as u64));
    v.check(Check::new(
        "pseudo_telepathy_simple",
        equal_mass == zero() && consistent && win == one() && c.min_won && c.min_bits == 1 && c.max_bits == 1,
        format!(
            "{} instances, {branches} hint branches, equal-output mass {equal_mass}; {} game runs, win probability {win}, broadcast bits {}..={}",
            spec.support_size(),
            c.runs,
            c.min_bits,
            c.max_bits
        ),
    ));
    Ok(())
}

fn verify_general_quantum(v: &mut Verifier, n: usize) -> Result<(), HarnessError> {
    let spec = make_general_game(n)?;
    let mut even_mass = zero();
    let mut uniform = true;
    for instance in spec.instances() {
        let chosen = instance.chosen();
        let k = chosen.len();
        let expected = Rational::new(1, 1 << (k - 1));
        for (t, p) in ghz_output_distribution(n, &chosen)?.into_iter().enumerate() {
            if t.count_ones() % 2 == 0 {
                even_mass += p;
            } else {
                uniform &= p == expected;
            }
        }
    }
    v.value("pseudo_telepathy_general", "even-parity probability", Cell::Exact(even_mass));
    let c = broadcast_complexity(&spec, quantum_general_strategy(n)?.as_ref(), SweepMode::Exhaustive)?;
    let win = c.win_probability.expect("exact");
    v.value("pseudo_telepathy_general", "win probability", Cell::Exact(win));
    v.value("pseudo_telepathy_general", "broadcast bits", Cell::int(c.max_bits as u64));
    v.check(Check::new(
        "pseudo_telepathy_general",
        even_mass == zero() && win == one() && c.min_won && c.max_bits <= 1,
        format!(
            "{} instances, even-parity mass {even_mass}; {} game runs, win probability {win}, max broadcast bits {}",
            spec.support_size(),
            c.runs,
            c.max_bits
        ),
    ));
    v.check(Check::new(
        "uniform_odd_outputs",
        uniform,
        "every odd-parity output tuple of k chosen players has probability 2^-(k-1)",
    ));
    Ok(())
}

/// Formula and bound values for a range of `n`.
pub fn cmd_table(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let hi = config.n_or_default();
    let lo = config.n_min.unwrap_or(5).max(5);
    if hi < lo {
        return Err(HarnessError::Usage(format!("empty range {lo}..={hi}; the formula starts at n = 5")));
    }
    let mut table = Table::new(
        "table",
        &[
            "n",
            "p(n)",
            "ceil(log2 n)",
            "log2 log2 n",
            "log2(n)/2 - 2",
            "sqrt(n) - 2",
            "l_min simple",
            "l_min general",
        ],
    );
    let quarter = Rational::new(1, 4);
    let mut below_quarter = true;
    let mut values = BTreeMap::new();
    for n in lo..=hi {
        let p = losing_probability_formula(n)?;
        below_quarter &= p < quarter;
        values.insert(n, p);
        let simple = (n <= 16).then(|| transcripts_search_simple(n)).transpose()?.and_then(|o| o.l_min);
        let general = (n <= 10).then(|| crate::bounds::min_dimension_general(n)).transpose()?;
        let x = n as f64;
        table.push(vec![
            Cell::int(n as u64),
            Cell::Exact(p),
            Cell::int(ceil_log2(n) as u64),
            Cell::Real(x.log2().log2()),
            Cell::Real(0.5 * x.log2() - 2.0),
            Cell::Real(appendix_bound(n)),
            Cell::opt_int(simple),
            Cell::opt_int(general),
        ]);
    }
    let mut report = Report::new(config);
    report.results.push(table);
    report.checks.push(Check::new("below_quarter", below_quarter, format!("p(n) < 1/4 for n in {lo}..={hi}")));
    match values.get(&200) {
        Some(p) => report.checks.push(Check::new("approaches_quarter", *p > Rational::new(6, 25), format!("p(200) = {p} > 6/25"))),
        None => report.checks.push(Check::skipped("approaches_quarter", "n = 200 not in range")),
    }
    for (n, expected) in [(5, Rational::new(1, 10)), (8, Rational::new(1, 7))] {
        if let Some(p) = values.get(&n) {
            report.checks.push(Check::new(&format!("p({n})"), *p == expected, format!("p({n}) = {p}, expected {expected}")));
        }
    }
    Ok(report)
}

/// Checks a GF(2) family read from a file, or searches for the smallest
/// dimension for `n`.
pub fn cmd_lemma(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let mut report = Report::new(config);
    if let Some(path) = &config.family_path {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let family = GF2Family::parse_text(&text)?;
        let holds = check_gf2_condition(&family)?;
        let witness = first_zero_subset(&family)
            .map(|mask| (0..family.n()).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let mut t = Table::new("family", &["n", "dimension", "condition_holds", "zero_sum_subset", "sqrt(n) - 2"]);
        t.push(vec![
            Cell::int(family.n() as u64),
            Cell::int(family.dimension() as u64),
            Cell::Bool(holds),
            Cell::text(witness),
            Cell::Real(appendix_bound(family.n())),
        ]);
        report.results.push(t);
        report.checks.push(Check::new(
            "bound_consistent",
            !holds || meets_appendix_bound(family.dimension(), family.n()),
            "a family satisfying the condition has dimension at least sqrt(n) - 2",
        ));
        return Ok(report);
    }

    let n = config.n_or_default();
    if !(2..=10).contains(&n) {
        return Err(HarnessError::Usage(format!("lemma searches need n in 2..=10, got {n}")));
    }
    let max_l = config.max_l.unwrap_or(ceil_log2(n) + 2);
    if max_l == 0 || max_l > 16 {
        return Err(HarnessError::Usage(format!("--max-l must be in 1..=16, got {max_l}")));
    }
    let outcome = search_min_dimension(n, Constraint::TwoModFour, max_l);
    let mut attempts = Table::new("attempts", &["l", "feasible", "nodes"]);
    for a in &outcome.attempts {
        attempts.push(vec![Cell::int(a.l as u64), Cell::Bool(a.feasible), Cell::int(a.nodes)]);
    }
    let mut summary = Table::new("summary", &["n", "l_min", "sqrt(n) - 2", "meets_bound"]);
    summary.push(vec![
        Cell::int(n as u64),
        Cell::opt_int(outcome.l_min),
        Cell::Real(appendix_bound(n)),
        outcome.l_min.map_or(Cell::Missing, |l| Cell::Bool(meets_appendix_bound(l, n))),
    ]);
    report.results.push(summary);
    report.results.push(attempts);
    match &outcome.witness {
        Some(w) => {
            let mut t = Table::new("witness", &["player", "vector"]);
            for (i, row) in w.rows().iter().enumerate() {
                t.push(vec![Cell::int(i as u64 + 1), Cell::text(row.to_string())]);
            }
            report.results.push(t);
            report.checks.push(Check::new("witness_valid", check_gf2_condition(w)?, "search witness passes the subset check"));
            let l = outcome.l_min.expect("witness implies l_min");
            report.checks.push(Check::new("appendix_bound", meets_appendix_bound(l, n), format!("{l} >= sqrt({n}) - 2")));
        }
        None => report.checks.push(Check::skipped("appendix_bound", format!("no family found with l <= {max_l}"))),
    }
    Ok(report)
}

