use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Mode, RunConfig};
use crate::adversary::{
    alice_superposed, run_attack_trials, trial_seed, AttackStats, AttackStrategy,
    SuperposedReport, Target, SUPERPOSED_MAX_QUBITS,
};
use crate::error::{Error, Result};
use crate::geometry::{intersects, Circle, ProblemParams};
use crate::oracle::{OracleAncillas, OracleOperator};
use crate::protocol::{PairLayout, Party, ProtocolOutcome, ProtocolRun, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |observed − expected| ≤ tolerance
    Within,
    /// observed ≤ expected
    AtMost,
}

/// One pass/fail comparison carried in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub expected: f64,
    pub tolerance: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, expected: f64, tolerance: f64, observed: f64) -> Self {
        Self {
            name: name.into(),
            relation: Relation::Within,
            expected,
            tolerance,
            observed,
            pass: (observed - expected).abs() <= tolerance + 1e-12,
        }
    }

    pub fn at_most(name: impl Into<String>, bound: f64, observed: f64) -> Self {
        Self {
            name: name.into(),
            relation: Relation::AtMost,
            expected: bound,
            tolerance: 0.0,
            observed,
            pass: observed <= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecideResult {
    pub outcome: ProtocolOutcome,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub alice: Circle,
    pub bob: Circle,
    pub expected: bool,
    pub outcome: ProtocolOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub exhaustive: bool,
    pub t: usize,
    pub pairs: u64,
    pub intersecting: u64,
    pub mismatches: u64,
    /// First few mismatching pairs in sweep order.
    pub mismatch_examples: Vec<Mismatch>,
    pub max_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub t: usize,
    pub n: usize,
    pub m: usize,
    pub elementary_units: u64,
    pub adder_runs: u64,
    pub multiplier_runs: u64,
    pub single_qubit_gates: u64,
    pub cnot_gates: u64,
    /// Both pairs plus Bob's oracle work registers.
    pub tracked_qubits: usize,
    pub pair_qubits: usize,
    pub ancilla_qubits: usize,
    pub messages_per_direction: usize,
    pub qubits_per_message: usize,
    /// cost(t) / cost(t/2) when t/2 is also in the table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_to_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostTable {
    pub rows: Vec<CostRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceResult {
    pub outcome: ProtocolOutcome,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Decide(DecideResult),
    Verify(SweepSummary),
    Attack(AttackStats),
    Superposed(SuperposedReport),
    Cost(CostTable),
    Trace(TraceResult),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub command: Mode,
    pub config: RunConfig,
    pub results: Results,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    fn new(config: &RunConfig, results: Results, checks: Vec<Check>, timing: Option<Timing>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.mode,
            config: config.clone(),
            passed: checks.iter().all(|c| c.pass),
            results,
            checks,
            timing,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Timing)> {
    let start = Instant::now();
    let v = f()?;
    Ok((
        v,
        Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

pub fn cmd_decide(config: &RunConfig) -> Result<Report> {
    let params = ProblemParams::new(config.t)?;
    let (transcript, outcome) = ProtocolRun::new(config.alice()?, config.bob()?, params)
        .seed(config.seed)
        .run()?;
    Ok(Report::new(
        config,
        Results::Decide(DecideResult {
            outcome,
            transcript,
        }),
        Vec::new(),
        None,
    ))
}

/// Honest runs over every pair (or `samples` random pairs), compared with
/// the classical predicate.
pub fn sweep(params: &ProblemParams, exhaustive: bool, samples: u64, seed: u64) -> Result<SweepSummary> {
    let pairs: Vec<(Circle, Circle)> = if exhaustive {
        let all: Vec<Circle> = Circle::all(params).collect();
        all.iter()
            .flat_map(|a| all.iter().map(move |b| (*a, *b)))
            .collect()
    } else {
        let hi = (params.grid() - 1) as u64;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut draw = || Circle::new(rng.gen_range(1..=hi), rng.gen_range(1..=hi), rng.gen_range(1..=hi));
        (0..samples).map(|_| (draw(), draw())).collect()
    };
    let runs: Vec<(ProtocolOutcome, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (tr, out) = ProtocolRun::new(*a, *b, *params)
                .seed(trial_seed(seed, i as u64))
                .run()?;
            Ok((out, tr.max_terms))
        })
        .collect::<Result<_>>()?;

    let mut s = SweepSummary {
        exhaustive,
        t: params.t(),
        pairs: pairs.len() as u64,
        intersecting: 0,
        mismatches: 0,
        mismatch_examples: Vec::new(),
        max_terms: 0,
    };
    for ((a, b), (out, terms)) in pairs.iter().zip(runs) {
        let expected = intersects(a, b);
        s.intersecting += expected as u64;
        s.max_terms = s.max_terms.max(terms);
        let want = if expected {
            ProtocolOutcome::Intersect
        } else {
            ProtocolOutcome::Disjoint
        };
        if out != want {
            s.mismatches += 1;
            if s.mismatch_examples.len() < 10 {
                s.mismatch_examples.push(Mismatch {
                    alice: *a,
                    bob: *b,
                    expected,
                    outcome: out,
                });
            }
        }
    }
    Ok(s)
}

pub fn cmd_verify(config: &RunConfig) -> Result<Report> {
    let params = ProblemParams::new(config.t)?;
    let exhaustive = config.t == 2 || config.exhaustive;
    if exhaustive && config.t > 3 {
        return Err(Error::InvalidParams(format!(
            "exhaustive verification is limited to t ≤ 3 (got t = {})",
            config.t
        )));
    }
    let (summary, timing) = timed(|| sweep(&params, exhaustive, config.samples, config.seed))?;
    let checks = vec![
        Check::within("mismatches", 0.0, 0.0, summary.mismatches as f64),
        Check::at_most("max_terms", 2.0, summary.max_terms as f64),
    ];
    Ok(Report::new(config, Results::Verify(summary), checks, Some(timing)))
}

/// Pass/fail targets for a strategy, where the expected value is known.
pub fn attack_checks(stats: &AttackStats, bob: &Circle) -> Vec<Check> {
    const TOL: f64 = 0.02;
    let rate = |name: &str, expected: f64, tol: f64, r: crate::adversary::Rate| {
        Check::within(name, expected, tol, r.rate)
    };
    match stats.strategy {
        AttackStrategy::BobDirectMeasure { which } | AttackStrategy::BobInterceptResend { which } => {
            let learn = if which == Target::One { 0.5 } else { 0.75 };
            vec![
                rate("learned_x", learn, TOL, stats.learned_x),
                rate("learned_and_concealed", learn * 0.5, TOL, stats.learned_and_concealed),
                rate("inconsistent_abort", 0.5, TOL, stats.inconsistent_abort),
                rate("honesty_passed", 1.0, 0.0, stats.honesty_passed),
            ]
        }
        AttackStrategy::BobEntangleMeasure { which } => {
            let learn = if which == Target::One { 0.5 } else { 0.75 };
            vec![
                rate("learned_x", learn, TOL, stats.learned_x),
                rate("t1_plus", 0.5, TOL, stats.t1_plus),
                rate("t1_minus", 0.5, TOL, stats.t1_minus),
                rate("honesty_passed", 1.0, 0.0, stats.honesty_passed),
            ]
        }
        AttackStrategy::AliceMultiInput { second } => {
            let f = |c: &Circle| if intersects(c, bob) { 1.0 } else { 0.0 };
            vec![
                rate("t1_minus", f(&stats.alice), 0.0, stats.t1_minus),
                rate("t2_minus", f(&second), 0.0, stats.t2_minus),
            ]
        }
        AttackStrategy::EveInterceptForward { decoys, active: true } => vec![rate(
            "eavesdropper_abort",
            1.0 - 0.75f64.powi(decoys as i32),
            TOL,
            stats.eavesdropper_abort,
        )],
        AttackStrategy::EveInterceptForward { active: false, .. } => vec![
            rate("detected", 0.0, 0.0, stats.detected),
            rate("learned_x", 0.0, 0.0, stats.learned_x),
        ],
        AttackStrategy::AliceSuperposed => Vec::new(),
    }
}

pub fn cmd_attack(config: &RunConfig) -> Result<Report> {
    let params = ProblemParams::new(config.t)?;
    let name = config
        .strategy
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("attack needs --strategy NAME".into()))?;
    let strategy = AttackStrategy::parse(name, config.alice2, config.decoys)?;
    let bob = config.bob()?;
    bob.validate(&params)?;

    if strategy == AttackStrategy::AliceSuperposed {
        if params.m() > SUPERPOSED_MAX_QUBITS {
            return Err(Error::Unsupported(format!(
                "alice-superposed is limited to t = 2 ({SUPERPOSED_MAX_QUBITS}-qubit particles); t = {} needs {}",
                params.t(),
                params.m()
            )));
        }
        let oracle = OracleOperator::build(&bob, params)?.classical()?;
        let (report, timing) = timed(|| alice_superposed(&oracle, config.shots, config.seed))?;
        return Ok(Report::new(config, Results::Superposed(report), Vec::new(), Some(timing)));
    }

    let alice = config.alice()?;
    let (stats, timing) =
        timed(|| run_attack_trials(&strategy, &alice, &bob, &params, config.trials, config.seed))?;
    let checks = attack_checks(&stats, &bob);
    Ok(Report::new(config, Results::Attack(stats), checks, Some(timing)))
}

/// Costs of one full honest run per precision. Alice's circle is
/// (T−1, T−1, T−1), the worst case for her preparation gates.
pub fn cost_table(ts: &[usize], seed: u64) -> Result<(CostTable, Vec<Check>)> {
    let mut rows: Vec<CostRow> = Vec::new();
    let mut checks = Vec::new();
    for &t in ts {
        let params = ProblemParams::new(t)?;
        let top = (params.grid() - 1) as u64;
        let alice = Circle::new(top, top, top);
        let bob = Circle::new(1, 1, 1);
        let (tr, _) = ProtocolRun::new(alice, bob, params).seed(seed).run()?;
        let (n, m) = (params.n(), params.m());
        let layout = PairLayout::new(&params);
        let pair_qubits = 2 * layout.width();
        let ancilla_qubits = OracleAncillas::width(n);

        let forward: Vec<usize> = tr.quantum_messages(Party::Alice).map(|(_, q)| q).collect();
        let back: Vec<usize> = tr.quantum_messages(Party::Bob).map(|(_, q)| q).collect();
        let ok_msgs = forward == [m, m] && back == [m, m];
        checks.push(Check::within(
            format!("messages_t{t}"),
            1.0,
            0.0,
            ok_msgs as u8 as f64,
        ));
        checks.push(Check::within(
            format!("tracked_qubits_t{t}"),
            (36 * t + 55) as f64,
            0.0,
            (pair_qubits + ancilla_qubits) as f64,
        ));

        let units = tr.cost.elementary_total;
        let ratio_to_half = rows
            .iter()
            .find(|r| 2 * r.t == t)
            .map(|r| units as f64 / r.elementary_units as f64);
        if let Some(r) = ratio_to_half {
            checks.push(Check::within(format!("cost_ratio_t{}_to_t{t}", t / 2), 4.0, 0.8, r));
        }
        rows.push(CostRow {
            t,
            n,
            m,
            elementary_units: units,
            adder_runs: tr.cost.adder_runs,
            multiplier_runs: tr.cost.multiplier_runs,
            single_qubit_gates: tr.cost.single_qubit_gates,
            cnot_gates: tr.cost.cnot_gates,
            tracked_qubits: pair_qubits + ancilla_qubits,
            pair_qubits,
            ancilla_qubits,
            messages_per_direction: forward.len(),
            qubits_per_message: m,
            ratio_to_half,
        });
    }
    Ok((CostTable { rows }, checks))
}

pub fn cmd_cost(config: &RunConfig) -> Result<Report> {
    if config.ts.is_empty() {
        return Err(Error::InvalidParams("cost needs at least one t".into()));
    }
    let (table, checks) = cost_table(&config.ts, config.seed)?;
    Ok(Report::new(config, Results::Cost(table), checks, None))
}

pub fn cmd_trace(config: &RunConfig) -> Result<Report> {
    if config.t > 3 {
        return Err(Error::InvalidParams(format!(
            "trace output is limited to t ≤ 3 (got t = {})",
            config.t
        )));
    }
    let params = ProblemParams::new(config.t)?;
    let (transcript, outcome) = ProtocolRun::new(config.alice()?, config.bob()?, params)
        .seed(config.seed)
        .trace(true)
        .run()?;
    Ok(Report::new(
        config,
        Results::Trace(TraceResult {
            outcome,
            transcript,
        }),
        Vec::new(),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: Mode) -> RunConfig {
        let mut c = RunConfig::new(mode);
        c.seed = 1;
        c
    }

    #[test]
    fn decide_example() {
        let mut c = cfg(Mode::Decide);
        c.t = 3;
        c.alice = Some(Circle::new(2, 2, 1));
        c.bob = Some(Circle::new(2, 3, 1));
        let r = cmd_decide(&c).unwrap();
        match r.results {
            Results::Decide(d) => assert_eq!(d.outcome, ProtocolOutcome::Intersect),
            _ => panic!(),
        }
        assert!(r.timing.is_none());
        c.alice = Some(Circle::new(2, 8, 1));
        let e = cmd_decide(&c).unwrap_err().to_string();
        assert!(e.contains("[1, 7]"), "{e}");
    }

    #[test]
    fn sampled_sweep_t5() {
        let p = ProblemParams::new(5).unwrap();
        let s = sweep(&p, false, 200, 3).unwrap();
        assert_eq!(s.pairs, 200);
        assert_eq!(s.mismatches, 0);
        assert!(s.max_terms <= 2);
    }

    #[test]
    fn superposed_scope_guard() {
        let mut c = cfg(Mode::Attack);
        c.t = 3;
        c.bob = Some(Circle::new(1, 1, 1));
        c.strategy = Some("alice-superposed".into());
        let e = cmd_attack(&c).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }

    #[test]
    fn cost_rows() {
        let (table, checks) = cost_table(&[4, 8], 0).unwrap();
        assert_eq!(table.rows[0].m, 33);
        assert_eq!(table.rows[0].tracked_qubits, 18 * 11 + 1);
        assert_eq!(table.rows[0].messages_per_direction, 2);
        assert!(table.rows[1].ratio_to_half.is_some());
        assert!(checks.iter().any(|c| c.name == "messages_t4" && c.pass));
    }

    #[test]
    fn trace_guard() {
        let mut c = cfg(Mode::Trace);
        c.t = 4;
        c.alice = Some(Circle::new(1, 1, 1));
        c.bob = Some(Circle::new(1, 1, 1));
        assert!(cmd_trace(&c).is_err());
    }
}
