//! Cheating parties and eavesdroppers, and Monte Carlo statistics over them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Circle, ProblemParams};
use crate::oracle::{ClassicalOracle, OracleOperator};
use crate::protocol::{
    run_protocol, AbortReason, EncodedInput, PairLayout, ProtocolOutcome, Transcript,
};
use crate::sim::{mask, BasisState, Register, Sign, SparseState};

/// Which of the two transmitted particles an attack touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    One,
    Both,
}

impl Target {
    fn pairs(self) -> &'static [usize] {
        match self {
            Target::One => &[0],
            Target::Both => &[0, 1],
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Target::One => "one",
            Target::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Bob measures the received particles in the computational basis.
    BobDirectMeasure { which: Target },
    /// Bob measures, keeps the originals and sends fresh copies of the result.
    BobInterceptResend { which: Target },
    /// Bob copies each received qubit onto his own probe with CNOTs and
    /// measures the probe after Alice has finished.
    BobEntangleMeasure { which: Target },
    /// Alice encodes a different circle in the second pair and skips the
    /// consistency check.
    AliceMultiInput { second: Circle },
    /// Alice queries the oracle on a uniform superposition of all inputs.
    AliceSuperposed,
    /// Eve sits on the Alice → Bob channel. Alice interleaves `decoys`
    /// single-qubit decoys drawn from {|0⟩, |1⟩, |+⟩, |−⟩}.
    EveInterceptForward { decoys: usize, active: bool },
}

impl AttackStrategy {
    pub const NAMES: &'static [&'static str] = &[
        "bob-direct-measure-one",
        "bob-direct-measure-both",
        "bob-intercept-resend-one",
        "bob-intercept-resend-both",
        "bob-entangle-measure-one",
        "bob-entangle-measure-both",
        "alice-multi-input",
        "alice-superposed",
        "eve-intercept",
        "eve-passive",
    ];

    /// Looks up a strategy by CLI name. `second` is required for
    /// `alice-multi-input`; `decoys` applies to the Eve strategies.
    pub fn parse(name: &str, second: Option<Circle>, decoys: usize) -> Result<Self> {
        let which = |s: &str| match s {
            "one" => Ok(Target::One),
            "both" => Ok(Target::Both),
            _ => Err(Error::Parse(format!("unknown strategy `{name}`"))),
        };
        if let Some(rest) = name.strip_prefix("bob-direct-measure-") {
            return Ok(AttackStrategy::BobDirectMeasure { which: which(rest)? });
        }
        if let Some(rest) = name.strip_prefix("bob-intercept-resend-") {
            return Ok(AttackStrategy::BobInterceptResend { which: which(rest)? });
        }
        if let Some(rest) = name.strip_prefix("bob-entangle-measure-") {
            return Ok(AttackStrategy::BobEntangleMeasure { which: which(rest)? });
        }
        match name {
            "alice-multi-input" => Ok(AttackStrategy::AliceMultiInput {
                second: second.ok_or_else(|| {
                    Error::InvalidParams("alice-multi-input needs a second circle".into())
                })?,
            }),
            "alice-superposed" => Ok(AttackStrategy::AliceSuperposed),
            "eve-intercept" => Ok(AttackStrategy::EveInterceptForward {
                decoys,
                active: true,
            }),
            "eve-passive" => Ok(AttackStrategy::EveInterceptForward {
                decoys,
                active: false,
            }),
            _ => Err(Error::Parse(format!(
                "unknown strategy `{name}`; expected one of {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            AttackStrategy::BobDirectMeasure { which } => {
                format!("bob-direct-measure-{}", which.suffix())
            }
            AttackStrategy::BobInterceptResend { which } => {
                format!("bob-intercept-resend-{}", which.suffix())
            }
            AttackStrategy::BobEntangleMeasure { which } => {
                format!("bob-entangle-measure-{}", which.suffix())
            }
            AttackStrategy::AliceMultiInput { .. } => "alice-multi-input".into(),
            AttackStrategy::AliceSuperposed => "alice-superposed".into(),
            AttackStrategy::EveInterceptForward { active: true, .. } => "eve-intercept".into(),
            AttackStrategy::EveInterceptForward { active: false, .. } => "eve-passive".into(),
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// What the attacker saw during one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AttackerRecord {
    pub attacked_pairs: Vec<usize>,
    /// Measurement results on the attacked particles or probes, in hex.
    pub observations: Vec<String>,
    /// Some observation was nonzero, i.e. revealed X.
    pub learned_x: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoded: Option<Circle>,
}

impl AttackerRecord {
    /// `value` is the measured particle as a label starting at qubit 0.
    fn observe(&mut self, value: &BasisState, n: usize) -> Result<()> {
        self.observations.push(value.to_hex());
        if !value.is_zero() && !self.learned_x {
            self.learned_x = true;
            let whole = Register::new(0, 3 * n);
            self.decoded = Some(EncodedInput::from_particle(value, whole, n)?.decode());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoyState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl DecoyState {
    const ALL: [DecoyState; 4] = [
        DecoyState::Zero,
        DecoyState::One,
        DecoyState::Plus,
        DecoyState::Minus,
    ];

    fn prepare(self) -> Result<SparseState> {
        let mut q = SparseState::zero(1);
        if matches!(self, DecoyState::One | DecoyState::Minus) {
            q.apply_x(0)?;
        }
        if matches!(self, DecoyState::Plus | DecoyState::Minus) {
            q.apply_h(0)?;
        }
        Ok(q)
    }

    fn measure<R: Rng + ?Sized>(self, q: &mut SparseState, rng: &mut R) -> Result<DecoyState> {
        Ok(match self {
            DecoyState::Zero | DecoyState::One => {
                if q.measure_qubit(0, rng)? {
                    DecoyState::One
                } else {
                    DecoyState::Zero
                }
            }
            DecoyState::Plus | DecoyState::Minus => match q.measure_pm(0, rng)? {
                Sign::Plus => DecoyState::Plus,
                Sign::Minus => DecoyState::Minus,
            },
        })
    }
}

/// Decoy qubits interleaved with the forward transmission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoyRecord {
    pub states: Vec<DecoyState>,
    /// (particle index, slot within its transmitted stream) per decoy.
    pub positions: Vec<(usize, usize)>,
    pub measured_by_eve: bool,
    pub mismatches: usize,
    #[serde(skip)]
    qubits: Vec<SparseState>,
}

impl DecoyRecord {
    pub fn prepare<R: Rng + ?Sized>(count: usize, particle_width: usize, rng: &mut R) -> Result<Self> {
        let mut states = Vec::with_capacity(count);
        let mut positions = Vec::with_capacity(count);
        let mut qubits = Vec::with_capacity(count);
        for _ in 0..count {
            let s = DecoyState::ALL[rng.gen_range(0..4)];
            qubits.push(s.prepare()?);
            states.push(s);
            positions.push((rng.gen_range(0..2), rng.gen_range(0..=particle_width)));
        }
        Ok(Self {
            states,
            positions,
            measured_by_eve: false,
            mismatches: 0,
            qubits,
        })
    }

    /// Number of decoys riding along with t₁ and t₂.
    pub fn per_particle(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for &(p, _) in &self.positions {
            c[p] += 1;
        }
        c
    }

    fn eve_measures<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for q in &mut self.qubits {
            q.measure_qubit(0, rng)?;
        }
        self.measured_by_eve = true;
        Ok(())
    }

    /// Alice announces positions and bases; Bob measures each decoy in its
    /// basis and they compare. True when every decoy matches.
    pub fn verify<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        self.mismatches = 0;
        for (s, q) in self.states.iter().zip(self.qubits.iter_mut()) {
            if s.measure(q, rng)? != *s {
                self.mismatches += 1;
            }
        }
        Ok(self.mismatches == 0)
    }
}

fn measure_particles<R: Rng + ?Sized>(
    pairs: &mut [SparseState; 2],
    which: &[usize],
    particle: Register,
    n: usize,
    rec: &mut AttackerRecord,
    rng: &mut R,
) -> Result<()> {
    for &i in which {
        let v = pairs[i].measure_bits(particle, rng)?;
        rec.observe(&v, n)?;
    }
    Ok(())
}

/// Bob measures the selected received particles before applying U.
pub fn bob_direct_measure<R: Rng + ?Sized>(
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    params: &ProblemParams,
    which: Target,
    rng: &mut R,
) -> Result<AttackerRecord> {
    let mut rec = AttackerRecord {
        attacked_pairs: which.pairs().iter().map(|i| i + 1).collect(),
        ..Default::default()
    };
    measure_particles(pairs, which.pairs(), layout.t, params.n(), &mut rec, rng)?;
    Ok(rec)
}

/// Bob measures, keeps the originals, and continues with fresh particles
/// prepared in the observed basis state.
pub fn bob_intercept_resend<R: Rng + ?Sized>(
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    params: &ProblemParams,
    which: Target,
    rng: &mut R,
) -> Result<AttackerRecord> {
    let rec = bob_direct_measure(pairs, layout, params, which, rng)?;
    for &i in which.pairs() {
        // The original t is now definite, so it factors out; Bob keeps it and
        // a fresh particle in the same basis state takes its slot.
        let s = &mut pairs[i];
        let kept = s.iter().next().map(|(k, _)| k.extract(layout.t));
        if s.iter().any(|(k, _)| Some(k.extract(layout.t)) != kept) {
            return Err(Error::NotDefinite);
        }
    }
    Ok(rec)
}

/// Bob attaches an m-qubit probe to each selected pair and copies the
/// received particle onto it.
pub fn bob_entangle_attach(
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    which: Target,
) -> Result<AttackerRecord> {
    for &i in which.pairs() {
        let s = &mut pairs[i];
        let probe = s.extend(layout.t.width);
        for q in 0..layout.t.width {
            s.apply_cnot(layout.t.qubit(q), probe.qubit(q))?;
        }
    }
    Ok(AttackerRecord {
        attacked_pairs: which.pairs().iter().map(|i| i + 1).collect(),
        ..Default::default()
    })
}

/// Bob reads his probes once Alice has measured.
pub fn bob_entangle_measure<R: Rng + ?Sized>(
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    params: &ProblemParams,
    rec: &mut AttackerRecord,
    rng: &mut R,
) -> Result<()> {
    let probe = Register::new(layout.width(), layout.t.width);
    let which: Vec<usize> = rec.attacked_pairs.iter().map(|i| i - 1).collect();
    measure_particles(pairs, &which, probe, params.n(), rec, rng)
}

/// Hook run while the particles are in flight to Bob (and in Bob's hands
/// before U).
pub(crate) fn intercept_forward<R: Rng + ?Sized>(
    strategy: &AttackStrategy,
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    params: &ProblemParams,
    decoys: Option<&mut DecoyRecord>,
    rng: &mut R,
) -> Result<Option<AttackerRecord>> {
    Ok(match *strategy {
        AttackStrategy::BobDirectMeasure { which } => {
            Some(bob_direct_measure(pairs, layout, params, which, rng)?)
        }
        AttackStrategy::BobInterceptResend { which } => {
            Some(bob_intercept_resend(pairs, layout, params, which, rng)?)
        }
        AttackStrategy::BobEntangleMeasure { which } => {
            Some(bob_entangle_attach(pairs, layout, which)?)
        }
        AttackStrategy::EveInterceptForward { active: true, .. } => {
            let mut rec = AttackerRecord {
                attacked_pairs: vec![1, 2],
                ..Default::default()
            };
            measure_particles(pairs, &[0, 1], layout.t, params.n(), &mut rec, rng)?;
            if let Some(d) = decoys {
                d.eve_measures(rng)?;
            }
            Some(rec)
        }
        _ => None,
    })
}

pub(crate) fn after_distinguish<R: Rng + ?Sized>(
    strategy: &AttackStrategy,
    pairs: &mut [SparseState; 2],
    layout: &PairLayout,
    params: &ProblemParams,
    rec: &mut AttackerRecord,
    rng: &mut R,
) -> Result<()> {
    if let AttackStrategy::BobEntangleMeasure { .. } = strategy {
        bob_entangle_measure(pairs, layout, params, rec, rng)?;
    }
    Ok(())
}

/// A count over the trials with its normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    pub count: u64,
    pub rate: f64,
    pub ci95: f64,
}

impl Rate {
    pub fn new(count: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                count,
                rate: 0.0,
                ci95: 0.0,
            };
        }
        let p = count as f64 / trials as f64;
        Self {
            count,
            rate: p,
            ci95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    learned_x: u64,
    detected: u64,
    learned_and_concealed: u64,
    honesty_passed: u64,
    dishonest: u64,
    inconsistent: u64,
    eavesdropper: u64,
    t1_plus: u64,
    t1_minus: u64,
    t2_plus: u64,
    t2_minus: u64,
    intersect: u64,
    disjoint: u64,
}

impl Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            learned_x: self.learned_x + o.learned_x,
            detected: self.detected + o.detected,
            learned_and_concealed: self.learned_and_concealed + o.learned_and_concealed,
            honesty_passed: self.honesty_passed + o.honesty_passed,
            dishonest: self.dishonest + o.dishonest,
            inconsistent: self.inconsistent + o.inconsistent,
            eavesdropper: self.eavesdropper + o.eavesdropper,
            t1_plus: self.t1_plus + o.t1_plus,
            t1_minus: self.t1_minus + o.t1_minus,
            t2_plus: self.t2_plus + o.t2_plus,
            t2_minus: self.t2_minus + o.t2_minus,
            intersect: self.intersect + o.intersect,
            disjoint: self.disjoint + o.disjoint,
        }
    }
}

impl Counts {
    fn from_transcript(tr: &Transcript) -> Self {
        let learned = tr.attacker.as_ref().is_some_and(|a| a.learned_x);
        let abort = tr.outcome.is_abort();
        let b = |v: bool| v as u64;
        Counts {
            learned_x: b(learned),
            detected: b(abort),
            learned_and_concealed: b(learned && !abort),
            honesty_passed: b(tr.honesty.passed()),
            dishonest: b(tr.outcome == ProtocolOutcome::Abort(AbortReason::DishonestBob)),
            inconsistent: b(tr.outcome == ProtocolOutcome::Abort(AbortReason::InconsistentResults)),
            eavesdropper: b(tr.outcome == ProtocolOutcome::Abort(AbortReason::EavesdropperDetected)),
            t1_plus: b(tr.signs.t1 == Some(Sign::Plus)),
            t1_minus: b(tr.signs.t1 == Some(Sign::Minus)),
            t2_plus: b(tr.signs.t2 == Some(Sign::Plus)),
            t2_minus: b(tr.signs.t2 == Some(Sign::Minus)),
            intersect: b(tr.outcome == ProtocolOutcome::Intersect),
            disjoint: b(tr.outcome == ProtocolOutcome::Disjoint),
        }
    }
}

/// Aggregated Monte Carlo results for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackStats {
    pub strategy: AttackStrategy,
    pub name: String,
    pub params: ProblemParams,
    pub alice: Circle,
    pub bob: Circle,
    pub trials: u64,
    pub seed: u64,
    /// The attacker obtained X.
    pub learned_x: Rate,
    /// The run aborted for any reason.
    pub detected: Rate,
    pub learned_and_concealed: Rate,
    pub honesty_passed: Rate,
    pub dishonest_abort: Rate,
    pub inconsistent_abort: Rate,
    pub eavesdropper_abort: Rate,
    pub t1_plus: Rate,
    pub t1_minus: Rate,
    pub t2_plus: Rate,
    pub t2_minus: Rate,
    pub intersect: Rate,
    pub disjoint: Rate,
}

impl AttackStats {
    fn new(
        strategy: AttackStrategy,
        params: ProblemParams,
        alice: Circle,
        bob: Circle,
        trials: u64,
        seed: u64,
        c: Counts,
    ) -> Self {
        let r = |v| Rate::new(v, trials);
        Self {
            strategy,
            name: strategy.name(),
            params,
            alice,
            bob,
            trials,
            seed,
            learned_x: r(c.learned_x),
            detected: r(c.detected),
            learned_and_concealed: r(c.learned_and_concealed),
            honesty_passed: r(c.honesty_passed),
            dishonest_abort: r(c.dishonest),
            inconsistent_abort: r(c.inconsistent),
            eavesdropper_abort: r(c.eavesdropper),
            t1_plus: r(c.t1_plus),
            t1_minus: r(c.t1_minus),
            t2_plus: r(c.t2_plus),
            t2_minus: r(c.t2_minus),
            intersect: r(c.intersect),
            disjoint: r(c.disjoint),
        }
    }

    /// (metric, rate) pairs in a fixed order.
    pub fn metrics(&self) -> Vec<(&'static str, Rate)> {
        vec![
            ("learned_x", self.learned_x),
            ("detected", self.detected),
            ("learned_and_concealed", self.learned_and_concealed),
            ("honesty_passed", self.honesty_passed),
            ("dishonest_abort", self.dishonest_abort),
            ("inconsistent_abort", self.inconsistent_abort),
            ("eavesdropper_abort", self.eavesdropper_abort),
            ("t1_plus", self.t1_plus),
            ("t1_minus", self.t1_minus),
            ("t2_plus", self.t2_plus),
            ("t2_minus", self.t2_minus),
            ("intersect", self.intersect),
            ("disjoint", self.disjoint),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,metric,count,trials,rate,ci95\n");
        for (m, r) in self.metrics() {
            out.push_str(&format!(
                "{},{m},{},{},{:.6},{:.6}\n",
                self.name, r.count, self.trials, r.rate, r.ci95
            ));
        }
        out
    }
}

/// Seed for trial `index`, independent of how trials are scheduled.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}

/// Runs `trials` independent protocol executions under `strategy`.
pub fn run_attack_trials(
    strategy: &AttackStrategy,
    alice: &Circle,
    bob: &Circle,
    params: &ProblemParams,
    trials: u64,
    seed: u64,
) -> Result<AttackStats> {
    if *strategy == AttackStrategy::AliceSuperposed {
        return Err(Error::Unsupported(
            "use alice_superposed for the superposed-input attack".into(),
        ));
    }
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (tr, _) = run_protocol(alice, bob, params, trial_seed(seed, i), Some(strategy))?;
            Ok::<_, Error>(Counts::from_transcript(&tr))
        })
        .try_reduce(Counts::default, |a, b| Ok(a + b))?;
    Ok(AttackStats::new(
        *strategy, *params, *alice, *bob, trials, seed, counts,
    ))
}

pub fn bob_direct_measure_trials(
    which: Target,
    alice: &Circle,
    bob: &Circle,
    params: &ProblemParams,
    trials: u64,
    seed: u64,
) -> Result<AttackStats> {
    run_attack_trials(&AttackStrategy::BobDirectMeasure { which }, alice, bob, params, trials, seed)
}

pub fn eve_intercept(
    decoys: usize,
    active: bool,
    alice: &Circle,
    bob: &Circle,
    params: &ProblemParams,
    trials: u64,
    seed: u64,
) -> Result<AttackStats> {
    run_attack_trials(
        &AttackStrategy::EveInterceptForward { decoys, active },
        alice,
        bob,
        params,
        trials,
        seed,
    )
}

/// Result of Alice running one protocol with two different inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MultiInputReport {
    pub first: Circle,
    pub second: Circle,
    pub sign1: Sign,
    pub sign2: Sign,
    /// Both signs equal the true predicate values.
    pub both_correct: bool,
}

pub fn alice_multi_input(
    first: &Circle,
    second: &Circle,
    bob: &Circle,
    params: &ProblemParams,
    seed: u64,
) -> Result<MultiInputReport> {
    let strategy = AttackStrategy::AliceMultiInput { second: *second };
    let (tr, _) = run_protocol(first, bob, params, seed, Some(&strategy))?;
    let (sign1, sign2) = match (tr.signs.t1, tr.signs.t2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Unsupported("run aborted before both signs".into())),
    };
    let want = |c: &Circle| {
        if crate::geometry::intersects(c, bob) {
            Sign::Minus
        } else {
            Sign::Plus
        }
    };
    Ok(MultiInputReport {
        first: *first,
        second: *second,
        sign1,
        sign2,
        both_correct: sign1 == want(first) && sign2 == want(second),
    })
}

/// Largest particle the superposed-input attack is evaluated on (a dense
/// vector of 2^m real amplitudes).
pub const SUPERPOSED_MAX_QUBITS: usize = 21;

/// A diagonal ±1 oracle on `width` qubits.
pub trait PhaseOracle: Sync {
    fn width(&self) -> usize;
    fn flips(&self, index: u128) -> Result<bool>;
}

/// `index` is a particle value with r in the low n bits, then y, then x.
fn split_index(index: u128, n: usize) -> (u128, u128, u128) {
    let m = mask(n);
    ((index >> (2 * n)) & m, (index >> n) & m, index & m)
}

impl PhaseOracle for OracleOperator {
    fn width(&self) -> usize {
        self.params().m()
    }

    fn flips(&self, index: u128) -> Result<bool> {
        let (x, y, r) = split_index(index, self.params().n());
        self.phase_of(x, y, r)
    }
}

impl PhaseOracle for ClassicalOracle {
    fn width(&self) -> usize {
        3 * self.n()
    }

    fn flips(&self, index: u128) -> Result<bool> {
        let (x, y, r) = split_index(index, self.n());
        self.phase_of(x, y, r)
    }
}

/// The oracle that marks nothing.
#[derive(Debug, Clone, Copy)]
pub struct IdentityOracle {
    pub width: usize,
}

impl PhaseOracle for IdentityOracle {
    fn width(&self) -> usize {
        self.width
    }

    fn flips(&self, _: u128) -> Result<bool> {
        Ok(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperposedReport {
    pub width: usize,
    pub shots: u64,
    pub seed: u64,
    /// Inputs that pick up a −1.
    pub marked_states: u64,
    /// Probability of reading all zeros after the final Hadamards.
    pub zero_probability: f64,
    pub nonzero_shots: u64,
    pub distinct_outcomes: usize,
    /// Upper bound on classical information per query: one m-bit outcome.
    pub max_bits_per_query: usize,
    /// Most frequent outcomes (bitstring, count), highest first.
    pub top_outcomes: Vec<(String, u64)>,
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

/// Alice prepares H^⊗m|0⟩, calls the oracle once, applies H^⊗m and measures.
/// Each shot is a fresh query.
pub fn alice_superposed<O: PhaseOracle>(oracle: &O, shots: u64, seed: u64) -> Result<SuperposedReport> {
    let width = oracle.width();
    if width > SUPERPOSED_MAX_QUBITS {
        return Err(Error::Unsupported(format!(
            "superposed query on {width} qubits exceeds {SUPERPOSED_MAX_QUBITS}"
        )));
    }
    let size = 1usize << width;
    let mut amps = vec![0.0f64; size];
    amps.par_iter_mut()
        .enumerate()
        .try_for_each(|(i, a)| -> Result<()> {
            *a = if oracle.flips(i as u128)? { -1.0 } else { 1.0 };
            Ok(())
        })?;
    let marked_states = amps.iter().filter(|a| **a < 0.0).count() as u64;
    walsh_hadamard(&mut amps);
    let norm = size as f64;
    let probs: Vec<f64> = amps.iter().map(|a| (a / norm).powi(2)).collect();

    let mut cumulative = Vec::with_capacity(size);
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let i = cumulative.partition_point(|c| *c <= u).min(size - 1);
        *hist.entry(i).or_default() += 1;
    }
    let nonzero_shots = shots - hist.get(&0).copied().unwrap_or(0);
    let mut top: Vec<(usize, u64)> = hist.iter().map(|(k, v)| (*k, *v)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(16);
    Ok(SuperposedReport {
        width,
        shots,
        seed,
        marked_states,
        zero_probability: probs[0],
        nonzero_shots,
        distinct_outcomes: hist.len(),
        max_bits_per_query: width,
        top_outcomes: top
            .into_iter()
            .map(|(i, c)| (format!("{i:0width$b}"), c))
            .collect(),
    })
}
