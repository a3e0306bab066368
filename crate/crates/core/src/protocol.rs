//! The three-stage two-party circle intersection protocol.
//!
//! Alice prepares two entangled particle pairs (hᵢ, tᵢ) holding
//! (|0⟩|0⟩ + |X⟩|X⟩)/√2, sends t₁ and t₂ to Bob, who applies his oracle and
//! returns them. Alice runs the honesty test, discriminates |X±⟩ on each
//! returned particle, checks the two results agree, and announces the verdict.
//!
//! Each pair is simulated as its own sparse state on `h ‖ t` (2m qubits);
//! Bob's oracle work registers are attached only while U runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, AttackStrategy, AttackerRecord, DecoyRecord};
use crate::error::{Error, Result};
use crate::geometry::{Circle, ProblemParams};
use crate::oracle::{InputRegisters, OracleOperator};
use crate::qarith::{cost_report, Arith, CostModel, CostReport};
use crate::sim::{BasisState, Register, Sign, SparseState};

/// Alice's query string X = x₁ ‖ y₁ ‖ r₁, each field n bits wide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodedInput {
    pub n: usize,
    /// Field values in display order (x₁, y₁, r₁).
    pub fields: [u128; 3],
    /// Qubit positions (within the particle) of the nonzero bits of X, ascending.
    pub j_list: Vec<usize>,
    /// First nonzero position; the qubit the superposition is seeded on.
    pub j1: usize,
}

impl EncodedInput {
    /// X as a basis label on a 3n-qubit particle starting at qubit 0.
    pub fn key(&self) -> BasisState {
        let mut k = BasisState::zero(3 * self.n);
        let inp = InputRegisters::within(Register::new(0, 3 * self.n), self.n)
            .expect("3n-wide particle");
        for (r, v) in inp.fields().into_iter().zip(self.fields) {
            k.set(r, v);
        }
        k
    }

    pub fn decode(&self) -> Circle {
        let [x, y, r] = self.fields;
        Circle::new(x as u64, y as u64, r as u64)
    }

    /// Reads X back out of a particle register.
    pub fn from_particle(key: &BasisState, particle: Register, n: usize) -> Result<Self> {
        let inp = InputRegisters::within(particle, n)?;
        let fields = [key.get(inp.x), key.get(inp.y), key.get(inp.r)];
        Self::from_fields(fields, n)
    }

    fn from_fields(fields: [u128; 3], n: usize) -> Result<Self> {
        let mut j_list = Vec::new();
        // field 0 in qubit order is r₁, then y₁, then x₁
        for (slot, v) in [fields[2], fields[1], fields[0]].into_iter().enumerate() {
            for b in 0..n {
                if (v >> b) & 1 == 1 {
                    j_list.push(slot * n + b);
                }
            }
        }
        let j1 = *j_list
            .first()
            .ok_or_else(|| Error::InvalidParams("X = 0 cannot be phase-encoded".into()))?;
        Ok(Self {
            n,
            fields,
            j_list,
            j1,
        })
    }
}

pub fn encode_input(circle: &Circle, params: &ProblemParams) -> Result<EncodedInput> {
    circle.validate(params)?;
    EncodedInput::from_fields(
        [circle.x as u128, circle.y as u128, circle.r as u128],
        params.n(),
    )
}

/// Register positions within one pair state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairLayout {
    pub h: Register,
    pub t: Register,
}

impl PairLayout {
    pub fn new(params: &ProblemParams) -> Self {
        let m = params.m();
        Self {
            h: Register::new(0, m),
            t: Register::new(m, m),
        }
    }

    pub fn width(&self) -> usize {
        self.t.end()
    }
}

/// H on the first nonzero position, then CNOT fan-out to the others:
/// |0…0⟩ → (|0⟩ + |X⟩)/√2 on `particle`.
pub fn prepare_superposition(
    state: &mut SparseState,
    particle: Register,
    x: &EncodedInput,
    arith: &mut Arith,
) -> Result<()> {
    if !state.is_zero_on(particle) {
        return Err(Error::InvalidParams("particle must start in |0…0⟩".into()));
    }
    let j1 = particle.qubit(x.j1);
    state.apply_h(j1)?;
    for &j in &x.j_list[1..] {
        state.apply_cnot(j1, particle.qubit(j))?;
    }
    arith.record_single_qubit(1);
    arith.record_cnot(x.j_list.len() as u64 - 1);
    Ok(())
}

/// Inverse of [`prepare_superposition`].
pub fn unprepare_superposition(
    state: &mut SparseState,
    particle: Register,
    x: &EncodedInput,
    arith: &mut Arith,
) -> Result<()> {
    let j1 = particle.qubit(x.j1);
    for &j in x.j_list[1..].iter().rev() {
        state.apply_cnot(j1, particle.qubit(j))?;
    }
    state.apply_h(j1)?;
    arith.record_single_qubit(1);
    arith.record_cnot(x.j_list.len() as u64 - 1);
    Ok(())
}

/// CNOT from each qubit of `h` onto the matching qubit of `t`.
pub fn entangle_pair(
    state: &mut SparseState,
    h: Register,
    t: Register,
    arith: &mut Arith,
) -> Result<()> {
    if h.width != t.width {
        return Err(Error::WidthMismatch {
            expected: h.width,
            actual: t.width,
        });
    }
    for i in 0..h.width {
        state.apply_cnot(h.qubit(i), t.qubit(i))?;
    }
    arith.record_cnot(h.width as u64);
    Ok(())
}

/// CNOT with `t` controlling `h`, then measure `h`. Returns the measured
/// value; the test passes iff it is 0.
pub fn honesty_test<R: Rng + ?Sized>(
    state: &mut SparseState,
    h: Register,
    t: Register,
    arith: &mut Arith,
    rng: &mut R,
) -> Result<BasisState> {
    for i in 0..h.width {
        state.apply_cnot(t.qubit(i), h.qubit(i))?;
    }
    arith.record_cnot(h.width as u64);
    state.measure_bits(h, rng)
}

/// Undoes the preparation on `t` and measures the seed qubit:
/// (|0⟩ + |X⟩)/√2 → +, (|0⟩ − |X⟩)/√2 → −.
pub fn distinguish<R: Rng + ?Sized>(
    state: &mut SparseState,
    t: Register,
    x: &EncodedInput,
    arith: &mut Arith,
    rng: &mut R,
) -> Result<Sign> {
    unprepare_superposition(state, t, x, arith)?;
    let one = state.measure_qubit(t.qubit(x.j1), rng)?;
    Ok(if one { Sign::Minus } else { Sign::Plus })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbortReason {
    DishonestBob,
    InconsistentResults,
    EavesdropperDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolOutcome {
    Intersect,
    Disjoint,
    Abort(AbortReason),
}

impl ProtocolOutcome {
    pub fn is_abort(&self) -> bool {
        matches!(self, ProtocolOutcome::Abort(_))
    }

    pub fn from_sign(sign: Sign) -> Self {
        match sign {
            Sign::Minus => ProtocolOutcome::Intersect,
            Sign::Plus => ProtocolOutcome::Disjoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Prepare,
    Entangle,
    Send,
    Intercept,
    Oracle,
    Return,
    HonestyTest,
    Distinguish,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub pair: usize,
    pub terms: usize,
    pub width: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Quantum { particle: String, qubits: usize },
    Classical { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub from: Party,
    pub to: Party,
    pub payload: Payload,
}

/// Measured h registers, as hexadecimal values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HonestyRecord {
    pub h1: Option<String>,
    pub h2: Option<String>,
}

impl HonestyRecord {
    pub fn passed(&self) -> bool {
        self.h1.as_deref() == Some("0x0") && self.h2.as_deref() == Some("0x0")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SignRecord {
    pub t1: Option<Sign>,
    pub t2: Option<Sign>,
}

/// Full record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub params: ProblemParams,
    pub alice: Circle,
    pub bob: Circle,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<AttackStrategy>,
    pub stages: Vec<StageRecord>,
    pub messages: Vec<Message>,
    pub honesty: HonestyRecord,
    pub signs: SignRecord,
    pub outcome: ProtocolOutcome,
    pub cost: CostReport,
    /// Largest term count seen in either pair state.
    pub max_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attacker: Option<AttackerRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoys: Option<DecoyRecord>,
}

impl Transcript {
    pub fn quantum_messages(&self, from: Party) -> impl Iterator<Item = (&str, usize)> {
        self.messages.iter().filter_map(move |m| match &m.payload {
            Payload::Quantum { particle, qubits } if m.from == from => {
                Some((particle.as_str(), *qubits))
            }
            _ => None,
        })
    }
}

/// Builder for one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    alice: Circle,
    bob: Circle,
    params: ProblemParams,
    seed: u64,
    adversary: Option<AttackStrategy>,
    trace: bool,
    cost_model: CostModel,
}

impl ProtocolRun {
    pub fn new(alice: Circle, bob: Circle, params: ProblemParams) -> Self {
        Self {
            alice,
            bob,
            params,
            seed: 0,
            adversary: None,
            trace: false,
            cost_model: CostModel::default(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn adversary(mut self, strategy: Option<AttackStrategy>) -> Self {
        self.adversary = strategy;
        self
    }

    /// Record a state dump at every stage.
    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn cost_model(mut self, model: CostModel) -> Self {
        self.cost_model = model;
        self
    }

    pub fn run(&self) -> Result<(Transcript, ProtocolOutcome)> {
        Session::new(self)?.run()
    }
}

/// Runs the protocol once. With `adversary = None` both parties are honest.
pub fn run_protocol(
    alice: &Circle,
    bob: &Circle,
    params: &ProblemParams,
    seed: u64,
    adversary: Option<&AttackStrategy>,
) -> Result<(Transcript, ProtocolOutcome)> {
    ProtocolRun::new(*alice, *bob, *params)
        .seed(seed)
        .adversary(adversary.copied())
        .run()
}

struct Session<'a> {
    cfg: &'a ProtocolRun,
    layout: PairLayout,
    inputs: [EncodedInput; 2],
    pairs: [SparseState; 2],
    arith: Arith,
    rng: ChaCha20Rng,
    stages: Vec<StageRecord>,
    messages: Vec<Message>,
    honesty: HonestyRecord,
    signs: SignRecord,
    attacker: Option<AttackerRecord>,
    decoys: Option<DecoyRecord>,
}

impl<'a> Session<'a> {
    fn new(cfg: &'a ProtocolRun) -> Result<Self> {
        let p = &cfg.params;
        cfg.bob.validate(p)?;
        let first = encode_input(&cfg.alice, p)?;
        let second = match cfg.adversary {
            Some(AttackStrategy::AliceMultiInput { second }) => encode_input(&second, p)?,
            Some(AttackStrategy::AliceSuperposed) => {
                return Err(Error::Unsupported(
                    "the superposed-input attack runs outside the two-pair protocol".into(),
                ))
            }
            _ => first.clone(),
        };
        let layout = PairLayout::new(p);
        let zero = SparseState::zero(layout.width());
        Ok(Self {
            cfg,
            layout,
            inputs: [first, second],
            pairs: [zero.clone(), zero],
            arith: Arith::new(p.n())?,
            rng: ChaCha20Rng::seed_from_u64(cfg.seed),
            stages: Vec::new(),
            messages: Vec::new(),
            honesty: HonestyRecord::default(),
            signs: SignRecord::default(),
            attacker: None,
            decoys: None,
        })
    }

    fn log(&mut self, stage: Stage) {
        for (i, s) in self.pairs.iter().enumerate() {
            self.stages.push(StageRecord {
                stage,
                pair: i + 1,
                terms: s.len(),
                width: s.width(),
                dump: self.cfg.trace.then(|| s.dump()),
            });
        }
    }

    fn send(&mut self, from: Party, to: Party, payload: Payload) {
        self.messages.push(Message { from, to, payload });
    }

    fn send_particles(&mut self, from: Party, to: Party) {
        let extra = self.decoys.as_ref().map_or([0, 0], |d| d.per_particle());
        for (i, decoys) in extra.into_iter().enumerate() {
            self.send(
                from,
                to,
                Payload::Quantum {
                    particle: format!("t{}", i + 1),
                    qubits: self.layout.t.width + if from == Party::Alice { decoys } else { 0 },
                },
            );
        }
    }

    fn run(mut self) -> Result<(Transcript, ProtocolOutcome)> {
        let outcome = self.exchange()?;
        if !outcome.is_abort() {
            let verdict = match outcome {
                ProtocolOutcome::Intersect => "intersect",
                _ => "disjoint",
            };
            self.send(
                Party::Alice,
                Party::Bob,
                Payload::Classical {
                    text: verdict.into(),
                },
            );
        }
        let max_terms = self.pairs.iter().map(|s| s.peak_terms()).max().unwrap_or(0);
        let cfg = self.cfg;
        let transcript = Transcript {
            params: cfg.params,
            alice: cfg.alice,
            bob: cfg.bob,
            seed: cfg.seed,
            strategy: cfg.adversary,
            stages: self.stages,
            messages: self.messages,
            honesty: self.honesty,
            signs: self.signs,
            outcome,
            cost: cost_report(&self.arith.tally(), &cfg.params, &cfg.cost_model),
            max_terms,
            attacker: self.attacker,
            decoys: self.decoys,
        };
        Ok((transcript, outcome))
    }

    fn exchange(&mut self) -> Result<ProtocolOutcome> {
        let PairLayout { h, t } = self.layout;
        let strategy = self.cfg.adversary;

        // Preparation
        for i in 0..2 {
            prepare_superposition(&mut self.pairs[i], h, &self.inputs[i], &mut self.arith)?;
        }
        self.log(Stage::Prepare);
        for i in 0..2 {
            entangle_pair(&mut self.pairs[i], h, t, &mut self.arith)?;
        }
        self.log(Stage::Entangle);
        let oracle = OracleOperator::build(&self.cfg.bob, self.cfg.params)?;

        // Operation
        if let Some(AttackStrategy::EveInterceptForward { decoys, .. }) = strategy {
            self.decoys = Some(DecoyRecord::prepare(decoys, self.layout.t.width, &mut self.rng)?);
        }
        self.send_particles(Party::Alice, Party::Bob);
        self.log(Stage::Send);

        if let Some(s) = strategy {
            let rec = adversary::intercept_forward(
                &s,
                &mut self.pairs,
                &self.layout,
                &self.cfg.params,
                self.decoys.as_mut(),
                &mut self.rng,
            )?;
            if rec.is_some() {
                self.attacker = rec;
                self.log(Stage::Intercept);
            }
        }
        if let Some(d) = self.decoys.as_mut() {
            if !d.verify(&mut self.rng)? {
                return Ok(ProtocolOutcome::Abort(AbortReason::EavesdropperDetected));
            }
        }

        let inp = InputRegisters::within(t, self.cfg.params.n())?;
        for pair in self.pairs.iter_mut() {
            oracle.apply(pair, &inp, &mut self.arith)?;
        }
        self.log(Stage::Oracle);
        self.send_particles(Party::Bob, Party::Alice);
        self.log(Stage::Return);

        let h1 = honesty_test(&mut self.pairs[0], h, t, &mut self.arith, &mut self.rng)?;
        let h2 = honesty_test(&mut self.pairs[1], h, t, &mut self.arith, &mut self.rng)?;
        self.honesty = HonestyRecord {
            h1: Some(h1.to_hex()),
            h2: Some(h2.to_hex()),
        };
        self.log(Stage::HonestyTest);
        if !self.honesty.passed() {
            return Ok(ProtocolOutcome::Abort(AbortReason::DishonestBob));
        }

        // Output
        let s1 = distinguish(&mut self.pairs[0], t, &self.inputs[0], &mut self.arith, &mut self.rng)?;
        let s2 = distinguish(&mut self.pairs[1], t, &self.inputs[1], &mut self.arith, &mut self.rng)?;
        self.signs = SignRecord {
            t1: Some(s1),
            t2: Some(s2),
        };
        self.log(Stage::Distinguish);
        if let (Some(s), Some(rec)) = (strategy, self.attacker.as_mut()) {
            adversary::after_distinguish(
                &s,
                &mut self.pairs,
                &self.layout,
                &self.cfg.params,
                rec,
                &mut self.rng,
            )?;
        }

        let skip_consistency = matches!(strategy, Some(AttackStrategy::AliceMultiInput { .. }));
        if !skip_consistency && s1 != s2 {
            return Ok(ProtocolOutcome::Abort(AbortReason::InconsistentResults));
        }
        Ok(ProtocolOutcome::from_sign(s1))
    }
}
