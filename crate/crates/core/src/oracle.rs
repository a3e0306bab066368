//! Bob's oracle U: |X⟩ → (−1)^{f(X)} |X⟩ with f(X) = [D − R < 0],
//! built from reversible modular arithmetic.
//!
//! Layout of the work registers appended while U runs:
//!
//! ```text
//! a (1) | e1 e2 e3 (n each) | g1 g2 g3 (n each)
//! ```
//!
//! The zero-test sets `a = 0` exactly on the all-zeros input so that branch
//! keeps phase +1. Everything else is controlled on `a = 1`:
//!
//! 1. copy x, y, r into e1, e2, e3
//! 2. r → −r
//! 3. g1 += x·e1, g2 += y·e2, g3 += (−r)·e3
//! 4. −r → r, uncopy e, then e1 += k1·x, e2 += k2·y, e3 += k3·r
//! 5. g1 += e1, g2 += e2, g3 += e3, g3 += g1, g3 += g2
//! 6. g3 += k4            (g3 now holds D − R mod 2ⁿ)
//! 7. Z on the top qubit of g3
//! 8. steps 6..1 inverted in reverse order

use serde::Serialize;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{intersects, oracle_coeffs, Circle, OracleCoeffs, ProblemParams};
use crate::qarith::{Arith, ArithOp, ModWidth};
use crate::sim::{BasisState, Gate, Register, SparseState};

/// The three n-bit fields x₁, y₁, r₁ of Alice's query register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InputRegisters {
    pub x: Register,
    pub y: Register,
    pub r: Register,
}

impl InputRegisters {
    /// Splits a 3n-qubit particle: r₁ in the low field, y₁ in the middle,
    /// x₁ in the most significant field.
    pub fn within(particle: Register, n: usize) -> Result<Self> {
        if particle.width != 3 * n {
            return Err(Error::WidthMismatch {
                expected: 3 * n,
                actual: particle.width,
            });
        }
        Ok(Self {
            r: particle.slice(0, n),
            y: particle.slice(n, n),
            x: particle.slice(2 * n, n),
        })
    }

    pub fn fields(&self) -> [Register; 3] {
        [self.x, self.y, self.r]
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.fields().into_iter().flat_map(|r| r.qubits())
    }
}

/// Bob's work registers while U is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleAncillas {
    pub a: usize,
    pub e: [Register; 3],
    pub g: [Register; 3],
}

impl OracleAncillas {
    pub fn width(n: usize) -> usize {
        6 * n + 1
    }

    /// Appends fresh work registers to `state`: a = |1⟩, e = g = |0⟩.
    pub fn attach(state: &mut SparseState, n: usize) -> Result<Self> {
        let block = state.extend(Self::width(n));
        let anc = Self::at(block.offset, n);
        state.apply_x(anc.a)?;
        Ok(anc)
    }

    fn at(base: usize, n: usize) -> Self {
        let reg = |i: usize| Register::new(base + 1 + i * n, n);
        Self {
            a: base,
            e: [reg(0), reg(1), reg(2)],
            g: [reg(3), reg(4), reg(5)],
        }
    }

    fn pristine(&self, key: &BasisState) -> bool {
        key.bit(self.a) && self.e.iter().chain(&self.g).all(|r| key.get(*r) == 0)
    }

    /// True when every term holds a = 1 and e = g = 0.
    pub fn restored(&self, state: &SparseState) -> bool {
        state.iter().all(|(k, _)| self.pristine(k))
    }

    /// Verifies the work registers are back to their initial values and
    /// removes them from `state`.
    pub fn detach(self, state: &mut SparseState) -> Result<()> {
        if !self.restored(state) {
            return Err(Error::AncillaNotRestored);
        }
        state.apply_x(self.a)?;
        state.truncate(self.a)
    }
}

/// Bob's compiled operator. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleOperator {
    params: ProblemParams,
    coeffs: OracleCoeffs,
}

impl OracleOperator {
    pub fn build(bob: &Circle, params: ProblemParams) -> Result<Self> {
        bob.validate(&params)?;
        Ok(Self {
            params,
            coeffs: oracle_coeffs(bob, params.n()),
        })
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    pub fn coeffs(&self) -> OracleCoeffs {
        self.coeffs
    }

    /// Steps 1–6: leaves D − R (mod 2ⁿ) in g3.
    fn compute(&self, inp: &InputRegisters, anc: &OracleAncillas) -> Vec<ArithOp> {
        let [e1, e2, e3] = anc.e;
        let [g1, g2, g3] = anc.g;
        let k = self.coeffs;
        let copy = |src, dst| ArithOp::CopyReg { src, dst };
        let add = |src, dst| ArithOp::AddReg {
            src,
            dst,
            subtract: false,
        };
        let sq = |x, y, acc| ArithOp::MulRegAccum {
            x,
            y,
            acc,
            subtract: false,
        };
        vec![
            copy(inp.x, e1),
            copy(inp.y, e2),
            copy(inp.r, e3),
            ArithOp::Negate { reg: inp.r },
            sq(inp.x, e1, g1),
            sq(inp.y, e2, g2),
            sq(inp.r, e3, g3),
            ArithOp::Negate { reg: inp.r },
            copy(inp.x, e1),
            copy(inp.y, e2),
            copy(inp.r, e3),
            ArithOp::MulConstAccum {
                y: inp.x,
                acc: e1,
                k: k.k1,
            },
            ArithOp::MulConstAccum {
                y: inp.y,
                acc: e2,
                k: k.k2,
            },
            ArithOp::MulConstAccum {
                y: inp.r,
                acc: e3,
                k: k.k3,
            },
            add(e1, g1),
            add(e2, g2),
            add(e3, g3),
            add(g1, g3),
            add(g2, g3),
            ArithOp::AddConst { reg: g3, c: k.k4 },
        ]
    }

    /// Full program for the `a`-controlled block: compute, phase, uncompute.
    fn program(&self, inp: &InputRegisters, anc: &OracleAncillas) -> Vec<ArithOp> {
        let n = ModWidth::new(self.params.n()).expect("n validated by ProblemParams");
        let forward = self.compute(inp, anc);
        let mut prog = forward.clone();
        prog.push(ArithOp::SignPhaseFlip { reg: anc.g[2] });
        prog.extend(forward.iter().rev().map(|op| op.inverse(n)));
        prog
    }

    fn check_input(&self, state: &SparseState, inp: &InputRegisters) -> Result<()> {
        let n = self.params.n();
        for r in inp.fields() {
            if r.width != n {
                return Err(Error::WidthMismatch {
                    expected: n,
                    actual: r.width,
                });
            }
            if r.end() > state.width() {
                return Err(Error::QubitOutOfRange {
                    qubit: r.top(),
                    width: state.width(),
                });
            }
        }
        Ok(())
    }

    /// Applies U to the query register `inp` of `state`, attaching Bob's
    /// work registers for the duration and verifying they come back clean.
    pub fn apply(&self, state: &mut SparseState, inp: &InputRegisters, arith: &mut Arith) -> Result<()> {
        self.check_input(state, inp)?;
        let anc = OracleAncillas::attach(state, self.params.n())?;
        self.apply_with_ancillas(state, inp, &anc, arith)?;
        anc.detach(state)
    }

    /// Applies U with caller-managed work registers. In strict mode the
    /// registers must start at a = 1, e = g = 0.
    pub fn apply_with_ancillas(
        &self,
        state: &mut SparseState,
        inp: &InputRegisters,
        anc: &OracleAncillas,
        arith: &mut Arith,
    ) -> Result<()> {
        self.check_input(state, inp)?;
        if arith.width().bits() != self.params.n() {
            return Err(Error::WidthMismatch {
                expected: self.params.n(),
                actual: arith.width().bits(),
            });
        }
        if arith.is_strict() && !anc.restored(state) {
            return Err(Error::Strict("oracle work registers not initialised".into()));
        }
        self.zero_test(state, inp, anc, arith)?;
        let controls = [(anc.a, true)];
        for op in self.program(inp, anc) {
            arith.apply_controlled(state, &controls, &op)?;
        }
        self.zero_test(state, inp, anc, arith)?;
        if !anc.restored(state) {
            return Err(Error::AncillaNotRestored);
        }
        Ok(())
    }

    /// Flip `a` when every input qubit is 0.
    fn zero_test(
        &self,
        state: &mut SparseState,
        inp: &InputRegisters,
        anc: &OracleAncillas,
        arith: &mut Arith,
    ) -> Result<()> {
        let controls: Vec<(usize, bool)> = inp.qubits().map(|q| (q, false)).collect();
        state.apply_controlled(&controls, &Gate::X(anc.a))?;
        // one multi-controlled flip, tallied as 3n elementary units
        arith.record_cnot(controls.len() as u64);
        Ok(())
    }

    /// Runs U on a single basis input (x, y, r are raw n-bit register
    /// contents) and reports whether it picks up a −1. Uses the same op
    /// program as [`apply`](Self::apply), evaluated classically.
    pub fn phase_of(&self, x: u128, y: u128, r: u128) -> Result<bool> {
        self.classical()?.phase_of(x, y, r)
    }

    /// The op program prepared for repeated classical evaluation.
    pub fn classical(&self) -> Result<ClassicalOracle> {
        let n = self.params.n();
        let inp = InputRegisters::within(Register::new(0, 3 * n), n)?;
        let anc = OracleAncillas::at(3 * n, n);
        let program = self
            .program(&inp, &anc)
            .into_iter()
            .map(|op| {
                let regs = op.registers();
                (op, regs)
            })
            .collect();
        Ok(ClassicalOracle {
            n: ModWidth::new(n)?,
            inp,
            anc,
            program,
        })
    }
}

/// Bob's op program evaluated on basis labels, one input at a time.
#[derive(Debug, Clone)]
pub struct ClassicalOracle {
    n: ModWidth,
    inp: InputRegisters,
    anc: OracleAncillas,
    program: Vec<(ArithOp, Vec<Register>)>,
}

impl ClassicalOracle {
    pub fn n(&self) -> usize {
        self.n.bits()
    }

    pub fn phase_of(&self, x: u128, y: u128, r: u128) -> Result<bool> {
        let n = self.n.bits();
        let (inp, anc) = (&self.inp, &self.anc);
        let mut key = BasisState::zero(3 * n + OracleAncillas::width(n));
        for (reg, v) in inp.fields().into_iter().zip([x, y, r]) {
            if v > self.n.mask() {
                return Err(Error::InvalidParams(format!("{v} does not fit {n} bits")));
            }
            key.set(reg, v);
        }
        key.set_bit(anc.a, true);
        let start = key.clone();

        let is_zero = |k: &BasisState| inp.fields().iter().all(|r| k.get(*r) == 0);
        if is_zero(&key) {
            key.flip(anc.a);
        }
        let mut flipped = false;
        if key.bit(anc.a) {
            let mut vals: SmallVec<[u128; 3]> = SmallVec::new();
            for (op, regs) in &self.program {
                if let ArithOp::SignPhaseFlip { reg } = op {
                    flipped ^= key.bit(reg.top());
                    continue;
                }
                vals.clear();
                vals.extend(regs.iter().map(|r| key.get(*r)));
                op.map_values(self.n, &mut vals);
                for (r, v) in regs.iter().zip(&vals) {
                    key.set(*r, *v);
                }
            }
        }
        if is_zero(&key) {
            key.flip(anc.a);
        }
        if key != start {
            return Err(Error::AncillaNotRestored);
        }
        Ok(flipped)
    }
}

/// Classical reference for the oracle's phase bit: 1 iff D − R < 0.
pub fn f_predicate(alice: &Circle, bob: &Circle) -> bool {
    intersects(alice, bob)
}
