//! Reversible modular arithmetic on n-bit registers.
//!
//! Every operation runs as an exact basis permutation on the sparse state.
//! Gate-level adder constructions are not synthesized; their cost is
//! accounted for by [`CostModel`] instead.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ProblemParams;
use crate::sim::{mask, BasisState, Gate, Permutation, Register, SparseState};

/// Register width for all modular arithmetic, `2 <= n <= 128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModWidth(usize);

impl ModWidth {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=128).contains(&n) {
            return Err(Error::InvalidParams(format!(
                "register width {n} outside [2, 128]"
            )));
        }
        Ok(Self(n))
    }

    pub fn bits(self) -> usize {
        self.0
    }

    pub fn mask(self) -> u128 {
        mask(self.0)
    }

    /// Two's-complement encoding of `v` in n bits.
    pub fn encode(self, v: i128) -> u128 {
        (v as u128) & self.mask()
    }

    /// Signed reading of an n-bit pattern.
    pub fn decode(self, v: u128) -> i128 {
        let v = v & self.mask();
        if self.0 < 128 && v >> (self.0 - 1) & 1 == 1 {
            v as i128 - (1i128 << self.0)
        } else {
            v as i128
        }
    }

    pub fn neg(self, v: u128) -> u128 {
        v.wrapping_neg() & self.mask()
    }
}

/// Conversion constants from operation counts to elementary units.
///
/// An adder run on n bits costs `adder_unit * n`; a multiplier run costs
/// `multiplier_adders * n` adder runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub adder_unit: u64,
    pub multiplier_adders: u64,
    pub single_qubit: u64,
    pub cnot: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            adder_unit: 1,
            multiplier_adders: 1,
            single_qubit: 1,
            cnot: 1,
        }
    }
}

/// Operation counters. Counts only ever increase within a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTally {
    pub adder_runs: u64,
    pub multiplier_runs: u64,
    pub single_qubit_gates: u64,
    pub cnot_gates: u64,
}

impl CostTally {
    pub fn elementary_total(&self, n: usize, model: &CostModel) -> u64 {
        let n = n as u64;
        let adder = model.adder_unit * n;
        self.adder_runs * adder
            + self.multiplier_runs * model.multiplier_adders * n * adder
            + self.single_qubit_gates * model.single_qubit
            + self.cnot_gates * model.cnot
    }
}

impl AddAssign for CostTally {
    fn add_assign(&mut self, o: Self) {
        self.adder_runs += o.adder_runs;
        self.multiplier_runs += o.multiplier_runs;
        self.single_qubit_gates += o.single_qubit_gates;
        self.cnot_gates += o.cnot_gates;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub t: usize,
    pub n: usize,
    pub adder_runs: u64,
    pub multiplier_runs: u64,
    pub single_qubit_gates: u64,
    pub cnot_gates: u64,
    pub elementary_total: u64,
}

pub fn cost_report(tally: &CostTally, params: &ProblemParams, model: &CostModel) -> CostReport {
    CostReport {
        t: params.t(),
        n: params.n(),
        adder_runs: tally.adder_runs,
        multiplier_runs: tally.multiplier_runs,
        single_qubit_gates: tally.single_qubit_gates,
        cnot_gates: tally.cnot_gates,
        elementary_total: tally.elementary_total(params.n(), model),
    }
}

/// One reversible arithmetic step. All arithmetic is mod 2ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    /// |y⟩ → |y + c⟩
    AddConst { reg: Register, c: u128 },
    /// |x⟩|y⟩ → |x⟩|y ± x⟩
    AddReg {
        src: Register,
        dst: Register,
        subtract: bool,
    },
    /// |y⟩|c⟩ → |y⟩|c + k·y⟩
    MulConstAccum {
        y: Register,
        acc: Register,
        k: u128,
    },
    /// |x⟩|y⟩|c⟩ → |x⟩|y⟩|c ± x·y⟩
    MulRegAccum {
        x: Register,
        y: Register,
        acc: Register,
        subtract: bool,
    },
    /// |y⟩ → |−y⟩
    Negate { reg: Register },
    /// |x⟩|d⟩ → |x⟩|d ⊕ x⟩
    CopyReg { src: Register, dst: Register },
    /// |y⟩ → (−1)^{y_{n−1}} |y⟩
    SignPhaseFlip { reg: Register },
}

/// c + Σ_i y_i · 2^i·x, one controlled add per bit of `y`.
fn ladder(acc: u128, x: u128, y: u128, n: usize, m: u128, subtract: bool) -> u128 {
    let mut c = acc;
    for i in 0..n {
        if (y >> i) & 1 == 1 {
            let term = x.wrapping_shl(i as u32) & m;
            c = if subtract {
                c.wrapping_sub(term)
            } else {
                c.wrapping_add(term)
            } & m;
        }
    }
    c
}

impl ArithOp {
    pub fn registers(&self) -> Vec<Register> {
        match *self {
            ArithOp::AddConst { reg, .. }
            | ArithOp::Negate { reg }
            | ArithOp::SignPhaseFlip { reg } => vec![reg],
            ArithOp::AddReg { src, dst, .. } | ArithOp::CopyReg { src, dst } => vec![src, dst],
            ArithOp::MulConstAccum { y, acc, .. } => vec![y, acc],
            ArithOp::MulRegAccum { x, y, acc, .. } => vec![x, y, acc],
        }
    }

    fn label(&self) -> &'static str {
        match self {
            ArithOp::AddConst { .. } => "add_const",
            ArithOp::AddReg { subtract: false, .. } => "add_reg",
            ArithOp::AddReg { subtract: true, .. } => "sub_reg",
            ArithOp::MulConstAccum { .. } => "mul_const_accum",
            ArithOp::MulRegAccum { subtract: false, .. } => "mul_reg_accum",
            ArithOp::MulRegAccum { subtract: true, .. } => "mul_reg_unaccum",
            ArithOp::Negate { .. } => "negate",
            ArithOp::CopyReg { .. } => "copy_reg",
            ArithOp::SignPhaseFlip { .. } => "sign_phase_flip",
        }
    }

    pub fn inverse(&self, n: ModWidth) -> ArithOp {
        match *self {
            ArithOp::AddConst { reg, c } => ArithOp::AddConst { reg, c: n.neg(c) },
            ArithOp::AddReg { src, dst, subtract } => ArithOp::AddReg {
                src,
                dst,
                subtract: !subtract,
            },
            ArithOp::MulConstAccum { y, acc, k } => ArithOp::MulConstAccum { y, acc, k: n.neg(k) },
            ArithOp::MulRegAccum { x, y, acc, subtract } => ArithOp::MulRegAccum {
                x,
                y,
                acc,
                subtract: !subtract,
            },
            op @ (ArithOp::Negate { .. }
            | ArithOp::CopyReg { .. }
            | ArithOp::SignPhaseFlip { .. }) => op,
        }
    }

    /// The classical map on register values (same order as [`registers`]).
    /// `SignPhaseFlip` leaves values alone.
    ///
    /// [`registers`]: ArithOp::registers
    pub fn map_values(&self, n: ModWidth, v: &mut [u128]) {
        let m = n.mask();
        let bits = n.bits();
        match *self {
            ArithOp::AddConst { c, .. } => v[0] = v[0].wrapping_add(c) & m,
            ArithOp::AddReg { subtract, .. } => {
                v[1] = if subtract {
                    v[1].wrapping_sub(v[0])
                } else {
                    v[1].wrapping_add(v[0])
                } & m
            }
            ArithOp::MulConstAccum { k, .. } => v[1] = ladder(v[1], k, v[0], bits, m, false),
            ArithOp::MulRegAccum { subtract, .. } => {
                v[2] = ladder(v[2], v[0], v[1], bits, m, subtract)
            }
            ArithOp::Negate { .. } => v[0] = n.neg(v[0]),
            ArithOp::CopyReg { .. } => v[1] ^= v[0],
            ArithOp::SignPhaseFlip { .. } => {}
        }
    }

    fn check(&self, n: ModWidth) -> Result<()> {
        let regs = self.registers();
        if let Some(r) = regs.iter().find(|r| r.width != n.bits()) {
            return Err(Error::WidthMismatch {
                expected: n.bits(),
                actual: r.width,
            });
        }
        for (i, a) in regs.iter().enumerate() {
            if regs[i + 1..].iter().any(|b| a.overlaps(b)) {
                return Err(Error::RegisterOverlap);
            }
        }
        match *self {
            ArithOp::AddConst { c, .. } | ArithOp::MulConstAccum { k: c, .. } if c > n.mask() => {
                Err(Error::InvalidParams(format!(
                    "constant {c} does not fit {} bits",
                    n.bits()
                )))
            }
            _ => Ok(()),
        }
    }

    fn charge(&self, n: ModWidth, tally: &mut CostTally) {
        let bits = n.bits() as u64;
        match self {
            ArithOp::AddConst { .. } | ArithOp::AddReg { .. } => tally.adder_runs += 1,
            ArithOp::MulConstAccum { .. } | ArithOp::MulRegAccum { .. } => {
                tally.multiplier_runs += 1
            }
            ArithOp::Negate { .. } => {
                tally.single_qubit_gates += bits;
                tally.adder_runs += 1;
            }
            ArithOp::CopyReg { .. } => tally.cnot_gates += bits,
            ArithOp::SignPhaseFlip { .. } => tally.single_qubit_gates += 1,
        }
    }

    pub fn gate(&self, n: ModWidth) -> Result<Gate> {
        if let ArithOp::SignPhaseFlip { reg } = self {
            return Ok(Gate::Z(reg.top()));
        }
        let op = *self;
        Ok(Gate::Permute(Permutation::new(
            self.label(),
            self.registers(),
            move |v| op.map_values(n, v),
        )?))
    }

    /// Applies the op to a single basis label. Returns `true` when the
    /// label's amplitude picks up a −1.
    pub fn apply_basis(&self, n: ModWidth, key: &mut BasisState) -> bool {
        if let ArithOp::SignPhaseFlip { reg } = self {
            return key.bit(reg.top());
        }
        let regs = self.registers();
        let mut vals: Vec<u128> = regs.iter().map(|r| key.get(*r)).collect();
        self.map_values(n, &mut vals);
        for (r, v) in regs.iter().zip(vals) {
            key.set(*r, v);
        }
        false
    }
}

/// Runs [`ArithOp`]s against a state and tallies their cost.
#[derive(Debug, Clone)]
pub struct Arith {
    n: ModWidth,
    tally: CostTally,
    strict: bool,
}

impl Arith {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n: ModWidth::new(n)?,
            tally: CostTally::default(),
            strict: false,
        })
    }

    /// In strict mode `copy_reg` refuses a destination that is neither
    /// |0⟩ nor already equal to the source.
    pub fn strict(mut self, on: bool) -> Self {
        self.strict = on;
        self
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn width(&self) -> ModWidth {
        self.n
    }

    pub fn tally(&self) -> CostTally {
        self.tally
    }

    pub fn tally_mut(&mut self) -> &mut CostTally {
        &mut self.tally
    }

    pub fn apply(&mut self, state: &mut SparseState, op: &ArithOp) -> Result<()> {
        self.apply_controlled(state, &[], op)
    }

    pub fn apply_controlled(
        &mut self,
        state: &mut SparseState,
        controls: &[(usize, bool)],
        op: &ArithOp,
    ) -> Result<()> {
        op.check(self.n)?;
        if let (true, ArithOp::CopyReg { src, dst }) = (self.strict, op) {
            let misuse = state.iter().any(|(k, _)| {
                controls.iter().all(|&(q, b)| k.bit(q) == b) && {
                    let d = k.get(*dst);
                    d != 0 && d != k.get(*src)
                }
            });
            if misuse {
                return Err(Error::Strict("copy_reg onto a nonzero destination".into()));
            }
        }
        let gate = op.gate(self.n)?;
        state.apply_controlled(controls, &gate)?;
        op.charge(self.n, &mut self.tally);
        Ok(())
    }

    pub fn add_const(&mut self, s: &mut SparseState, reg: Register, c: u128) -> Result<()> {
        self.apply(s, &ArithOp::AddConst { reg, c })
    }

    pub fn add_reg(&mut self, s: &mut SparseState, src: Register, dst: Register) -> Result<()> {
        self.apply(
            s,
            &ArithOp::AddReg {
                src,
                dst,
                subtract: false,
            },
        )
    }

    pub fn mul_const_accum(
        &mut self,
        s: &mut SparseState,
        y: Register,
        acc: Register,
        k: u128,
    ) -> Result<()> {
        self.apply(s, &ArithOp::MulConstAccum { y, acc, k })
    }

    pub fn mul_reg_accum(
        &mut self,
        s: &mut SparseState,
        x: Register,
        y: Register,
        acc: Register,
    ) -> Result<()> {
        self.apply(
            s,
            &ArithOp::MulRegAccum {
                x,
                y,
                acc,
                subtract: false,
            },
        )
    }

    pub fn negate(&mut self, s: &mut SparseState, reg: Register) -> Result<()> {
        self.apply(s, &ArithOp::Negate { reg })
    }

    pub fn copy_reg(&mut self, s: &mut SparseState, src: Register, dst: Register) -> Result<()> {
        self.apply(s, &ArithOp::CopyReg { src, dst })
    }

    pub fn sign_phase_flip(&mut self, s: &mut SparseState, reg: Register) -> Result<()> {
        self.apply(s, &ArithOp::SignPhaseFlip { reg })
    }

    pub fn record_single_qubit(&mut self, count: u64) {
        self.tally.single_qubit_gates += count;
    }

    pub fn record_cnot(&mut self, count: u64) {
        self.tally.cnot_gates += count;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RegisterLayout;

    fn two_regs(n: usize) -> (RegisterLayout, Register, Register) {
        let l = RegisterLayout::new().with("x", n).unwrap().with("y", n).unwrap();
        let (x, y) = (l.get("x").unwrap(), l.get("y").unwrap());
        (l, x, y)
    }

    fn value(s: &SparseState, r: Register) -> u128 {
        s.definite_value(r).expect("definite")
    }

    #[test]
    fn add_const_examples() {
        let (l, _, y) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::new(&l, &[("y", 5)]).unwrap();
        a.add_const(&mut s, y, 3).unwrap();
        assert_eq!(value(&s, y), 8);
        let mut s = SparseState::new(&l, &[("y", 15)]).unwrap();
        a.add_const(&mut s, y, 1).unwrap();
        assert_eq!(value(&s, y), 0);
        let before = s.clone();
        a.add_const(&mut s, y, 0).unwrap();
        assert_eq!(s, before);
        assert!(a.add_const(&mut s, y, 16).is_err());
    }

    #[test]
    fn add_reg_examples() {
        let (l, x, y) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::new(&l, &[("x", 6), ("y", 7)]).unwrap();
        a.add_reg(&mut s, x, y).unwrap();
        assert_eq!((value(&s, x), value(&s, y)), (6, 13));
        let mut s = SparseState::new(&l, &[("y", 9)]).unwrap();
        a.add_reg(&mut s, x, y).unwrap();
        assert_eq!(value(&s, y), 9);
        assert!(matches!(
            a.add_reg(&mut s, x, Register::new(2, 4)),
            Err(Error::RegisterOverlap)
        ));
    }

    #[test]
    fn width_mismatch_rejected() {
        let (l, _, y) = two_regs(4);
        let mut a = Arith::new(5).unwrap();
        let mut s = SparseState::new(&l, &[]).unwrap();
        assert!(matches!(
            a.add_const(&mut s, y, 1),
            Err(Error::WidthMismatch { .. })
        ));
        assert!(a.negate(&mut s, y).is_err());
        assert!(a.sign_phase_flip(&mut s, y).is_err());
    }

    #[test]
    fn mul_const_accum_examples() {
        let (l, y, c) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::new(&l, &[("x", 3), ("y", 1)]).unwrap();
        a.mul_const_accum(&mut s, y, c, 5).unwrap();
        assert_eq!(value(&s, c), 0);
        let before = s.clone();
        a.mul_const_accum(&mut s, y, c, 0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn mul_reg_accum_examples() {
        let l = RegisterLayout::new()
            .with("x", 4)
            .unwrap()
            .with("y", 4)
            .unwrap()
            .with("c", 4)
            .unwrap();
        let (x, y, c) = (
            l.get("x").unwrap(),
            l.get("y").unwrap(),
            l.get("c").unwrap(),
        );
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::new(&l, &[("x", 3), ("y", 5)]).unwrap();
        a.mul_reg_accum(&mut s, x, y, c).unwrap();
        assert_eq!(value(&s, c), 15);
        let mut s = SparseState::new(&l, &[("x", 3), ("y", 5), ("c", 1)]).unwrap();
        a.mul_reg_accum(&mut s, x, y, c).unwrap();
        assert_eq!(value(&s, c), 0);
        let mut s = SparseState::new(&l, &[("x", 1), ("y", 11), ("c", 2)]).unwrap();
        a.mul_reg_accum(&mut s, x, y, c).unwrap();
        assert_eq!(value(&s, c), 13);
    }

    #[test]
    fn negate_examples() {
        let (l, x, _) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::new(&l, &[]).unwrap();
        a.negate(&mut s, x).unwrap();
        assert_eq!(value(&s, x), 0);
        let mut s = SparseState::new(&l, &[("x", 3)]).unwrap();
        a.negate(&mut s, x).unwrap();
        assert_eq!(value(&s, x), 13);
        a.negate(&mut s, x).unwrap();
        assert_eq!(value(&s, x), 3);
    }

    #[test]
    fn copy_reg_examples() {
        let (l, x, y) = two_regs(4);
        let mut a = Arith::new(4).unwrap().strict(true);
        let mut s = SparseState::new(&l, &[("x", 9)]).unwrap();
        a.copy_reg(&mut s, x, y).unwrap();
        assert_eq!(value(&s, y), 9);
        a.copy_reg(&mut s, x, y).unwrap();
        assert_eq!(value(&s, y), 0);

        let mut bad = SparseState::new(&l, &[("x", 9), ("y", 2)]).unwrap();
        assert!(matches!(
            a.copy_reg(&mut bad, x, y),
            Err(Error::Strict(_))
        ));
        let mut lax = Arith::new(4).unwrap();
        lax.copy_reg(&mut bad, x, y).unwrap();
        assert_eq!(value(&bad, y), 11);
    }

    #[test]
    fn copy_reg_on_superposition() {
        let (_, x, y) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        let mut s = SparseState::zero(8);
        s.apply_h(0).unwrap();
        s.apply_cnot(0, 3).unwrap(); // (|0⟩ + |9⟩)/√2 on x
        a.copy_reg(&mut s, x, y).unwrap();
        let keys: Vec<(u128, u128)> = s.iter().map(|(k, _)| (k.get(x), k.get(y))).collect();
        assert_eq!(keys, vec![(0, 0), (9, 9)]);
    }

    #[test]
    fn sign_phase_flip_examples() {
        let (l, x, _) = two_regs(4);
        let mut a = Arith::new(4).unwrap();
        for (stored, flipped) in [(15u128, true), (0, false), (7, false)] {
            let mut s = SparseState::new(&l, &[("x", stored)]).unwrap();
            a.sign_phase_flip(&mut s, x).unwrap();
            let amp = s.iter().next().unwrap().1.re;
            assert_eq!(amp < 0.0, flipped, "stored {stored}");
        }
    }

    #[test]
    fn inverse_undoes_each_op() {
        let n = ModWidth::new(5).unwrap();
        let (x, y, c) = (
            Register::new(0, 5),
            Register::new(5, 5),
            Register::new(10, 5),
        );
        let ops = [
            ArithOp::AddConst { reg: x, c: 7 },
            ArithOp::AddReg {
                src: x,
                dst: y,
                subtract: false,
            },
            ArithOp::MulConstAccum { y: x, acc: c, k: 13 },
            ArithOp::MulRegAccum {
                x,
                y,
                acc: c,
                subtract: false,
            },
            ArithOp::Negate { reg: y },
            ArithOp::CopyReg { src: x, dst: c },
        ];
        for op in ops {
            for seed in 0..200u128 {
                let mut key = BasisState::zero(15);
                key.set(Register::new(0, 15), (seed * 2654435761) & 0x7fff);
                let orig = key.clone();
                op.apply_basis(n, &mut key);
                op.inverse(n).apply_basis(n, &mut key);
                assert_eq!(key, orig, "{op:?}");
            }
        }
    }

    #[test]
    fn cost_units() {
        let params = ProblemParams::new(2).unwrap();
        let n = params.n();
        let l = RegisterLayout::new().with("x", n).unwrap().with("y", n).unwrap();
        let (x, y) = (l.get("x").unwrap(), l.get("y").unwrap());
        let model = CostModel::default();

        let mut a = Arith::new(n).unwrap();
        let mut s = SparseState::new(&l, &[]).unwrap();
        a.add_const(&mut s, x, 1).unwrap();
        assert_eq!(a.tally().elementary_total(n, &model), n as u64);

        let mut a = Arith::new(n).unwrap();
        a.mul_const_accum(&mut s, x, y, 3).unwrap();
        assert_eq!(a.tally().elementary_total(n, &model), (n * n) as u64);
        let rep = cost_report(&a.tally(), &params, &model);
        assert_eq!(rep.multiplier_runs, 1);
        assert_eq!(rep.elementary_total, 49);
    }

    #[test]
    fn mod_width_signed_round_trip() {
        let n = ModWidth::new(6).unwrap();
        for v in -32i128..32 {
            assert_eq!(n.decode(n.encode(v)), v);
        }
        assert!(ModWidth::new(1).is_err());
        assert!(ModWidth::new(129).is_err());
    }
}
