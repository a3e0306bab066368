//! Full state-vector backend used as an independent reference for the
//! sparse simulator on small registers. Gates are applied through their
//! literal matrix action on integer basis indices.

use num_complex::Complex64;

use super::basis::BasisState;
use super::gate::{check_controls, Gate, Permutation};
use super::layout::Register;
use super::sparse::SparseState;
use crate::error::{Error, Result};

pub const DENSE_MAX_QUBITS: usize = 12;

const PAULI_X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
const PAULI_Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
const HADAMARD: [[f64; 2]; 2] = [
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
];
/// Rows/columns indexed by `2 * control + target`.
const CNOT: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
];

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    width: usize,
    amps: Vec<Complex64>,
}

fn read(index: usize, reg: Register) -> u128 {
    ((index >> reg.offset) & ((1usize << reg.width) - 1)) as u128
}

fn write(index: usize, reg: Register, value: u128) -> usize {
    let m = ((1usize << reg.width) - 1) << reg.offset;
    (index & !m) | (((value as usize) << reg.offset) & m)
}

impl DenseState {
    pub fn zero(width: usize) -> Result<Self> {
        if width > DENSE_MAX_QUBITS {
            return Err(Error::DenseTooLarge {
                width,
                max: DENSE_MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::default(); 1 << width];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { width, amps })
    }

    pub fn from_sparse(s: &SparseState) -> Result<Self> {
        let mut d = Self::zero(s.width())?;
        d.amps[0] = Complex64::default();
        let all = Register::new(0, s.width());
        for (k, a) in s.iter() {
            d.amps[k.get(all) as usize] = *a;
        }
        Ok(d)
    }

    pub fn to_sparse(&self) -> Result<SparseState> {
        let all = Register::new(0, self.width);
        SparseState::from_terms(
            self.width,
            self.amps.iter().enumerate().map(|(i, a)| {
                let mut k = BasisState::zero(self.width);
                k.set(all, i as u128);
                (k, *a)
            }),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Largest per-index amplitude difference against a sparse state.
    pub fn max_abs_diff(&self, s: &SparseState) -> Result<f64> {
        if s.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: s.width(),
            });
        }
        let other = Self::from_sparse(s)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.apply_controlled(&[], gate)
    }

    pub fn apply_controlled(&mut self, controls: &[(usize, bool)], gate: &Gate) -> Result<()> {
        check_controls(controls, gate, self.width)?;
        gate.validate(self.width)?;
        let active = |i: usize| controls.iter().all(|&(q, b)| ((i >> q) & 1 == 1) == b);
        match gate {
            Gate::X(q) => self.single(*q, &PAULI_X, active),
            Gate::Z(q) => self.single(*q, &PAULI_Z, active),
            Gate::H(q) => self.single(*q, &HADAMARD, active),
            Gate::Cnot { control, target } => self.two(*control, *target, &CNOT, active),
            Gate::Permute(p) => self.permute(p, active)?,
        }
        Ok(())
    }

    fn single(&mut self, q: usize, m: &[[f64; 2]; 2], active: impl Fn(usize) -> bool) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 || !active(i) {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = a0 * m[0][0] + a1 * m[0][1];
            self.amps[i | bit] = a0 * m[1][0] + a1 * m[1][1];
        }
    }

    fn two(&mut self, c: usize, t: usize, m: &[[f64; 4]; 4], active: impl Fn(usize) -> bool) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for base in 0..self.amps.len() {
            if base & (cb | tb) != 0 || !active(base) {
                continue;
            }
            let idx = [base, base | tb, base | cb, base | cb | tb];
            let v: Vec<Complex64> = idx.iter().map(|&i| self.amps[i]).collect();
            for (row, &out) in idx.iter().enumerate() {
                self.amps[out] = (0..4).map(|col| v[col] * m[row][col]).sum();
            }
        }
    }

    fn permute(&mut self, p: &Permutation, active: impl Fn(usize) -> bool) -> Result<()> {
        let regs = p.registers();
        let mut out = vec![Complex64::default(); self.amps.len()];
        let mut hit = vec![false; self.amps.len()];
        let mut vals = vec![0u128; regs.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = if active(i) {
                for (v, r) in vals.iter_mut().zip(regs) {
                    *v = read(i, *r);
                }
                p.map_values(&mut vals)?;
                regs.iter().zip(&vals).fold(i, |acc, (r, v)| write(acc, *r, *v))
            } else {
                i
            };
            if std::mem::replace(&mut hit[j], true) {
                return Err(Error::NotBijective(format!("`{}` on dense index {j}", p.label())));
            }
            out[j] = *a;
        }
        self.amps = out;
        Ok(())
    }
}
