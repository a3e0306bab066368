use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::basis::mask;
use super::layout::{check_disjoint, Register};
use crate::error::{Error, Result};

/// Register widths up to this total are checked for bijectivity exhaustively.
pub const EXHAUSTIVE_BIJECTION_LIMIT: usize = 12;

pub type ValueMap = dyn Fn(&mut [u128]) + Send + Sync;

/// A classical reversible map on the values of one or more registers.
///
/// The closure receives the register values in the order of `registers`
/// and rewrites them in place.
#[derive(Clone)]
pub struct Permutation {
    registers: Vec<Register>,
    map: Arc<ValueMap>,
    label: String,
}

impl Permutation {
    pub fn new(
        label: impl Into<String>,
        registers: Vec<Register>,
        map: impl Fn(&mut [u128]) + Send + Sync + 'static,
    ) -> Result<Self> {
        check_disjoint(&registers)?;
        if let Some(r) = registers.iter().find(|r| r.width > 128) {
            return Err(Error::RegisterTooWide(r.width));
        }
        Ok(Self {
            registers,
            map: Arc::new(map),
            label: label.into(),
        })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn total_width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    /// Applies the map to one tuple of values, rejecting out-of-range output.
    pub fn map_values(&self, values: &mut [u128]) -> Result<()> {
        (self.map)(values);
        for (v, r) in values.iter().zip(&self.registers) {
            if *v & !mask(r.width) != 0 {
                return Err(Error::NotBijective(format!(
                    "`{}` produced {v} outside a {}-qubit register",
                    self.label, r.width
                )));
            }
        }
        Ok(())
    }

    /// Enumerates every input tuple and checks the outputs are distinct.
    /// Only meaningful (and only called) for small total widths.
    pub fn check_exhaustive(&self) -> Result<()> {
        let k = self.total_width();
        debug_assert!(k <= EXHAUSTIVE_BIJECTION_LIMIT);
        let mut seen = vec![false; 1usize << k];
        let mut vals = vec![0u128; self.registers.len()];
        for packed in 0u64..(1u64 << k) {
            let mut shift = 0;
            for (v, r) in vals.iter_mut().zip(&self.registers) {
                *v = ((packed >> shift) as u128) & mask(r.width);
                shift += r.width;
            }
            self.map_values(&mut vals)?;
            let mut out = 0u64;
            let mut shift = 0;
            for (v, r) in vals.iter().zip(&self.registers) {
                out |= (*v as u64) << shift;
                shift += r.width;
            }
            if std::mem::replace(&mut seen[out as usize], true) {
                return Err(Error::NotBijective(format!(
                    "`{}` maps two inputs to {out}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Permutation")
            .field("label", &self.label)
            .field("registers", &self.registers)
            .finish()
    }
}

/// The gate set shared by the sparse and dense backends.
#[derive(Debug, Clone)]
pub enum Gate {
    X(usize),
    Z(usize),
    H(usize),
    Cnot { control: usize, target: usize },
    Permute(Permutation),
}

impl Gate {
    /// Qubits the gate acts on (controls of a `Cnot` included).
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::Z(q) | Gate::H(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Permute(p) => p.registers().iter().flat_map(|r| r.qubits()).collect(),
        }
    }

    pub(crate) fn validate(&self, width: usize) -> Result<()> {
        if let Gate::Cnot { control, target } = self {
            if control == target {
                return Err(Error::SameControlTarget(*control));
            }
        }
        if let Some(q) = self.qubits().into_iter().find(|&q| q >= width) {
            return Err(Error::QubitOutOfRange { qubit: q, width });
        }
        if let Gate::Permute(p) = self {
            if p.total_width() <= EXHAUSTIVE_BIJECTION_LIMIT {
                p.check_exhaustive()?;
            }
        }
        Ok(())
    }
}

pub(crate) fn check_controls(
    controls: &[(usize, bool)],
    gate: &Gate,
    width: usize,
) -> Result<()> {
    if let Some(&(q, _)) = controls.iter().find(|(q, _)| *q >= width) {
        return Err(Error::QubitOutOfRange { qubit: q, width });
    }
    let targets: HashSet<usize> = gate.qubits().into_iter().collect();
    if controls.iter().any(|(q, _)| targets.contains(q)) {
        return Err(Error::ControlOverlap);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_check_catches_collision() {
        let p = Permutation::new("halve", vec![Register::new(0, 3)], |v| v[0] /= 2).unwrap();
        assert!(matches!(p.check_exhaustive(), Err(Error::NotBijective(_))));
        let ok = Permutation::new("inc", vec![Register::new(0, 3)], |v| v[0] = (v[0] + 1) & 7)
            .unwrap();
        ok.check_exhaustive().unwrap();
    }

    #[test]
    fn out_of_range_output_rejected() {
        let p = Permutation::new("inc", vec![Register::new(0, 3)], |v| v[0] += 1).unwrap();
        assert!(p.check_exhaustive().is_err());
    }

    #[test]
    fn overlapping_registers_rejected() {
        let r = Permutation::new("x", vec![Register::new(0, 3), Register::new(2, 3)], |_| {});
        assert!(matches!(r, Err(Error::RegisterOverlap)));
    }
}
