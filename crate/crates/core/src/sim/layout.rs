use serde::Serialize;

use crate::error::{Error, Result};

/// A contiguous run of qubits read as an unsigned integer, LSB at `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Register {
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub const fn new(offset: usize, width: usize) -> Self {
        Self { offset, width }
    }

    /// Qubit index of bit `i` of this register.
    #[inline]
    pub fn qubit(&self, i: usize) -> usize {
        debug_assert!(i < self.width);
        self.offset + i
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.offset..self.offset + self.width
    }

    /// Highest (sign) qubit.
    pub fn top(&self) -> usize {
        self.offset + self.width - 1
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    pub fn overlaps(&self, other: &Register) -> bool {
        self.offset < other.end() && other.offset < self.end()
    }

    /// Sub-register of `width` qubits starting `offset` qubits into `self`.
    pub fn slice(&self, offset: usize, width: usize) -> Register {
        debug_assert!(offset + width <= self.width);
        Register::new(self.offset + offset, width)
    }
}

pub(crate) fn check_disjoint(regs: &[Register]) -> Result<()> {
    for (i, a) in regs.iter().enumerate() {
        for b in &regs[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::RegisterOverlap);
            }
        }
    }
    Ok(())
}

/// Named registers packed back to back from qubit 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    registers: Vec<(String, Register)>,
    width: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a register above the current ones.
    pub fn push(&mut self, name: &str, width: usize) -> Result<Register> {
        if self.registers.iter().any(|(n, _)| n == name) {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        let reg = Register::new(self.width, width);
        self.registers.push((name.to_string(), reg));
        self.width += width;
        Ok(reg)
    }

    pub fn with(mut self, name: &str, width: usize) -> Result<Self> {
        self.push(name, width)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Result<Register> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| *r)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Register)> {
        self.registers.iter().map(|(n, r)| (n.as_str(), *r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_packs_contiguously() {
        let layout = RegisterLayout::new()
            .with("h", 5)
            .unwrap()
            .with("t", 5)
            .unwrap()
            .with("a", 1)
            .unwrap();
        assert_eq!(layout.width(), 11);
        assert_eq!(layout.get("t").unwrap(), Register::new(5, 5));
        assert_eq!(layout.get("a").unwrap().top(), 10);
        let covered: usize = layout.iter().map(|(_, r)| r.width).sum();
        assert_eq!(covered, layout.width());
        assert!(matches!(layout.get("e"), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = RegisterLayout::new().with("a", 1).unwrap().with("a", 2);
        assert!(matches!(err, Err(Error::DuplicateRegister(_))));
    }

    #[test]
    fn overlap() {
        let a = Register::new(0, 4);
        assert!(a.overlaps(&Register::new(3, 2)));
        assert!(!a.overlaps(&Register::new(4, 2)));
        assert!(check_disjoint(&[a, Register::new(4, 4)]).is_ok());
        assert!(check_disjoint(&[a, Register::new(2, 4)]).is_err());
    }
}
