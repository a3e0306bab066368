use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::layout::Register;

const WORD: usize = 64;

/// A computational-basis label: one bit per qubit, qubit 0 least significant.
///
/// Keys carry no width of their own; the owning state fixes it. Ordering is
/// numeric (most significant word first), which is the same as lexicographic
/// order of the bitstring printed most-significant-qubit first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BasisState {
    words: SmallVec<[u64; 4]>,
}

pub(crate) fn words_for(width: usize) -> usize {
    width.div_ceil(WORD).max(1)
}

pub(crate) fn mask(width: usize) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl BasisState {
    pub fn zero(width: usize) -> Self {
        Self {
            words: SmallVec::from_elem(0, words_for(width)),
        }
    }

    #[inline]
    pub fn bit(&self, qubit: usize) -> bool {
        self.words
            .get(qubit / WORD)
            .is_some_and(|w| (w >> (qubit % WORD)) & 1 == 1)
    }

    #[inline]
    pub fn flip(&mut self, qubit: usize) {
        self.words[qubit / WORD] ^= 1 << (qubit % WORD);
    }

    #[inline]
    pub fn set_bit(&mut self, qubit: usize, value: bool) {
        if self.bit(qubit) != value {
            self.flip(qubit);
        }
    }

    /// Reads `reg` as an unsigned integer (bit `reg.offset` is the LSB).
    pub fn get(&self, reg: Register) -> u128 {
        debug_assert!(reg.width <= 128, "register wider than 128 qubits");
        let mut out = 0u128;
        let mut done = 0;
        while done < reg.width {
            let q = reg.offset + done;
            let word = self.words.get(q / WORD).copied().unwrap_or(0);
            let shift = q % WORD;
            let take = (WORD - shift).min(reg.width - done);
            let chunk = (word >> shift) as u128 & mask(take);
            out |= chunk << done;
            done += take;
        }
        out
    }

    /// Writes the low `reg.width` bits of `value` into `reg`.
    pub fn set(&mut self, reg: Register, value: u128) {
        let mut done = 0;
        while done < reg.width {
            let q = reg.offset + done;
            let shift = q % WORD;
            let take = (WORD - shift).min(reg.width - done);
            let m = (mask(take) as u64) << shift;
            let chunk = ((value >> done) as u64) << shift;
            let w = &mut self.words[q / WORD];
            *w = (*w & !m) | (chunk & m);
            done += take;
        }
    }

    pub(crate) fn resize(&mut self, width: usize) {
        self.words.resize(words_for(width), 0);
    }

    /// True when every bit at or above `width` is clear.
    pub(crate) fn fits(&self, width: usize) -> bool {
        let full = width / WORD;
        let rem = width % WORD;
        self.words.iter().enumerate().all(|(i, &w)| {
            if i < full {
                true
            } else if i == full {
                rem == 0 && w == 0 || rem != 0 && w >> rem == 0
            } else {
                w == 0
            }
        })
    }

    /// Copies `reg` into a fresh label of width `reg.width`; no width limit.
    pub fn extract(&self, reg: Register) -> BasisState {
        let mut out = BasisState::zero(reg.width);
        let mut done = 0;
        while done < reg.width {
            let take = (reg.width - done).min(WORD);
            let v = self.get(reg.slice(done, take));
            out.set(Register::new(done, take), v);
            done += take;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Hexadecimal value with a `0x` prefix.
    pub fn to_hex(&self) -> String {
        let mut digits: String = self.words.iter().rev().map(|w| format!("{w:016x}")).collect();
        let trimmed = digits.trim_start_matches('0').len();
        digits.drain(..digits.len() - trimmed.max(1));
        format!("0x{digits}")
    }

    /// Bitstring, most significant qubit first.
    pub fn to_bitstring(&self, width: usize) -> String {
        (0..width)
            .rev()
            .map(|q| if self.bit(q) { '1' } else { '0' })
            .collect()
    }
}

impl Ord for BasisState {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.words.len().max(other.words.len());
        for i in (0..n).rev() {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for BasisState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasisState(")?;
        for w in self.words.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_set_across_word_boundary() {
        let mut b = BasisState::zero(200);
        let reg = Register::new(60, 70);
        let v = (1u128 << 69) | 0xdead_beef_1234;
        b.set(reg, v);
        assert_eq!(b.get(reg), v);
        assert!(b.bit(60 + 69));
        assert!(!b.bit(59));
        b.set(reg, 0);
        assert_eq!(b, BasisState::zero(200));
    }

    #[test]
    fn full_128_bit_register() {
        let mut b = BasisState::zero(130);
        let reg = Register::new(1, 128);
        b.set(reg, u128::MAX);
        assert_eq!(b.get(reg), u128::MAX);
        assert!(!b.bit(0));
        assert!(!b.bit(129));
    }

    #[test]
    fn ordering_is_numeric() {
        let mut a = BasisState::zero(70);
        let mut b = BasisState::zero(70);
        a.set(Register::new(0, 64), u64::MAX as u128);
        b.flip(64);
        assert!(a < b);
        assert_eq!(b.to_bitstring(66), format!("01{}", "0".repeat(64)));
        assert_eq!(b.to_hex(), "0x10000000000000000");
        assert_eq!(BasisState::zero(200).to_hex(), "0x0");
        let wide = b.extract(Register::new(60, 10));
        assert_eq!(wide.get(Register::new(0, 10)), 0b10000);
        assert!(!wide.is_zero());
    }

    #[test]
    fn fits_detects_high_bits() {
        let mut a = BasisState::zero(70);
        assert!(a.fits(64));
        a.flip(65);
        assert!(!a.fits(64));
        assert!(a.fits(66));
        assert!(!a.fits(65));
    }
}
