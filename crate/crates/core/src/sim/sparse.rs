use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::mem;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::basis::{mask, BasisState};
use super::gate::{check_controls, Gate, Permutation};
use super::layout::{Register, RegisterLayout};
use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Amplitudes below this magnitude are dropped after interfering gates.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Outcome of a measurement in the {|+⟩, |−⟩} basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A state stored as its nonzero computational-basis amplitudes.
///
/// Terms are kept in a `BTreeMap` so iteration (and hence seeded sampling)
/// follows basis order on every platform.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    width: usize,
    terms: BTreeMap<BasisState, Amplitude>,
    peak_terms: usize,
}

impl SparseState {
    /// |0…0⟩ on `width` qubits.
    pub fn zero(width: usize) -> Self {
        Self::basis(width, BasisState::zero(width))
    }

    pub fn basis(width: usize, key: BasisState) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(key, Amplitude::new(1.0, 0.0));
        Self {
            width,
            terms,
            peak_terms: 1,
        }
    }

    /// Basis state with the named registers of `layout` set to the given values.
    pub fn new(layout: &RegisterLayout, init: &[(&str, u128)]) -> Result<Self> {
        let mut key = BasisState::zero(layout.width());
        for &(name, value) in init {
            let reg = layout.get(name)?;
            if value & !mask(reg.width) != 0 || reg.width > 128 {
                return Err(Error::ValueOverflow {
                    register: name.to_string(),
                    value,
                    width: reg.width,
                });
            }
            key.set(reg, value);
        }
        Ok(Self::basis(layout.width(), key))
    }

    /// Builds a state from explicit terms. Amplitudes are taken as given
    /// (no normalization), near-zero ones are pruned.
    pub fn from_terms(
        width: usize,
        terms: impl IntoIterator<Item = (BasisState, Amplitude)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (mut k, a) in terms {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::InvalidParams("non-finite amplitude".into()));
            }
            if !k.fits(width) {
                return Err(Error::WidthMismatch {
                    expected: width,
                    actual: width + 1,
                });
            }
            k.resize(width);
            *map.entry(k).or_insert(Amplitude::new(0.0, 0.0)) += a;
        }
        let mut s = Self {
            width,
            terms: map,
            peak_terms: 0,
        };
        s.prune();
        s.touch();
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest term count this state has held since creation.
    pub fn peak_terms(&self) -> usize {
        self.peak_terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisState, &Amplitude)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, key: &BasisState) -> Amplitude {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    fn touch(&mut self) {
        self.peak_terms = self.peak_terms.max(self.terms.len());
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.width {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                width: self.width,
            });
        }
        Ok(())
    }

    fn check_register(&self, reg: Register) -> Result<()> {
        if reg.width > 128 {
            return Err(Error::RegisterTooWide(reg.width));
        }
        if reg.width == 0 {
            return Ok(());
        }
        self.check_qubit(reg.top())
    }

    /// Rebuilds the key set through `f`; `f` must be injective on keys.
    fn relabel(&mut self, mut f: impl FnMut(&mut BasisState)) {
        let old = mem::take(&mut self.terms);
        self.terms = old
            .into_iter()
            .map(|(mut k, a)| {
                f(&mut k);
                (k, a)
            })
            .collect();
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        self.relabel(|k| k.flip(qubit));
        Ok(())
    }

    pub fn apply_z(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        for (k, a) in self.terms.iter_mut() {
            if k.bit(qubit) {
                *a = -*a;
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let old = mem::take(&mut self.terms);
        for (k, a) in old {
            let one = k.bit(qubit);
            let mut k0 = k.clone();
            k0.set_bit(qubit, false);
            let mut k1 = k;
            k1.set_bit(qubit, true);
            *self.terms.entry(k0).or_default() += a * s;
            *self.terms.entry(k1).or_default() += if one { -a * s } else { a * s };
        }
        self.touch();
        self.prune();
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::SameControlTarget(control));
        }
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        self.relabel(|k| {
            if k.bit(control) {
                k.flip(target)
            }
        });
        Ok(())
    }

    /// Remaps the values held in `perm`'s registers, term by term.
    ///
    /// Small maps are verified exhaustively before use; wider ones are
    /// checked for range and for output collisions on the touched terms.
    /// On error the state is left unchanged.
    pub fn apply_permutation(&mut self, perm: &Permutation) -> Result<()> {
        Gate::Permute(perm.clone()).validate(self.width)?;
        self.permute_unchecked(perm)
    }

    fn permute_unchecked(&mut self, perm: &Permutation) -> Result<()> {
        let regs = perm.registers();
        let mut vals = vec![0u128; regs.len()];
        let mut out = BTreeMap::new();
        for (k, a) in &self.terms {
            for (v, r) in vals.iter_mut().zip(regs) {
                *v = k.get(*r);
            }
            perm.map_values(&mut vals)?;
            let mut nk = k.clone();
            for (v, r) in vals.iter().zip(regs) {
                nk.set(*r, *v);
            }
            if out.insert(nk, *a).is_some() {
                return Err(Error::NotBijective(format!(
                    "`{}` collided on a touched term",
                    perm.label()
                )));
            }
        }
        self.terms = out;
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::X(q) => self.apply_x(*q),
            Gate::Z(q) => self.apply_z(*q),
            Gate::H(q) => self.apply_h(*q),
            Gate::Cnot { control, target } => self.apply_cnot(*control, *target),
            Gate::Permute(p) => self.apply_permutation(p),
        }
    }

    /// Applies `gate` only to the terms whose control qubits hold the
    /// required bits. The rest pass through untouched.
    pub fn apply_controlled(&mut self, controls: &[(usize, bool)], gate: &Gate) -> Result<()> {
        check_controls(controls, gate, self.width)?;
        gate.validate(self.width)?;
        if controls.is_empty() {
            return self.apply_unchecked(gate);
        }
        let (active, idle): (BTreeMap<_, _>, BTreeMap<_, _>) = mem::take(&mut self.terms)
            .into_iter()
            .partition(|(k, _)| controls.iter().all(|&(q, b)| k.bit(q) == b));
        let mut sub = SparseState {
            width: self.width,
            terms: active,
            peak_terms: 0,
        };
        let res = sub.apply_unchecked(gate);
        match res {
            Ok(()) => {
                // Control bits differ between the two halves, so keys cannot collide.
                let idle_len = idle.len();
                self.terms = idle;
                self.peak_terms = self.peak_terms.max(sub.peak_terms + idle_len);
                self.terms.extend(sub.terms);
                self.touch();
                Ok(())
            }
            Err(e) => {
                // The gate failed before mutating `sub`; put both halves back.
                self.terms = idle;
                self.terms.extend(sub.terms);
                Err(e)
            }
        }
    }

    fn apply_unchecked(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Permute(p) => self.permute_unchecked(p),
            g => self.apply(g),
        }
    }

    /// Flips every qubit of `reg` whose classical bit is set, i.e. XORs `value` in.
    pub fn xor_register(&mut self, reg: Register, value: u128) -> Result<()> {
        self.check_register(reg)?;
        self.relabel(|k| {
            let v = k.get(reg);
            k.set(reg, v ^ value)
        });
        Ok(())
    }

    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<bool> {
        self.check_qubit(qubit)?;
        let v = self.measure_register(Register::new(qubit, 1), rng)?;
        Ok(v == 1)
    }

    /// Born-rule measurement of `reg`; collapses and renormalizes.
    pub fn measure_register<R: Rng + ?Sized>(
        &mut self,
        reg: Register,
        rng: &mut R,
    ) -> Result<u128> {
        self.check_register(reg)?;
        Ok(self.measure_bits(reg, rng)?.get(Register::new(0, reg.width)))
    }

    /// Like [`measure_register`](Self::measure_register) but for registers of
    /// any width; returns the outcome as a `reg.width`-qubit label.
    pub fn measure_bits<R: Rng + ?Sized>(
        &mut self,
        reg: Register,
        rng: &mut R,
    ) -> Result<BasisState> {
        if reg.width > 0 {
            self.check_qubit(reg.top())?;
        }
        let total = self.norm_sqr();
        let draw = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = None;
        for (k, a) in &self.terms {
            acc += a.norm_sqr();
            if draw < acc {
                outcome = Some(k.extract(reg));
                break;
            }
        }
        // Rounding can leave `draw` a hair above the last partial sum.
        let value = match outcome {
            Some(v) => v,
            None => self
                .terms
                .keys()
                .next_back()
                .map(|k| k.extract(reg))
                .ok_or_else(|| Error::InvalidParams("measuring an empty state".into()))?,
        };
        self.terms.retain(|k, _| k.extract(reg) == value);
        let norm = self.norm_sqr().sqrt();
        for a in self.terms.values_mut() {
            *a /= norm;
        }
        Ok(value)
    }

    /// Measures `qubit` in the {|+⟩, |−⟩} basis: H, computational
    /// measurement, H back onto the collapsed state.
    pub fn measure_pm<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<Sign> {
        self.apply_h(qubit)?;
        let one = self.measure_qubit(qubit, rng)?;
        self.apply_h(qubit)?;
        Ok(if one { Sign::Minus } else { Sign::Plus })
    }

    /// True when every term has `reg` all zeros; no width limit.
    pub fn is_zero_on(&self, reg: Register) -> bool {
        self.terms.keys().all(|k| k.extract(reg).is_zero())
    }

    /// Value of `reg` if every term agrees on it.
    pub fn definite_value(&self, reg: Register) -> Option<u128> {
        let mut it = self.terms.keys().map(|k| k.get(reg));
        let first = it.next()?;
        it.all(|v| v == first).then_some(first)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &SparseState) -> Result<f64> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: other.width,
            });
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let inner: Amplitude = small
            .terms
            .iter()
            .filter_map(|(k, a)| large.terms.get(k).map(|b| a.conj() * b))
            .sum();
        Ok(inner.norm_sqr())
    }

    /// Appends `extra` qubits in |0⟩ above the current ones; returns them as a register.
    pub fn extend(&mut self, extra: usize) -> Register {
        let reg = Register::new(self.width, extra);
        self.width += extra;
        let w = self.width;
        self.relabel(|k| k.resize(w));
        reg
    }

    /// Drops every qubit at or above `width`. All of them must be |0⟩ in every term.
    pub fn truncate(&mut self, width: usize) -> Result<()> {
        if width > self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: width,
            });
        }
        if !self.terms.keys().all(|k| k.fits(width)) {
            return Err(Error::NotDefinite);
        }
        self.width = width;
        self.relabel(|k| k.resize(width));
        Ok(())
    }

    /// One line per term: `bitstring re im`, most significant qubit first.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, a) in &self.terms {
            let _ = writeln!(s, "{} {:.6} {:.6}", k.to_bitstring(self.width), a.re, a.im);
        }
        s
    }
}
