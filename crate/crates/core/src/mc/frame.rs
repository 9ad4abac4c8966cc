use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest number of pair slots a frame can hold.
pub const MAX_SLOTS: u32 = 64;

/// Single-slot Pauli label, sign-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(x, z)` components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Pauli error on `n` pair slots as two bit masks; bit `i` is slot `i`.
///
/// Slots `0..m` are the measured ones, `m..n` the outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliFrame {
    n: u32,
    x: u64,
    z: u64,
}

#[inline]
pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl PauliFrame {
    pub fn identity(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_SLOTS {
            return domain(format!("frame size {n} outside 1..={MAX_SLOTS}"));
        }
        Ok(Self { n, x: 0, z: 0 })
    }

    /// Build from masks; bits above `n` must be clear.
    pub fn from_masks(n: u32, x: u64, z: u64) -> Result<Self> {
        let id = Self::identity(n)?;
        let outside = !low_mask(n);
        if (x | z) & outside != 0 {
            return domain(format!("mask bits set beyond slot {n}"));
        }
        Ok(Self { x, z, ..id })
    }

    pub(crate) fn from_masks_unchecked(n: u32, x: u64, z: u64) -> Self {
        Self { n, x, z }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, slot: u32) -> Pauli {
        Pauli::from_bits((self.x >> slot) & 1 == 1, (self.z >> slot) & 1 == 1)
    }

    pub fn set(&mut self, slot: u32, p: Pauli) {
        let (x, z) = p.bits();
        let bit = 1u64 << slot;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Product up to phase.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n as usize,
                actual: other.n as usize,
            });
        }
        Ok(Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        })
    }

    /// Symplectic product: `true` when the two strings anticommute.
    pub fn anticommutes(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1 == 1
    }

    /// Syndrome of a passive measurement of the first `m` slots: one bit per
    /// slot carrying an X or Y component.
    pub fn syndrome(&self, m: u32) -> u64 {
        self.x & low_mask(m)
    }

    /// Identity on slots `m..n`.
    pub fn outputs_clean(&self, m: u32) -> bool {
        (self.x | self.z) & !low_mask(m) == 0
    }
}

impl fmt::Display for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for slot in 0..self.n {
            write!(f, "{}", self.get(slot).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliFrame {
    type Err = Error;

    /// Parses strings like `"XIZ"`; the first character is slot 0.
    fn from_str(s: &str) -> Result<Self> {
        let mut frame = Self::identity(s.chars().count() as u32)?;
        for (slot, c) in s.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return domain(format!("unknown Pauli symbol {other:?}")),
            };
            frame.set(slot as u32, p);
        }
        Ok(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliFrame = "XIYZ".parse().unwrap();
        assert_eq!(p.x_mask(), 0b0101);
        assert_eq!(p.z_mask(), 0b1100);
        assert_eq!(p.weight(), 3);
        assert_eq!(p.to_string(), "XIYZ");
        assert!("XQ".parse::<PauliFrame>().is_err());
        assert!(PauliFrame::identity(65).is_err());
        assert!(PauliFrame::from_masks(2, 0b100, 0).is_err());
    }

    #[test]
    fn commutation() {
        let x: PauliFrame = "XI".parse().unwrap();
        let z: PauliFrame = "ZI".parse().unwrap();
        let zz: PauliFrame = "ZZ".parse().unwrap();
        let xx: PauliFrame = "XX".parse().unwrap();
        assert!(x.anticommutes(&z));
        assert!(!xx.anticommutes(&zz));
        assert_eq!(x.mul(&z).unwrap().to_string(), "YI");
    }

    #[test]
    fn syndrome_reads_x_components_of_measured_slots() {
        let p: PauliFrame = "ZYIX".parse().unwrap();
        assert_eq!(p.syndrome(2), 0b10);
        assert_eq!(p.syndrome(1), 0);
        assert!(!p.outputs_clean(2));
        assert!(p.outputs_clean(4));
        let q = PauliFrame::from_masks(64, u64::MAX, 0).unwrap();
        assert_eq!(q.syndrome(64), u64::MAX);
        assert!(q.outputs_clean(64));
    }
}
