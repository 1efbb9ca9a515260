use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A diatonic pitch class: a residue mod 7, with 0=B, 1=C, ..., 6=A.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PitchClass(u8);

pub const MODULUS: i64 = 7;

const LETTERS: [char; 7] = ['B', 'C', 'D', 'E', 'F', 'G', 'A'];

impl PitchClass {
    pub fn new(value: i64) -> Self {
        PitchClass(value.rem_euclid(MODULUS) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl DoubleEndedIterator<Item = PitchClass> {
        (0..MODULUS).map(PitchClass::new)
    }

    pub fn letter(self) -> char {
        LETTERS[self.0 as usize]
    }

    pub fn from_letter(c: char) -> Option<Self> {
        LETTERS
            .iter()
            .position(|&l| l == c.to_ascii_uppercase())
            .map(|i| PitchClass(i as u8))
    }
}

impl Add for PitchClass {
    type Output = PitchClass;
    fn add(self, rhs: PitchClass) -> PitchClass {
        PitchClass::new(self.0 as i64 + rhs.0 as i64)
    }
}

impl Sub for PitchClass {
    type Output = PitchClass;
    fn sub(self, rhs: PitchClass) -> PitchClass {
        PitchClass::new(self.0 as i64 - rhs.0 as i64)
    }
}

impl Neg for PitchClass {
    type Output = PitchClass;
    fn neg(self) -> PitchClass {
        PitchClass::new(-(self.0 as i64))
    }
}

impl fmt::Debug for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_wraps_mod_7() {
        assert_eq!(PitchClass::new(-8), PitchClass::new(6));
        assert_eq!(PitchClass::new(5) + PitchClass::new(4), PitchClass::new(2));
        assert_eq!(PitchClass::new(0) - PitchClass::new(1), PitchClass::new(6));
        assert_eq!(-PitchClass::new(3), PitchClass::new(4));
    }

    #[test]
    fn letters_follow_b_to_a() {
        assert_eq!(PitchClass::new(0).letter(), 'B');
        assert_eq!(PitchClass::new(6).letter(), 'A');
        assert_eq!(PitchClass::from_letter('c'), Some(PitchClass::new(1)));
        assert_eq!(PitchClass::from_letter('H'), None);
    }
}
