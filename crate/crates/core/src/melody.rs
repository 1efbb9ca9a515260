use crate::error::{Error, Result};
use crate::pitch::PitchClass;
use crate::scheme::Scheme;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finite sequence of pitch classes. Note that melody positions are
/// 1-based throughout, following the realization rule `y_ti = x_(t-t_i) + p_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Melody {
    notes: Vec<PitchClass>,
}

impl Melody {
    pub fn new(notes: Vec<PitchClass>) -> Self {
        Melody { notes }
    }

    pub fn from_values(values: &[i64]) -> Self {
        Melody {
            notes: values.iter().map(|&v| PitchClass::new(v)).collect(),
        }
    }

    /// Parses either digits (`0,2,4` or `0 2 4`) or note letters (`B D F`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut notes = Vec::new();
        for token in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let note = if let Ok(v) = token.parse::<i64>() {
                PitchClass::new(v)
            } else if token.len() == 1 {
                PitchClass::from_letter(token.chars().next().unwrap())
                    .ok_or_else(|| Error::Melody(format!("unknown note {token:?}")))?
            } else {
                return Err(Error::Melody(format!("unknown note {token:?}")));
            };
            notes.push(note);
        }
        Ok(Melody { notes })
    }

    pub fn notes(&self) -> &[PitchClass] {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// 1-based access matching the definition above.
    pub fn note(&self, index: i64) -> Option<PitchClass> {
        if index >= 1 && index <= self.notes.len() as i64 {
            Some(self.notes[(index - 1) as usize])
        } else {
            None
        }
    }
}

impl fmt::Display for Melody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.notes.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", n)?;
        }
        Ok(())
    }
}

/// The sparse table of sounding tones for a melody under a scheme.
#[derive(Clone, Debug)]
pub struct Realization {
    scheme: Scheme,
    melody: Melody,
}

impl Realization {
    pub fn new(scheme: Scheme, melody: Melody) -> Self {
        Realization { scheme, melody }
    }

    /// The tone of voice `i` at time `t`, defined exactly when
    /// `1 <= t - t_i <= n`.
    pub fn note(&self, t: i64, voice: usize) -> Option<PitchClass> {
        let v = self.scheme.voices()[voice];
        self.melody.note(t - v.t).map(|x| x + v.p())
    }

    /// The half-open range of times at which at least one voice sounds.
    pub fn time_range(&self) -> std::ops::Range<i64> {
        if self.melody.is_empty() {
            return 0..0;
        }
        let n = self.melody.len() as i64;
        let t_min = self.scheme.voices()[0].t;
        let t_max = self.scheme.voices().last().unwrap().t;
        (t_min + 1)..(t_max + n + 1)
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn melody(&self) -> &Melody {
        &self.melody
    }
}

/// Evaluates `y_ti = x_(t-t_i) + p_i` over the full index set.
pub fn realize(scheme: &Scheme, melody: &Melody) -> Realization {
    Realization::new(scheme.clone(), melody.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    SecondOrSeventh,
    FourthAboveBass,
}

/// A rule breach at time `t` between voices `i` and `j` (indices into the
/// scheme's sorted voice list).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub t: i64,
    pub i: usize,
    pub j: usize,
    pub kind: ViolationKind,
}

/// Checks every simultaneity of the realization against the two rules:
/// no harmonic seconds/sevenths, no fourths above the bass. An empty
/// result means the melody is a valid canon.
pub fn validate(scheme: &Scheme, melody: &Melody) -> Vec<Violation> {
    let r = realize(scheme, melody);
    let mut violations = Vec::new();
    let voices = scheme.voices();
    for t in r.time_range() {
        for i in 0..voices.len() {
            let Some(yi) = r.note(t, i) else { continue };
            for j in (i + 1)..voices.len() {
                let Some(yj) = r.note(t, j) else { continue };
                let diff = (yi - yj).value();
                if diff == 1 || diff == 6 {
                    violations.push(Violation {
                        t,
                        i,
                        j,
                        kind: ViolationKind::SecondOrSeventh,
                    });
                }
                if voices[j].is_bass && diff == 3 {
                    violations.push(Violation {
                        t,
                        i,
                        j,
                        kind: ViolationKind::FourthAboveBass,
                    });
                }
                if voices[i].is_bass && diff == 4 {
                    violations.push(Violation {
                        t,
                        i: j,
                        j: i,
                        kind: ViolationKind::FourthAboveBass,
                    });
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scheme {
        text.parse().unwrap()
    }

    fn m(values: &[i64]) -> Melody {
        Melody::from_values(values)
    }

    #[test]
    fn realization_follows_the_displacements() {
        let r = realize(&s("{(0,0),(1,0)}"), &m(&[0, 2, 4]));
        assert_eq!(r.note(2, 0), Some(PitchClass::new(2)));
        assert_eq!(r.note(2, 1), Some(PitchClass::new(0)));
        assert_eq!(r.note(1, 1), None);
        assert_eq!(r.time_range(), 1..5);
    }

    #[test]
    fn empty_melody_realizes_to_nothing() {
        let r = realize(&s("{(0,0),(1,0)}"), &m(&[]));
        assert_eq!(r.time_range(), 0..0);
    }

    #[test]
    fn sparse_overlap() {
        let r = realize(&s("{(0,0),(3,4)}"), &m(&[5]));
        assert_eq!(r.note(4, 1), Some(PitchClass::new(2)));
        assert_eq!(r.note(4, 0), None);
        assert_eq!(r.note(1, 0), Some(PitchClass::new(5)));
    }

    #[test]
    fn flags_second() {
        let v = validate(&s("{(0,0),(1,0)}"), &m(&[0, 1]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].t, 2);
        assert_eq!(v[0].kind, ViolationKind::SecondOrSeventh);
    }

    #[test]
    fn flags_fourth_above_bass() {
        // the new note 3 sounds a fourth above the bass note 0 sung earlier
        let v = validate(&s("{(0,0),(1,0)B}"), &m(&[0, 3]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::FourthAboveBass);
        // same pair with the bass leading: the old note 0 is a fourth above
        // the new bass note 4
        let v = validate(&s("{(0,0)B,(1,0)}"), &m(&[0, 4]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::FourthAboveBass);
        // the rule is directional: a fifth above the bass is fine, and
        // without the bass marking both intervals are fine
        assert!(validate(&s("{(0,0),(1,0)B}"), &m(&[0, 4])).is_empty());
        assert!(validate(&s("{(0,0),(1,0)}"), &m(&[0, 3])).is_empty());
        assert!(validate(&s("{(0,0),(1,0)}"), &m(&[0, 4])).is_empty());
    }

    #[test]
    fn thirds_fifths_sixths_octaves_above_bass_are_valid() {
        // each new note is a third, fifth, sixth, then octave above the
        // already determined bass note
        let v = validate(&s("{(0,0),(1,0)B}"), &m(&[0, 2, 6, 4, 4]));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn melody_parsing_accepts_digits_and_letters() {
        assert_eq!(Melody::parse("0,2,4").unwrap(), m(&[0, 2, 4]));
        assert_eq!(Melody::parse("B D F").unwrap(), m(&[0, 2, 4]));
        assert!(Melody::parse("0,x").is_err());
    }
}
