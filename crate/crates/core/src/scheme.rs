use crate::error::{Error, Result};
use crate::pitch::PitchClass;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One voice of a canon: enters `t` beats after the written timing and
/// `p_raw` diatonic steps above the written pitch. Only `p_raw mod 7`
/// affects validity; the raw value is kept for display.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Voice {
    pub t: i64,
    pub p_raw: i64,
    pub is_bass: bool,
}

impl Voice {
    pub fn new(t: i64, p_raw: i64, is_bass: bool) -> Self {
        Voice { t, p_raw, is_bass }
    }

    pub fn p(&self) -> PitchClass {
        PitchClass::new(self.p_raw)
    }
}

/// A canonic scheme: voices with pairwise-distinct time displacements,
/// sorted ascending by `t`, at most one marked bass.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scheme {
    voices: Vec<Voice>,
}

/// One of the five flexibility-preserving transformations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    TimeTranslate(i64),
    PitchTranspose(PitchClass),
    Shear(PitchClass),
    Invert,
    TimeDilate { numerator: i64, denominator: i64 },
}

impl Scheme {
    pub fn new(mut voices: Vec<Voice>) -> Result<Self> {
        if voices.is_empty() {
            return Err(Error::EmptyScheme);
        }
        voices.sort_by_key(|v| v.t);
        for pair in voices.windows(2) {
            if pair[0].t == pair[1].t {
                return Err(Error::DuplicateTime(pair[0].t));
            }
        }
        if voices.iter().filter(|v| v.is_bass).count() > 1 {
            return Err(Error::MultipleBass);
        }
        Ok(Scheme { voices })
    }

    pub fn voices(&self) -> &[Voice] {
        &self.voices
    }

    pub fn bass_index(&self) -> Option<usize> {
        self.voices.iter().position(|v| v.is_bass)
    }

    /// Total time displacement `max t_i - min t_i`.
    pub fn span(&self) -> i64 {
        self.voices.last().unwrap().t - self.voices[0].t
    }

    pub fn transform(&self, tr: Transform) -> Result<Scheme> {
        let voices = match tr {
            Transform::TimeTranslate(a) => self
                .voices
                .iter()
                .map(|v| Voice::new(v.t + a, v.p_raw, v.is_bass))
                .collect(),
            Transform::PitchTranspose(b) => self
                .voices
                .iter()
                .map(|v| Voice::new(v.t, v.p_raw + b.value() as i64, v.is_bass))
                .collect(),
            Transform::Shear(c) => self
                .voices
                .iter()
                .map(|v| Voice::new(v.t, v.p_raw + c.value() as i64 * v.t, v.is_bass))
                .collect(),
            Transform::Invert => self
                .voices
                .iter()
                .map(|v| {
                    let p = v.p().value() as i64;
                    let p_new = if v.is_bass { 5 - p } else { -p };
                    Voice::new(v.t, PitchClass::new(p_new).value() as i64, v.is_bass)
                })
                .collect(),
            Transform::TimeDilate {
                numerator,
                denominator,
            } => {
                let mut out = Vec::with_capacity(self.voices.len());
                for v in &self.voices {
                    let scaled = v.t * numerator;
                    if scaled % denominator != 0 {
                        return Err(Error::NonIntegralDilation {
                            num: numerator,
                            den: denominator,
                            t: v.t,
                        });
                    }
                    out.push(Voice::new(scaled / denominator, v.p_raw, v.is_bass));
                }
                out
            }
        };
        Scheme::new(voices)
    }

    /// The unique representative of this scheme's equivalence class under
    /// the group generated by the five transformations, together with one
    /// transform chain that reaches it.
    ///
    /// Reduction: translate `t_1 = 0`, divide times by their gcd, translate
    /// `p_1 = 0`; then minimize the encoding (times, pitch residues, bass
    /// position counted from the last voice) over retrograde on/off,
    /// inversion on/off, and the seven shear constants. On a gcd-reduced
    /// scheme the only integral dilations are by `±1`, so this sweep covers
    /// the whole group up to translations.
    pub fn canonical_form(&self) -> (Scheme, Vec<Transform>) {
        let mut base = self.clone();
        let mut prelude = Vec::new();
        let shift = -base.voices[0].t;
        if shift != 0 {
            base = base.transform(Transform::TimeTranslate(shift)).unwrap();
            prelude.push(Transform::TimeTranslate(shift));
        }
        let g = base
            .voices
            .iter()
            .fold(0i64, |acc, v| acc.gcd(&v.t));
        if g > 1 {
            let tr = Transform::TimeDilate {
                numerator: 1,
                denominator: g,
            };
            base = base.transform(tr).unwrap();
            prelude.push(tr);
        }

        let mut best: Option<(CanonicalKey, Scheme, Vec<Transform>)> = None;
        for retrograde in [false, true] {
            for invert in [false, true] {
                for c in 0..7 {
                    let mut cand = base.clone();
                    let mut chain = prelude.clone();
                    if retrograde {
                        let tr = Transform::TimeDilate {
                            numerator: -1,
                            denominator: 1,
                        };
                        cand = cand.transform(tr).unwrap();
                        chain.push(tr);
                        let a = -cand.voices[0].t;
                        if a != 0 {
                            cand = cand.transform(Transform::TimeTranslate(a)).unwrap();
                            chain.push(Transform::TimeTranslate(a));
                        }
                    }
                    if invert {
                        cand = cand.transform(Transform::Invert).unwrap();
                        chain.push(Transform::Invert);
                    }
                    if c != 0 {
                        let tr = Transform::Shear(PitchClass::new(c));
                        cand = cand.transform(tr).unwrap();
                        chain.push(tr);
                    }
                    let b = -cand.voices[0].p();
                    if b.value() != 0 {
                        cand = cand.transform(Transform::PitchTranspose(b)).unwrap();
                        chain.push(Transform::PitchTranspose(b));
                    }
                    // canonical schemes carry the reduced residue as p_raw
                    let cand = Scheme::new(
                        cand.voices
                            .iter()
                            .map(|v| Voice::new(v.t, v.p().value() as i64, v.is_bass))
                            .collect(),
                    )
                    .unwrap();
                    let key = CanonicalKey::of(&cand);
                    if best.as_ref().map_or(true, |(k, _, _)| key < *k) {
                        best = Some((key, cand, chain));
                    }
                }
            }
        }
        let (_, scheme, chain) = best.unwrap();
        (scheme, chain)
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct CanonicalKey {
    times: Vec<i64>,
    pitches: Vec<u8>,
    // bass counted from the end, so a bass on the last voice sorts first
    bass_from_end: Option<usize>,
}

impl CanonicalKey {
    fn of(s: &Scheme) -> Self {
        let n = s.voices.len();
        CanonicalKey {
            times: s.voices.iter().map(|v| v.t).collect(),
            pitches: s.voices.iter().map(|v| v.p().value()).collect(),
            bass_from_end: s.bass_index().map(|i| n - 1 - i),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.voices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", v.t, v.p_raw)?;
            if v.is_bass {
                write!(f, "B")?;
            }
        }
        write!(f, "}}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(text: &str) -> Result<Scheme> {
        let mut p = Parser {
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        p.expect('{')?;
        let mut voices = Vec::new();
        loop {
            voices.push(p.pair()?);
            if p.eat(',') {
                continue;
            }
            break;
        }
        p.expect('}')?;
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!(
                "trailing input after '}}': {:?}",
                p.rest()
            )));
        }
        Scheme::new(voices)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn rest(&self) -> String {
        self.chars[self.pos..].iter().collect()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected {:?} at {:?}",
                c,
                self.rest()
            )))
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        self.eat('-');
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map_err(|_| Error::Parse(format!("expected integer at {:?}", self.rest())))
    }

    fn pair(&mut self) -> Result<Voice> {
        self.expect('(')?;
        let t = self.int()?;
        self.expect(',')?;
        let p_raw = self.int()?;
        self.expect(')')?;
        let is_bass = self.eat('B');
        Ok(Voice::new(t, p_raw, is_bass))
    }
}
