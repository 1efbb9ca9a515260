use crate::error::{Error, Result};
use crate::melody::{validate, Melody};
use crate::oracle::extension_ok;
use crate::pitch::PitchClass;
use crate::scheme::Scheme;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    /// Target note count, including the seed prefix.
    pub length: usize,
    pub rng_seed: u64,
    pub avoid_parallel_perfects: bool,
    /// Cap on backtracking steps before giving up.
    pub max_retries: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            length: 16,
            rng_seed: 0,
            avoid_parallel_perfects: false,
            max_retries: 100_000,
        }
    }
}

/// The pitches that keep `prefix + x` a valid canon. Errors when the
/// prefix itself is invalid.
pub fn valid_continuations(scheme: &Scheme, prefix: &Melody) -> Result<Vec<PitchClass>> {
    if !validate(scheme, prefix).is_empty() {
        return Err(Error::InvalidPrefix);
    }
    Ok(PitchClass::all()
        .filter(|&x| extension_ok(scheme, prefix.notes(), x))
        .collect())
}

/// Parallel unisons/octaves and fifths created by the note at 1-based
/// melody position `k`: for voices i, j sounding at consecutive times with
/// the same interval 0 or 4 while the line moves.
fn makes_parallel_perfect(scheme: &Scheme, notes: &[PitchClass], k: usize) -> bool {
    let voices = scheme.voices();
    for (i, vi) in voices.iter().enumerate() {
        for (j, vj) in voices.iter().enumerate() {
            if i == j {
                continue;
            }
            // the newest note is the latest of the four indices involved
            let t = k as i64 - 1 + vi.t.min(vj.t);
            let idx = |tt: i64, tv: i64| -> Option<PitchClass> {
                let m = tt - tv;
                if m >= 1 && m <= k as i64 {
                    Some(notes[(m - 1) as usize])
                } else {
                    None
                }
            };
            let (Some(a1), Some(a2), Some(b1), Some(b2)) = (
                idx(t, vi.t),
                idx(t + 1, vi.t),
                idx(t, vj.t),
                idx(t + 1, vj.t),
            ) else {
                continue;
            };
            let d1 = ((a1 + vi.p()) - (b1 + vj.p())).value();
            let d2 = ((a2 + vi.p()) - (b2 + vj.p())).value();
            if d1 == d2 && (d1 == 0 || d1 == 4) && a1 != a2 {
                return true;
            }
        }
    }
    false
}

/// Post-hoc scan of a whole melody for parallel perfects, independent of
/// the incremental check above.
pub fn find_parallel_perfects(scheme: &Scheme, melody: &Melody) -> Vec<(i64, usize, usize)> {
    let r = crate::melody::realize(scheme, melody);
    let voices = scheme.voices();
    let mut hits = Vec::new();
    let range = r.time_range();
    for t in range.start..range.end.saturating_sub(1) {
        for i in 0..voices.len() {
            for j in 0..voices.len() {
                if i == j {
                    continue;
                }
                let (Some(a1), Some(a2), Some(b1), Some(b2)) = (
                    r.note(t, i),
                    r.note(t + 1, i),
                    r.note(t, j),
                    r.note(t + 1, j),
                ) else {
                    continue;
                };
                let d1 = (a1 - b1).value();
                let d2 = (a2 - b2).value();
                if d1 == d2 && (d1 == 0 || d1 == 4) && a1 != a2 {
                    hits.push((t, i, j));
                }
            }
        }
    }
    hits
}

/// Extends a valid seed prefix to a valid canon of the requested length by
/// a backtracking random walk: at each step the continuation is drawn
/// uniformly among the legal ones.
pub fn random_canon(scheme: &Scheme, seed_prefix: &Melody, opts: GenOptions) -> Result<Melody> {
    if !validate(scheme, seed_prefix).is_empty() {
        return Err(Error::InvalidPrefix);
    }
    if seed_prefix.len() >= opts.length {
        return Ok(Melody::new(
            seed_prefix.notes()[..opts.length].to_vec(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut notes: Vec<PitchClass> = seed_prefix.notes().to_vec();
    let legal = |notes: &[PitchClass], x: PitchClass| -> bool {
        if !extension_ok(scheme, notes, x) {
            return false;
        }
        if opts.avoid_parallel_perfects {
            let mut extended = notes.to_vec();
            extended.push(x);
            if makes_parallel_perfect(scheme, &extended, extended.len()) {
                return false;
            }
        }
        true
    };
    // stack of untried candidates per position, shuffled once
    let mut choices: Vec<Vec<PitchClass>> = Vec::new();
    let mut retries = 0u64;
    while notes.len() < opts.length {
        if choices.len() <= notes.len() - seed_prefix.len() {
            let mut cands: Vec<PitchClass> =
                PitchClass::all().filter(|&x| legal(&notes, x)).collect();
            cands.shuffle(&mut rng);
            choices.push(cands);
        }
        match choices.last_mut().unwrap().pop() {
            Some(x) => notes.push(x),
            None => {
                choices.pop();
                if notes.len() == seed_prefix.len() {
                    return Err(Error::GenerationExhausted {
                        length: opts.length,
                    });
                }
                notes.pop();
                retries += 1;
                if retries > opts.max_retries {
                    return Err(Error::GenerationExhausted {
                        length: opts.length,
                    });
                }
            }
        }
    }
    Ok(Melody::new(notes))
}
