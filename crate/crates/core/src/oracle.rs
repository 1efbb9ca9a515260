use crate::error::{Error, Result};
use crate::pitch::PitchClass;
use crate::scheme::Scheme;
use num_bigint::BigUint;

/// Limits for the depth-first enumerations.
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Maximum number of visited melody prefixes.
    pub node_budget: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            node_budget: 100_000_000,
        }
    }
}

/// Whether appending `x` to a valid prefix keeps the canon valid.
///
/// Placing note `k` makes voice `i` sound it at time `k + t_i`, against the
/// already determined note `k - (t_j - t_i)` of every voice `j` entering
/// later. Validity is prefix-closed, so these are the only new checks.
pub fn extension_ok(scheme: &Scheme, prefix: &[PitchClass], x: PitchClass) -> bool {
    let voices = scheme.voices();
    let k = prefix.len() as i64 + 1;
    for (i, vi) in voices.iter().enumerate() {
        for (j, vj) in voices.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = vj.t - vi.t;
            if d <= 0 || k - d < 1 {
                continue;
            }
            let other = prefix[(k - d - 1) as usize];
            let diff = ((x + vi.p()) - (other + vj.p())).value();
            if diff == 1 || diff == 6 {
                return false;
            }
            if vj.is_bass && diff == 3 {
                return false;
            }
            if vi.is_bass && diff == 4 {
                return false;
            }
        }
    }
    true
}

/// Exact `V_n(S)` by prefix-pruned depth-first enumeration over all 7
/// starting notes. Intended as the independent oracle for small `n`.
pub fn count_valid_oracle(scheme: &Scheme, n: usize, opts: OracleOptions) -> Result<BigUint> {
    let mut visited = 0u64;
    let mut prefix = Vec::with_capacity(n);
    let count = dfs_count(scheme, n, &mut prefix, &mut visited, opts.node_budget)?;
    Ok(BigUint::from(count))
}

fn dfs_count(
    scheme: &Scheme,
    n: usize,
    prefix: &mut Vec<PitchClass>,
    visited: &mut u64,
    budget: u64,
) -> Result<u64> {
    if prefix.len() == n {
        return Ok(1);
    }
    let mut total = 0u64;
    for x in PitchClass::all() {
        if !extension_ok(scheme, prefix, x) {
            continue;
        }
        *visited += 1;
        if *visited > budget {
            return Err(Error::BudgetExceeded(budget));
        }
        prefix.push(x);
        total += dfs_count(scheme, n, prefix, visited, budget)?;
        prefix.pop();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melody::{validate, Melody};

    fn s(text: &str) -> Scheme {
        text.parse().unwrap()
    }

    fn count(text: &str, n: usize) -> BigUint {
        count_valid_oracle(&s(text), n, OracleOptions::default()).unwrap()
    }

    #[test]
    fn fibonacci_scheme_counts() {
        let want = [7u32, 28, 42, 70, 112];
        for (i, &w) in want.iter().enumerate() {
            assert_eq!(count("{(0,0),(1,-8)B,(3,0)}", i + 1), BigUint::from(w));
        }
    }

    #[test]
    fn two_voice_bass_closed_form() {
        assert_eq!(count("{(0,0),(2,0)B}", 3), BigUint::from(196u32));
    }

    #[test]
    fn single_voice_is_unconstrained() {
        assert_eq!(count("{(0,0)}", 3), BigUint::from(343u32));
        assert_eq!(count("{(0,0)}", 0), BigUint::from(1u32));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = OracleOptions { node_budget: 10 };
        assert!(matches!(
            count_valid_oracle(&s("{(0,0)}"), 5, opts),
            Err(Error::BudgetExceeded(10))
        ));
    }

    /// Cross-check the pruned enumeration against raw `validate` on every
    /// melody, for a handful of schemes small enough to exhaust.
    #[test]
    fn agrees_with_full_validate_enumeration() {
        for text in [
            "{(0,0),(1,-8)B,(3,0)}",
            "{(0,0)B,(1,4),(2,7)}",
            "{(0,0),(1,0)}",
            "{(0,0),(2,3)B}",
        ] {
            let scheme = s(text);
            for n in 0..=4usize {
                let mut brute = 0u64;
                let total = 7u64.pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut notes = Vec::with_capacity(n);
                    for _ in 0..n {
                        notes.push(PitchClass::new((c % 7) as i64));
                        c /= 7;
                    }
                    if validate(&scheme, &Melody::new(notes)).is_empty() {
                        brute += 1;
                    }
                }
                assert_eq!(count(text, n), BigUint::from(brute), "{text} n={n}");
            }
        }
    }
}
