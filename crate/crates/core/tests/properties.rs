//! Randomized invariants over schemes and melodies.

use canonflex::oracle::extension_ok;
use canonflex::{
    count_valid_oracle, validate, Melody, OracleOptions, PitchClass, Scheme, Transform,
    TransferGraph, Voice,
};
use proptest::prelude::*;

/// Schemes with 1-4 voices, spans up to 6, arbitrary raw pitches, at most
/// one bass.
fn scheme_strategy() -> impl Strategy<Value = Scheme> {
    (
        proptest::collection::btree_set(0i64..=6, 1..=4),
        proptest::collection::vec(-15i64..=15, 4),
        0usize..=4,
    )
        .prop_map(|(times, pitches, bass)| {
            let voices: Vec<Voice> = times
                .into_iter()
                .enumerate()
                .map(|(i, t)| Voice::new(t, pitches[i], i == bass))
                .collect();
            Scheme::new(voices).unwrap()
        })
}

fn melody_strategy() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0i64..7, 0..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scheme_text_round_trips(scheme in scheme_strategy()) {
        let text = scheme.to_string();
        let parsed: Scheme = text.parse().unwrap();
        prop_assert_eq!(parsed.to_string(), text);
        prop_assert_eq!(parsed.voices(), scheme.voices());
    }

    #[test]
    fn validity_is_prefix_closed(scheme in scheme_strategy(), notes in melody_strategy()) {
        let melody = Melody::from_values(&notes);
        if validate(&scheme, &melody).is_empty() {
            for k in 0..notes.len() {
                let prefix = Melody::from_values(&notes[..k]);
                prop_assert!(validate(&scheme, &prefix).is_empty(), "prefix of length {}", k);
            }
        }
    }

    #[test]
    fn incremental_check_matches_validate(scheme in scheme_strategy(), notes in melody_strategy()) {
        // a melody is valid iff every note extends its valid prefix
        let melody = Melody::from_values(&notes);
        let mut incremental = true;
        let pcs: Vec<PitchClass> = notes.iter().map(|&v| PitchClass::new(v)).collect();
        for k in 0..pcs.len() {
            if !extension_ok(&scheme, &pcs[..k], pcs[k]) {
                incremental = false;
                break;
            }
        }
        prop_assert_eq!(incremental, validate(&scheme, &melody).is_empty());
    }

    #[test]
    fn graph_count_matches_oracle(scheme in scheme_strategy(), n in 0usize..=5) {
        let g = TransferGraph::build(&scheme, OracleOptions::default()).unwrap();
        let fast = g.count_valid_fast(n);
        let slow = count_valid_oracle(&scheme, n, OracleOptions::default()).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn canonical_form_is_idempotent(scheme in scheme_strategy()) {
        let (canon, _) = scheme.canonical_form();
        let (again, _) = canon.canonical_form();
        prop_assert_eq!(again.to_string(), canon.to_string());
    }

    #[test]
    fn canonical_form_is_orbit_constant(
        scheme in scheme_strategy(),
        shift in -5i64..=5,
        pitch in 0i64..7,
        shear in 0i64..7,
        invert in proptest::bool::ANY,
    ) {
        let (canon, _) = scheme.canonical_form();
        let mut mapped = scheme
            .transform(Transform::TimeTranslate(shift)).unwrap()
            .transform(Transform::PitchTranspose(PitchClass::new(pitch))).unwrap()
            .transform(Transform::Shear(PitchClass::new(shear))).unwrap();
        if invert {
            mapped = mapped.transform(Transform::Invert).unwrap();
        }
        mapped = mapped
            .transform(Transform::TimeDilate { numerator: -1, denominator: 1 })
            .unwrap();
        prop_assert_eq!(mapped.canonical_form().0.to_string(), canon.to_string());
    }

    #[test]
    fn melody_text_round_trips(notes in melody_strategy()) {
        let melody = Melody::from_values(&notes);
        prop_assert_eq!(Melody::parse(&melody.to_string()).unwrap(), melody);
    }
}
