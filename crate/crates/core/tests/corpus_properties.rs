//! Property-based checks of chunking, occurrence search, and context
//! sampling over randomized documents.

use std::collections::BTreeSet;

use ceat_core::corpus::{
    chunk, find_occurrences, normalize_text, sample_contexts, ChunkPolicy, ContextAssignment,
    Document, StimulusWordSets,
};
use proptest::prelude::*;

fn doc(text: String) -> Document {
    Document {
        id: "prop".to_string(),
        source_path: "prop.txt".to_string(),
        text,
    }
}

/// Text mixing words, punctuation, newlines, paragraph breaks, and some
/// multibyte characters — the shapes chunk boundaries care about.
fn text_strategy() -> impl Strategy<Value = String> {
    let fragment = prop_oneof![
        "[a-z]{1,12} ",
        Just(". ".to_string()),
        Just("\n".to_string()),
        Just("\n\n".to_string()),
        Just("café ".to_string()),
        Just("naïve, ".to_string()),
    ];
    prop::collection::vec(fragment, 1..400)
        .prop_map(|parts| parts.concat())
        .prop_filter("must have visible content", |t| !t.trim().is_empty())
}

fn policy_strategy() -> impl Strategy<Value = ChunkPolicy> {
    (40usize..2000).prop_flat_map(|max_chars| {
        (Just(max_chars), 0usize..(max_chars / 2)).prop_map(|(max_chars, overlap_chars)| {
            ChunkPolicy::new(max_chars, overlap_chars).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chunks_tile_the_document(text in text_strategy(), policy in policy_strategy()) {
        let document = doc(text.clone());
        let chunks = chunk(&document, policy).unwrap();
        prop_assert!(!chunks.is_empty());

        // indices are contiguous from zero
        for (i, c) in chunks.iter().enumerate() {
            prop_assert_eq!(c.index, i);
            prop_assert_eq!(&c.doc_id, "prop");
            // the span is real: the text is exactly the spanned slice
            prop_assert_eq!(c.text.as_str(), &text[c.span.0..c.span.1]);
            // measured in characters, every chunk respects the budget
            prop_assert!(c.text.chars().count() <= policy.max_chars);
        }

        // full coverage: first starts at 0, last ends at the end, and
        // consecutive chunks never leave a gap
        prop_assert_eq!(chunks[0].span.0, 0);
        prop_assert_eq!(chunks.last().unwrap().span.1, text.len());
        for pair in chunks.windows(2) {
            prop_assert!(pair[1].span.0 <= pair[0].span.1, "gap between chunks");
            prop_assert!(pair[1].span.0 > pair[0].span.0, "no forward progress");
            prop_assert!(pair[1].span.1 > pair[0].span.1, "no forward progress");
        }
    }

    #[test]
    fn chunking_is_deterministic(text in text_strategy(), policy in policy_strategy()) {
        let document = doc(text);
        let first = chunk(&document, policy).unwrap();
        let second = chunk(&document, policy).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn found_occurrences_normalize_to_the_needle(
        text in text_strategy(),
        word in "[a-z]{2,8}",
    ) {
        let document = doc(text);
        let chunks = chunk(&document, ChunkPolicy::default()).unwrap();
        for occurrence in find_occurrences(&word, &chunks) {
            prop_assert_eq!(
                normalize_text(&occurrence.matched_text),
                normalize_text(&word),
                "span {:?} captured {:?}",
                occurrence.span,
                occurrence.matched_text
            );
            // the span indexes the chunk it names
            let c = &chunks[occurrence.chunk_index];
            prop_assert_eq!(occurrence.matched_text.as_str(), &c.text[occurrence.span.0..occurrence.span.1]);
        }
    }

    #[test]
    fn planted_words_are_found(words in prop::collection::btree_set("[a-z]{3,9}", 2..6)) {
        // build a text that provably contains every word, in varied case
        let words: Vec<String> = words.into_iter().collect();
        let text = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let shown = if i % 2 == 0 { w.to_uppercase() } else { w.clone() };
                format!("Fragment {i} mentions {shown} here and wanders on at some length afterwards.")
            })
            .collect::<Vec<_>>()
            .join("\n\n");
        let chunks = chunk(&doc(text), ChunkPolicy::default()).unwrap();
        for word in &words {
            let found = find_occurrences(word, &chunks);
            prop_assert!(!found.is_empty(), "planted word {word:?} not found");
        }
    }

    #[test]
    fn sampling_assigns_every_word_and_is_seed_stable(
        text in text_strategy(),
        seed in 0u64..1000,
    ) {
        let chunks = chunk(&doc(text), ChunkPolicy::default()).unwrap();
        let sets = StimulusWordSets {
            targets_x: vec!["alpha".into()],
            targets_y: vec!["beta".into()],
            attributes_a: vec!["gamma".into()],
            attributes_b: vec!["delta".into()],
        };
        let n_samples = 5;
        let samples = sample_contexts(&sets, &chunks, n_samples, seed);
        prop_assert_eq!(samples.len(), n_samples);

        let words: BTreeSet<&str> = sets.words().into_iter().collect();
        for (i, sample) in samples.iter().enumerate() {
            prop_assert_eq!(sample.sample_index, i);
            let assigned: BTreeSet<&str> =
                sample.assignment.keys().map(String::as_str).collect();
            prop_assert_eq!(&assigned, &words);

            for (word, assignment) in &sample.assignment {
                match assignment {
                    ContextAssignment::StandaloneFallback => {
                        prop_assert!(find_occurrences(word, &chunks).is_empty(),
                            "fallback despite occurrences of {word:?}");
                    }
                    ContextAssignment::Occurrence(occ) => {
                        // the chosen occurrence is one the search reports
                        let all = find_occurrences(word, &chunks);
                        prop_assert!(all.contains(occ), "assignment not in occurrence list");
                    }
                }
            }
        }

        let replay = sample_contexts(&sets, &chunks, n_samples, seed);
        prop_assert_eq!(samples, replay);
    }

    #[test]
    fn normalization_is_idempotent_and_case_insensitive(s in ".{0,60}") {
        let once = normalize_text(&s);
        prop_assert_eq!(normalize_text(&once), once.clone());
        prop_assert_eq!(normalize_text(&s.to_uppercase()), normalize_text(&s.to_uppercase().to_lowercase()));
    }
}
