mod common;

use common::{dense, nested};
use ofa_core::{build_occurrence_index, build_subword_vectors, Segmenter, Vocabulary, WordVectors, DEFAULT_BOUNDARY_MARKER};
use ofa_oracle::{greedy_segment, subword_vectors, Matrix};
use proptest::prelude::*;

const MARK: &str = DEFAULT_BOUNDARY_MARKER;

#[derive(Debug, Clone)]
struct Case {
    words: Vec<String>,
    vectors: Matrix,
    subwords: Vec<String>,
}

fn case() -> impl Strategy<Value = Case> {
    let words = proptest::collection::btree_set("[abcd]{1,5}", 1..20).prop_map(|s| s.into_iter().collect::<Vec<_>>());
    let subwords = proptest::collection::btree_set(
        (any::<bool>(), "[abcd]{1,3}").prop_map(|(s, p)| if s { format!("{MARK}{p}") } else { p }),
        1..20,
    )
    .prop_map(|s| s.into_iter().collect::<Vec<_>>());
    (words, subwords, 1usize..6).prop_flat_map(|(words, subwords, dim)| {
        let n = words.len();
        proptest::collection::vec(proptest::collection::vec(-4.0f32..4.0, dim), n).prop_map(move |v| Case {
            words: words.clone(),
            vectors: v.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(),
            subwords: subwords.clone(),
        })
    })
}

fn run(case: &Case, vectors: &Matrix) -> (Matrix, Vec<bool>) {
    let words = WordVectors::new(Vocabulary::from_tokens(case.words.iter().cloned()).unwrap(), dense(vectors)).unwrap();
    let sub = Vocabulary::from_tokens(case.subwords.iter().cloned()).unwrap();
    let seg = Segmenter::greedy(&sub);
    let index = build_occurrence_index(&words, &seg, &sub);
    let sv = build_subword_vectors(&index, &words, &sub).unwrap();
    (nested(sv.matrix()), sv.covered().to_vec())
}

fn close(a: &Matrix, b: &Matrix, rel: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= rel * (1.0 + q.abs())))
}

proptest! {
    #[test]
    fn matches_brute_force(case in case()) {
        let segs: Vec<Vec<String>> = case.words.iter().map(|w| greedy_segment(w, MARK, &case.subwords)).collect();
        let (want, want_cov) = subword_vectors(&case.words, &case.vectors, &segs, &case.subwords);
        let (got, got_cov) = run(&case, &case.vectors);
        prop_assert_eq!(got_cov, want_cov);
        prop_assert!(close(&got, &want, 1e-6));
    }

    #[test]
    fn linear_in_the_word_vectors(case in case(), a in -8.0f64..8.0) {
        let scaled: Matrix = case.vectors.iter().map(|r| r.iter().map(|x| (x * a) as f32 as f64).collect()).collect();
        let (base, _) = run(&case, &case.vectors);
        let (got, _) = run(&case, &scaled);
        let want: Matrix = base.iter().map(|r| r.iter().map(|x| x * a).collect()).collect();
        prop_assert!(close(&got, &want, 1e-5 * a.abs().max(1.0)));
    }

    #[test]
    fn power_of_two_scaling_is_exact(case in case()) {
        let scaled: Matrix = case.vectors.iter().map(|r| r.iter().map(|x| x * 4.0).collect()).collect();
        let (base, _) = run(&case, &case.vectors);
        let (got, _) = run(&case, &scaled);
        let want: Matrix = base.iter().map(|r| r.iter().map(|x| x * 4.0).collect()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn word_order_does_not_matter(case in case(), rot in 0usize..20) {
        let n = case.words.len();
        let r = rot % n;
        let mut permuted = case.clone();
        permuted.words.rotate_left(r);
        permuted.vectors.rotate_left(r);
        let (a, ca) = run(&case, &case.vectors);
        let (b, cb) = run(&permuted, &permuted.vectors);
        prop_assert_eq!(ca, cb);
        prop_assert!(close(&a, &b, 1e-6));
    }
}
