use std::io::Cursor;

use ofa::ofat::{read_matrix, write_matrix, HEADER_LEN};
use ofa::text::{read_coverage, read_vocab, read_word_vectors, write_coverage, write_vocab, write_word_vectors};
use ofa::Error;
use ofa_core::{DenseMatrix, Vocabulary, WordVectors};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = DenseMatrix> {
    (0usize..6, 0usize..6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(
            prop_oneof![Just(-0.0f32), Just(f32::MIN_POSITIVE), Just(f32::MAX), -1e6f32..1e6],
            r * c,
        )
        .prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
    })
}

fn bits(m: &DenseMatrix) -> Vec<u32> {
    m.as_slice().iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #[test]
    fn ofat_round_trips_bitwise(m in matrix()) {
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        prop_assert_eq!(buf.len() as u64, HEADER_LEN + 4 * (m.rows() * m.cols()) as u64);
        let back = read_matrix(Cursor::new(&buf)).unwrap();
        prop_assert_eq!((back.rows(), back.cols()), (m.rows(), m.cols()));
        prop_assert_eq!(bits(&back), bits(&m));
    }

    #[test]
    fn truncated_ofat_reports_where_it_ends(m in matrix(), cut in 0usize..200) {
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        prop_assume!(cut < buf.len());
        buf.truncate(cut);
        match read_matrix(Cursor::new(&buf)) {
            Err(Error::Format { offset, .. }) => prop_assert!(offset <= cut as u64),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn vocabularies_round_trip(tokens in proptest::collection::btree_set("[^\n\r]{1,8}", 0..20)) {
        let vocab = Vocabulary::from_tokens(tokens.iter().cloned()).unwrap();
        let mut buf = Vec::new();
        write_vocab(&vocab, &mut buf).unwrap();
        prop_assert_eq!(read_vocab(Cursor::new(&buf)).unwrap(), vocab);
    }

    #[test]
    fn word_vectors_round_trip(
        words in proptest::collection::btree_set("[a-z▁]{1,6}", 1..10),
        dim in 1usize..5,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = words.len();
        let data: Vec<f32> = (0..n * dim).map(|_| rng.random_range(-1e3f32..1e3)).collect();
        let wv = WordVectors::new(
            Vocabulary::from_tokens(words.iter().cloned()).unwrap(),
            DenseMatrix::new(n, dim, data).unwrap(),
        ).unwrap();
        let mut buf = Vec::new();
        write_word_vectors(&wv, &mut buf).unwrap();
        let back = read_word_vectors(Cursor::new(&buf)).unwrap();
        prop_assert_eq!(back.vocab(), wv.vocab());
        prop_assert_eq!(bits(back.matrix()), bits(wv.matrix()));
    }

    #[test]
    fn coverage_round_trips(covered in proptest::collection::vec(any::<bool>(), 0..40)) {
        let mut buf = Vec::new();
        write_coverage(&covered, &mut buf).unwrap();
        prop_assert_eq!(read_coverage(Cursor::new(&buf)).unwrap(), covered);
    }
}

#[test]
fn bad_headers_are_located() {
    let mut buf = Vec::new();
    write_matrix(&DenseMatrix::zeros(1, 1), &mut buf).unwrap();
    let offset_of = |bytes: &[u8]| match read_matrix(Cursor::new(bytes)) {
        Err(Error::Format { offset, .. }) => offset,
        other => panic!("unexpected {other:?}"),
    };
    let mut magic = buf.clone();
    magic[0] = b'X';
    assert_eq!(offset_of(&magic), 0);
    let mut version = buf.clone();
    version[4] = 9;
    assert_eq!(offset_of(&version), 4);
    let mut dtype = buf.clone();
    dtype[24] = 7;
    assert_eq!(offset_of(&dtype), 24);
    let mut nan = buf.clone();
    nan[25..29].copy_from_slice(&f32::NAN.to_le_bytes());
    assert_eq!(offset_of(&nan), 25);
    let mut trailing = buf.clone();
    trailing.push(0);
    assert_eq!(offset_of(&trailing), 29);
}

#[test]
fn text_errors_name_the_line() {
    let dup = read_vocab(Cursor::new("a\nb\na\n")).unwrap_err();
    assert!(matches!(dup, Error::Parse { line: 3, .. }), "{dup}");
    assert!(dup.to_string().contains("line 1"));

    let short = read_word_vectors(Cursor::new("2 2\nx 1 2\ny 3\n")).unwrap_err();
    assert!(matches!(short, Error::Parse { line: 3, .. }), "{short}");
    let nan = read_word_vectors(Cursor::new("1 1\nx NaN\n")).unwrap_err();
    assert!(matches!(nan, Error::Parse { line: 2, .. }), "{nan}");
}
