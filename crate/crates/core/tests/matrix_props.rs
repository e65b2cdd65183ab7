use std::collections::BTreeMap;
use std::io::Cursor;

use proptest::prelude::*;
use rnsla::matrix::{
    compress_values, csr_to_ell, csr_to_slcoo, gen_ffs_like, matrix_stats, plant_dependent_row, read_matrix,
    reorder_row_categories, split_hybrid, write_matrix, CooMatrix, FileEncoding, GeneratorParams, SparseMatrix,
};
use rnsla::Error;

fn coefficient() -> impl Strategy<Value = i32> {
    prop_oneof![
        6 => Just(1),
        6 => Just(-1),
        3 => (2i32..20).prop_map(|v| if v % 2 == 0 { v } else { -v }),
        1 => (1i32..i32::MAX).prop_map(|v| if v % 3 == 0 { -v } else { v }),
    ]
}

fn sparse_matrix() -> impl Strategy<Value = CooMatrix> {
    (1usize..40, 1usize..40)
        .prop_flat_map(|(r, c)| {
            let cells = proptest::collection::btree_map((0..r as u32, 0..c as u32), coefficient(), 0..(r * c).min(200));
            (Just(r), Just(c), cells)
        })
        .prop_map(|(r, c, cells): (usize, usize, BTreeMap<(u32, u32), i32>)| {
            CooMatrix::from_triplets(r, c, cells.into_iter().map(|((i, j), v)| (i, j, v)).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conversions_preserve_triplets(m in sparse_matrix(), slice in 1usize..9, k in 1usize..6) {
        let csr = m.to_csr();
        let t = m.triplets();
        prop_assert_eq!(csr.triplets(), t.clone());
        prop_assert_eq!(csr.to_coo(), m.clone());
        prop_assert_eq!(csr_to_slcoo(&csr, slice).unwrap().triplets(), t.clone());
        let ell = csr_to_ell(&csr, csr.max_row_len()).unwrap();
        prop_assert_eq!(ell.triplets(), t.clone());
        prop_assert_eq!(ell.to_csr(), csr.clone());
        let hybrid = split_hybrid(&csr, k).unwrap();
        prop_assert_eq!(hybrid.triplets(), t.clone());
        prop_assert_eq!(hybrid.to_csr(), csr.clone());
        prop_assert_eq!(reorder_row_categories(&csr).triplets(), t);
    }

    #[test]
    fn compression_is_lossless(m in sparse_matrix()) {
        let csr = reorder_row_categories(&m.to_csr());
        let c = compress_values(&csr).unwrap();
        prop_assert_eq!(c.triplets(), m.triplets());
        prop_assert_eq!(c.decompress(), csr.clone());
        let big = csr.data().iter().filter(|v| v.unsigned_abs() > 1).count();
        prop_assert_eq!(c.data().len(), big + 2 * csr.n_rows());
    }

    #[test]
    fn stats_agree_across_formats(m in sparse_matrix(), k in 1usize..4) {
        let csr = m.to_csr();
        let base = matrix_stats(&m);
        prop_assert_eq!(&matrix_stats(&csr), &base);
        prop_assert_eq!(&matrix_stats(&csr_to_slcoo(&csr, 3).unwrap()), &base);
        prop_assert_eq!(&matrix_stats(&csr_to_ell(&csr, csr.max_row_len()).unwrap()), &base);
        prop_assert_eq!(&matrix_stats(&split_hybrid(&csr, k).unwrap()), &base);
        prop_assert_eq!(&matrix_stats(&compress_values(&reorder_row_categories(&csr)).unwrap()), &base);
        let norm = m.triplets().iter().fold(BTreeMap::<u32, u64>::new(), |mut acc, &(r, _, v)| {
            *acc.entry(r).or_default() += v.unsigned_abs() as u64;
            acc
        });
        prop_assert_eq!(base.max_row_norm, norm.values().copied().max().unwrap_or(0));
    }

    #[test]
    fn io_round_trip(m in sparse_matrix(), text in any::<bool>()) {
        let enc = if text { FileEncoding::Text } else { FileEncoding::Binary };
        let mut bytes = Vec::new();
        write_matrix(&m, &mut bytes, enc).unwrap();
        let back = read_matrix(&mut Cursor::new(&bytes)).unwrap();
        prop_assert_eq!(&back, &m);
        let mut again = Vec::new();
        write_matrix(&back, &mut again, enc).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn truncated_binary_is_rejected(m in sparse_matrix(), cut in any::<prop::sample::Index>()) {
        prop_assume!(m.nnz() > 0);
        let mut bytes = Vec::new();
        write_matrix(&m, &mut bytes, FileEncoding::Binary).unwrap();
        let at = cut.index(bytes.len() - 1);
        prop_assert!(read_matrix(&mut Cursor::new(&bytes[..at])).is_err());
    }
}

#[test]
fn malformed_text_inputs_have_distinct_errors() {
    let header = "%%MatrixMarket matrix coordinate integer general\n%%field: integer\n";
    type Case = (&'static str, fn(&Error) -> bool);
    let cases: Vec<Case> = vec![
        ("3 3 1\n4 1 1\n", |e| matches!(e, Error::IndexOutOfRange { .. })),
        ("3 3 1\n1 1 0\n", |e| matches!(e, Error::ZeroCoefficient(_))),
        ("3 3 1\n1 1 2147483648\n", |e| {
            matches!(e, Error::CoefficientOutOfRange { .. })
        }),
        ("3 3 2\n1 1 1\n1 1 2\n", |e| matches!(e, Error::Duplicate { .. })),
        ("3 3 2\n2 1 1\n1 1 2\n", |e| matches!(e, Error::Unsorted(_))),
        ("3 3 2\n1 1 1\n", |e| matches!(e, Error::MalformedRecord { .. })),
        ("3 3\n", |e| matches!(e, Error::MalformedHeader(_))),
    ];
    for (body, check) in cases {
        let text = format!("{header}{body}");
        let err = read_matrix(&mut Cursor::new(text.as_bytes())).unwrap_err();
        assert!(check(&err), "{body:?} gave {err:?}");
    }
    let err = read_matrix(&mut Cursor::new(b"XXXX\x01\x00\x00\x00".as_slice())).unwrap_err();
    assert!(matches!(err, Error::MalformedHeader(_)));
}

#[test]
fn generator_matches_requested_profile() {
    let m = gen_ffs_like(&GeneratorParams::ffs_like(1000, 100, 7)).unwrap();
    let s = matrix_stats(&m);
    assert_eq!(s.n_rows, 1000);
    assert!((s.pct_pm1 - 0.927).abs() <= 0.01, "pct_pm1 = {}", s.pct_pm1);
    assert!(
        (s.mean_row_weight - 100.0).abs() <= 2.0,
        "mean weight = {}",
        s.mean_row_weight
    );
    let (lo, hi) = (
        s.row_weight_histogram.first().unwrap().0,
        s.row_weight_histogram.last().unwrap().0,
    );
    assert!(lo >= 80 && hi <= 120, "row weights in [{lo}, {hi}]");
    let profile = s.column_profile(32);
    assert!(profile.windows(2).all(|w| w[0] >= w[1]), "{profile:?}");
    assert!(s.column_counts[0] > 10 * s.column_counts[999]);
}

#[test]
fn planted_row_is_a_sum() {
    let m = gen_ffs_like(&GeneratorParams::ffs_like(200, 10, 3)).unwrap();
    let p = plant_dependent_row(&m, 3).unwrap();
    let rows = |m: &CooMatrix| {
        let mut rows = vec![BTreeMap::<u32, i64>::new(); m.n_rows()];
        for (r, c, v) in m.triplets() {
            rows[r as usize].insert(c, v as i64);
        }
        rows
    };
    let (a, b) = (rows(&m), rows(&p));
    let changed: Vec<usize> = (0..200).filter(|&i| a[i] != b[i]).collect();
    assert_eq!(changed.len(), 1);
    let t = changed[0];
    let found = (0..200).any(|i| {
        (i + 1..200).any(|j| {
            i != t && j != t && {
                let mut sum = a[i].clone();
                for (&c, &v) in &a[j] {
                    *sum.entry(c).or_default() += v;
                }
                sum.retain(|_, v| *v != 0);
                sum == b[t]
            }
        })
    });
    assert!(found);
}
