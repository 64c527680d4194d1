use proptest::prelude::*;

use hids_core::flowdata::{
    apply_normalizer, fit_normalizer, load_csv, load_csv_reader, split, write_csv, SelectionPolicy, SplitSpec,
};
use hids_core::forestpa::{train_forest, PaTreeParams};
use hids_core::reptree::{train_rep_tree, RepTreeParams};
use hids_core::ripper::{train_ripper, RipperParams};
use hids_core::synth::{generate, SynthSpec};
use hids_core::Samples;

fn classes(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

/// Rows in [0, 1) with labels from `k` classes.
fn labelled(max_rows: usize, width: usize, k: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (4..max_rows).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, width), n),
            prop::collection::vec(0..k, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reptree_ignores_monotone_rescaling((rows, labels) in labelled(60, 3, 3)) {
        // midpoints commute with an affine map, and the integer grid keeps it exact
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| (v * 50.0).floor()).collect()).collect();
        let params = RepTreeParams::default();
        let a = Samples::from_rows(&rows, labels.clone(), classes(3)).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| 4.0 * v - 7.0).collect()).collect();
        let b = Samples::from_rows(&scaled, labels, classes(3)).unwrap();
        let (ma, mb) = (train_rep_tree(&a, &params).unwrap(), train_rep_tree(&b, &params).unwrap());
        prop_assert_eq!(ma.tree.len(), mb.tree.len());
        for i in 0..a.len() {
            prop_assert_eq!(ma.predict(a.row(i)).unwrap().0, mb.predict(b.row(i)).unwrap().0);
        }
    }

    #[test]
    fn unpruned_tree_routes_training_rows_alike_under_any_monotone_map((rows, labels) in labelled(60, 3, 3)) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| (v * 50.0).floor()).collect()).collect();
        let params = RepTreeParams { pruning: false, ..RepTreeParams::default() };
        let a = Samples::from_rows(&rows, labels.clone(), classes(3)).unwrap();
        let cubed: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * v * v + 2.0 * v - 7.0).collect()).collect();
        let b = Samples::from_rows(&cubed, labels, classes(3)).unwrap();
        let (ma, mb) = (train_rep_tree(&a, &params).unwrap(), train_rep_tree(&b, &params).unwrap());
        for i in 0..a.len() {
            prop_assert_eq!(ma.predict(a.row(i)).unwrap().0, mb.predict(b.row(i)).unwrap().0);
        }
    }

    #[test]
    fn ripper_is_first_match(
        (rows, labels) in labelled(80, 3, 3),
        probes in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 50),
    ) {
        let s = Samples::from_rows(&rows, labels, classes(3)).unwrap();
        let rs = train_ripper(&s, &RipperParams::default()).unwrap();
        for p in &probes {
            let matching: Vec<usize> = rs.rules.iter().filter(|r| r.matches(p)).map(|r| r.class).collect();
            let expected = matching.first().copied().unwrap_or(rs.default_class);
            prop_assert_eq!(rs.predict(p).unwrap(), expected);
        }
        let counts = s.class_counts(0..s.len());
        let majority = (0..3).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        prop_assert_eq!(rs.default_class, majority);
        prop_assert!(rs.rules.iter().all(|r| r.class != majority));
    }

    #[test]
    fn forest_votes_sum_to_tree_count(
        (rows, labels) in labelled(50, 2, 2),
        trees in 1usize..6,
        probe in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let s = Samples::from_rows(&rows, labels, classes(2)).unwrap();
        let m = train_forest(&s, &PaTreeParams { tree_count: trees, ..Default::default() }).unwrap();
        let (winner, votes) = m.predict(&probe).unwrap();
        prop_assert_eq!(votes.iter().sum::<usize>(), trees);
        prop_assert_eq!(votes[winner], *votes.iter().max().unwrap());
        prop_assert!(votes[..winner].iter().all(|&v| v < votes[winner]));
        prop_assert!(m.final_weights.weights().iter().all(|&w| w > 0.0 && w <= 1.0));
    }

    #[test]
    fn split_counts_and_normalized_range(seed in 0u64..1000, random_train in any::<bool>()) {
        let synth = SynthSpec::small(seed % 7);
        let d = load_csv_reader(generate(&synth).as_slice(), None).unwrap();
        let d = hids_core::flowdata::clean(&d).unwrap();
        let mut spec = SplitSpec::table2(seed);
        if random_train {
            spec.train_policy = SelectionPolicy::RandomWithoutReplacement;
        }
        for (e, n) in spec.entries.iter_mut().zip(d.fine_counts()) {
            e.train = n / 3;
            e.test = n / 2;
        }
        let (train, test) = split(&d, &spec).unwrap();
        for ((e, tr), te) in spec.entries.iter().zip(train.fine_counts()).zip(test.fine_counts()) {
            prop_assert_eq!(tr, e.train);
            prop_assert_eq!(te, e.test);
        }
        let stats = fit_normalizer(&train).unwrap();
        let norm = apply_normalizer(&train, &stats).unwrap();
        prop_assert!(norm.records.iter().flat_map(|r| &r.values).all(|v| (0.0..=1.0).contains(v)));
        let again = split(&d, &spec).unwrap();
        prop_assert_eq!(again.0.records, train.records);
        prop_assert_eq!(again.1.records, test.records);
    }
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("flows.csv");
    std::fs::write(&src, generate(&SynthSpec::small(4))).unwrap();
    let d = load_csv(&src, None).unwrap();
    assert!(d.provenance[0].starts_with("load: "));

    let copy = dir.path().join("copy.csv");
    write_csv(&d, std::fs::File::create(&copy).unwrap()).unwrap();
    let back = load_csv(&copy, None).unwrap();
    assert_eq!(back.schema.feature_names, d.schema.feature_names);
    assert_eq!(back.len(), d.len());
    for (a, b) in d.records.iter().zip(&back.records) {
        assert_eq!(a.fine_label, b.fine_label);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(x == y || (x.is_nan() && y.is_nan()));
        }
    }
}
