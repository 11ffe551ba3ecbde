use newsprop::data::{
    build_observations, read_domain_records, read_justifications, truthfulness_category,
    truthfulness_score, write_domain_records, DomainRecord, GroupCounts, Justification, TruthColor,
};
use newsprop::model::BeliefGroup;
use proptest::prelude::*;

fn justification() -> impl Strategy<Value = Justification> {
    (0usize..5, prop::option::of(0.0f64..=1.0)).prop_map(|(c, fraction)| Justification {
        color: TruthColor::ALL[c],
        fraction,
    })
}

fn cell() -> impl Strategy<Value = GroupCounts> {
    (0usize..7, 0u64..10_000, 0.0f64..=1.0, any::<bool>()).prop_map(
        |(g, exposures, share, extreme)| GroupCounts {
            group: BeliefGroup::ALL[g],
            exposures,
            shares: (exposures as f64 * share).floor() as u64,
            extreme,
        },
    )
}

fn record(id: usize) -> impl Strategy<Value = DomainRecord> {
    (
        -1.0f64..=1.0,
        prop::option::of(0.0f64..=0.8),
        prop::collection::vec(justification(), 1..4),
        prop::collection::vec(cell(), 1..14),
    )
        .prop_map(move |(bias, truth, justifications, cells)| {
            let mut seen = std::collections::HashSet::new();
            let cells = cells
                .into_iter()
                .filter(|c| seen.insert((c.group, c.extreme)))
                .collect();
            DomainRecord {
                domain_id: format!("site{id}.example"),
                bias,
                truth,
                justifications,
                cells,
            }
        })
}

fn records() -> impl Strategy<Value = Vec<DomainRecord>> {
    (1usize..6).prop_flat_map(|n| (0..n).map(record).collect::<Vec<_>>())
}

proptest! {
    #[test]
    fn scores_stay_below_the_top_band(js in prop::collection::vec(justification(), 1..20)) {
        let t = truthfulness_score(&js).unwrap();
        prop_assert!((0.0..=0.8).contains(&t));
    }

    #[test]
    fn categories_are_monotone(a in 0.0f64..=0.8, b in 0.0f64..=0.8) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(truthfulness_category(lo).unwrap() <= truthfulness_category(hi).unwrap());
    }

    #[test]
    fn shares_are_preserved(records in records()) {
        let obs = build_observations(&records).unwrap();
        let expected: u64 = records
            .iter()
            .flat_map(|r| &r.cells)
            .filter(|c| c.exposures > 0)
            .map(|c| c.shares)
            .sum();
        prop_assert_eq!(obs.iter().map(|o| o.shares).sum::<u64>(), expected);
        let cells = records.iter().flat_map(|r| &r.cells).filter(|c| c.exposures > 0).count();
        prop_assert_eq!(obs.len(), cells);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(records in records()) {
        let mut buf = Vec::new();
        write_domain_records(&records, &mut buf).unwrap();
        let back = read_domain_records(buf.as_slice(), None).unwrap();
        let a = build_observations(&records).unwrap();
        let b = build_observations(&back).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.bias.to_bits(), y.bias.to_bits());
            prop_assert_eq!(x.truth.to_bits(), y.truth.to_bits());
            prop_assert_eq!(x.belief.to_bits(), y.belief.to_bits());
            prop_assert_eq!((x.exposures, x.shares, x.extreme), (y.exposures, y.shares, y.extreme));
        }
    }
}

#[test]
fn justification_file_feeds_missing_truth() {
    let justs = "domain_id,color,fraction\n\
                 a.example,black,0\n\
                 b.example,green,0.5\n\
                 c.example,red,0.5\n\
                 c.example,yellow,0.5\n";
    let counts = "domain_id,bias,truth,group,exposures,shares\n\
                  a.example,-0.6,,left,40,2\n\
                  b.example,0.1,,center,30,3\n\
                  c.example,0.7,,right,20,1\n";
    let map = read_justifications(justs.as_bytes()).unwrap();
    let obs =
        build_observations(&read_domain_records(counts.as_bytes(), Some(&map)).unwrap()).unwrap();
    let truths: Vec<f64> = obs.iter().map(|o| o.truth).collect();
    assert_eq!(truths[0], 0.0);
    assert!((truths[1] - 0.7).abs() < 1e-12);
    assert!((truths[2] - 0.30).abs() < 1e-12);
}

#[test]
fn bad_justification_rows_are_rejected() {
    for text in [
        "domain_id,color,fraction\na,purple,0.5\n",
        "domain_id,color,fraction\na,red,1.5\n",
        "domain_id,fraction\na,0.5\n",
    ] {
        assert!(read_justifications(text.as_bytes()).is_err(), "{text}");
    }
}
