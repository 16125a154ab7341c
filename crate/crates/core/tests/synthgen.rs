use proptest::prelude::*;
use repday::clustering::{kmeans_multistart, KMeansConfig};
use repday::synthgen::{duplicated_day_dataset, generate, PlantedExtreme, PriceBand, SynthConfig};
use repday::timeseries::{
    attribute_extremum, load_csv, CsvSchema, Direction, Statistic, EL_DEMAND, EL_PRICE, HEAT_DEMAND, SOLAR_CF,
};

#[test]
fn same_seed_same_bits() {
    let c = SynthConfig::default();
    let a = generate(&c).unwrap();
    let b = generate(&c).unwrap();
    assert_eq!(a, b);
    let other = generate(&SynthConfig { seed: 8, ..c }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn planted_heat_day_is_the_heat_peak() {
    let data = generate(&SynthConfig {
        n_days: 120,
        planted_extremes: vec![PlantedExtreme {
            day: 40,
            attribute: HEAT_DEMAND.into(),
            scale: 3.0,
        }],
        ..SynthConfig::default()
    })
    .unwrap();
    assert_eq!(attribute_extremum(&data, HEAT_DEMAND, Statistic::Absolute, Direction::Max).unwrap(), 40);
}

#[test]
fn price_band_is_hit() {
    for band in [PriceBand::default(), PriceBand { min: 0.1, max: 0.5, mean: 0.2 }] {
        let data = generate(&SynthConfig {
            price_band: band,
            n_days: 30,
            planted_extremes: Vec::new(),
            ..SynthConfig::default()
        })
        .unwrap();
        let p = &data.attribute(EL_PRICE).unwrap().values;
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((p.iter().copied().fold(f64::INFINITY, f64::min) - band.min).abs() < 1e-6);
        assert!((p.iter().copied().fold(f64::NEG_INFINITY, f64::max) - band.max).abs() < 1e-6);
        assert!((mean - band.mean).abs() < 1e-6);
    }
}

#[test]
fn csv_round_trip() {
    let data = generate(&SynthConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    data.write_csv(&path).unwrap();
    let back = load_csv(&path, &CsvSchema::default()).unwrap();
    assert_eq!(back.n_days(), 90);
    for (a, b) in data.attributes().iter().zip(back.attributes()) {
        assert_eq!(a.values, b.values);
    }
}

#[test]
fn duplicated_days_cluster_perfectly() {
    let data = duplicated_day_dataset(4, 6);
    assert_eq!(data.n_days(), 24);
    let res = kmeans_multistart(&data.periods(), &KMeansConfig::new(4, 0).with_n_init(30)).unwrap();
    assert_eq!(res.ssd, 0.0);
    assert!(res.weights.iter().all(|&w| w == 0.25));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_ranges_hold(seed in 0u64..10_000, n_days in 1usize..60, start in 0usize..365,
                             noise in 0.0f64..0.9, cloud in 0.0f64..1.0, scale in 0.0f64..4.0) {
        let data = generate(&SynthConfig {
            n_days,
            seed,
            start_day: start,
            noise,
            cloudiness: cloud,
            planted_extremes: vec![PlantedExtreme { day: n_days / 2, attribute: SOLAR_CF.into(), scale }],
            ..SynthConfig::default()
        }).unwrap();
        prop_assert!(data.validate_ranges().is_ok());
        for name in [EL_DEMAND, HEAT_DEMAND] {
            prop_assert!(data.attribute(name).unwrap().values.iter().all(|&v| v >= 0.0));
        }
        prop_assert!(data.attribute(SOLAR_CF).unwrap().values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
