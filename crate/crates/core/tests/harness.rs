use std::sync::Mutex;

use ssdf_core::defense::{Defense, Estimator};
use ssdf_core::fusion::majority_probability;
use ssdf_core::harness::{
    detection_thresholds, prepare_table, read_csv, run_point, run_scenario, write_csv, AttackSetting, OperatingMode,
    ScenarioConfig, SweepPoint,
};
use ssdf_core::outlier::{CriticalValueTable, Direction};
use ssdf_core::signal::{analytic_pfa, ChannelParams};
use ssdf_core::Error;

const TRIALS: u64 = 10_000;

fn config(attack: AttackSetting, test: Defense, direction: Direction, estimator: Estimator) -> ScenarioConfig {
    ScenarioConfig {
        trials: TRIALS,
        seed: 31,
        attack,
        test,
        direction,
        estimator,
        ..Default::default()
    }
}

static TABLE: Mutex<Option<CriticalValueTable>> = Mutex::new(None);

fn point(c: &ScenarioConfig) -> SweepPoint {
    let table = {
        let mut shared = TABLE.lock().unwrap();
        let table = shared.get_or_insert_with(CriticalValueTable::new);
        prepare_table(c, table).unwrap();
        table.clone()
    };
    run_scenario(c, &table, 1).unwrap().remove(0)
}

fn se(p: f64) -> f64 {
    (p * (1.0 - p) / TRIALS as f64).sqrt()
}

#[test]
fn defense_free_sanity() {
    let c = config(AttackSetting::None, Defense::None, Direction::Upper, Estimator::KMeans);
    let m = point(&c).metrics;
    let params = ChannelParams::with_snr_db(1.0, -20.0, 10_000).unwrap();
    let lambda = detection_thresholds(&params, 20, 0.99).unwrap()[20];
    let qfa = majority_probability(20, analytic_pfa(lambda, &params));
    let (got_fa, got_d) = (m.q_fa.unwrap(), m.q_d.unwrap());
    assert!((got_d - 0.99).abs() < 4.0 * se(0.99), "q_d {got_d}");
    assert!((got_fa - qfa).abs() < 4.0 * se(qfa), "q_fa {got_fa} vs {qfa}");
    assert_eq!(m.mu_detection_rate, None);
    assert_eq!(m.mean_estimated_t, Some(0.0));
}

#[test]
fn always_yes_is_screened_out() {
    let undefended = point(&config(
        AttackSetting::AlwaysYes,
        Defense::None,
        Direction::Upper,
        Estimator::KMeans,
    ))
    .metrics;
    let defended = point(&config(
        AttackSetting::AlwaysYes,
        Defense::Tm,
        Direction::Upper,
        Estimator::KMeans,
    ))
    .metrics;
    assert!(defended.mu_detection_rate.unwrap() > 0.99);
    assert!(defended.q_fa.unwrap() + 0.05 < undefended.q_fa.unwrap());
}

#[test]
fn always_no_mirrors_always_yes() {
    let undefended = point(&config(
        AttackSetting::AlwaysNo,
        Defense::None,
        Direction::Lower,
        Estimator::KMeans,
    ))
    .metrics;
    for test in [Defense::Tm, Defense::Sw] {
        let defended = point(&config(
            AttackSetting::AlwaysNo,
            test,
            Direction::Lower,
            Estimator::KMeans,
        ))
        .metrics;
        assert!(defended.mu_detection_rate.unwrap() > 0.99);
        assert!(defended.honest_exclusion_rate.unwrap() < 0.05);
        let (d, u) = (defended.q_d.unwrap(), undefended.q_d.unwrap());
        assert!(d - u > 3.0 * (se(d).powi(2) + se(u).powi(2)).sqrt(), "{d} vs {u}");
    }
}

#[test]
fn masking_estimates() {
    let t = |est| {
        point(&config(
            AttackSetting::CooperativeMasking,
            Defense::Tm,
            Direction::Upper,
            est,
        ))
        .metrics
        .mean_estimated_t
        .unwrap()
    };
    assert!((t(Estimator::LargestGap) - 2.0).abs() < 0.05);
    assert!((t(Estimator::Mlg) - 4.0).abs() < 0.2);
}

#[test]
fn sanity_ordering() {
    let honest = point(&config(
        AttackSetting::None,
        Defense::Tm,
        Direction::Upper,
        Estimator::KMeans,
    ))
    .metrics;
    let defended = point(&config(
        AttackSetting::AlwaysYes,
        Defense::Tm,
        Direction::Upper,
        Estimator::KMeans,
    ))
    .metrics;
    let undefended = point(&config(
        AttackSetting::AlwaysYes,
        Defense::None,
        Direction::Upper,
        Estimator::KMeans,
    ))
    .metrics;
    let (h, d, u) = (honest.q_fa.unwrap(), defended.q_fa.unwrap(), undefended.q_fa.unwrap());
    assert!(h <= d + 3.0 * (se(h).powi(2) + se(d).powi(2)).sqrt(), "{h} {d}");
    assert!(d <= u + 3.0 * (se(d).powi(2) + se(u).powi(2)).sqrt(), "{d} {u}");
}

#[test]
fn known_count_bounds_every_estimator() {
    // only meaningful when all L attackers deviate, in the tested direction, every round
    for (attack, direction) in [
        (AttackSetting::CooperativeMasking, Direction::Upper),
        (AttackSetting::AlwaysYes, Direction::Upper),
        (AttackSetting::AlwaysNo, Direction::Lower),
    ] {
        let mu = |est| {
            point(&config(attack, Defense::Tm, direction, est))
                .metrics
                .mu_detection_rate
                .unwrap()
        };
        let known = mu(Estimator::Known);
        for est in [Estimator::KMeans, Estimator::LargestGap, Estimator::Mlg] {
            let other = mu(est);
            assert!(
                other <= known + 3.0 * (se(known).powi(2) + se(other).powi(2)).sqrt(),
                "{attack:?} {est:?}"
            );
        }
    }
}

#[test]
fn roc_trace_is_monotone() {
    let mut c = config(
        AttackSetting::Random,
        Defense::Tm,
        Direction::Bidirectional,
        Estimator::KMeans,
    );
    c.trials = 4_000;
    c.operating_point = OperatingMode::ThresholdSweep;
    c.thresholds = (0..12).map(|i| 0.99 + 0.004 * i as f64).collect();
    let mut table = CriticalValueTable::new();
    prepare_table(&c, &mut table).unwrap();
    let points = run_scenario(&c, &table, 2).unwrap();
    let mut buf = Vec::new();
    write_csv(&points, c.seed, &mut buf).unwrap();
    let rows = read_csv(&buf[..]).unwrap();
    assert_eq!(rows.len(), 12);
    for w in rows.windows(2) {
        let (a, b) = (&w[0].0.metrics, &w[1].0.metrics);
        assert!(b.q_fa.unwrap() <= a.q_fa.unwrap());
        assert!(b.q_d.unwrap() <= a.q_d.unwrap());
    }
}

#[test]
fn missing_table_without_build_is_an_error() {
    let c = config(
        AttackSetting::AlwaysYes,
        Defense::Tm,
        Direction::Upper,
        Estimator::KMeans,
    );
    let err = run_point(&c, -20.0, None, &CriticalValueTable::new(), 1).unwrap_err();
    assert!(matches!(err, Error::MissingCriticalValue { .. }), "{err}");
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ScenarioConfig::parse("sensors = 8\nmalicious = 4").is_err());
    assert!(ScenarioConfig::parse("trials = 0").is_err());
    assert!(ScenarioConfig::parse("colour = \"red\"").is_err());
    assert!(ScenarioConfig::parse("operating_point = \"threshold_sweep\"").is_err());
    let c = ScenarioConfig::parse("n = 10\nl = 3\nsnr_db = [-22.0, -20.0]").unwrap();
    assert_eq!((c.sensors, c.malicious, c.snr_db.len()), (10, 3, 2));
}

#[test]
fn small_sensor_counts_run() {
    for n in [5, 6, 9] {
        for est in [
            Estimator::KMeans,
            Estimator::LargestGap,
            Estimator::Mlg,
            Estimator::Known,
        ] {
            for direction in [Direction::Upper, Direction::Bidirectional] {
                let mut c = config(AttackSetting::Random, Defense::Sw, direction, est);
                c.sensors = n;
                c.malicious = 2;
                c.trials = 200;
                let half_gap =
                    est == Estimator::Mlg || (est == Estimator::LargestGap && direction == Direction::Bidirectional);
                if half_gap && n < 6 {
                    assert!(c.validate().is_err());
                    continue;
                }
                let m = point(&c).metrics;
                for r in [m.q_fa, m.q_d, m.mu_detection_rate, m.honest_exclusion_rate]
                    .into_iter()
                    .flatten()
                {
                    assert!((0.0..=1.0).contains(&r));
                }
            }
        }
    }
}
