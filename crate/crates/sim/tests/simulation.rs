use std::collections::BTreeMap;

use chrono::Utc;
use ipr_core::{Command, Condition, Course, CourseConfig, Phase, RoundId};
use ipr_sim::{
    export_csv, grade_gap, run_simulation, Population, QualityDist, RoundMetrics, SimConfig, SimError, Simulation,
    StatsError,
};

fn quiet(noise: f64) -> Population {
    Population { rating_noise_sd: noise, ..Population::default() }
}

fn assort_mean(cohort: usize, condition: Condition, seeds: std::ops::Range<u64>, noise: f64) -> f64 {
    let n = seeds.end - seeds.start;
    let mut total = 0.0;
    for seed in seeds {
        let cfg = SimConfig { population: quiet(noise), ..SimConfig::new(cohort, 3, condition, seed) };
        let m = run_simulation(cfg).unwrap();
        total += m[1..].iter().map(|r| r.assortativity.value).sum::<f64>() / (m.len() - 1) as f64;
    }
    total / n as f64
}

#[test]
fn reviews_and_ratings_are_conserved() {
    for (cohort, k) in [(2, 3), (3, 3), (7, 2), (30, 3)] {
        let cfg = SimConfig { k, ..SimConfig::new(cohort, 3, Condition::IdentifiedIncentive, 5) };
        for m in run_simulation(cfg).unwrap() {
            let d = k.min(cohort - 1);
            assert_eq!(m.fan_out, d);
            assert_eq!(m.tasks, cohort * d);
            assert_eq!(m.reviews, m.tasks);
            assert_eq!(m.ratings, m.reviews);
            assert_eq!(m.usefulness.n, m.ratings);
            assert_eq!(m.expired, 0);
            assert!(m.released);
            assert_eq!(m.grades.len(), cohort);
            assert!(m.grades.values().all(|g| g.is_some()));
        }
    }
}

#[test]
fn two_agents_review_each_other_once() {
    let m = run_simulation(SimConfig::new(2, 1, Condition::BlindRandom, 1)).unwrap();
    assert_eq!((m[0].fan_out, m[0].tasks, m[0].reviews), (1, 2, 2));
}

#[test]
fn config_is_validated() {
    for cfg in [
        SimConfig::new(1, 1, Condition::BlindRandom, 0),
        SimConfig::new(5, 0, Condition::BlindRandom, 0),
        SimConfig { k: 0, ..SimConfig::new(5, 1, Condition::BlindRandom, 0) },
        SimConfig {
            population: Population { diligence: 2.0, ..Population::default() },
            ..SimConfig::new(5, 1, Condition::BlindRandom, 0)
        },
    ] {
        assert!(matches!(run_simulation(cfg), Err(SimError::ConfigInvalid(_))));
    }
    let explicit = Population::from_json(r#"{"agents": [{"latent_quality": 0.1}, {"latent_quality": 0.9}]}"#).unwrap();
    let cfg = SimConfig { population: explicit, ..SimConfig::new(3, 1, Condition::BlindRandom, 0) };
    assert!(matches!(run_simulation(cfg), Err(SimError::ConfigInvalid(_))));
}

#[test]
fn same_seed_same_metrics() {
    let cfg = SimConfig::new(12, 3, Condition::IdentifiedIncentive, 99);
    let a = run_simulation(cfg.clone()).unwrap();
    let b = run_simulation(cfg).unwrap();
    assert_eq!(a, b);
    let c = run_simulation(SimConfig::new(12, 3, Condition::IdentifiedIncentive, 100)).unwrap();
    assert_ne!(a, c);

    let dir = tempfile::tempdir().unwrap();
    export_csv(&a, &dir.path().join("a.csv")).unwrap();
    export_csv(&b, &dir.path().join("b.csv")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
}

/// Before any usefulness history exists the two identified conditions differ
/// only in who reviews whom.
#[test]
fn first_round_matches_across_policies() {
    for seed in 0..10 {
        let random = run_simulation(SimConfig::new(30, 1, Condition::IdentifiedRandom, seed)).unwrap();
        let incentive = run_simulation(SimConfig::new(30, 1, Condition::IdentifiedIncentive, seed)).unwrap();
        let (a, b) = (&random[0], &incentive[0]);
        assert_eq!((a.tasks, a.reviews, a.ratings, a.messages), (b.tasks, b.reviews, b.ratings, b.messages));
        assert_eq!(a.grades, b.grades, "seed {seed}");
        // Per-thread spread depends on who is paired with whom, so only its mean is compared.
        for (x, y) in [
            (&a.usefulness, &b.usefulness),
            (&a.review_words, &b.review_words),
            (&a.thread_messages, &b.thread_messages),
        ] {
            assert_eq!(x.n, y.n);
            assert!((x.mean.unwrap() - y.mean.unwrap()).abs() < 1e-9, "seed {seed}");
        }
        for (x, y) in [(&a.usefulness, &b.usefulness), (&a.review_words, &b.review_words)] {
            assert!((x.std.unwrap() - y.std.unwrap()).abs() < 1e-9, "seed {seed}");
        }

        let pairs = |c: Condition| {
            let mut sim = Simulation::new(SimConfig::new(30, 1, c, seed)).unwrap();
            sim.step().unwrap();
            sim.course().round(&RoundId::new("sim.r1")).unwrap().assignment.clone().unwrap().pairs
        };
        assert_ne!(pairs(Condition::IdentifiedRandom), pairs(Condition::IdentifiedIncentive));
    }
}

#[test]
fn incentive_matching_is_assortative_from_round_two() {
    let seeds = 0..20;
    let inc = assort_mean(30, Condition::IdentifiedIncentive, seeds.clone(), 0.0);
    let rnd = assort_mean(30, Condition::IdentifiedRandom, seeds, 0.0);
    assert!(inc >= 0.9, "incentive {inc}");
    assert!(rnd.abs() <= 0.2, "random {rnd}");
}

#[test]
fn incentive_beats_random_at_every_cohort_size() {
    for cohort in [10, 30, 100] {
        let inc = assort_mean(cohort, Condition::IdentifiedIncentive, 0..50, 0.5);
        let rnd = assort_mean(cohort, Condition::IdentifiedRandom, 0..50, 0.5);
        println!("cohort {cohort}: incentive {inc:.3} random {rnd:.3}");
        assert!(inc > rnd, "cohort {cohort}: {inc} <= {rnd}");
    }
}

#[test]
fn missed_reviews_expire() {
    let pop = Population { diligence: 0.6, ..Population::default() };
    let cfg = SimConfig { population: pop, ..SimConfig::new(20, 2, Condition::IdentifiedRandom, 4) };
    let metrics = run_simulation(cfg).unwrap();
    for m in &metrics {
        assert!(m.expired > 0);
        assert_eq!(m.reviews + m.expired, m.tasks);
        assert_eq!(m.ratings, m.reviews);
    }
}

#[test]
fn identical_agents_have_no_grade_gap() {
    let pop = Population {
        quality: QualityDist::Fixed { value: 0.6 },
        rating_noise_sd: 0.0,
        grade_noise_sd: 0.0,
        ..Population::default()
    };
    let cfg = SimConfig { population: pop, ..SimConfig::new(15, 2, Condition::IdentifiedIncentive, 8) };
    for m in run_simulation(cfg).unwrap() {
        assert_eq!(grade_gap(&m).unwrap(), 0.0);
        assert!(m.grades.values().all(|g| *g == Some(60)));
    }
}

#[test]
fn grade_gap_needs_released_grades() {
    let now = Utc::now();
    let mut course = Course::default();
    course.execute(&Command::CreateCourse { course: "g".into(), config: CourseConfig::default() }, now).unwrap();
    for name in ["A", "B", "C"] {
        course.execute(&Command::Enroll { display_name: name.into() }, now).unwrap();
    }
    course.execute(&Command::CreateRound { roster: None, deadlines: BTreeMap::new() }, now).unwrap();
    let round = RoundId::new("g.r1");
    let m = RoundMetrics::collect(&course, &round).unwrap();
    assert_eq!(grade_gap(&m), Err(StatsError::GradesNotReleased { round: 1 }));
    assert_eq!(course.round(&round).unwrap().phase(), Phase::Submission);
}

/// With learning switched on, strong students paired with strong reviewers
/// pull away from the rest.
#[test]
fn learning_widens_the_gap_under_incentive() {
    let pop = Population { learning_rate: 0.4, rating_noise_sd: 0.3, grade_noise_sd: 0.0, ..Population::default() };
    let mut gaps = BTreeMap::new();
    for condition in [Condition::IdentifiedRandom, Condition::IdentifiedIncentive] {
        let mut total = 0.0;
        for seed in 0..20 {
            let cfg = SimConfig { population: pop.clone(), ..SimConfig::new(30, 5, condition, seed) };
            let m = run_simulation(cfg).unwrap();
            total += grade_gap(m.last().unwrap()).unwrap();
        }
        gaps.insert(condition, total / 20.0);
    }
    println!("final-round gap: {gaps:?}");
    assert!(gaps[&Condition::IdentifiedIncentive] > gaps[&Condition::IdentifiedRandom]);
}
