use std::fs::{self, OpenOptions};
use std::io::Write;

use chrono::{DateTime, Duration, TimeZone, Utc};
use ipr_core::*;
use ipr_store::*;

/// Drives complete rounds with `n` students, recording every event, until at
/// least `min_events` exist or `rounds` rounds are done.
fn scripted_course(n: usize, rounds: usize, min_events: usize) -> (Course, Vec<Event>) {
    let mut course = Course::default();
    let mut log = Vec::new();
    let mut clock: DateTime<Utc> = Utc.with_ymd_and_hms(2026, 2, 1, 8, 0, 0).unwrap();
    let mut run = |course: &mut Course, log: &mut Vec<Event>, cmd: Command| {
        clock += Duration::milliseconds(1500);
        log.extend(course.execute(&cmd, clock).unwrap());
    };
    let config = CourseConfig { condition: Condition::IdentifiedIncentive, seed: 99, ..CourseConfig::default() };
    run(&mut course, &mut log, Command::CreateCourse { course: "c1".into(), config });
    for i in 0..n {
        run(&mut course, &mut log, Command::Enroll { display_name: format!("Student {i}") });
    }
    let people: Vec<ParticipantId> = course.participants.keys().cloned().collect();
    let mut done = 0;
    while done < rounds || log.len() < min_events {
        run(&mut course, &mut log, Command::CreateRound { roster: None, deadlines: Default::default() });
        let round = course.latest_round().unwrap().id().clone();
        for p in &people {
            run(
                &mut course,
                &mut log,
                Command::SubmitAssignment {
                    round: round.clone(),
                    participant: p.clone(),
                    content_ref: format!("essay by {p}"),
                },
            );
        }
        run(
            &mut course,
            &mut log,
            Command::AdvancePhase { round: round.clone(), target: Phase::Reviewing, force: false },
        );
        let tasks: Vec<ReviewTask> = course.round(&round).unwrap().tasks.values().cloned().collect();
        for (i, task) in tasks.iter().enumerate() {
            run(
                &mut course,
                &mut log,
                Command::SubmitReview {
                    task: task.id.clone(),
                    reviewer: task.reviewer.clone(),
                    prompts: vec!["works".into(), "needs sources".into(), String::new(), "nice".into()],
                    grade: 50 + (i as i64 * 7) % 50,
                },
            );
        }
        run(&mut course, &mut log, Command::AdvancePhase { round: round.clone(), target: Phase::Rating, force: false });
        let reviews: Vec<Review> = course.round(&round).unwrap().reviews.values().cloned().collect();
        for (i, review) in reviews.iter().enumerate() {
            run(
                &mut course,
                &mut log,
                Command::RateFeedback {
                    review: review.id.clone(),
                    rater: review.author.clone(),
                    stars: 1 + (i as i64 % 5),
                },
            );
            if i % 3 == 0 {
                run(
                    &mut course,
                    &mut log,
                    Command::PostMessage {
                        review: review.id.clone(),
                        sender: review.author.clone(),
                        body: "thanks!".into(),
                    },
                );
            }
        }
        run(
            &mut course,
            &mut log,
            Command::AdvancePhase { round: round.clone(), target: Phase::Released, force: false },
        );
        done += 1;
    }
    (course, log)
}

#[test]
fn first_event_gets_sequence_one_and_stale_appends_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let (_, log) = scripted_course(3, 1, 0);
    let (mut store, state, _) = CourseStore::open(dir.path()).unwrap();
    assert_eq!(state, Course::default());
    assert_eq!(store.append(&log[..1]).unwrap(), 1);
    let err = store.append(&log[..1]).unwrap_err();
    assert!(matches!(err, StoreError::SequenceConflict { expected: 2, actual: 1 }));
    // gaps are conflicts too
    let err = store.append(&log[2..3]).unwrap_err();
    assert!(matches!(err, StoreError::SequenceConflict { expected: 2, actual: 3 }));
}

#[test]
fn empty_log_replays_to_empty_course() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(replay(&dir.path().join(LOG_FILE)).unwrap(), Course::default());
    fs::write(dir.path().join(LOG_FILE), b"").unwrap();
    assert_eq!(replay(&dir.path().join(LOG_FILE)).unwrap(), Course::default());
}

#[test]
fn full_round_replays_to_released() {
    let dir = tempfile::tempdir().unwrap();
    let (live, log) = scripted_course(5, 1, 0);
    let (mut store, _, _) = CourseStore::open(dir.path()).unwrap();
    store.append(&log).unwrap();
    let replayed = replay(&dir.path().join(LOG_FILE)).unwrap();
    assert_eq!(replayed.latest_round().unwrap().phase(), Phase::Released);
    assert_eq!(replayed, live);
}

#[test]
fn ten_thousand_events_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (live, log) = scripted_course(12, 1, 10_000);
    assert!(log.len() >= 10_000);
    let (mut store, _, _) = CourseStore::open(dir.path()).unwrap();
    for chunk in log.chunks(7) {
        store.append(chunk).unwrap();
    }
    assert_eq!(store.last_seq(), log.len() as u64);
    assert_eq!(replay(&dir.path().join(LOG_FILE)).unwrap(), live);
    let (_, reopened, recovery) = CourseStore::open(dir.path()).unwrap();
    assert_eq!(recovery.discarded_bytes, 0);
    assert_eq!(reopened, live);
}

#[test]
fn truncated_final_record_is_reported_strictly_and_dropped_on_open() {
    let dir = tempfile::tempdir().unwrap();
    let (_, log) = scripted_course(4, 1, 0);
    let n = log.len() as u64;
    let (mut store, _, _) = CourseStore::open(dir.path()).unwrap();
    store.append(&log).unwrap();
    drop(store);

    let path = dir.path().join(LOG_FILE);
    let len = fs::metadata(&path).unwrap().len();
    OpenOptions::new().write(true).open(&path).unwrap().set_len(len - 10).unwrap();

    match replay(&path).unwrap_err() {
        StoreError::CorruptLog { last_good_seq, .. } => assert_eq!(last_good_seq, n - 1),
        other => panic!("unexpected {other}"),
    }
    let (mut store, state, recovery) = CourseStore::open(dir.path()).unwrap();
    assert_eq!(state.last_seq, n - 1);
    assert!(recovery.discarded_bytes > 0);
    // the log accepts the lost event again
    store.append(&log[log.len() - 1..]).unwrap();
    assert_eq!(replay(&path).unwrap().last_seq, n);
}

#[test]
fn truncation_at_every_offset_recovers_the_complete_prefix() {
    let (_, log) = scripted_course(2, 1, 0);
    let mut full = Vec::new();
    let mut ends = Vec::new();
    for event in &log {
        full.extend_from_slice(encode_record(event).as_bytes());
        ends.push(full.len());
        full.push(b'\n');
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(LOG_FILE);
    for cut in 0..=full.len() {
        fs::write(&path, &full[..cut]).unwrap();
        let recovery = read_events(&path, ReadMode::TolerateTornTail).unwrap();
        let complete = ends.iter().filter(|&&e| e <= cut).count();
        assert_eq!(recovery.events.len(), complete, "cut at {cut}");
        let expected = fold(Course::default(), &log[..complete]).unwrap();
        assert_eq!(fold(Course::default(), &recovery.events).unwrap(), expected);
    }
}

#[test]
fn damage_before_the_tail_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let (_, log) = scripted_course(3, 1, 0);
    let (mut store, _, _) = CourseStore::open(dir.path()).unwrap();
    store.append(&log).unwrap();
    drop(store);
    let path = dir.path().join(LOG_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let damaged = text.replacen("Student 1", "Student 7", 1);
    fs::write(&path, damaged).unwrap();
    assert!(matches!(
        CourseStore::open(dir.path()).unwrap_err(),
        StoreError::CorruptLog { last_good_seq: 2, line: 3, .. }
    ));
}

#[test]
fn snapshot_round_trip_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let (_, log) = scripted_course(6, 1, 600);
    let log = &log[..600];
    let (mut store, _, _) = CourseStore::open(dir.path()).unwrap();
    store.append(&log[..500]).unwrap();
    let at_500 = fold(Course::default(), &log[..500]).unwrap();
    store.snapshot(&at_500).unwrap();
    let snap = load_snapshot(&dir.path().join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(snap.covering_seq, 500);
    assert_eq!(snap.state, at_500);

    store.append(&log[500..]).unwrap();
    drop(store);
    let (_, resumed, _) = CourseStore::open(dir.path()).unwrap();
    let pure = replay(&dir.path().join(LOG_FILE)).unwrap();
    assert_eq!(resumed, pure);
    assert_eq!(resumed.last_seq, 600);
}

#[test]
fn newer_snapshot_schema_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(SNAPSHOT_FILE);
    write_snapshot(&path, &Course::default()).unwrap();
    let text = fs::read_to_string(&path).unwrap().replace("\"schema_version\":1", "\"schema_version\":2");
    let mut f = fs::File::create(&path).unwrap();
    f.write_all(text.as_bytes()).unwrap();
    assert!(matches!(load_snapshot(&path).unwrap_err(), StoreError::VersionMismatch { found: 2, supported: 1 }));
}

mod corruption {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn any_flipped_byte_is_detected(pick in any::<prop::sample::Index>(), at in any::<prop::sample::Index>(), mask in 1u8..=255) {
            let (_, log) = scripted_course(3, 1, 0);
            let event = pick.get(&log);
            let line = encode_record(event);
            prop_assert_eq!(&decode_record(&line).unwrap(), event);

            let mut bytes = line.into_bytes();
            let i = at.index(bytes.len());
            bytes[i] ^= mask;
            if let Ok(damaged) = String::from_utf8(bytes) {
                prop_assert!(decode_record(&damaged).is_err(), "flip at {} went unnoticed", i);
            }
        }
    }
}
