mod common;

use common::*;
use ipr_core::ACTIONABILITY_NUDGE;
use serde_json::{json, Value};

const NAMES: [&str; 5] = ["Ada Quillon", "Bram Ostrander", "Cyra Vellum", "Dov Marchetti", "Esme Tarrow"];

/// One identified round from creation to release, checking each endpoint on the way.
#[test]
fn identified_round_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));

    let course = create_course(&client, json!({ "condition": "identified_incentive", "seed": 7 }));
    assert_eq!(course, "c1");
    let students = enroll(&client, &course, &NAMES);
    assert_eq!(students[0].id, "c1.p1");

    let intro = client
        .put(
            &format!("/participants/{}/intro", students[0].id),
            &students[0].token,
            json!({ "text": "Second-year design student." }),
        )
        .expect(200);
    assert_eq!(intro["intro"], "Second-year design student.");

    let round = client.post(&format!("/courses/{course}/rounds"), ADMIN, json!({})).expect(201);
    let r = round["round_id"].as_str().unwrap().to_string();
    assert_eq!(round["phase"], "submission");
    assert_eq!(round["roster_size"], 5);

    for s in &students {
        let sub = client.post(
            &format!("/rounds/{r}/submissions"),
            &s.token,
            json!({ "content_ref": format!("essay by {}", s.id) }),
        );
        assert_eq!(sub.expect(201)["author"], s.id.as_str());
    }

    let changed = advance(&client, &r, "reviewing");
    assert_eq!(changed["tasks_created"], 15);
    assert_eq!(changed["from"], "submission");

    // Reviewers see who they review, including the author's intro.
    let mut review_ids = Vec::new();
    for s in &students {
        let list = client.get(&format!("/rounds/{r}/tasks?reviewer={}", s.id), &s.token).expect(200);
        let tasks = list["tasks"].as_array().unwrap();
        assert_eq!(tasks.len(), 3);
        for (i, task) in tasks.iter().enumerate() {
            let author = task["author"]["participant"].as_str().unwrap();
            assert_ne!(author, s.id);
            if author == students[0].id {
                assert_eq!(task["author"]["intro"], "Second-year design student.");
            }
            let prompts = if i == 0 {
                vec!["good job".to_string(), long_prompt("b"), long_prompt("c"), long_prompt("d")]
            } else {
                vec![long_prompt("a"), long_prompt("b"), long_prompt("c"), long_prompt("d")]
            };
            let grade = 70 + 10 * (i as i64);
            let t = task["task_id"].as_str().unwrap();
            let accepted = client
                .post(&format!("/tasks/{t}/review"), &s.token, json!({ "prompts": prompts, "grade": grade }))
                .expect(201);
            if i == 0 {
                assert_eq!(accepted["nudge"], ACTIONABILITY_NUDGE);
                assert_eq!(accepted["short_prompts"], json!([0]));
            } else {
                assert!(accepted.get("nudge").is_none());
            }
            review_ids.push(accepted["review_id"].as_str().unwrap().to_string());
        }
        let after = client.get(&format!("/rounds/{r}/tasks"), &s.token).expect(200);
        assert_eq!(after["tasks"].as_array().unwrap().len(), 0);
    }

    advance(&client, &r, "rating");
    let me = &students[0];
    let fb = client.get(&format!("/rounds/{r}/feedback?participant={}", me.id), &me.token).expect(200);
    let items = fb["feedback"].as_array().unwrap().clone();
    assert_eq!(items.len(), 3);
    assert_eq!(fb["grades_visible"], false);
    for item in &items {
        assert!(item.get("grade").is_none(), "grade leaked: {item}");
        assert!(item["reviewer"]["display_name"].is_string());
    }

    let pending = client.get(&format!("/rounds/{r}/grades?participant={}", me.id), &me.token);
    assert_eq!(pending.status, 409);
    assert_eq!(pending.error(), "GradesPending");

    for (n, item) in items.iter().enumerate() {
        let v = item["review_id"].as_str().unwrap();
        let rated = client.post(&format!("/reviews/{v}/rating"), &me.token, json!({ "stars": 4 })).expect(201);
        assert_eq!(rated["grades_visible"], n == 2);
        let g = client.get(&format!("/rounds/{r}/grades"), &me.token);
        assert_eq!(g.status, if n == 2 { 200 } else { 409 });
    }
    let again = client.post(
        &format!("/reviews/{}/rating", items[0]["review_id"].as_str().unwrap()),
        &me.token,
        json!({ "stars": 5 }),
    );
    assert_eq!((again.status, again.error()), (409, "AlreadyRated"));

    let report = client.get(&format!("/rounds/{r}/grades"), &me.token).expect(200);
    let grades: Vec<i64> =
        report["per_review_grades"].as_array().unwrap().iter().map(|g| g.as_i64().unwrap()).collect();
    assert_eq!(grades.len(), 3);
    let mut sorted = grades.clone();
    sorted.sort();
    assert_eq!(report["aggregate"], sorted[1]);
    let fb = client.get(&format!("/rounds/{r}/feedback"), &me.token).expect(200);
    assert!(fb["feedback"].as_array().unwrap().iter().all(|i| i["grade"].is_i64() && i["rating"] == 4));

    // Conversation between receiver and reviewer.
    let v = items[0]["review_id"].as_str().unwrap();
    let reviewer_id = items[0]["reviewer"]["participant"].as_str().unwrap();
    let reviewer = students.iter().find(|s| s.id == reviewer_id).unwrap();
    let posted = client
        .post(&format!("/reviews/{v}/messages"), &me.token, json!({ "body": "Which section did you mean?" }))
        .expect(201);
    assert_eq!(posted["role"], "author");
    assert_eq!(posted["mine"], true);
    client.post(&format!("/reviews/{v}/messages"), &reviewer.token, json!({ "body": "Section two." })).expect(201);
    let thread = client.get(&format!("/reviews/{v}/messages"), &reviewer.token).expect(200);
    let msgs = thread["messages"].as_array().unwrap();
    assert_eq!(msgs.len(), 2);
    assert_eq!(msgs[0]["sender_label"], me.name.as_str());
    assert_eq!(msgs[0]["mine"], false);
    assert_eq!(msgs[1]["role"], "reviewer");
    let outsider = students.iter().find(|s| s.id != me.id && s.id != reviewer.id).unwrap();
    let denied = client.get(&format!("/reviews/{v}/messages"), &outsider.token);
    assert_eq!((denied.status, denied.error()), (403, "NotAParty"));

    // Everyone else rates, then the round is released.
    for s in &students[1..] {
        let fb = client.get(&format!("/rounds/{r}/feedback"), &s.token).expect(200);
        for item in fb["feedback"].as_array().unwrap() {
            client
                .post(
                    &format!("/reviews/{}/rating", item["review_id"].as_str().unwrap()),
                    &s.token,
                    json!({ "stars": 3 }),
                )
                .expect(201);
        }
    }
    let released = advance(&client, &r, "released");
    assert!(released["round"]["released_at"].is_string());
    let status = client.get(&format!("/rounds/{r}"), &me.token).expect(200);
    assert_eq!(status["phase"], "released");
    assert_eq!(status["you"]["grades_visible"], true);
    assert_eq!(status["you"]["reviews_received"], 3);

    let summary = client.get(&format!("/courses/{course}"), ADMIN).expect(200);
    assert_eq!(summary["participants"].as_array().unwrap().len(), 5);
    assert_eq!(summary["rounds"][0]["phase"], "released");
}

#[test]
fn phase_errors_map_to_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    let course = create_course(&client, json!({}));
    let students = enroll(&client, &course, &NAMES[..3]);
    let r = client.post(&format!("/courses/{course}/rounds"), ADMIN, json!({})).expect(201)["round_id"]
        .as_str()
        .unwrap()
        .to_string();

    let skip = client.post(&format!("/rounds/{r}/phase"), ADMIN, json!({ "target": "rating" }));
    assert_eq!((skip.status, skip.error()), (409, "IllegalTransition"));
    client.post(&format!("/rounds/{r}/submissions"), &students[0].token, json!({ "content_ref": "x" })).expect(201);
    let few = client.post(&format!("/rounds/{r}/phase"), ADMIN, json!({ "target": "reviewing" }));
    assert_eq!((few.status, few.error()), (409, "InsufficientSubmissions"));
    let second = client.post(&format!("/courses/{course}/rounds"), ADMIN, json!({}));
    assert_eq!((second.status, second.error()), (409, "RoundInProgress"));

    client.post(&format!("/rounds/{r}/submissions"), &students[1].token, json!({ "content_ref": "y" })).expect(201);
    advance(&client, &r, "reviewing");
    let late = client.post(&format!("/rounds/{r}/submissions"), &students[2].token, json!({ "content_ref": "z" }));
    assert_eq!((late.status, late.error()), (409, "PhaseClosed"));
    let early = client.post(&format!("/rounds/{r}/phase"), ADMIN, json!({ "target": "rating" }));
    assert_eq!((early.status, early.error()), (409, "IncompleteReviews"));
    let forced =
        client.post(&format!("/rounds/{r}/phase"), ADMIN, json!({ "target": "rating", "force": true })).expect(200);
    assert_eq!(forced["expired"].as_array().unwrap().len(), 2);
}

#[test]
fn validation_errors_are_422() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    let course = create_course(&client, json!({ "grade_min": 1, "grade_max": 10 }));
    let s = enroll(&client, &course, &NAMES[..2]);
    let r = client.post(&format!("/courses/{course}/rounds"), ADMIN, json!({})).expect(201)["round_id"]
        .as_str()
        .unwrap()
        .to_string();

    let cases: Vec<(Reply, &str)> = vec![
        (client.post("/courses", ADMIN, json!({ "k": 0 })), "InvalidConfig"),
        (client.post("/courses", ADMIN, json!({ "course_id": "bad.id" })), "InvalidConfig"),
        (
            client.post(&format!("/courses/{course}/participants"), ADMIN, json!({ "display_name": "" })),
            "InvalidDisplayName",
        ),
        (client.post(&format!("/rounds/{r}/submissions"), &s[0].token, json!({ "content_ref": "" })), "EmptyContent"),
        (
            client.put(&format!("/participants/{}/intro", s[0].id), &s[0].token, json!({ "text": "x".repeat(501) })),
            "TooLong",
        ),
    ];
    for (reply, code) in cases {
        assert_eq!((reply.status, reply.error()), (422, code), "{}", reply.raw);
    }

    for p in &s {
        client.post(&format!("/rounds/{r}/submissions"), &p.token, json!({ "content_ref": "work" })).expect(201);
    }
    advance(&client, &r, "reviewing");
    let task = client.get(&format!("/rounds/{r}/tasks"), &s[0].token).expect(200)["tasks"][0]["task_id"]
        .as_str()
        .unwrap()
        .to_string();
    let review = |body: Value| client.post(&format!("/tasks/{task}/review"), &s[0].token, body);
    let cases = [
        (review(json!({ "prompts": ["", "", "", ""], "grade": 5 })), "AllPromptsEmpty"),
        (review(json!({ "prompts": ["a", "b", "c"], "grade": 5 })), "WrongPromptCount"),
        (review(json!({ "prompts": ["a", "b", "c", "d"], "grade": 11 })), "GradeOutOfRange"),
        (review(json!({ "prompts": ["a", "b", "c", "d"], "grade": "ten" })), "InvalidBody"),
    ];
    for (reply, code) in cases {
        assert_eq!((reply.status, reply.error()), (422, code), "{}", reply.raw);
    }
    let not_mine = client.post(
        &format!("/tasks/{task}/review"),
        &s[1].token,
        json!({ "prompts": ["a", "b", "c", "d"], "grade": 5 }),
    );
    assert_eq!((not_mine.status, not_mine.error()), (403, "NotYourTask"));
    review(json!({ "prompts": ["a", "", "", ""], "grade": 5 })).expect(201);
    let twice = review(json!({ "prompts": ["a", "", "", ""], "grade": 5 }));
    assert_eq!((twice.status, twice.error()), (409, "TaskNotPending"));
}

#[test]
fn tokens_are_scoped_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    let a = create_course(&client, json!({}));
    let b = create_course(&client, json!({ "course_id": "spring-26" }));
    assert_eq!(b, "spring-26");
    let dup = client.post("/courses", ADMIN, json!({ "course_id": "spring-26" }));
    assert_eq!((dup.status, dup.error()), (409, "CourseExists"));
    let sa = enroll(&client, &a, &NAMES[..2]);
    let sb = enroll(&client, &b, &NAMES[..2]);
    let ra = client.post(&format!("/courses/{a}/rounds"), ADMIN, json!({})).expect(201)["round_id"]
        .as_str()
        .unwrap()
        .to_string();

    let missing = client.call("GET", &format!("/rounds/{ra}/tasks"), None, None);
    assert_eq!((missing.status, missing.error()), (401, "MissingToken"));
    let bogus = client.get(&format!("/rounds/{ra}/tasks"), "0123456789abcdef0123456789abcdef");
    assert_eq!((bogus.status, bogus.error()), (401, "InvalidToken"));
    let cross = client.get(&format!("/rounds/{ra}/tasks"), &sb[0].token);
    assert_eq!((cross.status, cross.error()), (401, "WrongCourse"));
    let valid = client.get(&format!("/rounds/{ra}/tasks"), &sa[0].token);
    assert_eq!(valid.status, 200);

    let admin_only = client.post(&format!("/courses/{a}/rounds"), &sa[0].token, json!({}));
    assert_eq!((admin_only.status, admin_only.error()), (403, "AdminOnly"));
    let participant_only = client.get(&format!("/rounds/{ra}/tasks"), ADMIN);
    assert_eq!((participant_only.status, participant_only.error()), (403, "ParticipantOnly"));
    let other = client.get(&format!("/rounds/{ra}/grades?participant={}", sa[1].id), &sa[0].token);
    assert_eq!((other.status, other.error()), (403, "NotYou"));
    let intro = client.put(&format!("/participants/{}/intro", sa[1].id), &sa[0].token, json!({ "text": "hi" }));
    assert_eq!((intro.status, intro.error()), (403, "NotYou"));

    let reissued = client.post(&format!("/courses/{a}/participants/{}/tokens", sa[0].id), ADMIN, json!({})).expect(201);
    assert_ne!(reissued["token"], sa[0].token.as_str());
    assert_eq!(client.get(&format!("/rounds/{ra}"), reissued["token"].as_str().unwrap()).status, 200);
    let unknown = client.post(&format!("/courses/{a}/participants/{a}.p99/tokens"), ADMIN, json!({}));
    assert_eq!((unknown.status, unknown.error()), (403, "UnknownParticipant"));
    let foreign = client.post(&format!("/courses/{a}/participants/{}/tokens", sb[0].id), ADMIN, json!({}));
    assert_eq!(foreign.status, 403);
}

#[test]
fn expired_tokens_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.token_ttl_hours = 0;
    let (_server, client) = start(cfg);
    let c = create_course(&client, json!({}));
    let s = enroll(&client, &c, &NAMES[..1]);
    let r = client.get(&format!("/courses/{c}"), &s[0].token);
    assert_eq!((r.status, r.error()), (401, "TokenExpired"));
}

#[test]
fn unknown_ids_are_404() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    let c = create_course(&client, json!({}));
    let s = enroll(&client, &c, &NAMES[..1]);
    let cases = [
        (client.get(&format!("/rounds/{c}.r9"), &s[0].token), "UnknownRound"),
        (
            client.post(
                &format!("/tasks/{c}.r9.t1/review"),
                &s[0].token,
                json!({ "prompts": ["a","b","c","d"], "grade": 1 }),
            ),
            "UnknownTask",
        ),
        (client.get("/courses/nope", ADMIN), "UnknownCourse"),
        (client.post("/courses/nope/participants", ADMIN, json!({ "display_name": "x" })), "UnknownCourse"),
        (client.get("/no/such/route", ADMIN), "NoRoute"),
    ];
    for (reply, code) in cases {
        assert_eq!((reply.status, reply.error()), (404, code), "{}", reply.raw);
    }
}

/// Garbage bodies on every writing endpoint yield documented 4xx codes.
#[test]
fn malformed_input_never_yields_500() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    let c = create_course(&client, json!({}));
    let s = enroll(&client, &c, &NAMES[..2]);
    let r = client.post(&format!("/courses/{c}/rounds"), ADMIN, json!({})).expect(201)["round_id"]
        .as_str()
        .unwrap()
        .to_string();

    let targets: Vec<(&str, String, String)> = vec![
        ("POST", "/courses".into(), ADMIN.into()),
        ("POST", format!("/courses/{c}/participants"), ADMIN.into()),
        ("POST", format!("/courses/{c}/rounds"), ADMIN.into()),
        ("POST", format!("/rounds/{r}/phase"), ADMIN.into()),
        ("POST", format!("/rounds/{r}/submissions"), s[0].token.clone()),
        ("PUT", format!("/participants/{}/intro", s[0].id), s[0].token.clone()),
        ("POST", format!("/tasks/{r}.t1/review"), s[0].token.clone()),
        ("POST", format!("/reviews/{r}.v1/rating"), s[0].token.clone()),
        ("POST", format!("/reviews/{r}.v1/messages"), s[0].token.clone()),
    ];
    let bodies: Vec<(&str, Vec<u8>)> = vec![
        ("application/json", b"".to_vec()),
        ("application/json", b"{".to_vec()),
        ("application/json", b"[]".to_vec()),
        ("application/json", b"null".to_vec()),
        ("application/json", b"{\"stars\": 4.5, \"grade\": {}}".to_vec()),
        ("application/json", b"{\"target\": \"finished\"}".to_vec()),
        ("application/json", b"{\"prompts\": [1,2,3,4], \"grade\": 1e400}".to_vec()),
        ("application/json", b"{\"display_name\": \"\\ud800\"}".to_vec()),
        ("application/json", vec![0xff, 0xfe, 0x00, 0x7b]),
        ("text/plain", b"{\"content_ref\":\"x\"}".to_vec()),
        ("application/json", format!("{{\"content_ref\": \"{}\"}}", "x".repeat(100_001)).into_bytes()),
    ];
    let queries = [
        format!("/rounds/{r}/tasks?reviewer=%ff"),
        format!("/rounds/{r}/feedback?participant"),
        format!("/rounds/{r}/grades?participant=a&participant=b"),
        "/rounds/%E2%82/grades".to_string(),
    ];
    let mut seen = 0;
    for (method, path, token) in &targets {
        for (ct, body) in &bodies {
            let reply = client.raw(method, path, Some(token), Some((ct, body)));
            assert!(
                (400..500).contains(&reply.status),
                "{method} {path} {:?} -> {} {}",
                String::from_utf8_lossy(body),
                reply.status,
                reply.raw
            );
            assert!(ipr_server::ERROR_CODES.contains(&reply.error()), "{method} {path}: {}", reply.raw);
            assert_eq!(ipr_server::status_for(reply.error()).as_u16(), reply.status);
            seen += 1;
        }
    }
    for q in &queries {
        let reply = client.get(q, &s[0].token);
        assert!((400..500).contains(&reply.status) || reply.status == 200, "{q} -> {} {}", reply.status, reply.raw);
        seen += 1;
    }
    assert_eq!(seen, targets.len() * bodies.len() + queries.len());
}

/// Every documented route is routed, and nothing answers for undocumented paths.
#[test]
fn route_table_matches_router() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, client) = start(config(dir.path()));
    for route in ipr_server::route_table() {
        let path = route
            .path
            .replace("{c}", "c1")
            .replace("{p}", "c1.p1")
            .replace("{r}", "c1.r1")
            .replace("{t}", "c1.r1.t1")
            .replace("{v}", "c1.r1.v1");
        let body = (route.method != "GET").then(|| json!({}));
        let reply = client.call(route.method, &path, None, body);
        let expected = if route.access == ipr_server::Access::Public { 200 } else { 401 };
        assert_eq!(reply.status, expected, "{} {}: {}", route.method, route.path, reply.raw);
    }
    let listed = client.call("GET", "/routes", None, None).expect(200);
    assert_eq!(listed.as_array().unwrap().len(), ipr_server::route_table().len());
    assert_eq!(client.call("DELETE", "/courses", None, None).status, 405);
}

#[test]
fn api_reference_is_current() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/api.md");
    let rendered = ipr_server::render_markdown();
    if std::env::var_os("IPR_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &rendered).unwrap();
    }
    let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
    assert!(on_disk == rendered, "docs/api.md is stale; rerun with IPR_BLESS=1");
}
