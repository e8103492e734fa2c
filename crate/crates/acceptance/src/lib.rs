//! Scripted clients for the acceptance suite.
//!
//! [`Client`] is a small blocking JSON client that keeps every response body
//! it receives. [`run_lifecycle`] drives one course through a full round with
//! six students using nothing but the HTTP API.

use std::cell::RefCell;

use serde_json::{json, Value};
use ureq::http::Request;

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub raw: String,
    pub json: Value,
}

impl Reply {
    pub fn error(&self) -> &str {
        self.json["error"].as_str().unwrap_or("")
    }

    /// The JSON body if the status matches, otherwise a description of the reply.
    pub fn expect(self, status: u16) -> Result<Value, String> {
        if self.status == status {
            Ok(self.json)
        } else {
            Err(format!("expected {status}, got {}: {}", self.status, self.raw))
        }
    }
}

pub struct Client {
    agent: ureq::Agent,
    base: String,
    pub bodies: RefCell<Vec<String>>,
}

impl Client {
    pub fn new(base: &str) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { agent, base: base.trim_end_matches('/').to_string(), bodies: RefCell::default() }
    }

    pub fn call(&self, method: &str, path: &str, token: &str, body: Option<Value>) -> Result<Reply, String> {
        let builder = Request::builder()
            .method(method)
            .uri(format!("{}{path}", self.base))
            .header("Authorization", format!("Bearer {token}"));
        let sent = match body {
            Some(v) => {
                let req = builder
                    .header("Content-Type", "application/json")
                    .body(v.to_string())
                    .map_err(|e| e.to_string())?;
                self.agent.run(req)
            }
            None => self.agent.run(builder.body(()).map_err(|e| e.to_string())?),
        };
        let mut resp = sent.map_err(|e| format!("{method} {path}: {e}"))?;
        let status = resp.status().as_u16();
        let raw = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        let json = serde_json::from_str(&raw).unwrap_or(Value::Null);
        self.bodies.borrow_mut().push(raw.clone());
        Ok(Reply { status, raw, json })
    }

    pub fn get(&self, path: &str, token: &str) -> Result<Reply, String> {
        self.call("GET", path, token, None)
    }

    pub fn post(&self, path: &str, token: &str, body: Value) -> Result<Reply, String> {
        self.call("POST", path, token, Some(body))
    }

    pub fn put(&self, path: &str, token: &str, body: Value) -> Result<Reply, String> {
        self.call("PUT", path, token, Some(body))
    }
}

#[derive(Debug, Clone)]
pub struct Student {
    pub id: String,
    pub token: String,
    pub name: String,
    pub intro: String,
}

/// What a lifecycle run produced.
#[derive(Debug, Clone)]
pub struct Lifecycle {
    pub course: String,
    pub round: String,
    pub students: Vec<Student>,
}

pub const NAMES: [&str; 6] =
    ["Ottilie Brannagh", "Severin Quayle", "Marisol Tenpenny", "Iker Waldgrave", "Nkechi Holloway", "Tamsin Vorhees"];

fn text(v: &Value, key: &str) -> Result<String, String> {
    v[key].as_str().map(str::to_string).ok_or_else(|| format!("no {key:?} in {v}"))
}

fn prompt(i: usize, j: usize) -> String {
    format!("Point {j}: the second paragraph would be stronger with a worked example, draft {i}")
}

/// Creates a course under `condition` and plays one round through
/// submission, reviewing, rating and release. Students try to record intros,
/// peek at grades before they are allowed to, message their reviewers and
/// get replies.
pub fn run_lifecycle(client: &Client, admin: &str, condition: &str, seed: u64) -> Result<Lifecycle, String> {
    let course = text(
        &client.post("/courses", admin, json!({ "condition": condition, "seed": seed }))?.expect(201)?,
        "course_id",
    )?;
    let mut students = Vec::new();
    for name in NAMES {
        let v = client
            .post(&format!("/courses/{course}/participants"), admin, json!({ "display_name": name }))?
            .expect(201)?;
        let first = name.split(' ').next().unwrap_or(name);
        students.push(Student {
            id: text(&v, "participant_id")?,
            token: text(&v, "token")?,
            name: name.to_string(),
            intro: format!("Hello, {first} here, I mostly write about tidal energy"),
        });
    }
    let blind = condition.starts_with("blind");
    for s in &students {
        let reply = client.put(&format!("/participants/{}/intro", s.id), &s.token, json!({ "text": s.intro }))?;
        let want = if blind { 409 } else { 200 };
        if reply.status != want {
            return Err(format!("intro: expected {want}, got {}", reply.raw));
        }
    }

    let round = text(&client.post(&format!("/courses/{course}/rounds"), admin, json!({}))?.expect(201)?, "round_id")?;
    for s in &students {
        client
            .post(
                &format!("/rounds/{round}/submissions"),
                &s.token,
                json!({ "content_ref": format!("essay-{}", s.id) }),
            )?
            .expect(201)?;
    }
    client.post(&format!("/rounds/{round}/phase"), admin, json!({ "target": "reviewing" }))?.expect(200)?;

    let mut written: Vec<(usize, String)> = Vec::new();
    for (i, s) in students.iter().enumerate() {
        let tasks = client.get(&format!("/rounds/{round}/tasks"), &s.token)?.expect(200)?;
        for (j, task) in tasks["tasks"].as_array().ok_or("no tasks")?.iter().enumerate() {
            let body =
                json!({ "prompts": [prompt(i, 1), prompt(i, 2), "", "ok"], "grade": 55 + ((i * 11 + j * 7) % 45) });
            let v = client.post(&format!("/tasks/{}/review", text(task, "task_id")?), &s.token, body)?.expect(201)?;
            written.push((i, text(&v, "review_id")?));
        }
        let early = client.get(&format!("/rounds/{round}/grades"), &s.token)?;
        if early.status != 409 {
            return Err(format!("grades readable during reviewing: {}", early.raw));
        }
    }
    client.post(&format!("/rounds/{round}/phase"), admin, json!({ "target": "rating" }))?.expect(200)?;

    for (i, s) in students.iter().enumerate() {
        let fb = client.get(&format!("/rounds/{round}/feedback"), &s.token)?.expect(200)?;
        let items = fb["feedback"].as_array().ok_or("no feedback")?.clone();
        for (j, item) in items.iter().enumerate() {
            let v = text(item, "review_id")?;
            client
                .post(
                    &format!("/reviews/{v}/messages"),
                    &s.token,
                    json!({ "body": "Could you say more about point 2?" }),
                )?
                .expect(201)?;
            let grades = client.get(&format!("/rounds/{round}/grades"), &s.token)?;
            if grades.status != 409 {
                return Err(format!("grades readable with unrated feedback: {}", grades.raw));
            }
            client.post(&format!("/reviews/{v}/rating"), &s.token, json!({ "stars": 1 + (i + j) % 5 }))?.expect(201)?;
        }
        client.get(&format!("/rounds/{round}/grades"), &s.token)?.expect(200)?;
    }
    for (i, v) in &written {
        let s = &students[*i];
        client.get(&format!("/reviews/{v}/messages"), &s.token)?.expect(200)?;
        client
            .post(&format!("/reviews/{v}/messages"), &s.token, json!({ "body": "Sure, see the example I added." }))?
            .expect(201)?;
    }
    client.post(&format!("/rounds/{round}/phase"), admin, json!({ "target": "released" }))?.expect(200)?;
    for s in &students {
        client.get(&format!("/rounds/{round}"), &s.token)?.expect(200)?;
        client.get(&format!("/rounds/{round}/feedback"), &s.token)?.expect(200)?;
        client.get(&format!("/rounds/{round}/grades"), &s.token)?.expect(200)?;
    }
    client.get(&format!("/courses/{course}"), admin)?.expect(200)?;
    Ok(Lifecycle { course, round, students })
}
