#![allow(dead_code)]

use std::path::Path;

use ipr_server::{spawn, RunningServer, ServerConfig};
use serde_json::{json, Value};
use ureq::http::Request;

pub const ADMIN: &str = "admin-secret";

pub fn config(dir: &Path) -> ServerConfig {
    ServerConfig {
        port: 0,
        data_dir: dir.to_path_buf(),
        admin_token: Some(ADMIN.into()),
        snapshot_every: 0,
        ..ServerConfig::default()
    }
}

pub fn start(cfg: ServerConfig) -> (RunningServer, Client) {
    let server = spawn(cfg).expect("server starts");
    let client = Client::new(&server.url(""));
    (server, client)
}

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

    #[track_caller]
    pub fn expect(self, status: u16) -> Value {
        assert_eq!(self.status, status, "unexpected reply: {}", self.raw);
        self.json
    }
}

/// Blocking JSON client. Every raw response body is kept in `log` so tests
/// can scan everything the service ever said.
pub struct Client {
    agent: ureq::Agent,
    base: String,
    pub log: std::cell::RefCell<Vec<String>>,
}

impl Client {
    pub fn new(base: &str) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { agent, base: base.to_string(), log: Default::default() }
    }

    pub fn raw(&self, method: &str, path: &str, token: Option<&str>, body: Option<(&str, &[u8])>) -> Reply {
        let mut builder = Request::builder().method(method).uri(format!("{}{}", self.base, path));
        if let Some(t) = token {
            builder = builder.header("Authorization", format!("Bearer {t}"));
        }
        let result = match body {
            Some((content_type, bytes)) => {
                let req = builder.header("Content-Type", content_type).body(bytes.to_vec()).unwrap();
                self.agent.run(req)
            }
            None => self.agent.run(builder.body(()).unwrap()),
        };
        let mut resp = result.expect("transport ok");
        let status = resp.status().as_u16();
        let raw = resp.body_mut().read_to_string().unwrap_or_default();
        let json = serde_json::from_str(&raw).unwrap_or(Value::Null);
        self.log.borrow_mut().push(raw.clone());
        Reply { status, raw, json }
    }

    pub fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        match body {
            Some(v) => {
                let bytes = serde_json::to_vec(&v).unwrap();
                self.raw(method, path, token, Some(("application/json", &bytes)))
            }
            None => self.raw(method, path, token, None),
        }
    }

    pub fn get(&self, path: &str, token: &str) -> Reply {
        self.call("GET", path, Some(token), None)
    }

    pub fn post(&self, path: &str, token: &str, body: Value) -> Reply {
        self.call("POST", path, Some(token), Some(body))
    }

    pub fn put(&self, path: &str, token: &str, body: Value) -> Reply {
        self.call("PUT", path, Some(token), Some(body))
    }
}

#[derive(Debug, Clone)]
pub struct Student {
    pub id: String,
    pub token: String,
    pub name: String,
}

pub fn create_course(client: &Client, body: Value) -> String {
    let v = client.post("/courses", ADMIN, body).expect(201);
    v["course_id"].as_str().unwrap().to_string()
}

pub fn enroll(client: &Client, course: &str, names: &[&str]) -> Vec<Student> {
    names
        .iter()
        .map(|name| {
            let v = client
                .post(&format!("/courses/{course}/participants"), ADMIN, json!({ "display_name": name }))
                .expect(201);
            Student {
                id: v["participant_id"].as_str().unwrap().to_string(),
                token: v["token"].as_str().unwrap().to_string(),
                name: name.to_string(),
            }
        })
        .collect()
}

pub fn advance(client: &Client, round: &str, target: &str) -> Value {
    client.post(&format!("/rounds/{round}/phase"), ADMIN, json!({ "target": target })).expect(200)
}

pub fn long_prompt(tag: &str) -> String {
    format!(
        "{tag}: the argument in section two needs a concrete example, and the conclusion should restate \
         the main claim before listing the limitations you found while testing the prototype"
    )
}
