//! Serves the API for the acceptance suite. Configured from the environment
//! like `ipr-server`; prints the bound address, then answers `dump <course>`
//! lines on stdin with the course's in-memory state as one JSON line.

use std::io::{BufRead, Write};

use ipr_core::CourseId;
use ipr_server::{spawn, ServerConfig};

fn main() -> anyhow::Result<()> {
    let server = spawn(ServerConfig::load(None, std::env::vars())?)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", server.addr())?;
    out.flush()?;
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        if let Some(course) = line.strip_prefix("dump ") {
            let state = server.app().course_state(&CourseId::new(course.trim()));
            writeln!(out, "{}", serde_json::to_string(&state)?)?;
            out.flush()?;
        }
    }
    Ok(())
}
