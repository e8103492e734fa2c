//! HTTP/JSON service for identified peer review courses.
//!
//! Admins create courses, enroll participants (receiving a bearer token per
//! participant) and move rounds through their phases. Participants submit
//! work, review, rate the feedback they received and talk to their reviewers.
//! Each course is persisted as an append-only event log with periodic
//! snapshots under `DATA_DIR/courses/<id>/`; tokens live in
//! `DATA_DIR/tokens.json`.

pub mod app;
pub mod config;
pub mod docs;
pub mod error;
pub mod routes;
pub mod tokens;

use std::sync::Arc;

pub use app::{App, Caller};
pub use config::ServerConfig;
pub use docs::{render_markdown, route_table, Access, RouteDoc};
pub use error::{status_for, ApiError, ERROR_CODES};
pub use routes::router;

/// Binds `addr` and serves until `shutdown` resolves.
pub async fn serve(
    app: Arc<App>,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(app)).with_graceful_shutdown(shutdown).await
}

/// A service running on its own thread and runtime. Dropping it stops the
/// service and waits for the thread to finish.
pub struct RunningServer {
    addr: std::net::SocketAddr,
    app: Arc<App>,
    stop: Option<std::sync::mpsc::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl RunningServer {
    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub fn app(&self) -> &Arc<App> {
        &self.app
    }

    pub fn stop(mut self) -> std::io::Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> std::io::Result<()> {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(handle) => handle.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}

/// Opens the data directory and starts serving on `config.bind:config.port`
/// (port 0 picks a free one).
pub fn spawn(config: ServerConfig) -> anyhow::Result<RunningServer> {
    let listener = std::net::TcpListener::bind((config.bind.as_str(), config.port))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let app = Arc::new(App::open(config)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    let (tx, rx) = std::sync::mpsc::channel::<()>();
    let served = app.clone();
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            serve(served, listener, async move {
                let _ = tokio::task::spawn_blocking(move || rx.recv()).await;
            })
            .await
        })
    });
    Ok(RunningServer { addr, app, stop: Some(tx), thread: Some(thread) })
}
