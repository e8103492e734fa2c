use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ipr_server::{render_markdown, App, ServerConfig};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "ipr-server", version, about = "Identified peer review HTTP service")]
struct Cli {
    /// key=value configuration file; PORT, DATA_DIR, LOG_LEVEL etc. in the environment override it
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the service (default)
    Serve,
    /// Print the endpoint reference as Markdown
    Routes,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(Cmd::Routes) = cli.command {
        print!("{}", render_markdown());
        return Ok(());
    }
    let config = ServerConfig::load(cli.config.as_deref(), std::env::vars())?;
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&config.log_level).unwrap_or_else(|_| EnvFilter::new("info")))
        .init();

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", config.bind, config.port);
        let app = Arc::new(App::open(config)?);
        let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!(addr = %listener.local_addr()?, courses = app.course_ids().len(), "listening");
        ipr_server::serve(app, listener, async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await?;
        Ok(())
    })
}
