//! HTTP service over a shared, revisioned risk register.

mod api;
mod error;
mod routes;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::*;
pub use error::{ApiError, FieldError};
pub use routes::router;
pub use store::{RegisterStore, StoreError, StoreState};

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory served at `/`; a small built-in page is used when unset.
    pub static_dir: Option<PathBuf>,
    /// Where `POST /api/save` writes the register.
    pub save_path: Option<PathBuf>,
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, store: Arc<RegisterStore>, config: ServiceConfig) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(store, config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await
}
