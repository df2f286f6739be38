//! HTTP API over a durable assessment store.

pub mod api;
pub mod config;
pub mod error;

use std::sync::Arc;

use procap_core::{BankError, ContentBank, Store, StoreError};
use tokio::net::TcpListener;

pub use api::{router, AppState};
pub use config::{ConfigError, ServiceConfig};
pub use error::{ApiError, ErrorBody};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("network error: {0}")]
    Io(#[from] std::io::Error),
}

/// Loads the bank, opens the store and serves until SIGINT/SIGTERM.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let bank = Arc::new(ContentBank::load_path(&config.bank_path)?);
    let store = Store::open(&config.data_dir, bank)?;
    let listener = TcpListener::bind(("0.0.0.0", config.port)).await?;
    tracing::info!(addr = %listener.local_addr()?, data_dir = %config.data_dir.display(), "listening");
    let state = AppState::new(store, config.facilitator_key);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    tracing::info!("stopped");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
