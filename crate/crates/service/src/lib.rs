//! Live preference elicitation over HTTP, plus the `prefgp` command line.
//!
//! Routes (see `api-schema.json` for payloads):
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create a session from a [`session::SessionConfig`] |
//! | GET | `/sessions/{id}` | config, status and answer history |
//! | GET | `/sessions/{id}/query` | the pending query, selected on first call |
//! | POST | `/sessions/{id}/response` | `{"choice": "first" \| "second"}` |
//! | GET | `/sessions/{id}/surface?grid=G` | posterior mean/std grid (2-d environments) |
//! | GET | `/healthz` | liveness |
//!
//! Errors are `{"code": ..., "message": ...}` with a matching HTTP status.

pub mod api;
pub mod cli;
pub mod error;
pub mod session;
pub mod store;

pub use api::router;
pub use error::ServiceError;
pub use session::{Choice, Session, SessionConfig};
pub use store::SessionStore;
