//! Contract risk review over nested contract knowledge graphs.
//!
//! Builds on [`nckg_core`] with everything that needs the standard
//! library: the LLM gateway (HTTP and scripted mock), prompt templates,
//! clause-to-graph extraction with file-based staging, the
//! retrieval-augmented review pipeline and its baselines, evaluation
//! reports, and configuration.

pub mod config;
pub mod construct;
pub mod gateway;
pub mod ioutil;
pub mod report;
pub mod review;
pub mod templates;

pub use config::AppConfig;
pub use construct::{Clause, ClauseGraph, StagedExtraction};
pub use gateway::{ChatRequest, ChatResponse, Gateway, GatewayError};
pub use review::{ReviewMode, RetrievalBundle, RiskVerdict};
pub use templates::TemplateId;
