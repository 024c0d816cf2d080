//! Quantification toolkit built on the potential-reliability law.
//!
//! - [`law`]: divergence-based failure-intensity bounds, the exact
//!   Poisson-binomial operating probability and the required-coverage solver.
//! - [`sites`]: the sensitive-site semantics matrix and its counting rules.
//! - [`monitor`]: event-driven test sessions, status reports and sigma plans.
//! - [`relevance`]: tokenization, per-document term tables and relevance
//!   ranking.

pub mod law;
pub mod monitor;
pub mod relevance;
pub mod sites;

pub use law::{Bounds, BoundsReport, ElementProbabilities, LambdaMax, LawError};
pub use monitor::{MonitorSession, SigmaTarget, StatusReport, TestEvent};
pub use relevance::{Cqsm, DocumentIndex, RelevanceMode, RelevanceScore, TokenizerConfig};
pub use sites::{SiteMatrix, SiteModel, SiteProbabilityProfile};
