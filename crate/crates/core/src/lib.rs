//! Detection of explanation needs in app reviews.
//!
//! The crate covers the whole experimental pipeline: loading labeled review
//! corpora ([`corpus`]), tokenizing and embedding text ([`features`]), a
//! question-mark/"why" baseline ([`rule_based`]), seven classic classifiers
//! ([`classifiers`]), cross-validated and holdout evaluation with a
//! recall-weighted F-measure ([`evaluation`]) and inter-annotator agreement
//! ([`agreement`]).

pub mod agreement;
pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod features;
pub mod rule_based;
pub mod seed;

pub use error::{Error, Result};
