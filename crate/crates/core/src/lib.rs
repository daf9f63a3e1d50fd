//! Learning, generating and auditing cloud-storage bucket names.
//!
//! The crate is organized around the scanning loop: corpora and the
//! [`analyzer`] describe how names are built, [`generators`] learn those
//! structures from known names and sample fresh candidates, [`validation`]
//! probes candidates against providers (or the offline [`namespace`]),
//! [`security`] scores public buckets and [`pipeline`] ties it together.

pub mod analyzer;
pub mod corpus;
pub mod error;
pub mod generators;
pub mod name;
pub mod namespace;
pub mod pipeline;
pub mod records;
pub mod report;
pub mod security;
pub mod validation;

pub use error::{Error, Result};
