//! Security scoring of buckets: ACL misconfiguration flags, sensitive file
//! names and content categories. Only metadata is examined, never file
//! contents.

mod acl;
mod category;
mod sensitive;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use acl::{classify_acl, AclRecord, Action, Flag, Grant, Grantee, NormalizationTable, Permission};
pub use category::{categorize_bucket, Category, CategoryTable, THRESHOLD_PERCENT};
pub use sensitive::{detect_sensitive, PatternSet, SensitiveMatch, SensitiveRule};

use crate::error::Result;
use crate::validation::{ProbeState, Provider};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileMeta {
    pub key: String,
    pub size: u64,
    pub etag: String,
    /// ISO 8601 timestamp as reported by the listing.
    pub last_modified: String,
}

impl FileMeta {
    /// Metadata with only a key, for tests and synthetic listings.
    pub fn named(key: impl Into<String>) -> Self {
        FileMeta {
            key: key.into(),
            size: 0,
            etag: String::new(),
            last_modified: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketSecurityProfile {
    pub name: String,
    pub provider: Provider,
    pub state: ProbeState,
    /// Whether the bucket's ACL could be read.
    pub acl_readable: bool,
    /// Normalized actions granted to the public, when the ACL was readable.
    pub public_actions: BTreeSet<Action>,
    pub flags: BTreeSet<Flag>,
    pub sensitive_matches: Vec<SensitiveMatch>,
    pub category: Option<String>,
    pub file_count: usize,
}

impl BucketSecurityProfile {
    pub fn is_misconfigured(&self) -> bool {
        self.flags.iter().any(|f| *f != Flag::SensitiveContent)
    }

    pub fn is_sensitive(&self) -> bool {
        self.flags.contains(&Flag::SensitiveContent)
    }
}

/// Policy tables used to score buckets.
#[derive(Clone, Debug)]
pub struct SecurityContext {
    pub normalization: NormalizationTable,
    pub patterns: PatternSet,
    pub categories: CategoryTable,
}

impl SecurityContext {
    pub fn bundled() -> Self {
        SecurityContext {
            normalization: NormalizationTable::bundled(),
            patterns: PatternSet::bundled(),
            categories: CategoryTable::bundled(),
        }
    }
}

/// Everything a backend can tell about a bucket beyond its status.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketContents {
    pub acl: Option<AclRecord>,
    pub files: Vec<FileMeta>,
}

pub fn profile_bucket(
    name: &str,
    provider: Provider,
    state: ProbeState,
    contents: &BucketContents,
    ctx: &SecurityContext,
) -> Result<BucketSecurityProfile> {
    let (mut flags, public_actions) = match &contents.acl {
        Some(acl) => {
            let actions = ctx
                .normalization
                .normalize(acl)?
                .into_iter()
                .filter(|(g, _)| g.is_public())
                .map(|(_, a)| a)
                .collect();
            (classify_acl(acl, &ctx.normalization)?, actions)
        }
        None => (BTreeSet::new(), BTreeSet::new()),
    };
    let sensitive_matches = detect_sensitive(&contents.files, &ctx.patterns);
    if !sensitive_matches.is_empty() {
        flags.insert(Flag::SensitiveContent);
    }
    Ok(BucketSecurityProfile {
        name: name.to_owned(),
        provider,
        state,
        acl_readable: contents.acl.is_some(),
        public_actions,
        flags,
        sensitive_matches,
        category: categorize_bucket(&contents.files, &ctx.categories),
        file_count: contents.files.len(),
    })
}
