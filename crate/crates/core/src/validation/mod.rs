//! Deciding whether a bucket exists and whether it is public.
//!
//! A probe is one GET against a provider's global endpoint. The response is
//! decoded as 404 nonexistent, 403 private, 200 public; Alibaba additionally
//! answers 200 for website-mode buckets, which only count as public when the
//! listing document is returned. Other codes are indeterminate and retried.

#[cfg(feature = "live")]
pub mod live;
mod ratelimit;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[cfg(feature = "live")]
pub use live::{check_guardrail, parse_acl, parse_listing, LiveBackend, LiveConfig, ACK_ENV};
pub use ratelimit::RateLimiter;

use crate::error::{Error, Result};
use crate::name;
use crate::pipeline::DedupStore;
use crate::security::BucketContents;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    Aws,
    Gcp,
    Alibaba,
}

impl Provider {
    pub const ALL: [Provider; 3] = [Provider::Aws, Provider::Gcp, Provider::Alibaba];

    pub fn as_str(self) -> &'static str {
        match self {
            Provider::Aws => "aws",
            Provider::Gcp => "gcp",
            Provider::Alibaba => "alibaba",
        }
    }

    /// Host pattern with a single `{name}` placeholder.
    pub fn host_template(self) -> &'static str {
        match self {
            Provider::Aws => "{name}.s3.amazonaws.com",
            Provider::Gcp => "{name}.storage.googleapis.com",
            Provider::Alibaba => "{name}.oss-us-west-1.aliyuncs.com",
        }
    }

    pub fn host(self, name: &str) -> String {
        self.host_template().replace("{name}", name)
    }

    /// Parses a comma-separated list such as `aws,gcp`.
    pub fn parse_list(s: &str) -> Result<Vec<Provider>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let p: Provider = part.parse()?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no providers given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aws" | "s3" => Ok(Provider::Aws),
            "gcp" | "gcs" => Ok(Provider::Gcp),
            "alibaba" | "oss" => Ok(Provider::Alibaba),
            _ => Err(Error::Config(format!("unknown provider {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeState {
    Nonexistent,
    Private,
    Public,
    /// No usable answer; retried, then recorded as such.
    Indeterminate,
}

impl ProbeState {
    /// The bucket exists (private or public).
    pub fn is_valid(self) -> bool {
        matches!(self, ProbeState::Private | ProbeState::Public)
    }
}

pub fn decode_status(provider: Provider, status: u16, listable: bool) -> ProbeState {
    match status {
        404 => ProbeState::Nonexistent,
        403 => ProbeState::Private,
        200 if provider == Provider::Alibaba && !listable => ProbeState::Private,
        200 => ProbeState::Public,
        _ => ProbeState::Indeterminate,
    }
}

/// Raw answer to one GET. Status 0 means no response (timeout, refused
/// connection).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeResponse {
    pub status: u16,
    pub listable: bool,
}

/// A source of bucket answers: the live clouds or the synthetic namespace.
///
/// An `Err` from either method is a backend failure that aborts the batch;
/// transient trouble is reported as an indeterminate status instead.
pub trait ProbeBackend: Send + Sync {
    fn probe(&self, name: &str, provider: Provider) -> Result<ProbeResponse>;

    /// ACL and file listing of a public bucket.
    fn inspect(&self, name: &str, provider: Provider) -> Result<BucketContents>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub name: String,
    pub provider: Provider,
    pub state: ProbeState,
    pub status_code: u16,
    pub listable: bool,
    pub retries: u32,
    /// Milliseconds since the Unix epoch.
    pub probed_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    /// Delay before the first retry; doubled each time.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Probes one (name, provider) pair, retrying indeterminate answers.
pub fn probe(
    backend: &dyn ProbeBackend,
    name: &str,
    provider: Provider,
    retry: &RetryPolicy,
) -> Result<ValidationRecord> {
    name::check(name)?;
    let mut retries = 0;
    loop {
        let resp = backend.probe(name, provider)?;
        let state = decode_status(provider, resp.status, resp.listable);
        if state != ProbeState::Indeterminate || retries >= retry.max_retries {
            return Ok(ValidationRecord {
                name: name.to_owned(),
                provider,
                state,
                status_code: resp.status,
                listable: resp.listable,
                retries,
                probed_at: now_millis(),
            });
        }
        let delay = retry.base_delay * 2u32.pow(retries);
        if !delay.is_zero() {
            std::thread::sleep(delay);
        }
        retries += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchOptions {
    pub parallelism: usize,
    pub retry: RetryPolicy,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            parallelism: 8,
            retry: RetryPolicy::default(),
        }
    }
}

/// Records for the names whose every provider probe finished before a
/// backend failure, plus the failure.
#[derive(Debug)]
pub struct PartialBatch {
    pub records: Vec<ValidationRecord>,
    pub completed: Vec<String>,
    pub error: Error,
}

/// Probes every (name, provider) pair with up to `parallelism` concurrent
/// probes. Records come back grouped by name in input order, providers in
/// the given order.
pub fn probe_all(
    backend: &dyn ProbeBackend,
    names: &[String],
    providers: &[Provider],
    opts: &BatchOptions,
) -> std::result::Result<Vec<ValidationRecord>, PartialBatch> {
    let total = names.len() * providers.len();
    let slots: Vec<OnceLock<ValidationRecord>> = (0..total).map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let workers = opts.parallelism.clamp(1, total.max(1));

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    return;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    return;
                }
                let name = &names[i / providers.len()];
                let provider = providers[i % providers.len()];
                match probe(backend, name, provider, &opts.retry) {
                    Ok(r) => {
                        let _ = slots[i].set(r);
                    }
                    Err(e) => {
                        abort.store(true, Ordering::Relaxed);
                        failure.lock().expect("failure lock").get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    let error = failure.into_inner().expect("failure lock");
    let mut records = Vec::with_capacity(total);
    let mut completed = Vec::new();
    let mut slots = slots.into_iter();
    for name in names {
        let group: Vec<Option<ValidationRecord>> = slots
            .by_ref()
            .take(providers.len())
            .map(OnceLock::into_inner)
            .collect();
        if group.iter().all(Option::is_some) {
            records.extend(group.into_iter().flatten());
            completed.push(name.clone());
        }
    }
    match error {
        None => Ok(records),
        Some(error) => Err(PartialBatch {
            records,
            completed,
            error,
        }),
    }
}

#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub records: Vec<ValidationRecord>,
    /// Names skipped because the store (or this batch) already had them.
    pub duplicates: usize,
    /// Names skipped for failing the provider naming rules.
    pub rejected: usize,
    /// Set when a backend failure cut the batch short; re-running the same
    /// batch against the same store probes only what is left.
    pub interrupted: Option<String>,
}

/// Probes each fresh name on every provider. Names already in `store` are
/// skipped and counted as duplicates; names whose probes all complete are
/// added to the store.
pub fn validate_batch(
    backend: &dyn ProbeBackend,
    names: &[String],
    providers: &[Provider],
    store: &DedupStore,
    opts: &BatchOptions,
) -> Result<BatchOutcome> {
    if names.is_empty() {
        return Err(Error::EmptyInput("validation batch"));
    }
    if providers.is_empty() {
        return Err(Error::Config("no providers given".into()));
    }
    let mut outcome = BatchOutcome::default();
    let mut fresh = Vec::new();
    let mut in_batch = std::collections::HashSet::new();
    for n in names {
        if !name::is_legal(n) {
            outcome.rejected += 1;
        } else if store.contains(n) || !in_batch.insert(n.as_str()) {
            outcome.duplicates += 1;
        } else {
            fresh.push(n.clone());
        }
    }
    let completed = match probe_all(backend, &fresh, providers, opts) {
        Ok(records) => {
            outcome.records = records;
            fresh
        }
        Err(partial) => {
            outcome.records = partial.records;
            outcome.interrupted = Some(partial.error.to_string());
            partial.completed
        }
    };
    for n in &completed {
        store.insert(n)?;
    }
    store.flush()?;
    Ok(outcome)
}
