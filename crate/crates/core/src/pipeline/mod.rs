//! The extraction → validation → generation loop.
//!
//! A run first validates the extracted seed names, then repeatedly trains
//! the configured generator on every valid name seen so far, draws a batch
//! of fresh candidates (claimed in the [`DedupStore`] as they are drawn),
//! validates them and hands public buckets to a security consumer thread.
//!
//! With an output directory the run keeps four line-delimited logs
//! (`dedup.log`, `records.jsonl`, `metrics.jsonl`, `profiles.jsonl`) and a
//! `checkpoint.json`. A run that dies, for example on a backend failure,
//! resumes from the last checkpoint when started again with the same
//! config and produces the same results as an uninterrupted run.

mod dedup;

pub use dedup::DedupStore;

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusSet;
use crate::error::{Error, Result};
use crate::generators::{
    continella_from, CandidateStream, DerivationCache, GeneratorKind, GeneratorModel, Sampler,
    UniformRandom,
};
use crate::name;
use crate::security::{profile_bucket, BucketSecurityProfile, SecurityContext};
use crate::validation::{
    probe_all, BatchOptions, ProbeBackend, ProbeState, Provider, RetryPolicy, ValidationRecord,
};

/// Where probes go. The pipeline itself takes a ready backend; this only
/// tells the command line which one to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BackendConfig {
    Synthetic { namespace: PathBuf },
    Live { rate_per_sec: f64, enabled: bool },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Synthetic {
            namespace: PathBuf::from("namespace.bkns"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub generator: GeneratorKind,
    /// Character n-gram order.
    pub order: usize,
    pub batch_size: usize,
    /// Candidates between model refreshes; a multiple of `batch_size`.
    pub retrain_interval: usize,
    pub max_candidates: usize,
    pub providers: Vec<Provider>,
    pub backend: BackendConfig,
    pub seed: u64,
    pub parallelism: usize,
    /// Probe retries on indeterminate answers.
    pub max_retries: u32,
    pub retry_base_ms: u64,
    /// Inspect public buckets.
    pub security: bool,
    /// Length range of the uniform random baseline.
    pub random_min_len: usize,
    pub random_max_len: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            generator: GeneratorKind::TokenPcfg,
            order: crate::generators::DEFAULT_ORDER,
            batch_size: 10_000,
            retrain_interval: 10_000,
            max_candidates: 100_000,
            providers: Provider::ALL.to_vec(),
            backend: BackendConfig::default(),
            seed: 0,
            parallelism: 8,
            max_retries: 3,
            retry_base_ms: 500,
            security: true,
            random_min_len: name::MIN_LEN,
            random_max_len: name::MAX_LEN,
            out_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.retrain_interval == 0 || self.retrain_interval % self.batch_size != 0 {
            return bad("retrain_interval must be a positive multiple of batch_size");
        }
        if self.providers.is_empty() {
            return bad("no providers");
        }
        if self.random_min_len < name::MIN_LEN
            || self.random_max_len > name::MAX_LEN
            || self.random_min_len > self.random_max_len
        {
            return bad("random length range must lie within 3..=64");
        }
        if self.generator == GeneratorKind::CharNgram && self.order < 2 {
            return bad("n-gram order must be at least 2");
        }
        Ok(())
    }

    fn batch_options(&self) -> BatchOptions {
        BatchOptions {
            parallelism: self.parallelism.max(1),
            retry: RetryPolicy {
                max_retries: self.max_retries,
                base_delay: std::time::Duration::from_millis(self.retry_base_ms),
            },
        }
    }

    fn iterations(&self) -> usize {
        self.max_candidates.div_ceil(self.batch_size)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    /// 0 for the extraction pass, then 1, 2, ... for generated batches.
    pub iteration: usize,
    pub issued: usize,
    pub valid: usize,
    pub public: usize,
    pub sensitive: usize,
    pub misconfigured: usize,
    pub hit_rate: f64,
    pub generation_secs: f64,
    pub training_secs: f64,
    pub cumulative_issued: usize,
    pub cumulative_valid: usize,
    pub cumulative_public: usize,
    pub cumulative_sensitive: usize,
    pub cumulative_misconfigured: usize,
}

impl IterationMetrics {
    /// The counters alone, without wall-clock times.
    pub fn counts(&self) -> [usize; 11] {
        [
            self.iteration,
            self.issued,
            self.valid,
            self.public,
            self.sensitive,
            self.misconfigured,
            self.cumulative_issued,
            self.cumulative_valid,
            self.cumulative_public,
            self.cumulative_sensitive,
            self.cumulative_misconfigured,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub extraction: Option<IterationMetrics>,
    /// Generated batches; cumulative counters cover these only.
    pub iterations: Vec<IterationMetrics>,
}

impl RunMetrics {
    pub fn issued(&self) -> usize {
        self.iterations.last().map_or(0, |m| m.cumulative_issued)
    }

    pub fn valid(&self) -> usize {
        self.iterations.last().map_or(0, |m| m.cumulative_valid)
    }

    pub fn hit_rate(&self) -> f64 {
        match self.issued() {
            0 => 0.0,
            n => self.valid() as f64 / n as f64,
        }
    }

    fn push(&mut self, mut m: IterationMetrics) {
        let prev = self.iterations.last().cloned().unwrap_or_default();
        m.cumulative_issued = prev.cumulative_issued + m.issued;
        m.cumulative_valid = prev.cumulative_valid + m.valid;
        m.cumulative_public = prev.cumulative_public + m.public;
        m.cumulative_sensitive = prev.cumulative_sensitive + m.sensitive;
        m.cumulative_misconfigured = prev.cumulative_misconfigured + m.misconfigured;
        self.iterations.push(m);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    /// Valid generated names in the order they were issued.
    pub found: Vec<String>,
    pub profiles: Vec<BucketSecurityProfile>,
}

#[derive(Debug, Default)]
pub struct Extraction {
    pub names: Vec<String>,
    pub rejected: usize,
    pub duplicates: usize,
}

/// Reads name lists (one per line; blank lines and `#` comments skipped)
/// and keeps each legal name not already in `store`, adding it there.
pub fn extract(sources: &[impl AsRef<Path>], store: &DedupStore) -> Result<Extraction> {
    let mut out = Extraction::default();
    for path in sources {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let n = line.trim();
            if n.is_empty() || n.starts_with('#') {
                continue;
            }
            if !name::is_legal(n) {
                out.rejected += 1;
            } else if store.insert(n)? {
                out.names.push(n.to_owned());
            } else {
                out.duplicates += 1;
            }
        }
    }
    Ok(out)
}

/// Append-only JSON-lines file with a known byte length.
struct Journal {
    path: PathBuf,
    out: BufWriter<File>,
    offset: u64,
}

impl Journal {
    fn open(path: PathBuf, len: u64) -> Result<Self> {
        let io = |e| Error::io(&path, e);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        file.set_len(len).map_err(io)?;
        Ok(Journal {
            out: BufWriter::new(file),
            path,
            offset: len,
        })
    }

    fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let mut line = serde_json::to_vec(record).expect("records serialize");
        line.push(b'\n');
        self.out
            .write_all(&line)
            .map_err(|e| Error::io(&self.path, e))?;
        self.offset += line.len() as u64;
        Ok(())
    }

    fn flush(&mut self) -> Result<u64> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.offset)
    }
}

fn read_prefix<T: DeserializeOwned>(path: &Path, len: u64) -> Result<Vec<T>> {
    use std::io::Read;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file.take(len));
    crate::records::parse_records(reader, path)
}

/// One line of `records.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub iteration: usize,
    #[serde(flatten)]
    pub record: ValidationRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    config: PipelineConfig,
    /// First iteration not yet finished.
    next_iteration: usize,
    complete: bool,
    dedup_offset: u64,
    records_offset: u64,
    metrics_offset: u64,
    profiles_offset: u64,
    metrics: RunMetrics,
}

const CHECKPOINT: &str = "checkpoint.json";

fn write_checkpoint(dir: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = dir.join("checkpoint.json.tmp");
    let text = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    let dst = dir.join(CHECKPOINT);
    std::fs::rename(&tmp, &dst).map_err(|e| Error::io(&dst, e))
}

fn read_checkpoint(dir: &Path) -> Result<Option<Checkpoint>> {
    let path = dir.join(CHECKPOINT);
    match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(&path, e)),
    }
}

/// Seed of the candidate stream for one iteration.
fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    let mut z = seed ^ (iteration as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

enum Job {
    Inspect {
        name: String,
        provider: Provider,
        state: ProbeState,
    },
    EndOfIteration,
}

enum Found {
    Profile(Box<BucketSecurityProfile>),
    EndOfIteration,
    Failed(Error),
}

struct Logs {
    dir: PathBuf,
    records: Journal,
    metrics: Journal,
    profiles: Journal,
}

/// Offsets at the end of an iteration's validation, to be written into
/// the checkpoint once its security results are in.
struct Pending {
    metrics: IterationMetrics,
    dedup_offset: u64,
    records_offset: u64,
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    backend: &'a dyn ProbeBackend,
    store: DedupStore,
    logs: Option<Logs>,
    outcome: RunOutcome,
    /// (iteration, name) of every valid name, extraction included.
    valid: Vec<(usize, String)>,
}

impl Runner<'_> {
    fn validate(
        &mut self,
        iteration: usize,
        names: &[String],
        jobs: &mpsc::Sender<Job>,
    ) -> Result<IterationMetrics> {
        let records = probe_all(self.backend, names, &self.config.providers, &self.config.batch_options())
            .map_err(|partial| partial.error)?;
        let mut m = IterationMetrics {
            iteration,
            issued: names.len(),
            ..Default::default()
        };
        for group in records.chunks(self.config.providers.len()) {
            let name = &group[0].name;
            if group.iter().any(|r| r.state.is_valid()) {
                m.valid += 1;
                self.valid.push((iteration, name.clone()));
                if iteration > 0 {
                    self.outcome.found.push(name.clone());
                }
            }
            if group.iter().any(|r| r.state == ProbeState::Public) {
                m.public += 1;
            }
            for r in group {
                if self.config.security && r.state == ProbeState::Public {
                    let _ = jobs.send(Job::Inspect {
                        name: r.name.clone(),
                        provider: r.provider,
                        state: r.state,
                    });
                }
            }
        }
        let _ = jobs.send(Job::EndOfIteration);
        if let Some(logs) = self.logs.as_mut() {
            for record in records {
                logs.records.write(&JournalRecord { iteration, record })?;
            }
        }
        m.hit_rate = if m.issued == 0 {
            0.0
        } else {
            m.valid as f64 / m.issued as f64
        };
        Ok(m)
    }

    fn pending(&mut self, metrics: IterationMetrics) -> Result<Pending> {
        let records_offset = match self.logs.as_mut() {
            Some(l) => l.records.flush()?,
            None => 0,
        };
        Ok(Pending {
            metrics,
            dedup_offset: self.store.flush()?,
            records_offset,
        })
    }

    /// Waits for the security results of `p`, then records its metrics and
    /// writes a checkpoint.
    fn finish(&mut self, mut p: Pending, found: &mpsc::Receiver<Found>, complete: bool) -> Result<()> {
        let mut sensitive = HashSet::new();
        let mut misconfigured = HashSet::new();
        loop {
            match found.recv() {
                Ok(Found::Profile(profile)) => {
                    if profile.is_sensitive() {
                        sensitive.insert(profile.name.clone());
                    }
                    if profile.is_misconfigured() {
                        misconfigured.insert(profile.name.clone());
                    }
                    if let Some(logs) = self.logs.as_mut() {
                        logs.profiles.write(&*profile)?;
                    }
                    self.outcome.profiles.push(*profile);
                }
                Ok(Found::EndOfIteration) => break,
                Ok(Found::Failed(e)) => return Err(e),
                Err(_) => return Err(Error::Backend("security consumer stopped".into())),
            }
        }
        p.metrics.sensitive = sensitive.len();
        p.metrics.misconfigured = misconfigured.len();
        let iteration = p.metrics.iteration;
        if iteration == 0 {
            self.outcome.metrics.extraction = Some(p.metrics);
        } else {
            self.outcome.metrics.push(p.metrics);
        }
        if let Some(logs) = self.logs.as_mut() {
            if iteration > 0 {
                let last = self.outcome.metrics.iterations.last().expect("just pushed");
                logs.metrics.write(last)?;
            }
            let cp = Checkpoint {
                config: self.config.clone(),
                next_iteration: iteration + 1,
                complete,
                dedup_offset: p.dedup_offset,
                records_offset: p.records_offset,
                metrics_offset: logs.metrics.flush()?,
                profiles_offset: logs.profiles.flush()?,
                metrics: self.outcome.metrics.clone(),
            };
            write_checkpoint(&logs.dir, &cp)?;
        }
        Ok(())
    }
}

fn security_consumer(
    backend: &dyn ProbeBackend,
    jobs: mpsc::Receiver<Job>,
    found: mpsc::Sender<Found>,
) {
    let ctx = SecurityContext::bundled();
    for job in jobs {
        let msg = match job {
            Job::EndOfIteration => Found::EndOfIteration,
            Job::Inspect {
                name,
                provider,
                state,
            } => match backend
                .inspect(&name, provider)
                .and_then(|c| profile_bucket(&name, provider, state, &c, &ctx))
            {
                Ok(p) => Found::Profile(Box::new(p)),
                Err(e) => Found::Failed(e),
            },
        };
        if found.send(msg).is_err() {
            return;
        }
    }
}

/// Opens the run's store and logs, resuming from a checkpoint when one
/// exists. Returns the first iteration still to run.
fn open_runner<'a>(
    config: &'a PipelineConfig,
    backend: &'a dyn ProbeBackend,
) -> Result<(Runner<'a>, usize, bool)> {
    let mut runner = Runner {
        config,
        backend,
        store: DedupStore::in_memory(),
        logs: None,
        outcome: RunOutcome::default(),
        valid: Vec::new(),
    };
    let Some(dir) = config.out_dir.as_ref() else {
        return Ok((runner, 0, false));
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cp = read_checkpoint(dir)?;
    if let Some(cp) = &cp {
        if cp.config != *config {
            return Err(Error::Config(format!(
                "{} holds a checkpoint for a different config",
                dir.display()
            )));
        }
    }
    let (start, complete, dedup, records, metrics, profiles) = match &cp {
        Some(cp) => (
            cp.next_iteration,
            cp.complete,
            cp.dedup_offset,
            cp.records_offset,
            cp.metrics_offset,
            cp.profiles_offset,
        ),
        None => (0, false, 0, 0, 0, 0),
    };
    runner.store = DedupStore::open_truncated(dir.join("dedup.log"), dedup)?;
    let logs = Logs {
        dir: dir.clone(),
        records: Journal::open(dir.join("records.jsonl"), records)?,
        metrics: Journal::open(dir.join("metrics.jsonl"), metrics)?,
        profiles: Journal::open(dir.join("profiles.jsonl"), profiles)?,
    };
    if let Some(cp) = cp {
        let journal: Vec<JournalRecord> = read_prefix(&logs.records.path, records)?;
        let mut last: Option<&str> = None;
        for r in journal.iter().filter(|r| r.record.state.is_valid()) {
            if last == Some(r.record.name.as_str()) {
                continue;
            }
            last = Some(&r.record.name);
            runner.valid.push((r.iteration, r.record.name.clone()));
            if r.iteration > 0 {
                runner.outcome.found.push(r.record.name.clone());
            }
        }
        runner.outcome.profiles = read_prefix(&logs.profiles.path, profiles)?;
        runner.outcome.metrics = cp.metrics;
    }
    runner.logs = Some(logs);
    Ok((runner, start, complete))
}

fn sampler_for(
    config: &PipelineConfig,
    corpora: &CorpusSet,
) -> Option<Box<dyn Sampler>> {
    match config.generator {
        GeneratorKind::UniformRandom => Some(Box::new(UniformRandom {
            min_len: config.random_min_len,
            max_len: config.random_max_len,
        })),
        GeneratorKind::Continella => Some(Box::new(continella_from(corpora))),
        _ => None,
    }
}

/// Runs the loop described in the module docs. `seeds` are the extracted
/// names; those already in the run's dedup store are skipped.
pub fn run(
    config: &PipelineConfig,
    corpora: &CorpusSet,
    backend: &dyn ProbeBackend,
    seeds: &[String],
) -> Result<RunOutcome> {
    config.validate()?;
    if config.max_candidates == 0 {
        return Ok(RunOutcome::default());
    }
    let (mut runner, start, complete) = open_runner(config, backend)?;
    if complete {
        return Ok(runner.outcome);
    }
    let iterations = config.iterations();
    let per_retrain = config.retrain_interval / config.batch_size;
    let fixed = sampler_for(config, corpora);
    let mut cache = DerivationCache::default();

    let (job_tx, job_rx) = mpsc::channel::<Job>();
    let (found_tx, found_rx) = mpsc::channel::<Found>();

    std::thread::scope(|s| -> Result<RunOutcome> {
        s.spawn(move || security_consumer(backend, job_rx, found_tx));
        let mut pending: Option<Pending> = None;

        if start == 0 {
            let mut fresh = Vec::new();
            for n in seeds {
                if name::is_legal(n) && runner.store.insert(n)? {
                    fresh.push(n.clone());
                }
            }
            let m = runner.validate(0, &fresh, &job_tx)?;
            pending = Some(runner.pending(m)?);
        }

        let mut model: Option<GeneratorModel> = None;
        for i in start.max(1)..=iterations {
            let t0 = Instant::now();
            if fixed.is_none() && (model.is_none() || (i - 1) % per_retrain == 0) {
                let retrained_at = 1 + (i - 1) / per_retrain * per_retrain;
                let names: Vec<&str> = runner
                    .valid
                    .iter()
                    .filter(|(it, _)| *it < retrained_at)
                    .map(|(_, n)| n.as_str())
                    .collect();
                model = Some(match config.generator {
                    GeneratorKind::TokenPcfg => GeneratorModel::TokenPcfg(
                        crate::generators::train_token_pcfg_cached(&names, corpora, &mut cache)?,
                    ),
                    kind => crate::generators::train(kind, &names, corpora, config.order)?,
                });
            }
            let training_secs = t0.elapsed().as_secs_f64();

            let t1 = Instant::now();
            let sampler: &dyn Sampler = match (&fixed, &model) {
                (Some(f), _) => f.as_ref(),
                (None, Some(m)) => m,
                (None, None) => unreachable!("model trained above"),
            };
            let count = config.batch_size.min(config.max_candidates - (i - 1) * config.batch_size);
            let mut stream = CandidateStream::new(sampler, iteration_seed(config.seed, i));
            let mut batch = Vec::with_capacity(count);
            let mut store_err = None;
            for _ in 0..count {
                let store = &runner.store;
                let n = stream.next_accepted(|n| match store.insert(n) {
                    Ok(added) => added,
                    Err(e) => {
                        store_err.get_or_insert(e);
                        true
                    }
                })?;
                if let Some(e) = store_err.take() {
                    return Err(e);
                }
                batch.push(n);
            }
            let generation_secs = t1.elapsed().as_secs_f64();

            if let Some(p) = pending.take() {
                runner.finish(p, &found_rx, false)?;
            }

            let mut m = runner.validate(i, &batch, &job_tx)?;
            m.training_secs = training_secs;
            m.generation_secs = generation_secs;
            pending = Some(runner.pending(m)?);
        }
        if let Some(p) = pending.take() {
            runner.finish(p, &found_rx, true)?;
        }
        drop(job_tx);
        Ok(std::mem::take(&mut runner.outcome))
    })
}

/// [`run`] with uniformly random candidates.
pub fn baseline_random(config: &PipelineConfig, backend: &dyn ProbeBackend) -> Result<RunOutcome> {
    let config = PipelineConfig {
        generator: GeneratorKind::UniformRandom,
        ..config.clone()
    };
    run(&config, &CorpusSet::default(), backend, &[])
}

/// [`run`] with the prior-work generator over the dictionary corpus.
pub fn baseline_continella(
    config: &PipelineConfig,
    corpora: &CorpusSet,
    backend: &dyn ProbeBackend,
) -> Result<RunOutcome> {
    let config = PipelineConfig {
        generator: GeneratorKind::Continella,
        ..config.clone()
    };
    run(&config, corpora, backend, &[])
}

/// Every name in the dedup log and every (name, provider) in the records
/// log of a run directory, with how often each repeats.
pub fn replay_duplicates(dir: impl AsRef<Path>) -> Result<(usize, usize)> {
    let dir = dir.as_ref();
    let path = dir.join("dedup.log");
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut seen = HashSet::new();
    let mut dup_names = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        if !seen.insert(line) {
            dup_names += 1;
        }
    }
    let records: Vec<JournalRecord> = crate::records::read_records(dir.join("records.jsonl"))?;
    let mut probed = HashSet::new();
    let dup_probes = records
        .iter()
        .filter(|r| !probed.insert((r.record.name.clone(), r.record.provider)))
        .count();
    Ok((dup_names, dup_probes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::namespace::{build_namespace, NamespaceSpec};

    fn config() -> PipelineConfig {
        PipelineConfig {
            batch_size: 200,
            retrain_interval: 400,
            max_candidates: 1000,
            parallelism: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_candidates_no_probes() {
        struct Panics;
        impl ProbeBackend for Panics {
            fn probe(&self, _: &str, _: Provider) -> Result<crate::validation::ProbeResponse> {
                panic!("probed")
            }
            fn inspect(&self, _: &str, _: Provider) -> Result<crate::security::BucketContents> {
                panic!("inspected")
            }
        }
        let c = PipelineConfig {
            max_candidates: 0,
            ..config()
        };
        let out = run(&c, &CorpusSet::bundled(), &Panics, &["abc".into()]).unwrap();
        assert_eq!(out, RunOutcome::default());
    }

    #[test]
    fn config_checks() {
        assert!(PipelineConfig {
            batch_size: 0,
            ..config()
        }
        .validate()
        .is_err());
        assert!(PipelineConfig {
            retrain_interval: 300,
            ..config()
        }
        .validate()
        .is_err());
        let c = PipelineConfig::from_toml("generator = \"char_ngram\"\nbatch_size = 5\nretrain_interval = 10\n").unwrap();
        assert_eq!(c.generator, GeneratorKind::CharNgram);
        assert_eq!(c.order, 5);
    }

    #[test]
    fn metrics_conserve_and_deterministic() {
        let corpora = CorpusSet::bundled();
        let ns = build_namespace(&NamespaceSpec::measured_mix(5000), 1, &corpora).unwrap();
        let seeds = ns.sample_names(0.1, 2);
        let a = run(&config(), &corpora, &ns, &seeds).unwrap();
        let b = run(&config(), &corpora, &ns, &seeds).unwrap();
        let counts = |o: &RunOutcome| o.metrics.iterations.iter().map(|m| m.counts()).collect::<Vec<_>>();
        assert_eq!(counts(&a), counts(&b));
        assert_eq!(a.found, b.found);
        assert_eq!(a.metrics.iterations.len(), 5);
        let sum: usize = a.metrics.iterations.iter().map(|m| m.valid).sum();
        assert_eq!(sum, a.metrics.valid());
        assert_eq!(a.found.len(), a.metrics.valid());
        for m in &a.metrics.iterations {
            assert!(m.public <= m.valid && m.valid <= m.issued);
            assert!((0.0..=1.0).contains(&m.hit_rate));
        }
        let ex = a.metrics.extraction.as_ref().unwrap();
        assert_eq!(ex.valid, seeds.len());
        assert!(a.found.iter().all(|n| ns.get(n).is_some()));
    }

    #[test]
    fn extract_unions_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        std::fs::write(&a, "alpha\nbeta\nxy\n").unwrap();
        std::fs::write(&b, "beta\ngamma\n# note\n\n").unwrap();
        let store = DedupStore::in_memory();
        let e = extract(&[&a, &b], &store).unwrap();
        assert_eq!(e.names, ["alpha", "beta", "gamma"]);
        assert_eq!(e.rejected, 1);
        assert_eq!(e.duplicates, 1);
        assert!(extract(&[dir.path().join("missing")], &store).is_err());
    }
}
