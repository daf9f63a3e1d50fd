//! A run killed by a backend failure and resumed from its checkpoint ends
//! where an uninterrupted run does.

use std::sync::atomic::{AtomicUsize, Ordering};

use bucketgen::corpus::CorpusSet;
use bucketgen::error::{Error, Result};
use bucketgen::generators::GeneratorKind;
use bucketgen::namespace::{build_namespace, NamespaceSpec, SyntheticNamespace};
use bucketgen::pipeline::{replay_duplicates, run, PipelineConfig, RunOutcome};
use bucketgen::security::BucketContents;
use bucketgen::validation::{ProbeBackend, ProbeResponse, Provider};

/// Answers from the namespace until `budget` probes have been made.
struct Dies<'a> {
    inner: &'a SyntheticNamespace,
    budget: usize,
    used: AtomicUsize,
}

impl ProbeBackend for Dies<'_> {
    fn probe(&self, name: &str, provider: Provider) -> Result<ProbeResponse> {
        if self.used.fetch_add(1, Ordering::SeqCst) >= self.budget {
            return Err(Error::Backend("connection lost".into()));
        }
        self.inner.probe(name, provider)
    }

    fn inspect(&self, name: &str, provider: Provider) -> Result<BucketContents> {
        self.inner.inspect(name, provider)
    }
}

fn config(generator: GeneratorKind, dir: &std::path::Path) -> PipelineConfig {
    PipelineConfig {
        generator,
        batch_size: 300,
        retrain_interval: 600,
        max_candidates: 1500,
        parallelism: 4,
        retry_base_ms: 0,
        seed: 9,
        out_dir: Some(dir.to_owned()),
        ..Default::default()
    }
}

fn summary(o: &RunOutcome) -> (Vec<[usize; 11]>, Vec<String>, Vec<(String, usize)>) {
    (
        o.metrics.iterations.iter().map(|m| m.counts()).collect(),
        o.found.clone(),
        o.profiles.iter().map(|p| (p.name.clone(), p.flags.len())).collect(),
    )
}

fn check(generator: GeneratorKind, budgets: &[usize]) {
    let corpora = CorpusSet::bundled();
    let ns = build_namespace(&NamespaceSpec::measured_mix(20_000), 4, &corpora).unwrap();
    let seeds = ns.sample_names(0.05, 5);

    let whole_dir = tempfile::tempdir().unwrap();
    let whole = run(&config(generator, whole_dir.path()), &corpora, &ns, &seeds).unwrap();
    assert_eq!(whole.metrics.iterations.len(), 5);

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(generator, dir.path());
    for &budget in budgets {
        let dying = Dies { inner: &ns, budget, used: AtomicUsize::new(0) };
        assert!(run(&cfg, &corpora, &dying, &seeds).is_err(), "budget {budget} should fail");
    }
    let resumed = run(&cfg, &corpora, &ns, &seeds).unwrap();
    assert_eq!(summary(&resumed), summary(&whole));
    assert_eq!(replay_duplicates(dir.path()).unwrap(), (0, 0));
    assert_eq!(replay_duplicates(whole_dir.path()).unwrap(), (0, 0));

    // A finished run is not repeated.
    let panics = Dies { inner: &ns, budget: 0, used: AtomicUsize::new(0) };
    let again = run(&cfg, &corpora, &panics, &seeds).unwrap();
    assert_eq!(summary(&again), summary(&whole));
}

#[test]
fn resume_token_pcfg() {
    // Extraction is 1000 names on three providers, then 900 probes per
    // iteration: dies in iteration 0, then 2, then 3.
    check(GeneratorKind::TokenPcfg, &[500, 4000, 1200]);
}

#[test]
fn resume_char_ngram() {
    check(GeneratorKind::CharNgram, &[4000]);
}

#[test]
fn changed_config_refuses_resume() {
    let corpora = CorpusSet::bundled();
    let ns = build_namespace(&NamespaceSpec::measured_mix(2_000), 1, &corpora).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(GeneratorKind::CharNgram, dir.path());
    run(&cfg, &corpora, &ns, &ns.sample_names(0.1, 1)).unwrap();
    let other = PipelineConfig { seed: 10, ..cfg };
    assert!(run(&other, &corpora, &ns, &[]).is_err());
}
