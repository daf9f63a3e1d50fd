use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bucketgen::analyzer::{decompose, pattern_census, DecompositionRecord, PatternKey};
use bucketgen::corpus::CorpusSet;
use bucketgen::generators::{train, CandidateStream, GeneratorKind, GeneratorModel, DEFAULT_ORDER};
use bucketgen::namespace::{build_namespace, NamespaceSpec, SyntheticNamespace};
use bucketgen::pipeline::{extract, run, BackendConfig, DedupStore, PipelineConfig};
use bucketgen::records::RecordWriter;
use bucketgen::report::{report_file, report_hitrate, write_csv, ReportKind};
use bucketgen::security::{profile_bucket, SecurityContext};
use bucketgen::validation::live::{LiveBackend, LiveConfig};
use bucketgen::validation::{validate_batch, BatchOptions, ProbeBackend, ProbeState, Provider, RetryPolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bucketgen", version, about = "Learn, generate and check cloud-storage bucket names")]
struct Cli {
    /// Corpus manifest (TOML, `dictionary = "words.txt"`); the bundled corpora otherwise.
    #[arg(long, global = true)]
    corpora: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a generator on a list of names.
    Train {
        #[arg(long, short)]
        generator: GeneratorKind,
        /// Name lists, one name per line.
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
        /// Character n-gram order.
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        /// Also print the frequency tables.
        #[arg(long)]
        dump: bool,
    },
    /// Sample candidate names from a trained model.
    Generate {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, short = 'n', default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Never emit names listed here.
        #[arg(long)]
        exclude: Vec<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Print the model's frequency tables instead of sampling.
        #[arg(long)]
        dump: bool,
    },
    /// Probe a list of names.
    Validate {
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        probe: ProbeArgs,
        /// Dedup store; names already in it are skipped.
        #[arg(long)]
        dedup: Option<PathBuf>,
        /// Validation records (JSON lines); stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Inspect public buckets and write security profiles here.
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Run the extract, generate, validate loop from a config file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        /// Extraction sources, one name per line.
        #[arg(long, short)]
        seeds: Vec<PathBuf>,
        /// Run directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Required together with BUCKETGEN_LIVE_ACK=1 for a live backend.
        #[arg(long)]
        enable_live: bool,
    },
    /// Decompose names into corpus and random tokens.
    Analyze {
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Decomposition records (JSON lines); stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write a pattern census CSV.
        #[arg(long)]
        census: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CensusKey::Generic)]
        key: CensusKey,
    },
    /// Summarize record files as CSV.
    Report {
        #[arg(long, short)]
        kind: ReportKind,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Build a synthetic namespace.
    Simulate {
        /// Namespace spec (TOML); the built-in pattern mix if omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Size for the built-in spec.
        #[arg(long, default_value_t = 100_000)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Binary namespace file.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Print the first N entries as TSV.
        #[arg(long)]
        sample: Option<usize>,
        /// Write a seeded fraction of the names to this file, for extraction.
        #[arg(long)]
        seeds_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        seed_fraction: f64,
        /// Write the spec in use as TOML and exit.
        #[arg(long)]
        write_spec: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Synthetic,
    Live,
}

#[derive(Clone, Copy, ValueEnum)]
enum CensusKey {
    Generic,
    Kinds,
    Anchored,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Synthetic)]
    backend: BackendKind,
    /// Namespace file for the synthetic backend.
    #[arg(long, default_value = "namespace.bkns")]
    namespace: PathBuf,
    /// Probes per second for the live backend.
    #[arg(long, default_value_t = 10.0)]
    rate: f64,
    #[arg(long, default_value_t = 8)]
    parallelism: usize,
    #[arg(long, default_value = "aws,gcp,alibaba", value_parser = parse_providers)]
    providers: Providers,
    /// Required together with BUCKETGEN_LIVE_ACK=1 for the live backend.
    #[arg(long)]
    enable_live: bool,
}

#[derive(Clone)]
struct Providers(Vec<Provider>);

fn parse_providers(s: &str) -> Result<Providers, String> {
    Provider::parse_list(s).map(Providers).map_err(|e| e.to_string())
}

fn corpora(path: &Option<PathBuf>) -> Result<CorpusSet> {
    match path {
        Some(p) => CorpusSet::from_manifest(p).with_context(|| format!("loading corpora from {}", p.display())),
        None => Ok(CorpusSet::bundled()),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_names(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        names.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned),
        );
    }
    Ok(names)
}

fn backend(kind: BackendKind, namespace: &Path, rate: f64, enabled: bool) -> Result<Box<dyn ProbeBackend>> {
    Ok(match kind {
        BackendKind::Synthetic => Box::new(
            SyntheticNamespace::load(namespace).with_context(|| format!("loading {}", namespace.display()))?,
        ),
        BackendKind::Live => Box::new(LiveBackend::new(LiveConfig {
            enabled,
            rate_per_sec: rate,
            ..LiveConfig::default()
        })?),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train { generator, input, output, order, dump } => {
            let names = read_names(&input)?;
            let model = train(generator, &names, &corpora(&cli.corpora)?, order)?;
            model.save(&output)?;
            eprintln!("trained {generator} on {} names -> {}", names.len(), output.display());
            if dump {
                print!("{}", model.dump_text());
            }
        }
        Command::Generate { model, count, seed, exclude, output: out, dump } => {
            let model = GeneratorModel::load(&model)?;
            let mut w = output(&out)?;
            if dump {
                w.write_all(model.dump_text().as_bytes())?;
                return Ok(w.flush()?);
            }
            let store = DedupStore::in_memory();
            for n in read_names(&exclude)? {
                store.insert(&n)?;
            }
            let mut stream = CandidateStream::new(&model, seed);
            for _ in 0..count {
                let n = stream.next_accepted(|n| store.insert(n).unwrap_or(false))?;
                writeln!(w, "{n}")?;
            }
            w.flush()?;
        }
        Command::Validate { input, probe, dedup, output: out, profiles } => {
            let backend = backend(probe.backend, &probe.namespace, probe.rate, probe.enable_live)?;
            let store = match &dedup {
                Some(p) => DedupStore::open(p)?,
                None => DedupStore::in_memory(),
            };
            let opts = BatchOptions {
                parallelism: probe.parallelism,
                retry: RetryPolicy::default(),
            };
            let names = read_names(&input)?;
            let outcome = validate_batch(backend.as_ref(), &names, &probe.providers.0, &store, &opts)?;
            let mut w = RecordWriter::new(output(&out)?);
            for r in &outcome.records {
                w.write(r)?;
            }
            w.flush()?;
            if let Some(path) = profiles {
                let ctx = SecurityContext::bundled();
                let mut pw = RecordWriter::create(&path)?;
                for r in outcome.records.iter().filter(|r| r.state == ProbeState::Public) {
                    let contents = backend.inspect(&r.name, r.provider)?;
                    pw.write(&profile_bucket(&r.name, r.provider, r.state, &contents, &ctx)?)?;
                }
                pw.flush()?;
            }
            let valid = outcome.records.iter().filter(|r| r.state.is_valid()).count();
            eprintln!(
                "{} probes, {valid} valid, {} duplicates, {} rejected",
                outcome.records.len(),
                outcome.duplicates,
                outcome.rejected
            );
            if let Some(why) = outcome.interrupted {
                bail!("batch interrupted: {why}; re-run with the same --dedup store to finish");
            }
        }
        Command::Run { config, seeds, out, enable_live } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if out.is_some() {
                cfg.out_dir = out;
            }
            let corpora = corpora(&cli.corpora)?;
            let backend: Box<dyn ProbeBackend> = match &cfg.backend {
                BackendConfig::Synthetic { namespace } => backend(BackendKind::Synthetic, namespace, 0.0, false)?,
                BackendConfig::Live { rate_per_sec, enabled } => {
                    backend(BackendKind::Live, Path::new(""), *rate_per_sec, *enabled && enable_live)?
                }
            };
            let seed_names = if seeds.is_empty() {
                Vec::new()
            } else {
                let ex = extract(&seeds, &DedupStore::in_memory())?;
                eprintln!("extracted {} names ({} rejected, {} duplicates)", ex.names.len(), ex.rejected, ex.duplicates);
                ex.names
            };
            let outcome = run(&cfg, &corpora, backend.as_ref(), &seed_names)?;
            let m = &outcome.metrics;
            eprintln!(
                "{} candidates, {} valid, hit rate {:.4}, {} profiles",
                m.issued(),
                m.valid(),
                m.hit_rate(),
                outcome.profiles.len()
            );
            if let Some(dir) = &cfg.out_dir {
                if !m.iterations.is_empty() {
                    let path = dir.join("hitrate.csv");
                    write_csv(&report_hitrate(&m.iterations)?, File::create(&path)?)?;
                    eprintln!("wrote {}", path.display());
                }
            }
        }
        Command::Analyze { input, output: out, census, key } => {
            let corpora = corpora(&cli.corpora)?;
            let mut w = RecordWriter::new(output(&out)?);
            let mut decompositions = Vec::new();
            for n in read_names(&input)? {
                let d = decompose(&n, &corpora).with_context(|| format!("decomposing {n:?}"))?;
                w.write(&DecompositionRecord::from(d.clone()))?;
                if census.is_some() {
                    decompositions.push(d);
                }
            }
            w.flush()?;
            if let Some(path) = census {
                let key = match key {
                    CensusKey::Generic => PatternKey::Generic,
                    CensusKey::Kinds => PatternKey::Kinds,
                    CensusKey::Anchored => PatternKey::Anchored,
                };
                write_csv(&pattern_census(&decompositions, key)?, File::create(&path)?)?;
            }
        }
        Command::Report { kind, input, output: out, top } => {
            let mut w = output(&out)?;
            report_file(kind, &input, top, &mut w)?;
            w.flush()?;
        }
        Command::Simulate {
            spec,
            size,
            seed,
            output: out,
            sample,
            seeds_out,
            seed_fraction,
            write_spec,
        } => {
            let spec = match spec {
                Some(p) => NamespaceSpec::load(&p)?,
                None => NamespaceSpec::measured_mix(size),
            };
            if let Some(p) = write_spec {
                std::fs::write(&p, spec.to_toml()).with_context(|| format!("writing {}", p.display()))?;
                return Ok(());
            }
            let ns = build_namespace(&spec, seed, &corpora(&cli.corpora)?)?;
            eprintln!("built {} names", ns.len());
            if let Some(p) = &out {
                ns.save(p)?;
            }
            if let Some(p) = seeds_out {
                let mut w = BufWriter::new(File::create(&p)?);
                for n in ns.sample_names(seed_fraction, seed) {
                    writeln!(w, "{n}")?;
                }
                w.flush()?;
            }
            if let Some(n) = sample {
                print!("{}", ns.dump_sample(n));
            }
        }
    }
    Ok(())
}
