use std::path::Path;
use std::process::{Command, Output};

fn bucketgen(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_bucketgen"))
        .current_dir(dir)
        .env_remove("BUCKETGEN_LIVE_ACK")
        .args(args)
        .output()
        .unwrap();
    out
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bucketgen(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn simulate_train_generate_validate_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let sample = ok(d, &["simulate", "--size", "5000", "--seed", "7", "-o", "ns.bkns", "--seeds-out", "seeds.txt", "--sample", "3"]);
    assert!(sample.starts_with("name\tprovider\t"));
    assert_eq!(sample.lines().count(), 4);
    let seeds = lines(&d.join("seeds.txt"));
    assert!(seeds.len() > 100);

    ok(d, &["train", "-g", "token_pcfg", "-i", "seeds.txt", "-o", "model.bin"]);
    let dump = ok(d, &["generate", "-m", "model.bin", "--dump"]);
    assert!(dump.contains("<other>"));
    ok(d, &["generate", "-m", "model.bin", "-n", "200", "--seed", "1", "--exclude", "seeds.txt", "-o", "cands.txt"]);
    let cands = lines(&d.join("cands.txt"));
    assert_eq!(cands.len(), 200);
    assert!(cands.iter().all(|c| !seeds.contains(c)));
    let again = ok(d, &["generate", "-m", "model.bin", "-n", "200", "--seed", "1", "--exclude", "seeds.txt"]);
    assert_eq!(again.lines().collect::<Vec<_>>(), cands);

    ok(d, &[
        "validate", "-i", "seeds.txt", "--namespace", "ns.bkns", "--providers", "aws,gcp",
        "--dedup", "store.log", "-o", "records.jsonl", "--profiles", "profiles.jsonl",
    ]);
    let records = lines(&d.join("records.jsonl"));
    assert_eq!(records.len(), 2 * seeds.len());
    let r: serde_json::Value = serde_json::from_str(&records[0]).unwrap();
    assert!(r["state"].is_string() && r["status_code"].is_number());
    assert!(!lines(&d.join("profiles.jsonl")).is_empty());
    // Second pass: everything is already in the store.
    ok(d, &["validate", "-i", "seeds.txt", "--namespace", "ns.bkns", "--dedup", "store.log", "-o", "again.jsonl"]);
    assert!(lines(&d.join("again.jsonl")).is_empty());

    let csv = ok(d, &["report", "--kind", "security", "--input", "profiles.jsonl"]);
    assert!(csv.starts_with("section,provider,population,item,count,total,share"));
}

#[test]
fn analyze_and_census() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("names.txt"), "# comment\ntest-bucket\nxqzvkjwq\nbackup2020\n").unwrap();
    ok(d, &["analyze", "-i", "names.txt", "-o", "dec.jsonl", "--census", "census.csv"]);
    let recs = lines(&d.join("dec.jsonl"));
    assert_eq!(recs.len(), 3);
    let r: serde_json::Value = serde_json::from_str(&recs[1]).unwrap();
    assert_eq!(r["name"], "xqzvkjwq");
    assert_eq!(r["pattern"], "(rand)");
    for field in ["tokens", "log10_guesses", "shannon_entropy_bits"] {
        assert!(!r[field].is_null(), "{field}");
    }
    let census = lines(&d.join("census.csv"));
    assert_eq!(census[0], "pattern,count,share,mean_log10_guesses");
    let top = ok(d, &["report", "--kind", "patterns", "--input", "dec.jsonl", "--top", "1"]);
    assert_eq!(top.lines().count(), 2);
    let cdf = ok(d, &["report", "--kind", "guessability", "--input", "dec.jsonl"]);
    assert!(cdf.trim_end().ends_with(",1.0") || cdf.trim_end().ends_with(",1"));
}

#[test]
fn run_writes_logs_and_hitrate_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["simulate", "--size", "5000", "-o", "ns.bkns", "--seeds-out", "seeds.txt"]);
    std::fs::write(
        d.join("run.toml"),
        "generator = \"char_ngram\"\nbatch_size = 200\nretrain_interval = 400\nmax_candidates = 600\nseed = 2\n\n[backend]\ntype = \"synthetic\"\nnamespace = \"ns.bkns\"\n",
    )
    .unwrap();
    ok(d, &["run", "-c", "run.toml", "-s", "seeds.txt", "--out", "out"]);
    for f in ["checkpoint.json", "dedup.log", "records.jsonl", "metrics.jsonl", "hitrate.csv"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    let csv = lines(&d.join("out/hitrate.csv"));
    assert_eq!(csv.len(), 4);
    assert!(csv[0].starts_with("iteration,issued,valid,hit_rate"));
    let report = ok(d, &["report", "--kind", "hitrate", "--input", "out/metrics.jsonl"]);
    assert_eq!(report.lines().collect::<Vec<_>>(), csv);
}

#[test]
fn live_backend_refused_without_acknowledgment() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("names.txt"), "some-bucket\n").unwrap();
    let out = bucketgen(d, &["validate", "-i", "names.txt", "--backend", "live", "--enable-live"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BUCKETGEN_LIVE_ACK"));
    let out = bucketgen(d, &["validate", "-i", "names.txt", "--backend", "live"]);
    assert!(!out.status.success());
}

#[test]
fn spec_round_trips_through_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["simulate", "--size", "2000", "--write-spec", "spec.toml"]);
    ok(d, &["simulate", "--spec", "spec.toml", "--seed", "3", "-o", "a.bkns"]);
    ok(d, &["simulate", "--size", "2000", "--seed", "3", "-o", "b.bkns"]);
    assert_eq!(std::fs::read(d.join("a.bkns")).unwrap(), std::fs::read(d.join("b.bkns")).unwrap());
}
