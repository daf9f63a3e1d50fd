use std::collections::BTreeMap;

use bucketgen::analyzer::{decompose, estimate_guesses, TokenClass};
use bucketgen::corpus::{Corpus, CorpusKind, CorpusSet};
use bucketgen::generators::{
    char_pcfg_rule, join_tokens, parse_rule, render_rule, tokenize_on_delimiters, train,
    CandidateStream, FreqTable, GeneratorKind, GeneratorModel,
};
use bucketgen::name;
use bucketgen::pipeline::DedupStore;
use bucketgen::security::{
    categorize_bucket, classify_acl, AclRecord, CategoryTable, FileMeta, Grant, Grantee,
    NormalizationTable,
};
use bucketgen::validation::Provider;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn small_corpora() -> CorpusSet {
    CorpusSet::new([
        Corpus::from_tokens(
            CorpusKind::Dictionary,
            ["test", "data", "prod", "log", "web", "app", "dev", "the", "cat", "at"],
        ),
        Corpus::from_tokens(CorpusKind::TechTerm, ["api", "dev", "s3", "cdn"]),
        Corpus::from_tokens(CorpusKind::FileExtension, ["jpg", "png", "gz"]),
        Corpus::symbols(),
    ])
}

fn legal_name() -> impl Strategy<Value = String> {
    "[a-z0-9._-]{3,20}"
}

fn train_set() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z]{2,6}([-_.][a-z0-9]{1,5}){0,2}", 1..20)
}

proptest! {
    #[test]
    fn decomposition_tiles_the_name(n in legal_name()) {
        let c = small_corpora();
        let d = decompose(&n, &c).unwrap();
        let joined: String = d.tokens.iter().map(|t| t.text.as_str()).collect();
        prop_assert_eq!(&joined, &n);
        let mut pos = 0;
        for t in &d.tokens {
            prop_assert_eq!(t.start, pos);
            prop_assert_eq!(&n[t.start..t.end], t.text.as_str());
            pos = t.end;
        }
        for w in d.tokens.windows(2) {
            prop_assert!(!(w[0].class.is_random() && w[1].class.is_random()));
        }
        for t in &d.tokens {
            if let TokenClass::Corpus { rank, .. } = t.class {
                let m = c.lookup(&t.text).unwrap();
                prop_assert_eq!(m.rank, rank);
            }
        }
        prop_assert!((estimate_guesses(&d) - d.log10_guesses).abs() < TOL);
    }

    #[test]
    fn adding_an_entry_never_raises_guesses(n in legal_name(), extra in "[a-z0-9]{2,6}") {
        let mut c = small_corpora();
        let before = decompose(&n, &c).unwrap().log10_guesses;
        c.add_entry(CorpusKind::Password, &extra);
        let after = decompose(&n, &c).unwrap().log10_guesses;
        prop_assert!(after <= before + TOL, "{} -> {}", before, after);
    }

    #[test]
    fn delimiter_split_round_trips(n in legal_name()) {
        let (tokens, delims) = tokenize_on_delimiters(&n);
        prop_assert_eq!(tokens.len(), delims.len() + 1);
        prop_assert_eq!(join_tokens(&tokens, &delims), n);
    }

    #[test]
    fn char_rules_parse_back(n in legal_name()) {
        let rule = char_pcfg_rule(&n);
        prop_assert_eq!(render_rule(&parse_rule(&rule).unwrap()), rule);
    }

    #[test]
    fn char_pcfg_samples_keep_their_rule(names in train_set(), seed in any::<u64>()) {
        let c = CorpusSet::default();
        let GeneratorModel::CharPcfg(m) = train(GeneratorKind::CharPcfg, &names, &c, 5).unwrap() else {
            unreachable!()
        };
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        for _ in 0..20 {
            let s = m.sample(&mut rng);
            prop_assert!(m.rules().count(&char_pcfg_rule(&s)) > 0, "{}", s);
        }
    }

    #[test]
    fn streams_are_legal_and_seeded(names in train_set(), seed in any::<u64>()) {
        let c = small_corpora();
        for kind in [GeneratorKind::CharNgram, GeneratorKind::TokenBigram, GeneratorKind::CharPcfg, GeneratorKind::TokenPcfg] {
            let m = train(kind, &names, &c, 3).unwrap();
            let a: Vec<_> = CandidateStream::new(&m, seed).take(30).collect();
            let b: Vec<_> = CandidateStream::new(&m, seed).take(30).collect();
            for (x, y) in a.iter().zip(&b) {
                match (x, y) {
                    (Ok(x), Ok(y)) => {
                        prop_assert_eq!(x, y);
                        prop_assert!(name::is_legal(x));
                    }
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "streams diverged"),
                }
            }
        }
    }

    #[test]
    fn models_round_trip_through_bytes(names in train_set()) {
        let c = small_corpora();
        for kind in [GeneratorKind::CharNgram, GeneratorKind::TokenBigram, GeneratorKind::CharPcfg, GeneratorKind::TokenPcfg] {
            let m = train(kind, &names, &c, 4).unwrap();
            let bytes = m.to_bytes();
            let back = GeneratorModel::from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn freq_tables_normalize(counts in prop::collection::btree_map("[a-z]{1,3}", 1u64..1000, 1..30)) {
        let t = FreqTable::from_counts(counts.clone());
        let total: f64 = counts.keys().map(|k| t.probability(k)).sum();
        prop_assert!((total - 1.0).abs() < TOL);
        prop_assert_eq!(t.total(), counts.values().sum::<u64>());
    }

    #[test]
    fn extra_grants_never_drop_flags(
        base in prop::collection::vec((0usize..3, 0usize..5), 0..5),
        extra in prop::collection::vec((0usize..3, 0usize..5), 1..4),
    ) {
        let table = NormalizationTable::bundled();
        let grantees = [Grantee::AllUsers, Grantee::AuthenticatedUsers, Grantee::Specific];
        let perms = ["READ", "WRITE", "READ_ACP", "WRITE_ACP", "FULL_CONTROL"];
        let grants = |v: &[(usize, usize)]| -> Vec<Grant> {
            v.iter().map(|&(g, p)| Grant::new(grantees[g], perms[p])).collect()
        };
        let small = AclRecord::new(Provider::Aws, grants(&base));
        let mut all = grants(&base);
        all.extend(grants(&extra));
        let big = AclRecord::new(Provider::Aws, all);
        let a = classify_acl(&small, &table).unwrap();
        let b = classify_acl(&big, &table).unwrap();
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn category_threshold(total in 1usize..300, matched_frac in 0.0f64..=1.0) {
        let matched = ((total as f64) * matched_frac).round() as usize;
        let mut files: Vec<FileMeta> = (0..matched).map(|i| FileMeta::named(format!("img/p{i}.png"))).collect();
        files.extend((matched..total).map(|i| FileMeta::named(format!("misc/f{i}.bin"))));
        let got = categorize_bucket(&files, &CategoryTable::bundled());
        let expect = (matched * 100 >= 98 * total).then(|| "images".to_owned());
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn dedup_admits_each_name_once(names in prop::collection::vec("[a-c]{1,3}", 0..60)) {
        let store = DedupStore::in_memory();
        let mut seen = BTreeMap::new();
        for n in &names {
            let added = store.insert(n).unwrap();
            prop_assert_eq!(added, !seen.contains_key(n));
            *seen.entry(n.clone()).or_insert(0) += 1;
        }
        prop_assert_eq!(store.len(), seen.len());
    }
}
