use sentitrade::ingest::{Currency, Source, TextPost};
use sentitrade::sentiment::{classify_via_protocol, Classifier, Lexicon, Polarity, ProcessClassifier};
use sentitrade::Error;

fn stub(mode: &str) -> Vec<String> {
    vec![
        env!("CARGO_BIN_EXE_protocol-stub").into(),
        "classifier".into(),
        "--mode".into(),
        mode.into(),
    ]
}

fn posts() -> Vec<TextPost> {
    let texts = ["bitcoin rally looks bullish", "exchange hacked, prices crash", "eth upgrade scheduled", "gains gains gains", "fear and panic"];
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| TextPost {
            id: format!("post-{i}"),
            timestamp: "2021-09-01T12:00:00Z".parse().unwrap(),
            source: Source::Reddit,
            currency: Currency::Btc,
            text: t.to_string(),
            engagement: Default::default(),
        })
        .collect()
}

fn values(labels: &[sentitrade::sentiment::SentimentLabel]) -> Vec<Polarity> {
    labels.iter().map(|l| l.value).collect()
}

#[test]
fn lexicon_stub_matches_in_process_lexicon() {
    let p = posts();
    let mut direct = Lexicon::builtin();
    let want = values(&classify_via_protocol(&mut direct, &p).unwrap());
    for batch in [1, 2, 64] {
        let mut c = ProcessClassifier::spawn(&stub("lexicon"), batch).unwrap();
        assert_eq!(values(&c.classify(&p).unwrap()), want, "batch size {batch}");
        // the connection stays usable across calls
        assert_eq!(values(&c.classify(&p[..2]).unwrap()), want[..2]);
    }
}

#[test]
fn reordered_replies_are_rejoined_by_id() {
    let p = posts();
    let want = values(&classify_via_protocol(&mut Lexicon::builtin(), &p).unwrap());
    let mut c = ProcessClassifier::spawn(&stub("shuffle"), 3).unwrap();
    assert_eq!(values(&c.classify(&p).unwrap()), want);
}

#[test]
fn missing_reply_is_correlation_error() {
    let mut c = ProcessClassifier::spawn(&stub("drop"), 5).unwrap();
    match c.classify(&posts()) {
        Err(Error::Correlation(id)) => assert_eq!(id, "post-4"),
        other => panic!("expected a correlation error, got {other:?}"),
    }
}

#[test]
fn neutral_stub_labels_everything_neutral() {
    let mut c = ProcessClassifier::spawn(&stub("neutral"), 2).unwrap();
    assert!(values(&c.classify(&posts()).unwrap()).iter().all(|l| *l == Polarity::Neutral));
}
