use ocsr::chemgraph::{is_isomorphic, Strictness};
use ocsr::construct::{recognize, ConstructConfig, RecognizeInput};
use ocsr::corpus::{generate_corpus, CorpusConfig};
use ocsr::depictgen::{depict, StyleParams};
use ocsr::labelparse::FragmentTable;

#[test]
fn oracle_closure_on_corpus() {
    let items = generate_corpus(&CorpusConfig::default());
    let table = FragmentTable::builtin();
    let cfg = ConstructConfig::default();
    let mut failures = Vec::new();
    for item in &items {
        let d = depict(&item.graph, &StyleParams::default(), &table).unwrap();
        let r = recognize(RecognizeInput::Depiction(&d), &cfg).unwrap();
        if !is_isomorphic(&r.graph, &item.graph, Strictness::OrderOnly) {
            failures.push((item.smiles.clone(), r.diagnostics.clone()));
        }
    }
    for f in &failures {
        eprintln!("{f:?}");
    }
    assert!(
        failures.is_empty(),
        "{} of {} failed",
        failures.len(),
        items.len()
    );
}
