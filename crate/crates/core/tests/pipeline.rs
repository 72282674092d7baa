use ocsr::chemgraph::{is_isomorphic, parse_molfile, write_molfile, MolGraph, Point, Strictness};
use ocsr::construct::{build_graph, estimate_bond_endpoints, ConstructConfig, DiagnosticKind};
use ocsr::corpus::{generate_corpus, CorpusConfig};
use ocsr::depictgen::{depict, Depiction, StyleParams};
use ocsr::detect::{
    oracle_detect, perturb, BBox, Detection, DetectionClass, DetectionSet, PerturbationParams,
};
use ocsr::evalbench::{
    load_manifest, load_reports, run_benchmark, write_report, BenchError, BenchmarkItem, ItemInput,
    PipelineConfig, ReportFormat,
};
use ocsr::labelparse::FragmentTable;
use proptest::prelude::*;

fn corpus(count: usize, seed: u64) -> Vec<MolGraph> {
    generate_corpus(&CorpusConfig {
        count,
        seed,
        max_atoms: 30,
        ..Default::default()
    })
    .into_iter()
    .map(|i| i.graph)
    .collect()
}

fn box_distance(p: Point, b: &BBox) -> f64 {
    let dx = (b.x0 - p.x).max(0.0).max(p.x - b.x1);
    let dy = (b.y0 - p.y).max(0.0).max(p.y - b.y1);
    dx.hypot(dy)
}

fn drawn(g: &MolGraph) -> Depiction {
    depict(g, &StyleParams::default(), &FragmentTable::builtin()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn estimated_endpoints_land_on_the_bonded_atoms(
        ax in 0.0..200.0f64, ay in 0.0..200.0f64,
        angle in 0.0..std::f64::consts::TAU, len in 25.0..60.0f64,
        jx in -1.0..1.0f64, jy in -1.0..1.0f64,
        far in 2.0..4.0f64, swap in any::<bool>(),
    ) {
        let a = Point::new(ax, ay);
        let b = Point::new(ax + len * angle.cos(), ay + len * angle.sin());
        let pad = 2.0;
        let bond = Detection::new(
            DetectionClass::Single,
            BBox::new(a.x.min(b.x) - pad, a.y.min(b.y) - pad, a.x.max(b.x) + pad, a.y.max(b.y) + pad),
        );
        // atom centers jittered by up to 10% of the bond length, plus a distant distractor
        let j = 0.1 * len;
        let distractor = Point::new(ax - far * len, ay - far * len);
        let mut centers = vec![Point::new(a.x + j * jx, a.y + j * jy), b, distractor];
        if swap {
            centers.swap(0, 1);
        }
        let e = estimate_bond_endpoints(&bond, &centers);
        let near = |p: Point| {
            (0..centers.len())
                .min_by(|&i, &k| p.dist(centers[i]).total_cmp(&p.dist(centers[k])))
                .unwrap()
        };
        let mut got = [near(e[0]), near(e[1])];
        got.sort();
        prop_assert_eq!(got, [0, 1]);
    }
}

#[test]
fn given_endpoints_are_returned_unchanged() {
    let d = Detection::new(DetectionClass::Single, BBox::new(0.0, 0.0, 10.0, 10.0))
        .with_endpoints(Point::new(1.0, 2.0), Point::new(9.0, 8.0));
    let e = estimate_bond_endpoints(&d, &[Point::new(0.0, 0.0), Point::new(10.0, 10.0)]);
    assert_eq!(e, [Point::new(1.0, 2.0), Point::new(9.0, 8.0)]);
}

#[test]
fn wider_radius_never_adds_unmatched_endpoints() {
    let factors = [0.2, 0.3, 0.45, 0.6, 0.8, 1.0];
    for (i, g) in corpus(25, 4).iter().enumerate() {
        let set = perturb(
            &oracle_detect(&drawn(g)),
            &PerturbationParams {
                jitter_sigma: 4.0,
                seed: i as u64,
                ..Default::default()
            },
        );
        let counts: Vec<usize> = factors
            .iter()
            .map(|&f| {
                let cfg = ConstructConfig {
                    endpoint_match_radius_factor: f,
                    ..Default::default()
                };
                build_graph(&set, &cfg)
                    .unwrap()
                    .count(DiagnosticKind::UnmatchedBondEndpoint)
            })
            .collect();
        assert!(
            counts.windows(2).all(|w| w[1] <= w[0]),
            "molecule {i}: {counts:?}"
        );
    }
}

#[test]
fn construction_is_deterministic() {
    let cfg = ConstructConfig::default();
    let p = PerturbationParams {
        jitter_sigma: 3.0,
        drop_prob: 0.05,
        relabel_prob: 0.05,
        strip_endpoints: true,
        seed: 9,
    };
    assert_eq!(corpus(10, 8), corpus(10, 8));
    for g in corpus(10, 8) {
        let set = oracle_detect(&drawn(&g));
        assert_eq!(perturb(&set, &p), perturb(&set, &p));
        let noisy = perturb(&set, &p);
        let a = build_graph(&noisy, &cfg).unwrap().without_timing();
        let b = build_graph(&noisy, &cfg).unwrap().without_timing();
        assert_eq!(a, b);
        assert_eq!(write_molfile(&a.graph), write_molfile(&b.graph));
    }
}

#[test]
fn dropping_a_terminal_atom_leaves_one_dangling_bond() {
    let cfg = ConstructConfig::default();
    let mut tried = 0;
    for g in corpus(30, 12) {
        let d = drawn(&g);
        let set = oracle_detect(&d);
        // a terminal atom box with no other atom box crowding it
        let atoms: Vec<&Detection> = set
            .detections
            .iter()
            .filter(|d| d.class.is_atom())
            .collect();
        let clear = |det: &Detection| {
            let c = det.bbox.center();
            atoms
                .iter()
                .filter(|o| o.bbox != det.bbox)
                .all(|o| box_distance(c, &o.bbox) > 0.8 * d.style.image_scale)
        };
        let Some(k) = set.detections.iter().position(|det| {
            det.class.is_atom()
                && det.truth_ids.len() == 1
                && g.degree(det.truth_ids[0]) == 1
                && clear(det)
        }) else {
            continue;
        };
        tried += 1;
        let dropped = g.without_atoms(&[set.detections[k].truth_ids[0]]).0;
        let mut less = set.clone();
        less.detections.remove(k);
        let r = build_graph(&less, &cfg).unwrap();
        assert_eq!(
            r.count(DiagnosticKind::UnmatchedBondEndpoint),
            1,
            "{:?}",
            r.diagnostics
        );
        assert!(r.graph.is_connected());
        assert!(is_isomorphic(&r.graph, &dropped, Strictness::OrderOnly));
    }
    assert!(
        tried >= 20,
        "only {tried} molecules had a terminal atom box"
    );
}

#[test]
fn super_groups_round_trip_through_their_labels() {
    let table = FragmentTable::builtin();
    let items = generate_corpus(&CorpusConfig {
        count: 100,
        seed: 21,
        with_fragments: true,
        max_atoms: 30,
        ..Default::default()
    });
    let style = StyleParams {
        superatom_collapse_prob: 1.0,
        ..Default::default()
    };
    let mut groups = 0;
    for item in &items {
        let d = depict(&item.graph, &style, &table).unwrap();
        groups += d.groups;
        let set = oracle_detect(&d);
        let r = build_graph(&set, &ConstructConfig::default()).unwrap();
        assert!(
            is_isomorphic(&r.graph, &item.graph, Strictness::OrderOnly),
            "{}: {:?}",
            item.smiles,
            r.diagnostics
        );
    }
    assert!(groups >= 100);
}

#[test]
fn json_reports_round_trip() {
    let items: Vec<BenchmarkItem> = corpus(8, 30)
        .into_iter()
        .enumerate()
        .map(|(i, g)| BenchmarkItem {
            id: format!("m{i}"),
            input: ItemInput::Detections(oracle_detect(&drawn(&g))),
            truth: g,
        })
        .collect();
    let cfg = PipelineConfig {
        perturbation: Some(PerturbationParams {
            drop_prob: 0.1,
            seed: 2,
            ..Default::default()
        }),
        ..Default::default()
    };
    let report = run_benchmark("rt", &items, &cfg, 2).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("r.json");
    write_report(&report, ReportFormat::Json, &p).unwrap();
    assert_eq!(load_reports(&p).unwrap(), vec![report]);
}

#[test]
fn manifest_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let g = &corpus(1, 3)[0];
    std::fs::write(
        tmp.path().join("a.json"),
        oracle_detect(&drawn(g)).to_json(),
    )
    .unwrap();
    std::fs::write(tmp.path().join("a.mol"), write_molfile(g)).unwrap();
    std::fs::write(
        tmp.path().join("manifest.tsv"),
        "# header\na\ta.json\ta.mol\nb\tmissing.json\ta.mol\n",
    )
    .unwrap();
    match load_manifest(tmp.path()) {
        Err(BenchError::Manifest { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("missing.json"));
        }
        other => panic!("{other:?}"),
    }
    std::fs::write(tmp.path().join("manifest.tsv"), "a\ta.json\ta.mol\n").unwrap();
    let items = load_manifest(tmp.path()).unwrap();
    assert!(is_isomorphic(
        &items[0].truth,
        &parse_molfile(&write_molfile(g)).unwrap(),
        Strictness::StereoStrict
    ));
}

#[test]
fn annotation_documents_round_trip() {
    for g in corpus(5, 6) {
        let set = oracle_detect(&drawn(&g));
        assert_eq!(DetectionSet::from_json(&set.to_json()).unwrap(), set);
    }
}

#[test]
fn schema_file_lists_every_class() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schema/annotations.v1.schema.json"
    ))
    .unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    let defs = &schema["$defs"];
    let listed = |key: &str| -> Vec<String> {
        let mut v: Vec<String> = defs[key]["enum"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().to_string())
            .collect();
        v.sort();
        v
    };
    // text boxes are nodes too, but the schema lists them on their own
    let mut atoms: Vec<String> = DetectionClass::ALL
        .iter()
        .filter(|c| c.is_atom() && **c != DetectionClass::Text)
        .map(|c| c.as_str().to_string())
        .collect();
    let mut bonds: Vec<String> = DetectionClass::ALL
        .iter()
        .filter(|c| c.is_bond())
        .map(|c| c.as_str().to_string())
        .collect();
    atoms.sort();
    bonds.sort();
    assert_eq!(listed("atom_class"), atoms);
    assert_eq!(listed("bond_class"), bonds);
    assert_eq!(
        schema["$defs"]["object"]["properties"]["class"]["anyOf"][2]["const"],
        "Text"
    );
}
