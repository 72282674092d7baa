//! Benchmark datasets, per-item scoring and report files.
//!
//! A dataset is a directory with a `manifest.tsv` of
//! `id<TAB>input_path<TAB>truth_path` rows (paths relative to the
//! directory). Inputs are detection JSON files; an image path is accepted
//! when a JSON file with the same stem sits next to it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::{
    find_isomorphism, parse_molfile, parse_smiles, write_molfile_titled, MolGraph,
};
use crate::construct::{build_graph, ConstructConfig};
use crate::corpus::{generate_corpus, CorpusConfig};
use crate::depictgen::{depict, StyleRanges};
use crate::detect::{load_detections, perturb, DetectionSet, PerturbationParams};
use crate::labelparse::FragmentTable;
use crate::mcs::{index_from_result, max_common_subgraph, MatchConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Manifest {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dataset has no items")]
    Empty,
    #[error("could not build a worker pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Generate(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub exact: bool,
    pub index: f64,
}

/// Exact match and consistency index of a prediction against the truth.
/// Exact match implies an index of 1.
pub fn evaluate_pair(pred: &MolGraph, truth: &MolGraph, cfg: &MatchConfig) -> PairScore {
    if pred.is_empty() {
        return PairScore {
            exact: false,
            index: 0.0,
        };
    }
    if find_isomorphism(pred, truth, cfg.rules()).is_some() {
        return PairScore {
            exact: true,
            index: 1.0,
        };
    }
    let r = max_common_subgraph(pred, truth, cfg);
    PairScore {
        exact: false,
        index: index_from_result(&r, pred, truth),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemInput {
    /// Detection JSON on disk.
    File(PathBuf),
    Detections(DetectionSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkItem {
    pub id: String,
    pub input: ItemInput,
    pub truth: MolGraph,
}

/// The detection file for an input path: images (`.png`, `.pgm`) resolve
/// to `x.json` beside them or to `../annotations/x.json`; anything else is
/// taken as a detection file.
pub fn annotation_path(p: &Path) -> PathBuf {
    match p.extension().and_then(|e| e.to_str()) {
        Some("png") | Some("pgm") => {
            let json = p.with_extension("json");
            if json.exists() {
                return json;
            }
            // images/x.png next to annotations/x.json
            let stem = p.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
            let sibling = p
                .parent()
                .and_then(Path::parent)
                .map(|root| root.join("annotations").join(&stem).with_extension("json"));
            sibling.filter(|s| s.exists()).unwrap_or(json)
        }
        _ => p.to_path_buf(),
    }
}

/// Reads a truth structure: molfile for `.mol`/`.sdf`, SMILES for
/// `.smi`/`.smiles`, otherwise whichever parses.
pub fn load_truth(path: &Path) -> Result<MolGraph, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let smiles =
        || parse_smiles(text.split_whitespace().next().unwrap_or("")).map_err(|e| e.to_string());
    match path.extension().and_then(|e| e.to_str()) {
        Some("mol") | Some("sdf") => parse_molfile(&text).map_err(|e| e.to_string()),
        Some("smi") | Some("smiles") => smiles(),
        _ => parse_molfile(&text)
            .map_err(|e| e.to_string())
            .or_else(|_| smiles()),
    }
}

/// Loads `dir/manifest.tsv`. Blank lines and `#` comments are skipped.
pub fn load_manifest(dir: &Path) -> Result<Vec<BenchmarkItem>, BenchError> {
    let path = dir.join("manifest.tsv");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut items = Vec::new();
    let bad = |line: usize, message: String| BenchError::Manifest {
        path: path.display().to_string(),
        line,
        message,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 || cols.iter().any(|c| c.trim().is_empty()) {
            return Err(bad(
                line,
                format!("expected id, input_path, truth_path separated by tabs; got {raw:?}"),
            ));
        }
        let input = annotation_path(&dir.join(cols[1].trim()));
        if !input.exists() {
            return Err(bad(
                line,
                format!("input {} does not exist", input.display()),
            ));
        }
        let truth_path = dir.join(cols[2].trim());
        let truth = load_truth(&truth_path)
            .map_err(|e| bad(line, format!("truth {}: {e}", truth_path.display())))?;
        items.push(BenchmarkItem {
            id: cols[0].trim().to_string(),
            input: ItemInput::File(input),
            truth,
        });
    }
    Ok(items)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub construct: ConstructConfig,
    pub matching: MatchConfig,
    /// Applied to every item's detections, re-seeded per item id.
    pub perturbation: Option<PerturbationParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub id: String,
    pub exact: bool,
    pub index: f64,
    pub construction_ms: f64,
    pub total_ms: f64,
    /// Construction diagnostics, or the error that stopped the item.
    pub diagnostics: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub dataset: String,
    pub n_items: usize,
    pub n_exact: usize,
    pub n_failures: usize,
    pub exact_match_pct: f64,
    pub mcs_accuracy_pct: f64,
    pub median_index: f64,
    /// Counts of index values in [0, 0.1), ..., [0.9, 1.0) and exactly 1.
    pub index_histogram: Vec<usize>,
    pub mw_mean: f64,
    pub mw_std: f64,
    pub load_time_s: f64,
    pub total_runtime_s: f64,
    pub ms_per_item: f64,
    pub median_construction_ms: f64,
    /// All items, sorted by id.
    pub items: Vec<ItemResult>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &ItemResult> {
        self.items.iter().filter(|i| !i.exact)
    }

    /// A copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.load_time_s = 0.0;
        r.total_runtime_s = 0.0;
        r.ms_per_item = 0.0;
        r.median_construction_ms = 0.0;
        for i in &mut r.items {
            i.construction_ms = 0.0;
            i.total_ms = 0.0;
        }
        r
    }
}

fn run_item(item: &BenchmarkItem, cfg: &PipelineConfig) -> ItemResult {
    let start = Instant::now();
    let failed = |error: String| ItemResult {
        id: item.id.clone(),
        exact: false,
        index: 0.0,
        construction_ms: 0.0,
        total_ms: start.elapsed().as_secs_f64() * 1000.0,
        diagnostics: vec![error.clone()],
        error: Some(error),
    };
    let loaded;
    let set = match &item.input {
        ItemInput::Detections(s) => s,
        ItemInput::File(p) => match load_detections(p) {
            Ok(s) => {
                loaded = s;
                &loaded
            }
            Err(e) => return failed(e.to_string()),
        },
    };
    let perturbed;
    let set = match &cfg.perturbation {
        Some(p) => {
            perturbed = perturb(set, &p.reseeded(&item.id));
            &perturbed
        }
        None => set,
    };
    let rec = match build_graph(set, &cfg.construct) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let score = evaluate_pair(&rec.graph, &item.truth, &cfg.matching);
    let mut diagnostics: Vec<String> = rec
        .diagnostics
        .iter()
        .map(|d| format!("{}: {}", d.kind.as_str(), d.detail))
        .collect();
    if !score.exact && diagnostics.is_empty() {
        diagnostics.push(format!(
            "mismatch: {} atoms and {} bonds recognized, truth has {} and {}; consistency index {:.4}",
            rec.graph.atom_count(),
            rec.graph.bond_count(),
            item.truth.atom_count(),
            item.truth.bond_count(),
            score.index
        ));
    }
    ItemResult {
        id: item.id.clone(),
        exact: score.exact,
        index: score.index,
        construction_ms: rec.construction_time_ms,
        total_ms: start.elapsed().as_secs_f64() * 1000.0,
        diagnostics,
        error: None,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Recognizes and scores every item on `jobs` worker threads (0 means
/// one per core). Metrics do not depend on `jobs` or item order.
pub fn run_benchmark(
    dataset: &str,
    items: &[BenchmarkItem],
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Report, BenchError> {
    run_benchmark_timed(dataset, items, cfg, jobs, 0.0)
}

fn run_benchmark_timed(
    dataset: &str,
    items: &[BenchmarkItem],
    cfg: &PipelineConfig,
    jobs: usize,
    load_time_s: f64,
) -> Result<Report, BenchError> {
    if items.is_empty() {
        return Err(BenchError::Empty);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let start = Instant::now();
    let mut results: Vec<ItemResult> =
        pool.install(|| items.par_iter().map(|it| run_item(it, cfg)).collect());
    let total = start.elapsed().as_secs_f64();
    results.sort_by(|a, b| a.id.cmp(&b.id));

    let n = results.len();
    let n_exact = results.iter().filter(|r| r.exact).count();
    let n_full = results.iter().filter(|r| r.index >= 1.0 - 1e-12).count();
    let mut hist = vec![0usize; 11];
    for r in &results {
        let bin = if r.index >= 1.0 - 1e-12 {
            10
        } else {
            ((r.index * 10.0).floor() as usize).min(9)
        };
        hist[bin] += 1;
    }
    // molecular weights over the truths, in id order for stable sums
    let mut truths: Vec<(&str, f64)> = items
        .iter()
        .map(|i| (i.id.as_str(), i.truth.molecular_weight()))
        .collect();
    truths.sort_by(|a, b| a.0.cmp(b.0));
    let mw: Vec<f64> = truths.iter().map(|t| t.1).collect();
    let mw_mean = mw.iter().sum::<f64>() / n as f64;
    let mw_std = if n > 1 {
        (mw.iter().map(|m| (m - mw_mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Report {
        dataset: dataset.to_string(),
        n_items: n,
        n_exact,
        n_failures: n - n_exact,
        exact_match_pct: 100.0 * n_exact as f64 / n as f64,
        mcs_accuracy_pct: 100.0 * n_full as f64 / n as f64,
        median_index: median(results.iter().map(|r| r.index).collect()),
        index_histogram: hist,
        mw_mean,
        mw_std,
        load_time_s,
        total_runtime_s: total,
        ms_per_item: total * 1000.0 / n as f64,
        median_construction_ms: median(results.iter().map(|r| r.construction_ms).collect()),
        items: results,
    })
}

/// [`load_manifest`] then [`run_benchmark`], named after the directory.
pub fn run_dataset(dir: &Path, cfg: &PipelineConfig, jobs: usize) -> Result<Report, BenchError> {
    let t = Instant::now();
    let items = load_manifest(dir)?;
    let load = t.elapsed().as_secs_f64();
    let name = dir
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| dir.display().to_string());
    run_benchmark_timed(&name, &items, cfg, jobs, load)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

pub const CSV_HEADER: &str = "dataset,n,exact%,mcs%,median_index,total_runtime_s,ms_per_item";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders reports; CSV and markdown get one row per report, JSON is an
/// array.
pub fn render_reports(reports: &[Report], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in reports {
                let _ = writeln!(
                    out,
                    "{},{},{:.2},{:.2},{:.4},{:.3},{:.2}",
                    csv_field(&r.dataset),
                    r.n_items,
                    r.exact_match_pct,
                    r.mcs_accuracy_pct,
                    r.median_index,
                    r.total_runtime_s,
                    r.ms_per_item
                );
            }
        }
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(reports).expect("reports serialize");
            out.push('\n');
        }
        ReportFormat::Markdown => {
            out.push_str("| Dataset | N | Exact match (%) | MCS accuracy (%) | Median index | Runtime (s) | ms/item |\n");
            out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
            for r in reports {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.2} | {:.2} | {:.4} | {:.3} | {:.2} |",
                    r.dataset.replace('|', "\\|"),
                    r.n_items,
                    r.exact_match_pct,
                    r.mcs_accuracy_pct,
                    r.median_index,
                    r.total_runtime_s,
                    r.ms_per_item
                );
            }
        }
    }
    out
}

pub fn write_reports(
    reports: &[Report],
    format: ReportFormat,
    path: &Path,
) -> Result<(), BenchError> {
    std::fs::write(path, render_reports(reports, format)).map_err(io_err(path))
}

pub fn write_report(report: &Report, format: ReportFormat, path: &Path) -> Result<(), BenchError> {
    write_reports(std::slice::from_ref(report), format, path)
}

/// Reads a JSON report file written by [`write_reports`].
pub fn load_reports(path: &Path) -> Result<Vec<Report>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Manifest {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// What [`generate_dataset`] wrote for one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedItem {
    pub id: String,
    pub smiles: String,
    pub width: u32,
    pub height: u32,
    pub crossings: usize,
    pub groups: usize,
}

/// Writes a corpus as `images/<id>.png`, `annotations/<id>.json`,
/// `truth/<id>.mol` and `manifest.tsv`. Output bytes depend only on the
/// arguments, not on `jobs`.
pub fn generate_dataset(
    dir: &Path,
    corpus: &CorpusConfig,
    styles: &StyleRanges,
    table: &FragmentTable,
    jobs: usize,
) -> Result<Vec<GeneratedItem>, BenchError> {
    for sub in ["images", "annotations", "truth"] {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let molecules = pool.install(|| generate_corpus(corpus));
    let results: Vec<Result<GeneratedItem, BenchError>> = pool.install(|| {
        molecules
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let style = styles.sample(
                    corpus
                        .seed
                        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                        .wrapping_add(i as u64),
                );
                let d = depict(&m.graph, &style, table)
                    .map_err(|e| BenchError::Generate(format!("{}: {e}", m.id)))?;
                let write =
                    |p: PathBuf, bytes: &[u8]| std::fs::write(&p, bytes).map_err(io_err(&p));
                write(
                    dir.join("images").join(format!("{}.png", m.id)),
                    &d.to_png()
                        .map_err(|e| BenchError::Generate(e.to_string()))?,
                )?;
                write(
                    dir.join("annotations").join(format!("{}.json", m.id)),
                    d.annotation_json().as_bytes(),
                )?;
                write(
                    dir.join("truth").join(format!("{}.mol", m.id)),
                    write_molfile_titled(&m.graph, &m.id).as_bytes(),
                )?;
                Ok(GeneratedItem {
                    id: m.id.clone(),
                    smiles: m.smiles.clone(),
                    width: d.width,
                    height: d.height,
                    crossings: d.crossings.len(),
                    groups: d.groups,
                })
            })
            .collect()
    });
    let items = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut manifest = String::from("# id\tinput_path\ttruth_path\n");
    for it in &items {
        let _ = writeln!(manifest, "{0}\tannotations/{0}.json\ttruth/{0}.mol", it.id);
    }
    let p = dir.join("manifest.tsv");
    std::fs::write(&p, manifest).map_err(io_err(&p))?;
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_scores() {
        let g = parse_smiles("CCO").unwrap();
        let cfg = MatchConfig::default();
        assert_eq!(
            evaluate_pair(&g, &g, &cfg),
            PairScore {
                exact: true,
                index: 1.0
            }
        );
        assert_eq!(
            evaluate_pair(&MolGraph::new(), &g, &cfg),
            PairScore {
                exact: false,
                index: 0.0
            }
        );
        let s = evaluate_pair(&parse_smiles("CC").unwrap(), &g, &cfg);
        assert!(!s.exact);
        assert!((s.index - 3.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_markdown_rows() {
        let r = Report {
            dataset: "demo".into(),
            n_items: 2,
            n_exact: 1,
            n_failures: 1,
            exact_match_pct: 50.0,
            mcs_accuracy_pct: 50.0,
            median_index: 0.75,
            index_histogram: vec![0; 11],
            mw_mean: 0.0,
            mw_std: 0.0,
            load_time_s: 0.0,
            total_runtime_s: 1.0,
            ms_per_item: 500.0,
            median_construction_ms: 1.0,
            items: Vec::new(),
        };
        let csv = render_reports(std::slice::from_ref(&r), ReportFormat::Csv);
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(
            csv.lines().nth(1),
            Some("demo,2,50.00,50.00,0.7500,1.000,500.00")
        );
        let md = render_reports(&[r.clone(), r], ReportFormat::Markdown);
        assert_eq!(md.lines().filter(|l| l.starts_with("| demo")).count(), 2);
    }
}
