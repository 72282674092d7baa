//! Subcommand implementations. Errors returned here are I/O or
//! configuration problems; recognition problems are reported, not raised.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context};
use ocsr::chemgraph::{canonical_smiles, write_molfile_titled, write_sdf, MolGraph, SdfRecord};
use ocsr::construct::{build_graph, ConstructConfig, RecognizedMolecule};
use ocsr::corpus::CorpusConfig;
use ocsr::depictgen::StyleRanges;
use ocsr::detect::{load_detections, perturb, PerturbationParams};
use ocsr::evalbench::{
    annotation_path, render_reports, run_dataset, write_reports, PipelineConfig,
};
use ocsr::labelparse::FragmentTable;
use serde_json::json;

use crate::cli::{
    Cli, Command, DumpArgs, EvaluateArgs, GenerateArgs, OutputFormat, RecognizeArgs, ServeArgs,
};
use crate::session::Store;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let table = load_table(cli.fragments.as_deref())?;
    match cli.command {
        Command::Generate(a) => generate(&a, &table, cli.jobs),
        Command::Recognize(a) => recognize(&a, &table, cli.jobs),
        Command::Evaluate(a) => evaluate(&a, &table, cli.jobs),
        Command::Serve(a) => serve(&a, &table, cli.jobs),
        Command::DumpFragments(a) => dump_fragments(&a, &table),
    }
}

pub fn load_table(path: Option<&Path>) -> anyhow::Result<FragmentTable> {
    match path {
        Some(p) => {
            FragmentTable::load(p).with_context(|| format!("fragment table {}", p.display()))
        }
        None => Ok(FragmentTable::builtin()),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn probability(name: &str, v: f64) -> anyhow::Result<()> {
    ensure!(
        (0.0..=1.0).contains(&v),
        "--{name} must be within [0, 1], got {v}"
    );
    Ok(())
}

pub fn generate(a: &GenerateArgs, table: &FragmentTable, jobs: usize) -> anyhow::Result<()> {
    ensure!(
        a.min_atoms >= 1 && a.min_atoms <= a.max_atoms,
        "need 1 <= --min-atoms <= --max-atoms"
    );
    probability("stereo-prob", a.stereo_prob)?;
    probability("collapse-prob", a.collapse_prob)?;
    ensure!(a.image_scale.0 > 0.0, "--image-scale must be positive");
    ensure!(a.stroke_width.0 >= 1, "--stroke-width must be at least 1");
    ensure!(a.font_scale.0 > 0.0, "--font-scale must be positive");
    ensure!(a.noise_level.0 >= 0.0, "--noise-level must not be negative");
    let corpus = CorpusConfig {
        count: a.count,
        seed: a.seed,
        min_atoms: a.min_atoms,
        max_atoms: a.max_atoms,
        allow_crossings: a.allow_crossings,
        with_fragments: a.with_fragments,
        stereo_prob: a.stereo_prob,
    };
    let styles = StyleRanges {
        image_scale: (a.image_scale.0, a.image_scale.1),
        stroke_width_px: (a.stroke_width.0, a.stroke_width.1),
        font_scale: (a.font_scale.0, a.font_scale.1),
        rotation_deg: (a.rotation.0, a.rotation.1),
        noise_kind: a.noise.into(),
        noise_level: (a.noise_level.0, a.noise_level.1),
        superatom_collapse_prob: a.collapse_prob,
    };
    let items = ocsr::evalbench::generate_dataset(&a.out, &corpus, &styles, table, jobs)?;
    let groups: usize = items.iter().map(|i| i.groups).sum();
    eprintln!(
        "wrote {} items ({groups} collapsed groups) to {}",
        items.len(),
        a.out.display()
    );
    Ok(())
}

/// One recognized input.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognized {
    pub id: String,
    pub result: Result<RecognizedMolecule, String>,
}

impl Recognized {
    pub fn graph(&self) -> MolGraph {
        self.result
            .as_ref()
            .map(|m| m.graph.clone())
            .unwrap_or_default()
    }
}

fn input_id(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

/// Loads and recognizes every input in parallel; output order is input order.
pub fn recognize_inputs(
    inputs: &[PathBuf],
    cfg: &ConstructConfig,
    perturbation: Option<PerturbationParams>,
    jobs: usize,
) -> anyhow::Result<Vec<Recognized>> {
    use rayon::prelude::*;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| {
        inputs
            .par_iter()
            .map(|p| {
                let id = input_id(p);
                let set = load_detections(annotation_path(p))?;
                let set = match &perturbation {
                    Some(params) => perturb(&set, &params.reseeded(&id)),
                    None => set,
                };
                let result = build_graph(&set, cfg).map_err(|e| e.to_string());
                Ok(Recognized { id, result })
            })
            .collect()
    })
}

/// The records in one output format.
pub fn render_records(items: &[Recognized], format: OutputFormat) -> String {
    match format {
        OutputFormat::Molfile => items
            .iter()
            .map(|r| write_molfile_titled(&r.graph(), &r.id))
            .collect(),
        OutputFormat::Smiles => items
            .iter()
            .map(|r| format!("{}\t{}\n", canonical_smiles(&r.graph()), r.id))
            .collect(),
        OutputFormat::Sdf => {
            let records: Vec<SdfRecord> = items
                .iter()
                .map(|r| SdfRecord {
                    title: r.id.clone(),
                    graph: r.graph(),
                    properties: vec![(
                        "diagnostics".into(),
                        r.result
                            .as_ref()
                            .map_or(1, |m| m.diagnostics.len())
                            .to_string(),
                    )],
                })
                .collect();
            write_sdf(&records)
        }
    }
}

/// JSON lines, one per diagnostic (or recognition error), in input order.
pub fn diagnostic_lines(items: &[Recognized]) -> String {
    let mut out = String::new();
    for r in items {
        match &r.result {
            Ok(m) => {
                for d in &m.diagnostics {
                    let line = json!({
                        "id": r.id,
                        "kind": d.kind,
                        "detail": d.detail,
                        "detections": d.detections,
                        "geometry": d.geometry,
                    });
                    out.push_str(&line.to_string());
                    out.push('\n');
                }
            }
            Err(e) => {
                out.push_str(&json!({ "id": r.id, "kind": "error", "detail": e }).to_string());
                out.push('\n');
            }
        }
    }
    out
}

pub fn recognize(a: &RecognizeArgs, table: &FragmentTable, jobs: usize) -> anyhow::Result<()> {
    let cfg = a.construct.config(table);
    if a.format == OutputFormat::Molfile && a.inputs.len() > 1 && a.out_dir.is_none() {
        bail!("molfile output for several inputs needs --out-dir (or use --format sdf)");
    }
    let items = recognize_inputs(&a.inputs, &cfg, a.perturb.params(), jobs)?;
    match &a.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let ext = match a.format {
                OutputFormat::Molfile => "mol",
                OutputFormat::Smiles => "smi",
                OutputFormat::Sdf => "sdf",
            };
            for r in &items {
                let p = dir.join(format!("{}.{ext}", r.id));
                let text = render_records(std::slice::from_ref(r), a.format);
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        None => write_out(a.out.as_deref(), &render_records(&items, a.format))?,
    }
    let lines = diagnostic_lines(&items);
    match &a.diagnostics {
        Some(p) => std::fs::write(p, &lines).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let flagged = items
                .iter()
                .filter(|r| {
                    r.result
                        .as_ref()
                        .map_or(true, |m| !m.diagnostics.is_empty())
                })
                .count();
            eprintln!(
                "recognized {} inputs; {flagged} with diagnostics ({} lines)",
                items.len(),
                lines.lines().count()
            );
        }
    }
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs, table: &FragmentTable, jobs: usize) -> anyhow::Result<()> {
    let cfg = PipelineConfig {
        construct: a.construct.config(table),
        matching: a.matching(),
        perturbation: a.perturb.params(),
    };
    cfg.construct.validate()?;
    let mut reports = Vec::new();
    for dir in &a.datasets {
        let r =
            run_dataset(dir, &cfg, jobs).with_context(|| format!("dataset {}", dir.display()))?;
        log::info!(
            "{}: {} items, {} failures",
            r.dataset,
            r.n_items,
            r.n_failures
        );
        reports.push(r);
    }
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    for f in a.format.formats() {
        let p = a.out_dir.join(format!("report.{}", f.extension()));
        write_reports(&reports, f, &p)?;
    }
    print!(
        "{}",
        render_reports(&reports, ocsr::evalbench::ReportFormat::Markdown)
    );
    Ok(())
}

pub fn serve(a: &ServeArgs, table: &FragmentTable, jobs: usize) -> anyhow::Result<()> {
    let cfg = a.construct.config(table);
    cfg.validate()?;
    let store = Arc::new(Store::open(&a.session, a.dataset.as_deref(), &cfg, jobs)?);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(crate::service::serve(store, a.bind, a.static_dir.clone()))
}

pub fn dump_fragments(a: &DumpArgs, table: &FragmentTable) -> anyhow::Result<()> {
    write_out(a.out.as_deref(), &table.to_tsv())
}
