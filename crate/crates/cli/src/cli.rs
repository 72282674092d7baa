//! Command-line definitions.

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocsr::construct::ConstructConfig;
use ocsr::depictgen::NoiseKind;
use ocsr::detect::PerturbationParams;
use ocsr::evalbench::ReportFormat;
use ocsr::labelparse::FragmentTable;
use ocsr::mcs::{BondCompat, MatchConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ocsr",
    version,
    about = "Generate annotated depictions, rebuild molecules from detections, and score the results"
)]
pub struct Cli {
    /// Fragment table (TSV: key, aliases, SMILES). The built-in table when unset.
    #[arg(long, global = true, env = "OCSR_FRAGMENTS", value_name = "TSV")]
    pub fragments: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, short = 'j', global = true, default_value_t = 0)]
    pub jobs: usize,
    /// More log output (-v info, -vv debug).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded corpus: images, annotation JSON, truth molfiles and manifest.tsv.
    Generate(GenerateArgs),
    /// Rebuild molecules from detection JSON files or annotated images.
    Recognize(RecognizeArgs),
    /// Score datasets and write accuracy and runtime reports.
    Evaluate(EvaluateArgs),
    /// Serve the review API over a session file.
    Serve(ServeArgs),
    /// Print the fragment table in use as TSV.
    DumpFragments(DumpArgs),
}

/// An inclusive range written `a` or `a:b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range<T>(pub T, pub T);

fn parse_range<T: std::str::FromStr + PartialOrd + Copy>(s: &str) -> Result<Range<T>, String>
where
    T::Err: std::fmt::Display,
{
    let num = |t: &str| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}"));
    let r = match s.split_once(':') {
        Some((a, b)) => Range(num(a)?, num(b)?),
        None => {
            let v = num(s)?;
            Range(v, v)
        }
    };
    if r.1 < r.0 {
        return Err(format!("range {s:?} is reversed"));
    }
    Ok(r)
}

fn parse_f64_range(s: &str) -> Result<Range<f64>, String> {
    parse_range(s)
}

fn parse_u32_range(s: &str) -> Result<Range<u32>, String> {
    parse_range(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    None,
    Gaussian,
    SaltPepper,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::None => NoiseKind::None,
            NoiseArg::Gaussian => NoiseKind::Gaussian,
            NoiseArg::SaltPepper => NoiseKind::SaltPepper,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub min_atoms: usize,
    #[arg(long, default_value_t = 40)]
    pub max_atoms: usize,
    /// Keep layouts with crossing bonds.
    #[arg(long)]
    pub allow_crossings: bool,
    /// Attach a fragment-table group to every molecule.
    #[arg(long)]
    pub with_fragments: bool,
    /// Chance that an eligible sp3 carbon gets a stereo bond.
    #[arg(long, default_value_t = 0.15)]
    pub stereo_prob: f64,
    /// Pixels per bond length, `a` or `a:b`.
    #[arg(long, default_value = "40", value_parser = parse_f64_range)]
    pub image_scale: Range<f64>,
    #[arg(long, default_value = "2", value_parser = parse_u32_range)]
    pub stroke_width: Range<u32>,
    #[arg(long, default_value = "1", value_parser = parse_f64_range)]
    pub font_scale: Range<f64>,
    /// Degrees.
    #[arg(long, default_value = "0", value_parser = parse_f64_range)]
    pub rotation: Range<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    pub noise: NoiseArg,
    #[arg(long, default_value = "0", value_parser = parse_f64_range)]
    pub noise_level: Range<f64>,
    /// Chance that each matched table fragment is drawn as its label.
    #[arg(long, default_value_t = 0.0)]
    pub collapse_prob: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstructArgs {
    /// Endpoint match radius as a multiple of the median bond box diagonal.
    #[arg(long, default_value_t = 0.6)]
    pub radius_factor: f64,
    #[arg(long, default_value_t = 0.25)]
    pub min_confidence: f64,
    /// IoU above which same-class boxes are merged.
    #[arg(long, default_value_t = 0.5)]
    pub dedupe_iou: f64,
    /// Keep super-group labels as single placeholder atoms.
    #[arg(long)]
    pub no_expand: bool,
}

impl ConstructArgs {
    pub fn config(&self, table: &FragmentTable) -> ConstructConfig {
        ConstructConfig {
            endpoint_match_radius_factor: self.radius_factor,
            min_confidence: self.min_confidence,
            dedupe_iou: self.dedupe_iou,
            expand_supergroups: !self.no_expand,
            fragment_table: table.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    /// Std of the rigid per-box shift in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    pub drop_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    pub relabel_prob: f64,
    /// Remove bond endpoints so they must be estimated from boxes.
    #[arg(long)]
    pub strip_endpoints: bool,
    #[arg(long, default_value_t = 0)]
    pub perturb_seed: u64,
}

impl PerturbArgs {
    /// `None` when every knob is at its neutral value.
    pub fn params(&self) -> Option<PerturbationParams> {
        let active = self.jitter > 0.0
            || self.drop_prob > 0.0
            || self.relabel_prob > 0.0
            || self.strip_endpoints;
        active.then_some(PerturbationParams {
            jitter_sigma: self.jitter,
            drop_prob: self.drop_prob,
            relabel_prob: self.relabel_prob,
            strip_endpoints: self.strip_endpoints,
            seed: self.perturb_seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Molfile,
    Smiles,
    Sdf,
}

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    /// Detection JSON files, or images with annotation JSON beside them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Molfile)]
    pub format: OutputFormat,
    /// Output file; stdout when unset.
    #[arg(long, short = 'o', conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Write one `<id>.mol` or `<id>.smi` per input here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Diagnostics as JSON lines; a short summary goes to stderr when unset.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    #[command(flatten)]
    pub construct: ConstructArgs,
    #[command(flatten)]
    pub perturb: PerturbArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportArg {
    Csv,
    Json,
    Markdown,
    All,
}

impl ReportArg {
    pub fn formats(self) -> Vec<ReportFormat> {
        match self {
            ReportArg::Csv => vec![ReportFormat::Csv],
            ReportArg::Json => vec![ReportFormat::Json],
            ReportArg::Markdown => vec![ReportFormat::Markdown],
            ReportArg::All => vec![
                ReportFormat::Csv,
                ReportFormat::Json,
                ReportFormat::Markdown,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BondCompatArg {
    OrderOnly,
    ExactKind,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset directories, each with a manifest.tsv.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportArg::All)]
    pub format: ReportArg,
    /// Where `report.<ext>` files go.
    #[arg(long, short = 'o', default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = BondCompatArg::OrderOnly)]
    pub bond_compat: BondCompatArg,
    /// Let atoms of different elements match.
    #[arg(long)]
    pub any_element: bool,
    #[arg(long)]
    pub ignore_charge: bool,
    /// Per-pair MCS search budget.
    #[arg(long, default_value_t = 2000)]
    pub timeout_ms: u64,
    /// Larger molecules get a greedy MCS.
    #[arg(long, default_value_t = 200)]
    pub max_atoms_for_search: usize,
    #[command(flatten)]
    pub construct: ConstructArgs,
    #[command(flatten)]
    pub perturb: PerturbArgs,
}

impl EvaluateArgs {
    pub fn matching(&self) -> MatchConfig {
        MatchConfig {
            element_must_match: !self.any_element,
            charge_must_match: !self.ignore_charge,
            bond_compat: match self.bond_compat {
                BondCompatArg::OrderOnly => BondCompat::OrderOnly,
                BondCompatArg::ExactKind => BondCompat::ExactKind,
            },
            timeout_ms: self.timeout_ms,
            max_atoms_for_search: self.max_atoms_for_search,
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Session file; created from --dataset when missing.
    #[arg(long)]
    pub session: PathBuf,
    /// Dataset directory to start a new session from.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8000")]
    pub bind: SocketAddr,
    /// Built review UI to serve at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[command(flatten)]
    pub construct: ConstructArgs,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Output file; stdout when unset.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_f64_range("40").unwrap(), Range(40.0, 40.0));
        assert_eq!(parse_f64_range("30:50").unwrap(), Range(30.0, 50.0));
        assert!(parse_f64_range("5:1").is_err());
        assert!(parse_u32_range("x").is_err());
    }

    #[test]
    fn neutral_perturbation_is_none() {
        let cli = Cli::try_parse_from(["ocsr", "recognize", "a.json"]).unwrap();
        let Command::Recognize(r) = cli.command else {
            panic!()
        };
        assert!(r.perturb.params().is_none());
        let cli = Cli::try_parse_from(["ocsr", "recognize", "a.json", "--jitter", "2"]).unwrap();
        let Command::Recognize(r) = cli.command else {
            panic!()
        };
        assert_eq!(r.perturb.params().unwrap().jitter_sigma, 2.0);
    }
}
