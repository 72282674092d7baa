//! Distance-based graph construction from atom, bond and text detections.
//!
//! Atom and text boxes become nodes; every bond box is reduced to two
//! endpoints, each snapped to the nearest node within a radius scaled by
//! the median bond box diagonal. Bonds without endpoints are fitted to the
//! node pair that best explains their box. Problems never abort
//! construction: they are reported as [`Diagnostic`]s next to a best-effort
//! graph.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::{default_valence, Atom, BondKind, Element, MolGraph, Point};
use crate::depictgen::layout::segments_cross;
use crate::depictgen::Depiction;
use crate::detect::{dedupe_indices, oracle_detect, BBox, Detection, DetectionClass, DetectionSet};
use crate::labelparse::{
    expand_superatom_mapped, parse_label, ExpandError, FragmentTable, TextInterpretation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructConfig {
    /// Snap radius as a multiple of the median bond box diagonal.
    pub endpoint_match_radius_factor: f64,
    pub min_confidence: f64,
    /// IoU above which same-class boxes are merged.
    pub dedupe_iou: f64,
    pub expand_supergroups: bool,
    #[serde(skip, default = "FragmentTable::builtin")]
    pub fragment_table: FragmentTable,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        Self {
            endpoint_match_radius_factor: 0.6,
            min_confidence: 0.25,
            dedupe_iou: 0.5,
            expand_supergroups: true,
            fragment_table: FragmentTable::builtin(),
        }
    }
}

impl ConstructConfig {
    pub fn validate(&self) -> Result<(), ConstructError> {
        let f = self.endpoint_match_radius_factor;
        if !(f > 0.0 && f <= 2.0) {
            return Err(ConstructError::InvalidConfig(format!(
                "endpoint_match_radius_factor {f} is outside (0, 2]"
            )));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(ConstructError::InvalidConfig(format!(
                "min_confidence {} is outside [0, 1]",
                self.min_confidence
            )));
        }
        if !(0.0..=1.0).contains(&self.dedupe_iou) {
            return Err(ConstructError::InvalidConfig(format!(
                "dedupe_iou {} is outside [0, 1]",
                self.dedupe_iou
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("no detections left after confidence filtering and deduplication")]
    Empty,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    UnmatchedBondEndpoint,
    OrphanAtom,
    DuplicateBond,
    CrossingCandidate,
    UnparsedText,
    DegreeMismatch,
    ValenceOverflow,
    /// Wedge direction taken from box geometry alone.
    StereoGuess,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::UnmatchedBondEndpoint => "unmatched_bond_endpoint",
            DiagnosticKind::OrphanAtom => "orphan_atom",
            DiagnosticKind::DuplicateBond => "duplicate_bond",
            DiagnosticKind::CrossingCandidate => "crossing_candidate",
            DiagnosticKind::UnparsedText => "unparsed_text",
            DiagnosticKind::DegreeMismatch => "degree_mismatch",
            DiagnosticKind::ValenceOverflow => "valence_overflow",
            DiagnosticKind::StereoGuess => "stereo_guess",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub detail: String,
    /// Input detection indices involved.
    pub detections: Vec<usize>,
    /// Image region to look at.
    pub geometry: Option<BBox>,
}

/// Where a graph element came from: a detection index, plus the fragment
/// atom or bond index for elements created by super-group expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub detection: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragment: Option<usize>,
}

impl Source {
    fn direct(detection: usize) -> Self {
        Source {
            detection,
            fragment: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub atoms: Vec<Source>,
    pub bonds: Vec<Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizedMolecule {
    pub graph: MolGraph,
    pub provenance: Provenance,
    pub diagnostics: Vec<Diagnostic>,
    pub construction_time_ms: f64,
}

impl RecognizedMolecule {
    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }

    pub fn count(&self, kind: DiagnosticKind) -> usize {
        self.diagnostics.iter().filter(|d| d.kind == kind).count()
    }

    /// A copy with the timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self {
            construction_time_ms: 0.0,
            ..self.clone()
        }
    }
}

fn box_distance(p: Point, b: &BBox) -> f64 {
    let dx = (b.x0 - p.x).max(0.0).max(p.x - b.x1);
    let dy = (b.y0 - p.y).max(0.0).max(p.y - b.y1);
    dx.hypot(dy)
}

/// Regions a bond may end in: the whole box for atom symbols, the anchor
/// character cell for text. H-first labels ("HO", "H2N") anchor on the
/// last cell, atom labels and table keys on the first; other text keeps both.
fn anchor_regions(d: &Detection, table: &FragmentTable) -> [BBox; 2] {
    let b = &d.bbox;
    // one glyph is roughly three quarters as wide as the box is tall
    let side = (0.75 * b.height()).min(b.width());
    if d.class != DetectionClass::Text || b.width() <= side * 1.25 {
        return [*b, *b];
    }
    let first = BBox::new(b.x0, b.y0, b.x0 + side, b.y1);
    let last = BBox::new(b.x1 - side, b.y0, b.x1, b.y1);
    let text = d.text.as_deref().unwrap_or("").trim();
    let mut chars = text.chars();
    let h_first = chars.next() == Some('H') && chars.next().is_some_and(|c| !c.is_lowercase());
    if h_first {
        return [last, last];
    }
    // aliases may be mirrored spellings, so only canonical keys anchor first
    let leading = table.get(text).is_some_and(|e| e.key == text)
        || matches!(
            parse_label(text, table),
            TextInterpretation::AtomLabel { .. }
        );
    if leading {
        [first, first]
    } else {
        [first, last]
    }
}

/// For stripped endpoints: the node pair whose anchor segment best explains
/// the box. The cost is the distance from the segment midpoint to the box
/// center plus a penalty when the box is too small to hold the segment or
/// much wider than a drawn bond would make it. Pairs costing more than
/// `max_cost` are rejected.
fn best_pair(
    bond: &BBox,
    nodes: &[Node],
    radius: f64,
    scale: f64,
) -> Option<(usize, usize, [Point; 2])> {
    let c = bond.center();
    let (w, h) = (bond.width(), bond.height());
    let near: Vec<(usize, Vec<Point>)> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (i, distinct_centers(&n.anchors)))
        .filter(|(_, pts)| pts.iter().any(|&p| box_distance(p, bond) <= radius))
        .collect();
    let slack = 0.1 * scale;
    let excess = 0.5 * scale;
    let max_cost = 0.35 * scale;
    let mut best: Option<(f64, usize, usize, [Point; 2])> = None;
    for (x, (i, pi)) in near.iter().enumerate() {
        for (j, pj) in &near[x + 1..] {
            for &a in pi {
                for &b in pj {
                    let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
                    let (ex, ey) = (w - (a.x - b.x).abs(), h - (a.y - b.y).abs());
                    let size = |e: f64| 2.0 * (-e - slack).max(0.0) + 0.5 * (e - excess).max(0.0);
                    let cost = c.dist(mid) + size(ex) + size(ey);
                    if cost <= max_cost && best.as_ref().is_none_or(|bb| cost < bb.0 - 1e-9) {
                        best = Some((cost, *i, *j, [a, b]));
                    }
                }
            }
        }
    }
    best.map(|(_, i, j, e)| (i, j, e))
}

fn distinct_centers(r: &[BBox; 2]) -> Vec<Point> {
    if r[0] == r[1] {
        vec![r[0].center()]
    } else {
        vec![r[0].center(), r[1].center()]
    }
}

fn region_distance(p: Point, r: &[BBox; 2]) -> f64 {
    box_distance(p, &r[0]).min(box_distance(p, &r[1]))
}

fn candidates(b: &BBox) -> [[Point; 2]; 4] {
    let c = b.center();
    [
        [Point::new(b.x0, b.y0), Point::new(b.x1, b.y1)],
        [Point::new(b.x0, b.y1), Point::new(b.x1, b.y0)],
        [Point::new(b.x0, c.y), Point::new(b.x1, c.y)],
        [Point::new(c.x, b.y0), Point::new(c.x, b.y1)],
    ]
}

/// Smallest d(p, n_i) + d(q, n_j) over distinct nodes i != j.
fn pair_score(p: Point, q: Point, nodes: &[[BBox; 2]]) -> f64 {
    let nearest2 = |x: Point| {
        let mut best = [(f64::INFINITY, usize::MAX); 2];
        for (i, n) in nodes.iter().enumerate() {
            let d = region_distance(x, n);
            if d < best[0].0 {
                best[1] = best[0];
                best[0] = (d, i);
            } else if d < best[1].0 {
                best[1] = (d, i);
            }
        }
        best
    };
    let (a, b) = (nearest2(p), nearest2(q));
    if a[0].1 != b[0].1 {
        a[0].0 + b[0].0
    } else {
        (a[0].0 + b[1].0).min(a[1].0 + b[0].0)
    }
}

fn estimate_against(bond: &Detection, nodes: &[[BBox; 2]]) -> [Point; 2] {
    if let Some(e) = bond.endpoints {
        return e;
    }
    let cands = candidates(&bond.bbox);
    if nodes.len() < 2 {
        return cands[0];
    }
    let mut best = (f64::INFINITY, 0);
    for (k, [p, q]) in cands.iter().enumerate() {
        let s = pair_score(*p, *q, nodes);
        // strict comparison keeps the earliest candidate on ties
        if s < best.0 - 1e-9 {
            best = (s, k);
        }
    }
    cands[best.1]
}

/// The two ends of a bond: the detection's own endpoints when present,
/// otherwise the best of the box diagonals and the horizontal and vertical
/// midlines, scored by the summed distance to distinct nearest centers.
pub fn estimate_bond_endpoints(bond: &Detection, atom_centers: &[Point]) -> [Point; 2] {
    let nodes: Vec<[BBox; 2]> = atom_centers
        .iter()
        .map(|&c| {
            let b = BBox::around(c, 0.0, 0.0);
            [b, b]
        })
        .collect();
    estimate_against(bond, &nodes)
}

struct Node {
    det: usize,
    bbox: BBox,
    anchors: [BBox; 2],
}

impl Node {
    fn center(&self) -> Point {
        self.bbox.center()
    }
}

/// Nearest node by anchor-region distance (center distance, then index,
/// on ties) and that distance.
fn nearest_node(p: Point, nodes: &[Node]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, n) in nodes.iter().enumerate() {
        let d = region_distance(p, &n.anchors);
        let c = p.dist(n.center());
        if best.is_none_or(|(_, bd, bc)| d < bd - 1e-9 || ((d - bd).abs() <= 1e-9 && c < bc - 1e-9))
        {
            best = Some((i, d, c));
        }
    }
    best.map(|(i, d, _)| (i, d))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

struct Edge {
    det: usize,
    u: usize,
    v: usize,
    kind: BondKind,
    ends: [Point; 2],
    confidence: f64,
    estimated: bool,
}

fn region(points: &[Point]) -> BBox {
    let x0 = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let y0 = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let x1 = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let y1 = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    BBox::new(x0, y0, x1, y1)
}

/// Builds a molecule from detections. Errors only when nothing survives
/// filtering; everything else is a diagnostic.
pub fn build_graph(
    set: &DetectionSet,
    cfg: &ConstructConfig,
) -> Result<RecognizedMolecule, ConstructError> {
    let start = Instant::now();
    cfg.validate()?;
    let ds = &set.detections;
    let confident: Vec<usize> = (0..ds.len())
        .filter(|&i| ds[i].confidence >= cfg.min_confidence && ds[i].bbox.is_valid())
        .collect();
    let kept = dedupe_indices(ds, &confident, cfg.dedupe_iou);
    if kept.is_empty() {
        return Err(ConstructError::Empty);
    }
    let mut diags = Vec::new();

    let nodes: Vec<Node> = kept
        .iter()
        .filter(|&&i| ds[i].class.is_atom())
        .map(|&i| Node {
            det: i,
            bbox: ds[i].bbox,
            anchors: anchor_regions(&ds[i], &cfg.fragment_table),
        })
        .collect();
    let bond_dets: Vec<usize> = kept
        .iter()
        .copied()
        .filter(|&i| ds[i].class.is_bond())
        .collect();
    let node_regions: Vec<[BBox; 2]> = nodes.iter().map(|n| n.anchors).collect();
    let scale = median(bond_dets.iter().map(|&i| ds[i].bbox.diagonal()).collect())
        .or_else(|| median(nodes.iter().map(|n| n.bbox.diagonal()).collect()))
        .unwrap_or(1.0);
    let radius = cfg.endpoint_match_radius_factor * scale;

    // bonds: endpoints snapped to nodes
    let mut edges: Vec<Edge> = Vec::new();
    for &bi in &bond_dets {
        let d = &ds[bi];
        // stripped endpoints: fit a node pair to the box first, then fall back to corners
        let paired = if d.endpoints.is_none() {
            best_pair(&d.bbox, &nodes, radius, scale)
        } else {
            None
        };
        let (ends, mut hit) = match paired {
            Some((i, j, e)) => (e, [Some(i), Some(j)]),
            None => (estimate_against(d, &node_regions), [None, None]),
        };
        for (k, e) in ends.iter().enumerate() {
            if paired.is_some() {
                break;
            }
            match nearest_node(*e, &nodes) {
                Some((n, dist)) if dist <= radius => hit[k] = Some(n),
                miss => {
                    let detail = match miss {
                        Some((n, dist)) => format!(
                            "bond end {k} has no atom within {radius:.1}px; nearest is detection {} at {dist:.1}px",
                            nodes[n].det
                        ),
                        None => format!("bond end {k} has no atom to attach to"),
                    };
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::UnmatchedBondEndpoint,
                        detail,
                        detections: vec![bi],
                        geometry: Some(d.bbox),
                    });
                }
            }
        }
        let (Some(u), Some(v)) = (hit[0], hit[1]) else {
            continue;
        };
        if u == v {
            diags.push(Diagnostic {
                kind: DiagnosticKind::UnmatchedBondEndpoint,
                detail: format!("both ends of the bond snap to detection {}", nodes[u].det),
                detections: vec![bi, nodes[u].det],
                geometry: Some(d.bbox),
            });
            continue;
        }
        edges.push(Edge {
            det: bi,
            u,
            v,
            kind: d.class.bond_kind().expect("bond class"),
            ends,
            confidence: d.confidence,
            estimated: d.endpoints.is_none(),
        });
    }

    // duplicates: keep the most confident bond per node pair (first on ties)
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut alive = vec![true; edges.len()];
    for (k, e) in edges.iter().enumerate() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        match by_pair.get(&key).copied() {
            None => {
                by_pair.insert(key, k);
            }
            Some(prev) => {
                let (win, lose) = if e.confidence > edges[prev].confidence {
                    (k, prev)
                } else {
                    (prev, k)
                };
                alive[lose] = false;
                by_pair.insert(key, win);
                diags.push(Diagnostic {
                    kind: DiagnosticKind::DuplicateBond,
                    detail: format!(
                        "detections {} and {} both join detections {} and {}; kept {}",
                        edges[prev].det, e.det, nodes[key.0].det, nodes[key.1].det, edges[win].det
                    ),
                    detections: vec![edges[prev].det, e.det],
                    geometry: Some(ds[edges[lose].det].bbox),
                });
            }
        }
    }
    let edges: Vec<Edge> = edges
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(e, _)| e)
        .collect();

    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = (&edges[i], &edges[j]);
            if a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v {
                continue;
            }
            if segments_cross(a.ends[0], a.ends[1], b.ends[0], b.ends[1]) {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::CrossingCandidate,
                    detail: format!("bond detections {} and {} cross", a.det, b.det),
                    detections: vec![a.det, b.det],
                    geometry: Some(region(&[a.ends[0], a.ends[1], b.ends[0], b.ends[1]])),
                });
            }
        }
    }

    let mut graph = MolGraph::new();
    let mut prov = Provenance::default();
    for n in &nodes {
        let d = &ds[n.det];
        let element = d.class.element().unwrap_or(Element::C);
        graph.add_atom(Atom::new(element).at(n.center()));
        prov.atoms.push(Source::direct(n.det));
    }
    for e in &edges {
        graph
            .add_bond(e.u, e.v, e.kind)
            .expect("pairs are distinct and unique");
        prov.bonds.push(Source::direct(e.det));
        if e.kind.is_directional() && e.estimated {
            diags.push(Diagnostic {
                kind: DiagnosticKind::StereoGuess,
                detail: format!(
                    "direction of {} bond {} guessed from its box",
                    ds[e.det].class, e.det
                ),
                detections: vec![e.det],
                geometry: Some(ds[e.det].bbox),
            });
        }
    }

    // text labels
    let mut groups: Vec<(usize, TextInterpretation)> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        let d = &ds[n.det];
        if d.class != DetectionClass::Text {
            continue;
        }
        let text = d.text.clone().unwrap_or_default();
        match parse_label(&text, &cfg.fragment_table) {
            TextInterpretation::AtomLabel {
                element,
                formal_charge,
                explicit_h,
            } => {
                let a = graph.atom_mut(i);
                a.element = element;
                a.formal_charge = formal_charge;
                a.explicit_h = explicit_h;
            }
            interp @ TextInterpretation::SuperGroup { .. } => {
                if let TextInterpretation::SuperGroup { key, .. } = &interp {
                    graph.atom_mut(i).element = Element::Other(key.clone());
                }
                if cfg.expand_supergroups {
                    groups.push((i, interp));
                }
            }
            TextInterpretation::Unparsed { raw } => diags.push(Diagnostic {
                kind: DiagnosticKind::UnparsedText,
                detail: format!(
                    "label {raw:?} is neither an atom nor a known group; left as carbon"
                ),
                detections: vec![n.det],
                geometry: Some(d.bbox),
            }),
        }
    }

    // expand groups, highest node first so pending indices stay valid
    groups.sort_by(|a, b| b.0.cmp(&a.0));
    for (node, interp) in groups {
        let det = prov.atoms[node].detection;
        match expand_superatom_mapped(&graph, node, &interp) {
            Ok((next, exp)) => {
                let mut atoms = vec![Source::direct(0); next.atom_count()];
                for (old, new) in exp.atom_map.iter().enumerate() {
                    if let Some(new) = new {
                        atoms[*new] = prov.atoms[old];
                    }
                }
                for (k, &a) in exp.fragment_atoms.iter().enumerate() {
                    atoms[a] = Source {
                        detection: det,
                        fragment: Some(k),
                    };
                }
                let TextInterpretation::SuperGroup { fragment, .. } = &interp else { unreachable!() };
                let mut inverse = vec![None; next.atom_count()];
                for (old, new) in exp.atom_map.iter().enumerate() {
                    if let Some(new) = new {
                        inverse[*new] = Some(old);
                    }
                }
                let mut frag_of = vec![None; next.atom_count()];
                for (k, &a) in exp.fragment_atoms.iter().enumerate() {
                    frag_of[a] = Some(k);
                }
                let bonds = next
                    .bonds()
                    .iter()
                    .map(|b| match (inverse[b.begin], inverse[b.end], frag_of[b.begin], frag_of[b.end]) {
                        (Some(x), Some(y), _, _) => prov.bonds[graph.bond_between(x, y).expect("surviving bond")],
                        (Some(x), None, _, _) | (None, Some(x), _, _) => {
                            prov.bonds[graph.bond_between(x, node).expect("bond to the group")]
                        }
                        (None, None, Some(p), Some(q)) => Source {
                            detection: det,
                            fragment: fragment.bond_between(p, q),
                        },
                        _ => unreachable!("every atom is old or from the fragment"),
                    })
                    .collect();
                graph = next;
                prov = Provenance { atoms, bonds };
            }
            Err(ExpandError::DegreeMismatch {
                key, expected, actual, ..
            }) => diags.push(Diagnostic {
                kind: DiagnosticKind::DegreeMismatch,
                detail: format!("group {key:?} takes {expected} bond(s) but {actual} are drawn; left unexpanded"),
                detections: vec![det],
                geometry: Some(ds[det].bbox),
            }),
            Err(e) => diags.push(Diagnostic {
                kind: DiagnosticKind::DegreeMismatch,
                detail: format!("group expansion failed: {e}"),
                detections: vec![det],
                geometry: Some(ds[det].bbox),
            }),
        }
    }

    for a in 0..graph.atom_count() {
        let atom = graph.atom(a);
        if matches!(atom.element, Element::Other(_)) {
            continue;
        }
        let q = atom.formal_charge;
        let limit = default_valence(&atom.element, q).max(atom.element.max_valence())
            + q.unsigned_abs() as u32;
        let used = graph.bond_order_sum(a) + atom.explicit_h.unwrap_or(0) as u32;
        if used > limit {
            diags.push(Diagnostic {
                kind: DiagnosticKind::ValenceOverflow,
                detail: format!(
                    "{} atom {a} carries valence {used}, more than {limit}",
                    atom.element
                ),
                detections: vec![prov.atoms[a].detection],
                geometry: Some(ds[prov.atoms[a].detection].bbox),
            });
        }
    }
    if graph.atom_count() > 1 {
        for a in 0..graph.atom_count() {
            if graph.degree(a) == 0 {
                let det = prov.atoms[a].detection;
                diags.push(Diagnostic {
                    kind: DiagnosticKind::OrphanAtom,
                    detail: format!("{} atom {a} has no bonds", graph.atom(a).element),
                    detections: vec![det],
                    geometry: Some(ds[det].bbox),
                });
            }
        }
    }

    Ok(RecognizedMolecule {
        graph,
        provenance: prov,
        diagnostics: diags,
        construction_time_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// What to recognize: a rendered depiction (through its oracle
/// detections) or a detection set.
#[derive(Debug, Clone, Copy)]
pub enum RecognizeInput<'a> {
    Depiction(&'a Depiction),
    Detections(&'a DetectionSet),
}

pub fn recognize(
    input: RecognizeInput<'_>,
    cfg: &ConstructConfig,
) -> Result<RecognizedMolecule, ConstructError> {
    match input {
        RecognizeInput::Depiction(d) => build_graph(&oracle_detect(d), cfg),
        RecognizeInput::Detections(s) => build_graph(s, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{is_isomorphic, parse_smiles, Strictness};
    use crate::depictgen::{depict, StyleParams};

    fn atom(class: DetectionClass, x: f64, y: f64) -> Detection {
        Detection::new(class, BBox::around(Point::new(x, y), 3.0, 3.0))
    }

    fn bond(class: DetectionClass, a: Point, b: Point) -> Detection {
        Detection::new(
            class,
            BBox::new(
                a.x.min(b.x) - 2.0,
                a.y.min(b.y) - 2.0,
                a.x.max(b.x) + 2.0,
                a.y.max(b.y) + 2.0,
            ),
        )
        .with_endpoints(a, b)
    }

    #[test]
    fn endpoint_candidates() {
        let d = Detection::new(DetectionClass::Single, BBox::new(0.0, 0.0, 10.0, 10.0));
        let e = estimate_bond_endpoints(&d, &[Point::new(0.0, 10.0), Point::new(10.0, 0.0)]);
        assert_eq!(e, [Point::new(0.0, 10.0), Point::new(10.0, 0.0)]);
        let d = Detection::new(DetectionClass::Single, BBox::new(0.0, 4.0, 20.0, 6.0));
        let e = estimate_bond_endpoints(&d, &[Point::new(0.0, 5.0), Point::new(20.0, 5.0)]);
        assert_eq!(e, [Point::new(0.0, 5.0), Point::new(20.0, 5.0)]);
    }

    #[test]
    fn ethane_from_three_boxes() {
        let mut s = DetectionSet::new(100, 100);
        s.detections.push(atom(DetectionClass::C, 20.0, 50.0));
        s.detections.push(atom(DetectionClass::C, 60.0, 50.0));
        s.detections.push(bond(
            DetectionClass::Single,
            Point::new(20.0, 50.0),
            Point::new(60.0, 50.0),
        ));
        let r = build_graph(&s, &ConstructConfig::default()).unwrap();
        assert!(is_isomorphic(
            &r.graph,
            &parse_smiles("CC").unwrap(),
            Strictness::OrderOnly
        ));
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        assert_eq!(r.provenance.bonds, vec![Source::direct(2)]);
    }

    #[test]
    fn empty_input_is_an_error() {
        let s = DetectionSet::new(10, 10);
        assert_eq!(
            build_graph(&s, &ConstructConfig::default()),
            Err(ConstructError::Empty)
        );
        let mut s = DetectionSet::new(10, 10);
        s.detections
            .push(atom(DetectionClass::C, 5.0, 5.0).with_confidence(0.1));
        assert_eq!(
            build_graph(&s, &ConstructConfig::default()),
            Err(ConstructError::Empty)
        );
    }

    #[test]
    fn duplicate_and_self_bonds_are_diagnosed() {
        let mut s = DetectionSet::new(200, 100);
        s.detections.push(atom(DetectionClass::C, 20.0, 50.0));
        s.detections.push(atom(DetectionClass::O, 60.0, 50.0));
        s.detections.push(
            bond(
                DetectionClass::Single,
                Point::new(20.0, 50.0),
                Point::new(60.0, 50.0),
            )
            .with_confidence(0.6),
        );
        s.detections.push(
            bond(
                DetectionClass::Double,
                Point::new(21.0, 50.0),
                Point::new(59.0, 50.0),
            )
            .with_confidence(0.9),
        );
        s.detections.push(bond(
            DetectionClass::Single,
            Point::new(58.0, 49.0),
            Point::new(62.0, 51.0),
        ));
        let r = build_graph(&s, &ConstructConfig::default()).unwrap();
        assert_eq!(r.graph.bond_count(), 1);
        assert_eq!(r.graph.bonds()[0].kind, BondKind::Double);
        assert_eq!(r.count(DiagnosticKind::DuplicateBond), 1);
        assert_eq!(r.count(DiagnosticKind::UnmatchedBondEndpoint), 1);
    }

    #[test]
    fn text_labels_resolve() {
        let table = FragmentTable::builtin();
        let g = parse_smiles("COC(=O)c1ccccc1").unwrap();
        let style = StyleParams {
            superatom_collapse_prob: 1.0,
            ..Default::default()
        };
        let d = depict(&g, &style, &table).unwrap();
        assert!(d.groups >= 1);
        let r = recognize(RecognizeInput::Depiction(&d), &ConstructConfig::default()).unwrap();
        assert!(is_isomorphic(&r.graph, &g, Strictness::OrderOnly));
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        assert_eq!(r.provenance.atoms.len(), r.graph.atom_count());
        assert_eq!(r.provenance.bonds.len(), r.graph.bond_count());

        let cfg = ConstructConfig {
            expand_supergroups: false,
            ..Default::default()
        };
        let r = recognize(RecognizeInput::Depiction(&d), &cfg).unwrap();
        assert!(r
            .graph
            .atoms()
            .iter()
            .any(|a| matches!(a.element, Element::Other(_))));
    }

    #[test]
    fn unparsed_text_and_orphans() {
        let mut s = DetectionSet::new(200, 100);
        s.detections.push(atom(DetectionClass::C, 20.0, 50.0));
        s.detections.push(
            Detection::new(DetectionClass::Text, BBox::new(50.0, 40.0, 80.0, 60.0))
                .with_text("Qx7"),
        );
        s.detections.push(atom(DetectionClass::N, 150.0, 50.0));
        s.detections.push(bond(
            DetectionClass::Single,
            Point::new(20.0, 50.0),
            Point::new(55.0, 50.0),
        ));
        let r = build_graph(&s, &ConstructConfig::default()).unwrap();
        assert_eq!(r.count(DiagnosticKind::UnparsedText), 1);
        assert_eq!(r.count(DiagnosticKind::OrphanAtom), 1);
        assert_eq!(r.graph.atom(1).element, Element::C);
    }

    #[test]
    fn valence_overflow_and_stereo_guess() {
        let mut s = DetectionSet::new(300, 300);
        s.detections.push(atom(DetectionClass::O, 150.0, 150.0));
        for (k, (x, y)) in [(110.0, 150.0), (190.0, 150.0), (150.0, 110.0)]
            .into_iter()
            .enumerate()
        {
            s.detections.push(atom(DetectionClass::C, x, y));
            let mut b = bond(
                if k == 0 {
                    DetectionClass::Wedge
                } else {
                    DetectionClass::Single
                },
                Point::new(150.0, 150.0),
                Point::new(x, y),
            );
            b.endpoints = None;
            s.detections.push(b);
        }
        let r = build_graph(&s, &ConstructConfig::default()).unwrap();
        assert_eq!(r.graph.bond_count(), 3);
        assert_eq!(r.count(DiagnosticKind::ValenceOverflow), 1);
        assert_eq!(r.count(DiagnosticKind::StereoGuess), 1);
    }

    #[test]
    fn crossing_bonds_are_flagged() {
        let mut s = DetectionSet::new(100, 100);
        for (x, y) in [(10.0, 10.0), (50.0, 50.0), (50.0, 10.0), (10.0, 50.0)] {
            s.detections.push(atom(DetectionClass::C, x, y));
        }
        s.detections.push(bond(
            DetectionClass::Single,
            Point::new(10.0, 10.0),
            Point::new(50.0, 50.0),
        ));
        // a different class, or box suppression would merge the two
        s.detections.push(bond(
            DetectionClass::Double,
            Point::new(50.0, 10.0),
            Point::new(10.0, 50.0),
        ));
        let r = build_graph(&s, &ConstructConfig::default()).unwrap();
        assert_eq!(r.count(DiagnosticKind::CrossingCandidate), 1);
        assert_eq!(r.graph.bond_count(), 2);
    }

    #[test]
    fn kind_names_match_serde() {
        for k in [
            DiagnosticKind::UnmatchedBondEndpoint,
            DiagnosticKind::OrphanAtom,
            DiagnosticKind::DuplicateBond,
            DiagnosticKind::CrossingCandidate,
            DiagnosticKind::UnparsedText,
            DiagnosticKind::DegreeMismatch,
            DiagnosticKind::ValenceOverflow,
            DiagnosticKind::StereoGuess,
        ] {
            assert_eq!(serde_json::to_value(k).unwrap(), k.as_str());
        }
    }

    #[test]
    fn invalid_radius_is_rejected() {
        let cfg = ConstructConfig {
            endpoint_match_radius_factor: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConstructError::InvalidConfig(_))
        ));
    }
}
