//! Text label interpretation: atom labels such as `NH2` or `O-`, and
//! super-group abbreviations such as `OMe` or `CO2Et`, plus their expansion
//! into full fragments.
//!
//! Resolution order for a label:
//!
//! 1. an exact fragment-table key or alias;
//! 2. the atom grammar `ELEMENT ('H' COUNT?)? CHARGE?`;
//! 3. both of the above on the mirrored token sequence (`H2N` reads as
//!    `NH2`, `EtO2C` as `CO2Et`);
//! 4. a linear formula such as `CH2CH2OH` or `CH(CH3)2`;
//! 5. otherwise [`TextInterpretation::Unparsed`].

pub(crate) mod grammar;
mod table;

use serde::Serialize;
use thiserror::Error;

use crate::chemgraph::{Element, GraphError, MolGraph, Point};

pub use table::{fragment_round_trip, FragmentEntry, FragmentTable, FragmentTableError};

/// Labels longer than this are not interpreted.
pub const MAX_LABEL_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextInterpretation {
    AtomLabel {
        element: Element,
        formal_charge: i8,
        explicit_h: Option<u8>,
    },
    SuperGroup {
        key: String,
        fragment: MolGraph,
        attachments: Vec<usize>,
    },
    Unparsed {
        raw: String,
    },
}

impl TextInterpretation {
    pub fn is_unparsed(&self) -> bool {
        matches!(self, TextInterpretation::Unparsed { .. })
    }

    pub fn is_super_group(&self) -> bool {
        matches!(self, TextInterpretation::SuperGroup { .. })
    }
}

fn supergroup(e: &FragmentEntry) -> TextInterpretation {
    TextInterpretation::SuperGroup {
        key: e.key.clone(),
        fragment: e.fragment.clone(),
        attachments: e.attachments.clone(),
    }
}

fn atom(s: &str) -> Option<TextInterpretation> {
    grammar::atom_label(s).map(|(element, formal_charge, explicit_h)| {
        TextInterpretation::AtomLabel {
            element,
            formal_charge,
            explicit_h,
        }
    })
}

/// Interprets a text label. Total and deterministic; failure is the
/// `Unparsed` variant.
pub fn parse_label(text: &str, table: &FragmentTable) -> TextInterpretation {
    let unparsed = || TextInterpretation::Unparsed {
        raw: text.to_string(),
    };
    let s = grammar::normalize(text);
    if s.is_empty() || s.chars().count() > MAX_LABEL_LEN {
        return unparsed();
    }
    if let Some(e) = table.get(&s) {
        return supergroup(e);
    }
    if let Some(a) = atom(&s) {
        return a;
    }
    let Some(tokens) = grammar::tokenize(&s, table) else {
        return unparsed();
    };
    let mirrored = tokens.mirrored();
    if mirrored != s {
        if let Some(e) = table.get(&mirrored) {
            return supergroup(e);
        }
        if let Some(a) = atom(&mirrored) {
            return a;
        }
    }
    if let Some((mut fragment, att)) = grammar::build_linear(&tokens.units, table, true) {
        if tokens.charge != 0 {
            let last = fragment.atom_count() - 1;
            let target = (0..fragment.atom_count())
                .rev()
                .find(|&a| fragment.atom(a).element != Element::H)
                .unwrap_or(last);
            fragment.atom_mut(target).formal_charge = tokens.charge;
        }
        if fragment.atom_count() >= 2 && grammar::valence_ok(&fragment, att) {
            return TextInterpretation::SuperGroup {
                key: s,
                fragment,
                attachments: vec![att],
            };
        }
    }
    unparsed()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("node {node} has degree {actual} but the group {key:?} has {expected} attachment(s)")]
    DegreeMismatch {
        node: usize,
        key: String,
        expected: usize,
        actual: usize,
    },
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("interpretation is not a super group")]
    NotSuperGroup,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Index bookkeeping for one expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Old atom index to new index; the expanded node maps to `None`.
    pub atom_map: Vec<Option<usize>>,
    /// New indices of the fragment atoms, in fragment order.
    pub fragment_atoms: Vec<usize>,
}

/// Golden-angle spiral offset for the k-th fragment atom.
fn spiral(k: usize, step: f64) -> Point {
    if k == 0 {
        return Point::new(0.0, 0.0);
    }
    let theta = k as f64 * 2.399_963_229_728_653;
    let r = step * (k as f64).sqrt();
    Point::new(r * theta.cos(), r * theta.sin())
}

fn median_bond_length(g: &MolGraph) -> Option<f64> {
    let mut d: Vec<f64> = g
        .bonds()
        .iter()
        .filter_map(|b| Some(g.atom(b.begin).position?.dist(g.atom(b.end).position?)))
        .filter(|d| *d > 0.0)
        .collect();
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    Some(d[d.len() / 2])
}

/// Replaces `node` by the group's fragment. Incident bonds, sorted by the
/// angle of the bond around the node (bond order when positions are
/// missing), attach to the fragment's attachment atoms in order.
pub fn expand_superatom(
    graph: &MolGraph,
    node: usize,
    interp: &TextInterpretation,
) -> Result<MolGraph, ExpandError> {
    expand_superatom_mapped(graph, node, interp).map(|(g, _)| g)
}

pub fn expand_superatom_mapped(
    graph: &MolGraph,
    node: usize,
    interp: &TextInterpretation,
) -> Result<(MolGraph, Expansion), ExpandError> {
    let TextInterpretation::SuperGroup {
        key,
        fragment,
        attachments,
    } = interp
    else {
        return Err(ExpandError::NotSuperGroup);
    };
    if node >= graph.atom_count() {
        return Err(ExpandError::NodeOutOfRange(node));
    }
    let degree = graph.degree(node);
    if degree != attachments.len() {
        return Err(ExpandError::DegreeMismatch {
            node,
            key: key.clone(),
            expected: attachments.len(),
            actual: degree,
        });
    }

    let center = graph.atom(node).position;
    let mut incident: Vec<(usize, f64)> = graph
        .bonds()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.touches(node))
        .map(|(i, b)| {
            let other = b.other(node);
            let angle = match (center, graph.atom(other).position) {
                (Some(c), Some(p)) => (p.y - c.y).atan2(p.x - c.x),
                _ => 0.0,
            };
            (i, angle)
        })
        .collect();
    incident.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let (mut out, atom_map) = graph.without_atoms(&[node]);
    let step = 0.2 * median_bond_length(graph).unwrap_or(1.0);
    let base = out.atom_count();
    let mut fragment_atoms = Vec::with_capacity(fragment.atom_count());
    for (k, a) in fragment.atoms().iter().enumerate() {
        let mut a = a.clone();
        a.position = center.map(|c| c.add(spiral(k, step)));
        fragment_atoms.push(out.add_atom(a));
    }
    for b in fragment.bonds() {
        out.add_bond(base + b.begin, base + b.end, b.kind)?;
    }
    for (&(bi, _), &att) in incident.iter().zip(attachments) {
        let b = graph.bonds()[bi];
        let other = atom_map[b.other(node)].expect("neighbour survives");
        let att = base + att;
        if b.begin == node {
            out.add_bond(att, other, b.kind)?;
        } else {
            out.add_bond(other, att, b.kind)?;
        }
    }
    Ok((
        out,
        Expansion {
            atom_map,
            fragment_atoms,
        },
    ))
}
