//! Seeded generator of drug-like test molecules.
//!
//! Molecules are grown from ring and chain templates with valence
//! bookkeeping, laid out, and kept only if the layout has no crossing
//! bonds (unless crossings are allowed).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chemgraph::rings::ring_bond_mask;
use crate::chemgraph::{default_valence, parse_smiles, write_smiles, BondKind, Element, MolGraph};
use crate::depictgen::{crossing_bonds, layout_2d};
use crate::labelparse::FragmentTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub count: usize,
    pub seed: u64,
    pub min_atoms: usize,
    pub max_atoms: usize,
    pub allow_crossings: bool,
    /// Attach at least one single-attachment table fragment per molecule.
    pub with_fragments: bool,
    /// Chance that an eligible sp3 carbon gets a wedge or hash bond.
    pub stereo_prob: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 1,
            min_atoms: 5,
            max_atoms: 40,
            allow_crossings: false,
            with_fragments: false,
            stereo_prob: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub smiles: String,
    /// Carries 2D positions from the layout.
    pub graph: MolGraph,
}

const RINGS: &[&str] = &[
    "C1=CC=CC=C1",
    "C1=CC=CC=C1",
    "C1=CC=NC=C1",
    "C1=CN=CN=C1",
    "C1CCCCC1",
    "C1CCNCC1",
    "C1COCCN1",
    "C1CCOC1",
    "C1CCCC1",
    "C1CC1",
    "C1=CSC=C1",
    "C1=COC=C1",
    "C1=CNC=C1",
    "C1CCNC1",
    "C1=CC=C2C=CC=CC2=C1",
    "C1=CC=C2C(=C1)C=CN2",
    "C1CCN(CC1)",
];

const LINKERS: &[&str] = &[
    "C", "C", "C", "C", "N", "O", "C(=O)", "C(=O)N", "S", "C=C", "CC",
];

const TERMINALS: &[&str] = &[
    "C",
    "C",
    "O",
    "N",
    "F",
    "Cl",
    "Br",
    "I",
    "C#N",
    "C(F)(F)F",
    "C(=O)O",
    "OC",
    "[N+](=O)[O-]",
    "S(=O)(=O)C",
    "C(=O)C",
    "C(C)C",
    "C(C)(C)C",
    "OCC",
    "C[Si](C)(C)C",
    "P(=O)(O)O",
    "B(O)O",
];

fn free_valence(g: &MolGraph, a: usize) -> u32 {
    let atom = g.atom(a);
    let cap = match atom.element {
        // sulfonyl and phosphonate templates already use the high valence
        Element::S | Element::P if g.bond_order_sum(a) > atom.element.base_valence() => 0,
        _ => default_valence(&atom.element, atom.formal_charge),
    };
    cap.saturating_sub(g.bond_order_sum(a))
}

/// Appends `t` and bonds a random template atom with free valence to `anchor`.
fn attach(g: &mut MolGraph, t: &MolGraph, anchor: usize, rng: &mut ChaCha8Rng) {
    let open: Vec<usize> = (0..t.atom_count())
        .filter(|&a| free_valence(t, a) >= 1)
        .collect();
    let Some(&at) = open.choose(rng) else { return };
    let base = g.atom_count();
    for a in t.atoms() {
        g.add_atom(a.clone());
    }
    for b in t.bonds() {
        g.add_bond(base + b.begin, base + b.end, b.kind)
            .expect("template bonds");
    }
    g.add_bond(anchor, base + at, BondKind::Single)
        .expect("fresh atom");
}

struct Templates {
    rings: Vec<MolGraph>,
    linkers: Vec<MolGraph>,
    terminals: Vec<MolGraph>,
    fragments: Vec<MolGraph>,
}

impl Templates {
    fn new(with_fragments: bool) -> Self {
        let parse = |v: &[&str]| {
            v.iter()
                .map(|s| parse_smiles(s).expect("template parses"))
                .collect()
        };
        let fragments = if with_fragments {
            FragmentTable::builtin()
                .entries()
                .iter()
                .filter(|e| e.attachments.len() == 1)
                .map(|e| {
                    // put the attachment atom first so attach() can find it
                    let f = &e.fragment;
                    let att = e.attachments[0];
                    let mut order = vec![att];
                    order.extend((0..f.atom_count()).filter(|&a| a != att));
                    f.permuted(&order)
                })
                .collect()
        } else {
            Vec::new()
        };
        Templates {
            rings: parse(RINGS),
            linkers: parse(LINKERS),
            terminals: parse(TERMINALS),
            fragments,
        }
    }
}

fn attach_fragment(g: &mut MolGraph, f: &MolGraph, anchor: usize) {
    let base = g.atom_count();
    for a in f.atoms() {
        g.add_atom(a.clone());
    }
    for b in f.bonds() {
        g.add_bond(base + b.begin, base + b.end, b.kind)
            .expect("fragment bonds");
    }
    g.add_bond(anchor, base, BondKind::Single)
        .expect("fresh atom");
}

fn grow(rng: &mut ChaCha8Rng, t: &Templates, target: usize, cfg: &CorpusConfig) -> MolGraph {
    let mut g = if rng.gen_bool(0.8) {
        t.rings.choose(rng).expect("rings").clone()
    } else {
        t.linkers[0].clone()
    };
    let mut fragment_added = false;
    // fragment atoms stay as drawn so the group remains pendant
    let mut frozen: Vec<bool> = vec![false; g.atom_count()];
    for _ in 0..200 {
        frozen.resize(g.atom_count(), false);
        let room = target.saturating_sub(g.atom_count());
        if room == 0 && (!cfg.with_fragments || fragment_added) {
            break;
        }
        let open: Vec<usize> = (0..g.atom_count())
            .filter(|&a| !frozen[a] && free_valence(&g, a) >= 1)
            .collect();
        let Some(&anchor) = open.choose(rng) else {
            break;
        };
        if cfg.with_fragments && !fragment_added && (room <= 6 || rng.gen_bool(0.2)) {
            let fits: Vec<&MolGraph> = t
                .fragments
                .iter()
                .filter(|f| f.atom_count() <= room.max(4))
                .collect();
            if let Some(f) = fits.choose(rng) {
                // a carbon anchor keeps the group pendant on an ordinary atom
                if g.atom(anchor).element == Element::C {
                    attach_fragment(&mut g, f, anchor);
                    frozen.resize(g.atom_count(), true);
                    fragment_added = true;
                }
                continue;
            }
        }
        if room == 0 {
            continue;
        }
        let r: f64 = rng.gen();
        let pool = if r < 0.22 && room >= 3 {
            &t.rings
        } else if r < 0.62 || room <= 2 {
            &t.linkers
        } else {
            &t.terminals
        };
        let fits: Vec<&MolGraph> = pool.iter().filter(|m| m.atom_count() <= room).collect();
        if let Some(m) = fits.choose(rng) {
            attach(&mut g, m, anchor, rng);
        }
    }
    add_stereo(&mut g, rng, cfg.stereo_prob);
    g
}

/// Turns one acyclic single bond at some sp3 carbons into a wedge, hash or
/// (rarely) wavy bond starting at that carbon.
fn add_stereo(g: &mut MolGraph, rng: &mut ChaCha8Rng, prob: f64) {
    if prob <= 0.0 {
        return;
    }
    let in_ring = ring_bond_mask(g);
    let adj = g.adjacency();
    let mut used = vec![false; g.atom_count()];
    for a in 0..g.atom_count() {
        let atom = g.atom(a);
        let eligible = atom.element == Element::C
            && adj[a].len() >= 3
            && adj[a]
                .iter()
                .all(|&(_, b)| g.bonds()[b].kind == BondKind::Single);
        if !eligible || used[a] || !rng.gen_bool(prob) {
            continue;
        }
        let choices: Vec<usize> = adj[a]
            .iter()
            .filter(|&&(v, b)| !in_ring[b] && !used[v] && g.bonds()[b].kind == BondKind::Single)
            .map(|&(_, b)| b)
            .collect();
        let Some(&b) = choices.choose(rng) else {
            continue;
        };
        let kind = match rng.gen_range(0..10) {
            0 => BondKind::Wavy,
            1..=5 => BondKind::WedgeUp,
            _ => BondKind::WedgeDown,
        };
        if g.bonds()[b].begin != a {
            g.reverse_bond(b);
        }
        g.set_bond_kind(b, kind);
        used[a] = true;
        used[g.bonds()[b].end] = true;
    }
}

fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One molecule for slot `index`; deterministic in (config, index).
pub fn generate_one(cfg: &CorpusConfig, index: usize) -> CorpusItem {
    let templates = Templates::new(cfg.with_fragments);
    generate_with(cfg, index, &templates)
}

fn generate_with(cfg: &CorpusConfig, index: usize, templates: &Templates) -> CorpusItem {
    let mut rng = item_rng(cfg.seed, index);
    let lo = cfg.min_atoms.max(1);
    let hi = cfg.max_atoms.max(lo);
    for _attempt in 0..200 {
        let target = rng.gen_range(lo..=hi);
        let mut g = grow(&mut rng, templates, target, cfg);
        if g.atom_count() < lo || g.atom_count() > hi + 12 {
            continue;
        }
        let Ok(coords) = layout_2d(&g) else { continue };
        if !cfg.allow_crossings && !crossing_bonds(&g, &coords).is_empty() {
            continue;
        }
        for (a, p) in coords.into_iter().enumerate() {
            g.atom_mut(a).position = Some(p);
        }
        return CorpusItem {
            id: format!("mol{index:05}"),
            smiles: write_smiles(&g),
            graph: g,
        };
    }
    // every attempt crossed: fall back to a small acyclic chain
    let mut g = parse_smiles("CCCCCO").expect("fallback");
    let coords = layout_2d(&g).expect("chain layout");
    for (a, p) in coords.into_iter().enumerate() {
        g.atom_mut(a).position = Some(p);
    }
    CorpusItem {
        id: format!("mol{index:05}"),
        smiles: write_smiles(&g),
        graph: g,
    }
}

/// `cfg.count` molecules, ids `mol00000`, `mol00001`, ...
pub fn generate_corpus(cfg: &CorpusConfig) -> Vec<CorpusItem> {
    use rayon::prelude::*;
    let templates = Templates::new(cfg.with_fragments);
    (0..cfg.count)
        .into_par_iter()
        .map(|i| generate_with(cfg, i, &templates))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn molecules_are_valid_and_deterministic() {
        let cfg = CorpusConfig {
            count: 40,
            seed: 3,
            ..Default::default()
        };
        let a = generate_corpus(&cfg);
        let b = generate_corpus(&cfg);
        assert_eq!(a, b);
        for item in &a {
            let g = &item.graph;
            assert!(g.is_connected(), "{}", item.smiles);
            assert!((5..=52).contains(&g.atom_count()), "{}", item.smiles);
            for x in 0..g.atom_count() {
                let atom = g.atom(x);
                let cap = atom
                    .element
                    .max_valence()
                    .max(default_valence(&atom.element, atom.formal_charge));
                assert!(g.bond_order_sum(x) <= cap, "{} atom {x}", item.smiles);
            }
            let coords: Vec<_> = g.atoms().iter().map(|p| p.position.unwrap()).collect();
            assert!(crossing_bonds(g, &coords).is_empty());
        }
    }

    #[test]
    fn fragment_mode_contains_a_table_group() {
        use crate::depictgen::collapse_superatoms;
        let cfg = CorpusConfig {
            count: 20,
            seed: 5,
            with_fragments: true,
            ..Default::default()
        };
        let table = FragmentTable::builtin();
        for item in generate_corpus(&cfg) {
            let c = collapse_superatoms(&item.graph, &table, 1.0, 0);
            assert!(c.group_count() >= 1, "{}", item.smiles);
        }
    }
}
