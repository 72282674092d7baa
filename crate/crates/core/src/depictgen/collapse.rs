//! Super-group augmentation: replace matched table fragments by one
//! labeled display node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chemgraph::{Atom, Element, MolGraph};
use crate::labelparse::{FragmentEntry, FragmentTable};

/// Where a display atom came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Atom {
        atom: usize,
    },
    /// A collapsed group; `atoms[i]` is the source atom for fragment atom `i`.
    Group {
        key: String,
        atoms: Vec<usize>,
    },
}

impl Origin {
    pub fn source_atoms(&self) -> Vec<usize> {
        match self {
            Origin::Atom { atom } => vec![*atom],
            Origin::Group { atoms, .. } => atoms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapsed {
    /// The graph as drawn; group nodes carry `Element::Other(key)`.
    pub display: MolGraph,
    pub origin: Vec<Origin>,
    /// Source bond index for each display bond.
    pub bond_origin: Vec<usize>,
}

impl Collapsed {
    pub fn identity(g: &MolGraph) -> Self {
        Collapsed {
            display: g.clone(),
            origin: (0..g.atom_count())
                .map(|atom| Origin::Atom { atom })
                .collect(),
            bond_origin: (0..g.bond_count()).collect(),
        }
    }

    pub fn group_count(&self) -> usize {
        self.origin
            .iter()
            .filter(|o| matches!(o, Origin::Group { .. }))
            .count()
    }
}

struct Matcher<'a> {
    g: &'a MolGraph,
    adj: &'a [Vec<(usize, usize)>],
    f: &'a MolGraph,
    fadj: Vec<Vec<(usize, usize)>>,
    att: usize,
    blocked: &'a [bool],
    order: Vec<usize>,
    parent: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn compatible(&self, fa: usize, ga: usize) -> bool {
        let (x, y) = (self.f.atom(fa), self.g.atom(ga));
        let extra = usize::from(fa == self.att);
        x.element == y.element
            && x.formal_charge == y.formal_charge
            && self.adj[ga].len() == self.fadj[fa].len() + extra
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let fa = self.order[depth];
        let pg = self.map[self.parent[fa]];
        for k in 0..self.adj[pg].len() {
            let ga = self.adj[pg][k].0;
            if self.used[ga] || self.blocked[ga] || !self.compatible(fa, ga) {
                continue;
            }
            // every fragment bond to an already mapped atom must exist with the same order
            let ok = self.fadj[fa].iter().all(|&(fb, fe)| {
                let gb = self.map[fb];
                gb == usize::MAX
                    || self.g.bond_between(ga, gb).is_some_and(|be| {
                        self.g.bonds()[be].kind.order() == self.f.bonds()[fe].kind.order()
                    })
            });
            if !ok {
                continue;
            }
            self.map[fa] = ga;
            self.used[ga] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.map[fa] = usize::MAX;
            self.used[ga] = false;
        }
        false
    }
}

/// Finds an occurrence of `e`'s fragment whose attachment atom maps to
/// `anchor`: degrees must match exactly (plus one at the attachment), so
/// the occurrence is a pendant group.
fn match_at(
    g: &MolGraph,
    adj: &[Vec<(usize, usize)>],
    e: &FragmentEntry,
    anchor: usize,
    blocked: &[bool],
) -> Option<Vec<usize>> {
    let f = &e.fragment;
    let att = e.attachments[0];
    let fadj = f.adjacency();
    // BFS order of fragment atoms from the attachment, with parents
    let mut order = vec![att];
    let mut parent = vec![usize::MAX; f.atom_count()];
    let mut seen = vec![false; f.atom_count()];
    seen[att] = true;
    let mut q = 0;
    while q < order.len() {
        let a = order[q];
        q += 1;
        for &(b, _) in &fadj[a] {
            if !seen[b] {
                seen[b] = true;
                parent[b] = a;
                order.push(b);
            }
        }
    }
    let mut m = Matcher {
        g,
        adj,
        f,
        fadj,
        att,
        blocked,
        order,
        parent,
        map: vec![usize::MAX; f.atom_count()],
        used: vec![false; g.atom_count()],
    };
    if blocked[anchor] || !m.compatible(att, anchor) {
        return None;
    }
    m.map[att] = anchor;
    m.used[anchor] = true;
    if !m.extend(1) {
        return None;
    }
    // exactly one bond may leave the occurrence, from the attachment atom
    let leaving: usize = m
        .map
        .iter()
        .map(|&ga| adj[ga].iter().filter(|&&(v, _)| !m.used[v]).count())
        .sum();
    (leaving == 1).then_some(m.map)
}

/// With probability `prob` per occurrence, replaces pendant occurrences of
/// single-attachment table fragments by one node labeled with the key.
/// Larger fragments are tried first; occurrences never overlap and the
/// atom a group hangs from never joins another group.
pub fn collapse_superatoms(g: &MolGraph, table: &FragmentTable, prob: f64, seed: u64) -> Collapsed {
    if prob <= 0.0 || table.is_empty() || g.atom_count() < 2 {
        return Collapsed::identity(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c011_a95e);
    let adj = g.adjacency();
    let mut entries: Vec<&FragmentEntry> = table
        .entries()
        .iter()
        .filter(|e| e.attachments.len() == 1)
        .collect();
    entries.sort_by(|a, b| {
        b.fragment
            .atom_count()
            .cmp(&a.fragment.atom_count())
            .then(b.fragment.bond_count().cmp(&a.fragment.bond_count()))
            .then(a.key.cmp(&b.key))
    });
    let mut blocked = vec![false; g.atom_count()];
    // (key, source atoms in fragment order, source attachment atom)
    let mut groups: Vec<(String, Vec<usize>, usize)> = Vec::new();
    for e in entries {
        if e.fragment.atom_count() + 1 > g.atom_count() {
            continue;
        }
        for anchor in 0..g.atom_count() {
            let Some(map) = match_at(g, &adj, e, anchor, &blocked) else {
                continue;
            };
            if rng.gen::<f64>() >= prob {
                continue;
            }
            for &a in &map {
                blocked[a] = true;
            }
            for &(v, _) in &adj[anchor] {
                blocked[v] = true;
            }
            groups.push((e.key.clone(), map, anchor));
        }
    }
    if groups.is_empty() {
        return Collapsed::identity(g);
    }

    // display order: source order, each group standing where its attachment atom was
    let mut group_of = vec![None; g.atom_count()];
    for (gi, (_, atoms, _)) in groups.iter().enumerate() {
        for &a in atoms {
            group_of[a] = Some(gi);
        }
    }
    let mut display = MolGraph::new();
    let mut origin = Vec::new();
    let mut new_index = vec![usize::MAX; g.atom_count()];
    for a in 0..g.atom_count() {
        match group_of[a] {
            None => {
                new_index[a] = display.add_atom(g.atom(a).clone());
                origin.push(Origin::Atom { atom: a });
            }
            Some(gi) => {
                let (key, atoms, anchor) = &groups[gi];
                if *anchor == a {
                    let idx = display.add_atom(Atom::new(Element::Other(key.clone())));
                    for &m in atoms {
                        new_index[m] = idx;
                    }
                    origin.push(Origin::Group {
                        key: key.clone(),
                        atoms: atoms.clone(),
                    });
                }
            }
        }
    }
    let mut bond_origin = Vec::new();
    for (bi, b) in g.bonds().iter().enumerate() {
        let (x, y) = (new_index[b.begin], new_index[b.end]);
        if x == y {
            continue;
        }
        display
            .add_bond(x, y, b.kind)
            .expect("collapsed graph stays simple");
        bond_origin.push(bi);
    }
    Collapsed {
        display,
        origin,
        bond_origin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{is_isomorphic, parse_smiles, Strictness};
    use crate::labelparse::{expand_superatom, parse_label};

    fn expand_all(c: &Collapsed, table: &FragmentTable) -> MolGraph {
        let mut g = c.display.clone();
        loop {
            let Some(node) =
                (0..g.atom_count()).find(|&a| matches!(g.atom(a).element, Element::Other(_)))
            else {
                return g;
            };
            let Element::Other(key) = g.atom(node).element.clone() else {
                unreachable!()
            };
            g = expand_superatom(&g, node, &parse_label(&key, table)).unwrap();
        }
    }

    #[test]
    fn zero_probability_is_identity() {
        let g = parse_smiles("CCOC(=O)c1ccccc1").unwrap();
        let c = collapse_superatoms(&g, &FragmentTable::builtin(), 0.0, 1);
        assert_eq!(c.display, g);
    }

    #[test]
    fn ethyl_ester_collapses_to_one_node() {
        let table = FragmentTable::from_tsv("CO2Et\t-\t*C(=O)OCC\n").unwrap();
        let g = parse_smiles("CCOC(=O)c1ccccc1").unwrap();
        let c = collapse_superatoms(&g, &table, 1.0, 1);
        assert_eq!(c.group_count(), 1);
        assert_eq!(c.display.atom_count(), g.atom_count() - 4);
        let Some(Origin::Group { key, atoms }) =
            c.origin.iter().find(|o| matches!(o, Origin::Group { .. }))
        else {
            panic!()
        };
        assert_eq!(key, "CO2Et");
        assert_eq!(atoms.len(), 5);
        assert!(is_isomorphic(
            &expand_all(&c, &table),
            &g,
            Strictness::OrderOnly
        ));
    }

    #[test]
    fn builtin_round_trip_on_examples() {
        let table = FragmentTable::builtin();
        for s in [
            "COc1ccc(C(F)(F)F)cc1",
            "CC(C)(C)OC(=O)NCC(=O)O",
            "O=[N+]([O-])c1ccc(S(=O)(=O)C)cc1",
            "C[Si](C)(C)OCCc1ccccc1",
            "CCOC(=O)C1CCN(Cc2ccccc2)CC1",
        ] {
            let g = parse_smiles(s).unwrap();
            let c = collapse_superatoms(&g, &table, 1.0, 7);
            assert!(c.group_count() >= 1, "{s}");
            assert!(
                is_isomorphic(&expand_all(&c, &table), &g, Strictness::OrderOnly),
                "{s}"
            );
            for (bi, &ob) in c.bond_origin.iter().enumerate() {
                assert_eq!(c.display.bonds()[bi].kind, g.bonds()[ob].kind);
            }
        }
    }

    #[test]
    fn groups_do_not_overlap_or_touch() {
        let table = FragmentTable::builtin();
        let g = parse_smiles("CC(C)(C)c1ccc(cc1)C(C)(C)C").unwrap();
        let c = collapse_superatoms(&g, &table, 1.0, 3);
        let mut seen = vec![0; g.atom_count()];
        for o in &c.origin {
            for a in o.source_atoms() {
                seen[a] += 1;
            }
        }
        assert!(seen.iter().all(|&k| k == 1));
        for b in c.display.bonds() {
            let both = [b.begin, b.end]
                .iter()
                .all(|&a| matches!(c.origin[a], Origin::Group { .. }));
            assert!(!both);
        }
    }
}
