//! Canonical atom ordering by iterated neighborhood refinement with
//! individualization of the smallest ambiguous cell. Branches that are
//! images of each other under an already discovered automorphism are
//! skipped, so symmetric substituents (tBu, CF3, ...) stay cheap.

use std::cmp::Ordering;

use super::{BondKind, MolGraph};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct AtomInvariant {
    symbol: String,
    charge: i8,
    hydrogens: u32,
}

/// Canonical form of a graph: atom invariants and edges listed in canonical
/// order. Two graphs have equal certificates iff they are isomorphic with
/// element, charge, hydrogen count, bond kind and wedge direction preserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Certificate {
    atoms: Vec<AtomInvariant>,
    edges: Vec<(u32, u32, u8)>,
}

fn kind_code(kind: BondKind) -> u8 {
    match kind {
        BondKind::Single => 0,
        BondKind::Double => 1,
        BondKind::Triple => 2,
        BondKind::WedgeUp => 3,
        BondKind::WedgeDown => 4,
        BondKind::Wavy => 5,
    }
}

/// Bond code as seen from one endpoint; wedges differ at their two ends.
fn directed_code(kind: BondKind, from_begin: bool) -> u32 {
    let k = kind_code(kind) as u32 * 2;
    if kind.is_directional() && from_begin {
        k + 1
    } else {
        k
    }
}

/// Dense ranks of `keys`, ordered by key value.
pub(crate) fn rank_keys<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut r = 0u32;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            r += 1;
        }
        ranks[idx[w]] = r;
    }
    ranks
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

/// Refines a coloring until the number of classes stops growing. The
/// result is a dense ranking that depends only on the (colored) graph, not
/// on atom order.
pub(crate) fn refine(init: Vec<u32>, adj: &[Vec<(usize, u32)>]) -> Vec<u32> {
    let mut colors = rank_keys(&init);
    let mut classes = class_count(&colors);
    loop {
        let keys: Vec<(u32, Vec<(u32, u32)>)> = (0..colors.len())
            .map(|i| {
                let mut nb: Vec<(u32, u32)> = adj[i].iter().map(|&(n, c)| (colors[n], c)).collect();
                nb.sort_unstable();
                (colors[i], nb)
            })
            .collect();
        let next = rank_keys(&keys);
        let next_classes = class_count(&next);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

/// Adjacency with directed bond codes, used by both canonicalization and
/// isomorphism pruning.
pub(crate) fn coded_adjacency(
    g: &MolGraph,
    code: impl Fn(BondKind, bool) -> u32,
) -> Vec<Vec<(usize, u32)>> {
    let mut adj = vec![Vec::new(); g.atom_count()];
    for b in g.bonds() {
        adj[b.begin].push((b.end, code(b.kind, true)));
        adj[b.end].push((b.begin, code(b.kind, false)));
    }
    adj
}

struct Search<'a> {
    graph: &'a MolGraph,
    adj: Vec<Vec<(usize, u32)>>,
    invariants: Vec<AtomInvariant>,
    first: Option<(Certificate, Vec<usize>)>,
    best: Option<(Certificate, Vec<usize>)>,
    generators: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn certificate(&self, order: &[usize]) -> Certificate {
        let mut pos = vec![0u32; order.len()];
        for (k, &a) in order.iter().enumerate() {
            pos[a] = k as u32;
        }
        let atoms = order.iter().map(|&a| self.invariants[a].clone()).collect();
        let mut edges: Vec<(u32, u32, u8)> = self
            .graph
            .bonds()
            .iter()
            .map(|b| {
                let (p, q) = (pos[b.begin], pos[b.end]);
                let mut code = kind_code(b.kind) * 2;
                if b.kind.is_directional() && p > q {
                    code += 1;
                }
                (p.min(q), p.max(q), code)
            })
            .collect();
        edges.sort_unstable();
        Certificate { atoms, edges }
    }

    fn leaf(&mut self, colors: &[u32]) {
        let mut order: Vec<usize> = (0..colors.len()).collect();
        order.sort_by_key(|&a| colors[a]);
        let cert = self.certificate(&order);
        for reference in [&self.first, &self.best].into_iter().flatten() {
            if reference.0 == cert {
                let mut gamma = vec![0usize; order.len()];
                for (k, &a) in reference.1.iter().enumerate() {
                    gamma[a] = order[k];
                }
                if gamma.iter().enumerate().any(|(i, &g)| i != g) {
                    self.generators.push(gamma);
                }
                return;
            }
        }
        if self.first.is_none() {
            self.first = Some((cert.clone(), order.clone()));
        }
        let better = match &self.best {
            None => true,
            Some((b, _)) => cert.cmp(b) == Ordering::Less,
        };
        if better {
            self.best = Some((cert, order));
        }
    }

    /// Orbits of the group generated by the stored generators that fix every
    /// vertex of `prefix`.
    fn orbits(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.graph.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in &self.generators {
            if prefix.iter().any(|&v| g[v] != v) {
                continue;
            }
            for (i, &gi) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, gi));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|i| find(&mut parent, i)).collect()
    }

    fn descend(&mut self, colors: Vec<u32>, prefix: &mut Vec<usize>) {
        let n = colors.len();
        let classes = class_count(&colors);
        if classes == n {
            self.leaf(&colors);
            return;
        }
        let mut sizes = vec![0usize; classes];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = (0..classes)
            .filter(|&c| sizes[c] > 1)
            .min_by_key(|&c| (sizes[c], c))
            .expect("non-discrete partition has a non-singleton cell") as u32;
        let cell: Vec<usize> = (0..n).filter(|&a| colors[a] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() {
                let orbits = self.orbits(prefix);
                if explored.iter().any(|&e| orbits[e] == orbits[v]) {
                    continue;
                }
            }
            let init: Vec<u32> = (0..n)
                .map(|a| colors[a] * 2 + u32::from(colors[a] == target && a != v))
                .collect();
            let child = refine(init, &self.adj);
            prefix.push(v);
            self.descend(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }
}

fn invariants(g: &MolGraph) -> Vec<AtomInvariant> {
    (0..g.atom_count())
        .map(|i| {
            let a = g.atom(i);
            AtomInvariant {
                symbol: a.element.symbol().to_string(),
                charge: a.formal_charge,
                hydrogens: g.implicit_hydrogen_count(i),
            }
        })
        .collect()
}

fn run(g: &MolGraph) -> Option<(Certificate, Vec<usize>)> {
    if g.is_empty() {
        return None;
    }
    let invariants = invariants(g);
    let adj = coded_adjacency(g, directed_code);
    let init_keys: Vec<(AtomInvariant, usize)> = (0..g.atom_count())
        .map(|i| (invariants[i].clone(), adj[i].len()))
        .collect();
    let init = rank_keys(&init_keys);
    let colors = refine(init, &adj);
    let mut search = Search {
        graph: g,
        adj,
        invariants,
        first: None,
        best: None,
        generators: Vec::new(),
    };
    search.descend(colors, &mut Vec::new());
    search.best
}

/// Canonical ordering: `order[k]` is the atom placed at canonical position
/// `k`. Isomorphic inputs yield orderings under which the relabeled graphs
/// are identical.
pub fn canonical_labels(g: &MolGraph) -> Vec<usize> {
    run(g).map(|(_, order)| order).unwrap_or_default()
}

/// The canonical form itself; equal iff the graphs are isomorphic under
/// exact bond kinds and wedge directions.
pub fn canonical_certificate(g: &MolGraph) -> Certificate {
    run(g).map(|(c, _)| c).unwrap_or(Certificate {
        atoms: Vec::new(),
        edges: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::parse_smiles;

    #[test]
    fn single_atom_is_identity() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(canonical_labels(&g), vec![0]);
    }

    #[test]
    fn ethanol_orders_agree() {
        let a = parse_smiles("CCO").unwrap();
        let b = parse_smiles("OCC").unwrap();
        let seq = |g: &MolGraph| -> Vec<(String, usize)> {
            canonical_labels(g)
                .into_iter()
                .map(|i| (g.atom(i).element.symbol().to_string(), g.degree(i)))
                .collect()
        };
        assert_eq!(seq(&a), seq(&b));
        assert_eq!(canonical_certificate(&a), canonical_certificate(&b));
    }

    #[test]
    fn labels_are_a_permutation() {
        let g = parse_smiles("CC(C)(C)c1ccc(cc1)C(F)(F)F").unwrap();
        let mut l = canonical_labels(&g);
        l.sort_unstable();
        assert_eq!(l, (0..g.atom_count()).collect::<Vec<_>>());
    }

    #[test]
    fn distinguishes_non_isomorphic_regular_graphs() {
        // one 6-ring vs two 3-rings: same degrees everywhere
        let hex = parse_smiles("C1CCCCC1").unwrap();
        let tri = parse_smiles("C1CC1.C1CC1").unwrap();
        assert_ne!(canonical_certificate(&hex), canonical_certificate(&tri));
    }

    #[test]
    fn highly_symmetric_graph_finishes() {
        // four tBu groups on a benzene ring plus two CF3: large automorphism group
        let g = parse_smiles("CC(C)(C)c1c(C(C)(C)C)c(C(F)(F)F)c(C(C)(C)C)c(C(C)(C)C)c1C(F)(F)F")
            .unwrap();
        let order = canonical_labels(&g);
        assert_eq!(order.len(), g.atom_count());
    }

    #[test]
    fn wedge_direction_matters() {
        let mut a = MolGraph::new();
        let c = a.add_atom(crate::chemgraph::Atom::new(crate::chemgraph::Element::C));
        let o = a.add_atom(crate::chemgraph::Atom::new(crate::chemgraph::Element::O));
        a.add_bond(c, o, BondKind::WedgeUp).unwrap();
        let mut b = a.clone();
        b.reverse_bond(0);
        assert_ne!(canonical_certificate(&a), canonical_certificate(&b));
    }
}
