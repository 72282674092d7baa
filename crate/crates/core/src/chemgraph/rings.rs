//! Ring perception: a minimum cycle basis from Horton candidate cycles.

use std::collections::{BTreeSet, VecDeque};

use super::MolGraph;

/// A ring as its atoms in cyclic order, plus the bonds along it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    pub atoms: Vec<usize>,
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains_atom(&self, a: usize) -> bool {
        self.atoms.contains(&a)
    }
}

/// Bonds that lie on at least one cycle (i.e. are not bridges).
pub fn ring_bond_mask(g: &MolGraph) -> Vec<bool> {
    let adj = g.adjacency();
    (0..g.bond_count())
        .map(|e| {
            let b = g.bonds()[e];
            shortest_path(&adj, b.begin, b.end, Some(e), None).is_some()
        })
        .collect()
}

/// BFS path from `s` to `t` avoiding bond `skip_bond`; restricted to atoms
/// where `allowed` is true when given. Returns the atom sequence.
fn shortest_path(
    adj: &[Vec<(usize, usize)>],
    s: usize,
    t: usize,
    skip_bond: Option<usize>,
    allowed: Option<&[bool]>,
) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut q = VecDeque::from([s]);
    while let Some(a) = q.pop_front() {
        if a == t {
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &(nb, e) in &adj[a] {
            if Some(e) == skip_bond || seen[nb] || allowed.is_some_and(|m| !m[nb]) {
                continue;
            }
            seen[nb] = true;
            prev[nb] = a;
            q.push_back(nb);
        }
    }
    None
}

/// BFS tree from `root`: parent atom and parent bond per atom.
fn bfs_tree(adj: &[Vec<(usize, usize)>], root: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut pbond = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(a) = q.pop_front() {
        for &(nb, e) in &adj[a] {
            if depth[nb] == usize::MAX {
                depth[nb] = depth[a] + 1;
                parent[nb] = a;
                pbond[nb] = e;
                q.push_back(nb);
            }
        }
    }
    (parent, pbond, depth)
}

fn path_to_root(parent: &[usize], mut a: usize) -> Vec<usize> {
    let mut p = vec![a];
    while parent[a] != usize::MAX {
        a = parent[a];
        p.push(a);
    }
    p
}

/// Minimum cycle basis (SSSR) restricted to bonds where `bond_mask` is
/// true (all bonds when `None`). Rings come out sorted by size, then by
/// their smallest atom.
pub fn smallest_rings(g: &MolGraph, bond_mask: Option<&[bool]>) -> Vec<Ring> {
    let mut sub = MolGraph::new();
    for a in g.atoms() {
        sub.add_atom(a.clone());
    }
    let mut bond_ids = Vec::new();
    for (i, b) in g.bonds().iter().enumerate() {
        if bond_mask.is_none_or(|m| m[i]) {
            sub.add_bond(b.begin, b.end, b.kind)
                .expect("subgraph of valid graph");
            bond_ids.push(i);
        }
    }
    let comps = sub.components().len();
    let rank = sub.bond_count() + comps - sub.atom_count();
    if rank == 0 {
        return Vec::new();
    }
    let adj = sub.adjacency();
    let ne = sub.bond_count();
    let words = ne.div_ceil(64);

    let mut candidates: Vec<(Vec<usize>, Vec<u64>)> = Vec::new();
    let mut seen_sets: BTreeSet<Vec<u64>> = BTreeSet::new();
    for root in 0..sub.atom_count() {
        if adj[root].is_empty() {
            continue;
        }
        let (parent, pbond, depth) = bfs_tree(&adj, root);
        for (e, b) in sub.bonds().iter().enumerate() {
            let (x, y) = (b.begin, b.end);
            if depth[x] == usize::MAX || pbond[x] == e || pbond[y] == e {
                continue;
            }
            let px = path_to_root(&parent, x);
            let py = path_to_root(&parent, y);
            // the two root paths must share only the root
            let set_x: BTreeSet<usize> = px.iter().copied().collect();
            if py[..py.len() - 1].iter().any(|a| set_x.contains(a)) {
                continue;
            }
            // root..x, then y back towards the root
            let mut atoms: Vec<usize> = px.iter().rev().copied().collect();
            atoms.extend(py[..py.len() - 1].iter().copied());
            let mut bits = vec![0u64; words];
            let mut ok = true;
            for k in 0..atoms.len() {
                let a = atoms[k];
                let c = atoms[(k + 1) % atoms.len()];
                match sub.bond_between(a, c) {
                    Some(bi) => bits[bi / 64] |= 1 << (bi % 64),
                    None => ok = false,
                }
            }
            if ok && seen_sets.insert(bits.clone()) {
                candidates.push((atoms, bits));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.1.cmp(&b.1)));

    // Gaussian elimination over GF(2), greedily keeping independent cycles.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for (atoms, bits) in candidates {
        let mut v = bits.clone();
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for w in 0..words {
                    v[w] ^= row[w];
                }
            }
        }
        let Some(pivot) = (0..ne).find(|&i| v[i / 64] >> (i % 64) & 1 == 1) else {
            continue;
        };
        basis.push((pivot, v));
        let bonds = (0..atoms.len())
            .map(|k| {
                let e = sub
                    .bond_between(atoms[k], atoms[(k + 1) % atoms.len()])
                    .expect("cycle edge exists");
                bond_ids[e]
            })
            .collect();
        rings.push(Ring { atoms, bonds });
        if rings.len() == rank {
            break;
        }
    }
    rings.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.atoms.iter().min().cmp(&b.atoms.iter().min()))
    });
    rings
}

/// Groups rings that share at least one bond into fused systems; each
/// system is a list of ring indices.
pub fn fused_systems(rings: &[Ring]) -> Vec<Vec<usize>> {
    let n = rings.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], mut x: usize) -> usize {
        while g[x] != x {
            g[x] = g[g[x]];
            x = g[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if rings[i].atoms.iter().any(|a| rings[j].atoms.contains(a)) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut group, i);
        if root_of[r] == usize::MAX {
            root_of[r] = out.len();
            out.push(Vec::new());
        }
        out[root_of[r]].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::parse_smiles;

    #[test]
    fn naphthalene_has_two_six_rings() {
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        let rings = smallest_rings(&g, None);
        assert_eq!(rings.iter().map(Ring::len).collect::<Vec<_>>(), vec![6, 6]);
        assert_eq!(fused_systems(&rings).len(), 1);
    }

    #[test]
    fn chains_have_no_rings() {
        let g = parse_smiles("CCC(C)CO").unwrap();
        assert!(smallest_rings(&g, None).is_empty());
        assert!(ring_bond_mask(&g).iter().all(|&r| !r));
    }

    #[test]
    fn norbornane_two_five_rings() {
        let g = parse_smiles("C1CC2CCC1C2").unwrap();
        let rings = smallest_rings(&g, None);
        assert_eq!(rings.iter().map(Ring::len).collect::<Vec<_>>(), vec![5, 5]);
    }

    #[test]
    fn ring_atoms_are_cyclic() {
        let g = parse_smiles("C1CCC2(CC1)CCCC2").unwrap();
        for r in smallest_rings(&g, None) {
            for k in 0..r.len() {
                assert!(g
                    .bond_between(r.atoms[k], r.atoms[(k + 1) % r.len()])
                    .is_some());
            }
        }
    }
}
