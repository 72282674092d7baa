//! Exact graph matching under configurable atom and bond compatibility.

use serde::{Deserialize, Serialize};

use super::canon::{coded_adjacency, rank_keys, refine};
use super::{Atom, Bond, BondKind, MolGraph};

/// How bond kinds are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strictness {
    /// Wedge, hash and wavy bonds compare equal to plain single bonds.
    #[default]
    OrderOnly,
    /// Bond kinds must match exactly and wedges must point the same way.
    StereoStrict,
}

/// Full compatibility rules for atom and bond matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchRules {
    pub element: bool,
    pub charge: bool,
    pub bonds: Strictness,
}

impl From<Strictness> for MatchRules {
    fn from(bonds: Strictness) -> Self {
        MatchRules {
            element: true,
            charge: true,
            bonds,
        }
    }
}

impl MatchRules {
    pub fn atoms_compatible(&self, a: &Atom, b: &Atom) -> bool {
        (!self.element || a.element == b.element)
            && (!self.charge || a.formal_charge == b.formal_charge)
    }

    /// Whether `b1` can map onto `b2`; `forward` says `b1.begin` maps to
    /// `b2.begin`.
    pub fn bonds_compatible(&self, b1: &Bond, b2: &Bond, forward: bool) -> bool {
        match self.bonds {
            Strictness::OrderOnly => b1.kind.order() == b2.kind.order(),
            Strictness::StereoStrict => {
                b1.kind == b2.kind && (!b1.kind.is_directional() || forward)
            }
        }
    }

    fn bond_code(&self, kind: BondKind, from_begin: bool) -> u32 {
        match self.bonds {
            Strictness::OrderOnly => kind.order(),
            Strictness::StereoStrict => {
                let k = kind as u32 * 2 + 8;
                if kind.is_directional() && from_begin {
                    k + 1
                } else {
                    k
                }
            }
        }
    }

    fn atom_key(&self, a: &Atom) -> (String, i8) {
        (
            if self.element {
                a.element.symbol().to_string()
            } else {
                String::new()
            },
            if self.charge { a.formal_charge } else { 0 },
        )
    }
}

/// True iff a bijection exists preserving element, charge and bond kind at
/// the given strictness. Explicit hydrogen counts and coordinates are ignored.
pub fn is_isomorphic(g1: &MolGraph, g2: &MolGraph, strictness: Strictness) -> bool {
    find_isomorphism(g1, g2, strictness.into()).is_some()
}

/// Returns `map` with `map[i]` the atom of `g2` matched to atom `i` of `g1`.
pub fn find_isomorphism(g1: &MolGraph, g2: &MolGraph, rules: MatchRules) -> Option<Vec<usize>> {
    let n = g1.atom_count();
    if n != g2.atom_count() || g1.bond_count() != g2.bond_count() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }

    // Refine colors on the disjoint union so classes are comparable across
    // the two graphs; matched atoms must share a class.
    let code = |k, f| rules.bond_code(k, f);
    let adj1 = coded_adjacency(g1, code);
    let adj2 = coded_adjacency(g2, code);
    let mut union_adj = adj1.clone();
    union_adj.extend(
        adj2.iter()
            .map(|l| l.iter().map(|&(v, c)| (v + n, c)).collect()),
    );
    let keys: Vec<(String, i8)> = g1
        .atoms()
        .iter()
        .chain(g2.atoms())
        .map(|a| rules.atom_key(a))
        .collect();
    let colors = refine(rank_keys(&keys), &union_adj);
    let (c1, c2) = colors.split_at(n);
    let mut h1: Vec<u32> = c1.to_vec();
    let mut h2: Vec<u32> = c2.to_vec();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 {
        return None;
    }

    let nb1 = g1.adjacency();
    let nb2 = g2.adjacency();

    // Match atoms in BFS order from the atom with the rarest color.
    let mut class_size = vec![0usize; colors.iter().copied().max().unwrap_or(0) as usize + 1];
    for &c in c1 {
        class_size[c as usize] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !placed[i])
            .min_by_key(|&i| (class_size[c1[i] as usize], i))
            .expect("unplaced atom remains");
        placed[start] = true;
        let mut q = order.len();
        order.push(start);
        while q < order.len() {
            let a = order[q];
            q += 1;
            let mut next: Vec<usize> = nb1[a]
                .iter()
                .map(|&(v, _)| v)
                .filter(|&v| !placed[v])
                .collect();
            next.sort_by_key(|&v| (class_size[c1[v] as usize], v));
            next.dedup();
            for v in next {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
    }

    let mut state = IsoState {
        g1,
        g2,
        rules,
        c1,
        c2,
        nb1: &nb1,
        nb2: &nb2,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    if state.extend(&order, 0) {
        Some(state.map)
    } else {
        None
    }
}

struct IsoState<'a> {
    g1: &'a MolGraph,
    g2: &'a MolGraph,
    rules: MatchRules,
    c1: &'a [u32],
    c2: &'a [u32],
    nb1: &'a [Vec<(usize, usize)>],
    nb2: &'a [Vec<(usize, usize)>],
    map: Vec<usize>,
    used: Vec<bool>,
}

impl IsoState<'_> {
    fn feasible(&self, u: usize, v: usize) -> bool {
        if self.c1[u] != self.c2[v] || self.nb1[u].len() != self.nb2[v].len() {
            return false;
        }
        if !self
            .rules
            .atoms_compatible(self.g1.atom(u), self.g2.atom(v))
        {
            return false;
        }
        let mut mapped_nb = 0;
        for &(w, b1) in &self.nb1[u] {
            let mw = self.map[w];
            if mw == usize::MAX {
                continue;
            }
            mapped_nb += 1;
            let Some(&(_, b2)) = self.nb2[v].iter().find(|&&(x, _)| x == mw) else {
                return false;
            };
            let bond1 = &self.g1.bonds()[b1];
            let bond2 = &self.g2.bonds()[b2];
            let forward =
                self.map[bond1.begin] == bond2.begin || (bond1.begin == u && bond2.begin == v);
            if !self.rules.bonds_compatible(bond1, bond2, forward) {
                return false;
            }
        }
        let mapped_nb2 = self.nb2[v].iter().filter(|&&(x, _)| self.used[x]).count();
        mapped_nb == mapped_nb2
    }

    fn extend(&mut self, order: &[usize], depth: usize) -> bool {
        if depth == order.len() {
            return true;
        }
        let u = order[depth];
        let anchor = self.nb1[u]
            .iter()
            .map(|&(w, _)| w)
            .find(|&w| self.map[w] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(w) => self.nb2[self.map[w]]
                .iter()
                .map(|&(x, _)| x)
                .filter(|&x| !self.used[x])
                .collect(),
            None => (0..self.g2.atom_count())
                .filter(|&x| !self.used[x])
                .collect(),
        };
        for v in candidates {
            if !self.feasible(u, v) {
                continue;
            }
            self.map[u] = v;
            self.used[v] = true;
            if self.extend(order, depth + 1) {
                return true;
            }
            self.map[u] = usize::MAX;
            self.used[v] = false;
        }
        false
    }
}
