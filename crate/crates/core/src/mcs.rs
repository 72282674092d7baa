//! Maximum common connected edge subgraph (MCES) and the consistency index.
//!
//! The search grows one connected common edge subgraph at a time from a
//! seed bond pair, branching on the lowest-index frontier bond of the first
//! graph: map it onto each compatible bond of the second graph, or exclude
//! it. A bound counts, per bond label class, the bonds still reachable from
//! the mapped region in both graphs. Seeds are taken in bond order and every
//! bond below the current seed is excluded, so each connected subgraph is
//! generated from its lowest bond only.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::{find_isomorphism, Bond, MatchRules, MolGraph, Strictness};

/// How bonds are compared during matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BondCompat {
    /// Bond kinds (and wedge directions) must be identical.
    ExactKind,
    /// Only bond orders are compared; stereo decorations count as single.
    #[default]
    OrderOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub element_must_match: bool,
    pub charge_must_match: bool,
    pub bond_compat: BondCompat,
    pub timeout_ms: u64,
    pub max_atoms_for_search: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            element_must_match: true,
            charge_must_match: true,
            bond_compat: BondCompat::OrderOnly,
            timeout_ms: 2000,
            max_atoms_for_search: 200,
        }
    }
}

impl MatchConfig {
    pub fn rules(&self) -> MatchRules {
        MatchRules {
            element: self.element_must_match,
            charge: self.charge_must_match,
            bonds: self.strictness(),
        }
    }

    /// The isomorphism strictness that corresponds to this bond rule.
    pub fn strictness(&self) -> Strictness {
        match self.bond_compat {
            BondCompat::ExactKind => Strictness::StereoStrict,
            BondCompat::OrderOnly => Strictness::OrderOnly,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct McsResult {
    /// `(atom in g1, atom in g2)`, sorted by the g1 index.
    pub atom_mapping: Vec<(usize, usize)>,
    /// `(bond in g1, bond in g2)`, sorted by the g1 index.
    pub bond_mapping: Vec<(usize, usize)>,
    pub matched_atoms: usize,
    pub matched_bonds: usize,
    /// The time budget ran out; the result is the best found so far.
    pub timed_out: bool,
    /// A graph exceeded `max_atoms_for_search`, so only the exact-match
    /// check ran.
    pub size_limited: bool,
}

impl McsResult {
    fn from_maps(atom_mapping: Vec<(usize, usize)>, bond_mapping: Vec<(usize, usize)>) -> Self {
        let mut r = McsResult {
            matched_atoms: atom_mapping.len(),
            matched_bonds: bond_mapping.len(),
            atom_mapping,
            bond_mapping,
            ..Default::default()
        };
        r.atom_mapping.sort_unstable();
        r.bond_mapping.sort_unstable();
        r
    }
}

const NONE: usize = usize::MAX;

fn bond_forward(b1: &Bond, b2: &Bond, map1: &[usize]) -> bool {
    map1[b1.begin] == b2.begin
}

/// Label classes shared by both graphs: a bond's class is its atom label
/// pair (unordered) plus its bond label.
fn bond_classes(
    g1: &MolGraph,
    g2: &MolGraph,
    rules: MatchRules,
) -> (Vec<usize>, Vec<usize>, usize) {
    let atom_key = |a: &crate::chemgraph::Atom| {
        (
            if rules.element {
                a.element.symbol().to_string()
            } else {
                String::new()
            },
            if rules.charge { a.formal_charge } else { 0 },
        )
    };
    let key = |g: &MolGraph, b: &Bond| {
        let x = atom_key(g.atom(b.begin));
        let y = atom_key(g.atom(b.end));
        let label = match rules.bonds {
            Strictness::OrderOnly => b.kind.order() as u8,
            Strictness::StereoStrict => 10 + b.kind as u8,
        };
        if x <= y {
            (x, y, label)
        } else {
            (y, x, label)
        }
    };
    let mut table: Vec<_> = Vec::new();
    let mut lookup = |k| match table.iter().position(|t| *t == k) {
        Some(i) => i,
        None => {
            table.push(k);
            table.len() - 1
        }
    };
    let c1: Vec<usize> = g1.bonds().iter().map(|b| lookup(key(g1, b))).collect();
    let c2: Vec<usize> = g2.bonds().iter().map(|b| lookup(key(g2, b))).collect();
    let n = table.len();
    (c1, c2, n)
}

struct Search<'a> {
    g1: &'a MolGraph,
    g2: &'a MolGraph,
    rules: MatchRules,
    adj1: Vec<Vec<(usize, usize)>>,
    adj2: Vec<Vec<(usize, usize)>>,
    class1: Vec<usize>,
    class2: Vec<usize>,
    n_classes: usize,
    map1: Vec<usize>,
    map2: Vec<usize>,
    bmap1: Vec<usize>,
    bused2: Vec<bool>,
    excluded1: Vec<bool>,
    mapped_atoms: usize,
    mapped_bonds: usize,
    best_bonds: usize,
    best_atoms: usize,
    best: Option<(Vec<(usize, usize)>, Vec<(usize, usize)>)>,
    ceiling: (usize, usize),
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
    done: bool,
    // scratch
    seen1: Vec<bool>,
    seen2: Vec<bool>,
    count1: Vec<usize>,
    count2: Vec<usize>,
    stack: Vec<usize>,
}

impl Search<'_> {
    fn atom_ok(&self, a1: usize, a2: usize) -> bool {
        self.rules
            .atoms_compatible(self.g1.atom(a1), self.g2.atom(a2))
    }

    /// Upper bound on bonds that can still be added to the current mapping.
    fn reachable_bound(&mut self) -> usize {
        self.count1.iter_mut().for_each(|c| *c = 0);
        self.count2.iter_mut().for_each(|c| *c = 0);
        // g1: bonds reachable from mapped atoms through usable bonds
        self.seen1.iter_mut().for_each(|s| *s = false);
        self.stack.clear();
        for a in 0..self.g1.atom_count() {
            if self.map1[a] != NONE {
                self.seen1[a] = true;
                self.stack.push(a);
            }
        }
        let mut counted1 = vec![false; self.g1.bond_count()];
        while let Some(a) = self.stack.pop() {
            for &(nb, e) in &self.adj1[a] {
                if self.excluded1[e] || self.bmap1[e] != NONE || counted1[e] {
                    continue;
                }
                counted1[e] = true;
                self.count1[self.class1[e]] += 1;
                if !self.seen1[nb] {
                    self.seen1[nb] = true;
                    self.stack.push(nb);
                }
            }
        }
        self.seen2.iter_mut().for_each(|s| *s = false);
        for a in 0..self.g2.atom_count() {
            if self.map2[a] != NONE {
                self.seen2[a] = true;
                self.stack.push(a);
            }
        }
        let mut counted2 = vec![false; self.g2.bond_count()];
        while let Some(a) = self.stack.pop() {
            for &(nb, e) in &self.adj2[a] {
                if self.bused2[e] || counted2[e] {
                    continue;
                }
                counted2[e] = true;
                self.count2[self.class2[e]] += 1;
                if !self.seen2[nb] {
                    self.seen2[nb] = true;
                    self.stack.push(nb);
                }
            }
        }
        (0..self.n_classes)
            .map(|k| self.count1[k].min(self.count2[k]))
            .sum()
    }

    fn record(&mut self) {
        if (self.mapped_bonds, self.mapped_atoms) <= (self.best_bonds, self.best_atoms)
            && self.best.is_some()
        {
            return;
        }
        self.best_bonds = self.mapped_bonds;
        self.best_atoms = self.mapped_atoms;
        let atoms = (0..self.g1.atom_count())
            .filter(|&a| self.map1[a] != NONE)
            .map(|a| (a, self.map1[a]))
            .collect();
        let bonds = (0..self.g1.bond_count())
            .filter(|&b| self.bmap1[b] != NONE)
            .map(|b| (b, self.bmap1[b]))
            .collect();
        self.best = Some((atoms, bonds));
        if (self.best_bonds, self.best_atoms) >= self.ceiling {
            self.done = true;
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes % 512 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
            self.done = true;
        }
        self.done
    }

    fn map_atom(&mut self, a1: usize, a2: usize) {
        self.map1[a1] = a2;
        self.map2[a2] = a1;
        self.mapped_atoms += 1;
    }

    fn unmap_atom(&mut self, a1: usize) {
        let a2 = self.map1[a1];
        self.map1[a1] = NONE;
        self.map2[a2] = NONE;
        self.mapped_atoms -= 1;
    }

    fn grow(&mut self) {
        if self.tick() {
            return;
        }
        let add = self.reachable_bound();
        let ub_bonds = self.mapped_bonds + add;
        let atom_room = self.g1.atom_count().min(self.g2.atom_count()) - self.mapped_atoms;
        let ub_atoms = self.mapped_atoms + add.min(atom_room);
        if self.best.is_some() && (ub_bonds, ub_atoms) <= (self.best_bonds, self.best_atoms) {
            return;
        }

        let frontier = (0..self.g1.bond_count()).find(|&e| {
            if self.excluded1[e] || self.bmap1[e] != NONE {
                return false;
            }
            let b = self.g1.bonds()[e];
            self.map1[b.begin] != NONE || self.map1[b.end] != NONE
        });
        let Some(f) = frontier else {
            self.record();
            return;
        };
        let bond1 = self.g1.bonds()[f];
        let (p, q) = if self.map1[bond1.begin] != NONE {
            (bond1.begin, bond1.end)
        } else {
            (bond1.end, bond1.begin)
        };
        let p2 = self.map1[p];
        let options: Vec<(usize, usize)> = self.adj2[p2].clone();
        for (q2, e2) in options {
            if self.bused2[e2] {
                continue;
            }
            let q_mapped = self.map1[q];
            if q_mapped != NONE {
                if q_mapped != q2 {
                    continue;
                }
            } else if self.map2[q2] != NONE || !self.atom_ok(q, q2) {
                continue;
            }
            let newly = q_mapped == NONE;
            if newly {
                self.map_atom(q, q2);
            }
            let bond2 = self.g2.bonds()[e2];
            if self
                .rules
                .bonds_compatible(&bond1, &bond2, bond_forward(&bond1, &bond2, &self.map1))
            {
                self.bmap1[f] = e2;
                self.bused2[e2] = true;
                self.mapped_bonds += 1;
                self.grow();
                self.mapped_bonds -= 1;
                self.bused2[e2] = false;
                self.bmap1[f] = NONE;
            }
            if newly {
                self.unmap_atom(q);
            }
            if self.done {
                return;
            }
        }
        self.excluded1[f] = true;
        self.grow();
        self.excluded1[f] = false;
    }

    fn run(&mut self) {
        let e1 = self.g1.bond_count();
        for seed in 0..e1 {
            if self.done {
                break;
            }
            // plain class-count bound for all bonds >= seed
            let mut c1 = vec![0usize; self.n_classes];
            let mut c2 = vec![0usize; self.n_classes];
            for e in seed..e1 {
                c1[self.class1[e]] += 1;
            }
            for &c in &self.class2 {
                c2[c] += 1;
            }
            let ub: usize = (0..self.n_classes).map(|k| c1[k].min(c2[k])).sum();
            if self.best.is_some() && (ub, ub + 1) <= (self.best_bonds, self.best_atoms) {
                break;
            }
            let b1 = self.g1.bonds()[seed];
            for e2 in 0..self.g2.bond_count() {
                let b2 = self.g2.bonds()[e2];
                for (x2, y2) in [(b2.begin, b2.end), (b2.end, b2.begin)] {
                    if self.done {
                        break;
                    }
                    if !self.atom_ok(b1.begin, x2) || !self.atom_ok(b1.end, y2) {
                        continue;
                    }
                    if !self.rules.bonds_compatible(&b1, &b2, x2 == b2.begin) {
                        continue;
                    }
                    self.map_atom(b1.begin, x2);
                    self.map_atom(b1.end, y2);
                    self.bmap1[seed] = e2;
                    self.bused2[e2] = true;
                    self.mapped_bonds = 1;
                    self.grow();
                    self.mapped_bonds = 0;
                    self.bused2[e2] = false;
                    self.bmap1[seed] = NONE;
                    self.unmap_atom(b1.end);
                    self.unmap_atom(b1.begin);
                }
            }
            self.excluded1[seed] = true;
        }
    }
}

fn single_atom_match(g1: &MolGraph, g2: &MolGraph, rules: MatchRules) -> Option<(usize, usize)> {
    (0..g1.atom_count())
        .flat_map(|a| (0..g2.atom_count()).map(move |b| (a, b)))
        .find(|&(a, b)| rules.atoms_compatible(g1.atom(a), g2.atom(b)))
}

/// Maximum common connected edge subgraph: most bonds first, atoms as the
/// tie-break. Deterministic for fixed inputs; on timeout the best mapping
/// found so far is returned with `timed_out` set.
pub fn max_common_subgraph(g1: &MolGraph, g2: &MolGraph, cfg: &MatchConfig) -> McsResult {
    let rules = cfg.rules();
    if let Some(map) = find_isomorphism(g1, g2, rules) {
        let atoms = map.iter().enumerate().map(|(a, &b)| (a, b)).collect();
        let bonds = g1
            .bonds()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                (
                    i,
                    g2.bond_between(map[b.begin], map[b.end])
                        .expect("isomorphism maps bonds"),
                )
            })
            .collect();
        return McsResult::from_maps(atoms, bonds);
    }
    if g1.atom_count() > cfg.max_atoms_for_search || g2.atom_count() > cfg.max_atoms_for_search {
        return McsResult {
            size_limited: true,
            ..Default::default()
        };
    }
    let (class1, class2, n_classes) = bond_classes(g1, g2, rules);
    let ceiling_bonds = g1.bond_count().min(g2.bond_count());
    let ceiling_atoms = g1.atom_count().min(g2.atom_count());
    let mut s = Search {
        g1,
        g2,
        rules,
        adj1: g1.adjacency(),
        adj2: g2.adjacency(),
        class1,
        class2,
        n_classes,
        map1: vec![NONE; g1.atom_count()],
        map2: vec![NONE; g2.atom_count()],
        bmap1: vec![NONE; g1.bond_count()],
        bused2: vec![false; g2.bond_count()],
        excluded1: vec![false; g1.bond_count()],
        mapped_atoms: 0,
        mapped_bonds: 0,
        best_bonds: 0,
        best_atoms: 0,
        best: None,
        ceiling: (ceiling_bonds, ceiling_atoms),
        deadline: Instant::now() + Duration::from_millis(cfg.timeout_ms.max(1)),
        nodes: 0,
        timed_out: false,
        done: false,
        seen1: vec![false; g1.atom_count()],
        seen2: vec![false; g2.atom_count()],
        count1: vec![0; n_classes],
        count2: vec![0; n_classes],
        stack: Vec::new(),
    };
    s.run();
    let timed_out = s.timed_out;
    let mut result = match s.best {
        Some((atoms, bonds)) => McsResult::from_maps(atoms, bonds),
        None => match single_atom_match(g1, g2, rules) {
            Some(pair) => McsResult::from_maps(vec![pair], Vec::new()),
            None => McsResult::default(),
        },
    };
    result.timed_out = timed_out;
    result
}

/// `(matched atoms + matched bonds) / max(|V1|+|E1|, |V2|+|E2|)`.
pub fn consistency_index(g1: &MolGraph, g2: &MolGraph, cfg: &MatchConfig) -> f64 {
    if g1.is_empty() && g2.is_empty() {
        log::warn!("consistency index of two empty graphs is defined as 1");
        return 1.0;
    }
    let r = max_common_subgraph(g1, g2, cfg);
    index_from_result(&r, g1, g2)
}

/// The consistency index implied by an already computed MCS.
pub fn index_from_result(r: &McsResult, g1: &MolGraph, g2: &MolGraph) -> f64 {
    let denom = g1.size().max(g2.size());
    if denom == 0 {
        return 1.0;
    }
    (r.matched_atoms + r.matched_bonds) as f64 / denom as f64
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteForceError {
    #[error("brute-force MCS supports at most 8 atoms per graph (got {0} and {1})")]
    TooManyAtoms(usize, usize),
}

/// Exhaustive reference MCS: enumerates every connected bond subset of
/// `g1`, largest first, and tests each for an embedding into `g2` by
/// trying all injective atom assignments.
pub fn brute_force_mcs(
    g1: &MolGraph,
    g2: &MolGraph,
    cfg: &MatchConfig,
) -> Result<McsResult, BruteForceError> {
    if g1.atom_count() > 8 || g2.atom_count() > 8 {
        return Err(BruteForceError::TooManyAtoms(
            g1.atom_count(),
            g2.atom_count(),
        ));
    }
    let rules = cfg.rules();
    let e1 = g1.bond_count();
    let mut subsets: Vec<(usize, usize, u32)> = Vec::new();
    for mask in 1u32..(1u32 << e1) {
        let bonds: Vec<usize> = (0..e1).filter(|&b| mask >> b & 1 == 1).collect();
        let mut atoms: Vec<usize> = bonds
            .iter()
            .flat_map(|&b| [g1.bonds()[b].begin, g1.bonds()[b].end])
            .collect();
        atoms.sort_unstable();
        atoms.dedup();
        // connectivity by repeated absorption
        let mut reached = vec![atoms[0]];
        let mut changed = true;
        while changed {
            changed = false;
            for &b in &bonds {
                let bd = g1.bonds()[b];
                let (x, y) = (reached.contains(&bd.begin), reached.contains(&bd.end));
                if x != y {
                    reached.push(if x { bd.end } else { bd.begin });
                    changed = true;
                }
            }
        }
        if reached.len() == atoms.len() {
            subsets.push((bonds.len(), atoms.len(), mask));
        }
    }
    subsets.sort_by(|a, b| (b.0, b.1).cmp(&(a.0, a.1)).then(a.2.cmp(&b.2)));

    for (_, _, mask) in subsets {
        let bonds: Vec<usize> = (0..e1).filter(|&b| mask >> b & 1 == 1).collect();
        let mut atoms: Vec<usize> = bonds
            .iter()
            .flat_map(|&b| [g1.bonds()[b].begin, g1.bonds()[b].end])
            .collect();
        atoms.sort_unstable();
        atoms.dedup();
        let mut assign = vec![NONE; g1.atom_count()];
        let mut used = vec![false; g2.atom_count()];
        if let Some(bond_map) = embed(g1, g2, rules, &atoms, &bonds, 0, &mut assign, &mut used) {
            let atom_map = atoms.iter().map(|&a| (a, assign[a])).collect();
            return Ok(McsResult::from_maps(atom_map, bond_map));
        }
    }
    Ok(match single_atom_match(g1, g2, rules) {
        Some(pair) => McsResult::from_maps(vec![pair], Vec::new()),
        None => McsResult::default(),
    })
}

#[allow(clippy::too_many_arguments)]
fn embed(
    g1: &MolGraph,
    g2: &MolGraph,
    rules: MatchRules,
    atoms: &[usize],
    bonds: &[usize],
    depth: usize,
    assign: &mut [usize],
    used: &mut [bool],
) -> Option<Vec<(usize, usize)>> {
    if depth == atoms.len() {
        let mut out = Vec::with_capacity(bonds.len());
        for &b in bonds {
            let bd = g1.bonds()[b];
            let e2 = g2.bond_between(assign[bd.begin], assign[bd.end])?;
            let b2 = g2.bonds()[e2];
            if !rules.bonds_compatible(&bd, &b2, assign[bd.begin] == b2.begin) {
                return None;
            }
            out.push((b, e2));
        }
        return Some(out);
    }
    let a = atoms[depth];
    for v in 0..g2.atom_count() {
        if used[v] || !rules.atoms_compatible(g1.atom(a), g2.atom(v)) {
            continue;
        }
        assign[a] = v;
        used[v] = true;
        if let Some(r) = embed(g1, g2, rules, atoms, bonds, depth + 1, assign, used) {
            return Some(r);
        }
        used[v] = false;
        assign[a] = NONE;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::parse_smiles;

    fn smi(s: &str) -> MolGraph {
        parse_smiles(s).unwrap()
    }

    fn exact() -> MatchConfig {
        MatchConfig {
            bond_compat: BondCompat::ExactKind,
            ..Default::default()
        }
    }

    #[test]
    fn identity() {
        for s in ["CCO", "c1ccccc1", "CC(C)(C)c1ccc(O)cc1"] {
            let g = smi(s);
            let r = max_common_subgraph(&g, &g, &MatchConfig::default());
            assert_eq!(
                (r.matched_atoms, r.matched_bonds),
                (g.atom_count(), g.bond_count())
            );
            assert_eq!(consistency_index(&g, &g, &MatchConfig::default()), 1.0);
        }
    }

    #[test]
    fn benzene_vs_cyclohexane() {
        let b = smi("C1=CC=CC=C1");
        let c = smi("C1CCCCC1");
        let r = max_common_subgraph(&b, &c, &exact());
        assert_eq!((r.matched_atoms, r.matched_bonds), (2, 1));
        let oracle = brute_force_mcs(&b, &c, &exact()).unwrap();
        assert_eq!((oracle.matched_atoms, oracle.matched_bonds), (2, 1));
        assert!((consistency_index(&b, &c, &exact()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ethanol_vs_dimethyl_ether() {
        let a = smi("CCO");
        let b = smi("COC");
        let oracle = brute_force_mcs(&a, &b, &MatchConfig::default()).unwrap();
        let r = max_common_subgraph(&a, &b, &MatchConfig::default());
        assert_eq!(
            (r.matched_atoms, r.matched_bonds),
            (oracle.matched_atoms, oracle.matched_bonds)
        );
        assert_eq!((r.matched_atoms, r.matched_bonds), (2, 1));
    }

    #[test]
    fn disjoint_labels_give_zero() {
        let a = smi("CC");
        let b = smi("NN");
        let r = max_common_subgraph(&a, &b, &MatchConfig::default());
        assert_eq!((r.matched_atoms, r.matched_bonds), (0, 0));
        assert_eq!(consistency_index(&a, &b, &MatchConfig::default()), 0.0);
    }

    #[test]
    fn single_atoms_and_empty() {
        let c = smi("C");
        let oracle = brute_force_mcs(&c, &c, &MatchConfig::default()).unwrap();
        assert_eq!((oracle.matched_atoms, oracle.matched_bonds), (1, 0));
        let e = MolGraph::new();
        let r = brute_force_mcs(&e, &smi("CCO"), &MatchConfig::default()).unwrap();
        assert!(r.atom_mapping.is_empty() && r.bond_mapping.is_empty());
        assert_eq!(consistency_index(&e, &e, &MatchConfig::default()), 1.0);
        assert_eq!(consistency_index(&e, &c, &MatchConfig::default()), 0.0);
    }

    #[test]
    fn brute_force_size_limit() {
        let big = smi("CCCCCCCCC");
        assert_eq!(
            brute_force_mcs(&big, &big, &MatchConfig::default()),
            Err(BruteForceError::TooManyAtoms(9, 9))
        );
    }

    #[test]
    fn deleting_one_ring_bond_keeps_remainder() {
        let g = smi("c1ccccc1O");
        let ring_bond = g
            .bonds()
            .iter()
            .position(|b| {
                b.kind == crate::chemgraph::BondKind::Single
                    && g.atom(b.begin).element == g.atom(b.end).element
            })
            .unwrap();
        let cut = g.without_bond(ring_bond);
        assert!(cut.is_connected());
        let idx = consistency_index(&g, &cut, &MatchConfig::default());
        let n = g.size() as f64;
        assert!((idx - (n - 1.0) / n).abs() < 1e-12);
    }

    #[test]
    fn mappings_are_consistent() {
        let a = smi("CC(=O)Nc1ccc(O)cc1");
        let b = smi("CC(=O)Nc1ccc(OC)cc1Cl");
        let r = max_common_subgraph(&a, &b, &MatchConfig::default());
        let amap: std::collections::HashMap<usize, usize> =
            r.atom_mapping.iter().copied().collect();
        for &(b1, b2) in &r.bond_mapping {
            let x = a.bonds()[b1];
            let y = b.bonds()[b2];
            let (p, q) = (amap[&x.begin], amap[&x.end]);
            assert!((p, q) == (y.begin, y.end) || (q, p) == (y.begin, y.end));
        }
        assert_eq!(r.matched_bonds, a.bond_count());
    }

    #[test]
    fn deterministic() {
        let a = smi("c1ccc2ccccc2c1CCN");
        let b = smi("c1ccccc1CCNC");
        let r1 = max_common_subgraph(&a, &b, &MatchConfig::default());
        let r2 = max_common_subgraph(&a, &b, &MatchConfig::default());
        assert_eq!(r1, r2);
    }
}
