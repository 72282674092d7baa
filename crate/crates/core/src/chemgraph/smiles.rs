//! SMILES subset: organic-subset and bracket atoms (charge, H count),
//! `-` `=` `#` bonds, branches, ring closures (`0-9`, `%nn`), `.` and a `*`
//! dummy atom. Lowercase aromatic input is kekulized when every aromatic
//! ring is six-membered and rejected otherwise.

use std::collections::BTreeMap;

use thiserror::Error;

use super::rings::{ring_bond_mask, smallest_rings};
use super::{canonical_labels, default_valence, Atom, BondKind, Element, GraphError, MolGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected character {ch:?} at byte {offset}")]
    Unexpected { ch: char, offset: usize },
    #[error("unsupported token {token:?} at byte {offset}")]
    Unsupported { token: String, offset: usize },
    #[error("unbalanced parenthesis at byte {offset}")]
    Unbalanced { offset: usize },
    #[error("ring closure {label} opened at byte {offset} is never closed")]
    UnclosedRing { label: u32, offset: usize },
    #[error("bond at byte {offset} has no preceding atom")]
    DanglingBond { offset: usize },
    #[error("cannot kekulize: {0}")]
    Kekulization(String),
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
}

struct ParsedAtom {
    atom: Atom,
    aromatic: bool,
    bracket: bool,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<ParsedAtom>,
    // (a, b, explicit kind)
    bonds: Vec<(usize, usize, Option<BondKind>, usize)>,
}

fn organic(sym: &str) -> Option<(Element, bool)> {
    Some(match sym {
        "B" => (Element::B, false),
        "C" => (Element::C, false),
        "N" => (Element::N, false),
        "O" => (Element::O, false),
        "P" => (Element::P, false),
        "S" => (Element::S, false),
        "F" => (Element::F, false),
        "Cl" => (Element::Cl, false),
        "Br" => (Element::Br, false),
        "I" => (Element::I, false),
        "b" => (Element::B, true),
        "c" => (Element::C, true),
        "n" => (Element::N, true),
        "o" => (Element::O, true),
        "p" => (Element::P, true),
        "s" => (Element::S, true),
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> SmilesError {
        let rest = std::str::from_utf8(&self.src[self.pos..]).unwrap_or("");
        let ch = rest.chars().next().unwrap_or('\0');
        match ch {
            '@' | '/' | '\\' | ':' | '$' | '~' | '>' => SmilesError::Unsupported {
                token: ch.to_string(),
                offset: self.pos,
            },
            _ => SmilesError::Unexpected {
                ch,
                offset: self.pos,
            },
        }
    }

    fn parse_bracket(&mut self) -> Result<ParsedAtom, SmilesError> {
        let start = self.pos;
        self.pos += 1; // '['
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(SmilesError::Unsupported {
                token: "isotope".into(),
                offset: self.pos,
            });
        }
        let (element, aromatic) = match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                (Element::Other("*".into()), false)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let mut end = self.pos + 1;
                if self.src.get(end).is_some_and(|c| c.is_ascii_lowercase()) {
                    end += 1;
                }
                let sym = std::str::from_utf8(&self.src[self.pos..end]).expect("ascii");
                self.pos = end;
                (Element::from_symbol(sym), false)
            }
            Some(c) if c.is_ascii_lowercase() => {
                let sym = (c as char).to_string();
                match organic(&sym) {
                    Some((e, true)) => {
                        self.pos += 1;
                        (e, true)
                    }
                    _ => return Err(self.unexpected()),
                }
            }
            _ => return Err(self.unexpected()),
        };
        let mut h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            h = 1;
            if let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                h = d - b'0';
                self.pos += 1;
            }
        }
        let mut charge: i32 = 0;
        while let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let s = if sign == b'+' { 1 } else { -1 };
            if let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                charge += s * (d - b'0') as i32;
                self.pos += 1;
            } else {
                charge += s;
            }
        }
        if self.peek() != Some(b']') {
            if self.peek().is_none() {
                return Err(SmilesError::Unbalanced { offset: start });
            }
            return Err(self.unexpected());
        }
        self.pos += 1;
        if !(-4..=4).contains(&charge) {
            return Err(SmilesError::Unsupported {
                token: format!("charge {charge}"),
                offset: start,
            });
        }
        Ok(ParsedAtom {
            atom: Atom::new(element).with_charge(charge as i8).with_h(h),
            aromatic,
            bracket: true,
        })
    }

    fn parse(
        mut self,
    ) -> Result<
        (
            Vec<ParsedAtom>,
            Vec<(usize, usize, Option<BondKind>, usize)>,
        ),
        SmilesError,
    > {
        let mut prev: Option<usize> = None;
        let mut stack: Vec<(Option<usize>, usize)> = Vec::new();
        let mut pending: Option<(BondKind, usize)> = None;
        let mut rings: BTreeMap<u32, (usize, Option<BondKind>, usize)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let offset = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(SmilesError::Unbalanced { offset });
                    }
                    stack.push((prev, offset));
                    self.pos += 1;
                }
                b')' => {
                    let (p, _) = stack.pop().ok_or(SmilesError::Unbalanced { offset })?;
                    if pending.is_some() {
                        return Err(SmilesError::DanglingBond { offset });
                    }
                    prev = p;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(SmilesError::DanglingBond { offset });
                    }
                    let k = match c {
                        b'-' => BondKind::Single,
                        b'=' => BondKind::Double,
                        _ => BondKind::Triple,
                    };
                    pending = Some((k, offset));
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(SmilesError::DanglingBond { offset });
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(cur) = prev else {
                        return Err(SmilesError::Unexpected {
                            ch: c as char,
                            offset,
                        });
                    };
                    let label = if c == b'%' {
                        let digits = self.src.get(self.pos + 1..self.pos + 3);
                        match digits {
                            Some(d) if d.iter().all(u8::is_ascii_digit) => {
                                self.pos += 3;
                                ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32
                            }
                            _ => return Err(SmilesError::Unexpected { ch: '%', offset }),
                        }
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let bond_here = pending.take().map(|(k, _)| k);
                    match rings.remove(&label) {
                        Some((other, bond_there, _)) => {
                            let kind = match (bond_here, bond_there) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(SmilesError::Unsupported {
                                        token: "conflicting ring-closure bonds".into(),
                                        offset,
                                    })
                                }
                                (a, b) => a.or(b),
                            };
                            self.bonds.push((other, cur, kind, offset));
                        }
                        None => {
                            rings.insert(label, (cur, bond_here, offset));
                        }
                    }
                }
                b'[' => {
                    let atom = self.parse_bracket()?;
                    prev = Some(self.push_atom(atom, prev, &mut pending, offset));
                }
                b'*' => {
                    self.pos += 1;
                    let atom = ParsedAtom {
                        atom: Atom::new(Element::Other("*".into())),
                        aromatic: false,
                        bracket: false,
                    };
                    prev = Some(self.push_atom(atom, prev, &mut pending, offset));
                }
                _ => {
                    let two = self
                        .src
                        .get(self.pos..self.pos + 2)
                        .and_then(|s| std::str::from_utf8(s).ok());
                    let one = std::str::from_utf8(&self.src[self.pos..self.pos + 1]).ok();
                    let (sym_len, found) = match two.and_then(organic) {
                        Some(f) if matches!(two, Some("Cl" | "Br")) => (2, Some(f)),
                        _ => (1, one.and_then(organic)),
                    };
                    let Some((element, aromatic)) = found else {
                        return Err(self.unexpected());
                    };
                    self.pos += sym_len;
                    let atom = ParsedAtom {
                        atom: Atom::new(element),
                        aromatic,
                        bracket: false,
                    };
                    prev = Some(self.push_atom(atom, prev, &mut pending, offset));
                }
            }
        }
        if let Some((offset,)) = pending.map(|(_, o)| (o,)) {
            return Err(SmilesError::DanglingBond { offset });
        }
        if let Some((_, offset)) = stack.pop() {
            return Err(SmilesError::Unbalanced { offset });
        }
        if let Some((&label, &(_, _, offset))) = rings.iter().next() {
            return Err(SmilesError::UnclosedRing { label, offset });
        }
        Ok((self.atoms, self.bonds))
    }

    fn push_atom(
        &mut self,
        atom: ParsedAtom,
        prev: Option<usize>,
        pending: &mut Option<(BondKind, usize)>,
        offset: usize,
    ) -> usize {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(p) = prev {
            let kind = pending.take().map(|(k, _)| k);
            self.bonds.push((p, idx, kind, offset));
        }
        idx
    }
}

/// Parses the supported SMILES subset into a Kekulé graph.
pub fn parse_smiles(text: &str) -> Result<MolGraph, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    let (atoms, bonds) = parser.parse()?;

    let mut g = MolGraph::new();
    for a in &atoms {
        let mut atom = a.atom.clone();
        if !a.bracket {
            atom.explicit_h = None;
        }
        g.try_add_atom(atom)?;
    }
    let mut aromatic_bond = Vec::new();
    for &(a, b, kind, _) in &bonds {
        let arom = kind.is_none() && atoms[a].aromatic && atoms[b].aromatic;
        g.add_bond(a, b, kind.unwrap_or(BondKind::Single))?;
        aromatic_bond.push(arom);
    }
    if atoms.iter().any(|a| a.aromatic) {
        let aromatic_atom: Vec<bool> = atoms.iter().map(|a| a.aromatic).collect();
        let fixed_h: Vec<Option<u8>> = atoms
            .iter()
            .map(|a| if a.bracket { a.atom.explicit_h } else { None })
            .collect();
        kekulize(&mut g, &aromatic_atom, &aromatic_bond, &fixed_h)
            .map_err(SmilesError::Kekulization)?;
    }
    Ok(g)
}

/// Assigns alternating single/double bonds to aromatic bonds. Aromatic
/// bonds outside rings become single; every aromatic ring must be
/// six-membered. `fixed_h` holds hydrogen counts written explicitly.
pub(crate) fn kekulize(
    g: &mut MolGraph,
    aromatic_atom: &[bool],
    aromatic_bond: &[bool],
    fixed_h: &[Option<u8>],
) -> Result<(), String> {
    // aromatic bonds outside rings (e.g. the biaryl link) are plain single
    let ring_mask = ring_bond_mask(g);
    let candidate: Vec<bool> = (0..g.bond_count())
        .map(|i| aromatic_bond[i] && ring_mask[i])
        .collect();
    let rings = smallest_rings(g, Some(&candidate));
    if let Some(r) = rings.iter().find(|r| r.len() != 6) {
        return Err(format!(
            "aromatic ring of size {} (only six-membered rings are supported)",
            r.len()
        ));
    }
    let on_ring: Vec<bool> = {
        let mut m = vec![false; g.bond_count()];
        for r in &rings {
            for &b in &r.bonds {
                m[b] = true;
            }
        }
        m
    };
    for (i, &arom) in aromatic_atom.iter().enumerate() {
        if arom
            && !g
                .bonds()
                .iter()
                .enumerate()
                .any(|(b, bd)| on_ring[b] && bd.touches(i))
        {
            return Err(format!(
                "aromatic atom {i} is not in a six-membered aromatic ring"
            ));
        }
    }

    let n = g.atom_count();
    let mut needs = vec![false; n];
    for i in 0..n {
        if !aromatic_atom[i] {
            continue;
        }
        let atom = g.atom(i);
        let used: u32 = g.bond_order_sum(i) + fixed_h[i].unwrap_or(0) as u32;
        let target = default_valence(&atom.element, atom.formal_charge);
        needs[i] = target > used;
    }
    let adj: Vec<Vec<(usize, usize)>> = {
        let mut adj = vec![Vec::new(); n];
        for (b, bd) in g.bonds().iter().enumerate() {
            if on_ring[b] && needs[bd.begin] && needs[bd.end] {
                adj[bd.begin].push((bd.end, b));
                adj[bd.end].push((bd.begin, b));
            }
        }
        adj
    };
    let mut mate = vec![usize::MAX; n];
    let mut chosen = Vec::new();
    fn solve(
        needs: &[bool],
        adj: &[Vec<(usize, usize)>],
        mate: &mut [usize],
        chosen: &mut Vec<usize>,
        budget: &mut u32,
    ) -> bool {
        let Some(a) = (0..needs.len()).find(|&i| needs[i] && mate[i] == usize::MAX) else {
            return true;
        };
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        for &(b, bond) in &adj[a] {
            if mate[b] != usize::MAX {
                continue;
            }
            mate[a] = b;
            mate[b] = a;
            chosen.push(bond);
            if solve(needs, adj, mate, chosen, budget) {
                return true;
            }
            chosen.pop();
            mate[a] = usize::MAX;
            mate[b] = usize::MAX;
        }
        false
    }
    let mut budget = 100_000;
    if !solve(&needs, &adj, &mut mate, &mut chosen, &mut budget) {
        return Err("no alternating single/double assignment exists".into());
    }
    for b in chosen {
        g.set_bond_kind(b, BondKind::Double);
    }
    Ok(())
}

/// Hydrogen count a standard SMILES reader assigns to an organic-subset atom.
fn organic_subset_h(element: &Element, bond_sum: u32) -> Option<u32> {
    let valences: &[u32] = match element {
        Element::B => &[3],
        Element::C => &[4],
        Element::N | Element::P => &[3, 5],
        Element::O => &[2],
        Element::S => &[2, 4, 6],
        Element::F | Element::Cl | Element::Br | Element::I => &[1],
        _ => return None,
    };
    Some(
        valences
            .iter()
            .find(|&&v| v >= bond_sum)
            .map_or(0, |v| v - bond_sum),
    )
}

fn atom_token(g: &MolGraph, i: usize) -> String {
    let atom = g.atom(i);
    let sym = atom.element.symbol();
    if sym == "*" {
        return "*".into();
    }
    let h = g.implicit_hydrogen_count(i);
    let bond_sum = g.bond_order_sum(i);
    let own_h = default_valence(&atom.element, 0).saturating_sub(bond_sum);
    if atom.formal_charge == 0 && h == own_h && organic_subset_h(&atom.element, bond_sum) == Some(h)
    {
        return sym.to_string();
    }
    let mut s = format!("[{sym}");
    match h {
        0 => {}
        1 => s.push('H'),
        k => s.push_str(&format!("H{k}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}

fn bond_token(kind: BondKind) -> &'static str {
    match kind {
        BondKind::Double => "=",
        BondKind::Triple => "#",
        _ => "",
    }
}

/// Writes Kekulé SMILES over the canonical atom order, so isomorphic graphs
/// (same elements, charges, hydrogen counts and bond kinds) produce the same
/// string. Wedge, hash and wavy bonds are written as plain single bonds.
pub fn write_smiles(g: &MolGraph) -> String {
    if g.is_empty() {
        return String::new();
    }
    let order = canonical_labels(g);
    let cg = g.permuted(&order);
    let n = cg.atom_count();
    let mut adj = cg.adjacency();
    for l in &mut adj {
        l.sort_unstable();
    }

    // first pass: DFS tree and ring-closure bonds
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut tree_bond = vec![false; cg.bond_count()];
    let mut dfs_order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    fn dfs(
        a: usize,
        adj: &[Vec<(usize, usize)>],
        visited: &mut [bool],
        children: &mut [Vec<(usize, usize)>],
        tree_bond: &mut [bool],
        dfs_order: &mut Vec<usize>,
    ) {
        visited[a] = true;
        dfs_order.push(a);
        for &(nb, b) in &adj[a] {
            if !visited[nb] {
                tree_bond[b] = true;
                children[a].push((nb, b));
                dfs(nb, adj, visited, children, tree_bond, dfs_order);
            }
        }
    }
    for s in 0..n {
        if !visited[s] {
            roots.push(s);
            dfs(
                s,
                &adj,
                &mut visited,
                &mut children,
                &mut tree_bond,
                &mut dfs_order,
            );
        }
    }
    let mut rank = vec![0usize; n];
    for (k, &a) in dfs_order.iter().enumerate() {
        rank[a] = k;
    }
    // ring bonds per atom, ordered by the partner's DFS rank
    let mut ring_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (b, bd) in cg.bonds().iter().enumerate() {
        if !tree_bond[b] {
            ring_at[bd.begin].push((bd.end, b));
            ring_at[bd.end].push((bd.begin, b));
        }
    }
    for l in &mut ring_at {
        l.sort_by_key(|&(p, _)| rank[p]);
    }

    let mut out = String::new();
    let mut digit_of: BTreeMap<usize, u32> = BTreeMap::new();
    let mut free: Vec<bool> = vec![true; 100];
    fn emit(
        a: usize,
        cg: &MolGraph,
        children: &[Vec<(usize, usize)>],
        ring_at: &[Vec<(usize, usize)>],
        rank: &[usize],
        digit_of: &mut BTreeMap<usize, u32>,
        free: &mut [bool],
        out: &mut String,
    ) {
        out.push_str(&atom_token(cg, a));
        for &(partner, b) in &ring_at[a] {
            let kind = cg.bonds()[b].kind;
            if rank[partner] < rank[a] {
                let d = digit_of.remove(&b).expect("ring opened before closing");
                free[d as usize] = true;
                out.push_str(bond_token(kind));
                push_ring_label(out, d);
            } else {
                let d = (1..100)
                    .find(|&d| free[d])
                    .expect("fewer than 99 open rings") as u32;
                free[d as usize] = false;
                digit_of.insert(b, d);
                out.push_str(bond_token(kind));
                push_ring_label(out, d);
            }
        }
        let kids = &children[a];
        for (k, &(c, b)) in kids.iter().enumerate() {
            let last = k + 1 == kids.len();
            if !last {
                out.push('(');
            }
            out.push_str(bond_token(cg.bonds()[b].kind));
            emit(c, cg, children, ring_at, rank, digit_of, free, out);
            if !last {
                out.push(')');
            }
        }
    }
    for (k, &r) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        emit(
            r,
            &cg,
            &children,
            &ring_at,
            &rank,
            &mut digit_of,
            &mut free,
            &mut out,
        );
    }
    out
}

fn push_ring_label(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

/// Alias of [`write_smiles`]; the writer is always canonical.
pub fn canonical_smiles(g: &MolGraph) -> String {
    write_smiles(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{is_isomorphic, Strictness};

    fn iso(a: &MolGraph, b: &MolGraph) -> bool {
        is_isomorphic(a, b, Strictness::OrderOnly)
    }

    #[test]
    fn methane() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.implicit_hydrogen_count(0), 4);
    }

    #[test]
    fn ethanol_symmetry() {
        assert!(iso(
            &parse_smiles("CCO").unwrap(),
            &parse_smiles("OCC").unwrap()
        ));
        assert_eq!(
            write_smiles(&parse_smiles("CCO").unwrap()),
            write_smiles(&parse_smiles("OCC").unwrap())
        );
    }

    #[test]
    fn benzene_kekulized() {
        let a = parse_smiles("c1ccccc1").unwrap();
        let b = parse_smiles("C1=CC=CC=C1").unwrap();
        assert!(iso(&a, &b));
        let doubles = a
            .bonds()
            .iter()
            .filter(|b| b.kind == BondKind::Double)
            .count();
        assert_eq!(doubles, 3);
    }

    #[test]
    fn heteroaromatics() {
        let pyridine = parse_smiles("c1ccncc1").unwrap();
        assert!(iso(&pyridine, &parse_smiles("C1=CC=NC=C1").unwrap()));
        let naph = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(
            naph.bonds()
                .iter()
                .filter(|b| b.kind == BondKind::Double)
                .count(),
            5
        );
        let pyridone = parse_smiles("O=c1cccc[nH]1").unwrap();
        assert!(iso(&pyridone, &parse_smiles("O=C1C=CC=CN1").unwrap()));
        let biphenyl = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        assert_eq!(
            biphenyl
                .bonds()
                .iter()
                .filter(|b| b.kind == BondKind::Double)
                .count(),
            6
        );
    }

    #[test]
    fn five_ring_aromatic_rejected() {
        assert!(matches!(
            parse_smiles("c1cc[nH]c1"),
            Err(SmilesError::Kekulization(_))
        ));
        assert!(matches!(
            parse_smiles("c1ccc1"),
            Err(SmilesError::Kekulization(_))
        ));
    }

    #[test]
    fn brackets_and_charges() {
        let g = parse_smiles("C[N+](C)(C)C.[O-]C(=O)C").unwrap();
        assert_eq!(g.atom(1).formal_charge, 1);
        assert_eq!(g.total_charge(), 0);
        let nh2 = parse_smiles("[NH2]C").unwrap();
        assert_eq!(nh2.atom(0).explicit_h, Some(2));
        let s = write_smiles(&parse_smiles("[Si](C)(C)(C)C").unwrap());
        assert!(s.contains("[Si]"), "{s}");
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_smiles("CC@C"),
            Err(SmilesError::Unsupported {
                token: "@".into(),
                offset: 2
            })
        );
        assert_eq!(
            parse_smiles("C1CC"),
            Err(SmilesError::UnclosedRing {
                label: 1,
                offset: 1
            })
        );
        assert!(matches!(
            parse_smiles("C(C"),
            Err(SmilesError::Unbalanced { .. })
        ));
        assert!(matches!(
            parse_smiles("CXC"),
            Err(SmilesError::Unexpected { ch: 'X', offset: 1 })
        ));
        assert!(matches!(
            parse_smiles("C=.C"),
            Err(SmilesError::DanglingBond { .. })
        ));
        assert_eq!(parse_smiles("  "), Err(SmilesError::Empty));
    }

    #[test]
    fn ring_closures_and_percent_labels() {
        let a = parse_smiles("C%12CCCCC%12").unwrap();
        assert!(iso(&a, &parse_smiles("C1CCCCC1").unwrap()));
        let b = parse_smiles("C=1CCCCC=1").unwrap();
        assert_eq!(
            b.bonds()
                .iter()
                .filter(|b| b.kind == BondKind::Double)
                .count(),
            1
        );
    }

    #[test]
    fn writer_round_trips() {
        for s in [
            "CC(=O)Oc1ccccc1C(=O)O",
            "C#N",
            "C1CC2CCC1C2",
            "OC[C@H]1OC(O)C(O)C1O".replace('@', "").as_str(),
            "C[N+](=O)[O-]",
            "c1ccc2ccccc2c1",
            "CC.O",
            "[H]C([H])([H])[H]",
            "FC(F)(F)S(=O)(=O)N",
        ] {
            let g = parse_smiles(s).unwrap();
            let w = write_smiles(&g);
            let back = parse_smiles(&w).unwrap_or_else(|e| panic!("{s} -> {w}: {e}"));
            assert!(iso(&g, &back), "{s} -> {w}");
            assert_eq!(write_smiles(&back), w, "writer not idempotent for {s}");
        }
    }

    #[test]
    fn star_dummy_atoms() {
        let g = parse_smiles("*OC").unwrap();
        assert_eq!(g.atom(0).element, Element::Other("*".into()));
        assert_eq!(write_smiles(&g).matches('*').count(), 1);
    }
}
