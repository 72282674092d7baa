//! Molecular graph model: elements, atoms, typed bonds, valence rules and
//! the text formats (MDL molfile V2000, a SMILES subset) used everywhere
//! else in the crate.

mod canon;
mod iso;
pub mod molfile;
pub mod rings;
pub mod smiles;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canon::{canonical_certificate, canonical_labels};
pub use iso::{find_isomorphism, is_isomorphic, MatchRules, Strictness};
pub use molfile::{
    parse_molfile, parse_sdf, write_molfile, write_molfile_titled, write_sdf, MolfileError,
    SdfRecord,
};
pub use smiles::{canonical_smiles, parse_smiles, write_smiles, SmilesError};

/// A 2D point in layout or image units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

/// Chemical element. The closed variants are exactly the element classes a
/// depiction detector can emit; `Other` only arises from super-group
/// expansion or from files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    C,
    N,
    O,
    S,
    P,
    B,
    F,
    Cl,
    Br,
    I,
    Si,
    H,
    Other(String),
}

impl Element {
    pub const DETECTABLE: [Element; 12] = [
        Element::Si,
        Element::N,
        Element::Br,
        Element::S,
        Element::I,
        Element::Cl,
        Element::H,
        Element::P,
        Element::O,
        Element::C,
        Element::B,
        Element::F,
    ];

    pub fn symbol(&self) -> &str {
        match self {
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::S => "S",
            Element::P => "P",
            Element::B => "B",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
            Element::Si => "Si",
            Element::H => "H",
            Element::Other(s) => s,
        }
    }

    /// Parses one of the twelve known symbols; anything else becomes `Other`.
    pub fn from_symbol(sym: &str) -> Element {
        Self::known(sym).unwrap_or_else(|| Element::Other(sym.to_string()))
    }

    pub fn known(sym: &str) -> Option<Element> {
        Some(match sym {
            "C" => Element::C,
            "N" => Element::N,
            "O" => Element::O,
            "S" => Element::S,
            "P" => Element::P,
            "B" => Element::B,
            "F" => Element::F,
            "Cl" => Element::Cl,
            "Br" => Element::Br,
            "I" => Element::I,
            "Si" => Element::Si,
            "H" => Element::H,
            _ => return None,
        })
    }

    /// Standard atomic weight in Daltons, `None` for unknown symbols.
    pub fn atomic_mass(&self) -> Option<f64> {
        Some(match self {
            Element::H => 1.008,
            Element::B => 10.81,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::Si => 28.085,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
            Element::Other(s) => return other_mass(s),
        })
    }

    /// Neutral default valence; 0 for unknown elements.
    pub fn base_valence(&self) -> u32 {
        match self {
            Element::C | Element::Si => 4,
            Element::N | Element::P | Element::B => 3,
            Element::O | Element::S => 2,
            Element::F | Element::Cl | Element::Br | Element::I | Element::H => 1,
            Element::Other(_) => 0,
        }
    }

    /// Highest valence commonly drawn for the element (hypervalent S and P).
    pub fn max_valence(&self) -> u32 {
        match self {
            Element::S => 6,
            Element::P => 5,
            e => e.base_valence(),
        }
    }

    fn is_pnictogen_or_chalcogen(&self) -> bool {
        matches!(self, Element::N | Element::P | Element::O | Element::S)
    }
}

fn other_mass(sym: &str) -> Option<f64> {
    Some(match sym {
        "Li" => 6.94,
        "Na" => 22.990,
        "K" => 39.098,
        "Mg" => 24.305,
        "Ca" => 40.078,
        "Al" => 26.982,
        "Se" => 78.971,
        "Zn" => 65.38,
        "Sn" => 118.71,
        "Ge" => 72.630,
        "As" => 74.922,
        _ => return None,
    })
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Element::from_symbol(&s))
    }
}

/// Default valence adjusted for formal charge.
///
/// N/O-family cations gain `q` (N+ is 4, O+ is 3); other cations and all
/// anions lose `|q|`.
pub fn default_valence(element: &Element, charge: i8) -> u32 {
    let base = element.base_valence() as i32;
    let q = charge as i32;
    let v = if q > 0 && element.is_pnictogen_or_chalcogen() {
        base + q
    } else {
        base - q.abs()
    };
    v.max(0) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub formal_charge: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_h: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Point>,
}

fn is_zero(v: &i8) -> bool {
    *v == 0
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Self {
            element,
            formal_charge: 0,
            explicit_h: None,
            position: None,
        }
    }

    pub fn with_charge(mut self, q: i8) -> Self {
        self.formal_charge = q;
        self
    }

    pub fn with_h(mut self, h: u8) -> Self {
        self.explicit_h = Some(h);
        self
    }

    pub fn at(mut self, p: Point) -> Self {
        self.position = Some(p);
        self
    }
}

/// The six bond classes a depiction can show. Wedge, hash and wavy bonds
/// are all single bonds with stereo decoration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondKind {
    Single,
    Double,
    Triple,
    WedgeUp,
    WedgeDown,
    Wavy,
}

impl BondKind {
    pub fn order(self) -> u32 {
        match self {
            BondKind::Double => 2,
            BondKind::Triple => 3,
            _ => 1,
        }
    }

    /// True for the kinds whose begin atom carries meaning.
    pub fn is_directional(self) -> bool {
        matches!(self, BondKind::WedgeUp | BondKind::WedgeDown)
    }

    pub fn is_stereo(self) -> bool {
        matches!(
            self,
            BondKind::WedgeUp | BondKind::WedgeDown | BondKind::Wavy
        )
    }
}

/// A bond between two atoms. For wedges `begin` is the narrow end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub kind: BondKind,
}

impl Bond {
    pub fn new(begin: usize, end: usize, kind: BondKind) -> Self {
        Self { begin, end, kind }
    }

    pub fn other(&self, a: usize) -> usize {
        if self.begin == a {
            self.end
        } else {
            self.begin
        }
    }

    pub fn touches(&self, a: usize) -> bool {
        self.begin == a || self.end == a
    }

    pub fn key(&self) -> (usize, usize) {
        (self.begin.min(self.end), self.begin.max(self.end))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("bond {0}-{1} is a self-bond")]
    SelfBond(usize, usize),
    #[error("bond {a}-{b} references an atom outside 0..{n}")]
    IndexOutOfRange { a: usize, b: usize, n: usize },
    #[error("atoms {0} and {1} are already bonded")]
    DuplicateBond(usize, usize),
    #[error("atom {atom}: formal charge {charge} outside -4..=4")]
    ChargeOutOfRange { atom: usize, charge: i8 },
    #[error("atom {atom}: explicit hydrogen count {h} exceeds 9")]
    HydrogenCountOutOfRange { atom: usize, h: u8 },
}

/// A labeled molecular graph. Construction goes through [`MolGraph::add_atom`]
/// and [`MolGraph::add_bond`], which enforce the structural invariants: no
/// self-bonds, no duplicate atom pairs, in-range indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl<'de> Deserialize<'de> for MolGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<Atom>,
            bonds: Vec<Bond>,
        }
        let raw = Raw::deserialize(d)?;
        MolGraph::from_parts(raw.atoms, raw.bonds).map_err(serde::de::Error::custom)
    }
}

impl MolGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let mut g = MolGraph {
            atoms: Vec::with_capacity(atoms.len()),
            bonds: Vec::with_capacity(bonds.len()),
        };
        for a in atoms {
            g.try_add_atom(a)?;
        }
        for b in bonds {
            g.add_bond(b.begin, b.end, b.kind)?;
        }
        Ok(g)
    }

    /// Adds an atom, clamping charge and hydrogen count into their legal
    /// ranges. Use [`MolGraph::try_add_atom`] to reject instead.
    pub fn add_atom(&mut self, mut atom: Atom) -> usize {
        atom.formal_charge = atom.formal_charge.clamp(-4, 4);
        atom.explicit_h = atom.explicit_h.map(|h| h.min(9));
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    pub fn try_add_atom(&mut self, atom: Atom) -> Result<usize, GraphError> {
        let idx = self.atoms.len();
        if !(-4..=4).contains(&atom.formal_charge) {
            return Err(GraphError::ChargeOutOfRange {
                atom: idx,
                charge: atom.formal_charge,
            });
        }
        if let Some(h) = atom.explicit_h.filter(|&h| h > 9) {
            return Err(GraphError::HydrogenCountOutOfRange { atom: idx, h });
        }
        self.atoms.push(atom);
        Ok(idx)
    }

    pub fn add_bond(
        &mut self,
        begin: usize,
        end: usize,
        kind: BondKind,
    ) -> Result<usize, GraphError> {
        let n = self.atoms.len();
        if begin >= n || end >= n {
            return Err(GraphError::IndexOutOfRange {
                a: begin,
                b: end,
                n,
            });
        }
        if begin == end {
            return Err(GraphError::SelfBond(begin, end));
        }
        if self.bond_between(begin, end).is_some() {
            return Err(GraphError::DuplicateBond(begin, end));
        }
        self.bonds.push(Bond::new(begin, end, kind));
        Ok(self.bonds.len() - 1)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    /// Replaces the kind of bond `i`; endpoints stay fixed.
    pub fn set_bond_kind(&mut self, i: usize, kind: BondKind) {
        self.bonds[i].kind = kind;
    }

    /// Swaps a bond's begin and end atoms.
    pub fn reverse_bond(&mut self, i: usize) {
        let b = &mut self.bonds[i];
        std::mem::swap(&mut b.begin, &mut b.end);
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `|V| + |E|`, the size measure used by the consistency index.
    pub fn size(&self) -> usize {
        self.atoms.len() + self.bonds.len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|bd| (bd.begin == a && bd.end == b) || (bd.begin == b && bd.end == a))
    }

    /// Per-atom list of `(neighbor, bond index)`, in bond order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (i, b) in self.bonds.iter().enumerate() {
            adj[b.begin].push((b.end, i));
            adj[b.end].push((b.begin, i));
        }
        adj
    }

    pub fn degree(&self, a: usize) -> usize {
        self.bonds.iter().filter(|b| b.touches(a)).count()
    }

    pub fn bond_order_sum(&self, a: usize) -> u32 {
        self.bonds
            .iter()
            .filter(|b| b.touches(a))
            .map(|b| b.kind.order())
            .sum()
    }

    pub fn implicit_hydrogen_count(&self, a: usize) -> u32 {
        implicit_hydrogen_count(&self.atoms[a], self.bond_order_sum(a))
    }

    pub fn total_charge(&self) -> i32 {
        self.atoms.iter().map(|a| a.formal_charge as i32).sum()
    }

    /// Connected components as sorted atom index lists, ordered by their
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for s in 0..self.atoms.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let a = comp[i];
                for &(n, _) in &adj[a] {
                    if !seen[n] {
                        seen[n] = true;
                        comp.push(n);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// A copy with atoms reordered so that new atom `k` is old atom `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> MolGraph {
        assert_eq!(order.len(), self.atoms.len(), "order must be a permutation");
        let mut inv = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        MolGraph {
            atoms: order.iter().map(|&o| self.atoms[o].clone()).collect(),
            bonds: self
                .bonds
                .iter()
                .map(|b| Bond::new(inv[b.begin], inv[b.end], b.kind))
                .collect(),
        }
    }

    /// A copy without the atoms in `remove` (and their bonds). Returns the
    /// old-to-new index map alongside.
    pub fn without_atoms(&self, remove: &[usize]) -> (MolGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if !remove.contains(&i) {
                map[i] = Some(atoms.len());
                atoms.push(a.clone());
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter_map(|b| Some(Bond::new(map[b.begin]?, map[b.end]?, b.kind)))
            .collect();
        (MolGraph { atoms, bonds }, map)
    }

    /// A copy without bond `i`.
    pub fn without_bond(&self, i: usize) -> MolGraph {
        let mut g = self.clone();
        g.bonds.remove(i);
        g
    }

    /// Drops all atom positions.
    pub fn strip_positions(&mut self) {
        for a in &mut self.atoms {
            a.position = None;
        }
    }

    /// Sum of atomic masses plus implicit hydrogens.
    ///
    /// Unknown element symbols contribute 0 and are logged as warnings; use
    /// [`MolGraph::mass_summary`] to inspect them.
    pub fn molecular_weight(&self) -> f64 {
        let summary = self.mass_summary();
        for sym in &summary.unknown_symbols {
            log::warn!("no atomic mass for element {sym:?}; counted as 0");
        }
        summary.daltons
    }

    pub fn mass_summary(&self) -> MassSummary {
        let h = Element::H.atomic_mass().unwrap_or_default();
        let mut daltons = 0.0;
        let mut unknown_symbols = Vec::new();
        for i in 0..self.atoms.len() {
            let atom = &self.atoms[i];
            match atom.element.atomic_mass() {
                Some(m) => daltons += m,
                None => unknown_symbols.push(atom.element.symbol().to_string()),
            }
            daltons += h * self.implicit_hydrogen_count(i) as f64;
        }
        MassSummary {
            daltons,
            unknown_symbols,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassSummary {
    pub daltons: f64,
    pub unknown_symbols: Vec<String>,
}

/// Hydrogens implied at an atom given the sum of its bond orders. An
/// explicit hydrogen count always wins.
pub fn implicit_hydrogen_count(atom: &Atom, bond_order_sum: u32) -> u32 {
    if let Some(h) = atom.explicit_h {
        return h as u32;
    }
    default_valence(&atom.element, atom.formal_charge).saturating_sub(bond_order_sum)
}

impl FromStr for MolGraph {
    type Err = SmilesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_smiles(s)
    }
}
