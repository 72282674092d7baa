//! Atom-label grammar, label tokenization and the linear-formula reading.

use super::table::FragmentTable;
use crate::chemgraph::{Atom, BondKind, Element, MolGraph};

/// Elements accepted in labels beyond the detectable set.
const EXTRA_LABEL_ELEMENTS: [&str; 11] = [
    "Li", "Na", "K", "Mg", "Ca", "Al", "Se", "Zn", "Sn", "Ge", "As",
];

pub(crate) fn label_element(sym: &str) -> Option<Element> {
    Element::known(sym).or_else(|| {
        EXTRA_LABEL_ELEMENTS
            .contains(&sym)
            .then(|| Element::Other(sym.to_string()))
    })
}

/// Maps OCR-style variants (unicode minus, superscript signs, subscript
/// digits) onto plain ASCII and trims whitespace.
pub(crate) fn normalize(text: &str) -> String {
    text.trim()
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '\u{2212}' | '\u{2013}' | '\u{207b}' => '-',
            '\u{207a}' => '+',
            '\u{2080}'..='\u{2089}' => char::from(b'0' + (c as u32 - 0x2080) as u8),
            c => c,
        })
        .collect()
}

/// Candidate `(body, charge)` splits, most specific reading first.
fn charge_splits(s: &str) -> Vec<(&str, i8)> {
    let mut out = Vec::new();
    for (suffix, q) in [("+2", 2), ("-2", -2)] {
        if let Some(b) = s.strip_suffix(suffix) {
            out.push((b, q));
        }
    }
    for (suffix, q) in [("+", 1), ("-", -1)] {
        if let Some(b) = s.strip_suffix(suffix) {
            out.push((b, q));
        }
    }
    for (suffix, q) in [("2+", 2), ("2-", -2)] {
        if let Some(b) = s.strip_suffix(suffix) {
            out.push((b, q));
        }
    }
    out.push((s, 0));
    out
}

/// `ELEMENT ('H' COUNT?)? CHARGE?`
pub(crate) fn atom_label(s: &str) -> Option<(Element, i8, Option<u8>)> {
    for (body, q) in charge_splits(s) {
        if let Some((el, h)) = element_with_h(body) {
            let cap = el.max_valence() + q.unsigned_abs() as u32;
            if matches!(el, Element::Other(_)) || h.is_none_or(|h| h as u32 <= cap) {
                return Some((el, q, h));
            }
        }
    }
    None
}

fn element_with_h(body: &str) -> Option<(Element, Option<u8>)> {
    for len in [2, 1] {
        if body.len() < len || !body.is_char_boundary(len) {
            continue;
        }
        let (sym, rest) = body.split_at(len);
        let Some(el) = label_element(sym) else {
            continue;
        };
        if rest.is_empty() {
            return Some((el, None));
        }
        let Some(digits) = rest.strip_prefix('H') else {
            continue;
        };
        if el == Element::H {
            continue;
        }
        if digits.is_empty() {
            return Some((el, Some(1)));
        }
        if digits.len() == 1 && digits.as_bytes()[0].is_ascii_digit() {
            return Some((el, Some(digits.as_bytes()[0] - b'0')));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Unit {
    Sym {
        sym: String,
        count: u32,
        digits: bool,
    },
    Group {
        units: Vec<Unit>,
        count: u32,
        digits: bool,
    },
}

impl Unit {
    fn text(&self) -> String {
        match self {
            Unit::Sym { sym, count, digits } => {
                if *digits {
                    format!("{sym}{count}")
                } else {
                    sym.clone()
                }
            }
            Unit::Group {
                units,
                count,
                digits,
            } => {
                let inner: String = units.iter().map(Unit::text).collect();
                if *digits {
                    format!("({inner}){count}")
                } else {
                    format!("({inner})")
                }
            }
        }
    }
}

/// A label split into units plus a trailing charge.
#[derive(Debug, Clone)]
pub(crate) struct Tokens {
    pub units: Vec<Unit>,
    pub charge: i8,
    pub charge_text: String,
}

impl Tokens {
    /// The same units read right to left, charge kept at the end.
    pub fn mirrored(&self) -> String {
        let mut s: String = self.units.iter().rev().map(Unit::text).collect();
        s.push_str(&self.charge_text);
        s
    }
}

struct Vocab {
    elements: Vec<String>,
    abbreviations: Vec<String>,
}

impl Vocab {
    fn new(table: &FragmentTable) -> Self {
        let mut elements: Vec<String> = Element::DETECTABLE
            .iter()
            .map(|e| e.symbol().to_string())
            .chain(EXTRA_LABEL_ELEMENTS.iter().map(|s| s.to_string()))
            .collect();
        elements.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let mut abbreviations: Vec<String> = table.names().map(str::to_string).collect();
        abbreviations.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        Vocab {
            elements,
            abbreviations,
        }
    }

    fn candidates<'a>(&'a self, rest: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.elements
            .iter()
            .chain(self.abbreviations.iter())
            .map(String::as_str)
            .filter(move |c| rest.starts_with(c))
    }
}

fn read_count(s: &str) -> (u32, bool, usize) {
    let n = s.bytes().take_while(u8::is_ascii_digit).count().min(2);
    if n == 0 {
        (1, false, 0)
    } else {
        (s[..n].parse().unwrap_or(1), true, n)
    }
}

/// Tokenizes `s[pos..]` up to the end or a closing parenthesis, trying
/// element symbols before abbreviations and backtracking on dead ends.
fn tok(
    s: &str,
    pos: usize,
    vocab: &Vocab,
    depth: usize,
    budget: &mut u32,
) -> Option<(Vec<Unit>, usize)> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let rest = &s[pos..];
    if rest.is_empty() {
        return (depth == 0).then(|| (Vec::new(), pos));
    }
    if rest.starts_with(')') {
        return (depth > 0).then(|| (Vec::new(), pos));
    }
    if rest.starts_with('(') {
        let (inner, end) = tok(s, pos + 1, vocab, depth + 1, budget)?;
        if inner.is_empty() || !s[end..].starts_with(')') {
            return None;
        }
        let (count, digits, n) = read_count(&s[end + 1..]);
        let next = end + 1 + n;
        let (mut tail, fin) = tok(s, next, vocab, depth, budget)?;
        tail.insert(
            0,
            Unit::Group {
                units: inner,
                count,
                digits,
            },
        );
        return Some((tail, fin));
    }
    let cands: Vec<&str> = vocab.candidates(rest).collect();
    for c in cands {
        let (count, digits, n) = read_count(&rest[c.len()..]);
        if count == 0 {
            continue;
        }
        let next = pos + c.len() + n;
        if let Some((mut tail, fin)) = tok(s, next, vocab, depth, budget) {
            tail.insert(
                0,
                Unit::Sym {
                    sym: c.to_string(),
                    count,
                    digits,
                },
            );
            return Some((tail, fin));
        }
    }
    None
}

pub(crate) fn tokenize(s: &str, table: &FragmentTable) -> Option<Tokens> {
    let vocab = Vocab::new(table);
    let (body, charge, charge_text) = if let Some(b) = s.strip_suffix("+2") {
        (b, 2, "+2")
    } else if let Some(b) = s.strip_suffix("-2") {
        (b, -2, "-2")
    } else if let Some(b) = s.strip_suffix('+') {
        (b, 1, "+")
    } else if let Some(b) = s.strip_suffix('-') {
        (b, -1, "-")
    } else {
        (s, 0, "")
    };
    let mut budget = 20_000;
    let (units, _) = tok(body, 0, &vocab, 0, &mut budget)?;
    if units.is_empty() {
        return None;
    }
    Some(Tokens {
        units,
        charge,
        charge_text: charge_text.to_string(),
    })
}

fn is_terminal_element(sym: &str) -> bool {
    matches!(sym, "F" | "Cl" | "Br" | "I")
}

struct Builder<'t> {
    table: &'t FragmentTable,
    g: MolGraph,
    backbone: Vec<usize>,
    prev: Option<usize>,
    prev_single: bool,
    pending_h: Option<u32>,
    pending_terminals: Vec<(MolGraph, usize, u32)>,
    leading: bool,
}

impl<'t> Builder<'t> {
    fn attach_copies(&mut self, frag: &MolGraph, att: usize, count: u32, to: usize) {
        for _ in 0..count {
            let base = self.g.atom_count();
            for a in frag.atoms() {
                self.g.add_atom(a.clone());
            }
            for b in frag.bonds() {
                self.g
                    .add_bond(base + b.begin, base + b.end, b.kind)
                    .expect("fresh atoms");
            }
            self.g
                .add_bond(to, base + att, BondKind::Single)
                .expect("fresh atom");
        }
    }

    fn terminal(&self, sym: &str) -> Option<(MolGraph, usize)> {
        if is_terminal_element(sym) {
            let mut g = MolGraph::new();
            g.add_atom(Atom::new(Element::known(sym)?));
            return Some((g, 0));
        }
        let e = self.table.get(sym)?;
        (e.attachments.len() == 1).then(|| (e.fragment.clone(), e.attachments[0]))
    }

    fn unit(&mut self, u: &Unit) -> Option<()> {
        match u {
            Unit::Sym { sym, count, .. } if sym == "H" => match self.prev {
                Some(p) => {
                    if self.prev_single {
                        self.g.atom_mut(p).explicit_h = Some((*count).min(9) as u8);
                    }
                }
                None => {
                    if self.pending_h.is_some() {
                        return None;
                    }
                    self.pending_h = Some(*count);
                    self.leading = true;
                }
            },
            Unit::Sym { sym, count, .. }
                if label_element(sym).is_none() || is_terminal_element(sym) =>
            {
                let (frag, att) = self.terminal(sym)?;
                match self.prev {
                    Some(p) => self.attach_copies(&frag, att, *count, p),
                    None => {
                        self.pending_terminals.push((frag, att, *count));
                        self.leading = true;
                    }
                }
            }
            Unit::Sym { sym, count, .. } if sym == "O" && *count >= 2 && self.prev.is_some() => {
                let p = self.prev?;
                for _ in 0..*count {
                    let o = self.g.add_atom(Atom::new(Element::O));
                    self.g.add_bond(p, o, BondKind::Double).expect("fresh atom");
                }
            }
            Unit::Sym { sym, count, .. } => {
                let el = label_element(sym)?;
                for _ in 0..*count {
                    let a = self.g.add_atom(Atom::new(el.clone()));
                    if let Some(p) = self.prev {
                        self.g.add_bond(p, a, BondKind::Single).expect("fresh atom");
                    }
                    if self.backbone.is_empty() {
                        if let Some(h) = self.pending_h.take() {
                            self.g.atom_mut(a).explicit_h = Some(h.min(9) as u8);
                        }
                        for (frag, att, n) in std::mem::take(&mut self.pending_terminals) {
                            self.attach_copies(&frag, att, n, a);
                        }
                    }
                    self.backbone.push(a);
                    self.prev = Some(a);
                }
                self.prev_single = *count == 1;
            }
            Unit::Group { units, count, .. } => {
                let p = self.prev?;
                let (frag, att) = build_linear(units, self.table, false)?;
                self.attach_copies(&frag, att, *count, p);
            }
        }
        Some(())
    }
}

/// Reads units as a chain bonded left to right. The attachment is the
/// first backbone atom, or the last one when the label opens with
/// hydrogens or terminal groups (a label drawn left of its bond).
pub(crate) fn build_linear(
    units: &[Unit],
    table: &FragmentTable,
    allow_leading: bool,
) -> Option<(MolGraph, usize)> {
    let mut b = Builder {
        table,
        g: MolGraph::new(),
        backbone: Vec::new(),
        prev: None,
        prev_single: false,
        pending_h: None,
        pending_terminals: Vec::new(),
        leading: false,
    };
    for u in units {
        b.unit(u)?;
    }
    if b.backbone.is_empty() || b.pending_h.is_some() || !b.pending_terminals.is_empty() {
        return None;
    }
    if b.leading && !allow_leading {
        return None;
    }
    let att = if b.leading {
        *b.backbone.last()?
    } else {
        b.backbone[0]
    };
    Some((b.g, att))
}

/// Rejects readings that overfill a known element's valence.
pub(crate) fn valence_ok(g: &MolGraph, attachment: usize) -> bool {
    (0..g.atom_count()).all(|a| {
        let atom = g.atom(a);
        if matches!(atom.element, Element::Other(_)) {
            return true;
        }
        let used =
            g.bond_order_sum(a) + atom.explicit_h.unwrap_or(0) as u32 + u32::from(a == attachment);
        used <= atom.element.max_valence() + atom.formal_charge.unsigned_abs() as u32
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_grammar() {
        assert_eq!(atom_label("N"), Some((Element::N, 0, None)));
        assert_eq!(atom_label("NH2"), Some((Element::N, 0, Some(2))));
        assert_eq!(atom_label("NH"), Some((Element::N, 0, Some(1))));
        assert_eq!(atom_label("N+"), Some((Element::N, 1, None)));
        assert_eq!(atom_label("O-"), Some((Element::O, -1, None)));
        assert_eq!(atom_label("O2-"), Some((Element::O, -2, None)));
        assert_eq!(atom_label("N+2"), Some((Element::N, 2, None)));
        assert_eq!(atom_label("NH3+"), Some((Element::N, 1, Some(3))));
        assert_eq!(atom_label("NH2-"), Some((Element::N, -1, Some(2))));
        assert_eq!(atom_label("Cl"), Some((Element::Cl, 0, None)));
        assert_eq!(
            atom_label("Na+"),
            Some((Element::Other("Na".into()), 1, None))
        );
        for bad in ["", "Qx7", "CO", "HH", "NH22", "Xe", "n", "+"] {
            assert_eq!(atom_label(bad), None, "{bad}");
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(" O\u{2212} "), "O-");
        assert_eq!(normalize("NH\u{2082}"), "NH2");
    }

    #[test]
    fn tokenize_and_mirror() {
        let t = FragmentTable::builtin();
        assert_eq!(tokenize("H2N", &t).unwrap().mirrored(), "NH2");
        assert_eq!(tokenize("EtO2C", &t).unwrap().mirrored(), "CO2Et");
        assert_eq!(tokenize("H3N+", &t).unwrap().mirrored(), "NH3+");
        assert_eq!(tokenize("Ph", &t).unwrap().units.len(), 1);
        assert!(tokenize("Qx7", &t).is_none());
    }

    #[test]
    fn linear_chain() {
        let t = FragmentTable::builtin();
        let toks = tokenize("CH2CH2OH", &t).unwrap();
        let (g, att) = build_linear(&toks.units, &t, true).unwrap();
        assert_eq!((g.atom_count(), g.bond_count(), att), (3, 2, 0));
        let toks = tokenize("HOCH2", &t).unwrap();
        let (g, att) = build_linear(&toks.units, &t, true).unwrap();
        assert_eq!(g.atom(att).element, Element::C);
        let toks = tokenize("CH(CH3)2", &t).unwrap();
        let (g, _) = build_linear(&toks.units, &t, true).unwrap();
        assert_eq!(g.atom_count(), 3);
        let toks = tokenize("SO2Me", &t).unwrap();
        let (g, att) = build_linear(&toks.units, &t, true).unwrap();
        assert_eq!(g.atom(att).element, Element::S);
        assert_eq!(g.bond_order_sum(att), 5);
    }
}
