//! MDL molfile V2000 and SDF.
//!
//! Coordinates are written with `%10.4f`. Internal positions use image
//! orientation (y grows downwards); the y axis is flipped on the way in and
//! out so drawings keep their handedness in other tools.

use thiserror::Error;

use super::smiles::kekulize;
use super::{Atom, BondKind, Element, MolGraph, Point};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("molfile line {line}: {message}")]
pub struct MolfileError {
    /// 1-based line number in the input text.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MolfileError {
    MolfileError {
        line,
        message: message.into(),
    }
}

fn field(s: &str, range: std::ops::Range<usize>) -> &str {
    let end = range.end.min(s.len());
    if range.start >= end {
        return "";
    }
    s.get(range.start..end).unwrap_or("").trim()
}

fn int_field(
    s: &str,
    range: std::ops::Range<usize>,
    line: usize,
    what: &str,
) -> Result<i64, MolfileError> {
    let f = field(s, range);
    if f.is_empty() {
        return Ok(0);
    }
    f.parse()
        .map_err(|_| err(line, format!("bad {what} field {f:?}")))
}

fn charge_from_code(code: i64) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

fn code_from_charge(q: i8) -> i64 {
    match q {
        3 => 1,
        2 => 2,
        1 => 3,
        -1 => 5,
        -2 => 6,
        -3 => 7,
        _ => 0,
    }
}

/// Parses one V2000 connection table. `first_line` offsets reported line
/// numbers (used by the SDF reader).
fn parse_block(lines: &[&str], first_line: usize) -> Result<MolGraph, MolfileError> {
    let ln = |i: usize| first_line + i;
    if lines.len() < 4 {
        return Err(err(ln(lines.len()), "missing counts line"));
    }
    let counts = lines[3];
    if counts.contains("V3000") {
        return Err(err(ln(3), "V3000 connection tables are not supported"));
    }
    let parse_count = |r: std::ops::Range<usize>, what: &str| -> Result<usize, MolfileError> {
        let f = field(counts, r);
        f.parse::<usize>().map_err(|_| {
            err(
                ln(3),
                format!("malformed counts line: bad {what} count {f:?}"),
            )
        })
    };
    let n_atoms = parse_count(0..3, "atom")?;
    let n_bonds = parse_count(3..6, "bond")?;
    if lines.len() < 4 + n_atoms + n_bonds {
        return Err(err(
            ln(lines.len()),
            format!("file ends before {n_atoms} atoms and {n_bonds} bonds"),
        ));
    }

    let mut g = MolGraph::new();
    for i in 0..n_atoms {
        let idx = 4 + i;
        let l = lines[idx];
        let coord = |r: std::ops::Range<usize>| -> Result<f64, MolfileError> {
            let f = field(l, r);
            f.parse::<f64>()
                .map_err(|_| err(ln(idx), format!("bad coordinate {f:?}")))
        };
        let x = coord(0..10)?;
        let y = coord(10..20)?;
        let sym = field(l, 31..34);
        if sym.is_empty() {
            return Err(err(ln(idx), "missing atom symbol"));
        }
        let charge = charge_from_code(int_field(l, 36..39, ln(idx), "charge")?);
        g.add_atom(
            Atom::new(Element::from_symbol(sym))
                .with_charge(charge)
                .at(Point::new(x, -y)),
        );
    }

    let mut aromatic_bond = Vec::new();
    for i in 0..n_bonds {
        let idx = 4 + n_atoms + i;
        let l = lines[idx];
        let a = int_field(l, 0..3, ln(idx), "first atom")?;
        let b = int_field(l, 3..6, ln(idx), "second atom")?;
        let order = int_field(l, 6..9, ln(idx), "bond type")?;
        let stereo = int_field(l, 9..12, ln(idx), "bond stereo")?;
        if a < 1 || b < 1 || a as usize > n_atoms || b as usize > n_atoms {
            return Err(err(
                ln(idx),
                format!("bond atom index out of range 1..={n_atoms}: {a} {b}"),
            ));
        }
        let kind = match (order, stereo) {
            (1, 1) => BondKind::WedgeUp,
            (1, 6) => BondKind::WedgeDown,
            (1, 4) => BondKind::Wavy,
            (1, _) | (4, _) => BondKind::Single,
            (2, _) => BondKind::Double,
            (3, _) => BondKind::Triple,
            (t, _) => return Err(err(ln(idx), format!("unsupported bond type {t}"))),
        };
        g.add_bond(a as usize - 1, b as usize - 1, kind)
            .map_err(|e| err(ln(idx), e.to_string()))?;
        aromatic_bond.push(order == 4);
    }

    let mut charges: Option<Vec<(usize, i8)>> = None;
    for (i, l) in lines.iter().enumerate().skip(4 + n_atoms + n_bonds) {
        if l.starts_with("M  END") {
            break;
        }
        if let Some(rest) = l.strip_prefix("M  CHG") {
            let nums: Vec<i64> = rest
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| err(ln(i), format!("bad M  CHG entry {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            let Some((&count, pairs)) = nums.split_first() else {
                return Err(err(ln(i), "empty M  CHG line"));
            };
            if pairs.len() != 2 * count as usize {
                return Err(err(ln(i), "M  CHG entry count mismatch"));
            }
            let list = charges.get_or_insert_with(Vec::new);
            for p in pairs.chunks(2) {
                let atom = p[0];
                if atom < 1 || atom as usize > n_atoms {
                    return Err(err(ln(i), format!("M  CHG atom {atom} out of range")));
                }
                if !(-4..=4).contains(&p[1]) {
                    return Err(err(ln(i), format!("charge {} out of range", p[1])));
                }
                list.push((atom as usize - 1, p[1] as i8));
            }
        }
    }
    // any M  CHG line supersedes all atom-block charges
    if let Some(list) = charges {
        for i in 0..g.atom_count() {
            g.atom_mut(i).formal_charge = 0;
        }
        for (a, q) in list {
            g.atom_mut(a).formal_charge = q;
        }
    }

    if aromatic_bond.iter().any(|&a| a) {
        let mut aromatic_atom = vec![false; g.atom_count()];
        for (i, b) in g.bonds().iter().enumerate() {
            if aromatic_bond[i] {
                aromatic_atom[b.begin] = true;
                aromatic_atom[b.end] = true;
            }
        }
        let fixed = vec![None; g.atom_count()];
        kekulize(&mut g, &aromatic_atom, &aromatic_bond, &fixed).map_err(|m| err(ln(3), m))?;
    }
    Ok(g)
}

/// Parses a single V2000 molfile.
pub fn parse_molfile(text: &str) -> Result<MolGraph, MolfileError> {
    let lines: Vec<&str> = text.lines().collect();
    parse_block(&lines, 1)
}

fn molfile_symbol(e: &Element) -> &str {
    let s = e.symbol();
    if s.is_empty() || s.len() > 3 {
        "*"
    } else {
        s
    }
}

/// Writes a V2000 molfile with the given title line.
pub fn write_molfile_titled(g: &MolGraph, title: &str) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let title: String = title
        .chars()
        .filter(|c| *c != '\n' && *c != '\r')
        .take(80)
        .collect();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  ocsr    01010000002D");
    out.push('\n');
    let _ = writeln!(
        out,
        "{:>3}{:>3}  0  0  0  0  0  0  0  0999 V2000",
        g.atom_count(),
        g.bond_count()
    );
    for a in g.atoms() {
        let p = a.position.unwrap_or_default();
        // "+ 0.0" turns -0.0 into 0.0
        let (x, y) = (p.x + 0.0, -p.y + 0.0);
        let _ = writeln!(
            out,
            "{:>10.4}{:>10.4}{:>10.4} {:<3} 0{:>3}  0  0  0  0  0  0  0  0  0  0",
            x,
            y,
            0.0,
            molfile_symbol(&a.element),
            code_from_charge(a.formal_charge)
        );
    }
    for b in g.bonds() {
        let (order, stereo) = match b.kind {
            BondKind::Single => (1, 0),
            BondKind::Double => (2, 0),
            BondKind::Triple => (3, 0),
            BondKind::WedgeUp => (1, 1),
            BondKind::WedgeDown => (1, 6),
            BondKind::Wavy => (1, 4),
        };
        let _ = writeln!(
            out,
            "{:>3}{:>3}{:>3}{:>3}  0  0  0",
            b.begin + 1,
            b.end + 1,
            order,
            stereo
        );
    }
    let charged: Vec<(usize, i8)> = g
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.formal_charge != 0)
        .map(|(i, a)| (i + 1, a.formal_charge))
        .collect();
    for chunk in charged.chunks(8) {
        let _ = write!(out, "M  CHG{:>3}", chunk.len());
        for (i, q) in chunk {
            let _ = write!(out, " {i:>3} {q:>3}");
        }
        out.push('\n');
    }
    out.push_str("M  END\n");
    out
}

pub fn write_molfile(g: &MolGraph) -> String {
    write_molfile_titled(g, "")
}

/// One SDF record: title, connection table and data items.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfRecord {
    pub title: String,
    pub graph: MolGraph,
    pub properties: Vec<(String, String)>,
}

/// Parses an SDF file (molfiles separated by `$$$$`).
pub fn parse_sdf(text: &str) -> Result<Vec<SdfRecord>, MolfileError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut records = Vec::new();
    let mut start = 0;
    while start < lines.len() {
        let end = (start..lines.len())
            .find(|&i| lines[i].starts_with("$$$$"))
            .unwrap_or(lines.len());
        let block = &lines[start..end];
        if block.iter().any(|l| !l.trim().is_empty()) {
            let graph = parse_block(block, start + 1)?;
            let mut properties = Vec::new();
            let mut i = block
                .iter()
                .position(|l| l.starts_with("M  END"))
                .map_or(block.len(), |p| p + 1);
            while i < block.len() {
                if let Some(rest) = block[i].strip_prefix('>') {
                    let name = rest
                        .split('<')
                        .nth(1)
                        .and_then(|s| s.split('>').next())
                        .unwrap_or("")
                        .to_string();
                    let mut value = Vec::new();
                    i += 1;
                    while i < block.len() && !block[i].trim().is_empty() {
                        value.push(block[i]);
                        i += 1;
                    }
                    properties.push((name, value.join("\n")));
                }
                i += 1;
            }
            records.push(SdfRecord {
                title: block[0].to_string(),
                graph,
                properties,
            });
        }
        start = end + 1;
    }
    Ok(records)
}

/// Writes records as SDF, each terminated by `$$$$`.
pub fn write_sdf(records: &[SdfRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&write_molfile_titled(&r.graph, &r.title));
        for (k, v) in &r.properties {
            out.push_str(&format!("> <{k}>\n{v}\n\n"));
        }
        out.push_str("$$$$\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{is_isomorphic, parse_smiles, Strictness};

    const ONE_ATOM: &str = "\n  test\n\n  1  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\nM  END\n";

    #[test]
    fn minimal_single_atom() {
        let g = parse_molfile(ONE_ATOM).unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.bond_count(), 0);
        assert_eq!(g.atom(0).element, Element::C);
    }

    #[test]
    fn benzene_round_trip() {
        let b = parse_smiles("c1ccccc1").unwrap();
        let back = parse_molfile(&write_molfile(&b)).unwrap();
        assert!(is_isomorphic(&b, &back, Strictness::StereoStrict));
    }

    #[test]
    fn field_widths_are_exact() {
        let mut g = parse_smiles("C[N+](C)(C)C").unwrap();
        g.atom_mut(0).position = Some(Point::new(1.5, -2.25));
        let text = write_molfile(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[3], "  5  4  0  0  0  0  0  0  0  0999 V2000");
        assert_eq!(
            lines[4],
            "    1.5000    2.2500    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0"
        );
        assert_eq!(lines[5].len(), 69);
        assert_eq!(&lines[5][31..34], "N  ");
        assert_eq!(&lines[5][36..39], "  3");
        assert_eq!(lines[9], "  1  2  1  0  0  0  0");
        assert!(text.contains("M  CHG  1   2   1\n"));
    }

    #[test]
    fn stereo_codes() {
        let mut g = parse_smiles("CC(O)(N)F").unwrap();
        g.set_bond_kind(1, BondKind::WedgeUp);
        g.set_bond_kind(2, BondKind::WedgeDown);
        g.set_bond_kind(3, BondKind::Wavy);
        let text = write_molfile(&g);
        assert!(text.contains("  2  3  1  1"));
        assert!(text.contains("  2  4  1  6"));
        assert!(text.contains("  2  5  1  4"));
        let back = parse_molfile(&text).unwrap();
        assert!(is_isomorphic(&g, &back, Strictness::StereoStrict));
    }

    #[test]
    fn coordinates_preserved() {
        let mut g = parse_smiles("CCO").unwrap();
        for (i, p) in [(0.12345, 1.0), (-3.0, 2.5), (7.77777, -0.1)]
            .iter()
            .enumerate()
        {
            g.atom_mut(i).position = Some(Point::new(p.0, p.1));
        }
        let back = parse_molfile(&write_molfile(&g)).unwrap();
        for i in 0..3 {
            let (a, b) = (g.atom(i).position.unwrap(), back.atom(i).position.unwrap());
            assert!((a.x - b.x).abs() <= 5e-5 && (a.y - b.y).abs() <= 5e-5);
        }
    }

    #[test]
    fn errors_name_lines() {
        let bad_counts = "\n\n\n  x  0\n";
        assert_eq!(parse_molfile(bad_counts).unwrap_err().line, 4);
        let bad_bond = "\n\n\n  2  1\n    0.0000    0.0000    0.0000 C   0  0\n    1.0000    0.0000    0.0000 C   0  0\n  1  3  1  0\nM  END\n";
        assert_eq!(parse_molfile(bad_bond).unwrap_err().line, 7);
        let truncated = "\n\n\n  3  0\n    0.0000    0.0000    0.0000 C   0  0\n";
        assert!(parse_molfile(truncated).is_err());
        assert!(parse_molfile("").is_err());
    }

    #[test]
    fn aromatic_bond_type_is_kekulized() {
        let mut text = String::from("\n\n\n  6  6  0  0  0  0  0  0  0  0999 V2000\n");
        for _ in 0..6 {
            text.push_str(
                "    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n",
            );
        }
        for i in 0..6 {
            text.push_str(&format!("{:>3}{:>3}  4  0\n", i + 1, (i + 1) % 6 + 1));
        }
        text.push_str("M  END\n");
        let g = parse_molfile(&text).unwrap();
        assert!(is_isomorphic(
            &g,
            &parse_smiles("c1ccccc1").unwrap(),
            Strictness::OrderOnly
        ));
    }

    #[test]
    fn sdf_round_trip() {
        let recs = vec![
            SdfRecord {
                title: "a".into(),
                graph: parse_smiles("CCO").unwrap(),
                properties: vec![("smiles".into(), "CCO".into())],
            },
            SdfRecord {
                title: "b".into(),
                graph: parse_smiles("c1ccccc1").unwrap(),
                properties: vec![],
            },
        ];
        let text = write_sdf(&recs);
        assert_eq!(text.matches("$$$$").count(), 2);
        let back = parse_sdf(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].title, "a");
        assert_eq!(
            back[0].properties,
            vec![("smiles".to_string(), "CCO".to_string())]
        );
        assert!(is_isomorphic(
            &back[1].graph,
            &recs[1].graph,
            Strictness::OrderOnly
        ));
    }
}
