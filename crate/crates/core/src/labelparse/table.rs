use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use super::grammar::atom_label;
use crate::chemgraph::{parse_smiles, write_smiles, Element, MolGraph};

const BUILTIN_TSV: &str = include_str!("fragments.tsv");

#[derive(Debug, Error)]
pub enum FragmentTableError {
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One abbreviation with its expansion and attachment atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentEntry {
    pub key: String,
    pub aliases: Vec<String>,
    /// The source SMILES, with `*` at each attachment.
    pub smiles: String,
    /// The fragment without the `*` markers.
    pub fragment: MolGraph,
    /// Fragment atoms bonded to the parent, in marker order.
    pub attachments: Vec<usize>,
}

impl FragmentEntry {
    /// The marked SMILES graph, `*` atoms included.
    pub fn marked_graph(&self) -> MolGraph {
        parse_smiles(&self.smiles).expect("validated at load")
    }
}

#[derive(Debug, Default)]
struct Inner {
    entries: Vec<FragmentEntry>,
    index: HashMap<String, usize>,
}

/// Abbreviation table: case-sensitive keys plus aliases. Immutable and
/// cheap to clone.
#[derive(Debug, Clone, Default)]
pub struct FragmentTable {
    inner: Arc<Inner>,
}

impl PartialEq for FragmentTable {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.entries == other.inner.entries
    }
}

/// Splits a marked fragment into the bare fragment and its attachment atoms.
fn split_markers(g: &MolGraph) -> Result<(MolGraph, Vec<usize>), String> {
    let star = Element::Other("*".into());
    let markers: Vec<usize> = (0..g.atom_count())
        .filter(|&a| g.atom(a).element == star)
        .collect();
    if markers.is_empty() {
        return Err("fragment has no * attachment marker".into());
    }
    let adj = g.adjacency();
    let mut targets = Vec::new();
    for &m in &markers {
        if adj[m].len() != 1 {
            return Err("each * must have exactly one neighbour".into());
        }
        let (nb, bond) = adj[m][0];
        if g.atom(nb).element == star {
            return Err("* bonded to *".into());
        }
        if g.bonds()[bond].kind.order() != 1 {
            return Err("* must be attached by a single bond".into());
        }
        targets.push(nb);
    }
    let (frag, map) = g.without_atoms(&markers);
    let attachments = targets
        .iter()
        .map(|&t| map[t].expect("non-marker kept"))
        .collect();
    if !frag.is_connected() {
        return Err("fragment is not connected".into());
    }
    Ok((frag, attachments))
}

impl FragmentTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The table embedded in the library.
    pub fn builtin() -> Self {
        static BUILTIN: OnceLock<FragmentTable> = OnceLock::new();
        BUILTIN
            .get_or_init(|| {
                FragmentTable::from_tsv(BUILTIN_TSV).expect("built-in fragment table is valid")
            })
            .clone()
    }

    pub fn builtin_tsv() -> &'static str {
        BUILTIN_TSV
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FragmentTableError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FragmentTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_tsv(&text)
    }

    /// Parses the TSV format: `key<TAB>aliases<TAB>smiles`, `#` comments,
    /// aliases comma-separated or `-`.
    pub fn from_tsv(text: &str) -> Result<Self, FragmentTableError> {
        let mut inner = Inner::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| FragmentTableError::Invalid { line, message };
            let l = raw.trim_end_matches('\r');
            if l.trim().is_empty() || l.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = l.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(format!(
                    "expected 3 tab-separated columns, found {}",
                    cols.len()
                )));
            }
            let key = cols[0].trim();
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            let aliases: Vec<String> = match cols[1].trim() {
                "" | "-" => Vec::new(),
                s => s
                    .split(',')
                    .map(|a| a.trim().to_string())
                    .filter(|a| !a.is_empty())
                    .collect(),
            };
            let smiles = cols[2].trim();
            let marked =
                parse_smiles(smiles).map_err(|e| err(format!("fragment {smiles:?}: {e}")))?;
            let (fragment, attachments) =
                split_markers(&marked).map_err(|m| err(format!("fragment {smiles:?}: {m}")))?;
            let idx = inner.entries.len();
            for name in std::iter::once(key).chain(aliases.iter().map(String::as_str)) {
                if atom_label(name).is_some() {
                    return Err(err(format!("{name:?} reads as a plain atom label")));
                }
                if inner.index.insert(name.to_string(), idx).is_some() {
                    return Err(err(format!("duplicate key {name:?}")));
                }
            }
            inner.entries.push(FragmentEntry {
                key: key.to_string(),
                aliases,
                smiles: smiles.to_string(),
                fragment,
                attachments,
            });
        }
        Ok(FragmentTable {
            inner: Arc::new(inner),
        })
    }

    /// Serializes back to the TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# ocsr fragment table v1\n");
        for e in self.entries() {
            let aliases = if e.aliases.is_empty() {
                "-".to_string()
            } else {
                e.aliases.join(",")
            };
            out.push_str(&format!("{}\t{}\t{}\n", e.key, aliases, e.smiles));
        }
        out
    }

    /// Looks up a key or alias.
    pub fn get(&self, name: &str) -> Option<&FragmentEntry> {
        self.inner.index.get(name).map(|&i| &self.inner.entries[i])
    }

    pub fn entries(&self) -> &[FragmentEntry] {
        &self.inner.entries
    }

    pub fn len(&self) -> usize {
        self.inner.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.entries.is_empty()
    }

    /// Every key and alias, for tokenization.
    pub(crate) fn names(&self) -> impl Iterator<Item = &str> {
        self.inner.index.keys().map(String::as_str)
    }
}

/// Re-serializes a marked fragment; used by the table self-test.
pub fn fragment_round_trip(entry: &FragmentEntry) -> Result<MolGraph, String> {
    let text = write_smiles(&entry.marked_graph());
    parse_smiles(&text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{is_isomorphic, Strictness};

    #[test]
    fn builtin_is_large_and_valid() {
        let t = FragmentTable::builtin();
        assert!(t.len() >= 60);
        for key in [
            "Me", "Et", "Pr", "iPr", "nBu", "tBu", "Ph", "Bn", "Bz", "Ac", "Boc", "Cbz", "Ts",
            "Ms", "Tf", "OMe", "OEt", "OAc", "NO2", "CN", "CF3", "CO2H", "CO2Me", "CO2Et", "CONH2",
            "SO3H", "SiMe3",
        ] {
            assert!(t.get(key).is_some(), "{key}");
        }
        for e in t.entries() {
            assert!(!e.attachments.is_empty());
            assert!(e.attachments.iter().all(|&a| a < e.fragment.atom_count()));
        }
    }

    #[test]
    fn builtin_fragments_round_trip() {
        for e in FragmentTable::builtin().entries() {
            let back = fragment_round_trip(e).unwrap();
            assert!(
                is_isomorphic(&back, &e.marked_graph(), Strictness::StereoStrict),
                "{}",
                e.key
            );
        }
    }

    #[test]
    fn empty_file_is_empty_table() {
        assert!(FragmentTable::from_tsv("").unwrap().is_empty());
        assert!(FragmentTable::from_tsv("# comment only\n\n")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicate_key_reports_second_line() {
        let err = FragmentTable::from_tsv("Ph\t-\t*c1ccccc1\nPh\t-\t*c1ccccc1\n").unwrap_err();
        assert!(
            matches!(err, FragmentTableError::Invalid { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn alias_collision_is_duplicate() {
        let err = FragmentTable::from_tsv("OMe\tMeO\t*OC\nMeO\t-\t*OC\n").unwrap_err();
        assert!(matches!(err, FragmentTableError::Invalid { line: 2, .. }));
    }

    #[test]
    fn bad_rows_rejected() {
        for bad in ["X\t-\tC(", "X\t-\tCC", "X\t-\t*=CC", "NH2\t-\t*N", "X\t*C"] {
            assert!(FragmentTable::from_tsv(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn dump_reloads() {
        let t = FragmentTable::builtin();
        let again = FragmentTable::from_tsv(&t.to_tsv()).unwrap();
        assert_eq!(again.len(), t.len());
        assert_eq!(again, t);
    }
}
