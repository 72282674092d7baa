//! Review sessions: recognized items with their editable detections,
//! persisted to one JSON file.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use anyhow::{bail, Context};
use ocsr::construct::{build_graph, ConstructConfig, RecognizedMolecule};
use ocsr::detect::{load_detections, BBox, DetectionClass, DetectionSet};
use ocsr::evalbench::{load_manifest, ItemInput};
use ocsr::labelparse::FragmentTable;
use serde::{Deserialize, Serialize};

pub const SESSION_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemStatus {
    Pending,
    Accepted,
    Flagged,
}

impl ItemStatus {
    /// Pending moves to accepted or flagged and back; nothing else.
    pub fn can_become(self, to: ItemStatus) -> bool {
        use ItemStatus::*;
        self == to
            || matches!(
                (self, to),
                (Pending, Accepted) | (Pending, Flagged) | (Accepted, Pending) | (Flagged, Pending)
            )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ItemStatus::Pending => "pending",
            ItemStatus::Accepted => "accepted",
            ItemStatus::Flagged => "flagged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pending" => Some(ItemStatus::Pending),
            "accepted" => Some(ItemStatus::Accepted),
            "flagged" => Some(ItemStatus::Flagged),
            _ => None,
        }
    }
}

/// Progress of the latest recognition request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunState {
    Done,
    Running,
    Failed { message: String },
}

/// One recognition and the detection revision it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub detection_rev: u64,
    pub molecule: RecognizedMolecule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionItem {
    pub id: String,
    pub image: Option<PathBuf>,
    pub detections: DetectionSet,
    /// Bumped by every detection edit.
    pub detection_rev: u64,
    /// Oldest first; re-runs append and never touch earlier entries.
    pub recognitions: Vec<Recognition>,
    pub status: ItemStatus,
    /// Bumped by every mutation of this item.
    pub version: u64,
    pub run: RunState,
}

impl SessionItem {
    pub fn current(&self) -> Option<&Recognition> {
        self.recognitions.last()
    }

    /// Detections were edited after the latest recognition.
    pub fn is_stale(&self) -> bool {
        self.current()
            .is_none_or(|r| r.detection_rev != self.detection_rev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub format: u32,
    pub id: String,
    /// The fragment table in use, as TSV.
    pub fragment_table: String,
    pub items: Vec<SessionItem>,
}

/// Error with the byte offset of a JSON parse failure.
#[derive(Debug)]
pub struct CorruptSession {
    pub path: PathBuf,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for CorruptSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "session file {} is corrupt at byte offset {} (line {}, column {}): {}",
            self.path.display(),
            self.offset,
            self.line,
            self.column,
            self.message
        )
    }
}

impl std::error::Error for CorruptSession {}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (before + column.saturating_sub(1)).min(text.len())
}

impl SessionFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CorruptSession> {
        let corrupt = |line: usize, column: usize, message: String| CorruptSession {
            path: path.to_path_buf(),
            offset: byte_offset(text, line, column),
            line,
            column,
            message,
        };
        let file: SessionFile =
            serde_json::from_str(text).map_err(|e| corrupt(e.line(), e.column(), e.to_string()))?;
        if file.format != SESSION_FORMAT {
            return Err(corrupt(
                1,
                1,
                format!("unsupported session format {}", file.format),
            ));
        }
        let mut seen = BTreeMap::new();
        for (i, item) in file.items.iter().enumerate() {
            if let Some(j) = seen.insert(item.id.as_str(), i) {
                return Err(corrupt(
                    1,
                    1,
                    format!("items {j} and {i} share id {:?}", item.id),
                ));
            }
        }
        if let Err(e) = FragmentTable::from_tsv(&file.fragment_table) {
            return Err(corrupt(1, 1, format!("fragment table: {e}")));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self::parse(&text, path)?)
    }

    /// A fresh session over a dataset directory (`manifest.tsv`), every item
    /// recognized once and pending.
    pub fn from_dataset(dir: &Path, cfg: &ConstructConfig, jobs: usize) -> anyhow::Result<Self> {
        use rayon::prelude::*;
        let items = load_manifest(dir)?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        let built: Vec<anyhow::Result<SessionItem>> = pool.install(|| {
            items
                .par_iter()
                .map(|it| {
                    let (detections, image) = match &it.input {
                        ItemInput::File(p) => (load_detections(p)?, image_for(dir, p)),
                        ItemInput::Detections(s) => (s.clone(), None),
                    };
                    Ok(new_item(it.id.clone(), image, detections, cfg))
                })
                .collect()
        });
        let items = built.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
        let id = dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "session".into());
        Ok(SessionFile {
            format: SESSION_FORMAT,
            id,
            fragment_table: cfg.fragment_table.to_tsv(),
            items,
        })
    }
}

/// `images/<stem>.png` in the dataset, or an image beside the detections.
fn image_for(dir: &Path, detections: &Path) -> Option<PathBuf> {
    let stem = detections.file_stem()?;
    let mut candidates = vec![dir.join("images").join(stem).with_extension("png")];
    for ext in ["png", "pgm"] {
        candidates.push(detections.with_extension(ext));
    }
    candidates
        .into_iter()
        .find(|p| p.is_file())
        .map(|p| p.canonicalize().unwrap_or(p))
}

pub fn new_item(
    id: String,
    image: Option<PathBuf>,
    detections: DetectionSet,
    cfg: &ConstructConfig,
) -> SessionItem {
    let (recognitions, run) = match build_graph(&detections, cfg) {
        Ok(molecule) => (
            vec![Recognition {
                detection_rev: 0,
                molecule,
            }],
            RunState::Done,
        ),
        Err(e) => (
            Vec::new(),
            RunState::Failed {
                message: e.to_string(),
            },
        ),
    };
    SessionItem {
        id,
        image,
        detections,
        detection_rev: 0,
        recognitions,
        status: ItemStatus::Pending,
        version: 0,
        run,
    }
}

/// Requested change to one detection; absent fields stay as they are.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionPatch {
    pub class: Option<DetectionClass>,
    pub bbox: Option<BBox>,
    /// `null` clears the text.
    #[serde(default, with = "double_option")]
    pub text: Option<Option<String>>,
    /// Reject the edit unless the item is still at this version.
    pub version: Option<u64>,
}

mod double_option {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Option<String>>, s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<Option<String>>, D::Error> {
        Option::<String>::deserialize(d).map(Some)
    }
}

#[derive(Debug)]
pub enum StoreError {
    NotFound(String),
    BadRequest(String),
    Conflict(String),
    Internal(String),
}

impl std::fmt::Display for StoreError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StoreError::NotFound(m)
            | StoreError::BadRequest(m)
            | StoreError::Conflict(m)
            | StoreError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for StoreError {}

struct Slot {
    /// Held while an item is being changed.
    writer: Mutex<()>,
    snapshot: RwLock<Arc<SessionItem>>,
}

/// Shared session state. Readers clone an immutable snapshot; writers hold
/// the item's lock, publish a new snapshot and persist the whole session.
pub struct Store {
    path: PathBuf,
    id: String,
    table_tsv: String,
    construct: ConstructConfig,
    index: BTreeMap<String, usize>,
    slots: Vec<Slot>,
    persist_lock: Mutex<()>,
}

impl Store {
    /// Loads `path`, or creates it from `dataset` when it does not exist.
    /// Items left running by an interrupted server are marked failed.
    pub fn open(
        path: &Path,
        dataset: Option<&Path>,
        construct: &ConstructConfig,
        jobs: usize,
    ) -> anyhow::Result<Self> {
        let file = if path.exists() {
            SessionFile::load(path)?
        } else if let Some(dir) = dataset {
            SessionFile::from_dataset(dir, construct, jobs)?
        } else {
            bail!(
                "session file {} does not exist and no dataset was given",
                path.display()
            );
        };
        let store = Self::from_file(path, file, construct)?;
        store.persist().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(store)
    }

    /// The construction config uses the session's own fragment table.
    pub fn from_file(
        path: &Path,
        file: SessionFile,
        construct: &ConstructConfig,
    ) -> anyhow::Result<Self> {
        let table =
            FragmentTable::from_tsv(&file.fragment_table).context("session fragment table")?;
        let construct = ConstructConfig {
            fragment_table: table,
            ..construct.clone()
        };
        let mut index = BTreeMap::new();
        let mut slots = Vec::new();
        for (i, mut item) in file.items.into_iter().enumerate() {
            if item.run == RunState::Running {
                item.run = RunState::Failed {
                    message: "interrupted before it finished; rerun to retry".into(),
                };
            }
            index.insert(item.id.clone(), i);
            slots.push(Slot {
                writer: Mutex::new(()),
                snapshot: RwLock::new(Arc::new(item)),
            });
        }
        Ok(Store {
            path: path.to_path_buf(),
            id: file.id,
            table_tsv: file.fragment_table,
            construct,
            index,
            slots,
            persist_lock: Mutex::new(()),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn construct_config(&self) -> &ConstructConfig {
        &self.construct
    }

    pub fn ids(&self) -> Vec<String> {
        self.all().iter().map(|i| i.id.clone()).collect()
    }

    fn slot(&self, id: &str) -> Result<&Slot, StoreError> {
        self.index
            .get(id)
            .map(|&i| &self.slots[i])
            .ok_or_else(|| StoreError::NotFound(format!("no item {id:?}")))
    }

    pub fn get(&self, id: &str) -> Result<Arc<SessionItem>, StoreError> {
        Ok(self
            .slot(id)?
            .snapshot
            .read()
            .expect("snapshot lock")
            .clone())
    }

    /// Snapshots of every item in session order.
    pub fn all(&self) -> Vec<Arc<SessionItem>> {
        self.slots
            .iter()
            .map(|s| s.snapshot.read().expect("snapshot lock").clone())
            .collect()
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            format: SESSION_FORMAT,
            id: self.id.clone(),
            fragment_table: self.table_tsv.clone(),
            items: self.all().iter().map(|i| (**i).clone()).collect(),
        }
    }

    /// Writes the session to a temporary file and renames it over the old one.
    pub fn persist(&self) -> Result<(), StoreError> {
        let _guard = self.persist_lock.lock().expect("persist lock");
        let text = serde_json::to_string_pretty(&self.to_file())
            .map_err(|e| StoreError::Internal(e.to_string()))?;
        let tmp = self.path.with_extension("json.tmp");
        let write = || -> std::io::Result<()> {
            if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
            std::fs::rename(&tmp, &self.path)
        };
        write().map_err(|e| StoreError::Internal(format!("writing {}: {e}", self.path.display())))
    }

    /// Applies `f` to a copy of the item under its writer lock, bumps the
    /// version, publishes and persists. Returns the new snapshot.
    pub fn update<F>(&self, id: &str, f: F) -> Result<Arc<SessionItem>, StoreError>
    where
        F: FnOnce(&mut SessionItem) -> Result<(), StoreError>,
    {
        let slot = self.slot(id)?;
        let _guard = slot.writer.lock().expect("writer lock");
        let mut item = (**slot.snapshot.read().expect("snapshot lock")).clone();
        f(&mut item)?;
        item.version += 1;
        let item = Arc::new(item);
        *slot.snapshot.write().expect("snapshot lock") = item.clone();
        self.persist()?;
        Ok(item)
    }

    pub fn patch_detection(
        &self,
        id: &str,
        k: usize,
        patch: &DetectionPatch,
    ) -> Result<Arc<SessionItem>, StoreError> {
        self.update(id, |item| {
            check_version(item, patch.version)?;
            let n = item.detections.detections.len();
            let d = item.detections.detections.get_mut(k).ok_or_else(|| {
                StoreError::NotFound(format!("item {id:?} has {n} detections, no index {k}"))
            })?;
            if let Some(b) = patch.bbox {
                if !b.is_valid() {
                    return Err(StoreError::BadRequest(format!("invalid bbox {b:?}")));
                }
                if b != d.bbox {
                    // moved bonds re-estimate their ends from the box
                    d.endpoints = None;
                }
                d.bbox = b;
            }
            if let Some(c) = patch.class {
                if c.is_atom() {
                    d.endpoints = None;
                }
                d.class = c;
            }
            if let Some(t) = &patch.text {
                d.text = t.clone().filter(|s| !s.is_empty());
            }
            item.detection_rev += 1;
            Ok(())
        })
    }

    pub fn set_status(
        &self,
        id: &str,
        to: ItemStatus,
        version: Option<u64>,
    ) -> Result<Arc<SessionItem>, StoreError> {
        self.update(id, |item| {
            check_version(item, version)?;
            if !item.status.can_become(to) {
                return Err(StoreError::Conflict(format!(
                    "cannot move item {id:?} from {} to {}; go through pending",
                    item.status.as_str(),
                    to.as_str()
                )));
            }
            item.status = to;
            Ok(())
        })
    }

    /// Marks the item running and returns the detections to recognize and
    /// their revision.
    pub fn begin_rerun(
        &self,
        id: &str,
    ) -> Result<(Arc<SessionItem>, DetectionSet, u64), StoreError> {
        let mut captured = None;
        let item = self.update(id, |item| {
            if item.run == RunState::Running {
                return Err(StoreError::Conflict(format!(
                    "item {id:?} is already running"
                )));
            }
            item.run = RunState::Running;
            captured = Some((item.detections.clone(), item.detection_rev));
            Ok(())
        })?;
        let (set, rev) = captured.expect("set under lock");
        Ok((item, set, rev))
    }

    pub fn finish_rerun(
        &self,
        id: &str,
        rev: u64,
        result: Result<RecognizedMolecule, String>,
    ) -> Result<Arc<SessionItem>, StoreError> {
        self.update(id, |item| {
            match result {
                Ok(molecule) => {
                    item.recognitions.push(Recognition {
                        detection_rev: rev,
                        molecule,
                    });
                    item.run = RunState::Done;
                }
                Err(message) => item.run = RunState::Failed { message },
            }
            Ok(())
        })
    }

    /// Recognizes the item's current detections synchronously.
    pub fn rerun_blocking(&self, id: &str) -> Result<Arc<SessionItem>, StoreError> {
        let (_, set, rev) = self.begin_rerun(id)?;
        let result = build_graph(&set, &self.construct).map_err(|e| e.to_string());
        self.finish_rerun(id, rev, result)
    }
}

fn check_version(item: &SessionItem, expected: Option<u64>) -> Result<(), StoreError> {
    match expected {
        Some(v) if v != item.version => Err(StoreError::Conflict(format!(
            "item {:?} is at version {}, not {v}",
            item.id, item.version
        ))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_transitions() {
        use ItemStatus::*;
        assert!(Pending.can_become(Accepted));
        assert!(Flagged.can_become(Pending));
        assert!(!Accepted.can_become(Flagged));
        assert!(!Flagged.can_become(Accepted));
        assert!(Accepted.can_become(Accepted));
    }

    #[test]
    fn offsets_count_bytes_before_the_position() {
        let text = "{\n  \"a\": 1,\n  x\n}";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(byte_offset(text, 3, 3), 14);
        assert_eq!(&text[14..15], "x");
    }

    #[test]
    fn corrupt_file_names_the_offset() {
        let err =
            SessionFile::parse("{\"format\": 1, \"id\": 5}", Path::new("s.json")).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.offset > 0 && err.offset <= 22, "{err}");
        assert!(err.to_string().contains("byte offset"));
    }

    #[test]
    fn text_patch_distinguishes_null_from_absent() {
        let p: DetectionPatch = serde_json::from_str(r#"{"text": null}"#).unwrap();
        assert_eq!(p.text, Some(None));
        let p: DetectionPatch = serde_json::from_str(r#"{"class": "O"}"#).unwrap();
        assert_eq!(p.text, None);
        assert_eq!(p.class, Some(DetectionClass::O));
        assert!(serde_json::from_str::<DetectionPatch>(r#"{"colour": 1}"#).is_err());
    }
}
