//! Detection data model, the JSON wire format shared with depiction
//! annotations, and the detection providers: oracle, perturbed oracle and
//! external files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::chemgraph::{BondKind, Element, Point};
use crate::depictgen::Depiction;

/// The closed set of detector classes: 13 atom classes and 6 bond classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectionClass {
    Si,
    N,
    Br,
    S,
    I,
    Cl,
    H,
    P,
    O,
    C,
    B,
    F,
    Text,
    Single,
    Double,
    Triple,
    Wedge,
    Dash,
    Wavy,
}

use DetectionClass as DC;

impl DetectionClass {
    pub const ALL: [DetectionClass; 19] = [
        DC::Si,
        DC::N,
        DC::Br,
        DC::S,
        DC::I,
        DC::Cl,
        DC::H,
        DC::P,
        DC::O,
        DC::C,
        DC::B,
        DC::F,
        DC::Text,
        DC::Single,
        DC::Double,
        DC::Triple,
        DC::Wedge,
        DC::Dash,
        DC::Wavy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DC::Si => "Si",
            DC::N => "N",
            DC::Br => "Br",
            DC::S => "S",
            DC::I => "I",
            DC::Cl => "Cl",
            DC::H => "H",
            DC::P => "P",
            DC::O => "O",
            DC::C => "C",
            DC::B => "B",
            DC::F => "F",
            DC::Text => "Text",
            DC::Single => "Single",
            DC::Double => "Double",
            DC::Triple => "Triple",
            DC::Wedge => "Wedge",
            DC::Dash => "Dash",
            DC::Wavy => "Wavy",
        }
    }

    pub fn is_atom(self) -> bool {
        (self as usize) <= DC::Text as usize
    }

    pub fn is_bond(self) -> bool {
        !self.is_atom()
    }

    /// The element for element classes; `None` for `Text` and bonds.
    pub fn element(self) -> Option<Element> {
        if self == DC::Text || self.is_bond() {
            return None;
        }
        Element::known(self.as_str())
    }

    pub fn from_element(e: &Element) -> Option<Self> {
        Self::ALL[..12]
            .iter()
            .copied()
            .find(|c| c.as_str() == e.symbol())
    }

    pub fn bond_kind(self) -> Option<BondKind> {
        Some(match self {
            DC::Single => BondKind::Single,
            DC::Double => BondKind::Double,
            DC::Triple => BondKind::Triple,
            DC::Wedge => BondKind::WedgeUp,
            DC::Dash => BondKind::WedgeDown,
            DC::Wavy => BondKind::Wavy,
            _ => return None,
        })
    }

    pub fn from_bond_kind(k: BondKind) -> Self {
        match k {
            BondKind::Single => DC::Single,
            BondKind::Double => DC::Double,
            BondKind::Triple => DC::Triple,
            BondKind::WedgeUp => DC::Wedge,
            BondKind::WedgeDown => DC::Dash,
            BondKind::Wavy => DC::Wavy,
        }
    }

    fn valid_list() -> String {
        Self::ALL
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for DetectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown detection class {found:?}; valid classes are: {valid}")]
pub struct UnknownClass {
    pub found: String,
    pub valid: String,
}

impl FromStr for DetectionClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownClass {
                found: s.to_string(),
                valid: Self::valid_list(),
            })
    }
}

impl Serialize for DetectionClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DetectionClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned box in pixels, serialized as `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    /// Box around `center` with the given half extents.
    pub fn around(center: Point, hw: f64, hh: f64) -> Self {
        Self::new(center.x - hw, center.y - hh, center.x + hw, center.y + hh)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    pub fn iou(&self, o: &BBox) -> f64 {
        let ix = (self.x1.min(o.x1) - self.x0.max(o.x0)).max(0.0);
        let iy = (self.y1.min(o.y1) - self.y0.max(o.y0)).max(0.0);
        let inter = ix * iy;
        let union = self.area() + o.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x0, y0, x1, y1] = <[f64; 4]>::deserialize(d)?;
        Ok(BBox { x0, y0, x1, y1 })
    }
}

mod endpoints_serde {
    use super::Point;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<[Point; 2]>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|[a, b]| [[a.x, a.y], [b.x, b.y]]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[Point; 2]>, D::Error> {
        let v = Option::<[[f64; 2]; 2]>::deserialize(d)?;
        Ok(v.map(|[a, b]| [Point::new(a[0], a[1]), Point::new(b[0], b[1])]))
    }
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// One detected (or annotated) object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: DetectionClass,
    pub bbox: BBox,
    /// For bonds: the two bond ends, the narrow end first for wedges.
    #[serde(
        default,
        with = "endpoints_serde",
        skip_serializing_if = "Option::is_none"
    )]
    pub endpoints: Option<[Point; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Source atom ids (atoms and text groups) or the source bond id.
    #[serde(default)]
    pub truth_ids: Vec<usize>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub confidence: f64,
}

impl Detection {
    pub fn new(class: DetectionClass, bbox: BBox) -> Self {
        Self {
            class,
            bbox,
            endpoints: None,
            text: None,
            truth_ids: Vec::new(),
            confidence: 1.0,
        }
    }

    pub fn with_endpoints(mut self, a: Point, b: Point) -> Self {
        self.endpoints = Some([a, b]);
        self
    }

    pub fn with_text(mut self, t: impl Into<String>) -> Self {
        self.text = Some(t.into());
        self
    }

    pub fn with_confidence(mut self, c: f64) -> Self {
        self.confidence = c;
        self
    }
}

/// Detections for one image. Serializes as the versioned annotation
/// document and validates on deserialization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Document", into = "Document")]
pub struct DetectionSet {
    pub width: u32,
    pub height: u32,
    pub detections: Vec<Detection>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ImageSize {
    w: u32,
    h: u32,
}

fn version_one() -> u32 {
    1
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default = "version_one")]
    version: u32,
    image: ImageSize,
    objects: Vec<Detection>,
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("objects[{index}]: {message}")]
    Invalid { index: usize, message: String },
}

pub const SCHEMA_VERSION: u32 = 1;

impl TryFrom<Document> for DetectionSet {
    type Error = DetectError;

    fn try_from(doc: Document) -> Result<Self, DetectError> {
        if doc.version != SCHEMA_VERSION {
            return Err(DetectError::Schema {
                path: "version".into(),
                message: format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    doc.version
                ),
            });
        }
        for (index, d) in doc.objects.iter().enumerate() {
            let invalid = |message: String| DetectError::Invalid { index, message };
            if !d.bbox.is_valid() {
                return Err(invalid(format!("degenerate bbox {:?}", d.bbox.as_array())));
            }
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(invalid(format!(
                    "confidence {} outside [0, 1]",
                    d.confidence
                )));
            }
            if d.endpoints.is_some() && d.class.is_atom() {
                return Err(invalid(format!("{} detection has endpoints", d.class)));
            }
            if let Some(e) = d.endpoints {
                if e.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                    return Err(invalid("non-finite endpoint".into()));
                }
            }
        }
        Ok(DetectionSet {
            width: doc.image.w,
            height: doc.image.h,
            detections: doc.objects,
        })
    }
}

impl From<DetectionSet> for Document {
    fn from(set: DetectionSet) -> Self {
        Document {
            version: SCHEMA_VERSION,
            image: ImageSize {
                w: set.width,
                h: set.height,
            },
            objects: set.detections,
        }
    }
}

impl DetectionSet {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            detections: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    /// Parses and validates the JSON document form.
    pub fn from_json(text: &str) -> Result<Self, DetectError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Document =
            serde_path_to_error::deserialize(de).map_err(|e| DetectError::Schema {
                path: e.path().to_string(),
                message: e.into_inner().to_string(),
            })?;
        DetectionSet::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("detections serialize")
    }
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<DetectionSet, DetectError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DetectError::Io {
        path: path.display().to_string(),
        source,
    })?;
    DetectionSet::from_json(&text)
}

/// One detection per annotation, at confidence 1.
pub fn oracle_detect(depiction: &Depiction) -> DetectionSet {
    DetectionSet {
        width: depiction.width,
        height: depiction.height,
        detections: depiction
            .annotations
            .iter()
            .map(|a| Detection {
                confidence: 1.0,
                ..a.clone()
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationParams {
    /// Standard deviation of the rigid per-box shift, in pixels.
    pub jitter_sigma: f64,
    pub drop_prob: f64,
    pub relabel_prob: f64,
    pub strip_endpoints: bool,
    pub seed: u64,
}

impl PerturbationParams {
    /// The same parameters with the seed mixed with `key`, so each item of a
    /// batch gets its own stream regardless of batch order.
    pub fn reseeded(&self, key: &str) -> Self {
        let h = key.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        Self {
            seed: self.seed ^ h,
            ..*self
        }
    }
}

/// Seeded noise: rigid box shifts, drops, and relabels within the atom or
/// bond category. `Text` boxes keep their class and no box becomes `Text`.
pub fn perturb(set: &DetectionSet, p: &PerturbationParams) -> DetectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let sigma = if p.jitter_sigma.is_finite() {
        p.jitter_sigma.max(0.0)
    } else {
        0.0
    };
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let drop_prob = p.drop_prob.clamp(0.0, 1.0);
    let relabel_prob = p.relabel_prob.clamp(0.0, 1.0);
    let mut out = DetectionSet::new(set.width, set.height);
    for d in &set.detections {
        // fixed draw count per detection keeps streams aligned across params
        let (dx, dy) = (normal.sample(&mut rng), normal.sample(&mut rng));
        let drop_draw: f64 = rng.gen();
        let relabel_draw: f64 = rng.gen();
        let pick: usize = rng.gen_range(0..1000);
        if drop_draw < drop_prob {
            continue;
        }
        let mut d = d.clone();
        if sigma > 0.0 {
            d.bbox = d.bbox.translate(dx, dy);
            if let Some([a, b]) = d.endpoints {
                let s = Point::new(dx, dy);
                d.endpoints = Some([a.add(s), b.add(s)]);
            }
        }
        if relabel_draw < relabel_prob && d.class != DC::Text {
            let pool: Vec<DetectionClass> = DetectionClass::ALL
                .iter()
                .copied()
                .filter(|c| *c != d.class && *c != DC::Text && c.is_atom() == d.class.is_atom())
                .collect();
            d.class = pool[pick % pool.len()];
        }
        if p.strip_endpoints {
            d.endpoints = None;
        }
        out.detections.push(d);
    }
    out
}

/// Class-aware non-maximum suppression. Within a class the
/// highest-confidence box wins (ties by box coordinates, then input order)
/// and suppresses boxes with IoU above `iou_threshold`. Output keeps input
/// order.
pub fn dedupe(set: &DetectionSet, iou_threshold: f64) -> DetectionSet {
    let all: Vec<usize> = (0..set.detections.len()).collect();
    DetectionSet {
        width: set.width,
        height: set.height,
        detections: dedupe_indices(&set.detections, &all, iou_threshold)
            .into_iter()
            .map(|i| set.detections[i].clone())
            .collect(),
    }
}

/// [`dedupe`] over the subset `candidates` of `ds`, returning the kept
/// indices in ascending order.
pub fn dedupe_indices(ds: &[Detection], candidates: &[usize], iou_threshold: f64) -> Vec<usize> {
    let mut order: Vec<usize> = candidates.to_vec();
    order.sort_by(|&a, &b| {
        ds[b]
            .confidence
            .total_cmp(&ds[a].confidence)
            .then_with(|| {
                ds[a]
                    .bbox
                    .as_array()
                    .iter()
                    .zip(ds[b].bbox.as_array().iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let suppressed = kept
            .iter()
            .any(|&k| ds[k].class == ds[i].class && ds[k].bbox.iou(&ds[i].bbox) > iou_threshold);
        if !suppressed {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}
