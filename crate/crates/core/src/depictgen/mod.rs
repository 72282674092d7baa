//! Annotated raster depictions of molecular graphs.
//!
//! [`depict`] collapses table fragments into labeled nodes (optionally),
//! lays the display graph out and renders it. Every drawn atom, label and
//! bond gets an annotation linking it back to the source graph.

pub mod collapse;
pub mod glyphs;
pub mod layout;
mod raster;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::{is_isomorphic, Atom, BondKind, Element, MolGraph, Point, Strictness};
use crate::detect::{BBox, Detection, DetectionClass, DetectionSet};
use crate::labelparse::{grammar, parse_label, FragmentTable, TextInterpretation};

pub use collapse::{collapse_superatoms, Collapsed, Origin};
pub use layout::{
    closest_pair, compute_layout, crossing_bonds, layout_2d, LayoutError, MIN_ATOM_DISTANCE,
};

use raster::Canvas;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
    SaltPepper,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Noise {
    pub kind: NoiseKind,
    /// In [0, 1]: the standard deviation as a fraction of full scale for
    /// gaussian noise, the flip probability for salt-and-pepper.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleParams {
    /// Pixels per bond length.
    pub image_scale: f64,
    pub stroke_width_px: u32,
    pub font_scale: f64,
    pub rotation_deg: f64,
    pub noise: Noise,
    pub superatom_collapse_prob: f64,
    pub seed: u64,
    /// Largest allowed width or height.
    pub max_dim: u32,
}

impl Default for StyleParams {
    fn default() -> Self {
        Self {
            image_scale: 40.0,
            stroke_width_px: 2,
            font_scale: 1.0,
            rotation_deg: 0.0,
            noise: Noise::default(),
            superatom_collapse_prob: 0.0,
            seed: 0,
            max_dim: 8000,
        }
    }
}

impl StyleParams {
    pub fn validate(&self) -> Result<(), DepictError> {
        let bad = |m: &str| Err(DepictError::InvalidStyle(m.to_string()));
        if !(self.image_scale.is_finite() && self.image_scale >= 4.0) {
            return bad("image_scale must be at least 4");
        }
        if self.stroke_width_px == 0 {
            return bad("stroke_width_px must be at least 1");
        }
        if !(self.font_scale.is_finite() && self.font_scale > 0.0) {
            return bad("font_scale must be positive");
        }
        if !self.rotation_deg.is_finite() {
            return bad("rotation_deg must be finite");
        }
        if !(0.0..=1.0).contains(&self.noise.level) {
            return bad("noise level must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.superatom_collapse_prob) {
            return bad("superatom_collapse_prob must be in [0, 1]");
        }
        Ok(())
    }
}

/// Per-image style sampling for corpus generation. Each pair is an
/// inclusive range; equal ends fix the value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleRanges {
    pub image_scale: (f64, f64),
    pub stroke_width_px: (u32, u32),
    pub font_scale: (f64, f64),
    pub rotation_deg: (f64, f64),
    pub noise_kind: NoiseKind,
    pub noise_level: (f64, f64),
    pub superatom_collapse_prob: f64,
}

impl Default for StyleRanges {
    fn default() -> Self {
        let s = StyleParams::default();
        Self {
            image_scale: (s.image_scale, s.image_scale),
            stroke_width_px: (s.stroke_width_px, s.stroke_width_px),
            font_scale: (s.font_scale, s.font_scale),
            rotation_deg: (0.0, 0.0),
            noise_kind: NoiseKind::None,
            noise_level: (0.0, 0.0),
            superatom_collapse_prob: 0.0,
        }
    }
}

impl StyleRanges {
    /// A style drawn from the ranges; deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> StyleParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5747_1e00);
        let mut real = |(lo, hi): (f64, f64)| if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let image_scale = real(self.image_scale);
        let font_scale = real(self.font_scale);
        let rotation_deg = real(self.rotation_deg);
        let level = real(self.noise_level);
        let (lo, hi) = self.stroke_width_px;
        let stroke_width_px = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        StyleParams {
            image_scale,
            stroke_width_px,
            font_scale,
            rotation_deg,
            noise: Noise {
                kind: self.noise_kind,
                level,
            },
            superatom_collapse_prob: self.superatom_collapse_prob,
            seed,
            ..StyleParams::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum DepictError {
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error("{given} coordinates for {atoms} atoms")]
    CoordinateCount { given: usize, atoms: usize },
    #[error("image of {width}x{height} exceeds the {max}x{max} limit")]
    TooLarge { width: u64, height: u64, max: u32 },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("image encoding failed: {0}")]
    Encode(String),
}

/// A rendered molecule with its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Depiction {
    pub width: u32,
    pub height: u32,
    /// Row-major 8-bit grayscale, 255 = white.
    pub pixels: Vec<u8>,
    pub annotations: Vec<Detection>,
    pub style: StyleParams,
    /// Pairs of crossing bonds in the drawn layout, as source bond ids.
    pub crossings: Vec<(usize, usize)>,
    /// Number of collapsed super-group nodes.
    pub groups: usize,
}

impl Depiction {
    /// The annotations in the detection interchange format.
    pub fn annotation_json(&self) -> String {
        DetectionSet {
            width: self.width,
            height: self.height,
            detections: self.annotations.clone(),
        }
        .to_json()
    }

    pub fn to_png(&self) -> Result<Vec<u8>, DepictError> {
        encode_png(self.width, self.height, &self.pixels)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        encode_pgm(self.width, self.height, &self.pixels)
    }
}

pub fn encode_png(width: u32, height: u32, pixels: &[u8]) -> Result<Vec<u8>, DepictError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| DepictError::Encode(e.to_string()))?;
        w.write_image_data(pixels)
            .map_err(|e| DepictError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Binary PGM (P5).
pub fn encode_pgm(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(pixels.len() + 20);
    write!(out, "P5\n{width} {height}\n255\n").expect("write to vec");
    out.extend_from_slice(pixels);
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Normal,
    Sub,
    Sup,
}

/// The text drawn for an atom, if any, and the index of the character
/// that sits on the atom position.
fn label_for(
    g: &MolGraph,
    a: usize,
    coords: &[Point],
    adj: &[Vec<(usize, usize)>],
    table: &FragmentTable,
) -> Option<(Vec<(char, Role)>, usize)> {
    let atom = g.atom(a);
    // neighbours all to the right: write the label right to left
    let leftward =
        !adj[a].is_empty() && adj[a].iter().all(|&(v, _)| coords[v].x - coords[a].x > 0.1);
    if let Element::Other(key) = &atom.element {
        let role = |c: char| {
            if c.is_ascii_digit() {
                Role::Sub
            } else {
                Role::Normal
            }
        };
        let text = if leftward {
            mirrored_key(key, table)
        } else {
            None
        };
        let chars: Vec<(char, Role)> = text
            .as_deref()
            .unwrap_or(key)
            .chars()
            .map(|c| (c, role(c)))
            .collect();
        let main = match text {
            Some(_) => chars
                .iter()
                .rposition(|&(_, r)| r == Role::Normal)
                .unwrap_or(0),
            None => 0,
        };
        return Some((chars, main));
    }
    let h = g.implicit_hydrogen_count(a);
    let q = atom.formal_charge;
    if atom.element == Element::C && q == 0 && !adj[a].is_empty() {
        return None;
    }
    let mut hs = Vec::new();
    if h > 0 {
        hs.push(('H', Role::Normal));
        if h > 1 {
            hs.extend(h.to_string().chars().map(|c| (c, Role::Sub)));
        }
    }
    let mut charge = Vec::new();
    if q != 0 {
        if q.abs() > 1 {
            charge.extend(q.unsigned_abs().to_string().chars().map(|c| (c, Role::Sup)));
        }
        charge.push((if q > 0 { '+' } else { '-' }, Role::Sup));
    }
    let sym: Vec<(char, Role)> = atom
        .element
        .symbol()
        .chars()
        .map(|c| (c, Role::Normal))
        .collect();
    let h_first = leftward && !hs.is_empty();
    let mut out = Vec::new();
    let main;
    if h_first {
        out.extend(hs);
        main = out.len();
        out.extend(sym);
    } else {
        main = 0;
        out.extend(sym);
        out.extend(hs);
    }
    out.extend(charge);
    Some((out, main))
}

/// The right-to-left spelling of a group label, if it reads back as the
/// same group.
fn mirrored_key(key: &str, table: &FragmentTable) -> Option<String> {
    let m = grammar::tokenize(key, table)?.mirrored();
    if m == key {
        return None;
    }
    let marked = |t: TextInterpretation| match t {
        TextInterpretation::SuperGroup {
            mut fragment,
            attachments,
            ..
        } => {
            for att in attachments {
                let star = fragment.add_atom(Atom::new(Element::Other("*".into())));
                fragment.add_bond(att, star, BondKind::Single).ok()?;
            }
            Some(fragment)
        }
        _ => None,
    };
    let a = marked(parse_label(key, table))?;
    let b = marked(parse_label(&m, table))?;
    is_isomorphic(&a, &b, Strictness::OrderOnly).then_some(m)
}

fn label_string(chars: &[(char, Role)]) -> String {
    chars.iter().map(|&(c, _)| c).collect()
}

/// Polylines of a label, in pixels, with the main character centered on `at`.
fn label_strokes(chars: &[(char, Role)], main: usize, at: Point, cap: f64) -> Vec<Vec<Point>> {
    let u = cap / 6.0;
    let small = 0.65;
    let mut placed = Vec::new();
    let mut x = 0.0;
    let mut main_center = 0.0;
    for (i, &(c, role)) in chars.iter().enumerate() {
        let k = if role == Role::Normal { 1.0 } else { small };
        let gl = glyphs::glyph(c);
        let dy = match role {
            Role::Normal => 0.0,
            Role::Sub => 6.0 * u * (1.0 - small) + 0.3 * cap,
            Role::Sup => -0.25 * cap,
        };
        if i == main {
            main_center = x + gl.advance * u * k / 2.0;
        }
        let advance = gl.advance;
        placed.push((gl, x, dy, k));
        x += (advance + 1.5) * u * k;
    }
    let ox = at.x - main_center;
    let oy = at.y - cap / 2.0;
    let mut out = Vec::new();
    for (gl, gx, dy, k) in placed {
        for s in gl.strokes {
            out.push(
                s.iter()
                    .map(|&(px, py)| Point::new(ox + gx + px * u * k, oy + dy + py * u * k))
                    .collect(),
            );
        }
    }
    out
}

#[derive(Clone, Copy, Default)]
struct Extent {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Extent {
    fn empty() -> Self {
        Extent {
            x0: f64::INFINITY,
            y0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y1: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, p: Point, r: f64) {
        self.x0 = self.x0.min(p.x - r);
        self.y0 = self.y0.min(p.y - r);
        self.x1 = self.x1.max(p.x + r);
        self.y1 = self.y1.max(p.y + r);
    }

    fn union(&mut self, o: &Extent) {
        self.x0 = self.x0.min(o.x0);
        self.y0 = self.y0.min(o.y0);
        self.x1 = self.x1.max(o.x1);
        self.y1 = self.y1.max(o.y1);
    }

    fn grow(&self, m: f64) -> Extent {
        Extent {
            x0: self.x0 - m,
            y0: self.y0 - m,
            x1: self.x1 + m,
            y1: self.y1 + m,
        }
    }
}

enum Prim {
    Line(Point, Point, f64),
    Poly(Vec<Point>, f64),
    Fill(Vec<Point>),
}

impl Prim {
    fn extent(&self) -> Extent {
        let mut e = Extent::empty();
        match self {
            Prim::Line(a, b, w) => {
                e.add(*a, w / 2.0);
                e.add(*b, w / 2.0);
            }
            Prim::Poly(pts, w) => pts.iter().for_each(|p| e.add(*p, w / 2.0)),
            Prim::Fill(pts) => pts.iter().for_each(|p| e.add(*p, 0.5)),
        }
        e
    }

    fn shifted(&self, d: Point) -> Prim {
        match self {
            Prim::Line(a, b, w) => Prim::Line(a.add(d), b.add(d), *w),
            Prim::Poly(pts, w) => Prim::Poly(pts.iter().map(|p| p.add(d)).collect(), *w),
            Prim::Fill(pts) => Prim::Fill(pts.iter().map(|p| p.add(d)).collect()),
        }
    }

    fn draw(&self, c: &mut Canvas) {
        match self {
            Prim::Line(a, b, w) => c.line(*a, *b, *w),
            Prim::Poly(pts, w) => c.polyline(pts, *w),
            Prim::Fill(pts) => c.fill_convex(pts),
        }
    }
}

fn bond_prims(
    kind: BondKind,
    a: Point,
    b: Point,
    scale: f64,
    stroke: f64,
    ring_side: Option<Point>,
) -> Vec<Prim> {
    let d = b.sub(a);
    let len = d.norm().max(1e-9);
    let dir = d.scale(1.0 / len);
    let perp = Point::new(-dir.y, dir.x);
    let gap = 0.18 * scale;
    match kind {
        BondKind::Single => vec![Prim::Line(a, b, stroke)],
        BondKind::Double => match ring_side {
            // inner line of a ring double bond, shortened at both ends
            Some(toward) => {
                let side = if toward.sub(a).x * perp.x + toward.sub(a).y * perp.y >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                let off = perp.scale(side * gap);
                let trim = dir.scale(0.15 * len);
                vec![
                    Prim::Line(a, b, stroke),
                    Prim::Line(a.add(off).add(trim), b.add(off).sub(trim), stroke),
                ]
            }
            None => {
                let off = perp.scale(gap / 2.0);
                vec![
                    Prim::Line(a.add(off), b.add(off), stroke),
                    Prim::Line(a.sub(off), b.sub(off), stroke),
                ]
            }
        },
        BondKind::Triple => {
            let off = perp.scale(gap);
            vec![
                Prim::Line(a, b, stroke),
                Prim::Line(a.add(off), b.add(off), stroke),
                Prim::Line(a.sub(off), b.sub(off), stroke),
            ]
        }
        BondKind::WedgeUp => {
            let w = perp.scale(0.12 * scale);
            vec![Prim::Fill(vec![a, b.add(w), b.sub(w)])]
        }
        BondKind::WedgeDown => {
            let n = ((len / (0.12 * scale)).round() as usize).clamp(4, 12);
            (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) / n as f64;
                    let c = a.lerp(b, t);
                    let w = perp.scale(0.12 * scale * t + stroke / 2.0);
                    Prim::Line(c.add(w), c.sub(w), stroke.max(1.0) * 0.75)
                })
                .collect()
        }
        BondKind::Wavy => {
            let n = 48;
            let amp = 0.07 * scale;
            let pts = (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let s = (t * 2.0 * std::f64::consts::PI * 3.0).sin();
                    a.lerp(b, t).add(perp.scale(amp * s))
                })
                .collect();
            vec![Prim::Poly(pts, stroke)]
        }
    }
}

/// Centroid of the smallest ring containing bond `b`, if it is a ring bond.
fn ring_centers(g: &MolGraph, coords: &[Point]) -> Vec<Option<Point>> {
    let mut out: Vec<Option<(usize, Point)>> = vec![None; g.bond_count()];
    for ring in crate::chemgraph::rings::smallest_rings(g, None) {
        let c = ring
            .atoms
            .iter()
            .fold(Point::new(0.0, 0.0), |s, &a| s.add(coords[a]))
            .scale(1.0 / ring.len() as f64);
        for &bi in &ring.bonds {
            if out[bi].is_none_or(|(n, _)| ring.len() < n) {
                out[bi] = Some((ring.len(), c));
            }
        }
    }
    out.into_iter().map(|o| o.map(|(_, c)| c)).collect()
}

fn to_bbox(e: &Extent, w: f64, h: f64) -> BBox {
    BBox::new(e.x0.max(0.0), e.y0.max(0.0), e.x1.min(w), e.y1.min(h))
}

/// Renders `graph` at layout coordinates `coords` (bond length 1).
///
/// Annotation `truth_ids` are indices into `graph`. Group labels are
/// spelled with the built-in fragment table.
pub fn render_depiction(
    graph: &MolGraph,
    coords: &[Point],
    style: &StyleParams,
) -> Result<Depiction, DepictError> {
    render_with_table(graph, coords, style, &FragmentTable::builtin())
}

/// [`render_depiction`] with the table used to spell mirrored group labels.
pub fn render_with_table(
    graph: &MolGraph,
    coords: &[Point],
    style: &StyleParams,
    table: &FragmentTable,
) -> Result<Depiction, DepictError> {
    style.validate()?;
    if coords.len() != graph.atom_count() {
        return Err(DepictError::CoordinateCount {
            given: coords.len(),
            atoms: graph.atom_count(),
        });
    }
    let scale = style.image_scale;
    let stroke = style.stroke_width_px as f64;
    let margin_px = 2.0;

    // scale and rotate about the centroid
    let n = coords.len().max(1) as f64;
    let centroid = coords
        .iter()
        .fold(Point::new(0.0, 0.0), |s, p| s.add(*p))
        .scale(1.0 / n);
    let (sin, cos) = style.rotation_deg.to_radians().sin_cos();
    let px: Vec<Point> = coords
        .iter()
        .map(|p| {
            let v = p.sub(centroid).scale(scale);
            Point::new(v.x * cos - v.y * sin, v.x * sin + v.y * cos)
        })
        .collect();

    let adj = graph.adjacency();
    let cap = 0.45 * scale * style.font_scale;
    let glyph_w = (stroke * 0.8).max(1.0);

    struct AtomDraw {
        class: DetectionClass,
        text: Option<String>,
        strokes: Vec<Vec<Point>>,
        ink: Extent,
    }
    let mut atoms = Vec::with_capacity(graph.atom_count());
    for a in 0..graph.atom_count() {
        match label_for(graph, a, &px, &adj, table) {
            None => {
                let mut ink = Extent::empty();
                ink.add(px[a], stroke * 1.5);
                atoms.push(AtomDraw {
                    class: DetectionClass::C,
                    text: None,
                    strokes: Vec::new(),
                    ink,
                });
            }
            Some((chars, main)) => {
                let strokes = label_strokes(&chars, main, px[a], cap);
                let mut ink = Extent::empty();
                for s in &strokes {
                    for p in s {
                        ink.add(*p, glyph_w / 2.0);
                    }
                }
                let text = label_string(&chars);
                let plain = DetectionClass::from_element(&graph.atom(a).element)
                    .filter(|c| c.as_str() == text);
                let (class, text) = match plain {
                    Some(c) => (c, None),
                    None => (DetectionClass::Text, Some(text)),
                };
                atoms.push(AtomDraw {
                    class,
                    text,
                    strokes,
                    ink,
                });
            }
        }
    }

    let rings = ring_centers(graph, &px);
    let mut bonds: Vec<(Vec<Prim>, Extent)> = Vec::with_capacity(graph.bond_count());
    for (bi, b) in graph.bonds().iter().enumerate() {
        // ring double bonds get the inner-line style only between bare carbons
        let bare = atoms[b.begin].strokes.is_empty() && atoms[b.end].strokes.is_empty();
        let prims = bond_prims(
            b.kind,
            px[b.begin],
            px[b.end],
            scale,
            stroke,
            rings[bi].filter(|_| bare),
        );
        let mut e = Extent::empty();
        for p in &prims {
            e.union(&p.extent());
        }
        bonds.push((prims, e));
    }

    // canvas from the extents of everything drawn or annotated
    let mut all = Extent::empty();
    for a in &atoms {
        all.union(&a.ink.grow(margin_px));
    }
    for (_, e) in &bonds {
        all.union(&e.grow(margin_px));
    }
    let pad = (0.4 * scale).max(8.0);
    let w = (all.x1 - all.x0 + 2.0 * pad - 1e-6).ceil().max(1.0);
    let h = (all.y1 - all.y0 + 2.0 * pad - 1e-6).ceil().max(1.0);
    if w > style.max_dim as f64 || h > style.max_dim as f64 {
        return Err(DepictError::TooLarge {
            width: w as u64,
            height: h as u64,
            max: style.max_dim,
        });
    }
    let shift = Point::new(pad - all.x0, pad - all.y0);
    let sx = |p: Point| p.add(shift);
    let ext_shift = |e: &Extent| Extent {
        x0: e.x0 + shift.x,
        y0: e.y0 + shift.y,
        x1: e.x1 + shift.x,
        y1: e.y1 + shift.y,
    };

    let mut canvas = Canvas::new(w as usize, h as usize);
    for (prims, _) in &bonds {
        for p in prims {
            p.shifted(shift).draw(&mut canvas);
        }
    }
    let knock = (0.06 * scale).max(2.0);
    for a in &atoms {
        if !a.strokes.is_empty() {
            let e = ext_shift(&a.ink).grow(knock);
            canvas.clear_rect(e.x0, e.y0, e.x1, e.y1);
        }
    }
    for a in &atoms {
        for s in &a.strokes {
            let pts: Vec<Point> = s.iter().map(|p| sx(*p)).collect();
            if pts.len() == 1 {
                canvas.line(pts[0], pts[0], glyph_w);
            } else {
                canvas.polyline(&pts, glyph_w);
            }
        }
    }
    let mut pixels = canvas.to_gray();
    apply_noise(&mut pixels, &style.noise, style.seed);

    let mut annotations = Vec::with_capacity(atoms.len() + bonds.len());
    for (i, a) in atoms.iter().enumerate() {
        // bare vertices get a fixed box of three stroke widths
        let m = if a.strokes.is_empty() { 0.0 } else { margin_px };
        let mut d = Detection::new(a.class, to_bbox(&ext_shift(&a.ink).grow(m), w, h));
        d.text = a.text.clone();
        d.truth_ids = vec![i];
        annotations.push(d);
    }
    for (bi, (b, (_, e))) in graph.bonds().iter().zip(&bonds).enumerate() {
        let mut d = Detection::new(
            DetectionClass::from_bond_kind(b.kind),
            to_bbox(&ext_shift(e).grow(margin_px), w, h),
        )
        .with_endpoints(sx(px[b.begin]), sx(px[b.end]));
        d.truth_ids = vec![bi];
        annotations.push(d);
    }
    Ok(Depiction {
        width: w as u32,
        height: h as u32,
        pixels,
        annotations,
        style: style.clone(),
        crossings: crossing_bonds(graph, coords),
        groups: 0,
    })
}

fn apply_noise(pixels: &mut [u8], noise: &Noise, seed: u64) {
    if noise.level <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e01_5e00);
    match noise.kind {
        NoiseKind::None => {}
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, noise.level * 255.0).expect("finite sigma");
            for p in pixels.iter_mut() {
                let v = *p as f64 + normal.sample(&mut rng);
                *p = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        NoiseKind::SaltPepper => {
            for p in pixels.iter_mut() {
                if rng.gen::<f64>() < noise.level {
                    *p = if rng.gen::<bool>() { 255 } else { 0 };
                }
            }
        }
    }
}

/// Collapse, lay out and render. Annotation `truth_ids` refer to `graph`:
/// a collapsed group lists all its source atoms.
pub fn depict(
    graph: &MolGraph,
    style: &StyleParams,
    table: &FragmentTable,
) -> Result<Depiction, DepictError> {
    style.validate()?;
    let collapsed = collapse_superatoms(graph, table, style.superatom_collapse_prob, style.seed);
    let coords = layout_2d(&collapsed.display)?;
    let mut dep = render_with_table(&collapsed.display, &coords, style, table)?;
    let n_atoms = collapsed.display.atom_count();
    for (i, d) in dep.annotations.iter_mut().enumerate() {
        d.truth_ids = if i < n_atoms {
            collapsed.origin[i].source_atoms()
        } else {
            vec![collapsed.bond_origin[d.truth_ids[0]]]
        };
    }
    for c in &mut dep.crossings {
        *c = (collapsed.bond_origin[c.0], collapsed.bond_origin[c.1]);
    }
    dep.groups = collapsed.group_count();
    Ok(dep)
}
