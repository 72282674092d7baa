//! 2D coordinates: pass-through of stored positions or a constructive
//! layout (regular ring polygons, zigzag chains) followed by overlap repair.

use std::collections::VecDeque;
use std::f64::consts::PI;

use thiserror::Error;

use crate::chemgraph::rings::{fused_systems, smallest_rings};
use crate::chemgraph::{write_smiles, BondKind, MolGraph, Point};

/// Closest allowed approach of any two atoms, in bond lengths.
pub const MIN_ATOM_DISTANCE: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("layout of {molecule} leaves atoms {a} and {b} {distance:.3} bond lengths apart")]
    Overlap {
        molecule: String,
        a: usize,
        b: usize,
        distance: f64,
    },
}

fn unit(theta: f64) -> Point {
    Point::new(theta.cos(), theta.sin())
}

fn angle_of(v: Point) -> f64 {
    v.y.atan2(v.x)
}

fn rotate(v: Point, a: f64) -> Point {
    let (s, c) = a.sin_cos();
    Point::new(v.x * c - v.y * s, v.x * s + v.y * c)
}

fn median_bond_length(g: &MolGraph, coords: &[Point]) -> Option<f64> {
    let mut d: Vec<f64> = g
        .bonds()
        .iter()
        .map(|b| coords[b.begin].dist(coords[b.end]))
        .collect();
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    Some(d[d.len() / 2])
}

/// Smallest distance between any two atoms, with the pair.
pub fn closest_pair(coords: &[Point]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..coords.len() {
        for j in i + 1..coords.len() {
            let d = coords[i].dist(coords[j]);
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// True if the open segments `p1p2` and `q1q2` properly intersect.
pub fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let eps = 1e-9;
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// Pairs of bonds (by index) that share no atom and whose segments cross.
pub fn crossing_bonds(g: &MolGraph, coords: &[Point]) -> Vec<(usize, usize)> {
    let bonds = g.bonds();
    let mut out = Vec::new();
    for i in 0..bonds.len() {
        for j in i + 1..bonds.len() {
            let (a, b) = (bonds[i], bonds[j]);
            if a.touches(b.begin) || a.touches(b.end) {
                continue;
            }
            if segments_cross(
                coords[a.begin],
                coords[a.end],
                coords[b.begin],
                coords[b.end],
            ) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Coordinates for every atom, median bond length 1.
///
/// Stored positions are used (rescaled) when every atom has one and they
/// keep atoms at least [`MIN_ATOM_DISTANCE`] apart; otherwise a layout is
/// computed.
pub fn layout_2d(g: &MolGraph) -> Result<Vec<Point>, LayoutError> {
    if g.atom_count() > 0 && g.atoms().iter().all(|a| a.position.is_some()) {
        let mut coords: Vec<Point> = g
            .atoms()
            .iter()
            .map(|a| a.position.expect("checked"))
            .collect();
        let finite = coords.iter().all(|p| p.x.is_finite() && p.y.is_finite());
        if finite {
            if let Some(m) = median_bond_length(g, &coords).filter(|m| *m > 1e-9) {
                for p in &mut coords {
                    *p = p.scale(1.0 / m);
                }
            }
            if closest_pair(&coords).is_none_or(|(_, _, d)| d >= MIN_ATOM_DISTANCE) {
                return Ok(coords);
            }
        }
        log::warn!("stored coordinates are degenerate; computing a layout instead");
    }
    compute_layout(g)
}

/// Always computes a fresh layout, ignoring stored positions.
pub fn compute_layout(g: &MolGraph) -> Result<Vec<Point>, LayoutError> {
    let n = g.atom_count();
    let mut coords = vec![Point::new(0.0, 0.0); n];
    let mut x_offset = 0.0;
    for comp in g.components() {
        let (sub, map) = g.without_atoms(&(0..n).filter(|a| !comp.contains(a)).collect::<Vec<_>>());
        let mut local = layout_component(&sub);
        let min_x = local.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = local.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let cy = local.iter().map(|p| p.y).sum::<f64>() / local.len() as f64;
        for p in &mut local {
            *p = Point::new(p.x - min_x + x_offset, p.y - cy);
        }
        x_offset += max_x - min_x + 1.5;
        for (old, new) in map.iter().enumerate() {
            if let Some(k) = new {
                coords[old] = local[*k];
            }
        }
    }
    if let Some(m) = median_bond_length(g, &coords).filter(|m| *m > 1e-9) {
        for p in &mut coords {
            *p = p.scale(1.0 / m);
        }
    }
    if let Some((a, b, d)) = closest_pair(&coords) {
        if d < MIN_ATOM_DISTANCE {
            return Err(LayoutError::Overlap {
                molecule: write_smiles(g),
                a,
                b,
                distance: d,
            });
        }
    }
    Ok(coords)
}

struct Placer<'a> {
    g: &'a MolGraph,
    adj: Vec<Vec<(usize, usize)>>,
    pos: Vec<Option<Point>>,
    system_of: Vec<Option<usize>>,
    local: Vec<Vec<(usize, Point)>>,
    turn: Vec<f64>,
    queue: VecDeque<usize>,
}

/// Places the rings of one fused system as regular polygons sharing edges.
fn place_system(ring_atoms: &[&Vec<usize>]) -> Vec<(usize, Point)> {
    let mut pos: Vec<(usize, Point)> = Vec::new();
    let get =
        |pos: &Vec<(usize, Point)>, a: usize| pos.iter().find(|(x, _)| *x == a).map(|(_, p)| *p);
    let mut done = vec![false; ring_atoms.len()];
    // first ring
    let r0 = ring_atoms[0];
    let n0 = r0.len();
    let rad0 = 0.5 / (PI / n0 as f64).sin();
    for (k, &a) in r0.iter().enumerate() {
        let th = PI / 2.0 + 2.0 * PI * k as f64 / n0 as f64;
        pos.push((a, unit(th).scale(rad0)));
    }
    done[0] = true;
    loop {
        let mut progressed = false;
        for (ri, ring) in ring_atoms.iter().enumerate() {
            if done[ri] {
                continue;
            }
            let placed: Vec<usize> = ring
                .iter()
                .copied()
                .filter(|&a| get(&pos, a).is_some())
                .collect();
            if placed.is_empty() {
                continue;
            }
            let n = ring.len();
            let radius = 0.5 / (PI / n as f64).sin();
            let centroid = {
                let s = pos
                    .iter()
                    .fold(Point::new(0.0, 0.0), |acc, (_, p)| acc.add(*p));
                s.scale(1.0 / pos.len() as f64)
            };
            let idx = |a: usize| ring.iter().position(|&x| x == a).expect("ring member");
            let shared_edge = if placed.len() == 2 {
                let (i, j) = (idx(placed[0]), idx(placed[1]));
                if (i + 1) % n == j {
                    Some((placed[0], placed[1]))
                } else if (j + 1) % n == i {
                    Some((placed[1], placed[0]))
                } else {
                    None
                }
            } else {
                None
            };
            if let Some((a, b)) = shared_edge {
                let (pa, pb) = (get(&pos, a).expect("placed"), get(&pos, b).expect("placed"));
                let mid = pa.lerp(pb, 0.5);
                let edge = pb.sub(pa);
                let mut normal = Point::new(-edge.y, edge.x).scale(1.0 / edge.norm().max(1e-12));
                if normal.x * (mid.x - centroid.x) + normal.y * (mid.y - centroid.y) < 0.0 {
                    normal = normal.scale(-1.0);
                }
                let apothem = 0.5 / (PI / n as f64).tan();
                let c = mid.add(normal.scale(apothem));
                let ta = angle_of(pa.sub(c));
                let tb = angle_of(pb.sub(c));
                let mut step = tb - ta;
                while step > PI {
                    step -= 2.0 * PI;
                }
                while step <= -PI {
                    step += 2.0 * PI;
                }
                let i = idx(a);
                for k in 2..n {
                    let atom = ring[(i + k) % n];
                    if get(&pos, atom).is_none() {
                        pos.push((atom, c.add(unit(ta + step * k as f64).scale(radius))));
                    }
                }
            } else if placed.len() == 1 {
                let s = placed[0];
                let ps = get(&pos, s).expect("placed");
                let mut dir = ps.sub(centroid);
                if dir.norm() < 1e-9 {
                    dir = Point::new(1.0, 0.0);
                }
                let dir = dir.scale(1.0 / dir.norm());
                let c = ps.add(dir.scale(radius));
                let ts = angle_of(ps.sub(c));
                let i = idx(s);
                for k in 1..n {
                    let atom = ring[(i + k) % n];
                    pos.push((
                        atom,
                        c.add(unit(ts + 2.0 * PI * k as f64 / n as f64).scale(radius)),
                    ));
                }
            } else {
                // bridged: interpolate each unplaced run between placed atoms
                let start = (0..n)
                    .find(|&k| get(&pos, ring[k]).is_some())
                    .expect("some placed");
                let mut k = 0;
                while k < n {
                    let i = (start + k) % n;
                    let j0 = (i + 1) % n;
                    if get(&pos, ring[j0]).is_some() {
                        k += 1;
                        continue;
                    }
                    let mut run = Vec::new();
                    let mut j = j0;
                    while get(&pos, ring[j]).is_none() {
                        run.push(ring[j]);
                        j = (j + 1) % n;
                    }
                    let (p, q) = (
                        get(&pos, ring[i]).expect("placed"),
                        get(&pos, ring[j]).expect("placed"),
                    );
                    let mid = p.lerp(q, 0.5);
                    let mut out = mid.sub(centroid);
                    if out.norm() < 1e-9 {
                        out = Point::new(0.0, 1.0);
                    }
                    let out = out.scale(1.0 / out.norm());
                    let m = run.len() as f64 + 1.0;
                    for (r, &atom) in run.iter().enumerate() {
                        let t = (r as f64 + 1.0) / m;
                        let bump = (PI * t).sin() * 0.5 * run.len() as f64;
                        pos.push((atom, p.lerp(q, t).add(out.scale(bump))));
                    }
                    k += run.len() + 1;
                }
            }
            done[ri] = true;
            progressed = true;
        }
        if !progressed {
            break;
        }
    }
    pos
}

impl Placer<'_> {
    fn directions_taken(&self, u: usize) -> Vec<f64> {
        let pu = self.pos[u].expect("placed");
        self.adj[u]
            .iter()
            .filter_map(|&(v, _)| self.pos[v].map(|pv| angle_of(pv.sub(pu))))
            .collect()
    }

    fn min_clearance(&self, p: Point, skip: usize) -> f64 {
        self.pos
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .filter_map(|(_, q)| q.map(|q| q.dist(p)))
            .fold(f64::INFINITY, f64::min)
    }

    fn is_linear(&self, u: usize) -> bool {
        let kinds: Vec<BondKind> = self.adj[u]
            .iter()
            .map(|&(_, b)| self.g.bonds()[b].kind)
            .collect();
        kinds.contains(&BondKind::Triple)
            || kinds.iter().filter(|k| **k == BondKind::Double).count() >= 2
    }

    fn new_directions(&self, u: usize, k: usize) -> Vec<f64> {
        let taken = self.directions_taken(u);
        let pu = self.pos[u].expect("placed");
        if taken.is_empty() {
            return match k {
                1 => vec![-PI / 6.0],
                2 => vec![-PI / 6.0, 7.0 * PI / 6.0],
                3 => vec![-PI / 6.0, PI / 2.0, 7.0 * PI / 6.0],
                _ => (0..k).map(|j| 2.0 * PI * j as f64 / k as f64).collect(),
            };
        }
        if taken.len() == 1 && self.system_of[u].is_none() {
            let back = taken[0];
            let inward = back + PI;
            if self.is_linear(u) && k == 1 {
                return vec![inward];
            }
            if k == 1 {
                let preferred = inward + self.turn[u] * PI / 3.0;
                let other = inward - self.turn[u] * PI / 3.0;
                let c1 = self.min_clearance(pu.add(unit(preferred)), u);
                let c2 = self.min_clearance(pu.add(unit(other)), u);
                return vec![if c1 >= 0.8 || c1 >= c2 {
                    preferred
                } else {
                    other
                }];
            }
        }
        // spread the new bonds evenly over the widest free angular gap
        let mut t: Vec<f64> = taken.iter().map(|a| a.rem_euclid(2.0 * PI)).collect();
        t.sort_by(f64::total_cmp);
        let mut best = (0.0, 0.0);
        for i in 0..t.len() {
            let a = t[i];
            let b = if i + 1 < t.len() {
                t[i + 1]
            } else {
                t[0] + 2.0 * PI
            };
            if b - a > best.1 + 1e-9 {
                best = (a, b - a);
            }
        }
        (0..k)
            .map(|j| best.0 + best.1 * (j as f64 + 1.0) / (k as f64 + 1.0))
            .collect()
    }

    fn place_rigid_system(&mut self, sys: usize, anchor: usize, at: Point, incoming: Option<f64>) {
        let local = self.local[sys].clone();
        let la = local
            .iter()
            .find(|(a, _)| *a == anchor)
            .expect("anchor in system")
            .1;
        let rot = match incoming {
            None => 0.0,
            Some(theta) => {
                let nbrs: Vec<Point> = self.adj[anchor]
                    .iter()
                    .filter_map(|&(v, _)| local.iter().find(|(a, _)| *a == v).map(|(_, p)| *p))
                    .collect();
                let mut exo = nbrs
                    .iter()
                    .fold(Point::new(0.0, 0.0), |acc, p| {
                        acc.add(p.sub(la).scale(1.0 / p.sub(la).norm().max(1e-12)))
                    })
                    .scale(-1.0);
                if exo.norm() < 1e-6 {
                    let c = local
                        .iter()
                        .fold(Point::new(0.0, 0.0), |acc, (_, p)| acc.add(*p))
                        .scale(1.0 / local.len() as f64);
                    exo = la.sub(c);
                }
                angle_of(unit(theta + PI)) - angle_of(exo)
            }
        };
        let mut members: Vec<usize> = Vec::new();
        for (a, p) in local {
            if self.pos[a].is_none() {
                self.pos[a] = Some(at.add(rotate(p.sub(la), rot)));
                members.push(a);
            }
        }
        members.sort_unstable();
        self.queue.extend(members);
    }

    fn run(&mut self, root: usize) {
        match self.system_of[root] {
            Some(s) => self.place_rigid_system(s, root, Point::new(0.0, 0.0), None),
            None => {
                self.pos[root] = Some(Point::new(0.0, 0.0));
                self.queue.push_back(root);
            }
        }
        while let Some(u) = self.queue.pop_front() {
            let pu = self.pos[u].expect("queued atoms are placed");
            let mut fresh: Vec<usize> = self.adj[u]
                .iter()
                .map(|&(v, _)| v)
                .filter(|&v| self.pos[v].is_none())
                .collect();
            fresh.sort_unstable();
            fresh.dedup();
            if fresh.is_empty() {
                continue;
            }
            let dirs = self.new_directions(u, fresh.len());
            for (v, theta) in fresh.into_iter().zip(dirs) {
                if self.pos[v].is_some() {
                    continue;
                }
                let pv = pu.add(unit(theta));
                match self.system_of[v] {
                    Some(s) if self.system_of[u] != Some(s) => {
                        self.place_rigid_system(s, v, pv, Some(theta))
                    }
                    _ => {
                        self.pos[v] = Some(pv);
                        let back = angle_of(pu.sub(pv));
                        let inward = back + PI;
                        let preferred = inward + self.turn[u] * PI / 3.0;
                        // continue the zigzag: alternate relative to the turn just taken
                        let took_preferred = (angle_diff(theta, preferred)).abs() < 1e-6;
                        self.turn[v] = if took_preferred {
                            -self.turn[u]
                        } else {
                            self.turn[u]
                        };
                        self.queue.push_back(v);
                    }
                }
            }
        }
    }
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

fn layout_component(g: &MolGraph) -> Vec<Point> {
    let n = g.atom_count();
    if n == 1 {
        return vec![Point::new(0.0, 0.0)];
    }
    let rings = smallest_rings(g, None);
    let systems_idx = fused_systems(&rings);
    let mut systems: Vec<Vec<usize>> = Vec::new();
    let mut local = Vec::new();
    let mut system_of = vec![None; n];
    for sys in &systems_idx {
        // larger rings first gives better fused layouts for mixed sizes
        let mut members: Vec<&Vec<usize>> = sys.iter().map(|&r| &rings[r].atoms).collect();
        members.sort_by(|a, b| b.len().cmp(&a.len()));
        let placed = place_system(&members);
        let sid = systems.len();
        let mut atoms: Vec<usize> = placed.iter().map(|(a, _)| *a).collect();
        atoms.sort_unstable();
        for &a in &atoms {
            system_of[a] = Some(sid);
        }
        systems.push(atoms);
        local.push(placed);
    }
    let adj = g.adjacency();
    let root = match systems
        .iter()
        .enumerate()
        .max_by_key(|(i, s)| (s.len(), std::cmp::Reverse(*i)))
    {
        Some((_, s)) => s[0],
        None => (0..n)
            .max_by_key(|&a| (adj[a].len(), std::cmp::Reverse(a)))
            .expect("non-empty"),
    };
    let mut p = Placer {
        g,
        adj,
        pos: vec![None; n],
        system_of,
        local,
        turn: vec![1.0; n],
        queue: VecDeque::new(),
    };
    p.run(root);
    let mut coords: Vec<Point> = p
        .pos
        .iter()
        .map(|q| q.expect("component fully placed"))
        .collect();
    repair(g, &mut coords);
    coords
}

fn penalty(g: &MolGraph, coords: &[Point], bonded: &[Vec<bool>]) -> f64 {
    let n = coords.len();
    let mut pen = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if bonded[i][j] {
                continue;
            }
            let d = coords[i].dist(coords[j]);
            if d < 0.85 {
                pen += (0.85 - d) * (0.85 - d) + 0.05;
            }
        }
    }
    pen + crossing_bonds(g, coords).len() as f64
}

/// Atoms on the side of bond `b` that contains `start`, without crossing `b`.
fn side(adj: &[Vec<(usize, usize)>], start: usize, b: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(a) = stack.pop() {
        out.push(a);
        for &(v, e) in &adj[a] {
            if e != b && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    out
}

/// Flips and rotates subtrees around acyclic bonds to remove close
/// contacts and crossings; falls back to a force relaxation.
fn repair(g: &MolGraph, coords: &mut [Point]) {
    let n = coords.len();
    let adj = g.adjacency();
    let mut bonded = vec![vec![false; n]; n];
    for b in g.bonds() {
        bonded[b.begin][b.end] = true;
        bonded[b.end][b.begin] = true;
    }
    let ring_mask = crate::chemgraph::rings::ring_bond_mask(g);
    let mut current = penalty(g, coords, &bonded);
    if current <= 0.0 {
        return;
    }
    let moves: [Option<f64>; 5] = [
        None,
        Some(PI / 3.0),
        Some(-PI / 3.0),
        Some(2.0 * PI / 3.0),
        Some(-2.0 * PI / 3.0),
    ];
    for _pass in 0..8 {
        let mut improved = false;
        for (bi, b) in g.bonds().iter().enumerate() {
            if ring_mask[bi] {
                continue;
            }
            let mut s = side(&adj, b.end, bi);
            let (pivot, moving_root) = if s.len() * 2 <= n {
                (b.begin, b.end)
            } else {
                (b.end, b.begin)
            };
            if moving_root != b.end {
                s = side(&adj, b.begin, bi);
            }
            let pp = coords[pivot];
            let axis = coords[moving_root].sub(pp);
            let mut best: Option<(f64, Vec<Point>)> = None;
            for m in moves {
                let mut trial = coords.to_vec();
                for &a in &s {
                    let rel = coords[a].sub(pp);
                    trial[a] = match m {
                        None => {
                            // mirror across the bond axis
                            let ax = axis.scale(1.0 / axis.norm().max(1e-12));
                            let along = ax.scale(rel.x * ax.x + rel.y * ax.y);
                            pp.add(along.scale(2.0).sub(rel))
                        }
                        Some(t) => pp.add(rotate(rel, t)),
                    };
                }
                let p = penalty(g, &trial, &bonded);
                if p + 1e-9 < current && best.as_ref().is_none_or(|(bp, _)| p < *bp) {
                    best = Some((p, trial));
                }
            }
            if let Some((p, trial)) = best {
                coords.copy_from_slice(&trial);
                current = p;
                improved = true;
                if current <= 0.0 {
                    return;
                }
            }
        }
        if !improved {
            break;
        }
    }
    if closest_pair(coords).is_some_and(|(_, _, d)| d < 0.7) {
        relax(g, coords, &bonded);
    }
}

fn relax(g: &MolGraph, coords: &mut [Point], bonded: &[Vec<bool>]) {
    let n = coords.len();
    for _ in 0..400 {
        let mut force = vec![Point::new(0.0, 0.0); n];
        for b in g.bonds() {
            let d = coords[b.end].sub(coords[b.begin]);
            let len = d.norm().max(1e-9);
            let f = d.scale((len - 1.0) / len * 0.5);
            force[b.begin] = force[b.begin].add(f);
            force[b.end] = force[b.end].sub(f);
        }
        for i in 0..n {
            for j in i + 1..n {
                if bonded[i][j] {
                    continue;
                }
                let d = coords[j].sub(coords[i]);
                let len = d.norm().max(1e-6);
                if len < 1.0 {
                    let f = d.scale((1.0 - len) / len * 0.3);
                    force[i] = force[i].sub(f);
                    force[j] = force[j].add(f);
                }
            }
        }
        for i in 0..n {
            coords[i] = coords[i].add(force[i].scale(0.5));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemgraph::{parse_smiles, Atom, Element};

    #[test]
    fn ethane_unit_bond() {
        let c = layout_2d(&parse_smiles("CC").unwrap()).unwrap();
        assert!((c[0].dist(c[1]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn benzene_is_regular_hexagon() {
        let c = layout_2d(&parse_smiles("c1ccccc1").unwrap()).unwrap();
        let center = c
            .iter()
            .fold(Point::new(0.0, 0.0), |a, p| a.add(*p))
            .scale(1.0 / 6.0);
        for k in 0..6 {
            assert!((c[k].dist(c[(k + 1) % 6]) - 1.0).abs() < 0.02);
            assert!((c[k].dist(center) - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn stored_coordinates_pass_through() {
        let mut g = MolGraph::new();
        let a = g.add_atom(Atom::new(Element::C).at(Point::new(0.0, 0.0)));
        let b = g.add_atom(Atom::new(Element::O).at(Point::new(3.0, 4.0)));
        g.add_bond(a, b, BondKind::Single).unwrap();
        let c = layout_2d(&g).unwrap();
        assert!((c[1].x - 0.6).abs() < 1e-12 && (c[1].y - 0.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_coordinates_fall_back() {
        let mut g = parse_smiles("CCC").unwrap();
        for i in 0..3 {
            g.atom_mut(i).position = Some(Point::new(0.0, 0.0));
        }
        let c = layout_2d(&g).unwrap();
        assert!(closest_pair(&c).unwrap().2 >= MIN_ATOM_DISTANCE);
    }

    #[test]
    fn assorted_molecules_lay_out_cleanly() {
        for s in [
            "CC(C)(C)c1ccc(O)cc1",
            "c1ccc2ccccc2c1",
            "C1CCC2(CC1)CCCC2",
            "CC(=O)Oc1ccccc1C(=O)O",
            "CCCCCCCCCCCC",
            "C#CCC(C)(C)C",
            "c1ccc(-c2ccccc2)cc1",
            "CC.O",
            "C1CC2CCC1C2",
            "OC(=O)C(N)CC1=CNC2=CC=CC=C12",
        ] {
            let g = parse_smiles(s).unwrap();
            let c = layout_2d(&g).unwrap_or_else(|e| panic!("{s}: {e}"));
            let med = median_bond_length(&g, &c).unwrap();
            assert!((med - 1.0).abs() < 1e-9, "{s}");
            assert!(closest_pair(&c).unwrap().2 >= MIN_ATOM_DISTANCE, "{s}");
        }
    }

    #[test]
    fn crossing_detection() {
        assert!(segments_cross(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0)
        ));
        assert!(!segments_cross(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0)
        ));
        let g = parse_smiles("CCCCCC").unwrap();
        let c = layout_2d(&g).unwrap();
        assert!(crossing_bonds(&g, &c).is_empty());
    }
}
