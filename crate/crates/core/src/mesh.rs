//! Conforming triangulation container, the T¹/T² split and the native
//! text format.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{tri_metrics, GeometryError, Point2, TriangleGeom};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {tri} references vertex {index} but the mesh has {nv} vertices")]
    InvalidIndex { tri: usize, index: usize, nv: usize },
    #[error("non-conforming triangulation: {0}")]
    NonConforming(String),
    #[error("triangle {0} is inverted (clockwise)")]
    InvertedElement(usize),
    #[error("triangle {tri} is degenerate: {source}")]
    DegenerateElement { tri: usize, source: GeometryError },
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("mesh has no triangles")]
    Empty,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected edge with its one or two incident triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// Sorted vertex pair.
    pub vertices: [usize; 2],
    triangles: [usize; 2],
    count: u8,
}

impl Edge {
    pub fn triangles(&self) -> &[usize] {
        &self.triangles[..self.count as usize]
    }

    pub fn is_boundary(&self) -> bool {
        self.count == 1
    }
}

pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Validated, immutable conforming triangulation of an axis-aligned
/// rectangle.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    geoms: Vec<TriangleGeom>,
    edges: Vec<Edge>,
    edge_index: HashMap<(usize, usize), usize>,
    boundary: Vec<bool>,
    h: f64,
    bbox: [Point2; 2],
}

impl Triangulation {
    /// Validates and indexes a triangulation given counter-clockwise
    /// triangles.
    pub fn build(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(MeshError::InvalidIndex { tri: t, index: i, nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::NonConforming(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
        }
        if let Some(p) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::Parse {
                line: p,
                msg: "non-finite coordinate".into(),
            });
        }

        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for p in &vertices {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let domain_diam = lo.dist(hi);
        check_duplicates(&vertices, 1e-13 * domain_diam)?;

        let mut geoms = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let g = tri_metrics(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]])
                .map_err(|source| MeshError::DegenerateElement { tri: t, source })?;
            if !g.ccw {
                return Err(MeshError::InvertedElement(t));
            }
            geoms.push(g);
        }

        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 2);
        let mut edge_index = HashMap::with_capacity(triangles.len() * 3 / 2 + 2);
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                match edge_index.get(&key) {
                    Some(&e) => {
                        let edge: &mut Edge = &mut edges[e];
                        if edge.count == 2 {
                            return Err(MeshError::NonConforming(format!(
                                "edge ({}, {}) is shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        edge.triangles[1] = t;
                        edge.count = 2;
                    }
                    None => {
                        edge_index.insert(key, edges.len());
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            triangles: [t, usize::MAX],
                            count: 1,
                        });
                    }
                }
            }
        }

        // Every boundary edge must lie on the bounding rectangle; an edge
        // seen once in the interior means a hanging node or a hole.
        let tol = 1e-12 * domain_diam.max(f64::MIN_POSITIVE);
        let on_rect = |p: Point2| {
            (p.x - lo.x).abs() <= tol
                || (p.x - hi.x).abs() <= tol
                || (p.y - lo.y).abs() <= tol
                || (p.y - hi.y).abs() <= tol
        };
        let mut boundary = vec![false; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            let (p, q) = (vertices[e.vertices[0]], vertices[e.vertices[1]]);
            let same_side = ((p.x - lo.x).abs() <= tol && (q.x - lo.x).abs() <= tol)
                || ((p.x - hi.x).abs() <= tol && (q.x - hi.x).abs() <= tol)
                || ((p.y - lo.y).abs() <= tol && (q.y - lo.y).abs() <= tol)
                || ((p.y - hi.y).abs() <= tol && (q.y - hi.y).abs() <= tol);
            if !(on_rect(p) && on_rect(q) && same_side) {
                return Err(MeshError::NonConforming(format!(
                    "edge ({}, {}) has one incident triangle but is interior",
                    e.vertices[0], e.vertices[1]
                )));
            }
            boundary[e.vertices[0]] = true;
            boundary[e.vertices[1]] = true;
        }

        let area: f64 = geoms.iter().map(|g| g.area).sum();
        let rect = (hi.x - lo.x) * (hi.y - lo.y);
        if (area - rect).abs() > 1e-10 * rect {
            return Err(MeshError::NonConforming(format!(
                "element areas sum to {area} but the domain rectangle has area {rect}"
            )));
        }

        let used: HashSet<usize> = triangles.iter().flatten().copied().collect();
        if used.len() != nv {
            return Err(MeshError::NonConforming(format!(
                "{} vertices are not used by any triangle",
                nv - used.len()
            )));
        }

        let h = geoms.iter().map(|g| g.diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            triangles,
            geoms,
            edges,
            edge_index,
            boundary,
            h,
            bbox: [lo, hi],
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn geom(&self, t: usize) -> &TriangleGeom {
        &self.geoms[t]
    }

    pub fn geoms(&self) -> &[TriangleGeom] {
        &self.geoms
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edge_index.get(&edge_key(a, b)).map(|&e| &self.edges[e])
    }

    pub fn is_boundary_vertex(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bbox(&self) -> [Point2; 2] {
        self.bbox
    }

    pub fn domain_area(&self) -> f64 {
        let [lo, hi] = self.bbox;
        (hi.x - lo.x) * (hi.y - lo.y)
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    /// Global vertex index of the maximum-angle vertex of triangle `t`.
    pub fn max_angle_vertex(&self, t: usize) -> usize {
        self.triangles[t][self.geoms[t].max_angle_vertex]
    }

    /// Global (A, B, C) vertex indices of triangle `t`.
    pub fn abc(&self, t: usize) -> [usize; 3] {
        let [a, b, c] = self.geoms[t].abc_indices();
        let tri = self.triangles[t];
        [tri[a], tri[b], tri[c]]
    }

    /// Boundary loops of the union of `elements` (closed vertex cycles).
    pub fn boundary_loops(&self, elements: &[usize]) -> Vec<Vec<usize>> {
        let set: HashSet<usize> = elements.iter().copied().collect();
        // directed boundary edges keyed by their start vertex
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for &t in elements {
            let tri = self.triangles[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = self.edge(a, b).expect("edge of a mesh triangle");
                let inner = e.triangles().iter().filter(|x| set.contains(x)).count();
                if inner == 1 {
                    next.entry(a).or_default().push(b);
                }
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut loops = Vec::new();
        for s in starts {
            while let Some(first) = next.get_mut(&s).and_then(|v| v.pop()) {
                let mut cycle = vec![s];
                let mut cur = first;
                while cur != s {
                    cycle.push(cur);
                    match next.get_mut(&cur).and_then(|v| v.pop()) {
                        Some(n) => cur = n,
                        None => break,
                    }
                }
                loops.push(cycle);
            }
        }
        loops
    }

    /// True if `elements` are connected through shared edges.
    pub fn is_edge_connected(&self, elements: &[usize]) -> bool {
        if elements.is_empty() {
            return true;
        }
        let set: HashSet<usize> = elements.iter().copied().collect();
        let mut seen = HashSet::from([elements[0]]);
        let mut stack = vec![elements[0]];
        while let Some(t) = stack.pop() {
            let tri = self.triangles[t];
            for k in 0..3 {
                let e = self.edge(tri[k], tri[(k + 1) % 3]).unwrap();
                for &n in e.triangles() {
                    if set.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
        seen.len() == set.len()
    }

    /// Writes the native format: `nv nt`, `nv` lines `x y`, `nt` lines of
    /// 0-based indices. Coordinates use shortest round-trip formatting.
    pub fn write_native<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for p in &self.vertices {
            writeln!(w, "{} {}", p.x, p.y)?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_native<R: BufRead>(r: R) -> Result<Self, MeshError> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let mut next_line = |what: &str| -> Result<(usize, String), MeshError> {
            match lines.next() {
                Some((i, Ok(s))) => Ok((i, s)),
                Some((_, Err(e))) => Err(MeshError::Io(e)),
                None => Err(MeshError::Parse {
                    line: 0,
                    msg: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let (ln, header) = next_line("header")?;
        let hdr: Vec<usize> = parse_fields(&header, ln)?;
        if hdr.len() != 2 {
            return Err(MeshError::Parse {
                line: ln,
                msg: "header must be `nv nt`".into(),
            });
        }
        let (nv, nt) = (hdr[0], hdr[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, s) = next_line("vertex")?;
            let c: Vec<f64> = parse_fields(&s, ln)?;
            if c.len() != 2 {
                return Err(MeshError::Parse {
                    line: ln,
                    msg: "vertex line must be `x y`".into(),
                });
            }
            vertices.push(Point2::new(c[0], c[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, s) = next_line("triangle")?;
            let c: Vec<usize> = parse_fields(&s, ln)?;
            if c.len() != 3 {
                return Err(MeshError::Parse {
                    line: ln,
                    msg: "triangle line must be `i0 i1 i2`".into(),
                });
            }
            triangles.push([c[0], c[1], c[2]]);
        }
        Self::build(vertices, triangles)
    }
}

fn parse_fields<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>, MeshError> {
    s.split_whitespace()
        .map(|f| {
            f.parse::<T>().map_err(|_| MeshError::Parse {
                line,
                msg: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

fn check_duplicates(vertices: &[Point2], tol: f64) -> Result<(), MeshError> {
    if tol <= 0.0 {
        return Ok(());
    }
    let cell = |p: Point2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::with_capacity(vertices.len());
    for (i, &p) in vertices.iter().enumerate() {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in list {
                        if vertices[j].dist(p) <= tol {
                            return Err(MeshError::DuplicateVertex(j, i));
                        }
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(i);
    }
    Ok(())
}

/// Partition of the elements by the maximum-angle threshold `alpha0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshClassification {
    pub alpha0: f64,
    /// Elements with maximum angle ≤ alpha0.
    pub t1: Vec<usize>,
    /// Elements with maximum angle > alpha0.
    pub t2: Vec<usize>,
}

impl MeshClassification {
    pub fn num_elements(&self) -> usize {
        self.t1.len() + self.t2.len()
    }

    pub fn t2_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.num_elements()];
        for &t in &self.t2 {
            m[t] = true;
        }
        m
    }
}

pub fn classify(tri: &Triangulation, alpha0: f64) -> MeshClassification {
    let (t2, t1): (Vec<usize>, Vec<usize>) =
        (0..tri.num_triangles()).partition(|&t| tri.geom(t).max_angle > alpha0);
    MeshClassification { alpha0, t1, t2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square_two() -> Triangulation {
        Triangulation::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_two_triangles() {
        let m = square_two();
        assert_eq!(m.num_interior_edges(), 1);
        assert_eq!(m.num_boundary_edges(), 4);
        assert!(m.boundary_flags().iter().all(|&b| b));
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.boundary_loops(&[0, 1]).len(), 1);
    }

    #[test]
    fn hanging_node_rejected() {
        // triangle (0,1,2) with edge 1-2 whose midpoint 4 is used on the other side
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 0.5),
        ];
        let err = Triangulation::build(v, vec![[0, 1, 2], [1, 3, 4], [4, 3, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::NonConforming(_)), "{err}");
    }

    #[test]
    fn overlapping_rejected() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let err = Triangulation::build(v, vec![[0, 1, 2], [0, 2, 3], [0, 1, 3]]).unwrap_err();
        assert!(matches!(err, MeshError::NonConforming(_)), "{err}");
    }

    #[test]
    fn inverted_and_duplicate() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let err = Triangulation::build(v.clone(), vec![[0, 2, 1], [0, 2, 3]]).unwrap_err();
        assert!(matches!(err, MeshError::InvertedElement(0)));
        let mut v2 = v.clone();
        v2.push(Point2::new(1.0, 1e-15));
        let err = Triangulation::build(v2, vec![[0, 1, 2], [0, 2, 3]]).unwrap_err();
        assert!(matches!(err, MeshError::DuplicateVertex(1, 4)));
        let err = Triangulation::build(v, vec![[0, 1, 7]]).unwrap_err();
        assert!(matches!(err, MeshError::InvalidIndex { index: 7, .. }));
    }

    #[test]
    fn native_round_trip_is_bit_exact() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.1 + 0.2, 0.0),
            Point2::new(0.1 + 0.2, 1.0 / 3.0),
            Point2::new(0.0, 1.0 / 3.0),
        ];
        let m = Triangulation::build(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let mut buf = Vec::new();
        m.write_native(&mut buf).unwrap();
        let back = Triangulation::read_native(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        let mut buf2 = Vec::new();
        back.write_native(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Triangulation::read_native("3 1\n0 0\n1 0\n".as_bytes()),
            Err(MeshError::Parse { .. })
        ));
        assert!(matches!(
            Triangulation::read_native("1 x\n".as_bytes()),
            Err(MeshError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn classify_threshold() {
        let m = square_two();
        let c = classify(&m, 0.51 * PI);
        assert!(c.t2.is_empty());
        let c = classify(&m, PI / 3.0 + 1e-9);
        assert_eq!(c.t2, vec![0, 1]);
    }
}
