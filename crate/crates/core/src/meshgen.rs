//! Mesh families on the unit square.
//!
//! Everything except the uniform grid is built from horizontal vertex lines
//! stitched into strips. A line is either *even* (`x = i/nx`), *odd*
//! (`x = (i + 1/2)/nx` plus both endpoints) or *fine* (`x = i/(2nx)`). Two
//! lines of different parity produce the zig-zag band pattern of isosceles
//! triangles; the two half-width triangles at `x = 0` and `x = 1` are the
//! cut-off elements and never appear in band records.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Vec2};
use crate::mesh::{MeshError, Triangulation};

#[derive(Debug, Error)]
pub enum MeshGenError {
    #[error("invalid row specification: {0}")]
    InvalidRowSpec(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("block out of range: {0}")]
    BlockOutOfRange(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Even,
    Odd,
    Fine,
}

/// Horizontal vertex lines of a row-structured mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSpec {
    pub y_levels: Vec<f64>,
    pub kinds: Vec<LineKind>,
}

impl RowSpec {
    /// Alternating even/odd lines starting with an even line at `y = 0`.
    pub fn alternating(y_levels: Vec<f64>) -> Self {
        let kinds = (0..y_levels.len())
            .map(|i| if i % 2 == 0 { LineKind::Even } else { LineKind::Odd })
            .collect();
        Self { y_levels, kinds }
    }

    /// `ny + 1` equally spaced alternating lines.
    pub fn uniform(ny: usize) -> Self {
        Self::alternating((0..=ny).map(|j| j as f64 / ny as f64).collect())
    }

    fn validate(&self) -> Result<(), MeshGenError> {
        let y = &self.y_levels;
        if y.len() < 2 {
            return Err(MeshGenError::InvalidRowSpec("need at least two levels".into()));
        }
        if y.len() != self.kinds.len() {
            return Err(MeshGenError::InvalidRowSpec(format!(
                "{} levels but {} line kinds",
                y.len(),
                self.kinds.len()
            )));
        }
        if y[0] != 0.0 || *y.last().unwrap() != 1.0 {
            return Err(MeshGenError::InvalidRowSpec("levels must start at 0 and end at 1".into()));
        }
        if let Some(w) = y.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(MeshGenError::InvalidRowSpec(format!(
                "levels not strictly increasing at index {}",
                w + 1
            )));
        }
        Ok(())
    }
}

/// One band: the alternating chain `K_0, K̃_1, K_1, …, K̃_N, K_N` along the
/// straight line Γ carrying the bases of the `K_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// `K_0..K_N`, ordered along `direction_g`.
    pub odd_elements: Vec<usize>,
    /// `K̃_1..K̃_N`; `K̃_i` lies between `K_{i−1}` and `K_i`.
    pub even_elements: Vec<usize>,
    /// Vertex pairs of the Γ edges, ordered along `direction_g`.
    pub gamma_edges: Vec<[usize; 2]>,
    pub length_l: f64,
    pub direction_g: Vec2,
    pub base_h: f64,
    pub height_hbar: f64,
}

impl Band {
    /// Number of `K̃` elements, `N`.
    pub fn n(&self) -> usize {
        self.even_elements.len()
    }

    /// Checks adjacency, straightness and length.
    pub fn validate_structure(&self, tri: &Triangulation) -> Result<(), String> {
        let n = self.even_elements.len();
        if self.odd_elements.len() != n + 1 {
            return Err(format!(
                "{} K elements for {} K̃ elements",
                self.odd_elements.len(),
                n
            ));
        }
        if self.gamma_edges.len() != n + 1 {
            return Err("one Γ edge per K element expected".into());
        }
        let ne = tri.num_triangles();
        let nv = tri.num_vertices();
        if self.odd_elements.iter().chain(&self.even_elements).any(|&t| t >= ne)
            || self.gamma_edges.iter().flatten().any(|&v| v >= nv)
        {
            return Err("element or vertex index out of range".into());
        }
        let shares_edge = |s: usize, t: usize| {
            let a = tri.triangle(s);
            let b = tri.triangle(t);
            a.iter().filter(|v| b.contains(v)).count() == 2
        };
        for i in 1..=n {
            let kt = self.even_elements[i - 1];
            if !shares_edge(kt, self.odd_elements[i - 1]) || !shares_edge(kt, self.odd_elements[i]) {
                return Err(format!("K̃_{i} does not share edges with K_{} and K_{i}", i - 1));
            }
        }
        for (i, e) in self.gamma_edges.iter().enumerate() {
            let k = tri.triangle(self.odd_elements[i]);
            if !k.contains(&e[0]) || !k.contains(&e[1]) {
                return Err(format!("Γ edge {i} is not an edge of K_{i}"));
            }
            if i > 0 && self.gamma_edges[i - 1][1] != e[0] {
                return Err(format!("Γ edges {} and {i} are not consecutive", i - 1));
            }
        }
        let p0 = tri.vertex(self.gamma_edges[0][0]);
        let scale = self.length_l.max(f64::MIN_POSITIVE);
        let mut length = 0.0;
        for e in &self.gamma_edges {
            let (p, q) = (tri.vertex(e[0]), tri.vertex(e[1]));
            length += p.dist(q);
            for r in [p, q] {
                if self.direction_g.cross(r - p0).abs() > 1e-12 * scale {
                    return Err("Γ edges are not collinear".into());
                }
            }
            if (q - p).dot(self.direction_g) <= 0.0 {
                return Err("Γ edges are not ordered along g".into());
            }
        }
        if (length - self.length_l).abs() > 1e-12 * scale {
            return Err(format!("Γ has length {length}, record says {}", self.length_l));
        }
        Ok(())
    }

    /// Full band check: structure plus the maximum-angle pattern (longest
    /// edge of every `K_i` on Γ, maximum angle of every `K̃_i` at a Γ
    /// vertex).
    pub fn validate(&self, tri: &Triangulation) -> Result<(), String> {
        self.validate_structure(tri)?;
        for (i, (&k, e)) in self.odd_elements.iter().zip(&self.gamma_edges).enumerate() {
            let a = tri.max_angle_vertex(k);
            if e.contains(&a) {
                return Err(format!("maximum-angle vertex of K_{i} lies on Γ"));
            }
        }
        for (i, &kt) in self.even_elements.iter().enumerate() {
            let a = tri.max_angle_vertex(kt);
            if !self.gamma_edges[i].contains(&a) || !self.gamma_edges[i + 1].contains(&a) {
                return Err(format!("maximum-angle vertex of K̃_{} is not on Γ", i + 1));
            }
        }
        Ok(())
    }

    /// Vertex of `K̃_i` (1-based `i`) lying on Γ.
    pub fn gamma_vertex(&self, i: usize) -> usize {
        self.gamma_edges[i - 1][1]
    }
}

/// Output of [`row_mesh`].
#[derive(Debug, Clone)]
pub struct RowMesh {
    pub mesh: Triangulation,
    /// One band per strip bounded by an even and an odd line.
    pub bands: Vec<Band>,
    /// Strip index of every element.
    pub strip_of: Vec<usize>,
    /// Boundary cut-off elements.
    pub cutoffs: Vec<usize>,
    pub spec: RowSpec,
    pub nx: usize,
}

pub fn unit_square_uniform(n: usize) -> Result<Triangulation, MeshGenError> {
    if n == 0 {
        return Err(MeshGenError::InvalidParameters("n must be at least 1".into()));
    }
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(Point2::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut t = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(Triangulation::build(v, t)?)
}

/// Which line carries the base of a triangle produced by [`zip`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Base {
    First,
    Second,
}

/// Triangulates the region between two parallel vertex lines, both sorted
/// by the parameter `s` and sharing their first and last parameter values.
/// On equal parameters the line with fewer vertices advances first (the
/// first line on a tie in count).
fn zip(first: &[usize], second: &[usize], s: impl Fn(usize) -> f64) -> Vec<([usize; 3], Base)> {
    let (n1, n2) = (first.len(), second.len());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(n1 + n2);
    while i + 1 < n1 || j + 1 < n2 {
        let advance_first = if i + 1 >= n1 {
            false
        } else if j + 1 >= n2 {
            true
        } else {
            let (a, b) = (s(first[i + 1]), s(second[j + 1]));
            if a != b {
                a < b
            } else {
                n1 <= n2
            }
        };
        if advance_first {
            out.push(([first[i], first[i + 1], second[j]], Base::First));
            i += 1;
        } else {
            out.push(([first[i], second[j + 1], second[j]], Base::Second));
            j += 1;
        }
    }
    out
}

fn orient(v: &[Point2], t: [usize; 3]) -> [usize; 3] {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    if (b - a).cross(c - a) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Integer x numerators over the denominator `2 nx` for a line kind.
fn line_numerators(kind: LineKind, nx: usize) -> Vec<usize> {
    match kind {
        LineKind::Even => (0..=nx).map(|i| 2 * i).collect(),
        LineKind::Odd => {
            let mut v = Vec::with_capacity(nx + 2);
            v.push(0);
            v.extend((0..nx).map(|i| 2 * i + 1));
            v.push(2 * nx);
            v
        }
        LineKind::Fine => (0..=2 * nx).collect(),
    }
}

fn nx_from_base(base_h: f64) -> Result<usize, MeshGenError> {
    if !(base_h > 0.0 && base_h <= 1.0) {
        return Err(MeshGenError::InvalidRowSpec(format!("base_h = {base_h} not in (0, 1]")));
    }
    let nx = (1.0 / base_h).round();
    if (nx * base_h - 1.0).abs() > 1e-12 {
        return Err(MeshGenError::InvalidRowSpec(format!("1/base_h = {} is not an integer", 1.0 / base_h)));
    }
    Ok(nx as usize)
}

/// Row-structured mesh of the unit square with bases of width `base_h`.
pub fn row_mesh(rows: &RowSpec, base_h: f64) -> Result<RowMesh, MeshGenError> {
    rows.validate()?;
    let nx = nx_from_base(base_h)?;
    let denom = (2 * nx) as f64;

    let mut vertices = Vec::new();
    let mut lines: Vec<Vec<usize>> = Vec::with_capacity(rows.y_levels.len());
    for (&y, &kind) in rows.y_levels.iter().zip(&rows.kinds) {
        let ids = line_numerators(kind, nx)
            .into_iter()
            .map(|k| {
                vertices.push(Point2::new(k as f64 / denom, y));
                vertices.len() - 1
            })
            .collect();
        lines.push(ids);
    }

    let mut triangles = Vec::new();
    let mut strip_of = Vec::new();
    let mut cutoffs = Vec::new();
    // (strip, K list, K̃ list) gathered during the zip
    let mut strip_elems: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for s in 0..lines.len() - 1 {
        let (lo, hi) = (&lines[s], &lines[s + 1]);
        let (kl, kh) = (rows.kinds[s], rows.kinds[s + 1]);
        let mut ks = Vec::new();
        let mut kts = Vec::new();
        for (t, base) in zip(lo, hi, |v| vertices[v].x) {
            let id = triangles.len();
            let base_len = match base {
                Base::First => vertices[t[1]].x - vertices[t[0]].x,
                Base::Second => vertices[t[1]].x - vertices[t[2]].x,
            };
            let base_kind = if base == Base::First { kl } else { kh };
            let full = (base_len * nx as f64 - 1.0).abs() < 1e-9;
            let mixed = kl != kh && kl != LineKind::Fine && kh != LineKind::Fine;
            if mixed {
                match (base_kind, full) {
                    (LineKind::Even, _) => ks.push(id),
                    (LineKind::Odd, true) => kts.push(id),
                    _ => cutoffs.push(id),
                }
            } else if base_kind == LineKind::Odd && !full {
                cutoffs.push(id);
            }
            triangles.push(orient(&vertices, t));
            strip_of.push(s);
        }
        strip_elems.push((ks, kts));
    }

    let mesh = Triangulation::build(vertices, triangles)?;
    let mut bands = Vec::new();
    for (s, (ks, kts)) in strip_elems.into_iter().enumerate() {
        if ks.is_empty() {
            continue;
        }
        let gamma_line = if rows.kinds[s] == LineKind::Even { &lines[s] } else { &lines[s + 1] };
        let gamma_edges: Vec<[usize; 2]> = gamma_line.windows(2).map(|w| [w[0], w[1]]).collect();
        let length_l = gamma_edges
            .iter()
            .map(|e| mesh.vertex(e[0]).dist(mesh.vertex(e[1])))
            .sum();
        bands.push(Band {
            odd_elements: ks,
            even_elements: kts,
            gamma_edges,
            length_l,
            direction_g: Vec2::new(1.0, 0.0),
            base_h: 1.0 / nx as f64,
            height_hbar: rows.y_levels[s + 1] - rows.y_levels[s],
        });
    }
    Ok(RowMesh {
        mesh,
        bands,
        strip_of,
        cutoffs,
        spec: rows.clone(),
        nx,
    })
}

/// Babuška-Aziz mesh: `ny` strips of height `1/ny`, bases `1/nx`, one band
/// of length 1 per strip.
pub fn babuska_aziz(nx: usize, ny: usize) -> Result<RowMesh, MeshGenError> {
    if nx == 0 || ny == 0 {
        return Err(MeshGenError::InvalidParameters("nx and ny must be at least 1".into()));
    }
    row_mesh(&RowSpec::uniform(ny), 1.0 / nx as f64)
}

/// Output of [`single_band_mesh`].
#[derive(Debug, Clone)]
pub struct SingleBand {
    pub rows: RowMesh,
    /// Index of the thin strip.
    pub band_strip: usize,
    /// Index into `rows.bands` of the thin band.
    pub band_index: usize,
    /// Largest maximum angle over elements outside the thin strip.
    pub alpha_star: f64,
}

impl SingleBand {
    pub fn mesh(&self) -> &Triangulation {
        &self.rows.mesh
    }

    pub fn band(&self) -> &Band {
        &self.rows.bands[self.band_index]
    }

    /// All elements of the thin strip, cut-offs included.
    pub fn strip_elements(&self) -> Vec<usize> {
        (0..self.rows.strip_of.len())
            .filter(|&t| self.rows.strip_of[t] == self.band_strip)
            .collect()
    }
}

fn single_band_spec(nx: usize, hbar: f64) -> Result<(RowSpec, usize), MeshGenError> {
    if nx == 0 || !(hbar > 0.0) || !(hbar < 0.5 / nx as f64) {
        return Err(MeshGenError::InvalidParameters(format!(
            "need nx ≥ 1 and 0 < hbar < 1/(2 nx); got nx = {nx}, hbar = {hbar}"
        )));
    }
    let below = nx.div_ceil(2);
    let above = (((0.5 - hbar) * nx as f64).round() as usize).max(1);
    let mut y: Vec<f64> = (0..=below).map(|k| 0.5 * k as f64 / below as f64).collect();
    let top = 0.5 + hbar;
    for k in 0..above {
        y.push(top + (1.0 - top) * k as f64 / above as f64);
    }
    y.push(1.0);
    Ok((RowSpec::alternating(y), below))
}

/// Unit square with one thin strip `[1/2, 1/2 + hbar]` and strips of
/// aspect ratio in `[1/2, 2]` elsewhere.
pub fn single_band_mesh(nx: usize, hbar: f64) -> Result<SingleBand, MeshGenError> {
    let (spec, band_strip) = single_band_spec(nx, hbar)?;
    let rows = row_mesh(&spec, 1.0 / nx as f64)?;
    let band_index = rows
        .bands
        .iter()
        .position(|b| (b.height_hbar - hbar).abs() <= 1e-12)
        .expect("thin strip produces a band");
    let alpha_star = (0..rows.mesh.num_triangles())
        .filter(|&t| rows.strip_of[t] != band_strip)
        .map(|t| rows.mesh.geom(t).max_angle)
        .fold(0.0, f64::max);
    Ok(SingleBand {
        rows,
        band_strip,
        band_index,
        alpha_star,
    })
}

/// Output of [`subdivided_band_mesh`].
#[derive(Debug, Clone, Serialize)]
pub struct SubdividedBand {
    #[serde(skip)]
    pub mesh: Triangulation,
    /// The thin `K̃` elements that remain after splitting.
    pub tilde_elements: Vec<usize>,
    /// Number of original elements split at their altitude foot.
    pub split_count: usize,
    /// Elements of the thin strip.
    pub strip_elements: Vec<usize>,
    pub hbar: f64,
    pub base_h: f64,
    /// Largest maximum angle over elements outside the thin strip.
    pub alpha_star: f64,
}

/// Single band in which every element with its longest edge on Γ is split
/// into two right triangles at the foot of its altitude. Γ becomes a fine
/// line, which also splits the elements of the neighbouring strip based
/// on Γ.
pub fn subdivided_band_mesh(nx: usize, hbar: f64) -> Result<SubdividedBand, MeshGenError> {
    let (mut spec, band_strip) = single_band_spec(nx, hbar)?;
    let gamma_level = if spec.kinds[band_strip] == LineKind::Even {
        band_strip
    } else {
        band_strip + 1
    };
    spec.kinds[gamma_level] = LineKind::Fine;
    let rows = row_mesh(&spec, 1.0 / nx as f64)?;
    let mesh = rows.mesh;
    let strip_elements: Vec<usize> = (0..mesh.num_triangles())
        .filter(|&t| rows.strip_of[t] == band_strip)
        .collect();
    let y_gamma = spec.y_levels[gamma_level];
    let base = 1.0 / nx as f64;
    // K̃: thin-strip elements with a full-width base off Γ
    let tilde_elements: Vec<usize> = strip_elements
        .iter()
        .copied()
        .filter(|&t| {
            let tri = mesh.triangle(t);
            let off: Vec<Point2> = tri
                .iter()
                .map(|&v| mesh.vertex(v))
                .filter(|p| p.y != y_gamma)
                .collect();
            off.len() == 2 && ((off[0].x - off[1].x).abs() * nx as f64 - 1.0).abs() < 1e-9
        })
        .collect();
    let alpha_star = (0..mesh.num_triangles())
        .filter(|&t| rows.strip_of[t] != band_strip)
        .map(|t| mesh.geom(t).max_angle)
        .fold(0.0, f64::max);
    Ok(SubdividedBand {
        mesh,
        tilde_elements,
        split_count: 2 * nx,
        strip_elements,
        hbar,
        base_h: base,
        alpha_star,
    })
}

/// Output of [`cluster_mesh`].
#[derive(Debug, Clone, Serialize)]
pub struct ClusterMesh {
    #[serde(skip)]
    pub mesh: Triangulation,
    /// Block and fan elements.
    pub cluster: Vec<usize>,
    /// Diameter of the k×k block, `k√2/n`.
    pub block_diameter: f64,
    /// Diameter of the whole cluster, fan columns included.
    pub diameter: f64,
}

/// Uniform `n`-grid with the k×k cell block whose lower-left cell is
/// `(i, j)` replaced by `rows_in_block` zig-zag rows. The grid columns left
/// and right of the block are re-triangulated by fans joining the block's
/// vertical boundary to the outer grid line.
pub fn cluster_mesh(
    n: usize,
    block: (usize, usize, usize),
    rows_in_block: usize,
) -> Result<ClusterMesh, MeshGenError> {
    let (bi, bj, k) = block;
    if n == 0 || k == 0 || rows_in_block == 0 {
        return Err(MeshGenError::InvalidParameters(
            "n, k and rows_in_block must be at least 1".into(),
        ));
    }
    if bi < 1 || bj < 1 || bi + k > n - 1 || bj + k > n - 1 {
        return Err(MeshGenError::BlockOutOfRange(format!(
            "block ({bi}, {bj}, {k}) needs a one-cell margin inside an {n}×{n} grid"
        )));
    }

    let mut reg = Registry::default();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let nf = n as f64;
    let grid = |reg: &mut Registry, a: usize, b: usize| reg.get(a as f64 / nf, b as f64 / nf);

    for cj in 0..n {
        for ci in 0..n {
            if (bj..bj + k).contains(&cj) && (bi - 1..=bi + k).contains(&ci) {
                continue;
            }
            let v00 = grid(&mut reg, ci, cj);
            let v10 = grid(&mut reg, ci + 1, cj);
            let v11 = grid(&mut reg, ci + 1, cj + 1);
            let v01 = grid(&mut reg, ci, cj + 1);
            tris.push([v00, v10, v11]);
            tris.push([v00, v11, v01]);
        }
    }
    let n_outer = tris.len();

    let r = rows_in_block;
    let yden = (n * r) as f64;
    let line_y = |l: usize| (bj * r + l * k) as f64 / yden;
    let mut lines: Vec<Vec<usize>> = Vec::with_capacity(r + 1);
    for l in 0..=r {
        let odd = l % 2 == 1 && l != r;
        let y = line_y(l);
        let xs: Vec<f64> = if odd {
            let mut xs = vec![bi as f64 / nf];
            xs.extend((bi..bi + k).map(|a| (2 * a + 1) as f64 / (2.0 * nf)));
            xs.push((bi + k) as f64 / nf);
            xs
        } else {
            (bi..=bi + k).map(|a| a as f64 / nf).collect()
        };
        lines.push(xs.into_iter().map(|x| reg.get(x, y)).collect());
    }
    for l in 0..r {
        for (t, _) in zip(&lines[l], &lines[l + 1], |v| reg.points[v].x) {
            tris.push(t);
        }
    }
    let left_block: Vec<usize> = lines.iter().map(|l| l[0]).collect();
    let right_block: Vec<usize> = lines.iter().map(|l| *l.last().unwrap()).collect();
    let left_grid: Vec<usize> = (bj..=bj + k).map(|b| grid(&mut reg, bi - 1, b)).collect();
    let right_grid: Vec<usize> = (bj..=bj + k).map(|b| grid(&mut reg, bi + k + 1, b)).collect();
    for (a, b) in [(&left_grid, &left_block), (&right_block, &right_grid)] {
        for (t, _) in zip(a, b, |v| reg.points[v].y) {
            tris.push(t);
        }
    }

    let vertices = reg.points;
    let tris: Vec<[usize; 3]> = tris.into_iter().map(|t| orient(&vertices, t)).collect();
    let cluster: Vec<usize> = (n_outer..tris.len()).collect();
    let mesh = Triangulation::build(vertices, tris)?;
    let pts: Vec<Point2> = cluster
        .iter()
        .flat_map(|&t| mesh.triangle(t))
        .map(|v| mesh.vertex(v))
        .collect();
    let diameter = crate::geometry::point_set_diameter(&pts);
    Ok(ClusterMesh {
        mesh,
        cluster,
        block_diameter: k as f64 * 2f64.sqrt() / nf,
        diameter,
    })
}

/// Vertex pool keyed by exact coordinate bits.
#[derive(Default)]
struct Registry {
    points: Vec<Point2>,
    index: HashMap<(u64, u64), usize>,
}

impl Registry {
    fn get(&mut self, x: f64, y: f64) -> usize {
        let key = (x.to_bits(), y.to_bits());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.points.push(Point2::new(x, y));
        self.index.insert(key, self.points.len() - 1);
        self.points.len() - 1
    }
}

/// Threshold used by the generators' T¹ guarantees.
pub const DEFAULT_ALPHA0: f64 = 0.9 * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::classify;

    #[test]
    fn uniform_counts() {
        let m = unit_square_uniform(1).unwrap();
        assert_eq!(m.num_triangles(), 2);
        let m = unit_square_uniform(4).unwrap();
        assert_eq!(m.num_triangles(), 32);
        assert_eq!(m.num_vertices(), 25);
        assert!(classify(&m, 0.51 * PI).t2.is_empty());
    }

    #[test]
    fn zip_even_odd_gives_isosceles_pattern() {
        let rm = row_mesh(&RowSpec::alternating(vec![0.0, 0.5, 1.0]), 0.5).unwrap();
        assert_eq!(rm.bands.len(), 2);
        // per strip: nx up, nx-1 down, 2 cut-offs
        assert_eq!(rm.mesh.num_triangles(), 2 * 5);
        for b in &rm.bands {
            b.validate_structure(&rm.mesh).unwrap();
            for &t in b.odd_elements.iter().chain(&b.even_elements) {
                let g = rm.mesh.geom(t);
                assert!((g.area - 0.125).abs() < 1e-15);
            }
        }
        assert_eq!(rm.cutoffs.len(), 4);
    }

    #[test]
    fn ba_band_count() {
        let rm = babuska_aziz(2, 2).unwrap();
        assert_eq!(rm.bands.len(), 2);
        let rm = babuska_aziz(8, 64).unwrap();
        assert_eq!(rm.bands.len(), 64);
        for b in &rm.bands {
            b.validate(&rm.mesh).unwrap();
            assert_eq!(b.n(), 7);
            assert!((b.length_l - 1.0).abs() < 1e-15);
        }
        assert!((rm.mesh.domain_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_band_layout() {
        let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
        let b = sb.band();
        b.validate(sb.mesh()).unwrap();
        assert!((b.length_l - 1.0).abs() < 1e-15);
        assert_eq!(b.base_h, 0.125);
        let strip = sb.strip_elements();
        let c = classify(sb.mesh(), 0.9 * PI);
        assert!(c.t2.iter().all(|t| strip.contains(t)));
        assert_eq!(c.t2.len(), 15);
        assert!(sb.alpha_star <= 0.75 * PI);
        assert!(single_band_mesh(8, 1.0 / 16.0).is_err());
    }

    #[test]
    fn subdivided_counts() {
        let sb = single_band_mesh(8, 1.0 / 512.0).unwrap();
        let sd = subdivided_band_mesh(8, 1.0 / 512.0).unwrap();
        assert_eq!(
            sd.mesh.num_triangles(),
            sb.mesh().num_triangles() + sd.split_count
        );
        assert_eq!(sd.tilde_elements.len(), 7);
        let c = classify(&sd.mesh, 0.9 * PI);
        assert_eq!(c.t2, sd.tilde_elements);
    }

    #[test]
    fn cluster_basic() {
        let cm = cluster_mesh(8, (3, 3, 2), 8).unwrap();
        assert!(cm.mesh.is_edge_connected(&cm.cluster));
        assert_eq!(cm.mesh.boundary_loops(&cm.cluster).len(), 1);
        assert!((cm.block_diameter - 2.0 * 2f64.sqrt() / 8.0).abs() < 1e-15);
        let cm = cluster_mesh(8, (3, 3, 1), 1).unwrap();
        assert!(classify(&cm.mesh, 0.51 * PI).t2.is_empty());
        assert!(matches!(
            cluster_mesh(8, (0, 3, 2), 4),
            Err(MeshGenError::BlockOutOfRange(_))
        ));
    }
}
