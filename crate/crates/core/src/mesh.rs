//! Conforming triangulations of a square: criss-cross construction, red
//! refinement and newest-vertex bisection with conformity closure.
//!
//! Every triangle is stored counterclockwise together with the local index
//! of its newest vertex ("peak"). The refinement edge is the edge opposite
//! the peak; local edge `k` always means the edge opposite local vertex `k`.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("number of subdivisions must be at least 1")]
    ZeroSubdivisions,
    #[error("triangle {0} references a vertex out of range")]
    VertexOutOfRange(usize),
    #[error("triangle {0} has non-positive signed area {1}")]
    NonPositiveArea(usize, f64),
    #[error("edge ({0}, {1}) is shared by {2} triangles")]
    NonConforming(usize, usize, usize),
    #[error("triangle index {0} out of range")]
    TriangleOutOfRange(usize),
    #[error("malformed mesh file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

type EdgeKey = (usize, usize);

fn edge_key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn midpoint(p: Point, q: Point) -> Point {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Twice the signed area of `(a, b, c)`.
fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    /// Largest element diameter.
    pub h: f64,
    /// Smallest interior angle in degrees.
    pub min_angle: f64,
    /// Largest ratio of diameter to inradius.
    pub max_shape_ratio: f64,
    pub vertex_count: usize,
    pub triangle_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    boundary_vertex: Vec<bool>,
    generation: Vec<u32>,
}

impl Mesh {
    /// Criss-cross mesh of `(-2, 2)^2` with `n` cells per side.
    pub fn uniform(n: usize) -> Result<Self, MeshError> {
        Self::uniform_on(n, -2.0, 2.0)
    }

    /// Criss-cross mesh of `(lo, hi)^2`: every square cell is split along
    /// its lower-left to upper-right diagonal. The hypotenuse of each right
    /// triangle is its refinement edge.
    pub fn uniform_on(n: usize, lo: f64, hi: f64) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::ZeroSubdivisions);
        }
        let np = n + 1;
        let step = (hi - lo) / n as f64;
        let coord = |i: usize| if i == n { hi } else { lo + step * i as f64 };
        let mut vertices = Vec::with_capacity(np * np);
        let mut boundary_vertex = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([coord(i), coord(j)]);
                boundary_vertex.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        let mut refinement_edge = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let a = j * np + i;
                let b = a + 1;
                let c = b + np;
                let d = a + np;
                // right angle at b and at d respectively
                triangles.push([a, b, c]);
                refinement_edge.push(1);
                triangles.push([a, c, d]);
                refinement_edge.push(2);
            }
        }
        let generation = vec![0; triangles.len()];
        Ok(Mesh {
            vertices,
            triangles,
            refinement_edge,
            boundary_vertex,
            generation,
        })
    }

    /// Builds a mesh from raw arrays. Triangles must be counterclockwise;
    /// the refinement edge of each triangle is its longest edge and
    /// boundary flags are derived from edges with a single neighbor.
    pub fn from_triangles(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange(t));
            }
        }
        let refinement_edge = triangles
            .iter()
            .map(|tri| longest_edge(&vertices, tri))
            .collect();
        let mut mesh = Mesh {
            boundary_vertex: vec![false; vertices.len()],
            generation: vec![0; triangles.len()],
            vertices,
            triangles,
            refinement_edge,
        };
        for t in 0..mesh.triangles.len() {
            let a2 = mesh.signed_area2(t);
            if !(a2 > 0.0) {
                return Err(MeshError::NonPositiveArea(t, 0.5 * a2));
            }
        }
        let incidence = mesh.edge_incidence();
        for (&(a, b), &count) in &incidence {
            if count > 2 {
                return Err(MeshError::NonConforming(a, b, count));
            }
            if count == 1 {
                mesh.boundary_vertex[a] = true;
                mesh.boundary_vertex[b] = true;
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Local index of the refinement edge (equal to the local index of the
    /// newest vertex) per triangle.
    pub fn refinement_edge(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn generation(&self) -> &[u32] {
        &self.generation
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    fn signed_area2(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area2(a, b, c)
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.signed_area2(t)
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn diameters(&self) -> Vec<f64> {
        (0..self.triangles.len()).map(|t| self.diameter(t)).collect()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Number of triangles sharing each edge.
    pub fn edge_incidence(&self) -> HashMap<EdgeKey, usize> {
        let mut incidence = HashMap::with_capacity(self.triangles.len() * 2);
        for tri in &self.triangles {
            for k in 0..3 {
                *incidence
                    .entry(edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]))
                    .or_insert(0) += 1;
            }
        }
        incidence
    }

    /// Checks orientation and conformity: every edge is shared by two
    /// triangles or lies on a side of the bounding box.
    pub fn validate(&self) -> Result<(), MeshError> {
        for t in 0..self.triangles.len() {
            let a2 = self.signed_area2(t);
            if !(a2 > 0.0) {
                return Err(MeshError::NonPositiveArea(t, 0.5 * a2));
            }
        }
        let (lo, hi) = self.bounding_box();
        let on_side = |p: Point, q: Point| {
            (0..2).any(|c| (p[c] == lo[c] && q[c] == lo[c]) || (p[c] == hi[c] && q[c] == hi[c]))
        };
        for (&(a, b), &count) in &self.edge_incidence() {
            let ok = count == 2 || (count == 1 && on_side(self.vertices[a], self.vertices[b]));
            if !ok {
                return Err(MeshError::NonConforming(a, b, count));
            }
        }
        Ok(())
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }

    pub fn metrics(&self) -> MeshMetrics {
        let mut h: f64 = 0.0;
        let mut min_angle = f64::INFINITY;
        let mut max_shape_ratio: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.corners(t);
            let la = dist(b, c);
            let lb = dist(c, a);
            let lc = dist(a, b);
            let diam = la.max(lb).max(lc);
            h = h.max(diam);
            let area = 0.5 * signed_area2(a, b, c);
            let inradius = 2.0 * area / (la + lb + lc);
            max_shape_ratio = max_shape_ratio.max(diam / inradius);
            for (opp, s1, s2) in [(la, lb, lc), (lb, lc, la), (lc, la, lb)] {
                let cos = ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cos.acos().to_degrees());
            }
        }
        MeshMetrics {
            h,
            min_angle,
            max_shape_ratio,
            vertex_count: self.vertices.len(),
            triangle_count: self.triangles.len(),
        }
    }

    /// Red refinement: each triangle is split into four similar children
    /// through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let incidence = self.edge_incidence();
        let mut out = MeshBuilder::new(self, &incidence, self.triangles.len() * 4);
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            let mab = out.midpoint(a, b);
            let mbc = out.midpoint(b, c);
            let mca = out.midpoint(c, a);
            let peak = self.refinement_edge[t];
            let gen = self.generation[t] + 2;
            out.push([a, mab, mca], peak, gen);
            out.push([mab, b, mbc], peak, gen);
            out.push([mca, mbc, c], peak, gen);
            // the middle child is the parent rotated by 180 degrees
            out.push([mab, mbc, mca], (peak + 1) % 3, gen);
        }
        out.finish()
    }

    /// Newest-vertex bisection of the marked triangles. Every marked
    /// triangle is bisected at least once; further bisections are added
    /// until the mesh is conforming again. Untouched triangles keep their
    /// relative order.
    pub fn refine_marked(&self, marked: &[usize]) -> Result<Mesh, MeshError> {
        if let Some(&t) = marked.iter().find(|&&t| t >= self.triangles.len()) {
            return Err(MeshError::TriangleOutOfRange(t));
        }
        if marked.is_empty() {
            return Ok(self.clone());
        }
        let incidence = self.edge_incidence();
        let marked_edges = self.closure(marked);
        let mut out = MeshBuilder::new(self, &incidence, self.triangles.len() + 4 * marked.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            out.bisect(
                *tri,
                self.refinement_edge[t],
                self.generation[t],
                &marked_edges,
            );
        }
        Ok(out.finish())
    }

    fn ref_edge_key(&self, t: usize) -> EdgeKey {
        let tri = self.triangles[t];
        let k = self.refinement_edge[t] as usize;
        edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3])
    }

    /// Smallest edge set containing the refinement edges of the marked
    /// triangles such that any triangle with a marked edge also has its
    /// refinement edge marked.
    fn closure(&self, marked: &[usize]) -> HashSet<EdgeKey> {
        let mut edge_triangles: HashMap<EdgeKey, [usize; 2]> =
            HashMap::with_capacity(self.triangles.len() * 2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let slot = edge_triangles.entry(e).or_insert([usize::MAX; 2]);
                if slot[0] == usize::MAX {
                    slot[0] = t;
                } else {
                    slot[1] = t;
                }
            }
        }
        let mut marked_edges = HashSet::new();
        let mut work = Vec::new();
        let mark = |e: EdgeKey, set: &mut HashSet<EdgeKey>, work: &mut Vec<usize>| {
            if set.insert(e) {
                work.extend(edge_triangles[&e].iter().copied().filter(|&t| t != usize::MAX));
            }
        };
        for &t in marked {
            mark(self.ref_edge_key(t), &mut marked_edges, &mut work);
        }
        while let Some(t) = work.pop() {
            mark(self.ref_edge_key(t), &mut marked_edges, &mut work);
        }
        marked_edges
    }

    /// Writes the plain-text export: `NV NT`, then `x y boundary_flag` per
    /// vertex, then `i j k` per triangle (0-based).
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for (p, &b) in self.vertices.iter().zip(&self.boundary_vertex) {
            writeln!(w, "{:e} {:e} {}", p[0], p[1], u8::from(b))?;
        }
        for [i, j, k] in &self.triangles {
            writeln!(w, "{i} {j} {k}")?;
        }
        Ok(())
    }

    /// Reads the plain-text export back. Refinement edges are reset to the
    /// longest edge of each triangle.
    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh, MeshError> {
        let mut lines = r.lines();
        let mut next = || -> Result<String, MeshError> {
            lines
                .next()
                .ok_or_else(|| MeshError::Parse("unexpected end of file".into()))?
                .map_err(MeshError::from)
        };
        let bad = |l: &str| MeshError::Parse(format!("bad line `{l}`"));
        let header = next()?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(&header)))
            .collect::<Result<_, _>>()?;
        let [nv, nt] = counts[..] else {
            return Err(bad(&header));
        };
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next()?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(&line));
            }
            let x: f64 = f[0].parse().map_err(|_| bad(&line))?;
            let y: f64 = f[1].parse().map_err(|_| bad(&line))?;
            vertices.push([x, y]);
            boundary.push(f[2] == "1");
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = next()?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad(&line)))
                .collect::<Result<_, _>>()?;
            let [i, j, k] = idx[..] else {
                return Err(bad(&line));
            };
            triangles.push([i, j, k]);
        }
        let mut mesh = Mesh::from_triangles(vertices, triangles)?;
        mesh.boundary_vertex = boundary;
        Ok(mesh)
    }
}

fn longest_edge(vertices: &[Point], tri: &[usize; 3]) -> u8 {
    let len = |k: usize| dist(vertices[tri[(k + 1) % 3]], vertices[tri[(k + 2) % 3]]);
    let mut best = 0;
    for k in 1..3 {
        if len(k) > len(best) {
            best = k;
        }
    }
    best as u8
}

/// Accumulates a refined mesh, creating each edge midpoint once.
struct MeshBuilder<'a> {
    incidence: &'a HashMap<EdgeKey, usize>,
    midpoints: HashMap<EdgeKey, usize>,
    vertices: Vec<Point>,
    boundary_vertex: Vec<bool>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    generation: Vec<u32>,
}

impl<'a> MeshBuilder<'a> {
    fn new(mesh: &Mesh, incidence: &'a HashMap<EdgeKey, usize>, capacity: usize) -> Self {
        MeshBuilder {
            incidence,
            midpoints: HashMap::new(),
            vertices: mesh.vertices.clone(),
            boundary_vertex: mesh.boundary_vertex.clone(),
            triangles: Vec::with_capacity(capacity),
            refinement_edge: Vec::with_capacity(capacity),
            generation: Vec::with_capacity(capacity),
        }
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let m = self.vertices.len();
        self.vertices.push(midpoint(self.vertices[a], self.vertices[b]));
        self.boundary_vertex.push(self.incidence.get(&key) == Some(&1));
        self.midpoints.insert(key, m);
        m
    }

    fn push(&mut self, tri: [usize; 3], peak: u8, generation: u32) {
        self.triangles.push(tri);
        self.refinement_edge.push(peak);
        self.generation.push(generation);
    }

    fn bisect(&mut self, tri: [usize; 3], peak: u8, generation: u32, marked: &HashSet<EdgeKey>) {
        let k = peak as usize;
        let v0 = tri[k];
        let v1 = tri[(k + 1) % 3];
        let v2 = tri[(k + 2) % 3];
        if !marked.contains(&edge_key(v1, v2)) {
            self.push(tri, peak, generation);
            return;
        }
        let m = self.midpoint(v1, v2);
        // children keep counterclockwise order; m is the newest vertex
        self.bisect([v0, v1, m], 2, generation + 1, marked);
        self.bisect([v0, m, v2], 1, generation + 1, marked);
    }

    fn finish(self) -> Mesh {
        Mesh {
            vertices: self.vertices,
            triangles: self.triangles,
            refinement_edge: self.refinement_edge,
            boundary_vertex: self.boundary_vertex,
            generation: self.generation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn assert_valid(mesh: &Mesh) {
        mesh.validate().unwrap();
        assert!((mesh.total_area() - 16.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_counts() {
        let m = Mesh::uniform(1).unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(Mesh::uniform(288).unwrap().vertex_count(), 83_521);
        assert_eq!(Mesh::uniform(72).unwrap().vertex_count(), 5_329);
        assert!(matches!(Mesh::uniform(0), Err(MeshError::ZeroSubdivisions)));
    }

    #[test]
    fn uniform_full_size_count() {
        assert_eq!(Mesh::uniform(576).unwrap().vertex_count(), 332_929);
    }

    #[test]
    fn uniform_metrics() {
        let m1 = Mesh::uniform(1).unwrap().metrics();
        assert!((m1.h - 4.0 * SQRT_2).abs() < 1e-14);
        let m2 = Mesh::uniform(2).unwrap().metrics();
        assert!((m2.h - 2.0 * SQRT_2).abs() < 1e-14);
        assert!((m2.min_angle - 45.0).abs() < 1e-9);
        assert_eq!(m2.vertex_count, 9);
        assert_eq!(m2.triangle_count, 8);
        assert_valid(&Mesh::uniform(7).unwrap());
    }

    #[test]
    fn uniform_boundary_flags() {
        let m = Mesh::uniform(4).unwrap();
        for (p, &b) in m.vertices().iter().zip(m.boundary_vertices()) {
            assert_eq!(b, p[0].abs() == 2.0 || p[1].abs() == 2.0);
        }
    }

    #[test]
    fn red_refinement_matches_finer_uniform_mesh() {
        let m = Mesh::uniform(1).unwrap().refine_uniform();
        assert_eq!(m.triangle_count(), 8);
        assert_valid(&m);
        let coarse = Mesh::uniform(72).unwrap();
        let fine = coarse.refine_uniform();
        assert_eq!(fine.vertex_count(), 21_025);
        assert!((fine.metrics().h - coarse.metrics().h / 2.0).abs() < 1e-14);
        assert!((fine.metrics().min_angle - 45.0).abs() < 1e-9);
        assert_valid(&fine);
        // same vertex set as the direct construction
        let direct = Mesh::uniform(144).unwrap();
        let key = |p: &Point| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let mut a: Vec<_> = fine.vertices().iter().map(key).collect();
        let mut b: Vec<_> = direct.vertices().iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        let boundary = fine.boundary_vertices().iter().filter(|&&b| b).count();
        assert_eq!(boundary, 4 * 144);
    }

    #[test]
    fn refine_uniform_vertex_counts_follow_odd_squares() {
        let mut m = Mesh::uniform(3).unwrap();
        let mut n = 3;
        for _ in 0..3 {
            m = m.refine_uniform();
            n *= 2;
            assert_eq!(m.vertex_count(), (n + 1) * (n + 1));
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = Mesh::uniform(3).unwrap();
        assert_eq!(m.refine_marked(&[]).unwrap(), m);
        assert!(matches!(m.refine_marked(&[99]), Err(MeshError::TriangleOutOfRange(99))));
    }

    #[test]
    fn marking_one_triangle_forces_neighbor() {
        // Both triangles share the hypotenuse, so bisecting one bisects the
        // other: four triangles around the center vertex (0, 0).
        let m = Mesh::uniform(1).unwrap();
        let r = m.refine_marked(&[0]).unwrap();
        assert_eq!(r.triangle_count(), 4);
        assert_eq!(r.vertex_count(), 5);
        assert_eq!(r.vertices()[4], [0.0, 0.0]);
        assert!(!r.is_boundary_vertex(4));
        assert_valid(&r);
        assert!(r.generation().iter().all(|&g| g == 1));
        // each child has the new vertex as peak
        for (tri, &k) in r.triangles().iter().zip(r.refinement_edge()) {
            assert_eq!(tri[k as usize], 4);
        }
    }

    #[test]
    fn boundary_midpoints_are_flagged() {
        let m = Mesh::uniform(1).unwrap();
        let r = m.refine_marked(&[0]).unwrap();
        // second round bisects the boundary edges
        let r2 = r.refine_marked(&[0, 1, 2, 3]).unwrap();
        assert_valid(&r2);
        for (p, &b) in r2.vertices().iter().zip(r2.boundary_vertices()) {
            assert_eq!(b, p[0].abs() == 2.0 || p[1].abs() == 2.0, "{p:?}");
        }
    }

    #[test]
    fn closure_keeps_far_triangles() {
        let m = Mesh::uniform(8).unwrap();
        let r = m.refine_marked(&[0]).unwrap();
        assert_valid(&r);
        // the triangle in the opposite corner is untouched
        let far = m.triangles()[m.triangle_count() - 1];
        assert!(r.triangles().contains(&far));
    }

    #[test]
    fn bisection_shrinks_marked_diameters() {
        let m = Mesh::uniform(4).unwrap();
        let marked = [5, 6, 7];
        let before = marked.iter().map(|&t| m.diameter(t)).fold(0.0, f64::max);
        let r = m.refine_marked(&marked).unwrap();
        for t in 0..r.triangle_count() {
            let [a, b, c] = r.corners(t);
            let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
            if marked.iter().any(|&s| inside(&m.corners(s), centroid)) {
                assert!(r.diameter(t) < before);
            }
        }
    }

    fn inside(tri: &[Point; 3], p: Point) -> bool {
        (0..3).all(|k| signed_area2(tri[k], tri[(k + 1) % 3], p) >= 0.0)
    }

    #[test]
    fn random_refinement_sequences_stay_conforming() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut m = Mesh::uniform(rng.gen_range(1..5)).unwrap();
            for _ in 0..rng.gen_range(1..7) {
                let count = rng.gen_range(1..=m.triangle_count().min(6));
                let marked: Vec<usize> =
                    (0..count).map(|_| rng.gen_range(0..m.triangle_count())).collect();
                m = m.refine_marked(&marked).unwrap();
                assert_valid(&m);
                let metrics = m.metrics();
                assert!(metrics.min_angle >= 22.5 - 1e-9);
            }
        }
    }

    #[test]
    fn text_export_round_trip() {
        let m = Mesh::uniform(2).unwrap().refine_marked(&[3]).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: Vec<&str> = text.lines().take(2).collect();
        assert_eq!(first[0], format!("{} {}", m.vertex_count(), m.triangle_count()));
        assert_eq!(first[1], "-2e0 -2e0 1");
        let back = Mesh::read_text(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_vertices(), m.boundary_vertices());
        assert!(Mesh::read_text("2 1\n0 0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn from_triangles_rejects_clockwise() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh::from_triangles(v.clone(), vec![[0, 1, 2]]).is_ok());
        assert!(matches!(
            Mesh::from_triangles(v, vec![[0, 2, 1]]),
            Err(MeshError::NonPositiveArea(0, _))
        ));
    }
}
