//! Convex polygons, centroidal Voronoi tessellations of the unit square and
//! mesh topology.
//!
//! The computational domain is fixed to [0,1]^2. Meshes are produced by Lloyd
//! relaxation of a Voronoi diagram: every cell is the intersection of the
//! unit square with the half-planes bounded by the perpendicular bisectors
//! against the other seeds, so all cells are convex.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Relative length below which clipping collapses an edge; corner geometry
/// (bisectors, pole ladders) needs well separated vertices.
const SHORT_EDGE_REL: f64 = 1e-9;

/// Absolute tolerance for merging coincident corners of adjacent cells.
/// Where four Voronoi cells meet at one point, clipping splits that corner
/// into two vertices separated by rounding noise (observed up to ~1e-8 on
/// converged symmetric tessellations); merging them globally keeps the
/// tessellation conforming, so the merge happens here rather than per cell.
const VERTEX_MERGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive for a left turn.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn normalize(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl core::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl core::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Closed half-plane `{ p : normal . p <= offset }`.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point, offset: f64) -> Self {
        HalfPlane { normal, offset }
    }

    /// Perpendicular bisector between `keep` and `cut`, keeping the side of
    /// `keep`.
    pub fn bisector(keep: Point, cut: Point) -> Self {
        let normal = cut - keep;
        let mid = (keep + cut).scale(0.5);
        HalfPlane {
            normal,
            offset: normal.dot(mid),
        }
    }

    fn signed(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// A strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    area: f64,
    centroid: Point,
    diameter: f64,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".to_string()));
        }
        let n = vertices.len();
        let mut diameter = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(vertices[i].dist(vertices[j]));
            }
        }
        for i in 0..n {
            let d = vertices[i].dist(vertices[(i + 1) % n]);
            if d <= 1e-12 * diameter {
                return Err(Error::InvalidPolygon(format!(
                    "repeated vertices at index {i}"
                )));
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::InvalidPolygon(format!(
                    "not strictly convex/CCW at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        let mut area2 = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let w = a.cross(b);
            area2 += w;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let area = 0.5 * area2;
        if area <= 0.0 {
            return Err(Error::InvalidPolygon("non-positive area".to_string()));
        }
        let centroid = Point::new(cx / (3.0 * area2), cy / (3.0 * area2));
        Ok(Polygon {
            vertices,
            area,
            centroid,
            diameter,
        })
    }

    pub fn unit_square() -> Self {
        Polygon::new(alloc::vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .expect("unit square is a valid polygon")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Point {
        self.centroid
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Edge `i` runs from vertex `i` to vertex `i+1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.dist(b)
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.num_vertices()).map(|i| self.edge_length(i)).sum()
    }

    /// Outward unit normal of edge `i`.
    pub fn outward_normal(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        let t = (b - a).normalize();
        // CCW orientation: outward normal is the tangent rotated -90 deg.
        Point::new(t.y, -t.x)
    }

    /// Unit direction of the exterior angle bisector at vertex `i`.
    pub fn exterior_bisector(&self, i: usize) -> Point {
        let n = self.vertices.len();
        let w = self.vertices[i];
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        let interior = ((prev - w).normalize() + (next - w).normalize()).normalize();
        interior.scale(-1.0)
    }

    /// Largest signed distance of `p` to the edge lines; negative inside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let mut d = f64::NEG_INFINITY;
        for i in 0..self.num_vertices() {
            let (a, b) = self.edge(i);
            let nrm = self.outward_normal(i);
            d = d.max(nrm.dot(p - a));
            let _ = b;
        }
        d
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) <= 1e-12 * self.diameter
    }

    /// Distance from `p` to the boundary polyline.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.num_vertices() {
            let (a, b) = self.edge(i);
            let ab = b - a;
            let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            best = best.min(p.dist(a + ab.scale(t)));
        }
        best
    }
}

/// Successively clip a convex `domain` by half-planes (Sutherland-Hodgman).
///
/// Near-degenerate edges shorter than `1e-9 * diameter` are collapsed before
/// the result is validated.
pub fn clip_cell(halfplanes: &[HalfPlane], domain: &Polygon) -> Result<Polygon> {
    let mut pts: Vec<Point> = domain.vertices().to_vec();
    for hp in halfplanes {
        pts = clip_once(&pts, hp);
        if pts.len() < 3 {
            return Err(Error::EmptyCell);
        }
    }
    let pts = collapse_short_edges(pts);
    if pts.len() < 3 {
        return Err(Error::EmptyCell);
    }
    Polygon::new(pts)
}

fn clip_once(pts: &[Point], hp: &HalfPlane) -> Vec<Point> {
    let mut out = Vec::with_capacity(pts.len() + 1);
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let da = hp.signed(a);
        let db = hp.signed(b);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db <= 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a).scale(t));
        }
    }
    out
}

fn collapse_short_edges(pts: Vec<Point>) -> Vec<Point> {
    let n = pts.len();
    let mut diameter = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max(pts[i].dist(pts[j]));
        }
    }
    let tol = SHORT_EDGE_REL * diameter;
    let mut out: Vec<Point> = Vec::with_capacity(n);
    for p in pts {
        if out.last().is_some_and(|q| q.dist(p) <= tol) {
            continue;
        }
        out.push(p);
    }
    while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

/// Topological edge of a [`Mesh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshEdge {
    /// Endpoint vertex indices, `v.0 < v.1`.
    pub v: (usize, usize),
    /// Adjacent cells; boundary edges have exactly one.
    pub cells: (usize, Option<usize>),
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

/// Conforming tessellation of the unit square by convex polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<MeshEdge>,
    boundary_vertex: Vec<bool>,
    h_max: f64,
}

impl Mesh {
    /// Build and validate a mesh from vertex coordinates and CCW cells.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".to_string()));
        }
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "cell {c} references vertex {v} but only {} vertices exist",
                        vertices.len()
                    )));
                }
            }
        }
        let mut h_max = 0.0f64;
        let mut area_sum = 0.0;
        for (c, cell) in cells.iter().enumerate() {
            let poly = Polygon::new(cell.iter().map(|&v| vertices[v]).collect())
                .map_err(|e| Error::InvalidMesh(format!("cell {c}: {e}")))?;
            h_max = h_max.max(poly.diameter());
            area_sum += poly.area();
        }
        if (area_sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidMesh(format!(
                "cell areas sum to {area_sum}, expected unit-square area 1"
            )));
        }
        let mut edge_map: BTreeMap<(usize, usize), (usize, Option<usize>)> = BTreeMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                let key = (a.min(b), a.max(b));
                match edge_map.get_mut(&key) {
                    None => {
                        edge_map.insert(key, (c, None));
                    }
                    Some((_, second @ None)) => *second = Some(c),
                    Some(_) => {
                        return Err(Error::InvalidMesh(format!(
                            "edge ({}, {}) shared by more than two cells",
                            key.0, key.1
                        )))
                    }
                }
            }
        }
        let edges: Vec<MeshEdge> = edge_map
            .into_iter()
            .map(|(v, cells)| MeshEdge { v, cells })
            .collect();
        let mut boundary_vertex = alloc::vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.v.0] = true;
            boundary_vertex[e.v.1] = true;
        }
        Ok(Mesh {
            vertices,
            cells,
            edges,
            boundary_vertex,
            h_max,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn cell_polygon(&self, c: usize) -> Polygon {
        Polygon::new(self.cells[c].iter().map(|&v| self.vertices[v]).collect())
            .expect("mesh cells are validated polygons")
    }

    /// Index of a cell containing `p`, if any.
    pub fn locate(&self, p: Point) -> Option<usize> {
        (0..self.num_cells()).find(|&c| self.cell_polygon(c).contains(p))
    }
}

/// One Lloyd step: Voronoi cells of `seeds` clipped to the unit square, and
/// the cell centroids as the relaxed seeds.
pub fn lloyd_iteration(seeds: &[Point]) -> Result<(Vec<Polygon>, Vec<Point>)> {
    let cells = voronoi_cells(seeds)?;
    let new_seeds = cells.iter().map(|c| c.centroid()).collect();
    Ok((cells, new_seeds))
}

/// Voronoi cells of `seeds` clipped to the unit square, in seed order.
pub fn voronoi_cells(seeds: &[Point]) -> Result<Vec<Polygon>> {
    let domain = Polygon::unit_square();
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    let mut cells = Vec::with_capacity(seeds.len());
    for i in 0..seeds.len() {
        let s = seeds[i];
        order.sort_by(|&a, &b| {
            let da = seeds[a].dist(s);
            let db = seeds[b].dist(s);
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        let mut pts: Vec<Point> = domain.vertices().to_vec();
        let mut reach = max_dist(&pts, s);
        for &j in order.iter() {
            if j == i {
                continue;
            }
            let d = seeds[j].dist(s);
            // seeds are sorted by distance: once the bisector is beyond the
            // farthest remaining vertex no later seed can cut the cell
            if d > 2.0 * reach {
                break;
            }
            let clipped = clip_once(&pts, &HalfPlane::bisector(s, seeds[j]));
            if clipped.len() < 3 {
                return Err(Error::EmptyCell);
            }
            if clipped.len() != pts.len() || clipped != pts {
                pts = clipped;
                reach = max_dist(&pts, s);
            }
        }
        let pts = collapse_short_edges(pts);
        cells.push(Polygon::new(pts).map_err(|e| {
            Error::InvalidMesh(format!("degenerate Voronoi cell for seed {i}: {e}"))
        })?);
    }
    Ok(cells)
}

fn max_dist(pts: &[Point], s: Point) -> f64 {
    pts.iter().map(|p| p.dist(s)).fold(0.0, f64::max)
}

/// Centroidal Voronoi tessellation of the unit square by Lloyd relaxation
/// from explicitly given seeds.
pub fn cvt_from_seeds(
    seeds: Vec<Point>,
    lloyd_iters: usize,
    move_tol: f64,
) -> Result<Mesh> {
    let mut seeds = seeds;
    let mut cells = voronoi_cells(&seeds)?;
    for _ in 0..lloyd_iters {
        let new_seeds: Vec<Point> = cells.iter().map(|c| c.centroid()).collect();
        let moved = seeds
            .iter()
            .zip(&new_seeds)
            .map(|(a, b)| a.dist(*b))
            .fold(0.0, f64::max);
        seeds = new_seeds;
        cells = voronoi_cells(&seeds)?;
        if moved < move_tol {
            break;
        }
    }
    mesh_from_cells(&cells)
}

/// Centroidal Voronoi tessellation with seeds drawn from a deterministic
/// PRNG stream keyed by `rng_seed`.
pub fn generate_cvt(
    n_cells: usize,
    rng_seed: u64,
    lloyd_iters: usize,
    move_tol: f64,
) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(Error::Precondition("n_cells must be at least 1".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<Point> = (0..n_cells)
        .map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let mut attempts = 0;
    while has_coincident(&seeds) {
        attempts += 1;
        if attempts > 10 {
            return Err(Error::DegenerateSeeds { attempts: 10 });
        }
        for s in seeds.iter_mut() {
            *s = Point::new(
                (s.x + 1e-6 * rng.gen::<f64>()).clamp(0.0, 1.0),
                (s.y + 1e-6 * rng.gen::<f64>()).clamp(0.0, 1.0),
            );
        }
    }
    cvt_from_seeds(seeds, lloyd_iters, move_tol)
}

fn has_coincident(seeds: &[Point]) -> bool {
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            if seeds[i].dist(seeds[j]) < 1e-12 {
                return true;
            }
        }
    }
    false
}

/// Merge coincident corners of per-seed cells into shared mesh vertices.
pub fn mesh_from_cells(cells: &[Polygon]) -> Result<Mesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut index_cells: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    for poly in cells {
        let mut cell = Vec::with_capacity(poly.num_vertices());
        for &p in poly.vertices() {
            let idx = vertices
                .iter()
                .position(|q| q.dist(p) <= VERTEX_MERGE_TOL)
                .unwrap_or_else(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
            cell.push(idx);
        }
        // merging can map two split copies of one corner to the same index
        cell.dedup();
        while cell.len() >= 2 && cell.first() == cell.last() {
            cell.pop();
        }
        if cell.len() < 3 {
            return Err(Error::InvalidMesh(
                "cell degenerates to fewer than 3 distinct vertices".to_string(),
            ));
        }
        index_cells.push(cell);
    }
    Mesh::new(vertices, index_cells)
}
