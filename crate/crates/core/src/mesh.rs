//! Structured meshes on the unit square, the L-shaped domain, the
//! equilateral triangle and the disk of radius 1/2.
//!
//! Triangles are stored counter-clockwise. Local edge `i` of a triangle is
//! the edge opposite local vertex `i`; local edge `i` of a rectangle joins
//! local vertices `i` and `i + 1`. Rectangles start at their lower-left
//! corner.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

pub const DISK_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Triangle,
    Rectangle,
}

impl CellKind {
    pub fn vertex_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Rectangle => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Triangle => "triangle",
            CellKind::Rectangle => "rectangle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Square,
    LShape,
    Triangle,
    Disk,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
            Domain::Triangle => "triangle",
            Domain::Disk => "disk",
        }
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(self) -> [f64; 4] {
        match self {
            Domain::Square => [0.0, 0.0, 1.0, 1.0],
            Domain::LShape => [-1.0, -1.0, 1.0, 1.0],
            Domain::Triangle => {
                let s = 3f64.sqrt() / 2.0;
                [-s, -0.5, s, 1.0]
            }
            Domain::Disk => [-DISK_RADIUS, -DISK_RADIUS, DISK_RADIUS, DISK_RADIUS],
        }
    }

    /// Area of the exact domain (the disk meshes only reach it in the limit).
    pub fn area(self) -> f64 {
        match self {
            Domain::Square => 1.0,
            Domain::LShape => 3.0,
            Domain::Triangle => 3.0 * 3f64.sqrt() / 4.0,
            Domain::Disk => std::f64::consts::PI * DISK_RADIUS * DISK_RADIUS,
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" | "s" => Ok(Domain::Square),
            "lshape" | "l-shape" | "l" => Ok(Domain::LShape),
            "triangle" | "t" => Ok(Domain::Triangle),
            "disk" | "d" => Ok(Domain::Disk),
            other => Err(Error::InvalidArgument(format!(
                "unknown domain tag `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, lower global index first.
    pub vertices: [usize; 2],
    /// Incident cells in order of discovery.
    pub cells: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: CellKind,
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// Global edge index of every local edge of every cell.
    pub cell_edges: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshDiagnostics {
    pub h_max: f64,
    pub vertex_count: usize,
    pub cell_count: usize,
    pub edge_count: usize,
    pub boundary_edge_count: usize,
    pub boundary_vertex_count: usize,
    pub area: f64,
}

impl Mesh {
    /// Builds edge adjacency, boundary flags and `h_max` from a cell list.
    pub fn from_cells(kind: CellKind, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Mesh {
        let nv = kind.vertex_count();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = Vec::with_capacity(nv);
            for i in 0..nv {
                let (a, b) = local_edge_vertices(kind, cell, i);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        cells: Vec::with_capacity(2),
                    });
                    edges.len() - 1
                });
                edges[e].cells.push(c);
                local.push(e);
            }
            cell_edges.push(local);
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }
        let mut mesh = Mesh {
            kind,
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertex,
            h_max: 0.0,
        };
        mesh.h_max = (0..mesh.cells.len())
            .map(|c| mesh.cell_diameter(c))
            .fold(0.0, f64::max);
        mesh
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let pts = self.cell_points(c);
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(dist(pts[i], pts[j]));
            }
        }
        d
    }

    /// Signed area (positive for counter-clockwise cells).
    pub fn cell_area(&self, c: usize) -> f64 {
        polygon_area(&self.cell_points(c))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.boundary_vertex.iter().filter(|&&b| b).count()
    }

    pub fn interior_vertex_count(&self) -> usize {
        self.vertices.len() - self.boundary_vertex_count()
    }

    /// Euler characteristic `V - E + C`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    /// Uniform refinement: red refinement for triangles, four-way split for
    /// rectangles. New midpoints on boundary edges are passed through
    /// `project` so curved boundaries can be followed.
    pub fn refine_with(&self, project: impl Fn(Point) -> Point) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut mid = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let p = self.vertices[e.vertices[0]];
            let q = self.vertices[e.vertices[1]];
            let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            if e.is_boundary() {
                m = project(m);
            }
            mid.push(vertices.len());
            vertices.push(m);
        }
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        match self.kind {
            CellKind::Triangle => {
                for (c, cell) in self.cells.iter().enumerate() {
                    let [a, b, cc] = [cell[0], cell[1], cell[2]];
                    // local edge i is opposite vertex i
                    let m_bc = mid[self.cell_edges[c][0]];
                    let m_ca = mid[self.cell_edges[c][1]];
                    let m_ab = mid[self.cell_edges[c][2]];
                    cells.push(vec![a, m_ab, m_ca]);
                    cells.push(vec![m_ab, b, m_bc]);
                    cells.push(vec![m_ca, m_bc, cc]);
                    cells.push(vec![m_ab, m_bc, m_ca]);
                }
            }
            CellKind::Rectangle => {
                for (c, cell) in self.cells.iter().enumerate() {
                    let e = &self.cell_edges[c];
                    let (m0, m1, m2, m3) = (mid[e[0]], mid[e[1]], mid[e[2]], mid[e[3]]);
                    let p0 = self.vertices[cell[0]];
                    let p2 = self.vertices[cell[2]];
                    let centre = vertices.len();
                    vertices.push([0.5 * (p0[0] + p2[0]), 0.5 * (p0[1] + p2[1])]);
                    cells.push(vec![cell[0], m0, centre, m3]);
                    cells.push(vec![m0, cell[1], m1, centre]);
                    cells.push(vec![centre, m1, cell[2], m2]);
                    cells.push(vec![m3, centre, m2, cell[3]]);
                }
            }
        }
        Mesh::from_cells(self.kind, vertices, cells)
    }

    pub fn refine(&self) -> Mesh {
        self.refine_with(|p| p)
    }

    /// Plain-text dump: header `kind nv nc ne`, then vertices, cells and
    /// edges (`v0 v1 c0 c1 boundary_flag`, `c1 = -1` on the boundary).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.kind.name(),
            self.vertices.len(),
            self.cells.len(),
            self.edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(out, "{:e} {:e}", v[0], v[1]);
        }
        for c in &self.cells {
            let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        for e in &self.edges {
            let c0 = e.cells.first().map_or(-1, |&c| c as i64);
            let c1 = e.cells.get(1).map_or(-1, |&c| c as i64);
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.vertices[0],
                e.vertices[1],
                c0,
                c1,
                u8::from(e.is_boundary())
            );
        }
        out
    }
}

/// Endpoints of local edge `i` of `cell`, in counter-clockwise order.
pub fn local_edge_vertices(kind: CellKind, cell: &[usize], i: usize) -> (usize, usize) {
    match kind {
        CellKind::Triangle => (cell[(i + 1) % 3], cell[(i + 2) % 3]),
        CellKind::Rectangle => (cell[i], cell[(i + 1) % 4]),
    }
}

pub fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

pub fn polygon_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// `m x m` uniform axis-aligned rectangles on the unit square.
pub fn build_square_rect_mesh(m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "subdivision count must be at least 1".into(),
        ));
    }
    let (vertices, idx) = grid_vertices(0.0, 0.0, 1.0 / m as f64, m, m, |_, _| true);
    let mut cells = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            cells.push(vec![
                idx(i, j).unwrap(),
                idx(i + 1, j).unwrap(),
                idx(i + 1, j + 1).unwrap(),
                idx(i, j + 1).unwrap(),
            ]);
        }
    }
    Ok(Mesh::from_cells(CellKind::Rectangle, vertices, cells))
}

/// Triangulations of the square, the L-shaped domain (`m` subdivisions per
/// unit length, diagonals from lower-left to upper-right) and the
/// equilateral triangle (`m` levels of red refinement).
pub fn build_structured_tri_mesh(domain: Domain, m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "refinement parameter must be at least 1".into(),
        ));
    }
    match domain {
        Domain::Square => Ok(split_grid(m, 0.0, 0.0, m, m, |_, _| true)),
        Domain::LShape => {
            // (-1,1)^2 minus the lower-right quadrant [0,1) x (-1,0]
            Ok(split_grid(m, -1.0, -1.0, 2 * m, 2 * m, |i, j| {
                !(i >= m && j < m)
            }))
        }
        Domain::Triangle => {
            let s = 3f64.sqrt() / 2.0;
            let mut mesh = Mesh::from_cells(
                CellKind::Triangle,
                vec![[-s, -0.5], [s, -0.5], [0.0, 1.0]],
                vec![vec![0, 1, 2]],
            );
            for _ in 0..m {
                mesh = mesh.refine();
            }
            Ok(mesh)
        }
        Domain::Disk => Err(Error::InvalidArgument(
            "the disk is meshed by build_disk_tri_mesh".into(),
        )),
    }
}

/// Six-triangle fan of the disk of radius 1/2, refined `level` times with
/// new boundary vertices projected onto the circle.
pub fn build_disk_tri_mesh(level: usize) -> Mesh {
    let mut vertices = vec![[0.0, 0.0]];
    for k in 0..6 {
        let t = std::f64::consts::PI * k as f64 / 3.0;
        vertices.push([DISK_RADIUS * t.cos(), DISK_RADIUS * t.sin()]);
    }
    let cells = (0..6).map(|k| vec![0, 1 + k, 1 + (k + 1) % 6]).collect();
    let mut mesh = Mesh::from_cells(CellKind::Triangle, vertices, cells);
    for _ in 0..level {
        mesh = mesh.refine_with(project_to_circle);
    }
    mesh
}

fn project_to_circle(p: Point) -> Point {
    let r = p[0].hypot(p[1]);
    [p[0] * DISK_RADIUS / r, p[1] * DISK_RADIUS / r]
}

/// Builds the mesh for a domain at a refinement parameter: subdivisions per
/// unit length for the square and L-shape, refinement level otherwise.
pub fn build_domain_mesh(domain: Domain, rectangles: bool, m: usize) -> Result<Mesh> {
    match (domain, rectangles) {
        (Domain::Square, true) => build_square_rect_mesh(m),
        (_, true) => Err(Error::InvalidArgument(format!(
            "rectangle meshes are only available on the square, not `{}`",
            domain.name()
        ))),
        (Domain::Disk, false) => Ok(build_disk_tri_mesh(m)),
        (d, false) => build_structured_tri_mesh(d, m),
    }
}

type GridIndex = Box<dyn Fn(usize, usize) -> Option<usize>>;

/// Vertices of an `nx x ny` cell grid with spacing `step`, keeping only the
/// vertices touched by cells for which `keep(i, j)` holds.
fn grid_vertices(
    x0: f64,
    y0: f64,
    step: f64,
    nx: usize,
    ny: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> (Vec<Point>, GridIndex) {
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            if keep(i, j) {
                for (a, b) in [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)] {
                    used[b * (nx + 1) + a] = true;
                }
            }
        }
    }
    let mut map = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let k = j * (nx + 1) + i;
            if used[k] {
                map[k] = vertices.len();
                vertices.push([x0 + i as f64 * step, y0 + j as f64 * step]);
            }
        }
    }
    let idx = move |i: usize, j: usize| {
        let k = map[j * (nx + 1) + i];
        (k != usize::MAX).then_some(k)
    };
    (vertices, Box::new(idx))
}

fn split_grid(
    m: usize,
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    keep: impl Fn(usize, usize) -> bool + Copy,
) -> Mesh {
    let (vertices, idx) = grid_vertices(x0, y0, 1.0 / m as f64, nx, ny, keep);
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !keep(i, j) {
                continue;
            }
            let v00 = idx(i, j).unwrap();
            let v10 = idx(i + 1, j).unwrap();
            let v11 = idx(i + 1, j + 1).unwrap();
            let v01 = idx(i, j + 1).unwrap();
            cells.push(vec![v00, v10, v11]);
            cells.push(vec![v00, v11, v01]);
        }
    }
    Mesh::from_cells(CellKind::Triangle, vertices, cells)
}

/// Checks the mesh invariants and reports the first violation.
pub fn validate_mesh(mesh: &Mesh) -> Result<MeshDiagnostics> {
    let nv = mesh.kind.vertex_count();
    for (c, cell) in mesh.cells.iter().enumerate() {
        if cell.len() != nv {
            return Err(Error::InvalidMesh(format!(
                "cell {c} has {} vertices, expected {nv}",
                cell.len()
            )));
        }
        if let Some(&v) = cell.iter().find(|&&v| v >= mesh.vertices.len()) {
            return Err(Error::InvalidMesh(format!(
                "cell {c} references missing vertex {v}"
            )));
        }
        let area = mesh.cell_area(c);
        if area <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "negative area {area:e} in cell {c}"
            )));
        }
        if mesh.kind == CellKind::Rectangle {
            let p = mesh.cell_points(c);
            let tol = 1e-12 * mesh.cell_diameter(c);
            let aligned = (p[0][1] - p[1][1]).abs() <= tol
                && (p[1][0] - p[2][0]).abs() <= tol
                && (p[2][1] - p[3][1]).abs() <= tol
                && (p[3][0] - p[0][0]).abs() <= tol;
            if !aligned {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} is not an axis-aligned rectangle"
                )));
            }
        }
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.cells.is_empty() || edge.cells.len() > 2 {
            return Err(Error::InvalidMesh(format!(
                "edge incidence: edge {e} has {} incident cells",
                edge.cells.len()
            )));
        }
    }
    Ok(MeshDiagnostics {
        h_max: mesh.h_max,
        vertex_count: mesh.vertices.len(),
        cell_count: mesh.cells.len(),
        edge_count: mesh.edges.len(),
        boundary_edge_count: mesh.boundary_edge_count(),
        boundary_vertex_count: mesh.boundary_vertex_count(),
        area: mesh.total_area(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rect_mesh_counts() {
        let m1 = build_square_rect_mesh(1).unwrap();
        assert_eq!(
            (m1.cells.len(), m1.vertices.len(), m1.boundary_edge_count()),
            (1, 4, 4)
        );

        // 2x2 grid by hand: 9 vertices, 12 edges (8 boundary, 4 interior)
        let m2 = build_square_rect_mesh(2).unwrap();
        assert_eq!(m2.vertices.len(), 9);
        assert_eq!(m2.edges.len(), 12);
        assert_eq!(m2.edges.iter().filter(|e| !e.is_boundary()).count(), 4);
        assert!(rel(m2.total_area(), 1.0) < 1e-12);

        let m32 = build_square_rect_mesh(32).unwrap();
        assert_eq!(m32.vertices.len(), 1089);
        assert!(rel(m32.h_max, 2f64.sqrt() / 32.0) < 1e-12);
        assert!(build_square_rect_mesh(0).is_err());
    }

    #[test]
    fn tri_mesh_counts() {
        let s = build_structured_tri_mesh(Domain::Square, 1).unwrap();
        assert_eq!(s.cells.len(), 2);
        assert!(rel(s.total_area(), 1.0) < 1e-12);

        let l = build_structured_tri_mesh(Domain::LShape, 1).unwrap();
        assert_eq!(l.cells.len(), 6);
        assert_eq!(l.vertices.len(), 8);
        assert!(rel(l.total_area(), 3.0) < 1e-12);

        let s32 = build_structured_tri_mesh(Domain::Square, 32).unwrap();
        assert!(rel(s32.h_max, 2f64.sqrt() / 32.0) < 1e-12);

        let t = build_structured_tri_mesh(Domain::Triangle, 3).unwrap();
        assert_eq!(t.cells.len(), 64);
        assert!(rel(t.total_area(), Domain::Triangle.area()) < 1e-12);
        assert!(build_structured_tri_mesh(Domain::Square, 0).is_err());
        assert!(build_structured_tri_mesh(Domain::Disk, 2).is_err());
        assert!("hexagon".parse::<Domain>().is_err());
    }

    #[test]
    fn disk_mesh() {
        let d0 = build_disk_tri_mesh(0);
        assert_eq!(d0.cells.len(), 6);
        let mut prev = 0.0;
        for level in 0..5 {
            let d = build_disk_tri_mesh(level);
            validate_mesh(&d).unwrap();
            for (v, p) in d.vertices.iter().enumerate() {
                if d.boundary_vertex[v] {
                    assert!((p[0].hypot(p[1]) - 0.5).abs() < 1e-14);
                }
            }
            // inscribed polygon with 6 * 2^level sides
            let sides = 6.0 * 2f64.powi(level as i32);
            let expected = 0.5 * sides * 0.25 * (2.0 * std::f64::consts::PI / sides).sin();
            let area = d.total_area();
            assert!(rel(area, expected) < 1e-12, "level {level}");
            assert!(area > prev);
            prev = area;
        }
        assert!((prev - std::f64::consts::PI / 4.0).abs() < 2e-3);
    }

    #[test]
    fn euler_and_boundary_counts() {
        let meshes = [
            build_square_rect_mesh(5).unwrap(),
            build_structured_tri_mesh(Domain::Square, 6).unwrap(),
            build_structured_tri_mesh(Domain::LShape, 4).unwrap(),
            build_structured_tri_mesh(Domain::Triangle, 3).unwrap(),
            build_disk_tri_mesh(3),
        ];
        for m in &meshes {
            validate_mesh(m).unwrap();
            assert_eq!(m.euler_characteristic(), 1);
            assert_eq!(m.boundary_edge_count(), m.boundary_vertex_count());
        }
    }

    #[test]
    fn refinement_quadruples_and_halves() {
        for m in [
            build_square_rect_mesh(3).unwrap(),
            build_structured_tri_mesh(Domain::Square, 3).unwrap(),
            build_structured_tri_mesh(Domain::LShape, 2).unwrap(),
            build_structured_tri_mesh(Domain::Triangle, 2).unwrap(),
        ] {
            let r = m.refine();
            validate_mesh(&r).unwrap();
            assert_eq!(r.cells.len(), 4 * m.cells.len());
            assert!(rel(r.h_max, 0.5 * m.h_max) < 1e-12);
            assert!(rel(r.total_area(), m.total_area()) < 1e-12);
        }
    }

    #[test]
    fn validation_errors() {
        let mut flipped = build_square_rect_mesh(2).unwrap();
        flipped.cells[1].reverse();
        let err = validate_mesh(&flipped).unwrap_err().to_string();
        assert!(err.contains("negative area"), "{err}");

        let mut dangling = build_structured_tri_mesh(Domain::Square, 2).unwrap();
        dangling.edges.push(Edge {
            vertices: [0, 8],
            cells: vec![],
        });
        let err = validate_mesh(&dangling).unwrap_err().to_string();
        assert!(err.contains("edge incidence"), "{err}");
    }

    #[test]
    fn text_dump_layout() {
        let m = build_square_rect_mesh(1).unwrap();
        let text = m.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rectangle 4 1 4");
        assert_eq!(lines.len(), 1 + 4 + 1 + 4);
        assert_eq!(lines[5], "0 1 3 2");
        assert!(lines[6..].iter().all(|l| l.ends_with(" -1 1")));
    }
}
