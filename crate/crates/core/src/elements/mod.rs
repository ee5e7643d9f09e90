//! Adini rectangle and Morley-Zienkiewicz triangle.
//!
//! Both elements carry 12 degrees of freedom. The shape functions on a
//! physical cell are obtained by inverting the 12x12 matrix of the degree
//! of freedom functionals applied to a spanning family of the local space.
//! Local order is `(value, d/dx, d/dy)` per vertex, followed for the
//! triangle by the three edge means of the outward normal derivative
//! (edge `i` opposite vertex `i`).

mod adini;
mod dofmap;
mod local;
mod mz;

use std::str::FromStr;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::mesh::{local_edge_vertices, CellKind, Point};
use crate::quadrature::gauss_legendre;

pub use dofmap::{build_dof_map, DofMap, Slot};
pub use local::{local_matrices, local_matrices_on, LocalMatrices};

pub const DOFS: usize = 12;

pub type Mat12 = SMatrix<f64, DOFS, DOFS>;

/// Gauss points used for the edge-mean functional inside the basis
/// construction (exact for the cubic normal derivatives of the local space).
const EDGE_POINTS: usize = 4;
/// Gauss points used when interpolating a general smooth function.
const INTERPOLATION_EDGE_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Adini,
    Mz,
}

impl ElementKind {
    pub fn cell_kind(self) -> CellKind {
        match self {
            ElementKind::Adini => CellKind::Rectangle,
            ElementKind::Mz => CellKind::Triangle,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Adini => "adini",
            ElementKind::Mz => "mz",
        }
    }

    pub fn basis(self) -> Result<ReferenceBasis> {
        match self {
            ElementKind::Adini => Ok(adini_basis()),
            ElementKind::Mz => mz_basis(),
        }
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adini" => Ok(ElementKind::Adini),
            "mz" | "morley-zienkiewicz" => Ok(ElementKind::Mz),
            other => Err(Error::InvalidArgument(format!("unknown element `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofFunctional {
    VertexValue(usize),
    VertexDx(usize),
    VertexDy(usize),
    /// Mean over local edge `i` of the outward normal derivative.
    EdgeMeanNormal(usize),
}

/// Values, gradients and Hessians `(xx, xy, yy)` of 12 functions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValues {
    pub value: [f64; DOFS],
    pub grad: [[f64; 2]; DOFS],
    pub hess: [[f64; 3]; DOFS],
}

impl ShapeValues {
    pub fn zeros() -> Self {
        ShapeValues {
            value: [0.0; DOFS],
            grad: [[0.0; 2]; DOFS],
            hess: [[0.0; 3]; DOFS],
        }
    }

    pub fn laplacian(&self, j: usize) -> f64 {
        self.hess[j][0] + self.hess[j][2]
    }
}

/// Spanning family of a local space on one physical cell.
#[derive(Debug, Clone)]
enum Family {
    Adini(adini::Monomials),
    Mz(mz::Barycentric),
}

impl Family {
    fn eval(&self, p: Point) -> ShapeValues {
        match self {
            Family::Adini(f) => f.eval(p),
            Family::Mz(f) => f.eval(p),
        }
    }
}

/// Shape functions on one physical cell.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub kind: ElementKind,
    pub vertices: Vec<Point>,
    family: Family,
    /// Column `j` holds the spanning-family coefficients of shape function `j`.
    coeffs: Mat12,
}

impl CellBasis {
    pub fn new(kind: ElementKind, vertices: &[Point]) -> Result<CellBasis> {
        let expected = kind.cell_kind().vertex_count();
        if vertices.len() != expected {
            return Err(Error::KindMismatch {
                element: kind.name().into(),
                cells: format!("{}-vertex", vertices.len()),
            });
        }
        let family = match kind {
            ElementKind::Adini => Family::Adini(adini::Monomials::new(vertices)?),
            ElementKind::Mz => Family::Mz(mz::Barycentric::new(vertices)?),
        };
        let functionals = dof_functionals(kind);
        let edge_rule = gauss_legendre(EDGE_POINTS)?;
        let mut dof = Mat12::zeros();
        for (i, f) in functionals.iter().enumerate() {
            let row = apply_to_family(*f, kind, vertices, edge_rule, |p| family.eval(p));
            for k in 0..DOFS {
                dof[(i, k)] = row[k];
            }
        }
        let coeffs = dof
            .try_inverse()
            .filter(|c| c.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Basis(format!("singular {} DOF matrix", kind.name())))?;
        Ok(CellBasis {
            kind,
            vertices: vertices.to_vec(),
            family,
            coeffs,
        })
    }

    /// Shape function values and derivatives at a physical point.
    pub fn eval(&self, p: Point) -> ShapeValues {
        let s = self.family.eval(p);
        let mut out = ShapeValues::zeros();
        for j in 0..DOFS {
            for k in 0..DOFS {
                let c = self.coeffs[(k, j)];
                if c == 0.0 {
                    continue;
                }
                out.value[j] += c * s.value[k];
                for d in 0..2 {
                    out.grad[j][d] += c * s.grad[k][d];
                }
                for d in 0..3 {
                    out.hess[j][d] += c * s.hess[k][d];
                }
            }
        }
        out
    }

    /// Value, gradient and Hessian of `sum_j coeffs[j] * phi_j` at `p`.
    pub fn eval_combination(&self, coeffs: &[f64; DOFS], p: Point) -> (f64, [f64; 2], [f64; 3]) {
        let s = self.eval(p);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for j in 0..DOFS {
            v += coeffs[j] * s.value[j];
            g[0] += coeffs[j] * s.grad[j][0];
            g[1] += coeffs[j] * s.grad[j][1];
            for d in 0..3 {
                h[d] += coeffs[j] * s.hess[j][d];
            }
        }
        (v, g, h)
    }

    /// Outward unit normal of local edge `i`.
    pub fn outward_normal(&self, i: usize) -> [f64; 2] {
        outward_normal(self.kind.cell_kind(), &self.vertices, i)
    }
}

/// Element description on its reference cell.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    pub kind: ElementKind,
    pub dof_functionals: Vec<DofFunctional>,
    pub reference: CellBasis,
}

impl ReferenceBasis {
    pub fn dof_count(&self) -> usize {
        DOFS
    }

    pub fn eval(&self, p: Point) -> ShapeValues {
        self.reference.eval(p)
    }

    pub fn on_cell(&self, vertices: &[Point]) -> Result<CellBasis> {
        CellBasis::new(self.kind, vertices)
    }
}

/// Adini element on `[0,1]^2`: span of P3 and `{x^3 y, x y^3}`.
pub fn adini_basis() -> ReferenceBasis {
    let reference = CellBasis::new(
        ElementKind::Adini,
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    )
    .expect("Adini DOF matrix on the unit square is regular");
    ReferenceBasis {
        kind: ElementKind::Adini,
        dof_functionals: dof_functionals(ElementKind::Adini),
        reference,
    }
}

/// Morley-Zienkiewicz element on the triangle `(0,0), (1,0), (0,1)`: the
/// cubics enriched by the quartic bubbles `l1^2 l2 l3`, `l1 l2^2 l3`,
/// `l1 l2 l3^2`.
pub fn mz_basis() -> Result<ReferenceBasis> {
    let reference = CellBasis::new(ElementKind::Mz, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])?;
    Ok(ReferenceBasis {
        kind: ElementKind::Mz,
        dof_functionals: dof_functionals(ElementKind::Mz),
        reference,
    })
}

pub fn dof_functionals(kind: ElementKind) -> Vec<DofFunctional> {
    let nv = kind.cell_kind().vertex_count();
    let mut out = Vec::with_capacity(DOFS);
    for v in 0..nv {
        out.push(DofFunctional::VertexValue(v));
        out.push(DofFunctional::VertexDx(v));
        out.push(DofFunctional::VertexDy(v));
    }
    if kind == ElementKind::Mz {
        out.extend((0..3).map(DofFunctional::EdgeMeanNormal));
    }
    out
}

pub(crate) fn outward_normal(kind: CellKind, vertices: &[Point], i: usize) -> [f64; 2] {
    let idx: Vec<usize> = (0..vertices.len()).collect();
    let (a, b) = local_edge_vertices(kind, &idx, i);
    let d = [
        vertices[b][0] - vertices[a][0],
        vertices[b][1] - vertices[a][1],
    ];
    let len = d[0].hypot(d[1]);
    [d[1] / len, -d[0] / len]
}

/// Applies one functional to every function of a family evaluated by `eval`.
fn apply_to_family(
    f: DofFunctional,
    kind: ElementKind,
    vertices: &[Point],
    edge_rule: &[(f64, f64)],
    eval: impl Fn(Point) -> ShapeValues,
) -> [f64; DOFS] {
    let mut row = [0.0; DOFS];
    match f {
        DofFunctional::VertexValue(v) => row = eval(vertices[v]).value,
        DofFunctional::VertexDx(v) => {
            let s = eval(vertices[v]);
            for k in 0..DOFS {
                row[k] = s.grad[k][0];
            }
        }
        DofFunctional::VertexDy(v) => {
            let s = eval(vertices[v]);
            for k in 0..DOFS {
                row[k] = s.grad[k][1];
            }
        }
        DofFunctional::EdgeMeanNormal(e) => {
            let cell = kind.cell_kind();
            let idx: Vec<usize> = (0..vertices.len()).collect();
            let (a, b) = local_edge_vertices(cell, &idx, e);
            let nu = outward_normal(cell, vertices, e);
            for &(t, w) in edge_rule {
                let p = lerp(vertices[a], vertices[b], t);
                let s = eval(p);
                for k in 0..DOFS {
                    row[k] += w * (s.grad[k][0] * nu[0] + s.grad[k][1] * nu[1]);
                }
            }
        }
    }
    row
}

/// `(t^k, d/dt t^k, d2/dt2 t^k)`
fn power_derivatives(t: f64, k: i32) -> (f64, f64, f64) {
    let p = |e: i32| if e <= 0 { 1.0 } else { t.powi(e) };
    let kf = f64::from(k);
    (
        p(k),
        if k >= 1 { kf * p(k - 1) } else { 0.0 },
        if k >= 2 {
            kf * (kf - 1.0) * p(k - 2)
        } else {
            0.0
        },
    )
}

pub(crate) fn lerp(p: Point, q: Point, t: f64) -> Point {
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// A function known with its gradient, used for nodal interpolation.
pub trait SmoothFunction {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
}

impl<F, G> SmoothFunction for (F, G)
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    fn value(&self, p: Point) -> f64 {
        (self.0)(p)
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        (self.1)(p)
    }
}

/// Local interpolation coefficients: the DOF functionals applied to `f`.
pub fn interpolate(basis: &CellBasis, f: &dyn SmoothFunction) -> [f64; DOFS] {
    let functionals = dof_functionals(basis.kind);
    let rule = gauss_legendre(INTERPOLATION_EDGE_POINTS).expect("10-point rule exists");
    let cell = basis.kind.cell_kind();
    let idx: Vec<usize> = (0..basis.vertices.len()).collect();
    let mut out = [0.0; DOFS];
    for (i, func) in functionals.iter().enumerate() {
        out[i] = match *func {
            DofFunctional::VertexValue(v) => f.value(basis.vertices[v]),
            DofFunctional::VertexDx(v) => f.gradient(basis.vertices[v])[0],
            DofFunctional::VertexDy(v) => f.gradient(basis.vertices[v])[1],
            DofFunctional::EdgeMeanNormal(e) => {
                let (a, b) = local_edge_vertices(cell, &idx, e);
                let nu = basis.outward_normal(e);
                rule.iter()
                    .map(|&(t, w)| {
                        let g = f.gradient(lerp(basis.vertices[a], basis.vertices[b], t));
                        w * (g[0] * nu[0] + g[1] * nu[1])
                    })
                    .sum()
            }
        };
    }
    out
}
