use super::{power_derivatives, ShapeValues, DOFS};
use crate::error::{Error, Result};
use crate::mesh::Point;

/// `xi^a eta^b` in the scaled coordinates of the rectangle.
const EXPONENTS: [(i32, i32); DOFS] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (3, 1),
    (1, 3),
];

#[derive(Debug, Clone)]
pub(super) struct Monomials {
    origin: Point,
    hx: f64,
    hy: f64,
}

impl Monomials {
    pub(super) fn new(v: &[Point]) -> Result<Monomials> {
        let hx = v[1][0] - v[0][0];
        let hy = v[3][1] - v[0][1];
        let tol = 1e-12 * hx.abs().max(hy.abs());
        let aligned = (v[1][1] - v[0][1]).abs() <= tol
            && (v[2][0] - v[1][0]).abs() <= tol
            && (v[2][1] - v[3][1]).abs() <= tol
            && (v[3][0] - v[0][0]).abs() <= tol;
        if !aligned || hx <= 0.0 || hy <= 0.0 {
            return Err(Error::Basis(
                "Adini cells must be axis-aligned rectangles".into(),
            ));
        }
        Ok(Monomials {
            origin: v[0],
            hx,
            hy,
        })
    }

    pub(super) fn eval(&self, p: Point) -> ShapeValues {
        let xi = (p[0] - self.origin[0]) / self.hx;
        let eta = (p[1] - self.origin[1]) / self.hy;
        let (sx, sy) = (1.0 / self.hx, 1.0 / self.hy);
        let mut out = ShapeValues::zeros();
        for (k, &(a, b)) in EXPONENTS.iter().enumerate() {
            let (x0, x1, x2) = power_derivatives(xi, a);
            let (y0, y1, y2) = power_derivatives(eta, b);
            out.value[k] = x0 * y0;
            out.grad[k] = [sx * x1 * y0, sy * x0 * y1];
            out.hess[k] = [sx * sx * x2 * y0, sx * sy * x1 * y1, sy * sy * x0 * y2];
        }
        out
    }
}
