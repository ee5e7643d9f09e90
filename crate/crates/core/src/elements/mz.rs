use super::{power_derivatives, ShapeValues, DOFS};
use crate::error::{Error, Result};
use crate::mesh::Point;

/// `l1^a l2^b l3^c`: the ten cubic barycentric monomials followed by two
/// of the quartic bubbles. The third bubble is their complement within
/// `l1 l2 l3 (l1 + l2 + l3) = l1 l2 l3`, which is already a cubic.
const EXPONENTS: [[i32; 3]; DOFS] = [
    [3, 0, 0],
    [0, 3, 0],
    [0, 0, 3],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [0, 2, 1],
    [1, 0, 2],
    [0, 1, 2],
    [1, 1, 1],
    [2, 1, 1],
    [1, 2, 1],
];

#[derive(Debug, Clone)]
pub(super) struct Barycentric {
    /// `l_i(x, y) = c[i][0] + c[i][1] x + c[i][2] y`
    coef: [[f64; 3]; 3],
}

impl Barycentric {
    pub(super) fn new(v: &[Point]) -> Result<Barycentric> {
        let twice_area =
            (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        let scale = (0..3)
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % 3]);
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
            })
            .fold(0.0, f64::max);
        if twice_area.abs() <= 1e-14 * scale {
            return Err(Error::Basis("degenerate triangle".into()));
        }
        let mut coef = [[0.0; 3]; 3];
        for i in 0..3 {
            let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            coef[i] = [
                (p[0] * q[1] - q[0] * p[1]) / twice_area,
                (p[1] - q[1]) / twice_area,
                (q[0] - p[0]) / twice_area,
            ];
        }
        Ok(Barycentric { coef })
    }

    pub(super) fn eval(&self, p: Point) -> ShapeValues {
        let l: [f64; 3] = std::array::from_fn(|i| {
            self.coef[i][0] + self.coef[i][1] * p[0] + self.coef[i][2] * p[1]
        });
        let g: [[f64; 2]; 3] = std::array::from_fn(|i| [self.coef[i][1], self.coef[i][2]]);
        let mut out = ShapeValues::zeros();
        for (k, e) in EXPONENTS.iter().enumerate() {
            // powers and their first two derivatives for each factor
            let f: [(f64, f64, f64); 3] = std::array::from_fn(|i| power_derivatives(l[i], e[i]));
            out.value[k] = f[0].0 * f[1].0 * f[2].0;
            // partial derivatives with respect to the barycentric coordinates
            let d1: [f64; 3] = std::array::from_fn(|i| {
                (0..3)
                    .map(|j| if j == i { f[j].1 } else { f[j].0 })
                    .product()
            });
            let mut d2 = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d2[i][j] = (0..3)
                        .map(|m| match (m == i, m == j) {
                            (true, true) => f[m].2,
                            (true, false) | (false, true) => f[m].1,
                            (false, false) => f[m].0,
                        })
                        .product();
                }
            }
            for i in 0..3 {
                out.grad[k][0] += d1[i] * g[i][0];
                out.grad[k][1] += d1[i] * g[i][1];
                for j in 0..3 {
                    out.hess[k][0] += d2[i][j] * g[i][0] * g[j][0];
                    out.hess[k][1] += d2[i][j] * g[i][0] * g[j][1];
                    out.hess[k][2] += d2[i][j] * g[i][1] * g[j][1];
                }
            }
        }
        out
    }
}
