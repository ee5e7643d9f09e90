use super::{CellBasis, Mat12, ReferenceBasis, DOFS};
use crate::error::Result;
use crate::mesh::Point;
use crate::quadrature::{map_rule, QuadRule};
use crate::refraction::RefractionModel;

/// Element matrices, indexed `[(l, j)]` with `l` the test function.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrices {
    pub a: Mat12,
    pub b: Mat12,
    pub c: Mat12,
    pub g: Mat12,
}

pub fn local_matrices(
    basis: &ReferenceBasis,
    cell: &[Point],
    model: &RefractionModel,
    rule: &QuadRule,
) -> Result<LocalMatrices> {
    local_matrices_on(&basis.on_cell(cell)?, model, rule)
}

pub fn local_matrices_on(
    basis: &CellBasis,
    model: &RefractionModel,
    rule: &QuadRule,
) -> Result<LocalMatrices> {
    let mapped = map_rule(rule, basis.kind.cell_kind(), &basis.vertices)?;
    let mut out = LocalMatrices {
        a: Mat12::zeros(),
        b: Mat12::zeros(),
        c: Mat12::zeros(),
        g: Mat12::zeros(),
    };
    for (&p, &w) in mapped.points.iter().zip(&mapped.weights) {
        let coef = model.coefficients_at(p)?;
        let s = basis.eval(p);
        let lap: [f64; DOFS] = std::array::from_fn(|j| s.laplacian(j));
        let wl = w * coef.laplace_weight;
        let wm = w * model.mu;
        let ws = w * (coef.inv + coef.ratio);
        for l in 0..DOFS {
            let (hl, gl, vl) = (s.hess[l], s.grad[l], s.value[l]);
            let dl_inv = coef.grad_inv[0] * gl[0] + coef.grad_inv[1] * gl[1];
            for j in 0..DOFS {
                let (hj, gj, vj) = (s.hess[j], s.grad[j], s.value[j]);
                out.a[(l, j)] += wl * lap[l] * lap[j]
                    + wm * (hl[0] * hj[0] + 2.0 * hl[1] * hj[1] + hl[2] * hj[2]);
                // grad(inv phi_j).grad phi_l + grad phi_j.grad(ratio phi_l)
                let dj_ratio = coef.grad_ratio[0] * gj[0] + coef.grad_ratio[1] * gj[1];
                out.b[(l, j)] +=
                    ws * (gl[0] * gj[0] + gl[1] * gj[1]) + w * (vj * dl_inv + vl * dj_ratio);
                out.g[(l, j)] += w * vl * vj;
                out.c[(l, j)] -= w * coef.ratio * vl * vj;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{adini_basis, mz_basis, ElementKind};
    use crate::mesh::CellKind;
    use crate::refraction::{make_model, RefractionKind};

    const UNIT: [f64; 4] = [0.0, 0.0, 1.0, 1.0];

    fn rect() -> Vec<Point> {
        vec![[0.2, 0.1], [0.7, 0.1], [0.7, 0.35], [0.2, 0.35]]
    }

    fn tri() -> Vec<Point> {
        vec![[0.1, 0.2], [0.6, 0.25], [0.3, 0.7]]
    }

    fn max_abs(m: &Mat12) -> f64 {
        m.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    #[test]
    fn constant_n_pure_hessian_form() {
        let model = make_model(RefractionKind::Constant(16.0), UNIT, None).unwrap();
        for (basis, cell) in [(adini_basis(), rect()), (mz_basis().unwrap(), tri())] {
            let rule = QuadRule::default_for(basis.kind.cell_kind());
            let m = local_matrices(&basis, &cell, &model, &rule).unwrap();
            let cb = basis.on_cell(&cell).unwrap();
            let mapped = map_rule(&rule, basis.kind.cell_kind(), &cell).unwrap();
            let mut h = Mat12::zeros();
            for (&p, &w) in mapped.points.iter().zip(&mapped.weights) {
                let s = cb.eval(p);
                for l in 0..DOFS {
                    for j in 0..DOFS {
                        let (a, b) = (s.hess[l], s.hess[j]);
                        h[(l, j)] += w * (a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]);
                    }
                }
            }
            let diff = max_abs(&(m.a - h / 15.0));
            assert!(diff < 1e-12 * max_abs(&m.a), "{diff}");
            // B reduces to (1/(n-1) + n/(n-1)) K, C to -(n/(n-1)) G
            assert!(max_abs(&(m.b - m.b.transpose())) < 1e-12 * max_abs(&m.b));
            assert!(max_abs(&(m.c + m.g * (16.0 / 15.0))) < 1e-14 * max_abs(&m.c));
        }
    }

    #[test]
    fn mass_matches_exact_integrals_of_monomials() {
        // sum_j c_j phi_j reproduces x and y, so c^T G c = int x^2, d^T G c = int x y
        let model = make_model(RefractionKind::Constant(4.0), UNIT, None).unwrap();
        let cell = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let basis = adini_basis();
        let m = local_matrices(
            &basis,
            &cell,
            &model,
            &QuadRule::default_for(CellKind::Rectangle),
        )
        .unwrap();
        let mut x = [0.0; DOFS];
        let mut y = [0.0; DOFS];
        for (v, p) in cell.iter().enumerate() {
            x[3 * v] = p[0];
            x[3 * v + 1] = 1.0;
            y[3 * v] = p[1];
            y[3 * v + 2] = 1.0;
        }
        let xv = nalgebra::SVector::<f64, DOFS>::from(x);
        let yv = nalgebra::SVector::<f64, DOFS>::from(y);
        assert!(((xv.transpose() * m.g * xv)[0] - 1.0 / 3.0).abs() < 1e-13);
        assert!(((xv.transpose() * m.g * yv)[0] - 0.25).abs() < 1e-13);
        // gradient terms: int grad x . grad x = area, scaled by 1/3 + 4/3
        assert!(((xv.transpose() * m.b * xv)[0] - 5.0 / 3.0).abs() < 1e-13);
        assert!((yv.transpose() * m.a * yv)[0].abs() < 1e-13);
    }

    #[test]
    fn affine_b_splits_into_gradient_parts() {
        let kind = RefractionKind::Affine {
            a: 8.0,
            b: 1.0,
            c: -1.0,
        };
        let model = make_model(kind, UNIT, Some(1.0 / 9.0)).unwrap();
        let basis = mz_basis().unwrap();
        let cell = tri();
        let rule = QuadRule::default_for(CellKind::Triangle);
        let m = local_matrices(&basis, &cell, &model, &rule).unwrap();
        // antisymmetric part comes only from the first-order terms
        let cb = basis.on_cell(&cell).unwrap();
        let mapped = map_rule(&rule, CellKind::Triangle, &cell).unwrap();
        let mut first = Mat12::zeros();
        for (&p, &w) in mapped.points.iter().zip(&mapped.weights) {
            let c = model.coefficients_at(p).unwrap();
            let s = cb.eval(p);
            for l in 0..DOFS {
                for j in 0..DOFS {
                    let dl = c.grad_inv[0] * s.grad[l][0] + c.grad_inv[1] * s.grad[l][1];
                    let dj = c.grad_ratio[0] * s.grad[j][0] + c.grad_ratio[1] * s.grad[j][1];
                    first[(l, j)] += w * (s.value[j] * dl + s.value[l] * dj);
                }
            }
        }
        let skew = (m.b - m.b.transpose()) - (first - first.transpose());
        assert!(max_abs(&skew) < 1e-12 * max_abs(&m.b));
        // grad_inv == grad_ratio makes the first-order block symmetric
        assert!(max_abs(&(first - first.transpose())) < 1e-12 * max_abs(&m.b));
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let kind = RefractionKind::Affine {
            a: 8.0,
            b: 1.0,
            c: -1.0,
        };
        let model = make_model(kind, UNIT, Some(1.0 / 9.0)).unwrap();
        for (k, cell) in [(ElementKind::Adini, rect()), (ElementKind::Mz, tri())] {
            let basis = k.basis().unwrap();
            let rule = QuadRule::default_for(k.cell_kind());
            let m = local_matrices(&basis, &cell, &model, &rule).unwrap();
            let eig = m.a.symmetric_eigen();
            let top = eig.eigenvalues.max();
            assert!(eig.eigenvalues.min() > -1e-10 * top);
            let eig = m.g.symmetric_eigen();
            assert!(eig.eigenvalues.min() > 0.0);
        }
    }
}
