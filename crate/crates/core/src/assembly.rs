//! Global matrices and the block eigenproblem.

use faer::linalg::cholesky::llt::factor::LltError as DenseLltError;
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseRowMatRef, SymbolicSparseRowMatRef};
use faer::Side;

use crate::elements::{local_matrices_on, DofMap, ReferenceBasis, Slot, DOFS};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::QuadRule;
use crate::refraction::RefractionModel;
use crate::sparse::CsrMatrix;
use crate::Execution;

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub a: CsrMatrix<f64>,
    pub b: CsrMatrix<f64>,
    pub c: CsrMatrix<f64>,
    pub g: CsrMatrix<f64>,
    pub n: usize,
    /// Use the identity in place of `g` in the block problem.
    pub use_identity_mass: bool,
}

/// `left x = lambda right x`
#[derive(Debug, Clone)]
pub struct Pencil {
    pub left: CsrMatrix<f64>,
    pub right: CsrMatrix<f64>,
    /// Set when `left = diag(A, M)` and `right = [[B, C], [M, 0]]`.
    pub blocks: Option<Blocks>,
}

#[derive(Debug, Clone)]
pub struct Blocks {
    pub a: CsrMatrix<f64>,
    pub b: CsrMatrix<f64>,
    pub c: CsrMatrix<f64>,
}

impl Pencil {
    pub fn new(left: CsrMatrix<f64>, right: CsrMatrix<f64>) -> Self {
        Pencil {
            left,
            right,
            blocks: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockProblem {
    pub pencil: Pencil,
    /// Size of one block; the pencil has dimension `2 n`.
    pub n: usize,
    pub identity_mass: bool,
}

pub fn assemble(
    mesh: &Mesh,
    dofs: &DofMap,
    basis: &ReferenceBasis,
    model: &RefractionModel,
    rule: &QuadRule,
) -> Result<AssembledSystem> {
    assemble_with(mesh, dofs, basis, model, rule, Execution::default())
}

/// Element matrices are computed per cell (in parallel under
/// [`Execution::Parallel`]) and scattered sequentially; constrained DOFs
/// are dropped.
pub fn assemble_with(
    mesh: &Mesh,
    dofs: &DofMap,
    basis: &ReferenceBasis,
    model: &RefractionModel,
    rule: &QuadRule,
    exec: Execution,
) -> Result<AssembledSystem> {
    if dofs.cell_slots.len() != mesh.cells.len() || dofs.kind != basis.kind {
        return Err(Error::InvalidArgument(
            "DOF map does not match mesh or element".into(),
        ));
    }
    let locals = exec.map(mesh.cells.len(), |c| {
        basis
            .on_cell(&mesh.cell_points(c))
            .and_then(|cb| local_matrices_on(&cb, model, rule))
    });
    let cap = mesh.cells.len() * DOFS * DOFS;
    let mut t = [
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
    ];
    for (c, local) in locals.into_iter().enumerate() {
        let local = local?;
        let slots = &dofs.cell_slots[c];
        let signs = &dofs.cell_signs[c];
        for l in 0..DOFS {
            let Slot::Free(gl) = slots[l] else { continue };
            for j in 0..DOFS {
                let Slot::Free(gj) = slots[j] else { continue };
                let s = signs[l] * signs[j];
                t[0].push((gl, gj, s * local.a[(l, j)]));
                t[1].push((gl, gj, s * local.b[(l, j)]));
                t[2].push((gl, gj, s * local.c[(l, j)]));
                t[3].push((gl, gj, s * local.g[(l, j)]));
            }
        }
    }
    let n = dofs.n_free;
    let [a, b, c, g] = t.map(|t| CsrMatrix::from_triplets(n, n, t));
    Ok(AssembledSystem {
        a,
        b,
        c,
        g,
        n,
        use_identity_mass: false,
    })
}

/// `left = diag(A, M)`, `right = [[B, C], [M, 0]]` with `M = G` or `I`.
pub fn build_block_problem(system: &AssembledSystem) -> BlockProblem {
    let identity;
    let m = if system.use_identity_mass {
        identity = CsrMatrix::identity(system.n);
        &identity
    } else {
        &system.g
    };
    let left = CsrMatrix::block2x2([[Some(&system.a), None], [None, Some(m)]]);
    let right = CsrMatrix::block2x2([[Some(&system.b), Some(&system.c)], [Some(m), None]]);
    BlockProblem {
        pencil: Pencil {
            left,
            right,
            blocks: Some(Blocks {
                a: system.a.clone(),
                b: system.b.clone(),
                c: system.c.clone(),
            }),
        },
        n: system.n,
        identity_mass: system.use_identity_mass,
    }
}

/// Checks symmetry to `1e-12` relative and runs a sparse Cholesky
/// factorization, which fails on the first non-positive pivot.
pub fn check_spd(m: &CsrMatrix<f64>) -> Result<()> {
    if m.nrows != m.ncols {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let defect = m.symmetry_defect();
    if defect > 1e-12 * m.max_abs() {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (defect {defect:e})"
        )));
    }
    if m.nrows == 0 {
        return Ok(());
    }
    let symbolic =
        SymbolicSparseRowMatRef::new_checked(m.nrows, m.ncols, &m.row_ptr, None, &m.col_idx);
    let view = SparseRowMatRef::new(symbolic, &m.values);
    match view.sp_cholesky(Side::Lower) {
        Ok(_) => Ok(()),
        Err(LltError::Numeric(DenseLltError::NonPositivePivot { index })) => {
            Err(Error::NotPositiveDefinite { pivot: index })
        }
        Err(e) => Err(Error::Factorization(format!("{e:?}"))),
    }
}
