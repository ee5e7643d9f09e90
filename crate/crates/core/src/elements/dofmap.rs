use std::collections::BTreeMap;

use super::{ElementKind, DOFS};
use crate::error::{Error, Result};
use crate::mesh::{local_edge_vertices, Mesh};

/// Where a local degree of freedom lands globally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Free(usize),
    Constrained(usize),
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: ElementKind,
    pub cell_slots: Vec<[Slot; DOFS]>,
    /// `-1` where the local edge functional (outward normal) opposes the
    /// global edge orientation, `+1` otherwise.
    pub cell_signs: Vec<[f64; DOFS]>,
    pub n_free: usize,
    pub n_constrained: usize,
}

impl DofMap {
    /// `N_h`, the dimension of the discrete space.
    pub fn len(&self) -> usize {
        self.n_free
    }

    pub fn is_empty(&self) -> bool {
        self.n_free == 0
    }
}

/// Global numbering with homogeneous clamped boundary conditions eliminated.
///
/// Free vertex DOFs come first (three per interior vertex, by vertex index),
/// followed for the Morley-Zienkiewicz element by one DOF per interior edge
/// ordered by its endpoint pair. A global edge `(a, b)` with `a < b` carries
/// the normal obtained by turning `b - a` clockwise.
pub fn build_dof_map(mesh: &Mesh, kind: ElementKind) -> Result<DofMap> {
    if mesh.kind != kind.cell_kind() {
        return Err(Error::KindMismatch {
            element: kind.name().into(),
            cells: mesh.kind.name().into(),
        });
    }
    let mut n_free = 0;
    let mut n_constrained = 0;
    let mut next = |constrained: bool| {
        if constrained {
            n_constrained += 1;
            Slot::Constrained(n_constrained - 1)
        } else {
            n_free += 1;
            Slot::Free(n_free - 1)
        }
    };
    let vertex_slots: Vec<[Slot; 3]> = (0..mesh.vertices.len())
        .map(|v| {
            let b = mesh.boundary_vertex[v];
            [next(b), next(b), next(b)]
        })
        .collect();
    let mut edge_slots = vec![Slot::Constrained(usize::MAX); mesh.edges.len()];
    if kind == ElementKind::Mz {
        let ordered: BTreeMap<[usize; 2], usize> = mesh
            .edges
            .iter()
            .enumerate()
            .map(|(e, edge)| (edge.vertices, e))
            .collect();
        for &e in ordered.values() {
            edge_slots[e] = next(mesh.edges[e].is_boundary());
        }
    }

    let nv = mesh.kind.vertex_count();
    let mut cell_slots = Vec::with_capacity(mesh.cells.len());
    let mut cell_signs = Vec::with_capacity(mesh.cells.len());
    for (c, cell) in mesh.cells.iter().enumerate() {
        let mut slots = [Slot::Constrained(usize::MAX); DOFS];
        let mut signs = [1.0; DOFS];
        for (i, &v) in cell.iter().enumerate() {
            slots[3 * i..3 * i + 3].copy_from_slice(&vertex_slots[v]);
        }
        if kind == ElementKind::Mz {
            for i in 0..3 {
                let e = mesh.cell_edges[c][i];
                slots[3 * nv + i] = edge_slots[e];
                let (a, b) = local_edge_vertices(mesh.kind, cell, i);
                if a > b {
                    signs[3 * nv + i] = -1.0;
                }
            }
        }
        cell_slots.push(slots);
        cell_signs.push(signs);
    }
    Ok(DofMap {
        kind,
        cell_slots,
        cell_signs,
        n_free,
        n_constrained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_square_rect_mesh, build_structured_tri_mesh, Domain};

    #[test]
    fn adini_two_by_two() {
        let mesh = build_square_rect_mesh(2).unwrap();
        let map = build_dof_map(&mesh, ElementKind::Adini).unwrap();
        assert_eq!(map.n_free, 3);
        assert_eq!(map.n_constrained, 24);
    }

    #[test]
    fn mz_two_by_two() {
        let mesh = build_structured_tri_mesh(Domain::Square, 2).unwrap();
        let map = build_dof_map(&mesh, ElementKind::Mz).unwrap();
        assert_eq!(map.n_free, 3 + 8);
        assert_eq!(map.n_constrained, 8 * 3 + 8);
    }

    #[test]
    fn slots_cover_every_dof_once() {
        let mesh = build_structured_tri_mesh(Domain::LShape, 3).unwrap();
        let map = build_dof_map(&mesh, ElementKind::Mz).unwrap();
        let mut seen_free = vec![false; map.n_free];
        let mut seen_con = vec![false; map.n_constrained];
        for slots in &map.cell_slots {
            for s in slots {
                match *s {
                    Slot::Free(i) => seen_free[i] = true,
                    Slot::Constrained(i) => seen_con[i] = true,
                }
            }
        }
        assert!(seen_free.iter().all(|&b| b));
        assert!(seen_con.iter().all(|&b| b));
        // each interior edge DOF appears with opposite signs in its two cells
        for (e, edge) in mesh
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_boundary())
        {
            let signs: Vec<f64> = edge
                .cells
                .iter()
                .map(|&c| {
                    let i = mesh.cell_edges[c].iter().position(|&x| x == e).unwrap();
                    map.cell_signs[c][9 + i]
                })
                .collect();
            assert_eq!(signs[0] * signs[1], -1.0);
        }
    }

    #[test]
    fn kind_mismatch() {
        let mesh = build_square_rect_mesh(2).unwrap();
        assert!(build_dof_map(&mesh, ElementKind::Mz).is_err());
    }
}
