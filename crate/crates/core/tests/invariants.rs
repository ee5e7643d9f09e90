use num_complex::Complex64;
use proptest::prelude::*;

use tevp::assembly::{assemble_with, build_block_problem};
use tevp::eigensolver::{scan_shifts, shift_invert_arnoldi, SolverConfig};
use tevp::elements::{build_dof_map, ElementKind};
use tevp::experiments::{
    build_mesh, build_problem, fit_slope, parse_complex, richardson, ExperimentConfig,
};
use tevp::mesh::{Domain, Mesh};
use tevp::quadrature::QuadRule;
use tevp::refraction::{make_model, RefractionKind};
use tevp::sparse::CsrMatrix;
use tevp::Execution;

fn assembled(mesh: &Mesh, element: ElementKind) -> [CsrMatrix<f64>; 4] {
    let dofs = build_dof_map(mesh, element).unwrap();
    let model = make_model(
        RefractionKind::Affine {
            a: 8.0,
            b: 1.0,
            c: -1.0,
        },
        [0.0, 0.0, 1.0, 1.0],
        Some(1.0 / 9.0),
    )
    .unwrap();
    let rule = QuadRule::default_for(element.cell_kind());
    let s = assemble_with(
        mesh,
        &dofs,
        &element.basis().unwrap(),
        &model,
        &rule,
        Execution::Sequential,
    )
    .unwrap();
    [s.a, s.b, s.c, s.g]
}

fn same_bits(x: &CsrMatrix<f64>, y: &CsrMatrix<f64>) -> bool {
    x.row_ptr == y.row_ptr
        && x.col_idx == y.col_idx
        && x.values
            .iter()
            .zip(&y.values)
            .all(|(a, b)| a.to_bits() == b.to_bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cell_order_does_not_change_matrices(
        perm in Just((0..18usize).collect::<Vec<_>>()).prop_shuffle(),
        adini in any::<bool>(),
    ) {
        let element = if adini { ElementKind::Adini } else { ElementKind::Mz };
        let m = if adini { 4 } else { 3 };
        let mesh = build_mesh(Domain::Square, element, m).unwrap();
        let order: Vec<usize> = perm.into_iter().filter(|&i| i < mesh.cells.len()).collect();
        prop_assume!(order.len() == mesh.cells.len());
        let cells = order.iter().map(|&i| mesh.cells[i].clone()).collect();
        let shuffled = Mesh::from_cells(mesh.kind, mesh.vertices.clone(), cells);
        let (x, y) = (assembled(&mesh, element), assembled(&shuffled, element));
        for (a, b) in x.iter().zip(&y) {
            prop_assert!(same_bits(a, b));
        }
    }

    #[test]
    fn triplet_order_does_not_change_sums(
        entries in prop::collection::vec((0..6usize, 0..6usize, -1e3..1e3f64), 1..60),
        seed in any::<u64>(),
    ) {
        let mut shuffled = entries.clone();
        // deterministic Fisher-Yates from the seed
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let a = CsrMatrix::from_triplets(6, 6, entries);
        let b = CsrMatrix::from_triplets(6, 6, shuffled);
        prop_assert!(same_bits(&a, &b));
    }

    #[test]
    fn slope_fit_exact_on_power_laws(
        p in 1..=3i32,
        c in 1e-3..1e3f64,
        h0 in 0.05..0.5f64,
        levels in 2..6usize,
    ) {
        let h: Vec<f64> = (0..levels).map(|i| h0 / 2f64.powi(i as i32)).collect();
        let e: Vec<f64> = h.iter().map(|h| c * h.powi(p)).collect();
        let slope = fit_slope(&h, &e).unwrap();
        prop_assert!((slope - f64::from(p)).abs() <= 1e-12, "slope {slope} for p = {p}");
    }

    #[test]
    fn richardson_recovers_quadratic_limit(
        re in -5.0..5.0f64, im in -1.0..1.0f64, a in -10.0..10.0f64, h in 0.01..0.2f64, ratio in 1.5..3.0f64,
    ) {
        let limit = Complex64::new(re, im);
        let at = |h: f64| limit + Complex64::new(a, -a / 3.0) * h * h;
        let r = richardson(at(h * ratio), h * ratio, at(h), h);
        prop_assert!((r - limit).norm() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn complex_literals_round_trip(re in -1e3..1e3f64, im in -1e3..1e3f64) {
        let text = format!("{re}{}{}i", if im < 0.0 { "-" } else { "+" }, im.abs());
        prop_assert_eq!(parse_complex(&text).unwrap(), Complex64::new(re, im));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn conjugate_shift_gives_conjugate_spectrum(re in 2.0..30.0f64, im in 0.5..8.0f64) {
        let config = ExperimentConfig {
            refraction: RefractionKind::Affine { a: 8.0, b: 1.0, c: -1.0 },
            mu: Some(1.0 / 9.0),
            levels: vec![3],
            ..Default::default()
        };
        let (_, problem, _) = build_problem(&config, 3, Execution::Sequential).unwrap();
        let template = SolverConfig { nev: 3, tolerance: 1e-9, ..Default::default() };
        let sigma = Complex64::new(re, im);
        let up = scan_shifts(&problem.pencil, &[sigma], &template, Execution::Sequential).unwrap();
        let down = scan_shifts(&problem.pencil, &[sigma.conj()], &template, Execution::Sequential).unwrap();
        prop_assert_eq!(up.len(), down.len());
        for p in &up {
            let gap = down.iter().map(|q| (q.lambda - p.lambda.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(gap <= 1e-7 * (1.0 + p.lambda.norm()), "{} has no conjugate partner", p.lambda);
        }
    }

    #[test]
    fn back_transform_is_consistent(shift in 1.0..40.0f64, nev in 1..5usize) {
        let config = ExperimentConfig { element: ElementKind::Adini, levels: vec![4], ..Default::default() };
        let (_, problem, _) = build_problem(&config, 4, Execution::Sequential).unwrap();
        let sigma = Complex64::new(shift, 0.0);
        let rep = shift_invert_arnoldi(&problem.pencil, &SolverConfig { shift: sigma, nev, ..Default::default() }).unwrap();
        prop_assert!(rep.pairs.len() == nev);
        for w in rep.pairs.windows(2) {
            prop_assert!((w[0].lambda - sigma).norm() <= (w[1].lambda - sigma).norm() * (1.0 + 1e-9));
        }
        for p in &rep.pairs {
            prop_assert!((p.lambda - (sigma + p.theta.inv())).norm() <= 1e-8 * p.lambda.norm());
            prop_assert!(p.k.re >= 0.0 && (p.k * p.k - p.lambda).norm() <= 1e-12 * p.lambda.norm());
            prop_assert!(p.residual <= 1e-10);
        }
    }
}

#[test]
fn identity_mass_flag_only_changes_lower_left_block() {
    let mesh = build_mesh(Domain::Square, ElementKind::Mz, 3).unwrap();
    let dofs = build_dof_map(&mesh, ElementKind::Mz).unwrap();
    let model = make_model(RefractionKind::Constant(16.0), [0.0, 0.0, 1.0, 1.0], None).unwrap();
    let rule = QuadRule::default_for(ElementKind::Mz.cell_kind());
    let mut sys = assemble_with(
        &mesh,
        &dofs,
        &ElementKind::Mz.basis().unwrap(),
        &model,
        &rule,
        Execution::default(),
    )
    .unwrap();
    let gram = build_block_problem(&sys);
    sys.use_identity_mass = true;
    let ident = build_block_problem(&sys);
    let n = sys.n;
    for (i, j, v) in ident.pencil.right.triplets() {
        if i >= n && j < n {
            assert_eq!(v, if i - n == j { 1.0 } else { 0.0 });
        } else {
            assert_eq!(v, gram.pencil.right.get(i, j));
        }
    }
    for i in 0..n {
        assert_eq!(ident.pencil.left.get(n + i, n + i), 1.0);
    }
}
