//! Experiment driver: refinement runs, convergence studies and the
//! comparison with published tables.

mod config;
mod study;
mod tables;

use std::io::Write;

use log::{info, warn};
use num_complex::Complex64;

use crate::assembly::{assemble_with, build_block_problem, AssembledSystem, BlockProblem};
use crate::eigensolver::{dedup_tolerance, scan_shifts, EigenPair, SolverConfig};
use crate::elements::{build_dof_map, ElementKind};
use crate::error::Result;
use crate::mesh::{build_domain_mesh, Domain, Mesh};
use crate::quadrature::QuadRule;
use crate::refraction::make_model;
use crate::Execution;

pub use config::{parse_complex, ExperimentConfig, ReferenceKind};
pub use study::{convergence_study, fit_slope, richardson, study_from_levels, ConvergenceReport};
pub use tables::{
    published_values, reproduce_tables, write_table_csv, PublishedValue, RowStatus, TableOptions,
    TableRow,
};

pub const CSV_HEADER: &str = "domain,element,n_kind,mu,level,h,index,k_re,k_im,residual";

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    /// Size of one block of the pencil.
    pub dofs: usize,
    /// The first `nev` eigenpairs in `|k|` order.
    pub pairs: Vec<EigenPair>,
    /// `nev` pairs found, each within tolerance.
    pub converged: bool,
    pub error: Option<String>,
}

impl LevelResult {
    /// `k_j` for a 1-based index, with the sign of `Im k` made non-negative.
    pub fn k(&self, index: usize) -> Option<Complex64> {
        self.pairs
            .get(index.checked_sub(1)?)
            .map(|p| Complex64::new(p.k.re, p.k.im.abs()))
    }

    /// Lowest complex conjugate pair, upper member.
    pub fn first_complex(&self) -> Option<Complex64> {
        self.pairs
            .iter()
            .find(|p| p.k.im.abs() > 1e-6 * p.k.norm())
            .map(|p| Complex64::new(p.k.re, p.k.im.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub config: ExperimentConfig,
    pub mu: f64,
    pub levels: Vec<LevelResult>,
}

impl CaseResult {
    pub fn all_converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }
}

pub fn build_mesh(domain: Domain, element: ElementKind, level: usize) -> Result<Mesh> {
    build_domain_mesh(domain, element == ElementKind::Adini, level)
}

/// Mesh and global matrices for one level, with the stabilization constant.
pub fn assemble_level(
    config: &ExperimentConfig,
    level: usize,
    exec: Execution,
) -> Result<(Mesh, AssembledSystem, f64)> {
    let mesh = build_mesh(config.domain, config.element, level)?;
    let model = make_model(
        config.refraction.clone(),
        config.domain.bounding_box(),
        config.mu,
    )?;
    let dofs = build_dof_map(&mesh, config.element)?;
    let basis = config.element.basis()?;
    let rule = QuadRule::default_for(config.element.cell_kind());
    let mut system = assemble_with(&mesh, &dofs, &basis, &model, &rule, exec)?;
    system.use_identity_mass = config.identity_mass;
    Ok((mesh, system, model.mu))
}

/// Mesh and block problem for one level.
pub fn build_problem(
    config: &ExperimentConfig,
    level: usize,
    exec: Execution,
) -> Result<(Mesh, BlockProblem, f64)> {
    let (mesh, system, mu) = assemble_level(config, level, exec)?;
    Ok((mesh, build_block_problem(&system), mu))
}

fn solver_template(config: &ExperimentConfig, nev: usize) -> SolverConfig {
    SolverConfig {
        nev,
        tolerance: config.tolerance,
        ..Default::default()
    }
}

/// Coarse mesh parameter for the shift sweep.
fn coarse_level(config: &ExperimentConfig) -> usize {
    let preferred = match config.domain {
        Domain::Square => 8,
        Domain::LShape => 4,
        Domain::Triangle => 3,
        Domain::Disk => 2,
    };
    preferred.min(config.levels[0])
}

/// Shifts used when the configuration lists none: zero, which sees the
/// smallest `|lambda|` and therefore the leading indices, plus the complex
/// eigenvalues of the requested indices found on a coarse mesh.
pub fn default_shifts(config: &ExperimentConfig, exec: Execution) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let (_, problem, _) = build_problem(config, coarse_level(config), exec)?;
    let pairs = scan_shifts(
        &problem.pencil,
        &[zero],
        &solver_template(config, config.nev),
        exec,
    )?;
    let mut shifts = vec![zero];
    for &j in &config.indices {
        let Some(p) = pairs.get(j - 1) else { continue };
        let guess = Complex64::new(p.lambda.re, p.lambda.im.abs());
        if guess.im > dedup_tolerance(guess)
            && !shifts
                .iter()
                .any(|s| (s - guess).norm() <= 1e-3 * guess.norm())
        {
            shifts.push(guess);
        }
    }
    info!(
        "event=shifts count={} coarse_level={}",
        shifts.len(),
        coarse_level(config)
    );
    Ok(shifts)
}

/// Solves one level; solver failures are reported in the result.
pub fn solve_level(
    config: &ExperimentConfig,
    level: usize,
    shifts: &[Complex64],
    exec: Execution,
) -> LevelResult {
    let mut result = LevelResult {
        level,
        h: f64::NAN,
        dofs: 0,
        pairs: Vec::new(),
        converged: false,
        error: None,
    };
    let problem = match build_problem(config, level, exec) {
        Ok((mesh, problem, _)) => {
            result.h = mesh.h_max;
            result.dofs = problem.n;
            problem
        }
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    match scan_shifts(
        &problem.pencil,
        shifts,
        &solver_template(config, config.nev),
        exec,
    ) {
        Ok(mut pairs) => {
            pairs.truncate(config.nev);
            result.converged =
                pairs.len() == config.nev && pairs.iter().all(|p| p.residual <= config.tolerance);
            result.pairs = pairs;
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    if !result.converged {
        warn!(
            "event=level_not_converged level={level} found={} error={:?}",
            result.pairs.len(),
            result.error
        );
    }
    info!(
        "event=level level={level} h={:.6} dofs={} pairs={}",
        result.h,
        result.dofs,
        result.pairs.len()
    );
    result
}

/// Runs every level of the configuration.
pub fn run_case(config: &ExperimentConfig, exec: Execution) -> Result<CaseResult> {
    config.validate()?;
    let mu = make_model(
        config.refraction.clone(),
        config.domain.bounding_box(),
        config.mu,
    )?
    .mu;
    let shifts = if config.shifts.is_empty() {
        default_shifts(config, exec)?
    } else {
        config.shifts.clone()
    };
    let levels = config
        .levels
        .iter()
        .map(|&l| solve_level(config, l, &shifts, exec))
        .collect();
    Ok(CaseResult {
        config: config.clone(),
        mu,
        levels,
    })
}

/// One row per level and eigenvalue; conjugate pairs produce two rows.
pub fn write_csv(case: &CaseResult, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let c = &case.config;
    for level in &case.levels {
        for (i, p) in level.pairs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{:.12e},{},{:.12e},{},{:.12e},{:.12e},{:.3e}",
                c.domain.name(),
                c.element.name(),
                c.refraction.label(),
                case.mu,
                level.level,
                level.h,
                i + 1,
                p.k.re,
                p.k.im,
                p.residual
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            levels: vec![2, 3],
            nev: 4,
            indices: vec![1, 2],
            ..Default::default()
        }
    }

    #[test]
    fn run_case_is_deterministic() {
        let a = run_case(&tiny(), Execution::Parallel).unwrap();
        let b = run_case(&tiny(), Execution::Sequential).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&a, &mut x).unwrap();
        write_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), 1 + 2 * 4);
        assert!(a.all_converged());
    }

    #[test]
    fn level_k_uses_upper_half_plane() {
        let pair = EigenPair::new(
            Complex64::new(19.45, -7.83),
            Complex64::new(1.0, 0.0),
            0.0,
            None,
        );
        let level = LevelResult {
            level: 1,
            h: 1.0,
            dofs: 1,
            pairs: vec![pair],
            converged: true,
            error: None,
        };
        assert!(level.k(1).unwrap().im > 0.0);
        assert!(level.k(0).is_none() && level.k(2).is_none());
    }

    #[test]
    fn first_complex_skips_real_pairs() {
        let pair = |l: Complex64| EigenPair::new(l, Complex64::new(1.0, 0.0), 0.0, None);
        let mut level = LevelResult {
            level: 1,
            h: 1.0,
            dofs: 1,
            pairs: vec![
                pair(Complex64::new(7.9, 1e-12)),
                pair(Complex64::new(16.6, 0.0)),
            ],
            converged: true,
            error: None,
        };
        assert!(level.first_complex().is_none());
        level.pairs.push(pair(Complex64::new(16.7, -6.5)));
        level.pairs.push(pair(Complex64::new(16.7, 6.5)));
        let k = level.first_complex().unwrap();
        assert!(k.im > 0.0 && ((k * k).re - 16.7).abs() < 1e-12);
    }
}
