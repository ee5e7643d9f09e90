use num_complex::Complex64;

use super::{run_case, ExperimentConfig, LevelResult, ReferenceKind};
use crate::error::{Error, Result};
use crate::Execution;

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub index: usize,
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    /// `None` for levels that did not converge.
    pub values: Vec<Option<Complex64>>,
    pub reference: Complex64,
    pub reference_kind: ReferenceKind,
    pub errors: Vec<Option<f64>>,
    /// Least-squares slope of `log error` against `log h`.
    pub slope: Option<f64>,
}

/// Order-2 extrapolation from a coarse and a fine value.
pub fn richardson(coarse: Complex64, h_coarse: f64, fine: Complex64, h_fine: f64) -> Complex64 {
    let r2 = (h_coarse / h_fine).powi(2);
    fine + (fine - coarse) / (r2 - 1.0)
}

/// Least-squares slope of `log e` against `log h`; zero errors are skipped.
pub fn fit_slope(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|&(&h, &e)| h > 0.0 && e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Builds the report for one index from solved levels.
pub fn study_from_levels(
    levels: &[LevelResult],
    index: usize,
    reference_kind: ReferenceKind,
) -> Result<ConvergenceReport> {
    let values: Vec<Option<Complex64>> = levels
        .iter()
        .map(|l| if l.converged { l.k(index) } else { None })
        .collect();
    let good: Vec<usize> = (0..levels.len()).filter(|&i| values[i].is_some()).collect();
    if good.len() < 3 {
        return Err(Error::Config(format!(
            "a convergence study needs three converged levels, got {}",
            good.len()
        )));
    }
    let (c, f) = (good[good.len() - 2], good[good.len() - 1]);
    let reference = match reference_kind {
        ReferenceKind::Richardson => richardson(
            values[c].unwrap(),
            levels[c].h,
            values[f].unwrap(),
            levels[f].h,
        ),
        ReferenceKind::Finest => values[f].unwrap(),
    };
    let errors: Vec<Option<f64>> = values
        .iter()
        .map(|v| v.map(|v| (v - reference).norm()))
        .collect();
    let fitted: Vec<usize> = good
        .iter()
        .copied()
        .filter(|&i| !(reference_kind == ReferenceKind::Finest && i == f))
        .collect();
    let slope = fit_slope(
        &fitted.iter().map(|&i| levels[i].h).collect::<Vec<_>>(),
        &fitted
            .iter()
            .map(|&i| errors[i].unwrap())
            .collect::<Vec<_>>(),
    );
    Ok(ConvergenceReport {
        index,
        levels: levels.iter().map(|l| l.level).collect(),
        h: levels.iter().map(|l| l.h).collect(),
        values,
        reference,
        reference_kind,
        errors,
        slope,
    })
}

/// Solves every level and reports the convergence of each requested index.
pub fn convergence_study(
    config: &ExperimentConfig,
    exec: Execution,
) -> Result<(super::CaseResult, Vec<ConvergenceReport>)> {
    let case = run_case(config, exec)?;
    let reports = config
        .indices
        .iter()
        .map(|&j| study_from_levels(&case.levels, j, config.reference))
        .collect::<Result<Vec<_>>>()?;
    Ok((case, reports))
}
