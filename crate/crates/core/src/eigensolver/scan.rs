use log::warn;
use num_complex::Complex64;

use super::{shift_invert_arnoldi, EigenPair, SolverConfig};
use crate::assembly::Pencil;
use crate::error::{Error, Result};
use crate::Execution;

/// Two eigenvalues closer than this are the same one.
pub fn dedup_tolerance(lambda: Complex64) -> f64 {
    1e-7 * (1.0 + lambda.norm())
}

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= dedup_tolerance(a)
}

/// Runs one solve per shift and merges the results.
///
/// A cluster found `m` times by one shift is kept `m` times; results are
/// merged in shift order, so the output does not depend on scheduling.
/// Conjugates of non-real eigenvalues are added (the pencil is real). The
/// result is sorted by `|k|`, then by `Im k`. Failing shifts are logged and
/// skipped; the first error is returned only if every shift fails.
pub fn scan_shifts(
    pencil: &Pencil,
    shifts: &[Complex64],
    template: &SolverConfig,
    exec: Execution,
) -> Result<Vec<EigenPair>> {
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("shift list is empty".into()));
    }
    let results = exec.map(shifts.len(), |i| {
        shift_invert_arnoldi(
            pencil,
            &SolverConfig {
                shift: shifts[i],
                ..template.clone()
            },
        )
    });
    let mut merged: Vec<EigenPair> = Vec::new();
    let mut first_error = None;
    let mut any_ok = false;
    for (shift, result) in shifts.iter().zip(results) {
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                warn!(
                    "event=shift_failed shift_re={} shift_im={} error=\"{e}\"",
                    shift.re, shift.im
                );
                first_error.get_or_insert(e);
                continue;
            }
        };
        any_ok = true;
        for (i, pair) in report.pairs.iter().enumerate() {
            let here = report.pairs[..=i]
                .iter()
                .filter(|p| same(p.lambda, pair.lambda))
                .count();
            let known = merged
                .iter()
                .filter(|p| same(p.lambda, pair.lambda))
                .count();
            if here > known {
                merged.push(pair.clone());
            }
        }
    }
    if !any_ok {
        return Err(first_error.expect("at least one shift ran"));
    }
    let mut conjugates = Vec::new();
    for pair in &merged {
        if pair.lambda.im.abs() > dedup_tolerance(pair.lambda) {
            let target = pair.lambda.conj();
            let have = merged
                .iter()
                .chain(&conjugates)
                .filter(|p: &&EigenPair| same(p.lambda, target))
                .count();
            let need = merged
                .iter()
                .filter(|p| same(p.lambda, pair.lambda))
                .count();
            if have < need {
                conjugates.push(pair.conj());
            }
        }
    }
    merged.extend(conjugates);
    merged.sort_by(|a, b| {
        a.k.norm()
            .total_cmp(&b.k.norm())
            .then(a.k.im.total_cmp(&b.k.im))
    });
    Ok(merged)
}
