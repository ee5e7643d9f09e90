use std::io::Write;

use log::info;
use num_complex::Complex64;

use super::{run_case, ExperimentConfig, LevelResult, ReferenceKind};
use crate::elements::ElementKind;
use crate::error::{Error, Result};
use crate::mesh::Domain;
use crate::refraction::RefractionKind;
use crate::Execution;

/// One published value; pairs carry the upper-half-plane member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedValue {
    pub table: u8,
    pub domain: Domain,
    pub element: ElementKind,
    pub affine: bool,
    pub indices: &'static [usize],
    pub h: f64,
    pub k: Complex64,
}

const S2: f64 = std::f64::consts::SQRT_2;
const SQUARE_H: [f64; 3] = [S2 / 32.0, S2 / 64.0, S2 / 128.0];
const DISK_H: [f64; 3] = [0.025, 0.012, 0.006];

type Column = (Domain, &'static [usize], [f64; 3], [(f64, f64); 3]);

const fn r(a: f64, b: f64, c: f64) -> [(f64, f64); 3] {
    [(a, 0.0), (b, 0.0), (c, 0.0)]
}

const TABLE1: [Column; 12] = [
    (
        Domain::Square,
        &[1],
        SQUARE_H,
        r(2.8218574, 2.8220628, 2.8221545),
    ),
    (
        Domain::LShape,
        &[1],
        SQUARE_H,
        r(2.3035843, 2.3028188, 2.3024576),
    ),
    (
        Domain::Triangle,
        &[1],
        SQUARE_H,
        r(2.7388174, 2.7389418, 2.7389765),
    ),
    (
        Domain::Disk,
        &[1],
        DISK_H,
        r(2.9775769, 2.9771919, 2.9771000),
    ),
    (
        Domain::Square,
        &[2],
        SQUARE_H,
        r(3.5381161, 3.5384282, 3.5386203),
    ),
    (
        Domain::LShape,
        &[2],
        SQUARE_H,
        r(2.3953577, 2.3955964, 2.3956673),
    ),
    (
        Domain::Triangle,
        &[2],
        SQUARE_H,
        r(3.2915472, 3.2917188, 3.2917696),
    ),
    (
        Domain::Disk,
        &[2],
        DISK_H,
        r(3.7774560, 3.7770363, 3.7769414),
    ),
    (
        Domain::Square,
        &[5, 6],
        SQUARE_H,
        [
            (4.4959659, 0.8714721),
            (4.4963441, 0.8714728),
            (4.4964963, 0.8714802),
        ],
    ),
    (
        Domain::LShape,
        &[5, 6],
        SQUARE_H,
        [
            (2.9255876, 0.5654338),
            (2.9248145, 0.5650876),
            (2.9244878, 0.5648487),
        ],
    ),
    (
        Domain::Triangle,
        &[5, 6],
        SQUARE_H,
        [
            (4.1666454, 0.7836432),
            (4.1666973, 0.7836699),
            (4.1667103, 0.7836780),
        ],
    ),
    (
        Domain::Disk,
        &[5, 6],
        DISK_H,
        [
            (4.8741035, 0.8760355),
            (4.8733986, 0.8758772),
            (4.8732345, 0.8758363),
        ],
    ),
];

const TABLE2: [Column; 15] = [
    (
        Domain::Square,
        &[1],
        SQUARE_H,
        r(1.8795675, 1.8795717, 1.8795854),
    ),
    (
        Domain::LShape,
        &[1],
        SQUARE_H,
        r(1.4775023, 1.4767526, 1.4764066),
    ),
    (
        Domain::Triangle,
        &[1],
        SQUARE_H,
        r(1.8184414, 1.8184573, 1.8184622),
    ),
    (
        Domain::Square,
        &[2],
        SQUARE_H,
        r(2.4440863, 2.4441734, 2.4442186),
    ),
    (
        Domain::LShape,
        &[2],
        SQUARE_H,
        r(1.5696996, 1.5697172, 1.5697237),
    ),
    (
        Domain::Triangle,
        &[2],
        SQUARE_H,
        r(2.2870296, 2.2870557, 2.2870651),
    ),
    (
        Domain::Square,
        &[3],
        SQUARE_H,
        r(2.4442285, 2.4441893, 2.4442212),
    ),
    (
        Domain::LShape,
        &[3],
        SQUARE_H,
        r(1.7053198, 1.7051917, 1.7051196),
    ),
    (
        Domain::Triangle,
        &[3],
        SQUARE_H,
        r(2.2870296, 2.2870557, 2.2870651),
    ),
    (
        Domain::Square,
        &[4],
        SQUARE_H,
        r(2.8667518, 2.8664156, 2.8664256),
    ),
    (
        Domain::LShape,
        &[4],
        SQUARE_H,
        r(1.7830953, 1.7831002, 1.7831114),
    ),
    (
        Domain::Triangle,
        &[4],
        SQUARE_H,
        r(2.8375736, 2.8376056, 2.8376222),
    ),
    (
        Domain::Disk,
        &[1],
        DISK_H,
        r(1.9883914, 1.9880919, 1.9880191),
    ),
    (
        Domain::Disk,
        &[2, 3],
        DISK_H,
        r(2.6134315, 2.6130503, 2.6129596),
    ),
    (
        Domain::Disk,
        &[13, 14],
        [0.049, 0.025, 0.006],
        [
            (4.9056584, 0.5787253),
            (4.9018623, 0.5781361),
            (4.9009219, 0.5781031),
        ],
    ),
];

// (affine, indices, values)
type AdiniColumn = (bool, &'static [usize], [(f64, f64); 3]);

const TABLE3: [AdiniColumn; 6] = [
    (true, &[1], r(2.8178682, 2.8211011, 2.8219168)),
    (true, &[2], r(3.532859351, 3.537222143, 3.538327097)),
    (
        true,
        &[5, 6],
        [
            (4.4949831, 0.8710067),
            (4.4961529, 0.8713583),
            (4.4964517, 0.8714506),
        ],
    ),
    (false, &[1], r(1.8778418, 1.8791512, 1.8794810)),
    (false, &[2, 3], r(2.4413924, 2.4435179, 2.4440561)),
    (false, &[4], r(2.8588866, 2.8645286, 2.8659601)),
];

/// The published values of table 1, 2 or 3.
pub fn published_values(table: u8) -> Result<Vec<PublishedValue>> {
    let expand = |element, affine, domain, indices, h: [f64; 3], v: [(f64, f64); 3]| {
        (0..3).map(move |i| PublishedValue {
            table,
            domain,
            element,
            affine,
            indices,
            h: h[i],
            k: Complex64::new(v[i].0, v[i].1),
        })
    };
    let columns = |cols: &[Column], affine: bool| -> Vec<PublishedValue> {
        cols.iter()
            .flat_map(|&(d, ix, h, v)| expand(ElementKind::Mz, affine, d, ix, h, v))
            .collect()
    };
    match table {
        1 => Ok(columns(&TABLE1, true)),
        2 => Ok(columns(&TABLE2, false)),
        3 => Ok(TABLE3
            .iter()
            .flat_map(|&(affine, ix, v)| {
                expand(ElementKind::Adini, affine, Domain::Square, ix, SQUARE_H, v)
            })
            .collect()),
        _ => Err(Error::InvalidArgument(format!(
            "there is no table {table} (1, 2 or 3)"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    /// Run the three published levels instead of the two coarser ones.
    pub full: bool,
    pub tolerance: f64,
    pub exec: Execution,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            full: false,
            tolerance: 1e-8,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    Fail,
    /// The solver produced no value for this row.
    Failed,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub published: PublishedValue,
    /// `level` compares at matching `h`; `limit` compares our finest level
    /// with the finest published value.
    pub check: &'static str,
    pub index: usize,
    pub level: usize,
    pub h: f64,
    pub k: Option<Complex64>,
    pub tolerance: f64,
    pub status: RowStatus,
}

impl TableRow {
    pub fn abs_diff(&self) -> Option<f64> {
        self.k.map(|k| (k - self.published.k).norm())
    }
}

/// Per-level tolerance.
fn level_tolerance(element: ElementKind) -> f64 {
    match element {
        ElementKind::Adini => 1e-5,
        ElementKind::Mz => 2e-3,
    }
}

/// Finest computed level against the finest published value.
const LIMIT_TOLERANCE: f64 = 5e-4;

fn levels_for(domain: Domain, full: bool) -> Vec<usize> {
    match (domain, full) {
        (Domain::Square | Domain::LShape, false) => vec![32, 64],
        (Domain::Square | Domain::LShape, true) => vec![32, 64, 128],
        (Domain::Triangle, false) => vec![6, 7],
        (Domain::Triangle, true) => vec![6, 7, 8],
        (Domain::Disk, false) => vec![3, 4, 5],
        (Domain::Disk, true) => vec![3, 4, 5, 6],
    }
}

fn case_config(
    v: &PublishedValue,
    indices: Vec<usize>,
    options: &TableOptions,
) -> ExperimentConfig {
    let (refraction, mu) = if v.affine {
        (
            RefractionKind::Affine {
                a: 8.0,
                b: 1.0,
                c: -1.0,
            },
            1.0 / 9.0,
        )
    } else {
        (RefractionKind::Constant(16.0), 1.0 / 15.0)
    };
    let nev = indices.iter().max().copied().unwrap_or(1) + 2;
    ExperimentConfig {
        domain: v.domain,
        element: v.element,
        refraction,
        mu: Some(mu),
        levels: levels_for(v.domain, options.full),
        nev,
        indices,
        tolerance: options.tolerance,
        reference: ReferenceKind::Richardson,
        ..Default::default()
    }
}

/// Computed level for a published `h = sqrt2 / m`; triangle level
/// `L` carries the label `m = 2^(L - 1)`. None for the disk.
fn matching_level(domain: Domain, levels: &[LevelResult], h: f64) -> Option<&LevelResult> {
    let m = (std::f64::consts::SQRT_2 / h).round() as usize;
    let level = match domain {
        Domain::Square | Domain::LShape => m,
        Domain::Triangle if m.is_power_of_two() => m.trailing_zeros() as usize + 1,
        _ => return None,
    };
    levels.iter().find(|l| l.level == level)
}

fn row(
    published: PublishedValue,
    check: &'static str,
    index: usize,
    level: &LevelResult,
    tolerance: f64,
) -> TableRow {
    let k = match (level.converged, published.k.im != 0.0) {
        (false, _) => None,
        (true, false) => level.k(index),
        (true, true) => level.first_complex(),
    };
    let status = match k {
        None => RowStatus::Failed,
        Some(k) if (k - published.k).norm() <= tolerance => RowStatus::Pass,
        Some(_) => RowStatus::Fail,
    };
    TableRow {
        published,
        check,
        index,
        level: level.level,
        h: level.h,
        k,
        tolerance,
        status,
    }
}

/// Recomputes a table and compares it with the published values.
pub fn reproduce_tables(table: u8, options: &TableOptions) -> Result<Vec<TableRow>> {
    let values = published_values(table)?;
    // one solve per (domain, n) covering all indices of that column
    let mut cases: Vec<(Domain, bool, Vec<usize>)> = Vec::new();
    for v in &values {
        match cases
            .iter_mut()
            .find(|c| c.0 == v.domain && c.1 == v.affine)
        {
            Some(c) => {
                for j in v.indices {
                    if !c.2.contains(j) {
                        c.2.push(*j);
                    }
                }
            }
            None => cases.push((v.domain, v.affine, v.indices.to_vec())),
        }
    }
    let mut rows = Vec::new();
    for (domain, affine, mut indices) in cases {
        indices.sort_unstable();
        let column: Vec<&PublishedValue> = values
            .iter()
            .filter(|v| v.domain == domain && v.affine == affine)
            .collect();
        let config = case_config(column[0], indices, options);
        info!(
            "event=table_case table={table} domain={} n={}",
            domain.name(),
            config.refraction.label()
        );
        let levels = match run_case(&config, options.exec) {
            Ok(case) => case.levels,
            Err(e) => config
                .levels
                .iter()
                .map(|&level| LevelResult {
                    level,
                    h: f64::NAN,
                    dofs: 0,
                    pairs: Vec::new(),
                    converged: false,
                    error: Some(e.to_string()),
                })
                .collect(),
        };
        let finest = levels.last().expect("levels are non-empty");
        for v in &column {
            if let Some(level) = matching_level(domain, &levels, v.h) {
                for &j in v.indices {
                    rows.push(row(**v, "level", j, level, level_tolerance(v.element)));
                }
            }
        }
        if column[0].element == ElementKind::Mz {
            let mut groups: Vec<&[usize]> = column.iter().map(|v| v.indices).collect();
            groups.dedup();
            for g in groups {
                let published = column
                    .iter()
                    .filter(|v| v.indices == g)
                    .min_by(|a, b| a.h.total_cmp(&b.h))
                    .unwrap();
                for &j in g {
                    rows.push(row(**published, "limit", j, finest, LIMIT_TOLERANCE));
                }
            }
        }
    }
    Ok(rows)
}

pub const TABLE_CSV_HEADER: &str =
    "table,domain,element,n_kind,check,index,level,h,pub_h,k_re,k_im,pub_re,pub_im,abs_diff,rel_diff,tolerance,status";

pub fn write_table_csv(rows: &[TableRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{TABLE_CSV_HEADER}")?;
    for r in rows {
        let p = &r.published;
        let n_kind = if p.affine {
            "affine:8:1:-1"
        } else {
            "const:16"
        };
        let (k_re, k_im, abs, rel) = match (r.k, r.abs_diff()) {
            (Some(k), Some(d)) => (
                format!("{:.10}", k.re),
                format!("{:.10}", k.im),
                format!("{d:.3e}"),
                format!("{:.3e}", d / p.k.norm()),
            ),
            _ => Default::default(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{},{},{},{},{},{},{:.1e},{}",
            p.table,
            p.domain.name(),
            p.element.name(),
            n_kind,
            r.check,
            r.index,
            r.level,
            r.h,
            p.h,
            k_re,
            k_im,
            p.k.re,
            p.k.im,
            abs,
            rel,
            r.tolerance,
            r.status.name()
        )?;
    }
    Ok(())
}
