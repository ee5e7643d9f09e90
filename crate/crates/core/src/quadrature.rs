//! Symmetric triangle rules and tensor Gauss rules on the unit square.
//!
//! Reference triangle is `(0,0), (1,0), (0,1)` (area 1/2), reference
//! rectangle is `[0,1]^2`. All rule tables are fixed constants.

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Point};

pub const DEFAULT_TRIANGLE_DEGREE: usize = 8;
pub const DEFAULT_RECTANGLE_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub kind: CellKind,
    /// Reference coordinates (unit-square coordinates, or `(l2, l3)` for
    /// triangles so that `l1 = 1 - x - y`).
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reference_area(&self) -> f64 {
        match self.kind {
            CellKind::Triangle => 0.5,
            CellKind::Rectangle => 1.0,
        }
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    /// Default rule for a cell kind.
    pub fn default_for(kind: CellKind) -> QuadRule {
        match kind {
            CellKind::Triangle => triangle_rule(DEFAULT_TRIANGLE_DEGREE).unwrap(),
            CellKind::Rectangle => rectangle_rule(DEFAULT_RECTANGLE_POINTS).unwrap(),
        }
    }
}

/// Quadrature points and weights on a physical cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

struct TriTable {
    degree: usize,
    centroid: Option<f64>,
    /// `(a, w)`: the three permutations of `(a, a, 1 - 2a)`.
    orbit3: &'static [(f64, f64)],
    /// `(a, b, w)`: the six permutations of `(a, b, 1 - a - b)`.
    orbit6: &'static [(f64, f64, f64)],
}

// Fully symmetric rules with positive weights and interior points,
// degrees 1..=10 (1, 3, 6, 6, 7, 12, 15, 16, 19, 25 points).
const TRIANGLE_TABLES: [TriTable; 10] = [
    TriTable {
        degree: 1,
        centroid: Some(0.5),
        orbit3: &[],
        orbit6: &[],
    },
    TriTable {
        degree: 2,
        centroid: None,
        orbit3: &[(0.16666666666666669, 0.16666666666666666)],
        orbit6: &[],
    },
    TriTable {
        degree: 3,
        centroid: None,
        orbit3: &[
            (0.44824227815694967, 0.07119981117400939),
            (0.1367450616924041, 0.09546685549265727),
        ],
        orbit6: &[],
    },
    TriTable {
        degree: 4,
        centroid: None,
        orbit3: &[
            (0.44594849091596483, 0.11169079483900571),
            (0.09157621350977076, 0.054975871827660935),
        ],
        orbit6: &[],
    },
    TriTable {
        degree: 5,
        centroid: Some(0.11250000000000049),
        orbit3: &[
            (0.4701420641051153, 0.06619707639425287),
            (0.1012865073234564, 0.06296959027241363),
        ],
        orbit6: &[],
    },
    TriTable {
        degree: 6,
        centroid: None,
        orbit3: &[
            (0.24928674517091096, 0.05839313786318894),
            (0.06308901449150182, 0.02542245318510317),
        ],
        orbit6: &[(0.3103524510337836, 0.6365024991213987, 0.04142553780918728)],
    },
    TriTable {
        degree: 7,
        centroid: None,
        orbit3: &[
            (0.2406999827206246, 0.06416170884434447),
            (0.46746322271852353, 0.01661340295165664),
            (0.06277750286661132, 0.024551097015043544),
        ],
        orbit6: &[(0.044505045279833996, 0.292226530715289, 0.03067022892781101)],
    },
    TriTable {
        degree: 8,
        centroid: Some(0.07215780383888751),
        orbit3: &[
            (0.17056930775175438, 0.05160868526735927),
            (0.4592925882927168, 0.047545817133645585),
            (0.05054722831703143, 0.016229248811599532),
        ],
        orbit6: &[(
            0.26311282963465693,
            0.7284923929553934,
            0.013615157087216554,
        )],
    },
    TriTable {
        degree: 9,
        centroid: Some(0.04856789814147641),
        orbit3: &[
            (0.43708959149304905, 0.03891377050241761),
            (0.04472951339444983, 0.012788837829347345),
            (0.4896825191988122, 0.015667350113502152),
            (0.18820353561906578, 0.039823869463605804),
        ],
        orbit6: &[(
            0.03683841205474984,
            0.7411985987845013,
            0.021641769688650805,
        )],
    },
    TriTable {
        degree: 10,
        centroid: Some(0.045408995191381925),
        orbit3: &[
            (0.4855776333836579, 0.018362978878233422),
            (0.10948157548502663, 0.022660529717763212),
        ],
        orbit6: &[
            (
                0.06680325101219067,
                0.009540815400297834,
                0.004710833481865153,
            ),
            (0.0250035347626805, 0.7283239045974266, 0.014163621265527044),
            (0.3079398387641149, 0.1417072194148724, 0.03637895842271249),
        ],
    },
];

// Gauss-Legendre nodes and weights on [0, 1], 1..=10 points.
const GAUSS_LEGENDRE: [&[(f64, f64)]; 10] = [
    &[(0.5, 1.0)],
    &[(0.2113248654051871, 0.5), (0.7886751345948129, 0.5)],
    &[
        (0.11270166537925831, 0.2777777777777778),
        (0.5, 0.4444444444444444),
        (0.8872983346207417, 0.2777777777777778),
    ],
    &[
        (0.06943184420297371, 0.17392742256872692),
        (0.33000947820757187, 0.32607257743127305),
        (0.6699905217924281, 0.32607257743127305),
        (0.9305681557970263, 0.17392742256872692),
    ],
    &[
        (0.046910077030668004, 0.11846344252809454),
        (0.23076534494715845, 0.23931433524968324),
        (0.5, 0.28444444444444444),
        (0.7692346550528415, 0.23931433524968324),
        (0.953089922969332, 0.11846344252809454),
    ],
    &[
        (0.03376524289842399, 0.08566224618958518),
        (0.16939530676686773, 0.1803807865240693),
        (0.38069040695840156, 0.23395696728634552),
        (0.6193095930415985, 0.23395696728634552),
        (0.8306046932331322, 0.1803807865240693),
        (0.966234757101576, 0.08566224618958518),
    ],
    &[
        (0.025446043828620736, 0.06474248308443485),
        (0.12923440720030277, 0.13985269574463832),
        (0.2970774243113014, 0.19091502525255946),
        (0.5, 0.2089795918367347),
        (0.7029225756886985, 0.19091502525255946),
        (0.8707655927996972, 0.13985269574463832),
        (0.9745539561713793, 0.06474248308443485),
    ],
    &[
        (0.019855071751231884, 0.05061426814518813),
        (0.10166676129318664, 0.11119051722668724),
        (0.2372337950418355, 0.15685332293894363),
        (0.4082826787521751, 0.181341891689181),
        (0.591717321247825, 0.181341891689181),
        (0.7627662049581645, 0.15685332293894363),
        (0.8983332387068134, 0.11119051722668724),
        (0.9801449282487681, 0.05061426814518813),
    ],
    &[
        (0.015919880246186954, 0.040637194180787206),
        (0.0819844463366821, 0.0903240803474287),
        (0.1933142836497048, 0.13030534820146772),
        (0.33787328829809554, 0.15617353852000143),
        (0.5, 0.1651196775006299),
        (0.6621267117019045, 0.15617353852000143),
        (0.8066857163502952, 0.13030534820146772),
        (0.9180155536633179, 0.0903240803474287),
        (0.984080119753813, 0.040637194180787206),
    ],
    &[
        (0.01304673574141414, 0.03333567215434407),
        (0.06746831665550775, 0.0747256745752903),
        (0.1602952158504878, 0.10954318125799102),
        (0.2833023029353764, 0.13463335965499817),
        (0.4255628305091844, 0.14776211235737644),
        (0.5744371694908156, 0.14776211235737644),
        (0.7166976970646236, 0.13463335965499817),
        (0.8397047841495122, 0.10954318125799102),
        (0.9325316833444922, 0.0747256745752903),
        (0.9869532642585859, 0.03333567215434407),
    ],
];

/// Symmetric rule on the reference triangle exact for total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    if !(1..=10).contains(&degree) {
        return Err(Error::InvalidArgument(format!(
            "triangle rule degree {degree} outside 1..=10"
        )));
    }
    let table = &TRIANGLE_TABLES[degree - 1];
    let mut bary: Vec<[f64; 3]> = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = table.centroid {
        bary.push([1.0 / 3.0; 3]);
        weights.push(w);
    }
    for &(a, w) in table.orbit3 {
        let c = 1.0 - 2.0 * a;
        for l in [[a, a, c], [a, c, a], [c, a, a]] {
            bary.push(l);
            weights.push(w);
        }
    }
    for &(a, b, w) in table.orbit6 {
        let c = 1.0 - a - b;
        for l in [
            [a, b, c],
            [a, c, b],
            [b, a, c],
            [b, c, a],
            [c, a, b],
            [c, b, a],
        ] {
            bary.push(l);
            weights.push(w);
        }
    }
    Ok(QuadRule {
        kind: CellKind::Triangle,
        points: bary.iter().map(|l| [l[1], l[2]]).collect(),
        weights,
        exactness_degree: table.degree,
    })
}

/// Gauss-Legendre rule with `n` points on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Result<&'static [(f64, f64)]> {
    if !(1..=10).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Gauss rule with {n} points outside 1..=10"
        )));
    }
    Ok(GAUSS_LEGENDRE[n - 1])
}

/// Tensor Gauss rule on `[0,1]^2`.
pub fn rectangle_rule(points_per_axis: usize) -> Result<QuadRule> {
    let line = gauss_legendre(points_per_axis)?;
    let mut points = Vec::with_capacity(line.len() * line.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for &(y, wy) in line {
        for &(x, wx) in line {
            points.push([x, y]);
            weights.push(wx * wy);
        }
    }
    Ok(QuadRule {
        kind: CellKind::Rectangle,
        points,
        weights,
        exactness_degree: 2 * points_per_axis - 1,
    })
}

/// Maps a reference rule onto a physical cell: affine for triangles,
/// axis scaling for rectangles (lower-left corner first).
pub fn map_rule(rule: &QuadRule, kind: CellKind, cell: &[Point]) -> Result<MappedRule> {
    if kind != rule.kind || cell.len() != kind.vertex_count() {
        return Err(Error::KindMismatch {
            element: format!("{} rule", rule.kind.name()),
            cells: kind.name().to_string(),
        });
    }
    let p0 = cell[0];
    let (jx, jy) = match kind {
        CellKind::Triangle => (
            [cell[1][0] - p0[0], cell[1][1] - p0[1]],
            [cell[2][0] - p0[0], cell[2][1] - p0[1]],
        ),
        CellKind::Rectangle => ([cell[1][0] - p0[0], 0.0], [0.0, cell[3][1] - p0[1]]),
    };
    let det = (jx[0] * jy[1] - jy[0] * jx[1]).abs();
    let points = rule
        .points
        .iter()
        .map(|&[s, t]| [p0[0] + jx[0] * s + jy[0] * t, p0[1] + jx[1] * s + jy[1] * t])
        .collect();
    let weights = rule.weights.iter().map(|w| w * det).collect();
    Ok(MappedRule { points, weights })
}
