//! Refraction index models and the coefficient functions of the broken
//! bilinear forms.
//!
//! Under `n > 1` the forms use `1/(n-1)` and `n/(n-1)`; under `n < 1` the
//! mirrored `1/(1-n)` and `n/(1-n)`. Both are written below through
//! `|n - 1|`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Smallest admissible distance between `n` and 1.
pub const REGIME_MARGIN: f64 = 1e-8;
/// Grid resolution used when sampling `n` over the bounding box.
pub const SAMPLE_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `inf n >= 1 + delta`
    Above,
    /// `sup n <= 1 - beta`
    Below,
}

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum RefractionKind {
    Constant(f64),
    /// `n = a + b x1 + c x2`
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    Custom {
        value: ScalarFn,
        gradient: GradientFn,
    },
}

impl fmt::Debug for RefractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefractionKind::Constant(n) => write!(f, "Constant({n})"),
            RefractionKind::Affine { a, b, c } => write!(f, "Affine({a}, {b}, {c})"),
            RefractionKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl RefractionKind {
    pub fn value(&self, p: Point) -> f64 {
        match self {
            RefractionKind::Constant(n) => *n,
            RefractionKind::Affine { a, b, c } => a + b * p[0] + c * p[1],
            RefractionKind::Custom { value, .. } => value(p),
        }
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        match self {
            RefractionKind::Constant(_) => [0.0, 0.0],
            RefractionKind::Affine { b, c, .. } => [*b, *c],
            RefractionKind::Custom { gradient, .. } => gradient(p),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            RefractionKind::Constant(n) => format!("const:{n}"),
            RefractionKind::Affine { a, b, c } => format!("affine:{a}:{b}:{c}"),
            RefractionKind::Custom { .. } => "custom".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefractionModel {
    pub kind: RefractionKind,
    pub regime: Regime,
    /// Stabilization constant (mu_1 when `n > 1`, mu_2 when `n < 1`).
    pub mu: f64,
}

/// Coefficients of the forms at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub n: f64,
    pub grad_n: [f64; 2],
    /// `1/|n-1| - mu`, the weight of the Laplacian product.
    pub laplace_weight: f64,
    /// `1/|n-1|`
    pub inv: f64,
    pub grad_inv: [f64; 2],
    /// `n/|n-1|`
    pub ratio: f64,
    pub grad_ratio: [f64; 2],
}

/// Builds a model over the bounding box `[xmin, ymin, xmax, ymax]`.
///
/// The regime is read off a `SAMPLE_GRID x SAMPLE_GRID` sample of `n`.
/// Without an explicit `mu`, the smallest sampled `1/|n-1|` is used.
pub fn make_model(
    kind: RefractionKind,
    bbox: [f64; 4],
    mu: Option<f64>,
) -> Result<RefractionModel> {
    let mut lo = (f64::INFINITY, [0.0; 2]);
    let mut hi = (f64::NEG_INFINITY, [0.0; 2]);
    let step = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (SAMPLE_GRID - 1) as f64;
    for j in 0..SAMPLE_GRID {
        for i in 0..SAMPLE_GRID {
            let p = [step(bbox[0], bbox[2], i), step(bbox[1], bbox[3], j)];
            let n = kind.value(p);
            if !n.is_finite() {
                return Err(Error::Regime {
                    x: p[0],
                    y: p[1],
                    n,
                });
            }
            if n < lo.0 {
                lo = (n, p);
            }
            if n > hi.0 {
                hi = (n, p);
            }
        }
    }
    let (regime, min_weight) = if lo.0 >= 1.0 + REGIME_MARGIN {
        (Regime::Above, 1.0 / (hi.0 - 1.0))
    } else if hi.0 <= 1.0 - REGIME_MARGIN && lo.0 > 0.0 {
        (Regime::Below, 1.0 / (1.0 - lo.0))
    } else {
        let (n, p) = if (lo.0 - 1.0).abs() < (hi.0 - 1.0).abs() {
            lo
        } else {
            hi
        };
        return Err(Error::Regime {
            x: p[0],
            y: p[1],
            n,
        });
    };
    let mu = match mu {
        None => min_weight,
        Some(mu) if mu > 0.0 && mu <= min_weight * (1.0 + 1e-14) => mu,
        Some(mu) => {
            return Err(Error::InvalidArgument(format!(
                "stabilization constant {mu} must lie in (0, {min_weight}]"
            )))
        }
    };
    Ok(RefractionModel { kind, regime, mu })
}

impl RefractionModel {
    pub fn coefficients_at(&self, p: Point) -> Result<Coefficients> {
        let n = self.kind.value(p);
        let grad_n = self.kind.gradient(p);
        // s = sign(n - 1); d = |n - 1|
        let (s, d) = match self.regime {
            Regime::Above if n >= 1.0 + REGIME_MARGIN => (1.0, n - 1.0),
            Regime::Below if n <= 1.0 - REGIME_MARGIN && n > 0.0 => (-1.0, 1.0 - n),
            _ => {
                return Err(Error::Regime {
                    x: p[0],
                    y: p[1],
                    n,
                })
            }
        };
        let inv = 1.0 / d;
        // d/dx (1/|n-1|) = -s n' / (n-1)^2 ; d/dx (n/|n-1|) = -s n' / (n-1)^2
        let k = -s * inv * inv;
        let g = [k * grad_n[0], k * grad_n[1]];
        Ok(Coefficients {
            n,
            grad_n,
            laplace_weight: inv - self.mu,
            inv,
            grad_inv: g,
            ratio: n * inv,
            grad_ratio: g,
        })
    }
}
