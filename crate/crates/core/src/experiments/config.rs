use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::elements::ElementKind;
use crate::error::{Error, Result};
use crate::mesh::Domain;
use crate::refraction::RefractionKind;

/// How the reference value of a convergence study is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Order-2 extrapolation from the two finest levels.
    Richardson,
    /// The finest computed value; that level is left out of the fit.
    Finest,
}

impl FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(ReferenceKind::Richardson),
            "finest" => Ok(ReferenceKind::Finest),
            _ => Err(Error::Config(format!(
                "unknown reference `{s}` (richardson|finest)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub element: ElementKind,
    pub refraction: RefractionKind,
    pub mu: Option<f64>,
    /// Mesh parameters, strictly increasing (see `build_domain_mesh`).
    pub levels: Vec<usize>,
    /// Empty: derived from a coarse-mesh sweep.
    pub shifts: Vec<Complex64>,
    pub nev: usize,
    /// 1-based eigenvalue indices in `|k|` order.
    pub indices: Vec<usize>,
    pub tolerance: f64,
    /// Replace `G_h` by the identity in the block problem.
    pub identity_mass: bool,
    pub reference: ReferenceKind,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::Square,
            element: ElementKind::Mz,
            refraction: RefractionKind::Constant(16.0),
            mu: None,
            levels: vec![8, 16, 32],
            shifts: Vec::new(),
            nev: 6,
            indices: vec![1],
            tolerance: 1e-8,
            identity_mass: true,
            reference: ReferenceKind::Richardson,
            output: None,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("bad entry `{s}` for `{key}`")))
        })
        .collect()
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad number `{value}` for `{key}`")))
}

/// Parses `3.5`, `-2i`, `20+8i`, `20 - 8i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("bad complex number `{s}`"));
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let split = body
        .char_indices()
        .filter(|&(i, c)| {
            (c == '+' || c == '-') && i > 0 && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
        })
        .map(|(i, _)| i)
        .next_back();
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => x.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(i) => Ok(Complex64::new(
            body[..i].parse().map_err(|_| bad())?,
            imag(&body[i..])?,
        )),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

impl ExperimentConfig {
    /// Flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        let mut n_kind: Option<String> = None;
        let mut n_const = None;
        let mut n_affine = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n.kind" => n_kind = Some(value.to_string()),
                "n.const" => n_const = Some(parse_f64(key, value)?),
                "n.affine" => n_affine = Some(parse_list::<f64>(key, value)?),
                _ => config.set(key, value)?,
            }
        }
        let kind = n_kind.unwrap_or_else(|| {
            if n_affine.is_some() {
                "affine".into()
            } else {
                "const".into()
            }
        });
        config.refraction = match kind.as_str() {
            "const" | "constant" => RefractionKind::Constant(n_const.unwrap_or(16.0)),
            "affine" => match n_affine.as_deref() {
                Some(&[a, b, c]) => RefractionKind::Affine { a, b, c },
                Some(_) => {
                    return Err(Error::Config(
                        "`n.affine` needs three coefficients a,b,c".into(),
                    ))
                }
                None => RefractionKind::Affine {
                    a: 8.0,
                    b: 1.0,
                    c: -1.0,
                },
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown n.kind `{other}` (const|affine)"
                )))
            }
        };
        config.validate()?;
        Ok(config)
    }

    /// Sets one key other than the `n.*` family.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "domain" => self.domain = value.parse()?,
            "element" => self.element = value.parse()?,
            "mu" => {
                self.mu = match value {
                    "" | "auto" => None,
                    v => Some(parse_f64(key, v)?),
                }
            }
            "levels" => self.levels = parse_list(key, value)?,
            "shifts" => {
                self.shifts = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(parse_complex)
                    .collect::<Result<_>>()?
            }
            "nev" => {
                self.nev = parse_list::<usize>(key, value)?
                    .first()
                    .copied()
                    .unwrap_or(0)
            }
            "indices" => self.indices = parse_list(key, value)?,
            "tol" | "tolerance" => self.tolerance = parse_f64(key, value)?,
            "mass" => {
                self.identity_mass = match value {
                    "identity" => true,
                    "gram" => false,
                    _ => {
                        return Err(Error::Config(format!(
                            "unknown mass `{value}` (identity|gram)"
                        )))
                    }
                }
            }
            "reference" => self.reference = value.parse()?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.element == ElementKind::Adini && self.domain != Domain::Square {
            return Err(Error::Config(
                "the Adini element runs on uniform rectangles of the square only".into(),
            ));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "levels must be non-empty and strictly increasing".into(),
            ));
        }
        if self.domain != Domain::Disk && self.levels[0] == 0 {
            return Err(Error::Config(
                "mesh parameter 0 is only valid on the disk".into(),
            ));
        }
        if self.nev == 0 {
            return Err(Error::Config("nev must be positive".into()));
        }
        if let Some(&j) = self.indices.iter().find(|&&j| j == 0 || j > self.nev) {
            return Err(Error::Config(format!("index {j} outside 1..={}", self.nev)));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("3.5").unwrap(), Complex64::new(3.5, 0.0));
        assert_eq!(parse_complex("20+8i").unwrap(), Complex64::new(20.0, 8.0));
        assert_eq!(
            parse_complex("20 - 8i").unwrap(),
            Complex64::new(20.0, -8.0)
        );
        assert_eq!(parse_complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(
            parse_complex("1e-3+1e2i").unwrap(),
            Complex64::new(1e-3, 100.0)
        );
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn parses_flat_file() {
        let c = ExperimentConfig::parse(
            "# affine run\ndomain = lshape\nelement = mz\nn.kind = affine\nn.affine = 8, 1, -1\nmu = 0.1111\n\
             levels = 4, 8, 16\nshifts = 3.5, 20+8i\nnev = 8\nindices = 1,2\ntol = 1e-9\nmass = gram\n",
        )
        .unwrap();
        assert_eq!(c.domain, Domain::LShape);
        assert_eq!(c.levels, vec![4, 8, 16]);
        assert_eq!(c.shifts.len(), 2);
        assert!(!c.identity_mass);
        assert!(
            matches!(c.refraction, RefractionKind::Affine { a, b, c } if a == 8.0 && b == 1.0 && c == -1.0)
        );
        assert_eq!(c.mu, Some(0.1111));
    }

    #[test]
    fn rejects_invalid() {
        assert!(ExperimentConfig::parse("domain = disk\nelement = adini\n").is_err());
        assert!(ExperimentConfig::parse("levels = 8, 8\n").is_err());
        assert!(ExperimentConfig::parse("nev = 2\nindices = 3\n").is_err());
        assert!(ExperimentConfig::parse("colour = blue\n").is_err());
        assert!(ExperimentConfig::parse("n.kind = affine\nn.affine = 1,2\n").is_err());
        assert!(ExperimentConfig::parse("just text\n").is_err());
    }
}
