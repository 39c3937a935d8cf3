//! JSON problem files.
//!
//! ```json
//! {
//!   "support": { "lo": 0, "hi": 100 },
//!   "target": { "call": { "d": 50 } },
//!   "constraints": [
//!     { "g": { "monomial": { "k": 1 } }, "lo": 50, "hi": 50 },
//!     { "g": { "monomial": { "k": 2 } }, "lo": 2725, "hi": 2725 }
//!   ],
//!   "sense": "upper",
//!   "family": { "kind": "dirac" }
//! }
//! ```
//!
//! Infinite ends are written `"inf"` and `"-inf"`.

use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use semibound::model::{coinsurance_payoff, MixtureFamily, MomentConstraint, ProblemSpec, Sense};
use semibound::polyalg::{Denominator, Domain, PiecewiseFunction, Polynomial};
use serde::{Deserialize, Serialize};

/// A real number that may be infinite; infinities serialize as strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNumber", into = "RawNumber")]
pub struct Extended(pub f64);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Num(f64),
    Text(String),
}

impl TryFrom<RawNumber> for Extended {
    type Error = String;

    fn try_from(raw: RawNumber) -> Result<Self, String> {
        match raw {
            RawNumber::Num(x) => Ok(Extended(x)),
            RawNumber::Text(s) => match s.as_str() {
                "inf" | "+inf" => Ok(Extended(f64::INFINITY)),
                "-inf" => Ok(Extended(f64::NEG_INFINITY)),
                other => Err(format!("expected a number, \"inf\" or \"-inf\", got {other:?}")),
            },
        }
    }
}

impl From<Extended> for RawNumber {
    fn from(x: Extended) -> Self {
        match x.0 {
            v if v == f64::INFINITY => RawNumber::Text("inf".into()),
            v if v == f64::NEG_INFINITY => RawNumber::Text("-inf".into()),
            v => RawNumber::Num(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportSpec {
    pub lo: Extended,
    pub hi: Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub interval: [Extended; 2],
    /// Ascending powers.
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `max(x - d, 0)`.
    Call { d: f64 },
    /// `gamma * (min(x, u) - d)` above `d`, zero below.
    Coinsurance { d: f64, u: f64, gamma: f64 },
    /// `(x - mu)^2`.
    Variance { mu: f64 },
    /// `x^k`.
    Monomial { k: usize },
    /// Contiguous polynomial pieces.
    Piecewise(Vec<PieceSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub g: FunctionSpec,
    pub lo: Extended,
    pub hi: Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SenseSpec {
    #[default]
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    #[default]
    Dirac,
    UniformZero,
    KhintchineUniform {
        mode: f64,
    },
    Lognormal {
        alpha: f64,
    },
    SmoothedUniform {
        mode: f64,
        eta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub support: SupportSpec,
    pub target: FunctionSpec,
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    pub sense: SenseSpec,
    #[serde(default)]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_cap: Option<f64>,
}

impl From<FamilySpec> for MixtureFamily {
    fn from(f: FamilySpec) -> Self {
        match f {
            FamilySpec::Dirac => MixtureFamily::Dirac,
            FamilySpec::UniformZero => MixtureFamily::UniformZero,
            FamilySpec::KhintchineUniform { mode } => MixtureFamily::KhintchineUniform { mode },
            FamilySpec::Lognormal { alpha } => MixtureFamily::Lognormal { alpha },
            FamilySpec::SmoothedUniform { mode, eta } => MixtureFamily::SmoothedUniform { mode, eta },
        }
    }
}

impl From<MixtureFamily> for FamilySpec {
    fn from(f: MixtureFamily) -> Self {
        match f {
            MixtureFamily::Dirac => FamilySpec::Dirac,
            MixtureFamily::UniformZero => FamilySpec::UniformZero,
            MixtureFamily::KhintchineUniform { mode } => FamilySpec::KhintchineUniform { mode },
            MixtureFamily::Lognormal { alpha } => FamilySpec::Lognormal { alpha },
            MixtureFamily::SmoothedUniform { mode, eta } => FamilySpec::SmoothedUniform { mode, eta },
        }
    }
}

/// Location of a value inside a problem file, for diagnostics.
struct Field<'a>(&'a str, Option<usize>);

impl fmt::Display for Field<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.1 {
            Some(i) => write!(f, "{}[{i}]", self.0),
            None => f.write_str(self.0),
        }
    }
}

impl FunctionSpec {
    /// The function on the whole real line (or the pieces' span).
    pub fn build(&self) -> Result<PiecewiseFunction> {
        let line = Domain::real_line();
        Ok(match self {
            FunctionSpec::Call { d } => PiecewiseFunction::call(line, *d),
            FunctionSpec::Coinsurance { d, u, gamma } => coinsurance_payoff(*d, *u, *gamma)?,
            FunctionSpec::Variance { mu } => {
                PiecewiseFunction::polynomial(line, Polynomial::new(vec![mu * mu, -2.0 * mu, 1.0]))
            }
            FunctionSpec::Monomial { k } => PiecewiseFunction::monomial(line, *k),
            FunctionSpec::Piecewise(pieces) => {
                let Some(first) = pieces.first() else { bail!("piecewise function needs at least one piece") };
                let mut breaks = vec![first.interval[0].0];
                for (i, p) in pieces.iter().enumerate() {
                    let last = *breaks.last().expect("nonempty");
                    if p.interval[0].0 != last {
                        bail!("piece {i} starts at {} but the previous piece ends at {last}", p.interval[0].0);
                    }
                    breaks.push(p.interval[1].0);
                }
                let polys = pieces.iter().map(|p| Polynomial::new(p.coeffs.clone())).collect();
                PiecewiseFunction::from_polynomials(breaks, polys)?
            }
        })
    }

    /// Piecewise form of a polynomial-piece function.
    pub fn from_function(f: &PiecewiseFunction) -> Result<Self> {
        let mut pieces = Vec::new();
        for (w, p) in f.breaks().windows(2).zip(f.pieces()) {
            if !matches!(p.denominator, Denominator::One) {
                bail!("rational pieces cannot be written to a problem file");
            }
            pieces.push(PieceSpec {
                interval: [Extended(w[0]), Extended(w[1])],
                coeffs: p.numerator.coeffs().to_vec(),
            });
        }
        Ok(FunctionSpec::Piecewise(pieces))
    }
}

impl ProblemFile {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let support = Domain::new(self.support.lo.0, self.support.hi.0).context("support")?;
        let target = self.target.build().with_context(|| Field("target", None).to_string())?;
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let g = c.g.build().with_context(|| format!("{}.g", Field("constraints", Some(i))))?;
                Ok(MomentConstraint::new(g, c.lo.0, c.hi.0))
            })
            .collect::<Result<Vec<_>>>()?;
        let sense = match self.sense {
            SenseSpec::Upper => Sense::Upper,
            SenseSpec::Lower => Sense::Lower,
        };
        let mut spec = ProblemSpec::new(support, target, constraints, sense, self.family.into())
            .map_err(|e| anyhow!("validation failed: {e}"))?;
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                bail!("epsilon: must be positive and finite, got {eps}");
            }
            spec = spec.with_epsilon(eps);
        }
        if let Some(cap) = self.search_cap {
            if !(cap > support.lower()) {
                bail!("search_cap: must exceed the support's lower end, got {cap}");
            }
            spec = spec.with_search_cap(cap);
        }
        Ok(spec)
    }

    /// File describing `spec` exactly, with its tolerance and cap explicit.
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        Ok(ProblemFile {
            support: SupportSpec {
                lo: Extended(spec.support.lower()),
                hi: Extended(spec.support.upper()),
            },
            target: FunctionSpec::from_function(&spec.target).context("target")?,
            constraints: spec
                .constraints
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    Ok(ConstraintSpec {
                        g: FunctionSpec::from_function(&c.g).with_context(|| format!("constraints[{i}].g"))?,
                        lo: Extended(c.sigma_lo),
                        hi: Extended(c.sigma_hi),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            sense: match spec.sense {
                Sense::Upper => SenseSpec::Upper,
                Sense::Lower => SenseSpec::Lower,
            },
            family: spec.family.into(),
            epsilon: Some(spec.cg_epsilon),
            search_cap: Some(spec.search_cap),
        })
    }
}

pub fn parse_problem_str(text: &str) -> Result<ProblemSpec> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.to_spec()
}

pub fn parse_problem_file(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_problem_str(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "support": {"lo": 0, "hi": 100},
        "target": {"call": {"d": 50}},
        "constraints": [
            {"g": {"monomial": {"k": 1}}, "lo": 50, "hi": 50},
            {"g": {"monomial": {"k": 2}}, "lo": 2725, "hi": 2725}
        ],
        "sense": "upper",
        "family": {"kind": "dirac"}
    }"#;

    #[test]
    fn minimal_file() {
        let spec = parse_problem_str(MINIMAL).unwrap();
        assert_eq!(spec.constraints.len(), 2);
        assert_eq!(spec.family, MixtureFamily::Dirac);
        assert_eq!(spec.support.upper(), 100.0);
        assert_eq!(spec.target.eval(80.0).unwrap(), 30.0);
    }

    #[test]
    fn lognormal_without_alpha() {
        let text = MINIMAL.replace(r#"{"kind": "dirac"}"#, r#"{"kind": "lognormal"}"#);
        let err = parse_problem_str(&text).unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace(r#""sense""#, r#""modee": 3, "sense""#);
        let err = parse_problem_str(&text).unwrap_err().to_string();
        assert!(err.contains("modee") && err.contains("line"), "{err}");
        let text = MINIMAL.replace(r#"{"kind": "dirac"}"#, r#"{"kind": "lognormal", "alpha": 2, "modee": 1}"#);
        assert!(parse_problem_str(&text).unwrap_err().to_string().contains("modee"));
    }

    #[test]
    fn infinite_ends() {
        let text = MINIMAL.replace(r#""hi": 100}"#, r#""hi": "inf"}"#);
        assert!(!parse_problem_str(&text).unwrap().support.is_bounded());
        let text = MINIMAL.replace(r#""hi": 100}"#, r#""hi": "infinity"}"#);
        assert!(parse_problem_str(&text).is_err());
    }

    #[test]
    fn piecewise_gaps_are_reported() {
        let f = FunctionSpec::Piecewise(vec![
            PieceSpec { interval: [Extended(0.0), Extended(1.0)], coeffs: vec![1.0] },
            PieceSpec { interval: [Extended(2.0), Extended(3.0)], coeffs: vec![1.0] },
        ]);
        assert!(f.build().unwrap_err().to_string().contains("piece 1"));
    }

    #[test]
    fn validation_failures_name_the_problem() {
        let text = MINIMAL.replace(r#""lo": 2725, "hi": 2725"#, r#""lo": 2000, "hi": 2000"#);
        let err = parse_problem_str(&text).unwrap_err().to_string();
        assert!(err.contains("validation"), "{err}");
    }
}
