//! JSON schemas for directions, trigonometric polynomials, one-forms and
//! curves. Real numbers may be given as JSON numbers or as decimal strings;
//! direction components keep every digit of a decimal string.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::curves::{CurveFamily, PiecewiseCurve, SegmentKind, Step};
use crate::error::{Error, Result};
use crate::precise::PreciseReal;
use crate::spectral::{OneForm, TrigPoly};
use crate::torus_flow::{DirectionVector, LiftPoint};

/// A real number written as a JSON number or a decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Number(serde_json::Number),
    Text(String),
}

impl Decimal {
    pub fn text(&self) -> String {
        match self {
            Decimal::Number(n) => n.to_string(),
            Decimal::Text(s) => s.trim().to_string(),
        }
    }

    pub fn precise(&self) -> Result<PreciseReal> {
        PreciseReal::from_decimal(&self.text())
    }

    pub fn value(&self) -> Result<f64> {
        let v = self.precise()?.value();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("non-finite number {}", self.text())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionSpec {
    pub d: usize,
    pub alpha: Vec<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<i64>,
}

impl DirectionSpec {
    pub fn direction(&self) -> Result<DirectionVector> {
        if self.alpha.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: self.alpha.len(),
            });
        }
        let comps = self.alpha.iter().map(Decimal::precise).collect::<Result<Vec<_>>>()?;
        DirectionVector::from_precise(comps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub n: Vec<i64>,
    pub re: Decimal,
    #[serde(default = "zero_decimal")]
    pub im: Decimal,
}

fn zero_decimal() -> Decimal {
    Decimal::Number(0.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPolySpec {
    pub d: usize,
    pub modes: Vec<ModeSpec>,
}

impl TrigPolySpec {
    pub fn poly(&self) -> Result<TrigPoly> {
        let entries = self
            .modes
            .iter()
            .map(|m| Ok((m.n.clone(), Complex64::new(m.re.value()?, m.im.value()?))))
            .collect::<Result<Vec<_>>>()?;
        TrigPoly::from_modes(self.d, &entries)
    }

    /// Every stored coefficient, in mode order.
    pub fn from_poly(p: &TrigPoly) -> Self {
        TrigPolySpec {
            d: p.dim(),
            modes: p
                .modes()
                .map(|(n, c)| ModeSpec {
                    n: n.clone(),
                    re: number(c.re),
                    im: number(c.im),
                })
                .collect(),
        }
    }
}

fn number(v: f64) -> Decimal {
    serde_json::Number::from_f64(v)
        .map(Decimal::Number)
        .unwrap_or_else(|| Decimal::Text(v.to_string()))
}

/// A one-form as a list of `d` component polynomials, or wrapped as
/// `{"components": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormSpec {
    List(Vec<TrigPolySpec>),
    Wrapped { components: Vec<TrigPolySpec> },
}

impl FormSpec {
    pub fn form(&self) -> Result<OneForm> {
        let comps = match self {
            FormSpec::List(c) | FormSpec::Wrapped { components: c } => c,
        };
        if comps.is_empty() {
            return Err(Error::Parse("a one-form needs at least one component".into()));
        }
        OneForm::new(comps.iter().map(TrigPolySpec::poly).collect::<Result<Vec<_>>>()?)
    }

    pub fn from_form(eta: &OneForm) -> Self {
        FormSpec::List(eta.components().iter().map(TrigPolySpec::from_poly).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub kind: SegmentKind,
    pub displacement: Vec<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub basepoint: Vec<Decimal>,
    pub segments: Vec<SegmentSpec>,
}

fn values(v: &[Decimal]) -> Result<Vec<f64>> {
    v.iter().map(Decimal::value).collect()
}

impl CurveSpec {
    /// Builds the curve and checks segment kinds against `alpha`.
    pub fn curve(&self, alpha: &DirectionVector) -> Result<PiecewiseCurve> {
        let steps = self
            .segments
            .iter()
            .map(|s| Ok(Step::new(values(&s.displacement)?, s.kind)))
            .collect::<Result<Vec<_>>>()?;
        let base = values(&self.basepoint)?;
        if base.len() != alpha.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                got: base.len(),
            });
        }
        PiecewiseCurve::new(LiftPoint::new(base), steps, alpha)
    }

    pub fn from_curve(g: &PiecewiseCurve) -> Self {
        CurveSpec {
            basepoint: g.basepoint().coords().iter().map(|&v| number(v)).collect(),
            segments: g
                .segments()
                .iter()
                .map(|s| SegmentSpec {
                    kind: s.kind,
                    displacement: s.displacement.iter().map(|&v| number(v)).collect(),
                })
                .collect(),
        }
    }
}

/// A single curve, a list of curves, or `{"curves": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Single(CurveSpec),
    List(Vec<CurveSpec>),
    Wrapped { curves: Vec<CurveSpec> },
}

impl FamilySpec {
    pub fn family(&self, alpha: &DirectionVector) -> Result<CurveFamily> {
        let specs: Vec<&CurveSpec> = match self {
            FamilySpec::Single(c) => vec![c],
            FamilySpec::List(c) | FamilySpec::Wrapped { curves: c } => c.iter().collect(),
        };
        Ok(CurveFamily::new(specs.into_iter().map(|c| c.curve(alpha)).collect::<Result<Vec<_>>>()?))
    }

    pub fn from_family(f: &CurveFamily) -> Self {
        FamilySpec::Wrapped {
            curves: f.curves.iter().map(CurveSpec::from_curve).collect(),
        }
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn parse_direction(text: &str) -> Result<DirectionSpec> {
    from_json(text, "direction")
}

pub fn parse_trig_poly(text: &str) -> Result<TrigPoly> {
    from_json::<TrigPolySpec>(text, "function")?.poly()
}

pub fn parse_form(text: &str) -> Result<OneForm> {
    from_json::<FormSpec>(text, "form")?.form()
}

pub fn parse_family(text: &str, alpha: &DirectionVector) -> Result<CurveFamily> {
    from_json::<FamilySpec>(text, "curve")?.family(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_keeps_decimal_digits() {
        let spec = parse_direction(r#"{"d":2,"alpha":["1","0.1000000000000000000000001"],"radius":5}"#).unwrap();
        let a = spec.direction().unwrap();
        assert_eq!(spec.radius, Some(5));
        // 10·0.1000…01 - 1 is 1e-24, invisible in a single f64
        assert!((a.dot(&[-1, 10]) - 1e-24).abs() < 1e-30, "{}", a.dot(&[-1, 10]));
        assert!(matches!(
            parse_direction(r#"{"d":3,"alpha":["1","2"]}"#).unwrap().direction(),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(parse_direction(r#"{"d":2,"alpha":["x","1"]}"#).and_then(|s| s.direction()).is_err());
    }

    #[test]
    fn polynomial_round_trip() {
        let p = parse_trig_poly(r#"{"d":2,"modes":[{"n":[1,0],"re":0.5,"im":"0"},{"n":[0,1],"re":0,"im":-0.25}]}"#)
            .unwrap();
        assert_eq!(p.mode_count(), 4);
        assert!((p.evaluate(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
        let back = TrigPolySpec::from_poly(&p).poly().unwrap();
        assert_eq!(back, p);
        assert!(matches!(
            parse_trig_poly(r#"{"d":1,"modes":[{"n":[1],"re":1},{"n":[-1],"re":2}]}"#),
            Err(Error::InvalidPolynomial(_))
        ));
        assert!(matches!(parse_trig_poly("{\"d\":1"), Err(Error::Parse(_))));
    }

    #[test]
    fn forms_in_both_layouts() {
        let c = r#"{"d":2,"modes":[{"n":[0,0],"re":1}]}"#;
        let z = r#"{"d":2,"modes":[]}"#;
        let a = parse_form(&format!("[{c},{z}]")).unwrap();
        let b = parse_form(&format!("{{\"components\":[{c},{z}]}}")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, OneForm::dx(2, 0));
        assert!(parse_form("[]").is_err());
    }

    #[test]
    fn curves_validate_kinds() {
        let alpha = DirectionVector::from_decimals(&["1", "0.5"]).unwrap();
        let text = r#"{"basepoint":["0","0"],"segments":[{"kind":"flow","displacement":[1,0.5]},{"kind":"transverse","displacement":["0","0.25"]}]}"#;
        let f = parse_family(text, &alpha).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.curves[0].len(), 2);
        let back = FamilySpec::from_family(&f).family(&alpha).unwrap();
        assert_eq!(back, f);

        let bad = r#"{"basepoint":[0,0],"segments":[{"kind":"flow","displacement":[0,1]}]}"#;
        assert!(matches!(parse_family(bad, &alpha), Err(Error::InvalidSegment(_))));
        let list = format!("[{text},{text}]");
        assert_eq!(parse_family(&list, &alpha).unwrap().len(), 2);
    }
}
