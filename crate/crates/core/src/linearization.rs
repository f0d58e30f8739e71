//! The linearization map `l: T^d → A`, realised at the level of
//! representatives: a point `y` is represented by the twisted current of a
//! path from the fixed basepoint `x` to `y`, tabulated on a battery of test
//! forms.
//!
//! Along the flow, `l(φ^t y) = l(y) + t·c` where `c(η) = c_η` is the mean of
//! `η(X)`; pairing with the harmonic forms `dx_j` and reducing by the period
//! lattice `Z^d` recovers the translation `y ↦ y - x` on the Albanese torus.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curves::{concatenate, PiecewiseCurve};
use crate::currents::{evaluate_twisted, twist, Battery, CurrentHandle, FormKind, TwistedCurrent};
use crate::error::{Error, Result};
use crate::measure::POINT_TOL;
use crate::precise::wrap_unit;
use crate::torus_flow::{flow, DirectionVector, TorusPoint};

/// Gap above which a form is said to separate two points.
pub const SEPARATION_TOL: f64 = 1e-9;

/// Fixed data for a linearization experiment.
#[derive(Debug, Clone)]
pub struct Linearizer {
    alpha: DirectionVector,
    basepoint: TorusPoint,
    battery: Arc<Battery>,
}

/// `l(y)` through one representative path.
#[derive(Debug, Clone)]
pub struct LinearizationPoint {
    endpoint: TorusPoint,
    representative: TwistedCurrent,
    evaluations: Vec<f64>,
    battery: Arc<Battery>,
}

impl LinearizationPoint {
    pub fn endpoint(&self) -> &TorusPoint {
        &self.endpoint
    }

    pub fn representative(&self) -> &TwistedCurrent {
        &self.representative
    }

    pub fn path(&self) -> &PiecewiseCurve {
        self.representative.base().source()
    }

    /// Evaluations aligned with the battery order.
    pub fn evaluations(&self) -> &[f64] {
        &self.evaluations
    }

    pub fn evaluation(&self, id: &str) -> Option<f64> {
        self.battery.position(id).map(|k| self.evaluations[k])
    }

    pub fn battery(&self) -> &Battery {
        &self.battery
    }
}

/// `c(η) = c_η` tabulated on the battery.
#[derive(Debug, Clone)]
pub struct GeneratorCurrent {
    values: Vec<f64>,
    battery: Arc<Battery>,
}

impl GeneratorCurrent {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, id: &str) -> Option<f64> {
        self.battery.position(id).map(|k| self.values[k])
    }
}

/// A point of `H¹(T^d)* / Z^d ≅ T^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlbanesePoint {
    pub coords: Vec<f64>,
}

impl AlbanesePoint {
    pub fn as_torus_point(&self) -> TorusPoint {
        TorusPoint::new(self.coords.clone())
    }
}

/// Outcome of an injectivity probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub endpoints_differ: bool,
    /// Form realising `gap`, when one exceeds [`SEPARATION_TOL`].
    pub form: Option<String>,
    /// Separating gap, or the largest gap when the endpoints coincide.
    pub gap: f64,
    /// For coinciding endpoints: whether every evaluation agrees.
    pub same_class: Option<bool>,
}

impl Linearizer {
    pub fn new(alpha: DirectionVector, basepoint: TorusPoint, cutoff: i64) -> Result<Self> {
        if basepoint.dim() != alpha.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                got: basepoint.dim(),
            });
        }
        Ok(Linearizer {
            battery: Arc::new(Battery::standard(alpha.dim(), cutoff)),
            alpha,
            basepoint,
        })
    }

    /// Basepoint at the origin.
    pub fn at_origin(alpha: DirectionVector, cutoff: i64) -> Result<Self> {
        let d = alpha.dim();
        Self::new(alpha, TorusPoint::origin(d), cutoff)
    }

    pub fn alpha(&self) -> &DirectionVector {
        &self.alpha
    }

    pub fn basepoint(&self) -> &TorusPoint {
        &self.basepoint
    }

    pub fn battery(&self) -> &Battery {
        &self.battery
    }

    /// Tabulates `L(γ̃)` for a path `γ` from the basepoint to `y`.
    pub fn linearize(&self, y: &TorusPoint, path: &PiecewiseCurve) -> Result<LinearizationPoint> {
        if !path.start().approx_eq(&self.basepoint, POINT_TOL) {
            return Err(Error::EndpointMismatch(format!(
                "path starts at {:?}, basepoint is {:?}",
                path.start().coords(),
                self.basepoint.coords()
            )));
        }
        if !path.end().approx_eq(y, POINT_TOL) {
            return Err(Error::EndpointMismatch(format!(
                "path ends at {:?}, expected {:?}",
                path.end().coords(),
                y.coords()
            )));
        }
        let representative = twist(&CurrentHandle::new(path.clone()), &self.alpha);
        let evaluations = self
            .battery
            .forms()
            .iter()
            .map(|f| evaluate_twisted(&representative, &f.form))
            .collect::<Result<Vec<f64>>>()?;
        Ok(LinearizationPoint {
            endpoint: y.clone(),
            representative,
            evaluations,
            battery: Arc::clone(&self.battery),
        })
    }

    /// `c_η` on every battery form.
    pub fn generator(&self) -> Result<GeneratorCurrent> {
        let values = self
            .battery
            .forms()
            .iter()
            .map(|f| crate::spectral::solve_for_form(&f.form, &self.alpha).map(|s| s.c))
            .collect::<Result<Vec<f64>>>()?;
        Ok(GeneratorCurrent {
            values,
            battery: Arc::clone(&self.battery),
        })
    }

    /// `l(φ^t y)` represented by the path of `p` followed by the orbit arc of
    /// duration `t`.
    pub fn advance(&self, p: &LinearizationPoint, t: f64) -> Result<LinearizationPoint> {
        let arc = PiecewiseCurve::flow_segment(p.path().end_lift(), t, &self.alpha);
        let path = concatenate(p.path(), &arc)?;
        let target = flow(&p.endpoint, t, &self.alpha);
        // the lift and the reduced flow agree to rounding; anchor on the path
        let y = if path.end().approx_eq(&target, POINT_TOL) {
            target
        } else {
            path.end()
        };
        self.linearize(&y, &path)
    }

    /// `max_η |l(φ^t y)(η) - l(y)(η) - c_η t|` over the battery.
    pub fn check_equivariance(&self, p: &LinearizationPoint, t: f64) -> Result<f64> {
        let q = self.advance(p, t)?;
        self.equivariance_gap(p, &q, t)
    }

    /// The same gap for an arbitrary pair of representatives.
    pub fn equivariance_gap(&self, p: &LinearizationPoint, q: &LinearizationPoint, t: f64) -> Result<f64> {
        let c = self.generator()?;
        Ok(p.evaluations
            .iter()
            .zip(&q.evaluations)
            .zip(c.values())
            .map(|((a, b), ck)| (b - a - ck * t).abs())
            .fold(0.0, f64::max))
    }

    /// Pairing with `dx_j`, reduced mod the period lattice.
    pub fn albanese(&self, p: &LinearizationPoint) -> AlbanesePoint {
        albanese(p)
    }

    pub fn injectivity_probe(&self, p1: &LinearizationPoint, p2: &LinearizationPoint) -> Result<SeparationReport> {
        injectivity_probe(p1, p2, &self.alpha)
    }
}

/// Pairing with `dx_j`, reduced mod the period lattice.
pub fn albanese(p: &LinearizationPoint) -> AlbanesePoint {
    let coords = p
        .battery
        .forms()
        .iter()
        .zip(&p.evaluations)
        .filter(|(f, _)| matches!(f.kind, FormKind::Albanese { .. }))
        .map(|(_, v)| wrap_unit(*v))
        .collect();
    AlbanesePoint { coords }
}

/// Candidate separating functionals, in search order: `dx_j`, then
/// transverse forms `θ` with `θ(X) = 0`, then `η₀ = dx_p/α_p` with
/// `η₀(X) = 1`, then the rest of the battery.
fn probe_values(p: &LinearizationPoint, alpha: &DirectionVector) -> Vec<(String, f64)> {
    let b = &p.battery;
    let ev = &p.evaluations;
    let a = alpha.alpha();
    let pivot = a.iter().position(|&v| v != 0.0).expect("alpha is nonzero");
    let mut out = Vec::new();
    for (f, v) in b.forms().iter().zip(ev) {
        if matches!(f.kind, FormKind::Albanese { .. }) {
            out.push((f.id.clone(), *v));
        }
    }
    for f in b.forms() {
        if let FormKind::Modulated { n, sine, j } = &f.kind {
            if *j == pivot {
                continue;
            }
            let (Some(kj), Some(kp)) = (
                b.modulated_position(n, *sine, *j),
                b.modulated_position(n, *sine, pivot),
            ) else {
                continue;
            };
            let value = a[pivot] * ev[kj] - a[*j] * ev[kp];
            out.push((format!("theta[{}]", f.id), value));
        }
    }
    let dxp = b.position(&format!("dx{}", pivot + 1)).expect("battery has dx_j");
    out.push((format!("eta0=dx{}/alpha{}", pivot + 1, pivot + 1), ev[dxp] / a[pivot]));
    for (f, v) in b.forms().iter().zip(ev) {
        if matches!(f.kind, FormKind::Modulated { .. }) {
            out.push((f.id.clone(), *v));
        }
    }
    out
}

/// Looks for a test form on which `p1` and `p2` differ.
pub fn injectivity_probe(
    p1: &LinearizationPoint,
    p2: &LinearizationPoint,
    alpha: &DirectionVector,
) -> Result<SeparationReport> {
    if p1.battery.len() != p2.battery.len() || p1.battery.cutoff() != p2.battery.cutoff() {
        return Err(Error::DimensionMismatch {
            expected: p1.battery.len(),
            got: p2.battery.len(),
        });
    }
    if !p1.path().start().approx_eq(&p2.path().start(), POINT_TOL) {
        return Err(Error::BasepointMismatch("probe points use different basepoints".into()));
    }
    let v1 = probe_values(p1, alpha);
    let v2 = probe_values(p2, alpha);
    let endpoints_differ = !p1.endpoint.approx_eq(&p2.endpoint, POINT_TOL);
    if endpoints_differ {
        for ((id, a), (_, b)) in v1.iter().zip(&v2) {
            let gap = (a - b).abs();
            if gap > SEPARATION_TOL {
                return Ok(SeparationReport {
                    endpoints_differ,
                    form: Some(id.clone()),
                    gap,
                    same_class: None,
                });
            }
        }
        return Err(Error::SeparationNotFound);
    }
    let (mut worst_id, mut worst) = (None, 0.0f64);
    for (f, (a, b)) in p1.battery.forms().iter().zip(p1.evaluations.iter().zip(&p2.evaluations)) {
        let gap = (a - b).abs();
        if gap > worst {
            worst = gap;
            worst_id = Some(f.id.clone());
        }
    }
    let same = worst <= SEPARATION_TOL;
    Ok(SeparationReport {
        endpoints_differ,
        form: if same { None } else { worst_id },
        gap: worst,
        same_class: Some(same),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{reverse, SegmentKind, Step};
    use crate::currents::evaluate_curve;
    use crate::spectral::{exterior_derivative, solve_for_form, OneForm, TrigPoly};
    use crate::torus_flow::LiftPoint;

    fn lin() -> Linearizer {
        Linearizer::at_origin(DirectionVector::golden(), 3).unwrap()
    }

    fn path(steps: &[&[f64]]) -> PiecewiseCurve {
        PiecewiseCurve::from_steps(
            LiftPoint::new(vec![0.0, 0.0]),
            steps.iter().map(|s| Step::new(s.to_vec(), SegmentKind::Transverse)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn linearize_examples() {
        let l = lin();
        let x = TorusPoint::origin(2);
        let p = l.linearize(&x, &PiecewiseCurve::trivial(x.lift())).unwrap();
        assert!(p.evaluations().iter().all(|&v| v == 0.0));

        let lp = path(&[&[0.4, 0.3], &[0.6, -0.3], &[0.0, 1.0]]);
        let p = l.linearize(&x, &lp).unwrap();
        for (f, v) in l.battery().forms().iter().zip(p.evaluations()) {
            assert!((v - evaluate_curve(&lp, &f.form)).abs() < 1e-12, "{}", f.id);
        }

        let t = 1.7;
        let fs = PiecewiseCurve::flow_segment(x.lift(), t, l.alpha());
        let p = l.linearize(&flow(&x, t, l.alpha()), &fs).unwrap();
        let c = l.generator().unwrap();
        for (v, ck) in p.evaluations().iter().zip(c.values()) {
            assert!((v - ck * t).abs() < 1e-12);
        }

        let wrong = TorusPoint::new(vec![0.5, 0.5]);
        assert!(matches!(l.linearize(&wrong, &lp), Err(Error::EndpointMismatch(_))));
    }

    #[test]
    fn generator_examples() {
        let l = lin();
        let c = l.generator().unwrap();
        assert_eq!(c.value("dx1"), Some(1.0));
        assert_eq!(c.value("dx2"), Some(l.alpha().alpha()[1]));
        assert_eq!(c.value("cos(1,0)dx1"), Some(0.0));
        let f = TrigPoly::from_real_amplitudes(2, &[(vec![2, -1], 0.6)], &[(vec![1, 1], 1.4)]);
        assert_eq!(solve_for_form(&exterior_derivative(&f), l.alpha()).unwrap().c, 0.0);
    }

    #[test]
    fn equivariance_examples() {
        let l = lin();
        let y = TorusPoint::new(vec![0.3, 0.8]);
        let p = l.linearize(&y, &path(&[&[0.3, 0.8]])).unwrap();
        assert_eq!(l.check_equivariance(&p, 0.0).unwrap(), 0.0);
        let g1 = l.check_equivariance(&p, 2.5).unwrap();
        assert!(g1 < 1e-9, "{g1}");

        let (t1, t2) = (1.25, -3.5);
        let p1 = l.advance(&p, t1).unwrap();
        let p12 = l.advance(&p1, t2).unwrap();
        let composite = l.equivariance_gap(&p, &p12, t1 + t2).unwrap();
        let d1 = l.check_equivariance(&p, t1).unwrap();
        let d2 = l.check_equivariance(&p1, t2).unwrap();
        assert!(composite <= d1 + d2 + 1e-9);
    }

    #[test]
    fn albanese_examples() {
        let l = lin();
        let y = TorusPoint::new(vec![0.3, 0.8]);
        let p = l.linearize(&y, &path(&[&[1.1, 0.3], &[0.2, -0.5]])).unwrap();
        let a = l.albanese(&p);
        assert!(a.as_torus_point().approx_eq(&y, 1e-12));

        let x = TorusPoint::origin(2);
        let p0 = l.linearize(&x, &PiecewiseCurve::trivial(x.lift())).unwrap();
        assert_eq!(l.albanese(&p0).coords, vec![0.0, 0.0]);

        // appending a generator loop winds by an integer period
        let looped = concatenate(p.path(), &{
            PiecewiseCurve::from_steps(p.path().end_lift(), vec![Step::new(vec![0.0, 1.0], SegmentKind::Transverse)])
                .unwrap()
        })
        .unwrap();
        let q = l.linearize(&y, &looped).unwrap();
        assert!(l.albanese(&q).as_torus_point().approx_eq(&a.as_torus_point(), 1e-12));
    }

    #[test]
    fn probe_examples() {
        let l = lin();
        let y1 = TorusPoint::new(vec![0.3, 0.8]);
        let y2 = TorusPoint::new(vec![0.3, 0.6]);
        let p1 = l.linearize(&y1, &path(&[&[0.3, 0.8]])).unwrap();
        let p2 = l.linearize(&y2, &path(&[&[0.3, 0.6]])).unwrap();
        let r = l.injectivity_probe(&p1, &p2).unwrap();
        assert!(r.endpoints_differ);
        assert_eq!(r.form.as_deref(), Some("dx2"));
        assert!((r.gap - 0.2).abs() < 1e-12);

        let r = l.injectivity_probe(&p1, &p1).unwrap();
        assert_eq!(r.same_class, Some(true));
        assert_eq!(r.gap, 0.0);

        // same endpoint through a different class: the gap is the loop integral
        let other = path(&[&[0.3, -0.2], &[0.0, 1.0]]);
        let p3 = l.linearize(&y1, &other).unwrap();
        let r = l.injectivity_probe(&p1, &p3).unwrap();
        assert_eq!(r.same_class, Some(false));
        let closing = concatenate(p3.path(), &reverse(p1.path())).unwrap();
        for (f, (a, b)) in l.battery().forms().iter().zip(p3.evaluations().iter().zip(p1.evaluations())) {
            assert!((a - b - evaluate_curve(&closing, &f.form)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_forms_are_invisible() {
        let l = lin();
        let y = TorusPoint::new(vec![0.71, 0.05]);
        let p = l.linearize(&y, &path(&[&[0.4, 0.9], &[0.31, 0.15]])).unwrap();
        let f = TrigPoly::from_real_amplitudes(2, &[(vec![1, 3], 0.5)], &[(vec![2, -2], 1.2)]);
        let df = exterior_derivative(&f);
        let v = evaluate_twisted(p.representative(), &df).unwrap();
        assert!(v.abs() < 1e-12);
        let _ = OneForm::zero(2);
    }
}
