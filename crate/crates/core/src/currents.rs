//! Integration currents of curves, their boundaries, and the twisted
//! projection `L(T)(η) = T(η) - ∂T(h_η) = T(η - dh_η)`.
//!
//! Line integrals of trigonometric one-forms along straight segments are
//! evaluated in closed form: a mode `ĉ_n e^{2πi n·x}` of component `j`
//! integrated along `x₀ + s v`, `s ∈ [0, 1]`, contributes
//! `ĉ_n v_j e^{2πi n·x₀} E(n·v)` with `E(u) = (e^{2πiu} - 1)/(2πiu)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::curves::{concatenate, reverse, PiecewiseCurve};
use crate::error::{Error, Result};
pub use crate::measure::ZeroCurrent;
use crate::measure::POINT_TOL;
use crate::spectral::{phase_of, solve_for_form, CohomologySolution, OneForm, TrigPoly};
use crate::torus_flow::{canonical_sign, DirectionVector, TorusPoint};

const TWO_PI: f64 = 2.0 * PI;

/// Below this `|u|` the factor `E(u)` is summed as a Taylor series.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Agreement required between the two routes of [`evaluate_twisted`],
/// relative to `max(1, magnitude of the terms)`.
pub const TWIST_ROUTE_TOL: f64 = 1e-10;

/// `E(u) = (e^{2πiu} - 1)/(2πiu)`, with `E(0) = 1`.
pub fn segment_factor(u: f64) -> Complex64 {
    if u.abs() < SERIES_SWITCH {
        // Σ_k z^k/(k+1)! with z = 2πiu, |z| < 6.3e-4
        let z = Complex64::new(0.0, TWO_PI * u);
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z / 2.0 + z2 / 6.0 + z2 * z / 24.0 + z2 * z2 / 120.0
    } else {
        // (e^{iθ} - 1)/(iθ) = sin θ/θ + i·2 sin²(θ/2)/θ, free of cancellation
        let theta = TWO_PI * u;
        let half = (theta / 2.0).sin();
        Complex64::new(theta.sin() / theta, 2.0 * half * half / theta)
    }
}

/// The integration current `γ̃(η) = ∫_γ η` of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentHandle {
    source: PiecewiseCurve,
}

impl CurrentHandle {
    pub fn new(source: PiecewiseCurve) -> Self {
        CurrentHandle { source }
    }

    pub fn source(&self) -> &PiecewiseCurve {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }
}

impl From<PiecewiseCurve> for CurrentHandle {
    fn from(source: PiecewiseCurve) -> Self {
        CurrentHandle::new(source)
    }
}

/// Closed-form `∫_γ η`.
pub fn evaluate(t: &CurrentHandle, eta: &OneForm) -> f64 {
    evaluate_curve(&t.source, eta)
}

pub fn evaluate_curve(g: &PiecewiseCurve, eta: &OneForm) -> f64 {
    assert_eq!(g.dim(), eta.dim(), "curve and form dimensions differ");
    let mut total = 0.0;
    for seg in g.segments() {
        let x0 = seg.start.coords();
        let v = &seg.displacement;
        for (j, p) in eta.components().iter().enumerate() {
            if v[j] == 0.0 {
                continue;
            }
            for (n, c) in p.modes() {
                let phase = TWO_PI * phase_of(n, x0);
                let nv: f64 = n.iter().zip(v).map(|(&k, vi)| k as f64 * vi).sum();
                let term = c * Complex64::from_polar(1.0, phase) * segment_factor(nv);
                total += v[j] * term.re;
            }
        }
    }
    total
}

/// Sum of the currents of a family, `Σ_i γ̃_i(η)`.
pub fn evaluate_family(curves: &[PiecewiseCurve], eta: &OneForm) -> f64 {
    curves.iter().map(|g| evaluate_curve(g, eta)).sum()
}

/// `∂γ̃ = δ_{ω(γ)} - δ_{α(γ)}`; empty for closed curves.
pub fn boundary(t: &CurrentHandle) -> ZeroCurrent {
    let mut z = ZeroCurrent::new();
    z.add_atom(t.source.end(), 1.0);
    z.add_atom(t.source.start(), -1.0);
    z
}

/// `π_x(T) = ∂T + δ_x`, which for a curve based at `x` is `δ_{ω(γ)}`.
pub fn project_pi_x(t: &CurrentHandle, x: &TorusPoint) -> Result<ZeroCurrent> {
    if !t.source.start().approx_eq(x, POINT_TOL) {
        return Err(Error::BasepointMismatch(format!(
            "curve starts at {:?}, not {:?}",
            t.source.start().coords(),
            x.coords()
        )));
    }
    let mut z = boundary(t);
    z.add_atom(x.clone(), 1.0);
    Ok(z)
}

/// `T1 - T2` lies in the loop currents iff the boundaries coincide.
pub fn is_loop_current(t1: &CurrentHandle, t2: &CurrentHandle) -> Result<bool> {
    if !t1.source.start().approx_eq(&t2.source.start(), POINT_TOL) {
        return Err(Error::BasepointMismatch("currents are based at different points".into()));
    }
    Ok(boundary(t1).same_as(&boundary(t2)))
}

/// The loop `γ₁γ₂⁻¹` whose current is `T1 - T2`, when both share endpoints.
pub fn closing_loop(t1: &CurrentHandle, t2: &CurrentHandle) -> Result<PiecewiseCurve> {
    concatenate(&t1.source, &reverse(&t2.source))
}

type FormKey = Vec<(usize, Vec<i64>, u64, u64)>;

/// `L(T)` for a curve current; solutions `h_η` are memoized per handle.
#[derive(Debug, Clone)]
pub struct TwistedCurrent {
    base: CurrentHandle,
    alpha: DirectionVector,
    memo: Arc<RwLock<HashMap<FormKey, Arc<CohomologySolution>>>>,
}

impl TwistedCurrent {
    pub fn base(&self) -> &CurrentHandle {
        &self.base
    }

    pub fn alpha(&self) -> &DirectionVector {
        &self.alpha
    }

    /// `h_η` and `c_η`, solved once per form and shared afterwards.
    pub fn solution(&self, eta: &OneForm) -> Result<Arc<CohomologySolution>> {
        let key = eta.key();
        if let Some(sol) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(Arc::clone(sol));
        }
        let sol = Arc::new(solve_for_form(eta, &self.alpha)?);
        let mut table = self.memo.write().expect("memo lock");
        // first writer wins
        Ok(Arc::clone(table.entry(key).or_insert(sol)))
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }
}

/// Wraps a current with the twist; evaluation happens lazily.
pub fn twist(t: &CurrentHandle, alpha: &DirectionVector) -> TwistedCurrent {
    assert_eq!(t.dim(), alpha.dim(), "current and direction dimensions differ");
    TwistedCurrent {
        base: t.clone(),
        alpha: alpha.clone(),
        memo: Arc::new(RwLock::new(HashMap::new())),
    }
}

/// `L(T)(η)`, computed as `T(η) - [h_η(ω) - h_η(α)]` and cross-checked
/// against `T(η - dh_η)`.
pub fn evaluate_twisted(lt: &TwistedCurrent, eta: &OneForm) -> Result<f64> {
    let sol = lt.solution(eta)?;
    let g = &lt.base.source;
    let raw = evaluate_curve(g, eta);
    let h_end = sol.h.evaluate(g.end().coords());
    let h_start = sol.h.evaluate(g.start().coords());
    let boundary_route = raw - (h_end - h_start);
    let dh = crate::spectral::exterior_derivative(&sol.h);
    let form_route = evaluate_curve(g, &eta.sub(&dh));
    let scale = 1.0f64.max(raw.abs()).max(h_end.abs()).max(h_start.abs());
    if (boundary_route - form_route).abs() > TWIST_ROUTE_TOL * scale {
        return Err(Error::TwistMismatch {
            boundary: boundary_route,
            form: form_route,
        });
    }
    Ok(boundary_route)
}

/// Which family a battery form belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum FormKind {
    /// `dx_j`
    Albanese { j: usize },
    /// `cos(2π n·x) dx_j` or `sin(2π n·x) dx_j`
    Modulated { n: Vec<i64>, sine: bool, j: usize },
}

#[derive(Debug, Clone)]
pub struct BatteryForm {
    pub id: String,
    pub kind: FormKind,
    pub form: OneForm,
}

/// The finite family of test forms standing in for all of `Ω¹`:
/// `{dx_j} ∪ {cos/sin(2π n·x) dx_j : 0 < ‖n‖∞ ≤ cutoff}` with `n` taken
/// up to sign.
#[derive(Debug, Clone)]
pub struct Battery {
    d: usize,
    cutoff: i64,
    forms: Vec<BatteryForm>,
    index: HashMap<String, usize>,
}

pub const DEFAULT_BATTERY_CUTOFF: i64 = 3;

fn fmt_mode(n: &[i64]) -> String {
    let parts: Vec<String> = n.iter().map(|k| k.to_string()).collect();
    format!("({})", parts.join(","))
}

impl Battery {
    pub fn standard(d: usize, cutoff: i64) -> Self {
        assert!(d >= 1 && cutoff >= 1, "battery needs d >= 1 and cutoff >= 1");
        let mut forms = Vec::new();
        for j in 0..d {
            forms.push(BatteryForm {
                id: format!("dx{}", j + 1),
                kind: FormKind::Albanese { j },
                form: OneForm::dx(d, j),
            });
        }
        let side = (2 * cutoff + 1) as usize;
        let mut modes: Vec<Vec<i64>> = (0..side.pow(d as u32))
            .map(|mut idx| {
                (0..d)
                    .map(|_| {
                        let v = (idx % side) as i64 - cutoff;
                        idx /= side;
                        v
                    })
                    .collect::<Vec<i64>>()
            })
            .filter(|n| n.iter().any(|&k| k != 0) && canonical_sign(n) == *n)
            .collect();
        modes.sort();
        for n in &modes {
            for sine in [false, true] {
                for j in 0..d {
                    let f = if sine {
                        TrigPoly::sin_mode(n, 1.0)
                    } else {
                        TrigPoly::cos_mode(n, 1.0)
                    };
                    let id = format!("{}{}dx{}", if sine { "sin" } else { "cos" }, fmt_mode(n), j + 1);
                    forms.push(BatteryForm {
                        id,
                        kind: FormKind::Modulated { n: n.clone(), sine, j },
                        form: OneForm::single(j, f),
                    });
                }
            }
        }
        let index = forms.iter().enumerate().map(|(i, f)| (f.id.clone(), i)).collect();
        Battery { d, cutoff, forms, index }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn forms(&self) -> &[BatteryForm] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Index of the modulated form with the given data.
    pub fn modulated_position(&self, n: &[i64], sine: bool, j: usize) -> Option<usize> {
        let id = format!("{}{}dx{}", if sine { "sin" } else { "cos" }, fmt_mode(n), j + 1);
        self.position(&id)
    }
}
