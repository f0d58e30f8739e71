//! Seeded random generators for trigonometric data, paths, loops and curve
//! families with planted retraced arcs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{classify, concatenate, inverse_steps, CurveFamily, PiecewiseCurve, SegmentKind, Step};
use crate::precise::circle_offset;
use crate::spectral::{OneForm, TrigPoly};
use crate::torus_flow::{canonical_sign, DirectionVector, LiftPoint, TorusPoint};

pub type SampleRng = ChaCha8Rng;

/// Most curves in a planted family.
pub const MAX_FAMILY_CURVES: usize = 6;
/// Most segments in any curve of a planted family.
pub const MAX_FAMILY_SEGMENTS: usize = 12;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut SampleRng, d: usize) -> TorusPoint {
    TorusPoint::new((0..d).map(|_| rng.gen::<f64>()).collect())
}

/// A nonzero canonical mode with `‖n‖∞ ≤ degree`.
pub fn random_mode(rng: &mut SampleRng, d: usize, degree: i64) -> Vec<i64> {
    loop {
        let n: Vec<i64> = (0..d).map(|_| rng.gen_range(-degree..=degree)).collect();
        if n.iter().any(|&v| v != 0) {
            return canonical_sign(&n);
        }
    }
}

/// A real trigonometric polynomial with up to `terms` cosine and sine terms
/// of degree at most `degree`, amplitudes in `[-1, 1]`, and the given mean.
pub fn random_trig_poly(rng: &mut SampleRng, d: usize, degree: i64, terms: usize, mean: f64) -> TrigPoly {
    let mut cos = Vec::new();
    let mut sin = Vec::new();
    for _ in 0..terms {
        let n = random_mode(rng, d, degree);
        let a = rng.gen_range(-1.0..=1.0);
        if rng.gen_bool(0.5) {
            cos.push((n, a));
        } else {
            sin.push((n, a));
        }
    }
    TrigPoly::from_real_amplitudes(d, &cos, &sin).add(&TrigPoly::constant(d, mean))
}

pub fn random_form(rng: &mut SampleRng, d: usize, degree: i64, terms: usize) -> OneForm {
    let comps = (0..d)
        .map(|_| {
            let mean = rng.gen_range(-1.0..=1.0);
            random_trig_poly(rng, d, degree, terms, mean)
        })
        .collect();
    OneForm::new(comps).expect("components share the dimension")
}

fn random_displacement(rng: &mut SampleRng, d: usize, scale: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-scale..=scale)).collect();
        if v.iter().any(|x| x.abs() > 1e-3) {
            return v;
        }
    }
}

/// A step that is either a flow step of random duration or a transverse
/// step, labelled consistently with `alpha`.
pub fn random_step(rng: &mut SampleRng, alpha: &DirectionVector, flow_bias: f64) -> Step {
    if rng.gen_bool(flow_bias) {
        let t = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return Step::new(alpha.alpha().iter().map(|a| a * t).collect(), SegmentKind::Flow);
    }
    let v = random_displacement(rng, alpha.dim(), 0.6);
    let kind = classify(&v, alpha);
    Step::new(v, kind)
}

pub fn random_curve(rng: &mut SampleRng, start: LiftPoint, segments: usize, alpha: &DirectionVector) -> PiecewiseCurve {
    let steps = (0..segments).map(|_| random_step(rng, alpha, 0.3)).collect();
    PiecewiseCurve::from_steps(start, steps).expect("random steps are nonzero")
}

/// A path from `x` to `y`: `segments` random steps, then a connector that
/// lands on a lift of `y`, winding by up to `winding` periods per axis.
pub fn random_path(
    rng: &mut SampleRng,
    x: &TorusPoint,
    y: &TorusPoint,
    segments: usize,
    winding: i64,
    alpha: &DirectionVector,
) -> PiecewiseCurve {
    let body = random_curve(rng, x.lift(), segments, alpha);
    let here = body.end_lift();
    let connector: Vec<f64> = here
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(h, t)| circle_offset(t - h) + rng.gen_range(-winding..=winding) as f64)
        .collect();
    if connector.iter().all(|&v| v.abs() < 1e-12) {
        return body;
    }
    let kind = classify(&connector, alpha);
    let tail = PiecewiseCurve::from_steps(here, vec![Step::new(connector, kind)]).expect("nonzero connector");
    concatenate(&body, &tail).expect("connector starts at the body end")
}

pub fn random_loop(
    rng: &mut SampleRng,
    x: &TorusPoint,
    segments: usize,
    winding: i64,
    alpha: &DirectionVector,
) -> PiecewiseCurve {
    random_path(rng, x, x, segments, winding, alpha)
}

fn lift_of(rng: &mut SampleRng, d: usize) -> LiftPoint {
    LiftPoint::new((0..d).map(|_| rng.gen::<f64>()).collect())
}

fn steps(rng: &mut SampleRng, count: std::ops::RangeInclusive<usize>, alpha: &DirectionVector) -> Vec<Step> {
    let n = rng.gen_range(count);
    (0..n).map(|_| random_step(rng, alpha, 0.3)).collect()
}

fn deck_shift(rng: &mut SampleRng, p: &LiftPoint) -> LiftPoint {
    let k: Vec<f64> = p.coords().iter().map(|_| rng.gen_range(-1i64..=1) as f64).collect();
    p.translated(&k)
}

/// Closes a word so the curve returns to its start, translated by `shift`.
fn closing_steps(word: &[Step], shift: &[f64], alpha: &DirectionVector) -> Vec<Step> {
    let mut total: Vec<f64> = shift.iter().map(|v| -v).collect();
    for s in word {
        for (t, v) in total.iter_mut().zip(&s.displacement) {
            *t += v;
        }
    }
    let back: Vec<f64> = total.iter().map(|v| -v).collect();
    if back.iter().all(|v| v.abs() < 1e-12) {
        return Vec::new();
    }
    let kind = classify(&back, alpha);
    vec![Step::new(back, kind)]
}

/// A family of at most [`MAX_FAMILY_CURVES`] curves, each with at most
/// [`MAX_FAMILY_SEGMENTS`] segments, containing planted retraced arcs of
/// several shapes: spikes `a r b r⁻¹ c`, arcs shared between two curves
/// (open or closed, possibly through a deck translate), and partial overlaps
/// where only part of a segment is retraced.
pub fn planted_family(rng: &mut SampleRng, alpha: &DirectionVector) -> CurveFamily {
    let d = alpha.dim();
    let mut curves = Vec::new();
    let plants = rng.gen_range(1..=3);
    for _ in 0..plants {
        if curves.len() + 2 > MAX_FAMILY_CURVES {
            break;
        }
        match rng.gen_range(0..4) {
            0 => {
                // a r b r⁻¹ c with b a loop
                let a = steps(rng, 0..=2, alpha);
                let r = steps(rng, 1..=2, alpha);
                let mut b = steps(rng, 0..=2, alpha);
                let shift: Vec<f64> = (0..d).map(|_| rng.gen_range(-1i64..=1) as f64).collect();
                let close = closing_steps(&b, &shift, alpha);
                b.extend(close);
                let c = steps(rng, 0..=2, alpha);
                let word: Vec<Step> = [a, r.clone(), b, inverse_steps(&r), c].concat();
                let start = lift_of(rng, d);
                curves.push(PiecewiseCurve::from_steps(start, word).expect("valid word"));
            }
            1 | 2 => {
                // a r b and c r⁻¹ d, the second possibly closed
                let a = steps(rng, 0..=2, alpha);
                let r = steps(rng, 1..=2, alpha);
                let b = steps(rng, 0..=2, alpha);
                let start = lift_of(rng, d);
                let r_end_index = a.len() + r.len();
                let g1 = PiecewiseCurve::from_steps(start, [a, r.clone(), b].concat()).expect("valid word");
                let c = steps(rng, 0..=2, alpha);
                let mut word2: Vec<Step> = [c.clone(), inverse_steps(&r)].concat();
                if rng.gen_bool(0.5) {
                    word2.extend(steps(rng, 0..=1, alpha));
                    let close = closing_steps(&word2, &vec![0.0; d], alpha);
                    word2.extend(close);
                } else {
                    word2.extend(steps(rng, 0..=2, alpha));
                }
                // r⁻¹ starts where r ends, up to a deck translate
                let mut start2 = deck_shift(rng, &g1.vertex(r_end_index));
                for s in &c {
                    let back: Vec<f64> = s.displacement.iter().map(|v| -v).collect();
                    start2 = start2.translated(&back);
                }
                curves.push(g1);
                curves.push(PiecewiseCurve::from_steps(start2, word2).expect("valid word"));
            }
            _ => {
                // a single segment v and, from its end, a segment -2v: half of
                // the second retraces the first
                let v = random_step(rng, alpha, 0.3);
                let a = steps(rng, 0..=1, alpha);
                let start = lift_of(rng, d);
                let g1 = PiecewiseCurve::from_steps(start, [a, vec![v.clone()]].concat()).expect("valid word");
                let back = Step::new(v.displacement.iter().map(|x| -2.0 * x).collect(), v.kind);
                let tail = steps(rng, 0..=1, alpha);
                let start2 = deck_shift(rng, &g1.end_lift());
                let g2 = PiecewiseCurve::from_steps(start2, [vec![back], tail].concat()).expect("valid word");
                curves.push(g1);
                curves.push(g2);
            }
        }
    }
    let fillers = rng.gen_range(0..=MAX_FAMILY_CURVES - curves.len());
    for _ in 0..fillers.min(2) {
        let n = rng.gen_range(1..=4);
        let start = lift_of(rng, d);
        let g = random_curve(rng, start, n, alpha);
        curves.push(g);
    }
    debug_assert!(curves.iter().all(|g| g.len() <= MAX_FAMILY_SEGMENTS));
    CurveFamily::new(curves)
}
