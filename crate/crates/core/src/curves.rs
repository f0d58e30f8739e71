//! Polygonal curves on `T^d` built from flow segments and transverse
//! straight segments, with concatenation, reversal, retraced-arc detection
//! and excision.
//!
//! A curve is stored as a lifted basepoint plus an ordered word of
//! displacements. Segment start lifts are reconstructed by accumulation, so
//! consecutive segments are always exactly incident in the lift.
//!
//! A retraced arc is a sub-word `r` whose reverse `r⁻¹` appears later in the
//! same curve (`γ = a r b r⁻¹ c`) or anywhere in another curve
//! (`γ₁ = a r b`, `γ₂ = c r⁻¹ d`). Before matching, segments are split at
//! every boundary of an antiparallel overlap, so arcs are always whole
//! words of pieces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ZeroCurrent, POINT_TOL};
use crate::torus_flow::{flow_displacement, DirectionVector, LiftPoint, TorusPoint};

/// Angular tolerance separating flow segments from transverse ones.
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Geometric coincidence tolerance for retraced-arc matching, scaled by
/// `max(1, magnitude)` of the quantities compared.
pub const MATCH_TOL: f64 = 1e-12;

/// Upper bound on refinement passes; each pass only adds projections of
/// existing endpoints, so a handful always suffices.
const MAX_REFINE_PASSES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Flow,
    Transverse,
}

/// An oriented straight segment in lifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: LiftPoint,
    pub displacement: Vec<f64>,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn end(&self) -> LiftPoint {
        self.start.translated(&self.displacement)
    }

    pub fn length(&self) -> f64 {
        norm(&self.displacement)
    }
}

/// One letter of a curve word.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub displacement: Vec<f64>,
    pub kind: SegmentKind,
}

impl Step {
    pub fn new(displacement: Vec<f64>, kind: SegmentKind) -> Self {
        Step { displacement, kind }
    }

    fn inverse(&self) -> Step {
        Step {
            displacement: self.displacement.iter().map(|v| -v).collect(),
            kind: self.kind,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|sin ∠(u, v)|`, computed from the 2×2 minors for accuracy near zero.
pub fn sine_angle(u: &[f64], v: &[f64]) -> f64 {
    let mut wedge = 0.0;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let m = u[i] * v[j] - u[j] * v[i];
            wedge += m * m;
        }
    }
    let denom = norm(u) * norm(v);
    if denom == 0.0 {
        return 0.0;
    }
    wedge.sqrt() / denom
}

/// Classifies a displacement relative to the flow direction.
pub fn classify(displacement: &[f64], alpha: &DirectionVector) -> SegmentKind {
    if sine_angle(displacement, alpha.alpha()) < COLLINEAR_TOL {
        SegmentKind::Flow
    } else {
        SegmentKind::Transverse
    }
}

/// A finite concatenation of segments, possibly empty (the trivial curve at
/// its basepoint).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    basepoint: LiftPoint,
    segments: Vec<Segment>,
}

impl PiecewiseCurve {
    pub fn trivial(basepoint: LiftPoint) -> Self {
        PiecewiseCurve {
            basepoint,
            segments: Vec::new(),
        }
    }

    /// Builds a curve and checks every segment kind against `alpha`.
    pub fn new(basepoint: LiftPoint, steps: Vec<Step>, alpha: &DirectionVector) -> Result<Self> {
        let curve = Self::from_steps(basepoint, steps)?;
        curve.validate_kinds(alpha)?;
        Ok(curve)
    }

    /// Builds a curve without consulting the flow direction.
    pub fn from_steps(basepoint: LiftPoint, steps: Vec<Step>) -> Result<Self> {
        let d = basepoint.dim();
        let mut segments = Vec::with_capacity(steps.len());
        let mut cursor = basepoint.clone();
        for (i, step) in steps.into_iter().enumerate() {
            if step.displacement.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: step.displacement.len(),
                });
            }
            if step.displacement.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSegment(format!("segment {i} has a non-finite displacement")));
            }
            if step.displacement.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidSegment(format!("segment {i} has zero displacement")));
            }
            let next = cursor.translated(&step.displacement);
            segments.push(Segment {
                start: cursor,
                displacement: step.displacement,
                kind: step.kind,
            });
            cursor = next;
        }
        Ok(PiecewiseCurve { basepoint, segments })
    }

    /// Segment kinds must agree with the geometry: flow segments parallel to
    /// `α`, transverse segments not.
    pub fn validate_kinds(&self, alpha: &DirectionVector) -> Result<()> {
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: alpha.dim(),
            });
        }
        for (i, s) in self.segments.iter().enumerate() {
            let sin = sine_angle(&s.displacement, alpha.alpha());
            match s.kind {
                SegmentKind::Flow if sin >= COLLINEAR_TOL => {
                    return Err(Error::InvalidSegment(format!("flow segment {i} is not parallel to alpha")))
                }
                SegmentKind::Transverse if sin < COLLINEAR_TOL => {
                    return Err(Error::InvalidSegment(format!(
                        "transverse segment {i} is collinear with alpha"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The orbit arc `s ↦ φ^s(x)` for `s ∈ [0, t]` (trivial when `t = 0`).
    pub fn flow_segment(start: LiftPoint, t: f64, alpha: &DirectionVector) -> Self {
        if t == 0.0 {
            return Self::trivial(start);
        }
        Self::from_steps(start, vec![Step::new(flow_displacement(t, alpha), SegmentKind::Flow)])
            .expect("nonzero flow displacement")
    }

    pub fn dim(&self) -> usize {
        self.basepoint.dim()
    }

    pub fn basepoint(&self) -> &LiftPoint {
        &self.basepoint
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn steps(&self) -> Vec<Step> {
        self.segments
            .iter()
            .map(|s| Step::new(s.displacement.clone(), s.kind))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.segments.is_empty()
    }

    /// Lift of the `i`-th vertex; vertex `len()` is the endpoint.
    pub fn vertex(&self, i: usize) -> LiftPoint {
        match self.segments.get(i) {
            Some(s) => s.start.clone(),
            None if i == self.segments.len() => self.end_lift(),
            None => panic!("vertex index {i} out of range"),
        }
    }

    pub fn end_lift(&self) -> LiftPoint {
        self.segments.last().map_or_else(|| self.basepoint.clone(), Segment::end)
    }

    /// `α(γ)`, the starting point on the torus.
    pub fn start(&self) -> TorusPoint {
        self.basepoint.project()
    }

    /// `ω(γ)`, the endpoint on the torus.
    pub fn end(&self) -> TorusPoint {
        self.end_lift().project()
    }

    pub fn is_closed(&self) -> bool {
        self.start().approx_eq(&self.end(), POINT_TOL)
    }

    /// Lift displacement from start to end; integral for closed curves.
    pub fn total_displacement(&self) -> Vec<f64> {
        self.end_lift().diff(&self.basepoint)
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Same word and same basepoint on the torus.
    pub fn approx_eq(&self, other: &PiecewiseCurve, tol: f64) -> bool {
        self.len() == other.len()
            && self.start().approx_eq(&other.start(), tol)
            && self.segments.iter().zip(&other.segments).all(|(a, b)| {
                a.kind == b.kind
                    && a.displacement
                        .iter()
                        .zip(&b.displacement)
                        .all(|(x, y)| (x - y).abs() <= tol)
            })
    }
}

/// `γ₁γ₂`: traverse `g1`, then `g2` translated by the deck shift that aligns
/// the junction.
pub fn concatenate(g1: &PiecewiseCurve, g2: &PiecewiseCurve) -> Result<PiecewiseCurve> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            got: g2.dim(),
        });
    }
    let gap = g1.end().distance(&g2.start());
    if gap > POINT_TOL {
        return Err(Error::EndpointMismatch(format!(
            "end of first curve {:?} differs from start of second {:?}",
            g1.end().coords(),
            g2.start().coords()
        )));
    }
    let mut steps = g1.steps();
    steps.extend(g2.steps());
    PiecewiseCurve::from_steps(g1.basepoint.clone(), steps)
}

/// `γ⁻¹`: the same word read backwards with every displacement negated.
pub fn reverse(g: &PiecewiseCurve) -> PiecewiseCurve {
    let steps = g.segments.iter().rev().map(|s| Step::new(s.displacement.iter().map(|v| -v).collect(), s.kind)).collect();
    PiecewiseCurve::from_steps(g.end_lift(), steps).expect("reversal preserves validity")
}

/// A finite multiset of curves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveFamily {
    pub curves: Vec<PiecewiseCurve>,
}

impl CurveFamily {
    pub fn new(curves: Vec<PiecewiseCurve>) -> Self {
        CurveFamily { curves }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.curves.iter().map(PiecewiseCurve::total_length).sum()
    }

    pub fn segment_count(&self) -> usize {
        self.curves.iter().map(PiecewiseCurve::len).sum()
    }
}

impl From<Vec<PiecewiseCurve>> for CurveFamily {
    fn from(curves: Vec<PiecewiseCurve>) -> Self {
        CurveFamily::new(curves)
    }
}

/// Where a retraced arc sits, in terms of a refined copy of the family.
#[derive(Debug, Clone)]
pub struct RetracedArcLocation {
    snapshot: CurveFamily,
    refined: Vec<PiecewiseCurve>,
    /// Curve holding `r`, and the index of its first piece.
    first: (usize, usize),
    /// Curve holding `r⁻¹`, and the index of its last piece.
    second: (usize, usize),
    pieces: usize,
    length: f64,
}

impl RetracedArcLocation {
    /// `true` for `γ = a r b r⁻¹ c`, `false` for the two-curve case.
    pub fn within_one_curve(&self) -> bool {
        self.first.0 == self.second.0
    }

    pub fn curves(&self) -> (usize, usize) {
        (self.first.0, self.second.0)
    }

    /// Arc length of `r`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of refined pieces making up `r`.
    pub fn pieces(&self) -> usize {
        self.pieces
    }

    /// The arc `r` as a curve.
    pub fn arc(&self) -> PiecewiseCurve {
        let (c, s) = self.first;
        let g = &self.refined[c];
        PiecewiseCurve::from_steps(g.vertex(s), g.steps()[s..s + self.pieces].to_vec())
            .expect("arc pieces are valid")
    }
}

struct Piece<'a> {
    curve: usize,
    index: usize,
    seg: &'a Segment,
}

fn scale_of(v: &[f64]) -> f64 {
    v.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

/// Arclength intervals along `a` where `b`, traversed backwards, runs over
/// the same points of the torus. Each entry is `(a0, a1, delta)` where the
/// reversed `b` sits at arclength offset `delta` relative to `a`.
fn antiparallel_overlaps(a: &Segment, b: &Segment) -> Vec<(f64, f64, f64)> {
    let va = &a.displacement;
    let vb = &b.displacement;
    if dot(va, vb) >= 0.0 || sine_angle(va, vb) > MATCH_TOL {
        return Vec::new();
    }
    let la = norm(va);
    let lb = norm(vb);
    let e: Vec<f64> = va.iter().map(|x| x / la).collect();
    let rb = b.end();
    let dvec = rb.diff(&a.start);
    let tol = MATCH_TOL * scale_of(a.start.coords()).max(scale_of(rb.coords())).max(la + lb);

    // parametrize integer translates by the dominant direction coordinate
    let k = (0..e.len())
        .max_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs()))
        .expect("nonempty");
    let lo = (-lb * e[k]).min(la * e[k]) - dvec[k];
    let hi = (-lb * e[k]).max(la * e[k]) - dvec[k];
    let mut out = Vec::new();
    let first = (lo - tol).ceil() as i64;
    let last = (hi + tol).floor() as i64;
    for mk in first..=last {
        let delta = (dvec[k] + mk as f64) / e[k];
        let aligned = (0..e.len()).all(|i| {
            if i == k {
                return true;
            }
            let target = delta * e[i] - dvec[i];
            (target - target.round()).abs() <= tol
        });
        if !aligned {
            continue;
        }
        let a0 = delta.max(0.0);
        let a1 = (delta + lb).min(la);
        if a1 - a0 > tol {
            out.push((a0, a1, delta));
        }
    }
    out
}

fn push_cut(cuts: &mut Vec<f64>, arclength: f64, total: f64) {
    let tol = MATCH_TOL * total.max(1.0);
    if arclength > tol && arclength < total - tol {
        cuts.push(arclength / total);
    }
}

/// Splits segments at all antiparallel-overlap boundaries until stable.
fn refine(curves: &[PiecewiseCurve]) -> Vec<PiecewiseCurve> {
    let mut current: Vec<PiecewiseCurve> = curves.to_vec();
    for _ in 0..MAX_REFINE_PASSES {
        let pieces: Vec<Piece> = current
            .iter()
            .enumerate()
            .flat_map(|(ci, g)| g.segments.iter().enumerate().map(move |(si, seg)| Piece { curve: ci, index: si, seg }))
            .collect();
        let mut cuts: Vec<Vec<Vec<f64>>> = current.iter().map(|g| vec![Vec::new(); g.len()]).collect();
        let mut any = false;
        for (p, pa) in pieces.iter().enumerate() {
            for pb in &pieces[p + 1..] {
                let la = pa.seg.length();
                let lb = pb.seg.length();
                for (a0, a1, delta) in antiparallel_overlaps(pa.seg, pb.seg) {
                    let before = cuts[pa.curve][pa.index].len() + cuts[pb.curve][pb.index].len();
                    push_cut(&mut cuts[pa.curve][pa.index], a0, la);
                    push_cut(&mut cuts[pa.curve][pa.index], a1, la);
                    push_cut(&mut cuts[pb.curve][pb.index], lb - (a0 - delta), lb);
                    push_cut(&mut cuts[pb.curve][pb.index], lb - (a1 - delta), lb);
                    any |= cuts[pa.curve][pa.index].len() + cuts[pb.curve][pb.index].len() > before;
                }
            }
        }
        if !any {
            return current;
        }
        current = current
            .iter()
            .zip(&cuts)
            .map(|(g, curve_cuts)| split_curve(g, curve_cuts))
            .collect();
    }
    current
}

fn split_curve(g: &PiecewiseCurve, cuts: &[Vec<f64>]) -> PiecewiseCurve {
    let mut steps = Vec::new();
    for (seg, seg_cuts) in g.segments.iter().zip(cuts) {
        let mut fr = seg_cuts.clone();
        fr.sort_by(f64::total_cmp);
        fr.dedup_by(|a, b| (*a - *b).abs() * seg.length() <= MATCH_TOL * seg.length().max(1.0));
        let mut consumed = vec![0.0; seg.displacement.len()];
        for f in fr {
            let upto: Vec<f64> = seg.displacement.iter().map(|v| v * f).collect();
            let piece: Vec<f64> = upto.iter().zip(&consumed).map(|(u, c)| u - c).collect();
            steps.push(Step::new(piece, seg.kind));
            consumed = upto;
        }
        let rest: Vec<f64> = seg.displacement.iter().zip(&consumed).map(|(v, c)| v - c).collect();
        steps.push(Step::new(rest, seg.kind));
    }
    PiecewiseCurve::from_steps(g.basepoint.clone(), steps).expect("splitting keeps segments nonzero")
}

/// Piece `a` is the exact reverse of piece `b`.
fn pieces_match(a: &Segment, b: &Segment) -> bool {
    let tol = MATCH_TOL * scale_of(&a.displacement).max(1.0);
    let opposite = a
        .displacement
        .iter()
        .zip(&b.displacement)
        .all(|(x, y)| (x + y).abs() <= tol);
    if !opposite {
        return false;
    }
    let pos_tol = MATCH_TOL * scale_of(a.start.coords()).max(scale_of(b.start.coords()));
    a.start.project().distance(&b.end().project()) <= pos_tol
}

/// (length, first piece, last piece of the reversal, piece count).
type ArcCandidate = (f64, (usize, usize), (usize, usize), usize);

/// Finds the longest retraced arc in the family, ties broken by the lowest
/// (curve index, piece index) of its first occurrence.
pub fn find_retraced_arc(family: &CurveFamily) -> Option<RetracedArcLocation> {
    let refined = refine(&family.curves);
    let mut best: Option<ArcCandidate> = None;
    for ci in 0..refined.len() {
        let gi = &refined[ci].segments;
        for si in 0..gi.len() {
            for (cj, g) in refined.iter().enumerate().skip(ci) {
                let gj = &g.segments;
                for sj in 0..gj.len() {
                    if ci == cj && sj <= si {
                        continue;
                    }
                    if !pieces_match(&gi[si], &gj[sj]) {
                        continue;
                    }
                    let mut len = 0;
                    let mut length = 0.0;
                    while si + len < gi.len()
                        && len <= sj
                        && (ci != cj || si + len < sj - len)
                        && pieces_match(&gi[si + len], &gj[sj - len])
                    {
                        length += gi[si + len].length();
                        len += 1;
                    }
                    if best.as_ref().is_none_or(|b| length > b.0) {
                        best = Some((length, (ci, si), (cj, sj), len));
                    }
                }
            }
        }
    }
    best.map(|(length, first, second, pieces)| RetracedArcLocation {
        snapshot: family.clone(),
        refined,
        first,
        second,
        pieces,
        length,
    })
}

fn sub_word(g: &PiecewiseCurve, range: std::ops::Range<usize>) -> Vec<Step> {
    g.steps()[range].to_vec()
}

fn build(basepoint: LiftPoint, parts: &[&[Step]]) -> PiecewiseCurve {
    let steps: Vec<Step> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    PiecewiseCurve::from_steps(basepoint, steps).expect("sub-words of valid curves are valid")
}

/// Removes one retraced arc:
/// `{a r b r⁻¹ c} ↦ {ac, b}`, `{a r b, c r⁻¹ d} ↦ {adcb}` when the second
/// curve is closed, `{ad, cb}` when both are open. Empty words are dropped.
pub fn simple_excision(family: &CurveFamily, loc: &RetracedArcLocation) -> Result<CurveFamily> {
    if *family != loc.snapshot {
        return Err(Error::StaleLocation);
    }
    let n = loc.pieces;
    let produced: Vec<PiecewiseCurve>;
    let involved: Vec<usize>;
    if loc.within_one_curve() {
        let (c, si) = loc.first;
        let sj = loc.second.1;
        let g = &loc.refined[c];
        let a = sub_word(g, 0..si);
        let b = sub_word(g, si + n..sj + 1 - n);
        let tail = sub_word(g, sj + 1..g.len());
        produced = vec![build(g.basepoint.clone(), &[&a, &tail]), build(g.vertex(si + n), &[&b])];
        involved = vec![c];
    } else {
        // (curve, first piece, one past last piece) for r and r⁻¹
        let mut holder_r = (loc.first.0, loc.first.1, loc.first.1 + n);
        let mut holder_inv = (loc.second.0, loc.second.1 + 1 - n, loc.second.1 + 1);
        if !loc.refined[holder_inv.0].is_closed() && loc.refined[holder_r.0].is_closed() {
            // rename r ↔ r⁻¹ so the closed curve plays the second role
            std::mem::swap(&mut holder_r, &mut holder_inv);
        }
        let g1 = &loc.refined[holder_r.0];
        let g2 = &loc.refined[holder_inv.0];
        let a = sub_word(g1, 0..holder_r.1);
        let b = sub_word(g1, holder_r.2..g1.len());
        let c = sub_word(g2, 0..holder_inv.1);
        let d = sub_word(g2, holder_inv.2..g2.len());
        produced = if g2.is_closed() {
            vec![build(g1.basepoint.clone(), &[&a, &d, &c, &b])]
        } else {
            vec![build(g1.basepoint.clone(), &[&a, &d]), build(g2.basepoint.clone(), &[&c, &b])]
        };
        involved = vec![loc.first.0, loc.second.0];
    }

    let insert_at = *involved.iter().min().expect("nonempty");
    let mut curves = Vec::with_capacity(family.len() + 1);
    for (k, g) in family.curves.iter().enumerate() {
        if k == insert_at {
            curves.extend(produced.iter().filter(|g| !g.is_trivial()).cloned());
        }
        if !involved.contains(&k) {
            curves.push(g.clone());
        }
    }
    Ok(CurveFamily::new(curves))
}

/// Record of a maximal excision run.
#[derive(Debug, Clone)]
pub struct ExcisionTrace {
    pub family: CurveFamily,
    /// Arc length removed (once per copy) at each step.
    pub arc_lengths: Vec<f64>,
    /// Total family length after each step, starting with the input.
    pub total_lengths: Vec<f64>,
}

/// Excises retraced arcs until none remain.
pub fn maximal_excision(family: &CurveFamily) -> CurveFamily {
    maximal_excision_traced(family).family
}

pub fn maximal_excision_traced(family: &CurveFamily) -> ExcisionTrace {
    let mut current = family.clone();
    let mut arc_lengths = Vec::new();
    let mut total_lengths = vec![current.total_length()];
    while let Some(loc) = find_retraced_arc(&current) {
        current = simple_excision(&current, &loc).expect("location is fresh");
        arc_lengths.push(loc.length());
        total_lengths.push(current.total_length());
    }
    ExcisionTrace {
        family: current,
        arc_lengths,
        total_lengths,
    }
}

/// `Σ_i (δ_{ω(γ_i)} - δ_{α(γ_i)})`.
pub fn boundary_multiset(family: &CurveFamily) -> ZeroCurrent {
    let mut z = ZeroCurrent::new();
    for g in &family.curves {
        z.add_atom(g.end(), 1.0);
        z.add_atom(g.start(), -1.0);
    }
    z
}

/// Inverse of a word, kept for symmetry with [`reverse`].
pub fn inverse_steps(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(Step::inverse).collect()
}
