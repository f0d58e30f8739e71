//! Points of the torus `T^d = R^d / Z^d`, the linear flow `φ^t(x) = x + tα`,
//! and arithmetic of the direction vector: resonances, finite-ball
//! Diophantine certificates and Liouville-type directions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precise::{self, PreciseReal};

/// Default resonance threshold: `n` is resonant when `|n·α| < ε_res·max(1, ‖n‖∞)`.
pub const DEFAULT_RESONANCE_EPS: f64 = 1e-10;

/// Resonance threshold used for Liouville directions, whose components are
/// exact decimals held to about 32 significant digits.
pub const LIOUVILLE_RESONANCE_EPS: f64 = 1e-28;

/// Fast-path values of `n·α` closer to zero than `REFINE_FACTOR` times their
/// rounding-error bound are recomputed with the compensated dot product.
const REFINE_FACTOR: f64 = (1u64 << 30) as f64;

/// Forty digits of the golden ratio.
pub const GOLDEN_RATIO: &str = "1.6180339887498948482045868343656381177203";

/// A point of `T^d` with every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Reduces arbitrary real coordinates mod 1.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "torus dimension must be at least 1");
        TorusPoint {
            coords: coords.into_iter().map(precise::wrap_unit).collect(),
        }
    }

    pub fn origin(d: usize) -> Self {
        Self::new(vec![0.0; d])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Largest per-coordinate circular distance.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| precise::circle_offset(a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &TorusPoint, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }

    /// The lift with the same coordinates.
    pub fn lift(&self) -> LiftPoint {
        LiftPoint::new(self.coords.clone())
    }
}

/// A point of the universal cover `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftPoint {
    coords: Vec<f64>,
}

impl LiftPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "torus dimension must be at least 1");
        LiftPoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn project(&self) -> TorusPoint {
        TorusPoint::new(self.coords.clone())
    }

    pub fn translated(&self, v: &[f64]) -> LiftPoint {
        debug_assert_eq!(v.len(), self.dim());
        LiftPoint {
            coords: self.coords.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    /// `self - other` as a displacement.
    pub fn diff(&self, other: &LiftPoint) -> Vec<f64> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }
}

/// Finite-ball lower bound `|n·α|·‖n‖∞^τ ≥ c_min` for `0 < ‖n‖∞ ≤ radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineCertificate {
    pub tau: f64,
    pub radius: i64,
    pub c_min: f64,
    /// Lattice norm label; always `"linf"`.
    pub norm_kind: String,
    /// A lattice vector attaining `c_min`.
    pub witness: Vec<i64>,
}

/// The direction `α` of the vector field `X = Σ α_j ∂_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVector {
    components: Vec<PreciseReal>,
    alpha: Vec<f64>,
    resonances: Vec<Vec<i64>>,
    certificate: Option<DiophantineCertificate>,
    resonance_eps: f64,
}

impl DirectionVector {
    pub fn from_precise(components: Vec<PreciseReal>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDirection("dimension must be at least 1".into()));
        }
        if components.iter().any(|c| !c.hi.is_finite() || !c.lo.is_finite()) {
            return Err(Error::InvalidDirection("non-finite component".into()));
        }
        if components.iter().all(|c| c.hi == 0.0 && c.lo == 0.0) {
            return Err(Error::InvalidDirection("alpha must be nonzero".into()));
        }
        let alpha = components.iter().map(PreciseReal::value).collect();
        Ok(DirectionVector {
            components,
            alpha,
            resonances: Vec::new(),
            certificate: None,
            resonance_eps: DEFAULT_RESONANCE_EPS,
        })
    }

    pub fn from_decimals<S: AsRef<str>>(components: &[S]) -> Result<Self> {
        let parsed = components
            .iter()
            .map(|s| PreciseReal::from_decimal(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_precise(parsed)
    }

    pub fn from_f64(components: &[f64]) -> Result<Self> {
        Self::from_precise(components.iter().copied().map(PreciseReal::from_f64).collect())
    }

    /// `α = (1, φ)` with `φ` the golden ratio.
    pub fn golden() -> Self {
        Self::from_decimals(&["1", GOLDEN_RATIO]).expect("valid constant")
    }

    pub fn with_resonance_eps(mut self, eps: f64) -> Self {
        assert!(eps >= 0.0);
        self.resonance_eps = eps;
        self
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn components(&self) -> &[PreciseReal] {
        &self.components
    }

    pub fn resonance_eps(&self) -> f64 {
        self.resonance_eps
    }

    pub fn resonances(&self) -> &[Vec<i64>] {
        &self.resonances
    }

    pub fn certificate(&self) -> Option<&DiophantineCertificate> {
        self.certificate.as_ref()
    }

    /// Accurate small divisor `n·α`.
    pub fn dot(&self, n: &[i64]) -> f64 {
        assert_eq!(n.len(), self.dim(), "lattice vector dimension");
        precise::dot_int(n, &self.components)
    }

    /// `true` when `|n·α| < ε_res·max(1, ‖n‖∞)`.
    pub fn is_resonant(&self, n: &[i64]) -> bool {
        let norm = linf(n).max(1) as f64;
        self.dot(n).abs() < self.resonance_eps * norm
    }

    /// Records the resonances found in the ball of the given radius.
    pub fn scanned(mut self, radius: i64) -> Self {
        self.resonances = find_resonances(&self, radius);
        self
    }

    /// Attaches a certificate computed on the ball of the given radius.
    pub fn certified(mut self, tau: f64, radius: i64) -> Result<Self> {
        let cert = certify_diophantine(&self, tau, radius)?;
        self.resonances.clear();
        self.certificate = Some(cert);
        Ok(self)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

pub fn linf(n: &[i64]) -> i64 {
    n.iter().map(|k| k.abs()).max().unwrap_or(0)
}

/// Flips `n` so that its first nonzero entry is positive.
pub fn canonical_sign(n: &[i64]) -> Vec<i64> {
    match n.iter().find(|&&k| k != 0) {
        Some(&k) if k < 0 => n.iter().map(|k| -k).collect(),
        _ => n.to_vec(),
    }
}

/// `φ^t(x) = x + tα mod 1`.
pub fn flow(x: &TorusPoint, t: f64, alpha: &DirectionVector) -> TorusPoint {
    assert_eq!(x.dim(), alpha.dim(), "point and direction dimensions differ");
    let coords = x
        .coords
        .iter()
        .zip(&alpha.components)
        .map(|(&xi, &a)| precise::affine_mod1(xi, t, a))
        .collect();
    TorusPoint { coords }
}

/// The flow on lifts: `x + tα` without reduction.
pub fn flow_lift(x: &LiftPoint, t: f64, alpha: &DirectionVector) -> LiftPoint {
    assert_eq!(x.dim(), alpha.dim(), "point and direction dimensions differ");
    x.translated(&flow_displacement(t, alpha))
}

pub fn flow_displacement(t: f64, alpha: &DirectionVector) -> Vec<f64> {
    alpha.alpha.iter().map(|a| t * a).collect()
}

struct SweepOutcome {
    resonances: Vec<Vec<i64>>,
    best: Option<(f64, Vec<i64>)>,
}

/// One pass over the canonical half of the ball `0 < ‖n‖∞ ≤ radius`,
/// collecting resonances and the minimum of `|n·α|·‖n‖∞^τ` over the rest.
fn sweep(alpha: &DirectionVector, radius: i64, tau: Option<f64>) -> SweepOutcome {
    let d = alpha.dim();
    let pow: Vec<f64> = match tau {
        Some(tau) => (0..=radius).map(|k| (k as f64).powf(tau)).collect(),
        None => Vec::new(),
    };
    // Task = (position of the leading nonzero entry, its value).
    let tasks: Vec<(usize, i64)> = (0..d)
        .flat_map(|lead| (1..=radius).map(move |v| (lead, v)))
        .collect();
    let parts: Vec<SweepOutcome> = tasks
        .par_iter()
        .map(|&(lead, value)| sweep_slice(alpha, radius, lead, value, &pow))
        .collect();

    let mut resonances = Vec::new();
    let mut best: Option<(f64, Vec<i64>)> = None;
    for part in parts {
        resonances.extend(part.resonances);
        if let Some((v, n)) = part.best {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, n));
            }
        }
    }
    resonances.sort_by(|a, b| linf(a).cmp(&linf(b)).then_with(|| a.cmp(b)));
    SweepOutcome { resonances, best }
}

fn sweep_slice(
    alpha: &DirectionVector,
    radius: i64,
    lead: usize,
    value: i64,
    pow: &[f64],
) -> SweepOutcome {
    let d = alpha.dim();
    let comps = &alpha.components;
    let eps = alpha.resonance_eps;
    let mut n = vec![0i64; d];
    n[lead] = value;
    for slot in n.iter_mut().skip(lead + 1) {
        *slot = -radius;
    }
    let mut out = SweepOutcome {
        resonances: Vec::new(),
        best: None,
    };
    loop {
        let (fast, bound) = precise::dot_int_fast(&n, comps);
        let v = if fast.abs() <= bound * REFINE_FACTOR {
            precise::dot_int(&n, comps)
        } else {
            fast
        };
        let norm = linf(&n);
        if v.abs() < eps * (norm.max(1) as f64) {
            out.resonances.push(n.clone());
        } else if !pow.is_empty() {
            let cand = v.abs() * pow[norm as usize];
            if out.best.as_ref().is_none_or(|(b, _)| cand < *b) {
                out.best = Some((cand, n.clone()));
            }
        }
        // odometer over the trailing coordinates
        let mut k = d;
        loop {
            if k == lead + 1 {
                return out;
            }
            k -= 1;
            if n[k] < radius {
                n[k] += 1;
                break;
            }
            n[k] = -radius;
        }
    }
}

/// All `n` with `0 < ‖n‖∞ ≤ radius` and `|n·α| < ε_res·max(1, ‖n‖∞)`, one per
/// `±n` pair, sign-normalized, sorted by norm then lexicographically.
pub fn find_resonances(alpha: &DirectionVector, radius: i64) -> Vec<Vec<i64>> {
    if radius < 1 {
        return Vec::new();
    }
    sweep(alpha, radius, None).resonances
}

/// Brute-force minimum of `|n·α|·‖n‖∞^τ` over the ball.
pub fn certify_diophantine(
    alpha: &DirectionVector,
    tau: f64,
    radius: i64,
) -> Result<DiophantineCertificate> {
    if radius < 1 {
        return Err(Error::InvalidDirection("certificate radius must be >= 1".into()));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidDirection(format!("tau must be a finite nonnegative real, got {tau}")));
    }
    let outcome = sweep(alpha, radius, Some(tau));
    if let Some(n) = outcome.resonances.into_iter().next() {
        return Err(Error::ResonanceFound { n });
    }
    let (c_min, witness) = outcome.best.expect("nonempty ball");
    Ok(DiophantineCertificate {
        tau,
        radius,
        c_min,
        norm_kind: "linf".to_string(),
        witness,
    })
}

/// A rational approximation `p/q` of the Liouville coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergent {
    pub exponent: u32,
    pub p: i128,
    pub q: i128,
    /// `q·λ - p`, evaluated exactly and rounded once.
    pub residual: f64,
}

impl Convergent {
    /// The lattice vector `(p, -q)` with `n·α = p - qλ`, when it is small
    /// enough for exact double arithmetic.
    pub fn mode(&self) -> Option<Vec<i64>> {
        const LIMIT: i128 = 1 << 53;
        (self.q < LIMIT && self.p < LIMIT).then(|| vec![self.p as i64, -(self.q as i64)])
    }
}

#[derive(Debug, Clone)]
pub struct LiouvilleVector {
    pub direction: DirectionVector,
    pub convergents: Vec<Convergent>,
}

/// `α = (1, λ)` with `λ = Σ_k 10^(-s_k)`.
///
/// The returned direction uses [`LIOUVILLE_RESONANCE_EPS`], since every
/// component is an exact decimal.
pub fn liouville_vector(d: usize, schedule: &[u32]) -> Result<LiouvilleVector> {
    if d != 2 {
        return Err(Error::BadSchedule(format!("Liouville directions are two-dimensional, got d = {d}")));
    }
    if schedule.is_empty() {
        return Err(Error::BadSchedule("schedule is empty".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadSchedule(format!("schedule {schedule:?} is not strictly increasing")));
    }
    if schedule[0] == 0 || *schedule.last().unwrap() > 36 {
        return Err(Error::BadSchedule("exponents must lie in 1..=36".into()));
    }
    let terms: Vec<BigRational> = schedule.iter().map(|&s| precise::ten_to_minus(s)).collect();
    let lambda: BigRational = terms.iter().fold(BigRational::zero(), |acc, t| acc + t);

    let convergents = schedule
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let q: i128 = 10i128.pow(s);
            let p: i128 = schedule[..=k].iter().map(|&sj| 10i128.pow(s - sj)).sum();
            let exact = BigRational::from_integer(BigInt::from(q)) * &lambda
                - BigRational::from_integer(BigInt::from(p));
            Convergent {
                exponent: s,
                p,
                q,
                residual: exact.to_f64().unwrap_or(f64::NAN),
            }
        })
        .collect();

    let direction = DirectionVector::from_precise(vec![
        PreciseReal::from_f64(1.0),
        PreciseReal::from_rational(&lambda),
    ])?
    .with_resonance_eps(LIOUVILLE_RESONANCE_EPS);
    Ok(LiouvilleVector {
        direction,
        convergents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;

    /// Exact-rational resonance oracle, independent of the double-double path.
    fn rational_resonances(alpha: &[&str], radius: i64, eps: f64) -> Vec<Vec<i64>> {
        let comps: Vec<BigRational> = alpha
            .iter()
            .map(|s| precise::parse_decimal_exact(s).unwrap())
            .collect();
        let d = comps.len();
        let mut out = Vec::new();
        let side = (2 * radius + 1) as usize;
        for idx in 0..side.pow(d as u32) {
            let mut rest = idx;
            let n: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (rest % side) as i64 - radius;
                    rest /= side;
                    v
                })
                .collect();
            if n.iter().all(|&k| k == 0) || canonical_sign(&n) != n {
                continue;
            }
            let dot = n
                .iter()
                .zip(&comps)
                .fold(BigRational::zero(), |acc, (&k, c)| acc + c * BigRational::from_integer(k.into()));
            let bound = eps * linf(&n).max(1) as f64;
            if dot.abs().to_f64().unwrap() < bound {
                out.push(n);
            }
        }
        out.sort_by(|a, b| linf(a).cmp(&linf(b)).then_with(|| a.cmp(b)));
        out
    }

    #[test]
    fn flow_examples() {
        let a = DirectionVector::from_f64(&[0.3, 0.7]).unwrap();
        assert_eq!(flow(&TorusPoint::origin(2), 0.0, &a), TorusPoint::origin(2));

        let a = DirectionVector::from_f64(&[1.0, 0.5]).unwrap();
        let y = flow(&TorusPoint::new(vec![0.5, 0.25]), 1.0, &a);
        assert_eq!(y.coords(), &[0.5, 0.75]);

        // 2φ mod 1 = √5 - 2, computed exactly from the decimal string
        let exact = precise::parse_decimal_exact(GOLDEN_RATIO).unwrap() * BigRational::from_integer(2.into())
            - BigRational::from_integer(3.into());
        let y = flow(&TorusPoint::origin(2), 2.0, &DirectionVector::golden());
        assert_eq!(y.coords()[0], 0.0);
        assert!((y.coords()[1] - exact.to_f64().unwrap()).abs() < 1e-16);
        assert!((y.coords()[1] - 0.236_067_977_499_789_7).abs() < 1e-15);
    }

    #[test]
    fn resonance_examples() {
        let a = DirectionVector::from_decimals(&["1", "0.5"]).unwrap();
        assert!(find_resonances(&a, 3).contains(&vec![1, -2]));

        assert!(find_resonances(&DirectionVector::golden(), 100).is_empty());

        let a = DirectionVector::from_decimals(&["2", "4"]).unwrap();
        assert!(find_resonances(&a, 2).contains(&vec![2, -1]));
    }

    #[test]
    fn resonances_agree_with_rational_oracle() {
        for (alpha, radius) in [
            (vec!["1", "0.5"], 6),
            (vec!["2", "4"], 4),
            (vec!["0.3", "0.2", "0.1"], 4),
            (vec!["1", "0.1"], 10),
            (vec!["1", GOLDEN_RATIO], 12),
        ] {
            let dir = DirectionVector::from_decimals(&alpha).unwrap();
            assert_eq!(
                find_resonances(&dir, radius),
                rational_resonances(&alpha, radius, DEFAULT_RESONANCE_EPS),
                "alpha = {alpha:?}"
            );
        }
    }

    #[test]
    fn certificate_examples() {
        let cert = certify_diophantine(&DirectionVector::golden(), 1.0, 100).unwrap();
        // brute-force optimum is |1 - φ|·1 at n = (1, -1)
        assert_eq!(cert.witness, vec![1, -1]);
        assert!((cert.c_min - 0.618_033_988_749_894_8).abs() < 1e-15);
        assert_eq!(cert.norm_kind, "linf");

        let a = DirectionVector::from_decimals(&["1", "0.5"]).unwrap();
        assert_eq!(
            certify_diophantine(&a, 1.0, 3),
            Err(Error::ResonanceFound { n: vec![1, -2] })
        );

        let a = DirectionVector::from_decimals(&["1"]).unwrap();
        let cert = certify_diophantine(&a, 0.0, 5).unwrap();
        assert_eq!(cert.c_min, 1.0);
        assert!(certify_diophantine(&a, 0.0, 0).is_err());
    }

    #[test]
    fn liouville_examples() {
        let lv = liouville_vector(2, &[1, 2, 6, 24]).unwrap();
        let expected = precise::parse_decimal_exact("0.110001000000000000000001").unwrap();
        let lam = lv.direction.components()[1];
        assert_eq!(lam, PreciseReal::from_rational(&expected));

        let lv1 = liouville_vector(2, &[1]).unwrap();
        assert!(find_resonances(&lv1.direction, 10).contains(&vec![1, -10]));

        let lv = liouville_vector(2, &[1, 2, 6]).unwrap();
        let c = &lv.convergents[2];
        assert_eq!((c.p, c.q), (110001, 1_000_000));
        let gap = lv.direction.dot(&c.mode().unwrap()).abs();
        assert!(gap <= 1e-24 * 1e6, "{gap}");

        assert!(matches!(liouville_vector(2, &[2, 1]), Err(Error::BadSchedule(_))));
        assert!(matches!(liouville_vector(2, &[1, 1]), Err(Error::BadSchedule(_))));
        assert!(matches!(liouville_vector(3, &[1, 2]), Err(Error::BadSchedule(_))));
    }

    #[test]
    fn liouville_convergents_approximate_fast() {
        let schedule = [1, 2, 6, 24];
        let lv = liouville_vector(2, &schedule).unwrap();
        for k in 0..schedule.len() - 1 {
            let c = &lv.convergents[k];
            let bound = 2.0 * 10f64.powi(schedule[k] as i32 - schedule[k + 1] as i32);
            assert!(c.residual > 0.0 && c.residual <= bound, "k={k} residual={}", c.residual);
        }
        assert_eq!(lv.convergents[3].residual, 0.0);
        // the compensated small divisor reproduces the exact residual
        for c in &lv.convergents[..3] {
            let v = -lv.direction.dot(&c.mode().unwrap());
            assert!((v - c.residual).abs() <= 1e-9 * c.residual);
        }
    }

    proptest! {
        #[test]
        fn flow_group_law(x0 in 0.0..1.0f64, x1 in 0.0..1.0f64, s in -50.0..50.0f64, t in -50.0..50.0f64) {
            let a = DirectionVector::golden();
            let x = TorusPoint::new(vec![x0, x1]);
            let lhs = flow(&flow(&x, s, &a), t, &a);
            let rhs = flow(&x, s + t, &a);
            prop_assert!(lhs.distance(&rhs) < 1e-12);
        }

        #[test]
        fn certificate_is_monotone_in_radius(a in 0.05..3.0f64, r in 1i64..25) {
            let dir = DirectionVector::from_f64(&[1.0, a]).unwrap();
            if let (Ok(small), Ok(big)) = (certify_diophantine(&dir, 1.0, r), certify_diophantine(&dir, 1.0, r + 7)) {
                prop_assert!(big.c_min <= small.c_min);
            }
        }

        #[test]
        fn resonance_partition(a in -2.0..2.0f64, b in -2.0..2.0f64) {
            let dir = DirectionVector::from_f64(&[1.0, a, b]).unwrap();
            let found = find_resonances(&dir, 3);
            for n in &found {
                prop_assert!(dir.dot(n).abs() < DEFAULT_RESONANCE_EPS * linf(n) as f64);
                prop_assert_eq!(canonical_sign(n), n.clone());
            }
            for i in -3i64..=3 { for j in -3i64..=3 { for k in -3i64..=3 {
                let n = vec![i, j, k];
                if linf(&n) == 0 || canonical_sign(&n) != n || found.contains(&n) { continue; }
                prop_assert!(dir.dot(&n).abs() >= DEFAULT_RESONANCE_EPS * linf(&n) as f64);
            }}}
        }
    }
}
