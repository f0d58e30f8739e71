//! Sparse trigonometric polynomials and one-forms on `T^d`, the Lie
//! derivative along `X = Σ α_j ∂_j`, and the cohomological solvers
//! `L_X h = f - c` and `L_X h_η = η(X) - c_η`.
//!
//! Functions are stored as finite maps `n ↦ ĉ_n` for
//! `f(x) = Σ ĉ_n e^{2πi n·x}` with Hermitian symmetry `ĉ_{-n} = conj(ĉ_n)`,
//! so every polynomial is real valued.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus_flow::{canonical_sign, linf, DirectionVector};

const TWO_PI: f64 = 2.0 * PI;

/// Tolerance on Hermitian symmetry of loaded coefficient lists.
const HERMITIAN_TOL: f64 = 1e-12;

pub type Mode = Vec<i64>;

/// A real trigonometric polynomial with sparse complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    d: usize,
    modes: BTreeMap<Mode, Complex64>,
}

impl TrigPoly {
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "torus dimension must be at least 1");
        TrigPoly {
            d,
            modes: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        let mut p = Self::zero(d);
        p.insert_raw(vec![0; d], Complex64::new(c, 0.0));
        p
    }

    /// `Σ a cos(2π n·x) + Σ b sin(2π n·x)` from real amplitude lists.
    pub fn from_real_amplitudes(d: usize, cos: &[(Mode, f64)], sin: &[(Mode, f64)]) -> Self {
        let mut p = Self::zero(d);
        for (n, a) in cos {
            p.add_cos(n, *a);
        }
        for (n, b) in sin {
            p.add_sin(n, *b);
        }
        p
    }

    pub fn cos_mode(n: &[i64], amplitude: f64) -> Self {
        let mut p = Self::zero(n.len());
        p.add_cos(n, amplitude);
        p
    }

    pub fn sin_mode(n: &[i64], amplitude: f64) -> Self {
        let mut p = Self::zero(n.len());
        p.add_sin(n, amplitude);
        p
    }

    fn add_cos(&mut self, n: &[i64], a: f64) {
        assert_eq!(n.len(), self.d, "mode dimension");
        if n.iter().all(|&k| k == 0) {
            self.accumulate(n.to_vec(), Complex64::new(a, 0.0));
        } else {
            let neg: Mode = n.iter().map(|k| -k).collect();
            self.accumulate(n.to_vec(), Complex64::new(a / 2.0, 0.0));
            self.accumulate(neg, Complex64::new(a / 2.0, 0.0));
        }
    }

    fn add_sin(&mut self, n: &[i64], b: f64) {
        assert_eq!(n.len(), self.d, "mode dimension");
        if n.iter().any(|&k| k != 0) {
            let neg: Mode = n.iter().map(|k| -k).collect();
            self.accumulate(n.to_vec(), Complex64::new(0.0, -b / 2.0));
            self.accumulate(neg, Complex64::new(0.0, b / 2.0));
        }
    }

    fn accumulate(&mut self, n: Mode, c: Complex64) {
        let entry = self.modes.entry(n).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        self.modes.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    }

    fn insert_raw(&mut self, n: Mode, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.modes.insert(n, c);
        }
    }

    /// Builds a polynomial from `(n, ĉ_n)` pairs, completing each mode with
    /// its Hermitian partner when the partner is absent.
    pub fn from_modes(d: usize, entries: &[(Mode, Complex64)]) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPolynomial("dimension must be at least 1".into()));
        }
        let mut given: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (n, c) in entries {
            if n.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: n.len(),
                });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidPolynomial(format!("non-finite coefficient at {n:?}")));
            }
            if given.insert(n.clone(), *c).is_some() {
                return Err(Error::InvalidPolynomial(format!("mode {n:?} listed twice")));
            }
        }
        let mut p = Self::zero(d);
        for (n, c) in &given {
            let neg: Mode = n.iter().map(|k| -k).collect();
            let partner = given.get(&neg).copied();
            if neg == *n {
                if c.im.abs() > HERMITIAN_TOL * c.norm().max(1.0) {
                    return Err(Error::InvalidPolynomial("mean coefficient must be real".into()));
                }
                p.insert_raw(n.clone(), Complex64::new(c.re, 0.0));
                continue;
            }
            match partner {
                Some(pc) => {
                    if (pc - c.conj()).norm() > HERMITIAN_TOL * c.norm().max(1.0) {
                        return Err(Error::InvalidPolynomial(format!(
                            "modes {n:?} and {neg:?} are not complex conjugate"
                        )));
                    }
                    p.insert_raw(n.clone(), *c);
                }
                None => {
                    p.insert_raw(n.clone(), *c);
                    p.insert_raw(neg, c.conj());
                }
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coefficient(&self, n: &[i64]) -> Complex64 {
        self.modes.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.modes.iter()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// The mean against Lebesgue measure, `Re ĉ_0`.
    pub fn mean(&self) -> f64 {
        self.modes.get(&vec![0; self.d]).map_or(0.0, |c| c.re)
    }

    pub fn zero_mean(&self) -> TrigPoly {
        let mut p = self.clone();
        p.modes.remove(&vec![0; self.d]);
        p
    }

    /// Largest `‖n‖∞` among present modes.
    pub fn degree(&self) -> i64 {
        self.modes.keys().map(|n| linf(n)).max().unwrap_or(0)
    }

    /// Point value `Σ ĉ_n e^{2πi n·x}` (real by symmetry).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "point dimension");
        self.modes
            .iter()
            .map(|(n, c)| {
                let phase = TWO_PI * reduced_phase(n, x);
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&Mode, Complex64) -> Complex64) -> TrigPoly {
        let mut p = Self::zero(self.d);
        for (n, c) in &self.modes {
            p.insert_raw(n.clone(), f(n, *c));
        }
        p
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        self.map_coefficients(|_, c| c * s)
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let mut p = self.clone();
        for (n, c) in &other.modes {
            let e = p.modes.entry(n.clone()).or_insert(Complex64::new(0.0, 0.0));
            *e += c;
        }
        p.modes.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        p
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(-1.0))
    }

    /// Largest coefficient-level deviation `max_n |ĉ_n - ĉ'_n| / max(|ĉ_n|, floor)`.
    pub fn max_relative_deviation(&self, other: &TrigPoly, floor: f64) -> f64 {
        let keys: std::collections::BTreeSet<&Mode> = self.modes.keys().chain(other.modes.keys()).collect();
        keys.into_iter()
            .map(|n| {
                let a = self.coefficient(n);
                let b = other.coefficient(n);
                (a - b).norm() / a.norm().max(floor)
            })
            .fold(0.0, f64::max)
    }
}

/// `(n·x) mod 1`, reduced before multiplication by 2π.
fn reduced_phase(n: &[i64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&k, &xi) in n.iter().zip(x) {
        if k != 0 {
            acc += k as f64 * xi.rem_euclid(1.0);
            acc = acc.rem_euclid(1.0);
        }
    }
    acc
}

pub(crate) fn phase_of(n: &[i64], x: &[f64]) -> f64 {
    reduced_phase(n, x)
}

/// A one-form `η = Σ_j p_j dx_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    components: Vec<TrigPoly>,
}

impl OneForm {
    pub fn new(components: Vec<TrigPoly>) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::InvalidPolynomial("a one-form needs at least one component".into()));
        }
        if let Some(bad) = components.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(OneForm { components })
    }

    pub fn zero(d: usize) -> Self {
        OneForm {
            components: vec![TrigPoly::zero(d); d],
        }
    }

    /// `f dx_j`.
    pub fn single(j: usize, f: TrigPoly) -> Self {
        let d = f.dim();
        assert!(j < d, "component index out of range");
        let mut form = Self::zero(d);
        form.components[j] = f;
        form
    }

    /// The constant form `dx_j`.
    pub fn dx(d: usize, j: usize) -> Self {
        Self::single(j, TrigPoly::constant(d, 1.0))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[TrigPoly] {
        &self.components
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        OneForm {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &OneForm) -> OneForm {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> OneForm {
        OneForm {
            components: self.components.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TrigPoly::is_zero)
    }

    /// Bit-exact key for memo tables.
    pub fn key(&self) -> Vec<(usize, Mode, u64, u64)> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(j, p)| p.modes.iter().map(move |(n, c)| (j, n.clone(), c.re.to_bits(), c.im.to_bits())))
            .collect()
    }
}

/// Result of a cohomological solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologySolution {
    /// Zero-mean solution.
    pub h: TrigPoly,
    /// The mean of the data, i.e. the obstruction constant.
    pub c: f64,
    /// `max_n |ĥ_n| / |ĉ_n|` over nonzero modes; 1 for constant data.
    pub amplification: f64,
}

/// `L_X f`: mode `n` is multiplied by `2πi n·α`.
pub fn lie_derivative(f: &TrigPoly, alpha: &DirectionVector) -> TrigPoly {
    assert_eq!(f.dim(), alpha.dim(), "dimension mismatch");
    f.map_coefficients(|n, c| {
        let w = TWO_PI * alpha.dot(n);
        Complex64::new(0.0, w) * c
    })
}

/// Solves `L_X h = f - c` with `h` of zero mean.
pub fn solve_cohomological(f: &TrigPoly, alpha: &DirectionVector) -> Result<CohomologySolution> {
    assert_eq!(f.dim(), alpha.dim(), "dimension mismatch");
    let zero_mode = vec![0i64; f.dim()];
    let mut h = TrigPoly::zero(f.dim());
    let mut amplification: Option<f64> = None;
    let eps = alpha.resonance_eps();
    for (n, c) in f.modes() {
        if *n == zero_mode {
            continue;
        }
        let small = alpha.dot(n);
        if small.abs() < eps * linf(n) as f64 {
            // a resonant mode with vanishing data is harmless; absent modes never reach here
            return Err(Error::ResonantMode { n: canonical_sign(n) });
        }
        let hn = *c / Complex64::new(0.0, TWO_PI * small);
        let ratio = hn.norm() / c.norm();
        amplification = Some(amplification.map_or(ratio, |a: f64| a.max(ratio)));
        h.insert_raw(n.clone(), hn);
    }
    Ok(CohomologySolution {
        h,
        c: f.mean(),
        amplification: amplification.unwrap_or(1.0),
    })
}

/// The function `η(X) = Σ α_j p_j`.
pub fn contract_with_flow(eta: &OneForm, alpha: &DirectionVector) -> TrigPoly {
    assert_eq!(eta.dim(), alpha.dim(), "dimension mismatch");
    eta.components
        .iter()
        .zip(alpha.alpha())
        .fold(TrigPoly::zero(eta.dim()), |acc, (p, a)| acc.add(&p.scale(*a)))
}

/// Solves `L_X h_η = η(X) - c_η`.
pub fn solve_for_form(eta: &OneForm, alpha: &DirectionVector) -> Result<CohomologySolution> {
    solve_cohomological(&contract_with_flow(eta, alpha), alpha)
}

/// `df = Σ_j ∂_j f dx_j`.
pub fn exterior_derivative(f: &TrigPoly) -> OneForm {
    let components = (0..f.dim())
        .map(|j| f.map_coefficients(|n, c| Complex64::new(0.0, TWO_PI * n[j] as f64) * c))
        .collect();
    OneForm { components }
}

/// `(Σ_n (1 + ‖n‖²)^s |ĉ_n|²)^{1/2}` with the Euclidean norm on modes.
pub fn sobolev_norm(f: &TrigPoly, s: f64) -> f64 {
    assert!(s >= 0.0, "Sobolev exponent must be nonnegative");
    f.modes()
        .map(|(n, c)| {
            let n2: f64 = n.iter().map(|&k| (k as f64) * (k as f64)).sum();
            (1.0 + n2).powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> DirectionVector {
        DirectionVector::golden()
    }

    fn half() -> DirectionVector {
        DirectionVector::from_decimals(&["1", "0.5"]).unwrap()
    }

    /// Central difference of `t ↦ f(x + tα)` at `t = 0`.
    fn flow_derivative_fd(f: &TrigPoly, alpha: &[f64], x: &[f64]) -> f64 {
        let h = 1e-5;
        let shifted = |t: f64| -> Vec<f64> { x.iter().zip(alpha).map(|(a, b)| a + t * b).collect() };
        (f.evaluate(&shifted(h)) - f.evaluate(&shifted(-h))) / (2.0 * h)
    }

    fn partial_fd(f: &TrigPoly, j: usize, x: &[f64]) -> f64 {
        let h = 1e-5;
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[j] += h;
        m[j] -= h;
        (f.evaluate(&p) - f.evaluate(&m)) / (2.0 * h)
    }

    const PROBES: [[f64; 2]; 4] = [[0.1, 0.7], [0.33, 0.25], [0.9, 0.05], [0.5, 0.5]];

    #[test]
    fn amplitude_constructor_is_hermitian() {
        let f = TrigPoly::from_real_amplitudes(2, &[(vec![1, 2], 3.0)], &[(vec![0, 1], 2.0)]);
        for (n, c) in f.modes() {
            let neg: Mode = n.iter().map(|k| -k).collect();
            assert_eq!(f.coefficient(&neg), c.conj());
        }
        let x = [0.2, 0.4];
        let direct = 3.0 * (TWO_PI * (0.2 + 0.8f64)).cos() + 2.0 * (TWO_PI * 0.4f64).sin();
        assert!((f.evaluate(&x) - direct).abs() < 1e-12);
    }

    #[test]
    fn hermitian_completion_on_load() {
        let f = TrigPoly::from_modes(2, &[(vec![1, 0], Complex64::new(0.5, 0.0))]).unwrap();
        assert_eq!(f, TrigPoly::cos_mode(&[1, 0], 1.0));
        let bad = TrigPoly::from_modes(
            2,
            &[(vec![1, 0], Complex64::new(0.5, 0.0)), (vec![-1, 0], Complex64::new(0.4, 0.0))],
        );
        assert!(bad.is_err());
        assert!(TrigPoly::from_modes(2, &[(vec![0, 0], Complex64::new(1.0, 1.0))]).is_err());
        assert!(TrigPoly::from_modes(2, &[(vec![0], Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn lie_derivative_examples() {
        assert!(lie_derivative(&TrigPoly::constant(2, 1.0), &golden()).is_zero());

        let f = TrigPoly::cos_mode(&[1, 0], 1.0);
        let lf = lie_derivative(&f, &golden());
        assert_eq!(lf, TrigPoly::sin_mode(&[1, 0], -TWO_PI));
        for x in PROBES {
            assert!((lf.evaluate(&x) - flow_derivative_fd(&f, golden().alpha(), &x)).abs() < 1e-7);
        }

        let f = TrigPoly::sin_mode(&[1, 1], 1.0);
        let lf = lie_derivative(&f, &half());
        let expected = TrigPoly::cos_mode(&[1, 1], TWO_PI * 1.5);
        assert!(lf.max_relative_deviation(&expected, 1e-300) < 1e-15);
        for x in PROBES {
            assert!((lf.evaluate(&x) - flow_derivative_fd(&f, half().alpha(), &x)).abs() < 1e-7);
        }
        assert_eq!(lf.mean(), 0.0);
    }

    #[test]
    fn solver_examples() {
        let f = TrigPoly::cos_mode(&[1, 0], 1.0);
        let sol = solve_cohomological(&f, &golden()).unwrap();
        assert_eq!(sol.c, 0.0);
        let expected = TrigPoly::sin_mode(&[1, 0], 1.0 / TWO_PI);
        assert!(sol.h.max_relative_deviation(&expected, 1e-300) < 1e-15);
        let back = lie_derivative(&sol.h, &golden()).add(&TrigPoly::constant(2, sol.c));
        assert!(back.max_relative_deviation(&f, 1e-300) < 1e-15);

        let sol = solve_cohomological(&TrigPoly::constant(2, 5.0), &golden()).unwrap();
        assert!(sol.h.is_zero());
        assert_eq!(sol.c, 5.0);
        assert_eq!(sol.amplification, 1.0);

        let f = TrigPoly::cos_mode(&[1, -2], 1.0);
        assert_eq!(
            solve_cohomological(&f, &half()),
            Err(Error::ResonantMode { n: vec![1, -2] })
        );
    }

    #[test]
    fn resonant_mode_with_zero_data_is_fine() {
        // mode (1,-2) is resonant for (1, 0.5) but absent from the data
        let f = TrigPoly::cos_mode(&[1, 0], 1.0).add(&TrigPoly::constant(2, 2.0));
        let sol = solve_cohomological(&f, &half()).unwrap();
        assert_eq!(sol.h.coefficient(&[1, -2]), Complex64::new(0.0, 0.0));
        assert_eq!(sol.c, 2.0);
    }

    #[test]
    fn contraction_examples() {
        let a = golden();
        assert_eq!(contract_with_flow(&OneForm::dx(2, 0), &a), TrigPoly::constant(2, 1.0));
        assert_eq!(contract_with_flow(&OneForm::dx(2, 1), &a), TrigPoly::constant(2, a.alpha()[1]));
        let eta = OneForm::single(1, TrigPoly::cos_mode(&[1, 0], 1.0));
        assert_eq!(contract_with_flow(&eta, &half()), TrigPoly::cos_mode(&[1, 0], 0.5));
    }

    #[test]
    fn solve_for_form_examples() {
        let a = golden();
        for j in 0..2 {
            let sol = solve_for_form(&OneForm::dx(2, j), &a).unwrap();
            assert!(sol.h.is_zero());
            assert_eq!(sol.c, a.alpha()[j]);
        }

        let f = TrigPoly::sin_mode(&[1, 0], 1.0);
        let sol = solve_for_form(&exterior_derivative(&f), &a).unwrap();
        assert_eq!(sol.c, 0.0);
        assert!(sol.h.max_relative_deviation(&f, 1e-300) < 1e-14);

        let eta0 = OneForm::dx(2, 0).scale(1.0 / a.alpha()[0]);
        let sol = solve_for_form(&eta0, &a).unwrap();
        assert!(sol.h.is_zero());
        assert_eq!(sol.c, 1.0);
    }

    #[test]
    fn exterior_derivative_examples() {
        assert!(exterior_derivative(&TrigPoly::constant(2, 3.0)).is_zero());

        let f = TrigPoly::sin_mode(&[0, 1], 1.0);
        let df = exterior_derivative(&f);
        assert!(df.components()[0].is_zero());
        assert!(df.components()[1].max_relative_deviation(&TrigPoly::cos_mode(&[0, 1], TWO_PI), 1e-300) < 1e-15);

        let f = TrigPoly::cos_mode(&[1, 1], 1.0);
        let df = exterior_derivative(&f);
        let expected = TrigPoly::sin_mode(&[1, 1], -TWO_PI);
        for j in 0..2 {
            assert!(df.components()[j].max_relative_deviation(&expected, 1e-300) < 1e-15);
            for x in PROBES {
                assert!((df.components()[j].evaluate(&x) - partial_fd(&f, j, &x)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_norm(&TrigPoly::zero(2), 1.0), 0.0);
        let f = TrigPoly::cos_mode(&[1, 0], 1.0);
        assert!((sobolev_norm(&f, 0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((sobolev_norm(&f, 1.0) - 1.0).abs() < 1e-15);
    }

    fn arb_poly() -> impl Strategy<Value = TrigPoly> {
        prop::collection::vec(((-4i64..=4, -4i64..=4), -2.0..2.0f64, -2.0..2.0f64), 0..8).prop_map(|terms| {
            let cos: Vec<(Mode, f64)> = terms.iter().map(|((a, b), c, _)| (vec![*a, *b], *c)).collect();
            let sin: Vec<(Mode, f64)> = terms.iter().map(|((a, b), _, s)| (vec![*a, *b], *s)).collect();
            TrigPoly::from_real_amplitudes(2, &cos, &sin)
        })
    }

    fn arb_form() -> impl Strategy<Value = OneForm> {
        (arb_poly(), arb_poly()).prop_map(|(p, q)| OneForm::new(vec![p, q]).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(f in arb_poly()) {
            let a = golden();
            let sol = solve_cohomological(&f, &a).unwrap();
            let back = lie_derivative(&sol.h, &a).add(&TrigPoly::constant(2, sol.c));
            prop_assert!(back.max_relative_deviation(&f, 1e-300) < 1e-12);
            prop_assert_eq!(sol.h.mean(), 0.0);
        }

        #[test]
        fn exact_forms_have_no_obstruction(f in arb_poly()) {
            let sol = solve_for_form(&exterior_derivative(&f), &golden()).unwrap();
            prop_assert!(sol.c.abs() < 1e-12);
            prop_assert!(sol.h.max_relative_deviation(&f.zero_mean(), 1e-300) < 1e-12);
        }

        #[test]
        fn changing_form_by_constant_datum(eta in arb_form(), k in -3.0..3.0f64) {
            // η₂ = η + k·dx₁/α₁ has η₂(X) = η(X) + k
            let a = golden();
            let eta2 = eta.add(&OneForm::dx(2, 0).scale(k / a.alpha()[0]));
            let s1 = solve_for_form(&eta, &a).unwrap();
            let s2 = solve_for_form(&eta2, &a).unwrap();
            prop_assert!(s1.h.max_relative_deviation(&s2.h, 1e-300) < 1e-12);
            prop_assert!((s2.c - s1.c - k).abs() < 1e-12);
        }

        #[test]
        fn solver_is_linear(e1 in arb_form(), e2 in arb_form(), s in -3.0..3.0f64) {
            let a = golden();
            let combo = e1.scale(s).add(&e2);
            let lhs = solve_for_form(&combo, &a).unwrap();
            let r1 = solve_for_form(&e1, &a).unwrap();
            let r2 = solve_for_form(&e2, &a).unwrap();
            let h = r1.h.scale(s).add(&r2.h);
            prop_assert!((lhs.c - (s * r1.c + r2.c)).abs() < 1e-12);
            for x in PROBES {
                prop_assert!((lhs.h.evaluate(&x) - h.evaluate(&x)).abs() < 1e-10);
            }
        }
    }
}
