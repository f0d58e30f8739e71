//! Finite signed combinations of point masses on the torus.

use serde::{Deserialize, Serialize};

use crate::spectral::TrigPoly;
use crate::torus_flow::TorusPoint;

/// Points closer than this (per coordinate, mod 1) are identified.
pub const POINT_TOL: f64 = 1e-12;

/// `Σ w_k δ_{x_k}` with distinct points and nonzero weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurrent {
    atoms: Vec<(TorusPoint, f64)>,
}

impl ZeroCurrent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dirac(x: TorusPoint) -> Self {
        let mut z = Self::new();
        z.add_atom(x, 1.0);
        z
    }

    /// Adds `w δ_x`, merging with an existing atom at the same point.
    pub fn add_atom(&mut self, x: TorusPoint, w: f64) {
        if let Some(slot) = self.atoms.iter_mut().find(|(p, _)| p.approx_eq(&x, POINT_TOL)) {
            slot.1 += w;
        } else {
            self.atoms.push((x, w));
        }
        self.atoms.retain(|(_, w)| *w != 0.0);
    }

    pub fn add(&self, other: &ZeroCurrent) -> ZeroCurrent {
        let mut z = self.clone();
        for (x, w) in &other.atoms {
            z.add_atom(x.clone(), *w);
        }
        z
    }

    pub fn atoms(&self) -> &[(TorusPoint, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass `Σ w_k`.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// `Σ w_k f(x_k)`.
    pub fn pair(&self, f: &TrigPoly) -> f64 {
        self.atoms.iter().map(|(x, w)| w * f.evaluate(x.coords())).sum()
    }

    /// Multiset equality: same points (mod 1, within `POINT_TOL`) with the
    /// same weights.
    pub fn same_as(&self, other: &ZeroCurrent) -> bool {
        let diff = self.add(&other.negated());
        diff.atoms.iter().all(|(_, w)| w.abs() < 1e-12)
    }

    pub fn negated(&self) -> ZeroCurrent {
        ZeroCurrent {
            atoms: self.atoms.iter().map(|(x, w)| (x.clone(), -w)).collect(),
        }
    }
}
