//! Model geometries: the round sphere and its antipodal quotient, stereographic
//! conformal charts, and manifold quadrature.

pub mod chart;
pub mod integrate;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use chart::Chart;
pub use integrate::{integrate, Field, Focus, GridField, IntegrateOptions};
pub use quadrature::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    RoundSphere,
    AntipodalQuotient,
}

impl std::str::FromStr for ModelKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round-sphere" | "sphere" => Ok(ModelKind::RoundSphere),
            "antipodal-quotient" | "quotient" => Ok(ModelKind::AntipodalQuotient),
            _ => Err(LabError::InvalidParameter(format!("unknown model kind '{s}'"))),
        }
    }
}

/// A model geometry of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub kind: ModelKind,
    pub n: usize,
}

/// A point stored as a unit vector in R^{n+1}. On the quotient the stored
/// representative has its first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOnM {
    pub coords: Vec<f64>,
}

impl PointOnM {
    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

pub fn make_model(kind: ModelKind, n: usize) -> Result<ManifoldModel> {
    if n < 3 {
        return Err(LabError::InvalidParameter(format!(
            "model dimension must be at least 3, got {n}"
        )));
    }
    Ok(ManifoldModel { kind, n })
}

impl ManifoldModel {
    /// Checks the pairing with an operator of order `k`.
    pub fn check_order(&self, k: usize) -> Result<()> {
        if k == 0 || self.n < 2 * k + 1 {
            return Err(LabError::DimensionConstraint { n: self.n, k });
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn is_quotient(&self) -> bool {
        self.kind == ModelKind::AntipodalQuotient
    }

    /// Builds a point from ambient coordinates, which must have unit norm within 1e-12.
    pub fn point(&self, coords: &[f64]) -> Result<PointOnM> {
        if coords.len() != self.n + 1 {
            return Err(LabError::InvalidParameter(format!(
                "expected {} ambient coordinates, got {}",
                self.n + 1,
                coords.len()
            )));
        }
        let nrm = norm(coords);
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidParameter(format!(
                "point is not on the unit sphere (norm {nrm})"
            )));
        }
        Ok(self.canonical(coords.iter().map(|c| c / nrm).collect()))
    }

    /// Normalizes an arbitrary nonzero vector to a point.
    pub fn point_normalized(&self, coords: &[f64]) -> Result<PointOnM> {
        let nrm = norm(coords);
        if coords.len() != self.n + 1 || !(nrm > 0.0) || !nrm.is_finite() {
            return Err(LabError::InvalidParameter("cannot normalize vector".into()));
        }
        Ok(self.canonical(coords.iter().map(|c| c / nrm).collect()))
    }

    /// The north pole e_0 and, more generally, the i-th standard basis point.
    pub fn basis_point(&self, i: usize) -> PointOnM {
        let mut c = vec![0.0; self.n + 1];
        c[i] = 1.0;
        PointOnM { coords: c }
    }

    fn canonical(&self, mut c: Vec<f64>) -> PointOnM {
        if self.is_quotient() {
            if let Some(first) = c.iter().find(|v| v.abs() > 1e-15) {
                if *first < 0.0 {
                    c.iter_mut().for_each(|v| *v = -*v);
                }
            }
        }
        PointOnM { coords: c }
    }

    /// All lifts of a point to the covering sphere.
    pub fn lifts(&self, x: &PointOnM) -> Vec<Vec<f64>> {
        match self.kind {
            ModelKind::RoundSphere => vec![x.coords.clone()],
            ModelKind::AntipodalQuotient => {
                vec![x.coords.clone(), x.coords.iter().map(|v| -v).collect()]
            }
        }
    }

    /// Great-circle distance (minimum over lifts on the quotient).
    pub fn geodesic_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = sphere_distance(x, y);
        match self.kind {
            ModelKind::RoundSphere => d,
            ModelKind::AntipodalQuotient => d.min(std::f64::consts::PI - d),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Squared chordal distance |x - y|^2 in the ambient space.
pub(crate) fn chord2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Great-circle distance on the unit sphere, accurate for nearby and antipodal points.
pub fn sphere_distance(x: &[f64], y: &[f64]) -> f64 {
    let dm = chord2(x, y).sqrt();
    let dp = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    2.0 * dm.atan2(dp)
}

/// Volume of the unit m-sphere, 2π^{(m+1)/2}/Γ((m+1)/2).
pub fn omega(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * omega(m - 2),
    }
}

/// Orthonormal vectors spanning the components of `dirs` orthogonal to `pole`
/// (and to each other), in order. Directions that are numerically dependent are skipped.
pub fn gram_schmidt(pole: &[f64], dirs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for d in dirs {
        let mut v = d.clone();
        for _ in 0..2 {
            let c = dot(&v, pole);
            v.iter_mut().zip(pole).for_each(|(a, p)| *a -= c * p);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(a, p)| *a -= c * p);
            }
        }
        let nv = norm(&v);
        if nv > tol {
            v.iter_mut().for_each(|a| *a /= nv);
            basis.push(v);
        }
    }
    basis
}

/// Completes `partial` (orthonormal, orthogonal to `pole`) to a full tangent frame at `pole`.
pub fn complete_frame(pole: &[f64], partial: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let dim = pole.len();
    let mut dirs = partial.clone();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e);
    }
    let mut frame = gram_schmidt(pole, &dirs, 1e-8);
    frame.truncate(dim - 1);
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn models_validate_dimension() {
        assert!(make_model(ModelKind::RoundSphere, 5).is_ok());
        assert!(make_model(ModelKind::RoundSphere, 2).is_err());
        let m = make_model(ModelKind::RoundSphere, 3).unwrap();
        assert!(m.check_order(1).is_ok());
        assert!(matches!(m.check_order(2), Err(LabError::DimensionConstraint { .. })));
    }

    #[test]
    fn quotient_points_have_two_lifts_and_canonical_sign() {
        let m = make_model(ModelKind::AntipodalQuotient, 5).unwrap();
        let p = m.point(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.coords[0], 1.0);
        assert_eq!(m.lifts(&p).len(), 2);
    }

    #[test]
    fn distances() {
        let s = make_model(ModelKind::RoundSphere, 5).unwrap();
        let q = make_model(ModelKind::AntipodalQuotient, 5).unwrap();
        let a = s.basis_point(0).coords;
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_eq!(s.geodesic_distance(&a, &a), 0.0);
        assert!((s.geodesic_distance(&a, &b) - PI).abs() < 1e-15);
        assert!(q.geodesic_distance(&a, &b).abs() < 1e-15);
    }

    #[test]
    fn sphere_volumes() {
        assert!((omega(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((omega(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((omega(5) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn frames_are_orthonormal() {
        let pole = vec![0.6, 0.0, 0.8, 0.0];
        let f = complete_frame(&pole, vec![]);
        assert_eq!(f.len(), 3);
        for (i, a) in f.iter().enumerate() {
            assert!(dot(a, &pole).abs() < 1e-14);
            for (j, b) in f.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - e).abs() < 1e-14);
            }
        }
    }
}
