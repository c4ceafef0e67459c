//! Lorentzian linear algebra and the hyperboloid model of `H^m(c)`.
//!
//! `R^{1,m}` carries the inner product `<X,Y> = -x0 y0 + sum_k x_k y_k`.
//! For `c < 0` the upper sheet of `<X,X> = 1/c`, `x0 >= 1/sqrt(-c)` is the
//! hyperbolic space of curvature `c`; every geometry in this crate lives on
//! that sheet. All operations are pure and copy-friendly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A vector in Minkowski space `R^{1,m}`; component 0 is the time component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzVector {
    components: Vec<f64>,
}

impl LorentzVector {
    /// Builds from `(time, spatial...)` laid out as a single slice.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 3 {
            return Err(Error::DimensionMismatch(format!(
                "need at least 1+2 components, got {}",
                components.len()
            )));
        }
        if !components.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("non-finite component".into()));
        }
        Ok(Self { components })
    }

    pub fn from_time_spatial(time: f64, spatial: &[f64]) -> Result<Self> {
        let mut c = Vec::with_capacity(spatial.len() + 1);
        c.push(time);
        c.extend_from_slice(spatial);
        Self::new(c)
    }

    pub fn zero(spatial_dim: usize) -> Self {
        Self {
            components: vec![0.0; spatial_dim + 1],
        }
    }

    pub fn time_component(&self) -> f64 {
        self.components[0]
    }

    pub fn spatial_components(&self) -> &[f64] {
        &self.components[1..]
    }

    /// Spatial dimension `m` of the ambient `R^{1,m}`.
    pub fn spatial_dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.components.len() != other.components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.components.len(),
                other.components.len()
            )));
        }
        Ok(())
    }
}

/// `<X,Y> = -x0 y0 + sum_{k>=1} x_k y_k`.
pub fn lorentz_dot(x: &LorentzVector, y: &LorentzVector) -> Result<f64> {
    x.check_dim(y)?;
    let xs = x.as_slice();
    let ys = y.as_slice();
    let mut s = -xs[0] * ys[0];
    for k in 1..xs.len() {
        s += xs[k] * ys[k];
    }
    Ok(s)
}

/// A point of `H^m(c)` in the hyperboloid model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint {
    vector: LorentzVector,
    curvature_c: f64,
}

/// Relative tolerance on the constraint `<X,X> = 1/c` at construction.
pub const CONSTRAINT_REL_TOL: f64 = 1e-12;

impl HyperboloidPoint {
    /// Wraps a vector already satisfying the constraint to `1e-12` relative.
    pub fn new(vector: LorentzVector, c: f64) -> Result<Self> {
        if !(c < 0.0) {
            return Err(Error::Config(format!("curvature must be negative, got {c}")));
        }
        let norm = lorentz_dot(&vector, &vector)?;
        let target = 1.0 / c;
        if (norm - target).abs() > CONSTRAINT_REL_TOL * target.abs() {
            return Err(Error::Domain(format!(
                "constraint residual {:.3e} exceeds tolerance",
                norm - target
            )));
        }
        if vector.time_component() < (1.0 / (-c).sqrt()) * (1.0 - 1e-12) {
            return Err(Error::Domain("point lies on the lower sheet".into()));
        }
        Ok(Self {
            vector,
            curvature_c: c,
        })
    }

    pub fn vector(&self) -> &LorentzVector {
        &self.vector
    }

    pub fn curvature(&self) -> f64 {
        self.curvature_c
    }

    /// Base point `(1/sqrt(-c), 0, ..., 0)`.
    pub fn base(spatial_dim: usize, c: f64) -> Result<Self> {
        if !(c < 0.0) {
            return Err(Error::Config(format!("curvature must be negative, got {c}")));
        }
        let mut comps = vec![0.0; spatial_dim + 1];
        comps[0] = 1.0 / (-c).sqrt();
        Self::new(LorentzVector::new(comps)?, c)
    }
}

/// Radially rescales a timelike vector onto the hyperboloid `<X,X> = 1/c`.
///
/// Idempotent on points already on the sheet; rejects spacelike or null
/// input and past-directed input (a too-large flow step).
pub fn project_to_hyperboloid(x: &LorentzVector, c: f64) -> Result<HyperboloidPoint> {
    if !(c < 0.0) {
        return Err(Error::Config(format!("curvature must be negative, got {c}")));
    }
    let norm = lorentz_dot(x, x)?;
    if !(norm < 0.0) || !(x.time_component() > 0.0) {
        return Err(Error::LeftHyperboloidChart(format!(
            "<X,X> = {norm:.6e}, x0 = {:.6e}",
            x.time_component()
        )));
    }
    // <X,X> < 0 and c < 0, so c <X,X> > 0.
    let scale = 1.0 / (c * norm).sqrt();
    HyperboloidPoint::new(x.scale(scale), c)
}

/// Orthogonal projection onto the tangent space at `x`: `v - c <v,X> X`.
pub fn project_tangent(x: &HyperboloidPoint, v: &LorentzVector) -> Result<LorentzVector> {
    let coeff = x.curvature_c * lorentz_dot(v, x.vector())?;
    v.sub(&x.vector().scale(coeff))
}

/// Geodesic distance `(1/sqrt(-c)) arccosh(max(1, c <X,Y>))`.
///
/// Clamping the arccosh argument at 1 absorbs round-off at coincident points.
pub fn geodesic_distance(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    if x.curvature_c != y.curvature_c {
        return Err(Error::Config(format!(
            "curvature mismatch: {} vs {}",
            x.curvature_c, y.curvature_c
        )));
    }
    let arg = (x.curvature_c * lorentz_dot(x.vector(), y.vector())?).max(1.0);
    Ok(arg.acosh() / (-x.curvature_c).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(c: &[f64]) -> LorentzVector {
        LorentzVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn dot_anchors() {
        assert_eq!(lorentz_dot(&lv(&[1.0, 0.0, 0.0]), &lv(&[1.0, 0.0, 0.0])).unwrap(), -1.0);
        assert_eq!(lorentz_dot(&lv(&[2.0, 1.0, 0.0]), &lv(&[3.0, 2.0, 0.0])).unwrap(), -4.0);
        // base point of H^m(-1) satisfies the hyperboloid constraint
        let base = lv(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(lorentz_dot(&base, &base).unwrap(), -1.0);
    }

    #[test]
    fn dot_dimension_mismatch() {
        let err = lorentz_dot(&lv(&[1.0, 0.0, 0.0]), &lv(&[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn projection_anchors() {
        let p = project_to_hyperboloid(&lv(&[2.0, 0.0, 0.0, 0.0]), -1.0).unwrap();
        assert_eq!(p.vector().as_slice(), &[1.0, 0.0, 0.0, 0.0]);

        // idempotence on a point already on the sheet
        let q = project_to_hyperboloid(p.vector(), -1.0).unwrap();
        let d: f64 = q
            .vector()
            .as_slice()
            .iter()
            .zip(p.vector().as_slice())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(d < 1e-15);

        // slightly perturbed point renormalizes to residual < 1e-15
        let x = lv(&[1.0f64.cosh() + 1e-3, 1.0f64.sinh(), 0.0]);
        let p = project_to_hyperboloid(&x, -1.0).unwrap();
        let res = lorentz_dot(p.vector(), p.vector()).unwrap() + 1.0;
        assert!(res.abs() < 1e-15, "residual {res:.3e}");
    }

    #[test]
    fn projection_rejects_spacelike() {
        let err = project_to_hyperboloid(&lv(&[0.1, 2.0, 0.0]), -1.0);
        assert!(matches!(err, Err(Error::LeftHyperboloidChart(_))));
    }

    #[test]
    fn tangent_anchors() {
        let x = HyperboloidPoint::base(2, -1.0).unwrap();
        // v = X projects to zero
        let z = project_tangent(&x, x.vector()).unwrap();
        assert!(z.as_slice().iter().all(|v| v.abs() < 1e-15));
        // worked example: c=-1, X=(1,0,0), v=(1,1,0) -> (0,1,0)
        let w = project_tangent(&x, &lv(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 1.0, 0.0]);
        // already-tangent vector is unchanged
        let t = lv(&[0.0, 0.3, -0.7]);
        let w = project_tangent(&x, &t).unwrap();
        for (a, b) in w.as_slice().iter().zip(t.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_anchors() {
        let x = HyperboloidPoint::base(2, -1.0).unwrap();
        assert_eq!(geodesic_distance(&x, &x).unwrap(), 0.0);
        let y = HyperboloidPoint::new(lv(&[1.0f64.cosh(), 1.0f64.sinh(), 0.0]), -1.0).unwrap();
        assert!((geodesic_distance(&x, &y).unwrap() - 1.0).abs() < 1e-14);

        // distance scales as 1/sqrt(-c): same pair on the c = -4 hyperboloid
        let x4 = HyperboloidPoint::new(lv(&[0.5, 0.0, 0.0]), -4.0).unwrap();
        let y4 = HyperboloidPoint::new(
            lv(&[1.0f64.cosh() / 2.0, 1.0f64.sinh() / 2.0, 0.0]),
            -4.0,
        )
        .unwrap();
        assert!((geodesic_distance(&x4, &y4).unwrap() - 0.5).abs() < 1e-14);
    }

    /// Random point on the c = -1 hyperboloid in R^{1,3}.
    fn arb_point() -> impl Strategy<Value = HyperboloidPoint> {
        proptest::collection::vec(-3.0f64..3.0, 3).prop_map(|sp| {
            let t = (1.0 + sp.iter().map(|x| x * x).sum::<f64>()).sqrt();
            HyperboloidPoint::new(LorentzVector::from_time_spatial(t, &sp).unwrap(), -1.0)
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn dot_is_bilinear_symmetric(
            a in proptest::collection::vec(-5.0f64..5.0, 4),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
            c in proptest::collection::vec(-5.0f64..5.0, 4),
            s in -3.0f64..3.0,
        ) {
            let (a, b, c) = (lv(&a), lv(&b), lv(&c));
            let ab = lorentz_dot(&a, &b).unwrap();
            let ba = lorentz_dot(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
            let lin = lorentz_dot(&a.scale(s).add(&c).unwrap(), &b).unwrap();
            let sum = s * ab + lorentz_dot(&c, &b).unwrap();
            prop_assert!((lin - sum).abs() <= 1e-10 * (1.0 + sum.abs()));
        }

        #[test]
        fn tangent_projector_law(x in arb_point(), v in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let v = lv(&v);
            let xmag = x.vector().as_slice().iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let vmag = v.as_slice().iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let tol = 1e-12 * (1.0 + vmag * xmag * xmag);
            let p1 = project_tangent(&x, &v).unwrap();
            let p2 = project_tangent(&x, &p1).unwrap();
            for (a, b) in p2.as_slice().iter().zip(p1.as_slice()) {
                prop_assert!((a - b).abs() < tol);
            }
            // result is tangent: <proj, X> = 0
            let t = lorentz_dot(&p1, x.vector()).unwrap();
            prop_assert!(t.abs() < tol);
        }

        #[test]
        fn triangle_inequality(x in arb_point(), y in arb_point(), z in arb_point()) {
            let dxz = geodesic_distance(&x, &z).unwrap();
            let dxy = geodesic_distance(&x, &y).unwrap();
            let dyz = geodesic_distance(&y, &z).unwrap();
            prop_assert!(dxy + dyz - dxz >= -1e-10);
        }
    }
}
