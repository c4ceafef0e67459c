//! Brute-force differential-geometry oracles, independent of the library's
//! curvature pipelines: second fundamental forms are computed by finite
//! differences of explicit embeddings and compared against the closed-form
//! and node-based values the engines use.

use hypermcf_core::flow::axisym::{make_initial_profile, ProfileKind};
use hypermcf_core::minkowski::{lorentz_dot, LorentzVector};

fn lv(v: Vec<f64>) -> LorentzVector {
    LorentzVector::new(v).unwrap()
}

/// Tube embedding `X(tau, w) = cosh(ks) gamma(tau) + (sinh(ks)/k) (0, 0, w)`
/// in `R^{1, n+2}`, with `gamma` the unit-speed axis geodesic.
fn tube_point(n: usize, k: f64, s: f64, tau: f64, omega: &[f64]) -> LorentzVector {
    assert_eq!(omega.len(), n);
    let mut v = vec![0.0; n + 3];
    v[0] = (k * s).cosh() * (k * tau).cosh() / k;
    v[1] = (k * s).cosh() * (k * tau).sinh() / k;
    for (i, w) in omega.iter().enumerate() {
        v[2 + i] = (k * s).sinh() / k * w;
    }
    lv(v)
}

/// Outward unit normal of the tube at `(tau, omega)`: the radial derivative.
fn tube_normal(n: usize, k: f64, s: f64, tau: f64, omega: &[f64]) -> LorentzVector {
    let mut v = vec![0.0; n + 3];
    v[0] = (k * s).sinh() * (k * tau).cosh();
    v[1] = (k * s).sinh() * (k * tau).sinh();
    for (i, w) in omega.iter().enumerate() {
        v[2 + i] = (k * s).cosh() * w;
    }
    lv(v)
}

/// Normal curvature along a coordinate curve by central second differences.
fn normal_curvature(
    at: &dyn Fn(f64) -> LorentzVector,
    nu: &LorentzVector,
    eps: f64,
) -> f64 {
    let plus = at(eps);
    let center = at(0.0);
    let minus = at(-eps);
    let second = plus
        .add(&minus)
        .unwrap()
        .add(&center.scale(-2.0))
        .unwrap()
        .scale(1.0 / (eps * eps));
    let tangent = plus.sub(&minus).unwrap().scale(1.0 / (2.0 * eps));
    lorentz_dot(&second, nu).unwrap() / lorentz_dot(&tangent, &tangent).unwrap()
}

#[test]
fn tube_embedding_matches_principal_curvatures() {
    for (n, c) in [(6usize, -1.0f64), (7, -1.0), (8, -4.0)] {
        let k = (-c).sqrt();
        let s = 0.5f64.atanh() / k;
        let tau = 0.3;
        let mut omega = vec![0.0; n];
        omega[0] = 1.0;

        let x = tube_point(n, k, s, tau, &omega);
        // the parametrization satisfies the hyperboloid constraint exactly
        let res = lorentz_dot(&x, &x).unwrap() - 1.0 / c;
        assert!(res.abs() < 1e-13, "constraint residual {res:.3e}");

        let nu = tube_normal(n, k, s, tau, &omega);
        assert!((lorentz_dot(&nu, &nu).unwrap() - 1.0).abs() < 1e-12);
        assert!(lorentz_dot(&nu, &x).unwrap().abs() < 1e-12);

        let lambda = k / (k * s).tanh();
        let mu = k * (k * s).tanh();

        // axial direction: curvature mu (multiplicity 1)
        let axial = |e: f64| tube_point(n, k, s, tau + e, &omega);
        // orbit direction: a great circle of S^{n-1}, curvature lambda
        let orbit = |e: f64| {
            let mut w = vec![0.0; n];
            w[0] = e.cos();
            w[1] = e.sin();
            tube_point(n, k, s, tau, &w)
        };

        let check = |curve: &dyn Fn(f64) -> LorentzVector, expect: f64, label: &str| {
            let coarse = normal_curvature(curve, &nu, 1e-3).abs();
            let fine = normal_curvature(curve, &nu, 5e-4).abs();
            let (e1, e2) = ((coarse - expect).abs(), (fine - expect).abs());
            assert!(
                e2 < 1e-5 * expect,
                "{label} n={n} c={c}: fd {fine} vs {expect}"
            );
            // O(step^2): quartering the error when halving the step
            assert!(
                e1 / e2 > 3.0,
                "{label} n={n} c={c}: fd convergence ratio {}",
                e1 / e2
            );
        };
        check(&axial, mu, "axial");
        check(&orbit, lambda, "orbit");

        // both normal curvatures carry the same sign (the tube bends toward
        // its axis in every direction)
        let sa = normal_curvature(&axial, &nu, 1e-3).signum();
        let so = normal_curvature(&orbit, &nu, 1e-3).signum();
        assert_eq!(sa, so);
    }
}

/// The node-based curvature pipeline against analytic-embedding finite
/// differences for a genuinely inhomogeneous profile (the ellipsoid graph
/// `r(theta) = a sin^2 + b cos^2`).
#[test]
fn ellipsoid_profile_curvatures_match_embedding_oracle() {
    let (n, c) = (6u32, -1.0f64);
    let (a, b) = (1.0, 1.1);
    let nodes = 801usize;
    let profile = make_initial_profile(ProfileKind::Ellipsoid { a, b }, n, c, nodes, true).unwrap();
    let curv = profile.principal_curvatures().unwrap();
    let points = profile.points();

    let r_of = |theta: f64| a * theta.sin().powi(2) + b * theta.cos().powi(2);
    let embed = |theta: f64| {
        let r = r_of(theta);
        lv(vec![r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()])
    };

    let mut checked = 0;
    for idx in (40..nodes - 40).step_by(72) {
        let p = points[idx].as_slice().to_vec();
        // invert the polar angle of this node from its components
        let theta = p[2].atan2(p[1]);
        let eps = 1e-5;

        // unit tangent and profile-plane normal of the analytic curve
        let tang = embed(theta + eps)
            .sub(&embed(theta - eps))
            .unwrap()
            .scale(1.0 / (2.0 * eps));
        let x = embed(theta);
        let cross = {
            let t = tang.as_slice();
            let xv = x.as_slice();
            lv(vec![
                -(xv[1] * t[2] - xv[2] * t[1]),
                xv[2] * t[0] - xv[0] * t[2],
                xv[0] * t[1] - xv[1] * t[0],
            ])
        };
        let nu = cross.scale(1.0 / lorentz_dot(&cross, &cross).unwrap().sqrt());

        let second = embed(theta + eps)
            .add(&embed(theta - eps))
            .unwrap()
            .add(&x.scale(-2.0))
            .unwrap()
            .scale(1.0 / (eps * eps));
        let kappa_p = lorentz_dot(&second, &nu).unwrap() / lorentz_dot(&tang, &tang).unwrap();
        let kappa_o = -nu.as_slice()[2] / x.as_slice()[2];

        let got = curv[idx - 1];
        let ds = profile.total_arclength() / (nodes - 1) as f64;
        let tol = 50.0 * ds * ds;
        assert!(
            (got.kappa_profile.abs() - kappa_p.abs()).abs() < tol,
            "node {idx}: kappa_p {} vs oracle {kappa_p}",
            got.kappa_profile
        );
        assert!(
            (got.kappa_orbit.abs() - kappa_o.abs()).abs() < tol,
            "node {idx}: kappa_o {} vs oracle {kappa_o}",
            got.kappa_orbit
        );
        checked += 1;
    }
    assert!(checked >= 8, "only {checked} nodes checked");
}
