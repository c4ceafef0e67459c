//! Pointwise inequality suites for the second fundamental form.
//!
//! Margins are reported signed as `bound - value` (never clamped), so a
//! vanishing margin exhibits sharpness. Tolerance scales follow the degree
//! of each check: quartic checks use `max(1, |h|^2)^2`.

use super::{pq_split, r1, r2, special_frame, w, SecondFundamentalForm};
use crate::error::{Error, Result};
use crate::linalg::{frob_inner, mat_mul};
use crate::pinching::PinchingProfile;
use serde::{Deserialize, Serialize};

/// Signed margins for the Cauchy-Schwarz splittings of `R1` and the two
/// `R1`/`R2` comparison statements, plus the exact-identity residuals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplittingMargins {
    /// `P1 Q1 - sum_{a>1} (sum_i lr_i b^a_{ii})^2 >= 0`
    pub diag_cs: f64,
    /// `2 P1 Q2 - sum_{a>1, i!=j} ((lr_i - lr_j) b^a_{ij})^2 >= 0`
    pub offdiag_cs: f64,
    /// `(3/2) P2^2 - (gram + commutator sums over a,b > 1) >= 0`
    pub block_pair: f64,
    /// `rhs - (R1 - R2/n) >= 0` with the quartic right-hand side
    pub r1_vs_r2: f64,
    /// identity residual `R2 - (|ho|^2 |H|^2 + |H|^4/n - P2 |H|^2)`
    pub r2_identity_residual: f64,
    /// identity residual `R2 - |H|^2 (P1 + |H|^2/n)` in the special frame
    pub r2_special_frame_residual: f64,
    /// `max(1, |h|^2)^2`
    pub scale: f64,
}

/// Evaluates every pointwise statement of the splitting section on one tensor.
pub fn splitting_suite(h: &SecondFundamentalForm) -> Result<SplittingMargins> {
    let n = h.n();
    let nf = n as f64;
    let d = special_frame(h)?;
    let (p1, q1, q2) = pq_split(&d);
    let p2 = q1 + q2;
    let lr = d.lambda_ring();
    let mean_sq = d.mean_norm() * d.mean_norm();
    let ho_sq = h.traceless_norm_sq();

    let mut diag_sum = 0.0;
    let mut offdiag_sum = 0.0;
    for b in d.offdiag_blocks() {
        let mut s = 0.0;
        for i in 0..n {
            s += lr[i] * b[i * n + i];
        }
        diag_sum += s * s;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = (lr[i] - lr[j]) * b[i * n + j];
                    offdiag_sum += v * v;
                }
            }
        }
    }

    let blocks = d.offdiag_blocks();
    let mut pair_sum = 0.0;
    let mut ab = vec![0.0; n * n];
    let mut ba = vec![0.0; n * n];
    for (i, a) in blocks.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate() {
            let g = frob_inner(a, b);
            pair_sum += g * g;
            if i < j {
                mat_mul(a, b, n, &mut ab);
                mat_mul(b, a, n, &mut ba);
                let c2: f64 = ab.iter().zip(&ba).map(|(x, y)| (x - y) * (x - y)).sum();
                pair_sum += 2.0 * c2;
            }
        }
    }

    let r1v = r1(h);
    let r2v = r2(h);
    let rhs = ho_sq * ho_sq + ho_sq * mean_sq / nf + 2.0 * p2 * ho_sq - p2 * mean_sq / nf;

    Ok(SplittingMargins {
        diag_cs: p1 * q1 - diag_sum,
        offdiag_cs: 2.0 * p1 * q2 - offdiag_sum,
        block_pair: 1.5 * p2 * p2 - pair_sum,
        r1_vs_r2: rhs - (r1v - r2v / nf),
        r2_identity_residual: r2v - (ho_sq * mean_sq + mean_sq * mean_sq / nf - p2 * mean_sq),
        r2_special_frame_residual: r2v - mean_sq * (p1 + mean_sq / nf),
        scale: h.norm_sq().max(1.0).powi(2),
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CubicBound {
    /// `(n-2)/sqrt(n(n-1)) (sum a^2)^{1/2} (sum b^2) - |sum a_i b_i^2|`
    pub margin: f64,
    /// set when the bound is attained: a = 0, b = 0, or >= n-1 equal pairs
    pub equality: bool,
    pub scale: f64,
}

/// Cubic trace-free estimate: for `sum a_i = sum b_i = 0`,
/// `|sum a_i b_i^2| <= (n-2)/sqrt(n(n-1)) (sum a_i^2)^{1/2} (sum b_i^2)`.
pub fn cubic_bound(a: &[f64], b: &[f64]) -> Result<CubicBound> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return Err(Error::DimensionMismatch(format!("lengths {} vs {}", n, b.len())));
    }
    let sa: f64 = a.iter().map(|x| x * x).sum();
    let sb: f64 = b.iter().map(|x| x * x).sum();
    let ta: f64 = a.iter().sum();
    let tb: f64 = b.iter().sum();
    if ta.abs() > 1e-12 * sa.sqrt().max(1.0) || tb.abs() > 1e-12 * sb.sqrt().max(1.0) {
        return Err(Error::Precondition(format!(
            "inputs must be trace-free: sums {ta:.3e}, {tb:.3e}"
        )));
    }
    let cubic: f64 = a.iter().zip(b).map(|(x, y)| x * y * y).sum();
    let nf = n as f64;
    let coeff = (nf - 2.0) / (nf * (nf - 1.0)).sqrt();
    let margin = coeff * sa.sqrt() * sb - cubic.abs();
    let scale = sa.max(sb).max(1.0).powf(1.5);

    let pair_tol = 1e-9 * (sa + sb).sqrt().max(1.0);
    let mut max_run = 0usize;
    for i in 0..n {
        let mut count = 0;
        for j in 0..n {
            if (a[i] - a[j]).abs() <= pair_tol && (b[i] - b[j]).abs() <= pair_tol {
                count += 1;
            }
        }
        max_run = max_run.max(count);
    }
    let equality = sa <= 1e-24 || sb <= 1e-24 || max_run >= n - 1;

    Ok(CubicBound {
        margin,
        equality,
        scale,
    })
}

fn require_pinched(
    profile: &PinchingProfile,
    h: &SecondFundamentalForm,
    eps: f64,
) -> Result<(f64, f64, f64)> {
    let mean_sq = h.mean_norm_sq();
    let ho_sq = h.traceless_norm_sq();
    let margin = profile.pinch_margin(h, eps)?;
    // boundary configurations (the tube equality case) are admitted
    let tol = 1e-9 * h.norm_sq().max(1.0).powi(2);
    if margin < -tol {
        return Err(Error::NotInPinchedRegime(format!(
            "pinch margin {margin:.6e} at eps = {eps}"
        )));
    }
    Ok((mean_sq, ho_sq, margin))
}

/// `W - (eps/4) |H|^2 |h-ring|^2` for a tensor in the pinched regime.
pub fn w_lower_bound_check(h: &SecondFundamentalForm, c: f64, eps: f64) -> Result<f64> {
    let profile = PinchingProfile::new(h.n() as u32, c)?;
    let (mean_sq, ho_sq, _) = require_pinched(&profile, h, eps)?;
    Ok(w(h, c) - 0.25 * eps * mean_sq * ho_sq)
}

/// Ricci margins in the pinched regime: against the algebraic lower bound
/// `(n-1)/n (nc + 2|H|^2/n - |h|^2 - (n-2)/sqrt(n(n-1)) |H| |h-ring|)` and
/// against the final bound `(n-1)/(4n) eps |H|^2`.
pub fn ricci_bound_check(h: &SecondFundamentalForm, c: f64, eps: f64) -> Result<(f64, f64)> {
    let profile = PinchingProfile::new(h.n() as u32, c)?;
    let (mean_sq, ho_sq, _) = require_pinched(&profile, h, eps)?;
    let n = h.n() as f64;
    let min_ric = super::ricci_exact(h, c)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let bound = (n - 1.0) / n
        * (n * c + 2.0 * mean_sq / n
            - h.norm_sq()
            - (n - 2.0) / (n * (n - 1.0)).sqrt() * mean_sq.sqrt() * ho_sq.sqrt());
    let final_bound = (n - 1.0) / (4.0 * n) * eps * mean_sq;
    Ok((min_ric - bound, min_ric - final_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::sampler;
    use crate::rng;

    #[test]
    fn q1_tensor_margins_are_exactly_zero() {
        let h = SecondFundamentalForm::tube(6, 2.0, 0.5).unwrap();
        let m = splitting_suite(&h).unwrap();
        assert_eq!(m.diag_cs, 0.0);
        assert_eq!(m.offdiag_cs, 0.0);
        assert_eq!(m.block_pair, 0.0);
        assert!(m.r2_identity_residual.abs() < 1e-9);
        assert!(m.r2_special_frame_residual.abs() < 1e-9);
    }

    #[test]
    fn umbilic_r1_vs_r2_margin_zero() {
        let h = SecondFundamentalForm::umbilic(6, 3, 7.0).unwrap();
        let m = splitting_suite(&h).unwrap();
        assert!(m.r1_vs_r2.abs() < 1e-10 * m.scale);
    }

    #[test]
    fn antidiagonal_pair_counts() {
        // second normal block with a single off-diagonal pair: Q2 = 2, Q1 = 0
        let n = 4;
        let mut b1 = vec![0.0; n * n];
        for i in 0..n {
            b1[i * n + i] = 1.0; // gives |H| > 0 so the frame exists
        }
        let mut b2 = vec![0.0; n * n];
        b2[1] = 1.0;
        b2[n] = 1.0;
        let h = SecondFundamentalForm::from_blocks(n, vec![b1, b2]).unwrap();
        let d = special_frame(&h).unwrap();
        let (_, q1, q2) = pq_split(&d);
        assert!(q1.abs() < 1e-12);
        assert!((q2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn splitting_margins_on_random_tensors() {
        for (n, q) in [(6usize, 1usize), (6, 2), (6, 3), (8, 1), (8, 2), (8, 3)] {
            let mut r = rng::seeded(1000 + (n * 10 + q) as u64);
            for _ in 0..500 {
                let h = sampler::random_sff(n, q, &mut r);
                let m = match splitting_suite(&h) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                let tol = 1e-9 * m.scale;
                assert!(m.diag_cs >= -tol);
                assert!(m.offdiag_cs >= -tol);
                assert!(m.block_pair >= -tol);
                assert!(m.r1_vs_r2 >= -tol);
                assert!(m.r2_identity_residual.abs() <= 1e-10 * m.scale);
                assert!(m.r2_special_frame_residual.abs() <= 1e-10 * m.scale);
            }
        }
    }

    #[test]
    fn cubic_bound_equality_cases() {
        // a = b = (1, ..., 1, -(n-1)): sharp with equality flagged
        for n in [3usize, 6, 9] {
            let mut a = vec![1.0; n];
            a[n - 1] = -((n - 1) as f64);
            let r = cubic_bound(&a, &a).unwrap();
            assert!(r.margin.abs() < 1e-10 * r.scale, "margin {}", r.margin);
            assert!(r.equality);
        }
        // b = 0
        let a = [1.0, -0.5, -0.5];
        let b = [0.0, 0.0, 0.0];
        let r = cubic_bound(&a, &b).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(r.equality);
    }

    #[test]
    fn cubic_bound_rejects_nonzero_sum() {
        let err = cubic_bound(&[1.0, 1.0, 1.0], &[1.0, -1.0, 0.0]);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn cubic_bound_random() {
        let mut r = rng::seeded(77);
        for _ in 0..2000 {
            let n = 3 + (r.next_u64() % 8) as usize;
            let mut a: Vec<f64> = (0..n).map(|_| crate::rng::standard_normal(&mut r)).collect();
            let mut b: Vec<f64> = (0..n).map(|_| crate::rng::standard_normal(&mut r)).collect();
            let (ma, mb) = (
                a.iter().sum::<f64>() / n as f64,
                b.iter().sum::<f64>() / n as f64,
            );
            a.iter_mut().for_each(|x| *x -= ma);
            b.iter_mut().for_each(|x| *x -= mb);
            let res = cubic_bound(&a, &b).unwrap();
            assert!(res.margin >= -1e-10 * res.scale);
        }
    }

    #[test]
    fn w_bound_tube_boundary_is_zero() {
        let h = SecondFundamentalForm::tube(6, 2.0, 0.5).unwrap();
        let m = w_lower_bound_check(&h, -1.0, 0.0).unwrap();
        assert!(m.abs() < 1e-10, "margin {m}");
    }

    #[test]
    fn w_bound_umbilic_is_zero() {
        let h = SecondFundamentalForm::umbilic(6, 1, 10.0).unwrap();
        let m = w_lower_bound_check(&h, -1.0, 0.01).unwrap();
        assert!(m.abs() < 1e-10);
    }

    #[test]
    fn w_bound_rejects_unpinched() {
        // far outside the pinched set: big traceless part
        let h = SecondFundamentalForm::diagonal(6, &[8.0, 8.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let err = w_lower_bound_check(&h, -1.0, 0.0);
        assert!(matches!(err, Err(Error::NotInPinchedRegime(_))), "{err:?}");
    }

    #[test]
    fn ricci_bounds_tube_boundary() {
        let h = SecondFundamentalForm::tube(6, 2.0, 0.5).unwrap();
        let (b1, b2) = ricci_bound_check(&h, -1.0, 0.0).unwrap();
        assert!(b1.abs() < 1e-10, "intermediate margin {b1}");
        assert!(b2.abs() < 1e-10, "final margin {b2}");
    }

    #[test]
    fn ricci_bounds_umbilic() {
        // |H|^2 = 2 n^2 (-c): min Ric = -(n-1) c
        let h = SecondFundamentalForm::umbilic(6, 1, (72.0f64).sqrt()).unwrap();
        let ric = super::super::ricci_exact(&h, -1.0).unwrap();
        for v in &ric {
            assert!((v - 5.0).abs() < 1e-12);
        }
        let (b1, b2) = ricci_bound_check(&h, -1.0, 0.005).unwrap();
        assert!(b1 >= -1e-12);
        assert!(b2 > 0.0);
    }

    #[test]
    fn pinched_sample_margins() {
        for (n, q) in [(6usize, 1usize), (6, 3), (8, 1), (8, 3)] {
            for seed in 0..300u64 {
                let h = sampler::random_pinched_seeded(n, q, -1.0, 0.01, seed).unwrap();
                let scale = h.norm_sq().max(1.0).powi(2);
                let wm = w_lower_bound_check(&h, -1.0, 0.01).unwrap();
                assert!(wm >= -1e-9 * scale, "n={n} q={q} seed={seed} W margin {wm}");
                let (r1m, r2m) = ricci_bound_check(&h, -1.0, 0.01).unwrap();
                assert!(r1m >= -1e-9 * scale, "ricci bound margin {r1m}");
                assert!(r2m >= -1e-9 * scale, "ricci final margin {r2m}");
            }
        }
    }

    use rand::RngCore;
}
