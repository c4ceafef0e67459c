//! Random second-fundamental-form sources.
//!
//! Gaussian entries symmetrized give a rotation-invariant law for the plain
//! sampler; the pinched sampler places `|H|^2` log-uniformly above the mean
//! curvature threshold and scales a random traceless direction to a uniform
//! fraction of the pinching cap, so every sample sits strictly inside the
//! pinched set by construction.

use super::SecondFundamentalForm;
use crate::error::{Error, Result};
use crate::pinching::PinchingProfile;
use crate::rng::{self, standard_normal};
use rand::Rng;

/// Gaussian symmetric tensor: i.i.d. `N(0,1)` entries, symmetrized.
pub fn random_sff<R: Rng>(n: usize, q: usize, rng: &mut R) -> SecondFundamentalForm {
    let mut blocks = Vec::with_capacity(q);
    for _ in 0..q {
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = standard_normal(rng);
                b[i * n + j] = v;
                b[j * n + i] = v;
            }
        }
        blocks.push(b);
    }
    SecondFundamentalForm::from_blocks(n, blocks).expect("construction is symmetric")
}

/// Haar-ish random orthogonal matrix via Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= dot * y;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            cols.push(v);
        }
        if ok {
            let mut m = vec![0.0; dim * dim];
            for (j, c) in cols.iter().enumerate() {
                for i in 0..dim {
                    m[i * dim + j] = c[i];
                }
            }
            return m;
        }
    }
}

/// Applies a tangent rotation `Q` (n x n) and a normal rotation `U` (q x q):
/// `h^b -> Q^T (sum_a U_{ba} h^a) Q`.
pub fn rotate_frames(
    h: &SecondFundamentalForm,
    tangent_rot: &[f64],
    normal_rot: &[f64],
) -> Result<SecondFundamentalForm> {
    let n = h.n();
    let q = h.q();
    if tangent_rot.len() != n * n || normal_rot.len() != q * q {
        return Err(Error::DimensionMismatch("rotation size".into()));
    }
    let mut blocks = Vec::with_capacity(q);
    for b in 0..q {
        let mut mixed = vec![0.0; n * n];
        for a in 0..q {
            let w = normal_rot[b * q + a];
            if w == 0.0 {
                continue;
            }
            for (o, x) in mixed.iter_mut().zip(h.block(a)) {
                *o += w * x;
            }
        }
        let mut rotated = crate::linalg::congruence(&mixed, tangent_rot, n);
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (rotated[i * n + j] + rotated[j * n + i]);
                rotated[i * n + j] = m;
                rotated[j * n + i] = m;
            }
        }
        blocks.push(rotated);
    }
    SecondFundamentalForm::from_blocks(n, blocks)
}

/// Symmetric traceless Gaussian blocks, returned with their total norm^2.
fn random_traceless_blocks<R: Rng>(n: usize, q: usize, rng: &mut R) -> (Vec<Vec<f64>>, f64) {
    let mut blocks = Vec::with_capacity(q);
    let mut norm_sq = 0.0;
    for _ in 0..q {
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = standard_normal(rng);
                b[i * n + j] = v;
                b[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| b[i * n + i]).sum();
        for i in 0..n {
            b[i * n + i] -= trace / n as f64;
        }
        norm_sq += b.iter().map(|x| x * x).sum::<f64>();
        blocks.push(b);
    }
    (blocks, norm_sq)
}

const PINCHED_REJECT_LIMIT: u32 = 10_000;

/// Draws a tensor strictly inside the pinched set
/// `|h-ring|^2 < alpha_ring(|H|^2) - eps * omega(|H|^2)`.
///
/// `|H|^2` is log-uniform in `(-n^2 c (1 + 1e-3), -1e4 n^2 c)`; draws where
/// the cap is non-positive are rejected, and an empty cap over the whole
/// range is a sampler error.
pub fn random_pinched<R: Rng>(
    n: usize,
    q: usize,
    c: f64,
    eps: f64,
    rng: &mut R,
) -> Result<SecondFundamentalForm> {
    if n < 6 {
        return Err(Error::Config(format!("pinched sampler needs n >= 6, got {n}")));
    }
    if q < 1 {
        return Err(Error::Config("need q >= 1".into()));
    }
    if eps < 0.0 {
        return Err(Error::Config(format!("eps must be >= 0, got {eps}")));
    }
    let profile = PinchingProfile::new(n as u32, c)?;
    let y_lo = -(n as f64) * (n as f64) * c * (1.0 + 1e-3);
    let y_hi = -1e4 * (n as f64) * (n as f64) * c;
    let (ln_lo, ln_hi) = (y_lo.ln(), y_hi.ln());

    // The cap alpha_ring - eps*omega is largest toward the top of the range;
    // if it is non-positive there the pinched set is empty for this eps.
    let cap_hi = profile.alpha_ring(y_hi)? - eps * profile.omega(y_hi);

    let mut chosen = None;
    for _ in 0..PINCHED_REJECT_LIMIT {
        let y = (ln_lo + (ln_hi - ln_lo) * rng.random::<f64>()).exp();
        let cap = profile.alpha_ring(y)? - eps * profile.omega(y);
        if cap > 0.0 {
            chosen = Some((y, cap));
            break;
        }
        if cap_hi <= 0.0 {
            break;
        }
    }
    let (y, cap) = chosen.ok_or_else(|| {
        Error::Sampler(format!(
            "pinched set empty: alpha_ring - eps*omega <= 0 over (|H|^2 in {y_lo:.3e}..{y_hi:.3e}) at eps = {eps}"
        ))
    })?;

    let u: f64 = rng.random::<f64>();
    let target_ho_sq = u * cap;
    let (mut blocks, dir_norm_sq) = loop {
        let (b, s) = random_traceless_blocks(n, q, rng);
        if s > 1e-12 {
            break (b, s);
        }
    };
    let scale = (target_ho_sq / dir_norm_sq).sqrt();
    for b in blocks.iter_mut() {
        for x in b.iter_mut() {
            *x *= scale;
        }
    }
    let mean_over_n = y.sqrt() / n as f64;
    for i in 0..n {
        blocks[0][i * n + i] += mean_over_n;
    }
    SecondFundamentalForm::from_blocks(n, blocks)
}

/// Deterministic-in-seed wrapper around [`random_pinched`].
pub fn random_pinched_seeded(
    n: usize,
    q: usize,
    c: f64,
    eps: f64,
    seed: u64,
) -> Result<SecondFundamentalForm> {
    random_pinched(n, q, c, eps, &mut rng::seeded(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut r = rng::seeded(2);
        for dim in [2usize, 3, 6] {
            let m = random_orthogonal(dim, &mut r);
            for i in 0..dim {
                for j in 0..dim {
                    let dot: f64 = (0..dim).map(|k| m[k * dim + i] * m[k * dim + j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pinched_sampler_is_deterministic() {
        let a = random_pinched_seeded(6, 3, -1.0, 0.01, 99).unwrap();
        let b = random_pinched_seeded(6, 3, -1.0, 0.01, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pinched_sampler_margin_positive() {
        let profile = PinchingProfile::new(6, -1.0).unwrap();
        for seed in 0..1000u64 {
            let h = random_pinched_seeded(6, 2, -1.0, 0.01, seed).unwrap();
            let margin = profile.pinch_margin(&h, 0.01).unwrap();
            assert!(margin > 0.0, "seed {seed} margin {margin}");
            assert!(h.mean_norm_sq() > 36.0);
        }
    }

    #[test]
    fn pinched_sampler_rejects_infeasible_eps() {
        // sup alpha_ring/omega = 1/(n(n-1)) = 1/30 for n = 6
        let err = random_pinched_seeded(6, 1, -1.0, 0.2, 1);
        assert!(matches!(err, Err(Error::Sampler(_))), "{err:?}");
    }
}
