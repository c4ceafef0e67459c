//! Pointwise algebra of the second fundamental form.
//!
//! A tensor is stored as `q` exactly-symmetric `n x n` blocks, one per
//! orthonormal normal direction. The scalars everything downstream consumes
//! (`|h|^2`, `|H|^2`, `|h-ring|^2`, `R1`, `R2`, `W`, the `P/Q` split, exact
//! Ricci diagonals, reaction terms) are computed here; the inequality suites
//! live in [`inequalities`], the random tensor sources in [`sampler`].

pub mod inequalities;
pub mod sampler;

use crate::error::{Error, Result};
use crate::linalg::{congruence, frob_inner, jacobi_eigen, mat_mul};
use crate::pinching::PinchingProfile;
use serde::{Deserialize, Serialize};

/// Pointwise second fundamental form `h^a_{ij}` in orthonormal frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalForm {
    n: usize,
    q: usize,
    /// `q` row-major `n*n` blocks; symmetry is exact by construction.
    blocks: Vec<Vec<f64>>,
}

impl SecondFundamentalForm {
    /// Builds from explicit blocks; symmetry must hold exactly.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("tangent dimension must be >= 2, got {n}")));
        }
        if blocks.is_empty() {
            return Err(Error::Config("need at least one normal direction".into()));
        }
        for (a, b) in blocks.iter().enumerate() {
            if b.len() != n * n {
                return Err(Error::DimensionMismatch(format!(
                    "block {a} has {} entries, expected {}",
                    b.len(),
                    n * n
                )));
            }
            for i in 0..n {
                for j in 0..i {
                    if b[i * n + j] != b[j * n + i] {
                        return Err(Error::Config(format!(
                            "block {a} not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
            if !b.iter().all(|x| x.is_finite()) {
                return Err(Error::Domain(format!("block {a} has non-finite entries")));
            }
        }
        Ok(Self {
            n,
            q: blocks.len(),
            blocks,
        })
    }

    /// `q = 1` tensor with the given principal curvatures.
    pub fn diagonal(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal values for n = {n}",
                values.len()
            )));
        }
        let mut b = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            b[i * n + i] = *v;
        }
        Self::from_blocks(n, vec![b])
    }

    /// Geodesic-tube shape operator `diag(lambda, ..., lambda, mu)`.
    pub fn tube(n: usize, lambda: f64, mu: f64) -> Result<Self> {
        let mut v = vec![lambda; n];
        v[n - 1] = mu;
        Self::diagonal(n, &v)
    }

    /// Umbilic tensor `h = (|H|/n) g (x) nu_1` with `q` normal directions.
    pub fn umbilic(n: usize, q: usize, mean_norm: f64) -> Result<Self> {
        let mut blocks = vec![vec![0.0; n * n]; q.max(1)];
        for i in 0..n {
            blocks[0][i * n + i] = mean_norm / n as f64;
        }
        Self::from_blocks(n, blocks)
    }

    /// Same tensor viewed in a larger normal bundle (extra zero blocks).
    pub fn embed_in_codimension(&self, q: usize) -> Result<Self> {
        if q < self.q {
            return Err(Error::Config(format!(
                "cannot shrink codimension {} -> {q}",
                self.q
            )));
        }
        let mut blocks = self.blocks.clone();
        blocks.resize(q, vec![0.0; self.n * self.n]);
        Self::from_blocks(self.n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn block(&self, alpha: usize) -> &[f64] {
        &self.blocks[alpha]
    }

    /// `|h|^2`, the squared Frobenius norm over all blocks.
    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(|b| frob_inner(b, b)).sum()
    }

    /// Mean curvature components `H^a = sum_i h^a_{ii}`.
    pub fn mean_vector(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| (0..self.n).map(|i| b[i * self.n + i]).sum())
            .collect()
    }

    /// `|H|^2`.
    pub fn mean_norm_sq(&self) -> f64 {
        self.mean_vector().iter().map(|x| x * x).sum()
    }

    /// `|h-ring|^2 = |h|^2 - |H|^2 / n`.
    pub fn traceless_norm_sq(&self) -> f64 {
        self.norm_sq() - self.mean_norm_sq() / self.n as f64
    }
}

/// The tensor rotated into the frame with `nu_1 = H/|H|` and `h^1` diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecialFrameDecomposition {
    n: usize,
    /// Diagonal of the traceless first block, eigenvalues sorted descending.
    lambda_ring: Vec<f64>,
    /// Rotated blocks for normal directions `a >= 2` (traceless symmetric).
    offdiag_blocks: Vec<Vec<f64>>,
    mean_norm: f64,
}

impl SpecialFrameDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda_ring(&self) -> &[f64] {
        &self.lambda_ring
    }

    pub fn offdiag_blocks(&self) -> &[Vec<f64>] {
        &self.offdiag_blocks
    }

    pub fn mean_norm(&self) -> f64 {
        self.mean_norm
    }

    /// `|h-ring|^2` recomputed from the decomposition.
    pub fn traceless_norm_sq(&self) -> f64 {
        let p1: f64 = self.lambda_ring.iter().map(|x| x * x).sum();
        let rest: f64 = self.offdiag_blocks.iter().map(|b| frob_inner(b, b)).sum();
        p1 + rest
    }
}

/// Splits `|h-ring|^2` into `(P1, Q1, Q2)`:
/// `P1` from the diagonalized first block, `Q1`/`Q2` from the diagonal and
/// off-diagonal entries of the remaining blocks.
pub fn pq_split(d: &SpecialFrameDecomposition) -> (f64, f64, f64) {
    let n = d.n;
    let p1: f64 = d.lambda_ring.iter().map(|x| x * x).sum();
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for b in &d.offdiag_blocks {
        for i in 0..n {
            for j in 0..n {
                let v = b[i * n + j] * b[i * n + j];
                if i == j {
                    q1 += v;
                } else {
                    q2 += v;
                }
            }
        }
    }
    (p1, q1, q2)
}

/// Rotates normal and tangent frames so `H = |H| nu_1` and `h^1` is diagonal.
///
/// Ties between eigenvalues keep a stable order; any valid orthonormal basis
/// is acceptable since every consumer is frame-invariant.
pub fn special_frame(h: &SecondFundamentalForm) -> Result<SpecialFrameDecomposition> {
    let n = h.n;
    let q = h.q;
    let mean = h.mean_vector();
    let mean_sq: f64 = mean.iter().map(|x| x * x).sum();
    let mean_norm = mean_sq.sqrt();
    if mean_sq <= 1e-24 * h.norm_sq().max(1e-300) {
        return Err(Error::MeanCurvatureDegenerate(mean_norm));
    }

    // Orthonormal normal basis with first vector H/|H| (rows of `basis`).
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(q);
    basis.push(mean.iter().map(|x| x / mean_norm).collect());
    for e in 0..q {
        if basis.len() == q {
            break;
        }
        let mut v = vec![0.0; q];
        v[e] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    debug_assert_eq!(basis.len(), q);

    let rotate_block = |u: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for (a, w) in u.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(&h.blocks[a]) {
                *o += w * x;
            }
        }
        out
    };

    let first = rotate_block(&basis[0]);
    let (eigs, vecs) = jacobi_eigen(&first, n);
    let lambda_ring: Vec<f64> = eigs.iter().map(|l| l - mean_norm / n as f64).collect();

    let mut offdiag_blocks = Vec::with_capacity(q - 1);
    for u in basis.iter().skip(1) {
        let mut b = congruence(&rotate_block(u), &vecs, n);
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (b[i * n + j] + b[j * n + i]);
                b[i * n + j] = m;
                b[j * n + i] = m;
            }
        }
        offdiag_blocks.push(b);
    }

    Ok(SpecialFrameDecomposition {
        n,
        lambda_ring,
        offdiag_blocks,
        mean_norm,
    })
}

/// `R1 = sum_{ab} <h^a, h^b>^2 + sum_{ab} |[h^a, h^b]|^2`.
pub fn r1(h: &SecondFundamentalForm) -> f64 {
    let n = h.n;
    let mut gram = 0.0;
    let mut comm = 0.0;
    let mut ab = vec![0.0; n * n];
    let mut ba = vec![0.0; n * n];
    for a in 0..h.q {
        for b in 0..h.q {
            let g = frob_inner(&h.blocks[a], &h.blocks[b]);
            gram += g * g;
            if a < b {
                mat_mul(&h.blocks[a], &h.blocks[b], n, &mut ab);
                mat_mul(&h.blocks[b], &h.blocks[a], n, &mut ba);
                let c2: f64 = ab.iter().zip(&ba).map(|(x, y)| (x - y) * (x - y)).sum();
                // the commutator sum runs over ordered pairs (a,b) and (b,a)
                comm += 2.0 * c2;
            }
        }
    }
    gram + comm
}

/// `R2 = |sum_a H^a h^a|^2`.
pub fn r2(h: &SecondFundamentalForm) -> f64 {
    frob_inner(&mean_contraction(h), &mean_contraction(h))
}

fn mean_contraction(h: &SecondFundamentalForm) -> Vec<f64> {
    let n = h.n;
    let mean = h.mean_vector();
    let mut s = vec![0.0; n * n];
    for (a, w) in mean.iter().enumerate() {
        for (o, x) in s.iter_mut().zip(&h.blocks[a]) {
            *o += w * x;
        }
    }
    s
}

/// `W = n c |h-ring|^2 - R1 + sum H^a h^a_{ik} h^b_{ij} h^b_{jk}`.
pub fn w(h: &SecondFundamentalForm, c: f64) -> f64 {
    let n = h.n;
    let s = mean_contraction(h);
    let mut g = vec![0.0; n * n];
    let mut sq = vec![0.0; n * n];
    for b in &h.blocks {
        mat_mul(b, b, n, &mut sq);
        for (o, x) in g.iter_mut().zip(&sq) {
            *o += x;
        }
    }
    let cubic = frob_inner(&s, &g);
    n as f64 * c * h.traceless_norm_sq() - r1(h) + cubic
}

/// Zeroth-order reaction parts of the `|h|^2`, `|H|^2`, `|h-ring|^2`
/// evolution equations. Satisfies `r_ho = r_h - r_H/n` identically.
pub fn reaction_terms(h: &SecondFundamentalForm, c: f64) -> (f64, f64, f64) {
    let n = h.n as f64;
    let (r1v, r2v) = (r1(h), r2(h));
    let h_sq = h.norm_sq();
    let mean_sq = h.mean_norm_sq();
    let ho_sq = h_sq - mean_sq / n;
    let r_h = 2.0 * r1v + 4.0 * c * mean_sq - 2.0 * n * c * h_sq;
    let r_mean = 2.0 * r2v + 2.0 * n * c * mean_sq;
    let r_ho = 2.0 * r1v - 2.0 / n * r2v - 2.0 * n * c * ho_sq;
    (r_h, r_mean, r_ho)
}

/// Diagonal Ricci curvatures in the special frame, via the Gauss equation in
/// a space form: `Ric(e_i) = (n-1)c + sum_a [H^a h^a_{ii} - sum_j (h^a_{ij})^2]`.
///
/// The totally geodesic tensor has no special frame, but every frame gives
/// the constant `(n-1)c` there.
pub fn ricci_exact(h: &SecondFundamentalForm, c: f64) -> Result<Vec<f64>> {
    if h.norm_sq() == 0.0 {
        return Ok(vec![(h.n as f64 - 1.0) * c; h.n]);
    }
    let d = special_frame(h)?;
    Ok(ricci_from_frame(&d, c))
}

pub(crate) fn ricci_from_frame(d: &SpecialFrameDecomposition, c: f64) -> Vec<f64> {
    let n = d.n;
    let nf = n as f64;
    let mean = d.mean_norm;
    (0..n)
        .map(|i| {
            let diag = d.lambda_ring[i] + mean / nf;
            let mut sq_row = diag * diag;
            for b in &d.offdiag_blocks {
                for j in 0..n {
                    sq_row += b[i * n + j] * b[i * n + j];
                }
            }
            (nf - 1.0) * c + mean * diag - sq_row
        })
        .collect()
}

/// All derived scalars at a point, in one record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PinchReport {
    /// `|h|^2`
    pub h_sq: f64,
    /// `|H|^2`
    pub mean_sq: f64,
    /// `|h-ring|^2`
    pub ho_sq: f64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub r1: f64,
    pub r2: f64,
    pub w: f64,
    pub ricci_min: f64,
    pub alpha: f64,
    pub alpha_ring: f64,
    pub omega: f64,
    /// `alpha_ring - eps * omega - |h-ring|^2` at the eps supplied.
    pub eps_margin: f64,
}

/// Assembles the full scalar report for a tensor in ambient curvature `c`.
///
/// Requires `|H|^2` large enough for the pinching functions to be defined.
pub fn pinch_report(h: &SecondFundamentalForm, c: f64, eps: f64) -> Result<PinchReport> {
    let profile = PinchingProfile::new(h.n as u32, c)?;
    let d = special_frame(h)?;
    let (p1, q1, q2) = pq_split(&d);
    let h_sq = h.norm_sq();
    let mean_sq = h.mean_norm_sq();
    let ho_sq = h_sq - mean_sq / h.n as f64;
    let ricci_min = ricci_from_frame(&d, c)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let alpha = profile.alpha(mean_sq.sqrt())?;
    let alpha_ring = profile.alpha_ring(mean_sq)?;
    let omega = profile.omega(mean_sq);
    Ok(PinchReport {
        h_sq,
        mean_sq,
        ho_sq,
        p1,
        p2: q1 + q2,
        q1,
        q2,
        r1: r1(h),
        r2: r2(h),
        w: w(h, c),
        ricci_min,
        alpha,
        alpha_ring,
        omega,
        eps_margin: alpha_ring - eps * omega - ho_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::sampler;
    use crate::rng;

    fn tube6() -> SecondFundamentalForm {
        SecondFundamentalForm::tube(6, 2.0, 0.5).unwrap()
    }

    #[test]
    fn special_frame_tube_anchor() {
        let d = special_frame(&tube6()).unwrap();
        assert!((d.mean_norm() - 10.5).abs() < 1e-14);
        let expect = [0.25, 0.25, 0.25, 0.25, 0.25, -1.25];
        for (l, e) in d.lambda_ring().iter().zip(expect) {
            assert!((l - e).abs() < 1e-13, "{l} vs {e}");
        }
        let (p1, q1, q2) = pq_split(&d);
        assert!((p1 - 1.875).abs() < 1e-13);
        assert_eq!(q1, 0.0);
        assert_eq!(q2, 0.0);
    }

    #[test]
    fn special_frame_umbilic_vanishes() {
        let h = SecondFundamentalForm::umbilic(6, 3, 4.2).unwrap();
        let d = special_frame(&h).unwrap();
        for l in d.lambda_ring() {
            assert!(l.abs() < 1e-14);
        }
        for b in d.offdiag_blocks() {
            assert!(b.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn special_frame_degenerate_mean() {
        let h = SecondFundamentalForm::diagonal(4, &[1.0, -1.0, 2.0, -2.0]).unwrap();
        assert!(matches!(
            special_frame(&h),
            Err(crate::error::Error::MeanCurvatureDegenerate(_))
        ));
    }

    #[test]
    fn special_frame_norm_preservation() {
        let mut r = rng::seeded(11);
        for _ in 0..200 {
            let h = sampler::random_sff(6, 3, &mut r);
            let d = match special_frame(&h) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let ho = h.traceless_norm_sq();
            assert!((d.traceless_norm_sq() - ho).abs() <= 1e-10 * ho.max(1.0));
            let trace_sum: f64 = d.lambda_ring().iter().sum();
            assert!(trace_sum.abs() <= 1e-10 * ho.sqrt().max(1.0));
        }
    }

    #[test]
    fn invariants_tube_anchor() {
        let h = tube6();
        let c = -1.0;
        assert!((r1(&h) - 410.0625).abs() < 1e-10);
        assert!((r2(&h) - 2232.5625).abs() < 1e-9);
        assert!(w(&h, c).abs() < 1e-10, "W = {}", w(&h, c));
    }

    #[test]
    fn invariants_umbilic_anchor() {
        for q in [1usize, 3] {
            let h = SecondFundamentalForm::umbilic(6, q, 10.5).unwrap();
            let y = 110.25f64;
            assert!((r1(&h) - y * y / 36.0).abs() < 1e-9);
            assert!((r2(&h) - y * y / 6.0).abs() < 1e-9);
            assert!(w(&h, -1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn r2_special_frame_identity() {
        // R2 = |H|^2 (P1 + |H|^2/n) on random tensors
        let mut r = rng::seeded(3);
        for _ in 0..300 {
            let h = sampler::random_sff(6, 3, &mut r);
            let d = match special_frame(&h) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let (p1, _, _) = pq_split(&d);
            let mean_sq = h.mean_norm_sq();
            let lhs = r2(&h);
            let rhs = mean_sq * (p1 + mean_sq / 6.0);
            let scale = h.norm_sq().max(1.0).powi(2);
            assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn frame_invariance_of_scalars() {
        let mut r = rng::seeded(17);
        for _ in 0..60 {
            let h = sampler::random_sff(6, 3, &mut r);
            let qrot = sampler::random_orthogonal(6, &mut r);
            let urot = sampler::random_orthogonal(3, &mut r);
            let h2 = sampler::rotate_frames(&h, &qrot, &urot).unwrap();
            let scale = h.norm_sq().max(1.0);
            for (a, b) in [
                (h.norm_sq(), h2.norm_sq()),
                (h.mean_norm_sq(), h2.mean_norm_sq()),
                (h.traceless_norm_sq(), h2.traceless_norm_sq()),
            ] {
                assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
            }
            let sc2 = scale * scale;
            for (a, b) in [(r1(&h), r1(&h2)), (r2(&h), r2(&h2)), (w(&h, -1.0), w(&h2, -1.0))] {
                assert!((a - b).abs() <= 1e-10 * sc2, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reaction_terms_tube_anchor() {
        let (r_h, r_mean, r_ho) = reaction_terms(&tube6(), -1.0);
        assert!((r_h - 622.125).abs() < 1e-9);
        assert!((r_mean - 3142.125).abs() < 1e-9);
        assert!((r_ho - 98.4375).abs() < 1e-9);
        assert!((r_ho - (r_h - r_mean / 6.0)).abs() < 1e-10);
    }

    #[test]
    fn reaction_terms_zero_tensor() {
        let h = SecondFundamentalForm::from_blocks(6, vec![vec![0.0; 36]]).unwrap();
        let (a, b, c) = reaction_terms(&h, -1.0);
        assert_eq!((a, b, c), (0.0, 0.0, 0.0));
    }

    #[test]
    fn reaction_identity_random() {
        let mut r = rng::seeded(5);
        for _ in 0..500 {
            let h = sampler::random_sff(8, 2, &mut r);
            let (r_h, r_mean, r_ho) = reaction_terms(&h, -0.7);
            let scale = h.norm_sq().max(1.0).powi(2);
            assert!((r_ho - (r_h - r_mean / 8.0)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn ricci_anchors() {
        let ric = ricci_exact(&tube6(), -1.0).unwrap();
        let mut sorted = ric.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(sorted[0].abs() < 1e-12, "min Ric {}", sorted[0]);
        for v in &sorted[1..] {
            assert!((v - 12.0).abs() < 1e-12);
        }

        // umbilic with |H|^2 = y: Ric = (n-1)(c + y/n^2) in every direction
        let h = SecondFundamentalForm::umbilic(6, 2, 9.0).unwrap();
        let ric = ricci_exact(&h, -1.0).unwrap();
        for v in ric {
            assert!((v - 5.0 * (-1.0 + 81.0 / 36.0)).abs() < 1e-12);
        }

        // totally geodesic: Ric = (n-1)c in every direction
        let h = SecondFundamentalForm::from_blocks(6, vec![vec![0.0; 36]]).unwrap();
        let ric = ricci_exact(&h, -1.0).unwrap();
        assert_eq!(ric, vec![-5.0; 6]);
    }

    #[test]
    fn codimension_embedding_changes_nothing() {
        let h = tube6();
        let h3 = h.embed_in_codimension(3).unwrap();
        assert_eq!(h3.q(), 3);
        assert!((r1(&h) - r1(&h3)).abs() < 1e-12);
        assert!((r2(&h) - r2(&h3)).abs() < 1e-12);
        assert!((w(&h, -1.0) - w(&h3, -1.0)).abs() < 1e-12);
        let ra = ricci_exact(&h, -1.0).unwrap();
        let rb = ricci_exact(&h3, -1.0).unwrap();
        for (a, b) in ra.iter().zip(&rb) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pinch_report_tube() {
        let rep = pinch_report(&tube6(), -1.0, 0.0).unwrap();
        assert!((rep.h_sq - 20.25).abs() < 1e-12);
        assert!((rep.mean_sq - 110.25).abs() < 1e-12);
        assert!((rep.ho_sq - 1.875).abs() < 1e-12);
        assert!((rep.alpha - 20.25).abs() < 1e-12);
        assert!((rep.alpha_ring - 1.875).abs() < 1e-12);
        assert!((rep.omega - 90.25).abs() < 1e-12);
        assert!(rep.eps_margin.abs() < 1e-12);
        assert!(rep.ricci_min.abs() < 1e-12);
    }

    #[test]
    fn pinch_report_split_invariants() {
        // P1 + P2 = |h-ring|^2 and Q1 + Q2 = P2 on random pinched tensors
        for seed in 0..100u64 {
            let h = sampler::random_pinched_seeded(6, 3, -1.0, 0.005, seed).unwrap();
            let rep = pinch_report(&h, -1.0, 0.005).unwrap();
            let scale = rep.h_sq.max(1.0);
            assert!((rep.p1 + rep.p2 - rep.ho_sq).abs() <= 1e-10 * scale);
            assert!((rep.q1 + rep.q2 - rep.p2).abs() <= 1e-12 * scale);
            assert!((rep.ho_sq - (rep.h_sq - rep.mean_sq / 6.0)).abs() <= 1e-10 * scale);
        }
    }
}
