//! Dense complex square matrices stored as split real/imaginary planes.
//!
//! The split layout keeps the inner products in `mul_vec` and the Gram-Schmidt
//! sweep in `haar_unitary` vectorizable; every kernel accumulates in a fixed
//! order so results are bit-reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

const LANES: usize = 4;
const GS_BLOCK: usize = 32;

/// Row-major K×K complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Sum of `a[i] * b[i]` (no conjugation).
#[inline]
fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    let mut sr = [0.0; LANES];
    let mut si = [0.0; LANES];
    let n = ar.len() / LANES * LANES;
    for (((a_r, a_i), b_r), b_i) in ar[..n]
        .chunks_exact(LANES)
        .zip(ai[..n].chunks_exact(LANES))
        .zip(br[..n].chunks_exact(LANES))
        .zip(bi[..n].chunks_exact(LANES))
    {
        for l in 0..LANES {
            sr[l] += a_r[l] * b_r[l] - a_i[l] * b_i[l];
            si[l] += a_r[l] * b_i[l] + a_i[l] * b_r[l];
        }
    }
    for i in n..ar.len() {
        sr[0] += ar[i] * br[i] - ai[i] * bi[i];
        si[0] += ar[i] * bi[i] + ai[i] * br[i];
    }
    (
        (sr[0] + sr[1]) + (sr[2] + sr[3]),
        (si[0] + si[1]) + (si[2] + si[3]),
    )
}

/// Sum of `conj(a[i]) * b[i]`.
#[inline]
fn dot_conj(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    let mut sr = [0.0; LANES];
    let mut si = [0.0; LANES];
    let n = ar.len() / LANES * LANES;
    for (((a_r, a_i), b_r), b_i) in ar[..n]
        .chunks_exact(LANES)
        .zip(ai[..n].chunks_exact(LANES))
        .zip(br[..n].chunks_exact(LANES))
        .zip(bi[..n].chunks_exact(LANES))
    {
        for l in 0..LANES {
            sr[l] += a_r[l] * b_r[l] + a_i[l] * b_i[l];
            si[l] += a_r[l] * b_i[l] - a_i[l] * b_r[l];
        }
    }
    for i in n..ar.len() {
        sr[0] += ar[i] * br[i] + ai[i] * bi[i];
        si[0] += ar[i] * bi[i] - ai[i] * br[i];
    }
    (
        (sr[0] + sr[1]) + (sr[2] + sr[3]),
        (si[0] + si[1]) + (si[2] + si[3]),
    )
}

fn split(x: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (
        x.iter().map(|z| z.re).collect(),
        x.iter().map(|z| z.im).collect(),
    )
}

impl CMatrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let z = f(r, c);
                re.push(z.re);
                im.push(z.im);
            }
        }
        CMatrix { dim, re, im }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// I.i.d. circular complex normal entries with variance `variance`.
    pub fn complex_gaussian<R: Rng + ?Sized>(dim: usize, variance: f64, rng: &mut R) -> Self {
        let sigma = (variance / 2.0).sqrt();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            re.push(sigma * rng.sample::<f64, _>(StandardNormal));
            im.push(sigma * rng.sample::<f64, _>(StandardNormal));
        }
        CMatrix { dim, re, im }
    }

    /// Haar-distributed unitary: Gram-Schmidt orthonormalization of the columns
    /// of a complex Gaussian matrix (equivalently QR with positive `diag(R)`).
    pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        // Column-major working copy: column k occupies [k*dim, (k+1)*dim).
        let gauss = Self::complex_gaussian(dim, 1.0, rng);
        let (mut cr, mut ci) = (gauss.re, gauss.im);
        let k = dim;

        let mut b0 = 0;
        while b0 < k {
            let b1 = (b0 + GS_BLOCK).min(k);
            for j in b0..b1 {
                normalize_column(&mut cr, &mut ci, j, k);
                let (qr, qi, rest_r, rest_i) = split_after(&mut cr, &mut ci, j, k);
                for c in 0..(b1 - j - 1) {
                    let s = c * k..(c + 1) * k;
                    project_out(qr, qi, &mut rest_r[s.clone()], &mut rest_i[s]);
                }
            }
            // Columns beyond the block receive the block's projections in the
            // same order plain modified Gram-Schmidt would apply them.
            let (done_r, tail_r) = cr.split_at_mut(b1 * k);
            let (done_i, tail_i) = ci.split_at_mut(b1 * k);
            for (col_r, col_i) in tail_r.chunks_exact_mut(k).zip(tail_i.chunks_exact_mut(k)) {
                for j in b0..b1 {
                    let s = j * k..(j + 1) * k;
                    project_out(&done_r[s.clone()], &done_i[s], col_r, col_i);
                }
            }
            b0 = b1;
        }

        // Transpose to row-major.
        let mut re = vec![0.0; k * k];
        let mut im = vec![0.0; k * k];
        for c in 0..k {
            for r in 0..k {
                re[r * k + c] = cr[c * k + r];
                im[r * k + c] = ci[c * k + r];
            }
        }
        CMatrix { dim, re, im }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let i = row * self.dim + col;
        Complex64::new(self.re[i], self.im[i])
    }

    /// `M · x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        let (xr, xi) = split(x);
        let k = self.dim;
        (0..k)
            .map(|r| {
                let row = r * k..(r + 1) * k;
                let (yr, yi) = dot(&self.re[row.clone()], &self.im[row], &xr, &xi);
                Complex64::new(yr, yi)
            })
            .collect()
    }

    /// `M · x` for a batch of vectors; each matrix row is streamed once per
    /// batch chunk. Results are bit-identical to calling [`Self::mul_vec`].
    pub fn mul_many(&self, xs: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        const CHUNK: usize = 32;
        let k = self.dim;
        let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(xs.len());
        for chunk in xs.chunks(CHUNK) {
            let planes: Vec<(Vec<f64>, Vec<f64>)> = chunk
                .iter()
                .map(|x| {
                    debug_assert_eq!(x.len(), k);
                    split(x)
                })
                .collect();
            let mut ys = vec![vec![Complex64::new(0.0, 0.0); k]; chunk.len()];
            for r in 0..k {
                let row_r = &self.re[r * k..(r + 1) * k];
                let row_i = &self.im[r * k..(r + 1) * k];
                for ((xr, xi), y) in planes.iter().zip(ys.iter_mut()) {
                    let (yr, yi) = dot(row_r, row_i, xr, xi);
                    y[r] = Complex64::new(yr, yi);
                }
            }
            out.extend(ys);
        }
        out
    }

    /// `M† · x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        let k = self.dim;
        let mut yr = vec![0.0; k];
        let mut yi = vec![0.0; k];
        for (r, z) in x.iter().enumerate() {
            let row_r = &self.re[r * k..(r + 1) * k];
            let row_i = &self.im[r * k..(r + 1) * k];
            for c in 0..k {
                // conj(m) * z
                yr[c] += row_r[c] * z.re + row_i[c] * z.im;
                yi[c] += row_r[c] * z.im - row_i[c] * z.re;
            }
        }
        yr.into_iter()
            .zip(yi)
            .map(|(r, i)| Complex64::new(r, i))
            .collect()
    }

    /// Largest elementwise deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let k = self.dim;
        // Columns of M as contiguous planes.
        let mut cr = vec![0.0; k * k];
        let mut ci = vec![0.0; k * k];
        for r in 0..k {
            for c in 0..k {
                cr[c * k + r] = self.re[r * k + c];
                ci[c * k + r] = self.im[r * k + c];
            }
        }
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in a..k {
                let (sr, si) = dot_conj(
                    &cr[a * k..(a + 1) * k],
                    &ci[a * k..(a + 1) * k],
                    &cr[b * k..(b + 1) * k],
                    &ci[b * k..(b + 1) * k],
                );
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max(Complex64::new(sr - target, si).norm());
            }
        }
        worst
    }
}

fn normalize_column(cr: &mut [f64], ci: &mut [f64], j: usize, k: usize) {
    let s = j * k..(j + 1) * k;
    let norm = cr[s.clone()]
        .iter()
        .zip(&ci[s.clone()])
        .map(|(r, i)| r * r + i * i)
        .sum::<f64>()
        .sqrt();
    let inv = 1.0 / norm;
    cr[s.clone()].iter_mut().for_each(|v| *v *= inv);
    ci[s].iter_mut().for_each(|v| *v *= inv);
}

/// Splits the column planes into column `j` and everything after it.
#[allow(clippy::type_complexity)]
fn split_after<'a>(
    cr: &'a mut [f64],
    ci: &'a mut [f64],
    j: usize,
    k: usize,
) -> (&'a [f64], &'a [f64], &'a mut [f64], &'a mut [f64]) {
    let (head_r, rest_r) = cr.split_at_mut((j + 1) * k);
    let (head_i, rest_i) = ci.split_at_mut((j + 1) * k);
    (&head_r[j * k..], &head_i[j * k..], rest_r, rest_i)
}

/// `g -= (q† g) q` for a unit vector `q`.
#[inline]
fn project_out(qr: &[f64], qi: &[f64], gr: &mut [f64], gi: &mut [f64]) {
    let (pr, pi) = dot_conj(qr, qi, gr, gi);
    for i in 0..gr.len() {
        gr[i] -= pr * qr[i] - pi * qi[i];
        gi[i] -= pr * qi[i] + pi * qr[i];
    }
}
