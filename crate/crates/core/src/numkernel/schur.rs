//! Complex Schur factorization, reordering and the spectral projectors built on it.
//!
//! The factorization is `A = Q T Q†` with `Q` unitary and `T` upper triangular. It is computed by
//! Householder reduction to Hessenberg form followed by implicit single-shift QR sweeps with
//! Wilkinson shifts (and the usual exceptional shifts when a window stops deflating).

use num_complex::Complex64;

use super::{CMatrix, ToleranceConfig};
use crate::error::{Error, Result};

const ULP: f64 = f64::EPSILON;
const SAFE_MIN: f64 = f64::MIN_POSITIVE;

/// `|re| + |im|`, the cheap modulus used by the deflation tests.
#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// A plane rotation `G = [[c, s], [-conj(s), c]]` with real `c`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation with `G [a; b] = [r; 0]`.
    fn zeroing(a: Complex64, b: Complex64) -> (Self, Complex64) {
        if b == Complex64::new(0.0, 0.0) {
            return (
                Givens {
                    c: 1.0,
                    s: Complex64::new(0.0, 0.0),
                },
                a,
            );
        }
        let abs_a = a.norm();
        let abs_b = b.norm();
        if abs_a == 0.0 {
            return (
                Givens {
                    c: 0.0,
                    s: b.conj() / abs_b,
                },
                Complex64::new(abs_b, 0.0),
            );
        }
        let norm = abs_a.hypot(abs_b);
        let phase = a / abs_a;
        (
            Givens {
                c: abs_a / norm,
                s: phase * b.conj() / norm,
            },
            phase * norm,
        )
    }

    /// `M[i..=j, cols] <- G M[i..=j, cols]` for rows `i`, `j`.
    fn rotate_rows(&self, m: &mut CMatrix, i: usize, j: usize, cols: std::ops::Range<usize>) {
        for col in cols {
            let x = m[(i, col)];
            let y = m[(j, col)];
            m[(i, col)] = x * self.c + self.s * y;
            m[(j, col)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// `M[rows, i..=j] <- M[rows, i..=j] G†` for columns `i`, `j`.
    fn rotate_cols(&self, m: &mut CMatrix, i: usize, j: usize, rows: std::ops::Range<usize>) {
        for row in rows {
            let x = m[(row, i)];
            let y = m[(row, j)];
            m[(row, i)] = x * self.c + y * self.s.conj();
            m[(row, j)] = -x * self.s + y * self.c;
        }
    }
}

/// Complex Schur factorization `A = Q T Q†`.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn new(a: &CMatrix) -> Result<Self> {
        assert!(a.is_square(), "Schur factorization needs a square matrix");
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = a.nrows();
        let mut t = a.clone();
        let mut q = CMatrix::identity(n, n);
        if n <= 1 {
            return Ok(Schur { q, t });
        }
        hessenberg_in_place(&mut t, &mut q);
        hessenberg_qr(&mut t, &mut q)?;
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Schur { q, t })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swap the adjacent diagonal entries `k` and `k + 1`, keeping `Q T Q†` fixed.
    fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.nrows();
        let a = self.t[(k, k)];
        let b = self.t[(k + 1, k + 1)];
        let c = self.t[(k, k + 1)];
        // [c, b - a] spans the eigenvector of the 2x2 block for eigenvalue b.
        let (g, _) = Givens::zeroing(c, b - a);
        if g.s == Complex64::new(0.0, 0.0) && g.c == 1.0 {
            return;
        }
        g.rotate_rows(&mut self.t, k, k + 1, k..n);
        g.rotate_cols(&mut self.t, k, k + 1, 0..(k + 2));
        g.rotate_cols(&mut self.q, k, k + 1, 0..n);
        self.t[(k + 1, k)] = Complex64::new(0.0, 0.0);
        self.t[(k, k)] = b;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Move every diagonal entry accepted by `select` to the leading block, preserving the
    /// relative order within both groups. Returns the size of the leading block.
    pub fn reorder(&mut self, select: impl Fn(Complex64) -> bool) -> usize {
        let n = self.t.nrows();
        let flags: Vec<bool> = (0..n).map(|i| select(self.t[(i, i)])).collect();
        let mut order: Vec<bool> = flags.clone();
        let mut placed = 0;
        for j in 0..n {
            if !flags[j] {
                continue;
            }
            // Current position of the j-th original entry is j (entries before it only moved
            // among themselves); bubble it up to `placed`.
            let mut pos = j;
            while pos > placed {
                self.swap_adjacent(pos - 1);
                order.swap(pos - 1, pos);
                pos -= 1;
            }
            placed += 1;
        }
        debug_assert!(order.iter().take(placed).all(|&f| f));
        placed
    }
}

fn hessenberg_in_place(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (v[0].norm_sqr() + tail).sqrt();
        let phase = if v[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v†) H
        for col in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, col)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, col)] -= *vi * dot * 2.0;
            }
        }
        // H <- H (I - 2 v v†), Q <- Q (I - 2 v v†)
        for m in [&mut *h, &mut *q] {
            for row in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| m[(row, k + 1 + i)] * *vi)
                    .sum();
                for (i, vi) in v.iter().enumerate() {
                    m[(row, k + 1 + i)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Implicit single-shift QR on an upper Hessenberg matrix, in the manner of LAPACK's `zlahqr`.
fn hessenberg_qr(h: &mut CMatrix, q: &mut CMatrix) -> Result<()> {
    let n = h.nrows();
    let itmax = 30 * n.max(10);
    let mut total_iterations = 0usize;
    let mut hi = n - 1;
    let scale_floor = SAFE_MIN * (n as f64 / ULP);

    while hi > 0 {
        let mut its = 0usize;
        loop {
            // Look for a negligible subdiagonal entry.
            let mut lo = hi;
            while lo > 0 {
                let sub = cabs1(h[(lo, lo - 1)]);
                if sub <= scale_floor {
                    break;
                }
                let mut tst = cabs1(h[(lo - 1, lo - 1)]) + cabs1(h[(lo, lo)]);
                if tst == 0.0 {
                    if lo >= 2 {
                        tst += h[(lo - 1, lo - 2)].re.abs();
                    }
                    if lo < hi {
                        tst += h[(lo + 1, lo)].re.abs();
                    }
                }
                if sub <= ULP * tst {
                    break;
                }
                lo -= 1;
            }
            if lo > 0 {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
            }
            if lo == hi {
                break;
            }
            if its >= itmax {
                return Err(Error::NonConvergence {
                    iterations: total_iterations,
                });
            }

            let shift = if its == 10 {
                h[(lo, lo)] + 0.75 * h[(lo + 1, lo)].re.abs()
            } else if its == 20 {
                h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
            } else {
                wilkinson_shift(h, hi)
            };

            // Chase the bulge through the active window.
            let (g, _) = Givens::zeroing(h[(lo, lo)] - shift, h[(lo + 1, lo)]);
            g.rotate_rows(h, lo, lo + 1, lo..n);
            g.rotate_cols(h, lo, lo + 1, 0..(lo + 3).min(hi + 1));
            g.rotate_cols(q, lo, lo + 1, 0..n);
            for k in (lo + 1)..hi {
                let (g, r) = Givens::zeroing(h[(k, k - 1)], h[(k + 1, k - 1)]);
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
                g.rotate_rows(h, k, k + 1, k..n);
                g.rotate_cols(h, k, k + 1, 0..(k + 3).min(hi + 1));
                g.rotate_cols(q, k, k + 1, 0..n);
            }
            its += 1;
            total_iterations += 1;
        }
        hi -= 1;
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = d + half + disc;
    let l2 = d + half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvectors of an upper triangular matrix by back substitution (columns, unit norm).
pub(crate) fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(SAFE_MIN);
    let small = ULP * tnorm;
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![Complex64::new(0.0, 0.0); k + 1];
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let rhs: Complex64 = -((i + 1)..=k).map(|j| t[(i, j)] * x[j]).sum::<Complex64>();
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            x[i] = rhs / denom;
            let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                for z in x.iter_mut() {
                    *z /= big;
                }
            }
        }
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (i, z) in x.into_iter().enumerate() {
            out[(i, k)] = z / norm;
        }
    }
    out
}

/// A region of the complex plane used to select eigenvalues for a spectral projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `|z| >= radius`.
    ModulusAtLeast(f64),
    /// `|z - center| <= radius`.
    Disk { center: Complex64, radius: f64 },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::ModulusAtLeast(r) => z.norm() >= r,
            Region::Disk { center, radius } => (z - center).norm() <= radius,
        }
    }

    /// Distance from `z` to the region's boundary curve.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match *self {
            Region::ModulusAtLeast(r) => (z.norm() - r).abs(),
            Region::Disk { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }
}

/// Spectral projector together with the ordered Schur data that produced it.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// The (oblique) projector onto the selected generalized eigenspaces.
    pub projector: CMatrix,
    /// Orthonormal basis of the projector's range (leading Schur vectors), `n x k`.
    pub range_basis: CMatrix,
    /// `range_basis† A range_basis`, upper triangular `k x k`.
    pub range_block: CMatrix,
    /// Orthonormal basis of the projector's kernel, `n x (n - k)`.
    pub kernel_basis: CMatrix,
    /// Eigenvalues in Schur order: the first `k` are the selected ones.
    pub eigenvalues: Vec<Complex64>,
}

impl SpectralSplit {
    pub fn rank(&self) -> usize {
        self.range_basis.ncols()
    }
}

/// Spectral projector onto the eigenvalues of `a` inside `region`, refusing eigenvalues that
/// lie within `guard` of the region's boundary.
pub fn spectral_split(a: &CMatrix, region: Region, guard: f64) -> Result<SpectralSplit> {
    let n = a.nrows();
    let mut schur = Schur::new(a)?;
    if let Some(&z) = schur
        .eigenvalues()
        .iter()
        .find(|&&z| region.boundary_distance(z) < guard)
    {
        return Err(Error::BoundaryAmbiguity {
            eigenvalue: z,
            guard,
        });
    }
    let k = schur.reorder(|z| region.contains(z));
    let t = &schur.t;
    let s11 = t.view((0, 0), (k, k)).into_owned();
    let s12 = t.view((0, k), (k, n - k)).into_owned();
    let s22 = t.view((k, k), (n - k, n - k)).into_owned();
    let r = solve_triangular_sylvester(&s11, &s22, &(-s12))?;

    // In Schur coordinates the projector is [[I, -R], [0, 0]].
    let mut p_schur = CMatrix::zeros(n, n);
    for i in 0..k {
        p_schur[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..(n - k) {
            p_schur[(i, k + j)] = -r[(i, j)];
        }
    }
    let q = &schur.q;
    let projector = q * p_schur * q.adjoint();

    // Kernel: vectors (R y, y) in Schur coordinates.
    let kernel_basis = if k == n {
        CMatrix::zeros(n, 0)
    } else {
        let mut stacked = CMatrix::zeros(n, n - k);
        stacked.view_mut((0, 0), (k, n - k)).copy_from(&r);
        stacked
            .view_mut((k, 0), (n - k, n - k))
            .copy_from(&CMatrix::identity(n - k, n - k));
        let z = q * stacked;
        z.qr().q()
    };

    Ok(SpectralSplit {
        projector,
        range_basis: q.columns(0, k).into_owned(),
        range_block: s11,
        kernel_basis,
        eigenvalues: schur.eigenvalues(),
    })
}

/// Spectral projector onto the selected eigenvalues, guarded by `tol.cluster_tol`.
pub fn spectral_projector(a: &CMatrix, region: Region, tol: &ToleranceConfig) -> Result<CMatrix> {
    Ok(spectral_split(a, region, tol.cluster_tol)?.projector)
}

/// Solves `A X - X B = C` for upper triangular `A` (`k x k`) and `B` (`m x m`).
pub fn solve_triangular_sylvester(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    let k = a.nrows();
    let m = b.nrows();
    let mut x = CMatrix::zeros(k, m);
    if k == 0 || m == 0 {
        return Ok(x);
    }
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(SAFE_MIN);
    for j in 0..m {
        let mu = b[(j, j)];
        let mut rhs: Vec<Complex64> = (0..k)
            .map(|p| c[(p, j)] + (0..j).map(|i| x[(p, i)] * b[(i, j)]).sum::<Complex64>())
            .collect();
        for p in (0..k).rev() {
            let acc: Complex64 = ((p + 1)..k).map(|q| a[(p, q)] * x[(q, j)]).sum();
            let denom = a[(p, p)] - mu;
            if denom.norm() <= 10.0 * ULP * scale {
                return Err(Error::SylvesterSingular {
                    separation: denom.norm(),
                });
            }
            rhs[p] -= acc;
            x[(p, j)] = rhs[p] / denom;
        }
    }
    Ok(x)
}
