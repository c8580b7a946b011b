//! Dense complex linear algebra over tensor-product index spaces.
//!
//! Multi-indices are big-endian: the first tensor factor is the most
//! significant digit, so `kron(a, b)[(i, j), (k, l)] = a[i, k] * b[j, l]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::zeros(rows, cols)
}

pub fn identity(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn maximally_mixed(d: usize) -> Mat {
    Mat::identity(d, d).scale(1.0 / d as f64)
}

pub fn basis_ket(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = ONE;
    v
}

pub fn projector(v: &Vector) -> Mat {
    v * v.adjoint()
}

/// `|i><j|` in dimension `d`.
pub fn unit(d: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[Mat]) -> Mat {
    let mut out = Mat::identity(1, 1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    a.kronecker(b)
}

pub fn trace(a: &Mat) -> C64 {
    a.trace()
}

pub fn hermitize(a: &Mat) -> Mat {
    (a + a.adjoint()).scale(0.5)
}

/// The implicit QR iteration can break down into NaN on highly degenerate
/// inputs such as large rank-one projectors. A scalar shift leaves the
/// eigenvectors unchanged and avoids the breakdown.
fn symmetric_eigen(h: Mat) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.iter().all(|x| x.is_finite()) && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return eig;
    }
    let n = h.nrows();
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for shift in [0.371, -0.613, 1.137] {
        let s = shift * scale;
        let mut eig = SymmetricEigen::new(&h + Mat::identity(n, n).scale(s));
        if eig.eigenvalues.iter().all(|x| x.is_finite()) {
            eig.eigenvalues.iter_mut().for_each(|x| *x -= s);
            return eig;
        }
    }
    eig
}

/// Eigen-decomposition of the Hermitian part of `a`; eigenvalues ascending.
pub fn eigh(a: &Mat) -> (Vec<f64>, Mat) {
    let eig = symmetric_eigen(hermitize(a));
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(a.nrows(), a.ncols());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh(a: &Mat) -> Vec<f64> {
    if a.nrows() == 1 {
        return vec![a[(0, 0)].re];
    }
    if a.nrows() == 2 {
        return eig2(a);
    }
    let mut v: Vec<f64> = symmetric_eigen(hermitize(a)).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

fn eig2(a: &Mat) -> Vec<f64> {
    let p = a[(0, 0)].re;
    let q = a[(1, 1)].re;
    let off = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + off.norm_sqr()).sqrt();
    vec![mean - rad, mean + rad]
}

/// Sum of absolute eigenvalues; valid for Hermitian inputs.
pub fn trace_norm_herm(a: &Mat) -> f64 {
    eigvalsh(a).iter().map(|x| x.abs()).sum()
}

/// Sum of singular values.
pub fn trace_norm(a: &Mat) -> f64 {
    a.clone().svd(false, false).singular_values.iter().sum()
}

pub fn singular_values(a: &Mat) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn min_eigenvalue(a: &Mat) -> f64 {
    eigvalsh(a).first().copied().unwrap_or(0.0)
}

pub fn is_psd(a: &Mat, tol: f64) -> bool {
    min_eigenvalue(a) >= -tol
}

/// Function of a Hermitian matrix applied through its eigenbasis.
pub fn herm_map(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = eigh(a);
    let d = a.nrows();
    let mut diag = zeros(d, d);
    for (i, v) in vals.iter().enumerate() {
        diag[(i, i)] = r(f(*v));
    }
    &vecs * diag * vecs.adjoint()
}

pub fn sqrt_psd(a: &Mat) -> Mat {
    herm_map(a, |x| x.max(0.0).sqrt())
}

/// Positive part of a Hermitian matrix (negative eigenvalues clipped to zero).
pub fn positive_part(a: &Mat) -> Mat {
    herm_map(a, |x| x.max(0.0))
}

/// Fidelity `|| sqrt(a) sqrt(b) ||_1` (not squared).
pub fn fidelity(a: &Mat, b: &Mat) -> f64 {
    trace_norm(&(sqrt_psd(a) * sqrt_psd(b)))
}

/// Shannon entropy in bits of a list of nonnegative weights.
pub fn shannon_bits(ps: &[f64]) -> f64 {
    ps.iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann(a: &Mat) -> f64 {
    shannon_bits(&eigvalsh(a))
}

pub fn frobenius_dist(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm()
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Digits of `index` in the mixed radix `dims` (big-endian).
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the full index space for every multi-index over `factors`
/// (enumerated big-endian in the order given).
pub fn offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let sub: Vec<usize> = factors.iter().map(|&f| dims[f]).collect();
    let total: usize = sub.iter().product();
    (0..total)
        .map(|i| {
            digits(i, &sub)
                .iter()
                .zip(factors)
                .map(|(d, &f)| d * st[f])
                .sum()
        })
        .collect()
}

/// Partial trace keeping the factors in `keep` (in the given order).
pub fn partial_trace(m: &Mat, dims: &[usize], keep: &[usize]) -> Mat {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let ok = offsets(dims, keep);
    let ot = offsets(dims, &traced);
    let dk = ok.len();
    let mut out = zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for &t in &ot {
                acc += m[(ok[i] + t, ok[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Reorders tensor factors: new factor `p` is old factor `perm[p]`.
pub fn permute_factors(m: &Mat, dims: &[usize], perm: &[usize]) -> Mat {
    let map = offsets(dims, perm);
    let d = map.len();
    let mut out = zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            out[(a, b)] = m[(map[a], map[b])];
        }
    }
    out
}

pub fn permute_vector(v: &Vector, dims: &[usize], perm: &[usize]) -> Vector {
    let map = offsets(dims, perm);
    Vector::from_iterator(map.len(), map.iter().map(|&i| v[i]))
}

/// Applies `sum_k K_k rho K_k^dagger` where each `K_k` acts on the factors
/// `targets` (square, dimension = product of the target dims).
pub fn apply_kraus_on(m: &Mat, dims: &[usize], targets: &[usize], kraus: &[Mat]) -> Mat {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let ot = offsets(dims, targets);
    let or = offsets(dims, &rest);
    let dt = ot.len();
    let d = m.nrows();
    let mut out = zeros(d, d);
    let mut left = zeros(d, d);
    for k in kraus {
        assert_eq!(k.nrows(), dt);
        assert_eq!(k.ncols(), dt);
        left.fill(ZERO);
        for &r0 in &or {
            for s in 0..dt {
                let row = ot[s] + r0;
                for s2 in 0..dt {
                    let kv = k[(s, s2)];
                    if kv == ZERO {
                        continue;
                    }
                    let src = ot[s2] + r0;
                    for col in 0..d {
                        left[(row, col)] += kv * m[(src, col)];
                    }
                }
            }
        }
        for &r0 in &or {
            for s in 0..dt {
                let col = ot[s] + r0;
                for s2 in 0..dt {
                    let kv = k[(s, s2)].conj();
                    if kv == ZERO {
                        continue;
                    }
                    let src = ot[s2] + r0;
                    for row in 0..d {
                        out[(row, col)] += left[(row, src)] * kv;
                    }
                }
            }
        }
    }
    out
}

/// Applies a unitary (or any square operator) on `targets` to a vector.
pub fn apply_op_vec(v: &Vector, dims: &[usize], targets: &[usize], op: &Mat) -> Vector {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let ot = offsets(dims, targets);
    let or = offsets(dims, &rest);
    let mut out = Vector::zeros(v.len());
    for &r0 in &or {
        for s in 0..ot.len() {
            let mut acc = ZERO;
            for s2 in 0..ot.len() {
                acc += op[(s, s2)] * v[ot[s2] + r0];
            }
            out[ot[s] + r0] = acc;
        }
    }
    out
}

/// Embeds an operator on `targets` into the full space.
pub fn embed(op: &Mat, dims: &[usize], targets: &[usize]) -> Mat {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let ot = offsets(dims, targets);
    let or = offsets(dims, &rest);
    let d: usize = dims.iter().product();
    let mut out = zeros(d, d);
    for &r0 in &or {
        for s in 0..ot.len() {
            for s2 in 0..ot.len() {
                out[(ot[s] + r0, ot[s2] + r0)] = op[(s, s2)];
            }
        }
    }
    out
}

/// `sum_i |i>|i> / sqrt(d)`.
pub fn max_entangled(d: usize) -> Vector {
    let mut v = Vector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = r(a);
    }
    v
}

pub fn epr() -> Mat {
    projector(&max_entangled(2))
}

/// Projector onto `Phi^{(x) n}` with the A halves first and B halves second.
pub fn epr_block(n: usize) -> Mat {
    projector(&max_entangled(1 << n))
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller keeps the dependency list short.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..d {
        let dj = rr[(j, j)];
        let ph = if dj.norm() > 0.0 { dj / dj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    let g = ginibre(d, 1, rng);
    let n = g.norm();
    Vector::from_iterator(d, g.iter().map(|x| x / n))
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Mat {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

pub fn pauli_matrices() -> [Mat; 4] {
    let i2 = identity(2);
    let x = Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let y = Mat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let z = Mat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    [i2, x, y, z]
}

pub fn hadamard() -> Mat {
    let a = r(std::f64::consts::FRAC_1_SQRT_2);
    Mat::from_row_slice(2, 2, &[a, a, a, -a])
}

pub fn phase_s() -> Mat {
    Mat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I])
}

pub fn cnot() -> Mat {
    let mut m = zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// Row-major vectorization superoperator of `rho -> sum K rho K^dagger`.
pub fn superop(kraus: &[Mat]) -> Mat {
    let (o, i) = (kraus[0].nrows(), kraus[0].ncols());
    let mut s = zeros(o * o, i * i);
    for k in kraus {
        s += k.kronecker(&k.map(|x| x.conj()));
    }
    s
}

pub fn apply_superop(s: &Mat, rho: &Mat) -> Mat {
    let d_in = rho.nrows();
    let d_out = (s.nrows() as f64).sqrt().round() as usize;
    let v = Vector::from_iterator(d_in * d_in, (0..d_in * d_in).map(|k| rho[(k / d_in, k % d_in)]));
    let w = s * v;
    Mat::from_fn(d_out, d_out, |a, b| w[a * d_out + b])
}
