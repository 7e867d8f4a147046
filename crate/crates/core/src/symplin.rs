//! Symplectic linear algebra on `R^{2n}` with coordinates `(x_1..x_n, y_1..y_n)`.
//!
//! `J0 = [0 -I; I 0]`. A matrix commuting with `J0` has block form `[X -Y; Y X]`
//! and acts on `C^n` as `X + iY`. Paths are sampled and immutable.

use nalgebra::{Cholesky, DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Residual bound for symplecticity and unitarity checks.
pub const EPS_SYM: f64 = 1e-9;
/// Agreement bound for lifted angles.
pub const EPS_THETA: f64 = 1e-7;

const POLAR_MAX_ITER: usize = 30;
const POLAR_TOL: f64 = 1e-12;

pub fn standard_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Half-dimension of a square matrix of even size.
pub fn half_dim(a: &Mat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension { expected: a.nrows(), got: a.ncols() });
    }
    if a.nrows() == 0 || a.nrows() % 2 != 0 {
        return Err(Error::InvalidInput(format!("matrix size {} is not a positive even number", a.nrows())));
    }
    Ok(a.nrows() / 2)
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `||A^T J0 A - J0||_max`.
pub fn symplectic_residual(a: &Mat) -> Result<f64> {
    let n = half_dim(a)?;
    let j = standard_j(n);
    Ok(max_abs(&(a.transpose() * &j * a - j)))
}

pub fn is_symplectic(a: &Mat, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    Ok(symplectic_residual(a)? <= tol)
}

/// Symplecticity scaled by the size of the matrix, for products with large entries.
fn check_symplectic_scaled(a: &Mat) -> Result<()> {
    let r = symplectic_residual(a)?;
    let scale = max_abs(a).max(1.0);
    if r > EPS_SYM * scale * scale {
        return Err(Error::NotSymplectic { residual: r });
    }
    Ok(())
}

pub fn orthogonality_residual(a: &Mat) -> f64 {
    max_abs(&(a.transpose() * a - Mat::identity(a.nrows(), a.ncols())))
}

#[derive(Debug, Clone)]
pub struct PolarParts {
    pub p: Mat,
    pub u: Mat,
}

/// `A = P U` with `P` symmetric positive definite and `U` orthogonal and symplectic.
///
/// Newton iteration `X <- (g X + X^{-T} / g) / 2` on the orthogonal factor. The
/// first step uses the exact symplectic inverse `A^{-T} = -J0 A J0`; Frobenius
/// scaling `g` is applied until the iterate is close to orthogonal.
pub fn polar_decompose(a: &Mat) -> Result<PolarParts> {
    let n = half_dim(a)?;
    check_symplectic_scaled(a)?;
    let dim = 2 * n;
    if orthogonality_residual(a) <= POLAR_TOL {
        return Ok(PolarParts { p: Mat::identity(dim, dim), u: a.clone() });
    }

    let j = standard_j(n);
    let mut x = (a - &j * a * &j) * 0.5;
    let mut residual = f64::INFINITY;
    let mut iterations = 1;
    while iterations < POLAR_MAX_ITER {
        iterations += 1;
        let inv = x.clone().try_inverse().ok_or(Error::PolarNoConvergence { iterations, residual })?;
        let g = if residual > 1e-2 {
            (inv.norm() / x.norm()).sqrt()
        } else {
            1.0
        };
        let next = (&x * g + inv.transpose() / g) * 0.5;
        residual = max_abs(&(&next - &x));
        x = next;
        if residual <= POLAR_TOL {
            break;
        }
    }
    if residual > POLAR_TOL {
        return Err(Error::PolarNoConvergence { iterations, residual });
    }

    let u = x;
    let p0 = a * u.transpose();
    let p = (&p0 + p0.transpose()) * 0.5;
    if Cholesky::new(p.clone()).is_none() {
        return Err(Error::PolarNoConvergence { iterations, residual });
    }
    Ok(PolarParts { p, u })
}

/// `X + iY` for a matrix of block form `[X -Y; Y X]`.
pub fn complex_form(u: &Mat) -> CMat {
    let n = u.nrows() / 2;
    CMat::from_fn(n, n, |r, c| Complex64::new(u[(r, c)], u[(n + r, c)]))
}

/// Real `2n x 2n` block form of a complex `n x n` matrix.
pub fn real_form(z: &CMat) -> Mat {
    let n = z.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let v = z[(r, c)];
            m[(r, c)] = v.re;
            m[(r, n + c)] = -v.im;
            m[(n + r, c)] = v.im;
            m[(n + r, n + c)] = v.re;
        }
    }
    m
}

fn check_unitary(u: &Mat) -> Result<()> {
    half_dim(u)?;
    let r = orthogonality_residual(u).max(symplectic_residual(u)?);
    if r > EPS_SYM {
        return Err(Error::NotUnitary { residual: r });
    }
    Ok(())
}

/// `det_C(X + iY)^2` for an orthogonal symplectic `U`.
pub fn det_complex_sq(u: &Mat) -> Result<Complex64> {
    check_unitary(u)?;
    let d = complex_form(u).determinant();
    Ok(d * d)
}

/// Eigenvalues of a square complex matrix.
pub fn complex_eigenvalues(z: &CMat) -> Result<Vec<Complex64>> {
    if z.nrows() == 1 {
        return Ok(vec![z[(0, 0)]]);
    }
    let diagonal = |m: CMat| {
        Schur::try_new(m, f64::EPSILON, 100_000).map(|s| {
            let (_, t) = s.unpack();
            (0..t.nrows()).map(|i| t[(i, i)]).collect::<Vec<_>>()
        })
    };
    if let Some(ev) = diagonal(z.clone()) {
        return Ok(ev);
    }
    // The shifted QR iteration can stall on exactly repeated eigenvalues; a dense
    // unitary similarity breaks that structure without moving the spectrum.
    let dim = z.nrows();
    for salt in 1..=3 {
        let g = CMat::from_fn(dim, dim, |r, c| {
            let x = (salt * 7 + r * 13 + c * 29) as f64;
            Complex64::new(x.sin(), (1.7 * x).cos())
        });
        let q = g.qr().q();
        if let Some(ev) = diagonal(q.adjoint() * z * &q) {
            return Ok(ev);
        }
    }
    Err(Error::Eigen)
}

/// Principal arguments in `(-pi, pi]` of the eigenvalues of a unitary matrix.
pub fn unitary_eigen_angles(z: &CMat) -> Result<Vec<f64>> {
    Ok(complex_eigenvalues(z)?
        .into_iter()
        .map(|l| {
            let a = l.arg();
            if a <= -PI { a + 2.0 * PI } else { a }
        })
        .collect())
}

/// Sum of the eigen-angles of `Z0^* Z1`, refusing any single angle of size `pi/2` or more.
pub(crate) fn unitary_step(z0: &CMat, z1: &CMat, t0: f64, t1: f64) -> Result<f64> {
    let angles = unitary_eigen_angles(&(z0.adjoint() * z1))?;
    let mut sum = 0.0;
    for a in angles {
        if a.abs() >= FRAC_PI_2 {
            return Err(Error::LiftGuard { t0, t1, step: a.abs() });
        }
        sum += a;
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
}

/// Sampled path of symplectic matrices starting at the identity.
#[derive(Debug, Clone)]
pub struct SympPath {
    n: usize,
    times: Vec<f64>,
    mats: Vec<Mat>,
}

impl SympPath {
    pub fn new(samples: Vec<(f64, Mat)>) -> Result<Self> {
        let Some((t0, a0)) = samples.first() else {
            return Err(Error::InvalidPath("no samples".into()));
        };
        let n = half_dim(a0)?;
        if *t0 != 0.0 {
            return Err(Error::InvalidPath(format!("first sample at t={t0}, expected 0")));
        }
        if max_abs(&(a0 - Mat::identity(2 * n, 2 * n))) > EPS_SYM {
            return Err(Error::InvalidPath("first sample is not the identity".into()));
        }
        let mut times = Vec::with_capacity(samples.len());
        let mut mats = Vec::with_capacity(samples.len());
        for (i, (t, a)) in samples.into_iter().enumerate() {
            if half_dim(&a)? != n {
                return Err(Error::Dimension { expected: 2 * n, got: a.nrows() });
            }
            if !t.is_finite() || times.last().is_some_and(|&prev| t <= prev) {
                return Err(Error::InvalidPath(format!("sample {i}: times must be finite and strictly increasing")));
            }
            check_symplectic_scaled(&a)?;
            times.push(t);
            mats.push(a);
        }
        Ok(SympPath { n, times, mats })
    }

    /// Constant identity path on `[0, t_end]` with two samples (one if `t_end == 0`).
    pub fn constant(n: usize, t_end: f64) -> Self {
        let id = Mat::identity(2 * n, 2 * n);
        let (times, mats) = if t_end > 0.0 {
            (vec![0.0, t_end], vec![id.clone(), id])
        } else {
            (vec![0.0], vec![id])
        };
        SympPath { n, times, mats }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.mats
    }

    pub fn endpoint(&self) -> &Mat {
        self.mats.last().unwrap()
    }

    pub fn is_loop(&self) -> bool {
        max_abs(&(self.endpoint() - Mat::identity(2 * self.n, 2 * self.n))) <= EPS_SYM
    }

    /// True when every sample is orthogonal, so polar parts are trivial.
    pub fn is_unitary(&self) -> bool {
        self.mats.iter().all(|m| orthogonality_residual(m) <= EPS_SYM)
    }

    /// Restriction to the first `i + 1` samples.
    pub fn head(&self, i: usize) -> SympPath {
        SympPath { n: self.n, times: self.times[..=i].to_vec(), mats: self.mats[..=i].to_vec() }
    }

    /// The remainder after sample `i`, re-based to start at the identity:
    /// `t -> Psi(t_i + t) Psi(t_i)^{-1}`.
    pub fn tail(&self, i: usize) -> Result<SympPath> {
        let base_inv = symplectic_inverse(&self.mats[i]);
        let t0 = self.times[i];
        let mut samples = vec![(0.0, Mat::identity(2 * self.n, 2 * self.n))];
        for k in i + 1..self.times.len() {
            samples.push((self.times[k] - t0, &self.mats[k] * &base_inv));
        }
        SympPath::new(samples)
    }

    /// Time-reversed inverse path `t -> Psi(T - t) Psi(T)^{-1}`.
    pub fn reversed(&self) -> SympPath {
        let t_end = self.duration();
        let end_inv = symplectic_inverse(self.endpoint());
        let mut times = Vec::with_capacity(self.len());
        let mut mats = Vec::with_capacity(self.len());
        for k in (0..self.len()).rev() {
            times.push(t_end - self.times[k]);
            mats.push(&self.mats[k] * &end_inv);
        }
        times[0] = 0.0;
        mats[0] = Mat::identity(2 * self.n, 2 * self.n);
        SympPath { n: self.n, times, mats }
    }

    pub fn to_samples(&self) -> Vec<Sample> {
        self.times
            .iter()
            .zip(&self.mats)
            .map(|(&t, m)| Sample { t, a: m.transpose().iter().copied().collect() })
            .collect()
    }

    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        let mut out = Vec::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            let len = s.a.len();
            let side = (len as f64).sqrt().round() as usize;
            if side * side != len || side == 0 || side % 2 != 0 {
                return Err(Error::InvalidPath(format!("sample {i}: {len} entries is not 4n^2")));
            }
            out.push((s.t, Mat::from_row_slice(side, side, &s.a)));
        }
        SympPath::new(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let samples: Vec<Sample> = serde_json::from_str(text)?;
        SympPath::from_samples(&samples)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_samples()).expect("samples serialize")
    }
}

/// `A^{-1} = -J0 A^T J0` for symplectic `A`.
pub fn symplectic_inverse(a: &Mat) -> Mat {
    let j = standard_j(a.nrows() / 2);
    -(&j * a.transpose() * &j)
}

/// Continuous lift of `arg det_C` of the unitary parts along a path.
#[derive(Debug, Clone)]
pub struct AngleTrack {
    pub samples: Vec<(f64, f64)>,
}

impl AngleTrack {
    pub fn theta_end(&self) -> f64 {
        self.samples.last().unwrap().1
    }
}

/// Lift `theta` with `det_C(U(t))^2 = exp(2 i theta(t))` and `theta(0) = 0`.
///
/// Each step adds the eigen-angles of `U_{i-1}^* U_i`; a step with any eigen-angle
/// of size `pi/2` or more is refused.
pub fn lift_angle(path: &SympPath) -> Result<AngleTrack> {
    let forms = unitary_forms(path)?;
    lift_forms(path.times(), &forms, 0.0)
}

pub(crate) fn unitary_forms(path: &SympPath) -> Result<Vec<CMat>> {
    path.matrices().iter().map(|m| Ok(complex_form(&polar_decompose(m)?.u))).collect()
}

pub(crate) fn lift_forms(times: &[f64], forms: &[CMat], theta0: f64) -> Result<AngleTrack> {
    let mut theta = theta0;
    let mut samples = Vec::with_capacity(times.len());
    samples.push((times[0], theta));
    for i in 1..times.len() {
        theta += unitary_step(&forms[i - 1], &forms[i], times[i - 1], times[i])?;
        samples.push((times[i], theta));
    }
    Ok(AngleTrack { samples })
}

/// `Psi(jT + t) = Psi(t) Psi(T)^j` for `j = 0..k-1`.
pub fn iterate_path(path: &SympPath, k: usize) -> SympPath {
    assert!(k >= 1, "iteration count must be positive");
    let t_end = path.duration();
    let end = path.endpoint();
    let mut power = Mat::identity(2 * path.n, 2 * path.n);
    let mut times = path.times.clone();
    let mut mats = path.mats.clone();
    for j in 1..k {
        power = &power * end;
        for i in 1..path.len() {
            times.push(j as f64 * t_end + path.times[i]);
            mats.push(&path.mats[i] * &power);
        }
    }
    SympPath { n: path.n, times, mats }
}

/// `path1` on `[0, T1]`, then `path2(t - T1) path1(T1)`.
pub fn catenate(path1: &SympPath, path2: &SympPath) -> Result<SympPath> {
    if path1.n != path2.n {
        return Err(Error::Dimension { expected: 2 * path1.n, got: 2 * path2.n });
    }
    let t1 = path1.duration();
    let base = path1.endpoint();
    let mut times = path1.times.clone();
    let mut mats = path1.mats.clone();
    for i in 1..path2.len() {
        times.push(t1 + path2.times[i]);
        mats.push(&path2.mats[i] * base);
    }
    Ok(SympPath { n: path1.n, times, mats })
}

/// Block rotation `(+)_j R(phi_j)`.
pub fn block_rotation(angles: &[f64]) -> Mat {
    let n = angles.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (j, &phi) in angles.iter().enumerate() {
        let (s, c) = phi.sin_cos();
        m[(j, j)] = c;
        m[(j, n + j)] = -s;
        m[(n + j, j)] = s;
        m[(n + j, n + j)] = c;
    }
    m
}

/// `diag(d_1..d_n, 1/d_1..1/d_n)`.
pub fn stretch(factors: &[f64]) -> Mat {
    let n = factors.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (j, &d) in factors.iter().enumerate() {
        m[(j, j)] = d;
        m[(n + j, n + j)] = 1.0 / d;
    }
    m
}

/// `[I S; 0 I]` for symmetric `S`.
pub fn shear(s: &Mat) -> Mat {
    let n = s.nrows();
    let mut m = Mat::identity(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(s);
    m
}

/// `diag(O, O)` for orthogonal `O`; orthogonal and symplectic.
pub fn orthogonal_lift(o: &Mat) -> Mat {
    let n = o.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(o);
    m.view_mut((n, n), (n, n)).copy_from(o);
    m
}

/// Symplectic direct sum respecting the `(x, y)` coordinate split.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (na, nb) = (a.nrows() / 2, b.nrows() / 2);
    let n = na + nb;
    let ia = |i: usize| if i < na { i } else { n + i - na };
    let ib = |i: usize| if i < nb { na + i } else { n + na + i - nb };
    let mut m = Mat::zeros(2 * n, 2 * n);
    for r in 0..2 * na {
        for c in 0..2 * na {
            m[(ia(r), ia(c))] = a[(r, c)];
        }
    }
    for r in 0..2 * nb {
        for c in 0..2 * nb {
            m[(ib(r), ib(c))] = b[(r, c)];
        }
    }
    m
}

/// `t -> (+)_j R(w_j t)` sampled at `m + 1` uniform times on `[0, T]`.
pub fn rotation_path(rates: &[f64], t_end: f64, m: usize) -> Result<SympPath> {
    if rates.is_empty() {
        return Err(Error::InvalidInput("at least one rate is required".into()));
    }
    if !(t_end > 0.0) || m == 0 {
        return Err(Error::InvalidInput("duration and sample count must be positive".into()));
    }
    let step = rates.iter().fold(0.0_f64, |acc, w| acc.max(w.abs())) * t_end / m as f64;
    if step >= FRAC_PI_4 {
        return Err(Error::LiftGuard { t0: 0.0, t1: t_end / m as f64, step });
    }
    let n = rates.len();
    let mut times = Vec::with_capacity(m + 1);
    let mut mats = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let t = if i == m { t_end } else { t_end * i as f64 / m as f64 };
        times.push(t);
        mats.push(if i == 0 {
            Mat::identity(2 * n, 2 * n)
        } else {
            block_rotation(&rates.iter().map(|w| w * t).collect::<Vec<_>>())
        });
    }
    Ok(SympPath { n, times, mats })
}

/// Sample count keeping every per-step rotation angle at most `pi/8`.
pub fn default_samples(rates: &[f64], t_end: f64) -> usize {
    let max = rates.iter().fold(0.0_f64, |acc, w| acc.max(w.abs()));
    ((max * t_end / (PI / 8.0)).ceil() as usize).max(8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn standard_j_squares_to_minus_identity() {
        assert_eq!(standard_j(1), Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        for n in 1..6 {
            let j = standard_j(n);
            assert_eq!(&j * &j, -Mat::identity(2 * n, 2 * n));
        }
    }

    #[test]
    fn symplectic_membership() {
        assert!(is_symplectic(&Mat::identity(2, 2), 1e-9).unwrap());
        assert!(is_symplectic(&stretch(&[2.0]), 1e-9).unwrap());
        assert!(!is_symplectic(&Mat::from_diagonal_element(2, 2, 2.0), 1e-9).unwrap());
        assert!(is_symplectic(&Mat::identity(3, 3), 1e-9).is_err());
    }

    #[test]
    fn polar_of_positive_and_unitary_inputs() {
        let a = stretch(&[2.0]);
        let pu = polar_decompose(&a).unwrap();
        assert!(close(&pu.p, &a, 1e-12) && close(&pu.u, &Mat::identity(2, 2), 1e-12));

        let r = block_rotation(&[0.7]);
        let pu = polar_decompose(&r).unwrap();
        assert!(close(&pu.p, &Mat::identity(2, 2), 1e-12) && close(&pu.u, &r, 1e-12));
    }

    #[test]
    fn polar_of_rotated_stretch() {
        let phi = PI / 3.0;
        let a = block_rotation(&[phi]) * stretch(&[3.0]);
        let pu = polar_decompose(&a).unwrap();
        let p_expected = block_rotation(&[phi]) * stretch(&[3.0]) * block_rotation(&[-phi]);
        assert!(close(&pu.u, &block_rotation(&[phi]), 1e-10));
        assert!(close(&pu.p, &p_expected, 1e-10));
        assert!(close(&(&pu.p * &pu.u), &a, EPS_SYM));
    }

    #[test]
    fn polar_rejects_non_symplectic() {
        let a = Mat::from_diagonal_element(2, 2, 2.0);
        assert!(matches!(polar_decompose(&a), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn squared_complex_determinant() {
        assert!((det_complex_sq(&Mat::identity(4, 4)).unwrap() - 1.0).norm() < 1e-14);
        let d = det_complex_sq(&block_rotation(&[0.4])).unwrap();
        assert!((d - Complex64::from_polar(1.0, 0.8)).norm() < 1e-14);
        let d = det_complex_sq(&block_rotation(&[0.4, 1.1])).unwrap();
        assert!((d - Complex64::from_polar(1.0, 3.0)).norm() < 1e-14);
        assert!(det_complex_sq(&stretch(&[2.0])).is_err());
    }

    #[test]
    fn lifts_of_basic_paths() {
        let c = SympPath::constant(2, 1.0);
        assert!(lift_angle(&c).unwrap().samples.iter().all(|s| s.1 == 0.0));

        let p = rotation_path(&[2.0 * PI], 1.0, 32).unwrap();
        assert!((lift_angle(&p).unwrap().theta_end() - 2.0 * PI).abs() < EPS_THETA);

        let p = rotation_path(&[2.0 * PI, -2.0 * PI], 1.0, 32).unwrap();
        assert!(lift_angle(&p).unwrap().theta_end().abs() < EPS_THETA);
    }

    #[test]
    fn lift_refuses_coarse_sampling() {
        let samples = vec![(0.0, Mat::identity(2, 2)), (1.0, block_rotation(&[2.0]))];
        let p = SympPath::new(samples).unwrap();
        assert!(matches!(lift_angle(&p), Err(Error::LiftGuard { .. })));
    }

    #[test]
    fn iterate_matches_longer_rotation() {
        let p = rotation_path(&[PI], 1.0, 16).unwrap();
        assert_eq!(iterate_path(&p, 1).len(), p.len());
        let it = iterate_path(&p, 2);
        let long = rotation_path(&[PI], 2.0, 32).unwrap();
        assert_eq!(it.len(), long.len());
        for (a, b) in it.matrices().iter().zip(long.matrices()) {
            assert!(close(a, b, 1e-12));
        }
        let it3 = iterate_path(&p, 3);
        assert!(close(it3.endpoint(), &(p.endpoint() * p.endpoint() * p.endpoint()), 1e-12));
    }

    #[test]
    fn catenation_of_rotations() {
        let p = rotation_path(&[PI], 1.0, 16).unwrap();
        let cat = catenate(&p, &p).unwrap();
        let long = rotation_path(&[PI], 2.0, 32).unwrap();
        for (a, b) in cat.matrices().iter().zip(long.matrices()) {
            assert!(close(a, b, 1e-12));
        }
        let tail = catenate(&p, &SympPath::constant(1, 0.5)).unwrap();
        assert!((tail.duration() - 1.5).abs() < 1e-15);
        assert!(close(tail.endpoint(), p.endpoint(), 0.0));
        assert!(catenate(&p, &SympPath::constant(2, 1.0)).is_err());
    }

    #[test]
    fn rotation_path_endpoints() {
        let p = rotation_path(&[0.0], 3.0, 4).unwrap();
        assert!(p.matrices().iter().all(|m| close(m, &Mat::identity(2, 2), 0.0)));
        assert!(rotation_path(&[2.0 * PI], 1.0, 16).unwrap().is_loop());
        let p = rotation_path(&[PI, -PI], 1.0, 16).unwrap();
        assert!(close(p.endpoint(), &-Mat::identity(4, 4), 1e-12));
        assert!(rotation_path(&[PI], 1.0, 4).is_err());
    }

    #[test]
    fn direct_sum_of_rotations_is_block_rotation() {
        let a = block_rotation(&[0.3]);
        let b = block_rotation(&[1.2, -0.5]);
        assert!(close(&direct_sum(&a, &b), &block_rotation(&[0.3, 1.2, -0.5]), 0.0));
    }

    #[test]
    fn json_roundtrip() {
        let p = rotation_path(&[1.0, 2.0], 1.0, 8).unwrap();
        let back = SympPath::from_json(&p.to_json()).unwrap();
        assert_eq!(back.n(), 2);
        for (a, b) in back.matrices().iter().zip(p.matrices()) {
            assert!(close(a, b, 0.0));
        }
        assert!(SympPath::from_json(r#"[{"t": 0, "A": [1, 0, 0]}]"#).is_err());
        assert!(SympPath::from_json(r#"[{"t": 0, "A": [2, 0, 0, 2]}]"#).is_err());
        assert!(SympPath::from_json(r#"[{"t": 0, "A": [1, 0, 0, 1]}, {"t": 0, "A": [1, 0, 0, 1]}]"#).is_err());
    }
}
