//! Indices of symplectic paths.
//!
//! Conley-Zehnder and Robbin-Salamon indices of sampled paths are computed as the
//! Maslov index of the graph `{(Cz, Psi z)}` against the diagonal, where `C`
//! conjugates the first factor so that the graph is Lagrangian for the standard
//! form on `R^{4n}`. The unitary and mean indices come from the angle lift.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rational::{self, Q};
use crate::symplin::{
    self, block_rotation, catenate, complex_form, iterate_path, lift_angle, polar_decompose,
    unitary_eigen_angles, CMat, Mat, SympPath, EPS_THETA,
};

/// Threshold on `|det(Psi(T) - I)|` below which an endpoint counts as degenerate.
pub const EPS_ND: f64 = 1e-8;
/// Slope reported by [`wip_fit`] when the samples do not bound it.
pub const KAPPA1_CAP: f64 = 1e6;
pub const DEFAULT_K_MAX: usize = 64;

const EIGEN_ONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndexValue {
    Cz { value: i64 },
    Rs {
        #[serde(with = "rational")]
        value: Q,
    },
    Mean { value: f64, error: f64 },
    Unitary { value: f64 },
    Dgw { value: f64 },
}

impl IndexValue {
    pub fn kind(&self) -> &'static str {
        match self {
            IndexValue::Cz { .. } => "cz",
            IndexValue::Rs { .. } => "rs",
            IndexValue::Mean { .. } => "mean",
            IndexValue::Unitary { .. } => "unitary",
            IndexValue::Dgw { .. } => "dgw",
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            IndexValue::Cz { value } => *value as f64,
            IndexValue::Rs { value } => rational::to_f64(value),
            IndexValue::Mean { value, .. } | IndexValue::Unitary { value } | IndexValue::Dgw { value } => *value,
        }
    }
}

/// `theta(T) / pi` in the standard frame.
pub fn unitary_index(path: &SympPath) -> Result<f64> {
    Ok(lift_angle(path)?.theta_end() / PI)
}

/// `(1/pi) sum_j phi_j` over the principal eigen-angles of the unitary part of `A`.
pub fn dgw_index(a: &Mat) -> Result<f64> {
    let u = polar_decompose(a)?.u;
    let angles = unitary_eigen_angles(&complex_form(&u))?;
    Ok(angles.iter().sum::<f64>() / PI)
}

fn rotation_endpoint_det(rates: &[f64], t_end: f64) -> f64 {
    rates.iter().map(|w| 2.0 - 2.0 * (w * t_end).cos()).product()
}

/// Closed form for `t -> (+)_j R(w_j t)` on `[0, T]`.
pub fn conley_zehnder_rot(rates: &[f64], t_end: f64) -> Result<i64> {
    let det = rotation_endpoint_det(rates, t_end);
    if det.abs() < EPS_ND {
        return Err(Error::Degenerate { det });
    }
    Ok(rates
        .iter()
        .map(|&w| {
            let x = (w.abs() * t_end / (2.0 * PI)).floor() as i64;
            (2 * x + 1) * w.signum() as i64
        })
        .sum())
}

/// Conley-Zehnder index of a sampled path with nondegenerate endpoint.
pub fn conley_zehnder(path: &SympPath) -> Result<i64> {
    let n = path.n();
    let det = (path.endpoint() - Mat::identity(2 * n, 2 * n)).determinant();
    if det.abs() < EPS_ND {
        return Err(Error::Degenerate { det });
    }
    let mu = graph_maslov(path)?;
    if !mu.is_integer() {
        return Err(Error::InvalidPath(format!("non-integral index {mu} at a nondegenerate endpoint")));
    }
    Ok(mu.to_integer())
}

/// Robbin-Salamon index of a sampled path; endpoint degeneracy is allowed.
pub fn robbin_salamon_sampled(path: &SympPath) -> Result<Q> {
    graph_maslov(path)
}

/// Unitary `2n x 2n` frame of the Lagrangian `{(Cz, Psi z)}` in `C^{2n}`.
fn graph_frame(psi: &Mat) -> Result<CMat> {
    let dim = psi.nrows();
    let n = dim / 2;
    let gram = Mat::identity(dim, dim) + psi.transpose() * psi;
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 100_000).ok_or(Error::Eigen)?;
    let inv_sqrt = &eig.eigenvectors
        * Mat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let top = Mat::from_fn(dim, dim, |r, c| if r != c { 0.0 } else if r < n { 1.0 } else { -1.0 }) * &inv_sqrt;
    let bottom = psi * &inv_sqrt;
    Ok(CMat::from_fn(dim, dim, |r, c| {
        let block = if r < n { &top } else { &bottom };
        let i = r % n;
        Complex64::new(block[(i, c)], block[(n + i, c)])
    }))
}

fn graph_maslov(path: &SympPath) -> Result<Q> {
    let dim = 2 * path.n();
    let diag = graph_frame(&Mat::identity(dim, dim))?;
    let diag_adj = diag.adjoint();
    let forms = path
        .matrices()
        .iter()
        .map(|psi| {
            let w = &diag_adj * graph_frame(psi)?;
            Ok(&w * w.transpose())
        })
        .collect::<Result<Vec<_>>>()?;
    let lifted = symplin::lift_forms(path.times(), &forms, 0.0)?.theta_end();

    let mut principal = 0.0;
    for a in unitary_eigen_angles(forms.last().unwrap())? {
        let a = if a < 0.0 { a + 2.0 * PI } else { a };
        let near_one = Complex64::from_polar(1.0, a) - 1.0;
        principal += if near_one.norm() < EIGEN_ONE_TOL { PI } else { a };
    }
    let twice = (lifted - principal) / PI + dim as f64;
    let rounded = twice.round();
    if (twice - rounded).abs() > 1e-6 {
        return Err(Error::InvalidPath(format!("index {} is not a half-integer", twice / 2.0)));
    }
    Ok(Q::new(rounded as i64, 2))
}

/// One block of an analytic path; all blocks run over the same interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    /// `R(w t)`.
    Rotation(f64),
    /// `diag(e^{s t}, e^{-s t})`.
    Stretch(f64),
    /// `[[1, b t], [0, 1]]`.
    Shear(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPath {
    pub blocks: Vec<Block>,
    pub t_end: f64,
}

impl AnalyticPath {
    pub fn rotation(rates: &[f64], t_end: f64) -> Self {
        AnalyticPath { blocks: rates.iter().map(|&w| Block::Rotation(w)).collect(), t_end }
    }

    pub fn matrix_at(&self, t: f64) -> Mat {
        let n = self.blocks.len();
        let mut m = Mat::zeros(2 * n, 2 * n);
        for (j, b) in self.blocks.iter().enumerate() {
            let blk = match *b {
                Block::Rotation(w) => block_rotation(&[w * t]),
                Block::Stretch(s) => symplin::stretch(&[(s * t).exp()]),
                Block::Shear(c) => Mat::from_row_slice(2, 2, &[1.0, c * t, 0.0, 1.0]),
            };
            m[(j, j)] = blk[(0, 0)];
            m[(j, n + j)] = blk[(0, 1)];
            m[(n + j, j)] = blk[(1, 0)];
            m[(n + j, n + j)] = blk[(1, 1)];
        }
        m
    }

    pub fn sample(&self, m: usize) -> Result<SympPath> {
        let samples = (0..=m)
            .map(|i| {
                let t = if i == m { self.t_end } else { self.t_end * i as f64 / m as f64 };
                (t, self.matrix_at(t))
            })
            .collect();
        SympPath::new(samples)
    }
}

/// Robbin-Salamon index from crossing forms of an analytic block path.
///
/// A rotation block with `x = |w| T / 2 pi` crosses at `t = 2 pi j / |w|`; each
/// interior crossing has signature `2 sgn(w)` and endpoint crossings count half.
pub fn robbin_salamon(path: &AnalyticPath) -> Result<Q> {
    let mut twice = 0_i64;
    for b in &path.blocks {
        match *b {
            Block::Rotation(w) if w != 0.0 => {
                let x = w.abs() * path.t_end / (2.0 * PI);
                let r = x.round();
                let count = if (x - r).abs() < 1e-9 { 4 * r as i64 } else { 4 * x.floor() as i64 + 2 };
                twice += count * w.signum() as i64;
            }
            Block::Shear(c) if c != 0.0 => {
                return Err(Error::NonIsolatedCrossing("a shear fixes a line for all time".into()));
            }
            _ => {}
        }
    }
    Ok(Q::new(twice, 2))
}

/// `theta(k T) / pi` against `k` for `k = 1..k_max`.
///
/// Loops return `theta(T)/pi`. For paths of unitary matrices each iterate's lift
/// repeats the first one up to conjugation, so the slope is also `theta(T)/pi`.
/// Otherwise the slope is a least-squares fit and the error is the largest residual.
pub fn mean_index(path: &SympPath, k_max: usize) -> Result<(f64, f64)> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be positive".into()));
    }
    let base = unitary_index(path)?;
    if path.is_loop() || path.is_unitary() || k_max == 1 {
        return Ok((base, 0.0));
    }
    let it = iterate_path(path, k_max);
    let track = lift_angle(&it)?;
    let stride = path.len() - 1;
    let ys: Vec<f64> = (1..=k_max).map(|k| track.samples[k * stride].1 / PI).collect();
    let kf = k_max as f64;
    let mean_x = (kf + 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / kf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = (i + 1) as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let icpt = mean_y - slope * mean_x;
    let err = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (y - slope * (i + 1) as f64 - icpt).abs())
        .fold(0.0, f64::max);
    Ok((slope, err))
}

/// Grading `mu_CZ + n - 3`.
pub fn degree(mu_cz: i64, n: i64) -> i64 {
    mu_cz + n - 3
}

pub fn catenation_defect(p1: &SympPath, p2: &SympPath) -> Result<f64> {
    let cat = catenate(p1, p2)?;
    Ok((unitary_index(&cat)? - unitary_index(p1)? - unitary_index(p2)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WipCertificate {
    pub kappa1: f64,
    pub kappa2: f64,
    pub witness_margin: f64,
}

/// Linear lower bound `mu >= kappa1 * action + kappa2` over `(action, mu)` samples.
///
/// `kappa1` is the slope of the lower convex hull at the largest action, the
/// steepest growth rate the samples support asymptotically. Returns `None` when
/// that slope is not positive. With a single distinct action the slope is
/// unconstrained and [`KAPPA1_CAP`] is used.
pub fn wip_fit(samples: &[(f64, f64)]) -> Result<Option<WipCertificate>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    if let Some(&(a, _)) = samples.iter().find(|s| !(s.0 > 0.0)) {
        return Err(Error::InvalidInput(format!("action {a} is not positive")));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pts.dedup_by(|later, earlier| later.0 == earlier.0);

    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let kappa1 = match hull.as_slice() {
        [.., a, b] => (b.1 - a.1) / (b.0 - a.0),
        _ => KAPPA1_CAP,
    };
    if !(kappa1 > 0.0) {
        return Ok(None);
    }
    let kappa1 = kappa1.min(KAPPA1_CAP);
    let slack: Vec<f64> = samples.iter().map(|&(a, m)| m - kappa1 * a).collect();
    let kappa2 = slack.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + kappa2.abs());
    let witness_margin = slack
        .iter()
        .map(|s| s - kappa2)
        .filter(|&d| d > tol)
        .fold(f64::INFINITY, f64::min);
    let witness_margin = if witness_margin.is_finite() { witness_margin } else { 0.0 };
    Ok(Some(WipCertificate { kappa1, kappa2, witness_margin }))
}

/// Rounds an index that is known to be a half-integer up to float noise.
pub fn nearest_half(x: f64) -> Option<Q> {
    let twice = (2.0 * x).round();
    ((2.0 * x - twice).abs() < EPS_THETA).then(|| Q::new(twice as i64, 2))
}

pub fn is_integral(q: &Q) -> bool {
    q.is_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::symplin::rotation_path;

    fn rot(rates: &[f64]) -> SympPath {
        rotation_path(rates, 1.0, symplin::default_samples(rates, 1.0)).unwrap()
    }

    #[test]
    fn unitary_index_examples() {
        assert_eq!(unitary_index(&SympPath::constant(1, 1.0)).unwrap(), 0.0);
        assert!((unitary_index(&rot(&[2.0 * PI])).unwrap() - 2.0).abs() < EPS_THETA);
        assert!((unitary_index(&rot(&[2.0 * PI, 2.0 * PI])).unwrap() - 4.0).abs() < EPS_THETA);
    }

    #[test]
    fn dgw_examples() {
        assert_eq!(dgw_index(&Mat::identity(2, 2)).unwrap(), 0.0);
        assert!(dgw_index(&symplin::stretch(&[2.0])).unwrap().abs() < 1e-12);
        assert!((dgw_index(&block_rotation(&[PI / 2.0])).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rotation_closed_form() {
        assert_eq!(conley_zehnder_rot(&[1.0], PI).unwrap(), 1);
        assert_eq!(conley_zehnder_rot(&[1.0], 3.0 * PI).unwrap(), 3);
        assert_eq!(conley_zehnder_rot(&[1.0, 1.0], PI).unwrap(), 2);
        assert_eq!(conley_zehnder_rot(&[-1.0], 3.0 * PI).unwrap(), -3);
        assert!(matches!(conley_zehnder_rot(&[2.0 * PI], 1.0), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn sampled_cz_examples() {
        assert_eq!(conley_zehnder(&rot(&[PI])).unwrap(), 1);
        assert_eq!(conley_zehnder(&rot(&[3.0 * PI])).unwrap(), 3);
        assert_eq!(conley_zehnder(&rot(&[-3.0 * PI])).unwrap(), -3);
        assert_eq!(conley_zehnder(&rot(&[PI, 5.0 * PI])).unwrap(), 6);
        let stretch = AnalyticPath { blocks: vec![Block::Stretch(2f64.ln())], t_end: 1.0 };
        assert_eq!(conley_zehnder(&stretch.sample(16).unwrap()).unwrap(), 0);
        assert!(matches!(conley_zehnder(&rot(&[2.0 * PI])), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn robbin_salamon_examples() {
        assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[2.0 * PI], 1.0)).unwrap(), qi(2));
        assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[0.0], 1.0)).unwrap(), qi(0));
        assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[PI], 1.0)).unwrap(), qi(1));
        assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[-4.0 * PI, PI], 1.0)).unwrap(), qi(-3));
        let shear = AnalyticPath { blocks: vec![Block::Shear(1.0)], t_end: 1.0 };
        assert!(matches!(robbin_salamon(&shear), Err(Error::NonIsolatedCrossing(_))));
    }

    #[test]
    fn sampled_rs_matches_crossing_forms_on_degenerate_paths() {
        assert_eq!(robbin_salamon_sampled(&rot(&[2.0 * PI])).unwrap(), qi(2));
        assert_eq!(robbin_salamon_sampled(&rot(&[4.0 * PI, PI])).unwrap(), qi(5));
        assert_eq!(robbin_salamon_sampled(&SympPath::constant(2, 1.0)).unwrap(), qi(0));
    }

    #[test]
    fn mean_index_examples() {
        let (m, e) = mean_index(&rot(&[3.0 * PI]), DEFAULT_K_MAX).unwrap();
        assert!((m - 3.0).abs() < EPS_THETA && e == 0.0);
        assert_eq!(mean_index(&SympPath::constant(1, 1.0), DEFAULT_K_MAX).unwrap().0, 0.0);
        let (m, _) = mean_index(&rot(&[2.0 * PI, 4.0 * PI]), DEFAULT_K_MAX).unwrap();
        assert!((m - 6.0).abs() < EPS_THETA);
    }

    #[test]
    fn mean_index_of_hyperbolic_path_is_fitted() {
        let p = AnalyticPath { blocks: vec![Block::Stretch(0.5)], t_end: 1.0 }.sample(8).unwrap();
        let (m, e) = mean_index(&p, 16).unwrap();
        assert!(m.abs() < 1e-9 && e < 1e-9);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(2, 2), 1);
        assert_eq!(degree(4, 2), 3);
        assert_eq!(degree(0, 3), 0);
    }

    #[test]
    fn catenation_defect_examples() {
        let p = rot(&[1.3, -0.4]);
        assert!(catenation_defect(&p, &SympPath::constant(2, 1.0)).unwrap() < EPS_THETA);
        assert!(catenation_defect(&p, &rot(&[0.9, 2.2])).unwrap() < EPS_THETA);
    }

    #[test]
    fn wip_examples() {
        let line: Vec<_> = (1..6).map(|a| (a as f64, 2.0 * a as f64 + 1.0)).collect();
        let c = wip_fit(&line).unwrap().unwrap();
        assert!((c.kappa1 - 2.0).abs() < 1e-12 && (c.kappa2 - 1.0).abs() < 1e-12);
        assert_eq!(c.witness_margin, 0.0);

        let c = wip_fit(&[(1.0, 5.0)]).unwrap().unwrap();
        assert_eq!(c.kappa1, KAPPA1_CAP);
        assert_eq!(c.kappa2, 5.0 - KAPPA1_CAP);

        assert!(wip_fit(&[(1.0, 5.0), (2.0, 3.0), (3.0, 1.0)]).unwrap().is_none());
        assert!(wip_fit(&[(0.0, 1.0)]).is_err());

        let c = wip_fit(&[(1.0, 3.0), (2.0, 4.0), (3.0, 7.0)]).unwrap().unwrap();
        assert!((c.kappa1 - 3.0).abs() < 1e-12 && (c.kappa2 + 2.0).abs() < 1e-12);
        assert!((c.witness_margin - 2.0).abs() < 1e-12);
    }

    #[test]
    fn index_value_reports() {
        let v = IndexValue::Rs { value: q(3, 2) };
        assert_eq!(v.kind(), "rs");
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"kind":"rs","value":{"num":3,"den":2}}"#);
        assert_eq!(nearest_half(1.4999999999), Some(q(3, 2)));
        assert!(is_integral(&qi(4)) && !is_integral(&q(1, 2)));
    }
}
