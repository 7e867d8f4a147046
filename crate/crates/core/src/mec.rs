//! Mean Euler characteristics, the truncated-complex oracle, and surgery bookkeeping.
//!
//! All arithmetic here is exact.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbit_model::{
    e_invariant, enumerate_generators, orbifold_sign, validate_af, validate_mb, AfModel, DegreeRule, Model,
    Multiset, OrbitType, PrincipalOrbitFamily,
};
use crate::rational::{self, q, qi, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MecValue {
    #[serde(with = "rational::option")]
    pub chi_plus: Option<Q>,
    #[serde(with = "rational::option")]
    pub chi_minus: Option<Q>,
    #[serde(with = "rational::option")]
    pub chi: Option<Q>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl MecValue {
    pub fn new(chi_plus: Q, chi_minus: Q) -> Self {
        MecValue {
            chi_plus: Some(chi_plus),
            chi_minus: Some(chi_minus),
            chi: Some((chi_plus + chi_minus) / qi(2)),
            diagnostics: Vec::new(),
        }
    }

    pub fn undefined(reason: String) -> Self {
        MecValue { chi_plus: None, chi_minus: None, chi: None, diagnostics: vec![reason] }
    }

    pub fn is_defined(&self) -> bool {
        self.chi.is_some()
    }

    /// `(chi+, chi-)`, or the reason they are missing.
    pub fn halves(&self) -> Result<(Q, Q)> {
        match (self.chi_plus, self.chi_minus) {
            (Some(p), Some(m)) => Ok((p, m)),
            _ => Err(Error::Undefined(self.diagnostics.join("; "))),
        }
    }
}

fn split_by_sign(terms: impl IntoIterator<Item = (Q, Q)>) -> MecValue {
    let (mut plus, mut minus) = (qi(0), qi(0));
    for (weight, delta) in terms {
        if delta > qi(0) {
            plus += weight / delta;
        } else {
            minus += weight / delta;
        }
    }
    MecValue::new(plus, minus)
}

/// `chi+- = sum sigma/Delta` over type I families plus half of it over type II,
/// split by the sign of `Delta`.
pub fn mec_af(model: &AfModel) -> Result<MecValue> {
    let violations = validate_af(model);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if !model.no_low_degree && !model.linearized {
        return Err(Error::Validation(vec![
            "orbits of degree -1, 0 or 1 are not excluded (set no_low_degree or use the linearized theory)".into(),
        ]));
    }
    Ok(split_by_sign(model.families.iter().map(|f| {
        let weight = match f.orbit_type {
            OrbitType::I => qi(f.sigma as i64),
            OrbitType::II => q(f.sigma as i64, 2),
        };
        (weight, f.delta)
    })))
}

/// `chi+- = sum sigma(S_T) e(S_T) / Delta(S_T)` over maximal orbifolds.
pub fn mec_mb(model: &crate::orbit_model::MbModel) -> Result<MecValue> {
    let violations = validate_mb(model);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if !model.good_only {
        return Err(Error::Validation(vec!["the formula needs good_only: every Reeb orbit must be good".into()]));
    }
    let mut terms = Vec::with_capacity(model.maximal.len());
    for s in &model.maximal {
        let delta = s
            .mu_rs_rule
            .delta()
            .ok_or_else(|| Error::IncompleteData(format!("'{}' has no affine mu_RS rule, so no mean index", s.label)))?;
        if delta == qi(0) {
            return Ok(MecValue::undefined(format!(
                "'{}' has mean index 0, so the chain groups are infinite dimensional",
                s.label
            )));
        }
        let sign = orbifold_sign(s, model.n)?;
        let e = e_invariant(&s.strata)?;
        terms.push((qi(sign as i64 * e), delta));
    }
    Ok(split_by_sign(terms))
}

pub fn mec(model: &Model) -> Result<MecValue> {
    match model {
        Model::Af(m) => mec_af(m),
        Model::Mb(m) => mec_mb(m),
    }
}

/// Lower end `l+ = 2n - 4` of the positive window.
pub fn l_plus(n: u32) -> i64 {
    2 * n as i64 - 4
}

/// Upper end `l- = -2` of the negative window.
pub const L_MINUS: i64 = -2;

fn alternating(ms: &Multiset) -> i64 {
    ms.iter().map(|(&d, &c)| if d.rem_euclid(2) == 0 { c as i64 } else { -(c as i64) }).sum()
}

/// `sum_{l = l+}^{N} (-1)^l dim C_l`.
pub fn truncated_euler(model: &Model, n_max: i64) -> Result<Q> {
    Ok(qi(alternating(&enumerate_generators(model, l_plus(model.n()), n_max)?)))
}

/// `sum_{l = -N}^{l-} (-1)^l dim C_l`.
pub fn truncated_euler_minus(model: &Model, n_max: i64) -> Result<Q> {
    Ok(qi(alternating(&enumerate_generators(model, -n_max, L_MINUS)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub n_max: i64,
    #[serde(with = "rational")]
    pub plus: Q,
    #[serde(with = "rational")]
    pub minus: Q,
    /// `|estimate - closed form| * N` for each side.
    #[serde(with = "rational")]
    pub dev_plus: Q,
    #[serde(with = "rational")]
    pub dev_minus: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    #[serde(with = "rational")]
    pub fitted_plus: Q,
    #[serde(with = "rational")]
    pub fitted_minus: Q,
    #[serde(with = "rational")]
    pub max_dev: Q,
    pub closed_form: MecValue,
}

impl OracleReport {
    /// The deviation constant stays bounded: the last is at most twice the first, or 2.
    pub fn is_bounded(&self) -> bool {
        let first = self.rows.first().map(|r| r.dev_plus.max(r.dev_minus)).unwrap_or(qi(0));
        let last = self.rows.last().map(|r| r.dev_plus.max(r.dev_minus)).unwrap_or(qi(0));
        last <= (first * qi(2)).max(qi(2))
    }
}

/// Truncated counts `chi_N / N` against the closed form.
///
/// The negative side counts degrees in `[-N, l-]` and is reported with the sign
/// that matches `sigma / Delta` for `Delta < 0`. The fitted limit assumes
/// `chi_N / N = L + c / N` through the two largest cutoffs.
pub fn oracle_convergence(model: &Model, n_list: &[i64]) -> Result<OracleReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty cutoff list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] <= 0 {
        return Err(Error::InvalidInput("cutoffs must be positive and strictly increasing".into()));
    }
    let closed = mec(model)?;
    let (cp, cm) = closed.halves()?;
    let mut rows = Vec::with_capacity(n_list.len());
    let mut raw = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let tp = truncated_euler(model, n)?;
        let tm = -truncated_euler_minus(model, n)?;
        let (ep, em) = (tp / qi(n), tm / qi(n));
        rows.push(OracleRow { n_max: n, plus: ep, minus: em, dev_plus: (ep - cp).abs() * qi(n), dev_minus: (em - cm).abs() * qi(n) });
        raw.push((n, tp, tm));
    }
    let fit = |pick: fn(&(i64, Q, Q)) -> Q| match raw.as_slice() {
        [.., a, b] => (pick(b) - pick(a)) / qi(b.0 - a.0),
        [a] => pick(a) / qi(a.0),
        [] => unreachable!(),
    };
    let fitted_plus = fit(|r| r.1);
    let fitted_minus = fit(|r| r.2);
    let max_dev = rows.iter().map(|r| r.dev_plus.max(r.dev_minus)).max().unwrap();
    Ok(OracleReport { rows, fitted_plus, fitted_minus, max_dev, closed_form: closed })
}

/// `{2n - k - 4 + 2m : m >= 1} ∩ (-inf, r]`.
pub fn surgery_generators(n: u32, k: u32, r: i64) -> Result<Vec<i64>> {
    check_subcritical(n, k)?;
    let first = 2 * n as i64 - k as i64 - 2;
    Ok((0..).map(|m| first + 2 * m).take_while(|&d| d <= r).collect())
}

fn check_subcritical(n: u32, k: u32) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::NotSubcritical { k, n });
    }
    Ok(())
}

/// The principal family created by a subcritical handle of index `k`.
pub fn handle_family(n: u32, k: u32) -> Result<PrincipalOrbitFamily> {
    check_subcritical(n, k)?;
    Ok(PrincipalOrbitFamily {
        label: format!("handle_k{k}"),
        orbit_type: OrbitType::I,
        sigma: if k % 2 == 0 { 1 } else { -1 },
        delta: qi(2),
        degree_rule: Some(DegreeRule { a: 2, b: 2 * n as i64 - k as i64 - 4 }),
    })
}

/// Adds the handle family to `model`.
///
/// In dimension 3 the handle creates an orbit of degree 1, so the cylindrical
/// theory refuses; `linearized` accepts it and drops `no_low_degree`.
pub fn af_surgery(model: &AfModel, k: u32, linearized: bool) -> Result<AfModel> {
    check_subcritical(model.n, k)?;
    if model.n == 2 && !linearized {
        return Err(Error::DimensionThree);
    }
    let mut family = handle_family(model.n, k)?;
    let base = family.label.clone();
    let mut i = 1;
    while model.families.iter().any(|f| f.label == family.label) {
        i += 1;
        family.label = format!("{base}_{i}");
    }
    let mut out = model.clone();
    out.families.push(family);
    if linearized {
        out.linearized = true;
        if model.n == 2 {
            out.no_low_degree = false;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurgeryMode {
    /// `chi` moves by `(-1)^k / 2`.
    Corollary,
    /// `chi+` moves by the handle family's `sigma / Delta = (-1)^k / 2`.
    Generator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurgeryStep {
    pub k: u32,
    pub n: u32,
    pub mode: SurgeryMode,
    pub linearized: bool,
}

pub fn surgery_apply(v: &MecValue, step: &SurgeryStep) -> Result<MecValue> {
    check_subcritical(step.n, step.k)?;
    if step.n == 2 && !step.linearized {
        return Err(Error::DimensionThree);
    }
    let (plus, minus) = v.halves()?;
    let sign = if step.k % 2 == 0 { 1 } else { -1 };
    Ok(match step.mode {
        SurgeryMode::Generator => MecValue::new(plus + q(sign, 2), minus),
        SurgeryMode::Corollary => MecValue::new(plus + qi(sign), minus),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reachability {
    pub reachable: bool,
    pub even_surgeries: u64,
    pub odd_surgeries: u64,
    pub reason: String,
}

/// Necessary condition for reaching `target` from `source` by subcritical surgeries.
///
/// Each surgery moves the tracked coordinate by `+-1/2`, so the difference must
/// lie in `1/2 Z`; the certificate is the smallest count of one parity.
pub fn reachability_necessary(source: &MecValue, target: &MecValue, mode: SurgeryMode) -> Result<Reachability> {
    let (sp, sm) = source.halves()?;
    let (tp, tm) = target.halves()?;
    let diff = match mode {
        SurgeryMode::Generator => {
            if sm != tm {
                return Ok(Reachability {
                    reachable: false,
                    even_surgeries: 0,
                    odd_surgeries: 0,
                    reason: format!("chi- differs ({sm} vs {tm}) and surgeries leave it fixed"),
                });
            }
            tp - sp
        }
        SurgeryMode::Corollary => (tp + tm - sp - sm) / qi(2),
    };
    let twice = diff * qi(2);
    if !twice.is_integer() {
        return Ok(Reachability {
            reachable: false,
            even_surgeries: 0,
            odd_surgeries: 0,
            reason: format!("difference {diff} is not a multiple of 1/2"),
        });
    }
    let steps = twice.to_integer();
    Ok(Reachability {
        reachable: true,
        even_surgeries: steps.max(0) as u64,
        odd_surgeries: (-steps).max(0) as u64,
        reason: format!("difference {diff}"),
    })
}
