//! Declarative closed-Reeb-orbit data.
//!
//! Asymptotically finite models list principal orbit families with an affine
//! degree rule `|gamma^k| = a k + b`. Morse-Bott models list maximal Reeb
//! orbifolds with a stratification whose containment relation is a DAG.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::rational::{self, qi, Q};

/// Degree to number of generators.
pub type Multiset = BTreeMap<i64, u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitType {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeRule {
    pub a: i64,
    pub b: i64,
}

impl DegreeRule {
    pub fn at(&self, k: i64) -> i64 {
        self.a * k + self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalOrbitFamily {
    pub label: String,
    pub orbit_type: OrbitType,
    pub sigma: i8,
    #[serde(with = "rational")]
    pub delta: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_rule: Option<DegreeRule>,
}

impl PrincipalOrbitFamily {
    /// Iterates contributing generators: all for type I, odd ones for type II.
    pub fn is_good_iterate(&self, k: i64) -> bool {
        self.orbit_type == OrbitType::I || k % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfModel {
    pub n: u32,
    pub families: Vec<PrincipalOrbitFamily>,
    pub no_low_degree: bool,
    /// Linearized theory: orbits of degree -1, 0, 1 are tolerated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub linearized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stratum {
    pub label: String,
    pub cover_multiple: u32,
    pub euler_underlying: i64,
    pub dim: u32,
    pub stab_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse_indices: Option<Vec<u32>>,
    #[serde(default)]
    pub children: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MuRsRule {
    Affine {
        #[serde(with = "rational")]
        a: Q,
        #[serde(with = "rational")]
        b: Q,
    },
    /// `mu_RS(S_{kT})` for `k = 1, 2, ...`.
    Sequence(#[serde(with = "rational_vec")] Vec<Q>),
}

mod rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "rational")] Q);

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| W(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

impl MuRsRule {
    pub fn at(&self, k: u32) -> Option<Q> {
        match self {
            MuRsRule::Affine { a, b } => Some(*a * qi(k as i64) + b),
            MuRsRule::Sequence(v) => v.get(k.checked_sub(1)? as usize).copied(),
        }
    }

    /// Mean index `lim mu_RS(S_{kT}) / k`, available for affine rules only.
    pub fn delta(&self) -> Option<Q> {
        match self {
            MuRsRule::Affine { a, .. } => Some(*a),
            MuRsRule::Sequence(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalOrbifold {
    pub label: String,
    pub sigma: i8,
    pub mu_rs_rule: MuRsRule,
    pub dim: u32,
    pub strata: Vec<Stratum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbModel {
    pub n: u32,
    pub maximal: Vec<MaximalOrbifold>,
    pub good_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Af(AfModel),
    Mb(MbModel),
}

impl Model {
    pub fn n(&self) -> u32 {
        match self {
            Model::Af(m) => m.n,
            Model::Mb(m) => m.n,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            Model::Af(m) => validate_af(m),
            Model::Mb(m) => validate_mb(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestKind {
    Af,
    Mb,
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub kind: ManifestKind,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<PrincipalOrbitFamily>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_low_degree: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximal: Option<Vec<MaximalOrbifold>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_only: Option<bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn from_model(model: &Model) -> Self {
        let mut m = Manifest {
            kind: ManifestKind::Af,
            n: model.n(),
            families: None,
            no_low_degree: None,
            linearized: None,
            maximal: None,
            good_only: None,
            metadata: BTreeMap::new(),
        };
        match model {
            Model::Af(af) => {
                m.families = Some(af.families.clone());
                m.no_low_degree = Some(af.no_low_degree);
                m.linearized = af.linearized.then_some(true);
            }
            Model::Mb(mb) => {
                m.kind = ManifestKind::Mb;
                m.maximal = Some(mb.maximal.clone());
                m.good_only = Some(mb.good_only);
            }
        }
        m
    }

    pub fn into_model(self) -> Result<Model> {
        let misplaced = |field: &str| Error::InvalidInput(format!("field '{field}' does not belong to kind {:?}", self.kind));
        match self.kind {
            ManifestKind::Af => {
                if self.maximal.is_some() {
                    return Err(misplaced("maximal"));
                }
                if self.good_only.is_some() {
                    return Err(misplaced("good_only"));
                }
                Ok(Model::Af(AfModel {
                    n: self.n,
                    families: self.families.ok_or_else(|| Error::InvalidInput("missing field 'families'".into()))?,
                    no_low_degree: self.no_low_degree.unwrap_or(false),
                    linearized: self.linearized.unwrap_or(false),
                }))
            }
            ManifestKind::Mb => {
                for (name, present) in [
                    ("families", self.families.is_some()),
                    ("no_low_degree", self.no_low_degree.is_some()),
                    ("linearized", self.linearized.is_some()),
                ] {
                    if present {
                        return Err(misplaced(name));
                    }
                }
                Ok(Model::Mb(MbModel {
                    n: self.n,
                    maximal: self.maximal.ok_or_else(|| Error::InvalidInput("missing field 'maximal'".into()))?,
                    good_only: self.good_only.unwrap_or(false),
                }))
            }
        }
    }
}

/// Parses a manifest; parse errors carry line and column.
pub fn parse_manifest(text: &str) -> Result<Model> {
    let manifest: Manifest = serde_json::from_str(text)?;
    manifest.into_model()
}

pub fn to_manifest_json(model: &Model) -> String {
    serde_json::to_string_pretty(&Manifest::from_model(model)).expect("manifest serializes")
}

fn parity_sign(d: i64) -> i8 {
    if d.rem_euclid(2) == 0 { 1 } else { -1 }
}

/// Admissible range of `|gamma^k| - k Delta`.
pub fn af_window(n: u32) -> (i64, i64) {
    (-2, 2 * n as i64 - 4)
}

pub fn validate_af(model: &AfModel) -> Vec<String> {
    let mut out = Vec::new();
    if model.n < 2 {
        out.push(format!("n = {} must be at least 2", model.n));
    }
    let mut seen = HashSet::new();
    for f in &model.families {
        let at = format!("family '{}'", f.label);
        if !seen.insert(f.label.as_str()) {
            out.push(format!("{at}: duplicate label"));
        }
        if f.sigma != 1 && f.sigma != -1 {
            out.push(format!("{at}: sigma {} is not +1 or -1", f.sigma));
        }
        if f.delta == qi(0) {
            out.push(format!("{at}: mean index must be nonzero"));
        }
        let Some(rule) = f.degree_rule else { continue };
        if qi(rule.a) != f.delta {
            out.push(format!("{at}: degree slope {} differs from mean index {}", rule.a, f.delta));
        }
        match (f.orbit_type, rule.a.rem_euclid(2)) {
            (OrbitType::I, 1) => out.push(format!("{at}: type I needs an even slope, got {}", rule.a)),
            (OrbitType::II, 0) => out.push(format!("{at}: type II needs an odd slope, got {}", rule.a)),
            _ => {}
        }
        let parity = parity_sign(rule.a + rule.b);
        if f.sigma != parity {
            out.push(format!("{at}: sigma {} disagrees with degree parity {}", f.sigma, parity));
        }
        let (lo, hi) = af_window(model.n);
        if rule.b < lo || rule.b > hi {
            out.push(format!("{at}: offset {} outside the window [{lo}, {hi}]", rule.b));
        }
        if model.no_low_degree {
            let reach = (rule.b.abs() + 2) / rule.a.abs().max(1) + 2;
            if let Some(k) = (1..=reach).find(|&k| f.is_good_iterate(k) && rule.at(k).abs() <= 1) {
                out.push(format!("{at}: iterate {k} has degree {} although no_low_degree is set", rule.at(k)));
            }
        }
    }
    out
}

fn stratum_map(strata: &[Stratum]) -> std::result::Result<BTreeMap<&str, &Stratum>, String> {
    let mut map = BTreeMap::new();
    for s in strata {
        if map.insert(s.label.as_str(), s).is_some() {
            return Err(format!("duplicate stratum label '{}'", s.label));
        }
    }
    for s in strata {
        if let Some(c) = s.children.iter().find(|c| !map.contains_key(c.as_str())) {
            return Err(format!("stratum '{}' lists unknown child '{c}'", s.label));
        }
    }
    Ok(map)
}

/// Labels in an order where every stratum follows all of its descendants.
fn bottom_up(strata: &[Stratum]) -> Result<Vec<String>> {
    let map = stratum_map(strata).map_err(Error::Inconsistent)?;
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    let mut order = Vec::new();
    fn visit<'a>(
        label: &'a str,
        map: &BTreeMap<&'a str, &'a Stratum>,
        state: &mut BTreeMap<&'a str, u8>,
        order: &mut Vec<String>,
    ) -> Result<()> {
        match state.get(label) {
            Some(2) => return Ok(()),
            Some(1) => return Err(Error::Cycle(label.to_string())),
            _ => {}
        }
        state.insert(label, 1);
        for c in &map[label].children {
            visit(c, map, state, order)?;
        }
        state.insert(label, 2);
        order.push(label.to_string());
        Ok(())
    }
    for s in strata {
        visit(&s.label, &map, &mut state, &mut order)?;
    }
    Ok(order)
}

/// All strata contained in each stratum, excluding itself.
pub(crate) fn descendants(strata: &[Stratum]) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let order = bottom_up(strata)?;
    let map = stratum_map(strata).map_err(Error::Inconsistent)?;
    let mut desc: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for label in &order {
        let mut set = BTreeSet::new();
        for c in &map[label.as_str()].children {
            set.insert(c.clone());
            set.extend(desc[c].iter().cloned());
        }
        desc.insert(label.clone(), set);
    }
    Ok(desc)
}

fn top_strata(strata: &[Stratum]) -> Vec<&Stratum> {
    let children: HashSet<&str> = strata.iter().flat_map(|s| s.children.iter().map(String::as_str)).collect();
    strata.iter().filter(|s| !children.contains(s.label.as_str())).collect()
}

fn alternating_sum(indices: &[u32]) -> i64 {
    indices.iter().map(|&i| if i % 2 == 0 { 1 } else { -1 }).sum()
}

pub fn validate_mb(model: &MbModel) -> Vec<String> {
    let mut out = Vec::new();
    if model.n < 2 {
        out.push(format!("n = {} must be at least 2", model.n));
    }
    let mut seen = HashSet::new();
    for s in &model.maximal {
        let at = format!("orbifold '{}'", s.label);
        if !seen.insert(s.label.as_str()) {
            out.push(format!("{at}: duplicate label"));
        }
        if s.sigma != 1 && s.sigma != -1 {
            out.push(format!("{at}: sigma {} is not +1 or -1", s.sigma));
        }
        if s.dim % 2 != 0 || s.dim > 2 * model.n - 2 {
            out.push(format!("{at}: dimension {} must be even and at most {}", s.dim, 2 * model.n - 2));
        }
        let half_dim = qi(s.dim as i64 / 2);
        match &s.mu_rs_rule {
            MuRsRule::Affine { a, b } => {
                if !a.is_integer() || !(*b - half_dim).is_integer() {
                    out.push(format!("{at}: mu_RS - dim/2 must be an integer for every iterate"));
                }
            }
            MuRsRule::Sequence(v) => {
                if v.is_empty() {
                    out.push(format!("{at}: empty mu_RS sequence"));
                }
                if v.iter().any(|x| !(*x - half_dim).is_integer()) {
                    out.push(format!("{at}: mu_RS - dim/2 must be an integer for every iterate"));
                }
            }
        }
        match orbifold_sign(s, model.n) {
            Ok(sign) if sign != s.sigma => out.push(format!("{at}: sigma {} disagrees with degree parity {sign}", s.sigma)),
            Err(e) => out.push(format!("{at}: {e}")),
            _ => {}
        }
        out.extend(validate_strata(s).into_iter().map(|v| format!("{at}: {v}")));
    }
    out
}

fn validate_strata(s: &MaximalOrbifold) -> Vec<String> {
    let mut out = Vec::new();
    if s.strata.is_empty() {
        return vec!["no strata".into()];
    }
    let map = match stratum_map(&s.strata) {
        Ok(m) => m,
        Err(e) => return vec![e],
    };
    if let Err(e) = bottom_up(&s.strata) {
        return vec![e.to_string()];
    }
    let tops = top_strata(&s.strata);
    if tops.len() != 1 {
        out.push(format!("expected exactly one top stratum, found {}", tops.len()));
    } else if tops[0].dim != s.dim {
        out.push(format!("top stratum dimension {} differs from orbifold dimension {}", tops[0].dim, s.dim));
    }
    let top_cover = tops.first().map(|t| t.cover_multiple as u64 * t.stab_order as u64);
    for x in &s.strata {
        let at = format!("stratum '{}'", x.label);
        if x.dim % 2 != 0 {
            out.push(format!("{at}: odd dimension {}", x.dim));
        }
        if x.stab_order == 0 || x.cover_multiple == 0 {
            out.push(format!("{at}: stabilizer order and cover multiple must be positive"));
        } else if top_cover.is_some_and(|c| c != x.cover_multiple as u64 * x.stab_order as u64) {
            out.push(format!("{at}: stabilizer order times cover multiple must match the top stratum"));
        }
        for c in &x.children {
            if map[c.as_str()].dim >= x.dim {
                out.push(format!("{at}: child '{c}' is not of lower dimension"));
            }
        }
        if let Some(ind) = &x.morse_indices {
            if let Some(i) = ind.iter().find(|&&i| i > x.dim) {
                out.push(format!("{at}: Morse index {i} exceeds dimension {}", x.dim));
            }
            if alternating_sum(ind) != x.euler_underlying {
                out.push(format!(
                    "{at}: Morse indices give Euler characteristic {}, expected {}",
                    alternating_sum(ind),
                    x.euler_underlying
                ));
            }
        }
    }
    out
}

/// `|S_{kT}| = mu_RS(S_{kT}) - dim/2 + n - 3`.
pub fn orbifold_degree(s: &MaximalOrbifold, k: u32, n: u32) -> Result<i64> {
    if k == 0 {
        return Err(Error::InvalidInput("iterate k must be positive".into()));
    }
    let mu = s
        .mu_rs_rule
        .at(k)
        .ok_or_else(|| Error::IncompleteData(format!("no mu_RS value for iterate {k} of '{}'", s.label)))?;
    let d = mu - qi(s.dim as i64 / 2) + qi(n as i64 - 3);
    if !d.is_integer() {
        return Err(Error::Inconsistent(format!("degree {d} of '{}' is not an integer", s.label)));
    }
    Ok(d.to_integer())
}

/// `(-1)^{|S_T|}`; a parity that changes between iterates marks a bad orbifold.
pub fn orbifold_sign(s: &MaximalOrbifold, n: u32) -> Result<i8> {
    let sign = parity_sign(orbifold_degree(s, 1, n)?);
    let changes = match &s.mu_rs_rule {
        MuRsRule::Affine { a, .. } => !a.is_integer() || a.to_integer() % 2 != 0,
        MuRsRule::Sequence(v) => (2..=v.len() as u32).any(|k| orbifold_degree(s, k, n).map(parity_sign).ok() != Some(sign)),
    };
    if changes {
        return Err(Error::Validation(vec![format!(
            "'{}' is a bad orbifold: the degree parity changes with the iterate",
            s.label
        )]));
    }
    Ok(sign)
}

/// `CHI(X) = chi(X) - sum of CHI over the strata contained in X`.
pub fn chi_hat(strata: &[Stratum]) -> Result<BTreeMap<String, i64>> {
    let desc = descendants(strata)?;
    let map = stratum_map(strata).map_err(Error::Inconsistent)?;
    let mut chi = BTreeMap::new();
    for label in bottom_up(strata)? {
        let v = map[label.as_str()].euler_underlying - desc[&label].iter().map(|d| chi[d]).sum::<i64>();
        chi.insert(label, v);
    }
    Ok(chi)
}

/// Critical points of each stratum not lying in a smaller stratum.
fn simple_cells(strata: &[Stratum]) -> Result<Option<BTreeMap<String, Vec<u32>>>> {
    if strata.iter().any(|s| s.morse_indices.is_none()) {
        return Ok(None);
    }
    let desc = descendants(strata)?;
    let map = stratum_map(strata).map_err(Error::Inconsistent)?;
    let mut simple: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for label in bottom_up(strata)? {
        let mut cells = map[label.as_str()].morse_indices.clone().unwrap();
        for d in &desc[&label] {
            for i in &simple[d] {
                let pos = cells.iter().position(|c| c == i).ok_or_else(|| {
                    Error::Inconsistent(format!("Morse data of '{label}' does not contain the cells of '{d}'"))
                })?;
                cells.swap_remove(pos);
            }
        }
        cells.sort_unstable();
        simple.insert(label, cells);
    }
    Ok(Some(simple))
}

/// `e = sum CHI(X_i) |Stab(X_i)|`, checked against the cell count when Morse data is complete.
pub fn e_invariant(strata: &[Stratum]) -> Result<i64> {
    let chi = chi_hat(strata)?;
    let e: i64 = strata.iter().map(|s| chi[&s.label] * s.stab_order as i64).sum();
    if let Some(cells) = e_cells(strata)? {
        if cells != e {
            return Err(Error::Inconsistent(format!("stratum sum {e} differs from cell sum {cells}")));
        }
    }
    Ok(e)
}

/// `sum (-1)^ind |Stab|` over critical points, `None` without complete Morse data.
pub fn e_cells(strata: &[Stratum]) -> Result<Option<i64>> {
    let Some(simple) = simple_cells(strata)? else { return Ok(None) };
    Ok(Some(
        strata
            .iter()
            .map(|s| alternating_sum(&simple[&s.label]) * s.stab_order as i64)
            .sum(),
    ))
}

fn add(ms: &mut Multiset, degree: i64, count: u64) {
    *ms.entry(degree).or_insert(0) += count;
}

/// Generators of the chain complex with degree in `[min_degree, max_degree]`.
pub fn enumerate_generators(model: &Model, min_degree: i64, max_degree: i64) -> Result<Multiset> {
    let mut out = Multiset::new();
    if min_degree > max_degree {
        return Ok(out);
    }
    match model {
        Model::Af(m) => {
            for f in &m.families {
                let rule = f
                    .degree_rule
                    .ok_or_else(|| Error::IncompleteData(format!("family '{}' has no degree rule", f.label)))?;
                for k in iterate_range(rule, min_degree, max_degree) {
                    if f.is_good_iterate(k) {
                        add(&mut out, rule.at(k), 1);
                    }
                }
            }
        }
        Model::Mb(m) => {
            for s in &m.maximal {
                let top = top_strata(&s.strata);
                let complete = top.len() == 1 && s.strata.iter().all(|x| x.stab_order == 1 && x.morse_indices.is_some());
                if !complete {
                    return Err(Error::IncompleteData(format!(
                        "'{}' lacks index data for non-maximal covers",
                        s.label
                    )));
                }
                let MuRsRule::Affine { a, b } = &s.mu_rs_rule else {
                    return Err(Error::IncompleteData(format!("'{}' has no affine mu_RS rule", s.label)));
                };
                let shift = *b - qi(s.dim as i64 / 2) + qi(m.n as i64 - 3);
                if !a.is_integer() || !shift.is_integer() {
                    return Err(Error::Inconsistent(format!("'{}' has non-integral degrees", s.label)));
                }
                for &ind in top[0].morse_indices.as_ref().unwrap() {
                    let rule = DegreeRule { a: a.to_integer(), b: shift.to_integer() + ind as i64 };
                    for k in iterate_range(rule, min_degree, max_degree) {
                        add(&mut out, rule.at(k), 1);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Iterates `k >= 1` with `a k + b` inside `[lo, hi]`.
fn iterate_range(rule: DegreeRule, lo: i64, hi: i64) -> std::ops::RangeInclusive<i64> {
    let DegreeRule { a, b } = rule;
    let (first, last) = match a.signum() {
        1 => (ceil_div(lo - b, a), floor_div(hi - b, a)),
        -1 => (ceil_div(hi - b, a), floor_div(lo - b, a)),
        _ if (lo..=hi).contains(&b) => return 1..=i64::MAX,
        _ => return 1..=0,
    };
    first.max(1)..=last
}

fn floor_div(x: i64, d: i64) -> i64 {
    let q = x / d;
    if x % d != 0 && ((x < 0) != (d < 0)) { q - 1 } else { q }
}

fn ceil_div(x: i64, d: i64) -> i64 {
    let q = x / d;
    if x % d != 0 && ((x < 0) == (d < 0)) { q + 1 } else { q }
}
