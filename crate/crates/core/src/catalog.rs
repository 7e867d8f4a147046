//! Built-in models: the standard sphere, Ustilovsky spheres, prequantization
//! circle bundles, and subcritical handles.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mec::{self, af_surgery, MecValue};
use crate::orbit_model::{
    AfModel, DegreeRule, MaximalOrbifold, MbModel, Model, MuRsRule, OrbitType, PrincipalOrbitFamily, Stratum,
};
use crate::rational::{q, qi};

fn even_indices(top: u32) -> Vec<u32> {
    (0..=top / 2).map(|i| 2 * i).collect()
}

/// Single maximal orbifold `S_1 = CP^{n-1}` with `mu_RS(S_k) = 2kn`.
pub fn standard_sphere(n: u32) -> Result<MbModel> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("standard_sphere needs n >= 2, got {n}")));
    }
    let dim = 2 * n - 2;
    Ok(MbModel {
        n,
        maximal: vec![MaximalOrbifold {
            label: "S_1".into(),
            sigma: 1,
            mu_rs_rule: MuRsRule::Affine { a: qi(2 * n as i64), b: qi(0) },
            dim,
            strata: vec![Stratum {
                label: "S_1".into(),
                cover_multiple: 1,
                euler_underlying: n as i64,
                dim,
                stab_order: 1,
                morse_indices: Some(even_indices(dim)),
                children: vec![],
            }],
        }],
        good_only: true,
    })
}

/// Perturbed sphere: one family per critical point of the perfect Morse function
/// on `CP^{n-1}`, with degrees `2nk + 2j - 2`.
pub fn standard_sphere_af(n: u32) -> Result<AfModel> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("standard_sphere_af needs n >= 2, got {n}")));
    }
    let families = (0..n as i64)
        .map(|j| PrincipalOrbitFamily {
            label: format!("x_{j}"),
            orbit_type: OrbitType::I,
            sigma: 1,
            delta: qi(2 * n as i64),
            degree_rule: Some(DegreeRule { a: 2 * n as i64, b: 2 * j - 2 }),
        })
        .collect();
    Ok(AfModel { n, families, no_low_degree: true, linearized: false })
}

/// Brieskorn sphere `Sigma(p, 2, ..., 2)` of dimension `2n - 1`.
pub fn ustilovsky(n: u32, p: i64) -> Result<MbModel> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!("ustilovsky needs odd n >= 3, got {n}")));
    }
    if p < 1 || !matches!(p.rem_euclid(8), 1 | 7) {
        return Err(Error::InvalidInput(format!("ustilovsky needs positive p = +-1 mod 8, got {p}")));
    }
    let pu = u32::try_from(p).map_err(|_| Error::InvalidInput(format!("p = {p} is too large")))?;
    let dim = 2 * n - 2;
    Ok(MbModel {
        n,
        maximal: vec![MaximalOrbifold {
            label: "S_ppi".into(),
            sigma: 1,
            mu_rs_rule: MuRsRule::Affine { a: qi(2 * ((n as i64 - 2) * p + 2)), b: qi(0) },
            dim,
            strata: vec![
                Stratum {
                    label: "S_ppi".into(),
                    cover_multiple: pu,
                    euler_underlying: n as i64,
                    dim,
                    stab_order: 1,
                    morse_indices: Some(even_indices(dim)),
                    children: vec!["S_pi".into()],
                },
                Stratum {
                    label: "S_pi".into(),
                    cover_multiple: 1,
                    euler_underlying: n as i64 - 1,
                    dim: dim - 2,
                    stab_order: pu,
                    morse_indices: Some(even_indices(dim - 2)),
                    children: vec![],
                },
            ],
        }],
        good_only: true,
    })
}

/// Closed form for the prequantization bundle over `B` with `<c_1(TB), u> = c1_pairing`.
pub fn prequantization(chi_b: i64, c1_pairing: i64) -> Result<MecValue> {
    if c1_pairing == 0 {
        return Err(Error::InvalidInput("the Chern pairing must be nonzero".into()));
    }
    let v = q(chi_b, 2 * c1_pairing);
    Ok(if c1_pairing > 0 { MecValue::new(v, qi(0)) } else { MecValue::new(qi(0), v) })
}

/// Morse-Bott model of the bundle with base of real dimension `2n - 2`.
///
/// Morse data is attached only when `chi_b = n`, where the base has the Betti
/// numbers of `CP^{n-1}`.
pub fn prequantization_model(chi_b: i64, c1_pairing: i64, n: u32) -> Result<MbModel> {
    if c1_pairing == 0 {
        return Err(Error::InvalidInput("the Chern pairing must be nonzero".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("prequantization needs n >= 2, got {n}")));
    }
    let dim = 2 * n - 2;
    Ok(MbModel {
        n,
        maximal: vec![MaximalOrbifold {
            label: "B".into(),
            sigma: 1,
            mu_rs_rule: MuRsRule::Affine { a: qi(2 * c1_pairing), b: qi(0) },
            dim,
            strata: vec![Stratum {
                label: "B".into(),
                cover_multiple: 1,
                euler_underlying: chi_b,
                dim,
                stab_order: 1,
                morse_indices: (chi_b == n as i64).then(|| even_indices(dim)),
                children: vec![],
            }],
        }],
        good_only: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandleData {
    pub family: PrincipalOrbitFamily,
    pub first_degree: i64,
    /// In dimension 3 the first orbit has degree 1, which the cylindrical theory cannot absorb.
    pub degree_one: bool,
}

pub fn handle_family(n: u32, k: u32) -> Result<HandleData> {
    let family = mec::handle_family(n, k)?;
    let first_degree = family.degree_rule.expect("handle family has a degree rule").at(1);
    Ok(HandleData { family, first_degree, degree_one: first_degree == 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogKind {
    Af,
    Mb,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub kind: CatalogKind,
    pub parameters: BTreeMap<String, i64>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogItem {
    pub entry: CatalogEntry,
    pub model: Model,
    /// Present for closed-form entries; must equal the model's value.
    pub closed_form: Option<MecValue>,
}

/// Name, kind, parameters with defaults, description.
pub const REGISTRY: &[(&str, CatalogKind, &[(&str, i64)], &str)] = &[
    ("standard_sphere", CatalogKind::Mb, &[("n", 2)], "standard contact sphere S^{2n-1}; orbit space CP^{n-1}"),
    ("standard_sphere_af", CatalogKind::Af, &[("n", 2)], "standard sphere after a Morse perturbation of the orbit space"),
    ("ustilovsky", CatalogKind::Mb, &[("n", 5), ("p", 7)], "Brieskorn sphere Sigma(p,2,...,2), n odd, p = +-1 mod 8"),
    (
        "prequantization",
        CatalogKind::ClosedForm,
        &[("chi_b", 2), ("pairing", 2), ("n", 2)],
        "prequantization circle bundle over a base with Euler characteristic chi_b",
    ),
    (
        "sphere_with_handle",
        CatalogKind::Af,
        &[("n", 3), ("handle", 1)],
        "standard sphere after one subcritical handle of index k",
    ),
];

pub fn lookup(name: &str) -> Option<&'static (&'static str, CatalogKind, &'static [(&'static str, i64)], &'static str)> {
    REGISTRY.iter().find(|e| e.0 == name)
}

/// Builds a catalog entry; unspecified parameters take their defaults.
pub fn build(name: &str, overrides: &BTreeMap<String, i64>) -> Result<CatalogItem> {
    let (_, kind, defaults, provenance) =
        lookup(name).ok_or_else(|| Error::InvalidInput(format!("unknown catalog entry '{name}'")))?;
    let mut parameters: BTreeMap<String, i64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !parameters.contains_key(k) {
            return Err(Error::InvalidInput(format!("'{name}' takes no parameter '{k}'")));
        }
        parameters.insert(k.clone(), *v);
    }
    let int = |key: &str| parameters[key];
    let small = |key: &str| {
        u32::try_from(parameters[key]).map_err(|_| Error::InvalidInput(format!("parameter {key} must be a small non-negative integer")))
    };
    let (model, closed_form) = match name {
        "standard_sphere" => (Model::Mb(standard_sphere(small("n")?)?), None),
        "standard_sphere_af" => (Model::Af(standard_sphere_af(small("n")?)?), None),
        "ustilovsky" => (Model::Mb(ustilovsky(small("n")?, int("p"))?), None),
        "prequantization" => (
            Model::Mb(prequantization_model(int("chi_b"), int("pairing"), small("n")?)?),
            Some(prequantization(int("chi_b"), int("pairing"))?),
        ),
        "sphere_with_handle" => {
            let n = small("n")?;
            (Model::Af(af_surgery(&standard_sphere_af(n)?, small("handle")?, false)?), None)
        }
        _ => unreachable!("registry and builder agree"),
    };
    Ok(CatalogItem {
        entry: CatalogEntry { name: name.to_string(), kind: *kind, parameters, provenance: provenance.to_string() },
        model,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mec::{mec, mec_af, mec_mb};
    use crate::orbit_model::{e_invariant, enumerate_generators, parse_manifest, to_manifest_json};

    #[test]
    fn sphere_examples() {
        for n in [2, 5] {
            assert_eq!(mec_mb(&standard_sphere(n).unwrap()).unwrap(), MecValue::new(q(1, 2), qi(0)));
        }
        let af = standard_sphere_af(2).unwrap();
        assert_eq!(af.families.len(), 2);
        assert!(af.families.iter().all(|f| f.delta == qi(4)));
        assert_eq!(mec_af(&af).unwrap(), MecValue::new(q(1, 2), qi(0)));
        assert!(standard_sphere(1).is_err());
    }

    #[test]
    fn both_sphere_routes_agree() {
        for n in 2..8 {
            let mb = Model::Mb(standard_sphere(n).unwrap());
            let af = Model::Af(standard_sphere_af(n).unwrap());
            assert_eq!(mec(&mb).unwrap(), mec(&af).unwrap());
            assert_eq!(enumerate_generators(&mb, -50, 400).unwrap(), enumerate_generators(&af, -50, 400).unwrap());
        }
    }

    #[test]
    fn ustilovsky_examples() {
        let m = ustilovsky(5, 7).unwrap();
        assert_eq!(e_invariant(&m.maximal[0].strata).unwrap(), 29);
        assert_eq!(mec_mb(&m).unwrap(), MecValue::new(q(29, 46), qi(0)));
        let nine = mec_mb(&ustilovsky(5, 9).unwrap()).unwrap().chi_plus.unwrap();
        assert_eq!(nine, q(37, 58));
        assert_ne!(nine, q(29, 46));
        assert!(ustilovsky(4, 7).is_err());
        assert!(ustilovsky(5, 5).is_err());
    }

    #[test]
    fn prequantization_examples() {
        assert_eq!(prequantization(2, 2).unwrap(), mec_mb(&standard_sphere(2).unwrap()).unwrap());
        assert_eq!(prequantization(0, 3).unwrap().chi_plus, Some(qi(0)));
        let v = prequantization(6, -3).unwrap();
        assert_eq!((v.chi_plus, v.chi_minus), (Some(qi(0)), Some(qi(-1))));
        assert!(prequantization(1, 0).is_err());
        assert_eq!(prequantization_model(2, 2, 2).unwrap(), standard_sphere(2).unwrap().tap_label("B"));
    }

    trait TapLabel {
        fn tap_label(self, l: &str) -> Self;
    }

    impl TapLabel for MbModel {
        fn tap_label(mut self, l: &str) -> Self {
            self.maximal[0].label = l.into();
            self.maximal[0].strata[0].label = l.into();
            self
        }
    }

    #[test]
    fn handle_examples() {
        let h = handle_family(3, 1).unwrap();
        assert_eq!((h.family.sigma, h.first_degree, h.degree_one), (-1, 3, false));
        let h = handle_family(4, 2).unwrap();
        assert_eq!((h.family.sigma, h.first_degree), (1, 4));
        let h = handle_family(2, 1).unwrap();
        assert!(h.first_degree == 1 && h.degree_one);
        assert!(handle_family(3, 3).is_err());
    }

    #[test]
    fn every_entry_validates_and_roundtrips() {
        for (name, kind, _, _) in REGISTRY {
            let item = build(name, &BTreeMap::new()).unwrap();
            assert_eq!(item.entry.kind, *kind);
            assert!(item.model.validate().is_empty(), "{name}");
            let value = mec(&item.model).unwrap();
            if let Some(cf) = &item.closed_form {
                assert_eq!(cf, &value, "{name}");
            }
            let back = parse_manifest(&to_manifest_json(&item.model)).unwrap();
            assert_eq!(mec(&back).unwrap(), value);
        }
        let neg: BTreeMap<String, i64> = [("chi_b".to_string(), 6), ("pairing".to_string(), -3), ("n".to_string(), 3)].into();
        let item = build("prequantization", &neg).unwrap();
        assert_eq!(item.closed_form.unwrap(), mec(&item.model).unwrap());
        assert!(build("nope", &BTreeMap::new()).is_err());
        assert!(build("standard_sphere", &[("p".to_string(), 1)].into()).is_err());
    }
}
