use std::collections::BTreeMap;
use std::fmt::Write as _;

use reeb_mec::catalog::{self, REGISTRY};
use reeb_mec::indices::{
    conley_zehnder, conley_zehnder_rot, dgw_index, mean_index, robbin_salamon, robbin_salamon_sampled, unitary_index,
    AnalyticPath, IndexValue,
};
use reeb_mec::mec::{self, af_surgery, mec, mec_af, surgery_apply, surgery_generators, MecValue, SurgeryMode, SurgeryStep};
use reeb_mec::orbit_model::{parse_manifest, to_manifest_json, Model};
use reeb_mec::rational::{self, Q};
use reeb_mec::suites;
use reeb_mec::symplin::{default_samples, rotation_path, SympPath};
use reeb_mec::{Error, Result};
use serde_json::{json, Value};

use crate::{CatalogAction, CatalogParams, Cli, Command, IndexArgs};

pub struct Report {
    pub json: Value,
    pub text: String,
    pub code: u8,
}

pub fn dispatch(cli: &Cli) -> Result<Report> {
    let fmt = Fmt { approx: cli.approx };
    match &cli.command {
        Command::Mec { manifest, params } => cmd_mec(manifest, params, fmt),
        Command::Oracle { manifest, params, max_degree } => cmd_oracle(manifest, params, max_degree, fmt),
        Command::Surgery { manifest, params, handles, mode, linearized, max_degree } => {
            cmd_surgery(manifest, params, handles, (*mode).into(), *linearized, *max_degree, fmt)
        }
        Command::Index(args) => cmd_index(args),
        Command::Catalog { action: CatalogAction::List } => Ok(cmd_catalog_list()),
        Command::Catalog { action: CatalogAction::Emit { name, params } } => cmd_catalog_emit(name, params),
        Command::Verify { suite, seed, size } => cmd_verify(suite, *seed, *size),
    }
}

#[derive(Clone, Copy)]
struct Fmt {
    approx: bool,
}

impl Fmt {
    fn q(&self, x: &Q) -> String {
        if self.approx {
            format!("{x} ({:.6})", rational::to_f64(x))
        } else {
            x.to_string()
        }
    }

    fn opt(&self, x: &Option<Q>) -> String {
        x.as_ref().map_or_else(|| "undefined".to_string(), |v| self.q(v))
    }

    fn json(&self, x: &Q) -> Value {
        let mut v = rational::to_json(x);
        if self.approx {
            v["approx"] = json!(rational::to_f64(x));
        }
        v
    }

    fn json_opt(&self, x: &Option<Q>) -> Value {
        x.as_ref().map_or(Value::Null, |v| self.json(v))
    }

    fn mec_json(&self, v: &MecValue) -> Value {
        json!({
            "chi_plus": self.json_opt(&v.chi_plus),
            "chi_minus": self.json_opt(&v.chi_minus),
            "chi": self.json_opt(&v.chi),
            "defined": v.is_defined(),
            "diagnostics": v.diagnostics,
        })
    }

    fn mec_line(&self, v: &MecValue) -> String {
        if v.is_defined() {
            format!("chi+ = {}, chi- = {}, chi = {}", self.opt(&v.chi_plus), self.opt(&v.chi_minus), self.opt(&v.chi))
        } else {
            format!("chi undefined: {}", v.diagnostics.join("; "))
        }
    }
}

fn overrides(params: &CatalogParams) -> BTreeMap<String, i64> {
    [("n", params.n), ("p", params.p), ("chi_b", params.chi_b), ("pairing", params.pairing), ("handle", params.handle)]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
}

struct Loaded {
    model: Model,
    closed_form: Option<MecValue>,
}

fn load(source: &str, params: &CatalogParams) -> Result<Loaded> {
    let over = overrides(params);
    if let Some(name) = source.strip_prefix("catalog:") {
        let item = catalog::build(name, &over)?;
        return Ok(Loaded { model: item.model, closed_form: item.closed_form });
    }
    if !over.is_empty() {
        return Err(Error::InvalidInput("catalog parameters apply only to catalog: sources".into()));
    }
    let text =
        std::fs::read_to_string(source).map_err(|e| Error::InvalidInput(format!("cannot read '{source}': {e}")))?;
    let model = parse_manifest(&text)?;
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(Loaded { model, closed_form: None })
}

fn kind(model: &Model) -> &'static str {
    match model {
        Model::Af(_) => "af",
        Model::Mb(_) => "mb",
    }
}

fn cmd_mec(source: &str, params: &CatalogParams, fmt: Fmt) -> Result<Report> {
    let loaded = load(source, params)?;
    let v = mec(&loaded.model)?;
    let mut text = format!("{}\n", fmt.mec_line(&v));
    let mut doc = json!({
        "command": "mec",
        "source": source,
        "kind": kind(&loaded.model),
        "n": loaded.model.n(),
    });
    doc.as_object_mut().unwrap().extend(fmt.mec_json(&v).as_object().unwrap().clone());
    let mut code = if v.is_defined() { 0 } else { 3 };
    if let Some(cf) = &loaded.closed_form {
        let agrees = cf.chi_plus == v.chi_plus && cf.chi_minus == v.chi_minus;
        doc["closed_form"] = fmt.mec_json(cf);
        doc["closed_form_agrees"] = json!(agrees);
        let _ = writeln!(text, "closed form: {} ({})", fmt.mec_line(cf), if agrees { "agrees" } else { "DISAGREES" });
        if !agrees {
            code = 1;
        }
    }
    Ok(Report { json: doc, text, code })
}

fn cmd_oracle(source: &str, params: &CatalogParams, cutoffs: &[i64], fmt: Fmt) -> Result<Report> {
    let loaded = load(source, params)?;
    let rep = mec::oracle_convergence(&loaded.model, cutoffs)?;
    let bounded = rep.is_bounded();
    let mut text = String::new();
    let _ = writeln!(text, "closed form: {}", fmt.mec_line(&rep.closed_form));
    let _ = writeln!(text, "{:>10}  {:>24}  {:>12}  {:>24}  {:>12}", "N", "chi+_N/N", "N dev+", "chi-_N/N", "N dev-");
    let mut rows = Vec::new();
    for r in &rep.rows {
        let _ = writeln!(
            text,
            "{:>10}  {:>24}  {:>12}  {:>24}  {:>12}",
            r.n_max,
            fmt.q(&r.plus),
            fmt.q(&r.dev_plus),
            fmt.q(&r.minus),
            fmt.q(&r.dev_minus)
        );
        rows.push(json!({
            "n_max": r.n_max,
            "plus": fmt.json(&r.plus),
            "minus": fmt.json(&r.minus),
            "dev_plus": fmt.json(&r.dev_plus),
            "dev_minus": fmt.json(&r.dev_minus),
        }));
    }
    let _ = writeln!(text, "fitted: chi+ = {}, chi- = {}", fmt.q(&rep.fitted_plus), fmt.q(&rep.fitted_minus));
    let _ = writeln!(text, "deviation {}", if bounded { "bounded" } else { "GROWING" });
    let doc = json!({
        "command": "oracle",
        "source": source,
        "rows": rows,
        "fitted_plus": fmt.json(&rep.fitted_plus),
        "fitted_minus": fmt.json(&rep.fitted_minus),
        "max_dev": fmt.json(&rep.max_dev),
        "closed_form": fmt.mec_json(&rep.closed_form),
        "bounded": bounded,
    });
    Ok(Report { json: doc, text, code: if bounded { 0 } else { 1 } })
}

fn cmd_surgery(
    source: &str,
    params: &CatalogParams,
    handles: &[u32],
    mode: SurgeryMode,
    linearized: bool,
    r: i64,
    fmt: Fmt,
) -> Result<Report> {
    let loaded = load(source, params)?;
    let n = loaded.model.n();
    let mut value = mec(&loaded.model)?;
    let mut af = match &loaded.model {
        Model::Af(m) => Some(m.clone()),
        Model::Mb(_) => None,
    };
    let mut text = format!("start: {}\n", fmt.mec_line(&value));
    let mut steps = Vec::new();
    let mut code = 0;
    for &k in handles {
        let step = SurgeryStep { k, n, mode, linearized };
        let next = surgery_apply(&value, &step)?;
        let injected = surgery_generators(n, k, r)?;
        let mut model_check = Value::Null;
        if let Some(m) = &af {
            let surgered = af_surgery(m, k, linearized)?;
            let by_model = mec_af(&surgered)?;
            if mode == SurgeryMode::Generator {
                let agrees = by_model.chi_plus == next.chi_plus && by_model.chi_minus == next.chi_minus;
                model_check = json!(agrees);
                if !agrees {
                    code = 1;
                }
            }
            af = Some(surgered);
        }
        let _ = writeln!(
            text,
            "k = {k}: chi+ {} -> {}, chi {} -> {}; injected degrees <= {r}: {}",
            fmt.opt(&value.chi_plus),
            fmt.opt(&next.chi_plus),
            fmt.opt(&value.chi),
            fmt.opt(&next.chi),
            list(&injected)
        );
        if model_check == json!(false) {
            let _ = writeln!(text, "  surgered model DISAGREES with the generator-mode value");
        }
        steps.push(json!({
            "k": k,
            "before": fmt.mec_json(&value),
            "after": fmt.mec_json(&next),
            "injected_degrees": injected,
            "model_agrees": model_check,
        }));
        value = next;
    }
    let doc = json!({
        "command": "surgery",
        "source": source,
        "n": n,
        "mode": mode,
        "linearized": linearized,
        "max_degree": r,
        "steps": steps,
        "final": fmt.mec_json(&value),
    });
    Ok(Report { json: doc, text, code })
}

fn list(v: &[i64]) -> String {
    if v.is_empty() {
        return "none".into();
    }
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")
}

fn cmd_index(args: &IndexArgs) -> Result<Report> {
    let (path, rates) = match (&args.path, &args.rotation) {
        (Some(file), None) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::InvalidInput(format!("cannot read '{file}': {e}")))?;
            (SympPath::from_json(&text)?, None)
        }
        (None, Some(rates)) => {
            let m = args.samples.unwrap_or_else(|| default_samples(rates, args.t_end));
            (rotation_path(rates, args.t_end, m)?, Some(rates.clone()))
        }
        _ => return Err(Error::InvalidInput("give exactly one of --path or --rotation".into())),
    };
    let none = !(args.cz || args.rs || args.mean || args.unitary || args.dgw);
    let want = |flag: bool| flag || args.all || none;

    let mut values = Vec::new();
    let mut notes = Vec::new();
    let mut disagreements = Vec::new();
    if want(args.cz) {
        match conley_zehnder(&path) {
            Ok(cz) => {
                if let Some(w) = &rates {
                    let closed = conley_zehnder_rot(w, args.t_end)?;
                    if closed != cz {
                        disagreements.push(format!("cz: sampled {cz}, closed form {closed}"));
                    }
                }
                values.push(IndexValue::Cz { value: cz });
            }
            Err(e @ Error::Degenerate { .. }) if args.cz && !args.all => return Err(e),
            Err(Error::Degenerate { .. }) => notes.push("cz skipped: degenerate endpoint, see rs".to_string()),
            Err(e) => return Err(e),
        }
    }
    if want(args.rs) {
        let sampled = robbin_salamon_sampled(&path)?;
        if let Some(w) = &rates {
            let analytic = robbin_salamon(&AnalyticPath::rotation(w, args.t_end))?;
            if analytic != sampled {
                disagreements.push(format!("rs: sampled {sampled}, crossing forms {analytic}"));
            }
        }
        if let Some(cz) = values.iter().find_map(|v| match v {
            IndexValue::Cz { value } => Some(*value),
            _ => None,
        }) {
            if Q::from_integer(cz) != sampled {
                disagreements.push(format!("rs {sampled} differs from cz {cz}"));
            }
        }
        values.push(IndexValue::Rs { value: sampled });
    }
    if want(args.mean) {
        let (value, error) = mean_index(&path, args.k_max)?;
        values.push(IndexValue::Mean { value, error });
    }
    if want(args.unitary) {
        values.push(IndexValue::Unitary { value: unitary_index(&path)? });
    }
    if want(args.dgw) {
        values.push(IndexValue::Dgw { value: dgw_index(path.endpoint())? });
    }

    let mut text = String::new();
    for v in &values {
        let _ = match v {
            IndexValue::Cz { value } => writeln!(text, "cz = {value}"),
            IndexValue::Rs { value } => writeln!(text, "rs = {value}"),
            IndexValue::Mean { value, error } => writeln!(text, "mean = {value:.9} (fit error {error:.3e})"),
            IndexValue::Unitary { value } => writeln!(text, "unitary = {value:.9}"),
            IndexValue::Dgw { value } => writeln!(text, "dgw = {value:.9}"),
        };
    }
    for n in &notes {
        let _ = writeln!(text, "note: {n}");
    }
    for d in &disagreements {
        let _ = writeln!(text, "DISAGREEMENT: {d}");
    }
    let doc = json!({
        "command": "index",
        "n": path.n(),
        "duration": path.duration(),
        "samples": path.len(),
        "indices": values,
        "notes": notes,
        "disagreements": disagreements,
    });
    Ok(Report { json: doc, text, code: if disagreements.is_empty() { 0 } else { 1 } })
}

fn cmd_catalog_list() -> Report {
    let mut text = String::new();
    let mut entries = Vec::new();
    for (name, kind, params, about) in REGISTRY {
        let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(text, "{name:<20} {:<12} {:<28} {about}", serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(), p.join(" "));
        entries.push(json!({
            "name": name,
            "kind": kind,
            "defaults": params.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "description": about,
        }));
    }
    Report { json: json!({ "command": "catalog list", "entries": entries }), text, code: 0 }
}

fn cmd_catalog_emit(name: &str, params: &CatalogParams) -> Result<Report> {
    let item = catalog::build(name, &overrides(params))?;
    let manifest = to_manifest_json(&item.model);
    let json: Value = serde_json::from_str(&manifest)?;
    Ok(Report { json, text: format!("{manifest}\n"), code: 0 })
}

fn cmd_verify(suite: &str, seed: u64, size: usize) -> Result<Report> {
    let results = suites::run(suite, seed, size)?;
    let mut text = String::new();
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(text, "{status} [{}] {}: {} ({} checked)", r.suite, r.property, r.summary, r.checked);
        if let Some(c) = &r.counterexample {
            let _ = writeln!(text, "    counterexample: {c}");
        }
    }
    let tally = suites::summarize(&results);
    let _ = writeln!(text, "{} passed, {} failed", tally["passed"], tally["failed"]);
    let doc = json!({ "command": "verify", "suite": suite, "seed": seed, "size": size, "results": results, "summary": tally });
    Ok(Report { json: doc, text, code: if tally["failed"] == 0 { 0 } else { 1 } })
}
