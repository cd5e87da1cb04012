//! `key = value` run configuration files with `[section]` headers.
//!
//! ```text
//! [geometry]
//! kind = "lshape"
//! n = 6
//!
//! [material]
//! e = 1.0
//! nu = 0.25
//! t = 1.0
//!
//! [plate]
//! bc = "simply_supported"
//!
//! [membrane]
//! stress = "prescribed"
//! tensor = [1.0, 0.0, 1.0]
//! ```
//!
//! Keys outside the required set fall back to [`RunConfig::default`]. Unknown
//! sections and keys are rejected.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::config::{Geometry, MembraneLoad, RunConfig, StressMode};
use crate::error::{Error, Result};
use crate::estimator::{Alphas, Enrichment, EstimatorMode, JumpWeight, MembraneEdgeTerm, Target};
use crate::fem::{LameConvention, PenaltyModulus, PlateBc, Sym2};

/// Keys every config file must set.
pub const REQUIRED_KEYS: [&str; 6] = [
    "geometry.kind",
    "material.e",
    "material.nu",
    "material.t",
    "plate.bc",
    "membrane.stress",
];

const SECTIONS: [&str; 9] = [
    "geometry",
    "material",
    "plate",
    "membrane",
    "eigen",
    "estimator",
    "adapt",
    "output",
    "reference",
];

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        field: field.into(),
        message: message.into(),
    }
}

fn bc_name(bc: PlateBc) -> &'static str {
    match bc {
        PlateBc::SimplySupported => "simply_supported",
        PlateBc::Clamped => "clamped",
    }
}

fn lame_name(l: LameConvention) -> &'static str {
    match l {
        LameConvention::PlaneStress => "plane_stress",
        LameConvention::Swapped => "swapped",
    }
}

fn edge_name(e: MembraneEdgeTerm) -> &'static str {
    match e {
        MembraneEdgeTerm::TractionJump => "traction",
        MembraneEdgeTerm::DivergenceJump => "divergence",
    }
}

/// One section whose keys are consumed as they are read.
struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(v)),
            Some(Value::Integer(v)) => Ok(Some(v as f64)),
            Some(_) => Err(bad(&self.field(key), "expected a number")),
        }
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if v >= 0 => Ok(Some(v as usize)),
            Some(_) => Err(bad(&self.field(key), "expected a non-negative integer")),
        }
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::Boolean(v)) => Ok(Some(v)),
            Some(_) => Err(bad(&self.field(key), "expected true or false")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(Value::String(v)) => Ok(Some(v)),
            Some(_) => Err(bad(&self.field(key), "expected a quoted string")),
        }
    }

    fn floats<const N: usize>(&mut self, key: &str) -> Result<Option<[f64; N]>> {
        let field = self.field(key);
        let Some(v) = self.table.remove(key) else { return Ok(None) };
        let err = || bad(&field, format!("expected an array of {N} numbers"));
        let Value::Array(items) = v else { return Err(err()) };
        if items.len() != N {
            return Err(err());
        }
        let mut out = [0.0; N];
        for (o, item) in out.iter_mut().zip(items) {
            *o = match item {
                Value::Float(x) => x,
                Value::Integer(x) => x as f64,
                _ => return Err(err()),
            };
        }
        Ok(Some(out))
    }

    fn strings(&mut self, key: &str) -> Result<Option<Vec<String>>> {
        let field = self.field(key);
        let Some(v) = self.table.remove(key) else { return Ok(None) };
        let err = || bad(&field, "expected an array of strings");
        let Value::Array(items) = v else { return Err(err()) };
        items
            .into_iter()
            .map(|i| match i {
                Value::String(s) => Ok(s),
                _ => Err(err()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Reads a string key and maps it through `parse`, listing `valid` on failure.
    fn choice<T>(&mut self, key: &str, valid: &[&str], parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.string(key)? {
            None => Ok(None),
            Some(s) => parse(&s).map(Some).ok_or_else(|| {
                bad(&self.field(key), format!("unknown value `{s}` (valid: {})", valid.join(", ")))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(k) => Err(bad(&format!("{}.{k}", self.name), "unknown key")),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;

    let present = |key: &str| {
        let (s, k) = key.split_once('.').expect("dotted key");
        root.get(s).and_then(Value::as_table).is_some_and(|t| t.contains_key(k))
    };
    let missing: Vec<String> = REQUIRED_KEYS.iter().filter(|k| !present(k)).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }

    let mut sections = Vec::new();
    for name in SECTIONS {
        let table = match root.remove(name) {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => return Err(bad(name, "expected a [section]")),
        };
        sections.push(Section { name, table });
    }
    if let Some(k) = root.keys().next() {
        return Err(bad(k, format!("unknown section or top-level key (valid sections: {})", SECTIONS.join(", "))));
    }
    let [mut geo, mut mat, mut plate, mut mem, mut eig, mut est, mut adapt, mut out, mut reference] =
        <[Section; 9]>::try_from(sections).ok().expect("nine sections");

    let mut c = RunConfig::default();

    c.geometry = geo
        .choice("kind", &["lshape", "square"], Geometry::from_name)?
        .expect("required");
    c.n = geo.usize("n")?.unwrap_or(c.n);

    c.e = mat.f64("e")?.expect("required");
    c.nu = mat.f64("nu")?.expect("required");
    c.t = mat.f64("t")?.expect("required");
    c.lame = mat
        .choice("lame", &["plane_stress", "swapped"], |s| {
            [LameConvention::PlaneStress, LameConvention::Swapped].into_iter().find(|l| lame_name(*l) == s)
        })?
        .unwrap_or(c.lame);

    c.plate_bc = plate
        .choice("bc", &["simply_supported", "clamped"], |s| {
            [PlateBc::SimplySupported, PlateBc::Clamped].into_iter().find(|b| bc_name(*b) == s)
        })?
        .expect("required");
    c.plate_degree = plate.usize("degree")?.unwrap_or(c.plate_degree);
    c.gamma = plate.f64("gamma")?.unwrap_or(c.gamma);
    c.penalty = match plate.table.remove("penalty") {
        None => c.penalty,
        Some(Value::String(s)) if s == "plate" => PenaltyModulus::Plate,
        Some(Value::String(s)) if s == "membrane" => PenaltyModulus::Membrane,
        Some(Value::Float(v)) => PenaltyModulus::Value(v),
        Some(Value::Integer(v)) => PenaltyModulus::Value(v as f64),
        Some(_) => return Err(bad("plate.penalty", "expected \"plate\", \"membrane\" or a number")),
    };

    let kind = mem.choice("stress", &["prescribed", "solved"], |s| {
        matches!(s, "prescribed" | "solved").then(|| s.to_string())
    })?;
    c.stress = if kind.as_deref() == Some("prescribed") {
        let [xx, xy, yy] = mem.floats::<3>("tensor")?.unwrap_or([1.0, 0.0, 1.0]);
        StressMode::Prescribed(Sym2::new(xx, xy, yy))
    } else {
        let load = match mem.choice("load", &["zero", "constant", "corner_distance"], |s| {
            matches!(s, "zero" | "constant" | "corner_distance").then(|| s.to_string())
        })? {
            None => return Err(bad("membrane.load", "required when stress = \"solved\"")),
            Some(s) if s == "zero" => MembraneLoad::Zero,
            Some(s) if s == "constant" => MembraneLoad::Constant(
                mem.floats::<2>("value")?
                    .ok_or_else(|| bad("membrane.value", "required for a constant load"))?,
            ),
            Some(_) => MembraneLoad::CornerDistance {
                corner: mem
                    .floats::<2>("corner")?
                    .ok_or_else(|| bad("membrane.corner", "required for a corner_distance load"))?,
                scale: mem
                    .floats::<2>("scale")?
                    .ok_or_else(|| bad("membrane.scale", "required for a corner_distance load"))?,
            },
        };
        StressMode::FeDerived {
            load,
            clamped: mem
                .strings("clamped")?
                .ok_or_else(|| bad("membrane.clamped", "required when stress = \"solved\""))?,
            degree: mem.usize("degree")?.unwrap_or(c.plate_degree),
        }
    };

    c.eigen_count = eig.usize("count")?.unwrap_or(c.eigen_count);
    c.eigen_tol = eig.f64("tol")?.unwrap_or(c.eigen_tol);

    let e = &mut c.estimator;
    e.mode = est
        .choice("mode", &["residual", "dwr"], EstimatorMode::from_name)?
        .unwrap_or(e.mode);
    e.target = est
        .choice("target", &["eigenvalue", "eigenvector_m0", "eigenvector_m1"], Target::from_name)?
        .unwrap_or(e.target);
    c.target_mode = est.usize("mode_index")?.unwrap_or(c.target_mode);
    let (ap, am) = (est.f64("alpha_plate")?, est.f64("alpha_membrane")?);
    if ap.is_some() || am.is_some() {
        let d = Alphas::default_for(e.target, c.plate_degree);
        e.alphas = Some(Alphas {
            plate: ap.unwrap_or(d.plate),
            membrane: am.unwrap_or(d.membrane),
        });
    }
    e.c = est.f64("c")?.unwrap_or(e.c);
    e.delta = est.f64("delta")?.unwrap_or(e.delta);
    e.balance = est.f64("balance")?.unwrap_or(e.balance);
    e.membrane_edge = est
        .choice("membrane_edge", &["traction", "divergence"], |s| {
            [MembraneEdgeTerm::TractionJump, MembraneEdgeTerm::DivergenceJump]
                .into_iter()
                .find(|m| edge_name(*m) == s)
        })?
        .unwrap_or(e.membrane_edge);
    e.jump_weight = est
        .choice("jump_weight", &["penalty", "gamma"], JumpWeight::from_name)?
        .unwrap_or(e.jump_weight);
    e.enrichment = est
        .choice("enrichment", &["degree", "refined"], Enrichment::from_name)?
        .unwrap_or(e.enrichment);

    c.fraction = adapt.f64("fraction")?.unwrap_or(c.fraction);
    c.max_steps = adapt.usize("max_steps")?.unwrap_or(c.max_steps);
    c.max_dofs = adapt.usize("max_dofs")?.unwrap_or(c.max_dofs);
    c.timing = adapt.bool("timing")?.unwrap_or(c.timing);

    if let Some(d) = out.string("dir")? {
        c.output = PathBuf::from(d);
    }
    c.reference = reference.f64("lambda")?;

    for s in [geo, mat, plate, mem, eig, est, adapt, out, reference] {
        s.finish()?;
    }
    c.validate()?;
    Ok(c)
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

/// Writes every field of `c` so that [`parse_config`] restores it exactly.
pub fn serialize_config(c: &RunConfig) -> String {
    let mut root = Table::new();
    let mut section = |name: &str, entries: Vec<(&str, Value)>| {
        let t: Table = entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        root.insert(name.to_string(), Value::Table(t));
    };
    let int = |v: usize| Value::Integer(v as i64);
    let s = |v: &str| Value::String(v.to_string());

    section("geometry", vec![("kind", s(c.geometry.name())), ("n", int(c.n))]);
    section(
        "material",
        vec![
            ("e", Value::Float(c.e)),
            ("nu", Value::Float(c.nu)),
            ("t", Value::Float(c.t)),
            ("lame", s(lame_name(c.lame))),
        ],
    );
    let penalty = match c.penalty {
        PenaltyModulus::Plate => s("plate"),
        PenaltyModulus::Membrane => s("membrane"),
        PenaltyModulus::Value(v) => Value::Float(v),
    };
    section(
        "plate",
        vec![
            ("bc", s(bc_name(c.plate_bc))),
            ("degree", int(c.plate_degree)),
            ("gamma", Value::Float(c.gamma)),
            ("penalty", penalty),
        ],
    );
    let membrane = match &c.stress {
        StressMode::Prescribed(t) => vec![("stress", s("prescribed")), ("tensor", floats(&[t.xx, t.xy, t.yy]))],
        StressMode::FeDerived { load, clamped, degree } => {
            let mut m = vec![("stress", s("solved"))];
            match load {
                MembraneLoad::Zero => m.push(("load", s("zero"))),
                MembraneLoad::Constant(f) => {
                    m.push(("load", s("constant")));
                    m.push(("value", floats(f)));
                }
                MembraneLoad::CornerDistance { corner, scale } => {
                    m.push(("load", s("corner_distance")));
                    m.push(("corner", floats(corner)));
                    m.push(("scale", floats(scale)));
                }
            }
            m.push(("clamped", Value::Array(clamped.iter().map(|t| s(t)).collect())));
            m.push(("degree", int(*degree)));
            m
        }
    };
    section("membrane", membrane);
    section("eigen", vec![("count", int(c.eigen_count)), ("tol", Value::Float(c.eigen_tol))]);
    let e = &c.estimator;
    let mut est = vec![
        ("mode", s(e.mode.name())),
        ("target", s(e.target.name())),
        ("mode_index", int(c.target_mode)),
        ("c", Value::Float(e.c)),
        ("delta", Value::Float(e.delta)),
        ("balance", Value::Float(e.balance)),
        ("membrane_edge", s(edge_name(e.membrane_edge))),
        ("jump_weight", s(e.jump_weight.name())),
        ("enrichment", s(e.enrichment.name())),
    ];
    if let Some(a) = e.alphas {
        est.push(("alpha_plate", Value::Float(a.plate)));
        est.push(("alpha_membrane", Value::Float(a.membrane)));
    }
    section("estimator", est);
    section(
        "adapt",
        vec![
            ("fraction", Value::Float(c.fraction)),
            ("max_steps", int(c.max_steps)),
            ("max_dofs", int(c.max_dofs)),
            ("timing", Value::Boolean(c.timing)),
        ],
    );
    section("output", vec![("dir", s(&c.output.to_string_lossy()))]);
    if let Some(r) = c.reference {
        section("reference", vec![("lambda", Value::Float(r))]);
    }
    toml::to_string(&root).expect("config tables always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nkind = \"lshape\"\n[material]\ne = 1\nnu = 0.25\nt = 1.0\n\
                           [plate]\nbc = \"simply_supported\"\n[membrane]\nstress = \"prescribed\"\n";

    #[test]
    fn empty_file_lists_required_keys() {
        match parse_config("") {
            Err(Error::MissingKeys(keys)) => assert_eq!(keys, REQUIRED_KEYS),
            other => panic!("{other:?}"),
        }
        let err = parse_config("[geometry]\nkind = \"square\"\n").unwrap_err().to_string();
        assert!(err.contains("material.e") && !err.contains("geometry.kind"), "{err}");
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&format!("{MINIMAL}[adapt]\nfracton = 0.3\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref field, .. } if field == "adapt.fracton"), "{err}");
        let err = parse_config(&format!("{MINIMAL}[adaptive]\nfraction = 0.3\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref field, .. } if field == "adaptive"), "{err}");
        // solved-only keys are unknown for a prescribed stress
        let err = parse_config(&format!("{MINIMAL}clamped = [\"bottom\"]\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref field, .. } if field == "membrane.clamped"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_config("[geometry]\nkind = \"lshape\"\nn = = 3\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 3, .. }), "{err}");
    }

    #[test]
    fn validation_names_field() {
        let err = parse_config(&format!("{MINIMAL}[adapt]\nfraction = 1.5\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref field, .. } if field == "adapt.fraction"), "{err}");
        let err = parse_config(&MINIMAL.replace("lshape", "disk")).unwrap_err().to_string();
        assert!(err.contains("geometry.kind") && err.contains("square"), "{err}");
        let err = parse_config(&format!("{MINIMAL}[geometry]\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigParse { .. }), "{err}");
    }

    #[test]
    fn solved_stress_round_trip() {
        let c = RunConfig {
            stress: StressMode::FeDerived {
                load: MembraneLoad::Constant([0.5, -1.0 / 3.0]),
                clamped: vec!["bottom".into()],
                degree: 3,
            },
            penalty: PenaltyModulus::Value(0.1),
            reference: Some(std::f64::consts::PI),
            estimator: crate::estimator::EstimatorConfig {
                alphas: Some(Alphas { plate: 7.0 / 3.0, membrane: 2.0 }),
                mode: EstimatorMode::Dwr,
                ..Default::default()
            },
            ..RunConfig::default()
        };
        let text = serialize_config(&c);
        assert_eq!(parse_config(&text).unwrap(), c, "{text}");
    }

    #[test]
    fn single_alpha_fills_default() {
        let c = parse_config(&format!("{MINIMAL}[estimator]\nalpha_plate = 2.5\n")).unwrap();
        assert_eq!(c.estimator.alphas, Some(Alphas { plate: 2.5, membrane: 2.0 }));
    }
}
