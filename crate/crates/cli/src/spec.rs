//! On-disk problem description: a JSON document with optional sections for
//! the network, the coding parameter set, Gaussian and relay instances, dual
//! collections, and run options. Probabilities may be written as rational
//! strings ("1/3") to avoid decimal-rounding normalization failures; a
//! pre-pass resolves them to doubles before deserialization.

use admnet_core::coding::CodingParams;
use admnet_core::duality::DualFamily;
use admnet_core::error::{Error, Result};
use admnet_core::gaussian::{Agn, GaussianParams};
use admnet_core::gdcaf::GdcafSpec;
use admnet_core::network::{Admn, Dmn};
use admnet_core::region::Mode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Run options carried inside a document rather than on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// inequality generation mode; the command-line flag takes precedence
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// subset-enumeration cap for system generation
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_cap: Option<usize>,
    /// target-table cap for unfolding
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unfold_cap: Option<usize>,
    /// numeric tolerance for validation checks
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// A vector-Gaussian instance: linear network plus coding parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub network: Agn,
    pub params: GaussianParams,
}

/// The parsed document. Every section is optional; each subcommand states
/// which sections it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    /// an acyclic network with a target distribution
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<Admn>,
    /// a strictly causal block-level network, input to `unfold`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmn: Option<Dmn>,
    /// a coding parameter set for `network`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<CodingParams>,
    /// a vector-Gaussian instance
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianSection>,
    /// a compress-and-forward relay instance
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gdcaf: Option<GdcafSpec>,
    /// external rate symbols of the final region
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<String>,
    /// a collection of mutually dual problems (original first)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<DualFamily>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Options>,
}

/// Parse "a/b" with integer numerator and positive integer denominator.
fn rational_string(s: &str) -> Option<f64> {
    let (num, den) = s.split_once('/')?;
    let num: i64 = num.trim().parse().ok()?;
    let den: i64 = den.trim().parse().ok()?;
    if den <= 0 {
        return None;
    }
    Some(num as f64 / den as f64)
}

/// Replace rational probability spellings with plain numbers, in place:
/// either a bare string "a/b" or the object form {"rational": "a/b"}.
fn resolve_rationals(v: &mut Value) {
    match v {
        Value::String(s) => {
            if let Some(x) = rational_string(s) {
                *v = Value::from(x);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(resolve_rationals),
        Value::Object(map) => {
            if map.len() == 1 {
                if let Some(Value::String(s)) = map.get("rational") {
                    if let Some(x) = rational_string(s) {
                        *v = Value::from(x);
                        return;
                    }
                }
            }
            map.values_mut().for_each(resolve_rationals);
        }
        _ => {}
    }
}

/// Structural checks beyond what deserialization enforces; every message
/// names the offending path.
fn schema_check(doc: &SpecDocument) -> Result<()> {
    let mut problems = Vec::new();
    if let Some(omega) = &doc.omega {
        check_omega(omega, "omega", &mut problems);
        if let Some(admn) = &doc.network {
            if omega.nodes.len() != admn.nodes.len() {
                problems.push(format!(
                    "omega.nodes: {} entries for a {}-node network",
                    omega.nodes.len(),
                    admn.nodes.len()
                ));
            }
        }
    }
    if let Some(fams) = &doc.dual {
        for (i, fam) in fams.iter().enumerate() {
            check_omega(&fam.omega, &format!("dual[{i}].omega"), &mut problems);
            if fam.omega.nodes.len() != fam.admn.nodes.len() {
                problems.push(format!(
                    "dual[{i}].omega.nodes: {} entries for a {}-node network",
                    fam.omega.nodes.len(),
                    fam.admn.nodes.len()
                ));
            }
        }
    }
    if let Some(admn) = &doc.network {
        check_kernels(admn, "network", &mut problems);
    }
    if let Some(fams) = &doc.dual {
        for (i, fam) in fams.iter().enumerate() {
            check_kernels(&fam.admn, &format!("dual[{i}].network"), &mut problems);
        }
    }
    if let Some(dmn) = &doc.dmn {
        if let Err(e) = dmn.channel.check() {
            problems.push(format!("dmn.channel: {e}"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema(problems.join("; ")))
    }
}

fn check_omega(omega: &CodingParams, path: &str, problems: &mut Vec<String>) {
    let nu = omega.codebooks.len();
    for (j, cb) in omega.codebooks.iter().enumerate() {
        for &g in &cb.gamma {
            if g >= omega.mu {
                problems.push(format!(
                    "{path}.codebooks[{j}].gamma: index {g} out of range for mu = {}",
                    omega.mu
                ));
            }
        }
        for &a in &cb.superpose {
            if a >= nu {
                problems.push(format!(
                    "{path}.codebooks[{j}].superpose: index {a} out of range for {nu} codebooks"
                ));
            }
        }
    }
    for (k, node) in omega.nodes.iter().enumerate() {
        for (field, set) in [
            ("decode_unique", &node.decode_unique),
            ("decode_nonunique", &node.decode_nonunique),
            ("compress", &node.compress),
        ] {
            for &j in set.iter() {
                if j >= nu {
                    problems.push(format!(
                        "{path}.nodes[{k}].{field}: index {j} out of range for {nu} codebooks"
                    ));
                }
            }
        }
        if let Some(kernel) = &node.kernel {
            if let Err(e) = kernel.check() {
                problems.push(format!("{path}.nodes[{k}].kernel: {e}"));
            }
        }
    }
}

fn check_kernels(admn: &Admn, path: &str, problems: &mut Vec<String>) {
    for (k, node) in admn.nodes.iter().enumerate() {
        if let Some(kernel) = &node.kernel {
            if let Err(e) = kernel.check() {
                problems.push(format!("{path}.nodes[{k}].kernel: {e}"));
            }
        }
    }
    if let Err(e) = admn.target.check() {
        problems.push(format!("{path}.target: {e}"));
    }
}

/// Parse a document from text: rational pre-pass, deserialization, schema
/// checks.
pub fn parse_str(text: &str) -> Result<SpecDocument> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    resolve_rationals(&mut value);
    let doc: SpecDocument =
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    schema_check(&doc)?;
    Ok(doc)
}

/// Parse a document from a file.
pub fn parse(path: &std::path::Path) -> Result<SpecDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

/// Serialize a document; `parse_str(serialize(doc)) == doc` for any document
/// this produces.
pub fn serialize(doc: &SpecDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serialization");
    out.push('\n');
    out
}

/// Export a catalog entry as a document, for inspection or round-tripping.
pub fn export(name: &str) -> Result<SpecDocument> {
    use admnet_core::catalog::{build, Instance};
    let doc = match build(name)? {
        Instance::Coding(ci) => SpecDocument {
            network: Some(ci.admn),
            omega: Some(ci.omega),
            rates: ci.external,
            options: Some(Options {
                mode: Some(ci.mode),
                ..Options::default()
            }),
            ..SpecDocument::default()
        },
        Instance::DualCollection(families) => SpecDocument {
            dual: Some(families),
            ..SpecDocument::default()
        },
        Instance::Gdcaf(spec) => SpecDocument {
            gdcaf: Some(spec),
            ..SpecDocument::default()
        },
        Instance::Gaussian(agn, params) => SpecDocument {
            gaussian: Some(GaussianSection {
                network: agn,
                params,
            }),
            ..SpecDocument::default()
        },
    };
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_resolve() {
        let mut v: Value =
            serde_json::from_str(r#"{"a": "1/3", "b": {"rational": "2/4"}, "c": "x1"}"#).unwrap();
        resolve_rationals(&mut v);
        assert!((v["a"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v["b"].as_f64().unwrap(), 0.5);
        assert_eq!(v["c"], Value::String("x1".into()));
    }

    #[test]
    fn minimal_document_parses() {
        let doc = parse_str(r#"{"rates": ["R"]}"#).unwrap();
        assert_eq!(doc.rates, vec!["R".to_string()]);
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(matches!(
            parse_str(r#"{"no_such_section": 1}"#),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn gamma_out_of_range_names_path() {
        let doc = export("mac-binary-adder").unwrap();
        let mut raw: Value = serde_json::from_str(&serialize(&doc)).unwrap();
        raw["omega"]["codebooks"][0]["gamma"] = serde_json::json!([5]);
        let err = parse_str(&raw.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("omega.codebooks[0].gamma"), "{msg}");
    }

    #[test]
    fn catalog_exports_round_trip() {
        for name in admnet_core::catalog::list() {
            let doc = export(name).unwrap();
            let text = serialize(&doc);
            let back = parse_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(back, doc, "{name} round trip changed the document");
        }
    }
}
