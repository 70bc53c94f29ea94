//! End-to-end tests of the `admnet` binary: exit codes, output shapes, and
//! output determinism.

use admnet_cli::spec::{self, SpecDocument};
use std::path::PathBuf;
use std::process::{Command, Output};

fn admnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn write_doc(dir: &tempfile::TempDir, name: &str, doc: &SpecDocument) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, spec::serialize(doc)).expect("spec written");
    path
}

#[test]
fn catalog_run_diamond_prints_rate_line() {
    let out = admnet(&["catalog", "run", "diamond-gdcaf"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "rate = 1.584963 PASS\n");
}

#[test]
fn catalog_list_names_every_entry() {
    let out = admnet(&["catalog", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let names: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(names, admnet_core::catalog::list());
}

#[test]
fn unknown_catalog_entry_is_a_usage_error() {
    let out = admnet(&["catalog", "run", "no-such-entry"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_subcommand_argument_is_a_usage_error() {
    let out = admnet(&["region"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_accepts_a_catalog_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "mac.json", &spec::export("mac-binary-adder").unwrap());
    let out = admnet(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out), "ok\n");
}

#[test]
fn validate_rejects_overlapping_fresh_sets() {
    let mut doc = spec::export("mac-binary-adder").unwrap();
    // point both codebooks at the same index set: fresh-set disjointness fails
    let omega = doc.omega.as_mut().unwrap();
    omega.codebooks[1].gamma = omega.codebooks[0].gamma.clone();
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "broken.json", &doc);
    let out = admnet(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("A-1"),
        "violation should name the constraint: {}",
        stdout(&out)
    );
}

#[test]
fn region_prints_the_adder_region_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "mac.json", &spec::export("mac-binary-adder").unwrap());
    let first = admnet(&["region", path.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let text = stdout(&first);
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.contains("R1 + R2 <"), "{text}");
    let second = admnet(&["region", path.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout, "output must be byte-identical");
}

#[test]
fn region_json_round_trips_through_serde() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "gp.json", &spec::export("gelfand-pinsker-binary").unwrap());
    let out = admnet(&["region", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let region: admnet_core::region::RateRegion =
        serde_json::from_str(&stdout(&out)).expect("valid region record");
    assert!(!region.infeasible);
    assert_eq!(region.system.inequalities.len(), 1);
}

#[test]
fn dual_checks_pass_for_the_quadruple_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "quad.json", &spec::export("mac-quadruple").unwrap());
    for t in ["I", "II", "III"] {
        let out = admnet(&["dual", path.to_str().unwrap(), "--type", t]);
        assert_eq!(out.status.code(), Some(0), "type {t}: {}", stdout(&out));
        assert!(stdout(&out).contains("swap-structure PASS"), "type {t}");
    }
}

#[test]
fn gdcaf_reports_the_diamond_rate() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "diamond.json", &spec::export("diamond-gdcaf").unwrap());
    let out = admnet(&["gdcaf", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("rate = 1.584963"), "{text}");
    assert!(text.contains("feasible = true"), "{text}");
}

#[test]
fn gaussian_prints_the_bound_system() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "p2p.json", &spec::export("gaussian-p2p").unwrap());
    let out = admnet(&["gaussian", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).is_empty());
}

#[test]
fn unfold_emits_a_document_that_validates() {
    let doc = SpecDocument {
        dmn: Some(admnet_core::catalog::nnc_dmn().unwrap()),
        ..SpecDocument::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(&dir, "relay.json", &doc);
    let out = admnet(&["unfold", path.to_str().unwrap(), "--blocks", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let unfolded = dir.path().join("unfolded.json");
    std::fs::write(&unfolded, out.stdout).unwrap();
    let check = admnet(&["validate", unfolded.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
}

#[test]
fn malformed_document_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = admnet(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
