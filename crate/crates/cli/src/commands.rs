//! Command implementations. Each returns a process exit code: 0 on success,
//! 1 when the input fails a semantic check or a pipeline reports a problem,
//! 2 when the request itself is unusable (missing file, malformed document,
//! missing section, unknown catalog entry).

use crate::spec::{self, SpecDocument};
use admnet_core::coding::{check_target_match, validate_params};
use admnet_core::duality::{dual_system, verify_swap_structure, DualType};
use admnet_core::gaussian::GaussianSystemBuilder;
use admnet_core::network::{unfold, DEFAULT_UNFOLD_CAP};
use admnet_core::region::{
    fourier_motzkin, generate_system, prune_numeric, InequalitySystem, Mode, DEFAULT_SUBSET_CAP,
};
use std::collections::BTreeMap;
use std::path::Path;

fn load(path: &Path) -> Result<SpecDocument, i32> {
    spec::parse(path).map_err(|e| {
        eprintln!("error: {e}");
        2
    })
}

fn missing(section: &str, command: &str) -> i32 {
    eprintln!("error: `{command}` requires a `{section}` section");
    2
}

/// Stable text order for inequality listings.
fn sorted_lines(system: &InequalitySystem) -> Vec<String> {
    let mut lines: Vec<String> = system.inequalities.iter().map(|i| i.to_string()).collect();
    lines.sort();
    lines
}

pub fn validate_cmd(path: &Path) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let tol = doc
        .options
        .as_ref()
        .and_then(|o| o.tolerance)
        .unwrap_or(1e-9);
    let mut violations = Vec::new();
    fn check_pair(
        violations: &mut Vec<String>,
        tol: f64,
        prefix: &str,
        admn: &admnet_core::network::Admn,
        omega: Option<&admnet_core::coding::CodingParams>,
    ) {
        for v in admn.validate() {
            violations.push(format!("{prefix}network: {v}"));
        }
        if let Some(omega) = omega {
            let before = violations.len();
            for v in validate_params(omega, admn) {
                violations.push(format!("{prefix}omega: {v}"));
            }
            if violations.len() == before {
                match check_target_match(omega, admn) {
                    Ok(dev) if dev <= tol => {}
                    Ok(dev) => violations.push(format!(
                        "{prefix}omega: induced law deviates from the target by {dev:.3e}"
                    )),
                    Err(e) => violations.push(format!("{prefix}omega: {e}")),
                }
            }
        }
    }
    if let Some(admn) = &doc.network {
        check_pair(&mut violations, tol, "", admn, doc.omega.as_ref());
    } else if doc.omega.is_some() {
        violations.push("omega: no `network` section to validate against".into());
    }
    if let Some(fams) = &doc.dual {
        for fam in fams {
            check_pair(
                &mut violations,
                tol,
                &format!("dual/{}/", fam.label),
                &fam.admn,
                Some(&fam.omega),
            );
        }
    }
    if let Some(dmn) = &doc.dmn {
        if let Err(e) = dmn.check() {
            violations.push(format!("dmn: {e}"));
        }
    }
    if let Some(g) = &doc.gaussian {
        for v in g.network.validate() {
            violations.push(format!("gaussian.network: {v}"));
        }
        for v in g.params.validate(&g.network) {
            violations.push(format!("gaussian.params: {v}"));
        }
    }
    if let Some(g) = &doc.gdcaf {
        if let Err(e) = g.joint() {
            violations.push(format!("gdcaf: {e}"));
        }
    }
    if violations.is_empty() {
        println!("ok");
        0
    } else {
        for v in &violations {
            println!("{v}");
        }
        1
    }
}

pub fn region_cmd(path: &Path, mode_flag: Option<Mode>, no_prune: bool, json: bool) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(admn) = &doc.network else {
        return missing("network", "region");
    };
    let Some(omega) = &doc.omega else {
        return missing("omega", "region");
    };
    let opts = doc.options.clone().unwrap_or_default();
    let mode = mode_flag.or(opts.mode).unwrap_or(Mode::Corollary1);
    let cap = opts.subset_cap.unwrap_or(DEFAULT_SUBSET_CAP);
    let mut report = admn.validate();
    report.extend(validate_params(omega, admn));
    if !report.is_empty() {
        for r in &report {
            eprintln!("error: {r}");
        }
        return 1;
    }
    let generated = match generate_system(omega, admn, mode, cap) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let eliminate: Vec<String> = omega
        .rate_vars
        .iter()
        .filter(|v| !doc.rates.contains(v))
        .cloned()
        .collect();
    let mut region = match fourier_motzkin(&generated.system, &eliminate) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if !no_prune {
        region = prune_numeric(&region, &BTreeMap::new());
    }
    region
        .system
        .inequalities
        .sort_by_key(|i| i.to_string());
    if json {
        println!("{}", serde_json::to_string_pretty(&region).expect("region serialization"));
    } else {
        print!("{region}");
    }
    0
}

pub fn gdcaf_cmd(path: &Path) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(spec) = &doc.gdcaf else {
        return missing("gdcaf", "gdcaf");
    };
    match spec.rate() {
        Ok(result) => {
            println!("rate = {:.6}", result.rate);
            println!("feasible = {}", result.feasible);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn dual_cmd(path: &Path, dual_type: DualType) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(fams) = &doc.dual else {
        return missing("dual", "dual");
    };
    let idx = match dual_type {
        DualType::TypeI => 1,
        DualType::TypeII => 2,
        DualType::TypeIII => 3,
    };
    if fams.len() <= idx {
        eprintln!(
            "error: `dual` document holds {} problems; the requested transform needs entry {}",
            fams.len(),
            idx + 1
        );
        return 2;
    }
    let system = match dual_system(&fams[idx]) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    println!("{}:", fams[idx].label);
    for line in sorted_lines(&system) {
        println!("{line}");
    }
    match verify_swap_structure(&fams[0], &fams[idx], dual_type) {
        Ok(report) if report.is_empty() => {
            println!("swap-structure PASS");
            0
        }
        Ok(report) => {
            for r in &report {
                println!("swap-structure FAIL: {r}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn gaussian_cmd(path: &Path) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(g) = &doc.gaussian else {
        return missing("gaussian", "gaussian");
    };
    let mut report = g.network.validate();
    report.extend(g.params.validate(&g.network));
    if !report.is_empty() {
        for r in &report {
            eprintln!("error: {r}");
        }
        return 1;
    }
    let builder = match GaussianSystemBuilder::new(&g.network, &g.params) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match builder.system() {
        Ok(system) => {
            for line in sorted_lines(&system) {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn catalog_list_cmd() -> i32 {
    for name in admnet_core::catalog::list() {
        println!("{name}");
    }
    0
}

pub fn catalog_run_cmd(name: &str) -> i32 {
    match admnet_core::catalog::run(name) {
        Ok(verdict) => {
            print!("{verdict}");
            if verdict.passed() {
                0
            } else {
                1
            }
        }
        Err(admnet_core::error::Error::UnknownEntry(n)) => {
            eprintln!("error: unknown catalog entry `{n}`");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn unfold_cmd(path: &Path, blocks: usize) -> i32 {
    let doc = match load(path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(dmn) = &doc.dmn else {
        return missing("dmn", "unfold");
    };
    let cap = doc
        .options
        .as_ref()
        .and_then(|o| o.unfold_cap)
        .unwrap_or(DEFAULT_UNFOLD_CAP);
    match unfold(dmn, blocks, cap) {
        Ok(admn) => {
            let out = SpecDocument {
                network: Some(admn),
                rates: vec![dmn.rate_symbol.clone()],
                ..SpecDocument::default()
            };
            print!("{}", spec::serialize(&out));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
