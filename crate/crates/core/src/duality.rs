//! Packing/covering duality across problem transforms.
//!
//! From an original network and restricted coding parameter set (no
//! nonunique decoding, no superposition), three dual problems are formed:
//! type I swaps the roles of transmit and observation alphabets, type II
//! reverses the node order (swapping each node's covered and decoded codebook
//! sets), and type III does both. Each dual family is a standalone network
//! plus parameter set; its achievability conditions are generated by the same
//! packing/covering machinery, and the structural correspondence between the
//! families is checkable mechanically.

use crate::coding::CodingParams;
use crate::error::Result;
use crate::network::Admn;
use crate::region::{generate_system_on, BoundKind, InequalitySystem, Mode};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualType {
    /// transmit/observation roles swapped, node order kept
    TypeI,
    /// node order reversed, covered/decoded sets swapped
    TypeII,
    /// both transforms composed
    TypeIII,
}

impl DualType {
    pub fn reverses_order(self) -> bool {
        matches!(self, DualType::TypeII | DualType::TypeIII)
    }

    pub fn swaps_roles(self) -> bool {
        matches!(self, DualType::TypeI | DualType::TypeIII)
    }
}

/// One problem of a dual collection: a network together with a restricted
/// parameter set sharing the codebook indexing of the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFamily {
    pub label: String,
    pub admn: Admn,
    pub omega: CodingParams,
}

fn restricted(omega: &CodingParams, label: &str, report: &mut Vec<String>) {
    if !omega.is_omega_prime() {
        report.push(format!(
            "{label}: parameter set is not in restricted form (nu = mu, gamma = self + bases)"
        ));
    }
    for (j, cb) in omega.codebooks.iter().enumerate() {
        if !cb.superpose.is_empty() {
            report.push(format!("{label}: codebook {j} uses superposition"));
        }
    }
    for (k0, nc) in omega.nodes.iter().enumerate() {
        if !nc.decode_nonunique.is_empty() {
            report.push(format!("{label}: node {} uses nonunique decoding", k0 + 1));
        }
    }
}

/// Expected per-node (covered, decoded) codebook sets of the `t`-dual of
/// `omega`, in the dual's own node order.
pub fn dual_skeleton(omega: &CodingParams, t: DualType) -> Vec<(BTreeSet<usize>, BTreeSet<usize>)> {
    let n = omega.nodes.len();
    (0..n)
        .map(|k0| {
            let src = if t.reverses_order() { n - 1 - k0 } else { k0 };
            let nc = &omega.nodes[src];
            if t.reverses_order() {
                (nc.decode_unique.clone(), nc.compress.clone())
            } else {
                (nc.compress.clone(), nc.decode_unique.clone())
            }
        })
        .collect()
}

/// Report every structural mismatch between a claimed dual family and the
/// transform of the original: restricted form, matching codebook counts and
/// rate variables, per-node covered/decoded sets under the swap rule, and the
/// generated subset families (packing subsets of one problem must reappear as
/// the corresponding subsets of the other).
pub fn verify_swap_structure(
    original: &DualFamily,
    dual: &DualFamily,
    t: DualType,
) -> Result<Vec<String>> {
    let mut report = Vec::new();
    restricted(&original.omega, &original.label, &mut report);
    restricted(&dual.omega, &dual.label, &mut report);
    if original.omega.mu != dual.omega.mu {
        report.push(format!(
            "index set counts differ: {} vs {}",
            original.omega.mu, dual.omega.mu
        ));
    }
    if original.omega.rate_vars != dual.omega.rate_vars {
        report.push("internal rate variables differ".into());
    }
    let n = original.omega.nodes.len();
    if dual.omega.nodes.len() != n {
        report.push(format!(
            "node counts differ: {n} vs {}",
            dual.omega.nodes.len()
        ));
        return Ok(report);
    }
    for (k0, (expect_w, expect_d)) in dual_skeleton(&original.omega, t).iter().enumerate() {
        let nc = &dual.omega.nodes[k0];
        if &nc.compress != expect_w {
            report.push(format!(
                "dual node {}: covered set {:?}, expected {:?}",
                k0 + 1,
                nc.compress,
                expect_w
            ));
        }
        if &nc.decode_unique != expect_d {
            report.push(format!(
                "dual node {}: decoded set {:?}, expected {:?}",
                k0 + 1,
                nc.decode_unique,
                expect_d
            ));
        }
    }
    if !report.is_empty() {
        return Ok(report);
    }
    // generated subset families must correspond: a packing subset of the
    // original reappears at the transformed node, flipped to covering when
    // the node order is reversed
    let orig = family_subsets(original)?;
    let mut dual_subs = family_subsets(dual)?;
    for ((k, kind), subsets) in orig {
        let dk = if t.reverses_order() { n + 1 - k } else { k };
        let dkind = if t.reverses_order() {
            match kind {
                BoundKind::Packing => BoundKind::Covering,
                BoundKind::Covering => BoundKind::Packing,
            }
        } else {
            kind
        };
        let got = dual_subs.remove(&(dk, dkind)).unwrap_or_default();
        if got != subsets {
            report.push(format!(
                "node {k} {kind:?} subsets {subsets:?} do not reappear at dual node {dk} as {dkind:?} ({got:?})"
            ));
        }
    }
    for ((k, kind), subsets) in dual_subs {
        if !subsets.is_empty() {
            report.push(format!(
                "dual node {k} has unmatched {kind:?} subsets {subsets:?}"
            ));
        }
    }
    Ok(report)
}

type SubsetFamilies = BTreeMap<(usize, BoundKind), BTreeSet<Vec<usize>>>;

fn family_subsets(family: &DualFamily) -> Result<SubsetFamilies> {
    let system = dual_system(family)?;
    let mut out: SubsetFamilies = BTreeMap::new();
    for ineq in &system.inequalities {
        let origin = ineq
            .origin
            .as_ref()
            .expect("generated inequalities carry origins");
        out.entry((origin.node, origin.kind))
            .or_default()
            .insert(origin.subset.clone());
    }
    Ok(out)
}

/// The achievability conditions of one family, generated in restricted mode.
pub fn dual_system(family: &DualFamily) -> Result<InequalitySystem> {
    let joint = crate::coding::induced_joint(&family.omega, &family.admn)?;
    generate_system_on(
        &family.omega,
        &family.admn,
        &joint,
        Mode::Corollary1,
        crate::region::DEFAULT_SUBSET_CAP,
        &family.label,
    )
}

/// Generate the conditions of every family of a dual collection.
pub fn dual_systems(families: &[DualFamily]) -> Result<Vec<InequalitySystem>> {
    families.iter().map(dual_system).collect()
}
