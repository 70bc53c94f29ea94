//! Unified coding parameter sets.
//!
//! A [`CodingParams`] value fixes, for an N-node network: the number of index
//! sets `mu` with one internal rate variable each, `nu` covering codebooks
//! (composite factor lists `U_j`), the index map `gamma[j]` and superposition
//! set `superpose[j]` per codebook, and per node the uniquely decoded set
//! `D_k`, nonuniquely decoded set `B_k`, covered set `W_k`, the covering
//! kernel, and deterministic transmit maps. Codebook and index-set indices are
//! 0-based throughout.

use crate::dist::{CondTable, FactoredJoint, VarSet};
use crate::error::{Error, Result};
use crate::network::Admn;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub label: String,
    /// composite U_j as a list of factor ids
    pub factors: Vec<String>,
    /// index sets this codebook is indexed by
    pub gamma: BTreeSet<usize>,
    /// codebooks this one is superposed on
    #[serde(default)]
    pub superpose: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct NodeCoding {
    #[serde(default)]
    pub decode_unique: BTreeSet<usize>,
    #[serde(default)]
    pub decode_nonunique: BTreeSet<usize>,
    #[serde(default)]
    pub compress: BTreeSet<usize>,
    /// covering kernel generating the new concrete factors of U_{W_k}
    #[serde(default)]
    pub kernel: Option<CondTable>,
    /// deterministic transmit maps, one per x-factor not produced elsewhere
    #[serde(default)]
    pub maps: Vec<MapTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapTable {
    pub output: String,
    pub inputs: Vec<String>,
    /// output symbol per input tuple, row-major over `inputs`
    pub values: Vec<usize>,
}

impl MapTable {
    /// Deterministic kernel for this map, with input sizes taken from `joint`
    /// and the output alphabet sized by the largest value used.
    pub fn to_kernel(&self, joint: &FactoredJoint) -> Result<CondTable> {
        let given: Vec<(String, usize)> = self
            .inputs
            .iter()
            .map(|id| {
                joint
                    .factor(id)
                    .and_then(|f| f.size())
                    .map(|s| (id.clone(), s))
                    .ok_or_else(|| {
                        Error::ShapeMismatch(format!(
                            "map for {} reads absent or symbolic factor {id}",
                            self.output
                        ))
                    })
            })
            .collect::<Result<_>>()?;
        let size = self.values.iter().max().copied().unwrap_or(0) + 1;
        let output = crate::dist::Factor::concrete(&self.output, size);
        CondTable::deterministic(given, output, &self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingParams {
    pub mu: usize,
    /// internal rate variable names, one per index set
    pub rate_vars: Vec<String>,
    pub codebooks: Vec<Codebook>,
    /// per network node, same order
    pub nodes: Vec<NodeCoding>,
}

impl CodingParams {
    pub fn nu(&self) -> usize {
        self.codebooks.len()
    }

    /// Union of gamma over a codebook set.
    pub fn gamma_of(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter()
            .flat_map(|&j| self.codebooks[j].gamma.iter().copied())
            .collect()
    }

    /// Factor ids of the composite U over a codebook set.
    pub fn u_varset(&self, set: &BTreeSet<usize>) -> VarSet {
        set.iter()
            .flat_map(|&j| self.codebooks[j].factors.iter().cloned())
            .collect()
    }

    /// Codebooks covered before node k (1-based), i.e. W^{k-1}.
    pub fn covered_before(&self, k: usize) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .take(k - 1)
            .flat_map(|n| n.compress.iter().copied())
            .collect()
    }

    /// True iff nu = mu and gamma[j] = {j} union superpose[j] for every j.
    pub fn is_omega_prime(&self) -> bool {
        self.nu() == self.mu
            && self.codebooks.iter().enumerate().all(|(j, cb)| {
                let mut expect = cb.superpose.clone();
                expect.insert(j);
                cb.gamma == expect
            })
    }
}

/// Name every constraint violation; an empty report means the parameter set is
/// admissible for the network.
pub fn validate_params(omega: &CodingParams, admn: &Admn) -> Vec<String> {
    let mut report = Vec::new();
    let mu = omega.mu;
    let nu = omega.nu();
    if omega.rate_vars.len() != mu {
        report.push(format!(
            "{} rate variables declared for mu = {mu}",
            omega.rate_vars.len()
        ));
    }
    if omega.nodes.len() != admn.node_count() {
        report.push(format!(
            "{} node entries for an {}-node network",
            omega.nodes.len(),
            admn.node_count()
        ));
    }
    for (j, cb) in omega.codebooks.iter().enumerate() {
        if let Some(&i) = cb.gamma.iter().find(|&&i| i >= mu) {
            report.push(format!("codebook {j}: gamma index {i} outside [0, {mu})"));
        }
        if let Some(&i) = cb.superpose.iter().find(|&&i| i >= nu) {
            report.push(format!(
                "codebook {j}: superpose index {i} outside [0, {nu})"
            ));
        }
    }
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for (k0, nc) in omega.nodes.iter().enumerate() {
        let k = k0 + 1;
        for (name, set) in [
            ("W", &nc.compress),
            ("D", &nc.decode_unique),
            ("B", &nc.decode_nonunique),
        ] {
            if let Some(&j) = set.iter().find(|&&j| j >= nu) {
                report.push(format!("node {k}: {name} contains {j}, outside [0, {nu})"));
            }
        }
        // membership rules
        for &j in nc.compress.intersection(&covered) {
            report.push(format!(
                "node {k}: W covers codebook {j}, already covered earlier"
            ));
        }
        for &j in nc.decode_unique.difference(&covered) {
            report.push(format!(
                "node {k}: D decodes codebook {j}, not covered earlier"
            ));
        }
        for &j in &nc.decode_nonunique {
            if !covered.contains(&j) {
                report.push(format!(
                    "node {k}: B decodes codebook {j}, not covered earlier"
                ));
            } else if nc.decode_unique.contains(&j) {
                report.push(format!("node {k}: codebook {j} in both D and B"));
            }
        }
        covered.extend(nc.compress.iter().copied());
        if let Some(kernel) = &nc.kernel {
            if let Err(e) = kernel.check() {
                report.push(format!("node {k}: covering kernel: {e}"));
            }
        }
    }
    for j in 0..nu {
        if !covered.contains(&j) {
            report.push(format!("codebook {j} is never covered"));
        }
    }
    // A-1: the sets gamma(W_k) \ gamma(D_k) are pairwise disjoint
    let fresh: Vec<BTreeSet<usize>> = omega
        .nodes
        .iter()
        .map(|nc| {
            let gw = omega.gamma_of(&nc.compress);
            let gd = omega.gamma_of(&nc.decode_unique);
            gw.difference(&gd).copied().collect()
        })
        .collect();
    for a in 0..fresh.len() {
        for b in a + 1..fresh.len() {
            if let Some(&i) = fresh[a].intersection(&fresh[b]).next() {
                report.push(format!(
                    "A-1: index set {i} is fresh at both node {} and node {}",
                    a + 1,
                    b + 1
                ));
            }
        }
    }
    // A-2: gamma(A_j) within gamma(j), and superposition respects codebook order
    for (j, cb) in omega.codebooks.iter().enumerate() {
        for &jp in &cb.superpose {
            if jp >= nu {
                continue;
            }
            if jp >= j {
                report.push(format!(
                    "A-2: codebook {j} superposed on {jp}, which is not earlier"
                ));
            }
            if let Some(&i) = omega.codebooks[jp].gamma.difference(&cb.gamma).next() {
                report.push(format!(
                    "A-2: codebook {j} superposed on {jp} but index set {i} is outside gamma({j})"
                ));
            }
        }
    }
    // A-3: superposition stays within what each node handles
    for (k0, nc) in omega.nodes.iter().enumerate() {
        let k = k0 + 1;
        let wd: BTreeSet<usize> = nc.compress.union(&nc.decode_unique).copied().collect();
        let db: BTreeSet<usize> = nc
            .decode_unique
            .union(&nc.decode_nonunique)
            .copied()
            .collect();
        for &j in &nc.compress {
            if j >= nu {
                continue;
            }
            if let Some(&a) = omega.codebooks[j].superpose.difference(&wd).next() {
                report.push(format!(
                    "A-3: node {k} covers codebook {j} superposed on {a}, outside W union D"
                ));
            }
        }
        for &j in &nc.decode_nonunique {
            if j >= nu {
                continue;
            }
            if let Some(&a) = omega.codebooks[j].superpose.difference(&db).next() {
                report.push(format!(
                    "A-3: node {k} decodes codebook {j} nonuniquely, superposed on {a}, outside D union B"
                ));
            }
        }
        for &j in &nc.decode_unique {
            if j >= nu {
                continue;
            }
            if let Some(&a) = omega.codebooks[j]
                .superpose
                .difference(&nc.decode_unique)
                .next()
            {
                report.push(format!(
                    "A-3: node {k} decodes codebook {j} uniquely, superposed on {a}, outside D"
                ));
            }
        }
    }
    report
}

/// The joint law over codebook, transmit and observation factors obtained by
/// composing, node by node: the channel kernel, the covering kernel, and the
/// deterministic transmit maps.
pub fn induced_joint(omega: &CodingParams, admn: &Admn) -> Result<FactoredJoint> {
    if omega.nodes.len() != admn.node_count() {
        return Err(Error::ShapeMismatch("node count mismatch".into()));
    }
    let mut joint = FactoredJoint::unit();
    for (node, nc) in admn.nodes.iter().zip(&omega.nodes) {
        for f in &node.new_symbolic {
            joint = joint.with_symbolic(f.clone())?;
        }
        // symbolic transmit declarations carry no law; register them before
        // covering so codebooks may list them as components
        for decl in &node.x_decls {
            if decl.is_symbolic() && !joint.has_factor(&decl.id) {
                joint = joint.with_symbolic(decl.clone())?;
            }
        }
        if let Some(kernel) = &node.kernel {
            joint = joint.extend(kernel)?;
        }
        if let Some(kernel) = &nc.kernel {
            joint = joint.extend(kernel)?;
        }
        // every covered codebook must be fully realized at this point
        for &j in &nc.compress {
            for id in &omega.codebooks[j].factors {
                if !joint.has_factor(id) {
                    return Err(Error::ShapeMismatch(format!(
                        "codebook {} covered at node {} but factor {id} was not produced",
                        omega.codebooks[j].label, node.index
                    )));
                }
            }
        }
        for decl in &node.x_decls {
            if joint.has_factor(&decl.id) {
                continue;
            }
            if decl.is_symbolic() {
                joint = joint.with_symbolic(decl.clone())?;
                continue;
            }
            let map = nc
                .maps
                .iter()
                .find(|m| m.output == decl.id)
                .ok_or_else(|| {
                    Error::ShapeMismatch(format!(
                        "no transmit map for factor {} at node {}",
                        decl.id, node.index
                    ))
                })?;
            let given: Vec<(String, usize)> = map
                .inputs
                .iter()
                .map(|id| {
                    joint
                        .factor(id)
                        .and_then(|f| f.size())
                        .map(|s| (id.clone(), s))
                        .ok_or_else(|| {
                            Error::ShapeMismatch(format!(
                                "map for {} reads absent or symbolic factor {id}",
                                decl.id
                            ))
                        })
                })
                .collect::<Result<_>>()?;
            let table = CondTable::deterministic(given, decl.clone(), &map.values)?;
            joint = joint.extend(&table)?;
        }
        for id in node.x_factors.iter().chain(&node.y_factors) {
            if !joint.has_factor(id) {
                return Err(Error::ShapeMismatch(format!(
                    "factor {id} of node {} unresolved",
                    node.index
                )));
            }
        }
    }
    joint.check()?;
    Ok(joint)
}

/// Max absolute deviation between the induced joint's marginal over the
/// network factors and the declared target.
pub fn check_target_match(omega: &CodingParams, admn: &Admn) -> Result<f64> {
    let induced = induced_joint(omega, admn)?;
    for f in admn.target.symbolic_factors() {
        if induced.factor(&f.id) != Some(f) {
            return Err(Error::ShapeMismatch(format!(
                "target symbolic factor {} not reproduced",
                f.id
            )));
        }
    }
    let ids: VarSet = admn
        .target
        .concrete_factors()
        .iter()
        .map(|f| f.id.clone())
        .collect();
    let marg = induced.marginalize(&ids)?;
    marg.max_abs_diff(&admn.target)
}

/// Convenience for tests and fuzzing: mutate one set-membership field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetField {
    DecodeUnique,
    DecodeNonunique,
    Compress,
    Gamma,
    Superpose,
}

pub fn toggle_membership(
    omega: &CodingParams,
    field: SetField,
    owner: usize,
    member: usize,
) -> CodingParams {
    let mut out = omega.clone();
    let set = match field {
        SetField::DecodeUnique => &mut out.nodes[owner].decode_unique,
        SetField::DecodeNonunique => &mut out.nodes[owner].decode_nonunique,
        SetField::Compress => &mut out.nodes[owner].compress,
        SetField::Gamma => &mut out.codebooks[owner].gamma,
        SetField::Superpose => &mut out.codebooks[owner].superpose,
    };
    if !set.remove(&member) {
        set.insert(member);
    }
    out
}
