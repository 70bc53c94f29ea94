//! Acyclic discrete memoryless networks.
//!
//! Nodes act in index order. Node k's observation `Y_k` is a list of factor
//! ids: factors freshly generated by the node's channel kernel, symbolic
//! message factors introduced at the node, and ids shared with earlier nodes
//! (noiseless embedding, e.g. a previous block's transmit state). Transmit
//! variables `X_k` are declared here with their alphabets; their realization
//! (deterministic symbol maps) belongs to a coding parameter set.

use crate::dist::{ravel, unravel, varset, CondTable, Factor, FactoredJoint, VarSet};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmnNode {
    /// 1-based node index
    pub index: usize,
    /// symbolic factors first observed at this node (messages, pipe contents)
    #[serde(default)]
    pub new_symbolic: Vec<Factor>,
    /// channel kernel generating this node's new concrete observation factors
    #[serde(default)]
    pub kernel: Option<CondTable>,
    /// ids composing the observation Y_k (new factors and shared earlier ids)
    pub y_factors: Vec<String>,
    /// concrete or symbolic factors introduced as this node's transmit output
    #[serde(default)]
    pub x_decls: Vec<Factor>,
    /// ids composing the input X_k
    #[serde(default)]
    pub x_factors: Vec<String>,
}

impl AdmnNode {
    /// Ids of every factor first declared at this node.
    pub fn introduced_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = self.new_symbolic.iter().map(|f| f.id.clone()).collect();
        if let Some(k) = &self.kernel {
            out.extend(k.outputs.iter().map(|f| f.id.clone()));
        }
        out.extend(self.x_decls.iter().map(|f| f.id.clone()));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admn {
    pub nodes: Vec<AdmnNode>,
    /// target distribution over all declared x/y factors
    pub target: FactoredJoint,
}

impl Admn {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Ids available strictly before node k (1-based).
    pub fn ids_before(&self, k: usize) -> VarSet {
        let mut out = VarSet::new();
        for node in &self.nodes {
            if node.index >= k {
                break;
            }
            out.extend(node.introduced_ids());
        }
        out
    }

    pub fn y_varset(&self, k: usize) -> VarSet {
        varset(self.nodes[k - 1].y_factors.iter())
    }

    pub fn x_varset(&self, k: usize) -> VarSet {
        varset(self.nodes[k - 1].x_factors.iter())
    }

    /// All declared factors in introduction order.
    pub fn declared_factors(&self) -> Vec<Factor> {
        let mut out = Vec::new();
        for node in &self.nodes {
            out.extend(node.new_symbolic.iter().cloned());
            if let Some(k) = &node.kernel {
                out.extend(k.outputs.iter().cloned());
            }
            out.extend(node.x_decls.iter().cloned());
        }
        out
    }

    pub fn find_factor(&self, id: &str) -> Option<Factor> {
        self.declared_factors().into_iter().find(|f| f.id == id)
    }

    /// Report every invariant violation; an empty report means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let mut available: BTreeSet<String> = BTreeSet::new();
        for (pos, node) in self.nodes.iter().enumerate() {
            let label = format!("node {}", node.index);
            if node.index != pos + 1 {
                report.push(format!(
                    "{label}: index not contiguous (expected {})",
                    pos + 1
                ));
            }
            let before = available.clone();
            for f in &node.new_symbolic {
                if !f.is_symbolic() {
                    report.push(format!(
                        "{label}: {} declared symbolic but is concrete",
                        f.id
                    ));
                }
                if !available.insert(f.id.clone()) {
                    report.push(format!("{label}: duplicate factor id {}", f.id));
                }
            }
            if let Some(kernel) = &node.kernel {
                if let Err(e) = kernel.check() {
                    report.push(format!("{label}: {e}"));
                }
                for g in &kernel.given {
                    if !before.contains(g) {
                        report.push(format!(
                            "{label}: kernel conditions on {g}, which is not a factor of an earlier node"
                        ));
                    }
                }
                for f in &kernel.outputs {
                    if !available.insert(f.id.clone()) {
                        report.push(format!("{label}: duplicate factor id {}", f.id));
                    }
                }
            }
            for id in &node.y_factors {
                if !available.contains(id) {
                    report.push(format!("{label}: y component {id} unresolved"));
                }
            }
            for f in &node.x_decls {
                if !available.insert(f.id.clone()) {
                    report.push(format!("{label}: duplicate factor id {}", f.id));
                }
            }
            for id in &node.x_factors {
                if !available.contains(id) {
                    report.push(format!("{label}: x component {id} unresolved"));
                }
            }
        }
        // target covers exactly the declared factors
        let declared = self.declared_factors();
        let declared_ids: BTreeSet<String> = declared.iter().map(|f| f.id.clone()).collect();
        let target_ids = self.target.all_ids();
        for id in declared_ids.difference(&target_ids) {
            report.push(format!("target: missing factor {id}"));
        }
        for id in target_ids.difference(&declared_ids) {
            report.push(format!("target: undeclared factor {id}"));
        }
        if let Err(e) = self.target.check() {
            report.push(format!("target: {e}"));
        } else if report.is_empty() {
            // observation-chain consistency of the target with the kernels
            for node in &self.nodes {
                if let Some(kernel) = &node.kernel {
                    let outputs: Vec<String> =
                        kernel.outputs.iter().map(|f| f.id.clone()).collect();
                    match conditional_max_diff(&self.target, kernel, &outputs) {
                        Ok(dev) => {
                            if dev > 1e-9 {
                                report.push(format!(
                                    "node {}: target conditional deviates from kernel by {dev:.3e}",
                                    node.index
                                ));
                            }
                        }
                        Err(e) => report.push(format!("node {}: {e}", node.index)),
                    }
                }
            }
        }
        report
    }
}

/// Max deviation between a kernel and the corresponding conditional of the
/// joint, over conditioning rows of positive probability.
fn conditional_max_diff(
    joint: &FactoredJoint,
    kernel: &CondTable,
    outputs: &[String],
) -> Result<f64> {
    let mut all = varset(kernel.given.iter());
    all.extend(outputs.iter().cloned());
    let marg = joint.marginalize(&all)?;
    let sizes = marg.sizes();
    let gpos: Vec<usize> = kernel
        .given
        .iter()
        .map(|id| {
            marg.concrete_index(id)
                .ok_or_else(|| Error::UnknownFactor(id.clone()))
        })
        .collect::<Result<_>>()?;
    let opos: Vec<usize> = outputs
        .iter()
        .map(|id| {
            marg.concrete_index(id)
                .ok_or_else(|| Error::UnknownFactor(id.clone()))
        })
        .collect::<Result<_>>()?;
    let out_sizes: Vec<usize> = opos.iter().map(|&i| sizes[i]).collect();
    let cols = kernel.output_count();
    let rows_n = kernel.given_count();
    let mut mass = vec![0.0; rows_n];
    let mut cond = vec![0.0; rows_n * cols];
    for (idx, &p) in marg.table().iter().enumerate() {
        let tuple = unravel(idx, &sizes);
        let g: Vec<usize> = gpos.iter().map(|&i| tuple[i]).collect();
        let o: Vec<usize> = opos.iter().map(|&i| tuple[i]).collect();
        let r = ravel(&g, &kernel.given_sizes);
        mass[r] += p;
        cond[r * cols + ravel(&o, &out_sizes)] += p;
    }
    let mut dev = 0.0_f64;
    for r in 0..rows_n {
        if mass[r] <= 1e-12 {
            continue;
        }
        for c in 0..cols {
            dev = dev.max((cond[r * cols + c] / mass[r] - kernel.rows[r * cols + c]).abs());
        }
    }
    Ok(dev)
}

/// Insert a virtual node before position `v` (1-based). The virtual node
/// observes new factors generated by `kernel`, which may condition on factors
/// of nodes before `v` and on node v's own observation factors; the inserted
/// node's kernel is the corresponding marginal and node v's kernel is replaced
/// by the Bayes reversal, so the joint law is unchanged.
pub fn insert_virtual_node(admn: &Admn, v: usize, kernel: &CondTable) -> Result<Admn> {
    if v == 0 || v > admn.node_count() {
        return Err(Error::OutOfRange(format!("node index {v}")));
    }
    kernel
        .check()
        .map_err(|e| Error::BadKernel(format!("virtual node kernel: {e}")))?;
    let node_v = &admn.nodes[v - 1];
    let v_outputs: Vec<String> = node_v
        .kernel
        .as_ref()
        .map(|k| k.outputs.iter().map(|f| f.id.clone()).collect())
        .unwrap_or_default();
    let before = admn.ids_before(v);
    // context = everything the two kernels condition on, other than node v's
    // own outputs; the Bayes reversal must keep all of it
    let mut context: Vec<String> = Vec::new();
    if let Some(k) = &node_v.kernel {
        context.extend(k.given.iter().cloned());
    }
    for g in &kernel.given {
        if v_outputs.contains(g) {
            continue;
        }
        if !before.contains(g) {
            return Err(Error::BadKernel(format!(
                "virtual kernel conditions on {g}, not a factor before node {v}"
            )));
        }
        if !context.contains(g) {
            context.push(g.clone());
        }
    }
    let new_ids: Vec<String> = kernel.outputs.iter().map(|f| f.id.clone()).collect();

    // New target: extend p* by the given kernel; both new chain kernels are
    // then its conditionals.
    let target = admn.target.extend(kernel)?;
    let virt_kernel = target.conditional(&context, &new_ids)?;
    let mut bayes_given = context.clone();
    bayes_given.extend(new_ids.iter().cloned());
    let replaced_kernel = if v_outputs.is_empty() {
        None
    } else {
        Some(target.conditional(&bayes_given, &v_outputs)?)
    };

    let mut nodes = Vec::with_capacity(admn.node_count() + 1);
    for node in admn.nodes.iter().take(v - 1) {
        nodes.push(node.clone());
    }
    nodes.push(AdmnNode {
        index: v,
        new_symbolic: vec![],
        kernel: Some(virt_kernel),
        y_factors: new_ids.clone(),
        x_decls: vec![],
        x_factors: vec![],
    });
    let mut shifted = admn.nodes[v - 1].clone();
    shifted.index = v + 1;
    shifted.kernel = replaced_kernel;
    nodes.push(shifted);
    for node in admn.nodes.iter().skip(v) {
        let mut n = node.clone();
        n.index += 1;
        nodes.push(n);
    }
    Ok(Admn { nodes, target })
}

/// Gacs-Korner common part of the pair `(a, b)` of factor groups under
/// `joint`: connected components of the bipartite support graph. Returns the
/// component label per a-tuple, per b-tuple, and the component count.
/// Zero-probability tuples receive the label of an arbitrary component.
pub fn common_part(
    joint: &FactoredJoint,
    a: &[String],
    b: &[String],
) -> Result<(Vec<usize>, Vec<usize>, usize)> {
    let mut all = varset(a.iter());
    all.extend(b.iter().cloned());
    let marg = joint.marginalize(&all)?;
    let sizes = marg.sizes();
    let apos: Vec<usize> = a
        .iter()
        .map(|id| {
            marg.concrete_index(id)
                .ok_or_else(|| Error::UnknownFactor(id.clone()))
        })
        .collect::<Result<_>>()?;
    let bpos: Vec<usize> = b
        .iter()
        .map(|id| {
            marg.concrete_index(id)
                .ok_or_else(|| Error::UnknownFactor(id.clone()))
        })
        .collect::<Result<_>>()?;
    let a_sizes: Vec<usize> = apos.iter().map(|&i| sizes[i]).collect();
    let b_sizes: Vec<usize> = bpos.iter().map(|&i| sizes[i]).collect();
    let na: usize = a_sizes.iter().product();
    let nb: usize = b_sizes.iter().product();

    // union-find over a-tuples (0..na) and b-tuples (na..na+nb)
    let mut parent: Vec<usize> = (0..na + nb).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (idx, &p) in marg.table().iter().enumerate() {
        if p <= 1e-12 {
            continue;
        }
        let tuple = unravel(idx, &sizes);
        let ai = ravel(
            &apos.iter().map(|&i| tuple[i]).collect::<Vec<_>>(),
            &a_sizes,
        );
        let bi = ravel(
            &bpos.iter().map(|&i| tuple[i]).collect::<Vec<_>>(),
            &b_sizes,
        );
        let ra = find(&mut parent, ai);
        let rb = find(&mut parent, na + bi);
        parent[ra] = rb;
    }
    let mut labels: BTreeMap<usize, usize> = BTreeMap::new();
    let mut a_map = vec![0; na];
    let mut b_map = vec![0; nb];
    for ai in 0..na {
        let r = find(&mut parent, ai);
        let next = labels.len();
        a_map[ai] = *labels.entry(r).or_insert(next);
    }
    for bi in 0..nb {
        let r = find(&mut parent, na + bi);
        let next = labels.len();
        b_map[bi] = *labels.entry(r).or_insert(next);
    }
    Ok((a_map, b_map, labels.len()))
}

/// Insert a virtual common-part node before `v1`. Preconditions: node v1 has
/// an unconditioned kernel and node v2 conditions only on node v1's factors.
/// The new node observes the common part of `(Y_v1, Y_v2)` as an independent
/// copy and transmits a carrier variable that is delivered losslessly to both
/// successor nodes; `carrier` is the target-level law of the carrier given the
/// common-part observation (its realization as a map belongs to a coding
/// parameter set).
pub fn split_common_part(
    admn: &Admn,
    v1: usize,
    v2: usize,
    cp_id: &str,
    carrier: &CondTable,
) -> Result<Admn> {
    if v1 == 0 || v2 <= v1 || v2 > admn.node_count() {
        return Err(Error::OutOfRange(format!("node pair ({v1}, {v2})")));
    }
    let n1 = &admn.nodes[v1 - 1];
    let n2 = &admn.nodes[v2 - 1];
    let k1 = n1
        .kernel
        .as_ref()
        .ok_or_else(|| Error::PreconditionViolated(format!("node {v1} has no kernel")))?;
    let k2 = n2
        .kernel
        .as_ref()
        .ok_or_else(|| Error::PreconditionViolated(format!("node {v2} has no kernel")))?;
    if !k1.given.is_empty() {
        return Err(Error::PreconditionViolated(format!(
            "node {v1} kernel must be unconditioned"
        )));
    }
    let y1: Vec<String> = k1.outputs.iter().map(|f| f.id.clone()).collect();
    if !k2.given.iter().all(|g| y1.contains(g)) {
        return Err(Error::PreconditionViolated(format!(
            "node {v2} kernel may condition only on node {v1} observation factors"
        )));
    }
    let y2: Vec<String> = k2.outputs.iter().map(|f| f.id.clone()).collect();
    let (a_map, _, n_comp) = common_part(&admn.target, &y1, &y2)?;

    // distribution of the common-part label, pushed through node v1's marginal
    let m1 = admn.target.marginalize(&varset(y1.iter()))?.reorder(&y1)?;
    let mut pc = vec![0.0; n_comp];
    for (idx, &p) in m1.table().iter().enumerate() {
        pc[a_map[idx]] += p;
    }
    let cp_factor = Factor::concrete(cp_id, n_comp);
    let cp_kernel = CondTable::new(vec![], vec![cp_factor], pc)?;
    if carrier.given.len() != 1 || carrier.given[0] != cp_id || carrier.given_sizes[0] != n_comp {
        return Err(Error::ShapeMismatch(format!(
            "carrier kernel must condition exactly on {cp_id} with {n_comp} values"
        )));
    }
    let carrier_ids: Vec<String> = carrier.outputs.iter().map(|f| f.id.clone()).collect();

    let target = admn.target.extend(&cp_kernel)?.extend(carrier)?;
    let mut nodes = Vec::with_capacity(admn.node_count() + 1);
    for node in admn.nodes.iter().take(v1 - 1) {
        nodes.push(node.clone());
    }
    nodes.push(AdmnNode {
        index: v1,
        new_symbolic: vec![],
        kernel: Some(cp_kernel),
        y_factors: vec![cp_id.to_string()],
        x_decls: carrier.outputs.clone(),
        x_factors: carrier_ids.clone(),
    });
    for node in admn.nodes.iter().skip(v1 - 1) {
        let mut n = node.clone();
        n.index += 1;
        if node.index == v1 || node.index == v2 {
            n.y_factors.extend(carrier_ids.iter().cloned());
        }
        nodes.push(n);
    }
    Ok(Admn { nodes, target })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Source,
    Relay,
    Destination,
}

/// A strictly causal discrete memoryless network, given as one block-level
/// channel; `unfold` turns B block transmissions into an acyclic network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmnNode {
    pub role: Role,
    /// transmit factors of one block (empty for a pure destination)
    pub x: Vec<Factor>,
    /// joint pmf of the node's transmit tuple in the target law, row-major
    pub input_pmf: Vec<f64>,
    /// observation factors of one block
    pub y: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dmn {
    pub nodes: Vec<DmnNode>,
    /// p(all observation factors | all transmit factors), factors in node order
    pub channel: CondTable,
    /// external rate symbol of the source message
    pub rate_symbol: String,
}

pub const DEFAULT_UNFOLD_CAP: usize = 1 << 22;

fn block_id(id: &str, b: usize) -> String {
    format!("{id}.b{b}")
}

impl Dmn {
    pub fn check(&self) -> Result<()> {
        self.channel.check()?;
        let x_ids: Vec<String> = self
            .nodes
            .iter()
            .flat_map(|n| n.x.iter().map(|f| f.id.clone()))
            .collect();
        if self.channel.given != x_ids {
            return Err(Error::ShapeMismatch(
                "channel must condition on all transmit factors in node order".into(),
            ));
        }
        let y_ids: Vec<String> = self
            .nodes
            .iter()
            .flat_map(|n| n.y.iter().map(|f| f.id.clone()))
            .collect();
        let out_ids: Vec<String> = self.channel.outputs.iter().map(|f| f.id.clone()).collect();
        if out_ids != y_ids {
            return Err(Error::ShapeMismatch(
                "channel outputs must be all observation factors in node order".into(),
            ));
        }
        if self.nodes.iter().filter(|n| n.role == Role::Source).count() != 1 {
            return Err(Error::Structure("exactly one source node required".into()));
        }
        if self
            .nodes
            .iter()
            .filter(|n| n.role == Role::Destination)
            .count()
            != 1
        {
            return Err(Error::Structure(
                "exactly one destination node required".into(),
            ));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let dim: usize = n.x.iter().map(|f| f.size().unwrap_or(0)).product();
            if n.x.is_empty() {
                if !n.input_pmf.is_empty() {
                    return Err(Error::ShapeMismatch(format!(
                        "node {}: pmf without inputs",
                        i + 1
                    )));
                }
                continue;
            }
            if n.input_pmf.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "node {}: input pmf has {} entries, expected {dim}",
                    i + 1,
                    n.input_pmf.len()
                )));
            }
            let s: f64 = n.input_pmf.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::ShapeMismatch(format!(
                    "node {}: input pmf sums to {s}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Unfold `B` block transmissions of a strictly causal network into an acyclic
/// network with `(B+1) * N` nodes. Node `(k, b)` for b >= 2 observes the whole
/// history of node k: its previous observation list, its previous transmit
/// state, and the fresh block-(b-1) channel output. The source message is the
/// symbolic observation of node (source, 1); the destination's estimate is the
/// message id replayed as the x-component of node (destination, B+1).
pub fn unfold(dmn: &Dmn, blocks: usize, cap: usize) -> Result<Admn> {
    dmn.check()?;
    if blocks == 0 {
        return Err(Error::OutOfRange("blocks must be >= 1".into()));
    }
    let n = dmn.nodes.len();

    // estimated target table size: all x and y factors over all blocks
    let per_block: f64 = dmn
        .nodes
        .iter()
        .flat_map(|nd| nd.x.iter().chain(&nd.y))
        .map(|f| f.size().unwrap() as f64)
        .product();
    if per_block.powi(blocks as i32) > cap as f64 {
        return Err(Error::TooLarge(format!(
            "unfolded target would exceed the cap of {cap} entries"
        )));
    }

    // chain factorization of the block channel: p(y_k | x_all, y_{<k})
    let x_given: Vec<(String, usize)> = dmn
        .channel
        .given
        .iter()
        .cloned()
        .zip(dmn.channel.given_sizes.iter().cloned())
        .collect();
    let uniform_x = {
        let mut j = FactoredJoint::unit();
        for (id, sz) in &x_given {
            let f = Factor::concrete(id, *sz);
            let k = CondTable::new(vec![], vec![f], vec![1.0 / *sz as f64; *sz])?;
            j = j.extend(&k)?;
        }
        j.extend(&dmn.channel)?
    };
    let mut chain_kernels: Vec<CondTable> = Vec::with_capacity(n);
    {
        let mut given: Vec<String> = x_given.iter().map(|(id, _)| id.clone()).collect();
        for node in &dmn.nodes {
            let outs: Vec<String> = node.y.iter().map(|f| f.id.clone()).collect();
            chain_kernels.push(uniform_x.conditional(&given, &outs)?);
            given.extend(outs);
        }
    }

    let source = dmn
        .nodes
        .iter()
        .position(|nd| nd.role == Role::Source)
        .unwrap();
    let dest = dmn
        .nodes
        .iter()
        .position(|nd| nd.role == Role::Destination)
        .unwrap();
    let msg_id = "M".to_string();
    let msg = Factor::symbolic(&msg_id, &dmn.rate_symbol);

    let rename = |f: &Factor, b: usize| Factor {
        id: block_id(&f.id, b),
        kind: f.kind.clone(),
    };

    let mut nodes: Vec<AdmnNode> = Vec::with_capacity((blocks + 1) * n);
    let mut target = FactoredJoint::unit().with_symbolic(msg.clone())?;
    // per original node: running observation and transmit history id lists
    let mut y_hist: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut x_prev: Vec<Vec<String>> = vec![Vec::new(); n];

    for b in 1..=blocks + 1 {
        // fresh block-(b-1) channel outputs, generated by the block-b nodes
        for (k, node) in dmn.nodes.iter().enumerate() {
            let index = (b - 1) * n + k + 1;
            let mut new_symbolic = Vec::new();
            let mut kernel = None;
            let mut y_factors = y_hist[k].clone();
            if b == 1 {
                if k == source {
                    new_symbolic.push(msg.clone());
                    y_factors.push(msg_id.clone());
                }
            } else {
                // embed the previous transmit state, then the fresh output
                for id in &x_prev[k] {
                    y_factors.push(id.clone());
                }
                let base = &chain_kernels[k];
                if !base.outputs.is_empty() {
                    let renamed_outputs: Vec<Factor> =
                        base.outputs.iter().map(|f| rename(f, b - 1)).collect();
                    let renamed_given: Vec<(String, usize)> = base
                        .given
                        .iter()
                        .zip(&base.given_sizes)
                        .map(|(id, sz)| (block_id(id, b - 1), *sz))
                        .collect();
                    let kt =
                        CondTable::new(renamed_given, renamed_outputs.clone(), base.rows.clone())?;
                    y_factors.extend(renamed_outputs.iter().map(|f| f.id.clone()));
                    kernel = Some(kt);
                }
            }
            let (x_decls, x_factors) = if b <= blocks {
                let decls: Vec<Factor> = node.x.iter().map(|f| rename(f, b)).collect();
                let ids: Vec<String> = decls.iter().map(|f| f.id.clone()).collect();
                (decls, ids)
            } else if k == dest {
                // estimate: the reproduced message
                (vec![], vec![msg_id.clone()])
            } else {
                (vec![], vec![])
            };
            y_hist[k] = y_factors.clone();
            x_prev[k] = x_factors.clone();
            nodes.push(AdmnNode {
                index,
                new_symbolic,
                kernel,
                y_factors,
                x_decls,
                x_factors,
            });
        }
        if b <= blocks {
            // extend the target: block inputs then the block channel
            for node in &dmn.nodes {
                if node.x.is_empty() {
                    continue;
                }
                let outs: Vec<Factor> = node.x.iter().map(|f| rename(f, b)).collect();
                target = target.extend(&CondTable::new(vec![], outs, node.input_pmf.clone())?)?;
            }
            let renamed_given: Vec<(String, usize)> = x_given
                .iter()
                .map(|(id, sz)| (block_id(id, b), *sz))
                .collect();
            let renamed_outputs: Vec<Factor> =
                dmn.channel.outputs.iter().map(|f| rename(f, b)).collect();
            target = target.extend(&CondTable::new(
                renamed_given,
                renamed_outputs,
                dmn.channel.rows.clone(),
            )?)?;
        }
    }
    Ok(Admn { nodes, target })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-node identity channel: X1 uniform binary, Y2 = X1.
    fn identity_network() -> Admn {
        let y2 = CondTable::new(
            vec![("X1".to_string(), 2)],
            vec![Factor::concrete("Y2", 2)],
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let target = FactoredJoint::unit()
            .extend(
                &CondTable::new(vec![], vec![Factor::concrete("X1", 2)], vec![0.5, 0.5]).unwrap(),
            )
            .unwrap()
            .extend(&y2)
            .unwrap();
        Admn {
            nodes: vec![
                AdmnNode {
                    index: 1,
                    new_symbolic: vec![],
                    kernel: None,
                    y_factors: vec![],
                    x_decls: vec![Factor::concrete("X1", 2)],
                    x_factors: vec!["X1".to_string()],
                },
                AdmnNode {
                    index: 2,
                    new_symbolic: vec![],
                    kernel: Some(y2),
                    y_factors: vec!["Y2".to_string()],
                    x_decls: vec![],
                    x_factors: vec![],
                },
            ],
            target,
        }
    }

    #[test]
    fn identity_network_valid() {
        assert!(identity_network().validate().is_empty());
    }

    #[test]
    fn unnormalized_kernel_reported() {
        let mut net = identity_network();
        net.nodes[1].kernel.as_mut().unwrap().rows[0] = 0.9;
        let report = net.validate();
        assert!(report.iter().any(|r| r.contains("sums to")));
    }

    #[test]
    fn inconsistent_target_reported() {
        let mut net = identity_network();
        // shift mass between two target cells: normalization still holds but
        // the y2-conditional now contradicts the kernel
        let mut table = net.target.table().to_vec();
        table[0] -= 1e-3;
        table[1] += 1e-3;
        net.target =
            FactoredJoint::from_table(net.target.concrete_factors().to_vec(), table).unwrap();
        let report = net.validate();
        assert!(report.iter().any(|r| r.contains("deviates")), "{report:?}");
    }

    #[test]
    fn virtual_node_point_mass() {
        let net = identity_network();
        let k = CondTable::new(vec![], vec![Factor::concrete("V", 2)], vec![1.0, 0.0]).unwrap();
        let bigger = insert_virtual_node(&net, 2, &k).unwrap();
        assert_eq!(bigger.node_count(), 3);
        assert!(bigger.validate().is_empty(), "{:?}", bigger.validate());
        // marginal over the original factors is unchanged
        let marg = bigger.target.marginalize(&varset(["X1", "Y2"])).unwrap();
        assert!(net.target.max_abs_diff(&marg).unwrap() < 1e-12);
    }

    #[test]
    fn virtual_node_bayes_consistency() {
        // noisy observation of Y2: V = Y2 with prob 0.8
        let net = identity_network();
        let k = CondTable::new(
            vec![("Y2".to_string(), 2)],
            vec![Factor::concrete("V", 2)],
            vec![0.8, 0.2, 0.2, 0.8],
        )
        .unwrap();
        let bigger = insert_virtual_node(&net, 2, &k).unwrap();
        assert!(bigger.validate().is_empty(), "{:?}", bigger.validate());
        // chain-rule check: composing the two new kernels reproduces the
        // original conditional p(y2 | x1) and the inserted observation's law
        let j = bigger.target.clone();
        let back = j
            .conditional(&["X1".to_string()], &["Y2".to_string()])
            .unwrap();
        for (a, b) in back.rows.iter().zip(&[1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let virt = &bigger.nodes[1];
        assert!(virt.x_factors.is_empty());
        assert_eq!(virt.y_factors, vec!["V".to_string()]);
    }

    #[test]
    fn common_part_diagonal() {
        let j = FactoredJoint::from_table(
            vec![Factor::concrete("A", 3), Factor::concrete("B", 3)],
            vec![
                1.0 / 3.0,
                0.0,
                0.0, //
                0.0,
                1.0 / 3.0,
                0.0, //
                0.0,
                0.0,
                1.0 / 3.0,
            ],
        )
        .unwrap();
        let (a, b, n) = common_part(&j, &["A".to_string()], &["B".to_string()]).unwrap();
        assert_eq!(n, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn common_part_independent() {
        let j = FactoredJoint::from_table(
            vec![Factor::concrete("A", 2), Factor::concrete("B", 2)],
            vec![0.25; 4],
        )
        .unwrap();
        let (_, _, n) = common_part(&j, &["A".to_string()], &["B".to_string()]).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn common_part_block_diagonal() {
        // 4x4 with two 2x2 blocks: binary common part
        let mut t = vec![0.0; 16];
        for (a, b) in [
            (0, 0),
            (0, 1),
            (1, 0),
            (1, 1),
            (2, 2),
            (2, 3),
            (3, 2),
            (3, 3),
        ] {
            t[a * 4 + b] = 0.125;
        }
        let j =
            FactoredJoint::from_table(vec![Factor::concrete("A", 4), Factor::concrete("B", 4)], t)
                .unwrap();
        let (a, b, n) = common_part(&j, &["A".to_string()], &["B".to_string()]).unwrap();
        assert_eq!(n, 2);
        assert_eq!(a, vec![0, 0, 1, 1]);
        assert_eq!(b, vec![0, 0, 1, 1]);
    }

    #[test]
    fn common_part_idempotent() {
        // the common part of (C, C) where C is a computed common-part label
        let mut t = vec![0.0; 16];
        for (a, b) in [(0, 0), (0, 1), (1, 1), (2, 2), (3, 2), (3, 3)] {
            t[a * 4 + b] = 1.0 / 6.0;
        }
        let j =
            FactoredJoint::from_table(vec![Factor::concrete("A", 4), Factor::concrete("B", 4)], t)
                .unwrap();
        let (a_map, _, n) = common_part(&j, &["A".to_string()], &["B".to_string()]).unwrap();
        assert_eq!(n, 2);
        // build the diagonal joint of (C, C)
        let m = j.marginalize(&varset(["A"])).unwrap();
        let mut pc = vec![0.0; n];
        for (i, &p) in m.table().iter().enumerate() {
            pc[a_map[i]] += p;
        }
        let mut diag = vec![0.0; n * n];
        for (c, &p) in pc.iter().enumerate() {
            diag[c * n + c] = p;
        }
        let jc = FactoredJoint::from_table(
            vec![Factor::concrete("C1", n), Factor::concrete("C2", n)],
            diag,
        )
        .unwrap();
        let (c1, c2, nc) = common_part(&jc, &["C1".to_string()], &["C2".to_string()]).unwrap();
        assert_eq!(nc, n);
        assert_eq!(c1, c2);
    }

    fn two_node_dmn() -> Dmn {
        // one-shot BSC(0.1) from the source to the destination
        let channel = CondTable::new(
            vec![("X1".to_string(), 2)],
            vec![Factor::concrete("Y2", 2)],
            vec![0.9, 0.1, 0.1, 0.9],
        )
        .unwrap();
        Dmn {
            nodes: vec![
                DmnNode {
                    role: Role::Source,
                    x: vec![Factor::concrete("X1", 2)],
                    input_pmf: vec![0.5, 0.5],
                    y: vec![],
                },
                DmnNode {
                    role: Role::Destination,
                    x: vec![],
                    input_pmf: vec![],
                    y: vec![Factor::concrete("Y2", 2)],
                },
            ],
            channel,
            rate_symbol: "R".to_string(),
        }
    }

    #[test]
    fn smallest_unfold() {
        let admn = unfold(&two_node_dmn(), 1, DEFAULT_UNFOLD_CAP).unwrap();
        assert_eq!(admn.node_count(), 4);
        assert!(admn.validate().is_empty(), "{:?}", admn.validate());
        // the source observes the message in block 1; the destination's
        // final x-component is the message estimate
        assert_eq!(admn.nodes[0].y_factors, vec!["M".to_string()]);
        assert_eq!(admn.nodes[3].x_factors, vec!["M".to_string()]);
    }

    #[test]
    fn unfold_blockwise_stationary() {
        let admn = unfold(&two_node_dmn(), 3, DEFAULT_UNFOLD_CAP).unwrap();
        assert_eq!(admn.node_count(), 8);
        assert!(admn.validate().is_empty(), "{:?}", admn.validate());
        // destination kernels at blocks 2..4 share identical rows
        let rows: Vec<&Vec<f64>> = admn
            .nodes
            .iter()
            .filter_map(|n| n.kernel.as_ref().map(|k| &k.rows))
            .collect();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn unfold_cap() {
        assert!(matches!(
            unfold(&two_node_dmn(), 30, 1 << 10),
            Err(Error::TooLarge(_))
        ));
    }
}
