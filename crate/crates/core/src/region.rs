//! Packing/covering inequality systems and their projection.
//!
//! For every node, decoding yields strict upper bounds (packing) and covering
//! yields strict lower bounds on sums of internal codebook rates; right-hand
//! sides are conditional mutual informations evaluated on the induced joint,
//! affine in the external rate symbols. Fourier-Motzkin elimination projects
//! the internal rates out, leaving a region over external rates.

use crate::coding::CodingParams;
use crate::dist::{EntropyEvaluator, FactoredJoint, VarSet};
use crate::error::{Error, Result};
use crate::expr::{rational_to_f64, AffineRateExpr, Rational};
use crate::network::Admn;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const DEFAULT_SUBSET_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    Packing,
    Covering,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IneqOrigin {
    /// which system the inequality belongs to (e.g. "theorem1", "dual-ii")
    pub system: String,
    /// 1-based node index
    pub node: usize,
    pub kind: BoundKind,
    /// the enumerated subset (index sets for packing/covering as generated)
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    StrictLess,
    StrictGreater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInequality {
    /// rate variable -> exact rational coefficient
    pub lhs: BTreeMap<String, Rational>,
    pub sense: Sense,
    pub rhs: AffineRateExpr,
    pub origin: Option<IneqOrigin>,
}

impl LinearInequality {
    /// `lhs . x < rhs` form regardless of stored sense.
    pub fn as_less(&self) -> (BTreeMap<String, Rational>, AffineRateExpr) {
        match self.sense {
            Sense::StrictLess => (self.lhs.clone(), self.rhs.clone()),
            Sense::StrictGreater => {
                let lhs = self.lhs.iter().map(|(k, v)| (k.clone(), -*v)).collect();
                (lhs, self.rhs.scale(Rational::from_integer(-1)))
            }
        }
    }

    /// Closure membership test with tolerance; missing variables read as zero.
    pub fn satisfied_at(&self, point: &BTreeMap<String, f64>, tol: f64) -> bool {
        let (lhs, rhs) = self.as_less();
        let lv: f64 = lhs
            .iter()
            .map(|(k, c)| rational_to_f64(*c) * point.get(k).copied().unwrap_or(0.0))
            .sum();
        lv <= rhs.eval(point) + tol
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (var, c) in &self.lhs {
            let cf = rational_to_f64(*c);
            if cf < 0.0 {
                write!(f, "{}", if first { "-" } else { " - " })?;
            } else if !first {
                write!(f, " + ")?;
            }
            first = false;
            let a = c.abs();
            if a == Rational::from_integer(1) {
                write!(f, "{var}")?;
            } else if *a.denom() == 1 {
                write!(f, "{}*{var}", a.numer())?;
            } else {
                write!(f, "({}/{})*{var}", a.numer(), a.denom())?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        let op = match self.sense {
            Sense::StrictLess => "<",
            Sense::StrictGreater => ">",
        };
        write!(f, " {op} {}", self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InequalitySystem {
    pub inequalities: Vec<LinearInequality>,
    pub universe: BTreeSet<String>,
}

impl InequalitySystem {
    pub fn satisfied_at(&self, point: &BTreeMap<String, f64>, tol: f64) -> bool {
        self.inequalities.iter().all(|i| i.satisfied_at(point, tol))
    }
}

/// An inequality system over external rate symbols only; right-hand sides are
/// plain constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RateRegion {
    pub system: InequalitySystem,
    /// true when elimination exposed a contradiction (empty input polytope)
    pub infeasible: bool,
}

impl RateRegion {
    pub fn contains(&self, point: &BTreeMap<String, f64>, tol: f64) -> bool {
        !self.infeasible && self.system.satisfied_at(point, tol)
    }
}

impl fmt::Display for RateRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.infeasible {
            return writeln!(f, "infeasible");
        }
        for ineq in &self.system.inequalities {
            // prefer the lower-bound reading when every coefficient is negative
            let all_neg =
                !ineq.lhs.is_empty() && ineq.lhs.values().all(|c| *c < Rational::from_integer(0));
            if all_neg {
                let flipped = LinearInequality {
                    lhs: ineq.lhs.iter().map(|(k, v)| (k.clone(), -*v)).collect(),
                    sense: Sense::StrictGreater,
                    rhs: ineq.rhs.scale(Rational::from_integer(-1)),
                    origin: None,
                };
                writeln!(f, "{flipped}")?;
            } else {
                writeln!(f, "{ineq}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Theorem1,
    Corollary1,
}

/// Index-level view of node k (1-based): the uniquely decodable, nonuniquely
/// decodable and fresh-coverable index sets.
pub struct NodeIndexSets {
    pub d_bar: BTreeSet<usize>,
    pub b_bar: BTreeSet<usize>,
    pub w_bar: BTreeSet<usize>,
}

pub fn node_index_sets(omega: &CodingParams, k: usize) -> Result<NodeIndexSets> {
    let nc = omega
        .nodes
        .get(k - 1)
        .ok_or_else(|| Error::OutOfRange(format!("node {k}")))?;
    let d_bar = omega.gamma_of(&nc.decode_unique);
    let b_bar: BTreeSet<usize> = omega
        .gamma_of(&nc.decode_nonunique)
        .difference(&d_bar)
        .copied()
        .collect();
    let w_bar: BTreeSet<usize> = omega
        .gamma_of(&nc.compress)
        .difference(&d_bar)
        .copied()
        .collect();
    Ok(NodeIndexSets {
        d_bar,
        b_bar,
        w_bar,
    })
}

/// Codebooks among D_k and B_k whose index support meets the index set `s`.
pub fn bar_s(omega: &CodingParams, k: usize, s: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    let sets = node_index_sets(omega, k)?;
    let admissible: BTreeSet<usize> = sets.d_bar.union(&sets.b_bar).copied().collect();
    if let Some(&i) = s.iter().find(|i| !admissible.contains(i)) {
        return Err(Error::OutOfRange(format!(
            "index {i} is not decodable at node {k}"
        )));
    }
    let nc = &omega.nodes[k - 1];
    Ok(nc
        .decode_unique
        .union(&nc.decode_nonunique)
        .copied()
        .filter(|&j| !omega.codebooks[j].gamma.is_disjoint(s))
        .collect())
}

/// Codebooks in W_k whose index support lies inside `t` union gamma(D_k).
pub fn bar_t(omega: &CodingParams, k: usize, t: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    let sets = node_index_sets(omega, k)?;
    if t.is_empty() {
        return Err(Error::OutOfRange("empty covering index set".into()));
    }
    if let Some(&i) = t.iter().find(|i| !sets.w_bar.contains(i)) {
        return Err(Error::OutOfRange(format!(
            "index {i} is not freshly covered at node {k}"
        )));
    }
    let nc = &omega.nodes[k - 1];
    let allowed: BTreeSet<usize> = t.union(&sets.d_bar).copied().collect();
    Ok(nc
        .compress
        .iter()
        .copied()
        .filter(|&j| omega.codebooks[j].gamma.is_subset(&allowed))
        .collect())
}

fn subsets_of(list: &[usize], cap: usize, node: usize) -> Result<Vec<BTreeSet<usize>>> {
    let n = list.len();
    if n >= usize::BITS as usize || (1usize << n) > cap {
        return Err(Error::Blowup(format!(
            "2^{n} subsets at node {node} exceed the cap of {cap}"
        )));
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        out.push(
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| list[i])
                .collect(),
        );
    }
    Ok(out)
}

fn rate_sum(omega: &CodingParams, set: &BTreeSet<usize>) -> BTreeMap<String, Rational> {
    let mut lhs = BTreeMap::new();
    for &j in set {
        *lhs.entry(omega.rate_vars[j].clone())
            .or_insert_with(|| Rational::from_integer(0)) += Rational::from_integer(1);
    }
    lhs
}

/// Decoding right-hand side: sum over `js` (ascending) of
/// I(U_j ; U_{js[<j] union others}, Y_k | U_{A_j}).
fn chain_rhs(
    omega: &CodingParams,
    ev: &EntropyEvaluator,
    y_k: &VarSet,
    js: &BTreeSet<usize>,
    others: &BTreeSet<usize>,
) -> Result<AffineRateExpr> {
    let mut rhs = AffineRateExpr::zero();
    for &j in js {
        let earlier: BTreeSet<usize> = js.iter().copied().filter(|&i| i < j).collect();
        let mut b_set: BTreeSet<usize> = earlier.union(others).copied().collect();
        b_set.remove(&j);
        let a = omega.u_varset(&BTreeSet::from([j]));
        let mut b = omega.u_varset(&b_set);
        b.extend(y_k.iter().cloned());
        let c = omega.u_varset(&omega.codebooks[j].superpose);
        rhs = rhs.add(&ev.cond_mutual_info(&a, &b, &c)?);
    }
    Ok(rhs)
}

pub struct GeneratedSystem {
    pub system: InequalitySystem,
    pub joint: FactoredJoint,
}

/// Generate the full per-node packing/covering family on the induced joint.
pub fn generate_system(
    omega: &CodingParams,
    admn: &Admn,
    mode: Mode,
    cap: usize,
) -> Result<GeneratedSystem> {
    let joint = crate::coding::induced_joint(omega, admn)?;
    let system = generate_system_on(omega, admn, &joint, mode, cap, "theorem1")?;
    Ok(GeneratedSystem { system, joint })
}

pub fn generate_system_on(
    omega: &CodingParams,
    admn: &Admn,
    joint: &FactoredJoint,
    mode: Mode,
    cap: usize,
    tag: &str,
) -> Result<InequalitySystem> {
    if mode == Mode::Corollary1 && !omega.is_omega_prime() {
        return Err(Error::PreconditionViolated(
            "corollary mode requires nu = mu and gamma_j = {j} union A_j".into(),
        ));
    }
    let ev = EntropyEvaluator::new(joint);
    let mut inequalities = Vec::new();
    for k in 1..=admn.node_count() {
        let nc = &omega.nodes[k - 1];
        let y_k = admn.y_varset(k);
        match mode {
            Mode::Theorem1 => {
                let sets = node_index_sets(omega, k)?;
                let db: Vec<usize> = sets.d_bar.union(&sets.b_bar).copied().collect();
                for s in subsets_of(&db, cap, k)? {
                    if s.is_disjoint(&sets.d_bar) {
                        continue;
                    }
                    let sb = bar_s(omega, k, &s)?;
                    let all: BTreeSet<usize> = nc
                        .decode_unique
                        .union(&nc.decode_nonunique)
                        .copied()
                        .collect();
                    let comp: BTreeSet<usize> = all.difference(&sb).copied().collect();
                    let rhs = chain_rhs(omega, &ev, &y_k, &sb, &comp)?;
                    inequalities.push(LinearInequality {
                        lhs: rate_sum(omega, &s),
                        sense: Sense::StrictLess,
                        rhs,
                        origin: Some(IneqOrigin {
                            system: tag.to_string(),
                            node: k,
                            kind: BoundKind::Packing,
                            subset: s.iter().copied().collect(),
                        }),
                    });
                }
                let w: Vec<usize> = sets.w_bar.iter().copied().collect();
                for t in subsets_of(&w, cap, k)? {
                    if t.is_empty() {
                        continue;
                    }
                    let tb = bar_t(omega, k, &t)?;
                    let rhs = chain_rhs(omega, &ev, &y_k, &tb, &nc.decode_unique)?;
                    inequalities.push(LinearInequality {
                        lhs: rate_sum(omega, &t),
                        sense: Sense::StrictGreater,
                        rhs,
                        origin: Some(IneqOrigin {
                            system: tag.to_string(),
                            node: k,
                            kind: BoundKind::Covering,
                            subset: t.iter().copied().collect(),
                        }),
                    });
                }
            }
            Mode::Corollary1 => {
                let all: Vec<usize> = nc
                    .decode_unique
                    .union(&nc.decode_nonunique)
                    .copied()
                    .collect();
                let all_set: BTreeSet<usize> = all.iter().copied().collect();
                for s in subsets_of(&all, cap, k)? {
                    if s.is_disjoint(&nc.decode_unique) {
                        continue;
                    }
                    let comp: BTreeSet<usize> = all_set.difference(&s).copied().collect();
                    // closure: nothing outside s may be superposed on s
                    if comp
                        .iter()
                        .any(|&j| !omega.codebooks[j].superpose.is_disjoint(&s))
                    {
                        continue;
                    }
                    let rhs = chain_rhs(omega, &ev, &y_k, &s, &comp)?;
                    inequalities.push(LinearInequality {
                        lhs: rate_sum(omega, &s),
                        sense: Sense::StrictLess,
                        rhs,
                        origin: Some(IneqOrigin {
                            system: tag.to_string(),
                            node: k,
                            kind: BoundKind::Packing,
                            subset: s.iter().copied().collect(),
                        }),
                    });
                }
                let w: Vec<usize> = nc.compress.iter().copied().collect();
                for t in subsets_of(&w, cap, k)? {
                    if t.is_empty() {
                        continue;
                    }
                    // closure: superposition inside W_k stays inside t
                    if t.iter().any(|&j| {
                        omega.codebooks[j]
                            .superpose
                            .iter()
                            .any(|a| nc.compress.contains(a) && !t.contains(a))
                    }) {
                        continue;
                    }
                    let rhs = chain_rhs(omega, &ev, &y_k, &t, &nc.decode_unique)?;
                    inequalities.push(LinearInequality {
                        lhs: rate_sum(omega, &t),
                        sense: Sense::StrictGreater,
                        rhs,
                        origin: Some(IneqOrigin {
                            system: tag.to_string(),
                            node: k,
                            kind: BoundKind::Covering,
                            subset: t.iter().copied().collect(),
                        }),
                    });
                }
            }
        }
    }
    inequalities.sort_by(|a, b| a.origin.cmp(&b.origin));
    let mut universe: BTreeSet<String> = omega.rate_vars.iter().cloned().collect();
    for ineq in &inequalities {
        universe.extend(ineq.rhs.coeffs.keys().cloned());
    }
    Ok(InequalitySystem {
        inequalities,
        universe,
    })
}

/// The relaxed decoding/covering pair: drop decodable codebooks whose
/// superposition base is recoverable anyway (`s_prime` within bar_s(s)) and
/// enlarge the covering side (`t_prime` containing bar_t(t)).
pub fn lemma1_relaxed_bounds(
    omega: &CodingParams,
    admn: &Admn,
    joint: &FactoredJoint,
    k: usize,
    s: &BTreeSet<usize>,
    s_prime: &BTreeSet<usize>,
    t: &BTreeSet<usize>,
    t_prime: &BTreeSet<usize>,
) -> Result<(LinearInequality, LinearInequality)> {
    let ev = EntropyEvaluator::new(joint);
    let nc = &omega.nodes[k - 1];
    let y_k = admn.y_varset(k);
    let sb = bar_s(omega, k, s)?;
    if !s_prime.is_subset(&sb) {
        return Err(Error::PreconditionViolated(
            "relaxed decoding set must lie inside bar_s".into(),
        ));
    }
    let all: BTreeSet<usize> = nc
        .decode_unique
        .union(&nc.decode_nonunique)
        .copied()
        .collect();
    let outside: BTreeSet<usize> = all.difference(&sb).copied().collect();
    let dropped: BTreeSet<usize> = sb.difference(s_prime).copied().collect();
    for &j in &dropped {
        let allowed: BTreeSet<usize> = dropped
            .iter()
            .copied()
            .filter(|&i| i < j)
            .chain(outside.iter().copied())
            .collect();
        if let Some(&a) = omega.codebooks[j].superpose.difference(&allowed).next() {
            return Err(Error::PreconditionViolated(format!(
                "cannot drop codebook {j}: superposition base {a} is not recoverable"
            )));
        }
    }
    let comp: BTreeSet<usize> = all.difference(s_prime).copied().collect();
    let packing = LinearInequality {
        lhs: rate_sum(omega, s),
        sense: Sense::StrictLess,
        rhs: chain_rhs(omega, &ev, &y_k, s_prime, &comp)?,
        origin: Some(IneqOrigin {
            system: "lemma1".to_string(),
            node: k,
            kind: BoundKind::Packing,
            subset: s.iter().copied().collect(),
        }),
    };
    let tb = bar_t(omega, k, t)?;
    if !tb.is_subset(t_prime) || !t_prime.is_subset(&nc.compress) {
        return Err(Error::PreconditionViolated(
            "enlarged covering set must contain bar_t and stay inside W_k".into(),
        ));
    }
    let covering = LinearInequality {
        lhs: rate_sum(omega, t),
        sense: Sense::StrictGreater,
        rhs: chain_rhs(omega, &ev, &y_k, t_prime, &nc.decode_unique)?,
        origin: Some(IneqOrigin {
            system: "lemma1".to_string(),
            node: k,
            kind: BoundKind::Covering,
            subset: t.iter().copied().collect(),
        }),
    };
    Ok((packing, covering))
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin elimination
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct NormIneq {
    lhs: BTreeMap<String, Rational>,
    rhs: AffineRateExpr,
}

impl NormIneq {
    fn from(ineq: &LinearInequality) -> Self {
        let (lhs, rhs) = ineq.as_less();
        NormIneq { lhs, rhs }
    }

    /// Scale so the leading nonzero coefficient has absolute value one.
    fn normalized(mut self) -> Self {
        self.lhs.retain(|_, c| *c != Rational::from_integer(0));
        let lead = self
            .lhs
            .values()
            .next()
            .copied()
            .or_else(|| self.rhs.coeffs.values().next().copied());
        if let Some(lead) = lead {
            let s = lead.abs().recip();
            for c in self.lhs.values_mut() {
                *c *= s;
            }
            self.rhs = self.rhs.scale(s);
        }
        self
    }

    fn key(&self) -> String {
        let mut k = String::new();
        for (v, c) in &self.lhs {
            k.push_str(&format!("{v}:{c};"));
        }
        k.push('|');
        for (v, c) in &self.rhs.coeffs {
            k.push_str(&format!("{v}:{c};"));
        }
        k.push_str(&format!("|{:.9e}", self.rhs.constant));
        k
    }

    /// True constraint `0 < rhs` with constant rhs that cannot be violated.
    fn is_vacuous(&self) -> bool {
        self.lhs.is_empty() && self.rhs.coeffs.is_empty() && self.rhs.constant > 1e-12
    }

    fn is_contradiction(&self) -> bool {
        self.lhs.is_empty() && self.rhs.coeffs.is_empty() && self.rhs.constant <= 1e-12
    }
}

fn dedup(ineqs: Vec<NormIneq>) -> Vec<NormIneq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for i in ineqs {
        let i = i.normalized();
        if i.is_vacuous() {
            continue;
        }
        if seen.insert(i.key()) {
            out.push(i);
        }
    }
    out
}

/// Exact projection of the system onto the variables not listed in
/// `eliminate`. Rate symbols in right-hand sides ride along linearly and end
/// up on the left-hand side of the reported region.
pub fn fourier_motzkin(system: &InequalitySystem, eliminate: &[String]) -> Result<RateRegion> {
    for v in eliminate {
        if !system.universe.contains(v) {
            return Err(Error::OutOfRange(format!(
                "variable {v} not in the universe"
            )));
        }
    }
    let mut current: Vec<NormIneq> =
        dedup(system.inequalities.iter().map(NormIneq::from).collect());
    for v in eliminate {
        let mut keep = Vec::new();
        let mut upper = Vec::new(); // coefficient of v positive: v < ...
        let mut lower = Vec::new(); // coefficient of v negative: v > ...
        for ineq in current {
            match ineq.lhs.get(v).copied() {
                None => keep.push(ineq),
                Some(c) if c > Rational::from_integer(0) => upper.push((c, ineq)),
                Some(c) => lower.push((-c, ineq)),
            }
        }
        for (cu, u) in &upper {
            for (cl, l) in &lower {
                // cl * u + cu * l cancels v
                let mut lhs: BTreeMap<String, Rational> = BTreeMap::new();
                for (var, c) in &u.lhs {
                    *lhs.entry(var.clone())
                        .or_insert_with(|| Rational::from_integer(0)) += *c * *cl;
                }
                for (var, c) in &l.lhs {
                    *lhs.entry(var.clone())
                        .or_insert_with(|| Rational::from_integer(0)) += *c * *cu;
                }
                lhs.retain(|_, c| *c != Rational::from_integer(0));
                debug_assert!(!lhs.contains_key(v));
                let rhs = u.rhs.scale(*cl).add(&l.rhs.scale(*cu));
                keep.push(NormIneq { lhs, rhs });
            }
        }
        current = dedup(keep);
    }
    // move surviving rhs symbols to the left and report constants on the right
    let mut infeasible = false;
    let mut finals: Vec<NormIneq> = Vec::new();
    for ineq in current {
        let mut lhs = ineq.lhs.clone();
        for (sym, c) in &ineq.rhs.coeffs {
            *lhs.entry(sym.clone())
                .or_insert_with(|| Rational::from_integer(0)) -= *c;
        }
        lhs.retain(|_, c| *c != Rational::from_integer(0));
        let moved = NormIneq {
            lhs,
            rhs: AffineRateExpr::constant(ineq.rhs.constant),
        };
        if moved.is_contradiction() {
            infeasible = true;
            continue;
        }
        finals.push(moved);
    }
    let mut finals = dedup(finals);
    finals.sort_by_key(|i| i.key());
    let mut universe = BTreeSet::new();
    let inequalities = finals
        .into_iter()
        .map(|i| {
            universe.extend(i.lhs.keys().cloned());
            LinearInequality {
                lhs: i.lhs,
                sense: Sense::StrictLess,
                rhs: i.rhs,
                origin: None,
            }
        })
        .collect();
    Ok(RateRegion {
        system: InequalitySystem {
            inequalities,
            universe,
        },
        infeasible,
    })
}

/// Remove inequalities implied by a single other inequality: `b` goes if some
/// `a` has proportional left-hand side (positive factor) and a right-hand side
/// at most `b`'s under the supplied numeric values for bounded symbols.
pub fn prune_numeric(region: &RateRegion, bounds: &BTreeMap<String, f64>) -> RateRegion {
    let norm: Vec<NormIneq> = region
        .system
        .inequalities
        .iter()
        .map(|i| NormIneq::from(i).normalized())
        .collect();
    let value = |i: &NormIneq| -> Option<f64> {
        let mut v = i.rhs.constant;
        for (sym, c) in &i.rhs.coeffs {
            v += rational_to_f64(*c) * bounds.get(sym)?;
        }
        Some(v)
    };
    let mut keep = vec![true; norm.len()];
    for b in 0..norm.len() {
        if !keep[b] {
            continue;
        }
        for a in 0..norm.len() {
            if a == b || !keep[a] {
                continue;
            }
            // after normalization, proportional means identical lhs
            if norm[a].lhs != norm[b].lhs {
                continue;
            }
            if let (Some(va), Some(vb)) = (value(&norm[a]), value(&norm[b])) {
                if va <= vb + 1e-12 {
                    keep[b] = false;
                    break;
                }
            }
        }
    }
    let inequalities: Vec<LinearInequality> = region
        .system
        .inequalities
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(i, _)| i.clone())
        .collect();
    let mut universe = BTreeSet::new();
    for i in &inequalities {
        universe.extend(i.lhs.keys().cloned());
        universe.extend(i.rhs.coeffs.keys().cloned());
    }
    RateRegion {
        system: InequalitySystem {
            inequalities,
            universe,
        },
        infeasible: region.infeasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str) -> BTreeMap<String, Rational> {
        BTreeMap::from([(name.to_string(), Rational::from_integer(1))])
    }

    fn sys(ineqs: Vec<LinearInequality>) -> InequalitySystem {
        let mut universe = BTreeSet::new();
        for i in &ineqs {
            universe.extend(i.lhs.keys().cloned());
            universe.extend(i.rhs.coeffs.keys().cloned());
        }
        InequalitySystem {
            inequalities: ineqs,
            universe,
        }
    }

    #[test]
    fn single_pair_combination() {
        // r > R, r < 0.7 eliminates to R < 0.7
        let s = sys(vec![
            LinearInequality {
                lhs: var("r"),
                sense: Sense::StrictGreater,
                rhs: AffineRateExpr::symbol("R"),
                origin: None,
            },
            LinearInequality {
                lhs: var("r"),
                sense: Sense::StrictLess,
                rhs: AffineRateExpr::constant(0.7),
                origin: None,
            },
        ]);
        let region = fourier_motzkin(&s, &["r".to_string()]).unwrap();
        assert!(!region.infeasible);
        assert_eq!(region.system.inequalities.len(), 1);
        let i = &region.system.inequalities[0];
        assert_eq!(i.lhs, var("R"));
        assert!((i.rhs.constant - 0.7).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let s = sys(vec![
            LinearInequality {
                lhs: var("r"),
                sense: Sense::StrictGreater,
                rhs: AffineRateExpr::constant(1.0),
                origin: None,
            },
            LinearInequality {
                lhs: var("r"),
                sense: Sense::StrictLess,
                rhs: AffineRateExpr::constant(0.5),
                origin: None,
            },
        ]);
        let region = fourier_motzkin(&s, &["r".to_string()]).unwrap();
        assert!(region.infeasible);
    }

    #[test]
    fn prune_dominated() {
        let mk = |c: f64| LinearInequality {
            lhs: var("R"),
            sense: Sense::StrictLess,
            rhs: AffineRateExpr::constant(c),
            origin: None,
        };
        let region = RateRegion {
            system: sys(vec![mk(1.0), mk(2.0)]),
            infeasible: false,
        };
        let pruned = prune_numeric(&region, &BTreeMap::new());
        assert_eq!(pruned.system.inequalities.len(), 1);
        assert!((pruned.system.inequalities[0].rhs.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prune_keeps_incomparable() {
        let r1 = LinearInequality {
            lhs: var("R1"),
            sense: Sense::StrictLess,
            rhs: AffineRateExpr::constant(1.0),
            origin: None,
        };
        let r2 = LinearInequality {
            lhs: var("R2"),
            sense: Sense::StrictLess,
            rhs: AffineRateExpr::constant(1.0),
            origin: None,
        };
        let region = RateRegion {
            system: sys(vec![r1, r2]),
            infeasible: false,
        };
        assert_eq!(
            prune_numeric(&region, &BTreeMap::new())
                .system
                .inequalities
                .len(),
            2
        );
    }
}
