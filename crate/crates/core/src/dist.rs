//! Factored joint distributions.
//!
//! A [`FactoredJoint`] is a dense pmf over an ordered list of *concrete*
//! factors together with a list of *symbolic* factors. Symbolic factors model
//! messages and noiseless bit-pipes: they are mutually independent, independent
//! of everything concrete, and contribute their rate symbol (instead of a
//! number) to any entropy that contains them. They never appear in pmf tables.

use crate::error::{Error, Result};
use crate::expr::{AffineRateExpr, Rational};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Probabilities below this threshold are treated as exact zeros in entropies.
pub const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub label: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(label: &str, size: usize) -> Self {
        Alphabet {
            label: label.to_string(),
            size,
        }
    }

    pub fn binary(label: &str) -> Self {
        Alphabet::new(label, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Concrete(Alphabet),
    Symbolic { rate_symbol: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub id: String,
    pub kind: FactorKind,
}

impl Factor {
    pub fn concrete(id: &str, size: usize) -> Self {
        Factor {
            id: id.to_string(),
            kind: FactorKind::Concrete(Alphabet::new(id, size)),
        }
    }

    pub fn symbolic(id: &str, rate_symbol: &str) -> Self {
        Factor {
            id: id.to_string(),
            kind: FactorKind::Symbolic {
                rate_symbol: rate_symbol.to_string(),
            },
        }
    }

    pub fn size(&self) -> Option<usize> {
        match &self.kind {
            FactorKind::Concrete(a) => Some(a.size),
            FactorKind::Symbolic { .. } => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.kind, FactorKind::Symbolic { .. })
    }
}

/// A set of factor ids; the subset arguments of H(.) and I(.;.|.).
pub type VarSet = BTreeSet<String>;

pub fn varset<I: IntoIterator<Item = S>, S: AsRef<str>>(ids: I) -> VarSet {
    ids.into_iter().map(|s| s.as_ref().to_string()).collect()
}

/// Conditional pmf table: `p(outputs | given)`, rows indexed row-major by the
/// given tuple, each row row-major over the output tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondTable {
    pub given: Vec<String>,
    pub given_sizes: Vec<usize>,
    pub outputs: Vec<Factor>,
    pub rows: Vec<f64>,
}

impl CondTable {
    pub fn new(given: Vec<(String, usize)>, outputs: Vec<Factor>, rows: Vec<f64>) -> Result<Self> {
        let (given, given_sizes): (Vec<_>, Vec<_>) = given.into_iter().unzip();
        let t = CondTable {
            given,
            given_sizes,
            outputs,
            rows,
        };
        t.check()?;
        Ok(t)
    }

    pub fn given_count(&self) -> usize {
        self.given_sizes.iter().product()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.iter().map(|f| f.size().unwrap_or(1)).product()
    }

    pub fn check(&self) -> Result<()> {
        if self.given.len() != self.given_sizes.len() {
            return Err(Error::ShapeMismatch(
                "given ids and sizes differ in length".into(),
            ));
        }
        for f in &self.outputs {
            if f.is_symbolic() {
                return Err(Error::BadKernel(format!(
                    "symbolic factor {} cannot have a kernel",
                    f.id
                )));
            }
        }
        let rows = self.given_count();
        let cols = self.output_count();
        if self.rows.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "kernel table has {} entries, expected {}",
                self.rows.len(),
                rows * cols
            )));
        }
        for r in 0..rows {
            let row = &self.rows[r * cols..(r + 1) * cols];
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::BadKernel(format!("negative probability in row {r}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::BadKernel(format!("row {r} sums to {s}, not 1")));
            }
        }
        Ok(())
    }

    /// Deterministic single-output kernel: `values[i]` is the output symbol for
    /// the i-th given tuple (row-major).
    pub fn deterministic(
        given: Vec<(String, usize)>,
        output: Factor,
        values: &[usize],
    ) -> Result<Self> {
        let out_size = output.size().ok_or_else(|| {
            Error::BadKernel(format!(
                "symbolic factor {} cannot be a map output",
                output.id
            ))
        })?;
        let rows_n: usize = given.iter().map(|(_, s)| *s).product();
        if values.len() != rows_n {
            return Err(Error::ShapeMismatch(format!(
                "map table has {} entries, expected {rows_n}",
                values.len()
            )));
        }
        let mut rows = vec![0.0; rows_n * out_size];
        for (r, &v) in values.iter().enumerate() {
            if v >= out_size {
                return Err(Error::OutOfRange(format!(
                    "map value {v} outside alphabet of {}",
                    output.id
                )));
            }
            rows[r * out_size + v] = 1.0;
        }
        CondTable::new(given, vec![output], rows)
    }

    /// Build from a closure over the given tuple.
    pub fn from_fn<F>(given: Vec<(String, usize)>, outputs: Vec<Factor>, f: F) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> f64,
    {
        let given_sizes: Vec<usize> = given.iter().map(|(_, s)| *s).collect();
        let out_sizes: Vec<usize> = outputs.iter().map(|o| o.size().unwrap_or(1)).collect();
        let rows_n: usize = given_sizes.iter().product();
        let cols: usize = out_sizes.iter().product();
        let mut rows = Vec::with_capacity(rows_n * cols);
        for r in 0..rows_n {
            let g = unravel(r, &given_sizes);
            for c in 0..cols {
                let o = unravel(c, &out_sizes);
                rows.push(f(&g, &o));
            }
        }
        CondTable::new(given, outputs, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredJoint {
    concrete: Vec<Factor>,
    symbolic: Vec<Factor>,
    table: Vec<f64>,
}

pub fn unravel(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        out[i] = idx % sizes[i];
        idx /= sizes[i];
    }
    out
}

pub fn ravel(tuple: &[usize], sizes: &[usize]) -> usize {
    let mut idx = 0;
    for (t, s) in tuple.iter().zip(sizes) {
        idx = idx * s + t;
    }
    idx
}

impl FactoredJoint {
    /// The empty joint: no factors, a single tuple of probability one.
    pub fn unit() -> Self {
        FactoredJoint {
            concrete: vec![],
            symbolic: vec![],
            table: vec![1.0],
        }
    }

    pub fn new(concrete: Vec<Factor>, symbolic: Vec<Factor>, table: Vec<f64>) -> Result<Self> {
        let j = FactoredJoint {
            concrete,
            symbolic,
            table,
        };
        j.check()?;
        Ok(j)
    }

    /// Joint over concrete factors only, from a dense row-major table.
    pub fn from_table(factors: Vec<Factor>, table: Vec<f64>) -> Result<Self> {
        Self::new(factors, vec![], table)
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for f in self.concrete.iter().chain(&self.symbolic) {
            if !seen.insert(f.id.clone()) {
                return Err(Error::ShapeMismatch(format!(
                    "duplicate factor id {}",
                    f.id
                )));
            }
        }
        for f in &self.concrete {
            if f.is_symbolic() {
                return Err(Error::ShapeMismatch(format!(
                    "symbolic factor {} in concrete list",
                    f.id
                )));
            }
        }
        for f in &self.symbolic {
            if !f.is_symbolic() {
                return Err(Error::ShapeMismatch(format!(
                    "concrete factor {} in symbolic list",
                    f.id
                )));
            }
        }
        let dim: usize = self.sizes().iter().product();
        if self.table.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "table has {} entries, expected {dim}",
                self.table.len()
            )));
        }
        if self.table.iter().any(|&p| p < -PROB_FLOOR) {
            return Err(Error::ShapeMismatch("negative probability in table".into()));
        }
        let s: f64 = self.table.iter().sum();
        if (s - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ShapeMismatch(format!("table sums to {s}, not 1")));
        }
        Ok(())
    }

    pub fn concrete_factors(&self) -> &[Factor] {
        &self.concrete
    }

    pub fn symbolic_factors(&self) -> &[Factor] {
        &self.symbolic
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.concrete.iter().map(|f| f.size().unwrap()).collect()
    }

    pub fn has_factor(&self, id: &str) -> bool {
        self.concrete.iter().any(|f| f.id == id) || self.symbolic.iter().any(|f| f.id == id)
    }

    pub fn all_ids(&self) -> VarSet {
        self.concrete
            .iter()
            .chain(&self.symbolic)
            .map(|f| f.id.clone())
            .collect()
    }

    pub fn concrete_index(&self, id: &str) -> Option<usize> {
        self.concrete.iter().position(|f| f.id == id)
    }

    pub fn factor(&self, id: &str) -> Option<&Factor> {
        self.concrete
            .iter()
            .chain(&self.symbolic)
            .find(|f| f.id == id)
    }

    fn check_known(&self, s: &VarSet) -> Result<()> {
        for id in s {
            if !self.has_factor(id) {
                return Err(Error::UnknownFactor(id.clone()));
            }
        }
        Ok(())
    }

    /// Sum the table over all concrete factors not in `keep`; symbolic factors
    /// in `keep` are retained.
    pub fn marginalize(&self, keep: &VarSet) -> Result<FactoredJoint> {
        self.check_known(keep)?;
        let kept: Vec<usize> = (0..self.concrete.len())
            .filter(|&i| keep.contains(&self.concrete[i].id))
            .collect();
        let sizes = self.sizes();
        let kept_sizes: Vec<usize> = kept.iter().map(|&i| sizes[i]).collect();
        let out_dim: usize = kept_sizes.iter().product();
        let mut out = vec![0.0; out_dim];
        // precompute, per original factor, its multiplier into the output index
        let mut mult = vec![0usize; self.concrete.len()];
        {
            let mut m = 1usize;
            for (pos, &i) in kept.iter().enumerate().rev() {
                mult[i] = m;
                m *= kept_sizes[pos];
            }
        }
        for (idx, &p) in self.table.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let tuple = unravel(idx, &sizes);
            let mut oidx = 0usize;
            for &i in &kept {
                oidx += tuple[i] * mult[i];
            }
            out[oidx] += p;
        }
        let concrete = kept.iter().map(|&i| self.concrete[i].clone()).collect();
        let symbolic = self
            .symbolic
            .iter()
            .filter(|f| keep.contains(&f.id))
            .cloned()
            .collect();
        Ok(FactoredJoint {
            concrete,
            symbolic,
            table: out,
        })
    }

    /// H(s) in bits, as an affine expression: the Shannon entropy of the
    /// concrete part of `s` plus one rate-symbol term per symbolic member.
    pub fn entropy(&self, s: &VarSet) -> Result<AffineRateExpr> {
        self.check_known(s)?;
        let marg = self.marginalize(
            &s.iter()
                .filter(|id| self.concrete_index(id).is_some())
                .cloned()
                .collect(),
        )?;
        let mut h = 0.0;
        for &p in &marg.table {
            if p > PROB_FLOOR {
                h -= p * p.log2();
            }
        }
        let mut expr = AffineRateExpr::constant(h);
        for f in &self.symbolic {
            if s.contains(&f.id) {
                if let FactorKind::Symbolic { rate_symbol } = &f.kind {
                    expr.add_symbol(rate_symbol, Rational::from_integer(1));
                }
            }
        }
        Ok(expr)
    }

    /// I(a; b | c) via the four-entropy identity.
    pub fn cond_mutual_info(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<AffineRateExpr> {
        let ac: VarSet = a.union(c).cloned().collect();
        let bc: VarSet = b.union(c).cloned().collect();
        let abc: VarSet = ac.union(b).cloned().collect();
        let h_ac = self.entropy(&ac)?;
        let h_bc = self.entropy(&bc)?;
        let h_abc = self.entropy(&abc)?;
        let h_c = self.entropy(c)?;
        Ok(h_ac.add(&h_bc).sub(&h_abc).sub(&h_c))
    }

    /// Product extension: `p_new(old, new) = p_old(old) * kernel(new | old[given])`.
    pub fn extend(&self, kernel: &CondTable) -> Result<FactoredJoint> {
        kernel.check()?;
        let sizes = self.sizes();
        let mut given_pos = Vec::with_capacity(kernel.given.len());
        for (id, sz) in kernel.given.iter().zip(&kernel.given_sizes) {
            let pos = self.concrete_index(id).ok_or_else(|| {
                Error::ShapeMismatch(format!("kernel conditions on absent factor {id}"))
            })?;
            if sizes[pos] != *sz {
                return Err(Error::ShapeMismatch(format!(
                    "kernel expects |{id}| = {sz}, joint has {}",
                    sizes[pos]
                )));
            }
            given_pos.push(pos);
        }
        for f in &kernel.outputs {
            if self.has_factor(&f.id) {
                return Err(Error::ShapeMismatch(format!(
                    "kernel output {} already present",
                    f.id
                )));
            }
        }
        let cols = kernel.output_count();
        let mut table = Vec::with_capacity(self.table.len() * cols);
        for (idx, &p) in self.table.iter().enumerate() {
            let tuple = unravel(idx, &sizes);
            let g: Vec<usize> = given_pos.iter().map(|&i| tuple[i]).collect();
            let row = ravel(&g, &kernel.given_sizes);
            let base = row * cols;
            for c in 0..cols {
                table.push(p * kernel.rows[base + c]);
            }
        }
        let mut concrete = self.concrete.clone();
        concrete.extend(kernel.outputs.iter().cloned());
        Ok(FactoredJoint {
            concrete,
            symbolic: self.symbolic.clone(),
            table,
        })
    }

    pub fn with_symbolic(&self, f: Factor) -> Result<FactoredJoint> {
        if !f.is_symbolic() {
            return Err(Error::ShapeMismatch(format!("{} is not symbolic", f.id)));
        }
        if self.has_factor(&f.id) {
            return Err(Error::ShapeMismatch(format!(
                "factor {} already present",
                f.id
            )));
        }
        let mut out = self.clone();
        out.symbolic.push(f);
        Ok(out)
    }

    /// Conditional table of `outputs` given `given`, computed from this joint.
    /// Rows whose conditioning event has zero probability are filled uniformly.
    pub fn conditional(&self, given: &[String], outputs: &[String]) -> Result<CondTable> {
        let mut all = varset(given.iter());
        all.extend(outputs.iter().cloned());
        let marg = self.marginalize(&all)?;
        let out_factors: Vec<Factor> = outputs
            .iter()
            .map(|id| {
                marg.factor(id)
                    .cloned()
                    .ok_or_else(|| Error::UnknownFactor(id.clone()))
            })
            .collect::<Result<_>>()?;
        let given_sizes: Vec<usize> = given
            .iter()
            .map(|id| {
                marg.factor(id)
                    .and_then(|f| f.size())
                    .ok_or_else(|| Error::UnknownFactor(id.clone()))
            })
            .collect::<Result<_>>()?;
        let out_sizes: Vec<usize> = out_factors.iter().map(|f| f.size().unwrap()).collect();
        let rows_n: usize = given_sizes.iter().product();
        let cols: usize = out_sizes.iter().product();
        let sizes = marg.sizes();
        let gpos: Vec<usize> = given
            .iter()
            .map(|id| marg.concrete_index(id).unwrap())
            .collect();
        let opos: Vec<usize> = outputs
            .iter()
            .map(|id| marg.concrete_index(id).unwrap())
            .collect();
        let mut num = vec![0.0; rows_n * cols];
        let mut den = vec![0.0; rows_n];
        for (idx, &p) in marg.table.iter().enumerate() {
            let tuple = unravel(idx, &sizes);
            let g: Vec<usize> = gpos.iter().map(|&i| tuple[i]).collect();
            let o: Vec<usize> = opos.iter().map(|&i| tuple[i]).collect();
            let r = ravel(&g, &given_sizes);
            num[r * cols + ravel(&o, &out_sizes)] += p;
            den[r] += p;
        }
        let mut rows = vec![0.0; rows_n * cols];
        for r in 0..rows_n {
            for c in 0..cols {
                rows[r * cols + c] = if den[r] > PROB_FLOOR {
                    num[r * cols + c] / den[r]
                } else {
                    1.0 / cols as f64
                };
            }
        }
        CondTable::new(
            given.iter().cloned().zip(given_sizes).collect(),
            out_factors,
            rows,
        )
    }

    /// Reorder concrete factors to the given id order (a permutation of the
    /// current concrete factors).
    pub fn reorder(&self, order: &[String]) -> Result<FactoredJoint> {
        if order.len() != self.concrete.len() {
            return Err(Error::ShapeMismatch(
                "reorder must list every concrete factor".into(),
            ));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|id| {
                self.concrete_index(id)
                    .ok_or_else(|| Error::UnknownFactor(id.clone()))
            })
            .collect::<Result<_>>()?;
        let sizes = self.sizes();
        let new_factors: Vec<Factor> = perm.iter().map(|&i| self.concrete[i].clone()).collect();
        let new_sizes: Vec<usize> = perm.iter().map(|&i| sizes[i]).collect();
        let mut table = vec![0.0; self.table.len()];
        for (idx, &p) in self.table.iter().enumerate() {
            let tuple = unravel(idx, &sizes);
            let new_tuple: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
            table[ravel(&new_tuple, &new_sizes)] = p;
        }
        Ok(FactoredJoint {
            concrete: new_factors,
            symbolic: self.symbolic.clone(),
            table,
        })
    }

    pub fn max_abs_diff(&self, other: &FactoredJoint) -> Result<f64> {
        let ids: Vec<String> = self.concrete.iter().map(|f| f.id.clone()).collect();
        let other = other.reorder(&ids)?;
        if other.sizes() != self.sizes() {
            return Err(Error::ShapeMismatch("factor alphabets differ".into()));
        }
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Entropy evaluator with memoization keyed by the concrete subset. The same
/// subsets recur many times while generating inequality systems; caching keeps
/// large instances tractable.
pub struct EntropyEvaluator<'a> {
    joint: &'a FactoredJoint,
    cache: std::cell::RefCell<HashMap<Vec<String>, f64>>,
}

impl<'a> EntropyEvaluator<'a> {
    pub fn new(joint: &'a FactoredJoint) -> Self {
        EntropyEvaluator {
            joint,
            cache: std::cell::RefCell::new(HashMap::new()),
        }
    }

    pub fn joint(&self) -> &FactoredJoint {
        self.joint
    }

    pub fn entropy(&self, s: &VarSet) -> Result<AffineRateExpr> {
        for id in s {
            if !self.joint.has_factor(id) {
                return Err(Error::UnknownFactor(id.clone()));
            }
        }
        let concrete: Vec<String> = s
            .iter()
            .filter(|id| self.joint.concrete_index(id).is_some())
            .cloned()
            .collect();
        let h = {
            let cached = self.cache.borrow().get(&concrete).copied();
            match cached {
                Some(h) => h,
                None => {
                    let h = self
                        .joint
                        .entropy(&concrete.iter().cloned().collect())?
                        .constant;
                    self.cache.borrow_mut().insert(concrete.clone(), h);
                    h
                }
            }
        };
        let mut expr = AffineRateExpr::constant(h);
        for f in self.joint.symbolic_factors() {
            if s.contains(&f.id) {
                if let FactorKind::Symbolic { rate_symbol } = &f.kind {
                    expr.add_symbol(rate_symbol, Rational::from_integer(1));
                }
            }
        }
        Ok(expr)
    }

    pub fn cond_mutual_info(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<AffineRateExpr> {
        let ac: VarSet = a.union(c).cloned().collect();
        let bc: VarSet = b.union(c).cloned().collect();
        let abc: VarSet = ac.union(b).cloned().collect();
        Ok(self
            .entropy(&ac)?
            .add(&self.entropy(&bc)?)
            .sub(&self.entropy(&abc)?)
            .sub(&self.entropy(c)?))
    }
}

/// Binary entropy function in bits; endpoints map to zero.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "binary_entropy argument {p} outside [0,1]"
        )));
    }
    let mut h = 0.0;
    if p > PROB_FLOOR {
        h -= p * p.log2();
    }
    if 1.0 - p > PROB_FLOOR {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    Ok(h)
}

/// Expectation helper: mean of `f` over the joint's concrete tuples.
pub fn expectation<F>(joint: &FactoredJoint, f: F) -> f64
where
    F: Fn(&[usize]) -> f64,
{
    let sizes = joint.sizes();
    joint
        .table()
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            if p > 0.0 {
                p * f(&unravel(idx, &sizes))
            } else {
                0.0
            }
        })
        .sum()
}
