//! Vector-Gaussian acyclic networks with log-det packing/covering bounds.
//!
//! Node k observes `Y_k = sum_j H[k][j] X_j + sum_j Hy[k][j] Y_j + Y'_k` with
//! independent Gaussian noise `Y'_k`. The coding layer covers jointly
//! Gaussian codebooks `U_{W_k} = G_k U_{D_k} + G'_k Y_k + U'_{W_k}` and
//! transmits `X_k = F_k U_{D_k union W_k} + F'_k Y_k`. Every per-node
//! packing/covering bound then reduces to a ratio of covariance determinants.

use crate::coding::CodingParams;
use crate::error::{Error, Result};
use crate::expr::AffineRateExpr;
use crate::region::{
    bar_t, node_index_sets, BoundKind, IneqOrigin, InequalitySystem, LinearInequality, Sense,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgnNode {
    /// observation dimension r_k
    pub y_dim: usize,
    /// transmit dimension t_k
    pub x_dim: usize,
    /// channel matrices from each earlier node's transmit vector (len k-1)
    pub h: Vec<DMatrix<f64>>,
    /// channel matrices from each earlier node's observation vector (len k-1)
    pub h_obs: Vec<DMatrix<f64>>,
    /// noise covariance of Y'_k (y_dim x y_dim)
    pub noise_cov: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agn {
    pub nodes: Vec<AgnNode>,
}

impl Agn {
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        for (k0, node) in self.nodes.iter().enumerate() {
            let label = format!("node {}", k0 + 1);
            if node.h.len() != k0 || node.h_obs.len() != k0 {
                report.push(format!(
                    "{label}: expected {k0} channel matrices of each kind, found {} and {}",
                    node.h.len(),
                    node.h_obs.len()
                ));
                continue;
            }
            for (j0, m) in node.h.iter().enumerate() {
                if m.nrows() != node.y_dim || m.ncols() != self.nodes[j0].x_dim {
                    report.push(format!(
                        "{label}: transmit channel matrix from node {} is {}x{}, expected {}x{}",
                        j0 + 1,
                        m.nrows(),
                        m.ncols(),
                        node.y_dim,
                        self.nodes[j0].x_dim
                    ));
                }
            }
            for (j0, m) in node.h_obs.iter().enumerate() {
                if m.nrows() != node.y_dim || m.ncols() != self.nodes[j0].y_dim {
                    report.push(format!(
                        "{label}: observation channel matrix from node {} is {}x{}, expected {}x{}",
                        j0 + 1,
                        m.nrows(),
                        m.ncols(),
                        node.y_dim,
                        self.nodes[j0].y_dim
                    ));
                }
            }
            if node.noise_cov.nrows() != node.y_dim || node.noise_cov.ncols() != node.y_dim {
                report.push(format!("{label}: noise covariance shape mismatch"));
            }
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussNode {
    /// G_k: (stacked W_k dims) x (stacked D_k dims)
    pub g: DMatrix<f64>,
    /// G'_k: (stacked W_k dims) x y_dim
    pub g_obs: DMatrix<f64>,
    /// covariance of the fresh codebook noise U'_{W_k}
    pub noise_cov: DMatrix<f64>,
    /// F_k: x_dim x (stacked D_k union W_k dims)
    pub f: DMatrix<f64>,
    /// F'_k: x_dim x y_dim
    pub f_obs: DMatrix<f64>,
}

/// Gaussian coding parameters: the set structure (codebook index maps,
/// per-node covered/decoded sets) is carried by a [`CodingParams`] skeleton
/// whose factor lists are unused; `dims[j]` is the vector dimension of
/// codebook j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub skeleton: CodingParams,
    pub dims: Vec<usize>,
    pub nodes: Vec<GaussNode>,
}

/// Precomputed layout of the stacked vector
/// `[U_{W_1}; Y_1; U_{W_2}; Y_2; ...]`.
struct Layout {
    /// start row of each node's block
    node_start: Vec<usize>,
    /// stacked W_k dimension per node
    w_dim: Vec<usize>,
    /// covering node (0-based) per codebook
    cover_node: Vec<usize>,
    /// row offset of each codebook inside its covering node's W stack
    w_offset: Vec<usize>,
    total: usize,
}

impl GaussianParams {
    fn layout(&self, agn: &Agn) -> Result<Layout> {
        let nu = self.skeleton.nu();
        let mut cover_node = vec![usize::MAX; nu];
        let mut w_offset = vec![0usize; nu];
        let mut w_dim = Vec::with_capacity(agn.nodes.len());
        let mut node_start = Vec::with_capacity(agn.nodes.len());
        let mut total = 0usize;
        for (k0, nc) in self.skeleton.nodes.iter().enumerate() {
            node_start.push(total);
            let mut off = 0usize;
            for &c in &nc.compress {
                if cover_node[c] != usize::MAX {
                    return Err(Error::Structure(format!("codebook {c} covered twice")));
                }
                cover_node[c] = k0;
                w_offset[c] = off;
                off += self.dims[c];
            }
            w_dim.push(off);
            total += off + agn.nodes[k0].y_dim;
        }
        if let Some(c) = cover_node.iter().position(|&n| n == usize::MAX) {
            return Err(Error::Structure(format!("codebook {c} never covered")));
        }
        Ok(Layout {
            node_start,
            w_dim,
            cover_node,
            w_offset,
            total,
        })
    }

    pub fn validate(&self, agn: &Agn) -> Vec<String> {
        let mut report = Vec::new();
        if self.dims.len() != self.skeleton.nu() {
            report.push("one dimension per codebook required".into());
        }
        if self.nodes.len() != agn.nodes.len() || self.skeleton.nodes.len() != agn.nodes.len() {
            report.push("per-node parameter count mismatch".into());
            return report;
        }
        for (k0, (gp, nc)) in self.nodes.iter().zip(&self.skeleton.nodes).enumerate() {
            let label = format!("node {}", k0 + 1);
            let w: usize = nc.compress.iter().map(|&c| self.dims[c]).sum();
            let d: usize = nc.decode_unique.iter().map(|&c| self.dims[c]).sum();
            let dw: usize = nc
                .decode_unique
                .union(&nc.compress)
                .map(|&c| self.dims[c])
                .sum();
            let (r, t) = (agn.nodes[k0].y_dim, agn.nodes[k0].x_dim);
            for (name, m, rows, cols) in [
                ("G", &gp.g, w, d),
                ("G'", &gp.g_obs, w, r),
                ("codebook noise covariance", &gp.noise_cov, w, w),
                ("F", &gp.f, t, dw),
                ("F'", &gp.f_obs, t, r),
            ] {
                if m.nrows() != rows || m.ncols() != cols {
                    report.push(format!(
                        "{label}: {name} is {}x{}, expected {rows}x{cols}",
                        m.nrows(),
                        m.ncols()
                    ));
                }
            }
        }
        report
    }

    /// Column offset of codebook `c` inside the ascending stack over `set`.
    fn stack_offset(&self, set: &BTreeSet<usize>, c: usize) -> usize {
        set.iter()
            .take_while(|&&x| x < c)
            .map(|&x| self.dims[x])
            .sum()
    }
}

fn copy_block(dst: &mut DMatrix<f64>, r0: usize, c0: usize, src: &DMatrix<f64>) {
    for r in 0..src.nrows() {
        for c in 0..src.ncols() {
            dst[(r0 + r, c0 + c)] = src[(r, c)];
        }
    }
}

/// All per-node-pair quantities of the linear system representation.
pub struct GaussianSystemBuilder<'a> {
    agn: &'a Agn,
    params: &'a GaussianParams,
    layout: Layout,
    /// scattered codebook maps G[k][j] ((W_k stack) x (W_j stack)), j < k
    g_scatter: Vec<Vec<DMatrix<f64>>>,
    /// scattered transmit maps F[k][j] (x_dim x (W_j stack)), j <= k
    f_scatter: Vec<Vec<DMatrix<f64>>>,
}

impl<'a> GaussianSystemBuilder<'a> {
    pub fn new(agn: &'a Agn, params: &'a GaussianParams) -> Result<Self> {
        let net = agn.validate();
        if !net.is_empty() {
            return Err(Error::Structure(net.join("; ")));
        }
        let par = params.validate(agn);
        if !par.is_empty() {
            return Err(Error::Structure(par.join("; ")));
        }
        let layout = params.layout(agn)?;
        let n = agn.nodes.len();
        let mut g_scatter = Vec::with_capacity(n);
        let mut f_scatter = Vec::with_capacity(n);
        for k0 in 0..n {
            let nc = &params.skeleton.nodes[k0];
            let gp = &params.nodes[k0];
            let dw: BTreeSet<usize> = nc.decode_unique.union(&nc.compress).copied().collect();
            let mut g_row = Vec::with_capacity(k0);
            let mut f_row = Vec::with_capacity(k0 + 1);
            for j0 in 0..=k0 {
                let wj = layout.w_dim[j0];
                let mut fk = DMatrix::zeros(agn.nodes[k0].x_dim, wj);
                for &c in &dw {
                    if layout.cover_node[c] != j0 {
                        continue;
                    }
                    let src_col = params.stack_offset(&dw, c);
                    let block = gp.f.columns(src_col, params.dims[c]).into_owned();
                    copy_block(&mut fk, 0, layout.w_offset[c], &block);
                }
                f_row.push(fk);
                if j0 < k0 {
                    let mut gk = DMatrix::zeros(layout.w_dim[k0], wj);
                    for &c in &nc.decode_unique {
                        if layout.cover_node[c] != j0 {
                            continue;
                        }
                        let src_col = params.stack_offset(&nc.decode_unique, c);
                        let block = gp.g.columns(src_col, params.dims[c]).into_owned();
                        copy_block(&mut gk, 0, layout.w_offset[c], &block);
                    }
                    g_row.push(gk);
                }
            }
            g_scatter.push(g_row);
            f_scatter.push(f_row);
        }
        Ok(GaussianSystemBuilder {
            agn,
            params,
            layout,
            g_scatter,
            f_scatter,
        })
    }

    fn block_dim(&self, k0: usize) -> usize {
        self.layout.w_dim[k0] + self.agn.nodes[k0].y_dim
    }

    /// Chained channel effect `sum_{i in [j:k-1]} H[k][i] F[i][j]` plus the
    /// direct terms, as the 2x2 block transfer matrix from node j's
    /// `[U_{W_j}; Y_j]` block to node k's (1-based k > j).
    pub fn upsilon(&self, k: usize, j: usize) -> DMatrix<f64> {
        let (k0, j0) = (k - 1, j - 1);
        let node = &self.agn.nodes[k0];
        let gp = &self.params.nodes[k0];
        let wj = self.layout.w_dim[j0];
        // channel reaction to U_{W_j} through the transmit maps of [j:k-1]
        let mut hu = DMatrix::zeros(node.y_dim, wj);
        for i0 in j0..k0 {
            hu += &node.h[i0] * &self.f_scatter[i0][j0];
        }
        // channel reaction to Y_j: direct observation path and via X_j
        let hy = &node.h[j0] * &self.params.nodes[j0].f_obs + &node.h_obs[j0];
        let mut out = DMatrix::zeros(self.block_dim(k0), self.block_dim(j0));
        let top_left = if j0 < self.g_scatter[k0].len() {
            &self.g_scatter[k0][j0] + &gp.g_obs * &hu
        } else {
            &gp.g_obs * &hu
        };
        copy_block(&mut out, 0, 0, &top_left);
        copy_block(&mut out, 0, wj, &(&gp.g_obs * &hy));
        copy_block(&mut out, self.layout.w_dim[k0], 0, &hu);
        copy_block(&mut out, self.layout.w_dim[k0], wj, &hy);
        out
    }

    /// Transfer from node j's fresh-noise block to node k's signal block,
    /// computed by the recursion `Phi[k][j] = sum_i Upsilon[k][i] Phi[i][j]`.
    pub fn phi(&self, k: usize, j: usize) -> DMatrix<f64> {
        let mut memo: BTreeMap<(usize, usize), DMatrix<f64>> = BTreeMap::new();
        self.phi_memo(k, j, &mut memo)
    }

    fn phi_memo(
        &self,
        k: usize,
        j: usize,
        memo: &mut BTreeMap<(usize, usize), DMatrix<f64>>,
    ) -> DMatrix<f64> {
        if let Some(m) = memo.get(&(k, j)) {
            return m.clone();
        }
        let out = if k == j {
            DMatrix::identity(self.block_dim(k - 1), self.block_dim(k - 1))
        } else {
            let mut acc = DMatrix::zeros(self.block_dim(k - 1), self.block_dim(j - 1));
            for i in j..k {
                acc += self.upsilon(k, i) * self.phi_memo(i, j, memo);
            }
            acc
        };
        memo.insert((k, j), out.clone());
        out
    }

    /// Reference implementation of the same transfer as an explicit sum over
    /// chains `j = s_1 < s_2 < ... < s_m = k` of products of one-step blocks.
    pub fn phi_subset_sum(&self, k: usize, j: usize) -> DMatrix<f64> {
        if k == j {
            return DMatrix::identity(self.block_dim(k - 1), self.block_dim(k - 1));
        }
        let inner: Vec<usize> = (j + 1..k).collect();
        let mut acc = DMatrix::zeros(self.block_dim(k - 1), self.block_dim(j - 1));
        for mask in 0..(1usize << inner.len()) {
            let mut chain = vec![j];
            chain.extend(
                (0..inner.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| inner[i]),
            );
            chain.push(k);
            let mut prod = DMatrix::identity(self.block_dim(j - 1), self.block_dim(j - 1));
            for w in chain.windows(2) {
                prod = self.upsilon(w[1], w[0]) * prod;
            }
            acc += prod;
        }
        acc
    }

    /// Covariance of node j's fresh-noise block `[G'_j Y'_j + U'_{W_j}; Y'_j]`.
    pub fn psi_cov(&self, j: usize) -> DMatrix<f64> {
        let j0 = j - 1;
        let gp = &self.params.nodes[j0];
        let lam = &self.agn.nodes[j0].noise_cov;
        let wj = self.layout.w_dim[j0];
        let rj = self.agn.nodes[j0].y_dim;
        let mut out = DMatrix::zeros(wj + rj, wj + rj);
        copy_block(
            &mut out,
            0,
            0,
            &(&gp.noise_cov + &gp.g_obs * lam * gp.g_obs.transpose()),
        );
        copy_block(&mut out, 0, wj, &(&gp.g_obs * lam));
        copy_block(&mut out, wj, 0, &(lam * gp.g_obs.transpose()));
        copy_block(&mut out, wj, wj, &lam.clone());
        out
    }

    /// Covariance of the full stacked signal vector, assembled from the
    /// block transfer matrices.
    pub fn full_covariance(&self) -> DMatrix<f64> {
        let n = self.agn.nodes.len();
        let total = self.layout.total;
        let mut p = DMatrix::zeros(total, total);
        let mut memo = BTreeMap::new();
        for k in 1..=n {
            for j in 1..=k {
                let m = self.phi_memo(k, j, &mut memo);
                copy_block(
                    &mut p,
                    self.layout.node_start[k - 1],
                    self.layout.node_start[j - 1],
                    &m,
                );
            }
        }
        let mut lam = DMatrix::zeros(total, total);
        for j in 1..=n {
            let c = self.psi_cov(j);
            copy_block(
                &mut lam,
                self.layout.node_start[j - 1],
                self.layout.node_start[j - 1],
                &c,
            );
        }
        &p * lam * p.transpose()
    }

    /// The same covariance computed independently by propagating each signal
    /// block as a linear combination of the primitive noises in order.
    pub fn propagate_covariance(&self) -> DMatrix<f64> {
        let n = self.agn.nodes.len();
        let total = self.layout.total;
        // representation rows: each signal coordinate as weights on the
        // stacked primitive noise vector [U'_{W_1}; Y'_1; U'_{W_2}; Y'_2; ...]
        let mut rep: Vec<DMatrix<f64>> = Vec::new(); // per node: block_dim x total
        let mut x_rep: Vec<DMatrix<f64>> = Vec::new(); // per node: x_dim x total
        for k0 in 0..n {
            let node = &self.agn.nodes[k0];
            let gp = &self.params.nodes[k0];
            let wk = self.layout.w_dim[k0];
            // Y_k from earlier transmits, earlier observations, own noise
            let mut y = DMatrix::zeros(node.y_dim, total);
            for j0 in 0..k0 {
                let wj = self.layout.w_dim[j0];
                let yj = rep[j0].rows(wj, self.agn.nodes[j0].y_dim).into_owned();
                y += &node.h[j0] * &x_rep[j0] + &node.h_obs[j0] * yj;
            }
            {
                let start = self.layout.node_start[k0] + wk;
                for r in 0..node.y_dim {
                    y[(r, start + r)] += 1.0;
                }
            }
            // U_{W_k} = G_k U_{D_k} + G'_k Y_k + U'_{W_k}
            let mut u = &gp.g_obs * &y;
            let nc = &self.params.skeleton.nodes[k0];
            for &c in &nc.decode_unique {
                let j0 = self.layout.cover_node[c];
                let src = rep[j0]
                    .rows(self.layout.w_offset[c], self.params.dims[c])
                    .into_owned();
                let col = self.params.stack_offset(&nc.decode_unique, c);
                u += gp.g.columns(col, self.params.dims[c]) * src;
            }
            {
                let start = self.layout.node_start[k0];
                for r in 0..wk {
                    u[(r, start + r)] += 1.0;
                }
            }
            let mut block = DMatrix::zeros(wk + node.y_dim, total);
            copy_block(&mut block, 0, 0, &u);
            copy_block(&mut block, wk, 0, &y);
            // X_k = F_k U_{D_k union W_k} + F'_k Y_k
            let mut x = &gp.f_obs * &y;
            let dw: BTreeSet<usize> = nc.decode_unique.union(&nc.compress).copied().collect();
            for &c in &dw {
                let j0 = self.layout.cover_node[c];
                let holder = if j0 == k0 { &block } else { &rep[j0] };
                let src = holder
                    .rows(self.layout.w_offset[c], self.params.dims[c])
                    .into_owned();
                let col = self.params.stack_offset(&dw, c);
                x += gp.f.columns(col, self.params.dims[c]) * src;
            }
            rep.push(block);
            x_rep.push(x);
        }
        let mut lam = DMatrix::zeros(total, total);
        for j in 1..=n {
            let gp = &self.params.nodes[j - 1];
            let wj = self.layout.w_dim[j - 1];
            let start = self.layout.node_start[j - 1];
            copy_block(&mut lam, start, start, &gp.noise_cov);
            copy_block(
                &mut lam,
                start + wj,
                start + wj,
                &self.agn.nodes[j - 1].noise_cov,
            );
        }
        let mut full = DMatrix::zeros(total, total);
        for k0 in 0..n {
            for j0 in 0..n {
                let b = rep[k0].clone() * &lam * rep[j0].transpose();
                copy_block(
                    &mut full,
                    self.layout.node_start[k0],
                    self.layout.node_start[j0],
                    &b,
                );
            }
        }
        full
    }

    /// Row ranges of the stacked vector for a codebook set and optionally a
    /// node's observation.
    fn rows_of(&self, codebooks: &BTreeSet<usize>, y_node: Option<usize>) -> Vec<usize> {
        let mut rows = Vec::new();
        for &c in codebooks {
            let start = self.layout.node_start[self.layout.cover_node[c]] + self.layout.w_offset[c];
            rows.extend(start..start + self.params.dims[c]);
        }
        if let Some(k0) = y_node {
            let start = self.layout.node_start[k0] + self.layout.w_dim[k0];
            rows.extend(start..start + self.agn.nodes[k0].y_dim);
        }
        rows
    }

    fn principal(&self, cov: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows.len(), rows.len());
        for (a, &ra) in rows.iter().enumerate() {
            for (b, &rb) in rows.iter().enumerate() {
                out[(a, b)] = cov[(ra, rb)];
            }
        }
        out
    }

    /// Generate the per-node log-det packing/covering system.
    pub fn system(&self) -> Result<InequalitySystem> {
        let cov = self.full_covariance();
        let omega = &self.params.skeleton;
        let mut inequalities = Vec::new();
        let log_det_sel = |codebooks: &BTreeSet<usize>, y_node: Option<usize>| -> Result<f64> {
            log_det(&self.principal(&cov, &self.rows_of(codebooks, y_node)))
        };
        for k in 1..=omega.nodes.len() {
            let nc = &omega.nodes[k - 1];
            let sets = node_index_sets(omega, k)?;
            let db_idx: Vec<usize> = sets.d_bar.union(&sets.b_bar).copied().collect();
            let all_cb: BTreeSet<usize> = nc
                .decode_unique
                .union(&nc.decode_nonunique)
                .copied()
                .collect();
            for mask in 0..(1usize << db_idx.len()) {
                let s: BTreeSet<usize> = (0..db_idx.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| db_idx[i])
                    .collect();
                if s.is_disjoint(&sets.d_bar) {
                    continue;
                }
                let sb = crate::region::bar_s(omega, k, &s)?;
                let sb_c: BTreeSet<usize> = all_cb.difference(&sb).copied().collect();
                let mut val = log_det_sel(&sb_c, Some(k - 1))? - log_det_sel(&all_cb, Some(k - 1))?;
                for &j in &sb {
                    let a = &omega.codebooks[j].superpose;
                    let mut ja = a.clone();
                    ja.insert(j);
                    val += log_det_sel(&ja, None)? - log_det_sel(a, None)?;
                }
                inequalities.push(rate_ineq(
                    omega,
                    &s,
                    Sense::StrictLess,
                    0.5 * val,
                    IneqOrigin {
                        system: "gaussian".into(),
                        node: k,
                        kind: BoundKind::Packing,
                        subset: s.iter().copied().collect(),
                    },
                ));
            }
            let w_idx: Vec<usize> = sets.w_bar.iter().copied().collect();
            for mask in 1..(1usize << w_idx.len()) {
                let t: BTreeSet<usize> = (0..w_idx.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| w_idx[i])
                    .collect();
                let tb = bar_t(omega, k, &t)?;
                // fresh-noise covariance of the T-bar codebooks at this node
                let mut noise_rows = Vec::new();
                for &c in &tb {
                    noise_rows.extend(
                        self.layout.w_offset[c]..self.layout.w_offset[c] + self.params.dims[c],
                    );
                }
                let noise = self.principal(&self.params.nodes[k - 1].noise_cov, &noise_rows);
                let mut val = -log_det(&noise)?;
                for &j in &tb {
                    let a = &omega.codebooks[j].superpose;
                    let mut ja = a.clone();
                    ja.insert(j);
                    val += log_det_sel(&ja, None)? - log_det_sel(a, None)?;
                }
                inequalities.push(rate_ineq(
                    omega,
                    &t,
                    Sense::StrictGreater,
                    0.5 * val,
                    IneqOrigin {
                        system: "gaussian".into(),
                        node: k,
                        kind: BoundKind::Covering,
                        subset: t.iter().copied().collect(),
                    },
                ));
            }
        }
        inequalities.sort_by(|a, b| a.origin.cmp(&b.origin));
        let universe = omega.rate_vars.iter().cloned().collect();
        Ok(InequalitySystem {
            inequalities,
            universe,
        })
    }

    /// Covariance of the stacked `[X_1; ...; X_N; Y_1; ...; Y_N]` vector.
    pub fn io_covariance(&self) -> DMatrix<f64> {
        let cov = self.propagate_covariance_io();
        cov
    }

    fn propagate_covariance_io(&self) -> DMatrix<f64> {
        // reuse the direct propagation and read out X as F-combinations
        let n = self.agn.nodes.len();
        let full = self.full_covariance();
        // X_k rows as a map on the stacked signal vector
        let x_total: usize = self.agn.nodes.iter().map(|nd| nd.x_dim).sum();
        let y_total: usize = self.agn.nodes.iter().map(|nd| nd.y_dim).sum();
        let mut m = DMatrix::zeros(x_total + y_total, self.layout.total);
        let mut row = 0usize;
        for k0 in 0..n {
            let gp = &self.params.nodes[k0];
            for j0 in 0..=k0 {
                let f = &self.f_scatter[k0][j0];
                copy_block2(&mut m, row, self.layout.node_start[j0], f);
            }
            copy_block2(
                &mut m,
                row,
                self.layout.node_start[k0] + self.layout.w_dim[k0],
                &gp.f_obs,
            );
            row += self.agn.nodes[k0].x_dim;
        }
        for k0 in 0..n {
            let start = self.layout.node_start[k0] + self.layout.w_dim[k0];
            for r in 0..self.agn.nodes[k0].y_dim {
                m[(row + r, start + r)] = 1.0;
            }
            row += self.agn.nodes[k0].y_dim;
        }
        &m * full * m.transpose()
    }
}

fn copy_block2(dst: &mut DMatrix<f64>, r0: usize, c0: usize, src: &DMatrix<f64>) {
    copy_block(dst, r0, c0, src)
}

fn rate_ineq(
    omega: &CodingParams,
    set: &BTreeSet<usize>,
    sense: Sense,
    rhs: f64,
    origin: IneqOrigin,
) -> LinearInequality {
    let mut lhs = BTreeMap::new();
    for &j in set {
        *lhs.entry(omega.rate_vars[j].clone())
            .or_insert_with(|| crate::expr::Rational::from_integer(0)) +=
            crate::expr::Rational::from_integer(1);
    }
    LinearInequality {
        lhs,
        sense,
        rhs: AffineRateExpr::constant(rhs),
        origin: Some(origin),
    }
}

/// Base-2 log-determinant of a symmetric positive-definite matrix via
/// symmetric elimination; the determinant of an empty matrix is one.
pub fn log_det(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut a = m.clone();
    let mut acc = 0.0;
    for i in 0..n {
        let pivot = a[(i, i)];
        if pivot < PIVOT_TOL {
            return Err(Error::SingularCovariance(format!(
                "pivot {pivot:.3e} at row {i}"
            )));
        }
        acc += pivot.log2();
        for r in i + 1..n {
            let f = a[(r, i)] / pivot;
            for c in i..n {
                a[(r, c)] -= f * a[(i, c)];
            }
        }
    }
    Ok(acc)
}

/// Quadratic objectives: component i is `E[z^t Q_i z]` over the stacked
/// `[X_1..X_N, Y_1..Y_N]` vector, which must stay below `bound[i]` with
/// strict margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub q: Vec<DMatrix<f64>>,
    pub bound: Vec<f64>,
}

pub const OBJECTIVE_MARGIN: f64 = 1e-9;

pub fn check_objective(
    builder: &GaussianSystemBuilder,
    objective: &ObjectiveSpec,
) -> Result<Vec<(f64, bool)>> {
    if objective.q.len() != objective.bound.len() {
        return Err(Error::ShapeMismatch("one bound per quadratic form".into()));
    }
    let cov = builder.io_covariance();
    objective
        .q
        .iter()
        .zip(&objective.bound)
        .map(|(q, &b)| {
            if q.nrows() != cov.nrows() || q.ncols() != cov.ncols() {
                return Err(Error::ShapeMismatch(format!(
                    "objective form is {}x{}, expected {}x{}",
                    q.nrows(),
                    q.ncols(),
                    cov.nrows(),
                    cov.ncols()
                )));
            }
            let e = (q * &cov).trace();
            Ok((e, e <= (1.0 - OBJECTIVE_MARGIN) * b))
        })
        .collect()
}

/// Scalar channel Y2 = X1 + Z with X1 = U1 ~ N(0, p), Z ~ N(0, 1).
pub fn point_to_point(p: f64) -> (Agn, GaussianParams) {
    use crate::coding::{Codebook, NodeCoding};
    let agn = Agn {
        nodes: vec![
            AgnNode {
                y_dim: 0,
                x_dim: 1,
                h: vec![],
                h_obs: vec![],
                noise_cov: DMatrix::zeros(0, 0),
            },
            AgnNode {
                y_dim: 1,
                x_dim: 0,
                h: vec![DMatrix::from_element(1, 1, 1.0)],
                h_obs: vec![DMatrix::zeros(1, 0)],
                noise_cov: DMatrix::from_element(1, 1, 1.0),
            },
        ],
    };
    let skeleton = CodingParams {
        mu: 1,
        rate_vars: vec!["r1".to_string()],
        codebooks: vec![Codebook {
            label: "U1".to_string(),
            factors: vec![],
            gamma: BTreeSet::from([0]),
            superpose: BTreeSet::new(),
        }],
        nodes: vec![
            NodeCoding {
                compress: BTreeSet::from([0]),
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: BTreeSet::from([0]),
                ..NodeCoding::default()
            },
        ],
    };
    let params = GaussianParams {
        skeleton,
        dims: vec![1],
        nodes: vec![
            GaussNode {
                g: DMatrix::zeros(1, 0),
                g_obs: DMatrix::zeros(1, 0),
                noise_cov: DMatrix::from_element(1, 1, p),
                f: DMatrix::from_element(1, 1, 1.0),
                f_obs: DMatrix::zeros(1, 0),
            },
            GaussNode {
                g: DMatrix::zeros(0, 1),
                g_obs: DMatrix::zeros(0, 1),
                noise_cov: DMatrix::zeros(0, 0),
                f: DMatrix::zeros(0, 1),
                f_obs: DMatrix::zeros(0, 1),
            },
        ],
    };
    (agn, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_to_point_capacity() {
        let p = 3.0;
        let (agn, params) = point_to_point(p);
        let builder = GaussianSystemBuilder::new(&agn, &params).unwrap();
        let system = builder.system().unwrap();
        assert_eq!(system.inequalities.len(), 2);
        let packing = system
            .inequalities
            .iter()
            .find(|i| i.sense == Sense::StrictLess)
            .unwrap();
        assert!((packing.rhs.constant - 0.5 * (1.0 + p).log2()).abs() < 1e-9);
        let covering = system
            .inequalities
            .iter()
            .find(|i| i.sense == Sense::StrictGreater)
            .unwrap();
        assert!(covering.rhs.constant.abs() < 1e-9);
    }

    #[test]
    fn recursion_matches_subset_sum() {
        let (agn, params) = point_to_point(2.0);
        let builder = GaussianSystemBuilder::new(&agn, &params).unwrap();
        let a = builder.phi(2, 1);
        let b = builder.phi_subset_sum(2, 1);
        assert!((a - b).abs().max() < 1e-12);
    }

    #[test]
    fn propagation_matches_transfer() {
        let (agn, params) = point_to_point(2.0);
        let builder = GaussianSystemBuilder::new(&agn, &params).unwrap();
        let a = builder.full_covariance();
        let b = builder.propagate_covariance();
        assert!((a - b).abs().max() < 1e-9);
    }

    #[test]
    fn power_objective() {
        let (agn, params) = point_to_point(2.0);
        let builder = GaussianSystemBuilder::new(&agn, &params).unwrap();
        // E[X1^2] = 2 against power limits 3 (pass) and 2 (fail: no margin)
        let q = DMatrix::from_fn(2, 2, |r, c| if r == 0 && c == 0 { 1.0 } else { 0.0 });
        let out = check_objective(
            &builder,
            &ObjectiveSpec {
                q: vec![q.clone(), q],
                bound: vec![3.0, 2.0],
            },
        )
        .unwrap();
        assert!((out[0].0 - 2.0).abs() < 1e-9 && out[0].1);
        assert!(!out[1].1);
    }
}
