//! Block-unfolded compress-forward scheme on a three-node relay network.
//!
//! The single-block network: the source transmits X1, the relay observes
//! Y2 = X1 noiselessly and transmits X2, the destination observes Y3 drawn
//! from a mixture of a direct link (X1 through a BSC) and a relay link (X2
//! through a BSC). The relay quantizes its observation through an erasure
//! map Yh with a small keep probability, so that compressing the relay
//! observation is cheap relative to its value at the destination.
//!
//! The coding parameter set chains, per block b: a codebook X2_b carrying the
//! relay's fresh index, and a codebook Yh_b for the quantized observation,
//! indexed by the fresh and the previous relay index and superposed on X2_b.
//! One codebook U0 spans the message and all source transmissions. The
//! destination uniquely decodes U0 and nonuniquely decodes the relay
//! codebooks of blocks 1..B-1.

use super::{bset, entropy_of, CodingInstance};
use crate::coding::{Codebook, CodingParams, NodeCoding};
use crate::dist::{CondTable, Factor};
use crate::error::{Error, Result};
use crate::network::{unfold, Admn, Dmn, DmnNode, Role, DEFAULT_UNFOLD_CAP};
use crate::region::{fourier_motzkin, generate_system, Mode, DEFAULT_SUBSET_CAP};
use std::collections::BTreeSet;

/// direct-link weight in the destination observation mixture
const DIRECT_WEIGHT: f64 = 0.8;
/// crossover of both component channels toward the destination
const CH_FLIP: f64 = 0.1;
/// probability that the relay quantizer keeps its observation (else erasure)
const KEEP: f64 = 0.08;

/// p(y3 | x1, x2) of the mixture channel.
fn dest_channel(x1: usize, x2: usize, y3: usize) -> f64 {
    let p_direct = if y3 == x1 { 1.0 - CH_FLIP } else { CH_FLIP };
    let p_relay = if y3 == x2 { 1.0 - CH_FLIP } else { CH_FLIP };
    DIRECT_WEIGHT * p_direct + (1.0 - DIRECT_WEIGHT) * p_relay
}

/// q(yh | y2) of the relay quantizer; symbol 2 is the erasure.
fn quantizer(y2: usize, yh: usize) -> f64 {
    if yh == 2 {
        1.0 - KEEP
    } else if yh == y2 {
        KEEP
    } else {
        0.0
    }
}

/// The single-block network.
pub fn nnc_dmn() -> Result<Dmn> {
    let channel = CondTable::from_fn(
        vec![("X1".to_string(), 2), ("X2".to_string(), 2)],
        vec![Factor::concrete("Y2", 2), Factor::concrete("Y3", 2)],
        |g, o| {
            let relay_obs = if o[0] == g[0] { 1.0 } else { 0.0 };
            relay_obs * dest_channel(g[0], g[1], o[1])
        },
    )?;
    Ok(Dmn {
        nodes: vec![
            DmnNode {
                role: Role::Source,
                x: vec![Factor::concrete("X1", 2)],
                input_pmf: vec![0.5, 0.5],
                y: vec![],
            },
            DmnNode {
                role: Role::Relay,
                x: vec![Factor::concrete("X2", 2)],
                input_pmf: vec![0.5, 0.5],
                y: vec![Factor::concrete("Y2", 2)],
            },
            DmnNode {
                role: Role::Destination,
                x: vec![],
                input_pmf: vec![],
                y: vec![Factor::concrete("Y3", 2)],
            },
        ],
        channel,
        rate_symbol: "R".to_string(),
    })
}

fn blk(id: &str, b: usize) -> String {
    format!("{id}.b{b}")
}

/// The unfolded network and the chained parameter set for `blocks` blocks.
pub fn nnc_instance(blocks: usize) -> Result<(Admn, CodingParams)> {
    if blocks < 2 {
        return Err(Error::OutOfRange("at least 2 blocks required".into()));
    }
    let dmn = nnc_dmn()?;
    let admn = unfold(&dmn, blocks, DEFAULT_UNFOLD_CAP)?;
    let n = 3;

    // index sets: 0 is the message index, 1 + b is the relay's block-b index
    let mu = blocks + 1;
    let mut rate_vars = vec!["r0".to_string()];
    for b in 0..blocks {
        rate_vars.push(format!("rr{b}"));
    }

    // codebooks in covering order: U0, then per block the relay transmit
    // codebook and (from block 2 on) the quantization codebook of the
    // previous block
    let mut codebooks = vec![Codebook {
        label: "U0".to_string(),
        factors: std::iter::once("M".to_string())
            .chain((1..=blocks).map(|b| blk("X1", b)))
            .collect(),
        gamma: bset(&[0]),
        superpose: BTreeSet::new(),
    }];
    let x2_idx = |b: usize| 2 * b - 1; // codebook index of X2_b
    let yh_idx = |b: usize| 2 * b; // codebook index of Yh_b
    for b in 1..=blocks {
        if b >= 2 {
            codebooks.push(Codebook {
                label: format!("Yh{}", b - 1),
                factors: vec![blk("Yh", b - 1)],
                gamma: bset(&[b - 1, b]),
                superpose: bset(&[x2_idx(b - 1)]),
            });
        }
        codebooks.push(Codebook {
            label: format!("X2_{b}"),
            factors: vec![blk("X2", b)],
            gamma: bset(&[b]),
            superpose: BTreeSet::new(),
        });
    }
    debug_assert!(codebooks
        .iter()
        .enumerate()
        .skip(1)
        .step_by(2)
        .all(|(i, c)| c.label == format!("X2_{}", (i + 1) / 2)));

    let mut nodes = vec![NodeCoding::default(); (blocks + 1) * n];
    let pos = |k: usize, b: usize| (b - 1) * n + (k - 1);

    // node (1,1): cover U0 by generating all source transmissions i.i.d.
    let src_outputs: Vec<Factor> = (1..=blocks)
        .map(|b| Factor::concrete(&blk("X1", b), 2))
        .collect();
    let p = 0.5_f64.powi(blocks as i32);
    nodes[pos(1, 1)] = NodeCoding {
        compress: bset(&[0]),
        kernel: Some(CondTable::from_fn(vec![], src_outputs, |_, _| p)?),
        ..NodeCoding::default()
    };
    // nodes (1,b), b in [2:B]: re-decode the own codebook (trivially
    // satisfied; the message is part of the node's observation)
    for b in 2..=blocks {
        nodes[pos(1, b)] = NodeCoding {
            decode_unique: bset(&[0]),
            ..NodeCoding::default()
        };
    }
    // node (2,1): cover the first relay transmit codebook
    nodes[pos(2, 1)] = NodeCoding {
        compress: bset(&[x2_idx(1)]),
        kernel: Some(CondTable::new(
            vec![],
            vec![Factor::concrete(&blk("X2", 1), 2)],
            vec![0.5, 0.5],
        )?),
        ..NodeCoding::default()
    };
    // nodes (2,b), b in [2:B]: decode the own history, quantize the previous
    // observation, and cover the fresh transmit codebook
    for b in 2..=blocks {
        let decode: BTreeSet<usize> = (1..b)
            .map(x2_idx)
            .chain((1..b - 1).map(yh_idx))
            .collect();
        let kernel = CondTable::from_fn(
            vec![(blk("Y2", b - 1), 2)],
            vec![
                Factor::concrete(&blk("Yh", b - 1), 3),
                Factor::concrete(&blk("X2", b), 2),
            ],
            |g, o| quantizer(g[0], o[0]) * 0.5,
        )?;
        nodes[pos(2, b)] = NodeCoding {
            decode_unique: decode,
            compress: bset(&[yh_idx(b - 1), x2_idx(b)]),
            kernel: Some(kernel),
            ..NodeCoding::default()
        };
    }
    // destination at block B+1: uniquely decode the message codebook,
    // nonuniquely decode the relay codebooks of blocks 1..B-1
    let nonunique: BTreeSet<usize> = (1..blocks)
        .flat_map(|b| [x2_idx(b), yh_idx(b)])
        .collect();
    nodes[pos(3, blocks + 1)] = NodeCoding {
        decode_unique: bset(&[0]),
        decode_nonunique: nonunique,
        ..NodeCoding::default()
    };

    let omega = CodingParams {
        mu,
        rate_vars,
        codebooks,
        nodes,
    };
    Ok((admn, omega))
}

/// Eliminated end-to-end bound on the message rate, normalized per block of
/// channel use. Each added block contributes the single-block
/// compress-forward value, so the per-block bound climbs toward it from
/// below as the fixed initialization overhead is amortized.
pub fn nnc_rate_bound(instance: &CodingInstance) -> Result<f64> {
    let blocks = instance.admn.node_count() / 3 - 1;
    let generated = generate_system(
        &instance.omega,
        &instance.admn,
        Mode::Theorem1,
        DEFAULT_SUBSET_CAP,
    )?;
    let region = fourier_motzkin(&generated.system, &instance.eliminate)?;
    if region.infeasible {
        return Err(Error::Structure("eliminated region is infeasible".into()));
    }
    let mut best = f64::INFINITY;
    for ineq in &region.system.inequalities {
        let (lhs, rhs) = ineq.as_less();
        if !rhs.coeffs.is_empty() || lhs.len() != 1 {
            continue;
        }
        let Some(c) = lhs.get("R") else { continue };
        let c = crate::expr::rational_to_f64(*c);
        if c > 0.0 {
            best = best.min(rhs.constant / c);
        }
    }
    if !best.is_finite() {
        return Err(Error::Structure(
            "no upper bound on the message rate survived elimination".into(),
        ));
    }
    Ok(best / blocks as f64)
}

/// Closed-form compress-forward rate of the single-block network, by plain
/// loops: min over relay subsets of the flow term minus the compression
/// penalty, evaluated on the same pmf and quantizer.
pub fn nnc_closed_form() -> f64 {
    // joint over (x1, x2, y3, yh) with y2 = x1 folded in
    let mut joint = vec![0.0; 2 * 2 * 2 * 3];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for y3 in 0..2 {
                for yh in 0..3 {
                    joint[((x1 * 2 + x2) * 2 + y3) * 3 + yh] =
                        0.25 * dest_channel(x1, x2, y3) * quantizer(x1, yh);
                }
            }
        }
    }
    let marg = |keep: &dyn Fn(usize, usize, usize, usize) -> usize, size: usize| -> Vec<f64> {
        let mut m = vec![0.0; size];
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y3 in 0..2 {
                    for yh in 0..3 {
                        m[keep(x1, x2, y3, yh)] += joint[((x1 * 2 + x2) * 2 + y3) * 3 + yh];
                    }
                }
            }
        }
        m
    };
    let h = |f: &dyn Fn(usize, usize, usize, usize) -> usize, size: usize| entropy_of(&marg(f, size));
    // relay not used directly: I(X1; Yh, Y3 | X2) as H(X1,X2) + H(X2,Y3,Yh)
    // - H(X2) - H(X1,X2,Y3,Yh)
    let c_empty = h(&|x1, x2, _, _| x1 * 2 + x2, 4) + h(&|_, x2, y3, yh| (x2 * 2 + y3) * 3 + yh, 12)
        - h(&|_, x2, _, _| x2, 2)
        - h(&|x1, x2, y3, yh| ((x1 * 2 + x2) * 2 + y3) * 3 + yh, 24);
    // relay decoded: I(X1, X2; Y3) - I(Y2; Yh | X1, X2, Y3); the second term
    // vanishes because y2 = x1 exactly
    let c_full = h(&|x1, x2, _, _| x1 * 2 + x2, 4) + h(&|_, _, y3, _| y3, 2)
        - h(&|x1, x2, y3, _| (x1 * 2 + x2) * 2 + y3, 8);
    c_empty.min(c_full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{check_target_match, validate_params};

    #[test]
    fn unfolded_instance_is_valid() {
        let (admn, omega) = nnc_instance(2).unwrap();
        let mut report = admn.validate();
        report.extend(validate_params(&omega, &admn));
        assert!(report.is_empty(), "{report:?}");
        let dev = check_target_match(&omega, &admn).unwrap();
        assert!(dev <= 1e-9, "target deviation {dev:.3e}");
    }

    #[test]
    fn bound_positive_and_below_closed_form() {
        let (admn, omega) = nnc_instance(2).unwrap();
        let instance = CodingInstance {
            eliminate: omega.rate_vars.clone(),
            external: vec!["R".to_string()],
            mode: Mode::Theorem1,
            admn,
            omega,
        };
        let bound = nnc_rate_bound(&instance).unwrap();
        let closed = nnc_closed_form();
        assert!(bound > 0.0, "bound {bound}");
        assert!(bound <= closed + 1e-9, "bound {bound} exceeds {closed}");
    }
}
