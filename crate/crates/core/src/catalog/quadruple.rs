//! The four-problem dual collection built around the two-sender adder
//! network: the original multiple-access problem, its role-swapped dual
//! (distributed source coding), its order-reversed dual (two-description
//! source coding), and the composition (two-receiver broadcast with a
//! split message and a correlated auxiliary pair).
//!
//! All four share the same codebook skeleton: two codebooks, no
//! superposition, internal rates r1 and r2.

use super::{bset, ids};
use crate::coding::{Codebook, CodingParams, MapTable, NodeCoding};
use crate::dist::{CondTable, Factor, FactoredJoint};
use crate::duality::DualFamily;
use crate::error::Result;
use crate::network::{Admn, AdmnNode};
use std::collections::BTreeSet;

// pinned pmf parameters
const DS_CORR: f64 = 0.9; // P(S2 = S1)
const DS_V_FLIP: f64 = 0.25; // auxiliary observation noise, both branches
const MD_X1_FLIP: f64 = 0.2; // description-1 reconstruction noise
const MD_X2_FLIP: f64 = 0.3; // description-2 reconstruction noise
const BC_V_AGREE: f64 = 0.8; // P(V1 = V2) in the correlated pair
const BC_CH2_FLIP: f64 = 0.1; // channel noise toward receiver of message 2
const BC_CH3_FLIP: f64 = 0.15; // channel noise toward receiver of message 1

fn skeleton_codebooks(u1: &[&str], u2: &[&str]) -> Vec<Codebook> {
    vec![
        Codebook {
            label: "U1".to_string(),
            factors: ids(u1),
            gamma: bset(&[0]),
            superpose: BTreeSet::new(),
        },
        Codebook {
            label: "U2".to_string(),
            factors: ids(u2),
            gamma: bset(&[1]),
            superpose: BTreeSet::new(),
        },
    ]
}

fn bsc(given: &str, output: &str, flip: f64) -> CondTable {
    CondTable::from_fn(
        vec![(given.to_string(), 2)],
        vec![Factor::concrete(output, 2)],
        |g, o| if o[0] == g[0] { 1.0 - flip } else { flip },
    )
    .unwrap()
}

/// The original problem: two independent senders, noiseless binary adder.
fn multiple_access() -> Result<DualFamily> {
    let instance = super::mac_binary_adder()?;
    Ok(DualFamily {
        label: "multiple-access".to_string(),
        admn: instance.admn,
        omega: instance.omega,
    })
}

/// Role-swapped dual: two correlated sources, separately encoded over
/// rate-limited descriptions C1, C2 to a joint decoder.
fn distributed_source() -> Result<DualFamily> {
    let s1 = CondTable::new(vec![], vec![Factor::concrete("S1", 2)], vec![0.5, 0.5])?;
    let s2 = bsc("S1", "S2", 1.0 - DS_CORR);
    // target over (C1, C2, S1, S2)
    let mut table = vec![0.0; 4];
    for a in 0..2usize {
        for b in 0..2usize {
            table[a * 2 + b] = 0.5 * if a == b { DS_CORR } else { 1.0 - DS_CORR };
        }
    }
    let target = FactoredJoint::new(
        vec![Factor::concrete("S1", 2), Factor::concrete("S2", 2)],
        vec![Factor::symbolic("C1", "R1"), Factor::symbolic("C2", "R2")],
        table,
    )?;
    let admn = Admn {
        nodes: vec![
            AdmnNode {
                index: 1,
                new_symbolic: vec![],
                kernel: Some(s1),
                y_factors: ids(&["S1"]),
                x_decls: vec![Factor::symbolic("C1", "R1")],
                x_factors: ids(&["C1"]),
            },
            AdmnNode {
                index: 2,
                new_symbolic: vec![],
                kernel: Some(s2),
                y_factors: ids(&["S2"]),
                x_decls: vec![Factor::symbolic("C2", "R2")],
                x_factors: ids(&["C2"]),
            },
            AdmnNode {
                index: 3,
                new_symbolic: vec![],
                kernel: None,
                y_factors: ids(&["C1", "C2"]),
                x_decls: vec![],
                x_factors: vec![],
            },
        ],
        target,
    };
    let omega = CodingParams {
        mu: 2,
        rate_vars: ids(&["r1", "r2"]),
        codebooks: skeleton_codebooks(&["V1", "C1"], &["V2", "C2"]),
        nodes: vec![
            NodeCoding {
                compress: bset(&[0]),
                kernel: Some(bsc("S1", "V1", DS_V_FLIP)),
                ..NodeCoding::default()
            },
            NodeCoding {
                compress: bset(&[1]),
                kernel: Some(bsc("S2", "V2", DS_V_FLIP)),
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: bset(&[0, 1]),
                ..NodeCoding::default()
            },
        ],
    };
    Ok(DualFamily {
        label: "distributed-source".to_string(),
        admn,
        omega,
    })
}

/// Order-reversed dual: one source encoded into two rate-limited
/// descriptions, each read by its own decoder.
fn two_descriptions() -> Result<DualFamily> {
    let source = CondTable::new(vec![], vec![Factor::concrete("Ys", 2)], vec![0.5, 0.5])?;
    let cover = CondTable::from_fn(
        vec![("Ys".to_string(), 2)],
        vec![Factor::concrete("X1d", 2), Factor::concrete("X2d", 2)],
        |g, o| {
            let p1 = if o[0] == g[0] { 1.0 - MD_X1_FLIP } else { MD_X1_FLIP };
            let p2 = if o[1] == g[0] { 1.0 - MD_X2_FLIP } else { MD_X2_FLIP };
            p1 * p2
        },
    )?;
    let target = FactoredJoint::new(
        vec![Factor::concrete("Ys", 2)],
        vec![Factor::symbolic("C1", "R1"), Factor::symbolic("C2", "R2")],
        vec![0.5, 0.5],
    )?;
    let admn = Admn {
        nodes: vec![
            AdmnNode {
                index: 1,
                new_symbolic: vec![],
                kernel: Some(source),
                y_factors: ids(&["Ys"]),
                x_decls: vec![
                    Factor::symbolic("C1", "R1"),
                    Factor::symbolic("C2", "R2"),
                ],
                x_factors: ids(&["C1", "C2"]),
            },
            AdmnNode {
                index: 2,
                new_symbolic: vec![],
                kernel: None,
                y_factors: ids(&["C2"]),
                x_decls: vec![],
                x_factors: vec![],
            },
            AdmnNode {
                index: 3,
                new_symbolic: vec![],
                kernel: None,
                y_factors: ids(&["C1"]),
                x_decls: vec![],
                x_factors: vec![],
            },
        ],
        target,
    };
    let omega = CodingParams {
        mu: 2,
        rate_vars: ids(&["r1", "r2"]),
        codebooks: skeleton_codebooks(&["X1d", "C1"], &["X2d", "C2"]),
        nodes: vec![
            NodeCoding {
                compress: bset(&[0, 1]),
                kernel: Some(cover),
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: bset(&[1]),
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: bset(&[0]),
                ..NodeCoding::default()
            },
        ],
    };
    Ok(DualFamily {
        label: "two-descriptions".to_string(),
        admn,
        omega,
    })
}

/// Composition of both transforms: a broadcast encoder observing two
/// independent messages covers a correlated auxiliary pair and transmits
/// their juxtaposition; each receiver decodes its own layer.
fn split_broadcast() -> Result<DualFamily> {
    let cover = CondTable::from_fn(
        vec![],
        vec![Factor::concrete("V1", 2), Factor::concrete("V2", 2)],
        |_, o| 0.5 * if o[0] == o[1] { BC_V_AGREE } else { 1.0 - BC_V_AGREE },
    )?;
    // receiver channels extract one component of the 4-ary input
    let ch2 = CondTable::from_fn(
        vec![("Xb".to_string(), 4)],
        vec![Factor::concrete("Yb2", 2)],
        |g, o| {
            let v2 = g[0] % 2;
            if o[0] == v2 {
                1.0 - BC_CH2_FLIP
            } else {
                BC_CH2_FLIP
            }
        },
    )?;
    let ch3 = CondTable::from_fn(
        vec![("Xb".to_string(), 4)],
        vec![Factor::concrete("Yb3", 2)],
        |g, o| {
            let v1 = g[0] / 2;
            if o[0] == v1 {
                1.0 - BC_CH3_FLIP
            } else {
                BC_CH3_FLIP
            }
        },
    )?;
    // target over (M1, M2, Xb, Yb2, Yb3), the auxiliary pair marginalized
    let mut table = vec![0.0; 4 * 2 * 2];
    for v1 in 0..2usize {
        for v2 in 0..2usize {
            let pv = 0.5 * if v1 == v2 { BC_V_AGREE } else { 1.0 - BC_V_AGREE };
            let xb = v1 * 2 + v2;
            for y2 in 0..2usize {
                let p2 = if y2 == v2 { 1.0 - BC_CH2_FLIP } else { BC_CH2_FLIP };
                for y3 in 0..2usize {
                    let p3 = if y3 == v1 { 1.0 - BC_CH3_FLIP } else { BC_CH3_FLIP };
                    table[(xb * 2 + y2) * 2 + y3] += pv * p2 * p3;
                }
            }
        }
    }
    let target = FactoredJoint::new(
        vec![
            Factor::concrete("Xb", 4),
            Factor::concrete("Yb2", 2),
            Factor::concrete("Yb3", 2),
        ],
        vec![Factor::symbolic("M1", "R1"), Factor::symbolic("M2", "R2")],
        table,
    )?;
    let admn = Admn {
        nodes: vec![
            AdmnNode {
                index: 1,
                new_symbolic: vec![
                    Factor::symbolic("M1", "R1"),
                    Factor::symbolic("M2", "R2"),
                ],
                kernel: None,
                y_factors: ids(&["M1", "M2"]),
                x_decls: vec![Factor::concrete("Xb", 4)],
                x_factors: ids(&["Xb"]),
            },
            AdmnNode {
                index: 2,
                new_symbolic: vec![],
                kernel: Some(ch2),
                y_factors: ids(&["Yb2"]),
                x_decls: vec![],
                x_factors: ids(&["M2"]),
            },
            AdmnNode {
                index: 3,
                new_symbolic: vec![],
                kernel: Some(ch3),
                y_factors: ids(&["Yb3"]),
                x_decls: vec![],
                x_factors: ids(&["M1"]),
            },
        ],
        target,
    };
    let omega = CodingParams {
        mu: 2,
        rate_vars: ids(&["r1", "r2"]),
        codebooks: skeleton_codebooks(&["M1", "V1"], &["M2", "V2"]),
        nodes: vec![
            NodeCoding {
                compress: bset(&[0, 1]),
                kernel: Some(cover),
                maps: vec![MapTable {
                    output: "Xb".to_string(),
                    inputs: ids(&["V1", "V2"]),
                    values: vec![0, 1, 2, 3],
                }],
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: bset(&[1]),
                ..NodeCoding::default()
            },
            NodeCoding {
                decode_unique: bset(&[0]),
                ..NodeCoding::default()
            },
        ],
    };
    Ok(DualFamily {
        label: "split-broadcast".to_string(),
        admn,
        omega,
    })
}

/// The collection in fixed order: original, role-swapped, order-reversed,
/// both.
pub fn families() -> Result<Vec<DualFamily>> {
    Ok(vec![
        multiple_access()?,
        distributed_source()?,
        two_descriptions()?,
        split_broadcast()?,
    ])
}
