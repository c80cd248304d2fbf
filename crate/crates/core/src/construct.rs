//! The three families of automorphisms of `G wr Z^k` with finite
//! Reidemeister number, and the predicate deciding which family applies.
//!
//! | case | hypothesis                                  | `M`             | fibers                                 | `R`     |
//! |------|---------------------------------------------|-----------------|----------------------------------------|---------|
//! | 1    | every 2- and 3-primary component has `d>=2` | `-E`            | `F_2`/`F_3` blocks, scalar `m` for p>3 | `2^k`   |
//! | 2    | no 2-primary component, `k = 2t`            | `t` copies of an order-3 rotation | scalar `m` with `m^3`, `1-m^3` units | `3^t` |
//! | 3    | every 2-primary component has `d>=2`, `k=4s`| `s` copies of the order-5 companion | `p-1` for odd p, `F_2`/`F_3` for p=2 | `5^s` |

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{cokernel_order, companion_cyclotomic_5, direct_sum, rotation_order_3};
use crate::scalar::{Extended, IntScalar};
use crate::wreath::{WreathAutomorphism, MAX_RANK};
use crate::zqmod::{
    choose_m, f2_block, f3_block, Component, FiniteAbelianGroup, GAutomorphism, ModMatrix,
};
use crate::{IntMatrix, ZkVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Case {
    Case1,
    Case2,
    Case3,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Case1, Case::Case2, Case::Case3];

    pub fn number(self) -> u8 {
        match self {
            Case::Case1 => 1,
            Case::Case2 => 2,
            Case::Case3 => 3,
        }
    }
}

impl From<Case> for u8 {
    fn from(c: Case) -> u8 {
        c.number()
    }
}

impl TryFrom<u8> for Case {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Case::Case1),
            2 => Ok(Case::Case2),
            3 => Ok(Case::Case3),
            _ => Err(format!("case must be 1, 2 or 3, got {v}")),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReason {
    pub case: Case,
    pub applicable: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub group: String,
    pub k: usize,
    pub applicable: Vec<Case>,
    pub reasons: Vec<CaseReason>,
}

impl CaseReport {
    pub fn is_applicable(&self, case: Case) -> bool {
        self.applicable.contains(&case)
    }

    /// Lowest-numbered applicable case.
    pub fn default_case(&self) -> Option<Case> {
        self.applicable.first().copied()
    }
}

/// First 2- or 3-primary component (or 2-primary, for case 3) with `d < 2`.
fn short_component(group: &FiniteAbelianGroup, primes: &[u64]) -> Option<Component> {
    group
        .components()
        .iter()
        .copied()
        .find(|c| primes.contains(&c.p) && c.d < 2)
}

fn hypothesis(
    group: &FiniteAbelianGroup,
    k: usize,
    case: Case,
) -> std::result::Result<String, String> {
    match case {
        Case::Case1 => match short_component(group, &[2, 3]) {
            Some(c) => Err(format!(
                "component {c} has p in {{2,3}} with multiplicity {} < 2",
                c.d
            )),
            None => Ok("every component with p = 2 or p = 3 has multiplicity >= 2".into()),
        },
        Case::Case2 => {
            if let Some(c) = group.components().iter().find(|c| c.p == 2) {
                Err(format!("component {c} has p = 2"))
            } else if !k.is_multiple_of(2) {
                Err(format!("k = {k} is odd"))
            } else {
                Ok(format!("no component with p = 2 and k = {k} is even"))
            }
        }
        Case::Case3 => {
            if let Some(c) = short_component(group, &[2]) {
                Err(format!(
                    "component {c} has p = 2 with multiplicity {} < 2",
                    c.d
                ))
            } else if !k.is_multiple_of(4) {
                Err(format!("k = {k} is not a multiple of 4"))
            } else {
                Ok(format!(
                    "every component with p = 2 has multiplicity >= 2 and k = 4*{}",
                    k / 4
                ))
            }
        }
    }
}

pub fn classify(group: &FiniteAbelianGroup, k: usize) -> CaseReport {
    let mut applicable = Vec::new();
    let mut reasons = Vec::new();
    for case in Case::ALL {
        let (ok, reason) = match hypothesis(group, k, case) {
            Ok(r) => (true, r),
            Err(r) => (false, r),
        };
        if ok {
            applicable.push(case);
        }
        reasons.push(CaseReason {
            case,
            applicable: ok,
            reason,
        });
    }
    CaseReport {
        group: group.to_string(),
        k,
        applicable,
        reasons,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    F2,
    F3,
    Scalar(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLayout {
    pub component: String,
    pub blocks: Vec<BlockKind>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub group: FiniteAbelianGroup,
    pub case: Case,
    pub automorphism: WreathAutomorphism,
    pub predicted_r: Extended<u64>,
    pub block_layout: Vec<ComponentLayout>,
}

impl Construction {
    pub fn k(&self) -> usize {
        self.automorphism.k()
    }
}

/// Pairs of `F_2`, ending in one `F_3` when `d` is odd.
fn pair_blocks(d: usize) -> Vec<BlockKind> {
    debug_assert!(d >= 2);
    let mut out = vec![BlockKind::F2; d / 2];
    if d % 2 == 1 {
        out.pop();
        out.push(BlockKind::F3);
    }
    out
}

fn assemble(c: &Component, kinds: &[BlockKind]) -> Result<ModMatrix> {
    let mats: Vec<ModMatrix> = kinds
        .iter()
        .map(|kind| match *kind {
            BlockKind::F2 => f2_block(c.p, c.r),
            BlockKind::F3 => f3_block(c.p, c.r),
            BlockKind::Scalar(m) => ModMatrix::scalar(c.p, c.r, 1, m as i64),
        })
        .collect();
    ModMatrix::block_diag(&mats)
}

fn check_rank(k: usize) -> Result<()> {
    if (1..=MAX_RANK).contains(&k) {
        Ok(())
    } else {
        Err(Error::RankOutOfRange(k))
    }
}

fn finish(
    group: &FiniteAbelianGroup,
    case: Case,
    m: IntMatrix,
    layout: Vec<(Component, Vec<BlockKind>)>,
    expected_r: u64,
) -> Result<Construction> {
    let blocks = layout
        .iter()
        .map(|(c, kinds)| assemble(c, kinds))
        .collect::<Result<Vec<_>>>()?;
    let f = GAutomorphism::from_blocks(group, blocks)?;
    let automorphism = WreathAutomorphism::new(f, m)?;
    let predicted_r = reidemeister_of_matrix(automorphism.m())?;
    if predicted_r != Extended::Finite(expected_r) {
        return Err(Error::Internal(format!(
            "{case}: |coker(E - M)| = {predicted_r}, expected {expected_r}"
        )));
    }
    Ok(Construction {
        group: group.clone(),
        case,
        automorphism,
        predicted_r,
        block_layout: layout
            .into_iter()
            .map(|(c, blocks)| ComponentLayout {
                component: c.to_string(),
                blocks,
            })
            .collect(),
    })
}

/// `|coker(E - M)|`, with big-integer elimination.
pub fn reidemeister_of_matrix(m: &IntMatrix) -> Result<Extended<u64>> {
    let big = m.identity_minus()?.convert::<BigInt>()?;
    match cokernel_order(&big)? {
        Extended::Finite(v) => Ok(Extended::Finite(v.convert::<i64>()? as u64)),
        Extended::Infinite => Ok(Extended::Infinite),
    }
}

fn require(group: &FiniteAbelianGroup, k: usize, case: Case) -> Result<()> {
    check_rank(k)?;
    hypothesis(group, k, case)
        .map(|_| ())
        .map_err(|reason| Error::Hypothesis {
            case: case.number(),
            reason,
        })
}

pub fn build_case1(group: &FiniteAbelianGroup, k: usize) -> Result<Construction> {
    require(group, k, Case::Case1)?;
    let layout = group
        .components()
        .iter()
        .map(|c| {
            let kinds = if c.p <= 3 {
                pair_blocks(c.d)
            } else {
                let m = choose_m(c.p, c.r, 2)
                    .ok_or_else(|| Error::Internal(format!("no m for {c}")))?;
                vec![BlockKind::Scalar(m % c.modulus()); c.d]
            };
            Ok((*c, kinds))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(
        group,
        Case::Case1,
        IntMatrix::scalar(k, -1),
        layout,
        1u64 << k,
    )
}

pub fn build_case2(group: &FiniteAbelianGroup, k: usize) -> Result<Construction> {
    require(group, k, Case::Case2)?;
    let t = k / 2;
    let m = direct_sum(&vec![rotation_order_3::<i64>(); t])?;
    let layout = group
        .components()
        .iter()
        .map(|c| {
            let m =
                choose_m(c.p, c.r, 3).ok_or_else(|| Error::Internal(format!("no m for {c}")))?;
            Ok((*c, vec![BlockKind::Scalar(m % c.modulus()); c.d]))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(group, Case::Case2, m, layout, 3u64.pow(t as u32))
}

pub fn build_case3(group: &FiniteAbelianGroup, k: usize) -> Result<Construction> {
    require(group, k, Case::Case3)?;
    let s = k / 4;
    let m = direct_sum(&vec![companion_cyclotomic_5::<i64>(); s])?;
    let layout = group
        .components()
        .iter()
        .map(|c| {
            let kinds = if c.p == 2 {
                pair_blocks(c.d)
            } else {
                vec![BlockKind::Scalar(c.p - 1); c.d]
            };
            (*c, kinds)
        })
        .collect();
    finish(group, Case::Case3, m, layout, 5u64.pow(s as u32))
}

pub fn build(group: &FiniteAbelianGroup, k: usize, case: Case) -> Result<Construction> {
    match case {
        Case::Case1 => build_case1(group, k),
        Case::Case2 => build_case2(group, k),
        Case::Case3 => build_case3(group, k),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FBlockJson {
    pub component: String,
    pub modulus: u64,
    pub matrix: Vec<Vec<u64>>,
}

/// Serialized form of a [`Construction`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionJson {
    pub group: String,
    pub k: usize,
    pub case: Case,
    pub m: Vec<Vec<i64>>,
    pub twist: Vec<i64>,
    pub f_blocks: Vec<FBlockJson>,
    pub predicted_r: Extended<u64>,
    pub block_layout: Vec<ComponentLayout>,
}

impl From<&Construction> for ConstructionJson {
    fn from(c: &Construction) -> Self {
        let phi = &c.automorphism;
        ConstructionJson {
            group: c.group.to_string(),
            k: c.k(),
            case: c.case,
            m: phi.m().rows(),
            twist: phi.twist().0.clone(),
            f_blocks: c
                .group
                .components()
                .iter()
                .zip(phi.f().blocks())
                .map(|(comp, b)| FBlockJson {
                    component: comp.to_string(),
                    modulus: b.modulus(),
                    matrix: b.rows(),
                })
                .collect(),
            predicted_r: c.predicted_r.clone(),
            block_layout: c.block_layout.clone(),
        }
    }
}

impl TryFrom<ConstructionJson> for Construction {
    type Error = Error;

    /// Validates: the group spec parses, `M` is `k x k` and unimodular, the
    /// fiber blocks match the components and are invertible, and
    /// `predicted_r` agrees with `|coker(E - M)|`.
    fn try_from(j: ConstructionJson) -> Result<Self> {
        let group: FiniteAbelianGroup = j.group.parse()?;
        check_rank(j.k)?;
        let m = IntMatrix::from_rows(j.m)?;
        if m.dim() != j.k {
            return Err(Error::DimensionMismatch {
                expected: j.k,
                found: m.dim(),
            });
        }
        if j.f_blocks.len() != group.components().len() {
            return Err(Error::GroupMismatch);
        }
        let blocks = group
            .components()
            .iter()
            .zip(&j.f_blocks)
            .map(|(c, b)| {
                if b.modulus != c.modulus() || b.component != c.to_string() {
                    return Err(Error::GroupMismatch);
                }
                let rows: Vec<Vec<i64>> = b
                    .matrix
                    .iter()
                    .map(|r| r.iter().map(|&v| v as i64).collect())
                    .collect();
                ModMatrix::from_rows(c.p, c.r, &rows)
            })
            .collect::<Result<Vec<_>>>()?;
        let f = GAutomorphism::from_blocks(&group, blocks)?;
        let automorphism =
            WreathAutomorphism::new(f, m)?.with_twist(ZkVector::from_i64s(&j.twist)?)?;
        let r = reidemeister_of_matrix(automorphism.m())?;
        if r != j.predicted_r {
            return Err(Error::Internal(format!(
                "predicted_r = {} disagrees with |coker(E - M)| = {r}",
                j.predicted_r
            )));
        }
        Ok(Construction {
            group,
            case: j.case,
            automorphism,
            predicted_r: r,
            block_layout: j.block_layout,
        })
    }
}

impl Serialize for Construction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstructionJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Construction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ConstructionJson::deserialize(d)?;
        Construction::try_from(j).map_err(serde::de::Error::custom)
    }
}
