//! The three evidence-manipulation threat models.
//!
//! All attacks rewrite only what the attacker (or his pseudonyms) controls:
//! his own column of A and, for Sybil attacks, the appended sibling columns.
//! α and s belong to the central authority and stay untouched.
//!
//! Tie handling at the neutral 0.5 follows the threat-model statements
//! literally: self-promotion only acts on strict `> 0.5` / `< 0.5` opinions
//! and leaves ties unchanged, while slandering and Sybil columns map ties
//! to 0 through their explicit "otherwise" branch.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;
use crate::solver::StartVector;

/// Attack parameterization as used by the CLI and the experiment runner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// 0-based attacker index.
    pub attacker: usize,
    /// 0-based target index; required for slandering and Sybil attacks.
    pub target: Option<usize>,
    /// Sibling ratio m (Sybil only): ⌊n·m⌋ accounts are appended.
    pub sybil_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    SelfPromotion,
    Slandering,
    Sybil,
}

impl AttackSpec {
    fn validate(&self, n: usize) -> Result<()> {
        if self.attacker >= n {
            return Err(Error::InvalidInstance(format!(
                "attacker {} outside 0..{n}",
                self.attacker
            )));
        }
        if let Some(target) = self.target {
            if target >= n {
                return Err(Error::InvalidInstance(format!(
                    "target {target} outside 0..{n}"
                )));
            }
            if target == self.attacker {
                return Err(Error::InvalidInstance(
                    "attacker and target must differ".into(),
                ));
            }
        }
        match self.kind {
            AttackKind::SelfPromotion => Ok(()),
            AttackKind::Slandering | AttackKind::Sybil => {
                if self.target.is_none() {
                    return Err(Error::InvalidInstance(format!(
                        "{:?} attack requires a target",
                        self.kind
                    )));
                }
                if self.kind == AttackKind::Sybil && !(self.sybil_ratio >= 0.0) {
                    return Err(Error::InvalidInstance(format!(
                        "sybil ratio {} must be ≥ 0",
                        self.sybil_ratio
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Applies any attack, returning the (possibly enlarged) instance.
pub fn apply(
    a: &EvidenceMatrix,
    s: &StartVector,
    spec: &AttackSpec,
) -> Result<(EvidenceMatrix, StartVector)> {
    spec.validate(a.n())?;
    match spec.kind {
        AttackKind::SelfPromotion => Ok((
            apply_self_promotion(a, spec.attacker)?,
            s.clone(),
        )),
        AttackKind::Slandering => Ok((
            apply_slandering(a, spec.attacker, spec.target.unwrap())?,
            s.clone(),
        )),
        AttackKind::Sybil => apply_sybil(
            a,
            s,
            spec.attacker,
            spec.target.unwrap(),
            spec.sybil_ratio,
        ),
    }
}

/// Self-promotion by attacker y: for every other user x, `A_xy` becomes 1
/// when `A_yx > 0.5` and 0 when `A_yx < 0.5`; opinions exactly at the
/// neutral 0.5 are left alone.
pub fn apply_self_promotion(a: &EvidenceMatrix, attacker: usize) -> Result<EvidenceMatrix> {
    let n = a.n();
    if attacker >= n {
        return Err(Error::InvalidInstance(format!(
            "attacker {attacker} outside 0..{n}"
        )));
    }
    let mut entries = a.matrix().clone();
    for x in 0..n {
        if x == attacker {
            continue;
        }
        let their_opinion = a.get(attacker, x);
        if their_opinion > 0.5 {
            entries[(x, attacker)] = 1.0;
        } else if their_opinion < 0.5 {
            entries[(x, attacker)] = 0.0;
        }
    }
    EvidenceMatrix::from_matrix_with_diagonal(entries)
}

/// Slandering of target x by attacker y: the direct hit `A_xy = 0` plus the
/// indirect column rewrite `A_zy = 1 if A_xz < 0.5 else 0` for z ∉ {x, y}.
pub fn apply_slandering(
    a: &EvidenceMatrix,
    attacker: usize,
    target: usize,
) -> Result<EvidenceMatrix> {
    let mut entries = slandering_direct_entries(a, attacker, target)?;
    for z in 0..a.n() {
        if z == target || z == attacker {
            continue;
        }
        entries[(z, attacker)] = if a.get(target, z) < 0.5 { 1.0 } else { 0.0 };
    }
    EvidenceMatrix::from_matrix_with_diagonal(entries)
}

/// Only the direct component of the slandering attack (`A_xy = 0`), for the
/// direct/indirect decomposition study.
pub fn apply_slandering_direct(
    a: &EvidenceMatrix,
    attacker: usize,
    target: usize,
) -> Result<EvidenceMatrix> {
    EvidenceMatrix::from_matrix_with_diagonal(slandering_direct_entries(a, attacker, target)?)
}

/// Only the indirect component: the third-party column rewrite without
/// touching `A_xy`.
pub fn apply_slandering_indirect(
    a: &EvidenceMatrix,
    attacker: usize,
    target: usize,
) -> Result<EvidenceMatrix> {
    check_pair(a.n(), attacker, target)?;
    let mut entries = a.matrix().clone();
    for z in 0..a.n() {
        if z == target || z == attacker {
            continue;
        }
        entries[(z, attacker)] = if a.get(target, z) < 0.5 { 1.0 } else { 0.0 };
    }
    EvidenceMatrix::from_matrix_with_diagonal(entries)
}

fn slandering_direct_entries(
    a: &EvidenceMatrix,
    attacker: usize,
    target: usize,
) -> Result<DMatrix<f64>> {
    check_pair(a.n(), attacker, target)?;
    let mut entries = a.matrix().clone();
    entries[(target, attacker)] = 0.0;
    Ok(entries)
}

fn check_pair(n: usize, attacker: usize, target: usize) -> Result<()> {
    if attacker >= n || target >= n {
        return Err(Error::InvalidInstance(format!(
            "attacker {attacker} / target {target} outside 0..{n}"
        )));
    }
    if attacker == target {
        return Err(Error::InvalidInstance(
            "attacker and target must differ".into(),
        ));
    }
    Ok(())
}

/// Sybil attack: appends `⌊n·m⌋` sibling accounts that slander target x and
/// promote each other and the attacker y.
///
/// Sibling columns (their ratings): `A_xσ = 0`, `A_yσ = 1`, `A_σ'σ = 1`,
/// and `A_zσ = 1 if A_xz < 0.5 else 0` for honest z. Sibling rows (how the
/// originals see them) stay at the neutral 0.5 — nobody interacted with a
/// fresh pseudonym — and the new diagonal is 0. The start vector gains a 0
/// per sibling: pseudonyms are never pre-trusted.
pub fn apply_sybil(
    a: &EvidenceMatrix,
    s: &StartVector,
    attacker: usize,
    target: usize,
    m: f64,
) -> Result<(EvidenceMatrix, StartVector)> {
    let n = a.n();
    check_pair(n, attacker, target)?;
    if s.len() != n {
        return Err(Error::InvalidInstance(format!(
            "start vector length {} does not match n = {n}",
            s.len()
        )));
    }
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::InvalidInstance(format!(
            "sibling ratio {m} must be ≥ 0"
        )));
    }
    let siblings = (n as f64 * m).floor() as usize;
    if siblings == 0 {
        return Ok((a.clone(), s.clone()));
    }
    let total = n + siblings;
    let mut entries = DMatrix::from_element(total, total, 0.0);
    entries.view_mut((0, 0), (n, n)).copy_from(a.matrix());
    for sib in n..total {
        // column sib: the sibling's ratings of everyone
        entries[(target, sib)] = 0.0;
        entries[(attacker, sib)] = 1.0;
        for z in 0..n {
            if z == target || z == attacker {
                continue;
            }
            entries[(z, sib)] = if a.get(target, z) < 0.5 { 1.0 } else { 0.0 };
        }
        for other in n..total {
            if other != sib {
                entries[(other, sib)] = 1.0;
            }
        }
        // row sib: everyone's neutral view of the new account
        for z in 0..n {
            entries[(sib, z)] = 0.5;
        }
    }
    let mut start = s.as_slice().to_vec();
    start.resize(total, 0.0);
    Ok((
        EvidenceMatrix::from_matrix_with_diagonal(entries)?,
        StartVector::new(start)?,
    ))
}
