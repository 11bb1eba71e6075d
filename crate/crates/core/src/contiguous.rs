//! Contiguous assignments: skill-sorted players fill qualities left to
//! right. For three-discrete-concave payments an equilibrium exists iff a
//! contiguous one does, which bounds the search by the number of load
//! vectors.

use rayon::prelude::*;

use crate::concavity::{self, Variant};
use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, LoadVector, QualityVector};
use crate::payments;
use crate::rational::Rational;

/// Whether solver preconditions are checked or taken on trust.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precheck {
    /// Run the concavity checker first and refuse on failure.
    Verify,
    Trust,
}

/// Players by non-increasing skill, ties by index.
pub fn skill_order(game: &ContestGame) -> Vec<usize> {
    let mut order: Vec<usize> = (0..game.n()).collect();
    order.sort_by(|&a, &b| game.skills()[b].cmp(&game.skills()[a]));
    order
}

/// The contiguous profile realizing `loads`.
pub fn contiguous_profile(game: &ContestGame, loads: &LoadVector) -> QualityVector {
    let mut choices = vec![0usize; game.n()];
    let mut players = skill_order(game).into_iter();
    for (quality, &m) in loads.as_slice().iter().enumerate() {
        for player in players.by_ref().take(m) {
            choices[player] = quality;
        }
    }
    QualityVector::from_zero_based_unchecked(choices)
}

/// Pairs `(i, k)` with `i` ahead of `k` in skill order but on a strictly
/// higher quality.
pub fn inversions(game: &ContestGame, profile: &QualityVector) -> Vec<(usize, usize)> {
    let order = skill_order(game);
    let mut out = Vec::new();
    for (a, &i) in order.iter().enumerate() {
        for &k in &order[a + 1..] {
            if profile.get(i) > profile.get(k) {
                out.push((i, k));
            }
        }
    }
    out
}

pub fn is_contiguous(game: &ContestGame, profile: &QualityVector) -> bool {
    let order = skill_order(game);
    order
        .windows(2)
        .all(|w| profile.get(w[0]) <= profile.get(w[1]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContiguousAssignment {
    pub loads: LoadVector,
    pub profile: QualityVector,
}

impl ContiguousAssignment {
    /// One-based first player position (in skill order) of each quality's
    /// block; empty blocks start where the next would.
    pub fn first_positions(&self) -> Vec<usize> {
        let mut acc = 1;
        self.loads
            .as_slice()
            .iter()
            .map(|&m| {
                let first = acc;
                acc += m;
                first
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContiguousOutcome {
    /// First satisfying candidate in colexicographic load order.
    pub assignment: Option<ContiguousAssignment>,
    /// Candidates evaluated; always every load vector.
    pub candidates: u64,
}

/// Checks every contiguous candidate, every player of every block against
/// every other quality.
pub fn solve_contiguous_specific(
    game: &ContestGame,
    precheck: Precheck,
    limits: &Limits,
) -> Result<ContiguousOutcome> {
    if precheck == Precheck::Verify {
        require_concave(game, Variant::Specific, limits)?;
    }
    limits.check_nodes(
        "contiguous candidate set",
        enumerate::load_vector_count(game.n(), game.q()),
    )?;
    let candidates = enumerate::load_vectors(game.n(), game.q());
    let ok: Vec<bool> = candidates
        .par_iter()
        .map(|loads| {
            game.is_pne(&contiguous_profile(game, loads))
                .is_equilibrium()
        })
        .collect();
    Ok(finish(game, candidates, &ok))
}

/// Checks every contiguous candidate once per block and target quality:
/// the payment change is shared by the block, so only the smallest cost
/// increase in the block matters.
pub fn solve_contiguous_invariant(
    game: &ContestGame,
    precheck: Precheck,
    limits: &Limits,
) -> Result<ContiguousOutcome> {
    if precheck == Precheck::Verify {
        require_concave(game, Variant::Invariant, limits)?;
    } else if !payments::is_symmetric_in_loads(game, limits)? {
        return Err(Error::precondition(
            "the invariant solver needs a player-invariant payment of own quality and loads",
        ));
    }
    limits.check_nodes(
        "contiguous candidate set",
        enumerate::load_vector_count(game.n(), game.q()),
    )?;
    let candidates = enumerate::load_vectors(game.n(), game.q());
    let order = skill_order(game);
    let ok: Vec<bool> = candidates
        .par_iter()
        .map(|loads| invariant_candidate_ok(game, &order, loads))
        .collect::<Result<_>>()?;
    Ok(finish(game, candidates, &ok))
}

fn invariant_candidate_ok(game: &ContestGame, order: &[usize], loads: &LoadVector) -> Result<bool> {
    let q = game.q();
    let mut start = 0;
    for from in 0..q {
        let m = loads.get(from);
        if m == 0 {
            continue;
        }
        let block = &order[start..start + m];
        start += m;
        let stay = payments::payment_at_loads(game, 0, from, loads)?;
        for to in (0..q).filter(|&t| t != from) {
            let moved = payments::payment_at_loads(game, 0, to, &loads.moved(from, to))?;
            let gain = moved - &stay;
            let slack: Rational = block
                .iter()
                .map(|&i| game.cost(i, to) - game.cost(i, from))
                .min()
                .expect("occupied block");
            if gain > slack {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn finish(game: &ContestGame, candidates: Vec<LoadVector>, ok: &[bool]) -> ContiguousOutcome {
    let count = candidates.len() as u64;
    let assignment = ok.iter().position(|&b| b).map(|idx| {
        let loads = candidates[idx].clone();
        let profile = contiguous_profile(game, &loads);
        ContiguousAssignment { loads, profile }
    });
    ContiguousOutcome {
        assignment,
        candidates: count,
    }
}

fn require_concave(game: &ContestGame, variant: Variant, limits: &Limits) -> Result<()> {
    let report = concavity::check(game, variant, limits)?;
    match report.violation {
        None => Ok(()),
        Some(v) => Err(Error::precondition(format!(
            "payment is not three-discrete-concave: player {}, loads {}, qualities ({}, {}, {})",
            v.player + 1,
            v.loads,
            v.q_i + 1,
            v.q_k + 1,
            v.q + 1
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contigufied {
    pub profile: QualityVector,
    pub swaps: usize,
}

/// Turns an equilibrium into a contiguous one with the same loads by
/// repeatedly swapping the qualities of the earliest inversion witness and
/// its earliest partner. The result is re-checked and an error returned if
/// it is not an equilibrium.
pub fn contigufy(
    game: &ContestGame,
    pne: &QualityVector,
    precheck: Precheck,
    limits: &Limits,
) -> Result<Contigufied> {
    game.check_profile(pne)?;
    if let crate::game::PneCheck::Deviation { player, to, .. } = game.is_pne(pne) {
        return Err(Error::precondition(format!(
            "{pne} is not an equilibrium: player {} gains by moving to {}",
            player + 1,
            to + 1
        )));
    }
    if precheck == Precheck::Verify {
        let variant = if payments::is_symmetric_in_loads(game, limits)? {
            Variant::Invariant
        } else {
            Variant::Specific
        };
        require_concave(game, variant, limits)?;
    }
    let order = skill_order(game);
    let mut profile = pne.clone();
    let mut swaps = 0usize;
    while let Some((i, k)) = earliest_inversion(&order, &profile) {
        profile.swap(i, k);
        swaps += 1;
    }
    if !game.is_pne(&profile).is_equilibrium() {
        return Err(Error::precondition(format!(
            "contiguous rearrangement {profile} of {pne} is not an equilibrium"
        )));
    }
    Ok(Contigufied { profile, swaps })
}

fn earliest_inversion(order: &[usize], profile: &QualityVector) -> Option<(usize, usize)> {
    for (a, &i) in order.iter().enumerate() {
        if let Some(&k) = order[a + 1..]
            .iter()
            .find(|&&k| profile.get(k) < profile.get(i))
        {
            return Some((i, k));
        }
    }
    None
}
