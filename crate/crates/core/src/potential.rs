//! Exact potential for player-invariant oblivious payments.
//!
//! `Φ(q) = Σ_q Γ_q(N(q)) - Σ_k Λ(s_k, f_{q_k})` with `Γ_q(0) = 0` and
//! `Γ_q(m) - Γ_q(m-1)` the payment of a player on `q` when `m` players
//! share it.

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, QualityVector};
use crate::payments::{self, PaymentFunction, SpecificTable};
use crate::rational::Rational;

/// Prefix sums `Γ_q(m)` for `m = 0..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialCache {
    gamma: Vec<Vec<Rational>>,
}

impl PotentialCache {
    /// Builds the cache, refusing payments that are not both
    /// player-invariant and oblivious.
    ///
    /// Table payments keyed on full profiles or per-player loads are checked
    /// exhaustively, which needs the profile space within `limits`.
    pub fn build(game: &ContestGame, limits: &Limits) -> Result<Self> {
        let n = game.n();
        let q = game.q();
        let per_load = |quality: usize, load: usize| -> Result<Rational> {
            let mut counts = vec![0usize; q];
            counts[quality] = load;
            counts[if quality == 0 { 1 } else { 0 }] = n - load;
            let loads = crate::game::LoadVector::from_counts_unchecked(counts);
            payments::payment_at_loads(game, 0, quality, &loads)
        };
        let verify = match game.payment_function() {
            PaymentFunction::Proportional => return Err(not_potential("proportional allocation")),
            PaymentFunction::EqualSharing | PaymentFunction::KTop { .. } => false,
            PaymentFunction::Oblivious(table) => {
                if !table.is_shared() {
                    return Err(not_potential("per-player oblivious tables differ"));
                }
                false
            }
            PaymentFunction::PlayerInvariant(table) => {
                for (own, loads, value) in table.entries() {
                    let loads = crate::game::LoadVector::from_counts_unchecked(loads.to_vec());
                    if per_load(own, loads.get(own))? != *value {
                        return Err(not_potential("payment depends on loads of other qualities"));
                    }
                }
                false
            }
            PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(_))
            | PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(_)) => true,
        };

        let mut gamma = Vec::with_capacity(q);
        for quality in 0..q {
            let mut row = Vec::with_capacity(n + 1);
            row.push(Rational::zero());
            for load in 1..=n {
                let step = match game.payment_function() {
                    PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(_)) => {
                        let profile = QualityVector::from_zero_based_unchecked(
                            (0..n)
                                .map(|i| {
                                    if i < load {
                                        quality
                                    } else if quality == 0 {
                                        1
                                    } else {
                                        0
                                    }
                                })
                                .collect(),
                        );
                        game.payment(&profile, 0)
                    }
                    _ => per_load(quality, load)?,
                };
                let prev = row[load - 1].clone();
                row.push(prev + step);
            }
            gamma.push(row);
        }
        let cache = PotentialCache { gamma };

        if verify {
            limits.check_profiles(n, q)?;
            for profile in enumerate::profiles(n, q) {
                let loads = game.load_of(&profile);
                for player in 0..n {
                    let own = profile.get(player);
                    let expected = cache.increment(own, loads.get(own));
                    if game.payment_with_loads(&profile, &loads, player) != expected {
                        return Err(not_potential(
                            "payment table is not one function of own quality and its load",
                        ));
                    }
                }
            }
        }
        Ok(cache)
    }

    pub fn gamma(&self, quality: usize, load: usize) -> &Rational {
        &self.gamma[quality][load]
    }

    fn increment(&self, quality: usize, load: usize) -> Rational {
        &self.gamma[quality][load] - &self.gamma[quality][load - 1]
    }

    /// `Φ(profile)`.
    pub fn potential(&self, game: &ContestGame, profile: &QualityVector) -> Rational {
        let loads = game.load_of(profile);
        let gain: Rational = loads
            .as_slice()
            .iter()
            .enumerate()
            .map(|(quality, &m)| self.gamma[quality][m].clone())
            .sum();
        let cost: Rational = (0..game.n()).map(|k| game.cost(k, profile.get(k))).sum();
        gain - cost
    }
}

fn not_potential(reason: &str) -> Error {
    Error::precondition(format!(
        "exact potential needs player-invariant oblivious payments: {reason}"
    ))
}

/// `Φ(profile)`, building the cache on the fly.
pub fn potential(game: &ContestGame, profile: &QualityVector, limits: &Limits) -> Result<Rational> {
    Ok(PotentialCache::build(game, limits)?.potential(game, profile))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ascent {
    pub profile: QualityVector,
    pub steps: usize,
}

/// Follows first-improving moves (players in index order, qualities
/// ascending) from `start` until no player can improve. Each move raises
/// `Φ` strictly, so the walk ends at an equilibrium.
pub fn potential_ascent(
    game: &ContestGame,
    start: &QualityVector,
    limits: &Limits,
) -> Result<Ascent> {
    game.check_profile(start)?;
    let cache = PotentialCache::build(game, limits)?;
    let mut profile = start.clone();
    let mut steps = 0usize;
    let mut phi = cache.potential(game, &profile);
    'walk: loop {
        for player in 0..game.n() {
            let current = game.utility(&profile, player);
            for quality in 0..game.q() {
                if quality == profile.get(player) {
                    continue;
                }
                if game.deviation_utility(&profile, player, quality) > current {
                    profile.set(player, quality);
                    steps += 1;
                    let next = cache.potential(game, &profile);
                    debug_assert!(next > phi, "potential must rise along improvements");
                    phi = next;
                    continue 'walk;
                }
            }
        }
        return Ok(Ascent { profile, steps });
    }
}
