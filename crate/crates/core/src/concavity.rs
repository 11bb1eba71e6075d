//! Three-discrete-concavity checkers.
//!
//! For a load vector `N` and qualities `(q_i, q_k, q)`, write
//! `A = N - e_{q_k} + e_q` (someone else moves from `q_k` to `q`) and
//! `B = N - e_{q_i} + e_q` (player `i` moves to `q`).
//!
//! * player-specific: `P_i(q_i, A) + P_i(q, B) <= 2 P_i(q_i, N)`
//! * player-invariant: `P(q, A) + P(q, B) <= 2 P(q_i, N)`
//!
//! Triples whose perturbation would drive a load below zero, or leave the
//! evaluated player on an empty quality, are skipped.

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, LoadVector};
use crate::payments;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Specific,
    Invariant,
}

/// The first inequality that fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub player: usize,
    pub loads: LoadVector,
    pub q_i: usize,
    pub q_k: usize,
    pub q: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcavityReport {
    pub holds: bool,
    pub violation: Option<Violation>,
    /// Inequalities evaluated before stopping.
    pub checked: u64,
}

pub fn check(game: &ContestGame, variant: Variant, limits: &Limits) -> Result<ConcavityReport> {
    match variant {
        Variant::Specific => is_three_discrete_concave_specific(game, limits),
        Variant::Invariant => is_three_discrete_concave_invariant(game, limits),
    }
}

/// Player-specific form; needs payments keyed on load vectors.
pub fn is_three_discrete_concave_specific(
    game: &ContestGame,
    limits: &Limits,
) -> Result<ConcavityReport> {
    if !payments::depends_on_loads_only(game.payment_function()) {
        return Err(Error::precondition(
            "the concavity check needs payments keyed by load vector and own quality",
        ));
    }
    run(
        game,
        limits,
        (0..game.n()).collect(),
        |player, q_i, a, q, b, loads| {
            let lhs = payments::payment_at_loads(game, player, q_i, a)?
                + payments::payment_at_loads(game, player, q, b)?;
            let rhs = payments::payment_at_loads(game, player, q_i, loads)? * Rational::from(2i64);
            Ok((lhs, rhs))
        },
    )
}

/// Player-invariant form; needs one payment function `P(own, loads)`.
pub fn is_three_discrete_concave_invariant(
    game: &ContestGame,
    limits: &Limits,
) -> Result<ConcavityReport> {
    if !payments::is_symmetric_in_loads(game, limits)? {
        return Err(Error::precondition(
            "the invariant concavity check needs a player-invariant payment of own quality and loads",
        ));
    }
    run(game, limits, vec![0], |_, q_i, a, q, b, loads| {
        let lhs =
            payments::payment_at_loads(game, 0, q, a)? + payments::payment_at_loads(game, 0, q, b)?;
        let rhs = payments::payment_at_loads(game, 0, q_i, loads)? * Rational::from(2i64);
        Ok((lhs, rhs))
    })
}

type Sides = Result<(Rational, Rational)>;

fn run(
    game: &ContestGame,
    limits: &Limits,
    players: Vec<usize>,
    sides: impl Fn(usize, usize, &LoadVector, usize, &LoadVector, &LoadVector) -> Sides,
) -> Result<ConcavityReport> {
    let n = game.n();
    let q = game.q();
    limits.check_nodes("load-vector space", enumerate::load_vector_count(n, q))?;
    let all = enumerate::load_vectors(n, q);
    let mut checked = 0u64;
    for &player in &players {
        for loads in &all {
            for q_i in (0..q).filter(|&c| loads.get(c) > 0) {
                for q_k in (0..q).filter(|&c| loads.get(c) > 0) {
                    for target in 0..q {
                        let a = loads.moved(q_k, target);
                        if a.get(q_i) == 0 {
                            continue;
                        }
                        let b = loads.moved(q_i, target);
                        let (lhs, rhs) = sides(player, q_i, &a, target, &b, loads)?;
                        checked += 1;
                        if lhs > rhs {
                            return Ok(ConcavityReport {
                                holds: false,
                                violation: Some(Violation {
                                    player,
                                    loads: loads.clone(),
                                    q_i,
                                    q_k,
                                    q: target,
                                    lhs,
                                    rhs,
                                }),
                                checked,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(ConcavityReport {
        holds: true,
        violation: None,
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CostFunction, Participation};
    use crate::payments::{InvariantTable, PaymentFunction, SpecificTable};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn game(n: usize, q: usize, payment: PaymentFunction) -> ContestGame {
        ContestGame::new(
            vec![Rational::one(); n],
            (1..=q as i64).map(Rational::from).collect(),
            Participation::Mandatory,
            CostFunction::Product,
            payment,
        )
        .unwrap()
    }

    #[test]
    fn constant_specific_holds() {
        let table = SpecificTable::by_loads_fn(3, 3, |i, _, _| r(1, 4 + i as i64));
        let report = is_three_discrete_concave_specific(
            &game(3, 3, PaymentFunction::PlayerSpecific(table)),
            &Limits::default(),
        )
        .unwrap();
        assert!(report.holds);
        assert!(report.checked > 0);
    }

    #[test]
    fn constant_invariant_holds() {
        let table = InvariantTable::from_fn(3, 2, |_, _| r(1, 5));
        let report = is_three_discrete_concave_invariant(
            &game(3, 2, PaymentFunction::PlayerInvariant(table)),
            &Limits::default(),
        )
        .unwrap();
        assert!(report.holds);
    }

    #[test]
    fn decreasing_in_own_load_fails() {
        // P = 1/2 - N(own)/8: at N = (3,0) with q_k = q_i = 1 and q = 2 the
        // left side is 1/4 + 3/8, the right side 2 * 1/8.
        let table =
            SpecificTable::by_loads_fn(3, 2, |_, own, loads| r(1, 2) - r(loads.get(own) as i64, 8));
        let report = is_three_discrete_concave_specific(
            &game(3, 2, PaymentFunction::PlayerSpecific(table)),
            &Limits::default(),
        )
        .unwrap();
        assert!(!report.holds);
        let v = report.violation.unwrap();
        assert!(v.lhs > v.rhs);
    }

    #[test]
    fn full_profile_tables_refused() {
        let table = SpecificTable::by_profile_fn(2, 2, |_, _| Rational::zero());
        let err = is_three_discrete_concave_specific(
            &game(2, 2, PaymentFunction::PlayerSpecific(table)),
            &Limits::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
