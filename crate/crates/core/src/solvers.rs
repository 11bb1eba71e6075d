//! Brute-force equilibrium search and the lower-bounded-skills shortcut.

use rayon::prelude::*;

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, CostFunction, Participation, QualityVector};
use crate::payments::PaymentFunction;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Stop at the first equilibrium in lexicographic order.
    First,
    /// Collect every equilibrium.
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    /// Equilibria in lexicographic order.
    pub equilibria: Vec<QualityVector>,
    /// Profiles examined, counted as a sequential scan would.
    pub scanned: u64,
}

/// Scans the whole profile space.
pub fn brute_force_pne(game: &ContestGame, limits: &Limits, scope: Scope) -> Result<BruteForce> {
    let n = game.n();
    let q = game.q();
    let total = limits.check_profiles(n, q)?;
    let is_pne = |idx: u64| {
        game.is_pne(&enumerate::profile_at(idx, n, q))
            .is_equilibrium()
    };
    match scope {
        Scope::First => Ok(
            match (0..total).into_par_iter().find_first(|&idx| is_pne(idx)) {
                Some(idx) => BruteForce {
                    equilibria: vec![enumerate::profile_at(idx, n, q)],
                    scanned: idx + 1,
                },
                None => BruteForce {
                    equilibria: Vec::new(),
                    scanned: total,
                },
            },
        ),
        Scope::All => {
            let equilibria = (0..total)
                .into_par_iter()
                .filter(|&idx| is_pne(idx))
                .map(|idx| enumerate::profile_at(idx, n, q))
                .collect();
            Ok(BruteForce {
                equilibria,
                scanned: total,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllAtLowest {
    /// `f_2 / (f_2 - f_1)`.
    pub bound: Rational,
    pub min_skill: Rational,
    /// `min_skill >= bound`.
    pub bound_holds: bool,
    /// The all-at-lowest profile, when the bound holds and the profile is
    /// confirmed to be an equilibrium.
    pub profile: Option<QualityVector>,
}

/// Constant-time answer for proportional allocation with mandatory
/// participation and product costs: when every skill is at least
/// `f_2 / (f_2 - f_1)`, everyone choosing the lowest quality is an
/// equilibrium. The candidate is always re-checked; a bound that holds on a
/// profile that is not an equilibrium yields no profile.
pub fn solve_all_at_lowest(game: &ContestGame) -> Result<AllAtLowest> {
    if *game.payment_function() != PaymentFunction::Proportional {
        return Err(Error::precondition("needs proportional allocation"));
    }
    if game.participation() != Participation::Mandatory {
        return Err(Error::precondition("needs mandatory participation"));
    }
    if *game.cost_function() != CostFunction::Product {
        return Err(Error::precondition("needs product costs"));
    }
    let f = game.efforts();
    let bound = &f[1] / (&f[1] - &f[0]);
    let min_skill = game
        .skills()
        .iter()
        .min()
        .cloned()
        .expect("games have players");
    let bound_holds = min_skill >= bound;
    let profile = if bound_holds {
        let candidate = QualityVector::from_zero_based_unchecked(vec![0; game.n()]);
        game.is_pne(&candidate)
            .is_equilibrium()
            .then_some(candidate)
    } else {
        None
    };
    Ok(AllAtLowest {
        bound,
        min_skill,
        bound_holds,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn proportional(skills: Vec<Rational>, efforts: Vec<Rational>) -> ContestGame {
        ContestGame::new(
            skills,
            efforts,
            Participation::Mandatory,
            CostFunction::Product,
            PaymentFunction::Proportional,
        )
        .unwrap()
    }

    #[test]
    fn lower_bound_holds() {
        let g = proportional(vec![r(2, 1), r(2, 1)], vec![r(1, 1), r(2, 1), r(3, 1)]);
        let out = solve_all_at_lowest(&g).unwrap();
        assert_eq!(out.bound, r(2, 1));
        assert!(out.bound_holds);
        assert_eq!(
            out.profile,
            Some(QualityVector::from_one_based(&[1, 1]).unwrap())
        );
        let brute = brute_force_pne(&g, &Limits::default(), Scope::All).unwrap();
        assert_eq!(brute.scanned, 9);
        assert!(brute
            .equilibria
            .contains(&QualityVector::from_one_based(&[1, 1]).unwrap()));
    }

    #[test]
    fn anonymous_players_fail_bound() {
        let g = proportional(vec![Rational::one(); 3], vec![r(1, 1), r(2, 1)]);
        let out = solve_all_at_lowest(&g).unwrap();
        assert!(!out.bound_holds);
        assert_eq!(out.profile, None);
    }

    #[test]
    fn bound_is_not_enough_for_tiny_efforts() {
        // Skills meet the bound, yet moving up pays 2/3 - 1/25 > 1/2 - 1/50.
        let g = proportional(vec![r(2, 1), r(2, 1)], vec![r(1, 100), r(2, 100)]);
        let out = solve_all_at_lowest(&g).unwrap();
        assert!(out.bound_holds);
        assert_eq!(out.profile, None);
    }

    #[test]
    fn preconditions() {
        let g = proportional(vec![r(2, 1), r(2, 1)], vec![r(1, 1), r(2, 1)]);
        let es = g.with_payment(PaymentFunction::EqualSharing).unwrap();
        assert!(matches!(
            solve_all_at_lowest(&es),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn first_scope_counts_scan() {
        let g = proportional(vec![Rational::one(); 2], vec![r(1, 1), r(2, 1)]);
        let first = brute_force_pne(&g, &Limits::default(), Scope::First).unwrap();
        assert_eq!(first.scanned, 1);
        assert_eq!(
            first.equilibria,
            vec![QualityVector::from_one_based(&[1, 1]).unwrap()]
        );
    }
}
