//! Finite normal-form games and their embedding as contest games.

use crate::enumerate;
use crate::error::{Error, Result};
use crate::game::{ContestGame, CostFunction, Participation, QualityVector};
use crate::payments::{PaymentFunction, SpecificTable};
use crate::rational::Rational;

/// `n` players with `m` strategies each; payoffs indexed by the
/// lexicographic profile index, then player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormGame {
    players: usize,
    strategies: usize,
    payoffs: Vec<Vec<Rational>>,
}

impl NormalFormGame {
    pub fn new(players: usize, strategies: usize, payoffs: Vec<Vec<Rational>>) -> Result<Self> {
        if players < 2 || strategies < 2 {
            return Err(Error::invalid_game(
                "need at least 2 players and 2 strategies",
            ));
        }
        let expected = enumerate::profile_count(players, strategies);
        if payoffs.len() as u128 != expected || payoffs.iter().any(|row| row.len() != players) {
            return Err(Error::invalid_game(format!(
                "payoff table must have {expected} rows of {players} entries"
            )));
        }
        Ok(NormalFormGame {
            players,
            strategies,
            payoffs,
        })
    }

    /// Tabulates `f(profile, player)` over zero-based profiles.
    pub fn from_fn(
        players: usize,
        strategies: usize,
        mut f: impl FnMut(&[usize], usize) -> Rational,
    ) -> Result<Self> {
        let payoffs = enumerate::profiles(players, strategies)
            .map(|p| (0..players).map(|i| f(p.as_slice(), i)).collect())
            .collect();
        NormalFormGame::new(players, strategies, payoffs)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn strategies(&self) -> usize {
        self.strategies
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> &Rational {
        let idx = profile
            .iter()
            .fold(0usize, |acc, &s| acc * self.strategies + s);
        &self.payoffs[idx][player]
    }

    /// Every pure equilibrium, zero-based, in lexicographic order.
    pub fn pure_equilibria(&self) -> Vec<Vec<usize>> {
        enumerate::profiles(self.players, self.strategies)
            .map(|p| p.as_slice().to_vec())
            .filter(|p| {
                (0..self.players).all(|i| {
                    let current = self.payoff(p, i);
                    (0..self.strategies).all(|s| {
                        let mut dev = p.clone();
                        dev[i] = s;
                        self.payoff(&dev, i) <= current
                    })
                })
            })
            .collect()
    }
}

/// Skills, efforts and costs for the contest game a normal-form game is
/// embedded into; efforts must number the game's strategies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionBase {
    pub skills: Vec<Rational>,
    pub efforts: Vec<Rational>,
    pub participation: Participation,
    pub cost: CostFunction,
}

/// Contest game with one quality per strategy and
/// `P_i(q) = F_i(q) + Λ(s_i, f_{q_i})`, so that `U_i(q) = F_i(q)` on every
/// profile.
pub fn reduce_from_normal_form(
    source: &NormalFormGame,
    base: ReductionBase,
) -> Result<ContestGame> {
    if base.skills.len() != source.players() || base.efforts.len() != source.strategies() {
        return Err(Error::precondition(format!(
            "base must have {} skills and {} efforts",
            source.players(),
            source.strategies()
        )));
    }
    let placeholder = ContestGame::new(
        base.skills.clone(),
        base.efforts.clone(),
        base.participation,
        base.cost.clone(),
        PaymentFunction::Proportional,
    )?;
    let table = SpecificTable::by_profile_fn(
        source.players(),
        source.strategies(),
        |i, p: &QualityVector| source.payoff(p.as_slice(), i) + placeholder.cost(i, p.get(i)),
    );
    placeholder.with_payment(PaymentFunction::PlayerSpecific(table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize, m: usize) -> ReductionBase {
        ReductionBase {
            skills: vec![Rational::one(); n],
            efforts: (1..=m as i64).map(Rational::from).collect(),
            participation: Participation::Mandatory,
            cost: CostFunction::Product,
        }
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        let mp = NormalFormGame::from_fn(2, 2, |p, i| {
            let same = p[0] == p[1];
            let win = if i == 0 { same } else { !same };
            Rational::from(if win { 1i64 } else { -1 })
        })
        .unwrap();
        assert!(mp.pure_equilibria().is_empty());
        let g = reduce_from_normal_form(&mp, base(2, 2)).unwrap();
        for p in enumerate::profiles(2, 2) {
            assert!(!g.is_pne(&p).is_equilibrium());
            for i in 0..2 {
                assert_eq!(&g.utility(&p, i), mp.payoff(p.as_slice(), i));
            }
        }
    }

    #[test]
    fn coordination_game() {
        let coord = NormalFormGame::from_fn(2, 2, |p, _| {
            Rational::from(if p[0] == p[1] { 1i64 } else { 0 })
        })
        .unwrap();
        assert_eq!(coord.pure_equilibria(), vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn constant_game_all_equilibria() {
        let flat = NormalFormGame::from_fn(3, 2, |_, _| Rational::from(7i64)).unwrap();
        assert_eq!(flat.pure_equilibria().len(), 8);
    }

    #[test]
    fn shape_mismatch_refused() {
        let flat = NormalFormGame::from_fn(2, 3, |_, _| Rational::zero()).unwrap();
        assert!(matches!(
            reduce_from_normal_form(&flat, base(2, 2)),
            Err(Error::Precondition(_))
        ));
    }
}
