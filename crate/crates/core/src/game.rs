//! Contest games, profiles, load vectors and utilities.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::payments::{self, PaymentFunction};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Participation {
    /// The lowest effort is zero: a player may abstain.
    Voluntary,
    /// The lowest effort is positive.
    Mandatory,
}

/// Skill-effort cost `Λ(s_i, f_q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostFunction {
    /// `s_i * f_q`.
    Product,
    /// Explicit `n x Q` matrix, row per player.
    Table(Vec<Vec<Rational>>),
}

/// One quality per player, zero-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualityVector(Vec<usize>);

impl QualityVector {
    /// Builds a profile from zero-based qualities without range checks; see
    /// [`ContestGame::check_profile`].
    pub fn from_zero_based_unchecked(choices: Vec<usize>) -> Self {
        QualityVector(choices)
    }

    /// Builds a profile from one-based qualities as written in files and on
    /// the command line.
    pub fn from_one_based(choices: &[usize]) -> Result<Self> {
        choices
            .iter()
            .map(|&c| {
                c.checked_sub(1)
                    .ok_or_else(|| Error::InvalidProfile("qualities are numbered from 1".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(QualityVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    /// Copy with `player` moved to `quality`.
    pub fn with(&self, player: usize, quality: usize) -> Self {
        let mut next = self.0.clone();
        next[player] = quality;
        QualityVector(next)
    }

    pub(crate) fn set(&mut self, player: usize, quality: usize) {
        self.0[player] = quality;
    }

    pub(crate) fn swap(&mut self, a: usize, b: usize) {
        self.0.swap(a, b);
    }
}

impl fmt::Display for QualityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, self.0.iter().map(|c| c + 1))
    }
}

impl fmt::Debug for QualityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Occupancy count per quality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoadVector(Vec<usize>);

impl LoadVector {
    pub fn from_counts_unchecked(counts: Vec<usize>) -> Self {
        LoadVector(counts)
    }

    /// Checks that the counts cover exactly `n` players over `q` qualities.
    pub fn new(counts: Vec<usize>, n: usize, q: usize) -> Result<Self> {
        if counts.len() != q {
            return Err(Error::InvalidProfile(format!(
                "load vector has {} entries, expected {q}",
                counts.len()
            )));
        }
        let total: usize = counts.iter().sum();
        if total != n {
            return Err(Error::InvalidProfile(format!(
                "load vector sums to {total}, expected {n}"
            )));
        }
        Ok(LoadVector(counts))
    }

    pub fn get(&self, quality: usize) -> usize {
        self.0[quality]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Copy with one player moved from `from` to `to`.
    pub fn moved(&self, from: usize, to: usize) -> Self {
        let mut next = self.0.clone();
        next[from] -= 1;
        next[to] += 1;
        LoadVector(next)
    }
}

impl fmt::Display for LoadVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, self.0.iter().copied())
    }
}

impl fmt::Debug for LoadVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = usize>) -> fmt::Result {
    f.write_str("(")?;
    for (idx, item) in items.enumerate() {
        if idx > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    f.write_str(")")
}

/// Loads induced by `profile` over `q` qualities.
pub fn load_of(profile: &QualityVector, q: usize) -> LoadVector {
    let mut counts = vec![0usize; q];
    for &c in profile.as_slice() {
        counts[c] += 1;
    }
    LoadVector(counts)
}

/// Outcome of an equilibrium check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PneCheck {
    Equilibrium,
    /// A strictly profitable unilateral move: the first player (by index)
    /// who has one, sent to a best response.
    Deviation {
        player: usize,
        to: usize,
        gain: Rational,
    },
}

impl PneCheck {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, PneCheck::Equilibrium)
    }
}

/// Non-fatal findings from [`ContestGame::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    NonMonotoneCost {
        player: usize,
        quality: usize,
    },
    NormalizationViolated {
        profile: QualityVector,
        total: Rational,
    },
    NormalizationUnchecked {
        reason: String,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonMonotoneCost { player, quality } => write!(
                f,
                "cost of player {} drops from quality {} to {}",
                player + 1,
                quality,
                quality + 1
            ),
            Warning::NormalizationViolated { profile, total } => {
                write!(f, "payments at {profile} sum to {total}, above 1")
            }
            Warning::NormalizationUnchecked { reason } => {
                write!(f, "normalization not checked: {reason}")
            }
        }
    }
}

/// A contest game. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContestGame {
    skills: Vec<Rational>,
    efforts: Vec<Rational>,
    participation: Participation,
    cost: CostFunction,
    payment: PaymentFunction,
    constant: Option<Rational>,
}

impl ContestGame {
    pub fn new(
        skills: Vec<Rational>,
        efforts: Vec<Rational>,
        participation: Participation,
        cost: CostFunction,
        payment: PaymentFunction,
    ) -> Result<Self> {
        let n = skills.len();
        let q = efforts.len();
        if n < 2 {
            return Err(Error::invalid_game(format!(
                "need at least 2 players, got {n}"
            )));
        }
        if q < 2 {
            return Err(Error::invalid_game(format!(
                "need at least 2 qualities, got {q}"
            )));
        }
        if let Some(pos) = skills.iter().position(|s| !s.is_positive()) {
            return Err(Error::invalid_game(format!(
                "skill of player {} must be positive",
                pos + 1
            )));
        }
        if efforts[0].is_negative() {
            return Err(Error::invalid_game("efforts must be non-negative"));
        }
        if let Some(pos) = efforts.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid_game(format!(
                "efforts must be strictly increasing (quality {} vs {})",
                pos + 1,
                pos + 2
            )));
        }
        match (participation, efforts[0].is_zero()) {
            (Participation::Voluntary, false) => {
                return Err(Error::invalid_game("voluntary participation needs f_1 = 0"))
            }
            (Participation::Mandatory, true) => {
                return Err(Error::invalid_game("mandatory participation needs f_1 > 0"))
            }
            _ => {}
        }
        if let CostFunction::Table(rows) = &cost {
            if rows.len() != n || rows.iter().any(|r| r.len() != q) {
                return Err(Error::invalid_game(format!("cost table must be {n} x {q}")));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.iter().any(Rational::is_negative) {
                    return Err(Error::invalid_game(format!(
                        "cost row of player {} has a negative entry",
                        i + 1
                    )));
                }
                if participation == Participation::Voluntary && !row[0].is_zero() {
                    return Err(Error::invalid_game(format!(
                        "cost of player {} at zero effort must be 0",
                        i + 1
                    )));
                }
            }
        }
        payments::check_structure(&payment, n, q)?;
        let constant = payments::normalization_constant(&payment, &efforts, n);
        Ok(ContestGame {
            skills,
            efforts,
            participation,
            cost,
            payment,
            constant,
        })
    }

    pub fn n(&self) -> usize {
        self.skills.len()
    }

    pub fn q(&self) -> usize {
        self.efforts.len()
    }

    pub fn skills(&self) -> &[Rational] {
        &self.skills
    }

    pub fn efforts(&self) -> &[Rational] {
        &self.efforts
    }

    pub fn participation(&self) -> Participation {
        self.participation
    }

    pub fn cost_function(&self) -> &CostFunction {
        &self.cost
    }

    pub fn payment_function(&self) -> &PaymentFunction {
        &self.payment
    }

    /// `C_ES` or `C_KTop` for the families that carry one.
    pub fn normalization_constant(&self) -> Option<&Rational> {
        self.constant.as_ref()
    }

    /// Same game with a different payment function.
    pub fn with_payment(&self, payment: PaymentFunction) -> Result<Self> {
        ContestGame::new(
            self.skills.clone(),
            self.efforts.clone(),
            self.participation,
            self.cost.clone(),
            payment,
        )
    }

    /// Validates a profile against this game.
    pub fn check_profile(&self, profile: &QualityVector) -> Result<()> {
        if profile.len() != self.n() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.n()
            )));
        }
        if let Some(&bad) = profile.as_slice().iter().find(|&&c| c >= self.q()) {
            return Err(Error::InvalidProfile(format!(
                "quality {} out of range 1..={}",
                bad + 1,
                self.q()
            )));
        }
        Ok(())
    }

    /// Validates one-based qualities and converts them.
    pub fn profile_from_one_based(&self, choices: &[usize]) -> Result<QualityVector> {
        let profile = QualityVector::from_one_based(choices)?;
        self.check_profile(&profile)?;
        Ok(profile)
    }

    pub fn load_of(&self, profile: &QualityVector) -> LoadVector {
        load_of(profile, self.q())
    }

    /// `Λ(s_i, f_q)`.
    pub fn cost(&self, player: usize, quality: usize) -> Rational {
        match &self.cost {
            CostFunction::Product => &self.skills[player] * &self.efforts[quality],
            CostFunction::Table(rows) => rows[player][quality].clone(),
        }
    }

    pub fn payment(&self, profile: &QualityVector, player: usize) -> Rational {
        let loads = self.load_of(profile);
        self.payment_with_loads(profile, &loads, player)
    }

    /// Payment when the loads of `profile` are already known.
    pub fn payment_with_loads(
        &self,
        profile: &QualityVector,
        loads: &LoadVector,
        player: usize,
    ) -> Rational {
        payments::evaluate(self, profile, loads, player)
    }

    /// `U_i = P_i - Λ(s_i, f_{q_i})`.
    pub fn utility(&self, profile: &QualityVector, player: usize) -> Rational {
        let loads = self.load_of(profile);
        self.utility_with_loads(profile, &loads, player)
    }

    pub fn utility_with_loads(
        &self,
        profile: &QualityVector,
        loads: &LoadVector,
        player: usize,
    ) -> Rational {
        self.payment_with_loads(profile, loads, player) - self.cost(player, profile.get(player))
    }

    pub fn utilities(&self, profile: &QualityVector) -> Vec<Rational> {
        let loads = self.load_of(profile);
        (0..self.n())
            .map(|i| self.utility_with_loads(profile, &loads, i))
            .collect()
    }

    /// Utility of `player` after moving to `quality`, others fixed.
    pub fn deviation_utility(
        &self,
        profile: &QualityVector,
        player: usize,
        quality: usize,
    ) -> Rational {
        self.utility(&profile.with(player, quality), player)
    }

    /// Best response of `player`: the highest-utility quality, ties to the
    /// lowest quality. Returns `(quality, utility)`.
    pub fn best_response(&self, profile: &QualityVector, player: usize) -> (usize, Rational) {
        let mut best: Option<(usize, Rational)> = None;
        for quality in 0..self.q() {
            let u = if quality == profile.get(player) {
                self.utility(profile, player)
            } else {
                self.deviation_utility(profile, player, quality)
            };
            if best.as_ref().is_none_or(|(_, b)| u > *b) {
                best = Some((quality, u));
            }
        }
        best.expect("at least two qualities")
    }

    /// Whether no player gains strictly by a unilateral move.
    pub fn is_pne(&self, profile: &QualityVector) -> PneCheck {
        for player in 0..self.n() {
            let current = self.utility(profile, player);
            let (to, best) = self.best_response(profile, player);
            if best > current {
                return PneCheck::Deviation {
                    player,
                    to,
                    gain: best - current,
                };
            }
        }
        PneCheck::Equilibrium
    }

    /// Non-fatal checks: cost monotonicity and payment normalization.
    ///
    /// Normalization is exhaustive over all profiles for table payments and
    /// analytic for the closed-form families.
    pub fn validate(&self, limits: &Limits) -> Vec<Warning> {
        let mut warnings = Vec::new();
        if let CostFunction::Table(rows) = &self.cost {
            for (player, row) in rows.iter().enumerate() {
                if let Some(pos) = row.windows(2).position(|w| w[0] > w[1]) {
                    warnings.push(Warning::NonMonotoneCost {
                        player,
                        quality: pos + 1,
                    });
                }
            }
        }
        if self.payment.is_table() {
            match limits.check_profiles(self.n(), self.q()) {
                Ok(_) => {
                    let one = Rational::one();
                    for profile in enumerate::profiles(self.n(), self.q()) {
                        let loads = self.load_of(&profile);
                        let total: Rational = (0..self.n())
                            .map(|i| self.payment_with_loads(&profile, &loads, i))
                            .sum();
                        if total > one {
                            warnings.push(Warning::NormalizationViolated { profile, total });
                            break;
                        }
                    }
                }
                Err(e) => warnings.push(Warning::NormalizationUnchecked {
                    reason: e.to_string(),
                }),
            }
        }
        warnings
    }
}
