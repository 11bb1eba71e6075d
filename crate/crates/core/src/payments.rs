//! Payment families and their classification.

use std::collections::{BTreeMap, HashMap};

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, LoadVector, QualityVector};
use crate::rational::Rational;

/// How the prize is split among players.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PaymentFunction {
    /// `f_{q_i} / Σ_k f_{q_k}`, or 0 when the denominator vanishes.
    Proportional,
    /// `C_ES * f_{q_i} / N(q_i)`.
    EqualSharing,
    /// Equal sharing restricted to the `k` highest qualities.
    KTop {
        k: usize,
    },
    Oblivious(ObliviousTable),
    PlayerInvariant(InvariantTable),
    PlayerSpecific(SpecificTable),
}

impl PaymentFunction {
    pub fn is_table(&self) -> bool {
        matches!(
            self,
            PaymentFunction::Oblivious(_)
                | PaymentFunction::PlayerInvariant(_)
                | PaymentFunction::PlayerSpecific(_)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            PaymentFunction::Proportional => "proportional",
            PaymentFunction::EqualSharing => "equal_sharing",
            PaymentFunction::KTop { .. } => "ktop",
            PaymentFunction::Oblivious(_) => "oblivious",
            PaymentFunction::PlayerInvariant(_) => "player_invariant",
            PaymentFunction::PlayerSpecific(_) => "player_specific",
        }
    }
}

/// Per-player payment by own quality and its load: `values[i][q][m - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliviousTable {
    values: Vec<Vec<Vec<Rational>>>,
}

impl ObliviousTable {
    pub fn new(values: Vec<Vec<Vec<Rational>>>) -> Self {
        ObliviousTable { values }
    }

    /// The same `Q x n` table for each of `n` players.
    pub fn shared(per_load: Vec<Vec<Rational>>, n: usize) -> Self {
        ObliviousTable {
            values: vec![per_load; n],
        }
    }

    pub fn values(&self) -> &[Vec<Vec<Rational>>] {
        &self.values
    }

    pub fn get(&self, player: usize, quality: usize, load: usize) -> &Rational {
        &self.values[player][quality][load - 1]
    }

    /// Whether every player has the same table.
    pub fn is_shared(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// Payment keyed by own quality and the full load vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvariantTable {
    entries: BTreeMap<(usize, Vec<usize>), Rational>,
}

impl InvariantTable {
    /// Entries are `(own quality, loads, value)`, zero-based qualities.
    pub fn from_entries(entries: Vec<(usize, Vec<usize>, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (own, loads, value) in entries {
            let key = (own, loads);
            if map.contains_key(&key) {
                return Err(duplicate_key(format!(
                    "quality {} at loads {:?}",
                    key.0 + 1,
                    key.1
                )));
            }
            map.insert(key, value);
        }
        Ok(InvariantTable { entries: map })
    }

    /// Tabulates `f(own, loads)` over every load vector and occupied quality.
    pub fn from_fn(n: usize, q: usize, mut f: impl FnMut(usize, &LoadVector) -> Rational) -> Self {
        let mut entries = BTreeMap::new();
        for loads in enumerate::load_vectors(n, q) {
            for own in (0..q).filter(|&c| loads.get(c) > 0) {
                let value = f(own, &loads);
                entries.insert((own, loads.as_slice().to_vec()), value);
            }
        }
        InvariantTable { entries }
    }

    pub fn get(&self, own: usize, loads: &LoadVector) -> Option<&Rational> {
        self.entries.get(&(own, loads.as_slice().to_vec()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &[usize], &Rational)> {
        self.entries
            .iter()
            .map(|((own, loads), v)| (*own, loads.as_slice(), v))
    }
}

/// Player-specific payment in one of two key forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecificTable {
    /// `(player, full profile) -> value`.
    ByProfile(BTreeMap<(usize, Vec<usize>), Rational>),
    /// `(player, own quality, loads) -> value`.
    ByLoads(BTreeMap<(usize, usize, Vec<usize>), Rational>),
}

impl SpecificTable {
    /// Entries are `(player, profile, value)`, zero-based.
    pub fn by_profile(entries: Vec<(usize, Vec<usize>, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (player, profile, value) in entries {
            let key = (player, profile);
            if map.contains_key(&key) {
                return Err(duplicate_key(format!(
                    "player {} at {:?}",
                    key.0 + 1,
                    key.1
                )));
            }
            map.insert(key, value);
        }
        Ok(SpecificTable::ByProfile(map))
    }

    /// Entries are `(player, own quality, loads, value)`, zero-based.
    pub fn by_loads(entries: Vec<(usize, usize, Vec<usize>, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (player, own, loads, value) in entries {
            let key = (player, own, loads);
            if map.contains_key(&key) {
                return Err(duplicate_key(format!(
                    "player {} at quality {} with loads {:?}",
                    key.0 + 1,
                    key.1 + 1,
                    key.2
                )));
            }
            map.insert(key, value);
        }
        Ok(SpecificTable::ByLoads(map))
    }

    /// Tabulates `f(player, profile)` over all profiles.
    pub fn by_profile_fn(
        n: usize,
        q: usize,
        mut f: impl FnMut(usize, &QualityVector) -> Rational,
    ) -> Self {
        let mut map = BTreeMap::new();
        for profile in enumerate::profiles(n, q) {
            for player in 0..n {
                let value = f(player, &profile);
                map.insert((player, profile.as_slice().to_vec()), value);
            }
        }
        SpecificTable::ByProfile(map)
    }

    /// Tabulates `f(player, own, loads)` over every load vector and
    /// occupied quality.
    pub fn by_loads_fn(
        n: usize,
        q: usize,
        mut f: impl FnMut(usize, usize, &LoadVector) -> Rational,
    ) -> Self {
        let mut map = BTreeMap::new();
        for loads in enumerate::load_vectors(n, q) {
            for own in (0..q).filter(|&c| loads.get(c) > 0) {
                for player in 0..n {
                    let value = f(player, own, &loads);
                    map.insert((player, own, loads.as_slice().to_vec()), value);
                }
            }
        }
        SpecificTable::ByLoads(map)
    }
}

fn duplicate_key(what: String) -> Error {
    Error::invalid_game(format!("duplicate payment entry for {what}"))
}

/// Rejects tables with out-of-range keys or missing entries, so that
/// evaluation on a valid profile never fails.
pub(crate) fn check_structure(payment: &PaymentFunction, n: usize, q: usize) -> Result<()> {
    let valid_loads = |loads: &[usize]| loads.len() == q && loads.iter().sum::<usize>() == n;
    match payment {
        PaymentFunction::Proportional | PaymentFunction::EqualSharing => Ok(()),
        PaymentFunction::KTop { k } => {
            if (1..=q).contains(k) {
                Ok(())
            } else {
                Err(Error::invalid_game(format!(
                    "K must lie in 1..={q}, got {k}"
                )))
            }
        }
        PaymentFunction::Oblivious(table) => {
            let shape_ok = table.values.len() == n
                && table
                    .values
                    .iter()
                    .all(|rows| rows.len() == q && rows.iter().all(|r| r.len() == n));
            if shape_ok {
                Ok(())
            } else {
                Err(Error::MissingPaymentEntry(format!(
                    "oblivious table must hold, per player, {q} rows of {n} loads"
                )))
            }
        }
        PaymentFunction::PlayerInvariant(table) => {
            for (own, loads) in table.entries.keys() {
                if *own >= q || !valid_loads(loads) || loads[*own] == 0 {
                    return Err(Error::invalid_game(format!(
                        "invalid payment key: quality {} at loads {:?}",
                        own + 1,
                        loads
                    )));
                }
            }
            let expected = q as u128 * enumerate::load_vector_count(n - 1, q);
            if table.entries.len() as u128 != expected {
                for loads in enumerate::load_vectors(n, q) {
                    for own in (0..q).filter(|&c| loads.get(c) > 0) {
                        if table.get(own, &loads).is_none() {
                            return Err(Error::MissingPaymentEntry(format!(
                                "quality {} at loads {}",
                                own + 1,
                                loads
                            )));
                        }
                    }
                }
            }
            Ok(())
        }
        PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(map)) => {
            for (player, profile) in map.keys() {
                if *player >= n || profile.len() != n || profile.iter().any(|&c| c >= q) {
                    return Err(Error::invalid_game(format!(
                        "invalid payment key: player {} at {:?}",
                        player + 1,
                        profile
                    )));
                }
            }
            let expected = (n as u128).saturating_mul(enumerate::profile_count(n, q));
            if map.len() as u128 != expected {
                for profile in enumerate::profiles(n, q) {
                    for player in 0..n {
                        if !map.contains_key(&(player, profile.as_slice().to_vec())) {
                            return Err(Error::MissingPaymentEntry(format!(
                                "player {} at {}",
                                player + 1,
                                profile
                            )));
                        }
                    }
                }
            }
            Ok(())
        }
        PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(map)) => {
            for (player, own, loads) in map.keys() {
                if *player >= n || *own >= q || !valid_loads(loads) || loads[*own] == 0 {
                    return Err(Error::invalid_game(format!(
                        "invalid payment key: player {} at quality {} with loads {:?}",
                        player + 1,
                        own + 1,
                        loads
                    )));
                }
            }
            let expected = (n * q) as u128 * enumerate::load_vector_count(n - 1, q);
            if map.len() as u128 != expected {
                for loads in enumerate::load_vectors(n, q) {
                    for own in (0..q).filter(|&c| loads.get(c) > 0) {
                        for player in 0..n {
                            if !map.contains_key(&(player, own, loads.as_slice().to_vec())) {
                                return Err(Error::MissingPaymentEntry(format!(
                                    "player {} at quality {} with loads {}",
                                    player + 1,
                                    own + 1,
                                    loads
                                )));
                            }
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

/// Closed-form `C_ES` / `C_KTop`: the inverse of the sum of the
/// `min(n, #eligible)` largest eligible efforts.
pub(crate) fn normalization_constant(
    payment: &PaymentFunction,
    efforts: &[Rational],
    n: usize,
) -> Option<Rational> {
    let eligible = match payment {
        PaymentFunction::EqualSharing => efforts,
        PaymentFunction::KTop { k } => &efforts[efforts.len() - k..],
        _ => return None,
    };
    let top: Rational = eligible.iter().rev().take(n).sum();
    top.recip()
}

pub(crate) fn evaluate(
    game: &ContestGame,
    profile: &QualityVector,
    loads: &LoadVector,
    player: usize,
) -> Rational {
    let own = profile.get(player);
    let efforts = game.efforts();
    match game.payment_function() {
        PaymentFunction::Proportional => {
            let total: Rational = loads
                .as_slice()
                .iter()
                .zip(efforts)
                .filter(|(m, _)| **m > 0)
                .map(|(m, f)| Rational::from(*m) * f)
                .sum();
            efforts[own]
                .checked_div(&total)
                .unwrap_or_else(Rational::zero)
        }
        PaymentFunction::EqualSharing => shared(game, efforts, loads, own),
        PaymentFunction::KTop { k } => {
            if own + k >= game.q() {
                shared(game, efforts, loads, own)
            } else {
                Rational::zero()
            }
        }
        PaymentFunction::Oblivious(table) => table.get(player, own, loads.get(own)).clone(),
        PaymentFunction::PlayerInvariant(table) => table
            .get(own, loads)
            .cloned()
            .expect("payment table checked complete at construction"),
        PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(map)) => map
            .get(&(player, profile.as_slice().to_vec()))
            .cloned()
            .expect("payment table checked complete at construction"),
        PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(map)) => map
            .get(&(player, own, loads.as_slice().to_vec()))
            .cloned()
            .expect("payment table checked complete at construction"),
    }
}

fn shared(game: &ContestGame, efforts: &[Rational], loads: &LoadVector, own: usize) -> Rational {
    let constant = game
        .normalization_constant()
        .expect("constant cached for sharing families");
    constant * &efforts[own] / Rational::from(loads.get(own))
}

/// A profile with `player` on `own` and the other players filling `loads`
/// in index order.
pub fn representative_profile(player: usize, own: usize, loads: &LoadVector) -> QualityVector {
    let mut remaining = loads.as_slice().to_vec();
    remaining[own] -= 1;
    let n = loads.total();
    let mut choices = vec![0usize; n];
    choices[player] = own;
    let mut quality = 0;
    for (slot, choice) in choices.iter_mut().enumerate() {
        if slot == player {
            continue;
        }
        while remaining[quality] == 0 {
            quality += 1;
        }
        *choice = quality;
        remaining[quality] -= 1;
    }
    QualityVector::from_zero_based_unchecked(choices)
}

/// Whether each player's payment is a function of the own quality and the
/// load vector alone. Only full-profile tables can fail this.
pub fn depends_on_loads_only(payment: &PaymentFunction) -> bool {
    !matches!(
        payment,
        PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(_))
    )
}

/// `P_i(own, loads)` for payments keyed on loads.
pub fn payment_at_loads(
    game: &ContestGame,
    player: usize,
    own: usize,
    loads: &LoadVector,
) -> Result<Rational> {
    match game.payment_function() {
        PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(_)) => Err(Error::precondition(
            "payment table is keyed by full profiles, not by load vectors",
        )),
        PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(map)) => Ok(map
            .get(&(player, own, loads.as_slice().to_vec()))
            .cloned()
            .expect("payment table checked complete at construction")),
        PaymentFunction::PlayerInvariant(table) => Ok(table
            .get(own, loads)
            .cloned()
            .expect("payment table checked complete at construction")),
        PaymentFunction::Oblivious(table) => Ok(table.get(player, own, loads.get(own)).clone()),
        _ => {
            let profile = representative_profile(player, own, loads);
            Ok(evaluate(game, &profile, loads, player))
        }
    }
}

/// Whether the payment is one function `P(own, loads)` shared by all players.
pub fn is_symmetric_in_loads(game: &ContestGame, limits: &Limits) -> Result<bool> {
    let n = game.n();
    match game.payment_function() {
        PaymentFunction::Proportional
        | PaymentFunction::EqualSharing
        | PaymentFunction::KTop { .. }
        | PaymentFunction::PlayerInvariant(_) => Ok(true),
        PaymentFunction::Oblivious(table) => Ok(table.is_shared()),
        PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(map)) => {
            Ok(map.iter().all(|((player, own, loads), value)| {
                *player == 0 || map.get(&(0, *own, loads.clone())) == Some(value)
            }))
        }
        PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(_)) => {
            limits.check_profiles(n, game.q())?;
            let mut seen: HashMap<(usize, LoadVector), Rational> = HashMap::new();
            for profile in enumerate::profiles(n, game.q()) {
                let loads = game.load_of(&profile);
                for player in 0..n {
                    let value = game.payment_with_loads(&profile, &loads, player);
                    let key = (profile.get(player), loads.clone());
                    match seen.get(&key) {
                        Some(prev) if *prev != value => return Ok(false),
                        Some(_) => {}
                        None => {
                            seen.insert(key, value);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Exhaustively decided payment properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// Each player's payment depends only on the chosen quality and its load.
    pub oblivious: bool,
    /// Players sharing a quality always receive the same payment.
    pub player_invariant: bool,
}

/// Decides both properties by scanning every profile.
pub fn classify(game: &ContestGame, limits: &Limits) -> Result<Classification> {
    let n = game.n();
    limits.check_profiles(n, game.q())?;
    let mut oblivious = true;
    let mut player_invariant = true;
    let mut seen: HashMap<(usize, usize, usize), Rational> = HashMap::new();
    for profile in enumerate::profiles(n, game.q()) {
        let loads = game.load_of(&profile);
        let pay: Vec<Rational> = (0..n)
            .map(|i| game.payment_with_loads(&profile, &loads, i))
            .collect();
        if player_invariant {
            'pairs: for i in 0..n {
                for k in i + 1..n {
                    if profile.get(i) == profile.get(k) && pay[i] != pay[k] {
                        player_invariant = false;
                        break 'pairs;
                    }
                }
            }
        }
        if oblivious {
            for (i, value) in pay.iter().enumerate() {
                let own = profile.get(i);
                let key = (i, own, loads.get(own));
                match seen.get(&key) {
                    Some(prev) if prev != value => {
                        oblivious = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, value.clone());
                    }
                }
            }
        }
        if !oblivious && !player_invariant {
            break;
        }
    }
    Ok(Classification {
        oblivious,
        player_invariant,
    })
}
