//! JSON game files and profile strings.
//!
//! Game files use one-based qualities and players and write every number
//! as a `"p/q"` string. Parsing is strict: unknown keys are errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ContestGame, CostFunction, LoadVector, Participation, QualityVector};
use crate::payments::{InvariantTable, ObliviousTable, PaymentFunction, SpecificTable};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub skills: Vec<Rational>,
    pub efforts: Vec<Rational>,
    pub participation: Participation,
    pub cost: CostSpec,
    pub payment: PaymentSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostSpec {
    Product {},
    Table { values: Vec<Vec<Rational>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PaymentSpec {
    Proportional {},
    EqualSharing {},
    Ktop {
        #[serde(rename = "K")]
        k: usize,
    },
    /// `table[player][quality][load - 1]`.
    Oblivious {
        table: Vec<Vec<Vec<Rational>>>,
    },
    PlayerInvariant {
        table: Vec<InvariantEntry>,
    },
    PlayerSpecific {
        table: SpecificSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantEntry {
    pub quality: usize,
    pub loads: Vec<usize>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecificSpec {
    ByProfile(Vec<ProfileEntry>),
    ByLoads(Vec<LoadsEntry>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub player: usize,
    pub profile: Vec<usize>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsEntry {
    pub player: usize,
    pub quality: usize,
    pub loads: Vec<usize>,
    pub value: Rational,
}

fn zero_based(value: usize, what: &str) -> Result<usize> {
    value
        .checked_sub(1)
        .ok_or_else(|| Error::Parse(format!("{what} numbers start at 1")))
}

impl GameFile {
    pub fn into_game(self) -> Result<ContestGame> {
        if self.skills.len() != self.n {
            return Err(Error::Parse(format!(
                "n = {} but {} skills given",
                self.n,
                self.skills.len()
            )));
        }
        if self.efforts.len() != self.q {
            return Err(Error::Parse(format!(
                "Q = {} but {} efforts given",
                self.q,
                self.efforts.len()
            )));
        }
        let cost = match self.cost {
            CostSpec::Product {} => CostFunction::Product,
            CostSpec::Table { values } => CostFunction::Table(values),
        };
        let payment = match self.payment {
            PaymentSpec::Proportional {} => PaymentFunction::Proportional,
            PaymentSpec::EqualSharing {} => PaymentFunction::EqualSharing,
            PaymentSpec::Ktop { k } => PaymentFunction::KTop { k },
            PaymentSpec::Oblivious { table } => {
                PaymentFunction::Oblivious(ObliviousTable::new(table))
            }
            PaymentSpec::PlayerInvariant { table } => {
                let entries = table
                    .into_iter()
                    .map(|e| Ok((zero_based(e.quality, "quality")?, e.loads, e.value)))
                    .collect::<Result<Vec<_>>>()?;
                PaymentFunction::PlayerInvariant(InvariantTable::from_entries(entries)?)
            }
            PaymentSpec::PlayerSpecific { table } => PaymentFunction::PlayerSpecific(match table {
                SpecificSpec::ByProfile(rows) => SpecificTable::by_profile(
                    rows.into_iter()
                        .map(|e| {
                            let profile = e
                                .profile
                                .iter()
                                .map(|&c| zero_based(c, "quality"))
                                .collect::<Result<Vec<_>>>()?;
                            Ok((zero_based(e.player, "player")?, profile, e.value))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )?,
                SpecificSpec::ByLoads(rows) => SpecificTable::by_loads(
                    rows.into_iter()
                        .map(|e| {
                            Ok((
                                zero_based(e.player, "player")?,
                                zero_based(e.quality, "quality")?,
                                e.loads,
                                e.value,
                            ))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )?,
            }),
        };
        ContestGame::new(self.skills, self.efforts, self.participation, cost, payment)
    }

    pub fn from_game(game: &ContestGame) -> Self {
        let cost = match game.cost_function() {
            CostFunction::Product => CostSpec::Product {},
            CostFunction::Table(values) => CostSpec::Table {
                values: values.clone(),
            },
        };
        let payment = match game.payment_function() {
            PaymentFunction::Proportional => PaymentSpec::Proportional {},
            PaymentFunction::EqualSharing => PaymentSpec::EqualSharing {},
            PaymentFunction::KTop { k } => PaymentSpec::Ktop { k: *k },
            PaymentFunction::Oblivious(t) => PaymentSpec::Oblivious {
                table: t.values().to_vec(),
            },
            PaymentFunction::PlayerInvariant(t) => PaymentSpec::PlayerInvariant {
                table: t
                    .entries()
                    .map(|(own, loads, value)| InvariantEntry {
                        quality: own + 1,
                        loads: loads.to_vec(),
                        value: value.clone(),
                    })
                    .collect(),
            },
            PaymentFunction::PlayerSpecific(SpecificTable::ByProfile(map)) => {
                PaymentSpec::PlayerSpecific {
                    table: SpecificSpec::ByProfile(
                        map.iter()
                            .map(|((player, profile), value)| ProfileEntry {
                                player: player + 1,
                                profile: profile.iter().map(|c| c + 1).collect(),
                                value: value.clone(),
                            })
                            .collect(),
                    ),
                }
            }
            PaymentFunction::PlayerSpecific(SpecificTable::ByLoads(map)) => {
                PaymentSpec::PlayerSpecific {
                    table: SpecificSpec::ByLoads(
                        map.iter()
                            .map(|((player, own, loads), value)| LoadsEntry {
                                player: player + 1,
                                quality: own + 1,
                                loads: loads.clone(),
                                value: value.clone(),
                            })
                            .collect(),
                    ),
                }
            }
        };
        GameFile {
            n: game.n(),
            q: game.q(),
            skills: game.skills().to_vec(),
            efforts: game.efforts().to_vec(),
            participation: game.participation(),
            cost,
            payment,
        }
    }
}

pub fn parse_game(json: &str) -> Result<ContestGame> {
    let file: GameFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_game()
}

pub fn game_to_json(game: &ContestGame) -> String {
    serde_json::to_string_pretty(&GameFile::from_game(game)).expect("game files always serialize")
}

/// A profile or load vector written as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileSpec {
    /// One-based qualities, `"1,2,1"`.
    Profile(Vec<usize>),
    /// Load counts, `"L:2,1,0"`.
    Loads(Vec<usize>),
}

impl std::str::FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (loads, body) = match s.trim().strip_prefix("L:") {
            Some(rest) => (true, rest),
            None => (false, s.trim()),
        };
        let values = body
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad entry {part:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if loads {
            ProfileSpec::Loads(values)
        } else {
            ProfileSpec::Profile(values)
        })
    }
}

impl ProfileSpec {
    /// Resolves against a game; load vectors become their contiguous profile.
    pub fn resolve(&self, game: &ContestGame) -> Result<QualityVector> {
        match self {
            ProfileSpec::Profile(choices) => game.profile_from_one_based(choices),
            ProfileSpec::Loads(counts) => {
                let loads = LoadVector::new(counts.clone(), game.n(), game.q())?;
                Ok(crate::contiguous::contiguous_profile(game, &loads))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROPORTIONAL: &str = r#"{
        "n": 2, "Q": 3,
        "skills": ["3/19", "3/31"],
        "efforts": ["1", "2", "3"],
        "participation": "mandatory",
        "cost": {"kind": "product"},
        "payment": {"type": "proportional"}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let game = parse_game(PROPORTIONAL).unwrap();
        assert_eq!(game.skills()[0], Rational::new(3, 19));
        let again = parse_game(&game_to_json(&game)).unwrap();
        assert_eq!(game, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let extra = PROPORTIONAL.replace("\"n\": 2", "\"n\": 2, \"extra\": 1");
        assert!(matches!(parse_game(&extra), Err(Error::Parse(_))));
        let extra_payment = PROPORTIONAL.replace(
            r#"{"type": "proportional"}"#,
            r#"{"type": "proportional", "K": 1}"#,
        );
        assert!(matches!(parse_game(&extra_payment), Err(Error::Parse(_))));
        let float = PROPORTIONAL.replace("\"3/19\"", "0.15");
        assert!(matches!(parse_game(&float), Err(Error::Parse(_))));
    }

    #[test]
    fn count_mismatch_rejected() {
        let wrong = PROPORTIONAL.replace("\"Q\": 3", "\"Q\": 2");
        assert!(matches!(parse_game(&wrong), Err(Error::Parse(_))));
    }

    #[test]
    fn profile_strings() {
        assert_eq!(
            "1,2".parse::<ProfileSpec>().unwrap(),
            ProfileSpec::Profile(vec![1, 2])
        );
        assert_eq!(
            "L:2,1,0".parse::<ProfileSpec>().unwrap(),
            ProfileSpec::Loads(vec![2, 1, 0])
        );
        assert!("1,x".parse::<ProfileSpec>().is_err());
        let game = parse_game(PROPORTIONAL).unwrap();
        let p = "L:1,0,1"
            .parse::<ProfileSpec>()
            .unwrap()
            .resolve(&game)
            .unwrap();
        assert_eq!(p.to_string(), "(1,3)");
        assert!("L:1,1,1"
            .parse::<ProfileSpec>()
            .unwrap()
            .resolve(&game)
            .is_err());
    }
}
