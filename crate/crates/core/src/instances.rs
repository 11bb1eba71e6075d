//! Named instances with self-checking certificates, and seeded random games.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::concavity;
use crate::dynamics::{self, GraphMode, PathOutcome, Policy};
use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, CostFunction, LoadVector, Participation, QualityVector, Warning};
use crate::payments::{InvariantTable, ObliviousTable, PaymentFunction, SpecificTable};
use crate::rational::Rational;
use crate::solvers::{self, Scope};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceId {
    /// Two players of skill 1/3, efforts (1,2,3), winner-take-all payments.
    Counterexample1,
    /// Proportional allocation over `k + 1` qualities with two tuned skills.
    Counterexample2 { k: usize },
    /// Two players whose payments reward matching and mismatching.
    MatchingPennies,
    /// Anonymous proportional allocation, efforts `q - 1`.
    FipVoluntary { n: usize, q: usize },
    /// Anonymous proportional allocation, efforts `q`.
    FipMandatory { n: usize, q: usize },
    /// Proportional allocation with skills at least `f_2 / (f_2 - f_1)`.
    LowerBoundedSkills {
        skills: Vec<Rational>,
        efforts: Vec<Rational>,
    },
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceId::Counterexample1 => write!(f, "counterexample1"),
            InstanceId::Counterexample2 { k } => write!(f, "counterexample2(k={k})"),
            InstanceId::MatchingPennies => write!(f, "matching-pennies"),
            InstanceId::FipVoluntary { n, q } => write!(f, "fip-voluntary(n={n},Q={q})"),
            InstanceId::FipMandatory { n, q } => write!(f, "fip-mandatory(n={n},Q={q})"),
            InstanceId::LowerBoundedSkills { skills, efforts } => {
                write!(f, "lower-bounded(skills={skills:?},efforts={efforts:?})")
            }
        }
    }
}

/// A property an instance is expected to have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    NoPne,
    /// Closed sequence of profiles, consecutive ones joined by improvement
    /// steps.
    CycleInGraph(Vec<QualityVector>),
    /// Best-response dynamics from the first profile runs this closed cycle.
    BestResponseCycle(Vec<QualityVector>),
    /// The anonymous improvement graph has no cycle.
    Acyclic,
    /// The anonymous improvement graph has exactly these sinks.
    AnonymousSinks(Vec<LoadVector>),
    /// Every improvement step lowers the deviator's quality.
    NoUpwardMoves,
    IsPne(QualityVector),
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::NoPne => write!(f, "no pure Nash equilibrium"),
            Claim::CycleInGraph(c) => write!(f, "improvement cycle {}", join(c)),
            Claim::BestResponseCycle(c) => write!(f, "best-response cycle {}", join(c)),
            Claim::Acyclic => write!(f, "improvement graph acyclic"),
            Claim::AnonymousSinks(s) => write!(f, "sinks {}", join(s)),
            Claim::NoUpwardMoves => write!(f, "no improvement step raises quality"),
            Claim::IsPne(p) => write!(f, "{p} is a pure Nash equilibrium"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(" -> ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedInstance {
    pub id: InstanceId,
    pub game: ContestGame,
    pub claims: Vec<Claim>,
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn qv(choices: &[usize]) -> QualityVector {
    QualityVector::from_one_based(choices).expect("one-based literal")
}

pub fn build(id: InstanceId) -> Result<NamedInstance> {
    match id {
        InstanceId::Counterexample1 => counterexample1(),
        InstanceId::Counterexample2 { k } => counterexample2(k),
        InstanceId::MatchingPennies => matching_pennies(),
        InstanceId::FipVoluntary { n, q } => fip(n, q, Participation::Voluntary),
        InstanceId::FipMandatory { n, q } => fip(n, q, Participation::Mandatory),
        InstanceId::LowerBoundedSkills { skills, efforts } => lower_bounded(skills, efforts),
    }
}

fn counterexample1() -> Result<NamedInstance> {
    let n = 2;
    let q = 3;
    // The top occupied quality shares a prize of 1; everyone else gets 0.
    let table = InvariantTable::from_fn(n, q, |own, loads| {
        let top = (0..q).rev().find(|&c| loads.get(c) > 0).expect("occupied");
        if own == top {
            Rational::one() / Rational::from(loads.get(top))
        } else {
            Rational::zero()
        }
    });
    let game = ContestGame::new(
        vec![r(1, 3), r(1, 3)],
        vec![r(1, 1), r(2, 1), r(3, 1)],
        Participation::Mandatory,
        CostFunction::Product,
        PaymentFunction::PlayerInvariant(table),
    )?;
    let cycle: Vec<QualityVector> = [[1, 2], [3, 2], [3, 1], [2, 1], [2, 3], [1, 3], [1, 2]]
        .iter()
        .map(|c| qv(c))
        .collect();
    Ok(NamedInstance {
        id: InstanceId::Counterexample1,
        game,
        claims: vec![
            Claim::NoPne,
            Claim::CycleInGraph(cycle.clone()),
            Claim::BestResponseCycle(cycle),
        ],
    })
}

/// Skills `1/(4k - 2 + 1/(k+1))` and `1/(4k + 2 + 1/(k+1))`.
pub fn counterexample2_skills(k: usize) -> (Rational, Rational) {
    let k = k as i64;
    let tail = r(1, k + 1);
    let s1 = (Rational::from(4 * k - 2) + &tail)
        .recip()
        .expect("positive");
    let s2 = (Rational::from(4 * k + 2) + &tail)
        .recip()
        .expect("positive");
    (s1, s2)
}

fn counterexample2(k: usize) -> Result<NamedInstance> {
    if k < 2 {
        return Err(Error::invalid_game(format!(
            "counterexample2 needs k >= 2, got {k}"
        )));
    }
    let (s1, s2) = counterexample2_skills(k);
    let game = ContestGame::new(
        vec![s1, s2],
        (1..=k as i64 + 1).map(Rational::from).collect(),
        Participation::Mandatory,
        CostFunction::Product,
        PaymentFunction::Proportional,
    )?;
    let cycle = vec![
        qv(&[k, k + 1]),
        qv(&[k - 1, k + 1]),
        qv(&[k - 1, k]),
        qv(&[k, k]),
        qv(&[k, k + 1]),
    ];
    Ok(NamedInstance {
        id: InstanceId::Counterexample2 { k },
        game,
        claims: vec![Claim::NoPne, Claim::CycleInGraph(cycle)],
    })
}

fn matching_pennies() -> Result<NamedInstance> {
    let high = Rational::from(1000i64);
    let low = Rational::from(10i64);
    // Player 1 is paid well when the qualities differ, player 2 when they
    // match.
    let table = SpecificTable::by_profile_fn(2, 2, |i, p| {
        let matched = p.get(0) == p.get(1);
        if matched == (i == 1) {
            high.clone()
        } else {
            low.clone()
        }
    });
    let game = ContestGame::new(
        vec![Rational::one(), Rational::one()],
        vec![r(1, 1), r(2, 1)],
        Participation::Mandatory,
        CostFunction::Product,
        PaymentFunction::PlayerSpecific(table),
    )?;
    let cycle = vec![
        qv(&[1, 2]),
        qv(&[1, 1]),
        qv(&[2, 1]),
        qv(&[2, 2]),
        qv(&[1, 2]),
    ];
    Ok(NamedInstance {
        id: InstanceId::MatchingPennies,
        game,
        claims: vec![Claim::NoPne, Claim::BestResponseCycle(cycle)],
    })
}

fn fip(n: usize, q: usize, participation: Participation) -> Result<NamedInstance> {
    if n < 2 || q < 2 {
        return Err(Error::invalid_game("need n >= 2 and Q >= 2"));
    }
    let offset = match participation {
        Participation::Voluntary => 0,
        Participation::Mandatory => 1,
    };
    let game = ContestGame::new(
        vec![Rational::one(); n],
        (0..q as i64).map(|c| Rational::from(c + offset)).collect(),
        participation,
        CostFunction::Product,
        PaymentFunction::Proportional,
    )?;
    let mut all_low = vec![0usize; q];
    all_low[0] = n;
    let mut sinks = vec![LoadVector::from_counts_unchecked(all_low.clone())];
    let mut claims = vec![Claim::Acyclic];
    let id = match participation {
        Participation::Voluntary => {
            let mut one_up = all_low;
            one_up[0] = n - 1;
            one_up[1] = 1;
            sinks.push(LoadVector::from_counts_unchecked(one_up));
            claims.push(Claim::NoUpwardMoves);
            InstanceId::FipVoluntary { n, q }
        }
        Participation::Mandatory => InstanceId::FipMandatory { n, q },
    };
    claims.insert(1, Claim::AnonymousSinks(sinks));
    Ok(NamedInstance { id, game, claims })
}

fn lower_bounded(skills: Vec<Rational>, efforts: Vec<Rational>) -> Result<NamedInstance> {
    let n = skills.len();
    let game = ContestGame::new(
        skills.clone(),
        efforts.clone(),
        Participation::Mandatory,
        CostFunction::Product,
        PaymentFunction::Proportional,
    )?;
    Ok(NamedInstance {
        id: InstanceId::LowerBoundedSkills { skills, efforts },
        game,
        claims: vec![Claim::IsPne(QualityVector::from_zero_based_unchecked(
            vec![0; n],
        ))],
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimResult {
    pub claim: Claim,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub results: Vec<ClaimResult>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Re-derives every claim of `instance` by brute force, graph analysis or
/// dynamics.
pub fn verify_certificate(instance: &NamedInstance, limits: &Limits) -> Result<CertificateReport> {
    let game = &instance.game;
    let mut results = Vec::new();
    for claim in &instance.claims {
        let (passed, detail) = match claim {
            Claim::NoPne => {
                let brute = solvers::brute_force_pne(game, limits, Scope::First)?;
                match brute.equilibria.first() {
                    None => (true, format!("{} profiles scanned", brute.scanned)),
                    Some(p) => (false, format!("{p} is an equilibrium")),
                }
            }
            Claim::CycleInGraph(cycle) => {
                let graph = dynamics::ImprovementGraph::build(game, GraphMode::Full, limits)?;
                let missing = cycle
                    .windows(2)
                    .find(|w| !graph.has_edge(w[0].as_slice(), w[1].as_slice()));
                match missing {
                    None => (true, format!("{} edges present", cycle.len() - 1)),
                    Some(w) => (false, format!("no improvement step {} -> {}", w[0], w[1])),
                }
            }
            Claim::BestResponseCycle(cycle) => {
                let out = dynamics::run_improvement_path(
                    game,
                    &cycle[0],
                    Policy::BestResponse,
                    cycle.len() * 4,
                )?;
                match out {
                    PathOutcome::CycleDetected { cycle: got } if got == *cycle => {
                        (true, format!("period {}", got.len() - 1))
                    }
                    other => (false, format!("dynamics gave {other:?}")),
                }
            }
            Claim::Acyclic => {
                let (graph, analysis) =
                    dynamics::analyze_graph(game, GraphMode::Anonymous, limits)?;
                match analysis.cycle {
                    None => (true, format!("{} nodes", graph.node_count())),
                    Some(c) => (
                        false,
                        format!(
                            "cycle {}",
                            c.iter()
                                .map(|&v| graph.label(v))
                                .collect::<Vec<_>>()
                                .join(" -> ")
                        ),
                    ),
                }
            }
            Claim::AnonymousSinks(expected) => {
                let (graph, analysis) =
                    dynamics::analyze_graph(game, GraphMode::Anonymous, limits)?;
                let mut got: Vec<LoadVector> = analysis
                    .sinks
                    .iter()
                    .map(|&v| graph.loads(v, game.q()))
                    .collect();
                let mut want = expected.clone();
                got.sort();
                want.sort();
                (got == want, format!("sinks {}", join(&got)))
            }
            Claim::NoUpwardMoves => {
                let report = dynamics::check_no_switch_lemma(game, limits)?;
                (
                    report.holds && report.boundary_quiet,
                    format!(
                        "{} edges checked, {} upward",
                        report.edges_checked,
                        report.violations.len()
                    ),
                )
            }
            Claim::IsPne(p) => match game.is_pne(p) {
                crate::game::PneCheck::Equilibrium => (true, "no profitable deviation".to_string()),
                crate::game::PneCheck::Deviation { player, to, gain } => (
                    false,
                    format!("player {} gains {gain} moving to {}", player + 1, to + 1),
                ),
            },
        };
        results.push(ClaimResult {
            claim: claim.clone(),
            passed,
            detail,
        });
    }
    Ok(CertificateReport { results })
}

/// Random game families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// One shared per-load payment table, normalized.
    ObliviousInvariant,
    /// Per-player payments `c_i - a_i N(own)`, certified concave.
    ConcaveSpecific,
    /// One payment `c - a N(own)` for all players, certified concave.
    ConcaveInvariant,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub q: usize,
}

pub const MAX_RANDOM_PLAYERS: usize = 8;
pub const MAX_RANDOM_QUALITIES: usize = 5;
const MAX_DRAWS: usize = 100_000;

/// A reproducible random game. Tables are certified before return:
/// normalization for every family, concavity for the concave families.
pub fn random_game(seed: u64, shape: Shape, family: Family) -> Result<ContestGame> {
    let Shape { n, q } = shape;
    if !(2..=MAX_RANDOM_PLAYERS).contains(&n) || !(2..=MAX_RANDOM_QUALITIES).contains(&q) {
        return Err(Error::precondition(format!(
            "random games need 2 <= n <= {MAX_RANDOM_PLAYERS} and 2 <= Q <= {MAX_RANDOM_QUALITIES}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits = Limits::default();
    for _ in 0..MAX_DRAWS {
        let game = match family {
            Family::ObliviousInvariant => draw_oblivious(&mut rng, n, q)?,
            Family::Proportional => {
                let participation = draw_participation(&mut rng);
                ContestGame::new(
                    draw_skills(&mut rng, n),
                    draw_efforts(&mut rng, q, participation),
                    participation,
                    CostFunction::Product,
                    PaymentFunction::Proportional,
                )?
            }
            Family::ConcaveSpecific | Family::ConcaveInvariant => {
                draw_concave(&mut rng, n, q, family)?
            }
        };
        let normalized = !game
            .validate(&limits)
            .iter()
            .any(|w| matches!(w, Warning::NormalizationViolated { .. }));
        let certified = match family {
            Family::ConcaveSpecific => {
                concavity::is_three_discrete_concave_specific(&game, &limits)?.holds
            }
            Family::ConcaveInvariant => {
                concavity::is_three_discrete_concave_invariant(&game, &limits)?.holds
            }
            _ => true,
        };
        if normalized && certified {
            return Ok(game);
        }
    }
    Err(Error::precondition(format!(
        "no certified draw after {MAX_DRAWS} attempts"
    )))
}

fn draw_participation(rng: &mut ChaCha8Rng) -> Participation {
    if rng.gen_bool(0.5) {
        Participation::Voluntary
    } else {
        Participation::Mandatory
    }
}

fn draw_skills(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| r(rng.gen_range(1..=6), rng.gen_range(1..=3)))
        .collect()
}

fn draw_efforts(rng: &mut ChaCha8Rng, q: usize, participation: Participation) -> Vec<Rational> {
    let mut f = match participation {
        Participation::Voluntary => Rational::zero(),
        Participation::Mandatory => r(rng.gen_range(1..=3), rng.gen_range(1..=2)),
    };
    let mut out = vec![f.clone()];
    for _ in 1..q {
        f += r(rng.gen_range(1..=3), rng.gen_range(1..=2));
        out.push(f.clone());
    }
    out
}

fn draw_oblivious(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Result<ContestGame> {
    let participation = draw_participation(rng);
    let skills = draw_skills(rng, n);
    let efforts = draw_efforts(rng, q, participation);
    let cost = if rng.gen_bool(0.5) {
        CostFunction::Product
    } else {
        CostFunction::Table(
            (0..n)
                .map(|_| {
                    (0..q)
                        .map(|c| {
                            if c == 0 && participation == Participation::Voluntary {
                                Rational::zero()
                            } else {
                                r(rng.gen_range(0..=8), rng.gen_range(1..=4))
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    };
    let raw: Vec<Vec<Rational>> = (0..q)
        .map(|_| (0..n).map(|_| r(rng.gen_range(0..=10), 10)).collect())
        .collect();
    // Largest total payout over all load vectors; scale it down to 1.
    let peak = enumerate::load_vectors(n, q)
        .iter()
        .map(|loads| {
            (0..q)
                .filter(|&c| loads.get(c) > 0)
                .map(|c| Rational::from(loads.get(c)) * &raw[c][loads.get(c) - 1])
                .sum::<Rational>()
        })
        .max()
        .expect("load vectors exist");
    let per_load = if peak > Rational::one() {
        raw.into_iter()
            .map(|row| row.into_iter().map(|v| v / &peak).collect())
            .collect()
    } else {
        raw
    };
    ContestGame::new(
        skills,
        efforts,
        participation,
        cost,
        PaymentFunction::Oblivious(ObliviousTable::shared(per_load, n)),
    )
}

fn draw_concave(rng: &mut ChaCha8Rng, n: usize, q: usize, family: Family) -> Result<ContestGame> {
    let participation = draw_participation(rng);
    let skills = draw_skills(rng, n);
    let efforts = draw_efforts(rng, q, participation);
    let cost = if rng.gen_bool(0.5) {
        CostFunction::Product
    } else {
        // s_i * g_q with g non-decreasing, ties allowed.
        let mut g = match participation {
            Participation::Voluntary => Rational::zero(),
            Participation::Mandatory => r(rng.gen_range(0..=2), 2),
        };
        let mut steps = vec![g.clone()];
        for _ in 1..q {
            g += r(rng.gen_range(0..=2), 2);
            steps.push(g.clone());
        }
        CostFunction::Table(
            skills
                .iter()
                .map(|s| steps.iter().map(|g| s * g).collect())
                .collect(),
        )
    };
    let scale = (4 * n) as i64;
    let slope_scale = (4 * n * n) as i64;
    let mut draw_affine = || -> (Rational, Rational) {
        (
            r(rng.gen_range(2..=4), scale),
            r(rng.gen_range(0..=2), slope_scale),
        )
    };
    let payment = match family {
        Family::ConcaveSpecific => {
            let params: Vec<(Rational, Rational)> = (0..n).map(|_| draw_affine()).collect();
            PaymentFunction::PlayerSpecific(SpecificTable::by_loads_fn(n, q, |i, own, loads| {
                let (c, a) = &params[i];
                c - a * Rational::from(loads.get(own))
            }))
        }
        _ => {
            let (c, a) = draw_affine();
            PaymentFunction::PlayerInvariant(InvariantTable::from_fn(n, q, |own, loads| {
                &c - &a * Rational::from(loads.get(own))
            }))
        }
    };
    ContestGame::new(skills, efforts, participation, cost, payment)
}
