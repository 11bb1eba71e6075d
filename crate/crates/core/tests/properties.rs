use std::collections::BTreeSet;

use contestq::dynamics::{self, GraphMode};
use contestq::enumerate;
use contestq::instances::{self, Family, Shape};
use contestq::payments::{self, InvariantTable, ObliviousTable};
use contestq::potential::{self, PotentialCache};
use contestq::solvers::{self, Scope};
use contestq::{
    ContestGame, CostFunction, Limits, Participation, PaymentFunction, QualityVector, Rational,
};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (1i64..=6, 1i64..=3).prop_map(|(p, q)| Rational::new(p, q))
}

fn efforts(q: usize, voluntary: bool) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(rational(), q).prop_map(move |steps| {
        let mut out = Vec::with_capacity(q);
        let mut f = if voluntary {
            Rational::zero()
        } else {
            steps[0].clone()
        };
        out.push(f.clone());
        for step in &steps[1..] {
            f += step;
            out.push(f.clone());
        }
        out
    })
}

#[derive(Debug, Clone)]
enum Kind {
    Proportional,
    EqualSharing,
    KTop(usize),
}

/// Small games with built-in payment families and product costs.
fn builtin_game(max_n: usize, max_q: usize) -> impl Strategy<Value = ContestGame> {
    (2..=max_n, 2..=max_q, any::<bool>())
        .prop_flat_map(|(n, q, voluntary)| {
            (
                proptest::collection::vec(rational(), n),
                efforts(q, voluntary),
                Just(voluntary),
                prop_oneof![
                    Just(Kind::Proportional),
                    Just(Kind::EqualSharing),
                    (1..=q).prop_map(Kind::KTop),
                ],
            )
        })
        .prop_map(|(skills, efforts, voluntary, kind)| {
            let payment = match kind {
                Kind::Proportional => PaymentFunction::Proportional,
                Kind::EqualSharing => PaymentFunction::EqualSharing,
                Kind::KTop(k) => PaymentFunction::KTop { k },
            };
            let participation = if voluntary {
                Participation::Voluntary
            } else {
                Participation::Mandatory
            };
            ContestGame::new(
                skills,
                efforts,
                participation,
                CostFunction::Product,
                payment,
            )
            .unwrap()
        })
}

/// Anonymous games: equal skills, so load vectors determine utilities.
fn anonymous_game() -> impl Strategy<Value = ContestGame> {
    (builtin_game(4, 3), rational()).prop_map(|(g, s)| {
        ContestGame::new(
            vec![s; g.n()],
            g.efforts().to_vec(),
            g.participation(),
            CostFunction::Product,
            g.payment_function().clone(),
        )
        .unwrap()
    })
}

/// Shared per-load tables, the class with an exact potential.
fn potential_game() -> impl Strategy<Value = ContestGame> {
    (2..=4usize, 2..=3usize)
        .prop_flat_map(|(n, q)| {
            (
                proptest::collection::vec(rational(), n),
                efforts(q, false),
                proptest::collection::vec(proptest::collection::vec(0i64..=4, n), q),
            )
        })
        .prop_map(|(skills, efforts, raw)| {
            let n = skills.len();
            let per_load = raw
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|v| Rational::new(v, 4 * n as i64))
                        .collect()
                })
                .collect();
            ContestGame::new(
                skills,
                efforts,
                Participation::Mandatory,
                CostFunction::Product,
                PaymentFunction::Oblivious(ObliviousTable::shared(per_load, n)),
            )
            .unwrap()
        })
}

fn equilibria(game: &ContestGame) -> Vec<QualityVector> {
    solvers::brute_force_pne(game, &Limits::default(), Scope::All)
        .unwrap()
        .equilibria
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn load_vectors_count_players(n in 1usize..=6, q in 1usize..=4) {
        let all = enumerate::load_vectors(n, q);
        prop_assert_eq!(all.len() as u128, enumerate::binomial((n + q - 1) as u64, (q - 1) as u64));
        let distinct: BTreeSet<Vec<usize>> = all.iter().map(|l| l.as_slice().to_vec()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        for l in &all {
            prop_assert_eq!(l.total(), n);
        }
    }

    #[test]
    fn profile_loads_sum_to_n(n in 1usize..=5, q in 1usize..=4, idx in any::<u64>()) {
        let total = enumerate::profile_count(n, q) as u64;
        let p = enumerate::profile_at(idx % total, n, q);
        prop_assert_eq!(enumerate::profile_index(&p, q), idx % total);
        prop_assert_eq!(contestq::game::load_of(&p, q).total(), n);
    }

    #[test]
    fn proportional_payments_sum_to_one(game in builtin_game(4, 3)) {
        let game = game.with_payment(PaymentFunction::Proportional).unwrap();
        for p in enumerate::profiles(game.n(), game.q()) {
            let total: Rational = (0..game.n()).map(|i| game.payment(&p, i)).sum();
            let all_at_zero = (0..game.n()).all(|i| game.efforts()[p.get(i)].is_zero());
            prop_assert_eq!(total, if all_at_zero { Rational::zero() } else { Rational::one() });
        }
    }

    #[test]
    fn sharing_constants_are_tight(game in builtin_game(5, 4)) {
        prop_assume!(!matches!(game.payment_function(), PaymentFunction::Proportional));
        // Brute-force maximum of the unnormalized total over every profile.
        let eligible = |c: usize| match game.payment_function() {
            PaymentFunction::KTop { k } => c + k >= game.q(),
            _ => true,
        };
        let mut peak = Rational::zero();
        for p in enumerate::profiles(game.n(), game.q()) {
            let occupied: BTreeSet<usize> = p.as_slice().iter().copied().filter(|&c| eligible(c)).collect();
            let raw: Rational = occupied.iter().map(|&c| game.efforts()[c].clone()).sum();
            if raw > peak {
                peak = raw;
            }
            let paid: Rational = (0..game.n()).map(|i| game.payment(&p, i)).sum();
            prop_assert!(paid <= Rational::one());
        }
        prop_assert_eq!(game.normalization_constant().cloned(), peak.recip());
        prop_assert!(game.validate(&Limits::default()).is_empty());
    }

    #[test]
    fn builtin_classes(game in builtin_game(4, 3)) {
        let class = payments::classify(&game, &Limits::default()).unwrap();
        prop_assert!(class.player_invariant);
        // Oblivious iff each player's payment is a function of (own quality, its load).
        let mut seen = std::collections::BTreeMap::new();
        let mut oblivious = true;
        for p in enumerate::profiles(game.n(), game.q()) {
            let loads = game.load_of(&p);
            for i in 0..game.n() {
                let key = (i, p.get(i), loads.get(p.get(i)));
                let value = game.payment(&p, i);
                if *seen.entry(key).or_insert_with(|| value.clone()) != value {
                    oblivious = false;
                }
            }
        }
        prop_assert_eq!(class.oblivious, oblivious);
        if !matches!(game.payment_function(), PaymentFunction::Proportional) {
            prop_assert!(oblivious);
        }
    }

    #[test]
    fn pne_iff_no_improvement_step(game in builtin_game(3, 3)) {
        for p in enumerate::profiles(game.n(), game.q()) {
            let steps = dynamics::improvement_steps(&game, &p);
            prop_assert_eq!(game.is_pne(&p).is_equilibrium(), steps.is_empty());
            for s in steps {
                let moved = p.with(s.player, s.to);
                prop_assert_eq!(game.utility(&moved, s.player) - game.utility(&p, s.player), s.gain.clone());
                prop_assert!(s.gain.is_positive());
            }
        }
    }

    #[test]
    fn full_graph_sinks_are_equilibria(game in builtin_game(3, 3)) {
        let (graph, analysis) = dynamics::analyze_graph(&game, GraphMode::Full, &Limits::default()).unwrap();
        let sinks: Vec<Vec<usize>> = analysis.sinks.iter().map(|&v| graph.node(v).to_vec()).collect();
        let pne: Vec<Vec<usize>> = equilibria(&game).iter().map(|p| p.as_slice().to_vec()).collect();
        prop_assert_eq!(sinks, pne);
    }

    #[test]
    fn anonymous_and_full_graphs_agree(game in anonymous_game()) {
        let limits = Limits::default();
        let (full, fa) = dynamics::analyze_graph(&game, GraphMode::Full, &limits).unwrap();
        let (anon, aa) = dynamics::analyze_graph(&game, GraphMode::Anonymous, &limits).unwrap();
        prop_assert_eq!(fa.acyclic, aa.acyclic);
        let q = game.q();
        let full_sinks: BTreeSet<Vec<usize>> = fa.sinks.iter().map(|&v| full.loads(v, q).as_slice().to_vec()).collect();
        let anon_sinks: BTreeSet<Vec<usize>> = aa.sinks.iter().map(|&v| anon.node(v).to_vec()).collect();
        prop_assert_eq!(full_sinks, anon_sinks);
    }

    #[test]
    fn potential_maximizers_are_equilibria(game in potential_game()) {
        let cache = PotentialCache::build(&game, &Limits::default()).unwrap();
        let all: Vec<QualityVector> = enumerate::profiles(game.n(), game.q()).collect();
        let best = all.iter().map(|p| cache.potential(&game, p)).max().unwrap();
        for p in &all {
            if cache.potential(&game, p) == best {
                prop_assert!(game.is_pne(p).is_equilibrium(), "{} maximizes but is not stable", p);
            }
        }
        prop_assert_eq!(cache.gamma(0, 0), &Rational::zero());
    }

    #[test]
    fn potential_rises_along_edges(game in potential_game()) {
        let cache = PotentialCache::build(&game, &Limits::default()).unwrap();
        let (graph, analysis) = dynamics::analyze_graph(&game, GraphMode::Full, &Limits::default()).unwrap();
        prop_assert!(analysis.acyclic);
        for v in 0..graph.node_count() {
            let from = QualityVector::from_zero_based_unchecked(graph.node(v).to_vec());
            for e in graph.edges(v) {
                let to = QualityVector::from_zero_based_unchecked(graph.node(e.to).to_vec());
                prop_assert_eq!(cache.potential(&game, &to) - cache.potential(&game, &from), e.gain.clone());
            }
        }
    }

    #[test]
    fn ascent_reaches_equilibrium(game in potential_game(), seed in any::<u64>()) {
        let total = enumerate::profile_count(game.n(), game.q()) as u64;
        let start = enumerate::profile_at(seed % total, game.n(), game.q());
        let ascent = potential::potential_ascent(&game, &start, &Limits::default()).unwrap();
        prop_assert!(game.is_pne(&ascent.profile).is_equilibrium());
        prop_assert!((ascent.steps as u64) < total);
    }

    #[test]
    fn sharing_families_have_potentials(game in builtin_game(3, 3), start in any::<u64>()) {
        prop_assume!(!matches!(game.payment_function(), PaymentFunction::Proportional));
        let limits = Limits::default();
        let cache = PotentialCache::build(&game, &limits).unwrap();
        let total = enumerate::profile_count(game.n(), game.q()) as u64;
        let p = enumerate::profile_at(start % total, game.n(), game.q());
        for i in 0..game.n() {
            for c in 0..game.q() {
                let moved = p.with(i, c);
                prop_assert_eq!(
                    cache.potential(&game, &moved) - cache.potential(&game, &p),
                    game.utility(&moved, i) - game.utility(&p, i)
                );
            }
        }
    }

    #[test]
    fn random_games_are_reproducible(seed in any::<u64>(), n in 2usize..=4, q in 2usize..=3) {
        for family in [Family::ObliviousInvariant, Family::ConcaveSpecific, Family::ConcaveInvariant, Family::Proportional] {
            let a = instances::random_game(seed, Shape { n, q }, family).unwrap();
            let b = instances::random_game(seed, Shape { n, q }, family).unwrap();
            prop_assert_eq!(&a, &b);
            let normalized = a
                .validate(&Limits::default())
                .iter()
                .all(|w| !matches!(w, contestq::game::Warning::NormalizationViolated { .. }));
            prop_assert!(normalized);
        }
    }
}

#[test]
fn invariant_table_matches_closed_form() {
    // The same sharing rule, once closed-form and once tabulated.
    let game = ContestGame::new(
        vec![Rational::one(); 3],
        vec![Rational::from(1), Rational::from(2), Rational::from(4)],
        Participation::Mandatory,
        CostFunction::Product,
        PaymentFunction::EqualSharing,
    )
    .unwrap();
    let c = game.normalization_constant().unwrap().clone();
    let efforts = game.efforts().to_vec();
    let table = InvariantTable::from_fn(3, 3, |own, loads| {
        &c * &efforts[own] / Rational::from(loads.get(own))
    });
    let tabulated = game
        .with_payment(PaymentFunction::PlayerInvariant(table))
        .unwrap();
    for p in enumerate::profiles(3, 3) {
        assert_eq!(game.utilities(&p), tabulated.utilities(&p));
    }
    assert_eq!(equilibria(&game), equilibria(&tabulated));
}
