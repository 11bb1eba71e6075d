//! Improvement steps, improvement paths and the improvement graph.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::{self, Limits};
use crate::error::{Error, Result};
use crate::game::{ContestGame, CostFunction, LoadVector, QualityVector};
use crate::payments::{self, PaymentFunction};
use crate::rational::Rational;

/// A strictly profitable unilateral move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub player: usize,
    pub to: usize,
    pub gain: Rational,
}

/// All strictly improving unilateral moves out of `profile`, by player then
/// target quality.
pub fn improvement_steps(game: &ContestGame, profile: &QualityVector) -> Vec<Step> {
    let loads = game.load_of(profile);
    let mut steps = Vec::new();
    for player in 0..game.n() {
        let current = game.utility_with_loads(profile, &loads, player);
        for to in 0..game.q() {
            if to == profile.get(player) {
                continue;
            }
            let gain = game.deviation_utility(profile, player, to) - &current;
            if gain.is_positive() {
                steps.push(Step { player, to, gain });
            }
        }
    }
    steps
}

/// How the next move of an improvement path is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// The first improving move, players in index order, qualities ascending.
    FirstImproving,
    /// The first player who can improve moves to a best response.
    BestResponse,
    /// A uniformly random improving move from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOutcome {
    /// Reached an equilibrium after `steps` moves.
    Converged {
        profile: QualityVector,
        steps: usize,
    },
    /// Revisited a profile; `cycle` starts and ends at the repeated profile.
    CycleDetected { cycle: Vec<QualityVector> },
    /// Stopped after `max_steps` moves.
    Truncated {
        profile: QualityVector,
        steps: usize,
    },
}

/// Walks improvement steps from `start` under `policy`.
pub fn run_improvement_path(
    game: &ContestGame,
    start: &QualityVector,
    policy: Policy,
    max_steps: usize,
) -> Result<PathOutcome> {
    game.check_profile(start)?;
    let mut rng = match policy {
        Policy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut path = vec![start.clone()];
    let mut seen: HashMap<QualityVector, usize> = HashMap::from([(start.clone(), 0)]);
    let mut current = start.clone();
    for steps in 0.. {
        let next = match policy {
            Policy::FirstImproving => first_improving(game, &current),
            Policy::BestResponse => match game.is_pne(&current) {
                crate::game::PneCheck::Equilibrium => None,
                crate::game::PneCheck::Deviation { player, to, .. } => {
                    Some(current.with(player, to))
                }
            },
            Policy::Random(_) => {
                let options = improvement_steps(game, &current);
                options
                    .choose(rng.as_mut().expect("seeded for random policy"))
                    .map(|s| current.with(s.player, s.to))
            }
        };
        let Some(next) = next else {
            return Ok(PathOutcome::Converged {
                profile: current,
                steps,
            });
        };
        if steps == max_steps {
            return Ok(PathOutcome::Truncated {
                profile: current,
                steps,
            });
        }
        if let Some(&pos) = seen.get(&next) {
            let mut cycle = path.split_off(pos);
            cycle.push(next);
            return Ok(PathOutcome::CycleDetected { cycle });
        }
        seen.insert(next.clone(), path.len());
        path.push(next.clone());
        current = next;
    }
    unreachable!("the step loop only exits by returning")
}

fn first_improving(game: &ContestGame, profile: &QualityVector) -> Option<QualityVector> {
    for player in 0..game.n() {
        let current = game.utility(profile, player);
        for to in 0..game.q() {
            if to != profile.get(player) && game.deviation_utility(profile, player, to) > current {
                return Some(profile.with(player, to));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// One node per full profile.
    Full,
    /// One node per load vector; needs interchangeable players.
    Anonymous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub to: usize,
    /// The deviating player in full mode.
    pub player: Option<usize>,
    pub from_quality: usize,
    pub to_quality: usize,
    pub gain: Rational,
}

/// Directed graph of improvement steps.
#[derive(Debug, Clone)]
pub struct ImprovementGraph {
    mode: GraphMode,
    /// Zero-based profile (full mode) or load counts (anonymous mode).
    nodes: Vec<Vec<usize>>,
    edges: Vec<Vec<Edge>>,
    index: HashMap<Vec<usize>, usize>,
}

/// Whether players are interchangeable: equal skills, equal cost rows, and a
/// payment that is one function of own quality and loads.
pub fn anonymous_mode_valid(game: &ContestGame, limits: &Limits) -> Result<bool> {
    let skills = game.skills();
    if skills.windows(2).any(|w| w[0] != w[1]) {
        return Ok(false);
    }
    if let CostFunction::Table(rows) = game.cost_function() {
        if rows.windows(2).any(|w| w[0] != w[1]) {
            return Ok(false);
        }
    }
    payments::is_symmetric_in_loads(game, limits)
}

impl ImprovementGraph {
    pub fn build(game: &ContestGame, mode: GraphMode, limits: &Limits) -> Result<Self> {
        let n = game.n();
        let q = game.q();
        let (nodes, edges): (Vec<Vec<usize>>, Vec<Vec<Edge>>) = match mode {
            GraphMode::Full => {
                limits.check_nodes("improvement graph", enumerate::profile_count(n, q))?;
                let total = enumerate::profile_count(n, q) as u64;
                (0..total)
                    .into_par_iter()
                    .map(|idx| {
                        let profile = enumerate::profile_at(idx, n, q);
                        let edges = improvement_steps(game, &profile)
                            .into_iter()
                            .map(|s| Edge {
                                to: enumerate::profile_index(&profile.with(s.player, s.to), q)
                                    as usize,
                                player: Some(s.player),
                                from_quality: profile.get(s.player),
                                to_quality: s.to,
                                gain: s.gain,
                            })
                            .collect();
                        (profile.as_slice().to_vec(), edges)
                    })
                    .unzip()
            }
            GraphMode::Anonymous => {
                limits.check_nodes(
                    "anonymous improvement graph",
                    enumerate::load_vector_count(n, q),
                )?;
                if !anonymous_mode_valid(game, limits)? {
                    return Err(Error::precondition(
                        "anonymous mode needs equal skills, equal costs and a player-invariant payment",
                    ));
                }
                let all = enumerate::load_vectors(n, q);
                let index: HashMap<Vec<usize>, usize> = all
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_slice().to_vec(), i))
                    .collect();
                all.par_iter()
                    .map(|loads| {
                        let edges = anonymous_edges(game, loads, &index);
                        (loads.as_slice().to_vec(), edges)
                    })
                    .unzip()
            }
        };
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(ImprovementGraph {
            mode,
            nodes,
            edges,
            index,
        })
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Zero-based profile or load counts of a node.
    pub fn node(&self, idx: usize) -> &[usize] {
        &self.nodes[idx]
    }

    pub fn edges(&self, idx: usize) -> &[Edge] {
        &self.edges[idx]
    }

    /// Node for a zero-based profile (full mode) or load counts (anonymous).
    pub fn find(&self, key: &[usize]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn has_edge(&self, from: &[usize], to: &[usize]) -> bool {
        match (self.find(from), self.find(to)) {
            (Some(a), Some(b)) => self.edges[a].iter().any(|e| e.to == b),
            _ => false,
        }
    }

    /// Text label: a one-based profile or a load vector.
    pub fn label(&self, idx: usize) -> String {
        match self.mode {
            GraphMode::Full => {
                QualityVector::from_zero_based_unchecked(self.nodes[idx].clone()).to_string()
            }
            GraphMode::Anonymous => {
                LoadVector::from_counts_unchecked(self.nodes[idx].clone()).to_string()
            }
        }
    }

    /// Loads of a node in either mode.
    pub fn loads(&self, idx: usize, q: usize) -> LoadVector {
        match self.mode {
            GraphMode::Full => crate::game::load_of(
                &QualityVector::from_zero_based_unchecked(self.nodes[idx].clone()),
                q,
            ),
            GraphMode::Anonymous => LoadVector::from_counts_unchecked(self.nodes[idx].clone()),
        }
    }

    /// Acyclicity test by depth-first search with three colors, plus all
    /// sinks. The first back edge found gives the cycle witness.
    pub fn analyze(&self) -> GraphAnalysis {
        let sinks: Vec<usize> = (0..self.nodes.len())
            .filter(|&v| self.edges[v].is_empty())
            .collect();
        let cycle = self.find_cycle();
        GraphAnalysis {
            acyclic: cycle.is_none(),
            cycle,
            sinks,
        }
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color = vec![Color::White; self.nodes.len()];
        for root in 0..self.nodes.len() {
            if color[root] != Color::White {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            color[root] = Color::Gray;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(edge) = self.edges[node].get(*next) {
                    *next += 1;
                    match color[edge.to] {
                        Color::White => {
                            color[edge.to] = Color::Gray;
                            stack.push((edge.to, 0));
                        }
                        Color::Gray => {
                            let start = stack
                                .iter()
                                .position(|&(v, _)| v == edge.to)
                                .expect("gray nodes are on the stack");
                            let mut cycle: Vec<usize> =
                                stack[start..].iter().map(|&(v, _)| v).collect();
                            cycle.push(edge.to);
                            return Some(cycle);
                        }
                        Color::Black => {}
                    }
                } else {
                    color[node] = Color::Black;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Graphviz rendering; sinks are double circles.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph improvement {\n");
        for idx in 0..self.nodes.len() {
            let shape = if self.edges[idx].is_empty() {
                ", shape=doublecircle"
            } else {
                ""
            };
            let _ = writeln!(out, "  n{idx} [label=\"{}\"{shape}];", self.label(idx));
        }
        for (idx, edges) in self.edges.iter().enumerate() {
            for e in edges {
                let label = match e.player {
                    Some(p) => format!("p{}: {}->{}", p + 1, e.from_quality + 1, e.to_quality + 1),
                    None => format!("{}->{}", e.from_quality + 1, e.to_quality + 1),
                };
                let _ = writeln!(out, "  n{idx} -> n{} [label=\"{label}\"];", e.to);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn anonymous_edges(
    game: &ContestGame,
    loads: &LoadVector,
    index: &HashMap<Vec<usize>, usize>,
) -> Vec<Edge> {
    let q = game.q();
    let mut choices = Vec::with_capacity(game.n());
    for (quality, &m) in loads.as_slice().iter().enumerate() {
        choices.extend(std::iter::repeat_n(quality, m));
    }
    let profile = QualityVector::from_zero_based_unchecked(choices);
    let mut edges = Vec::new();
    let mut player = 0;
    for from in 0..q {
        if loads.get(from) == 0 {
            continue;
        }
        let current = game.utility_with_loads(&profile, loads, player);
        for to in 0..q {
            if to == from {
                continue;
            }
            let gain = game.deviation_utility(&profile, player, to) - &current;
            if gain.is_positive() {
                let target = loads.moved(from, to);
                edges.push(Edge {
                    to: index[target.as_slice()],
                    player: None,
                    from_quality: from,
                    to_quality: to,
                    gain,
                });
            }
        }
        player += loads.get(from);
    }
    edges
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAnalysis {
    pub acyclic: bool,
    /// Nodes without outgoing edges: the equilibria.
    pub sinks: Vec<usize>,
    /// Closed node sequence, first node repeated at the end.
    pub cycle: Option<Vec<usize>>,
}

/// Builds and analyzes the improvement graph.
pub fn analyze_graph(
    game: &ContestGame,
    mode: GraphMode,
    limits: &Limits,
) -> Result<(ImprovementGraph, GraphAnalysis)> {
    let graph = ImprovementGraph::build(game, mode, limits)?;
    let analysis = graph.analyze();
    Ok((graph, analysis))
}

/// An improvement edge that moves the deviator to a higher quality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpwardMove {
    pub from: String,
    pub to: String,
    pub from_quality: usize,
    pub to_quality: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoSwitchReport {
    /// No improvement edge raises the deviator's quality.
    pub holds: bool,
    pub violations: Vec<UpwardMove>,
    /// No improvement edge links loads `(n-1,1,0,..)` and `(n,0,..)` in
    /// either direction.
    pub boundary_quiet: bool,
    pub mode: GraphMode,
    pub edges_checked: usize,
}

/// Checks that every improvement edge lowers the deviator's quality.
///
/// Uses the anonymous graph when players are interchangeable and the full
/// profile graph otherwise.
pub fn check_no_switch_lemma(game: &ContestGame, limits: &Limits) -> Result<NoSwitchReport> {
    if *game.payment_function() != PaymentFunction::Proportional {
        return Err(Error::precondition(
            "the no-switch check needs proportional allocation",
        ));
    }
    let mode = if anonymous_mode_valid(game, limits)? {
        GraphMode::Anonymous
    } else {
        GraphMode::Full
    };
    let graph = ImprovementGraph::build(game, mode, limits)?;
    let n = game.n();
    let q = game.q();
    let mut all_low = vec![0usize; q];
    all_low[0] = n;
    let mut one_up = all_low.clone();
    one_up[0] = n - 1;
    one_up[1] = 1;
    let mut violations = Vec::new();
    let mut boundary_quiet = true;
    let mut edges_checked = 0;
    for from in 0..graph.node_count() {
        let from_loads = graph.loads(from, q);
        for e in graph.edges(from) {
            edges_checked += 1;
            if e.to_quality > e.from_quality {
                violations.push(UpwardMove {
                    from: graph.label(from),
                    to: graph.label(e.to),
                    from_quality: e.from_quality,
                    to_quality: e.to_quality,
                });
            }
            let to_loads = graph.loads(e.to, q);
            let pair = (from_loads.as_slice(), to_loads.as_slice());
            if pair == (&one_up[..], &all_low[..]) || pair == (&all_low[..], &one_up[..]) {
                boundary_quiet = false;
            }
        }
    }
    Ok(NoSwitchReport {
        holds: violations.is_empty(),
        violations,
        boundary_quiet,
        mode,
        edges_checked,
    })
}
