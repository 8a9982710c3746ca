//! Path-flow decompositions of the flow diagram into representations,
//! the two-representation construction behind non-uniqueness, candidate
//! extreme-point enumeration, and the single-crossing check.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::{path_supported, FlowDiagram};
use crate::identification::{extend_down, extend_up, BranchingWitness};
use crate::model::{LinearOrder, Menu, Mixture, Path, Universe};
use crate::Rational;

/// Default bound on the number of path orderings tried (7!).
pub const DEFAULT_ORDERING_CAP: usize = 5040;

/// Refusal threshold for supported-path enumeration.
pub const MAX_SUPPORTED_PATHS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub path: Path,
    pub order: LinearOrder,
    pub flow: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTrace {
    pub steps: Vec<TraceStep>,
    pub residual: FlowDiagram,
}

fn check_decomposable(diag: &FlowDiagram) -> Result<()> {
    diag.require_nonnegative()?;
    diag.check_conservation()
}

fn finish(universe: &Universe, steps: &[TraceStep]) -> Result<Mixture> {
    Mixture::new(
        universe.clone(),
        steps.iter().map(|s| (s.order.clone(), s.flow.clone())),
    )
}

/// Greedy decomposition: repeatedly take the smallest positive residual
/// edge, complete it to a positive path, and assign that path the edge's
/// flow. With a seed, the seed path first receives its minimum edge weight.
///
/// Ties between minimum edges go to the first edge in canonical order
/// (source cardinality desc, source bits asc, removed index asc); paths are
/// completed through smallest-index positive edges.
pub fn greedy_representation(
    diag: &FlowDiagram,
    seed: Option<&Path>,
) -> Result<(Mixture, DecompositionTrace)> {
    check_decomposable(diag)?;
    let universe = diag.universe();
    let mut residual = diag.clone();
    let mut steps = Vec::new();

    if let Some(seed) = seed {
        Path::new(universe.len(), seed.nodes().to_vec())?;
        if !path_supported(diag, seed) {
            return Err(Error::Domain(format!(
                "seed path {} is not supported",
                universe.order_label(&seed.to_order())
            )));
        }
        let flow = residual.path_min(seed);
        residual.subtract_path(seed, &flow);
        steps.push(TraceStep {
            path: seed.clone(),
            order: seed.to_order(),
            flow,
        });
    }

    let budget = diag.positive_edges().count();
    while let Some(edge) = smallest_positive_edge(&residual) {
        if steps.len() > budget {
            return Err(Error::Domain("decomposition failed to terminate".into()));
        }
        let flow = residual.edge_weight(edge).clone();
        let mut nodes = extend_up(&residual, edge.source)?;
        nodes.extend(extend_down(&residual, edge.target())?);
        let path = Path::new(universe.len(), nodes)?;
        residual.subtract_path(&path, &flow);
        steps.push(TraceStep {
            order: path.to_order(),
            path,
            flow,
        });
    }

    let mixture = finish(universe, &steps)?;
    Ok((mixture, DecompositionTrace { steps, residual }))
}

fn smallest_positive_edge(diag: &FlowDiagram) -> Option<crate::flow::Edge> {
    let mut best: Option<(crate::flow::Edge, &Rational)> = None;
    for e in diag.positive_edges() {
        let w = diag.edge_weight(e);
        if best.is_none_or(|(_, b)| w < b) {
            best = Some((e, w));
        }
    }
    best.map(|(e, _)| e)
}

/// Two representations with different supports from a branching witness.
///
/// The witness paths are relabelled so that an edge of minimum flow `r`
/// over `rho ∪ rho_prime` lies on both `rho` and `rho2`; the first
/// representation is seeded with `rho`, the second with `rho2`. The first
/// then gives `rho2`'s order zero weight and the second at least `r`.
pub fn alternative_representations(
    diag: &FlowDiagram,
    witness: &BranchingWitness,
) -> Result<(Mixture, Mixture)> {
    witness.validate(diag)?;
    let (i, j) = witness.section();
    let segment_min = |p: &Path, from: usize, to: usize| -> Option<Rational> {
        p.edges()
            .skip(from)
            .take(to - from)
            .map(|(m, x)| diag.weight(m, x).clone())
            .min()
    };
    let n = diag.universe().len();
    let (rho, rho_p) = (&witness.rho, &witness.rho_prime);
    // rho head, shared chain, rho tail, rho_prime head, rho_prime tail
    let segments = [
        segment_min(rho, 0, i),
        segment_min(rho, i, j),
        segment_min(rho, j, n),
        segment_min(rho_p, 0, i),
        segment_min(rho_p, j, n),
    ];
    let r = segments.iter().flatten().min().expect("segments").clone();
    let position = segments
        .iter()
        .position(|s| s.as_ref() == Some(&r))
        .expect("minimum present");
    let (first, second) = match position {
        0 | 1 => (rho, &witness.rho2),
        2 => (rho, &witness.rho3),
        3 => (rho_p, &witness.rho3),
        _ => (rho_p, &witness.rho2),
    };

    let (nu1, _) = greedy_representation(diag, Some(first))?;
    let (nu2, _) = greedy_representation(diag, Some(second))?;
    let pivot = second.to_order();
    if !nu1.weight(&pivot).is_zero() || nu2.weight(&pivot) < r {
        return Err(Error::Domain(
            "alternative representations failed to separate".into(),
        ));
    }
    Ok((nu1, nu2))
}

/// All supported paths, in lexicographic order of their linear orders.
pub fn supported_paths(diag: &FlowDiagram, limit: usize) -> Result<Vec<Path>> {
    let mut out = Vec::new();
    let mut stack = vec![diag.universe().full()];
    fn walk(
        diag: &FlowDiagram,
        stack: &mut Vec<Menu>,
        out: &mut Vec<Path>,
        limit: usize,
    ) -> Result<()> {
        let node = *stack.last().expect("stack");
        if node.is_empty() {
            if out.len() == limit {
                return Err(Error::Refused(format!("more than {limit} supported paths")));
            }
            out.push(Path::from_nodes_unchecked(stack.clone()));
            return Ok(());
        }
        let children: Vec<usize> = diag.positive_children(node).collect();
        for x in children {
            stack.push(node.without(x));
            walk(diag, stack, out, limit)?;
            stack.pop();
        }
        Ok(())
    }
    walk(diag, &mut stack, &mut out, limit)?;
    Ok(out)
}

/// Result of [`enumerate_representations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Distinct representations, sorted by their atom lists.
    pub representations: Vec<Mixture>,
    pub supported_paths: usize,
    pub orderings_tried: usize,
    /// True when every ordering of the supported paths was tried.
    pub exhaustive: bool,
}

/// Candidate extreme points: for each priority ordering of the supported
/// paths, give each path in turn its smallest remaining edge capacity.
/// Every ordering is tried when `k! <= cap`; otherwise `cap` orderings are
/// sampled with a generator seeded by `rng_seed`.
pub fn enumerate_representations(
    diag: &FlowDiagram,
    cap: usize,
    rng_seed: u64,
) -> Result<Enumeration> {
    check_decomposable(diag)?;
    if cap == 0 {
        return Err(Error::Refused("ordering cap must be positive".into()));
    }
    let paths = supported_paths(diag, MAX_SUPPORTED_PATHS)?;
    let k = paths.len();
    let exhaustive = factorial_at_most(k, cap);

    let mut found: BTreeMap<Vec<(LinearOrder, Rational)>, Mixture> = BTreeMap::new();
    let mut tried = 0;
    let mut run = |ordering: &[usize]| -> Result<()> {
        let mix = decompose_in_order(diag, &paths, ordering)?;
        let key = mix.atoms().map(|(o, w)| (o.clone(), w.clone())).collect();
        found.entry(key).or_insert(mix);
        tried += 1;
        Ok(())
    };

    let mut ordering: Vec<usize> = (0..k).collect();
    if exhaustive {
        loop {
            run(&ordering)?;
            if !next_permutation(&mut ordering) {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for _ in 0..cap {
            ordering.shuffle(&mut rng);
            run(&ordering)?;
        }
    }

    Ok(Enumeration {
        representations: found.into_values().collect(),
        supported_paths: k,
        orderings_tried: tried,
        exhaustive,
    })
}

fn decompose_in_order(diag: &FlowDiagram, paths: &[Path], ordering: &[usize]) -> Result<Mixture> {
    let mut residual = diag.clone();
    let mut atoms = Vec::new();
    for &idx in ordering {
        let path = &paths[idx];
        let flow = residual.path_min(path);
        if flow.is_positive() {
            residual.subtract_path(path, &flow);
            atoms.push((path.to_order(), flow));
        }
    }
    if !residual.is_zero() {
        return Err(Error::Domain(
            "path-priority decomposition left residual flow".into(),
        ));
    }
    Mixture::new(diag.universe().clone(), atoms)
}

fn factorial_at_most(k: usize, cap: usize) -> bool {
    let mut f: usize = 1;
    for i in 2..=k {
        match f.checked_mul(i) {
            Some(v) if v <= cap => f = v,
            _ => return false,
        }
    }
    f <= cap
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len())
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// The exogenous order `▷` on alternatives used by the single-crossing
/// property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExogenousOrder(LinearOrder);

impl ExogenousOrder {
    pub fn new(universe: &Universe, order: LinearOrder) -> Result<Self> {
        if order.len() != universe.len() {
            return Err(Error::Domain(format!(
                "exogenous order has {} alternatives, universe has {}",
                order.len(),
                universe.len()
            )));
        }
        Ok(Self(order))
    }

    pub fn order(&self) -> &LinearOrder {
        &self.0
    }

    /// Pairs `(x, y)` with `x ▷ y`, in exogenous order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let r = self.0.ranking();
        (0..r.len())
            .flat_map(|i| (i + 1..r.len()).map(move |j| (r[i], r[j])))
            .collect()
    }
}

/// `earlier` must come before `later` because `later` ranks `x` above `y`
/// (with `x ▷ y`) and `earlier` does not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceLink {
    pub earlier: LinearOrder,
    pub later: LinearOrder,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScrumVerdict {
    SingleCrossing {
        ordering: Vec<LinearOrder>,
    },
    /// A cycle of precedence constraints; each link's `later` is the next
    /// link's `earlier`.
    NotSingleCrossing {
        cycle: Vec<PrecedenceLink>,
    },
}

impl ScrumVerdict {
    pub fn is_single_crossing(&self) -> bool {
        matches!(self, ScrumVerdict::SingleCrossing { .. })
    }
}

/// True iff along `ordering`, agreement with `▷` on any pair never reverts.
pub fn is_single_crossing_ordering(ordering: &[LinearOrder], exo: &ExogenousOrder) -> bool {
    exo.pairs().into_iter().all(|(x, y)| {
        let agrees: Vec<bool> = ordering.iter().map(|o| o.prefers(x, y)).collect();
        agrees.windows(2).all(|w| !w[0] || w[1])
    })
}

/// Decides whether the support of `mix` can be ordered to be
/// single-crossing with respect to `exo`.
pub fn scrum_check(mix: &Mixture, exo: &ExogenousOrder) -> Result<ScrumVerdict> {
    let universe = mix.universe();
    if exo.order().len() != universe.len() {
        return Err(Error::Domain(
            "exogenous order does not match the universe".into(),
        ));
    }
    let support = mix.support();
    let pairs = exo.pairs();
    // bit p set when the order agrees with ▷ on pairs[p]; at most 120 pairs
    let agree: Vec<u128> = support
        .iter()
        .map(|o| {
            let pos = o.positions();
            pairs
                .iter()
                .enumerate()
                .filter(|(_, &(x, y))| pos[x] < pos[y])
                .fold(0u128, |acc, (p, _)| acc | 1 << p)
        })
        .collect();
    let k = support.len();
    // must_precede(a, b): some pair on which b agrees and a does not
    let must_precede = |a: usize, b: usize| agree[b] & !agree[a] != 0;

    let mut indegree: Vec<usize> = (0..k)
        .map(|b| (0..k).filter(|&a| a != b && must_precede(a, b)).count())
        .collect();
    let mut placed = vec![false; k];
    let mut ordering = Vec::with_capacity(k);
    while let Some(next) = (0..k).find(|&v| !placed[v] && indegree[v] == 0) {
        placed[next] = true;
        ordering.push(next);
        for b in 0..k {
            if !placed[b] && must_precede(next, b) {
                indegree[b] -= 1;
            }
        }
    }

    if ordering.len() == k {
        let ordering: Vec<LinearOrder> = ordering.into_iter().map(|i| support[i].clone()).collect();
        if !is_single_crossing_ordering(&ordering, exo) {
            return Err(Error::Domain(
                "topological ordering failed verification".into(),
            ));
        }
        return Ok(ScrumVerdict::SingleCrossing { ordering });
    }

    let link = |a: usize, b: usize| {
        let p = (agree[b] & !agree[a]).trailing_zeros() as usize;
        PrecedenceLink {
            earlier: support[a].clone(),
            later: support[b].clone(),
            x: pairs[p].0,
            y: pairs[p].1,
        }
    };
    let remaining: Vec<usize> = (0..k).filter(|&v| !placed[v]).collect();
    for (ia, &a) in remaining.iter().enumerate() {
        for &b in &remaining[ia + 1..] {
            if must_precede(a, b) && must_precede(b, a) {
                return Ok(ScrumVerdict::NotSingleCrossing {
                    cycle: vec![link(a, b), link(b, a)],
                });
            }
        }
    }
    // every remaining node has a remaining predecessor; walk back to a repeat
    let mut seen: Vec<Option<usize>> = vec![None; k];
    let mut walk = Vec::new();
    let mut cur = remaining[0];
    while seen[cur].is_none() {
        seen[cur] = Some(walk.len());
        walk.push(cur);
        cur = *remaining
            .iter()
            .find(|&&a| a != cur && must_precede(a, cur))
            .expect("remaining node without a remaining predecessor");
    }
    let mut cycle: Vec<usize> = walk[seen[cur].expect("visited")..].to_vec();
    cycle.reverse();
    let links = (0..cycle.len())
        .map(|t| link(cycle[t], cycle[(t + 1) % cycle.len()]))
        .collect();
    Ok(ScrumVerdict::NotSingleCrossing { cycle: links })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flow::build_flow_diagram;
    use crate::identification::find_branching_pair;
    use crate::model::induce_choice_system;
    use num_traits::One;

    fn order(u: &Universe, s: &str) -> LinearOrder {
        let labels: Vec<String> = s.chars().map(String::from).collect();
        u.order_from_labels(&labels).unwrap()
    }

    fn half() -> Rational {
        Rational::new(1.into(), 2.into())
    }

    #[test]
    fn greedy_round_trip_fishburn() {
        let (_, nu1, _) = fixtures::fishburn();
        let sys = induce_choice_system(&nu1);
        let diag = build_flow_diagram(&sys);
        let (mix, trace) = greedy_representation(&diag, None).unwrap();
        assert_eq!(induce_choice_system(&mix), sys);
        assert!(trace.residual.is_zero());
        assert!(trace.steps.iter().all(|s| s.flow.is_positive()));
    }

    #[test]
    fn greedy_point_mass() {
        let u = Universe::alphabetic(4).unwrap();
        let o = order(&u, "dacb");
        let point = Mixture::point_mass(u, o).unwrap();
        let diag = build_flow_diagram(&induce_choice_system(&point));
        let (mix, trace) = greedy_representation(&diag, None).unwrap();
        assert_eq!(mix, point);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn greedy_seeded_fishburn() {
        let (u, nu1, _) = fixtures::fishburn();
        let diag = build_flow_diagram(&induce_choice_system(&nu1));
        let seed = order(&u, "abcd");
        let (mix, _) = greedy_representation(&diag, Some(&seed.to_path())).unwrap();
        assert_eq!(mix.weight(&seed), half());
        assert_eq!(mix, nu1);
        let bad = order(&u, "cabd").to_path();
        assert!(matches!(
            greedy_representation(&diag, Some(&bad)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn greedy_rejects_unbalanced_diagram() {
        let u = Universe::alphabetic(2).unwrap();
        let diag = FlowDiagram::from_fn(u, |_, x| {
            if x == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        // {a,b} -> {b} carries 1, but {b} -> {} carries 0
        assert!(matches!(
            greedy_representation(&diag, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fishburn_alternatives() {
        let (u, nu1, nu2) = fixtures::fishburn();
        let sys = induce_choice_system(&nu1);
        let diag = build_flow_diagram(&sys);
        let w = find_branching_pair(&diag).unwrap().unwrap();
        let (a, b) = alternative_representations(&diag, &w).unwrap();
        assert_eq!(induce_choice_system(&a), sys);
        assert_eq!(induce_choice_system(&b), sys);
        let pivot = w.rho2.to_order();
        assert!(a.weight(&pivot).is_zero());
        assert_eq!(b.weight(&pivot), half());
        let mut pair = vec![a.support(), b.support()];
        pair.sort();
        let mut expected = vec![nu1.support(), nu2.support()];
        expected.sort();
        assert_eq!(pair, expected);
        let _ = u;
    }

    #[test]
    fn alternatives_reject_foreign_witness() {
        let (_, nu1, _) = fixtures::fishburn();
        let diag = build_flow_diagram(&induce_choice_system(&nu1));
        let mut w = find_branching_pair(&diag).unwrap().unwrap();
        std::mem::swap(&mut w.rho2, &mut w.rho3);
        assert!(alternative_representations(&diag, &w).is_err());
    }

    #[test]
    fn fishburn_extreme_points() {
        let (_, nu1, nu2) = fixtures::fishburn();
        let diag = build_flow_diagram(&induce_choice_system(&nu1));
        let e = enumerate_representations(&diag, DEFAULT_ORDERING_CAP, 0).unwrap();
        assert_eq!(e.supported_paths, 4);
        assert_eq!(e.orderings_tried, 24);
        assert!(e.exhaustive);
        let mut expected = vec![nu1, nu2];
        expected.sort_by_key(|m| m.support());
        assert_eq!(e.representations, expected);
    }

    #[test]
    fn sampled_orderings_are_deterministic() {
        let u = Universe::alphabetic(4).unwrap();
        let diag = build_flow_diagram(&induce_choice_system(&Mixture::uniform(u).unwrap()));
        let a = enumerate_representations(&diag, 50, 7).unwrap();
        let b = enumerate_representations(&diag, 50, 7).unwrap();
        assert!(!a.exhaustive);
        assert_eq!(a.orderings_tried, 50);
        assert_eq!(a, b);
        assert!(a.representations.len() > 1);
        assert!(enumerate_representations(&diag, 0, 7).is_err());
    }

    #[test]
    fn permutations_in_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap(), &vec![2, 1, 0]);
        assert!(factorial_at_most(7, 5040));
        assert!(!factorial_at_most(8, 5040));
        assert!(factorial_at_most(0, 1));
    }

    #[test]
    fn scrum_examples() {
        let (u, nu1, nu2) = fixtures::fishburn();
        let abcd = ExogenousOrder::new(&u, order(&u, "abcd")).unwrap();
        let abdc = ExogenousOrder::new(&u, order(&u, "abdc")).unwrap();
        match scrum_check(&nu1, &abcd).unwrap() {
            ScrumVerdict::SingleCrossing { ordering } => {
                assert_eq!(ordering, vec![order(&u, "badc"), order(&u, "abcd")]);
            }
            other => panic!("expected single crossing, got {other:?}"),
        }
        assert!(scrum_check(&nu2, &abdc).unwrap().is_single_crossing());
        match scrum_check(&nu2, &abcd).unwrap() {
            ScrumVerdict::NotSingleCrossing { cycle } => {
                assert_eq!(cycle.len(), 2);
                assert_eq!(cycle[0].later, cycle[1].earlier);
                assert_eq!(cycle[1].later, cycle[0].earlier);
            }
            other => panic!("expected a conflict, got {other:?}"),
        }
        let short = ExogenousOrder::new(&u, LinearOrder::identity(3));
        assert!(short.is_err());
    }
}
