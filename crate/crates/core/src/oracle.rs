//! Brute-force checks that work directly from the definitions. They refuse
//! inputs beyond their caps instead of sampling.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomposition::ExogenousOrder;
use crate::error::{Error, Result};
use crate::flow::{path_supported, FlowDiagram};
use crate::model::{LinearOrder, Mixture, Path, Universe};
use crate::Rational;

/// Largest universe for which all `n!` orders are materialized.
pub const MAX_ENUMERATED_ALTERNATIVES: usize = 6;

/// Largest universe for the pairwise branching scan.
pub const MAX_EXHAUSTIVE_ALTERNATIVES: usize = 5;

/// Largest support for the brute-force single-crossing search.
pub const MAX_BRUTE_FORCE_SUPPORT: usize = 8;

/// All linear orders on `n` alternatives in lexicographic order.
pub fn all_orders(n: usize) -> Result<Vec<LinearOrder>> {
    if n > MAX_ENUMERATED_ALTERNATIVES {
        return Err(Error::Refused(format!(
            "enumerating {n}! orders exceeds the oracle cap of n <= {MAX_ENUMERATED_ALTERNATIVES}"
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    fn extend(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<LinearOrder>) {
        if prefix.len() == n {
            out.push(LinearOrder::new(n, prefix.clone()).expect("permutation"));
            return;
        }
        for x in 0..n {
            if !prefix.contains(&x) {
                prefix.push(x);
                extend(n, prefix, out);
                prefix.pop();
            }
        }
    }
    extend(n, &mut prefix, &mut out);
    Ok(out)
}

/// All `n!` lattice paths, in lexicographic order of their orders.
pub fn all_paths(universe: &Universe) -> Result<Vec<Path>> {
    Ok(all_orders(universe.len())?
        .iter()
        .map(LinearOrder::to_path)
        .collect())
}

/// Literal check: some `1 <= i <= j <= n-1` with different nodes at `i-1`
/// and `j+1` and equal nodes on `i..=j`.
pub fn branching_by_definition(p: &Path, q: &Path) -> bool {
    let (a, b) = (p.nodes(), q.nodes());
    if a.len() != b.len() || a.len() < 3 {
        return false;
    }
    let n = a.len() - 1;
    for i in 1..n {
        for j in i..n {
            if a[i - 1] != b[i - 1] && a[j + 1] != b[j + 1] && (i..=j).all(|m| a[m] == b[m]) {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Unique,
    NonUnique { rho: Path, rho_prime: Path },
}

impl OracleVerdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, OracleVerdict::Unique)
    }
}

/// Scans every pair of supported paths for branching.
pub fn exhaustive_uniqueness(diag: &FlowDiagram) -> Result<OracleVerdict> {
    let n = diag.universe().len();
    if n > MAX_EXHAUSTIVE_ALTERNATIVES {
        return Err(Error::Refused(format!(
            "exhaustive pair scan needs n <= {MAX_EXHAUSTIVE_ALTERNATIVES}, got {n}"
        )));
    }
    diag.require_nonnegative()?;
    let supported: Vec<Path> = all_paths(diag.universe())?
        .into_iter()
        .filter(|p| path_supported(diag, p))
        .collect();
    for (i, p) in supported.iter().enumerate() {
        for q in &supported[i + 1..] {
            if branching_by_definition(p, q) {
                return Ok(OracleVerdict::NonUnique {
                    rho: p.clone(),
                    rho_prime: q.clone(),
                });
            }
        }
    }
    Ok(OracleVerdict::Unique)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random mixture: support size uniform in `[1, min(n!, 8)]` over distinct
/// uniformly drawn orders, raw weights `p/d` with `d <= 120`, normalized.
pub fn random_mixture<R: Rng>(universe: &Universe, rng: &mut R) -> Mixture {
    random_mixture_bounded(universe, 8, rng)
}

/// As [`random_mixture`] with support size at most `max_support`.
pub fn random_mixture_bounded<R: Rng>(
    universe: &Universe,
    max_support: usize,
    rng: &mut R,
) -> Mixture {
    let n = universe.len();
    let total_orders = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k));
    let max_support = total_orders
        .map_or(max_support, |t| t.min(max_support))
        .max(1);
    let size = rng.gen_range(1..=max_support);
    let mut support: Vec<LinearOrder> = Vec::with_capacity(size);
    while support.len() < size {
        let mut ranking: Vec<usize> = (0..n).collect();
        ranking.shuffle(rng);
        let order = LinearOrder::new(n, ranking).expect("permutation");
        if !support.contains(&order) {
            support.push(order);
        }
    }
    let raw: Vec<Rational> = support
        .iter()
        .map(|_| {
            let d: i64 = rng.gen_range(1..=120);
            let p: i64 = rng.gen_range(1..=d);
            Rational::new(p.into(), d.into())
        })
        .collect();
    let total: Rational = raw.iter().sum();
    Mixture::new(
        universe.clone(),
        support.into_iter().zip(raw).map(|(o, w)| (o, w / &total)),
    )
    .expect("normalized mixture")
}

/// `count` random mixtures over an alphabetic universe of size `n`.
pub fn random_mixtures(n: usize, count: usize, seed: u64) -> Vec<Mixture> {
    let universe = Universe::alphabetic(n).expect("universe");
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| random_mixture(&universe, &mut rng))
        .collect()
}

/// Same support as `mix` with freshly drawn weights.
pub fn reweighted<R: Rng>(mix: &Mixture, rng: &mut R) -> Mixture {
    let raw: Vec<Rational> = mix
        .support()
        .iter()
        .map(|_| Rational::new(rng.gen_range(1..=120i64).into(), 120.into()))
        .collect();
    let total: Rational = raw.iter().sum();
    debug_assert!(!total.is_zero());
    Mixture::new(
        mix.universe().clone(),
        mix.support()
            .into_iter()
            .zip(raw)
            .map(|(o, w)| (o, w / &total)),
    )
    .expect("normalized mixture")
}

fn single_crossing_by_definition(ordering: &[LinearOrder], exo: &ExogenousOrder) -> bool {
    let e = exo.order().ranking();
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            let (x, y) = (e[a], e[b]);
            for i in 0..ordering.len() {
                if !ordering[i].prefers(x, y) {
                    continue;
                }
                if ordering[i + 1..].iter().any(|later| !later.prefers(x, y)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Tries every ordering of the support of `mix`; returns the first that is
/// single-crossing.
pub fn single_crossing_brute_force(
    mix: &Mixture,
    exo: &ExogenousOrder,
) -> Result<Option<Vec<LinearOrder>>> {
    let support = mix.support();
    if support.len() > MAX_BRUTE_FORCE_SUPPORT {
        return Err(Error::Refused(format!(
            "brute-force ordering search needs support <= {MAX_BRUTE_FORCE_SUPPORT}"
        )));
    }
    let mut current = Vec::with_capacity(support.len());
    let mut used = vec![false; support.len()];
    fn search(
        support: &[LinearOrder],
        exo: &ExogenousOrder,
        current: &mut Vec<LinearOrder>,
        used: &mut [bool],
    ) -> bool {
        if current.len() == support.len() {
            return single_crossing_by_definition(current, exo);
        }
        for i in 0..support.len() {
            if !used[i] {
                used[i] = true;
                current.push(support[i].clone());
                if search(support, exo, current, used) {
                    return true;
                }
                current.pop();
                used[i] = false;
            }
        }
        false
    }
    Ok(search(&support, exo, &mut current, &mut used).then_some(current))
}
