//! Alternatives, menus, linear orders, mixtures over orders and complete
//! systems of choice probabilities.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Hard cap on the number of alternatives; the lattice has `2^n` nodes.
pub const MAX_ALTERNATIVES: usize = 16;

/// The finite ground set of alternatives, in canonical (input) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe {
    labels: Vec<String>,
}

impl Universe {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Universe(
                "at least one alternative is required".into(),
            ));
        }
        if labels.len() > MAX_ALTERNATIVES {
            return Err(Error::Universe(format!(
                "{} alternatives exceeds the cap of {MAX_ALTERNATIVES}",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.is_empty() {
                return Err(Error::Universe("empty alternative label".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::Universe(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Universe labelled `a`, `b`, `c`, ... (`n <= 16`).
    pub fn alphabetic(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full(&self) -> Menu {
        Menu::full(self.len())
    }

    /// Number of lattice nodes, `2^n`.
    pub fn node_count(&self) -> usize {
        1 << self.len()
    }

    /// Non-empty menus ordered by cardinality descending, then bit pattern
    /// ascending.
    pub fn menus_top_down(&self) -> Vec<Menu> {
        let mut menus: Vec<Menu> = (1..self.node_count() as u32).map(Menu).collect();
        menus.sort_by_key(|m| (std::cmp::Reverse(m.len()), m.bits()));
        menus
    }

    /// Braces notation, e.g. `{a,b}`; the empty set renders as `{}`.
    pub fn menu_label(&self, menu: Menu) -> String {
        let names: Vec<&str> = menu.iter().map(|x| self.label(x)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Human-readable order, e.g. `a>b>c`.
    pub fn order_label(&self, order: &LinearOrder) -> String {
        let names: Vec<&str> = order.ranking().iter().map(|&x| self.label(x)).collect();
        names.join(">")
    }

    pub fn menu_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Menu> {
        let mut menu = Menu::EMPTY;
        for l in labels {
            let l = l.as_ref();
            let x = self
                .index_of(l)
                .ok_or_else(|| Error::Parse(format!("unknown alternative {l:?}")))?;
            if menu.contains(x) {
                return Err(Error::Parse(format!("alternative {l:?} listed twice")));
            }
            menu = menu.with(x);
        }
        Ok(menu)
    }

    pub fn order_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<LinearOrder> {
        let ranking = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                self.index_of(l)
                    .ok_or_else(|| Error::Parse(format!("unknown alternative {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LinearOrder::new(self.len(), ranking)
    }
}

/// A subset of the universe as a fixed-width bit set; bit `i` is alternative `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Menu(u32);

impl Menu {
    pub const EMPTY: Menu = Menu(0);

    pub fn from_bits(bits: u32) -> Self {
        Menu(bits)
    }

    pub fn full(n: usize) -> Self {
        Menu(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(x: usize) -> Self {
        Menu(1 << x)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, x: usize) -> bool {
        self.0 >> x & 1 == 1
    }

    pub fn with(self, x: usize) -> Self {
        Menu(self.0 | 1 << x)
    }

    pub fn without(self, x: usize) -> Self {
        Menu(self.0 & !(1 << x))
    }

    pub fn is_subset_of(self, other: Menu) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Menu) -> Self {
        Menu(self.0 | other.0)
    }

    pub fn difference(self, other: Menu) -> Self {
        Menu(self.0 & !other.0)
    }

    /// Members in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let x = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(x)
            }
        })
    }
}

/// A strict total order on the universe, stored best first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearOrder {
    ranking: Vec<usize>,
}

impl LinearOrder {
    pub fn new(n: usize, ranking: Vec<usize>) -> Result<Self> {
        if ranking.len() != n {
            return Err(Error::Domain(format!(
                "order ranks {} alternatives, universe has {n}",
                ranking.len()
            )));
        }
        let mut seen = vec![false; n];
        for &x in &ranking {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::Domain(format!(
                    "ranking {ranking:?} is not a permutation"
                )));
            }
        }
        Ok(Self { ranking })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            ranking: (0..n).collect(),
        }
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    /// Rank positions: `positions()[x]` is 0 for the best alternative.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ranking.len()];
        for (i, &x) in self.ranking.iter().enumerate() {
            pos[x] = i;
        }
        pos
    }

    pub fn prefers(&self, x: usize, y: usize) -> bool {
        let pos = self.positions();
        pos[x] < pos[y]
    }

    /// The maximal element of `menu`.
    pub fn best_in(&self, menu: Menu) -> Result<usize> {
        self.ranking
            .iter()
            .copied()
            .find(|&x| menu.contains(x))
            .ok_or_else(|| Error::Domain("best element of an empty menu".into()))
    }

    /// Weak upper contour set: everything ranked at or above `x`.
    pub fn upper_contour(&self, x: usize) -> Menu {
        let mut menu = Menu::EMPTY;
        for &y in &self.ranking {
            menu = menu.with(y);
            if y == x {
                break;
            }
        }
        menu
    }

    /// The lattice path that deletes the best remaining element at each step.
    pub fn to_path(&self) -> Path {
        let mut nodes = Vec::with_capacity(self.ranking.len() + 1);
        let mut current = Menu::full(self.ranking.len());
        nodes.push(current);
        for &x in &self.ranking {
            current = current.without(x);
            nodes.push(current);
        }
        Path { nodes }
    }
}

impl fmt::Display for LinearOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranking.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join(">"))
    }
}

pub fn best_in_menu(order: &LinearOrder, menu: Menu) -> Result<usize> {
    order.best_in(menu)
}

pub fn upper_contour_set(order: &LinearOrder, x: usize) -> Menu {
    order.upper_contour(x)
}

pub fn order_to_path(order: &LinearOrder) -> Path {
    order.to_path()
}

pub fn path_to_order(path: &Path) -> LinearOrder {
    path.to_order()
}

/// A maximal chain `X = A_0 ⊋ A_1 ⊋ ... ⊋ A_n = ∅`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    nodes: Vec<Menu>,
}

impl Path {
    pub fn new(n: usize, nodes: Vec<Menu>) -> Result<Self> {
        if nodes.len() != n + 1 {
            return Err(Error::Domain(format!(
                "path has {} nodes, expected {}",
                nodes.len(),
                n + 1
            )));
        }
        if nodes[0] != Menu::full(n) || !nodes[n].is_empty() {
            return Err(Error::Domain(
                "path must run from the full set to the empty set".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !w[1].is_subset_of(w[0]) || w[0].len() != w[1].len() + 1 {
                return Err(Error::Domain(
                    "each path step must remove exactly one element".into(),
                ));
            }
        }
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Menu>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Menu] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Menu {
        self.nodes[i]
    }

    /// Edges as `(source, removed alternative)`, top to bottom.
    pub fn edges(&self) -> impl Iterator<Item = (Menu, usize)> + '_ {
        self.nodes.windows(2).map(|w| {
            let removed = w[0].difference(w[1]).bits().trailing_zeros() as usize;
            (w[0], removed)
        })
    }

    pub fn to_order(&self) -> LinearOrder {
        LinearOrder {
            ranking: self.edges().map(|(_, x)| x).collect(),
        }
    }
}

/// A finitely supported distribution over linear orders with strictly
/// positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mixture {
    universe: Universe,
    atoms: BTreeMap<LinearOrder, Rational>,
}

impl Mixture {
    /// Duplicate orders are merged, zero weights dropped.
    pub fn new<I>(universe: Universe, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LinearOrder, Rational)>,
    {
        let n = universe.len();
        let mut merged: BTreeMap<LinearOrder, Rational> = BTreeMap::new();
        for (order, weight) in atoms {
            if order.len() != n {
                return Err(Error::Mixture(format!(
                    "order of length {} in a universe of {n}",
                    order.len()
                )));
            }
            if weight < Rational::zero() {
                return Err(Error::Mixture(format!("negative weight {weight}")));
            }
            *merged.entry(order).or_insert_with(Rational::zero) += weight;
        }
        merged.retain(|_, w| !w.is_zero());
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::Mixture(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            universe,
            atoms: merged,
        })
    }

    pub fn point_mass(universe: Universe, order: LinearOrder) -> Result<Self> {
        Self::new(universe, [(order, Rational::one())])
    }

    /// Equal weight on every order of the universe (`n <= 8`).
    pub fn uniform(universe: Universe) -> Result<Self> {
        let orders = crate::oracle::all_orders(universe.len())?;
        let w = Rational::new(1.into(), orders.len().into());
        Self::new(universe, orders.into_iter().map(|o| (o, w.clone())))
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Atoms in lexicographic order of their rankings.
    pub fn atoms(&self) -> impl Iterator<Item = (&LinearOrder, &Rational)> {
        self.atoms.iter()
    }

    pub fn weight(&self, order: &LinearOrder) -> Rational {
        self.atoms
            .get(order)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> Vec<LinearOrder> {
        self.atoms.keys().cloned().collect()
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    /// `t * self + (1 - t) * other`, for `t` in `[0, 1]`.
    pub fn blend(&self, other: &Mixture, t: &Rational) -> Result<Mixture> {
        if self.universe != other.universe {
            return Err(Error::Domain("mixtures over different universes".into()));
        }
        if *t < Rational::zero() || *t > Rational::one() {
            return Err(Error::Domain(format!("blend weight {t} outside [0,1]")));
        }
        let s = Rational::one() - t;
        let atoms = self
            .atoms
            .iter()
            .map(|(o, w)| (o.clone(), w * t))
            .chain(other.atoms.iter().map(|(o, w)| (o.clone(), w * &s)));
        Mixture::new(self.universe.clone(), atoms)
    }
}

/// Choice probabilities `P_A(x)` for every non-empty menu `A` and `x ∈ A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceSystem {
    universe: Universe,
    // indexed by menu bits * n + alternative; entries with x ∉ A stay zero
    probs: Vec<Rational>,
}

impl ChoiceSystem {
    /// Builds and validates a complete system from a probability function.
    pub fn from_fn<F>(universe: Universe, mut prob: F) -> Result<Self>
    where
        F: FnMut(Menu, usize) -> Result<Rational>,
    {
        let n = universe.len();
        let mut probs = vec![Rational::zero(); universe.node_count() * n];
        for bits in 1..universe.node_count() as u32 {
            let menu = Menu(bits);
            for x in menu.iter() {
                probs[bits as usize * n + x] = prob(menu, x)?;
            }
        }
        let sys = Self { universe, probs };
        sys.validate()?;
        Ok(sys)
    }

    fn validate(&self) -> Result<()> {
        for menu in self.universe.menus_top_down() {
            let mut total = Rational::zero();
            for x in menu.iter() {
                let p = self.prob(menu, x);
                if *p < Rational::zero() || *p > Rational::one() {
                    return Err(Error::System(format!(
                        "P_{}({}) = {p} outside [0,1]",
                        self.universe.menu_label(menu),
                        self.universe.label(x)
                    )));
                }
                total += p;
            }
            if !total.is_one() {
                return Err(Error::System(format!(
                    "probabilities on {} sum to {total}",
                    self.universe.menu_label(menu)
                )));
            }
        }
        Ok(())
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// `P_A(x)`; zero when `x ∉ A`.
    pub fn prob(&self, menu: Menu, x: usize) -> &Rational {
        &self.probs[menu.bits() as usize * self.universe.len() + x]
    }
}

/// The system of choice probabilities induced by a mixture.
pub fn induce_choice_system(mix: &Mixture) -> ChoiceSystem {
    let universe = mix.universe().clone();
    let n = universe.len();
    let nodes = universe.node_count();
    let mut probs = vec![Rational::zero(); nodes * n];
    let mut best = vec![0usize; nodes];
    for (order, weight) in mix.atoms() {
        let pos = order.positions();
        for bits in 1..nodes {
            let low = bits.trailing_zeros() as usize;
            let rest = bits & (bits - 1);
            best[bits] = if rest == 0 || pos[low] < pos[best[rest]] {
                low
            } else {
                best[rest]
            };
            probs[bits * n + best[bits]] += weight;
        }
    }
    ChoiceSystem { universe, probs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn order(u: &Universe, s: &str) -> LinearOrder {
        let labels: Vec<String> = s.chars().map(|c| c.to_string()).collect();
        u.order_from_labels(&labels).unwrap()
    }

    fn menu(u: &Universe, s: &str) -> Menu {
        let labels: Vec<String> = s.chars().map(|c| c.to_string()).collect();
        u.menu_from_labels(&labels).unwrap()
    }

    #[test]
    fn universe_rejects_bad_labels() {
        assert!(Universe::new(Vec::<String>::new()).is_err());
        assert!(Universe::new(["a", "a"]).is_err());
        assert!(Universe::new(["a", ""]).is_err());
        assert!(Universe::alphabetic(17).is_err());
        assert_eq!(Universe::alphabetic(16).unwrap().len(), 16);
    }

    #[test]
    fn best_in_menu_examples() {
        let u = Universe::alphabetic(4).unwrap();
        assert_eq!(best_in_menu(&order(&u, "abcd"), menu(&u, "cd")).unwrap(), 2);
        assert_eq!(best_in_menu(&order(&u, "badc"), menu(&u, "cd")).unwrap(), 3);
        let u3 = Universe::alphabetic(3).unwrap();
        assert_eq!(
            best_in_menu(&order(&u3, "abc"), menu(&u3, "abc")).unwrap(),
            0
        );
        assert!(best_in_menu(&order(&u3, "abc"), Menu::EMPTY).is_err());
    }

    #[test]
    fn path_examples() {
        let u = Universe::alphabetic(4).unwrap();
        let p = order_to_path(&order(&u, "abcd"));
        let expected: Vec<Menu> = ["abcd", "bcd", "cd", "d", ""]
            .iter()
            .map(|s| menu(&u, s))
            .collect();
        assert_eq!(p.nodes(), expected.as_slice());
        let p = order_to_path(&order(&u, "badc"));
        let expected: Vec<Menu> = ["abcd", "acd", "cd", "c", ""]
            .iter()
            .map(|s| menu(&u, s))
            .collect();
        assert_eq!(p.nodes(), expected.as_slice());
    }

    #[test]
    fn path_round_trip_exhaustive() {
        for n in 1..=5 {
            for o in crate::oracle::all_orders(n).unwrap() {
                let p = o.to_path();
                assert!(Path::new(n, p.nodes().to_vec()).is_ok());
                assert_eq!(path_to_order(&p), o);
            }
        }
    }

    #[test]
    fn path_validation() {
        let u = Universe::alphabetic(3).unwrap();
        let skip = vec![menu(&u, "abc"), menu(&u, "c"), menu(&u, "c"), Menu::EMPTY];
        assert!(Path::new(3, skip).is_err());
        let short = vec![menu(&u, "abc"), menu(&u, "bc"), Menu::EMPTY];
        assert!(Path::new(3, short).is_err());
    }

    #[test]
    fn upper_contour_examples() {
        let u = Universe::alphabetic(4).unwrap();
        assert_eq!(upper_contour_set(&order(&u, "abcd"), 2), menu(&u, "abc"));
        assert_eq!(upper_contour_set(&order(&u, "badc"), 2), menu(&u, "abcd"));
        let o = order(&u, "cabd");
        assert_eq!(upper_contour_set(&o, 2), menu(&u, "c"));
    }

    #[test]
    fn linear_order_rejects_non_permutation() {
        assert!(LinearOrder::new(3, vec![0, 0, 1]).is_err());
        assert!(LinearOrder::new(3, vec![0, 1]).is_err());
        assert!(LinearOrder::new(3, vec![0, 1, 3]).is_err());
    }

    #[test]
    fn mixture_canonicalizes() {
        let u = Universe::alphabetic(3).unwrap();
        let a = order(&u, "abc");
        let b = order(&u, "bac");
        let m = Mixture::new(
            u.clone(),
            [
                (a.clone(), r(1, 4)),
                (b.clone(), Rational::zero()),
                (a.clone(), r(3, 4)),
            ],
        )
        .unwrap();
        assert_eq!(m.support(), vec![a.clone()]);
        assert_eq!(m.weight(&a), Rational::one());
        assert!(Mixture::new(u.clone(), [(a.clone(), r(1, 2))]).is_err());
        assert!(Mixture::new(u, [(a, r(3, 2)), (b, r(-1, 2))]).is_err());
    }

    #[test]
    fn fishburn_inducement() {
        let u = Universe::alphabetic(4).unwrap();
        let nu1 = Mixture::new(
            u.clone(),
            [(order(&u, "abcd"), r(1, 2)), (order(&u, "badc"), r(1, 2))],
        )
        .unwrap();
        let nu2 = Mixture::new(
            u.clone(),
            [(order(&u, "abdc"), r(1, 2)), (order(&u, "bacd"), r(1, 2))],
        )
        .unwrap();
        let sys = induce_choice_system(&nu1);
        assert_eq!(*sys.prob(menu(&u, "cd"), 2), r(1, 2));
        assert_eq!(*sys.prob(menu(&u, "abcd"), 0), r(1, 2));
        assert_eq!(*sys.prob(menu(&u, "bc"), 1), r(1, 1));
        assert_eq!(sys, induce_choice_system(&nu2));
    }

    #[test]
    fn point_mass_inducement() {
        let u = Universe::alphabetic(3).unwrap();
        let o = order(&u, "abc");
        let sys = induce_choice_system(&Mixture::point_mass(u.clone(), o.clone()).unwrap());
        for m in u.menus_top_down() {
            let best = o.best_in(m).unwrap();
            for x in m.iter() {
                let expected = if x == best {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                assert_eq!(*sys.prob(m, x), expected);
            }
        }
    }

    #[test]
    fn from_fn_rejects_bad_rows() {
        let u = Universe::alphabetic(2).unwrap();
        let bad = ChoiceSystem::from_fn(u.clone(), |m, _| {
            Ok(if m.len() == 1 {
                Rational::one()
            } else {
                r(1, 3)
            })
        });
        assert!(matches!(bad, Err(Error::System(_))));
        let neg = ChoiceSystem::from_fn(u, |m, x| {
            Ok(match (m.len(), x) {
                (1, _) => Rational::one(),
                (_, 0) => r(3, 2),
                _ => r(-1, 2),
            })
        });
        assert!(matches!(neg, Err(Error::System(_))));
    }

    #[test]
    fn menus_top_down_order() {
        let u = Universe::alphabetic(3).unwrap();
        let bits: Vec<u32> = u.menus_top_down().iter().map(|m| m.bits()).collect();
        assert_eq!(bits, vec![7, 3, 5, 6, 1, 2, 4]);
        assert_eq!(u.menu_label(Menu::from_bits(5)), "{a,c}");
        assert_eq!(u.menu_label(Menu::EMPTY), "{}");
    }
}
