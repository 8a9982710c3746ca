//! Block–Marschak polynomials and the probability flow diagram on the
//! subset lattice.
//!
//! The diagram has one node per subset of the universe and one edge from
//! `A` to `A \ {x}` for every non-empty `A` and `x ∈ A`, weighted by
//! `q(x, A)`. For a rationalizable system every weight is non-negative and
//! flow is conserved at every node other than the full set and the empty set.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result, Violation};
use crate::model::{ChoiceSystem, Menu, Mixture, Path, Universe};
use crate::Rational;

/// Block–Marschak value by the top-down recursion
/// `q(x, A) = P_A(x) - Σ_{A ⊊ A'} q(x, A')`, memoized over supersets.
pub fn bm_polynomial(sys: &ChoiceSystem, x: usize, menu: Menu) -> Result<Rational> {
    check_member(sys.universe(), x, menu)?;
    let full = sys.universe().full();
    let mut memo = HashMap::new();
    Ok(bm_recursive(sys, x, menu, full, &mut memo))
}

fn bm_recursive(
    sys: &ChoiceSystem,
    x: usize,
    menu: Menu,
    full: Menu,
    memo: &mut HashMap<Menu, Rational>,
) -> Rational {
    if let Some(q) = memo.get(&menu) {
        return q.clone();
    }
    let outside = full.difference(menu).bits();
    let mut q = sys.prob(menu, x).clone();
    // enumerate non-empty subsets of the complement
    let mut extra = outside;
    while extra != 0 {
        let sup = menu.union(Menu::from_bits(extra));
        q -= bm_recursive(sys, x, sup, full, memo);
        extra = (extra - 1) & outside;
    }
    memo.insert(menu, q.clone());
    q
}

/// Block–Marschak value by the alternating sum
/// `Σ_{A ⊆ A'} (-1)^{|A' \ A|} P_{A'}(x)`.
pub fn bm_polynomial_mobius(sys: &ChoiceSystem, x: usize, menu: Menu) -> Result<Rational> {
    check_member(sys.universe(), x, menu)?;
    let outside = sys.universe().full().difference(menu).bits();
    let mut q = Rational::zero();
    let mut extra = outside;
    loop {
        let sup = menu.union(Menu::from_bits(extra));
        if extra.count_ones().is_multiple_of(2) {
            q += sys.prob(sup, x);
        } else {
            q -= sys.prob(sup, x);
        }
        if extra == 0 {
            break;
        }
        extra = (extra - 1) & outside;
    }
    Ok(q)
}

fn check_member(universe: &Universe, x: usize, menu: Menu) -> Result<()> {
    if x >= universe.len() || !menu.is_subset_of(universe.full()) {
        return Err(Error::Domain(
            "alternative or menu outside the universe".into(),
        ));
    }
    if !menu.contains(x) {
        return Err(Error::Domain(format!(
            "{} is not a member of {}",
            universe.label(x),
            universe.menu_label(menu)
        )));
    }
    Ok(())
}

/// Total weight of atoms ranking all of `X \ A` above `x` and `x` above the
/// rest of `A`.
pub fn contour_mass(mix: &Mixture, x: usize, menu: Menu) -> Result<Rational> {
    let universe = mix.universe();
    check_member(universe, x, menu)?;
    let target = universe.full().difference(menu).with(x);
    Ok(mix
        .atoms()
        .filter(|(order, _)| order.upper_contour(x) == target)
        .map(|(_, w)| w)
        .sum())
}

/// The probability flow diagram. All edges are stored, including zero and
/// negative ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDiagram {
    universe: Universe,
    weights: Vec<Rational>,
}

/// One lattice edge `source -> source \ {removed}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: Menu,
    pub removed: usize,
}

impl Edge {
    pub fn target(&self) -> Menu {
        self.source.without(self.removed)
    }
}

pub fn build_flow_diagram(sys: &ChoiceSystem) -> FlowDiagram {
    let universe = sys.universe().clone();
    let n = universe.len();
    let nodes = universe.node_count();
    let mut weights = vec![Rational::zero(); nodes * n];
    let mut column = vec![Rational::zero(); nodes];
    for x in 0..n {
        let xbit = 1usize << x;
        for bits in (0..nodes).filter(|b| b & xbit != 0) {
            column[bits] = sys.prob(Menu::from_bits(bits as u32), x).clone();
        }
        // superset Möbius inversion over the coordinates other than x
        for e in (0..n).filter(|&e| e != x) {
            let ebit = 1usize << e;
            for bits in (0..nodes).filter(|b| b & xbit != 0 && b & ebit == 0) {
                let upper = column[bits | ebit].clone();
                column[bits] -= upper;
            }
        }
        for bits in (0..nodes).filter(|b| b & xbit != 0) {
            weights[bits * n + x] = std::mem::take(&mut column[bits]);
        }
    }
    FlowDiagram { universe, weights }
}

impl FlowDiagram {
    /// Builds a diagram from explicit edge weights (used for residual graphs
    /// and hand-made test inputs).
    pub fn from_fn<F>(universe: Universe, mut weight: F) -> Self
    where
        F: FnMut(Menu, usize) -> Rational,
    {
        let n = universe.len();
        let mut weights = vec![Rational::zero(); universe.node_count() * n];
        for bits in 1..universe.node_count() as u32 {
            let menu = Menu::from_bits(bits);
            for x in menu.iter() {
                weights[bits as usize * n + x] = weight(menu, x);
            }
        }
        Self { universe, weights }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// `q(x, A)`, the weight on `A -> A \ {x}`; zero when `x ∉ A`.
    pub fn weight(&self, menu: Menu, x: usize) -> &Rational {
        &self.weights[self.index(menu, x)]
    }

    pub fn edge_weight(&self, edge: Edge) -> &Rational {
        self.weight(edge.source, edge.removed)
    }

    fn index(&self, menu: Menu, x: usize) -> usize {
        menu.bits() as usize * self.universe.len() + x
    }

    pub(crate) fn weight_mut(&mut self, menu: Menu, x: usize) -> &mut Rational {
        let i = self.index(menu, x);
        &mut self.weights[i]
    }

    /// All `n * 2^(n-1)` edges, sources by (cardinality desc, bits asc) and
    /// removed elements ascending.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.universe.menus_top_down().into_iter().flat_map(|m| {
            m.iter().map(move |x| Edge {
                source: m,
                removed: x,
            })
        })
    }

    pub fn positive_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges().filter(|e| self.edge_weight(*e).is_positive())
    }

    /// Alternatives `y ∉ A` whose edge `A ∪ {y} -> A` is strictly positive.
    pub fn positive_parents(&self, menu: Menu) -> impl Iterator<Item = usize> + '_ {
        self.universe
            .full()
            .difference(menu)
            .iter()
            .filter(move |&y| self.weight(menu.with(y), y).is_positive())
    }

    /// Alternatives `x ∈ A` whose edge `A -> A \ {x}` is strictly positive.
    pub fn positive_children(&self, menu: Menu) -> impl Iterator<Item = usize> + '_ {
        menu.iter()
            .filter(move |&x| self.weight(menu, x).is_positive())
    }

    pub fn inflow(&self, menu: Menu) -> Rational {
        self.universe
            .full()
            .difference(menu)
            .iter()
            .map(|y| self.weight(menu.with(y), y))
            .sum()
    }

    pub fn outflow(&self, menu: Menu) -> Rational {
        menu.iter().map(|x| self.weight(menu, x)).sum()
    }

    /// The first negative edge in canonical edge order.
    pub fn first_negative(&self) -> Option<Violation> {
        self.edges().find_map(|e| {
            let w = self.edge_weight(e);
            w.is_negative().then(|| Violation {
                alternative: e.removed,
                menu: e.source,
                value: w.clone(),
            })
        })
    }

    pub fn require_nonnegative(&self) -> Result<()> {
        match self.first_negative() {
            Some(v) => Err(Error::NotRationalizable(v)),
            None => Ok(()),
        }
    }

    /// Unit outflow from the full set and inflow = outflow at every
    /// interior node.
    pub fn check_conservation(&self) -> Result<()> {
        let full = self.universe.full();
        let out = self.outflow(full);
        if !out.is_one() {
            return Err(Error::Domain(format!(
                "outflow from the full set is {out}, not 1"
            )));
        }
        for menu in self.universe.menus_top_down() {
            if menu == full {
                continue;
            }
            let (inflow, outflow) = (self.inflow(menu), self.outflow(menu));
            if inflow != outflow {
                return Err(Error::Domain(format!(
                    "flow not conserved at {}: inflow {inflow}, outflow {outflow}",
                    self.universe.menu_label(menu)
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(Zero::is_zero)
    }

    /// Smallest weight along a path.
    pub fn path_min(&self, path: &Path) -> Rational {
        path.edges()
            .map(|(m, x)| self.weight(m, x))
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub(crate) fn subtract_path(&mut self, path: &Path, amount: &Rational) {
        for (m, x) in path.edges() {
            *self.weight_mut(m, x) -= amount;
        }
    }

    /// View restricted to strictly positive edges and the nodes they touch.
    pub fn reduced(&self) -> Result<ReducedDiagram<'_>> {
        self.require_nonnegative()?;
        Ok(ReducedDiagram { diagram: self })
    }
}

/// Outcome of the Block–Marschak non-negativity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rationalizability {
    Yes,
    No(Violation),
}

pub fn is_rationalizable(sys: &ChoiceSystem) -> Rationalizability {
    match build_flow_diagram(sys).first_negative() {
        None => Rationalizability::Yes,
        Some(v) => Rationalizability::No(v),
    }
}

/// True iff every edge along `path` carries strictly positive weight.
pub fn path_supported(diag: &FlowDiagram, path: &Path) -> bool {
    path.edges().all(|(m, x)| diag.weight(m, x).is_positive())
}

/// The diagram with zero-weight edges and isolated nodes filtered out.
#[derive(Debug, Clone, Copy)]
pub struct ReducedDiagram<'a> {
    diagram: &'a FlowDiagram,
}

impl<'a> ReducedDiagram<'a> {
    pub fn diagram(&self) -> &'a FlowDiagram {
        self.diagram
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.diagram.positive_edges().collect()
    }

    /// Nodes incident to at least one positive edge, by (cardinality desc,
    /// bits asc) with the empty set last.
    pub fn nodes(&self) -> Vec<Menu> {
        let mut nodes: Vec<Menu> = self
            .edges()
            .iter()
            .flat_map(|e| [e.source, e.target()])
            .collect();
        nodes.sort_by_key(|m| (std::cmp::Reverse(m.len()), m.bits()));
        nodes.dedup();
        nodes
    }
}

/// Options for [`to_dot`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    /// Keep only nodes incident to a positive edge.
    pub reduced: bool,
    /// Emit every edge, not only the positive ones (ignored when reduced).
    pub all_edges: bool,
}

/// Graphviz rendering: one node per subset labelled `{a,b}`, one edge per
/// selected lattice edge labelled with its exact weight.
pub fn to_dot(diag: &FlowDiagram, options: DotOptions) -> Result<String> {
    let universe = diag.universe();
    let (nodes, edges) = if options.reduced {
        let view = diag.reduced()?;
        (view.nodes(), view.edges())
    } else {
        let mut nodes = universe.menus_top_down();
        nodes.push(Menu::EMPTY);
        let edges: Vec<Edge> = if options.all_edges {
            diag.edges().collect()
        } else {
            diag.positive_edges().collect()
        };
        (nodes, edges)
    };
    let mut out = String::from("digraph flow {\n");
    for m in &nodes {
        let _ = writeln!(
            out,
            "  n{} [label=\"{}\"];",
            m.bits(),
            universe.menu_label(*m)
        );
    }
    for e in &edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.source.bits(),
            e.target().bits(),
            diag.edge_weight(*e)
        );
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{induce_choice_system, Mixture};
    use num_traits::One;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn fishburn_values() {
        let (u, nu1, _) = fixtures::fishburn();
        let sys = induce_choice_system(&nu1);
        let acd = u.menu_from_labels(&["a", "c", "d"]).unwrap();
        let cd = u.menu_from_labels(&["c", "d"]).unwrap();
        assert_eq!(bm_polynomial(&sys, 0, acd).unwrap(), r(1, 2));
        assert_eq!(bm_polynomial(&sys, 3, cd).unwrap(), r(1, 2));
        assert_eq!(bm_polynomial_mobius(&sys, 0, acd).unwrap(), r(1, 2));
        assert_eq!(contour_mass(&nu1, 2, cd).unwrap(), r(1, 2));
        assert_eq!(contour_mass(&nu1, 1, u.full()).unwrap(), r(1, 2));
        assert!(bm_polynomial(&sys, 0, cd).is_err());
        assert!(contour_mass(&nu1, 0, cd).is_err());
    }

    #[test]
    fn point_mass_values() {
        let u = Universe::alphabetic(3).unwrap();
        let o = u.order_from_labels(&["a", "b", "c"]).unwrap();
        let mix = Mixture::point_mass(u.clone(), o).unwrap();
        let sys = induce_choice_system(&mix);
        let bc = u.menu_from_labels(&["b", "c"]).unwrap();
        assert_eq!(bm_polynomial(&sys, 1, bc).unwrap(), Rational::one());
        assert_eq!(bm_polynomial(&sys, 1, u.full()).unwrap(), Rational::zero());
    }

    #[test]
    fn uniform_top_value() {
        let u = Universe::alphabetic(4).unwrap();
        let sys = induce_choice_system(&Mixture::uniform(u.clone()).unwrap());
        assert_eq!(bm_polynomial(&sys, 0, u.full()).unwrap(), r(1, 4));
        let diag = build_flow_diagram(&sys);
        assert_eq!(diag.positive_edges().count(), 4 * 8);
        assert_eq!(diag.reduced().unwrap().nodes().len(), 16);
    }

    #[test]
    fn diagram_matches_both_forms() {
        let (_, nu1, _) = fixtures::fishburn();
        let sys = induce_choice_system(&nu1);
        let diag = build_flow_diagram(&sys);
        for e in diag.edges() {
            let rec = bm_polynomial(&sys, e.removed, e.source).unwrap();
            let mob = bm_polynomial_mobius(&sys, e.removed, e.source).unwrap();
            assert_eq!(rec, mob);
            assert_eq!(diag.edge_weight(e), &rec);
        }
    }

    #[test]
    fn fishburn_reduced_diagram() {
        let (u, nu1, _) = fixtures::fishburn();
        let diag = build_flow_diagram(&induce_choice_system(&nu1));
        let view = diag.reduced().unwrap();
        assert_eq!(view.edges().len(), 8);
        assert_eq!(view.nodes().len(), 7);
        assert!(view
            .edges()
            .iter()
            .all(|e| diag.edge_weight(*e) == &r(1, 2)));
        diag.check_conservation().unwrap();
        let path = u
            .order_from_labels(&["a", "b", "c", "d"])
            .unwrap()
            .to_path();
        assert!(path_supported(&diag, &path));
        let path = u
            .order_from_labels(&["c", "a", "b", "d"])
            .unwrap()
            .to_path();
        assert!(!path_supported(&diag, &path));
    }

    #[test]
    fn three_alternative_shape() {
        let u = Universe::alphabetic(3).unwrap();
        let diag = build_flow_diagram(&induce_choice_system(&Mixture::uniform(u).unwrap()));
        assert_eq!(diag.edges().count(), 12);
        let dot = to_dot(&diag, DotOptions::default()).unwrap();
        assert_eq!(dot.matches("label=\"{").count(), 8);
        assert_eq!(dot.matches("->").count(), 12);
    }

    #[test]
    fn point_mass_chain() {
        let u = Universe::alphabetic(4).unwrap();
        let o = u.order_from_labels(&["c", "a", "d", "b"]).unwrap();
        let diag = build_flow_diagram(&induce_choice_system(
            &Mixture::point_mass(u.clone(), o.clone()).unwrap(),
        ));
        let path = o.to_path();
        let on_path: Vec<Edge> = path
            .edges()
            .map(|(source, removed)| Edge { source, removed })
            .collect();
        let mut positive: Vec<Edge> = diag.positive_edges().collect();
        positive.sort();
        let mut expected = on_path.clone();
        expected.sort();
        assert_eq!(positive, expected);
        assert!(on_path.iter().all(|e| diag.edge_weight(*e).is_one()));
        assert_eq!(diag.reduced().unwrap().nodes().len(), 5);
        let other = u
            .order_from_labels(&["a", "c", "d", "b"])
            .unwrap()
            .to_path();
        assert!(!path_supported(&diag, &other));
    }

    #[test]
    fn hand_built_violation() {
        let sys = fixtures::violating_three();
        match is_rationalizable(&sys) {
            Rationalizability::No(v) => {
                assert_eq!(v.alternative, 0);
                assert_eq!(v.menu, Menu::from_bits(0b011));
                assert_eq!(v.value, r(-1, 1));
            }
            Rationalizability::Yes => panic!("expected a violation"),
        }
        let diag = build_flow_diagram(&sys);
        assert!(matches!(diag.reduced(), Err(Error::NotRationalizable(_))));
        assert!(matches!(
            to_dot(
                &diag,
                DotOptions {
                    reduced: true,
                    all_edges: false
                }
            ),
            Err(Error::NotRationalizable(_))
        ));
    }

    #[test]
    fn fishburn_dot_reduced() {
        let (_, nu1, _) = fixtures::fishburn();
        let diag = build_flow_diagram(&induce_choice_system(&nu1));
        let dot = to_dot(
            &diag,
            DotOptions {
                reduced: true,
                all_edges: false,
            },
        )
        .unwrap();
        assert!(dot.starts_with("digraph flow {\n"));
        assert!(dot.contains("n15 [label=\"{a,b,c,d}\"];"));
        assert!(dot.contains("n12 -> n4 [label=\"1/2\"];"));
        assert!(dot.contains("n0 [label=\"{}\"];"));
        assert_eq!(dot.matches("->").count(), 8);
        assert_eq!(dot.matches("[label=\"{").count(), 7);
    }
}
