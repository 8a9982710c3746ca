//! Uniqueness tests: branching-path detection on the flow diagram, the
//! contour-set test on a given mixture, support identification, and
//! restriction of a system to a sub-universe.

use std::collections::{HashMap, VecDeque};

use crate::decomposition::alternative_representations;
use crate::error::{Error, Result};
use crate::flow::{build_flow_diagram, path_supported, Edge, FlowDiagram};
use crate::model::{ChoiceSystem, LinearOrder, Menu, Mixture, Path, Universe};

/// Two supported paths entering a common chain `B ⊇ ... ⊇ C` along different
/// edges and leaving it along different edges, plus the two paths obtained
/// by exchanging their tails below `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingWitness {
    pub rho: Path,
    pub rho_prime: Path,
    pub merge_node: Menu,
    pub split_node: Menu,
    pub in_edges: [Edge; 2],
    pub out_edges: [Edge; 2],
    /// `rho` above the split node followed by the tail of `rho_prime`.
    pub rho2: Path,
    /// `rho_prime` above the split node followed by the tail of `rho`.
    pub rho3: Path,
}

impl BranchingWitness {
    /// Path indices `(i, j)` of the merge and split nodes.
    pub fn section(&self) -> (usize, usize) {
        let n = self.rho.nodes().len() - 1;
        (n - self.merge_node.len(), n - self.split_node.len())
    }

    /// Checks every structural invariant of the witness against `diag`.
    pub fn validate(&self, diag: &FlowDiagram) -> Result<()> {
        let fail = |msg: &str| Err(Error::Domain(format!("invalid branching witness: {msg}")));
        let n = diag.universe().len();
        for p in [&self.rho, &self.rho_prime, &self.rho2, &self.rho3] {
            if Path::new(n, p.nodes().to_vec()).is_err() {
                return fail("malformed path");
            }
            if !path_supported(diag, p) {
                return fail("path not supported");
            }
        }
        if !self.split_node.is_subset_of(self.merge_node) {
            return fail("split node is not below the merge node");
        }
        let (i, j) = self.section();
        if i < 1 || j > n - 1 || i > j {
            return fail("section indices out of range");
        }
        let (a, b) = (self.rho.nodes(), self.rho_prime.nodes());
        if a[i] != self.merge_node || a[j] != self.split_node {
            return fail("rho misses the merge or split node");
        }
        if a[i - 1] == b[i - 1] || a[j + 1] == b[j + 1] || a[i..=j] != b[i..=j] {
            return fail("paths do not branch on the stated section");
        }
        let in_edges = [edge_between(a[i - 1], a[i]), edge_between(b[i - 1], b[i])];
        let out_edges = [edge_between(a[j], a[j + 1]), edge_between(b[j], b[j + 1])];
        if in_edges != self.in_edges || out_edges != self.out_edges {
            return fail("recorded edges disagree with the paths");
        }
        let swap = |head: &[Menu], tail: &[Menu]| -> Vec<Menu> {
            head[..=j].iter().chain(&tail[j + 1..]).copied().collect()
        };
        if self.rho2.nodes() != swap(a, b).as_slice() || self.rho3.nodes() != swap(b, a).as_slice()
        {
            return fail("exchanged paths are not the tail swap");
        }
        Ok(())
    }
}

fn edge_between(upper: Menu, lower: Menu) -> Edge {
    Edge {
        source: upper,
        removed: upper.difference(lower).bits().trailing_zeros() as usize,
    }
}

/// Searches the positive subgraph for a merge node (two positive in-edges)
/// from which a split node (two positive out-edges) is reachable, possibly
/// the merge node itself. Merge nodes are tried in (cardinality desc, bits
/// asc) order and the nearest split node is taken.
pub fn find_branching_pair(diag: &FlowDiagram) -> Result<Option<BranchingWitness>> {
    diag.require_nonnegative()?;
    let full = diag.universe().full();
    for merge in diag.universe().menus_top_down() {
        if merge == full || diag.positive_parents(merge).nth(1).is_none() {
            continue;
        }
        let mut parent: HashMap<Menu, Menu> = HashMap::new();
        let mut queue = VecDeque::from([merge]);
        while let Some(node) = queue.pop_front() {
            if diag.positive_children(node).nth(1).is_some() {
                let mut chain = vec![node];
                let mut cur = node;
                while cur != merge {
                    cur = parent[&cur];
                    chain.push(cur);
                }
                chain.reverse();
                return assemble(diag, &chain).map(Some);
            }
            for x in diag.positive_children(node) {
                let next = node.without(x);
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                    e.insert(node);
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(None)
}

fn assemble(diag: &FlowDiagram, chain: &[Menu]) -> Result<BranchingWitness> {
    let merge = chain[0];
    let split = *chain.last().expect("non-empty chain");
    let mut parents = diag.positive_parents(merge);
    let (y1, y2) = (parents.next().unwrap(), parents.next().unwrap());
    let mut children = diag.positive_children(split);
    let (x1, x2) = (children.next().unwrap(), children.next().unwrap());

    let head1 = extend_up(diag, merge.with(y1))?;
    let head2 = extend_up(diag, merge.with(y2))?;
    let tail1 = extend_down(diag, split.without(x1))?;
    let tail2 = extend_down(diag, split.without(x2))?;
    let join = |head: &[Menu], tail: &[Menu]| {
        Path::from_nodes_unchecked(head.iter().chain(chain).chain(tail).copied().collect())
    };
    Ok(BranchingWitness {
        rho: join(&head1, &tail1),
        rho_prime: join(&head2, &tail2),
        merge_node: merge,
        split_node: split,
        in_edges: [
            Edge {
                source: merge.with(y1),
                removed: y1,
            },
            Edge {
                source: merge.with(y2),
                removed: y2,
            },
        ],
        out_edges: [
            Edge {
                source: split,
                removed: x1,
            },
            Edge {
                source: split,
                removed: x2,
            },
        ],
        rho2: join(&head1, &tail2),
        rho3: join(&head2, &tail1),
    })
}

/// Nodes from the full set down to `node` (inclusive), climbing through the
/// smallest-index positive in-edge at each step.
pub(crate) fn extend_up(diag: &FlowDiagram, node: Menu) -> Result<Vec<Menu>> {
    let full = diag.universe().full();
    let mut nodes = vec![node];
    let mut cur = node;
    while cur != full {
        let y = diag
            .positive_parents(cur)
            .next()
            .ok_or_else(|| not_conserved(diag, cur))?;
        cur = cur.with(y);
        nodes.push(cur);
    }
    nodes.reverse();
    Ok(nodes)
}

/// Nodes from `node` (inclusive) down to the empty set through the
/// smallest-index positive out-edge at each step.
pub(crate) fn extend_down(diag: &FlowDiagram, node: Menu) -> Result<Vec<Menu>> {
    let mut nodes = vec![node];
    let mut cur = node;
    while !cur.is_empty() {
        let x = diag
            .positive_children(cur)
            .next()
            .ok_or_else(|| not_conserved(diag, cur))?;
        cur = cur.without(x);
        nodes.push(cur);
    }
    Ok(nodes)
}

fn not_conserved(diag: &FlowDiagram, node: Menu) -> Error {
    Error::Domain(format!(
        "positive flow cannot be continued through {}; flow is not conserved",
        diag.universe().menu_label(node)
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    NonUnique(Box<BranchingWitness>),
}

impl Uniqueness {
    pub fn is_unique(&self) -> bool {
        matches!(self, Uniqueness::Unique)
    }
}

/// Unique iff the flow diagram has no pair of supported branching paths.
pub fn is_unique(sys: &ChoiceSystem) -> Result<Uniqueness> {
    let diag = build_flow_diagram(sys);
    Ok(match find_branching_pair(&diag)? {
        None => Uniqueness::Unique,
        Some(w) => Uniqueness::NonUnique(Box::new(w)),
    })
}

/// Two support orders and alternatives `x ≠ y` with `U_π(x) = U_π'(y)`,
/// and `z` ranked below both by both orders with `U_π(z) ≠ U_π'(z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem2Witness {
    pub pi: LinearOrder,
    pub pi_prime: LinearOrder,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Theorem2Witness {
    pub fn holds_for(&self, mix: &Mixture) -> bool {
        use num_traits::Signed;
        let (p, q) = (&self.pi, &self.pi_prime);
        mix.weight(p).is_positive()
            && mix.weight(q).is_positive()
            && self.x != self.y
            && p.upper_contour(self.x) == q.upper_contour(self.y)
            && p.upper_contour(self.z) != q.upper_contour(self.z)
            && p.prefers(self.x, self.z)
            && p.prefers(self.y, self.z)
            && q.prefers(self.x, self.z)
            && q.prefers(self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Theorem2Verdict {
    Unique,
    NonUnique(Theorem2Witness),
}

impl Theorem2Verdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, Theorem2Verdict::Unique)
    }
}

/// Contour-set uniqueness test on the support of `mix`. Support pairs are
/// scanned in lexicographic order, coincidence levels top down, and `z` in
/// universe index order; the first witness wins.
pub fn theorem2_check(mix: &Mixture) -> Theorem2Verdict {
    let n = mix.universe().len();
    let support = mix.support();
    // prefixes[k] = set of the top k+1 alternatives
    let prefixes: Vec<Vec<Menu>> = support
        .iter()
        .map(|o| {
            o.ranking()
                .iter()
                .scan(Menu::EMPTY, |acc, &x| {
                    *acc = acc.with(x);
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let positions: Vec<Vec<usize>> = support.iter().map(LinearOrder::positions).collect();

    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let (p, q) = (&support[i], &support[j]);
            for k in 0..n.saturating_sub(1) {
                let (x, y) = (p.ranking()[k], q.ranking()[k]);
                if prefixes[i][k] != prefixes[j][k] || x == y {
                    continue;
                }
                let below = Menu::full(n).difference(prefixes[i][k]);
                let z = below
                    .iter()
                    .find(|&z| prefixes[i][positions[i][z]] != prefixes[j][positions[j][z]]);
                if let Some(z) = z {
                    return Theorem2Verdict::NonUnique(Theorem2Witness {
                        pi: p.clone(),
                        pi_prime: q.clone(),
                        x,
                        y,
                        z,
                    });
                }
            }
        }
    }
    Theorem2Verdict::Unique
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportVerdict {
    Identified,
    /// Two representations of the same system whose supports differ.
    NotIdentified {
        first: Mixture,
        second: Mixture,
        witness: Box<BranchingWitness>,
    },
}

impl SupportVerdict {
    pub fn is_identified(&self) -> bool {
        matches!(self, SupportVerdict::Identified)
    }
}

pub fn support_identified(sys: &ChoiceSystem) -> Result<SupportVerdict> {
    let diag = build_flow_diagram(sys);
    match find_branching_pair(&diag)? {
        None => Ok(SupportVerdict::Identified),
        Some(w) => {
            let (first, second) = alternative_representations(&diag, &w)?;
            Ok(SupportVerdict::NotIdentified {
                first,
                second,
                witness: Box::new(w),
            })
        }
    }
}

/// The system on `Y` keeping exactly the menus contained in `Y`.
pub fn restrict_system(sys: &ChoiceSystem, subset: Menu) -> Result<ChoiceSystem> {
    let universe = sys.universe();
    if subset.is_empty() {
        return Err(Error::Domain("cannot restrict to the empty set".into()));
    }
    if !subset.is_subset_of(universe.full()) {
        return Err(Error::Domain("restriction set leaves the universe".into()));
    }
    let members: Vec<usize> = subset.iter().collect();
    let restricted = Universe::new(members.iter().map(|&x| universe.label(x).to_string()))?;
    ChoiceSystem::from_fn(restricted, |menu, i| {
        let original = menu.iter().fold(Menu::EMPTY, |acc, k| acc.with(members[k]));
        Ok(sys.prob(original, members[i]).clone())
    })
}
