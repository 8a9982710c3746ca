//! JSON file formats for mixtures, choice systems and witnesses.
//!
//! Rationals travel as strings in lowest terms (`"1/2"`, `"1"`). Inputs may
//! also give integers, `p/q` fractions or finite decimals (as strings or
//! JSON numbers); decimals are read exactly with a power-of-ten denominator.
//! All output objects have sorted keys.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::decomposition::{DecompositionTrace, PrecedenceLink, ScrumVerdict};
use crate::error::{Error, Result, Violation};
use crate::identification::{BranchingWitness, Theorem2Witness};
use crate::model::{ChoiceSystem, LinearOrder, Menu, Mixture, Universe};
use crate::Rational;

pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not an exact rational: {text:?}"));
    let int = |s: &str| -> Result<BigInt> {
        if s.is_empty()
            || !s
                .trim_start_matches(['+', '-'])
                .chars()
                .all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    if let Some((p, q)) = t.split_once('/') {
        let (p, q) = (int(p)?, int(q)?);
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = match whole.trim_start_matches(['+', '-']) {
            "" => BigInt::zero(),
            w => int(w)?,
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = whole * &scale + int(frac)?;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    Ok(Rational::from_integer(int(t)?))
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

fn rational_value(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['e', 'E']) {
                return Err(Error::Parse(format!(
                    "exponent notation not accepted: {text}"
                )));
            }
            parse_rational(&text)
        }
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    alternatives: Vec<String>,
    atoms: Vec<AtomEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    order: Vec<String>,
    weight: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    alternatives: Vec<String>,
    menus: Vec<MenuEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MenuEntry {
    menu: Vec<String>,
    probs: BTreeMap<String, Value>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn mixture_from_json(text: &str) -> Result<Mixture> {
    let file: MixtureFile = from_json(text)?;
    let universe = Universe::new(file.alternatives)?;
    let atoms = file
        .atoms
        .iter()
        .map(|a| {
            Ok((
                universe.order_from_labels(&a.order)?,
                rational_value(&a.weight)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Mixture::new(universe, atoms)
}

pub fn system_from_json(text: &str) -> Result<ChoiceSystem> {
    let file: SystemFile = from_json(text)?;
    let universe = Universe::new(file.alternatives)?;
    let n = universe.len();
    let mut table: Vec<Option<Vec<Rational>>> = vec![None; universe.node_count()];
    for entry in &file.menus {
        let menu = universe.menu_from_labels(&entry.menu)?;
        let label = universe.menu_label(menu);
        if menu.is_empty() {
            return Err(Error::Parse(
                "the empty menu cannot carry probabilities".into(),
            ));
        }
        if table[menu.bits() as usize].is_some() {
            return Err(Error::Parse(format!("menu {label} listed twice")));
        }
        let mut row = vec![Rational::zero(); n];
        let mut listed = Menu::EMPTY;
        for (name, value) in &entry.probs {
            let x = universe
                .index_of(name)
                .ok_or_else(|| Error::Parse(format!("unknown alternative {name:?}")))?;
            if !menu.contains(x) {
                return Err(Error::Parse(format!("{name} is not in menu {label}")));
            }
            row[x] = rational_value(value)?;
            listed = listed.with(x);
        }
        if listed != menu {
            return Err(Error::Parse(format!(
                "menu {label} is missing probabilities"
            )));
        }
        table[menu.bits() as usize] = Some(row);
    }
    if let Some(bits) = (1..universe.node_count()).find(|&b| table[b].is_none()) {
        return Err(Error::Parse(format!(
            "menu {} is missing",
            universe.menu_label(Menu::from_bits(bits as u32))
        )));
    }
    ChoiceSystem::from_fn(universe, |menu, x| {
        Ok(table[menu.bits() as usize].as_ref().expect("complete")[x].clone())
    })
}

pub fn order_json(universe: &Universe, order: &LinearOrder) -> Value {
    json!(order
        .ranking()
        .iter()
        .map(|&x| universe.label(x))
        .collect::<Vec<_>>())
}

pub fn menu_json(universe: &Universe, menu: Menu) -> Value {
    json!(menu.iter().map(|x| universe.label(x)).collect::<Vec<_>>())
}

pub fn mixture_to_json(mix: &Mixture) -> Value {
    let u = mix.universe();
    let atoms: Vec<Value> = mix
        .atoms()
        .map(|(o, w)| json!({ "order": order_json(u, o), "weight": format_rational(w) }))
        .collect();
    json!({ "alternatives": u.labels(), "atoms": atoms })
}

pub fn system_to_json(sys: &ChoiceSystem) -> Value {
    let u = sys.universe();
    let menus: Vec<Value> = u
        .menus_top_down()
        .into_iter()
        .map(|m| {
            let probs: serde_json::Map<String, Value> = m
                .iter()
                .map(|x| {
                    (
                        u.label(x).to_string(),
                        json!(format_rational(sys.prob(m, x))),
                    )
                })
                .collect();
            json!({ "menu": menu_json(u, m), "probs": probs })
        })
        .collect();
    json!({ "alternatives": u.labels(), "menus": menus })
}

pub fn violation_json(universe: &Universe, v: &Violation) -> Value {
    json!({
        "alternative": universe.label(v.alternative),
        "menu": menu_json(universe, v.menu),
        "value": format_rational(&v.value),
    })
}

pub fn branching_witness_json(universe: &Universe, w: &BranchingWitness) -> Value {
    let (i, j) = w.section();
    let edge = |e: &crate::flow::Edge| {
        json!({
            "from": universe.menu_label(e.source),
            "to": universe.menu_label(e.target()),
        })
    };
    json!({
        "rho": order_json(universe, &w.rho.to_order()),
        "rho_prime": order_json(universe, &w.rho_prime.to_order()),
        "rho2": order_json(universe, &w.rho2.to_order()),
        "rho3": order_json(universe, &w.rho3.to_order()),
        "merge_node": universe.menu_label(w.merge_node),
        "split_node": universe.menu_label(w.split_node),
        "in_edges": w.in_edges.iter().map(edge).collect::<Vec<_>>(),
        "out_edges": w.out_edges.iter().map(edge).collect::<Vec<_>>(),
        "section": [i, j],
    })
}

pub fn theorem2_witness_json(universe: &Universe, w: &Theorem2Witness) -> Value {
    json!({
        "pi": order_json(universe, &w.pi),
        "pi_prime": order_json(universe, &w.pi_prime),
        "x": universe.label(w.x),
        "y": universe.label(w.y),
        "z": universe.label(w.z),
    })
}

pub fn trace_json(universe: &Universe, trace: &DecompositionTrace) -> Value {
    json!(trace
        .steps
        .iter()
        .map(
            |s| json!({ "order": order_json(universe, &s.order), "flow": format_rational(&s.flow) })
        )
        .collect::<Vec<_>>())
}

pub fn scrum_json(universe: &Universe, verdict: &ScrumVerdict) -> Value {
    match verdict {
        ScrumVerdict::SingleCrossing { ordering } => json!({
            "single_crossing": true,
            "ordering": ordering.iter().map(|o| order_json(universe, o)).collect::<Vec<_>>(),
        }),
        ScrumVerdict::NotSingleCrossing { cycle } => {
            let link = |l: &PrecedenceLink| {
                json!({
                    "earlier": order_json(universe, &l.earlier),
                    "later": order_json(universe, &l.later),
                    "pair": [universe.label(l.x), universe.label(l.y)],
                })
            };
            json!({ "single_crossing": false, "cycle": cycle.iter().map(link).collect::<Vec<_>>() })
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::induce_choice_system;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), r(1, 2));
        assert_eq!(parse_rational("2/4").unwrap(), r(1, 2));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert_eq!(parse_rational("-1/3").unwrap(), r(-1, 3));
        assert_eq!(parse_rational("0.125").unwrap(), r(1, 8));
        assert_eq!(parse_rational("-0.5").unwrap(), r(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        for bad in ["", "1/0", "a", "1/2/3", "1.", "0.5e3", "1 / 2x"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(format_rational(&r(2, 4)), "1/2");
        assert_eq!(format_rational(&r(3, 1)), "3");
        assert_eq!(format_rational(&r(1, -2)), "-1/2");
    }

    #[test]
    fn mixture_parsing() {
        let text = r#"{"alternatives":["a","b","c","d"],
            "atoms":[{"order":["a","b","c","d"],"weight":"1/2"},
                     {"order":["b","a","d","c"],"weight":0.5}]}"#;
        let mix = mixture_from_json(text).unwrap();
        let (_, nu1, _) = fixtures::fishburn();
        assert_eq!(mix, nu1);
        let round = mixture_from_json(&to_pretty(&mixture_to_json(&mix))).unwrap();
        assert_eq!(round, mix);
        let unknown = r#"{"alternatives":["a","b"],"atoms":[{"order":["a","z"],"weight":"1"}]}"#;
        assert!(matches!(mixture_from_json(unknown), Err(Error::Parse(_))));
        let short = r#"{"alternatives":["a","b"],"atoms":[{"order":["a"],"weight":"1"}]}"#;
        assert!(mixture_from_json(short).is_err());
        assert!(mixture_from_json("{").is_err());
    }

    #[test]
    fn system_round_trip_is_fixed_point() {
        let (_, nu1, _) = fixtures::fishburn();
        let sys = induce_choice_system(&nu1);
        let text = to_pretty(&system_to_json(&sys));
        let back = system_from_json(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(to_pretty(&system_to_json(&back)), text);
    }

    #[test]
    fn system_parsing_errors() {
        let missing = r#"{"alternatives":["a","b"],"menus":[
            {"menu":["a"],"probs":{"a":"1"}},{"menu":["b"],"probs":{"b":"1"}}]}"#;
        assert!(matches!(system_from_json(missing), Err(Error::Parse(_))));
        let twice = r#"{"alternatives":["a"],"menus":[
            {"menu":["a"],"probs":{"a":"1"}},{"menu":["a"],"probs":{"a":"1"}}]}"#;
        assert!(matches!(system_from_json(twice), Err(Error::Parse(_))));
        let outside = r#"{"alternatives":["a","b"],"menus":[
            {"menu":["a"],"probs":{"a":"1","b":"0"}},{"menu":["b"],"probs":{"b":"1"}},
            {"menu":["a","b"],"probs":{"a":"1","b":"0"}}]}"#;
        assert!(matches!(system_from_json(outside), Err(Error::Parse(_))));
        let unbalanced = r#"{"alternatives":["a","b"],"menus":[
            {"menu":["a"],"probs":{"a":"1"}},{"menu":["b"],"probs":{"b":"1"}},
            {"menu":["a","b"],"probs":{"a":"1","b":"1/2"}}]}"#;
        assert!(matches!(
            system_from_json(unbalanced),
            Err(Error::System(_))
        ));
    }

    #[test]
    fn output_keys_are_sorted() {
        let (_, nu1, _) = fixtures::fishburn();
        let text = serde_json::to_string(&mixture_to_json(&nu1)).unwrap();
        assert!(text.starts_with(r#"{"alternatives":"#));
        assert!(text.contains(r#"{"order":["a","b","c","d"],"weight":"1/2"}"#));
    }
}
