//! Small named inputs shared by tests, the CLI and the acceptance suite.

use num_traits::{One, Zero};

use crate::model::{ChoiceSystem, LinearOrder, Menu, Mixture, Universe};
use crate::Rational;

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn order(u: &Universe, labels: &str) -> LinearOrder {
    let labels: Vec<String> = labels.chars().map(String::from).collect();
    u.order_from_labels(&labels).expect("fixture order")
}

/// Fishburn's pair over `{a,b,c,d}`: `ν₁` on `a≻b≻c≻d, b≻a≻d≻c` and `ν₂`
/// on `a≻b≻d≻c, b≻a≻c≻d`, each with weight one half.
pub fn fishburn() -> (Universe, Mixture, Mixture) {
    let u = Universe::alphabetic(4).expect("universe");
    let nu1 = Mixture::new(
        u.clone(),
        [(order(&u, "abcd"), half()), (order(&u, "badc"), half())],
    )
    .expect("nu1");
    let nu2 = Mixture::new(
        u.clone(),
        [(order(&u, "abdc"), half()), (order(&u, "bacd"), half())],
    )
    .expect("nu2");
    (u, nu1, nu2)
}

/// Fishburn's `ν₁` with a fifth alternative `e` appended at the bottom of
/// both orders.
pub fn fishburn_extended() -> Mixture {
    let u = Universe::alphabetic(5).expect("universe");
    Mixture::new(
        u.clone(),
        [(order(&u, "abcde"), half()), (order(&u, "badce"), half())],
    )
    .expect("extended")
}

/// A complete system on `{a,b,c}` with `P_{abc}(a) = 1` but `P_{ab}(a) = 0`,
/// so `q(a, {a,b}) = -1`.
pub fn violating_three() -> ChoiceSystem {
    let u = Universe::alphabetic(3).expect("universe");
    ChoiceSystem::from_fn(u, |menu: Menu, x| {
        let chosen = match menu.bits() {
            0b111 => 0,
            0b011 => 1,
            0b101 => 0,
            0b110 => 1,
            _ => x,
        };
        Ok(if x == chosen {
            Rational::one()
        } else {
            Rational::zero()
        })
    })
    .expect("violating system")
}
