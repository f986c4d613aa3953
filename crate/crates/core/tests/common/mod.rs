#![allow(dead_code)]

use std::sync::Arc;

use orbex_core::measure::{Atom, MeasureSpace, Piece, SimpleFunction};
use orbex_core::Rational;
use proptest::prelude::*;

/// Raw shape of a space: integer atom weights and diffuse weight, later
/// divided by their total.
#[derive(Clone, Debug)]
pub struct SpaceShape {
    pub atoms: Vec<i64>,
    pub diffuse: i64,
}

impl SpaceShape {
    pub fn build(&self) -> Arc<MeasureSpace> {
        let total: i64 = self.atoms.iter().sum::<i64>() + self.diffuse;
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, w)| Atom { id: format!("p{i}"), weight: Rational::new(*w, total) })
            .collect();
        Arc::new(MeasureSpace::new(atoms, Rational::new(self.diffuse, total)).unwrap())
    }
}

pub fn space_shape(max_atoms: usize, allow_diffuse: bool) -> impl Strategy<Value = SpaceShape> {
    let diffuse = if allow_diffuse { 0i64..=8 } else { 0i64..=0 };
    (prop::collection::vec(1i64..=8, 0..=max_atoms), diffuse)
        .prop_filter("space must have positive mass", |(a, d)| !a.is_empty() || *d > 0)
        .prop_map(|(atoms, diffuse)| SpaceShape { atoms, diffuse })
}

/// Values for each atom plus `(mass weight, value)` pieces.
pub fn function_on(space: Arc<MeasureSpace>) -> impl Strategy<Value = SimpleFunction> {
    let n = space.atoms().len();
    let has_diffuse = space.diffuse_mass().is_positive();
    let pieces = if has_diffuse { 1usize..=4 } else { 0usize..=0 };
    (prop::collection::vec(-5i64..=5, n), prop::collection::vec((1i64..=6, -5i64..=5), pieces)).prop_map(
        move |(atom_values, raw)| {
            let total: i64 = raw.iter().map(|(m, _)| m).sum();
            let pieces = raw
                .iter()
                .map(|(m, v)| Piece::new(Rational::from_int(*v), space.diffuse_mass() * &Rational::new(*m, total)))
                .collect();
            SimpleFunction::new(space.clone(), atom_values.into_iter().map(Rational::from_int).collect(), pieces)
                .unwrap()
        },
    )
}

pub fn arb_function(max_atoms: usize, allow_diffuse: bool) -> impl Strategy<Value = SimpleFunction> {
    space_shape(max_atoms, allow_diffuse).prop_flat_map(|s| function_on(s.build()))
}

/// Two functions on one space, with independent piece layouts.
pub fn arb_pair(max_atoms: usize, allow_diffuse: bool) -> impl Strategy<Value = (SimpleFunction, SimpleFunction)> {
    space_shape(max_atoms, allow_diffuse).prop_flat_map(|s| {
        let space = s.build();
        (function_on(space.clone()), function_on(space))
    })
}

pub fn on(space: &Arc<MeasureSpace>, values: &[&str]) -> SimpleFunction {
    SimpleFunction::on_atoms(space.clone(), values.iter().map(|v| orbex_core::rat(v)).collect()).unwrap()
}
