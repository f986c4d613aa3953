//! Normalized finite measure spaces and simple functions on them.
//!
//! A space is a finite list of atoms with positive weights plus an atomless
//! (diffuse) part of some total mass; everything sums to exactly one. The
//! diffuse part is modelled as the interval `[0, diffuse_mass)` and a simple
//! function lays its diffuse pieces out consecutively along it, which makes
//! pointwise operations between two functions on the same space well defined
//! (both are refined to the union of their piece boundaries).

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub id: String,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureSpace {
    atoms: Vec<Atom>,
    diffuse_mass: Rational,
}

impl MeasureSpace {
    pub fn new(atoms: Vec<Atom>, diffuse_mass: Rational) -> Result<Self> {
        let mut seen = HashSet::new();
        for atom in &atoms {
            if !seen.insert(atom.id.as_str()) {
                return Err(Error::DuplicateAtom(atom.id.clone()));
            }
            if !atom.weight.is_positive() {
                return Err(Error::Schema(format!(
                    "atom `{}` has non-positive weight {}",
                    atom.id, atom.weight
                )));
            }
        }
        if diffuse_mass.is_negative() {
            return Err(Error::Schema(format!("negative diffuse mass {diffuse_mass}")));
        }
        let total: Rational = atoms.iter().map(|a| &a.weight).sum::<Rational>() + &diffuse_mass;
        if total != Rational::one() {
            return Err(Error::Normalization { total: total.to_string() });
        }
        Ok(MeasureSpace { atoms, diffuse_mass })
    }

    /// Rescales weights and diffuse mass by their total before validating.
    pub fn new_normalized(atoms: Vec<Atom>, diffuse_mass: Rational) -> Result<Self> {
        let total: Rational = atoms.iter().map(|a| &a.weight).sum::<Rational>() + &diffuse_mass;
        if !total.is_positive() {
            return Err(Error::Normalization { total: total.to_string() });
        }
        let atoms = atoms
            .into_iter()
            .map(|a| Atom { id: a.id, weight: &a.weight / &total })
            .collect();
        MeasureSpace::new(atoms, &diffuse_mass / &total)
    }

    /// Purely atomic space with ids `a01, a02, ...` in weight order.
    pub fn atomic(weights: &[Rational]) -> Result<Self> {
        let atoms = weights
            .iter()
            .enumerate()
            .map(|(i, w)| Atom { id: default_atom_id(i), weight: w.clone() })
            .collect();
        MeasureSpace::new(atoms, Rational::zero())
    }

    /// `n` atoms of weight `1/n` each.
    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1, n as i64);
        MeasureSpace::atomic(&vec![w; n]).expect("uniform weights sum to one")
    }

    /// The atomless space of total mass one.
    pub fn atomless() -> Self {
        MeasureSpace { atoms: Vec::new(), diffuse_mass: Rational::one() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn diffuse_mass(&self) -> &Rational {
        &self.diffuse_mass
    }

    pub fn atom_index(&self, id: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.id == id)
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.diffuse_mass.is_zero()
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn to_document(&self) -> SpaceDoc {
        SpaceDoc {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomDoc { id: a.id.clone(), weight: a.weight.clone() })
                .collect(),
            diffuse_mass: self.diffuse_mass.clone(),
        }
    }
}

pub(crate) fn default_atom_id(i: usize) -> String {
    format!("a{:02}", i + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub value: Rational,
    pub mass: Rational,
}

impl Piece {
    pub fn new(value: Rational, mass: Rational) -> Self {
        Piece { value, mass }
    }
}

/// A simple measurable function: one value per atom and a finite list of
/// constant pieces covering the diffuse part.
///
/// Adjacent pieces with equal values are kept apart; the canonical merged
/// form lives in [`crate::scales::StepScale`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleFunction {
    space: Arc<MeasureSpace>,
    atom_values: Vec<Rational>,
    pieces: Vec<Piece>,
}

impl SimpleFunction {
    /// `atom_values` is aligned with `space.atoms()`.
    pub fn new(space: Arc<MeasureSpace>, atom_values: Vec<Rational>, pieces: Vec<Piece>) -> Result<Self> {
        if atom_values.len() != space.atoms.len() {
            return Err(Error::Schema(format!(
                "{} atom values for {} atoms",
                atom_values.len(),
                space.atoms.len()
            )));
        }
        for p in &pieces {
            if !p.mass.is_positive() {
                return Err(Error::Schema(format!("diffuse piece with non-positive mass {}", p.mass)));
            }
        }
        let total: Rational = pieces.iter().map(|p| &p.mass).sum();
        if total != space.diffuse_mass {
            return Err(Error::MassMismatch {
                pieces: total.to_string(),
                expected: space.diffuse_mass.to_string(),
            });
        }
        Ok(SimpleFunction { space, atom_values, pieces })
    }

    /// Builds from an id-keyed map; every atom of the space must be present.
    pub fn from_map(
        space: Arc<MeasureSpace>,
        values: &BTreeMap<String, Rational>,
        pieces: Vec<Piece>,
    ) -> Result<Self> {
        for id in values.keys() {
            if space.atom_index(id).is_none() {
                return Err(Error::UnknownAtom(id.clone()));
            }
        }
        let atom_values = space
            .atoms
            .iter()
            .map(|a| {
                values
                    .get(&a.id)
                    .cloned()
                    .ok_or_else(|| Error::Schema(format!("no value for atom `{}`", a.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        SimpleFunction::new(space, atom_values, pieces)
    }

    /// Function on a purely atomic space.
    pub fn on_atoms(space: Arc<MeasureSpace>, values: Vec<Rational>) -> Result<Self> {
        SimpleFunction::new(space, values, Vec::new())
    }

    pub fn constant(space: Arc<MeasureSpace>, c: Rational) -> Self {
        let atom_values = vec![c.clone(); space.atoms.len()];
        let pieces = if space.diffuse_mass.is_zero() {
            Vec::new()
        } else {
            vec![Piece::new(c, space.diffuse_mass.clone())]
        };
        SimpleFunction { space, atom_values, pieces }
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn atom_values(&self) -> &[Rational] {
        &self.atom_values
    }

    pub fn atom_value(&self, id: &str) -> Option<&Rational> {
        self.space.atom_index(id).map(|i| &self.atom_values[i])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Every `(value, mass)` pair: atoms in space order, then pieces.
    pub fn cells(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.space
            .atoms
            .iter()
            .zip(&self.atom_values)
            .map(|(a, v)| (v, &a.weight))
            .chain(self.pieces.iter().map(|p| (&p.value, &p.mass)))
    }

    /// `∫ f dν`.
    pub fn integral(&self) -> Rational {
        self.cells().map(|(v, m)| v * m).sum()
    }

    pub fn map_values(&self, f: impl Fn(&Rational) -> Rational) -> SimpleFunction {
        SimpleFunction {
            space: self.space.clone(),
            atom_values: self.atom_values.iter().map(&f).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece::new(f(&p.value), p.mass.clone()))
                .collect(),
        }
    }

    pub fn negate(&self) -> SimpleFunction {
        self.map_values(|v| -v)
    }

    pub fn abs(&self) -> SimpleFunction {
        self.map_values(Rational::abs)
    }

    pub fn shift(&self, c: &Rational) -> SimpleFunction {
        self.map_values(|v| v + c)
    }

    pub fn scale(&self, c: &Rational) -> SimpleFunction {
        self.map_values(|v| v * c)
    }

    pub fn same_space(&self, other: &SimpleFunction) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Pointwise combination on the common refinement of both piece layouts.
    pub fn combine(
        &self,
        other: &SimpleFunction,
        op: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<SimpleFunction> {
        if !self.same_space(other) {
            return Err(Error::Schema("functions live on different spaces".into()));
        }
        let atom_values = self
            .atom_values
            .iter()
            .zip(&other.atom_values)
            .map(|(a, b)| op(a, b))
            .collect();
        let pieces = common_refinement(&self.pieces, &other.pieces)
            .into_iter()
            .map(|(mass, a, b)| Piece::new(op(a, b), mass))
            .collect();
        Ok(SimpleFunction { space: self.space.clone(), atom_values, pieces })
    }

    pub fn add(&self, other: &SimpleFunction) -> Result<SimpleFunction> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SimpleFunction) -> Result<SimpleFunction> {
        self.combine(other, |a, b| a - b)
    }

    /// Equality almost everywhere (piece layouts may differ).
    pub fn ae_eq(&self, other: &SimpleFunction) -> bool {
        if !self.same_space(other) || self.atom_values != other.atom_values {
            return false;
        }
        common_refinement(&self.pieces, &other.pieces)
            .iter()
            .all(|(_, a, b)| a == b)
    }

    /// True when the function vanishes almost everywhere.
    pub fn is_zero_ae(&self) -> bool {
        self.cells().all(|(v, _)| v.is_zero())
    }

    pub fn to_document(&self) -> FunctionDoc {
        FunctionDoc {
            space: self.space.to_document(),
            atoms: self
                .space
                .atoms
                .iter()
                .zip(&self.atom_values)
                .map(|(a, v)| (a.id.clone(), v.clone()))
                .collect(),
            diffuse: self
                .pieces
                .iter()
                .map(|p| PieceDoc { value: p.value.clone(), mass: p.mass.clone() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_document()).expect("documents serialize")
    }
}

/// Splits two consecutive layouts of the same total mass at the union of
/// their boundaries; yields `(mass, left value, right value)` per cell.
pub(crate) fn common_refinement<'a>(
    left: &'a [Piece],
    right: &'a [Piece],
) -> Vec<(Rational, &'a Rational, &'a Rational)> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let (mut i, mut j) = (0, 0);
    let mut rem_l = left.first().map(|p| p.mass.clone());
    let mut rem_r = right.first().map(|p| p.mass.clone());
    while let (Some(rl), Some(rr)) = (rem_l.clone(), rem_r.clone()) {
        let step = rl.clone().min(rr.clone());
        out.push((step.clone(), &left[i].value, &right[j].value));
        let nl = &rl - &step;
        let nr = &rr - &step;
        if nl.is_zero() {
            i += 1;
            rem_l = left.get(i).map(|p| p.mass.clone());
        } else {
            rem_l = Some(nl);
        }
        if nr.is_zero() {
            j += 1;
            rem_r = right.get(j).map(|p| p.mass.clone());
        } else {
            rem_r = Some(nr);
        }
    }
    out
}

/// A subdivision of some diffuse pieces of a function into smaller pieces of
/// the same value.
#[derive(Clone, Debug)]
pub struct Refinement {
    source: SimpleFunction,
    splits: BTreeMap<usize, Vec<Rational>>,
}

impl Refinement {
    pub fn new(source: SimpleFunction, splits: BTreeMap<usize, Vec<Rational>>) -> Result<Self> {
        for (&idx, parts) in &splits {
            let piece = source
                .pieces
                .get(idx)
                .ok_or_else(|| Error::Schema(format!("no diffuse piece #{idx}")))?;
            if parts.is_empty() || parts.iter().any(|m| !m.is_positive()) {
                return Err(Error::Schema(format!("split of piece #{idx} needs positive sub-masses")));
            }
            let total: Rational = parts.iter().sum();
            if total != piece.mass {
                return Err(Error::MassMismatch {
                    pieces: total.to_string(),
                    expected: piece.mass.to_string(),
                });
            }
        }
        Ok(Refinement { source, splits })
    }

    pub fn source(&self) -> &SimpleFunction {
        &self.source
    }

    pub fn apply(&self) -> SimpleFunction {
        let mut pieces = Vec::new();
        for (idx, p) in self.source.pieces.iter().enumerate() {
            match self.splits.get(&idx) {
                Some(parts) => pieces.extend(parts.iter().map(|m| Piece::new(p.value.clone(), m.clone()))),
                None => pieces.push(p.clone()),
            }
        }
        SimpleFunction {
            space: self.source.space.clone(),
            atom_values: self.source.atom_values.clone(),
            pieces,
        }
    }
}

/// Splits every diffuse piece into `k` equal-mass pieces.
pub fn refine_diffuse(f: &SimpleFunction, k: usize) -> SimpleFunction {
    assert!(k >= 1, "refinement factor must be positive");
    let k_rat = Rational::from_int(k as i64);
    let splits = f
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| (i, vec![&p.mass / &k_rat; k]))
        .collect();
    Refinement::new(f.clone(), splits)
        .expect("equal splits are valid")
        .apply()
}

// ---------------------------------------------------------------------------
// JSON documents

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub id: String,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    #[serde(default)]
    pub atoms: Vec<AtomDoc>,
    pub diffuse_mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub value: Rational,
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub space: SpaceDoc,
    #[serde(default)]
    pub atoms: BTreeMap<String, Rational>,
    #[serde(default)]
    pub diffuse: Vec<PieceDoc>,
}

impl SpaceDoc {
    fn atoms(&self) -> Vec<Atom> {
        self.atoms
            .iter()
            .map(|a| Atom { id: a.id.clone(), weight: a.weight.clone() })
            .collect()
    }

    pub fn build(&self) -> Result<MeasureSpace> {
        MeasureSpace::new(self.atoms(), self.diffuse_mass.clone())
    }

    /// Total mass before any normalization.
    pub fn total(&self) -> Rational {
        self.atoms.iter().map(|a| &a.weight).sum::<Rational>() + &self.diffuse_mass
    }
}

impl FunctionDoc {
    fn pieces(&self, scale: &Rational) -> Vec<Piece> {
        self.diffuse
            .iter()
            .map(|p| Piece::new(p.value.clone(), &p.mass / scale))
            .collect()
    }

    pub fn build(&self) -> Result<SimpleFunction> {
        let space = Arc::new(self.space.build()?);
        SimpleFunction::from_map(space, &self.atoms, self.pieces(&Rational::one()))
    }

    /// Rescales the space and the piece masses by the space's total mass.
    pub fn build_normalized(&self) -> Result<SimpleFunction> {
        let total = self.space.total();
        if !total.is_positive() {
            return Err(Error::Normalization { total: total.to_string() });
        }
        let space = Arc::new(MeasureSpace::new_normalized(
            self.space.atoms(),
            self.space.diffuse_mass.clone(),
        )?);
        SimpleFunction::from_map(space, &self.atoms, self.pieces(&total))
    }
}

fn schema(e: serde_json::Error) -> Error {
    Error::Schema(e.to_string())
}

pub fn parse_space(document: &str) -> Result<MeasureSpace> {
    let doc: SpaceDoc = serde_json::from_str(document).map_err(schema)?;
    doc.build()
}

/// Parses a function document and binds it to `space`. The document's own
/// `space` member, if present, must describe the same space.
pub fn parse_function(document: &str, space: &Arc<MeasureSpace>) -> Result<SimpleFunction> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Bound {
        space: Option<SpaceDoc>,
        #[serde(default)]
        atoms: BTreeMap<String, Rational>,
        #[serde(default)]
        diffuse: Vec<PieceDoc>,
    }
    let doc: Bound = serde_json::from_str(document).map_err(schema)?;
    if let Some(s) = doc.space {
        if s.build()? != **space {
            return Err(Error::Schema("embedded space differs from the given space".into()));
        }
    }
    let pieces = doc
        .diffuse
        .into_iter()
        .map(|p| Piece::new(p.value, p.mass))
        .collect();
    SimpleFunction::from_map(space.clone(), &doc.atoms, pieces)
}

/// Parses a self-contained function document (space embedded).
pub fn parse_function_document(document: &str) -> Result<SimpleFunction> {
    let doc: FunctionDoc = serde_json::from_str(document).map_err(schema)?;
    doc.build()
}

pub fn parse_function_normalized(document: &str) -> Result<SimpleFunction> {
    let doc: FunctionDoc = serde_json::from_str(document).map_err(schema)?;
    doc.build_normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    const HALF_ATOM: &str = r#"{"atoms":[{"id":"e","weight":"1/2"}],"diffuse_mass":"1/2"}"#;

    #[test]
    fn parses_spaces() {
        let s = parse_space(HALF_ATOM).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert_eq!(s.atoms()[0].weight, rat("1/2"));
        let s = parse_space(r#"{"atoms":[],"diffuse_mass":"1"}"#).unwrap();
        assert!(s.is_atomless());
    }

    #[test]
    fn space_errors() {
        let e = parse_space(r#"{"atoms":[{"id":"e","weight":"1/2"}],"diffuse_mass":"1/4"}"#).unwrap_err();
        assert_eq!(e.code(), "NormalizationError");
        let e = parse_space(
            r#"{"atoms":[{"id":"e","weight":"1/2"},{"id":"e","weight":"1/2"}],"diffuse_mass":"0"}"#,
        )
        .unwrap_err();
        assert_eq!(e.code(), "DuplicateAtomError");
        let e = parse_space(r#"{"atoms":[{"id":"e","weight":"0.5"}],"diffuse_mass":"1/2"}"#).unwrap_err();
        assert_eq!(e.code(), "SchemaError");
        let e = parse_space(r#"{"atoms":[],"diffuse_mass":"1","extra":1}"#).unwrap_err();
        assert_eq!(e.code(), "SchemaError");
    }

    #[test]
    fn parses_functions() {
        let space = Arc::new(parse_space(HALF_ATOM).unwrap());
        let f = parse_function(
            r#"{"atoms":{"e":"3"},"diffuse":[{"value":"4","mass":"1/4"},{"value":"2","mass":"1/4"}]}"#,
            &space,
        )
        .unwrap();
        assert_eq!(f.atom_value("e"), Some(&rat("3")));
        assert_eq!(f.pieces().len(), 2);
        assert_eq!(f.integral(), rat("3/2") + rat("1") + rat("1/2"));
    }

    #[test]
    fn function_errors() {
        let space = Arc::new(parse_space(HALF_ATOM).unwrap());
        let e = parse_function(r#"{"atoms":{"e":"3"},"diffuse":[{"value":"4","mass":"1/3"}]}"#, &space)
            .unwrap_err();
        assert_eq!(e.code(), "MassMismatchError");
        let e = parse_function(
            r#"{"atoms":{"e":"3","z":"1"},"diffuse":[{"value":"4","mass":"1/2"}]}"#,
            &space,
        )
        .unwrap_err();
        assert_eq!(e.code(), "UnknownAtomError");
        let e = parse_function(r#"{"atoms":{},"diffuse":[{"value":"4","mass":"1/2"}]}"#, &space).unwrap_err();
        assert_eq!(e.code(), "SchemaError");
        let e = parse_function(r#"{"atoms":{"e":"1"},"diffuse":[{"value":"4","mass":"0"},{"value":"1","mass":"1/2"}]}"#, &space).unwrap_err();
        assert_eq!(e.code(), "SchemaError");
    }

    #[test]
    fn normalize_rescales_explicitly() {
        let doc = r#"{"space":{"atoms":[{"id":"a","weight":"2"},{"id":"b","weight":"1"}],"diffuse_mass":"1"},
                      "atoms":{"a":"1","b":"2"},"diffuse":[{"value":"5","mass":"1"}]}"#;
        assert_eq!(parse_function_document(doc).unwrap_err().code(), "NormalizationError");
        let f = parse_function_normalized(doc).unwrap();
        assert_eq!(f.space().atoms()[0].weight, rat("1/2"));
        assert_eq!(f.pieces()[0].mass, rat("1/4"));
    }

    #[test]
    fn refine_splits_pieces() {
        let space = Arc::new(MeasureSpace::atomless());
        let f = SimpleFunction::new(
            space,
            vec![],
            vec![Piece::new(rat("4"), rat("1/2")), Piece::new(rat("1"), rat("1/2"))],
        )
        .unwrap();
        let g = refine_diffuse(&f, 2);
        assert_eq!(g.pieces().len(), 4);
        assert_eq!(g.pieces()[0], Piece::new(rat("4"), rat("1/4")));
        assert!(g.ae_eq(&f));
        assert_eq!(refine_diffuse(&f, 1), f);
        assert_eq!(refine_diffuse(&f, 3).pieces().len(), 6);
    }

    #[test]
    fn refinement_validates_masses() {
        let space = Arc::new(MeasureSpace::atomless());
        let f = SimpleFunction::constant(space, rat("1"));
        let bad = Refinement::new(f.clone(), BTreeMap::from([(0, vec![rat("1/2"), rat("1/3")])]));
        assert_eq!(bad.unwrap_err().code(), "MassMismatchError");
        let bad = Refinement::new(f, BTreeMap::from([(3, vec![rat("1")])]));
        assert!(bad.is_err());
    }

    #[test]
    fn combine_refines_layouts() {
        let space = Arc::new(MeasureSpace::atomless());
        let f = SimpleFunction::new(
            space.clone(),
            vec![],
            vec![Piece::new(rat("1"), rat("1/3")), Piece::new(rat("0"), rat("2/3"))],
        )
        .unwrap();
        let g = SimpleFunction::new(
            space,
            vec![],
            vec![Piece::new(rat("2"), rat("1/2")), Piece::new(rat("3"), rat("1/2"))],
        )
        .unwrap();
        let h = f.add(&g).unwrap();
        let pairs: Vec<_> = h.pieces().iter().map(|p| (p.value.to_string(), p.mass.to_string())).collect();
        assert_eq!(
            pairs,
            vec![("3".into(), "1/3".into()), ("2".into(), "1/6".into()), ("3".into(), "1/2".into())]
        );
        assert_eq!(h.integral(), f.integral() + g.integral());
    }

    #[test]
    fn document_round_trip() {
        let space = Arc::new(parse_space(HALF_ATOM).unwrap());
        let f = parse_function(
            r#"{"atoms":{"e":"-3/7"},"diffuse":[{"value":"4","mass":"1/4"},{"value":"4","mass":"1/4"}]}"#,
            &space,
        )
        .unwrap();
        let text = serde_json::to_string(&f.to_document()).unwrap();
        let back = parse_function_document(&text).unwrap();
        assert_eq!(back, f);
    }
}
