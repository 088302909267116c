//! Satisfiability, complement splitting, unsat cores and interpolation over
//! configuration spaces.
//!
//! Domains are small bounded integers, so everything here is decided by exact
//! box reasoning; no external solver is involved. All tie-breaking is
//! lexicographic by feature declaration order then numeric value, which keeps
//! witnesses, splits and cores reproducible.

use super::{to_boxes, Atom, Config, ConfigSpace, FeatError, FeatExp, Rel};

/// An atom or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn to_featexp(&self) -> FeatExp {
        let e = FeatExp::Atom(self.atom.clone());
        if self.positive {
            e
        } else {
            e.not()
        }
    }
}

impl std::fmt::Display for Literal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "!{}", self.atom)
        }
    }
}

/// A minimal unsatisfiable core: an ordered list of literals whose
/// conjunction is unsatisfiable within the space, while every proper subset
/// is satisfiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Core {
    pub literals: Vec<Literal>,
}

/// Satisfiability of `psi` within the space. Returns the lexicographically
/// smallest witness configuration, or `None` when `⟦psi⟧ ∩ K` is empty.
pub fn sat(space: &ConfigSpace, psi: &FeatExp) -> Option<Config> {
    let boxes = to_boxes(space, psi);
    let corner = boxes
        .iter()
        .map(|b| b.lower_corner())
        .min()?;
    Some(Config::new(
        space
            .features()
            .iter()
            .zip(corner)
            .map(|(f, v)| (f.name.clone(), v))
            .collect(),
    ))
}

/// The join abstraction of `psi`: true iff some member of the space
/// satisfies it.
pub fn alpha_join(space: &ConfigSpace, psi: &FeatExp) -> bool {
    !to_boxes(space, psi).is_empty()
}

/// Partitions `⟦target⟧ ∩ K` into boxes and renders each as a conjunction of
/// interval atoms. Callers pass the complement `!psi` of a counterexample
/// expression. Returns the empty list iff the intersection is empty.
pub fn split(space: &ConfigSpace, target: &FeatExp) -> Vec<FeatExp> {
    to_boxes(space, target)
        .iter()
        .map(|b| b.to_featexp(space))
        .collect()
}

/// Deletion-based minimal unsatisfiable core, scanning literals in input
/// order. The conjunction of `literals` must be unsatisfiable within the
/// space (its domains and validity included).
pub fn unsat_core(space: &ConfigSpace, literals: &[Literal]) -> Result<Core, FeatError> {
    let conj = |ls: &[Literal]| -> FeatExp {
        FeatExp::conjunction(ls.iter().map(|l| l.to_featexp()).collect())
    };
    if sat(space, &conj(literals)).is_some() {
        return Err(FeatError::SatisfiableCore);
    }
    let mut core: Vec<Literal> = literals.to_vec();
    let mut i = 0;
    while i < core.len() {
        let mut candidate = core.clone();
        candidate.remove(i);
        if sat(space, &conj(&candidate)).is_none() {
            core = candidate;
        } else {
            i += 1;
        }
    }
    Ok(Core { literals: core })
}

/// Whether the conjunction of core literals is satisfiable over the
/// unbounded integers, i.e. whether the conflict needs the domain or
/// validity constraints of the space to manifest.
fn core_satisfiable_unbounded(core: &Core) -> bool {
    let mut features: Vec<&str> = core.literals.iter().map(|l| l.atom.feature.as_str()).collect();
    features.dedup();
    features.sort_unstable();
    features.dedup();
    for feat in features {
        // intersect intervals, collect punctures from !(A=n)
        let mut lo = i64::MIN;
        let mut hi = i64::MAX;
        let mut eqs: Vec<i64> = Vec::new();
        let mut punctures: Vec<i64> = Vec::new();
        for l in core.literals.iter().filter(|l| l.atom.feature == feat) {
            match (l.atom.rel, l.positive) {
                (Rel::Eq, true) => eqs.push(l.atom.value),
                (Rel::Eq, false) => punctures.push(l.atom.value),
                (Rel::Lt, true) => hi = hi.min(l.atom.value - 1),
                (Rel::Lt, false) => lo = lo.max(l.atom.value),
            }
        }
        eqs.sort_unstable();
        eqs.dedup();
        if eqs.len() > 1 {
            return false;
        }
        if let Some(v) = eqs.first() {
            if *v < lo || *v > hi || punctures.contains(v) {
                return false;
            }
            continue;
        }
        if lo > hi {
            return false;
        }
        if lo == i64::MIN || hi == i64::MAX {
            continue; // infinite interval survives finitely many punctures
        }
        punctures.sort_unstable();
        punctures.dedup();
        let punctured = punctures.iter().filter(|p| lo <= **p && **p <= hi).count() as i64;
        if hi - lo + 1 <= punctured {
            return false;
        }
    }
    true
}

/// Computes a refinement expression for a spurious counterexample: `psi`
/// must be a conjunction of (possibly negated) atoms that is unsatisfiable
/// within the space. The result separates the space so that the conflict
/// cannot survive in both halves: when the core is self-contradictory the
/// first core literal (by feature order, then core order) is returned; when
/// the conflict involves the domain or validity constraints, the conjunction
/// of the core literals is returned.
pub fn interpolate(space: &ConfigSpace, psi: &FeatExp) -> Result<FeatExp, FeatError> {
    let literals = psi.literals().ok_or(FeatError::NotConjunction)?;
    if sat(space, psi).is_some() {
        return Err(FeatError::InterpolateSatisfiable);
    }
    let core = unsat_core(space, &literals)?;
    if core_satisfiable_unbounded(&core) {
        Ok(FeatExp::conjunction(
            core.literals.iter().map(|l| l.to_featexp()).collect(),
        ))
    } else {
        let first = core
            .literals
            .iter()
            .enumerate()
            .min_by_key(|(i, l)| {
                (
                    space.feature_index(&l.atom.feature).unwrap_or(usize::MAX),
                    *i,
                )
            })
            .map(|(_, l)| l.clone())
            .expect("unsat core is nonempty");
        Ok(first.to_featexp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featexp::FeatureDecl;

    fn space_a() -> ConfigSpace {
        ConfigSpace::new(vec![FeatureDecl::new("A", 0, 7)]).unwrap()
    }

    fn space_ab() -> ConfigSpace {
        ConfigSpace::new(vec![FeatureDecl::new("A", 0, 7), FeatureDecl::new("B", 0, 7)]).unwrap()
    }

    fn lit(feature: &str, rel: Rel, value: i64, positive: bool) -> Literal {
        Literal {
            atom: Atom {
                feature: feature.into(),
                rel,
                value,
            },
            positive,
        }
    }

    #[test]
    fn sat_contradiction_is_absent() {
        let psi = FeatExp::eq("A", 3).and(FeatExp::eq("A", 5));
        assert!(sat(&space_a(), &psi).is_none());
    }

    #[test]
    fn sat_true_yields_smallest_member() {
        let k = sat(&space_a(), &FeatExp::True).unwrap();
        assert_eq!(k.get("A"), Some(0));
    }

    #[test]
    fn sat_witness_is_lexicographically_smallest() {
        // brute-force oracle over all 64 configs
        let space = space_ab();
        let psi = FeatExp::lt("A", 5).not().and(FeatExp::eq("B", 2));
        let expect = space
            .members()
            .into_iter()
            .find(|k| psi.eval(k).unwrap())
            .unwrap();
        assert_eq!(expect.get("A"), Some(5));
        assert_eq!(expect.get("B"), Some(2));
        assert_eq!(sat(&space, &psi), Some(expect));
    }

    #[test]
    fn alpha_join_in_and_out_of_domain() {
        assert!(alpha_join(&space_a(), &FeatExp::eq("A", 3)));
        assert!(!alpha_join(&space_a(), &FeatExp::eq("A", 9)));
    }

    #[test]
    fn alpha_join_respects_validity() {
        // enumerate valid configs {4..7}
        let space = space_a().restrict(&FeatExp::lt("A", 4).not()).unwrap();
        assert!(!alpha_join(&space, &FeatExp::eq("A", 2)));
        assert!(alpha_join(&space, &FeatExp::eq("A", 4)));
    }

    #[test]
    fn split_complement_of_point() {
        use crate::featexp::IntervalBox;
        let space = space_ab();
        let parts = split(&space, &FeatExp::eq("A", 3).not());
        assert_eq!(parts.len(), 2);
        // (0<=A<=2) and (4<=A<=7), with B unconstrained
        let b0 = to_boxes(&space, &parts[0]);
        let b1 = to_boxes(&space, &parts[1]);
        assert_eq!(b0, vec![IntervalBox::new(vec![(0, 2), (0, 7)])]);
        assert_eq!(b1, vec![IntervalBox::new(vec![(4, 7), (0, 7)])]);
    }

    #[test]
    fn split_false_is_empty() {
        assert!(split(&space_a(), &FeatExp::False).is_empty());
    }

    #[test]
    fn split_interval_complement() {
        let parts = split(&space_a(), &FeatExp::lt("A", 2).not());
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], FeatExp::lt("A", 2).not());
    }

    #[test]
    fn core_keeps_both_contradicting_equalities() {
        let lits = vec![lit("A", Rel::Eq, 3, true), lit("A", Rel::Eq, 5, true)];
        let core = unsat_core(&space_a(), &lits).unwrap();
        assert_eq!(core.literals, lits);
    }

    #[test]
    fn core_drops_irrelevant_literal() {
        let space = space_ab();
        let lits = vec![
            lit("A", Rel::Lt, 2, true),
            lit("A", Rel::Lt, 2, false),
            lit("B", Rel::Eq, 1, true),
        ];
        let core = unsat_core(&space, &lits).unwrap();
        assert_eq!(core.literals, lits[0..2].to_vec());
    }

    #[test]
    fn core_against_domain_alone() {
        // each proper subset (the empty set) is satisfiable
        let lits = vec![lit("A", Rel::Eq, 9, true)];
        let core = unsat_core(&space_a(), &lits).unwrap();
        assert_eq!(core.literals, lits);
    }

    #[test]
    fn core_of_satisfiable_conjunction_errors() {
        let lits = vec![lit("A", Rel::Eq, 3, true)];
        assert_eq!(
            unsat_core(&space_a(), &lits).unwrap_err(),
            FeatError::SatisfiableCore
        );
    }

    #[test]
    fn interpolate_first_core_atom() {
        let psi = FeatExp::eq("A", 3).and(FeatExp::eq("A", 5));
        let out = interpolate(&space_a(), &psi).unwrap();
        assert_eq!(out, FeatExp::eq("A", 3));
        // refinement guarantee by enumeration of both sub-families
        let space = space_a();
        for half in [out.clone(), out.clone().not()] {
            let sub = space.restrict(&half).unwrap();
            assert!(sat(&sub, &psi).is_none());
        }
    }

    #[test]
    fn interpolate_complementary_pair() {
        let psi = FeatExp::lt("A", 2).and(FeatExp::lt("A", 2).not());
        let out = interpolate(&space_a(), &psi).unwrap();
        assert_eq!(out, FeatExp::lt("A", 2));
    }

    #[test]
    fn interpolate_skips_irrelevant_feature() {
        let space = space_ab();
        let psi = FeatExp::eq("B", 1)
            .and(FeatExp::eq("A", 2))
            .and(FeatExp::eq("A", 6));
        let out = interpolate(&space, &psi).unwrap();
        assert_eq!(out, FeatExp::eq("A", 2));
    }

    #[test]
    fn interpolate_satisfiable_errors() {
        let psi = FeatExp::eq("A", 3);
        assert_eq!(
            interpolate(&space_a(), &psi).unwrap_err(),
            FeatError::InterpolateSatisfiable
        );
    }
}
