//! Numerical features, configuration spaces and feature expressions.
//!
//! A feature is a bounded integer parameter. A configuration assigns a value
//! to every feature of a space; the space's member set is the product of the
//! feature domains filtered by a validity constraint. Feature expressions are
//! propositional formulas over `A = n` / `A < n` atoms and decorate family
//! transitions as presence conditions.

mod boxes;
mod solve;

pub use boxes::{to_boxes, IntervalBox};
pub use solve::{alpha_join, interpolate, sat, split, unsat_core, Core, Literal};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatError {
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("duplicate feature '{0}'")]
    DuplicateFeature(String),
    #[error("feature '{name}' has empty domain [{lo}, {hi}]")]
    EmptyDomain { name: String, lo: i64, hi: i64 },
    #[error("value {value} outside domain [{lo}, {hi}] of feature '{name}'")]
    OutOfDomain {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("configuration does not assign feature '{0}'")]
    UnassignedFeature(String),
    #[error("unsat core requested for a satisfiable conjunction")]
    SatisfiableCore,
    #[error("interpolation requires a conjunction of (negated) atoms")]
    NotConjunction,
    #[error("interpolation requires a formula unsatisfiable within the space")]
    InterpolateSatisfiable,
}

/// A bounded integer feature with an inclusive domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

impl FeatureDecl {
    pub fn new(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        FeatureDecl {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn domain_size(&self) -> u128 {
        (self.hi - self.lo + 1) as u128
    }
}

/// Comparison relation of an atom. The grammar admits equality and strict
/// less-than; other comparisons are derived (`A >= n` is `!(A < n)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Lt,
}

/// An atomic constraint `feature ⋈ value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub feature: String,
    pub rel: Rel,
    pub value: i64,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rel {
            Rel::Eq => write!(f, "{}={}", self.feature, self.value),
            Rel::Lt => write!(f, "{}<{}", self.feature, self.value),
        }
    }
}

/// Propositional feature expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatExp {
    True,
    False,
    Atom(Atom),
    Not(Box<FeatExp>),
    And(Box<FeatExp>, Box<FeatExp>),
    Or(Box<FeatExp>, Box<FeatExp>),
}

impl FeatExp {
    pub fn atom(feature: impl Into<String>, rel: Rel, value: i64) -> FeatExp {
        FeatExp::Atom(Atom {
            feature: feature.into(),
            rel,
            value,
        })
    }

    pub fn eq(feature: impl Into<String>, value: i64) -> FeatExp {
        FeatExp::atom(feature, Rel::Eq, value)
    }

    pub fn lt(feature: impl Into<String>, value: i64) -> FeatExp {
        FeatExp::atom(feature, Rel::Lt, value)
    }

    /// `A <= n`, derived as `A < n+1`.
    pub fn le(feature: impl Into<String>, value: i64) -> FeatExp {
        FeatExp::atom(feature, Rel::Lt, value + 1)
    }

    /// `A >= n`, derived as `!(A < n)`.
    pub fn ge(feature: impl Into<String>, value: i64) -> FeatExp {
        FeatExp::lt(feature, value).not()
    }

    /// `A > n`, derived as `!(A < n+1)`.
    pub fn gt(feature: impl Into<String>, value: i64) -> FeatExp {
        FeatExp::lt(feature, value + 1).not()
    }

    pub fn not(self) -> FeatExp {
        FeatExp::Not(Box::new(self))
    }

    pub fn and(self, other: FeatExp) -> FeatExp {
        FeatExp::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: FeatExp) -> FeatExp {
        FeatExp::Or(Box::new(self), Box::new(other))
    }

    /// Balanced conjunction of a list (avoids deep chains on long traces).
    pub fn conjunction(mut parts: Vec<FeatExp>) -> FeatExp {
        if parts.is_empty() {
            return FeatExp::True;
        }
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len() / 2 + 1);
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.and(b)),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        parts.pop().unwrap()
    }

    /// Balanced disjunction of a list.
    pub fn disjunction(mut parts: Vec<FeatExp>) -> FeatExp {
        if parts.is_empty() {
            return FeatExp::False;
        }
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len() / 2 + 1);
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.or(b)),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        parts.pop().unwrap()
    }

    /// Evaluates the expression under a total configuration.
    pub fn eval(&self, k: &Config) -> Result<bool, FeatError> {
        match self {
            FeatExp::True => Ok(true),
            FeatExp::False => Ok(false),
            FeatExp::Atom(a) => {
                let v = k
                    .get(&a.feature)
                    .ok_or_else(|| FeatError::UnknownFeature(a.feature.clone()))?;
                Ok(match a.rel {
                    Rel::Eq => v == a.value,
                    Rel::Lt => v < a.value,
                })
            }
            FeatExp::Not(e) => Ok(!e.eval(k)?),
            FeatExp::And(a, b) => Ok(a.eval(k)? && b.eval(k)?),
            FeatExp::Or(a, b) => Ok(a.eval(k)? || b.eval(k)?),
        }
    }

    /// Constant folding, double-negation elimination and structural
    /// deduplication of conjuncts/disjuncts. Semantics-preserving; duplicate
    /// atoms collapse but contradictions are kept as written.
    pub fn simplify(&self) -> FeatExp {
        match self {
            FeatExp::True | FeatExp::False | FeatExp::Atom(_) => self.clone(),
            FeatExp::Not(e) => match e.simplify() {
                FeatExp::True => FeatExp::False,
                FeatExp::False => FeatExp::True,
                FeatExp::Not(inner) => *inner,
                s => s.not(),
            },
            FeatExp::And(_, _) => {
                let mut parts = Vec::new();
                for c in self.conjuncts() {
                    match c.simplify() {
                        FeatExp::True => {}
                        FeatExp::False => return FeatExp::False,
                        s => {
                            for p in flatten_and(&s) {
                                if !parts.contains(&p) {
                                    parts.push(p);
                                }
                            }
                        }
                    }
                }
                FeatExp::conjunction(parts)
            }
            FeatExp::Or(a, b) => {
                let mut parts = Vec::new();
                for c in [a.simplify(), b.simplify()] {
                    match c {
                        FeatExp::False => {}
                        FeatExp::True => return FeatExp::True,
                        s => {
                            for p in flatten_or(&s) {
                                if !parts.contains(&p) {
                                    parts.push(p);
                                }
                            }
                        }
                    }
                }
                FeatExp::disjunction(parts)
            }
        }
    }

    /// Top-level conjuncts, flattening nested `And` nodes.
    pub fn conjuncts(&self) -> Vec<FeatExp> {
        flatten_and(self)
    }

    /// Views the expression as a conjunction of (possibly negated) atoms.
    /// `True` conjuncts are dropped. Returns `None` if any conjunct is not a
    /// literal.
    pub fn literals(&self) -> Option<Vec<Literal>> {
        let mut out = Vec::new();
        for c in self.conjuncts() {
            match c {
                FeatExp::True => {}
                FeatExp::Atom(a) => out.push(Literal {
                    atom: a,
                    positive: true,
                }),
                FeatExp::Not(inner) => match *inner {
                    FeatExp::Atom(a) => out.push(Literal {
                        atom: a,
                        positive: false,
                    }),
                    _ => return None,
                },
                _ => return None,
            }
        }
        Some(out)
    }

    /// Names of all features referenced by atoms.
    pub fn features(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.collect_features(&mut set);
        set
    }

    fn collect_features(&self, set: &mut BTreeSet<String>) {
        match self {
            FeatExp::True | FeatExp::False => {}
            FeatExp::Atom(a) => {
                set.insert(a.feature.clone());
            }
            FeatExp::Not(e) => e.collect_features(set),
            FeatExp::And(a, b) | FeatExp::Or(a, b) => {
                a.collect_features(set);
                b.collect_features(set);
            }
        }
    }
}

fn flatten_and(e: &FeatExp) -> Vec<FeatExp> {
    match e {
        FeatExp::And(a, b) => {
            let mut v = flatten_and(a);
            v.extend(flatten_and(b));
            v
        }
        other => vec![other.clone()],
    }
}

fn flatten_or(e: &FeatExp) -> Vec<FeatExp> {
    match e {
        FeatExp::Or(a, b) => {
            let mut v = flatten_or(a);
            v.extend(flatten_or(b));
            v
        }
        other => vec![other.clone()],
    }
}

impl fmt::Display for FeatExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: ! > && > ||.
        fn prec(e: &FeatExp) -> u8 {
            match e {
                FeatExp::Or(_, _) => 1,
                FeatExp::And(_, _) => 2,
                _ => 3,
            }
        }
        fn go(e: &FeatExp, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
            let p = prec(e);
            let paren = p < min;
            if paren {
                write!(f, "(")?;
            }
            match e {
                FeatExp::True => write!(f, "true")?,
                FeatExp::False => write!(f, "false")?,
                FeatExp::Atom(a) => write!(f, "{a}")?,
                FeatExp::Not(inner) => {
                    write!(f, "!")?;
                    match **inner {
                        FeatExp::Atom(_) | FeatExp::True | FeatExp::False => {
                            go(inner, f, 3)?;
                        }
                        _ => {
                            write!(f, "(")?;
                            go(inner, f, 0)?;
                            write!(f, ")")?;
                        }
                    }
                }
                FeatExp::And(a, b) => {
                    go(a, f, 2)?;
                    write!(f, " && ")?;
                    go(b, f, 2)?;
                }
                FeatExp::Or(a, b) => {
                    go(a, f, 1)?;
                    write!(f, " || ")?;
                    go(b, f, 1)?;
                }
            }
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, f, 0)
    }
}

/// A total assignment of values to the features of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    values: Vec<(String, i64)>,
}

impl Config {
    pub fn new(values: Vec<(String, i64)>) -> Self {
        Config { values }
    }

    pub fn get(&self, feature: &str) -> Option<i64> {
        self.values
            .iter()
            .find(|(n, _)| n == feature)
            .map(|(_, v)| *v)
    }

    pub fn values(&self) -> &[(String, i64)] {
        &self.values
    }

    /// The characteristic formula `(A1=k(A1)) && ... && (Am=k(Am))`.
    pub fn characteristic(&self) -> FeatExp {
        FeatExp::conjunction(
            self.values
                .iter()
                .map(|(n, v)| FeatExp::eq(n.clone(), *v))
                .collect(),
        )
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{v}")?;
        }
        write!(f, "}}")
    }
}

/// An ordered set of feature declarations plus a validity constraint. The
/// member set is the product of the domains filtered by validity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    features: Vec<FeatureDecl>,
    validity: FeatExp,
}

impl ConfigSpace {
    pub fn new(features: Vec<FeatureDecl>) -> Result<Self, FeatError> {
        let mut seen = BTreeSet::new();
        for fd in &features {
            if fd.lo > fd.hi {
                return Err(FeatError::EmptyDomain {
                    name: fd.name.clone(),
                    lo: fd.lo,
                    hi: fd.hi,
                });
            }
            if !seen.insert(fd.name.clone()) {
                return Err(FeatError::DuplicateFeature(fd.name.clone()));
            }
        }
        Ok(ConfigSpace {
            features,
            validity: FeatExp::True,
        })
    }

    /// The degenerate space with no features; it has exactly one member, the
    /// empty valuation.
    pub fn empty() -> Self {
        ConfigSpace {
            features: Vec::new(),
            validity: FeatExp::True,
        }
    }

    pub fn features(&self) -> &[FeatureDecl] {
        &self.features
    }

    pub fn validity(&self) -> &FeatExp {
        &self.validity
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDecl> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Checks that every feature referenced by `psi` is declared.
    pub fn check_features(&self, psi: &FeatExp) -> Result<(), FeatError> {
        for name in psi.features() {
            if self.feature_index(&name).is_none() {
                return Err(FeatError::UnknownFeature(name));
            }
        }
        Ok(())
    }

    /// Restricts the space: the result's validity is `validity && psi`.
    pub fn restrict(&self, psi: &FeatExp) -> Result<ConfigSpace, FeatError> {
        self.check_features(psi)?;
        Ok(ConfigSpace {
            features: self.features.clone(),
            validity: self.validity.clone().and(psi.clone()).simplify(),
        })
    }

    pub fn with_validity(mut self, psi: FeatExp) -> Result<ConfigSpace, FeatError> {
        self.check_features(&psi)?;
        self.validity = psi;
        Ok(self)
    }

    /// Number of members (validity included).
    pub fn member_count(&self) -> u128 {
        to_boxes(self, &FeatExp::True).iter().map(|b| b.volume()).sum()
    }

    pub fn is_empty(&self) -> bool {
        to_boxes(self, &FeatExp::True).is_empty()
    }

    pub fn contains(&self, k: &Config) -> Result<bool, FeatError> {
        for fd in &self.features {
            let v = k
                .get(&fd.name)
                .ok_or_else(|| FeatError::UnassignedFeature(fd.name.clone()))?;
            if v < fd.lo || v > fd.hi {
                return Ok(false);
            }
        }
        self.validity.eval(k)
    }

    /// All members in lexicographic order by feature declaration order then
    /// numeric value. The degenerate space yields the single empty valuation.
    pub fn members(&self) -> Vec<Config> {
        let mut out = Vec::new();
        let mut cursor: Vec<i64> = self.features.iter().map(|f| f.lo).collect();
        'outer: loop {
            let k = Config::new(
                self.features
                    .iter()
                    .zip(&cursor)
                    .map(|(f, v)| (f.name.clone(), *v))
                    .collect(),
            );
            if self.validity.eval(&k).unwrap_or(false) {
                out.push(k);
            }
            if self.features.is_empty() {
                break;
            }
            // advance the cursor, last feature fastest
            for i in (0..cursor.len()).rev() {
                if cursor[i] < self.features[i].hi {
                    cursor[i] += 1;
                    continue 'outer;
                }
                cursor[i] = self.features[i].lo;
            }
            break;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_a() -> ConfigSpace {
        ConfigSpace::new(vec![FeatureDecl::new("A", 0, 7)]).unwrap()
    }

    fn space_ab() -> ConfigSpace {
        ConfigSpace::new(vec![FeatureDecl::new("A", 0, 7), FeatureDecl::new("B", 0, 7)]).unwrap()
    }

    #[test]
    fn eval_eq_and_lt() {
        let k = Config::new(vec![("A".into(), 3)]);
        assert!(FeatExp::eq("A", 3).eval(&k).unwrap());
        assert!(!FeatExp::lt("A", 3).eval(&k).unwrap());
    }

    #[test]
    fn eval_characteristic_formula_is_true() {
        let space = space_ab();
        for k in space.members() {
            assert!(k.characteristic().eval(&k).unwrap());
        }
    }

    #[test]
    fn eval_unknown_feature_errors() {
        let k = Config::new(vec![("A".into(), 3)]);
        let err = FeatExp::eq("B", 1).eval(&k).unwrap_err();
        assert_eq!(err, FeatError::UnknownFeature("B".into()));
    }

    #[test]
    fn member_enumeration_is_lexicographic() {
        let space = ConfigSpace::new(vec![
            FeatureDecl::new("A", 0, 1),
            FeatureDecl::new("B", 0, 1),
        ])
        .unwrap();
        let ms: Vec<Vec<i64>> = space
            .members()
            .iter()
            .map(|k| k.values().iter().map(|(_, v)| *v).collect())
            .collect();
        assert_eq!(ms, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn degenerate_space_has_one_member() {
        let space = ConfigSpace::empty();
        assert_eq!(space.member_count(), 1);
        assert_eq!(space.members().len(), 1);
        assert!(FeatExp::True.eval(&space.members()[0]).unwrap());
    }

    #[test]
    fn restrict_narrows_members() {
        let space = space_a().restrict(&FeatExp::lt("A", 4).not()).unwrap();
        let vals: Vec<i64> = space.members().iter().map(|k| k.get("A").unwrap()).collect();
        assert_eq!(vals, vec![4, 5, 6, 7]);
    }

    #[test]
    fn simplify_preserves_eval() {
        let psi = FeatExp::eq("A", 3)
            .and(FeatExp::True)
            .and(FeatExp::eq("A", 3))
            .or(FeatExp::False);
        let simp = psi.simplify();
        assert_eq!(simp, FeatExp::eq("A", 3));
        for k in space_a().members() {
            assert_eq!(psi.eval(&k).unwrap(), simp.eval(&k).unwrap());
        }
    }

    #[test]
    fn display_syntax() {
        let e = FeatExp::eq("A", 3).not().and(FeatExp::lt("B", 2).or(FeatExp::True));
        assert_eq!(e.to_string(), "!A=3 && (B<2 || true)");
    }

    #[test]
    fn duplicate_feature_rejected() {
        let err = ConfigSpace::new(vec![FeatureDecl::new("A", 0, 1), FeatureDecl::new("A", 0, 2)])
            .unwrap_err();
        assert_eq!(err, FeatError::DuplicateFeature("A".into()));
    }
}
