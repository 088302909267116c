//! Box normal form for feature expressions.
//!
//! A box is one closed interval per feature of a space; a box list is
//! pairwise disjoint and sorted lexicographically by (feature order, interval
//! start). Every feature expression over bounded domains denotes a finite
//! union of boxes, so the conversion here is exact.

use super::{ConfigSpace, FeatExp, Rel};

/// A product of per-feature closed intervals, aligned with a space's feature
/// declaration order. The zero-feature box denotes the single empty valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalBox {
    intervals: Vec<(i64, i64)>,
}

impl IntervalBox {
    pub fn new(intervals: Vec<(i64, i64)>) -> Self {
        IntervalBox { intervals }
    }

    pub fn intervals(&self) -> &[(i64, i64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().any(|(a, b)| a > b)
    }

    pub fn volume(&self) -> u128 {
        self.intervals
            .iter()
            .map(|(a, b)| (b - a + 1) as u128)
            .product()
    }

    /// Lexicographically smallest member.
    pub fn lower_corner(&self) -> Vec<i64> {
        self.intervals.iter().map(|(a, _)| *a).collect()
    }

    pub fn contains(&self, values: &[i64]) -> bool {
        self.intervals
            .iter()
            .zip(values)
            .all(|((a, b), v)| a <= v && v <= b)
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        let intervals: Vec<(i64, i64)> = self
            .intervals
            .iter()
            .zip(&other.intervals)
            .map(|((a1, b1), (a2, b2))| ((*a1).max(*a2), (*b1).min(*b2)))
            .collect();
        let b = IntervalBox::new(intervals);
        if b.is_empty() {
            None
        } else {
            Some(b)
        }
    }

    /// Set difference `self \ other` as disjoint boxes.
    pub fn subtract(&self, other: &IntervalBox) -> Vec<IntervalBox> {
        let inter = match self.intersect(other) {
            Some(i) => i,
            None => return vec![self.clone()],
        };
        let mut parts = Vec::new();
        let mut prefix = self.intervals.clone();
        for d in 0..self.intervals.len() {
            let (clo, chi) = prefix[d];
            let (ilo, ihi) = inter.intervals[d];
            if clo < ilo {
                let mut p = prefix.clone();
                p[d] = (clo, ilo - 1);
                parts.push(IntervalBox::new(p));
            }
            if ihi < chi {
                let mut p = prefix.clone();
                p[d] = (ihi + 1, chi);
                parts.push(IntervalBox::new(p));
            }
            prefix[d] = (ilo, ihi);
        }
        parts
    }

    /// Renders the box as `a<=A<=b` constraints joined with ` && `; the
    /// zero-feature box renders as `true`.
    pub fn render(&self, space: &ConfigSpace) -> String {
        if self.intervals.is_empty() {
            return "true".to_string();
        }
        self.intervals
            .iter()
            .zip(space.features())
            .map(|((a, b), fd)| format!("{}<={}<={}", a, fd.name, b))
            .collect::<Vec<_>>()
            .join(" && ")
    }

    /// The feature expression denoting the box within `space`: per feature,
    /// an `A=n` atom for point intervals, lower/upper bound atoms otherwise.
    /// Bounds that coincide with the domain are implied and omitted, so all
    /// emitted atom constants lie within the feature's domain.
    pub fn to_featexp(&self, space: &ConfigSpace) -> FeatExp {
        let mut parts = Vec::new();
        for ((a, b), fd) in self.intervals.iter().zip(space.features()) {
            if *a == fd.lo && *b == fd.hi {
                continue;
            }
            if a == b {
                parts.push(FeatExp::eq(fd.name.clone(), *a));
                continue;
            }
            if *a > fd.lo {
                parts.push(FeatExp::lt(fd.name.clone(), *a).not());
            }
            if *b < fd.hi {
                parts.push(FeatExp::lt(fd.name.clone(), *b + 1));
            }
        }
        FeatExp::conjunction(parts)
    }
}

/// Intersection of two disjoint box lists; the result is disjoint.
fn intersect_lists(xs: &[IntervalBox], ys: &[IntervalBox]) -> Vec<IntervalBox> {
    let mut out = Vec::new();
    for x in xs {
        for y in ys {
            if let Some(i) = x.intersect(y) {
                out.push(i);
            }
        }
    }
    out
}

/// Complement of a disjoint box list within `universe`.
fn complement_within(xs: &[IntervalBox], universe: &IntervalBox) -> Vec<IntervalBox> {
    let mut acc = vec![universe.clone()];
    for x in xs {
        acc = acc.iter().flat_map(|c| c.subtract(x)).collect();
    }
    acc
}

/// Union of two disjoint box lists; the result is disjoint.
fn union_lists(xs: &[IntervalBox], ys: &[IntervalBox]) -> Vec<IntervalBox> {
    let mut out = xs.to_vec();
    for y in ys {
        let mut rest = vec![y.clone()];
        for x in xs {
            rest = rest.iter().flat_map(|r| r.subtract(x)).collect();
        }
        out.extend(rest);
    }
    out
}

/// Sorts and merges adjacent boxes into canonical form. Two boxes merge when
/// they agree on every feature except one where the intervals are adjacent.
fn normalize(mut boxes: Vec<IntervalBox>) -> Vec<IntervalBox> {
    boxes.retain(|b| !b.is_empty());
    boxes.sort();
    loop {
        let mut merged = false;
        'scan: for i in 0..boxes.len() {
            for j in (i + 1)..boxes.len() {
                if let Some(m) = try_merge(&boxes[i], &boxes[j]) {
                    boxes[i] = m;
                    boxes.remove(j);
                    merged = true;
                    break 'scan;
                }
            }
        }
        if !merged {
            break;
        }
        boxes.sort();
    }
    boxes
}

fn try_merge(a: &IntervalBox, b: &IntervalBox) -> Option<IntervalBox> {
    let n = a.intervals.len();
    let mut diff = None;
    for d in 0..n {
        if a.intervals[d] != b.intervals[d] {
            if diff.is_some() {
                return None;
            }
            diff = Some(d);
        }
    }
    let d = diff?;
    let (alo, ahi) = a.intervals[d];
    let (blo, bhi) = b.intervals[d];
    // disjoint inputs, so only adjacency can merge
    if ahi + 1 == blo {
        let mut iv = a.intervals.clone();
        iv[d] = (alo, bhi);
        Some(IntervalBox::new(iv))
    } else if bhi + 1 == alo {
        let mut iv = a.intervals.clone();
        iv[d] = (blo, ahi);
        Some(IntervalBox::new(iv))
    } else {
        None
    }
}

/// Converts `psi ∩ K` to canonical box normal form: the returned boxes are
/// pairwise disjoint, nonempty, sorted, and their union is exactly the set of
/// members of `space` satisfying `psi`.
pub fn to_boxes(space: &ConfigSpace, psi: &FeatExp) -> Vec<IntervalBox> {
    let universe = IntervalBox::new(space.features().iter().map(|f| (f.lo, f.hi)).collect());
    let raw = intersect_lists(
        &boxes_of(space, psi, &universe),
        &boxes_of(space, space.validity(), &universe),
    );
    normalize(raw)
}

fn boxes_of(space: &ConfigSpace, psi: &FeatExp, universe: &IntervalBox) -> Vec<IntervalBox> {
    match psi {
        FeatExp::True => vec![universe.clone()],
        FeatExp::False => Vec::new(),
        FeatExp::Atom(a) => {
            let idx = match space.feature_index(&a.feature) {
                Some(i) => i,
                None => return Vec::new(),
            };
            let fd = &space.features()[idx];
            let (lo, hi) = match a.rel {
                Rel::Eq => (a.value, a.value),
                Rel::Lt => (fd.lo, a.value - 1),
            };
            let lo = lo.max(fd.lo);
            let hi = hi.min(fd.hi);
            if lo > hi {
                return Vec::new();
            }
            let mut iv = universe.intervals.clone();
            iv[idx] = (lo, hi);
            vec![IntervalBox::new(iv)]
        }
        FeatExp::Not(e) => complement_within(&boxes_of(space, e, universe), universe),
        FeatExp::And(a, b) => intersect_lists(
            &boxes_of(space, a, universe),
            &boxes_of(space, b, universe),
        ),
        FeatExp::Or(a, b) => union_lists(
            &boxes_of(space, a, universe),
            &boxes_of(space, b, universe),
        ),
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

    #[test]
    fn true_covers_domain() {
        let bs = to_boxes(&space_a(), &FeatExp::True);
        assert_eq!(bs, vec![IntervalBox::new(vec![(0, 7)])]);
    }

    #[test]
    fn point_atom() {
        let bs = to_boxes(&space_a(), &FeatExp::eq("A", 3));
        assert_eq!(bs, vec![IntervalBox::new(vec![(3, 3)])]);
    }

    #[test]
    fn complement_of_point_in_two_features() {
        let bs = to_boxes(&space_ab(), &FeatExp::eq("A", 3).not());
        assert_eq!(
            bs,
            vec![
                IntervalBox::new(vec![(0, 2), (0, 7)]),
                IntervalBox::new(vec![(4, 7), (0, 7)]),
            ]
        );
    }

    #[test]
    fn adjacent_boxes_merge() {
        let psi = FeatExp::eq("A", 2).or(FeatExp::eq("A", 3));
        let bs = to_boxes(&space_a(), &psi);
        assert_eq!(bs, vec![IntervalBox::new(vec![(2, 3)])]);
    }

    #[test]
    fn validity_is_intersected() {
        let space = space_a().restrict(&FeatExp::lt("A", 4).not()).unwrap();
        let bs = to_boxes(&space, &FeatExp::lt("A", 6));
        assert_eq!(bs, vec![IntervalBox::new(vec![(4, 5)])]);
    }

    #[test]
    fn box_featexp_roundtrip_semantics() {
        let space = space_ab();
        let psi = FeatExp::eq("A", 3).not().and(FeatExp::lt("B", 5));
        for b in to_boxes(&space, &psi) {
            let e = b.to_featexp(&space);
            for k in space.members() {
                let vals: Vec<i64> = k.values().iter().map(|(_, v)| *v).collect();
                assert_eq!(b.contains(&vals), e.eval(&k).unwrap());
            }
        }
    }

    #[test]
    fn render_uses_interval_syntax() {
        let b = IntervalBox::new(vec![(2, 5)]);
        assert_eq!(b.render(&space_a()), "2<=A<=5");
    }
}
