//! Covering the circle by closed arcs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Tolerance used when merging arc endpoints.
pub const ARC_TOL: f64 = 1e-12;

/// Uncovered part of the circle `[0, 2π)` as disjoint open gaps, shrunk as
/// closed arcs are added.
#[derive(Debug, Clone)]
pub struct CircleCover {
    // Keyed by the bit pattern of the (nonnegative) left end, which orders
    // like the value itself.
    gaps: BTreeMap<u64, f64>,
    arcs: usize,
}

impl Default for CircleCover {
    fn default() -> Self {
        Self::new()
    }
}

impl CircleCover {
    pub fn new() -> Self {
        let mut gaps = BTreeMap::new();
        gaps.insert(0f64.to_bits(), TAU);
        Self { gaps, arcs: 0 }
    }

    pub fn is_covered(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn arcs_added(&self) -> usize {
        self.arcs
    }

    /// Total length of the gaps.
    pub fn uncovered_length(&self) -> f64 {
        self.gaps.iter().map(|(&lo, &hi)| hi - f64::from_bits(lo)).sum()
    }

    pub fn gaps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gaps.iter().map(|(&lo, &hi)| (f64::from_bits(lo), hi))
    }

    /// Adds the closed arc of angular radius `half_width` about `center`.
    pub fn add_arc(&mut self, center: f64, half_width: f64) {
        self.arcs += 1;
        if self.gaps.is_empty() || !(half_width >= 0.0) {
            return;
        }
        let w = half_width + ARC_TOL;
        if w >= 0.5 * TAU {
            self.gaps.clear();
            return;
        }
        let c = center.rem_euclid(TAU);
        let (a, b) = (c - w, c + w);
        if a < 0.0 {
            self.subtract(a + TAU, TAU);
            self.subtract(0.0, b);
        } else if b > TAU {
            self.subtract(a, TAU);
            self.subtract(0.0, b - TAU);
        } else {
            self.subtract(a, b);
        }
    }

    fn subtract(&mut self, a: f64, b: f64) {
        // Gaps are disjoint, so only the last one starting before `b` can
        // tell whether anything overlaps `[a, b]`.
        match self.gaps.range(..b.to_bits()).next_back() {
            Some((_, &hi)) if hi > a => {}
            _ => return,
        }
        let mut hit: Vec<(u64, f64)> = Vec::new();
        if let Some((&lo, &hi)) = self.gaps.range(..=a.to_bits()).next_back() {
            if hi > a {
                hit.push((lo, hi));
            }
        }
        let start = a.max(0.0).to_bits();
        for (&lo, &hi) in self.gaps.range(start..) {
            if f64::from_bits(lo) >= b {
                break;
            }
            if hit.last().is_none_or(|&(l, _)| l != lo) {
                hit.push((lo, hi));
            }
        }
        for (lo_bits, hi) in hit {
            self.gaps.remove(&lo_bits);
            let lo = f64::from_bits(lo_bits);
            if lo < a {
                self.gaps.insert(lo_bits, a);
            }
            if hi > b {
                self.gaps.insert(b.to_bits(), hi);
            }
        }
    }
}

/// Length of the union of closed arcs `(center, half_width)` on the circle,
/// by sorting and sweeping. Independent of [`CircleCover`].
pub fn arc_union_length(arcs: &[(f64, f64)]) -> f64 {
    let mut pieces = Vec::new();
    for &(c, w) in arcs {
        if w >= 0.5 * TAU {
            return TAU;
        }
        let c = c.rem_euclid(TAU);
        let (a, b) = (c - w, c + w);
        if a < 0.0 {
            pieces.push((a + TAU, TAU));
            pieces.push((0.0, b));
        } else if b > TAU {
            pieces.push((a, TAU));
            pieces.push((0.0, b - TAU));
        } else {
            pieces.push((a, b));
        }
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (a, b) in pieces {
        match current {
            Some((lo, hi)) if a <= hi => current = Some((lo, hi.max(b))),
            Some((lo, hi)) => {
                total += hi - lo;
                current = Some((a, b));
            }
            None => current = Some((a, b)),
        }
    }
    if let Some((lo, hi)) = current {
        total += hi - lo;
    }
    total.min(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn empty_cover() {
        let c = CircleCover::new();
        assert!(!c.is_covered());
        assert_eq!(c.uncovered_length(), TAU);
    }

    #[test]
    fn two_half_circles_cover() {
        let mut c = CircleCover::new();
        c.add_arc(0.0, FRAC_PI_2);
        assert!(!c.is_covered());
        c.add_arc(PI, FRAC_PI_2);
        assert!(c.is_covered());
        assert_eq!(c.arcs_added(), 2);
    }

    #[test]
    fn three_sixty_degree_arcs_cover() {
        let mut c = CircleCover::new();
        let w = 0.5f64.acos();
        for k in 0..3 {
            c.add_arc(k as f64 * 2.0 * FRAC_PI_3, w);
        }
        assert!(c.is_covered());
    }

    #[test]
    fn single_arc_leaves_complement() {
        let mut c = CircleCover::new();
        c.add_arc(1.0, 0.4);
        assert!((c.uncovered_length() - (TAU - 0.8)).abs() < 1e-11);
        let mut c = CircleCover::new();
        c.add_arc(0.1, 0.4);
        assert!((c.uncovered_length() - (TAU - 0.8)).abs() < 1e-11);
        assert_eq!(c.gaps().count(), 1);
    }

    #[test]
    fn arc_inside_gap_splits_it() {
        let mut c = CircleCover::new();
        c.add_arc(1.0, 0.1);
        c.add_arc(3.0, 0.1);
        assert_eq!(c.gaps().count(), 3);
        c.add_arc(2.0, 0.95);
        let gaps: Vec<_> = c.gaps().collect();
        assert_eq!(gaps.len(), 2);
    }

    #[test]
    fn oracle_examples() {
        assert!((arc_union_length(&[(0.0, 1.0), (0.5, 1.0)]) - 2.5).abs() < 1e-15);
        assert!((arc_union_length(&[(0.0, 0.5), (TAU - 0.1, 0.1)]) - 1.0).abs() < 1e-15);
        assert_eq!(arc_union_length(&[]), 0.0);
    }

    proptest! {
        #[test]
        fn matches_sweep_oracle(arcs in prop::collection::vec((0.0f64..TAU, 0.0f64..0.8), 0..60)) {
            let mut c = CircleCover::new();
            for &(a, w) in &arcs {
                c.add_arc(a, w);
            }
            let widened: Vec<_> = arcs.iter().map(|&(a, w)| (a, w + ARC_TOL)).collect();
            let expected = TAU - arc_union_length(&widened);
            prop_assert!((c.uncovered_length() - expected).abs() < 1e-9);
            if expected > 1e-9 {
                prop_assert!(!c.is_covered());
            }
            if c.is_covered() {
                prop_assert!(expected <= 1e-9);
            }
        }
    }
}
