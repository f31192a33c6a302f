use serde::Serialize;

/// Sorted, pairwise disjoint closed intervals. Intervals that overlap or
/// touch are merged on construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalUnion<T = f64> {
    intervals: Vec<(T, T)>,
}

impl<T: Copy + PartialOrd> IntervalUnion<T> {
    pub fn empty() -> Self {
        IntervalUnion {
            intervals: Vec::new(),
        }
    }

    pub fn from_intervals(mut v: Vec<(T, T)>) -> Self {
        v.retain(|(a, b)| a <= b);
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("comparable endpoints"));
        let mut out: Vec<(T, T)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        Self::from_intervals(v)
    }

    pub fn contains(&self, x: T) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < x);
        i < self.intervals.len() && self.intervals[i].0 <= x
    }

    /// True when `[lo, hi]` lies inside a single component.
    pub fn covers(&self, lo: T, hi: T) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < hi);
        i < self.intervals.len() && self.intervals[i].0 <= lo
    }

    /// Every component of `self` lies inside `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intervals.iter().all(|&(lo, hi)| other.covers(lo, hi))
    }
}

impl IntervalUnion<f64> {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

/// Longest component of a union: `(length, interval)`; length 0 and no
/// interval for the empty union.
pub fn largest_interior_interval(u: &IntervalUnion<f64>) -> (f64, Option<(f64, f64)>) {
    u.intervals()
        .iter()
        .fold((0.0, None), |best, &(a, b)| {
            if best.1.is_none() || b - a > best.0 {
                (b - a, Some((a, b)))
            } else {
                best
            }
        })
}

/// Union with rational endpoints `k / scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactUnion {
    pub scale: i128,
    pub union: IntervalUnion<i128>,
}

impl ExactUnion {
    pub fn to_f64(&self) -> IntervalUnion<f64> {
        let s = self.scale as f64;
        IntervalUnion::from_intervals(
            self.union
                .intervals()
                .iter()
                .map(|&(a, b)| (a as f64 / s, b as f64 / s))
                .collect(),
        )
    }

    /// Exact containment test. Both unions are brought to a common scale.
    pub fn is_subset_of(&self, other: &ExactUnion) -> Option<bool> {
        let g = num_integer::gcd(self.scale, other.scale);
        let lcm = (self.scale / g).checked_mul(other.scale)?;
        let rescale = |u: &ExactUnion| -> Option<IntervalUnion<i128>> {
            let f = lcm / u.scale;
            let v = u
                .union
                .intervals()
                .iter()
                .map(|&(a, b)| Some((a.checked_mul(f)?, b.checked_mul(f)?)))
                .collect::<Option<Vec<_>>>()?;
            Some(IntervalUnion::from_intervals(v))
        };
        Some(rescale(self)?.is_subset_of(&rescale(other)?))
    }

    pub fn total_length(&self) -> f64 {
        self.union
            .intervals()
            .iter()
            .map(|(a, b)| (b - a) as f64)
            .sum::<f64>()
            / self.scale as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merges_touching_and_overlapping() {
        let u = IntervalUnion::from_intervals(vec![(0.3, 0.9), (0.0, 0.2), (0.2, 0.25), (0.5, 0.6)]);
        assert_eq!(u.intervals(), &[(0.0, 0.25), (0.3, 0.9)]);
    }

    #[test]
    fn largest_component() {
        let u = IntervalUnion::from_intervals(vec![(0.0, 0.2), (0.3, 0.9)]);
        let (len, iv) = largest_interior_interval(&u);
        assert!((len - 0.6).abs() < 1e-15);
        assert_eq!(iv, Some((0.3, 0.9)));
        assert_eq!(largest_interior_interval(&IntervalUnion::empty()), (0.0, None));
        let whole = IntervalUnion::from_intervals(vec![(-0.5, 1.0)]);
        assert_eq!(largest_interior_interval(&whole).0, 1.5);
    }

    #[test]
    fn membership() {
        let u = IntervalUnion::from_intervals(vec![(0, 2), (5, 7)]);
        assert!(u.contains(0) && u.contains(2) && u.contains(6));
        assert!(!u.contains(3) && !u.contains(8));
        assert!(u.covers(5, 7));
        assert!(!u.covers(1, 6));
    }

    #[test]
    fn exact_subset_across_scales() {
        let a = ExactUnion {
            scale: 9,
            union: IntervalUnion::from_intervals(vec![(0, 1), (2, 3)]),
        };
        let b = ExactUnion {
            scale: 3,
            union: IntervalUnion::from_intervals(vec![(0, 1)]),
        };
        assert_eq!(a.is_subset_of(&b), Some(true));
        assert_eq!(b.is_subset_of(&a), Some(false));
    }

    proptest! {
        #[test]
        fn union_is_sorted_disjoint_and_preserves_points(
            raw in proptest::collection::vec((-100i64..100, 0i64..20), 0..30),
            probe in -120i64..140,
        ) {
            let ivs: Vec<(i64, i64)> = raw.iter().map(|&(a, w)| (a, a + w)).collect();
            let u = IntervalUnion::from_intervals(ivs.clone());
            for w in u.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            let inside = ivs.iter().any(|&(a, b)| a <= probe && probe <= b);
            prop_assert_eq!(u.contains(probe), inside);
        }
    }
}
