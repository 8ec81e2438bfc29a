use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{Site, SiteSet, Step};

/// A finite piecewise-constant nearest-neighbour path on `[0, duration)`.
///
/// `start` is the left limit at time 0; a jump at time exactly 0 is allowed,
/// in which case `at(0)` is already the first target. Jump times are
/// nondecreasing and strictly below `duration`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSkeleton {
    start: Site,
    times: Vec<f64>,
    steps: Vec<Step>,
    duration: f64,
}

/// A maximal constant piece `[from, to)` of a path.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub site: Site,
}

impl PathSkeleton {
    pub fn new(start: Site, times: Vec<f64>, steps: Vec<Step>, duration: f64) -> Result<Self> {
        if times.len() != steps.len() {
            return Err(Error::InvalidParameter("one jump time per step required".into()));
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!("duration must be positive and finite, got {duration}")));
        }
        if times.iter().any(|t| !(*t >= 0.0 && *t < duration)) {
            return Err(Error::InvalidParameter("jump times must lie in [0, duration)".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("jump times must be sorted".into()));
        }
        if steps.iter().any(|s| s.axis() >= start.dim()) {
            return Err(Error::InvalidParameter("step axis exceeds the dimension".into()));
        }
        Ok(PathSkeleton { start, times, steps, duration })
    }

    pub(crate) fn from_parts_unchecked(start: Site, times: Vec<f64>, steps: Vec<Step>, duration: f64) -> Self {
        debug_assert_eq!(times.len(), steps.len());
        PathSkeleton { start, times, steps, duration }
    }

    pub fn constant(site: Site, duration: f64) -> Result<Self> {
        Self::new(site, Vec::new(), Vec::new(), duration)
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn start(&self) -> &Site {
        &self.start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn jump_count(&self) -> usize {
        self.steps.len()
    }

    /// The sites visited after each jump, in order.
    pub fn jump_targets(&self) -> Vec<Site> {
        let mut x = self.start.clone();
        self.steps
            .iter()
            .map(|&s| {
                x.apply(s);
                x.clone()
            })
            .collect()
    }

    /// Site after all jumps, i.e. the left limit at `duration`.
    pub fn end(&self) -> Site {
        let mut x = self.start.clone();
        for &s in &self.steps {
            x.apply(s);
        }
        x
    }

    /// `ω(t)` for `t ∈ [0, duration)`; right-continuous.
    pub fn at(&self, t: f64) -> Site {
        let k = self.times.partition_point(|&tau| tau <= t);
        let mut x = self.start.clone();
        for &s in &self.steps[..k] {
            x.apply(s);
        }
        x
    }

    /// Left limit `ω(t−)`.
    pub fn before(&self, t: f64) -> Site {
        let k = self.times.partition_point(|&tau| tau < t);
        let mut x = self.start.clone();
        for &s in &self.steps[..k] {
            x.apply(s);
        }
        x
    }

    /// Constant pieces of positive length, in time order.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let mut x = self.start.clone();
        let mut from = 0.0;
        let mut k = 0;
        std::iter::from_fn(move || loop {
            if k > self.steps.len() {
                return None;
            }
            let to = if k < self.times.len() { self.times[k] } else { self.duration };
            let seg = Segment { from, to, site: x.clone() };
            if k < self.steps.len() {
                x.apply(self.steps[k]);
            }
            from = to;
            k += 1;
            if seg.to > seg.from {
                return Some(seg);
            }
        })
    }

    /// Total time spent at `x`.
    pub fn local_time(&self, x: &Site) -> f64 {
        self.segments().filter(|s| &s.site == x).map(|s| s.to - s.from).sum()
    }

    /// Local times at every visited site.
    pub fn local_times(&self) -> HashMap<Site, f64> {
        let mut out: HashMap<Site, f64> = HashMap::new();
        for s in self.segments() {
            *out.entry(s.site).or_insert(0.0) += s.to - s.from;
        }
        out
    }

    /// Local times restricted to `K`, indexed like `K.sites()`.
    pub fn local_times_in(&self, k: &SiteSet) -> Vec<f64> {
        let mut out = vec![0.0; k.len()];
        for s in self.segments() {
            if let Some(i) = k.index_of(s.site.coords()) {
                out[i] += s.to - s.from;
            }
        }
        out
    }

    /// Whether the path spends positive time in `K`.
    pub fn hits(&self, k: &SiteSet) -> bool {
        self.segments().any(|s| k.contains(s.site.coords()))
    }

    /// Cheap hit test on the visited sites only (ignores the zero-length
    /// piece before a jump at time 0).
    pub fn visits(&self, k: &SiteSet) -> bool {
        let mut x = self.start.clone();
        let skip_start = self.times.first() == Some(&0.0);
        if !skip_start && k.contains(x.coords()) {
            return true;
        }
        for (i, &s) in self.steps.iter().enumerate() {
            x.apply(s);
            if self.times.get(i + 1) == Some(&self.times[i]) {
                continue;
            }
            if k.contains(x.coords()) {
                return true;
            }
        }
        false
    }

    /// Cyclic rotation `θ_s`: `ω'(t) = ω((t + s) mod duration)`. Meaningful
    /// for closed paths.
    pub fn rotate(&self, s: f64) -> PathSkeleton {
        let ell = self.duration;
        let mut s = s.rem_euclid(ell);
        if s >= ell {
            s = 0.0;
        }
        if s == 0.0 {
            return self.clone();
        }
        let k = self.times.partition_point(|&tau| tau < s);
        let new_start = {
            let mut x = self.start.clone();
            for &st in &self.steps[..k] {
                x.apply(st);
            }
            x
        };
        let mut times = Vec::with_capacity(self.times.len());
        let mut steps = Vec::with_capacity(self.steps.len());
        for i in k..self.times.len() {
            times.push(self.times[i] - s);
            steps.push(self.steps[i]);
        }
        for i in 0..k {
            // Guard against rounding pushing the time to `ell`.
            times.push((self.times[i] - s + ell).min(ell * (1.0 - f64::EPSILON)));
            steps.push(self.steps[i]);
        }
        PathSkeleton { start: new_start, times, steps, duration: ell }
    }

    /// Cyclic pieces of positive length merged by membership in `K`:
    /// returns `(in_k, length)` runs around the circle, with the wrap-around
    /// run joined.
    fn cyclic_runs(&self, k: &SiteSet) -> Vec<(bool, f64, f64)> {
        let mut runs: Vec<(bool, f64, f64)> = Vec::new();
        for seg in self.segments() {
            let inside = k.contains(seg.site.coords());
            match runs.last_mut() {
                Some(last) if last.0 == inside => last.2 = seg.to,
                _ => runs.push((inside, seg.from, seg.to)),
            }
        }
        runs
    }

    /// `D_K` of a closed path: total length minus the longest cyclic
    /// stretch avoiding `K`; 0 if `K` is never visited.
    pub fn d_k_cyclic(&self, k: &SiteSet) -> f64 {
        match longest_cyclic_gap(&self.cyclic_runs(k), self.duration) {
            Gap::Never => 0.0,
            Gap::Always => self.duration,
            Gap::Longest { length, .. } => self.duration - length,
        }
    }

    /// Rotation placing the longest `K`-avoiding stretch at the end, so that
    /// the path enters `K` at time 0.
    pub fn canonical_rotation(&self, k: &SiteSet) -> Result<PathSkeleton> {
        match longest_cyclic_gap(&self.cyclic_runs(k), self.duration) {
            Gap::Never => Err(Error::MissesWindow),
            Gap::Always => Ok(self.clone()),
            Gap::Longest { end, .. } => Ok(self.rotate(end)),
        }
    }

    /// Last time the path is in `K` (end of the last piece inside), if any.
    pub fn last_exit(&self, k: &SiteSet) -> Option<f64> {
        self.segments().filter(|s| k.contains(s.site.coords())).map(|s| s.to).last()
    }

    /// First time the path is in `K`, if any.
    pub fn first_hit(&self, k: &SiteSet) -> Option<f64> {
        self.segments().find(|s| k.contains(s.site.coords())).map(|s| s.from)
    }

    /// Checks the nearest-neighbour chain and time ordering.
    pub fn is_valid(&self) -> bool {
        self.times.len() == self.steps.len()
            && self.times.windows(2).all(|w| w[0] <= w[1])
            && self.times.iter().all(|&t| t >= 0.0 && t < self.duration)
    }
}

enum Gap {
    Never,
    Always,
    Longest { length: f64, end: f64 },
}

fn longest_cyclic_gap(runs: &[(bool, f64, f64)], ell: f64) -> Gap {
    if runs.iter().all(|r| !r.0) {
        return Gap::Never;
    }
    if runs.iter().all(|r| r.0) {
        return Gap::Always;
    }
    let mut best = Gap::Longest { length: -1.0, end: 0.0 };
    let first = runs[0];
    let last = runs[runs.len() - 1];
    for (i, r) in runs.iter().enumerate() {
        if r.0 {
            continue;
        }
        let (mut length, mut end) = (r.2 - r.1, r.2);
        if i == runs.len() - 1 && !first.0 {
            // Joined with the leading run across time 0.
            length += first.2 - first.1;
            end = first.2;
        } else if i == 0 && !last.0 {
            continue;
        }
        if let Gap::Longest { length: l, .. } = best {
            if length > l {
                best = Gap::Longest { length, end: end % ell };
            }
        }
    }
    best
}

/// A loop of winding `j`: a closed skeleton of duration `βj`.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    skeleton: PathSkeleton,
    winding: u64,
    beta: f64,
}

impl Loop {
    pub fn new(skeleton: PathSkeleton, beta: f64) -> Result<Self> {
        let j = (skeleton.duration / beta).round();
        if j < 1.0 || (skeleton.duration - beta * j).abs() > 1e-9 * skeleton.duration {
            return Err(Error::InvalidParameter(format!(
                "loop duration {} is not a positive multiple of beta = {beta}",
                skeleton.duration
            )));
        }
        if skeleton.end() != skeleton.start {
            return Err(Error::InvalidParameter("loop is not closed".into()));
        }
        Ok(Loop { skeleton, winding: j as u64, beta })
    }

    pub(crate) fn from_parts_unchecked(skeleton: PathSkeleton, winding: u64, beta: f64) -> Self {
        Loop { skeleton, winding, beta }
    }

    /// A loop that sits at `x` for its whole duration `βj`.
    pub fn constant(x: Site, winding: u64, beta: f64) -> Result<Self> {
        Self::new(PathSkeleton::constant(x, beta * winding as f64)?, beta)
    }

    /// `ω(0)`.
    pub fn base(&self) -> Site {
        self.skeleton.at(0.0)
    }

    pub fn winding(&self) -> u64 {
        self.winding
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn duration(&self) -> f64 {
        self.skeleton.duration
    }

    pub fn skeleton(&self) -> &PathSkeleton {
        &self.skeleton
    }

    pub fn into_skeleton(self) -> PathSkeleton {
        self.skeleton
    }

    pub fn local_time(&self, x: &Site) -> f64 {
        self.skeleton.local_time(x)
    }

    pub fn hits(&self, k: &SiteSet) -> bool {
        self.skeleton.hits(k)
    }

    /// `θ_s`, with `s` taken modulo `βj`.
    pub fn shift(&self, s: f64) -> Loop {
        Loop { skeleton: self.skeleton.rotate(s), winding: self.winding, beta: self.beta }
    }

    /// `D_K`: time not covered by the longest `K`-avoiding stretch.
    pub fn d_k(&self, k: &SiteSet) -> f64 {
        self.skeleton.d_k_cyclic(k)
    }

    /// The rotation whose longest `K`-avoiding stretch is `[βj − D_K, βj)`.
    pub fn canonical_rep(&self, k: &SiteSet) -> Result<Loop> {
        Ok(Loop { skeleton: self.skeleton.canonical_rotation(k)?, winding: self.winding, beta: self.beta })
    }
}

/// `L_x(ω)` for a loop.
pub fn local_time(path: &Loop, x: &Site) -> f64 {
    path.local_time(x)
}

/// `θ_s ω` for a loop.
pub fn shift(path: &Loop, s: f64) -> Loop {
    path.shift(s)
}

/// `∐_K ω` for a loop.
pub fn canonical_rep(path: &Loop, k: &SiteSet) -> Result<Loop> {
    path.canonical_rep(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(times: &[f64], steps: &[(usize, bool)], duration: f64) -> PathSkeleton {
        PathSkeleton::new(
            Site::origin(2),
            times.to_vec(),
            steps.iter().map(|&(a, p)| Step::new(a, p)).collect(),
            duration,
        )
        .unwrap()
    }

    /// 0 on [0,1), e0 on [1,2.5), e0+e1 on [2.5,3), e0 on [3,3.5), 0 on [3.5,4).
    fn square() -> PathSkeleton {
        path(&[1.0, 2.5, 3.0, 3.5], &[(0, true), (1, true), (1, false), (0, false)], 4.0)
    }

    #[test]
    fn evaluation_and_local_time() {
        let p = square();
        assert_eq!(p.at(0.0), Site::new(&[0, 0]));
        assert_eq!(p.at(1.0), Site::new(&[1, 0]));
        assert_eq!(p.before(1.0), Site::new(&[0, 0]));
        assert_eq!(p.at(2.7), Site::new(&[1, 1]));
        assert_eq!(p.end(), Site::new(&[0, 0]));
        assert_eq!(p.local_time(&Site::new(&[1, 0])), 2.0);
        assert_eq!(p.local_time(&Site::new(&[0, 0])), 1.5);
        let total: f64 = p.local_times().values().sum();
        assert_eq!(total, 4.0);
    }

    #[test]
    fn rotation_is_cyclic() {
        let p = square();
        assert_eq!(p.rotate(0.0), p);
        assert_eq!(p.rotate(4.0), p);
        let r = p.rotate(2.0);
        assert_eq!(r.start(), &Site::new(&[1, 0]));
        assert_eq!(r.at(0.7), Site::new(&[1, 1]));
        assert_eq!(r.at(3.0), Site::new(&[1, 0]));
        let back = r.rotate(2.0);
        for t in [0.0, 0.5, 1.2, 2.6, 3.2, 3.9] {
            assert_eq!(back.at(t), p.at(t));
        }
    }

    #[test]
    fn d_k_and_canonical_rotation() {
        let p = square();
        let k = SiteSet::point(Site::new(&[1, 1]));
        // Avoiding stretch runs from 3 around to 2.5: length 3.5.
        assert!((p.d_k_cyclic(&k) - 0.5).abs() < 1e-12);
        let c = p.canonical_rotation(&k).unwrap();
        assert_eq!(c.at(0.0), Site::new(&[1, 1]));
        assert!(!k.contains(c.before(4.0).coords()));
        let far = SiteSet::point(Site::new(&[5, 5]));
        assert_eq!(p.d_k_cyclic(&far), 0.0);
        assert_eq!(p.canonical_rotation(&far), Err(Error::MissesWindow));
        let all = SiteSet::cube(2, 2);
        assert_eq!(p.d_k_cyclic(&all), 4.0);
    }

    #[test]
    fn wrap_around_gap_is_joined() {
        let p = square();
        let k = SiteSet::point(Site::new(&[1, 0]));
        // Outside K: [0,1) and [2.5,3) and [3.5,4): the wrap joins [3.5,4)+[0,1).
        assert!((p.d_k_cyclic(&k) - 2.5).abs() < 1e-12);
        let c = p.canonical_rotation(&k).unwrap();
        assert_eq!(c.at(0.0), Site::new(&[1, 0]));
        assert!((c.d_k_cyclic(&k) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn loops_validate_closure_and_winding() {
        let beta = 2.0;
        assert!(Loop::new(square(), beta).is_ok());
        assert!(Loop::new(square(), 3.0).is_err());
        let open = path(&[1.0], &[(0, true)], 4.0);
        assert!(Loop::new(open, beta).is_err());
        let c = Loop::constant(Site::new(&[2, 3]), 3, 1.5).unwrap();
        assert_eq!(c.winding(), 3);
        assert_eq!(c.local_time(&Site::new(&[2, 3])), 4.5);
        assert_eq!(c.local_time(&Site::new(&[0, 0])), 0.0);
        assert_eq!(c.shift(1.0), c);
    }
}
