use crate::error::{Error, Result};
use crate::lattice::{Site, SiteSet};

use super::skeleton::PathSkeleton;

/// A doubly infinite trajectory seen from a finite window `K`, in its
/// canonical parametrisation: time 0 is the first entrance into `K`.
///
/// `forward` is `ω` on `[0, T_fwd)`, starting at the entry point. `backward`
/// is the time reversal `s ↦ ω(−s)` on `[0, T_bwd)`: it starts at the entry
/// point and jumps at time 0 (the holding time at the entry belongs to the
/// forward part), after which it never visits `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryWindow {
    window: SiteSet,
    entry: Site,
    forward: PathSkeleton,
    backward: PathSkeleton,
    time_offset: f64,
}

impl TrajectoryWindow {
    pub fn new(window: SiteSet, forward: PathSkeleton, backward: PathSkeleton) -> Result<Self> {
        let entry = forward.start().clone();
        if !window.contains(entry.coords()) {
            return Err(Error::InvalidParameter("entry point must lie in the window".into()));
        }
        if forward.jump_times().first() == Some(&0.0) {
            return Err(Error::InvalidParameter("forward part must hold at the entry point".into()));
        }
        if backward.start() != &entry {
            return Err(Error::InvalidParameter("backward part must start at the entry point".into()));
        }
        if backward.jump_times().first() != Some(&0.0) {
            return Err(Error::InvalidParameter("backward part must leave the entry point at time 0".into()));
        }
        if backward.hits(&window) {
            return Err(Error::InvalidParameter("backward part returns to the window".into()));
        }
        Ok(TrajectoryWindow { window, entry, forward, backward, time_offset: 0.0 })
    }

    pub fn window(&self) -> &SiteSet {
        &self.window
    }

    pub fn entry(&self) -> &Site {
        &self.entry
    }

    pub fn forward(&self) -> &PathSkeleton {
        &self.forward
    }

    pub fn backward(&self) -> &PathSkeleton {
        &self.backward
    }

    pub fn forward_horizon(&self) -> f64 {
        self.forward.duration()
    }

    pub fn backward_horizon(&self) -> f64 {
        self.backward.duration()
    }

    /// Offset of the time parametrisation; changed only by [`shift`](Self::shift).
    pub fn time_offset(&self) -> f64 {
        self.time_offset
    }

    /// `θ_s` acts on the parametrisation only.
    pub fn shift(&self, s: f64) -> TrajectoryWindow {
        let mut out = self.clone();
        out.time_offset += s;
        out
    }

    /// Time spent at `x` within the simulated horizons.
    pub fn local_time(&self, x: &Site) -> f64 {
        self.forward.local_time(x) + self.backward.local_time(x)
    }

    pub fn local_times_in(&self, k: &SiteSet) -> Vec<f64> {
        let mut out = self.forward.local_times_in(k);
        for (o, b) in out.iter_mut().zip(self.backward.local_times_in(k)) {
            *o += b;
        }
        out
    }

    pub fn hits(&self, k: &SiteSet) -> bool {
        self.forward.hits(k) || self.backward.hits(k)
    }

    /// `D_K`: from the first entrance into `K` to the last exit, within the
    /// simulated horizons; 0 if `K` is not visited.
    pub fn d_k(&self, k: &SiteSet) -> f64 {
        let back: Vec<(f64, f64)> = self
            .backward
            .segments()
            .filter(|s| k.contains(s.site.coords()))
            .map(|s| (s.from, s.to))
            .collect();
        let first = match (back.iter().map(|s| s.1).reduce(f64::max), self.forward.first_hit(k)) {
            (Some(s), _) => -s,
            (None, Some(t)) => t,
            (None, None) => return 0.0,
        };
        let last = match self.forward.last_exit(k) {
            Some(t) => t,
            None => -back.iter().map(|s| s.0).fold(f64::INFINITY, f64::min),
        };
        last - first
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Step;

    fn window() -> TrajectoryWindow {
        let k = SiteSet::point(Site::origin(1));
        let fwd = PathSkeleton::new(
            Site::origin(1),
            vec![1.0, 2.0, 3.0],
            vec![Step::new(0, true), Step::new(0, false), Step::new(0, true)],
            5.0,
        )
        .unwrap();
        let bwd = PathSkeleton::new(Site::origin(1), vec![0.0, 1.5], vec![Step::new(0, false), Step::new(0, false)], 4.0)
            .unwrap();
        TrajectoryWindow::new(k, fwd, bwd).unwrap()
    }

    #[test]
    fn observables() {
        let w = window();
        let k = w.window().clone();
        assert_eq!(w.local_time(&Site::origin(1)), 2.0);
        assert_eq!(w.local_time(&Site::new(&[-1])), 1.5);
        assert_eq!(w.d_k(&k), 3.0);
        assert_eq!(w.shift(7.5).d_k(&k), 3.0);
        assert_eq!(w.shift(7.5).local_time(&Site::origin(1)), 2.0);
        let left = SiteSet::point(Site::new(&[-2]));
        assert_eq!(w.d_k(&left), 2.5);
    }

    #[test]
    fn backward_part_must_avoid_the_window() {
        let k = SiteSet::point(Site::origin(1));
        let fwd = PathSkeleton::constant(Site::origin(1), 1.0).unwrap();
        let bwd = PathSkeleton::new(Site::origin(1), vec![0.0, 1.0], vec![Step::new(0, true), Step::new(0, false)], 2.0)
            .unwrap();
        assert!(TrajectoryWindow::new(k, fwd, bwd).is_err());
    }
}
