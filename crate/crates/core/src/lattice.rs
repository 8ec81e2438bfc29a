//! Lattice sites, finite site sets and boxes.

use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(SmallVec<[i32; 4]>);

impl Site {
    pub fn new(coords: &[i32]) -> Self {
        Site(SmallVec::from_slice(coords))
    }

    pub fn origin(d: usize) -> Self {
        Site(SmallVec::from_elem(0, d))
    }

    /// `scale · e_axis`
    pub fn axis(d: usize, axis: usize, scale: i32) -> Self {
        let mut s = Site::origin(d);
        s.0[axis] = scale;
        s
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i32] {
        &mut self.0
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.0)
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64).abs()).sum()
    }

    pub fn offset(&self, other: &Site) -> Site {
        Site(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }

    pub fn apply(&mut self, step: Step) {
        self.0[step.axis()] += step.sign();
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.dim() });
        }
        Ok(())
    }
}

pub(crate) fn euclidean_norm(c: &[i32]) -> f64 {
    c.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

impl Borrow<[i32]> for Site {
    fn borrow(&self) -> &[i32] {
        &self.0
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One nearest-neighbour jump: `sign · e_axis`, packed as `2 · axis + (sign > 0)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step(u8);

impl Step {
    pub fn new(axis: usize, positive: bool) -> Self {
        debug_assert!(axis < 128);
        Step((axis as u8) << 1 | positive as u8)
    }

    #[inline]
    pub fn axis(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn sign(self) -> i32 {
        if self.0 & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn reversed(self) -> Step {
        Step(self.0 ^ 1)
    }

    /// Uniform over the `2d` directions.
    #[inline]
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Step {
        Step(rng.random_range(0..2 * d) as u8)
    }
}

impl fmt::Debug for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", if self.sign() > 0 { '+' } else { '-' }, self.axis())
    }
}

/// A finite set of sites `K`, with a bounding box for quick rejection.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "SiteSetRepr", try_from = "SiteSetRepr")]
pub struct SiteSet {
    dim: usize,
    sites: Vec<Site>,
    lookup: HashSet<Site>,
    lo: SmallVec<[i32; 4]>,
    hi: SmallVec<[i32; 4]>,
}

impl SiteSet {
    pub fn new(dim: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let mut list: Vec<Site> = Vec::new();
        let mut lookup = HashSet::new();
        for s in sites {
            s.check_dim(dim)?;
            if lookup.insert(s.clone()) {
                list.push(s);
            }
        }
        list.sort();
        let mut lo: SmallVec<[i32; 4]> = SmallVec::from_elem(i32::MAX, dim);
        let mut hi: SmallVec<[i32; 4]> = SmallVec::from_elem(i32::MIN, dim);
        for s in &list {
            for i in 0..dim {
                lo[i] = lo[i].min(s.0[i]);
                hi[i] = hi[i].max(s.0[i]);
            }
        }
        Ok(SiteSet { dim, sites: list, lookup, lo, hi })
    }

    pub fn empty(dim: usize) -> Self {
        SiteSet::new(dim, []).expect("empty set")
    }

    pub fn point(site: Site) -> Self {
        let d = site.dim();
        SiteSet::new(d, [site]).expect("single site")
    }

    /// Euclidean ball `{x : |x| ≤ r}` around the origin.
    pub fn ball(dim: usize, radius: f64) -> Self {
        let r = radius.floor() as i32;
        let sites = cube_sites(dim, -r, r).filter(|s| s.norm() <= radius + 1e-12);
        SiteSet::new(dim, sites).expect("ball")
    }

    /// `[-r, r]^d`.
    pub fn cube(dim: usize, r: i32) -> Self {
        SiteSet::new(dim, cube_sites(dim, -r, r)).expect("cube")
    }

    /// Parses `point`, `ball:R`, `box:R` or `sites:x,y,z;x,y,z;...`.
    pub fn parse(dim: usize, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "point" => Ok(SiteSet::point(Site::origin(dim))),
            "ball" => {
                let r: f64 = arg.parse().map_err(|_| Error::Config(format!("bad ball radius {arg:?}")))?;
                Ok(SiteSet::ball(dim, r))
            }
            "box" => {
                let r: i32 = arg.parse().map_err(|_| Error::Config(format!("bad box radius {arg:?}")))?;
                Ok(SiteSet::cube(dim, r))
            }
            "sites" => {
                let mut out = Vec::new();
                for chunk in arg.split(';').filter(|c| !c.trim().is_empty()) {
                    let coords: std::result::Result<Vec<i32>, _> =
                        chunk.split(',').map(|c| c.trim().parse::<i32>()).collect();
                    let coords = coords.map_err(|_| Error::Config(format!("bad site {chunk:?}")))?;
                    out.push(Site::new(&coords));
                }
                SiteSet::new(dim, out)
            }
            _ => Err(Error::Config(format!("unknown window shape {spec:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn index_of(&self, coords: &[i32]) -> Option<usize> {
        if !self.contains(coords) {
            return None;
        }
        self.sites.iter().position(|s| s.coords() == coords)
    }

    #[inline]
    pub fn contains(&self, coords: &[i32]) -> bool {
        if self.sites.is_empty() {
            return false;
        }
        if coords.iter().zip(self.lo.iter().zip(&self.hi)).any(|(c, (lo, hi))| c < lo || c > hi) {
            return false;
        }
        if self.sites.len() <= 8 {
            self.sites.iter().any(|s| s.coords() == coords)
        } else {
            self.lookup.contains(coords)
        }
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.sites.iter().all(|s| other.contains(s.coords()))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(self.dim, self.sites.iter().chain(other.sites.iter()).cloned()).expect("same dimension")
    }

    pub fn translate(&self, by: &Site) -> SiteSet {
        SiteSet::new(self.dim, self.sites.iter().map(|s| s.offset(by))).expect("same dimension")
    }

    /// Largest Euclidean distance between two members.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in &self.sites {
            for b in &self.sites {
                best = best.max(a.offset(&b.neg()).norm());
            }
        }
        best
    }

    /// Lattice point nearest to the centroid.
    pub fn center(&self) -> Site {
        if self.sites.is_empty() {
            return Site::origin(self.dim);
        }
        let n = self.sites.len() as f64;
        let c: Vec<i32> = (0..self.dim)
            .map(|i| (self.sites.iter().map(|s| s.0[i] as f64).sum::<f64>() / n).round() as i32)
            .collect();
        Site::new(&c)
    }

    /// Largest distance from [`SiteSet::center`] to a member.
    pub fn radius(&self) -> f64 {
        let c = self.center().neg();
        self.sites.iter().map(|s| s.offset(&c).norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct SiteSetRepr {
    dim: usize,
    sites: Vec<Site>,
}

impl From<SiteSet> for SiteSetRepr {
    fn from(k: SiteSet) -> Self {
        SiteSetRepr { dim: k.dim, sites: k.sites }
    }
}

impl TryFrom<SiteSetRepr> for SiteSet {
    type Error = Error;

    fn try_from(r: SiteSetRepr) -> Result<Self> {
        SiteSet::new(r.dim, r.sites)
    }
}

impl PartialEq for SiteSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sites == other.sites
    }
}

fn cube_sites(dim: usize, lo: i32, hi: i32) -> impl Iterator<Item = Site> {
    let side = (hi - lo + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut c: SmallVec<[i32; 4]> = SmallVec::from_elem(0, dim);
        for slot in c.iter_mut() {
            *slot = lo + (idx % side) as i32;
            idx /= side;
        }
        Site(c)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Free,
    Dirichlet,
}

/// The box `[-N/2, N/2)^d ∩ Z^d`, translated by `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBox {
    side: u32,
    dim: usize,
    boundary: Boundary,
    offset: Site,
}

impl LatticeBox {
    pub fn new(dim: usize, side: u32, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if side == 0 || !side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("box side must be a positive even integer, got {side}")));
        }
        Ok(LatticeBox { side, dim, boundary, offset: Site::origin(dim) })
    }

    pub fn with_offset(mut self, offset: Site) -> Result<Self> {
        offset.check_dim(self.dim)?;
        self.offset = offset;
        Ok(self)
    }

    /// The translate `x N + Λ`.
    pub fn translate_by_cells(&self, cell: &Site) -> Result<Self> {
        cell.check_dim(self.dim)?;
        let n = self.side as i32;
        let off: Vec<i32> = cell.coords().iter().map(|c| c * n).collect();
        self.clone().with_offset(Site::new(&off))
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn offset(&self) -> &Site {
        &self.offset
    }

    pub fn volume(&self) -> u64 {
        (self.side as u64).pow(self.dim as u32)
    }

    fn half(&self) -> i32 {
        (self.side / 2) as i32
    }

    #[inline]
    pub fn contains(&self, coords: &[i32]) -> bool {
        let h = self.half();
        coords.iter().zip(self.offset.coords()).all(|(&c, &o)| c - o >= -h && c - o < h)
    }

    /// The `index`-th site in lexicographic order (first coordinate fastest).
    pub fn site(&self, mut index: u64) -> Site {
        let n = self.side as u64;
        let h = self.half();
        let mut c: SmallVec<[i32; 4]> = SmallVec::from_elem(0, self.dim);
        for (slot, o) in c.iter_mut().zip(self.offset.coords()) {
            *slot = (index % n) as i32 - h + o;
            index /= n;
        }
        Site(c)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.volume()).map(move |i| self.site(i))
    }

    pub fn random_site<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        self.site(rng.random_range(0..self.volume()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_of_radius_one_has_2d_plus_one_sites() {
        assert_eq!(SiteSet::ball(3, 1.0).len(), 7);
        assert_eq!(SiteSet::cube(3, 1).len(), 27);
        assert_eq!(SiteSet::parse(3, "sites:0,0,0;1,0,0;0,0,0").unwrap().len(), 2);
        assert!(SiteSet::parse(3, "blob").is_err());
    }

    #[test]
    fn box_enumeration_matches_membership() {
        let b = LatticeBox::new(2, 4, Boundary::Free).unwrap().translate_by_cells(&Site::new(&[1, -1])).unwrap();
        let sites: Vec<Site> = b.sites().collect();
        assert_eq!(sites.len(), 16);
        assert!(sites.iter().all(|s| b.contains(s.coords())));
        assert!(sites.contains(&Site::new(&[2, -6])));
        assert!(!b.contains(&[6, -4]));
        assert!(LatticeBox::new(3, 5, Boundary::Free).is_err());
    }

    #[test]
    fn step_packing() {
        let s = Step::new(2, false);
        assert_eq!((s.axis(), s.sign()), (2, -1));
        assert_eq!(s.reversed().sign(), 1);
    }
}
