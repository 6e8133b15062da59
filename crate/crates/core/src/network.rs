//! Spin networks: sites, weighted XYZ bonds and their invariants.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Bulk,
    Surface,
}

impl SiteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SiteKind::Bulk => "bulk",
            SiteKind::Surface => "surface",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: usize,
    pub label: String,
    pub kind: SiteKind,
}

impl Site {
    pub fn new(id: usize, label: impl Into<String>, kind: SiteKind) -> Self {
        Site {
            id,
            label: label.into(),
            kind,
        }
    }
}

/// Exchange constants `(Jx, Jy, Jz)` of one bond.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coupling {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Coupling {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Coupling { x, y, z }
    }

    pub const fn xx(j: f64) -> Self {
        Coupling::new(j, j, 0.0)
    }

    pub const fn xxz(j: f64, jz: f64) -> Self {
        Coupling::new(j, j, jz)
    }

    pub const fn xxx(j: f64) -> Self {
        Coupling::new(j, j, j)
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Coupling::new(self.x * c, self.y * c, self.z * c)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

/// A weighted bond `weight * (Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub coupling: Coupling,
    pub weight: f64,
}

impl Bond {
    pub fn new(i: usize, j: usize, coupling: Coupling, weight: f64) -> Self {
        Bond {
            i,
            j,
            coupling,
            weight,
        }
    }

    pub fn bulk(i: usize, j: usize, coupling: Coupling) -> Self {
        Bond::new(i, j, coupling, 1.0)
    }

    /// Effective coupling on one axis, weight included.
    pub fn strength(&self, axis: Axis) -> f64 {
        self.weight * self.coupling.get(axis)
    }

    pub fn touches(&self, site: usize) -> bool {
        self.i == site || self.j == site
    }

    pub fn other(&self, site: usize) -> usize {
        if self.i == site {
            self.j
        } else {
            self.i
        }
    }

    fn key(&self) -> (usize, usize) {
        (self.i.min(self.j), self.i.max(self.j))
    }
}

/// The single bond tying a surface spin to the bulk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLink {
    pub surface: usize,
    pub bulk: usize,
    /// `K` of the link, without the weight.
    pub coupling: Coupling,
    /// `λ` of the link.
    pub weight: f64,
}

/// A validated spin network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    sites: Vec<Site>,
    bonds: Vec<Bond>,
}

const WEIGHT_TOL: f64 = 1e-12;

impl SpinNetwork {
    /// Builds a network, rejecting it on the first violated invariant.
    pub fn new(sites: Vec<Site>, bonds: Vec<Bond>) -> Result<Self> {
        if let Some(v) = Self::check(&sites, &bonds).into_iter().next() {
            return Err(Error::Validation(v));
        }
        Ok(SpinNetwork { sites, bonds })
    }

    /// Every invariant violation of a candidate network, in a stable order.
    pub fn check(sites: &[Site], bonds: &[Bond]) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = sites.len();
        for (position, s) in sites.iter().enumerate() {
            if s.id != position {
                out.push(Violation::SiteOrder { position, id: s.id });
            }
        }
        if n == 0 {
            out.push(Violation::Empty);
            return out;
        }
        let is_surface = |k: usize| sites[k].kind == SiteKind::Surface;
        let mut seen = BTreeSet::new();
        let mut links = alloc::vec![0usize; n];
        for (index, b) in bonds.iter().enumerate() {
            if b.i >= n || b.j >= n {
                let site = if b.i >= n { b.i } else { b.j };
                out.push(Violation::UnknownSite { index, site });
                continue;
            }
            if b.i == b.j {
                out.push(Violation::SelfBond { index, site: b.i });
                continue;
            }
            if !seen.insert(b.key()) {
                out.push(Violation::DuplicateBond { i: b.i, j: b.j });
            }
            if !b.coupling.is_finite() || !b.weight.is_finite() {
                out.push(Violation::NonFinite { i: b.i, j: b.j });
                continue;
            }
            match (is_surface(b.i), is_surface(b.j)) {
                (true, true) => out.push(Violation::SurfaceSurfaceBond { i: b.i, j: b.j }),
                (false, false) => {
                    if (b.weight - 1.0).abs() > WEIGHT_TOL {
                        out.push(Violation::BulkWeight {
                            i: b.i,
                            j: b.j,
                            weight: b.weight,
                        });
                    }
                }
                _ => {
                    if !(b.weight > 0.0 && b.weight <= 1.0) {
                        out.push(Violation::SurfaceWeight {
                            i: b.i,
                            j: b.j,
                            weight: b.weight,
                        });
                    }
                }
            }
            links[b.i] += 1;
            links[b.j] += 1;
        }
        for (site, &count) in links.iter().enumerate() {
            if is_surface(site) && count != 1 {
                out.push(Violation::SurfaceLinkCount { site, count });
            }
        }
        let bulk = sites.iter().filter(|s| s.kind == SiteKind::Bulk).count();
        if bulk % 2 != 0 {
            out.push(Violation::OddBulk { count: bulk });
        }
        out
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn bulk_sites(&self) -> Vec<usize> {
        self.ids_of(SiteKind::Bulk)
    }

    pub fn surface_sites(&self) -> Vec<usize> {
        self.ids_of(SiteKind::Surface)
    }

    fn ids_of(&self, kind: SiteKind) -> Vec<usize> {
        self.sites
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.id)
            .collect()
    }

    /// Surface links in surface-site order.
    pub fn surface_links(&self) -> Vec<SurfaceLink> {
        self.surface_sites()
            .into_iter()
            .map(|s| {
                let b = self
                    .bonds
                    .iter()
                    .find(|b| b.touches(s))
                    .expect("validated surface site has a link");
                SurfaceLink {
                    surface: s,
                    bulk: b.other(s),
                    coupling: b.coupling,
                    weight: b.weight,
                }
            })
            .collect()
    }

    /// The bulk alone, relabeled to `0..n_bulk`, with the old id of each new site.
    pub fn bulk_network(&self) -> (SpinNetwork, Vec<usize>) {
        let old = self.bulk_sites();
        let mut new_of = alloc::vec![usize::MAX; self.n_sites()];
        for (k, &o) in old.iter().enumerate() {
            new_of[o] = k;
        }
        let sites = old
            .iter()
            .enumerate()
            .map(|(k, &o)| Site::new(k, self.sites[o].label.clone(), SiteKind::Bulk))
            .collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|b| new_of[b.i] != usize::MAX && new_of[b.j] != usize::MAX)
            .map(|b| Bond {
                i: new_of[b.i],
                j: new_of[b.j],
                ..*b
            })
            .collect();
        (SpinNetwork { sites, bonds }, old)
    }

    /// Same graph with every coupling multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SpinNetwork {
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                coupling: b.coupling.scaled(c),
                ..*b
            })
            .collect();
        SpinNetwork {
            sites: self.sites.clone(),
            bonds,
        }
    }

    /// Replaces the weight of every surface link.
    pub fn with_surface_weights(&self, weight_of: impl Fn(usize) -> f64) -> Result<SpinNetwork> {
        let bonds = self
            .bonds
            .iter()
            .map(|b| {
                let surf = [b.i, b.j]
                    .into_iter()
                    .find(|&s| self.sites[s].kind == SiteKind::Surface);
                match surf {
                    Some(s) => Bond {
                        weight: weight_of(s),
                        ..*b
                    },
                    None => *b,
                }
            })
            .collect();
        SpinNetwork::new(self.sites.clone(), bonds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryTag {
    Ising,
    XY,
    XX,
    XXZ,
    XXX,
    XYZ,
}

impl fmt::Display for SymmetryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymmetryTag::Ising => "Ising",
            SymmetryTag::XY => "XY",
            SymmetryTag::XX => "XX",
            SymmetryTag::XXZ => "XXZ",
            SymmetryTag::XXX => "XXX",
            SymmetryTag::XYZ => "XYZ",
        };
        f.write_str(s)
    }
}

/// Most specific model tag plus the network-wide coupling relations behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryClass {
    pub tag: SymmetryTag,
    pub x_eq_y: bool,
    pub y_eq_z: bool,
    pub x_eq_z: bool,
    /// `[Jx ≡ 0, Jy ≡ 0, Jz ≡ 0]`
    pub zero: [bool; 3],
    pub tol: f64,
}

impl SymmetryClass {
    /// Whether total σᶻ commutes with the Hamiltonian (Jx = Jy on every bond).
    pub fn conserves_sz(&self) -> bool {
        self.x_eq_y
    }
}

/// Default relative tolerance for [`classify_symmetry`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Classifies a set of bonds. Tolerance is relative to the largest coupling.
pub fn classify_bonds(bonds: &[Bond], tol: f64) -> SymmetryClass {
    let scale = bonds
        .iter()
        .map(|b| b.coupling.max_abs())
        .fold(0.0, f64::max);
    let eps = tol * scale;
    let all = |f: &dyn Fn(&Coupling) -> f64| bonds.iter().all(|b| f(&b.coupling).abs() <= eps);
    let x_eq_y = all(&|c| c.x - c.y);
    let y_eq_z = all(&|c| c.y - c.z);
    let x_eq_z = all(&|c| c.x - c.z);
    let zero = [all(&|c| c.x), all(&|c| c.y), all(&|c| c.z)];
    let n_zero = zero.iter().filter(|&&z| z).count();
    let tag = if n_zero == 2 {
        SymmetryTag::Ising
    } else if x_eq_y && y_eq_z {
        SymmetryTag::XXX
    } else if x_eq_y && zero[2] {
        SymmetryTag::XX
    } else if x_eq_y {
        SymmetryTag::XXZ
    } else if zero[2] {
        SymmetryTag::XY
    } else {
        SymmetryTag::XYZ
    };
    SymmetryClass {
        tag,
        x_eq_y,
        y_eq_z,
        x_eq_z,
        zero,
        tol,
    }
}

pub fn classify_symmetry(net: &SpinNetwork, tol: f64) -> SymmetryClass {
    classify_bonds(&net.bonds, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn square2(c: Coupling, lambda: f64) -> (Vec<Site>, Vec<Bond>) {
        let mut sites: Vec<Site> = (0..4)
            .map(|i| Site::new(i, format!("B{i}"), SiteKind::Bulk))
            .collect();
        sites.push(Site::new(4, "S0", SiteKind::Surface));
        sites.push(Site::new(5, "S1", SiteKind::Surface));
        let mut bonds: Vec<Bond> = (0..4).map(|i| Bond::bulk(i, (i + 1) % 4, c)).collect();
        bonds.push(Bond::new(4, 0, c, lambda));
        bonds.push(Bond::new(5, 2, c, lambda));
        (sites, bonds)
    }

    #[test]
    fn accepts_square_with_two_surface_spins() {
        let (s, b) = square2(Coupling::xx(1.0), 0.1);
        let net = SpinNetwork::new(s, b).unwrap();
        assert_eq!(net.n_sites(), 6);
        assert_eq!(net.bonds().len(), 6);
        let links = net.surface_links();
        assert_eq!((links[0].surface, links[0].bulk), (4, 0));
        assert_eq!((links[1].surface, links[1].bulk), (5, 2));
    }

    #[test]
    fn rejects_each_invariant() {
        let c = Coupling::xx(1.0);
        let (s, mut b) = square2(c, 0.1);
        b.push(Bond::new(4, 5, c, 0.1));
        let v = SpinNetwork::check(&s, &b);
        assert!(v.contains(&Violation::SurfaceSurfaceBond { i: 4, j: 5 }));

        let (s, mut b) = square2(c, 0.1);
        b.push(Bond::bulk(1, 0, c));
        assert_eq!(
            SpinNetwork::new(s, b),
            Err(Error::Validation(Violation::DuplicateBond { i: 1, j: 0 }))
        );

        let (s, mut b) = square2(c, 0.1);
        b[0].weight = 0.5;
        assert!(matches!(
            SpinNetwork::new(s, b),
            Err(Error::Validation(Violation::BulkWeight { .. }))
        ));

        let (s, mut b) = square2(c, 0.1);
        b[4].weight = 0.0;
        assert!(matches!(
            SpinNetwork::new(s, b),
            Err(Error::Validation(Violation::SurfaceWeight { .. }))
        ));

        let (s, mut b) = square2(c, 0.1);
        b.push(Bond::new(4, 1, c, 0.1));
        assert!(
            SpinNetwork::check(&s, &b).contains(&Violation::SurfaceLinkCount { site: 4, count: 2 })
        );

        let sites: Vec<Site> = (0..3).map(|i| Site::new(i, "b", SiteKind::Bulk)).collect();
        let bonds = vec![Bond::bulk(0, 1, c), Bond::bulk(1, 2, c)];
        assert_eq!(
            SpinNetwork::new(sites, bonds),
            Err(Error::Validation(Violation::OddBulk { count: 3 }))
        );

        let (s, mut b) = square2(c, 0.1);
        b[1].j = 1;
        assert!(SpinNetwork::check(&s, &b)
            .iter()
            .any(|v| v.code() == "self_bond"));
    }

    #[test]
    fn bulk_network_relabels() {
        let (mut s, mut b) = square2(Coupling::xx(1.0), 0.1);
        // put a surface site first to force relabeling
        s.rotate_right(1);
        for (k, site) in s.iter_mut().enumerate() {
            site.id = k;
        }
        for bond in b.iter_mut() {
            bond.i = (bond.i + 1) % 6;
            bond.j = (bond.j + 1) % 6;
        }
        let net = SpinNetwork::new(s, b).unwrap();
        let (bulk, map) = net.bulk_network();
        assert_eq!(map, vec![1, 2, 3, 4]);
        assert_eq!(bulk.bonds().len(), 4);
        assert_eq!(bulk.bonds()[0].i, 0);
    }

    #[test]
    fn classification_tags() {
        let tag = |c: Coupling| {
            let (s, b) = square2(c, 0.1);
            classify_symmetry(&SpinNetwork::new(s, b).unwrap(), SYMMETRY_TOL).tag
        };
        assert_eq!(tag(Coupling::xx(1.0)), SymmetryTag::XX);
        assert_eq!(tag(Coupling::xxz(1.0, 0.5)), SymmetryTag::XXZ);
        assert_eq!(tag(Coupling::xxx(1.0)), SymmetryTag::XXX);
        assert_eq!(tag(Coupling::new(1.0, 0.0, 0.0)), SymmetryTag::Ising);
        assert_eq!(tag(Coupling::new(0.0, 0.0, -1.0)), SymmetryTag::Ising);
        assert_eq!(tag(Coupling::new(1.0, 0.5, 0.0)), SymmetryTag::XY);
        assert_eq!(tag(Coupling::new(1.0, 0.5, 0.2)), SymmetryTag::XYZ);
    }
}
