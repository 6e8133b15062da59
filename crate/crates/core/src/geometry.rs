//! Catalog of reference networks.
//!
//! Bulk sites come first (`B0`, `B1`, ...), surface sites after them
//! (`S1`, `S2`, ...). Attachment choices:
//!
//! | key | bulk | surface attachments |
//! |-----|------|---------------------|
//! | `square2` | 4-cycle | 0, 2 |
//! | `cube2` | cube, vertex `v` adjacent to `v ^ 2^d` | 0, 7 |
//! | `ring(n)` | n-cycle, n even | 0, n/2 |
//! | `frustrated_square` | 4-cycle + diagonal (0,2) | 0, 2 |
//! | `frustrated_pentagon` | 5-cycle + site 5 bonded to 0 and 2 | 3, 4 |
//! | `modular(m)` | m 4-cycles; block q holds 4q..4q+3, link (4q+2, 4q+4) of strength λ·J | 0, 4(m-1)+2 |
//! | `nested_squares` | 4-cycle | 0, 1 (λ); 2, 3 (λ′, default λ²) |
//! | `ring8` | 8-cycle | pair p on p, p+4 with λ·rᵖ |
//! | `square4` | 4-cycle | 0, 1, 2, 3 |
//! | `cube4` | cube | 0, 3, 5, 6 |

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{Bond, Coupling, Site, SiteKind, SpinNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Ferro,
    Antiferro,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Ferro => -1.0,
            Sign::Antiferro => 1.0,
        }
    }
}

/// Parameters for [`make_geometry`]. Coupling magnitudes are multiplied by
/// the sign (ferro flips them negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub lambda: f64,
    /// Weight of the second pair in `nested_squares`; `None` means λ².
    pub lambda_prime: Option<f64>,
    /// Hierarchy ratio of `ring8`.
    pub ratio: f64,
    pub bulk: Coupling,
    /// Surface coupling `K`; `None` reuses the bulk coupling.
    pub surface: Option<Coupling>,
    pub sign: Sign,
    /// Ring length or block count when the key does not carry it.
    pub size: Option<usize>,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            lambda: 0.1,
            lambda_prime: None,
            ratio: 0.05,
            bulk: Coupling::xx(1.0),
            surface: None,
            sign: Sign::Antiferro,
            size: None,
        }
    }
}

impl GeometryParams {
    pub fn new(lambda: f64, bulk: Coupling, sign: Sign) -> Self {
        GeometryParams {
            lambda,
            bulk,
            sign,
            ..Default::default()
        }
    }

    pub fn with_surface(mut self, k: Coupling) -> Self {
        self.surface = Some(k);
        self
    }

    pub fn with_size(mut self, n: usize) -> Self {
        self.size = Some(n);
        self
    }

    pub fn with_lambda_prime(mut self, l: f64) -> Self {
        self.lambda_prime = Some(l);
        self
    }

    pub fn with_ratio(mut self, r: f64) -> Self {
        self.ratio = r;
        self
    }

    fn j(&self) -> Coupling {
        self.bulk.scaled(self.sign.factor())
    }

    fn k(&self) -> Coupling {
        self.surface.unwrap_or(self.bulk).scaled(self.sign.factor())
    }
}

/// Catalog keys, with sized families written as `ring(n)` / `modular(m)`.
pub const CATALOG: [&str; 10] = [
    "square2",
    "cube2",
    "ring(n)",
    "frustrated_square",
    "frustrated_pentagon",
    "modular(m)",
    "nested_squares",
    "ring8",
    "square4",
    "cube4",
];

fn check_weight(name: &str, w: f64) -> Result<()> {
    if w > 0.0 && w <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadParams(format!("{name} = {w} outside (0, 1]")))
    }
}

/// Splits `ring(6)` / `ring6` style keys into family and size.
fn parse_key(name: &str) -> (String, Option<usize>) {
    let name = name.trim();
    if let Some(open) = name.find('(') {
        if let Some(inner) = name[open + 1..].strip_suffix(')') {
            if let Ok(n) = inner.trim().parse() {
                return (name[..open].to_string(), Some(n));
            }
        }
        return (name.to_string(), None);
    }
    for family in ["ring", "modular"] {
        if let Some(rest) = name.strip_prefix(family) {
            if let Ok(n) = rest.parse() {
                if !(family == "ring" && n == 8 && rest == "8") {
                    return (family.to_string(), Some(n));
                }
            }
        }
    }
    (name.to_string(), None)
}

struct Builder {
    sites: Vec<Site>,
    bonds: Vec<Bond>,
    n_bulk: usize,
}

impl Builder {
    fn new(n_bulk: usize) -> Self {
        let sites = (0..n_bulk)
            .map(|i| Site::new(i, format!("B{i}"), SiteKind::Bulk))
            .collect();
        Builder {
            sites,
            bonds: Vec::new(),
            n_bulk,
        }
    }

    fn bulk_bonds(&mut self, pairs: &[(usize, usize)], c: Coupling) {
        self.bonds
            .extend(pairs.iter().map(|&(i, j)| Bond::bulk(i, j, c)));
    }

    fn surface(&mut self, anchor: usize, k: Coupling, weight: f64) {
        let id = self.sites.len();
        let label = format!("S{}", id - self.n_bulk + 1);
        self.sites.push(Site::new(id, label, SiteKind::Surface));
        self.bonds.push(Bond::new(id, anchor, k, weight));
    }

    fn build(self) -> Result<SpinNetwork> {
        SpinNetwork::new(self.sites, self.bonds)
    }
}

fn ring_edges(n: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (offset + i, offset + (i + 1) % n)).collect()
}

fn cube_edges() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for v in 0..8usize {
        for d in 0..3 {
            let w = v ^ (1 << d);
            if v < w {
                e.push((v, w));
            }
        }
    }
    e
}

/// Builds a catalog network; see the module docs for the attachment sites.
pub fn make_geometry(name: &str, params: &GeometryParams) -> Result<SpinNetwork> {
    let (family, size) = parse_key(name);
    let size = size.or(params.size);
    check_weight("lambda", params.lambda)?;
    let (j, k, lam) = (params.j(), params.k(), params.lambda);
    let mut b;
    match family.as_str() {
        "square2" | "square4" | "frustrated_square" | "nested_squares" => {
            b = Builder::new(4);
            b.bulk_bonds(&ring_edges(4, 0), j);
            match family.as_str() {
                "square2" => {
                    b.surface(0, k, lam);
                    b.surface(2, k, lam);
                }
                "square4" => (0..4).for_each(|a| b.surface(a, k, lam)),
                "frustrated_square" => {
                    b.bulk_bonds(&[(0, 2)], j);
                    b.surface(0, k, lam);
                    b.surface(2, k, lam);
                }
                _ => {
                    let lp = params.lambda_prime.unwrap_or(lam * lam);
                    check_weight("lambda_prime", lp)?;
                    b.surface(0, k, lam);
                    b.surface(1, k, lam);
                    b.surface(2, k, lp);
                    b.surface(3, k, lp);
                }
            }
        }
        "cube2" | "cube4" => {
            b = Builder::new(8);
            b.bulk_bonds(&cube_edges(), j);
            let anchors: &[usize] = if family == "cube2" {
                &[0, 7]
            } else {
                &[0, 3, 5, 6]
            };
            anchors.iter().for_each(|&a| b.surface(a, k, lam));
        }
        "ring" => {
            let n = size.ok_or_else(|| Error::BadParams("ring needs a size".into()))?;
            if n < 4 || n % 2 != 0 || n + 2 > crate::basis::MAX_SITES {
                return Err(Error::BadParams(format!(
                    "ring size {n} must be even and in 4..=60"
                )));
            }
            b = Builder::new(n);
            b.bulk_bonds(&ring_edges(n, 0), j);
            b.surface(0, k, lam);
            b.surface(n / 2, k, lam);
        }
        "ring8" => {
            if !(params.ratio > 0.0 && params.ratio <= 1.0) {
                return Err(Error::BadParams(format!(
                    "ratio {} outside (0, 1]",
                    params.ratio
                )));
            }
            b = Builder::new(8);
            b.bulk_bonds(&ring_edges(8, 0), j);
            let mut w = lam;
            for p in 0..4 {
                b.surface(p, k, w);
                b.surface(p + 4, k, w);
                w *= params.ratio;
            }
        }
        "frustrated_pentagon" => {
            b = Builder::new(6);
            b.bulk_bonds(&ring_edges(5, 0), j);
            b.bulk_bonds(&[(0, 5), (5, 2)], j);
            b.surface(3, k, lam);
            b.surface(4, k, lam);
        }
        "modular" => {
            let m = size.ok_or_else(|| Error::BadParams("modular needs a block count".into()))?;
            if m == 0 || 4 * m + 2 > crate::basis::MAX_SITES {
                return Err(Error::BadParams(format!("block count {m} outside 1..=15")));
            }
            b = Builder::new(4 * m);
            for q in 0..m {
                b.bulk_bonds(&ring_edges(4, 4 * q), j);
            }
            let link: Vec<(usize, usize)> = (0..m - 1).map(|q| (4 * q + 2, 4 * (q + 1))).collect();
            b.bulk_bonds(&link, j.scaled(lam));
            b.surface(0, k, lam);
            b.surface(4 * (m - 1) + 2, k, lam);
        }
        _ => return Err(Error::UnknownGeometry(name.to_string())),
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{classify_symmetry, SymmetryTag, SYMMETRY_TOL};

    fn p() -> GeometryParams {
        GeometryParams::default()
    }

    #[test]
    fn sizes_of_catalog_entries() {
        let cases = [
            ("square2", 6, 6),
            ("cube2", 10, 14),
            ("ring(6)", 8, 8),
            ("ring6", 8, 8),
            ("frustrated_square", 6, 7),
            ("frustrated_pentagon", 8, 9),
            ("modular(3)", 14, 16),
            ("nested_squares", 8, 8),
            ("ring8", 16, 16),
            ("square4", 8, 8),
            ("cube4", 12, 16),
        ];
        for (name, n, nb) in cases {
            let net = make_geometry(name, &p()).unwrap();
            assert_eq!((net.n_sites(), net.bonds().len()), (n, nb), "{name}");
        }
    }

    #[test]
    fn ring_attaches_antipodally() {
        let net = make_geometry("ring", &p().with_size(6)).unwrap();
        let links = net.surface_links();
        assert_eq!((links[0].bulk, links[1].bulk), (0, 3));
    }

    #[test]
    fn parameter_errors() {
        let mut q = p();
        q.lambda = 0.0;
        assert!(matches!(
            make_geometry("square2", &q),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            make_geometry("ring(5)", &p()),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            make_geometry("ring", &p()),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            make_geometry("modular(0)", &p()),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            make_geometry("hexagon", &p()),
            Err(Error::UnknownGeometry(_))
        ));
    }

    #[test]
    fn sign_and_surface_coupling() {
        let q = GeometryParams::new(0.2, Coupling::xxz(1.0, 0.5), Sign::Ferro)
            .with_surface(Coupling::xxz(1.0, 0.3));
        let net = make_geometry("square2", &q).unwrap();
        assert_eq!(net.bonds()[0].coupling, Coupling::xxz(-1.0, -0.5));
        let link = net.surface_links()[0];
        assert_eq!(link.coupling, Coupling::xxz(-1.0, -0.3));
        assert_eq!(link.weight, 0.2);
        assert_eq!(classify_symmetry(&net, SYMMETRY_TOL).tag, SymmetryTag::XXZ);
    }

    #[test]
    fn hierarchy_weights() {
        let net = make_geometry(
            "ring8",
            &GeometryParams {
                lambda: 0.05,
                ratio: 0.1,
                ..p()
            },
        )
        .unwrap();
        let w: Vec<f64> = net.surface_links().iter().map(|l| l.weight).collect();
        assert_eq!(w[0], 0.05);
        assert_eq!(w[1], 0.05);
        assert!((w[6] - 0.05e-3).abs() < 1e-18);
        let nested = make_geometry("nested_squares", &p()).unwrap();
        let w: Vec<f64> = nested.surface_links().iter().map(|l| l.weight).collect();
        assert!((w[2] - 0.01).abs() < 1e-15);
    }
}
