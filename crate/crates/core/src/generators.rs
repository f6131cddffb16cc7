//! The generating spaces `V = H_{-*}(M)[2m]` and `W = H_{-*}(M)[4m-1]`, and the
//! quadratic differential on `W` induced by the diagonal.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::rational::{self, Rational};
use crate::ring::{diagonal_comultiplication, RingPresentation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(degree: u32) -> Self {
        if degree.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorKind {
    V,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
    pub degree: u32,
    pub parity: Parity,
    /// Ring basis index of the dual homology class this generator suspends.
    pub homology_index: usize,
    pub homology_source_degree: u32,
}

impl Generator {
    pub fn is_odd(&self) -> bool {
        self.parity == Parity::Odd
    }
}

/// `coeff * v_left v_right`, indices into `GeneratorSet::v_gens`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryTerm {
    pub left: usize,
    pub right: usize,
    #[serde(with = "rational::text")]
    pub coeff: Rational,
}

/// Generators are addressed by a global index: `0..n_v` are the `v`s sorted by
/// degree, `n_v..n_v + n_w` the `w`s sorted likewise. This is the canonical
/// factor order used for monomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSet {
    pub ring_name: String,
    pub d: u32,
    pub cpm: Option<u32>,
    pub v_gens: Vec<Generator>,
    pub w_gens: Vec<Generator>,
    /// Aligned with `w_gens`.
    pub boundary_on_w: Vec<Vec<BoundaryTerm>>,
    unit_v: usize,
    unit_w: usize,
}

fn regrade(r: &RingPresentation, kind: GeneratorKind, shift: u32) -> Vec<Generator> {
    let prefix = match kind {
        GeneratorKind::V => "v",
        GeneratorKind::W => "w",
    };
    let mut order: Vec<(u32, usize)> = r
        .degrees
        .iter()
        .enumerate()
        .map(|(i, &j)| (shift - j, i))
        .collect();
    order.sort();
    let mut multiplicity: BTreeMap<u32, usize> = BTreeMap::new();
    for (deg, _) in &order {
        *multiplicity.entry(*deg).or_default() += 1;
    }
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    order
        .into_iter()
        .map(|(degree, i)| {
            let q = seen.entry(degree).or_default();
            *q += 1;
            let name = if multiplicity[&degree] > 1 {
                format!("{prefix}_{{{degree},{q}}}")
            } else {
                format!("{prefix}_{degree}")
            };
            Generator {
                name,
                kind,
                degree,
                parity: Parity::of(degree),
                homology_index: i,
                homology_source_degree: r.degrees[i],
            }
        })
        .collect()
}

/// Derives `V`, `W` and `d|_W` from a valid ring.
pub fn build_generators(r: &RingPresentation) -> Result<GeneratorSet> {
    let delta = diagonal_comultiplication(r)?;
    let d = r.manifold_dimension;
    let v_gens = regrade(r, GeneratorKind::V, d);
    let w_gens = regrade(r, GeneratorKind::W, 2 * d - 1);

    let mut v_of_class = vec![0; r.len()];
    for (pos, g) in v_gens.iter().enumerate() {
        v_of_class[g.homology_index] = pos;
    }
    let boundary_on_w = w_gens
        .iter()
        .map(|w| {
            delta[w.homology_index]
                .iter()
                .map(|t| BoundaryTerm {
                    left: v_of_class[t.left],
                    right: v_of_class[t.right],
                    coeff: t.coeff.clone(),
                })
                .collect()
        })
        .collect();

    let unit = r.unit_index.expect("validated ring has a unit");
    let unit_v = v_gens
        .iter()
        .position(|g| g.homology_index == unit)
        .expect("unit class has a v generator");
    let unit_w = w_gens
        .iter()
        .position(|g| g.homology_index == unit)
        .expect("unit class has a w generator");

    Ok(GeneratorSet {
        ring_name: r.name.clone(),
        d,
        cpm: r.cpm_parameter(),
        v_gens,
        w_gens,
        boundary_on_w,
        unit_v,
        unit_w,
    })
}

impl GeneratorSet {
    pub fn n_v(&self) -> usize {
        self.v_gens.len()
    }

    pub fn n_w(&self) -> usize {
        self.w_gens.len()
    }

    /// Total number of generators (`n_v + n_w`).
    pub fn len(&self) -> usize {
        self.n_v() + self.n_w()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, global: usize) -> &Generator {
        if global < self.n_v() {
            &self.v_gens[global]
        } else {
            &self.w_gens[global - self.n_v()]
        }
    }

    pub fn degree(&self, global: usize) -> u32 {
        self.get(global).degree
    }

    pub fn is_odd(&self, global: usize) -> bool {
        self.get(global).is_odd()
    }

    pub fn is_w(&self, global: usize) -> bool {
        global >= self.n_v()
    }

    /// Global index of the `v` generator suspending the point class (degree `d`).
    pub fn point_v(&self) -> usize {
        self.unit_v
    }

    /// Global index of the `w` generator suspending the point class (degree `2d - 1`).
    pub fn point_w(&self) -> usize {
        self.n_v() + self.unit_w
    }

    pub fn boundary(&self, global: usize) -> &[BoundaryTerm] {
        if self.is_w(global) {
            &self.boundary_on_w[global - self.n_v()]
        } else {
            &[]
        }
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        (0..self.len()).find(|&g| self.get(g).name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("generator sets serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::ring::make_cpm;

    fn degrees(gens: &[Generator]) -> Vec<u32> {
        gens.iter().map(|g| g.degree).collect()
    }

    #[test]
    fn cpm_degrees() {
        for m in 1..=5u32 {
            let g = build_generators(&make_cpm(m).unwrap()).unwrap();
            assert_eq!(
                degrees(&g.v_gens),
                (0..=m).map(|a| 2 * a).collect::<Vec<_>>()
            );
            assert_eq!(
                degrees(&g.w_gens),
                (m..=2 * m).map(|i| 2 * i - 1).collect::<Vec<_>>()
            );
            assert!(g.v_gens.iter().all(|v| !v.is_odd()));
            assert!(g.w_gens.iter().all(|w| w.is_odd()));
            assert_eq!(g.get(g.point_v()).degree, 2 * m);
            assert_eq!(g.get(g.point_w()).degree, 4 * m - 1);
            assert_eq!(g.n_v(), g.n_w());
            assert_eq!(g.v_gens[0].name, "v_0");
        }
    }

    #[test]
    fn cp2_boundaries() {
        let g = build_generators(&make_cpm(2).unwrap()).unwrap();
        let w7 = g.find("w_7").unwrap();
        let v4 = g.find("v_4").unwrap();
        let v2 = g.find("v_2").unwrap();
        assert_eq!(
            g.boundary(w7),
            &[BoundaryTerm {
                left: v4,
                right: v4,
                coeff: int(1)
            }]
        );
        let w5 = g.find("w_5").unwrap();
        let mut pairs: Vec<(usize, usize)> =
            g.boundary(w5).iter().map(|t| (t.left, t.right)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(v2, v4), (v4, v2)]);
        assert!(g.boundary(w5).iter().all(|t| t.coeff == int(1)));
    }

    #[test]
    fn boundary_matches_closed_form() {
        // d(w_{2i-1}) = sum_{a+b=i, 0<=a,b<=m} v_{2a} v_{2b}
        for m in 1..=4u32 {
            let g = build_generators(&make_cpm(m).unwrap()).unwrap();
            for i in m..=2 * m {
                let w = g.find(&format!("w_{}", 2 * i - 1)).unwrap();
                let mut got: Vec<(u32, u32)> = g
                    .boundary(w)
                    .iter()
                    .map(|t| {
                        assert_eq!(t.coeff, int(1));
                        (g.v_gens[t.left].degree, g.v_gens[t.right].degree)
                    })
                    .collect();
                got.sort();
                let want: Vec<(u32, u32)> = (0..=m)
                    .filter(|&a| i >= a && i - a <= m)
                    .map(|a| (2 * a, 2 * (i - a)))
                    .collect();
                assert_eq!(got, want, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn boundary_raises_degree_by_one() {
        let rings = [
            make_cpm(3).unwrap(),
            RingPresentation::from_json_str(include_str!("../../../rings/torus.json")).unwrap(),
            RingPresentation::from_json_str(include_str!("../../../rings/s2xs2.json")).unwrap(),
        ];
        for r in &rings {
            let g = build_generators(r).unwrap();
            let m = r.half_dimension();
            for (w, terms) in g.w_gens.iter().zip(&g.boundary_on_w) {
                for t in terms {
                    assert_eq!(
                        g.v_gens[t.left].degree + g.v_gens[t.right].degree,
                        w.degree + 1
                    );
                }
            }
            for gen in g.v_gens.iter().chain(&g.w_gens) {
                assert_eq!(gen.parity, Parity::of(gen.degree));
            }
            assert_eq!(g.v_gens.iter().map(|v| v.degree).min(), Some(0));
            assert_eq!(g.v_gens.iter().map(|v| v.degree).max(), Some(2 * m));
            assert_eq!(g.w_gens.iter().map(|v| v.degree).min(), Some(2 * m - 1));
            assert_eq!(g.w_gens.iter().map(|v| v.degree).max(), Some(4 * m - 1));
            assert_eq!(g.v_gens.iter().filter(|v| v.degree == 0).count(), 1);
            assert_eq!(g.n_v(), r.len());
        }
    }

    #[test]
    fn repeated_degrees_get_second_index() {
        let r = RingPresentation::from_json_str(include_str!("../../../rings/torus.json")).unwrap();
        let g = build_generators(&r).unwrap();
        let names: Vec<&str> = g.v_gens.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["v_0", "v_{1,1}", "v_{1,2}", "v_2"]);
        assert!(g.v_gens[1].is_odd());
        assert!(!g.w_gens[1].is_odd());
        assert!(g.to_json().contains("\"boundary_on_w\""));
    }
}
