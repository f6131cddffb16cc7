//! Graded-commutative cohomology rings of closed oriented even-dimensional manifolds.
//!
//! A ring is presented by a homogeneous basis `e_0, ..., e_{n-1}` together with
//! structure constants `e_i * e_j = sum_l c_ij^l e_l`. Homology is identified with
//! the Kronecker-dual basis `c_0, ..., c_{n-1}` (`<c_l, e_i> = delta_il`), so the
//! fundamental class is the dual of the top class and pairs with it to 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseExactMatrix;
use crate::rational::{self, Rational};

/// Where a presentation came from. Only built-in `CP^m` rings admit the
/// reduced complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingOrigin {
    ComplexProjective { m: u32 },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingPresentation {
    pub name: String,
    pub basis_names: Vec<String>,
    pub degrees: Vec<u32>,
    /// `(i, j) -> [(l, c_ij^l)]`; absent pairs multiply to zero.
    pub structure_constants: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
    pub manifold_dimension: u32,
    pub unit_index: Option<usize>,
    pub top_index: usize,
    pub origin: RingOrigin,
}

/// One term `coeff * (c_left (x) c_right)` of a diagonal coproduct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoproductTerm {
    pub left: usize,
    pub right: usize,
    #[serde(with = "rational::text")]
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub indices: Vec<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RingDiagnostics {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl RingDiagnostics {
    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "valid".to_string(),
            Some(v) if self.violations.len() == 1 => format!("[{}] {}", v.rule, v.message),
            Some(v) => format!(
                "[{}] {} (and {} more)",
                v.rule,
                v.message,
                self.violations.len() - 1
            ),
        }
    }
}

impl fmt::Display for RingDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return writeln!(f, "valid");
        }
        writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  [{}] {}", v.rule, v.message)?;
        }
        Ok(())
    }
}

/// `H^*(CP^m; Q) = Q[x]/(x^{m+1})` with `deg x = 2`.
pub fn make_cpm(m: u32) -> Result<RingPresentation> {
    if m == 0 {
        return Err(Error::InvalidParameter("CP^m needs m >= 1".into()));
    }
    let n = m as usize + 1;
    let basis_names = (0..n)
        .map(|a| match a {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{a}"),
        })
        .collect();
    let degrees = (0..n as u32).map(|a| 2 * a).collect();
    let mut structure_constants = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            if a + b < n {
                structure_constants.insert((a, b), vec![(a + b, Rational::one())]);
            }
        }
    }
    Ok(RingPresentation {
        name: format!("CP^{m}"),
        basis_names,
        degrees,
        structure_constants,
        manifold_dimension: 2 * m,
        unit_index: Some(0),
        top_index: m as usize,
        origin: RingOrigin::ComplexProjective { m },
    })
}

impl RingPresentation {
    pub fn len(&self) -> usize {
        self.basis_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis_names.is_empty()
    }

    /// `m` with `d = 2m`.
    pub fn half_dimension(&self) -> u32 {
        self.manifold_dimension / 2
    }

    pub fn cpm_parameter(&self) -> Option<u32> {
        match self.origin {
            RingOrigin::ComplexProjective { m } => Some(m),
            RingOrigin::Custom => None,
        }
    }

    pub fn product(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        self.structure_constants
            .get(&(i, j))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn coefficient(&self, i: usize, j: usize, l: usize) -> Rational {
        self.product(i, j)
            .iter()
            .filter(|(t, _)| *t == l)
            .map(|(_, c)| c.clone())
            .fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Product of two elements given in coordinates.
    pub fn multiply(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = self.len();
        let mut out = vec![Rational::zero(); n];
        for (&(i, j), terms) in &self.structure_constants {
            if i >= n || j >= n || a[i].is_zero() || b[j].is_zero() {
                continue;
            }
            let ab = &a[i] * &b[j];
            for (l, c) in terms {
                if *l < n {
                    out[*l] += &ab * c;
                }
            }
        }
        out
    }

    /// `P_ij = <e_i e_j, [M]>`.
    pub fn pairing_matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.coefficient(i, j, self.top_index))
                    .collect()
            })
            .collect()
    }

    /// Betti numbers of `M`, by degree.
    pub fn betti_numbers(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for &d in &self.degrees {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: RingDocument = serde_json::from_str(text)?;
        doc.into_presentation()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_document(&self) -> RingDocument {
        let name_of = |i: usize| self.basis_names[i].clone();
        RingDocument {
            name: Some(self.name.clone()),
            dimension: self.manifold_dimension as i64,
            basis: self
                .basis_names
                .iter()
                .zip(&self.degrees)
                .map(|(name, &degree)| BasisEntry {
                    name: name.clone(),
                    degree: degree as i64,
                })
                .collect(),
            products: self
                .structure_constants
                .iter()
                .map(|(&(i, j), terms)| ProductEntry {
                    left: name_of(i),
                    right: name_of(j),
                    result: terms
                        .iter()
                        .map(|(l, c)| ResultEntry {
                            basis: name_of(*l),
                            coeff: c.clone(),
                        })
                        .collect(),
                })
                .collect(),
            top: name_of(self.top_index),
        }
    }
}

/// Checks every presentation invariant and reports all violations.
pub fn validate_ring(r: &RingPresentation) -> RingDiagnostics {
    let mut violations = Vec::new();
    let mut report = |rule: &'static str, indices: Vec<usize>, message: String| {
        violations.push(Violation {
            rule,
            indices,
            message,
        })
    };
    let n = r.len();
    let d = r.manifold_dimension;

    if d == 0 || d % 2 == 1 {
        report(
            "dimension-even",
            vec![],
            format!("manifold dimension {d} is not a positive even integer"),
        );
    }
    if r.degrees.len() != n {
        report(
            "shape",
            vec![],
            format!("{} names but {} degrees", n, r.degrees.len()),
        );
        return finish(violations);
    }
    for (i, &deg) in r.degrees.iter().enumerate() {
        if deg > d {
            report(
                "degree-range",
                vec![i],
                format!(
                    "{} has degree {deg} above the dimension {d}",
                    r.basis_names[i]
                ),
            );
        }
    }
    let mut in_range = true;
    for (&(i, j), terms) in &r.structure_constants {
        let bad = i >= n || j >= n || terms.iter().any(|(l, _)| *l >= n);
        if bad {
            in_range = false;
            report(
                "index-range",
                vec![i, j],
                format!("product ({i}, {j}) references a basis index outside 0..{n}"),
            );
        }
    }
    if !in_range {
        return finish(violations);
    }
    let name = |i: usize| r.basis_names[i].as_str();

    // connectedness and unit
    let zeros: Vec<usize> = (0..n).filter(|&i| r.degrees[i] == 0).collect();
    if zeros.len() != 1 {
        report(
            "unit",
            zeros.clone(),
            format!(
                "expected exactly one basis element of degree 0, found {}",
                zeros.len()
            ),
        );
    }
    match r.unit_index {
        None => report("unit", vec![], "no unit element recorded".into()),
        Some(u) if u >= n || r.degrees[u] != 0 => report(
            "unit",
            vec![u],
            format!("unit index {u} is not a degree-0 basis element"),
        ),
        Some(u) => {
            for i in 0..n {
                for (a, b) in [(u, i), (i, u)] {
                    let expected = (0..n).all(|l| {
                        let c = r.coefficient(a, b, l);
                        if l == i {
                            c.is_one()
                        } else {
                            c.is_zero()
                        }
                    });
                    if !expected {
                        report(
                            "unit",
                            vec![a, b],
                            format!("{}*{} does not equal {}", name(a), name(b), name(i)),
                        );
                    }
                }
            }
        }
    }

    // orientation class
    let tops: Vec<usize> = (0..n).filter(|&i| r.degrees[i] == d).collect();
    if tops.len() != 1 {
        report(
            "top",
            tops.clone(),
            format!(
                "expected exactly one basis element of degree {d}, found {}",
                tops.len()
            ),
        );
    }
    if r.top_index >= n || r.degrees[r.top_index] != d {
        report(
            "top",
            vec![r.top_index],
            format!(
                "top index {} is not a degree-{d} basis element",
                r.top_index
            ),
        );
    }

    for (&(i, j), terms) in &r.structure_constants {
        for (l, c) in terms {
            if !c.is_zero() && r.degrees[*l] != r.degrees[i] + r.degrees[j] {
                report(
                    "grading",
                    vec![i, j, *l],
                    format!(
                        "product {}*{} has a term in {} of degree {}, expected degree {}",
                        name(i),
                        name(j),
                        name(*l),
                        r.degrees[*l],
                        r.degrees[i] + r.degrees[j]
                    ),
                );
            }
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            let sign = if (r.degrees[i] * r.degrees[j]).is_multiple_of(2) {
                Rational::one()
            } else {
                -Rational::one()
            };
            for l in 0..n {
                if r.coefficient(i, j, l) != &sign * r.coefficient(j, i, l) {
                    report(
                        "graded-commutativity",
                        vec![i, j],
                        format!(
                            "{}*{} and {}*{} disagree on the {} coefficient",
                            name(i),
                            name(j),
                            name(j),
                            name(i),
                            name(l)
                        ),
                    );
                    break;
                }
            }
        }
    }

    let unit_vec = |i: usize| {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        v
    };
    for i in 0..n {
        for j in 0..n {
            let ij = r.multiply(&unit_vec(i), &unit_vec(j));
            for l in 0..n {
                let jl = r.multiply(&unit_vec(j), &unit_vec(l));
                if r.multiply(&ij, &unit_vec(l)) != r.multiply(&unit_vec(i), &jl) {
                    report(
                        "associativity",
                        vec![i, j, l],
                        format!(
                            "({}*{})*{} differs from {}*({}*{})",
                            name(i),
                            name(j),
                            name(l),
                            name(i),
                            name(j),
                            name(l)
                        ),
                    );
                }
            }
        }
    }

    if r.top_index < n {
        let pairing = r.pairing_matrix();
        let triplets = pairing
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| (i, j, c.clone())));
        let rank = SparseExactMatrix::from_triplets(n, n, triplets)
            .expect("pairing indices are in range")
            .rank();
        if rank != n {
            report(
                "pairing-nondegenerate",
                vec![],
                format!("Poincare pairing has rank {rank} < {n}"),
            );
        }
    }

    finish(violations)
}

fn finish(violations: Vec<Violation>) -> RingDiagnostics {
    RingDiagnostics {
        valid: violations.is_empty(),
        violations,
    }
}

/// The diagonal `Delta(c_l) = sum_{i,j} c_ij^l c_i (x) c_j` over ordered pairs,
/// dual to the cup product: `<Delta(c), a (x) b> = <c, a b>`.
pub fn diagonal_comultiplication(r: &RingPresentation) -> Result<Vec<Vec<CoproductTerm>>> {
    let diag = validate_ring(r);
    if !diag.valid {
        return Err(Error::InvalidRing(diag));
    }
    let n = r.len();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            let mut by_target: BTreeMap<usize, Rational> = BTreeMap::new();
            for (l, c) in r.product(i, j) {
                *by_target.entry(*l).or_insert_with(Rational::zero) += c;
            }
            for (l, coeff) in by_target {
                if !coeff.is_zero() {
                    out[l].push(CoproductTerm {
                        left: i,
                        right: j,
                        coeff,
                    });
                }
            }
        }
    }
    Ok(out)
}

// ---- JSON schema ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: i64,
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub products: Vec<ProductEntry>,
    pub top: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub result: Vec<ResultEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultEntry {
    pub basis: String,
    #[serde(with = "rational::text")]
    pub coeff: Rational,
}

impl RingDocument {
    pub fn into_presentation(self) -> Result<RingPresentation> {
        if self.dimension <= 0 || self.dimension % 2 != 0 {
            return Err(Error::Schema(format!(
                "dimension {} must be a positive even integer",
                self.dimension
            )));
        }
        let mut index = HashMap::new();
        let mut basis_names = Vec::with_capacity(self.basis.len());
        let mut degrees = Vec::with_capacity(self.basis.len());
        for (i, entry) in self.basis.into_iter().enumerate() {
            if entry.degree < 0 {
                return Err(Error::Schema(format!(
                    "basis element {:?} has negative degree {}",
                    entry.name, entry.degree
                )));
            }
            if index.insert(entry.name.clone(), i).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate basis name {:?}",
                    entry.name
                )));
            }
            basis_names.push(entry.name);
            degrees.push(
                u32::try_from(entry.degree)
                    .map_err(|_| Error::Schema(format!("degree {} out of range", entry.degree)))?,
            );
        }
        let lookup = |name: &str, ctx: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Schema(format!("unknown basis name {name:?} in {ctx}")))
        };
        let mut structure_constants = BTreeMap::new();
        for p in &self.products {
            let ctx = format!("product {}*{}", p.left, p.right);
            let i = lookup(&p.left, &ctx)?;
            let j = lookup(&p.right, &ctx)?;
            let mut terms = Vec::new();
            for t in &p.result {
                let l = lookup(&t.basis, &ctx)?;
                if !t.coeff.is_zero() {
                    terms.push((l, t.coeff.clone()));
                }
            }
            if structure_constants.insert((i, j), terms).is_some() {
                return Err(Error::Schema(format!("duplicate entry for {ctx}")));
            }
        }
        let top_index = lookup(&self.top, "top")?;
        let unit_index = degrees.iter().position(|&d| d == 0);
        Ok(RingPresentation {
            name: self.name.unwrap_or_else(|| "custom".to_string()),
            basis_names,
            degrees,
            structure_constants,
            manifold_dimension: self.dimension as u32,
            unit_index,
            top_index,
            origin: RingOrigin::Custom,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn unit(n: usize, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        v
    }

    #[test]
    fn cp1_basis_and_pairing() {
        let r = make_cpm(1).unwrap();
        assert_eq!(r.basis_names, vec!["1", "x"]);
        assert_eq!(r.degrees, vec![0, 2]);
        assert_eq!(r.manifold_dimension, 2);
        assert!(r.coefficient(1, 1, 1).is_zero());
        let p = r.pairing_matrix();
        assert_eq!(p, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
    }

    #[test]
    fn cp2_truncation() {
        let r = make_cpm(2).unwrap();
        assert_eq!(r.degrees, vec![0, 2, 4]);
        assert_eq!(r.manifold_dimension, 4);
        assert_eq!(r.coefficient(1, 1, 2), int(1));
        assert!(r.product(1, 2).is_empty());
        assert!(r.product(2, 2).is_empty());
    }

    #[test]
    fn m_zero_rejected() {
        assert!(matches!(make_cpm(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn builtins_are_valid() {
        for m in 1..=6 {
            let d = validate_ring(&make_cpm(m).unwrap());
            assert!(d.valid, "CP^{m}: {d}");
        }
    }

    #[test]
    fn deleting_a_product_is_caught() {
        let mut r = make_cpm(2).unwrap();
        r.structure_constants.remove(&(1, 2));
        r.structure_constants.remove(&(2, 1));
        r.structure_constants.insert((1, 1), vec![]);
        let d = validate_ring(&r);
        assert!(!d.valid);
        assert!(d.has_rule("pairing-nondegenerate") || d.has_rule("associativity"));
    }

    #[test]
    fn deleting_one_side_breaks_commutativity() {
        let mut r = make_cpm(2).unwrap();
        r.structure_constants.remove(&(2, 0));
        let d = validate_ring(&r);
        assert!(d.has_rule("graded-commutativity"));
    }

    #[test]
    fn bad_grading_is_reported() {
        let mut r = make_cpm(2).unwrap();
        r.degrees = vec![0, 2, 3];
        r.manifold_dimension = 4;
        let d = validate_ring(&r);
        assert!(d.has_rule("grading"), "{d}");
        assert!(d.violations.iter().any(|v| v.message.contains("x*x")));
    }

    #[test]
    fn reports_all_violations() {
        let mut r = make_cpm(2).unwrap();
        r.manifold_dimension = 5;
        r.unit_index = None;
        let d = validate_ring(&r);
        assert!(d.has_rule("dimension-even"));
        assert!(d.has_rule("unit"));
        assert!(d.has_rule("top"));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn coproduct_matches_truncated_formula() {
        // Delta(c_s) = sum_{a+b=s} c_a (x) c_b, 0 <= a, b <= m
        for m in 1..=4u32 {
            let r = make_cpm(m).unwrap();
            let delta = diagonal_comultiplication(&r).unwrap();
            for s in 0..=m as usize {
                let expected: Vec<CoproductTerm> = (0..=s)
                    .map(|a| CoproductTerm {
                        left: a,
                        right: s - a,
                        coeff: int(1),
                    })
                    .collect();
                assert_eq!(delta[s], expected, "m={m} s={s}");
            }
        }
    }

    #[test]
    fn cp1_fundamental_class_coproduct_has_two_terms() {
        let r = make_cpm(1).unwrap();
        let delta = diagonal_comultiplication(&r).unwrap();
        assert_eq!(delta[1].len(), 2);
        assert_eq!((delta[1][0].left, delta[1][0].right), (0, 1));
        assert_eq!((delta[1][1].left, delta[1][1].right), (1, 0));
    }

    fn torus() -> RingPresentation {
        RingPresentation::from_json_str(include_str!("../../../rings/torus.json")).unwrap()
    }

    #[test]
    fn pairing_identity_and_cocommutativity() {
        let rings = vec![
            make_cpm(3).unwrap(),
            torus(),
            RingPresentation::from_json_str(include_str!("../../../rings/s2xs2.json")).unwrap(),
        ];
        for r in rings {
            let n = r.len();
            let delta = diagonal_comultiplication(&r).unwrap();
            for (l, terms) in delta.iter().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        // <c_l, e_a e_b> computed from a product of elements
                        let rhs = r.multiply(&unit(n, a), &unit(n, b))[l].clone();
                        let lhs = terms
                            .iter()
                            .filter(|t| t.left == a && t.right == b)
                            .fold(Rational::zero(), |acc, t| acc + &t.coeff);
                        assert_eq!(lhs, rhs, "{} l={l} a={a} b={b}", r.name);

                        let sign = if (r.degrees[a] * r.degrees[b]) % 2 == 0 {
                            1
                        } else {
                            -1
                        };
                        let swapped = terms
                            .iter()
                            .filter(|t| t.left == b && t.right == a)
                            .fold(Rational::zero(), |acc, t| acc + &t.coeff);
                        assert_eq!(lhs, int(sign) * swapped);
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip_and_schema_errors() {
        let r = make_cpm(2).unwrap();
        let text = serde_json::to_string(&r.to_document()).unwrap();
        let back = RingPresentation::from_json_str(&text).unwrap();
        assert_eq!(back.structure_constants, r.structure_constants);
        assert_eq!(back.origin, RingOrigin::Custom);
        assert!(validate_ring(&back).valid);

        let bad = r#"{"dimension": 2, "basis": [{"name": "1", "degree": 0}],
                      "products": [{"left": "1", "right": "y", "result": []}], "top": "1"}"#;
        let err = RingPresentation::from_json_str(bad).unwrap_err();
        assert!(err.to_string().contains("\"y\""), "{err}");

        let odd = r#"{"dimension": 3, "basis": [], "top": "1"}"#;
        assert!(matches!(
            RingPresentation::from_json_str(odd),
            Err(Error::Schema(_))
        ));

        let float = r#"{"dimension": 2, "basis": [{"name": "1", "degree": 0}],
                        "products": [{"left": "1", "right": "1", "result": [{"basis": "1", "coeff": 0.5}]}],
                        "top": "1"}"#;
        assert!(RingPresentation::from_json_str(float).is_err());
    }

    #[test]
    fn torus_is_valid() {
        let d = validate_ring(&torus());
        assert!(d.valid, "{d}");
    }
}
