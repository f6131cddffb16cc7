//! The bigraded complex `Omega_k = sum_w Sym^{k-2w}(V) (x) Sym^w(W)`.
//!
//! Monomials are stored as exponent vectors over the global generator order
//! (`v`s by degree, then `w`s by degree). A product written in any other order
//! is brought to this canonical order with the Koszul sign of the permutation
//! of its odd factors. The differential is the unique derivation of degree +1
//! that vanishes on `V` and sends each `w` to its quadratic boundary.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::generators::GeneratorSet;
use crate::linalg::SparseExactMatrix;
use crate::rational::{self, Rational};

/// Bidegree `(total degree, weight)`.
pub type Bidegree = (u32, u32);

/// A sparse linear combination of monomials keyed by exponent vector.
pub type Chain = BTreeMap<Vec<u32>, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
    degree: u32,
    weight: u32,
    v_length: u32,
}

impl Monomial {
    fn from_exps_unchecked(g: &GeneratorSet, exps: Vec<u32>) -> Self {
        let mut degree = 0;
        let mut weight = 0;
        let mut v_length = 0;
        for (i, &e) in exps.iter().enumerate() {
            degree += e * g.degree(i);
            if g.is_w(i) {
                weight += e;
            } else {
                v_length += e;
            }
        }
        Self {
            exps,
            degree,
            weight,
            v_length,
        }
    }

    pub fn from_exponents(g: &GeneratorSet, exps: Vec<u32>) -> Result<Self> {
        if exps.len() != g.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} exponents, got {}",
                g.len(),
                exps.len()
            )));
        }
        if let Some(i) = (0..exps.len()).find(|&i| g.is_odd(i) && exps[i] > 1) {
            return Err(Error::InvalidParameter(format!(
                "odd generator {} has exponent {}",
                g.get(i).name,
                exps[i]
            )));
        }
        Ok(Self::from_exps_unchecked(g, exps))
    }

    /// Builds a monomial from `(generator name, exponent)` pairs.
    pub fn from_powers(g: &GeneratorSet, powers: &[(&str, u32)]) -> Result<Self> {
        let mut exps = vec![0; g.len()];
        for (name, e) in powers {
            let i = g
                .find(name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown generator {name}")))?;
            exps[i] += e;
        }
        Self::from_exponents(g, exps)
    }

    pub fn one(g: &GeneratorSet) -> Self {
        Self::from_exps_unchecked(g, vec![0; g.len()])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn v_exponents<'a>(&'a self, g: &GeneratorSet) -> &'a [u32] {
        &self.exps[..g.n_v()]
    }

    pub fn w_exponents<'a>(&'a self, g: &GeneratorSet) -> &'a [u32] {
        &self.exps[g.n_v()..]
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn v_length(&self) -> u32 {
        self.v_length
    }

    pub fn bidegree(&self) -> Bidegree {
        (self.degree, self.weight)
    }

    pub fn name(&self, g: &GeneratorSet) -> String {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let n = &g.get(i).name;
                if e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Factors of a monomial with repetition, in canonical order.
fn factors(exps: &[u32]) -> Vec<usize> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
        .collect()
}

/// Brings a product of generators into canonical order.
///
/// Returns `None` when an odd generator repeats (the product vanishes),
/// otherwise the Koszul sign and the exponent vector.
fn normalize(g: &GeneratorSet, product: &[usize]) -> Option<(bool, Vec<u32>)> {
    let mut negative = false;
    for (a, &x) in product.iter().enumerate() {
        if !g.is_odd(x) {
            continue;
        }
        for &y in &product[a + 1..] {
            if y == x {
                return None;
            }
            if y < x && g.is_odd(y) {
                negative = !negative;
            }
        }
    }
    let mut exps = vec![0; g.len()];
    for &x in product {
        exps[x] += 1;
    }
    Some((negative, exps))
}

fn add_term(chain: &mut Chain, exps: Vec<u32>, coeff: Rational) {
    let slot = chain.entry(exps).or_insert_with(Rational::zero);
    *slot += coeff;
}

fn prune(mut chain: Chain) -> Chain {
    chain.retain(|_, c| !c.is_zero());
    chain
}

/// `d` of a monomial given by exponents, by the graded Leibniz rule
/// `d(g_1 ... g_n) = sum_t (-1)^{|g_1| + ... + |g_{t-1}|} g_1 ... d(g_t) ... g_n`.
pub fn differential_chain(g: &GeneratorSet, exps: &[u32]) -> Chain {
    let f = factors(exps);
    let mut out = Chain::new();
    let mut prefix_degree = 0u32;
    for t in 0..f.len() {
        for term in g.boundary(f[t]) {
            let mut product = Vec::with_capacity(f.len() + 1);
            product.extend_from_slice(&f[..t]);
            product.push(term.left);
            product.push(term.right);
            product.extend_from_slice(&f[t + 1..]);
            if let Some((negative, e)) = normalize(g, &product) {
                let flip = negative ^ (prefix_degree % 2 == 1);
                let c = if flip {
                    -term.coeff.clone()
                } else {
                    term.coeff.clone()
                };
                add_term(&mut out, e, c);
            }
        }
        prefix_degree += g.degree(f[t]);
    }
    prune(out)
}

/// `d` of a linear combination.
pub fn differential_of_chain(g: &GeneratorSet, chain: &Chain) -> Chain {
    let mut out = Chain::new();
    for (exps, c) in chain {
        for (e, d) in differential_chain(g, exps) {
            add_term(&mut out, e, c * d);
        }
    }
    prune(out)
}

/// `d x` as collected `(monomial, coefficient)` terms.
pub fn differential_of_monomial(g: &GeneratorSet, x: &Monomial) -> Vec<(Monomial, Rational)> {
    differential_chain(g, &x.exps)
        .into_iter()
        .map(|(e, c)| (Monomial::from_exps_unchecked(g, e), c))
        .collect()
}

/// Membership in the ideal generated by `v_{2m}^2` and `w_{4m-1}`.
pub fn in_point_ideal(g: &GeneratorSet, exps: &[u32]) -> bool {
    exps[g.point_v()] >= 2 || exps[g.point_w()] >= 1
}

#[derive(Clone, Debug)]
pub struct BigradedBasis {
    k: u32,
    reduced: bool,
    slices: BTreeMap<Bidegree, Vec<Monomial>>,
    index: HashMap<Vec<u32>, (Bidegree, usize)>,
}

impl BigradedBasis {
    fn from_monomials(
        k: u32,
        reduced: bool,
        monomials: impl IntoIterator<Item = Monomial>,
    ) -> Self {
        let mut slices: BTreeMap<Bidegree, Vec<Monomial>> = BTreeMap::new();
        for mono in monomials {
            slices.entry(mono.bidegree()).or_default().push(mono);
        }
        let mut index = HashMap::new();
        for (key, list) in slices.iter_mut() {
            list.sort_by(|a, b| b.exps.cmp(&a.exps));
            for (pos, mono) in list.iter().enumerate() {
                index.insert(mono.exps.clone(), (*key, pos));
            }
        }
        Self {
            k,
            reduced,
            slices,
            index,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn slices(&self) -> &BTreeMap<Bidegree, Vec<Monomial>> {
        &self.slices
    }

    pub fn slice(&self, key: Bidegree) -> &[Monomial] {
        self.slices.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn dim(&self, key: Bidegree) -> usize {
        self.slice(key).len()
    }

    pub fn position(&self, exps: &[u32]) -> Option<(Bidegree, usize)> {
        self.index.get(exps).copied()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.index.contains_key(&m.exps)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.slices.values().flatten()
    }

    pub fn top_degree(&self) -> Option<u32> {
        self.slices.keys().map(|k| k.0).max()
    }

    /// Highest-degree monomials.
    pub fn top_monomials(&self) -> Vec<&Monomial> {
        match self.top_degree() {
            None => Vec::new(),
            Some(t) => self.iter().filter(|m| m.degree == t).collect(),
        }
    }

    /// Dimension of the chain group in each total degree.
    pub fn degree_dims(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for ((i, _), list) in &self.slices {
            *out.entry(*i).or_default() += list.len();
        }
        out
    }

    /// `sum_i (-1)^i dim Omega^i`.
    pub fn chain_euler(&self) -> i64 {
        self.degree_dims()
            .iter()
            .map(|(i, n)| if i % 2 == 0 { *n as i64 } else { -(*n as i64) })
            .sum()
    }
}

/// All exponent vectors of total length `n` over the given generators
/// (odd generators capped at exponent 1).
fn sym_parts(odd: &[bool], n: u32) -> Vec<Vec<u32>> {
    fn go(odd: &[bool], at: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if at == odd.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let cap = if odd[at] { left.min(1) } else { left };
        for e in 0..=cap {
            cur.push(e);
            go(odd, at + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(odd, 0, n, &mut Vec::with_capacity(odd.len()), &mut out);
    out
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim Sym^n` of a graded space with `even` even and `odd` odd basis vectors.
pub fn sym_dim(even: u32, odd: u32, n: u32) -> u128 {
    (0..=n.min(odd))
        .map(|j| {
            let rest = (n - j) as u128;
            let even_part = if even == 0 {
                u128::from(rest == 0)
            } else {
                binomial(rest + even as u128 - 1, even as u128 - 1)
            };
            binomial(odd as u128, j as u128) * even_part
        })
        .sum()
}

/// Size of `Omega_k` without enumerating it.
pub fn count_monomials(g: &GeneratorSet, k: u32) -> u128 {
    let parity = |gens: &[crate::generators::Generator]| {
        let odd = gens.iter().filter(|x| x.is_odd()).count() as u32;
        (gens.len() as u32 - odd, odd)
    };
    let (ve, vo) = parity(&g.v_gens);
    let (we, wo) = parity(&g.w_gens);
    (0..=k / 2)
        .map(|w| sym_dim(ve, vo, k - 2 * w) * sym_dim(we, wo, w))
        .sum()
}

/// Every monomial of `Omega_k`, grouped by bidegree.
pub fn enumerate_basis(g: &GeneratorSet, k: u32) -> BigradedBasis {
    let v_odd: Vec<bool> = g.v_gens.iter().map(|x| x.is_odd()).collect();
    let w_odd: Vec<bool> = g.w_gens.iter().map(|x| x.is_odd()).collect();
    let mut monomials = Vec::new();
    for weight in 0..=k / 2 {
        let vs = sym_parts(&v_odd, k - 2 * weight);
        let ws = sym_parts(&w_odd, weight);
        for v in &vs {
            for w in &ws {
                let mut exps = v.clone();
                exps.extend_from_slice(w);
                monomials.push(Monomial::from_exps_unchecked(g, exps));
            }
        }
    }
    BigradedBasis::from_monomials(k, false, monomials)
}

/// Basis of the quotient by the acyclic ideal `(v_{2m}^2, w_{4m-1})`.
pub fn reduce_complex(g: &GeneratorSet, b: &BigradedBasis) -> Result<BigradedBasis> {
    if g.cpm.is_none() {
        return Err(Error::UnsupportedMode(format!(
            "the reduced complex is only defined for built-in CP^m, not {}",
            g.ring_name
        )));
    }
    let kept = b
        .iter()
        .filter(|m| !in_point_ideal(g, &m.exps))
        .cloned()
        .collect::<Vec<_>>();
    Ok(BigradedBasis::from_monomials(b.k, true, kept))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialBlock {
    pub source: Bidegree,
    pub target: Bidegree,
    /// Rows index the target slice, columns the source slice.
    pub matrix: SparseExactMatrix,
}

fn assemble_one(
    g: &GeneratorSet,
    b: &BigradedBasis,
    source: Bidegree,
) -> Result<DifferentialBlock> {
    let target = (source.0 + 1, source.1 - 1);
    let src = b.slice(source);
    let n_rows = b.dim(target);
    let mut triplets = Vec::new();
    for (col, mono) in src.iter().enumerate() {
        for (exps, c) in differential_chain(g, &mono.exps) {
            match b.position(&exps) {
                Some((key, row)) if key == target => triplets.push((row, col, c)),
                Some((key, _)) => {
                    return Err(Error::Grading(format!(
                        "d({}) has a term in bidegree {key:?}, expected {target:?}",
                        mono.name(g)
                    )))
                }
                None if b.is_reduced() && in_point_ideal(g, &exps) => {}
                None => {
                    let term = Monomial::from_exps_unchecked(g, exps);
                    return Err(Error::Grading(format!(
                        "d({}) has a term {} outside the basis",
                        mono.name(g),
                        term.name(g)
                    )));
                }
            }
        }
    }
    Ok(DifferentialBlock {
        source,
        target,
        matrix: SparseExactMatrix::from_triplets(n_rows, src.len(), triplets)?,
    })
}

/// One block per nonempty source slice of positive weight.
pub fn assemble_blocks(g: &GeneratorSet, b: &BigradedBasis) -> Result<Vec<DifferentialBlock>> {
    let sources: Vec<Bidegree> = b
        .slices
        .iter()
        .filter(|(key, list)| key.1 >= 1 && !list.is_empty())
        .map(|(key, _)| *key)
        .collect();
    sources.par_iter().map(|&s| assemble_one(g, b, s)).collect()
}

/// A basis together with its differential blocks, keyed by source bidegree.
#[derive(Clone, Debug)]
pub struct CeComplex {
    pub basis: BigradedBasis,
    pub blocks: BTreeMap<Bidegree, DifferentialBlock>,
}

impl CeComplex {
    pub fn build(g: &GeneratorSet, k: u32, reduced: bool) -> Result<Self> {
        let full = enumerate_basis(g, k);
        let basis = if reduced {
            reduce_complex(g, &full)?
        } else {
            full
        };
        let blocks = assemble_blocks(g, &basis)?
            .into_iter()
            .map(|b| (b.source, b))
            .collect();
        Ok(Self { basis, blocks })
    }

    pub fn block_from(&self, source: Bidegree) -> Option<&DifferentialBlock> {
        self.blocks.get(&source)
    }

    /// The block landing in `target`.
    pub fn block_into(&self, target: Bidegree) -> Option<&DifferentialBlock> {
        target
            .0
            .checked_sub(1)
            .and_then(|i| self.blocks.get(&(i, target.1 + 1)))
    }

    /// Checks that every composite of consecutive blocks vanishes.
    pub fn check_square_zero(&self) -> Result<()> {
        for (src, first) in &self.blocks {
            if let Some(second) = self.blocks.get(&first.target) {
                if !second.matrix.mul(&first.matrix)?.is_zero() {
                    return Err(Error::NonZeroSquare {
                        degree: src.0,
                        weight: src.1,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, g: &GeneratorSet) -> serde_json::Value {
        let slices: Vec<_> = self
            .basis
            .slices()
            .iter()
            .map(|((i, w), list)| {
                json!({
                    "degree": i,
                    "weight": w,
                    "monomials": list.iter().map(|m| m.name(g)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let blocks: Vec<_> = self
            .blocks
            .values()
            .map(|b| {
                json!({
                    "source": [b.source.0, b.source.1],
                    "target": [b.target.0, b.target.1],
                    "rows": b.matrix.n_rows(),
                    "cols": b.matrix.n_cols(),
                    "entries": b.matrix.entries().iter()
                        .map(|(r, c, v)| json!([r, c, rational::format(v)]))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "ring": g.ring_name,
            "k": self.basis.k(),
            "reduced": self.basis.is_reduced(),
            "slices": slices,
            "blocks": blocks,
        })
    }
}

/// `h(v_{2m}^2 A + B w_{4m-1}) = w_{4m-1} A` on a monomial of the ideal.
fn contracting_homotopy(g: &GeneratorSet, exps: &[u32]) -> Chain {
    let mut out = Chain::new();
    if exps[g.point_w()] >= 1 || exps[g.point_v()] < 2 {
        return out;
    }
    let mut a = exps.to_vec();
    a[g.point_v()] -= 2;
    let mut product = vec![g.point_w()];
    product.extend(factors(&a));
    if let Some((negative, e)) = normalize(g, &product) {
        let c = if negative {
            -Rational::one()
        } else {
            Rational::one()
        };
        add_term(&mut out, e, c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyCheck {
    pub holds: bool,
    /// Number of ideal monomials on which `dh + hd = id` was evaluated.
    pub checked: usize,
    /// Name of the first monomial where the identity fails.
    pub witness: Option<String>,
}

/// Verifies `dh + hd = id` on the ideal `(v_{2m}^2, w_{4m-1})` inside `Omega_k`.
pub fn homotopy_check(g: &GeneratorSet, k: u32) -> Result<HomotopyCheck> {
    if g.cpm.is_none() {
        return Err(Error::UnsupportedMode(format!(
            "the contracting homotopy is stated for CP^m, not {}",
            g.ring_name
        )));
    }
    let basis = enumerate_basis(g, k);
    let mut checked = 0;
    for mono in basis.iter().filter(|m| in_point_ideal(g, &m.exps)) {
        checked += 1;
        let dh = differential_of_chain(g, &contracting_homotopy(g, &mono.exps));
        let mut total = dh;
        for (e, c) in differential_chain(g, &mono.exps) {
            for (he, hc) in contracting_homotopy(g, &e) {
                add_term(&mut total, he, &c * hc);
            }
        }
        let total = prune(total);
        let identity = total.len() == 1 && total.get(&mono.exps).is_some_and(One::is_one);
        if !identity {
            return Ok(HomotopyCheck {
                holds: false,
                checked,
                witness: Some(mono.name(g)),
            });
        }
    }
    Ok(HomotopyCheck {
        holds: true,
        checked,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::build_generators;
    use crate::rational::int;
    use crate::ring::{make_cpm, RingPresentation};

    fn cpm(m: u32) -> GeneratorSet {
        build_generators(&make_cpm(m).unwrap()).unwrap()
    }

    fn mono(g: &GeneratorSet, powers: &[(&str, u32)]) -> Monomial {
        Monomial::from_powers(g, powers).unwrap()
    }

    fn v(i: u32) -> String {
        format!("v_{i}")
    }

    fn w(i: u32) -> String {
        format!("w_{i}")
    }

    fn custom(text: &str) -> GeneratorSet {
        build_generators(&RingPresentation::from_json_str(text).unwrap()).unwrap()
    }

    fn names(g: &GeneratorSet, list: &[Monomial]) -> Vec<String> {
        let mut out: Vec<String> = list.iter().map(|m| m.name(g)).collect();
        out.sort();
        out
    }

    #[test]
    fn cp1_k2_enumeration() {
        let g = cpm(1);
        let b = enumerate_basis(&g, 2);
        assert_eq!(b.len(), 5);
        let weight0: Vec<Monomial> = b.iter().filter(|m| m.weight() == 0).cloned().collect();
        let weight1: Vec<Monomial> = b.iter().filter(|m| m.weight() == 1).cloned().collect();
        assert_eq!(names(&g, &weight0), vec!["v_0 v_2", "v_0^2", "v_2^2"]);
        assert_eq!(names(&g, &weight1), vec!["w_1", "w_3"]);
    }

    #[test]
    fn k0_and_k1() {
        let g = cpm(3);
        let b0 = enumerate_basis(&g, 0);
        assert_eq!(b0.len(), 1);
        let only = b0.iter().next().unwrap();
        assert_eq!((only.degree(), only.weight()), (0, 0));
        assert_eq!(only.name(&g), "1");

        let b1 = enumerate_basis(&g, 1);
        assert_eq!(b1.len(), 4);
        assert!(b1.iter().all(|m| m.weight() == 0 && m.v_length() == 1));
        assert!(assemble_blocks(&g, &b1).unwrap().is_empty());
    }

    #[test]
    fn counting_formula() {
        // dim at weight w for CP^m is C(k-2w+m, m) * C(m+1, w)
        for m in 1..=3u32 {
            let g = cpm(m);
            for k in 0..=9u32 {
                let b = enumerate_basis(&g, k);
                for wt in 0..=k / 2 {
                    let n = b.iter().filter(|x| x.weight() == wt).count() as u128;
                    let want = binomial((k - 2 * wt + m) as u128, m as u128)
                        * binomial(m as u128 + 1, wt as u128);
                    assert_eq!(n, want, "m={m} k={k} w={wt}");
                }
                assert_eq!(b.len() as u128, count_monomials(&g, k));
            }
        }
        let t = custom(include_str!("../../../rings/torus.json"));
        for k in 0..=7 {
            assert_eq!(enumerate_basis(&t, k).len() as u128, count_monomials(&t, k));
        }
    }

    #[test]
    fn d_of_v_is_zero() {
        let g = cpm(3);
        for i in 0..=3 {
            assert!(differential_of_monomial(&g, &mono(&g, &[(&v(2 * i), 1)])).is_empty());
        }
    }

    #[test]
    fn d_of_power_times_w() {
        // d(v_{2m-2}^{k-2} w_{4m-3}) = 2 v_{2m-2}^{k-1} v_{2m}
        for m in 2..=4u32 {
            let g = cpm(m);
            for k in 3..=9u32 {
                let x = mono(&g, &[(&v(2 * m - 2), k - 2), (&w(4 * m - 3), 1)]);
                let dx = differential_of_monomial(&g, &x);
                let y = mono(&g, &[(&v(2 * m - 2), k - 1), (&v(2 * m), 1)]);
                assert_eq!(dx, vec![(y, int(2))], "m={m} k={k}");
            }
        }
    }

    #[test]
    fn d_of_two_ws() {
        // d(w_{4m-5} w_{4m-3}) = (2 v_{2m-4} v_{2m} + v_{2m-2}^2) w_{4m-3} - 2 v_{2m-2} v_{2m} w_{4m-5}
        for m in 2..=4u32 {
            let g = cpm(m);
            let x = mono(&g, &[(&w(4 * m - 5), 1), (&w(4 * m - 3), 1)]);
            let mut got = differential_of_monomial(&g, &x);
            got.sort();
            let mut want = vec![
                (
                    mono(
                        &g,
                        &[(&v(2 * m - 4), 1), (&v(2 * m), 1), (&w(4 * m - 3), 1)],
                    ),
                    int(2),
                ),
                (mono(&g, &[(&v(2 * m - 2), 2), (&w(4 * m - 3), 1)]), int(1)),
                (
                    mono(
                        &g,
                        &[(&v(2 * m - 2), 1), (&v(2 * m), 1), (&w(4 * m - 5), 1)],
                    ),
                    int(-2),
                ),
            ];
            want.sort();
            assert_eq!(got, want, "m={m}");
            let dd = differential_of_chain(
                &g,
                &got.iter()
                    .map(|(m, c)| (m.exps.clone(), c.clone()))
                    .collect(),
            );
            assert!(dd.is_empty());
        }
    }

    #[test]
    fn k2_top_block_for_cp2() {
        let g = cpm(2);
        let c = CeComplex::build(&g, 2, false).unwrap();
        let block = c.block_from((7, 1)).unwrap();
        assert_eq!(block.target, (8, 0));
        assert_eq!(c.basis.slice((7, 1)), &[mono(&g, &[("w_7", 1)])]);
        assert_eq!(c.basis.slice((8, 0)), &[mono(&g, &[("v_4", 2)])]);
        assert_eq!(block.matrix, SparseExactMatrix::from_dense(&[vec![int(1)]]));
    }

    #[test]
    fn square_zero_and_grading() {
        let mut sets = vec![cpm(1), cpm(2), cpm(3)];
        sets.push(custom(include_str!("../../../rings/torus.json")));
        sets.push(custom(include_str!("../../../rings/s2xs2.json")));
        for g in &sets {
            for k in 0..=7 {
                let b = enumerate_basis(g, k);
                for x in b.iter() {
                    for (y, _) in differential_of_monomial(g, x) {
                        assert_eq!(y.degree(), x.degree() + 1);
                        assert_eq!(y.weight() + 1, x.weight());
                        assert_eq!(y.v_length(), x.v_length() + 2);
                    }
                    let dd = differential_of_chain(g, &differential_chain(g, &x.exps));
                    assert!(dd.is_empty(), "{}: d^2({}) != 0", g.ring_name, x.name(g));
                }
                CeComplex::build(g, k, false)
                    .unwrap()
                    .check_square_zero()
                    .unwrap();
            }
        }
    }

    #[test]
    fn ideal_is_stable_under_d() {
        for m in 1..=3 {
            let g = cpm(m);
            for k in 2..=8 {
                for x in enumerate_basis(&g, k).iter() {
                    if in_point_ideal(&g, &x.exps) {
                        for (y, _) in differential_of_monomial(&g, x) {
                            assert!(in_point_ideal(&g, &y.exps));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cp1_k2_reduction() {
        let g = cpm(1);
        let r = reduce_complex(&g, &enumerate_basis(&g, 2)).unwrap();
        let all: Vec<Monomial> = r.iter().cloned().collect();
        assert_eq!(names(&g, &all), vec!["v_0 v_2", "v_0^2", "w_1"]);
        assert!(r.is_reduced());
    }

    #[test]
    fn reduction_rejects_custom_rings() {
        let g = custom(include_str!("../../../rings/cp2.json"));
        let b = enumerate_basis(&g, 3);
        assert!(matches!(
            reduce_complex(&g, &b),
            Err(Error::UnsupportedMode(_))
        ));
        assert!(matches!(
            homotopy_check(&g, 3),
            Err(Error::UnsupportedMode(_))
        ));
    }

    #[test]
    fn reduced_top_monomial() {
        for m in 1..=3u32 {
            let g = cpm(m);
            for k in 4..=9u32 {
                let r = reduce_complex(&g, &enumerate_basis(&g, k)).unwrap();
                assert_eq!(r.top_degree(), Some((2 * m - 2) * k + 3), "m={m} k={k}");
                let want = mono(
                    &g,
                    &[(&v(2 * m - 2), k - 3), (&v(2 * m), 1), (&w(4 * m - 3), 1)],
                );
                let top = r.top_monomials();
                assert_eq!(top, vec![&want]);
                let full = enumerate_basis(&g, k);
                assert!(full.top_degree().unwrap() > r.top_degree().unwrap());
            }
        }
    }

    #[test]
    fn reduced_slice_near_the_top() {
        for m in 2..=3u32 {
            let g = cpm(m);
            for k in 8..=10u32 {
                let r = reduce_complex(&g, &enumerate_basis(&g, k)).unwrap();
                let slice = r.slice(((2 * m - 2) * k + 1, 1));
                let mut want = vec![
                    mono(
                        &g,
                        &[
                            (&v(2 * m - 4), 1),
                            (&v(2 * m - 2), k - 4),
                            (&v(2 * m), 1),
                            (&w(4 * m - 3), 1),
                        ],
                    ),
                    mono(
                        &g,
                        &[(&v(2 * m - 2), k - 3), (&v(2 * m), 1), (&w(4 * m - 5), 1)],
                    ),
                    mono(&g, &[(&v(2 * m - 2), k - 2), (&w(4 * m - 3), 1)]),
                ];
                want.sort_by(|a, b| b.exps.cmp(&a.exps));
                assert_eq!(slice, want.as_slice());
            }
        }
    }

    #[test]
    fn homotopy_small_cases() {
        let g = cpm(2);
        let check = homotopy_check(&g, 2).unwrap();
        assert!(check.holds);
        // ideal part of Omega_2: v_4^2, w_7
        assert_eq!(check.checked, 2);
        let h = contracting_homotopy(&g, &mono(&g, &[("v_4", 2)]).exps);
        assert_eq!(h, Chain::from([(mono(&g, &[("w_7", 1)]).exps, int(1))]));

        assert_eq!(
            homotopy_check(&g, 1).unwrap(),
            HomotopyCheck {
                holds: true,
                checked: 0,
                witness: None
            }
        );
        assert_eq!(homotopy_check(&g, 0).unwrap().checked, 0);

        // B w_7 with B = v_0 v_2: hd(x) = x
        let x = mono(&g, &[("v_0", 1), ("v_2", 1), ("w_7", 1)]);
        assert!(contracting_homotopy(&g, &x.exps).is_empty());
        let mut hd = Chain::new();
        for (e, c) in differential_chain(&g, &x.exps) {
            for (he, hc) in contracting_homotopy(&g, &e) {
                add_term(&mut hd, he, &c * hc);
            }
        }
        assert_eq!(prune(hd), Chain::from([(x.exps.clone(), int(1))]));
        assert!(homotopy_check(&g, 4).unwrap().holds);
    }

    #[test]
    fn normalize_signs() {
        let g = cpm(2);
        let (w3, w5) = (g.find("w_3").unwrap(), g.find("w_5").unwrap());
        let v2 = g.find("v_2").unwrap();
        assert_eq!(normalize(&g, &[w5, w3]).map(|x| x.0), Some(true));
        assert_eq!(normalize(&g, &[w3, v2, w5]).map(|x| x.0), Some(false));
        assert_eq!(normalize(&g, &[w5, v2, w3]).map(|x| x.0), Some(true));
        assert!(normalize(&g, &[w3, v2, w3]).is_none());
    }

    #[test]
    fn json_dump() {
        let g = cpm(1);
        let c = CeComplex::build(&g, 2, false).unwrap();
        let j = c.to_json(&g);
        assert_eq!(j["k"], 2);
        let blocks = j["blocks"].as_array().unwrap();
        // d w_1 = 2 v_0 v_2
        assert!(blocks.iter().any(|b| b["entries"] == json!([[0, 0, "2"]])));
    }
}
