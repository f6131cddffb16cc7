//! Extremal Hilbert functions `k -> dim H^{k(d-2)+i}(C_k(M))`.
//!
//! Quasi-polynomial detection splits a sample sequence by `k mod p` and asks
//! that finite differences of order `deg + 1` vanish on every residue class
//! from some onset `N` on. The search returns the smallest period, then the
//! earliest onset, then the lowest degree. Class polynomials are recovered by
//! exact Newton interpolation.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::homology::{Engine, Mode};
use crate::rational::{self, Rational};

pub const DEFAULT_P_MAX: u32 = 6;
pub const DEFAULT_DEG_MAX: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HilbertRay {
    pub m: u32,
    pub i: u32,
    pub d: u32,
    pub mode: Mode,
    /// `(k, dim H^{k(d-2)+i})` over a contiguous range of `k`.
    pub samples: Vec<(u32, u64)>,
}

impl HilbertRay {
    pub fn degree_at(&self, k: u32) -> u32 {
        k * (self.d - 2) + self.i
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,dim\n");
        for (k, d) in &self.samples {
            writeln!(out, "{k},{d}").unwrap();
        }
        out
    }
}

/// Samples `dim H^{k(d-2)+i}(C_k(M))` for `k` in `k_min..=k_max`.
pub fn hilbert_ray(
    engine: &Engine,
    i: u32,
    k_min: u32,
    k_max: u32,
    mode: Mode,
) -> Result<HilbertRay> {
    if k_min > k_max {
        return Err(Error::InvalidParameter(format!(
            "empty k-range {k_min}..={k_max}"
        )));
    }
    let d = engine.ring().manifold_dimension;
    let samples = (k_min..=k_max)
        .into_par_iter()
        .map(|k| engine.betti(k, mode).map(|t| (k, t.dim(k * (d - 2) + i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(HilbertRay {
        m: d / 2,
        i,
        d,
        mode,
        samples,
    })
}

/// A function of `k` given by one polynomial per residue class `k mod period`,
/// valid for `k >= onset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPolynomial {
    pub period: u32,
    pub onset: u32,
    /// `classes[r]` holds the power-basis coefficients (constant term first)
    /// of the polynomial in `k` used when `k = r mod period`. Trailing zeros
    /// are trimmed; the zero polynomial is empty.
    pub classes: Vec<Vec<Rational>>,
    pub degree: u32,
}

impl QuasiPolynomial {
    pub fn evaluate(&self, k: u32) -> Rational {
        let coeffs = &self.classes[(k % self.period) as usize];
        let x = Rational::from_integer(BigInt::from(k));
        coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * &x + c)
    }

    pub fn is_zero(&self) -> bool {
        self.classes.iter().all(Vec::is_empty)
    }

    /// Whether every sample with `k >= onset` is reproduced exactly.
    pub fn reproduces(&self, samples: &[(u32, u64)]) -> bool {
        samples
            .iter()
            .filter(|(k, _)| *k >= self.onset)
            .all(|(k, v)| self.evaluate(*k) == Rational::from_integer(BigInt::from(*v)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "period": self.period,
            "onset": self.onset,
            "degree": self.degree,
            "classes": self.classes.iter().enumerate().map(|(r, c)| json!({
                "residue": r,
                "coefficients": c.iter().map(rational::format).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn format_poly(coeffs: &[Rational]) -> String {
    if coeffs.is_empty() {
        return "0".to_string();
    }
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(p, c)| match p {
            0 => rational::format(c),
            1 => format!("{} k", rational::format(c)),
            _ => format!("{} k^{p}", rational::format(c)),
        })
        .collect();
    terms.join(" + ")
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "period {}, degree {}, onset k={}:",
            self.period, self.degree, self.onset
        )?;
        let parts: Vec<String> = self
            .classes
            .iter()
            .enumerate()
            .map(|(r, c)| format!("[k = {r} mod {}] {}", self.period, format_poly(c)))
            .collect();
        write!(f, " {}", parts.join("; "))
    }
}

fn vanishing_differences(values: &[Rational], order: usize) -> bool {
    let mut diffs = values.to_vec();
    for _ in 0..order {
        if diffs.len() <= 1 {
            return true;
        }
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    diffs.iter().all(Zero::is_zero)
}

/// Newton interpolation through `(x_j, y_j)`, returned in the power basis.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let mut coef = ys.to_vec();
    for level in 1..n {
        for j in (level..n).rev() {
            coef[j] = (&coef[j] - &coef[j - 1]) / (&xs[j] - &xs[j - level]);
        }
    }
    // Horner-style expansion of sum_j coef_j prod_{l<j} (k - x_l)
    let mut poly: Vec<Rational> = Vec::new();
    for j in (0..n).rev() {
        // poly = poly * (k - x_j) + coef_j
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (p, c) in poly.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= c * &xs[j];
        }
        next[0] += &coef[j];
        poly = next;
    }
    while poly.last().is_some_and(Zero::is_zero) {
        poly.pop();
    }
    poly
}

/// Searches for a quasi-polynomial with period `<= p_max` and degree `<= deg_max`.
///
/// A candidate `(p, N)` is only considered when every residue class has at
/// least `deg_max + 2` samples at `k >= N`, so every class polynomial is
/// checked on points beyond those determining it and a short tail cannot
/// masquerade as a small period. `Ok(None)` means nothing was found within the
/// bounds.
pub fn detect_quasi_polynomial(
    samples: &[(u32, u64)],
    p_max: u32,
    deg_max: u32,
) -> Result<Option<QuasiPolynomial>> {
    if p_max == 0 {
        return Err(Error::InvalidParameter("p_max must be at least 1".into()));
    }
    let needed = deg_max as usize + 2;
    if samples.len() < needed {
        return Err(Error::UnderDetermined {
            needed,
            available: samples.len(),
        });
    }
    if samples.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::InvalidParameter(
            "samples must cover a contiguous increasing k-range".into(),
        ));
    }
    let values: Vec<Rational> = samples
        .iter()
        .map(|(_, v)| Rational::from_integer(BigInt::from(*v)))
        .collect();

    for p in 1..=p_max as usize {
        for start in 0..samples.len() {
            // residue classes from `start` on, each as a list of sample positions
            let classes: Vec<Vec<usize>> = (0..p)
                .map(|r| (start + r..samples.len()).step_by(p).collect())
                .collect();
            let shortest = classes.iter().map(Vec::len).min().unwrap_or(0);
            if shortest < needed {
                break;
            }
            for deg in 0..=deg_max as usize {
                let fits = classes.iter().all(|pos| {
                    let ys: Vec<Rational> = pos.iter().map(|&j| values[j].clone()).collect();
                    vanishing_differences(&ys, deg + 1)
                });
                if !fits {
                    continue;
                }
                let onset = samples[start].0;
                let mut polys = vec![Vec::new(); p];
                let mut degree = 0;
                for pos in &classes {
                    let head = &pos[..deg + 1];
                    let xs: Vec<Rational> = head
                        .iter()
                        .map(|&j| Rational::from_integer(BigInt::from(samples[j].0)))
                        .collect();
                    let ys: Vec<Rational> = head.iter().map(|&j| values[j].clone()).collect();
                    let poly = interpolate(&xs, &ys);
                    degree = degree.max(poly.len().saturating_sub(1) as u32);
                    polys[(samples[pos[0]].0 as usize) % p] = poly;
                }
                let q = QuasiPolynomial {
                    period: p as u32,
                    onset,
                    classes: polys,
                    degree,
                };
                debug_assert!(q.reproduces(samples));
                return Ok(Some(q));
            }
        }
    }
    Ok(None)
}

// ---- vanishing-range verification ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// The stated range holds and nothing earlier was observed.
    Pass,
    /// The stated range holds and the behavior already starts earlier.
    Sharper,
    Fail,
    /// Reported without a claim attached.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Sharper => "SHARPER",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub id: String,
    pub statement: String,
    pub claimed_range: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_onset: Option<u32>,
    pub detail: String,
}

/// Rank facts about the reduced complex near its top degree, for `m >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralFacts {
    pub m: u32,
    pub k: u32,
    /// `dim` of the reduced slice at `(k(2m-2)+3, 1)`.
    pub top_slice_dim: usize,
    /// `dim` of the reduced slice at `(k(2m-2)+2, 2)`.
    pub top_source_dim: usize,
    /// Rank of `(k(2m-2)+2, 2) -> (k(2m-2)+3, 1)`.
    pub top_rank: usize,
    /// `dim` of the reduced slice at `(k(2m-2)+1, 1)`.
    pub middle_dim: usize,
    /// Rank and kernel of `(k(2m-2)+1, 1) -> (k(2m-2)+2, 0)`.
    pub middle_rank: usize,
    pub middle_kernel: usize,
    /// Rank of `(k(2m-2), 2) -> (k(2m-2)+1, 1)`.
    pub lower_rank: usize,
}

impl StructuralFacts {
    pub fn first_subcomplex_exact(&self) -> bool {
        self.top_slice_dim == 1 && self.top_source_dim == 1 && self.top_rank == 1
    }
}

pub fn structural_facts(engine: &Engine, k: u32) -> Result<StructuralFacts> {
    let m = engine
        .ring()
        .cpm_parameter()
        .ok_or_else(|| Error::UnsupportedMode("structural facts are stated for CP^m".into()))?;
    if m < 2 {
        return Err(Error::InvalidParameter(
            "structural facts need m >= 2".into(),
        ));
    }
    let complex = engine.complex(k, Mode::Reduced)?;
    let base = k * (2 * m - 2);
    let rank_from = |src: (u32, u32)| complex.block_from(src).map_or(0, |b| b.matrix.rank());
    let middle = complex.block_from((base + 1, 1));
    let middle_rank = middle.map_or(0, |b| b.matrix.rank());
    let middle_dim = complex.basis.dim((base + 1, 1));
    Ok(StructuralFacts {
        m,
        k,
        top_slice_dim: complex.basis.dim((base + 3, 1)),
        top_source_dim: complex.basis.dim((base + 2, 2)),
        top_rank: rank_from((base + 2, 2)),
        middle_dim,
        middle_rank,
        middle_kernel: middle_dim - middle_rank,
        lower_rank: rank_from((base, 2)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RayReport {
    pub i: u32,
    pub samples: Vec<(u32, u64)>,
    pub certificate: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub ring: String,
    pub m: u32,
    pub k_min: u32,
    pub k_max: u32,
    pub claims: Vec<Claim>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralFacts>,
    pub rays: Vec<RayReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} (m={}), k in {}..={}\n",
            self.ring, self.m, self.k_min, self.k_max
        );
        for c in &self.claims {
            write!(
                out,
                "[{}] {}: {} ({})",
                c.status, c.id, c.statement, c.claimed_range
            )
            .unwrap();
            if let Some(n) = c.observed_onset {
                write!(out, "; observed from k={n}").unwrap();
            }
            writeln!(out).unwrap();
            if !c.detail.is_empty() {
                writeln!(out, "    {}", c.detail).unwrap();
            }
        }
        for r in &self.rays {
            let values: Vec<String> = r.samples.iter().map(|(_, d)| d.to_string()).collect();
            write!(out, "ray i={}: [{}]", r.i, values.join(", ")).unwrap();
            match &r.certificate {
                Some(c) => writeln!(
                    out,
                    " -> period {}, degree {}, onset k={}",
                    c["period"], c["degree"], c["onset"]
                )
                .unwrap(),
                None => writeln!(out, " -> none within bounds").unwrap(),
            }
        }
        out
    }
}

/// First `k` from which `pred` holds through the end of `samples`.
fn onset_of<T>(samples: &[(u32, T)], pred: impl Fn(&T) -> bool) -> Option<u32> {
    let mut onset = None;
    for (k, v) in samples.iter().rev() {
        if pred(v) {
            onset = Some(*k);
        } else {
            break;
        }
    }
    onset
}

fn range_claim(id: &str, statement: String, bound: u32, k_max: u32, onset: Option<u32>) -> Claim {
    let status = match onset {
        Some(n) if n < bound => Status::Sharper,
        Some(n) if n == bound => Status::Pass,
        _ => Status::Fail,
    };
    let detail = match (status, onset) {
        (Status::Fail, Some(n)) => format!("fails at k={}", n - 1),
        (Status::Fail, None) => format!("fails at k={k_max}"),
        _ => String::new(),
    };
    Claim {
        id: id.to_string(),
        statement,
        claimed_range: format!("k >= {bound}"),
        status,
        observed_onset: onset,
        detail,
    }
}

/// Recomputes the extremal vanishing ranges and the rank facts behind them for
/// `CP^m`, sampling `k` from 2 to `k_max`.
pub fn verify_vanishing_ranges(engine: &Engine, k_max: u32) -> Result<VerifyReport> {
    verify_vanishing_ranges_with(engine, k_max, DEFAULT_P_MAX, DEFAULT_DEG_MAX)
}

/// [`verify_vanishing_ranges`] with explicit quasi-polynomial search bounds.
pub fn verify_vanishing_ranges_with(
    engine: &Engine,
    k_max: u32,
    p_max: u32,
    deg_max: u32,
) -> Result<VerifyReport> {
    let m = engine
        .ring()
        .cpm_parameter()
        .ok_or_else(|| Error::UnsupportedMode("verification runs on built-in CP^m".into()))?;
    if k_max < 8 {
        return Err(Error::InvalidParameter(format!(
            "k_max must be at least 8, got {k_max}"
        )));
    }
    let k_min = 2;
    let slope = 2 * m - 2;
    let tables = (k_min..=k_max)
        .into_par_iter()
        .map(|k| engine.betti(k, Mode::Full).map(|t| (k, t)))
        .collect::<Result<Vec<_>>>()?;
    let mut claims = Vec::new();

    let consistent = (k_min..=k_max)
        .into_par_iter()
        .map(|k| engine.consistency_report(k).map(|r| (k, r.ok())))
        .collect::<Result<Vec<_>>>()?;
    let bad: Vec<u32> = consistent
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(k, _)| *k)
        .collect();
    claims.push(Claim {
        id: "reduced-equals-full".into(),
        statement: "full and reduced complexes have the same cohomology".into(),
        claimed_range: "k >= 2".into(),
        status: if bad.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        observed_onset: None,
        detail: if bad.is_empty() {
            String::new()
        } else {
            format!("differs at k={bad:?}")
        },
    });

    let high: Vec<(u32, bool)> = tables
        .iter()
        .map(|(k, t)| {
            let from = k * slope + 4;
            (*k, (from..=t.top_degree()).all(|deg| t.dim(deg) == 0))
        })
        .collect();
    claims.push(range_claim(
        "vanishing-i>=4",
        format!("dim H^(k*{slope}+i) = 0 for all i >= 4"),
        4,
        k_max,
        onset_of(&high, |ok| *ok),
    ));

    let ray_of = |i: u32| -> Vec<(u32, u64)> {
        tables
            .iter()
            .map(|(k, t)| (*k, t.dim(k * slope + i)))
            .collect()
    };

    if m >= 2 {
        for i in 1..=3 {
            claims.push(range_claim(
                &format!("vanishing-i={i}"),
                format!("dim H^(k*{slope}+{i}) = 0"),
                8,
                k_max,
                onset_of(&ray_of(i), |d| *d == 0),
            ));
        }
    } else {
        for i in 0..=3 {
            let ray = ray_of(i);
            let stable: Vec<(u32, u64)> = ray.iter().filter(|(k, _)| *k > i).copied().collect();
            let constant = stable.windows(2).all(|w| w[0].1 == w[1].1);
            claims.push(Claim {
                id: format!("stable-i={i}"),
                statement: format!("dim H^{i}(C_k) is independent of k"),
                claimed_range: format!("k > {i}"),
                status: if constant { Status::Pass } else { Status::Fail },
                observed_onset: None,
                detail: stable
                    .first()
                    .map(|(_, d)| format!("value {d}"))
                    .unwrap_or_default(),
            });
        }
    }

    let structural = if m >= 2 {
        let f = structural_facts(engine, k_max)?;
        let base = k_max * slope;
        let check = |ok: bool, id: &str, statement: String, detail: String| Claim {
            id: id.to_string(),
            statement,
            claimed_range: format!("k = {k_max}"),
            status: if ok { Status::Pass } else { Status::Fail },
            observed_onset: None,
            detail: if ok { String::new() } else { detail },
        };
        claims.push(check(
            f.first_subcomplex_exact(),
            "top-subcomplex-exact",
            format!(
                "({}, 2) -> ({}, 1) is an isomorphism of lines",
                base + 2,
                base + 3
            ),
            format!(
                "block ({}, 2) -> ({}, 1): source dim {}, target dim {}, rank {}",
                base + 2,
                base + 3,
                f.top_source_dim,
                f.top_slice_dim,
                f.top_rank
            ),
        ));
        claims.push(check(
            f.middle_rank == 1 && f.middle_kernel == 2,
            "middle-block-rank",
            format!(
                "({}, 1) -> ({}, 0) has rank 1 and kernel 2",
                base + 1,
                base + 2
            ),
            format!(
                "block ({}, 1) -> ({}, 0): rank {}, kernel {}",
                base + 1,
                base + 2,
                f.middle_rank,
                f.middle_kernel
            ),
        ));
        claims.push(check(
            f.lower_rank == 2,
            "lower-block-rank",
            format!("({}, 2) -> ({}, 1) has rank 2", base, base + 1),
            format!(
                "block ({base}, 2) -> ({}, 1): rank {}",
                base + 1,
                f.lower_rank
            ),
        ));
        Some(f)
    } else {
        None
    };

    let ray0 = ray_of(0);
    claims.push(Claim {
        id: "ray-i=0".into(),
        statement: format!("dim H^(k*{slope}) reported without a claim"),
        claimed_range: "-".into(),
        status: Status::Info,
        observed_onset: None,
        detail: format!(
            "values {:?}",
            ray0.iter().map(|(_, d)| *d).collect::<Vec<_>>()
        ),
    });

    let rays = (0..=5)
        .map(|i| {
            let samples = ray_of(i);
            let certificate =
                detect_quasi_polynomial(&samples, p_max, deg_max)?.map(|q| q.to_json());
            Ok(RayReport {
                i,
                samples,
                certificate,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(VerifyReport {
        ring: engine.ring().name.clone(),
        m,
        k_min,
        k_max,
        claims,
        structural,
        rays,
    })
}
