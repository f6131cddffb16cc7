//! Betti numbers of `C_k(M)` from the bigraded complex.
//!
//! The differential has pure bidegree `(+1, -1)`, so cohomology splits over
//! `(degree, weight)` slices:
//! `dim H^{i,w} = dim Omega^{i,w} - rank(d out of (i,w)) - rank(d into (i,w))`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{count_monomials, Bidegree, CeComplex};
use crate::error::{Error, Result};
use crate::generators::{build_generators, GeneratorSet};
use crate::ring::{make_cpm, RingPresentation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Reduced,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Reduced => "reduced",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiTable {
    pub k: u32,
    pub ring: String,
    pub mode: Mode,
    /// One entry per degree `0..=top`, zeros included.
    pub dims: BTreeMap<u32, u64>,
    pub euler: i64,
}

impl BettiTable {
    pub fn dim(&self, degree: u32) -> u64 {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn top_degree(&self) -> u32 {
        self.dims.keys().next_back().copied().unwrap_or(0)
    }

    /// Degrees with nonzero Betti number.
    pub fn support(&self) -> BTreeMap<u32, u64> {
        self.dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&i, &d)| (i, d))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,dim\n");
        for (i, d) in &self.dims {
            writeln!(out, "{i},{d}").unwrap();
        }
        out
    }

    /// `homological` only relabels the grading; the numbers agree.
    pub fn to_json(&self, homological: bool) -> serde_json::Value {
        json!({
            "ring": self.ring,
            "k": self.k,
            "mode": self.mode,
            "grading": if homological { "homological" } else { "cohomological" },
            "euler": self.euler,
            "dims": self.dims.iter()
                .map(|(i, d)| json!({"degree": i, "dim": d}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self, homological: bool) -> String {
        let (letter, grading) = if homological {
            ("H_", "homological")
        } else {
            ("H^", "cohomological")
        };
        let mut out = format!(
            "{} k={} mode={} ({grading} degree), euler={}\n",
            self.ring, self.k, self.mode, self.euler
        );
        for (i, d) in &self.dims {
            writeln!(out, "  {letter}{i} = {d}").unwrap();
        }
        out
    }
}

/// Owns a ring and memoizes complexes per `(k, mode)`.
#[derive(Debug)]
pub struct Engine {
    ring: RingPresentation,
    generators: GeneratorSet,
    max_monomials: Option<u128>,
    cache: Mutex<HashMap<(u32, Mode), Arc<CeComplex>>>,
}

impl Engine {
    pub fn new(ring: RingPresentation) -> Result<Self> {
        let generators = build_generators(&ring)?;
        Ok(Self {
            ring,
            generators,
            max_monomials: None,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn cpm(m: u32) -> Result<Self> {
        Self::new(make_cpm(m)?)
    }

    /// Refuse complexes with more than `cap` monomials.
    pub fn with_max_monomials(mut self, cap: u128) -> Self {
        self.max_monomials = Some(cap);
        self
    }

    pub fn ring(&self) -> &RingPresentation {
        &self.ring
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    fn check_mode(&self, k: u32, mode: Mode) -> Result<()> {
        if mode == Mode::Reduced {
            if self.ring.cpm_parameter().is_none() {
                return Err(Error::UnsupportedMode(format!(
                    "reduced mode needs a built-in CP^m ring, got {}",
                    self.ring.name
                )));
            }
            if k < 2 {
                return Err(Error::InvalidParameter(format!(
                    "reduced mode needs k >= 2, got k = {k}"
                )));
            }
        }
        Ok(())
    }

    /// The complex for `(k, mode)`, built once and verified to square to zero.
    pub fn complex(&self, k: u32, mode: Mode) -> Result<Arc<CeComplex>> {
        self.check_mode(k, mode)?;
        if let Some(c) = self.cache.lock().unwrap().get(&(k, mode)) {
            return Ok(Arc::clone(c));
        }
        if let Some(cap) = self.max_monomials {
            let n = count_monomials(&self.generators, k);
            if n > cap {
                return Err(Error::TooLarge { monomials: n, cap });
            }
        }
        let complex = CeComplex::build(&self.generators, k, mode == Mode::Reduced)?;
        complex.check_square_zero()?;
        let complex = Arc::new(complex);
        self.cache
            .lock()
            .unwrap()
            .entry((k, mode))
            .or_insert_with(|| Arc::clone(&complex));
        Ok(complex)
    }

    /// Ranks of every block, keyed by source bidegree.
    pub fn block_ranks(&self, k: u32, mode: Mode) -> Result<BTreeMap<Bidegree, usize>> {
        let complex = self.complex(k, mode)?;
        Ok(complex
            .blocks
            .par_iter()
            .map(|(key, b)| (*key, b.matrix.rank()))
            .collect::<Vec<_>>()
            .into_iter()
            .collect())
    }

    pub fn betti(&self, k: u32, mode: Mode) -> Result<BettiTable> {
        let complex = self.complex(k, mode)?;
        let ranks = self.block_ranks(k, mode)?;
        let top = complex.basis.top_degree().unwrap_or(0);
        let mut dims: BTreeMap<u32, u64> = (0..=top).map(|i| (i, 0)).collect();
        for (&(i, w), list) in complex.basis.slices() {
            let out = ranks.get(&(i, w)).copied().unwrap_or(0);
            let inn = i
                .checked_sub(1)
                .and_then(|j| ranks.get(&(j, w + 1)))
                .copied()
                .unwrap_or(0);
            let h = list.len() - out - inn;
            *dims.get_mut(&i).expect("degree within range") += h as u64;
        }
        let euler = dims
            .iter()
            .map(|(i, d)| if i % 2 == 0 { *d as i64 } else { -(*d as i64) })
            .sum();
        Ok(BettiTable {
            k,
            ring: self.ring.name.clone(),
            mode,
            dims,
            euler,
        })
    }

    pub fn consistency_report(&self, k: u32) -> Result<ConsistencyReport> {
        let full = self.betti(k, Mode::Full)?;
        let reduced = self.betti(k, Mode::Reduced)?;
        let chain_euler_full = self.complex(k, Mode::Full)?.basis.chain_euler();
        let chain_euler_reduced = self.complex(k, Mode::Reduced)?.basis.chain_euler();
        let top = full.top_degree().max(reduced.top_degree());
        let first_discrepancy = (0..=top).find(|&i| full.dim(i) != reduced.dim(i));
        Ok(ConsistencyReport {
            k,
            chain_euler_full,
            chain_euler_reduced,
            first_discrepancy,
            full,
            reduced,
        })
    }
}

/// Full and reduced tables side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub k: u32,
    pub full: BettiTable,
    pub reduced: BettiTable,
    pub chain_euler_full: i64,
    pub chain_euler_reduced: i64,
    pub first_discrepancy: Option<u32>,
}

impl ConsistencyReport {
    pub fn euler_consistent(&self) -> bool {
        self.chain_euler_full == self.full.euler && self.chain_euler_reduced == self.reduced.euler
    }

    pub fn ok(&self) -> bool {
        self.first_discrepancy.is_none() && self.euler_consistent()
    }

    pub fn into_result(self) -> Result<Self> {
        if let Some(i) = self.first_discrepancy {
            return Err(Error::ClaimFailed(format!(
                "k={}: full and reduced complexes differ in degree {i} ({} vs {})",
                self.k,
                self.full.dim(i),
                self.reduced.dim(i)
            )));
        }
        if !self.euler_consistent() {
            return Err(Error::ClaimFailed(format!(
                "k={}: chain-level and homology Euler characteristics differ",
                self.k
            )));
        }
        Ok(self)
    }
}

pub fn betti(r: &RingPresentation, k: u32, mode: Mode) -> Result<BettiTable> {
    Engine::new(r.clone())?.betti(k, mode)
}

pub fn consistency_report(r: &RingPresentation, k: u32) -> Result<ConsistencyReport> {
    Engine::new(r.clone())?.consistency_report(k)
}
