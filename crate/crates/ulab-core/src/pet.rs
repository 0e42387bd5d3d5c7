//! Symbolic van der Corput (PET) induction for polynomial progressions.
//!
//! The engine works with vector-valued polynomials in `Z[n, h_1, ..., h_k]^D`.
//! Starting from the displacement family of a progression, repeated
//! difference-and-shift steps reduce every member to a polynomial linear in
//! `n`; the linear coefficients then yield the directions of a box norm
//! that controls the original progression average.  The module also carries
//! the structural audit for those directions, a direction-extraction rule
//! that reads the box-norm data straight off the input family, the type
//! tuples used to organize repeated direction vectors, and a numerical
//! verifier for the resulting inequality.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::counting::{cost_cap, counting_operator, CountError, ProgressionConfig};
use crate::csum::CSum;
use crate::field::{FieldConfig, FieldError, FpPoint, GroupFunction};
use crate::norms::{box_norm_power, DirectionSpec, NormError};
use crate::tol;

#[derive(Debug, Error)]
pub enum PetError {
    #[error("integer overflow in polynomial arithmetic")]
    Overflow,
    #[error("mismatched polynomial shapes")]
    ShapeMismatch,
    #[error("index {0} out of range 1..={1}")]
    OutOfRange(usize, usize),
    #[error("pivot member is constant in n")]
    ConstantPivot,
    #[error("family collapsed")]
    FamilyCollapsed,
    #[error("family is not nice")]
    NotNice,
    #[error("not essentially distinct")]
    NotEssentiallyDistinct,
    #[error("maximum step count {0} exceeded")]
    MaxStepsExceeded(usize),
    #[error("distinguished member lost during reduction")]
    TargetProvenanceLost,
    #[error("reduction weight did not decrease at step {0}")]
    WeightNotDecreasing(usize),
    #[error("index {0} outside the support of the tuple")]
    IndexOutsideSupport(usize),
    #[error("direction evaluates to the zero vector")]
    ZeroDirection,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Count(#[from] CountError),
}

fn checked_add(a: i64, b: i64) -> Result<i64, PetError> {
    a.checked_add(b).ok_or(PetError::Overflow)
}

fn checked_mul(a: i64, b: i64) -> Result<i64, PetError> {
    a.checked_mul(b).ok_or(PetError::Overflow)
}

/// A polynomial in `Z[n, h_1, ..., h_k]^D`: exponent keys are laid out as
/// `[e_n, e_{h_1}, ..., e_{h_k}]` and map to vector coefficients in `Z^D`.
/// Zero coefficients are never stored, so structural equality is semantic
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultiPoly {
    dimension: usize,
    vars: usize,
    terms: BTreeMap<Vec<u32>, Vec<i64>>,
}

impl MultiPoly {
    pub fn zero(dimension: usize, vars: usize) -> Self {
        Self {
            dimension,
            vars,
            terms: BTreeMap::new(),
        }
    }

    /// Build from `(exponents, coefficient)` pairs; repeated exponents
    /// accumulate.
    pub fn from_terms(
        dimension: usize,
        vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Vec<i64>)>,
    ) -> Result<Self, PetError> {
        let mut poly = Self::zero(dimension, vars);
        for (key, coeff) in terms {
            poly.add_term(&key, &coeff)?;
        }
        Ok(poly)
    }

    /// The displacement polynomial `p(n) * v` as an element of `Z[n]^D`.
    pub fn scalar_poly_times_vector(coeffs: &[i64], vector: &[i64]) -> Result<Self, PetError> {
        let mut poly = Self::zero(vector.len(), 1);
        for (i, &c) in coeffs.iter().enumerate() {
            let term: Vec<i64> = vector
                .iter()
                .map(|&v| checked_mul(c, v))
                .collect::<Result<_, _>>()?;
            poly.add_term(&[i as u32], &term)?;
        }
        Ok(poly)
    }

    fn add_term(&mut self, key: &[u32], coeff: &[i64]) -> Result<(), PetError> {
        if key.len() != self.vars || coeff.len() != self.dimension {
            return Err(PetError::ShapeMismatch);
        }
        let entry = self
            .terms
            .entry(key.to_vec())
            .or_insert_with(|| vec![0; self.dimension]);
        for (e, &c) in entry.iter_mut().zip(coeff) {
            *e = checked_add(*e, c)?;
        }
        if entry.iter().all(|&c| c == 0) {
            self.terms.remove(key);
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of variables including `n` (so `vars - 1` shift variables).
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Vec<i64>)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Result<Self, PetError> {
        if self.dimension != other.dimension || self.vars != other.vars {
            return Err(PetError::ShapeMismatch);
        }
        let mut out = self.clone();
        for (key, coeff) in &other.terms {
            out.add_term(key, coeff)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<Self, PetError> {
        let mut out = Self::zero(self.dimension, self.vars);
        for (key, coeff) in &self.terms {
            let negated: Vec<i64> = coeff
                .iter()
                .map(|&c| c.checked_neg().ok_or(PetError::Overflow))
                .collect::<Result<_, _>>()?;
            out.add_term(key, &negated)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PetError> {
        self.add(&other.neg()?)
    }

    /// Product of two scalar-valued polynomials (dimension 1 only).
    pub fn mul(&self, other: &Self) -> Result<Self, PetError> {
        if self.dimension != 1 || other.dimension != 1 || self.vars != other.vars {
            return Err(PetError::ShapeMismatch);
        }
        let mut out = Self::zero(1, self.vars);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let key: Vec<u32> = k1
                    .iter()
                    .zip(k2)
                    .map(|(a, b)| a.checked_add(*b).ok_or(PetError::Overflow))
                    .collect::<Result<_, _>>()?;
                out.add_term(&key, &[checked_mul(c1[0], c2[0])?])?;
            }
        }
        Ok(out)
    }

    /// Re-express the polynomial with additional trailing shift variables.
    pub fn extend_vars(&self, vars: usize) -> Result<Self, PetError> {
        if vars < self.vars {
            return Err(PetError::ShapeMismatch);
        }
        let mut out = Self::zero(self.dimension, vars);
        for (key, coeff) in &self.terms {
            let mut extended = key.clone();
            extended.resize(vars, 0);
            out.add_term(&extended, coeff)?;
        }
        Ok(out)
    }

    /// Remove the part constant in `n`: `q(n, h) - q(0, h)`.
    pub fn tilde(&self) -> Self {
        let mut out = Self::zero(self.dimension, self.vars);
        for (key, coeff) in &self.terms {
            if key[0] >= 1 {
                out.terms.insert(key.clone(), coeff.clone());
            }
        }
        out
    }

    /// Substitute `n -> n + h_last` where `h_last` is the final variable.
    pub fn shift_n_by_last_var(&self) -> Result<Self, PetError> {
        let mut out = Self::zero(self.dimension, self.vars);
        let last = self.vars - 1;
        for (key, coeff) in &self.terms {
            let e = key[0];
            // (n + h)^e = sum_k C(e, k) n^k h^{e-k}
            let mut binom: i64 = 1;
            for k in (0..=e).rev() {
                let scaled: Vec<i64> = coeff
                    .iter()
                    .map(|&c| checked_mul(c, binom))
                    .collect::<Result<_, _>>()?;
                let mut new_key = key.clone();
                new_key[0] = k;
                new_key[last] += e - k;
                out.add_term(&new_key, &scaled)?;
                if k > 0 {
                    // C(e, k-1) = C(e, k) * k / (e - k + 1)
                    binom = checked_mul(binom, k as i64)? / (e - k + 1) as i64;
                }
            }
        }
        Ok(out)
    }

    /// Highest power of `n` carrying a nonzero coefficient (`None` for the
    /// zero polynomial).
    pub fn n_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k[0]).max()
    }

    /// The coefficient of `n^power` as a polynomial in the shift variables
    /// (with `e_n = 0` in every key).
    pub fn coefficient_of_n(&self, power: u32) -> Self {
        let mut out = Self::zero(self.dimension, self.vars);
        for (key, coeff) in &self.terms {
            if key[0] == power {
                let mut new_key = key.clone();
                new_key[0] = 0;
                out.terms.insert(new_key, coeff.clone());
            }
        }
        out
    }

    /// Coefficient vector at an exact exponent key (zero vector if absent).
    pub fn coefficient_at(&self, key: &[u32]) -> Vec<i64> {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| vec![0; self.dimension])
    }

    /// Evaluate in `F_p^D` at `n` and shift values `hs` (length `vars - 1`).
    pub fn eval(&self, cfg: &FieldConfig, n: u64, hs: &[u64]) -> Result<FpPoint, PetError> {
        if hs.len() != self.vars - 1 || self.dimension != cfg.dimension() {
            return Err(PetError::ShapeMismatch);
        }
        let p = cfg.p();
        let pow = |base: u64, exp: u32| -> u64 {
            let mut acc = 1u64;
            let mut b = base % p;
            let mut e = exp;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % p;
                }
                b = b * b % p;
                e >>= 1;
            }
            acc
        };
        let mut coords = vec![0u64; self.dimension];
        for (key, coeff) in &self.terms {
            let mut scale = pow(n, key[0]);
            for (i, &e) in key[1..].iter().enumerate() {
                scale = scale * pow(hs[i], e) % p;
            }
            for (acc, &c) in coords.iter_mut().zip(coeff) {
                let reduced = (c.rem_euclid(p as i64)) as u64;
                *acc = (*acc + reduced * scale) % p;
            }
        }
        Ok(FpPoint::new(cfg, coords)?)
    }

    /// Deterministic plain-text rendering: terms in canonical key order,
    /// coefficients as integer tuples, e.g. `(1,-1)*n^2 + (2,0)*n*h1`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (key, coeff) in &self.terms {
            let vector = format!(
                "({})",
                coeff
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            let mut factors = vec![vector];
            if key[0] == 1 {
                factors.push("n".to_string());
            } else if key[0] > 1 {
                factors.push(format!("n^{}", key[0]));
            }
            for (i, &e) in key[1..].iter().enumerate() {
                if e == 1 {
                    factors.push(format!("h{}", i + 1));
                } else if e > 1 {
                    factors.push(format!("h{}^{}", i + 1, e));
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

/// An ordered family of displacement polynomials together with the index of
/// the input function each member is attached to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFamily {
    dimension: usize,
    members: Vec<MultiPoly>,
    provenance: Vec<usize>,
    h_count: usize,
}

impl PolyFamily {
    pub fn new(
        members: Vec<MultiPoly>,
        provenance: Vec<usize>,
        h_count: usize,
    ) -> Result<Self, PetError> {
        if members.is_empty() {
            return Err(PetError::FamilyCollapsed);
        }
        if members.len() != provenance.len() {
            return Err(PetError::ShapeMismatch);
        }
        let dimension = members[0].dimension();
        for m in &members {
            if m.dimension() != dimension || m.vars() != h_count + 1 {
                return Err(PetError::ShapeMismatch);
            }
            if m.is_zero() {
                return Err(PetError::ShapeMismatch);
            }
        }
        Ok(Self {
            dimension,
            members,
            provenance,
            h_count,
        })
    }

    pub fn members(&self) -> &[MultiPoly] {
        &self.members
    }

    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    pub fn h_count(&self) -> usize {
        self.h_count
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_n_degree(&self) -> u32 {
        self.members
            .iter()
            .filter_map(|m| m.n_degree())
            .max()
            .unwrap_or(0)
    }

    /// A family is nice when all pairwise member differences are
    /// nonconstant in `n` and the last member attains the maximal
    /// `n`-degree.
    pub fn is_nice(&self) -> bool {
        let k = self.members.len();
        for i in 0..k {
            for j in i + 1..k {
                match self.members[i].sub(&self.members[j]) {
                    Ok(diff) => {
                        if diff.tilde().is_zero() {
                            return false;
                        }
                    }
                    Err(_) => return false,
                }
            }
        }
        let max = self.max_n_degree();
        self.members
            .last()
            .and_then(|m| m.n_degree())
            .map_or(false, |d| d == max)
    }

    /// Reduction weight: per `n`-degree, the number of distinct leading
    /// coefficient polynomials among members of that degree.
    pub fn weight(&self) -> PetWeight {
        let mut classes: BTreeMap<u32, BTreeSet<MultiPoly>> = BTreeMap::new();
        for m in &self.members {
            if let Some(d) = m.n_degree() {
                classes.entry(d).or_default().insert(m.coefficient_of_n(d));
            }
        }
        PetWeight {
            counts: classes.into_iter().map(|(d, set)| (d, set.len())).collect(),
        }
    }

    /// Deterministic multi-line rendering, one member per line.
    pub fn pretty(&self) -> String {
        self.members
            .iter()
            .zip(&self.provenance)
            .enumerate()
            .map(|(i, (m, pv))| format!("q{} [slot {}] = {}", i + 1, pv, m.pretty()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Degree-indexed counts of distinct leading coefficients; ordered by
/// comparing counts from the highest degree downward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetWeight {
    counts: BTreeMap<u32, usize>,
}

impl PetWeight {
    pub fn counts(&self) -> &BTreeMap<u32, usize> {
        &self.counts
    }

    /// Strictly smaller in the top-degree-first lexicographic order.
    pub fn is_strictly_less_than(&self, other: &Self) -> bool {
        let top = self
            .counts
            .keys()
            .chain(other.counts.keys())
            .max()
            .copied()
            .unwrap_or(0);
        for d in (1..=top).rev() {
            let a = self.counts.get(&d).copied().unwrap_or(0);
            let b = other.counts.get(&d).copied().unwrap_or(0);
            if a != b {
                return a < b;
            }
        }
        false
    }
}

/// A progression held in exact integer form: direction vectors in `Z^D`,
/// scalar integer polynomials, and the index map tying each polynomial to
/// its direction.
#[derive(Debug, Clone)]
pub struct SymbolicProgression {
    dimension: usize,
    vectors: Vec<Vec<i64>>,
    polys: Vec<Vec<i64>>,
    eta: Vec<usize>,
}

impl SymbolicProgression {
    pub fn new(
        dimension: usize,
        vectors: Vec<Vec<i64>>,
        polys: Vec<Vec<i64>>,
        eta: Option<Vec<usize>>,
    ) -> Result<Self, PetError> {
        let l = vectors.len();
        if l == 0 || polys.len() != l || dimension == 0 {
            return Err(PetError::ShapeMismatch);
        }
        for v in &vectors {
            if v.len() != dimension {
                return Err(PetError::ShapeMismatch);
            }
            if v.iter().all(|&c| c == 0) {
                return Err(PetError::ZeroDirection);
            }
        }
        for p in &polys {
            if p.iter().skip(1).all(|&c| c == 0) {
                // constant in n: the attached point never moves
                return Err(PetError::ShapeMismatch);
            }
        }
        let eta = eta.unwrap_or_else(|| (1..=l).collect());
        if eta.len() != l || eta.iter().any(|&e| e == 0 || e > l) {
            return Err(PetError::ShapeMismatch);
        }
        Ok(Self {
            dimension,
            vectors,
            polys,
            eta,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty progressions
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    pub fn polys(&self) -> &[Vec<i64>] {
        &self.polys
    }

    pub fn eta(&self) -> &[usize] {
        &self.eta
    }

    /// Largest polynomial degree `d`.
    pub fn max_degree(&self) -> usize {
        self.polys
            .iter()
            .map(|p| p.iter().rposition(|&c| c != 0).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// The vector coefficient of `n^i` in the `j`-th displacement (1-based
    /// `j`; `j = 0` and out-of-range powers give the zero vector).
    pub fn coefficient(&self, j: usize, i: usize) -> Result<Vec<i64>, PetError> {
        if j == 0 {
            return Ok(vec![0; self.dimension]);
        }
        if j > self.len() {
            return Err(PetError::OutOfRange(j, self.len()));
        }
        let a = self.polys[j - 1].get(i).copied().unwrap_or(0);
        self.vectors[self.eta[j - 1] - 1]
            .iter()
            .map(|&v| checked_mul(a, v))
            .collect()
    }

    /// The displacement family `(v_{eta_1} p_1(n), ..., v_{eta_l} p_l(n))`
    /// with provenance `1..=l`.
    pub fn initial_family(&self) -> Result<PolyFamily, PetError> {
        let members = (0..self.len())
            .map(|j| {
                MultiPoly::scalar_poly_times_vector(
                    &self.polys[j],
                    &self.vectors[self.eta[j] - 1],
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        PolyFamily::new(members, (1..=self.len()).collect(), 0)
    }

    /// Reduce into a concrete group for numerical work.
    pub fn to_counting(
        &self,
        cfg: &FieldConfig,
        theorem_mode: bool,
    ) -> Result<ProgressionConfig, PetError> {
        Ok(ProgressionConfig::from_int_vectors(
            cfg,
            &self.vectors,
            self.polys.clone(),
            Some(self.eta.clone()),
            theorem_mode,
        )?)
    }
}

/// One difference-and-shift step: with pivot `m` (1-based), emit for each
/// member `q_j` the centered difference `tilde q_j - tilde q_m` followed by
/// its shifted companion `tilde(T q_j) - tilde q_m` (where `T` substitutes
/// `n -> n + h_new` with a fresh variable), dropping zero polynomials and
/// all later duplicates.  Provenance is inherited from `j`.
pub fn vdc_step(family: &PolyFamily, m: usize) -> Result<PolyFamily, PetError> {
    let k = family.len();
    if m == 0 || m > k {
        return Err(PetError::OutOfRange(m, k));
    }
    let vars = family.h_count() + 2;
    let extended: Vec<MultiPoly> = family
        .members()
        .iter()
        .map(|q| q.extend_vars(vars))
        .collect::<Result<_, _>>()?;
    let pivot = extended[m - 1].tilde();
    if pivot.is_zero() {
        return Err(PetError::ConstantPivot);
    }
    let mut members = Vec::new();
    let mut provenance = Vec::new();
    let mut seen: BTreeSet<MultiPoly> = BTreeSet::new();
    for (j, q) in extended.iter().enumerate() {
        let plain = q.tilde().sub(&pivot)?;
        let shifted = q.shift_n_by_last_var()?.tilde().sub(&pivot)?;
        for cand in [plain, shifted] {
            if cand.is_zero() || !seen.insert(cand.clone()) {
                continue;
            }
            members.push(cand);
            provenance.push(family.provenance()[j]);
        }
    }
    if members.is_empty() {
        return Err(PetError::FamilyCollapsed);
    }
    debug_assert!(members.len() <= 2 * k);
    PolyFamily::new(members, provenance, family.h_count() + 1)
}

/// Pivot choice: members of minimal `n`-degree win, with ties to the
/// lowest index — except that members attached to the distinguished input
/// (provenance `target`) are passed over while any other member is still
/// nonlinear, so the distinguished member is differenced away only when
/// nothing else can make progress.
fn select_pivot(family: &PolyFamily, target: usize) -> usize {
    let nonlinear_elsewhere = family
        .members()
        .iter()
        .zip(family.provenance())
        .any(|(q, &pv)| q.n_degree().unwrap_or(0) >= 2 && pv != target);
    let mut best: Option<(u32, usize)> = None;
    for (i, (q, &pv)) in family
        .members()
        .iter()
        .zip(family.provenance())
        .enumerate()
    {
        if nonlinear_elsewhere && pv == target {
            continue;
        }
        let d = q.n_degree().unwrap_or(0);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    let (_, idx) = best.expect("candidate set is never empty");
    idx + 1
}

/// Outcome of the reduction: the pivot trace, the final linear family, the
/// box-norm direction polynomials, and the weight profile per step.
#[derive(Debug, Clone)]
pub struct PetResult {
    pub m_trace: Vec<usize>,
    pub final_family: PolyFamily,
    pub directions: Vec<MultiPoly>,
    pub s: usize,
    pub s_prime: usize,
    pub weights: Vec<PetWeight>,
}

/// Run the reduction until every member is linear in `n`.  The last member
/// of the final family must carry the distinguished provenance (that of
/// the last input member); the directions are its `n`-coefficient followed
/// by the differences against every other member's `n`-coefficient, in
/// family order.
pub fn pet_run(family: &PolyFamily, max_steps: usize) -> Result<PetResult, PetError> {
    if !family.is_nice() || family.members().iter().any(|m| m.n_degree().is_none()) {
        return Err(PetError::NotNice);
    }
    if family.members().iter().any(|m| m.n_degree() == Some(0)) {
        return Err(PetError::NotNice);
    }
    let target = *family.provenance().last().expect("nonempty family");
    let mut current = family.clone();
    let mut m_trace = Vec::new();
    let mut weights = vec![current.weight()];
    while current.max_n_degree() >= 2 {
        if m_trace.len() >= max_steps {
            return Err(PetError::MaxStepsExceeded(max_steps));
        }
        let m = select_pivot(&current, target);
        let next = vdc_step(&current, m)?;
        let w = next.weight();
        if !w.is_strictly_less_than(weights.last().expect("nonempty trace")) {
            return Err(PetError::WeightNotDecreasing(m_trace.len() + 1));
        }
        if !next.provenance().contains(&target) {
            return Err(PetError::TargetProvenanceLost);
        }
        m_trace.push(m);
        weights.push(w);
        current = next;
    }
    if !current.is_nice() {
        return Err(PetError::NotNice);
    }
    if *current.provenance().last().expect("nonempty family") != target {
        return Err(PetError::TargetProvenanceLost);
    }
    let betas: Vec<MultiPoly> = current
        .members()
        .iter()
        .map(|m| m.coefficient_of_n(1))
        .collect();
    let ref_idx = current.len() - 1;
    let mut directions = vec![betas[ref_idx].clone()];
    for (j, beta) in betas.iter().enumerate() {
        if j == ref_idx {
            continue;
        }
        directions.push(betas[ref_idx].sub(beta)?);
    }
    if directions.iter().any(|c| c.is_zero()) {
        return Err(PetError::ZeroDirection);
    }
    let s = directions.len();
    let s_prime = m_trace.len();
    Ok(PetResult {
        m_trace,
        final_family: current,
        directions,
        s,
        s_prime,
        weights,
    })
}

/// One support class of the direction audit: the shift variables involved
/// and the indices `w` consistent with every monomial in the class.
#[derive(Debug, Clone)]
pub struct AuditClass {
    pub support: Vec<usize>,
    pub valid: Vec<usize>,
}

/// Structural audit of a reduction's directions (see
/// [`pet_coefficient_audit`]).
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub per_direction: Vec<Vec<AuditClass>>,
    pub ok: bool,
}

fn multinomial_c_u(u: &[u32]) -> Result<i64, PetError> {
    // coefficient of n*h^u in (n + h_1 + ... + h_k)^{|u|+1}: (|u|+1)! / prod u_i!
    let total: u32 = u.iter().sum::<u32>() + 1;
    let mut value: i64 = 1;
    for k in 2..=total as i64 {
        value = checked_mul(value, k)?;
    }
    for &e in u {
        for k in 2..=e as i64 {
            value /= k;
        }
    }
    Ok(value)
}

/// Enumerate exponent tuples `u` over `s_prime` variables with `|u| <= cap`.
fn enumerate_exponents(s_prime: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; s_prime]];
    for _ in 0..cap {
        let mut next = Vec::new();
        for u in &out {
            let total: u32 = u.iter().sum();
            if total < cap {
                for i in 0..s_prime {
                    let mut v = u.clone();
                    v[i] += 1;
                    next.push(v);
                }
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    out
}

/// Verify that every direction polynomial has the structural form
///
/// ```text
/// c(h) = sum_{|u| <= d-1} c_u (A_{l, |u|+1} - A_{w, |u|+1}) h^u
/// ```
///
/// where `A_{j,i}` is the vector coefficient of `n^i` in the `j`-th
/// displacement (`A_0 = 0`), `c_u` is the multinomial coefficient of
/// `n h^u` in `(n + h_1 + ... + h_{s'})^{|u|+1}`, and within one direction
/// the index `w` may depend only on the support of `u`.  The search over
/// `w in 0..=l` is exhaustive per support class.
pub fn pet_coefficient_audit_detail(
    result: &PetResult,
    sym: &SymbolicProgression,
) -> Result<AuditReport, PetError> {
    let l = sym.len();
    let d = sym.max_degree() as u32;
    let s_prime = result.s_prime;
    let cap = d.saturating_sub(1);
    let exponents = enumerate_exponents(s_prime, cap);
    let mut classes: BTreeMap<Vec<usize>, Vec<Vec<u32>>> = BTreeMap::new();
    for u in &exponents {
        let support: Vec<usize> = u
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e > 0)
            .map(|(i, _)| i + 1)
            .collect();
        classes.entry(support).or_default().push(u.clone());
    }
    let mut per_direction = Vec::new();
    let mut ok = true;
    for c in &result.directions {
        // any monomial outside the audited range disqualifies the direction
        for (key, _) in c.terms() {
            let u_total: u32 = key[1..].iter().sum();
            if key[0] != 0 || u_total > cap {
                ok = false;
            }
        }
        let mut rows = Vec::new();
        for (support, us) in &classes {
            let mut valid = Vec::new();
            'w: for w in 0..=l {
                for u in us {
                    let cu = multinomial_c_u(u)?;
                    let i = (u.iter().sum::<u32>() + 1) as usize;
                    let a_l = sym.coefficient(l, i)?;
                    let a_w = sym.coefficient(w, i)?;
                    let expected: Vec<i64> = a_l
                        .iter()
                        .zip(&a_w)
                        .map(|(&x, &y)| checked_mul(cu, checked_add(x, -y)?))
                        .collect::<Result<_, _>>()?;
                    let mut key = vec![0u32];
                    key.extend_from_slice(u);
                    if c.coefficient_at(&key) != expected {
                        continue 'w;
                    }
                }
                valid.push(w);
            }
            if valid.is_empty() {
                ok = false;
            }
            rows.push(AuditClass {
                support: support.clone(),
                valid,
            });
        }
        per_direction.push(rows);
    }
    Ok(AuditReport { per_direction, ok })
}

/// Boolean form of [`pet_coefficient_audit_detail`].
pub fn pet_coefficient_audit(
    result: &PetResult,
    sym: &SymbolicProgression,
) -> Result<bool, PetError> {
    Ok(pet_coefficient_audit_detail(result, sym)?.ok)
}

/// The box-norm data extracted directly from the input family: vectors and
/// their common multiplicity.
#[derive(Debug, Clone)]
pub struct ExtractedDirections {
    pub int_vectors: Vec<Vec<i64>>,
    pub points: Vec<FpPoint>,
    pub multiplicity: usize,
}

/// Read the controlling box-norm directions off the progression: for
/// `j = 0, ..., l-1` the vector `A_{l, d_j} - A_{j, d_j}` where `d_j` is
/// the `n`-degree of the difference between the last displacement and the
/// `j`-th (with the zero polynomial at `j = 0`).  The multiplicity is the
/// direction count of the companion reduction.
pub fn extract_directions(
    cfg: &FieldConfig,
    sym: &SymbolicProgression,
    max_steps: usize,
) -> Result<ExtractedDirections, PetError> {
    let l = sym.len();
    let family = sym.initial_family()?;
    // essential distinctness: pairwise differences nonconstant in n
    for i in 0..l {
        for j in i + 1..l {
            if family.members()[i]
                .sub(&family.members()[j])?
                .tilde()
                .is_zero()
            {
                return Err(PetError::NotEssentiallyDistinct);
            }
        }
    }
    for m in family.members() {
        if m.tilde().is_zero() {
            return Err(PetError::NotEssentiallyDistinct);
        }
    }
    let last = family.members()[l - 1].clone();
    let mut int_vectors = Vec::new();
    for j in 0..l {
        let diff = if j == 0 {
            last.clone()
        } else {
            last.sub(&family.members()[j - 1])?
        };
        let d = diff.n_degree().ok_or(PetError::NotEssentiallyDistinct)? as usize;
        if d == 0 {
            return Err(PetError::NotEssentiallyDistinct);
        }
        let a_l = sym.coefficient(l, d)?;
        let a_j = sym.coefficient(j, d)?;
        let dir: Vec<i64> = a_l
            .iter()
            .zip(&a_j)
            .map(|(&x, &y)| checked_add(x, -y))
            .collect::<Result<_, _>>()?;
        if dir.iter().all(|&c| c == 0) {
            return Err(PetError::ZeroDirection);
        }
        int_vectors.push(dir);
    }
    let run = pet_run(&family, max_steps)?;
    let points = int_vectors
        .iter()
        .map(|v| cfg.reduce_int_vec(v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExtractedDirections {
        int_vectors,
        points,
        multiplicity: run.s,
    })
}

/// Multiplicity tuple of a progression: how many of the top-degree
/// displacements are attached to each direction vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTuple {
    w: Vec<u64>,
}

impl TypeTuple {
    pub fn new(w: Vec<u64>) -> Self {
        Self { w }
    }

    pub fn entries(&self) -> &[u64] {
        &self.w
    }

    /// `K`, the number of indices counted.
    pub fn total(&self) -> u64 {
        self.w.iter().sum()
    }

    /// A tuple is basic when a single entry carries all of `K`.
    pub fn is_basic(&self) -> bool {
        let k = self.total();
        k > 0 && self.w.iter().any(|&e| e == k)
    }
}

/// The type of a progression: `w_t` counts the maximal-degree polynomials
/// attached to direction `t`.
pub fn compute_type(sym: &SymbolicProgression) -> TypeTuple {
    let d = sym.max_degree();
    let mut w = vec![0u64; sym.len()];
    for (j, p) in sym.polys().iter().enumerate() {
        let deg = p.iter().rposition(|&c| c != 0).unwrap_or(0);
        if deg == d {
            w[sym.eta()[j] - 1] += 1;
        }
    }
    TypeTuple::new(w)
}

/// Move one unit of multiplicity from position `m` to position `i`
/// (1-based); `m` must lie in the support and differ from `i`.
pub fn sigma(t: &TypeTuple, m: usize, i: usize) -> Result<TypeTuple, PetError> {
    let w = t.entries();
    if m == 0 || m > w.len() || i == 0 || i > w.len() || m == i {
        return Err(PetError::OutOfRange(m.max(i), w.len()));
    }
    if w[m - 1] == 0 {
        return Err(PetError::IndexOutsideSupport(m));
    }
    let mut out = w.to_vec();
    out[m - 1] -= 1;
    out[i - 1] += 1;
    Ok(TypeTuple::new(out))
}

/// Strict order on types: `a < b` iff `a` is reachable from `b` by moves
/// `sigma(m, i)` applied only when `w_m <= w_i` (each such move strictly
/// increases the sum of squares, so the search terminates).
pub fn type_less(a: &TypeTuple, b: &TypeTuple) -> bool {
    if a.entries().len() != b.entries().len() || a.total() != b.total() {
        return false;
    }
    if a == b {
        return false;
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(b.entries().to_vec());
    queue.push_back(b.clone());
    while let Some(t) = queue.pop_front() {
        let w = t.entries();
        for m in 1..=w.len() {
            if w[m - 1] == 0 {
                continue;
            }
            for i in 1..=w.len() {
                if i == m || w[m - 1] > w[i - 1] {
                    continue;
                }
                let next = sigma(&t, m, i).expect("move validated");
                if next == *a {
                    return true;
                }
                if seen.insert(next.entries().to_vec()) {
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// Report of [`pet_bound_check`].
#[derive(Debug, Clone, Copy)]
pub struct PetBoundReport {
    /// `|Lambda|^{2^{s'}}`.
    pub lhs: f64,
    /// Average over shift tuples of the evaluated box-norm power.
    pub rhs: f64,
    pub s: usize,
    pub s_prime: usize,
    pub ok: bool,
}

/// Numerically verify the reduction's inequality on a concrete group:
///
/// ```text
/// |E_{x,n} f_0(x) f_1(x + q_1(n)) ... f_l(x + q_l(n))|^{2^{s'}}
///     <= E_{h in F_p^{s'}} ||f_l||_{c_1(h), ..., c_s(h)}^{2^s}
/// ```
///
/// A direction evaluating to the zero vector contributes the trivial
/// subgroup (its difference average degenerates to the identity shift).
pub fn pet_bound_check(
    cfg: &FieldConfig,
    sym: &SymbolicProgression,
    fs: &[GroupFunction],
    max_steps: usize,
) -> Result<PetBoundReport, PetError> {
    let run = pet_run(&sym.initial_family()?, max_steps)?;
    if run.s_prime >= 30 || run.s >= 30 {
        return Err(PetError::MaxStepsExceeded(max_steps));
    }
    let p = cfg.p();
    let order = cfg.order() as u128;
    let tuples = (p as u128).pow(run.s_prime as u32);
    let estimate = tuples * order * (p as u128).pow(run.s as u32)
        + order * p as u128 * (sym.len() as u128 + 1);
    if estimate > cost_cap() as u128 {
        return Err(PetError::Count(CountError::CostCap {
            estimate,
            cap: cost_cap(),
        }));
    }
    let pc = sym.to_counting(cfg, false)?;
    let lambda = counting_operator(&pc, fs)?;
    let lhs = lambda.norm().powi(1 << run.s_prime);
    let f_last = &fs[sym.len()];
    let mut acc = CSum::new();
    let tuple_count = (p as usize).pow(run.s_prime as u32);
    let mut hs = vec![0u64; run.s_prime];
    for mut t in 0..tuple_count {
        for h in hs.iter_mut() {
            *h = (t % p as usize) as u64;
            t /= p as usize;
        }
        let dirs: Vec<FpPoint> = run
            .directions
            .iter()
            .map(|c| c.eval(cfg, 0, &hs))
            .collect::<Result<_, _>>()?;
        let spec = DirectionSpec::from_vectors(cfg, &dirs)?;
        acc.add_real(box_norm_power(f_last, &spec)?);
    }
    let rhs = acc.mean().re;
    Ok(PetBoundReport {
        lhs,
        rhs,
        s: run.s,
        s_prime: run.s_prime,
        ok: lhs <= rhs + tol::INEQUALITY_SLACK,
    })
}
