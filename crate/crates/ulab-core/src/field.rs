//! The ambient group `F_p^D`: configuration, points, subgroups, bounded
//! complex functions, and conditional expectation over subgroup cosets.
//!
//! Points are addressed by a little-endian mixed-radix index: the point
//! `(x_1, ..., x_D)` has index `x_1 + x_2 p + ... + x_D p^{D-1}`, so
//! coordinate 1 is the least significant digit.  All enumeration orders in
//! the crate derive from this indexing or from the lexicographic order on
//! coordinate tuples; both are fixed and documented where used.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::csum::CSum;
use crate::tol;

/// Hard ceiling on the enumerable group order.  Keeps accidental
/// configuration mistakes from attempting astronomically large loops.
pub const MAX_ORDER: usize = 1 << 32;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("group order {p}^{d} exceeds the enumerable limit")]
    OrderTooLarge { p: u64, d: usize },
    #[error("mismatched group configurations")]
    MismatchedConfig,
    #[error("value table has length {got}, expected group order {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("sup bound {0} is not a finite nonnegative number")]
    BadSupBound(f64),
    #[error("function value at index {index} has modulus {modulus} exceeding sup bound {bound}")]
    SupBoundViolated {
        index: usize,
        modulus: f64,
        bound: f64,
    },
    #[error("density {0} outside [0, 1]")]
    DensityOutOfRange(f64),
    #[error("coefficient shape does not match dimension {expected}")]
    BadShape { expected: usize },
    #[error("nonzero integer vector {0:?} reduces to zero mod {1}")]
    VanishesModP(Vec<i64>, u64),
    #[error("coordinate {0} is not reduced mod {1}")]
    CoordinateOutOfRange(u64, u64),
    #[error("subgroup element set is not closed under addition")]
    NotClosed,
}

/// Deterministic trial-division primality test; exact for all `u64` inputs
/// at the desk scales this crate targets (and correct in general, just slow
/// for very large inputs).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The ambient group `F_p^D` with its point indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldConfig {
    p: u64,
    dimension: usize,
    order: usize,
}

impl FieldConfig {
    pub fn new(p: u64, dimension: usize) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if dimension == 0 {
            return Err(FieldError::ZeroDimension);
        }
        let mut order: u128 = 1;
        for _ in 0..dimension {
            order *= p as u128;
            if order > MAX_ORDER as u128 {
                return Err(FieldError::OrderTooLarge { p, d: dimension });
            }
        }
        Ok(Self {
            p,
            dimension,
            order: order as usize,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Total number of points `p^D`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Little-endian mixed-radix index of a point.
    pub fn index_of(&self, point: &FpPoint) -> usize {
        debug_assert_eq!(point.coords.len(), self.dimension);
        let mut idx = 0usize;
        for &c in point.coords.iter().rev() {
            idx = idx * self.p as usize + c as usize;
        }
        idx
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn point_of(&self, mut index: usize) -> FpPoint {
        debug_assert!(index < self.order);
        let mut coords = Vec::with_capacity(self.dimension);
        for _ in 0..self.dimension {
            coords.push((index % self.p as usize) as u64);
            index /= self.p as usize;
        }
        FpPoint { coords }
    }

    /// Pointwise sum of two point indices.
    #[inline]
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let p = self.p as usize;
        let mut out = 0usize;
        let mut mult = 1usize;
        let (mut a, mut b) = (a, b);
        for _ in 0..self.dimension {
            let digit = (a % p + b % p) % p;
            out += digit * mult;
            mult *= p;
            a /= p;
            b /= p;
        }
        out
    }

    /// Additive inverse of a point index.
    #[inline]
    pub fn neg_index(&self, a: usize) -> usize {
        let p = self.p as usize;
        let mut out = 0usize;
        let mut mult = 1usize;
        let mut a = a;
        for _ in 0..self.dimension {
            let digit = (p - a % p) % p;
            out += digit * mult;
            mult *= p;
            a /= p;
        }
        out
    }

    /// `a - b` on point indices.
    #[inline]
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        self.add_index(a, self.neg_index(b))
    }

    /// `c * a` on point indices, `c` an arbitrary integer residue.
    #[inline]
    pub fn scale_index(&self, a: usize, c: u64) -> usize {
        let p = self.p as usize;
        let c = (c % self.p) as usize;
        let mut out = 0usize;
        let mut mult = 1usize;
        let mut a = a;
        for _ in 0..self.dimension {
            let digit = (a % p * c) % p;
            out += digit * mult;
            mult *= p;
            a /= p;
        }
        out
    }

    /// Translation table `t[i] = index(point(i) + point(h))`.
    pub fn translation_table(&self, h: usize) -> Vec<usize> {
        (0..self.order).map(|i| self.add_index(i, h)).collect()
    }

    /// Point indices enumerated in lexicographic order of coordinate
    /// tuples (first coordinate most significant).
    pub fn indices_lex(&self) -> Vec<usize> {
        let mut coords = vec![0u64; self.dimension];
        let mut out = Vec::with_capacity(self.order);
        loop {
            out.push(self.index_of(&FpPoint {
                coords: coords.clone(),
            }));
            // odometer on the last coordinate = lexicographic successor
            let mut pos = self.dimension;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                coords[pos] += 1;
                if coords[pos] < self.p {
                    break;
                }
                coords[pos] = 0;
            }
        }
    }

    /// The additive character `r -> exp(2 pi i r / p)`, accepting any
    /// integer representative.
    pub fn ep(&self, r: i64) -> Complex64 {
        let p = self.p as i64;
        let r = r.rem_euclid(p);
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / self.p as f64)
    }

    /// Table of the `p` values of [`ep`](Self::ep) for hot loops.
    pub fn root_table(&self) -> Vec<Complex64> {
        (0..self.p as i64).map(|r| self.ep(r)).collect()
    }

    /// Reduce an integer vector mod `p` to a point.
    pub fn reduce_int_vec(&self, v: &[i64]) -> Result<FpPoint, FieldError> {
        if v.len() != self.dimension {
            return Err(FieldError::BadShape {
                expected: self.dimension,
            });
        }
        let p = self.p as i64;
        Ok(FpPoint {
            coords: v.iter().map(|&c| c.rem_euclid(p) as u64).collect(),
        })
    }

    /// Like [`reduce_int_vec`](Self::reduce_int_vec) but rejects the
    /// degenerate case of a nonzero integer vector collapsing to zero mod
    /// `p`: small moduli can silently destroy directions that are honest
    /// over the integers, and callers that extract direction vectors must
    /// surface that instead of continuing with a trivial subgroup.
    pub fn reduce_nonzero_int_vec(&self, v: &[i64]) -> Result<FpPoint, FieldError> {
        let reduced = self.reduce_int_vec(v)?;
        if v.iter().any(|&c| c != 0) && reduced.is_zero() {
            return Err(FieldError::VanishesModP(v.to_vec(), self.p));
        }
        Ok(reduced)
    }
}

/// A point of `F_p^D`, stored as reduced coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoint {
    coords: Vec<u64>,
}

impl FpPoint {
    pub fn new(cfg: &FieldConfig, coords: Vec<u64>) -> Result<Self, FieldError> {
        if coords.len() != cfg.dimension {
            return Err(FieldError::BadShape {
                expected: cfg.dimension,
            });
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= cfg.p) {
            return Err(FieldError::CoordinateOutOfRange(bad, cfg.p));
        }
        Ok(Self { coords })
    }

    pub fn zero(cfg: &FieldConfig) -> Self {
        Self {
            coords: vec![0; cfg.dimension],
        }
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// Integer-coefficient polynomial `n -> c_0 + c_1 n + ... + c_d n^d` with
/// vector coefficients `c_k` in `Z^D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVecPoly {
    dimension: usize,
    /// `coeffs[k]` is the coefficient vector of `n^k`.
    coeffs: Vec<Vec<i64>>,
}

impl IntVecPoly {
    pub fn new(dimension: usize, coeffs: Vec<Vec<i64>>) -> Result<Self, FieldError> {
        if coeffs.iter().any(|c| c.len() != dimension) {
            return Err(FieldError::BadShape {
                expected: dimension,
            });
        }
        Ok(Self { dimension, coeffs })
    }

    /// Scalar polynomial times a fixed integer vector.
    pub fn scalar_times_vector(scalar_coeffs: &[i64], vector: &[i64]) -> Self {
        Self {
            dimension: vector.len(),
            coeffs: scalar_coeffs
                .iter()
                .map(|&a| vector.iter().map(|&v| a * v).collect())
                .collect(),
        }
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            coeffs: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    /// Degree over the integers, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| c.iter().any(|&x| x != 0))
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Coefficient vector of `n^k` (zero vector when absent).
    pub fn coeff(&self, k: usize) -> Vec<i64> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| vec![0; self.dimension])
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        if self.dimension != other.dimension {
            return Err(FieldError::BadShape {
                expected: self.dimension,
            });
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            let a = self.coeff(k);
            let b = other.coeff(k);
            coeffs.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
        }
        Ok(Self {
            dimension: self.dimension,
            coeffs,
        })
    }
}

/// Horner evaluation of an integer vector polynomial at the residue `n`,
/// reduced into the group.
pub fn eval_vec_poly(cfg: &FieldConfig, poly: &IntVecPoly, n: u64) -> Result<FpPoint, FieldError> {
    if poly.dimension != cfg.dimension {
        return Err(FieldError::BadShape {
            expected: cfg.dimension,
        });
    }
    let p = cfg.p as i128;
    let n = (n % cfg.p) as i128;
    let mut coords = vec![0u64; cfg.dimension];
    for (slot, coord) in coords.iter_mut().enumerate() {
        let mut acc: i128 = 0;
        for k in (0..poly.coeffs.len()).rev() {
            acc = (acc * n + poly.coeffs[k][slot] as i128).rem_euclid(p);
        }
        *coord = acc as u64;
    }
    Ok(FpPoint { coords })
}

/// A subgroup of `F_p^D`, stored as the sorted list of its point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    cfg: FieldConfig,
    elements: Vec<usize>,
}

impl Subgroup {
    /// Construct from an explicit element list, verifying the subgroup
    /// axioms (contains zero, closed under addition, order a power of p).
    pub fn from_elements(cfg: &FieldConfig, mut elements: Vec<usize>) -> Result<Self, FieldError> {
        elements.sort_unstable();
        elements.dedup();
        if elements.binary_search(&0).is_err() {
            return Err(FieldError::NotClosed);
        }
        let mut member = vec![false; cfg.order()];
        for &e in &elements {
            if e >= cfg.order() {
                return Err(FieldError::WrongLength {
                    got: e,
                    expected: cfg.order(),
                });
            }
            member[e] = true;
        }
        for &a in &elements {
            for &b in &elements {
                if !member[cfg.add_index(a, b)] {
                    return Err(FieldError::NotClosed);
                }
            }
        }
        let mut n = elements.len();
        while n % cfg.p as usize == 0 {
            n /= cfg.p as usize;
        }
        if n != 1 {
            return Err(FieldError::NotClosed);
        }
        Ok(Self {
            cfg: cfg.clone(),
            elements,
        })
    }

    /// The trivial subgroup `{0}`.
    pub fn trivial(cfg: &FieldConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            elements: vec![0],
        }
    }

    /// The cyclic subgroup generated by one point.
    pub fn cyclic(cfg: &FieldConfig, v: &FpPoint) -> Self {
        subgroup_span(cfg, std::slice::from_ref(v))
    }

    pub fn cfg(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always contains zero
    }

    pub fn contains(&self, index: usize) -> bool {
        self.elements.binary_search(&index).is_ok()
    }

    /// Lexicographically smallest coset representatives (by coordinate
    /// tuple), plus a table sending every point index to the position of
    /// its coset representative in the returned list.
    pub fn coset_transversal(&self) -> (Vec<usize>, Vec<usize>) {
        let order = self.cfg.order();
        let mut coset_of = vec![usize::MAX; order];
        let mut reps = Vec::with_capacity(order / self.elements.len());
        for i in self.cfg.indices_lex() {
            if coset_of[i] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(i);
            for &h in &self.elements {
                coset_of[self.cfg.add_index(i, h)] = id;
            }
        }
        (reps, coset_of)
    }
}

/// Smallest subgroup containing all generators; the empty generator list
/// yields the trivial subgroup `{0}`.
pub fn subgroup_span(cfg: &FieldConfig, generators: &[FpPoint]) -> Subgroup {
    let mut member = vec![false; cfg.order()];
    member[0] = true;
    let mut frontier = vec![0usize];
    let gen_idx: Vec<usize> = generators.iter().map(|g| cfg.index_of(g)).collect();
    while let Some(e) = frontier.pop() {
        for &g in &gen_idx {
            let j = cfg.add_index(e, g);
            if !member[j] {
                member[j] = true;
                frontier.push(j);
            }
        }
    }
    let elements: Vec<usize> = member
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    Subgroup {
        cfg: cfg.clone(),
        elements,
    }
}

/// The subgroup `A + B = { a + b : a in A, b in B }`.
pub fn subgroup_sum(a: &Subgroup, b: &Subgroup) -> Result<Subgroup, FieldError> {
    if a.cfg != b.cfg {
        return Err(FieldError::MismatchedConfig);
    }
    let cfg = &a.cfg;
    let mut member = vec![false; cfg.order()];
    for &x in &a.elements {
        for &y in &b.elements {
            member[cfg.add_index(x, y)] = true;
        }
    }
    let elements: Vec<usize> = member
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    Ok(Subgroup {
        cfg: cfg.clone(),
        elements,
    })
}

/// A complex-valued function on the group with a declared sup bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    cfg: FieldConfig,
    values: Vec<Complex64>,
    sup_bound: f64,
}

impl GroupFunction {
    pub fn new(
        cfg: &FieldConfig,
        values: Vec<Complex64>,
        sup_bound: f64,
    ) -> Result<Self, FieldError> {
        let f = Self {
            cfg: cfg.clone(),
            values,
            sup_bound,
        };
        f.check_invariants()?;
        Ok(f)
    }

    /// Validate the declared shape: value table covers the group and no
    /// modulus exceeds the sup bound (within [`tol::SUP_BOUND`]).
    pub fn check_invariants(&self) -> Result<(), FieldError> {
        if self.values.len() != self.cfg.order() {
            return Err(FieldError::WrongLength {
                got: self.values.len(),
                expected: self.cfg.order(),
            });
        }
        if !self.sup_bound.is_finite() || self.sup_bound < 0.0 {
            return Err(FieldError::BadSupBound(self.sup_bound));
        }
        for (index, v) in self.values.iter().enumerate() {
            let modulus = v.norm();
            if modulus > self.sup_bound + tol::SUP_BOUND {
                return Err(FieldError::SupBoundViolated {
                    index,
                    modulus,
                    bound: self.sup_bound,
                });
            }
        }
        Ok(())
    }

    pub fn constant(cfg: &FieldConfig, value: Complex64) -> Self {
        Self {
            cfg: cfg.clone(),
            values: vec![value; cfg.order()],
            sup_bound: value.norm(),
        }
    }

    /// Indicator function of a set of point indices.
    pub fn indicator(cfg: &FieldConfig, set: &[usize]) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); cfg.order()];
        for &i in set {
            values[i] = Complex64::new(1.0, 0.0);
        }
        Self {
            cfg: cfg.clone(),
            values,
            sup_bound: 1.0,
        }
    }

    pub fn cfg(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    /// Mean over the whole group.
    pub fn mean(&self) -> Complex64 {
        let mut cs = CSum::new();
        for &v in &self.values {
            cs.add(v);
        }
        cs.mean()
    }

    pub fn conj(&self) -> Self {
        Self {
            cfg: self.cfg.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            sup_bound: self.sup_bound,
        }
    }

    /// Pointwise product; sup bounds multiply.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, FieldError> {
        if self.cfg != other.cfg {
            return Err(FieldError::MismatchedConfig);
        }
        Ok(Self {
            cfg: self.cfg.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            sup_bound: self.sup_bound * other.sup_bound,
        })
    }

    /// The translate `x -> f(x + h)` for a shift given by point index.
    pub fn translate(&self, h: usize) -> Self {
        let values = (0..self.cfg.order())
            .map(|i| self.values[self.cfg.add_index(i, h)])
            .collect();
        Self {
            cfg: self.cfg.clone(),
            values,
            sup_bound: self.sup_bound,
        }
    }

    /// Multiplicative difference `x -> f(x) conj(f(x + h))`.
    pub fn difference(&self, h: usize) -> Self {
        let values = (0..self.cfg.order())
            .map(|i| self.values[i] * self.values[self.cfg.add_index(i, h)].conj())
            .collect();
        Self {
            cfg: self.cfg.clone(),
            values,
            sup_bound: self.sup_bound * self.sup_bound,
        }
    }
}

/// Average of `f` over each coset of `H`, assigned to every point of that
/// coset.  The result is exactly `H`-invariant (identical stored value on
/// each coset) and preserves both the global mean and the sup bound.
pub fn conditional_expectation(f: &GroupFunction, h: &Subgroup) -> Result<GroupFunction, FieldError> {
    if f.cfg != h.cfg {
        return Err(FieldError::MismatchedConfig);
    }
    let cfg = &f.cfg;
    let order = cfg.order();
    let mut out = vec![Complex64::new(0.0, 0.0); order];
    let mut visited = vec![false; order];
    let mut coset = Vec::with_capacity(h.elements.len());
    for start in 0..order {
        if visited[start] {
            continue;
        }
        coset.clear();
        let mut cs = CSum::new();
        for &e in &h.elements {
            let j = cfg.add_index(start, e);
            coset.push(j);
            cs.add(f.values[j]);
        }
        let mean = cs.mean();
        for &j in &coset {
            out[j] = mean;
            visited[j] = true;
        }
    }
    Ok(GroupFunction {
        cfg: cfg.clone(),
        values: out,
        sup_bound: f.sup_bound,
    })
}

/// Recipes for deterministic pseudo-random one-bounded functions.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomKind {
    /// Independent uniform phases on the unit circle.
    UnitPhase,
    /// Independent uniform points of the closed unit disk.
    Disk,
    /// Independent 0/1 values, `1` with the given probability.
    Indicator { density: f64 },
    /// The additive character `x -> ep(<frequency, x>)` (seed unused).
    Character { frequency: Vec<u64> },
    /// `x -> ep(x^T Q x + L.x + c)` for integer `Q`, `L`, `c` (seed unused).
    QuadraticPhase {
        quadratic: Vec<Vec<i64>>,
        linear: Vec<i64>,
        constant: i64,
    },
}

/// Produce a one-bounded function from a recipe and a seed.  The output is
/// bit-identical across runs for equal `(cfg, kind, seed)`: the generator
/// is a fixed-stream ChaCha cipher and points are filled in index order.
pub fn random_one_bounded(
    cfg: &FieldConfig,
    kind: &RandomKind,
    seed: u64,
) -> Result<GroupFunction, FieldError> {
    let order = cfg.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let values: Vec<Complex64> = match kind {
        RandomKind::UnitPhase => (0..order)
            .map(|_| Complex64::from_polar(1.0, tau * rng.gen::<f64>()))
            .collect(),
        RandomKind::Disk => (0..order)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let theta = tau * rng.gen::<f64>();
                Complex64::from_polar(r, theta)
            })
            .collect(),
        RandomKind::Indicator { density } => {
            if !(0.0..=1.0).contains(density) {
                return Err(FieldError::DensityOutOfRange(*density));
            }
            (0..order)
                .map(|_| {
                    if rng.gen::<f64>() < *density {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        RandomKind::Character { frequency } => {
            if frequency.len() != cfg.dimension() {
                return Err(FieldError::BadShape {
                    expected: cfg.dimension(),
                });
            }
            (0..order)
                .map(|i| {
                    let x = cfg.point_of(i);
                    let phase: i64 = x
                        .coords()
                        .iter()
                        .zip(frequency)
                        .map(|(&xi, &fi)| ((xi % cfg.p()) * (fi % cfg.p())) as i64)
                        .sum();
                    cfg.ep(phase)
                })
                .collect()
        }
        RandomKind::QuadraticPhase {
            quadratic,
            linear,
            constant,
        } => {
            let d = cfg.dimension();
            if quadratic.len() != d
                || quadratic.iter().any(|row| row.len() != d)
                || linear.len() != d
            {
                return Err(FieldError::BadShape { expected: d });
            }
            let p = cfg.p() as i128;
            (0..order)
                .map(|i| {
                    let x = cfg.point_of(i);
                    let mut phase: i128 = (*constant as i128).rem_euclid(p);
                    for (a, row) in quadratic.iter().enumerate() {
                        for (b, &q) in row.iter().enumerate() {
                            phase += (q as i128)
                                * (x.coords()[a] as i128)
                                * (x.coords()[b] as i128);
                        }
                        phase = phase.rem_euclid(p);
                    }
                    for (a, &l) in linear.iter().enumerate() {
                        phase += (l as i128) * (x.coords()[a] as i128);
                    }
                    cfg.ep(phase.rem_euclid(p) as i64)
                })
                .collect()
        }
    };
    GroupFunction::new(cfg, values, 1.0)
}
