//! Box norms along tuples of subgroup directions, Gowers norms as the
//! repeated-cyclic special case, dual functions, and an explicit inverse
//! construction at degree 2.
//!
//! For subgroups `H_1, ..., H_s` the box norm is
//!
//! ```text
//! ||f||_{H_1,...,H_s}^{2^s} = E_x E_{h_1 in H_1} ... E_{h_s in H_s}
//!     prod_{eps in {0,1}^s} C^{|eps|} f(x + eps_1 h_1 + ... + eps_s h_s)
//! ```
//!
//! where `C` is complex conjugation.  The inner average is a limit of
//! squares, hence real and nonnegative; both facts are asserted
//! numerically.  Two independent evaluation paths are provided: a direct
//! sum over the full `2^s`-fold product (the oracle, available while the
//! direction-size product stays small) and the recursive path through the
//! inductive formula `||f||^{2^s}_{H_1..H_s} = E_{h in H_1}
//! ||f(.)conj f(.+h)||^{2^{s-1}}_{H_2..H_s}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::csum::CSum;
use crate::field::{
    conditional_expectation, FieldConfig, FieldError, FpPoint, GroupFunction, Subgroup,
};
use crate::tol;

/// Product-of-direction-sizes cap for the direct evaluation path.
pub const DIRECT_PATH_CAP: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum NormError {
    /// A cyclic direction was requested for the zero vector.
    #[error("zero direction")]
    ZeroDirection,
    #[error("direction list must be nonempty")]
    EmptyDirections,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("direct-path product {products} exceeds the cap {cap}")]
    DirectCostCap { products: u128, cap: u128 },
    #[error("inner average {0} is negative beyond the clamp tolerance")]
    NegativeInner(f64),
    #[error("eigenvalue modulus {0} differs from 1")]
    NonUnitEigenvalue(f64),
    #[error("expected {expected} functions, got {got}")]
    WrongCount { got: usize, expected: usize },
}

/// An ordered, nonempty tuple of subgroup directions sharing one ambient
/// group.
#[derive(Debug, Clone)]
pub struct DirectionSpec {
    dirs: Vec<Subgroup>,
}

impl DirectionSpec {
    pub fn new(dirs: Vec<Subgroup>) -> Result<Self, NormError> {
        if dirs.is_empty() {
            return Err(NormError::EmptyDirections);
        }
        let cfg = dirs[0].cfg().clone();
        if dirs.iter().any(|d| *d.cfg() != cfg) {
            return Err(NormError::Field(FieldError::MismatchedConfig));
        }
        Ok(Self { dirs })
    }

    /// Cyclic directions generated by the given vectors.  Zero vectors are
    /// allowed and yield the trivial direction `{0}` (callers that must
    /// reject zero directions, e.g. Gowers norms, do so explicitly).
    pub fn from_vectors(cfg: &FieldConfig, vectors: &[FpPoint]) -> Result<Self, NormError> {
        if vectors.is_empty() {
            return Err(NormError::EmptyDirections);
        }
        Ok(Self {
            dirs: vectors.iter().map(|v| Subgroup::cyclic(cfg, v)).collect(),
        })
    }

    /// `count` copies of a single subgroup direction.
    pub fn uniform(dir: &Subgroup, count: usize) -> Result<Self, NormError> {
        if count == 0 {
            return Err(NormError::EmptyDirections);
        }
        Ok(Self {
            dirs: vec![dir.clone(); count],
        })
    }

    pub fn dirs(&self) -> &[Subgroup] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty lists
    }

    /// Product of direction sizes (drives the direct-path cost).
    pub fn size_product(&self) -> u128 {
        self.dirs.iter().map(|d| d.len() as u128).product()
    }
}

fn check_cfg(f: &GroupFunction, spec: &DirectionSpec) -> Result<(), NormError> {
    if f.cfg() != spec.dirs[0].cfg() {
        return Err(NormError::Field(FieldError::MismatchedConfig));
    }
    Ok(())
}

/// The `2^s`-power inner average of the box norm, computed recursively via
/// the inductive formula.  Real up to rounding for `s >= 1`.
fn box_inner_recursive(f: &GroupFunction, dirs: &[Subgroup]) -> Complex64 {
    match dirs.split_first() {
        None => f.mean(),
        Some((h1, rest)) => {
            let mut cs = CSum::new();
            for &h in h1.elements() {
                cs.add(box_inner_recursive(&f.difference(h), rest));
            }
            cs.mean()
        }
    }
}

fn root_2s(value: f64, s: usize) -> Result<f64, NormError> {
    if value < -tol::NEGATIVE_CLAMP {
        return Err(NormError::NegativeInner(value));
    }
    let clamped = value.max(0.0);
    Ok(clamped.powf(1.0 / (1u64 << s) as f64))
}

/// Box norm along the given directions (recursive evaluation path).
pub fn box_norm(f: &GroupFunction, spec: &DirectionSpec) -> Result<f64, NormError> {
    check_cfg(f, spec)?;
    let inner = box_inner_recursive(f, &spec.dirs);
    root_2s(inner.re, spec.len())
}

/// The `2^s`-th power of the box norm — the underlying difference average
/// itself, clamped at zero.  Cheaper and numerically cleaner than rooting
/// and re-raising when the power is the quantity of interest.
pub fn box_norm_power(f: &GroupFunction, spec: &DirectionSpec) -> Result<f64, NormError> {
    check_cfg(f, spec)?;
    let inner = box_inner_recursive(f, &spec.dirs);
    if inner.re < -tol::NEGATIVE_CLAMP {
        return Err(NormError::NegativeInner(inner.re));
    }
    Ok(inner.re.max(0.0))
}

/// Box norm by direct summation of the full `2^s`-fold product — the
/// oracle path, available while the product of direction sizes stays at
/// most [`DIRECT_PATH_CAP`].
pub fn box_norm_direct(f: &GroupFunction, spec: &DirectionSpec) -> Result<f64, NormError> {
    check_cfg(f, spec)?;
    let products = spec.size_product();
    if products > DIRECT_PATH_CAP {
        return Err(NormError::DirectCostCap {
            products,
            cap: DIRECT_PATH_CAP,
        });
    }
    let cfg = f.cfg();
    let s = spec.len();
    let order = cfg.order();
    // Odometer over tuples (h_1, ..., h_s) with h_i in H_i.
    let sizes: Vec<usize> = spec.dirs.iter().map(|d| d.len()).collect();
    let mut pos = vec![0usize; s];
    let mut outer = CSum::new();
    loop {
        // subset shifts: shift[eps] = sum of h_i over bits set in eps
        let mut shift = vec![0usize; 1 << s];
        for eps in 1usize..1 << s {
            let i = eps.trailing_zeros() as usize;
            let h = spec.dirs[i].elements()[pos[i]];
            shift[eps] = cfg.add_index(shift[eps & (eps - 1)], h);
        }
        let mut inner = CSum::new();
        for x in 0..order {
            let mut prod = Complex64::new(1.0, 0.0);
            for (eps, &sh) in shift.iter().enumerate() {
                let v = f.value(cfg.add_index(x, sh));
                prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            inner.add(prod);
        }
        outer.add(inner.mean());
        // advance odometer
        let mut k = 0;
        loop {
            if k == s {
                let mean = outer.mean();
                return root_2s(mean.re, s);
            }
            pos[k] += 1;
            if pos[k] < sizes[k] {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

/// Gowers norm of order `s` along the cyclic direction generated by `v`.
pub fn gowers_norm(f: &GroupFunction, v: &FpPoint, s: usize) -> Result<f64, NormError> {
    if v.is_zero() {
        return Err(NormError::ZeroDirection);
    }
    let dir = Subgroup::cyclic(f.cfg(), v);
    box_norm(f, &DirectionSpec::uniform(&dir, s)?)
}

/// Outcome of a two-sided comparison: measured left side, right side, and
/// whether `lhs <= rhs` within [`tol::INEQUALITY_SLACK`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl InequalityReport {
    pub(crate) fn compare(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            ok: lhs <= rhs + tol::INEQUALITY_SLACK,
        }
    }
}

/// Cauchy–Schwarz box inequality: for a family `f_eps` indexed by the
/// corners `eps` of the `s`-cube (as bitmasks),
///
/// ```text
/// |E_{x,h} prod_eps C^{|eps|} f_eps(x + eps.h)| <= prod_eps ||f_eps||_{H_1..H_s}
/// ```
pub fn gcs_check(fs: &[GroupFunction], spec: &DirectionSpec) -> Result<InequalityReport, NormError> {
    let s = spec.len();
    if fs.len() != 1 << s {
        return Err(NormError::WrongCount {
            got: fs.len(),
            expected: 1 << s,
        });
    }
    for f in fs {
        check_cfg(f, spec)?;
    }
    let cfg = fs[0].cfg();
    let order = cfg.order();
    let sizes: Vec<usize> = spec.dirs.iter().map(|d| d.len()).collect();
    let mut pos = vec![0usize; s];
    let mut outer = CSum::new();
    'tuples: loop {
        let mut shift = vec![0usize; 1 << s];
        for eps in 1usize..1 << s {
            let i = eps.trailing_zeros() as usize;
            let h = spec.dirs[i].elements()[pos[i]];
            shift[eps] = cfg.add_index(shift[eps & (eps - 1)], h);
        }
        for x in 0..order {
            let mut prod = Complex64::new(1.0, 0.0);
            for (eps, &sh) in shift.iter().enumerate() {
                let v = fs[eps].value(cfg.add_index(x, sh));
                prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            outer.add(prod);
        }
        let mut k = 0;
        loop {
            if k == s {
                break 'tuples;
            }
            pos[k] += 1;
            if pos[k] < sizes[k] {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
    let lhs = outer.mean().norm();
    let mut rhs = 1.0;
    for f in fs {
        rhs *= box_norm(f, spec)?;
    }
    Ok(InequalityReport::compare(lhs, rhs))
}

/// Dual function of order `s` along the cyclic direction `v`:
///
/// ```text
/// D f(x) = E_{h in F_p^s} prod_{eps != 0} C^{|eps|} f(x + (eps.h) v)
/// ```
///
/// It satisfies `E_x f(x) D f(x) = ||f||_{U^s(v)}^{2^s}` exactly.
pub fn dual_function(f: &GroupFunction, v: &FpPoint, s: usize) -> Result<GroupFunction, NormError> {
    if v.is_zero() {
        return Err(NormError::ZeroDirection);
    }
    if s == 0 {
        return Err(NormError::EmptyDirections);
    }
    let cfg = f.cfg().clone();
    let p = cfg.p() as usize;
    let v_idx = cfg.index_of(v);
    // multiples[r] = index of r*v
    let multiples: Vec<usize> = (0..p as u64).map(|r| cfg.scale_index(v_idx, r)).collect();
    let order = cfg.order();
    let mut values = Vec::with_capacity(order);
    let mut h = vec![0usize; s];
    for x in 0..order {
        let mut cs = CSum::new();
        h.iter_mut().for_each(|hi| *hi = 0);
        'tuples: loop {
            // subset sums eps.h mod p
            let mut prod = Complex64::new(1.0, 0.0);
            for eps in 1usize..1 << s {
                let mut dot = 0usize;
                for (i, &hi) in h.iter().enumerate() {
                    if eps & (1 << i) != 0 {
                        dot += hi;
                    }
                }
                let val = f.value(cfg.add_index(x, multiples[dot % p]));
                prod *= if eps.count_ones() % 2 == 1 {
                    val.conj()
                } else {
                    val
                };
            }
            cs.add(prod);
            let mut k = 0;
            loop {
                if k == s {
                    break 'tuples;
                }
                h[k] += 1;
                if h[k] < p {
                    break;
                }
                h[k] = 0;
                k += 1;
            }
        }
        values.push(cs.mean());
    }
    let sup = f.sup_bound().powi((1 << s) - 1);
    Ok(GroupFunction::new(&cfg, values, sup)?)
}

/// Measured two sides of the weak inverse identity
/// `||f||_{U^s(v)}^{2^s} = E_x f(x) D f(x)` (exact for arbitrary `f`).
#[derive(Debug, Clone, Copy)]
pub struct WeakInverseReport {
    /// `||f||_{U^s(v)}^{2^s}`
    pub norm_power: f64,
    /// `E_x f(x) D f(x)` (its imaginary part must vanish)
    pub pairing: Complex64,
    pub gap: f64,
    pub ok: bool,
}

pub fn weak_inverse_check(
    f: &GroupFunction,
    v: &FpPoint,
    s: usize,
) -> Result<WeakInverseReport, NormError> {
    let norm = gowers_norm(f, v, s)?;
    let norm_power = norm.powi(1 << s);
    let dual = dual_function(f, v, s)?;
    let mut cs = CSum::new();
    for i in 0..f.cfg().order() {
        cs.add(f.value(i) * dual.value(i));
    }
    let pairing = cs.mean();
    let gap = (norm_power - pairing.re).abs();
    let ok = gap <= tol::EXACT_IDENTITY && pairing.im.abs() <= tol::EXACT_IDENTITY;
    Ok(WeakInverseReport {
        norm_power,
        pairing,
        gap,
        ok,
    })
}

/// A function of the shape `chi(x' + n v) = 1_E(x') lambda ep(phi(x') n + psi(x'))`
/// (coset-wise character along the line `<v>`): modulus 0 or 1 everywhere,
/// and one step along `v` multiplies the value by `ep(phi(x))` with a
/// shift-invariant frequency `phi`.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    chi: GroupFunction,
    v: FpPoint,
    /// Frequency per point index; constant on cosets of `<v>`.
    phi: Vec<u64>,
}

impl Eigenfunction {
    pub fn chi(&self) -> &GroupFunction {
        &self.chi
    }

    pub fn direction(&self) -> &FpPoint {
        &self.v
    }

    pub fn phi(&self) -> &[u64] {
        &self.phi
    }

    /// Numeric validation of the defining properties: values have modulus
    /// 0 or 1; `phi` is exactly invariant along `v`; and
    /// `chi(x + v) = ep(phi(x)) chi(x)` within [`tol::EXACT_IDENTITY`].
    pub fn check_invariants(&self) -> Result<(), NormError> {
        self.chi.check_invariants()?;
        if self.v.is_zero() {
            return Err(NormError::ZeroDirection);
        }
        let cfg = self.chi.cfg();
        let v_idx = cfg.index_of(&self.v);
        for x in 0..cfg.order() {
            let m = self.chi.value(x).norm();
            if (m - 1.0).abs() > tol::EXACT_IDENTITY && m > tol::EXACT_IDENTITY {
                return Err(NormError::NonUnitEigenvalue(m));
            }
            let xv = cfg.add_index(x, v_idx);
            if self.phi[xv] != self.phi[x] {
                return Err(NormError::Field(FieldError::NotClosed));
            }
            let expect = cfg.ep(self.phi[x] as i64) * self.chi.value(x);
            if (self.chi.value(xv) - expect).norm() > tol::EXACT_IDENTITY {
                return Err(NormError::NonUnitEigenvalue(
                    (self.chi.value(xv) - expect).norm(),
                ));
            }
        }
        Ok(())
    }
}

/// Build an eigenfunction from per-coset data along `<v>`: frequency
/// `phi`, phase offset `psi`, global eigenvalue `lambda` (unit modulus),
/// and a per-coset support mask.  The slices are indexed by coset id in
/// transversal order (lexicographically smallest representatives).
pub fn make_eigenfunction(
    cfg: &FieldConfig,
    v: &FpPoint,
    phi: &[u64],
    psi: &[u64],
    lambda: Complex64,
    support: &[bool],
) -> Result<Eigenfunction, NormError> {
    if v.is_zero() {
        return Err(NormError::ZeroDirection);
    }
    if (lambda.norm() - 1.0).abs() > tol::UNIT_MODULUS {
        return Err(NormError::NonUnitEigenvalue(lambda.norm()));
    }
    let line = Subgroup::cyclic(cfg, v);
    let (reps, _) = line.coset_transversal();
    let n_cosets = reps.len();
    if phi.len() != n_cosets || psi.len() != n_cosets || support.len() != n_cosets {
        return Err(NormError::WrongCount {
            got: phi.len().min(psi.len()).min(support.len()),
            expected: n_cosets,
        });
    }
    let p = cfg.p();
    let v_idx = cfg.index_of(v);
    let mut values = vec![Complex64::new(0.0, 0.0); cfg.order()];
    let mut phi_table = vec![0u64; cfg.order()];
    for (id, &rep) in reps.iter().enumerate() {
        let fr = phi[id] % p;
        let off = psi[id] % p;
        for n in 0..p {
            let idx = cfg.add_index(rep, cfg.scale_index(v_idx, n));
            phi_table[idx] = fr;
            if support[id] {
                values[idx] = lambda * cfg.ep((fr * n + off) as i64);
            }
        }
    }
    let chi = GroupFunction::new(cfg, values, 1.0)?;
    let out = Eigenfunction {
        chi,
        v: v.clone(),
        phi: phi_table,
    };
    out.check_invariants()?;
    Ok(out)
}

/// Certificate produced by the degree-2 inverse construction: a full-support
/// eigenfunction together with its correlation against the input.
#[derive(Debug, Clone)]
pub struct U2Certificate {
    pub eigenfunction: Eigenfunction,
    /// `E_x f(x) chi(x)` — real and nonnegative by construction.
    pub correlation: f64,
}

/// Explicit inverse construction for the degree-2 norm along `v`: on each
/// coset of `<v>` pick the dominant line frequency by discrete Fourier
/// analysis and phase-align it.  The returned correlation satisfies
/// `E_x f chi >= ||f||_{U^2(v)}^4` (numerically within
/// [`tol::EXACT_IDENTITY`]), and `E(f chi | <v>)` is pointwise real
/// nonnegative.
pub fn u2_inverse(f: &GroupFunction, v: &FpPoint) -> Result<U2Certificate, NormError> {
    if v.is_zero() {
        return Err(NormError::ZeroDirection);
    }
    let cfg = f.cfg().clone();
    let p = cfg.p();
    let line = Subgroup::cyclic(&cfg, v);
    let (reps, _) = line.coset_transversal();
    let v_idx = cfg.index_of(v);
    let step: Vec<usize> = (0..p).map(|n| cfg.scale_index(v_idx, n)).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); cfg.order()];
    let mut phi_table = vec![0u64; cfg.order()];
    let mut corr = CSum::new();
    for &rep in &reps {
        // pairing(phi) = E_n f(rep + n v) ep(phi n); pick the dominant phi
        let mut best_phi = 0u64;
        let mut best = Complex64::new(0.0, 0.0);
        for phi in 0..p {
            let mut cs = CSum::new();
            for n in 0..p {
                cs.add(f.value(cfg.add_index(rep, step[n as usize])) * cfg.ep((phi * n) as i64));
            }
            let pairing = cs.mean();
            if pairing.norm() > best.norm() + tol::NEGATIVE_CLAMP {
                best = pairing;
                best_phi = phi;
            }
        }
        let lambda = if best.norm() > 0.0 {
            (best / best.norm()).conj()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for n in 0..p {
            let idx = cfg.add_index(rep, step[n as usize]);
            phi_table[idx] = best_phi;
            values[idx] = lambda * cfg.ep((best_phi * n) as i64);
        }
        corr.add_real(best.norm());
    }
    let chi = GroupFunction::new(&cfg, values, 1.0)?;
    let eigenfunction = Eigenfunction {
        chi,
        v: v.clone(),
        phi: phi_table,
    };
    eigenfunction.check_invariants()?;
    Ok(U2Certificate {
        eigenfunction,
        correlation: corr.mean().re,
    })
}

/// `E(f | <v>)` as a convenience wrapper: conditional expectation over the
/// cyclic line through `v`.
pub fn line_expectation(f: &GroupFunction, v: &FpPoint) -> Result<GroupFunction, NormError> {
    if v.is_zero() {
        return Err(NormError::ZeroDirection);
    }
    Ok(conditional_expectation(f, &Subgroup::cyclic(f.cfg(), v))?)
}
