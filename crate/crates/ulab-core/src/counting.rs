//! Multilinear averages along polynomial progressions and the
//! Cauchy–Schwarz exchange lemmas that control them.
//!
//! The central object is the average
//!
//! ```text
//! Lambda(f_0, ..., f_l) = E_{x in G} E_{n in F_p}
//!     f_0(x) f_1(x + v_{eta_1} p_1(n)) ... f_l(x + v_{eta_l} p_l(n))
//! ```
//!
//! for a progression with direction vectors `v_j`, integer polynomials
//! `p_j`, and an indexing map `eta`.  Around it sit: the structured count
//! that replaces each `f_j` by its line average, the `tilde` auxiliary
//! duals obtained by solving the progression for one slot, identities for
//! replacing a slot by correlating functions, exponential-sum (Weil)
//! calibration, and verifiers for the dual-removal, dual-difference
//! interchange, and low-complexity inequalities.

use num_complex::Complex64;
use thiserror::Error;

use crate::csum::CSum;
use crate::field::{
    conditional_expectation, eval_vec_poly, FieldConfig, FieldError, FpPoint, GroupFunction,
    IntVecPoly, Subgroup,
};
use crate::norms::{dual_function, gowers_norm, NormError};
use crate::tol;

/// Default budget of complex multiply-adds for a single verifier call.
pub const DEFAULT_COST_CAP: u64 = 1_000_000_000;

/// Largest difference order accepted by the dual-difference interchange
/// verifier: the conclusion enumerates `p^{2s}` pairs of shift tuples.
pub const MAX_INTERCHANGE_ORDER: usize = 3;

/// Active cost cap: the `ULAB_COST_CAP` environment variable when set to a
/// positive integer, otherwise [`DEFAULT_COST_CAP`].
pub fn cost_cap() -> u64 {
    std::env::var("ULAB_COST_CAP")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_COST_CAP)
}

#[derive(Debug, Error)]
pub enum CountError {
    #[error("expected {expected} functions, got {got}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("vector and polynomial lists must have equal nonzero length")]
    BadProgressionShape,
    #[error("zero direction")]
    ZeroDirection,
    #[error("index map entry {0} outside 1..={1}")]
    BadIndexMap(usize, usize),
    #[error("slot index {0} outside 0..={1}")]
    BadSlot(usize, usize),
    #[error("theorem mode requires every polynomial to vanish at 0")]
    NonzeroConstantTerm,
    #[error("polynomial {0} is zero")]
    ZeroPolynomial(usize),
    #[error("polynomials not linearly independent")]
    NotLinearlyIndependent,
    #[error("Weil hypothesis violated: reduced degree {degree} >= modulus {p}")]
    WeilHypothesisViolated { degree: usize, p: u64 },
    #[error(
        "difference order {s} exceeds the desk-scale limit {max} \
         (cost estimate {estimate} multiply-adds)"
    )]
    InterchangeOrderTooLarge {
        s: usize,
        max: usize,
        estimate: u128,
    },
    #[error("cost estimate {estimate} multiply-adds exceeds cap {cap}")]
    CostCap { estimate: u128, cap: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// A polynomial progression `x, x + v_{eta_1} p_1(n), ..., x + v_{eta_l} p_l(n)`.
#[derive(Debug, Clone)]
pub struct ProgressionConfig {
    cfg: FieldConfig,
    vectors: Vec<FpPoint>,
    polys: Vec<Vec<i64>>,
    eta: Vec<usize>,
    theorem_mode: bool,
    /// `shifts[j][n]` = point index of `v_{eta_{j+1}} p_{j+1}(n)`.
    shifts: Vec<Vec<usize>>,
}

impl ProgressionConfig {
    /// `vectors` and `polys` must have equal nonzero length `l`; `eta`
    /// (1-based entries in `[1, l]`) defaults to the identity.  In theorem
    /// mode every polynomial must vanish at `n = 0`.
    pub fn new(
        cfg: &FieldConfig,
        vectors: Vec<FpPoint>,
        polys: Vec<Vec<i64>>,
        eta: Option<Vec<usize>>,
        theorem_mode: bool,
    ) -> Result<Self, CountError> {
        let l = vectors.len();
        if l == 0 || polys.len() != l {
            return Err(CountError::BadProgressionShape);
        }
        for v in &vectors {
            if v.is_zero() {
                return Err(CountError::ZeroDirection);
            }
        }
        for (j, poly) in polys.iter().enumerate() {
            if poly.iter().all(|&c| c == 0) {
                return Err(CountError::ZeroPolynomial(j + 1));
            }
            if theorem_mode && poly.first().copied().unwrap_or(0) != 0 {
                return Err(CountError::NonzeroConstantTerm);
            }
        }
        let eta = eta.unwrap_or_else(|| (1..=l).collect());
        if eta.len() != l {
            return Err(CountError::BadProgressionShape);
        }
        for &e in &eta {
            if e == 0 || e > l {
                return Err(CountError::BadIndexMap(e, l));
            }
        }
        let mut shifts = Vec::with_capacity(l);
        for j in 1..=l {
            let disp = IntVecPoly::scalar_times_vector(
                &polys[j - 1],
                &vectors[eta[j - 1] - 1]
                    .coords()
                    .iter()
                    .map(|&c| c as i64)
                    .collect::<Vec<i64>>(),
            );
            let mut row = Vec::with_capacity(cfg.p() as usize);
            for n in 0..cfg.p() {
                row.push(cfg.index_of(&eval_vec_poly(cfg, &disp, n)?));
            }
            shifts.push(row);
        }
        Ok(Self {
            cfg: cfg.clone(),
            vectors,
            polys,
            eta,
            theorem_mode,
            shifts,
        })
    }

    /// Convenience constructor reducing integer vectors into the group
    /// (rejecting nonzero vectors that collapse mod p).
    pub fn from_int_vectors(
        cfg: &FieldConfig,
        vectors: &[Vec<i64>],
        polys: Vec<Vec<i64>>,
        eta: Option<Vec<usize>>,
        theorem_mode: bool,
    ) -> Result<Self, CountError> {
        let pts = vectors
            .iter()
            .map(|v| cfg.reduce_nonzero_int_vec(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(cfg, pts, polys, eta, theorem_mode)
    }

    pub fn cfg(&self) -> &FieldConfig {
        &self.cfg
    }

    /// Number of moving points `l`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty progressions
    }

    pub fn theorem_mode(&self) -> bool {
        self.theorem_mode
    }

    pub fn vectors(&self) -> &[FpPoint] {
        &self.vectors
    }

    pub fn polys(&self) -> &[Vec<i64>] {
        &self.polys
    }

    pub fn eta(&self) -> &[usize] {
        &self.eta
    }

    /// The direction vector attached to slot `j` (1-based): `v_{eta_j}`.
    pub fn slot_vector(&self, j: usize) -> &FpPoint {
        &self.vectors[self.eta[j - 1] - 1]
    }

    /// Point index of the displacement `v_{eta_j} p_j(n)` (slot `j` 1-based).
    #[inline]
    pub fn shift_index(&self, j: usize, n: u64) -> usize {
        self.shifts[j - 1][n as usize]
    }

    fn validate_functions(&self, fs: &[GroupFunction]) -> Result<(), CountError> {
        if fs.len() != self.len() + 1 {
            return Err(CountError::SizeMismatch {
                got: fs.len(),
                expected: self.len() + 1,
            });
        }
        for f in fs {
            if f.cfg() != &self.cfg {
                return Err(CountError::Field(FieldError::MismatchedConfig));
            }
        }
        Ok(())
    }
}

/// The multilinear progression average `Lambda(f_0, ..., f_l)`; the inner
/// variable `n` runs over all of `F_p` including 0.
pub fn counting_operator(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
) -> Result<Complex64, CountError> {
    pc.validate_functions(fs)?;
    let cfg = pc.cfg();
    let order = cfg.order();
    let l = pc.len();
    let mut cs = CSum::new();
    for n in 0..cfg.p() {
        for x in 0..order {
            let mut prod = fs[0].value(x);
            for j in 1..=l {
                prod *= fs[j].value(cfg.add_index(x, pc.shift_index(j, n)));
            }
            cs.add(prod);
        }
    }
    Ok(cs.mean())
}

/// The structured analogue of [`counting_operator`]: every moving function
/// is replaced by its conditional expectation along its own line.
pub fn structured_count(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
) -> Result<Complex64, CountError> {
    pc.validate_functions(fs)?;
    let cfg = pc.cfg();
    let mut projected = Vec::with_capacity(pc.len());
    for j in 1..=pc.len() {
        let line = Subgroup::cyclic(cfg, pc.slot_vector(j));
        projected.push(conditional_expectation(&fs[j], &line)?);
    }
    let mut cs = CSum::new();
    for x in 0..cfg.order() {
        let mut prod = fs[0].value(x);
        for p in &projected {
            prod *= p.value(x);
        }
        cs.add(prod);
    }
    Ok(cs.mean())
}

/// Exact rank over the rationals of the integer matrix whose rows are the
/// progression's polynomial coefficient vectors (fraction-free Gaussian
/// elimination in `i128`).
fn poly_rank(polys: &[Vec<i64>]) -> usize {
    let rows = polys.len();
    let cols = polys.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut m: Vec<Vec<i128>> = polys
        .iter()
        .map(|p| {
            let mut row: Vec<i128> = p.iter().map(|&c| c as i128).collect();
            row.resize(cols, 0);
            row
        })
        .collect();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot) = (row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pivot);
        let pivot_val = m[row][col];
        for r in row + 1..rows {
            let factor = m[r][col];
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                m[r][c] = m[r][c] * pivot_val - m[row][c] * factor;
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Measured distance between the progression average and its structured
/// counterpart.
#[derive(Debug, Clone, Copy)]
pub struct TcountReport {
    pub lambda: Complex64,
    pub structured: Complex64,
    pub gap: f64,
}

/// `|Lambda - structured|` for a theorem-mode progression whose
/// polynomials are linearly independent over the rationals.
pub fn tcount_gap(pc: &ProgressionConfig, fs: &[GroupFunction]) -> Result<TcountReport, CountError> {
    if !pc.theorem_mode() {
        return Err(CountError::NonzeroConstantTerm);
    }
    if poly_rank(pc.polys()) != pc.len() {
        return Err(CountError::NotLinearlyIndependent);
    }
    let lambda = counting_operator(pc, fs)?;
    let structured = structured_count(pc, fs)?;
    Ok(TcountReport {
        lambda,
        structured,
        gap: (lambda - structured).norm(),
    })
}

/// The auxiliary dual for slot `m` (0-based over `0..=l`): solve the
/// progression for the `m`-th point,
///
/// ```text
/// dual_m(x) = E_n prod_{j != m} conj(f_j)(x + v_j p_j(n) - v_m p_m(n))
/// ```
///
/// (with `v_0 p_0 = 0`), so that
/// `Lambda(f_0, ..., f_l) = E_x f_m(x) conj(dual_m(x))` exactly.
pub fn tilde_dual(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
    m: usize,
) -> Result<GroupFunction, CountError> {
    pc.validate_functions(fs)?;
    let l = pc.len();
    if m > l {
        return Err(CountError::BadSlot(m, l));
    }
    let cfg = pc.cfg();
    let order = cfg.order();
    let mut values = Vec::with_capacity(order);
    let m_shift = |n: u64| -> usize {
        if m == 0 {
            0
        } else {
            pc.shift_index(m, n)
        }
    };
    for x in 0..order {
        let mut cs = CSum::new();
        for n in 0..cfg.p() {
            let back = cfg.neg_index(m_shift(n));
            let mut prod = Complex64::new(1.0, 0.0);
            for j in 0..=l {
                if j == m {
                    continue;
                }
                let shift = if j == 0 { back } else { cfg.add_index(pc.shift_index(j, n), back) };
                prod *= fs[j].value(cfg.add_index(x, shift)).conj();
            }
            cs.add(prod);
        }
        values.push(cs.mean());
    }
    let sup: f64 = fs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != m)
        .map(|(_, f)| f.sup_bound())
        .product();
    Ok(GroupFunction::new(cfg, values, sup)?)
}

/// Progression average with slot `m` replaced by an arbitrary function.
fn counting_operator_with_slot(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
    m: usize,
    replacement: &GroupFunction,
) -> Result<Complex64, CountError> {
    let mut swapped: Vec<GroupFunction> = fs.to_vec();
    swapped[m] = replacement.clone();
    counting_operator(pc, &swapped)
}

/// One verified sub-statement of the replacement lemma: a measured slot
/// average, the reference value it must reproduce, and a lower bound it
/// must dominate.
#[derive(Debug, Clone, Copy)]
pub struct ReplacementPart {
    /// Real part of the progression average with the replaced slot.
    pub value: f64,
    /// The closed-form reference the identity pins it to.
    pub reference: f64,
    /// `|value - reference|`.
    pub identity_gap: f64,
    /// Lower bound implied by the exchange argument.
    pub lower_bound: f64,
    pub ok: bool,
}

/// Report of [`dual_replacement_check`].
#[derive(Debug, Clone)]
pub struct DualReplacementReport {
    /// Average with slot `m` holding `conj g`.
    pub slot_average: Complex64,
    /// `conj(E_x dual_m(x) g(x))` — must equal `slot_average`.
    pub pairing: Complex64,
    pub identity_gap: f64,
    /// Slot `m` replaced by `dual_m` itself (always available).
    pub part_energy: ReplacementPart,
    /// Slot `m` replaced by the line average of `dual_m` (moving slots only).
    pub part_invariant: Option<ReplacementPart>,
    /// Slot `m` replaced by the conjugated degree-`s` dual of `dual_m`
    /// (moving slots only).
    pub part_dual: Option<ReplacementPart>,
    pub ok: bool,
}

/// Verify the exact replacement identity
/// `Lambda(f_0, ..., conj g at slot m, ..., f_l) = conj(E_x dual_m(x) g(x))`
/// together with its three standard corollaries (slot := the dual itself,
/// its line average, and its degree-`s_dual` dual).  The corollary lower
/// bounds presume one-bounded inputs.
pub fn dual_replacement_check(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
    m: usize,
    g: &GroupFunction,
    s_dual: usize,
) -> Result<DualReplacementReport, CountError> {
    pc.validate_functions(fs)?;
    if m > pc.len() {
        return Err(CountError::BadSlot(m, pc.len()));
    }
    if g.cfg() != pc.cfg() {
        return Err(CountError::Field(FieldError::MismatchedConfig));
    }
    let cfg = pc.cfg();
    let dual = tilde_dual(pc, fs, m)?;
    let lambda = counting_operator(pc, fs)?;

    // the defining identity with the supplied g
    let slot_average = counting_operator_with_slot(pc, fs, m, &g.conj())?;
    let mut cs = CSum::new();
    for x in 0..cfg.order() {
        cs.add(dual.value(x) * g.value(x));
    }
    let pairing = cs.mean().conj();
    let identity_gap = (slot_average - pairing).norm();

    // corollary: slot m := dual_m gives the dual's energy, which dominates
    // |Lambda|^2 by Cauchy-Schwarz
    let energy_avg = counting_operator_with_slot(pc, fs, m, &dual)?;
    let mut e = CSum::new();
    for x in 0..cfg.order() {
        e.add_real(dual.value(x).norm_sqr());
    }
    let energy = e.mean().re;
    let part_energy = ReplacementPart {
        value: energy_avg.re,
        reference: energy,
        identity_gap: (energy_avg.re - energy).abs().max(energy_avg.im.abs()),
        lower_bound: lambda.norm_sqr(),
        ok: (energy_avg.re - energy).abs() <= tol::EXACT_IDENTITY
            && energy_avg.im.abs() <= tol::EXACT_IDENTITY
            && energy_avg.re >= lambda.norm_sqr() - tol::INEQUALITY_SLACK,
    };

    let (part_invariant, part_dual) = if m >= 1 {
        let v = pc.slot_vector(m);
        let line = Subgroup::cyclic(cfg, v);
        let projected = conditional_expectation(&dual, &line)?;
        let inv_avg = counting_operator_with_slot(pc, fs, m, &projected)?;
        let u1_sq = gowers_norm(&dual, v, 1)?.powi(2);
        let part_invariant = ReplacementPart {
            value: inv_avg.re,
            reference: u1_sq,
            identity_gap: (inv_avg.re - u1_sq).abs().max(inv_avg.im.abs()),
            lower_bound: u1_sq * u1_sq,
            ok: (inv_avg.re - u1_sq).abs() <= tol::EXACT_IDENTITY
                && inv_avg.im.abs() <= tol::EXACT_IDENTITY
                && inv_avg.re >= u1_sq * u1_sq - tol::INEQUALITY_SLACK,
        };

        let dd = dual_function(&dual, v, s_dual)?;
        let dual_avg = counting_operator_with_slot(pc, fs, m, &dd.conj())?;
        let norm_pow = gowers_norm(&dual, v, s_dual)?.powi(1 << s_dual);
        let part_dual = ReplacementPart {
            value: dual_avg.re,
            reference: norm_pow,
            identity_gap: (dual_avg.re - norm_pow).abs().max(dual_avg.im.abs()),
            lower_bound: norm_pow,
            ok: (dual_avg.re - norm_pow).abs() <= tol::EXACT_IDENTITY
                && dual_avg.im.abs() <= tol::EXACT_IDENTITY,
        };
        (Some(part_invariant), Some(part_dual))
    } else {
        (None, None)
    };

    let ok = identity_gap <= tol::EXACT_IDENTITY
        && part_energy.ok
        && part_invariant.map_or(true, |p| p.ok)
        && part_dual.map_or(true, |p| p.ok);
    Ok(DualReplacementReport {
        slot_average,
        pairing,
        identity_gap,
        part_energy,
        part_invariant,
        part_dual,
        ok,
    })
}

/// Number of pairs `(x, n)` with `n != 0` such that `x` and every
/// progression point `x + v_{eta_j} p_j(n)` lie in the given set.
pub fn progression_count(pc: &ProgressionConfig, set: &[usize]) -> Result<u64, CountError> {
    let cfg = pc.cfg();
    let order = cfg.order();
    let mut member = vec![false; order];
    for &i in set {
        if i >= order {
            return Err(CountError::BadSlot(i, order - 1));
        }
        member[i] = true;
    }
    let l = pc.len();
    let mut count = 0u64;
    for n in 1..cfg.p() {
        for x in 0..order {
            if !member[x] {
                continue;
            }
            if (1..=l).all(|j| member[cfg.add_index(x, pc.shift_index(j, n))]) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Integer identity tying the analytic average on indicators to the
/// combinatorial count.
#[derive(Debug, Clone, Copy)]
pub struct CountIdentityReport {
    /// `p^{D+1} * Lambda(1_S, ..., 1_S)`, which is an integer in exact
    /// arithmetic.
    pub scaled_average: f64,
    /// `progression_count + (number of x whose n = 0 progression stays in S)`;
    /// in theorem mode the second term is exactly `|S|`.
    pub combinatorial: u64,
    pub gap: f64,
    pub ok: bool,
}

/// Check `p^{D+1} Lambda(1_S, ..., 1_S) = progression_count(S) + |S|`-type
/// identities exactly (the `n = 0` term is enumerated, so the identity also
/// holds outside theorem mode).
pub fn indicator_count_identity(
    pc: &ProgressionConfig,
    set: &[usize],
) -> Result<CountIdentityReport, CountError> {
    let cfg = pc.cfg();
    let indicator = GroupFunction::indicator(cfg, set);
    let fs = vec![indicator; pc.len() + 1];
    let lambda = counting_operator(pc, &fs)?;
    let scaled_average = lambda.re * (cfg.order() as f64) * cfg.p() as f64;
    let moving = progression_count(pc, set)?;
    let mut member = vec![false; cfg.order()];
    for &i in set {
        member[i] = true;
    }
    let n0_term = (0..cfg.order())
        .filter(|&x| member[x] && (1..=pc.len()).all(|j| member[cfg.add_index(x, pc.shift_index(j, 0))]))
        .count() as u64;
    let combinatorial = moving + n0_term;
    let gap = (scaled_average - combinatorial as f64).abs();
    Ok(CountIdentityReport {
        scaled_average,
        combinatorial,
        gap,
        ok: gap <= 1e-6 && scaled_average.round() as u64 == combinatorial,
    })
}

/// Exponential-sum calibration report.
#[derive(Debug, Clone, Copy)]
pub struct WeilReport {
    /// `|E_n ep(sum_j phi_j p_j(n)) - [all phi_j = 0]|`.
    pub gap: f64,
    /// `(deg - 1) p^{-1/2}` when the square-root bound applies (combined
    /// polynomial nonconstant mod p), else `None`.
    pub bound: Option<f64>,
    /// Degree mod p of the combined polynomial (coefficientwise reduction).
    pub degree_mod_p: Option<usize>,
    pub ok: bool,
}

/// Distance of the phase average `E_n ep(sum_j phi_j p_j(n))` from the
/// indicator of `phi = 0`, with the square-root cancellation bound asserted
/// whenever the combined polynomial is nonconstant mod `p`.  Degrees at or
/// above `p` (after coefficientwise reduction) are rejected: the bound has
/// no content there.
pub fn weil_gap(pc: &ProgressionConfig, phis: &[u64]) -> Result<WeilReport, CountError> {
    if phis.len() != pc.len() {
        return Err(CountError::SizeMismatch {
            got: phis.len(),
            expected: pc.len(),
        });
    }
    let cfg = pc.cfg();
    let p = cfg.p();
    // combined scalar polynomial sum_j phi_j p_j over the integers
    let max_len = pc.polys().iter().map(|q| q.len()).max().unwrap_or(0);
    let mut combined = vec![0i128; max_len];
    for (j, q) in pc.polys().iter().enumerate() {
        let phi = (phis[j] % p) as i128;
        for (k, &c) in q.iter().enumerate() {
            combined[k] += phi * c as i128;
        }
    }
    let reduced: Vec<u64> = combined
        .iter()
        .map(|&c| c.rem_euclid(p as i128) as u64)
        .collect();
    let degree_mod_p = reduced.iter().rposition(|&c| c != 0);
    if let Some(d) = degree_mod_p {
        if d as u64 >= p {
            return Err(CountError::WeilHypothesisViolated { degree: d, p });
        }
    }
    let mut cs = CSum::new();
    for n in 0..p {
        let mut acc: u64 = 0;
        for &c in reduced.iter().rev() {
            acc = (acc * n + c) % p;
        }
        cs.add(cfg.ep(acc as i64));
    }
    let value = cs.mean();
    let all_zero = phis.iter().all(|&f| f % p == 0);
    let indicator = if all_zero { 1.0 } else { 0.0 };
    let gap = (value - Complex64::new(indicator, 0.0)).norm();
    let bound = match degree_mod_p {
        Some(d) if d >= 1 => Some((d as f64 - 1.0) / (p as f64).sqrt()),
        _ => None,
    };
    let ok = match bound {
        Some(b) => gap <= b + tol::INEQUALITY_SLACK,
        None => true,
    };
    Ok(WeilReport {
        gap,
        bound,
        degree_mod_p,
        ok,
    })
}

/// A complex function on `G x F_p`, stored as `values[x + order * n]`.
#[derive(Debug, Clone)]
pub struct XnFunction {
    cfg: FieldConfig,
    values: Vec<Complex64>,
    sup_bound: f64,
}

impl XnFunction {
    pub fn new(
        cfg: &FieldConfig,
        values: Vec<Complex64>,
        sup_bound: f64,
    ) -> Result<Self, CountError> {
        let expected = cfg.order() * cfg.p() as usize;
        if values.len() != expected {
            return Err(CountError::SizeMismatch {
                got: values.len(),
                expected,
            });
        }
        for v in &values {
            if v.norm() > sup_bound + tol::SUP_BOUND {
                return Err(CountError::Field(FieldError::BadSupBound(sup_bound)));
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            values,
            sup_bound,
        })
    }

    pub fn from_fn(
        cfg: &FieldConfig,
        sup_bound: f64,
        mut f: impl FnMut(usize, u64) -> Complex64,
    ) -> Result<Self, CountError> {
        let mut values = Vec::with_capacity(cfg.order() * cfg.p() as usize);
        for n in 0..cfg.p() {
            for x in 0..cfg.order() {
                values.push(f(x, n));
            }
        }
        Self::new(cfg, values, sup_bound)
    }

    pub fn cfg(&self) -> &FieldConfig {
        &self.cfg
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    #[inline]
    pub fn value(&self, x: usize, n: u64) -> Complex64 {
        self.values[x + self.cfg.order() * (n % self.cfg.p()) as usize]
    }
}

/// A dual function given by its generating data, so verifiers can insist
/// on genuine duals rather than arbitrary bounded functions.
#[derive(Debug, Clone)]
pub struct DualSpec {
    pub base: GroupFunction,
    pub direction: FpPoint,
    pub degree: usize,
}

impl DualSpec {
    pub fn realize(&self) -> Result<GroupFunction, CountError> {
        Ok(dual_function(&self.base, &self.direction, self.degree)?)
    }
}

/// Report of [`removing_duals_check`].
#[derive(Debug, Clone, Copy)]
pub struct RemovingDualsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub s: usize,
    pub ok: bool,
}

/// Dual-removal inequality: for `A` on `G x F_p` and genuine duals `D_j`
/// evaluated along integer vector offsets `q_j`,
///
/// ```text
/// |E_{x,n} A(x,n) prod_j D_j(x + q_j(n))|^{2^s}
///     <= E_{h in F_p^s} |E_{x,n} prod_{eps} C^{|eps|} A(x, n + eps.h)|
/// ```
///
/// with `s` defaulting to `(number of duals) * (max offset degree + 1)`.
pub fn removing_duals_check(
    a: &XnFunction,
    duals: &[(DualSpec, IntVecPoly)],
    s: Option<usize>,
) -> Result<RemovingDualsReport, CountError> {
    let cfg = a.cfg().clone();
    let p = cfg.p();
    let order = cfg.order();
    let max_deg = duals
        .iter()
        .map(|(_, q)| q.degree().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let s = s.unwrap_or(duals.len() * (max_deg + 1)).max(1);
    let estimate = (p as u128).pow(s as u32) * order as u128 * p as u128 * (1u128 << s);
    if estimate > cost_cap() as u128 {
        return Err(CountError::CostCap {
            estimate,
            cap: cost_cap(),
        });
    }

    // left side: the average with all duals present
    let realized: Vec<(GroupFunction, Vec<usize>)> = duals
        .iter()
        .map(|(spec, q)| {
            let d = spec.realize()?;
            if d.cfg() != &cfg {
                return Err(CountError::Field(FieldError::MismatchedConfig));
            }
            let shifts = (0..p)
                .map(|n| Ok(cfg.index_of(&eval_vec_poly(&cfg, q, n)?)))
                .collect::<Result<Vec<usize>, CountError>>()?;
            Ok((d, shifts))
        })
        .collect::<Result<Vec<_>, CountError>>()?;
    let mut cs = CSum::new();
    for n in 0..p {
        for x in 0..order {
            let mut prod = a.value(x, n);
            for (d, shifts) in &realized {
                prod *= d.value(cfg.add_index(x, shifts[n as usize]));
            }
            cs.add(prod);
        }
    }
    let lhs = cs.mean().norm().powi(1 << s);

    // right side: duals removed, A differenced along n
    let tuples = (p as usize).pow(s as u32);
    let mut outer = CSum::new();
    let mut h = vec![0u64; s];
    for mut t in 0..tuples {
        for hi in h.iter_mut() {
            *hi = (t % p as usize) as u64;
            t /= p as usize;
        }
        let mut inner = CSum::new();
        for n in 0..p {
            for x in 0..order {
                let mut prod = Complex64::new(1.0, 0.0);
                for eps in 0usize..1 << s {
                    let mut dot: u64 = 0;
                    for (i, &hi) in h.iter().enumerate() {
                        if eps & (1 << i) != 0 {
                            dot += hi;
                        }
                    }
                    let v = a.value(x, (n + dot) % p);
                    prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
                }
                inner.add(prod);
            }
        }
        outer.add_real(inner.mean().norm());
    }
    let rhs = outer.mean().re;
    Ok(RemovingDualsReport {
        lhs,
        rhs,
        s,
        ok: lhs <= rhs + tol::INEQUALITY_SLACK,
    })
}

/// Report of [`dual_difference_interchange_check`].
#[derive(Debug, Clone, Copy)]
pub struct InterchangeReport {
    /// `E_{h} E_x (difference of dual_m along (h_1 b_1, ..., h_s b_s)) u_h(x)`.
    pub premise: Complex64,
    /// The interchanged double average (real nonnegative in exact
    /// arithmetic).
    pub conclusion: f64,
    pub s: usize,
    pub ok: bool,
}

/// Dual-difference interchange: differencing the auxiliary dual along
/// directions `b_1, ..., b_s` and correlating against a family `u_h` is
/// dominated by a double shift average in which the differences act on the
/// original functions:
///
/// ```text
/// |premise|^{2^s} <= E_{h,h'} E_{x,n} prod_{j != m} (diff of f_j along (h-h').b)(x + v_j p_j(n))
///                      * prod_eps C^{|eps|} u_{h^eps}(x + v_m p_m(n) - sum_i h'_i b_i)
/// ```
///
/// where `h^eps` picks `h_i` when `eps_i = 1` and `h'_i` otherwise.  The
/// right side is exactly real and nonnegative.  `us` lists the family
/// `u_h` indexed by the little-endian tuple index of `h in F_p^s`.
pub fn dual_difference_interchange_check(
    pc: &ProgressionConfig,
    fs: &[GroupFunction],
    m: usize,
    betas: &[FpPoint],
    us: &[GroupFunction],
) -> Result<InterchangeReport, CountError> {
    pc.validate_functions(fs)?;
    if m > pc.len() {
        return Err(CountError::BadSlot(m, pc.len()));
    }
    let cfg = pc.cfg().clone();
    let p = cfg.p();
    let order = cfg.order();
    let s = betas.len();
    let l = pc.len();
    let estimate = (p as u128).pow(2 * s as u32)
        * order as u128
        * p as u128
        * ((l as u128 + 1) * (1u128 << s));
    if s == 0 || s > MAX_INTERCHANGE_ORDER {
        return Err(CountError::InterchangeOrderTooLarge {
            s,
            max: MAX_INTERCHANGE_ORDER,
            estimate,
        });
    }
    if estimate > cost_cap() as u128 {
        return Err(CountError::CostCap {
            estimate,
            cap: cost_cap(),
        });
    }
    let tuples = (p as usize).pow(s as u32);
    if us.len() != tuples {
        return Err(CountError::SizeMismatch {
            got: us.len(),
            expected: tuples,
        });
    }
    for u in us {
        if u.cfg() != &cfg {
            return Err(CountError::Field(FieldError::MismatchedConfig));
        }
    }
    let beta_idx: Vec<usize> = betas.iter().map(|b| cfg.index_of(b)).collect();
    let decode = |mut t: usize| -> Vec<u64> {
        let mut digits = vec![0u64; s];
        for d in digits.iter_mut() {
            *d = (t % p as usize) as u64;
            t /= p as usize;
        }
        digits
    };

    // premise: E_h E_x (diff of dual along h.b) u_h
    let dual = tilde_dual(pc, fs, m)?;
    let mut prem = CSum::new();
    for t in 0..tuples {
        let h = decode(t);
        // subset shifts sum_{i in eps} h_i b_i
        let mut shift = vec![0usize; 1 << s];
        for eps in 1usize..1 << s {
            let i = eps.trailing_zeros() as usize;
            shift[eps] = cfg.add_index(
                shift[eps & (eps - 1)],
                cfg.scale_index(beta_idx[i], h[i]),
            );
        }
        for x in 0..order {
            let mut prod = Complex64::new(1.0, 0.0);
            for (eps, &sh) in shift.iter().enumerate() {
                let v = dual.value(cfg.add_index(x, sh));
                prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            prem.add(prod * us[t].value(x));
        }
    }
    let premise = prem.mean();

    // conclusion: the interchanged double average
    let m_shift = |n: u64| -> usize {
        if m == 0 {
            0
        } else {
            pc.shift_index(m, n)
        }
    };
    let mut conc = CSum::new();
    for th in 0..tuples {
        let hv = decode(th);
        for tp in 0..tuples {
            let hp = decode(tp);
            // difference steps (h_i - h'_i) b_i and their subset sums
            let mut dshift = vec![0usize; 1 << s];
            for eps in 1usize..1 << s {
                let i = eps.trailing_zeros() as usize;
                let di = (hv[i] + p - hp[i]) % p;
                dshift[eps] = cfg.add_index(
                    dshift[eps & (eps - 1)],
                    cfg.scale_index(beta_idx[i], di),
                );
            }
            // sigma(h') = sum_i h'_i b_i
            let mut sigma = 0usize;
            for i in 0..s {
                sigma = cfg.add_index(sigma, cfg.scale_index(beta_idx[i], hp[i]));
            }
            let neg_sigma = cfg.neg_index(sigma);
            // u-block functions u_{h^eps} (h^eps picks h_i when eps_i = 1)
            let u_refs: Vec<&GroupFunction> = (0..1usize << s)
                .map(|eps| {
                    let mut t = 0usize;
                    for i in (0..s).rev() {
                        let digit = if eps & (1 << i) != 0 { hv[i] } else { hp[i] };
                        t = t * p as usize + digit as usize;
                    }
                    &us[t]
                })
                .collect();
            for n in 0..p {
                let msh = m_shift(n);
                let u_arg_base = cfg.add_index(msh, neg_sigma);
                for x in 0..order {
                    let mut prod = Complex64::new(1.0, 0.0);
                    for j in 0..=l {
                        if j == m {
                            continue;
                        }
                        let base = if j == 0 { x } else { cfg.add_index(x, pc.shift_index(j, n)) };
                        for (eps, &dsh) in dshift.iter().enumerate() {
                            let v = fs[j].value(cfg.add_index(base, dsh));
                            prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
                        }
                    }
                    let u_arg = cfg.add_index(x, u_arg_base);
                    for (eps, u) in u_refs.iter().enumerate() {
                        let v = u.value(u_arg);
                        prod *= if eps.count_ones() % 2 == 1 { v.conj() } else { v };
                    }
                    conc.add(prod);
                }
            }
        }
    }
    let conclusion = conc.mean();
    let ok = conclusion.re >= premise.norm().powi(1 << s) - tol::INEQUALITY_SLACK
        && conclusion.im.abs() <= tol::EXACT_IDENTITY;
    Ok(InterchangeReport {
        premise,
        conclusion: conclusion.re,
        s,
        ok,
    })
}

/// Report of [`low_complexity_check`].
#[derive(Debug, Clone, Copy)]
pub struct LowComplexityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Low-complexity correlation bound: if each weight family `g_{j,h}`
/// ignores the `j`-th shift coordinate, then
///
/// ```text
/// |E_{h in F_p^s} E_x (diff of f along (h_1 v, ..., h_s v))(x) prod_j g_{j,h}(x)|
///     <= ||f||_{U^s(v)}
/// ```
///
/// `gs[j]` lists the functions for slot `j + 1`, indexed by the
/// little-endian tuple index of `h` with coordinate `j + 1` removed
/// (hence length `p^{s-1}`); sup bounds must be at most 1.
pub fn low_complexity_check(
    f: &GroupFunction,
    v: &FpPoint,
    s: usize,
    gs: &[Vec<GroupFunction>],
) -> Result<LowComplexityReport, CountError> {
    if v.is_zero() {
        return Err(CountError::ZeroDirection);
    }
    let cfg = f.cfg().clone();
    let p = cfg.p();
    if gs.len() != s || s == 0 {
        return Err(CountError::SizeMismatch {
            got: gs.len(),
            expected: s,
        });
    }
    let reduced = (p as usize).pow(s as u32 - 1);
    for fam in gs {
        if fam.len() != reduced {
            return Err(CountError::SizeMismatch {
                got: fam.len(),
                expected: reduced,
            });
        }
        for g in fam {
            if g.cfg() != &cfg {
                return Err(CountError::Field(FieldError::MismatchedConfig));
            }
            if g.sup_bound() > 1.0 + tol::SUP_BOUND {
                return Err(CountError::Field(FieldError::BadSupBound(g.sup_bound())));
            }
        }
    }
    let v_idx = cfg.index_of(v);
    let tuples = (p as usize).pow(s as u32);
    let mut cs = CSum::new();
    let mut h = vec![0u64; s];
    for mut t in 0..tuples {
        for hi in h.iter_mut() {
            *hi = (t % p as usize) as u64;
            t /= p as usize;
        }
        // subset shifts (h.eps) v
        let mut shift = vec![0usize; 1 << s];
        for eps in 1usize..1 << s {
            let i = eps.trailing_zeros() as usize;
            shift[eps] = cfg.add_index(shift[eps & (eps - 1)], cfg.scale_index(v_idx, h[i]));
        }
        // reduced indices per slot: h with coordinate j removed
        let g_refs: Vec<&GroupFunction> = (0..s)
            .map(|j| {
                let mut t = 0usize;
                for i in (0..s).rev() {
                    if i != j {
                        t = t * p as usize + h[i] as usize;
                    }
                }
                &gs[j][t]
            })
            .collect();
        for x in 0..order_of(&cfg) {
            let mut prod = Complex64::new(1.0, 0.0);
            for (eps, &sh) in shift.iter().enumerate() {
                let val = f.value(cfg.add_index(x, sh));
                prod *= if eps.count_ones() % 2 == 1 { val.conj() } else { val };
            }
            for g in &g_refs {
                prod *= g.value(x);
            }
            cs.add(prod);
        }
    }
    let lhs = cs.mean().norm();
    let rhs = gowers_norm(f, v, s)?;
    Ok(LowComplexityReport {
        lhs,
        rhs,
        ok: lhs <= rhs + tol::INEQUALITY_SLACK,
    })
}

#[inline]
fn order_of(cfg: &FieldConfig) -> usize {
    cfg.order()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_one_bounded, RandomKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(p: u64, d: usize) -> FieldConfig {
        FieldConfig::new(p, d).unwrap()
    }

    /// x, x + v1 n^2, x + v2 (n^2 + n) in F_p^2.
    fn quad_pair(c: &FieldConfig) -> ProgressionConfig {
        ProgressionConfig::from_int_vectors(
            c,
            &[vec![1, 0], vec![0, 1]],
            vec![vec![0, 0, 1], vec![0, 1, 1]],
            None,
            true,
        )
        .unwrap()
    }

    fn random_fs(c: &FieldConfig, l: usize, seed: u64) -> Vec<GroupFunction> {
        (0..=l as u64)
            .map(|j| random_one_bounded(c, &RandomKind::Disk, seed * 100 + j).unwrap())
            .collect()
    }

    #[test]
    fn counting_operator_validates_function_count() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        let fs = random_fs(&c, 1, 0);
        assert!(matches!(
            counting_operator(&pc, &fs),
            Err(CountError::SizeMismatch { got: 2, expected: 3 })
        ));
    }

    #[test]
    fn full_set_count_is_group_times_nonzero_shifts() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        let all: Vec<usize> = (0..c.order()).collect();
        assert_eq!(progression_count(&pc, &all).unwrap(), 25 * 4);
        assert_eq!(progression_count(&pc, &[]).unwrap(), 0);
    }

    #[test]
    fn indicator_average_matches_combinatorial_count() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set: Vec<usize> = (0..c.order()).filter(|_| rng.gen::<f64>() < 0.6).collect();
            let rep = indicator_count_identity(&pc, &set).unwrap();
            assert!(rep.ok, "seed {seed}: {rep:?}");
            // theorem mode: the n = 0 term is exactly |S|
            assert_eq!(
                rep.combinatorial,
                progression_count(&pc, &set).unwrap() + set.len() as u64
            );
        }
    }

    #[test]
    fn invariant_inputs_make_the_average_structured() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        // take f_j invariant along its own line: conditional expectations
        let raw = random_fs(&c, 2, 3);
        let mut fs = vec![raw[0].clone()];
        for j in 1..=2 {
            let line = Subgroup::cyclic(&c, pc.slot_vector(j));
            fs.push(conditional_expectation(&raw[j], &line).unwrap());
        }
        let lambda = counting_operator(&pc, &fs).unwrap();
        let structured = structured_count(&pc, &fs).unwrap();
        assert!((lambda - structured).norm() < 1e-12);
    }

    #[test]
    fn tcount_gap_requires_linear_independence() {
        let c = cfg(5, 2);
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1, 0], vec![0, 1]],
            vec![vec![0, 0, 1], vec![0, 0, 2]],
            None,
            true,
        )
        .unwrap();
        let fs = random_fs(&c, 2, 1);
        let err = tcount_gap(&pc, &fs).unwrap_err();
        assert_eq!(err.to_string(), "polynomials not linearly independent");
    }

    #[test]
    fn tilde_dual_solves_the_progression_for_each_slot() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        let fs = random_fs(&c, 2, 7);
        let lambda = counting_operator(&pc, &fs).unwrap();
        for m in 0..=2 {
            let dual = tilde_dual(&pc, &fs, m).unwrap();
            let mut cs = CSum::new();
            for x in 0..c.order() {
                cs.add(fs[m].value(x) * dual.value(x).conj());
            }
            assert!(
                (lambda - cs.mean()).norm() < 1e-9,
                "slot {m}: {} vs {}",
                lambda,
                cs.mean()
            );
        }
    }

    #[test]
    fn replacement_identity_holds_for_arbitrary_g() {
        let c = cfg(5, 2);
        let pc = quad_pair(&c);
        for m in 0..=2usize {
            let fs = random_fs(&c, 2, 11 + m as u64);
            let g = random_one_bounded(&c, &RandomKind::Disk, 999 + m as u64).unwrap();
            let rep = dual_replacement_check(&pc, &fs, m, &g, 2).unwrap();
            assert!(rep.ok, "slot {m}: {rep:?}");
            if m == 0 {
                assert!(rep.part_invariant.is_none() && rep.part_dual.is_none());
            }
        }
    }

    #[test]
    fn quadratic_gauss_sum_attains_the_square_root_bound() {
        for (p, expect) in [(5u64, 5f64), (13, 13.0)] {
            let c = cfg(p, 1);
            let pc = ProgressionConfig::from_int_vectors(
                &c,
                &[vec![1]],
                vec![vec![0, 0, 1]],
                None,
                true,
            )
            .unwrap();
            let rep = weil_gap(&pc, &[1]).unwrap();
            assert!(
                (rep.gap - expect.powf(-0.5)).abs() < 1e-9,
                "p={p}: gap={}",
                rep.gap
            );
            assert!(rep.ok);
            assert_eq!(rep.degree_mod_p, Some(2));
        }
    }

    #[test]
    fn weil_gap_handles_cancellation_to_lower_degree() {
        // phi = (1, 6) against (n^2, n^2 + n) over p = 7: combined 7n^2 + 6n
        // reduces to degree 1, whose phase average vanishes exactly.
        let c = cfg(7, 2);
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1, 0], vec![0, 1]],
            vec![vec![0, 0, 1], vec![0, 1, 1]],
            None,
            true,
        )
        .unwrap();
        let rep = weil_gap(&pc, &[1, 6]).unwrap();
        assert_eq!(rep.degree_mod_p, Some(1));
        assert!(rep.gap < 1e-12);
        assert!(rep.ok);
        // zero frequencies: average is the indicator itself
        let rep0 = weil_gap(&pc, &[0, 0]).unwrap();
        assert!(rep0.gap < 1e-12);
        assert_eq!(rep0.degree_mod_p, None);
    }

    #[test]
    fn weil_gap_rejects_degrees_at_or_above_p() {
        let c = cfg(5, 1);
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1]],
            vec![vec![0, 0, 0, 0, 0, 1]], // n^5 at p = 5
            None,
            true,
        )
        .unwrap();
        let err = weil_gap(&pc, &[1]).unwrap_err();
        assert!(err.to_string().contains("Weil hypothesis violated"));
    }

    #[test]
    fn removing_duals_inequality_holds_on_random_instances() {
        let c = cfg(3, 1);
        for seed in 0..4u64 {
            let a = {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                XnFunction::from_fn(&c, 1.0, |_, _| {
                    Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)
                })
                .unwrap()
            };
            let base = random_one_bounded(&c, &RandomKind::Disk, seed + 50).unwrap();
            let dir = FpPoint::new(&c, vec![1]).unwrap();
            let duals = vec![
                (
                    DualSpec {
                        base: base.clone(),
                        direction: dir.clone(),
                        degree: 2,
                    },
                    IntVecPoly::new(1, vec![vec![0], vec![1]]).unwrap(),
                ),
                (
                    DualSpec {
                        base,
                        direction: dir,
                        degree: 1,
                    },
                    IntVecPoly::new(1, vec![vec![0], vec![0], vec![1]]).unwrap(),
                ),
            ];
            let rep = removing_duals_check(&a, &duals, Some(2)).unwrap();
            assert!(rep.ok, "seed {seed}: lhs={} rhs={}", rep.lhs, rep.rhs);
            // default order: 2 duals * (max degree 2 + 1) = 6
            std::env::set_var("ULAB_COST_CAP", "1000000000");
            let rep_default = removing_duals_check(&a, &duals, None).unwrap();
            assert_eq!(rep_default.s, 6);
            assert!(rep_default.ok);
            std::env::remove_var("ULAB_COST_CAP");
        }
    }

    #[test]
    fn interchange_inequality_holds_for_all_supported_orders() {
        let c = cfg(3, 1);
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1], vec![2]],
            vec![vec![0, 0, 1], vec![0, 1]],
            None,
            true,
        )
        .unwrap();
        for s in 1..=3usize {
            for seed in 0..6u64 {
                let fs = random_fs(&c, 2, 300 + seed);
                let betas: Vec<FpPoint> = (0..s)
                    .map(|i| FpPoint::new(&c, vec![1 + (i as u64 % 2)]).unwrap())
                    .collect();
                let us: Vec<GroupFunction> = (0..3usize.pow(s as u32))
                    .map(|t| {
                        random_one_bounded(&c, &RandomKind::Disk, 7000 + seed * 100 + t as u64)
                            .unwrap()
                    })
                    .collect();
                for m in 0..=2usize {
                    let rep =
                        dual_difference_interchange_check(&pc, &fs, m, &betas, &us).unwrap();
                    assert!(
                        rep.ok,
                        "s={s} seed={seed} m={m}: premise={} conclusion={}",
                        rep.premise, rep.conclusion
                    );
                }
            }
        }
    }

    #[test]
    fn interchange_rejects_large_orders_with_cost_estimate() {
        let c = cfg(3, 1);
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1]],
            vec![vec![0, 1]],
            None,
            true,
        )
        .unwrap();
        let fs = random_fs(&c, 1, 0);
        let betas: Vec<FpPoint> = (0..4).map(|_| FpPoint::new(&c, vec![1]).unwrap()).collect();
        let err = dual_difference_interchange_check(&pc, &fs, 1, &betas, &[]).unwrap_err();
        match err {
            CountError::InterchangeOrderTooLarge { s, estimate, .. } => {
                assert_eq!(s, 4);
                assert!(estimate > 0);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn low_complexity_bound_holds_when_weights_ignore_their_coordinate() {
        let c = cfg(3, 2);
        let v = FpPoint::new(&c, vec![1, 1]).unwrap();
        for seed in 0..4u64 {
            let f = random_one_bounded(&c, &RandomKind::Disk, seed).unwrap();
            let s = 2usize;
            let gs: Vec<Vec<GroupFunction>> = (0..s)
                .map(|j| {
                    (0..3usize)
                        .map(|t| {
                            random_one_bounded(
                                &c,
                                &RandomKind::Disk,
                                4000 + seed * 100 + (j * 10 + t) as u64,
                            )
                            .unwrap()
                        })
                        .collect()
                })
                .collect();
            let rep = low_complexity_check(&f, &v, s, &gs).unwrap();
            assert!(rep.ok, "seed {seed}: lhs={} rhs={}", rep.lhs, rep.rhs);
        }
    }

    #[test]
    fn progression_rejects_zero_vectors_and_bad_eta() {
        let c = cfg(5, 2);
        assert!(matches!(
            ProgressionConfig::from_int_vectors(&c, &[vec![0, 0]], vec![vec![0, 1]], None, true),
            Err(CountError::ZeroDirection)
        ));
        assert!(matches!(
            ProgressionConfig::from_int_vectors(
                &c,
                &[vec![1, 0]],
                vec![vec![0, 1]],
                Some(vec![2]),
                true
            ),
            Err(CountError::BadIndexMap(2, 1))
        ));
        assert!(matches!(
            ProgressionConfig::from_int_vectors(
                &c,
                &[vec![1, 0]],
                vec![vec![1, 1]],
                None,
                true
            ),
            Err(CountError::NonzeroConstantTerm)
        ));
    }

    #[test]
    fn eta_reuses_direction_vectors() {
        let c = cfg(5, 2);
        // both slots move along v_1
        let pc = ProgressionConfig::from_int_vectors(
            &c,
            &[vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![0, 0, 1]],
            Some(vec![1, 1]),
            true,
        )
        .unwrap();
        assert_eq!(pc.slot_vector(1).coords(), &[1, 0]);
        assert_eq!(pc.slot_vector(2).coords(), &[1, 0]);
        let fs = random_fs(&c, 2, 5);
        counting_operator(&pc, &fs).unwrap();
    }
}
