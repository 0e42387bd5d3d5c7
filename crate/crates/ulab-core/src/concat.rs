//! Concatenation inequalities for box norms.
//!
//! An average of box norms along *varying* small subgroups can be bounded by
//! box norms along *sums* of those subgroups, at the cost of raising the
//! left side to a power and, when the sums are compared against a single
//! fixed span, of an additive exception term measuring how often the
//! varying subgroups fail to generate the span.  This module verifies the
//! degree-1 inequality, the general merge step, and the polynomial-direction
//! consequence, together with the exact zero-set counts that control the
//! exception terms.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::counting::cost_cap;
use crate::csum::CSum;
use crate::field::{
    subgroup_span, subgroup_sum, FieldConfig, FieldError, GroupFunction, Subgroup,
};
use crate::norms::{box_norm_power, DirectionSpec, NormError};
use crate::pet::{MultiPoly, PetError};
use crate::tol;

#[derive(Debug, Error)]
pub enum ConcatError {
    #[error("function sup bound {0} exceeds 1")]
    NotOneBounded(f64),
    #[error("subgroup family rows must be nonempty and of uniform length")]
    FamilyShape,
    #[error("family degree {0} exceeds the supported maximum {1}")]
    DegreeTooLarge(usize, usize),
    #[error("expected {expected} entries, got {got}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("polynomial is not scalar-valued")]
    NotScalar,
    #[error("polynomial depends on the progression variable")]
    DependsOnN,
    #[error("{0} variables exceed the enumeration limit {1}")]
    TooManyVariables(usize, usize),
    #[error("constant mod {0}")]
    ConstantModP(u64),
    #[error("multiple nonconstant polynomial directions are not supported")]
    NonconstantPair,
    #[error("cost estimate {estimate} multiply-adds exceeds cap {cap}")]
    CostCap { estimate: u128, cap: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Poly(#[from] PetError),
}

/// Largest per-index subgroup count accepted by [`concat_main_check`]
/// (the right-hand norms have `2s + 1` directions).
pub const MAX_MAIN_DEGREE: usize = 2;

/// Largest variable count enumerated exhaustively by [`zero_set_count`].
pub const MAX_ZERO_SET_VARS: usize = 6;

/// An indexed family of subgroup tuples: one list of `s` subgroups per
/// index, all over the same group.
#[derive(Debug, Clone)]
pub struct SubgroupFamily {
    cfg: FieldConfig,
    rows: Vec<Vec<Subgroup>>,
}

impl SubgroupFamily {
    pub fn new(cfg: &FieldConfig, rows: Vec<Vec<Subgroup>>) -> Result<Self, ConcatError> {
        if rows.is_empty() {
            return Err(ConcatError::FamilyShape);
        }
        let s = rows[0].len();
        for row in &rows {
            if row.len() != s {
                return Err(ConcatError::FamilyShape);
            }
            for sub in row {
                if sub.cfg() != cfg {
                    return Err(ConcatError::Field(FieldError::MismatchedConfig));
                }
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            rows,
        })
    }

    pub fn cfg(&self) -> &FieldConfig {
        &self.cfg
    }

    /// Number of indices.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty families
    }

    /// Number of subgroups per index.
    pub fn degree(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[Subgroup] {
        &self.rows[i]
    }
}

/// Two sides of a concatenation inequality.
#[derive(Debug, Clone, Copy)]
pub struct ConcatReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

fn check_one_bounded(f: &GroupFunction) -> Result<(), ConcatError> {
    if f.sup_bound() > 1.0 + tol::SUP_BOUND {
        return Err(ConcatError::NotOneBounded(f.sup_bound()));
    }
    Ok(())
}

/// Degree-1 concatenation: the square of an averaged degree-1 box energy is
/// at most the pair-averaged energy along summed subgroups,
///
/// ```text
/// (E_i ||f||_{H_i}^2)^2  <=  E_{i,i'} ||f||_{H_i + H_{i'}}^2.
/// ```
pub fn concat_deg1_check(
    f: &GroupFunction,
    fam: &SubgroupFamily,
) -> Result<ConcatReport, ConcatError> {
    if fam.degree() != 1 {
        return Err(ConcatError::SizeMismatch {
            got: fam.degree(),
            expected: 1,
        });
    }
    let extra: Vec<Subgroup> = (0..fam.len()).map(|i| fam.row(i)[0].clone()).collect();
    let empty = SubgroupFamily::new(fam.cfg(), vec![Vec::new(); fam.len()])?;
    concat_main_check(f, &empty, &extra)
}

/// General merge step: for per-index subgroups `H_i, K_{i1}, ..., K_{is}`,
///
/// ```text
/// (E_i ||f||_{H_i, K_{i1..is}}^{2^{s+1}})^{2^{2s+1}}
///     <=  E_{i,i'} ||f||_{K_{i1..is}, K_{i'1..i's}, H_i + H_{i'}}^{2^{2s+1}},
/// ```
///
/// which concatenates the `H` groups while doubling the `K` block.  `fam`
/// holds the `K` lists (possibly of length zero, recovering the degree-1
/// statement) and `extra` the per-index `H_i`.
pub fn concat_main_check(
    f: &GroupFunction,
    fam: &SubgroupFamily,
    extra: &[Subgroup],
) -> Result<ConcatReport, ConcatError> {
    let s = fam.degree();
    if s > MAX_MAIN_DEGREE {
        return Err(ConcatError::DegreeTooLarge(s, MAX_MAIN_DEGREE));
    }
    if extra.len() != fam.len() {
        return Err(ConcatError::SizeMismatch {
            got: extra.len(),
            expected: fam.len(),
        });
    }
    if f.cfg() != fam.cfg() || extra.iter().any(|h| h.cfg() != fam.cfg()) {
        return Err(ConcatError::Field(FieldError::MismatchedConfig));
    }
    check_one_bounded(f)?;

    let order = f.cfg().order() as u128;
    let mut estimate: u128 = 0;
    for i in 0..fam.len() {
        let mut prod = extra[i].len() as u128;
        for k in fam.row(i) {
            prod *= k.len() as u128;
        }
        estimate += order * prod;
    }
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            let mut prod: u128 = 1;
            for k in fam.row(i).iter().chain(fam.row(j)) {
                prod *= k.len() as u128;
            }
            prod *= order; // upper bound for |H_i + H_j|
            estimate += order * prod;
        }
    }
    if estimate > cost_cap() as u128 {
        return Err(ConcatError::CostCap {
            estimate,
            cap: cost_cap(),
        });
    }

    let mut left = CSum::new();
    for i in 0..fam.len() {
        let mut dirs = vec![extra[i].clone()];
        dirs.extend(fam.row(i).iter().cloned());
        left.add_real(box_norm_power(f, &DirectionSpec::new(dirs)?)?);
    }
    let lhs = left.mean().re.max(0.0).powi(1 << (2 * s + 1));

    let mut right = CSum::new();
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            let mut dirs: Vec<Subgroup> = fam.row(i).to_vec();
            dirs.extend(fam.row(j).iter().cloned());
            dirs.push(subgroup_sum(&extra[i], &extra[j])?);
            right.add_real(box_norm_power(f, &DirectionSpec::new(dirs)?)?);
        }
    }
    let rhs = right.mean().re;

    Ok(ConcatReport {
        lhs,
        rhs,
        ok: lhs <= rhs + tol::INEQUALITY_SLACK,
    })
}

/// Exact number of roots of a scalar integer polynomial over `F_p^s`,
/// where `s` is its shift-variable count.  The polynomial must not involve
/// the progression variable and must be nonconstant after reducing its
/// coefficients mod `p`.
pub fn zero_set_count(g: &MultiPoly, p: u64) -> Result<u64, ConcatError> {
    if g.dimension() != 1 {
        return Err(ConcatError::NotScalar);
    }
    if g.terms().any(|(key, _)| key[0] != 0) {
        return Err(ConcatError::DependsOnN);
    }
    let s = g.vars() - 1;
    if s > MAX_ZERO_SET_VARS {
        return Err(ConcatError::TooManyVariables(s, MAX_ZERO_SET_VARS));
    }
    let cfg = FieldConfig::new(p, 1)?;
    let nonconstant = g
        .terms()
        .any(|(key, coeff)| key[1..].iter().any(|&e| e > 0) && coeff[0].rem_euclid(p as i64) != 0);
    if !nonconstant {
        return Err(ConcatError::ConstantModP(p));
    }
    let tuples = (p as usize).pow(s as u32);
    let mut hs = vec![0u64; s];
    let mut count = 0u64;
    for mut t in 0..tuples {
        for h in hs.iter_mut() {
            *h = (t % p as usize) as u64;
            t /= p as usize;
        }
        if g.eval(&cfg, 0, &hs)?.coords()[0] == 0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Report of [`polynomial_concat_check`].
#[derive(Debug, Clone)]
pub struct PolyConcatReport {
    /// The averaged varying-direction energy raised to the measured power.
    pub lhs: f64,
    /// The energy along the coefficient spans.
    pub rhs: f64,
    pub ok: bool,
    /// Fraction of shift tuples whose evaluated directions fail to span the
    /// full coefficient groups.
    pub exception_fraction: f64,
    /// The measured left-side exponent (a power of two).
    pub power: u32,
    /// `exception_fraction * p` — the constant in the `1/p` decay of the
    /// exception term.
    pub constant: f64,
    /// The coefficient spans, one per direction.
    pub groups: Vec<Subgroup>,
}

/// Bound an average of box energies along polynomial directions by the
/// energy along the spans of their coefficient vectors:
///
/// ```text
/// (E_h ||f||^{2^s}_{c_1(h), ..., c_s(h)})^{2^k}
///     <=  ||f||^{2^s}_{G_1, ..., G_s} + exception_fraction,
/// ```
///
/// with `G_j` the span of the reduced coefficient vectors of `c_j` and
/// `2^k` the number of independent shift tuples needed for the evaluated
/// directions to generate the spans generically.  For one direction the
/// full chain of degree-1 merges is replayed: `k` is the smallest integer
/// with `2^k` at least the number of surviving monomials, and the
/// exception fraction is computed exactly by dynamic programming over the
/// reachable partial spans.  Several directions are supported only when
/// constant (where no merging is needed and the bound is an identity).
pub fn polynomial_concat_check(
    f: &GroupFunction,
    dirs: &[MultiPoly],
) -> Result<PolyConcatReport, ConcatError> {
    let cfg = f.cfg();
    let s = dirs.len();
    if s == 0 || s > MAX_MAIN_DEGREE {
        return Err(ConcatError::DegreeTooLarge(s.max(1), MAX_MAIN_DEGREE));
    }
    let vars = dirs[0].vars();
    for c in dirs {
        if c.dimension() != cfg.dimension() || c.vars() != vars {
            return Err(ConcatError::SizeMismatch {
                got: c.vars(),
                expected: vars,
            });
        }
        if c.terms().any(|(key, _)| key[0] != 0) {
            return Err(ConcatError::DependsOnN);
        }
    }
    let s_prime = vars - 1;
    if s_prime > MAX_ZERO_SET_VARS {
        return Err(ConcatError::TooManyVariables(s_prime, MAX_ZERO_SET_VARS));
    }
    check_one_bounded(f)?;

    let p = cfg.p();
    // coefficient spans G_j over the reduced, surviving coefficient vectors
    let mut groups = Vec::with_capacity(s);
    let mut monomials = Vec::with_capacity(s);
    for c in dirs {
        let mut gens = Vec::new();
        for (_, coeff) in c.terms() {
            let point = cfg.reduce_int_vec(coeff)?;
            if !point.is_zero() {
                gens.push(point);
            }
        }
        monomials.push(gens.len());
        groups.push(subgroup_span(cfg, &gens));
    }
    let rhs = box_norm_power(f, &DirectionSpec::new(groups.clone())?)?;

    let h_tuples = (p as usize).pow(s_prime as u32);
    let mut hs = vec![0u64; s_prime];
    let mut value_groups: Vec<Vec<Subgroup>> = Vec::with_capacity(h_tuples);
    let mut left = CSum::new();
    for mut t in 0..h_tuples {
        for h in hs.iter_mut() {
            *h = (t % p as usize) as u64;
            t /= p as usize;
        }
        let evaluated: Vec<Subgroup> = dirs
            .iter()
            .map(|c| Ok(Subgroup::cyclic(cfg, &c.eval(cfg, 0, &hs)?)))
            .collect::<Result<_, ConcatError>>()?;
        left.add_real(box_norm_power(f, &DirectionSpec::new(evaluated.clone())?)?);
        value_groups.push(evaluated);
    }
    let average = left.mean().re.max(0.0);

    let constant_dirs = dirs
        .iter()
        .all(|c| c.terms().all(|(key, _)| key[1..].iter().all(|&e| e == 0)));

    let (power, exception_fraction) = if s == 1 {
        // replay the iterated degree-1 merges: 2^k tuple slots, exact
        // span-reachability count by dynamic programming
        let a = monomials[0];
        let k = if a <= 1 {
            0
        } else {
            usize::BITS - (a - 1).leading_zeros()
        };
        let slots = 1usize << k;
        let mut states: BTreeMap<Vec<usize>, (Subgroup, u128)> = BTreeMap::new();
        let trivial = subgroup_span(cfg, &[]);
        states.insert(trivial.elements().to_vec(), (trivial, 1));
        for _ in 0..slots {
            let mut next: BTreeMap<Vec<usize>, (Subgroup, u128)> = BTreeMap::new();
            for (span, count) in states.values() {
                for row in &value_groups {
                    let merged = subgroup_sum(span, &row[0])?;
                    let entry = next
                        .entry(merged.elements().to_vec())
                        .or_insert_with(|| (merged, 0));
                    entry.1 += count;
                }
            }
            states = next;
        }
        let total: u128 = states.values().map(|(_, c)| c).sum();
        let good = states
            .get(groups[0].elements())
            .map(|(_, c)| *c)
            .unwrap_or(0);
        (1u32 << k, ((total - good) as f64) / (total as f64))
    } else if constant_dirs {
        // constant directions evaluate to their own spans at every h, so
        // no merge step is needed and no exceptions arise
        (1, 0.0)
    } else {
        return Err(ConcatError::NonconstantPair);
    };

    let lhs = average.powi(power as i32);
    Ok(PolyConcatReport {
        lhs,
        rhs,
        ok: lhs <= rhs + exception_fraction + tol::INEQUALITY_SLACK,
        exception_fraction,
        power,
        constant: exception_fraction * p as f64,
        groups,
    })
}
