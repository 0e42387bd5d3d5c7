//! Randomized structural invariants for the core library: group and
//! subgroup mechanics, averaging identities, norm orderings, counting
//! multilinearity, reduction-step bookkeeping, and zero-set counting.

use num_complex::Complex64;
use proptest::prelude::*;

use ulab_core::concat::zero_set_count;
use ulab_core::counting::{
    counting_operator, indicator_count_identity, progression_count, ProgressionConfig,
};
use ulab_core::field::{
    conditional_expectation, random_one_bounded, subgroup_span, subgroup_sum, FieldConfig,
    FpPoint, GroupFunction, RandomKind, Subgroup,
};
use ulab_core::norms::{box_norm, box_norm_direct, box_norm_power, line_expectation, DirectionSpec};
use ulab_core::pet::{vdc_step, MultiPoly, PolyFamily};
use ulab_core::tol;

fn small_prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(3u64), Just(5u64)]
}

fn field_cfg() -> impl Strategy<Value = FieldConfig> {
    (small_prime(), 1usize..=2).prop_map(|(p, d)| FieldConfig::new(p, d).unwrap())
}

fn kind(tag: u8, density: f64) -> RandomKind {
    match tag % 3 {
        0 => RandomKind::UnitPhase,
        1 => RandomKind::Disk,
        _ => RandomKind::Indicator { density },
    }
}

fn function(cfg: &FieldConfig, tag: u8, seed: u64) -> GroupFunction {
    random_one_bounded(cfg, &kind(tag, 0.5), seed).unwrap()
}

fn point(cfg: &FieldConfig, index: usize) -> FpPoint {
    cfg.point_of(index % cfg.order())
}

fn nonzero_point(cfg: &FieldConfig, index: usize) -> FpPoint {
    cfg.point_of(1 + index % (cfg.order() - 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // ------------------------------------------------------------------
    // subgroup mechanics

    #[test]
    fn spans_are_closed_under_addition_and_negation(
        cfg in field_cfg(), a in 0usize..25, b in 0usize..25
    ) {
        let h = subgroup_span(&cfg, &[point(&cfg, a), point(&cfg, b)]);
        for &x in h.elements() {
            for &y in h.elements() {
                prop_assert!(h.contains(cfg.add_index(x, y)));
            }
            let xp = cfg.point_of(x);
            let neg: Vec<u64> = xp.coords().iter().map(|&c| (cfg.p() - c) % cfg.p()).collect();
            prop_assert!(h.contains(cfg.index_of(&FpPoint::new(&cfg, neg).unwrap())));
        }
        prop_assert!(h.contains(0));
        prop_assert_eq!(cfg.order() % h.len(), 0);
    }

    #[test]
    fn sum_of_subgroups_is_the_smallest_containing_both(
        cfg in field_cfg(), a in 0usize..25, b in 0usize..25
    ) {
        let ha = Subgroup::cyclic(&cfg, &point(&cfg, a));
        let hb = Subgroup::cyclic(&cfg, &point(&cfg, b));
        let sum = subgroup_sum(&ha, &hb).unwrap();
        for &x in ha.elements() {
            prop_assert!(sum.contains(x));
        }
        for &x in hb.elements() {
            prop_assert!(sum.contains(x));
        }
        // every element is a sum of one from each
        for &x in sum.elements() {
            let ok = ha.elements().iter().any(|&u| {
                hb.elements().iter().any(|&v| cfg.add_index(u, v) == x)
            });
            prop_assert!(ok);
        }
    }

    // ------------------------------------------------------------------
    // averaging identities

    #[test]
    fn coset_averaging_is_a_mean_preserving_projection(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000, a in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let h = Subgroup::cyclic(&cfg, &point(&cfg, a));
        let once = conditional_expectation(&f, &h).unwrap();
        let twice = conditional_expectation(&once, &h).unwrap();
        for x in 0..cfg.order() {
            prop_assert!((once.value(x) - twice.value(x)).norm() <= tol::EXACT_IDENTITY);
        }
        prop_assert!((once.mean() - f.mean()).norm() <= tol::MEAN_PRESERVATION * 10.0);
        // constant on cosets
        for x in 0..cfg.order() {
            for &k in h.elements() {
                let y = cfg.add_index(x, k);
                prop_assert!((once.value(x) - once.value(y)).norm() <= tol::EXACT_IDENTITY);
            }
        }
    }

    #[test]
    fn line_averages_agree_with_coset_averages(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000, a in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let v = nonzero_point(&cfg, a);
        let line = line_expectation(&f, &v).unwrap();
        let coset = conditional_expectation(&f, &Subgroup::cyclic(&cfg, &v)).unwrap();
        for x in 0..cfg.order() {
            prop_assert!((line.value(x) - coset.value(x)).norm() <= tol::EXACT_IDENTITY);
        }
    }

    // ------------------------------------------------------------------
    // norm orderings and recursions

    #[test]
    fn recursive_and_direct_norm_paths_agree(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000,
        a in 0usize..25, b in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let spec = DirectionSpec::new(vec![
            Subgroup::cyclic(&cfg, &point(&cfg, a)),
            Subgroup::cyclic(&cfg, &point(&cfg, b)),
        ]).unwrap();
        let rec = box_norm(&f, &spec).unwrap();
        let direct = box_norm_direct(&f, &spec).unwrap();
        prop_assert!((rec - direct).abs() <= 1e-10, "rec {rec} direct {direct}");
    }

    #[test]
    fn appending_directions_never_shrinks_the_norm(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000,
        a in 0usize..25, b in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let h1 = Subgroup::cyclic(&cfg, &nonzero_point(&cfg, a));
        let h2 = Subgroup::cyclic(&cfg, &nonzero_point(&cfg, b));
        let n1 = box_norm(&f, &DirectionSpec::new(vec![h1.clone()]).unwrap()).unwrap();
        let n2 = box_norm(&f, &DirectionSpec::new(vec![h1, h2]).unwrap()).unwrap();
        prop_assert!(n1 <= n2 + tol::INEQUALITY_SLACK);
    }

    #[test]
    fn shrinking_a_direction_subgroup_never_shrinks_the_norm(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000,
        a in 0usize..25, b in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let v = nonzero_point(&cfg, a);
        let big = subgroup_span(&cfg, &[v.clone(), point(&cfg, b)]);
        let small = Subgroup::cyclic(&cfg, &v);
        let nb = box_norm(&f, &DirectionSpec::new(vec![big]).unwrap()).unwrap();
        let ns = box_norm(&f, &DirectionSpec::new(vec![small]).unwrap()).unwrap();
        prop_assert!(nb <= ns + tol::INEQUALITY_SLACK);
    }

    #[test]
    fn peeling_the_first_direction_reproduces_the_norm_power(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000,
        a in 0usize..25, b in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let h1 = Subgroup::cyclic(&cfg, &point(&cfg, a));
        let h2 = Subgroup::cyclic(&cfg, &point(&cfg, b));
        let full = box_norm_power(
            &f,
            &DirectionSpec::new(vec![h1.clone(), h2.clone()]).unwrap(),
        ).unwrap();
        let mut acc = 0.0;
        for &k in h1.elements() {
            acc += box_norm_power(
                &f.difference(k),
                &DirectionSpec::new(vec![h2.clone()]).unwrap(),
            ).unwrap();
        }
        let peeled = acc / h1.len() as f64;
        prop_assert!((full - peeled).abs() <= tol::EXACT_IDENTITY);
    }

    #[test]
    fn direction_order_is_irrelevant(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000,
        a in 0usize..25, b in 0usize..25
    ) {
        let f = function(&cfg, tag, seed);
        let h1 = Subgroup::cyclic(&cfg, &point(&cfg, a));
        let h2 = Subgroup::cyclic(&cfg, &point(&cfg, b));
        let fwd = box_norm(&f, &DirectionSpec::new(vec![h1.clone(), h2.clone()]).unwrap()).unwrap();
        let rev = box_norm(&f, &DirectionSpec::new(vec![h2, h1]).unwrap()).unwrap();
        prop_assert!((fwd - rev).abs() <= 1e-10);
    }

    // ------------------------------------------------------------------
    // counting operator structure

    #[test]
    fn pattern_average_is_linear_in_each_slot(
        cfg in field_cfg(), tag in 0u8..3, seed in 0u64..1_000, slot in 0usize..2
    ) {
        let pc = ProgressionConfig::from_int_vectors(
            &cfg,
            &[vec![1; cfg.dimension()]],
            vec![vec![0, 0, 1]],
            None,
            true,
        ).unwrap();
        let mut fs: Vec<GroupFunction> = (0..2)
            .map(|j| function(&cfg, tag, seed * 7 + j as u64))
            .collect();
        let g = function(&cfg, tag.wrapping_add(1), seed * 7 + 5);
        let base = counting_operator(&pc, &fs).unwrap();
        let old = fs[slot].clone();
        fs[slot] = g.clone();
        let swapped = counting_operator(&pc, &fs).unwrap();
        // sum slot: value[x] = (old + g)/2 stays 1-bounded
        let avg_values: Vec<Complex64> = (0..cfg.order())
            .map(|x| (old.value(x) + g.value(x)) / 2.0)
            .collect();
        fs[slot] = GroupFunction::new(&cfg, avg_values, 1.0).unwrap();
        let averaged = counting_operator(&pc, &fs).unwrap();
        prop_assert!(
            (averaged - (base + swapped) / 2.0).norm() <= tol::EXACT_IDENTITY,
            "slot averaging must average the pattern count"
        );
    }

    #[test]
    fn indicator_average_matches_the_combinatorial_count(
        cfg in field_cfg(), seed in 0u64..1_000, density in 0.2f64..0.9
    ) {
        let pc = ProgressionConfig::from_int_vectors(
            &cfg,
            &[vec![1; cfg.dimension()]],
            vec![vec![0, 0, 1]],
            None,
            true,
        ).unwrap();
        let set: Vec<usize> = (0..cfg.order())
            .filter(|&x| {
                let mix = (seed ^ (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)) % 1000;
                (mix as f64) < density * 1000.0
            })
            .collect();
        let rep = indicator_count_identity(&pc, &set).unwrap();
        prop_assert!(rep.ok, "gap {}", rep.gap);
        // the identity count = moving instances (n != 0) + stationary ones
        let moving = progression_count(&pc, &set).unwrap();
        let mut member = vec![false; cfg.order()];
        for &i in &set {
            member[i] = true;
        }
        let stationary = (0..cfg.order())
            .filter(|&x| {
                member[x]
                    && (1..=pc.len()).all(|j| member[cfg.add_index(x, pc.shift_index(j, 0))])
            })
            .count() as u64;
        prop_assert_eq!(rep.combinatorial, moving + stationary);
    }

    // ------------------------------------------------------------------
    // reduction-step bookkeeping

    #[test]
    fn difference_families_stay_small_and_lose_weight(
        c1 in 1i64..4, c2 in 1i64..4, lin in 0i64..3
    ) {
        // family {c1*n^2*e1, (c2*n^2 + lin*n)*e2} in D=2
        let q1 = MultiPoly::from_terms(2, 1, [(vec![2u32], vec![c1, 0])]).unwrap();
        let q2 = MultiPoly::from_terms(
            2,
            1,
            [(vec![2u32], vec![0, c2]), (vec![1u32], vec![0, lin])],
        ).unwrap();
        let family = PolyFamily::new(vec![q1, q2], vec![1, 2], 0).unwrap();
        prop_assert!(family.is_nice());
        for m in 1..=family.len() {
            let next = vdc_step(&family, m).unwrap();
            prop_assert!(next.len() <= 2 * family.len(), "|dQ| <= 2|Q|");
            prop_assert!(next.h_count() == family.h_count() + 1);
            prop_assert!(
                next.weight().is_strictly_less_than(&family.weight()),
                "pivot {m}: weight must strictly decrease"
            );
        }
    }

    // ------------------------------------------------------------------
    // zero-set counting

    #[test]
    fn zero_sets_of_disjoint_factors_obey_inclusion_exclusion(
        p in small_prime(), a in 1i64..3, b in 1i64..3, e1 in 1u32..3, e2 in 1u32..3
    ) {
        // g depends on h1 only, k on h2 only; vars = (n, h1, h2)
        let g = MultiPoly::from_terms(1, 3, [
            (vec![0, e1, 0], vec![a]),
            (vec![0, 0, 0], vec![1]),
        ]).unwrap();
        let k = MultiPoly::from_terms(1, 3, [(vec![0, 0, e2], vec![b])]).unwrap();
        let ng = zero_set_count(&g, p).unwrap();
        let nk = zero_set_count(&k, p).unwrap();
        let nprod = zero_set_count(&g.mul(&k).unwrap(), p).unwrap();
        // product vanishes where either factor does; the joint zero count
        // factors because the variables are disjoint: ng*nk/p^2 pairs
        prop_assert_eq!(nprod * p * p, (ng + nk) * p * p - ng * nk);
    }

    #[test]
    fn zero_counts_are_invariant_under_variable_swap(
        p in small_prime(), a in 1i64..3, b in 1i64..3
    ) {
        let g = MultiPoly::from_terms(1, 3, [
            (vec![0, 2, 0], vec![a]),
            (vec![0, 0, 1], vec![b]),
        ]).unwrap();
        let swapped = MultiPoly::from_terms(1, 3, [
            (vec![0, 0, 2], vec![a]),
            (vec![0, 1, 0], vec![b]),
        ]).unwrap();
        prop_assert_eq!(
            zero_set_count(&g, p).unwrap(),
            zero_set_count(&swapped, p).unwrap()
        );
    }
}
