use std::collections::BTreeMap;

use proptest::prelude::*;
use subeq_core::bunching::{bunching_margin, BunchingMode};
use subeq_core::linalg::{log_phi_s, phi_s};
use subeq_core::mixing::{dbar, eps_ae_filter, vwb_scan, LabelDistribution, Partition};
use subeq_core::potential::{check_submultiplicativity, PotentialKind, WordPotential};
use subeq_core::thermo::{pressure_estimate, CylinderWeights};
use subeq_core::{FiniteRangeCocycle, Matrix, PointSpec, Sft, Word};

fn matrix2() -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(-2.0f64..2.0)
        .prop_map(|e| Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]).unwrap())
        .prop_filter("invertible", |m| m.det().abs() > 0.05)
}

fn positive2() -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(0.1f64..2.0)
        .prop_map(|e| Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]).unwrap())
        .prop_filter("invertible", |m| m.det().abs() > 0.05)
}

fn matrix3() -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0f64..2.0, 9)
        .prop_map(|e| Matrix::from_fn(3, |i, j| e[3 * i + j]))
        .prop_filter("invertible", |m| m.det().abs() > 0.05)
}

fn distribution(n: usize) -> impl Strategy<Value = LabelDistribution> {
    prop::collection::btree_map(prop::collection::vec(0u32..2, n), 0.05f64..1.0, 1..6)
        .prop_map(move |m| LabelDistribution::normalized(n, m).unwrap())
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 1..=max).prop_map(Word::new)
}

fn radius_one_cocycle() -> impl Strategy<Value = FiniteRangeCocycle> {
    prop::collection::vec(matrix2(), 4).prop_map(|ms| {
        let sft = Sft::full_shift(2).unwrap();
        let table: BTreeMap<Word, Matrix> = sft.enumerate_words(2).unwrap().into_iter().zip(ms).collect();
        FiniteRangeCocycle::new(sft, 2, 1, 1.0, table).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dbar_is_a_metric(x in distribution(3), y in distribution(3), z in distribution(3)) {
        let xy = dbar(&x, &y).unwrap().value;
        let yx = dbar(&y, &x).unwrap().value;
        let xz = dbar(&x, &z).unwrap().value;
        let zy = dbar(&z, &y).unwrap().value;
        prop_assert!(dbar(&x, &x).unwrap().value == 0.0);
        prop_assert!((xy - yx).abs() < 1e-12);
        prop_assert!(xy <= xz + zy + 1e-12);
        prop_assert!((0.0..=1.0).contains(&xy));
    }

    #[test]
    fn dbar_certificate_is_tight(x in distribution(4), y in distribution(4)) {
        let r = dbar(&x, &y).unwrap();
        prop_assert!(r.gap < 1e-10);
        prop_assert!(r.dual_infeasibility < 1e-10);
        prop_assert!(r.coupling.marginal_error() < 1e-12);
    }

    #[test]
    fn filter_bound_holds(
        masses in prop::collection::vec(0.01f64..1.0, 1..20),
        shares in prop::collection::vec(0.0f64..=1.0, 20),
        delta in 0.01f64..=1.0,
    ) {
        let total: f64 = masses.iter().sum();
        let atoms: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let inter: Vec<f64> = atoms.iter().zip(&shares).map(|(a, s)| a * s).collect();
        let b: f64 = inter.iter().sum();
        let r = eps_ae_filter(&atoms, &inter, b, delta).unwrap();
        prop_assert!(!r.violated);
        prop_assert!(r.bad_mass <= r.eps / delta + 1e-12);
    }

    #[test]
    fn pressure_is_fekete(a in positive2(), b in positive2()) {
        let coc = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![a, b]).unwrap();
        let pot = WordPotential::from_cocycle(coc, PotentialKind::Norm).unwrap();
        let r = pressure_estimate(&pot, 6).unwrap();
        prop_assert!(r.fekete_defect <= 1e-9);
        prop_assert!(r.extrapolated <= r.upper_bound + 1e-12);
        if let Some(lower) = r.lower_bound {
            prop_assert!(lower <= r.upper_bound + 1e-9);
        }
    }

    #[test]
    fn cocycle_law(coc in radius_one_cocycle(), past in word(3), core in word(4), future in word(3), m in 0usize..5, n in 0usize..5) {
        let x = PointSpec::new(past, core, future, 0).unwrap();
        let whole = coc.point_product(&x, m + n).unwrap();
        let split = &coc.point_product(&x.shift(m as i64), n).unwrap() * &coc.point_product(&x, m).unwrap();
        prop_assert!(whole.dist(&split) <= 1e-9 * (1.0 + whole.norm()));
    }

    #[test]
    fn phi_s_is_submultiplicative(a in matrix3(), b in matrix3(), s in 0.0f64..4.0) {
        let lhs = log_phi_s(&(&a * &b), s).unwrap();
        let rhs = log_phi_s(&a, s).unwrap() + log_phi_s(&b, s).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
        prop_assert!(phi_s(&a, 0.0).unwrap() == 1.0);
    }

    #[test]
    fn potential_audit_passes(coc in radius_one_cocycle(), s in 0.0f64..2.0) {
        let pot = WordPotential::from_cocycle(coc, PotentialKind::SingularValue(s)).unwrap();
        prop_assert!(check_submultiplicativity(&pot, 4).unwrap().passed());
    }

    #[test]
    fn bunching_is_scale_invariant(coc in radius_one_cocycle(), c in 0.1f64..10.0) {
        let scaled_table = coc.table().iter().map(|(w, m)| (w.clone(), m.scale(c))).collect();
        let scaled = FiniteRangeCocycle::new(coc.sft().clone(), 2, 1, 1.0, scaled_table).unwrap();
        let r1 = bunching_margin(&coc, BunchingMode::Fiber);
        let r2 = bunching_margin(&scaled, BunchingMode::Fiber);
        prop_assert!((r1.worst - r2.worst).abs() <= 1e-9 * r1.worst);
        prop_assert_eq!(r1.passed, r2.passed);
    }

    #[test]
    fn markov_dependence_is_monotone(p in 0.55f64..0.95, q in 0.55f64..0.95) {
        let t = Matrix::from_rows(&[[p, 1.0 - p], [1.0 - q, q]]).unwrap();
        let model = CylinderWeights::markov(&t, 12).unwrap();
        let xi = Partition::zero_coordinate(&Sft::full_shift(2).unwrap()).unwrap();
        let values: Vec<f64> =
            (1..=6).map(|m| vwb_scan(&model, &xi, 3, m, m, 0.05).unwrap().worst_dbar).collect();
        for pair in values.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12, "{values:?}");
        }
    }
}
