//! Writer/reader round trip: random models survive MPS emission with their
//! numeric content intact.

use pickbatch::formats::mps::read_mps;
use pickbatch_core::milp::{MilpModel, Sense, VarCategory};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct VarSpec {
    category: VarCategory,
    lower: f64,
    upper: f64,
}

fn var_spec() -> impl Strategy<Value = VarSpec> {
    prop_oneof![
        Just(VarSpec {
            category: VarCategory::Binary,
            lower: 0.0,
            upper: 1.0
        }),
        (0..5i32, 1..10i32).prop_map(|(lo, width)| VarSpec {
            category: VarCategory::Integer,
            lower: lo as f64,
            upper: (lo + width) as f64,
        }),
        (-10.0..10.0f64, 0.5..20.0f64).prop_map(|(lo, width)| VarSpec {
            category: VarCategory::Continuous,
            lower: (lo * 4.0).round() / 4.0,
            upper: ((lo + width) * 4.0).round() / 4.0,
        }),
        Just(VarSpec {
            category: VarCategory::Continuous,
            lower: 0.0,
            upper: f64::INFINITY
        }),
    ]
}

fn coeff() -> impl Strategy<Value = f64> {
    (-100i32..100).prop_map(|c| c as f64 / 8.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_read_preserves_coefficients(
        specs in prop::collection::vec(var_spec(), 1..8),
        rows in prop::collection::vec(
            (prop::collection::vec(coeff(), 1..8), 0..3u8, coeff()), 0..6),
        obj in prop::collection::vec(coeff(), 1..8),
    ) {
        let mut model = MilpModel::new("prop");
        let vars: Vec<_> = specs.iter().enumerate().map(|(i, s)| {
            model.add_var(format!("v{i}"), s.category, s.lower, s.upper).unwrap()
        }).collect();
        for (i, &c) in obj.iter().enumerate() {
            if i < vars.len() && c != 0.0 {
                model.add_objective_term(vars[i], c);
            }
        }
        for (ri, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            let terms: Vec<_> = coeffs.iter().enumerate()
                .filter(|&(i, &c)| i < vars.len() && c != 0.0)
                .map(|(i, &c)| (vars[i], c))
                .collect();
            let sense = match sense { 0 => Sense::Le, 1 => Sense::Eq, _ => Sense::Ge };
            model.add_constraint(format!("r{ri}"), terms, sense, *rhs);
        }

        let text = model.write_mps().unwrap();
        let back = read_mps(&text).unwrap();

        prop_assert_eq!(back.vars().len(), model.vars().len());
        for (a, b) in model.vars().iter().zip(back.vars()) {
            prop_assert_eq!(&a.name, &b.name);
            // MPS cannot tell a binary from an integer bounded to [0,1].
            let zero_one = a.lower == 0.0 && a.upper == 1.0;
            let same_kind = a.category == b.category
                || (zero_one
                    && a.category == VarCategory::Integer
                    && b.category == VarCategory::Binary);
            prop_assert!(same_kind, "category {:?} came back as {:?}", a.category, b.category);
            prop_assert!((a.lower - b.lower).abs() <= 1e-9 || (a.lower.is_infinite() && b.lower.is_infinite()));
            prop_assert!((a.upper - b.upper).abs() <= 1e-9 || (a.upper.is_infinite() && b.upper.is_infinite()));
        }
        let dense_a = model.objective_dense();
        let dense_b = back.objective_dense();
        for (a, b) in dense_a.iter().zip(&dense_b) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        prop_assert_eq!(back.constraints().len(), model.constraints().len());
        for (ca, cb) in model.constraints().iter().zip(back.constraints()) {
            prop_assert_eq!(ca.sense, cb.sense);
            prop_assert!((ca.rhs - cb.rhs).abs() <= 1e-9);
            // Compare folded coefficient rows.
            let fold = |c: &pickbatch_core::milp::ConstraintDef, n: usize| {
                let mut row = vec![0.0; n];
                for &(v, coeff) in &c.terms { row[v.index()] += coeff; }
                row
            };
            let ra = fold(ca, model.vars().len());
            let rb = fold(cb, back.vars().len());
            for (a, b) in ra.iter().zip(&rb) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
