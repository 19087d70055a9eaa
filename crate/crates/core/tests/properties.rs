use std::collections::BTreeMap;

use nmodal::formula::{closure_of, parse, print, Formula, Schema};
use nmodal::nmatrix::{builtin_matrix, check_consequence, enumerate_valuations, Builtin, Nmatrix};
use proptest::prelude::*;

fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::var("p")),
        Just(Formula::var("q")),
        Just(Formula::var("r"))
    ];
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            inner.clone().prop_map(Formula::boxed),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn valid(premises: &[Formula], c: &Formula, m: &Nmatrix) -> bool {
    check_consequence(premises, c, m).unwrap().is_valid()
}

/// Every total assignment of values to the closure that respects the
/// tables, tried exhaustively.
fn naive_valid(premises: &[Formula], c: &Formula, m: &Nmatrix) -> bool {
    let closure = closure_of(premises.iter().chain([c]));
    let items = closure.items();
    let k = items.len();
    let n = m.len();
    let mut assign = vec![0usize; k];
    let pos = |f: &Formula| items.iter().position(|g| g == f).unwrap();
    loop {
        let vals: Vec<_> = assign
            .iter()
            .map(|&i| m.all_values().nth(i).unwrap())
            .collect();
        let respects = items.iter().enumerate().all(|(i, f)| match f {
            Formula::Var(_) => true,
            Formula::Neg(a) => m.neg(vals[pos(a)]).contains(vals[i]),
            Formula::Box(a) => m.box_of(vals[pos(a)]).contains(vals[i]),
            Formula::Impl(a, b) => m.imp(vals[pos(a)], vals[pos(b)]).contains(vals[i]),
        });
        if respects {
            let premises_hold = premises.iter().all(|p| m.is_designated(vals[pos(p)]));
            if premises_hold && !m.is_designated(vals[pos(c)]) {
                return false;
            }
        }
        let mut d = 0;
        loop {
            if d == k {
                return true;
            }
            assign[d] += 1;
            if assign[d] < n {
                break;
            }
            assign[d] = 0;
            d += 1;
        }
    }
}

#[test]
fn hyperintensionality_witnesses() {
    let w = builtin_matrix("W").unwrap();
    assert!(valid(&[], &parse("p <-> ~~p").unwrap(), &w));
    let v = check_consequence(&[], &parse("[]p -> []~~p").unwrap(), &w).unwrap();
    let witness = v.witness().expect("W-invalid");
    assert!(!w.is_designated(witness.get(&parse("[]p -> []~~p").unwrap()).unwrap()));

    let tbat = builtin_matrix("TBAT").unwrap();
    let v = check_consequence(&[], &parse("[](p -> p)").unwrap(), &tbat).unwrap();
    assert_eq!(
        v.witness().unwrap().get_name(&parse("p").unwrap()),
        Some("t")
    );
}

#[test]
fn k_and_its_implication_counterpart_are_w_equivalent() {
    let w = builtin_matrix("W").unwrap();
    let i = "[]A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)";
    let k = "[](A -> B) -> ([]A -> []B)";
    for (a, b) in [(i, k), (k, i)] {
        let f = Schema::parse(&format!("({a}) -> ({b})"))
            .unwrap()
            .fresh_instance();
        assert!(valid(&[], &f, &w), "{}", f.print());
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn print_then_parse_is_identity(f in formula(5)) {
        prop_assert_eq!(parse(&print(&f)).unwrap(), f.clone());
        prop_assert_eq!(parse(&f.pretty()).unwrap(), f);
    }

    #[test]
    fn checker_agrees_with_naive_enumeration(a in formula(2), b in formula(2)) {
        let closure = closure_of([&a, &b]);
        prop_assume!(closure.len() <= 7);
        for builtin in Builtin::ALL {
            let m = builtin.matrix();
            prop_assert_eq!(valid(std::slice::from_ref(&a), &b, &m), naive_valid(std::slice::from_ref(&a), &b, &m));
        }
    }

    #[test]
    fn enumerated_valuations_respect_the_tables(f in formula(3)) {
        let closure = closure_of([&f]);
        for builtin in Builtin::ALL {
            let m = builtin.matrix();
            for v in enumerate_valuations(&closure, &m).take(200) {
                prop_assert!(v.respects(&m));
            }
        }
    }

    #[test]
    fn refinement_is_monotone(a in formula(3), b in formula(3)) {
        let [w, ws, tbat] = ["W", "W_SIMPLIFIED", "TBAT"].map(|n| builtin_matrix(n).unwrap());
        if valid(std::slice::from_ref(&a), &b, &w) {
            prop_assert!(valid(std::slice::from_ref(&a), &b, &ws));
        }
        if valid(std::slice::from_ref(&a), &b, &ws) {
            prop_assert!(valid(std::slice::from_ref(&a), &b, &tbat));
        }
    }

    #[test]
    fn consequence_is_tarskian(a in formula(3), b in formula(3), c in formula(3)) {
        for builtin in Builtin::ALL {
            let m = builtin.matrix();
            prop_assert!(valid(std::slice::from_ref(&a), &a, &m));
            if valid(std::slice::from_ref(&a), &b, &m) {
                prop_assert!(valid(&[a.clone(), c.clone()], &b, &m));
            }
            if valid(std::slice::from_ref(&a), &b, &m) && valid(&[a.clone(), b.clone()], &c, &m) {
                prop_assert!(valid(std::slice::from_ref(&a), &c, &m));
            }
        }
    }

    #[test]
    fn validity_survives_substitution(f in formula(3), g in formula(2)) {
        let sub = BTreeMap::from([("p".to_string(), g)]);
        let instance = f.substitute(&sub);
        prop_assume!(closure_of([&instance]).len() <= 24);
        for builtin in Builtin::ALL {
            let m = builtin.matrix();
            if valid(&[], &f, &m) {
                prop_assert!(valid(&[], &instance, &m), "{} / {}", f.print(), instance.print());
            }
        }
    }
}
