use proptest::prelude::*;
use slc_core::syntax::{free_vars, parse_term, parse_type, subst, Term, Type};
use slc_core::{eval_trace, Fuel};

fn ty() -> impl Strategy<Value = Type> {
    Just(Type::Unit).prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::tensor(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::lolli(a, b)),
            inner.prop_map(Type::bang),
        ]
    })
}

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z", "f", "g1", "x_2", "letx", "recur"]).prop_map(String::from)
}

/// Arbitrary, mostly ill-typed, terms.
fn term() -> impl Strategy<Value = Term> {
    prop_oneof![name().prop_map(Term::var), Just(Term::Star)].prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Term::seq(m, n)),
            (ty(), ty(), inner.clone()).prop_map(|(a, b, m)| Term::left(a, b, m)),
            (ty(), ty(), inner.clone()).prop_map(|(a, b, m)| Term::right(a, b, m)),
            (inner.clone(), name(), inner.clone(), name(), inner.clone())
                .prop_map(|(s, x, l, y, r)| Term::case(s, x, l, y, r)),
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Term::pair(m, n)),
            (name(), name(), inner.clone(), inner.clone()).prop_map(|(x, y, m, n)| Term::let_pair(x, y, m, n)),
            (name(), ty(), inner.clone()).prop_map(|(x, a, m)| Term::lam(x, a, m)),
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Term::app(m, n)),
            inner.clone().prop_map(Term::lift),
            inner.clone().prop_map(Term::force),
            (name(), ty(), inner).prop_map(|(z, a, m)| Term::rec(z, Type::bang(a), m)),
        ]
    })
}

fn value() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::Star),
        (name(), ty()).prop_map(|(x, a)| Term::lam(x.clone(), a, Term::var(x))),
        term().prop_map(Term::lift),
    ]
}

proptest! {
    #[test]
    fn types_print_and_parse_back(a in ty()) {
        prop_assert_eq!(parse_type(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn terms_print_and_parse_back(m in term()) {
        let text = m.to_string();
        prop_assert_eq!(parse_term(&text).map_err(|e| e.to_string()), Ok(m), "printed as {}", text);
    }

    #[test]
    fn substitution_only_moves_free_variables(m in term(), v in value(), x in name()) {
        let out = free_vars(&subst(&m, &v, &x));
        let mut allowed = free_vars(&m);
        if allowed.remove(&x) {
            allowed.extend(free_vars(&v));
        }
        prop_assert!(out.is_subset(&allowed), "{:?} not within {:?}", out, allowed);
    }

    #[test]
    fn evaluation_is_deterministic(m in term(), fuel in 0u64..200) {
        prop_assert_eq!(eval_trace(&m, Fuel(fuel)), eval_trace(&m, Fuel(fuel)));
    }
}
