use std::collections::BTreeMap;

use proptest::prelude::*;
use verisure_core::contract::{lint, parse_contract, DesignContract};
use verisure_core::formal::{build_miter, exhaustive_counterexample, synthesize_spec};

#[derive(Debug, Clone)]
enum E {
    Var(usize),
    Not(Box<E>),
    Bin(char, Box<E>, Box<E>),
    Mux(Box<E>, Box<E>, Box<E>),
}

const VARS: [&str; 3] = ["a", "b", "c"];

fn expr() -> impl Strategy<Value = E> {
    (0usize..3).prop_map(E::Var).prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| E::Not(Box::new(e))),
            (prop::sample::select(vec!['&', '|', '^']), inner.clone(), inner.clone())
                .prop_map(|(o, l, r)| E::Bin(o, Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone(), inner).prop_map(|(s, t, f)| E::Mux(Box::new(s), Box::new(t), Box::new(f))),
        ]
    })
}

fn text(e: &E) -> String {
    match e {
        E::Var(i) => VARS[*i].to_string(),
        E::Not(x) => format!("(~{})", text(x)),
        E::Bin(o, l, r) => format!("({} {o} {})", text(l), text(r)),
        E::Mux(s, t, f) => format!("({} ? {} : {})", text(s), text(t), text(f)),
    }
}

fn eval(e: &E, env: &[bool; 3]) -> bool {
    match e {
        E::Var(i) => env[*i],
        E::Not(x) => !eval(x, env),
        E::Bin('&', l, r) => eval(l, env) & eval(r, env),
        E::Bin('|', l, r) => eval(l, env) | eval(r, env),
        E::Bin(_, l, r) => eval(l, env) ^ eval(r, env),
        E::Mux(s, t, f) => if eval(s, env) { eval(t, env) } else { eval(f, env) },
    }
}

fn contract(rule: &str) -> DesignContract {
    let raw = format!(
        r#"{{"module_name":"top_module","io":[
          {{"name":"a","dir":"input"}},{{"name":"b","dir":"input"}},{{"name":"c","dir":"input"}},
          {{"name":"y","dir":"output"}}],
          "timing":{{"outputs":{{"y":{{"latency_cycles":0}}}}}},
          "functional_summary":{{"overview":"","rules":[{{"id":"r","kind":"boolean","expression":"y = {rule}","outputs":["y"]}}]}}}}"#
    );
    lint(&parse_contract(&raw).unwrap()).canonical.unwrap()
}

proptest! {
    #[test]
    fn miter_agrees_with_truth_tables(dut in expr(), spec in expr()) {
        let c = contract(&text(&spec));
        let targets = vec!["y".to_string()];
        let spec_src = synthesize_spec(&c, &targets).unwrap();
        prop_assert_eq!(&spec_src, &synthesize_spec(&c, &targets).unwrap());
        let dut_src = format!(
            "module top_module(input a, input b, input c, output y);\n  assign y = {};\nendmodule\n",
            text(&dut)
        );
        let bundle = build_miter(&c, &dut_src, &spec_src, &targets).unwrap();
        prop_assert!(bundle.miter_source.contains("module Miter"));

        let envs: Vec<[bool; 3]> = (0..8u8).map(|n| [n & 1 != 0, n & 2 != 0, n & 4 != 0]).collect();
        let differs = envs.iter().any(|env| eval(&dut, env) != eval(&spec, env));
        let cex = exhaustive_counterexample("top_module", &dut_src, &spec_src, &targets).unwrap();
        prop_assert_eq!(cex.is_some(), differs);
        if let Some(w) = cex {
            let get = |w: &BTreeMap<String, u128>, n: &str| w.get(n).copied().unwrap_or(0) != 0;
            let env = [get(&w, "a"), get(&w, "b"), get(&w, "c")];
            prop_assert_ne!(eval(&dut, &env), eval(&spec, &env));
        }
    }
}
