#![allow(clippy::type_complexity)]

use std::sync::Arc;

use kothe::dsl::ast::{Decl, ExprKind};
use kothe::dsl::eval::{Evaluator, Mode};
use kothe::dsl::random::{random_family, random_spec};
use kothe::dsl::{compile, format, load, parse, Span};
use kothe::gallery::{builtin, families};
use kothe::{Error, Rational};
use num_traits::One;
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/dsl/{name}.kws", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const FIXTURES: [&str; 5] = ["sprime", "p41", "p42", "snake", "annihilation"];

#[test]
fn sprime_example_round_trips() {
    let ast = parse("family sprime { p = 2  v(m,k,j) = j^(-m) }").unwrap();
    assert_eq!(ast.decls.len(), 1);
    let text = format(&ast);
    assert_eq!(text, "family sprime {\n  p = 2\n  v(m,k,j) = j^(-m)\n}\n");
    assert_eq!(parse(&text).unwrap(), ast);
}

#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let ast = parse(&fixture(name)).unwrap();
        let text = format(&ast);
        assert_eq!(parse(&text).unwrap(), ast, "{name}");
        assert_eq!(format(&parse(&text).unwrap()), text, "{name}: formatting is idempotent");
    }
}

#[test]
fn hints_are_sorted_canonically() {
    let a = parse("family f { v(m,k,j) = j^(-m) hints { limit_zero(level = 1), decreasing_level } }").unwrap();
    let b = parse("family f { v(m,k,j) = j^(-m) hints { decreasing_level, limit_zero(level = 1) } }").unwrap();
    assert_eq!(a, b);
    assert!(format(&a).contains("hints { decreasing_level, limit_zero(level = 1) }"));
}

#[test]
fn p41_level_one_matches_dyadic_brute_force() {
    let ast = parse("family p41 { v(m,k,j) = when m == 1 -> 2^(-(nu2(j)+1)); min(prev(0), prev(1)) }").unwrap();
    let Decl::Family(f) = &ast.decls[0] else { panic!() };
    assert!(matches!(f.body.kind, ExprKind::Cases(..)));
    let ev = Evaluator::new(Arc::new(f.body.clone()), Mode::Exact);
    for n in 1..=13u32 {
        let half = 1usize << (n - 1);
        let mut k = 1;
        while half * (2 * k - 1) <= 1 << 12 {
            let j = half * (2 * k - 1);
            let want = Rational::new(1.into(), num_bigint::BigInt::from(1u64 << n));
            assert_eq!(ev.eval_exact(1, 1, j).unwrap(), want, "j={j}");
            k += 1;
        }
    }
}

#[test]
fn compiled_fixtures_agree_exactly_with_gallery() {
    let cases: [(&str, fn(usize, usize) -> Rational); 3] = [
        ("p41", families::prop41_exact),
        ("p42", families::prop42_exact),
        ("sprime", |m, j| Rational::new(1.into(), num_bigint::BigInt::from(j).pow(m as u32))),
    ];
    for (name, oracle) in cases {
        let spec = load(&fixture(name)).unwrap();
        for m in 1..=6 {
            for j in 1..=1usize << 12 {
                let got = spec.family.exact_at(m, 1, j).unwrap().expect("finite weight");
                assert_eq!(got, oracle(m, j), "{name} at m={m}, j={j}");
            }
        }
    }
}

#[test]
fn compiled_sprime_matches_builtin_on_probes() {
    let spec = load(&fixture("sprime")).unwrap();
    let g = builtin("s-prime").unwrap();
    for m in 1..=8 {
        for j in kothe::family::probe_indices(1 << 20) {
            let (a, b) = (spec.family.log_weight(m, 1, j), g.family.log_weight(m, 1, j));
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "m={m}, j={j}: {a} vs {b}");
        }
    }
}

#[test]
fn p41_log_weights_match_gallery() {
    let spec = load(&fixture("p41")).unwrap();
    for m in 1..=8 {
        for j in (1..5000).chain([1 << 20, (1 << 20) - 1]) {
            assert_eq!(spec.family.log_weight(m, 1, j), families::prop41_log(m, j), "m={m}, j={j}");
        }
    }
}

#[test]
fn p42_log_weights_match_gallery_at_large_indices() {
    let spec = load(&fixture("p42")).unwrap();
    for m in 1..=6 {
        for j in [5000usize, 8191, 8192, 1 << 16, (1 << 16) - 2, 100_000] {
            let (a, b) = (spec.family.log_weight(m, 1, j), families::prop42_log(m, j));
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "m={m}, j={j}: {a} vs {b}");
        }
    }
}

#[test]
fn non_positive_value_is_reported_at_probe() {
    let err = load("family bad { v(m,k,j) = j - 10 }").unwrap_err();
    let Error::Parse(d) = err else { panic!("{err}") };
    assert!(d.message.contains("non-positive value"), "{}", d.message);
    let j: usize = d.message.split("j=").nth(1).unwrap().trim_end_matches(')').parse().unwrap();
    assert!(j <= 10);
    assert_eq!(d.span, Span { line: 1, col: 25, len: 6 });
}

#[test]
fn limit_zero_on_constant_family_is_rejected() {
    let err = load("family c { v(m,k,j) = 1 hints { limit_zero } }").unwrap_err();
    assert!(matches!(err, Error::HintRejected { .. }), "{err}");
}

#[test]
fn p41_with_decreasing_level_is_accepted() {
    let spec = load(&fixture("p41")).unwrap();
    assert_eq!(spec.family.hints().len(), 3);
}

#[test]
fn recursion_without_base_level() {
    let err = load("family r { v(m,k,j) = min(prev(0), j) }").unwrap_err();
    let Error::Parse(d) = err else { panic!("{err}") };
    assert!(d.message.contains("recursion without base level"));
    assert_eq!(d.span, Span { line: 1, col: 27, len: 7 });
}

#[test]
fn compiled_specs_classify() {
    for name in ["snake", "annihilation", "p42"] {
        let spec = load(&fixture(name)).unwrap();
        assert!(kothe::classifier::classify_report(&spec).is_ok(), "{name}");
    }
    let ann = load(&fixture("annihilation")).unwrap();
    assert!(!ann.effective_weights().unwrap().is_exact());
}

fn diag(src: &str) -> (Span, String) {
    match parse(src) {
        Err(d) => (d.span, d.message),
        Ok(ast) => match compile(&ast) {
            Err(Error::Parse(d)) => (d.span, d.message),
            other => panic!("expected a diagnostic for {src:?}, got {other:?}"),
        },
    }
}

#[test]
fn every_production_has_a_negative_case() {
    let cases: &[(&str, usize, usize, &str)] = &[
        ("", 1, 1, "at least one declaration"),
        ("famly f { }", 1, 1, "expected `family`"),
        ("family { v(m,k,j) = 1 }", 1, 8, "family name"),
        ("family f v(m,k,j) = 1 }", 1, 10, "`{`"),
        ("family f { p = 0.5 v(m,k,j) = 1 }", 1, 16, "at least 1"),
        ("family f { p = x v(m,k,j) = 1 }", 1, 16, "a number"),
        ("family f { lambda = 0 v(m,k,j) = 1 }", 1, 21, "nonzero"),
        ("family f { v(m,j) = 1 }", 1, 16, "`k`"),
        ("family f { v(m,k,j) 1 }", 1, 21, "`=`"),
        ("family f { v(m,k,j) = }", 1, 23, "an expression"),
        ("family f { v(m,k,j) = 1 ", 1, 25, "`}`"),
        ("family f { v(m,k,j) = (j + 1 }", 1, 30, "`)`"),
        ("family f { v(m,k,j) = j $ 2 }", 1, 25, "unexpected character"),
        ("family f { v(m,k,j) = x }", 1, 23, "unknown identifier `x`"),
        ("family f { v(m,k,j) = exp(j, m) }", 1, 23, "one argument"),
        ("family f { v(m,k,j) = prev(-1) }", 1, 28, "nonnegative integer"),
        ("family f { v(m,k,j) = when j -> 1; 2 }", 1, 30, "comparison operator"),
        ("family f { v(m,k,j) = when j > 1 1; 2 }", 1, 34, "`->`"),
        ("family f { v(m,k,j) = when j > 1 -> 1 2 }", 1, 39, "`;`"),
        ("family f { v(m,k,j) = 1 hints { fast } }", 1, 33, "unknown hint"),
        ("family f { v(m,k,j) = 1 hints { limit_zero(lvl = 1) } }", 1, 44, "no argument `lvl`"),
        ("family f { v(m,k,j) = 1 hints { shift_bound } }", 1, 33, "needs argument `c`"),
        ("family f { v(m,k,j) = 1 hints { shift_bound(c = j) } }", 1, 49, "only `m`"),
        ("family f { v(m,k,j) = 1 hints { limit_zero, } }", 1, 45, "hint name"),
        ("weights w = m", 1, 13, "only `j`"),
        ("weights w = prev(0)", 1, 13, "`prev` is not available"),
        ("symbol s = spiral()", 1, 12, "unknown symbol builtin"),
        ("symbol s = snake(2", 1, 19, "`)`"),
        ("family f { v(m,k,j) = 1 } family g { v(m,k,j) = 1 }", 1, 27, "only one family"),
        ("weights w = j", 1, 1, "needs a family"),
        ("family f { v(m,k,j) = 1 } weights w = j - 1", 1, 39, "zero weight"),
        ("family f { v(m,k,j) = 1 } symbol s = successor(2)", 1, 27, "no arguments"),
        ("family f { v(m,k,j) = nu2(j - 1) + 1 }", 1, 23, "positive integer"),
        ("family f { v(m,k,j) = 1 / (j - j) }", 1, 23, "division by zero"),
    ];
    for (src, line, col, needle) in cases {
        let (span, msg) = diag(src);
        assert!(msg.contains(needle), "{src:?}: message {msg:?} lacks {needle:?}");
        assert_eq!((span.line, span.col), (*line, *col), "{src:?}: {msg}");
    }
}

#[test]
fn diagnostics_carry_multiline_positions() {
    let (span, _) = diag("# comment\nfamily f {\n  v(m,k,j) = j ^ q\n}\n");
    assert_eq!(span, Span { line: 3, col: 18, len: 1 });
}

#[test]
fn random_families_compile() {
    for seed in 0..40 {
        let ast = random_family(seed);
        let text = format(&ast);
        compile(&ast).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
    }
}

#[test]
fn exact_mode_refuses_irrational_steps() {
    let ev = Evaluator::new(Arc::new(kothe::dsl::parse_expr("sqrt(j)").unwrap()), Mode::Exact);
    assert!(ev.eval_exact(1, 1, 2).is_err());
    assert_eq!(ev.eval_exact(1, 1, 9).unwrap(), Rational::from_integer(3.into()));
    assert_eq!(Evaluator::new(Arc::new(kothe::dsl::parse_expr("ceil(log2(j))").unwrap()), Mode::Exact).eval_exact(1, 1, 9).unwrap(), Rational::from_integer(4.into()));
    let one = Evaluator::new(Arc::new(kothe::dsl::parse_expr("1^(j/2)").unwrap()), Mode::Exact).eval_exact(1, 1, 3).unwrap();
    assert!(one.is_one());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_format_is_identity(seed in any::<u64>()) {
        let ast = random_spec(seed);
        let text = format(&ast);
        let back = parse(&text).map_err(|d| TestCaseError::fail(format!("{d}\n{text}")))?;
        prop_assert_eq!(back, ast);
    }

    #[test]
    fn float_and_exact_modes_agree(seed in 0u64..500, m in 1usize..5, j in 1usize..3000) {
        let ast = random_family(seed);
        let Decl::Family(f) = &ast.decls[0] else { unreachable!() };
        prop_assume!(kothe::dsl::eval::is_rational(&f.body));
        let body = Arc::new(f.body.clone());
        let exact = Evaluator::new(body.clone(), Mode::Exact).eval_exact(m, 1, j).unwrap();
        let float = Evaluator::new(body, Mode::Float).eval_log(m, 1, j).unwrap();
        let want = kothe::scalar::ln_abs_ratio(&exact);
        prop_assert!((float - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {}", float, want);
    }
}

#[test]
fn run_bound_hint_is_sampled() {
    let base = "family p41 { v(m,k,j) = when m == 1 -> 2^(-(nu2(j) + 1)); min(prev(0), prev(1)) hints { sublevel_run_bound(eps = 2^(-(m + 2)), max_run = RUN) } }";
    assert!(load(&base.replace("RUN", "2 * m")).is_ok());
    let err = load(&base.replace("RUN", "m - 1")).unwrap_err();
    assert!(matches!(err, Error::HintRejected { .. }), "{err}");
    let err = load(&base.replace("RUN", "m / 2")).unwrap_err();
    assert!(err.to_string().contains("not a nonnegative integer at m=1"), "{err}");
}
