use proptest::prelude::*;
use qdt_core::behavioral::{self, EmotionVector, ProspectMeasure};
use qdt_core::linalg::{self, ComplexMatrix, ComplexVector};
use qdt_core::rng;
use qdt_core::scenario::{self, round_significant, Format};
use qdt_core::sequential;
use qdt_core::space::{self, measure_from_basis, AlternativeBasis, DensityState};

struct Setup {
    rho: DensityState,
    u: ComplexMatrix,
    a: AlternativeBasis,
    b: AlternativeBasis,
}

fn setup(seed: u64, d: usize, rank: usize) -> Setup {
    let mut r = rng::stream(seed, "properties", 0);
    let rho = space::random_state_with(d, rank.min(d), &mut r).unwrap();
    let u = linalg::random_unitary_with(d, &mut r).unwrap();
    let a = AlternativeBasis::from_unitary_columns(&linalg::random_unitary_with(d, &mut r).unwrap(), "A").unwrap();
    let b = AlternativeBasis::from_unitary_columns(&linalg::random_unitary_with(d, &mut r).unwrap(), "B").unwrap();
    Setup { rho, u, a, b }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_states_are_valid(seed in any::<u64>(), d in 1usize..=8, rank in 1usize..=8) {
        let s = setup(seed, d, rank);
        let m = s.rho.matrix();
        prop_assert!(m.hermiticity_deviation() < 1e-12);
        prop_assert!((m.trace().unwrap().re - 1.0).abs() < 1e-12);
        prop_assert!(s.rho.eigenvalues().iter().all(|&l| l > -1e-12));
        prop_assert!(s.rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn evolution_preserves_state_and_unitarity(seed in any::<u64>(), d in 1usize..=8) {
        let s = setup(seed, d, d);
        prop_assert!(s.u.unitarity_deviation() < 1e-12);
        let evolved = space::evolve(&s.rho, &s.u).unwrap();
        prop_assert!((evolved.purity() - s.rho.purity()).abs() < 1e-12);
    }

    #[test]
    fn born_probabilities_form_a_distribution(seed in any::<u64>(), d in 1usize..=8, rank in 1usize..=8) {
        let s = setup(seed, d, rank);
        let p = space::all_probabilities(&s.rho, &measure_from_basis(&s.a).unwrap()).unwrap();
        prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn luders_reduction_is_idempotent(seed in any::<u64>(), d in 2usize..=8, n in 0usize..8) {
        let s = setup(seed, d, d);
        let p = space::projector_from_vector(&s.a.vectors()[n % d]).unwrap();
        let once = sequential::luders_reduce(&s.rho, &p).unwrap();
        let twice = sequential::luders_reduce(&once, &p).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn joint_is_bounded_by_priors_and_marginalizes(seed in any::<u64>(), d in 2usize..=6, n in 0usize..6) {
        let s = setup(seed, d, d);
        let n = n % d;
        let pa = space::projector_from_vector(&s.a.vectors()[n]).unwrap();
        let prior = space::clamp_probability(linalg::trace_of_product(s.rho.matrix(), &pa).unwrap().re).unwrap();
        let mut total = 0.0;
        for vb in s.b.vectors() {
            let pb = space::projector_from_vector(vb).unwrap();
            let joint = sequential::joint_probability(&s.rho, &pa, &s.u, &pb).unwrap();
            let c = sequential::conditional_probability(&s.rho, &pa, &s.u, &pb).unwrap();
            prop_assert!(joint <= prior + 1e-12);
            prop_assert!((0.0..=1.0).contains(&c));
            total += joint;
        }
        prop_assert!((total - prior).abs() < 1e-9);
    }

    #[test]
    fn immediate_conditional_is_order_symmetric(seed in any::<u64>(), d in 2usize..=8, n in 0usize..8, k in 0usize..8) {
        let s = setup(seed, d, d);
        let id = ComplexMatrix::identity(d);
        let r = sequential::symmetry_report(&s.rho, &s.a.vectors()[n % d], &s.b.vectors()[k % d], &id, 1e-12).unwrap();
        prop_assert!(r.conditional_symmetric);
    }

    #[test]
    fn quality_factor_is_real_and_bounded(seed in any::<u64>(), d in 1usize..=4, sd in 1usize..=3) {
        let mut r = rng::stream(seed, "properties.behavioral", 0);
        let rho = space::random_state_with(d * sd, d * sd, &mut r).unwrap();
        let a = AlternativeBasis::from_unitary_columns(&linalg::random_unitary_with(d, &mut r).unwrap(), "A").unwrap();
        let emotions: Vec<EmotionVector> = (0..d)
            .map(|_| {
                let v = ComplexVector::new((0..sd).map(|_| rng::complex_gaussian(&mut r)).collect()).unwrap();
                EmotionVector::new(v.normalized().unwrap()).unwrap()
            })
            .collect();
        let m = ProspectMeasure::from_basis(&a, &emotions).unwrap();
        for p in m.prospects() {
            let dec = behavioral::decompose_prospect(&rho, p).unwrap();
            prop_assert!((-1.0..=1.0).contains(&dec.quality));
            prop_assert!((dec.total - dec.rational - dec.quality).abs() < 1e-12);
            prop_assert!(dec.rational >= -1e-12);
        }
        let diag = behavioral::decomposition_diagnostics(&rho, &m).unwrap();
        let resolution = behavioral::resolution_check(&rho, &m).unwrap();
        prop_assert!((diag.split_residual - resolution).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_matches_alternative_probabilities(seed in any::<u64>(), d in 1usize..=4, sd in 1usize..=3) {
        let mut r = rng::stream(seed, "properties.partial", 0);
        let rho = space::random_state_with(d * sd, d * sd, &mut r).unwrap();
        let reduced = behavioral::reduced_alternative_state(&rho, sd).unwrap();
        let a = AlternativeBasis::from_unitary_columns(&linalg::random_unitary_with(d, &mut r).unwrap(), "A").unwrap();
        for v in a.vectors() {
            let p = space::projector_from_vector(v).unwrap();
            let lifted = p.kron(&ComplexMatrix::identity(sd));
            let full = linalg::trace_of_product(rho.matrix(), &lifted).unwrap().re;
            let small = linalg::trace_of_product(reduced.matrix(), &p).unwrap().re;
            prop_assert!((full - small).abs() < 1e-12);
        }
    }

    #[test]
    fn rounding_is_idempotent(x in any::<f64>().prop_filter("finite", |x| x.is_finite()), digits in 1usize..=15) {
        let once = round_significant(x, digits);
        prop_assert_eq!(once, round_significant(once, digits));
        if x != 0.0 {
            prop_assert!(((once - x) / x).abs() <= 10f64.powi(1 - digits as i32));
        }
    }

    #[test]
    fn parser_is_total_on_arbitrary_text(text in ".{0,200}") {
        let _ = scenario::parse_scenario(&text);
    }

    #[test]
    fn parser_is_total_on_near_miss_documents(
        dim in -2i64..=5,
        key in prop::sample::select(vec!["ambient_dim", "seed", "schema", "initial_state", "evolution", "extra"]),
        value in prop::sample::select(vec!["1", "-1", "0.5", "\"x\"", "[]", "{}", "null", "[[1,0]]", "{\"kind\":\"pure\"}"]),
    ) {
        let text = format!("{{\"ambient_dim\": {dim}, \"{key}\": {value}}}");
        match scenario::parse_scenario(&text) {
            Ok(s) => {
                let again = scenario::parse_scenario(&scenario::emit_scenario(&s)).unwrap();
                prop_assert_eq!(s, again);
            }
            Err(e) => prop_assert!(e.kind() == "syntax" || e.path().is_some_and(|p| p.starts_with('$'))),
        }
    }

    #[test]
    fn reports_render_identically_twice(seed in any::<u64>(), d in 1usize..=4) {
        let s = scenario::parse_scenario(&format!("{{\"ambient_dim\": {d}, \"seed\": {seed}}}")).unwrap();
        let r = scenario::run_eval(&s).unwrap();
        for f in [Format::Json, Format::Csv, Format::Table] {
            prop_assert_eq!(scenario::render(&r, f, 12).unwrap(), scenario::render(&r, f, 12).unwrap());
        }
        prop_assert!(r.probabilities.iter().all(|e| (0.0..=1.0).contains(&e.probability)));
        prop_assert!(r.residuals.iter().all(|e| e.value >= 0.0));
    }
}
