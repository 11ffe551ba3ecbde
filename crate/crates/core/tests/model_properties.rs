use approx::assert_relative_eq;
use newsprop::model::{
    population_sharing_probability, sharing_probability, Article, BeliefDistribution,
    BuiltinDistribution, ModelParams, ReaderBelief,
};
use proptest::prelude::*;

fn p(b: f64, t: f64, belief: f64, params: &ModelParams) -> f64 {
    sharing_probability(
        Article::new(b, t).unwrap(),
        ReaderBelief::new(belief).unwrap(),
        params,
    )
    .unwrap()
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.001f64..=1.0, 0.1f64..=20.0, 0.001f64..=1.0, 0.1f64..=20.0)
        .prop_map(|(fl, kl, fr, kr)| ModelParams::new(fl, kl, fr, kr).unwrap())
}

fn weights() -> impl Strategy<Value = [f64; 7]> {
    prop::array::uniform7(0.0f64..1.0).prop_filter_map("non-zero mass", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-3).then(|| w.map(|x| x / total))
    })
}

proptest! {
    #[test]
    fn decreasing_in_misalignment(
        params in params(),
        belief in -1.0f64..=1.0,
        t in 0.0f64..=1.0,
        d1 in 0.0f64..=1.0,
        extra in 0.01f64..=1.0,
    ) {
        let d2 = d1 + extra;
        // keep the bias inside [-1, 1] on whichever side has room
        let dir = if belief <= 0.0 { 1.0 } else { -1.0 };
        prop_assume!((belief + dir * d2).abs() <= 1.0);
        let near = p(belief + dir * d1, t, belief, &params);
        let far = p(belief + dir * d2, t, belief, &params);
        prop_assert!(far < near, "near {near} far {far}");
    }

    #[test]
    fn increasing_in_truth(
        params in params(),
        b in -1.0f64..=1.0,
        belief in -1.0f64..=1.0,
        t1 in 0.0f64..0.99,
        dt in 0.01f64..=1.0,
    ) {
        let t2 = (t1 + dt).min(1.0);
        prop_assert!(p(b, t2, belief, &params) > p(b, t1, belief, &params));
    }

    #[test]
    fn diminishing_returns_above_midpoint(
        params in params(),
        b in -1.0f64..=1.0,
        belief in -1.0f64..=1.0,
        t in 0.0f64..=0.98,
    ) {
        let h = 0.01;
        let d = b - belief;
        prop_assume!(t > d * d && t + 2.0 * h <= 1.0);
        let second = p(b, t + 2.0 * h, belief, &params) - 2.0 * p(b, t + h, belief, &params)
            + p(b, t, belief, &params);
        prop_assert!(second < 0.0);
    }

    #[test]
    fn bounded_by_largest_scale(
        params in params(),
        b in -1.0f64..=1.0,
        t in 0.0f64..=1.0,
        belief in -1.0f64..=1.0,
    ) {
        let v = p(b, t, belief, &params);
        prop_assert!(v > 0.0);
        prop_assert!(v <= params.f_left.max(params.f_right));
    }

    #[test]
    fn mixture_is_linear(
        params in params(),
        w1 in weights(),
        w2 in weights(),
        lambda in 0.0f64..=1.0,
        b in -1.0f64..=1.0,
        t in 0.0f64..=1.0,
    ) {
        let d1 = BeliefDistribution::over_groups(w1).unwrap();
        let d2 = BeliefDistribution::over_groups(w2).unwrap();
        let article = Article::new(b, t).unwrap();
        let mixed = population_sharing_probability(article, &d1.mix(&d2, lambda).unwrap(), &params).unwrap();
        let p1 = population_sharing_probability(article, &d1, &params).unwrap();
        let p2 = population_sharing_probability(article, &d2, &params).unwrap();
        assert_relative_eq!(mixed, lambda * p1 + (1.0 - lambda) * p2, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_params_mirror(
        f in 0.001f64..=1.0,
        k in 0.1f64..=20.0,
        b in -1.0f64..=1.0,
        t in 0.0f64..=1.0,
        belief in -1.0f64..=1.0,
    ) {
        prop_assume!(belief != 0.0);
        let params = ModelParams::symmetric(f, k).unwrap();
        prop_assert_eq!(p(b, t, belief, &params), p(-b, t, -belief, &params));
    }

    #[test]
    fn population_mirror(
        f in 0.001f64..=1.0,
        k in 0.1f64..=20.0,
        w in weights(),
        b in -1.0f64..=1.0,
        t in 0.0f64..=1.0,
    ) {
        let params = ModelParams::symmetric(f, k).unwrap();
        let d = BeliefDistribution::over_groups(w).unwrap();
        let lhs = population_sharing_probability(Article::new(b, t).unwrap(), &d, &params).unwrap();
        let rhs = population_sharing_probability(Article::new(-b, t).unwrap(), &d.mirrored(), &params).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }
}

#[test]
fn half_ceiling_at_zero_margin() {
    let params = ModelParams::new(0.01, 4.465, 1.0, 10.0).unwrap();
    assert_eq!(p(0.45, 0.0, 0.45, &params), 0.5);
}

#[test]
fn base_right_reader_at_center() {
    // 0.007 * logistic(0) with B = 0 on the right branch
    assert_relative_eq!(
        p(0.0, 0.0, 0.0, &ModelParams::BASE),
        0.0035,
        max_relative = 1e-15
    );
}

#[test]
fn steep_aligned_reader_is_near_ceiling() {
    let params = ModelParams::new(0.01, 4.465, 1.0, 10.0).unwrap();
    // 1 / (1 + e^-10) to 20 digits
    assert_relative_eq!(
        p(0.3, 1.0, 0.3, &params),
        0.999_954_602_131_297_6,
        max_relative = 1e-15
    );
}

#[test]
fn frozen_population_values() {
    let article = Article::new(0.0, 1.0).unwrap();
    let emp = BuiltinDistribution::Empirical.distribution();
    let centrist = BuiltinDistribution::CentristUnimodal.distribution();
    // 50-digit seven-term sums of the printed weights and centers
    assert_relative_eq!(
        population_sharing_probability(article, &emp, &ModelParams::BASE).unwrap(),
        0.008_189_535_153_531_839,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        population_sharing_probability(article, &centrist, &ModelParams::BASE).unwrap(),
        0.007_725_538_465_292_184,
        max_relative = 1e-13
    );
}

#[test]
fn builtin_columns_are_verbatim() {
    assert_eq!(
        BuiltinDistribution::Empirical.weights(),
        [0.092, 0.230, 0.225, 0.184, 0.131, 0.091, 0.046]
    );
    let d = BuiltinDistribution::Hyperpartisan.distribution();
    let w: Vec<f64> = d.atoms().iter().map(|a| a.weight).collect();
    assert_eq!(w, vec![0.4, 0.08, 0.02, 0.0, 0.02, 0.08, 0.4]);
}
