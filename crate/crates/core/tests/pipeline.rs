//! Public API against independent oracles: naive series, bisection roots and
//! constants computed separately in high precision.

use weierlab_core::dimension::{bowen_solve, formula_dims};
use weierlab_core::transversality::{
    alpha_bound, beta_constant, cosine_lemma_check, delta0_compute, g_eval, selfsimilarity_check, thm_example2_check,
    ExampleFamily,
};
use weierlab_core::weierstrass::{eval_w, truncation_depth};
use weierlab_core::{BernoulliMeasure, DisplacementKind, LambdaKind, System, ThetaField};

fn system_b() -> System {
    System::new(System::equal_partition(3), LambdaKind::TauPower { theta: 0.2 }, DisplacementKind::Cosine)
}

fn uneven() -> System {
    System::new(vec![0.0, 0.2, 0.55, 1.0], LambdaKind::ConstantPerInterval(vec![0.7, 0.5, 0.8]), DisplacementKind::Cosine)
}

#[test]
fn w_matches_naive_series_on_dyadic_points() {
    // x = k / 64 is exact and doubling keeps it exact
    let s = System::new(System::equal_partition(2), LambdaKind::ConstantPerInterval(vec![0.6; 2]), DisplacementKind::Cosine);
    let plan = truncation_depth(&s, 1e-12).unwrap();
    for k in 0..64u64 {
        let x = k as f64 / 64.0;
        let mut naive = 0.0;
        let mut z = k;
        for n in 0..200 {
            naive += 0.6f64.powi(n) * (std::f64::consts::TAU * z as f64 / 64.0).cos();
            z = (2 * z) % 64;
        }
        assert!((eval_w(&s, x, &plan) - naive).abs() < 1e-11, "k = {k}");
    }
}

#[test]
fn bowen_root_matches_bisection() {
    let s = uneven();
    let widths = [0.2f64, 0.35, 0.45];
    let lambdas = [0.7f64, 0.5, 0.8];
    // sum lambda_i |I_i|^{s - 1} = 1
    let f = |t: f64| widths.iter().zip(&lambdas).map(|(w, l)| l * w.powf(t - 1.0)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = bowen_solve(&s).unwrap();
    assert!((r.s_star - lo).abs() < 1e-12, "{} vs {lo}", r.s_star);
    let p = BernoulliMeasure::new(r.p_star.clone()).unwrap();
    assert!((formula_dims(&p, &s).dim_mu - r.s_star).abs() < 1e-10);
}

#[test]
fn transversality_constants_match_reference_values() {
    let b = system_b();
    let gq = 3f64.powf(-0.8);
    let gc = 3f64.powf(-1.8);
    assert!((g_eval(gq, gq).unwrap() - 0.5042618282856774).abs() < 1e-13);
    assert!((g_eval(gc, gc).unwrap() - 0.02580873803300039).abs() < 1e-14);
    let c = thm_example2_check(&b).unwrap();
    assert!((c.cond2_sum - 0.5300705663186779).abs() < 1e-13);
    assert!(c.certified && c.claimed_dim == Some(1.8));
    assert!((beta_constant(&b) - 0.8027415617602307).abs() < 1e-14);
    assert!((alpha_bound(&b) - 6.342246557842742).abs() < 1e-12);
    assert!(cosine_lemma_check(&b).unwrap().holds);

    let two = System::new(vec![0.0, 0.4, 1.0], LambdaKind::TauPower { theta: 0.2 }, DisplacementKind::Cosine);
    let d = delta0_compute(&two, 2048);
    assert!((d.value - 0.9045084971874736).abs() < 1e-13);
}

#[test]
fn takagi_family_bowen_dimension() {
    let fam = ExampleFamily::takagi(0.6).unwrap();
    let (lo, hi) = fam.admissible();
    for k in 1..=5 {
        let t = lo + (hi - lo) * k as f64 / 5.0;
        let s = bowen_solve(&fam.system(t).unwrap()).unwrap().s_star;
        assert!((s - (2.0 + (t / 1.2).log2())).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn slope_field_is_a_fixed_point_of_the_branch_map() {
    let b = system_b();
    let field = ThetaField::new(&b, 40);
    let shorter = ThetaField::new(&b, 39);
    let plan = truncation_depth(&b, 1e-9).unwrap();
    let past: Vec<usize> = (0..40).map(|k| (k * 7 + 1) % 3).collect();
    for x in [0.05, 0.3, 0.77] {
        let i = past[0];
        let z = b.inverse_branch(i, x);
        let lhs = field.theta(&past, x, &plan);
        let rhs = b.gamma_symbol(i) * (shorter.theta(&past[1..], z, &plan) - b.g_prime(z));
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
    }
    let k = selfsimilarity_check(&b, &BernoulliMeasure::critical(&b), 0.6, 20_000, 11).unwrap();
    assert!(k.passes, "{k:?}");
}
