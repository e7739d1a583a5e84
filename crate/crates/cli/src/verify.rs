//! The invariant suite behind `weierlab verify`: one check per stated property
//! of every module, on fixed reference systems.

use rand::Rng;
use serde::Serialize;
use weierlab_core::dimension::corrdim::default_radii;
use weierlab_core::dimension::pressure::{pressure_derivative, pressure_eval};
use weierlab_core::dimension::{box_count_graph, bowen_solve, correlation_dim, formula_dims, Regime};
use weierlab_core::fibres::{eigen_residual, fibre_invariance_residual, parallel_check};
use weierlab_core::rng::{derive_seed, stream_rng};
use weierlab_core::transversality::tsujii::{ball_norm_exact, ball_norm_pairs};
use weierlab_core::transversality::{
    delta0_compute, eps_delta_scan, selfsimilarity_check, thm_example2_check, transversality_report, ScanGrid,
};
use weierlab_core::weierstrass::{
    baker, baker_inverse, eval_w, graph_lift_residual, oscillation_on, skew_inverse_fibre, skew_inverse_step,
    truncation_depth,
};
use weierlab_core::{
    BernoulliMeasure, DisplacementKind, Graph, LambdaKind, Plan, SymbolWord, System, ThetaField,
};

use crate::commands::{run, Command, Context};
use crate::config::parse_config;
use crate::output::schema_errors;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(module: &'static str, name: &'static str, pass: bool, detail: String) -> Check {
    Check { module, name, pass, detail }
}

fn system_a() -> System {
    System::new(System::equal_partition(3), LambdaKind::ConstantPerInterval(vec![0.6; 3]), DisplacementKind::Cosine)
}

fn system_b() -> System {
    System::new(System::equal_partition(3), LambdaKind::TauPower { theta: 0.2 }, DisplacementKind::Cosine)
}

fn degenerate() -> System {
    System::new(
        System::equal_partition(3),
        LambdaKind::ConstantPerInterval(vec![0.6; 3]),
        DisplacementKind::PiecewiseLinear { slopes: vec![0.0; 3], intercepts: vec![0.5, 0.1, 0.3] },
    )
}

fn uneven() -> System {
    System::new(vec![0.0, 0.2, 0.55, 1.0], LambdaKind::ConstantPerInterval(vec![0.7, 0.5, 0.8]), DisplacementKind::Cosine)
}

fn plan(s: &System) -> Plan {
    truncation_depth(s, 1e-9).expect("reference systems are valid")
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    system_core(seed, &mut out);
    weierstrass(seed, &mut out);
    fibres(seed, &mut out);
    dimension(seed, &mut out);
    transversality(seed, &mut out);
    cli_io(&mut out);
    out
}

fn system_core(seed: u64, out: &mut Vec<Check>) {
    const M: &str = "system-core";
    let s = uneven();
    let mut rng = stream_rng(derive_seed(seed, "verify-system", 0), 0);

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(0..12);
        let w: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let word = SymbolWord::new(w, 3).unwrap();
        let j = rng.gen_range(0..3);
        let whole = s.cylinder_of(&word).width();
        worst = worst.max((s.cylinder_of(&word.extended(j)).width() - whole * s.width(j)).abs());
    }
    out.push(check(M, "cylinder width multiplicative", worst <= 1e-14, format!("max error {worst:.2e}")));

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(1e-9..1.0);
        for i in 0..3 {
            worst = worst.max((s.tau(s.inverse_branch(i, x)) - x).abs());
        }
    }
    out.push(check(M, "tau inverts each branch", worst <= 1e-14, format!("max error {worst:.2e}")));

    let mut bad = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=10);
        let w: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let x: f64 = rng.gen_range(0.05..0.95);
        let mut rev = w.clone();
        rev.reverse();
        if s.coding_word(s.inverse_word(&w, x), n).symbols() != rev.as_slice() {
            bad += 1;
        }
    }
    out.push(check(M, "coding of rho_w(x) reverses w", bad == 0, format!("{bad} of 1000 words disagree")));

    let pc = BernoulliMeasure::critical(&s);
    let e = pc.integrals(&s);
    let err = (e.entropy - e.log_tau_prime).abs();
    out.push(check(M, "critical vector is the Lebesgue case", err < 1e-12, format!("|h - int log tau'| = {err:.2e}")));

    let p = BernoulliMeasure::new(vec![0.5, 0.3, 0.2]).unwrap();
    let vals: Vec<f64> = (0..100).map(|k| p.smb_word(&p.draw_word(1000, &mut stream_rng(seed, k)))).collect();
    let mean = vals.iter().sum::<f64>() / 100.0;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    let se = sd / 10.0;
    let gap = (mean - p.entropy()).abs();
    out.push(check(M, "SMB average converges to entropy", gap <= 3.0 * se, format!("gap {gap:.2e}, 3 se {:.2e}", 3.0 * se)));
}

fn weierstrass(seed: u64, out: &mut Vec<Check>) {
    const M: &str = "weierstrass-eval";
    let mut rng = stream_rng(derive_seed(seed, "verify-weierstrass", 0), 0);
    let mut failures = Vec::new();
    for (name, s) in [("A", system_a()), ("B", system_b()), ("uneven", uneven())] {
        let tol = 1e-9;
        let coarse = truncation_depth(&s, tol).unwrap();
        let fine = truncation_depth(&s, tol / 10.0).unwrap();
        let worst = (0..1000)
            .map(|_| rng.gen_range(0.0..1.0))
            .map(|x| (eval_w(&s, x, &coarse) - eval_w(&s, x, &fine)).abs())
            .fold(0.0, f64::max);
        if worst > tol {
            failures.push(format!("{name}: {worst:.2e}"));
        }
    }
    out.push(check(M, "downward closure of truncation", failures.is_empty(), failures.join("; ")));

    let s = system_b();
    let p = plan(&s);
    let bound = p.tail_bound / s.lambda_min();
    let worst = (0..1000).map(|_| graph_lift_residual(&s, rng.gen_range(0.0..1.0), &p)).fold(0.0, f64::max);
    out.push(check(M, "G commutes with the graph lift", worst <= bound, format!("max {worst:.2e}, bound {bound:.2e}")));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(0..=30);
        let (xi, x, y): (f64, f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0));
        let (a, b, c) = skew_inverse_fibre(&s, xi, x, y, n);
        let word = s.coding_word(xi, n);
        // iterate with the symbols of xi, not with tau^k(xi), whose digits wash out
        let (mut z, mut v) = (x, y);
        for &k in word.symbols() {
            let step = skew_inverse_step(&s, s.inverse_branch(k, 0.5), z, v);
            z = step.1;
            v = step.2;
        }
        let mut xi_n = xi;
        for _ in 0..n {
            xi_n = s.tau(xi_n);
        }
        worst = worst.max((a - xi_n).abs()).max((b - z).abs()).max((c - v).abs());
    }
    out.push(check(M, "closed-form F^n equals iteration", worst <= 1e-10, format!("max error {worst:.2e}")));

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (xi, x): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if s.partition().iter().any(|a| (xi - a).abs() < 1e-12) {
            continue;
        }
        let (u, v) = baker(&s, xi, x);
        let (xi2, x2) = baker_inverse(&s, u, v);
        worst = worst.max((xi2 - xi).abs()).max((x2 - x).abs());
    }
    out.push(check(M, "baker map round trip", worst <= 1e-14, format!("max error {worst:.2e}")));

    // equal partition: the 3m midpoints of I_N contain the m midpoints of I_{N+1}
    let mut worst = f64::NEG_INFINITY;
    let m = 64;
    for _ in 0..50 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let n = rng.gen_range(0..8);
        let outer = s.cylinder_at(x, n);
        let inner = s.cylinder_at(x, n + 1);
        let o_n = oscillation_on(&s, outer.left, outer.right, 3 * m, &p);
        let o_n1 = oscillation_on(&s, inner.left, inner.right, m, &p);
        worst = worst.max(o_n1 - o_n - 2.0 * p.tail_bound);
    }
    out.push(check(M, "oscillation refines monotonically", worst <= 1e-12, format!("max excess {worst:.2e}")));
}

fn fibres(seed: u64, out: &mut Vec<Check>) {
    const M: &str = "stable-fibres";
    let s = system_b();
    let p = plan(&s);
    let uniform = BernoulliMeasure::<f64>::uniform(3);
    let mut rng = stream_rng(derive_seed(seed, "verify-fibres", 0), 0);

    let field = ThetaField::new(&s, 60);
    let gmax = s.gamma_max();
    let bound = s.g_prime_sup_norm() * gmax / (1.0 - gmax);
    let worst = (0..10_000)
        .map(|_| {
            let past = uniform.draw_word(60, &mut rng);
            field.theta(&past, rng.gen_range(0.0..1.0), &p).abs()
        })
        .fold(0.0, f64::max);
    out.push(check(M, "slope field bound", worst <= bound, format!("sup {worst:.4}, bound {bound:.4}")));

    let mut worst = 0.0f64;
    let mut used = 0;
    for _ in 0..1000 {
        let past = uniform.draw_word(61, &mut rng);
        let x: f64 = rng.gen_range(0.0..1.0);
        if let Ok(r) = eigen_residual(&field, &past, x, eval_w(&s, x, &p), 1e-6) {
            worst = worst.max(r);
            used += 1;
        }
    }
    out.push(check(M, "eigen relation", worst < 1e-5, format!("max {worst:.2e} over {used} interior samples")));

    let f30 = ThetaField::new(&s, 30);
    let mut inv = 0.0f64;
    let mut par = 0.0f64;
    for _ in 0..8 {
        let past = uniform.draw_word(31, &mut rng);
        let x: f64 = rng.gen_range(0.05..0.95);
        let y = eval_w(&s, x, &p);
        match fibre_invariance_residual(&f30, &past, x, y, 101) {
            Ok(r) => inv = inv.max(r),
            Err(_) => inv = f64::INFINITY,
        }
        match parallel_check(&f30, &past, x, y, y - 1.3, rng.gen_range(0.0..1.0)) {
            Ok(r) => par = par.max((r.ratio - 1.0).abs()),
            Err(_) => par = f64::INFINITY,
        }
    }
    out.push(check(M, "fibre invariance", inv < 1e-6, format!("max {inv:.2e}")));
    out.push(check(M, "fibres are parallel when lambda' = 0", par <= 1e-8, format!("max |ratio - 1| {par:.2e}")));

    let f40 = ThetaField::new(&s, 40);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let past = uniform.draw_word(40, &mut rng);
        let x: f64 = rng.gen_range(0.01..0.99);
        let series = f40.theta_dx(&past, x).unwrap_or(f64::NAN);
        let fd = |h: f64| (f40.theta(&past, x + h, &p) - f40.theta(&past, x - h, &p)) / (2.0 * h);
        let (e1, e2) = ((series - fd(1e-3)).abs(), (series - fd(5e-4)).abs());
        if !(e2 < e1 / 3.0 || e1 < 1e-11) || !((series - fd(1e-5)).abs() < 1e-8) {
            bad.push(format!("x={x:.3}: {e1:.1e}/{e2:.1e}"));
        }
    }
    out.push(check(M, "slope derivative matches differences", bad.is_empty(), format!("{} failures {}", bad.len(), bad.join(" "))));

    let d = degenerate();
    let dfield = ThetaField::new(&d, 20);
    let dplan = plan(&d);
    let nonzero = (0..1000)
        .filter(|_| dfield.theta(&uniform.draw_word(20, &mut rng), rng.gen_range(0.0..1.0), &dplan) != 0.0)
        .count();
    out.push(check(M, "degenerate system has zero slope field", nonzero == 0, format!("{nonzero} nonzero")));
}

fn dimension(seed: u64, out: &mut Vec<Check>) {
    const M: &str = "dimension-lab";
    let mut failures = Vec::new();
    for (name, s) in [("A", system_a()), ("B", system_b()), ("uneven", uneven())] {
        let vals: Vec<f64> = (0..=100).map(|k| pressure_eval(&s, 1.0 + k as f64 / 100.0)).collect();
        let ok = vals.windows(2).all(|w| w[1] < w[0]) && (0..=100).all(|k| pressure_derivative(&s, 1.0 + k as f64 / 100.0) < 0.0);
        if !ok {
            failures.push(name);
        }
    }
    out.push(check(M, "pressure strictly decreasing", failures.is_empty(), failures.join(", ")));

    let mut worst = 0.0f64;
    let mut resid = 0.0f64;
    for l in [2usize, 3, 5] {
        for k in 1..=5 {
            let b = 1.0 / l as f64 + (1.0 - 1.0 / l as f64) * k as f64 / 6.0;
            let s = System::new(System::equal_partition(l), LambdaKind::ConstantPerInterval(vec![b; l]), DisplacementKind::Cosine);
            let r = bowen_solve(&s).unwrap();
            worst = worst.max((r.s_star - (2.0 + b.ln() / (l as f64).ln())).abs());
            resid = resid.max(r.residual.abs());
        }
    }
    out.push(check(
        M,
        "Bowen root closed form",
        worst <= 1e-10 && resid < 1e-12,
        format!("max error {worst:.2e}, max residual {resid:.2e}"),
    ));

    let mut worst = 0.0f64;
    for s in [system_a(), system_b(), uneven()] {
        let r = bowen_solve(&s).unwrap();
        let m = BernoulliMeasure::new(r.p_star.clone()).unwrap();
        worst = worst.max((formula_dims(&m, &s).dim_mu - r.s_star).abs());
    }
    out.push(check(M, "dimension formula at p* equals s*", worst <= 1e-10, format!("max error {worst:.2e}")));

    let s = system_a();
    let end = [0.98, 0.01, 0.01];
    let steps = 2000;
    let mut jumps = 0.0f64;
    let mut mismatched = 0;
    let mut prev: Option<f64> = None;
    for k in 0..=steps {
        let u = k as f64 / steps as f64;
        let p: Vec<f64> = end.iter().map(|e| (1.0 - u) / 3.0 + u * e).collect();
        let m = BernoulliMeasure::new(p).unwrap();
        let d = formula_dims(&m, &s);
        let e = m.integrals(&s);
        let high = e.entropy >= -e.log_lambda;
        let argmin_high = d.candidate_high <= d.candidate_low;
        if high != (d.regime == Regime::AtLeastOne) || (high != argmin_high && (d.candidate_high - d.candidate_low).abs() > 1e-12) {
            mismatched += 1;
        }
        if let Some(q) = prev {
            jumps = jumps.max((d.dim_mu - q).abs());
        }
        prev = Some(d.dim_mu);
    }
    out.push(check(
        M,
        "regime switches at h = -int log lambda",
        mismatched == 0 && jumps < 5e-3,
        format!("{mismatched} mismatches, max step {jumps:.2e}"),
    ));

    let n = 1 << 16;
    let control = Graph {
        points: (0..n).map(|k| { let x = k as f64 / (n - 1) as f64; (x, x) }).collect(),
        plan: Plan::with_depth(&s, 0),
    };
    let r = box_count_graph(&control, 4, 14, None).unwrap();
    out.push(check(M, "smooth graph has box dimension 1", (r.slope - 1.0).abs() <= 0.03, format!("slope {:.4}", r.slope)));

    let b = system_b();
    let values: Vec<f64> = weierlab_core::transversality::theta_distribution_sample(&b, &BernoulliMeasure::critical(&b), 0.3, 20_000, seed)
        .map(|t| t.rows.iter().map(|r| r.2).collect())
        .unwrap_or_default();
    let scaled: Vec<f64> = values.iter().map(|v| 7.5 * v - 3.0).collect();
    let c1 = correlation_dim(&values, &default_radii(&values));
    let c2 = correlation_dim(&scaled, &default_radii(&scaled));
    let (pass, detail) = match (c1, c2) {
        (Ok(a), Ok(b)) => {
            let d = (a.slope - b.slope).abs();
            (d <= 3.0 * a.stderr.max(b.stderr).max(0.01), format!("{:.4} vs {:.4}", a.slope, b.slope))
        }
        (a, b) => (false, format!("{:?} {:?}", a.err(), b.err())),
    };
    out.push(check(M, "correlation dimension is affine invariant", pass, detail));
}

fn transversality(seed: u64, out: &mut Vec<Check>) {
    const M: &str = "transversality";
    let mut worst = 0.0f64;
    for s in [system_a(), system_b(), uneven()] {
        let d = delta0_compute(&s, 4096);
        worst = worst.max((d.value - d.grid_value).abs());
    }
    out.push(check(M, "delta0 grid equals endpoints", worst <= 1e-12, format!("max gap {worst:.2e}")));

    let mut worst = 0.0f64;
    let mut verdicts = 0;
    for l in 2..=6usize {
        for k in 1..=9 {
            let theta = k as f64 / 10.0;
            let s = System::new(System::equal_partition(l), LambdaKind::TauPower { theta }, DisplacementKind::Cosine);
            let c = thm_example2_check(&s).unwrap();
            let lf = l as f64;
            let closed = 1.0 / (lf.powf(1.0 - theta) - 1.0).powi(2) + 1.0 / (lf.powf(2.0 - theta) - 1.0).powi(2);
            worst = worst.max((c.cond2_sum - closed).abs() / closed);
            let expect = closed < (std::f64::consts::PI / lf).sin().powi(2);
            if c.cond2_ok != expect {
                verdicts += 1;
            }
        }
    }
    out.push(check(
        M,
        "cond2 closed form on equal partitions",
        worst <= 1e-12 && verdicts == 0,
        format!("max relative error {worst:.2e}, {verdicts} verdict mismatches"),
    ));

    let mut rng = stream_rng(derive_seed(seed, "verify-transversality", 0), 0);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=5);
        let mut atoms: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.1..1.0))).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        atoms.iter_mut().for_each(|a| a.1 /= total);
        let r = rng.gen_range(0.01..0.5);
        worst = worst.max((ball_norm_exact(&atoms, r) - ball_norm_pairs(&atoms, r)).abs());
    }
    out.push(check(M, "pair identity on discrete measures", worst <= 1e-12, format!("max error {worst:.2e}")));

    let b = system_b();
    let pc = BernoulliMeasure::critical(&b);
    let reps = 100;
    let passes = (0..reps)
        .filter(|k| {
            selfsimilarity_check(&b, &pc, 0.3, 20_000, derive_seed(seed, "verify-ks", *k as u64)).is_ok_and(|c| c.passes)
        })
        .count();
    out.push(check(M, "self-similarity KS passes", passes * 100 >= 95 * reps, format!("{passes} of {reps}")));

    let mut worst = f64::NEG_INFINITY;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let coarse = eps_delta_scan(&b, i, j, ScanGrid { xi: 8, eta: 8, x: 32 }, 27).unwrap();
        let fine = eps_delta_scan(&b, i, j, ScanGrid { xi: 16, eta: 16, x: 64 }, 27).unwrap();
        worst = worst.max(fine.margin - coarse.margin);
    }
    out.push(check(M, "scan margin non-increasing under refinement", worst <= 0.0, format!("max increase {worst:.2e}")));

    let mut bad = Vec::new();
    for (name, s) in [("A", system_a()), ("B", system_b())] {
        let r = transversality_report(&s, ScanGrid { xi: 4, eta: 4, x: 16 }, 20).unwrap();
        let positive = r.example2.as_ref().is_some_and(|c| c.cond1.iter().all(|m| m.margin > 0.0) && c.cond2_margin > 0.0);
        if r.analytic_verdict && !(positive && r.beta < 1.0) {
            bad.push(name);
        }
    }
    out.push(check(M, "verdict implies positive margins and beta < 1", bad.is_empty(), bad.join(", ")));
}

const SMALL: &str = r#"
[compute]
samples = 20000
graph_points = 20000
scales = [3, 10]
scan_grid = [4, 4, 16]
recursion_levels = 3
corr_fibres = 16
corr_per_fibre = 200
ks_repetitions = 2
anchors = 200
eval_points = 65
"#;

fn small_ctx(system: &str) -> Context {
    Context::new(parse_config(&format!("{system}\n{SMALL}")).expect("reference config parses")).expect("valid")
}

const SYSTEM_A: &str = "[system]\nintervals = 3\nlambda = { kind = \"constant\", values = [0.6, 0.6, 0.6] }\ng = { kind = \"cosine\" }";
const SYSTEM_B: &str = "[system]\nintervals = 3\nlambda = { kind = \"tau-power\", theta = 0.2 }\ng = { kind = \"cosine\" }";

const DETERMINISM: [Command; 6] =
    [Command::Eval, Command::SampleGraph, Command::Boxdim, Command::Theta, Command::Tsujii, Command::Report];

fn all_files(ctx: &Context, threads: usize) -> Result<Vec<(String, String)>, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let mut files = Vec::new();
        for cmd in DETERMINISM {
            let o = run(cmd, ctx).map_err(|e| e.to_string())?;
            files.extend(o.artifacts.files(true, true));
        }
        Ok(files)
    })
}

fn cli_io(out: &mut Vec<Check>) {
    const M: &str = "cli-io";
    let ctx = small_ctx(SYSTEM_B);
    let runs = [all_files(&ctx, 1), all_files(&ctx, 1), all_files(&ctx, 2)];
    let (same, detail) = match &runs {
        [Ok(a), Ok(b), Ok(c)] => {
            let differing: Vec<&str> =
                a.iter().zip(b).zip(c).filter(|((x, y), z)| x != y || x != z).map(|((x, _), _)| x.0.as_str()).collect();
            (differing.is_empty(), format!("{} files, differing: {:?}", a.len(), differing))
        }
        _ => (false, format!("{:?}", runs.iter().filter_map(|r| r.as_ref().err()).collect::<Vec<_>>())),
    };
    out.push(check(M, "byte-identical across runs and threads", same, detail));

    let mut problems = Vec::new();
    if let Ok(files) = &runs[0] {
        for (name, text) in files {
            if name.ends_with(".csv") {
                let header = text.lines().next().unwrap_or("");
                if header.is_empty() || header.parse::<f64>().is_ok() || header.split(',').any(|h| h.parse::<f64>().is_ok()) {
                    problems.push(format!("{name}: no header"));
                }
            } else {
                match serde_json::from_str(text) {
                    Ok(doc) => {
                        let errs = schema_errors(&doc);
                        if !errs.is_empty() {
                            problems.push(format!("{name}: {}", errs.join("; ")));
                        }
                    }
                    Err(e) => problems.push(format!("{name}: {e}")),
                }
            }
        }
    } else {
        problems.push("no artifacts".into());
    }
    out.push(check(M, "CSV headers and JSON schema", problems.is_empty(), problems.join(" | ")));

    let mut bad = Vec::new();
    for (name, system, expect) in [("A", SYSTEM_A, false), ("B", SYSTEM_B, true)] {
        let ctx = small_ctx(system);
        let certified = run(Command::Report, &ctx)
            .ok()
            .and_then(|o| o.artifacts.json.first().map(|(_, v)| v["result"]["verdict"]["certified"].as_bool()))
            .flatten();
        let analytic = thm_example2_check(&ctx.spec).is_ok_and(|c| c.certified);
        if certified != Some(expect) || certified == Some(true) && !analytic {
            bad.push(format!("{name}: {certified:?}"));
        }
    }
    out.push(check(M, "report certifies only with analytic conditions", bad.is_empty(), bad.join(", ")));
}
