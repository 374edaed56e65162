//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 2 4`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pom_lite::bench::{
    loglog_slope, recall_curve_suite, run_entropy_search, run_fidelity_suite, runtime_sweep, synthetic_belief,
    EsBackend, EsConfig, Family, FidelityConfig, RecallMethod, RuntimeConfig, TruthPolicy,
};
use pom_lite::estimators::{tsmc_sample_count, tsmc_with_samples};
use pom_lite::{
    alite_detailed, estimate_flite, estimate_fvapor, estimate_independence, flite_gradients, flite_search,
    objective_v, objective_w, shannon_entropy, std_normal_cdf, tv_distance, ConvergenceConfig, Exec,
    FullGaussianBelief, IndependentGaussianBelief, Method, SeededRng,
};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

/// Reference accuracy policy shared with the synthetic benchmark suite.
const TRUTH: TruthPolicy = TruthPolicy::Independence { alpha: 200.0, epsilon_floor: 5e-4 };

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: impl Into<String>) -> Verdict {
    Verdict { pass, summary: summary.into() }
}

fn truth(belief: &IndependentGaussianBelief) -> Vec<f64> {
    let eps = TRUTH.effective_epsilon(belief.len());
    estimate_independence(belief, &ConvergenceConfig::with_epsilon(eps)).expect("reference").probs
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn random_belief(rng: &mut SeededRng, n: usize) -> IndependentGaussianBelief {
    synthetic_belief(n, rng, "main").expect("belief")
}

fn c1_synthetic_fidelity() -> Verdict {
    let start = Instant::now();
    let cfg = FidelityConfig::synthetic(Family::Main, vec![100, 1000, 10000], 20);
    let rows = run_fidelity_suite(&cfg).expect("suite");
    let elapsed = start.elapsed();
    let mut tv: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut errors = 0;
    for r in &rows {
        match r.tv {
            Some(t) if r.error.is_none() => tv.entry(r.estimator.as_str()).or_default().push(t),
            _ => errors += 1,
        }
    }
    let m = |k: &str| tv.get(k).map(|v| mean(v)).unwrap_or(f64::NAN);
    let (a, f, v, e) = (m("alite"), m("flite"), m("fvapor"), m("est"));
    for (k, vals) in &tv {
        let per_size: Vec<String> = [0, 1, 2].iter().map(|&i| format!("{:.4}", mean(&vals[i * 20..(i + 1) * 20]))).collect();
        println!("    {k:7} mean TV {:.4}  by size 100/1000/10000: {}", mean(vals), per_size.join(" / "));
    }
    let clauses = [
        ("no failed rows", errors == 0),
        ("alite <= flite + 0.005", a <= f + 0.005),
        ("flite < fvapor", f < v),
        ("fvapor < est", v < e),
        ("flite in [0.02, 0.09]", (0.02..=0.09).contains(&f)),
        ("runtime <= 600 s", elapsed <= Duration::from_secs(600)),
    ];
    let failing: Vec<&str> = clauses.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        failing.is_empty(),
        format!(
            "synthetic fidelity: mean TV alite {a:.4}, flite {f:.4}, fvapor {v:.4}, est {e:.4}; {errors} failed rows; \
             {:.0} s (limit 600); failing clauses: [{}]",
            elapsed.as_secs_f64(),
            failing.join(", ")
        ),
    )
}

fn c2_flite_epsilon_contract() -> Verdict {
    let mut rng = SeededRng::new(2002);
    let sizes = [10, 100, 1000];
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for i in 0..50 {
        let b = random_belief(&mut rng, sizes[i % 3]);
        let reference = flite_search(&b, &ConvergenceConfig::with_epsilon(1e-13)).expect("reference");
        let kappa = reference.threshold();
        let limit: Vec<f64> = b.mu().iter().zip(b.sigma()).map(|(m, s)| std_normal_cdf((m - kappa) / s)).collect();
        for eps in [1e-2, 1e-4, 1e-6] {
            let est = estimate_flite(&b, &ConvergenceConfig::with_epsilon(eps)).expect("flite");
            let dev = est.probs.iter().zip(&limit).map(|(q, l)| (q - l).abs()).fold(0.0, f64::max);
            worst_ratio = worst_ratio.max(dev / eps);
            if dev > eps {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("F-LITE epsilon contract: {violations} of 150 runs exceed eps; worst deviation/eps = {worst_ratio:.3}"),
    )
}

fn c3_trapezoid_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = SeededRng::new(3003);
    let eps = 1e-4;
    let cfg = ConvergenceConfig::with_epsilon(eps);
    let mut worst_pair: f64 = 0.0;
    for _ in 0..100 {
        let b = random_belief(&mut rng, 2);
        let q = estimate_independence(&b, &cfg).expect("indep").probs;
        let (m, s) = (b.mu(), b.sigma());
        let exact = std_normal_cdf((m[0] - m[1]) / (s[0] * s[0] + s[1] * s[1]).sqrt());
        worst_pair = worst_pair.max((q[0] - exact).abs());
    }
    let samples = 10_000_000u64;
    let mut worst_z: f64 = 0.0;
    let mut mc_fail = 0;
    for _ in 0..10 {
        let b = random_belief(&mut rng, 5);
        let q = estimate_independence(&b, &cfg).expect("indep").probs;
        let mc = tsmc_with_samples(&b.to_full(), samples, &mut rng, Exec::default()).expect("mc").probs;
        for (qx, px) in q.iter().zip(&mc) {
            let se = (px * (1.0 - px) / samples as f64).sqrt();
            if (qx - px).abs() > eps + 3.0 * se {
                mc_fail += 1;
            }
            worst_z = worst_z.max(((qx - px).abs() - eps).max(0.0) / se.max(1e-300));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst_pair <= eps && mc_fail == 0 && elapsed <= Duration::from_secs(120),
        format!(
            "trapezoid oracle: 2-arm max error {worst_pair:.2e} <= {eps:e}; 5-arm {mc_fail} of 50 arms outside \
             eps + 3 SE (worst excess {worst_z:.2} SE); {:.0} s (limit 120)",
            elapsed.as_secs_f64()
        ),
    )
}

fn c4_gradients() -> Verdict {
    let mut rng = SeededRng::new(4004);
    let inner = ConvergenceConfig::with_epsilon(1e-10);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_colsum: f64 = 0.0;
    for _ in 0..20 {
        let b = random_belief(&mut rng, 8);
        let kappa = flite_search(&b, &inner).expect("search").threshold();
        let g = flite_gradients(&b, kappa);
        let eval = |mu: Vec<f64>, sigma: Vec<f64>| {
            estimate_flite(&IndependentGaussianBelief::new(mu, sigma).unwrap(), &inner).unwrap().probs
        };
        for z in 0..8 {
            for (which, jac) in [(0, &g.dq_dmu), (1, &g.dq_dsigma)] {
                let (mut mu_p, mut sg_p) = (b.mu().to_vec(), b.sigma().to_vec());
                let (mut mu_m, mut sg_m) = (b.mu().to_vec(), b.sigma().to_vec());
                if which == 0 {
                    mu_p[z] += h;
                    mu_m[z] -= h;
                } else {
                    sg_p[z] += h;
                    sg_m[z] -= h;
                }
                let (qp, qm) = (eval(mu_p, sg_p), eval(mu_m, sg_m));
                for x in 0..8 {
                    let fd = (qp[x] - qm[x]) / (2.0 * h);
                    worst = worst.max((fd - jac[(x, z)]).abs());
                }
                let col: f64 = jac.column(z).iter().sum();
                worst_colsum = worst_colsum.max(col.abs());
            }
        }
    }
    verdict(
        worst <= 1e-5 && worst_colsum <= 1e-9,
        format!("gradient check: max |FD - analytic| = {worst:.2e} (limit 1e-5), max |column sum| = {worst_colsum:.2e} (limit 1e-9)"),
    )
}

fn dirichlet(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Move up to `1e-3` of mass between two random arms, or along a random
/// zero-sum direction, staying inside the simplex.
fn perturb(rng: &mut SeededRng, q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let mut p = q.to_vec();
    if rng.random_bool(0.5) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let t = rng.random_range(0.0..1.0) * p[j].min(1e-3);
        p[i] += t;
        p[j] -= t;
    } else {
        let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let zm = mean(&z);
        let dir: Vec<f64> = z.iter().map(|v| v - zm).collect();
        let room = q.iter().zip(&dir).filter(|(_, d)| **d < 0.0).map(|(qi, d)| qi / -d).fold(f64::INFINITY, f64::min);
        let t = rng.random_range(0.0..1.0) * room.min(1e-3);
        for (pi, d) in p.iter_mut().zip(&dir) {
            *pi = (*pi + t * d).max(0.0);
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
    }
    p
}

fn c5_variational_optimality() -> Verdict {
    let mut rng = SeededRng::new(5005);
    let cfg = ConvergenceConfig::with_epsilon(1e-12);
    let mut worst_w = f64::INFINITY;
    let mut worst_v = f64::INFINITY;
    for i in 0..10 {
        let b = random_belief(&mut rng, 3 + i % 8);
        let qf = estimate_flite(&b, &cfg).unwrap().probs;
        let qv = estimate_fvapor(&b, &cfg).unwrap().probs;
        let (wf, vf) = (objective_w(&b, &qf).unwrap(), objective_v(&b, &qv).unwrap());
        for k in 0..11_000 {
            let (pw, pv) = if k < 10_000 {
                let p = dirichlet(&mut rng, b.len());
                (p.clone(), p)
            } else {
                (perturb(&mut rng, &qf), perturb(&mut rng, &qv))
            };
            worst_w = worst_w.min(wf - objective_w(&b, &pw).unwrap());
            worst_v = worst_v.min(vf - objective_v(&b, &pv).unwrap());
        }
    }
    verdict(
        worst_w >= -1e-9 && worst_v >= -1e-9,
        format!("variational optimality: min W(flite) - W(p) = {worst_w:.2e}, min V(fvapor) - V(p) = {worst_v:.2e} (limit -1e-9)"),
    )
}

fn c6_tsmc_contract() -> Verdict {
    let n = 50;
    let b = FullGaussianBelief::new(vec![0.0; n], nalgebra::DMatrix::identity(n, n)).unwrap();
    let (eps, delta) = (0.02, 0.05);
    let samples = tsmc_sample_count(eps, delta) as u64;
    let mut rng = SeededRng::new(6006);
    let mut exceed = 0;
    let mut worst_dev: f64 = 0.0;
    let mut ceiling_ok = true;
    for _ in 0..20 {
        let est = tsmc_with_samples(&b, samples, &mut rng, Exec::default()).unwrap();
        for p in &est.probs {
            let d = (p - 1.0 / n as f64).abs();
            worst_dev = worst_dev.max(d);
            if d > eps {
                exceed += 1;
            }
        }
        ceiling_ok &= shannon_entropy(&est.probs).unwrap() <= (samples as f64).ln();
    }
    for small in [1u64, 2, 4, 8, 16, 32] {
        for _ in 0..20 {
            let est = tsmc_with_samples(&b, small, &mut rng, Exec::default()).unwrap();
            ceiling_ok &= shannon_entropy(&est.probs).unwrap() <= (small as f64).ln() + 1e-12;
        }
    }
    verdict(
        exceed <= 8 && ceiling_ok,
        format!(
            "TS-MC contract: {exceed} of 1000 cells deviate more than eps (limit 8), worst {worst_dev:.4}; \
             entropy <= ln(samples) for every histogram: {ceiling_ok}"
        ),
    )
}

fn c7_runtime_scaling() -> Verdict {
    let cfg = RuntimeConfig::new(vec![10_000, 100_000, 1_000_000], 1.0, 1);
    let rows = runtime_sweep(&cfg).expect("sweep");
    let series = |tag: &str| -> Vec<(usize, f64)> {
        rows.iter().filter(|r| r.estimator == tag && r.error.is_none()).map(|r| (r.domain_size, r.wall_time_s)).collect()
    };
    let at = |tag: &str, n: usize| series(tag).iter().find(|p| p.0 == n).map(|p| p.1);
    let mut pass = true;
    let mut parts = Vec::new();
    for tag in ["flite", "fvapor"] {
        let s = series(tag);
        let slope = loglog_slope(&s).unwrap_or(f64::NAN);
        let big = at(tag, 1_000_000).unwrap_or(f64::INFINITY);
        println!("    {tag:7} times {:?}", s);
        pass &= s.len() == 3 && slope <= 1.2 && big < 2.0;
        parts.push(format!("{tag} slope {slope:.2}, 1e6 in {big:.2} s"));
    }
    let alite = at("alite", 1_000_000).unwrap_or(f64::INFINITY);
    println!("    alite   times {:?}", series("alite"));
    pass &= alite < 30.0;
    let tsmc: Vec<String> = rows
        .iter()
        .filter(|r| r.estimator == "tsmc")
        .map(|r| format!("{}: {}", r.domain_size, r.error.clone().unwrap_or_else(|| format!("{:.2} s", r.wall_time_s))))
        .collect();
    println!("    tsmc    {}", tsmc.join("; "));
    // TS-MC may finish or time out at 1e5 and above; at 1e4 it is only
    // expected to be recorded
    verdict(pass, format!("runtime scaling: {}; alite 1e6 in {alite:.2} s (limit 30)", parts.join("; ")))
}

fn c8_recall() -> Verdict {
    let cfg = ConvergenceConfig::with_alpha(10.0);
    let pom = [Method::Flite, Method::Alite, Method::Fvapor, Method::Est];
    let mut methods = vec![RecallMethod::GroundTruth];
    methods.extend(pom.iter().map(|m| RecallMethod::Pom(*m)));
    methods.extend([RecallMethod::Ts, RecallMethod::Means]);
    let mut auc: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    let mut beaten = 0;
    for seed in 0..10 {
        let mut rng = SeededRng::derive(8008, 400, seed);
        let b = random_belief(&mut rng, 400);
        let gt = truth(&b);
        let rep = recall_curve_suite(&b, &gt, &methods, &cfg, &mut rng).expect("recall");
        let best = &rep.curves[0].recalls;
        for (i, c) in rep.curves.iter().enumerate() {
            auc[i].push(c.auc());
            beaten += c.recalls.iter().zip(best).filter(|(r, g)| **r > **g + 1e-12).count();
        }
    }
    let aucs: Vec<f64> = auc.iter().map(|a| mean(a)).collect();
    for (m, a) in methods.iter().zip(&aucs) {
        println!("    {:12} AUC {:.4}", m.tag(), a);
    }
    let ts = aucs[methods.len() - 2];
    let means = aucs[methods.len() - 1];
    let pom_ok = aucs[1..=pom.len()].iter().all(|a| *a >= ts - 0.01);
    let pass = pom_ok && ts >= means - 0.01 && beaten == 0;
    verdict(
        pass,
        format!(
            "recall: min PoM AUC {:.4} >= TS {ts:.4} - 0.01, TS >= MEANS {means:.4} - 0.01; ground truth beaten {beaten} times",
            aucs[1..=pom.len()].iter().copied().fold(f64::INFINITY, f64::min)
        ),
    )
}

fn c9_alite_intervals() -> Verdict {
    let mut rng = SeededRng::new(9009);
    let sizes = [10, 100, 1000];
    let mut bad = 0;
    let mut worst_gap_ratio: f64 = 0.0;
    let (mut tv_a, mut tv_v) = (Vec::new(), Vec::new());
    for i in 0..50 {
        let b = random_belief(&mut rng, sizes[i % 3]);
        let cfg = ConvergenceConfig::with_alpha(200.0);
        let eps = cfg.epsilon(b.len()).unwrap();
        let out = alite_detailed(&b, &cfg).expect("alite");
        let gap = out.max_gap();
        worst_gap_ratio = worst_gap_ratio.max(gap / eps);
        let ok = gap < eps
            && out.p_low.iter().zip(&out.p_up).all(|(l, u)| {
                let mid = 0.5 * (l + u);
                l <= u && (mid - l).abs() <= gap && (u - mid).abs() <= gap
            });
        if !ok {
            bad += 1;
        }
        let gt = truth(&b);
        tv_a.push(tv_distance(&out.estimate.probs, &gt).unwrap());
        tv_v.push(tv_distance(&estimate_fvapor(&b, &cfg).unwrap().probs, &gt).unwrap());
    }
    let (a, v) = (mean(&tv_a), mean(&tv_v));
    verdict(
        bad == 0 && a <= v,
        format!(
            "A-LITE intervals: {bad} of 50 beliefs violate the bound contract (worst gap/eps {worst_gap_ratio:.3}); \
             mean TV alite {a:.4} <= fvapor {v:.4}"
        ),
    )
}

fn c10_entropy_search() -> Verdict {
    let cfg = EsConfig::default();
    let mut res = Vec::new();
    for backend in [EsBackend::Flite { alpha: 10.0 }, EsBackend::Tsmc { samples: 4 }] {
        let mut h = Vec::new();
        let mut t = 0.0;
        for seed in 0..10 {
            let run = run_entropy_search(&cfg, backend, seed).expect("entropy search");
            h.push(run.final_entropy);
            t += run.acquisition_time_s;
        }
        println!("    {backend:7} mean final entropy {:.4}, acquisition time {t:.2} s", mean(&h));
        res.push((mean(&h), t));
    }
    let ((hf, tf), (ht, tt)) = (res[0], res[1]);
    verdict(
        hf <= ht + 0.05 && tf <= tt / 5.0,
        format!(
            "entropy search: flite entropy {hf:.4} <= tsmc {ht:.4} + 0.05; flite time {tf:.2} s <= tsmc {tt:.2} s / 5"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1", c1_synthetic_fidelity),
        ("2", c2_flite_epsilon_contract),
        ("3", c3_trapezoid_oracle),
        ("4", c4_gradients),
        ("5", c5_variational_optimality),
        ("6", c6_tsmc_contract),
        ("7", c7_runtime_scaling),
        ("8", c8_recall),
        ("9", c9_alite_intervals),
        ("10", c10_entropy_search),
    ];
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| s == id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {} ({:.1} s)", v.summary, start.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
