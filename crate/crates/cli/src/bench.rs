use std::fs;
use std::path::Path;

use pom_lite::bench::{
    loglog_slope, mean_se, recall_curve_suite, run_entropy_search, run_fidelity_suite, runtime_sweep, summarize,
    synthetic_belief, BenchRecord, EsBackend, EsConfig, Family, FidelityConfig, RecallMethod, RuntimeConfig, Suite,
    TruthPolicy,
};
use pom_lite::{estimate_independence, ConvergenceConfig, Method, SeededRng};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::io::{opt, record_row, write_json, write_table, RECORD_HEADER};
use crate::{BenchArgs, SuiteName};

/// Reference PoM for recall curves, as in the synthetic fidelity suite.
const RECALL_TRUTH: TruthPolicy = TruthPolicy::Independence { alpha: 200.0, epsilon_floor: 5e-4 };

const SUMMARY_HEADER: [&str; 8] =
    ["estimator", "domain_size", "count", "errors", "tv_mean", "tv_se", "wall_time_mean_s", "wall_time_se_s"];

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::output(&args.out_dir, e))?;
    let family: Family = args.family.parse()?;
    let (name, records, config) = match args.suite {
        SuiteName::Synthetic => {
            let mut cfg = FidelityConfig::synthetic(
                family,
                args.sizes.clone().unwrap_or_else(|| vec![100, 1000, 10000]),
                args.seeds.unwrap_or(20),
            );
            apply_common(&mut cfg, args);
            if let Some(a) = args.alpha {
                cfg.truth = TruthPolicy::Independence { alpha: a, epsilon_floor: truth_floor(&cfg.truth) };
            }
            ("synthetic", run_fidelity_suite(&cfg)?, fidelity_doc(&cfg))
        }
        SuiteName::Gp1d => {
            let mut cfg = FidelityConfig::gp1d(args.seeds.unwrap_or(10));
            if let Suite::Gp1d { size, steps, .. } = &mut cfg.suite {
                if let Some(s) = args.sizes.as_ref().and_then(|s| s.first()) {
                    *size = *s;
                }
                if let Some(s) = args.steps {
                    *steps = s;
                }
            }
            apply_common(&mut cfg, args);
            ("gp1d", run_fidelity_suite(&cfg)?, fidelity_doc(&cfg))
        }
        SuiteName::Dropwave => {
            let mut cfg = FidelityConfig::dropwave(args.seeds.unwrap_or(10));
            if let Suite::Dropwave { steps, initial, .. } = &mut cfg.suite {
                if let Some(s) = args.steps {
                    *steps = s;
                    cfg.eval_steps.retain(|&e| e <= *initial + s);
                }
            }
            apply_common(&mut cfg, args);
            ("dropwave", run_fidelity_suite(&cfg)?, fidelity_doc(&cfg))
        }
        SuiteName::Runtime => {
            let mut cfg = RuntimeConfig::new(
                args.sizes.clone().unwrap_or_else(|| vec![10_000, 100_000, 1_000_000]),
                args.alpha.unwrap_or(1.0),
                args.seeds.unwrap_or(1),
            );
            cfg.family = family;
            cfg.master_seed = args.master_seed;
            if let Some(m) = &args.methods {
                cfg.methods = m.clone();
            }
            let records = runtime_sweep(&cfg)?;
            write_slopes(&args.out_dir, &cfg.methods, &records)?;
            let doc = json!({
                "suite": "runtime",
                "sizes": cfg.sizes,
                "methods": tags(&cfg.methods),
                "alpha": cfg.alpha,
                "seeds": cfg.seeds,
                "family": cfg.family.name(),
                "budget_s": cfg.budget.as_secs_f64(),
                "tv": "not computed; no reference is affordable at the largest sizes",
            });
            ("runtime", records, doc)
        }
        SuiteName::EntropySearch => {
            let size = args.sizes.as_ref().and_then(|s| s.first().copied()).unwrap_or(100);
            let cfg = EsConfig {
                size,
                steps: args.steps.unwrap_or(15),
                master_seed: args.master_seed,
                ..EsConfig::default()
            };
            let alpha = args.alpha.unwrap_or(10.0);
            let backends = [EsBackend::Flite { alpha }, EsBackend::Tsmc { samples: 4 }];
            let mut records = Vec::new();
            for backend in backends {
                for seed in 0..args.seeds.unwrap_or(10) {
                    let mut rec = BenchRecord {
                        estimator: backend.to_string(),
                        instance_id: 0,
                        seed,
                        domain_size: size,
                        bo_step: Some(cfg.steps),
                        tv: None,
                        entropy_est: None,
                        entropy_true: None,
                        wall_time_s: f64::NAN,
                        error: None,
                    };
                    match run_entropy_search(&cfg, backend, seed) {
                        Ok(r) => {
                            rec.entropy_est = Some(r.final_entropy);
                            rec.wall_time_s = r.acquisition_time_s;
                        }
                        Err(e) => rec.error = Some(e.to_string()),
                    }
                    records.push(rec);
                }
            }
            let doc = json!({
                "suite": "entropy-search",
                "size": cfg.size,
                "steps": cfg.steps,
                "n_fantasy": cfg.n_fantasy,
                "kernel": "squared-exponential",
                "length_scale": cfg.length_scale,
                "amplitude": cfg.amplitude,
                "noise_std": cfg.noise_std,
                "flite_alpha": alpha,
                "tsmc_samples": 4,
                "entropy_est": "TS-MC entropy of the final full posterior",
                "reference_samples": cfg.reference_samples,
            });
            ("entropy_search", records, doc)
        }
        SuiteName::Recall => return run_recall(args, family),
    };
    finish(args, name, &records, config)
}

fn truth_floor(t: &TruthPolicy) -> f64 {
    match t {
        TruthPolicy::Independence { epsilon_floor, .. } => *epsilon_floor,
        TruthPolicy::Tsmc { .. } => 0.0,
    }
}

fn apply_common(cfg: &mut FidelityConfig, args: &BenchArgs) {
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(m) = &args.methods {
        cfg.methods = m.clone();
    }
    cfg.master_seed = args.master_seed;
}

fn tags(methods: &[Method]) -> Vec<&'static str> {
    methods.iter().map(|m| m.tag()).collect()
}

fn fidelity_doc(cfg: &FidelityConfig) -> Value {
    let suite = match &cfg.suite {
        Suite::Synthetic { family, sizes } => json!({"name": "synthetic", "family": family.name(), "sizes": sizes}),
        Suite::Gp1d { size, length_scale, noise_std, steps } => json!({
            "name": "gp1d", "size": size, "kernel": "squared-exponential", "length_scale": length_scale,
            "amplitude": 1.0, "noise_std": noise_std, "steps": steps, "acquisition": "thompson sampling",
        }),
        Suite::Dropwave { per_axis, steps, initial, length_scale, amplitude, noise_std } => json!({
            "name": "dropwave", "grid": format!("{per_axis}x{per_axis} on [-2.5, 2]^2"), "steps": steps,
            "initial_random": initial, "kernel": "matern52", "length_scale": length_scale, "amplitude": amplitude,
            "noise_std": noise_std, "mean": "average of observations", "acquisition": "expected improvement over best observation",
            "hyperparameters": "fixed, not fitted by marginal likelihood",
        }),
    };
    let truth = match cfg.truth {
        TruthPolicy::Independence { alpha, epsilon_floor } => {
            json!({"method": "indep", "alpha": alpha, "epsilon_floor": epsilon_floor})
        }
        TruthPolicy::Tsmc { alpha, max_samples } => json!({"method": "tsmc", "alpha": alpha, "delta": 0.05, "max_samples": max_samples}),
    };
    json!({
        "suite": suite,
        "methods": tags(&cfg.methods),
        "alpha": cfg.alpha,
        "seeds": cfg.seeds,
        "truth": truth,
        "eval_steps": cfg.eval_steps,
    })
}

fn finish(args: &BenchArgs, name: &str, records: &[BenchRecord], mut config: Value) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = records.iter().map(record_row).collect();
    write_table(&args.out_dir.join(format!("{name}.csv")), &RECORD_HEADER, &rows)?;
    let summary: Vec<Vec<String>> = summarize(records)
        .iter()
        .map(|s| {
            vec![
                s.estimator.clone(),
                s.domain_size.to_string(),
                s.count.to_string(),
                s.errors.to_string(),
                opt(s.tv_mean),
                opt(s.tv_se),
                s.wall_time_mean.to_string(),
                s.wall_time_se.to_string(),
            ]
        })
        .collect();
    write_table(&args.out_dir.join(format!("{name}_summary.csv")), &SUMMARY_HEADER, &summary)?;
    provenance(&mut config, args);
    write_json(&args.out_dir.join(format!("{name}_config.json")), &config)?;
    let ok = records.iter().filter(|r| r.error.is_none()).count();
    println!("{name}: {} rows ({ok} ok) -> {}", records.len(), args.out_dir.display());
    if ok == 0 && !records.is_empty() {
        return Err(CliError::AllRowsFailed);
    }
    Ok(())
}

fn provenance(config: &mut Value, args: &BenchArgs) {
    if let Value::Object(map) = config {
        map.insert("master_seed".into(), json!(args.master_seed));
        map.insert("rng".into(), json!(SeededRng::ALGORITHM));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        map.insert("threads".into(), json!(rayon::current_num_threads()));
    }
}

fn write_slopes(dir: &Path, methods: &[Method], records: &[BenchRecord]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for m in methods {
        let mut sizes: Vec<usize> = records.iter().filter(|r| r.estimator == m.tag()).map(|r| r.domain_size).collect();
        sizes.dedup();
        let pts: Vec<(usize, f64)> = sizes
            .iter()
            .filter_map(|&n| {
                let times: Vec<f64> = records
                    .iter()
                    .filter(|r| r.estimator == m.tag() && r.domain_size == n && r.error.is_none())
                    .map(|r| r.wall_time_s)
                    .collect();
                mean_se(&times).map(|(mean, _)| (n, mean))
            })
            .collect();
        let slope = loglog_slope(&pts);
        println!("{}: log-log slope {}", m.tag(), slope.map_or("n/a".into(), |s| format!("{s:.3}")));
        rows.push(vec![m.tag().to_string(), opt(slope), pts.len().to_string()]);
    }
    write_table(&dir.join("runtime_slopes.csv"), &["estimator", "slope", "sizes_used"], &rows)
}

fn run_recall(args: &BenchArgs, family: Family) -> Result<(), CliError> {
    let size = args.sizes.as_ref().and_then(|s| s.first().copied()).unwrap_or(400);
    let seeds = args.seeds.unwrap_or(10);
    let cfg = ConvergenceConfig::with_alpha(args.alpha.unwrap_or(10.0));
    let pom: Vec<Method> = args.methods.clone().unwrap_or_else(|| vec![Method::Flite, Method::Alite, Method::Fvapor, Method::Est]);
    let mut methods = vec![RecallMethod::GroundTruth];
    methods.extend(pom.iter().map(|m| RecallMethod::Pom(*m)));
    methods.extend([RecallMethod::Ts, RecallMethod::Means]);

    let mut curve_rows = Vec::new();
    let mut aucs: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    let mut filled = Vec::new();
    for seed in 0..seeds {
        let mut rng = SeededRng::derive(args.master_seed, size as u64, seed);
        let belief = synthetic_belief(size, &mut rng, family.name())?;
        let eps = RECALL_TRUTH.effective_epsilon(size);
        let truth = estimate_independence(&belief, &ConvergenceConfig::with_epsilon(eps).exec(cfg.exec))?;
        let report = recall_curve_suite(&belief, &truth.probs, &methods, &cfg, &mut rng)?;
        filled.push(report.ts_filled.len());
        for (i, c) in report.curves.iter().enumerate() {
            aucs[i].push(c.auc());
            for (k, r) in c.k_values.iter().zip(&c.recalls) {
                curve_rows.push(vec![c.estimator.clone(), size.to_string(), seed.to_string(), k.to_string(), r.to_string()]);
            }
        }
    }
    let out = &args.out_dir;
    write_table(&out.join("recall.csv"), &["estimator", "domain_size", "seed", "k", "recall"], &curve_rows)?;
    let summary: Vec<Vec<String>> = methods
        .iter()
        .zip(&aucs)
        .map(|(m, a)| {
            let (mean, se) = mean_se(a).unwrap_or((f64::NAN, f64::NAN));
            vec![m.tag(), a.len().to_string(), mean.to_string(), se.to_string()]
        })
        .collect();
    write_table(&out.join("recall_summary.csv"), &["estimator", "count", "auc_mean", "auc_se"], &summary)?;
    let mut doc = json!({
        "suite": "recall",
        "size": size,
        "seeds": seeds,
        "family": family.name(),
        "alpha": args.alpha.unwrap_or(10.0),
        "methods": methods.iter().map(|m| m.tag()).collect::<Vec<_>>(),
        "truth": {"method": "indep", "epsilon": RECALL_TRUTH.effective_epsilon(size)},
        "ts_rule": "first k distinct argmaxes within 50·k draws, completed by means",
        "ts_filled_k_per_seed": filled,
    });
    provenance(&mut doc, args);
    write_json(&out.join("recall_config.json"), &doc)?;
    println!("recall: {seeds} instances of {size} arms -> {}", out.display());
    Ok(())
}
