use std::time::Instant;

use pom_lite::{estimate, estimate_tsmc, shannon_entropy, ConvergenceConfig, Method, SeededRng};

use crate::error::CliError;
use crate::io::{read_belief, write_json, Belief, ResultFile, SCHEMA_VERSION};
use crate::EstimateArgs;

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    if args.method == Method::Tsmc && args.seed.is_none() {
        return Err(CliError::Usage("--seed is required for tsmc".into()));
    }
    let loaded = read_belief(&args.input)?;
    let n = loaded.len();
    let mut cfg = ConvergenceConfig::from_accuracy(args.accuracy.accuracy());
    if let Some(m) = args.max_iters {
        cfg = cfg.max_iterations(m);
    }
    let epsilon = cfg.epsilon(n).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rng = SeededRng::new(args.seed.unwrap_or(0));

    let start = Instant::now();
    let est = match (&loaded.belief, args.method) {
        (Belief::Full(full), Method::Tsmc) => estimate_tsmc(full, &cfg, &mut rng)?,
        (Belief::Independent(b), Method::Tsmc) => {
            if !args.allow_diag {
                return Err(CliError::Mismatch(
                    "tsmc needs a covariance; pass --allow-diag to sample from the diagonal".into(),
                ));
            }
            eprintln!("warning: belief has no covariance, tsmc samples independent arms");
            estimate(Method::Tsmc, b, &cfg, Some(&mut rng))?
        }
        (Belief::Independent(b), m) => estimate(m, b, &cfg, None)?,
        // the closed-form estimators work on the marginals
        (Belief::Full(full), m) => {
            let b = full.diagonal_belief().map_err(|e| CliError::Mismatch(format!("{m} needs positive variances: {e}")))?;
            estimate(m, &b, &cfg, None)?
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let entropy = shannon_entropy(&est.probs).map_err(|e| CliError::Estimator(pom_lite::PomError::SimplexViolation(e.to_string())))?;

    let result = ResultFile {
        schema_version: SCHEMA_VERSION,
        method: args.method.tag().to_string(),
        epsilon,
        probs: est.probs,
        labels: loaded.labels,
        threshold: est.threshold,
        iterations: est.iterations,
        max_error_bound: est.max_error_bound,
        entropy,
        wall_time_s,
        seed: args.seed,
    };
    write_json(&args.output, &result)?;
    println!("{} |X|={n} entropy={entropy:.6} time={wall_time_s:.6}s", result.method);
    Ok(())
}
