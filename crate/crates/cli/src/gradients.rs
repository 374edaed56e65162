use pom_lite::{flite_gradients, flite_search, Accuracy, ConvergenceConfig, Method};

use crate::error::CliError;
use crate::io::{read_belief, write_table, Belief};
use crate::GradientArgs;

/// Default accuracy when neither `--epsilon` nor `--alpha` is given.
const DEFAULT_EPSILON: f64 = 1e-9;

pub fn run(args: &GradientArgs) -> Result<(), CliError> {
    if args.method != Method::Flite {
        return Err(CliError::Usage(format!("gradients are only available for flite, not {}", args.method)));
    }
    let accuracy = match (args.epsilon, args.alpha) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--epsilon and --alpha are mutually exclusive".into())),
        (Some(e), None) => Accuracy::Epsilon(e),
        (None, Some(a)) => Accuracy::Alpha(a),
        (None, None) => Accuracy::Epsilon(DEFAULT_EPSILON),
    };
    let loaded = read_belief(&args.input)?;
    let belief = match loaded.belief {
        Belief::Independent(b) => b,
        Belief::Full(f) => f.diagonal_belief().map_err(|e| CliError::Input {
            path: args.input.clone(),
            reason: e.to_string(),
        })?,
    };
    let state = flite_search(&belief, &ConvergenceConfig::from_accuracy(accuracy))?;
    let g = flite_gradients(&belief, state.threshold());

    let mut header = vec!["matrix", "arm"];
    header.extend(loaded.labels.iter().map(String::as_str));
    let mut rows = Vec::with_capacity(2 * belief.len());
    for (name, m) in [("dq_dmu", &g.dq_dmu), ("dq_dsigma", &g.dq_dsigma)] {
        for (x, label) in loaded.labels.iter().enumerate() {
            let mut row = vec![name.to_string(), label.clone()];
            row.extend(m.row(x).iter().map(|v| v.to_string()));
            rows.push(row);
        }
    }
    write_table(&args.output, &header, &rows)?;
    println!("flite gradients |X|={} threshold={}", belief.len(), state.threshold());
    Ok(())
}
