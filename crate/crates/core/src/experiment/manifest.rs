use serde_json::{json, Value};

use super::config::Subcommand;

const REPORT_FIELDS: &str = "name: estimator; params: inputs; estimate; std_error; n_samples; \
ci95: [estimate - 1.96 std_error, estimate + 1.96 std_error]; reference: analytic target or null";

/// Schema description embedded in every JSON report.
pub fn manifest(sub: Subcommand) -> Value {
    let results = match sub {
        Subcommand::Simulate => json!({
            "brw_config": "resolved model configuration",
            "generations": "per generation (0 = initial): generation, x_eq = ln sum exp(position), max_pos, min_pos",
            "increments": "x_eq increments, one per step",
            "parents": "parents[t][i]: 1-based parent in generation t of individual i in generation t+1",
        }),
        Subcommand::Speed => json!({ "reports": format!("one report 'speed' (mean x_eq increment; reference ln ln N). {REPORT_FIELDS}") }),
        Subcommand::Cn => json!({ "reports": format!("one report 'c_n' (pair coalescence probability; reference (1 - theta/alpha)/L_N). {REPORT_FIELDS}") }),
        Subcommand::Tails => json!({ "reports": format!("one 'weight_tail' report per x: L_N P(max weight > x). {REPORT_FIELDS}") }),
        Subcommand::PdDiagnostics => json!({
            "reports": format!("per checkpoint n: 'martingale_moment', 'series_centering', 'sigma_over_log_n'. {REPORT_FIELDS}")
        }),
        Subcommand::Rates => json!({
            "rates": "b, k, rate = lambda_{b,k} for 2 <= k <= b <= bmax",
            "recursion_error": "max relative violation of lambda_{b,k} = lambda_{b+1,k} + lambda_{b+1,k+1}",
        }),
        Subcommand::Coalescent => json!({
            "reference": "limiting coalescent used for the first-merger reference",
            "c_n": "estimated pair coalescence probability used to rescale discrete time (measure pd only)",
            "merger_statistics": "counts[i], empirical[i], reference[i] for first merger size i + 2; no_merger; chi_square over bins pooled to expected count >= 5; degrees_of_freedom",
            "trajectories": "times and canonical partitions ('1|2 3' = {1},{2,3}) at every change",
        }),
        Subcommand::Constants => json!({
            "alpha": "alpha", "theta": "theta", "lambda": "1 + theta/alpha",
            "c_alpha_theta": "1/(Gamma(1-theta/alpha) Gamma(1-alpha)^(theta/alpha) Gamma(1+theta))",
            "l_n": "c_alpha_theta (ln n)^lambda, when n is given",
            "cn_reference": "(1 - theta/alpha)/L_N, when n is given and theta < alpha",
        }),
    };
    json!({
        "schema": "pdbrw-report/1",
        "subcommand": sub.name(),
        "config": "resolved configuration; the seed determines every output byte",
        "results": results,
    })
}
