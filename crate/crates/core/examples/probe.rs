// Scratch probe for calibrating the scaling experiments; not part of the
// deliverable surface (the CLI covers this once built).

use ghzmet_core::experiments::{fig2_curves, fig3_curves, fig3_default_tau_c, run_curve};
use std::time::Instant;

fn main() {
    let which: Vec<String> = std::env::args().skip(1).collect();
    let run_fig2 = which.is_empty() || which.iter().any(|s| s == "fig2");
    let run_fig3 = which.is_empty() || which.iter().any(|s| s == "fig3");

    if run_fig2 {
        for theta in [1.0, 0.5] {
            println!("=== fig2 theta = {theta}");
            for spec in fig2_curves() {
                let t0 = Instant::now();
                match run_curve(&spec, theta, 1.0) {
                    Ok(res) => {
                        let pts: Vec<String> = res
                            .points
                            .iter()
                            .map(|p| {
                                format!(
                                    "n={} t*={:.3e} d={:.4e}",
                                    p.n, p.outcome.t_star, p.outcome.result.delta_theta
                                )
                            })
                            .collect();
                        println!(
                            "{:<16} slope={:+.4} resid={:.3} [{}] ({:.1?})",
                            res.spec.label,
                            res.fit.slope,
                            res.fit.residual,
                            pts.join("; "),
                            t0.elapsed()
                        );
                    }
                    Err(e) => println!("{:<16} ERROR: {e}", spec.label),
                }
            }
        }
    }

    if run_fig3 {
        for theta in [1.0] {
            println!("=== fig3 theta = {theta}");
            for spec in fig3_curves(&fig3_default_tau_c(theta)).unwrap() {
                let t0 = Instant::now();
                match run_curve(&spec, theta, 1.0) {
                    Ok(res) => {
                        let pts: Vec<String> = res
                            .points
                            .iter()
                            .map(|p| {
                                format!(
                                    "n={} t*={:.3e} d={:.4e}",
                                    p.n, p.outcome.t_star, p.outcome.result.delta_theta
                                )
                            })
                            .collect();
                        println!(
                            "{:<18} slope={:+.4} locals={:?} [{}] ({:.1?})",
                            res.spec.label,
                            res.fit.slope,
                            res.local_slopes()
                                .iter()
                                .map(|s| (s * 1000.0).round() / 1000.0)
                                .collect::<Vec<_>>(),
                            pts.join("; "),
                            t0.elapsed()
                        );
                    }
                    Err(e) => println!("{:<18} ERROR: {e}", spec.label),
                }
            }
        }
    }
}
