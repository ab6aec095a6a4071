use serde_json::json;

use sandpile_harmonic::green::{entropy_quadrature, QuadratureSpec};
use sandpile_harmonic::sandpile::{
    burning_test, count_recurrent, finite_entropy_estimate, odometer_csv, stabilize, write_grid, CountBackend,
};
use sandpile_harmonic::BoxWindow;

use crate::common::{critical_gamma, green_failure, load_grid, parse_extents};
use crate::output::{sibling, write_atomic, write_manifest, CmdResult, Failure};
use crate::{BackendChoice, SandpileCmd};

pub fn run(cmd: &SandpileCmd) -> CmdResult {
    match cmd {
        SandpileCmd::Stabilize { grid, out } => {
            let v = load_grid(grid)?;
            let (s, odo) = stabilize(&v);
            write_atomic(out, &write_grid(&s))?;
            write_atomic(&sibling(out, "odometer.csv"), &odometer_csv(&odo))?;
            println!("topplings {} mass lost {} -> {}", odo.total_topplings(), odo.total_mass_lost, out.display());
            let results = json!({ "topplings": odo.total_topplings(), "mass_lost": odo.total_mass_lost });
            write_manifest(out, "sandpile stabilize", json!({ "grid": grid }), None, results)
        }
        SandpileCmd::Burn { grid, out } => {
            let v = load_grid(grid)?;
            let report = burning_test(&v).map_err(Failure::input)?;
            if let Some(out) = out {
                let text = serde_json::to_string_pretty(&report).map_err(Failure::input)? + "\n";
                write_atomic(out, &text)?;
                write_manifest(out, "sandpile burn", json!({ "grid": grid }), None, json!({ "recurrent": report.recurrent }))?;
            }
            if report.recurrent {
                println!("recurrent: all {} sites burn", report.burn_order.len());
                Ok(())
            } else {
                println!("forbidden: {} sites never burn, e.g. {:?}", report.stuck_set.len(), report.stuck_set[0]);
                Err(Failure::Negative("configuration is not recurrent".into()))
            }
        }
        SandpileCmd::Count { window, gamma, backend, out } => {
            let w = BoxWindow::with_extents(parse_extents(window)?).map_err(Failure::input)?;
            let backends: &[CountBackend] = match backend {
                BackendChoice::Bruteforce => &[CountBackend::Bruteforce],
                BackendChoice::Determinant => &[CountBackend::Determinant],
                BackendChoice::Both => &[CountBackend::Bruteforce, CountBackend::Determinant],
            };
            let mut results = Vec::new();
            for &b in backends {
                let r = count_recurrent(&w, *gamma, b).map_err(Failure::input)?;
                match &r.exact {
                    Some(n) => println!("{:?}: {n} (exact), log = {:.12}", b, r.log_count),
                    None => println!("{:?}: log count = {:.12} +- {:e}", b, r.log_count, 1e-9 * r.log_count.abs()),
                }
                results.push(r);
            }
            if let Some(out) = out {
                let text = serde_json::to_string_pretty(&results).map_err(Failure::input)? + "\n";
                write_atomic(out, &text)?;
                write_manifest(out, "sandpile count", json!({ "window": window, "gamma": gamma }), None, json!(results))?;
            }
            if let [a, b] = results.as_slice() {
                let agree = match (&a.exact, &b.exact) {
                    (Some(x), Some(y)) => x == y,
                    _ => (a.log_count - b.log_count).abs() <= 1e-9 * a.log_count.abs().max(1.0),
                };
                if !agree {
                    return Err(Failure::Tolerance("backends disagree".into()));
                }
                if let (Some(x), Some(y)) = (&a.exact, &b.exact) {
                    println!("{x} = {y}");
                }
            }
            Ok(())
        }
        SandpileCmd::Entropy { dim, gamma, sides, out } => {
            let gamma = critical_gamma(*dim, *gamma);
            let reference = entropy_quadrature::<f64>(*dim, gamma, &QuadratureSpec::default_for(*dim, gamma))
                .map_err(green_failure)?;
            println!("reference h = {:.9} +- {:e}", reference.value, reference.accuracy);
            let mut csv = String::from("side,estimate,gap\n");
            let mut rows = Vec::new();
            for &side in sides {
                let h = finite_entropy_estimate(side, *dim, gamma).map_err(Failure::input)?;
                let gap = h - reference.value;
                println!("side {side}: {h:.9} (gap {gap:+.6} +- {:e})", reference.accuracy);
                csv.push_str(&format!("{side},{h:.12},{gap:.12}\n"));
                rows.push(json!({ "side": side, "estimate": h, "gap": gap }));
            }
            if let Some(out) = out {
                write_atomic(out, &csv)?;
                let params = json!({ "d": dim, "gamma": gamma, "sides": sides });
                let results = json!({ "reference": reference.value, "accuracy": reference.accuracy, "estimates": rows });
                write_manifest(out, "sandpile entropy", params, None, results)?;
            }
            Ok(())
        }
    }
}
