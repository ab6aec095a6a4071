use std::path::PathBuf;

use serde_json::json;

use sandpile_harmonic::green::{compute_green, series_table, QuadratureSpec};
use sandpile_harmonic::window::max_norm;

use crate::common::{critical_gamma, green_failure};
use crate::output::{write_atomic, write_manifest, CmdResult, Failure};
use crate::GreenArgs;

const ORACLE_RADIUS: usize = 4;
const ORACLE_STEPS: usize = 4096;

pub fn run(a: &GreenArgs) -> CmdResult {
    let gamma = critical_gamma(a.dim, a.gamma);
    let mut spec = QuadratureSpec::default_for(a.dim, gamma);
    if let Some(t) = a.target {
        spec = spec.with_target(t);
    }
    if let Some(n) = a.nodes {
        spec.nodes_per_axis = n;
    }
    let t = compute_green::<f64>(a.dim, gamma, a.radius, &spec).map_err(green_failure)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("green_d{}_g{gamma}_r{}.csv", a.dim, a.radius)));
    write_atomic(&out, &t.to_csv())?;

    let r = ORACLE_RADIUS.min(a.radius);
    let oracle = series_table::<f64>(a.dim, gamma, r, ORACLE_STEPS).map_err(green_failure)?;
    let (mut gap, mut allowed, mut excess) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for n in oracle.window().sites() {
        let g = (t.get(&n).unwrap() - oracle.get(&n).unwrap()).abs();
        let tol = t.accuracy + oracle.accuracy;
        if g - tol > excess {
            excess = g - tol;
            gap = g;
            allowed = tol;
        }
    }
    let pass = excess <= 0.0;
    let origin = t.get(&vec![0; a.dim]).unwrap();
    println!("table d={} gamma={gamma} R={} accuracy={:e} -> {}", a.dim, a.radius, t.accuracy, out.display());
    println!("w[0] = {origin:.9} +- {:e}", t.accuracy);
    println!(
        "oracle |n|_max <= {r}: worst discrepancy {gap:e} against tolerance {allowed:e} {}",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut results = json!({
        "accuracy": t.accuracy,
        "w0": origin,
        "oracle": { "radius": r, "discrepancy": gap, "tolerance": allowed, "pass": pass },
    });
    if gamma > 2 * a.dim as i64 {
        let sum: f64 = t.values.iter().sum();
        let edge = t
            .window()
            .sites()
            .zip(&t.values)
            .filter(|(n, _)| max_norm(n) == a.radius as i64)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        let expected = 1.0 / (gamma - 2 * a.dim as i64) as f64;
        let err = t.accuracy * t.values.len() as f64;
        println!("sum = {sum:.9} +- {err:e} (expected {expected:.9}; edge shell max {edge:e} bounds the tail)");
        results["sum"] = json!({ "value": sum, "err": err, "expected": expected, "edge_shell_max": edge });
    }
    let params = json!({ "d": a.dim, "gamma": gamma, "radius": a.radius, "quadrature": spec });
    write_manifest(&out, "green", params, None, results)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("oracle discrepancy {gap:e} exceeds {allowed:e}")))
    }
}
