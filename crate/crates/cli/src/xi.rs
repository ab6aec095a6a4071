use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sandpile_harmonic::harmonic::{
    addition_operator_demo, additivity_check, equivariance_residual, harmonicity_residual, kernel_check, kernel_witness,
    separation_check, xi_apply, IntegerField, PeriodicProfile, WitnessKind, XiSpec,
};
use sandpile_harmonic::laurent::{parse_expression, standard_polys, LaurentPoly};
use sandpile_harmonic::sandpile::{is_recurrent, random_recurrent, HeightConfig};
use sandpile_harmonic::{BoxWindow, GreenTable64};

use crate::common::{default_radius, field, load_grid, spec, table};
use crate::output::{write_atomic, write_manifest, CmdResult, Failure};
use crate::{Suite, XiCmd};

pub fn run(cmd: &XiCmd) -> CmdResult {
    match cmd {
        XiCmd::Apply { g, grid, extension, table: t, out } => {
            let v = load_grid(grid)?;
            let d = v.dim();
            let tab = table(d, 2 * d as i64, default_radius(d, t.radius))?;
            let s = spec(g, &tab)?;
            let x = xi_apply(&s, &field(&v, *extension), v.window()).map_err(Failure::input)?;
            match out {
                Some(out) => {
                    write_atomic(out, &x.to_csv())?;
                    let results = json!({ "max_dist_to_zero": x.max_dist_to_zero(), "max_err": x.max_err() });
                    write_manifest(out, "xi apply", json!({ "g": g, "grid": grid, "radius": tab.radius }), None, results)?;
                    println!(
                        "{} sites, max distance to 0 = {:e}, max err = {:e} -> {}",
                        x.values.len(),
                        x.max_dist_to_zero(),
                        x.max_err(),
                        out.display()
                    );
                }
                None => print!("{}", x.to_csv()),
            }
            Ok(())
        }
        XiCmd::Check { suite, dim, pairs, seed, table: t, out } => {
            let d = *dim;
            let tab = table(d, 2 * d as i64, default_radius(d, t.radius))?;
            let gens = standard_polys(d, tab.gamma).map_err(Failure::input)?.generators;
            let specs: Vec<XiSpec<f64>> =
                gens.iter().map(|g| XiSpec::new(g, &tab)).collect::<Result<_, _>>().map_err(Failure::input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let lines = run_suite(*suite, &tab, &specs, *pairs, &mut rng)?;
            let failed = lines.iter().filter(|l| !l.pass).count();
            for l in &lines {
                println!(
                    "{}[{}] value={:e} {} {:e} {}",
                    l.label,
                    l.case,
                    l.value,
                    if l.lower { ">=" } else { "<=" },
                    l.threshold,
                    if l.pass { "PASS" } else { "FAIL" }
                );
            }
            let name = suite_name(*suite);
            println!("suite {name}: {} checks, {failed} failed", lines.len());
            if let Some(out) = out {
                let report: Vec<Value> = lines
                    .iter()
                    .map(|l| json!({
                            "check": l.label,
                            "case": l.case,
                            "value": l.value,
                            "threshold": l.threshold,
                            "bound": if l.lower { "lower" } else { "upper" },
                            "pass": l.pass,
                        }))
                    .collect();
                let text = serde_json::to_string_pretty(&report).map_err(Failure::input)? + "\n";
                write_atomic(out, &text)?;
                let params = json!({ "suite": name, "d": d, "pairs": pairs, "radius": tab.radius });
                write_manifest(out, "xi check", params, Some(*seed), json!({ "checks": lines.len(), "failed": failed }))?;
            }
            if failed > 0 {
                return Err(Failure::Tolerance(format!("invariant `{name}` violated in {failed} of {} checks", lines.len())));
            }
            Ok(())
        }
        XiCmd::DemoAddition { g, grid, site, extension, table: t, out } => {
            let v = load_grid(grid)?;
            let d = v.dim();
            if site.len() != d {
                return Err(Failure::Input(format!("site needs {d} coordinates")));
            }
            let tab = table(d, 2 * d as i64, default_radius(d, t.radius))?;
            let s = spec(g, &tab)?;
            let demo = addition_operator_demo(&s, &field(&v, *extension), site, v.window()).map_err(Failure::input)?;
            let c = demo.comparison;
            println!(
                "grain at {site:?}: |xi(v + delta) - xi(v) - shifted z| = {:e} threshold {:e} {}",
                c.residual,
                c.threshold,
                if c.within() { "PASS" } else { "FAIL" }
            );
            if let Some(out) = out {
                write_atomic(out, &demo.delta.to_csv())?;
                let params = json!({ "g": g, "grid": grid, "site": site, "radius": tab.radius });
                write_manifest(out, "xi demo-addition", params, None, json!(c))?;
            }
            if c.within() {
                Ok(())
            } else {
                Err(Failure::Tolerance("invariant `addition` violated".into()))
            }
        }
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Harmonicity => "harmonicity",
        Suite::Equivariance => "equivariance",
        Suite::Kernel => "kernel",
        Suite::Separation => "separation",
        Suite::Additivity => "additivity",
    }
}

struct Line {
    label: String,
    case: usize,
    value: f64,
    threshold: f64,
    /// True when `threshold` is a lower bound.
    lower: bool,
    pass: bool,
}

impl Line {
    fn new(label: impl Into<String>, case: usize, value: f64, threshold: f64) -> Self {
        Line { label: label.into(), case, value, threshold, lower: false, pass: value <= threshold }
    }

    fn at_least(label: impl Into<String>, case: usize, value: f64, threshold: f64) -> Self {
        Line { label: label.into(), case, value, threshold, lower: true, pass: value >= threshold }
    }
}

fn sample_window(d: usize) -> BoxWindow {
    BoxWindow::centered(d, if d == 2 { 8 } else { 4 })
}

fn partner(v: &HeightConfig, q: &BoxWindow, rng: &mut ChaCha8Rng) -> Result<HeightConfig, Failure> {
    loop {
        let mut w = v.clone();
        for n in q.sites() {
            w.set(&n, rng.gen_range(0..v.gamma())).map_err(Failure::input)?;
        }
        if w != *v && is_recurrent(&w).map_err(Failure::input)? {
            return Ok(w);
        }
    }
}

fn run_suite(
    suite: Suite,
    tab: &GreenTable64,
    specs: &[XiSpec<f64>],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Line>, Failure> {
    let d = tab.dim;
    let gamma = tab.gamma;
    let window = sample_window(d);
    let recurrent = |rng: &mut ChaCha8Rng| random_recurrent(&window, gamma, rng).map_err(Failure::input);
    let mut lines = Vec::new();
    match suite {
        Suite::Harmonicity => {
            for case in 0..samples {
                let v = IntegerField::from_recurrent(&recurrent(rng)?);
                for (i, s) in specs.iter().enumerate() {
                    let x = xi_apply(s, &v, &window).map_err(Failure::input)?;
                    let bound = (4 * d + 1) as f64 * x.max_err();
                    lines.push(Line::new(format!("harmonicity g{}", i + 1), case, harmonicity_residual(&x, gamma), bound));
                }
            }
        }
        Suite::Equivariance => {
            let out = BoxWindow::centered(d, 2);
            for case in 0..samples {
                let v = IntegerField::from_recurrent(&recurrent(rng)?);
                let m: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
                for (i, s) in specs.iter().enumerate() {
                    let c = equivariance_residual(s, &v, &m, &out).map_err(Failure::input)?;
                    lines.push(Line::new(format!("equivariance g{}", i + 1), case, c.residual, c.threshold));
                }
            }
        }
        Suite::Kernel => {
            let mut kinds = vec![WitnessKind::Constant(1), WitnessKind::Constant(-7)];
            kinds.push(WitnessKind::FMultiple(parse_expression("u1 - 2*u2", d).map_err(Failure::input)?));
            for _ in 0..samples.min(10) {
                let terms = (0..5).map(|_| {
                    let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
                    (k, rng.gen_range(-3i64..=3).into())
                });
                kinds.push(WitnessKind::FMultiple(LaurentPoly::from_terms(d, terms).map_err(Failure::input)?));
            }
            for axis in 0..d {
                kinds.push(WitnessKind::Periodic(PeriodicProfile::quarter_alternating(axis)));
            }
            let out = BoxWindow::centered(d, 3);
            for (case, k) in kinds.iter().enumerate() {
                let v = kernel_witness(k, d, gamma).map_err(Failure::input)?;
                let report = kernel_check(specs, &v, &out).map_err(Failure::input)?;
                for (i, c) in report.per_generator.iter().enumerate() {
                    lines.push(Line::new(format!("kernel g{}", i + 1), case, c.residual, c.threshold));
                }
            }
        }
        Suite::Separation => {
            let q = BoxWindow::centered(d, 1);
            let bound = 1.0 / (4 * d) as f64;
            for case in 0..samples {
                let v = recurrent(rng)?;
                let w = partner(&v, &q, rng)?;
                for (i, s) in specs.iter().enumerate().filter(|(_, s)| !s.exact) {
                    let r = separation_check(s, &v, &w, &q).map_err(Failure::input)?;
                    if r.difference_in_ideal {
                        continue;
                    }
                    lines.push(Line::at_least(format!("separation g{}", i + 1), case, r.value, bound - 2.0 * r.err));
                }
            }
        }
        Suite::Additivity => {
            let out = BoxWindow::centered(d, 2);
            for case in 0..samples {
                let v = recurrent(rng)?;
                let w = recurrent(rng)?;
                let report = additivity_check(specs, &v, &w, &out).map_err(Failure::input)?;
                for (i, c) in report.per_generator.iter().enumerate() {
                    lines.push(Line::new(format!("additivity g{}", i + 1), case, c.residual, c.threshold));
                }
            }
        }
    }
    Ok(lines)
}
