use sandpile_harmonic::green::{decay_profile, l1_partial_sums, multiplier_table};
use sandpile_harmonic::laurent::{hg0, ideal_certificate, parse_expression, parse_text};

use crate::common::{green_failure, table};
use crate::output::{read_input, CmdResult, Failure};
use crate::IdealArgs;

pub fn run(a: &IdealArgs) -> CmdResult {
    let g = match (&a.poly, &a.file) {
        (Some(expr), _) => parse_expression(expr, a.dim).map_err(Failure::input)?,
        (None, Some(path)) => parse_text(&read_input(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        (None, None) => return Err(Failure::Input("give --poly or --file".into())),
    };
    let cert = ideal_certificate(&g);
    println!("{cert}");
    if cert.member {
        let h = hg0(&g).map_err(Failure::input)?;
        println!("Hg0 = {h}");
    }
    if let Some(radius) = a.decay {
        let d = g.dim();
        let tab = table(d, 2 * d as i64, radius)?;
        let m = multiplier_table(&g, &tab).map_err(green_failure)?;
        let p = decay_profile(&m.values, &m.window(), 10.0 * m.accuracy).map_err(green_failure)?;
        let sums = l1_partial_sums(&m.values, &m.window()).map_err(green_failure)?;
        let fmt = |e: Option<f64>| e.map_or("undefined".to_string(), |x| format!("{x:.3}"));
        println!(
            "decay on R={}: max exponent {} l1 exponent {} over shells {:?}, noise floor {:e}",
            p.radius,
            fmt(p.exponent),
            fmt(p.l1_exponent),
            p.fit_range,
            p.noise_floor
        );
        println!("r,shell_max,shell_l1,partial_l1");
        for (r, ((max, l1), partial)) in p.shell_max.iter().zip(&p.shell_l1).zip(&sums).enumerate() {
            println!("{r},{max:e},{l1:e},{partial:e}");
        }
    }
    Ok(())
}
