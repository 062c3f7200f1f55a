use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use wpshms::export::{category_json, info_json};
use wpshms::flow::{build_gradient_tree, integrate_trajectory, FLOW_SPAN};
use wpshms::homs::LatticeK;
use wpshms::lattice::Weights;
use wpshms::mirror::random_interior_point;
use wpshms::morse::{build_category_with, rat_f64, unit_vector, MorphismGen};
use wpshms::verify::{all_pass, parse_suites, run_suites, VerifyOptions};

use crate::{CliError, CliResult, Common, FlowArgs, Format, VerifyArgs};

pub fn weights(c: &Common) -> CliResult<Weights> {
    let w = Weights::new(&c.weights)?;
    w.check_chart(c.chart)?;
    Ok(w)
}

/// Writes `body` to `--out` or standard output.
pub fn emit(c: &Common, body: &[u8]) -> CliResult<()> {
    match &c.out {
        Some(path) => fs::write(path, body)?,
        None => match std::io::stdout().lock().write_all(body) {
            // a closed pipe (e.g. `| head`) is not an error for the caller
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

pub fn json_bytes(v: &Value) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

fn format_or(c: &Common, default: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = c.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("format {f:?} is not available here").to_lowercase()))
    }
}

fn tuple(v: &Value) -> String {
    let parts: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(|x| x.as_str().map(str::to_owned).unwrap_or_else(|| x.to_string())).collect())
        .unwrap_or_default();
    format!("({})", parts.join(", "))
}

pub fn info(c: &Common) -> CliResult<bool> {
    let w = weights(c)?;
    let v = info_json(&w)?;
    let body = match format_or(c, Format::Json, &[Format::Json, Format::Text])? {
        Format::Text => {
            let mut s = String::new();
            let wj = &v["weights"];
            writeln!(s, "weights {}  n = {}  lcm = {}  scale = {}", tuple(&wj["q"]), wj["n"], wj["lcm"], wj["scale"]).unwrap();
            for (i, b) in v["stacky_vectors"].as_array().unwrap().iter().enumerate() {
                writeln!(s, "b_{i} = {}", tuple(b)).unwrap();
            }
            for chart in v["charts"].as_array().unwrap() {
                let verts: Vec<String> = chart["vertices"].as_array().unwrap().iter().map(tuple).collect();
                writeln!(s, "chart {}: group order {}, vertices {}", chart["index"], chart["group_order"], verts.join(" ")).unwrap();
            }
            s.into_bytes()
        }
        _ => json_bytes(&v)?,
    };
    emit(c, &body)?;
    Ok(true)
}

pub fn category(c: &Common) -> CliResult<bool> {
    let w = weights(c)?;
    let cat = build_category_with(&w, c.base, c.chart, &unit_vector(&w))?;
    let v = category_json(&cat);
    let body = match format_or(c, Format::Json, &[Format::Json, Format::Text])? {
        Format::Text => {
            let mut s = String::new();
            let objects: Vec<String> = cat.object_labels().iter().map(|a| format!("L{a}")).collect();
            writeln!(s, "objects: {}", objects.join(" ")).unwrap();
            for h in cat.homs.values().filter(|h| h.a < h.b) {
                writeln!(s, "hom(L{}, L{}): dim {}", h.a, h.b, h.dim).unwrap();
                for g in &h.gens {
                    let point: Vec<String> = g.v.as_ref().unwrap().iter().map(|r| r.to_string()).collect();
                    writeln!(s, "  K = {:?}  v = ({})", g.k.k(), point.join(", ")).unwrap();
                }
            }
            for ((g1, g2), p) in cat.products.iter().filter(|((g1, g2), _)| g1.a < g1.b && g2.a < g2.b) {
                writeln!(
                    s,
                    "m2(V({},{}){:?}, V({},{}){:?}) = {} V({},{}){:?}  ~ {:.12}",
                    g1.a, g1.b, g1.k, g2.a, g2.b, g2.k, p.weight, p.dst.a, p.dst.b, p.dst.k, p.weight.to_float()
                )
                .unwrap();
            }
            s.into_bytes()
        }
        _ => json_bytes(&v)?,
    };
    emit(c, &body)?;
    Ok(true)
}

pub fn verify(args: &VerifyArgs) -> CliResult<bool> {
    let c = &args.common;
    let w = weights(c)?;
    let suites = parse_suites(&args.suite)?;
    if let Some(0) = args.grid {
        return Err(CliError::Usage("grid resolution must be positive".into()));
    }
    if !(args.dt.is_finite() && args.dt > 0.0) {
        return Err(CliError::Usage("dt must be positive".into()));
    }
    let opts = VerifyOptions { base: c.base, chart: c.chart, grid: args.grid, seed: args.seed, dt: args.dt, ..Default::default() };
    let reports = run_suites(&w, &suites, &opts)?;
    let pass = all_pass(&reports);
    let body = match format_or(c, Format::Json, &[Format::Json, Format::Text])? {
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                writeln!(s, "[{tag}] {:<12} {} checks, {} failures", r.suite.name(), r.checks, r.failures.len()).unwrap();
            }
            s.into_bytes()
        }
        _ => json_bytes(&json!({
            "weights": w.q(),
            "base": c.base,
            "chart": c.chart,
            "seed": args.seed,
            "pass": pass,
            "suites": reports,
        }))?,
    };
    emit(c, &body)?;
    Ok(pass)
}

fn triple(v: &[i64], what: &str, len: usize) -> CliResult<()> {
    if v.len() == len {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} takes {len} comma-separated integers")))
    }
}

pub fn flow(args: &FlowArgs) -> CliResult<bool> {
    let c = &args.common;
    let w = weights(c)?;
    if !(args.dt.is_finite() && args.dt > 0.0) {
        return Err(CliError::Usage("dt must be positive".into()));
    }
    if !args.tree.is_empty() {
        triple(&args.tree, "--tree", 3)?;
        let (a, b, cc) = (args.tree[0], args.tree[1], args.tree[2]);
        let k_ab = LatticeK::new(&w, args.k.clone())?;
        let k_bc = LatticeK::new(&w, args.k2.clone())?;
        let tree = build_gradient_tree(&w, a, b, cc, &k_ab, &k_bc, c.chart, args.dt)?;
        format_or(c, Format::Json, &[Format::Json])?;
        emit(c, &json_bytes(&serde_json::to_value(&tree)?)?)?;
        return Ok(true);
    }
    triple(&args.pair, "--pair", 2)?;
    let (a, b) = (args.pair[0], args.pair[1]);
    let g = MorphismGen::forward(&w, a, b, args.k.clone(), c.chart)?;
    let v: Vec<f64> = g.v.as_ref().unwrap().iter().map(rat_f64).collect();
    let through: Vec<f64> = if args.through.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        random_interior_point(&w, c.chart, &mut rng).iter().map(rat_f64).collect()
    } else if args.through.len() == v.len() {
        args.through.clone()
    } else {
        return Err(CliError::Usage(format!("--through needs {} coordinates", v.len())));
    };
    // leave v along the ray through the requested point and reach it at the end
    let x0: Vec<f64> = v.iter().zip(&through).map(|(vi, yi)| vi + (-FLOW_SPAN).exp() * (yi - vi)).collect();
    let lambda = 2.0 * std::f64::consts::PI * (b - a) as f64 / w.scale() as f64;
    let span = FLOW_SPAN / lambda;
    let steps = (span / args.dt).ceil() as usize;
    let traj = integrate_trajectory(&w, a, b, g.k.k(), c.chart, &x0, span / steps as f64, steps)?;
    match format_or(c, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => emit(c, &json_bytes(&json!({ "max_error": traj.max_error(), "trajectory": traj }))?)?,
        _ => {
            let n = v.len();
            let mut wtr = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["t".to_string()];
            header.extend((1..=n).map(|i| format!("x{i}")));
            header.extend((1..=n).map(|i| format!("exact{i}")));
            header.push("error".into());
            wtr.write_record(&header)?;
            for (t, x) in &traj.samples {
                let exact = traj.closed_form(*t);
                let err = x.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                let mut row = vec![format!("{t:.9}")];
                row.extend(x.iter().map(|p| format!("{p:.15e}")));
                row.extend(exact.iter().map(|p| format!("{p:.15e}")));
                row.push(format!("{err:.3e}"));
                wtr.write_record(&row)?;
            }
            let body = wtr.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            emit(c, &body)?;
        }
    }
    Ok(true)
}
