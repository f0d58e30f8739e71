//! The six experiments.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde_json::{json, Value};

use linflow::curves::{boundary_multiset, maximal_excision_traced, CurveFamily, PiecewiseCurve};
use linflow::io::{parse_direction, parse_family, parse_form, parse_trig_poly, FamilySpec, TrigPolySpec};
use linflow::linearization::Linearizer;
use linflow::precise::circle_offset;
use linflow::sampling::{self, planted_family, random_path, random_point};
use linflow::spectral::{contract_with_flow, solve_cohomological, TrigPoly};
use linflow::torus_flow::{
    certify_diophantine, find_resonances, liouville_vector, DirectionVector, TorusPoint, GOLDEN_RATIO,
};

use crate::{CliError, Command, ExperimentConfig, Report};

pub fn execute(config: &ExperimentConfig) -> Result<Report, CliError> {
    match config.command {
        Command::DiophantineCheck => diophantine_check(config),
        Command::SolveCohomology => solve_cohomology(config),
        Command::Excise => excise(config),
        Command::LinearizeDemo => linearize_demo(config),
        Command::EquivarianceTest => equivariance_test(config),
        Command::LiouvilleSweep => liouville_sweep(config),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input("Io", format!("{}: {e}", path.display())))
}

struct Direction {
    alpha: DirectionVector,
    text: Vec<String>,
    tau: Option<f64>,
    radius: Option<i64>,
}

fn load_direction(config: &ExperimentConfig) -> Result<Direction, CliError> {
    let mut dir = match &config.alpha {
        Some(path) => {
            let spec = parse_direction(&read(path)?)?;
            Direction {
                alpha: spec.direction()?,
                text: spec.alpha.iter().map(|d| d.text()).collect(),
                tau: spec.tau,
                radius: spec.radius,
            }
        }
        None => Direction {
            alpha: DirectionVector::golden(),
            text: vec!["1".into(), GOLDEN_RATIO.into()],
            tau: None,
            radius: None,
        },
    };
    if let Some(eps) = config.eps_res {
        dir.alpha = dir.alpha.with_resonance_eps(eps);
    }
    Ok(dir)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn mode_label(n: &[i64]) -> String {
    let parts: Vec<String> = n.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

fn diophantine_check(config: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = load_direction(config)?;
    let radius = config.radius.or(dir.radius).unwrap_or(100);
    let tau = config.tau.or(dir.tau).unwrap_or(1.0);
    if radius < 1 {
        return Err(CliError::input("InvalidConfig", format!("radius must be >= 1, got {radius}")));
    }
    match certify_diophantine(&dir.alpha, tau, radius) {
        Ok(cert) => Ok(Report {
            json: json!({
                "alpha": dir.text,
                "radius": radius,
                "tau": tau,
                "resonance_eps": dir.alpha.resonance_eps(),
                "resonances": [],
                "certificate": cert,
            }),
            csv: vec![
                vec!["tau".into(), "radius".into(), "c_min".into(), "witness".into(), "norm".into()],
                vec![num(tau), radius.to_string(), num(cert.c_min), mode_label(&cert.witness), cert.norm_kind],
            ],
            failure: None,
        }),
        Err(linflow::Error::ResonanceFound { .. }) => {
            let resonances = find_resonances(&dir.alpha, radius);
            let mut csv = vec![vec!["n".to_string(), "n_dot_alpha".to_string()]];
            csv.extend(resonances.iter().map(|n| vec![mode_label(n), num(dir.alpha.dot(n))]));
            let first = resonances.first().cloned().unwrap_or_default();
            let failure = CliError::from(linflow::Error::ResonanceFound { n: first });
            Ok(Report {
                json: json!({
                    "alpha": dir.text,
                    "radius": radius,
                    "tau": tau,
                    "resonance_eps": dir.alpha.resonance_eps(),
                    "resonances": resonances,
                    "certificate": Value::Null,
                }),
                csv,
                failure: Some(failure),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn solve_cohomology(config: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = load_direction(config)?;
    let data: TrigPoly = match (&config.function, &config.form) {
        (Some(f), None) => parse_trig_poly(&read(f)?)?,
        (None, Some(f)) => {
            let eta = parse_form(&read(f)?)?;
            if eta.dim() != dir.alpha.dim() {
                return Err(linflow::Error::DimensionMismatch {
                    expected: dir.alpha.dim(),
                    got: eta.dim(),
                }
                .into());
            }
            contract_with_flow(&eta, &dir.alpha)
        }
        _ => {
            return Err(CliError::input(
                "InvalidConfig",
                "solve-cohomology needs exactly one of --function or --form".into(),
            ))
        }
    };
    if data.dim() != dir.alpha.dim() {
        return Err(linflow::Error::DimensionMismatch {
            expected: dir.alpha.dim(),
            got: data.dim(),
        }
        .into());
    }
    let sol = solve_cohomological(&data, &dir.alpha)?;
    let mut csv = vec![vec!["n".to_string(), "re".to_string(), "im".to_string()]];
    csv.extend(sol.h.modes().map(|(n, c)| vec![mode_label(n), num(c.re), num(c.im)]));
    Ok(Report {
        json: json!({
            "alpha": dir.text,
            "c": sol.c,
            "amplification": sol.amplification,
            "h": TrigPolySpec::from_poly(&sol.h),
        }),
        csv,
        failure: None,
    })
}

fn excise(config: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = load_direction(config)?;
    let families: Vec<CurveFamily> = match &config.curve {
        Some(path) => vec![parse_family(&read(path)?, &dir.alpha)?],
        None => {
            let mut rng = sampling::rng(config.seed);
            (0..config.samples).map(|_| planted_family(&mut rng, &dir.alpha)).collect()
        }
    };
    let mut records = Vec::new();
    let mut csv = vec![vec![
        "family".to_string(),
        "step".to_string(),
        "arc_length".to_string(),
        "total_length".to_string(),
    ]];
    for (k, family) in families.iter().enumerate() {
        let trace = maximal_excision_traced(family);
        csv.push(vec![k.to_string(), "0".into(), String::new(), num(trace.total_lengths[0])]);
        for (i, (arc, total)) in trace.arc_lengths.iter().zip(&trace.total_lengths[1..]).enumerate() {
            csv.push(vec![k.to_string(), (i + 1).to_string(), num(*arc), num(*total)]);
        }
        let boundary: Vec<Value> = boundary_multiset(&trace.family)
            .atoms()
            .iter()
            .map(|(p, w)| json!({ "point": p.coords(), "weight": w }))
            .collect();
        records.push(json!({
            "input": FamilySpec::from_family(family),
            "result": FamilySpec::from_family(&trace.family),
            "steps": trace
                .arc_lengths
                .iter()
                .zip(&trace.total_lengths[1..])
                .map(|(a, t)| json!({ "arc_length": a, "total_length": t }))
                .collect::<Vec<_>>(),
            "input_length": trace.total_lengths[0],
            "output_length": trace.family.total_length(),
            "boundary": boundary,
        }));
    }
    Ok(Report {
        json: json!({ "alpha": dir.text, "families": records }),
        csv,
        failure: None,
    })
}

fn single_curve(path: &Path, alpha: &DirectionVector) -> Result<PiecewiseCurve, CliError> {
    let mut family = parse_family(&read(path)?, alpha)?;
    if family.len() != 1 {
        return Err(CliError::input(
            "InvalidConfig",
            format!("expected a single path, got {} curves", family.len()),
        ));
    }
    Ok(family.curves.remove(0))
}

fn linearize_demo(config: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = load_direction(config)?;
    let lin = Linearizer::at_origin(dir.alpha.clone(), config.cutoff)?;
    let x = lin.basepoint().clone();
    let d = dir.alpha.dim();
    let mut rng = sampling::rng(config.seed);
    let (y, path) = match &config.curve {
        Some(p) => {
            let g = single_curve(p, &dir.alpha)?;
            (g.end(), g)
        }
        None => {
            let y = random_point(&mut rng, d);
            let g = random_path(&mut rng, &x, &y, 3, 1, &dir.alpha);
            (y, g)
        }
    };
    let p = lin.linearize(&y, &path)?;
    let t: f64 = rng.gen_range(-10.0..=10.0);
    let gap = lin.check_equivariance(&p, t)?;

    let mut other = random_point(&mut rng, d);
    while other.distance(&y) < 1e-6 {
        other = random_point(&mut rng, d);
    }
    let q = lin.linearize(&other, &random_path(&mut rng, &x, &other, 3, 1, &dir.alpha))?;
    let separation = match lin.injectivity_probe(&p, &q) {
        Ok(r) => json!({ "other": other.coords(), "form": r.form, "gap": r.gap }),
        Err(linflow::Error::SeparationNotFound) => json!({ "other": other.coords(), "form": Value::Null, "gap": Value::Null }),
        Err(e) => return Err(e.into()),
    };

    let form_value = match &config.form {
        Some(f) => {
            let eta = parse_form(&read(f)?)?;
            Some(linflow::currents::evaluate_twisted(p.representative(), &eta)?)
        }
        None => None,
    };

    let mut csv = vec![vec!["form".to_string(), "value".to_string()]];
    let mut evaluations = Vec::new();
    for (f, v) in lin.battery().forms().iter().zip(p.evaluations()) {
        csv.push(vec![f.id.clone(), num(*v)]);
        evaluations.push(json!({ "form": f.id, "value": v }));
    }
    let mut out = json!({
        "alpha": dir.text,
        "basepoint": x.coords(),
        "endpoint": y.coords(),
        "cutoff": config.cutoff,
        "albanese": lin.albanese(&p).coords,
        "t": t,
        "equivariance_max_gap": gap,
        "separation": separation,
        "evaluations": evaluations,
    });
    if let Some(v) = form_value {
        out["form_value"] = json!(v);
    }
    Ok(Report {
        json: out,
        csv,
        failure: None,
    })
}

fn torus_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| circle_offset(u - v).abs()).fold(0.0, f64::max)
}

fn equivariance_test(config: &ExperimentConfig) -> Result<Report, CliError> {
    let dir = load_direction(config)?;
    let lin = Linearizer::at_origin(dir.alpha.clone(), config.cutoff)?;
    let x = lin.basepoint().clone();
    let d = dir.alpha.dim();
    let mut rng = sampling::rng(config.seed);
    let mut header = vec!["sample".to_string()];
    header.extend((1..=d).map(|j| format!("y{j}")));
    header.extend(["t".to_string(), "gap".to_string(), "albanese_gap".to_string()]);
    let mut csv = vec![header];
    let (mut worst, mut worst_albanese) = (0.0f64, 0.0f64);
    for k in 0..config.samples {
        let y: TorusPoint = random_point(&mut rng, d);
        let t: f64 = rng.gen_range(-10.0..=10.0);
        let segments = rng.gen_range(0..=3);
        let path = random_path(&mut rng, &x, &y, segments, 1, &dir.alpha);
        let p = lin.linearize(&y, &path)?;
        let q = lin.advance(&p, t)?;
        let gap = lin.equivariance_gap(&p, &q, t)?;
        let moved: Vec<f64> = lin
            .albanese(&p)
            .coords
            .iter()
            .zip(dir.alpha.alpha())
            .map(|(c, a)| c + t * a)
            .collect();
        let albanese_gap = torus_gap(&lin.albanese(&q).coords, &moved);
        worst = worst.max(gap);
        worst_albanese = worst_albanese.max(albanese_gap);
        let mut row = vec![k.to_string()];
        row.extend(y.coords().iter().map(|v| num(*v)));
        row.extend([num(t), num(gap), num(albanese_gap)]);
        csv.push(row);
    }
    let passed = worst < config.tolerance && worst_albanese < config.tolerance;
    let failure = (!passed).then(|| {
        CliError::domain(
            "ToleranceExceeded",
            format!(
                "equivariance gap {worst:e} / Albanese gap {worst_albanese:e} exceeds {:e}",
                config.tolerance
            ),
            json!({ "equivariance_max_gap": worst, "albanese_max_gap": worst_albanese }),
        )
    });
    Ok(Report {
        json: json!({
            "alpha": dir.text,
            "samples": config.samples,
            "seed": config.seed,
            "cutoff": config.cutoff,
            "tolerance": config.tolerance,
            "equivariance_max_gap": worst,
            "albanese_max_gap": worst_albanese,
            "passed": passed,
        }),
        csv,
        failure,
    })
}

fn liouville_sweep(config: &ExperimentConfig) -> Result<Report, CliError> {
    let lv = liouville_vector(2, &config.schedule)?;
    let alpha = match config.eps_res {
        Some(eps) => lv.direction.clone().with_resonance_eps(eps),
        None => lv.direction.clone(),
    };
    let mut rows = Vec::new();
    let mut unresolved = Vec::new();
    let mut csv = vec![["k", "exponent", "q", "p", "residual", "amplification"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for (k, c) in lv.convergents.iter().enumerate() {
        let Some(mode) = c.mode() else {
            unresolved.push(json!({ "k": k + 1, "exponent": c.exponent, "reason": "mode exceeds exact integer range" }));
            continue;
        };
        match solve_cohomological(&TrigPoly::cos_mode(&mode, 1.0), &alpha) {
            Ok(sol) => {
                csv.push(vec![
                    (k + 1).to_string(),
                    c.exponent.to_string(),
                    c.q.to_string(),
                    c.p.to_string(),
                    num(c.residual),
                    num(sol.amplification),
                ]);
                rows.push(json!({
                    "k": k + 1,
                    "exponent": c.exponent,
                    "q": c.q.to_string(),
                    "p": c.p.to_string(),
                    "residual": c.residual,
                    "amplification": sol.amplification,
                }));
            }
            Err(linflow::Error::ResonantMode { n }) => {
                unresolved.push(json!({ "k": k + 1, "exponent": c.exponent, "reason": "resonant", "n": n }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let amps: Vec<f64> = rows.iter().filter_map(|r| r["amplification"].as_f64()).collect();
    let increasing = amps.windows(2).all(|w| w[1] > w[0]);
    Ok(Report {
        json: json!({
            "schedule": config.schedule,
            "rows": rows,
            "unresolved": unresolved,
            "strictly_increasing": increasing,
        }),
        csv,
        failure: None,
    })
}
