//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semidae::degree::{
    boundary_margin, chart_index, deg_psi, degree_boundary_oracle, degree_sum, find_zeros, pair_degree, DegreeOptions,
    ZeroSum,
};
use semidae::expr::var_list;
use semidae::field::{ExprMap, VectorField};
use semidae::flow::{time_t_map, DRIFT_LIMIT};
use semidae::periodic::multiplicity_scan;
use semidae::{Error, ManifoldPoint, Region, SystemDef};
use semidae_cli::sysfile::{strs, SystemFile};
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load(name: &str) -> SystemDef {
    SystemFile::load(&fixture(name)).unwrap()
}

/// Runs the binary and returns (exit code, parsed stdout, elapsed).
fn cli(args: &[&str]) -> Result<(i32, Value, Duration), String> {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_semidae"))
        .args(args)
        .env_remove("SEMIDAE_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let code = out.status.code().unwrap_or(-1);
    let json = serde_json::from_slice(&out.stdout).map_err(|e| {
        format!(
            "{args:?}: bad JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok((code, json, elapsed))
}

fn cli_ok(args: &[&str]) -> Result<(Value, Duration), String> {
    let (code, json, t) = cli(args)?;
    ensure!(code == 0, "{args:?} exited with {code}");
    Ok((json, t))
}

fn floats(v: &Value) -> Vec<f64> {
    serde_json::from_value(v.clone()).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

fn criterion_1() -> Check {
    let path = fixture("pozzo.sys");
    let (rep, elapsed) = cli_ok(&["degree", path.to_str().unwrap(), "--grid", "16"])?;
    let zeros = rep["zeros"].as_array().unwrap();
    ensure!(zeros.len() == 1, "{} zeros", zeros.len());
    let z = floats(&zeros[0]["point"]);
    ensure!(dist(&z, &[0.0; 3]) < 1e-8, "zero at {z:?}");
    ensure!(
        rep["deg_f"] == 1 && rep["sign_d2g"] == 1 && rep["deg_psi"] == 1,
        "report {rep}"
    );
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "one zero at origin, deg_F = sign_d2g = deg_Psi = 1 in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Check {
    let path = fixture("equivlien.sys");
    let p = path.to_str().unwrap();
    let (rep, _) = cli_ok(&["degree", p])?;
    let zeros = rep["zeros"].as_array().unwrap();
    ensure!(zeros.len() == 1, "{} zeros", zeros.len());
    ensure!(
        dist(&floats(&zeros[0]["point"]), &[0.0, 0.0]) < 1e-8,
        "zero {}",
        zeros[0]["point"]
    );
    ensure!(rep["deg_f"] == 1, "deg_F = {}", rep["deg_f"]);

    let (rep, _) = cli_ok(&["resonance", p])?;
    ensure!(
        rep["zeros"][0]["verdict"] == "NonResonant",
        "verdict {}",
        rep["zeros"][0]["verdict"]
    );

    let (rep, _) = cli_ok(&["shoot", p, "--lambda", "1e-3"])?;
    let x0 = rep["solution"]["p0"][0].as_f64().unwrap();
    ensure!((x0 - 5e-4).abs() <= 1e-5, "x(0) = {x0}");

    let (rep, _) = cli_ok(&["branch", p, "--lambda-max", "0.1"])?;
    let term = &rep["branch"]["termination"];
    ensure!(term == "ReachedLambdaMax", "termination {term}");
    let n = rep["branch"]["points"].as_array().unwrap().len();
    Ok(format!(
        "deg_F = 1, NonResonant, x(0) = {x0:.9e}, branch of {n} points reached λ = 0.1"
    ))
}

fn criterion_3() -> Check {
    let path = fixture("exmults.sys");
    let p = path.to_str().unwrap();
    let (rep, _) = cli_ok(&["zeros", p])?;
    let zeros = rep["zeros"].as_array().unwrap();
    ensure!(zeros.len() == 2, "{} zeros", zeros.len());
    let at = |target: [f64; 2]| zeros.iter().find(|z| dist(&floats(&z["point"]), &target) < 1e-8);
    let (Some(origin), Some(other)) = (at([0.0, 0.0]), at([1.0, 1.0])) else {
        return Err(format!("zeros {zeros:?}"));
    };
    ensure!(origin["degenerate"] == true, "(0,0) not degenerate");
    ensure!(other["index"] == 1, "(1,1) index {}", other["index"]);

    let (rep, _) = cli_ok(&["degree", p, "--method", "boundary-oracle"])?;
    ensure!(rep["deg_f"] == 0, "boundary oracle {}", rep["deg_f"]);

    let (rep, _) = cli_ok(&["resonance", p])?;
    let verdict = |target: [f64; 2]| {
        rep["zeros"]
            .as_array()
            .unwrap()
            .iter()
            .find(|v| dist(&floats(&v["zero"]["point"]), &target) < 1e-8)
            .map(|v| v["verdict"].clone())
    };
    ensure!(
        verdict([0.0, 0.0]) == Some("Resonant".into()),
        "(0,0) {:?}",
        verdict([0.0, 0.0])
    );
    ensure!(
        verdict([1.0, 1.0]) == Some("NonResonant".into()),
        "(1,1) {:?}",
        verdict([1.0, 1.0])
    );

    let (rep, _) = cli_ok(&["multiplicity", p, "--lambda", "0.01"])?;
    let count = rep["count"].as_u64().unwrap();
    ensure!(count >= 2, "{count} orbits");
    // Sup-norm separation needs whole orbits, which the report omits.
    let orbits = multiplicity_scan(&load("exmults.sys"), 0.01, 16).map_err(|e| e.to_string())?;
    let mut min_sep = f64::INFINITY;
    for (i, a) in orbits.iter().enumerate() {
        for b in &orbits[i + 1..] {
            min_sep = min_sep.min(a.orbit.sup_distance(&b.orbit));
        }
    }
    ensure!(min_sep >= 0.5, "separation {min_sep}");
    Ok(format!(
        "zeros (0,0) degenerate and (1,1) index +1, oracle 0, {count} orbits separated by {min_sep:.3}"
    ))
}

fn criterion_4() -> Check {
    let mut found = Vec::new();
    for (name, target) in [
        ("eqex1.sys", [[0.0, 0.0], [0.0, 0.0]]),
        ("eqex2.sys", [[1.0, 0.0], [-1.0, 0.0]]),
    ] {
        let path = fixture(name);
        let (code, rep, _) = cli(&["check", path.to_str().unwrap()])?;
        ensure!(code == 2, "{name} exited with {code}");
        let w = floats(&rep["witness"]);
        let d = target.iter().map(|t| dist(&w, t)).fold(f64::INFINITY, f64::min);
        ensure!(d < 1e-2, "{name} witness {w:?}");
        found.push(format!("{name} witness ({:.1e}, {:.1e})", w[0], w[1]));
    }
    Ok(found.join(", "))
}

fn coef(rng: &mut ChaCha8Rng) -> String {
    format!("({:.3})", rng.random_range(-2.0..2.0))
}

/// Random polynomial: constant, every linear term, one product term.
fn poly(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let mut terms = vec![coef(rng)];
    for v in vars {
        terms.push(format!("{}*{v}", coef(rng)));
    }
    let a = &vars[rng.random_range(0..vars.len())];
    let b = &vars[rng.random_range(0..vars.len())];
    terms.push(format!("{}*{a}*{b}", coef(rng)));
    terms.join(" + ")
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_system(rng: &mut ChaCha8Rng) -> Option<SystemDef> {
    let k = rng.random_range(1..=2);
    let s = rng.random_range(1..=2);
    let xs = names("x", k);
    let ys = names("y", s);
    let all: Vec<String> = xs.iter().chain(&ys).cloned().collect();
    let f: Vec<String> = (0..k).map(|_| poly(rng, &all)).collect();
    let g: Vec<String> = (0..s)
        .map(|i| {
            let cubic = format!("{}*{}^3", coef(rng), ys[i]);
            format!("{} + {cubic} + {}", poly(rng, &all), poly(rng, &xs))
        })
        .collect();
    let sys = SystemDef::from_strs(
        k,
        s,
        std::f64::consts::TAU,
        &strs(&f),
        &strs(&g),
        &[],
        Region::cube(k + s, 1.0),
    )
    .ok()?;
    sys.validate(1024).ok()?;
    Some(sys)
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = DegreeOptions {
        grid: 8,
        ..Default::default()
    };
    let (mut accepted, mut drawn, mut nonzero) = (0, 0, 0);
    while accepted < 20 {
        drawn += 1;
        ensure!(drawn < 100_000, "only {accepted} admissible systems in {drawn} draws");
        let Some(sys) = random_system(&mut rng) else { continue };
        // Resample on precondition failures only: degenerate or boundary zeros.
        let rep = match deg_psi(&sys, &ZeroSum, &opts) {
            Ok(r) if !r.near_boundary && !r.zeros.is_empty() => r,
            Ok(_) | Err(Error::DegenerateZeros { .. } | Error::BoundaryZero { .. }) => continue,
            Err(e) => return Err(format!("{e} for {:?}", sys.f())),
        };
        let charts: i64 = rep
            .zeros
            .iter()
            .map(|z| chart_index(&sys, z).map(i64::from))
            .sum::<semidae::Result<i64>>()
            .map_err(|e| e.to_string())?;
        ensure!(
            rep.deg_psi == i64::from(rep.sign_d2g) * rep.deg_f,
            "deg_Psi {} vs {} * {}",
            rep.deg_psi,
            rep.sign_d2g,
            rep.deg_f
        );
        ensure!(
            charts == rep.deg_psi,
            "chart index sum {charts} vs deg_Psi {} for f = {:?}",
            rep.deg_psi,
            sys.f()
        );
        if sys.n() == 2 {
            let oracle = degree_boundary_oracle(&sys, sys.region(), 16, 33, 0).map_err(|e| e.to_string())?;
            ensure!(
                oracle == rep.deg_f,
                "zero sum {} vs boundary oracle {oracle} for f = {:?}",
                rep.deg_f,
                sys.f()
            );
        }
        accepted += 1;
        nonzero += usize::from(rep.deg_psi != 0);
    }
    Ok(format!(
        "20 systems ({nonzero} with nonzero degree, {drawn} draws): deg_Psi = sign_d2g deg_F = Σ chart index"
    ))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let region = Region::cube(2, 1.0);
    let vars = names("x", 2);
    let var_refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    let (mut accepted, mut drawn) = (0, 0);
    let mut degrees = Vec::new();
    while accepted < 25 {
        drawn += 1;
        ensure!(drawn < 100_000, "only {accepted} admissible maps in {drawn} draws");
        let comps: Vec<String> = (0..2)
            .map(|_| {
                format!(
                    "{} + {}*x1^3 + {}*x2^3",
                    poly(&mut rng, &vars),
                    coef(&mut rng),
                    coef(&mut rng)
                )
            })
            .collect();
        let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
        let field = ExprMap::parse(&refs, &var_refs).map_err(|e| e.to_string())?;
        let Ok(set) = find_zeros(&field, &region, 16) else {
            continue;
        };
        if set.zeros.is_empty() || set.near_boundary || set.zeros.iter().any(|z| z.degenerate) {
            continue;
        }
        match boundary_margin(&field, &region, 257) {
            Ok((m, _)) if m > 1e-3 => {}
            _ => continue,
        }
        let sum = degree_sum(&set.zeros, &region).map_err(|e| e.to_string())?;
        let oracle = degree_boundary_oracle(&field, &region, 16, 33, 0).map_err(|e| e.to_string())?;
        ensure!(sum == oracle, "zero sum {sum} vs oracle {oracle} for {comps:?}");
        degrees.push(sum);
        accepted += 1;
    }
    degrees.sort();
    degrees.dedup();
    Ok(format!("25 maps ({drawn} draws), degrees seen {degrees:?}"))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let region = Region::cube(2, 1.0);
    let vars = var_list(["x1", "y1"]);
    let opts = DegreeOptions::default();
    let (mut accepted, mut drawn) = (0, 0);
    let mut seen = Vec::new();
    while accepted < 10 {
        drawn += 1;
        ensure!(drawn < 100_000, "only {accepted} admissible ω in {drawn} draws");
        let src = format!(
            "{} + {}*x1 + {}*x1^2 + {}*x1^3 + {}*y1 + {}*x1*y1 + {}*y1^2",
            coef(&mut rng),
            coef(&mut rng),
            coef(&mut rng),
            coef(&mut rng),
            coef(&mut rng),
            coef(&mut rng),
            coef(&mut rng)
        );
        let omega = [semidae::parse(&src, vars.clone()).map_err(|e| e.to_string())?];
        let rep = match pair_degree(&omega, &region, &ZeroSum, &opts) {
            Ok(r) => r,
            Err(Error::DegenerateZeros { .. } | Error::BoundaryZero { .. }) => continue,
            Err(e) => return Err(format!("{e} for ω = {src}")),
        };
        ensure!(
            rep.direct == Some(-rep.slice_degree),
            "direct {:?} vs slice {} for ω = {src}",
            rep.direct,
            rep.slice_degree
        );
        seen.push(rep.slice_degree);
        accepted += 1;
    }
    seen.sort();
    seen.dedup();
    Ok(format!(
        "10 ω ({drawn} draws): direct degree = -slice degree, slice degrees seen {seen:?}"
    ))
}

fn manifold_samples(sys: &SystemDef, count: usize, rng: &mut ChaCha8Rng) -> Vec<ManifoldPoint> {
    let region = sys.region();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<f64> = (0..sys.n())
            .map(|i| rng.random_range(region.lower()[i]..region.upper()[i]))
            .collect();
        if let Ok(pt) = sys.solve_constraint(&z[..sys.k()], &z[sys.k()..]) {
            if region.contains(&pt.coords()) {
                out.push(pt);
            }
        }
    }
    out
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fixtures = ["pozzo.sys", "equivlien.sys", "exmults.sys"];
    let mut worst_ad = 0.0f64;
    let mut worst_tan = 0.0f64;
    let mut worst_drift = 0.0f64;
    let mut worst_sens = 0.0f64;
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs());

    for name in fixtures {
        let sys = load(name);
        let (k, n) = (sys.k(), sys.n());
        let region = sys.region().clone();
        // Automatic differentiation against central differences.
        let h = 1e-6;
        for _ in 0..1000 {
            let z: Vec<f64> = (0..n)
                .map(|i| rng.random_range(region.lower()[i]..region.upper()[i]))
                .collect();
            let t = rng.random_range(0.0..sys.period());
            let jac = VectorField::jacobian(&sys, &z).map_err(|e| e.to_string())?;
            let dh = sys.partials(t, &z[..k], &z[k..], true).map_err(|e| e.to_string())?.dh;
            for j in 0..n {
                let (mut zp, mut zm) = (z.clone(), z.clone());
                zp[j] += h;
                zm[j] -= h;
                let fp = VectorField::eval(&sys, &zp).map_err(|e| e.to_string())?;
                let fm = VectorField::eval(&sys, &zm).map_err(|e| e.to_string())?;
                let hp = sys.eval_h(t, &zp[..k], &zp[k..]).map_err(|e| e.to_string())?;
                let hm = sys.eval_h(t, &zm[..k], &zm[k..]).map_err(|e| e.to_string())?;
                for i in 0..n {
                    worst_ad = worst_ad.max(rel(jac[(i, j)], (fp[i] - fm[i]) / (2.0 * h)));
                }
                for i in 0..k {
                    worst_ad = worst_ad.max(rel(dh[(i, j)], (hp[i] - hm[i]) / (2.0 * h)));
                }
            }
        }
        // Tangency of the induced fields.
        for pt in manifold_samples(&sys, 1000, &mut rng) {
            let t = rng.random_range(0.0..sys.period());
            for v in [sys.psi(&pt), sys.upsilon(t, &pt)] {
                let v = v.map_err(|e| e.to_string())?;
                let d = sys.tangency_defect(&pt, v.as_slice()).map_err(|e| e.to_string())?;
                worst_tan = worst_tan.max(d / (1.0 + v.norm()));
            }
        }
    }

    // Drift and sensitivities over one period from points whose orbits stay in the box.
    let starts: [(&str, f64, &[f64]); 5] = [
        ("pozzo.sys", 0.0, &[0.5, -0.3]),
        ("pozzo.sys", 0.0, &[-1.0, 0.8]),
        ("equivlien.sys", 1e-3, &[5e-4]),
        ("exmults.sys", 0.01, &[0.3]),
        ("exmults.sys", 0.01, &[-0.5]),
    ];
    let h = 1e-6;
    for (name, lambda, p) in starts {
        let sys = load(name);
        let k = sys.k();
        let q = vec![0.0; sys.s()];
        let base = time_t_map(&sys, lambda, p, &q).map_err(|e| format!("{name}: {e}"))?;
        worst_drift = worst_drift.max(base.max_constraint_drift);
        for j in 0..k {
            let (mut pp, mut pm) = (p.to_vec(), p.to_vec());
            pp[j] += h;
            pm[j] -= h;
            let fp = time_t_map(&sys, lambda, &pp, &q).map_err(|e| e.to_string())?.end.p;
            let fm = time_t_map(&sys, lambda, &pm, &q).map_err(|e| e.to_string())?.end.p;
            for i in 0..k {
                worst_sens = worst_sens.max(rel(base.sensitivity[(i, j)], (fp[i] - fm[i]) / (2.0 * h)));
            }
        }
        if sys.has_forcing() {
            let fp = time_t_map(&sys, lambda + h, p, &q).map_err(|e| e.to_string())?.end.p;
            let fm = time_t_map(&sys, lambda - h, p, &q).map_err(|e| e.to_string())?.end.p;
            for i in 0..k {
                worst_sens = worst_sens.max(rel(base.lambda_sensitivity[i], (fp[i] - fm[i]) / (2.0 * h)));
            }
        }
    }

    ensure!(worst_ad <= 1e-6, "AD vs FD {worst_ad:.2e}");
    ensure!(worst_tan <= 1e-10, "tangency defect {worst_tan:.2e}");
    ensure!(worst_drift <= DRIFT_LIMIT, "constraint drift {worst_drift:.2e}");
    ensure!(worst_sens <= 1e-5, "sensitivity vs FD {worst_sens:.2e}");
    Ok(format!(
        "AD {worst_ad:.1e}, tangency {worst_tan:.1e}, drift {worst_drift:.1e}, sensitivity {worst_sens:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("cubic oscillator degree", criterion_1),
        ("Lienard degree, resonance, shooting, branch", criterion_2),
        ("two-zero system", criterion_3),
        ("degenerate constraints rejected", criterion_4),
        ("degree formula on random systems", criterion_5),
        ("zero sum equals boundary oracle", criterion_6),
        ("implicit reduction degree", criterion_7),
        ("numerical hygiene", criterion_8),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!(
                "PASS {}: {name} ({detail}) [{:.1} s]",
                i + 1,
                t0.elapsed().as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL {}: {name} ({detail}) [{:.1} s]",
                    i + 1,
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
