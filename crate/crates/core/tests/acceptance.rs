//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use pseudohopf::cycles::{
    cycle_census, cycle_producing_sign, find_cycles_local, CycleConfig, Stability,
};
use pseudohopf::field::{classify_mts, PiecewiseField, Side, SmoothField};
use pseudohopf::flow::{displacement, estimate_lyapunov, half_return, linear_fit, IntegratorConfig};
use pseudohopf::poly::{Poly1, Poly2};
use pseudohopf::scenario::{Scenario, Window};
use pseudohopf::unfold::{
    apply_shift, build_perturbation, coefficient_scaling, lemma1_random, local_v2_limit_check, unfold,
    verify_contact_ladder, ShiftConvention, UnfoldingParams,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn v2_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for c in [-1.0, 0.5, 1.0] {
            let d = classify_mts(&PiecewiseField::sys_a(k, c)).map_err(|e| e.to_string())?;
            let err = (d.V2 - 2.0 * c / (2 * k + 1) as f64).abs();
            check(err < 1e-10, || format!("k={k}, c={c}: V2 = {}", d.V2))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("max |V2 - 2c/(2k+1)| = {worst:.1e}"))
}

fn displacement_consistency() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut notes = Vec::new();
    for k in [1, 2] {
        let z = PiecewiseField::sys_a(k, 1.0);
        let v2 = classify_mts(&z).map_err(|e| e.to_string())?.V2;
        let x = 0.02;
        let d = displacement(&z, x, &cfg).map_err(|e| e.to_string())?.delta_value;
        let rel = (d / (x * x) / v2 - 1.0).abs();
        check(rel < 0.02, || format!("k={k}: Δ/x² = {} vs V2 = {v2}", d / (x * x)))?;
        notes.push(format!("k={k} rel err {rel:.2e}"));
    }
    Ok(notes.join(", "))
}

fn interpolation_construction() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [-1.0, 0.5, 1.0] {
        let z = PiecewiseField::sys_a(2, c);
        for eps in [0.1, 0.01] {
            let p = build_perturbation(&z, &UnfoldingParams::new(2, vec![-1.0, 1.0], eps))
                .map_err(|e| e.to_string())?;
            let e2 = eps * eps;
            let want_plus = Poly1::new(vec![0.0, e2, -c * e2]);
            let want_minus = Poly1::new(vec![0.0, -e2]);
            for j in 0..=2 {
                worst = worst
                    .max((p.p_plus.coeff(j) - want_plus.coeff(j)).abs())
                    .max((p.p_minus.coeff(j) - want_minus.coeff(j)).abs());
            }
        }
    }
    check(worst < 1e-10, || format!("coefficient error {worst:e}"))?;
    let z = PiecewiseField::sys_a(2, 1.0);
    let coarse: Vec<f64> = (3..=7).map(|n| 2f64.powi(-n)).collect();
    let r = coefficient_scaling(&z, &UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1), &coarse, 0.05)
        .map_err(|e| e.to_string())?;
    check(r.pass, || format!("slopes {:?}", r.entries))?;
    // with α ≠ 0 every exponent is attained exactly in the limit
    let fine: Vec<f64> = (9..=13).map(|n| 2f64.powi(-n)).collect();
    let r2 = coefficient_scaling(&z, &UnfoldingParams::new(2, vec![-1.0, 2.0], 0.1), &fine, 0.05)
        .map_err(|e| e.to_string())?;
    check(r2.pass && r2.entries.iter().all(|e| !e.leading_vanishes), || {
        format!("skewed slopes {:?}", r2.entries)
    })?;
    let slopes: Vec<String> = r2.entries.iter().map(|e| format!("{:.3}", e.slope)).collect();
    Ok(format!("coef err {worst:.1e}; slopes [{}]", slopes.join(", ")))
}

fn ladder() -> Outcome {
    let cases = [
        (PiecewiseField::sys_a(2, 1.0), UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1)),
        (PiecewiseField::sys_a(3, 1.0), UnfoldingParams::new(3, vec![-1.0, 1.0, 2.0, 3.0], 0.05)),
    ];
    let mut worst: f64 = 0.0;
    for (z, p) in cases {
        let (u, _) = unfold(&z, &p).map_err(|e| e.to_string())?;
        let r = verify_contact_ladder(&u, &p).map_err(|e| e.to_string())?;
        check(r.pass, || r.failures.join("; "))?;
        check(r.contacts.len() == 2 * (2 * p.k as usize - 1), || "contact count".into())?;
        worst = worst.max(r.contacts.iter().map(|c| c.residual).fold(0.0, f64::max));
    }
    Ok(format!("3 + 5 two-folds, max |Y| residual {worst:.1e}"))
}

fn v2_limit() -> Outcome {
    let cases = [
        (PiecewiseField::sys_a(2, 1.0), UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1)),
        (PiecewiseField::sys_a(3, 1.0), UnfoldingParams::new(3, vec![-1.0, 1.0, 2.0, 3.0], 0.1)),
    ];
    let mut orders = Vec::new();
    for (z, p) in cases {
        let r = local_v2_limit_check(&z, &p).map_err(|e| e.to_string())?;
        check(r.pass, || format!("k={}: {:?}", p.k, r.entries))?;
        for e in &r.entries {
            check(e.errors[2] < e.errors[0], || format!("k={}, index {}: error grows", p.k, e.index))?;
            orders.push(e.order);
        }
        if p.k == 2 {
            let limit = 2.0 / 3.0;
            for e in &r.entries {
                let rel = (e.values[2] / limit - 1.0).abs();
                check(rel < 0.05, || format!("V2,{}(0.025) = {}", e.index, e.values[2]))?;
            }
        }
    }
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("min fitted order {min:.3}"))
}

fn lemma1() -> Outcome {
    let batch = lemma1_random(2024, 50).map_err(|e| e.to_string())?;
    check(batch.draws.len() == 50, || "draw count".into())?;
    check(batch.max_residual < 1e-8, || format!("max residual {:e}", batch.max_residual))?;
    let k3 = batch.draws.iter().filter(|d| d.k == 3).count();
    Ok(format!("50 draws ({k3} with k=3), max residual {:.1e}", batch.max_residual))
}

fn pseudo_hopf() -> Outcome {
    let z = PiecewiseField::sys_a(1, 1.0);
    let cfg = CycleConfig::default();
    let mags = [1e-5, 1e-4, 1e-3];
    let mut producing = Vec::new();
    for sign in [-1.0, 1.0] {
        let mut counts = Vec::new();
        for &m in &mags {
            let b = sign * m;
            let r = find_cycles_local(&apply_shift(&z, b, ShiftConvention::Minus), 0.0, cfg.u_radius, b, &cfg)
                .map_err(|e| e.to_string())?;
            check(r.non_hyperbolic.is_empty(), || format!("b={b}: non-hyperbolic root"))?;
            for c in &r.cycles {
                let bad = c.check(&cfg);
                check(bad.is_empty(), || bad.join("; "))?;
                check(c.stability == Stability::Unstable, || format!("b={b}: stable cycle"))?;
            }
            counts.push((b, r.cycles.first().map(|c| c.amplitude), r.cycles.len()));
        }
        if counts.iter().all(|c| c.2 == 1) {
            producing.push((sign, counts));
        } else {
            check(counts.iter().all(|c| c.2 == 0), || format!("sign {sign}: counts {counts:?}"))?;
        }
    }
    check(producing.len() == 1, || "both or neither sign produce cycles".into())?;
    let (sign, rows) = &producing[0];
    check(*sign == cycle_producing_sign(2.0 / 3.0, 1.0, ShiftConvention::Minus), || {
        "unexpected producing sign".into()
    })?;
    let mut ratios = Vec::new();
    for (b, amp, _) in rows {
        let ratio = amp.unwrap() / (3.0 * b.abs()).sqrt();
        if b.abs() <= 1e-4 {
            check((0.9..=1.1).contains(&ratio), || format!("b={b}: ratio {ratio}"))?;
        }
        ratios.push(ratio);
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.0.abs().ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.1.unwrap().ln()).collect();
    let slope = linear_fit(&lx, &ly).0;
    check((slope - 0.5).abs() <= 0.02, || format!("exponent {slope}"))?;
    Ok(format!(
        "cycles for b<0 only, ratios [{}], exponent {slope:.4}",
        ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
    ))
}

fn census() -> Outcome {
    let cfg = CycleConfig::default();
    let cases = [
        (PiecewiseField::sys_a(2, 1.0), UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1), 1e-6),
        (PiecewiseField::sys_a(3, 1.0), UnfoldingParams::new(3, vec![-1.0, 1.0, 2.0, 3.0], 0.05), 1e-8),
    ];
    let mut notes = Vec::new();
    for (z, p, mag) in cases {
        let d = classify_mts(&z).map_err(|e| e.to_string())?;
        let sign = cycle_producing_sign(d.V2, d.delta(), ShiftConvention::Minus);
        let r = cycle_census(&z, &p.clone().with_b(sign * mag), &cfg).map_err(|e| e.to_string())?;
        check(r.pass, || format!("k={}: {}", p.k, r.failures.join("; ")))?;
        check(r.cycles.len() == p.k as usize, || format!("k={}: {} cycles", p.k, r.cycles.len()))?;
        check(r.cycles.iter().all(|c| c.stability == Stability::Unstable), || "stability".into())?;
        let opposite = cycle_census(&z, &p.clone().with_b(-sign * mag), &cfg).map_err(|e| e.to_string())?;
        check(opposite.cycles.is_empty(), || format!("k={}: cycles for the opposite sign", p.k))?;
        notes.push(format!("k={}: {} unstable cycles, 0 for opposite b", p.k, r.cycles.len()));
    }
    Ok(notes.join("; "))
}

fn structural() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    let systems = [PiecewiseField::sys_a(1, 1.0), PiecewiseField::sys_a(2, -1.0), PiecewiseField::sys_g()];
    for z in &systems {
        for x in [0.005, 0.02, 0.06] {
            for side in [Side::Upper, Side::Lower] {
                let y = half_return(z, side, x, &cfg).map_err(|e| e.to_string())?;
                let back = half_return(z, side, y, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max((back - x).abs());
            }
        }
    }
    check(worst < 1e-7, || format!("involution residual {worst:e}"))?;

    for k in 1..=3 {
        let e = estimate_lyapunov(&PiecewiseField::sys_a(k, 0.0), (1e-3, 2e-2), &cfg).map_err(|e| e.to_string())?;
        check(e.center, || format!("SYS-A({k},0) not flagged as a center"))?;
    }
    let mut non_center: Vec<PiecewiseField> = Vec::new();
    for k in 1..=3 {
        for c in [-1.0, 1.0] {
            non_center.push(PiecewiseField::sys_a(k, c));
        }
    }
    non_center.push(PiecewiseField::sys_g());
    non_center.push(PiecewiseField::new(
        SmoothField::new(
            Poly2::constant(1.0),
            Poly2::from_terms([(1, 0, -1.0), (2, 1, 1.0)]).map_err(|e| e.to_string())?,
        ),
        PiecewiseField::sys_a(1, 0.0).lower,
    ));
    let mut orders = Vec::new();
    for z in &non_center {
        let e = estimate_lyapunov(z, (1e-3, 2e-2), &cfg).map_err(|e| e.to_string())?;
        check(!e.center && e.order % 2 == 0, || format!("odd or missing order: {e:?}"))?;
        orders.push(e.order);
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cli = cli_contracts(dir.path())?;
    Ok(format!("involution {worst:.1e}; orders {orders:?}; {cli}"))
}

fn run_cli(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pseudohopf"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn cli_contracts(dir: &Path) -> Result<String, String> {
    let mut sc = Scenario::for_field("sys-a2", &PiecewiseField::sys_a(2, 1.0), Window { center: 0.0, radius: 0.2 });
    sc.unfold = Some(UnfoldingParams::new(2, vec![-1.0, 1.0], 0.1));
    let good = dir.join("good.toml");
    std::fs::write(&good, sc.to_toml()).map_err(|e| e.to_string())?;

    let mut bad = Scenario::for_field("c3", &PiecewiseField::sys_a(1, 1.0), Window { center: 0.0, radius: 0.2 });
    bad.field.lower_x = Poly2::constant(1.0);
    bad.field.lower_y = Poly2::monomial(1, 0, 1.0);
    let bad_path = dir.join("bad.toml");
    std::fs::write(&bad_path, bad.to_toml()).map_err(|e| e.to_string())?;

    let g = good.to_str().unwrap();
    let (a, b) = (dir.join("a"), dir.join("b"));
    let mut identical = 0;
    for cmd in ["classify", "verify-lemma1", "cycles", "scan"] {
        for out in [&a, &b] {
            let code = run_cli(&[cmd, "--config", g, "--out", out.to_str().unwrap(), "--b", "-1e-6"])?;
            check(code == 0, || format!("{cmd} exited with {code}"))?;
        }
        let file = format!("sys-a2.{cmd}.json");
        let ta = std::fs::read_to_string(a.join(&file)).map_err(|e| e.to_string())?;
        let tb = std::fs::read_to_string(b.join(&file)).map_err(|e| e.to_string())?;
        check(without_timestamp(&ta) == without_timestamp(&tb), || format!("{cmd} output differs"))?;
        identical += 1;
    }
    let classify = std::fs::read_to_string(a.join("sys-a2.classify.json")).map_err(|e| e.to_string())?;
    check(classify.contains("\"V2\": 0.4"), || "classify payload lacks V2 = 0.4".into())?;

    let out = a.to_str().unwrap();
    let c3 = run_cli(&["classify", "--config", bad_path.to_str().unwrap(), "--out", out])?;
    check(c3 == 1, || format!("C3 violation exited with {c3}"))?;
    let report = std::fs::read_to_string(a.join("c3.classify.json")).map_err(|e| e.to_string())?;
    check(report.contains("C3"), || "diagnostic does not name C3".into())?;
    let missing = run_cli(&["classify", "--config", "/nonexistent.toml", "--out", out])?;
    check(missing == 1, || format!("missing config exited with {missing}"))?;
    let usage = run_cli(&["frobnicate", "--config", g])?;
    check(usage == 1, || format!("unknown command exited with {usage}"))?;
    // at ε = 2 the factor 1 − cx flips the visibility of the outer folds
    let gate = run_cli(&["verify-ladder", "--config", g, "--out", out, "--epsilon", "2"])?;
    check(gate == 3, || format!("failed ladder exited with {gate}"))?;
    let census = run_cli(&["cycles", "--config", g, "--out", out, "--b", "1e-6"])?;
    check(census == 3, || format!("cycle-free census exited with {census}"))?;
    Ok(format!("CLI: {identical} commands byte-stable, exit codes 0/1/3 as specified"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("V2 closed form", v2_closed_form),
        ("displacement consistency", displacement_consistency),
        ("interpolation construction", interpolation_construction),
        ("two-fold ladder", ladder),
        ("local V2 limit", v2_limit),
        ("coefficient identities", lemma1),
        ("pseudo-Hopf dichotomy and amplitude", pseudo_hopf),
        ("k-cycle census", census),
        ("structural properties", structural),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2}s): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2}s): {why}", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
