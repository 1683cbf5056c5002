//! One line per acceptance criterion. Each criterion drives the binary and
//! compares its report with values computed here from closed forms.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Duration;

use common::run;
use serde_json::Value;

type Verdict = Result<String, String>;

/// Sorted `(label, numerator, denominator)` per solution.
type PhaseTable = Vec<Vec<(String, u64, u64)>>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn report(args: &[&str]) -> Result<(Value, Duration), String> {
    let r = run(args);
    if r.code != 0 {
        return Err(format!("`{}` exited with {}: {}", args.join(" "), r.code, r.stderr.trim()));
    }
    let doc = r.json();
    Ok((doc["report"].clone(), r.elapsed))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * b.abs().max(f64::MIN_POSITIVE)
}

fn fermion_current(cos: f64, tl: f64, tr: f64) -> f64 {
    PI * cos * cos / 24.0 * (tl * tl - tr * tr)
}

/// Landauer integral with the closed-form transmission by composite Simpson.
fn landauer_oracle(lambda: f64, tl: f64, tr: f64) -> f64 {
    let fermi = |w: f64, t: f64| 1.0 / ((w / t).exp() + 1.0);
    let trans = |w: f64| {
        let k = (-w / 2.0).acos();
        let l2 = lambda * lambda;
        4.0 * l2 * k.sin().powi(2) / (l2 * l2 + 1.0 - 2.0 * l2 * (2.0 * k).cos())
    };
    let upper = (60.0 * tl.max(tr)).min(2.0 - 1e-9);
    let n = 200_000;
    let h = upper / n as f64;
    let g = |w: f64| w * trans(w) * (fermi(w, tl) - fermi(w, tr));
    let mut s = g(0.0) + g(upper);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (2.0 * PI)
}

fn central_charges() -> Verdict {
    let (r, t) = report(&["virasoro-check", "--cutoff", "6", "--range", "2"])?;
    let models = r["models"].as_array().ok_or("no models")?;
    for (m, c) in models.iter().zip(["1/2", "1"]) {
        ensure(m["central_charge"] == c, format!("{} has c = {}", m["model"], m["central_charge"]))?;
        ensure(m["max_commutator_deviation"] == "0", format!("{} commutator deviation", m["model"]))?;
        ensure(m["commutators"].as_array().map_or(0, |v| v.len()) == 25, "expected 25 (m, n) pairs")?;
    }
    ensure(models.len() == 2, "both models")?;
    ensure(t < Duration::from_secs(10), format!("runtime {t:?} ≥ 10 s"))?;
    Ok(format!("c = 1/2 and 1 exactly, 25 commutators at zero deviation, {:.2} s", t.as_secs_f64()))
}

fn intertwining() -> Verdict {
    let (r, t) = report(&["intertwiner", "--cutoff", "5", "--n-max", "2"])?;
    let entries = r["entries"].as_array().ok_or("no entries")?;
    ensure(entries.len() == 40, format!("{} entries, expected 8 × 5", entries.len()))?;
    let mut angles: Vec<&str> = entries.iter().filter_map(|e| e["angle"].as_str()).collect();
    angles.dedup();
    ensure(angles.len() == 8, "8 distinct angles")?;
    let mut exact = 0;
    for e in entries {
        if e["exact"] == true {
            exact += 1;
            ensure(
                e["deviation"]["exact"] == "0",
                format!("exact deviation {} at {}", e["deviation"]["exact"], e["angle"]),
            )?;
        } else {
            ensure(f(&e["deviation"]["value"]) <= 1e-12, format!("float deviation at {}", e["angle"]))?;
        }
    }
    ensure(t < Duration::from_secs(30), format!("runtime {t:?} ≥ 30 s"))?;
    Ok(format!("{exact} exact entries at 0, {} float entries ≤ 1e-12, {:.2} s", 40 - exact, t.as_secs_f64()))
}

fn automorphism() -> Verdict {
    let (r, _) = report(&["ope-preservation", "--alpha", "3/5,4/5", "--beta", "5/13,12/13", "--cutoff", "4"])?;
    let rot = &r["rotation"];
    ensure(rot["identity"]["holds"] == true, "identity not preserved")?;
    ensure(rot["anticommutator_deviation"]["exact"] == "0", "anticommutator deviation not exactly 0")?;
    ensure(rot["composition_deviation"]["exact"] == "0", "composition deviation not exactly 0")?;
    let sk = &r["skewed"];
    ensure(sk["identity"]["holds"] == false, "skewed control preserved the identity")?;
    ensure(sk["anticommutators_preserved"] == false, "skewed control preserved anticommutators")?;
    ensure(sk["composition_holds"] == false, "skewed control composed correctly")?;
    ensure(r["skew_epsilon"] == "1/100", "skew is not 1%")?;
    Ok("rotation passes identity, anticommutator and composition; 1% skew fails all three".into())
}

fn fermion_current_check() -> Verdict {
    let (r, _) = report(&["current", "--alpha", "0", "--Tl", "1", "--Tr", "0"])?;
    ensure(r["symbolic"]["matches_closed_form"] == true, "symbolic J_E differs from the closed form")?;
    ensure(r["J_E_exact"] == "1/24*pi", format!("exact value {}", r["J_E_exact"]))?;
    ensure(close(f(&r["J_E"]), PI / 24.0, 1e-15), "α = 0 value is not π/24")?;
    for (alpha, cos, tl, tr) in
        [("3/5,4/5", 0.6, 1.5, 0.5), ("0.3", 0.3f64.cos(), 0.7, 1.9), ("pi/4", (PI / 4.0).cos(), 2.0, 0.25)]
    {
        let (r, _) = report(&["current", "--alpha", alpha, "--Tl", &tl.to_string(), "--Tr", &tr.to_string()])?;
        let want = fermion_current(cos, tl, tr);
        ensure(close(f(&r["J_E"]), want, 1e-12), format!("α = {alpha}: {} vs {want}", r["J_E"]))?;
    }
    Ok("J_E = (π cos²α/24)(T_l² - T_r²) symbolically; π/24 at α = 0; 3 numeric spot checks".into())
}

fn entropy_check() -> Verdict {
    let (r, _) = report(&["entropy", "--temperatures", "20", "--angles", "8", "--t-min", "0.1", "--t-max", "2"])?;
    let g = &r["grid"];
    ensure(g["points"] == 3200, "grid is not 20 × 20 × 8")?;
    ensure(g["all_nonnegative"] == true, format!("σ < 0 somewhere (min {})", g["min_sigma"]))?;
    ensure(g["zeros_only_at_equilibrium_or_reflection"] == true, "σ vanishes away from T_l = T_r and α = π/2")?;
    let temps: Vec<f64> = r["temperatures"].as_array().ok_or("no temperatures")?.iter().map(f).collect();
    let angles: Vec<f64> = r["angles"].as_array().ok_or("no angles")?.iter().map(f).collect();
    let mut min = f64::INFINITY;
    for &tl in &temps {
        for &tr in &temps {
            for &a in &angles {
                let sigma = (1.0 / tr - 1.0 / tl) * fermion_current(a.cos(), tl, tr);
                min = min.min(sigma);
            }
        }
    }
    ensure(min >= -1e-15, format!("independent σ minimum {min}"))?;
    ensure(close(f(&g["min_sigma"]), min, 1e-9) || f(&g["min_sigma"]).abs() < 1e-15, "minimum σ disagrees")?;
    Ok(format!("σ ≥ 0 on 3200 points, zeros only at T_l = T_r or α = π/2 (min {min:.2e})"))
}

fn continuity_check() -> Verdict {
    let (r, _) = report(&["continuity"])?;
    let regimes = r["regimes"].as_array().ok_or("no regimes")?;
    ensure(regimes.len() == 2, "both regimes")?;
    for g in regimes {
        ensure(g["holds"] == true, format!("{} regime fails", g["regime"]))?;
    }
    let cross: u64 = regimes.iter().map(|g| g["cross_terms_cancelled"].as_u64().unwrap_or(0)).sum();
    ensure(regimes.iter().any(|g| g["cross_terms_cancelled"].as_u64().unwrap_or(0) > 0), "no cross terms cancelled")?;
    Ok(format!("identity holds for symbolic α in both regimes, {cross} cross terms cancelled"))
}

fn zetas(r: &Value) -> Result<PhaseTable, String> {
    let sols = r["phases"]["solutions"].as_array().ok_or("no solutions")?;
    let mut out: PhaseTable = sols
        .iter()
        .map(|s| {
            let mut v: Vec<(String, u64, u64)> = s["zetas"]
                .as_object()
                .map(|m| {
                    m.iter()
                        .map(|(k, p)| {
                            (k.clone(), p["numerator"].as_u64().unwrap_or(99), p["denominator"].as_u64().unwrap_or(0))
                        })
                        .collect()
                })
                .unwrap_or_default();
            v.sort();
            v
        })
        .collect();
    out.sort();
    Ok(out)
}

fn reflection_phases() -> Verdict {
    let (r, _) = report(&["reflection-phases", "--ring", "ising"])?;
    let got = zetas(&r)?;
    let s = |l: &str, n, d| (l.to_string(), n, d);
    let want = vec![vec![s("1", 0, 1), s("psi", 0, 1)], vec![s("1", 0, 1), s("psi", 1, 2)]];
    ensure(got == want, format!("Ising phases {got:?}"))?;
    let (r, _) = report(&["reflection-phases", "--ring", "z3"])?;
    let got = zetas(&r)?;
    let want = vec![
        vec![s("0", 0, 1), s("1", 0, 1), s("2", 0, 1)],
        vec![s("0", 0, 1), s("1", 1, 3), s("2", 2, 3)],
        vec![s("0", 0, 1), s("1", 2, 3), s("2", 1, 3)],
    ];
    ensure(got == want, format!("ℤ₃ phases {got:?}"))?;
    Ok("Ising: ζ_ψ ∈ {±1}; ℤ₃: cube roots of unity; ζ_identity = 1".into())
}

fn frac(n: i64, d: i64) -> String {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(n, d).max(1);
    let (n, d) = (n / g, d / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn su2k() -> Verdict {
    for k in [1i64, 2, 3, 7, 12] {
        for (p, q) in [(0i64, 1i64), (1, 3), (1, 1)] {
            let rr = frac(p, q);
            let (r, _) = report(&["su2k-decompose", "--k", &k.to_string(), "--rr-bar", &rr])?;
            ensure(r["matches_expected"] == true && r["unit_sum_holds"] == true, format!("k = {k} symbolic check"))?;
            // s² + rr̄/k = 1 - rr̄ + rr̄/k and ((k+2)/2k) rr̄ with rr̄ = p/q
            let u1 = frac(q * k - p * k + p, q * k);
            let zk = frac((k + 2) * p, 2 * k * q);
            ensure(r["coeff_tu1"] == u1.as_str(), format!("k = {k}, rr̄ = {rr}: T_u1 {} vs {u1}", r["coeff_tu1"]))?;
            ensure(r["coeff_tzk"] == zk.as_str(), format!("k = {k}, rr̄ = {rr}: T_Zk {} vs {zk}", r["coeff_tzk"]))?;
        }
    }
    let (r, _) = report(&["su2k-current", "--k-max", "12", "--rr-bar", "1", "--Tl", "1", "--Tr", "0"])?;
    let levels = r["levels"].as_array().ok_or("no levels")?;
    ensure(levels.len() == 12, "12 levels")?;
    for (i, l) in levels.iter().enumerate() {
        let k = (i + 1) as f64;
        ensure(l["agree"] == true, format!("k = {k} differs from the closed form"))?;
        let want = PI / 12.0 * (k - 1.0) / k;
        ensure((f(&l["value"]) - want).abs() <= 1e-14, format!("k = {k}: {} vs {want}", l["value"]))?;
    }
    ensure(r["negative_control"]["detected"] == true, "charged-term control not detected")?;
    let (r, _) = report(&["su2k-fermionize"])?;
    let checks = r["checks"].as_array().ok_or("no checks")?;
    ensure(checks.len() == 5 && checks.iter().all(|c| c["agree"] == true), "fermionized path disagrees")?;
    ensure(r["matches_expected"] == true, "fermionized current differs from the level-2 formula")?;
    Ok("coefficients s² + rr̄/k and (k+2)rr̄/2k, unit sum, J_E for k = 1..12, k = 2 fermionization at 5 rr̄".into())
}

fn lattice() -> Verdict {
    let mut notes = Vec::new();
    for (sites, lambda) in [("400", "1"), ("600", "0.7")] {
        let (r, t) = report(&["lattice-run", "--sites", sites, "--lambda", lambda, "--Tl", "0.1", "--Tr", "0.05"])?;
        let s = &r["summary"];
        let ratio = f(&s["ratios"]["lattice_over_landauer"]);
        ensure((ratio - 1.0).abs() <= 0.03, format!("N = {sites}, λ = {lambda}: lattice / Landauer = {ratio}"))?;
        let oracle = landauer_oracle(lambda.parse().unwrap(), 0.1, 0.05);
        ensure(close(f(&s["landauer"]), oracle, 1e-6), format!("Landauer {} vs oracle {oracle}", s["landauer"]))?;
        notes.push(format!("N={sites} λ={lambda}: {ratio:.5} ({:.0} s)", t.as_secs_f64()));
    }
    let t0 = 0.64;
    let (r, _) = report(&["landauer", "--constant-transmission", "0.64", "--Tl", "0.1", "--Tr", "0.05"])?;
    let cft = PI * t0 / 24.0 * (0.01 - 0.0025);
    let constant = f(&r["landauer"]) / cft;
    ensure((constant - 1.0).abs() <= 0.05, format!("constant-𝒯 Landauer / CFT = {constant}"))?;
    notes.push(format!("constant 𝒯: {constant:.6}"));
    let (r, _) = report(&["lattice-run", "--sites", "400", "--scaling", "0.02,0.04,0.06,0.08", "--ratio", "0.5"])?;
    let p = f(&r["fit"]["exponent"]);
    ensure((p - 2.0).abs() <= 0.1, format!("exponent {p}"))?;
    notes.push(format!("T² exponent {p:.4}"));
    Ok(notes.join("; "))
}

fn limits() -> Verdict {
    let (r, _) = report(&["current", "--alpha", "3/5,4/5", "--Tl", "7/10", "--Tr", "7/10"])?;
    ensure(r["J_E_exact"] == "0" && r["symbolic"]["equilibrium_vanishes"] == true, "symbolic equilibrium current")?;
    let (r, _) = report(&["current", "--alpha", "pi/2", "--Tl", "1", "--Tr", "0"])?;
    ensure(r["J_E_exact"] == "0", "α = π/2 current")?;
    let (r, _) = report(&["su2k-current", "--k-max", "3", "--rr-bar", "0", "--Tl", "1", "--Tr", "0"])?;
    ensure(r["levels"].as_array().is_some_and(|l| l.iter().all(|x| f(&x["value"]) == 0.0)), "rr̄ = 0 su(2)_k current")?;
    let (r, _) = report(&["landauer", "--lambda", "0.7", "--Tl", "0.08", "--Tr", "0.08"])?;
    ensure(f(&r["landauer"]) == 0.0, "Landauer at equilibrium")?;
    let mut worst = 0.0f64;
    for (lambda, tl, tr) in [("0.7", "0.08", "0.08"), ("0", "0.1", "0.05")] {
        let (r, _) = report(&["lattice-run", "--sites", "400", "--lambda", lambda, "--Tl", tl, "--Tr", tr])?;
        let m = f(&r["summary"]["plateau_mean"]).abs();
        ensure(m < 1e-10, format!("λ = {lambda}, T = ({tl}, {tr}): plateau {m:e}"))?;
        worst = worst.max(m);
    }
    Ok(format!("exact zeros symbolically; lattice |J| ≤ {worst:.1e} at equilibrium and λ = 0"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("central charges", central_charges),
        ("intertwining", intertwining),
        ("automorphism constraints", automorphism),
        ("free-fermion current", fermion_current_check),
        ("entropy production", entropy_check),
        ("global continuity", continuity_check),
        ("reflection phases", reflection_phases),
        ("su(2)_k", su2k),
        ("lattice oracle", lattice),
        ("equilibrium and disconnection", limits),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
