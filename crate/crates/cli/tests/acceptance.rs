//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance and time budget. Runs without the libtest harness so the lines
//! are always printed; exits non-zero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gauge_lab::gallery::{half_harmonic, harmonic_blocks, initial_segments};
use gauge_lab::integrand::{IntegrandFn, PiecewisePoly};
use gauge_lab::integrators::{lower_norm_integral, mcshane_integrate, McShaneOptions, Status};
use gauge_lab::partition::{
    cousin_partition, is_partition, is_subordinate, Flavor, TagStrategy, TaggedPartition,
};
use gauge_lab::region::SetOp;
use gauge_lab::report::parse_exact;
use gauge_lab::sampling;
use gauge_lab::values::{NormKind, ValueSpace, VectorValue};
use gauge_lab::{Dyadic, Gauge, Interval, Rational, Region, Scalar};
use rand::Rng;
use serde_json::Value;

struct Run {
    code: i32,
    json: Value,
    elapsed: Duration,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gauge-lab"))
        .args(args)
        .arg("--deterministic")
        .env_remove("GIL_SEED")
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    Run {
        code: out.status.code().unwrap_or(-1),
        json: serde_json::from_slice(&out.stdout).unwrap_or(Value::Null),
        elapsed,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn exact(v: &Value) -> Rational {
    parse_exact(
        v.as_str()
            .unwrap_or_else(|| panic!("not an exact number: {v}")),
    )
    .expect("exact number")
}

fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn abs(x: Rational) -> Rational {
    if x < q(0, 1) {
        -x
    } else {
        x
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// `Ok(detail)` or `Err(detail)`.
type Verdict = Result<String, String>;

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn all(parts: Vec<Verdict>) -> Verdict {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("✗ {e}")))
        .collect::<Vec<_>>()
        .join("; ");
    check(ok, text)
}

fn block_values() -> Verdict {
    let r = cli(&[
        "integrate",
        "--fn",
        "3g",
        "--R",
        "16",
        "--tol",
        "2^-12",
        "--seed",
        "7",
    ]);
    if r.code != 0 {
        return Err(format!("exit {} {}", r.code, r.stderr));
    }
    let data = r.json["result"]["estimate"]["value"]["data"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let tol = q(1, 1 << 12);
    let worst = data
        .iter()
        .enumerate()
        .map(|(n, v)| abs(exact(v) - q(1, 2 * (n as i64 + 1))))
        .max()
        .unwrap_or_else(|| q(1, 1));
    check(
        data.len() == 16 && worst <= tol && r.elapsed < Duration::from_secs(10),
        format!(
            "16 coordinates, max error {:.3e} ≤ 2^-12, {}",
            worst.to_f64(),
            secs(r.elapsed)
        ),
    )
}

fn lower_norm_divergence() -> Verdict {
    let mut prev = q(0, 1);
    let mut monotone = true;
    let mut below_harmonic = true;
    for n in 1..=55 {
        let v = lower_norm_integral(
            &harmonic_blocks::<Rational>(n).expect("valid R"),
            n as u32 + 1,
        );
        monotone &= v > prev;
        below_harmonic &= v <= half_harmonic::<Rational>(n);
        prev = v;
    }
    check(
        monotone && below_harmonic && prev > q(2, 1),
        format!(
            "lower ∫‖φ‖ at N=55 is {:.4} > 2, monotone, ≤ H_N/2",
            prev.to_f64()
        ),
    )
}

fn pettis_consistency() -> Verdict {
    let mut parts = Vec::new();
    for f in [
        &["--fn", "3f"][..],
        &["--fn", "3g", "--R", "8"],
        &["--fn", "3g", "--R", "16"],
        &["--fn", "poly:1,-3/2^1,3/2^2"],
        &["--fn", "identity"],
    ] {
        let args = [
            &[
                "pettis",
                "--functionals",
                "20",
                "--regions",
                "20",
                "--tol",
                "2^-10",
                "--seed",
                "1",
            ][..],
            f,
        ]
        .concat();
        let r = cli(&args);
        let res = &r.json["result"];
        let rows = res["rows"].as_array().map_or(0, Vec::len);
        let max = res.get("max_residual").map(exact);
        let ok = r.code == 0
            && rows >= 400
            && max.as_ref().is_some_and(|m| *m <= q(1, 1024))
            && r.elapsed < Duration::from_secs(30);
        parts.push(check(
            ok,
            format!(
                "{} max residual {:.2e} over {rows} pairs in {}",
                f[1],
                max.map_or(f64::NAN, |m| m.to_f64()),
                secs(r.elapsed)
            ),
        ));
    }
    all(parts)
}

fn series_and_modulus() -> Verdict {
    let mut parts = Vec::new();
    let r = cli(&["series", "--fn", "3g", "--R", "8", "--tol", "2^-10"]);
    parts.push(check(
        r.code == 0 && r.json["result"]["tails_match_formula"] == true,
        format!("3g tails match the l2 formula (exit {})", r.code),
    ));
    for f in ["3g", "3f", "identity", "poly:1,-3/2^1,3/2^2"] {
        let r = cli(&["abscont", "--fn", f, "--tol", "2^-10", "--seed", "2"]);
        let res = &r.json["result"];
        parts.push(check(
            r.code == 0 && res["table"]["monotone"] == true && res["within_bound"] == true,
            format!(
                "{f} modulus nondecreasing and ≤ Mη+2τ ({})",
                secs(r.elapsed)
            ),
        ));
    }
    all(parts)
}

fn cauchy_violation() -> Verdict {
    let mut wins = 0;
    let mut parts = Vec::new();
    for seed in ["11", "12", "13"] {
        let r = cli(&[
            "gallery",
            "3e",
            "--L",
            "4",
            "--R",
            "64",
            "--gauge",
            "const:1/5",
            "--seed",
            seed,
        ]);
        let w = &r.json["result"]["witness"];
        let in_time = r.elapsed < Duration::from_secs(60);
        if r.code == 0 && in_time {
            let (k, m) = (w["k"].as_i64().unwrap_or(0), w["m"].as_i64().unwrap_or(0));
            let gap = exact(&w["gap"]);
            let ok = w["p1_subordinate"] == true
                && w["p2_subordinate"] == true
                && q(m, k) >= q(4, 5) - q(1, k)
                && gap >= q(m - 1, k);
            wins += ok as usize;
            parts.push(format!(
                "seed {seed}: k={k} m={m} gap={:.3} ({})",
                gap.to_f64(),
                secs(r.elapsed)
            ));
        } else {
            let trace = r.stderr.lines().next().unwrap_or("").to_string();
            parts.push(format!(
                "seed {seed}: exit {} {trace} ({})",
                r.code,
                secs(r.elapsed)
            ));
        }
    }
    check(
        wins >= 2,
        format!("{wins}/3 certified; {}", parts.join("; ")),
    )
}

fn initial_segment_example() -> Verdict {
    let r = cli(&["gallery", "3f", "--seed", "3"]);
    let res = &r.json["result"];
    let lower = res["bochner"].get("lower_bound").map(exact);
    all(vec![
        check(
            res["riemann_within_bound"] == true,
            "Riemann error ≤ 2δ+grid for δ ∈ {2^-4,2^-6,2^-8}".into(),
        ),
        check(
            res["bochner"]["verdict"] == "not-approximable"
                && lower.as_ref().is_some_and(|l| *l >= q(49, 100)),
            format!(
                "not Bochner-approximable, bound {:.4}",
                lower.map_or(f64::NAN, |l| l.to_f64())
            ),
        ),
        check(
            res.get("constant_gauge_oscillation")
                .map(exact)
                .is_some_and(|o| o <= q(1, 64)),
            format!(
                "oscillation {} ≤ 2^-6 at δ=2^-8",
                res["constant_gauge_oscillation"]
            ),
        ),
        check(r.code == 0, format!("exit {}", r.code)),
    ])
}

fn empirical_means() -> Verdict {
    let mut parts = Vec::new();
    for f in [&["--fn", "identity"][..], &["--fn", "3g", "--R", "8"]] {
        let args = [
            &["lln", "--n", "10000", "--batches", "100", "--seed", "2024"][..],
            f,
        ]
        .concat();
        let r = cli(&args);
        let res = &r.json["result"];
        let within = res["batches_within_3_sigma"].as_u64().unwrap_or(0);
        let pooled = res["pooled_error"].as_f64().unwrap_or(f64::NAN);
        parts.push(check(
            r.code == 0 && within >= 90 && pooled <= 1e-2,
            format!(
                "{}: {within}/100 batches within 3σ/√n, pooled error {pooled:.1e}",
                f[1]
            ),
        ));
    }
    all(parts)
}

fn stability_estimates() -> Verdict {
    let r = cli(&[
        "stability",
        "--fn",
        "identity",
        "--m",
        "1",
        "--n",
        "1",
        "--alpha",
        "0.3",
        "--beta",
        "0.7",
        "--samples",
        "100000",
        "--seed",
        "8",
    ]);
    let est = r.json["result"]["z"]["estimate"]
        .as_f64()
        .unwrap_or(f64::NAN);
    let p = cli(&[
        "stability",
        "--fn",
        "pairsum",
        "--alpha",
        "0.3",
        "--beta",
        "0.7",
        "--samples",
        "100000",
        "--seed",
        "8",
    ]);
    let samples = p.json["result"]["samples"].as_array().map_or(0, Vec::len);
    all(vec![
        check(
            (est - 0.09).abs() <= 0.01,
            format!("identity Z estimate {est:.4} (0.09 ± 0.01)"),
        ),
        check(
            p.code == 0 && samples == 5,
            format!(
                "pair-sum bound {:.4} holds for {samples} B-samples",
                p.json["result"]["bound"].as_f64().unwrap_or(f64::NAN)
            ),
        ),
    ])
}

fn vitali_harness() -> Verdict {
    let good = cli(&["vitali", "--fn", "3g", "--tol", "2^-10"]);
    let g = &good.json["result"]["report"];
    let bad = cli(&["vitali", "--fn", "counter", "--tol", "2^-10"]);
    let b = &bad.json["result"]["report"];
    let flagged = b["h2"] == false || b["c_holds"] == false;
    all(vec![
        check(
            good.code == 0
                && g["h1"] == true
                && g["h2"] == true
                && g["c_holds"] == true
                && good.elapsed < Duration::from_secs(30),
            format!("truncations pass H1, H2, C ({})", secs(good.elapsed)),
        ),
        check(
            bad.code == 1
                && flagged
                && !b["violations"].as_array().is_none_or(Vec::is_empty)
                && bad.elapsed < Duration::from_secs(30),
            format!(
                "counter-sequence flagged: {}",
                b["violations"]
                    .as_array()
                    .and_then(|v| v.first())
                    .unwrap_or(&Value::Null)
            ),
        ),
    ])
}

fn norm_domination() -> Verdict {
    let sp = ValueSpace::finite(1, NormKind::L1);
    let c = |n: i64, d: i64| VectorValue::from_data(&sp, vec![q(n, d)]).unwrap();
    let family: Vec<IntegrandFn<Rational>> = vec![
        Arc::new(harmonic_blocks::<Rational>(8).unwrap()),
        Arc::new(harmonic_blocks::<Rational>(16).unwrap()),
        Arc::new(initial_segments::<Rational>(8).unwrap()),
        Arc::new(PiecewisePoly::polynomial(&sp, vec![c(1, 1), c(-3, 1), c(3, 2)]).unwrap()),
    ];
    let slack = q(1, 1024);
    let opts = McShaneOptions {
        tol: Dyadic::pow2_neg(10),
        ..McShaneOptions::default()
    };
    let mut parts = Vec::new();
    for phi in &family {
        let est = mcshane_integrate(phi.as_ref(), &opts).expect("integrates");
        if est.status != Status::Converged {
            parts.push(Ok(format!("{}: not converged, skipped", phi.label())));
            continue;
        }
        let lhs = est.value.norm().lo;
        let rhs = lower_norm_integral(phi.as_ref(), 12) + est.oscillation.clone() + slack.clone();
        parts.push(check(
            lhs <= rhs,
            format!("{}: {:.4} ≤ {:.4}", phi.label(), lhs.to_f64(), rhs.to_f64()),
        ));
    }
    all(parts)
}

const FUZZ_DEPTH: u32 = 10;

fn fuzz_point<R: Rng>(rng: &mut R) -> Dyadic {
    Dyadic::ratio(rng.random_range(0..=1i64 << FUZZ_DEPTH), FUZZ_DEPTH)
}

fn fuzz_region<R: Rng>(rng: &mut R) -> Region {
    let n = rng.random_range(0..6);
    Region::normalize(
        (0..n)
            .map(|_| {
                let (a, b) = (fuzz_point(rng), fuzz_point(rng));
                Interval::new(a.clone().min(b.clone()), a.max(b)).unwrap()
            })
            .collect(),
    )
}

fn infrastructure_fuzz() -> Verdict {
    let mut rng = sampling::stream(0xacce, 11);
    let (mut incl_exc, mut subordinate, mut round_trip) = (0, 0, 0);
    for _ in 0..1000 {
        let (a, b) = (fuzz_region(&mut rng), fuzz_region(&mut rng));
        let u = a.combine(&b, SetOp::Union).measure();
        let i = a.combine(&b, SetOp::Intersect).measure();
        incl_exc += (u + i == a.measure() + b.measure()) as usize;

        let breaks: std::collections::BTreeSet<i64> = (0..rng.random_range(0..5))
            .map(|_| rng.random_range(1..1i64 << FUZZ_DEPTH))
            .collect();
        let values = (0..=breaks.len())
            .map(|_| Dyadic::pow2_neg(rng.random_range(1..9)).to_rational())
            .collect();
        let g = Gauge::piecewise(
            breaks
                .into_iter()
                .map(|j| Dyadic::ratio(j, FUZZ_DEPTH))
                .collect(),
            values,
        )
        .unwrap();
        let flavor = if rng.random_bool(0.5) {
            Flavor::McShane
        } else {
            Flavor::Henstock
        };
        let p = cousin_partition(&g, flavor, TagStrategy::Sampled(rng.random()), 40).unwrap();
        subordinate += (is_partition(&p) && is_subordinate(&p, &g).unwrap()) as usize;
        let json = p.to_json();
        let back = TaggedPartition::from_json(&json, flavor).unwrap();
        round_trip += (back == p && back.to_json() == json) as usize;
    }
    check(
        incl_exc == 1000 && subordinate == 1000 && round_trip == 1000,
        format!("inclusion–exclusion {incl_exc}/1000, subordinate {subordinate}/1000, round-trip {round_trip}/1000"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("block values of the harmonic ℓ² example", block_values),
        ("lower norm integral diverges", lower_norm_divergence),
        ("Pettis consistency", pettis_consistency),
        (
            "interval series and absolute continuity",
            series_and_modulus,
        ),
        (
            "Cauchy violation for the jump-function example",
            cauchy_violation,
        ),
        ("initial-segment example", initial_segment_example),
        ("empirical means", empirical_means),
        ("stability estimates", stability_estimates),
        ("Vitali harness", vitali_harness),
        (
            "norm domination by the lower norm integral",
            norm_domination,
        ),
        ("infrastructure fuzz", infrastructure_fuzz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let t = secs(start.elapsed());
        match verdict {
            Ok(d) => println!("PASS criterion {}: {name} — {d} [{t}]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {name} — {d} [{t}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
