//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use num_rational::BigRational;
use serde_json::Value;

use smtpd::hashing::oracle::{inner_pair_counts, tree_pair_counts};
use smtpd::hashing::HashParams;

struct Run {
    args: Vec<String>,
    code: Option<i32>,
    stdout: Vec<u8>,
}

impl Run {
    fn last(&self) -> Value {
        let text = String::from_utf8_lossy(&self.stdout);
        text.lines().last().and_then(|l| serde_json::from_str(l).ok()).unwrap_or(Value::Null)
    }
}

#[derive(Default)]
struct Harness {
    runs: Vec<Run>,
    failed: usize,
}

impl Harness {
    fn smtpd(&mut self, args: &str) -> usize {
        let mut args: Vec<String> = args.split_whitespace().map(String::from).collect();
        args.push("--no-timestamp".into());
        let run = exec(&args);
        self.runs.push(run);
        self.runs.len() - 1
    }

    fn report(&mut self, name: &str, ok: bool, detail: String, started: Instant) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} {name}: {detail} [{:.1}s]", started.elapsed().as_secs_f64());
        self.failed += usize::from(!ok);
    }
}

fn exec(args: &[String]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_smtpd"))
        .args(args)
        .env_remove("SMTPD_SEED")
        .output()
        .expect("binary runs");
    Run {
        args: args.to_vec(),
        code: out.status.code(),
        stdout: out.stdout,
    }
}

fn exact(v: &Value) -> Option<BigRational> {
    let num = v["num"].as_i64()?;
    let den = v["den"].as_i64()?;
    Some(BigRational::new(num.into(), den.into()))
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn privacy(h: &mut Harness) {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for l in [1, 2] {
        for strategy in ["eavesdrop", "block", "substitute"] {
            let i = h.smtpd(&format!("privacy --n 2 --t 1 --m 2 --l {l} --adversary {strategy}"));
            let r = h.runs[i].last();
            let zero = exact(&r["max_distance"]) == Some(ratio(0, 1));
            ok &= zero && h.runs[i].code == Some(0);
            details.push(format!("l={l} {strategy}={}", r["max_distance_f64"]));
        }
    }
    h.report("perfect privacy (exhaustive, n=2 t=1 m=2)", ok, details.join(" "), started);
}

fn reliability(h: &mut Harness, n: usize, t: usize, l: usize, m: usize, bound: f64) {
    let started = Instant::now();
    let i = h.smtpd(&format!(
        "reliability --n {n} --t {t} --l {l} --m {m} --adversary substitute --trials 100000 --seed 7 --summary-only"
    ));
    let r = h.runs[i].last();
    let ci_high = r["ci_high"].as_f64().unwrap_or(f64::INFINITY);
    let ok = h.runs[i].code == Some(0) && r["bound"].as_f64() == Some(bound) && ci_high <= bound;
    h.report(
        &format!("reliability bound (n={n} t={t} l={l} m={m}, substitute, 1e5 trials)"),
        ok,
        format!("failure_rate={} wilson_upper={ci_high:.5} bound={bound}", r["failure_rate"]),
        started,
    );
}

fn honest(h: &mut Harness) {
    let started = Instant::now();
    let i = h.smtpd("reliability --n 4 --t 3 --l 8 --m 64 --adversary passive --trials 10000 --seed 7 --summary-only");
    let r = h.runs[i].last();
    let ok = h.runs[i].code == Some(0) && r["trials"] == 10000 && r["failures"] == 0;
    h.report("honest executions (1e4, zero failures)", ok, format!("failures={}", r["failures"]), started);
}

fn hash_bounds(h: &mut Harness) {
    let started = Instant::now();
    let inner = HashParams::derive(2, 1)
        .and_then(|p| {
            assert_eq!(p.block_bits(), 2);
            inner_pair_counts(&p)
        })
        .map(|c| c.stats());
    let tree = HashParams::derive(8, 1).and_then(|p| tree_pair_counts(&p)).map(|c| c.stats());
    let (ok, detail) = match (inner, tree) {
        (Ok(i), Ok(t)) => (
            i.min_pair == ratio(1, 16)
                && i.max_pair == ratio(1, 16)
                && t.max_pair <= ratio(1, 2)
                && t.max_masked_collision <= ratio(1, 1),
            format!(
                "inner s=2 pair in [{}, {}]; tree m=8 l=1 max_pair={} max_masked={}",
                i.min_pair, i.max_pair, t.max_pair, t.max_masked_collision
            ),
        ),
        (i, t) => (false, format!("{:?} {:?}", i.err(), t.err())),
    };
    h.report("hash family bounds (exhaustive)", ok, detail, started);
}

fn coupling(h: &mut Harness) {
    let started = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (demo, toy) in [("swap", "otp2"), ("oneway", "xor2")] {
        let i = h.smtpd(&format!("attack --demo {demo} --toy {toy}"));
        let r = h.runs[i].last();
        let (g, f, s) = (exact(&r["p_guess"]), exact(&r["p_fail"]), exact(&r["p_success"]));
        let holds = match (&g, &f, &s) {
            (Some(g), Some(f), Some(s)) => g >= s && g + f >= ratio(3, 4),
            _ => false,
        };
        ok &= holds && h.runs[i].code == Some(0) && r["bijection_verified"] == true;
        details.push(format!(
            "{demo}/{toy}: p_guess={} p_success={} p_fail={}",
            fmt(&g),
            fmt(&s),
            fmt(&f)
        ));
    }
    h.report("swap coupling (exact)", ok, details.join("; "), started);
}

fn impersonation(h: &mut Harness) {
    let started = Instant::now();
    let i = h.smtpd("attack --demo impersonate-r --toy relay3");
    let r = h.runs[i].last();
    let (s, f) = (exact(&r["p_success_given_distinct"]), exact(&r["p_fail_given_distinct"]));
    let ok = h.runs[i].code == Some(0) && matches!((&s, &f), (Some(s), Some(f)) if s <= f);
    h.report(
        "receiver impersonation (exact, 3 rounds)",
        ok,
        format!("P[success|distinct]={} P[fail|distinct]={}", fmt(&s), fmt(&f)),
        started,
    );
}

fn fmt(x: &Option<BigRational>) -> String {
    x.as_ref().map_or("?".into(), |x| x.to_string())
}

fn rate(h: &mut Harness) {
    let started = Instant::now();
    let i = h.smtpd("rate --n 30 --kappa 30 --m 1048576");
    let r = h.runs[i].last();
    let get = |k: &str| r[k].as_u64().unwrap_or(0);
    let (s, d, l, n, m) = (get("s"), get("d"), get("l"), get("n"), get("m"));
    let closed = (4 * s * d + l + 2) * n + m;
    let public = get("public_bits");
    let public_rate = r["public_rate"].as_f64().unwrap_or(f64::INFINITY);
    let baseline = r["baseline_log2"].as_f64().unwrap_or(0.0);
    let ok = l == 36
        && public == closed
        && (public as f64) < 1.2 * (1u64 << 20) as f64
        && public_rate < 2.0
        && baseline > 24.8;
    h.report(
        "rate accounting (n=30 kappa=30 m=2^20)",
        ok,
        format!("public_bits={public} closed_form={closed} public_rate={public_rate:.4} baseline_log2={baseline:.3}"),
        started,
    );
}

fn determinism(h: &mut Harness) {
    let started = Instant::now();
    let mut differing = Vec::new();
    for run in &h.runs {
        let again = exec(&run.args);
        if again.stdout != run.stdout || again.code != run.code || run.stdout.is_empty() {
            differing.push(run.args[..2].join(" "));
        }
    }
    let detail = if differing.is_empty() {
        format!("{} commands byte-identical on rerun", h.runs.len())
    } else {
        format!("differing: {}", differing.join(", "))
    };
    h.report("determinism", differing.is_empty(), detail, started);
}

fn main() {
    let mut h = Harness::default();
    privacy(&mut h);
    reliability(&mut h, 4, 3, 8, 64, 3.0 / 128.0);
    reliability(&mut h, 3, 2, 6, 32, 0.0625);
    honest(&mut h);
    hash_bounds(&mut h);
    coupling(&mut h);
    impersonation(&mut h);
    rate(&mut h);
    determinism(&mut h);
    println!("{} criteria failed", h.failed);
    if h.failed > 0 {
        std::process::exit(1);
    }
}
