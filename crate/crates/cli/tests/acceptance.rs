//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use bcbounds_cli::output::Table;
use bcbounds_cli::{execute, Cli, RunReport};
use bcbounds_core::bounds::{
    bssc, conjecture_gap_search, marton_weighted_max, outer_sum_rate, SearchConfig, LEMMA3_RANGES,
};
use bcbounds_core::constructions::{atom_functionals, reduce_support, Side};
use bcbounds_core::envelope::{
    f_skew, g_function, solve_eta0, upper_concave_envelope, GridFunction,
};
use bcbounds_core::probcore::{BroadcastChannel, Pmf};
use bcbounds_core::sampling::{random_channel, rng_for, uniform_simplex};
use clap::Parser;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn command(args: &[&str]) -> (RunReport, Duration) {
    let cli = Cli::try_parse_from(std::iter::once("bcbounds").chain(args.iter().copied()))
        .expect("valid flags");
    let (r, d) = timed(|| execute(&cli.command));
    (r.expect("command runs"), d)
}

fn row<'a>(t: &'a Table, kind: &str) -> &'a [String] {
    &t.rows
        .iter()
        .find(|r| r[0] == kind)
        .unwrap_or_else(|| panic!("no {kind} row"))[..]
}

fn cell(t: &Table, kind: &str, column: &str) -> f64 {
    let i = t
        .header
        .iter()
        .position(|h| h == column)
        .expect("column exists");
    row(t, kind)[i].parse().expect("numeric cell")
}

fn eta0_tangency() -> Outcome {
    let (eta0, d) = timed(|| solve_eta0().unwrap());
    Outcome {
        pass: (eta0 - 0.2).abs() <= 1e-9 && d < Duration::from_secs(1),
        detail: format!(
            "eta0 = {eta0:.12}, |eta0 - 0.2| = {:.2e}, {d:.2?}",
            (eta0 - 0.2).abs()
        ),
    }
}

fn envelope_is_g() -> Outcome {
    let n = 4097;
    let f = GridFunction::sample(n, |e| f_skew(e).unwrap());
    let env = upper_concave_envelope(&f);
    let step = f.step();
    let mut sup = 0.0f64;
    let mut stray = Vec::new();
    for i in 0..n {
        let eta = f.eta(i);
        sup = sup.max((env.values().values()[i] - g_function(eta).unwrap()).abs());
        let touch = env.contact()[i];
        // the chord from eta0 ends on the graph at eta = 1
        let expected = eta <= 0.2 || i == n - 1;
        if touch != expected && (eta - 0.2).abs() > step {
            stray.push(eta);
        }
    }
    Outcome {
        pass: sup <= 2e-4 && stray.is_empty(),
        detail: format!(
            "sup |env - g| = {sup:.3e}, contact points off {{eta <= 0.2}} u {{1}}: {}",
            stray.len()
        ),
    }
}

fn split_sum_rate(inner: &(RunReport, Duration)) -> Outcome {
    let t = inner.0.table("inner").unwrap();
    let split = cell(t, "split_sum_rate", "value_bits");
    let best = cell(t, "sum_rate", "value_bits");
    Outcome {
        pass: (split - 0.3616).abs() <= 5e-4 && inner.1 < Duration::from_secs(60),
        detail: format!(
            "split benchmark {split:.9}, best found {best:.9}, {:.2?}",
            inner.1
        ),
    }
}

fn outer_sum(outer: &(RunReport, Duration)) -> Outcome {
    let v = cell(outer.0.table("outer").unwrap(), "sum_rate", "value_bits");
    Outcome {
        pass: (v - 0.3711).abs() <= 5e-4 && outer.1 < Duration::from_secs(60),
        detail: format!(
            "outer sum rate {v:.9}, |v - 0.3711| = {:.2e}, {:.2?}",
            (v - 0.3711).abs(),
            outer.1
        ),
    }
}

fn strict_gap(inner: &RunReport, outer: &RunReport) -> Outcome {
    let o = cell(outer.table("outer").unwrap(), "sum_rate", "value_bits");
    let i = cell(inner.table("inner").unwrap(), "sum_rate", "value_bits");
    Outcome {
        pass: o - i >= 0.008,
        detail: format!("outer {o:.9} - inner {i:.9} = {:.6}", o - i),
    }
}

fn construction_identities() -> Outcome {
    let (r, d) = command(&[
        "verify-constructions",
        "--trials",
        "1000",
        "--seed",
        "0",
        "--max-card",
        "4",
    ]);
    let t = r.table("constructions").unwrap();
    let ind = cell(t, "independence_identities", "value");
    let det = cell(t, "deterministic_identities", "value");
    let worst = ind.max(det);
    Outcome {
        pass: worst <= 1e-9 && !r.failed && d < Duration::from_secs(30),
        detail: format!("max residual over eight identities {worst:.3e}, {d:.2?}"),
    }
}

fn caratheodory() -> Outcome {
    let mut rng = rng_for(7, 0);
    let (mut worst, mut atoms) = (0.0f64, 0usize);
    for trial in 0..200 {
        let ch = random_channel(&mut rng, 2, 2, 3);
        let side = if trial % 2 == 0 { Side::U } else { Side::V };
        let w = Pmf::new(uniform_simplex(&mut rng, 8)).unwrap();
        let conds: Vec<Pmf> = (0..8)
            .map(|_| Pmf::new(uniform_simplex(&mut rng, 2)).unwrap())
            .collect();
        let red = reduce_support(&w, &conds, &ch, side).unwrap();
        let totals = |ws: &[f64], idx: &mut dyn Iterator<Item = usize>| {
            let mut t = [0.0; 3];
            for (&wk, i) in ws.iter().zip(idx) {
                let (fa, fb) = atom_functionals(&conds[i], &ch, side);
                t[0] += wk * conds[i].weights()[0];
                t[1] += wk * fa;
                t[2] += wk * fb;
            }
            t
        };
        let before = totals(w.weights(), &mut (0..8));
        let after = totals(&red.weights, &mut red.kept.iter().copied());
        for k in 0..3 {
            worst = worst.max((before[k] - after[k]).abs());
        }
        atoms = atoms.max(red.kept.len());
    }
    Outcome {
        pass: worst <= 1e-9 && atoms <= 4,
        detail: format!(
            "largest reduced support {atoms}, max drift of p(X) and functionals {worst:.3e}"
        ),
    }
}

fn conjecture_search() -> Outcome {
    let ch = bssc(0.5).unwrap();
    let cfg = SearchConfig {
        restarts: 100_000,
        iterations: 10,
        polish: 64,
        card_u: Some(4),
        card_v: Some(4),
        ..Default::default()
    };
    let (g, d) = timed(|| conjecture_gap_search(&ch, &cfg, None).unwrap());
    if g.is_counterexample(1e-6) {
        println!(
            "    counterexample witness p(u,v,x) = {:?}",
            g.witness.table()
        );
    }
    let restricted = SearchConfig {
        restarts: 2000,
        ..cfg.clone()
    };
    let lemma = LEMMA3_RANGES
        .iter()
        .map(|&r| {
            conjecture_gap_search(&ch, &restricted, Some(r))
                .unwrap()
                .gap
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: g.gap <= 1e-6 && lemma <= 1e-6,
        detail: format!(
            "max gap {:.3e} over 1e5 restarts at |U| = |V| = 4 ({d:.2?}); restricted max gap {lemma:.3e}",
            g.gap
        ),
    }
}

fn ordering() -> Outcome {
    let cfg = SearchConfig {
        restarts: 16,
        ..Default::default()
    };
    let mut bad = Vec::new();
    let mut margin = f64::INFINITY;
    for s in 0..50u64 {
        let mut rng = rng_for(1234, s);
        let ch: BroadcastChannel =
            random_channel(&mut rng, 2, 2 + (s as usize % 2), 2 + (s as usize / 2 % 2));
        let inner = 2.0 * marton_weighted_max(&ch, 0.5, &cfg).unwrap().value;
        let outer = outer_sum_rate(&ch, &cfg).unwrap().value;
        margin = margin.min(outer - inner);
        if inner > outer + 1e-6 || inner > 1.0 + 1e-12 || outer > 1.0 + 1e-12 {
            bad.push(s);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("violations {bad:?}, smallest outer - inner {margin:.3e}"),
    }
}

fn run_to(dir: &Path, tag: &str, args: &[&str]) -> Vec<(String, Vec<u8>)> {
    let out = dir.join(tag);
    let out_s = out.to_str().unwrap().to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", &out_s]);
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = bcbounds_cli::run(
        std::iter::once("bcbounds").chain(full.iter().copied()),
        &mut so,
        &mut se,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&se));
    let mut files = Vec::new();
    if out.is_dir() {
        let mut names: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        for p in names {
            files.push((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            ));
        }
    } else {
        files.push((tag.to_string(), std::fs::read(&out).unwrap()));
    }
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 7] = [
        &["info", "--channel", "bssc:0.5"],
        &["outer", "--channel", "bssc:0.5", "--lambdas", "5"],
        &[
            "outer",
            "--channel",
            "bssc:0.5",
            "--lambdas",
            "3",
            "--format",
            "json",
        ],
        &[
            "inner",
            "--channel",
            "bssc:0.5",
            "--lambdas",
            "3",
            "--restarts",
            "8",
            "--seed",
            "5",
        ],
        &[
            "inner",
            "--channel",
            "bssc:0.5",
            "--lambdas",
            "1",
            "--restarts",
            "4",
            "--format",
            "json",
        ],
        &[
            "bssc-suite",
            "--grid",
            "513",
            "--restarts",
            "8",
            "--seed",
            "3",
        ],
        &["verify-constructions", "--trials", "200", "--seed", "9"],
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{k}"), args);
        let b = run_to(dir.path(), &format!("b{k}"), args);
        files += a.len();
        if a.iter().map(|f| &f.1).ne(b.iter().map(|f| &f.1)) {
            differing.push(args.join(" "));
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: format!("{files} output files compared, differing runs {differing:?}"),
    }
}

fn main() {
    let inner = command(&["inner", "--channel", "bssc:0.5"]);
    let outer = command(&["outer", "--channel", "bssc:0.5"]);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 eta0 tangency", eta0_tangency()),
        ("2 envelope equals g", envelope_is_g()),
        ("3 split sum rate via inner", split_sum_rate(&inner)),
        ("4 outer sum rate via outer", outer_sum(&outer)),
        ("5 outer minus inner", strict_gap(&inner.0, &outer.0)),
        ("6 construction identities", construction_identities()),
        ("7 support reduction", caratheodory()),
        ("8 conjecture search", conjecture_search()),
        ("9 ordering on random channels", ordering()),
        ("10 byte-identical reruns", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
