//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p ck --test acceptance`.

use ck::fullcp::{kappa, transducer};
use ck::grid::{make_uniform_grid, Grid, Region, Sample};
use ck::harness::{render, run, sample_alpha, ExperimentConfig, Format, RunReport};
use ck::imprecise::{cred, ihdr_contour, lower_prob, upper_prob, PossibilityContour};
use ck::scores::{check_permutation_invariance_exhaustive, EmbeddingNet, Layer, ScoreFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(f)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn coverage() -> Outcome {
    let cfg = config("coverage.json");
    let (rep, took) = timed(|| single_threaded(|| run(&cfg)));
    let rep = rep.expect("coverage run");
    let lb = num(&rep.summary, "wilson_lower_bound");
    let cov = num(&rep.summary, "empirical_coverage");
    let pass = lb >= 0.87 - 0.02 && took <= Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "coverage {cov:.4}, Wilson 99% lower bound {lb:.4} (need >= 0.85), {:.1}s single-threaded (limit 60s)",
            took.as_secs_f64()
        ),
    )
}

fn diagram() -> Outcome {
    let (res, took) = timed(|| {
        let mut parts = Vec::new();
        for name in ["diagram_mean_abs.json", "diagram_prototype.json"] {
            let rep = run(&config(name)).expect("diagram run");
            parts.push((name, num(&rep.summary, "equal"), num(&rep.summary, "instances")));
        }
        let mut bf = config("diagram_mean_abs.json");
        bf.trials = 100;
        bf.seed = 7;
        bf.options.grid_range = Some([4, 12]);
        let rep = run(&bf).expect("bruteforce run");
        (parts, num(&rep.summary, "bruteforce_equal"), num(&rep.summary, "bruteforce_compared"))
    });
    let (parts, bf_eq, bf_n) = res;
    let pass = parts.iter().all(|p| p.1 == 200.0 && p.2 == 200.0)
        && bf_eq == 100.0
        && bf_n == 100.0
        && took <= Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "mean-distance {}/{}, prototype {}/{}, brute-force {}/{} on grids <= 12, {:.1}s (limit 120s)",
            parts[0].1,
            parts[0].2,
            parts[1].1,
            parts[1].2,
            bf_eq,
            bf_n,
            took.as_secs_f64()
        ),
    )
}

fn triangle() -> Outcome {
    let rep = run(&config("bayes_triangle.json")).expect("triangle run");
    let agree = num(&rep.summary, "agree");
    let total = num(&rep.summary, "instances");
    outcome(
        agree == 100.0 && total == 100.0,
        format!("quant = kappa = ihdr in {agree}/{total} instances"),
    )
}

fn ihdr_functor() -> Outcome {
    let rep = run(&config("ihdr_oracle.json")).expect("ihdr run");
    let s = &rep.summary;
    let pass = num(s, "pairs_nested") == 500.0
        && num(s, "pairs") == 500.0
        && num(s, "chains_composed") == 200.0
        && num(s, "chains") == 200.0;
    outcome(
        pass,
        format!(
            "nesting {}/{}, chain composition {}/{}",
            s["pairs_nested"], s["pairs"], s["chains_composed"], s["chains"]
        ),
    )
}

fn law_lines(rep: &RunReport) -> (usize, usize) {
    (rep.records.len(), rep.failures())
}

fn monad() -> Outcome {
    let rep = run(&config("monad_laws.json")).expect("monad run");
    let (n, failed) = law_lines(&rep);
    let has = |law: &str, size: usize| {
        rep.records.iter().any(|r| {
            r.check == law && r.params["instance_sizes"].as_array().is_some_and(|a| a.len() == 1 && a[0] == size)
        })
    };
    let covered = (1..=4).all(|b| has("associativity", b) && has("unit_left", b) && has("unit_right", b));
    outcome(
        failed == 0 && covered,
        format!("{n} law checks (units, associativity for bases 1-4, functor laws up to size 3), {failed} with counterexamples"),
    )
}

fn category() -> Outcome {
    let rep = run(&config("category_axioms.json")).expect("category run");
    let (n, failed) = law_lines(&rep);
    let exhaustive_2 = rep.records.iter().any(|r| {
        r.check == "associativity" && r.params["mode"] == "exhaustive" && r.params["instance_sizes"] == serde_json::json!([2, 2, 2, 2])
    });
    let random_500 = rep
        .records
        .iter()
        .filter(|r| r.params["mode"].as_str().is_some_and(|m| m.starts_with("random")))
        .all(|r| r.params["trials"] == 500);
    outcome(
        failed == 0 && exhaustive_2 && random_500,
        format!("{n} law checks (exhaustive on 2-element objects, 500 random trials up to size 4), {failed} with counterexamples"),
    )
}

fn eposterior() -> Outcome {
    let rep = run(&config("eposterior.json")).expect("eposterior run");
    let find = |name: &str| {
        rep.records
            .iter()
            .find(|r| r.params["family"] == name)
            .unwrap_or_else(|| panic!("family {name}"))
    };
    let sat = find("satisfying");
    let vio = find("violating");
    let es = num(&sat.params, "max_evalue_expectation");
    let ev = num(&vio.params, "max_evalue_expectation");
    let pass = sat.params["condition_holds"] == true
        && es <= 1.0 + 1e-9
        && vio.params["condition_holds"] == false
        && ev > 1.0
        && rep.pass;
    outcome(
        pass,
        format!(
            "satisfying family max E = {es:.6} <= 1 + 1e-9; violating family max E = {ev:.6} > 1 at theta index {}",
            vio.params["argmax_theta"]
        ),
    )
}

fn structural() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let net = EmbeddingNet::new(vec![
        Layer {
            weights: vec![vec![1.0], vec![-1.0], vec![0.5]],
            bias: vec![0.0, 0.0, -0.25],
        },
        Layer {
            weights: vec![vec![1.0, 0.5, -1.0], vec![0.3, -0.7, 1.2]],
            bias: vec![0.1, -0.2],
        },
    ])
    .expect("net");
    let scores = [
        ScoreFn::MeanAbsDistance,
        ScoreFn::PrototypeEmbedding(net),
        ScoreFn::NegPredictiveDensity { mean: 0.3, sd: 1.2 },
    ];
    let mut failures = Vec::new();

    // transducer values lie in S_{n+1} \ {0}
    let mut values_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..12);
        let m = rng.gen_range(2..40);
        let u = Arc::new(make_uniform_grid(&[(-2.0, 2.0)], &[m]).unwrap());
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let score = &scores[rng.gen_range(0..scores.len())];
        let t = transducer(&Sample::scalar(&data).unwrap(), score, &u).unwrap();
        values_ok &= t
            .counts()
            .iter()
            .zip(t.values())
            .all(|(&k, v)| k >= 1 && k <= n + 1 && v == k as f64 / (n + 1) as f64);
    }
    if !values_ok {
        failures.push("pi outside S_{n+1} minus 0");
    }

    // exhaustive permutation invariance, n <= 6
    let mut perm_ok = true;
    for score in &scores {
        for n in 1..=6 {
            let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y = [rng.gen_range(-3.0..3.0)];
            perm_ok &= check_permutation_invariance_exhaustive(score, &Sample::scalar(&data).unwrap(), &y);
        }
    }
    if !perm_ok {
        failures.push("permutation invariance");
    }

    // conjugacy and maxitivity, bit-exact
    let mut exact = true;
    for _ in 0..200 {
        let m = rng.gen_range(1..16);
        let u = Arc::new(make_uniform_grid(&[(0.0, 1.0)], &[m]).unwrap());
        let top = rng.gen_range(0..m);
        let vals: Vec<f64> = (0..m).map(|i| if i == top { 1.0 } else { rng.gen() }).collect();
        let c = PossibilityContour::new(u.clone(), vals).unwrap();
        let pick = |rng: &mut ChaCha8Rng| Region::from_indices(u.clone(), (0..m).filter(|_| rng.gen_bool(0.5))).unwrap();
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let up = |r: &Region| upper_prob(&c, r).unwrap();
        exact &= lower_prob(&c, &a).unwrap() == 1.0 - up(&a.complement());
        exact &= up(&a.union(&b).unwrap()) == up(&a).max(up(&b));
    }
    if !exact {
        failures.push("conjugacy / maxitivity");
    }

    // antitone nesting in alpha for kappa and the IHDR
    let mut nested = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..10);
        let base = make_uniform_grid(&[(-1.0, 1.0)], &[rng.gen_range(3..15)]).unwrap();
        let data: Vec<f64> = (0..n).map(|_| base.point(rng.gen_range(0..base.len()))[0]).collect();
        let mut pts = base.points().to_vec();
        let mut sorted = data.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        if !pts.iter().any(|p| p[0] == mean) {
            pts.push(vec![mean]);
        }
        let u = Arc::new(Grid::from_points(pts).unwrap());
        let y_n = Sample::scalar(&data).unwrap();
        let mut a1 = sample_alpha(&mut rng, n).unwrap();
        let mut a2 = sample_alpha(&mut rng, n).unwrap();
        if a1 > a2 {
            std::mem::swap(&mut a1, &mut a2);
        }
        let k1 = kappa(a1, &y_n, &ScoreFn::MeanAbsDistance, &u).unwrap();
        let k2 = kappa(a2, &y_n, &ScoreFn::MeanAbsDistance, &u).unwrap();
        let cs = cred(&y_n, &ScoreFn::MeanAbsDistance, &u).unwrap();
        nested &= k2.is_subset(&k1).unwrap();
        nested &= ihdr_contour(a2, &cs).is_subset(&ihdr_contour(a1, &cs)).unwrap();
    }
    if !nested {
        failures.push("antitone nesting");
    }

    // determinism: same seed, byte-identical reports, any worker count
    let mut deterministic = true;
    for name in ["coverage_uniform.json", "diagram_prototype.json", "bayes_triangle.json", "ihdr_oracle.json"] {
        let mut cfg = config(name);
        cfg.trials = cfg.trials.min(200);
        let render_with = |threads: usize| {
            let cfg = cfg.clone();
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(move || {
                    let rep = run(&cfg).unwrap();
                    (render(&rep, Format::Json).unwrap(), render(&rep, Format::Csv).unwrap())
                })
        };
        let first = render_with(1);
        deterministic &= first == render_with(1) && first == render_with(4);
    }
    if !deterministic {
        failures.push("determinism");
    }

    let detail = if failures.is_empty() {
        "pi in S_{n+1}\\{0}, permutation invariance (n <= 6, 3 scores), conjugacy/maxitivity, antitone nesting, byte-identical reruns".to_string()
    } else {
        format!("failed: {}", failures.join(", "))
    };
    outcome(failures.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("coverage", coverage),
        ("full CP diagram", diagram),
        ("Bayesian triangle", triangle),
        ("IHDR functoriality", ihdr_functor),
        ("Vietoris monad laws", monad),
        ("category and monoidal laws", category),
        ("e-posterior biconditional", eposterior),
        ("structural invariants", structural),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("criterion {} {:<28} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
