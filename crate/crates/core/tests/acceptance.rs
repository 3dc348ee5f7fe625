//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! any gating criterion fails. The long reproductions run only with
//! `--ignored` or `--include-ignored`.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use common::{bi, brute_force_square, factored_quartic, first_state, obstruction_examples, sample, second_state};
use ecdescent::arith::{self, Factorizer};
use ecdescent::cli::{self, CurveSource, Family, OutputFormat, RunConfig, RunOutput};
use ecdescent::descent::{variants_for, Descent, DescentOptions, Mode, StageVerdict, Status};
use ecdescent::forms::{
    descent_pair, factor_quartic, parameterize_first, parameterize_second, pell_parameterization,
    quartic_from_first_descent, quartic_from_second_descent, resultant_k1, second_square_root, ConicForm, ConicSolution,
    Curve, QuarticForm,
};
use ecdescent::point::{has_finite_order, parse_rational, RationalPoint, TorsionList};
use ecdescent::search::{Engine, SearchBounds};
use ecdescent::solubility::is_everywhere_locally_soluble;

const FUZZ_CASES: usize = 500;
const GOLDEN_ISOGENOUS_X: &str = "2836849934676319513920/468984909449923441";
const GOLDEN_X: &str = "265479261289194419968505186711433025/170541875947725676769862564358062336";
const N157_X: &str = "-166136231668185267540804/2825630694251145858025";

#[derive(Default)]
struct Checks {
    total: usize,
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.total += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.check(what, false);
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

/// State shared across criteria.
#[derive(Default)]
struct Shared {
    /// Every quartic declared insoluble along the way.
    insoluble: Vec<(String, QuarticForm)>,
    /// Every point returned by a search, with its curve and torsion list.
    points: Vec<(String, Curve, TorsionList, RationalPoint)>,
    golden_report: Option<String>,
    n157_report: Option<String>,
}

impl Shared {
    fn note_verdicts(&mut self, origin: &str, verdicts: &[StageVerdict]) {
        for v in verdicts.iter().filter(|v| !v.verdict.soluble) {
            self.insoluble.push((origin.to_string(), v.quartic.clone()));
        }
    }

    fn note_quartic(&mut self, origin: &str, q: &QuarticForm, factorizer: &Factorizer) -> bool {
        let v = is_everywhere_locally_soluble(q, factorizer);
        if !v.soluble {
            self.insoluble.push((origin.to_string(), q.clone()));
        }
        v.soluble
    }
}

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn golden_config(workers: usize) -> RunConfig {
    let mut cfg = RunConfig::new(CurveSource::Raw { a: bi(6243), b: bi(1) });
    cfg.bounds = SearchBounds::new(2, 200, 99, 99, 400).unwrap();
    cfg.mode = Mode::Eight;
    cfg.forced_d = Some(bi(5));
    cfg.use_isogenous = true;
    cfg.workers = workers;
    cfg.output = OutputFormat::Structured;
    cfg
}

fn n157_config(workers: usize) -> RunConfig {
    let mut cfg = RunConfig::new(CurveSource::Family(Family::Congruent(bi(157))));
    cfg.bounds = SearchBounds::new(2, 200, 99, 99, 199).unwrap();
    cfg.mode = Mode::Eight;
    cfg.workers = workers;
    cfg.output = OutputFormat::Structured;
    cfg
}

fn report_line(out: &RunOutput) -> String {
    out.render(OutputFormat::Structured)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

/// Re-run a configuration through the library with a verdict log.
fn logged_verdicts(cfg: &RunConfig) -> Vec<StageVerdict> {
    let target = cfg.source.curve().unwrap();
    let opts = DescentOptions {
        bounds: cfg.bounds,
        mode: cfg.mode,
        forced_d: cfg.forced_d.clone(),
        max_units: None,
    };
    let engine = Engine::serial();
    let factorizer = Factorizer::default();
    let log = Mutex::new(Vec::new());
    let variants = variants_for(&target, cfg.use_isogenous, cfg.isogeny_variants);
    let descent = Descent::new(&target, variants, &cfg.torsion_x, &opts, &engine, &factorizer)
        .unwrap()
        .log_verdicts(&log);
    descent.run(None, &mut |_| {}).unwrap();
    log.into_inner().unwrap()
}

fn conic(a: i64, b: i64, c: i64) -> ConicForm {
    ConicForm::new(a, b, c)
}

fn criterion_1(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let started = Instant::now();
    let out = match cli::run(&golden_config(1)) {
        Ok(o) => o,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("run failed: {e}"),
            }
        }
    };
    let elapsed = started.elapsed();
    shared.golden_report = Some(report_line(&out));
    let report = &out.report;
    c.check("status found", report.status == Status::Found);
    let Some(t) = report.trace.as_ref() else {
        return Outcome {
            pass: false,
            detail: "no trace".into(),
        };
    };
    let iso = Curve::new(-12486, 38975045).unwrap();
    c.check("isogenous curve", t.curve == iso);
    c.check("d = 5", t.d == bi(5));
    c.check("conic solution (2584, 93, 1)", t.conic_solution == ConicSolution::new(1, 2584, 93, 1));
    let (first, second) = descent_pair(&iso, &bi(5), &t.conic_solution).unwrap();
    c.check("quadratic (1, 0, -5)", first == conic(1, 0, -5));
    c.check("quadratic (93, -5168, -12021)", second == conic(93, -5168, -12021));
    let paper_q4 = QuarticForm::from_i64([93, -10336, -47154, -51680, 2325]);
    c.check("quartic4 coefficients", t.quartic4 == paper_q4);
    c.check(
        "quartic4 from the Pell parameterization",
        t.first_solution.g.is_zero() && pell_parameterization(&bi(5)).compose(&second, &t.first_solution.k) == paper_q4,
    );
    match &t.factorization {
        Some(fac) => {
            let got: HashSet<ConicForm> = [fac.u.clone(), fac.v.clone()].into_iter().collect();
            let want: HashSet<ConicForm> = [conic(31, 68, -3), conic(3, -340, -775)].into_iter().collect();
            c.check("factorization {(31,68,-3),(3,-340,-775)}", got == want);
            c.check("k1 is solved on (3,-340,-775)", fac.v == conic(3, -340, -775));
            let ks = resultant_k1(fac)
                .and_then(|r| Factorizer::default().squarefree_divisors(&r))
                .unwrap_or_default();
            c.check("k1 candidates contain 158", ks.contains(&bi(158)));
        }
        None => c.fail("no factorization"),
    }
    c.check(
        "second conic solution (158; 4, 9, -1)",
        t.second_solution == Some(ConicSolution::new(158, 4, 9, -1)),
    );
    let paper_q8 = QuarticForm::from_i64([74892, 154840, 123789, 45916, 6725]);
    let scale = bi(316 * 316);
    match &t.quartic8 {
        Some(q8) => c.check(
            "quartic8 = 316^2 (74892, 154840, 123789, 45916, 6725) up to i -> -i",
            *q8 == paper_q8.scaled(&scale) || *q8 == paper_q8.flip_r().scaled(&scale),
        ),
        None => c.fail("no quartic8"),
    }
    match (&t.hit, &t.quartic8_reduced) {
        (Some(h), Some(red)) => {
            let flipped = *red == paper_q8.flip_r();
            let (pi, pj) = if flipped { (h.i.clone(), -&h.j) } else { (h.i.clone(), h.j.clone()) };
            c.check(
                "hit equivalent to (151, -158)",
                (pi.clone(), pj.clone()) == (bi(151), bi(-158)) || (pi, pj) == (bi(-151), bi(158)),
            );
            c.check("hit value is a square", arith::is_square(&paper_q8.eval(&bi(151), &bi(-158))));
        }
        _ => c.fail("no hit"),
    }
    match &t.point {
        Some(p) => c.check("isogenous x", *p.x() == q(GOLDEN_ISOGENOUS_X)),
        None => c.fail("no isogenous point"),
    }
    match &report.point {
        Some(p) => {
            c.check("primary x", *p.x() == q(GOLDEN_X));
            shared.points.push((
                "golden".into(),
                report.curve.clone(),
                report.search.torsion_x.clone(),
                p.clone(),
            ));
        }
        None => c.fail("no primary point"),
    }
    c.check(format!("runtime {elapsed:?} <= 10 s"), elapsed <= Duration::from_secs(10));
    shared.note_verdicts("golden run", &logged_verdicts(&golden_config(1)));
    finish(c, format!("{:.3} s", elapsed.as_secs_f64()))
}

fn criterion_2(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let started = Instant::now();
    let out = match cli::run(&n157_config(1)) {
        Ok(o) => o,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("run failed: {e}"),
            }
        }
    };
    let elapsed = started.elapsed();
    shared.n157_report = Some(report_line(&out));
    c.check("status found", out.report.status == Status::Found);
    match &out.report.point {
        Some(p) => {
            c.check("x exact", *p.x() == q(N157_X));
            shared.points.push((
                "congruent:157".into(),
                out.report.curve.clone(),
                out.report.search.torsion_x.clone(),
                p.clone(),
            ));
        }
        None => c.fail("no point"),
    }
    c.check(format!("runtime {elapsed:?} <= 60 s"), elapsed <= Duration::from_secs(60));
    shared.note_verdicts("congruent:157 run", &logged_verdicts(&n157_config(1)));
    finish(c, format!("{:.3} s", elapsed.as_secs_f64()))
}

fn criterion_3(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let factorizer = Factorizer::default();
    let grid: Vec<(BigInt, BigInt)> = (-10..=10).flat_map(|r| (-10..=10).map(move |s| (bi(r), bi(s)))).collect();
    for st in sample(first_state(), FUZZ_CASES) {
        let quartic = quartic_from_first_descent(st.curve.a(), &st.d, &st.conic, &st.first);
        let map = parameterize_first(&st.first, &st.conic.g, &st.d);
        let (first_form, second_form) = descent_pair(&st.curve, &st.d, &st.conic).unwrap();
        let k0 = &st.first.k;
        let ok = grid.iter().all(|(r, s)| {
            let (p, q) = map.eval(r, s);
            let lhs = first_form.eval(&p, &q);
            quartic.eval(r, s) == k0 * second_form.eval(&p, &q)
                && lhs.is_multiple_of(k0)
                && arith::is_square(&(&lhs / k0))
        });
        c.check(format!("4-descent identity for {st:?}"), ok);
        shared.note_quartic("4-descent fuzz", &quartic.reduced(&factorizer).0, &factorizer);
    }
    for st in sample(second_state(), FUZZ_CASES) {
        let quartic = quartic_from_second_descent(&st.second, &st.u, &st.v);
        let Ok(map) = parameterize_second(&st.second, &st.v) else {
            c.fail(format!("seed rejected for {st:?}"));
            continue;
        };
        let k1 = &st.second.k;
        let ok = grid.iter().all(|(i, j)| {
            let (r, s) = map.eval(i, j);
            let t = second_square_root(&st.second, &st.v, i, j);
            quartic.eval(i, j) == k1 * st.u.eval(&r, &s) && st.v.eval(&r, &s) == k1 * &t * &t
        });
        c.check(format!("8-descent identity for {st:?}"), ok);
        shared.note_quartic("8-descent fuzz", &quartic.reduced(&factorizer).0, &factorizer);
    }
    let n = c.total;
    finish(c, format!("{n} states x 441 grid points"))
}

fn criterion_4(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let factorizer = Factorizer::default();
    let mut k1_checks = 0usize;
    for fq in sample(factored_quartic(), FUZZ_CASES) {
        let facs = factor_quartic(&fq.quartic, &factorizer);
        c.check(format!("factorization found for {fq:?}"), !facs.is_empty());
        c.check(
            format!("expansions equal the input for {fq:?}"),
            facs.iter().all(|f| f.expand() == fq.quartic),
        );
        let mut points = Vec::new();
        for r in -12i64..=12 {
            for s in 0i64..=12 {
                if r.gcd(&s) != 1 {
                    continue;
                }
                let value = fq.quartic.eval(&bi(r), &bi(s));
                if value.is_positive() && arith::is_square(&value) {
                    points.push((bi(r), bi(s)));
                }
            }
        }
        c.check(format!("constructed point found for {fq:?}"), !points.is_empty());
        for fac in &facs {
            let res = match resultant_k1(fac) {
                Ok(r) => r,
                Err(e) => {
                    c.fail(format!("resultant of {fac}: {e}"));
                    continue;
                }
            };
            c.check(format!("resultant of {fac} nonzero"), !res.is_zero());
            let ks = factorizer.squarefree_divisors(&res).unwrap();
            for oriented in [fac.clone(), fac.swapped()] {
                for (r, s) in &points {
                    let (k1, _) = factorizer.squarefree_decompose(&oriented.v.eval(r, s)).unwrap();
                    k1_checks += 1;
                    c.check(
                        format!("k1 = {k1} from ({r}, {s}) divides the squarefree part of {res}"),
                        res.is_multiple_of(&k1) && ks.contains(&k1),
                    );
                }
            }
        }
        let soluble = shared.note_quartic("factored fuzz", &fq.quartic, &factorizer);
        c.check(format!("quartic with a point declared soluble: {fq:?}"), soluble);
    }
    finish(c, format!("{FUZZ_CASES} quartics, {k1_checks} brute-force k1 checks"))
}

fn criterion_5(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let factorizer = Factorizer::default();
    for q in obstruction_examples() {
        let soluble = shared.note_quartic("obstruction example", &q, &factorizer);
        c.check(format!("obstruction example {q} declared insoluble"), !soluble);
    }
    let mut seen = HashSet::new();
    let mut tested = 0usize;
    for (origin, q) in &shared.insoluble {
        if !seen.insert(q.clone()) {
            continue;
        }
        tested += 1;
        if let Some((r, s)) = brute_force_square(q, 500) {
            c.fail(format!("{origin}: {q} is declared insoluble but Q({r}, {s}) is a square"));
        }
    }
    c.check("some insoluble quartics were collected", tested > 0);
    finish(c, format!("{tested} distinct insoluble quartics, |r|+|s| <= 500"))
}

fn criterion_6(_shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let factorizer = Factorizer::default();
    let mut soluble_pairs = 0usize;
    for st in sample(first_state(), FUZZ_CASES) {
        let minus = ConicSolution {
            g: -&st.first.g,
            ..st.first.clone()
        };
        let v: Vec<_> = [&st.first, &minus]
            .into_iter()
            .map(|seed| {
                let q = quartic_from_first_descent(st.curve.a(), &st.d, &st.conic, seed);
                is_everywhere_locally_soluble(&q.reduced(&factorizer).0, &factorizer).soluble
            })
            .collect();
        soluble_pairs += usize::from(v[0]);
        c.check(format!("sign pair verdicts agree for {st:?}"), v[0] == v[1]);
    }
    let mut runs = vec![("golden".to_string(), golden_config(1)), ("congruent:157".to_string(), n157_config(1))];
    for n in 5..=60 {
        let mut cfg = RunConfig::new(CurveSource::Family(Family::Congruent(bi(n))));
        cfg.bounds = SearchBounds::new(2, 12, 12, 5, 5).unwrap();
        cfg.mode = Mode::Four;
        runs.push((format!("congruent:{n}"), cfg));
    }
    let mut run_quartics = 0;
    for (name, cfg) in runs {
        let out = cli::run(&cfg).unwrap();
        run_quartics += out.report.stats.quartics4;
        c.check(
            format!("{name} run reports no sign-pair disagreement"),
            out.report.stats.sign_pair_disagreements == 0,
        );
    }
    finish(
        c,
        format!("{FUZZ_CASES} fuzzed states ({soluble_pairs} soluble pairs), {run_quartics} first quartics from 58 runs"),
    )
}

fn criterion_7(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    let small = SearchBounds::new(2, 40, 20, 20, 60).unwrap();
    let mut configs = Vec::new();
    for n in [5, 6, 7, 13, 14, 15, 21, 22, 23, 29, 30, 31, 34, 37, 38, 39, 41, 46, 47] {
        for mode in [Mode::Four, Mode::Eight, Mode::Auto] {
            let mut cfg = RunConfig::new(CurveSource::Family(Family::Congruent(bi(n))));
            cfg.bounds = small;
            cfg.mode = mode;
            configs.push(cfg);
        }
    }
    for st in sample(first_state(), 40) {
        let mut cfg = RunConfig::new(CurveSource::Raw {
            a: st.curve.a().clone(),
            b: st.curve.b().clone(),
        });
        cfg.bounds = small;
        cfg.mode = Mode::Eight;
        configs.push(cfg);
    }
    let mut with_variants = RunConfig::new(CurveSource::Family(Family::Congruent(bi(157))));
    with_variants.bounds = SearchBounds::new(2, 60, 40, 40, 80).unwrap();
    with_variants.isogeny_variants = true;
    with_variants.torsion_x = ecdescent::cli::parse_torsion_list("0,157,-157").unwrap();
    configs.push(with_variants);
    for cfg in &configs {
        match cli::run(cfg) {
            Ok(out) => {
                if let Some(p) = &out.report.point {
                    shared.points.push((
                        format!("{:?}", cfg.source),
                        out.report.curve.clone(),
                        cfg.torsion_x.clone(),
                        p.clone(),
                    ));
                }
            }
            Err(e) => c.fail(format!("{:?}: {e}", cfg.source)),
        }
    }
    for (origin, curve, torsion, p) in &shared.points {
        let mut t = TorsionList::seeded(curve);
        t.extend(torsion.xs().iter().cloned());
        c.check(format!("{origin}: on the curve"), p.lies_on(curve));
        c.check(format!("{origin}: y != 0"), !p.y().is_zero());
        c.check(format!("{origin}: not in the torsion x-list"), !t.is_torsion(p));
        c.check(format!("{origin}: not of finite order"), !has_finite_order(curve, p));
    }
    let n = shared.points.len();
    finish(c, format!("{n} returned points from {} runs", configs.len() + 2))
}

fn long_run(cfg: &RunConfig, want_x: &str) -> Outcome {
    let started = Instant::now();
    match cli::run(cfg) {
        Ok(out) => {
            let got = out.report.point.as_ref().map(|p| p.x().clone());
            let pass = got == Some(q(want_x));
            Outcome {
                pass,
                detail: format!(
                    "{:?} in {:.0} s, x = {}",
                    out.report.status,
                    started.elapsed().as_secs_f64(),
                    got.map_or("none".into(), |x| x.to_string())
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: format!("run failed: {e}"),
        },
    }
}

fn criterion_8(_shared: &mut Shared) -> Outcome {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut n367 = RunConfig::new(CurveSource::Family(Family::Congruent(bi(367))));
    n367.bounds = SearchBounds::new(2, 200, 99, 99, 9999).unwrap();
    n367.workers = workers;
    let want367 = (BigRational::from_integer(bi(-367))
        * q("496953629608513608777/16382168821648506431464").pow(2))
    .to_string();
    let a = long_run(&n367, &want367);
    let mut c877 = RunConfig::new(CurveSource::Raw { a: bi(0), b: bi(877) });
    c877.bounds = SearchBounds::new(2, 200, 99, 99, 12999).unwrap();
    c877.workers = workers;
    let want877 = (BigRational::from_integer(bi(877)) * q("78841535860683900210/612776083187947368101").pow(2)).to_string();
    let b = long_run(&c877, &want877);
    Outcome {
        pass: a.pass && b.pass,
        detail: format!("N=367: {}; y^2=x^3+877x: {}", a.detail, b.detail),
    }
}

fn criterion_9(shared: &mut Shared) -> Outcome {
    let mut c = Checks::default();
    for (name, make, reference) in [
        ("golden", golden_config as fn(usize) -> RunConfig, shared.golden_report.clone()),
        ("congruent:157", n157_config, shared.n157_report.clone()),
    ] {
        let lines: Vec<String> = [1, 4, 16]
            .into_iter()
            .map(|w| cli::run(&make(w)).map(|o| report_line(&o)).unwrap_or_else(|e| e.to_string()))
            .collect();
        c.check(format!("{name}: 1, 4, 16 workers agree"), lines.iter().all(|l| *l == lines[0]));
        if let Some(r) = reference {
            c.check(format!("{name}: matches the earlier run"), lines[0] == r);
        }
    }
    finish(c, "workers 1, 4, 16".into())
}

fn finish(c: Checks, summary: String) -> Outcome {
    let pass = c.failures.is_empty();
    let mut detail = format!("{summary}; {} checks", c.total);
    if !pass {
        detail.push_str(&format!(", {} failed", c.failures.len()));
        for f in c.failures.iter().take(5) {
            detail.push_str(&format!("\n    - {f}"));
        }
    }
    Outcome { pass, detail }
}

type Criterion = fn(&mut Shared) -> Outcome;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let long = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let criteria: [(u32, &str, Criterion, bool); 9] = [
        (1, "golden chain, n = 79", criterion_1, true),
        (2, "congruent N = 157 end to end", criterion_2, true),
        (3, "parameterization identities", criterion_3, true),
        (4, "factorization round trip", criterion_4, true),
        (5, "solubility soundness", criterion_5, true),
        (6, "sign-pair verdicts", criterion_6, true),
        (7, "exactness of returned points", criterion_7, true),
        (8, "long reproductions (N = 367, x^3 + 877x)", criterion_8, false),
        (9, "determinism across worker counts", criterion_9, true),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for (n, name, run, gating) in criteria {
        if !gating && !long {
            println!("criterion {n} SKIP {name}: non-gating, run with --ignored");
            continue;
        }
        let started = Instant::now();
        let out = run(&mut shared);
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} {verdict} {name} ({:.1} s): {}",
            started.elapsed().as_secs_f64(),
            out.detail
        );
        if !out.pass && gating {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
