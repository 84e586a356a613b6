//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::Command;
use std::time::Instant;

use irrinv::closed_form::expected_max_exp;
use irrinv::gexpect::{
    brute_force_lower_expectation, conditional_values, g_expectation_lattice, Driver, LatticeClaim,
};
use irrinv::rng::PathRng;
use irrinv::simulate::{estimate_k_mc, estimate_payoff, random_piecewise_kernels};
use irrinv::verify::{
    foc_report, k_xi_comparison, linspace, marginal_value, statics_sweep, worst_case_scan,
    Monotonicity, SweepParam,
};
use irrinv::{
    value_function, value_function_dc, Estimator, KernelSpec, McSettings, ModelParams,
    SolutionConstants, TimeGrid, ValidParams,
};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn p0() -> ValidParams {
    ModelParams::reference().validate().unwrap()
}

fn exp_settings(n: usize, seed: u64, rate: f64) -> McSettings {
    McSettings::new(
        n,
        seed,
        TimeGrid::new(1.0, 4).unwrap(),
        Estimator::ExponentialTime { rate },
    )
}

fn text<T>(r: irrinv::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_k_monte_carlo() -> Outcome {
    let p = p0();
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let est = pool
        .install(|| estimate_k_mc(&p, &exp_settings(100_000, 1, p.r)))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let k = SolutionConstants::solve(&p).unwrap();
    let rel = est.k / k.k - 1.0;
    check(
        rel.abs() < 0.02 && est.tail_bound < 1e-3 * k.k_alpha && secs < 60.0,
        format!(
            "K_mc = {:.4} +- {:.4}, closed form {:.4}, rel {rel:+.4}, tail {:.1e}, {secs:.1} s",
            est.k, est.k_std_error, k.k, est.tail_bound
        ),
    )
}

fn c2_value_function() -> Outcome {
    let p = p0();
    let k = SolutionConstants::solve(&p).unwrap();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [0.0, 1.0, 2.0] {
        let c = m * k.k;
        let q = p.with_state(1.0, c).unwrap();
        let e = estimate_payoff(
            &q,
            &KernelSpec::Constant(-p.kappa),
            &exp_settings(100_000, 2, 0.5 * p.r),
        )
        .map_err(|e| e.to_string())?;
        let v = value_function(1.0, c, &p, &k).unwrap();
        ok &= e.covers(v, 3.0);
        parts.push(format!(
            "c={m}K: {:.3} +- {:.3} vs {v:.3}",
            e.mean, e.std_error
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        ok && secs < 120.0,
        format!("{}; {secs:.1} s", parts.join(", ")),
    )
}

fn c3_smooth_fit() -> Outcome {
    let p = p0();
    let k = SolutionConstants::solve(&p).unwrap();
    let worst = linspace(0.05, 20.0, 20)
        .into_iter()
        .map(|x| (value_function_dc(x, k.k * x, &p, &k).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    check(worst <= 1e-9, format!("max |v_c(x, Kx) - 1| = {worst:.2e}"))
}

fn c4_homogeneity() -> Outcome {
    let p = p0();
    let k = SolutionConstants::solve(&p).unwrap();
    let mut worst = 0.0f64;
    let states: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            (
                0.3 + 0.4 * i as f64,
                [0.0, 10.0, 60.0, 150.0, 400.0][i % 5] * (1.0 + 0.1 * i as f64),
            )
        })
        .collect();
    for (x, c) in states {
        let v = value_function(x, c, &p, &k).unwrap();
        for a in [0.5, 2.0, 10.0] {
            let va = value_function(a * x, a * c, &p, &k).unwrap();
            worst = worst.max((va - a * v).abs() / (a * v.abs()));
        }
    }
    check(
        worst <= 1e-10,
        format!("max relative deviation {worst:.2e}"),
    )
}

fn c5_first_order_conditions() -> Outcome {
    let p = p0();
    let k = SolutionConstants::solve(&p).unwrap().k;
    let worst = KernelSpec::Constant(-p.kappa);
    let s = exp_settings(100_000, 5, p.r);
    let at = text(marginal_value(&p, k, &worst, &s))?;
    let above = text(marginal_value(&p, 2.0 * k, &worst, &s))?;
    let opt = text(foc_report(&p, &[], &worst, &s, 1.0))?;
    let bad = text(foc_report(&p, &[], &worst, &s, 2.0))?;
    let ok = at.covers(1.0, 3.0)
        && above.mean < 1.0 - 3.0 * above.std_error
        && opt.flat_off.is_zero()
        && !bad.flat_off.is_zero()
        && bad.flat_off.value < 0.0;
    check(
        ok,
        format!(
            "M(Kx) = {:.4} +- {:.4}, M(2Kx) = {:.4} +- {:.4}, flat-off {:.4} +- {:.4}, 2K flat-off {:.3} +- {:.3} (VIOLATION)",
            at.mean, at.std_error, above.mean, above.std_error, opt.flat_off.value, opt.flat_off.std_error,
            bad.flat_off.value, bad.flat_off.std_error
        ),
    )
}

fn c6_worst_case() -> Outcome {
    let p = p0();
    let mut kernels = vec![
        KernelSpec::Constant(-p.kappa),
        KernelSpec::Constant(0.0),
        KernelSpec::Constant(p.kappa),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in [1, 2, 3] {
        kernels.truncate(3);
        kernels.extend(random_piecewise_kernels(20, 5, p.kappa, seed));
        let t = worst_case_scan(&p, &kernels, &exp_settings(20_000, seed, 0.5 * p.r))
            .map_err(|e| e.to_string())?;
        let closest = t
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t.reference)
            .map(|(_, r)| r.excess.mean / r.excess.std_error)
            .fold(f64::INFINITY, f64::min);
        ok &= t.worst_case_holds() && t.argmin() == t.reference;
        parts.push(format!("seed {seed}: closest rival {closest:+.1} SE"));
    }
    check(ok, format!("23 kernels, {}", parts.join(", ")))
}

fn random_claim(depth: usize, dt: f64, rng: &mut PathRng) -> LatticeClaim {
    let vals = (0..1usize << depth).map(|_| 5.0 * rng.normal()).collect();
    LatticeClaim::from_pattern_values(depth, dt, vals).unwrap()
}

fn c7_oracle_equivalence() -> Outcome {
    let dt: f64 = 0.01;
    let mut rng = PathRng::new(7, 0);
    let mut worst = 0.0f64;
    for tilt in [0.1, 0.5, 0.9] {
        let kappa = tilt / dt.sqrt();
        let d = Driver::kappa_ignorance(kappa).unwrap();
        for depth in 0..=12 {
            let x = random_claim(depth, dt, &mut rng);
            let g = g_expectation_lattice(&x, &d).unwrap();
            let bf = brute_force_lower_expectation(&x, kappa, 2).unwrap();
            worst = worst.max((g - bf).abs());
        }
    }
    check(
        worst <= 1e-12,
        format!("max |lattice - brute force| = {worst:.2e} over depths 0..=12"),
    )
}

fn c8_properties() -> Outcome {
    let dt: f64 = 0.04;
    let kappa = 2.0;
    let d = Driver::kappa_ignorance(kappa).unwrap();
    let g = |c: &LatticeClaim| g_expectation_lattice(c, &d).unwrap();
    let mut rng = PathRng::new(8, 0);
    let mut fails = [0usize; 6];
    for i in 0..100 {
        let n = 1 + i % 10;
        let x = random_claim(n, dt, &mut rng);
        let y = random_claim(n, dt, &mut rng);
        let gx = g(&x);
        // strict comparison
        let which = (rng.open_uniform() * (1usize << n) as f64) as usize % (1 << n);
        let mut bumped = x.pattern_values();
        bumped[which] += 0.01;
        let xb = LatticeClaim::from_pattern_values(n, dt, bumped).unwrap();
        fails[0] += usize::from(g(&xb) <= gx);
        // time consistency
        let level = i % (n + 1);
        let inner = conditional_values(&x, &d, level).unwrap();
        let two = g(&LatticeClaim::from_pattern_values(level, dt, inner).unwrap());
        fails[1] += usize::from((two - gx).abs() > 1e-12);
        // translation invariance
        fails[2] += usize::from((g(&x.map(|v| v + 3.5).unwrap()) - gx - 3.5).abs() > 1e-12);
        // constant preserving
        let cst = 10.0 * rng.normal();
        fails[3] +=
            usize::from((g(&LatticeClaim::markov(n, dt, |_| cst).unwrap()) - cst).abs() > 1e-12);
        // local property on the first step
        let (xv, yv) = (x.pattern_values(), y.pattern_values());
        let mixed: Vec<f64> = (0..1usize << n)
            .map(|p| if p & 1 == 1 { xv[p] } else { yv[p] })
            .collect();
        let vm = conditional_values(
            &LatticeClaim::from_pattern_values(n, dt, mixed).unwrap(),
            &d,
            1,
        )
        .unwrap();
        let (vx, vy) = (
            conditional_values(&x, &d, 1).unwrap(),
            conditional_values(&y, &d, 1).unwrap(),
        );
        fails[4] += usize::from((vm[1] - vx[1]).abs() > 1e-12 || (vm[0] - vy[0]).abs() > 1e-12);
        // concavity
        let gy = g(&y);
        let concave = [0.25, 0.5, 0.75].iter().all(|&w| {
            let mix = x.zip_with(&y, |u, v| w * u + (1.0 - w) * v).unwrap();
            g(&mix) >= w * gx + (1.0 - w) * gy - 1e-12
        });
        fails[5] += usize::from(!concave);
    }
    let names = [
        "strict comparison",
        "time consistency",
        "translation",
        "constants",
        "local",
        "concavity",
    ];
    let detail = names
        .iter()
        .zip(fails)
        .map(|(n, f)| format!("{n} {}/100", 100 - f))
        .collect::<Vec<_>>()
        .join(", ");
    check(fails.iter().all(|&f| f == 0), detail)
}

fn c9_comparative_statics() -> Outcome {
    let base = ModelParams::reference();
    let sweeps = [
        (SweepParam::R, linspace(0.09, 0.20, 10)),
        (SweepParam::Kappa, linspace(0.0, 0.12, 10)),
        (SweepParam::B, linspace(0.0, 0.03, 10)),
    ];
    let mut ok = true;
    for (param, grid) in &sweeps {
        ok &= statics_sweep(&base, *param, grid).verdict() == Monotonicity::Holds;
    }
    let p = p0();
    let cmp = k_xi_comparison(&p, -p.kappa, p.kappa, &exp_settings(50_000, 9, p.r))
        .map_err(|e| e.to_string())?;
    check(
        ok && cmp.ordered(),
        format!(
            "closed-form K monotone in r, kappa, b: {ok}; K_xi(+kappa) - K_xi(-kappa) = {:.4} +- {:.4}",
            cmp.difference.mean, cmp.difference.std_error
        ),
    )
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

fn c10_max_of_exponential() -> Outcome {
    let mut rng = PathRng::new(10, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let nu = 0.2 + 3.0 * rng.open_uniform();
        let a = nu * (0.05 + 0.9 * rng.open_uniform());
        let l = 1.0 + 20.0 * rng.open_uniform();
        let density = |z: f64| nu * (-nu * z).exp();
        let f = |z: f64| l.max((a * z).exp()) * density(z);
        // split at the kink, truncate where the tail is below 1e-14 in relative terms
        let kink = l.ln() / a;
        let end = kink + 40.0 / (nu - a);
        let quad = adaptive_simpson(&f, 0.0, kink, 1e-13) + adaptive_simpson(&f, kink, end, 1e-13);
        let exact = expected_max_exp(l, a, nu).unwrap();
        worst = worst.max((quad - exact).abs());
    }
    check(
        worst <= 1e-8,
        format!("max |formula - quadrature| = {worst:.2e} on 50 triples"),
    )
}

fn c11_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_irrinv");
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let runs = [("1", &dirs[0]), ("1", &dirs[1]), ("4", &dirs[2])];
    for (threads, d) in runs {
        for cmd in ["simulate", "verify"] {
            let st = Command::new(bin)
                .args([
                    cmd,
                    "--paths",
                    "2000",
                    "--steps",
                    "4",
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                    "--scan",
                    "random:4",
                ])
                .arg("--out")
                .arg(d.path())
                .output()
                .map_err(|e| e.to_string())?;
            if st.status.code() != Some(0) {
                return Err(format!("{cmd} exited with {:?}", st.status.code()));
            }
        }
    }
    let files = [
        "summary.csv",
        "paths.csv",
        "foc.csv",
        "worstcase.csv",
        "statics.csv",
    ];
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    let same = files
        .iter()
        .all(|f| read(&dirs[0], f) == read(&dirs[1], f) && read(&dirs[0], f) == read(&dirs[2], f));
    check(
        same,
        format!(
            "{} files identical across two runs and 1 vs 4 workers",
            files.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("closed-form K vs Monte Carlo", c1_k_monte_carlo),
        ("value function reproduction", c2_value_function),
        ("smooth fit", c3_smooth_fit),
        ("homogeneity", c4_homogeneity),
        ("first-order conditions", c5_first_order_conditions),
        ("worst-case minimality", c6_worst_case),
        ("lattice oracle equivalence", c7_oracle_equivalence),
        ("lattice property suite", c8_properties),
        ("comparative statics", c9_comparative_statics),
        ("max-of-exponential formula", c10_max_of_exponential),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
