//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails or overruns its time limit.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kslab_core::exactnum::{rat, to_f64, Rational};
use kslab_core::schauder::{apply_functional, coefficient_functionals, SparseSeq};
use kslab_core::tensor::decay_profile;
use kslab_core::{
    basis_constant, build_triangular_basis, certify_bound2, certify_bound3, density_check, expand, extract,
    random_tensor_probe, reference_family, strongly_normal_report, sup_rect_bruteforce, sup_rect_fast,
    tensor_sup_exact, verify_stabilization, Bijection, FiniteSection, GeneratorSet, KsMeasure, PiEnclosure,
    Representation, Verdict,
};

fn support_target(n: usize) -> BigUint {
    BigUint::from(n) << n
}

type Check = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn ac1() -> Check {
    for n in 1..=16 {
        let m = KsMeasure::build(n, Bijection::Canonical, Representation::Explicit).map_err(|e| e.to_string())?;
        ensure(m.total_variation().is_one(), || format!("explicit n={n}: total variation != 1"))?;
        ensure(m.support_size() == support_target(n), || format!("explicit n={n}: support size"))?;
        let atoms = m.to_atomic().map_err(|e| e.to_string())?;
        ensure(atoms.total_variation().is_one(), || format!("explicit n={n}: atom sum != 1"))?;
        ensure(BigUint::from(atoms.support().len()) == support_target(n), || format!("explicit n={n}: atom count"))?;
    }
    for n in [32, 256, 4096] {
        let m = KsMeasure::build(n, Bijection::Canonical, Representation::Implicit).map_err(|e| e.to_string())?;
        ensure(m.total_variation().is_one(), || format!("implicit n={n}: total variation != 1"))?;
        ensure(m.support_size() == support_target(n), || format!("implicit n={n}: support size"))?;
    }
    Ok("n=1..16 explicit, n=32,256,4096 implicit".into())
}

fn ac2() -> Check {
    let pi = PiEnclosure::published();
    for n in 1..=512 {
        let rep = if n <= 16 {
            let m = KsMeasure::build(n, Bijection::Canonical, Representation::Explicit).map_err(|e| e.to_string())?;
            sup_rect_fast(&m)
        } else {
            let m = KsMeasure::build(n, Bijection::Canonical, Representation::Implicit).map_err(|e| e.to_string())?;
            sup_rect_fast(&m)
        }
        .map_err(|e| e.to_string())?;
        let v = certify_bound2(&rep, &pi);
        ensure(v == Verdict::Pass, || format!("n={n}: {v:?}"))?;
    }
    Ok("512 certified rows".into())
}

fn ac3() -> Check {
    let mut bijections = vec![Bijection::Canonical];
    bijections.extend((1..=10).map(|seed| Bijection::RowPermutation { seed: seed * 7919 }));
    let mut canonical = Vec::new();
    for n in 1..=4 {
        for &b in &bijections {
            let m = KsMeasure::build(n, b, Representation::Explicit).map_err(|e| e.to_string())?;
            let brute = sup_rect_bruteforce(&m).map_err(|e| e.to_string())?;
            let fast = sup_rect_fast(&m).map_err(|e| e.to_string())?;
            ensure(brute.sup == fast.sup, || format!("n={n} {b:?}: brute {} fast {}", brute.sup, fast.sup))?;
            if b == Bijection::Canonical {
                canonical.push(brute.sup.to_string());
            }
        }
    }
    Ok(format!("brute-force sups {}", canonical.join(", ")))
}

fn ac4() -> Check {
    let pi = PiEnclosure::published();
    for n in 1..=12 {
        let m = KsMeasure::build(n, Bijection::Canonical, Representation::Explicit).map_err(|e| e.to_string())?;
        let sup = tensor_sup_exact(&m).map_err(|e| e.to_string())?;
        let v = certify_bound3(n, &sup, &pi);
        ensure(v == Verdict::Pass, || format!("n={n}: bound3 {v:?}"))?;
        let rect = sup_rect_fast(&m).map_err(|e| e.to_string())?.sup;
        ensure(sup >= rect, || format!("n={n}: tensor sup below rectangle sup"))?;
        let ceiling = to_f64(&sup) * (1.0 + 1e-12);
        for seed in [1u64, 2, 3] {
            let probe = random_tensor_probe(&m, 10_000, seed).map_err(|e| e.to_string())?;
            ensure(probe <= ceiling, || format!("n={n} seed={seed}: probe {probe} above {sup}"))?;
        }
    }
    Ok("n=1..12".into())
}

fn ac5() -> Check {
    let pi = PiEnclosure::published();
    let ns = [1, 4, 16, 64, 256, 1024];
    let family = reference_family();
    ensure(family.len() == 5, || "family size".into())?;
    let mut at_1024 = Vec::new();
    for (i, h) in family.iter().enumerate() {
        ensure(h.norm_bound().is_one(), || format!("combo {i}: norm bound != 1"))?;
        let rows = decay_profile(h, &ns, &pi).map_err(|e| e.to_string())?;
        for r in &rows {
            ensure(r.pass, || format!("combo {i} n={}: not dominated", r.n))?;
        }
        for r in &rows {
            // |mu_n(h)|^2 n <= 4.5136^2, exactly
            let lhs = &r.value * &r.value * rat(r.n as i64, 1);
            ensure(lhs <= rat(45136, 10000) * rat(45136, 10000), || format!("combo {i} n={}: above 4.5136/sqrt(n)", r.n))?;
        }
        let v = rows.last().expect("six rows").value.clone();
        ensure(v < rat(15, 100), || format!("combo {i}: |mu_1024(h)| = {v} not below 0.15"))?;
        at_1024.push(format!("{:.4}", to_f64(&v)));
    }
    Ok(format!("|mu_1024(h)| = {}", at_1024.join(", ")))
}

fn ac6() -> Check {
    let pi = PiEnclosure::published();
    let cert = extract(1u64.., 8).map_err(|e| e.to_string())?;
    let want = [1u64, 16, 81, 256, 625, 1296, 2401, 4096];
    ensure(cert.indices() == want, || format!("indices {:?}", cert.indices()))?;
    ensure(cert.verify(), || "certificate does not verify".into())?;
    let basel: Rational = (1..=8i64).map(|n| rat(1, n * n)).sum();
    ensure(*cert.partial_sum_upper() == basel, || "P_8 differs from sum 1/n^2".into())?;
    ensure(cert.within_basel(&pi), || "P_8 + 1/8 not within pi^2/6 + 1/8".into())?;
    let report = strongly_normal_report(&cert, &reference_family(), 8, &pi).map_err(|e| e.to_string())?;
    for row in &report.rows {
        ensure(row.verdict == Verdict::Pass, || format!("combo {} not dominated", row.combo))?;
        ensure(row.partial_sums.len() == 8, || "prefix count".into())?;
    }
    ensure(report.rows.len() == 5, || "row count".into())?;
    Ok("indices 1..4096, 5 combos dominated at every prefix".into())
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

/// Generators over horizon 30: perturbed unit vectors, some sums of them
/// (so the family is dependent), shuffled.
fn random_generators(rng: &mut ChaCha8Rng) -> Vec<SparseSeq> {
    let h = 30;
    let mut gens: Vec<SparseSeq> = (1..=h)
        .map(|k| {
            let mut entries = vec![(k, rat(rng.gen_range(1..=3), rng.gen_range(1..=2)))];
            for _ in 0..2 {
                entries.push((rng.gen_range(1..=h), random_rational(rng)));
            }
            SparseSeq::new(entries).expect("1-based")
        })
        .collect();
    for _ in 0..5 {
        let i = rng.gen_range(0..gens.len());
        let j = rng.gen_range(0..gens.len());
        let sum: Vec<Rational> = gens[i].to_dense(h).iter().zip(gens[j].to_dense(h)).map(|(a, b)| a + b).collect();
        gens.push(SparseSeq::from_dense(&sum));
    }
    for i in (1..gens.len()).rev() {
        gens.swap(i, rng.gen_range(0..=i));
    }
    gens
}

fn ac7() -> Check {
    let (n, h) = (20, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut sets = 0;
    let mut attempts = 0;
    while sets < 50 {
        attempts += 1;
        ensure(attempts <= 500, || "could not draw 50 dense generator sets".into())?;
        let g = GeneratorSet::finite(random_generators(&mut rng));
        if !density_check(&g, n).map_err(|e| e.to_string())?.is_dense() {
            continue;
        }
        sets += 1;
        let basis = build_triangular_basis(&g, n, h).map_err(|e| e.to_string())?;
        for i in 1..=n {
            ensure(basis.recombine(&g, i) == basis.vectors()[i - 1].coords, || format!("set {sets}: b_{i} not in span"))?;
            for k in 1..=i {
                let want = if k == i { Rational::one() } else { Rational::zero() };
                ensure(*basis.coord(i, k) == want, || format!("set {sets}: pi_{k}(b_{i})"))?;
            }
        }
        let funcs = coefficient_functionals(&basis);
        for (i, w) in funcs.iter().enumerate() {
            for (j, b) in basis.vectors().iter().enumerate() {
                let want = if i == j { Rational::one() } else { Rational::zero() };
                ensure(apply_functional(w, &b.coords) == want, || format!("set {sets}: b_{}^*(b_{})", i + 1, j + 1))?;
            }
        }
        for t in 0..10 {
            let y: Vec<Rational> = (0..h).map(|_| random_rational(&mut rng)).collect();
            let exp = expand(&y, &basis).map_err(|e| e.to_string())?;
            let rep = verify_stabilization(&exp, &basis, &y, n);
            ensure(rep.all_true, || format!("set {sets} target {t}: grid has a false entry"))?;
        }
    }
    Ok(format!("50 dense sets ({attempts} drawn), 500 targets"))
}

fn random_section(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    (0..rows).map(|_| (0..cols).map(|_| random_rational(rng)).collect()).collect()
}

fn ac8() -> Check {
    for n in 1..=8 {
        for extra in [0, 4] {
            let rows: Vec<Vec<Rational>> = (0..n)
                .map(|i| {
                    (0..n + extra)
                        .map(|j| if i == j { rat(i as i64 + 1, 1) } else { Rational::zero() })
                        .collect()
                })
                .collect();
            let k = basis_constant(&FiniteSection::new(rows).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?
                .k;
            ensure(k.is_one(), || format!("identity-like {n}x{}: K = {k}", n + extra))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut done = 0;
    let mut worst = Rational::one();
    while done < 100 {
        let rows = rng.gen_range(1..=7);
        let cols = rng.gen_range(rows + 1..=12);
        let base = random_section(&mut rng, rows + 1, cols);
        let short = FiniteSection::new(base[..rows].to_vec()).map_err(|e| e.to_string())?;
        let long = FiniteSection::new(base.clone()).map_err(|e| e.to_string())?;
        if short.degeneracy().is_some() || long.degeneracy().is_some() {
            continue;
        }
        done += 1;
        let a = basis_constant(&short).map_err(|e| e.to_string())?;
        let b = basis_constant(&long).map_err(|e| e.to_string())?;
        ensure(a.k >= Rational::one(), || format!("section {done}: K < 1"))?;
        ensure(b.k >= a.k, || format!("section {done}: K decreased on appending"))?;
        let i = rng.gen_range(0..=rows);
        let lambda = rat(rng.gen_range(1..=9), rng.gen_range(1..=9));
        let mut scaled = base;
        for v in scaled[i].iter_mut() {
            *v *= &lambda;
        }
        let c = basis_constant(&FiniteSection::new(scaled).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(c.projection_norms == b.projection_norms, || format!("section {done}: rescaling changed norms"))?;
        if b.k > worst {
            worst = b.k;
        }
    }
    Ok(format!("100 random sections, largest K {:.3}", to_f64(&worst)))
}

fn ac9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_kslab");
    let mut outputs = Vec::new();
    let runs: [(&str, Option<&str>); 5] = [("a", None), ("b", None), ("c", None), ("t1", Some("1")), ("t4", Some("4"))];
    for (tag, threads) in runs {
        let out = dir.path().join(format!("verify_{tag}.json"));
        let mut cmd = Command::new(bin);
        cmd.args(["verify", "--n-max", "12", "--out"]).arg(&out);
        match threads {
            Some(t) => cmd.env("KSLAB_THREADS", t),
            None => cmd.env_remove("KSLAB_THREADS"),
        };
        let status = cmd.status().map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), || format!("run {tag}: exit {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    for (i, o) in outputs.iter().enumerate().skip(1) {
        ensure(*o == outputs[0], || format!("report {} differs from the first", i + 1))?;
    }
    Ok(format!("5 identical reports, {} bytes", outputs[0].len()))
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "AC1", title: "total variation and support", limit: Duration::from_secs(5), run: ac1 },
        Criterion { id: "AC2", title: "rectangle bounds n=1..512", limit: Duration::from_secs(60), run: ac2 },
        Criterion { id: "AC3", title: "fast path equals brute force", limit: Duration::from_secs(120), run: ac3 },
        Criterion { id: "AC4", title: "tensor bounds n=1..12", limit: Duration::from_secs(600), run: ac4 },
        Criterion { id: "AC5", title: "decay on the reference family", limit: Duration::from_secs(600), run: ac5 },
        Criterion { id: "AC6", title: "strongly normal certificate", limit: Duration::from_secs(600), run: ac6 },
        Criterion { id: "AC7", title: "density and triangular bases", limit: Duration::from_secs(60), run: ac7 },
        Criterion { id: "AC8", title: "basis constant diagnostics", limit: Duration::from_secs(600), run: ac8 },
        Criterion { id: "AC9", title: "deterministic verify reports", limit: Duration::from_secs(600), run: ac9 },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.limit => Err(format!("took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {} {} ({elapsed:.2?}): {detail}", c.id, c.title),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {} ({elapsed:.2?}): {why}", c.id, c.title);
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
