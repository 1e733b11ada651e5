//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use ebwtpc::cli::{self, PipelineConfig};
use ebwtpc::index::{build_index, build_index_naive, invert_ebwt};
use ebwtpc::sequences::{augment_with_rc, complement, reverse_complement, ReadCollection, Sample};
use ebwtpc::simulate::{random_genome, simulate_reads, ContextOracle, ReadOrigin, ReadParams, Variant};
use ebwtpc::snpcall::CallPair;
use ebwtpc::stats::{condition2_best_bound, poisson_cdf, poisson_pmf, PoissonModel};
use ebwtpc::validate::theory::{analyze_positions, spaced_positions, PositionCluster, TruthClusters};
use ebwtpc::validate::{score_calls_with, Matcher, TruthGrid};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_collection(rng: &mut ChaCha8Rng, max_reads: usize, max_len: usize) -> ReadCollection {
    let m = rng.random_range(1..=max_reads);
    let seqs: Vec<Vec<u8>> = (0..m)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len).map(|_| b"ACGT"[rng.random_range(0..4)]).collect()
        })
        .collect();
    ReadCollection::from_sequences(seqs, Sample::First).unwrap()
}

fn index_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let c = random_collection(&mut rng, 50, 40);
        let fast = build_index(&c).map_err(|e| e.to_string())?;
        let naive = build_index_naive(&c).map_err(|e| e.to_string())?;
        if fast != naive {
            return Err(format!("collection {case} differs from the naive index"));
        }
    }
    Ok("1000 collections identical on gsa/ebwt/lcp".into())
}

fn ebwt_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut largest = 0;
    for case in 0..200 {
        let c = random_collection(&mut rng, 100, 99);
        largest = largest.max(c.total_length() + c.len());
        let idx = build_index(&c).map_err(|e| e.to_string())?;
        let back = invert_ebwt(&idx).map_err(|e| e.to_string())?;
        if !back.sequences().eq(c.sequences()) {
            return Err(format!("collection {case} not recovered"));
        }
    }
    Ok(format!("200 collections recovered, largest P = {largest}"))
}

/// One simulated sample shared by the cluster-theory criteria.
struct TheoryRun {
    model: PoissonModel,
    clusters: Vec<PositionCluster>,
    ambiguous: usize,
}

fn theory_run() -> TheoryRun {
    let (n, r, eps, coverage) = (200_000, 100, 0.0012, 30.0);
    let g = random_genome(n, 3);
    let m = ReadParams::reads_for_coverage(coverage, n, r);
    let params = ReadParams { reads: m, read_len: r, epsilon: eps, seed: 4 };
    let (reads, origins): (ReadCollection, Vec<ReadOrigin>) = simulate_reads(&g, &params, Sample::First).unwrap();
    let aug = augment_with_rc(&reads);
    let idx = build_index(&aug).unwrap();
    let truth = TruthClusters::new(&idx, &aug, &origins, r).unwrap();
    let oracle = ContextOracle::new(&g, true).unwrap();
    let positions = spaced_positions(n, 95, r);
    let (clusters, ambiguous) = analyze_positions(&truth, &g, &oracle, &positions).unwrap();
    let model = PoissonModel::new(m as f64, n as f64, r as f64, eps, 16).unwrap();
    TheoryRun { model, clusters, ambiguous }
}

fn lambda_at(model: &PoissonModel, k: usize) -> f64 {
    model.with_context_len(k as u32).unwrap().lambda()
}

/// Chi-square goodness of fit of counts `x_i ~ Poisson(mu_i)`: expected bin
/// counts sum the per-position pmfs, adjacent bins merge until each expects
/// at least five.
fn chi_square_heterogeneous(xs: &[u32], mus: &[f64]) -> (f64, usize, f64) {
    let top = *xs.iter().max().unwrap() as usize + 1;
    let mut observed = vec![0.0; top + 1];
    let mut expected = vec![0.0; top + 1];
    for (&x, &mu) in xs.iter().zip(mus) {
        observed[x as usize] += 1.0;
        let mut below = 0.0;
        for (j, e) in expected.iter_mut().enumerate().take(top) {
            let p = poisson_pmf(mu, j as u64);
            *e += p;
            below += p;
        }
        expected[top] += (1.0 - below).max(0.0);
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for j in 0..=top {
        o += observed[j];
        e += expected[j];
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        let last = bins.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = bins.len() - 1;
    let p = ChiSquared::new(df as f64).unwrap().sf(stat);
    (stat, df, p)
}

fn cluster_size_fit(run: &TheoryRun) -> Outcome {
    let n = run.clusters.len();
    if n < 2000 {
        return Err(format!("only {n} non-ambiguous positions"));
    }
    let xs: Vec<u32> = run.clusters.iter().map(|c| c.copies).collect();
    let mus: Vec<f64> = run.clusters.iter().map(|c| lambda_at(&run.model, c.k)).collect();
    let mean_x = xs.iter().map(|&x| f64::from(x)).sum::<f64>() / n as f64;
    let mean_mu = mus.iter().sum::<f64>() / n as f64;
    let rel = (mean_x - mean_mu).abs() / mean_mu;
    let (stat, df, p) = chi_square_heterogeneous(&xs, &mus);
    check(
        rel <= 0.05 && p >= 0.01,
        format!(
            "{n} positions ({} ambiguous), mean size {mean_x:.3} vs lambda {mean_mu:.3} (rel {rel:.4}), chi2 {stat:.2} df {df} p {p:.4}",
            run.ambiguous
        ),
    )
}

fn unimodal_shape(run: &TheoryRun) -> Outcome {
    let good: Vec<&PositionCluster> = run.clusters.iter().filter(|c| c.condition1 && c.condition2).collect();
    let unimodal = good.iter().filter(|c| c.unimodal).count();
    let frac = unimodal as f64 / good.len().max(1) as f64;
    check(
        !good.is_empty() && frac >= 0.99,
        format!("{unimodal}/{} clusters meeting both conditions are unimodal ({:.4})", good.len(), frac),
    )
}

fn bound_numeric() -> Outcome {
    let (n, r) = (1_000_000.0, 100.0);
    let model = PoissonModel::new(44.0 * n / r, n, r, 0.0012, 11).unwrap();
    let (delta, bound) = condition2_best_bound(&model);
    check(bound >= 0.93, format!("max bound {bound:.4} at delta {delta} (lambda {:.3})", model.lambda()))
}

fn bound_monte_carlo(run: &TheoryRun) -> Outcome {
    let n = run.clusters.len() as f64;
    let hits = run.clusters.iter().filter(|c| c.condition2).count() as f64;
    let freq = hits / n;
    let bound = run
        .clusters
        .iter()
        .map(|c| condition2_best_bound(&run.model.with_context_len(c.k as u32).unwrap()).1)
        .sum::<f64>()
        / n;
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.99);
    let slack = z * (bound * (1.0 - bound) / n).sqrt();
    check(
        freq >= bound - slack,
        format!("distinct leftmost errors in {freq:.4} of clusters vs mean bound {bound:.4} (99% slack {slack:.4})"),
    )
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = PipelineConfig {
        genome_len: Some(100_000),
        coverage1: 30.0,
        coverage2: 22.0,
        density: 1e-3,
        nonisolated_fraction: 0.2,
        epsilon: 0.0012,
        seed: 42,
        work_dir: dir.path().join("a"),
        ..PipelineConfig::default()
    };
    let report = cli::run_all(&cfg).map_err(|e| format!("{e:#}"))?;
    cfg.work_dir = dir.path().join("b");
    cfg.threads = 4;
    let again = cli::run_all(&cfg).map_err(|e| format!("{e:#}"))?;
    let calls_a = std::fs::read(dir.path().join("a/calls.fa")).map_err(|e| e.to_string())?;
    let calls_b = std::fs::read(dir.path().join("b/calls.fa")).map_err(|e| e.to_string())?;
    let deterministic = report == again && calls_a == calls_b;
    check(
        report.sensitivity() >= 0.85 && report.precision() >= 0.90 && deterministic,
        format!(
            "TP {} FP {} FN {} sensitivity {:.4} precision {:.4} non-isolated {}/{}, rerun identical: {deterministic}",
            report.tp,
            report.fp,
            report.fn_,
            report.sensitivity(),
            report.precision(),
            report.nonisolated_found,
            report.nonisolated_total
        ),
    )
}

/// `mu` as `a / 2^b` with integers `a`, `b`.
fn dyadic(mu: f64) -> (BigInt, u32) {
    let bits = mu.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | 1 << 52, exp - 1075) };
    if e >= 0 {
        (BigInt::from(mant) << e as usize, 0)
    } else {
        (BigInt::from(mant), (-e) as u32)
    }
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 { (num << shift as usize) / den } else { num / (den << (-shift) as usize) };
    let q: f64 = q.to_string().parse().unwrap();
    q * 2f64.powi(-shift as i32)
}

fn poisson_exact() -> Outcome {
    let mus = [0.01, 0.5, 1.0, 2.5, 5.0, 10.0, 17.3, 24.3, 30.0, 44.0, 50.0, 63.7, 75.0, 99.5, 100.0];
    let mut worst = (0.0f64, 0.0, 0);
    for &mu in &mus {
        let (a, b) = dyadic(mu);
        let two_b = BigInt::from(1) << b as usize;
        // Partial sums of mu^i / i! over the common denominator 2^(b z) z!.
        let mut num = BigInt::from(1);
        let mut den = BigInt::from(1);
        let mut power = BigInt::from(1);
        for z in 0..=300u64 {
            if z > 0 {
                power *= &a;
                num = num * &two_b * z + &power;
                den = den * &two_b * z;
            }
            let exact = ratio_to_f64(&num, &den) * (-mu).exp();
            let diff = (poisson_cdf(mu, z) - exact.min(1.0)).abs();
            if diff > worst.0 {
                worst = (diff, mu, z);
            }
        }
    }
    check(
        worst.0 <= 1e-12,
        format!("max |cdf - exact| = {:.3e} (mu {}, z {}) over {} means, z <= 300", worst.0, worst.1, worst.2, mus.len()),
    )
}

fn other_base(rng: &mut ChaCha8Rng, b: u8) -> u8 {
    loop {
        let c = b"ACGT"[rng.random_range(0..4)];
        if c != b {
            return c;
        }
    }
}

fn pair_at(g: &[u8], pos: usize, alt: u8, l: usize, r: usize, reverse: bool, swap: bool) -> CallPair {
    let (mut first, idx) = if reverse {
        (reverse_complement(&g[pos - r..pos + l]).unwrap(), l - 1)
    } else {
        (g[pos + 1 - l..pos + 1 + r].to_vec(), l - 1)
    };
    let mut second = first.clone();
    second[idx] = if reverse { complement(alt).unwrap() } else { alt };
    if swap {
        std::mem::swap(&mut first, &mut second);
    }
    CallPair { name: format!("SNP_{pos}"), first, second, line: 0 }
}

fn validator_scenarios() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for scenario in 0..120 {
        let n = rng.random_range(4_000..12_000);
        let g = random_genome(n, 100 + scenario);
        // Sites on a 100-base lattice keep every context window disjoint.
        let sites: Vec<usize> = (1..n / 100 - 1).map(|s| s * 100 + rng.random_range(0..40)).collect();
        let mut truth = Vec::new();
        let mut decoys = Vec::new();
        for &p in &sites {
            match rng.random_range(0..3) {
                0 => truth.push(Variant { pos: p, reference: g[p], alt: other_base(&mut rng, g[p]) }),
                1 => decoys.push(p),
                _ => {}
            }
        }
        let mut calls = Vec::new();
        let mut tp = 0;
        for v in &truth {
            if rng.random_bool(0.6) {
                tp += 1;
                let (l, r) = (rng.random_range(12..=20), rng.random_range(10..=30));
                let swap = rng.random_bool(0.5);
                match rng.random_range(0..3) {
                    0 => calls.push(pair_at(&g, v.pos, v.alt, l, r, false, swap)),
                    1 => calls.push(pair_at(&g, v.pos, v.alt, l, r, true, swap)),
                    _ => {
                        calls.push(pair_at(&g, v.pos, v.alt, l, r, false, swap));
                        calls.push(pair_at(&g, v.pos, v.alt, l, r, true, swap));
                    }
                }
            }
        }
        let mut fp = 0;
        for &p in &decoys {
            let alt = other_base(&mut rng, g[p]);
            calls.push(pair_at(&g, p, alt, 20, 30, rng.random_bool(0.5), false));
            fp += 1;
        }
        // A true site with the wrong alternative allele is also spurious.
        if let Some(v) = truth.first() {
            let wrong = b"ACGT".iter().copied().find(|&b| b != v.reference && b != v.alt).unwrap();
            calls.push(pair_at(&g, v.pos, wrong, 20, 30, false, false));
            fp += 1;
        }
        let grid = TruthGrid::build(&truth, &g, 20, 30).map_err(|e| e.to_string())?;
        let a = score_calls_with(&grid, &calls, Matcher::Grid);
        let b = score_calls_with(&grid, &calls, Matcher::BruteForce);
        let expected = (tp, fp, truth.len() as u64 - tp);
        if a != b || (a.tp, a.fp, a.fn_) != expected {
            return Err(format!(
                "scenario {scenario}: grid ({}, {}, {}), scan ({}, {}, {}), expected {expected:?}",
                a.tp, a.fp, a.fn_, b.tp, b.fp, b.fn_
            ));
        }
    }
    Ok("120 scenarios scored exactly; grid and scan agree".into())
}

fn linear_pass() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = PipelineConfig {
        genome_len: Some(30_000),
        buffer_cap: 1000,
        work_dir: dir.path().to_path_buf(),
        ..PipelineConfig::default()
    };
    let sim = cli::run_simulate(&cfg, dir.path()).map_err(|e| format!("{e:#}"))?;
    let prefix = dir.path().join("idx");
    let meta = cli::run_index(&sim.reads1, &sim.reads2, &prefix).map_err(|e| format!("{e:#}"))?;
    let clusters = dir.path().join("clusters.bin");
    let n_clusters = cli::run_cluster(&cfg, &prefix, &clusters).map_err(|e| format!("{e:#}"))?;
    let s = cli::run_call(&cfg, &prefix, &clusters, &dir.path().join("calls.fa")).map_err(|e| format!("{e:#}"))?;
    let once = [s.gsa, s.ebwt, s.lcp].iter().all(|a| a.items_read == a.len)
        && s.clusters_read == n_clusters
        && s.clusters_in_file == Some(n_clusters)
        && s.read_records == meta.indexed_reads
        && s.reads_passes == 1;
    check(
        once,
        format!(
            "gsa {}/{}, ebwt {}/{}, lcp {}/{}, clusters {}/{}, reads {}/{} in {} pass(es), {} coordinates spilled",
            s.gsa.items_read,
            s.gsa.len,
            s.ebwt.items_read,
            s.ebwt.len,
            s.lcp.items_read,
            s.lcp.len,
            s.clusters_read,
            n_clusters,
            s.read_records,
            meta.indexed_reads,
            s.reads_passes,
            s.buffer.spilled
        ),
    )
}

fn report(id: &str, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; exceeded {}s limit", limit.as_secs())),
        Err(d) => (false, d),
    };
    println!("{} {id} {name}: {detail} [{:.1}s]", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn main() {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let mut ok = true;
    ok &= report("1", "index oracle equivalence", mins(1), index_oracle);
    ok &= report("2", "eBWT round trip", Duration::from_secs(30), ebwt_round_trip);
    let start = Instant::now();
    let run = theory_run();
    let setup = start.elapsed();
    println!("     shared simulation for 3, 4 and 5b built in {:.1}s", setup.as_secs_f64());
    ok &= report("3", "cluster size distribution", mins(5).saturating_sub(setup), || cluster_size_fit(&run));
    ok &= report("4", "cluster LCP shape", mins(5).saturating_sub(setup), || unimodal_shape(&run));
    ok &= report("5a", "error-pattern bound", mins(10), bound_numeric);
    ok &= report("5b", "error-pattern bound, Monte Carlo", mins(10).saturating_sub(setup), || bound_monte_carlo(&run));
    ok &= report("6", "end-to-end calling", mins(10), end_to_end);
    ok &= report("7", "Poisson numerics", mins(10), poisson_exact);
    ok &= report("8", "validator correctness", mins(10), validator_scenarios);
    ok &= report("9", "single-pass call phase", mins(10), linear_pass);
    if !ok {
        std::process::exit(1);
    }
}
