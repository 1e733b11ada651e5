use proptest::prelude::*;

use super::theory::{analyze_positions, spaced_positions, TruthClusters};
use super::*;
use crate::index::build_index;
use crate::sequences::{augment_with_rc, Sample};
use crate::simulate::{random_genome, ReadOrigin, simulate_reads, ContextOracle, MutationPlan, ReadParams};
use crate::snpcall::tests::fixture;
use crate::snpcall::{call_snps, read_calls, write_calls};

fn variant(g: &[u8], pos: usize, alt: u8) -> Variant {
    Variant { pos, reference: g[pos], alt }
}

fn other(b: u8) -> u8 {
    if b == b'A' {
        b'C'
    } else {
        b'A'
    }
}

/// A call pair as the caller would print it for a forward-strand SNP.
fn forward_pair(g: &[u8], v: &Variant, l: usize, r: usize) -> CallPair {
    let mut first = g[v.pos + 1 - l..=v.pos].to_vec();
    first.extend_from_slice(&g[v.pos + 1..v.pos + 1 + r]);
    let mut second = first.clone();
    second[l - 1] = v.alt;
    CallPair { name: "SNP_1".into(), first, second, line: 1 }
}

fn rc_pair(g: &[u8], v: &Variant, l: usize, r: usize) -> CallPair {
    let first = reverse_complement(&g[v.pos - r..v.pos + l]).unwrap();
    let mut second = first.clone();
    second[l - 1] = complement(v.alt).unwrap();
    CallPair { name: "SNP_2".into(), first, second, line: 3 }
}

#[test]
fn one_snp_gives_two_points() {
    let g = random_genome(400, 1);
    let v = variant(&g, 200, other(g[200]));
    let grid = TruthGrid::build(&[v], &g, 20, 30).unwrap();
    let pts = grid.points();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[0].strand, Strand::Forward);
    assert_eq!((pts[0].from, pts[0].to), (v.reference, v.alt));
    assert_eq!(pts[0].right, &g[201..231]);
    let mut left: Vec<u8> = g[181..200].to_vec();
    left.reverse();
    assert_eq!(pts[0].left_rev, left);
    assert_eq!(pts[1].strand, Strand::Reverse);
    assert_eq!(pts[1].from, complement(v.reference).unwrap());
    assert_eq!(pts[1].right, reverse_complement(&g[170..200]).unwrap());
    let mut rc_left = reverse_complement(&g[201..220]).unwrap();
    rc_left.reverse();
    assert_eq!(pts[1].left_rev, rc_left);
}

#[test]
fn edge_snps_are_skipped() {
    let g = random_genome(400, 2);
    let vs = [variant(&g, 5, other(g[5])), variant(&g, 200, other(g[200])), variant(&g, 390, other(g[390]))];
    let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
    assert_eq!(grid.skipped(), 2);
    assert_eq!(grid.points().len(), 2);
}

#[test]
fn every_point_finds_itself() {
    let g = random_genome(20_000, 3);
    let vs: Vec<Variant> = (100..19_900).step_by(97).map(|p| variant(&g, p, other(g[p]))).collect();
    let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
    for (id, pt) in grid.points().iter().enumerate() {
        let hits = grid.query(&pt.right, &pt.left_rev);
        assert!(hits.contains(&(id as u32)));
        assert_eq!(hits, grid.query_brute_force(&pt.right, &pt.left_rev));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_query_matches_scan(seed in 0u64..1000, picks in prop::collection::vec((0usize..400, 0usize..31, 0usize..20), 1..20)) {
        // A short genome over a skewed alphabet so that prefixes collide.
        let g: Vec<u8> = random_genome(3000, seed).into_iter().map(|b| if b == b'T' { b'A' } else { b }).collect();
        let vs: Vec<Variant> = (40..2960).step_by(7).map(|p| variant(&g, p, other(g[p]))).collect();
        let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
        for (p, rl, ll) in picks {
            let pt = &grid.points()[p % grid.points().len()];
            let right = &pt.right[..rl.min(pt.right.len())];
            let left = &pt.left_rev[..ll.min(pt.left_rev.len())];
            prop_assert_eq!(grid.query(right, left), grid.query_brute_force(right, left));
        }
    }
}

#[test]
fn tp_fp_fn_counts() {
    let g = random_genome(2000, 4);
    let vs = [variant(&g, 500, other(g[500])), variant(&g, 1200, other(g[1200]))];
    let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
    // Found on the forward strand, missed entirely, plus one spurious call.
    let hit = forward_pair(&g, &vs[0], 20, 30);
    let fake_v = variant(&g, 800, other(g[800]));
    let fake = forward_pair(&g, &fake_v, 20, 30);
    let report = score_calls(&grid, &[hit, fake]);
    assert_eq!((report.tp, report.fp, report.fn_), (1, 1, 1));
    assert_eq!((report.found_forward, report.found_reverse), (1, 0));
    assert_eq!(report.sensitivity(), 0.5);
    assert_eq!(report.precision(), 0.5);
}

#[test]
fn strands_merge_and_either_direction_matches() {
    let g = random_genome(2000, 5);
    let v = variant(&g, 700, other(g[700]));
    let grid = TruthGrid::build(&[v], &g, 20, 30).unwrap();
    let fwd = forward_pair(&g, &v, 20, 30);
    let rc = rc_pair(&g, &v, 20, 30);
    let report = score_calls(&grid, &[fwd.clone(), rc.clone()]);
    assert_eq!((report.tp, report.fp, report.fn_), (1, 0, 0));
    assert_eq!((report.found_forward, report.found_reverse), (1, 1));
    // Samples swapped: the mutated genome's contexts equal the reference's.
    let swapped = CallPair { first: fwd.second, second: fwd.first, ..fwd };
    let report = score_calls(&grid, &[swapped]);
    assert_eq!((report.tp, report.fp), (1, 0));
    // A call shorter than the stored contexts still matches by prefix.
    let short = forward_pair(&g, &v, 5, 4);
    assert_eq!(score_calls(&grid, &[short]).tp, 1);
}

#[test]
fn wrong_alt_or_context_is_false_positive() {
    let g = random_genome(2000, 6);
    let v = variant(&g, 700, other(g[700]));
    let grid = TruthGrid::build(&[v], &g, 20, 30).unwrap();
    let mut wrong_alt = forward_pair(&g, &v, 20, 30);
    wrong_alt.second[19] = b"ACGT".iter().copied().find(|&b| b != v.reference && b != v.alt).unwrap();
    let mut wrong_ctx = forward_pair(&g, &v, 20, 30);
    wrong_ctx.first[30] = other(wrong_ctx.first[30]);
    wrong_ctx.second[30] = wrong_ctx.first[30];
    let report = score_calls(&grid, &[wrong_alt, wrong_ctx]);
    assert_eq!((report.tp, report.fp, report.fn_), (0, 2, 1));
}

#[test]
fn nonisolated_pair_counts() {
    let g = random_genome(3000, 7);
    let vs = [variant(&g, 1000, other(g[1000])), variant(&g, 1010, other(g[1010])), variant(&g, 2000, other(g[2000]))];
    let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
    let mut mutated = g.clone();
    for v in &vs {
        mutated[v.pos] = v.alt;
    }
    // Sample 2 carries both alleles; the candidate at the second SNP sees the
    // first one in its left context.
    let first = g[991..1041].to_vec();
    let second = mutated[991..1041].to_vec();
    let pair = CallPair { name: "SNP_1".into(), first, second, line: 1 };
    assert_eq!(candidates(&pair).len(), 2);
    let report = score_calls(&grid, &[pair]);
    assert_eq!(report.nonisolated_total, 2);
    assert_eq!(report.nonisolated_found, 2);
    assert_eq!((report.tp, report.fp, report.fn_), (2, 0, 1));
}

#[test]
fn candidates_cover_differing_columns() {
    let pair = CallPair { name: "x".into(), first: b"ACGTACG".to_vec(), second: b"ACCTAGGTT".to_vec(), line: 1 };
    let c = candidates(&pair);
    assert_eq!(c.len(), 2);
    assert_eq!(c[0].allele, [b'G', b'C']);
    assert_eq!(c[0].left, [&b"AC"[..], &b"AC"[..]]);
    assert_eq!(c[1].right, [&b"G"[..], &b"GTT"[..]]);
}

#[test]
fn caller_output_scores_with_grid_and_scan_alike() {
    let f = fixture(20_000, MutationPlan::random(2e-3), (25.0, 25.0), 0.001, 41);
    let (calls, _) = call_snps(&f.idx, &f.reads, &f.clusters, &f.params).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calls.fa");
    write_calls(std::fs::File::create(&path).unwrap(), &calls).unwrap();
    let pairs = read_calls(&path).unwrap();
    assert_eq!(pairs.len(), calls.len());
    let grid = TruthGrid::build(&f.variants, &f.genome, 20, 30).unwrap();
    let a = score_calls_with(&grid, &pairs, Matcher::Grid);
    let b = score_calls_with(&grid, &pairs, Matcher::BruteForce);
    assert_eq!(a, b);
    assert_eq!(a.tp + a.fn_, f.variants.len() as u64 - a.skipped);
    assert!(a.sensitivity() > 0.7, "{a}");
    assert!(a.precision() > 0.9, "{a}");
}

#[test]
fn report_formats() {
    let r = ValidationReport { tp: 3, fp: 1, fn_: 1, candidates: 4, calls: 4, ..Default::default() };
    let mut tsv = Vec::new();
    r.write_tsv(&mut tsv, "L=20\nR=30").unwrap();
    let tsv = String::from_utf8(tsv).unwrap();
    assert!(tsv.starts_with("# L=20\n# R=30\nTP\tFP\tFN"));
    assert!(tsv.contains("3\t1\t1\t0.7500\t0.7500"));
    assert!(r.to_string().contains("75.00%"));
}

/// Forward copies of `G[i]` whose next `k` bases carry no error, counted
/// straight from the read origins.
fn expected_copies(origins: &[ReadOrigin], r: usize, i: usize, k: usize) -> u32 {
    origins
        .iter()
        .filter(|o| {
            o.genome_pos <= i
                && o.genome_pos + r > i + k
                && !o
                    .forward_errors(r)
                    .iter()
                    .any(|&e| (i + 1..=i + k).contains(&(o.genome_pos + e as usize)))
        })
        .count() as u32
}

#[test]
fn truth_clusters_count_copies() {
    let n = 20_000;
    let g = random_genome(n, 8);
    let params = ReadParams { reads: ReadParams::reads_for_coverage(20.0, n, 100), read_len: 100, epsilon: 0.002, seed: 9 };
    let (reads, origins) = simulate_reads(&g, &params, Sample::First).unwrap();
    let aug = augment_with_rc(&reads);
    let idx = build_index(&aug).unwrap();
    let truth = TruthClusters::new(&idx, &aug, &origins, 100).unwrap();
    let oracle = ContextOracle::new(&g, true).unwrap();
    let positions = spaced_positions(n, 101, 150);
    let (found, ambiguous) = analyze_positions(&truth, &g, &oracle, &positions).unwrap();
    assert_eq!(found.len() + ambiguous, positions.len());
    assert!(found.len() > positions.len() * 9 / 10);
    for pc in &found {
        assert_eq!(pc.copies, expected_copies(&origins, 100, pc.pos, pc.k), "position {}", pc.pos);
    }
    // Contexts are unique on both strands, so a row from elsewhere can only
    // enter the range through a sequencing error inside its first k bases.
    let m = origins.len();
    let errors_of = |rank: usize| -> Vec<u32> {
        let o = &origins[rank % m];
        if rank < m {
            o.errors.clone()
        } else {
            o.errors.iter().map(|&e| 99 - e).collect()
        }
    };
    for pc in found.iter().filter(|p| !p.condition1) {
        let mut foreign = 0;
        for row in pc.range.clone() {
            let s = idx.gsa()[row];
            let (rank, off) = (s.read as usize, s.offset as usize);
            let o = &origins[rank % m];
            let forward = (rank < m) == (o.strand == Strand::Forward);
            let at_locus = forward && o.genome_pos + off == pc.pos + 1;
            if !at_locus {
                foreign += 1;
                assert!(
                    errors_of(rank).iter().any(|&e| (off..off + pc.k).contains(&(e as usize))),
                    "error-free foreign row {row} at position {}",
                    pc.pos
                );
            }
        }
        assert_eq!(foreign, pc.foreign);
    }
}

#[test]
fn error_free_clusters_satisfy_both_conditions() {
    let n = 10_000;
    let g = random_genome(n, 10);
    let params = ReadParams { reads: ReadParams::reads_for_coverage(15.0, n, 100), read_len: 100, epsilon: 0.0, seed: 11 };
    let (reads, origins) = simulate_reads(&g, &params, Sample::First).unwrap();
    let aug = augment_with_rc(&reads);
    let idx = build_index(&aug).unwrap();
    let truth = TruthClusters::new(&idx, &aug, &origins, 100).unwrap();
    let oracle = ContextOracle::new(&g, true).unwrap();
    let (found, _) = analyze_positions(&truth, &g, &oracle, &spaced_positions(n, 53, 150)).unwrap();
    for pc in &found {
        assert!(pc.condition1 && pc.condition2 && pc.unimodal, "{pc:?}");
    }
}

#[test]
fn empty_call_set_misses_everything() {
    let g = random_genome(3000, 12);
    let vs: Vec<Variant> = (1..=10).map(|i| variant(&g, i * 250, other(g[i * 250]))).collect();
    let grid = TruthGrid::build(&vs, &g, 20, 30).unwrap();
    let report = score_calls(&grid, &[]);
    assert_eq!((report.tp, report.fp, report.fn_), (0, 0, 10));
    assert_eq!(report.sensitivity(), 0.0);
}
