//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities, tolerances and wall time. Exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p framelab --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use framelab::classify::{cfc_verdict, perturbation_cfc, riesz_fischer_margin, sigma_profile, FnSource};
use framelab::frame::{self, build_converter, canonical_parseval, frame_bounds};
use framelab::kaczmarz::{auxiliary_sequence, herr_weber_table, ExponentialSpace};
use framelab::measures::{
    gram_exponentials, singular_divergence_probe, CoefficientSpaceElement, ExponentialWindow, FourierCoefficients,
    MeasureModel,
};
use framelab::numerics::{eigvals_hermitian, singular_values, DenseMatrix, SpectralTolerance, C64};
use framelab::sequences::{
    gen_parseval_blocks, gen_weighted_basis, gen_weighted_std_basis_from_blocks, gen_zero_sum_subspace_basis, random,
    LadderLevel, LadderSchedule, SequenceSpec, TruncatedSequence, WeightFormula,
};
use framelab::{ClassifyOptions, Verdict};

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let el = t.elapsed();
    let in_time = el <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id:>2} {} {name}: {} [{:.2} s, limit {} s{}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        el.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" }
    );
    pass
}

fn tol() -> SpectralTolerance {
    SpectralTolerance::default()
}

fn weighted(w: WeightFormula) -> SequenceSpec {
    SequenceSpec::WeightedBasis { weight: w }
}

fn c1_parseval_conversion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random::gaussian_sequence(16, 40, &mut rng);
        let p = canonical_parseval(&s, &tol()).unwrap();
        let b = frame_bounds(&p, None, &tol()).unwrap();
        worst = worst.max((b.lower - 1.0).abs()).max((b.upper - 1.0).abs());
    }
    Outcome { pass: worst <= 1e-8, detail: format!("max |bound - 1| = {worst:.2e} over 20 frames (tol 1e-8)") }
}

fn c2_zero_sum_inequality() -> Outcome {
    let c = PI * PI / 6.0 + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for d in [16usize, 64, 256, 512] {
        let q = gen_zero_sum_subspace_basis(d).unwrap();
        for _ in 0..100 {
            let a = q.inner() * random::gaussian_vector(d - 1, &mut rng);
            let sum: C64 = a.iter().sum();
            assert!(sum.norm() < 1e-9 * a.norm());
            let lhs: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let rhs: f64 = a.iter().enumerate().skip(1).map(|(k, z)| (k * k) as f64 * z.norm_sqr()).sum();
            tightest = tightest.min(c * rhs / lhs);
            if lhs > c * rhs {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} violations in 400 vectors; min (pi^2/6+1) rhs/lhs = {tightest:.3}"),
    }
}

fn c3_block_restricted_bounds() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for d in [8usize, 16, 32] {
        let seq = gen_weighted_std_basis_from_blocks(d).unwrap();
        let blocks = gen_parseval_blocks(d).unwrap();
        let q = frame::analysis_matrix(&blocks).matrix().clone();
        let b = frame_bounds(&seq, Some(&q), &tol()).unwrap();
        // block k contributes 1 + (k-1)/k^2 on the span of its own vectors
        let oracle_hi = (1..d).map(|k| 1.0 + (k as f64 - 1.0) / (k * k) as f64).fold(1.0, f64::max);
        let ok = b.lower >= 1.0 - 1e-9
            && b.upper <= 1.25 + 1e-9
            && b.upper <= 2.0
            && (b.lower - 1.0).abs() < 1e-9
            && (b.upper - oracle_hi).abs() < 1e-9;
        pass &= ok;
        rows.push(format!("d={d}: [{:.12}, {:.12}]", b.lower, b.upper));
    }
    Outcome { pass, detail: format!("{} (target [1, 1.25], also <= 2)", rows.join(", ")) }
}

fn c4_cfc_triple() -> Outcome {
    let ladder: LadderSchedule = "d=16..512:x2".parse().unwrap();
    let union =
        SequenceSpec::Union { parts: vec![weighted(WeightFormula::NPlusOne), weighted(WeightFormula::InvNPlusOne)] };
    let specs = [weighted(WeightFormula::NPlusOne), weighted(WeightFormula::InvNPlusOne), union.clone()];
    let verdicts: Vec<Verdict> =
        specs.iter().map(|s| cfc_verdict(&sigma_profile(s, &ladder, 32).unwrap(), 0.5, 3).verdict).collect();
    let want = [Verdict::Holds, Verdict::Fails, Verdict::Holds];
    let top = union.truncate(LadderLevel::new(512)).unwrap();
    let margin = riesz_fischer_margin(&top, &tol()).unwrap();
    let sigma = singular_values(top.matrix());
    let sigma_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    // oracle: each coordinate n carries (n+1) e_n and (n+1)^-1 e_n
    let mut oracle: Vec<f64> = (1..=512).map(|m| ((m * m) as f64 + 1.0 / (m * m) as f64).sqrt()).collect();
    oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let oracle_err = sigma.iter().zip(&oracle).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    let pass = verdicts == want && margin < 0.1 && sigma_min >= 1.0 && oracle_err < 1e-12;
    Outcome {
        pass,
        detail: format!(
            "verdicts {:?} (want holds/fails/holds); union at d=512: RF margin {margin:.1e} < 0.1, min sigma {sigma_min:.4} >= 1, sigma vs oracle {oracle_err:.1e}",
            verdicts.iter().map(|v| v.as_str()).collect::<Vec<_>>()
        ),
    }
}

fn c5_converter_verification() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut ranks = Vec::new();
    let mut rank_ok = true;
    for d in [16usize, 32, 64, 128, 256] {
        let seq = gen_weighted_basis(&WeightFormula::N, d).unwrap();
        let q = gen_zero_sum_subspace_basis(d).unwrap();
        let c = build_converter(&seq, &q, &tol()).unwrap();
        worst_res = worst_res.max(c.parseval_residual);
        rank_ok &= c.rank == d && c.injective_flag;
        ranks.push(format!("{}/{}", c.rank, d));
    }
    Outcome {
        pass: worst_res <= 1e-8 && rank_ok,
        detail: format!(
            "parseval residual max {worst_res:.1e} (tol 1e-8); rank(B)/d = {} (required rank(B) = d; B maps into D, dim D = d-1)",
            ranks.join(" ")
        ),
    }
}

fn c6_exponential_gram() -> Outcome {
    let w = ExponentialWindow::symmetric(64).unwrap();
    let g = gram_exponentials(&MeasureModel::lebesgue(), w).unwrap();
    let mut id_err = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let t = if i == j { 1.0 } else { 0.0 };
            id_err = id_err.max((g[(i, j)] - C64::new(t, 0.0)).norm());
        }
    }
    let a = gram_exponentials(&MeasureModel::affine(0.5, 1.0).unwrap(), w).unwrap();
    let ev = eigvals_hermitian(&a, &tol()).unwrap();
    let (lo, hi) = (ev[0], *ev.last().unwrap());
    // oracle for the affine coefficients: midpoint quadrature
    let n = 40000;
    let quad = |k: i64| -> C64 {
        (0..n)
            .map(|j| {
                let x = (j as f64 + 0.5) / n as f64;
                C64::from_polar((0.5 + x) / n as f64, -2.0 * PI * k as f64 * x)
            })
            .sum()
    };
    let coef_err = (1..=5).map(|k| (quad(k) - a[(k as usize, 0)]).norm()).fold(0.0, f64::max);
    let pass = id_err <= 1e-12 && lo >= 0.5 - 1e-9 && hi <= 1.5 + 1e-9 && coef_err < 1e-8;
    Outcome {
        pass,
        detail: format!(
            "Lebesgue [-64,64] max |G - I| = {id_err:.1e}; affine 129x129 spectrum [{lo:.9}, {hi:.9}] in [0.5, 1.5]; coefficients vs quadrature {coef_err:.1e}"
        ),
    }
}

/// `2^depth` equal atoms at the means of the depth-level Cantor pieces.
fn cantor_ifs_oracle(k: i64, depth: u32) -> C64 {
    let count = 1usize << depth;
    let mut pos = vec![0.0f64; count];
    for j in 0..depth {
        let step = 2.0 / 3.0 * 3f64.powi(-(j as i32));
        for (idx, p) in pos.iter_mut().enumerate() {
            if idx >> j & 1 == 1 {
                *p += step;
            }
        }
    }
    let tail = 0.5 * 3f64.powi(-(depth as i32));
    let sum: C64 = pos.iter().map(|&x| C64::from_polar(1.0, -2.0 * PI * k as f64 * (x + tail))).sum();
    sum / count as f64
}

fn c7_singular_divergence() -> Outcome {
    let c = MeasureModel::middle_thirds_cantor();
    let fc = FourierCoefficients::new(c.clone());
    let m1 = fc.get(1);
    let mut self_sim = 0.0f64;
    let mut oracle = 0.0f64;
    for m in 0..=8u32 {
        let k = 3i64.pow(m);
        let v = fc.get(k);
        self_sim = self_sim.max((v.norm() - m1.norm()).abs());
        oracle = oracle.max((v - cantor_ifs_oracle(k, 18)).norm());
    }
    let one = CoefficientSpaceElement::exponential(ExponentialWindow::one_sided(0).unwrap(), 0).unwrap();
    let probe = singular_divergence_probe(&c, &one, 3usize.pow(8), false).unwrap();
    let need = 0.9 * m1.norm_sqr();
    let min_jump = (0..=8u32)
        .map(|m| {
            let at = 3usize.pow(m);
            probe.rows[at].1 - probe.rows[at - 1].1
        })
        .fold(f64::INFINITY, f64::min);
    let pass = self_sim <= 1e-8 && oracle <= 1e-8 && min_jump >= need && probe.divergent;
    Outcome {
        pass,
        detail: format!(
            "max ||mu(3^m)| - |mu(1)|| = {self_sim:.1e}, recursion vs IFS oracle {oracle:.1e} (tol 1e-8); min jump of T at 3^m = {min_jump:.4} >= {need:.4}; T(6561) = {:.3}",
            probe.rows.last().unwrap().1
        ),
    }
}

fn c8_herr_weber() -> Outcome {
    let space =
        ExponentialSpace::new(&MeasureModel::middle_thirds_cantor(), ExponentialWindow::one_sided(256).unwrap())
            .unwrap();
    let aux = auxiliary_sequence(&space, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ratios = Vec::new();
    let mut defect_ok = true;
    let mut monotone = true;
    for _ in 0..10 {
        let f = space.random_element(&mut rng);
        let fn2 = space.inner(&f, &f).unwrap().re;
        let rows = herr_weber_table(&space, &aux, &f).unwrap();
        ratios.push(rows[256].residual / rows[16].residual);
        defect_ok &= rows.iter().all(|r| r.parseval_defect >= -1e-6 * fn2);
        monotone &= rows.windows(2).all(|w| w[1].parseval_defect <= w[0].parseval_defect + 1e-9 * fn2);
    }
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let best = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: worst <= 0.5 && defect_ok && monotone,
        detail: format!(
            "residual(256)/residual(16) in [{best:.3}, {worst:.3}] (required <= 0.5); defect >= 0: {defect_ok}; defect nonincreasing: {monotone}"
        ),
    }
}

fn c9_paley_wiener() -> Outcome {
    let ladder: LadderSchedule = "d=16..128:x2".parse().unwrap();
    let on = weighted(WeightFormula::Constant(1.0));
    let perturbed = FnSource(|l: LadderLevel| {
        let mut rng = ChaCha8Rng::seed_from_u64(9_000 + l.d as u64);
        let u = random::random_unitary(l.d, &mut rng);
        let m = DenseMatrix::identity(l.d).into_inner() + u.into_inner() * C64::new(0.5, 0.0);
        Ok(TruncatedSequence::new(DenseMatrix::new(m)?))
    });
    let r = perturbation_cfc(&on, &perturbed, 1.0, &ladder, &ClassifyOptions::default()).unwrap();
    let bound_err = r.bessel_bounds.iter().map(|b| (b.1 - 0.25).abs()).fold(0.0, f64::max);
    let pass = bound_err <= 1e-10 && r.verdict == Verdict::Holds && r.cfc_of_g.verdict == Verdict::Holds;
    Outcome {
        pass,
        detail: format!(
            "max |B - 0.25| = {bound_err:.1e} (tol 1e-10); criterion {}; cfc of perturbed sequence {}",
            r.verdict.as_str(),
            r.cfc_of_g.verdict.as_str()
        ),
    }
}

fn c10_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut instances = 0;
    let mut failures = Vec::new();

    // interlacing: 50 nested pairs (appended vectors, appended zero coordinates)
    for i in 0..50 {
        let d = rng.random_range(3..12);
        let n = rng.random_range(2..16);
        let extra = rng.random_range(1..6);
        let big = random::gaussian_sequence(d, n + extra, &mut rng);
        let small = big.select(&(0..n).collect::<Vec<_>>()).unwrap();
        let (sb, ss) = (singular_values(big.matrix()), singular_values(small.matrix()));
        let grows = ss.iter().zip(&sb).all(|(a, b)| *b >= a - 1e-12 * (1.0 + a));
        let padded = singular_values(small.padded(d + extra).unwrap().matrix());
        let pad_ok = padded.iter().zip(&ss).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b));
        if !(grows && pad_ok) {
            failures.push(format!("interlacing #{i}"));
        }
        instances += 1;
    }
    // spectral agreement of F*F and FF*: 50 instances
    for i in 0..50 {
        let d = rng.random_range(2..14);
        let n = rng.random_range(2..14);
        let s = random::gaussian_sequence(d, n, &mut rng);
        let mut a = eigvals_hermitian(&frame::frame_operator(&s), &tol()).unwrap();
        let mut b = eigvals_hermitian(&frame::gram_matrix(&s), &tol()).unwrap();
        a.reverse();
        b.reverse();
        let k = d.min(n);
        if a[..k].iter().zip(&b[..k]).any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + x.abs())) {
            failures.push(format!("spectral agreement #{i}"));
        }
        instances += 1;
    }
    // adjoint identity <A f, c> = <f, A* c>: 40 instances
    for i in 0..40 {
        let d = rng.random_range(2..12);
        let n = rng.random_range(2..12);
        let s = random::gaussian_sequence(d, n, &mut rng);
        let a = frame::analysis_matrix(&s);
        let f = random::gaussian_vector(d, &mut rng);
        let c = random::gaussian_vector(n, &mut rng);
        let lhs = c.dotc(&a.apply(&f));
        let rhs = (a.synthesis().inner() * &c).dotc(&f);
        if (lhs - rhs).norm() > 1e-10 * (1.0 + lhs.norm()) {
            failures.push(format!("adjoint #{i}"));
        }
        instances += 1;
    }
    // subsequences of a Riesz truncation: 20 instances
    let parent = random::gaussian_sequence(24, 12, &mut rng);
    let pev = eigvals_hermitian(&frame::gram_matrix(&parent), &tol()).unwrap();
    let (pa, pb) = (pev[0], *pev.last().unwrap());
    for i in 0..20 {
        let mut idx: Vec<usize> = (0..12).filter(|_| rng.random_bool(0.5)).collect();
        if idx.is_empty() {
            idx.push(i % 12);
        }
        let sub = parent.select(&idx).unwrap();
        let ev = eigvals_hermitian(&frame::gram_matrix(&sub), &tol()).unwrap();
        if ev[0] < pa * (1.0 - 1e-9) || *ev.last().unwrap() > pb * (1.0 + 1e-9) {
            failures.push(format!("subsequence #{i}"));
        }
        instances += 1;
    }
    // reproducibility: 40 seeded runs repeated bit for bit
    for i in 0..40u64 {
        let once = |seed: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let s = random::gaussian_sequence(8, 12, &mut r);
            let p = canonical_parseval(&s, &tol()).unwrap();
            let mut bits: Vec<u64> = singular_values(p.matrix()).iter().map(|v| v.to_bits()).collect();
            bits.extend(p.matrix().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
            bits
        };
        if once(1000 + i) != once(1000 + i) {
            failures.push(format!("reproducibility #{i}"));
        }
        instances += 1;
    }
    Outcome {
        pass: failures.is_empty() && instances == 200,
        detail: format!("{instances} instances, {} failures {:?}", failures.len(), failures),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "Parseval conversion", s(1), c1_parseval_conversion),
        run(2, "zero-sum inequality", s(2), c2_zero_sum_inequality),
        run(3, "block-range restricted bounds", s(2), c3_block_restricted_bounds),
        run(4, "CFC verdict triple", s(10), c4_cfc_triple),
        run(5, "converter verification", s(5), c5_converter_verification),
        run(6, "exponential Gram matrices", s(3), c6_exponential_gram),
        run(7, "singular divergence probe", s(3), c7_singular_divergence),
        run(8, "Kaczmarz reconstruction trend", s(30), c8_herr_weber),
        run(9, "Paley-Wiener perturbation", s(2), c9_paley_wiener),
        run(10, "invariant suites", s(60), c10_invariants),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
