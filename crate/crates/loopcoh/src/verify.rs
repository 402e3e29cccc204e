//! The end-to-end verification suite: every structural identity the crate
//! is built to check, run degree by degree at fixed parameters and reported
//! as a pass/fail ledger.
//!
//! Each check compares two independently computed sides (kernel
//! intersections against the image subalgebra, the Cartan-derived Steenrod
//! action against the Wu formula, Gysin assembly against closed-form series,
//! computed presentations against the degree lists forced by the exceptional
//! isomorphisms), so a transcription error on either side shows up as a
//! mismatch rather than a silently shared bug.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::gysin::{GysinAssembly, GysinContext};
use crate::invariants::{
    factorial, faithfulness_check, invariant_report, matrix_group_closure, PermAction,
};
use crate::loops::{LoopElement, LoopModel};
use crate::steenrod::{wu_formula, BsoContext};

/// Default degree bound for the invariant-ring and loop-series checks.
pub const INVARIANT_MAX_DEGREE: usize = 20;
/// Default degree bound for the Gysin assembly check.
pub const GYSIN_MAX_DEGREE: usize = 24;
/// Largest n of the Wu-formula comparison.
pub const WU_MAX_N: usize = 8;
/// Largest n of the faithfulness enumeration.
pub const FAITHFUL_MAX_N: usize = 8;
/// n-range of the loop-series comparison.
pub const LOOP_MAX_N: usize = 7;
/// Number of random triples in the confluence check.
pub const CONFLUENCE_TRIALS: usize = 1000;
/// Default seed for the randomized confluence check.
pub const DEFAULT_SEED: u64 = 0x6c6f_6f70;

/// Effective generator degrees of the computed spin presentations,
/// n = 3..=9: shipped validation data, confirmed by the in-repo
/// recomputation before anything is accepted.
pub const SPIN_DEGREE_TABLE: [(usize, &[usize]); 7] = [
    (3, &[4]),
    (4, &[4, 4]),
    (5, &[4, 8]),
    (6, &[4, 6, 8]),
    (7, &[4, 6, 7, 8]),
    (8, &[4, 6, 7, 8, 8]),
    (9, &[4, 6, 7, 8, 16]),
];

/// Independent confirmation for n = 3..=6 from the exceptional isomorphisms
/// Spin(3) ≅ SU(2), Spin(4) ≅ SU(2)², Spin(5) ≅ Sp(2), Spin(6) ≅ SU(4):
/// the generator degrees of H*(BSU(2)), H*(BSU(2))⊗², H*(BSp(2)), H*(BSU(4)).
pub const EXCEPTIONAL_ISO_DEGREES: [(usize, &[usize]); 4] =
    [(3, &[4]), (4, &[4, 4]), (5, &[4, 8]), (6, &[4, 6, 8])];

/// Options for a verification run. The n-range is intersected with each
/// check's own supported range; a degree override lowers (never raises) the
/// per-check defaults.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n_lo: usize,
    pub n_hi: usize,
    pub max_degree: Option<usize>,
    pub seed: u64,
    pub confluence_trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_lo: 2,
            n_hi: 9,
            max_degree: None,
            seed: DEFAULT_SEED,
            confluence_trials: CONFLUENCE_TRIALS,
        }
    }
}

impl VerifyOptions {
    fn range(&self, lo: usize, hi: usize) -> Vec<usize> {
        (self.n_lo.max(lo)..=self.n_hi.min(hi)).collect()
    }

    fn degree(&self, default: usize) -> usize {
        self.max_degree.map_or(default, |d| d.min(default))
    }
}

/// Outcome of one check. `detail` is deterministic; timing is reported
/// separately so the data stream stays byte-stable across runs.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub millis: u128,
}

/// Run every check that intersects the configured n-range. `progress`
/// receives one message per finished check (diagnostics only).
pub fn run_all(opts: &VerifyOptions, progress: &(dyn Fn(&CheckOutcome) + Sync)) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let push = |outcome: Option<CheckOutcome>, out: &mut Vec<CheckOutcome>| {
        if let Some(o) = outcome {
            progress(&o);
            out.push(o);
        }
    };

    push(timed("invariant-ring", || check_invariant_ring(opts)), &mut out);
    push(timed("weyl-faithfulness", || check_faithfulness(opts)), &mut out);
    push(timed("gl2-image", || check_gl2_image(opts)), &mut out);
    push(timed("wu-oracle", || check_wu_oracle(opts)), &mut out);
    push(timed("loop-series", || check_loop_series(opts)), &mut out);
    push(
        timed("sigma-squaring-confluence", || check_squaring_confluence(opts)),
        &mut out,
    );

    // The Gysin run feeds three checks: series agreement, presentation
    // degrees, and the rank-nullity ledger.
    let gysin_ns = opts.range(3, 9);
    if !gysin_ns.is_empty() {
        let degree = opts.degree(GYSIN_MAX_DEGREE);
        let mut assemblies: AssemblyMap = BTreeMap::new();
        let started = std::time::Instant::now();
        for &n in &gysin_ns {
            assemblies.insert(
                n,
                GysinContext::for_spin(n).and_then(|ctx| {
                    let assembly = ctx.assemble(degree, &|_| {})?;
                    Ok(GysinEvidence {
                        assembly,
                        tensor_h1: ctx.tensor_basis(1).basis.classes.len(),
                        model_h1: ctx.model().basis(1).elements.len(),
                    })
                }),
            );
        }
        let shared_millis = started.elapsed().as_millis();

        push(
            Some(with_millis(
                check_gysin_direct(degree, &assemblies),
                shared_millis,
            )),
            &mut out,
        );
        push(timed("spin-presentations", || check_presentations(&assemblies)), &mut out);
        push(timed("tensor-degree-one", || check_degree_one(&assemblies)), &mut out);
        push(timed("rank-nullity", || check_rank_nullity(&assemblies)), &mut out);
    }

    out
}

fn timed(id: &'static str, f: impl FnOnce() -> Option<std::result::Result<String, String>>) -> Option<CheckOutcome> {
    let started = std::time::Instant::now();
    let result = f()?;
    let millis = started.elapsed().as_millis();
    Some(match result {
        Ok(detail) => CheckOutcome {
            id,
            passed: true,
            detail,
            millis,
        },
        Err(detail) => CheckOutcome {
            id,
            passed: false,
            detail,
            millis,
        },
    })
}

fn with_millis(outcome: CheckOutcome, millis: u128) -> CheckOutcome {
    CheckOutcome { millis, ..outcome }
}

/// Invariant dimensions = subalgebra dimensions = closed-form coefficients
/// for n = 3..7; for n = 2 the mismatch is the expected outcome and is
/// asserted as an inequality.
fn check_invariant_ring(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    let ns = opts.range(2, 7);
    if ns.is_empty() {
        return None;
    }
    let degree = opts.degree(INVARIANT_MAX_DEGREE);
    let mut covered = Vec::new();
    for &n in &ns {
        let report = match invariant_report(n, degree) {
            Ok(r) => r,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        if n == 2 {
            // The known degenerate case: every degree is invariant but the
            // subalgebra misses the odd ones.
            let all_ones = report.invariant_dims.coeffs().iter().all(|&c| c == 1);
            if !all_ones || report.is_isomorphic() {
                return Some(Err(
                    "n=2 should be the expected counterexample, but was not".to_string(),
                ));
            }
        } else if !report.is_isomorphic() {
            return Some(Err(format!(
                "n={n}: invariant dims {:?} vs subalgebra {:?} vs expected {:?}",
                report.invariant_dims.coeffs(),
                report.subalgebra_dims.coeffs(),
                report.expected.coeffs()
            )));
        }
        covered.push(n);
    }
    Some(Ok(format!(
        "n in {covered:?}, degrees 0..={degree}; n=2 counterexample included: {}",
        covered.contains(&2)
    )))
}

/// Faithfulness and image order of the Weyl action: n! for n = 3..8, and the
/// trivial image for n = 2.
fn check_faithfulness(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    let ns = opts.range(2, FAITHFUL_MAX_N);
    if ns.is_empty() {
        return None;
    }
    for &n in &ns {
        let (faithful, order) = match faithfulness_check(n) {
            Ok(r) => r,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        let expected = if n == 2 { (false, 1) } else { (true, factorial(n)) };
        if (faithful, order) != expected {
            return Some(Err(format!(
                "n={n}: got (faithful={faithful}, order={order}), expected {expected:?}"
            )));
        }
    }
    Some(Ok(format!("n in {ns:?}: image orders are n! (and 1 at n=2)")))
}

/// At n = 3 the action image is the whole 2x2 general linear group.
fn check_gl2_image(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    if !(opts.n_lo..=opts.n_hi).contains(&3) {
        return None;
    }
    let action = match PermAction::symmetric(3) {
        Ok(a) => a,
        Err(e) => return Some(Err(e.to_string())),
    };
    let image = matrix_group_closure(action.degree_one_matrices());
    let gl2: std::collections::HashSet<_> = (0u8..16)
        .filter_map(|bits| {
            let m = crate::f2::F2Matrix::from_bit_rows(&[
                vec![bits & 1, (bits >> 1) & 1],
                vec![(bits >> 2) & 1, (bits >> 3) & 1],
            ]);
            (m.rank() == 2).then_some(m)
        })
        .collect();
    if image == gl2 && gl2.len() == 6 {
        Some(Ok("all 6 elements of GL_2(F_2) are realized".to_string()))
    } else {
        Some(Err(format!(
            "image has {} elements, GL_2(F_2) has {}",
            image.len(),
            gl2.len()
        )))
    }
}

/// The Cartan-derived action, pushed through the degree-one ring and solved
/// back to the w-basis, agrees with the Wu formula for every Sq^i w_j.
fn check_wu_oracle(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    let ns = opts.range(2, WU_MAX_N);
    if ns.is_empty() {
        return None;
    }
    let mut compared = 0usize;
    for &n in &ns {
        let ctx = match BsoContext::new(n) {
            Ok(c) => c,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        for j in 2..=n {
            for i in 1..=j {
                let computed = match ctx.sq_w(i, &ctx.w_generator(j)) {
                    Ok(e) => e,
                    Err(e) => return Some(Err(format!("n={n} Sq^{i} w{j}: {e}"))),
                };
                let oracle = wu_formula(i, j, n);
                if computed != oracle {
                    return Some(Err(format!(
                        "n={n}: Sq^{i} w{j} = {} but Wu gives {}",
                        ctx.w_ring().format_element(&computed),
                        ctx.w_ring().format_element(&oracle)
                    )));
                }
                compared += 1;
            }
        }
    }
    Some(Ok(format!("{compared} squares agree for n in {ns:?}")))
}

/// Loop-basis counts match the closed-form series coefficients.
fn check_loop_series(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    let ns = opts.range(3, LOOP_MAX_N);
    if ns.is_empty() {
        return None;
    }
    let degree = opts.degree(INVARIANT_MAX_DEGREE);
    for &n in &ns {
        let model = match BsoContext::new(n).and_then(|c| LoopModel::bso(&c)) {
            Ok(m) => m,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        let series = model.series(degree);
        for d in 0..=degree {
            let count = model.basis(d).elements.len() as u64;
            if count != series.coeff(d) {
                return Some(Err(format!(
                    "n={n} degree {d}: basis has {count} elements, series says {}",
                    series.coeff(d)
                )));
            }
        }
    }
    Some(Ok(format!("n in {ns:?}, degrees 0..={degree}")))
}

/// A tiny deterministic generator for the randomized confluence check.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// The two squaring identities in the BSO(3) model, plus randomized
/// confluence: products of random triples agree across association orders
/// and factor orders.
fn check_squaring_confluence(opts: &VerifyOptions) -> Option<std::result::Result<String, String>> {
    if !(opts.n_lo..=opts.n_hi).contains(&3) {
        return None;
    }
    let model = match BsoContext::new(3).and_then(|c| LoopModel::bso(&c)) {
        Ok(m) => m,
        Err(e) => return Some(Err(e.to_string())),
    };
    let w = model.base();

    let s2 = model.sigma_generator(0);
    let s3 = model.sigma_generator(1);
    if model.multiply(&s2, &s2) != s3 {
        return Some(Err("(σw2)^2 differs from σ(w3)".to_string()));
    }
    let expected = model
        .multiply(&model.from_base(&w.generator(0)), &s3)
        .add(&model.multiply(&model.from_base(&w.generator(1)), &s2));
    if model.multiply(&s3, &s3) != expected {
        return Some(Err("(σw3)^2 differs from w2 σw3 + w3 σw2".to_string()));
    }

    let mut rng = SplitMix64::new(opts.seed);
    let mut random_element = |max_degree: usize| {
        let d = (rng.next_u64() % (max_degree as u64 + 1)) as usize;
        let basis = model.basis(d).elements;
        let mask = rng.next_u64();
        LoopElement::from_terms(
            basis
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
                .map(|(_, t)| t),
        )
    };
    for trial in 0..opts.confluence_trials {
        let a = random_element(8);
        let b = random_element(8);
        let c = random_element(8);
        let ab = model.multiply(&a, &b);
        if ab != model.multiply(&b, &a) {
            return Some(Err(format!("trial {trial}: ab != ba")));
        }
        let abc_left = model.multiply(&ab, &c);
        let abc_right = model.multiply(&a, &model.multiply(&b, &c));
        let abc_mixed = model.multiply(&model.multiply(&a, &c), &b);
        if abc_left != abc_right || abc_left != abc_mixed {
            return Some(Err(format!(
                "trial {trial}: association orders disagree"
            )));
        }
    }
    Some(Ok(format!(
        "squaring identities hold; {} random triples confluent (seed {:#x})",
        opts.confluence_trials, opts.seed
    )))
}

/// Everything the Gysin-family checks need from one n.
struct GysinEvidence {
    assembly: GysinAssembly,
    tensor_h1: usize,
    model_h1: usize,
}

type AssemblyMap = BTreeMap<usize, Result<GysinEvidence>>;

/// Gysin assembly reproduces the closed-form loop series of the spin
/// presentation, coefficient by coefficient.
fn check_gysin_direct(degree: usize, assemblies: &AssemblyMap) -> CheckOutcome {
    let id = "gysin-direct";
    for (n, entry) in assemblies {
        match entry {
            Err(e) => {
                return CheckOutcome {
                    id,
                    passed: false,
                    detail: format!("n={n}: {e}"),
                    millis: 0,
                }
            }
            Ok(evidence) => {
                let table = &evidence.assembly.table;
                if table.assembled_dims != table.direct_dims {
                    return CheckOutcome {
                        id,
                        passed: false,
                        detail: format!(
                            "n={n}: assembled {:?} vs direct {:?}",
                            table.assembled_dims.coeffs(),
                            table.direct_dims.coeffs()
                        ),
                        millis: 0,
                    };
                }
            }
        }
    }
    let ns: Vec<usize> = assemblies.keys().copied().collect();
    CheckOutcome {
        id,
        passed: true,
        detail: format!(
            "assembled = direct for n in {ns:?}, {} coefficients each",
            degree + 1
        ),
        millis: 0,
    }
}

/// Computed presentation degrees match the shipped validation table, and
/// for n = 3..6 the degree lists forced by the exceptional isomorphisms.
fn check_presentations(assemblies: &AssemblyMap) -> Option<std::result::Result<String, String>> {
    let mut checked = Vec::new();
    for (n, entry) in assemblies {
        let degrees = match entry {
            Ok(e) => &e.assembly.generator_degrees,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        let Some(&(_, expected)) = SPIN_DEGREE_TABLE.iter().find(|(m, _)| m == n) else {
            return Some(Err(format!("n={n} is outside the validation table")));
        };
        if degrees != expected {
            return Some(Err(format!(
                "n={n}: computed degrees {degrees:?}, validation table says {expected:?}"
            )));
        }
        if let Some((_, iso)) = EXCEPTIONAL_ISO_DEGREES.iter().find(|(m, _)| m == n) {
            if degrees != iso {
                return Some(Err(format!(
                    "n={n}: degrees {degrees:?} contradict the exceptional isomorphism list {iso:?}"
                )));
            }
        }
        checked.push(*n);
    }
    Some(Ok(format!(
        "degree lists confirmed for n in {checked:?} (exceptional isomorphisms cover n <= 6)"
    )))
}

/// The degree-one part of the tensor algebra is one-dimensional, as is H^1
/// of every BSO(n) loop model in range.
fn check_degree_one(assemblies: &AssemblyMap) -> Option<std::result::Result<String, String>> {
    for (n, entry) in assemblies {
        let evidence = match entry {
            Ok(v) => v,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        if evidence.tensor_h1 != 1 {
            return Some(Err(format!(
                "n={n}: tensor algebra has dimension {} in degree 1, expected 1",
                evidence.tensor_h1
            )));
        }
        if evidence.model_h1 != 1 {
            return Some(Err(format!(
                "n={n}: loop model H^1 has dimension {}",
                evidence.model_h1
            )));
        }
    }
    let ns: Vec<usize> = assemblies.keys().copied().collect();
    Some(Ok(format!("H^1 is Z/2 on both sides for n in {ns:?}")))
}

/// kernel + rank = domain dimension for every Euler step computed above.
fn check_rank_nullity(assemblies: &AssemblyMap) -> Option<std::result::Result<String, String>> {
    let mut steps = 0usize;
    for (n, entry) in assemblies {
        let assembly = match entry {
            Ok(v) => &v.assembly,
            Err(e) => return Some(Err(format!("n={n}: {e}"))),
        };
        for e in &assembly.rank_ledger {
            if e.kernel_dim + e.rank != e.domain_dim {
                return Some(Err(format!(
                    "n={n} degree {}: kernel {} + rank {} != dim {}",
                    e.degree, e.kernel_dim, e.rank, e.domain_dim
                )));
            }
            steps += 1;
        }
    }
    Some(Ok(format!("{steps} multiplication steps balance exactly")))
}
