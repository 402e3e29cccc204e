//! The symmetric-group action on H*(BA_{n-1}) = F_2[x_1, ..., x_{n-1}] and
//! its ring of invariants, computed degree by degree.
//!
//! S_n is presented on the adjacent transpositions of x_1, ..., x_{n-1}
//! together with the n-cycle that sends x_{n-1} to x_1 + ... + x_{n-1}; the
//! Coxeter relations are asserted when the action is built. Invariant
//! dimensions intersect the fixed spaces of the generators only: monomial
//! orbit sums give the part fixed by the transpositions, and one kernel
//! computation handles the cycle.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{Echelon, F2Matrix, F2Vector};
use crate::poly::{
    closed_form_series, AlgebraMap, Element, GradedPolyAlgebra, Monomial, PowerSeries,
};
use crate::steenrod::BsoContext;

/// A generator of the S_n action.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ActionGenerator {
    /// The transposition (i, i+1) permuting x_i and x_{i+1}, 1-based,
    /// with i + 1 <= n - 1 so it permutes free generators.
    Transposition(usize),
    /// The n-cycle: x_i -> x_{i+1} for i < n-1 and x_{n-1} -> x_1 + ... + x_{n-1}.
    Cycle,
}

/// The linear S_n action on the degree-one part of F_2[x_1, ..., x_{n-1}],
/// extended multiplicatively to every degree.
pub struct PermAction {
    n: usize,
    x_ring: GradedPolyAlgebra,
    labels: Vec<ActionGenerator>,
    matrices: Vec<F2Matrix>,
    maps: Vec<AlgebraMap>,
}

impl PermAction {
    /// The standard S_n action for n >= 2. The symmetric-group relations of
    /// the generator matrices are checked before the action is returned.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Unsupported(format!(
                "the Weyl action needs n >= 2, got {n}"
            )));
        }
        let k = n - 1;
        let x_ring = GradedPolyAlgebra::degree_one("x", k);

        let mut labels = Vec::new();
        let mut matrices = Vec::new();
        for i in 1..=n.saturating_sub(2) {
            let mut m = F2Matrix::identity(k);
            m.set(i - 1, i - 1, false);
            m.set(i, i, false);
            m.set(i - 1, i, true);
            m.set(i, i - 1, true);
            labels.push(ActionGenerator::Transposition(i));
            matrices.push(m);
        }
        // Column j is the image of x_{j+1}.
        let mut cycle = F2Matrix::zeros(k, k);
        for j in 0..k.saturating_sub(1) {
            cycle.set(j + 1, j, true);
        }
        for r in 0..k {
            cycle.set(r, k - 1, true);
        }
        labels.push(ActionGenerator::Cycle);
        matrices.push(cycle);

        check_symmetric_group_relations(n, &matrices)?;

        let maps = matrices
            .iter()
            .map(|m| map_from_degree_one_matrix(&x_ring, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(PermAction {
            n,
            x_ring,
            labels,
            matrices,
            maps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_ring(&self) -> &GradedPolyAlgebra {
        &self.x_ring
    }

    pub fn generators(&self) -> &[ActionGenerator] {
        &self.labels
    }

    pub fn degree_one_matrices(&self) -> &[F2Matrix] {
        &self.matrices
    }

    /// Matrix of the g-th generator on the degree-d monomial basis
    /// (columns are images of basis monomials, in canonical basis order).
    pub fn action_matrix(&self, g: usize, d: usize) -> F2Matrix {
        let basis = self.x_ring.monomials_of_degree(d);
        let mut m = F2Matrix::zeros(basis.len(), basis.len());
        for (c, mon) in basis.iter().enumerate() {
            let image = self.maps[g].image_of_monomial(mon);
            for r in self.x_ring.coords(&image, &basis).support() {
                m.set(r, c, true);
            }
        }
        m
    }

    /// Per degree d <= max_degree, the dimension of the simultaneous fixed
    /// space of all generators (= the invariants of the whole group).
    /// Degrees are independent and computed in parallel.
    pub fn invariant_dims(&self, max_degree: usize) -> PowerSeries {
        let coeffs = (0..=max_degree)
            .into_par_iter()
            .map(|d| self.invariant_dim(d) as u64)
            .collect();
        PowerSeries::from_coeffs(coeffs)
    }

    /// Degree-d invariant dimension. The transposition generators fix
    /// exactly the span of monomial orbit sums; the cycle is then a single
    /// kernel computation on that span.
    pub fn invariant_dim(&self, d: usize) -> usize {
        let k = self.n - 1;
        let lambdas = partitions_into_at_most(d, k);
        if lambdas.is_empty() {
            return 0;
        }
        if self.n == 2 {
            // The cycle is the identity on F_2[x_1]; everything is fixed.
            return lambdas.len();
        }

        // One row per orbit sum: coordinates of (cycle - 1)·m_lambda, with
        // column ids handed out on first touch so the width tracks the
        // support actually reached rather than the full monomial basis.
        let mut col_of: HashMap<Monomial, u32> = HashMap::new();
        let mut rows_support: Vec<Vec<u32>> = Vec::with_capacity(lambdas.len());
        for lambda in &lambdas {
            let mut parity: HashSet<Monomial> = HashSet::new();
            for mu in multiset_permutations(lambda) {
                toggle(&mut parity, Monomial::new(mu.clone()));
                for image in self.cycle_image_of_monomial(&mu) {
                    toggle(&mut parity, image);
                }
            }
            let mut support: Vec<u32> = parity
                .into_iter()
                .map(|m| {
                    let next = col_of.len() as u32;
                    *col_of.entry(m).or_insert(next)
                })
                .collect();
            support.sort_unstable();
            rows_support.push(support);
        }

        let width = col_of.len();
        let mut ech = Echelon::new(width);
        let mut rank = 0;
        for support in rows_support {
            let row = F2Vector::from_support(
                width,
                &support.iter().map(|&c| c as usize).collect::<Vec<_>>(),
            );
            if ech.insert(row) {
                rank += 1;
            }
        }
        lambdas.len() - rank
    }

    /// Expansion of the cycle image of the monomial with exponents `mu`.
    /// Every listed monomial has coefficient 1; duplicates cannot occur
    /// because binary expansions of exponents are unique.
    fn cycle_image_of_monomial(&self, mu: &[u16]) -> Vec<Monomial> {
        let k = self.n - 1;
        // Shift part: x_i^{e_i} -> x_{i+1}^{e_i} for i < k.
        let mut shifted = vec![0u16; k];
        shifted[1..k].copy_from_slice(&mu[..k - 1]);
        // Sum part: (x_1 + ... + x_k)^{e_k}, expanded bit by bit.
        let mut expansion: Vec<Vec<u16>> = vec![shifted];
        let e = mu[k - 1];
        for bit in 0..16 {
            if e & (1 << bit) == 0 {
                continue;
            }
            let power = 1u16 << bit;
            let mut next = Vec::with_capacity(expansion.len() * k);
            for base in &expansion {
                for j in 0..k {
                    let mut exps = base.clone();
                    exps[j] += power;
                    next.push(exps);
                }
            }
            expansion = next;
        }
        expansion.into_iter().map(Monomial::new).collect()
    }

    /// Brute-force reference: stack (M_g - I) over all generators on the full
    /// degree-d monomial basis and take the common kernel. Only usable at
    /// small n and d; kept as the independent route for tests.
    pub fn invariant_dim_by_kernel_stack(&self, d: usize) -> usize {
        let basis = self.x_ring.monomials_of_degree(d);
        let dim = basis.len();
        let mut rows = Vec::new();
        for g in 0..self.matrices.len() {
            let mut m = self.action_matrix(g, d);
            for i in 0..dim {
                let bit = m.get(i, i);
                m.set(i, i, !bit);
            }
            for r in 0..dim {
                rows.push(m.row(r));
            }
        }
        F2Matrix::from_rows(&rows, dim).kernel_basis().len()
    }
}

fn toggle(set: &mut HashSet<Monomial>, m: Monomial) {
    if !set.remove(&m) {
        set.insert(m);
    }
}

fn map_from_degree_one_matrix(x_ring: &GradedPolyAlgebra, m: &F2Matrix) -> Result<AlgebraMap> {
    let k = x_ring.num_generators();
    let images = (0..k)
        .map(|i| {
            let mut img = Element::zero();
            for r in 0..k {
                if m.get(r, i) {
                    img.add_assign(&x_ring.generator(r));
                }
            }
            img
        })
        .collect();
    AlgebraMap::new(x_ring.clone(), x_ring.clone(), images)
}

/// Check the Coxeter presentation of S_n on the generator matrices:
/// transposition involutions, braid and commutation relations, the order of
/// the cycle, and the factorization of the cycle into transpositions.
fn check_symmetric_group_relations(n: usize, matrices: &[F2Matrix]) -> Result<()> {
    let k = n - 1;
    let id = F2Matrix::identity(k);
    let cycle = matrices.last().expect("at least the cycle");

    let mut power = id.clone();
    for _ in 0..n {
        power = power.mul(cycle);
    }
    if power != id {
        return Err(Error::Invalid(
            "cycle generator does not have order dividing n".into(),
        ));
    }

    if n == 2 {
        return Ok(()); // only the (trivial) cycle; nothing further to check
    }

    // s_1, ..., s_{n-2} are given; derive s_{n-1} = c s_{n-2} c^{-1}.
    let mut cycle_inv = id.clone();
    for _ in 0..n - 1 {
        cycle_inv = cycle_inv.mul(cycle);
    }
    let mut s: Vec<F2Matrix> = matrices[..n - 2].to_vec();
    s.push(cycle.mul(&s[n - 3]).mul(&cycle_inv));

    for (i, si) in s.iter().enumerate() {
        if si.mul(si) != id {
            return Err(Error::Invalid(format!("s_{} is not an involution", i + 1)));
        }
        for (j, sj) in s.iter().enumerate().skip(i + 1) {
            let prod = si.mul(sj);
            let (order, name) = if j == i + 1 { (3, "braid") } else { (2, "commutation") };
            let mut acc = id.clone();
            for _ in 0..order {
                acc = acc.mul(&prod);
            }
            if acc != id {
                return Err(Error::Invalid(format!(
                    "{name} relation fails for s_{} and s_{}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    // c = s_1 s_2 ... s_{n-1} with the rightmost factor applied first.
    let mut prod = id;
    for si in &s {
        prod = prod.mul(si);
    }
    if &prod != cycle {
        return Err(Error::Invalid(
            "cycle does not factor into the adjacent transpositions".into(),
        ));
    }
    Ok(())
}

/// Partitions of `d` into at most `k` parts, as descending exponent vectors
/// of length `k` padded with zeros.
fn partitions_into_at_most(d: usize, k: usize) -> Vec<Vec<u16>> {
    fn rec(
        remaining: usize,
        max_part: usize,
        slots: usize,
        current: &mut Vec<u16>,
        out: &mut Vec<Vec<u16>>,
        k: usize,
    ) {
        if remaining == 0 {
            let mut v = current.clone();
            v.resize(k, 0);
            out.push(v);
            return;
        }
        if slots == 0 {
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part as u16);
            rec(remaining - part, part, slots - 1, current, out, k);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    rec(d, d, k, &mut current, &mut out, k);
    out
}

/// Distinct permutations of a multiset of exponents, via the standard
/// next-permutation walk from the ascending arrangement.
fn multiset_permutations(lambda: &[u16]) -> Vec<Vec<u16>> {
    let mut v = lambda.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

fn next_permutation(v: &mut [u16]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Per degree, the rank of the span of alpha*-images of the w-monomials:
/// the dimension ledger of the subalgebra generated by w_2, ..., w_n.
pub fn subalgebra_dims(ctx: &BsoContext, max_degree: usize) -> PowerSeries {
    let coeffs = (0..=max_degree)
        .map(|d| {
            let x_basis = ctx.x_ring().monomials_of_degree(d);
            let mut ech = Echelon::new(x_basis.len());
            let mut rank = 0u64;
            for wm in ctx.w_ring().monomials_of_degree(d) {
                let image = ctx.alpha().image_of_monomial(&wm);
                if ech.insert(ctx.x_ring().coords(&image, &x_basis)) {
                    rank += 1;
                }
            }
            rank
        })
        .collect();
    PowerSeries::from_coeffs(coeffs)
}

/// Enumerate the group generated by the degree-one matrices and report
/// whether the action is faithful: (all n! images distinct, image order).
pub fn faithfulness_check(n: usize) -> Result<(bool, u64)> {
    if !(2..=9).contains(&n) {
        return Err(Error::Unsupported(format!(
            "faithfulness enumeration supports 2 <= n <= 9, got {n}"
        )));
    }
    let action = PermAction::symmetric(n)?;
    let image = matrix_group_closure(action.degree_one_matrices());
    Ok((image.len() as u64 == factorial(n), image.len() as u64))
}

/// BFS closure of a set of invertible matrices under multiplication.
pub fn matrix_group_closure(generators: &[F2Matrix]) -> HashSet<F2Matrix> {
    let k = generators
        .first()
        .map(|m| m.rows())
        .expect("at least one generator");
    let mut seen: HashSet<F2Matrix> = HashSet::new();
    let mut queue = vec![F2Matrix::identity(k)];
    seen.insert(F2Matrix::identity(k));
    while let Some(m) = queue.pop() {
        for g in generators {
            let next = m.mul(g);
            if seen.insert(next.clone()) {
                queue.push(next);
            }
        }
    }
    seen
}

pub fn factorial(n: usize) -> u64 {
    (2..=n as u64).product()
}

/// The two decisive numeric inputs to Smith's polynomiality criterion plus a
/// truncated witness that the x-lines are integral over the w-subalgebra.
#[derive(Clone, Debug, Serialize)]
pub struct SmithReport {
    pub degree_product: u64,
    pub group_order: u64,
    /// Each x-line satisfies a monic dependence of this degree over the
    /// w-subalgebra (verified in the ring, reported rather than proven
    /// symbolically).
    pub finiteness_witness_degree: usize,
    /// Whether the faithfulness hypothesis of the criterion holds.
    pub faithful: bool,
    /// Whether the monic dependences were verified to vanish identically.
    pub dependence_verified: bool,
}

pub fn smith_criterion_report(n: usize) -> Result<SmithReport> {
    if n < 2 {
        return Err(Error::Unsupported(format!(
            "Smith report needs n >= 2, got {n}"
        )));
    }
    let ctx = BsoContext::new(n)?;
    let x = ctx.x_ring();

    // Lines x_1, ..., x_{n-1} and x_n = x_1 + ... + x_{n-1}.
    let mut lines: Vec<Element> = (0..n - 1).map(|i| x.generator(i)).collect();
    let mut sum = Element::zero();
    for l in &lines {
        sum.add_assign(l);
    }
    lines.push(sum);

    // Each line is a root of T^n + Σ_{j>=2} alpha(w_j) T^{n-j}.
    let mut dependence_verified = true;
    for line in &lines {
        let mut value = x.power(line, n);
        for j in 2..=n {
            let coeff = ctx.alpha().apply(&ctx.w_generator(j));
            value.add_assign(&x.multiply(&coeff, &x.power(line, n - j)));
        }
        if !value.is_zero() {
            dependence_verified = false;
        }
    }

    let (faithful, _) = faithfulness_check(n)?;
    Ok(SmithReport {
        degree_product: (2..=n as u64).product(),
        group_order: factorial(n),
        finiteness_witness_degree: n,
        faithful,
        dependence_verified,
    })
}

/// The degreewise comparison at the heart of the invariant-ring statement.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub max_degree: usize,
    pub invariant_dims: PowerSeries,
    pub subalgebra_dims: PowerSeries,
    /// Coefficients of Π_{i=2..n} 1/(1 - t^i).
    pub expected: PowerSeries,
    pub faithful: bool,
    pub image_order: u64,
}

impl InvariantReport {
    /// Whether the three dimension ledgers agree up to the truncation bound.
    pub fn is_isomorphic(&self) -> bool {
        self.invariant_dims == self.subalgebra_dims && self.subalgebra_dims == self.expected
    }
}

pub fn invariant_report(n: usize, max_degree: usize) -> Result<InvariantReport> {
    let action = PermAction::symmetric(n)?;
    let ctx = BsoContext::new(n)?;
    let (faithful, image_order) = faithfulness_check(n)?;
    let degrees: Vec<usize> = (2..=n).collect();
    let invariant_dims = action.invariant_dims(max_degree);
    let subalgebra_dims = subalgebra_dims(&ctx, max_degree);
    // Coefficientwise: subalgebra <= invariants <= the whole algebra.
    let full = action.x_ring().series(max_degree);
    for d in 0..=max_degree {
        assert!(
            subalgebra_dims.coeff(d) <= invariant_dims.coeff(d)
                && invariant_dims.coeff(d) <= full.coeff(d),
            "dimension ledgers out of order at degree {d}"
        );
    }
    Ok(InvariantReport {
        n,
        max_degree,
        invariant_dims,
        subalgebra_dims,
        expected: closed_form_series(&degrees, &[], max_degree),
        faithful,
        image_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_matrices_for_n3() {
        let a = PermAction::symmetric(3).unwrap();
        assert_eq!(
            a.generators(),
            &[ActionGenerator::Transposition(1), ActionGenerator::Cycle]
        );
        let swap = a.action_matrix(0, 1);
        assert_eq!(swap, F2Matrix::from_bit_rows(&[vec![0, 1], vec![1, 0]]));
        let cycle = a.action_matrix(1, 1);
        assert_eq!(cycle, F2Matrix::from_bit_rows(&[vec![0, 1], vec![1, 1]]));
    }

    #[test]
    fn degree_zero_action_is_trivial() {
        let a = PermAction::symmetric(4).unwrap();
        for g in 0..a.generators().len() {
            assert_eq!(a.action_matrix(g, 0), F2Matrix::identity(1));
        }
    }

    #[test]
    fn invariant_dims_for_n3() {
        let a = PermAction::symmetric(3).unwrap();
        let dims = a.invariant_dims(6);
        // 1/((1-t^2)(1-t^3)) = 1, 0, 1, 1, 1, 1, 2.
        assert_eq!(dims.coeffs(), &[1, 0, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn degree_two_invariant_is_the_quadratic_orbit_sum() {
        // The unique S_3-invariant in degree 2 is x1^2 + x1*x2 + x2^2: check
        // it is fixed by both generators, and that the dimension is 1.
        let a = PermAction::symmetric(3).unwrap();
        assert_eq!(a.invariant_dim(2), 1);
        let x = a.x_ring();
        let inv = x.parse_element("x1^2 + x1*x2 + x2^2").unwrap();
        let basis = x.monomials_of_degree(2);
        let coords = x.coords(&inv, &basis);
        for g in 0..a.generators().len() {
            assert_eq!(a.action_matrix(g, 2).mul_vector(&coords), coords);
        }
    }

    #[test]
    fn n2_everything_is_invariant() {
        let a = PermAction::symmetric(2).unwrap();
        assert_eq!(a.invariant_dims(6).coeffs(), &[1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn fast_invariants_match_kernel_stack() {
        for n in [3, 4, 5] {
            let a = PermAction::symmetric(n).unwrap();
            for d in 0..=7 {
                assert_eq!(
                    a.invariant_dim(d),
                    a.invariant_dim_by_kernel_stack(d),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn subalgebra_dims_for_n3_match_the_closed_form() {
        let ctx = BsoContext::new(3).unwrap();
        assert_eq!(
            subalgebra_dims(&ctx, 6).coeffs(),
            closed_form_series(&[2, 3], &[], 6).coeffs()
        );
    }

    #[test]
    fn subalgebra_for_n2_misses_odd_degrees() {
        let ctx = BsoContext::new(2).unwrap();
        assert_eq!(subalgebra_dims(&ctx, 5).coeffs(), &[1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn subalgebra_degree_zero_is_one() {
        for n in 2..=6 {
            let ctx = BsoContext::new(n).unwrap();
            assert_eq!(subalgebra_dims(&ctx, 0).coeffs(), &[1]);
        }
    }

    #[test]
    fn faithfulness_small_cases() {
        assert_eq!(faithfulness_check(3).unwrap(), (true, 6));
        assert_eq!(faithfulness_check(2).unwrap(), (false, 1));
        assert_eq!(faithfulness_check(4).unwrap(), (true, 24));
        assert!(faithfulness_check(10).is_err());
    }

    #[test]
    fn n3_image_is_all_of_gl2() {
        let a = PermAction::symmetric(3).unwrap();
        let image = matrix_group_closure(a.degree_one_matrices());
        // Enumerate GL_2(F_2) directly: all invertible 2x2 matrices.
        let mut gl2 = HashSet::new();
        for bits in 0u8..16 {
            let m = F2Matrix::from_bit_rows(&[
                vec![bits & 1, (bits >> 1) & 1],
                vec![(bits >> 2) & 1, (bits >> 3) & 1],
            ]);
            if m.rank() == 2 {
                gl2.insert(m);
            }
        }
        assert_eq!(gl2.len(), 6);
        assert_eq!(image, gl2);
    }

    #[test]
    fn smith_report_examples() {
        let r3 = smith_criterion_report(3).unwrap();
        assert_eq!((r3.degree_product, r3.group_order), (6, 6));
        assert_eq!(r3.finiteness_witness_degree, 3);
        assert!(r3.faithful && r3.dependence_verified);

        let r5 = smith_criterion_report(5).unwrap();
        assert_eq!((r5.degree_product, r5.group_order), (120, 120));
        assert!(r5.faithful && r5.dependence_verified);

        // n = 2: the degree product matches the group order but the
        // faithfulness hypothesis fails, and the report says so.
        let r2 = smith_criterion_report(2).unwrap();
        assert_eq!((r2.degree_product, r2.group_order), (2, 2));
        assert!(!r2.faithful);
        assert!(r2.dependence_verified);
    }

    #[test]
    fn report_flags_the_n2_counterexample() {
        let rep = invariant_report(2, 6).unwrap();
        assert!(!rep.is_isomorphic());
        assert_eq!(rep.invariant_dims.coeffs(), &[1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(rep.subalgebra_dims.coeffs(), &[1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(rep.expected.coeffs(), rep.subalgebra_dims.coeffs());

        let rep3 = invariant_report(3, 8).unwrap();
        assert!(rep3.is_isomorphic());
    }
}
