//! The free-loop-space cohomology model H*(X) ⊗ Δ(σy_1, ..., σy_n) for a
//! polynomial H*(X) = F_2[y_1, ..., y_n].
//!
//! σ is the degree -1 suspension derivation; the σ-classes form a simple
//! system of generators, so additively a basis is given by base monomials
//! times square-free σ-subsets. Squares of σ-classes are not zero but
//! rewrite by σ(y)^2 = σ(φ(y)) with φ(y) the top Steenrod square below the
//! squaring operation; products reduce to that normal form, innermost-first
//! on the lowest-index squared σ-class, which strictly decreases total
//! σ-multiplicity and therefore terminates.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::poly::{closed_form_series, Element, GradedPolyAlgebra, Monomial, PowerSeries};
use crate::steenrod::BsoContext;

/// One normal-form term: a base monomial times a square-free set of
/// σ-classes, stored as a bitmask over the base generators.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LoopTerm {
    pub base: Monomial,
    pub classes: u32,
}

/// An element of the loop model: a finite set of normal-form terms.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LoopElement {
    terms: BTreeSet<LoopTerm>,
}

impl LoopElement {
    pub fn zero() -> Self {
        LoopElement::default()
    }

    pub fn from_terms<I: IntoIterator<Item = LoopTerm>>(iter: I) -> Self {
        let mut terms = BTreeSet::new();
        for t in iter {
            if !terms.remove(&t) {
                terms.insert(t);
            }
        }
        LoopElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &LoopTerm> {
        self.terms.iter()
    }

    pub fn add(&self, other: &LoopElement) -> LoopElement {
        let terms = self
            .terms
            .symmetric_difference(&other.terms)
            .cloned()
            .collect();
        LoopElement { terms }
    }

    pub fn add_assign(&mut self, other: &LoopElement) {
        for t in &other.terms {
            if !self.terms.remove(t) {
                self.terms.insert(t.clone());
            }
        }
    }

    fn toggle(&mut self, t: LoopTerm) {
        if !self.terms.remove(&t) {
            self.terms.insert(t);
        }
    }
}

/// The degree-d additive basis of the model: (base monomial, σ-subset)
/// pairs, deterministically ordered.
#[derive(Clone, Debug)]
pub struct LoopBasis {
    pub degree: usize,
    pub elements: Vec<LoopTerm>,
}

/// The loop model over a base polynomial algebra. `phi` holds φ(y_i) for
/// each base generator; a model built without it can still enumerate bases
/// and series, but products that need the squaring rule will panic.
pub struct LoopModel {
    base: GradedPolyAlgebra,
    phi: Option<Vec<Element>>,
    /// σ(φ(y_i)), precomputed once so rewriting never re-enters the
    /// Steenrod machinery.
    sigma_phi: Option<Vec<LoopElement>>,
}

impl LoopModel {
    /// Build a model with an explicit φ-table. Degrees are checked:
    /// φ(y_i) must be homogeneous of degree 2·deg(y_i) - 1 (or zero).
    pub fn new(base: GradedPolyAlgebra, phi: Vec<Element>) -> Result<Self> {
        if base.num_generators() > 32 {
            return Err(Error::Unsupported(
                "loop models support at most 32 base generators".into(),
            ));
        }
        if phi.len() != base.num_generators() {
            return Err(Error::Invalid(format!(
                "phi table has {} entries for {} generators",
                phi.len(),
                base.num_generators()
            )));
        }
        for (i, p) in phi.iter().enumerate() {
            let want = 2 * base.generator_degree(i) - 1;
            if !p.is_zero() && base.homogeneous_degree(p) != Some(want) {
                return Err(Error::Invalid(format!(
                    "phi of generator {} must be homogeneous of degree {want}",
                    base.generator_name(i)
                )));
            }
        }
        let mut model = LoopModel {
            base,
            phi: Some(phi),
            sigma_phi: None,
        };
        let table = model
            .phi
            .as_ref()
            .unwrap()
            .iter()
            .map(|p| model.sigma(p))
            .collect();
        model.sigma_phi = Some(table);
        Ok(model)
    }

    /// A model that only enumerates bases and series; no squaring rule.
    pub fn series_only(base: GradedPolyAlgebra) -> Result<Self> {
        if base.num_generators() > 32 {
            return Err(Error::Unsupported(
                "loop models support at most 32 base generators".into(),
            ));
        }
        Ok(LoopModel {
            base,
            phi: None,
            sigma_phi: None,
        })
    }

    /// The model of L BSO(n): base F_2[w_2..w_n] with φ computed from the
    /// Steenrod action (via the degree-one ring) and frozen.
    pub fn bso(ctx: &BsoContext) -> Result<Self> {
        let w = ctx.w_ring().clone();
        let phi = (2..=ctx.n())
            .map(|j| ctx.phi_w(&ctx.w_generator(j)))
            .collect::<Result<Vec<_>>>()?;
        LoopModel::new(w, phi)
    }

    pub fn base(&self) -> &GradedPolyAlgebra {
        &self.base
    }

    pub fn phi_table(&self) -> Option<&[Element]> {
        self.phi.as_deref()
    }

    /// Degree of σy_i (one less than the generator degree).
    pub fn sigma_degree(&self, i: usize) -> usize {
        self.base.generator_degree(i) - 1
    }

    pub fn term_degree(&self, t: &LoopTerm) -> usize {
        let mut d = self.base.monomial_degree(&t.base);
        let mut mask = t.classes;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            d += self.sigma_degree(i);
            mask &= mask - 1;
        }
        d
    }

    pub fn element_degree(&self, e: &LoopElement) -> Option<usize> {
        let mut it = e.terms();
        let first = self.term_degree(it.next()?);
        for t in it {
            if self.term_degree(t) != first {
                return None;
            }
        }
        Some(first)
    }

    /// Embed a base class into the model (empty σ-part).
    pub fn from_base(&self, e: &Element) -> LoopElement {
        LoopElement::from_terms(e.terms().map(|m| LoopTerm {
            base: m.clone(),
            classes: 0,
        }))
    }

    /// The generator class σy_i.
    pub fn sigma_generator(&self, i: usize) -> LoopElement {
        assert!(i < self.base.num_generators());
        LoopElement::from_terms([LoopTerm {
            base: Monomial::one(self.base.num_generators()),
            classes: 1 << i,
        }])
    }

    /// The suspension derivation applied to a base class: additive, lowers
    /// degree by exactly one, and satisfies
    /// σ(x·y) = x·σ(y) + σ(x)·y (over F_2 the projection to the base is
    /// silent in the notation).
    pub fn sigma(&self, e: &Element) -> LoopElement {
        let mut out = LoopElement::zero();
        for m in e.terms() {
            // Derivation on a monomial: only odd exponents survive mod 2.
            for (i, &exp) in m.exponents().iter().enumerate() {
                if exp % 2 == 0 {
                    continue;
                }
                let mut exps = m.exponents().to_vec();
                exps[i] -= 1;
                out.toggle(LoopTerm {
                    base: Monomial::new(exps),
                    classes: 1 << i,
                });
            }
        }
        out
    }

    /// Product in the model, reduced to normal form.
    pub fn multiply(&self, a: &LoopElement, b: &LoopElement) -> LoopElement {
        let num = self.base.num_generators();
        let mut out = LoopElement::zero();
        let mut counts = vec![0u8; num];
        for ta in a.terms() {
            for tb in b.terms() {
                for (i, c) in counts.iter_mut().enumerate() {
                    *c = ((ta.classes >> i) & 1) as u8 + ((tb.classes >> i) & 1) as u8;
                }
                let base = ta.base.times(&tb.base);
                self.reduce_into(base, &mut counts, &mut out);
            }
        }
        out
    }

    /// Rewrite a term with σ-multiplicities into normal form, XOR-ing the
    /// result into `out`. Each squaring-rule application lowers the total
    /// σ-multiplicity by one.
    fn reduce_into(&self, base: Monomial, counts: &mut [u8], out: &mut LoopElement) {
        match counts.iter().position(|&c| c >= 2) {
            None => {
                let mut mask = 0u32;
                for (i, &c) in counts.iter().enumerate() {
                    if c == 1 {
                        mask |= 1 << i;
                    }
                }
                out.toggle(LoopTerm {
                    base,
                    classes: mask,
                });
            }
            Some(k) => {
                let sigma_phi = self
                    .sigma_phi
                    .as_ref()
                    .expect("this product needs the squaring rule, but the model has no phi table")
                    [k]
                .clone();
                counts[k] -= 2;
                for t in sigma_phi.terms() {
                    let mut next = counts.to_vec();
                    let j = t.classes.trailing_zeros() as usize;
                    next[j] += 1;
                    self.reduce_into(base.times(&t.base), &mut next, out);
                }
                counts[k] += 2;
            }
        }
    }

    /// All (base monomial, σ-subset) pairs of total degree d, ordered by
    /// σ-subset mask and then by base monomial.
    pub fn basis(&self, d: usize) -> LoopBasis {
        let num = self.base.num_generators();
        let mut elements = Vec::new();
        for mask in 0u32..(1u32 << num) {
            let sigma_part: usize = (0..num)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.sigma_degree(i))
                .sum();
            if sigma_part > d {
                continue;
            }
            for m in self.base.monomials_of_degree(d - sigma_part) {
                elements.push(LoopTerm {
                    base: m,
                    classes: mask,
                });
            }
        }
        LoopBasis {
            degree: d,
            elements,
        }
    }

    /// Coefficients of Π_i (1 + t^{d_i - 1}) / (1 - t^{d_i}) up to
    /// max_degree; equals |basis(d)| in every degree.
    pub fn series(&self, max_degree: usize) -> PowerSeries {
        let degrees = self.base.generator_degrees();
        let shifts: Vec<usize> = degrees.iter().map(|d| d - 1).collect();
        closed_form_series(&degrees, &shifts, max_degree)
    }

    /// Canonical text for a loop element: σ-classes print as `s(name)`.
    pub fn format_element(&self, e: &LoopElement) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<&LoopTerm> = e.terms().collect();
        terms.sort_by(|a, b| {
            a.classes
                .cmp(&b.classes)
                .then_with(|| a.base.canonical_cmp(&b.base))
        });
        terms
            .iter()
            .map(|t| self.format_term(t))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn format_term(&self, t: &LoopTerm) -> String {
        let mut factors = Vec::new();
        if !t.base.is_one() || t.classes == 0 {
            factors.push(self.base.format_monomial(&t.base));
        }
        for i in 0..self.base.num_generators() {
            if t.classes >> i & 1 == 1 {
                factors.push(format!("s({})", self.base.generator_name(i)));
            }
        }
        factors.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bso3() -> LoopModel {
        LoopModel::bso(&BsoContext::new(3).unwrap()).unwrap()
    }

    #[test]
    fn sigma_of_a_generator_is_the_sigma_class() {
        let m = bso3();
        let w2 = m.base().generator(0);
        assert_eq!(m.sigma(&w2), m.sigma_generator(0));
    }

    #[test]
    fn sigma_is_a_derivation_on_w2w3() {
        let m = bso3();
        let w = m.base();
        let w2w3 = w.parse_element("w2*w3").unwrap();
        let expected = m
            .multiply(&m.from_base(&w.generator(0)), &m.sigma_generator(1))
            .add(&m.multiply(&m.from_base(&w.generator(1)), &m.sigma_generator(0)));
        assert_eq!(m.sigma(&w2w3), expected);
        assert_eq!(m.format_element(&m.sigma(&w2w3)), "w3*s(w2) + w2*s(w3)");
    }

    #[test]
    fn sigma_kills_squares() {
        let m = bso3();
        let w = m.base();
        for g in 0..w.num_generators() {
            let sq = w.multiply(&w.generator(g), &w.generator(g));
            assert!(m.sigma(&sq).is_zero());
        }
    }

    #[test]
    fn squaring_rule_for_sigma_w2() {
        // phi(w2) = Sq^1 w2 = w3, so (σw2)^2 = σ(w3).
        let m = bso3();
        let s2 = m.sigma_generator(0);
        assert_eq!(m.multiply(&s2, &s2), m.sigma_generator(1));
    }

    #[test]
    fn squaring_rule_for_sigma_w3() {
        // phi(w3) = Sq^2 w3 = w2*w3, so (σw3)^2 = σ(w2 w3) = w2 σw3 + w3 σw2.
        let m = bso3();
        let s3 = m.sigma_generator(1);
        let expected = m.sigma(&m.base().parse_element("w2*w3").unwrap());
        assert_eq!(m.multiply(&s3, &s3), expected);
        assert_eq!(m.format_element(&m.multiply(&s3, &s3)), "w3*s(w2) + w2*s(w3)");
    }

    #[test]
    fn unit_is_neutral() {
        let m = bso3();
        let one = m.from_base(&m.base().one());
        let a = m
            .sigma_generator(0)
            .add(&m.from_base(&m.base().generator(1)));
        assert_eq!(m.multiply(&one, &a), a);
    }

    #[test]
    fn basis_sizes_for_bso3() {
        let m = bso3();
        assert_eq!(m.basis(0).elements.len(), 1);
        // H^1 is one-dimensional, spanned by σw2.
        let b1 = m.basis(1);
        assert_eq!(b1.elements.len(), 1);
        assert_eq!(
            b1.elements[0],
            LoopTerm {
                base: Monomial::one(2),
                classes: 0b01
            }
        );
        assert_eq!(m.basis(4).elements.len(), 3);
    }

    #[test]
    fn series_matches_the_closed_form_for_bso3() {
        let m = bso3();
        assert_eq!(m.series(4).coeffs(), &[1, 1, 2, 3, 3]);
    }

    #[test]
    fn series_for_a_single_degree_four_generator() {
        let base = GradedPolyAlgebra::new(vec![("z".into(), 4)]).unwrap();
        let m = LoopModel::series_only(base).unwrap();
        assert_eq!(m.series(8).coeffs(), &[1, 0, 0, 1, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn series_of_the_empty_model() {
        let base = GradedPolyAlgebra::new(vec![]).unwrap();
        let m = LoopModel::series_only(base).unwrap();
        assert_eq!(m.series(4).coeffs(), &[1, 0, 0, 0, 0]);
    }

    #[test]
    fn basis_counts_equal_series_coefficients() {
        for n in 3..=5 {
            let m = LoopModel::bso(&BsoContext::new(n).unwrap()).unwrap();
            let s = m.series(12);
            for d in 0..=12 {
                assert_eq!(m.basis(d).elements.len() as u64, s.coeff(d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn sigma_lowers_degree_by_one() {
        let m = bso3();
        let w = m.base();
        for d in 1..=10 {
            for mon in w.monomials_of_degree(d) {
                let s = m.sigma(&Element::from_monomial(mon));
                if !s.is_zero() {
                    assert_eq!(m.element_degree(&s), Some(d - 1));
                }
            }
        }
    }

    fn arb_loop_element(max_degree: usize) -> impl Strategy<Value = LoopElement> {
        // Random subsets of the basis elements of random degrees in BSO(3).
        proptest::collection::vec((0usize..=max_degree, any::<u64>()), 1..3).prop_map(
            move |picks| {
                let m = bso3();
                let mut out = LoopElement::zero();
                for (d, mask) in picks {
                    let basis = m.basis(d).elements;
                    for (i, t) in basis.iter().enumerate() {
                        if mask >> (i % 64) & 1 == 1 {
                            out.add_assign(&LoopElement::from_terms([t.clone()]));
                        }
                    }
                }
                out
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn derivation_law_on_random_pairs(da in 1usize..=6, db in 1usize..=6, s in any::<u64>()) {
            let m = bso3();
            let w = m.base();
            // Pseudo-random homogeneous base classes of degrees da, db.
            let pick = |deg: usize, salt: u64| {
                let basis = w.monomials_of_degree(deg);
                Element::from_monomials(basis.into_iter().enumerate().filter_map(|(i, mon)| {
                    (s.rotate_left((salt as u32).wrapping_mul(7) ^ i as u32) & 1 == 1).then_some(mon)
                }))
            };
            let a = pick(da, 1);
            let b = pick(db, 2);
            let lhs = m.sigma(&w.multiply(&a, &b));
            let rhs = m
                .multiply(&m.from_base(&a), &m.sigma(&b))
                .add(&m.multiply(&m.sigma(&a), &m.from_base(&b)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn products_are_commutative_and_associative(
            a in arb_loop_element(5),
            b in arb_loop_element(5),
            c in arb_loop_element(5),
        ) {
            let m = bso3();
            prop_assert_eq!(m.multiply(&a, &b), m.multiply(&b, &a));
            prop_assert_eq!(
                m.multiply(&m.multiply(&a, &b), &c),
                m.multiply(&a, &m.multiply(&b, &c))
            );
        }
    }

    #[test]
    fn loop_dimensions_factor_as_invariants_times_delta_part() {
        // Degreewise, the loop-space dimensions are the convolution of the
        // computed invariant-ring dimensions with the square-free σ-part.
        use crate::invariants::PermAction;
        for n in 3..=5 {
            let ctx = BsoContext::new(n).unwrap();
            let model = LoopModel::bso(&ctx).unwrap();
            let invariants = PermAction::symmetric(n).unwrap().invariant_dims(12);
            let sigma_degrees: Vec<usize> = (2..=n).map(|i| i - 1).collect();
            let delta = closed_form_series(&[], &sigma_degrees, 12);
            for d in 0..=12 {
                let convolved: u64 = (0..=d)
                    .map(|j| invariants.coeff(j) * delta.coeff(d - j))
                    .sum();
                assert_eq!(
                    model.basis(d).elements.len() as u64,
                    convolved,
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn sigma_commutes_with_sq1_on_degree_two_generators() {
        // For deg y = 2 the only expressible instance: Sq^1(σy) is the top
        // square (σy)^2, and σ(Sq^1 y) comes from the Steenrod action.
        for n in 3..=6 {
            let ctx = BsoContext::new(n).unwrap();
            let m = LoopModel::bso(&ctx).unwrap();
            let s = m.sigma_generator(0); // σw2
            let lhs = m.multiply(&s, &s);
            let sq1_w2 = ctx.sq_w(1, &ctx.w_generator(2)).unwrap();
            let rhs = m.sigma(&sq1_w2);
            assert_eq!(lhs, rhs, "n={n}");
        }
    }
}
