//! Graded-commutative polynomial algebras over F_2 with weighted generators.
//!
//! Elements carry no coefficient storage: a class is a finite set of
//! monomials, addition is symmetric difference, and multiplication merges
//! pairwise monomial products with XOR. Monomial bases of each degree are
//! listed in a fixed order (lexicographic, leading monomial first) so that
//! every coordinate vector and matrix built on top of them is deterministic.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::f2::F2Vector;

/// A monomial, stored as one exponent per generator of its algebra.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    exps: Vec<u16>,
}

impl Monomial {
    pub fn new(exps: Vec<u16>) -> Self {
        Monomial { exps }
    }

    pub fn one(num_generators: usize) -> Self {
        Monomial {
            exps: vec![0; num_generators],
        }
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.exps.len(), other.exps.len(), "arity mismatch");
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        }
    }

    /// Canonical basis order: lexicographic on exponent tuples with earlier
    /// generators dominant and the leading monomial first, e.g. x1^2 before
    /// x1*x2 before x2^2.
    pub fn canonical_cmp(&self, other: &Monomial) -> std::cmp::Ordering {
        other.exps.cmp(&self.exps)
    }
}

/// An element of a polynomial algebra over F_2: a finite set of monomials.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Element {
    terms: BTreeSet<Monomial>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(m);
        Element { terms }
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        // XOR semantics: a monomial appearing an even number of times cancels.
        let mut terms = BTreeSet::new();
        for m in iter {
            if !terms.remove(&m) {
                terms.insert(m);
            }
        }
        Element { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.terms.contains(m)
    }

    /// Addition over F_2: symmetric difference of term sets.
    pub fn add(&self, other: &Element) -> Element {
        let terms = self
            .terms
            .symmetric_difference(&other.terms)
            .cloned()
            .collect();
        Element { terms }
    }

    pub fn add_assign(&mut self, other: &Element) {
        for m in &other.terms {
            if !self.terms.remove(m) {
                self.terms.insert(m.clone());
            }
        }
    }

    /// Terms in the canonical presentation order (leading monomial first).
    pub fn sorted_terms(&self) -> Vec<&Monomial> {
        let mut ts: Vec<&Monomial> = self.terms.iter().collect();
        ts.sort_by(|a, b| a.canonical_cmp(b));
        ts
    }
}

/// A free graded-commutative polynomial algebra over F_2 with named
/// generators of positive weighted degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedPolyAlgebra {
    generators: Vec<(String, usize)>,
}

impl GradedPolyAlgebra {
    pub fn new(generators: Vec<(String, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (name, degree) in &generators {
            if *degree == 0 {
                return Err(Error::Invalid(format!(
                    "generator {name} has degree 0; degrees must be positive"
                )));
            }
            if name.is_empty()
                || !name.chars().next().unwrap().is_ascii_alphabetic()
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(Error::Invalid(format!("bad generator name {name:?}")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!("duplicate generator name {name}")));
            }
        }
        Ok(GradedPolyAlgebra { generators })
    }

    /// F_2[x_1, ..., x_k] with every generator in degree 1.
    pub fn degree_one(prefix: &str, k: usize) -> Self {
        GradedPolyAlgebra::new((1..=k).map(|i| (format!("{prefix}{i}"), 1)).collect())
            .expect("valid generator set")
    }

    /// F_2[w_2, ..., w_n], the Stiefel-Whitney ring of BSO(n).
    pub fn stiefel_whitney(n: usize) -> Self {
        assert!(n >= 2, "stiefel_whitney needs n >= 2");
        GradedPolyAlgebra::new((2..=n).map(|i| (format!("w{i}"), i)).collect())
            .expect("valid generator set")
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.generators[i].0
    }

    pub fn generator_degree(&self, i: usize) -> usize {
        self.generators[i].1
    }

    pub fn generator_degrees(&self) -> Vec<usize> {
        self.generators.iter().map(|g| g.1).collect()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|(n, _)| n == name)
    }

    pub fn one(&self) -> Element {
        Element::from_monomial(Monomial::one(self.num_generators()))
    }

    pub fn generator(&self, i: usize) -> Element {
        let mut exps = vec![0; self.num_generators()];
        exps[i] = 1;
        Element::from_monomial(Monomial::new(exps))
    }

    pub fn monomial_degree(&self, m: &Monomial) -> usize {
        assert_eq!(m.exponents().len(), self.num_generators(), "arity mismatch");
        m.exponents()
            .iter()
            .zip(&self.generators)
            .map(|(&e, (_, d))| e as usize * d)
            .sum()
    }

    /// The common degree of all terms, `None` for the zero element or an
    /// inhomogeneous one.
    pub fn homogeneous_degree(&self, e: &Element) -> Option<usize> {
        let mut it = e.terms();
        let first = self.monomial_degree(it.next()?);
        for m in it {
            if self.monomial_degree(m) != first {
                return None;
            }
        }
        Some(first)
    }

    /// All monomials of weighted degree `d`, in canonical order. The count
    /// equals the coefficient of t^d in the algebra's Poincaré series.
    pub fn monomials_of_degree(&self, d: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u16; self.num_generators()];
        self.enumerate_rec(0, d, &mut exps, &mut out);
        out
    }

    fn enumerate_rec(&self, i: usize, remaining: usize, exps: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == self.num_generators() {
            if remaining == 0 {
                out.push(Monomial::new(exps.clone()));
            }
            return;
        }
        let deg = self.generators[i].1;
        // Highest exponent first keeps the output in canonical order.
        for e in (0..=(remaining / deg) as u16).rev() {
            exps[i] = e;
            self.enumerate_rec(i + 1, remaining - e as usize * deg, exps, out);
        }
        exps[i] = 0;
    }

    /// Product of two elements over F_2.
    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        if a.is_zero() || b.is_zero() {
            return Element::zero();
        }
        let mut acc: HashSet<Monomial> = HashSet::with_capacity(a.num_terms() * b.num_terms());
        for ma in a.terms() {
            for mb in b.terms() {
                let m = ma.times(mb);
                if !acc.remove(&m) {
                    acc.insert(m);
                }
            }
        }
        Element::from_monomials(acc)
    }

    pub fn power(&self, a: &Element, k: usize) -> Element {
        let mut out = self.one();
        for _ in 0..k {
            out = self.multiply(&out, a);
        }
        out
    }

    /// Coordinate vector of a homogeneous element in the given degree basis.
    /// Panics if a term of `e` is missing from `basis`.
    pub fn coords(&self, e: &Element, basis: &[Monomial]) -> F2Vector {
        let mut v = F2Vector::zeros(basis.len());
        if e.is_zero() {
            return v;
        }
        for m in e.terms() {
            let idx = basis
                .binary_search_by(|probe| probe.canonical_cmp(m))
                .unwrap_or_else(|_| panic!("monomial {m:?} not present in the degree basis"));
            v.flip(idx);
        }
        v
    }

    /// Poincaré series of the algebra itself, truncated at degree `max_degree`.
    pub fn series(&self, max_degree: usize) -> PowerSeries {
        closed_form_series(&self.generator_degrees(), &[], max_degree)
    }

    /// Canonical text form: terms joined by " + ", factors by "*", powers as
    /// "name^k"; the unit monomial prints as "1" and zero prints as "0".
    pub fn format_element(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (t, m) in e.sorted_terms().into_iter().enumerate() {
            if t > 0 {
                out.push_str(" + ");
            }
            out.push_str(&self.format_monomial(m));
        }
        out
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_one() {
            return "1".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                out.push('*');
            }
            first = false;
            out.push_str(self.generator_name(i));
            if e > 1 {
                let _ = write!(out, "^{e}");
            }
        }
        out
    }

    /// Parse the canonical text form produced by [`format_element`].
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty element text".into()));
        }
        if s == "0" {
            return Ok(Element::zero());
        }
        let mut monomials = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {s:?}")));
            }
            let mut exps = vec![0u16; self.num_generators()];
            if term != "1" {
                for factor in term.split('*') {
                    let factor = factor.trim();
                    let (name, exp) = match factor.split_once('^') {
                        Some((n, e)) => {
                            let exp: u16 = e.trim().parse().map_err(|_| {
                                Error::Parse(format!("bad exponent in factor {factor:?}"))
                            })?;
                            (n.trim(), exp)
                        }
                        None => (factor, 1),
                    };
                    let idx = self.generator_index(name).ok_or_else(|| {
                        Error::Parse(format!("unknown generator {name:?} in {term:?}"))
                    })?;
                    exps[idx] = exps[idx].checked_add(exp).ok_or_else(|| {
                        Error::Parse(format!("exponent overflow in {term:?}"))
                    })?;
                }
            }
            monomials.push(Monomial::new(exps));
        }
        Ok(Element::from_monomials(monomials))
    }
}

/// A dimension ledger: nonnegative integer coefficients indexed by degree,
/// exact up to the stored truncation bound.
#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize)]
#[serde(transparent)]
pub struct PowerSeries {
    coeffs: Vec<u64>,
}

impl PowerSeries {
    pub fn from_coeffs(coeffs: Vec<u64>) -> Self {
        PowerSeries { coeffs }
    }

    /// The constant series 1 truncated at `max_degree`.
    pub fn one(max_degree: usize) -> Self {
        let mut coeffs = vec![0; max_degree + 1];
        coeffs[0] = 1;
        PowerSeries { coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, d: usize) -> u64 {
        assert!(
            d < self.coeffs.len(),
            "coefficient of t^{d} beyond truncation {}",
            self.coeffs.len() - 1
        );
        self.coeffs[d]
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Multiply by (1 + t^s) in place.
    pub fn mul_one_plus_t(&mut self, s: usize) {
        if s == 0 {
            for c in &mut self.coeffs {
                *c *= 2;
            }
            return;
        }
        for d in (s..self.coeffs.len()).rev() {
            self.coeffs[d] += self.coeffs[d - s];
        }
    }

    /// Multiply by 1/(1 - t^d) in place, i.e. by 1 + t^d + t^{2d} + ...
    pub fn mul_geometric(&mut self, d: usize) {
        assert!(d >= 1, "geometric factor needs positive degree");
        for i in d..self.coeffs.len() {
            self.coeffs[i] += self.coeffs[i - d];
        }
    }

}

/// Exact truncated expansion of Π_j (1 + t^{s_j}) / Π_i (1 - t^{d_i}).
pub fn closed_form_series(degrees: &[usize], numerator_shifts: &[usize], max_degree: usize) -> PowerSeries {
    let mut s = PowerSeries::one(max_degree);
    for &shift in numerator_shifts {
        s.mul_one_plus_t(shift);
    }
    for &d in degrees {
        s.mul_geometric(d);
    }
    s
}

/// A degree-preserving algebra map, given by one target element per source
/// generator. Monomial images are memoized behind a lock so repeated
/// application across a degree range stays cheap.
pub struct AlgebraMap {
    source: GradedPolyAlgebra,
    target: GradedPolyAlgebra,
    images: Vec<Element>,
    cache: Mutex<HashMap<Monomial, Element>>,
}

impl AlgebraMap {
    pub fn new(
        source: GradedPolyAlgebra,
        target: GradedPolyAlgebra,
        images: Vec<Element>,
    ) -> Result<Self> {
        if images.len() != source.num_generators() {
            return Err(Error::Invalid(format!(
                "expected {} generator images, got {}",
                source.num_generators(),
                images.len()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if let Some(d) = target.homogeneous_degree(img) {
                if d != source.generator_degree(i) {
                    return Err(Error::Invalid(format!(
                        "image of {} has degree {d}, expected {}",
                        source.generator_name(i),
                        source.generator_degree(i)
                    )));
                }
            } else if !img.is_zero() {
                return Err(Error::Invalid(format!(
                    "image of {} is not homogeneous",
                    source.generator_name(i)
                )));
            }
        }
        Ok(AlgebraMap {
            source,
            target,
            images,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// The identity-shaped map sending each source generator to the target
    /// generator of the same name.
    pub fn by_name(source: GradedPolyAlgebra, target: GradedPolyAlgebra) -> Result<Self> {
        let images = (0..source.num_generators())
            .map(|i| {
                let name = source.generator_name(i);
                target
                    .generator_index(name)
                    .map(|j| target.generator(j))
                    .ok_or_else(|| Error::Invalid(format!("target has no generator {name}")))
            })
            .collect::<Result<Vec<_>>>()?;
        AlgebraMap::new(source, target, images)
    }

    pub fn source(&self) -> &GradedPolyAlgebra {
        &self.source
    }

    pub fn target(&self) -> &GradedPolyAlgebra {
        &self.target
    }

    pub fn generator_image(&self, i: usize) -> &Element {
        &self.images[i]
    }

    /// Substitute generator images and expand over F_2. A ring homomorphism.
    pub fn apply(&self, e: &Element) -> Element {
        let mut out = Element::zero();
        for m in e.terms() {
            out.add_assign(&self.image_of_monomial(m));
        }
        out
    }

    pub fn image_of_monomial(&self, m: &Monomial) -> Element {
        if let Some(hit) = self.cache.lock().unwrap().get(m) {
            return hit.clone();
        }
        let result = match m.exponents().iter().position(|&e| e > 0) {
            None => self.target.one(),
            Some(i) => {
                let mut reduced = m.clone();
                reduced.exps[i] -= 1;
                let rest = self.image_of_monomial(&reduced);
                self.target.multiply(&rest, &self.images[i])
            }
        };
        self.cache
            .lock()
            .unwrap()
            .insert(m.clone(), result.clone());
        result
    }
}

impl Clone for AlgebraMap {
    fn clone(&self) -> Self {
        AlgebraMap {
            source: self.source.clone(),
            target: self.target.clone(),
            images: self.images.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w_ring() -> GradedPolyAlgebra {
        GradedPolyAlgebra::stiefel_whitney(3)
    }

    fn x_ring(k: usize) -> GradedPolyAlgebra {
        GradedPolyAlgebra::degree_one("x", k)
    }

    #[test]
    fn monomial_basis_degree_zero_is_unit() {
        let a = w_ring();
        let ms = a.monomials_of_degree(0);
        assert_eq!(ms.len(), 1);
        assert!(ms[0].is_one());
    }

    #[test]
    fn monomial_basis_w_degree_six() {
        let a = w_ring();
        let ms = a.monomials_of_degree(6);
        // w2^3 and w3^2, leading monomial first.
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0], Monomial::new(vec![3, 0]));
        assert_eq!(ms[1], Monomial::new(vec![0, 2]));
    }

    #[test]
    fn monomial_basis_two_linear_variables() {
        let a = x_ring(2);
        let ms = a.monomials_of_degree(2);
        assert_eq!(
            ms,
            vec![
                Monomial::new(vec![2, 0]),
                Monomial::new(vec![1, 1]),
                Monomial::new(vec![0, 2]),
            ]
        );
    }

    #[test]
    fn monomial_counts_match_series() {
        for a in [w_ring(), x_ring(3), GradedPolyAlgebra::stiefel_whitney(5)] {
            let s = a.series(12);
            for d in 0..=12 {
                assert_eq!(a.monomials_of_degree(d).len() as u64, s.coeff(d), "degree {d}");
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let a = x_ring(1);
        let x = a.generator(0);
        assert_eq!(a.multiply(&x, &x), a.parse_element("x1^2").unwrap());

        let b = x_ring(2);
        let sum = b.generator(0).add(&b.generator(1));
        // (x1+x2)^2 = x1^2 + x2^2 over F_2.
        assert_eq!(
            b.multiply(&sum, &sum),
            b.parse_element("x1^2 + x2^2").unwrap()
        );

        let w = w_ring();
        let w2w3 = w.multiply(&w.generator(0), &w.generator(1));
        assert_eq!(w2w3, w.parse_element("w2*w3").unwrap());
    }

    #[test]
    fn coords_examples() {
        let w = w_ring();
        let basis6 = w.monomials_of_degree(6);
        let e = w.parse_element("w2^3 + w3^2").unwrap();
        assert_eq!(w.coords(&e, &basis6), F2Vector::from_bits(&[true, true]));
        assert_eq!(
            w.coords(&Element::zero(), &basis6),
            F2Vector::zeros(2)
        );

        let x = x_ring(2);
        let basis2 = x.monomials_of_degree(2);
        let e = x.parse_element("x1^2 + x1*x2").unwrap();
        assert_eq!(
            x.coords(&e, &basis2),
            F2Vector::from_bits(&[true, true, false])
        );
    }

    #[test]
    fn closed_form_series_examples() {
        assert_eq!(
            closed_form_series(&[2, 3], &[], 6).coeffs(),
            &[1, 0, 1, 1, 1, 1, 2]
        );
        assert_eq!(
            closed_form_series(&[2, 3], &[1, 2], 4).coeffs(),
            &[1, 1, 2, 3, 3]
        );
        assert_eq!(
            closed_form_series(&[4], &[3], 8).coeffs(),
            &[1, 0, 0, 1, 1, 0, 0, 1, 1]
        );
    }

    #[test]
    fn apply_map_kills_theta_generators() {
        // A projection sending w2 and w3 to zero kills w2*w3.
        let w = w_ring();
        let p = AlgebraMap::new(w.clone(), w.clone(), vec![Element::zero(), Element::zero()])
            .unwrap();
        let w2w3 = w.parse_element("w2*w3").unwrap();
        assert!(p.apply(&w2w3).is_zero());
    }

    #[test]
    fn element_text_round_trip() {
        let w = w_ring();
        for text in ["0", "1", "w2", "w2^3 + w3^2", "w2*w3 + w2^3"] {
            let e = w.parse_element(text).unwrap();
            let printed = w.format_element(&e);
            assert_eq!(w.parse_element(&printed).unwrap(), e);
        }
        // Canonical printing sorts leading monomial first.
        let e = w.parse_element("w3^2 + w2^3").unwrap();
        assert_eq!(w.format_element(&e), "w2^3 + w3^2");
    }

    #[test]
    fn parse_rejects_garbage() {
        let w = w_ring();
        assert!(w.parse_element("").is_err());
        assert!(w.parse_element("w9").is_err());
        assert!(w.parse_element("w2^").is_err());
        assert!(w.parse_element("w2 + + w3").is_err());
    }

    #[test]
    fn algebra_rejects_bad_generators() {
        assert!(GradedPolyAlgebra::new(vec![("a".into(), 0)]).is_err());
        assert!(GradedPolyAlgebra::new(vec![("a".into(), 1), ("a".into(), 2)]).is_err());
        assert!(GradedPolyAlgebra::new(vec![("2x".into(), 1)]).is_err());
    }

    fn arb_element(algebra: GradedPolyAlgebra, max_deg: usize) -> impl Strategy<Value = Element> {
        let num = algebra.num_generators();
        proptest::collection::vec(
            proptest::collection::vec(0u16..=(max_deg as u16), num),
            0..6,
        )
        .prop_map(move |rows| {
            Element::from_monomials(rows.into_iter().filter_map(|exps| {
                let m = Monomial::new(exps);
                (algebra.monomial_degree(&m) <= max_deg).then_some(m)
            }))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn multiply_commutative_associative(
            a in arb_element(x_ring(3), 5),
            b in arb_element(x_ring(3), 5),
            c in arb_element(x_ring(3), 5),
        ) {
            let ring = x_ring(3);
            prop_assert_eq!(ring.multiply(&a, &b), ring.multiply(&b, &a));
            prop_assert_eq!(
                ring.multiply(&ring.multiply(&a, &b), &c),
                ring.multiply(&a, &ring.multiply(&b, &c))
            );
            prop_assert_eq!(ring.multiply(&a, &ring.one()), a.clone());
        }

        #[test]
        fn apply_map_is_a_ring_homomorphism(
            a in arb_element(GradedPolyAlgebra::stiefel_whitney(3), 8),
            b in arb_element(GradedPolyAlgebra::stiefel_whitney(3), 8),
        ) {
            // w2 -> x1^2 + x1*x2 + x2^2, w3 -> x1^2*x2 + x1*x2^2
            let w = GradedPolyAlgebra::stiefel_whitney(3);
            let x = x_ring(2);
            let images = vec![
                x.parse_element("x1^2 + x1*x2 + x2^2").unwrap(),
                x.parse_element("x1^2*x2 + x1*x2^2").unwrap(),
            ];
            let f = AlgebraMap::new(w.clone(), x, images).unwrap();
            prop_assert_eq!(
                f.apply(&w.multiply(&a, &b)),
                f.target().multiply(&f.apply(&a), &f.apply(&b))
            );
            prop_assert_eq!(f.apply(&a.add(&b)), f.apply(&a).add(&f.apply(&b)));
        }
    }
}
