//! Steenrod squares on F_2 polynomial algebras.
//!
//! A [`SteenrodRule`] fixes the finitely many nonzero squares on each
//! generator; everything else is forced by linearity and the Cartan formula
//! Sq^i(ab) = Σ_j Sq^j(a) Sq^{i-j}(b). The action used throughout the crate
//! is the canonical one on rings generated in degree one (Sq^0 = id,
//! Sq^1 x = x^2), and squares of Stiefel-Whitney classes are obtained by
//! computing in the degree-one ring and solving back to the w-basis. The Wu
//! formula is kept purely as an independent cross-check.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::f2::Echelon;
use crate::poly::{AlgebraMap, Element, GradedPolyAlgebra, Monomial};

/// A Steenrod action on a polynomial algebra, defined on its generators.
pub struct SteenrodRule {
    algebra: GradedPolyAlgebra,
    /// (generator index, i) -> Sq^i of that generator, for the nonzero i >= 1.
    squares: HashMap<(usize, usize), Element>,
    /// (generator index, power, i) -> Sq^i(g^power); the Cartan recursion is
    /// exponential without this.
    memo: Mutex<HashMap<(usize, u16, usize), Element>>,
}

impl SteenrodRule {
    pub fn new(
        algebra: GradedPolyAlgebra,
        mut squares: HashMap<(usize, usize), Element>,
    ) -> Result<Self> {
        for g in 0..algebra.num_generators() {
            let deg = algebra.generator_degree(g);
            // The top square is the ring square; install it if absent.
            let top = algebra.multiply(&algebra.generator(g), &algebra.generator(g));
            match squares.get(&(g, deg)) {
                Some(given) if *given != top => {
                    return Err(Error::Invalid(format!(
                        "Sq^{deg} of generator {} must be its square",
                        algebra.generator_name(g)
                    )));
                }
                Some(_) => {}
                None => {
                    squares.insert((g, deg), top);
                }
            }
        }
        for (&(g, i), img) in &squares {
            let deg = algebra.generator_degree(g);
            if i == 0 || i > deg {
                return Err(Error::Invalid(format!(
                    "Sq^{i} assigned on generator {} of degree {deg}; only 1..=degree is allowed",
                    algebra.generator_name(g)
                )));
            }
            if !img.is_zero() && algebra.homogeneous_degree(img) != Some(deg + i) {
                return Err(Error::Invalid(format!(
                    "Sq^{i} of generator {} must be homogeneous of degree {}",
                    algebra.generator_name(g),
                    deg + i
                )));
            }
        }
        Ok(SteenrodRule {
            algebra,
            squares,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// The canonical rule on an algebra generated in degree one:
    /// Sq^0 x = x and Sq^1 x = x^2 on every generator.
    pub fn degree_one(algebra: GradedPolyAlgebra) -> Self {
        assert!(
            (0..algebra.num_generators()).all(|g| algebra.generator_degree(g) == 1),
            "degree_one rule needs all generators in degree 1"
        );
        SteenrodRule::new(algebra, HashMap::new()).expect("canonical rule is valid")
    }

    pub fn algebra(&self) -> &GradedPolyAlgebra {
        &self.algebra
    }

    /// Sq^i on a homogeneous element, by linearity and the Cartan formula.
    pub fn sq(&self, i: usize, e: &Element) -> Element {
        if i == 0 {
            return e.clone();
        }
        let mut out = Element::zero();
        for m in e.terms() {
            out.add_assign(&self.sq_monomial(i, m));
        }
        out
    }

    /// φ(e) = Sq^{deg e - 1}(e), the top square below the squaring operation.
    /// Panics on zero or degree-0 input.
    pub fn phi(&self, e: &Element) -> Element {
        let d = self
            .algebra
            .homogeneous_degree(e)
            .expect("phi needs a nonzero homogeneous element");
        assert!(d >= 1, "phi is undefined in degree 0");
        self.sq(d - 1, e)
    }

    fn sq_monomial(&self, i: usize, m: &Monomial) -> Element {
        // Cartan convolution across the generator-power factors of m:
        // acc[j] holds Sq^j of the factors consumed so far.
        let mut acc: Vec<Element> = vec![Element::zero(); i + 1];
        acc[0] = self.algebra.one();
        for (g, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut next: Vec<Element> = vec![Element::zero(); i + 1];
            for j in 0..=i {
                if acc[j].is_zero() {
                    continue;
                }
                let max_b = (i - j).min(self.algebra.generator_degree(g) * e as usize);
                for b in 0..=max_b {
                    let factor = self.sq_generator_power(g, e, b);
                    if factor.is_zero() {
                        continue;
                    }
                    next[j + b].add_assign(&self.algebra.multiply(&acc[j], &factor));
                }
            }
            acc = next;
        }
        acc.swap_remove(i)
    }

    /// Sq^i(g^k), memoized; splits g^k = g·g^{k-1} and applies Cartan.
    fn sq_generator_power(&self, g: usize, k: u16, i: usize) -> Element {
        if i == 0 {
            let mut exps = vec![0u16; self.algebra.num_generators()];
            exps[g] = k;
            return Element::from_monomial(Monomial::new(exps));
        }
        if k == 0 {
            return Element::zero();
        }
        if k == 1 {
            return self.squares.get(&(g, i)).cloned().unwrap_or_else(Element::zero);
        }
        if let Some(hit) = self.memo.lock().unwrap().get(&(g, k, i)) {
            return hit.clone();
        }
        let gen_degree = self.algebra.generator_degree(g);
        let mut out = Element::zero();
        for j in 0..=i.min(gen_degree) {
            let left = self.sq_generator_power(g, 1, j);
            if left.is_zero() {
                continue;
            }
            let right = self.sq_generator_power(g, k - 1, i - j);
            if right.is_zero() {
                continue;
            }
            out.add_assign(&self.algebra.multiply(&left, &right));
        }
        self.memo.lock().unwrap().insert((g, k, i), out.clone());
        out
    }
}

/// Parity of a binomial coefficient by Lucas' theorem. `binomial(a, 0) = 1`
/// for every a, including the negative upper indices the Wu formula hits.
pub fn binomial_is_odd(a: i64, b: i64) -> bool {
    if b == 0 {
        return true;
    }
    if a < 0 || b < 0 || a < b {
        return false;
    }
    (a as u64) & (b as u64) == b as u64
}

/// Wu's formula for Sq^i(w_j) in F_2[w_2, ..., w_n]:
/// Σ_{t=0}^{i} C(j+t-i-1, t) w_{i-t} w_{j+t}, with w_0 = 1, w_1 = 0 and
/// w_k = 0 for k > n. Used only as an oracle against the computed action.
pub fn wu_formula(i: usize, j: usize, n: usize) -> Element {
    assert!(1 <= i && i <= j && j <= n, "wu_formula needs 1 <= i <= j <= n");
    let w = GradedPolyAlgebra::stiefel_whitney(n);
    let mut terms = Vec::new();
    for t in 0..=i {
        if !binomial_is_odd((j + t) as i64 - i as i64 - 1, t as i64) {
            continue;
        }
        let a = i - t;
        let b = j + t;
        if a == 1 || b == 1 || b > n {
            continue; // w_1 = 0 and classes above w_n vanish
        }
        let mut exps = vec![0u16; w.num_generators()];
        if a >= 2 {
            exps[a - 2] += 1;
        }
        exps[b - 2] += 1;
        terms.push(Monomial::new(exps));
    }
    Element::from_monomials(terms)
}

/// The algebraic picture of BA_{n-1} -> BSO(n) on mod-2 cohomology: the
/// degree-one ring F_2[x_1, ..., x_{n-1}] with its canonical Steenrod action,
/// the Stiefel-Whitney ring F_2[w_2, ..., w_n], and the restriction sending
/// w_i to the i-th elementary symmetric function of x_1, ..., x_{n-1} and
/// x_n := x_1 + ... + x_{n-1}.
pub struct BsoContext {
    n: usize,
    x_ring: GradedPolyAlgebra,
    w_ring: GradedPolyAlgebra,
    alpha: AlgebraMap,
    rule: SteenrodRule,
    express: Mutex<HashMap<usize, ExpressSolver>>,
}

struct ExpressSolver {
    w_basis: Vec<Monomial>,
    x_basis: Vec<Monomial>,
    echelon: Echelon,
}

impl BsoContext {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Unsupported(format!(
                "the Stiefel-Whitney picture needs n >= 2, got {n}"
            )));
        }
        let x_ring = GradedPolyAlgebra::degree_one("x", n - 1);
        let w_ring = GradedPolyAlgebra::stiefel_whitney(n);

        // The n torus lines: x_1, ..., x_{n-1} and their sum.
        let mut lines: Vec<Element> = (0..n - 1).map(|i| x_ring.generator(i)).collect();
        let mut sum = Element::zero();
        for l in &lines {
            sum.add_assign(l);
        }
        lines.push(sum);

        // Elementary symmetric functions e_1, ..., e_n of the lines, via the
        // coefficient recurrence of Π (1 + x_i t).
        let mut elementary: Vec<Element> = vec![x_ring.one()];
        for line in &lines {
            let mut next = Vec::with_capacity(elementary.len() + 1);
            for k in 0..=elementary.len() {
                let mut coeff = if k < elementary.len() {
                    elementary[k].clone()
                } else {
                    Element::zero()
                };
                if k > 0 {
                    coeff.add_assign(&x_ring.multiply(&elementary[k - 1], line));
                }
                next.push(coeff);
            }
            elementary = next;
        }
        debug_assert!(elementary[1].is_zero(), "e_1 vanishes after substituting x_n");

        let images = (2..=n).map(|j| elementary[j].clone()).collect();
        let alpha = AlgebraMap::new(w_ring.clone(), x_ring.clone(), images)?;
        let rule = SteenrodRule::degree_one(x_ring.clone());
        Ok(BsoContext {
            n,
            x_ring,
            w_ring,
            alpha,
            rule,
            express: Mutex::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_ring(&self) -> &GradedPolyAlgebra {
        &self.x_ring
    }

    pub fn w_ring(&self) -> &GradedPolyAlgebra {
        &self.w_ring
    }

    /// The restriction map alpha*: F_2[w_2..w_n] -> F_2[x_1..x_{n-1}].
    pub fn alpha(&self) -> &AlgebraMap {
        &self.alpha
    }

    /// The canonical Steenrod rule on the x-ring.
    pub fn rule(&self) -> &SteenrodRule {
        &self.rule
    }

    /// The class w_j as an element of the w-ring.
    pub fn w_generator(&self, j: usize) -> Element {
        assert!((2..=self.n).contains(&j), "w_{j} is not a generator");
        self.w_ring.generator(j - 2)
    }

    /// The unique w-polynomial mapping to `e` under alpha*, found by solving
    /// the degreewise linear system over the images of w-monomials.
    pub fn express_in_w(&self, e: &Element) -> Result<Element> {
        if e.is_zero() {
            return Ok(Element::zero());
        }
        let d = self
            .x_ring
            .homogeneous_degree(e)
            .expect("express_in_w needs a homogeneous element");
        let mut cache = self.express.lock().unwrap();
        let solver = cache.entry(d).or_insert_with(|| self.build_solver(d));
        let coords = self.x_ring.coords(e, &solver.x_basis);
        let (residual, combo) = solver.echelon.reduce_tagged(&coords);
        if !residual.is_zero() {
            return Err(Error::NotInWImage { degree: d });
        }
        Ok(Element::from_monomials(
            combo.support().into_iter().map(|t| solver.w_basis[t].clone()),
        ))
    }

    fn build_solver(&self, d: usize) -> ExpressSolver {
        let w_basis = self.w_ring.monomials_of_degree(d);
        let x_basis = self.x_ring.monomials_of_degree(d);
        let mut echelon = Echelon::with_tags(x_basis.len(), w_basis.len());
        for (t, wm) in w_basis.iter().enumerate() {
            let image = self.alpha.image_of_monomial(wm);
            let coords = self.x_ring.coords(&image, &x_basis);
            let mut tag = crate::f2::F2Vector::zeros(w_basis.len());
            tag.set(t, true);
            let dependent = echelon.insert_tagged(coords, tag);
            // alpha* is injective on the w-subalgebra; a dependency here
            // would be an internal inconsistency, not a data error.
            assert!(
                dependent.is_none(),
                "w-monomial images became dependent in degree {d}"
            );
        }
        ExpressSolver {
            w_basis,
            x_basis,
            echelon,
        }
    }

    /// Sq^i of a w-ring element, computed in the x-ring and solved back.
    pub fn sq_w(&self, i: usize, e: &Element) -> Result<Element> {
        let image = self.alpha.apply(e);
        self.express_in_w(&self.rule.sq(i, &image))
    }

    /// φ of a w-ring element: the top Steenrod square below squaring.
    pub fn phi_w(&self, e: &Element) -> Result<Element> {
        let d = self
            .w_ring
            .homogeneous_degree(e)
            .expect("phi needs a nonzero homogeneous element");
        assert!(d >= 1, "phi is undefined in degree 0");
        self.sq_w(d - 1, e)
    }
}
