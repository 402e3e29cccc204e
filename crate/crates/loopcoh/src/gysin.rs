//! The Spin-side pipeline: presentations of H*(BSpin(n)) by the Steenrod
//! closure of w_2, the degreewise tensor product
//! H*(BSpin(n)) ⊗_{H*(BSO(n))} H*(L BSO(n)), multiplication by the degree-one
//! Euler class, and the kernel/cokernel assembly of the Gysin sequence.
//!
//! Everything is computed, nothing is transcribed: the presentation is found
//! by iterating θ_1 = w_2, θ_{k+1} = Sq^{2^{k-1}} θ_k until the next class
//! lands in the ideal of the previous ones (checked degreewise), the tensor
//! quotient is an honest relator-span computation over F_2, and the expected
//! generator-degree tables live only in the verification suite.
//!
//! Because the loop model is a free module over its base ring with the
//! square-free σ-subsets as basis, the relator span is block-diagonal across
//! σ-subsets, and a block depends only on the complementary degree; blocks
//! are therefore computed once per degree and shared.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::{Echelon, F2Matrix, F2Vector};
use crate::loops::{LoopElement, LoopModel, LoopTerm};
use crate::poly::{AlgebraMap, Element, GradedPolyAlgebra, Monomial, PowerSeries};
use crate::steenrod::BsoContext;

/// A presented quotient algebra: ambient polynomial ring modulo the ideal of
/// the relations, with further generators adjoined polynomially.
#[derive(Clone, Debug)]
pub struct Presentation {
    ambient: GradedPolyAlgebra,
    relations: Vec<Element>,
    extra_generators: Vec<(String, usize)>,
}

impl Presentation {
    pub fn new(
        ambient: GradedPolyAlgebra,
        relations: Vec<Element>,
        extra_generators: Vec<(String, usize)>,
    ) -> Result<Self> {
        for (i, rel) in relations.iter().enumerate() {
            if rel.is_zero() || ambient.homogeneous_degree(rel).is_none() {
                return Err(Error::Invalid(format!(
                    "relation {i} must be nonzero and homogeneous"
                )));
            }
        }
        for (name, degree) in &extra_generators {
            if *degree == 0 {
                return Err(Error::Invalid(format!(
                    "adjoined generator {name} must have positive degree"
                )));
            }
            if ambient.generator_index(name).is_some() {
                return Err(Error::Invalid(format!(
                    "adjoined generator {name} collides with an ambient generator"
                )));
            }
        }
        Ok(Presentation {
            ambient,
            relations,
            extra_generators,
        })
    }

    pub fn ambient(&self) -> &GradedPolyAlgebra {
        &self.ambient
    }

    pub fn relations(&self) -> &[Element] {
        &self.relations
    }

    pub fn extra_generators(&self) -> &[(String, usize)] {
        &self.extra_generators
    }

    pub fn to_file(&self) -> PresentationFile {
        PresentationFile {
            ambient_generators: (0..self.ambient.num_generators())
                .map(|i| GeneratorSpec {
                    name: self.ambient.generator_name(i).to_string(),
                    degree: self.ambient.generator_degree(i),
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| self.ambient.format_element(r))
                .collect(),
            extra_generators: self
                .extra_generators
                .iter()
                .map(|(name, degree)| GeneratorSpec {
                    name: name.clone(),
                    degree: *degree,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &PresentationFile) -> Result<Self> {
        let ambient = GradedPolyAlgebra::new(
            file.ambient_generators
                .iter()
                .map(|g| (g.name.clone(), g.degree))
                .collect(),
        )?;
        let relations = file
            .relations
            .iter()
            .map(|text| ambient.parse_element(text))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(
            ambient,
            relations,
            file.extra_generators
                .iter()
                .map(|g| (g.name.clone(), g.degree))
                .collect(),
        )
    }
}

/// On-disk form of a presentation: canonical element text for relations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresentationFile {
    pub ambient_generators: Vec<GeneratorSpec>,
    pub relations: Vec<String>,
    pub extra_generators: Vec<GeneratorSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: usize,
}

/// Decide degreewise ideal membership: is `e` in the degree-d slice of the
/// ideal generated by `relations`?
pub fn ideal_membership(
    ambient: &GradedPolyAlgebra,
    relations: &[Element],
    e: &Element,
    d: usize,
) -> bool {
    if e.is_zero() {
        return true;
    }
    let basis = ambient.monomials_of_degree(d);
    let mut ech = Echelon::new(basis.len());
    for rel in relations {
        let Some(rel_degree) = ambient.homogeneous_degree(rel) else {
            continue;
        };
        if rel_degree > d {
            continue;
        }
        for m in ambient.monomials_of_degree(d - rel_degree) {
            let product = ambient.multiply(&Element::from_monomial(m), rel);
            ech.insert(ambient.coords(&product, &basis));
        }
    }
    ech.reduce(&ambient.coords(e, &basis)).is_zero()
}

/// The presentation of H*(BSpin(n)) for 3 <= n <= 9, reconstructed by the
/// Steenrod closure of w_2: θ_1 = w_2, θ_{k+1} = Sq^{2^{k-1}} θ_k, stopping
/// as soon as the next class lies in the ideal of the previous ones; a class
/// z of degree 2^h is adjoined, h being the number of relations kept.
pub fn spin_presentation(n: usize) -> Result<Presentation> {
    let ctx = BsoContext::new(n)?;
    spin_presentation_with(&ctx)
}

pub fn spin_presentation_with(ctx: &BsoContext) -> Result<Presentation> {
    let n = ctx.n();
    if !(3..=9).contains(&n) {
        return Err(Error::Unsupported(format!(
            "spin presentations are computed for 3 <= n <= 9, got {n}"
        )));
    }
    let w = ctx.w_ring().clone();
    let mut thetas = vec![ctx.w_generator(2)];
    loop {
        let k = thetas.len();
        if k > 6 {
            return Err(Error::Invalid(
                "Steenrod closure of w_2 did not terminate within the supported range".into(),
            ));
        }
        let next = ctx.sq_w(1 << (k - 1), thetas.last().unwrap())?;
        let degree = (1 << k) + 1;
        debug_assert!(
            next.is_zero() || w.homogeneous_degree(&next) == Some(degree),
            "theta chain degree drift"
        );
        if ideal_membership(&w, &thetas, &next, degree) {
            let h = thetas.len();
            return Presentation::new(w, thetas, vec![("z".to_string(), 1 << h)]);
        }
        thetas.push(next);
    }
}

/// A basis class of the presented quotient at some degree: a representative
/// ambient monomial (chosen greedily, lexicographically smallest outside the
/// ideal slice) times a monomial in the adjoined generators.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuotientClass {
    /// Degree of the ambient part.
    pub ambient_degree: usize,
    /// Index into the representative list of that degree's slice.
    pub rep: u32,
    /// Exponents of the adjoined generators.
    pub extra: Vec<u16>,
}

/// The degree-d slice of the ambient ring modulo the ideal: chosen
/// representatives plus a solver that rewrites any element as a combination
/// of representatives modulo the ideal.
struct QuotientSlice {
    basis: Vec<Monomial>,
    reps: Vec<Monomial>,
    ideal_rank: usize,
    solver: Echelon,
}

impl QuotientSlice {
    fn build(ambient: &GradedPolyAlgebra, relations: &[Element], d: usize) -> Self {
        let basis = ambient.monomials_of_degree(d);
        let width = basis.len();

        let mut ideal_rows = Vec::new();
        for rel in relations {
            let rel_degree = ambient
                .homogeneous_degree(rel)
                .expect("relations are homogeneous");
            if rel_degree > d {
                continue;
            }
            for m in ambient.monomials_of_degree(d - rel_degree) {
                let product = ambient.multiply(&Element::from_monomial(m), rel);
                ideal_rows.push(ambient.coords(&product, &basis));
            }
        }

        // Pass 1: echelonize the ideal slice, then keep the lexicographically
        // smallest monomials that stay independent of it.
        let mut ech = Echelon::new(width);
        for row in &ideal_rows {
            ech.insert(row.clone());
        }
        let ideal_rank = ech.rank();
        let mut reps = Vec::new();
        for (i, m) in basis.iter().enumerate() {
            if ech.insert(F2Vector::unit(width, i)) {
                reps.push(m.clone());
            }
        }

        // Pass 2: a tagged solver. Ideal rows carry empty tags, so reducing a
        // vector to zero yields its representative coordinates mod the ideal.
        let mut solver = Echelon::with_tags(width, reps.len());
        for row in ideal_rows {
            solver.insert_tagged(row, F2Vector::zeros(reps.len()));
        }
        for (t, m) in reps.iter().enumerate() {
            let idx = basis
                .binary_search_by(|probe| probe.canonical_cmp(m))
                .expect("representative is a basis monomial");
            let dependent =
                solver.insert_tagged(F2Vector::unit(width, idx), F2Vector::unit(reps.len(), t));
            debug_assert!(dependent.is_none());
        }
        QuotientSlice {
            basis,
            reps,
            ideal_rank,
            solver,
        }
    }

    /// Representative coordinates of an ambient element of this degree.
    fn reduce(&self, ambient: &GradedPolyAlgebra, e: &Element) -> F2Vector {
        if e.is_zero() {
            return F2Vector::zeros(self.reps.len());
        }
        let coords = ambient.coords(e, &self.basis);
        let (residual, combo) = self.solver.reduce_tagged(&coords);
        assert!(
            residual.is_zero(),
            "representatives plus ideal span the degree slice"
        );
        combo
    }
}

/// Dimensions and rank bookkeeping of one collapsed tensor block
/// (B ⊗ A)_k / (relator span), shared by every σ-subset of complementary
/// degree k.
struct TensorBlock {
    ambient_dim: usize,
    relator_rank: usize,
    quotient_dim: usize,
}

/// The degree-d basis of the tensor product B ⊗_A M: surviving classes are
/// quotient classes times σ-subsets, together with the aggregate dimension
/// of the ambient space and the rank of the relator span.
#[derive(Clone, Debug)]
pub struct TensorBasis {
    pub degree: usize,
    pub classes: Vec<TensorClass>,
    pub ambient_dim: usize,
    pub relator_rank: usize,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TensorClass {
    /// σ-subset over the loop model's base generators.
    pub subset: u32,
    pub class: QuotientClass,
}

/// Rank-nullity record for one Euler multiplication step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RankEntry {
    pub degree: usize,
    pub domain_dim: usize,
    pub kernel_dim: usize,
    pub rank: usize,
}

/// Per-degree kernel/cokernel ledger of Euler-class multiplication, plus the
/// closed-form series it must reproduce.
#[derive(Clone, Debug, Serialize)]
pub struct GysinTable {
    pub n: usize,
    #[serde(rename = "D")]
    pub max_degree: usize,
    pub ker_dims: PowerSeries,
    pub coker_dims: PowerSeries,
    pub assembled_dims: PowerSeries,
    pub direct_dims: PowerSeries,
}

/// Output of the full assembly: the table plus the rank-nullity ledger and
/// the recovered generator degrees of the presented quotient.
#[derive(Clone, Debug)]
pub struct GysinAssembly {
    pub table: GysinTable,
    pub rank_ledger: Vec<RankEntry>,
    pub generator_degrees: Vec<usize>,
}

/// The degreewise tensor/Gysin computation for one presentation over one
/// loop model. Caches fill lazily behind locks and hand out `Arc`s, so the
/// per-degree work parallelizes over shared immutable data.
pub struct GysinContext {
    presentation: Presentation,
    model: LoopModel,
    /// Image in the presentation's ambient ring of each loop-base generator.
    base_images: Vec<Element>,
    slices: Mutex<HashMap<usize, Arc<QuotientSlice>>>,
    quotient_bases: QuotientBasisCache,
    loop_bases: Mutex<HashMap<usize, Arc<Vec<Monomial>>>>,
    blocks: Mutex<HashMap<usize, Arc<TensorBlock>>>,
    tensors: Mutex<HashMap<usize, Arc<TensorLevel>>>,
}

type QuotientBasisCache = Mutex<HashMap<usize, Arc<QuotientLevel>>>;

/// Quotient basis of one degree.
pub struct QuotientLevel {
    pub classes: Vec<QuotientClass>,
}

/// Tensor basis of one degree plus its index map.
pub struct TensorLevel {
    pub basis: TensorBasis,
    index: HashMap<TensorClass, u32>,
}

impl GysinContext {
    /// General constructor: a presentation, a loop model over the base ring,
    /// and the base map sending loop-base generators into the ambient ring.
    pub fn new(
        presentation: Presentation,
        model: LoopModel,
        base_map: &AlgebraMap,
    ) -> Result<Self> {
        if base_map.source() != model.base() {
            return Err(Error::Invalid(
                "base map must be defined on the loop model's base ring".into(),
            ));
        }
        if base_map.target() != presentation.ambient() {
            return Err(Error::Invalid(
                "base map must land in the presentation's ambient ring".into(),
            ));
        }
        let base_images = (0..model.base().num_generators())
            .map(|i| base_map.generator_image(i).clone())
            .collect();
        Ok(GysinContext {
            presentation,
            model,
            base_images,
            slices: Mutex::new(HashMap::new()),
            quotient_bases: Mutex::new(HashMap::new()),
            loop_bases: Mutex::new(HashMap::new()),
            blocks: Mutex::new(HashMap::new()),
            tensors: Mutex::new(HashMap::new()),
        })
    }

    /// The standard pipeline for BSpin(n): computed presentation, the
    /// L BSO(n) model, identity base map.
    pub fn for_spin(n: usize) -> Result<Self> {
        let ctx = BsoContext::new(n)?;
        let presentation = spin_presentation_with(&ctx)?;
        let model = LoopModel::bso(&ctx)?;
        let base_map = AlgebraMap::by_name(model.base().clone(), presentation.ambient().clone())?;
        GysinContext::new(presentation, model, &base_map)
    }

    /// Pipeline for a user-supplied presentation whose ambient ring is the
    /// Stiefel-Whitney ring of some n >= 3.
    pub fn from_presentation(presentation: Presentation) -> Result<Self> {
        let degrees = presentation.ambient().generator_degrees();
        let n = degrees.len() + 1;
        if n < 3 || degrees != (2..=n).collect::<Vec<_>>() {
            return Err(Error::Unsupported(
                "the Gysin pipeline needs ambient generators in degrees 2..=n".into(),
            ));
        }
        let ctx = BsoContext::new(n)?;
        if *presentation.ambient() != *ctx.w_ring() {
            return Err(Error::Unsupported(
                "ambient generators must be named w2, ..., wn".into(),
            ));
        }
        let model = LoopModel::bso(&ctx)?;
        let base_map = AlgebraMap::by_name(model.base().clone(), presentation.ambient().clone())?;
        GysinContext::new(presentation, model, &base_map)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn model(&self) -> &LoopModel {
        &self.model
    }

    fn slice(&self, d: usize) -> Arc<QuotientSlice> {
        if let Some(hit) = self.slices.lock().unwrap().get(&d) {
            return hit.clone();
        }
        let built = Arc::new(QuotientSlice::build(
            self.presentation.ambient(),
            self.presentation.relations(),
            d,
        ));
        self.slices.lock().unwrap().entry(d).or_insert(built).clone()
    }

    /// Rank of the degree-d slice of the relation ideal (exposed for tests).
    pub fn ideal_rank(&self, d: usize) -> usize {
        self.slice(d).ideal_rank
    }

    fn loop_base_monomials(&self, d: usize) -> Arc<Vec<Monomial>> {
        if let Some(hit) = self.loop_bases.lock().unwrap().get(&d) {
            return hit.clone();
        }
        let built = Arc::new(self.model.base().monomials_of_degree(d));
        self.loop_bases
            .lock()
            .unwrap()
            .entry(d)
            .or_insert(built)
            .clone()
    }

    /// Basis of the presented quotient (ambient/ideal, tensored with the
    /// polynomial part on the adjoined generators) at degree d.
    pub fn quotient_basis(&self, d: usize) -> Arc<QuotientLevel> {
        if let Some(hit) = self.quotient_bases.lock().unwrap().get(&d) {
            return hit.clone();
        }
        let extras = self.presentation.extra_generators();
        let mut classes = Vec::new();
        for extra in extra_exponents(extras, d) {
            let extra_degree: usize = extra
                .iter()
                .zip(extras)
                .map(|(&e, (_, deg))| e as usize * deg)
                .sum();
            let ambient_degree = d - extra_degree;
            let slice = self.slice(ambient_degree);
            for rep in 0..slice.reps.len() as u32 {
                classes.push(QuotientClass {
                    ambient_degree,
                    rep,
                    extra: extra.clone(),
                });
            }
        }
        let built = Arc::new(QuotientLevel { classes });
        self.quotient_bases
            .lock()
            .unwrap()
            .entry(d)
            .or_insert(built)
            .clone()
    }

    /// The representative ambient monomial of a quotient class.
    pub fn class_monomial(&self, class: &QuotientClass) -> Monomial {
        self.slice(class.ambient_degree).reps[class.rep as usize].clone()
    }

    /// Canonical text of a quotient class, extras appended as factors.
    pub fn format_class(&self, class: &QuotientClass) -> String {
        let ambient = self.presentation.ambient();
        let mut factors = Vec::new();
        let mono = self.class_monomial(class);
        if !mono.is_one() || class.extra.iter().all(|&e| e == 0) {
            factors.push(ambient.format_monomial(&mono));
        }
        for (i, &e) in class.extra.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = &self.presentation.extra_generators()[i].0;
            factors.push(if e == 1 {
                name.clone()
            } else {
                format!("{name}^{e}")
            });
        }
        factors.join("*")
    }

    /// Multiply an ambient monomial into a quotient class and express the
    /// result in quotient classes of the higher degree.
    fn multiply_into_class(&self, mon: &Monomial, class: &QuotientClass) -> Vec<QuotientClass> {
        let mon_degree = self.presentation.ambient().monomial_degree(mon);
        let source = self.slice(class.ambient_degree);
        let target_degree = class.ambient_degree + mon_degree;
        let target = self.slice(target_degree);
        let product = Element::from_monomial(mon.times(&source.reps[class.rep as usize]));
        let combo = target.reduce(self.presentation.ambient(), &product);
        combo
            .support()
            .into_iter()
            .map(|t| QuotientClass {
                ambient_degree: target_degree,
                rep: t as u32,
                extra: class.extra.clone(),
            })
            .collect()
    }

    /// σ-degree of a subset mask.
    fn subset_degree(&self, mask: u32) -> usize {
        (0..self.model.base().num_generators())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.model.sigma_degree(i))
            .sum()
    }

    /// The collapsed block (B ⊗ A)_k / relators; every σ-subset of
    /// complementary degree k shares this computation.
    fn block(&self, k: usize) -> Arc<TensorBlock> {
        if let Some(hit) = self.blocks.lock().unwrap().get(&k) {
            return hit.clone();
        }
        let built = Arc::new(self.compute_block(k));
        self.blocks.lock().unwrap().entry(k).or_insert(built).clone()
    }

    fn compute_block(&self, k: usize) -> TensorBlock {
        let base = self.model.base();

        // Columns: pairs (quotient class of degree j, base monomial of
        // degree k - j), with the monomial-degree-zero pairs first so the
        // surviving representatives are exactly the (class ⊗ 1) columns.
        let mut column_of: HashMap<(QuotientClass, Monomial), u32> = HashMap::new();
        let mut b_dim_k = 0usize;
        for a_degree in 0..=k {
            let b_degree = k - a_degree;
            let b_basis = self.quotient_basis(b_degree);
            let a_basis = self.loop_base_monomials(a_degree);
            if a_degree == 0 {
                b_dim_k = b_basis.classes.len();
            }
            for class in &b_basis.classes {
                for mon in a_basis.iter() {
                    let next = column_of.len() as u32;
                    column_of.insert((class.clone(), mon.clone()), next);
                }
            }
        }
        let ambient_dim = column_of.len();

        // Relator span: f(g)·b ⊗ a + b ⊗ g·a over the loop-base generators g.
        let mut ech = Echelon::new(ambient_dim);
        for g in 0..base.num_generators() {
            let g_degree = base.generator_degree(g);
            if g_degree > k {
                continue;
            }
            let image = &self.base_images[g];
            for a_degree in 0..=(k - g_degree) {
                let b_degree = k - g_degree - a_degree;
                let b_basis = self.quotient_basis(b_degree);
                let a_basis = self.loop_base_monomials(a_degree);
                for class in &b_basis.classes {
                    // f(g)·class, expressed in quotient classes.
                    let mut lifted: Vec<QuotientClass> = Vec::new();
                    for term in image.terms() {
                        for c in self.multiply_into_class(term, class) {
                            toggle_vec(&mut lifted, c);
                        }
                    }
                    for mon in a_basis.iter() {
                        let mut support: Vec<usize> = lifted
                            .iter()
                            .map(|c| column_of[&(c.clone(), mon.clone())] as usize)
                            .collect();
                        // b ⊗ (g·a): multiplication in the base ring.
                        let mut g_exps = vec![0u16; base.num_generators()];
                        g_exps[g] = 1;
                        let ga = mon.times(&Monomial::new(g_exps));
                        support.push(column_of[&(class.clone(), ga)] as usize);
                        ech.insert(F2Vector::from_support(ambient_dim, &support));
                    }
                }
            }
        }
        let relator_rank = ech.rank();
        let quotient_dim = ambient_dim - relator_rank;

        // Freeness witness: the quotient has exactly the dimension of B_k,
        // and the (class ⊗ 1) columns survive as its basis.
        assert_eq!(
            quotient_dim, b_dim_k,
            "tensor block at complementary degree {k} is not free"
        );
        let one = Monomial::one(base.num_generators());
        for class in &self.quotient_basis(k).classes {
            let col = column_of[&(class.clone(), one.clone())] as usize;
            let grew = ech.insert(F2Vector::unit(ambient_dim, col));
            assert!(
                grew,
                "class ⊗ 1 representative collapsed in block {k}; freeness violated"
            );
        }
        TensorBlock {
            ambient_dim,
            relator_rank,
            quotient_dim,
        }
    }

    /// Degree-d basis of the tensor product, as σ-subsets times quotient
    /// classes, plus the aggregate relator bookkeeping.
    pub fn tensor_basis(&self, d: usize) -> Arc<TensorLevel> {
        if let Some(hit) = self.tensors.lock().unwrap().get(&d) {
            return hit.clone();
        }
        let num = self.model.base().num_generators();
        let mut classes = Vec::new();
        let mut ambient_dim = 0usize;
        let mut relator_rank = 0usize;
        for mask in 0u32..(1u32 << num) {
            let sigma = self.subset_degree(mask);
            if sigma > d {
                continue;
            }
            let k = d - sigma;
            let block = self.block(k);
            ambient_dim += block.ambient_dim;
            relator_rank += block.relator_rank;
            debug_assert_eq!(block.quotient_dim, self.quotient_basis(k).classes.len());
            for class in &self.quotient_basis(k).classes {
                classes.push(TensorClass {
                    subset: mask,
                    class: class.clone(),
                });
            }
        }
        let index: HashMap<TensorClass, u32> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect();
        let basis = TensorBasis {
            degree: d,
            classes,
            ambient_dim,
            relator_rank,
        };
        debug_assert_eq!(basis.classes.len(), basis.ambient_dim - basis.relator_rank);
        let built = Arc::new(TensorLevel { basis, index });
        self.tensors.lock().unwrap().entry(d).or_insert(built).clone()
    }

    /// The Euler class 1 ⊗ σw_2: the generator of the one-dimensional
    /// degree-one part of the tensor algebra.
    pub fn euler_class(&self) -> LoopElement {
        self.model.sigma_generator(0)
    }

    /// Matrix of multiplication by the Euler class from degree d to d+1,
    /// with products reduced through the loop model's squaring rule and then
    /// re-expressed in the quotient tensor basis.
    pub fn euler_matrix(&self, d: usize) -> F2Matrix {
        let source = self.tensor_basis(d);
        let target = self.tensor_basis(d + 1);
        let mut matrix = F2Matrix::zeros(target.basis.classes.len(), source.basis.classes.len());
        let euler = self.euler_class();
        let num = self.model.base().num_generators();
        for (col, tc) in source.basis.classes.iter().enumerate() {
            let sigma_part = LoopElement::from_terms([LoopTerm {
                base: Monomial::one(num),
                classes: tc.subset,
            }]);
            let product = self.model.multiply(&sigma_part, &euler);
            for term in product.terms() {
                for qc in self.multiply_into_class(&term.base, &tc.class) {
                    let key = TensorClass {
                        subset: term.classes,
                        class: qc,
                    };
                    let row = target.index[&key] as usize;
                    let bit = matrix.get(row, col);
                    matrix.set(row, col, !bit);
                }
            }
        }
        matrix
    }

    /// Effective polynomial generator degrees of the presented quotient,
    /// recovered from its Poincaré series up to `truncation`. Fails if the
    /// series is not that of a free graded-commutative polynomial algebra.
    pub fn effective_degrees(&self, truncation: usize) -> Result<Vec<usize>> {
        let mut residual: Vec<i64> = (0..=truncation)
            .map(|d| self.quotient_basis(d).classes.len() as i64)
            .collect();
        let mut degrees = Vec::new();
        for d in 1..=truncation {
            let count = residual[d];
            if count < 0 {
                return Err(Error::Invalid(format!(
                    "quotient series has negative residual at degree {d}; not a polynomial algebra"
                )));
            }
            for _ in 0..count {
                degrees.push(d);
                for i in (d..=truncation).rev() {
                    residual[i] -= residual[i - d];
                }
            }
        }
        Ok(degrees)
    }

    /// Run the full assembly up to `max_degree`. `progress` is invoked with
    /// each finished degree (diagnostics only; completion order is not
    /// guaranteed under parallel execution).
    pub fn assemble(
        &self,
        max_degree: usize,
        progress: &(dyn Fn(usize) + Sync),
    ) -> Result<GysinAssembly> {
        // Warm the shared caches: quotient slices sequentially (cheap), then
        // the collapsed blocks in parallel (the expensive eliminations).
        for d in 0..=max_degree + 1 {
            self.slice(d);
            self.quotient_basis(d);
            self.loop_base_monomials(d);
        }
        (0..=max_degree + 1).into_par_iter().for_each(|k| {
            self.block(k);
        });
        for d in 0..=max_degree + 1 {
            self.tensor_basis(d);
        }

        let mut ledger: Vec<RankEntry> = (0..=max_degree)
            .into_par_iter()
            .map(|d| {
                let gamma = self.euler_matrix(d);
                let domain_dim = gamma.cols();
                let rank = gamma.rank();
                let kernel_dim = gamma.kernel_basis().len();
                progress(d);
                RankEntry {
                    degree: d,
                    domain_dim,
                    kernel_dim,
                    rank,
                }
            })
            .collect();
        ledger.sort_by_key(|e| e.degree);

        let mut ker = Vec::with_capacity(max_degree + 1);
        let mut coker = Vec::with_capacity(max_degree + 1);
        let mut assembled = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let dim_d = self.tensor_basis(d).basis.classes.len() as u64;
            debug_assert_eq!(dim_d as usize, ledger[d].domain_dim);
            let ker_d = ledger[d].kernel_dim as u64;
            // Multiplication out of degree -1 is the zero map.
            let previous_rank = if d == 0 { 0 } else { ledger[d - 1].rank as u64 };
            let coker_d = dim_d - previous_rank;
            ker.push(ker_d);
            coker.push(coker_d);
            assembled.push(ker_d + coker_d);
        }

        let generator_degrees = self.effective_degrees(max_degree + 1)?;
        let direct_base = GradedPolyAlgebra::new(
            generator_degrees
                .iter()
                .enumerate()
                .map(|(i, &deg)| (format!("q{i}_{deg}"), deg))
                .collect(),
        )?;
        let direct_dims = LoopModel::series_only(direct_base)?.series(max_degree);

        let n = self.model.base().num_generators() + 1;
        Ok(GysinAssembly {
            table: GysinTable {
                n,
                max_degree,
                ker_dims: PowerSeries::from_coeffs(ker),
                coker_dims: PowerSeries::from_coeffs(coker),
                assembled_dims: PowerSeries::from_coeffs(assembled),
                direct_dims,
            },
            rank_ledger: ledger,
            generator_degrees,
        })
    }
}

/// All exponent vectors over the adjoined generators of weighted degree at
/// most `d`, ascending lexicographically.
fn extra_exponents(extras: &[(String, usize)], d: usize) -> Vec<Vec<u16>> {
    fn rec(
        extras: &[(String, usize)],
        i: usize,
        budget: usize,
        current: &mut Vec<u16>,
        out: &mut Vec<Vec<u16>>,
    ) {
        if i == extras.len() {
            out.push(current.clone());
            return;
        }
        let degree = extras[i].1;
        for e in 0..=(budget / degree) as u16 {
            current.push(e);
            rec(extras, i + 1, budget - e as usize * degree, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    rec(extras, 0, d, &mut current, &mut out);
    out
}

fn toggle_vec(list: &mut Vec<QuotientClass>, item: QuotientClass) {
    match list.iter().position(|c| *c == item) {
        Some(i) => {
            list.swap_remove(i);
        }
        None => list.push(item),
    }
}

/// Convenience entry point: assemble the Gysin table for BSpin(n).
pub fn gysin_assemble(
    n: usize,
    max_degree: usize,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<GysinAssembly> {
    GysinContext::for_spin(n)?.assemble(max_degree, progress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::closed_form_series;

    const NO_PROGRESS: &(dyn Fn(usize) + Sync) = &|_| {};

    #[test]
    fn spin_presentation_n3() {
        let p = spin_presentation(3).unwrap();
        let w = p.ambient();
        assert_eq!(
            p.relations()
                .iter()
                .map(|r| w.format_element(r))
                .collect::<Vec<_>>(),
            vec!["w2", "w3"]
        );
        assert_eq!(p.extra_generators(), &[("z".to_string(), 4)]);
    }

    #[test]
    fn spin_presentation_n5() {
        let p = spin_presentation(5).unwrap();
        let w = p.ambient();
        assert_eq!(
            p.relations()
                .iter()
                .map(|r| w.format_element(r))
                .collect::<Vec<_>>(),
            vec!["w2", "w3", "w2*w3 + w5"]
        );
        assert_eq!(p.extra_generators(), &[("z".to_string(), 8)]);
    }

    #[test]
    fn spin_presentation_rejects_out_of_range() {
        assert!(spin_presentation(2).is_err());
        assert!(spin_presentation(10).is_err());
    }

    #[test]
    fn ideal_membership_examples() {
        let w = GradedPolyAlgebra::new(vec![
            ("w2".into(), 2),
            ("w3".into(), 3),
            ("w4".into(), 4),
        ])
        .unwrap();
        let rels = vec![
            w.parse_element("w2").unwrap(),
            w.parse_element("w3").unwrap(),
        ];
        assert!(ideal_membership(&w, &rels, &Element::zero(), 4));
        assert!(ideal_membership(
            &w,
            &[w.parse_element("w2").unwrap()],
            &w.parse_element("w2*w4").unwrap(),
            6
        ));
        // The degree-4 slice of (w2, w3) is spanned by w2^2 alone.
        assert!(!ideal_membership(
            &w,
            &rels,
            &w.parse_element("w4").unwrap(),
            4
        ));
        assert!(ideal_membership(
            &w,
            &rels,
            &w.parse_element("w2^2").unwrap(),
            4
        ));
    }

    #[test]
    fn quotient_basis_for_spin3() {
        let ctx = GysinContext::for_spin(3).unwrap();
        let b0 = ctx.quotient_basis(0);
        assert_eq!(b0.classes.len(), 1);
        assert_eq!(ctx.format_class(&b0.classes[0]), "1");
        for d in 1..=3 {
            assert_eq!(ctx.quotient_basis(d).classes.len(), 0, "degree {d}");
        }
        let b4 = ctx.quotient_basis(4);
        assert_eq!(b4.classes.len(), 1);
        assert_eq!(ctx.format_class(&b4.classes[0]), "z");
    }

    #[test]
    fn quotient_series_of_spin3_is_the_z_polynomial_ring() {
        let ctx = GysinContext::for_spin(3).unwrap();
        let dims: Vec<u64> = (0..=8)
            .map(|d| ctx.quotient_basis(d).classes.len() as u64)
            .collect();
        assert_eq!(dims, closed_form_series(&[4], &[], 8).coeffs());
        assert_eq!(ctx.effective_degrees(8).unwrap(), vec![4]);
    }

    #[test]
    fn tensor_dims_for_spin3() {
        let ctx = GysinContext::for_spin(3).unwrap();
        // (1 + t + t^2 + t^3)/(1 - t^4): every degree is one-dimensional.
        for d in 0..=8 {
            let t = ctx.tensor_basis(d);
            assert_eq!(t.basis.classes.len(), 1, "degree {d}");
            assert_eq!(
                t.basis.classes.len(),
                t.basis.ambient_dim - t.basis.relator_rank
            );
        }
        // Degree 1 is 1 ⊗ σw2; degree 3 is 1 ⊗ σw2 σw3.
        assert_eq!(ctx.tensor_basis(1).basis.classes[0].subset, 0b01);
        assert_eq!(ctx.tensor_basis(3).basis.classes[0].subset, 0b11);
    }

    #[test]
    fn euler_matrix_for_spin3() {
        let ctx = GysinContext::for_spin(3).unwrap();
        // Degree 0: 1 maps to σw2, the generator of the degree-1 space.
        let m0 = ctx.euler_matrix(0);
        assert_eq!((m0.rows(), m0.cols()), (1, 1));
        assert!(m0.get(0, 0));
        // Degree 3: σw2·σw2σw3 = σw3·σw3 = w2 σw3 + w3 σw2 dies in the
        // quotient, so the map is zero.
        let m3 = ctx.euler_matrix(3);
        assert_eq!((m3.rows(), m3.cols()), (1, 1));
        assert!(!m3.get(0, 0));
    }

    #[test]
    fn gysin_assembly_for_spin3() {
        let assembly = gysin_assemble(3, 8, NO_PROGRESS).unwrap();
        let t = &assembly.table;
        assert_eq!(t.assembled_dims.coeffs(), &[1, 0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(t.assembled_dims, t.direct_dims);
        // The unit class survives through the cokernel of the empty map.
        assert_eq!(t.ker_dims.coeff(0), 0);
        assert_eq!(t.coker_dims.coeff(0), 1);
        for e in &assembly.rank_ledger {
            assert_eq!(e.kernel_dim + e.rank, e.domain_dim, "degree {}", e.degree);
        }
    }

    #[test]
    fn gysin_assembly_for_spin4() {
        // Spin(4) ≅ SU(2) x SU(2): two degree-4 generators.
        let assembly = gysin_assemble(4, 8, NO_PROGRESS).unwrap();
        assert_eq!(assembly.generator_degrees, vec![4, 4]);
        let t = &assembly.table;
        assert_eq!(t.assembled_dims.coeffs(), &[1, 0, 0, 2, 2, 0, 1, 4, 3]);
        assert_eq!(t.assembled_dims, t.direct_dims);
    }

    #[test]
    fn gysin_assembly_for_spin5() {
        // Spin(5) ≅ Sp(2): generators in degrees 4 and 8.
        let assembly = gysin_assemble(5, 12, NO_PROGRESS).unwrap();
        assert_eq!(assembly.generator_degrees, vec![4, 8]);
        let expected = closed_form_series(&[4, 8], &[3, 7], 12);
        assert_eq!(assembly.table.assembled_dims, expected);
        assert_eq!(assembly.table.direct_dims, expected);
    }

    #[test]
    fn degenerate_presentation_exercises_empty_tensor_degrees() {
        // Quotient F_2 with nothing adjoined: the tensor algebra is just the
        // sigma-subset span, which dies above degree 3, so the Euler map
        // shrinks to 0-by-k and 0-by-0 matrices.
        let w = GradedPolyAlgebra::stiefel_whitney(3);
        let pres = Presentation::new(
            w.clone(),
            vec![w.parse_element("w2").unwrap(), w.parse_element("w3").unwrap()],
            vec![],
        )
        .unwrap();
        let ctx = GysinContext::from_presentation(pres).unwrap();
        let dims: Vec<usize> = (0..=6)
            .map(|d| ctx.tensor_basis(d).basis.classes.len())
            .collect();
        assert_eq!(dims, vec![1, 1, 1, 1, 0, 0, 0]);
        let m3 = ctx.euler_matrix(3);
        assert_eq!((m3.rows(), m3.cols()), (0, 1));
        assert_eq!(m3.rank(), 0);
        let m4 = ctx.euler_matrix(4);
        assert_eq!((m4.rows(), m4.cols()), (0, 0));

        // Assembly still balances: the top sigma-product survives in the
        // kernel while nothing is adjoined on the direct side.
        let assembly = ctx.assemble(6, NO_PROGRESS).unwrap();
        assert_eq!(
            assembly.table.ker_dims.coeffs(),
            &[0, 0, 0, 1, 0, 0, 0]
        );
        assert_eq!(
            assembly.table.assembled_dims.coeffs(),
            &[1, 0, 0, 1, 0, 0, 0]
        );
        assert_eq!(assembly.generator_degrees, Vec::<usize>::new());
        assert_eq!(
            assembly.table.direct_dims.coeffs(),
            &[1, 0, 0, 0, 0, 0, 0]
        );
        for e in &assembly.rank_ledger {
            assert_eq!(e.kernel_dim + e.rank, e.domain_dim);
        }
    }

    #[test]
    fn presentation_file_round_trip() {
        let p = spin_presentation(5).unwrap();
        let file = p.to_file();
        let back = Presentation::from_file(&file).unwrap();
        assert_eq!(back.ambient(), p.ambient());
        assert_eq!(back.relations(), p.relations());
        assert_eq!(back.extra_generators(), p.extra_generators());
        // The round-tripped presentation drives the same pipeline.
        let ctx = GysinContext::from_presentation(back).unwrap();
        assert_eq!(ctx.effective_degrees(12).unwrap(), vec![4, 8]);
    }

    #[test]
    fn presentation_rejects_bad_data() {
        let w = GradedPolyAlgebra::stiefel_whitney(3);
        assert!(Presentation::new(w.clone(), vec![Element::zero()], vec![]).is_err());
        let inhomog = w.parse_element("w2 + w3").unwrap();
        assert!(Presentation::new(w.clone(), vec![inhomog], vec![]).is_err());
        assert!(Presentation::new(w.clone(), vec![], vec![("w2".into(), 4)]).is_err());
        assert!(Presentation::new(w, vec![], vec![("z".into(), 0)]).is_err());
    }
}
