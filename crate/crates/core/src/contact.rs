//! Infinitesimal contact transformations of `theta = dz + sum (y_i dx_i - x_i dy_i)`:
//! fields `X` with `L_X theta = f theta` for a polynomial multiplier `f`.
//!
//! Matrices acting on `V_1` (the horizontal directions at the origin) use the
//! block order `(x_1, ..., x_n, y_1, ..., y_n)`; polynomial fields use the
//! interleaved coordinates `(x_1, y_1, ..., x_n, y_n, z)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{inverse, mat_mul, rank, solve_columns, transpose};
use crate::group::{lie_bracket, pair, GroupPoint, PolyOneForm, PolyVectorField};
use crate::poly::{int, Polynomial, Rational};

fn check_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Exterior derivative as the antisymmetric matrix `(d w)_jk = d_j w_k - d_k w_j`.
fn exterior_derivative(w: &PolyOneForm) -> Vec<Vec<Polynomial>> {
    let d = w.components().len();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| w.component(k).derivative(j) - w.component(j).derivative(k))
                .collect()
        })
        .collect()
}

/// `L_X w = i_X dw + d(w(X))`.
pub fn lie_derivative_one_form(x: &PolyVectorField, w: &PolyOneForm) -> Result<PolyOneForm> {
    check_n(x.n(), w.n())?;
    let n = x.n();
    let d = 2 * n + 1;
    let dw = exterior_derivative(w);
    let mut comps = vec![Polynomial::zero(d); d];
    for (j, row) in dw.iter().enumerate() {
        let xj = x.component(j);
        if xj.is_zero() {
            continue;
        }
        for (k, c) in comps.iter_mut().enumerate() {
            if !row[k].is_zero() {
                *c = &*c + &(xj * &row[k]);
            }
        }
    }
    let interior = PolyOneForm::new(n, comps)?;
    Ok(interior.add(&PolyOneForm::differential(n, &pair(w, x)?)))
}

/// The multiplier `f` of `L_X theta = f theta`, or the residual `L_X theta - f theta`.
pub fn contact_multiplier(x: &PolyVectorField) -> Result<Polynomial> {
    let n = x.n();
    let theta = PolyOneForm::contact(n);
    let lx = lie_derivative_one_form(x, &theta)?;
    // theta has dz coefficient 1, so f is the dz coefficient of L_X theta.
    let f = lx.component(2 * n).clone();
    let residual = lx.sub(&theta.times(&f));
    if residual.is_zero() {
        Ok(f)
    } else {
        Err(Error::NotContact {
            residual: residual.to_string(),
        })
    }
}

/// Interleaved coordinate index of the `r`-th block-order direction.
fn block_to_coord(n: usize, r: usize) -> usize {
    if r < n {
        2 * r
    } else {
        2 * (r - n) + 1
    }
}

/// Matrix of `d theta` restricted to `V_1`, computed from `theta`: `J_rs = d theta(e_r, e_s)`.
pub fn symplectic_form(n: usize) -> Vec<Vec<Rational>> {
    let dtheta = exterior_derivative(&PolyOneForm::contact(n));
    let origin = vec![Rational::zero(); 2 * n + 1];
    (0..2 * n)
        .map(|r| {
            (0..2 * n)
                .map(|s| dtheta[block_to_coord(n, r)][block_to_coord(n, s)].eval(&origin))
                .collect()
        })
        .collect()
}

/// `A^T J + J A` for the symplectic form of `V_1`.
fn sp_defect(a: &[Vec<Rational>], j: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let l = mat_mul(&transpose(a), j);
    let r = mat_mul(j, a);
    l.iter()
        .zip(&r)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

fn is_zero_matrix(m: &[Vec<Rational>]) -> bool {
    m.iter().all(|row| row.iter().all(Zero::is_zero))
}

/// `A` with the corresponding field `sum_{r,s} A_rs w_r d/dw_s`, that is the
/// endomorphism `sum A_rs e_s (x) e_r^*` of `V_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpMatrix {
    n: usize,
    a: Vec<Vec<Rational>>,
}

impl SpMatrix {
    pub fn new(n: usize, a: Vec<Vec<Rational>>) -> Result<Self> {
        if n == 0 || a.len() != 2 * n || a.iter().any(|r| r.len() != 2 * n) {
            return Err(Error::InvalidInput(format!("need a {0}x{0} matrix", 2 * n)));
        }
        if !is_zero_matrix(&sp_defect(&a, &symplectic_form(n))) {
            return Err(Error::InvalidInput("matrix is not infinitesimally symplectic".into()));
        }
        Ok(Self { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.a
    }

    /// Matrix of the endomorphism in the usual convention, `e_r -> sum_s M_sr e_s`.
    pub fn endomorphism(&self) -> Vec<Vec<Rational>> {
        transpose(&self.a)
    }

    pub fn is_symplectic(&self) -> bool {
        is_zero_matrix(&sp_defect(&self.a, &symplectic_form(self.n)))
    }

    pub fn vector_field(&self) -> PolyVectorField {
        let n = self.n;
        let d = 2 * n + 1;
        let mut comps = vec![Polynomial::zero(d); d];
        for r in 0..2 * n {
            let wr = Polynomial::var(d, block_to_coord(n, r));
            for s in 0..2 * n {
                if !self.a[r][s].is_zero() {
                    let c = &mut comps[block_to_coord(n, s)];
                    *c = &*c + &wr.scale(&self.a[r][s]);
                }
            }
        }
        PolyVectorField::new(n, comps).expect("sized")
    }
}

/// Basis of `sp(V_1)`: `J^{-1} S` for the elementary symmetric matrices `S`,
/// labelled by the pair `(p, q)`, `p <= q`, in block order.
pub fn sp_basis(n: usize) -> Vec<((usize, usize), SpMatrix)> {
    let j = symplectic_form(n);
    let jinv = inverse(&j).expect("nondegenerate");
    let m = 2 * n;
    let mut out = Vec::with_capacity(n * (2 * n + 1));
    for p in 0..m {
        for q in p..m {
            let mut s = vec![vec![Rational::zero(); m]; m];
            s[p][q] = Rational::one();
            s[q][p] = Rational::one();
            let a = mat_mul(&jinv, &s);
            out.push(((p, q), SpMatrix { n, a }));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Alpha,
    Beta,
    Gamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub family: Family,
    pub field: PolyVectorField,
    pub multiplier: Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactCatalog {
    n: usize,
    entries: Vec<CatalogEntry>,
}

fn block_label(n: usize, r: usize) -> String {
    if r < n {
        format!("x{}", r + 1)
    } else {
        format!("y{}", r - n + 1)
    }
}

/// `sum (x_j d/dx_j + y_j d/dy_j) + z d/dz`.
fn euler_field(n: usize) -> PolyVectorField {
    let d = 2 * n + 1;
    PolyVectorField::new(n, (0..d).map(|k| Polynomial::var(d, k)).collect()).expect("sized")
}

impl ContactCatalog {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn family(&self, f: Family) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(move |e| e.family == f)
    }
}

/// The alpha, beta and gamma families, each member checked to be contact.
///
/// The second special family is `x_i E - z d/dy_i` with `E` the Euler field
/// `sum (x_j d/dx_j + y_j d/dy_j) + z d/dz`; the sign of `z d/dy_i` is forced
/// by the contact condition for this `theta`.
pub fn build_catalog(n: usize) -> Result<ContactCatalog> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let d = 2 * n + 1;
    let var = |k: usize| Polynomial::var(d, k);
    let coord = |k: usize| PolyVectorField::coordinate(n, k);
    let dz = coord(2 * n);
    let euler = euler_field(n);
    let mut raw: Vec<(String, Family, PolyVectorField)> = Vec::new();

    for i in 0..n {
        let (x, y) = (2 * i, 2 * i + 1);
        raw.push((format!("alpha_x{}", i + 1), Family::Alpha, coord(x).add(&dz.times(&var(y)))?));
        raw.push((format!("alpha_y{}", i + 1), Family::Alpha, coord(y).sub(&dz.times(&var(x)))?));
    }
    raw.push(("alpha_z".into(), Family::Alpha, dz.clone()));

    for ((p, q), a) in sp_basis(n) {
        raw.push((
            format!("sp_{}_{}", block_label(n, p), block_label(n, q)),
            Family::Beta,
            a.vector_field(),
        ));
    }
    raw.push(("dilation".into(), Family::Beta, euler.add(&dz.times(&var(2 * n)))?));
    for i in 0..n {
        let (x, y) = (2 * i, 2 * i + 1);
        let zf = var(2 * n);
        raw.push((
            format!("special_x{}", i + 1),
            Family::Beta,
            coord(x).times(&zf).add(&euler.times(&var(y)))?,
        ));
        raw.push((
            format!("special_y{}", i + 1),
            Family::Beta,
            euler.times(&var(x)).sub(&coord(y).times(&zf))?,
        ));
    }
    raw.push(("gamma".into(), Family::Gamma, euler.times(&var(2 * n))));

    let entries = raw
        .into_iter()
        .map(|(name, family, field)| match contact_multiplier(&field) {
            Ok(multiplier) => Ok(CatalogEntry {
                name,
                family,
                field,
                multiplier,
            }),
            Err(_) => Err(Error::ConstructionFailed(name)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContactCatalog { n, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitivityReport {
    pub samples: usize,
    pub expected_rank: usize,
    pub min_rank: usize,
}

impl TransitivityReport {
    pub fn passed(&self) -> bool {
        self.min_rank == self.expected_rank
    }
}

/// Exact rank of the alpha fields at each sample.
pub fn transitivity_check(catalog: &ContactCatalog, samples: &[GroupPoint<Rational>]) -> Result<TransitivityReport> {
    let n = catalog.n();
    let mut min_rank = 2 * n + 1;
    for p in samples {
        check_n(n, p.n())?;
        let rows: Vec<Vec<Rational>> = catalog.family(Family::Alpha).map(|e| e.field.eval(p)).collect();
        min_rank = min_rank.min(rank(&rows));
    }
    Ok(TransitivityReport {
        samples: samples.len(),
        expected_rank: 2 * n + 1,
        min_rank,
    })
}

/// Linearization at the origin in the basis `(u = e_0, V_1)`, split along
/// `K + N + M`: `L = lambda C + K + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyDecomposition {
    pub name: String,
    /// Full linearization, rows and columns in the order `(z, x_1..x_n, y_1..y_n)`.
    pub linearization: Vec<Vec<Rational>>,
    /// Multiple of `C` (`C v_1 = v_1`, `C u = 2u`).
    pub c_coefficient: Rational,
    /// `sp(V_1)` part, as an endomorphism of `V_1` in block order.
    pub k_part: Vec<Vec<Rational>>,
    /// Image of `u` in `V_1`.
    pub n_part: Vec<Rational>,
}

impl IsotropyDecomposition {
    pub fn family_label(&self) -> &'static str {
        let k = !is_zero_matrix(&self.k_part);
        let nn = self.n_part.iter().any(|v| !v.is_zero());
        let m = !self.c_coefficient.is_zero();
        match (k, nn, m) {
            (false, false, false) => "zero",
            (true, false, false) => "K",
            (false, true, false) => "N",
            (false, false, true) => "M",
            _ => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    pub n: usize,
    pub fields: Vec<IsotropyDecomposition>,
}

/// Splits `lin` (rows: components, columns: derivatives, interleaved order).
pub fn isotropy_decomposition(name: &str, n: usize, lin: &[Vec<Rational>]) -> Result<IsotropyDecomposition> {
    let d = 2 * n + 1;
    // Basis position -> interleaved coordinate: u = z first, then V_1 in block order.
    let to_coord = |b: usize| if b == 0 { 2 * n } else { block_to_coord(n, b - 1) };
    let l: Vec<Vec<Rational>> = (0..d)
        .map(|r| (0..d).map(|c| lin[to_coord(r)][to_coord(c)].clone()).collect())
        .collect();
    let fail = |reason: String| Error::NotInIsotropyAlgebra {
        name: name.to_string(),
        reason,
    };
    if let Some(c) = (1..d).find(|&c| !l[0][c].is_zero()) {
        return Err(fail(format!("V_1 is not preserved (u-component {} of column {c})", l[0][c])));
    }
    let lambda = &l[0][0] / int(2);
    let k_part: Vec<Vec<Rational>> = (1..d)
        .map(|r| {
            (1..d)
                .map(|c| if r == c { &l[r][c] - &lambda } else { l[r][c].clone() })
                .collect()
        })
        .collect();
    // The sp condition for an endomorphism M is M^T J + J M = 0.
    if !is_zero_matrix(&sp_defect(&k_part, &symplectic_form(n))) {
        return Err(fail("restriction to V_1 is not conformally symplectic with the C weighting".into()));
    }
    Ok(IsotropyDecomposition {
        name: name.to_string(),
        linearization: l.clone(),
        c_coefficient: lambda,
        k_part,
        n_part: (1..d).map(|r| l[r][0].clone()).collect(),
    })
}

/// Decomposes the linearization of every catalog field vanishing at the origin.
pub fn isotropy_check(catalog: &ContactCatalog) -> Result<IsotropyReport> {
    let n = catalog.n();
    let fields = catalog
        .entries()
        .iter()
        .filter(|e| e.field.components().iter().all(|c| c.constant_term().is_zero()))
        .map(|e| isotropy_decomposition(&e.name, n, &e.field.linearization_at_origin()))
        .collect::<Result<Vec<_>>>()?;
    Ok(IsotropyReport { n, fields })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosurePair {
    pub left: String,
    pub right: String,
    /// Nonzero coefficients of the bracket in the catalog, as exact rationals.
    pub expansion: BTreeMap<String, String>,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureTable {
    pub pairs: Vec<ClosurePair>,
}

impl ClosureTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

type Key = (usize, Vec<u32>);

fn flatten(v: &PolyVectorField, index: &BTreeMap<Key, usize>) -> Option<Vec<Rational>> {
    let mut out = vec![Rational::zero(); index.len()];
    for (k, comp) in v.components().iter().enumerate() {
        for (mono, c) in comp.terms() {
            let slot = index.get(&(k, mono.clone()))?;
            out[*slot] = c.clone();
        }
    }
    Some(out)
}

/// Brackets every pair `i <= j` of catalog fields and expands the result in
/// the catalog exactly.
pub fn bracket_closure_check(catalog: &ContactCatalog) -> Result<ClosureTable> {
    let entries = catalog.entries();
    let mut keys: BTreeSet<Key> = BTreeSet::new();
    for e in entries {
        for (k, comp) in e.field.components().iter().enumerate() {
            keys.extend(comp.terms().map(|(m, _)| (k, m.clone())));
        }
    }
    let index: BTreeMap<Key, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    let columns: Vec<Vec<Rational>> = entries
        .iter()
        .map(|e| flatten(&e.field, &index).expect("own monomials"))
        .collect();

    let mut jobs = Vec::new();
    for i in 0..entries.len() {
        for j in i..entries.len() {
            jobs.push((i, j));
        }
    }
    let expand = |&(i, j): &(usize, usize)| -> Result<ClosurePair> {
        let (a, b) = (&entries[i], &entries[j]);
        let br = lie_bracket(&a.field, &b.field)?;
        let not_closed = || Error::NotClosed {
            left: a.name.clone(),
            right: b.name.clone(),
            residual: br.to_string(),
        };
        let target = flatten(&br, &index).ok_or_else(not_closed)?;
        let coeffs = solve_columns(&columns, &target).ok_or_else(not_closed)?;
        let mut recombined = PolyVectorField::zero(catalog.n());
        for (c, e) in coeffs.iter().zip(entries) {
            if !c.is_zero() {
                recombined = recombined.add(&e.field.scale(c))?;
            }
        }
        let residual = br.sub(&recombined)?;
        if !residual.is_zero() {
            return Err(Error::NotClosed {
                left: a.name.clone(),
                right: b.name.clone(),
                residual: residual.to_string(),
            });
        }
        Ok(ClosurePair {
            left: a.name.clone(),
            right: b.name.clone(),
            expansion: coeffs
                .iter()
                .zip(entries)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, e)| (e.name.clone(), c.to_string()))
                .collect(),
            residual: "0".into(),
        })
    };

    #[cfg(feature = "parallel")]
    let pairs: Vec<Result<ClosurePair>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(expand).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let pairs: Vec<Result<ClosurePair>> = jobs.iter().map(expand).collect();
    Ok(ClosureTable {
        pairs: pairs.into_iter().collect::<Result<Vec<_>>>()?,
    })
}
