//! The group `G = R^(2n+1)`, its left-invariant frames, the contact form and
//! polynomial vector-field calculus.
//!
//! Coordinates are interleaved `(x1, y1, ..., xn, yn, z)`. The frame fields are
//!
//! ```text
//! X_i = d/dx_i - y_i d/dz,   Y_i = d/dy_i + x_i d/dz,   T = d/dz
//! ```
//!
//! and every sign elsewhere in the crate is derived from these.

use std::fmt::{self, Debug};
use std::ops::{Mul, Neg};

use num_traits::{Num, Zero};

use crate::error::{Error, Result};
use crate::exact;
use crate::poly::{max_abs, rat_from_f64, Polynomial, Rational};

/// Scalars a group point can carry: floats for numerics, rationals for
/// exact checks.
pub trait Scalar: Clone + PartialEq + Debug + Num + Neg<Output = Self> {
    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational {
    fn is_finite_value(&self) -> bool {
        true
    }
}

#[derive(Clone, PartialEq)]
pub struct GroupPoint<S = f64> {
    n: usize,
    xy: Vec<S>,
    z: S,
}

impl<S: Scalar> GroupPoint<S> {
    pub fn new(xy: Vec<S>, z: S) -> Result<Self> {
        if xy.is_empty() || !xy.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "horizontal part must have 2n > 0 entries, got {}",
                xy.len()
            )));
        }
        if !z.is_finite_value() || xy.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        Ok(Self {
            n: xy.len() / 2,
            xy,
            z,
        })
    }

    pub fn origin(n: usize) -> Self {
        assert!(n > 0, "n must be positive");
        Self {
            n,
            xy: vec![S::zero(); 2 * n],
            z: S::zero(),
        }
    }

    /// Builds a point from the flat interleaved coordinate list `(x1, y1, ..., z)`.
    pub fn from_coords(coords: &[S]) -> Result<Self> {
        match coords.split_last() {
            Some((z, xy)) => Self::new(xy.to_vec(), z.clone()),
            None => Err(Error::InvalidInput("empty coordinate list".into())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xy(&self) -> &[S] {
        &self.xy
    }

    pub fn x(&self, i: usize) -> &S {
        &self.xy[2 * i]
    }

    pub fn y(&self, i: usize) -> &S {
        &self.xy[2 * i + 1]
    }

    pub fn z(&self) -> &S {
        &self.z
    }

    pub fn coords(&self) -> Vec<S> {
        let mut v = self.xy.clone();
        v.push(self.z.clone());
        v
    }

    pub fn is_origin(&self) -> bool {
        self.z.is_zero() && self.xy.iter().all(|v| v.is_zero())
    }

    /// Group law `(x, z)(x', z') = (x + x', z + z' + sum x_i y'_i - sum x'_i y_i)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let xy = self
            .xy
            .iter()
            .zip(&other.xy)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        let mut z = self.z.clone() + other.z.clone();
        for i in 0..self.n {
            z = z + self.x(i).clone() * other.y(i).clone() - other.x(i).clone() * self.y(i).clone();
        }
        Ok(Self { n: self.n, xy, z })
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            xy: self.xy.iter().map(|v| -v.clone()).collect(),
            z: -self.z.clone(),
        }
    }

    /// Differential of left translation by `self`, applied to a tangent
    /// vector given in coordinate components. The group law is affine in the
    /// second factor, so this matrix does not depend on the base point.
    pub fn left_translation_differential(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), 2 * self.n + 1);
        let mut out = v.to_vec();
        let mut dz = v[2 * self.n].clone();
        for i in 0..self.n {
            dz = dz - self.y(i).clone() * v[2 * i].clone() + self.x(i).clone() * v[2 * i + 1].clone();
        }
        out[2 * self.n] = dz;
        out
    }
}

impl GroupPoint<f64> {
    pub fn to_exact(&self) -> GroupPoint<Rational> {
        GroupPoint {
            n: self.n,
            xy: self.xy.iter().map(|&v| rat_from_f64(v)).collect(),
            z: rat_from_f64(self.z),
        }
    }

    /// Sup-norm distance between coordinate vectors.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<S: Debug> Debug for GroupPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupPoint(xy = {:?}, z = {:?})", self.xy, self.z)
    }
}

/// Frame selector, indices 1-based as in `X_1, ..., X_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    X(usize),
    Y(usize),
    T,
}

impl Frame {
    /// Position in the frame order `(X_1, Y_1, ..., X_n, Y_n, T)`.
    pub fn index(self, n: usize) -> usize {
        match self {
            Frame::X(i) => 2 * (i - 1),
            Frame::Y(i) => 2 * (i - 1) + 1,
            Frame::T => 2 * n,
        }
    }

    pub fn from_index(idx: usize, n: usize) -> Frame {
        if idx == 2 * n {
            Frame::T
        } else if idx.is_multiple_of(2) {
            Frame::X(idx / 2 + 1)
        } else {
            Frame::Y(idx / 2 + 1)
        }
    }

    /// All frame fields in order.
    pub fn all(n: usize) -> Vec<Frame> {
        (0..=2 * n).map(|k| Frame::from_index(k, n)).collect()
    }

    fn validate(self, n: usize) -> Result<()> {
        match self {
            Frame::X(i) | Frame::Y(i) if i == 0 || i > n => {
                Err(Error::InvalidSelector(self.to_string(), n))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::X(i) => write!(f, "X{i}"),
            Frame::Y(i) => write!(f, "Y{i}"),
            Frame::T => write!(f, "T"),
        }
    }
}

/// Vector field `sum_k V^k d/dq_k` with polynomial coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    n: usize,
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(n: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.len() != 2 * n + 1 || components.iter().any(|c| c.n_vars() != 2 * n + 1) {
            return Err(Error::InvalidInput(format!(
                "vector field on n = {n} needs {} components in {} variables",
                2 * n + 1,
                2 * n + 1
            )));
        }
        Ok(Self { n, components })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            components: vec![Polynomial::zero(2 * n + 1); 2 * n + 1],
        }
    }

    /// The coordinate field `d/dq_idx`.
    pub fn coordinate(n: usize, idx: usize) -> Self {
        let mut v = Self::zero(n);
        v.components[idx] = Polynomial::one(2 * n + 1);
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        2 * self.n + 1
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, idx: usize) -> &Polynomial {
        &self.components[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            n: self.n,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Multiplies every component by a polynomial function.
    pub fn times(&self, f: &Polynomial) -> Self {
        Self {
            n: self.n,
            components: self.components.iter().map(|p| p * f).collect(),
        }
    }

    /// Directional derivative `V(f) = sum_j V^j df/dq_j`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::zero(self.n_vars()), |acc, (j, vj)| {
                if vj.is_zero() {
                    acc
                } else {
                    &acc + &(vj * &f.derivative(j))
                }
            })
    }

    pub fn eval(&self, p: &GroupPoint<Rational>) -> Vec<Rational> {
        let c = p.coords();
        self.components.iter().map(|v| v.eval(&c)).collect()
    }

    pub fn eval_f64(&self, p: &GroupPoint<f64>) -> Vec<f64> {
        let c = p.coords();
        self.components.iter().map(|v| v.eval_f64(&c)).collect()
    }

    /// Jacobian `dV^k/dq_j` at the origin, row `k`, column `j`.
    pub fn linearization_at_origin(&self) -> Vec<Vec<Rational>> {
        let origin = vec![Rational::zero(); self.n_vars()];
        self.components
            .iter()
            .map(|vk| (0..self.n_vars()).map(|j| vk.derivative(j).eval(&origin)).collect())
            .collect()
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c}) d/d{}", crate::poly::var_name(k, self.n_vars())))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyVectorField[{self}]")
    }
}

/// One-form `sum_k w_k dq_k` with polynomial coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyOneForm {
    n: usize,
    components: Vec<Polynomial>,
}

impl PolyOneForm {
    pub fn new(n: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.len() != 2 * n + 1 || components.iter().any(|c| c.n_vars() != 2 * n + 1) {
            return Err(Error::InvalidInput(format!(
                "one-form on n = {n} needs {} components",
                2 * n + 1
            )));
        }
        Ok(Self { n, components })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            components: vec![Polynomial::zero(2 * n + 1); 2 * n + 1],
        }
    }

    /// Contact form `dz + sum (y_i dx_i - x_i dy_i)`.
    pub fn contact(n: usize) -> Self {
        let nv = 2 * n + 1;
        let mut components = vec![Polynomial::zero(nv); nv];
        for i in 0..n {
            components[2 * i] = Polynomial::var(nv, 2 * i + 1);
            components[2 * i + 1] = -Polynomial::var(nv, 2 * i);
        }
        components[2 * n] = Polynomial::one(nv);
        Self { n, components }
    }

    /// Exterior derivative of a function.
    pub fn differential(n: usize, f: &Polynomial) -> Self {
        Self {
            n,
            components: (0..2 * n + 1).map(|j| f.derivative(j)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, idx: usize) -> &Polynomial {
        &self.components[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn times(&self, f: &Polynomial) -> Self {
        Self {
            n: self.n,
            components: self.components.iter().map(|p| p * f).collect(),
        }
    }
}

impl fmt::Display for PolyOneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nv = 2 * self.n + 1;
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c}) d{}", crate::poly::var_name(k, nv)))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for PolyOneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyOneForm[{self}]")
    }
}

pub fn frame_field(n: usize, which: Frame) -> Result<PolyVectorField> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    which.validate(n)?;
    let nv = 2 * n + 1;
    let mut v = PolyVectorField::zero(n);
    match which {
        Frame::X(i) => {
            v.components[2 * (i - 1)] = Polynomial::one(nv);
            v.components[2 * n] = -Polynomial::var(nv, 2 * (i - 1) + 1);
        }
        Frame::Y(i) => {
            v.components[2 * (i - 1) + 1] = Polynomial::one(nv);
            v.components[2 * n] = Polynomial::var(nv, 2 * (i - 1));
        }
        Frame::T => v.components[2 * n] = Polynomial::one(nv),
    }
    Ok(v)
}

/// `[V, W] = V(W) - W(V)`.
pub fn lie_bracket(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    v.check(w)?;
    let components = (0..v.n_vars())
        .map(|k| &v.apply(&w.components[k]) - &w.apply(&v.components[k]))
        .collect();
    Ok(PolyVectorField { n: v.n, components })
}

/// Pointwise pairing `w(V) = sum_k w_k V^k`.
pub fn pair(form: &PolyOneForm, v: &PolyVectorField) -> Result<Polynomial> {
    if form.n != v.n {
        return Err(Error::DimensionMismatch {
            expected: form.n,
            found: v.n,
        });
    }
    Ok(form
        .components
        .iter()
        .zip(&v.components)
        .fold(Polynomial::zero(v.n_vars()), |acc, (a, b)| &acc + &(a * b)))
}

#[derive(Debug, Clone)]
pub struct LeftInvarianceReport {
    pub n: usize,
    pub samples: usize,
    pub fields: usize,
    pub max_residual: Rational,
}

impl LeftInvarianceReport {
    pub fn passed(&self) -> bool {
        self.max_residual.is_zero()
    }
}

/// Checks `dL_p V(0) = V(p)` exactly for every frame field and sample.
pub fn left_invariance_check(n: usize, samples: &[GroupPoint<Rational>]) -> Result<LeftInvarianceReport> {
    let origin = GroupPoint::<Rational>::origin(n);
    let frames: Vec<PolyVectorField> = Frame::all(n)
        .into_iter()
        .map(|f| frame_field(n, f))
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    for p in samples {
        if p.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        for v in &frames {
            let pushed = p.left_translation_differential(&v.eval(&origin));
            let direct = v.eval(p);
            residuals.extend(pushed.into_iter().zip(direct).map(|(a, b)| a - b));
        }
    }
    Ok(LeftInvarianceReport {
        n,
        samples: samples.len(),
        fields: frames.len(),
        max_residual: max_abs(residuals),
    })
}

/// Rank at `p` of `{X_i(p), Y_i(p)}`, plus `[X_1, Y_1](p)` when
/// `include_bracket` is set.
pub fn bracket_generating_rank(n: usize, p: &GroupPoint<f64>, include_bracket: bool) -> Result<usize> {
    if p.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.n(),
        });
    }
    let q = p.to_exact();
    let mut rows = Vec::new();
    for i in 1..=n {
        rows.push(frame_field(n, Frame::X(i))?.eval(&q));
        rows.push(frame_field(n, Frame::Y(i))?.eval(&q));
    }
    if include_bracket {
        let b = lie_bracket(&frame_field(n, Frame::X(1))?, &frame_field(n, Frame::Y(1))?)?;
        rows.push(b.eval(&q));
    }
    Ok(exact::rank(&rows))
}

/// Expresses a field with constant coefficients in the frame basis, using
/// the fact that frames at the origin are the coordinate basis.
pub fn frame_coefficients_at_origin(v: &PolyVectorField) -> Vec<Rational> {
    v.eval(&GroupPoint::origin(v.n()))
}

impl<S: Scalar> Mul for &GroupPoint<S> {
    type Output = GroupPoint<S>;
    fn mul(self, rhs: &GroupPoint<S>) -> GroupPoint<S> {
        self.multiply(rhs).expect("matching dimensions")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use proptest::prelude::*;

    fn pt(c: &[i64]) -> GroupPoint<Rational> {
        GroupPoint::from_coords(&c.iter().map(|&v| int(v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(pt(&[0, 0, 0]).multiply(&pt(&[1, 2, 3])).unwrap(), pt(&[1, 2, 3]));
        assert_eq!(pt(&[1, 0, 0]).multiply(&pt(&[0, 1, 0])).unwrap(), pt(&[1, 1, 1]));
        assert_eq!(pt(&[0, 1, 0]).multiply(&pt(&[1, 0, 0])).unwrap(), pt(&[1, 1, -1]));
        let p = pt(&[3, -2, 5]);
        assert!(p.multiply(&pt(&[-3, 2, -5])).unwrap().is_origin());
    }

    #[test]
    fn multiply_dimension_mismatch() {
        let err = pt(&[0, 0, 0]).multiply(&pt(&[0, 0, 0, 0, 0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, found: 2 });
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(pt(&[0, 0, 0]).inverse(), pt(&[0, 0, 0]));
        assert_eq!(pt(&[1, 1, 1]).inverse(), pt(&[-1, -1, -1]));
        assert!(pt(&[1, 1, 1]).multiply(&pt(&[1, 1, 1]).inverse()).unwrap().is_origin());
    }

    #[test]
    fn frame_examples() {
        let nv = 3;
        let x1 = frame_field(1, Frame::X(1)).unwrap();
        assert_eq!(
            x1.components(),
            &[Polynomial::one(nv), Polynomial::zero(nv), -Polynomial::var(nv, 1)]
        );
        let t = frame_field(1, Frame::T).unwrap();
        assert_eq!(t, PolyVectorField::coordinate(1, 2));
        let y2 = frame_field(2, Frame::Y(2)).unwrap();
        let expected = PolyVectorField::coordinate(2, 3)
            .add(&PolyVectorField::coordinate(2, 4).times(&Polynomial::var(5, 2)))
            .unwrap();
        assert_eq!(y2, expected);
        assert!(matches!(frame_field(1, Frame::X(2)), Err(Error::InvalidSelector(..))));
        assert!(matches!(frame_field(2, Frame::Y(0)), Err(Error::InvalidSelector(..))));
    }

    #[test]
    fn commutation_rules() {
        for n in 1..=3 {
            let t = frame_field(n, Frame::T).unwrap();
            for a in Frame::all(n) {
                for b in Frame::all(n) {
                    let br = lie_bracket(&frame_field(n, a).unwrap(), &frame_field(n, b).unwrap()).unwrap();
                    let expected = match (a, b) {
                        (Frame::X(i), Frame::Y(j)) if i == j => t.scale(&int(2)),
                        (Frame::Y(i), Frame::X(j)) if i == j => t.scale(&int(-2)),
                        _ => PolyVectorField::zero(n),
                    };
                    assert_eq!(br, expected, "[{a}, {b}] for n = {n}");
                }
            }
        }
    }

    #[test]
    fn pairing_with_contact_form() {
        let theta = PolyOneForm::contact(1);
        assert!(pair(&theta, &frame_field(1, Frame::X(1)).unwrap()).unwrap().is_zero());
        assert!(pair(&theta, &frame_field(1, Frame::Y(1)).unwrap()).unwrap().is_zero());
        assert_eq!(pair(&theta, &frame_field(1, Frame::T).unwrap()).unwrap(), Polynomial::one(3));
        assert_eq!(
            pair(&theta, &PolyVectorField::coordinate(1, 0)).unwrap(),
            Polynomial::var(3, 1)
        );
        assert!(pair(&PolyOneForm::contact(2), &PolyVectorField::zero(1)).is_err());
    }

    #[test]
    fn left_invariance_examples() {
        let r = left_invariance_check(1, &[pt(&[0, 0, 0]), pt(&[1, 2, 3])]).unwrap();
        assert!(r.passed());
        let samples: Vec<_> = (0..100)
            .map(|k| {
                let c: Vec<Rational> = (0..5).map(|j| rat((k * 7 + j * 13) % 17 - 8, j + 3)).collect();
                GroupPoint::from_coords(&c).unwrap()
            })
            .collect();
        let r = left_invariance_check(2, &samples).unwrap();
        assert!(r.passed());
        assert_eq!(r.samples, 100);
    }

    #[test]
    fn bracket_generating_rank_examples() {
        assert_eq!(bracket_generating_rank(1, &GroupPoint::origin(1), true).unwrap(), 3);
        let p = GroupPoint::new(vec![0.3, -1.7, 2.2, 0.9], 4.1).unwrap();
        assert_eq!(bracket_generating_rank(2, &p, true).unwrap(), 5);
        assert_eq!(bracket_generating_rank(1, &GroupPoint::origin(1), false).unwrap(), 2);
    }

    fn exact_point(n: usize) -> impl Strategy<Value = GroupPoint<Rational>> {
        prop::collection::vec((-20i64..20, 1i64..6), 2 * n + 1).prop_map(|v| {
            let c: Vec<Rational> = v.into_iter().map(|(a, b)| rat(a, b)).collect();
            GroupPoint::from_coords(&c).unwrap()
        })
    }

    fn small_field(n: usize) -> impl Strategy<Value = PolyVectorField> {
        let nv = 2 * n + 1;
        prop::collection::vec(
            prop::collection::vec((prop::collection::vec(0u32..2, nv), -3i64..4), 0..3),
            nv,
        )
        .prop_map(move |comps| {
            let components = comps
                .into_iter()
                .map(|terms| {
                    terms.into_iter().fold(Polynomial::zero(nv), |acc, (e, c)| {
                        let e: Vec<u32> = e;
                        let p = if e.iter().sum::<u32>() <= 2 {
                            Polynomial::monomial(nv, e, int(c))
                        } else {
                            Polynomial::zero(nv)
                        };
                        &acc + &p
                    })
                })
                .collect();
            PolyVectorField::new(n, components).unwrap()
        })
    }

    proptest! {
        #[test]
        fn group_axioms(p in exact_point(2), q in exact_point(2), r in exact_point(2)) {
            prop_assert_eq!(p.multiply(&q).unwrap().multiply(&r).unwrap(), p.multiply(&q.multiply(&r).unwrap()).unwrap());
            prop_assert_eq!(p.multiply(&GroupPoint::origin(2)).unwrap(), p.clone());
            prop_assert!(p.multiply(&p.inverse()).unwrap().is_origin());
            prop_assert_eq!(p.inverse().inverse(), p);
        }

        #[test]
        fn bracket_antisymmetry_and_jacobi(u in small_field(1), v in small_field(1), w in small_field(1)) {
            prop_assert!(lie_bracket(&u, &u).unwrap().is_zero());
            let uv = lie_bracket(&u, &v).unwrap();
            let vu = lie_bracket(&v, &u).unwrap();
            prop_assert!(uv.add(&vu).unwrap().is_zero());
            let j = lie_bracket(&u, &lie_bracket(&v, &w).unwrap()).unwrap()
                .add(&lie_bracket(&v, &lie_bracket(&w, &u).unwrap()).unwrap()).unwrap()
                .add(&lie_bracket(&w, &uv).unwrap()).unwrap();
            prop_assert!(j.is_zero());
        }

        #[test]
        fn left_invariance_at_random_points(p in exact_point(2)) {
            prop_assert!(left_invariance_check(2, &[p]).unwrap().passed());
        }
    }
}
