//! Harmonic analysis on finite abelian groups `Z_{n1} x ... x Z_{nk}`.
//!
//! Normalization: the Fourier transform of a *function* carries the Haar
//! probability weight `1/|G|`,
//! `f^(g) = (1/|G|) sum_t conj(g(t)) f(t)`,
//! while the transform of a *measure* (a vector of atoms) carries none,
//! `mu^(g) = sum_t conj(g(t)) mu_t`. With these conventions
//! `(f * mu)^ = f^ mu^` and `f = sum_g f^(g) g`.
//!
//! Elements and characters are both enumerated lexicographically by their
//! coordinate tuples, last coordinate fastest.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Largest supported group order.
pub const MAX_GROUP_ORDER: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    moduli: Vec<usize>,
    order: usize,
}

/// Coordinates of an element, reduced modulo each factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub usize);

/// A character, identified by its dual coordinates (same enumeration as elements).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character(pub usize);

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidInput("a group needs at least one cyclic factor".into()));
        }
        if let Some(&m) = moduli.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidInput(format!("cyclic factor Z{m}: modulus must be >= 2")));
        }
        let mut order = 1usize;
        for &m in &moduli {
            order = order
                .checked_mul(m)
                .filter(|&o| o <= MAX_GROUP_ORDER)
                .ok_or_else(|| Error::SizeGuard(format!("group order exceeds {MAX_GROUP_ORDER}")))?;
        }
        Ok(Self { moduli, order })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(0)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> {
        (0..self.order).map(GroupElement)
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> {
        (0..self.order).map(Character)
    }

    /// Coordinate tuple of the element (or character) with the given index.
    pub fn coords(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        let mut out = vec![0; self.moduli.len()];
        for (slot, &m) in out.iter_mut().zip(&self.moduli).rev() {
            *slot = rest % m;
            rest /= m;
        }
        out
    }

    pub fn element_from_coords(&self, coords: &[usize]) -> Result<GroupElement> {
        if coords.len() != self.moduli.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates for a group with {} factors",
                coords.len(),
                self.moduli.len()
            )));
        }
        let mut index = 0;
        for (&c, &m) in coords.iter().zip(&self.moduli) {
            index = index * m + c % m;
        }
        Ok(GroupElement(index))
    }

    fn combine(&self, s: usize, t: usize, sign: isize) -> usize {
        let (mut s, mut t) = (s, t);
        let mut index = 0;
        let mut stride = 1;
        for &m in self.moduli.iter().rev() {
            let (a, b) = (s % m, t % m);
            let c = if sign >= 0 { (a + b) % m } else { (a + m - b) % m };
            index += c * stride;
            stride *= m;
            s /= m;
            t /= m;
        }
        index
    }

    pub fn add(&self, s: GroupElement, t: GroupElement) -> GroupElement {
        GroupElement(self.combine(s.0, t.0, 1))
    }

    pub fn sub(&self, s: GroupElement, t: GroupElement) -> GroupElement {
        GroupElement(self.combine(s.0, t.0, -1))
    }

    /// `g(t) = exp(2 pi i sum_j g_j t_j / n_j)`.
    pub fn character_value(&self, g: Character, t: GroupElement) -> Complex64 {
        let (mut a, mut b) = (g.0, t.0);
        let mut turns = 0.0;
        for &m in self.moduli.iter().rev() {
            turns += ((a % m) * (b % m) % m) as f64 / m as f64;
            a /= m;
            b /= m;
        }
        let turns = turns.fract();
        Complex64::from_polar(1.0, TAU * turns)
    }

    /// Values of `g` at every element.
    pub fn character_function(&self, g: Character) -> GroupFunction {
        let values = self.elements().map(|t| self.character_value(g, t)).collect();
        GroupFunction {
            group: self.clone(),
            values,
        }
    }

    /// Matrix `[g(t)]` with rows indexed by characters and columns by elements.
    pub fn character_table(&self) -> Result<CMatrix> {
        if self.order > 4096 {
            return Err(Error::SizeGuard(format!(
                "character table of order {} exceeds 4096",
                self.order
            )));
        }
        Ok(CMatrix::from_fn(self.order, self.order, |g, t| {
            self.character_value(Character(g), GroupElement(t))
        }))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Parses `"Z4xZ3xZ5"`; whitespace is ignored, `x`, `X` and `×` separate factors.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::InvalidInput("empty group specification".into()));
        }
        let mut moduli = Vec::new();
        for factor in compact.split(['x', 'X', '×']) {
            let digits = factor
                .strip_prefix('Z')
                .ok_or_else(|| Error::InvalidInput(format!("group factor {factor:?} must look like Z<n>")))?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::InvalidInput(format!("group factor {factor:?}: bad modulus")));
            }
            let m: usize = digits
                .parse()
                .map_err(|_| Error::InvalidInput(format!("group factor {factor:?}: modulus overflows")))?;
            moduli.push(m);
        }
        Self::new(moduli)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z{m}")).collect();
        f.write_str(&parts.join("x"))
    }
}

/// A complex function on the group, indexed by element enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

/// A complex measure given by its atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasure {
    group: FiniteAbelianGroup,
    atoms: Vec<Complex64>,
}

fn check_len(group: &FiniteAbelianGroup, len: usize) -> Result<()> {
    if len != group.order() {
        return Err(Error::ShapeMismatch(format!(
            "{len} values for a group of order {}",
            group.order()
        )));
    }
    Ok(())
}

impl GroupFunction {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        check_len(&group, values.len())?;
        Ok(Self { group, values })
    }

    pub fn from_real(group: FiniteAbelianGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zero(group: FiniteAbelianGroup) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); group.order()];
        Self { group, values }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, t: GroupElement) -> Complex64 {
        self.values[t.0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.norm() == 0.0)
    }
}

impl GroupMeasure {
    pub fn new(group: FiniteAbelianGroup, atoms: Vec<Complex64>) -> Result<Self> {
        check_len(&group, atoms.len())?;
        Ok(Self { group, atoms })
    }

    /// Unit point mass at `t`.
    pub fn dirac(group: FiniteAbelianGroup, t: GroupElement) -> Self {
        let mut atoms = vec![Complex64::new(0.0, 0.0); group.order()];
        atoms[t.0] = Complex64::new(1.0, 0.0);
        Self { group, atoms }
    }

    /// The measure `g dm` with density `g` against Haar probability.
    pub fn character_density(group: FiniteAbelianGroup, g: Character) -> Self {
        let n = group.order() as f64;
        let atoms = group.elements().map(|t| group.character_value(g, t) / n).collect();
        Self { group, atoms }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn variation(&self) -> f64 {
        self.atoms.iter().map(|z| z.norm()).sum()
    }
}

/// `f^(g) = (1/|G|) sum_t conj(g(t)) f(t)`, indexed by character enumeration.
pub fn fourier(f: &GroupFunction) -> Vec<Complex64> {
    let n = f.group.order() as f64;
    transform(&f.group, &f.values).into_iter().map(|z| z / n).collect()
}

/// `mu^(g) = sum_t conj(g(t)) mu_t` (no Haar weight).
pub fn measure_fourier(mu: &GroupMeasure) -> Vec<Complex64> {
    transform(&mu.group, &mu.atoms)
}

fn transform(group: &FiniteAbelianGroup, values: &[Complex64]) -> Vec<Complex64> {
    group
        .characters()
        .map(|g| {
            group
                .elements()
                .zip(values)
                .map(|(t, v)| group.character_value(g, t).conj() * v)
                .sum()
        })
        .collect()
}

/// `f(t) = sum_g c_g g(t)`; inverse of [`fourier`].
pub fn inverse_fourier(group: &FiniteAbelianGroup, coeffs: &[Complex64]) -> Result<GroupFunction> {
    check_len(group, coeffs.len())?;
    let values = group
        .elements()
        .map(|t| {
            group
                .characters()
                .zip(coeffs)
                .map(|(g, c)| group.character_value(g, t) * c)
                .sum()
        })
        .collect();
    GroupFunction::new(group.clone(), values)
}

/// `(f * mu)(s) = sum_t f(s - t) mu_t`.
pub fn convolve(f: &GroupFunction, mu: &GroupMeasure) -> Result<GroupFunction> {
    if f.group != mu.group {
        return Err(Error::ShapeMismatch(format!(
            "function on {} convolved with measure on {}",
            f.group, mu.group
        )));
    }
    let g = &f.group;
    let values = g
        .elements()
        .map(|s| g.elements().zip(&mu.atoms).map(|(t, a)| f.at(g.sub(s, t)) * a).sum())
        .collect();
    GroupFunction::new(g.clone(), values)
}

/// The matrix `M[s, t] = f(s - t)` of `mu -> f * mu` on atom vectors.
pub fn conv_matrix(f: &GroupFunction) -> CMatrix {
    let g = &f.group;
    CMatrix::from_fn(g.order(), g.order(), |s, t| {
        f.at(g.sub(GroupElement(s), GroupElement(t)))
    })
}
