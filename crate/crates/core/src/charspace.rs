//! Theta characteristics over F2^{2g} and the finite combinatorics built on them.
//!
//! A characteristic `m = [eps, delta]` is packed into a single word: the `g`
//! bits of `eps` occupy the low half and the `g` bits of `delta` the high half.
//! Subspaces are stored by their reduced row echelon basis (pivot = highest set
//! bit, rows sorted by decreasing pivot), which doubles as the identity key.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest genus whose characteristics fit in the packed word.
pub const MAX_GENUS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_exponent(e: u32) -> Self {
        if e & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A theta characteristic `[eps, delta]` with `eps, delta` in F2^g.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Characteristic {
    g: u8,
    bits: u32,
}

impl Characteristic {
    pub fn from_bits(g: usize, bits: u32) -> Result<Self> {
        if g == 0 || g > MAX_GENUS {
            return Err(Error::InvalidArgument(format!("genus {g} outside 1..={MAX_GENUS}")));
        }
        if bits >> (2 * g) != 0 {
            return Err(Error::InvalidArgument(format!(
                "bit pattern {bits:#x} does not fit in 2g = {} bits",
                2 * g
            )));
        }
        Ok(Self { g: g as u8, bits })
    }

    pub fn from_parts(g: usize, eps: u32, delta: u32) -> Result<Self> {
        let mask = low_mask(g);
        if eps & !mask != 0 || delta & !mask != 0 {
            return Err(Error::InvalidArgument("eps/delta wider than g bits".into()));
        }
        Self::from_bits(g, eps | (delta << g))
    }

    /// Builds a characteristic from explicit 0/1 entries.
    pub fn from_vectors(eps: &[u8], delta: &[u8]) -> Result<Self> {
        if eps.len() != delta.len() {
            return Err(Error::DimensionMismatch {
                expected: eps.len(),
                found: delta.len(),
            });
        }
        let mut e = 0u32;
        let mut d = 0u32;
        for (j, (&a, &b)) in eps.iter().zip(delta).enumerate() {
            if a > 1 || b > 1 {
                return Err(Error::InvalidArgument("entries must be 0 or 1".into()));
            }
            e |= (a as u32) << j;
            d |= (b as u32) << j;
        }
        Self::from_parts(eps.len(), e, d)
    }

    pub fn zero(g: usize) -> Self {
        Self { g: g as u8, bits: 0 }
    }

    pub fn genus(&self) -> usize {
        self.g as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn eps(&self) -> u32 {
        self.bits & low_mask(self.genus())
    }

    pub fn delta(&self) -> u32 {
        self.bits >> self.g
    }

    pub fn eps_vec(&self) -> Vec<u8> {
        (0..self.genus()).map(|j| ((self.eps() >> j) & 1) as u8).collect()
    }

    pub fn delta_vec(&self) -> Vec<u8> {
        (0..self.genus()).map(|j| ((self.delta() >> j) & 1) as u8).collect()
    }

    pub fn parity(&self) -> Parity {
        if parity_bits(self.genus(), self.bits) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn checked_add(&self, other: &Characteristic) -> Result<Characteristic> {
        same_genus(self, other)?;
        Ok(Characteristic {
            g: self.g,
            bits: self.bits ^ other.bits,
        })
    }

    /// All `2^{2g}` characteristics in bit order.
    pub fn all(g: usize) -> impl Iterator<Item = Characteristic> {
        (0..1u32 << (2 * g)).map(move |bits| Characteristic { g: g as u8, bits })
    }

    pub fn all_even(g: usize) -> impl Iterator<Item = Characteristic> {
        Self::all(g).filter(|m| m.is_even())
    }
}

impl fmt::Debug for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for b in self.eps_vec() {
            write!(f, "{b}")?;
        }
        write!(f, "|")?;
        for b in self.delta_vec() {
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

fn same_genus(a: &Characteristic, b: &Characteristic) -> Result<()> {
    if a.g != b.g {
        return Err(Error::DimensionMismatch {
            expected: a.genus(),
            found: b.genus(),
        });
    }
    Ok(())
}

pub(crate) fn low_mask(g: usize) -> u32 {
    if g >= 32 {
        u32::MAX
    } else {
        (1u32 << g) - 1
    }
}

/// `true` iff the packed characteristic is odd.
#[inline]
pub(crate) fn parity_bits(g: usize, bits: u32) -> bool {
    ((bits & low_mask(g)) & (bits >> g)).count_ones() & 1 == 1
}

#[inline]
pub(crate) fn tricharacter_exponent(g: usize, a: u32, b: u32, c: u32) -> u32 {
    let m = low_mask(g);
    let (a1, a2) = (a & m, a >> g);
    let (b1, b2) = (b & m, b >> g);
    let (c1, c2) = (c & m, c >> g);
    (a1 & b2 & c2).count_ones() + (a2 & b1 & c2).count_ones() + (a2 & b2 & c1).count_ones()
}

/// `e(a, b)` on packed words, as `+1` or `-1`.
#[inline]
pub(crate) fn e_pairing_bits(g: usize, a: u32, b: u32) -> i32 {
    let e = tricharacter_exponent(g, a, a, b) + tricharacter_exponent(g, a, b, b);
    1 - 2 * (e & 1) as i32
}

pub fn parity(m: &Characteristic) -> Parity {
    m.parity()
}

/// The symmetric tricharacter `(a, b, c)`.
pub fn tricharacter(a: &Characteristic, b: &Characteristic, c: &Characteristic) -> Result<Sign> {
    same_genus(a, b)?;
    same_genus(a, c)?;
    Ok(Sign::from_exponent(tricharacter_exponent(
        a.genus(),
        a.bits,
        b.bits,
        c.bits,
    )))
}

/// `e(a, b) = (a, a, b)(a, b, b)`.
pub fn e_pairing(a: &Characteristic, b: &Characteristic) -> Result<Sign> {
    Ok(tricharacter(a, a, b)? * tricharacter(a, b, b)?)
}

/// Number of even characteristics, `2^{g-1}(2^g + 1)`.
pub fn even_count(g: usize) -> u64 {
    (1u64 << (g - 1)) * ((1u64 << g) + 1)
}

/// Gaussian binomial `[n, k]_2`, the number of k-dimensional subspaces of F2^n.
pub fn gaussian_binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for j in 0..k {
        num *= (1u128 << (n - j)) - 1;
        den *= (1u128 << (j + 1)) - 1;
    }
    num / den
}

/// Number of k-dimensional totally isotropic subspaces of symplectic F2^{2g}.
pub fn isotropic_count(g: usize, k: usize) -> u128 {
    if k > g {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for j in 0..k {
        num *= (1u128 << (2 * (g - j))) - 1;
        den *= (1u128 << (j + 1)) - 1;
    }
    num / den
}

/// A linear subspace of F2^n held in canonical reduced echelon form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    ambient: u8,
    basis: Vec<u32>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace<F2^{}>{{", self.ambient)?;
        for (k, b) in self.basis.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:0width$b}", b, width = self.ambient as usize)?;
        }
        write!(f, "}}")
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient: ambient as u8,
            basis: Vec::new(),
        }
    }

    /// Span of arbitrary vectors (dependent ones are dropped).
    pub fn span(ambient: usize, vectors: &[u32]) -> Result<Self> {
        check_ambient(ambient)?;
        let mut s = Self::zero(ambient);
        for &v in vectors {
            if v >> ambient != 0 {
                return Err(Error::InvalidArgument(format!(
                    "vector {v:#b} outside F2^{ambient}"
                )));
            }
            s.insert(v);
        }
        Ok(s)
    }

    /// Subspace with the given basis; fails if the vectors are dependent.
    pub fn from_basis(ambient: usize, vectors: &[u32]) -> Result<Self> {
        let s = Self::span(ambient, vectors)?;
        if s.dim() != vectors.len() {
            return Err(Error::LinearlyDependent);
        }
        Ok(s)
    }

    pub fn from_characteristics(chars: &[Characteristic]) -> Result<Self> {
        let g = chars.first().map(|c| c.genus()).unwrap_or(1);
        for c in chars {
            if c.genus() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    found: c.genus(),
                });
            }
        }
        let v: Vec<u32> = chars.iter().map(|c| c.bits()).collect();
        Self::from_basis(2 * g, &v)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient as usize
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis, sorted by decreasing pivot.
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        1 << self.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reduces `v` against the canonical basis; the result is the least
    /// element of the coset `v + self`.
    pub fn reduce(&self, mut v: u32) -> u32 {
        for &b in &self.basis {
            let p = 31 - b.leading_zeros();
            if v >> p & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    /// Inserts `v`, keeping the basis canonical. Returns false if `v` was
    /// already in the span.
    fn insert(&mut self, v: u32) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let p = 31 - v.leading_zeros();
        for b in self.basis.iter_mut() {
            if *b >> p & 1 == 1 {
                *b ^= v;
            }
        }
        self.basis.push(v);
        self.basis.sort_unstable_by(|a, b| b.cmp(a));
        true
    }

    pub fn extended(&self, v: u32) -> Option<Subspace> {
        let mut s = self.clone();
        if s.insert(v) {
            Some(s)
        } else {
            None
        }
    }

    /// All `2^dim` elements, in Gray-code order starting from 0.
    pub fn elements(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = 0u32;
        out.push(cur);
        for k in 1..self.len() {
            let j = (k as u32).trailing_zeros() as usize;
            cur ^= self.basis[j];
            out.push(cur);
        }
        out
    }

    /// Pivot positions (highest bit of each basis vector).
    pub fn pivot_mask(&self) -> u32 {
        self.basis
            .iter()
            .fold(0, |m, b| m | 1 << (31 - b.leading_zeros()))
    }

    /// Minimal representatives of all cosets, increasing.
    pub fn coset_representatives(&self) -> Vec<u32> {
        let pm = self.pivot_mask();
        (0..1u32 << self.ambient).filter(|v| v & pm == 0).collect()
    }
}

fn check_ambient(ambient: usize) -> Result<()> {
    if ambient == 0 || ambient > 2 * MAX_GENUS {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension {ambient} unsupported"
        )));
    }
    Ok(())
}

/// An affine subspace `rep + space`, with `rep` the least element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coset {
    space: Subspace,
    rep: u32,
}

impl fmt::Debug for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b} + {:?}", self.rep, self.space)
    }
}

impl Coset {
    pub fn new(space: Subspace, v: u32) -> Self {
        let rep = space.reduce(v);
        Self { space, rep }
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn rep(&self) -> u32 {
        self.rep
    }

    pub fn elements(&self) -> Vec<u32> {
        self.space.elements().into_iter().map(|v| v ^ self.rep).collect()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.space.reduce(v) == self.rep
    }
}

fn check_genus_space(v: &Subspace) -> Result<usize> {
    if v.ambient_dim() % 2 != 0 {
        return Err(Error::InvalidArgument(
            "characteristic subspaces live in an even-dimensional space".into(),
        ));
    }
    Ok(v.ambient_dim() / 2)
}

/// Every i-dimensional subspace of F2^n exactly once, sorted by canonical basis.
pub fn enumerate_subspaces_of(n: usize, i: usize) -> Result<Vec<Subspace>> {
    check_ambient(n)?;
    if i > n {
        return Err(Error::DimensionOutOfRange { dim: i, ambient: n });
    }
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(i);
    choose_pivots(n, i, 0, &mut pivots, &mut out);
    out.sort();
    Ok(out)
}

/// Every i-dimensional subspace of F2^{2g}; the count is `[2g, i]_2`.
pub fn enumerate_subspaces(g: usize, i: usize) -> Result<Vec<Subspace>> {
    if 2 * g < i {
        return Err(Error::DimensionOutOfRange {
            dim: i,
            ambient: 2 * g,
        });
    }
    enumerate_subspaces_of(2 * g, i)
}

fn choose_pivots(n: usize, i: usize, start: usize, pivots: &mut Vec<usize>, out: &mut Vec<Subspace>) {
    if pivots.len() == i {
        fill_free_bits(n, pivots, out);
        return;
    }
    for p in start..n {
        pivots.push(p);
        choose_pivots(n, i, p + 1, pivots, out);
        pivots.pop();
    }
}

fn fill_free_bits(n: usize, pivots: &[usize], out: &mut Vec<Subspace>) {
    let pivot_mask: u32 = pivots.iter().fold(0, |m, &p| m | 1 << p);
    // (row pivot, free positions below it)
    let rows: Vec<(usize, Vec<usize>)> = pivots
        .iter()
        .map(|&p| (p, (0..p).filter(|q| pivot_mask >> q & 1 == 0).collect()))
        .collect();
    let total: usize = rows.iter().map(|(_, f)| f.len()).sum();
    for assignment in 0u64..1u64 << total {
        let mut shift = 0;
        let mut basis: Vec<u32> = rows
            .iter()
            .map(|(p, free)| {
                let mut v = 1u32 << p;
                for (k, &q) in free.iter().enumerate() {
                    if assignment >> (shift + k) & 1 == 1 {
                        v |= 1 << q;
                    }
                }
                shift += free.len();
                v
            })
            .collect();
        basis.sort_unstable_by(|a, b| b.cmp(a));
        out.push(Subspace {
            ambient: n as u8,
            basis,
        });
    }
}

/// `true` iff `e(a, b) = +1` for all `a, b` in `v`.
pub fn is_totally_isotropic(v: &Subspace) -> Result<bool> {
    let g = check_genus_space(v)?;
    let b = v.basis();
    Ok(b.iter()
        .all(|&x| b.iter().all(|&y| e_pairing_bits(g, x, y) == 1)))
}

/// All totally isotropic subspaces of dimension i in F2^{2g}, sorted.
pub fn enumerate_isotropic(g: usize, i: usize) -> Result<Vec<Subspace>> {
    if i > g {
        return Ok(Vec::new());
    }
    check_ambient(2 * g)?;
    let n = 2 * g;
    let mut level: BTreeSet<Subspace> = BTreeSet::new();
    level.insert(Subspace::zero(n));
    for _ in 0..i {
        let mut next: HashSet<Subspace> = HashSet::new();
        for s in &level {
            for v in 1..1u32 << n {
                if s.contains(v) {
                    continue;
                }
                if s.basis().iter().all(|&b| e_pairing_bits(g, b, v) == 1) {
                    if let Some(t) = s.extended(v) {
                        next.insert(t);
                    }
                }
            }
        }
        level = next.into_iter().collect();
    }
    Ok(level.into_iter().collect())
}

/// Subspaces all of whose elements are even characteristics (the ones with a
/// nonzero theta product), dimension i, in F2^{2g}.
pub fn enumerate_even_subspaces(g: usize, i: usize) -> Result<Vec<Subspace>> {
    Ok(enumerate_isotropic(g, i)?
        .into_iter()
        .filter(|s| s.basis().iter().all(|&b| !parity_bits(g, b)))
        .collect())
}

/// Cosets `V + m` consisting only of even characteristics.
pub fn enumerate_even_cosets(v: &Subspace) -> Result<Vec<Coset>> {
    let g = check_genus_space(v)?;
    let elems = v.elements();
    Ok(v.coset_representatives()
        .into_iter()
        .filter(|&r| elems.iter().all(|&e| !parity_bits(g, e ^ r)))
        .map(|r| Coset {
            space: v.clone(),
            rep: r,
        })
        .collect())
}

/// Counting conventions for quadruples `(n1, n2, n3, n4)` with zero sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadrupleConvention {
    /// Ordered tuples, repetition allowed.
    Ordered,
    /// Ordered tuples of pairwise distinct vectors.
    OrderedDistinct,
    /// Four-element sets.
    Unordered,
}

impl QuadrupleConvention {
    pub const ALL: [QuadrupleConvention; 3] = [
        QuadrupleConvention::Ordered,
        QuadrupleConvention::OrderedDistinct,
        QuadrupleConvention::Unordered,
    ];
}

/// Brute-force quadruple counts around a 3-dimensional subspace `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleCounts {
    pub convention: QuadrupleConvention,
    /// Zero-sum quadruples with every entry in `N`.
    pub inside: u64,
    /// Zero-sum quadruples in `N + <c>` with two entries in `N` and two in `N + c`.
    pub two_cosets: u64,
    /// Zero-sum quadruples in `N + <c1, c2>` meeting all four cosets of `N`.
    pub four_cosets_factor: u64,
    /// Unordered pairs of distinct elements of `N`.
    pub pairs: u64,
    /// `(inside, two_cosets, four_cosets_factor) == (14, 112, 2^9)`.
    pub matches_reference: bool,
}

/// Reference values for the three patterns: 14, 112 = 28 * 4 and 2^9.
pub const QUADRUPLE_REFERENCE: (u64, u64, u64) = (14, 112, 512);

pub fn quadruple_counts(n: &Subspace, convention: QuadrupleConvention) -> Result<QuadrupleCounts> {
    if n.dim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "quadruple counts need a 3-dimensional subspace, got dimension {}",
            n.dim()
        )));
    }
    if n.ambient_dim() < 5 {
        return Err(Error::InvalidArgument(
            "ambient space must have dimension >= 5 to host two extra cosets".into(),
        ));
    }
    let ambient = 1u32 << n.ambient_dim();
    let c1 = (1..ambient).find(|&v| !n.contains(v)).expect("proper subspace");
    let m4 = n.extended(c1).expect("c1 outside N");
    let c2 = (1..ambient).find(|&v| !m4.contains(v)).expect("proper subspace");
    let m5 = m4.extended(c2).expect("c2 outside N + <c1>");

    let label = |v: u32| -> usize {
        // which of the cosets N, N+c1, N+c2, N+c1+c2 contains v
        let r = n.reduce(v);
        [0, c1, c2, c1 ^ c2]
            .iter()
            .position(|&c| n.reduce(c) == r)
            .expect("v in N + <c1, c2>")
    };

    let inside = count_quadruples(&n.elements(), convention, |_| true);
    let two_cosets = count_quadruples(&m4.elements(), convention, |q| {
        let mut k = [0usize; 4];
        q.iter().for_each(|&v| k[label(v)] += 1);
        k[0] == 2 && k[1] == 2
    });
    let four_cosets = count_quadruples(&m5.elements(), convention, |q| {
        let mut seen = [false; 4];
        q.iter().for_each(|&v| seen[label(v)] = true);
        seen.iter().all(|&s| s)
    });
    let k = n.len() as u64;
    let pairs = k * (k - 1) / 2;
    Ok(QuadrupleCounts {
        convention,
        inside,
        two_cosets,
        four_cosets_factor: four_cosets,
        pairs,
        matches_reference: (inside, two_cosets, four_cosets) == QUADRUPLE_REFERENCE,
    })
}

fn count_quadruples(
    elems: &[u32],
    convention: QuadrupleConvention,
    pattern: impl Fn(&[u32; 4]) -> bool,
) -> u64 {
    let k = elems.len();
    let mut count = 0u64;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    let q = [elems[a], elems[b], elems[c], elems[d]];
                    if q[0] ^ q[1] ^ q[2] ^ q[3] != 0 {
                        continue;
                    }
                    let ok = match convention {
                        QuadrupleConvention::Ordered => true,
                        QuadrupleConvention::OrderedDistinct => distinct(&[a, b, c, d]),
                        QuadrupleConvention::Unordered => a < b && b < c && c < d,
                    };
                    if ok && pattern(&q) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn distinct(ix: &[usize; 4]) -> bool {
    (0..4).all(|i| (i + 1..4).all(|j| ix[i] != ix[j]))
}

/// Finds the convention (if any) under which the reference counts come out.
pub fn resolve_quadruple_convention(n: &Subspace) -> Result<Option<QuadrupleCounts>> {
    for conv in QuadrupleConvention::ALL {
        let q = quadruple_counts(n, conv)?;
        if q.matches_reference {
            return Ok(Some(q));
        }
    }
    Ok(None)
}
