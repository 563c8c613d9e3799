//! Exact 2x2 matrices over the integers and over `Z/pZ`.
//!
//! [`ExactMatrix`] carries elements of `SL2(Z)` / `GL2(Z)` with
//! arbitrary-precision entries; words of length `k` over the Sanov
//! generators have entries of size roughly `3^k`, so fixed-width integers
//! are not an option here. [`ModMatrix`] is the image under reduction
//! modulo a prime and has a packed integer key used as a set key during
//! breadth-first searches.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Submultiplicativity constant of the infinity norm on 2x2 matrices:
/// `|gh| <= ETA * |g| * |h|`.
pub const ETA: u32 = 2;

/// A 2x2 integer matrix `[[a, b], [c, d]]`.
///
/// The derived ordering is lexicographic on `(a, b, c, d)`, which is the
/// canonical order used for emitted generator sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactMatrix {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl ExactMatrix {
    /// Raw constructor; no determinant check.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        ExactMatrix { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        ExactMatrix::new(a.into(), b.into(), c.into(), d.into())
    }

    /// Builds a group element, rejecting anything with determinant other than +-1.
    pub fn group_element(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        let m = ExactMatrix::new(a, b, c, d);
        let det = m.det();
        if det.abs().is_one() {
            Ok(m)
        } else {
            Err(Error::BadDeterminant(det.to_string()))
        }
    }

    pub fn identity() -> Self {
        ExactMatrix::from_i64(1, 0, 0, 1)
    }

    /// `A = [[1, 2], [0, 1]]`.
    pub fn sanov_a() -> Self {
        ExactMatrix::from_i64(1, 2, 0, 1)
    }

    /// `B = [[1, 0], [2, 1]]`.
    pub fn sanov_b() -> Self {
        ExactMatrix::from_i64(1, 0, 2, 1)
    }

    /// The antidiagonal involution `J = [[0, 1], [1, 0]]`.
    pub fn antidiagonal() -> Self {
        ExactMatrix::from_i64(0, 1, 1, 0)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_symmetric(&self) -> bool {
        self.b == self.c
    }

    pub fn mul(&self, rhs: &ExactMatrix) -> ExactMatrix {
        ExactMatrix {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    /// Inverse of a determinant +-1 matrix via the adjugate.
    ///
    /// The result is only meaningful when `det(self)` is a unit.
    pub fn inv(&self) -> ExactMatrix {
        let det = self.det();
        debug_assert!(det.abs().is_one(), "inverse of non-unimodular matrix");
        ExactMatrix {
            a: &det * &self.d,
            b: -(&det * &self.b),
            c: -(&det * &self.c),
            d: &det * &self.a,
        }
    }

    pub fn transpose(&self) -> ExactMatrix {
        ExactMatrix {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// `sigma(g) = (g^-1)^T`.
    pub fn sigma(&self) -> ExactMatrix {
        self.inv().transpose()
    }

    /// `tau(g) = J g J` with `J` antidiagonal.
    pub fn tau(&self) -> ExactMatrix {
        ExactMatrix {
            a: self.d.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.a.clone(),
        }
    }

    /// Maximum absolute entry.
    pub fn inf_norm(&self) -> BigInt {
        [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .map(|x| x.abs())
            .max()
            .expect("four entries")
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Entrywise residues in `[0, p)`.
    pub fn reduce_mod(&self, p: Prime) -> ModMatrix {
        let m = BigInt::from(p.get());
        let r = |x: &BigInt| {
            let v = ((x % &m) + &m) % &m;
            v.to_u64().expect("residue fits in u64")
        };
        ModMatrix {
            p: p.get(),
            a: r(&self.a),
            b: r(&self.b),
            c: r(&self.c),
            d: r(&self.d),
        }
    }

    /// Entries as `i64`, if they fit.
    pub fn to_i64(&self) -> Option<[i64; 4]> {
        Some([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ])
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

// JSON form is `[[a,b],[c,d]]` with plain integer literals of any size.
impl Serialize for ExactMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let num = |x: &BigInt| {
            serde_json::Number::from_str(&x.to_string()).expect("integer literal is a JSON number")
        };
        let rows = [[num(&self.a), num(&self.b)], [num(&self.c), num(&self.d)]];
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[serde_json::Number; 2]; 2]>::deserialize(deserializer)?;
        let int = |n: &serde_json::Number| {
            BigInt::from_str(&n.to_string())
                .map_err(|_| D::Error::custom(format!("matrix entry {n} is not an integer")))
        };
        Ok(ExactMatrix::new(
            int(&rows[0][0])?,
            int(&rows[0][1])?,
            int(&rows[1][0])?,
            int(&rows[1][1])?,
        ))
    }
}

/// A prime modulus small enough that packed `ModMatrix` keys fit in a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub const MAX: u64 = 1 << 16;

    pub fn new(p: u64) -> Result<Prime> {
        if !(2..Self::MAX).contains(&p) {
            return Err(Error::ModulusRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

/// A 2x2 matrix over `Z/pZ` with canonical residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMatrix {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ModMatrix {
    /// Reduces arbitrary signed entries into `[0, p)`.
    pub fn new(p: Prime, a: i64, b: i64, c: i64, d: i64) -> Self {
        let m = p.get() as i64;
        let r = |x: i64| x.rem_euclid(m) as u64;
        ModMatrix {
            p: p.get(),
            a: r(a),
            b: r(b),
            c: r(c),
            d: r(d),
        }
    }

    pub fn identity(p: u64) -> Self {
        ModMatrix {
            p,
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }

    #[inline]
    pub fn mul(&self, rhs: &ModMatrix) -> ModMatrix {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        ModMatrix {
            p,
            a: (self.a * rhs.a + self.b * rhs.c) % p,
            b: (self.a * rhs.b + self.b * rhs.d) % p,
            c: (self.c * rhs.a + self.d * rhs.c) % p,
            d: (self.c * rhs.b + self.d * rhs.d) % p,
        }
    }

    /// Determinant as a residue in `[0, p)`.
    pub fn det(&self) -> u64 {
        let p = self.p;
        (self.a * self.d % p + p - self.b * self.c % p) % p
    }

    /// Inverse of a determinant +-1 matrix.
    pub fn inv(&self) -> ModMatrix {
        let p = self.p;
        let neg = |x: u64| (p - x) % p;
        let adj = ModMatrix {
            p,
            a: self.d,
            b: neg(self.b),
            c: neg(self.c),
            d: self.a,
        };
        if self.det() == 1 {
            adj
        } else {
            debug_assert_eq!(self.det(), p - 1);
            ModMatrix {
                p,
                a: neg(adj.a),
                b: neg(adj.b),
                c: neg(adj.c),
                d: neg(adj.d),
            }
        }
    }

    /// Packed key `a*p^3 + b*p^2 + c*p + d`.
    #[inline]
    pub fn encode(&self) -> u64 {
        let p = self.p;
        ((self.a * p + self.b) * p + self.c) * p + self.d
    }

    pub fn decode(p: u64, key: u64) -> ModMatrix {
        let d = key % p;
        let c = (key / p) % p;
        let b = (key / (p * p)) % p;
        let a = key / (p * p * p);
        ModMatrix { p, a, b, c, d }
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]] mod {}",
            self.a, self.b, self.c, self.d, self.p
        )
    }
}

/// One letter of the free group on `{a, b}`; `a -> A`, `b -> B` under evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    /// Letter whose matrix is the transpose: `A^T = B`.
    pub fn transpose(self) -> Letter {
        match self {
            Letter::A => Letter::B,
            Letter::AInv => Letter::BInv,
            Letter::B => Letter::A,
            Letter::BInv => Letter::AInv,
        }
    }

    /// Letter whose matrix is `sigma` of this one.
    pub fn sigma(self) -> Letter {
        self.transpose().inverse()
    }

    /// Letter whose matrix is `tau` of this one.
    pub fn tau(self) -> Letter {
        self.transpose()
    }

    pub fn is_inverse(self) -> bool {
        matches!(self, Letter::AInv | Letter::BInv)
    }

    /// The positive letter underlying this one.
    pub fn positive(self) -> Letter {
        match self {
            Letter::A | Letter::AInv => Letter::A,
            Letter::B | Letter::BInv => Letter::B,
        }
    }

    pub fn matrix(self) -> ExactMatrix {
        match self {
            Letter::A => ExactMatrix::from_i64(1, 2, 0, 1),
            Letter::AInv => ExactMatrix::from_i64(1, -2, 0, 1),
            Letter::B => ExactMatrix::from_i64(1, 0, 2, 1),
            Letter::BInv => ExactMatrix::from_i64(1, 0, -2, 1),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(ch: char) -> Result<Letter> {
        match ch {
            'a' => Ok(Letter::A),
            'A' => Ok(Letter::AInv),
            'b' => Ok(Letter::B),
            'B' => Ok(Letter::BInv),
            other => Err(Error::BadLetter(other)),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(ch), None) => Letter::from_char(ch).map_err(D::Error::custom),
            _ => Err(D::Error::custom(format!(
                "expected a single letter, got {s:?}"
            ))),
        }
    }
}

/// A freely reduced word over `{a, A, b, B}` (uppercase = inverse).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    /// Wraps a letter sequence, rejecting adjacent letter/inverse pairs.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(i) = letters.windows(2).position(|w| w[1] == w[0].inverse()) {
            return Err(Error::NotReduced { index: i + 1 });
        }
        Ok(FreeWord(letters))
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Appends a letter, keeping the word reduced; `None` if it would cancel.
    pub fn extended(&self, l: Letter) -> Option<FreeWord> {
        if self.last() == Some(l.inverse()) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(l);
        Some(FreeWord(v))
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Word of the transposed matrix.
    pub fn transpose(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.transpose()).collect())
    }

    pub fn sigma(&self) -> FreeWord {
        FreeWord(self.0.iter().map(|l| l.sigma()).collect())
    }

    pub fn tau(&self) -> FreeWord {
        FreeWord(self.0.iter().map(|l| l.tau()).collect())
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        FreeWord::reduce(self.0.iter().chain(other.0.iter()).copied())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()?;
        FreeWord::new(letters)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl Serialize for FreeWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FreeWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Evaluates a reduced word under `a -> A`, `b -> B`.
pub fn eval_word(w: &FreeWord) -> ExactMatrix {
    w.letters()
        .iter()
        .fold(ExactMatrix::identity(), |acc, l| acc.mul(&l.matrix()))
}

/// Evaluates a raw letter sequence, rejecting it unless it is reduced.
pub fn eval_letters(letters: &[Letter]) -> Result<ExactMatrix> {
    let w = FreeWord::new(letters.to_vec())?;
    Ok(eval_word(&w))
}

/// `|gh| <= 2 |g| |h|` in the infinity norm.
pub fn eta_check(g: &ExactMatrix, h: &ExactMatrix) -> bool {
    g.mul(h).inf_norm() <= BigInt::from(ETA) * g.inf_norm() * h.inf_norm()
}
