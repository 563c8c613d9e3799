//! Cayley graphs of finite quotients `SL2(F_p)` and `G(p) = {det = +-1}`.
//!
//! Girth is the length of the shortest cyclically reduced relation among
//! the generators. Cayley graphs are vertex transitive, so a single
//! breadth-first search from the identity finds it: the minimum over
//! non-tree edges `(u, v)` of `dist(u) + dist(v) + 1`.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::exact2::{ExactMatrix, FreeWord, Letter, ModMatrix, Prime};
use crate::forge::GeneratorSet;

/// Default memory budget for closure walks and girth searches (2 GiB).
pub const DEFAULT_BUDGET: u64 = 2 << 30;

/// Rough cost of one entry in the girth-search table.
const BYTES_PER_BFS_STATE: u64 = 64;

#[derive(Clone, Debug)]
pub struct CayleySpec {
    pub p: Prime,
    pub generators: Vec<ModMatrix>,
    /// `inverse[i]` is the index of the formal inverse of generator `i`.
    pub inverse: Vec<usize>,
    /// Display word per generator.
    pub labels: Vec<String>,
    /// Generators are `w * J` in `G(p)`; every relation has even length.
    pub bipartite_gl: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GirthResult {
    pub girth: u32,
    /// Generator indices of a shortest relation.
    pub witness: Vec<usize>,
    pub component_size: Option<u64>,
    /// Set when the generators collide mod p (girth 1 or 2).
    pub degenerate: bool,
}

impl CayleySpec {
    /// Reduces a generating set mod `p`. Inverse pairing is taken over `Z`.
    pub fn from_genset(set: &GeneratorSet, p: Prime) -> Result<CayleySpec> {
        let inverse = set
            .inverse_indices()
            .ok_or_else(|| Error::Invalid("generator set is not closed under inverse".into()))?;
        Ok(CayleySpec {
            p,
            generators: set.matrices().map(|m| m.reduce_mod(p)).collect(),
            inverse,
            labels: set.generators.iter().map(|g| g.word.to_string()).collect(),
            bipartite_gl: false,
        })
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// Reductions pairwise distinct and none equal to the identity.
    pub fn is_injective(&self) -> bool {
        let distinct: BTreeSet<ModMatrix> = self.generators.iter().copied().collect();
        distinct.len() == self.generators.len()
            && !self.generators.iter().any(ModMatrix::is_identity)
    }

    /// Product of the witness generators mod p.
    pub fn eval_witness(&self, witness: &[usize]) -> ModMatrix {
        witness
            .iter()
            .fold(ModMatrix::identity(self.p.get()), |acc, &i| {
                acc.mul(&self.generators[i])
            })
    }

    /// No adjacent formal-inverse pair, including last-to-first.
    pub fn is_cyclically_reduced(&self, witness: &[usize]) -> bool {
        let n = witness.len();
        (0..n).all(|k| {
            let next = witness[(k + 1) % n];
            n == 1 || self.inverse[witness[k]] != next
        })
    }

    /// The witness spelled out with generator labels.
    pub fn witness_label(&self, witness: &[usize]) -> String {
        witness
            .iter()
            .map(|&i| format!("({})", self.labels[i]))
            .collect()
    }

    /// A relation of length 1 or 2 caused by a collision mod p.
    fn degeneracy(&self) -> Option<Vec<usize>> {
        if let Some(i) = self.generators.iter().position(ModMatrix::is_identity) {
            return Some(vec![i]);
        }
        for i in 0..self.generators.len() {
            for j in i + 1..self.generators.len() {
                if self.generators[i] == self.generators[j] {
                    return Some(vec![i, self.inverse[j]]);
                }
            }
        }
        None
    }
}

/// Reductions of `set` mod `p` are pairwise distinct and not the identity.
pub fn check_injective(set: &GeneratorSet, p: Prime) -> bool {
    let residues: BTreeSet<ModMatrix> = set.matrices().map(|m| m.reduce_mod(p)).collect();
    residues.len() == set.len() && !residues.iter().any(ModMatrix::is_identity)
}

/// Margulis' generators `{A, A^-1, B, B^-1}`.
pub fn margulis_genset() -> GeneratorSet {
    let words = Letter::ALL.iter().map(|&l| FreeWord::reduce([l])).collect();
    GeneratorSet::from_words(None, words)
}

/// `{w * J mod p}` on `G(p)`; requires `tau(W) = W`.
pub fn build_gl_spec(set: &GeneratorSet, p: Prime) -> Result<CayleySpec> {
    let mats: BTreeSet<&ExactMatrix> = set.matrices().collect();
    let taus: Vec<ExactMatrix> = set.matrices().map(ExactMatrix::tau).collect();
    if taus.len() != mats.len() || !taus.iter().all(|t| mats.contains(t)) {
        return Err(Error::NotTauClosed);
    }
    let j = ExactMatrix::antidiagonal();
    // (wJ)^-1 = J w^-1 = tau(w^-1) J
    let inverse = set
        .matrices()
        .map(|m| set.position(&m.inv().tau()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Invalid("generator set is not closed under inverse".into()))?;
    Ok(CayleySpec {
        p,
        generators: set.matrices().map(|m| m.mul(&j).reduce_mod(p)).collect(),
        inverse,
        labels: set
            .generators
            .iter()
            .map(|g| format!("{}J", g.word))
            .collect(),
        bipartite_gl: true,
    })
}

/// Perfect indexing of `SL2(F_p)`, optionally doubled to cover `G(p)`.
struct GroupIndex {
    p: u64,
    inv: Vec<u64>,
    sl_size: u64,
    with_gl: bool,
}

impl GroupIndex {
    fn new(p: u64, with_gl: bool) -> GroupIndex {
        let mut inv = vec![0u64; p as usize];
        for x in 1..p {
            inv[x as usize] = mod_pow(x, p - 2, p);
        }
        GroupIndex {
            p,
            inv,
            sl_size: p * (p * p - 1),
            with_gl,
        }
    }

    fn size(&self) -> u64 {
        if self.with_gl {
            2 * self.sl_size
        } else {
            self.sl_size
        }
    }

    #[inline]
    fn index(&self, m: &ModMatrix) -> u64 {
        let p = self.p;
        if m.det() == 1 {
            if m.a != 0 {
                ((m.a - 1) * p + m.b) * p + m.c
            } else {
                (p - 1) * p * p + (m.b - 1) * p + m.d
            }
        } else {
            self.sl_size + self.index(&times_j(m))
        }
    }

    #[inline]
    fn decode(&self, i: u64) -> ModMatrix {
        let p = self.p;
        if i >= self.sl_size {
            return times_j(&self.decode(i - self.sl_size));
        }
        let head = (p - 1) * p * p;
        if i < head {
            let a = i / (p * p) + 1;
            let b = (i / p) % p;
            let c = i % p;
            let d = (1 + b * c) % p * self.inv[a as usize] % p;
            ModMatrix { p, a, b, c, d }
        } else {
            let j = i - head;
            let b = j / p + 1;
            let d = j % p;
            let c = (p - self.inv[b as usize]) % p;
            ModMatrix { p, a: 0, b, c, d }
        }
    }
}

fn times_j(m: &ModMatrix) -> ModMatrix {
    ModMatrix {
        p: m.p,
        a: m.b,
        b: m.a,
        c: m.d,
        d: m.c,
    }
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Bytes the closure walk for `spec` needs (three bitsets over the group).
pub fn closure_bytes(spec: &CayleySpec) -> u64 {
    let p = spec.p.get();
    let mut n = p * (p * p - 1);
    if spec.bipartite_gl || spec.generators.iter().any(|g| g.det() != 1) {
        n *= 2;
    }
    3 * n.div_ceil(64) * 8
}

/// Order of the subgroup generated by the spec, by a full closure walk
/// from the identity. Fails cleanly when the bitsets would exceed `budget`.
pub fn component_size(spec: &CayleySpec, budget: u64) -> Result<u64> {
    let needed = closure_bytes(spec);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let p = spec.p.get();
    let with_gl = spec.bipartite_gl || spec.generators.iter().any(|g| g.det() != 1);
    let index = GroupIndex::new(p, with_gl);
    let words = index.size().div_ceil(64) as usize;
    let mut visited = vec![0u64; words];
    let mut frontier = vec![0u64; words];
    let mut next = vec![0u64; words];

    let start = index.index(&ModMatrix::identity(p));
    visited[(start / 64) as usize] |= 1 << (start % 64);
    frontier[(start / 64) as usize] |= 1 << (start % 64);
    let mut count = 1u64;
    loop {
        let mut grew = false;
        for (w, &bits) in frontier.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let i = w as u64 * 64 + bits.trailing_zeros() as u64;
                bits &= bits - 1;
                let m = index.decode(i);
                for g in &spec.generators {
                    let j = index.index(&m.mul(g));
                    let (jw, jb) = ((j / 64) as usize, 1u64 << (j % 64));
                    if visited[jw] & jb == 0 {
                        visited[jw] |= jb;
                        next[jw] |= jb;
                        count += 1;
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            return Ok(count);
        }
        std::mem::swap(&mut frontier, &mut next);
        next.iter_mut().for_each(|x| *x = 0);
    }
}

struct Node {
    dist: u32,
    parent: u64,
    /// Generator used to arrive; `usize::MAX` at the root.
    gen: usize,
}

/// Shortest cyclically reduced relation by breadth-first search from the
/// identity. With `double_cover`, states carry a parity bit flipped by
/// every generator, so only even relations close up.
fn bfs_girth(spec: &CayleySpec, double_cover: bool, budget: u64) -> Result<(u32, Vec<usize>)> {
    let gens = &spec.generators;
    let key = |m: &ModMatrix, parity: u64| m.encode() * 2 + parity;
    let flip = u64::from(double_cover);
    let max_states = budget / BYTES_PER_BFS_STATE;

    let root = ModMatrix::identity(spec.p.get());
    let mut nodes: HashMap<u64, Node> = HashMap::new();
    nodes.insert(
        key(&root, 0),
        Node {
            dist: 0,
            parent: u64::MAX,
            gen: usize::MAX,
        },
    );
    let mut queue = VecDeque::from([(root, 0u64)]);
    // (length, u, generator, v)
    let mut best: Option<(u32, u64, usize, u64)> = None;

    while let Some((u, parity)) = queue.pop_front() {
        let ukey = key(&u, parity);
        let (du, arrived) = {
            let n = &nodes[&ukey];
            (n.dist, n.gen)
        };
        if best.is_some_and(|(len, ..)| 2 * du + 1 >= len) {
            break;
        }
        for (i, g) in gens.iter().enumerate() {
            if arrived != usize::MAX && spec.inverse[arrived] == i {
                continue;
            }
            let v = u.mul(g);
            let vpar = parity ^ flip;
            let vkey = key(&v, vpar);
            match nodes.entry(vkey) {
                Entry::Vacant(slot) => {
                    slot.insert(Node {
                        dist: du + 1,
                        parent: ukey,
                        gen: i,
                    });
                    queue.push_back((v, vpar));
                }
                Entry::Occupied(slot) => {
                    let len = du + slot.get().dist + 1;
                    if best.is_none_or(|(b, ..)| len < b) {
                        best = Some((len, ukey, i, vkey));
                    }
                }
            }
        }
        if nodes.len() as u64 > max_states {
            return Err(Error::BudgetExceeded {
                needed: nodes.len() as u64 * BYTES_PER_BFS_STATE,
                budget,
            });
        }
    }

    let (len, ukey, gen, vkey) =
        best.ok_or_else(|| Error::Invariant("search exhausted without closing a cycle".into()))?;
    let path_to = |mut k: u64| {
        let mut gens = Vec::new();
        loop {
            let n = &nodes[&k];
            if n.gen == usize::MAX {
                break;
            }
            gens.push(n.gen);
            k = n.parent;
        }
        gens.reverse();
        gens
    };
    let mut witness = path_to(ukey);
    witness.push(gen);
    witness.extend(path_to(vkey).iter().rev().map(|&g| spec.inverse[g]));
    debug_assert_eq!(witness.len() as u32, len);
    Ok((len, witness))
}

fn degenerate_result(witness: Vec<usize>) -> GirthResult {
    GirthResult {
        girth: witness.len() as u32,
        witness,
        component_size: None,
        degenerate: true,
    }
}

/// Exact girth with the default budget.
pub fn girth_bfs(spec: &CayleySpec) -> Result<GirthResult> {
    girth_bfs_within(spec, DEFAULT_BUDGET)
}

pub fn girth_bfs_within(spec: &CayleySpec, budget: u64) -> Result<GirthResult> {
    if let Some(w) = spec.degeneracy() {
        return Ok(degenerate_result(w));
    }
    let (girth, witness) = bfs_girth(spec, false, budget)?;
    Ok(GirthResult {
        girth,
        witness,
        component_size: None,
        degenerate: false,
    })
}

/// Shortest even-length cyclically reduced relation.
pub fn even_girth(spec: &CayleySpec) -> Result<GirthResult> {
    even_girth_within(spec, DEFAULT_BUDGET)
}

pub fn even_girth_within(spec: &CayleySpec, budget: u64) -> Result<GirthResult> {
    if let Some(mut w) = spec.degeneracy() {
        if w.len() == 1 {
            w.push(w[0]);
        }
        return Ok(degenerate_result(w));
    }
    let (girth, witness) = bfs_girth(spec, true, budget)?;
    Ok(GirthResult {
        girth,
        witness,
        component_size: None,
        degenerate: false,
    })
}

/// Exhaustive oracle: cyclically reduced words by increasing length up
/// to `max_len`; the first (index-lexicographic) relation wins.
pub fn girth_oracle(spec: &CayleySpec, max_len: usize) -> Option<GirthResult> {
    oracle_over(spec, 1..=max_len)
}

/// Like [`girth_oracle`], restricted to even lengths.
pub fn even_girth_oracle(spec: &CayleySpec, max_len: usize) -> Option<GirthResult> {
    oracle_over(spec, (2..=max_len).step_by(2))
}

fn oracle_over(spec: &CayleySpec, lengths: impl IntoIterator<Item = usize>) -> Option<GirthResult> {
    fn walk(spec: &CayleySpec, prefix: ModMatrix, word: &mut Vec<usize>, len: usize) -> bool {
        if word.len() == len {
            return prefix.is_identity() && spec.is_cyclically_reduced(word);
        }
        for i in 0..spec.generators.len() {
            if word.last().is_some_and(|&j| spec.inverse[j] == i) {
                continue;
            }
            word.push(i);
            if walk(spec, prefix.mul(&spec.generators[i]), word, len) {
                return true;
            }
            word.pop();
        }
        false
    }
    lengths.into_iter().find_map(|len| {
        let mut word = Vec::with_capacity(len);
        walk(spec, ModMatrix::identity(spec.p.get()), &mut word, len).then_some(GirthResult {
            girth: len as u32,
            degenerate: len <= 2,
            witness: word,
            component_size: None,
        })
    })
}
