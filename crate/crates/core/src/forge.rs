//! Symmetric free generating sets `W_R` inside the Sanov subgroup.
//!
//! The construction takes the ball `Omega_R` of Sanov elements with
//! infinity norm at most `R` (a subtree of the 4-regular Cayley tree),
//! pairs every boundary slot `(g, s)` with its sigma-image
//! `(sigma(g), sigma(s))`, and closes each pair through a new vertex
//! `g -s-> v -s^T-> sigma(g)`. The resulting labeled graph is Stallings, and
//! the cycle through each slot reads `(gs)(gs)^T`. One generator is emitted
//! per slot, so the set is inverse-closed by construction: the sigma
//! partner of a slot yields exactly the inverse matrix.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact2::{eval_word, ExactMatrix, FreeWord, Letter, Prime, ETA};
use crate::labeled::{Edge, LabeledGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaElement {
    pub matrix: ExactMatrix,
    pub word: FreeWord,
}

/// Sanov elements of infinity norm at most `radius`, in breadth-first
/// order (identity first, then by word length, letters ordered `a A b B`).
#[derive(Clone, Debug)]
pub struct OmegaSet {
    pub radius: u64,
    pub elements: Vec<OmegaElement>,
    index: HashMap<ExactMatrix, usize>,
}

impl OmegaSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, m: &ExactMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &ExactMatrix) -> bool {
        self.index.contains_key(m)
    }

    /// Structural checks: identity present; closed under sigma, tau and
    /// inverse; prefix-closed as words; norms within the radius; words
    /// evaluate to their matrices. Returns the first violation.
    pub fn check_structure(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if !self.contains(&ExactMatrix::identity()) {
            return fail("identity missing from omega".into());
        }
        let bound = BigInt::from(self.radius);
        for el in &self.elements {
            let m = &el.matrix;
            if eval_word(&el.word) != *m {
                return fail(format!("word {} does not evaluate to {m}", el.word));
            }
            if m.inf_norm() > bound {
                return fail(format!("{m} exceeds radius {}", self.radius));
            }
            for (what, img) in [("sigma", m.sigma()), ("tau", m.tau()), ("inverse", m.inv())] {
                if !self.contains(&img) {
                    return fail(format!("omega not closed under {what} at {m}"));
                }
            }
            let letters = el.word.letters();
            for k in 0..letters.len() {
                let prefix = FreeWord::reduce(letters[..k].iter().copied());
                if !self.contains(&eval_word(&prefix)) {
                    return fail(format!("prefix {prefix} of {} missing", el.word));
                }
            }
        }
        Ok(())
    }
}

/// Breadth-first enumeration of `Omega_R` over reduced words, pruning any
/// word whose norm exceeds `radius`.
pub fn enum_omega(radius: u64) -> Result<OmegaSet> {
    if radius == 0 {
        return Err(Error::Invalid("radius must be at least 1".into()));
    }
    let bound = BigInt::from(radius);
    let mut elements = vec![OmegaElement {
        matrix: ExactMatrix::identity(),
        word: FreeWord::empty(),
    }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for l in Letter::ALL {
            let Some(word) = elements[i].word.extended(l) else {
                continue;
            };
            let matrix = elements[i].matrix.mul(&l.matrix());
            if matrix.inf_norm() <= bound {
                elements.push(OmegaElement { matrix, word });
                queue.push_back(elements.len() - 1);
            }
        }
    }
    let index: HashMap<ExactMatrix, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.matrix.clone(), i))
        .collect();
    if index.len() != elements.len() {
        return Err(Error::Invariant(
            "two reduced words evaluate to the same matrix".into(),
        ));
    }
    Ok(OmegaSet {
        radius,
        elements,
        index,
    })
}

/// Unpruned oracle: every reduced word, level by level, until a level
/// whose minimum norm exceeds `radius`; keeps the matrices of norm at most
/// `radius`. Exponential in the depth, only for small radii.
pub fn enum_omega_exhaustive(radius: u64) -> BTreeSet<ExactMatrix> {
    let bound = BigInt::from(radius);
    let mut found = BTreeSet::from([ExactMatrix::identity()]);
    let mut layer = vec![(ExactMatrix::identity(), None::<Letter>)];
    loop {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for (m, last) in &layer {
            for l in Letter::ALL {
                if *last == Some(l.inverse()) {
                    continue;
                }
                next.push((m.mul(&l.matrix()), Some(l)));
            }
        }
        let min_norm = next
            .iter()
            .map(|(m, _)| m.inf_norm())
            .min()
            .expect("nonempty level");
        if min_norm > bound {
            return found;
        }
        found.extend(
            next.iter()
                .filter(|(m, _)| m.inf_norm() <= bound)
                .map(|(m, _)| m.clone()),
        );
        layer = next;
    }
}

/// A tree edge `(g, g*s)` leaving the ball; `g` is an index into the omega set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundarySlot {
    pub g: usize,
    pub letter: Letter,
}

/// All `(g, s)` with `g*s` outside the ball, in omega order then letter order.
pub fn boundary_slots(omega: &OmegaSet) -> Vec<BoundarySlot> {
    let mut slots = Vec::with_capacity(2 * omega.len() + 2);
    for (g, el) in omega.elements.iter().enumerate() {
        for l in Letter::ALL {
            if !omega.contains(&el.matrix.mul(&l.matrix())) {
                slots.push(BoundarySlot { g, letter: l });
            }
        }
    }
    slots
}

/// Matches each slot with its sigma partner. Pairs are listed once, with
/// the earlier slot first, in slot order.
pub fn pair_slots(
    omega: &OmegaSet,
    slots: &[BoundarySlot],
) -> Result<Vec<(BoundarySlot, BoundarySlot)>> {
    let present: BTreeSet<BoundarySlot> = slots.iter().copied().collect();
    let mut used = BTreeSet::new();
    let mut pairs = Vec::with_capacity(slots.len() / 2);
    for &slot in slots {
        let g = &omega.elements[slot.g].matrix;
        let partner = omega
            .index_of(&g.sigma())
            .map(|sg| BoundarySlot {
                g: sg,
                letter: slot.letter.sigma(),
            })
            .filter(|p| present.contains(p))
            .ok_or_else(|| {
                Error::UnpairedSlot(format!(
                    "({}, {})",
                    omega.elements[slot.g].word, slot.letter
                ))
            })?;
        if partner == slot {
            return Err(Error::Invariant("slot is its own sigma partner".into()));
        }
        if used.contains(&slot) {
            continue;
        }
        used.insert(slot);
        used.insert(partner);
        pairs.push((slot, partner));
    }
    Ok(pairs)
}

/// Where a generator came from: the word of `g` and the letter `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRef {
    pub g_word: FreeWord,
    pub letter: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub word: FreeWord,
    pub matrix: ExactMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<SlotRef>,
}

/// A finished symmetric generating set, sorted by matrix entries.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    /// `None` for sets not produced by the ball construction.
    pub radius: Option<u64>,
    pub eta: u32,
    pub max_norm: BigInt,
    pub generators: Vec<Generator>,
    /// `|Omega_R|`, when known.
    pub omega_size: Option<usize>,
    /// The completed Stallings graph, when built in-process.
    pub graph: Option<LabeledGraph>,
}

#[derive(Serialize, Deserialize)]
struct GensetFile {
    radius: Option<u64>,
    eta: u32,
    max_norm: serde_json::Number,
    size: usize,
    generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &ExactMatrix> {
        self.generators.iter().map(|g| &g.matrix)
    }

    pub fn position(&self, m: &ExactMatrix) -> Option<usize> {
        self.generators.iter().position(|g| g.matrix == *m)
    }

    /// For each generator, the index of its inverse in the set.
    pub fn inverse_indices(&self) -> Option<Vec<usize>> {
        self.generators
            .iter()
            .map(|g| self.position(&g.matrix.inv()))
            .collect()
    }

    /// Builds a set from arbitrary words; sorts canonically.
    pub fn from_words(radius: Option<u64>, words: Vec<FreeWord>) -> GeneratorSet {
        let generators = words
            .into_iter()
            .map(|word| Generator {
                matrix: eval_word(&word),
                word,
                slot: None,
            })
            .collect();
        GeneratorSet::assemble(radius, generators, None, None)
    }

    fn assemble(
        radius: Option<u64>,
        mut generators: Vec<Generator>,
        omega_size: Option<usize>,
        graph: Option<LabeledGraph>,
    ) -> GeneratorSet {
        generators.sort_by(|x, y| x.matrix.cmp(&y.matrix).then_with(|| x.word.cmp(&y.word)));
        let max_norm = generators
            .iter()
            .map(|g| g.matrix.inf_norm())
            .max()
            .unwrap_or_else(BigInt::zero);
        GeneratorSet {
            radius,
            eta: ETA,
            max_norm,
            generators,
            omega_size,
            graph,
        }
    }

    /// Pretty JSON with a trailing newline; byte-identical across runs.
    pub fn to_json(&self) -> String {
        let file = GensetFile {
            radius: self.radius,
            eta: self.eta,
            max_norm: self.max_norm.to_string().parse().expect("integer"),
            size: self.generators.len(),
            generators: self.generators.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serializable");
        s.push('\n');
        s
    }

    /// Parses the JSON form, checking that each word evaluates to its
    /// matrix and that `size`/`max_norm` agree with the generators.
    pub fn from_json(text: &str) -> Result<GeneratorSet> {
        let file: GensetFile = serde_json::from_str(text)?;
        if file.size != file.generators.len() {
            return Err(Error::Invalid(format!(
                "size {} does not match {} generators",
                file.size,
                file.generators.len()
            )));
        }
        for g in &file.generators {
            if eval_word(&g.word) != g.matrix {
                return Err(Error::Invalid(format!(
                    "word {} does not evaluate to {}",
                    g.word, g.matrix
                )));
            }
        }
        let set = GeneratorSet::assemble(file.radius, file.generators, None, None);
        if set.max_norm.to_string() != file.max_norm.to_string() {
            return Err(Error::Invalid(format!(
                "max_norm {} but generators reach {}",
                file.max_norm, set.max_norm
            )));
        }
        if file.eta != ETA {
            return Err(Error::Invalid(format!("eta must be {ETA}")));
        }
        let omega_size = set.radius.map(|_| set.len() / 2 - 1);
        Ok(GeneratorSet { omega_size, ..set })
    }
}

/// Builds `W_R`, the completed graph, and cross-checks the generators
/// against the cycle basis of that graph.
pub fn build_genset(radius: u64) -> Result<GeneratorSet> {
    let omega = enum_omega(radius)?;
    let slots = boundary_slots(&omega);
    if slots.len() != 2 * omega.len() + 2 {
        return Err(Error::Invariant(format!(
            "{} boundary slots for {} ball elements",
            slots.len(),
            omega.len()
        )));
    }
    let pairs = pair_slots(&omega, &slots)?;

    let generators: Vec<Generator> = slots
        .iter()
        .map(|slot| {
            let el = &omega.elements[slot.g];
            let gs = el.matrix.mul(&slot.letter.matrix());
            let matrix = gs.mul(&gs.transpose());
            let word = FreeWord::reduce(
                el.word
                    .letters()
                    .iter()
                    .copied()
                    .chain([slot.letter, slot.letter.transpose()])
                    .chain(el.word.transpose().letters().iter().copied()),
            );
            Generator {
                word,
                matrix,
                slot: Some(SlotRef {
                    g_word: el.word.clone(),
                    letter: slot.letter,
                }),
            }
        })
        .collect();

    let graph = completed_graph(&omega, &pairs)?;
    let set = GeneratorSet::assemble(Some(radius), generators, Some(omega.len()), Some(graph));
    cross_check_basis(&set)?;
    Ok(set)
}

/// The ball tree plus one new vertex and two edges per sigma pair.
fn completed_graph(
    omega: &OmegaSet,
    pairs: &[(BoundarySlot, BoundarySlot)],
) -> Result<LabeledGraph> {
    let oriented = |from: u32, to: u32, l: Letter| {
        if l.is_inverse() {
            Edge {
                src: to,
                dst: from,
                letter: l.inverse(),
            }
        } else {
            Edge {
                src: from,
                dst: to,
                letter: l,
            }
        }
    };
    let n = omega.len() as u32;
    let mut edges = Vec::with_capacity(3 * omega.len() + 1);
    for (child, el) in omega.elements.iter().enumerate().skip(1) {
        let letters = el.word.letters();
        let (last, prefix) = letters.split_last().expect("non-identity");
        let parent = omega
            .index_of(&eval_word(&FreeWord::reduce(prefix.iter().copied())))
            .ok_or_else(|| Error::Invariant(format!("parent of {} missing", el.word)))?;
        edges.push(oriented(parent as u32, child as u32, *last));
    }
    for (k, (slot, _)) in pairs.iter().enumerate() {
        let v = n + k as u32;
        let g = &omega.elements[slot.g].matrix;
        let sg = omega
            .index_of(&g.sigma())
            .expect("paired slots are closed under sigma");
        edges.push(oriented(slot.g as u32, v, slot.letter));
        edges.push(oriented(v, sg as u32, slot.letter.transpose()));
    }
    let vertices = (0..n + pairs.len() as u32).collect();
    LabeledGraph::new(vertices, edges, 0)
}

fn cross_check_basis(set: &GeneratorSet) -> Result<()> {
    let graph = set.graph.as_ref().expect("built in-process");
    if !graph.is_stallings() {
        return Err(Error::Invariant("completed graph is not Stallings".into()));
    }
    let basis = graph.pi1_basis()?;
    let expected = set.omega_size.expect("built in-process") + 1;
    if basis.len() != expected {
        return Err(Error::Invariant(format!(
            "cycle basis has {} elements, expected {expected}",
            basis.len()
        )));
    }
    let mut covered = BTreeSet::new();
    for w in &basis {
        let m = eval_word(w);
        let inv = m.inv();
        if set.position(&m).is_none() || set.position(&inv).is_none() {
            return Err(Error::Invariant(format!(
                "basis word {w} is not a generator"
            )));
        }
        covered.insert(m);
        covered.insert(inv);
    }
    if covered.len() != set.len() {
        return Err(Error::Invariant(
            "cycle basis does not account for every generator".into(),
        ));
    }
    Ok(())
}

/// One checked condition in a [`VerificationReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn record(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the generator-set conditions; see [`VerificationReport`].
///
/// `freeness_depth` bounds the length of words over the set that are
/// multiplied out exactly and compared with the identity.
pub fn verify_genset(
    set: &GeneratorSet,
    p: Option<Prime>,
    freeness_depth: usize,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let mats: Vec<&ExactMatrix> = set.matrices().collect();
    let as_set: BTreeSet<&ExactMatrix> = mats.iter().copied().collect();

    report.record(
        "distinct",
        as_set.len() == mats.len(),
        format!("{} of {} distinct", as_set.len(), mats.len()),
    );

    let image_closed = |f: fn(&ExactMatrix) -> ExactMatrix| {
        let img: BTreeSet<ExactMatrix> = mats.iter().map(|m| f(m)).collect();
        img == mats.iter().map(|m| (*m).clone()).collect()
    };
    report.record("inverse_closed", image_closed(ExactMatrix::inv), "");
    report.record("sigma_closed", image_closed(ExactMatrix::sigma), "");
    report.record("tau_closed", image_closed(ExactMatrix::tau), "");

    let bad_shape: Vec<String> = mats
        .iter()
        .filter(|m| !(m.is_symmetric() && m.det() == BigInt::from(1)))
        .map(|m| m.to_string())
        .collect();
    report.record("symmetric_det1", bad_shape.is_empty(), bad_shape.join(" "));

    let max = mats
        .iter()
        .map(|m| m.inf_norm())
        .max()
        .unwrap_or_else(BigInt::zero);
    report.record(
        "max_norm_metadata",
        max == set.max_norm,
        format!("max norm {max}"),
    );

    if let Some(r) = set.radius {
        let bound = BigInt::from(18u64) * r * r;
        report.record("norm_bound", max <= bound, format!("{max} <= {bound}"));

        let three_r = BigInt::from(3u64 * r);
        let bad_slot: Vec<String> = set
            .generators
            .iter()
            .filter(|g| match &g.slot {
                Some(s) => {
                    let gs = eval_word(&s.g_word).mul(&s.letter.matrix());
                    gs.inf_norm() > three_r || gs.mul(&gs.transpose()) != g.matrix
                }
                None => true,
            })
            .map(|g| g.word.to_string())
            .collect();
        report.record("slot_products", bad_slot.is_empty(), bad_slot.join(" "));
    }

    let bad_words = set
        .generators
        .iter()
        .filter(|g| eval_word(&g.word) != g.matrix)
        .count();
    report.record(
        "words_evaluate",
        bad_words == 0,
        format!("{bad_words} mismatched"),
    );

    if let Some(omega) = set.omega_size {
        let want = 2 * (omega + 1);
        report.record(
            "size",
            mats.len() == want,
            format!("{} generators, 2(|omega|+1) = {want}", mats.len()),
        );
    }

    if let Some(p) = p {
        let residues: BTreeSet<_> = mats.iter().map(|m| m.reduce_mod(p)).collect();
        report.record(
            "distinct_mod_p",
            residues.len() == mats.len(),
            format!("{} distinct residues mod {p}", residues.len()),
        );
    }

    match set.inverse_indices() {
        Some(inv) => {
            let hit = first_relation(&mats, &inv, freeness_depth);
            report.record(
                "freeness",
                hit.is_none(),
                match hit {
                    Some(w) => format!("relation {w:?}"),
                    None => format!("no relation of length <= {freeness_depth}"),
                },
            );
        }
        None => report.record("freeness", false, "set is not inverse-closed"),
    }

    if let Some(graph) = &set.graph {
        report.record("stallings", graph.is_stallings(), "");
    }
    report
}

/// Exact product that stays in `i128` until it would overflow.
#[derive(Clone)]
enum Acc {
    Small([i128; 4]),
    Big(ExactMatrix),
}

impl Acc {
    fn of(m: &ExactMatrix) -> Acc {
        match m.to_i64() {
            Some([a, b, c, d]) => Acc::Small([a as i128, b as i128, c as i128, d as i128]),
            None => Acc::Big(m.clone()),
        }
    }

    fn big(&self) -> ExactMatrix {
        match self {
            Acc::Small([a, b, c, d]) => {
                ExactMatrix::new((*a).into(), (*b).into(), (*c).into(), (*d).into())
            }
            Acc::Big(m) => m.clone(),
        }
    }

    fn mul(&self, rhs: &Acc) -> Acc {
        if let (Acc::Small(x), Acc::Small(y)) = (self, rhs) {
            let dot = |p: i128, q: i128, r: i128, s: i128| {
                p.checked_mul(q)?.checked_add(r.checked_mul(s)?)
            };
            if let (Some(a), Some(b), Some(c), Some(d)) = (
                dot(x[0], y[0], x[1], y[2]),
                dot(x[0], y[1], x[1], y[3]),
                dot(x[2], y[0], x[3], y[2]),
                dot(x[2], y[1], x[3], y[3]),
            ) {
                return Acc::Small([a, b, c, d]);
            }
        }
        Acc::Big(self.big().mul(&rhs.big()))
    }

    fn is_identity(&self) -> bool {
        match self {
            Acc::Small(x) => *x == [1, 0, 0, 1],
            Acc::Big(m) => m.is_identity(),
        }
    }
}

/// First (index-lexicographic) nonempty reduced word over `mats` of length
/// at most `depth` that multiplies to the identity over `Z`.
fn first_relation(mats: &[&ExactMatrix], inv: &[usize], depth: usize) -> Option<Vec<usize>> {
    fn walk(
        accs: &[Acc],
        inv: &[usize],
        prefix: &Acc,
        word: &mut Vec<usize>,
        depth: usize,
    ) -> bool {
        for i in 0..accs.len() {
            if word.last().is_some_and(|&j| inv[j] == i) {
                continue;
            }
            let next = prefix.mul(&accs[i]);
            word.push(i);
            if next.is_identity() || (word.len() < depth && walk(accs, inv, &next, word, depth)) {
                return true;
            }
            word.pop();
        }
        false
    }
    if depth == 0 {
        return None;
    }
    let accs: Vec<Acc> = mats.iter().map(|m| Acc::of(m)).collect();
    let mut word = Vec::new();
    walk(&accs, inv, &Acc::Small([1, 0, 0, 1]), &mut word, depth).then_some(word)
}

/// `|Omega_R|` as a plain count.
pub fn omega_count(radius: u64) -> Result<u64> {
    Ok(enum_omega(radius)?.len().to_u64().expect("fits"))
}
