//! Exact rational arithmetic for the combinatorial identities behind the
//! central limit theorems: the piecewise-linear function G, the
//! Rudnick–Sarnak permutation identity, Spohn's trees and the alternating
//! tree sum U, the tree rotation, and the composition coefficient sums.
//!
//! Everything here is exact — no floating point, no tolerances. Inputs are
//! arbitrary-precision rationals; internally the hot loops run on scaled
//! integers (i128 when they fit, BigInt otherwise).
//!
//! Normalization: `g_direct` returns the symmetrized value
//! `G(k) + G(-k)` of the permutation/composition sum, which is the
//! normalization in which `G(k, -k) = |k|` for pairs and the CLT variance
//! `Σ |k| |f̂(k)|²` comes out with coefficient one.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::LazyLock;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest vector length accepted by the G-type permutation enumerations.
pub const MAX_G_LEN: usize = 8;
/// Largest vector length accepted by the tree enumerations.
pub const MAX_TREE_LEN: usize = 6;
/// Largest order accepted by [`comp_coeff_sum`].
pub const MAX_COMP_LEN: usize = 12;

pub(crate) const FACTORIALS: [i64; 13] = [
    1,
    1,
    2,
    6,
    24,
    120,
    720,
    5040,
    40320,
    362880,
    3628800,
    39916800,
    479001600,
];

/// One composition of `l`: cumulative break points (proper prefixes) plus
/// the factorial weight of its parts.
#[derive(Debug, Clone)]
pub(crate) struct Comp {
    /// prefix lengths `ℓ1, ℓ1+ℓ2, ..., ℓ1+...+ℓ_{m-1}` (empty for m = 1)
    pub(crate) breaks: Vec<usize>,
    /// number of parts m
    pub(crate) parts: usize,
    /// `ℓ1! · ... · ℓm!`
    pub(crate) prod_fact: i64,
}

impl Comp {
    /// Part sizes `ℓ1, ..., ℓm` of a composition of `l`.
    pub(crate) fn part_sizes(&self, l: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.parts);
        let mut prev = 0usize;
        for &b in &self.breaks {
            sizes.push(b - prev);
            prev = b;
        }
        sizes.push(l - prev);
        sizes
    }
}

pub(crate) fn compositions(l: usize) -> Vec<Comp> {
    let mut out = Vec::with_capacity(1 << (l.saturating_sub(1)));
    for mask in 0u32..(1 << (l - 1)) {
        let mut breaks = Vec::new();
        let mut prod_fact = 1i64;
        let mut seg = 0usize;
        for pos in 1..=l {
            seg += 1;
            let cut = pos == l || (mask >> (pos - 1)) & 1 == 1;
            if cut {
                prod_fact *= FACTORIALS[seg];
                if pos != l {
                    breaks.push(pos);
                }
                seg = 0;
            }
        }
        let parts = breaks.len() + 1;
        out.push(Comp {
            breaks,
            parts,
            prod_fact,
        });
    }
    out
}

/// Scale a rational vector to integers over a common positive denominator.
fn scale_to_ints(ks: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let mut denom = BigInt::one();
    for k in ks {
        denom = denom.lcm(k.denom());
    }
    let vals = ks
        .iter()
        .map(|k| k.numer() * (&denom / k.denom()))
        .collect();
    (vals, denom)
}

fn fits_i128(vals: &[BigInt]) -> Option<Vec<i128>> {
    let cap = BigInt::from(1i128 << 62);
    if vals.iter().any(|v| v.abs() > cap) {
        return None;
    }
    Some(vals.iter().map(|v| v.to_i128().unwrap()).collect())
}

fn check_zero_sum(ks: &[Rational]) -> Result<()> {
    let sum: Rational = ks.iter().sum();
    if !sum.is_zero() {
        return Err(Error::validation("coordinates must sum to zero"));
    }
    Ok(())
}

/// Visits every permutation of `idx` (Heap's algorithm).
fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut body: F) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    body(&idx);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(c[i], i);
            }
            body(&idx);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Core of the permutation/composition sum
/// `Σ_σ Σ_m (-1)^m/m Σ_comps 1/(ℓ1!...ℓm!) max(0, prefix sums at breaks)`
/// on scaled integers; returns the numerator over the common denominator D.
fn g_half_scaled_i128(vals: &[i128], comps: &[Comp], d: i64) -> i128 {
    let l = vals.len();
    let mut acc: i128 = 0;
    let mut prefix = vec![0i128; l + 1];
    for_each_permutation(l, |perm| {
        for (i, &p) in perm.iter().enumerate() {
            prefix[i + 1] = prefix[i] + vals[p];
        }
        for comp in comps {
            let mut best: i128 = 0;
            for &b in &comp.breaks {
                if prefix[b] > best {
                    best = prefix[b];
                }
            }
            if best != 0 {
                let sign = if comp.parts % 2 == 0 { 1 } else { -1 };
                let w = sign * (d / (comp.parts as i64 * comp.prod_fact));
                acc += w as i128 * best;
            }
        }
    });
    acc
}

fn g_half_scaled_big(vals: &[BigInt], comps: &[Comp], d: i64) -> BigInt {
    let l = vals.len();
    let mut acc = BigInt::zero();
    let mut prefix = vec![BigInt::zero(); l + 1];
    for_each_permutation(l, |perm| {
        for (i, &p) in perm.iter().enumerate() {
            prefix[i + 1] = &prefix[i] + &vals[p];
        }
        for comp in comps {
            let mut best = BigInt::zero();
            for &b in &comp.breaks {
                if prefix[b] > best {
                    best = prefix[b].clone();
                }
            }
            if !best.is_zero() {
                let sign = if comp.parts % 2 == 0 { 1 } else { -1 };
                let w = sign * (d / (comp.parts as i64 * comp.prod_fact));
                acc += best * w;
            }
        }
    });
    acc
}

fn g_denominator(comps: &[Comp]) -> i64 {
    comps
        .iter()
        .fold(1i64, |d, c| d.lcm(&(c.parts as i64 * c.prod_fact)))
}

/// The symmetrized permutation/composition sum `G(k) + G(-k)`, evaluated
/// exactly. For zero-sum pairs this equals `|k1|`; for zero-sum vectors of
/// length 3 and above it vanishes identically.
pub fn g_direct(ks: &[Rational]) -> Result<Rational> {
    let l = ks.len();
    if l == 0 {
        return Err(Error::validation("empty coordinate vector"));
    }
    if l > MAX_G_LEN {
        return Err(Error::resource(format!(
            "g_direct supports lengths up to {MAX_G_LEN}, got {l}"
        )));
    }
    check_zero_sum(ks)?;
    let comps = compositions(l);
    let d = g_denominator(&comps);
    let (vals, scale) = scale_to_ints(ks);
    let numer = match fits_i128(&vals) {
        Some(small) => {
            let neg: Vec<i128> = small.iter().map(|v| -v).collect();
            BigInt::from(
                g_half_scaled_i128(&small, &comps, d) + g_half_scaled_i128(&neg, &comps, d),
            )
        }
        None => {
            let neg: Vec<BigInt> = vals.iter().map(|v| -v).collect();
            g_half_scaled_big(&vals, &comps, d) + g_half_scaled_big(&neg, &comps, d)
        }
    };
    Ok(Rational::new(numer, BigInt::from(d) * scale))
}

/// `c(s) = Σ over set partitions of an s-set of (-1)^{|U|-1} (|U|-1)!`,
/// by direct enumeration of restricted-growth strings.
fn partition_coefficient(s: usize) -> BigInt {
    fn rec(assign: &mut Vec<usize>, used: usize, n: usize, acc: &mut BigInt) {
        if assign.len() == n {
            let sign = if used % 2 == 1 { 1 } else { -1 };
            *acc += BigInt::from(sign * FACTORIALS[used - 1]);
            return;
        }
        for block in 0..=used {
            assign.push(block);
            rec(assign, used.max(block + 1), n, acc);
            assign.pop();
        }
    }
    if s == 0 {
        return BigInt::zero(); // unused: subset and complement are nonempty
    }
    let mut acc = BigInt::zero();
    let mut assign = Vec::with_capacity(s);
    assign.push(0);
    rec(&mut assign, 1, s, &mut acc);
    acc
}

/// Subset re-summation form of [`g_direct`]:
/// `(1/2) Σ_{A, A^c nonempty} c(|A|) c(ℓ-|A|) |Σ_{i∈A} k_i|`
/// with the partition coefficients `c` enumerated independently.
pub fn g_subset_form(ks: &[Rational]) -> Result<Rational> {
    let l = ks.len();
    if l == 0 {
        return Err(Error::validation("empty coordinate vector"));
    }
    if l > MAX_G_LEN {
        return Err(Error::resource(format!(
            "g_subset_form supports lengths up to {MAX_G_LEN}, got {l}"
        )));
    }
    check_zero_sum(ks)?;
    let c: Vec<BigInt> = (0..=l).map(partition_coefficient).collect();
    let mut acc = Rational::zero();
    for mask in 1u32..((1 << l) - 1) {
        let size = mask.count_ones() as usize;
        let weight = &c[size] * &c[l - size];
        if weight.is_zero() {
            continue;
        }
        let mut sum = Rational::zero();
        for (i, k) in ks.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                sum += k;
            }
        }
        acc += Rational::from(weight) * sum.abs();
    }
    Ok(acc / Rational::from_integer(2.into()))
}

/// Both sides of the Rudnick–Sarnak identity for a zero-sum vector:
/// LHS `(1/m) Σ_τ max(0, partial sums)`, RHS
/// `(1/4) Σ_{F proper nonempty} (|F|-1)! (m-|F|-1)! |Σ_{i∈F} v_i|`.
pub fn rs_identity_sides(vs: &[Rational]) -> Result<(Rational, Rational)> {
    let m = vs.len();
    if !(2..=MAX_G_LEN).contains(&m) {
        return Err(Error::validation(format!(
            "rs_identity_sides needs 2..={MAX_G_LEN} coordinates, got {m}"
        )));
    }
    check_zero_sum(vs)?;
    let (vals, scale) = scale_to_ints(vs);

    // LHS over all permutations, partial sums up to m-1 terms
    let numer = match fits_i128(&vals) {
        Some(small) => {
            let mut acc: i128 = 0;
            let mut prefix = vec![0i128; m + 1];
            for_each_permutation(m, |perm| {
                for (i, &p) in perm.iter().enumerate() {
                    prefix[i + 1] = prefix[i] + small[p];
                }
                let mut best: i128 = 0;
                for &v in prefix.iter().take(m).skip(1) {
                    if v > best {
                        best = v;
                    }
                }
                acc += best;
            });
            BigInt::from(acc)
        }
        None => {
            let mut acc = BigInt::zero();
            let mut prefix = vec![BigInt::zero(); m + 1];
            for_each_permutation(m, |perm| {
                for (i, &p) in perm.iter().enumerate() {
                    prefix[i + 1] = &prefix[i] + &vals[p];
                }
                let mut best = BigInt::zero();
                for v in prefix.iter().take(m).skip(1) {
                    if *v > best {
                        best = v.clone();
                    }
                }
                acc += best;
            });
            acc
        }
    };
    let lhs = Rational::new(numer, BigInt::from(m as i64) * &scale);

    let mut rhs = Rational::zero();
    for mask in 1u32..((1 << m) - 1) {
        let size = mask.count_ones() as usize;
        let weight = FACTORIALS[size - 1] * FACTORIALS[m - size - 1];
        let mut sum = Rational::zero();
        for (i, v) in vs.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                sum += v;
            }
        }
        rhs += Rational::from_integer(weight.into()) * sum.abs();
    }
    rhs /= Rational::from_integer(4.into());
    Ok((lhs, rhs))
}

/// A nonzero 0/1 vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    bits: Vec<u8>,
}

impl Branch {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::validation("branch entries must be 0 or 1"));
        }
        if bits.iter().all(|&b| b == 0) {
            return Err(Error::validation("branch must be nonzero"));
        }
        Ok(Branch { bits })
    }

    fn from_mask(mask: u32, len: usize) -> Self {
        Branch {
            bits: (0..len).map(|j| ((mask >> j) & 1) as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Coordinatewise `self <= other` with strict inequality somewhere.
    pub fn strictly_below(&self, other: &Branch) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a <= b)
            && self.bits != other.bits
    }

    /// All coordinates equal to one.
    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b == 1)
    }

    /// `α · k = Σ_j α_j k_j`.
    pub fn dot(&self, ks: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (b, k) in self.bits.iter().zip(ks) {
            if *b == 1 {
                acc += k;
            }
        }
        acc
    }

    fn mask(&self) -> u32 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (j, &b)| m | ((b as u32) << j))
    }
}

/// A strictly increasing chain of branches in the coordinatewise order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    branches: Vec<Branch>,
}

impl Tree {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::validation("tree needs at least one branch"));
        }
        for w in branches.windows(2) {
            if !w[0].strictly_below(&w[1]) {
                return Err(Error::validation(
                    "branches must form a strictly increasing chain",
                ));
            }
        }
        Ok(Tree { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn size(&self) -> usize {
        self.branches.len()
    }

    pub fn max_branch(&self) -> &Branch {
        self.branches.last().expect("nonempty")
    }

    /// The `|T| < ℓ` side condition used when G is re-indexed over trees.
    pub fn is_proper(&self) -> bool {
        self.size() < self.max_branch().len()
    }

    /// Largest branch differs from `D = (1,...,1)`.
    pub fn max_below_full(&self) -> bool {
        !self.max_branch().is_full()
    }

    /// Last coordinate of the largest branch is zero.
    pub fn max_last_coordinate_zero(&self) -> bool {
        *self.max_branch().bits().last().expect("nonempty") == 0
    }

    /// `max(0, α·k | α ∈ T)` — the tree maximum, which always includes 0.
    pub fn tree_max(&self, ks: &[Rational]) -> Rational {
        let mut best = Rational::zero();
        for b in &self.branches {
            let v = b.dot(ks);
            if v > best {
                best = v;
            }
        }
        best
    }
}

fn enumerate_trees_uncached(l: usize) -> Vec<Tree> {
    let top = (1u32 << l) - 1;
    let mut all: Vec<Vec<u32>> = Vec::new();
    // depth-first over strictly increasing mask chains
    fn extend(chain: &mut Vec<u32>, top: u32, all: &mut Vec<Vec<u32>>) {
        all.push(chain.clone());
        let last = *chain.last().unwrap();
        for next in (last + 1)..=top {
            if next & last == last && next != last {
                chain.push(next);
                extend(chain, top, all);
                chain.pop();
            }
        }
    }
    for start in 1..=top {
        let mut chain = vec![start];
        extend(&mut chain, top, &mut all);
    }
    let mut trees: Vec<Tree> = all
        .into_iter()
        .map(|masks| Tree {
            branches: masks.iter().map(|&m| Branch::from_mask(m, l)).collect(),
        })
        .collect();
    trees.sort_by(|a, b| {
        (a.size(), &a.branches).cmp(&(b.size(), &b.branches))
    });
    trees
}

static TREE_CACHE: LazyLock<Vec<Vec<Tree>>> = LazyLock::new(|| {
    (1..=MAX_TREE_LEN).map(enumerate_trees_uncached).collect()
});

/// Every strictly increasing chain of nonzero 0/1 vectors of length `l`,
/// each exactly once, ordered by (size, branch list).
///
/// The `|T| < ℓ` bound and the largest-branch conditions are deliberately
/// not baked in; filter with [`Tree::is_proper`], [`Tree::max_below_full`]
/// and [`Tree::max_last_coordinate_zero`].
pub fn enumerate_trees(l: usize) -> Result<impl Iterator<Item = &'static Tree>> {
    if l == 0 {
        return Err(Error::validation("tree length must be at least 1"));
    }
    if l > MAX_TREE_LEN {
        return Err(Error::resource(format!(
            "tree enumeration supports lengths up to {MAX_TREE_LEN}, got {l} \
             (chain count grows super-exponentially)"
        )));
    }
    Ok(TREE_CACHE[l - 1].iter())
}

/// The alternating tree sum
/// `U(k) = Σ_{T} (-1)^{|T|-1} max(0, α·k | α ∈ T)` over all trees of
/// length `ℓ = k.len()`. Defined for arbitrary k (no zero-sum condition).
pub fn u_tree_sum(ks: &[Rational]) -> Result<Rational> {
    let l = ks.len();
    let trees = enumerate_trees(l)?;
    let (vals, scale) = scale_to_ints(ks);
    if let Some(small) = fits_i128(&vals) {
        let mut acc: i128 = 0;
        for tree in trees {
            let mut best: i128 = 0;
            for b in tree.branches() {
                let mask = b.mask();
                let mut dot: i128 = 0;
                for (j, v) in small.iter().enumerate() {
                    if (mask >> j) & 1 == 1 {
                        dot += v;
                    }
                }
                if dot > best {
                    best = dot;
                }
            }
            if tree.size() % 2 == 1 {
                acc += best;
            } else {
                acc -= best;
            }
        }
        Ok(Rational::new(BigInt::from(acc), scale))
    } else {
        let ks_vec = ks.to_vec();
        let mut acc = Rational::zero();
        for tree in trees {
            let m = tree.tree_max(&ks_vec);
            if tree.size() % 2 == 1 {
                acc += m;
            } else {
                acc -= m;
            }
        }
        Ok(acc)
    }
}

/// The tree rotation
/// `W(T) = (α⁽²⁾-α⁽¹⁾, ..., α⁽|T|⁾-α⁽¹⁾, D-α⁽¹⁾)`, defined whenever the
/// largest branch of `T` is not `D = (1,...,1)`.
pub fn rotate_tree(tree: &Tree) -> Result<Tree> {
    if tree.max_branch().is_full() {
        return Err(Error::domain(
            "rotation undefined: largest branch equals (1,...,1)",
        ));
    }
    let first = tree.branches().first().expect("nonempty");
    let l = first.len();
    let mut branches = Vec::with_capacity(tree.size());
    for b in &tree.branches()[1..] {
        let bits: Vec<u8> = b
            .bits()
            .iter()
            .zip(first.bits())
            .map(|(x, y)| x - y)
            .collect();
        branches.push(Branch::new(bits)?);
    }
    let full: Vec<u8> = first.bits().iter().map(|y| 1 - y).collect();
    branches.push(Branch::new(full)?);
    debug_assert_eq!(branches.len(), tree.size());
    debug_assert!(branches.iter().all(|b| b.len() == l));
    Tree::new(branches)
}

/// `Σ_m Σ_{compositions of ℓ into m parts} ((-1)^{m-1}/m) ℓ!/(ℓ1!...ℓm!)`,
/// the Taylor coefficients of `log(1 + (e^z - 1)) = z`: 1 for ℓ = 1 and 0
/// beyond.
pub fn comp_coeff_sum(l: usize) -> Result<Rational> {
    if l == 0 {
        return Err(Error::validation("order must be at least 1"));
    }
    if l > MAX_COMP_LEN {
        return Err(Error::resource(format!(
            "comp_coeff_sum supports orders up to {MAX_COMP_LEN}, got {l}"
        )));
    }
    let mut acc = Rational::zero();
    for comp in compositions(l) {
        let sign = if comp.parts % 2 == 1 { 1 } else { -1 };
        let numer = BigInt::from(sign) * FACTORIALS[l];
        let denom = BigInt::from(comp.parts as i64) * comp.prod_fact;
        acc += Rational::new(numer, denom);
    }
    Ok(acc)
}

/// `max(0, n - max(0, s...) - max(0, -s...))` over the listed partial sums:
/// the number of admissible lattice positions
/// `#{u : 0 <= u <= n-1 and 0 <= u + s <= n-1 for every s}`.
pub fn clamp_count(n: i64, partial_sums: &[i64]) -> i64 {
    let hi = partial_sums.iter().copied().fold(0i64, i64::max);
    let lo = partial_sums.iter().map(|s| -s).fold(0i64, i64::max);
    (n - hi - lo).max(0)
}

// ---------------------------------------------------------------------------
// randomized identity suite (shared by the CLI and the acceptance tests)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub trials: usize,
    pub passed: bool,
    /// first failing input, if any
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub max_ell: usize,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub all_passed: bool,
}

fn rat(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Random integer zero-sum vector with entries in [-20, 20].
fn random_zero_sum(rng: &mut ChaCha8Rng, l: usize) -> Vec<Rational> {
    loop {
        let mut vals: Vec<i64> = (0..l - 1).map(|_| rng.gen_range(-20..=20)).collect();
        let last: i64 = -vals.iter().sum::<i64>();
        if last.abs() <= 20 {
            vals.push(last);
            return vals.into_iter().map(rat).collect();
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, l: usize) -> Vec<Rational> {
    (0..l).map(|_| rat(rng.gen_range(-20..=20))).collect()
}

fn fmt_vec(ks: &[Rational]) -> String {
    let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Runs every exact identity on `trials` random integer vectors per length.
///
/// All comparisons are exact; a failure carries the counterexample vector.
pub fn run_identity_suite(max_ell: usize, trials: usize, seed: u64) -> Result<IdentityReport> {
    if max_ell > MAX_TREE_LEN {
        return Err(Error::resource(format!(
            "identity suite supports max_ell up to {MAX_TREE_LEN}"
        )));
    }
    if max_ell < 2 {
        return Err(Error::validation("identity suite needs max_ell >= 2"));
    }
    let mut checks = Vec::new();
    let mut check = |name: String, run: &mut dyn FnMut() -> (usize, Option<String>)| {
        let (trials, counterexample) = run();
        checks.push(IdentityCheck {
            name,
            trials,
            passed: counterexample.is_none(),
            counterexample,
        });
    };

    // G(k1, k2) = |k1| on zero-sum pairs
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check("g_pair_abs".into(), &mut || {
        for _ in 0..trials {
            let ks = random_zero_sum(&mut rng, 2);
            let want = ks[0].abs();
            match g_direct(&ks) {
                Ok(v) if v == want => {}
                _ => return (trials, Some(fmt_vec(&ks))),
            }
        }
        (trials, None)
    });

    // G = 0 for 3 <= l <= max_ell
    for l in 3..=max_ell {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (l as u64) << 8);
        check(format!("g_zero_len{l}"), &mut || {
            for _ in 0..trials {
                let ks = random_zero_sum(&mut rng, l);
                match g_direct(&ks) {
                    Ok(v) if v.is_zero() => {}
                    _ => return (trials, Some(fmt_vec(&ks))),
                }
            }
            (trials, None)
        });
    }

    // direct sum equals subset re-summation
    for l in 2..=max_ell {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5 ^ (l as u64) << 16);
        check(format!("g_direct_eq_subset_len{l}"), &mut || {
            for _ in 0..trials {
                let ks = random_zero_sum(&mut rng, l);
                match (g_direct(&ks), g_subset_form(&ks)) {
                    (Ok(a), Ok(b)) if a == b => {}
                    _ => return (trials, Some(fmt_vec(&ks))),
                }
            }
            (trials, None)
        });
    }

    // Rudnick–Sarnak, 2 <= m <= 7
    for m in 2..=7usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151 ^ (m as u64) << 24);
        check(format!("rudnick_sarnak_m{m}"), &mut || {
            for _ in 0..trials {
                let vs = random_zero_sum(&mut rng, m);
                match rs_identity_sides(&vs) {
                    Ok((lhs, rhs)) if lhs == rhs => {}
                    _ => return (trials, Some(fmt_vec(&vs))),
                }
            }
            (trials, None)
        });
    }

    // U = 0 for 2 <= l <= min(5, max_ell)
    for l in 2..=max_ell.min(5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF ^ (l as u64) << 32);
        check(format!("u_zero_len{l}"), &mut || {
            for _ in 0..trials {
                let ks = random_vector(&mut rng, l);
                match u_tree_sum(&ks) {
                    Ok(v) if v.is_zero() => {}
                    _ => return (trials, Some(fmt_vec(&ks))),
                }
            }
            (trials, None)
        });
    }

    // Proposition 1 in the symmetrized normalization:
    // 2 (U(k) + U(-k)) = G(k, k_{l+1}) + G(-k, -k_{l+1})
    for l in 1..=max_ell.min(4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0DE ^ (l as u64) << 40);
        check(format!("proposition1_len{l}"), &mut || {
            for _ in 0..trials {
                let ks = random_vector(&mut rng, l);
                let neg: Vec<Rational> = ks.iter().map(|k| -k.clone()).collect();
                let mut ext = ks.clone();
                ext.push(-ks.iter().sum::<Rational>());
                let next: Vec<Rational> = ext.iter().map(|k| -k.clone()).collect();
                let lhs = match (u_tree_sum(&ks), u_tree_sum(&neg)) {
                    (Ok(a), Ok(b)) => (a + b) * rat(2),
                    _ => return (trials, Some(fmt_vec(&ks))),
                };
                let rhs = match (g_direct(&ext), g_direct(&next)) {
                    (Ok(a), Ok(b)) => a + b,
                    _ => return (trials, Some(fmt_vec(&ks))),
                };
                if lhs != rhs {
                    return (trials, Some(fmt_vec(&ks)));
                }
            }
            (trials, None)
        });
    }

    // rotation identity: tree maxima of T and W(T) agree after symmetrizing
    for l in 2..=max_ell.min(4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF00D ^ (l as u64) << 48);
        check(format!("rotation_identity_len{l}"), &mut || {
            for _ in 0..trials {
                let ks = random_zero_sum(&mut rng, l);
                let neg: Vec<Rational> = ks.iter().map(|k| -k.clone()).collect();
                for tree in enumerate_trees(l).expect("within cap") {
                    if !tree.max_below_full() {
                        continue;
                    }
                    let rotated = match rotate_tree(tree) {
                        Ok(t) => t,
                        Err(_) => return (trials, Some(fmt_vec(&ks))),
                    };
                    let lhs = tree.tree_max(&ks) + tree.tree_max(&neg);
                    let rhs = rotated.tree_max(&ks) + rotated.tree_max(&neg);
                    if lhs != rhs {
                        return (trials, Some(fmt_vec(&ks)));
                    }
                }
            }
            (trials, None)
        });
    }

    // composition coefficient sum: 1 at l = 1, 0 for 2 <= l <= 12
    check("comp_coeff_sum".into(), &mut || {
        match comp_coeff_sum(1) {
            Ok(v) if v.is_one() => {}
            _ => return (MAX_COMP_LEN, Some("l = 1".into())),
        }
        for l in 2..=MAX_COMP_LEN {
            match comp_coeff_sum(l) {
                Ok(v) if v.is_zero() => {}
                _ => return (MAX_COMP_LEN, Some(format!("l = {l}"))),
            }
        }
        (MAX_COMP_LEN, None)
    });

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(IdentityReport {
        max_ell,
        trials,
        seed,
        checks,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g_direct_frozen_examples() {
        assert_eq!(g_direct(&[rat(3), rat(-3)]).unwrap(), rat(3));
        assert_eq!(g_direct(&[rat(0)]).unwrap(), rat(0));
        assert_eq!(g_direct(&[rat(1), rat(2), rat(-3)]).unwrap(), rat(0));
    }

    #[test]
    fn g_direct_validates() {
        assert!(matches!(
            g_direct(&[rat(1), rat(1)]),
            Err(Error::Validation(_))
        ));
        let long: Vec<Rational> = (0..9).map(|_| rat(0)).collect();
        assert!(matches!(g_direct(&long), Err(Error::Resource(_))));
    }

    #[test]
    fn g_subset_frozen_examples() {
        assert_eq!(g_subset_form(&[rat(3), rat(-3)]).unwrap(), rat(3));
        assert_eq!(g_subset_form(&[rat(1), rat(2), rat(-3)]).unwrap(), rat(0));
        assert_eq!(g_subset_form(&[rat(0), rat(0)]).unwrap(), rat(0));
    }

    #[test]
    fn partition_coefficients_vanish_beyond_singletons() {
        // c(1) = 1; c(s) = 0 for s >= 2 (same alternating sum as (1.14))
        assert_eq!(partition_coefficient(1), BigInt::from(1));
        for s in 2..=8 {
            assert_eq!(partition_coefficient(s), BigInt::zero(), "s={s}");
        }
    }

    #[test]
    fn rs_identity_frozen_examples() {
        let (lhs, rhs) = rs_identity_sides(&[rat(2), rat(-1), rat(-1)]).unwrap();
        assert_eq!(lhs, rat(2));
        assert_eq!(rhs, rat(2));
        let a = Rational::new(7.into(), 2.into());
        let (lhs, rhs) = rs_identity_sides(&[a.clone(), -a.clone()]).unwrap();
        assert_eq!(lhs, a / rat(2));
        assert_eq!(lhs, rhs);
        let (lhs, rhs) = rs_identity_sides(&[rat(0), rat(0), rat(0)]).unwrap();
        assert_eq!(lhs, rat(0));
        assert_eq!(rhs, rat(0));
    }

    #[test]
    fn tree_enumeration_len2_is_the_known_list() {
        let trees: Vec<&Tree> = enumerate_trees(2).unwrap().collect();
        let b = |bits: &[u8]| Branch::new(bits.to_vec()).unwrap();
        let expect = vec![
            Tree::new(vec![b(&[0, 1])]).unwrap(),
            Tree::new(vec![b(&[1, 0])]).unwrap(),
            Tree::new(vec![b(&[1, 1])]).unwrap(),
            Tree::new(vec![b(&[0, 1]), b(&[1, 1])]).unwrap(),
            Tree::new(vec![b(&[1, 0]), b(&[1, 1])]).unwrap(),
        ];
        let got: Vec<Tree> = trees.into_iter().cloned().collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn tree_enumeration_len1() {
        let trees: Vec<&Tree> = enumerate_trees(1).unwrap().collect();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].branches()[0].bits(), &[1]);
    }

    /// Brute-force chain counter: every subset of the nonzero masks that
    /// happens to be totally ordered is a tree.
    fn brute_force_chain_count(l: usize) -> usize {
        let top = (1u32 << l) - 1;
        let masks: Vec<u32> = (1..=top).collect();
        let mut count = 0usize;
        for subset in 1u32..(1 << masks.len()) {
            let chosen: Vec<u32> = masks
                .iter()
                .enumerate()
                .filter(|(i, _)| (subset >> i) & 1 == 1)
                .map(|(_, &m)| m)
                .collect();
            let mut sorted = chosen.clone();
            sorted.sort_by_key(|m| m.count_ones());
            let mut ok = true;
            for w in sorted.windows(2) {
                if w[0] & w[1] != w[0] || w[0] == w[1] {
                    ok = false;
                    break;
                }
            }
            if ok {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn tree_count_matches_brute_force_oracle() {
        for l in 1..=4usize {
            let fast = enumerate_trees(l).unwrap().count();
            assert_eq!(fast, brute_force_chain_count(l), "l={l}");
        }
    }

    #[test]
    fn tree_enumeration_rejects_out_of_range() {
        assert!(matches!(enumerate_trees(0), Err(Error::Validation(_))));
        assert!(matches!(enumerate_trees(7), Err(Error::Resource(_))));
    }

    #[test]
    fn u_tree_sum_frozen_examples() {
        assert_eq!(u_tree_sum(&[rat(5), rat(-5)]).unwrap(), rat(0));
        assert_eq!(u_tree_sum(&[rat(7)]).unwrap(), rat(7));
        assert_eq!(u_tree_sum(&[rat(-7)]).unwrap(), rat(0));
        assert_eq!(u_tree_sum(&[rat(1), rat(2), rat(-3)]).unwrap(), rat(0));
    }

    #[test]
    fn rotation_frozen_examples() {
        let b = |bits: &[u8]| Branch::new(bits.to_vec()).unwrap();
        let t = Tree::new(vec![b(&[1, 0])]).unwrap();
        let rotated = rotate_tree(&t).unwrap();
        assert_eq!(rotated.branches()[0].bits(), &[0, 1]);

        let full_top = Tree::new(vec![b(&[0, 1]), b(&[1, 1])]).unwrap();
        assert!(matches!(rotate_tree(&full_top), Err(Error::Domain(_))));
    }

    #[test]
    fn rotation_returns_after_size_steps() {
        // W applied repeatedly cycles through |T|-step orbits on which the
        // symmetrized tree maximum is constant
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in 2..=4usize {
            let ks = random_zero_sum(&mut rng, l);
            let neg: Vec<Rational> = ks.iter().map(|k| -k.clone()).collect();
            for tree in enumerate_trees(l).unwrap() {
                if !tree.max_below_full() {
                    continue;
                }
                let base = tree.tree_max(&ks) + tree.tree_max(&neg);
                let mut current = tree.clone();
                for _ in 0..tree.size() {
                    if !current.max_below_full() {
                        break;
                    }
                    current = rotate_tree(&current).unwrap();
                    assert_eq!(
                        current.tree_max(&ks) + current.tree_max(&neg),
                        base,
                        "tree {tree:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn comp_coeff_examples() {
        assert_eq!(comp_coeff_sum(1).unwrap(), rat(1));
        assert_eq!(comp_coeff_sum(2).unwrap(), rat(0));
        assert_eq!(comp_coeff_sum(7).unwrap(), rat(0));
        assert_eq!(comp_coeff_sum(12).unwrap(), rat(0));
        assert!(matches!(comp_coeff_sum(13), Err(Error::Resource(_))));
    }

    #[test]
    fn clamp_count_examples() {
        assert_eq!(clamp_count(5, &[2]), 3);
        assert_eq!(clamp_count(5, &[3, -2]), 0);
        assert_eq!(clamp_count(5, &[]), 5);
        // against the direct lattice count
        for n in 1..=6i64 {
            for a in -4..=4i64 {
                for b in -4..=4i64 {
                    let direct = (0..n)
                        .filter(|&u| {
                            (0..n).contains(&(u + a)) && (0..n).contains(&(u + b))
                        })
                        .count() as i64;
                    assert_eq!(clamp_count(n, &[a, b]), direct, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn identity_suite_smoke() {
        let report = run_identity_suite(3, 12, 42).unwrap();
        assert!(report.all_passed, "{report:?}");
        let again = run_identity_suite(3, 12, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    fn zero_sum_strategy(l: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec(-12i64..=12, l - 1).prop_map(move |mut v| {
            let last: i64 = -v.iter().sum::<i64>();
            v.push(last);
            v.into_iter().map(rat).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prop_g_direct_matches_subset_form(ks in (2usize..=5).prop_flat_map(zero_sum_strategy)) {
            prop_assert_eq!(g_direct(&ks).unwrap(), g_subset_form(&ks).unwrap());
        }

        #[test]
        fn prop_g_pair_is_abs(a in -40i64..=40) {
            let ks = vec![rat(a), rat(-a)];
            prop_assert_eq!(g_direct(&ks).unwrap(), rat(a.abs()));
        }

        #[test]
        fn prop_g_vanishes_beyond_pairs(ks in (3usize..=5).prop_flat_map(zero_sum_strategy)) {
            prop_assert!(g_direct(&ks).unwrap().is_zero());
        }

        #[test]
        fn prop_rs_sides_agree(vs in (2usize..=6).prop_flat_map(zero_sum_strategy)) {
            let (lhs, rhs) = rs_identity_sides(&vs).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn prop_u_vanishes(ks in proptest::collection::vec(-12i64..=12, 2..=4)) {
            let ks: Vec<Rational> = ks.into_iter().map(rat).collect();
            prop_assert!(u_tree_sum(&ks).unwrap().is_zero());
        }

        #[test]
        fn prop_g_permutation_invariant(ks in (3usize..=4).prop_flat_map(zero_sum_strategy), swap in 0usize..2) {
            let mut permuted = ks.clone();
            permuted.swap(swap, swap + 1);
            prop_assert_eq!(g_direct(&ks).unwrap(), g_direct(&permuted).unwrap());
        }

        #[test]
        fn prop_g_positively_homogeneous(a in -15i64..=15, num in 1i64..=9, den in 1i64..=9) {
            let ks = vec![rat(a), rat(-a)];
            let c = Rational::new(num.into(), den.into());
            let scaled: Vec<Rational> = ks.iter().map(|k| k * &c).collect();
            prop_assert_eq!(g_direct(&scaled).unwrap(), g_direct(&ks).unwrap() * &c);
        }
    }
}
