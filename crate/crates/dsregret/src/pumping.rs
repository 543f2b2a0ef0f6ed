//! Discounted values of paths, lassos and pumped paths; cycle replacement
//! and history compression; reachability of step-indexed classes under a
//! switching strategy.
//!
//! Pumped paths carry repetition counts as big naturals, so their values
//! cannot always be materialized: `lambda^(|beta| * k)` for `k = 2^100` has
//! a denominator with 2^100 bits. Values are therefore represented as exact
//! finite sums `sum c_i * lambda^(E_i)` and compared symbolically.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::game::{Game, Owner, VertexId};
use crate::history::{History, Lasso};
use crate::rational::{pow, Rational};
use crate::strategy::SwitchingStrategy;

// ---------------------------------------------------------------------------
// symbolic values
// ---------------------------------------------------------------------------

/// An exact value `sum c_i * lambda^(E_i)` with big-natural exponents.
/// Terms are sorted by exponent, exponents are distinct, coefficients
/// nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountPoly {
    terms: Vec<(BigUint, Rational)>,
}

/// Bit budget for materializing a single power of lambda during comparison
/// or conversion. Exceeding it means the inputs are far outside desk scale.
const MATERIALIZE_BIT_LIMIT: u64 = 4_000_000;

impl DiscountPoly {
    pub fn zero() -> DiscountPoly {
        DiscountPoly { terms: Vec::new() }
    }

    pub fn constant(c: Rational) -> DiscountPoly {
        let mut p = DiscountPoly::zero();
        p.add_term(BigUint::zero(), c);
        p
    }

    /// Adds `coeff * lambda^exp`, merging with an existing term.
    pub fn add_term(&mut self, exp: BigUint, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(e, _)| e.cmp(&exp)) {
            Ok(i) => {
                self.terms[i].1 += coeff;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (exp, coeff)),
        }
    }

    pub fn terms(&self) -> &[(BigUint, Rational)] {
        &self.terms
    }

    fn sub(&self, other: &DiscountPoly) -> DiscountPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    /// The exact sign of the value at the given discount factor.
    pub fn sign(&self, lambda: &Rational) -> Result<i8, Error> {
        let mut terms = self.terms.clone();
        loop {
            match terms.len() {
                0 => return Ok(0),
                1 => {
                    return Ok(if terms[0].1.is_positive() { 1 } else { -1 });
                }
                _ => {}
            }
            let gap = &terms[1].0 - &terms[0].0;
            // |tail| <= (sum of |c_i|, i >= 1) * lambda^gap; the head wins
            // outright when lambda^gap < |c_0| / sum.
            let tail_mass: Rational = terms[1..]
                .iter()
                .map(|(_, c)| c.abs())
                .fold(Rational::zero(), |a, b| a + b);
            let threshold = terms[0].1.abs() / tail_mass;
            if pow_certainly_below(lambda, &gap, &threshold) {
                return Ok(if terms[0].1.is_positive() { 1 } else { -1 });
            }
            // Otherwise fold the second term into the first exactly.
            let lam_gap = materialize_power(lambda, &gap)?;
            let folded = terms[0].1.clone() + terms[1].1.clone() * lam_gap;
            let exp = terms[0].0.clone();
            terms.drain(0..2);
            if !folded.is_zero() {
                terms.insert(0, (exp, folded));
            }
        }
    }

    /// Exact comparison of two values at the given discount factor.
    pub fn try_cmp(&self, other: &DiscountPoly, lambda: &Rational) -> Result<Ordering, Error> {
        Ok(match self.sub(other).sign(lambda)? {
            0 => Ordering::Equal,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Greater,
        })
    }

    /// Materializes the value as a single rational when every exponent is
    /// small enough; `None` when that is physically out of reach.
    pub fn to_rational(&self, lambda: &Rational) -> Option<Rational> {
        let per_power_bits = lambda.numer().bits().max(lambda.denom().bits()).max(1);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let exp = e.to_u64()?;
            if exp.checked_mul(per_power_bits)? > MATERIALIZE_BIT_LIMIT {
                return None;
            }
            acc += c * pow(lambda, exp);
        }
        Some(acc)
    }

    /// Plain-text rendering: `p/q`, with `lambda^E` factors for symbolic
    /// terms, e.g. `2/1 - 2/1*lambda^1267650600228229401496703205376`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0/1".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let part = if e.is_zero() {
                format!("{}/{}", mag.numer(), mag.denom())
            } else {
                format!("{}/{}*lambda^{}", mag.numer(), mag.denom(), e)
            };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&part);
        }
        out
    }
}

/// Whether `lambda^exp < threshold` can be certified cheaply. `false` means
/// "not certified", never "certainly not below".
fn pow_certainly_below(lambda: &Rational, exp: &BigUint, threshold: &Rational) -> bool {
    if threshold.is_negative() || threshold.is_zero() {
        return false;
    }
    if *threshold > Rational::one() {
        return true; // lambda^exp <= 1 < threshold
    }
    if *threshold == Rational::one() {
        return !exp.is_zero();
    }
    // Find s (a power of two) with lambda^s <= 1/2, by squaring p and q.
    let mut p = lambda.numer().magnitude().clone();
    let mut q = lambda.denom().magnitude().clone();
    let mut s = BigUint::one();
    loop {
        if &p * 2u32 <= q {
            break;
        }
        p = &p * &p;
        q = &q * &q;
        s <<= 1;
        if s.bits() > 24 {
            return false; // lambda is too close to 1 for this shortcut
        }
    }
    // lambda^exp <= 2^(-floor(exp/s)) and 2^(-k) < a/b once k >= bits(b).
    let k = exp / &s;
    let b = threshold.denom().magnitude();
    k >= BigUint::from(b.bits())
}

/// `lambda^exp` as a rational, guarded against absurd exponent sizes.
fn materialize_power(lambda: &Rational, exp: &BigUint) -> Result<Rational, Error> {
    let per_power_bits = lambda.numer().bits().max(lambda.denom().bits()).max(1);
    match exp.to_u64() {
        Some(e) if e.checked_mul(per_power_bits).is_some_and(|b| b <= MATERIALIZE_BIT_LIMIT) => {
            Ok(pow(lambda, e))
        }
        _ => Err(Error::too_large(format!(
            "comparison would materialize lambda^{exp}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// path and lasso values
// ---------------------------------------------------------------------------

/// `sum lambda^i * w(v_i, v_(i+1))` over the edges of `h`.
pub fn val_history(g: &Game, h: &History) -> Rational {
    val_vertex_seq(g, h.vertices())
}

fn val_vertex_seq(g: &Game, vs: &[VertexId]) -> Rational {
    let mut acc = Rational::zero();
    let mut lam_pow = Rational::one();
    for w in vs.windows(2) {
        let weight = g.weight(w[0], w[1]).expect("history edge exists");
        acc += &lam_pow * Rational::from_integer(weight.into());
        lam_pow *= g.lambda();
    }
    acc
}

/// Value of the infinite play `alpha . beta^omega`.
pub fn val_lasso(g: &Game, l: &Lasso) -> Rational {
    let cycle = val_history(g, &l.beta);
    let denom = Rational::one() - pow(g.lambda(), l.beta.len() as u64);
    val_history(g, &l.alpha) + pow(g.lambda(), l.alpha.len() as u64) * cycle / denom
}

// ---------------------------------------------------------------------------
// pumped paths
// ---------------------------------------------------------------------------

/// A cycle raised to a big power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pump {
    pub beta: History,
    pub k: BigUint,
}

impl Pump {
    pub fn new(beta: History, k: BigUint) -> Result<Pump, Error> {
        if !beta.is_cycle() {
            return Err(Error::invalid("pumped segment must be a nonempty cycle"));
        }
        if k.is_zero() {
            return Err(Error::invalid("pump count must be at least 1"));
        }
        Ok(Pump { beta, k })
    }
}

/// `alpha . beta^k . gamma` with the repetition count as a big natural.
/// `pump = None` encodes a plain path `alpha . gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpedPath {
    pub alpha: History,
    pub pump: Option<Pump>,
    pub gamma: History,
}

impl PumpedPath {
    pub fn new(alpha: History, pump: Option<Pump>, gamma: History) -> Result<PumpedPath, Error> {
        let p = PumpedPath { alpha, pump, gamma };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), Error> {
        match &self.pump {
            Some(pump) => {
                if self.alpha.last() != pump.beta.first() || pump.beta.last() != self.gamma.first()
                {
                    return Err(Error::invalid("pumped path segments do not connect"));
                }
            }
            None => {
                if self.alpha.last() != self.gamma.first() {
                    return Err(Error::invalid("pumped path segments do not connect"));
                }
            }
        }
        Ok(())
    }

    /// Total number of edges, `|alpha| + k * |beta| + |gamma|`.
    pub fn edge_len(&self) -> BigUint {
        let mut n = BigUint::from(self.alpha.len() + self.gamma.len());
        if let Some(p) = &self.pump {
            n += BigUint::from(p.beta.len()) * &p.k;
        }
        n
    }

    /// The explicit history, when `k` is small enough to unroll.
    pub fn unroll(&self, _g: &Game) -> Option<History> {
        match &self.pump {
            None => self.alpha.concat(&self.gamma).ok(),
            Some(p) => {
                let k = p.k.to_usize()?;
                if k.checked_mul(p.beta.len())? > 1_000_000 {
                    return None;
                }
                let mid = p.beta.repeat(k).ok()?;
                self.alpha.concat(&mid).ok()?.concat(&self.gamma).ok()
            }
        }
    }
}

/// Exact value of `alpha . beta^k . gamma`:
/// `Val(alpha) + lambda^|alpha| * Val(beta)/(1 - lambda^|beta|) * (1 - lambda^(|beta| k))
///  + lambda^(|alpha| + |beta| k) * Val(gamma)`.
pub fn val_pumped(g: &Game, p: &PumpedPath) -> Result<DiscountPoly, Error> {
    p.validate()?;
    let mut out = DiscountPoly::constant(val_history(g, &p.alpha));
    let alpha_len = BigUint::from(p.alpha.len());
    match &p.pump {
        None => {
            out.add_term(alpha_len, val_history(g, &p.gamma));
        }
        Some(pump) => {
            let q = val_history(g, &pump.beta)
                / (Rational::one() - pow(g.lambda(), pump.beta.len() as u64));
            let off = &alpha_len + BigUint::from(pump.beta.len()) * &pump.k;
            out.add_term(alpha_len, q.clone());
            out.add_term(off.clone(), -q);
            out.add_term(off, val_history(g, &p.gamma));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// simple cycle decompositions
// ---------------------------------------------------------------------------

/// One pumped block of a decomposition: a simple cycle, its multiplicity,
/// and the path that follows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScdPart {
    pub cycle: History,
    pub mult: BigUint,
    pub path: History,
}

/// A cycle decomposition `head . c_1^(m_1) p_1 . c_2^(m_2) p_2 ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scd {
    pub head: History,
    pub parts: Vec<ScdPart>,
}

impl Scd {
    pub fn new(head: History, parts: Vec<ScdPart>) -> Result<Scd, Error> {
        let mut at = head.last();
        for p in &parts {
            if !p.cycle.is_cycle() {
                return Err(Error::invalid("decomposition blocks must be nonempty cycles"));
            }
            if p.mult.is_zero() {
                return Err(Error::invalid("decomposition multiplicities must be positive"));
            }
            if p.cycle.first() != at || p.path.first() != at {
                return Err(Error::invalid("decomposition segments do not connect"));
            }
            at = p.path.last();
        }
        Ok(Scd { head, parts })
    }
}

/// Exact value of the path denoted by the decomposition.
pub fn scd_value(g: &Game, d: &Scd) -> Result<DiscountPoly, Error> {
    let mut out = DiscountPoly::constant(val_history(g, &d.head));
    let mut offset = BigUint::from(d.head.len());
    for p in &d.parts {
        let q = val_history(g, &p.cycle)
            / (Rational::one() - pow(g.lambda(), p.cycle.len() as u64));
        let after = &offset + BigUint::from(p.cycle.len()) * &p.mult;
        out.add_term(offset.clone(), q.clone());
        out.add_term(after.clone(), -q);
        out.add_term(after.clone(), val_history(g, &p.path));
        offset = after + BigUint::from(p.path.len());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// cycle replacement and history compression
// ---------------------------------------------------------------------------

/// For `alpha`, `gamma` cycles of equal length around a middle path `beta`,
/// returns the cheaper of `alpha alpha beta` and `beta gamma gamma` (ties
/// prefer the former). Its value never exceeds `Val(alpha beta gamma)`, and
/// endpoints and length are preserved.
pub fn replace_cycle(
    g: &Game,
    alpha: &History,
    beta: &History,
    gamma: &History,
) -> Result<History, Error> {
    if !alpha.is_cycle() || !gamma.is_cycle() {
        return Err(Error::invalid("replace_cycle needs cycles on both sides"));
    }
    if alpha.len() != gamma.len() {
        return Err(Error::invalid("replace_cycle needs cycles of equal length"));
    }
    if alpha.last() != beta.first() || beta.last() != gamma.first() {
        return Err(Error::invalid("replace_cycle segments do not connect"));
    }
    let left = alpha.concat(alpha)?.concat(beta)?;
    let right = beta.concat(gamma)?.concat(gamma)?;
    if val_history(g, &left) <= val_history(g, &right) {
        Ok(left)
    } else {
        Ok(right)
    }
}

/// Working form of a decomposition during compression: vertex sequences and
/// machine-sized multiplicities (bounded by the length of the input).
#[derive(Debug, Clone)]
struct Comp {
    head: Vec<VertexId>,
    parts: Vec<(Vec<VertexId>, usize, Vec<VertexId>)>,
}

impl Comp {
    fn value(&self, g: &Game) -> Rational {
        let lambda = g.lambda();
        let mut acc = val_vertex_seq(g, &self.head);
        let mut offset = self.head.len() - 1;
        for (cycle, mult, path) in &self.parts {
            let clen = cycle.len() - 1;
            let q = val_vertex_seq(g, cycle) / (Rational::one() - pow(lambda, clen as u64));
            let lam_off = pow(lambda, offset as u64);
            let lam_after = pow(lambda, (offset + clen * mult) as u64);
            acc += &lam_off * &q - &lam_after * &q + &lam_after * val_vertex_seq(g, path);
            offset += clen * mult + (path.len() - 1);
        }
        acc
    }

    fn edge_len(&self) -> usize {
        self.head.len() - 1
            + self
                .parts
                .iter()
                .map(|(c, m, p)| (c.len() - 1) * m + (p.len() - 1))
                .sum::<usize>()
    }
}

/// Splits a vertex sequence into simple pieces by repeatedly slicing off the
/// earliest simple cycle. The pieces concatenate back to the input exactly.
fn decompose(h: &[VertexId]) -> Comp {
    let mut segments: Vec<(Vec<VertexId>, Option<Vec<VertexId>>)> = Vec::new();
    let mut rest: &[VertexId] = h;
    loop {
        let mut seen: HashMap<VertexId, usize> = HashMap::new();
        let mut repeat = None;
        for (j, &v) in rest.iter().enumerate() {
            if let Some(&i) = seen.get(&v) {
                repeat = Some((i, j));
                break;
            }
            seen.insert(v, j);
        }
        match repeat {
            None => {
                segments.push((rest.to_vec(), None));
                break;
            }
            Some((i, j)) => {
                segments.push((rest[..=i].to_vec(), Some(rest[i..=j].to_vec())));
                rest = &rest[j..];
            }
        }
    }
    let mut comp = Comp { head: segments[0].0.clone(), parts: Vec::new() };
    let mut pending_cycle = segments[0].1.clone();
    for (path, cycle) in segments.into_iter().skip(1) {
        let c = pending_cycle.take().expect("cycle precedes every later segment");
        match comp.parts.last_mut() {
            Some((lc, lm, lp)) if lp.len() == 1 && *lc == c => {
                *lm += 1;
                *lp = path;
            }
            _ => comp.parts.push((c, 1, path)),
        }
        pending_cycle = cycle;
    }
    debug_assert!(pending_cycle.is_none());
    comp
}

/// Removes part `j`, merging its trailing path into the preceding path and
/// re-slicing one simple cycle out of the merge when it is not simple.
fn dissolve_part(comp: &mut Comp, j: usize) {
    let (_, _, path) = comp.parts.remove(j);
    let prev: &Vec<VertexId> = if j == 0 { &comp.head } else { &comp.parts[j - 1].2 };
    let prev_len = prev.len();
    let mut merged = prev.clone();
    merged.extend_from_slice(&path[1..]);
    // Find the earliest position in the appended half that revisits the
    // first half; both halves are simple, so one slice restores simplicity.
    let first_half: HashMap<VertexId, usize> =
        merged[..prev_len].iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let crossing = merged[prev_len..]
        .iter()
        .enumerate()
        .filter_map(|(off, v)| first_half.get(v).map(|&i| (i, prev_len + off)))
        .min_by_key(|&(_, mb)| mb);
    match crossing {
        None => {
            if j == 0 {
                comp.head = merged;
            } else {
                comp.parts[j - 1].2 = merged;
            }
        }
        Some((ia, mb)) => {
            let prefix = merged[..=ia].to_vec();
            let cycle = merged[ia..=mb].to_vec();
            let suffix = merged[mb..].to_vec();
            if j == 0 {
                comp.head = prefix;
            } else {
                comp.parts[j - 1].2 = prefix;
            }
            comp.parts.insert(j, (cycle, 1, suffix));
        }
    }
}

/// Moves all cycle occurrences of parts `i` and `j` (same cycle length) to
/// one side, whichever yields the smaller value; ties keep the left side.
fn apply_same_length_transfer(g: &Game, comp: &mut Comp, i: usize, j: usize) {
    let mut left = comp.clone();
    left.parts[i].1 += left.parts[j].1;
    dissolve_part(&mut left, j);
    let mut right = comp.clone();
    right.parts[j].1 += right.parts[i].1;
    dissolve_part(&mut right, i);
    *comp = if left.value(g) <= right.value(g) { left } else { right };
}

/// Rebalances two high-multiplicity parts in equal-length blocks so that at
/// most one multiplicity stays above `nv`; the cheaper side wins, ties keep
/// the left side.
fn apply_block_transfer(g: &Game, comp: &mut Comp, i: usize, j: usize, nv: usize) {
    let li = comp.parts[i].0.len() - 1;
    let lj = comp.parts[j].0.len() - 1;
    let (mi, mj) = (comp.parts[i].1, comp.parts[j].1);
    let (bi, ri) = (mi / lj, mi % lj);
    let (bj, rj) = (mj / li, mj % li);
    debug_assert!(bi >= 1 && bj >= 1, "multiplicities above {nv} give whole blocks");
    let blocks = bi + bj;

    let mut left = comp.clone();
    left.parts[i].1 = ri + lj * blocks;
    left.parts[j].1 = rj;
    if rj == 0 {
        dissolve_part(&mut left, j);
    }
    let mut right = comp.clone();
    right.parts[i].1 = ri;
    right.parts[j].1 = rj + li * blocks;
    if ri == 0 {
        dissolve_part(&mut right, i);
    }
    *comp = if left.value(g) <= right.value(g) { left } else { right };
}

/// Compresses a history into `alpha . beta^k . gamma` of the same length and
/// endpoints with `Val(result) <= Val(h)`, where `beta` is a simple cycle
/// and `|alpha| + |beta| + |gamma|` is bounded by a polynomial in the number
/// of game vertices (at most `4|V|^3` edges).
pub fn compress_history(g: &Game, h: &History) -> PumpedPath {
    let nv = g.vertex_count();
    let mut comp = decompose(h.vertices());
    debug_assert_eq!(comp.edge_len(), h.len());
    debug_assert_eq!(comp.value(g), val_history(g, h));

    loop {
        // Two cycles of the same length: merge their occurrences.
        let mut pair = None;
        'outer: for i in 0..comp.parts.len() {
            for j in i + 1..comp.parts.len() {
                if comp.parts[i].0.len() == comp.parts[j].0.len() {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        if let Some((i, j)) = pair {
            apply_same_length_transfer(g, &mut comp, i, j);
            continue;
        }
        // Two multiplicities above |V|: rebalance in whole blocks.
        let big: Vec<usize> = comp
            .parts
            .iter()
            .enumerate()
            .filter(|(_, (_, m, _))| *m > nv)
            .map(|(i, _)| i)
            .collect();
        if big.len() >= 2 {
            apply_block_transfer(g, &mut comp, big[0], big[1], nv);
            continue;
        }
        break;
    }
    debug_assert_eq!(comp.edge_len(), h.len());
    debug_assert!(comp.value(g) <= val_history(g, h));
    debug_assert!(comp.parts.len() <= nv, "distinct cycle lengths bound the part count");

    // Pick the pumped cycle: the one part that can exceed |V| occurrences,
    // or else the longest run; everything else unrolls into alpha and gamma.
    let star = comp
        .parts
        .iter()
        .position(|(_, m, _)| *m > nv)
        .or_else(|| {
            comp.parts
                .iter()
                .enumerate()
                .max_by(|(ia, (ca, ma, _)), (ib, (cb, mb, _))| {
                    let ra = ma * (ca.len() - 1);
                    let rb = mb * (cb.len() - 1);
                    ra.cmp(&rb).then(ib.cmp(ia)) // prefer the earlier part on ties
                })
                .map(|(i, _)| i)
        });

    let unroll_into = |acc: &mut Vec<VertexId>, parts: &[(Vec<VertexId>, usize, Vec<VertexId>)]| {
        for (cycle, mult, path) in parts {
            for _ in 0..*mult {
                acc.extend_from_slice(&cycle[1..]);
            }
            acc.extend_from_slice(&path[1..]);
        }
    };

    match star {
        None => {
            let alpha = History::new(g, comp.head.clone()).expect("head is a path");
            let gamma = History::single(*comp.head.last().unwrap());
            PumpedPath::new(alpha, None, gamma).expect("trivial split connects")
        }
        Some(js) => {
            let mut alpha_verts = comp.head.clone();
            unroll_into(&mut alpha_verts, &comp.parts[..js]);
            let (cycle, mult, path) = &comp.parts[js];
            let mut gamma_verts = path.clone();
            unroll_into(&mut gamma_verts, &comp.parts[js + 1..]);
            let alpha = History::new(g, alpha_verts).expect("prefix is a path");
            let beta = History::new(g, cycle.clone()).expect("cycle is a path");
            let gamma = History::new(g, gamma_verts).expect("suffix is a path");
            let pump = Pump::new(beta, BigUint::from(*mult)).expect("pump is a cycle");
            PumpedPath::new(alpha, Some(pump), gamma).expect("segments connect")
        }
    }
}

// ---------------------------------------------------------------------------
// reachability of step-indexed classes
// ---------------------------------------------------------------------------

/// Square boolean matrix in packed rows.
#[derive(Clone)]
struct BoolMat {
    d: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BoolMat {
    fn empty(d: usize) -> BoolMat {
        let words = d.div_ceil(64);
        BoolMat { d, words, rows: vec![vec![0; words]; d] }
    }

    fn identity(d: usize) -> BoolMat {
        let mut m = BoolMat::empty(d);
        for i in 0..d {
            m.rows[i][i / 64] |= 1 << (i % 64);
        }
        m
    }

    fn set(&mut self, i: usize, j: usize) {
        self.rows[i][j / 64] |= 1 << (j % 64);
    }

    fn mul(&self, other: &BoolMat) -> BoolMat {
        let mut out = BoolMat::empty(self.d);
        for i in 0..self.d {
            for (w, &bits) in self.rows[i].iter().enumerate() {
                let mut bits = bits;
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for t in 0..self.words {
                        out.rows[i][t] |= other.rows[j][t];
                    }
                }
            }
        }
        out
    }

    fn pow(&self, e: &BigUint) -> BoolMat {
        let mut result = BoolMat::identity(self.d);
        let mut base = self.clone();
        let mut e = e.clone();
        while !e.is_zero() {
            if e.bit(0) {
                result = result.mul(&base);
            }
            e >>= 1;
            if !e.is_zero() {
                base = base.mul(&base);
            }
        }
        result
    }
}

fn apply_vec(v: &[u64], m: &BoolMat) -> Vec<u64> {
    let mut out = vec![0u64; m.words];
    for (w, &bits) in v.iter().enumerate() {
        let mut bits = bits;
        while bits != 0 {
            let j = w * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for t in 0..m.words {
                out[t] |= m.rows[j][t];
            }
        }
    }
    out
}

/// Decides whether some history of exactly `n` edges, consistent with `s`,
/// ends at Eve's vertex `v` with switch flag `switched` and continues with
/// the edge to `v2` under the strategy. The step count is a big natural;
/// the walk is evaluated segment-by-segment between threshold values with
/// boolean matrix powers.
pub fn history_exists(
    g: &Game,
    s: &SwitchingStrategy,
    n: &BigUint,
    switched: bool,
    v: VertexId,
    v2: VertexId,
) -> Result<bool, Error> {
    if g.owner(v) != Owner::Eve {
        return Err(Error::invalid(format!(
            "'{}' is not owned by Eve",
            g.name(v)
        )));
    }
    if !g.has_edge(v, v2) {
        return Err(Error::invalid(format!(
            "no edge {} -> {}",
            g.name(v),
            g.name(v2)
        )));
    }
    let expected = if switched { s.sigma2.choice(v) } else { s.sigma1.choice(v) };
    if expected != v2 {
        return Ok(false);
    }

    let flag0 = s.switched_at_start(g);
    if n.is_zero() {
        return Ok(v == g.init() && switched == flag0);
    }

    let d = g.vertex_count() * 2;
    let idx = |u: VertexId, layer: bool| u * 2 + layer as usize;

    // Transition matrix while the trigger set is {w : t(w) <= step} for any
    // step in the segment; the set only changes at threshold values.
    let matrix_for = |step_floor: u64| -> BoolMat {
        let mut m = BoolMat::empty(d);
        for u in g.vertices() {
            for layer in [false, true] {
                let allowed: Vec<VertexId> = match g.owner(u) {
                    Owner::Eve => {
                        vec![if layer { s.sigma2.choice(u) } else { s.sigma1.choice(u) }]
                    }
                    Owner::Adam => g.successors(u).iter().map(|e| e.to).collect(),
                };
                for w in allowed {
                    let next_layer = layer || s.thresholds.triggers(g, w, step_floor);
                    m.set(idx(u, layer), idx(w, next_layer));
                }
            }
        }
        m
    };

    // Segment starts: step 1 plus every threshold value in (1, n].
    let mut starts: Vec<BigUint> = vec![BigUint::one()];
    for t in s.thresholds.finite_values() {
        let t = BigUint::from(t);
        if t > BigUint::one() && t <= *n {
            starts.push(t);
        }
    }
    starts.dedup();

    let mut vec = vec![0u64; d.div_ceil(64)];
    let j0 = idx(g.init(), flag0);
    vec[j0 / 64] |= 1 << (j0 % 64);

    for (i, start) in starts.iter().enumerate() {
        let end = if i + 1 < starts.len() {
            &starts[i + 1] - BigUint::one()
        } else {
            n.clone()
        };
        let len = &end - start + BigUint::one();
        // Every step in [start, end] sees the same trigger set, determined
        // by thresholds <= start; `start` fits u64 because thresholds do.
        let floor = start.to_u64().unwrap_or(u64::MAX);
        let m = matrix_for(floor);
        vec = apply_vec(&vec, &m.pow(&len));
    }

    let j = idx(v, switched);
    Ok(vec[j / 64] & (1 << (j % 64)) != 0)
}
