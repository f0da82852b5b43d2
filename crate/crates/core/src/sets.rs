//! Lazily represented subsets of ℕ = {1, 2, 3, ...}.
//!
//! An [`IntegerSet`] is an immutable expression tree. Single queries
//! ([`IntegerSet::contains`], [`IntegerSet::count_up_to`]) walk the tree;
//! bulk work goes through [`IntegerSet::membership`], which materialises a
//! bitmap of `1..=n` once and lets the estimators scan it without further
//! error handling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::sieve::Sieve;

/// Interval generator of a block set: index `k >= 1` to the half-open
/// interval `[l_k, r_k)`, or `None` once the intervals run out.
pub type IntervalGen = dyn Fn(u64) -> Option<(u64, u64)> + Send + Sync;

type PredicateFn = dyn Fn(u64) -> bool + Send + Sync;

#[derive(Clone)]
enum Node {
    Progression { a: u64, b: u64 },
    Primes(Arc<Sieve>),
    Block(Arc<IntervalGen>),
    Predicate(Arc<PredicateFn>),
    Finite(Arc<[u64]>),
    Union(Vec<IntegerSet>),
    Intersection(Vec<IntegerSet>),
    Complement(IntegerSet),
}

/// Which boolean combination [`IntegerSet::combine`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersection,
    Complement,
}

/// Variant tag of a set, mostly useful for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    ArithmeticProgression,
    Primes,
    Block,
    Predicate,
    Finite,
    Union,
    Intersection,
    Complement,
}

#[derive(Clone)]
pub struct IntegerSet {
    node: Arc<Node>,
    label: Arc<str>,
}

impl fmt::Debug for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerSet({})", self.label)
    }
}

impl fmt::Display for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl IntegerSet {
    fn new(node: Node, label: impl Into<Arc<str>>) -> Self {
        Self {
            node: Arc::new(node),
            label: label.into(),
        }
    }

    /// Elements `a + b, 2a + b, 3a + b, ...`.
    pub fn ap(a: u64, b: u64) -> Result<Self> {
        if a == 0 {
            return Err(invalid("arithmetic progression needs a >= 1, got a = 0"));
        }
        if a.checked_add(b).is_none() {
            return Err(invalid(format!(
                "arithmetic progression a + b overflows (a = {a}, b = {b})"
            )));
        }
        Ok(Self::new(Node::Progression { a, b }, format!("ap:{a},{b}")))
    }

    pub fn naturals() -> Self {
        Self::new(Node::Progression { a: 1, b: 0 }, "nat")
    }

    pub fn evens() -> Self {
        Self::new(Node::Progression { a: 2, b: 0 }, "evens")
    }

    /// 1, 3, 5, ... (note `ap(2, 1)` starts at 3).
    pub fn odds() -> Self {
        Self::evens().complement().relabel("odds")
    }

    pub fn empty() -> Self {
        Self::new(Node::Finite(Arc::from(Vec::new())), "empty")
    }

    /// Primes up to `limit`; queries past the limit are errors.
    pub fn primes(limit: u64) -> Result<Self> {
        let sieve = Sieve::new(limit)?;
        Ok(Self::new(Node::Primes(Arc::new(sieve)), format!("primes:{limit}")))
    }

    /// Union of the intervals produced by `gen`. The intervals must be
    /// non-empty, start at 1 or later and satisfy `r_k <= l_{k+1}`; this is
    /// checked as intervals are visited, so a bad generator fails on the
    /// first query that reaches the offending index.
    pub fn block<F>(name: impl Into<Arc<str>>, gen: F) -> Self
    where
        F: Fn(u64) -> Option<(u64, u64)> + Send + Sync + 'static,
    {
        Self::new(Node::Block(Arc::new(gen)), name)
    }

    /// Block set over an explicit list of intervals.
    pub fn from_intervals(name: impl Into<Arc<str>>, intervals: Vec<(u64, u64)>) -> Self {
        let intervals: Arc<[(u64, u64)]> = intervals.into();
        Self::block(name, move |k| intervals.get((k - 1) as usize).copied())
    }

    /// The intervals `[2^(2k-1), 2^(2k))`, k >= 1: lower asymptotic density
    /// 1/3, upper 2/3, logarithmic density 1/2.
    pub fn pow2_alternating() -> Self {
        Self::block("block:pow2-alt", |k| {
            let lo = 1u64.checked_shl(u32::try_from(2 * k - 1).ok()?)?;
            let hi = lo.checked_mul(2)?;
            Some((lo, hi))
        })
    }

    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elements.into_iter().collect();
        if v.contains(&0) {
            return Err(invalid("finite set elements must be positive (0 is not in ℕ)"));
        }
        v.sort_unstable();
        v.dedup();
        let label = if v.is_empty() {
            "empty".to_string()
        } else {
            let parts: Vec<String> = v.iter().map(u64::to_string).collect();
            format!("finite:{}", parts.join(","))
        };
        Ok(Self::new(Node::Finite(v.into()), label))
    }

    pub fn predicate<F>(name: impl Into<Arc<str>>, f: F) -> Self
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        Self::new(Node::Predicate(Arc::new(f)), name)
    }

    pub fn combine(op: SetOp, operands: Vec<IntegerSet>) -> Result<Self> {
        match op {
            SetOp::Complement => {
                let [only]: [IntegerSet; 1] = operands
                    .try_into()
                    .map_err(|v: Vec<_>| invalid(format!("complement takes exactly one operand, got {}", v.len())))?;
                Ok(only.complement())
            }
            SetOp::Union | SetOp::Intersection => {
                if operands.len() < 2 {
                    return Err(invalid(format!(
                        "{} takes at least two operands, got {}",
                        if op == SetOp::Union { "union" } else { "intersection" },
                        operands.len()
                    )));
                }
                let labels: Vec<&str> = operands.iter().map(|s| &*s.label).collect();
                Ok(if op == SetOp::Union {
                    let label = format!("union({})", labels.join(","));
                    Self::new(Node::Union(operands), label)
                } else {
                    let label = format!("inter({})", labels.join(","));
                    Self::new(Node::Intersection(operands), label)
                })
            }
        }
    }

    pub fn union(self, other: IntegerSet) -> Self {
        Self::combine(SetOp::Union, vec![self, other]).expect("two operands")
    }

    pub fn intersection(self, other: IntegerSet) -> Self {
        Self::combine(SetOp::Intersection, vec![self, other]).expect("two operands")
    }

    pub fn complement(self) -> Self {
        let label = format!("compl({})", self.label);
        Self::new(Node::Complement(self), label)
    }

    /// Same set under a different display label.
    pub fn relabel(self, label: impl Into<Arc<str>>) -> Self {
        Self {
            node: self.node,
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> SetKind {
        match &*self.node {
            Node::Progression { .. } => SetKind::ArithmeticProgression,
            Node::Primes(_) => SetKind::Primes,
            Node::Block(_) => SetKind::Block,
            Node::Predicate(_) => SetKind::Predicate,
            Node::Finite(_) => SetKind::Finite,
            Node::Union(_) => SetKind::Union,
            Node::Intersection(_) => SetKind::Intersection,
            Node::Complement(_) => SetKind::Complement,
        }
    }

    /// `(a, b)` when the set is a bare arithmetic progression.
    pub fn as_progression(&self) -> Option<(u64, u64)> {
        match *self.node {
            Node::Progression { a, b } => Some((a, b)),
            _ => None,
        }
    }

    /// Largest `n` for which queries are guaranteed to succeed
    /// (`u64::MAX` unless the set involves a finite sieve).
    pub fn query_limit(&self) -> u64 {
        match &*self.node {
            Node::Primes(s) => s.limit(),
            Node::Union(ops) | Node::Intersection(ops) => {
                ops.iter().map(IntegerSet::query_limit).min().unwrap_or(u64::MAX)
            }
            Node::Complement(inner) => inner.query_limit(),
            _ => u64::MAX,
        }
    }

    pub fn contains(&self, m: u64) -> Result<bool> {
        if m == 0 {
            return Ok(false);
        }
        match &*self.node {
            Node::Progression { a, b } => Ok(m >= a + b && m % a == b % a),
            Node::Primes(s) => s.is_prime(m),
            Node::Block(gen) => {
                let mut found = false;
                walk_intervals(&**gen, &self.label, m, |l, r| {
                    if l <= m && m < r {
                        found = true;
                    }
                })?;
                Ok(found)
            }
            Node::Predicate(f) => Ok(f(m)),
            Node::Finite(v) => Ok(v.binary_search(&m).is_ok()),
            Node::Union(ops) => {
                let mut any = false;
                for s in ops {
                    any |= s.contains(m)?;
                }
                Ok(any)
            }
            Node::Intersection(ops) => {
                let mut all = true;
                for s in ops {
                    all &= s.contains(m)?;
                }
                Ok(all)
            }
            Node::Complement(inner) => Ok(!inner.contains(m)?),
        }
    }

    /// `|A ∩ [1, n]|`.
    pub fn count_up_to(&self, n: u64) -> Result<u64> {
        match &*self.node {
            Node::Progression { a, b } => Ok(if n >= a + b { (n - b) / a } else { 0 }),
            Node::Primes(s) => s.count_up_to(n),
            Node::Block(gen) => {
                let mut count = 0;
                walk_intervals(&**gen, &self.label, n, |l, r| {
                    count += r.min(n + 1).saturating_sub(l);
                })?;
                Ok(count)
            }
            Node::Finite(v) => Ok(v.partition_point(|&x| x <= n) as u64),
            _ => Ok(self.membership(n)?.count()),
        }
    }

    /// Bitmap of the members of `1..=n`.
    pub fn membership(&self, n: u64) -> Result<Membership> {
        let mut out = Membership::empty(n)?;
        match &*self.node {
            Node::Progression { a, b } => {
                if *a == 1 {
                    out.set_range(b + 1, n + 1);
                } else {
                    let mut m = a + b;
                    while m <= n {
                        out.set(m);
                        m += a;
                    }
                }
            }
            Node::Primes(s) => {
                if n > s.limit() {
                    return Err(Error::OutOfRange {
                        what: format!("`{}`", self.label),
                        requested: n,
                        limit: s.limit(),
                    });
                }
                for p in s.primes().take_while(|&p| p <= n) {
                    out.set(p);
                }
            }
            Node::Block(gen) => {
                walk_intervals(&**gen, &self.label, n, |l, r| out.set_range(l, r.min(n + 1)))?;
            }
            Node::Predicate(f) => {
                for m in 1..=n {
                    if f(m) {
                        out.set(m);
                    }
                }
            }
            Node::Finite(v) => {
                for &m in v.iter().take_while(|&&m| m <= n) {
                    out.set(m);
                }
            }
            Node::Union(ops) => {
                for s in ops {
                    out.or_with(&s.membership(n)?);
                }
            }
            Node::Intersection(ops) => {
                out = ops[0].membership(n)?;
                for s in &ops[1..] {
                    out.and_with(&s.membership(n)?);
                }
            }
            Node::Complement(inner) => {
                out = inner.membership(n)?;
                out.invert();
            }
        }
        Ok(out)
    }

    /// Members of `1..=n` in increasing order.
    pub fn elements(&self, n: u64) -> Result<impl Iterator<Item = u64>> {
        Ok(self.membership(n)?.into_iter())
    }

    /// Unbounded increasing iterator over the members. It stops early at the
    /// first query the set cannot answer (e.g. the end of a prime sieve).
    /// Past the last member of a finite set it searches forever; use
    /// [`IntegerSet::elements`] when a bound is known.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let mut next = 1u64;
        std::iter::from_fn(move || {
            if let Node::Progression { a, b } = *self.node {
                let m = if next <= a + b {
                    a + b
                } else {
                    b + (next - b).div_ceil(a) * a
                };
                next = m.checked_add(1)?;
                return Some(m);
            }
            loop {
                let m = next;
                next = next.checked_add(1)?;
                match self.contains(m) {
                    Ok(true) => return Some(m),
                    Ok(false) => continue,
                    Err(_) => return None,
                }
            }
        })
    }

    /// Parses a set specification such as `ap:3,1`, `primes:1e7`,
    /// `union(evens,ap:3,0)` or `compl(block:pow2-alt)`.
    pub fn parse(spec: &str) -> Result<Self> {
        parse_set(spec.trim()).map_err(|e| match e {
            Error::InvalidParameter(msg) if !msg.contains(&format!("`{}`", spec.trim())) => {
                Error::InvalidParameter(format!("`{}`: {msg}", spec.trim()))
            }
            other => other,
        })
    }
}

impl FromStr for IntegerSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Visits the generator's intervals with `l <= upto`, validating each.
fn walk_intervals(gen: &IntervalGen, label: &str, upto: u64, mut visit: impl FnMut(u64, u64)) -> Result<()> {
    let mut prev_r = 1u64;
    let mut k = 1u64;
    while let Some((l, r)) = gen(k) {
        if l > upto {
            break;
        }
        if l < 1 || l >= r || l < prev_r {
            return Err(invalid(format!(
                "block set `{label}`: interval {k} = [{l}, {r}) is empty, starts below 1, \
                 or overlaps the previous interval (which ended at {prev_r})"
            )));
        }
        visit(l, r);
        prev_r = r;
        k += 1;
    }
    Ok(())
}

/// Integer parser that accepts `1000000`, `1e6` and `2^20`.
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    let bad = || invalid(format!("`{s}` is not a non-negative integer"));
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        return base.checked_pow(exp).ok_or_else(bad);
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(bad())
    }
}

fn parse_set(spec: &str) -> Result<IntegerSet> {
    if let Some(open) = spec.find('(') {
        if !spec.ends_with(')') {
            return Err(invalid(format!("unbalanced parentheses in `{spec}`")));
        }
        let head = spec[..open].trim();
        let operands = split_operands(&spec[open + 1..spec.len() - 1])?
            .into_iter()
            .map(|s| parse_set(&s))
            .collect::<Result<Vec<_>>>()?;
        let op = match head {
            "union" => SetOp::Union,
            "inter" | "intersection" => SetOp::Intersection,
            "compl" | "complement" => SetOp::Complement,
            _ => return Err(invalid(format!("unknown set combinator `{head}` in `{spec}`"))),
        };
        return IntegerSet::combine(op, operands);
    }
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec, None),
    };
    let unknown = || invalid(format!("unknown set specification `{spec}`"));
    match (name, args) {
        ("nat" | "naturals" | "all", None) => Ok(IntegerSet::naturals()),
        ("evens", None) => Ok(IntegerSet::evens()),
        ("odds", None) => Ok(IntegerSet::odds()),
        ("empty", None) => Ok(IntegerSet::empty()),
        ("ap", Some(args)) => {
            let (a, b) = args
                .split_once(',')
                .ok_or_else(|| invalid(format!("`{spec}`: expected ap:a,b")))?;
            IntegerSet::ap(parse_count(a)?, parse_count(b)?)
        }
        ("primes", Some(limit)) => IntegerSet::primes(parse_count(limit)?),
        ("block", Some("pow2-alt")) => Ok(IntegerSet::pow2_alternating()),
        ("block", Some(rest)) if rest.starts_with("random:") => {
            Ok(crate::corpus::random_block(parse_count(&rest["random:".len()..])?))
        }
        ("finite", Some(list)) => IntegerSet::finite(list.split(',').map(parse_count).collect::<Result<Vec<_>>>()?),
        _ => Err(unknown()),
    }
}

/// Splits a comma-separated operand list at depth 0. Pieces that are bare
/// numbers belong to the previous operand (`ap:2,0` contains a comma).
fn split_operands(inner: &str) -> Result<Vec<String>> {
    let mut pieces = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(inner[start..i].trim().to_string());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(invalid(format!("unbalanced parentheses in `{inner}`")));
        }
    }
    if depth != 0 {
        return Err(invalid(format!("unbalanced parentheses in `{inner}`")));
    }
    pieces.push(inner[start..].trim().to_string());
    let mut merged: Vec<String> = Vec::new();
    for p in pieces {
        let numeric = p.chars().next().is_some_and(|c| c.is_ascii_digit());
        match merged.last_mut() {
            Some(last) if numeric => {
                last.push(',');
                last.push_str(&p);
            }
            _ => merged.push(p),
        }
    }
    if merged.iter().any(String::is_empty) {
        return Err(invalid(format!("empty operand in `{inner}`")));
    }
    Ok(merged)
}

/// Membership bitmap of `1..=n`; bit `m` is set iff `m` is a member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    n: u64,
    words: Vec<u64>,
}

impl Membership {
    fn empty(n: u64) -> Result<Self> {
        let words = usize::try_from(n / 64 + 1)
            .ok()
            .filter(|&w| w <= (1usize << 31))
            .ok_or_else(|| Error::OutOfRange {
                what: "membership bitmap".into(),
                requested: n,
                limit: (1u64 << 37) - 1,
            })?;
        Ok(Self {
            n,
            words: vec![0; words],
        })
    }

    /// The bound `n` the bitmap covers.
    pub fn bound(&self) -> u64 {
        self.n
    }

    #[inline]
    fn set(&mut self, m: u64) {
        self.words[(m / 64) as usize] |= 1 << (m % 64);
    }

    /// Sets `lo..hi`.
    fn set_range(&mut self, lo: u64, hi: u64) {
        if lo >= hi {
            return;
        }
        let (wl, wh) = ((lo / 64) as usize, ((hi - 1) / 64) as usize);
        let lo_mask = u64::MAX << (lo % 64);
        let hi_mask = u64::MAX >> (63 - (hi - 1) % 64);
        if wl == wh {
            self.words[wl] |= lo_mask & hi_mask;
            return;
        }
        self.words[wl] |= lo_mask;
        for w in &mut self.words[wl + 1..wh] {
            *w = u64::MAX;
        }
        self.words[wh] |= hi_mask;
    }

    fn or_with(&mut self, other: &Membership) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn and_with(&mut self, other: &Membership) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    fn invert(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.words[0] &= !1;
        let last = self.words.len() - 1;
        let top = self.n % 64;
        if top != 63 {
            self.words[last] &= (1u64 << (top + 1)) - 1;
        }
    }

    #[inline]
    pub fn contains(&self, m: u64) -> bool {
        m <= self.n && self.words[(m / 64) as usize] >> (m % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Members `<= m` (clamped to the bitmap bound).
    pub fn count_up_to(&self, m: u64) -> u64 {
        let m = m.min(self.n);
        let w = (m / 64) as usize;
        let full: u64 = self.words[..w].iter().map(|x| u64::from(x.count_ones())).sum();
        let mask = if m % 64 == 63 {
            u64::MAX
        } else {
            (1u64 << (m % 64 + 1)) - 1
        };
        full + u64::from((self.words[w] & mask).count_ones())
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| bits_of(w, word))
    }

    /// Members of `lo..=hi` (clamped to the bound) in increasing order.
    pub fn iter_range(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.n);
        let (wl, wh) = ((lo / 64) as usize, (hi / 64) as usize);
        let words = if lo > hi {
            &self.words[..0]
        } else {
            &self.words[wl..=wh]
        };
        words
            .iter()
            .enumerate()
            .flat_map(move |(i, &word)| bits_of(wl + i, word))
            .filter(move |&m| m >= lo && m <= hi)
    }
}

fn bits_of(w: usize, word: u64) -> impl Iterator<Item = u64> {
    let mut bits = word;
    std::iter::from_fn(move || {
        if bits == 0 {
            return None;
        }
        let b = u64::from(bits.trailing_zeros());
        bits &= bits - 1;
        Some(w as u64 * 64 + b)
    })
}

impl IntoIterator for Membership {
    type Item = u64;
    type IntoIter = Box<dyn Iterator<Item = u64>>;

    fn into_iter(self) -> Self::IntoIter {
        Box::new(
            self.words
                .into_iter()
                .enumerate()
                .flat_map(|(w, word)| bits_of(w, word)),
        )
    }
}
