//! Forward chaining over the rule catalog.
//!
//! A [`Session`] fixes a finite universe of sheaf expressions (everything
//! mentioned by the document, closed under sub-tensors and summand
//! replacement), instantiates every rule over it once, and saturates in
//! rounds. A conclusion first derived in round `k` has a certificate of
//! height `k` and no lower one, so certificates are minimal and the result
//! does not depend on anything but the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bwb::{line_sum_cohomology, schur_split_degrees};
use crate::dsl::{Assumed, Context, Document, Expr, ExprKind, Fact, Flag, QueryKind, Validation};
use crate::partitions::Partition;

pub const DEFAULT_MAX_DEPTH: usize = 12;
const MAX_UNIVERSE: usize = 20_000;
const MAX_SPLIT_FACTORS: usize = 8;

/// Rule ids with their anchors, in the order rules are tried.
pub const RULES: &[(&str, &str)] = &[
    (
        "BASELOC",
        "Corollary on base loci: \"dimension of the ``base locus''\"",
    ),
    (
        "BIG-QUOT",
        "Lemma: \"A locally free quotient of a big vector bundle is big\"",
    ),
    (
        "BIG-SUM",
        "Lemma: \"The direct sum of two big vector bundles\"",
    ),
    (
        "BIG-SW",
        "Lemma: \"A Schur-Weyl power of a big vector bundle is big\"",
    ),
    (
        "BIG-TENSOR",
        "Lemma: \"The tensor product of two big vector bundles is big\"",
    ),
    (
        "CLOSURE",
        "Section 2: \"stable under extensions, direct summands, and tensor products\"",
    ),
    ("CONNECT", "Corollary: \"Z is connected provided that\""),
    (
        "CORVAN",
        "Corollary cor:van: \"provided that at least one of the\"",
    ),
    ("DECL", "declared hypothesis"),
    (
        "EX1",
        "Example 1: \"is geometrically acyclic, provided that\"",
    ),
    ("EX2", "Example 2: \"rounded up to the nearest\""),
    ("EX3", "Lemma ex3: \"nef and big line bundle on X\""),
    ("GA1", "Theorem 1 (GA1): \"for any ample line bundle\""),
    (
        "GA2",
        "Theorem 1 (GA2): \"is an exact sequence of coherent\"",
    ),
    ("GA3", "Theorem 1 (GA3): \"a direct summand of a sheaf\""),
    (
        "GA4",
        "Theorem 1 (GA4): \"is an arbitrary morphism of projective varieties\"",
    ),
    (
        "GA5",
        "Theorem 1 (GA5): \"is a morphism of projective varieties; in particular\"",
    ),
    (
        "HDI",
        "Lemma highDirIm: \"at worst rational singularities\"",
    ),
    ("KAMPLE", "Lemma kample: \"for i > dim Y - dim X\""),
    ("KOSZUL", "Lemma: \"scheme of zeros of a regular section\""),
    (
        "NEF-QUOT",
        "Section 2: \"locally free quotients of nef vector bundles\"",
    ),
    (
        "NEF-SUM",
        "Section 2: \"direct sums and tensor products of nef bundles are nef\"",
    ),
    (
        "NEF-TENSOR",
        "Section 2: \"direct sums and tensor products of nef bundles are nef\"",
    ),
    (
        "NEFBIGLINE",
        "Example: \"nef and big line bundle is geometrically positive\"",
    ),
    (
        "NEFLINE",
        "Example: \"A nef line bundle L is geometrically semipositive\"",
    ),
    (
        "POS-DEF",
        "Section 2: \"is a surjective map from a smooth projective variety\"",
    ),
    (
        "POS-SEMI",
        "Section 2: \"geometrically positive provided that it is geometrically semipositive\"",
    ),
    (
        "POSCOR",
        "Corollary: \"geometrically positive if E is nef and big\"",
    ),
    (
        "QLAMBDA",
        "Corollary: \"multiplicative under etale covers\"",
    ),
    (
        "RELDUAL",
        "Example: \"is a geometrically semipositive vector bundle\"",
    ),
    (
        "SEMI-DEF",
        "Section 2: \"geometrically semipositive provided that\"",
    ),
    (
        "SEMI-TRIV",
        "Section 2: \"is geometrically acyclic whenever\", with E the structure sheaf",
    ),
    (
        "SPLIT",
        "Lemma split: \"is a generically finite map of smooth projective varieties\"",
    ),
    ("SS-C1", "Section 3: \"strongly semistable if c_1(E)=0\""),
    (
        "SS-COR",
        "Corollary sstable: \"strongly semistable vector bundle\"",
    ),
    (
        "SS-DEF",
        "Section 3: \"strongly semistable if and only if\"",
    ),
    (
        "SS-TWIST",
        "Section 3: \"is strongly semistable for any line bundle\"",
    ),
    ("SW-SEMI", "Lemma: \"direct summand of a tensor power\""),
    (
        "THM2a",
        "Theorem 2(1): \"If E is nef, then\" ... \"is geometrically semipositive\"",
    ),
    ("THM2b", "Theorem 2(2): \"is geometrically positive\""),
    (
        "UNIF",
        "Corollary: \"A uniformly nef vector bundle is geometrically semipositive\"",
    ),
];

pub fn anchor(rule: &str) -> &'static str {
    RULES
        .iter()
        .find(|(id, _)| *id == rule)
        .map_or("", |(_, a)| a)
}

/// SHA-256 of the rule catalog, one `id<TAB>anchor` line per rule.
pub fn rule_catalog_hash() -> String {
    let mut h = Sha256::new();
    for (id, a) in RULES {
        h.update(format!("{id}\t{a}\n"));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    GA,
    GeomSemiPos,
    GeomPos,
    Nef,
    Big,
    StronglySemistable,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::GA => "GA",
            Property::GeomSemiPos => "GeomSemiPos",
            Property::GeomPos => "GeomPos",
            Property::Nef => "Nef",
            Property::Big => "Big",
            Property::StronglySemistable => "StronglySemistable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Judgment {
    pub subject: Expr,
    pub property: Property,
}

impl Judgment {
    pub fn new(subject: &Expr, property: Property) -> Self {
        Judgment {
            subject: canon(subject),
            property,
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.property, self.subject)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClaimKind {
    SheafVanishing,
    CohomologyVanishing,
    RestrictionIso,
    RestrictionInj,
    Connected,
    Invariance,
}

impl ClaimKind {
    pub fn name(self) -> &'static str {
        match self {
            ClaimKind::SheafVanishing => "sheaf_vanishing",
            ClaimKind::CohomologyVanishing => "cohomology_vanishing",
            ClaimKind::RestrictionIso => "restriction_iso",
            ClaimKind::RestrictionInj => "restriction_inj",
            ClaimKind::Connected => "connected",
            ClaimKind::Invariance => "invariance",
        }
    }
}

/// An integer predicate on the cohomological degree `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Range {
    Gt(i64),
    Lt(i64),
    Eq(i64),
    All,
}

impl Range {
    pub fn contains(self, i: i64) -> bool {
        match self {
            Range::Gt(b) => i > b,
            Range::Lt(b) => i < b,
            Range::Eq(b) => i == b,
            Range::All => true,
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Gt(b) => write!(f, "i>{b}"),
            Range::Lt(b) => write!(f, "i<{b}"),
            Range::Eq(b) => write!(f, "i={b}"),
            Range::All => f.write_str("all"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VanishingClaim {
    pub kind: ClaimKind,
    pub subject: Expr,
    /// Where cohomology is taken.
    pub space: String,
    /// The `g` of `R^i g_*`.
    pub morphism: Option<String>,
    /// The zero scheme of restriction and connectedness claims.
    pub zero: Option<String>,
    pub range: Range,
}

impl VanishingClaim {
    fn new(kind: ClaimKind, subject: &Expr, space: &str, range: Range) -> Self {
        VanishingClaim {
            kind,
            subject: canon(subject),
            space: space.into(),
            morphism: None,
            zero: None,
            range,
        }
    }

    pub fn statement(&self) -> String {
        let s = &self.subject;
        let x = &self.space;
        let z = self.zero.as_deref().unwrap_or("?");
        match self.kind {
            ClaimKind::SheafVanishing => {
                format!("R^i {}_*({s}) = 0", self.morphism.as_deref().unwrap_or("?"))
            }
            ClaimKind::CohomologyVanishing => format!("H^i({x}, {s}) = 0"),
            ClaimKind::RestrictionIso => {
                format!("H^i({x}, {s}) -> H^i({z}, {s}|{z}) is an isomorphism")
            }
            ClaimKind::RestrictionInj => format!("H^i({x}, {s}) -> H^i({z}, {s}|{z}) is injective"),
            ClaimKind::Connected => format!("{z} is connected"),
            ClaimKind::Invariance => {
                format!("dim H^0({x}, {s}) is multiplicative under etale covers and deformation invariant")
            }
        }
    }
}

impl fmt::Display for VanishingClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} for {}", self.statement(), self.range)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conclusion {
    Holds(Judgment),
    Summand { part: Expr, whole: Expr },
    Claim(VanishingClaim),
}

impl Conclusion {
    fn holds(subject: &Expr, property: Property) -> Self {
        Conclusion::Holds(Judgment::new(subject, property))
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Holds(j) => j.fmt(f),
            Conclusion::Summand { part, whole } => write!(f, "Summand({part}, {whole})"),
            Conclusion::Claim(c) => c.fmt(f),
        }
    }
}

/// Normal form used for every subject: `rpush(0, …)` is `push`, `S^(1)` is
/// the identity, structure sheaves drop out of tensor products, and `dual`
/// is an involution fixing structure sheaves.
pub fn canon(e: &Expr) -> Expr {
    use ExprKind::*;
    let b = |x: &Expr| Box::new(canon(x));
    let kind = match &e.kind {
        RPush(0, f, x) | Push(f, x) => Push(f.clone(), b(x)),
        RPush(i, f, x) => RPush(*i, f.clone(), b(x)),
        Pull(f, x) => Pull(f.clone(), b(x)),
        Schur(l, x) if *l == Partition::row(1) => return canon(x),
        Schur(l, x) => Schur(l.clone(), b(x)),
        SchurPlus(l, x) => SchurPlus(l.clone(), b(x)),
        Det(x) => {
            let c = canon(x);
            if matches!(c.kind, Structure(_)) {
                return c;
            }
            Det(Box::new(c))
        }
        Dual(x) => {
            let c = canon(x);
            match c.kind {
                Structure(_) => return c,
                Dual(inner) => return *inner,
                kind => Dual(Box::new(Expr::new(kind))),
            }
        }
        Tensor(fs) => return tensor_of(fs.iter().map(canon).collect()),
        other => other.clone(),
    };
    Expr::new(kind)
}

fn tensor_of(factors: Vec<Expr>) -> Expr {
    let t = Expr::tensor(factors);
    if let ExprKind::Tensor(fs) = &t.kind {
        let rest: Vec<Expr> = fs
            .iter()
            .filter(|f| !matches!(f.kind, ExprKind::Structure(_)))
            .cloned()
            .collect();
        return match rest.len() {
            0 => fs[0].clone(),
            _ => Expr::tensor(rest),
        };
    }
    Expr::new(t.kind)
}

/// `whole` with the factors of `part` removed, as a multiset.
fn remove_factors(whole: &[Expr], part: &[Expr]) -> Option<Vec<Expr>> {
    let mut rest = whole.to_vec();
    for p in part {
        let i = rest.iter().position(|x| x == p)?;
        rest.remove(i);
    }
    Some(rest)
}

/// Splits of the factor list into two nonempty sub-tensors.
fn splits(factors: &[Expr]) -> Vec<(Expr, Expr)> {
    let n = factors.len();
    if !(2..=MAX_SPLIT_FACTORS).contains(&n) {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    for mask in 1..(1u32 << n) - 1 {
        let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
        let pick = |ix: Vec<usize>| tensor_of(ix.into_iter().map(|i| factors[i].clone()).collect());
        out.insert((pick(a), pick(b)));
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Premise {
    /// A judgment, summand relation or claim that must be derived first.
    Need(Conclusion),
    /// A declaration or side condition that holds, cited as text.
    Fact(String),
    /// A declaration or side condition that fails.
    Missing(String),
}

#[derive(Clone, Debug)]
struct Instance {
    rule: &'static str,
    conclusion: Conclusion,
    premises: Vec<Premise>,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub max_depth: usize,
    /// Require `λ_e − length(λ') ≥ 1` for `Pos(e)` membership.
    pub pos_strict: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_depth: DEFAULT_MAX_DEPTH,
            pos_strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub conclusion: Conclusion,
    pub rule: &'static str,
    pub children: Vec<Certificate>,
    pub leaves: Vec<String>,
}

impl Certificate {
    pub fn height(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Certificate::height)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "conclusion": self.conclusion.to_string(),
            "rule": self.rule,
            "anchor": anchor(self.rule),
            "children": self.children.iter().map(Certificate::to_json).collect::<Vec<_>>(),
            "leaves": self.leaves,
        })
    }
}

pub fn claim_json(c: &VanishingClaim, rule: &str) -> Value {
    json!({
        "kind": c.kind.name(),
        "subject": c.statement(),
        "range": c.range.to_string(),
        "rule": rule,
    })
}

/// Indented depth-first rendering, one line per node plus one for its leaves.
pub fn explain(cert: &Certificate) -> String {
    fn go(c: &Certificate, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        out.push_str(&format!(
            "{pad}{}  [{}: {}]\n",
            c.conclusion,
            c.rule,
            anchor(c.rule)
        ));
        if !c.leaves.is_empty() {
            out.push_str(&format!("{pad}  given: {}\n", c.leaves.join("; ")));
        }
        for ch in &c.children {
            go(ch, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(cert, 0, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Derived(Certificate),
    /// Derivable, but only with a certificate taller than the bound.
    DepthBound {
        needed: usize,
        bound: usize,
    },
    /// Not derivable from the declarations. Says nothing about truth.
    Unknown {
        frontier: Vec<String>,
    },
}

impl Outcome {
    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Derived(_) => "derived",
            Outcome::DepthBound { .. } => "depth_bound",
            Outcome::Unknown { .. } => "unknown",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Derived(_) => 0,
            Outcome::Unknown { .. } => 10,
            Outcome::DepthBound { .. } => 11,
        }
    }
}

/// Fixed text for an underivable goal, naming the failed premises.
pub fn explain_unknown(goal: &str, frontier: &[String]) -> String {
    let mut out = format!("Unknown: {goal} is not derivable from the declarations.\n");
    if frontier.is_empty() {
        out.push_str("No rule concludes it.\n");
    } else {
        out.push_str("Deepest failed premises:\n");
        for f in frontier {
            out.push_str(&format!("  {f}\n"));
        }
    }
    out
}

struct CanonPush {
    morphism: Option<String>,
    source: String,
    target: String,
    degree: usize,
}

pub struct Session<'a> {
    val: &'a Validation,
    ctx: &'a Context,
    opts: Options,
    universe: BTreeSet<Expr>,
    instances: Vec<Instance>,
    /// Conclusion → (round, index of the instance that proved it).
    derived: BTreeMap<Conclusion, (usize, usize)>,
    rounds: usize,
}

impl<'a> Session<'a> {
    /// Builds the universe from the document and saturates.
    pub fn new(doc: &Document, val: &'a Validation, opts: Options) -> Self {
        let mut s = Session {
            val,
            ctx: &val.context,
            opts,
            universe: BTreeSet::new(),
            instances: Vec::new(),
            derived: BTreeMap::new(),
            rounds: 0,
        };
        s.build_universe(doc);
        s.instantiate();
        s.saturate();
        s
    }

    pub fn universe(&self) -> &BTreeSet<Expr> {
        &self.universe
    }

    /// Number of rounds until nothing new was derived.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn derived(&self) -> impl Iterator<Item = (&Conclusion, usize)> {
        self.derived.iter().map(|(c, (r, _))| (c, *r))
    }

    fn build_universe(&mut self, doc: &Document) {
        let ctx = self.ctx;
        let mut seeds: Vec<Expr> = Vec::new();
        for n in ctx.varieties.keys() {
            seeds.push(Expr::omega(n));
            seeds.push(Expr::structure(n));
        }
        seeds.extend(ctx.line_bundles.keys().map(|n| Expr::line(n)));
        seeds.extend(ctx.bundles.keys().map(|n| Expr::bundle(n)));
        for f in &ctx.facts {
            seeds.extend(f.fact.expressions().into_iter().cloned());
        }
        seeds.extend(ctx.assumptions.iter().map(|a| a.subject.clone()));
        for q in &doc.queries {
            seeds.push(q.subject.clone());
            if q.kind == QueryKind::KoszulRestriction {
                seeds.push(Expr::dual(q.subject.clone()));
            }
        }
        for (_, part, whole) in self.summand_pairs() {
            seeds.push(part);
            seeds.push(whole);
        }
        let mut todo: Vec<Expr> = seeds.iter().map(canon).collect();
        while let Some(e) = todo.pop() {
            if self.universe.len() >= MAX_UNIVERSE || !self.universe.insert(e.clone()) {
                continue;
            }
            for c in e.children() {
                todo.push(canon(c));
            }
            let fs = e.factors().to_vec();
            for (a, b) in splits(&fs) {
                todo.push(a);
                todo.push(b);
            }
            for (_, part, whole) in self.summand_pairs() {
                if let Some(rest) = remove_factors(&fs, part.factors()) {
                    let mut w = rest;
                    w.push(whole.clone());
                    todo.push(tensor_of(w));
                }
            }
        }
    }

    /// Candidate summand relations: declared ones and those SPLIT may give.
    fn summand_pairs(&self) -> Vec<(&'static str, Expr, Expr)> {
        let mut out = Vec::new();
        for f in &self.ctx.facts {
            match &f.fact {
                Fact::Summand { part, whole } => out.push(("DECL", canon(part), canon(whole))),
                Fact::Sum { total, parts } => {
                    for p in parts {
                        out.push(("DECL", canon(p), canon(total)));
                    }
                }
                _ => {}
            }
        }
        for (n, m) in &self.ctx.morphisms {
            out.push((
                "SPLIT",
                Expr::omega(&m.target),
                Expr::push(n, Expr::omega(&m.source)),
            ));
        }
        out
    }

    fn flag(&self, name: &str, f: Flag) -> Premise {
        let text = format!("{name} {}", f.name());
        if self.ctx.has_flag(name, f) {
            Premise::Fact(format!("{text} ({})", self.val.origin(name, f)))
        } else {
            Premise::Missing(text)
        }
    }

    fn check(ok: bool, text: String) -> Premise {
        if ok {
            Premise::Fact(text)
        } else {
            Premise::Missing(text)
        }
    }

    fn need(e: &Expr, p: Property) -> Premise {
        Premise::Need(Conclusion::holds(e, p))
    }

    fn canonical_push(&self, e: &Expr) -> Option<CanonPush> {
        match &e.kind {
            ExprKind::Omega(x) => Some(CanonPush {
                morphism: None,
                source: x.clone(),
                target: x.clone(),
                degree: 0,
            }),
            ExprKind::Push(f, y) | ExprKind::RPush(_, f, y) => {
                let m = self.ctx.morphisms.get(f)?;
                if !matches!(&y.kind, ExprKind::Omega(s) if *s == m.source) {
                    return None;
                }
                let degree = match &e.kind {
                    ExprKind::RPush(i, ..) => *i,
                    _ => 0,
                };
                Some(CanonPush {
                    morphism: Some(f.clone()),
                    source: m.source.clone(),
                    target: m.target.clone(),
                    degree,
                })
            }
            _ => None,
        }
    }

    fn morphism_premises(&self, p: &CanonPush, surjective: bool) -> Vec<Premise> {
        match &p.morphism {
            None => vec![Premise::Fact(format!("identity of {}", p.source))],
            Some(f) => {
                let mut v = vec![Premise::Fact(format!("{f}: {} -> {}", p.source, p.target))];
                if surjective {
                    v.push(self.flag(f, Flag::Surjective));
                }
                v
            }
        }
    }

    fn rank(&self, e: &Expr) -> Option<usize> {
        if !self.ctx.is_locally_free(e) {
            return None;
        }
        self.ctx.rank(e).and_then(|r| usize::try_from(r).ok())
    }

    fn is_line(&self, e: &Expr) -> bool {
        self.rank(e) == Some(1)
    }

    fn pos(&self, l: &Partition, r: usize) -> Premise {
        let ok = match l.pos_excess(r) {
            Some(n) if self.opts.pos_strict => n >= 1,
            Some(_) => !l.is_zero(),
            None => false,
        };
        let strict = if self.opts.pos_strict {
            " (strict)"
        } else {
            ""
        };
        Self::check(ok, format!("({l}) in Pos({r}){strict}"))
    }

    /// A factor read as `S^λ(E)`; a bare locally free factor is `S^(1)`.
    fn as_schur(&self, e: &Expr) -> Option<(Partition, Expr, usize)> {
        let (l, base) = match &e.kind {
            ExprKind::Schur(l, x) => (l.clone(), (**x).clone()),
            _ => (Partition::row(1), e.clone()),
        };
        let r = self.rank(&base)?;
        Some((l, base, r))
    }

    fn ambient(&self, e: &Expr) -> Option<String> {
        self.ctx.ambient(e).ok()
    }

    fn push(&mut self, rule: &'static str, conclusion: Conclusion, premises: Vec<Premise>) {
        self.instances.push(Instance {
            rule,
            conclusion,
            premises,
        });
    }

    fn instantiate(&mut self) {
        self.declarations();
        let universe: Vec<Expr> = self.universe.iter().cloned().collect();
        for t in &universe {
            self.ga_rules(t);
            self.positivity_rules(t);
            self.nef_big_rules(t);
            self.semistability_rules(t, &universe);
            self.claim_rules(t);
        }
        self.fact_rules();
        self.instances.sort_by(|a, b| {
            a.rule
                .cmp(b.rule)
                .then_with(|| a.conclusion.cmp(&b.conclusion))
        });
    }

    fn declarations(&mut self) {
        let ctx = self.ctx;
        for (n, l) in &ctx.line_bundles {
            for (f, p) in [(Flag::Nef, Property::Nef), (Flag::Big, Property::Big)] {
                if l.flags.contains(&f) {
                    let prem = self.flag(n, f);
                    self.push("DECL", Conclusion::holds(&Expr::line(n), p), vec![prem]);
                }
            }
        }
        for (n, b) in &ctx.bundles {
            for (f, p) in [(Flag::Nef, Property::Nef), (Flag::Big, Property::Big)] {
                if b.flags.contains(&f) {
                    let prem = self.flag(n, f);
                    self.push("DECL", Conclusion::holds(&Expr::bundle(n), p), vec![prem]);
                }
            }
        }
        for a in &ctx.assumptions {
            let p = match a.property {
                Assumed::Nef => Property::Nef,
                Assumed::Big => Property::Big,
            };
            self.push(
                "DECL",
                Conclusion::holds(&a.subject, p),
                vec![Premise::Fact(a.to_string())],
            );
        }
        for f in &ctx.facts {
            match &f.fact {
                Fact::Summand { part, whole } => self.push(
                    "DECL",
                    Conclusion::Summand {
                        part: canon(part),
                        whole: canon(whole),
                    },
                    vec![Premise::Fact(f.fact.to_string())],
                ),
                Fact::Sum { total, parts } => {
                    for p in parts {
                        self.push(
                            "DECL",
                            Conclusion::Summand {
                                part: canon(p),
                                whole: canon(total),
                            },
                            vec![Premise::Fact(f.fact.to_string())],
                        );
                    }
                }
                _ => {}
            }
        }
    }

    /// Rules whose premises come from facts rather than a target shape.
    fn fact_rules(&mut self) {
        let ctx = self.ctx;
        for (n, m) in &ctx.morphisms {
            let premises = vec![
                self.flag(n, Flag::GenericallyFinite),
                self.flag(&m.source, Flag::Smooth),
                self.flag(&m.source, Flag::Projective),
                self.flag(&m.target, Flag::Smooth),
                self.flag(&m.target, Flag::Projective),
            ];
            let c = Conclusion::Summand {
                part: Expr::omega(&m.target),
                whole: Expr::push(n, Expr::omega(&m.source)),
            };
            self.push("SPLIT", c, premises);
        }
        for f in &ctx.facts {
            let cite = Premise::Fact(f.fact.to_string());
            match &f.fact {
                Fact::Extension {
                    middle,
                    quotient,
                    sub,
                } => {
                    for (rule, p) in [
                        ("GA2", Property::GA),
                        ("CLOSURE", Property::GeomSemiPos),
                        ("CLOSURE", Property::GeomPos),
                    ] {
                        let premises =
                            vec![Self::need(sub, p), Self::need(quotient, p), cite.clone()];
                        self.push(rule, Conclusion::holds(middle, p), premises);
                    }
                }
                Fact::Sum { total, parts } => {
                    for (rule, p) in [
                        ("GA2", Property::GA),
                        ("CLOSURE", Property::GeomSemiPos),
                        ("CLOSURE", Property::GeomPos),
                        ("NEF-SUM", Property::Nef),
                        ("BIG-SUM", Property::Big),
                    ] {
                        let mut premises: Vec<Premise> =
                            parts.iter().map(|x| Self::need(x, p)).collect();
                        premises.push(cite.clone());
                        self.push(rule, Conclusion::holds(total, p), premises);
                    }
                }
                Fact::Quotient { quotient, of } => {
                    for (rule, p) in [("NEF-QUOT", Property::Nef), ("BIG-QUOT", Property::Big)] {
                        self.push(
                            rule,
                            Conclusion::holds(quotient, p),
                            vec![Self::need(of, p), cite.clone()],
                        );
                    }
                }
                Fact::Zeros { zero, bundle } => self.zeros_rules(zero, bundle, &cite),
                _ => {}
            }
        }
    }

    fn zeros_rules(&mut self, zero: &str, bundle: &Expr, cite: &Premise) {
        let Some(x) = self.ambient(bundle) else {
            return;
        };
        let (Some(d), Some(r)) = (self.ctx.dim(&x), self.rank(bundle)) else {
            return;
        };
        let top = d as i64 - r as i64;
        let mut fs: Vec<Expr> = self
            .universe
            .iter()
            .filter(|f| {
                self.ctx.is_locally_free(f)
                    && self.ambient(f).as_deref() == Some(x.as_str())
                    && self.universe.contains(&canon(&Expr::dual((*f).clone())))
            })
            .cloned()
            .collect();
        fs.push(Expr::structure(&x));
        fs.sort();
        fs.dedup();
        for f in fs {
            let dual = canon(&Expr::dual(f.clone()));
            for (kind, range) in [
                (ClaimKind::RestrictionIso, Range::Lt(top)),
                (ClaimKind::RestrictionInj, Range::Eq(top)),
            ] {
                let mut c = VanishingClaim::new(kind, &f, &x, range);
                c.zero = Some(zero.into());
                let premises = vec![
                    Self::need(bundle, Property::GeomPos),
                    Self::need(&dual, Property::GeomSemiPos),
                    cite.clone(),
                ];
                self.push("KOSZUL", Conclusion::Claim(c), premises);
            }
        }
        let mut c = VanishingClaim::new(
            ClaimKind::Connected,
            &Expr::structure(zero),
            zero,
            Range::All,
        );
        c.zero = Some(zero.into());
        let premises = vec![
            Self::need(bundle, Property::GeomPos),
            cite.clone(),
            self.flag(&x, Flag::Irreducible),
            Self::check(r < d, format!("rank {r} < dim {x} = {d}")),
        ];
        self.push("CONNECT", Conclusion::Claim(c), premises);
    }

    fn ga_rules(&mut self, t: &Expr) {
        use ExprKind::*;
        let ctx = self.ctx;
        let fs = t.factors().to_vec();
        let ga = |e: &Expr| Conclusion::holds(e, Property::GA);

        // GA1, EX3, POS-DEF, HDI: a canonical pushforward tensored with something.
        for (i, f) in fs.iter().enumerate() {
            let Some(p) = self.canonical_push(f) else {
                continue;
            };
            let mut rest = fs.clone();
            rest.remove(i);
            if rest.is_empty() {
                continue;
            }
            let rest = tensor_of(rest);
            if p.degree == 0 {
                if let Line(l) = &rest.kind {
                    let mut prem = self.morphism_premises(&p, false);
                    prem.push(self.flag(&p.source, Flag::Smooth));
                    prem.push(self.flag(&p.source, Flag::Projective));
                    prem.push(self.flag(l, Flag::Ample));
                    self.push("GA1", ga(t), prem);
                }
                if self.is_line(&rest) {
                    let mut prem = self.morphism_premises(&p, true);
                    for v in [&p.source, &p.target] {
                        prem.push(self.flag(v, Flag::Smooth));
                        prem.push(self.flag(v, Flag::Projective));
                    }
                    prem.push(Self::need(&rest, Property::Nef));
                    prem.push(Self::need(&rest, Property::Big));
                    self.push("EX3", ga(t), prem);
                }
                if ctx.is_locally_free(&rest) {
                    let mut prem = self.morphism_premises(&p, true);
                    prem.push(self.flag(&p.source, Flag::Smooth));
                    prem.push(self.flag(&p.source, Flag::Projective));
                    prem.push(Self::need(&rest, Property::GeomPos));
                    self.push("POS-DEF", ga(t), prem);
                }
            }
            if ctx.is_locally_free(&rest) {
                let mut prem = self.morphism_premises(&p, false);
                prem.push(self.flag(&p.source, Flag::RationalSingularities));
                prem.push(self.flag(&p.source, Flag::Projective));
                prem.push(Self::need(&rest, Property::GeomPos));
                self.push("HDI", ga(t), prem);
            }
        }

        // EX1, EX2: omega(X) * twist_ceil(L, D).
        if let [a, b] = fs.as_slice() {
            if let (Omega(x), TwistCeil(l, d)) = (&a.kind, &b.kind) {
                let div = &ctx.divisors[d];
                let rounded: Vec<String> = div
                    .ceiling()
                    .iter()
                    .map(|(c, k)| format!("{k}*{c}"))
                    .collect();
                let ceil = Premise::Fact(format!("ceil({d}) = {}", rounded.join(" + ")));
                let base = vec![self.flag(x, Flag::Smooth), self.flag(x, Flag::Projective)];
                let mut p1 = base.clone();
                p1.push(self.flag(d, Flag::Reduced));
                p1.push(self.flag(d, Flag::NormalCrossing));
                p1.push(Self::check(
                    div.is_integral(),
                    format!("{d} has integral coefficients"),
                ));
                p1.push(self.flag(l, Flag::Ample));
                self.push("EX1", ga(t), p1);
                let mut p2 = base;
                p2.push(self.flag(d, Flag::NormalCrossing));
                let declared = ctx.facts.iter().any(|f| {
                    matches!(&f.fact, Fact::NefBigTwist { line, divisor } if line == l && divisor == d)
                });
                p2.push(Self::check(
                    declared,
                    format!("fact nef_big_twist {l} by {d}"),
                ));
                p2.push(ceil);
                self.push("EX2", ga(t), p2);
            }
        }

        // GA3 and CLOSURE through summands, inside a tensor context.
        for (_, part, whole) in self.summand_pairs() {
            let Some(rest) = remove_factors(&fs, part.factors()) else {
                continue;
            };
            let mut w = rest;
            w.push(whole.clone());
            let w = tensor_of(w);
            let rel = Premise::Need(Conclusion::Summand {
                part: part.clone(),
                whole: whole.clone(),
            });
            for (rule, p) in [
                ("GA3", Property::GA),
                ("CLOSURE", Property::GeomSemiPos),
                ("CLOSURE", Property::GeomPos),
            ] {
                if p != Property::GA && !ctx.is_locally_free(t) {
                    continue;
                }
                self.push(
                    rule,
                    Conclusion::holds(t, p),
                    vec![rel.clone(), Self::need(&w, p)],
                );
            }
        }

        if let Push(_, x) = &t.kind {
            self.push("GA4", ga(t), vec![Self::need(x, Property::GA)]);
        }

        for (a, b) in splits(&fs) {
            if ctx.is_locally_free(&a) {
                self.push(
                    "SEMI-DEF",
                    ga(t),
                    vec![
                        Self::need(&a, Property::GeomSemiPos),
                        Self::need(&b, Property::GA),
                    ],
                );
            }
        }
    }

    fn positivity_rules(&mut self, t: &Expr) {
        use ExprKind::*;
        let ctx = self.ctx;
        if !ctx.is_locally_free(t) {
            return;
        }
        let semi = |e: &Expr| Conclusion::holds(e, Property::GeomSemiPos);
        let pos = |e: &Expr| Conclusion::holds(e, Property::GeomPos);

        if let Structure(_) = &t.kind {
            self.push("SEMI-TRIV", semi(t), vec![]);
        }
        if self.is_line(t) {
            self.push("NEFLINE", semi(t), vec![Self::need(t, Property::Nef)]);
            self.push(
                "NEFBIGLINE",
                pos(t),
                vec![Self::need(t, Property::Nef), Self::need(t, Property::Big)],
            );
        }
        self.push("POS-SEMI", semi(t), vec![Self::need(t, Property::GeomPos)]);

        match &t.kind {
            Schur(l, x) => {
                if let Some(r) = self.rank(x) {
                    let nonzero = Self::check(
                        !l.is_zero() && l.length() <= r,
                        format!("S^({l}) of a rank {r} bundle is nonzero"),
                    );
                    for p in [Property::GeomSemiPos, Property::GeomPos] {
                        self.push(
                            "SW-SEMI",
                            Conclusion::holds(t, p),
                            vec![nonzero.clone(), Self::need(x, p)],
                        );
                    }
                    let inpos = self.pos(l, r);
                    self.push(
                        "POSCOR",
                        semi(t),
                        vec![inpos.clone(), Self::need(x, Property::Nef)],
                    );
                    self.push(
                        "POSCOR",
                        pos(t),
                        vec![
                            inpos,
                            Self::need(x, Property::Nef),
                            Self::need(x, Property::Big),
                        ],
                    );
                }
            }
            SchurPlus(l, x) => {
                let nz = Self::check(!l.is_zero(), format!("({l}) is nonzero"));
                self.push(
                    "THM2a",
                    semi(t),
                    vec![nz.clone(), Self::need(x, Property::Nef)],
                );
                self.push(
                    "THM2b",
                    pos(t),
                    vec![
                        nz,
                        Self::need(x, Property::Nef),
                        Self::need(x, Property::Big),
                    ],
                );
            }
            Bundle(b) => {
                let p = self.flag(b, Flag::UniformlyNef);
                self.push("UNIF", semi(t), vec![p]);
            }
            Push(f, y) if matches!(&y.kind, OmegaRel(g) if g == f) => {
                let src = &ctx.morphisms[f].source;
                let prem = vec![
                    self.flag(f, Flag::SmoothMorphism),
                    self.flag(src, Flag::Projective),
                ];
                self.push("RELDUAL", semi(t), prem);
            }
            _ => {}
        }

        let fs = t.factors().to_vec();
        for (a, b) in splits(&fs) {
            for p in [Property::GeomSemiPos, Property::GeomPos] {
                self.push(
                    "CLOSURE",
                    Conclusion::holds(t, p),
                    vec![Self::need(&a, p), Self::need(&b, p)],
                );
            }
        }
    }

    fn nef_big_rules(&mut self, t: &Expr) {
        if !self.ctx.is_locally_free(t) {
            return;
        }
        let fs = t.factors().to_vec();
        for (a, b) in splits(&fs) {
            self.push(
                "NEF-TENSOR",
                Conclusion::holds(t, Property::Nef),
                vec![Self::need(&a, Property::Nef), Self::need(&b, Property::Nef)],
            );
            self.push(
                "BIG-TENSOR",
                Conclusion::holds(t, Property::Big),
                vec![Self::need(&a, Property::Big), Self::need(&b, Property::Big)],
            );
        }
        if let ExprKind::Schur(l, x) = &t.kind {
            if let Some(r) = self.rank(x) {
                let nonzero = Self::check(
                    !l.is_zero() && l.length() <= r,
                    format!("S^({l}) of a rank {r} bundle is nonzero"),
                );
                self.push(
                    "BIG-SW",
                    Conclusion::holds(t, Property::Big),
                    vec![nonzero, Self::need(x, Property::Big)],
                );
            }
        }
    }

    fn semistability_rules(&mut self, t: &Expr, universe: &[Expr]) {
        let ctx = self.ctx;
        if !ctx.is_locally_free(t) {
            return;
        }
        let ss = |e: &Expr| Conclusion::holds(e, Property::StronglySemistable);
        if let ExprKind::Bundle(b) = &t.kind {
            let p = self.flag(b, Flag::StronglySemistable);
            self.push("SS-DEF", ss(t), vec![p]);
            let c1 = self.flag(b, Flag::C1Zero);
            self.push("SS-C1", ss(t), vec![Self::need(t, Property::Nef), c1]);
        }
        let fs = t.factors().to_vec();
        if fs.len() >= 2 {
            for (i, l) in fs.iter().enumerate() {
                if !self.is_line(l) {
                    continue;
                }
                let mut rest = fs.clone();
                rest.remove(i);
                let rest = tensor_of(rest);
                let twist = Premise::Fact(format!("{l} is a line bundle"));
                self.push(
                    "SS-TWIST",
                    ss(t),
                    vec![Self::need(&rest, Property::StronglySemistable), twist],
                );
            }
        }
        for u in universe {
            let Some(rest) = remove_factors(u.factors(), &fs) else {
                continue;
            };
            if let [l] = rest.as_slice() {
                if self.is_line(l) && ctx.is_locally_free(u) {
                    let twist = Premise::Fact(format!("{l} is a line bundle"));
                    self.push(
                        "SS-TWIST",
                        ss(t),
                        vec![Self::need(u, Property::StronglySemistable), twist],
                    );
                }
            }
        }
        let det = canon(&Expr::det(t.clone()));
        self.push(
            "SS-COR",
            Conclusion::holds(t, Property::GeomSemiPos),
            vec![
                Self::need(t, Property::StronglySemistable),
                Self::need(&det, Property::Nef),
            ],
        );
        self.push(
            "SS-COR",
            Conclusion::holds(t, Property::GeomPos),
            vec![
                Self::need(t, Property::StronglySemistable),
                Self::need(&det, Property::Nef),
                Self::need(&det, Property::Big),
            ],
        );
    }

    fn claim_rules(&mut self, t: &Expr) {
        let ctx = self.ctx;
        let Some(x) = self.ambient(t) else { return };
        let ga = Self::need(t, Property::GA);
        let c = VanishingClaim::new(ClaimKind::CohomologyVanishing, t, &x, Range::Gt(0));
        self.push("GA5", Conclusion::Claim(c), vec![ga.clone()]);
        for (g, m) in &ctx.morphisms {
            if m.source == x {
                let mut c = VanishingClaim::new(ClaimKind::SheafVanishing, t, &x, Range::Gt(0));
                c.morphism = Some(g.clone());
                let prem = vec![
                    ga.clone(),
                    Premise::Fact(format!("{g}: {} -> {}", m.source, m.target)),
                ];
                self.push("GA5", Conclusion::Claim(c), prem);
            }
        }

        let fs = t.factors().to_vec();
        // CORVAN: one canonical pushforward, the rest Schur powers in Pos.
        for (i, f) in fs.iter().enumerate() {
            let Some(p) = self.canonical_push(f) else {
                continue;
            };
            let mut rest = fs.clone();
            rest.remove(i);
            let pieces: Option<Vec<_>> = rest.iter().map(|e| self.as_schur(e)).collect();
            let Some(pieces) = pieces.filter(|v| !v.is_empty()) else {
                continue;
            };
            let mut base = self.morphism_premises(&p, false);
            base.push(self.flag(&p.source, Flag::RationalSingularities));
            base.push(self.flag(&p.source, Flag::Projective));
            for (l, e, r) in &pieces {
                base.push(self.pos(l, *r));
                base.push(Self::need(e, Property::Nef));
            }
            let bigs: BTreeSet<&Expr> = pieces.iter().map(|(_, e, _)| e).collect();
            for e in bigs {
                let mut prem = base.clone();
                prem.push(Self::need(e, Property::Big));
                let c = VanishingClaim::new(ClaimKind::CohomologyVanishing, t, &x, Range::Gt(0));
                self.push("CORVAN", Conclusion::Claim(c), prem);
            }
        }

        // BASELOC: omega(X) * S^λ(E) * L.
        if let [_, _, _] = fs.as_slice() {
            for f in &ctx.facts {
                let Fact::BaseLocus { bundle, dim } = &f.fact else {
                    continue;
                };
                let bundle = canon(bundle);
                for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
                    let k = 3 - i - j;
                    if !matches!(&fs[i].kind, ExprKind::Omega(v) if *v == x)
                        || !self.is_line(&fs[k])
                    {
                        continue;
                    }
                    let Some((l, e, r)) = self.as_schur(&fs[j]) else {
                        continue;
                    };
                    if e != bundle {
                        continue;
                    }
                    let prem = vec![
                        self.flag(&x, Flag::Smooth),
                        self.flag(&x, Flag::Projective),
                        Premise::Fact(f.fact.to_string()),
                        self.pos(&l, r),
                        Self::need(&fs[k], Property::Nef),
                        Self::need(&fs[k], Property::Big),
                    ];
                    let c = VanishingClaim::new(
                        ClaimKind::CohomologyVanishing,
                        t,
                        &x,
                        Range::Gt(*dim as i64),
                    );
                    self.push("BASELOC", Conclusion::Claim(c), prem);
                }
            }
        }

        // KAMPLE: pull back along surjections from smooth varieties.
        if ctx.is_locally_free(t) {
            for (g, m) in &ctx.morphisms {
                if m.target != x {
                    continue;
                }
                let subject = canon(&Expr::tensor(vec![
                    Expr::omega(&m.source),
                    Expr::pull(g, t.clone()),
                ]));
                let (dy, dx) = (ctx.dim(&m.source).unwrap_or(0), ctx.dim(&x).unwrap_or(0));
                let c = VanishingClaim::new(
                    ClaimKind::CohomologyVanishing,
                    &subject,
                    &m.source,
                    Range::Gt(dy as i64 - dx as i64),
                );
                let prem = vec![
                    Self::need(t, Property::GeomPos),
                    Premise::Fact(format!("{g}: {} -> {x}", m.source)),
                    self.flag(g, Flag::Surjective),
                    self.flag(&m.source, Flag::Smooth),
                    self.flag(&m.source, Flag::Projective),
                ];
                self.push("KAMPLE", Conclusion::Claim(c), prem);
            }
        }

        // QLAMBDA: Schur powers of a declared cotangent bundle.
        if let ExprKind::Schur(l, b) = &t.kind {
            if let ExprKind::Bundle(om) = &b.kind {
                for f in &ctx.facts {
                    let Fact::Cotangent { bundle, variety } = &f.fact else {
                        continue;
                    };
                    if bundle != om {
                        continue;
                    }
                    let d = ctx.dim(variety).unwrap_or(0);
                    let c = Conclusion::Claim(VanishingClaim::new(
                        ClaimKind::Invariance,
                        t,
                        variety,
                        Range::All,
                    ));
                    let base = vec![
                        Premise::Fact(f.fact.to_string()),
                        self.flag(variety, Flag::Smooth),
                        self.flag(variety, Flag::Projective),
                        Self::need(b, Property::Nef),
                    ];
                    let mut p1 = base.clone();
                    p1.push(Self::need(&Expr::omega(variety), Property::Big));
                    p1.push(Self::check(
                        l.qlambda_condition(d, 2),
                        format!("({l}) satisfies the q_lambda condition with slack 2"),
                    ));
                    self.push("QLAMBDA", c.clone(), p1);
                    let mut p2 = base;
                    p2.push(Self::need(b, Property::Big));
                    p2.push(Self::check(
                        l.qlambda_condition(d, 1),
                        format!("({l}) satisfies the q_lambda condition with slack 1"),
                    ));
                    self.push("QLAMBDA", c, p2);
                }
            }
        }
    }

    /// Runs rounds until nothing new fires; returns how many conclusions were added.
    pub fn saturate(&mut self) -> usize {
        let before = self.derived.len();
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.rule == "DECL" && !self.derived.contains_key(&inst.conclusion) {
                self.derived.insert(inst.conclusion.clone(), (0, i));
            }
        }
        let mut round = 1;
        loop {
            let mut added = false;
            for (i, inst) in self.instances.iter().enumerate() {
                if inst.rule == "DECL" || self.derived.contains_key(&inst.conclusion) {
                    continue;
                }
                let ready = inst.premises.iter().all(|p| match p {
                    Premise::Fact(_) => true,
                    Premise::Missing(_) => false,
                    Premise::Need(c) => self.derived.get(c).is_some_and(|(r, _)| *r < round),
                });
                if ready {
                    self.derived.insert(inst.conclusion.clone(), (round, i));
                    added = true;
                }
            }
            if !added {
                self.rounds = self.rounds.max(round - 1);
                return self.derived.len() - before;
            }
            round += 1;
        }
    }

    pub fn round_of(&self, c: &Conclusion) -> Option<usize> {
        self.derived.get(c).map(|(r, _)| *r)
    }

    pub fn certificate(&self, c: &Conclusion) -> Option<Certificate> {
        let &(_, i) = self.derived.get(c)?;
        let inst = &self.instances[i];
        let mut children = Vec::new();
        let mut leaves = Vec::new();
        for p in &inst.premises {
            match p {
                Premise::Fact(s) => leaves.push(s.clone()),
                Premise::Missing(_) => unreachable!("derived instances have no missing premises"),
                Premise::Need(n) => {
                    let child = self.certificate(n)?;
                    if child.rule == "DECL" {
                        leaves.extend(child.leaves);
                    } else {
                        children.push(child);
                    }
                }
            }
        }
        Some(Certificate {
            conclusion: c.clone(),
            rule: inst.rule,
            children,
            leaves,
        })
    }

    pub fn derive(&self, goal: &Conclusion) -> Outcome {
        match self.round_of(goal) {
            Some(r) if r <= self.opts.max_depth => Outcome::Derived(
                self.certificate(goal)
                    .expect("derived conclusions have certificates"),
            ),
            Some(r) => Outcome::DepthBound {
                needed: r,
                bound: self.opts.max_depth,
            },
            None => Outcome::Unknown {
                frontier: self.frontier(std::slice::from_ref(goal)),
            },
        }
    }

    /// Claims with an applicable instance citing `c` as a direct premise.
    pub fn emit_claims(&self, c: &Conclusion) -> Vec<(VanishingClaim, &'static str)> {
        let need = Premise::Need(c.clone());
        let within = |x: &Conclusion| self.round_of(x).is_some_and(|r| r <= self.opts.max_depth);
        let mut out: BTreeMap<VanishingClaim, &'static str> = BTreeMap::new();
        for inst in &self.instances {
            let Conclusion::Claim(claim) = &inst.conclusion else {
                continue;
            };
            if out.contains_key(claim) || !inst.premises.contains(&need) {
                continue;
            }
            let holds = inst.premises.iter().all(|p| match p {
                Premise::Fact(_) => true,
                Premise::Missing(_) => false,
                Premise::Need(n) => within(n),
            });
            if holds && within(&inst.conclusion) {
                out.insert(claim.clone(), inst.rule);
            }
        }
        out.into_iter().collect()
    }

    /// Claims derived within the bound matching a predicate, earliest first.
    pub fn claims_where(&self, pred: impl Fn(&VanishingClaim) -> bool) -> Vec<(Conclusion, usize)> {
        let mut v: Vec<(Conclusion, usize)> = self
            .derived
            .iter()
            .filter_map(|(k, (r, _))| match k {
                Conclusion::Claim(c) if pred(c) => Some((k.clone(), *r)),
                _ => None,
            })
            .collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Failed premises reached by expanding underivable goals, up to a few levels.
    fn frontier(&self, goals: &[Conclusion]) -> Vec<String> {
        let mut out = BTreeSet::new();
        let mut seen: BTreeSet<Conclusion> = goals.iter().cloned().collect();
        let mut level: Vec<Conclusion> = goals.to_vec();
        for depth in 0..4 {
            let mut next = Vec::new();
            for g in &level {
                let insts: Vec<&Instance> = self
                    .instances
                    .iter()
                    .filter(|i| i.conclusion == *g)
                    .collect();
                if insts.is_empty() && depth > 0 {
                    out.insert(format!("{g}: no rule concludes it"));
                }
                for inst in insts {
                    for p in &inst.premises {
                        match p {
                            Premise::Missing(s) => {
                                out.insert(format!("{s} (needed by {} for {g})", inst.rule));
                            }
                            Premise::Need(c) if !self.derived.contains_key(c) => {
                                if depth == 3 {
                                    out.insert(format!("{c} (needed by {} for {g})", inst.rule));
                                } else if seen.insert(c.clone()) {
                                    next.push(c.clone());
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            level = next;
        }
        out.into_iter().collect()
    }
}

/// Result of one query.
#[derive(Clone, Debug)]
pub struct QueryResult {
    pub query: String,
    pub goal: String,
    pub outcome: Outcome,
    pub claims: Vec<(VanishingClaim, &'static str)>,
}

impl QueryResult {
    pub fn to_json(&self) -> Value {
        let claims: Vec<Value> = self.claims.iter().map(|(c, r)| claim_json(c, r)).collect();
        let mut v = json!({
            "query": self.query,
            "goal": self.goal,
            "status": self.outcome.status(),
            "claims": claims,
        });
        match &self.outcome {
            Outcome::Derived(c) => v["certificate"] = c.to_json(),
            Outcome::DepthBound { needed, bound } => {
                v["depth_needed"] = json!(needed);
                v["depth_bound"] = json!(bound);
            }
            Outcome::Unknown { frontier } => v["frontier"] = json!(frontier),
        }
        v
    }

    pub fn explain(&self) -> String {
        match &self.outcome {
            Outcome::Derived(c) => explain(c),
            Outcome::DepthBound { needed, bound } => format!(
                "Depth bound: {} needs a derivation of height {needed}, above the bound {bound}.\n",
                self.goal
            ),
            Outcome::Unknown { frontier } => explain_unknown(&self.goal, frontier),
        }
    }
}

/// Answers every query of a validated document.
type ClaimFilter = Box<dyn Fn(&VanishingClaim) -> bool>;

pub fn run_queries(doc: &Document, val: &Validation, opts: Options) -> Vec<QueryResult> {
    let session = Session::new(doc, val, opts);
    doc.queries
        .iter()
        .map(|q| {
            let subject = canon(&q.subject);
            let judgment = |p| Conclusion::holds(&subject, p);
            let (goal, claim_goal): (String, Option<ClaimFilter>) = match q.kind {
                QueryKind::Acyclic => (judgment(Property::GA).to_string(), None),
                QueryKind::Semipositive => (judgment(Property::GeomSemiPos).to_string(), None),
                QueryKind::Positive => (judgment(Property::GeomPos).to_string(), None),
                QueryKind::Nef => (judgment(Property::Nef).to_string(), None),
                QueryKind::Big => (judgment(Property::Big).to_string(), None),
                QueryKind::StronglySemistable => {
                    (judgment(Property::StronglySemistable).to_string(), None)
                }
                QueryKind::VanishingRange => {
                    let s = subject.clone();
                    (
                        format!("H^i(-, {subject}) = 0"),
                        Some(Box::new(move |c| {
                            c.kind == ClaimKind::CohomologyVanishing && c.subject == s
                        })),
                    )
                }
                QueryKind::KoszulRestriction => {
                    let (s, z) = (subject.clone(), q.zero.clone());
                    (
                        format!(
                            "restriction of {subject} to {}",
                            z.as_deref().unwrap_or("?")
                        ),
                        Some(Box::new(move |c| {
                            matches!(
                                c.kind,
                                ClaimKind::RestrictionIso | ClaimKind::RestrictionInj
                            ) && c.subject == s
                                && c.zero == z
                        })),
                    )
                }
                QueryKind::Connectedness => {
                    let s = subject.clone();
                    (
                        format!("connected({subject})"),
                        Some(Box::new(move |c| {
                            c.kind == ClaimKind::Connected && c.subject == s
                        })),
                    )
                }
                QueryKind::Invariant => {
                    let s = subject.clone();
                    (
                        format!("invariance of h^0({subject})"),
                        Some(Box::new(move |c| {
                            c.kind == ClaimKind::Invariance && c.subject == s
                        })),
                    )
                }
            };
            match claim_goal {
                None => {
                    let goal_c = match q.kind {
                        QueryKind::Acyclic => judgment(Property::GA),
                        QueryKind::Semipositive => judgment(Property::GeomSemiPos),
                        QueryKind::Positive => judgment(Property::GeomPos),
                        QueryKind::Nef => judgment(Property::Nef),
                        QueryKind::Big => judgment(Property::Big),
                        _ => judgment(Property::StronglySemistable),
                    };
                    let outcome = session.derive(&goal_c);
                    let claims = match &outcome {
                        Outcome::Derived(_) => session.emit_claims(&goal_c),
                        _ => Vec::new(),
                    };
                    QueryResult {
                        query: q.to_string(),
                        goal,
                        outcome,
                        claims,
                    }
                }
                Some(pred) => {
                    let found = session.claims_where(pred);
                    let within: Vec<&(Conclusion, usize)> =
                        found.iter().filter(|(_, r)| *r <= opts.max_depth).collect();
                    let outcome = match (within.first(), found.first()) {
                        (Some((c, _)), _) => {
                            Outcome::Derived(session.certificate(c).expect("derived"))
                        }
                        (None, Some((_, r))) => Outcome::DepthBound {
                            needed: *r,
                            bound: opts.max_depth,
                        },
                        (None, None) => {
                            let candidates: Vec<Conclusion> = session
                                .instances
                                .iter()
                                .filter(|i| match &i.conclusion {
                                    Conclusion::Claim(c) => {
                                        c.subject == subject
                                            && match q.kind {
                                                QueryKind::VanishingRange => {
                                                    c.kind == ClaimKind::CohomologyVanishing
                                                }
                                                QueryKind::KoszulRestriction => c.zero == q.zero,
                                                QueryKind::Connectedness => {
                                                    c.kind == ClaimKind::Connected
                                                }
                                                _ => c.kind == ClaimKind::Invariance,
                                            }
                                    }
                                    _ => false,
                                })
                                .map(|i| i.conclusion.clone())
                                .collect();
                            Outcome::Unknown {
                                frontier: session.frontier(&candidates),
                            }
                        }
                    };
                    let claims = within
                        .iter()
                        .filter_map(|(c, _)| match c {
                            Conclusion::Claim(v) => {
                                Some((v.clone(), session.instances[session.derived[c].1].rule))
                            }
                            _ => None,
                        })
                        .collect();
                    QueryResult {
                        query: q.to_string(),
                        goal,
                        outcome,
                        claims,
                    }
                }
            }
        })
        .collect()
}

/// Exit status for a batch: the worst outcome wins.
pub fn exit_code(results: &[QueryResult]) -> i32 {
    results
        .iter()
        .map(|r| r.outcome.exit_code())
        .max()
        .unwrap_or(0)
}

/// Bundles and line bundles mapped to split bundles `⊕ O(d_i)` on `P^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitInstance {
    pub n: usize,
    pub degrees: BTreeMap<String, Vec<i64>>,
}

impl FromStr for SplitInstance {
    type Err = String;

    /// `n=1;E=1,1;H=2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut n = None;
        let mut degrees = BTreeMap::new();
        for item in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{item}`"))?;
            let k = k.trim();
            if k == "n" {
                n = Some(
                    v.trim()
                        .parse()
                        .map_err(|_| format!("bad dimension `{v}`"))?,
                );
            } else {
                let ds = v
                    .split(',')
                    .map(|d| {
                        d.trim()
                            .parse::<i64>()
                            .map_err(|_| format!("bad degree `{d}`"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                degrees.insert(k.to_string(), ds);
            }
        }
        Ok(SplitInstance {
            n: n.ok_or("missing n=")?,
            degrees,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitVerdict {
    Pass,
    Fail { degree: usize, dim: u128 },
    NotInstantiable(String),
}

impl fmt::Display for SplitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitVerdict::Pass => f.write_str("PASS"),
            SplitVerdict::Fail { degree, dim } => write!(f, "FAIL (h^{degree} = {dim})"),
            SplitVerdict::NotInstantiable(why) => write!(f, "NOT_INSTANTIABLE ({why})"),
        }
    }
}

fn split_degrees(
    e: &Expr,
    ctx: &Context,
    inst: &SplitInstance,
) -> Result<BTreeMap<i64, u128>, String> {
    use ExprKind::*;
    let single = |d: i64| BTreeMap::from([(d, 1u128)]);
    let expand = |m: &BTreeMap<i64, u128>| -> Vec<i64> {
        m.iter()
            .flat_map(|(&d, &k)| std::iter::repeat_n(d, k as usize))
            .collect()
    };
    match &e.kind {
        Omega(_) => Ok(single(-(inst.n as i64) - 1)),
        Structure(_) => Ok(single(0)),
        Line(n) | Bundle(n) => {
            let ds = inst
                .degrees
                .get(n)
                .ok_or_else(|| format!("{n} is not instantiated"))?;
            let rank = ctx.rank(e).unwrap_or(0);
            if ds.len() as u128 != rank {
                return Err(format!(
                    "{n} has rank {rank} but {} degrees were given",
                    ds.len()
                ));
            }
            let mut m = BTreeMap::new();
            for &d in ds {
                *m.entry(d).or_insert(0) += 1;
            }
            Ok(m)
        }
        Tensor(fs) => {
            let mut acc = single(0);
            for f in fs {
                let g = split_degrees(f, ctx, inst)?;
                let mut next = BTreeMap::new();
                for (&a, &x) in &acc {
                    for (&b, &y) in &g {
                        *next.entry(a + b).or_insert(0) += x * y;
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        Schur(l, x) => Ok(schur_split_degrees(
            &expand(&split_degrees(x, ctx, inst)?),
            l,
        )),
        SchurPlus(l, x) => {
            let ds = expand(&split_degrees(x, ctx, inst)?);
            match l.plus_shift(ds.len()) {
                Ok(p) => Ok(schur_split_degrees(&ds, &p)),
                Err(_) => Ok(BTreeMap::new()),
            }
        }
        Det(x) => Ok(single(expand(&split_degrees(x, ctx, inst)?).iter().sum())),
        Dual(x) => Ok(split_degrees(x, ctx, inst)?
            .into_iter()
            .map(|(d, k)| (-d, k))
            .collect()),
        Push(..) | RPush(..) | Pull(..) | OmegaRel(_) => Err(format!("{e} involves a morphism")),
        TwistCeil(..) => Err(format!("{e} involves a divisor")),
        Sheaf(n) => Err(format!("{n} is an opaque sheaf")),
    }
}

/// Checks a cohomology-vanishing claim on a split instantiation over `P^n`.
pub fn verify_split(claim: &VanishingClaim, ctx: &Context, inst: &SplitInstance) -> SplitVerdict {
    if claim.kind != ClaimKind::CohomologyVanishing {
        return SplitVerdict::NotInstantiable(format!(
            "{} claims are not numerical",
            claim.kind.name()
        ));
    }
    if ctx.dim(&claim.space) != Some(inst.n) {
        return SplitVerdict::NotInstantiable(format!(
            "{} is not declared of dimension {}",
            claim.space, inst.n
        ));
    }
    let degrees = match split_degrees(&claim.subject, ctx, inst) {
        Ok(d) => d,
        Err(why) => return SplitVerdict::NotInstantiable(why),
    };
    let table = line_sum_cohomology(inst.n, &degrees);
    for q in 0..=inst.n {
        let dim = table.dim(q);
        if claim.range.contains(q as i64) && dim != 0 {
            return SplitVerdict::Fail { degree: q, dim };
        }
    }
    SplitVerdict::Pass
}

/// The claim `H^i(P, subject) = 0` for `i > 0`, built without the engine.
pub fn forced_claim(subject: &Expr, space: &str) -> VanishingClaim {
    VanishingClaim::new(ClaimKind::CohomologyVanishing, subject, space, Range::Gt(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, validate};

    fn run(src: &str) -> Vec<QueryResult> {
        let doc = parse(src).unwrap();
        let v = validate(&doc);
        assert!(v.is_ok(), "{:?}", v.errors);
        run_queries(&doc, &v, Options::default())
    }

    fn cert(r: &QueryResult) -> &Certificate {
        match &r.outcome {
            Outcome::Derived(c) => c,
            o => panic!("{} not derived: {o:?}", r.goal),
        }
    }

    const GA1: &str = "variety Y { dim=3, smooth, projective }\nvariety X { dim=1, projective }\n\
                       morphism f : Y -> X\nlinebundle L on X { ample }\nquery acyclic(push(f, omega(Y)) * L)";

    #[test]
    fn ga1_single_node() {
        let r = run(GA1);
        let c = cert(&r[0]);
        assert_eq!(c.rule, "GA1");
        assert!(c.children.is_empty());
        assert_eq!(c.height(), 1);
        assert_eq!(explain(c).lines().count(), 2);
    }

    #[test]
    fn ga5_claims_for_each_morphism_out() {
        let src = format!("{GA1}\nvariety Z {{ dim=0, projective }}\nmorphism g : X -> Z");
        let r = run(&src);
        let kinds: Vec<_> = r[0]
            .claims
            .iter()
            .map(|(c, rule)| (c.kind, *rule))
            .collect();
        assert!(kinds.contains(&(ClaimKind::CohomologyVanishing, "GA5")));
        assert!(kinds.contains(&(ClaimKind::SheafVanishing, "GA5")));
    }

    #[test]
    fn nef_alone_is_not_positive() {
        let r = run("variety X { dim=2, smooth, projective }\nbundle E on X { rank=2, nef }\nquery positive(E)");
        assert!(matches!(r[0].outcome, Outcome::Unknown { .. }));
        assert_eq!(r[0].outcome.exit_code(), 10);
    }

    #[test]
    fn thm2a_over_nef_leaf() {
        let r = run("variety X { dim=2 }\nbundle E on X { rank=2, nef }\nquery semipositive(schur_plus([2,1], E))");
        let c = cert(&r[0]);
        assert_eq!(c.rule, "THM2a");
        assert!(c.leaves.iter().any(|l| l.starts_with("E nef")));
    }

    #[test]
    fn kample_degree_bound() {
        let src = "variety Y { dim=3, smooth, projective }\nvariety X { dim=1, projective }\n\
                   morphism f : Y -> X { surjective }\nbundle E on X { rank=2, nef, big }\n\
                   query positive(schur([2,2], E))";
        let r = run(src);
        let k: Vec<_> = r[0]
            .claims
            .iter()
            .filter(|(_, rule)| *rule == "KAMPLE")
            .collect();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].0.range, Range::Gt(2));
        assert_eq!(k[0].0.space, "Y");
    }

    #[test]
    fn koszul_and_connect() {
        let src = "variety X { dim=3, smooth, projective, irreducible }\nvariety Z { dim=2 }\n\
                   linebundle L on X { ample }\nfact zeros Z of L\nquery positive(L)\nquery connectedness(Z)";
        let r = run(src);
        let ranges: BTreeSet<_> = r[0]
            .claims
            .iter()
            .filter(|(_, rule)| *rule == "KOSZUL")
            .map(|(c, _)| (c.kind, c.range))
            .collect();
        assert!(ranges.contains(&(ClaimKind::RestrictionIso, Range::Lt(2))));
        assert!(ranges.contains(&(ClaimKind::RestrictionInj, Range::Eq(2))));
        assert_eq!(cert(&r[1]).rule, "CONNECT");
    }

    #[test]
    fn depth_bound_is_distinct_from_unknown() {
        let src = "variety X { dim=2, smooth, projective }\nbundle E on X { rank=2, nef, big }\n\
                   linebundle M on X { nef }\nquery acyclic(omega(X) * schur([2,2], E) * M)";
        let doc = parse(src).unwrap();
        let v = validate(&doc);
        let full = run_queries(&doc, &v, Options::default());
        let h = cert(&full[0]).height();
        let cut = run_queries(
            &doc,
            &v,
            Options {
                max_depth: h - 1,
                pos_strict: false,
            },
        );
        assert_eq!(
            cut[0].outcome,
            Outcome::DepthBound {
                needed: h,
                bound: h - 1
            }
        );
        assert_eq!(cut[0].outcome.exit_code(), 11);
    }

    #[test]
    fn pos_strict_mode() {
        // (1,1) on a rank 2 bundle: λ' = 0 and n = 1, fine either way;
        // (2,1) on rank 2: λ' = (1), n = 0, only the lenient reading allows it.
        let src = "variety X { dim=2 }\nbundle E on X { rank=2, nef }\nquery semipositive(schur([2,1], E))";
        let doc = parse(src).unwrap();
        let v = validate(&doc);
        let lenient = run_queries(&doc, &v, Options::default());
        assert!(matches!(lenient[0].outcome, Outcome::Derived(_)));
        let strict = run_queries(
            &doc,
            &v,
            Options {
                pos_strict: true,
                ..Options::default()
            },
        );
        assert!(matches!(strict[0].outcome, Outcome::Unknown { .. }));
    }

    #[test]
    fn saturation_is_a_fixed_point() {
        let doc = parse(GA1).unwrap();
        let v = validate(&doc);
        let mut again = Session::new(&doc, &v, Options::default());
        let before: Vec<_> = again.derived().map(|(c, r)| (c.clone(), r)).collect();
        assert_eq!(again.saturate(), 0);
        let after: Vec<_> = again.derived().map(|(c, r)| (c.clone(), r)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn split_verification() {
        let src = "variety P { dim=1, smooth, projective }\nbundle E on P { rank=2, ample }\n\
                   linebundle H on P { ample }\nquery vanishing_range(omega(P) * schur([2,1], E) * H)";
        let doc = parse(src).unwrap();
        let v = validate(&doc);
        let r = run_queries(&doc, &v, Options::default());
        assert!(!r[0].claims.is_empty());
        let inst: SplitInstance = "n=1;E=1,1;H=1".parse().unwrap();
        for (c, _) in &r[0].claims {
            assert_eq!(verify_split(c, &v.context, &inst), SplitVerdict::Pass);
        }
        let trivial: SplitInstance = "n=1;E=0,0;H=0".parse().unwrap();
        let forced = forced_claim(&doc.queries[0].subject, "P");
        assert!(matches!(
            verify_split(&forced, &v.context, &trivial),
            SplitVerdict::Fail { degree: 1, .. }
        ));
    }

    #[test]
    fn pushforwards_are_not_instantiable() {
        let doc = parse(GA1).unwrap();
        let v = validate(&doc);
        let c = forced_claim(&doc.queries[0].subject, "X");
        let inst: SplitInstance = "n=1;L=1".parse().unwrap();
        assert!(matches!(
            verify_split(&c, &v.context, &inst),
            SplitVerdict::NotInstantiable(_)
        ));
    }

    #[test]
    fn split_gives_summand_of_cover() {
        let src =
            "variety X { dim=2, smooth, projective }\nvariety X2 { dim=2, smooth, projective }\n\
                   morphism p : X2 -> X { generically_finite }\nquery acyclic(omega(X))";
        let doc = parse(src).unwrap();
        let v = validate(&doc);
        let s = Session::new(&doc, &v, Options::default());
        let goal = Conclusion::Summand {
            part: Expr::omega("X"),
            whole: Expr::push("p", Expr::omega("X2")),
        };
        match s.derive(&goal) {
            Outcome::Derived(c) => assert_eq!(c.rule, "SPLIT"),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn canonical_forms() {
        let e = Expr::bundle("E");
        assert_eq!(canon(&Expr::schur(Partition::row(1), e.clone())), e);
        assert_eq!(canon(&Expr::dual(Expr::dual(e.clone()))), e);
        assert_eq!(
            canon(&Expr::tensor(vec![Expr::structure("X"), e.clone()])),
            e
        );
    }

    #[test]
    fn catalog_is_sorted_and_hashed() {
        assert!(RULES.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(rule_catalog_hash().len(), 64);
    }
}
