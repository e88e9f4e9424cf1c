//! The `.gad` input language.
//!
//! A file is a sequence of declarations, facts, assumptions and queries; see
//! the README for the grammar. Parsing resolves every name, so a successful
//! [`parse`] yields a [`Document`] whose expressions only mention declared
//! objects. [`validate`] then closes the declared flags under the standard
//! implications and checks variety bookkeeping.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;
use serde_json::{json, Value};

use crate::partitions::Partition;
use crate::schur::schur_dim;
use crate::Rational;

/// 1-based source position. Spans never take part in equality, ordering or
/// hashing, so re-parsed documents compare equal to the originals.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Span {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

macro_rules! flags {
    ($($v:ident => $s:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Flag { $($v),* }

        impl Flag {
            pub fn name(self) -> &'static str {
                match self { $(Flag::$v => $s),* }
            }

            pub fn from_name(s: &str) -> Option<Flag> {
                match s { $($s => Some(Flag::$v),)* _ => None }
            }
        }
    };
}

flags! {
    Smooth => "smooth",
    Projective => "projective",
    RationalSingularities => "rational_singularities",
    Irreducible => "irreducible",
    Surjective => "surjective",
    GenericallyFinite => "generically_finite",
    Birational => "birational",
    Finite => "finite",
    Etale => "etale",
    SmoothMorphism => "smooth_morphism",
    NormalCrossing => "normal_crossing",
    Reduced => "reduced",
    Effective => "effective",
    Ample => "ample",
    Nef => "nef",
    Big => "big",
    VeryAmple => "very_ample",
    GloballyGenerated => "globally_generated",
    StronglySemistable => "strongly_semistable",
    UnitaryFlat => "unitary_flat",
    UniformlyNef => "uniformly_nef",
    C1Zero => "c1_zero",
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

use Flag::*;

pub const VARIETY_FLAGS: &[Flag] = &[Smooth, Projective, RationalSingularities, Irreducible];
pub const MORPHISM_FLAGS: &[Flag] = &[
    Surjective,
    GenericallyFinite,
    Birational,
    Finite,
    Etale,
    SmoothMorphism,
];
pub const DIVISOR_FLAGS: &[Flag] = &[NormalCrossing, Reduced, Effective];
pub const LINE_FLAGS: &[Flag] = &[Ample, Nef, Big, VeryAmple];
pub const BUNDLE_FLAGS: &[Flag] = &[
    Nef,
    Big,
    Ample,
    GloballyGenerated,
    StronglySemistable,
    UnitaryFlat,
    UniformlyNef,
    C1Zero,
];

const DECL_KEYWORDS: &[&str] = &[
    "variety",
    "morphism",
    "divisor",
    "linebundle",
    "bundle",
    "sheaf",
    "fact",
    "assume",
    "query",
];
const FUNCTIONS: &[&str] = &[
    "omega",
    "structure",
    "push",
    "rpush",
    "pull",
    "omega_rel",
    "schur",
    "schur_plus",
    "det",
    "dual",
    "twist_ceil",
];
const RESERVED: &[&str] = &["on", "of", "by"];

fn is_reserved(s: &str) -> bool {
    DECL_KEYWORDS.contains(&s) || FUNCTIONS.contains(&s) || RESERVED.contains(&s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variety {
    pub dim: usize,
    pub flags: BTreeSet<Flag>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub source: String,
    pub target: String,
    pub flags: BTreeSet<Flag>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub variety: String,
    pub components: Vec<(String, Rational)>,
    pub flags: BTreeSet<Flag>,
    pub span: Span,
}

impl Divisor {
    /// Coefficients rounded up, component by component.
    pub fn ceiling(&self) -> Vec<(String, BigInt)> {
        self.components
            .iter()
            .map(|(c, q)| (c.clone(), q.numer().div_ceil(q.denom())))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.components.iter().all(|(_, q)| q.is_integer())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineBundle {
    pub variety: String,
    pub flags: BTreeSet<Flag>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub variety: String,
    pub rank: usize,
    pub flags: BTreeSet<Flag>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafDecl {
    /// A coherent sheaf known only by name.
    Opaque { variety: String, span: Span },
    /// A name for an expression; uses are expanded while parsing.
    Alias { definition: Expr, span: Span },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprKind {
    Omega(String),
    Structure(String),
    Line(String),
    Bundle(String),
    Sheaf(String),
    Push(String, Box<Expr>),
    RPush(usize, String, Box<Expr>),
    Pull(String, Box<Expr>),
    OmegaRel(String),
    /// Flattened and sorted, at least two factors.
    Tensor(Vec<Expr>),
    Schur(Partition, Box<Expr>),
    SchurPlus(Partition, Box<Expr>),
    Det(Box<Expr>),
    Dual(Box<Expr>),
    TwistCeil(String, String),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(mut self, span: Span) -> Self {
        self.span = span;
        self
    }

    pub fn omega(x: &str) -> Self {
        Self::new(ExprKind::Omega(x.into()))
    }

    pub fn structure(x: &str) -> Self {
        Self::new(ExprKind::Structure(x.into()))
    }

    pub fn line(l: &str) -> Self {
        Self::new(ExprKind::Line(l.into()))
    }

    pub fn bundle(e: &str) -> Self {
        Self::new(ExprKind::Bundle(e.into()))
    }

    pub fn push(f: &str, e: Expr) -> Self {
        Self::new(ExprKind::Push(f.into(), Box::new(e)))
    }

    pub fn pull(f: &str, e: Expr) -> Self {
        Self::new(ExprKind::Pull(f.into(), Box::new(e)))
    }

    pub fn schur(lambda: Partition, e: Expr) -> Self {
        Self::new(ExprKind::Schur(lambda, Box::new(e)))
    }

    pub fn dual(e: Expr) -> Self {
        Self::new(ExprKind::Dual(Box::new(e)))
    }

    pub fn det(e: Expr) -> Self {
        Self::new(ExprKind::Det(Box::new(e)))
    }

    /// Tensor product of the factors, flattened and sorted. A single factor
    /// is returned unchanged.
    pub fn tensor(factors: Vec<Expr>) -> Self {
        let mut flat = Vec::new();
        for f in factors {
            match f.kind {
                ExprKind::Tensor(inner) => flat.extend(inner),
                _ => flat.push(f),
            }
        }
        flat.sort();
        if flat.len() == 1 {
            return flat.pop().expect("one factor");
        }
        Self::new(ExprKind::Tensor(flat))
    }

    /// Tensor factors; a non-tensor is its own single factor.
    pub fn factors(&self) -> &[Expr] {
        match &self.kind {
            ExprKind::Tensor(fs) => fs,
            _ => std::slice::from_ref(self),
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Push(_, e)
            | ExprKind::RPush(_, _, e)
            | ExprKind::Pull(_, e)
            | ExprKind::Schur(_, e)
            | ExprKind::SchurPlus(_, e)
            | ExprKind::Det(e)
            | ExprKind::Dual(e) => vec![e],
            ExprKind::Tensor(fs) => fs.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// All subexpressions, this one included, parents before children.
    pub fn subexpressions(&self) -> Vec<&Expr> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.subexpressions());
        }
        out
    }

    fn kind_name(&self) -> &'static str {
        match &self.kind {
            ExprKind::Omega(_) => "omega",
            ExprKind::Structure(_) => "structure",
            ExprKind::Line(_) => "line",
            ExprKind::Bundle(_) => "bundle",
            ExprKind::Sheaf(_) => "sheaf",
            ExprKind::Push(..) => "push",
            ExprKind::RPush(..) => "rpush",
            ExprKind::Pull(..) => "pull",
            ExprKind::OmegaRel(_) => "omega_rel",
            ExprKind::Tensor(_) => "tensor",
            ExprKind::Schur(..) => "schur",
            ExprKind::SchurPlus(..) => "schur_plus",
            ExprKind::Det(_) => "det",
            ExprKind::Dual(_) => "dual",
            ExprKind::TwistCeil(..) => "twist_ceil",
        }
    }
}

fn bracket(p: &Partition) -> String {
    let parts: Vec<String> = p.parts().iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Omega(x) => write!(f, "omega({x})"),
            ExprKind::Structure(x) => write!(f, "structure({x})"),
            ExprKind::Line(n) | ExprKind::Bundle(n) | ExprKind::Sheaf(n) => f.write_str(n),
            ExprKind::Push(m, e) => write!(f, "push({m}, {e})"),
            ExprKind::RPush(i, m, e) => write!(f, "rpush({i}, {m}, {e})"),
            ExprKind::Pull(m, e) => write!(f, "pull({m}, {e})"),
            ExprKind::OmegaRel(m) => write!(f, "omega_rel({m})"),
            ExprKind::Tensor(fs) => {
                let parts: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(" * "))
            }
            ExprKind::Schur(l, e) => write!(f, "schur({}, {e})", bracket(l)),
            ExprKind::SchurPlus(l, e) => write!(f, "schur_plus({}, {e})", bracket(l)),
            ExprKind::Det(e) => write!(f, "det({e})"),
            ExprKind::Dual(e) => write!(f, "dual({e})"),
            ExprKind::TwistCeil(l, d) => write!(f, "twist_ceil({l}, {d})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    /// `0 → sub → middle → quotient → 0`.
    Extension {
        middle: Expr,
        quotient: Expr,
        sub: Expr,
    },
    Summand {
        part: Expr,
        whole: Expr,
    },
    /// A locally free quotient.
    Quotient {
        quotient: Expr,
        of: Expr,
    },
    Sum {
        total: Expr,
        parts: Vec<Expr>,
    },
    C1Zero(String),
    /// `zero` is the zero scheme of a regular section of `bundle`.
    Zeros {
        zero: String,
        bundle: Expr,
    },
    /// The pair `(L, D)` has `L(D)` nef and big.
    NefBigTwist {
        line: String,
        divisor: String,
    },
    BaseLocus {
        bundle: Expr,
        dim: usize,
    },
    /// `bundle` is the cotangent bundle of `variety`.
    Cotangent {
        bundle: String,
        variety: String,
    },
}

impl Fact {
    pub fn expressions(&self) -> Vec<&Expr> {
        match self {
            Fact::Extension {
                middle,
                quotient,
                sub,
            } => vec![middle, quotient, sub],
            Fact::Summand { part, whole } => vec![part, whole],
            Fact::Quotient { quotient, of } => vec![quotient, of],
            Fact::Sum { total, parts } => std::iter::once(total).chain(parts).collect(),
            Fact::Zeros { bundle, .. } | Fact::BaseLocus { bundle, .. } => vec![bundle],
            Fact::C1Zero(_) | Fact::NefBigTwist { .. } | Fact::Cotangent { .. } => Vec::new(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Extension {
                middle,
                quotient,
                sub,
            } => write!(f, "fact extension {middle} of {quotient} by {sub}"),
            Fact::Summand { part, whole } => write!(f, "fact summand {part} of {whole}"),
            Fact::Quotient { quotient, of } => write!(f, "fact quotient {quotient} of {of}"),
            Fact::Sum { total, parts } => {
                let ps: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "fact sum {total} of {}", ps.join(", "))
            }
            Fact::C1Zero(e) => write!(f, "fact c1_zero {e}"),
            Fact::Zeros { zero, bundle } => write!(f, "fact zeros {zero} of {bundle}"),
            Fact::NefBigTwist { line, divisor } => {
                write!(f, "fact nef_big_twist {line} by {divisor}")
            }
            Fact::BaseLocus { bundle, dim } => write!(f, "fact base_locus {bundle} dim={dim}"),
            Fact::Cotangent { bundle, variety } => {
                write!(f, "fact cotangent {bundle} of {variety}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactDecl {
    pub fact: Fact,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assumed {
    Nef,
    Big,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assumption {
    pub property: Assumed,
    pub subject: Expr,
    pub span: Span,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.property {
            Assumed::Nef => "nef",
            Assumed::Big => "big",
        };
        write!(f, "assume {p}({})", self.subject)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryKind {
    Acyclic,
    Semipositive,
    Positive,
    Nef,
    Big,
    StronglySemistable,
    VanishingRange,
    KoszulRestriction,
    Connectedness,
    Invariant,
}

impl QueryKind {
    const ALL: [QueryKind; 10] = [
        QueryKind::Acyclic,
        QueryKind::Semipositive,
        QueryKind::Positive,
        QueryKind::Nef,
        QueryKind::Big,
        QueryKind::StronglySemistable,
        QueryKind::VanishingRange,
        QueryKind::KoszulRestriction,
        QueryKind::Connectedness,
        QueryKind::Invariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Acyclic => "acyclic",
            QueryKind::Semipositive => "semipositive",
            QueryKind::Positive => "positive",
            QueryKind::Nef => "nef",
            QueryKind::Big => "big",
            QueryKind::StronglySemistable => "strongly_semistable",
            QueryKind::VanishingRange => "vanishing_range",
            QueryKind::KoszulRestriction => "koszul_restriction",
            QueryKind::Connectedness => "connectedness",
            QueryKind::Invariant => "invariant",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub kind: QueryKind,
    /// For `connectedness(Z)` this is `structure(Z)`.
    pub subject: Expr,
    /// The zero scheme named by `koszul_restriction(F, Z)`.
    pub zero: Option<String>,
    pub span: Span,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.subject.kind, &self.zero) {
            (QueryKind::Connectedness, ExprKind::Structure(z), _) => {
                write!(f, "query connectedness({z})")
            }
            (_, _, Some(z)) => write!(f, "query {}({}, {z})", self.kind.name(), self.subject),
            _ => write!(f, "query {}({})", self.kind.name(), self.subject),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    pub varieties: BTreeMap<String, Variety>,
    pub morphisms: BTreeMap<String, Morphism>,
    pub divisors: BTreeMap<String, Divisor>,
    pub line_bundles: BTreeMap<String, LineBundle>,
    pub bundles: BTreeMap<String, Bundle>,
    pub sheaves: BTreeMap<String, SheafDecl>,
    pub facts: Vec<FactDecl>,
    pub assumptions: Vec<Assumption>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub context: Context,
    pub queries: Vec<Query>,
}

/// A bookkeeping problem found while computing ambient varieties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

fn diag(span: Span, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        span,
        message: message.into(),
    }
}

impl Context {
    pub fn has_flag(&self, name: &str, flag: Flag) -> bool {
        let set = self
            .varieties
            .get(name)
            .map(|v| &v.flags)
            .or_else(|| self.morphisms.get(name).map(|m| &m.flags))
            .or_else(|| self.divisors.get(name).map(|d| &d.flags))
            .or_else(|| self.line_bundles.get(name).map(|l| &l.flags))
            .or_else(|| self.bundles.get(name).map(|b| &b.flags));
        set.is_some_and(|s| s.contains(&flag))
    }

    pub fn dim(&self, variety: &str) -> Option<usize> {
        self.varieties.get(variety).map(|v| v.dim)
    }

    fn is_declared(&self, name: &str) -> bool {
        self.varieties.contains_key(name)
            || self.morphisms.contains_key(name)
            || self.divisors.contains_key(name)
            || self.line_bundles.contains_key(name)
            || self.bundles.contains_key(name)
            || self.sheaves.contains_key(name)
    }

    /// The variety an expression lives on.
    pub fn ambient(&self, e: &Expr) -> Result<String, Diagnostic> {
        use ExprKind::*;
        let missing = |n: &str| diag(e.span, format!("unknown name `{n}`"));
        match &e.kind {
            Omega(x) | Structure(x) => Ok(x.clone()),
            Line(l) => self
                .line_bundles
                .get(l)
                .map(|l| l.variety.clone())
                .ok_or_else(|| missing(l)),
            Bundle(b) => self
                .bundles
                .get(b)
                .map(|b| b.variety.clone())
                .ok_or_else(|| missing(b)),
            Sheaf(s) => match self.sheaves.get(s) {
                Some(SheafDecl::Opaque { variety, .. }) => Ok(variety.clone()),
                _ => Err(missing(s)),
            },
            Push(m, x) | RPush(_, m, x) => {
                let f = self.morphisms.get(m).ok_or_else(|| missing(m))?;
                let a = self.ambient(x)?;
                if a != f.source {
                    return Err(diag(
                        e.span,
                        format!(
                            "pushforward along {m}: {} -> {} of a sheaf on {a}",
                            f.source, f.target
                        ),
                    ));
                }
                Ok(f.target.clone())
            }
            Pull(m, x) => {
                let f = self.morphisms.get(m).ok_or_else(|| missing(m))?;
                let a = self.ambient(x)?;
                if a != f.target {
                    return Err(diag(
                        e.span,
                        format!(
                            "pullback along {m}: {} -> {} of a sheaf on {a}",
                            f.source, f.target
                        ),
                    ));
                }
                Ok(f.source.clone())
            }
            OmegaRel(m) => self
                .morphisms
                .get(m)
                .map(|f| f.source.clone())
                .ok_or_else(|| missing(m)),
            Tensor(fs) => {
                let mut amb: Option<String> = None;
                for x in fs {
                    let a = self.ambient(x)?;
                    match &amb {
                        Some(b) if *b != a => {
                            return Err(diag(
                                e.span,
                                format!("tensor product of sheaves on {b} and {a}"),
                            ))
                        }
                        _ => amb = Some(a),
                    }
                }
                amb.ok_or_else(|| diag(e.span, "empty tensor product"))
            }
            Schur(_, x) | SchurPlus(_, x) | Det(x) | Dual(x) => {
                let a = self.ambient(x)?;
                if !self.is_locally_free(x) {
                    return Err(diag(
                        e.span,
                        format!("{} needs a locally free argument, got {x}", e.kind_name()),
                    ));
                }
                Ok(a)
            }
            TwistCeil(l, d) => {
                let lb = self.line_bundles.get(l).ok_or_else(|| missing(l))?;
                let dv = self.divisors.get(d).ok_or_else(|| missing(d))?;
                if lb.variety != dv.variety {
                    return Err(diag(
                        e.span,
                        format!("{l} lives on {} but {d} on {}", lb.variety, dv.variety),
                    ));
                }
                Ok(lb.variety.clone())
            }
        }
    }

    pub fn is_locally_free(&self, e: &Expr) -> bool {
        use ExprKind::*;
        match &e.kind {
            Omega(x) => self.has_flag(x, Smooth),
            Structure(_) | Line(_) | Bundle(_) | TwistCeil(..) => true,
            Schur(..) | SchurPlus(..) | Det(_) | Dual(_) => true,
            Sheaf(_) | RPush(..) => false,
            Push(m, x) => {
                matches!(&x.kind, OmegaRel(n) if n == m) && self.has_flag(m, SmoothMorphism)
            }
            Pull(_, x) => self.is_locally_free(x),
            OmegaRel(m) => self.has_flag(m, SmoothMorphism),
            Tensor(fs) => fs.iter().all(|x| self.is_locally_free(x)),
        }
    }

    /// Rank of a locally free expression, when it can be read off.
    pub fn rank(&self, e: &Expr) -> Option<u128> {
        use ExprKind::*;
        match &e.kind {
            Omega(_) | OmegaRel(_) => self.is_locally_free(e).then_some(1),
            Structure(_) | Line(_) | TwistCeil(..) | Det(_) => Some(1),
            Bundle(b) => self.bundles.get(b).map(|b| b.rank as u128),
            Pull(_, x) | Dual(x) => self.rank(x),
            Tensor(fs) => fs.iter().map(|x| self.rank(x)).product(),
            Schur(l, x) => Some(schur_dim(l, usize::try_from(self.rank(x)?).ok()?)),
            SchurPlus(l, x) => {
                let r = usize::try_from(self.rank(x)?).ok()?;
                Some(l.plus_shift(r).map_or(0, |p| schur_dim(&p, r)))
            }
            Sheaf(_) | Push(..) | RPush(..) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Unexpected {
        found: String,
        expected: Vec<String>,
    },
    Unresolved(String),
    Duplicate(String),
    BadNumber(String),
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(span: Span, kind: ParseErrorKind) -> Self {
        ParseError {
            line: span.line,
            col: span.col,
            kind,
        }
    }

    pub fn expected(&self) -> &[String] {
        match &self.kind {
            ParseErrorKind::Unexpected { expected, .. } => expected,
            _ => &[],
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Unexpected { found, expected } => {
                write!(
                    f,
                    "unexpected {found}, expected one of: {}",
                    expected.join(", ")
                )
            }
            ParseErrorKind::Unresolved(n) => write!(f, "unresolved name `{n}`"),
            ParseErrorKind::Duplicate(n) => write!(f, "`{n}` is already declared"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
            ParseErrorKind::Invalid(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = it.peek() {
        let span = Span { line, col };
        if c == '\n' {
            it.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while it.peek().is_some_and(|&c| c != '\n') {
                it.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = it.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    it.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(s),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = it.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    it.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let bad = || ParseError::new(span, ParseErrorKind::BadNumber(s.clone()));
            if s.len() > 1 && s.starts_with('0') {
                return Err(bad());
            }
            let n = s.parse().map_err(|_| bad())?;
            out.push(Token {
                tok: Tok::Int(n),
                span,
            });
            continue;
        }
        it.next();
        col += 1;
        let sym = match c {
            '-' if it.peek() == Some(&'>') => {
                it.next();
                col += 1;
                "->"
            }
            '-' => "-",
            '{' => "{",
            '}' => "}",
            '(' => "(",
            ')' => ")",
            '[' => "[",
            ']' => "]",
            ',' => ",",
            '=' => "=",
            ':' => ":",
            '*' => "*",
            '/' => "/",
            _ => {
                return Err(ParseError::new(
                    span,
                    ParseErrorKind::Invalid(format!("unexpected character `{c}`")),
                ))
            }
        };
        out.push(Token {
            tok: Tok::Sym(sym),
            span,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum NameKind {
    Variety,
    Morphism,
    Divisor,
    Line,
    Bundle,
    Sheaf,
}

impl NameKind {
    fn noun(self) -> &'static str {
        match self {
            NameKind::Variety => "variety",
            NameKind::Morphism => "morphism",
            NameKind::Divisor => "divisor",
            NameKind::Line => "line bundle",
            NameKind::Bundle => "bundle",
            NameKind::Sheaf => "sheaf",
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    doc: Document,
}

enum BodyValue {
    Int(usize),
    Components(Vec<(String, Rational)>),
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<S: AsRef<str>>(&self, expected: &[S]) -> ParseError {
        let t = self.peek();
        ParseError::new(
            t.span,
            ParseErrorKind::Unexpected {
                found: t.tok.describe(),
                expected: expected.iter().map(|s| s.as_ref().to_string()).collect(),
            },
        )
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(t) if *t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[format!("`{s}`")]))
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(t) if t == w)
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.at_word(w) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[format!("`{w}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn int(&mut self) -> PResult<(usize, Span)> {
        match self.peek().tok {
            Tok::Int(n) => Ok((n, self.bump().span)),
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn fresh_name(&mut self, what: &str) -> PResult<(String, Span)> {
        let (name, span) = self.ident(what)?;
        if is_reserved(&name) {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Invalid(format!("`{name}` is a reserved word")),
            ));
        }
        if self.doc.context.is_declared(&name) {
            return Err(ParseError::new(span, ParseErrorKind::Duplicate(name)));
        }
        Ok((name, span))
    }

    fn kind_of(&self, name: &str) -> Option<NameKind> {
        let c = &self.doc.context;
        if c.varieties.contains_key(name) {
            Some(NameKind::Variety)
        } else if c.morphisms.contains_key(name) {
            Some(NameKind::Morphism)
        } else if c.divisors.contains_key(name) {
            Some(NameKind::Divisor)
        } else if c.line_bundles.contains_key(name) {
            Some(NameKind::Line)
        } else if c.bundles.contains_key(name) {
            Some(NameKind::Bundle)
        } else if c.sheaves.contains_key(name) {
            Some(NameKind::Sheaf)
        } else {
            None
        }
    }

    /// Reads a name that must already be declared as `want`.
    fn reference(&mut self, want: NameKind) -> PResult<(String, Span)> {
        let (name, span) = self.ident(&format!("{} name", want.noun()))?;
        match self.kind_of(&name) {
            None => Err(ParseError::new(span, ParseErrorKind::Unresolved(name))),
            Some(k) if k != want => Err(ParseError::new(
                span,
                ParseErrorKind::Invalid(format!(
                    "`{name}` is a {}, expected a {}",
                    k.noun(),
                    want.noun()
                )),
            )),
            Some(_) => Ok((name, span)),
        }
    }

    fn parse_file(&mut self) -> PResult<()> {
        loop {
            let t = self.peek().clone();
            let Tok::Ident(word) = &t.tok else {
                if t.tok == Tok::Eof {
                    return Ok(());
                }
                return Err(self.unexpected(DECL_KEYWORDS));
            };
            match word.as_str() {
                "variety" => self.variety()?,
                "morphism" => self.morphism()?,
                "divisor" => self.divisor()?,
                "linebundle" => self.line_bundle()?,
                "bundle" => self.bundle()?,
                "sheaf" => self.sheaf()?,
                "fact" => self.fact()?,
                "assume" => self.assume()?,
                "query" => self.query()?,
                _ => return Err(self.unexpected(DECL_KEYWORDS)),
            }
        }
    }

    fn body(
        &mut self,
        allowed: &[Flag],
        keys: &[&str],
    ) -> PResult<(BTreeSet<Flag>, BTreeMap<String, BodyValue>)> {
        let mut flags = BTreeSet::new();
        let mut values = BTreeMap::new();
        if !self.eat_sym("{") {
            return Ok((flags, values));
        }
        let mut expected: Vec<String> = keys.iter().map(|k| format!("{k}=")).collect();
        expected.extend(allowed.iter().map(|f| f.name().to_string()));
        if self.eat_sym("}") {
            return Ok((flags, values));
        }
        loop {
            let Tok::Ident(word) = self.peek().tok.clone() else {
                return Err(self.unexpected(&expected));
            };
            if keys.contains(&word.as_str()) {
                self.bump();
                self.expect_sym("=")?;
                let v = if word == "components" {
                    BodyValue::Components(self.components()?)
                } else {
                    BodyValue::Int(self.int()?.0)
                };
                values.insert(word, v);
            } else {
                match Flag::from_name(&word).filter(|f| allowed.contains(f)) {
                    Some(f) => {
                        self.bump();
                        flags.insert(f);
                    }
                    None => return Err(self.unexpected(&expected)),
                }
            }
            if self.eat_sym("}") {
                return Ok((flags, values));
            }
            if !self.eat_sym(",") {
                return Err(self.unexpected(&["`,`", "`}`"]));
            }
        }
    }

    fn components(&mut self) -> PResult<Vec<(String, Rational)>> {
        self.expect_sym("[")?;
        let mut out = Vec::new();
        if self.eat_sym("]") {
            return Ok(out);
        }
        loop {
            let (name, span) = self.ident("component name")?;
            if out.iter().any(|(c, _)| *c == name) {
                return Err(ParseError::new(span, ParseErrorKind::Duplicate(name)));
            }
            self.expect_sym(":")?;
            let neg = self.eat_sym("-");
            let (num, _) = self.int()?;
            let den = if self.eat_sym("/") {
                let (d, span) = self.int()?;
                if d == 0 {
                    return Err(ParseError::new(span, ParseErrorKind::BadNumber("0".into())));
                }
                d
            } else {
                1
            };
            let mut q = Rational::new(BigInt::from(num), BigInt::from(den));
            if neg {
                q = -q;
            }
            out.push((name, q));
            if self.eat_sym("]") {
                return Ok(out);
            }
            if !self.eat_sym(",") {
                return Err(self.unexpected(&["`,`", "`]`"]));
            }
        }
    }

    fn required(values: &BTreeMap<String, BodyValue>, key: &str, span: Span) -> PResult<usize> {
        match values.get(key) {
            Some(BodyValue::Int(n)) => Ok(*n),
            _ => Err(ParseError::new(
                span,
                ParseErrorKind::Invalid(format!("missing `{key}=`")),
            )),
        }
    }

    fn variety(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("variety name")?;
        let (flags, values) = self.body(VARIETY_FLAGS, &["dim"])?;
        let dim = Self::required(&values, "dim", span)?;
        self.doc
            .context
            .varieties
            .insert(name, Variety { dim, flags, span });
        Ok(())
    }

    fn morphism(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("morphism name")?;
        self.expect_sym(":")?;
        let (source, _) = self.reference(NameKind::Variety)?;
        self.expect_sym("->")?;
        let (target, _) = self.reference(NameKind::Variety)?;
        let (flags, _) = self.body(MORPHISM_FLAGS, &[])?;
        self.doc.context.morphisms.insert(
            name,
            Morphism {
                source,
                target,
                flags,
                span,
            },
        );
        Ok(())
    }

    fn divisor(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("divisor name")?;
        self.expect_word("on")?;
        let (variety, _) = self.reference(NameKind::Variety)?;
        let (flags, mut values) = self.body(DIVISOR_FLAGS, &["components"])?;
        let components = match values.remove("components") {
            Some(BodyValue::Components(c)) => c,
            _ => Vec::new(),
        };
        self.doc.context.divisors.insert(
            name,
            Divisor {
                variety,
                components,
                flags,
                span,
            },
        );
        Ok(())
    }

    fn line_bundle(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("line bundle name")?;
        self.expect_word("on")?;
        let (variety, _) = self.reference(NameKind::Variety)?;
        let (flags, _) = self.body(LINE_FLAGS, &[])?;
        self.doc.context.line_bundles.insert(
            name,
            LineBundle {
                variety,
                flags,
                span,
            },
        );
        Ok(())
    }

    fn bundle(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("bundle name")?;
        self.expect_word("on")?;
        let (variety, _) = self.reference(NameKind::Variety)?;
        let (flags, values) = self.body(BUNDLE_FLAGS, &["rank"])?;
        let rank = Self::required(&values, "rank", span)?;
        if rank == 0 {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Invalid("bundle rank must be at least 1".into()),
            ));
        }
        self.doc.context.bundles.insert(
            name,
            Bundle {
                variety,
                rank,
                flags,
                span,
            },
        );
        Ok(())
    }

    fn sheaf(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let (name, _) = self.fresh_name("sheaf name")?;
        let decl = if self.eat_sym("=") {
            SheafDecl::Alias {
                definition: self.expr()?,
                span,
            }
        } else if self.at_word("on") {
            self.bump();
            let (variety, _) = self.reference(NameKind::Variety)?;
            SheafDecl::Opaque { variety, span }
        } else {
            return Err(self.unexpected(&["`=`", "`on`"]));
        };
        self.doc.context.sheaves.insert(name, decl);
        Ok(())
    }

    fn fact(&mut self) -> PResult<()> {
        let span = self.bump().span;
        const KINDS: &[&str] = &[
            "extension",
            "summand",
            "quotient",
            "sum",
            "c1_zero",
            "zeros",
            "nef_big_twist",
            "base_locus",
            "cotangent",
        ];
        let Tok::Ident(kind) = self.peek().tok.clone() else {
            return Err(self.unexpected(KINDS));
        };
        if !KINDS.contains(&kind.as_str()) {
            return Err(self.unexpected(KINDS));
        }
        self.bump();
        let fact = match kind.as_str() {
            "extension" => {
                let middle = self.expr()?;
                self.expect_word("of")?;
                let quotient = self.expr()?;
                self.expect_word("by")?;
                let sub = self.expr()?;
                Fact::Extension {
                    middle,
                    quotient,
                    sub,
                }
            }
            "summand" => {
                let part = self.expr()?;
                self.expect_word("of")?;
                Fact::Summand {
                    part,
                    whole: self.expr()?,
                }
            }
            "quotient" => {
                let quotient = self.expr()?;
                self.expect_word("of")?;
                Fact::Quotient {
                    quotient,
                    of: self.expr()?,
                }
            }
            "sum" => {
                let total = self.expr()?;
                self.expect_word("of")?;
                let mut parts = vec![self.expr()?];
                while self.eat_sym(",") {
                    parts.push(self.expr()?);
                }
                Fact::Sum { total, parts }
            }
            "c1_zero" => Fact::C1Zero(self.reference(NameKind::Bundle)?.0),
            "zeros" => {
                let (zero, _) = self.reference(NameKind::Variety)?;
                self.expect_word("of")?;
                Fact::Zeros {
                    zero,
                    bundle: self.expr()?,
                }
            }
            "nef_big_twist" => {
                let (line, _) = self.reference(NameKind::Line)?;
                self.expect_word("by")?;
                let (divisor, _) = self.reference(NameKind::Divisor)?;
                Fact::NefBigTwist { line, divisor }
            }
            "base_locus" => {
                let bundle = self.expr()?;
                self.expect_word("dim")?;
                self.expect_sym("=")?;
                Fact::BaseLocus {
                    bundle,
                    dim: self.int()?.0,
                }
            }
            _ => {
                let (bundle, _) = self.reference(NameKind::Bundle)?;
                self.expect_word("of")?;
                let (variety, _) = self.reference(NameKind::Variety)?;
                Fact::Cotangent { bundle, variety }
            }
        };
        self.doc.context.facts.push(FactDecl { fact, span });
        Ok(())
    }

    fn assume(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let property = if self.at_word("nef") {
            Assumed::Nef
        } else if self.at_word("big") {
            Assumed::Big
        } else {
            return Err(self.unexpected(&["nef", "big"]));
        };
        self.bump();
        self.expect_sym("(")?;
        let subject = self.expr()?;
        self.expect_sym(")")?;
        self.doc.context.assumptions.push(Assumption {
            property,
            subject,
            span,
        });
        Ok(())
    }

    fn query(&mut self) -> PResult<()> {
        let span = self.bump().span;
        let names: Vec<&str> = QueryKind::ALL.iter().map(|k| k.name()).collect();
        let kind = match &self.peek().tok {
            Tok::Ident(w) => QueryKind::from_name(w),
            _ => None,
        }
        .ok_or_else(|| self.unexpected(&names))?;
        self.bump();
        self.expect_sym("(")?;
        let (subject, zero) = match kind {
            QueryKind::Connectedness => {
                let (z, s) = self.reference(NameKind::Variety)?;
                (Expr::structure(&z).at(s), None)
            }
            QueryKind::KoszulRestriction => {
                let f = self.expr()?;
                self.expect_sym(",")?;
                (f, Some(self.reference(NameKind::Variety)?.0))
            }
            _ => (self.expr()?, None),
        };
        self.expect_sym(")")?;
        self.doc.queries.push(Query {
            kind,
            subject,
            zero,
            span,
        });
        Ok(())
    }

    fn expr(&mut self) -> PResult<Expr> {
        let first = self.atom()?;
        if !self.at_sym("*") {
            return Ok(first);
        }
        let span = first.span;
        let mut factors = vec![first];
        while self.eat_sym("*") {
            factors.push(self.atom()?);
        }
        Ok(Expr::tensor(factors).at(span))
    }

    fn atom(&mut self) -> PResult<Expr> {
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        let (name, span) = self.ident("expression")?;
        if FUNCTIONS.contains(&name.as_str()) {
            self.expect_sym("(")?;
            let kind = self.call(&name)?;
            self.expect_sym(")")?;
            return Ok(Expr::new(kind).at(span));
        }
        if RESERVED.contains(&name.as_str()) || DECL_KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Unexpected {
                    found: format!("`{name}`"),
                    expected: vec!["expression".into()],
                },
            ));
        }
        let kind = match self.kind_of(&name) {
            None => return Err(ParseError::new(span, ParseErrorKind::Unresolved(name))),
            Some(NameKind::Line) => ExprKind::Line(name),
            Some(NameKind::Bundle) => ExprKind::Bundle(name),
            Some(NameKind::Sheaf) => match &self.doc.context.sheaves[&name] {
                SheafDecl::Alias { definition, .. } => return Ok(definition.clone().at(span)),
                SheafDecl::Opaque { .. } => ExprKind::Sheaf(name),
            },
            Some(k) => {
                return Err(ParseError::new(
                    span,
                    ParseErrorKind::Invalid(format!("`{name}` is a {}, not a sheaf", k.noun())),
                ))
            }
        };
        Ok(Expr::new(kind).at(span))
    }

    fn call(&mut self, name: &str) -> PResult<ExprKind> {
        use ExprKind::*;
        Ok(match name {
            "omega" => Omega(self.reference(NameKind::Variety)?.0),
            "structure" => Structure(self.reference(NameKind::Variety)?.0),
            "omega_rel" => OmegaRel(self.reference(NameKind::Morphism)?.0),
            "push" | "pull" => {
                let (f, _) = self.reference(NameKind::Morphism)?;
                self.expect_sym(",")?;
                let e = Box::new(self.expr()?);
                if name == "push" {
                    Push(f, e)
                } else {
                    Pull(f, e)
                }
            }
            "rpush" => {
                let (i, _) = self.int()?;
                self.expect_sym(",")?;
                let (f, _) = self.reference(NameKind::Morphism)?;
                self.expect_sym(",")?;
                RPush(i, f, Box::new(self.expr()?))
            }
            "schur" | "schur_plus" => {
                let p = self.partition()?;
                self.expect_sym(",")?;
                let e = Box::new(self.expr()?);
                if name == "schur" {
                    Schur(p, e)
                } else {
                    SchurPlus(p, e)
                }
            }
            "det" => Det(Box::new(self.expr()?)),
            "dual" => Dual(Box::new(self.expr()?)),
            _ => {
                let (l, _) = self.reference(NameKind::Line)?;
                self.expect_sym(",")?;
                let (d, _) = self.reference(NameKind::Divisor)?;
                TwistCeil(l, d)
            }
        })
    }

    fn partition(&mut self) -> PResult<Partition> {
        let span = self.expect_sym("[")?;
        let mut parts = Vec::new();
        if !self.eat_sym("]") {
            loop {
                parts.push(self.int()?.0);
                if self.eat_sym("]") {
                    break;
                }
                if !self.eat_sym(",") {
                    return Err(self.unexpected(&["`,`", "`]`"]));
                }
            }
        }
        Partition::new(parts)
            .map_err(|e| ParseError::new(span, ParseErrorKind::Invalid(e.to_string())))
    }
}

/// Parses a `.gad` document. Every name must be declared before use.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        doc: Document::default(),
    };
    p.parse_file()?;
    Ok(p.doc)
}

fn body_text(items: Vec<String>) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!(" {{ {} }}", items.join(", "))
    }
}

fn flag_items(flags: &BTreeSet<Flag>) -> impl Iterator<Item = String> + '_ {
    flags.iter().map(|f| f.name().to_string())
}

/// Canonical text: declarations grouped by kind, names sorted within a group,
/// aliases expanded into their definitions.
pub fn pretty_print(doc: &Document) -> String {
    let c = &doc.context;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    for (n, v) in &c.varieties {
        let items = std::iter::once(format!("dim={}", v.dim))
            .chain(flag_items(&v.flags))
            .collect();
        line(format!("variety {n}{}", body_text(items)));
    }
    for (n, m) in &c.morphisms {
        let items = flag_items(&m.flags).collect();
        line(format!(
            "morphism {n} : {} -> {}{}",
            m.source,
            m.target,
            body_text(items)
        ));
    }
    for (n, d) in &c.divisors {
        let comps: Vec<String> = d
            .components
            .iter()
            .map(|(c, q)| format!("{c}:{q}"))
            .collect();
        let items = std::iter::once(format!("components=[{}]", comps.join(", ")))
            .chain(flag_items(&d.flags))
            .collect();
        line(format!("divisor {n} on {}{}", d.variety, body_text(items)));
    }
    for (n, l) in &c.line_bundles {
        line(format!(
            "linebundle {n} on {}{}",
            l.variety,
            body_text(flag_items(&l.flags).collect())
        ));
    }
    for (n, b) in &c.bundles {
        let items = std::iter::once(format!("rank={}", b.rank))
            .chain(flag_items(&b.flags))
            .collect();
        line(format!("bundle {n} on {}{}", b.variety, body_text(items)));
    }
    for (n, s) in &c.sheaves {
        if let SheafDecl::Opaque { variety, .. } = s {
            line(format!("sheaf {n} on {variety}"));
        }
    }
    for (n, s) in &c.sheaves {
        if let SheafDecl::Alias { definition, .. } = s {
            line(format!("sheaf {n} = {definition}"));
        }
    }
    for f in &c.facts {
        line(f.fact.to_string());
    }
    for a in &c.assumptions {
        line(a.to_string());
    }
    for q in &doc.queries {
        line(q.to_string());
    }
    out
}

fn node(
    kind: &str,
    value: Option<String>,
    attrs: Value,
    children: Vec<Value>,
    span: Span,
) -> Value {
    json!({
        "kind": kind,
        "value": value,
        "attributes": attrs,
        "children": children,
        "span": span,
    })
}

pub fn expr_json(e: &Expr) -> Value {
    use ExprKind::*;
    let value = match &e.kind {
        Omega(n) | Structure(n) | Line(n) | Bundle(n) | Sheaf(n) | OmegaRel(n) => Some(n.clone()),
        Push(m, _) | Pull(m, _) => Some(m.clone()),
        RPush(i, m, _) => Some(format!("{i},{m}")),
        Schur(l, _) | SchurPlus(l, _) => Some(bracket(l)),
        TwistCeil(l, d) => Some(format!("{l},{d}")),
        Tensor(_) | Det(_) | Dual(_) => None,
    };
    let children = e.children().into_iter().map(expr_json).collect();
    node(e.kind_name(), value, json!({}), children, e.span)
}

/// JSON export of the syntax tree: every node is
/// `{kind, value, attributes, children, span}`.
pub fn to_json_ast(doc: &Document) -> Value {
    let c = &doc.context;
    let flags = |fs: &BTreeSet<Flag>| -> Vec<&str> { fs.iter().map(|f| f.name()).collect() };
    let mut decls = Vec::new();
    for (n, v) in &c.varieties {
        decls.push(node(
            "variety",
            Some(n.clone()),
            json!({"dim": v.dim, "flags": flags(&v.flags)}),
            vec![],
            v.span,
        ));
    }
    for (n, m) in &c.morphisms {
        decls.push(node(
            "morphism",
            Some(n.clone()),
            json!({"source": m.source, "target": m.target, "flags": flags(&m.flags)}),
            vec![],
            m.span,
        ));
    }
    for (n, d) in &c.divisors {
        let comps: Vec<Value> = d
            .components
            .iter()
            .map(|(c, q)| json!({"component": c, "coefficient": q.to_string()}))
            .collect();
        decls.push(node(
            "divisor",
            Some(n.clone()),
            json!({"variety": d.variety, "components": comps, "flags": flags(&d.flags)}),
            vec![],
            d.span,
        ));
    }
    for (n, l) in &c.line_bundles {
        decls.push(node(
            "linebundle",
            Some(n.clone()),
            json!({"variety": l.variety, "flags": flags(&l.flags)}),
            vec![],
            l.span,
        ));
    }
    for (n, b) in &c.bundles {
        decls.push(node(
            "bundle",
            Some(n.clone()),
            json!({"variety": b.variety, "rank": b.rank, "flags": flags(&b.flags)}),
            vec![],
            b.span,
        ));
    }
    for (n, s) in &c.sheaves {
        decls.push(match s {
            SheafDecl::Opaque { variety, span } => node(
                "sheaf",
                Some(n.clone()),
                json!({"variety": variety}),
                vec![],
                *span,
            ),
            SheafDecl::Alias { definition, span } => node(
                "alias",
                Some(n.clone()),
                json!({}),
                vec![expr_json(definition)],
                *span,
            ),
        });
    }
    for f in &c.facts {
        let kind = f.fact.to_string();
        let kind = kind
            .split_whitespace()
            .nth(1)
            .unwrap_or_default()
            .to_string();
        let attrs = match &f.fact {
            Fact::C1Zero(e) => json!({"bundle": e}),
            Fact::Zeros { zero, .. } => json!({"zero": zero}),
            Fact::NefBigTwist { line, divisor } => json!({"line": line, "divisor": divisor}),
            Fact::BaseLocus { dim, .. } => json!({"dim": dim}),
            Fact::Cotangent { bundle, variety } => json!({"bundle": bundle, "variety": variety}),
            _ => json!({}),
        };
        let children = f.fact.expressions().into_iter().map(expr_json).collect();
        decls.push(node(&format!("fact.{kind}"), None, attrs, children, f.span));
    }
    for a in &c.assumptions {
        let p = match a.property {
            Assumed::Nef => "nef",
            Assumed::Big => "big",
        };
        decls.push(node(
            &format!("assume.{p}"),
            None,
            json!({}),
            vec![expr_json(&a.subject)],
            a.span,
        ));
    }
    for q in &doc.queries {
        decls.push(node(
            &format!("query.{}", q.kind.name()),
            None,
            json!({"zero": q.zero}),
            vec![expr_json(&q.subject)],
            q.span,
        ));
    }
    node("document", None, json!({}), decls, Span { line: 1, col: 1 })
}

/// A flag added by [`validate`], with the flag it follows from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedFlag {
    pub subject: String,
    pub flag: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Validation {
    /// The input context with flags closed under the implications.
    pub context: Context,
    pub derived: Vec<DerivedFlag>,
    pub warnings: Vec<Diagnostic>,
    pub errors: Vec<Diagnostic>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// Why `subject` carries `flag`: `declared`, or the flag it was derived from.
    pub fn origin(&self, subject: &str, flag: Flag) -> String {
        self.derived
            .iter()
            .find(|d| d.subject == subject && d.flag == flag.name())
            .map_or_else(|| "declared".to_string(), |d| format!("from {}", d.reason))
    }
}

fn close(
    name: &str,
    flags: &mut BTreeSet<Flag>,
    rules: &[(Flag, &[Flag])],
    derived: &mut Vec<DerivedFlag>,
) {
    loop {
        let mut changed = false;
        for (premise, conclusions) in rules {
            if !flags.contains(premise) {
                continue;
            }
            for c in *conclusions {
                if flags.insert(*c) {
                    changed = true;
                    derived.push(DerivedFlag {
                        subject: name.to_string(),
                        flag: c.name().to_string(),
                        reason: premise.name().to_string(),
                    });
                }
            }
        }
        if !changed {
            return;
        }
    }
}

const VARIETY_RULES: &[(Flag, &[Flag])] = &[(Smooth, &[RationalSingularities])];
const MORPHISM_RULES: &[(Flag, &[Flag])] = &[
    (Birational, &[GenericallyFinite, Surjective]),
    (Etale, &[SmoothMorphism]),
];
const LINE_RULES: &[(Flag, &[Flag])] = &[(VeryAmple, &[Ample]), (Ample, &[Nef, Big])];
const BUNDLE_RULES: &[(Flag, &[Flag])] = &[
    (Ample, &[Nef, Big]),
    (GloballyGenerated, &[Nef]),
    (
        UnitaryFlat,
        &[StronglySemistable, C1Zero, Nef, UniformlyNef],
    ),
];

/// Closes declared flags and checks ambient varieties. Only adds flags;
/// running it on its own output adds nothing.
pub fn validate(doc: &Document) -> Validation {
    let mut ctx = doc.context.clone();
    let mut derived = Vec::new();
    let mut warnings = Vec::new();
    let mut errors = Vec::new();

    for f in &doc.context.facts {
        if let Fact::C1Zero(e) = &f.fact {
            let b = ctx.bundles.get_mut(e).expect("resolved at parse time");
            if b.flags.insert(C1Zero) {
                derived.push(DerivedFlag {
                    subject: e.clone(),
                    flag: C1Zero.name().into(),
                    reason: "fact c1_zero".into(),
                });
            }
        }
    }
    for (n, v) in ctx.varieties.iter_mut() {
        close(n, &mut v.flags, VARIETY_RULES, &mut derived);
    }
    for (n, m) in ctx.morphisms.iter_mut() {
        close(n, &mut m.flags, MORPHISM_RULES, &mut derived);
    }
    for (n, l) in ctx.line_bundles.iter_mut() {
        close(n, &mut l.flags, LINE_RULES, &mut derived);
    }
    for (n, b) in ctx.bundles.iter_mut() {
        close(n, &mut b.flags, BUNDLE_RULES, &mut derived);
    }

    for (n, l) in &ctx.line_bundles {
        if l.flags.contains(&Ample) && !ctx.has_flag(&l.variety, Projective) {
            warnings.push(diag(
                l.span,
                format!(
                    "{n} is ample on {}, which is not declared projective",
                    l.variety
                ),
            ));
        }
    }
    for (n, d) in &ctx.divisors {
        if d.flags.contains(&Reduced)
            && d.components
                .iter()
                .any(|(_, q)| *q != Rational::from_integer(1.into()))
        {
            warnings.push(diag(
                d.span,
                format!("{n} is declared reduced but has a coefficient other than 1"),
            ));
        }
    }

    let mut exprs: Vec<&Expr> = Vec::new();
    for s in ctx.sheaves.values() {
        if let SheafDecl::Alias { definition, .. } = s {
            exprs.push(definition);
        }
    }
    for f in &ctx.facts {
        exprs.extend(f.fact.expressions());
    }
    exprs.extend(ctx.assumptions.iter().map(|a| &a.subject));
    exprs.extend(doc.queries.iter().map(|q| &q.subject));
    let mut seen = BTreeSet::new();
    for e in exprs {
        if let Err(d) = ctx.ambient(e) {
            if seen.insert(d.message.clone()) {
                errors.push(d);
            }
            continue;
        }
        for s in e.subexpressions() {
            if let Some(w) = zero_warning(&ctx, s) {
                if seen.insert(w.message.clone()) {
                    warnings.push(w);
                }
            }
        }
    }

    for f in &ctx.facts {
        check_fact(&ctx, f, &mut errors);
    }
    for q in &doc.queries {
        if let Some(z) = &q.zero {
            if !ctx
                .facts
                .iter()
                .any(|f| matches!(&f.fact, Fact::Zeros { zero, .. } if zero == z))
            {
                warnings.push(diag(q.span, format!("no zeros fact declares {z}")));
            }
        }
    }

    Validation {
        context: ctx,
        derived,
        warnings,
        errors,
    }
}

fn zero_warning(ctx: &Context, e: &Expr) -> Option<Diagnostic> {
    match &e.kind {
        ExprKind::Schur(l, x) | ExprKind::SchurPlus(l, x) => {
            let r = ctx.rank(x)?;
            (l.length() as u128 > r).then(|| {
                diag(
                    e.span,
                    format!(
                        "{e} is the zero sheaf: length {} exceeds rank {r}",
                        l.length()
                    ),
                )
            })
        }
        ExprKind::RPush(i, m, _) => {
            let src = &ctx.morphisms.get(m)?.source;
            let d = ctx.dim(src)?;
            (*i > d).then(|| {
                diag(
                    e.span,
                    format!("{e} is the zero sheaf: {i} exceeds dim {src} = {d}"),
                )
            })
        }
        _ => None,
    }
}

fn check_fact(ctx: &Context, f: &FactDecl, errors: &mut Vec<Diagnostic>) {
    let same = |es: &[&Expr], errors: &mut Vec<Diagnostic>| {
        let ambs: BTreeSet<String> = es.iter().filter_map(|e| ctx.ambient(e).ok()).collect();
        if ambs.len() > 1 {
            errors.push(diag(
                f.span,
                format!("`{}` relates sheaves on different varieties", f.fact),
            ));
        }
    };
    match &f.fact {
        Fact::Extension { .. } | Fact::Summand { .. } | Fact::Sum { .. } => {
            same(&f.fact.expressions(), errors)
        }
        Fact::Quotient { quotient, of } => {
            same(&[quotient, of], errors);
            if !ctx.is_locally_free(quotient) || !ctx.is_locally_free(of) {
                errors.push(diag(
                    f.span,
                    format!("`{}` needs locally free sheaves", f.fact),
                ));
            }
        }
        Fact::Zeros { zero, bundle } => {
            if !ctx.is_locally_free(bundle) {
                errors.push(diag(f.span, format!("{bundle} is not locally free")));
            }
            if ctx.ambient(bundle).ok().as_deref() == Some(zero.as_str()) {
                errors.push(diag(
                    f.span,
                    format!("{zero} cannot be the zero scheme of a bundle on itself"),
                ));
            }
        }
        Fact::NefBigTwist { line, divisor } => {
            if ctx.line_bundles[line].variety != ctx.divisors[divisor].variety {
                errors.push(diag(
                    f.span,
                    format!("{line} and {divisor} live on different varieties"),
                ));
            }
        }
        Fact::BaseLocus { bundle, dim } => {
            if !ctx.is_locally_free(bundle) {
                errors.push(diag(f.span, format!("{bundle} is not locally free")));
            }
            if let Ok(x) = ctx.ambient(bundle) {
                if ctx.dim(&x).is_some_and(|d| *dim > d) {
                    errors.push(diag(
                        f.span,
                        format!("base locus dimension {dim} exceeds dim {x}"),
                    ));
                }
            }
        }
        Fact::Cotangent { bundle, variety } => {
            let b = &ctx.bundles[bundle];
            if b.variety != *variety || Some(b.rank) != ctx.dim(variety) {
                errors.push(diag(
                    f.span,
                    format!("{bundle} must be a rank dim({variety}) bundle on {variety}"),
                ));
            }
        }
        Fact::C1Zero(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "variety X { dim=2, smooth }\nlinebundle L on X { ample }\nsheaf F = omega(X) * L\nquery acyclic(F)";

    #[test]
    fn minimal_example() {
        let doc = parse(MINIMAL).unwrap();
        assert_eq!(doc.context.varieties.len(), 1);
        assert_eq!(doc.context.line_bundles.len(), 1);
        assert_eq!(doc.queries.len(), 1);
        assert_eq!(doc.queries[0].subject.to_string(), "omega(X) * L");
        assert_eq!(doc.queries[0].span.line, 4);
    }

    #[test]
    fn unresolved_name_points_at_token() {
        let err = parse("variety X { dim=1 }\nquery acyclic(G)").unwrap_err();
        assert_eq!((err.line, err.col), (2, 15));
        assert_eq!(err.kind, ParseErrorKind::Unresolved("G".into()));
    }

    #[test]
    fn leading_zero_is_rejected() {
        let src = "variety X { dim=1 }\nbundle E on X { rank=2 }\nquery positive(schur([02,1], E))";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadNumber("02".into()));
        assert_eq!((err.line, err.col), (3, 23));
    }

    #[test]
    fn expected_set_is_reported() {
        let err = parse("variety X { dim=1, shiny }").unwrap_err();
        assert_eq!((err.line, err.col), (1, 20));
        assert!(err.expected().contains(&"smooth".to_string()));
        assert!(err.expected().contains(&"dim=".to_string()));
    }

    #[test]
    fn zero_schur_power_warns() {
        let src = "variety X { dim=3 }\nbundle E on X { rank=2, nef }\nquery semipositive(schur([1,1,1], E))";
        let v = validate(&parse(src).unwrap());
        assert!(v.is_ok());
        assert_eq!(v.warnings.len(), 1);
        assert!(v.warnings[0].message.contains("zero sheaf"));
    }

    #[test]
    fn closure_of_flags() {
        let src = "variety X { dim=2, smooth, projective }\nlinebundle L on X { very_ample }\n\
                   bundle E on X { rank=2, globally_generated }\nbundle U on X { rank=3, unitary_flat }";
        let v = validate(&parse(src).unwrap());
        let c = &v.context;
        for f in [Ample, Nef, Big] {
            assert!(c.has_flag("L", f));
        }
        assert!(c.has_flag("E", Nef));
        assert!(!c.has_flag("E", Big));
        assert!(c.has_flag("U", StronglySemistable));
        assert!(c.has_flag("X", RationalSingularities));
        assert_eq!(v.origin("L", Nef), "from ample");
        assert_eq!(v.origin("X", Smooth), "declared");
    }

    #[test]
    fn validation_is_monotone_and_idempotent() {
        let src = "variety X { dim=2, smooth }\nlinebundle L on X { very_ample }\nbundle E on X { rank=2, unitary_flat }\nfact c1_zero E";
        let doc = parse(src).unwrap();
        let once = validate(&doc);
        for (n, l) in &doc.context.line_bundles {
            assert!(l.flags.is_subset(&once.context.line_bundles[n].flags));
        }
        let again = validate(&Document {
            context: once.context.clone(),
            queries: doc.queries.clone(),
        });
        assert!(again.derived.is_empty());
        assert_eq!(again.context, once.context);
    }

    #[test]
    fn tensor_of_mismatched_ambients_is_an_error() {
        let src = "variety X { dim=1 }\nvariety Y { dim=1 }\nlinebundle L on X\nlinebundle M on Y\nquery acyclic(L * M)";
        let v = validate(&parse(src).unwrap());
        assert_eq!(v.errors.len(), 1);
        assert!(v.errors[0].message.contains("tensor product"));
    }

    #[test]
    fn push_changes_ambient() {
        let src = "variety Y { dim=3, smooth }\nvariety X { dim=1 }\nmorphism f : Y -> X\nlinebundle L on X\n\
                   query acyclic(push(f, omega(Y)) * L)\nquery acyclic(push(f, L))";
        let doc = parse(src).unwrap();
        let c = &doc.context;
        assert_eq!(c.ambient(&doc.queries[0].subject).unwrap(), "X");
        assert!(c.ambient(&doc.queries[1].subject).is_err());
    }

    #[test]
    fn twist_ceil_rounds_up() {
        let src = "variety X { dim=2 }\ndivisor D on X { components=[A:1/2, B:-3/2, C:2] }";
        let doc = parse(src).unwrap();
        let ceil: Vec<i64> = doc.context.divisors["D"]
            .ceiling()
            .into_iter()
            .map(|(_, c)| c.try_into().unwrap())
            .collect();
        assert_eq!(ceil, vec![1, -1, 2]);
    }

    #[test]
    fn round_trip() {
        let src = "# comment\nvariety Y { dim=3, smooth, projective }\nvariety X { dim=2, projective }\n\
                   morphism f : Y -> X { surjective }\ndivisor D on X { components=[A:1/2], normal_crossing }\n\
                   linebundle L on X { nef }\nbundle E on X { rank=2, nef, big }\nsheaf S on X\n\
                   sheaf G = push(f, omega(Y)) * schur_plus([2,1], E)\nfact summand S of G\n\
                   fact nef_big_twist L by D\nassume big(det(E))\nquery acyclic(G)\n\
                   query vanishing_range(rpush(1, f, omega(Y)) * L * dual(E))\nquery acyclic(omega(X) * twist_ceil(L, D))";
        let doc = parse(src).unwrap();
        let text = pretty_print(&doc);
        let again = parse(&text).unwrap();
        assert_eq!(doc, again);
        assert_eq!(pretty_print(&again), text);
    }

    #[test]
    fn reserved_words_cannot_be_names() {
        let err = parse("variety of { dim=1 }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Invalid(_)));
        let err = parse("variety X { dim=1 }\nvariety X { dim=2 }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Duplicate("X".into()));
    }

    #[test]
    fn json_ast_has_spans() {
        let doc = parse(MINIMAL).unwrap();
        let ast = to_json_ast(&doc);
        let q = &ast["children"].as_array().unwrap().last().unwrap().clone();
        assert_eq!(q["kind"], "query.acyclic");
        assert_eq!(q["span"]["line"], 4);
        assert_eq!(q["children"][0]["kind"], "tensor");
    }
}
