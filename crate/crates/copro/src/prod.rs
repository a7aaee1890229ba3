//! Productivity relations represented symbolically: linear-arithmetic
//! constraints over per-dimension depth variables and per-node presence
//! variables of an (input, output) layout pair, the standard uniform and
//! case forms, and the relation algebra behind every combination principle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ctt::{
    self, dims, mirrors, node_paths, Ctt, CttError, Level, Path, SpfId,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProdError {
    #[error("type tree mismatch: {0}")]
    CttMismatch(String),
    #[error("{0}")]
    Level(#[from] CttError),
    #[error("affine depth-transfer function is invalid: {0}")]
    BadAffine(String),
    #[error("exponent swap requires at least one case")]
    EmptySwap,
    #[error("membership evaluation exceeded its work budget")]
    WorkBudget,
    #[error("constraint parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    In,
    Out,
    Mid(u32),
}

impl Side {
    fn tag(&self) -> String {
        match self {
            Side::In => "I".into(),
            Side::Out => "O".into(),
            Side::Mid(k) => format!("M{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NatVar {
    pub side: Side,
    pub path: Path,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolVar {
    pub side: Side,
    pub path: Path,
}

fn path_suffix(p: &Path) -> String {
    if p.is_empty() {
        String::new()
    } else {
        let parts: Vec<String> = p.iter().map(|i| i.to_string()).collect();
        format!(".{}", parts.join("."))
    }
}

impl fmt::Display for NatVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}{}", self.side.tag(), path_suffix(&self.path))
    }
}

impl fmt::Display for BoolVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}{}", self.side.tag(), path_suffix(&self.path))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Cmp {
    pub fn eval(&self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    fn sym(&self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

/// Atomic constraints: comparisons between two scaled depth variables, a
/// depth variable against a constant, or a presence variable against a
/// boolean.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    NatCmp {
        a: i64,
        x: NatVar,
        cmp: Cmp,
        b: i64,
        y: NatVar,
        c: i64,
    },
    NatConst {
        x: NatVar,
        cmp: Cmp,
        c: i64,
    },
    BoolIs {
        p: BoolVar,
        value: bool,
    },
}

pub const COEF_MIN: i64 = 1;
pub const COEF_MAX: i64 = 16;
pub const CONST_BOUND: i64 = 1 << 16;

pub fn nat_cmp(a: i64, x: NatVar, cmp: Cmp, b: i64, y: NatVar, c: i64) -> Constraint {
    debug_assert!((COEF_MIN..=COEF_MAX).contains(&a) && (COEF_MIN..=COEF_MAX).contains(&b));
    debug_assert!(c.abs() <= CONST_BOUND);
    Constraint::Atom(Atom::NatCmp { a, x, cmp, b, y, c })
}

pub fn nat_const(x: NatVar, cmp: Cmp, c: i64) -> Constraint {
    Constraint::Atom(Atom::NatConst { x, cmp, c })
}

pub fn bool_is(p: BoolVar, value: bool) -> Constraint {
    Constraint::Atom(Atom::BoolIs { p, value })
}

/// An existentially quantified intermediate layout: all depth and presence
/// variables of side `Mid(id)` over `ctt`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidLayout {
    pub id: u32,
    pub ctt: Ctt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    True,
    False,
    Atom(Atom),
    And(Vec<Constraint>),
    Or(Vec<Constraint>),
    Exists(MidLayout, Box<Constraint>),
}

pub fn cand(parts: Vec<Constraint>) -> Constraint {
    let mut flat = vec![];
    for p in parts {
        match p {
            Constraint::True => {}
            Constraint::False => return Constraint::False,
            Constraint::And(xs) => flat.extend(xs),
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => Constraint::True,
        1 => flat.pop().unwrap(),
        _ => Constraint::And(flat),
    }
}

pub fn cor(parts: Vec<Constraint>) -> Constraint {
    let mut flat = vec![];
    for p in parts {
        match p {
            Constraint::False => {}
            Constraint::True => return Constraint::True,
            Constraint::Or(xs) => flat.extend(xs),
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => Constraint::False,
        1 => flat.pop().unwrap(),
        _ => Constraint::Or(flat),
    }
}

/// Affine depth-transfer function: `f(n) = Some(max(0, (alpha*n+beta) div
/// gamma))` for `n >= tau`, undefined below. `uz(m)` is the instance
/// `(1, -m, 1, max(0, m))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AffineSpec {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub tau: i64,
}

impl AffineSpec {
    pub fn new(alpha: i64, beta: i64, gamma: i64, tau: i64) -> Result<Self, ProdError> {
        if alpha < 0 {
            return Err(ProdError::BadAffine("slope must be nonnegative".into()));
        }
        if gamma < 1 {
            return Err(ProdError::BadAffine("divisor must be at least 1".into()));
        }
        if tau < 0 {
            return Err(ProdError::BadAffine("threshold must be nonnegative".into()));
        }
        if alpha > COEF_MAX || gamma > COEF_MAX || beta.abs() > CONST_BOUND {
            return Err(ProdError::BadAffine("coefficients out of range".into()));
        }
        Ok(AffineSpec { alpha, beta, gamma, tau })
    }

    pub fn uz(m: i64) -> Self {
        AffineSpec {
            alpha: 1,
            beta: -m,
            gamma: 1,
            tau: m.max(0),
        }
    }

    /// Evaluates the transfer function; `None` below the threshold.
    pub fn apply(&self, n: i64) -> Option<i64> {
        if n < self.tau {
            return None;
        }
        Some(((self.alpha * n + self.beta).div_euclid(self.gamma)).max(0))
    }

    pub fn bounded(&self) -> bool {
        self.alpha == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProdTag {
    Uz(i64),
    U(AffineSpec),
    Case,
    Trivial,
    Empty,
    Untagged,
}

/// A symbolic productivity relation between the level sets of `dom` and
/// `cod`.
#[derive(Debug, Clone, PartialEq)]
pub struct Productivity {
    pub dom: Ctt,
    pub cod: Ctt,
    pub body: Constraint,
    pub tag: ProdTag,
}

// ---------------------------------------------------------------------
// building blocks

fn nvar(side: Side, path: Path) -> NatVar {
    NatVar { side, path }
}

fn bvar(side: Side, path: Path) -> BoolVar {
    BoolVar { side, path }
}

fn cat(prefix: &Path, rest: &Path) -> Path {
    let mut p = prefix.clone();
    p.extend_from_slice(rest);
    p
}

/// Presence of every ancestor node of a leaf path (conjunction), i.e. the
/// dimension is active.
pub fn active(ctt: &Ctt, side: Side, dim: &Path) -> Constraint {
    let nodes = ancestors_of(ctt, dim);
    cand(nodes.into_iter().map(|p| bool_is(bvar(side, p), true)).collect())
}

/// Some ancestor node is absent.
pub fn inactive(ctt: &Ctt, side: Side, dim: &Path) -> Constraint {
    let nodes = ancestors_of(ctt, dim);
    cor(nodes.into_iter().map(|p| bool_is(bvar(side, p), false)).collect())
}

fn ancestors_of(ctt: &Ctt, dim: &Path) -> Vec<Path> {
    // every proper prefix of a leaf path addresses a node
    let mut out = vec![];
    let mut cur = ctt;
    let mut at: Path = vec![];
    for &i in dim {
        if matches!(cur, Ctt::Node(..)) {
            out.push(at.clone());
        }
        if let Ctt::Node(_, ch) = cur {
            cur = &ch[i];
        }
        at.push(i);
    }
    out
}

/// Boolean equality of two presence variables, expanded over the closed
/// atom language.
fn bool_eq(p: BoolVar, q: BoolVar) -> Constraint {
    cor(vec![
        cand(vec![bool_is(p.clone(), true), bool_is(q.clone(), true)]),
        cand(vec![bool_is(p, false), bool_is(q, false)]),
    ])
}

/// Literal equality of the (canonically flattened) sublevels rooted at two
/// positions of the same shape.
pub fn eq_sub(sub: &Ctt, side_a: Side, at_a: &Path, side_b: Side, at_b: &Path) -> Constraint {
    let mut parts = vec![];
    for n in node_paths(sub) {
        parts.push(bool_eq(bvar(side_a, cat(at_a, &n)), bvar(side_b, cat(at_b, &n))));
    }
    for d in dims(sub) {
        parts.push(nat_cmp(
            1,
            nvar(side_a, cat(at_a, &d)),
            Cmp::Eq,
            1,
            nvar(side_b, cat(at_b, &d)),
            0,
        ));
    }
    cand(parts)
}

/// The sublevel at a position equals the bottom level literally.
pub fn is_bottom(sub: &Ctt, side: Side, at: &Path) -> Constraint {
    match sub {
        Ctt::Leaf(_) => nat_const(nvar(side, at.clone()), Cmp::Eq, 0),
        Ctt::Node(..) => bool_is(bvar(side, at.clone()), false),
    }
}

/// Canonicality: below an absent node everything is forced to zero/false.
/// One cascade clause per edge keeps it linear in the layout size.
pub fn canon(ctt: &Ctt, side: Side) -> Constraint {
    let mut parts = vec![];
    fn rec(ctt: &Ctt, side: Side, at: &mut Path, parts: &mut Vec<Constraint>) {
        if let Ctt::Node(_, children) = ctt {
            for (i, c) in children.iter().enumerate() {
                at.push(i);
                let clause = match c {
                    Ctt::Leaf(_) => nat_const(nvar(side, at.clone()), Cmp::Eq, 0),
                    Ctt::Node(..) => bool_is(bvar(side, at.clone()), false),
                };
                let mut parent = at.clone();
                parent.pop();
                parts.push(cor(vec![bool_is(bvar(side, parent), true), clause]));
                rec(c, side, at, parts);
                at.pop();
            }
        }
    }
    rec(ctt, side, &mut vec![], &mut parts);
    cand(parts)
}

// ---------------------------------------------------------------------
// variable renaming and embedding

#[derive(Clone)]
pub enum MapTarget {
    /// Subtree re-rooted at a prefix of another side.
    Reroot(Side, Path),
    /// A node pinned present (used when a wrapper discharges a root).
    BoolTrue,
}

#[derive(Clone, Default)]
pub struct SideMap {
    rules: Vec<(Path, MapTarget)>,
}

impl SideMap {
    pub fn reroot(side: Side, prefix: Path) -> Self {
        SideMap {
            rules: vec![(vec![], MapTarget::Reroot(side, prefix))],
        }
    }

    pub fn rule(mut self, at: Path, target: MapTarget) -> Self {
        self.rules.push((at, target));
        self
    }

    fn map_nat(&self, path: &Path) -> NatVar {
        let (prefix, target) = self.best(path);
        match target {
            MapTarget::Reroot(side, pre) => nvar(*side, cat(pre, &path[prefix..].to_vec())),
            MapTarget::BoolTrue => panic!("depth variable mapped to a boolean constant"),
        }
    }

    fn map_bool(&self, path: &Path) -> Result<BoolVar, bool> {
        // exact BoolTrue rules win
        for (at, t) in &self.rules {
            if at == path {
                if let MapTarget::BoolTrue = t {
                    return Err(true);
                }
            }
        }
        let (prefix, target) = self.best(path);
        match target {
            MapTarget::Reroot(side, pre) => Ok(bvar(*side, cat(pre, &path[prefix..].to_vec()))),
            MapTarget::BoolTrue => Err(true),
        }
    }

    fn best(&self, path: &Path) -> (usize, &MapTarget) {
        let mut found: Option<(usize, &MapTarget)> = None;
        for (at, t) in &self.rules {
            if matches!(t, MapTarget::BoolTrue) {
                continue;
            }
            if path.len() >= at.len() && &path[..at.len()] == at.as_slice() {
                match found {
                    Some((len, _)) if len >= at.len() => {}
                    _ => found = Some((at.len(), t)),
                }
            }
        }
        found.expect("no mapping rule covers variable path")
    }
}

/// Largest mid-layout id appearing in a constraint.
pub fn max_mid(c: &Constraint) -> Option<u32> {
    fn side_mid(s: &Side) -> Option<u32> {
        match s {
            Side::Mid(k) => Some(*k),
            _ => None,
        }
    }
    match c {
        Constraint::True | Constraint::False => None,
        Constraint::Atom(a) => match a {
            Atom::NatCmp { x, y, .. } => side_mid(&x.side).into_iter().chain(side_mid(&y.side)).max(),
            Atom::NatConst { x, .. } => side_mid(&x.side),
            Atom::BoolIs { p, .. } => side_mid(&p.side),
        },
        Constraint::And(xs) | Constraint::Or(xs) => xs.iter().filter_map(max_mid).max(),
        Constraint::Exists(m, b) => Some(m.id).max(max_mid(b)),
    }
}

pub fn shift_mids(c: &Constraint, by: u32) -> Constraint {
    if by == 0 {
        return c.clone();
    }
    let f = |s: &Side| match s {
        Side::Mid(k) => Side::Mid(k + by),
        other => *other,
    };
    map_constraint(c, &|a| match a {
        Atom::NatCmp { a: ca, x, cmp, b, y, c } => Constraint::Atom(Atom::NatCmp {
            a: *ca,
            x: nvar(f(&x.side), x.path.clone()),
            cmp: *cmp,
            b: *b,
            y: nvar(f(&y.side), y.path.clone()),
            c: *c,
        }),
        Atom::NatConst { x, cmp, c } => Constraint::Atom(Atom::NatConst {
            x: nvar(f(&x.side), x.path.clone()),
            cmp: *cmp,
            c: *c,
        }),
        Atom::BoolIs { p, value } => Constraint::Atom(Atom::BoolIs {
            p: bvar(f(&p.side), p.path.clone()),
            value: *value,
        }),
    },
    &|m| MidLayout { id: m.id + by, ctt: m.ctt.clone() })
}

fn map_constraint(
    c: &Constraint,
    atom_f: &impl Fn(&Atom) -> Constraint,
    mid_f: &impl Fn(&MidLayout) -> MidLayout,
) -> Constraint {
    match c {
        Constraint::True => Constraint::True,
        Constraint::False => Constraint::False,
        Constraint::Atom(a) => atom_f(a),
        Constraint::And(xs) => cand(xs.iter().map(|x| map_constraint(x, atom_f, mid_f)).collect()),
        Constraint::Or(xs) => cor(xs.iter().map(|x| map_constraint(x, atom_f, mid_f)).collect()),
        Constraint::Exists(m, b) => {
            Constraint::Exists(mid_f(m), Box::new(map_constraint(b, atom_f, mid_f)))
        }
    }
}

/// Embeds a productivity body into a larger layout: `In`/`Out` variables are
/// renamed through the side maps, bound mids are left alone (shift them
/// first when combining several bodies).
pub fn embed(body: &Constraint, in_map: &SideMap, out_map: &SideMap) -> Constraint {
    map_constraint(
        body,
        &|a| {
            let m_nat = |x: &NatVar| match x.side {
                Side::In => in_map.map_nat(&x.path),
                Side::Out => out_map.map_nat(&x.path),
                Side::Mid(_) => x.clone(),
            };
            match a {
                Atom::NatCmp { a: ca, x, cmp, b, y, c } => Constraint::Atom(Atom::NatCmp {
                    a: *ca,
                    x: m_nat(x),
                    cmp: *cmp,
                    b: *b,
                    y: m_nat(y),
                    c: *c,
                }),
                Atom::NatConst { x, cmp, c } => Constraint::Atom(Atom::NatConst {
                    x: m_nat(x),
                    cmp: *cmp,
                    c: *c,
                }),
                Atom::BoolIs { p, value } => {
                    let mapped = match p.side {
                        Side::In => in_map.map_bool(&p.path),
                        Side::Out => out_map.map_bool(&p.path),
                        Side::Mid(_) => Ok(p.clone()),
                    };
                    match mapped {
                        Ok(q) => bool_is(q, *value),
                        Err(pinned) => {
                            if pinned == *value {
                                Constraint::True
                            } else {
                                Constraint::False
                            }
                        }
                    }
                }
            }
        },
        &|m| m.clone(),
    )
}

fn ident_map() -> SideMap {
    SideMap::reroot(Side::In, vec![])
}

fn out_ident_map() -> SideMap {
    SideMap::reroot(Side::Out, vec![])
}

/// Shifts the mids of several bodies into disjoint ranges; returns the
/// shifted bodies and the next free mid id.
pub fn disjoint_mids(bodies: &[&Constraint]) -> (Vec<Constraint>, u32) {
    let mut out = vec![];
    let mut next = 0u32;
    for b in bodies {
        let shifted = shift_mids(b, next);
        next = max_mid(&shifted).map(|m| m + 1).unwrap_or(next);
        out.push(shifted);
    }
    (out, next)
}

// ---------------------------------------------------------------------
// standard forms

pub fn prod_trivial(dom: Ctt, cod: Ctt) -> Productivity {
    Productivity {
        dom,
        cod,
        body: Constraint::True,
        tag: ProdTag::Trivial,
    }
}

pub fn prod_empty(dom: Ctt, cod: Ctt) -> Productivity {
    Productivity {
        dom,
        cod,
        body: Constraint::False,
        tag: ProdTag::Empty,
    }
}

/// Standard uniform productivity for an affine transfer function. The
/// closed-form membership used here (least covering depth of the output vs
/// the transferred bound on every active input depth) is validated against
/// a direct evaluation of the defining clauses in the test suite.
pub fn prod_u(spec: AffineSpec, dom: Ctt, cod: Ctt) -> Productivity {
    let body = u_member_body(&spec, &dom, &cod);
    Productivity {
        dom,
        cod,
        body,
        tag: ProdTag::U(spec),
    }
}

pub fn prod_uz(m: i64, dom: Ctt, cod: Ctt) -> Productivity {
    let spec = AffineSpec::uz(m);
    let body = u_member_body(&spec, &dom, &cod);
    Productivity {
        dom,
        cod,
        body,
        tag: ProdTag::Uz(m),
    }
}

fn u_member_body(spec: &AffineSpec, dom: &Ctt, cod: &Ctt) -> Constraint {
    let in_dims = dims(dom);
    let out_dims = dims(cod);
    let mut parts = vec![];

    // the least n covering the output level must clear the threshold
    if spec.tau > 0 {
        parts.push(cor(
            out_dims
                .iter()
                .map(|d2| {
                    cand(vec![
                        active(cod, Side::Out, d2),
                        nat_const(nvar(Side::Out, d2.clone()), Cmp::Ge, spec.tau),
                    ])
                })
                .collect(),
        ));
    }

    let all_out_inactive = cand(
        out_dims
            .iter()
            .map(|d2| inactive(cod, Side::Out, d2))
            .collect(),
    );

    for d1 in &in_dims {
        let x = nvar(Side::In, d1.clone());
        let mut alts = vec![
            inactive(dom, Side::In, d1),
            nat_const(x.clone(), Cmp::Eq, 0),
        ];
        if spec.alpha == 0 {
            let c = spec.beta.div_euclid(spec.gamma).max(0);
            alts.push(nat_const(x.clone(), Cmp::Le, c));
        } else {
            for d2 in &out_dims {
                alts.push(cand(vec![
                    active(cod, Side::Out, d2),
                    nat_cmp(
                        spec.gamma,
                        x.clone(),
                        Cmp::Le,
                        spec.alpha,
                        nvar(Side::Out, d2.clone()),
                        spec.beta,
                    ),
                ]));
            }
            alts.push(cand(vec![
                all_out_inactive.clone(),
                nat_const(x.clone(), Cmp::Le, spec.beta.div_euclid(spec.gamma)),
            ]));
        }
        parts.push(cor(alts));
    }
    cand(parts)
}

/// Standard case productivity: split a product domain towards a shared
/// codomain, each component either obeying its productivity or sitting at
/// bottom.
pub fn prod_case(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    if p1.cod != p2.cod {
        return Err(ProdError::CttMismatch(
            "case components must share a codomain".into(),
        ));
    }
    let dom = ctt::prod_ctt(p1.dom.clone(), p2.dom.clone());
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(&bodies[0], &SideMap::reroot(Side::In, vec![0]), &out_ident_map());
    let b2 = embed(&bodies[1], &SideMap::reroot(Side::In, vec![1]), &out_ident_map());
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        cor(vec![b1, is_bottom(&p1.dom, Side::In, &vec![0])]),
        cor(vec![b2, is_bottom(&p2.dom, Side::In, &vec![1])]),
    ]);
    Ok(Productivity {
        dom,
        cod: p1.cod.clone(),
        body,
        tag: ProdTag::Case,
    })
}

pub fn prod_union(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    if p1.dom != p2.dom || p1.cod != p2.cod {
        return Err(ProdError::CttMismatch("union over distinct layouts".into()));
    }
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    Ok(Productivity {
        dom: p1.dom.clone(),
        cod: p1.cod.clone(),
        body: cor(bodies),
        tag: ProdTag::Untagged,
    })
}

// ---------------------------------------------------------------------
// relation algebra

pub fn rel_ident(c: &Ctt) -> Productivity {
    Productivity {
        dom: c.clone(),
        cod: c.clone(),
        body: eq_sub(c, Side::In, &vec![], Side::Out, &vec![]),
        tag: ProdTag::Untagged,
    }
}

/// Relation composition through a fresh existential layout.
pub fn rel_compose(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    if p1.cod != p2.dom {
        return Err(ProdError::CttMismatch(format!(
            "compose: {:?} vs {:?}",
            p1.cod, p2.dom
        )));
    }
    let (bodies, next) = disjoint_mids(&[&p1.body, &p2.body]);
    let mid = Side::Mid(next);
    let left = embed(&bodies[0], &ident_map(), &SideMap::reroot(mid, vec![]));
    let right = embed(&bodies[1], &SideMap::reroot(mid, vec![]), &out_ident_map());
    let body = Constraint::Exists(
        MidLayout {
            id: next,
            ctt: p1.cod.clone(),
        },
        Box::new(cand(vec![canon(&p1.cod, mid), left, right])),
    );
    Ok(Productivity {
        dom: p1.dom.clone(),
        cod: p2.cod.clone(),
        body,
        tag: ProdTag::Untagged,
    })
}

pub fn rel_power(p: &Productivity, n: u32) -> Result<Productivity, ProdError> {
    if p.dom != p.cod {
        return Err(ProdError::CttMismatch("power needs an endo relation".into()));
    }
    if n == 0 {
        return Ok(rel_ident(&p.dom));
    }
    let mut acc = p.clone();
    for _ in 1..n {
        acc = rel_compose(&acc, p)?;
    }
    Ok(acc)
}

/// Pairing: requirements of either component towards a present pair level.
/// `cod` defaults to the product; second-order coproduct rules reuse the
/// same level formula over a sum codomain.
pub fn rel_fpair_into(
    p1: &Productivity,
    p2: &Productivity,
    cod: Ctt,
) -> Result<Productivity, ProdError> {
    if p1.dom != p2.dom {
        return Err(ProdError::CttMismatch("fpair: domains differ".into()));
    }
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(&bodies[0], &ident_map(), &SideMap::reroot(Side::Out, vec![0]));
    let b2 = embed(&bodies[1], &ident_map(), &SideMap::reroot(Side::Out, vec![1]));
    let body = cand(vec![bool_is(bvar(Side::Out, vec![]), true), cor(vec![b1, b2])]);
    Ok(Productivity {
        dom: p1.dom.clone(),
        cod,
        body,
        tag: ProdTag::Untagged,
    })
}

pub fn rel_fpair(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    let cod = ctt::prod_ctt(p1.cod.clone(), p2.cod.clone());
    rel_fpair_into(p1, p2, cod)
}

pub fn rel_fproduct(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    let dom = ctt::prod_ctt(p1.dom.clone(), p2.dom.clone());
    let cod = ctt::prod_ctt(p1.cod.clone(), p2.cod.clone());
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(
        &bodies[0],
        &SideMap::reroot(Side::In, vec![0]),
        &SideMap::reroot(Side::Out, vec![0]),
    );
    let b2 = embed(
        &bodies[1],
        &SideMap::reroot(Side::In, vec![1]),
        &SideMap::reroot(Side::Out, vec![1]),
    );
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        bool_is(bvar(Side::Out, vec![]), true),
        cor(vec![
            cand(vec![b1, is_bottom(&p2.dom, Side::In, &vec![1])]),
            cand(vec![b2, is_bottom(&p1.dom, Side::In, &vec![0])]),
        ]),
    ]);
    Ok(Productivity {
        dom,
        cod,
        body,
        tag: ProdTag::Untagged,
    })
}

pub fn rel_fcopair(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    if p1.cod != p2.cod {
        return Err(ProdError::CttMismatch("fcopair: codomains differ".into()));
    }
    let dom = ctt::sum_ctt(p1.dom.clone(), p2.dom.clone());
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(&bodies[0], &SideMap::reroot(Side::In, vec![0]), &out_ident_map());
    let b2 = embed(&bodies[1], &SideMap::reroot(Side::In, vec![1]), &out_ident_map());
    let bot1 = is_bottom(&p1.dom, Side::In, &vec![0]);
    let bot2 = is_bottom(&p2.dom, Side::In, &vec![1]);
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        cor(vec![
            cand(vec![b1, bot2.clone()]),
            cand(vec![b2, bot1.clone()]),
            cand(vec![bot1, bot2]),
        ]),
    ]);
    Ok(Productivity {
        dom,
        cod: p1.cod.clone(),
        body,
        tag: ProdTag::Untagged,
    })
}

pub fn rel_fcoproduct(p1: &Productivity, p2: &Productivity) -> Result<Productivity, ProdError> {
    let dom = ctt::sum_ctt(p1.dom.clone(), p2.dom.clone());
    let cod = ctt::sum_ctt(p1.cod.clone(), p2.cod.clone());
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(
        &bodies[0],
        &SideMap::reroot(Side::In, vec![0]),
        &SideMap::reroot(Side::Out, vec![0]),
    );
    let b2 = embed(
        &bodies[1],
        &SideMap::reroot(Side::In, vec![1]),
        &SideMap::reroot(Side::Out, vec![1]),
    );
    let bot1 = is_bottom(&p1.dom, Side::In, &vec![0]);
    let bot2 = is_bottom(&p2.dom, Side::In, &vec![1]);
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        bool_is(bvar(Side::Out, vec![]), true),
        cor(vec![
            cand(vec![b1, bot2.clone()]),
            cand(vec![b2, bot1.clone()]),
            cand(vec![bot1, bot2]),
        ]),
    ]);
    Ok(Productivity {
        dom,
        cod,
        body,
        tag: ProdTag::Untagged,
    })
}

/// Degenerate conditional: the branch is statically known.
pub fn rel_if(b: bool, p1: &Productivity, p2: &Productivity) -> Productivity {
    if b {
        p1.clone()
    } else {
        p2.clone()
    }
}

pub fn rel_fst(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::prod_ctt(c1.clone(), c2.clone()),
        cod: c1.clone(),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            eq_sub(c1, Side::In, &vec![0], Side::Out, &vec![]),
            is_bottom(c2, Side::In, &vec![1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_snd(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::prod_ctt(c1.clone(), c2.clone()),
        cod: c2.clone(),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            eq_sub(c2, Side::In, &vec![1], Side::Out, &vec![]),
            is_bottom(c1, Side::In, &vec![0]),
        ]),
        tag: ProdTag::Untagged,
    }
}

/// `x |-> (v, x)` for a fixed left value.
pub fn rel_pair_fixed_left(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: c2.clone(),
        cod: ctt::prod_ctt(c1.clone(), c2.clone()),
        body: cand(vec![
            bool_is(bvar(Side::Out, vec![]), true),
            eq_sub(c2, Side::In, &vec![], Side::Out, &vec![1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

/// `x |-> (x, v)` for a fixed right value.
pub fn rel_pair_fixed_right(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: c1.clone(),
        cod: ctt::prod_ctt(c1.clone(), c2.clone()),
        body: cand(vec![
            bool_is(bvar(Side::Out, vec![]), true),
            eq_sub(c1, Side::In, &vec![], Side::Out, &vec![0]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_inl(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: c1.clone(),
        cod: ctt::sum_ctt(c1.clone(), c2.clone()),
        body: cand(vec![
            bool_is(bvar(Side::Out, vec![]), true),
            eq_sub(c1, Side::In, &vec![], Side::Out, &vec![0]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_inr(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: c2.clone(),
        cod: ctt::sum_ctt(c1.clone(), c2.clone()),
        body: cand(vec![
            bool_is(bvar(Side::Out, vec![]), true),
            eq_sub(c2, Side::In, &vec![], Side::Out, &vec![1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_comm(c1: &Ctt, c2: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::prod_ctt(c1.clone(), c2.clone()),
        cod: ctt::prod_ctt(c2.clone(), c1.clone()),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            bool_is(bvar(Side::Out, vec![]), true),
            eq_sub(c1, Side::In, &vec![0], Side::Out, &vec![1]),
            eq_sub(c2, Side::In, &vec![1], Side::Out, &vec![0]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_assoc(c1: &Ctt, c2: &Ctt, c3: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::prod_ctt(ctt::prod_ctt(c1.clone(), c2.clone()), c3.clone()),
        cod: ctt::prod_ctt(c1.clone(), ctt::prod_ctt(c2.clone(), c3.clone())),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            bool_is(bvar(Side::In, vec![0]), true),
            bool_is(bvar(Side::Out, vec![]), true),
            bool_is(bvar(Side::Out, vec![1]), true),
            eq_sub(c1, Side::In, &vec![0, 0], Side::Out, &vec![0]),
            eq_sub(c2, Side::In, &vec![0, 1], Side::Out, &vec![1, 0]),
            eq_sub(c3, Side::In, &vec![1], Side::Out, &vec![1, 1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_antiassoc(c1: &Ctt, c2: &Ctt, c3: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::prod_ctt(c1.clone(), ctt::prod_ctt(c2.clone(), c3.clone())),
        cod: ctt::prod_ctt(ctt::prod_ctt(c1.clone(), c2.clone()), c3.clone()),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            bool_is(bvar(Side::In, vec![1]), true),
            bool_is(bvar(Side::Out, vec![]), true),
            bool_is(bvar(Side::Out, vec![0]), true),
            eq_sub(c1, Side::In, &vec![0], Side::Out, &vec![0, 0]),
            eq_sub(c2, Side::In, &vec![1, 0], Side::Out, &vec![0, 1]),
            eq_sub(c3, Side::In, &vec![1, 1], Side::Out, &vec![1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

/// Currying at a fixed first argument: the first component's level is
/// existentially absorbed.
pub fn rel_curry(p: &Productivity) -> Result<Productivity, ProdError> {
    let (c1, c2) = match &p.dom {
        Ctt::Node(SpfId::Product, ch) => (ch[0].clone(), ch[1].clone()),
        _ => return Err(ProdError::CttMismatch("curry needs a product domain".into())),
    };
    let (bodies, next) = disjoint_mids(&[&p.body]);
    let mid = Side::Mid(next);
    let in_map = SideMap::default()
        .rule(vec![], MapTarget::BoolTrue)
        .rule(vec![0], MapTarget::Reroot(mid, vec![]))
        .rule(vec![1], MapTarget::Reroot(Side::In, vec![]));
    let inner = embed(&bodies[0], &in_map, &out_ident_map());
    let body = Constraint::Exists(
        MidLayout {
            id: next,
            ctt: c1.clone(),
        },
        Box::new(cand(vec![canon(&c1, mid), inner])),
    );
    Ok(Productivity {
        dom: c2,
        cod: p.cod.clone(),
        body,
        tag: ProdTag::Untagged,
    })
}

/// Uncurrying a uniform family: either the right component obeys `p` with
/// the left pinned at bottom, or the right component is at bottom.
pub fn rel_uncurry(p: &Productivity, c1: &Ctt) -> Productivity {
    let dom = ctt::prod_ctt(c1.clone(), p.dom.clone());
    let b = embed(&p.body, &SideMap::reroot(Side::In, vec![1]), &out_ident_map());
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        cor(vec![
            cand(vec![b, is_bottom(c1, Side::In, &vec![0])]),
            is_bottom(&p.dom, Side::In, &vec![1]),
        ]),
    ]);
    Productivity {
        dom,
        cod: p.cod.clone(),
        body,
        tag: ProdTag::Untagged,
    }
}

/// Map over a unary container.
pub fn rel_fmap(spf: &SpfId, p: &Productivity) -> Result<Productivity, ProdError> {
    if spf.arity() != 1 {
        return Err(ProdError::CttMismatch("fmap needs a unary container".into()));
    }
    let dom = Ctt::Node(spf.clone(), vec![p.dom.clone()]);
    let cod = Ctt::Node(spf.clone(), vec![p.cod.clone()]);
    let b = embed(
        &p.body,
        &SideMap::reroot(Side::In, vec![0]),
        &SideMap::reroot(Side::Out, vec![0]),
    );
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        bool_is(bvar(Side::Out, vec![]), true),
        cor(vec![b, is_bottom(&p.dom, Side::In, &vec![0])]),
    ]);
    Ok(Productivity {
        dom,
        cod,
        body,
        tag: ProdTag::Untagged,
    })
}

/// Nondegenerate conditional over a constant scrutinee: the constant
/// component must be present, the payload either bottoms out or obeys one
/// of the branches.
pub fn rel_cnif(
    scrutinee: &crate::ctt::ConstType,
    p1: &Productivity,
    p2: &Productivity,
) -> Result<Productivity, ProdError> {
    if p1.dom != p2.dom || p1.cod != p2.cod {
        return Err(ProdError::CttMismatch("cnif branches disagree".into()));
    }
    let dom = ctt::prod_ctt(ctt::const_ctt(scrutinee.clone()), p1.dom.clone());
    let (bodies, _) = disjoint_mids(&[&p1.body, &p2.body]);
    let b1 = embed(&bodies[0], &SideMap::reroot(Side::In, vec![1]), &out_ident_map());
    let b2 = embed(&bodies[1], &SideMap::reroot(Side::In, vec![1]), &out_ident_map());
    let body = cand(vec![
        bool_is(bvar(Side::In, vec![]), true),
        bool_is(bvar(Side::In, vec![0]), true),
        cor(vec![is_bottom(&p1.dom, Side::In, &vec![1]), b1, b2]),
    ]);
    Ok(Productivity {
        dom,
        cod: p1.cod.clone(),
        body,
        tag: ProdTag::Untagged,
    })
}

/// Exponent application `(f, a) |-> f(a)`: the function component must be
/// present and its uniform sublevel equals the output; the argument level
/// is unconstrained.
pub fn rel_ceapp(arity: &crate::ctt::ConstType, c: &Ctt) -> Productivity {
    rel_cgeapp(arity, arity, c)
}

/// Generalized application `(f, a) |-> f(g(a))` with `g` between constant
/// types; the level formula coincides with plain application.
pub fn rel_cgeapp(
    arg: &crate::ctt::ConstType,
    fn_arity: &crate::ctt::ConstType,
    c: &Ctt,
) -> Productivity {
    let dom = ctt::prod_ctt(
        ctt::exp_ctt(fn_arity.clone(), c.clone()),
        ctt::const_ctt(arg.clone()),
    );
    Productivity {
        dom,
        cod: c.clone(),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            bool_is(bvar(Side::In, vec![0]), true),
            eq_sub(c, Side::In, &vec![0, 0], Side::Out, &vec![]),
        ]),
        tag: ProdTag::Untagged,
    }
}

/// Exponent curry: the absorbed constant argument level is existential.
pub fn rel_cecurry(p: &Productivity) -> Result<Productivity, ProdError> {
    let (c1, a) = match &p.dom {
        Ctt::Node(SpfId::Product, ch) => match &ch[1] {
            Ctt::Node(SpfId::ConstF(a), _) => (ch[0].clone(), a.clone()),
            _ => {
                return Err(ProdError::CttMismatch(
                    "cecurry needs a constant right component".into(),
                ))
            }
        },
        _ => return Err(ProdError::CttMismatch("cecurry needs a product domain".into())),
    };
    let c2 = p.cod.clone();
    let (bodies, next) = disjoint_mids(&[&p.body]);
    let mid = Side::Mid(next);
    let a_ctt = ctt::const_ctt(a.clone());
    let in_map = SideMap::default()
        .rule(vec![], MapTarget::BoolTrue)
        .rule(vec![0], MapTarget::Reroot(Side::In, vec![]))
        .rule(vec![1], MapTarget::Reroot(mid, vec![]));
    let out_map = SideMap::reroot(Side::Out, vec![0]);
    let inner = embed(&bodies[0], &in_map, &out_map);
    let body = cand(vec![
        bool_is(bvar(Side::Out, vec![]), true),
        Constraint::Exists(
            MidLayout { id: next, ctt: a_ctt.clone() },
            Box::new(cand(vec![canon(&a_ctt, mid), inner])),
        ),
    ]);
    Ok(Productivity {
        dom: c1,
        cod: ctt::exp_ctt(a, c2),
        body,
        tag: ProdTag::Untagged,
    })
}

/// Generalized exponent curry `x |-> \a. f(a, (x, a))`.
pub fn rel_cgecurry(p: &Productivity) -> Result<Productivity, ProdError> {
    let (a, c1) = match &p.dom {
        Ctt::Node(SpfId::Product, ch) => match (&ch[0], &ch[1]) {
            (Ctt::Node(SpfId::ConstF(a), _), Ctt::Node(SpfId::Product, inner)) => {
                match &inner[1] {
                    Ctt::Node(SpfId::ConstF(a2), _) if a2 == a => {
                        (a.clone(), inner[0].clone())
                    }
                    _ => {
                        return Err(ProdError::CttMismatch(
                            "cgecurry domain must repeat the constant argument".into(),
                        ))
                    }
                }
            }
            _ => {
                return Err(ProdError::CttMismatch(
                    "cgecurry needs domain <A> * (C * <A>)".into(),
                ))
            }
        },
        _ => return Err(ProdError::CttMismatch("cgecurry needs a product domain".into())),
    };
    let c2 = p.cod.clone();
    let (bodies, next) = disjoint_mids(&[&p.body]);
    let m1 = Side::Mid(next);
    let m2 = Side::Mid(next + 1);
    let a_ctt = ctt::const_ctt(a.clone());
    let in_map = SideMap::default()
        .rule(vec![], MapTarget::BoolTrue)
        .rule(vec![1], MapTarget::BoolTrue)
        .rule(vec![0], MapTarget::Reroot(m1, vec![]))
        .rule(vec![1, 0], MapTarget::Reroot(Side::In, vec![]))
        .rule(vec![1, 1], MapTarget::Reroot(m2, vec![]));
    let out_map = SideMap::reroot(Side::Out, vec![0]);
    let inner = embed(&bodies[0], &in_map, &out_map);
    let body = cand(vec![
        bool_is(bvar(Side::Out, vec![]), true),
        Constraint::Exists(
            MidLayout { id: next, ctt: a_ctt.clone() },
            Box::new(Constraint::Exists(
                MidLayout { id: next + 1, ctt: a_ctt.clone() },
                Box::new(cand(vec![canon(&a_ctt, m1), canon(&a_ctt, m2), inner])),
            )),
        ),
    ]);
    Ok(Productivity {
        dom: c1,
        cod: ctt::exp_ctt(a, c2),
        body,
        tag: ProdTag::Untagged,
    })
}

/// Exponent swap over a finite family of cases: the existential over the
/// index becomes the union of the per-case productivities.
pub fn rel_ceswap(
    arity: &crate::ctt::ConstType,
    cases: &[&Productivity],
) -> Result<Productivity, ProdError> {
    if cases.is_empty() {
        return Err(ProdError::EmptySwap);
    }
    let dom = cases[0].dom.clone();
    let cod_inner = cases[0].cod.clone();
    for p in cases {
        if p.dom != dom || p.cod != cod_inner {
            return Err(ProdError::CttMismatch("ceswap cases disagree".into()));
        }
    }
    let bodies: Vec<&Constraint> = cases.iter().map(|p| &p.body).collect();
    let (shifted, _) = disjoint_mids(&bodies);
    let out_map = SideMap::reroot(Side::Out, vec![0]);
    let alts = shifted
        .iter()
        .map(|b| embed(b, &ident_map(), &out_map))
        .collect();
    let body = cand(vec![bool_is(bvar(Side::Out, vec![]), true), cor(alts)]);
    Ok(Productivity {
        dom,
        cod: ctt::exp_ctt(arity.clone(), cod_inner),
        body,
        tag: ProdTag::Untagged,
    })
}

pub fn rel_ceproj(arity: &crate::ctt::ConstType, c: &Ctt) -> Productivity {
    Productivity {
        dom: ctt::exp_ctt(arity.clone(), c.clone()),
        cod: c.clone(),
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            eq_sub(c, Side::In, &vec![0], Side::Out, &vec![]),
        ]),
        tag: ProdTag::Untagged,
    }
}

pub fn rel_cepair(arity: &crate::ctt::ConstType, c1: &Ctt, c2: &Ctt) -> Productivity {
    let dom = ctt::prod_ctt(
        ctt::exp_ctt(arity.clone(), c1.clone()),
        ctt::exp_ctt(arity.clone(), c2.clone()),
    );
    let cod = ctt::exp_ctt(arity.clone(), ctt::prod_ctt(c1.clone(), c2.clone()));
    Productivity {
        dom,
        cod,
        body: cand(vec![
            bool_is(bvar(Side::In, vec![]), true),
            bool_is(bvar(Side::In, vec![0]), true),
            bool_is(bvar(Side::In, vec![1]), true),
            bool_is(bvar(Side::Out, vec![]), true),
            bool_is(bvar(Side::Out, vec![0]), true),
            eq_sub(c1, Side::In, &vec![0, 0], Side::Out, &vec![0, 0]),
            eq_sub(c2, Side::In, &vec![1, 0], Side::Out, &vec![0, 1]),
        ]),
        tag: ProdTag::Untagged,
    }
}

// ---------------------------------------------------------------------
// constructor / destructor constraints (the Fig. 1-precision forms)

/// Constructor (fold) productivity: one fresh layer, so the output must be
/// observed at least one deep, every node of the layer is present and every
/// coinductive slot carries exactly one less depth.
pub fn ctor_productivity(self_ctt: &Ctt, cotype: crate::ctt::CotypeId) -> Productivity {
    let cod = Ctt::Leaf(cotype);
    let n_out = nvar(Side::Out, vec![]);
    let mut parts = vec![nat_const(n_out.clone(), Cmp::Ge, 1)];
    for n in node_paths(self_ctt) {
        parts.push(bool_is(bvar(Side::In, n), true));
    }
    for d in dims(self_ctt) {
        parts.push(nat_cmp(1, nvar(Side::In, d), Cmp::Eq, 1, n_out.clone(), -1));
    }
    Productivity {
        dom: self_ctt.clone(),
        cod,
        body: cand(parts),
        tag: ProdTag::Untagged,
    }
}

/// Destructor productivity for the projection at `path` in the self tree:
/// the output is observed strictly (non-bottom root) and the input depth is
/// one more than the deepest active output dimension.
pub fn dtor_productivity(
    self_ctt: &Ctt,
    cotype: crate::ctt::CotypeId,
    path: &Path,
) -> Result<Productivity, ProdError> {
    let cod = ctt::subtree(self_ctt, path)?.clone();
    let n_in = nvar(Side::In, vec![]);
    let nonbottom = match &cod {
        Ctt::Leaf(_) => nat_const(nvar(Side::Out, vec![]), Cmp::Gt, 0),
        Ctt::Node(..) => bool_is(bvar(Side::Out, vec![]), true),
    };
    let out_dims = dims(&cod);
    // nIn = 1 + max over active output dims (1 when none is active)
    let mut alts = vec![];
    for d2 in &out_dims {
        let mut conj = vec![
            active(&cod, Side::Out, d2),
            nat_cmp(1, n_in.clone(), Cmp::Eq, 1, nvar(Side::Out, d2.clone()), 1),
        ];
        for d2p in &out_dims {
            if d2p == d2 {
                continue;
            }
            conj.push(cor(vec![
                inactive(&cod, Side::Out, d2p),
                nat_cmp(
                    1,
                    nvar(Side::Out, d2p.clone()),
                    Cmp::Le,
                    1,
                    nvar(Side::Out, d2.clone()),
                    0,
                ),
            ]));
        }
        alts.push(cand(conj));
    }
    let all_inactive = cand(
        out_dims
            .iter()
            .map(|d| inactive(&cod, Side::Out, d))
            .collect(),
    );
    alts.push(cand(vec![all_inactive, nat_const(n_in.clone(), Cmp::Eq, 1)]));
    Ok(Productivity {
        dom: Ctt::Leaf(cotype),
        cod,
        body: cand(vec![nonbottom, cor(alts)]),
        tag: ProdTag::Untagged,
    })
}

/// Productivity of the uncurried list-prepend family: the first `m` output
/// elements come from the function component (which must be fully present),
/// the rest shift into the stream component.
pub fn adds_productivity(
    elem: &crate::ctt::ConstType,
    cotype: crate::ctt::CotypeId,
    m: i64,
) -> Productivity {
    let s = Ctt::Leaf(cotype);
    let fn_part = ctt::exp_ctt(
        crate::ctt::ConstType::Nat,
        ctt::const_ctt(elem.clone()),
    );
    let dom = ctt::prod_ctt(fn_part, s.clone());
    let n_out = nvar(Side::Out, vec![]);
    let n_s = nvar(Side::In, vec![1]);
    let body = cand(vec![
        nat_const(n_out.clone(), Cmp::Ge, 1),
        bool_is(bvar(Side::In, vec![]), true),
        bool_is(bvar(Side::In, vec![0]), true),
        bool_is(bvar(Side::In, vec![0, 0]), true),
        cor(vec![
            cand(vec![
                nat_const(n_out.clone(), Cmp::Ge, m),
                nat_cmp(1, n_s.clone(), Cmp::Eq, 1, n_out.clone(), -m),
            ]),
            cand(vec![
                nat_const(n_out.clone(), Cmp::Lt, m),
                nat_const(n_s.clone(), Cmp::Eq, 0),
            ]),
        ]),
    ]);
    Productivity {
        dom,
        cod: s,
        body,
        tag: ProdTag::Untagged,
    }
}

// ---------------------------------------------------------------------
// membership

/// Canonical flattening of a level: presence of every node path (absent
/// below an absent ancestor) and depth of every dimension (zero below an
/// absent ancestor).
pub fn presence_map(ctt: &Ctt, l: &Level) -> BTreeMap<Path, bool> {
    let mut out = BTreeMap::new();
    fn rec(ctt: &Ctt, l: Option<&Level>, at: &mut Path, out: &mut BTreeMap<Path, bool>) {
        if let Ctt::Node(_, children) = ctt {
            let (here, sub): (bool, Vec<Option<&Level>>) = match l {
                Some(Level::NodeSome(ls)) => (true, ls.iter().map(Some).collect()),
                _ => (false, children.iter().map(|_| None).collect()),
            };
            out.insert(at.clone(), here);
            for (i, (c, cl)) in children.iter().zip(sub).enumerate() {
                at.push(i);
                rec(c, cl, at, out);
                at.pop();
            }
        }
    }
    rec(ctt, Some(l), &mut vec![], &mut out);
    out
}

struct MemberCtx<'a> {
    nat: HashMap<(Side, Path), i64>,
    bools: HashMap<(Side, Path), bool>,
    mids: Vec<MidFrame>,
    base_depth: u64,
    work: std::cell::Cell<u64>,
    budget: u64,
    _ph: std::marker::PhantomData<&'a ()>,
}

struct MidFrame;

const MEMBER_SLACK: u64 = 16;
const MEMBER_BUDGET: u64 = 200_000_000;

fn load_level(ctx: &mut MemberCtx, side: Side, ctt: &Ctt, l: &Level) {
    for (p, d) in ctt::level_fun(ctt, l).expect("level mirrors") {
        ctx.nat.insert((side, p), d as i64);
    }
    for (p, b) in presence_map(ctt, l) {
        ctx.bools.insert((side, p), b);
    }
}

fn unload_side(ctx: &mut MemberCtx, side: Side) {
    ctx.nat.retain(|(s, _), _| *s != side);
    ctx.bools.retain(|(s, _), _| *s != side);
}

fn level_max_depth(l: &Level) -> u64 {
    match l {
        Level::Depth(n) => *n,
        Level::NodeNone => 0,
        Level::NodeSome(ls) => ls.iter().map(level_max_depth).max().unwrap_or(0),
    }
}

/// Decides membership of a concrete level pair in a productivity by direct
/// evaluation; existentials over intermediate layouts are searched up to
/// the largest depth in scope plus a fixed slack.
pub fn check_member(p: &Productivity, l1: &Level, l2: &Level) -> Result<bool, ProdError> {
    mirrors(&p.dom, l1)?;
    mirrors(&p.cod, l2)?;
    let mut ctx = MemberCtx {
        nat: HashMap::new(),
        bools: HashMap::new(),
        mids: vec![],
        base_depth: level_max_depth(l1).max(level_max_depth(l2)),
        work: std::cell::Cell::new(0),
        budget: MEMBER_BUDGET,
        _ph: std::marker::PhantomData,
    };
    load_level(&mut ctx, Side::In, &p.dom, l1);
    load_level(&mut ctx, Side::Out, &p.cod, l2);
    eval_member(&p.body, &mut ctx)
}

fn eval_member(c: &Constraint, ctx: &mut MemberCtx) -> Result<bool, ProdError> {
    let w = ctx.work.get() + 1;
    if w > ctx.budget {
        return Err(ProdError::WorkBudget);
    }
    ctx.work.set(w);
    match c {
        Constraint::True => Ok(true),
        Constraint::False => Ok(false),
        Constraint::Atom(a) => Ok(eval_atom(a, ctx)),
        Constraint::And(xs) => {
            for x in xs {
                if !eval_member(x, ctx)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Constraint::Or(xs) => {
            for x in xs {
                if eval_member(x, ctx)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Constraint::Exists(m, body) => {
            let bound = ctx.base_depth + MEMBER_SLACK;
            let side = Side::Mid(m.id);
            ctx.mids.push(MidFrame);
            let mut found = false;
            for lvl in ctt::enumerate_levels(&m.ctt, bound) {
                load_level(ctx, side, &m.ctt, &lvl);
                if eval_member(body, ctx)? {
                    found = true;
                    unload_side(ctx, side);
                    break;
                }
                unload_side(ctx, side);
            }
            ctx.mids.pop();
            Ok(found)
        }
    }
}

fn eval_atom(a: &Atom, ctx: &MemberCtx) -> bool {
    match a {
        Atom::NatCmp { a, x, cmp, b, y, c } => {
            let xv = *ctx.nat.get(&(x.side, x.path.clone())).unwrap_or(&0);
            let yv = *ctx.nat.get(&(y.side, y.path.clone())).unwrap_or(&0);
            cmp.eval(a * xv, b * yv + c)
        }
        Atom::NatConst { x, cmp, c } => {
            let xv = *ctx.nat.get(&(x.side, x.path.clone())).unwrap_or(&0);
            cmp.eval(xv, *c)
        }
        Atom::BoolIs { p, value } => {
            let pv = *ctx.bools.get(&(p.side, p.path.clone())).unwrap_or(&false);
            pv == *value
        }
    }
}

/// Asymptotic stability: holds whenever the codomain has finitely many
/// dimensions, which covers every representable tree here.
pub struct AscReport {
    pub holds: bool,
    pub reason: String,
}

pub fn asc_check(cod: &Ctt) -> AscReport {
    let n = dims(cod).len();
    AscReport {
        holds: true,
        reason: format!("finite dimension set ({n} leaves)"),
    }
}

// ---------------------------------------------------------------------
// printing and parsing

fn fmt_scaled(coef: i64, v: &NatVar) -> String {
    if coef == 1 {
        v.to_string()
    } else {
        format!("{coef}*{v}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::NatCmp { a, x, cmp, b, y, c } => {
                write!(f, "{} {} {}", fmt_scaled(*a, x), cmp.sym(), fmt_scaled(*b, y))?;
                match c.cmp(&0) {
                    std::cmp::Ordering::Greater => write!(f, " + {c}"),
                    std::cmp::Ordering::Less => write!(f, " - {}", -c),
                    std::cmp::Ordering::Equal => Ok(()),
                }
            }
            Atom::NatConst { x, cmp, c } => write!(f, "{x} {} {c}", cmp.sym()),
            Atom::BoolIs { p, value } => write!(f, "{p} = {value}"),
        }
    }
}

impl Constraint {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_and: bool) -> fmt::Result {
        match self {
            Constraint::True => write!(f, "true"),
            Constraint::False => write!(f, "false"),
            Constraint::Atom(a) => write!(f, "{a}"),
            Constraint::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    x.fmt_prec(f, true)?;
                }
                Ok(())
            }
            Constraint::Or(xs) => {
                if in_and {
                    write!(f, "(")?;
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " \\/ ")?;
                    }
                    x.fmt_prec(f, false)?;
                }
                if in_and {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Constraint::Exists(m, b) => {
                write!(f, "exists m{} . (", m.id)?;
                b.fmt_prec(f, false)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// Parses the printed (existential-free) constraint grammar back; used by
/// the round-trip checks of the front end.
pub fn parse_constraint(input: &str) -> Result<Constraint, ProdError> {
    let mut p = Parser {
        toks: tokenize(input)?,
        at: 0,
    };
    let c = p.parse_or()?;
    if p.at != p.toks.len() {
        return Err(ProdError::Parse(format!(
            "trailing input at token {}",
            p.at
        )));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(i64),
    Sym(&'static str),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, ProdError> {
    let mut out = vec![];
    let b: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Tok::Sym("("));
                i += 1;
            }
            ')' => {
                out.push(Tok::Sym(")"));
                i += 1;
            }
            '&' => {
                out.push(Tok::Sym("&"));
                i += 1;
            }
            '*' => {
                out.push(Tok::Sym("*"));
                i += 1;
            }
            '+' => {
                out.push(Tok::Sym("+"));
                i += 1;
            }
            '-' => {
                out.push(Tok::Sym("-"));
                i += 1;
            }
            '\\' => {
                if i + 1 < b.len() && b[i + 1] == '/' {
                    out.push(Tok::Sym("\\/"));
                    i += 2;
                } else {
                    return Err(ProdError::Parse("stray backslash".into()));
                }
            }
            '<' | '>' | '=' => {
                if c != '=' && i + 1 < b.len() && b[i + 1] == '=' {
                    out.push(Tok::Sym(if c == '<' { "<=" } else { ">=" }));
                    i += 2;
                } else {
                    out.push(Tok::Sym(match c {
                        '<' => "<",
                        '>' => ">",
                        _ => "=",
                    }));
                    i += 1;
                }
            }
            '0'..='9' => {
                let mut n = 0i64;
                while i < b.len() && b[i].is_ascii_digit() {
                    n = n * 10 + (b[i] as i64 - '0' as i64);
                    i += 1;
                }
                out.push(Tok::Num(n));
            }
            c if c.is_ascii_alphabetic() => {
                let mut id = String::new();
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == '.' || b[i] == '_') {
                    id.push(b[i]);
                    i += 1;
                }
                out.push(Tok::Ident(id));
            }
            other => return Err(ProdError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, sym: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(sym)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn parse_or(&mut self) -> Result<Constraint, ProdError> {
        let mut parts = vec![self.parse_and()?];
        while self.eat("\\/") {
            parts.push(self.parse_and()?);
        }
        Ok(cor(parts))
    }

    fn parse_and(&mut self) -> Result<Constraint, ProdError> {
        let mut parts = vec![self.parse_leaf()?];
        while self.eat("&") {
            parts.push(self.parse_leaf()?);
        }
        Ok(cand(parts))
    }

    fn parse_leaf(&mut self) -> Result<Constraint, ProdError> {
        if self.eat("(") {
            let c = self.parse_or()?;
            if !self.eat(")") {
                return Err(ProdError::Parse("expected `)`".into()));
            }
            return Ok(c);
        }
        match self.peek().cloned() {
            Some(Tok::Ident(id)) if id == "true" => {
                self.bump();
                Ok(Constraint::True)
            }
            Some(Tok::Ident(id)) if id == "false" => {
                self.bump();
                Ok(Constraint::False)
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_var_name(&mut self, name: &str) -> Result<(bool, Side, Path), ProdError> {
        let mut parts = name.split('.');
        let head = parts.next().unwrap();
        let path: Path = parts
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| ProdError::Parse(format!("bad path segment `{p}`")))
            })
            .collect::<Result<_, _>>()?;
        let (is_bool, rest) = if let Some(r) = head.strip_prefix('n') {
            (false, r)
        } else if let Some(r) = head.strip_prefix('b') {
            (true, r)
        } else {
            return Err(ProdError::Parse(format!("bad variable `{name}`")));
        };
        let side = match rest {
            "I" => Side::In,
            "O" => Side::Out,
            m if m.starts_with('M') => Side::Mid(
                m[1..]
                    .parse::<u32>()
                    .map_err(|_| ProdError::Parse(format!("bad mid id in `{name}`")))?,
            ),
            _ => return Err(ProdError::Parse(format!("bad side in `{name}`"))),
        };
        Ok((is_bool, side, path))
    }

    fn parse_atom(&mut self) -> Result<Constraint, ProdError> {
        // [a*]x cmp rhs
        let (a, name) = match self.bump() {
            Some(Tok::Num(a)) => {
                if !self.eat("*") {
                    return Err(ProdError::Parse("expected `*` after coefficient".into()));
                }
                match self.bump() {
                    Some(Tok::Ident(n)) => (a, n),
                    _ => return Err(ProdError::Parse("expected variable".into())),
                }
            }
            Some(Tok::Ident(n)) => (1, n),
            other => return Err(ProdError::Parse(format!("expected atom, got {other:?}"))),
        };
        let (is_bool, side, path) = self.parse_var_name(&name)?;
        let cmp = match self.bump() {
            Some(Tok::Sym("=")) => Cmp::Eq,
            Some(Tok::Sym("<=")) => Cmp::Le,
            Some(Tok::Sym(">=")) => Cmp::Ge,
            Some(Tok::Sym("<")) => Cmp::Lt,
            Some(Tok::Sym(">")) => Cmp::Gt,
            other => return Err(ProdError::Parse(format!("expected comparison, got {other:?}"))),
        };
        if is_bool {
            if cmp != Cmp::Eq {
                return Err(ProdError::Parse("presence atoms use `=`".into()));
            }
            return match self.bump() {
                Some(Tok::Ident(v)) if v == "true" => Ok(bool_is(bvar(side, path), true)),
                Some(Tok::Ident(v)) if v == "false" => Ok(bool_is(bvar(side, path), false)),
                other => Err(ProdError::Parse(format!("expected boolean, got {other:?}"))),
            };
        }
        let x = nvar(side, path);
        // rhs: number | [b*]y [+|- c]
        let mut neg = false;
        if self.eat("-") {
            neg = true;
        }
        match self.bump() {
            Some(Tok::Num(n)) => {
                let n = if neg { -n } else { n };
                // maybe scaled var: n * y ...
                if !neg && self.eat("*") {
                    let yname = match self.bump() {
                        Some(Tok::Ident(yn)) => yn,
                        _ => return Err(ProdError::Parse("expected variable".into())),
                    };
                    let (yb, yside, ypath) = self.parse_var_name(&yname)?;
                    if yb {
                        return Err(ProdError::Parse("presence variable in depth atom".into()));
                    }
                    let c = self.parse_offset()?;
                    if a == 1 {
                        Ok(nat_cmp(1, x, cmp, n, nvar(yside, ypath), c))
                    } else {
                        Ok(nat_cmp(a, x, cmp, n, nvar(yside, ypath), c))
                    }
                } else {
                    if a != 1 {
                        return Err(ProdError::Parse(
                            "scaled variable against a constant is not in the grammar".into(),
                        ));
                    }
                    Ok(nat_const(x, cmp, n))
                }
            }
            Some(Tok::Ident(yname)) => {
                let (yb, yside, ypath) = self.parse_var_name(&yname)?;
                if yb {
                    return Err(ProdError::Parse("presence variable in depth atom".into()));
                }
                let c = self.parse_offset()?;
                Ok(nat_cmp(a, x, cmp, 1, nvar(yside, ypath), c))
            }
            other => Err(ProdError::Parse(format!("expected rhs, got {other:?}"))),
        }
    }

    fn parse_offset(&mut self) -> Result<i64, ProdError> {
        if self.eat("+") {
            match self.bump() {
                Some(Tok::Num(n)) => Ok(n),
                other => Err(ProdError::Parse(format!("expected number, got {other:?}"))),
            }
        } else if self.eat("-") {
            match self.bump() {
                Some(Tok::Num(n)) => Ok(-n),
                other => Err(ProdError::Parse(format!("expected number, got {other:?}"))),
            }
        } else {
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctt::{const_ctt, prod_ctt, ConstType, CotypeId, Registry, SpfId, Stt};

    pub fn stream_setup() -> (Registry, CotypeId, Ctt, Ctt) {
        let mut reg = Registry::new();
        let stt = Stt::Node(
            SpfId::Product,
            vec![Stt::Node(SpfId::ConstF(ConstType::Nat), vec![]), Stt::Slot],
        );
        let id = reg.elaborate_cotype("stream", stt).unwrap();
        let s = Ctt::Leaf(id);
        let nat_s = prod_ctt(const_ctt(ConstType::Nat), s.clone());
        (reg, id, s, nat_s)
    }

    fn d(n: u64) -> Level {
        Level::Depth(n)
    }

    #[test]
    fn tail_cons_head_memberships() {
        let (reg, id, s, nat_s) = stream_setup();
        let def = reg.get(id);
        let tail = dtor_productivity(&def.self_ctt, id, &vec![1]).unwrap();
        assert!(check_member(&tail, &d(3), &d(2)).unwrap());
        assert!(!check_member(&tail, &d(2), &d(2)).unwrap());
        assert!(!check_member(&tail, &d(1), &d(0)).unwrap(), "no pair at output 0");

        let cons = ctor_productivity(&def.self_ctt, id);
        let l1 = Level::NodeSome(vec![Level::NodeSome(vec![]), d(1)]);
        assert!(check_member(&cons, &l1, &d(2)).unwrap());
        let l1_absent = Level::NodeSome(vec![Level::NodeNone, d(1)]);
        assert!(!check_member(&cons, &l1_absent, &d(2)).unwrap());

        let head = dtor_productivity(&def.self_ctt, id, &vec![0]).unwrap();
        assert!(check_member(&head, &d(1), &Level::NodeSome(vec![])).unwrap());
        assert!(!check_member(&head, &d(0), &Level::NodeSome(vec![])).unwrap());
        assert!(!check_member(&head, &d(1), &Level::NodeNone).unwrap());
        let _ = (s, nat_s);
    }

    #[test]
    fn uz_members() {
        let (_reg, _id, s, _) = stream_setup();
        let uz1 = prod_uz(1, s.clone(), s.clone());
        assert!(check_member(&uz1, &d(0), &d(1)).unwrap());
        assert!(check_member(&uz1, &d(4), &d(5)).unwrap());
        assert!(!check_member(&uz1, &d(1), &d(1)).unwrap());
        assert!(!check_member(&uz1, &d(0), &d(0)).unwrap());

        let uz0 = prod_uz(0, s.clone(), s.clone());
        for n in 0..5 {
            assert!(check_member(&uz0, &d(n), &d(n)).unwrap());
        }
        let uzm1 = prod_uz(-1, s.clone(), s.clone());
        for n in 0..5 {
            assert!(check_member(&uzm1, &d(n + 1), &d(n)).unwrap());
            assert!(!check_member(&uzm1, &d(n + 2), &d(n)).unwrap());
        }
    }

    #[test]
    fn trivial_empty_union() {
        let (_reg, _id, s, _) = stream_setup();
        let t = prod_trivial(s.clone(), s.clone());
        let e = prod_empty(s.clone(), s.clone());
        for a in 0..3 {
            for b in 0..3 {
                assert!(check_member(&t, &d(a), &d(b)).unwrap());
                assert!(!check_member(&e, &d(a), &d(b)).unwrap());
            }
        }
        let u = prod_union(&e, &t).unwrap();
        assert!(check_member(&u, &d(0), &d(2)).unwrap());
    }

    #[test]
    fn compose_tail_twice() {
        let (reg, id, ..) = stream_setup();
        let def = reg.get(id);
        let tail = dtor_productivity(&def.self_ctt, id, &vec![1]).unwrap();
        let tt = rel_compose(&tail, &tail).unwrap();
        assert!(check_member(&tt, &d(5), &d(3)).unwrap());
        assert!(!check_member(&tt, &d(4), &d(3)).unwrap());
        assert!(!check_member(&tt, &d(2), &d(0)).unwrap());
        let p2 = rel_power(&tail, 2).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(
                    check_member(&tt, &d(a), &d(b)).unwrap(),
                    check_member(&p2, &d(a), &d(b)).unwrap()
                );
            }
        }
    }

    #[test]
    fn fpair_with_empty_keeps_identity_side() {
        let (_reg, _id, s, _) = stream_setup();
        let e = prod_empty(s.clone(), s.clone());
        let i = rel_ident(&s);
        let p = rel_fpair(&e, &i).unwrap();
        let out = Level::NodeSome(vec![d(9), d(4)]);
        assert!(check_member(&p, &d(4), &out).unwrap());
        assert!(!check_member(&p, &d(5), &out).unwrap());
    }

    #[test]
    fn fproduct_requires_other_side_bottom() {
        let (_reg, _id, s, _) = stream_setup();
        let uz1 = prod_uz(1, s.clone(), s.clone());
        let p = rel_fproduct(&uz1, &uz1).unwrap();
        let l1 = Level::NodeSome(vec![d(1), d(1)]);
        let l2 = Level::NodeSome(vec![d(2), d(2)]);
        assert!(!check_member(&p, &l1, &l2).unwrap());
        let l1b = Level::NodeSome(vec![d(1), d(0)]);
        assert!(check_member(&p, &l1b, &l2).unwrap());
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let (reg, id, ..) = stream_setup();
        let def = reg.get(id);
        let tail = dtor_productivity(&def.self_ctt, id, &vec![1]).unwrap();
        let s = tail.body.to_string();
        let parsed = parse_constraint(&s).unwrap();
        // same satisfaction over a few levels
        for a in 0..5 {
            for b in 0..5 {
                let p1 = Productivity {
                    dom: tail.dom.clone(),
                    cod: tail.cod.clone(),
                    body: parsed.clone(),
                    tag: ProdTag::Untagged,
                };
                assert_eq!(
                    check_member(&tail, &d(a), &d(b)).unwrap(),
                    check_member(&p1, &d(a), &d(b)).unwrap()
                );
            }
        }
    }

    #[test]
    fn asc_always_holds() {
        let (_reg, _id, s, nat_s) = stream_setup();
        assert!(asc_check(&s).holds);
        assert!(asc_check(&nat_s).holds);
    }
}
