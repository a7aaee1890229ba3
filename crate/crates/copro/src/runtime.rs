//! Lazy operational model of final coalgebras: coinductive values as
//! memoized one-step unfoldings, thunks, knot-tied fixed points, bounded
//! equality-up-to checks and truncated rendering.

use std::cell::{Cell, RefCell};
use std::rc::Rc;

use thiserror::Error;

use crate::ctt::{self, ConstType, CotypeId, Ctt, Level, Registry, SpfId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RtError {
    #[error("nonproductive evaluation of `{origin}`: {detail}")]
    Nonproductive { origin: String, detail: String },
    #[error("value shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("cotype mismatch: expected #{0}, got #{1}")]
    Cotype(u32, u32),
    #[error("equality over an infinite exponent arity is not checkable")]
    InfiniteExp,
    #[error("constant operation failed: {0}")]
    Prim(String),
    #[error("{0}")]
    Other(String),
}

/// Shared unroll budget; spent once per cache-miss unfold.
#[derive(Clone)]
pub struct Fuel(Rc<FuelInner>);

struct FuelInner {
    limit: Cell<i64>,
    left: Cell<i64>,
}

impl Fuel {
    pub fn new(limit: i64) -> Self {
        Fuel(Rc::new(FuelInner {
            limit: Cell::new(limit),
            left: Cell::new(limit),
        }))
    }

    pub fn reset(&self) {
        self.0.left.set(self.0.limit.get());
    }

    pub fn set_limit(&self, limit: i64) {
        self.0.limit.set(limit);
        self.0.left.set(limit);
    }

    pub fn limit(&self) -> i64 {
        self.0.limit.get()
    }

    pub fn spend(&self, origin: &str) -> Result<(), RtError> {
        let left = self.0.left.get();
        if left <= 0 {
            return Err(RtError::Nonproductive {
                origin: origin.to_string(),
                detail: format!("unroll budget of {} exhausted", self.0.limit.get()),
            });
        }
        self.0.left.set(left - 1);
        Ok(())
    }
}

/// A value of a constant type.
#[derive(Debug, Clone)]
pub enum ConstVal {
    Nat(u64),
    Int(i64),
    Bool(bool),
    Unit,
    Enum { tag: u64, card: u64 },
    Pair(Box<ConstVal>, Box<ConstVal>),
    Co(CoVal),
}

impl ConstVal {
    /// Structural equality; `None` when a coinductive constant is reached
    /// (those are only comparable up to a depth).
    pub fn pure_eq(&self, other: &ConstVal) -> Option<bool> {
        match (self, other) {
            (ConstVal::Nat(a), ConstVal::Nat(b)) => Some(a == b),
            (ConstVal::Int(a), ConstVal::Int(b)) => Some(a == b),
            (ConstVal::Bool(a), ConstVal::Bool(b)) => Some(a == b),
            (ConstVal::Unit, ConstVal::Unit) => Some(true),
            (ConstVal::Enum { tag: a, .. }, ConstVal::Enum { tag: b, .. }) => Some(a == b),
            (ConstVal::Pair(a1, a2), ConstVal::Pair(b1, b2)) => {
                Some(a1.pure_eq(b1)? && a2.pure_eq(b2)?)
            }
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            ConstVal::Nat(n) => n.to_string(),
            ConstVal::Int(i) => i.to_string(),
            ConstVal::Bool(b) => b.to_string(),
            ConstVal::Unit => "tt".to_string(),
            ConstVal::Enum { tag, .. } => format!("#{tag}"),
            ConstVal::Pair(a, b) => format!("({},{})", a.render(), b.render()),
            ConstVal::Co(_) => "<co>".to_string(),
        }
    }

    pub fn type_of(&self) -> String {
        match self {
            ConstVal::Nat(_) => "nat".into(),
            ConstVal::Int(_) => "int".into(),
            ConstVal::Bool(_) => "bool".into(),
            ConstVal::Unit => "unit".into(),
            ConstVal::Enum { card, .. } => format!("(enum {card})"),
            ConstVal::Pair(a, b) => format!("(pair {} {})", a.type_of(), b.type_of()),
            ConstVal::Co(c) => format!("(co #{})", c.cotype().0),
        }
    }
}

pub type VRef = Rc<Val>;
pub type ValFn = Rc<dyn Fn(&ConstVal) -> Result<VRef, RtError>>;

/// A runtime value of some type tree. Components may be deferred.
pub enum Val {
    Const(ConstVal),
    Co(CoVal),
    Pair(VRef, VRef),
    Sum { left: bool, payload: VRef },
    List(Vec<VRef>),
    Table { arity: ConstType, entries: Vec<VRef> },
    Fn(ValFn),
    Thunk(Thunk),
}

impl std::fmt::Debug for Val {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Val::Const(c) => write!(f, "Const({})", c.render()),
            Val::Co(c) => write!(f, "Co(#{})", c.cotype().0),
            Val::Pair(..) => write!(f, "Pair"),
            Val::Sum { left, .. } => write!(f, "Sum({})", if *left { "inl" } else { "inr" }),
            Val::List(xs) => write!(f, "List[{}]", xs.len()),
            Val::Table { entries, .. } => write!(f, "Table[{}]", entries.len()),
            Val::Fn(_) => write!(f, "Fn"),
            Val::Thunk(_) => write!(f, "Thunk"),
        }
    }
}

enum ThunkState {
    Pending(Option<Box<dyn FnOnce() -> Result<VRef, RtError>>>),
    Busy,
    Ready(VRef),
    Failed(RtError),
}

/// A memoized deferred value with re-entrancy detection: demanding a thunk
/// from inside its own computation is a nonproductive cycle.
#[derive(Clone)]
pub struct Thunk {
    cell: Rc<RefCell<ThunkState>>,
    origin: Rc<str>,
}

impl Thunk {
    pub fn new(origin: Rc<str>, f: impl FnOnce() -> Result<VRef, RtError> + 'static) -> Self {
        Thunk {
            cell: Rc::new(RefCell::new(ThunkState::Pending(Some(Box::new(f))))),
            origin,
        }
    }

    /// A thunk whose computation is installed after construction; used to
    /// tie knots.
    pub fn new_unset(origin: Rc<str>) -> Self {
        Thunk {
            cell: Rc::new(RefCell::new(ThunkState::Pending(None))),
            origin,
        }
    }

    pub fn set(&self, f: impl FnOnce() -> Result<VRef, RtError> + 'static) {
        let mut st = self.cell.borrow_mut();
        if let ThunkState::Pending(slot @ None) = &mut *st {
            *slot = Some(Box::new(f));
        } else {
            panic!("thunk already set");
        }
    }

    pub fn force(&self) -> Result<VRef, RtError> {
        {
            let st = self.cell.borrow();
            match &*st {
                ThunkState::Ready(v) => return Ok(v.clone()),
                ThunkState::Failed(e) => return Err(e.clone()),
                ThunkState::Busy => {
                    return Err(RtError::Nonproductive {
                        origin: self.origin.to_string(),
                        detail: "value demands itself with no constructor in between".into(),
                    })
                }
                ThunkState::Pending(_) => {}
            }
        }
        let f = {
            let mut st = self.cell.borrow_mut();
            match std::mem::replace(&mut *st, ThunkState::Busy) {
                ThunkState::Pending(Some(f)) => f,
                ThunkState::Pending(None) => panic!("forcing an unset thunk"),
                other => {
                    *st = other;
                    unreachable!()
                }
            }
        };
        let res = f();
        let mut st = self.cell.borrow_mut();
        match &res {
            Ok(v) => *st = ThunkState::Ready(v.clone()),
            Err(e) => *st = ThunkState::Failed(e.clone()),
        }
        res
    }
}

/// Resolves thunk chains to a structural head.
pub fn whnf(v: &VRef) -> Result<VRef, RtError> {
    let mut cur = v.clone();
    loop {
        match &*cur {
            Val::Thunk(t) => cur = t.force()?,
            _ => return Ok(cur),
        }
    }
}

enum CoState {
    Pending(Option<Box<dyn FnOnce() -> Result<VRef, RtError>>>),
    Busy,
    Ready(VRef),
    Failed(RtError),
}

struct CoCell {
    cotype: CotypeId,
    origin: Rc<str>,
    fuel: Fuel,
    state: RefCell<CoState>,
    forced: Cell<u64>,
}

/// A lazy coinductive value: a memoized one-step unfolding into a layer of
/// its cotype's self tree.
#[derive(Clone)]
pub struct CoVal(Rc<CoCell>);

impl CoVal {
    pub fn new(
        cotype: CotypeId,
        origin: Rc<str>,
        fuel: Fuel,
        step: impl FnOnce() -> Result<VRef, RtError> + 'static,
    ) -> Self {
        CoVal(Rc::new(CoCell {
            cotype,
            origin,
            fuel,
            state: RefCell::new(CoState::Pending(Some(Box::new(step)))),
            forced: Cell::new(0),
        }))
    }

    /// Builds a value whose first unfold returns exactly `layer`; this is
    /// the constructor semantics, so the cache starts filled.
    pub fn from_layer(cotype: CotypeId, origin: Rc<str>, fuel: Fuel, layer: VRef) -> Self {
        CoVal(Rc::new(CoCell {
            cotype,
            origin,
            fuel,
            state: RefCell::new(CoState::Ready(layer)),
            forced: Cell::new(0),
        }))
    }

    /// Cyclic construction: the step closure receives the value itself.
    pub fn new_cyclic(
        cotype: CotypeId,
        origin: Rc<str>,
        fuel: Fuel,
        step: impl FnOnce(CoVal) -> Result<VRef, RtError> + 'static,
    ) -> Self {
        let fuel2 = fuel.clone();
        let origin2 = origin.clone();
        CoVal(Rc::new_cyclic(move |weak: &std::rc::Weak<CoCell>| {
            let w = weak.clone();
            CoCell {
                cotype,
                origin: origin2,
                fuel: fuel2,
                state: RefCell::new(CoState::Pending(Some(Box::new(move || {
                    let me = CoVal(w.upgrade().expect("cycle alive"));
                    step(me)
                })))),
                forced: Cell::new(0),
            }
        }))
    }

    pub fn cotype(&self) -> CotypeId {
        self.0.cotype
    }

    pub fn origin(&self) -> &str {
        &self.0.origin
    }

    /// Number of times the step has actually run (memoization probe).
    pub fn forced_count(&self) -> u64 {
        self.0.forced.get()
    }

    pub fn same_cell(&self, other: &CoVal) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    /// Forces one step. Cached after the first demand; the unroll budget is
    /// spent on cache misses only.
    pub fn unfold(&self) -> Result<VRef, RtError> {
        {
            let st = self.0.state.borrow();
            match &*st {
                CoState::Ready(v) => return Ok(v.clone()),
                CoState::Failed(e) => return Err(e.clone()),
                CoState::Busy => {
                    return Err(RtError::Nonproductive {
                        origin: self.0.origin.to_string(),
                        detail: "unfolding demands the value being unfolded".into(),
                    })
                }
                CoState::Pending(_) => {}
            }
        }
        self.0.fuel.spend(&self.0.origin)?;
        let f = {
            let mut st = self.0.state.borrow_mut();
            match std::mem::replace(&mut *st, CoState::Busy) {
                CoState::Pending(Some(f)) => f,
                _ => unreachable!("pending state vanished"),
            }
        };
        self.0.forced.set(self.0.forced.get() + 1);
        let res = f();
        let mut st = self.0.state.borrow_mut();
        match &res {
            Ok(v) => *st = CoState::Ready(v.clone()),
            Err(e) => *st = CoState::Failed(e.clone()),
        }
        res
    }
}

impl std::fmt::Debug for CoVal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CoVal(#{}, {})", self.0.cotype.0, self.0.origin)
    }
}

pub fn vconst(c: ConstVal) -> VRef {
    Rc::new(Val::Const(c))
}

pub fn vco(c: CoVal) -> VRef {
    Rc::new(Val::Co(c))
}

pub fn vpair(a: VRef, b: VRef) -> VRef {
    Rc::new(Val::Pair(a, b))
}

pub fn expect_co(v: &VRef) -> Result<CoVal, RtError> {
    match &*whnf(v)? {
        Val::Co(c) => Ok(c.clone()),
        other => Err(RtError::Shape {
            expected: "coinductive value".into(),
            got: format!("{other:?}"),
        }),
    }
}

pub fn expect_pair(v: &VRef) -> Result<(VRef, VRef), RtError> {
    match &*whnf(v)? {
        Val::Pair(a, b) => Ok((a.clone(), b.clone())),
        other => Err(RtError::Shape {
            expected: "pair".into(),
            got: format!("{other:?}"),
        }),
    }
}

pub fn expect_const(v: &VRef) -> Result<ConstVal, RtError> {
    match &*whnf(v)? {
        Val::Const(c) => Ok(c.clone()),
        other => Err(RtError::Shape {
            expected: "constant".into(),
            got: format!("{other:?}"),
        }),
    }
}

/// Reads a constant-only value (a tree of pairs over constant nodes) into a
/// single `ConstVal`, following the product spine of `ctt`.
pub fn flatten_const(ctt: &Ctt, v: &VRef) -> Result<ConstVal, RtError> {
    match ctt {
        Ctt::Node(SpfId::ConstF(_), _) => expect_const(v),
        Ctt::Node(SpfId::Product, ch) => {
            let (a, b) = expect_pair(v)?;
            Ok(ConstVal::Pair(
                Box::new(flatten_const(&ch[0], &a)?),
                Box::new(flatten_const(&ch[1], &b)?),
            ))
        }
        _ => Err(RtError::Shape {
            expected: "constant-only type tree".into(),
            got: "mixed tree".into(),
        }),
    }
}

/// Splits a `ConstVal` back into the product spine of a constant-only tree.
pub fn unflatten_const(ctt: &Ctt, c: &ConstVal) -> Result<VRef, RtError> {
    match ctt {
        Ctt::Node(SpfId::ConstF(_), _) => Ok(vconst(c.clone())),
        Ctt::Node(SpfId::Product, ch) => match c {
            ConstVal::Pair(a, b) => Ok(vpair(
                unflatten_const(&ch[0], a)?,
                unflatten_const(&ch[1], b)?,
            )),
            _ => Err(RtError::Shape {
                expected: "pair constant".into(),
                got: c.render(),
            }),
        },
        _ => Err(RtError::Shape {
            expected: "constant-only type tree".into(),
            got: "mixed tree".into(),
        }),
    }
}

/// All inhabitants of a finite constant type, in a fixed order.
pub fn enumerate_const(t: &ConstType) -> Option<Vec<ConstVal>> {
    match t {
        ConstType::Bool => Some(vec![ConstVal::Bool(false), ConstVal::Bool(true)]),
        ConstType::Unit => Some(vec![ConstVal::Unit]),
        ConstType::Enum(k) => Some((0..*k).map(|tag| ConstVal::Enum { tag, card: *k }).collect()),
        ConstType::Pair(a, b) => {
            let xs = enumerate_const(a)?;
            let ys = enumerate_const(b)?;
            let mut out = vec![];
            for x in &xs {
                for y in &ys {
                    out.push(ConstVal::Pair(Box::new(x.clone()), Box::new(y.clone())));
                }
            }
            Some(out)
        }
        _ => None,
    }
}

fn const_index(t: &ConstType, c: &ConstVal) -> Option<usize> {
    let all = enumerate_const(t)?;
    all.iter().position(|x| x.pure_eq(c) == Some(true))
}

/// Applies an exponent value (table or function) to an index.
pub fn apply_exp(arity: &ConstType, v: &VRef, idx: &ConstVal) -> Result<VRef, RtError> {
    match &*whnf(v)? {
        Val::Table { entries, .. } => {
            let i = const_index(arity, idx).ok_or_else(|| {
                RtError::Prim(format!("index {} outside arity {arity}", idx.render()))
            })?;
            Ok(entries[i].clone())
        }
        Val::Fn(f) => f(idx),
        other => Err(RtError::Shape {
            expected: "exponent value".into(),
            got: format!("{other:?}"),
        }),
    }
}

pub fn unfold(reg: &Registry, cotype: CotypeId, c: &CoVal) -> Result<VRef, RtError> {
    if c.cotype() != cotype {
        return Err(RtError::Cotype(cotype.0, c.cotype().0));
    }
    let _ = reg;
    c.unfold()
}

/// Constructor: wraps a validated layer. The validation forces the layer
/// through, so this is the strict front door used by tests and direct API
/// callers; evaluation uses `CoVal::from_layer` to stay lazy.
pub fn fold(
    reg: &Registry,
    cotype: CotypeId,
    layer: VRef,
    fuel: Fuel,
    origin: Rc<str>,
) -> Result<CoVal, RtError> {
    let def = reg.get(cotype);
    validate_shape(reg, &def.self_ctt, &layer)?;
    Ok(CoVal::from_layer(cotype, origin, fuel, layer))
}

/// Forces a value far enough to check it against a type tree (one full
/// layer; nested coinductive values are checked by cotype id only).
pub fn validate_shape(reg: &Registry, ctt: &Ctt, v: &VRef) -> Result<(), RtError> {
    let v = whnf(v)?;
    match (ctt, &*v) {
        (Ctt::Leaf(id), Val::Co(c)) => {
            if c.cotype() == *id {
                Ok(())
            } else {
                Err(RtError::Cotype(id.0, c.cotype().0))
            }
        }
        (Ctt::Node(SpfId::ConstF(_), _), Val::Const(_)) => Ok(()),
        (Ctt::Node(SpfId::Product, ch), Val::Pair(a, b)) => {
            validate_shape(reg, &ch[0], a)?;
            validate_shape(reg, &ch[1], b)
        }
        (Ctt::Node(SpfId::Sum, ch), Val::Sum { left, payload }) => {
            validate_shape(reg, &ch[if *left { 0 } else { 1 }], payload)
        }
        (Ctt::Node(SpfId::ListF, ch), Val::List(xs)) => {
            for x in xs {
                validate_shape(reg, &ch[0], x)?;
            }
            Ok(())
        }
        (Ctt::Node(SpfId::Exp(_), ch), Val::Table { entries, .. }) => {
            for x in entries {
                validate_shape(reg, &ch[0], x)?;
            }
            Ok(())
        }
        (Ctt::Node(SpfId::Exp(_), _), Val::Fn(_)) => Ok(()),
        (Ctt::Node(SpfId::IdF, ch), _) => validate_shape(reg, &ch[0], &v),
        (expected, got) => Err(RtError::Shape {
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
        }),
    }
}

/// Equality of constants where coinductive constants are compared up to
/// `depth` (bounded bisimulation; pointer-equal cells shortcut to true).
pub fn const_eq_at(
    reg: &Registry,
    a: &ConstVal,
    b: &ConstVal,
    depth: u64,
) -> Result<bool, RtError> {
    if let Some(r) = a.pure_eq(b) {
        return Ok(r);
    }
    match (a, b) {
        (ConstVal::Co(x), ConstVal::Co(y)) => {
            if x.same_cell(y) {
                return Ok(true);
            }
            if x.cotype() != y.cotype() {
                return Ok(false);
            }
            eq_upto_nat(reg, x.cotype(), x, y, depth)
        }
        (ConstVal::Pair(a1, a2), ConstVal::Pair(b1, b2)) => {
            Ok(const_eq_at(reg, a1, b1, depth)? && const_eq_at(reg, a2, b2, depth)?)
        }
        _ => Ok(false),
    }
}

/// Prefix equality of two coinductive values to depth `n`.
pub fn eq_upto_nat(
    reg: &Registry,
    cotype: CotypeId,
    c1: &CoVal,
    c2: &CoVal,
    n: u64,
) -> Result<bool, RtError> {
    if n == 0 {
        return Ok(true);
    }
    if c1.same_cell(c2) {
        return Ok(true);
    }
    let def = reg.get(cotype);
    let l1 = c1.unfold()?;
    let l2 = c2.unfold()?;
    eq_layer_at(reg, &def.self_ctt, &l1, &l2, n - 1)
}

// One-layer relator at uniform depth `n` for the coinductive positions.
fn eq_layer_at(reg: &Registry, ctt: &Ctt, v1: &VRef, v2: &VRef, n: u64) -> Result<bool, RtError> {
    let v1 = whnf(v1)?;
    let v2 = whnf(v2)?;
    match (ctt, &*v1, &*v2) {
        (Ctt::Leaf(id), Val::Co(a), Val::Co(b)) => eq_upto_nat(reg, *id, a, b, n),
        (Ctt::Node(SpfId::ConstF(_), _), Val::Const(a), Val::Const(b)) => {
            const_eq_at(reg, a, b, n)
        }
        (Ctt::Node(SpfId::Product, ch), Val::Pair(a1, a2), Val::Pair(b1, b2)) => {
            Ok(eq_layer_at(reg, &ch[0], a1, b1, n)? && eq_layer_at(reg, &ch[1], a2, b2, n)?)
        }
        (
            Ctt::Node(SpfId::Sum, ch),
            Val::Sum { left: l1, payload: p1 },
            Val::Sum { left: l2, payload: p2 },
        ) => {
            if l1 != l2 {
                return Ok(false);
            }
            eq_layer_at(reg, &ch[if *l1 { 0 } else { 1 }], p1, p2, n)
        }
        (Ctt::Node(SpfId::ListF, ch), Val::List(xs), Val::List(ys)) => {
            if xs.len() != ys.len() {
                return Ok(false);
            }
            for (x, y) in xs.iter().zip(ys) {
                if !eq_layer_at(reg, &ch[0], x, y, n)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Ctt::Node(SpfId::Exp(arity), ch), _, _) => {
            let idxs = enumerate_const(arity).ok_or(RtError::InfiniteExp)?;
            for i in &idxs {
                let x = apply_exp(arity, &v1, i)?;
                let y = apply_exp(arity, &v2, i)?;
                if !eq_layer_at(reg, &ch[0], &x, &y, n)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Ctt::Node(SpfId::IdF, ch), _, _) => eq_layer_at(reg, &ch[0], &v1, &v2, n),
        (expected, a, b) => Err(RtError::Shape {
            expected: format!("{expected:?}"),
            got: format!("{a:?} vs {b:?}"),
        }),
    }
}

// Probe depth for equality of coinductive constants reached at a presence
// level, where no numeric depth is in scope. Bounded, like all equality
// here.
const CO_CONST_PROBE: u64 = 8;

/// Equality-up-to a level on values of an arbitrary type tree.
pub fn eq_upto_level(
    reg: &Registry,
    ctt: &Ctt,
    v1: &VRef,
    v2: &VRef,
    l: &Level,
) -> Result<bool, RtError> {
    ctt::mirrors(ctt, l).map_err(|e| RtError::Other(e.to_string()))?;
    eq_level_rec(reg, ctt, v1, v2, l)
}

fn eq_level_rec(
    reg: &Registry,
    ctt: &Ctt,
    v1: &VRef,
    v2: &VRef,
    l: &Level,
) -> Result<bool, RtError> {
    match (ctt, l) {
        (Ctt::Leaf(id), Level::Depth(n)) => {
            let a = expect_co(v1)?;
            let b = expect_co(v2)?;
            eq_upto_nat(reg, *id, &a, &b, *n)
        }
        (Ctt::Node(..), Level::NodeNone) => Ok(true),
        (Ctt::Node(spf, ch), Level::NodeSome(ls)) => {
            let v1 = whnf(v1)?;
            let v2 = whnf(v2)?;
            match (spf, &*v1, &*v2) {
                (SpfId::ConstF(_), Val::Const(a), Val::Const(b)) => {
                    const_eq_at(reg, a, b, CO_CONST_PROBE)
                }
                (SpfId::Product, Val::Pair(a1, a2), Val::Pair(b1, b2)) => {
                    Ok(eq_level_rec(reg, &ch[0], a1, b1, &ls[0])?
                        && eq_level_rec(reg, &ch[1], a2, b2, &ls[1])?)
                }
                (
                    SpfId::Sum,
                    Val::Sum { left: a, payload: p1 },
                    Val::Sum { left: b, payload: p2 },
                ) => {
                    if a != b {
                        return Ok(false);
                    }
                    let i = if *a { 0 } else { 1 };
                    eq_level_rec(reg, &ch[i], p1, p2, &ls[i])
                }
                (SpfId::ListF, Val::List(xs), Val::List(ys)) => {
                    if xs.len() != ys.len() {
                        return Ok(false);
                    }
                    for (x, y) in xs.iter().zip(ys) {
                        if !eq_level_rec(reg, &ch[0], x, y, &ls[0])? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                (SpfId::Exp(arity), _, _) => {
                    let idxs = enumerate_const(arity).ok_or(RtError::InfiniteExp)?;
                    for i in &idxs {
                        let x = apply_exp(arity, &v1, i)?;
                        let y = apply_exp(arity, &v2, i)?;
                        if !eq_level_rec(reg, &ch[0], &x, &y, &ls[0])? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                (SpfId::IdF, _, _) => eq_level_rec(reg, &ch[0], &v1, &v2, &ls[0]),
                (_, a, b) => Err(RtError::Shape {
                    expected: format!("{ctt:?}"),
                    got: format!("{a:?} vs {b:?}"),
                }),
            }
        }
        _ => Err(RtError::Other("level does not mirror tree".into())),
    }
}

/// Knot-tied fixed point: a self-referential memoized cell whose first
/// demand evaluates the generating function at the cell. Safe to demand
/// finitely when the caller holds a productivity certificate; otherwise
/// the cycle detector or the fuel guard reports a nonproductive value.
pub fn fix_knot(
    origin: Rc<str>,
    f: Rc<dyn Fn(VRef) -> Result<VRef, RtError>>,
) -> VRef {
    let t = Thunk::new_unset(origin);
    let knot: VRef = Rc::new(Val::Thunk(t.clone()));
    let k = knot.clone();
    t.set(move || {
        let out = f(k.clone())?;
        whnf(&out)
    });
    knot
}

/// First `n` heads of a stream-shaped cotype value.
pub fn stream_prefix(
    reg: &Registry,
    c: &CoVal,
    n: u64,
) -> Result<Vec<ConstVal>, RtError> {
    let def = reg.get(c.cotype());
    if def.stream_elem().is_none() {
        return Err(RtError::Shape {
            expected: "stream-shaped cotype".into(),
            got: def.name.clone(),
        });
    }
    let mut out = vec![];
    let mut cur = c.clone();
    for _ in 0..n {
        let layer = cur.unfold()?;
        let (h, t) = expect_pair(&layer)?;
        out.push(expect_const(&h)?);
        cur = expect_co(&t)?;
    }
    Ok(out)
}

/// Default inhabitant of a cotype: the degenerate cycle over the default
/// layer (the nonemptiness witness of the fixed-point theorems).
pub fn default_coval(reg: &Registry, cotype: CotypeId, fuel: Fuel) -> CoVal {
    let def = reg.get(cotype);
    let self_ctt = def.self_ctt.clone();
    let reg2: Vec<Rc<ctt::CotypeDef>> = (0..reg.len())
        .map(|i| reg.get(CotypeId(i as u32)))
        .collect();
    let fuel2 = fuel.clone();
    CoVal::new_cyclic(
        cotype,
        format!("default:{}", def.name).into(),
        fuel,
        move |me| default_layer(&reg2, &self_ctt, cotype, &me, &fuel2),
    )
}

fn default_layer(
    defs: &[Rc<ctt::CotypeDef>],
    ctt: &Ctt,
    slot: CotypeId,
    knot: &CoVal,
    fuel: &Fuel,
) -> Result<VRef, RtError> {
    match ctt {
        Ctt::Leaf(id) if *id == slot => Ok(vco(knot.clone())),
        Ctt::Leaf(id) => Ok(vco(default_coval_from(defs, *id, fuel))),
        Ctt::Node(SpfId::ConstF(t), _) => Ok(vconst(default_const(defs, t, fuel))),
        Ctt::Node(SpfId::Product, ch) => Ok(vpair(
            default_layer(defs, &ch[0], slot, knot, fuel)?,
            default_layer(defs, &ch[1], slot, knot, fuel)?,
        )),
        Ctt::Node(SpfId::Sum, ch) => Ok(Rc::new(Val::Sum {
            left: true,
            payload: default_layer(defs, &ch[0], slot, knot, fuel)?,
        })),
        Ctt::Node(SpfId::ListF, _) => Ok(Rc::new(Val::List(vec![]))),
        Ctt::Node(SpfId::Exp(a), ch) => {
            let inner = default_layer(defs, &ch[0], slot, knot, fuel)?;
            match enumerate_const(a) {
                Some(idxs) => Ok(Rc::new(Val::Table {
                    arity: a.clone(),
                    entries: idxs.iter().map(|_| inner.clone()).collect(),
                })),
                None => {
                    let inner = inner.clone();
                    Ok(Rc::new(Val::Fn(Rc::new(move |_| Ok(inner.clone())))))
                }
            }
        }
        Ctt::Node(SpfId::IdF, ch) => default_layer(defs, &ch[0], slot, knot, fuel),
    }
}

fn default_coval_from(defs: &[Rc<ctt::CotypeDef>], id: CotypeId, fuel: &Fuel) -> CoVal {
    let def = defs[id.0 as usize].clone();
    let self_ctt = def.self_ctt.clone();
    let defs2 = defs.to_vec();
    let fuel2 = fuel.clone();
    CoVal::new_cyclic(
        id,
        format!("default:{}", def.name).into(),
        fuel.clone(),
        move |me| default_layer(&defs2, &self_ctt, id, &me, &fuel2),
    )
}

fn default_const(defs: &[Rc<ctt::CotypeDef>], t: &ConstType, fuel: &Fuel) -> ConstVal {
    match t {
        ConstType::Nat => ConstVal::Nat(0),
        ConstType::Int => ConstVal::Int(0),
        ConstType::Bool => ConstVal::Bool(false),
        ConstType::Unit => ConstVal::Unit,
        ConstType::Enum(k) => ConstVal::Enum { tag: 0, card: *k },
        ConstType::Pair(a, b) => ConstVal::Pair(
            Box::new(default_const(defs, a, fuel)),
            Box::new(default_const(defs, b, fuel)),
        ),
        ConstType::Co(id) => ConstVal::Co(default_coval_from(defs, *id, fuel)),
    }
}

/// Default value of an arbitrary type tree.
pub fn default_val(reg: &Registry, ctt: &Ctt, fuel: &Fuel) -> VRef {
    let defs: Vec<Rc<ctt::CotypeDef>> = (0..reg.len())
        .map(|i| reg.get(CotypeId(i as u32)))
        .collect();
    default_val_from(&defs, ctt, fuel)
}

fn default_val_from(defs: &[Rc<ctt::CotypeDef>], ctt: &Ctt, fuel: &Fuel) -> VRef {
    match ctt {
        Ctt::Leaf(id) => vco(default_coval_from(defs, *id, fuel)),
        Ctt::Node(SpfId::ConstF(t), _) => vconst(default_const(defs, t, fuel)),
        Ctt::Node(SpfId::Product, ch) => vpair(
            default_val_from(defs, &ch[0], fuel),
            default_val_from(defs, &ch[1], fuel),
        ),
        Ctt::Node(SpfId::Sum, ch) => Rc::new(Val::Sum {
            left: true,
            payload: default_val_from(defs, &ch[0], fuel),
        }),
        Ctt::Node(SpfId::ListF, _) => Rc::new(Val::List(vec![])),
        Ctt::Node(SpfId::Exp(a), ch) => {
            let inner = default_val_from(defs, &ch[0], fuel);
            match enumerate_const(a) {
                Some(idxs) => Rc::new(Val::Table {
                    arity: a.clone(),
                    entries: idxs.iter().map(|_| inner.clone()).collect(),
                }),
                None => Rc::new(Val::Fn(Rc::new(move |_| Ok(inner.clone())))),
            }
        }
        Ctt::Node(SpfId::IdF, ch) => default_val_from(defs, &ch[0], fuel),
    }
}

/// Deterministic truncated rendering; forces at most `depth` unfolds along
/// any path and prints `…` at the cut.
pub fn render_trunc(reg: &Registry, ctt: &Ctt, v: &VRef, depth: u64) -> Result<String, RtError> {
    match ctt {
        Ctt::Leaf(id) => {
            let c = expect_co(v)?;
            if c.cotype() != *id {
                return Err(RtError::Cotype(id.0, c.cotype().0));
            }
            render_co(reg, &c, depth)
        }
        Ctt::Node(spf, ch) => {
            let v = whnf(v)?;
            match (spf, &*v) {
                (SpfId::ConstF(_), Val::Const(c)) => Ok(render_const(reg, c, depth)),
                (SpfId::Product, Val::Pair(a, b)) => Ok(format!(
                    "({}, {})",
                    render_trunc(reg, &ch[0], a, depth)?,
                    render_trunc(reg, &ch[1], b, depth)?
                )),
                (SpfId::Sum, Val::Sum { left, payload }) => {
                    let i = if *left { 0 } else { 1 };
                    let tag = if *left { "inl" } else { "inr" };
                    Ok(format!("{tag} {}", render_trunc(reg, &ch[i], payload, depth)?))
                }
                (SpfId::ListF, Val::List(xs)) => {
                    let parts: Result<Vec<_>, _> = xs
                        .iter()
                        .map(|x| render_trunc(reg, &ch[0], x, depth))
                        .collect();
                    Ok(format!("[{}]", parts?.join(", ")))
                }
                (SpfId::Exp(arity), _) => match enumerate_const(arity) {
                    Some(idxs) => {
                        let mut parts = vec![];
                        for i in &idxs {
                            let x = apply_exp(arity, &v, i)?;
                            parts.push(render_trunc(reg, &ch[0], &x, depth)?);
                        }
                        Ok(format!("{{{}}}", parts.join(", ")))
                    }
                    None => Ok("<fn>".into()),
                },
                (SpfId::IdF, _) => render_trunc(reg, &ch[0], &v, depth),
                (_, got) => Err(RtError::Shape {
                    expected: format!("{ctt:?}"),
                    got: format!("{got:?}"),
                }),
            }
        }
    }
}

fn render_const(reg: &Registry, c: &ConstVal, depth: u64) -> String {
    match c {
        ConstVal::Co(cv) => render_co(reg, cv, depth).unwrap_or_else(|e| format!("<{e}>")),
        other => other.render(),
    }
}

fn render_co(reg: &Registry, c: &CoVal, depth: u64) -> Result<String, RtError> {
    if depth == 0 {
        return Ok("…".into());
    }
    let def = reg.get(c.cotype());
    let layer = c.unfold()?;
    if def.stream_elem().is_some() {
        let (h, t) = expect_pair(&layer)?;
        let head = render_const(reg, &expect_const(&h)?, depth.saturating_sub(1));
        let tail = render_co(reg, &expect_co(&t)?, depth - 1)?;
        return Ok(format!("{head} :: {tail}"));
    }
    // flatten the product spine of the self tree into one tuple
    let mut parts = vec![];
    collect_layer(reg, &def.self_ctt, &layer, depth - 1, &mut parts)?;
    if parts.len() == 1 {
        Ok(parts.pop().unwrap())
    } else {
        Ok(format!("({})", parts.join(", ")))
    }
}

fn collect_layer(
    reg: &Registry,
    ctt: &Ctt,
    v: &VRef,
    depth: u64,
    out: &mut Vec<String>,
) -> Result<(), RtError> {
    match ctt {
        Ctt::Node(SpfId::Product, ch) => {
            let (a, b) = expect_pair(v)?;
            collect_layer(reg, &ch[0], &a, depth, out)?;
            collect_layer(reg, &ch[1], &b, depth, out)
        }
        Ctt::Leaf(id) => {
            let c = expect_co(v)?;
            if c.cotype() != *id {
                return Err(RtError::Cotype(id.0, c.cotype().0));
            }
            out.push(render_co(reg, &c, depth)?);
            Ok(())
        }
        _ => {
            out.push(render_trunc(reg, ctt, v, depth)?);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctt::{const_ctt, prod_ctt, Stt};

    fn stream_reg() -> (Registry, CotypeId) {
        let mut reg = Registry::new();
        let stt = Stt::Node(
            SpfId::Product,
            vec![Stt::Node(SpfId::ConstF(ConstType::Nat), vec![]), Stt::Slot],
        );
        let id = reg.elaborate_cotype("stream", stt).unwrap();
        (reg, id)
    }

    fn cycle_stream(reg: &Registry, id: CotypeId, fuel: &Fuel, k: u64) -> CoVal {
        // the stream k :: k :: k :: ...
        CoVal::new_cyclic(id, "cycle".into(), fuel.clone(), move |me| {
            Ok(vpair(vconst(ConstVal::Nat(k)), vco(me)))
        })
    }

    fn counting_stream(reg: &Registry, id: CotypeId, fuel: &Fuel, from: u64) -> CoVal {
        let reg_len = reg.len();
        let _ = reg_len;
        let fuel2 = fuel.clone();
        let id2 = id;
        CoVal::new(id, "count".into(), fuel.clone(), move || {
            // builds lazily: from :: counting(from+1)
            fn mk(id: CotypeId, fuel: &Fuel, from: u64) -> CoVal {
                let f2 = fuel.clone();
                CoVal::new(id, "count".into(), fuel.clone(), move || {
                    Ok(vpair(
                        vconst(ConstVal::Nat(from)),
                        vco(mk(id, &f2, from + 1)),
                    ))
                })
            }
            Ok(vpair(
                vconst(ConstVal::Nat(from)),
                vco(mk(id2, &fuel2, from + 1)),
            ))
        })
    }

    #[test]
    fn fold_unfold_retraction() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(1000);
        let zeros = cycle_stream(&reg, id, &fuel, 0);
        let layer = vpair(vconst(ConstVal::Nat(7)), vco(zeros.clone()));
        let c = fold(&reg, id, layer.clone(), fuel.clone(), "t".into()).unwrap();
        let back = c.unfold().unwrap();
        let (h, t) = expect_pair(&back).unwrap();
        assert_eq!(expect_const(&h).unwrap().pure_eq(&ConstVal::Nat(7)), Some(true));
        assert!(expect_co(&t).unwrap().same_cell(&zeros));
    }

    #[test]
    fn prefix_and_memo() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(1000);
        let c = counting_stream(&reg, id, &fuel, 0);
        let p = stream_prefix(&reg, &c, 5).unwrap();
        let got: Vec<u64> = p
            .iter()
            .map(|v| match v {
                ConstVal::Nat(n) => *n,
                _ => panic!(),
            })
            .collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
        assert_eq!(c.forced_count(), 1);
        let _ = stream_prefix(&reg, &c, 5).unwrap();
        assert_eq!(c.forced_count(), 1, "cache hit: no re-evaluation");
    }

    #[test]
    fn eq_upto_nat_depths() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(10_000);
        let zeros = cycle_stream(&reg, id, &fuel, 0);
        let growing = counting_stream(&reg, id, &fuel, 0);
        // zeros vs growing: share the first element only
        assert!(eq_upto_nat(&reg, id, &vco_c(&zeros), &vco_c(&growing), 0).unwrap());
        assert!(eq_upto_nat(&reg, id, &vco_c(&zeros), &vco_c(&growing), 1).unwrap());
        assert!(!eq_upto_nat(&reg, id, &vco_c(&zeros), &vco_c(&growing), 2).unwrap());
        for n in 0..=8 {
            assert!(eq_upto_nat(&reg, id, &zeros, &zeros, n).unwrap());
        }
    }

    fn vco_c(c: &CoVal) -> CoVal {
        c.clone()
    }

    #[test]
    fn eq_upto_level_cases() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(10_000);
        let zeros = cycle_stream(&reg, id, &fuel, 0);
        let growing = counting_stream(&reg, id, &fuel, 0);
        let nat_s = prod_ctt(const_ctt(ConstType::Nat), Ctt::Leaf(id));
        let v1 = vpair(vconst(ConstVal::Nat(0)), vco(zeros.clone()));
        let v2 = vpair(vconst(ConstVal::Nat(0)), vco(growing.clone()));
        assert!(eq_upto_level(&reg, &nat_s, &v1, &v2, &Level::NodeNone).unwrap());
        let l1 = Level::NodeSome(vec![Level::NodeSome(vec![]), Level::Depth(1)]);
        assert!(eq_upto_level(&reg, &nat_s, &v1, &v2, &l1).unwrap());
        let l2 = Level::NodeSome(vec![Level::NodeSome(vec![]), Level::Depth(2)]);
        assert!(!eq_upto_level(&reg, &nat_s, &v1, &v2, &l2).unwrap());

        // inl vs inr: equal only up to None
        let s_or_s = crate::ctt::sum_ctt(Ctt::Leaf(id), Ctt::Leaf(id));
        let a: VRef = Rc::new(Val::Sum { left: true, payload: vco(zeros.clone()) });
        let b: VRef = Rc::new(Val::Sum { left: false, payload: vco(zeros.clone()) });
        assert!(eq_upto_level(&reg, &s_or_s, &a, &b, &Level::NodeNone).unwrap());
        let some = Level::NodeSome(vec![Level::Depth(0), Level::Depth(0)]);
        assert!(!eq_upto_level(&reg, &s_or_s, &a, &b, &some).unwrap());
    }

    #[test]
    fn identity_knot_is_rejected_at_demand() {
        let (reg, id) = stream_reg();
        let knot = fix_knot("selfloop".into(), Rc::new(|x: VRef| Ok(x)));
        let err = expect_co(&knot).unwrap_err();
        assert!(matches!(err, RtError::Nonproductive { .. }));
        let _ = (reg, id);
    }

    #[test]
    fn fuel_exhaustion_reports_origin() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(3);
        let c = counting_stream(&reg, id, &fuel, 0);
        let err = stream_prefix(&reg, &c, 10).unwrap_err();
        match err {
            RtError::Nonproductive { origin, .. } => assert_eq!(origin, "count"),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn default_coval_is_lazy_cycle() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(100);
        let d = default_coval(&reg, id, fuel);
        let p = stream_prefix(&reg, &d, 3).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|v| v.pure_eq(&ConstVal::Nat(0)) == Some(true)));
    }

    #[test]
    fn render_stream_and_sum() {
        let (reg, id) = stream_reg();
        let fuel = Fuel::new(100);
        let zeros = cycle_stream(&reg, id, &fuel, 0);
        let s = render_trunc(&reg, &Ctt::Leaf(id), &vco(zeros.clone()), 2).unwrap();
        assert_eq!(s, "0 :: 0 :: …");
        let s_or_s = crate::ctt::sum_ctt(Ctt::Leaf(id), Ctt::Leaf(id));
        let v: VRef = Rc::new(Val::Sum { left: true, payload: vco(zeros) });
        let s = render_trunc(&reg, &s_or_s, &v, 1).unwrap();
        assert_eq!(s, "inl 0 :: …");
    }
}
